import numpy as np
import pytest

from aahc_sim.agents.buffer import StepRecord, TrajectoryBuffer
from aahc_sim.agents.evaluate import evaluate, random_policy
from aahc_sim.agents.policies import RandomPolicy
from aahc_sim.agents.ppo import Hyperparams, NonFiniteLossError
from aahc_sim.agents.trainers import TRAINERS, AahcTrainer, CtrlTrainer, IteRlTrainer
from aahc_sim.env import ScenarioConfig
from aahc_sim.harness.rng import stream
from oracles import central_difference, gae_oracle, max_rel_error

CFG = ScenarioConfig()
SMALL = Hyperparams(trajectory_length=128, batch_size=32, epochs=2, hidden=(16, 16), total_steps=256)


def filled(cls, seed=0, hp=SMALL):
    tr = cls(CFG, hp, seed)
    tr.collect(hp.trajectory_length)
    assert tr.buffer.full
    return tr


def snapshot(params):
    return [p.copy() for p in params]


def test_buffer_basics():
    buf = TrajectoryBuffer(2, 3, 4, 2)
    rec = StepRecord(np.ones(3), 1, -0.5, -0.1, np.ones(4), np.zeros(2), -1.0, -0.2, -1.0, np.ones(3), None, True)
    buf.add(rec)
    buf.add(rec)
    assert buf.full
    with pytest.raises(OverflowError):
        buf.add(rec)
    assert buf.joint.shape == (2, 7)
    buf.clear()
    assert buf.size == 0


def test_pure_rollout_below_buffer_length():
    tr = AahcTrainer(CFG, SMALL, 0)
    before = snapshot(tr.ul.params + tr.dl.params)
    log = tr.train(total_steps=100)
    assert tr.updates == 0 and tr.env_steps == 100 and len(log) == 1
    for a, b in zip(before, tr.ul.params + tr.dl.params):
        np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("algo", ["aahc", "iterl", "ctrl"])
def test_training_deterministic(algo):
    logs = []
    for _ in range(2):
        tr = TRAINERS[algo](CFG, SMALL, 5)
        log = tr.train()
        logs.append([(s.env_step, s.episodes, s.mean_ru, s.mean_rd, s.mean_rg, s.kpis) for s in log])
        logs[-1].append([p.tobytes() for p in tr.ul.params + tr.dl.params])
    assert logs[0] == logs[1]
    assert tr.updates == 2


def test_rollout_records_are_consistent():
    tr = filled(AahcTrainer)
    buf = tr.buffer
    n = buf.size
    # next UL state of a non-terminal step is the UL state of the following record
    for i in range(n - 1):
        if not buf.done[i]:
            np.testing.assert_array_equal(buf.s_u_next[i], buf.s_u[i + 1])
            np.testing.assert_array_equal(buf.s_d_next[i], buf.s_d[i + 1])
    assert np.all(buf.a_u < CFG.num_actions)


def test_first_minibatch_ratio_is_one():
    tr = filled(AahcTrainer)
    heads = tr.prepare()
    adv_ul, adv_dl = tr.actor_advantages(heads)
    info = tr.actor_step(np.arange(32), adv_ul, adv_dl)
    np.testing.assert_allclose(info["ratio_ul"], 1.0, atol=1e-12)
    np.testing.assert_allclose(info["ratio_dl"], 1.0, atol=1e-12)


def test_zero_advantage_without_entropy_changes_nothing():
    hp = Hyperparams(trajectory_length=128, batch_size=32, epochs=2, hidden=(16, 16), entropy_coef=0.0,
                     normalize_advantages=False)
    tr = filled(AahcTrainer, hp=hp)
    before = snapshot(tr.ul.params + tr.dl.params)
    z = np.zeros(tr.buffer.size)
    tr.actor_step(np.arange(32), z, z)
    for a, b in zip(before, tr.ul.params + tr.dl.params):
        np.testing.assert_array_equal(a, b)


def test_single_sample_step_matches_numeric_gradient():
    hp = Hyperparams(trajectory_length=1, batch_size=1, epochs=1, hidden=(8,), entropy_coef=0.0,
                     normalize_advantages=False, lr_ul=1e-3)
    tr = AahcTrainer(CFG, hp, 3)
    tr.collect(1)
    buf = tr.buffer
    adv = np.array([0.7])
    idx = np.array([0])
    from aahc_sim.agents.ppo import clip_surrogate

    def loss():
        return tr.ul.loss_and_grads(buf.s_u[idx], buf.a_u[idx], buf.logp_u[idx], adv, 0.2, 0.0, clip_surrogate)[0]

    num = central_difference(loss, tr.ul.params)
    before = snapshot(tr.ul.params)
    tr.actor_step(idx, adv, np.zeros(1))
    # Adam's first step moves each coordinate by lr * g / (|g| + eps)
    for b, a, g in zip(before, tr.ul.params, num):
        expected = -1e-3 * g / (np.abs(g) + 1e-8)
        np.testing.assert_allclose(a - b, expected, atol=2e-6)


def test_actor_updates_use_only_own_data():
    tr1 = filled(AahcTrainer, seed=4)
    tr2 = filled(AahcTrainer, seed=4)
    tr2.buffer.s_d[:] = np.random.default_rng(0).uniform(size=tr2.buffer.s_d.shape)
    tr2.buffer.a_d[:] += 1.0
    adv = np.random.default_rng(1).normal(size=(2, tr1.buffer.size))
    idx = np.arange(32)
    tr1.actor_step(idx, adv[0], adv[1])
    tr2.actor_step(idx, adv[0], adv[1])
    for a, b in zip(tr1.ul.params, tr2.ul.params):
        assert a.tobytes() == b.tobytes()
    assert any(a.tobytes() != b.tobytes() for a, b in zip(tr1.dl.params, tr2.dl.params))


def test_targets_frozen_within_phase():
    tr = filled(AahcTrainer)
    h1 = tr.prepare()
    tr.critic_step(h1, np.arange(32))
    h2 = tr.prepare()
    for k in h1:
        np.testing.assert_array_equal(h1[k].targets, h2[k].targets)
        np.testing.assert_array_equal(h1[k].advantages, h2[k].advantages)


def test_gae_heads_match_oracle():
    for cls in (AahcTrainer, IteRlTrainer, CtrlTrainer):
        tr = filled(cls)
        heads = tr.prepare()
        d = tr.buffer.done[: tr.buffer.size]
        for name, h in heads.items():
            v = tr.targets[name].predict(h.inputs)[:, 0]
            vn = tr.targets[name].predict(h.next_inputs)[:, 0]
            np.testing.assert_allclose(h.advantages, gae_oracle(h.rewards, v, vn, d, 0.99, 0.95), atol=1e-10)
            np.testing.assert_allclose(h.targets, h.advantages + 0.99 * v, atol=1e-12)


def test_conventional_target_switch():
    hp = Hyperparams(trajectory_length=128, batch_size=32, epochs=2, hidden=(16, 16), critic_target="conventional")
    tr = filled(AahcTrainer, hp=hp)
    heads = tr.prepare()
    v = tr.targets["u"].predict(heads["u"].inputs)[:, 0]
    np.testing.assert_allclose(heads["u"].targets, heads["u"].advantages + v, atol=1e-12)


def _critic_loss(tr, heads, idx):
    total = 0.0
    for name, h in heads.items():
        v = tr.critics[name].predict(h.inputs[idx])[:, 0]
        total += h.weight * float(np.mean((v - h.targets[idx]) ** 2))
    return total


def test_hybrid_critic_gradient_all_branches():
    tr = filled(AahcTrainer)
    heads = tr.prepare()
    idx = np.arange(16)
    grads = []
    for name in ("u", "d", "g"):
        h, net = heads[name], tr.critics[name]
        v = net.forward(h.inputs[idx])[:, 0]
        grads += net.backward((2.0 * h.weight / len(idx)) * (v - h.targets[idx])[:, None])[0]
    params = [p for n in ("u", "d", "g") for p in tr.critics[n].params]
    num = central_difference(lambda: _critic_loss(tr, heads, idx), params, h=1e-4, stencil=4)
    assert max_rel_error(grads, num) < 1e-5


def test_zero_weights_equal_single_branch_training():
    hp0 = Hyperparams(trajectory_length=128, batch_size=32, epochs=2, hidden=(16, 16), w_d=0.0, w_g=0.0)
    tr = filled(AahcTrainer, hp=hp0)
    heads = tr.prepare()
    ref = tr.critics["u"].copy()
    from aahc_sim.nn import Adam
    opt = Adam(ref.params, hp0.lr_critic)
    for idx in (np.arange(32), np.arange(32, 64)):
        tr.critic_step(heads, idx)
        h = heads["u"]
        v = ref.forward(h.inputs[idx])[:, 0]
        opt.step(ref.backward((2.0 / len(idx)) * (v - h.targets[idx])[:, None])[0])
    for a, b in zip(ref.params, tr.critics["u"].params):
        np.testing.assert_array_equal(a, b)


def test_targets_equal_values_give_zero_gradient():
    tr = filled(AahcTrainer)
    heads = tr.prepare()
    idx = np.arange(32)
    for name, h in heads.items():
        h.targets = tr.critics[name].predict(h.inputs)[:, 0]
    before = snapshot([p for n in tr.critics for p in tr.critics[n].params])
    tr.critic_step(heads, idx)
    after = [p for n in tr.critics for p in tr.critics[n].params]
    for a, b in zip(before, after):
        np.testing.assert_array_equal(a, b)


def test_summed_loss_gradient_is_sum_of_branches():
    tr = filled(AahcTrainer)
    heads = tr.prepare()
    idx = np.arange(20, 52)
    per_branch = {}
    for name, h in heads.items():
        net = tr.critics[name]
        v = net.forward(h.inputs[idx])[:, 0]
        per_branch[name] = net.backward((2.0 * h.weight / len(idx)) * (v - h.targets[idx])[:, None])[0]
    summed = central_difference(lambda: _critic_loss(tr, heads, idx),
                                [p for n in ("u", "d", "g") for p in tr.critics[n].params], h=1e-4, stencil=4)
    flat = per_branch["u"] + per_branch["d"] + per_branch["g"]
    assert max_rel_error(flat, summed) < 1e-5


def test_target_sync_after_update():
    tr = filled(AahcTrainer)
    tr.update()
    for name in tr.critics:
        for a, b in zip(tr.critics[name].params, tr.targets[name].params):
            np.testing.assert_array_equal(a, b)
    assert tr.buffer.size == 0


def test_update_requires_full_buffer():
    tr = AahcTrainer(CFG, SMALL, 0)
    tr.collect(10)
    with pytest.raises(RuntimeError):
        tr.update()


def test_nonfinite_loss_aborts():
    tr = filled(AahcTrainer)
    tr.buffer.r_u[3] = np.nan
    with pytest.raises(NonFiniteLossError):
        tr.update()


def test_iterl_decoupled_without_global_reward():
    t1 = filled(IteRlTrainer, seed=2)
    t2 = filled(IteRlTrainer, seed=2)
    for t in (t1, t2):
        t.buffer.r_g[:] = 0.0
    t2.buffer.s_d[:] += 0.3
    t2.buffer.r_d[:] -= 1.0
    h1, h2 = t1.prepare(), t2.prepare()
    np.testing.assert_array_equal(h1["u"].advantages, h2["u"].advantages)
    assert not np.array_equal(h1["d"].advantages, h2["d"].advantages)


def test_ctrl_critic_shape_and_reward():
    tr = filled(CtrlTrainer)
    assert tr.critics["g"].sizes[0] == CFG.ul_state_dim + CFG.dl_state_dim
    heads = tr.heads(tr.buffer)
    b = tr.buffer
    np.testing.assert_array_equal(heads["g"].rewards, b.r_u + b.r_d + b.r_g)


def test_param_sets_round_trip():
    tr = filled(AahcTrainer)
    tr.update()
    other = AahcTrainer(CFG, SMALL, 99)
    other.load_param_sets(tr.param_sets())
    for k, v in tr.param_sets().items():
        for a, b in zip(v["arrays"], other.param_sets()[k]["arrays"]):
            np.testing.assert_array_equal(a, b)
    with pytest.raises(ValueError):
        IteRlTrainer(CFG, SMALL, 0).load_param_sets(tr.param_sets())


def test_random_policy_bounds_and_frequency():
    pol = RandomPolicy(CFG, stream(0, "rp"))
    g = np.concatenate([pol.uplink() for _ in range(250_000)])
    assert g.size == 1_000_000
    freq = np.bincount(g, minlength=4) / g.size
    np.testing.assert_allclose(freq, 0.25, rtol=0.02)
    p = np.concatenate([pol.downlink() for _ in range(1000)])
    assert p.min() >= 0 and p.max() <= 20
    a = RandomPolicy(CFG, stream(1, "rp"))
    b = RandomPolicy(CFG, stream(1, "rp"))
    np.testing.assert_array_equal(a.uplink(), b.uplink())


def test_evaluate_contract():
    with pytest.raises(ValueError):
        evaluate(random_policy(CFG, 0), CFG, 0, 0)
    r1 = evaluate(random_policy(CFG, 0), CFG, 5, 0)
    r2 = evaluate(random_policy(CFG, 0), CFG, 5, 0)
    assert r1 == r2 and r1["episodes"] == 5
    tr = AahcTrainer(CFG, SMALL, 0)
    assert evaluate(tr.policy(), CFG, 3, 1) == evaluate(tr.policy(), CFG, 3, 1)
