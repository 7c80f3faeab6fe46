import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aahc_sim.agents.policies import DownlinkActor, UplinkActor
from aahc_sim.agents.ppo import Hyperparams, NonFiniteLossError, check_finite, clip_surrogate, compute_gae, normalize
from aahc_sim.env import ScenarioConfig
from oracles import central_difference, gae_oracle, max_rel_error


def test_hyperparam_defaults_and_validation():
    hp = Hyperparams()
    assert (hp.gamma, hp.gae_lambda, hp.batch_size, hp.entropy_coef) == (0.99, 0.95, 64, 1e-3)
    assert (hp.lr_ul, hp.lr_dl, hp.lr_critic) == (1e-4, 1e-4, 5e-5)
    assert (hp.w_u, hp.w_d, hp.w_g) == (1.0, 1.0, 1.0)
    assert hp.sync_steps == hp.trajectory_length
    for bad in ({"gamma": 0.0}, {"gae_lambda": 1.5}, {"clip_epsilon": 1.0},
                {"batch_size": 4096}, {"critic_target": "other"}):
        with pytest.raises(ValueError):
            Hyperparams(**bad)


def test_clip_examples():
    f, _, _ = clip_surrogate(np.array([0.3]), np.array([0.3]), np.array([1.7]), 0.2)
    assert f[0] == pytest.approx(1.7)
    f, d, _ = clip_surrogate(np.array([np.log(1.5)]), np.array([0.0]), np.array([2.0]), 0.2)
    assert f[0] == pytest.approx(2.4) and d[0] == 0.0
    f, d, _ = clip_surrogate(np.array([np.log(0.5)]), np.array([0.0]), np.array([-1.0]), 0.2)
    assert f[0] == pytest.approx(-0.8) and d[0] == 0.0


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-10, 10), st.floats(0.01, 0.9))
def test_clip_never_exceeds_unclipped(lp_new, lp_old, adv, eps):
    f, d, r = clip_surrogate(np.array([lp_new]), np.array([lp_old]), np.array([adv]), eps)
    assert f[0] <= r[0] * adv + 1e-12


@given(st.floats(-1, 1), st.floats(-5, 5))
def test_clip_derivative_matches_numeric(lp, adv):
    h = 1e-7
    f = lambda x: clip_surrogate(np.array([x]), np.array([0.0]), np.array([adv]), 0.2)[0][0]
    _, d, r = clip_surrogate(np.array([lp]), np.array([0.0]), np.array([adv]), 0.2)
    if abs(r[0] - 0.8) < 1e-4 or abs(r[0] - 1.2) < 1e-4:
        return   # kink
    assert d[0] == pytest.approx((f(lp + h) - f(lp - h)) / (2 * h), rel=1e-5, abs=1e-6)


def test_compute_gae_wrapper():
    rng = np.random.default_rng(0)
    r, v, vn = rng.normal(size=(3, 20))
    d = rng.random(20) < 0.2
    np.testing.assert_allclose(compute_gae(r, v, vn, d, 0.99, 0.95), gae_oracle(r, v, vn, d, 0.99, 0.95), atol=1e-12)
    with pytest.raises(ValueError):
        compute_gae(r, v[:3], vn, d, 0.99, 0.95)


def test_normalize_and_guard():
    a = normalize(np.array([1.0, 2.0, 3.0, 4.0]))
    assert abs(a.mean()) < 1e-15 and a.std() == pytest.approx(1.0, rel=1e-6)
    with pytest.raises(NonFiniteLossError):
        check_finite("x", np.array([1.0, np.nan]))


CFG = ScenarioConfig(num_users=3, num_channels=2)


def _ul_batch(rng, actor, b=6):
    states = rng.uniform(size=(b, CFG.ul_state_dim))
    actions = rng.integers(0, CFG.num_actions, b)
    logits = actor.net.predict(states)
    from aahc_sim.nn import log_softmax
    logp_old = log_softmax(logits)[np.arange(b), actions] + rng.normal(scale=0.1, size=b)
    adv = rng.normal(size=b)
    return states, actions, logp_old, adv


def test_categorical_surrogate_gradient():
    rng = np.random.default_rng(1)
    actor = UplinkActor(CFG, (8, 8), rng, out_scale=1.0)
    s, a, lo, adv = _ul_batch(rng, actor)
    _, grads, _ = actor.loss_and_grads(s, a, lo, adv, 0.2, 0.05, clip_surrogate)
    num = central_difference(lambda: actor.loss_and_grads(s, a, lo, adv, 0.2, 0.05, clip_surrogate)[0], actor.params)
    assert max_rel_error(grads, num) < 1e-5


def test_gaussian_surrogate_gradient():
    rng = np.random.default_rng(2)
    actor = DownlinkActor(CFG, (8, 8), rng, out_scale=1.0, init_log_std=0.3)
    b = 6
    s = rng.uniform(size=(b, CFG.dl_state_dim))
    raw = actor.mean(s) + rng.normal(scale=2.0, size=(b, CFG.num_users))
    from aahc_sim.nn import gaussian_logprob
    lo = gaussian_logprob(raw, actor.mean(s), actor.log_std) + rng.normal(scale=0.1, size=b)
    adv = rng.normal(size=b)
    _, grads, _ = actor.loss_and_grads(s, raw, lo, adv, 0.2, 0.05, clip_surrogate)
    num = central_difference(lambda: actor.loss_and_grads(s, raw, lo, adv, 0.2, 0.05, clip_surrogate)[0], actor.params)
    assert max_rel_error(grads, num) < 1e-5


def test_log_std_clamped():
    actor = DownlinkActor(CFG, (4,), np.random.default_rng(0), init_log_std=0.0)
    actor.log_std[:] = [9.0, -9.0, 0.5]
    actor.clamp()
    assert actor.log_std.tolist() == [2.0, -5.0, 0.5]


def test_argmax_shift_invariance():
    actor = UplinkActor(CFG, (8,), np.random.default_rng(3), out_scale=1.0)
    s = np.random.default_rng(4).uniform(size=CFG.ul_state_dim)
    a = actor.greedy(s)
    actor.net.biases[-1] += 7.5
    assert actor.greedy(s) == a
