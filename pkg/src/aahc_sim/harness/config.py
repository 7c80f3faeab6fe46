"""Flat ``key=value`` run configuration.

Keys carry a section prefix::

    scenario.name = 3-6
    scenario.dtti_limit = 1.5e-3
    fading.beta0 = 1e-3
    hyper.lr_critic = 5e-5
    run.algo = aahc
    run.seeds = 0,1,2

``#`` starts a comment. Precedence is defaults < file < command-line flags.
"""

from __future__ import annotations

import dataclasses
import re
import typing
from dataclasses import dataclass, field

from ..agents.ppo import Hyperparams
from ..channel import FadingParams
from ..env import ScenarioConfig

ALGOS = ("aahc", "iterl", "ctrl", "random")
SCENARIO_RE = re.compile(r"^\s*(\d+)\s*-\s*(\d+)\s*$")


class ConfigError(ValueError):
    """Bad key, value or combination; the message names the offending line."""


@dataclass(frozen=True)
class RunSpec:
    algo: str = "aahc"
    seeds: tuple[int, ...] = (0,)
    out_dir: str = "runs"
    eval_episodes: int = 200
    record_wall_clock: bool = False

    def __post_init__(self):
        if self.algo not in ALGOS:
            raise ValueError(f"algo must be one of {', '.join(ALGOS)}")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")
        if self.eval_episodes < 1:
            raise ValueError("eval_episodes must be >= 1")


@dataclass
class ResolvedConfig:
    run: RunSpec
    scenario_name: str
    scenario: ScenarioConfig
    hyper: Hyperparams

    def to_text(self) -> str:
        """Every key with its resolved value, loadable by :func:`parse_text`."""
        lines = [f"scenario.name = {self.scenario_name}"]
        for section, obj in (("scenario", self.scenario), ("fading", self.scenario.fading),
                             ("hyper", self.hyper), ("run", self.run)):
            for f in dataclasses.fields(obj):
                if section == "scenario" and f.name == "fading":
                    continue
                lines.append(f"{section}.{f.name} = {_format(getattr(obj, f.name))}")
        return "\n".join(lines) + "\n"


_SECTIONS = {"scenario": ScenarioConfig, "fading": FadingParams, "hyper": Hyperparams, "run": RunSpec}


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, complex):
        return repr(value).strip("()")
    if isinstance(value, tuple):
        return ",".join(_format(v) for v in value)
    return str(value)


def _coerce(text: str, tp):
    text = text.strip()
    origin = typing.get_origin(tp)
    if origin is tuple:
        args = typing.get_args(tp)
        parts = [p for p in text.split(",") if p.strip()]
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_coerce(p, args[0]) for p in parts)
        if len(parts) != len(args):
            raise ValueError(f"expected {len(args)} comma-separated values")
        return tuple(_coerce(p, a) for p, a in zip(parts, args))
    if tp is bool:
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if tp is int:
        return int(text)
    if tp is float:
        return float(text)
    if tp is complex:
        return complex(text.replace(" ", ""))
    return text


def _hints(cls) -> dict:
    return typing.get_type_hints(cls)


def parse_scenario_name(name: str) -> tuple[int, int]:
    m = SCENARIO_RE.match(name)
    if not m:
        raise ValueError(f"scenario must look like 'M-N', got {name!r}")
    channels, users = int(m.group(1)), int(m.group(2))
    if channels < 1 or users < 1:
        raise ValueError(f"scenario {name!r} needs M >= 1 and N >= 1")
    return channels, users


def parse_lines(lines, source: str) -> list[tuple[str, str, str]]:
    """``(key, value, where)`` triples; ``where`` is a ``source:line`` reference."""
    out = []
    for i, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{i}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected key = value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{where}: empty key")
        out.append((key, value, where))
    return out


def read_file(path: str) -> list[tuple[str, str, str]]:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_lines(fh.read().splitlines(), path)
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc


def resolve(entries: list[tuple[str, str, str]]) -> ResolvedConfig:
    """Apply entries in order (later wins) on top of the defaults."""
    values: dict[str, dict] = {s: {} for s in _SECTIONS}
    where_of: dict[str, str] = {}
    scenario_name = "3-4"
    for key, value, where in entries:
        section, _, name = key.partition(".")
        if key == "scenario.name":
            try:
                parse_scenario_name(value)
            except ValueError as exc:
                raise ConfigError(f"{where}: {exc}") from None
            scenario_name = value.replace(" ", "")
            where_of[key] = where
            continue
        if section not in _SECTIONS or not name:
            raise ConfigError(f"{where}: unknown key {key!r}")
        hints = _hints(_SECTIONS[section])
        if name not in hints or (section == "scenario" and name == "fading"):
            raise ConfigError(f"{where}: unknown key {key!r}")
        try:
            values[section][name] = _coerce(value, hints[name])
        except ValueError as exc:
            raise ConfigError(f"{where}: bad value for {key}: {exc}") from None
        where_of[key] = where

    channels, users = parse_scenario_name(scenario_name)
    scen = {"num_channels": channels, "num_users": users}
    scen.update(values["scenario"])

    def build(section, cls, kwargs):
        try:
            return cls(**kwargs)
        except (ValueError, TypeError) as exc:
            refs = sorted({where_of[f"{section}.{k}"] for k in kwargs if f"{section}.{k}" in where_of})
            loc = ", ".join(refs) if refs else "defaults"
            raise ConfigError(f"{loc}: invalid {section} settings: {exc}") from None

    fading = build("fading", FadingParams, values["fading"])
    if scen["num_users"] < 1 or scen["num_channels"] < 1:
        ref = where_of.get("scenario.num_users") or where_of.get("scenario.num_channels") \
            or where_of.get("scenario.name", "defaults")
        raise ConfigError(f"{ref}: impossible scenario M={scen['num_channels']}, N={scen['num_users']}")
    scenario = build("scenario", ScenarioConfig, {**scen, "fading": fading})
    hyper = build("hyper", Hyperparams, values["hyper"])
    run = build("run", RunSpec, values["run"])
    name = f"{scenario.num_channels}-{scenario.num_users}"
    return ResolvedConfig(run, name, scenario, hyper)


def parse_text(text: str, source: str = "<text>") -> ResolvedConfig:
    return resolve(parse_lines(text.splitlines(), source))


def load(path: str | None = None, overrides: list[str] | None = None) -> ResolvedConfig:
    """Defaults, then ``path``, then ``overrides`` (``key=value`` strings from flags)."""
    entries = read_file(path) if path else []
    for i, item in enumerate(overrides or [], 1):
        entries += parse_lines([item], f"flag#{i}")
    return resolve(entries)
