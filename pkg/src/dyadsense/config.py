"""TOML configuration with one section per pipeline stage."""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .dsp import MfccConfig
from .errors import ConfigError
from .proximity import ProximityConfig
from .trigger import TriggerConfig
from .vad import HysteresisConfig


@dataclass(frozen=True)
class SvmHyper:
    lam: float = 1e-4
    epochs: int = 20


@dataclass(frozen=True)
class ForestHyper:
    num_trees: int = 100
    max_depth: int = 8
    min_leaf: int = 2
    feature_subsample: object = "sqrt"


@dataclass(frozen=True)
class SimulationSettings:
    """Replay knobs; the trigger slots are derived from ``n_slots``.

    ``min_gap`` of None means half a slot width.
    """

    duration: float = 8 * 3600.0
    density: float = 0.3
    n_slots: int = 8
    min_gap: Optional[float] = None
    vad_period: float = 3.0
    vad_window: float = 0.5
    speech_fraction: float = 0.5
    probe_hysteresis: tuple = (2, 3, 0.1)
    corpus_clips: int = 25


@dataclass(frozen=True)
class ToolkitConfig:
    mfcc: MfccConfig = field(default_factory=MfccConfig)
    hysteresis: HysteresisConfig = field(default_factory=HysteresisConfig)
    proximity: ProximityConfig = field(default_factory=ProximityConfig)
    trigger: TriggerConfig = field(default_factory=TriggerConfig)
    svm: SvmHyper = field(default_factory=SvmHyper)
    forest: ForestHyper = field(default_factory=ForestHyper)
    simulation: SimulationSettings = field(default_factory=SimulationSettings)

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, default=list)
        return hashlib.sha256(canonical.encode()).hexdigest()[:12]


_SECTIONS = {f.name: f.default_factory for f in fields(ToolkitConfig)}
# TOML-friendly aliases
_ALIASES = {"svm": {"lambda": "lam"}}


def _build(section: str, values: dict):
    factory = _SECTIONS[section]
    cls = type(factory())
    known = {f.name for f in fields(cls)}
    aliases = _ALIASES.get(section, {})
    kwargs = {}
    for key, val in values.items():
        key = aliases.get(key, key)
        if key not in known:
            raise ConfigError(f"[{section}] unknown key {key!r}")
        if key == "slots":
            val = tuple(map(tuple, val))
        elif isinstance(val, list):
            val = tuple(val)
        kwargs[key] = val
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}] {exc}") from exc


def config_from_dict(data: dict) -> ToolkitConfig:
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    parts = {name: _build(name, data[name]) for name in data}
    return ToolkitConfig(**parts)


def load_config(path: Optional[str | Path]) -> ToolkitConfig:
    if path is None:
        return ToolkitConfig()
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data)


def scenario_params(cfg: ToolkitConfig, density: Optional[float] = None):
    from .sim import ScenarioParams

    sim = cfg.simulation
    return ScenarioParams(duration=sim.duration,
                          interaction_density=sim.density if density is None else density)


def pipeline_config(cfg: ToolkitConfig):
    """Replay pipeline: slots span the scenario, FSM timing comes from ``[trigger]``."""
    from .sim import PipelineConfig, scenario_trigger_config

    sim, trig = cfg.simulation, cfg.trigger
    overrides = dict(recording_duration=trig.recording_duration, max_per_day=trig.max_per_day,
                     speech_confirm=trig.speech_confirm, confirm_window=trig.confirm_window)
    if sim.min_gap is not None:
        overrides["min_gap"] = sim.min_gap
    try:
        trigger = scenario_trigger_config(sim.duration, sim.n_slots, **overrides)
        hyst = HysteresisConfig(*sim.probe_hysteresis)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[simulation] {exc}") from exc
    return PipelineConfig(mfcc=cfg.mfcc, hysteresis=hyst, proximity=cfg.proximity,
                          trigger=trigger, vad_period=sim.vad_period,
                          vad_window=sim.vad_window, speech_fraction=sim.speech_fraction)
