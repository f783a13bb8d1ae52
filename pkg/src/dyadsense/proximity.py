"""Debounced near/far proximity from a stream of RSSI samples."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .errors import ConfigError, ParseError, StreamError

NEAR = "near"
FAR = "far"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class RssiSample:
    timestamp: float
    rssi: float


@dataclass(frozen=True)
class ProximityConfig:
    threshold_dbm: float = -70.0
    ewma_alpha: float = 0.3
    enter_dwell: int = 3
    exit_dwell: int = 5
    stale_timeout: float = 10.0

    def __post_init__(self):
        if not 0 < self.ewma_alpha <= 1:
            raise ConfigError(f"ewma_alpha must be in (0, 1], got {self.ewma_alpha}")
        if self.enter_dwell < 1 or self.exit_dwell < 1:
            raise ConfigError("dwell counts must be >= 1")
        if self.stale_timeout <= 0:
            raise ConfigError("stale_timeout must be positive")


@dataclass(frozen=True)
class ProximityState:
    """Smoothed RSSI plus committed phase.

    ``dwell_counter`` counts consecutive samples whose candidate phase is
    ``pending``, which differs from the committed ``phase``.
    """

    smoothed_rssi: Optional[float] = None
    phase: str = UNKNOWN
    dwell_counter: int = 0
    pending: Optional[str] = None
    last_update: Optional[float] = None


@dataclass(frozen=True)
class ProximityTransition:
    t: float
    phase: str


def smooth_rssi(state: ProximityState, sample: RssiSample, alpha: float) -> float:
    """EWMA in the dBm domain; the first sample initializes the average."""
    if state.last_update is not None and sample.timestamp < state.last_update:
        raise StreamError(
            f"RSSI timestamp {sample.timestamp} precedes last update {state.last_update}"
        )
    if state.smoothed_rssi is None:
        return float(sample.rssi)
    return alpha * sample.rssi + (1.0 - alpha) * state.smoothed_rssi


def expire(state: ProximityState, t: float, config: ProximityConfig):
    """Force ``unknown`` if no sample arrived within ``stale_timeout`` before ``t``.

    Returns ``(state, transition or None)``.  Smoothing restarts from scratch
    after a stale gap.
    """
    if state.last_update is None or t - state.last_update < config.stale_timeout:
        return state, None
    if state.phase == UNKNOWN and state.smoothed_rssi is None:
        return state, None
    fresh = ProximityState(last_update=state.last_update)
    if state.phase == UNKNOWN:
        return fresh, None
    return fresh, ProximityTransition(state.last_update + config.stale_timeout, UNKNOWN)


def update_proximity(state: ProximityState, sample: RssiSample, config: ProximityConfig):
    """Apply one sample; returns ``(new_state, transitions)``.

    ``transitions`` lists at most a stale-expiry event followed by a commit
    event.  A change of phase commits only after ``enter_dwell`` (to near)
    or ``exit_dwell`` (to far) consecutive agreeing candidates.
    """
    if state.last_update is not None and sample.timestamp < state.last_update:
        raise StreamError(
            f"RSSI timestamp {sample.timestamp} precedes last update {state.last_update}"
        )
    events = []
    state, stale = expire(state, sample.timestamp, config)
    if stale is not None:
        events.append(stale)

    smoothed = smooth_rssi(state, sample, config.ewma_alpha)
    candidate = NEAR if smoothed >= config.threshold_dbm else FAR
    phase, pending, counter = state.phase, state.pending, state.dwell_counter
    if candidate == phase:
        pending, counter = None, 0
    else:
        counter = counter + 1 if candidate == pending else 1
        pending = candidate
        needed = config.enter_dwell if candidate == NEAR else config.exit_dwell
        if counter >= needed:
            phase, pending, counter = candidate, None, 0
            events.append(ProximityTransition(sample.timestamp, candidate))
    new_state = ProximityState(smoothed, phase, counter, pending, sample.timestamp)
    return new_state, events


class ProximityTracker:
    """Stateful wrapper around ``update_proximity`` for one device pair."""

    def __init__(self, config: ProximityConfig | None = None):
        self.config = config or ProximityConfig()
        self.state = ProximityState()

    def update(self, sample: RssiSample) -> list[ProximityTransition]:
        self.state, events = update_proximity(self.state, sample, self.config)
        return events

    def tick(self, t: float) -> list[ProximityTransition]:
        if self.state.last_update is not None and t < self.state.last_update:
            raise StreamError(f"tick at {t} precedes last update {self.state.last_update}")
        self.state, event = expire(self.state, t, self.config)
        return [event] if event is not None else []

    @property
    def phase(self) -> str:
        return self.state.phase


def track(samples: Iterable[RssiSample], config: ProximityConfig | None = None):
    tracker = ProximityTracker(config)
    events = []
    for s in samples:
        events.extend(tracker.update(s))
    return events


def read_rssi_jsonl(path) -> list[RssiSample]:
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            out.append(RssiSample(float(obj["t"]), float(obj["rssi"])))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{path}:{lineno}: bad RSSI record ({exc})") from exc
    return out


def write_rssi_jsonl(samples: Iterable[RssiSample], path) -> None:
    with open(path, "w") as fh:
        for s in samples:
            fh.write(json.dumps({"t": s.timestamp, "rssi": s.rssi}) + "\n")


__all__ = [
    "NEAR", "FAR", "UNKNOWN", "RssiSample", "ProximityConfig", "ProximityState",
    "ProximityTransition", "ProximityTracker", "smooth_rssi", "update_proximity",
    "expire", "track", "read_rssi_jsonl", "write_rssi_jsonl",
]
