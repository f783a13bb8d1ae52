"""Event-driven recording trigger: proximity + speech fusion with scheduled fallback.

Time only advances through incoming events.  Before an event at time ``t``
is applied, every timer due at or before ``t`` (recording stops, slot
deadlines) is processed at its own timestamp, stops before deadlines on
ties.  The algorithm rule is then evaluated at ``t``.

Slots repeat every ``day_length`` seconds; slot ``i`` of day ``d`` has the
global id ``d * len(slots) + i``.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .errors import ConfigError, ParseError, StreamError
from .proximity import FAR, NEAR, UNKNOWN, ProximityTransition

ALGORITHM = "algorithm"
SCHEDULED = "scheduled"

START = "StartRecording"
STOP = "StopRecording"
PROMPT = "EmitPrompt"
LOGGED = "TriggerLogged"

DAY = 86400.0
DEFAULT_SLOTS = (
    (8 * 3600.0, 11 * 3600.0),
    (11 * 3600.0, 14 * 3600.0),
    (14 * 3600.0, 17 * 3600.0),
    (17 * 3600.0, 20 * 3600.0),
)


@dataclass(frozen=True)
class TriggerConfig:
    recording_duration: float = 300.0
    min_gap: float = 3600.0
    slots: tuple = DEFAULT_SLOTS
    max_per_day: Optional[int] = None
    speech_confirm: float = 5.0
    confirm_window: float = 30.0
    day_length: float = DAY

    def __post_init__(self):
        slots = tuple((float(a), float(b)) for a, b in self.slots)
        object.__setattr__(self, "slots", slots)
        if self.recording_duration <= 0:
            raise ConfigError("recording_duration must be positive")
        if self.min_gap < self.recording_duration:
            raise ConfigError("min_gap must be >= recording_duration")
        if not slots:
            raise ConfigError("at least one slot is required")
        prev_end = 0.0
        for start, deadline in slots:
            if not 0 <= start < deadline <= self.day_length:
                raise ConfigError(f"slot ({start}, {deadline}) must lie within one day")
            if start < prev_end:
                raise ConfigError("slots must be ordered and non-overlapping")
            prev_end = deadline
        if self.max_per_day is not None and self.max_per_day < 0:
            raise ConfigError("max_per_day must be non-negative")
        if self.speech_confirm < 0 or self.confirm_window <= 0:
            raise ConfigError("speech_confirm must be >= 0 and confirm_window > 0")
        if self.speech_confirm > self.confirm_window:
            raise ConfigError("speech_confirm cannot exceed confirm_window")

    @property
    def daily_limit(self) -> int:
        return len(self.slots) if self.max_per_day is None else self.max_per_day

    def slot_window(self, slot_id: int) -> tuple[float, float]:
        day, i = divmod(slot_id, len(self.slots))
        start, deadline = self.slots[i]
        return day * self.day_length + start, day * self.day_length + deadline

    def slot_at(self, t: float) -> Optional[int]:
        """Id of the slot whose [start, deadline) contains ``t``."""
        day = math.floor(t / self.day_length)
        offset = t - day * self.day_length
        for i, (start, deadline) in enumerate(self.slots):
            if start <= offset < deadline:
                return day * len(self.slots) + i
        return None

    def first_slot_with_deadline_at_or_after(self, t: float) -> int:
        day = math.floor(t / self.day_length)
        offset = t - day * self.day_length
        for i, (_, deadline) in enumerate(self.slots):
            if deadline >= offset:
                return day * len(self.slots) + i
        return (day + 1) * len(self.slots)


# ---- events ---------------------------------------------------------------

@dataclass(frozen=True)
class SpeechSegmentUpdate:
    t: float
    active: bool


@dataclass(frozen=True)
class ClockTick:
    t: float


@dataclass(frozen=True)
class UptimeChange:
    """App started (``running=True``) or stopped; deadlines are ignored while stopped."""

    t: float
    running: bool


FsmEvent = Union[ProximityTransition, SpeechSegmentUpdate, ClockTick, UptimeChange]


@dataclass(frozen=True)
class TriggerEvent:
    kind: str
    t_start: float
    slot_id: int


@dataclass
class RecordingSession:
    trigger: TriggerEvent
    t_end: float
    prompt_emitted: bool = False


@dataclass(frozen=True)
class SelfReportPrompt:
    t: float
    session_ref: int


@dataclass(frozen=True)
class Action:
    action: str
    t: float
    kind: Optional[str] = None
    slot_id: Optional[int] = None
    session: Optional[int] = None

    def to_json(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass
class FsmState:
    t: Optional[float] = None
    running: bool = True
    phase: str = UNKNOWN
    speech_since: Optional[float] = None
    speech_intervals: list = field(default_factory=list)
    active: Optional[int] = None  # index into sessions
    next_deadline_slot: Optional[int] = None
    pending_scheduled: list = field(default_factory=list)
    triggered_slots: set = field(default_factory=set)
    day_counts: dict = field(default_factory=dict)
    last_start: Optional[float] = None
    sessions: list = field(default_factory=list)
    prompts: list = field(default_factory=list)


class TriggerFSM:
    """Single-threaded trigger state machine; every output is an append-only log."""

    def __init__(self, config: TriggerConfig | None = None, state: FsmState | None = None):
        self.config = config or TriggerConfig()
        self.state = state or FsmState()
        self.actions: list[Action] = []

    # -- queries ------------------------------------------------------------

    @property
    def sessions(self) -> list[RecordingSession]:
        return self.state.sessions

    @property
    def triggers(self) -> list[TriggerEvent]:
        return [s.trigger for s in self.state.sessions]

    @property
    def recording(self) -> bool:
        return self.state.active is not None

    def speech_seconds(self, t: float) -> float:
        """Speech time inside ``[t - confirm_window, t]``."""
        lo = t - self.config.confirm_window
        total = 0.0
        for a, b in self.state.speech_intervals:
            total += max(0.0, min(b, t) - max(a, lo))
        if self.state.speech_since is not None:
            total += max(0.0, t - max(self.state.speech_since, lo))
        return total

    def could_trigger(self, t: float) -> bool:
        """Whether a qualifying conversation at ``t`` would start a recording.

        Lets a driver skip speech detection when its result cannot matter.
        """
        st, cfg = self.state, self.config
        if not st.running or st.active is not None or st.phase != NEAR:
            return False
        slot = cfg.slot_at(t)
        if slot is None or slot in st.triggered_slots:
            return False
        if st.last_start is not None and t - st.last_start < cfg.min_gap:
            return False
        day = math.floor(t / cfg.day_length)
        return st.day_counts.get(day, 0) < cfg.daily_limit

    # -- transitions ----------------------------------------------------------

    def _start(self, t: float, kind: str, slot_id: int) -> list[Action]:
        st = self.state
        trig = TriggerEvent(kind, t, slot_id)
        st.sessions.append(RecordingSession(trig, t + self.config.recording_duration))
        st.active = len(st.sessions) - 1
        st.triggered_slots.add(slot_id)
        day = math.floor(t / self.config.day_length)
        st.day_counts[day] = st.day_counts.get(day, 0) + 1
        st.last_start = t
        return [
            Action(START, t, kind, slot_id, st.active),
            Action(LOGGED, t, kind, slot_id, st.active),
        ]

    def _stop(self) -> list[Action]:
        st = self.state
        ref = st.active
        session = st.sessions[ref]
        session.prompt_emitted = True
        st.prompts.append(SelfReportPrompt(session.t_end, ref))
        st.active = None
        t = session.t_end
        out = [
            Action(STOP, t, session.trigger.kind, session.trigger.slot_id, ref),
            Action(PROMPT, t, session.trigger.kind, session.trigger.slot_id, ref),
        ]
        if st.pending_scheduled and st.running:
            out += self._start(t, SCHEDULED, st.pending_scheduled.pop(0))
        return out

    def _deadline(self, slot_id: int) -> list[Action]:
        st = self.state
        if not st.running or slot_id in st.triggered_slots:
            return []
        _, deadline = self.config.slot_window(slot_id)
        if st.active is not None:
            # claimed now, started when the current recording stops
            st.triggered_slots.add(slot_id)
            st.pending_scheduled.append(slot_id)
            return []
        return self._start(deadline, SCHEDULED, slot_id)

    def _advance(self, t: float) -> list[Action]:
        st, cfg = self.state, self.config
        if st.next_deadline_slot is None:
            st.next_deadline_slot = cfg.first_slot_with_deadline_at_or_after(t)
        out = []
        while True:
            stop_t = st.sessions[st.active].t_end if st.active is not None else math.inf
            dl_t = cfg.slot_window(st.next_deadline_slot)[1]
            if min(stop_t, dl_t) > t:
                break
            if stop_t <= dl_t:
                out += self._stop()
            else:
                out += self._deadline(st.next_deadline_slot)
                st.next_deadline_slot += 1
        return out

    def _prune_speech(self, t: float) -> None:
        lo = t - self.config.confirm_window
        self.state.speech_intervals = [iv for iv in self.state.speech_intervals if iv[1] > lo]

    def step(self, event: FsmEvent) -> list[Action]:
        """Apply one event; returns the actions it caused, in time order."""
        st = self.state
        t = float(event.t)
        if st.t is not None and t < st.t:
            raise StreamError(f"event at t={t} precedes current time {st.t}")
        out = self._advance(t)
        st.t = t

        if isinstance(event, ProximityTransition):
            if event.phase not in (NEAR, FAR, UNKNOWN):
                raise StreamError(f"unknown proximity phase {event.phase!r}")
            st.phase = event.phase
        elif isinstance(event, SpeechSegmentUpdate):
            if event.active and st.speech_since is None:
                st.speech_since = t
            elif not event.active and st.speech_since is not None:
                if t > st.speech_since:
                    st.speech_intervals.append((st.speech_since, t))
                st.speech_since = None
        elif isinstance(event, UptimeChange):
            st.running = bool(event.running)
            if not st.running:
                st.pending_scheduled.clear()
        elif not isinstance(event, ClockTick):
            raise StreamError(f"unsupported event {event!r}")

        self._prune_speech(t)
        if self.could_trigger(t) and self.speech_seconds(t) >= self.config.speech_confirm:
            out += self._start(t, ALGORITHM, self.config.slot_at(t))
        self.actions.extend(out)
        return out

    def run(self, events: Iterable[FsmEvent]) -> list[Action]:
        out = []
        for ev in events:
            out += self.step(ev)
        return out

    def flush(self, t: float) -> list[Action]:
        """Advance the clock to ``t`` without an external event."""
        return self.step(ClockTick(t))


def step(state: FsmState, event: FsmEvent, config: TriggerConfig):
    """Pure form of :meth:`TriggerFSM.step`: returns ``(new_state, actions)``."""
    fsm = TriggerFSM(config, copy.deepcopy(state))
    actions = fsm.step(event)
    return fsm.state, actions


# ---- coverage accounting ----------------------------------------------------

def merge_intervals(intervals: Iterable[Sequence[float]]) -> list[tuple[float, float]]:
    merged: list[list[float]] = []
    for a, b in sorted((float(a), float(b)) for a, b in intervals):
        if b < a:
            raise ValueError(f"interval ({a}, {b}) has end before start")
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [(a, b) for a, b in merged]


def expected_slots(config: TriggerConfig, uptime_intervals) -> list[int]:
    """Ids of slots whose whole [start, deadline] lies inside app uptime."""
    out = []
    n = len(config.slots)
    for a, b in merge_intervals(uptime_intervals):
        if b <= a:
            continue
        first_day = math.floor(a / config.day_length)
        last_day = math.floor(b / config.day_length)
        for day in range(first_day, last_day + 1):
            for i in range(n):
                start, deadline = config.slot_window(day * n + i)
                if a <= start and deadline <= b:
                    out.append(day * n + i)
    return out


def expected_count(config: TriggerConfig, uptime_intervals) -> int:
    return len(expected_slots(config, uptime_intervals))


def triggers_within_uptime(triggers: Iterable[TriggerEvent], config: TriggerConfig,
                           uptime_intervals) -> list[TriggerEvent]:
    allowed = set(expected_slots(config, uptime_intervals))
    return [tr for tr in triggers if tr.slot_id in allowed]


def coverage(triggers: Sequence, expected: int) -> float:
    """Fraction of expected triggers that happened; 1.0 when nothing was expected."""
    if expected < 0:
        raise ValueError("expected must be non-negative")
    if expected == 0:
        return 1.0
    return min(1.0, len(triggers) / expected)


# ---- JSONL I/O ----------------------------------------------------------------

def event_to_json(ev: FsmEvent) -> dict:
    if isinstance(ev, ProximityTransition):
        return {"t": ev.t, "type": "proximity", "phase": ev.phase}
    if isinstance(ev, SpeechSegmentUpdate):
        return {"t": ev.t, "type": "speech", "active": ev.active}
    if isinstance(ev, UptimeChange):
        return {"t": ev.t, "type": "uptime", "running": ev.running}
    if isinstance(ev, ClockTick):
        return {"t": ev.t, "type": "tick"}
    raise TypeError(f"not an FSM event: {ev!r}")


def event_from_json(obj: dict) -> FsmEvent:
    kind = obj.get("type")
    t = float(obj["t"])
    if kind == "proximity":
        return ProximityTransition(t, str(obj["phase"]))
    if kind == "speech":
        return SpeechSegmentUpdate(t, bool(obj["active"]))
    if kind == "uptime":
        return UptimeChange(t, bool(obj["running"]))
    if kind == "tick":
        return ClockTick(t)
    raise ValueError(f"unknown event type {kind!r}")


def read_events_jsonl(path) -> list[FsmEvent]:
    events = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            events.append(event_from_json(json.loads(line)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
    return events


def write_jsonl(records: Iterable[dict], path) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
