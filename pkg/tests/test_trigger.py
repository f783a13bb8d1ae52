import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dyadsense.errors import ConfigError, ParseError, StreamError
from dyadsense.proximity import FAR, NEAR, ProximityTransition
from dyadsense.trigger import (
    ALGORITHM,
    LOGGED,
    PROMPT,
    SCHEDULED,
    START,
    STOP,
    Action,
    ClockTick,
    FsmState,
    SpeechSegmentUpdate,
    TriggerConfig,
    TriggerEvent,
    TriggerFSM,
    UptimeChange,
    coverage,
    event_from_json,
    event_to_json,
    expected_count,
    expected_slots,
    merge_intervals,
    read_events_jsonl,
    step,
    triggers_within_uptime,
    write_jsonl,
)

from fsm_fuzz import FUZZ_CONFIG, check_invariants, random_events

H = 3600.0


def actions_of(fsm):
    return [(a.action, a.t, a.kind) for a in fsm.actions]


class TestRules:
    def test_algorithm_trigger_example(self):
        fsm = TriggerFSM(TriggerConfig(slots=((0.0, H),)))
        fsm.run([ProximityTransition(100.0, NEAR), SpeechSegmentUpdate(110.0, True),
                 ClockTick(114.9), ClockTick(120.0), SpeechSegmentUpdate(125.0, False),
                 ClockTick(500.0)])
        assert actions_of(fsm) == [
            (START, 120.0, ALGORITHM), (LOGGED, 120.0, ALGORITHM),
            (STOP, 420.0, ALGORITHM), (PROMPT, 420.0, ALGORITHM),
        ]

    def test_speech_split_across_segments(self):
        fsm = TriggerFSM(TriggerConfig(slots=((0.0, H),)))
        fsm.run([ProximityTransition(0.0, NEAR),
                 SpeechSegmentUpdate(100.0, True), SpeechSegmentUpdate(103.0, False),
                 SpeechSegmentUpdate(118.0, True), ClockTick(119.0), ClockTick(120.0)])
        assert [a.t for a in fsm.actions if a.action == START] == [120.0]

    def test_speech_outside_window_does_not_count(self):
        fsm = TriggerFSM(TriggerConfig(slots=((0.0, H),)))
        fsm.run([ProximityTransition(0.0, NEAR),
                 SpeechSegmentUpdate(10.0, True), SpeechSegmentUpdate(13.0, False),
                 SpeechSegmentUpdate(50.0, True), ClockTick(52.0), SpeechSegmentUpdate(52.0, False),
                 ClockTick(100.0)])
        assert fsm.sessions == []

    def test_deadlines_before_first_event_are_ignored(self):
        fsm = TriggerFSM(TriggerConfig(slots=((0.0, 100.0), (100.0, 2000.0))))
        fsm.run([ClockTick(500.0), ClockTick(2400.0)])
        assert [s.trigger.slot_id for s in fsm.sessions] == [1]

    def test_scheduled_at_deadline(self):
        cfg = TriggerConfig(slots=((15 * H, 18 * H),))
        fsm = TriggerFSM(cfg)
        fsm.run([ClockTick(t) for t in np.arange(0.0, 86400.0, 60.0)])
        assert [(s.trigger.kind, s.trigger.t_start) for s in fsm.sessions] == [(SCHEDULED, 18 * H)]

    def test_min_gap_blocks_second_conversation(self):
        def run(min_gap):
            cfg = TriggerConfig(slots=((0.0, 400.0), (400.0, H)), min_gap=min_gap)
            fsm = TriggerFSM(cfg)
            fsm.run([ProximityTransition(100.0, NEAR), SpeechSegmentUpdate(115.0, True),
                     ClockTick(120.0), SpeechSegmentUpdate(121.0, False),
                     SpeechSegmentUpdate(475.0, True), ClockTick(480.0),
                     SpeechSegmentUpdate(481.0, False)])
            return [s.trigger.t_start for s in fsm.sessions if s.trigger.kind == ALGORITHM]

        assert run(3600.0) == [120.0]
        assert run(300.0) == [120.0, 480.0]

    def test_far_blocks(self):
        fsm = TriggerFSM(TriggerConfig(slots=((0.0, H),)))
        fsm.run([ProximityTransition(0.0, FAR), SpeechSegmentUpdate(1.0, True), ClockTick(60.0)])
        assert fsm.sessions == []

    def test_max_per_day(self):
        cfg = TriggerConfig(slots=((0.0, 1000.0), (1000.0, 2000.0)), min_gap=300.0, max_per_day=1)
        fsm = TriggerFSM(cfg)
        fsm.run([ProximityTransition(0.0, NEAR), SpeechSegmentUpdate(0.0, True),
                 ClockTick(10.0), ClockTick(1100.0), ClockTick(2500.0)])
        kinds = [s.trigger.kind for s in fsm.sessions]
        # the fallback still covers the second slot
        assert kinds == [ALGORITHM, SCHEDULED]

    def test_deadline_during_recording_is_deferred(self):
        cfg = TriggerConfig(slots=((0.0, 100.0), (100.0, 200.0)), min_gap=300.0)
        fsm = TriggerFSM(cfg)
        fsm.run([ClockTick(100.0), ClockTick(250.0), ClockTick(800.0)])
        got = [(s.trigger.kind, s.trigger.slot_id, s.trigger.t_start) for s in fsm.sessions]
        assert got == [(SCHEDULED, 0, 100.0), (SCHEDULED, 1, 400.0)]

    def test_stop_before_deadline_on_tie(self):
        cfg = TriggerConfig(slots=((0.0, 100.0), (100.0, 400.0)), min_gap=300.0)
        fsm = TriggerFSM(cfg)
        fsm.run([ClockTick(0.0), ClockTick(1000.0)])
        assert [a.action for a in fsm.actions] == [START, LOGGED, STOP, PROMPT, START, LOGGED,
                                                   STOP, PROMPT]
        assert [s.trigger.t_start for s in fsm.sessions] == [100.0, 400.0]

    def test_no_fallback_while_app_down(self):
        cfg = TriggerConfig(slots=((0.0, 100.0), (100.0, 200.0)))
        fsm = TriggerFSM(cfg)
        fsm.run([UptimeChange(50.0, False), UptimeChange(150.0, True), ClockTick(1000.0)])
        assert [s.trigger.slot_id for s in fsm.sessions] == [1]

    def test_time_regression(self):
        fsm = TriggerFSM()
        fsm.step(ClockTick(10.0))
        with pytest.raises(StreamError):
            fsm.step(ClockTick(9.0))

    def test_pure_step_leaves_input_untouched(self):
        cfg = TriggerConfig(slots=((0.0, 100.0),))
        s0 = FsmState()
        s1, acts = step(s0, ClockTick(100.0), cfg)
        assert s0.sessions == [] and len(s1.sessions) == 1
        assert [a.action for a in acts] == [START, LOGGED]

    @pytest.mark.parametrize("kwargs", [
        dict(recording_duration=0.0), dict(min_gap=100.0),
        dict(slots=((0.0, 100.0), (50.0, 200.0))), dict(slots=()),
        dict(slots=((200.0, 100.0),)), dict(speech_confirm=40.0),
    ])
    def test_invalid_config(self, kwargs):
        with pytest.raises(ConfigError):
            TriggerConfig(**kwargs)

    def test_defaults(self):
        cfg = TriggerConfig()
        assert cfg.recording_duration == 300.0 and cfg.min_gap == 3600.0
        assert cfg.daily_limit == 4 and cfg.speech_confirm == 5.0 and cfg.confirm_window == 30.0


class TestFuzz:
    @pytest.mark.parametrize("seed", range(5))
    def test_invariants(self, seed):
        events = random_events(seed, n=3000)
        fsm = TriggerFSM(FUZZ_CONFIG)
        fsm.run(events)
        assert check_invariants(fsm, events, FUZZ_CONFIG) == []
        assert len(fsm.sessions) > 0

    @given(st.integers(0, 2**31), st.integers(1, 400))
    def test_invariants_hypothesis(self, seed, n):
        events = random_events(seed, n=n, days=1.5)
        fsm = TriggerFSM(FUZZ_CONFIG)
        fsm.run(events)
        assert check_invariants(fsm, events, FUZZ_CONFIG) == []

    def test_replay_identical(self):
        events = random_events(9, n=2000)
        a, b = TriggerFSM(FUZZ_CONFIG), TriggerFSM(FUZZ_CONFIG)
        a.run(events)
        b.run(events)
        assert a.actions == b.actions

    def test_pure_step_matches_object(self):
        events = random_events(4, n=500)
        fsm = TriggerFSM(FUZZ_CONFIG)
        state, log = FsmState(), []
        for ev in events:
            fsm.step(ev)
            state, acts = step(state, ev, FUZZ_CONFIG)
            log += acts
        assert log == fsm.actions


class TestCoverage:
    def test_full_day(self):
        assert expected_count(TriggerConfig(), [(0.0, 86400.0)]) == 4

    def test_zero_uptime(self):
        assert expected_count(TriggerConfig(), []) == 0

    def test_partial(self):
        # slots 8-11, 11-14, 14-17, 17-20; uptime 7:00-14:30 holds the first two entirely
        assert expected_slots(TriggerConfig(), [(7 * H, 14.5 * H)]) == [0, 1]
        assert expected_count(TriggerConfig(), [(7 * H, 12 * H), (12 * H, 14 * H), (18 * H, 19 * H)]) == 2

    def test_multi_day(self):
        assert expected_count(TriggerConfig(), [(0.0, 3 * 86400.0)]) == 12

    @pytest.mark.parametrize("n, e, want", [(4, 4, 1.0), (0, 4, 0.0), (115, 116, 0.9914), (0, 0, 1.0)])
    def test_fraction(self, n, e, want):
        assert coverage([None] * n, e) == pytest.approx(want, abs=5e-5)

    def test_within_uptime_filter(self):
        trig = [TriggerEvent(SCHEDULED, 11 * H, 0), TriggerEvent(ALGORITHM, 15 * H, 2)]
        assert triggers_within_uptime(trig, TriggerConfig(), [(7 * H, 14.5 * H)]) == trig[:1]

    @given(st.lists(st.tuples(st.floats(0, 86400), st.floats(0, 20000)), max_size=6))
    def test_expected_matches_brute_force(self, raw):
        cfg = TriggerConfig()
        ivs = [(a, a + d) for a, d in raw]
        merged = merge_intervals(ivs)
        brute = sum(any(a <= s and d <= b for a, b in merged) for s, d in cfg.slots)
        assert expected_count(cfg, ivs) == brute


def test_events_jsonl_round_trip(tmp_path):
    events = random_events(1, n=50)
    write_jsonl([event_to_json(e) for e in events], tmp_path / "e.jsonl")
    assert read_events_jsonl(tmp_path / "e.jsonl") == events


def test_events_jsonl_bad(tmp_path):
    (tmp_path / "e.jsonl").write_text('{"t": 1, "type": "tick"}\n{"t": 2, "type": "teleport"}\n')
    with pytest.raises(ParseError, match=":2"):
        read_events_jsonl(tmp_path / "e.jsonl")


def test_action_json():
    assert Action(START, 1.0, ALGORITHM, 3, 0).to_json() == {
        "action": START, "t": 1.0, "kind": ALGORITHM, "slot_id": 3, "session": 0}


def test_checker_detects_corruption():
    import copy

    events = random_events(3, n=3000)
    fsm = TriggerFSM(FUZZ_CONFIG)
    fsm.run(events)
    broken = copy.deepcopy(fsm)
    broken.state.sessions[1].trigger = broken.state.sessions[0].trigger
    assert any("twice" in p for p in check_invariants(broken, events, FUZZ_CONFIG))
    broken = copy.deepcopy(fsm)
    broken.state.prompts.pop()
    assert any("bijection" in p for p in check_invariants(broken, events, FUZZ_CONFIG))
