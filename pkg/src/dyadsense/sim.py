"""Seeded two-device scenarios, full-pipeline replay and trigger-quality scoring.

A scenario is a ground-truth timeline (interaction segments, co-present
periods, speech that is not a partner conversation) plus the generators
that turn it into RSSI, audio and HR/IMU streams.  Audio is synthesized on demand for any
window, seeded by the window's first sample index, so a replay only pays
for the audio it actually analyses and stays bit-reproducible.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .dsp import (
    FeatureVector,
    MfccConfig,
    build_mel_filterbank,
    features_from_frames,
    frame_signal,
)
from .errors import ConfigError, ParseError
from .multimodal import (
    EmotionLabel,
    FeatureSet,
    balanced_accuracy,
    build_feature_set,
    movement_features,
    physio_features,
)
from .proximity import ProximityConfig, ProximityTracker, RssiSample, write_rssi_jsonl
from .trigger import (
    ALGORITHM,
    SCHEDULED,
    ClockTick,
    SpeechSegmentUpdate,
    TriggerConfig,
    TriggerFSM,
    UptimeChange,
    coverage,
    event_to_json,
    expected_count,
    expected_slots,
    merge_intervals,
    triggers_within_uptime,
    write_jsonl,
)
from .vad import (
    SPEECH,
    HysteresisConfig,
    LinearSvmModel,
    SpeechSegment,
    best_energy_threshold,
    decide,
    frame_log_energy,
    smooth,
    train_linear_svm,
)

logger = logging.getLogger(__name__)

# stream ids mixed into seeds so each generator draws independently
_RNG_TIMELINE, _RNG_RSSI, _RNG_AUDIO, _RNG_SENSORS, _RNG_CORPUS, _RNG_EMOTION = range(6)

CONTAINS_CONVERSATION_SECONDS = 5.0
ORACLE = "oracle"


@dataclass
class AudioParams:
    sample_rate: int = 16000
    f0_range: tuple = (100.0, 250.0)
    harmonic_amplitudes: tuple = (1.0, 0.5, 0.25)
    am_rate: float = 4.0
    am_depth: float = 0.8
    snr_db: tuple = (0.0, 10.0)
    noise_dbfs: tuple = (-45.0, -25.0)


@dataclass
class ScenarioParams:
    duration: float = 8 * 3600.0
    interaction_density: float = 0.3
    mean_segment: float = 900.0
    co_presence_max: float = 600.0
    co_present_speech_prob: float = 0.25
    apart_speech_density: float = 0.1
    near_mean: float = -55.0
    far_mean: float = -85.0
    noise_sd: float = 4.0
    rssi_period: float = 1.0
    hr_baseline: float = 72.0
    hr_variability: float = 3.0
    hr_conversation_lift: float = 6.0
    imu_rate: float = 5.0
    imu_motion_sd: float = 0.05
    uptime: Optional[list] = None
    interaction_segments: Optional[list] = None
    audio: AudioParams = field(default_factory=AudioParams)

    def __post_init__(self):
        if isinstance(self.audio, dict):
            self.audio = AudioParams(**self.audio)
        if self.duration <= 0:
            raise ConfigError("duration must be positive")
        if not 0 <= self.interaction_density < 1:
            raise ConfigError("interaction_density must be in [0, 1)")
        if not 0 <= self.apart_speech_density < 1:
            raise ConfigError("apart_speech_density must be in [0, 1)")
        if not 0 <= self.co_present_speech_prob <= 1:
            raise ConfigError("co_present_speech_prob must be in [0, 1]")
        if self.mean_segment <= 0 or self.rssi_period <= 0 or self.noise_sd < 0:
            raise ConfigError("mean_segment and rssi_period must be positive, noise_sd >= 0")


@dataclass
class Scenario:
    seed: int
    params: ScenarioParams
    interaction_segments: list
    co_present_segments: list
    other_speech_segments: list
    segment_f0: list
    segment_snr: list
    uptime_intervals: list

    @property
    def duration(self) -> float:
        return self.params.duration

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "params": asdict(self.params),
            "interaction_segments": self.interaction_segments,
            "co_present_segments": self.co_present_segments,
            "other_speech_segments": self.other_speech_segments,
            "uptime_intervals": self.uptime_intervals,
        }

    # ---- ground-truth queries ----

    def _speech_segments(self):
        return sorted(
            [(a, b, i) for i, (a, b) in enumerate(self.interaction_segments)]
            + [(a, b, len(self.interaction_segments) + i)
               for i, (a, b) in enumerate(self.other_speech_segments)]
        )

    def near_mask(self, times: np.ndarray) -> np.ndarray:
        mask = np.zeros(len(times), dtype=bool)
        for a, b in self.interaction_segments + self.co_present_segments:
            mask |= (times >= a) & (times < b)
        return mask

    def interaction_overlap(self, start: float, end: float) -> float:
        return sum(max(0.0, min(b, end) - max(a, start)) for a, b in self.interaction_segments)

    def is_speech(self, t: float) -> bool:
        return any(a <= t < b for a, b, _ in self._speech_segments())

    # ---- trace generators ----

    def rssi_trace(self) -> list[RssiSample]:
        p = self.params
        rng = np.random.default_rng([self.seed, _RNG_RSSI])
        times = np.arange(0.0, p.duration, p.rssi_period)
        mean = np.where(self.near_mask(times), p.near_mean, p.far_mean)
        values = mean + p.noise_sd * rng.standard_normal(len(times))
        up = np.zeros(len(times), dtype=bool)
        for a, b in self.uptime_intervals:
            up |= (times >= a) & (times < b)
        return [RssiSample(float(t), float(v)) for t, v, u in zip(times, values, up) if u]

    def audio(self, t0: float, n_samples: int) -> np.ndarray:
        """Audio for ``[t0, t0 + n_samples / sr)``: tone-stack speech over white noise."""
        ap = self.params.audio
        sr = ap.sample_rate
        start = int(round(t0 * sr))
        rng = np.random.default_rng([self.seed, _RNG_AUDIO, start])
        noise_rms = 10.0 ** (rng.uniform(*ap.noise_dbfs) / 20.0)
        out = noise_rms * rng.standard_normal(n_samples)
        t = (start + np.arange(n_samples)) / sr
        for a, b, idx in self._speech_segments():
            if b <= t[0] or a > t[-1]:
                continue
            mask = (t >= a) & (t < b)
            out[mask] += tone_stack(t[mask], self.segment_f0[idx], self.segment_snr[idx],
                                    noise_rms, ap)
        return np.clip(out, -1.0, 1.0)

    def heart_rate(self) -> np.ndarray:
        p = self.params
        rng = np.random.default_rng([self.seed, _RNG_SENSORS, 0])
        times = np.arange(0.0, p.duration, 1.0)
        lift = np.where(self.near_mask(times), p.hr_conversation_lift, 0.0)
        drift = np.cumsum(rng.standard_normal(len(times))) * 0.02
        bpm = p.hr_baseline + lift + drift + p.hr_variability * rng.standard_normal(len(times))
        return np.column_stack([times, bpm])

    def imu(self) -> np.ndarray:
        p = self.params
        rng = np.random.default_rng([self.seed, _RNG_SENSORS, 1])
        times = np.arange(0.0, p.duration, 1.0 / p.imu_rate)
        acc = p.imu_motion_sd * rng.standard_normal((len(times), 3))
        acc[:, 2] += 1.0
        gyr = 2.0 * p.imu_motion_sd * rng.standard_normal((len(times), 3))
        return np.column_stack([times, acc, gyr])


def tone_stack(t: np.ndarray, f0: float, snr_db: float, noise_rms: float,
               ap: AudioParams) -> np.ndarray:
    """Harmonic stack with sinusoidal amplitude modulation, scaled to ``snr_db``."""
    amps = np.asarray(ap.harmonic_amplitudes, dtype=np.float64)
    carrier = sum(a * np.sin(2 * np.pi * (h + 1) * f0 * t) for h, a in enumerate(amps))
    env = 1.0 + ap.am_depth * np.sin(2 * np.pi * ap.am_rate * t)
    # mean power of carrier * env
    power = 0.5 * float(amps @ amps) * (1.0 + 0.5 * ap.am_depth**2)
    target = noise_rms**2 * 10.0 ** (snr_db / 10.0)
    return math.sqrt(target / power) * env * carrier


def _place_segments(rng, total: float, duration: float, mean_len: float):
    """Disjoint segments summing to ``total`` with random gaps."""
    if total <= 0:
        return []
    n = max(1, int(round(total / mean_len)))
    lengths = rng.uniform(0.3, 1.7, n)
    lengths *= total / lengths.sum()
    gaps = rng.dirichlet(np.ones(n + 1)) * (duration - total)
    segs, t = [], 0.0
    for g, length in zip(gaps[:-1], lengths):
        t += g
        segs.append((float(t), float(t + length)))
        t += length
    return segs


def _subtract(free: list, taken: list) -> list:
    """Parts of ``free`` intervals not covered by ``taken``."""
    out = []
    for a, b in free:
        pieces = [(a, b)]
        for c, d in taken:
            nxt = []
            for x, y in pieces:
                if d <= x or c >= y:
                    nxt.append((x, y))
                    continue
                if c > x:
                    nxt.append((x, c))
                if d < y:
                    nxt.append((d, y))
            pieces = nxt
        out += pieces
    return out


def generate_scenario(seed: int, params: ScenarioParams | None = None) -> Scenario:
    """Build a deterministic scenario timeline from ``seed``.

    Interaction segments total ``interaction_density * duration`` exactly
    (unless given explicitly).  Each interaction gets co-present lead-in and
    lead-out periods of up to ``co_presence_max`` seconds; with probability
    ``co_present_speech_prob`` such a period carries speech that is not a
    conversation between the partners.  Apart periods longer than two
    minutes carry speech with probability ``2 * apart_speech_density``.
    """
    p = params or ScenarioParams()
    rng = np.random.default_rng([seed, _RNG_TIMELINE])
    T = p.duration
    if p.interaction_segments is not None:
        inter = [(float(a), float(b)) for a, b in merge_intervals(p.interaction_segments)]
        if inter and (inter[0][0] < 0 or inter[-1][1] > T):
            raise ConfigError("interaction segments must lie within the scenario")
    else:
        inter = _place_segments(rng, p.interaction_density * T, T, p.mean_segment)

    co_present = []
    bounds = [(0.0, 0.0)] + inter + [(T, T)]
    for k in range(1, len(bounds) - 1):
        a, b = bounds[k]
        lead = min(rng.uniform(0, p.co_presence_max), (a - bounds[k - 1][1]) / 2)
        tail = min(rng.uniform(0, p.co_presence_max), (bounds[k + 1][0] - b) / 2)
        if lead > 0:
            co_present.append((a - lead, a))
        if tail > 0:
            co_present.append((b, b + tail))

    # co-present but not conversing with each other (phone call, TV)
    other = [(float(a), float(b)) for a, b in co_present
             if rng.random() < p.co_present_speech_prob]
    for a, b in _subtract([(0.0, T)], inter + co_present):
        if b - a > 120 and rng.random() < p.apart_speech_density * 2:
            length = rng.uniform(0.2, 0.5) * (b - a)
            start = rng.uniform(a, b - length)
            other.append((float(start), float(start + length)))
    other.sort()

    n_speech = len(inter) + len(other)
    ap = p.audio
    f0 = rng.uniform(*ap.f0_range, n_speech).tolist()
    snr = rng.uniform(*ap.snr_db, n_speech).tolist()
    uptime = [tuple(map(float, iv)) for iv in (p.uptime or [(0.0, T)])]
    return Scenario(seed, p, inter, co_present, other, f0, snr, merge_intervals(uptime))


# ---- VAD corpus and evaluation ------------------------------------------------

@dataclass
class VadCorpus:
    features: np.ndarray
    labels: np.ndarray  # +1 speech / -1 non-speech
    log_energy: np.ndarray


def generate_vad_corpus(seed: int, clips_per_class: int = 25, clip_seconds: float = 1.0,
                        audio: AudioParams | None = None,
                        mfcc_config: MfccConfig | None = None,
                        silent_fraction: float = 0.1) -> VadCorpus:
    """Frame-labelled MFCCs from tone-stack speech clips and noise-only clips.

    Every clip draws its own noise level, so loudness alone is a poor cue.
    ``silent_fraction`` of the non-speech clips (at least one) are digital
    silence.
    """
    ap = audio or AudioParams()
    cfg = mfcc_config or MfccConfig(sample_rate=ap.sample_rate)
    fb = build_mel_filterbank(cfg)
    rng = np.random.default_rng([seed, _RNG_CORPUS])
    n = int(round(clip_seconds * ap.sample_rate))
    t = np.arange(n) / ap.sample_rate
    n_silent = max(1, int(round(silent_fraction * clips_per_class))) if silent_fraction > 0 else 0
    silent = set(rng.choice(clips_per_class, n_silent, replace=False).tolist())
    feats, labels, energy = [], [], []
    for label in (1, -1):
        for k in range(clips_per_class):
            noise_rms = 10.0 ** (rng.uniform(*ap.noise_dbfs) / 20.0)
            x = noise_rms * rng.standard_normal(n)
            if label == -1 and k in silent:
                x[:] = 0.0
            if label == 1:
                x += tone_stack(t + rng.uniform(0, 1), rng.uniform(*ap.f0_range),
                                rng.uniform(*ap.snr_db), noise_rms, ap)
            x = np.clip(x, -1.0, 1.0)
            frames = frame_signal(x, cfg)
            feats.append(features_from_frames(frames, fb, cfg))
            energy.append(frame_log_energy(frames))
            labels.append(np.full(len(frames), label))
    return VadCorpus(np.vstack(feats), np.concatenate(labels).astype(np.float64),
                     np.concatenate(energy))


def evaluate_vad(corpus: VadCorpus, model) -> dict:
    """Balanced accuracy and per-class recall of a model against the best energy threshold.

    ``model`` may be ``"oracle"`` to score the ground-truth labels.
    """
    truth = corpus.labels > 0
    if isinstance(model, str) and model == ORACLE:
        pred = truth.copy()
    else:
        pred = np.array([d.label == SPEECH for d in decide(model, corpus.features)])
    thr, base_bacc = best_energy_threshold(corpus.log_energy, truth)
    return {
        "balanced_accuracy": balanced_accuracy(pred, truth),
        "recall_speech": float(pred[truth].mean()),
        "recall_non_speech": float((~pred[~truth]).mean()),
        "baseline_threshold": thr,
        "baseline_balanced_accuracy": base_bacc,
    }


def train_default_vad(seed: int = 42, clips_per_class: int = 25, lam: float = 1e-4,
                      epochs: int = 20) -> LinearSvmModel:
    corpus = generate_vad_corpus(seed, clips_per_class)
    return train_linear_svm(corpus.features, corpus.labels, lam=lam, epochs=epochs, seed=seed)


# ---- replay ------------------------------------------------------------------------

@dataclass
class PipelineConfig:
    mfcc: MfccConfig = field(default_factory=MfccConfig)
    hysteresis: HysteresisConfig = field(default_factory=lambda: HysteresisConfig(2, 3, 0.1))
    proximity: ProximityConfig = field(default_factory=ProximityConfig)
    trigger: Optional[TriggerConfig] = None
    vad_period: float = 3.0
    vad_window: float = 0.5
    speech_fraction: float = 0.5


def scenario_trigger_config(duration: float, n_slots: int = 8, **overrides) -> TriggerConfig:
    """Equal back-to-back slots spanning the scenario (one scenario = one day).

    ``min_gap`` defaults to half a slot: with a gap as long as a slot, a
    fallback trigger at one deadline would lock the algorithm out of the
    whole next slot.
    """
    width = duration / n_slots
    slots = tuple((i * width, (i + 1) * width) for i in range(n_slots))
    overrides.setdefault("min_gap", max(width / 2, overrides.get("recording_duration", 300.0)))
    return TriggerConfig(slots=slots, **overrides)


@dataclass
class SimReport:
    seed: int
    coverage: float
    expected: int
    precision_algorithm: Optional[float]
    precision_scheduled: Optional[float]
    counts: dict
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class SimResult:
    report: SimReport
    actions: list
    events: list
    sessions: list
    probes: list
    rssi: list


def _precision(sessions, scenario: Scenario, kind: str) -> Optional[float]:
    picked = [s for s in sessions if s.trigger.kind == kind]
    if not picked:
        return None
    hits = sum(
        scenario.interaction_overlap(s.trigger.t_start, s.t_end) >= CONTAINS_CONVERSATION_SECONDS
        for s in picked
    )
    return hits / len(picked)


def _probe_speech(scenario: Scenario, t: float, model, cfg: PipelineConfig, fb) -> tuple[bool, float]:
    """Run VAD on the audio window ending at ``t``; returns (speech?, speech seconds)."""
    n = int(round(cfg.vad_window * cfg.mfcc.sample_rate))
    t0 = max(0.0, t - cfg.vad_window)
    if model == ORACLE:
        times = t0 + np.arange(0.0, cfg.vad_window, 0.01)
        frac = float(np.mean([scenario.is_speech(x) for x in times]))
        return frac >= cfg.speech_fraction, frac * cfg.vad_window
    x = scenario.audio(t0, n)
    feats = features_from_frames(frame_signal(x, cfg.mfcc), fb, cfg.mfcc)
    decisions = decide(model, feats)
    segs = smooth(decisions, cfg.hysteresis, cfg.mfcc.hop_seconds, t0)
    speech = sum(s.duration for s in segs)
    return speech >= cfg.speech_fraction * cfg.vad_window, speech


def run_simulation(scenario: Scenario, model, config: PipelineConfig | None = None,
                   keep_traces: bool = False) -> SimResult:
    """Replay one scenario through proximity -> VAD -> trigger FSM and score it.

    ``model`` is a trained :class:`LinearSvmModel` or ``"oracle"`` for
    ground-truth speech.  VAD runs only while the FSM could fire: every
    ``vad_period`` seconds it analyses the preceding ``vad_window`` seconds
    of audio, and the verdict holds until the next probe.

    Raises:
        ConfigError: no model supplied.
    """
    if model is None:
        raise ConfigError("run_simulation needs a trained VAD model (or 'oracle')")
    cfg = config or PipelineConfig()
    tcfg = cfg.trigger or scenario_trigger_config(scenario.duration)
    fb = build_mel_filterbank(cfg.mfcc)
    fsm = TriggerFSM(tcfg)
    prox = ProximityTracker(cfg.proximity)
    events, probes = [], []

    def feed(ev):
        fsm.step(ev)
        if keep_traces:
            events.append(ev)

    rssi = scenario.rssi_trace()
    uptime = scenario.uptime_intervals
    up_edges = sorted([(a, True) for a, _ in uptime] + [(b, False) for _, b in uptime])
    edge_i = 0
    speech_on = False
    next_probe = -math.inf

    for sample in rssi:
        t = sample.timestamp
        while edge_i < len(up_edges) and up_edges[edge_i][0] <= t:
            feed(UptimeChange(*up_edges[edge_i]))
            edge_i += 1
        for tr in prox.update(sample):
            feed(tr)
        feed(ClockTick(t))
        gated = fsm.could_trigger(t)
        if gated and t >= next_probe:
            is_speech, secs = _probe_speech(scenario, t, model, cfg, fb)
            next_probe = t + cfg.vad_period
            if keep_traces:
                probes.append({"t": t, "speech": is_speech, "speech_seconds": secs})
            if is_speech != speech_on:
                speech_on = is_speech
                feed(SpeechSegmentUpdate(t, is_speech))
        elif not gated:
            next_probe = -math.inf
            if speech_on:
                speech_on = False
                feed(SpeechSegmentUpdate(t, False))
    while edge_i < len(up_edges):
        feed(UptimeChange(*up_edges[edge_i]))
        edge_i += 1
    feed(ClockTick(max(scenario.duration, fsm.state.t or 0.0) + tcfg.recording_duration))

    sessions = list(fsm.sessions)
    triggers = [s.trigger for s in sessions]
    expected = expected_count(tcfg, uptime)
    counted = triggers_within_uptime(triggers, tcfg, uptime)
    n_alg = sum(tr.kind == ALGORITHM for tr in triggers)
    report = SimReport(
        seed=scenario.seed,
        coverage=coverage(counted, expected),
        expected=expected,
        precision_algorithm=_precision(sessions, scenario, ALGORITHM),
        precision_scheduled=_precision(sessions, scenario, SCHEDULED),
        counts={ALGORITHM: n_alg, SCHEDULED: len(triggers) - n_alg,
                "prompts": len(fsm.state.prompts)},
        metadata={
            "duration": scenario.duration,
            "interaction_seconds": sum(b - a for a, b in scenario.interaction_segments),
            "expected_slots": expected_slots(tcfg, uptime),
            "model": "oracle" if model == ORACLE else "linear_svm",
        },
    )
    return SimResult(report, list(fsm.actions), events, sessions, probes,
                     rssi if keep_traces else [])


# ---- batteries ---------------------------------------------------------------------

def write_traces(scenario: Scenario, result: SimResult, directory) -> None:
    """Materialize every intermediate stream of one replay as JSON/JSONL files."""
    out = Path(directory) / f"scenario_{scenario.seed}"
    out.mkdir(parents=True, exist_ok=True)
    write_json(scenario.to_json(), out / "scenario.json")
    write_rssi_jsonl(result.rssi, out / "rssi.jsonl")
    write_jsonl(result.probes, out / "vad_probes.jsonl")
    write_jsonl((event_to_json(ev) for ev in result.events), out / "fsm_events.jsonl")
    write_jsonl((a.to_json() for a in result.actions), out / "actions.jsonl")
    write_json(result.report.to_json(), out / "report.json")


def _run_one(args):
    seed, params, model, config, trace_dir = args
    scenario = generate_scenario(seed, params)
    result = run_simulation(scenario, model, config, keep_traces=trace_dir is not None)
    if trace_dir is not None:
        write_traces(scenario, result, trace_dir)
    return result.report


def run_battery(seeds: Sequence[int], model, params: ScenarioParams | None = None,
                config: PipelineConfig | None = None, workers: int = 1,
                trace_dir=None) -> dict:
    """Run many scenarios; the summary is sorted by seed and independent of ``workers``.

    With ``trace_dir`` set, each scenario's streams are written beneath it.
    """
    jobs = [(s, params, model, config, trace_dir) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            reports = list(pool.map(_run_one, jobs))
    else:
        reports = [_run_one(j) for j in jobs]
    reports.sort(key=lambda r: r.seed)
    return summarize(reports)


def _mean(values):
    vals = [v for v in values if v is not None]
    return float(np.mean(vals)) if vals else None


def summarize(reports: Sequence[SimReport]) -> dict:
    pa = _mean(r.precision_algorithm for r in reports)
    ps = _mean(r.precision_scheduled for r in reports)
    return {
        "scenarios": len(reports),
        "mean_coverage": _mean(r.coverage for r in reports),
        "mean_precision_algorithm": pa,
        "mean_precision_scheduled": ps,
        "precision_gap": None if pa is None or ps is None else pa - ps,
        "total_algorithm": sum(r.counts[ALGORITHM] for r in reports),
        "total_scheduled": sum(r.counts[SCHEDULED] for r in reports),
        "reports": [r.to_json() for r in reports],
    }


# ---- synthetic emotion sessions ----------------------------------------------------

@dataclass
class EmotionEffects:
    hr_lift: float = 8.0
    movement_scale: float = 1.0
    acoustic_shift: float = 1.5
    session_seconds: float = 300.0
    mfcc_rate: float = 10.0


def generate_emotion_sessions(seed: int, n_sessions: int, effects: EmotionEffects | None = None,
                              num_coefficients: int = 13):
    """Synthetic sessions with known label effects.

    High arousal raises heart rate by ``hr_lift`` bpm and scales wrist
    motion by ``1 + movement_scale``; positive valence shifts MFCC
    coefficients 1-4 by ``acoustic_shift`` during speech.  Returns a list
    of ``(FeatureSet, EmotionLabel)``.
    """
    fx = effects or EmotionEffects()
    rng = np.random.default_rng([seed, _RNG_EMOTION])
    out = []
    for k in range(n_sessions):
        high = bool(rng.random() < 0.5)
        pos = bool(rng.random() < 0.5)
        T = fx.session_seconds
        t_hr = np.arange(0.0, T, 1.0)
        base = rng.normal(72.0, 4.0)
        bpm = base + fx.hr_lift * high + rng.normal(0, 3.0, len(t_hr))
        hr = np.column_stack([t_hr, bpm])

        t_imu = np.arange(0.0, T, 0.2)
        motion = 0.05 * (1.0 + fx.movement_scale * high) * rng.lognormal(0, 0.2)
        acc = motion * rng.standard_normal((len(t_imu), 3))
        acc[:, 2] += 1.0
        gyr = 2 * motion * rng.standard_normal((len(t_imu), 3))
        imu = np.column_stack([t_imu, acc, gyr])

        n_frames = int(T * fx.mfcc_rate)
        coeffs = rng.normal(0, 1.0, (n_frames, num_coefficients))
        coeffs[:, 0] += rng.normal(-20, 2)
        coeffs[:, 1:5] += fx.acoustic_shift * (1 if pos else -1) * 0.5
        stream = [FeatureVector(coeffs[i], i, i / fx.mfcc_rate) for i in range(n_frames)]
        n_seg = int(rng.integers(3, 8))
        starts = np.sort(rng.uniform(0, T - 20, n_seg))
        segs = [SpeechSegment(float(s), float(s + rng.uniform(5, 20))) for s in starts]

        fs = build_feature_set(f"s{seed}-{k:04d}", hr, imu, stream, segs)
        out.append((fs, EmotionLabel("positive" if pos else "negative", "high" if high else "low")))
    return out


def xor_fixture(seed: int, n_per_cluster: int = 50, spread: float = 0.35):
    """Four Gaussian clusters at (+-1, +-1) labelled by XOR of the signs."""
    rng = np.random.default_rng([seed, _RNG_EMOTION, 99])
    X, y = [], []
    for cx, cy in ((1, 1), (-1, -1), (1, -1), (-1, 1)):
        X.append(rng.normal((cx, cy), spread, (n_per_cluster, 2)))
        y += [1 if cx * cy < 0 else 0] * n_per_cluster
    return np.vstack(X), np.array(y)


def session_feature_sets(scenario: Scenario, sessions, mfcc_config: MfccConfig | None = None):
    """Physio and movement features for each recorded session (acoustic left absent)."""
    hr, imu = scenario.heart_rate(), scenario.imu()
    out = []
    for i, s in enumerate(sessions):
        a, b = s.trigger.t_start, s.t_end
        h = hr[(hr[:, 0] >= a) & (hr[:, 0] < b)]
        m = imu[(imu[:, 0] >= a) & (imu[:, 0] < b)]
        out.append(FeatureSet(
            f"{scenario.seed}-{i}",
            physio_features(h) if len(h) >= 2 else None,
            movement_features(m) if len(m) >= 2 else None,
            None,
        ))
    return out


def write_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")



_REPORT_COLUMNS = ("seed", "coverage", "expected", "precision_algorithm", "precision_scheduled",
                   ALGORITHM, SCHEDULED)


def _cell(v) -> str:
    if v is None:
        return "NA"
    return f"{v:.4f}" if isinstance(v, float) else str(v)


def render_summary(summary: dict, fmt: str = "text") -> str:
    """Per-scenario table plus totals, as aligned text or CSV."""
    if fmt not in ("text", "csv"):
        raise ConfigError(f"unknown report format {fmt!r} (text or csv)")
    try:
        rows = [[_cell(r["seed"]), _cell(r["coverage"]), _cell(r["expected"]),
                 _cell(r["precision_algorithm"]), _cell(r["precision_scheduled"]),
                 _cell(r["counts"][ALGORITHM]), _cell(r["counts"][SCHEDULED])]
                for r in summary["reports"]]
        rows.append(["mean", _cell(summary["mean_coverage"]), "",
                     _cell(summary["mean_precision_algorithm"]),
                     _cell(summary["mean_precision_scheduled"]),
                     _cell(summary["total_algorithm"]), _cell(summary["total_scheduled"])])
        gap = summary["precision_gap"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"not a simulation summary: missing {exc}") from exc
    if fmt == "csv":
        lines = [",".join(_REPORT_COLUMNS)] + [",".join(r) for r in rows]
        return "\n".join(lines) + "\n"
    widths = [max(len(c), *(len(r[i]) for r in rows)) for i, c in enumerate(_REPORT_COLUMNS)]
    fmt_row = lambda cells: "  ".join(c.rjust(w) for c, w in zip(cells, widths))
    lines = [fmt_row(_REPORT_COLUMNS), fmt_row(["-" * w for w in widths])]
    lines += [fmt_row(r) for r in rows]
    lines.append(f"precision gap (algorithm - scheduled): {_cell(gap)}")
    return "\n".join(lines) + "\n"
