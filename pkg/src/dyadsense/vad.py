"""Linear-SVM voice activity detection: scoring, hysteresis smoothing, training, persistence."""

from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dsp import FeatureStream, MfccConfig
from .errors import ConfigError, ModelError, ParseError, TrainingError

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1
STD_EPSILON = 1e-12
ENERGY_FLOOR = 1e-10

SPEECH = "speech"
NON_SPEECH = "non-speech"


@dataclass(frozen=True)
class LinearSvmModel:
    weights: np.ndarray
    bias: float
    feature_mean: np.ndarray
    feature_std: np.ndarray
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64).ravel()
        mean = np.array(self.feature_mean, dtype=np.float64).ravel()
        std = np.array(self.feature_std, dtype=np.float64).ravel()
        if not (len(w) == len(mean) == len(std)):
            raise ModelError(
                f"weights/mean/std lengths differ: {len(w)}, {len(mean)}, {len(std)}"
            )
        std = np.where(std < STD_EPSILON, 1.0, std)
        if not (np.isfinite(w).all() and np.isfinite(mean).all()
                and np.isfinite(std).all() and math.isfinite(self.bias)):
            raise ModelError("model parameters must be finite")
        for arr in (w, mean, std):
            arr.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "feature_mean", mean)
        object.__setattr__(self, "feature_std", std)
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def dim(self) -> int:
        return len(self.weights)

    def __eq__(self, other):
        if not isinstance(other, LinearSvmModel):
            return NotImplemented
        return (
            self.bias == other.bias
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.feature_mean, other.feature_mean)
            and np.array_equal(self.feature_std, other.feature_std)
            and self.metadata == other.metadata
        )

    def scores(self, X) -> np.ndarray:
        """Vectorized decision scores for rows of ``X``."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise ModelError(f"expected (n, {self.dim}) features, got {X.shape}")
        return ((X - self.feature_mean) / self.feature_std) @ self.weights + self.bias


@dataclass(frozen=True)
class VadDecision:
    frame_index: int
    score: float
    label: str


@dataclass(frozen=True)
class HysteresisConfig:
    enter_frames: int = 3
    exit_frames: int = 5
    min_segment: float = 0.3

    def __post_init__(self):
        if self.enter_frames < 1 or self.exit_frames < 1:
            raise ConfigError("enter_frames and exit_frames must be >= 1")
        if self.min_segment < 0:
            raise ConfigError("min_segment must be non-negative")


@dataclass(frozen=True)
class SpeechSegment:
    start: float
    end: float

    def __post_init__(self):
        if not self.end > self.start:
            raise ValueError(f"segment end {self.end} must exceed start {self.start}")

    @property
    def duration(self) -> float:
        return self.end - self.start


def decision_score(model: LinearSvmModel, features) -> float:
    """Signed score ``w . ((x - mean) / std) + b`` for one feature vector."""
    x = np.asarray(getattr(features, "values", features), dtype=np.float64).ravel()
    if len(x) != model.dim:
        raise ModelError(f"feature dimension {len(x)} does not match model dimension {model.dim}")
    return float(np.dot(model.weights, (x - model.feature_mean) / model.feature_std) + model.bias)


def classify(score: float) -> str:
    # ties go to non-speech
    if math.isnan(score):
        raise ModelError("score is NaN")
    return SPEECH if score > 0 else NON_SPEECH


def decide(model: LinearSvmModel, features: Sequence) -> list[VadDecision]:
    if len(features) == 0:
        return []
    X = np.array([getattr(f, "values", f) for f in features], dtype=np.float64)
    indices = [getattr(f, "frame_index", i) for i, f in enumerate(features)]
    return [
        VadDecision(frame_index=int(i), score=float(s), label=classify(float(s)))
        for i, s in zip(indices, model.scores(X))
    ]


class SegmentTracker:
    """Incremental hysteresis smoother turning frame labels into speech segments.

    Enters speech after ``enter_frames`` consecutive speech labels (the
    segment starts at the first of them) and leaves after ``exit_frames``
    consecutive non-speech labels (the segment ends at the first of those).
    """

    def __init__(self, cfg: HysteresisConfig, hop_seconds: float, time_offset: float = 0.0):
        self.cfg = cfg
        self.hop = hop_seconds
        self.offset = time_offset
        self.in_speech = False
        self._run_start: int | None = None
        self._run_len = 0
        self._seg_start: int | None = None
        self._next_frame = 0

    def _time(self, frame: int) -> float:
        return self.offset + frame * self.hop

    def _close(self, end_frame: int) -> SpeechSegment | None:
        start = self._seg_start
        self._seg_start = None
        self.in_speech = False
        if end_frame <= start:
            return None
        seg_start, seg_end = self._time(start), self._time(end_frame)
        if seg_end - seg_start < self.cfg.min_segment:
            return None
        return SpeechSegment(seg_start, seg_end)

    def push(self, label: str, frame_index: int | None = None) -> SpeechSegment | None:
        """Feed one label; returns a segment when one closes."""
        k = self._next_frame if frame_index is None else frame_index
        self._next_frame = k + 1
        want_flip = (label == SPEECH) != self.in_speech
        if want_flip:
            if self._run_len == 0:
                self._run_start = k
            self._run_len += 1
        else:
            self._run_len = 0
        if not self.in_speech and self._run_len >= self.cfg.enter_frames:
            self.in_speech = True
            self._seg_start = self._run_start
            self._run_len = 0
        elif self.in_speech and self._run_len >= self.cfg.exit_frames:
            self._run_len = 0
            return self._close(self._run_start)
        return None

    def finish(self) -> SpeechSegment | None:
        """Close an open segment at the end of the stream."""
        if self.in_speech:
            end = self._run_start if self._run_len else self._next_frame
            self._run_len = 0
            return self._close(end)
        return None


def smooth(decisions: Iterable, cfg: HysteresisConfig, hop_seconds: float,
           time_offset: float = 0.0) -> list[SpeechSegment]:
    """Hysteresis-smooth frame decisions (or bare labels) into disjoint segments.

    An open segment at the end of the input is closed at the end of the
    last frame, or at the start of a trailing non-speech run.
    """
    tracker = SegmentTracker(cfg, hop_seconds, time_offset)
    segments = []
    for i, d in enumerate(decisions):
        label = d.label if isinstance(d, VadDecision) else d
        seg = tracker.push(label, i)
        if seg is not None:
            segments.append(seg)
    seg = tracker.finish()
    if seg is not None:
        segments.append(seg)
    return segments


def _standardize_fit(X: np.ndarray):
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std < STD_EPSILON, 1.0, std)
    return mean, std


def hinge_objective(Z: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, lam: float) -> float:
    """Regularized primal hinge objective on standardized data (bias regularized)."""
    margins = y * (Z @ w + b)
    return 0.5 * lam * (float(w @ w) + b * b) + float(np.maximum(0.0, 1.0 - margins).mean())


def train_linear_svm(X, y, lam: float = 1e-4, epochs: int = 20, seed: int = 42,
                     objective_tolerance: float = 1e-2) -> LinearSvmModel:
    """Pegasos-style stochastic subgradient training of a linear SVM.

    Features are z-normalized with training-set statistics that are stored
    in the model.  The bias is learned as the weight of a constant feature,
    so it is regularized together with the weights.  Each epoch visits the
    data in a fresh seeded permutation.  The returned weights are the
    average of all iterates from the second half of the epochs onward
    (suffix averaging); before that point each epoch's own average is
    scored.  The primal objective of the current average after every epoch
    is stored in ``metadata["objective_history"]`` and an increase beyond
    ``objective_tolerance`` (relative) is logged.

    Args:
        X: (n, d) feature matrix.
        y: labels, +1 speech / -1 non-speech.
        lam: regularization strength.
        epochs: passes over the data.
        seed: shuffle seed; same data + seed gives an identical model.

    Raises:
        TrainingError: labels outside {+1, -1}, a single class, or empty data.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 2 or len(X) == 0 or len(X) != len(y):
        raise TrainingError(f"need non-empty (n, d) features with n labels, got {X.shape}, {y.shape}")
    if not np.isin(y, (-1.0, 1.0)).all():
        raise TrainingError("labels must be +1 (speech) or -1 (non-speech)")
    if len(np.unique(y)) < 2:
        raise TrainingError("training data contains a single class")
    if lam <= 0 or epochs < 1:
        raise TrainingError("lam must be positive and epochs >= 1")

    mean, std = _standardize_fit(X)
    Z = np.hstack([(X - mean) / std, np.ones((len(X), 1))])
    n, d = Z.shape
    rng = np.random.default_rng(seed)
    w = np.zeros(d)
    radius = 1.0 / math.sqrt(lam)
    t = 0
    history = []
    suffix_start = epochs // 2
    suffix_sum, suffix_count = np.zeros(d), 0
    for epoch in range(epochs):
        w_sum = np.zeros(d)
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            zi, yi = Z[i], y[i]
            violated = yi * float(zi @ w) < 1.0
            w *= 1.0 - eta * lam
            if violated:
                w += (eta * yi) * zi
            norm = math.sqrt(float(w @ w))
            if norm > radius:
                w *= radius / norm
            w_sum += w
        if epoch >= suffix_start:
            suffix_sum += w_sum
            suffix_count += n
            w_avg = suffix_sum / suffix_count
        else:
            w_avg = w_sum / n
        obj = hinge_objective(Z[:, :-1], y, w_avg[:-1], float(w_avg[-1]), lam)
        if history and obj > history[-1] * (1.0 + objective_tolerance):
            logger.warning("hinge objective rose from %.6g to %.6g in epoch %d",
                           history[-1], obj, epoch + 1)
        history.append(obj)

    return LinearSvmModel(
        weights=w_avg[:-1].copy(),
        bias=float(w_avg[-1]),
        feature_mean=mean,
        feature_std=std,
        metadata={
            "trainer": "pegasos",
            "averaging": "suffix",
            "lambda": lam,
            "epochs": epochs,
            "seed": seed,
            "n_train": int(n),
            "objective_history": history,
        },
    )


def _json_floats(values) -> list:
    return [float(v) for v in values]


def model_to_dict(model: LinearSvmModel) -> dict:
    return {
        "version": MODEL_FORMAT_VERSION,
        "dim": model.dim,
        "weights": _json_floats(model.weights),
        "bias": model.bias,
        "mean": _json_floats(model.feature_mean),
        "std": _json_floats(model.feature_std),
        "metadata": model.metadata,
    }


_MODEL_KEYS = ("version", "dim", "weights", "bias", "mean", "std", "metadata")


def model_from_dict(obj: dict, source: str = "<model>") -> LinearSvmModel:
    if not isinstance(obj, dict):
        raise ParseError(f"{source}: model must be a JSON object")
    for key in _MODEL_KEYS:
        if key not in obj:
            raise ParseError(f"{source}: missing required field '{key}'")
    for key in obj:
        if key not in _MODEL_KEYS:
            warnings.warn(f"{source}: ignoring unknown field '{key}'", stacklevel=3)
    if obj["version"] != MODEL_FORMAT_VERSION:
        raise ParseError(f"{source}: unsupported model version {obj['version']!r}")

    def vec(key):
        val = obj[key]
        if not isinstance(val, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in val
        ):
            raise ParseError(f"{source}: field '{key}' must be a list of numbers")
        if len(val) != obj["dim"]:
            raise ParseError(f"{source}: field '{key}' has {len(val)} entries, dim is {obj['dim']}")
        return np.array(val, dtype=np.float64)

    bias = obj["bias"]
    if not isinstance(bias, (int, float)) or isinstance(bias, bool):
        raise ParseError(f"{source}: field 'bias' must be a number")
    if not isinstance(obj["metadata"], dict):
        raise ParseError(f"{source}: field 'metadata' must be an object")
    try:
        return LinearSvmModel(vec("weights"), float(bias), vec("mean"), vec("std"),
                              dict(obj["metadata"]))
    except ModelError as exc:
        raise ParseError(f"{source}: {exc}") from exc


def save_model(model: LinearSvmModel, path) -> None:
    # json writes floats with repr(), which round-trips every double exactly
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def load_model(path) -> LinearSvmModel:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return model_from_dict(obj, str(path))


def frame_log_energy(frames) -> np.ndarray:
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    return np.log(np.maximum((frames**2).mean(axis=1), ENERGY_FLOOR))


def energy_baseline(frames, threshold: float) -> list[str]:
    """Label frames as speech when their log mean power exceeds ``threshold``."""
    return [SPEECH if e > threshold else NON_SPEECH for e in frame_log_energy(frames)]


def best_energy_threshold(log_energies, is_speech) -> tuple[float, float]:
    """Threshold maximizing balanced accuracy; returns (threshold, balanced accuracy).

    Candidates are midpoints between consecutive distinct energies plus the
    two extremes, so the search is exhaustive for this data.
    """
    e = np.asarray(log_energies, dtype=np.float64)
    pos = np.asarray(is_speech, dtype=bool)
    n_pos, n_neg = pos.sum(), (~pos).sum()
    if n_pos == 0 or n_neg == 0:
        raise ValueError("need both classes to pick a threshold")
    order = np.argsort(e, kind="stable")
    e_sorted, pos_sorted = e[order], pos[order]
    # predictions "speech iff e > thr": thr just below position i marks i.. as speech
    pos_above = n_pos - np.concatenate([[0], np.cumsum(pos_sorted)])
    neg_below = np.concatenate([[0], np.cumsum(~pos_sorted)])
    bal = 0.5 * (pos_above / n_pos + neg_below / n_neg)
    # a cut is valid only between distinct values
    valid = np.ones(len(e) + 1, dtype=bool)
    valid[1:-1] = e_sorted[1:] > e_sorted[:-1]
    bal = np.where(valid, bal, -1.0)
    i = int(np.argmax(bal))
    if i == 0:
        thr = e_sorted[0] - 1.0
    elif i == len(e):
        thr = e_sorted[-1]
    else:
        thr = 0.5 * (e_sorted[i - 1] + e_sorted[i])
    return float(thr), float(bal[i])


class VoiceActivityDetector:
    """Streaming VAD: PCM chunks in, closed speech segments out."""

    def __init__(self, model: LinearSvmModel, mfcc_config: MfccConfig | None = None,
                 hysteresis: HysteresisConfig | None = None):
        self.mfcc_config = mfcc_config or MfccConfig()
        if model.dim != self.mfcc_config.num_coefficients:
            raise ModelError(
                f"model dimension {model.dim} does not match "
                f"{self.mfcc_config.num_coefficients} MFCC coefficients"
            )
        self.model = model
        self._features = FeatureStream(self.mfcc_config)
        self._tracker = SegmentTracker(hysteresis or HysteresisConfig(),
                                       self.mfcc_config.hop_seconds)
        self.decisions: list[VadDecision] = []

    def push(self, chunk) -> list[SpeechSegment]:
        closed = []
        feats = self._features.push(chunk)
        for dec in decide(self.model, feats):
            self.decisions.append(dec)
            seg = self._tracker.push(dec.label, dec.frame_index)
            if seg is not None:
                closed.append(seg)
        return closed

    def finish(self) -> list[SpeechSegment]:
        seg = self._tracker.finish()
        return [seg] if seg is not None else []

    @property
    def in_speech(self) -> bool:
        return self._tracker.in_speech


def detect_segments(model: LinearSvmModel, samples, mfcc_config: MfccConfig | None = None,
                    hysteresis: HysteresisConfig | None = None) -> list[SpeechSegment]:
    """One-shot VAD over a sample array."""
    vad = VoiceActivityDetector(model, mfcc_config, hysteresis)
    return vad.push(samples) + vad.finish()



def read_labeled_features(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a CSV of feature columns with a trailing integer label (+1/-1 or 1/0).

    A non-numeric first row is treated as a header.  Labels of 0 map to -1.
    """
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                if lineno == 1:
                    continue
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: no labeled rows")
    if len({len(r) for r in rows}) != 1 or len(rows[0]) < 2:
        raise ParseError(f"{path}: rows must have equal width with at least one feature")
    data = np.asarray(rows)
    y = data[:, -1]
    if not np.all(np.isin(y, (-1, 0, 1))):
        raise ParseError(f"{path}: labels must be -1/+1 or 0/1")
    return data[:, :-1], np.where(y > 0, 1, -1)


def write_labeled_features(X, y, path) -> None:
    X = np.asarray(X, dtype=float)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"c{i}" for i in range(X.shape[1])] + ["label"])
        for row, label in zip(X, y):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def segments_to_json(segments: Iterable[SpeechSegment]) -> list[dict]:
    return [{"start": s.start, "end": s.end} for s in segments]
