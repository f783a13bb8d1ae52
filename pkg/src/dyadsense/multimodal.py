"""Session-level physiological, movement and acoustic features plus valence/arousal classifiers."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import ModelError, ParseError, SchemaError, TrainingError
from .vad import (
    LinearSvmModel,
    SpeechSegment,
    decision_score,
    model_from_dict,
    model_to_dict,
    train_linear_svm,
)

HR_MIN_BPM = 20.0
HR_MAX_BPM = 250.0

VALENCE = "valence"
AROUSAL = "arousal"
AXIS_LABELS = {VALENCE: ("negative", "positive"), AROUSAL: ("low", "high")}
MODALITIES = ("physio", "movement", "acoustic")
ABSENT = "NA"


@dataclass(frozen=True)
class EmotionLabel:
    valence: str
    arousal: str

    def __post_init__(self):
        if self.valence not in AXIS_LABELS[VALENCE]:
            raise ValueError(f"valence must be one of {AXIS_LABELS[VALENCE]}, got {self.valence!r}")
        if self.arousal not in AXIS_LABELS[AROUSAL]:
            raise ValueError(f"arousal must be one of {AXIS_LABELS[AROUSAL]}, got {self.arousal!r}")

    def binary(self, axis: str) -> int:
        value = getattr(self, axis)
        return AXIS_LABELS[axis].index(value)


@dataclass
class FeatureSet:
    """Named features per modality; ``None`` marks an absent modality."""

    session_id: str
    physio: Optional[dict] = None
    movement: Optional[dict] = None
    acoustic: Optional[dict] = None
    imputed: tuple = ()

    def modality(self, name: str) -> Optional[dict]:
        return getattr(self, name)

    def absent(self) -> list[str]:
        return [m for m in MODALITIES if self.modality(m) is None]

    def names(self) -> list[str]:
        out = []
        for m in MODALITIES:
            feats = self.modality(m)
            if feats is not None:
                out += [f"{m}.{k}" for k in feats]
        return out

    def values(self) -> dict:
        out = {}
        for m in MODALITIES:
            feats = self.modality(m)
            if feats is not None:
                out.update({f"{m}.{k}": float(v) for k, v in feats.items()})
        return out

    def vector(self, names: Sequence[str]) -> np.ndarray:
        vals = self.values()
        missing = [n for n in names if n not in vals]
        if missing:
            absent = sorted({n.split(".", 1)[0] for n in missing})
            raise SchemaError(
                f"session {self.session_id}: missing features {missing[:3]}"
                f"{'...' if len(missing) > 3 else ''} (absent modality: {', '.join(absent)})"
            )
        return np.array([vals[n] for n in names], dtype=np.float64)


# ---- extractors ---------------------------------------------------------------

def _slope(t: np.ndarray, y: np.ndarray) -> float:
    tc = t - t.mean()
    denom = float(tc @ tc)
    if denom == 0.0:
        return 0.0
    return float(tc @ (y - y.mean())) / denom


def physio_features(hr) -> dict:
    """mean, sd, min, max and least-squares slope (bpm/s) of a heart-rate series.

    ``hr`` is a sequence of ``(timestamp, bpm)`` pairs.  Readings outside
    (20, 250) bpm are dropped before computing anything.
    """
    arr = np.asarray(hr, dtype=np.float64).reshape(-1, 2)
    t, bpm = arr[:, 0], arr[:, 1]
    if np.any(np.diff(t) <= 0):
        raise ValueError("heart-rate timestamps must be strictly increasing")
    keep = (bpm > HR_MIN_BPM) & (bpm < HR_MAX_BPM) & np.isfinite(bpm)
    t, bpm = t[keep], bpm[keep]
    if len(bpm) < 2:
        raise ValueError("need at least two valid heart-rate samples")
    return {
        "hr_mean": float(bpm.mean()),
        "hr_sd": float(bpm.std()),
        "hr_min": float(bpm.min()),
        "hr_max": float(bpm.max()),
        "hr_slope": _slope(t, bpm),
    }


def zero_crossing_rate(x: np.ndarray) -> float:
    """Fraction of adjacent pairs with strictly opposite signs."""
    x = np.asarray(x, dtype=np.float64)
    if len(x) < 2:
        return 0.0
    return float(np.count_nonzero(x[:-1] * x[1:] < 0)) / (len(x) - 1)


def movement_features(imu) -> dict:
    """Per-axis mean/sd plus magnitude mean, sd and zero-crossing rate.

    ``imu`` rows are ``(timestamp, ax, ay, az, gx, gy, gz)``.  The
    zero-crossing rate is taken on the mean-removed magnitude.
    """
    arr = np.asarray(imu, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 7:
        raise ValueError(f"IMU samples must have 7 columns, got shape {arr.shape}")
    if len(arr) < 2:
        raise ValueError("need at least two IMU samples")
    if not np.isfinite(arr).all():
        raise ValueError("IMU samples must be finite")
    if np.any(np.diff(arr[:, 0]) <= 0):
        raise ValueError("IMU timestamps must be strictly increasing")
    out = {}
    for prefix, cols in (("acc", slice(1, 4)), ("gyr", slice(4, 7))):
        block = arr[:, cols]
        for axis, col in zip("xyz", block.T):
            out[f"{prefix}_{axis}_mean"] = float(col.mean())
            out[f"{prefix}_{axis}_sd"] = float(col.std())
        mag = np.sqrt((block**2).sum(axis=1))
        out[f"{prefix}_mag_mean"] = float(mag.mean())
        out[f"{prefix}_mag_sd"] = float(mag.std())
        out[f"{prefix}_mag_zcr"] = zero_crossing_rate(mag - mag.mean())
    return out


@dataclass(frozen=True)
class AcousticFunctionals:
    functionals: Optional[dict]
    speech_ratio: float

    def as_features(self) -> Optional[dict]:
        if self.functionals is None:
            return None
        return {**self.functionals, "speech_ratio": self.speech_ratio}


def _in_segments(times: np.ndarray, segments: Sequence[SpeechSegment]) -> np.ndarray:
    mask = np.zeros(len(times), dtype=bool)
    for seg in segments:
        mask |= (times >= seg.start) & (times < seg.end)
    return mask


def acoustic_features(mfcc_stream: Sequence, speech_segments: Sequence[SpeechSegment]) -> AcousticFunctionals:
    """Per-coefficient mean, sd, 10th and 90th percentile over speech frames.

    A frame counts as speech when its timestamp falls in ``[start, end)`` of
    some segment.  Percentiles interpolate linearly between order statistics.
    """
    if len(mfcc_stream) == 0:
        return AcousticFunctionals(None, 0.0)
    X = np.array([fv.values for fv in mfcc_stream], dtype=np.float64)
    times = np.array([fv.timestamp for fv in mfcc_stream], dtype=np.float64)
    mask = _in_segments(times, speech_segments)
    ratio = float(mask.sum()) / len(mask)
    if not mask.any():
        return AcousticFunctionals(None, 0.0)
    S = X[mask]
    p10, p90 = np.percentile(S, [10, 90], axis=0)
    feats = {}
    for i in range(S.shape[1]):
        feats[f"mfcc{i}_mean"] = float(S[:, i].mean())
        feats[f"mfcc{i}_sd"] = float(S[:, i].std())
        feats[f"mfcc{i}_p10"] = float(p10[i])
        feats[f"mfcc{i}_p90"] = float(p90[i])
    return AcousticFunctionals(feats, ratio)


def build_feature_set(session_id: str, hr=None, imu=None, mfcc_stream=None,
                      speech_segments=()) -> FeatureSet:
    """Assemble a FeatureSet; a modality without usable input is left absent."""
    physio = physio_features(hr) if hr is not None and len(hr) >= 2 else None
    movement = movement_features(imu) if imu is not None and len(imu) >= 2 else None
    acoustic = None
    if mfcc_stream is not None:
        acoustic = acoustic_features(mfcc_stream, speech_segments).as_features()
    return FeatureSet(session_id, physio, movement, acoustic)


def impute_means(fs: FeatureSet, means: Mapping[str, float]) -> FeatureSet:
    """Fill absent modalities with training means, recording which were filled."""
    filled = dict(physio=fs.physio, movement=fs.movement, acoustic=fs.acoustic)
    imputed = list(fs.imputed)
    for m in fs.absent():
        keys = {n.split(".", 1)[1]: v for n, v in means.items() if n.startswith(m + ".")}
        if not keys:
            raise SchemaError(f"no means available to impute modality {m!r}")
        filled[m] = keys
        imputed.append(m)
    return replace(fs, imputed=tuple(imputed), **filled)


def peak_end_select(segment_scores: Sequence[float]) -> tuple[int, int, int]:
    """Indices of the most positive, most negative and last segment (earliest on ties)."""
    scores = np.asarray(segment_scores, dtype=np.float64)
    if scores.ndim != 1 or len(scores) == 0:
        raise ValueError("need at least one segment score")
    return int(np.argmax(scores)), int(np.argmin(scores)), len(scores) - 1


def balanced_accuracy(predictions, labels) -> float:
    """Mean of per-class recall over the classes present in ``labels``."""
    pred = np.asarray(predictions)
    true = np.asarray(labels)
    if pred.shape != true.shape or len(true) == 0:
        raise ValueError("predictions and labels must be non-empty and equally long")
    recalls = [float(np.mean(pred[true == c] == c)) for c in np.unique(true)]
    return float(np.mean(recalls))


# ---- random forest -------------------------------------------------------------

@dataclass
class DecisionTree:
    """Flat binary tree.  Leaves have ``feature == -1``; ``value`` is P(class 1)."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def leaf_index(self, x: np.ndarray) -> int:
        node = 0
        while self.feature[node] >= 0:
            node = self.left[node] if x[self.feature[node]] <= self.threshold[node] else self.right[node]
        return node

    def predict_proba(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return np.array([self.value[self.leaf_index(x)] for x in X])

    def predict(self, X) -> np.ndarray:
        # leaf tie -> class 0
        return (self.predict_proba(X) > 0.5).astype(int)

    @property
    def depth(self) -> int:
        def walk(node):
            if self.feature[node] < 0:
                return 0
            return 1 + max(walk(self.left[node]), walk(self.right[node]))
        return walk(0)

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": [float(v) for v in self.threshold],
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": [float(v) for v in self.value],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTree":
        return cls(
            np.array(d["feature"], dtype=int),
            np.array(d["threshold"], dtype=np.float64),
            np.array(d["left"], dtype=int),
            np.array(d["right"], dtype=int),
            np.array(d["value"], dtype=np.float64),
        )


def best_gini_split(x: np.ndarray, y: np.ndarray, min_leaf: int = 1):
    """Best threshold on one feature by weighted Gini impurity.

    Returns ``(impurity, threshold)`` or ``None`` when no valid split exists.
    Thresholds are midpoints between distinct sorted values; ties resolve
    to the lowest threshold.
    """
    n = len(x)
    if n < 2 * min_leaf:
        return None
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    n_left = np.arange(1, n)
    pos_left = np.cumsum(ys)[:-1]
    pos_total = ys.sum()
    n_right = n - n_left
    pos_right = pos_total - pos_left
    p_l = pos_left / n_left
    p_r = pos_right / n_right
    gini_l = 2.0 * p_l * (1.0 - p_l)
    gini_r = 2.0 * p_r * (1.0 - p_r)
    impurity = (n_left * gini_l + n_right * gini_r) / n
    valid = (xs[1:] > xs[:-1]) & (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return None
    impurity = np.where(valid, impurity, np.inf)
    i = int(np.argmin(impurity))
    return float(impurity[i]), float(0.5 * (xs[i] + xs[i + 1]))


def _resolve_max_features(subsample, d: int) -> int:
    if subsample is None:
        return d
    if subsample == "sqrt":
        return max(1, int(math.sqrt(d)))
    if isinstance(subsample, float) and 0 < subsample <= 1:
        return max(1, int(subsample * d))
    k = int(subsample)
    if not 1 <= k <= d:
        raise ValueError(f"feature_subsample {subsample} out of range for {d} features")
    return k


def train_cart(X, y, max_depth: int = 8, min_leaf: int = 2, max_features=None,
               rng: np.random.Generator | None = None) -> DecisionTree:
    """Grow a Gini CART tree.  Nodes split while impure, above ``max_depth``
    and when a split leaving ``min_leaf`` samples per side exists."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    d = X.shape[1]
    k = _resolve_max_features(max_features, d)
    rng = rng or np.random.default_rng(0)
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(y[idx].mean()))
        return len(feature) - 1

    stack = [(new_node(np.arange(len(y))), np.arange(len(y)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        p = value[node]
        if depth >= max_depth or p == 0.0 or p == 1.0:
            continue
        cands = rng.permutation(d)[:k] if k < d else np.arange(d)
        best = None
        for f in cands:
            found = best_gini_split(X[idx, f], y[idx], min_leaf)
            if found is not None and (best is None or found[0] < best[0]):
                best = (found[0], found[1], int(f))
        if best is None:
            continue
        _, thr, f = best
        go_left = X[idx, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        feature[node], threshold[node] = f, thr
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))

    return DecisionTree(np.array(feature), np.array(threshold), np.array(left),
                        np.array(right), np.array(value))


@dataclass
class RandomForestModel:
    trees: list
    max_depth: int
    seed: int
    feature_names: list = field(default_factory=list)
    axis: Optional[str] = None
    metadata: dict = field(default_factory=dict)

    @property
    def num_trees(self) -> int:
        return len(self.trees)

    def votes(self, X) -> np.ndarray:
        """(n, num_trees) matrix of per-tree class votes."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return np.stack([t.predict(X) for t in self.trees], axis=1)

    def vote_fraction(self, X) -> np.ndarray:
        return self.votes(X).mean(axis=1)

    def predict(self, X) -> np.ndarray:
        # vote tie -> class 0
        return (self.vote_fraction(X) > 0.5).astype(int)

    def to_dict(self) -> dict:
        return {
            "type": "random_forest",
            "max_depth": self.max_depth,
            "seed": self.seed,
            "feature_names": list(self.feature_names),
            "axis": self.axis,
            "metadata": self.metadata,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RandomForestModel":
        return cls([DecisionTree.from_dict(t) for t in d["trees"]], int(d["max_depth"]),
                   int(d["seed"]), list(d.get("feature_names", [])), d.get("axis"),
                   dict(d.get("metadata", {})))


def _binary_labels(y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64).ravel()
    if not np.isin(y, (-1.0, 0.0, 1.0)).all():
        raise TrainingError("labels must be binary (0/1 or -1/+1)")
    return (y > 0).astype(np.float64)


def train_random_forest(X, y, num_trees: int = 100, max_depth: int = 8, min_leaf: int = 2,
                        feature_subsample="sqrt", seed: int = 42, bootstrap: bool = True,
                        feature_names: Sequence[str] = (), axis: Optional[str] = None) -> RandomForestModel:
    """Bagged Gini CART trees; tree ``i`` draws from ``default_rng(seed + i)``."""
    X = np.asarray(X, dtype=np.float64)
    yb = _binary_labels(y)
    if X.ndim != 2 or len(X) != len(yb) or len(X) == 0:
        raise TrainingError(f"need non-empty (n, d) features with n labels, got {X.shape}")
    if len(np.unique(yb)) < 2:
        raise TrainingError("training data contains a single class")
    if num_trees < 1 or max_depth < 0 or min_leaf < 1:
        raise TrainingError("num_trees >= 1, max_depth >= 0 and min_leaf >= 1 required")
    n = len(X)
    trees = []
    for i in range(num_trees):
        rng = np.random.default_rng(seed + i)
        idx = rng.integers(0, n, n) if bootstrap else np.arange(n)
        trees.append(train_cart(X[idx], yb[idx], max_depth, min_leaf, feature_subsample, rng))
    return RandomForestModel(
        trees, max_depth, seed, list(feature_names), axis,
        {"num_trees": num_trees, "min_leaf": min_leaf,
         "feature_subsample": feature_subsample, "bootstrap": bootstrap},
    )


# ---- emotion classification ------------------------------------------------------

def design_matrix(feature_sets: Sequence[FeatureSet], names: Optional[Sequence[str]] = None):
    """Stack feature sets into a matrix using ``names`` (default: the first set's schema)."""
    if not feature_sets:
        raise TrainingError("no feature sets given")
    names = list(names) if names is not None else feature_sets[0].names()
    X = np.array([fs.vector(names) for fs in feature_sets])
    return X, names


def train_emotion_svm(feature_sets, labels, axis: str, lam: float = 1e-3, epochs: int = 50,
                      seed: int = 42, names=None) -> LinearSvmModel:
    X, names = design_matrix(feature_sets, names)
    y = np.where(_binary_labels(labels) > 0, 1.0, -1.0)
    model = train_linear_svm(X, y, lam=lam, epochs=epochs, seed=seed)
    return LinearSvmModel(model.weights, model.bias, model.feature_mean, model.feature_std,
                          {**model.metadata, "feature_names": names, "axis": axis})


def train_emotion_forest(feature_sets, labels, axis: str, names=None, **hyper) -> RandomForestModel:
    X, names = design_matrix(feature_sets, names)
    return train_random_forest(X, labels, feature_names=names, axis=axis, **hyper)


def _model_schema(model):
    if isinstance(model, RandomForestModel):
        return model.feature_names, model.axis
    if isinstance(model, LinearSvmModel):
        return model.metadata.get("feature_names"), model.metadata.get("axis")
    raise ModelError(f"unsupported model type {type(model).__name__}")


def classify_emotion(model, features: FeatureSet, axis: str) -> tuple[str, float]:
    """Label one session on ``axis``.

    SVM: label is the positive pole iff the decision score is > 0, score is
    the decision score.  Forest: positive pole iff more than half of the
    trees vote for it, score is the positive-vote fraction.

    Raises:
        SchemaError: absent modality, feature names differing from the
            model's, or a model trained for the other axis.
    """
    if axis not in AXIS_LABELS:
        raise ValueError(f"axis must be 'valence' or 'arousal', got {axis!r}")
    names, model_axis = _model_schema(model)
    if model_axis is not None and model_axis != axis:
        raise SchemaError(f"model was trained for {model_axis}, not {axis}")
    if features.absent():
        raise SchemaError(
            f"session {features.session_id}: absent modality {', '.join(features.absent())}"
        )
    if names is None:
        raise SchemaError("model carries no feature schema")
    if list(names) != features.names():
        raise SchemaError(f"session {features.session_id}: feature schema differs from model")
    x = features.vector(names)
    neg, pos = AXIS_LABELS[axis]
    if isinstance(model, LinearSvmModel):
        score = decision_score(model, x)
        return (pos if score > 0 else neg), score
    frac = float(model.vote_fraction(x[None, :])[0])
    return (pos if frac > 0.5 else neg), frac


# ---- serialization ------------------------------------------------------------------

def write_feature_csv(feature_sets: Sequence[FeatureSet], path, names=None) -> list[str]:
    """One row per session; absent modalities are written as ``NA``."""
    if names is None:
        names = []
        for fs in feature_sets:
            for n in fs.names():
                if n not in names:
                    names.append(n)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["session_id", *names])
        for fs in feature_sets:
            vals = fs.values()
            w.writerow([fs.session_id, *(repr(vals[n]) if n in vals else ABSENT for n in names)])
    return list(names)


def read_feature_csv(path) -> list[FeatureSet]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:1] != ["session_id"]:
        raise ParseError(f"{path}: header must start with session_id")
    header = rows[0][1:]
    for n in header:
        if n.split(".", 1)[0] not in MODALITIES or "." not in n:
            raise ParseError(f"{path}: feature column {n!r} lacks a modality prefix")
    out = []
    for lineno, row in enumerate(rows[1:], 2):
        if len(row) != len(header) + 1:
            raise ParseError(f"{path}:{lineno}: expected {len(header) + 1} fields, got {len(row)}")
        groups: dict = {m: {} for m in MODALITIES}
        absent = set()
        for n, cell in zip(header, row[1:]):
            m, key = n.split(".", 1)
            if cell == ABSENT:
                absent.add(m)
                continue
            try:
                groups[m][key] = float(cell)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: field {n!r}: {cell!r} is not a number") from exc
        kw = {m: (None if m in absent or not groups[m] else groups[m]) for m in MODALITIES}
        out.append(FeatureSet(row[0], **kw))
    return out


def read_labels_csv(path) -> dict[str, EmotionLabel]:
    labels = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"session_id", VALENCE, AROUSAL} - set(reader.fieldnames or ())
        if missing:
            raise ParseError(f"{path}: missing columns {sorted(missing)}")
        for lineno, row in enumerate(reader, 2):
            try:
                labels[row["session_id"]] = EmotionLabel(
                    _label_value(row[VALENCE], VALENCE), _label_value(row[AROUSAL], AROUSAL))
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    return labels


def _label_value(cell: str, axis: str) -> str:
    cell = cell.strip()
    if cell in ("0", "1"):
        return AXIS_LABELS[axis][int(cell)]
    return cell


def write_labels_csv(labels: Mapping[str, EmotionLabel], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["session_id", VALENCE, AROUSAL])
        for sid, lab in labels.items():
            w.writerow([sid, lab.valence, lab.arousal])


def save_emotion_model(model, path) -> None:
    if isinstance(model, RandomForestModel):
        obj = model.to_dict()
    else:
        obj = {"type": "linear_svm", **model_to_dict(model)}
    Path(path).write_text(json.dumps(obj) + "\n")


def load_emotion_model(path):
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    kind = obj.pop("type", "linear_svm")
    if kind == "random_forest":
        try:
            return RandomForestModel.from_dict(obj)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{path}: malformed forest ({exc})") from exc
    if kind == "linear_svm":
        return model_from_dict(obj, str(path))
    raise ParseError(f"{path}: unknown model type {kind!r}")


def predict_axis(model, feature_sets: Iterable[FeatureSet], axis: str) -> list[int]:
    pos = AXIS_LABELS[axis][1]
    return [int(classify_emotion(model, fs, axis)[0] == pos) for fs in feature_sets]


def align_labels(feature_sets: Sequence[FeatureSet], labels: Mapping[str, EmotionLabel],
                 axis: str) -> np.ndarray:
    """Binary targets for ``axis`` in the order of ``feature_sets``."""
    missing = [fs.session_id for fs in feature_sets if fs.session_id not in labels]
    if missing:
        raise ParseError(f"no label for sessions {missing[:5]}")
    return np.array([labels[fs.session_id].binary(axis) for fs in feature_sets])


def evaluate_emotion(model, feature_sets: Sequence[FeatureSet],
                     labels: Mapping[str, EmotionLabel], axis: str) -> dict:
    truth = align_labels(feature_sets, labels, axis)
    pred = np.array(predict_axis(model, feature_sets, axis))
    return {"axis": axis, "sessions": len(truth),
            "balanced_accuracy": balanced_accuracy(pred, truth),
            "accuracy": float(np.mean(pred == truth))}
