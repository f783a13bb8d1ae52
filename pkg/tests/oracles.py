"""Slow, obviously-correct reference implementations used only by the tests.

Nothing here imports from the package under test except plain data types,
so agreement is evidence rather than tautology.
"""

import math

import numpy as np


def naive_power_spectrum(x, n_fft):
    """|X_b|^2 by direct O(N^2) summation over the zero-padded frame."""
    x = np.concatenate([np.asarray(x, dtype=float), np.zeros(n_fft - len(x))])
    n = np.arange(n_fft)
    out = np.empty(n_fft // 2 + 1)
    for b in range(n_fft // 2 + 1):
        ang = -2.0 * np.pi * b * n / n_fft
        re = float(np.sum(x * np.cos(ang)))
        im = float(np.sum(x * np.sin(ang)))
        out[b] = re * re + im * im
    return out


def hamming_window(L):
    return np.array([0.54 - 0.46 * math.cos(2 * math.pi * n / (L - 1)) for n in range(L)])


def mel(f):
    return 2595.0 * math.log10(1.0 + f / 700.0)


def inv_mel(m):
    return 700.0 * (10.0 ** (m / 2595.0) - 1.0)


def triangular_filterbank(sr, n_fft, n_filters, fmin, fmax):
    lo, hi = mel(fmin), mel(fmax)
    edges = [inv_mel(lo + (hi - lo) * i / (n_filters + 1)) for i in range(n_filters + 2)]
    fb = np.zeros((n_filters, n_fft // 2 + 1))
    for m in range(n_filters):
        left, centre, right = edges[m], edges[m + 1], edges[m + 2]
        for b in range(n_fft // 2 + 1):
            f = b * sr / n_fft
            if left < f <= centre:
                fb[m, b] = (f - left) / (centre - left)
            elif centre < f < right:
                fb[m, b] = (right - f) / (right - centre)
    return fb


def direct_dct2(v, n_out):
    """Orthonormal DCT-II by explicit summation."""
    M = len(v)
    out = []
    for k in range(n_out):
        s = sum(v[n] * math.cos(math.pi * k * (2 * n + 1) / (2 * M)) for n in range(M))
        scale = math.sqrt(1.0 / M) if k == 0 else math.sqrt(2.0 / M)
        out.append(scale * s)
    return np.array(out)


def reference_mfcc(frame, sr=16000, n_fft=512, n_filters=26, n_coeffs=13,
                   fmin=50.0, fmax=8000.0, floor=1e-10):
    w = np.asarray(frame, dtype=float) * hamming_window(len(frame))
    p = naive_power_spectrum(w, n_fft)
    fb = triangular_filterbank(sr, n_fft, n_filters, fmin, fmax)
    energies = [max(float(np.sum(fb[m] * p)), floor) for m in range(n_filters)]
    return direct_dct2([math.log(e) for e in energies], n_coeffs)


def dot(a, b):
    total = 0.0
    for x, y in zip(a, b):
        total += x * y
    return total


def least_squares_slope(t, y):
    n = len(t)
    tm = sum(t) / n
    ym = sum(y) / n
    num = sum((ti - tm) * (yi - ym) for ti, yi in zip(t, y))
    den = sum((ti - tm) ** 2 for ti in t)
    return num / den


def sorted_percentile(values, q):
    """Linear interpolation between closest ranks (the usual 'linear' definition)."""
    v = sorted(values)
    pos = (len(v) - 1) * q / 100.0
    lo = math.floor(pos)
    hi = min(lo + 1, len(v) - 1)
    return v[lo] + (v[hi] - v[lo]) * (pos - lo)


def gini(labels):
    n = len(labels)
    if n == 0:
        return 0.0
    p = sum(labels) / n
    return 1.0 - p * p - (1 - p) * (1 - p)


def exhaustive_stump(x, y, min_leaf=1):
    """Best (weighted Gini, threshold) over all midpoints between distinct sorted values."""
    best = (math.inf, None)
    values = sorted(set(x))
    for a, b in zip(values, values[1:]):
        thr = (a + b) / 2
        left = [yi for xi, yi in zip(x, y) if xi <= thr]
        right = [yi for xi, yi in zip(x, y) if xi > thr]
        if len(left) < min_leaf or len(right) < min_leaf:
            continue
        score = (len(left) * gini(left) + len(right) * gini(right)) / len(y)
        if score < best[0] - 1e-15:
            best = (score, thr)
    return best


def recall_balanced_accuracy(pred, truth):
    classes = sorted(set(truth))
    recalls = []
    for c in classes:
        idx = [i for i, t in enumerate(truth) if t == c]
        recalls.append(sum(pred[i] == c for i in idx) / len(idx))
    return sum(recalls) / len(recalls)
