"""Friedman's variable-span smoother on uniformly indexed series.

Reference: J. H. Friedman, "A Variable Span Smoother", SLAC PUB-3477 (1984).
"""
from __future__ import annotations

import warnings

import numpy as np

from .errors import ValidationError

DEFAULT_SPANS = (0.05, 0.2, 0.5)
MIDRANGE_SPAN = 0.2
MIN_WINDOW = 3
MIN_LENGTH = 5


def window_size(span: float, n: int) -> int:
    return int(min(n, max(MIN_WINDOW, round(span * n))))


def _window_starts(n: int, k: int) -> np.ndarray:
    # windows are centred where possible and slid inward at the ends
    return np.clip(np.arange(n) - k // 2, 0, n - k)


def running_lines(y: np.ndarray, k: int, cv: bool = False) -> np.ndarray:
    """Local least-squares line through ``k`` neighbouring points of each sample.

    With ``cv=True`` the leave-one-out residual ``(y - fit) / (1 - h_ii)`` is
    returned instead of the fit.
    """
    n = len(y)
    lo = _window_starts(n, k)
    # windowed sums by direct convolution over the valid positions
    box = np.ones(k)
    ramp = np.arange(k) - (k - 1) / 2.0
    sum_y = np.convolve(y, box, mode="valid")
    sum_ty = np.convolve(y, ramp[::-1], mode="valid")
    sxx = np.sum(ramp * ramp)
    offset = np.arange(n) - lo - (k - 1) / 2.0
    mean = sum_y[lo] / k
    slope = sum_ty[lo] / sxx
    fit = mean + slope * offset
    if not cv:
        return fit
    leverage = 1.0 / k + offset * offset / sxx
    return (y - fit) / (1.0 - leverage)


def supersmooth(series, spans=DEFAULT_SPANS, alpha: float | None = None) -> np.ndarray:
    """Smooth ``series`` with a pointwise cross-validated choice of span.

    Parameters
    ----------
    series : array_like
        Values sampled at unit spacing.
    spans : sequence of float
        Candidate spans as fractions of the series length, each in (0, 1).
    alpha : float, optional
        Bass enhancement in [0, 10]; pulls the chosen span toward the largest.

    Returns
    -------
    numpy.ndarray
        Smoothed values, same length as ``series``.
    """
    y = np.asarray(series, dtype=float)
    spans = np.unique(np.asarray(spans, dtype=float))
    if y.ndim != 1:
        raise ValidationError("supersmooth takes a one-dimensional series")
    if len(spans) == 0 or np.any((spans <= 0) | (spans >= 1)):
        raise ValidationError("spans must be a nonempty list of fractions in (0, 1)")
    n = len(y)
    if n < max(MIN_LENGTH, window_size(spans[0], n)):
        warnings.warn(f"series of length {n} is too short to smooth; returned unchanged")
        return y.copy()

    k_mid = window_size(MIDRANGE_SPAN, n)
    smooths = np.array([running_lines(y, window_size(s, n)) for s in spans])
    resid = np.array([np.abs(running_lines(y, window_size(s, n), cv=True)) for s in spans])
    resid = np.array([running_lines(r, k_mid) for r in resid])

    best = spans[np.argmin(resid, axis=0)]
    if alpha is not None:
        a = float(np.clip(alpha, 0.0, 10.0))
        ratio = np.clip(resid.min(axis=0) / np.maximum(resid[-1], 1e-300), 0.0, 1.0)
        best = best + ratio ** (10.0 - a) * (spans[-1] - best)

    chosen = np.clip(running_lines(best, k_mid), spans[0], spans[-1])
    if len(spans) == 1:
        return smooths[0]
    hi = np.clip(np.searchsorted(spans, chosen, side="left"), 1, len(spans) - 1)
    lo = hi - 1
    frac = (chosen - spans[lo]) / (spans[hi] - spans[lo])
    idx = np.arange(n)
    return (1.0 - frac) * smooths[lo, idx] + frac * smooths[hi, idx]
