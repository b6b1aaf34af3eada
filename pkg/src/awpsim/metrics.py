"""Scalar figures of merit for intensity maps and profiles."""

from __future__ import annotations

import numpy as np
from scipy.ndimage import maximum_filter1d, median_filter, minimum_filter1d
from scipy.signal import find_peaks

from .errors import ContractError
from .field import GridSpec, IntensityMap


def _values(I) -> np.ndarray:
    return np.asarray(I.values if isinstance(I, IntensityMap) else I, dtype=float)


def second_moment_width(I: IntensityMap) -> tuple[float, float]:
    """Spot width 2 * sqrt(second central moment) along x and y (meters).

    The y width of a line grid is reported as 0.
    """
    v = _values(I)
    g = I.grid
    tot = v.sum()
    if not tot > 0:
        raise ContractError("width of a dark map is undefined")
    px = v.sum(axis=0) / tot
    x = g.x()
    mx = np.dot(px, x)
    wx = 2.0 * np.sqrt(np.dot(px, (x - mx) ** 2))
    if g.is_line:
        return float(wx), 0.0
    py = v.sum(axis=1) / tot
    y = g.y()
    my = np.dot(py, y)
    wy = 2.0 * np.sqrt(np.dot(py, (y - my) ** 2))
    return float(wx), float(wy)


def fwhm(profile: np.ndarray, dx: float = 1.0) -> float:
    """Full width at half maximum, with linearly interpolated crossings.

    Measured between the outermost half-maximum crossings, so a multi-peaked
    profile reports its overall extent.
    """
    p = np.asarray(profile, dtype=float)
    peak = p.max()
    if not peak > 0:
        raise ContractError("FWHM of a dark profile is undefined")
    half = 0.5 * peak
    above = np.nonzero(p >= half)[0]
    i0, i1 = above[0], above[-1]
    left = float(i0)
    if i0 > 0:
        left = i0 - (p[i0] - half) / (p[i0] - p[i0 - 1])
    right = float(i1)
    if i1 < p.size - 1:
        right = i1 + (p[i1] - half) / (p[i1] - p[i1 + 1])
    return (right - left) * dx


def fringe_visibility(profile: np.ndarray, period_cells: float,
                      power_fraction: float = 0.95) -> float:
    """Intensity-weighted fringe visibility of a 1D profile.

    The profile is median-smoothed over 3 cells. ``I_max`` and ``I_min`` are
    the running maximum and minimum over one expected fringe period (at least
    3 cells), and the local visibility (I_max - I_min) / (I_max + I_min) is
    averaged with the intensity as weight over the central span holding
    ``power_fraction`` of the power. Features much wider than a period (such
    as the dark gap between two separated images) therefore do not register
    as fringes.
    """
    p = np.asarray(profile, dtype=float)
    if p.ndim != 1:
        raise ContractError("fringe visibility expects a 1D profile")
    if not period_cells >= 0:
        raise ContractError(f"period must be non-negative, got {period_cells}")
    m = median_filter(p, size=3, mode="nearest")
    c = np.cumsum(m)
    if not c[-1] > 0:
        raise ContractError("visibility of a dark profile is undefined")
    win = max(3, int(round(period_cells)) | 1)
    hi = maximum_filter1d(m, win, mode="nearest")
    lo = minimum_filter1d(m, win, mode="nearest")
    s = hi + lo
    local = np.divide(hi - lo, s, out=np.zeros_like(s), where=s > 0)
    tail = 0.5 * (1.0 - power_fraction) * c[-1]
    i0 = int(np.searchsorted(c, tail))
    i1 = int(np.searchsorted(c, c[-1] - tail)) + 1
    w = m[i0:i1]
    return float(np.clip(np.sum(w * local[i0:i1]) / np.sum(w), 0.0, 1.0))


def normalized_cross_correlation(a, b) -> float:
    """Pearson correlation of two maps (mean-removed, unit-variance), in [-1, 1]."""
    x = _values(a).ravel()
    y = _values(b).ravel()
    if x.shape != y.shape:
        raise ContractError(f"shape mismatch {x.shape} vs {y.shape}")
    x = x - x.mean()
    y = y - y.mean()
    den = np.linalg.norm(x) * np.linalg.norm(y)
    if den == 0:
        raise ContractError("correlation with a constant map is undefined")
    return float(np.clip(np.dot(x, y) / den, -1.0, 1.0))


def relative_std(values: np.ndarray, window_fraction: float = 0.8,
                 grid: GridSpec | None = None) -> float:
    """std / mean over the central ``window_fraction`` of each transverse axis."""
    v = np.asarray(values, dtype=float)
    sl = []
    for ax, n in enumerate(v.shape):
        if n == 1:
            sl.append(slice(None))
            continue
        m = int(round(n * (1 - window_fraction) / 2))
        sl.append(slice(m, n - m))
    w = v[tuple(sl)]
    return float(np.std(w) / np.mean(w))


def peak_positions(profile: np.ndarray, count: int = 2) -> np.ndarray:
    """Indices of the ``count`` most prominent maxima, sorted by position."""
    p = np.asarray(profile, dtype=float)
    idx, props = find_peaks(np.concatenate(([-np.inf], p, [-np.inf])), prominence=0)
    idx = idx - 1
    order = np.argsort(props["prominences"])[::-1][:count]
    return np.sort(idx[order])
