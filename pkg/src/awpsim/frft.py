"""Fractional Fourier transform and its realisation by pump wavefront curvature.

The transform of order ``alpha`` acts on dimensionless coordinates
``u = rho / s`` (position fields) or ``u = s q`` (momentum fields) with kernel

    F_a(u, u') = A_a exp{(i/2)[cot a (u^2 + u'^2) - 2 u u' / sin a]},
    A_a = sqrt((1 - i cot a) / 2 pi)   per transformed axis,

evaluated on the field's own lattice by chirp / chirp-z / chirp factorisation.
Orders with |cot a| > 1 are split as F_{+-pi/2} o F_{a -+ pi/2} so that the
sampled chirps stay below one half turn per cell for well-contained inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sp_fft

from .errors import (
    ContractError,
    CostRefusalError,
    DegenerateOrderError,
    EnvelopeTooNarrowError,
    GeometryInconsistencyError,
    NoRealOrderError,
)
from .field import ComplexField, Domain, GridSpec, IntensityMap, as_momentum, as_position, mirror, normalize

DEGENERATE_TOL = 1e-9
GEOMETRY_TOL = 1e-10
DENSE_MAX_POINTS = 128
PREDICTION_MAX_WORK = 1 << 26


@dataclass(frozen=True)
class FrftParams:
    alpha: float
    s: float

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise ContractError(f"order must be finite, got {self.alpha}")
        if not (math.isfinite(self.s) and self.s > 0):
            raise ContractError(f"scale s must be positive, got {self.s}")


@dataclass(frozen=True)
class FrftGeometry:
    """Lensless geometry: both arms propagate ``z``; pump waist sits ``-Z`` past the crystal."""

    z: float
    Z: float
    K: float
    k: float | None = None

    def __post_init__(self):
        if self.k is None:
            object.__setattr__(self, "k", self.K / 2.0)
        if not self.z > 0:
            raise ContractError(f"crystal-detector distance must be positive, got {self.z}")
        if not self.Z < 0:
            raise ContractError(f"pump must converge at the crystal (Z < 0), got Z={self.Z}")
        if not (self.K > 0 and self.k > 0):
            raise ContractError("wavenumbers must be positive")

    @classmethod
    def for_order(cls, alpha: float, z: float, K: float, k: float | None = None) -> "FrftGeometry":
        """Pump position ``Z`` that produces order ``|alpha|`` at detector distance ``z``."""
        k = K / 2.0 if k is None else k
        c = math.cos(alpha)
        if 1 + c <= 0:
            raise NoRealOrderError(f"alpha={alpha} would need an infinitely distant pump waist")
        # cos a = -(1 + (z/k) / (Z/K))
        Z = -(z / k) * K / (1.0 + c)
        return cls(z=z, Z=Z, K=K, k=k)


# --------------------------------------------------------------------------
# geometry


def _cos_alpha(g: FrftGeometry) -> float:
    return -(1.0 + (g.z / g.k) / (g.Z / g.K))


def alpha_from_geometry(g: FrftGeometry) -> float:
    """|alpha| in [0, pi] from cos alpha = -(2z/Z + 1) (degenerate K = 2k)."""
    c = _cos_alpha(g)
    if abs(c) > 1.0 + 1e-15:
        raise NoRealOrderError(f"|cos alpha| = {abs(c):.6g} > 1: no real fractional order")
    return math.acos(min(1.0, max(-1.0, c)))


def signed_alpha(g: FrftGeometry) -> float:
    """Order on the branch with sin alpha < 0, which keeps s^2 positive for Z < 0."""
    return -alpha_from_geometry(g)


def scale_from_geometry(g: FrftGeometry) -> float:
    """Length ``s`` with s^2 = Z sin(alpha) / K on the signed branch.

    The second scale relation, (z/k + Z/K) / s^2 = -cot(alpha), is checked to
    1e-10.
    """
    a = signed_alpha(g)
    sa = math.sin(a)
    if abs(sa) < DEGENERATE_TOL:
        raise DegenerateOrderError(f"alpha={a:.3g} is a multiple of pi; no finite scale")
    s2 = g.Z * sa / g.K
    lhs = (g.z / g.k + g.Z / g.K) / s2
    rhs = -math.cos(a) / sa
    if abs(lhs - rhs) > GEOMETRY_TOL * max(1.0, abs(rhs)):
        raise GeometryInconsistencyError(
            f"scale relations disagree: {lhs:.15g} vs {rhs:.15g}")
    return math.sqrt(s2)


# --------------------------------------------------------------------------
# kernel evaluation


def _reduce_order(alpha: float) -> float:
    """Map alpha into (-pi, pi]."""
    a = math.remainder(alpha, 2.0 * math.pi)
    return math.pi if a == -math.pi else a


def _prefactor(a: float) -> complex:
    return np.sqrt((1.0 - 1j / math.tan(a)) / (2.0 * math.pi))


def _chirp_z(x: np.ndarray, beta: float, axis: int, n_out: int | None = None) -> np.ndarray:
    """sum_n x_n exp(-i beta n j) for centred n (input length) and centred j
    (``n_out`` points, default the input length) along ``axis``.

    Bluestein: n j = (n^2 + j^2 - (j - n)^2) / 2 turns the sum into a linear
    convolution with exp(i beta t^2 / 2), done by zero-padded FFTs.
    """
    x = np.moveaxis(x, axis, -1)
    N = x.shape[-1]
    M = N if n_out is None else n_out
    n = np.arange(N) - N // 2
    j = np.arange(M) - M // 2
    t = np.arange(j[0] - n[-1], j[-1] - n[0] + 1)
    L = sp_fft.next_fast_len(N + t.size - 1)
    a = sp_fft.fft(x * np.exp(-0.5j * beta * n * n), L, axis=-1)
    a *= sp_fft.fft(np.exp(0.5j * beta * t * t), L)
    conv = sp_fft.ifft(a, axis=-1, overwrite_x=True)
    start = j[0] - n[0] - t[0]
    out = np.exp(-0.5j * beta * j * j) * conv[..., start:start + M]
    return np.moveaxis(out, -1, axis)


def _frft_axis(x: np.ndarray, a: float, h: float, axis: int) -> np.ndarray:
    """One-axis transform of order ``a`` (0 < |a| < pi) on lattice step ``h``."""
    N = x.shape[axis]
    u = (np.arange(N) - N // 2) * h
    shape = [1] * x.ndim
    shape[axis] = N
    chirp = np.exp(0.5j * (math.cos(a) / math.sin(a)) * u * u).reshape(shape)
    y = _chirp_z(x * chirp, h * h / math.sin(a), axis)
    return _prefactor(a) * h * chirp * y


def _frft_axis_split(x: np.ndarray, a: float, h: float, axis: int) -> np.ndarray:
    if abs(math.cos(a)) <= abs(math.sin(a)):
        return _frft_axis(x, a, h, axis)
    # |cot a| > 1: compose with a quarter turn so both factors have |cot| <= 1
    if 0 < a < math.pi / 4:
        first, second = a - math.pi / 2, math.pi / 2
    elif -math.pi / 4 < a < 0:
        first, second = a + math.pi / 2, -math.pi / 2
    elif a > 3 * math.pi / 4:
        first, second = a - math.pi / 2, math.pi / 2
    else:
        first, second = a + math.pi / 2, -math.pi / 2
    return _frft_axis(_frft_axis(x, first, h, axis), second, h, axis)


def lattice_steps(f: ComplexField, s: float) -> list[float]:
    """Dimensionless lattice step along each transformed axis."""
    g = f.grid
    if f.domain is Domain.POSITION:
        steps = [g.dx / s] if g.is_line else [g.dy / s, g.dx / s]
    else:
        steps = [g.dqx * s] if g.is_line else [g.dqy * s, g.dqx * s]
    return steps


def self_dual_scale(grid: GridSpec, domain: Domain = Domain.POSITION) -> float:
    """Scale ``s`` for which the x lattice step is sqrt(2 pi / nx); there the
    quarter-turn transform coincides with the lattice Fourier transform."""
    h = math.sqrt(2.0 * math.pi / grid.nx)
    return grid.dx / h if domain is Domain.POSITION else h / grid.dqx


def frft_apply(f: ComplexField, p: FrftParams, normalize_output: bool = True) -> ComplexField:
    """Fractional transform of order ``p.alpha`` on the field's own lattice.

    alpha = 0 returns the input and alpha = pi its parity image; orders within
    1e-9 of a multiple of pi are refused.
    """
    a = _reduce_order(p.alpha)
    if a == 0.0:
        out = f
    elif a == math.pi:
        out = mirror(f)
    else:
        if abs(a) < DEGENERATE_TOL or math.pi - abs(a) < DEGENERATE_TOL:
            raise DegenerateOrderError(f"order {p.alpha!r} is within 1e-9 of a multiple of pi")
        x = f.samples
        for axis, h in zip(f.grid.axes(), lattice_steps(f, p.s)):
            x = _frft_axis_split(x, a, h, axis)
        out = f.with_samples(x)
    return normalize(out) if normalize_output else out


def frft_kernel_matrix(n: int, h: float, alpha: float) -> np.ndarray:
    """Dense sampled kernel F[m, n] * h for direct quadrature (n <= 128)."""
    if n > DENSE_MAX_POINTS:
        raise ContractError(f"dense kernel limited to {DENSE_MAX_POINTS} points, got {n}")
    a = _reduce_order(alpha)
    if abs(math.sin(a)) < DEGENERATE_TOL:
        raise DegenerateOrderError("dense kernel undefined at multiples of pi")
    u = (np.arange(n) - n // 2) * h
    cot = math.cos(a) / math.sin(a)
    ph = 0.5 * (cot * (u[:, None] ** 2 + u[None, :] ** 2) - 2.0 * np.outer(u, u) / math.sin(a))
    return _prefactor(a) * h * np.exp(1j * ph)


def frft_dense(f: ComplexField, p: FrftParams, normalize_output: bool = True) -> ComplexField:
    """Reference transform by explicit kernel quadrature (no factorisation)."""
    x = f.samples
    for axis, h in zip(f.grid.axes(), lattice_steps(f, p.s)):
        M = frft_kernel_matrix(x.shape[axis], h, p.alpha)
        x = np.moveaxis(np.tensordot(M, np.moveaxis(x, axis, 0), axes=(1, 0)), 0, axis)
    out = f.with_samples(x)
    return normalize(out) if normalize_output else out


# --------------------------------------------------------------------------
# prediction for the seeded idler


def spectral_extent(f: ComplexField, fraction: float = 0.95) -> float:
    """Radius in q holding ``fraction`` of the mode's power."""
    spec = as_momentum(f)
    p = np.abs(spec.samples.ravel()) ** 2
    r = np.sqrt(f.grid.r2(Domain.MOMENTUM).ravel())
    order = np.argsort(r, kind="stable")
    c = np.cumsum(p[order])
    i = int(np.searchsorted(c, fraction * c[-1]))
    return float(r[order][min(i, r.size - 1)])


def _fractional_shift(x: np.ndarray, t: float, axis: int) -> np.ndarray:
    """Band-limited translation by ``t`` cells (samples of the trigonometric
    interpolant at n + t); the unpaired Nyquist bin is treated as a cosine."""
    n = x.shape[axis]
    if t == 0:
        return x
    nu = sp_fft.fftfreq(n)
    ph = np.exp(2j * np.pi * nu * t)
    ph[n // 2] = np.cos(np.pi * t)
    shape = [1] * x.ndim
    shape[axis] = n
    X = sp_fft.fft(sp_fft.ifftshift(x, axes=axis), axis=axis) * ph.reshape(shape)
    return sp_fft.fftshift(sp_fft.ifft(X, axis=axis), axes=axis)


def oversampling_factor(n: int, d: float, alpha: float, s: float) -> int:
    """Input refinement that pushes the periodic images of a sampled input's
    transform (spacing 2 pi s^2 |sin alpha| / d) outside an ``n * d`` window."""
    B = s * s * abs(math.sin(alpha))
    return max(1, math.ceil(n * d * d / (2.0 * math.pi * B) * (1.0 - 1e-12)))


def frft_physical(f: ComplexField, alpha: float, s: float,
                  max_work: int = PREDICTION_MAX_WORK) -> ComplexField:
    """Continuum transform of the band-limited function represented by ``f``'s
    position samples, evaluated back on ``f``'s lattice.

    A plain lattice sum treats the samples as a comb whose transform repeats
    with period 2 pi s^2 |sin alpha| / dx; when that is shorter than the
    window, the quadrature runs on an ``m``-times finer input lattice. The
    fine lattice is never stored: it is split into ``m`` interleaved coarse
    lattices, each a band-limited sub-cell translate of the input, and the
    rectangular chirp-z sums of the pieces are accumulated.
    """
    f = as_position(f)
    a = _reduce_order(alpha)
    if abs(math.sin(a)) < DEGENERATE_TOL:
        raise DegenerateOrderError(f"order {alpha!r} is within 1e-9 of a multiple of pi")
    g = f.grid
    dims = [(1, g.nx, g.dx)] if g.is_line else [(0, g.ny, g.dy), (1, g.nx, g.dx)]
    x = f.samples
    cot, sin = math.cos(a) / math.sin(a), math.sin(a)
    for axis, n, d in dims:
        m = oversampling_factor(n, d, a, s)
        if x.size * m > max_work:
            raise CostRefusalError(
                f"transform needs {m} sub-lattice passes over {x.size} samples "
                f"(work limit {max_work})")
        h_in, h_out = d / (m * s), d / s
        shape = [1] * x.ndim
        shape[axis] = n
        j = (np.arange(n) - n // 2).reshape(shape)
        u_out = j * h_out
        beta = h_in * h_out / sin
        acc = np.zeros(x.shape, complex)
        for r in range(m):
            # fine index p = m * i + r  ->  u = (i + r/m) * m * h_in
            xr = _fractional_shift(x, r / m, axis)
            u_in = (j + r / m) * (m * h_in)
            y = _chirp_z(xr * np.exp(0.5j * cot * u_in ** 2), m * beta, axis)
            acc += y * np.exp(-1j * beta * r * j)
        x = _prefactor(a) * h_in * np.exp(0.5j * cot * u_out ** 2) * acc
    return f.with_samples(x)


def frft_prediction(phi, g: FrftGeometry, pump_waist: float | None = None,
                    envelope_ratio: float = 10.0) -> IntensityMap:
    """Predicted seeded idler intensity |Psi_phi(rho_2)|^2 for a lensless
    curved-pump geometry, unit power, on the mode's own lattice.

    The conjugate mode (position representation of phi*(q)) is transformed
    with the signed order and the geometry's scale. If ``pump_waist`` is
    given, the pump spectral envelope (1/e half width 2/w) must exceed
    ``envelope_ratio`` times the mode's 95% spectral radius.
    """
    mode = phi.mode if hasattr(phi, "mode") else phi
    if pump_waist is not None:
        env = 2.0 / pump_waist
        ext = spectral_extent(mode)
        if env < envelope_ratio * ext:
            raise EnvelopeTooNarrowError(
                f"pump spectral envelope {env:.4g} 1/m is below {envelope_ratio:g} x "
                f"mode extent {ext:.4g} 1/m")
    conj_mode = mirror(as_position(mode).conj())    # position rep. of phi*(q)
    if _cos_alpha(g) == 1.0:
        out = conj_mode
    else:
        out = frft_physical(conj_mode, signed_alpha(g), scale_from_geometry(g))
    return IntensityMap.of(out).unit_power()
