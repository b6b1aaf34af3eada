"""Sampled complex fields and the angular-spectrum transform pair.

Conventions
-----------
* Samples are stored as ``samples[iy, ix]`` (rows are y), matching image layout.
* Grids are centred: index ``n // 2`` along each axis is the origin, so the
  coordinate of index ``i`` is ``(i - n // 2) * d``. Momentum lattices use the
  same centring with spacing ``2 pi / (n d)``.
* Forward transform ``phi(q) = (1/2pi) \\int E(rho) exp(-i q.rho) d^2 rho``.
  Each transformed axis contributes a factor ``1/sqrt(2 pi)``, so a line grid
  (``ny == 1``) uses ``1/sqrt(2 pi)`` and the pair stays unitary.
* A discrete delta has value ``1 / cell_area``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import fft as sp_fft

from .errors import ContractError

SQRT_2PI = math.sqrt(2.0 * math.pi)


class Domain(enum.Enum):
    POSITION = "position"
    MOMENTUM = "momentum"


@dataclass(frozen=True)
class GridSpec:
    """Uniform centred sampling lattice.

    ``ny == 1`` declares a line grid: the field is treated as one-dimensional
    along x and the y axis is never transformed.
    """

    nx: int
    ny: int
    dx: float
    dy: float = 1.0

    def __post_init__(self):
        for name, n in (("nx", self.nx), ("ny", self.ny)):
            if not isinstance(n, (int, np.integer)):
                raise ContractError(f"{name} must be an integer, got {n!r}")
        if self.nx < 8 or self.nx % 2:
            raise ContractError(f"nx must be even and >= 8, got {self.nx}")
        if self.ny != 1 and (self.ny < 8 or self.ny % 2):
            raise ContractError(f"ny must be 1 or even and >= 8, got {self.ny}")
        for name, d in (("dx", self.dx), ("dy", self.dy)):
            if not (math.isfinite(d) and d > 0):
                raise ContractError(f"{name} must be positive and finite, got {d}")

    @classmethod
    def line(cls, n: int, dx: float) -> "GridSpec":
        return cls(nx=n, ny=1, dx=dx, dy=1.0)

    @classmethod
    def square(cls, n: int, dx: float) -> "GridSpec":
        return cls(nx=n, ny=n, dx=dx, dy=dx)

    @property
    def is_line(self) -> bool:
        return self.ny == 1

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @property
    def dqx(self) -> float:
        return 2.0 * math.pi / (self.nx * self.dx)

    @property
    def dqy(self) -> float:
        return 0.0 if self.is_line else 2.0 * math.pi / (self.ny * self.dy)

    def cell_area(self, domain: Domain) -> float:
        if domain is Domain.POSITION:
            return self.dx if self.is_line else self.dx * self.dy
        return self.dqx if self.is_line else self.dqx * self.dqy

    def x(self) -> np.ndarray:
        return (np.arange(self.nx) - self.nx // 2) * self.dx

    def y(self) -> np.ndarray:
        if self.is_line:
            return np.zeros(1)
        return (np.arange(self.ny) - self.ny // 2) * self.dy

    def qx(self) -> np.ndarray:
        return (np.arange(self.nx) - self.nx // 2) * self.dqx

    def qy(self) -> np.ndarray:
        if self.is_line:
            return np.zeros(1)
        return (np.arange(self.ny) - self.ny // 2) * self.dqy

    def coords(self, domain: Domain = Domain.POSITION) -> tuple[np.ndarray, np.ndarray]:
        """Broadcastable ``(X, Y)`` (or ``(QX, QY)``) arrays of shape (ny, nx)."""
        if domain is Domain.POSITION:
            gx, gy = self.x(), self.y()
        else:
            gx, gy = self.qx(), self.qy()
        return np.meshgrid(gx, gy, indexing="xy")

    def r2(self, domain: Domain = Domain.POSITION) -> np.ndarray:
        a, b = self.coords(domain)
        return a * a + b * b

    def axes(self) -> tuple[int, ...]:
        """Array axes that carry a transverse coordinate."""
        return (1,) if self.is_line else (0, 1)


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex amplitude sampled on a grid, tagged with its domain and wavenumber."""

    grid: GridSpec
    domain: Domain
    samples: np.ndarray
    k: float = 1.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.complex128)
        if s.shape != self.grid.shape:
            raise ContractError(
                f"samples shape {s.shape} does not match grid shape {self.grid.shape}")
        if not np.all(np.isfinite(s)):
            raise ContractError("field samples must be finite")
        if not (math.isfinite(self.k) and self.k > 0):
            raise ContractError(f"wavenumber must be positive, got {self.k}")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @classmethod
    def zeros(cls, grid: GridSpec, domain: Domain = Domain.POSITION, k: float = 1.0):
        return cls(grid, domain, np.zeros(grid.shape, complex), k)

    @classmethod
    def from_function(cls, grid: GridSpec, fn, k: float = 1.0,
                      domain: Domain = Domain.POSITION) -> "ComplexField":
        """Sample ``fn(x, y)`` (or ``fn(qx, qy)``) on the lattice."""
        a, b = grid.coords(domain)
        return cls(grid, domain, np.broadcast_to(fn(a, b), grid.shape), k)

    @classmethod
    def delta(cls, grid: GridSpec, ix: int = 0, iy: int = 0, k: float = 1.0) -> "ComplexField":
        """Discrete delta at integer cell offset (ix, iy) from the origin."""
        s = np.zeros(grid.shape, complex)
        row = 0 if grid.is_line else (grid.ny // 2 + iy) % grid.ny
        s[row, (grid.nx // 2 + ix) % grid.nx] = 1.0 / grid.cell_area(Domain.POSITION)
        return cls(grid, Domain.POSITION, s, k)

    def with_samples(self, samples: np.ndarray, domain: Domain | None = None) -> "ComplexField":
        return ComplexField(self.grid, domain or self.domain, samples, self.k)

    def with_k(self, k: float) -> "ComplexField":
        return replace(self, k=k)

    def conj(self) -> "ComplexField":
        """Samplewise complex conjugate in the field's own domain."""
        return self.with_samples(np.conj(self.samples))

    def intensity(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    def __add__(self, other: "ComplexField") -> "ComplexField":
        _require_compatible(self, other)
        return self.with_samples(self.samples + other.samples)

    def __sub__(self, other: "ComplexField") -> "ComplexField":
        _require_compatible(self, other)
        return self.with_samples(self.samples - other.samples)

    def __mul__(self, a) -> "ComplexField":
        if isinstance(a, ComplexField):
            _require_compatible(self, a)
            return self.with_samples(self.samples * a.samples)
        return self.with_samples(self.samples * a)

    __rmul__ = __mul__


def _require_compatible(f: ComplexField, g: ComplexField) -> None:
    if f.grid != g.grid:
        raise ContractError(f"grid mismatch: {f.grid} vs {g.grid}")
    if f.domain is not g.domain:
        raise ContractError(f"domain mismatch: {f.domain.value} vs {g.domain.value}")


def _require_domain(f: ComplexField, domain: Domain) -> None:
    if f.domain is not domain:
        raise ContractError(f"expected a {domain.value}-space field, got {f.domain.value}")


def _fft_scale(grid: GridSpec) -> float:
    # forward: (1/sqrt(2pi))^naxes * cell area
    naxes = len(grid.axes())
    return grid.cell_area(Domain.POSITION) / SQRT_2PI ** naxes


def to_momentum(f: ComplexField) -> ComplexField:
    """Angular spectrum of a position-space field on the conjugate lattice."""
    _require_domain(f, Domain.POSITION)
    ax = f.grid.axes()
    spec = sp_fft.fftshift(sp_fft.fftn(sp_fft.ifftshift(f.samples, axes=ax), axes=ax), axes=ax)
    return f.with_samples(spec * _fft_scale(f.grid), Domain.MOMENTUM)


def to_position(f: ComplexField) -> ComplexField:
    """Inverse of :func:`to_momentum`."""
    _require_domain(f, Domain.MOMENTUM)
    ax = f.grid.axes()
    pos = sp_fft.fftshift(sp_fft.ifftn(sp_fft.ifftshift(f.samples, axes=ax), axes=ax), axes=ax)
    return f.with_samples(pos / _fft_scale(f.grid), Domain.POSITION)


def as_position(f: ComplexField) -> ComplexField:
    return f if f.domain is Domain.POSITION else to_position(f)


def as_momentum(f: ComplexField) -> ComplexField:
    return f if f.domain is Domain.MOMENTUM else to_momentum(f)


def norm2(f: ComplexField) -> float:
    """Squared L2 norm, sum |f|^2 times the cell area of the field's domain."""
    return float(np.sum(np.abs(f.samples) ** 2) * f.grid.cell_area(f.domain))


def overlap(f: ComplexField, g: ComplexField) -> complex:
    """Inner product ``sum conj(f) g dA``; antilinear in ``f``."""
    _require_compatible(f, g)
    return complex(np.vdot(f.samples, g.samples) * f.grid.cell_area(f.domain))


def normalize(f: ComplexField) -> ComplexField:
    n = norm2(f)
    if n == 0:
        raise ContractError("cannot normalise a zero field")
    return f * (1.0 / math.sqrt(n))


def mirror(f: ComplexField) -> ComplexField:
    """Parity map rho -> -rho (or q -> -q) as an exact lattice permutation.

    Index ``n//2 + m`` goes to ``n//2 - m`` modulo n; the origin and the
    Nyquist row map to themselves.
    """
    s = f.samples
    for a in f.grid.axes():
        n = s.shape[a]
        idx = (n - np.arange(n)) % n  # centred lattice: i -> n - i (mod n)
        s = np.take(s, idx, axis=a)
    return f.with_samples(s)


def shift_cells(f: ComplexField, mx: int, my: int = 0) -> ComplexField:
    """Circularly translate a position field by whole cells."""
    _require_domain(f, Domain.POSITION)
    s = np.roll(f.samples, mx, axis=1)
    if not f.grid.is_line:
        s = np.roll(s, my, axis=0)
    return f.with_samples(s)


def rel_l2(a: np.ndarray, b: np.ndarray) -> float:
    """``||a - b|| / ||b||`` over raw arrays."""
    a = np.asarray(a)
    b = np.asarray(b)
    den = np.linalg.norm(b)
    if den == 0:
        return float(np.linalg.norm(a))
    return float(np.linalg.norm(a - b) / den)


@dataclass(frozen=True, eq=False)
class IntensityMap:
    """Real, non-negative map on a position grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ContractError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ContractError("intensity values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def of(cls, f: ComplexField) -> "IntensityMap":
        return cls(f.grid, np.abs(as_position(f).samples) ** 2)

    def power(self) -> float:
        return float(np.sum(self.values) * self.grid.cell_area(Domain.POSITION))

    def unit_power(self) -> "IntensityMap":
        p = self.power()
        if p == 0:
            raise ContractError("cannot normalise a dark intensity map")
        return IntensityMap(self.grid, self.values / p)

    def unit_mean(self) -> "IntensityMap":
        m = float(np.mean(self.values))
        if m == 0:
            raise ContractError("cannot normalise a dark intensity map")
        return IntensityMap(self.grid, self.values / m)

    def profile_x(self) -> np.ndarray:
        """Row through y = 0 (the only row on a line grid)."""
        return self.values[0 if self.grid.is_line else self.grid.ny // 2]
