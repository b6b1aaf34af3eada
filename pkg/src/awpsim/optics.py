"""Paraxial elements, their forward/backward transfer, and source constructors.

Sign conventions follow the field module: free propagation over ``z``
multiplies the angular spectrum by ``exp(-i q^2 z / 2k)`` and a thin lens of
focal length ``f > 0`` multiplies the position samples by
``exp(-i k rho^2 / 2f)`` (focusing).

Backward application is the transfer seen by a beam crossing the same element
in the opposite direction, expressed so that ``Backward o Forward = 1`` for
lossless elements: propagation and lens phases flip sign, and a mask applies
``conj(T)``, which keeps the amplitude part and reverses the phase part.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import AliasingWarning, ContractError, ResolutionError
from .field import (
    ComplexField,
    Domain,
    GridSpec,
    as_momentum,
    as_position,
    norm2,
    to_momentum,
    to_position,
)


class Direction(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


@dataclass(frozen=True)
class FreeSpace:
    z: float

    def __post_init__(self):
        if not math.isfinite(self.z):
            raise ContractError(f"free-space distance must be finite, got {self.z}")


@dataclass(frozen=True)
class ThinLens:
    f: float

    def __post_init__(self):
        if not math.isfinite(self.f) or self.f == 0:
            raise ContractError(f"focal length must be finite and nonzero, got {self.f}")


@dataclass(frozen=True, eq=False)
class Mask:
    """Sampled transmission T(rho); amplitude and phase are both allowed."""

    T: ComplexField

    def __post_init__(self):
        if self.T.domain is not Domain.POSITION:
            raise ContractError("mask transmission must be given in position space")


OpticalElement = Union[FreeSpace, ThinLens, Mask]


@dataclass(frozen=True)
class OpticalSystem:
    """Ordered element chain, crystal side first, at design wavenumber ``k``."""

    elements: tuple = ()
    k: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if not (math.isfinite(self.k) and self.k > 0):
            raise ContractError(f"system wavenumber must be positive, got {self.k}")
        for e in self.elements:
            if not isinstance(e, (FreeSpace, ThinLens, Mask)):
                raise ContractError(f"unknown optical element {e!r}")

    @classmethod
    def free(cls, z: float, k: float) -> "OpticalSystem":
        return cls((FreeSpace(z),), k)

    def is_shift_invariant(self) -> bool:
        return all(isinstance(e, FreeSpace) for e in self.elements)

    def is_unitary(self, tol: float = 1e-12) -> bool:
        for e in self.elements:
            if isinstance(e, Mask) and np.max(np.abs(np.abs(e.T.samples) - 1.0)) > tol:
                return False
        return True


@dataclass(frozen=True, eq=False)
class PumpSpec:
    """Pump field at the crystal plane together with its wavenumber."""

    field_at_crystal: ComplexField
    K: float
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.field_at_crystal.domain is not Domain.POSITION:
            raise ContractError("pump field must be given in position space")
        if not (math.isfinite(self.K) and self.K > 0):
            raise ContractError(f"pump wavenumber must be positive, got {self.K}")
        if norm2(self.field_at_crystal) <= 0:
            raise ContractError("pump field is identically zero")

    @property
    def grid(self) -> GridSpec:
        return self.field_at_crystal.grid


# --------------------------------------------------------------------------
# sampling guards


# exactly pi per cell (z at the critical distance) is still alias-free
_PI_TOL = math.pi * (1.0 + 1e-9)


def critical_distance(grid: GridSpec, k: float) -> float:
    """Distance ``n dx^2 / lambda`` (smallest over the transformed axes).

    Beyond it the free-space chirp exceeds pi per momentum cell at the
    Nyquist edge; a thin lens shorter than it exceeds pi per position cell.
    """
    lam = 2.0 * math.pi / k
    zc = grid.nx * grid.dx ** 2 / lam
    if not grid.is_line:
        zc = min(zc, grid.ny * grid.dy ** 2 / lam)
    return zc


def _support_extent(samples: np.ndarray, coords: Sequence[np.ndarray], rel: float = 1e-10):
    """Largest |coordinate| along each axis where |samples|^2 exceeds rel * max."""
    p = np.abs(samples) ** 2
    m = p.max()
    if m == 0:
        return [0.0 for _ in coords]
    mask = p > rel * m
    return [float(np.max(np.abs(c[mask]))) for c in coords]


def check_free_space_sampling(f: ComplexField, z: float, k: float) -> bool:
    """Warn if exp(-i q^2 z/2k) changes by more than pi per cell on the spectrum support."""
    g = f.grid
    spec = as_momentum(f)
    qx, qy = g.coords(Domain.MOMENTUM)
    ext = _support_extent(spec.samples, [qx, qy])
    steps = [ext[0] * abs(z) * g.dqx / k]
    if not g.is_line:
        steps.append(ext[1] * abs(z) * g.dqy / k)
    ok = max(steps) <= _PI_TOL
    if not ok:
        warnings.warn(
            f"free-space chirp over z={z:g} m undersampled: {max(steps):.3g} rad/cell",
            AliasingWarning, stacklevel=3)
    return ok


def check_lens_sampling(f: ComplexField, focal: float, k: float) -> bool:
    """Warn if the lens chirp exceeds pi per cell where the field is nonzero."""
    g = f.grid
    pos = as_position(f)
    x, y = g.coords(Domain.POSITION)
    ext = _support_extent(pos.samples, [x, y])
    steps = [k * ext[0] * g.dx / abs(focal)]
    if not g.is_line:
        steps.append(k * ext[1] * g.dy / abs(focal))
    ok = max(steps) <= _PI_TOL
    if not ok:
        warnings.warn(
            f"lens chirp f={focal:g} m undersampled: {max(steps):.3g} rad/cell",
            AliasingWarning, stacklevel=3)
    return ok


# --------------------------------------------------------------------------
# element transfer


def free_space_phase(grid: GridSpec, z: float, k: float) -> np.ndarray:
    return np.exp(-1j * grid.r2(Domain.MOMENTUM) * z / (2.0 * k))


def lens_phase(grid: GridSpec, focal: float, k: float) -> np.ndarray:
    return np.exp(-1j * k * grid.r2(Domain.POSITION) / (2.0 * focal))


def apply_element(e: OpticalElement, f: ComplexField,
                  direction: Direction = Direction.FORWARD,
                  check: bool = True) -> ComplexField:
    """Apply one element; the output stays in the input's domain.

    Uses the field's own wavenumber ``f.k``.
    """
    back = direction is Direction.BACKWARD
    if isinstance(e, FreeSpace):
        if e.z == 0:
            return f
        if check:
            check_free_space_sampling(f, e.z, f.k)
        z = -e.z if back else e.z
        spec = as_momentum(f)
        out = spec.with_samples(spec.samples * free_space_phase(f.grid, z, f.k))
    elif isinstance(e, ThinLens):
        if check:
            check_lens_sampling(f, e.f, f.k)
        focal = -e.f if back else e.f
        pos = as_position(f)
        out = pos.with_samples(pos.samples * lens_phase(f.grid, focal, f.k))
    elif isinstance(e, Mask):
        if e.T.grid != f.grid:
            raise ContractError(f"mask grid {e.T.grid} does not match field grid {f.grid}")
        pos = as_position(f)
        t = np.conj(e.T.samples) if back else e.T.samples
        out = pos.with_samples(pos.samples * t)
    else:
        raise ContractError(f"unknown optical element {e!r}")
    if out.domain is not f.domain:
        out = to_position(out) if f.domain is Domain.POSITION else to_momentum(out)
    return out


def apply_system(S: OpticalSystem, f: ComplexField,
                 direction: Direction = Direction.FORWARD,
                 check: bool = True) -> ComplexField:
    """Forward: elements in list order. Backward: reverse order, each Backward.

    The field is re-tagged with the system wavenumber before propagation.
    """
    out = f.with_k(S.k) if f.k != S.k else f
    elems = S.elements if direction is Direction.FORWARD else reversed(S.elements)
    for e in elems:
        out = apply_element(e, out, direction, check=check)
    return out


# --------------------------------------------------------------------------
# sources


def _require_resolved(name: str, size: float, grid: GridSpec, cells: float,
                      y_too: bool = True) -> None:
    if size < cells * grid.dx * (1 - 1e-12):
        raise ResolutionError(
            f"{name}={size:g} m spans fewer than {cells:g} cells of dx={grid.dx:g} m")
    if y_too and not grid.is_line and size < cells * grid.dy * (1 - 1e-12):
        raise ResolutionError(
            f"{name}={size:g} m spans fewer than {cells:g} cells of dy={grid.dy:g} m")


def gaussian_beam(grid: GridSpec, w: float, Z: float, K: float,
                  x0: float = 0.0, y0: float = 0.0) -> np.ndarray:
    """Closed-form paraxial Gaussian beam of waist ``w`` evaluated a distance ``Z``
    downstream of its waist (``Z < 0``: the waist is still ahead).

    The spectrum is ``exp(-q^2 w^2/4) exp(-i Z q^2 / 2K)``; in position space
    that is a Gaussian with complex width ``wc^2 = w^2 + 2iZ/K``.
    """
    wc2 = w * w + 2j * Z / K
    x, y = grid.coords()
    r2 = (x - x0) ** 2 + (0.0 if grid.is_line else (y - y0) ** 2)
    naxes = len(grid.axes())
    amp = (w * w / wc2) ** (naxes / 2.0)
    return amp * np.exp(-r2 / wc2)


def make_gaussian_pump(w: float, Z: float, K: float, grid: GridSpec) -> PumpSpec:
    """Gaussian pump with waist ``w`` placed ``-Z`` after the crystal.

    ``Z = Z_crystal - Z_waist``; negative Z means a converging pump whose waist
    lies beyond the crystal.
    """
    if not w > 0:
        raise ContractError(f"waist must be positive, got {w}")
    _require_resolved("waist", w, grid, 4)
    E = ComplexField(grid, Domain.POSITION, gaussian_beam(grid, w, Z, K), K)
    return PumpSpec(E, K, {"kind": "gaussian", "w": w, "Z": Z})


def make_double_slit(d: float, delta: float, grid: GridSpec, k: float = 1.0) -> ComplexField:
    """Two slits of width ``delta`` with centre separation ``d``, open along y."""
    if not 0 < delta < d:
        raise ContractError(f"need 0 < delta < d, got delta={delta}, d={d}")
    _require_resolved("slit width", delta, grid, 3, y_too=False)
    _require_resolved("slit separation", d, grid, 3, y_too=False)
    x, _ = grid.coords()
    ax = np.abs(x)
    inside = ((d - delta) / 2 < ax) & (ax < (d + delta) / 2)
    return ComplexField(grid, Domain.POSITION, inside.astype(complex), k)


class WireOrientation(enum.Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"
    CROSS = "cross"


def wire_mask(orientation: WireOrientation, width: float, grid: GridSpec) -> np.ndarray:
    """Opaque-wire transmission: 0 inside the wire, 1 elsewhere."""
    orientation = WireOrientation(orientation)
    x, y = grid.coords()
    t = np.ones(grid.shape)
    if orientation in (WireOrientation.VERTICAL, WireOrientation.CROSS):
        t = t * (np.abs(x) >= width / 2)
    if orientation in (WireOrientation.HORIZONTAL, WireOrientation.CROSS):
        if grid.is_line:
            raise ContractError("a horizontal wire needs a 2D grid")
        t = t * (np.abs(y) >= width / 2)
    return t


def make_wire_pump(orientation, width: float, envelope_w: float, K: float,
                   grid: GridSpec) -> PumpSpec:
    """Flat-phase Gaussian envelope shadowed by a thin wire (or two crossed wires)."""
    orientation = WireOrientation(orientation)
    y_too = orientation is not WireOrientation.VERTICAL
    _require_resolved("wire width", width, grid, 2, y_too=y_too and not grid.is_line)
    env = gaussian_beam(grid, envelope_w, 0.0, K)
    E = ComplexField(grid, Domain.POSITION, env * wire_mask(orientation, width, grid), K)
    return PumpSpec(E, K, {"kind": "wire", "orientation": orientation.value,
                           "width": width, "w": envelope_w})


def make_slit_pump(width: float, K: float, grid: GridSpec,
                   envelope_w: float | None = None) -> PumpSpec:
    """Flat-phase pump transmitted by a single slit of full width ``width`` (open along y).

    A sample lying on an edge (within 1e-9 cells) carries the cell-averaged
    intensity transmittance 1/2, i.e. amplitude ``1/sqrt(2)``, so the sampled
    aperture has a half-maximum width of exactly ``width``.
    """
    if not width > 0:
        raise ContractError(f"slit width must be positive, got {width}")
    _require_resolved("slit width", width, grid, 3, y_too=False)
    x, _ = grid.coords()
    u = (np.abs(x) - width / 2) / grid.dx
    edge = np.abs(u) < 1e-9
    t = np.where(edge, math.sqrt(0.5), (u < 0).astype(float)).astype(complex)
    env = 1.0 if envelope_w is None else gaussian_beam(grid, envelope_w, 0.0, K)
    E = ComplexField(grid, Domain.POSITION, np.broadcast_to(t * env, grid.shape), K)
    return PumpSpec(E, K, {"kind": "slit", "width": width, "w": envelope_w})


def make_flat_pump(grid: GridSpec, K: float, envelope_w: float | None = None) -> PumpSpec:
    """Collimated pump: a broad Gaussian at its waist, or exactly uniform."""
    if envelope_w is None:
        E = ComplexField(grid, Domain.POSITION, np.ones(grid.shape, complex), K)
    else:
        E = ComplexField(grid, Domain.POSITION, gaussian_beam(grid, envelope_w, 0.0, K), K)
    return PumpSpec(E, K, {"kind": "flat", "w": envelope_w})


def make_gaussian_mode(grid: GridSpec, w: float, k: float, x0: float = 0.0,
                       y0: float = 0.0, focal: float | None = None) -> ComplexField:
    """Gaussian beam at its waist, optionally through a thin lens of focal ``focal``."""
    E = ComplexField(grid, Domain.POSITION, gaussian_beam(grid, w, 0.0, k, x0, y0), k)
    if focal is not None:
        E = apply_element(ThinLens(focal), E)
    return E
