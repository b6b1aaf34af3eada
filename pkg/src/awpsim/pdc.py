"""Projected two-photon amplitudes and stimulated/spontaneous idler intensities.

Three routes to the same physics live here:

* :func:`awp_chain` -- the advanced wave: the conjugated detection mode is
  sent back through the signal arm, reflected off the pump at the crystal and
  carried through the idler arm. O(N log N).
* :func:`stim_idler_intensity` -- the seeded (stimulated) idler intensity for
  an auxiliary beam prepared at the crystal. O(N log N), separate code path.
* :func:`spdc_amplitude_oracle` -- the projected two-photon amplitude summed
  literally over all four transverse momenta with dense transfer matrices.
  Small grids only.

Overall constants are dropped: amplitudes come back with unit ``norm2`` and
intensity maps with unit total power unless ``normalize=False``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sp_fft

from .errors import ContractError, CostRefusalError
from .field import (
    SQRT_2PI,
    ComplexField,
    Domain,
    GridSpec,
    IntensityMap,
    as_momentum,
    as_position,
    mirror,
    norm2,
    normalize,
    rel_l2,
    to_momentum,
    to_position,
)
from .optics import (
    Direction,
    FreeSpace,
    Mask,
    OpticalSystem,
    PumpSpec,
    ThinLens,
    apply_element,
    apply_system,
    free_space_phase,
    lens_phase,
)

DEFAULT_GAIN = 100.0
ORACLE_MAX_CELLS = 64 * 64
SPONT_MAX_CELLS = 128 * 128


@dataclass(frozen=True, eq=False)
class ProjectionMode:
    """Detector-plane mode onto which photon 1 is projected (unit norm)."""

    mode: ComplexField

    def __post_init__(self):
        n = norm2(self.mode)
        if abs(n - 1.0) > 1e-10:
            raise ContractError(f"projection mode must have unit norm, got {n:.12g}")

    @classmethod
    def of(cls, f: ComplexField) -> "ProjectionMode":
        return cls(normalize(f))

    @property
    def plane(self) -> Domain:
        return self.mode.domain

    @property
    def grid(self) -> GridSpec:
        return self.mode.grid


@dataclass(frozen=True, eq=False)
class StimSetup:
    """Seeded down-conversion: auxiliary beam profile at the crystal, pump, idler arm."""

    aux_at_crystal: ComplexField
    pump: PumpSpec
    h2: OpticalSystem
    k1: float
    k2: float

    def __post_init__(self):
        if not (self.k1 > 0 and self.k2 > 0):
            raise ContractError("signal and idler wavenumbers must be positive")
        if self.aux_at_crystal.grid != self.pump.grid:
            raise ContractError("auxiliary field and pump must share a grid")


@dataclass(frozen=True)
class EquivalenceReport:
    rel_l2_residual: float
    peak_abs_residual: float
    normalization_ratio: float

    def __post_init__(self):
        if self.rel_l2_residual < 0 or self.peak_abs_residual < 0:
            raise ContractError("residuals must be non-negative")


def _check_masks(S: OpticalSystem, grid: GridSpec) -> None:
    for e in S.elements:
        if isinstance(e, Mask) and e.T.grid != grid:
            raise ContractError(f"mask grid {e.T.grid} does not match field grid {grid}")


def _check_shared_grid(phi: ProjectionMode, h1: OpticalSystem, pump: PumpSpec,
                       h2: OpticalSystem) -> None:
    if phi.grid != pump.grid:
        raise ContractError(f"mode grid {phi.grid} does not match pump grid {pump.grid}")
    _check_masks(h1, phi.grid)
    _check_masks(h2, phi.grid)


# --------------------------------------------------------------------------
# fast advanced-wave chain


def _transpose_element(e, spectrum: ComplexField, check: bool) -> ComplexField:
    """Contract an element's transfer function over its *output* momentum.

    Free space and thin lenses are parity-even, so their transpose equals the
    forward map; a mask transposes to the parity-reflected mask T(-rho).
    """
    if isinstance(e, Mask):
        return apply_element(Mask(mirror(e.T)), spectrum, Direction.FORWARD, check=check)
    return apply_element(e, spectrum, Direction.FORWARD, check=check)


def awp_chain(phi: ProjectionMode, h1: OpticalSystem, pump: PumpSpec, h2: OpticalSystem,
              normalize_output: bool = True, check: bool = True) -> ComplexField:
    """Conditional idler amplitude Psi_phi(rho_2) via the advanced wave.

    Steps: conjugate the mode's angular spectrum; carry it from the detector
    back to the crystal by contracting each signal-arm transfer function over
    its output momentum (last element first); go to position space and
    reflect rho -> -rho; multiply by the pump field; propagate through the
    idler arm.
    """
    _check_shared_grid(phi, h1, pump, h2)
    wave = as_momentum(phi.mode).with_k(h1.k).conj()
    for e in reversed(h1.elements):
        wave = _transpose_element(e, wave, check)
    at_crystal = mirror(to_position(wave))
    reflected = at_crystal.with_samples(at_crystal.samples * pump.field_at_crystal.samples)
    out = as_position(apply_system(h2, reflected.with_k(h2.k), Direction.FORWARD, check=check))
    return normalize(out) if normalize_output else out


def prepare_aux_from_projection(phi: ProjectionMode, h1: OpticalSystem,
                                check: bool = True) -> ComplexField:
    """Auxiliary beam at the crystal that mimics projection onto ``phi``.

    The returned field ``V_s`` is the detection mode sent backwards through
    the signal arm; its conjugate spectrum ``v_s*(q)`` is the backward-prepared
    conjugate mode entering the stimulated intensity.
    """
    _check_masks(h1, phi.grid)
    return as_position(apply_system(h1, phi.mode, Direction.BACKWARD, check=check))


def stim_idler_amplitude(setup: StimSetup, check: bool = True) -> ComplexField:
    """Unnormalised idler amplitude driven by the seed (before squaring)."""
    _check_masks(setup.h2, setup.pump.grid)
    vs = to_momentum(as_position(setup.aux_at_crystal))
    conj_pos = to_position(vs.conj())          # position representation of v_s*(q)
    seeded = mirror(conj_pos)                   # q1 = -q2 pairing of v_p(q1 + q2)
    gen = seeded.with_samples(seeded.samples * setup.pump.field_at_crystal.samples)
    return as_position(apply_system(setup.h2, gen.with_k(setup.k2), check=check))


def stim_idler_intensity(setup: StimSetup, normalize_output: bool = True,
                         check: bool = True) -> IntensityMap:
    """Stimulated idler intensity, unit total power."""
    I = IntensityMap.of(stim_idler_amplitude(setup, check=check))
    return I.unit_power() if normalize_output else I


# --------------------------------------------------------------------------
# spontaneous background


def _forward_stack(S: OpticalSystem, grid: GridSpec, stack: np.ndarray) -> np.ndarray:
    """Propagate a batch of position-space arrays (B, ny, nx) through ``S``."""
    ax = tuple(a + 1 for a in grid.axes())
    out = stack
    for e in S.elements:
        if isinstance(e, FreeSpace):
            if e.z == 0:
                continue
            ph = free_space_phase(grid, e.z, S.k)
            spec = sp_fft.fftshift(sp_fft.fftn(sp_fft.ifftshift(out, axes=ax), axes=ax), axes=ax)
            spec *= ph
            out = sp_fft.fftshift(sp_fft.ifftn(sp_fft.ifftshift(spec, axes=ax), axes=ax), axes=ax)
        elif isinstance(e, ThinLens):
            out = out * lens_phase(grid, e.f, S.k)
        else:
            out = out * e.T.samples
    return out


def spont_idler_intensity(pump: PumpSpec, h2: OpticalSystem,
                          max_cells: int = SPONT_MAX_CELLS, chunk: int = 256,
                          direct: bool | None = None) -> IntensityMap:
    """Spontaneous idler background, normalised to unit mean.

    Sums, over every crystal cell, the pump intensity there times the squared
    idler-arm response to a discrete point source at that cell. Pure
    free-space arms are shift invariant, so the sum collapses to a circular
    convolution; pass ``direct=True`` to force the cell-by-cell quadrature.
    """
    grid = pump.grid
    _check_masks(h2, grid)
    ep2 = np.abs(pump.field_at_crystal.samples) ** 2
    if direct is None:
        direct = not h2.is_shift_invariant()

    if not direct:
        delta = ComplexField.delta(grid, k=h2.k)
        g2 = np.abs(as_position(apply_system(h2, delta, check=False)).samples) ** 2
        ax = grid.axes()
        # origin response shifted to every source cell: circular convolution
        conv = sp_fft.ifftn(sp_fft.fftn(ep2, axes=ax) *
                            sp_fft.fftn(sp_fft.ifftshift(g2, axes=ax), axes=ax), axes=ax)
        vals = conv.real
    else:
        if grid.size > max_cells:
            raise CostRefusalError(
                f"direct spontaneous quadrature over {grid.size} cells exceeds "
                f"max_cells={max_cells}")
        flat = ep2.ravel()
        cells = np.flatnonzero(flat)
        vals = np.zeros(grid.shape)
        inv_area = 1.0 / grid.cell_area(Domain.POSITION)
        for start in range(0, cells.size, chunk):
            idx = cells[start:start + chunk]
            stack = np.zeros((idx.size,) + grid.shape, complex)
            stack.reshape(idx.size, -1)[np.arange(idx.size), idx] = inv_area
            resp = _forward_stack(h2, grid, stack)
            vals += np.tensordot(flat[idx], np.abs(resp) ** 2, axes=(0, 0))
    vals = np.maximum(vals, 0.0)
    return IntensityMap(grid, vals).unit_mean()


def total_idler_intensity(setup: StimSetup, gain: float = DEFAULT_GAIN,
                          **spont_kw) -> IntensityMap:
    """Spontaneous background plus ``gain`` times the stimulated term.

    Both terms are scaled to unit mean, so ``gain`` is the ratio of stimulated
    to spontaneous total power.
    """
    if not (gain >= 0 and math.isfinite(gain)):
        raise ContractError(f"gain must be finite and non-negative, got {gain}")
    spont = spont_idler_intensity(setup.pump, setup.h2, **spont_kw)
    if gain == 0:
        return spont
    stim = stim_idler_intensity(setup).unit_mean()
    return IntensityMap(spont.grid, spont.values + gain * stim.values)


# --------------------------------------------------------------------------
# direct quadrature oracle


def _extended_dft(samples: np.ndarray, grid: GridSpec) -> np.ndarray:
    """(1/2pi)^naxes * sum_rho f(rho) exp(-i kappa.rho) dA on kappa = m dq,
    |m| <= n per axis, by explicit exponential sums. Entry m sits at m + n."""
    mx = np.arange(-grid.nx, grid.nx + 1)
    ex = np.exp(-1j * np.outer(mx * grid.dqx, grid.x()))
    if grid.is_line:
        return (samples @ ex.T) * grid.dx / SQRT_2PI
    my = np.arange(-grid.ny, grid.ny + 1)
    ey = np.exp(-1j * np.outer(my * grid.dqy, grid.y()))
    return (ey @ samples @ ex.T) * grid.dx * grid.dy / (2.0 * math.pi)


def _lattice_index(grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Centred integer (iy, ix) of every flattened cell."""
    iy, ix = np.meshgrid(np.arange(grid.ny) - grid.ny // 2,
                         np.arange(grid.nx) - grid.nx // 2, indexing="ij")
    return iy.ravel(), ix.ravel()


def _gather_apply(ext: np.ndarray, grid: GridSpec, vec: np.ndarray, sign: int,
                  transpose: bool = False, chunk: int = 512) -> np.ndarray:
    """Apply the dense matrix M[a, b] = ext[i_a + sign * i_b] to ``vec``
    (or its transpose), building rows in fixed-size chunks."""
    iy, ix = _lattice_index(grid)
    oy, ox = (0 if grid.is_line else grid.ny), grid.nx
    n = iy.size
    out = np.empty(n, complex)
    for s in range(0, n, chunk):
        a = slice(s, min(s + chunk, n))
        if transpose:
            # rows indexed by b, columns by a: M[a, b] with a running over all cells
            ry = iy[None, :] + sign * iy[a, None]
            rx = ix[None, :] + sign * ix[a, None]
        else:
            ry = iy[a, None] + sign * iy[None, :]
            rx = ix[a, None] + sign * ix[None, :]
        out[a] = ext[ry + oy, rx + ox] @ vec
    return out


def _element_matrix_apply(e, grid: GridSpec, k: float, vec: np.ndarray,
                          transpose: bool) -> np.ndarray:
    """Momentum transfer M[q_out, q_in] of one element applied to ``vec``.

    Free space is diagonal; a position-space transmission T becomes
    M[q, q'] = t(q - q') dq with t the angular spectrum of T.
    """
    if isinstance(e, FreeSpace):
        return free_space_phase(grid, e.z, k).ravel() * vec
    if isinstance(e, ThinLens):
        T = lens_phase(grid, e.f, k)
    else:
        T = e.T.samples
    ext = _extended_dft(np.asarray(T).reshape(grid.shape), grid)
    if grid.is_line:
        ext = ext.reshape(1, -1)
    dq = grid.cell_area(Domain.MOMENTUM)
    return _gather_apply(ext * dq, grid, vec, sign=-1, transpose=transpose)


def spdc_amplitude_oracle(phi: ProjectionMode, h1: OpticalSystem, pump: PumpSpec,
                          h2: OpticalSystem, out_grid: GridSpec | None = None,
                          normalize_output: bool = True,
                          max_cells: int = ORACLE_MAX_CELLS) -> ComplexField:
    """Projected two-photon amplitude by literal momentum-space summation.

    Evaluates sum over q1, q2, q1', q2' of
    v(q1 + q2) H1(q1, q1') H2(q2, q2') exp(i q2'.rho2) phi*(q1')
    with ``H(q_in, q_out)``, the pump spectrum ``v`` computed by explicit
    exponential sums at every lattice momentum sum, and element kernels
    built as dense matrices. No FFTs are used.
    """
    _check_shared_grid(phi, h1, pump, h2)
    grid = phi.grid
    if grid.size > max_cells:
        raise CostRefusalError(
            f"oracle over {grid.size} cells exceeds max_cells={max_cells}")
    out_grid = out_grid or grid
    dq = grid.cell_area(Domain.MOMENTUM)

    # phi*(q1') from an explicit transform of the mode
    if phi.mode.domain is Domain.MOMENTUM:
        phi_q = phi.mode.samples.ravel()
    else:
        ext = _extended_dft(phi.mode.samples, grid)
        ext = ext.reshape(1, -1) if grid.is_line else ext
        iy, ix = _lattice_index(grid)
        phi_q = ext[iy + (0 if grid.is_line else grid.ny), ix + grid.nx]
    w = np.conj(phi_q)

    # sum over q1' of H1(q1, q1') phi*(q1'), H1(q_in, q_out) = M1[q_out, q_in]
    for e in reversed(h1.elements):
        w = _element_matrix_apply(e, grid, h1.k, w, transpose=True)

    # sum over q1 of v(q1 + q2) w(q1)
    v_ext = _extended_dft(pump.field_at_crystal.samples, grid)
    v_ext = v_ext.reshape(1, -1) if grid.is_line else v_ext
    x = _gather_apply(v_ext * dq, grid, w, sign=+1)

    # sum over q2 of H2(q2, q2') x(q2) = (M2 x)(q2')
    for e in h2.elements:
        x = _element_matrix_apply(e, grid, h2.k, x, transpose=False)

    # sum over q2' of exp(i q2'.rho2)
    qx, qy = grid.coords(Domain.MOMENTUM)
    ox, oy = out_grid.coords(Domain.POSITION)
    ex = np.exp(1j * np.outer(ox.ravel(), qx.ravel()))
    if not grid.is_line:
        ex = ex * np.exp(1j * np.outer(oy.ravel(), qy.ravel()))
    naxes = len(grid.axes())
    psi = (ex @ x) * dq / SQRT_2PI ** naxes
    out = ComplexField(out_grid, Domain.POSITION, psi.reshape(out_grid.shape), h2.k)
    return normalize(out) if normalize_output else out


# --------------------------------------------------------------------------
# equivalence and image-transfer helpers


def awp_equivalence_report(phi: ProjectionMode, h1: OpticalSystem, pump: PumpSpec,
                           h2: OpticalSystem, use_oracle: bool = False,
                           k1: float | None = None, k2: float | None = None,
                           check: bool = True) -> EquivalenceReport:
    """Compare coincidence |Psi_phi|^2 with the seeded idler intensity.

    The seed is prepared from ``phi`` by sending it backwards through ``h1``.
    """
    if use_oracle:
        psi = spdc_amplitude_oracle(phi, h1, pump, h2, normalize_output=False)
    else:
        psi = awp_chain(phi, h1, pump, h2, normalize_output=False, check=check)
    a_raw = IntensityMap.of(psi)
    aux = prepare_aux_from_projection(phi, h1, check=check)
    setup = StimSetup(aux, pump, h2, k1 or h1.k, k2 or h2.k)
    b_raw = stim_idler_intensity(setup, normalize_output=False, check=check)
    a, b = a_raw.unit_power().values, b_raw.unit_power().values
    return EquivalenceReport(
        rel_l2_residual=rel_l2(a, b),
        peak_abs_residual=float(np.max(np.abs(a - b)) / np.max(np.abs(b))),
        normalization_ratio=a_raw.power() / b_raw.power(),
    )


def magnify(values: np.ndarray, grid: GridSpec, factor: float) -> np.ndarray:
    """Resample ``values`` so that out(rho) = values(rho / factor), bilinear,
    zero outside the source window."""
    x = grid.x()
    out = np.stack([np.interp(x / factor, x, row, left=0.0, right=0.0) for row in values])
    if not grid.is_line:
        y = grid.y()
        out = np.stack([np.interp(y / factor, y, col, left=0.0, right=0.0)
                        for col in out.T], axis=1)
    return out


def coincidence_pump_image(pump: PumpSpec, z: float, k2: float, K: float | None = None,
                           magnification: float = 2.0, check: bool = True) -> IntensityMap:
    """Point-detector coincidence image: |E_p(rho2 / 2, z)|^2, unit power.

    The pump is propagated over ``z`` at its own wavenumber and its intensity
    is magnified by two.
    """
    if not z > 0:
        raise ContractError(f"propagation distance must be positive, got {z}")
    if not k2 > 0:
        raise ContractError("idler wavenumber must be positive")
    K = K or pump.K
    E = apply_element(FreeSpace(z), pump.field_at_crystal.with_k(K), check=check)
    I = np.abs(as_position(E).samples) ** 2
    return IntensityMap(pump.grid, magnify(I, pump.grid, magnification)).unit_power()
