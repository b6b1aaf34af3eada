"""Invariant suite behind ``awp-sim selftest``.

Each check returns ``(passed, detail)``. Transforms are looked up through
the :mod:`awpsim.field` module at call time, so a patched transform is
exercised by every check.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import field
from .errors import AliasingWarning
from .field import ComplexField, Domain, GridSpec, IntensityMap, mirror, norm2, rel_l2
from .frft import FrftParams, frft_apply, self_dual_scale
from .metrics import relative_std
from .optics import (
    FreeSpace,
    OpticalSystem,
    ThinLens,
    apply_system,
    critical_distance,
    make_double_slit,
    make_flat_pump,
    make_gaussian_mode,
    make_gaussian_pump,
    make_wire_pump,
)
from .pdc import (
    ProjectionMode,
    awp_chain,
    awp_equivalence_report,
    spdc_amplitude_oracle,
    spont_idler_intensity,
)

LAMBDA_P, LAMBDA_S = 405e-9, 780e-9
K_P = 2 * math.pi / LAMBDA_P
K_S = 2 * math.pi / LAMBDA_S
K_I = K_P - K_S
BUDGET_S = 120.0


@dataclass(frozen=True)
class CheckOutcome:
    name: str
    passed: bool
    detail: str
    seconds: float


def _random_field(rng: np.random.Generator, grid: GridSpec, k: float = 1.0) -> ComplexField:
    s = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return ComplexField(grid, Domain.POSITION, s, k)


# --------------------------------------------------------------------------
# transform invariants


def check_parseval(trials: int = 20, seed: int = 1) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for t in range(trials):
        g = GridSpec.line(64, 1e-5) if t % 2 else GridSpec.square(32, 1e-5)
        f = _random_field(rng, g)
        worst = max(worst, abs(norm2(field.to_momentum(f)) / norm2(f) - 1))
    return worst < 1e-12, f"max rel error {worst:.2e}"


def check_round_trip(trials: int = 20, seed: int = 2) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for t in range(trials):
        g = GridSpec.line(64, 1e-5) if t % 2 else GridSpec.square(32, 1e-5)
        f = _random_field(rng, g)
        back = field.to_position(field.to_momentum(f))
        worst = max(worst, rel_l2(back.samples, f.samples))
    return worst < 1e-12, f"max rel L2 {worst:.2e}"


def check_shift_theorem() -> tuple[bool, str]:
    """A delta at rho0 has spectrum exp(-i q.rho0) / 2pi (sign-sensitive)."""
    worst = 0.0
    for g, (mx, my) in ((GridSpec.square(32, 1e-5), (3, -5)), (GridSpec.line(64, 2e-5), (7, 0))):
        f = ComplexField.delta(g, mx, my)
        qx, qy = g.coords(Domain.MOMENTUM)
        x0, y0 = mx * g.dx, (0.0 if g.is_line else my * g.dy)
        norm = (2 * math.pi) if not g.is_line else math.sqrt(2 * math.pi)
        want = np.exp(-1j * (qx * x0 + qy * y0)) / norm
        worst = max(worst, rel_l2(field.to_momentum(f).samples, want))
    return worst < 1e-12, f"max rel L2 {worst:.2e}"


def check_unitarity(trials: int = 20, seed: int = 3) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    g = GridSpec.square(64, 20e-6)
    k = K_S
    zc = critical_distance(g, k)
    worst = 0.0
    for _ in range(trials):
        f = make_gaussian_mode(g, rng.uniform(0.1, 0.2) * g.nx * g.dx, k,
                               x0=rng.uniform(-1, 1) * 5 * g.dx)
        S = OpticalSystem((FreeSpace(rng.uniform(0.1, 0.5) * zc),
                           ThinLens(rng.choice([-1, 1]) * rng.uniform(0.5, 2.0)),
                           FreeSpace(rng.uniform(0.1, 0.5) * zc)), k)
        worst = max(worst, abs(norm2(apply_system(S, f)) / norm2(f) - 1))
    return worst < 1e-10, f"max rel norm change {worst:.2e}"


# --------------------------------------------------------------------------
# fractional Fourier transform group properties


def check_frft_group() -> tuple[bool, str]:
    rng = np.random.default_rng(4)
    g = GridSpec.line(256, 1.0)
    x = g.x() * math.sqrt(2 * math.pi / g.nx)    # self-dual lattice units
    f = ComplexField(g, Domain.POSITION,
                     (np.exp(-x ** 2 / 2) * (1 + 0.3 * x + 0.2j * x ** 2))[None, :], 1.0)
    s = self_dual_scale(g)
    # quarter turn = ordinary Fourier transform on the self-dual lattice
    fq = frft_apply(f, FrftParams(math.pi / 2, s))
    ref = field.to_momentum(f)
    ft_err = rel_l2(fq.samples / np.linalg.norm(fq.samples),
                    ref.samples / np.linalg.norm(ref.samples))
    par = frft_apply(f, FrftParams(math.pi, s))
    par_err = rel_l2(par.samples, mirror(f).samples * np.linalg.norm(par.samples)
                     / np.linalg.norm(f.samples))
    a, b = rng.uniform(0.2, 1.2, size=2)
    ab = frft_apply(frft_apply(f, FrftParams(a, s)), FrftParams(b, s))
    one = frft_apply(f, FrftParams(a + b, s))
    add_err = rel_l2(ab.samples, one.samples)
    ok = ft_err < 1e-9 and par_err < 1e-10 and add_err < 1e-6
    return ok, f"F(pi/2) vs FT {ft_err:.1e}; F(pi) vs parity {par_err:.1e}; additivity {add_err:.1e}"


# --------------------------------------------------------------------------
# equivalence of the two routes


def awp_matrix_cases(n: int = 256) -> list[tuple[str, ProjectionMode, OpticalSystem, object,
                                                 OpticalSystem]]:
    """{flat, curved Gaussian, wire} pumps x {point, double-slit, Gaussian} modes,
    free-space arms, on an ``n``-point line grid."""
    g = GridSpec.line(n, 10e-6)
    z1 = 0.8 * critical_distance(g, K_S)
    z2 = 0.8 * critical_distance(g, K_I)
    h1, h2 = OpticalSystem.free(z1, K_S), OpticalSystem.free(z2, K_I)
    L = g.nx * g.dx
    pumps = {
        "flat": make_flat_pump(g, K_P),
        "curved-gaussian": make_gaussian_pump(0.1 * L, -0.5, K_P, g),
        "wire": make_wire_pump("vertical", 0.05 * L, 0.25 * L, K_P, g),
    }
    modes = {
        "point": ComplexField.delta(g, k=K_S),
        "double-slit": make_double_slit(0.12 * L, 0.04 * L, g, K_S),
        "gaussian": make_gaussian_mode(g, 0.05 * L, K_S, x0=0.03 * L),
    }
    return [(f"{pn}/{mn}", ProjectionMode.of(m), h1, p, h2)
            for pn, p in pumps.items() for mn, m in modes.items()]


def check_awp_matrix() -> tuple[bool, str]:
    worst, name = 0.0, ""
    for label, phi, h1, pump, h2 in awp_matrix_cases():
        r = awp_equivalence_report(phi, h1, pump, h2).rel_l2_residual
        if r >= worst:
            worst, name = r, label
    return worst < 1e-8, f"worst {name}: {worst:.2e}"


def oracle_cases(count: int = 5, seed: int = 5, sizes: tuple[int, ...] = (32, 64)):
    """Randomised small-grid configurations (lenses, curved pumps, offsets)."""
    rng = np.random.default_rng(seed)
    cases = []
    for i in range(count):
        n = sizes[i % len(sizes)]
        line = i % 3 == 2
        g = GridSpec.line(n, 20e-6) if line else GridSpec.square(n, 20e-6)
        L = g.nx * g.dx
        zc1, zc2 = critical_distance(g, K_S), critical_distance(g, K_I)
        mode = make_gaussian_mode(g, rng.uniform(0.08, 0.15) * L, K_S,
                                  x0=rng.uniform(-0.1, 0.1) * L)
        pump = make_gaussian_pump(rng.uniform(0.15, 0.3) * L, -rng.uniform(0.05, 0.5), K_P, g)
        h1 = OpticalSystem((FreeSpace(rng.uniform(0.2, 0.5) * zc1),
                            ThinLens(rng.uniform(0.5, 2.0))), K_S)
        h2 = OpticalSystem((ThinLens(-rng.uniform(0.5, 2.0)),
                            FreeSpace(rng.uniform(0.2, 0.5) * zc2)), K_I)
        cases.append((ProjectionMode.of(mode), h1, pump, h2))
    return cases


def check_oracle() -> tuple[bool, str]:
    worst = 0.0
    cases = oracle_cases(sizes=(32,))
    for phi, h1, pump, h2 in cases:
        a = spdc_amplitude_oracle(phi, h1, pump, h2)
        b = awp_chain(phi, h1, pump, h2)
        ph = np.vdot(b.samples, a.samples)
        ph = ph / abs(ph) if ph != 0 else 1.0
        worst = max(worst, rel_l2(a.samples, b.samples * ph))
    return worst < 1e-6, f"{len(cases)} configs, worst rel L2 {worst:.2e}"


def check_spontaneous_flatness() -> tuple[bool, str]:
    g = GridSpec.square(64, 20e-6)
    h2 = OpticalSystem.free(critical_distance(g, K_I), K_I)
    worst = 0.0
    for pump in (make_wire_pump("cross", 8 * g.dx, 0.3 * g.nx * g.dx, K_P, g),
                 make_gaussian_pump(0.2 * g.nx * g.dx, -0.3, K_P, g)):
        I: IntensityMap = spont_idler_intensity(pump, h2)
        worst = max(worst, relative_std(I.values))
    return worst < 1e-10, f"max relative std {worst:.2e}"


QUICK_CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
    ("parseval", check_parseval),
    ("round-trip", check_round_trip),
    ("shift-theorem", check_shift_theorem),
    ("unitarity", check_unitarity),
    ("frft-group", check_frft_group),
    ("awp-matrix", check_awp_matrix),
    ("spontaneous-flatness", check_spontaneous_flatness),
]
FULL_ONLY_CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
    ("oracle-32pt", check_oracle),
]


def run_checks(quick: bool = False) -> list[CheckOutcome]:
    checks = QUICK_CHECKS + ([] if quick else FULL_ONLY_CHECKS)
    out = []
    for name, fn in checks:
        t0 = time.perf_counter()
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", AliasingWarning)
                ok, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckOutcome(name, bool(ok), detail, time.perf_counter() - t0))
    return out


def format_table(outcomes: list[CheckOutcome]) -> str:
    w = max(len(o.name) for o in outcomes)
    lines = [f"{'check':<{w}}  result  time     detail"]
    for o in outcomes:
        lines.append(f"{o.name:<{w}}  {'PASS' if o.passed else 'FAIL':<6}  "
                     f"{o.seconds:6.2f}s  {o.detail}")
    return "\n".join(lines)
