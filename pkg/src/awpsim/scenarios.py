"""Configured end-to-end experiments producing intensity maps and metrics.

Four scenario kinds are provided:

* ``PhaseConjugation`` -- a divergent-lens sweep on the auxiliary beam; the
  seeded idler converges as the auxiliary diverges.
* ``FrftDoubleSlit`` -- a lensless fractional Fourier transform of a
  double-slit projection mode, with the order set by the pump curvature.
* ``AmplitudeTransfer`` -- a wire-shadowed pump copied onto the seeded idler,
  and the coincidence image magnified by two.
* ``DesignPreview`` -- the seeded camera preview shown next to the
  coincidence map it stands in for.

Configs are plain dataclasses. :func:`config_from_dict` validates the
JSON-level schema (SI units, unknown keys rejected) and fills the defaults.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields
from typing import Any, Callable

import numpy as np

from .errors import ContractError
from .field import ComplexField, Domain, GridSpec, IntensityMap, rel_l2
from .frft import (
    FrftGeometry,
    alpha_from_geometry,
    frft_prediction,
    scale_from_geometry,
)
from .metrics import fringe_visibility, normalized_cross_correlation, second_moment_width
from .optics import (
    FreeSpace,
    OpticalSystem,
    PumpSpec,
    ThinLens,
    WireOrientation,
    apply_element,
    critical_distance,
    make_double_slit,
    make_flat_pump,
    make_gaussian_mode,
    make_gaussian_pump,
    make_slit_pump,
    make_wire_pump,
)
from .pdc import (
    DEFAULT_GAIN,
    ProjectionMode,
    StimSetup,
    awp_chain,
    awp_equivalence_report,
    coincidence_pump_image,
    magnify,
    prepare_aux_from_projection,
    spdc_amplitude_oracle,
    spont_idler_intensity,
    stim_idler_intensity,
    total_idler_intensity,
)

EQUIVALENCE_TOL = 1e-8
ENERGY_TOL = 0.01
COLLIMATED_F = 1e6          # |f| at or beyond this counts as no lens
FRFT_MAP_CELLS = 1 << 14    # line-grid FRFT maps are cropped to this many cells


class ScenarioKind(enum.Enum):
    PHASE_CONJUGATION = "PhaseConjugation"
    FRFT_DOUBLE_SLIT = "FrftDoubleSlit"
    AMPLITUDE_TRANSFER = "AmplitudeTransfer"
    DESIGN_PREVIEW = "DesignPreview"


@dataclass(frozen=True)
class Wavelengths:
    """Pump, signal and idler vacuum wavelengths (meters)."""

    pump: float = 405e-9
    signal: float = 780e-9
    idler: float = 840e-9

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ContractError(f"lambda_{f.name}_m must be positive, got {v!r}")
        mismatch = abs(1 / self.pump - 1 / self.signal - 1 / self.idler) * self.pump
        if mismatch > ENERGY_TOL:
            raise ContractError(
                f"energy bookkeeping 1/lambda_p = 1/lambda_s + 1/lambda_i violated "
                f"by {mismatch:.3%}")

    @classmethod
    def degenerate(cls, pump: float = 405e-9) -> "Wavelengths":
        return cls(pump, 2 * pump, 2 * pump)

    @property
    def K(self) -> float:
        return 2 * math.pi / self.pump

    @property
    def k_s(self) -> float:
        return 2 * math.pi / self.signal

    @property
    def k_i(self) -> float:
        return 2 * math.pi / self.idler


# --------------------------------------------------------------------------
# kind-specific parameters


@dataclass(frozen=True)
class PhaseConjugationParams:
    """Divergent-lens sweep on a Gaussian auxiliary beam; ``None`` = no lens."""

    focal_sweep: tuple[float | None, ...] = (None, -3.0, -2.0, -1.0, -0.6, -0.4, -0.3)
    aux_waist: float = 0.5e-3

    def __post_init__(self):
        if not self.focal_sweep:
            raise ContractError("focal_sweep_m must be nonempty")
        for f in self.focal_sweep:
            if f is not None and not (math.isfinite(f) and (f < 0 or abs(f) >= COLLIMATED_F)):
                raise ContractError(f"focal_sweep_m entries must be divergent (f < 0) "
                                    f"or collimated, got {f}")
        if not self.aux_waist > 0:
            raise ContractError("aux_waist_m must be positive")


@dataclass(frozen=True)
class FrftDoubleSlitParams:
    """Order sweep (units of pi) and double-slit / pump geometry.

    ``None`` geometry entries are derived from the grid (see
    :func:`frft_defaults`).
    """

    alphas_pi: tuple[float, ...] = (0.0, 0.2, 0.25, 0.3, 0.35)
    slit_d: float | None = None
    slit_delta: float | None = None
    pump_waist: float | None = None

    def __post_init__(self):
        if not self.alphas_pi:
            raise ContractError("alphas_pi must be nonempty")
        for a in self.alphas_pi:
            if not (math.isfinite(a) and 0.0 <= a <= 0.5):
                raise ContractError(f"alphas_pi entries must lie in [0, 0.5], got {a}")


@dataclass(frozen=True)
class AmplitudeTransferParams:
    orientation: WireOrientation = WireOrientation.VERTICAL
    wire_width: float = 12e-3
    envelope_waist: float = 32e-3

    def __post_init__(self):
        object.__setattr__(self, "orientation", WireOrientation(self.orientation))
        if not (self.wire_width > 0 and self.envelope_waist > 0):
            raise ContractError("wire_width_m and envelope_waist_m must be positive")


@dataclass(frozen=True)
class DesignPreviewParams:
    """Element lists and sources described as JSON-style dicts.

    ``phi``: ``{"type": "point" | "flat" | "gaussian" | "double_slit", ...}``;
    ``pump``: ``{"type": "flat" | "gaussian" | "wire" | "slit", ...}``;
    ``h1``/``h2``: lists of ``{"type": "free", "z_m": z}`` or
    ``{"type": "lens", "f_m": f}``. ``None`` arms default to free space over
    the scenario distance.
    """

    phi: dict = field(default_factory=lambda: {"type": "point"})
    pump: dict = field(default_factory=lambda: {
        "type": "wire", "orientation": "vertical", "width_m": 0.4e-3,
        "envelope_waist_m": 1.5e-3})
    h1: tuple[dict, ...] | None = None
    h2: tuple[dict, ...] | None = None


_PARAMS = {
    ScenarioKind.PHASE_CONJUGATION: PhaseConjugationParams,
    ScenarioKind.FRFT_DOUBLE_SLIT: FrftDoubleSlitParams,
    ScenarioKind.AMPLITUDE_TRANSFER: AmplitudeTransferParams,
    ScenarioKind.DESIGN_PREVIEW: DesignPreviewParams,
}

# grid size, physical window (meters; None = fixed dx), line grid?, fixed dx
_GRID_DEFAULTS = {
    ScenarioKind.PHASE_CONJUGATION: dict(n=256, window=5.12e-3, line=False),
    ScenarioKind.FRFT_DOUBLE_SLIT: dict(n=1 << 23, dx=1e-6, line=True),
    ScenarioKind.AMPLITUDE_TRANSFER: dict(n=2048, window=163.84e-3, line=False),
    ScenarioKind.DESIGN_PREVIEW: dict(n=256, window=10.24e-3, line=False),
}


@dataclass(frozen=True)
class ScenarioConfig:
    """A fully specified scenario run.

    ``z`` is the propagation distance of the detection arms (and of the
    FRFT geometry); ``Z`` optionally fixes the FRFT pump focus instead of
    an order sweep. ``None`` means "use the kind's default".
    """

    kind: ScenarioKind
    grid: GridSpec
    wavelengths: Wavelengths = Wavelengths()
    z: float | None = None
    Z: float | None = None
    gain: float = DEFAULT_GAIN
    use_oracle: bool = False
    params: Any = None

    def __post_init__(self):
        kind = ScenarioKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.params is None:
            object.__setattr__(self, "params", _PARAMS[kind]())
        if not isinstance(self.params, _PARAMS[kind]):
            raise ContractError(f"params for {kind.value} must be {_PARAMS[kind].__name__}")
        if self.z is not None and not (math.isfinite(self.z) and self.z > 0):
            raise ContractError(f"z_m must be positive, got {self.z}")
        if self.Z is not None:
            if kind is not ScenarioKind.FRFT_DOUBLE_SLIT:
                raise ContractError("Z_m is only meaningful for FrftDoubleSlit")
            if not (math.isfinite(self.Z) and self.Z < 0):
                raise ContractError(f"Z_m must be negative (pump focus before the crystal), "
                                    f"got {self.Z}")
        if not (math.isfinite(self.gain) and self.gain >= 0):
            raise ContractError(f"gain must be finite and non-negative, got {self.gain}")
        if kind is ScenarioKind.FRFT_DOUBLE_SLIT:
            w = self.wavelengths
            if abs(w.signal - w.idler) > 1e-12 * w.signal:
                raise ContractError("FrftDoubleSlit needs degenerate signal and idler")


@dataclass(frozen=True)
class Check:
    """An asserted threshold on a metric."""

    name: str
    value: float
    op: str
    threshold: float

    @property
    def passed(self) -> bool:
        v, t = self.value, self.threshold
        return bool({"<": v < t, ">": v > t, "<=": v <= t, ">=": v >= t, "==": v == t}[self.op])


@dataclass
class ScenarioResult:
    """Named unit-power maps, named finite metrics and asserted checks."""

    kind: ScenarioKind
    maps: dict[str, IntensityMap] = field(default_factory=dict)
    metrics: dict[str, float] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)

    def add_map(self, name: str, I: IntensityMap) -> None:
        self.maps[name] = I.unit_power()

    def add_metric(self, name: str, value: float) -> float:
        value = float(value)
        if not math.isfinite(value):
            raise ContractError(f"metric {name} is not finite: {value}")
        self.metrics[name] = value
        return value

    def check(self, name: str, op: str, threshold: float) -> Check:
        c = Check(name, self.metrics[name], op, threshold)
        self.checks.append(c)
        return c

    @property
    def failed(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    @property
    def passed(self) -> bool:
        return not self.failed


# --------------------------------------------------------------------------
# helpers


def _fmt_pi(a: float) -> str:
    return f"{a:.2f}pi"


def _is_collimated(f: float | None) -> bool:
    return f is None or abs(f) >= COLLIMATED_F


def gaussian_abcd_width(w0: float, k: float, z: float, focal: float | None) -> float:
    """Waist-``w0`` Gaussian through a thin lens then ``z`` of free space."""
    inv_f = 0.0 if _is_collimated(focal) else 1.0 / focal
    return w0 * math.hypot(1.0 - z * inv_f, 2.0 * z / (k * w0 * w0))


def _strictly(values: list[float], increasing: bool) -> bool:
    d = np.diff(values)
    return bool(np.all(d > 0) if increasing else np.all(d < 0))


def _crop_line(I: IntensityMap, cells: int) -> IntensityMap:
    g = I.grid
    if not g.is_line or g.nx <= cells:
        return I
    c = g.nx // 2
    sub = GridSpec.line(cells, g.dx)
    return IntensityMap(sub, I.values[:, c - cells // 2:c + cells // 2]).unit_power()


def _equivalence(res: ScenarioResult, name: str, phi, h1, pump, h2, cfg: ScenarioConfig):
    rep = awp_equivalence_report(phi, h1, pump, h2, use_oracle=cfg.use_oracle,
                                 k1=h1.k, k2=h2.k)
    return res.add_metric(name, rep.rel_l2_residual)


# --------------------------------------------------------------------------
# phase conjugation


def run_phase_conjugation(cfg: ScenarioConfig) -> ScenarioResult:
    """Auxiliary and seeded-idler spot widths over a divergent-lens sweep."""
    if cfg.kind is not ScenarioKind.PHASE_CONJUGATION:
        raise ContractError(f"expected PhaseConjugation, got {cfg.kind.value}")
    p: PhaseConjugationParams = cfg.params
    g, wl = cfg.grid, cfg.wavelengths
    ks, ki = wl.k_s, wl.k_i
    z = cfg.z if cfg.z is not None else 0.2
    res = ScenarioResult(cfg.kind)
    pump = make_flat_pump(g, wl.K)
    h1 = OpticalSystem.free(z, ks)
    h2 = OpticalSystem.free(z, ki)
    res.add_map("pump_at_crystal", IntensityMap.of(pump.field_at_crystal))

    # order by increasing divergence |1/f|
    order = sorted(p.focal_sweep, key=lambda f: 0.0 if _is_collimated(f) else -1.0 / f)
    aux_w, idl_w, errs, eqs = [], [], [], []
    for i, f in enumerate(order):
        focal = None if _is_collimated(f) else f
        aux = make_gaussian_mode(g, p.aux_waist, ks, focal=focal)
        aux_cam = apply_element(FreeSpace(z), aux)
        idler = stim_idler_intensity(StimSetup(aux, pump, h2, ks, ki))
        wa = second_moment_width(IntensityMap.of(aux_cam))[0]
        wi = second_moment_width(idler)[0]
        # the seeded idler leaves the crystal with the conjugate curvature
        fi = None if focal is None else -focal * ki / ks
        oa = gaussian_abcd_width(p.aux_waist, ks, z, focal)
        oi = gaussian_abcd_width(p.aux_waist, ki, z, fi)
        res.add_metric(f"inverse_focal_1pm_{i}", 0.0 if focal is None else 1.0 / focal)
        aux_w.append(res.add_metric(f"aux_width_m_{i}", wa))
        idl_w.append(res.add_metric(f"idler_width_m_{i}", wi))
        res.add_metric(f"aux_width_abcd_m_{i}", oa)
        res.add_metric(f"idler_width_abcd_m_{i}", oi)
        errs += [abs(wa / oa - 1), abs(wi / oi - 1)]
        eqs.append(_equivalence(res, f"equivalence_residual_{i}",
                                ProjectionMode.of(aux_cam), h1, pump, h2, cfg))
        res.add_map(f"aux_{i}", IntensityMap.of(aux_cam))
        res.add_map(f"idler_{i}", idler)

    res.add_metric("aux_width_increasing", float(_strictly(aux_w, True)))
    res.add_metric("idler_width_decreasing", float(_strictly(idl_w, False)))
    res.add_metric("abcd_max_rel_error", max(errs))
    res.add_metric("equivalence_residual_max", max(eqs))
    res.check("aux_width_increasing", "==", 1.0)
    res.check("idler_width_decreasing", "==", 1.0)
    res.check("abcd_max_rel_error", "<", 0.01)
    res.check("equivalence_residual_max", "<", EQUIVALENCE_TOL)
    if _is_collimated(order[0]):
        res.add_metric("collimated_idler_is_widest", float(idl_w[0] == max(idl_w)))
        res.check("collimated_idler_is_widest", "==", 1.0)
    return res


# --------------------------------------------------------------------------
# lensless fractional Fourier transform


@dataclass(frozen=True)
class FrftSetup:
    """Resolved double-slit FRFT geometry (meters)."""

    z: float
    d: float
    delta: float
    pump_waist: float


def frft_defaults(cfg: ScenarioConfig) -> FrftSetup:
    """Fill the FRFT geometry from the grid.

    The arms default to the critical distance (where the free-space chirp is
    sampled exactly at Nyquist), the pump waist to four cells, the slit
    separation to four FRFT scales at order 0.35 pi (so the fringe period at
    that order is a fraction of the pattern), and the slit width to 0.4 of
    the separation.
    """
    p: FrftDoubleSlitParams = cfg.params
    g, wl = cfg.grid, cfg.wavelengths
    k = wl.k_s
    z = cfg.z if cfg.z is not None else critical_distance(g, k)
    w = p.pump_waist if p.pump_waist is not None else 4 * g.dx
    d = p.slit_d
    if d is None:
        s35 = math.sqrt(z * math.tan(0.35 * math.pi / 2) * 2 / wl.K)
        d = max(8, round(4 * s35 / g.dx)) * g.dx
    delta = p.slit_delta if p.slit_delta is not None else round(0.4 * d / g.dx) * g.dx
    return FrftSetup(z=z, d=d, delta=delta, pump_waist=w)


def fringe_period(geo: FrftGeometry, d: float) -> float:
    """Two-beam fringe period 2 pi s^2 |sin a| / d at the detector (meters)."""
    a = alpha_from_geometry(geo)
    if math.sin(a) < 1e-9:
        return 0.0
    return 2 * math.pi * scale_from_geometry(geo) ** 2 * abs(math.sin(a)) / d


def lobe_separation(profile: np.ndarray, dx: float) -> float:
    """Distance between the intensity centroids of the x < 0 and x > 0 halves."""
    n = profile.size
    x = (np.arange(n) - n // 2) * dx
    left, right = x < 0, x > 0
    cl = np.dot(profile[left], x[left]) / profile[left].sum()
    cr = np.dot(profile[right], x[right]) / profile[right].sum()
    return float(cr - cl)


def run_frft_doubleslit(cfg: ScenarioConfig) -> ScenarioResult:
    """Seeded-idler double-slit FRFT across an order sweep, against the kernel."""
    if cfg.kind is not ScenarioKind.FRFT_DOUBLE_SLIT:
        raise ContractError(f"expected FrftDoubleSlit, got {cfg.kind.value}")
    p: FrftDoubleSlitParams = cfg.params
    g, wl = cfg.grid, cfg.wavelengths
    K, k = wl.K, wl.k_s
    su = frft_defaults(cfg)
    res = ScenarioResult(cfg.kind)
    res.add_metric("z_m", su.z)
    res.add_metric("slit_d_m", su.d)
    res.add_metric("slit_delta_m", su.delta)
    res.add_metric("pump_waist_m", su.pump_waist)

    phi = ProjectionMode.of(make_double_slit(su.d, su.delta, g, k))
    h1 = OpticalSystem.free(su.z, k)
    h2 = OpticalSystem.free(su.z, k)
    aux = prepare_aux_from_projection(phi, h1)
    res.add_map("aux_at_crystal", _crop_line(IntensityMap.of(aux), FRFT_MAP_CELLS))

    if cfg.Z is not None:
        geos = [FrftGeometry(su.z, cfg.Z, K, k)]
    else:
        geos = [FrftGeometry.for_order(a * math.pi, su.z, K, k) for a in p.alphas_pi]

    vis, eqs = [], []
    for geo in geos:
        a_pi = alpha_from_geometry(geo) / math.pi
        tag = _fmt_pi(a_pi)
        pump = make_gaussian_pump(su.pump_waist, geo.Z, K, g)
        stim = stim_idler_intensity(StimSetup(aux, pump, h2, k, k))
        pred = frft_prediction(phi, geo, pump_waist=su.pump_waist)
        coinc = IntensityMap.of(awp_chain(phi, h1, pump, h2)).unit_power()
        period = fringe_period(geo, su.d) / g.dx
        res.add_metric(f"alpha_pi_{tag}", a_pi)
        res.add_metric(f"Z_m_{tag}", geo.Z)
        res.add_metric(f"fringe_period_cells_{tag}", period)
        res.add_metric(f"residual_{tag}", rel_l2(stim.values, pred.values))
        vis.append(res.add_metric(f"visibility_{tag}",
                                  fringe_visibility(stim.profile_x(), period)))
        res.add_metric(f"visibility_kernel_{tag}", fringe_visibility(pred.profile_x(), period))
        eqs.append(res.add_metric(f"equivalence_residual_{tag}",
                                  rel_l2(coinc.values, stim.values)))
        res.check(f"residual_{tag}", "<", 5e-3)
        if a_pi == 0.0:
            res.add_metric("lobe_separation_error_cells",
                           abs(lobe_separation(stim.profile_x(), g.dx) - su.d) / g.dx)
            res.check("lobe_separation_error_cells", "<=", 1.0)
            res.check(f"visibility_{tag}", "<", 0.1)
        if abs(a_pi - 0.35) < 1e-12:
            res.check(f"visibility_{tag}", ">", 0.6)
        res.add_map(f"idler_{tag}", _crop_line(stim, FRFT_MAP_CELLS))
        res.add_map(f"kernel_{tag}", _crop_line(pred, FRFT_MAP_CELLS))
        res.add_map(f"coincidence_{tag}", _crop_line(coinc, FRFT_MAP_CELLS))
        del stim, pred, coinc, pump

    if len(vis) > 1:
        res.add_metric("visibility_increasing", float(_strictly(vis, True)))
        res.check("visibility_increasing", "==", 1.0)
    res.add_metric("equivalence_residual_max", max(eqs))
    res.check("equivalence_residual_max", "<", EQUIVALENCE_TOL)
    return res


# --------------------------------------------------------------------------
# amplitude transfer


def _stim_for_pump(pump: PumpSpec, aux: ComplexField, z: float, wl: Wavelengths) -> IntensityMap:
    return stim_idler_intensity(StimSetup(aux, pump, OpticalSystem.free(z, wl.k_i),
                                          wl.k_s, wl.k_i))


def run_amplitude_transfer(cfg: ScenarioConfig) -> ScenarioResult:
    """Wire-shadowed pump with a collimated seed; stim, pump and coincidence maps."""
    if cfg.kind is not ScenarioKind.AMPLITUDE_TRANSFER:
        raise ContractError(f"expected AmplitudeTransfer, got {cfg.kind.value}")
    p: AmplitudeTransferParams = cfg.params
    g, wl = cfg.grid, cfg.wavelengths
    z = cfg.z if cfg.z is not None else 0.3
    res = ScenarioResult(cfg.kind)
    pump = make_wire_pump(p.orientation, p.wire_width, p.envelope_waist, wl.K, g)
    aux = make_flat_pump(g, wl.k_s).field_at_crystal.with_k(wl.k_s)

    stim = _stim_for_pump(pump, aux, z, wl)
    Ep = apply_element(FreeSpace(z), pump.field_at_crystal)
    pump_z = IntensityMap.of(Ep).unit_power()
    coinc = coincidence_pump_image(pump, z, wl.k_i)
    stim_x2 = IntensityMap(g, magnify(stim.values, g, 2.0))
    spont = spont_idler_intensity(pump, OpticalSystem.free(z, wl.k_i))

    res.add_map("pump_at_crystal", IntensityMap.of(pump.field_at_crystal))
    res.add_map("pump_propagated", pump_z)
    res.add_map("idler", stim)
    res.add_map("coincidence", coinc)
    res.add_map("spontaneous", spont)
    res.add_map("preview", IntensityMap(g, spont.values + cfg.gain * stim.unit_mean().values))

    res.add_metric("ncc_idler_vs_pump", normalized_cross_correlation(stim, pump_z))
    res.add_metric("ncc_coincidence_vs_idler_x2", normalized_cross_correlation(coinc, stim_x2))
    res.check("ncc_idler_vs_pump", ">", 0.95)
    res.check("ncc_coincidence_vs_idler_x2", ">", 0.99)

    if p.orientation is WireOrientation.CROSS:
        env = make_flat_pump(g, wl.K, p.envelope_waist)
        single = {o: _stim_for_pump(make_wire_pump(o, p.wire_width, p.envelope_waist,
                                                   wl.K, g), aux, z, wl)
                  for o in (WireOrientation.HORIZONTAL, WireOrientation.VERTICAL)}
        I_env = _stim_for_pump(env, aux, z, wl).values
        lit = I_env > 1e-3 * I_env.max()
        union = np.zeros(g.shape)
        union[lit] = (single[WireOrientation.HORIZONTAL].values[lit]
                      * single[WireOrientation.VERTICAL].values[lit] / I_env[lit])
        res.add_metric("ncc_cross_vs_union", normalized_cross_correlation(
            stim.values[lit], union[lit]))
        shadow = lambda I: (I.values < 0.5 * I_env) & lit  # noqa: E731
        s_c = shadow(stim)
        s_u = shadow(single[WireOrientation.HORIZONTAL]) | shadow(single[WireOrientation.VERTICAL])
        res.add_metric("shadow_union_iou", np.sum(s_c & s_u) / max(1, np.sum(s_c | s_u)))
        res.check("ncc_cross_vs_union", ">", 0.95)
        res.check("shadow_union_iou", ">", 0.9)

    # the collimated seed is the backward image of a flat detector mode
    h1 = OpticalSystem.free(z, wl.k_s)
    phi = ProjectionMode.of(apply_element(FreeSpace(z), aux))
    _equivalence(res, "equivalence_residual", phi, h1, pump, OpticalSystem.free(z, wl.k_i), cfg)
    res.check("equivalence_residual", "<", EQUIVALENCE_TOL)
    return res


# --------------------------------------------------------------------------
# design preview


def build_system(spec, k: float, default_z: float) -> OpticalSystem:
    """Optical system from ``[{"type": "free", "z_m": ..}, {"type": "lens", "f_m": ..}]``."""
    if spec is None:
        return OpticalSystem.free(default_z, k)
    elems = []
    for e in spec:
        e = dict(e)
        t = e.pop("type", None)
        if t == "free":
            elems.append(FreeSpace(float(_pop_required(e, "z_m", "free"))))
        elif t == "lens":
            elems.append(ThinLens(float(_pop_required(e, "f_m", "lens"))))
        else:
            raise ContractError(f"unknown element type {t!r} (expected 'free' or 'lens')")
        if e:
            raise ContractError(f"unknown element key(s): {', '.join(sorted(e))}")
    return OpticalSystem(tuple(elems), k)


def _pop_required(d: dict, key: str, what: str):
    if key not in d:
        raise ContractError(f"{what} needs '{key}'")
    return d.pop(key)


def build_mode(spec: dict, grid: GridSpec, k: float) -> ComplexField:
    """Detector mode from ``{"type": "point" | "flat" | "gaussian" | "double_slit", ...}``."""
    s = dict(spec)
    t = s.pop("type", None)
    if t == "point":
        f = ComplexField.delta(grid, k=k)
    elif t == "flat":
        f = ComplexField(grid, Domain.POSITION, np.ones(grid.shape), k)
    elif t == "gaussian":
        f = make_gaussian_mode(grid, float(_pop_required(s, "waist_m", "gaussian mode")), k,
                               x0=float(s.pop("x0_m", 0.0)), y0=float(s.pop("y0_m", 0.0)))
    elif t == "double_slit":
        f = make_double_slit(float(_pop_required(s, "d_m", "double_slit")),
                             float(_pop_required(s, "delta_m", "double_slit")), grid, k)
    else:
        raise ContractError(f"unknown phi type {t!r}")
    if s:
        raise ContractError(f"unknown phi key(s): {', '.join(sorted(s))}")
    return f


def build_pump(spec: dict, grid: GridSpec, K: float) -> PumpSpec:
    """Pump from ``{"type": "flat" | "gaussian" | "wire" | "slit", ...}``."""
    s = dict(spec)
    t = s.pop("type", None)
    if t == "flat":
        env = s.pop("envelope_waist_m", None)
        pump = make_flat_pump(grid, K, None if env is None else float(env))
    elif t == "gaussian":
        pump = make_gaussian_pump(float(_pop_required(s, "waist_m", "gaussian pump")),
                                  float(s.pop("Z_m", 0.0)), K, grid)
    elif t == "wire":
        pump = make_wire_pump(s.pop("orientation", "vertical"),
                              float(_pop_required(s, "width_m", "wire pump")),
                              float(_pop_required(s, "envelope_waist_m", "wire pump")), K, grid)
    elif t == "slit":
        env = s.pop("envelope_waist_m", None)
        pump = make_slit_pump(float(_pop_required(s, "width_m", "slit pump")), K, grid,
                              None if env is None else float(env))
    else:
        raise ContractError(f"unknown pump type {t!r}")
    if s:
        raise ContractError(f"unknown pump key(s): {', '.join(sorted(s))}")
    return pump


def run_design_preview(cfg: ScenarioConfig) -> ScenarioResult:
    """Seeded camera preview beside the coincidence map it predicts."""
    if cfg.kind is not ScenarioKind.DESIGN_PREVIEW:
        raise ContractError(f"expected DesignPreview, got {cfg.kind.value}")
    p: DesignPreviewParams = cfg.params
    g, wl = cfg.grid, cfg.wavelengths
    z = cfg.z if cfg.z is not None else critical_distance(g, min(wl.k_s, wl.k_i))
    phi = ProjectionMode.of(build_mode(p.phi, g, wl.k_s))
    h1 = build_system(p.h1, wl.k_s, z)
    h2 = build_system(p.h2, wl.k_i, z)
    pump = build_pump(p.pump, g, wl.K)
    res = ScenarioResult(cfg.kind)

    aux = prepare_aux_from_projection(phi, h1)
    setup = StimSetup(aux, pump, h2, wl.k_s, wl.k_i)
    stim = stim_idler_intensity(setup)
    spont = spont_idler_intensity(pump, h2)
    preview = total_idler_intensity(setup, gain=cfg.gain)
    if cfg.use_oracle:
        psi = spdc_amplitude_oracle(phi, h1, pump, h2)
    else:
        psi = awp_chain(phi, h1, pump, h2)
    coinc = IntensityMap.of(psi).unit_power()

    res.add_map("pump_at_crystal", IntensityMap.of(pump.field_at_crystal))
    res.add_map("aux_at_crystal", IntensityMap.of(aux))
    res.add_map("preview", preview)
    res.add_map("idler", stim)
    res.add_map("spontaneous", spont)
    res.add_map("coincidence", coinc)
    res.add_metric("gain", cfg.gain)
    res.add_metric("equivalence_residual", rel_l2(coinc.values, stim.values))
    res.check("equivalence_residual", "<", EQUIVALENCE_TOL)

    # point detector behind equal free-space arms: the coincidence map is the
    # pump propagated over z at its own wavenumber, magnified by K / k_i
    free_only = (len(h1.elements) == 1 and len(h2.elements) == 1
                 and all(isinstance(e, FreeSpace) for e in h1.elements + h2.elements))
    if p.phi.get("type") == "point" and free_only and h1.elements[0].z == h2.elements[0].z:
        img = coincidence_pump_image(pump, h2.elements[0].z, wl.k_i,
                                     magnification=wl.K / wl.k_i)
        res.add_map("pump_image", img)
        res.add_metric("ncc_coincidence_vs_pump_image",
                       normalized_cross_correlation(coinc, img))
        res.check("ncc_coincidence_vs_pump_image", ">", 0.99)
    return res


_RUNNERS: dict[ScenarioKind, Callable[[ScenarioConfig], ScenarioResult]] = {
    ScenarioKind.PHASE_CONJUGATION: run_phase_conjugation,
    ScenarioKind.FRFT_DOUBLE_SLIT: run_frft_doubleslit,
    ScenarioKind.AMPLITUDE_TRANSFER: run_amplitude_transfer,
    ScenarioKind.DESIGN_PREVIEW: run_design_preview,
}


def run_scenario(cfg: ScenarioConfig) -> ScenarioResult:
    return _RUNNERS[cfg.kind](cfg)


# --------------------------------------------------------------------------
# JSON-level schema


_COMMON_KEYS = {"kind", "grid", "dx_m", "window_m", "line", "lambda_pump_m",
                "lambda_signal_m", "lambda_idler_m", "z_m", "Z_m", "gain", "oracle"}
_KIND_KEYS = {
    ScenarioKind.PHASE_CONJUGATION: {"focal_sweep_m": "focal_sweep", "aux_waist_m": "aux_waist"},
    ScenarioKind.FRFT_DOUBLE_SLIT: {"alphas_pi": "alphas_pi", "slit_d_m": "slit_d",
                                    "slit_delta_m": "slit_delta",
                                    "pump_waist_m": "pump_waist"},
    ScenarioKind.AMPLITUDE_TRANSFER: {"wire_orientation": "orientation",
                                      "wire_width_m": "wire_width",
                                      "envelope_waist_m": "envelope_waist"},
    ScenarioKind.DESIGN_PREVIEW: {"phi": "phi", "pump": "pump", "h1": "h1", "h2": "h2"},
}

SCHEMA_DOC = """\
Config keys (SI units; everything except "kind" is optional, null = default):
  kind              PhaseConjugation | FrftDoubleSlit | AmplitudeTransfer | DesignPreview
  grid              samples per transverse axis (even, >= 8)
  dx_m | window_m   sample spacing, or physical window (dx = window / grid)
  line              true for a 1D line grid
  lambda_pump_m, lambda_signal_m, lambda_idler_m
  z_m               detection-arm distance; Z_m pump focus (FrftDoubleSlit)
  gain              stimulated / spontaneous power ratio of the preview map
  oracle            use the direct-quadrature oracle for coincidences
PhaseConjugation:  focal_sweep_m (null = no lens), aux_waist_m
FrftDoubleSlit:    alphas_pi, slit_d_m, slit_delta_m, pump_waist_m
AmplitudeTransfer: wire_orientation (horizontal|vertical|cross), wire_width_m, envelope_waist_m
DesignPreview:     phi, pump, h1, h2 (see DesignPreviewParams)
"""


def _number(d: dict, key: str, kind=float):
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ContractError(f"'{key}' must be a number, got {v!r}")
    if kind is int:
        if float(v) != int(v):
            raise ContractError(f"'{key}' must be an integer, got {v!r}")
        return int(v)
    v = float(v)
    if not math.isfinite(v):
        raise ContractError(f"'{key}' must be finite")
    return v


def config_from_dict(doc: dict, grid_override: int | None = None,
                     gain_override: float | None = None,
                     oracle: bool | None = None) -> ScenarioConfig:
    """Validate a decoded JSON config and fill defaults."""
    if not isinstance(doc, dict):
        raise ContractError("config must be a JSON object")
    doc = {k: v for k, v in doc.items() if v is not None}    # null = default
    if "kind" not in doc:
        raise ContractError("missing required key 'kind'")
    try:
        kind = ScenarioKind(doc["kind"])
    except (ValueError, TypeError):
        raise ContractError(f"invalid 'kind' {doc['kind']!r}; expected one of "
                            f"{', '.join(k.value for k in ScenarioKind)}") from None
    allowed = _COMMON_KEYS | set(_KIND_KEYS[kind])
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ContractError(f"unknown key(s) for {kind.value}: {', '.join(unknown)}")
    if "dx_m" in doc and "window_m" in doc:
        raise ContractError("give at most one of 'dx_m' and 'window_m'")

    gd = _GRID_DEFAULTS[kind]
    n = _number(doc, "grid", int) if "grid" in doc else gd["n"]
    if grid_override is not None:
        n = grid_override
    line = doc.get("line", gd["line"])
    if not isinstance(line, bool):
        raise ContractError("'line' must be true or false")
    if "dx_m" in doc:
        dx = _number(doc, "dx_m")
    elif "window_m" in doc:
        dx = _number(doc, "window_m") / n
    elif "window" in gd:
        dx = gd["window"] / n
    else:
        dx = gd["dx"]
    grid = GridSpec.line(n, dx) if line else GridSpec.square(n, dx)

    base = Wavelengths.degenerate() if kind is ScenarioKind.FRFT_DOUBLE_SLIT else Wavelengths()
    wl = Wavelengths(
        _number(doc, "lambda_pump_m") if "lambda_pump_m" in doc else base.pump,
        _number(doc, "lambda_signal_m") if "lambda_signal_m" in doc else base.signal,
        _number(doc, "lambda_idler_m") if "lambda_idler_m" in doc else base.idler)

    kw = {}
    for key, attr in _KIND_KEYS[kind].items():
        if key not in doc:
            continue
        v = doc[key]
        if key in ("focal_sweep_m", "alphas_pi"):
            if not isinstance(v, list):
                raise ContractError(f"'{key}' must be a list")
            vals = []
            for x in v:
                if x is None and key == "focal_sweep_m":
                    vals.append(None)
                else:
                    vals.append(_number({key: x}, key))
            v = tuple(vals)
        elif key in ("phi", "pump"):
            if not isinstance(v, dict):
                raise ContractError(f"'{key}' must be an object")
        elif key in ("h1", "h2"):
            if not (isinstance(v, list) and all(isinstance(e, dict) for e in v)):
                raise ContractError(f"'{key}' must be a list of element objects")
            v = tuple(v)
        elif key == "wire_orientation":
            try:
                v = WireOrientation(v)
            except ValueError:
                raise ContractError(f"invalid 'wire_orientation' {v!r}") from None
        else:
            v = _number(doc, key)
        kw[attr] = v
    if kind is ScenarioKind.FRFT_DOUBLE_SLIT and "Z_m" in doc and "alphas_pi" in doc:
        raise ContractError("give either 'alphas_pi' or 'Z_m', not both")
    params = _PARAMS[kind](**kw)

    gain = _number(doc, "gain") if "gain" in doc else DEFAULT_GAIN
    if gain_override is not None:
        gain = gain_override
    use_oracle = doc.get("oracle", False)
    if not isinstance(use_oracle, bool):
        raise ContractError("'oracle' must be true or false")
    if oracle:
        use_oracle = True
    cfg = ScenarioConfig(
        kind=kind, grid=grid, wavelengths=wl,
        z=_number(doc, "z_m") if "z_m" in doc else None,
        Z=_number(doc, "Z_m") if "Z_m" in doc else None,
        gain=gain, use_oracle=use_oracle, params=params)
    return cfg


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """JSON-ready echo of a resolved config (used for manifests)."""
    g = cfg.grid
    out = {"kind": cfg.kind.value, "grid": g.nx, "dx_m": g.dx, "line": g.is_line,
           "lambda_pump_m": cfg.wavelengths.pump, "lambda_signal_m": cfg.wavelengths.signal,
           "lambda_idler_m": cfg.wavelengths.idler, "z_m": cfg.z, "Z_m": cfg.Z,
           "gain": cfg.gain, "oracle": cfg.use_oracle}
    inv = {attr: key for key, attr in _KIND_KEYS[cfg.kind].items()}
    for f in fields(cfg.params):
        v = getattr(cfg.params, f.name)
        if isinstance(v, enum.Enum):
            v = v.value
        elif isinstance(v, tuple):
            v = list(v)
        out[inv[f.name]] = v
    return out


__all__ = [
    "Check", "ScenarioConfig", "ScenarioKind", "ScenarioResult", "Wavelengths",
    "PhaseConjugationParams", "FrftDoubleSlitParams", "AmplitudeTransferParams",
    "DesignPreviewParams", "FrftSetup", "SCHEMA_DOC", "build_mode", "build_pump",
    "build_system", "config_from_dict", "config_to_dict", "frft_defaults", "fringe_period",
    "gaussian_abcd_width", "lobe_separation", "run_amplitude_transfer",
    "run_design_preview", "run_frft_doubleslit", "run_phase_conjugation", "run_scenario",
]
