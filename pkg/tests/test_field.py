import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from awpsim.errors import ContractError
from awpsim.field import (
    ComplexField,
    Domain,
    GridSpec,
    IntensityMap,
    as_momentum,
    mirror,
    norm2,
    normalize,
    overlap,
    rel_l2,
    shift_cells,
    to_momentum,
    to_position,
)

grids = st.sampled_from([GridSpec.square(32, 1e-5), GridSpec.line(64, 2e-6),
                         GridSpec(16, 32, 1e-5, 3e-5), GridSpec.line(128, 1.0)])


def random_field(seed, grid, k=1.0):
    rng = np.random.default_rng(seed)
    s = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return ComplexField(grid, Domain.POSITION, s, k)


@pytest.mark.parametrize("n,ny", [(7, 8), (6, 8), (8, 3), (8, 4)])
def test_grid_rejects_bad_sizes(n, ny):
    with pytest.raises(ContractError):
        GridSpec(n, ny, 1.0, 1.0)


@pytest.mark.parametrize("dx", [0.0, -1.0, math.inf, math.nan])
def test_grid_rejects_bad_spacing(dx):
    with pytest.raises(ContractError):
        GridSpec.square(8, dx)


def test_grid_is_centred():
    g = GridSpec.square(8, 0.5)
    assert g.x()[4] == 0.0 and g.x()[0] == -2.0
    assert g.qx()[4] == 0.0
    assert math.isclose(g.dqx, 2 * math.pi / 4.0)
    line = GridSpec.line(16, 1.0)
    assert line.shape == (1, 16) and line.is_line and line.axes() == (1,)


def test_delta_has_flat_spectrum_2d():
    g = GridSpec.square(32, 1e-5)
    spec = to_momentum(ComplexField.delta(g))
    np.testing.assert_allclose(np.abs(spec.samples), 1 / (2 * math.pi), rtol=1e-13)


def test_delta_has_flat_spectrum_line():
    g = GridSpec.line(64, 1e-5)
    spec = to_momentum(ComplexField.delta(g))
    np.testing.assert_allclose(np.abs(spec.samples), 1 / math.sqrt(2 * math.pi), rtol=1e-13)


def test_gaussian_matches_continuum_transform():
    # (1/2pi) int exp(-r^2/w^2) exp(-i q.r) d^2r = (w^2/2) exp(-q^2 w^2 / 4)
    g = GridSpec.square(128, 1e-5)
    w = 12 * g.dx
    f = ComplexField.from_function(g, lambda x, y: np.exp(-(x * x + y * y) / w ** 2))
    want = (w * w / 2) * np.exp(-g.r2(Domain.MOMENTUM) * w * w / 4)
    assert rel_l2(to_momentum(f).samples, want) < 1e-12


def test_shift_theorem_sign():
    g = GridSpec.square(32, 1e-5)
    f = ComplexField.delta(g, 3, -2)
    qx, qy = g.coords(Domain.MOMENTUM)
    want = np.exp(-1j * (qx * 3 * g.dx + qy * -2 * g.dy)) / (2 * math.pi)
    assert rel_l2(to_momentum(f).samples, want) < 1e-13


@given(grids, st.integers(0, 2 ** 32 - 1))
def test_parseval(grid, seed):
    f = random_field(seed, grid)
    assert abs(norm2(to_momentum(f)) / norm2(f) - 1) < 1e-12


@given(grids, st.integers(0, 2 ** 32 - 1))
def test_round_trip(grid, seed):
    f = random_field(seed, grid)
    assert rel_l2(to_position(to_momentum(f)).samples, f.samples) < 1e-12


@given(grids, st.integers(0, 2 ** 32 - 1))
def test_mirror_commutes_with_transform_and_is_involution(grid, seed):
    f = random_field(seed, grid)
    assert np.array_equal(mirror(mirror(f)).samples, f.samples)
    assert rel_l2(to_momentum(mirror(f)).samples, mirror(to_momentum(f)).samples) < 1e-12


@given(st.integers(0, 2 ** 32 - 1))
def test_overlap_is_antilinear_in_first_argument(seed):
    g = GridSpec.square(16, 1.0)
    f, h = random_field(seed, g), random_field(seed + 1, g)
    a = 0.3 - 1.7j
    assert abs(overlap(f * a, h) - np.conj(a) * overlap(f, h)) < 1e-10 * abs(overlap(f, h))
    assert abs(overlap(f, f) - norm2(f)) < 1e-12 * norm2(f)


def test_transform_requires_domain():
    f = random_field(0, GridSpec.line(16, 1.0))
    with pytest.raises(ContractError):
        to_position(f)
    with pytest.raises(ContractError):
        to_momentum(as_momentum(f))


def test_field_validation_and_immutability():
    g = GridSpec.square(8, 1.0)
    with pytest.raises(ContractError):
        ComplexField(g, Domain.POSITION, np.zeros((4, 4)))
    with pytest.raises(ContractError):
        ComplexField(g, Domain.POSITION, np.full(g.shape, np.nan))
    with pytest.raises(ContractError):
        ComplexField(g, Domain.POSITION, np.zeros(g.shape), k=0.0)
    f = ComplexField.zeros(g)
    with pytest.raises(ValueError):
        f.samples[0, 0] = 1
    with pytest.raises(ContractError):
        f + ComplexField.zeros(GridSpec.square(16, 1.0))
    with pytest.raises(ContractError):
        normalize(f)


def test_shift_cells_moves_delta():
    g = GridSpec.square(16, 1.0)
    assert np.array_equal(shift_cells(ComplexField.delta(g), 2, -3).samples,
                          ComplexField.delta(g, 2, -3).samples)


def test_intensity_map_normalisation():
    g = GridSpec.square(8, 0.5)
    I = IntensityMap(g, np.arange(64.0).reshape(8, 8))
    assert math.isclose(I.unit_power().power(), 1.0)
    assert math.isclose(float(np.mean(I.unit_mean().values)), 1.0)
    with pytest.raises(ContractError):
        IntensityMap(g, np.zeros((8, 8))).unit_power()
    assert I.profile_x().shape == (8,)
