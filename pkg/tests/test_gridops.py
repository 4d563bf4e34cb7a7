import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nsverify import gridops
from nsverify.fieldkit import FourierMode, FourierSpec, from_fourier, gallery
from nsverify.gridops import BoundaryError, Grid, SampledField


def gaussian(grid, L=1.0):
    r2 = sum(m ** 2 for m in grid.mesh)
    return np.exp(-r2 / L ** 2), r2


# -- grids ----------------------------------------------------------------------

def test_grid_validation():
    with pytest.raises(ValueError):
        Grid.periodic(2 * math.pi, 24, 2)
    with pytest.raises(ValueError):
        Grid.truncated(6, 4)
    with pytest.raises(ValueError):
        Grid.truncated(-1, 16)
    with pytest.raises(ValueError):
        Grid("spherical", (1.0,), (16,))


def test_spacing_conventions():
    assert Grid.periodic(2.0, 16, 1).spacing == (0.125,)
    g = Grid.truncated(3.0, 31, 1)
    assert g.spacing == (0.2,)
    assert g.axes[0][0] == -3.0 and g.axes[0][-1] == pytest.approx(3.0)


def test_sampled_field_rejects_bad_arrays():
    g = Grid.periodic(1.0, 8, 2)
    with pytest.raises(ValueError):
        SampledField(g, np.zeros((2, 8, 4)))
    with pytest.raises(ValueError):
        SampledField(g, np.full((8, 8), np.nan), scalar=True)


# -- sampling -------------------------------------------------------------------

def test_zero_field_samples_to_zero():
    f = from_fourier(FourierSpec((FourierMode((1, 0, 0), (1, 0, 0), (0, 0, 0)),)))
    sf = gridops.sample(f, Grid.periodic(2 * math.pi, 8, 3))
    assert not sf.data.any()
    assert gridops.norms(sf) == gridops.NormSet(0.0, 0.0, 0.0)


def test_embedded_taylor_green_node_value():
    sf = gridops.sample(gallery("tg-embedded-2d"), Grid.periodic(2 * math.pi, 32, 2))
    assert sf.data[0, 8, 0] == pytest.approx(1.0, abs=1e-15)


def test_gaussian_vortex_negligible_on_boundary():
    grid = Grid.truncated(6.0, 64)
    sf = gridops.sample(gallery("gaussian-vortex-3d"), grid)
    assert sf.magnitude()[grid.boundary_mask()].max() < 1e-14


def test_boundary_violation_reports_required_radius():
    with pytest.raises(BoundaryError) as info:
        gridops.sample(gallery("gaussian-vortex-3d"), Grid.truncated(3.0, 16))
    assert 5 < info.value.required_radius < 8


def test_kind_and_period_mismatches():
    with pytest.raises(ValueError):
        gridops.sample(gallery("gaussian-vortex-3d"), Grid.periodic(2 * math.pi, 16, 3))
    with pytest.raises(ValueError):
        gridops.sample(gallery("tg-embedded-2d"), Grid.periodic(5.0, 16, 2))
    with pytest.raises(ValueError):
        gridops.sample(gallery("tg-embedded-2d"), Grid.periodic(2 * math.pi, 16, 3))


# -- spectral operators --------------------------------------------------------------

@given(st.integers(1, 15), st.sampled_from([16, 32, 64]), st.floats(0.5, 10))
def test_spectral_derivative_of_a_mode_is_exact(m, n, length):
    if m >= n // 2:
        return
    g = Grid.periodic(length, n, 1)
    k = 2 * math.pi * m / length
    x = g.axes[0]
    d1 = gridops.derivative(np.sin(k * x), g, 0)
    d2 = gridops.derivative(np.cos(k * x), g, 0, order=2)
    assert np.abs(d1 - k * np.cos(k * x)).max() < 1e-12 * max(1, k)
    assert np.abs(d2 + k * k * np.cos(k * x)).max() < 1e-12 * max(1, k * k)


@given(st.integers(0, 2 ** 32 - 1))
def test_divergence_of_curl_vanishes(seed):
    rng = np.random.default_rng(seed)
    g = Grid.periodic(2 * math.pi, 32, 3)
    sf = SampledField(g, rng.standard_normal((3,) + g.shape))
    assert np.abs(gridops.divergence(gridops.curl(sf)).data).max() < 1e-9


def test_embedded_taylor_green_curl():
    g = Grid.periodic(2 * math.pi, 32, 2)
    w = gridops.curl(gridops.sample(gallery("tg-embedded-2d"), g)).data
    X, Y = g.mesh
    assert np.abs(w - 2 * np.sin(X) * np.sin(Y)).max() < 1e-10


def test_projected_fourier_field_is_solenoidal():
    spec = FourierSpec(tuple(FourierMode(n, C, S) for n, C, S in [
        ((1, 2, 0), (1, 1, 1), (0, 2, -1)), ((0, 1, 3), (0.5, 0, 1), (1, 0, 0)),
        ((2, -1, 1), (0, 0, 1), (1, 1, 0))]))
    g = Grid.periodic(2 * math.pi, 32, 3)
    div = gridops.divergence(gridops.sample(from_fourier(spec), g)).data
    assert np.abs(div).max() < 1e-10


def test_operator_dimension_errors():
    g = Grid.periodic(1.0, 8, 3)
    scalar = SampledField(g, np.zeros(g.shape), scalar=True)
    with pytest.raises(ValueError):
        gridops.curl(scalar)
    with pytest.raises(ValueError):
        gridops.divergence(SampledField(g, np.zeros((2,) + g.shape)))
    with pytest.raises(ValueError):
        gridops.gradient(SampledField(g, np.zeros((3,) + g.shape)))
    with pytest.raises(ValueError):
        gridops.curl(SampledField(Grid.periodic(1.0, 8, 1), np.zeros((1, 8))))


# -- fourth-order differences ----------------------------------------------------------

@pytest.mark.parametrize("order", [1, 2])
def test_fd4_rate_on_a_gaussian(order):
    errs = []
    for n in (32, 64, 128):
        g = Grid.truncated(6.0, n, 1)
        x = g.axes[0]
        f = np.exp(-x ** 2)
        exact = -2 * x * f if order == 1 else (4 * x * x - 2) * f
        err = gridops.derivative(f, g, 0, order) - exact
        errs.append(np.sqrt(np.mean(err ** 2)))
    rates = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(rates) >= 3.8


def test_gaussian_laplacian_uses_the_trace_coefficient(oracles):
    assert oracles["gaussian_laplacian"]["constant_coefficient_times_L2"] == "-6"
    errs = []
    for n in (32, 64):
        g = Grid.truncated(6.0, n)
        f, r2 = gaussian(g)
        lap = gridops.laplacian(SampledField(g, f, scalar=True)).data
        errs.append(np.sqrt(np.mean((lap - (-6 + 4 * r2) * f) ** 2)))
        # the two-dimensional coefficient does not describe the 3-D operator
        assert np.abs(lap - (-2 + 4 * r2) * f).max() > 1
    assert math.log2(errs[0] / errs[1]) >= 3.8


def test_fd_weights_are_exact():
    assert gridops._fd_weights((-2, -1, 0, 1, 2), 1) == (1 / 12, -2 / 3, 0.0, 2 / 3, -1 / 12)
    assert gridops._fd_weights((-2, -1, 0, 1, 2), 2) == (-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12)


# -- Poisson ---------------------------------------------------------------------------

def test_zero_rhs_gives_zero_pressure():
    g = Grid.periodic(2 * math.pi, 16, 2)
    p = gridops.poisson_solve(SampledField(g, np.zeros(g.shape), scalar=True))
    assert not p.data.any()


def test_periodic_poisson_example():
    g = Grid.periodic(2 * math.pi, 32, 2)
    X, Y = g.mesh
    p = gridops.poisson_solve(SampledField(g, -2 * np.sin(X) * np.sin(Y), scalar=True))
    assert np.abs(p.data - np.sin(X) * np.sin(Y)).max() < 1e-10


@given(st.integers(0, 2 ** 32 - 1))
def test_poisson_inverts_the_laplacian(seed):
    rng = np.random.default_rng(seed)
    g = Grid.periodic((1.0, 2.0, 3.0), 16, 3)
    # band-limited random scalar: zero the Nyquist planes so the inverse is unique
    hat = np.fft.fftn(rng.standard_normal(g.shape))
    for axis in range(3):
        idx = [slice(None)] * 3
        idx[axis] = 8
        hat[tuple(idx)] = 0
    q = np.real(np.fft.ifftn(hat))
    q -= q.mean()
    sf = SampledField(g, q, scalar=True)
    assert np.abs(gridops.poisson_solve(gridops.laplacian(sf)).data - q).max() < 1e-10


def test_periodic_poisson_removes_the_mean():
    g = Grid.periodic(2 * math.pi, 16, 2)
    X, _ = g.mesh
    p = gridops.poisson_solve(SampledField(g, 3 + np.cos(X), scalar=True))
    assert p.meta["removed_mean"] == pytest.approx(3.0)
    assert abs(p.data.mean()) < 1e-14
    assert np.abs(p.data + np.cos(X)).max() < 1e-12


def test_embedded_taylor_green_pressure_residual():
    g = Grid.periodic(2 * math.pi, 32, 2)
    u = gridops.sample(gallery("tg-embedded-2d"), g)
    conv = sum(u.data[j] * gridops.derivative(u.data, g, j) for j in range(2))
    rhs = -gridops.divergence(u._like(conv, False)).data
    p = gridops.poisson_solve(SampledField(g, rhs, scalar=True))
    assert np.abs(gridops.laplacian(p).data - rhs).max() < 1e-9


@pytest.mark.parametrize("n, tol", [(32, 1e-8), (64, 1e-13)])
def test_truncated_poisson_recovers_a_gaussian(n, tol):
    g = Grid.truncated(6.0, n)
    f, r2 = gaussian(g)
    p = gridops.poisson_solve(SampledField(g, (-6 + 4 * r2) * f, scalar=True))
    assert np.abs(p.data - f).max() < tol
    assert p.meta["wraparound_estimate"] < 1e-12


def _charged_potential(r, q):
    """Free-space potential of the charge density exp(-2 r^2), total charge q."""
    safe = np.where(r > 0, r, 1.0)
    erf = np.vectorize(math.erf)(math.sqrt(2) * safe)
    return np.where(r > 0, -q * erf / (4 * math.pi * safe), -q / (4 * math.pi) * 2 * math.sqrt(2 / math.pi))


def test_green_reference_matches_the_analytic_potential():
    g = Grid.truncated(6.0, 64)
    _, r2 = gaussian(g)
    sf = SampledField(g, np.exp(-2 * r2), scalar=True)
    targets = np.array([[0.05, 0.1, -0.07], [1.03, -0.4, 0.61], [2.2, 1.9, -0.3]])
    q = (math.pi / 2) ** 1.5
    exact = _charged_potential(np.linalg.norm(targets, axis=1), q)
    # direct quadrature of the 1/r kernel is only second order near the target
    np.testing.assert_allclose(gridops.green_reference(sf, targets), exact, rtol=2e-2)
    assert gridops.green_reference(sf, targets)[-1] == pytest.approx(exact[-1], rel=1e-8)


@pytest.mark.parametrize("n, shift, tol", [(32, 0.0, 1e-6), (32, 0.7, 1e-6), (64, 0.7, 1e-12)])
def test_truncated_poisson_handles_a_net_charge(n, shift, tol):
    g = Grid.truncated(6.0, n)
    X, Y, Z = g.mesh
    r = np.sqrt((X - shift) ** 2 + Y ** 2 + Z ** 2)
    p = gridops.poisson_solve(SampledField(g, np.exp(-2 * r ** 2), scalar=True))
    q = (math.pi / 2) ** 1.5
    assert np.abs(p.data - _charged_potential(r, q)).max() < tol
    assert p.meta["net_source"] == pytest.approx(q, rel=1e-9)


def test_truncated_poisson_rejects_non_decaying_source():
    g = Grid.truncated(2.0, 16)
    with pytest.raises(BoundaryError):
        gridops.poisson_solve(SampledField(g, np.ones(g.shape), scalar=True))


def test_green_reference_refuses_node_targets():
    g = Grid.truncated(2.0, 9)
    with pytest.raises(ValueError):
        gridops.green_reference(SampledField(g, np.ones(g.shape), scalar=True), [[0.0, 0.0, 0.0]])


# -- norms and quadrature ------------------------------------------------------------

def test_gaussian_energy_quadrature(oracles):
    g = Grid.truncated(6.0, 64)
    _, r2 = gaussian(g)
    value = gridops.integrate(np.exp(-2 * r2), g)
    assert value == pytest.approx(oracles["gaussian_energy"]["energy_exp_minus_2r2"], abs=1e-6)


def test_embedded_taylor_green_sup_vorticity():
    sf = gridops.sample(gallery("tg-embedded-2d"), Grid.periodic(2 * math.pi, 32, 2))
    assert gridops.norms(sf).sup_vorticity == pytest.approx(2.0, abs=1e-10)


def test_bkm_integral_against_closed_form(oracles):
    f = gallery("periodic-decay-3d")
    g = Grid.periodic(f.periods, 16, 3)
    value = gridops.bkm_integral(f, g, 0.0, 10.0, steps=400)
    assert value == pytest.approx(oracles["bkm"]["periodic_decay_0_10T"], rel=1e-3)


def test_bkm_argument_checks():
    f = gallery("periodic-decay-3d")
    g = Grid.periodic(f.periods, 8, 3)
    with pytest.raises(ValueError):
        gridops.bkm_integral(f, g, 1.0, 0.5)
    with pytest.raises(ValueError):
        gridops.bkm_integral(f, g, 0.0, 1.0, steps=1)


# -- serialization -------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["periodic", "truncated"])
def test_binary_round_trip(kind):
    g = Grid(kind, (1.5, 2.0), (8, 16))
    rng = np.random.default_rng(1)
    for scalar in (True, False):
        shape = g.shape if scalar else (2,) + g.shape
        sf = SampledField(g, rng.standard_normal(shape), t=0.25, scalar=scalar)
        back = SampledField.from_bytes(sf.to_bytes())
        assert back.grid == g and back.t == 0.25 and back.scalar == scalar
        assert np.array_equal(back.data, sf.data)


def test_binary_header_layout():
    g = Grid.periodic(2.0, 8, 1)
    blob = SampledField(g, np.arange(8.0)[None, :]).to_bytes()
    header = np.frombuffer(blob[:8 * 6], dtype="<f8")
    assert header.tolist() == [1, 0, 1, 8, 2.0, 0.0]
    assert np.frombuffer(blob[8 * 6:], dtype="<f8").tolist() == list(range(8))


def test_csv_export():
    g = Grid.periodic(2.0, 8, 2)
    text = SampledField(g, np.ones((2,) + g.shape)).to_csv()
    lines = text.splitlines()
    assert lines[0] == "x,y,c0,c1" and len(lines) == 65 and lines[1] == "0,0,1,1"
