import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import smooth_random
from stochwaves.diagnostics import (
    ObserverSeries,
    bbm_h1_drift_prediction,
    conserved_functional,
    dno_g0,
    dno_g1,
    energy_full_truncated,
    hs_norm_squared,
    wb_velocity_from_potential,
    xs_norm,
)
from stochwaves.errors import ConfigurationError, UsageError
from stochwaves.integrators import duhamel_propagator
from stochwaves.models import AIRY, make_model
from stochwaves.noise import gammas_from_epsilon
from stochwaves.spectral import make_grid

TANH1 = 0.76159415595576489
GAMMA = 0.44721359549995794
# int_0^{2 pi} (d/dx (cos x + sin 2x))^3 dx by quadrature
CUBE_INTEGRAL = -9.4247779607693797


def test_xs_norm_values(grid2pi):
    x = grid2pi.x
    assert xs_norm(np.zeros((2, 64)), 1, grid2pi) == 0.0
    assert xs_norm(np.stack([np.cos(x), 0 * x]), 0, grid2pi) == pytest.approx(np.sqrt(np.pi), rel=1e-14)
    assert xs_norm(np.stack([np.cos(x), 0 * x]), 1, grid2pi) == pytest.approx(np.sqrt(2 * np.pi), rel=1e-14)


def test_xs_norm_needs_two_components(grid2pi):
    with pytest.raises(UsageError):
        xs_norm(np.zeros((1, 64)), 0, grid2pi)


def test_hs_norm_s0_is_l2(grid2pi, rng):
    f = rng.standard_normal(64)
    assert hs_norm_squared(f, 0, grid2pi) == pytest.approx(grid2pi.inner(f, f), rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.0, 20.0), st.floats(-3, 3), st.sampled_from([0, 1, 2]))
def test_airy_flow_preserves_xs_norm(seed, t, dW, s):
    grid = make_grid(30.0, 64)
    u = smooth_random(np.random.default_rng(seed), grid, 2, 12)
    P = duhamel_propagator(make_model(AIRY, grid), t, np.array([dW]), gammas_from_epsilon(0.1))
    assert xs_norm(P.apply(u, grid), s, grid) == pytest.approx(xs_norm(u, s, grid), rel=1e-12)


def test_h1_drift_prediction_quadrature_oracle(grid2pi):
    x = grid2pi.x
    model = make_model("bbm", grid2pi)
    noise = gammas_from_epsilon(0.1)
    coeff = bbm_h1_drift_prediction(np.cos(x) + np.sin(2 * x), model, noise)
    assert coeff[0] == pytest.approx(1.5 * (1 / 6) * GAMMA * CUBE_INTEGRAL, rel=1e-12)
    assert abs(bbm_h1_drift_prediction(np.cos(x) + np.cos(2 * x), model, noise)[0]) < 1e-14


def test_h1_drift_prediction_trivial_cases(desk_grid):
    model = make_model("bbm", desk_grid)
    bump = 0.2 / np.cosh(desk_grid.x) ** 2
    assert abs(bbm_h1_drift_prediction(bump, model, gammas_from_epsilon(0.1))[0]) < 1e-15
    r = np.exp(-((desk_grid.x - 1) / 3) ** 2) * np.sin(desk_grid.x)
    assert np.all(bbm_h1_drift_prediction(r, model, gammas_from_epsilon(0.0)) == 0)


def test_h1_drift_prediction_needs_a_zero(grid2pi):
    with pytest.raises(UsageError):
        bbm_h1_drift_prediction(np.cos(grid2pi.x), make_model("bbm", grid2pi, b=1 / 3),
                                gammas_from_epsilon(0.1))
    with pytest.raises(UsageError):
        bbm_h1_drift_prediction(np.cos(grid2pi.x), make_model("whitham", grid2pi),
                                gammas_from_epsilon(0.1))


def test_conserved_functional(grid2pi):
    model = make_model("bbm", grid2pi, b=1 / 3)
    r = np.cos(grid2pi.x)[None]
    assert conserved_functional(model, r, "h1") == pytest.approx(np.pi * (1 + 1 / 3), rel=1e-14)
    assert conserved_functional(model, r) == model.energy(r)
    with pytest.raises(UsageError):
        conserved_functional(make_model("whitham", grid2pi), r, "h1")
    with pytest.raises(ConfigurationError):
        conserved_functional(model, r, "momentum")


def test_g0_values(grid2pi):
    x = grid2pi.x
    np.testing.assert_allclose(dno_g0(np.full(64, 3.0), grid2pi), 0.0, atol=1e-14)
    np.testing.assert_allclose(dno_g0(np.cos(x), grid2pi), TANH1 * np.cos(x), atol=1e-14)


def test_g0_positive_and_self_adjoint(grid2pi, rng):
    a, b = rng.standard_normal((2, 64))
    assert grid2pi.inner(a, dno_g0(a, grid2pi)) >= 0
    assert grid2pi.inner(a, dno_g0(b, grid2pi)) == pytest.approx(grid2pi.inner(dno_g0(a, grid2pi), b),
                                                                 abs=1e-12)


def test_g1_trivial_cases(grid2pi, rng):
    phi = rng.standard_normal(64)
    np.testing.assert_array_equal(dno_g1(np.zeros(64), phi, grid2pi), 0.0)
    np.testing.assert_allclose(dno_g1(rng.standard_normal(64), np.ones(64), grid2pi), 0.0, atol=1e-13)


def test_g1_self_adjoint(desk_grid, rng):
    eta, phi, psi = smooth_random(rng, desk_grid, 3, 30)
    lhs = desk_grid.inner(psi, dno_g1(eta, phi, desk_grid))
    rhs = desk_grid.inner(dno_g1(eta, psi, desk_grid), phi)
    assert abs(lhs - rhs) <= 1e-10 * desk_grid.inner(phi, phi)


def test_g1_grid_mismatch(grid2pi):
    with pytest.raises(UsageError):
        dno_g1(np.zeros(32), np.zeros(64), grid2pi)


def test_full_energy_values(grid2pi):
    assert energy_full_truncated(np.zeros(64), np.zeros(64), grid2pi) == 0.0
    value = energy_full_truncated(np.zeros(64), np.cos(grid2pi.x), grid2pi)
    assert value == pytest.approx(0.5 * TANH1 * np.pi, rel=1e-14)


def test_full_energy_quadratic_part_is_wb(desk_grid, rng):
    eta, phi = 1e-3 * smooth_random(rng, desk_grid, 2, 20)
    v = wb_velocity_from_potential(phi, desk_grid)
    H_wb = make_model("wb", desk_grid).energy(np.stack([eta, v]))
    H_full = energy_full_truncated(eta, phi, desk_grid)
    # the two differ by cubic terms only: relative size O(amplitude)
    assert abs(H_full - H_wb) <= 1e-2 * H_wb


def test_observer_series_roundtrip(tmp_path):
    series = ObserverSeries("energy", [0.0, 0.5, 1.0], [1.0, 1.0 + 1e-9, 1.0 - 2e-9],
                            {"seed": 3, "scheme": "duhamel-milstein"})
    series.to_csv(tmp_path / "e.csv")
    back = ObserverSeries.from_csv(tmp_path / "e.csv")
    np.testing.assert_array_equal(back.values, series.values)
    assert back.meta == {"seed": 3, "scheme": "duhamel-milstein"}
    assert series.relative_drift() == pytest.approx(2e-9)


def test_observer_series_invariants():
    with pytest.raises(UsageError):
        ObserverSeries("e", [0.0, 0.0], [1.0, 1.0])
    with pytest.raises(UsageError):
        ObserverSeries("e", [0.0, 1.0], [1.0, np.nan])
