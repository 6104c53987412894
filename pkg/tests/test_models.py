import numpy as np
import pytest

from conftest import smooth_random
from stochwaves.errors import ConfigurationError, UsageError
from stochwaves.models import (
    AIRY,
    BBM,
    BOUSSINESQ,
    KINDS,
    MODIFIED_BBM,
    TWO_COMPONENT,
    WHITHAM,
    WHITHAM_BOUSSINESQ,
    ModelSpec,
    duhamel_nonlinearity,
    energy,
    ito_corrected_drift,
    linear_drift_symbol,
    make_model,
    noise_symbol,
    wb_duhamel_nonlinearity_closed_form,
    wb_ito_drift_closed_form,
)
from stochwaves.noise import gammas_from_epsilon
from stochwaves.spectral import make_grid

TANH1 = 0.76159415595576489


def small_state(model, rng, amp=0.1, kmax=6):
    return amp * smooth_random(rng, model.grid, model.n_components, kmax)


def test_aliases_and_defaults():
    assert ModelSpec("wb").kind == WHITHAM_BOUSSINESQ
    spec = ModelSpec(BBM, h=2.0)
    assert spec.b == pytest.approx(4.0 / 6.0)
    assert spec.a == 0.0
    assert ModelSpec(BOUSSINESQ, b=1.0 / 3.0).a == pytest.approx(-1.0 / 3.0)
    assert ModelSpec(WHITHAM).functional_name == "Q"


@pytest.mark.parametrize("kwargs", [
    {"kind": "kdv"}, {"kind": BBM, "b": 0.1}, {"kind": AIRY, "g": 0.0},
    {"kind": WHITHAM, "b": 0.5}, {"kind": BBM, "h": -1.0},
])
def test_spec_validation(kwargs):
    with pytest.raises(ConfigurationError):
        ModelSpec(**kwargs)


def test_airy_symbol_at_unit_wavenumber():
    A = linear_drift_symbol(ModelSpec(AIRY), np.array([1.0]))[0]
    np.testing.assert_allclose(A, [[0, -1j], [-1j * TANH1, 0]], atol=1e-15)


def test_bbm_symbol():
    a = linear_drift_symbol(ModelSpec(BBM), np.array([1.0]))
    assert a[0] == pytest.approx(-6j / 7)


@pytest.mark.parametrize("kind", [AIRY, WHITHAM_BOUSSINESQ])
def test_two_component_dispersion(kind):
    xi = np.linspace(-4, 4, 17)
    A = linear_drift_symbol(ModelSpec(kind, g=2.0, h=0.7), xi)
    eig = np.linalg.eigvals(A)
    omega = np.sqrt(2.0 * xi * np.tanh(0.7 * xi))
    np.testing.assert_allclose(np.sort(eig.imag, axis=-1), np.stack([-omega, omega], -1), atol=1e-12)
    np.testing.assert_allclose(eig.real, 0.0, atol=1e-12)


def test_noise_symbol():
    assert noise_symbol(ModelSpec(WHITHAM), 2.0, 0.5) == pytest.approx(1j)


def test_state_shape_check(desk_grid):
    model = make_model("wb", desk_grid)
    with pytest.raises(UsageError):
        model.drift_nonlinearity(np.zeros((1, 256)))
    with pytest.raises(UsageError):
        model.energy(np.zeros((2, 128)))


def test_airy_energy_single_mode(grid2pi):
    x = grid2pi.x
    model = make_model(AIRY, grid2pi)
    assert model.energy(np.stack([np.cos(x), 0 * x])) == pytest.approx(0.5 * np.pi, rel=1e-14)
    # h int (K^-1 v)^2 with K(1)^2 = tanh(1)
    assert model.energy(np.stack([0 * x, np.cos(x)])) == pytest.approx(0.5 * np.pi / TANH1, rel=1e-14)


def test_wb_energy_cubic_term(grid2pi):
    x = grid2pi.x
    model = make_model(WHITHAM_BOUSSINESQ, grid2pi)
    u = np.stack([np.ones_like(x), np.ones_like(x)])
    # g L / 2 + h L / 2 + L / 2
    assert energy(model, u) == pytest.approx(3 * np.pi, rel=1e-14)


def test_bbm_energy(grid2pi):
    model = make_model(BBM, grid2pi)
    r = np.cos(grid2pi.x)[None]
    assert model.energy(r) == pytest.approx(np.pi, rel=1e-14)  # cubic term integrates to zero


@pytest.mark.parametrize("kind", KINDS)
def test_energy_gradient_matches_finite_difference(kind, rng):
    model = make_model(kind, make_grid(40.0, 128))
    u, w = small_state(model, rng), small_state(model, rng)
    eps = 1e-4
    fd = (model.energy(u + eps * w) - model.energy(u - eps * w)) / (2 * eps)
    exact = model.grid.inner(model.energy_gradient(u), w).sum()
    assert fd == pytest.approx(exact, rel=1e-7)


@pytest.mark.parametrize("kind", KINDS)
def test_deterministic_flow_conserves_functional(kind, rng):
    model = make_model(kind, make_grid(40.0, 128))
    u = small_state(model, rng, amp=0.3, kmax=20)
    grad = model.energy_gradient(u)
    rate = model.grid.inner(grad, model.deterministic_rhs(u)).sum()
    scale = np.sqrt(model.grid.inner(grad, grad).sum() * model.grid.inner(u, u).sum())
    assert abs(rate) <= 1e-12 * scale


@pytest.mark.parametrize("kind", KINDS)
def test_noise_field_conserves_functional(kind, rng):
    model = make_model(kind, make_grid(40.0, 128))
    u = small_state(model, rng, amp=0.3, kmax=20)
    grad = model.energy_gradient(u)
    rate = model.grid.inner(grad, model.noise_field(u)).sum()
    scale = np.sqrt(model.grid.inner(grad, grad).sum() * model.grid.inner(u, u).sum())
    assert abs(rate) <= 1e-12 * scale


@pytest.mark.parametrize("kind", KINDS)
def test_ito_minus_duhamel_is_derivative_of_gn(kind, rng):
    model = make_model(kind, make_grid(40.0, 128))
    noise = gammas_from_epsilon(0.1, m=2)
    u = small_state(model, rng)
    diff = ito_corrected_drift(model, u, noise) - duhamel_nonlinearity(model, u, noise)
    expected = noise.gamma_squared * model.dx(model.noise_nonlinearity(u))
    np.testing.assert_allclose(diff, expected, atol=1e-14)


@pytest.mark.parametrize("kind", KINDS)
def test_noise_derivative_is_symmetric_bilinear(kind, rng):
    model = make_model(kind, make_grid(40.0, 128))
    u, w, z = (small_state(model, rng) for _ in range(3))
    np.testing.assert_allclose(model.noise_derivative(u, w), model.noise_derivative(w, u), atol=1e-14)
    np.testing.assert_allclose(model.noise_derivative(u, 2 * w + z),
                               2 * model.noise_derivative(u, w) + model.noise_derivative(u, z),
                               atol=1e-13)


def test_linear_noise_only_drops_gn(desk_grid, rng):
    model = make_model("wb", desk_grid, linear_noise_only=True)
    u = small_state(model, rng)
    assert np.all(model.noise_nonlinearity(u) == 0)
    noise = gammas_from_epsilon(0.1)
    np.testing.assert_array_equal(model.ito_corrected_drift(u, noise), model.drift_nonlinearity(u))


def test_airy_has_no_nonlinearity(desk_grid, rng):
    model = make_model(AIRY, desk_grid)
    u = small_state(model, rng)
    assert np.all(model.drift_nonlinearity(u) == 0)
    assert np.all(model.noise_nonlinearity(u) == 0)


def test_wb_closed_forms_match_generic(desk_grid, rng):
    model = make_model("wb", desk_grid)
    noise = gammas_from_epsilon(0.1)
    u = small_state(model, rng, amp=0.2, kmax=30)
    for closed, generic in ((wb_ito_drift_closed_form, ito_corrected_drift),
                            (wb_duhamel_nonlinearity_closed_form, duhamel_nonlinearity)):
        a, b = closed(model, u, noise), generic(model, u, noise)
        assert np.linalg.norm(a - b) <= 1e-12 * np.linalg.norm(b)


def test_closed_forms_reject_other_models(desk_grid):
    with pytest.raises(UsageError):
        wb_ito_drift_closed_form(make_model(BBM, desk_grid), np.zeros((1, 256)), gammas_from_epsilon(0.1))


def test_whitham_nonlinearity_on_single_mode(grid2pi):
    # f = -(3/4h) sqrt(gh) d/dx r^2 with r = cos x: r^2 = (1 + cos 2x) / 2
    model = make_model(WHITHAM, grid2pi)
    r = np.cos(grid2pi.x)[None]
    np.testing.assert_allclose(model.drift_nonlinearity(r)[0], 0.75 * np.sin(2 * grid2pi.x), atol=1e-13)


def test_dealias_removes_upper_third(rng):
    grid = make_grid(2 * np.pi, 48)
    model = make_model(MODIFIED_BBM, grid, dealias=True)
    r = np.cos(10 * grid.x)[None]  # r^2 has a mode at 20 > 48/3
    np.testing.assert_allclose(model.drift_nonlinearity(r), 0.0, atol=1e-14)
    assert np.max(np.abs(make_model(MODIFIED_BBM, grid).drift_nonlinearity(r))) > 1e-3


@pytest.mark.parametrize("kind", TWO_COMPONENT)
def test_mass(kind, grid2pi):
    model = make_model(kind, grid2pi)
    u = np.stack([1 + np.cos(grid2pi.x), 2 + np.sin(grid2pi.x)])
    np.testing.assert_allclose(model.mass(u), [2 * np.pi, 4 * np.pi], rtol=1e-14)


@pytest.mark.parametrize("kind", KINDS)
def test_symbols_vanish_at_zero_wavenumber(kind):
    A = linear_drift_symbol(ModelSpec(kind), np.array([0.0]))
    assert np.all(A == 0)


def test_noise_symbol_desk_value():
    value = noise_symbol(ModelSpec(WHITHAM_BOUSSINESQ), 2 * np.pi / 200, 0.4472)
    assert value.real == 0
    assert value.imag == pytest.approx(0.014050, rel=1e-4)


@pytest.mark.parametrize("kind", KINDS)
def test_nonlinearities_vanish_on_constants(kind, grid2pi):
    model = make_model(kind, grid2pi)
    zero = np.zeros((model.n_components, 64))
    const = np.full((model.n_components, 64), 0.3)
    noise = gammas_from_epsilon(0.1)
    for u in (zero, const):
        for out in (model.drift_nonlinearity(u), model.noise_nonlinearity(u),
                    ito_corrected_drift(model, u, noise), duhamel_nonlinearity(model, u, noise)):
            np.testing.assert_allclose(out, 0.0, atol=1e-15)
    assert model.energy(zero) == 0.0


@pytest.mark.parametrize("kind", KINDS)
def test_no_noise_means_no_correction(kind, rng):
    model = make_model(kind, make_grid(40.0, 128))
    u = small_state(model, rng)
    zero = gammas_from_epsilon(0.0)
    np.testing.assert_array_equal(ito_corrected_drift(model, u, zero), model.drift_nonlinearity(u))
    np.testing.assert_array_equal(duhamel_nonlinearity(model, u, zero), model.drift_nonlinearity(u))


def test_wb_energy_single_mode(grid2pi):
    model = make_model(WHITHAM_BOUSSINESQ, grid2pi)
    assert model.energy(np.stack([np.cos(grid2pi.x), 0 * grid2pi.x])) == pytest.approx(
        0.5 * np.pi, rel=1e-14)


def test_bbm_gprime_g_closed_form(rng):
    # gn'(r) gn(r) = (9 / 8 h^2) d/dx (r d/dx r^2)
    grid = make_grid(40.0, 128)
    model = make_model(BBM, grid, h=1.5)
    r = 0.2 * smooth_random(rng, grid, 1, 10)
    expected = 9 / (8 * 1.5**2) * model.dx(r * model.dx(r * r))
    np.testing.assert_allclose(model.gprime_g(r), expected, atol=1e-14)
