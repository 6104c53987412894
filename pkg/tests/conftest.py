import numpy as np
import pytest

from stochwaves.spectral import make_grid

_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance line; printed in the terminal summary."""

    def _report(number, title, passed, detail):
        _ACCEPTANCE_LINES.append(
            f"criterion {number} {'PASS' if passed else 'FAIL'}: {title} ({detail})"
        )
        print(_ACCEPTANCE_LINES[-1])

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def grid2pi():
    return make_grid(2 * np.pi, 64)


@pytest.fixture
def desk_grid():
    return make_grid(100.0, 256)


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


def smooth_random(rng, grid, n_fields=1, kmax=6):
    """Random real fields band-limited to |k| <= kmax (in grid wavenumber units)."""
    nk = grid.n_modes // 2 + 1
    coeffs = rng.standard_normal((n_fields, nk)) + 1j * rng.standard_normal((n_fields, nk))
    coeffs[:, kmax + 1:] = 0.0
    coeffs[:, 0] = coeffs[:, 0].real
    out = np.fft.irfft(coeffs, n=grid.n_modes, axis=-1)
    return out / np.max(np.abs(out), axis=-1, keepdims=True)
