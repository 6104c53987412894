"""Initial data and reference solutions.

Solitary waves are computed with Petviashvili's iteration: for a traveling wave
``P u = N(u)`` with ``P`` linear and ``N`` quadratic, iterate

    u <- m(u)**2 P^{-1} N(u),    m(u) = <u, P u> / <u, N(u)>

which removes the single unstable direction of the plain fixed-point map.

The exact stochastic Airy flow is a random spatial translation of the
deterministic one; :func:`airy_exact` and :func:`shifted_deterministic` compute
the two sides of that identity by independent routes.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, SolverError, UsageError
from .integrators import duhamel_propagator
from .models import (
    AIRY,
    BBM,
    FD_UNIDIRECTIONAL,
    MODIFIED_BBM,
    UNIDIRECTIONAL,
    WHITHAM,
    Model,
    ModelSpec,
)
from .noise import BrownianPath, NoiseSpec
from .spectral import Grid, eval_symbol_K, spatial_shift

log = logging.getLogger(__name__)


@dataclass
class TravelingWave:
    profile: np.ndarray          # shape (n_components, N)
    speed: float
    residual: float
    iterations: int = 0
    history: list = field(default_factory=list)
    grid: Grid | None = None

    def to_csv(self, path, names=None):
        """Columns ``x`` then one per component, 17 significant digits."""
        names = names or [f"u{i}" for i in range(self.profile.shape[0])]
        data = np.column_stack([self.grid.x, *self.profile])
        np.savetxt(path, data, delimiter=",", header=",".join(["x", *names]),
                   comments="", fmt="%.17g")


def _unidirectional_symbols(spec: ModelSpec, xi):
    """``(L, M)`` with ``c r = L r + (3/4h) M r^2`` for the traveling wave."""
    g, h = spec.g, spec.h
    c0 = np.sqrt(g * h)
    if spec.kind == BBM:
        ka = 1.0 + abs(spec.a) * xi**2
        kb = 1.0 + spec.b * xi**2
        lin = np.sqrt(g * h * ka) / kb
        return lin, lin
    if spec.kind == MODIFIED_BBM:
        ka = 1.0 + abs(spec.a) * xi**2
        kb = 1.0 + spec.b * xi**2
        return c0 * np.sqrt(ka) / kb, c0 * ka / kb**2
    K = eval_symbol_K(xi, h)
    if spec.kind == FD_UNIDIRECTIONAL:
        return c0 * K, c0 * K
    if spec.kind == WHITHAM:
        return c0 * K, c0 * np.ones_like(xi)
    raise UsageError(f"{spec.kind!r} is not a unidirectional model")


def kdv_solitary(x, c, g=1.0, h=1.0, x0=0.0):
    """Long-wave limit ``A sech^2(kappa (x - x0))`` shared by all models here.

    With ``c = sqrt(g h) (1 + delta)``: ``A = 2 h delta``, ``kappa = sqrt(3 delta / 2) / h``.
    """
    delta = c / np.sqrt(g * h) - 1.0
    kappa = np.sqrt(1.5 * delta) / h
    return 2.0 * h * delta / np.cosh(kappa * (np.asarray(x) - x0)) ** 2


def _check_supercritical(c, g, h):
    if not c > np.sqrt(g * h):
        raise ConfigurationError(
            f"solitary waves need a supercritical speed c > sqrt(g h) = {np.sqrt(g * h):g}, got {c}"
        )


def solve_solitary_unidirectional(
    model: Model, c: float, tol: float = 1e-10, max_iter: int = 500, initial=None
) -> TravelingWave:
    """Solitary wave of speed ``c`` for a unidirectional model."""
    spec, grid = model.spec, model.grid
    if spec.kind not in UNIDIRECTIONAL:
        raise UsageError(f"{spec.kind!r} is not a unidirectional model")
    _check_supercritical(c, spec.g, spec.h)
    lin, nl = _unidirectional_symbols(spec, grid.rxi)
    P = c - lin
    Nsym = 3.0 / (4.0 * spec.h) * nl
    w = grid.rfft_weights

    r = kdv_solitary(grid.x, c, spec.g, spec.h) if initial is None else np.array(initial, float)
    r = r.reshape(-1)
    history = []
    for it in range(1, max_iter + 1):
        rh = grid.rfft(r)
        Nh = Nsym * grid.rfft(r * r)
        num = np.sum(w * P * np.abs(rh) ** 2)
        den = np.sum(w * np.real(np.conj(rh) * Nh))
        if den == 0:
            raise SolverError("Petviashvili iteration collapsed to zero", None, it)
        r = grid.irfft((num / den) ** 2 * Nh / P)
        rh = grid.rfft(r)
        Prh = P * rh
        res = np.sqrt(np.sum(w * np.abs(Prh - Nsym * grid.rfft(r * r)) ** 2)
                      / np.sum(w * np.abs(Prh) ** 2))
        history.append(float(res))
        if res <= tol:
            break
    else:
        raise SolverError(
            f"Petviashvili iteration did not reach {tol:g} in {max_iter} iterations"
            f" (last residual {history[-1]:.3e})", history[-1], max_iter,
        )
    return TravelingWave(r[None, :], float(c), history[-1], it, history, grid)


def wb_traveling_residual(u, c, grid: Grid, g=1.0, h=1.0):
    """Relative residual of ``c eta = h v + K^2(eta v)``, ``c v = g K^2 eta + K^2(v^2/2)``."""
    P, Nop = _wb_operators(c, grid, g, h)
    uh = grid.rfft(u)
    Pu = _apply2(P, uh)
    Nu = Nop(u)
    w = grid.rfft_weights
    return float(np.sqrt(np.sum(w * np.abs(Pu - Nu) ** 2) / np.sum(w * np.abs(Pu) ** 2)))


def _wb_operators(c, grid, g, h):
    K2 = eval_symbol_K(grid.rxi, h) ** 2
    P = np.array([[np.full_like(K2, c), np.full_like(K2, -h)], [-g * K2, np.full_like(K2, c)]])

    def Nop(u):
        eta, v = u
        return np.stack([K2 * grid.rfft(eta * v), K2 * grid.rfft(0.5 * v * v)])

    return P, Nop


def _apply2(P, uh):
    return np.stack([P[0, 0] * uh[0] + P[0, 1] * uh[1], P[1, 0] * uh[0] + P[1, 1] * uh[1]])


def solitary_seed_wb(
    c: float, grid: Grid, g: float = 1.0, h: float = 1.0,
    max_sweeps: int = 50, tol: float = 1e-8, accept: float = 1e-5,
) -> TravelingWave:
    """Whitham-Boussinesq solitary wave ``(eta, v)`` of speed ``c``.

    The Whitham solitary wave ``r`` is lifted to the right-moving pair
    ``eta = r``, ``v = sqrt(g/h) K r`` and then refined by Petviashvili sweeps on
    the two-component traveling-wave system.  The final residual is reported;
    residuals between ``tol`` and ``accept`` only warn.
    """
    _check_supercritical(c, g, h)
    whitham = Model(ModelSpec(WHITHAM, g, h), grid)
    r = solve_solitary_unidirectional(whitham, c).profile[0]
    K = eval_symbol_K(grid.rxi, h)
    u = np.stack([r, grid.irfft(np.sqrt(g / h) * K * grid.rfft(r))])

    P, Nop = _wb_operators(c, grid, g, h)
    det = P[0, 0] * P[1, 1] - P[0, 1] * P[1, 0]
    Pinv = np.array([[P[1, 1], -P[0, 1]], [-P[1, 0], P[0, 0]]]) / det
    w = grid.rfft_weights
    history = [wb_traveling_residual(u, c, grid, g, h)]
    sweeps = 0
    while history[-1] > tol and sweeps < max_sweeps:
        uh = grid.rfft(u)
        Nh = Nop(u)
        num = np.sum(w * np.real(np.conj(uh) * _apply2(P, uh)))
        den = np.sum(w * np.real(np.conj(uh) * Nh))
        u = grid.irfft(_apply2(Pinv, (num / den) ** 2 * Nh))
        sweeps += 1
        history.append(wb_traveling_residual(u, c, grid, g, h))
    res = history[-1]
    if res > accept:
        raise SolverError(f"WB solitary refinement stalled at residual {res:.3e}", res, sweeps)
    if res > tol:
        warnings.warn(f"WB solitary seed residual {res:.2e} exceeds {tol:g}", RuntimeWarning)
    log.info("WB solitary seed c=%g: residual %.3e after %d sweeps", c, res, sweeps)
    return TravelingWave(u, float(c), res, sweeps, history, grid)


def airy_model(grid: Grid, g=1.0, h=1.0) -> Model:
    return Model(ModelSpec(AIRY, g, h), grid)


def airy_exact(u0, t, path: BrownianPath, grid: Grid, g=1.0, h=1.0, noise: NoiseSpec = None,
               dt=None):
    """Exact stochastic Airy solution at time ``t`` for the Brownian ``path``.

    ``t`` must lie on the path's time grid (or be given with ``dt=`` for a path
    whose endpoint is ``t``).
    """
    u0 = np.asarray(u0, dtype=float)
    if u0.shape[-2] != 2:
        raise UsageError("Airy states have two components (eta, v)")
    W = _path_total(path, t)
    model = airy_model(grid, g, h)
    return duhamel_propagator(model, t, W, noise).apply(u0, grid)


def _path_total(path: BrownianPath, t):
    n = int(round(t / path.dt))
    if abs(n * path.dt - t) > 1e-9 * max(t, path.dt) or n > path.n_steps:
        raise ConfigurationError(f"t = {t} is not a time of the path (dt = {path.dt})")
    return path.total(n)


def airy_deterministic(u0, t, grid: Grid, g=1.0, h=1.0):
    """Deterministic Airy flow through its diagonal (right/left mover) form.

    With ``kappa = sqrt(g/h) K`` the eigenvectors ``(1, +-kappa)`` carry phases
    ``exp(-+ i t U sgn xi)``, ``U = sqrt(g xi tanh(h xi))``.
    """
    u0 = np.asarray(u0, dtype=float)
    xi = grid.rxi
    kappa = np.sqrt(g / h) * eval_symbol_K(xi, h)
    U = np.sqrt(g * xi * np.tanh(h * xi))
    eh, vh = grid.rfft(u0[..., 0, :]), grid.rfft(u0[..., 1, :])
    right = 0.5 * (eh + vh / kappa) * np.exp(-1j * t * U)
    left = 0.5 * (eh - vh / kappa) * np.exp(1j * t * U)
    # Nyquist: keep the real (cosine) part of the phases
    right[..., -1] = 0.5 * (eh[..., -1] + vh[..., -1] / kappa[-1]) * np.cos(t * U[-1])
    left[..., -1] = 0.5 * (eh[..., -1] - vh[..., -1] / kappa[-1]) * np.cos(t * U[-1])
    return np.stack([grid.irfft(right + left), grid.irfft(kappa * (right - left))], axis=-2)


def shifted_deterministic(eta_det, path: BrownianPath, noise: NoiseSpec, t, grid: Grid):
    """``eta_det(x + sum_j gamma_j W_j(t))``."""
    alpha = float(noise.combined(_path_total(path, t)))
    return spatial_shift(eta_det, alpha, grid)


def gaussian_bump(grid: Grid, amplitude=0.1, width=2.0, center=0.0):
    return amplitude * np.exp(-(((grid.x - center) / width) ** 2))
