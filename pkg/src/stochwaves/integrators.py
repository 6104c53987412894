"""Exponential stochastic integrators and the per-mode propagators they share.

All three steppers advance ``du = (A u + f) dt + sum_j gamma_j (d/dx u + gn) o dW_j``
with fixed steps.  Because every noise operator is ``gamma_j d/dx`` times the
identity, it commutes with ``A`` and the linear stochastic flow factorises per
wavenumber as ``exp(A dt) * exp(i xi sum_j gamma_j dW_j)``.

* ``mild-euler``: ``e^{A~ dt} (u + F dt + (d/dx u + gn) sum gamma dW)``
* ``duhamel-euler``: ``S (u + f~ dt + gn sum gamma dW)``
* ``duhamel-milstein``: ``S (u + f dt + gn sum gamma dW + gn' gn (sum gamma dW)^2 / 2)``

States may carry leading ensemble axes; increments then carry the same axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import BlowUpError, ConfigurationError, UsageError
from .models import Model, linear_drift_symbol
from .noise import BrownianPath, NoiseSpec, sample_path, stack_increments
from .spectral import nyquist_real

BLOWUP_FACTOR = 1e6

MILD_EULER = "mild-euler"
DUHAMEL_EULER = "duhamel-euler"
DUHAMEL_MILSTEIN = "duhamel-milstein"
SCHEMES = (MILD_EULER, DUHAMEL_EULER, DUHAMEL_MILSTEIN)


def linear_exponential(A, t):
    """``exp(A t)`` for stacks of 1x1 or off-diagonal 2x2 matrices ``A[..., c, c]``.

    For ``A = [[0, a12], [a21, 0]]`` one has ``A^2 = -U^2 I`` with
    ``U^2 = -a12 a21 >= 0``, so ``exp(A t) = cos(U t) I + t sinc(U t) A``.
    """
    A = np.asarray(A, dtype=complex)
    c = A.shape[-1]
    if c == 1:
        return np.exp(A * t)
    if c != 2 or np.any(A[..., 0, 0] != 0) or np.any(A[..., 1, 1] != 0):
        raise UsageError("closed-form exponential needs 1x1 or zero-diagonal 2x2 symbols")
    U2 = -(A[..., 0, 1] * A[..., 1, 0])
    U = np.sqrt(np.maximum(U2.real, 0.0))
    cos = np.cos(U * t)
    # sin(U t) / U with its limit t at U = 0
    sinc = t * np.sinc(U * t / np.pi)
    out = A * sinc[..., None, None]
    out[..., 0, 0] += cos
    out[..., 1, 1] += cos
    return out


@dataclass
class Propagator:
    """Per-mode linear flow ``matrix[k] * scalar[..., k]`` on the real-transform modes.

    ``matrix`` holds ``exp(A dt)`` (shape ``(n_k, c, c)``); ``scalar`` holds the
    noise factor, a phase for the Duhamel flow or a damping for the mild flow,
    and may carry ensemble axes.
    """

    matrix: np.ndarray
    scalar: np.ndarray
    dt: float
    increments: np.ndarray | None = None

    def full(self):
        """Dense per-mode matrices, shape ``scalar.shape + (c, c)``."""
        return self.matrix * self.scalar[..., None, None]

    def apply_hat(self, uh):
        M = np.moveaxis(self.matrix, 0, -1)  # (c, c, k)
        if M.shape[0] == 1:
            out = M[0, 0] * uh
        else:
            out = np.stack([M[0, 0] * uh[..., 0, :] + M[0, 1] * uh[..., 1, :],
                            M[1, 0] * uh[..., 0, :] + M[1, 1] * uh[..., 1, :]], axis=-2)
        return out * self.scalar[..., None, :]

    def apply(self, u, grid):
        return grid.irfft(self.apply_hat(grid.rfft(u)))

    def __matmul__(self, other: "Propagator") -> "Propagator":
        inc = None
        if self.increments is not None and other.increments is not None:
            inc = self.increments + other.increments
        return Propagator(np.einsum("kij,kjl->kil", self.matrix, other.matrix),
                          self.scalar * other.scalar, self.dt + other.dt, inc)


def _matrix_on(model: Model, dt, xi):
    if xi is None:
        key = ("expA", float(dt))
        M = model._cache.get(key)
        if M is None:
            M = linear_exponential(model.A, dt)
            M[-1] = M[-1].real  # Nyquist convention: real part of every entry
            model._cache[key] = M
        return M, model.xi
    xi = np.asarray(xi, dtype=float)
    A = linear_drift_symbol(model.spec, xi)
    if A.ndim == xi.ndim:
        A = A[..., None, None]
    return linear_exponential(A, dt), xi


def duhamel_propagator(model: Model, dt, dW, noise: NoiseSpec, xi=None) -> Propagator:
    """Exact flow ``exp(A dt + sum_j B_j dW_j)`` of the linear stochastic system.

    ``dW`` has shape ``(..., m)``.  With ``xi=None`` the propagator lives on the
    model grid (Nyquist convention applied); otherwise it is evaluated at the
    given wavenumbers.
    """
    M, xis = _matrix_on(model, dt, xi)
    theta = np.asarray(noise.combined(dW), dtype=float)
    phase = np.exp(1j * xis * theta[..., None])
    if xi is None:
        phase = nyquist_real(phase)
    return Propagator(M, phase, float(dt), np.asarray(dW, dtype=float))


def mild_propagator(model: Model, dt, noise: NoiseSpec, xi=None) -> Propagator:
    """``exp(A~ dt)`` with ``A~ = A - 0.5 sum gamma^2 xi^2``."""
    M, xis = _matrix_on(model, dt, xi)
    damp = np.exp(-0.5 * noise.gamma_squared * xis**2 * dt).astype(complex)
    return Propagator(M, damp, float(dt))


def _theta(noise, dW):
    return np.asarray(noise.combined(dW), dtype=float)[..., None, None]


def step_mild_euler(model: Model, u, dt, dW, noise: NoiseSpec):
    theta = _theta(noise, dW)
    F = model.ito_corrected_drift(u, noise)
    stoch = model.dx(u) + model.noise_nonlinearity(u)
    key = ("mild", float(dt), noise.gamma_squared)
    P = model._cache.get(key)
    if P is None:
        P = model._cache[key] = mild_propagator(model, dt, noise)
    return P.apply(u + F * dt + stoch * theta, model.grid)


def step_duhamel_euler(model: Model, u, dt, dW, noise: NoiseSpec):
    theta = _theta(noise, dW)
    v = u + model.duhamel_nonlinearity(u, noise) * dt + model.noise_nonlinearity(u) * theta
    return duhamel_propagator(model, dt, dW, noise).apply(v, model.grid)


def step_duhamel_milstein(model: Model, u, dt, dW, noise: NoiseSpec):
    theta = _theta(noise, dW)
    gn = model.noise_nonlinearity(u)
    v = u + model.drift_nonlinearity(u) * dt + gn * theta
    if noise.gamma_squared:
        v = v + 0.5 * model.noise_derivative(u, gn) * theta**2
    return duhamel_propagator(model, dt, dW, noise).apply(v, model.grid)


STEPPERS: dict[str, Callable] = {
    MILD_EULER: step_mild_euler,
    DUHAMEL_EULER: step_duhamel_euler,
    DUHAMEL_MILSTEIN: step_duhamel_milstein,
}


def get_stepper(scheme: str):
    try:
        return STEPPERS[scheme]
    except KeyError:
        raise ConfigurationError(f"unknown scheme {scheme!r}; choose from {SCHEMES}") from None


# -- trajectories ---------------------------------------------------------------


def _observer_energy(model, u):
    return model.energy(u)


def _observer_mass(model, u):
    return model.mass(u)[..., 0]


def _observer_l2(model, u):
    return np.sqrt(model.grid.inner(u, u).sum(axis=-1))


def _observer_max_eta(model, u):
    return np.max(u[..., 0, :], axis=-1)


OBSERVERS: dict[str, Callable] = {
    "energy": _observer_energy,
    "mass": _observer_mass,
    "l2": _observer_l2,
    "max": _observer_max_eta,
}


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    observers: dict = field(default_factory=dict)
    scheme: str = ""
    dt: float = 0.0
    seeds: tuple = ()

    @property
    def final(self):
        return self.states[-1]


def n_steps_for(T, dt) -> int:
    if dt <= 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    if T < 0:
        raise ConfigurationError(f"final time must be >= 0, got {T}")
    n = int(round(T / dt))
    if abs(n * dt - T) > 1e-9 * max(T, dt):
        raise ConfigurationError(f"T = {T} is not an integer multiple of dt = {dt}")
    return n


def _increments(path, n, dt, m, seed):
    if path is None:
        path = sample_path(0 if seed is None else seed, n, dt, m)
    if isinstance(path, BrownianPath):
        paths = [path]
        inc = path.increments[:, None, :]
        single = True
    elif isinstance(path, np.ndarray):
        inc = path if path.ndim == 3 else path[:, None, :]
        return inc[:n], path.ndim != 3, ()
    else:
        paths = list(path)
        inc = stack_increments(paths)
        single = False
    for p in paths:
        if abs(p.dt - dt) > 1e-12 * dt:
            raise ConfigurationError(f"path step {p.dt} does not match dt = {dt}")
    if inc.shape[0] < n:
        raise ConfigurationError(f"path has {inc.shape[0]} steps, need {n}")
    if inc.shape[-1] != m:
        raise ConfigurationError(f"path has {inc.shape[-1]} components, noise has {m}")
    return inc[:n], single, tuple(p.seed for p in paths)


def simulate(
    model: Model,
    u0,
    T: float,
    dt: float,
    scheme: str,
    noise: NoiseSpec,
    path: BrownianPath | Sequence[BrownianPath] | None = None,
    seed: int | None = None,
    observers: Sequence[str] | Mapping[str, Callable] = ("energy",),
    stride: int = 1,
    keep_states: bool = True,
) -> Trajectory:
    """Advance ``u0`` to time ``T`` with fixed step ``dt``.

    ``path`` may be one path, an ensemble (sequence of equal-length paths) or
    ``None`` (a path is sampled from ``seed``).  An ensemble advances all members
    together along a leading axis.  States and observers are recorded every
    ``stride`` steps and at ``T``.

    Raises :class:`BlowUpError` (with ``last_state``) if the state becomes
    non-finite or its L2 norm grows beyond ``1e6`` times the initial norm.
    """
    stepper = get_stepper(scheme)
    u = model.check_state(u0)
    n = n_steps_for(T, dt)
    inc, single, seeds = _increments(path, n, dt, noise.m, seed)
    if not single:
        u = np.broadcast_to(u, (inc.shape[1],) + u.shape[-2:]).copy()
    if isinstance(observers, Mapping):
        obs = dict(observers)
    else:
        obs = {name: OBSERVERS[name] for name in observers}
    stride = max(int(stride), 1)

    times, states = [0.0], [u.copy()] if keep_states else []
    values = {name: [fn(model, u)] for name, fn in obs.items()}
    norm0 = np.sqrt(np.sum(u * u, axis=(-2, -1)))
    limit = BLOWUP_FACTOR * np.where(norm0 > 0, norm0, 1.0)

    for k in range(n):
        dW = inc[k, 0] if single else inc[k]
        new = stepper(model, u, dt, dW, noise)
        norm = np.sqrt(np.sum(new * new, axis=(-2, -1)))
        if not np.all(np.isfinite(new)) or np.any(norm > limit):
            raise BlowUpError(
                f"{scheme} blew up at step {k + 1} (t = {(k + 1) * dt:g})",
                step=k + 1, last_state=u, time=k * dt,
            )
        u = new
        if (k + 1) % stride == 0 or k + 1 == n:
            times.append((k + 1) * dt)
            if keep_states:
                states.append(u.copy())
            for name, fn in obs.items():
                values[name].append(fn(model, u))

    if not keep_states:
        states = [u]
    return Trajectory(
        times=np.asarray(times),
        states=np.asarray(states),
        observers={k: np.asarray(v) for k, v in values.items()},
        scheme=scheme,
        dt=float(dt),
        seeds=seeds,
    )


# -- strong convergence -----------------------------------------------------------


@dataclass
class ConvergenceStudy:
    scheme: str
    dts: np.ndarray
    errors: np.ndarray
    order: float
    factors: tuple = ()


def strong_errors(
    model: Model,
    u0,
    T: float,
    paths: Sequence[BrownianPath],
    factors: Sequence[int],
    scheme: str,
    noise: NoiseSpec,
    reference=None,
) -> ConvergenceStudy:
    """Mean pathwise L2 error at ``T`` of coarsened runs against a fine run.

    The fine run uses ``paths`` as given (or ``reference``, final states of
    shape ``(n_paths, c, N)``); each factor replays the same Brownian motion on
    a coarser grid.  The order is the least-squares slope in log-log.
    """
    from .noise import coarsen_path

    paths = list(paths)
    dt = paths[0].dt
    factors = tuple(int(f) for f in factors)
    if reference is None:
        reference = simulate(model, u0, T, dt, scheme, noise, path=paths,
                             observers=(), keep_states=False).final
    errors, dts = [], []
    for f in factors:
        coarse = [coarsen_path(p, f) for p in paths]
        out = simulate(model, u0, T, dt * f, scheme, noise, path=coarse,
                       observers=(), keep_states=False).final
        diff = model.grid.inner(out - reference, out - reference).sum(axis=-1)
        errors.append(float(np.mean(np.sqrt(diff))))
        dts.append(dt * f)
    dts, errors = np.asarray(dts), np.asarray(errors)
    order = float(np.polyfit(np.log(dts), np.log(errors), 1)[0]) if np.all(errors > 0) else float("nan")
    return ConvergenceStudy(scheme, dts, errors, order, factors)
