"""Observables, conservation monitors and Dirichlet-Neumann instruments."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, UsageError
from .models import BBM, Model
from .noise import NoiseSpec
from .spectral import Grid, eval_symbol_K, trig_interpolate


def _full_spectrum_sq(f, grid: Grid):
    fh = np.fft.fft(np.asarray(f, dtype=float), axis=-1)
    return np.abs(fh) ** 2 * grid.dx / grid.n_modes


def hs_norm_squared(f, s, grid: Grid):
    """``sum (1 + xi^2)^s |f_hat|^2``, normalised so that ``s = 0`` gives ``dx sum f^2``."""
    return np.sum((1.0 + grid.xi**2) ** s * _full_spectrum_sq(f, grid), axis=-1)


def xs_norm(u, s, grid: Grid, h=1.0):
    """``sqrt(|eta|_{H^s}^2 + |K^{-1} v|_{H^s}^2)`` for two-component states."""
    u = np.asarray(u, dtype=float)
    if u.ndim < 2 or u.shape[-2] != 2:
        raise UsageError("the X^s norm is defined for two-component states (eta, v)")
    kinv = 1.0 / eval_symbol_K(grid.rxi, h)
    kv = grid.irfft(kinv * grid.rfft(u[..., 1, :]))
    return np.sqrt(hs_norm_squared(u[..., 0, :], s, grid) + hs_norm_squared(kv, s, grid))


def h1_functional(model: Model, r):
    """``int r K_b r dx``."""
    r = np.asarray(r, dtype=float)
    if r.ndim >= 2:
        r = r[..., 0, :]
    return model.grid.integrate(r * model._op(model.values("Kb"), r))


def conserved_functional(model: Model, u, kind: str = "energy"):
    """``"energy"``: the model's H or Q; ``"h1"``: ``int r K_b r`` for BBM."""
    if kind == "energy":
        return model.energy(u)
    if kind == "h1":
        if model.kind != BBM:
            raise UsageError("the H^1 functional is monitored for the BBM model only")
        return h1_functional(model, model.check_state(u))
    raise ConfigurationError(f"unknown functional {kind!r}; choose 'energy' or 'h1'")


def bbm_h1_drift_prediction(r, model: Model, noise: NoiseSpec):
    """Per-component coefficients ``(3b/2h) gamma_j int (d/dx r)^3 dx``.

    The one-step increment of :func:`h1_functional` is predicted as
    ``sum_j coeff_j dW_j + O(dt)``.  Valid for BBM with ``a = 0``.
    """
    spec = model.spec
    if spec.kind != BBM or spec.linear_noise_only:
        raise UsageError("the H^1 drift formula is stated for the BBM model")
    if spec.a != 0.0:
        raise UsageError(f"the H^1 drift formula needs a = 0 (b = h^2/6), got a = {spec.a:g}")
    r = np.asarray(r, dtype=float).reshape(-1)
    rx = model.dx(r)
    return 1.5 * spec.b / spec.h * noise.gammas * model.grid.integrate(rx**3)


# -- Dirichlet-Neumann operator ----------------------------------------------------


def _check_same(*fields):
    shapes = {np.shape(f)[-1] for f in fields}
    if len(shapes) != 1:
        raise UsageError(f"fields live on different grids (sizes {sorted(shapes)})")


def dno_g0(phi, grid: Grid, h=1.0):
    """``G_0 phi``, the multiplier ``xi tanh(h xi)``."""
    xi = grid.rxi
    return grid.multiply(xi * np.tanh(h * xi), phi)


def dno_g1(eta, phi, grid: Grid, h=1.0):
    """``G_1(eta) phi = -d/dx (eta d/dx phi) - G_0 (eta G_0 phi)``."""
    _check_same(eta, phi, grid.x)
    ik = 1j * grid.rxi
    ik[-1] = 0.0
    phix = grid.multiply(ik, phi)
    return -grid.multiply(ik, eta * phix) - dno_g0(eta * dno_g0(phi, grid, h), grid, h)


def energy_full_truncated(eta, phi, grid: Grid, g=1.0, h=1.0):
    """``0.5 int (g eta^2 + phi (G_0 + G_1(eta)) phi)``."""
    _check_same(eta, phi, grid.x)
    G = dno_g0(phi, grid, h) + dno_g1(eta, phi, grid, h)
    return 0.5 * grid.integrate(g * eta**2 + phi * G)


def wb_velocity_from_potential(phi, grid: Grid, h=1.0):
    """``v = K^2 d/dx phi``, the WB velocity matching the quadratic part of the full energy."""
    ik = 1j * grid.rxi
    ik[-1] = 0.0
    return grid.multiply(eval_symbol_K(grid.rxi, h) ** 2 * ik, phi)


# -- observer series ------------------------------------------------------------------


@dataclass
class ObserverSeries:
    name: str
    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.ndim != 1 or self.values.shape[0] != self.times.size:
            raise UsageError("times and values must have matching first dimension")
        if np.any(np.diff(self.times) <= 0):
            raise UsageError("observer times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise UsageError(f"observer {self.name!r} has non-finite values")

    def relative_drift(self):
        """``max_t |v(t) - v(0)| / |v(0)|`` along the first axis."""
        v0 = self.values[0]
        return np.max(np.abs(self.values - v0), axis=0) / np.abs(v0)

    def to_csv(self, path):
        """Columns ``t, value`` (or ``value_<i>`` for ensembles) plus a JSON sidecar."""
        path = Path(path)
        vals = self.values.reshape(self.times.size, -1)
        cols = ["value"] if vals.shape[1] == 1 else [f"value_{i}" for i in range(vals.shape[1])]
        np.savetxt(path, np.column_stack([self.times, vals]), delimiter=",",
                   header=",".join(["t", *cols]), comments="", fmt="%.17g")
        path.with_suffix(path.suffix + ".json").write_text(
            json.dumps({"name": self.name, **self.meta}, indent=2, sort_keys=True, default=str)
        )

    @classmethod
    def from_csv(cls, path):
        path = Path(path)
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
        name = meta.pop("name")
        vals = data[:, 1] if data.shape[1] == 2 else data[:, 1:]
        return cls(name, data[:, 0], vals, meta)


def crest_position(eta, grid: Grid, refine: int = 64):
    """Location of the maximum of the band-limited interpolant of ``eta``."""
    eta = np.asarray(eta, dtype=float)
    k = int(np.argmax(eta))
    xs = grid.x[k] + grid.dx * np.linspace(-1.0, 1.0, 2 * refine + 1)
    for _ in range(3):
        vals = trig_interpolate(eta, grid, xs)
        j = int(np.argmax(vals))
        span = xs[1] - xs[0]
        xs = xs[j] + span * np.linspace(-1.0, 1.0, 2 * refine + 1)
    return float(xs[refine])
