"""Noise amplitudes and seeded, refinable Brownian paths.

Every model in the package is driven by ``sum_j gamma_j d/dx (...) o dW_j``.
The amplitudes are set from a non-dimensional level ``epsilon`` through
``0.5 * sum(gamma_j**2) = sqrt(g h**3) * epsilon``.

A :class:`BrownianPath` stores the partial sums ``W_j(t_n)`` on its time grid;
increments are differences of consecutive partial sums.  Coarsening keeps every
other (or every ``factor``-th) partial sum, so a coarse path is the same
Brownian motion observed on a coarser grid, bit for bit at the shared times.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class NoiseSpec:
    gammas: np.ndarray
    epsilon: float = float("nan")

    def __post_init__(self):
        gammas = np.atleast_1d(np.asarray(self.gammas, dtype=float))
        if gammas.ndim != 1 or gammas.size == 0:
            raise ConfigurationError("gammas must be a non-empty 1-D sequence")
        gammas.setflags(write=False)
        object.__setattr__(self, "gammas", gammas)

    @property
    def m(self) -> int:
        return self.gammas.size

    @property
    def gamma_squared(self) -> float:
        """``sum_j gamma_j**2``."""
        return float(np.sum(self.gammas**2))

    def combined(self, dW):
        """``sum_j gamma_j dW_j`` over the last axis of ``dW``."""
        return np.asarray(dW, dtype=float) @ self.gammas

    @classmethod
    def zero(cls, m: int = 1) -> "NoiseSpec":
        return cls(np.zeros(m), 0.0)


def gammas_from_epsilon(epsilon: float, m: int = 1, g: float = 1.0, h: float = 1.0) -> NoiseSpec:
    """Equal split ``gamma_j = sqrt(2 sqrt(g h^3) epsilon / m)``."""
    if epsilon < 0 or not np.isfinite(epsilon):
        raise ConfigurationError(f"noise level epsilon must be >= 0, got {epsilon}")
    if int(m) != m or m < 1:
        raise ConfigurationError(f"number of noise components must be >= 1, got {m}")
    if g <= 0 or h <= 0:
        raise ConfigurationError("g and h must be positive")
    gamma = np.sqrt(2.0 * np.sqrt(g * h**3) * epsilon / m)
    return NoiseSpec(np.full(int(m), gamma), float(epsilon))


@dataclass(frozen=True)
class BrownianPath:
    """Partial sums ``W[n, j] = W_j(n dt)`` with ``W[0] = 0``."""

    W: np.ndarray
    dt: float
    seed: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float)
        if W.ndim != 2 or W.shape[0] < 1:
            raise ConfigurationError("W must have shape (n_steps + 1, m)")
        if self.dt <= 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        W.setflags(write=False)
        object.__setattr__(self, "W", W)

    @property
    def n_steps(self) -> int:
        return self.W.shape[0] - 1

    @property
    def m(self) -> int:
        return self.W.shape[1]

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.W, axis=0)

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_steps + 1)

    def total(self, n: int | None = None) -> np.ndarray:
        """``W(t_n) - W(0)``; the endpoint by default."""
        return self.W[self.n_steps if n is None else n].copy()

    @classmethod
    def from_increments(cls, increments, dt, seed=None) -> "BrownianPath":
        inc = np.asarray(increments, dtype=float)
        if inc.ndim == 1:
            inc = inc[:, None]
        W = np.zeros((inc.shape[0] + 1, inc.shape[1]))
        np.cumsum(inc, axis=0, out=W[1:])
        return cls(W, float(dt), seed)

    # -- export ---------------------------------------------------------------

    def to_csv(self, path) -> None:
        """Rows ``step, component, increment`` at 17 significant digits."""
        inc = self.increments
        with open(path, "w", newline="") as fh:
            fh.write(f"# dt={self.dt!r} seed={self.seed!r}\n")
            w = csv.writer(fh)
            w.writerow(["step", "component", "increment"])
            for n in range(inc.shape[0]):
                for j in range(inc.shape[1]):
                    w.writerow([n, j, f"{inc[n, j]:.17g}"])

    @classmethod
    def from_csv(cls, path) -> "BrownianPath":
        with open(path) as fh:
            header = fh.readline()
            meta = dict(item.split("=", 1) for item in header.lstrip("# ").split())
            rows = list(csv.DictReader(fh))
        n = 1 + max(int(r["step"]) for r in rows)
        m = 1 + max(int(r["component"]) for r in rows)
        inc = np.zeros((n, m))
        for r in rows:
            inc[int(r["step"]), int(r["component"])] = float(r["increment"])
        seed = None if meta.get("seed", "None") == "None" else int(meta["seed"])
        return cls.from_increments(inc, float(meta["dt"]), seed)

    def to_binary(self, path) -> None:
        """Little-endian float64 partial sums plus a JSON sidecar ``<path>.json``."""
        path = Path(path)
        self.W.astype("<f8").tofile(path)
        sidecar = {"dt": self.dt, "seed": self.seed, "n_steps": self.n_steps, "m": self.m,
                   "layout": "row-major W[n, j], W[0] = 0"}
        path.with_suffix(path.suffix + ".json").write_text(json.dumps(sidecar, indent=2))

    @classmethod
    def from_binary(cls, path) -> "BrownianPath":
        path = Path(path)
        meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
        W = np.fromfile(path, dtype="<f8").reshape(meta["n_steps"] + 1, meta["m"])
        return cls(W, meta["dt"], meta["seed"])


def component_generator(seed: int, j: int) -> np.random.Generator:
    """Counter-based (Philox) stream keyed by ``(seed, j)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(j,))))


def sample_path(seed: int, n_steps: int, dt: float, m: int = 1) -> BrownianPath:
    """``n_steps`` independent ``N(0, dt)`` increments for each of ``m`` components."""
    if dt <= 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    if n_steps < 0:
        raise ConfigurationError("n_steps must be >= 0")
    z = np.empty((n_steps, m))
    for j in range(m):
        z[:, j] = component_generator(seed, j).standard_normal(n_steps)
    return BrownianPath.from_increments(np.sqrt(dt) * z, dt, seed)


def coarsen_path(path: BrownianPath, factor: int) -> BrownianPath:
    """Same Brownian motion on a grid ``factor`` times coarser."""
    if int(factor) != factor or factor < 1:
        raise ConfigurationError(f"factor must be a positive integer, got {factor}")
    factor = int(factor)
    if path.n_steps % factor:
        raise ConfigurationError(
            f"factor {factor} does not divide the {path.n_steps} steps of the path"
        )
    return BrownianPath(path.W[::factor], path.dt * factor, path.seed)


def stack_increments(paths) -> np.ndarray:
    """Increments of several equal-length paths as an ``(n_steps, n_paths, m)`` array."""
    paths = list(paths)
    n = {p.n_steps for p in paths}
    if len(n) != 1:
        raise ConfigurationError("ensemble paths must have the same number of steps")
    return np.stack([p.increments for p in paths], axis=1)
