"""Periodic grids, Fourier multiplier symbols and their application to real fields.

Fields are plain ``numpy`` arrays whose last axis holds the ``N`` grid samples;
any leading axes (components, ensemble members) are carried along untouched.
All transforms are taken along the last axis with ``numpy.fft``.

Nyquist convention: a real field cannot carry an arbitrary complex coefficient
at the Nyquist wavenumber, so every multiplier acts there through the real
part of its symbol.  Odd-imaginary symbols (``D``, ``i xi`` ...) therefore
annihilate the Nyquist mode, even-real symbols act on it unchanged and a
shift ``exp(i alpha xi)`` multiplies it by ``cos(alpha xi_N)``, which is exact
for grid-aligned shifts.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import ConfigurationError, InternalError

EVEN_REAL = "even-real"
ODD_IMAGINARY = "odd-imaginary"
GENERAL = "general"
_PARITIES = (EVEN_REAL, ODD_IMAGINARY, GENERAL)

# imaginary residual allowed after a multiplier, relative to the field norm
REALNESS_TOL = 1e-10


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[origin, origin + length)`` with ``n_modes`` points."""

    length: float
    n_modes: int
    origin: float | None = None

    def __post_init__(self):
        if not np.isfinite(self.length) or self.length <= 0:
            raise ConfigurationError(f"grid length must be positive, got {self.length}")
        if int(self.n_modes) != self.n_modes or self.n_modes % 2 or self.n_modes < 4:
            raise ConfigurationError(
                f"n_modes must be an even integer >= 4, got {self.n_modes}"
            )
        object.__setattr__(self, "n_modes", int(self.n_modes))
        object.__setattr__(self, "length", float(self.length))
        if self.origin is None:
            object.__setattr__(self, "origin", -0.5 * self.length)

    @property
    def dx(self) -> float:
        return self.length / self.n_modes

    @cached_property
    def x(self) -> np.ndarray:
        return self.origin + self.dx * np.arange(self.n_modes)

    @cached_property
    def xi(self) -> np.ndarray:
        """Wavenumbers ``2 pi k / L`` in standard FFT ordering."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_modes, d=self.dx)

    @cached_property
    def rxi(self) -> np.ndarray:
        """Non-negative wavenumbers of the real transform; the last one is Nyquist."""
        return 2.0 * np.pi * np.fft.rfftfreq(self.n_modes, d=self.dx)

    @property
    def nyquist(self) -> float:
        return np.pi / self.dx

    @cached_property
    def rfft_weights(self) -> np.ndarray:
        """Multiplicity of each real-transform mode in the full spectrum."""
        w = np.full(self.rxi.shape, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask on the real-transform modes."""
        k = np.arange(self.rxi.size)
        return (k < self.n_modes / 3.0).astype(float)

    # -- transforms -------------------------------------------------------

    def rfft(self, f):
        return np.fft.rfft(f, axis=-1)

    def irfft(self, fh):
        return np.fft.irfft(fh, n=self.n_modes, axis=-1)

    def multiply(self, values, f):
        """Apply precomputed real-transform symbol ``values`` to real field(s) ``f``."""
        return np.fft.irfft(values * np.fft.rfft(f, axis=-1), n=self.n_modes, axis=-1)

    def symbol_values(self, sym: "Symbol") -> np.ndarray:
        """Symbol sampled on :attr:`rxi`, with the Nyquist convention applied."""
        return nyquist_real(np.asarray(sym(self.rxi), dtype=complex))

    def integrate(self, f):
        """Rectangle rule ``dx * sum(f)`` along the last axis (trapezoid for periodic data)."""
        return self.dx * np.sum(f, axis=-1)

    def inner(self, a, b):
        """Discrete L2 inner product ``dx * sum(a * b)`` over the last axis."""
        return self.dx * np.sum(a * b, axis=-1)


def make_grid(length: float, n_modes: int, origin: float | None = None) -> Grid:
    """Periodic grid of ``n_modes`` points covering ``length``, centred on 0 by default."""
    return Grid(length, n_modes, origin)


def nyquist_real(values: np.ndarray) -> np.ndarray:
    """Replace the Nyquist entry (last along axis -1) by its real part, in a copy."""
    out = np.array(values, dtype=complex, copy=True)
    out[..., -1] = out[..., -1].real
    return out


# -- symbols ---------------------------------------------------------------


def eval_symbol_K(xi, h: float):
    """``sqrt(tanh(h xi) / (h xi))`` with the value 1 at ``xi = 0``."""
    if h <= 0:
        raise ConfigurationError(f"depth h must be positive, got {h}")
    x = h * np.abs(np.asarray(xi, dtype=float))
    safe = np.where(x == 0.0, 1.0, x)
    ratio = np.where(x == 0.0, 1.0, np.tanh(safe) / safe)
    return np.sqrt(ratio)


def eval_symbol_Kab(xi, param: float, kind: str = "b"):
    """Symbols of ``K_a = 1 - |a| dx^2`` and ``K_b = 1 - b dx^2``.

    ``kind="a"`` requires ``a <= 0`` and ``kind="b"`` requires ``b >= 0``.
    """
    if kind == "a":
        if param > 0:
            raise ConfigurationError(f"a must be <= 0, got {param}")
    elif kind == "b":
        if param < 0:
            raise ConfigurationError(f"b must be >= 0, got {param}")
    else:
        raise ConfigurationError(f"kind must be 'a' or 'b', got {kind!r}")
    xi = np.asarray(xi, dtype=float)
    return 1.0 + abs(param) * xi**2


def _product_parity(p, q):
    if GENERAL in (p, q):
        return GENERAL
    return EVEN_REAL if p == q else ODD_IMAGINARY


@dataclass(frozen=True)
class Symbol:
    """A Fourier multiplier ``xi -> func(xi)`` tagged with its parity."""

    func: Callable[[np.ndarray], np.ndarray]
    parity: str = GENERAL
    name: str = ""

    def __post_init__(self):
        if self.parity not in _PARITIES:
            raise ConfigurationError(f"unknown parity {self.parity!r}")

    def __call__(self, xi):
        return self.func(np.asarray(xi, dtype=float))

    def __mul__(self, other: "Symbol") -> "Symbol":
        if not isinstance(other, Symbol):
            c = complex(other)
            parity = self.parity if c.imag == 0 else GENERAL
            return Symbol(lambda xi: c * self.func(xi), parity, f"{c}*{self.name}")
        f, g = self.func, other.func
        return Symbol(
            lambda xi: f(xi) * g(xi),
            _product_parity(self.parity, other.parity),
            f"{self.name}*{other.name}",
        )

    __rmul__ = __mul__

    def inverse(self) -> "Symbol":
        if self.parity != EVEN_REAL:
            raise ConfigurationError("only even-real symbols are inverted")
        f = self.func
        return Symbol(lambda xi: 1.0 / f(xi), EVEN_REAL, f"1/{self.name}")

    def power(self, p: float) -> "Symbol":
        """Real power of a positive even-real symbol (``K**-1``, ``K_a**0.5`` ...)."""
        if self.parity != EVEN_REAL:
            raise ConfigurationError("only even-real symbols take real powers")
        f = self.func
        return Symbol(lambda xi: np.real(f(xi)) ** p, EVEN_REAL, f"{self.name}^{p}")


def identity_symbol() -> Symbol:
    return Symbol(lambda xi: np.ones_like(xi, dtype=float), EVEN_REAL, "1")


def derivative_symbol() -> Symbol:
    """``d/dx``, i.e. ``i xi``."""
    return Symbol(lambda xi: 1j * xi, ODD_IMAGINARY, "dx")


def d_symbol() -> Symbol:
    """``D = -i d/dx``, acting as multiplication by ``xi``; real-valued but odd."""
    return Symbol(lambda xi: xi.astype(complex), GENERAL, "D")


def abs_d_symbol() -> Symbol:
    return Symbol(lambda xi: np.abs(xi), EVEN_REAL, "|D|")


def k_symbol(h: float) -> Symbol:
    return Symbol(lambda xi: eval_symbol_K(xi, h), EVEN_REAL, "K")


def ka_symbol(a: float) -> Symbol:
    return Symbol(lambda xi: eval_symbol_Kab(xi, a, "a"), EVEN_REAL, "K_a")


def kb_symbol(b: float) -> Symbol:
    return Symbol(lambda xi: eval_symbol_Kab(xi, b, "b"), EVEN_REAL, "K_b")


def g0_symbol(h: float) -> Symbol:
    """Flat-bottom Dirichlet-Neumann symbol ``xi tanh(h xi)``."""
    return Symbol(lambda xi: xi * np.tanh(h * xi), EVEN_REAL, "G0")


def u_symbol(g: float, h: float) -> Symbol:
    """Linear dispersion ``U = sqrt(g G0)``."""
    return Symbol(lambda xi: np.sqrt(g * xi * np.tanh(h * xi)), EVEN_REAL, "U")


def shift_symbol(alpha: float) -> Symbol:
    return Symbol(lambda xi: np.exp(1j * alpha * xi), GENERAL, f"shift({alpha})")


# -- application -------------------------------------------------------------


def apply_multiplier(sym: Symbol, f, grid: Grid):
    """Apply ``sym`` to the real field(s) ``f`` (last axis on ``grid``).

    Tagged even-real and odd-imaginary symbols go through the real transform.
    General symbols use the complex transform and must still map real fields to
    real fields; an imaginary residual above ``1e-10 * ||f||`` raises
    :class:`InternalError`.
    """
    f = np.asarray(f, dtype=float)
    if f.shape[-1] != grid.n_modes:
        raise ConfigurationError(
            f"field has {f.shape[-1]} samples, grid has {grid.n_modes}"
        )
    if sym.parity != GENERAL:
        return grid.multiply(grid.symbol_values(sym), f)
    values = np.asarray(sym(grid.xi), dtype=complex)
    nyq = grid.n_modes // 2
    values[nyq] = values[nyq].real
    out = np.fft.ifft(values * np.fft.fft(f, axis=-1), axis=-1)
    scale = np.sqrt(np.sum(f * f))
    resid = np.sqrt(np.sum(out.imag**2))
    if resid > REALNESS_TOL * max(scale, np.finfo(float).tiny):
        raise InternalError(
            f"multiplier {sym.name or sym} produced imaginary residual {resid:.3e}"
            f" for a field of norm {scale:.3e}; symbol is not real-preserving"
        )
    return out.real


def spatial_shift(f, alpha, grid: Grid):
    """Return ``f(x + alpha)`` via the phase ``exp(i alpha xi)``.

    ``alpha`` may be an array broadcasting against the leading axes of ``f``
    (one shift per ensemble member).
    """
    f = np.asarray(f, dtype=float)
    alpha = np.asarray(alpha, dtype=float)[..., None]
    phase = nyquist_real(np.exp(1j * alpha * grid.rxi))
    return grid.multiply(phase, f)


def derivative(f, grid: Grid, order: int = 1):
    values = nyquist_real((1j * grid.rxi) ** order)
    return grid.multiply(values, f)


def l2_norm(f, grid: Grid):
    return np.sqrt(grid.inner(f, f))


def parseval_l2_squared(f, grid: Grid):
    """``(1/L) sum |f_hat|^2 dx^2`` over the full spectrum; equals ``dx sum f^2``."""
    fh = np.fft.fft(np.asarray(f, dtype=float), axis=-1)
    return np.sum(np.abs(fh) ** 2, axis=-1) * grid.dx**2 / grid.length


def trig_interpolate(f, grid: Grid, x):
    """Evaluate the band-limited interpolant of ``f`` at arbitrary points ``x``."""
    fh = np.fft.rfft(np.asarray(f, dtype=float)) / grid.n_modes
    w = grid.rfft_weights
    x = np.atleast_1d(np.asarray(x, dtype=float)) - grid.origin
    phase = np.exp(1j * np.outer(x, grid.rxi))
    # the Nyquist term contributes its cosine part only
    coeffs = w * fh
    vals = phase[:, :-1] @ coeffs[:-1]
    vals = vals.real + (coeffs[-1] * np.cos(grid.rxi[-1] * x)).real
    return vals
