"""The stochastic surface-wave model catalogue.

Every model has the Stratonovich form

    du = (A u + f(u)) dt + sum_j gamma_j (d/dx u + gn(u)) o dW_j

with ``A`` a Fourier-multiplier matrix, ``f`` the drift nonlinearity and ``gn``
the noise nonlinearity (shared by all noise components).  States are arrays of
shape ``(..., n_components, N)``; unidirectional models use one component.

Kinds and variables:

========================  ==========  ==============================
kind                      state       conserved functional
========================  ==========  ==============================
``airy``                  (eta, v)    quadratic energy H0
``whitham-boussinesq``    (eta, v)    H with cubic term eta v^2
``boussinesq``            (eta, w)    H with K_a
``bbm``                   r           H(r) = g int r^2 + r^3/(2h)
``modified-bbm``          r           Q with K_a^{-1/2} K_b
``fd-unidirectional``     r           H(r)
``whitham``               r           Q with K
========================  ==========  ==============================
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, UsageError
from .noise import NoiseSpec
from .spectral import Grid, eval_symbol_K, nyquist_real

AIRY = "airy"
WHITHAM_BOUSSINESQ = "whitham-boussinesq"
BOUSSINESQ = "boussinesq"
BBM = "bbm"
MODIFIED_BBM = "modified-bbm"
FD_UNIDIRECTIONAL = "fd-unidirectional"
WHITHAM = "whitham"

KINDS = (AIRY, WHITHAM_BOUSSINESQ, BOUSSINESQ, BBM, MODIFIED_BBM, FD_UNIDIRECTIONAL, WHITHAM)
TWO_COMPONENT = (AIRY, WHITHAM_BOUSSINESQ, BOUSSINESQ)
UNIDIRECTIONAL = (BBM, MODIFIED_BBM, FD_UNIDIRECTIONAL, WHITHAM)
USES_B = (BOUSSINESQ, BBM, MODIFIED_BBM)

_ALIASES = {
    "wb": WHITHAM_BOUSSINESQ,
    "whitham_boussinesq": WHITHAM_BOUSSINESQ,
    "modified_bbm": MODIFIED_BBM,
    "mbbm": MODIFIED_BBM,
    "fd_unidirectional": FD_UNIDIRECTIONAL,
    "fdu": FD_UNIDIRECTIONAL,
}


@dataclass(frozen=True)
class ModelSpec:
    """Model choice plus physical parameters.

    ``b`` is only used by the Boussinesq, BBM and modified BBM kinds and must
    satisfy ``b >= h**2 / 6`` so that ``a = h**2/3 - 2b <= 0``; it defaults to
    ``h**2 / 6`` (``a = 0``).  ``linear_noise_only`` drops ``gn`` while keeping
    the transport noise ``gamma d/dx u``.
    """

    kind: str
    g: float = 1.0
    h: float = 1.0
    b: float | None = None
    linear_noise_only: bool = False

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ConfigurationError(f"unknown model kind {self.kind!r}; choose from {KINDS}")
        object.__setattr__(self, "kind", kind)
        if not (self.g > 0 and self.h > 0):
            raise ConfigurationError(f"g and h must be positive, got g={self.g}, h={self.h}")
        if kind in USES_B:
            b = self.h**2 / 6.0 if self.b is None else float(self.b)
            # tolerance keeps b = h^2/6 admissible despite rounding
            if b < self.h**2 / 6.0 * (1 - 1e-12):
                raise ConfigurationError(
                    f"b = {b} gives a = h^2/3 - 2b > 0; need b >= h^2/6 = {self.h**2 / 6}"
                )
            object.__setattr__(self, "b", b)
        elif self.b is not None:
            raise ConfigurationError(f"model {kind!r} takes no parameter b")

    @property
    def a(self) -> float | None:
        if self.kind not in USES_B:
            return None
        return min(self.h**2 / 3.0 - 2.0 * self.b, 0.0)

    @property
    def n_components(self) -> int:
        return 2 if self.kind in TWO_COMPONENT else 1

    @property
    def functional_name(self) -> str:
        return "Q" if self.kind in (MODIFIED_BBM, WHITHAM) else "H"


def _check_xi(xi):
    return np.asarray(xi, dtype=float)


def linear_drift_symbol(spec: ModelSpec, xi):
    """``A(xi)``: shape ``xi.shape + (2, 2)`` for two-component kinds, ``xi.shape`` otherwise."""
    xi = _check_xi(xi)
    g, h = spec.g, spec.h
    ik = 1j * xi
    kind = spec.kind
    if kind in (AIRY, WHITHAM_BOUSSINESQ, BOUSSINESQ):
        out = np.zeros(xi.shape + (2, 2), dtype=complex)
        if kind == BOUSSINESQ:
            ka = 1.0 + abs(spec.a) * xi**2
            kb = 1.0 + spec.b * xi**2
            out[..., 0, 1] = -ik * h * ka / kb
            out[..., 1, 0] = -ik * g / kb
        else:
            out[..., 0, 1] = -ik * h
            out[..., 1, 0] = -ik * g * eval_symbol_K(xi, h) ** 2
        return out
    c0 = np.sqrt(g * h)
    if kind == BBM:
        ka = 1.0 + abs(spec.a) * xi**2
        kb = 1.0 + spec.b * xi**2
        return -ik * np.sqrt(g * h * ka) / kb
    if kind == MODIFIED_BBM:
        ka = 1.0 + abs(spec.a) * xi**2
        kb = 1.0 + spec.b * xi**2
        return -ik * c0 * np.sqrt(ka) / kb
    return -ik * c0 * eval_symbol_K(xi, h)


def noise_symbol(spec: ModelSpec, xi, gamma):
    """``B(xi) = i xi gamma``, applied identically to every component."""
    return 1j * _check_xi(xi) * gamma


@dataclass(eq=False)
class Model:
    """A :class:`ModelSpec` bound to a grid, with its multipliers precomputed.

    All methods accept states of shape ``(..., n_components, N)``.
    """

    spec: ModelSpec
    grid: Grid
    dealias: bool = False
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    # -- multipliers on the real-transform grid ------------------------------

    @cached_property
    def xi(self):
        return self.grid.rxi

    @cached_property
    def ik(self):
        return nyquist_real(1j * self.xi)

    @cached_property
    def K(self):
        return eval_symbol_K(self.xi, self.spec.h)

    @cached_property
    def Ka(self):
        return 1.0 + abs(self.spec.a or 0.0) * self.xi**2

    @cached_property
    def Kb(self):
        return 1.0 + (self.spec.b or 0.0) * self.xi**2

    @cached_property
    def A(self):
        """Linear symbol as ``(n_modes_r, c, c)`` matrices (1x1 for scalar models)."""
        a = linear_drift_symbol(self.spec, self.xi)
        if a.ndim == 1:
            a = a[:, None, None]
        return a

    @property
    def n_components(self):
        return self.spec.n_components

    @property
    def kind(self):
        return self.spec.kind

    # -- helpers ---------------------------------------------------------------

    def _op(self, values, f):
        return self.grid.multiply(values, f)

    def _prod(self, a, b):
        p = a * b
        if self.dealias:
            p = self.grid.multiply(self.grid.dealias_mask, p)
        return p

    def check_state(self, u):
        u = np.asarray(u, dtype=float)
        c = self.n_components
        if u.ndim < 2 or u.shape[-2] != c or u.shape[-1] != self.grid.n_modes:
            raise UsageError(
                f"model {self.kind!r} expects states of shape (..., {c}, {self.grid.n_modes}),"
                f" got {u.shape}"
            )
        return u

    def values(self, name):
        """Cached composite multipliers, e.g. ``"K2ik"`` for ``K^2 d/dx``."""
        try:
            return self._cache[name]
        except KeyError:
            pass
        ik, K, Ka, Kb = self.ik, self.K, self.Ka, self.Kb
        c0 = np.sqrt(self.spec.g * self.spec.h)
        table = {
            "ik": lambda: ik,
            "K2ik": lambda: K**2 * ik,
            "K": lambda: K.astype(complex),
            "Kinv": lambda: (1.0 / K).astype(complex),
            "Kinv2": lambda: (1.0 / K**2).astype(complex),
            "Kinv_ik": lambda: ik / K,
            "Kb_inv_ik": lambda: ik / Kb,
            "Ka_inv_ik": lambda: ik / Ka,
            "Ka": lambda: Ka.astype(complex),
            "Kb": lambda: Kb.astype(complex),
            "bbm_f": lambda: np.sqrt(self.spec.g * self.spec.h * Ka) / Kb * ik,
            "mbbm_f": lambda: c0 * Ka / Kb**2 * ik,
            "mbbm_g": lambda: np.sqrt(Ka) / Kb * ik,
            "mbbm_Q": lambda: (Kb / np.sqrt(Ka)).astype(complex),
            "fdu_f": lambda: c0 * K * ik,
        }
        v = nyquist_real(table[name]())
        self._cache[name] = v
        return v

    def dx(self, u):
        return self._op(self.ik, u)

    # -- nonlinearities ----------------------------------------------------------

    def drift_nonlinearity(self, u):
        """``f(u)``."""
        u = self.check_state(u)
        kind, g, h = self.kind, self.spec.g, self.spec.h
        if kind == AIRY:
            return np.zeros_like(u)
        if kind == WHITHAM_BOUSSINESQ:
            eta, v = u[..., 0, :], u[..., 1, :]
            op = self.values("K2ik")
            return -np.stack([self._op(op, self._prod(eta, v)),
                              self._op(op, 0.5 * self._prod(v, v))], axis=-2)
        if kind == BOUSSINESQ:
            eta, w = u[..., 0, :], u[..., 1, :]
            op = self.values("Kb_inv_ik")
            return -np.stack([self._op(op, self._prod(eta, w)),
                              self._op(op, 0.5 * self._prod(w, w))], axis=-2)
        r2 = self._prod(u, u)
        c = 3.0 / (4.0 * h)
        if kind == BBM:
            return -c * self._op(self.values("bbm_f"), r2)
        if kind == MODIFIED_BBM:
            return -c * self._op(self.values("mbbm_f"), r2)
        if kind == FD_UNIDIRECTIONAL:
            return -c * self._op(self.values("fdu_f"), r2)
        return -c * np.sqrt(g * h) * self._op(self.values("ik"), r2)

    def noise_nonlinearity(self, u):
        """``gn(u)``, the nonlinear part of the (unit-amplitude) noise field."""
        u = self.check_state(u)
        return 0.5 * self._gn_bilinear(u, u)

    def noise_derivative(self, u, w):
        """Directional derivative ``gn'(u) w``."""
        return self._gn_bilinear(self.check_state(u), self.check_state(w))

    def _gn_bilinear(self, u, w):
        # every gn is quadratic: gn'(u) w = B(u, w) with B symmetric, gn(u) = B(u, u) / 2
        kind, g, h = self.kind, self.spec.g, self.spec.h
        if kind == AIRY or self.spec.linear_noise_only:
            return np.zeros(np.broadcast_shapes(u.shape, w.shape))
        if kind in (WHITHAM_BOUSSINESQ, BOUSSINESQ):
            eta, v = u[..., 0, :], u[..., 1, :]
            de, dv = w[..., 0, :], w[..., 1, :]
            second = self.values("K2ik") if kind == WHITHAM_BOUSSINESQ else self.values("Ka_inv_ik")
            cross = self._prod(de, v) + self._prod(eta, dv)
            return np.stack([self._op(self.ik, self._prod(v, dv)) / g,
                             self._op(second, cross) / h], axis=-2)
        c = 3.0 / (2.0 * h)
        rw = self._prod(u, w)
        if kind in (BBM, FD_UNIDIRECTIONAL):
            return c * self._op(self.ik, rw)
        if kind == MODIFIED_BBM:
            return c * self._op(self.values("mbbm_g"), rw)
        return c * self._op(self.values("Kinv_ik"), rw)

    def gprime_g(self, u):
        """``gn'(u) gn(u)``."""
        return self.noise_derivative(u, self.noise_nonlinearity(u))

    def ito_corrected_drift(self, u, noise: NoiseSpec):
        """``F(u) = f + 0.5 sum gamma^2 (2 d/dx gn + gn' gn)``."""
        f = self.drift_nonlinearity(u)
        s2 = noise.gamma_squared
        if s2 == 0.0:
            return f
        gn = self.noise_nonlinearity(u)
        return f + 0.5 * s2 * (2.0 * self.dx(gn) + self.noise_derivative(u, gn))

    def duhamel_nonlinearity(self, u, noise: NoiseSpec):
        """``f~(u) = f + 0.5 sum gamma^2 gn' gn``."""
        f = self.drift_nonlinearity(u)
        s2 = noise.gamma_squared
        if s2 == 0.0:
            return f
        return f + 0.5 * s2 * self.gprime_g(u)

    def linear_part(self, u):
        """``A u`` evaluated spectrally."""
        u = self.check_state(u)
        uh = self.grid.rfft(u)
        A = nyquist_real(np.moveaxis(self.A, 0, -1))  # (c, c, k)
        out = np.einsum("ijk,...jk->...ik", A, uh)
        return self.grid.irfft(out)

    def deterministic_rhs(self, u):
        return self.linear_part(u) + self.drift_nonlinearity(u)

    def noise_field(self, u):
        """Unit-amplitude Stratonovich noise vector field ``d/dx u + gn(u)``."""
        return self.dx(u) + self.noise_nonlinearity(u)

    # -- conserved functionals --------------------------------------------------

    def energy(self, u):
        """The model's conserved functional (H or Q), rectangle rule."""
        u = self.check_state(u)
        kind, g, h = self.kind, self.spec.g, self.spec.h
        I = self.grid.integrate
        if kind in (AIRY, WHITHAM_BOUSSINESQ):
            eta, v = u[..., 0, :], u[..., 1, :]
            kv = self._op(self.values("Kinv"), v)
            dens = g * eta**2 + h * kv**2
            if kind == WHITHAM_BOUSSINESQ:
                dens = dens + eta * v**2
            return 0.5 * I(dens)
        if kind == BOUSSINESQ:
            eta, w = u[..., 0, :], u[..., 1, :]
            return 0.5 * I(g * eta**2 + h * w * self._op(self.values("Ka"), w) + eta * w**2)
        r = u[..., 0, :]
        cubic = r**3 / (2.0 * h)
        if kind in (BBM, FD_UNIDIRECTIONAL):
            return g * I(r**2 + cubic)
        if kind == MODIFIED_BBM:
            return g * I(r * self._op(self.values("mbbm_Q"), r) + cubic)
        return g * I(r * self._op(self.values("K"), r) + cubic)

    def energy_gradient(self, u):
        """L2 gradient of :meth:`energy`."""
        u = self.check_state(u)
        kind, g, h = self.kind, self.spec.g, self.spec.h
        if kind in (AIRY, WHITHAM_BOUSSINESQ, BOUSSINESQ):
            eta, v = u[..., 0, :], u[..., 1, :]
            if kind == BOUSSINESQ:
                lin = h * self._op(self.values("Ka"), v)
            else:
                lin = h * self._op(self.values("Kinv2"), v)
            if kind == AIRY:
                return np.stack([g * eta, lin], axis=-2)
            return np.stack([g * eta + 0.5 * v**2, lin + eta * v], axis=-2)
        quad = 3.0 / (4.0 * h) * u**2
        if kind in (BBM, FD_UNIDIRECTIONAL):
            return 2.0 * g * (u + quad)
        if kind == MODIFIED_BBM:
            return 2.0 * g * (self._op(self.values("mbbm_Q"), u) + quad)
        return 2.0 * g * (self._op(self.values("K"), u) + quad)

    def mass(self, u):
        """``int u dx`` per component."""
        return self.grid.integrate(self.check_state(u))


def make_model(kind, grid: Grid, g=1.0, h=1.0, b=None, linear_noise_only=False, dealias=False):
    return Model(ModelSpec(kind, g, h, b, linear_noise_only), grid, dealias)


def wb_ito_drift_closed_form(model: Model, u, noise: NoiseSpec):
    """Explicit Whitham-Boussinesq ``F(u)`` with every term written out."""
    eta, v, K2ik, ik, g, h = _wb_parts(model, u)
    op = model._op
    K2ik_ev = op(K2ik, eta * v)
    f = model.drift_nonlinearity(u)
    ik2 = ik * ik
    K2ik2 = K2ik * ik
    first = op(ik2, v**2) / g + op(ik, v * K2ik_ev) / (g * h)
    second = (
        2.0 / h * op(K2ik2, eta * v)
        + op(K2ik2, v**3) / (3.0 * g * h)
        + op(K2ik, eta * K2ik_ev) / h**2
    )
    return f + 0.5 * noise.gamma_squared * np.stack([first, second], axis=-2)


def wb_duhamel_nonlinearity_closed_form(model: Model, u, noise: NoiseSpec):
    """Explicit Whitham-Boussinesq ``f~(u)``."""
    eta, v, K2ik, ik, g, h = _wb_parts(model, u)
    op = model._op
    K2ik_ev = op(K2ik, eta * v)
    K2ik2 = K2ik * ik
    first = op(ik, v * K2ik_ev) / (g * h)
    second = op(K2ik2, v**3) / (3.0 * g * h) + op(K2ik, eta * K2ik_ev) / h**2
    return model.drift_nonlinearity(u) + 0.5 * noise.gamma_squared * np.stack([first, second], axis=-2)


def _wb_parts(model, u):
    if model.kind != WHITHAM_BOUSSINESQ:
        raise UsageError("closed forms are written for the Whitham-Boussinesq model")
    u = model.check_state(u)
    return (u[..., 0, :], u[..., 1, :], model.values("K2ik"), model.ik,
            model.spec.g, model.spec.h)


# functional spellings of the Model methods


def drift_nonlinearity(model: Model, u):
    return model.drift_nonlinearity(u)


def noise_nonlinearity(model: Model, u):
    return model.noise_nonlinearity(u)


def ito_corrected_drift(model: Model, u, noise: NoiseSpec):
    return model.ito_corrected_drift(u, noise)


def duhamel_nonlinearity(model: Model, u, noise: NoiseSpec):
    return model.duhamel_nonlinearity(u, noise)


def energy(model: Model, u):
    return model.energy(u)
