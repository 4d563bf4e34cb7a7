"""
Closed-form velocity fields, real Fourier-series fields, and their
embedding into one-parameter self-similar families.

Evaluators are plain numpy expressions built only from arithmetic, ``sin``,
``cos`` and ``exp``, so they accept complex coordinates as well.  The
verifier relies on that for complex-step spatial derivatives.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .scalecalc import WeightAssignment, as_rational, weight

__all__ = [
    "FieldParameters", "AnalyticField", "FourierMode", "FourierSpec",
    "SelfSimilarFamily", "GALLERY", "gallery", "gallery_names", "from_fourier",
    "project_modes", "load_fourier_spec", "embed", "evaluate", "leray_swirl",
]

DECAY_CLASSES = ("periodic", "schwartz", "channel")
PARAM_NAMES = ("U", "L1", "L2", "L3", "T", "nu", "h")


@dataclass(frozen=True)
class FieldParameters:
    U: float = 1.0
    L1: float = 1.0
    L2: float = 1.0
    L3: float = 1.0
    T: float = 1.0
    nu: float = 1.0
    h: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            val = float(getattr(self, f.name))
            if not (math.isfinite(val) and val > 0):
                raise ValueError(f"parameter {f.name} must be positive and finite, got {val}")
            object.__setattr__(self, f.name, val)

    @property
    def L(self):
        return self.L1

    def scaled(self, exponents: Mapping[str, float], k: float) -> "FieldParameters":
        """Multiply each parameter by ``k**exponents[name]``."""
        return FieldParameters(**{
            name: getattr(self, name) * k ** float(exponents.get(name, 0))
            for name in PARAM_NAMES})

    def as_dict(self):
        return {name: getattr(self, name) for name in PARAM_NAMES}


def _stack(*components):
    return np.stack(np.broadcast_arrays(*components))


@dataclass(frozen=True)
class AnalyticField:
    """A closed-form space-time velocity field.

    ``prefactor`` is the expression carrying the field's isobaric weight
    (``"U"`` or ``"T^(2/3)"``); the remaining profile has weight zero.
    Evaluators take ``(coords, t, params)`` where ``coords`` is a sequence
    of ``dim`` broadcastable arrays.
    """

    name: str
    params: FieldParameters
    dim: int
    decay: str
    prefactor: str
    velocity_fn: Callable
    dudt_fn: Optional[Callable] = None
    pressure_fn: Optional[Callable] = None
    dpdt_fn: Optional[Callable] = None
    vorticity_fn: Optional[Callable] = None
    pressure_gradient_fn: Optional[Callable] = None
    period_fn: Optional[Callable] = None
    beta: Optional[tuple] = None
    exact_solution: bool = False
    divergence_free: bool = True
    description: str = ""
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError("dim must be 1, 2 or 3")
        if self.decay not in DECAY_CLASSES:
            raise ValueError(f"decay class must be one of {DECAY_CLASSES}")
        if self.beta is not None:
            object.__setattr__(self, "beta", tuple(as_rational(b) for b in self.beta))

    def _coords(self, coords):
        if len(coords) != self.dim:
            raise ValueError(f"{self.name} expects {self.dim} coordinates, got {len(coords)}")
        return [np.asarray(c) for c in coords]

    def velocity(self, coords, t):
        return self.velocity_fn(self._coords(coords), np.asarray(t), self.params)

    def dudt(self, coords, t):
        if self.dudt_fn is None:
            raise ValueError(f"{self.name} has no closed-form time derivative")
        return self.dudt_fn(self._coords(coords), np.asarray(t), self.params)

    def pressure(self, coords, t):
        if self.pressure_fn is None:
            raise ValueError(f"{self.name} carries no exact pressure")
        return self.pressure_fn(self._coords(coords), np.asarray(t), self.params)

    def dpdt(self, coords, t):
        if self.dpdt_fn is None:
            raise ValueError(f"{self.name} has no closed-form pressure time derivative")
        return self.dpdt_fn(self._coords(coords), np.asarray(t), self.params)

    def vorticity(self, coords, t):
        if self.vorticity_fn is None:
            raise ValueError(f"{self.name} carries no exact vorticity")
        return self.vorticity_fn(self._coords(coords), np.asarray(t), self.params)

    def pressure_gradient(self, coords, t):
        if self.pressure_gradient_fn is None:
            raise ValueError(f"{self.name} carries no stored pressure gradient")
        return self.pressure_gradient_fn(self._coords(coords), np.asarray(t), self.params)

    @property
    def has_pressure(self):
        return self.pressure_fn is not None

    @property
    def has_vorticity(self):
        return self.vorticity_fn is not None

    @property
    def periods(self):
        """Spatial period per axis (periodic fields only)."""
        if self.period_fn is None:
            return None
        return tuple(self.period_fn(self.params))

    @property
    def length_scale(self):
        """Largest length parameter the profile varies on."""
        if self.decay == "channel":
            return self.params.h
        return max((self.params.L1, self.params.L2, self.params.L3)[: self.dim])

    def with_params(self, **changes) -> "AnalyticField":
        if "L" in changes:
            L = changes.pop("L")
            changes.update(L1=L, L2=L, L3=L)
        return replace(self, params=replace(self.params, **changes))


def evaluate(field: AnalyticField, points) -> np.ndarray:
    """Velocity at space-time points.

    ``points`` has shape ``(n, dim + 1)``, the last column being time.
    Returns an ``(n, dim)`` array.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != field.dim + 1:
        raise ValueError(f"points must have shape (n, {field.dim + 1})")
    coords = [pts[:, i] for i in range(field.dim)]
    return np.asarray(field.velocity(coords, pts[:, -1])).T


# -- gallery -------------------------------------------------------------------

def _couette(params, terms=64):
    if terms < 1:
        raise ValueError("couette needs at least one series term")
    n = np.arange(1, terms + 1)

    def series(coords, t, P, weights):
        y, t = np.broadcast_arrays(coords[0], t)
        arg = n * np.pi * (1 - y[..., None] / P.h)
        decay = np.exp(-(n * np.pi) ** 2 * P.nu * t[..., None] / P.h ** 2)
        return np.sum(weights * decay * np.sin(arg), axis=-1)

    def velocity(coords, t, P):
        y = coords[0]
        return _stack(P.U * (y / P.h - 2 / np.pi * series(coords, t, P, 1.0 / n)))

    def dudt(coords, t, P):
        rate = n * np.pi ** 2 * P.nu / P.h ** 2
        return _stack(P.U * 2 / np.pi * series(coords, t, P, rate))

    return AnalyticField(
        "couette", params, 1, "channel", "U", velocity, dudt,
        description="impulsively started plane Couette flow, wall speed U, gap h",
        meta={"terms": terms})


def _tg_profile(x, y, L):
    return np.sin(x / L) * np.cos(y / L), -np.cos(x / L) * np.sin(y / L)


def _taylor_green_init(params):
    def velocity(c, t, P):
        u, v = _tg_profile(c[0], c[1], P.L)
        return _stack(P.U * u, P.U * v, 0.0 * c[2] + 0.0 * t)

    def dudt(c, t, P):
        return _stack(0.0 * c[0], 0.0 * c[1], 0.0 * c[2] + 0.0 * t)

    def vorticity(c, t, P):
        wz = 2 * P.U / P.L * np.sin(c[0] / P.L) * np.sin(c[1] / P.L)
        return _stack(0.0 * c[0], 0.0 * c[1], wz + 0.0 * c[2] + 0.0 * t)

    return AnalyticField(
        "taylor-green-init", params, 3, "periodic", "U", velocity, dudt,
        vorticity_fn=vorticity, period_fn=lambda P: (2 * np.pi * P.L,) * 3,
        description="Taylor-Green initial motion U(sin cos, -cos sin, 0)")


def _periodic_decay(params):
    def profile(c, t, P):
        e = np.exp(-t / P.T)
        return np.sin(c[1] / P.L) * e, np.sin(c[2] / P.L) * e, np.sin(c[0] / P.L) * e

    def velocity(c, t, P):
        return _stack(*(P.U * f for f in profile(c, t, P)))

    def dudt(c, t, P):
        return -velocity(c, t, P) / P.T

    def pressure(c, t, P):
        # as printed with the example; its gradient is not the stored one
        coef = P.U * (P.nu / P.L ** 2 - 1 / P.T)
        s = np.cos(c[1] / P.L) + np.cos(c[2] / P.L) + np.cos(c[0] / P.L)
        return -coef * s * np.exp(-t / P.T)

    def dpdt(c, t, P):
        return -pressure(c, t, P) / P.T

    def pressure_gradient(c, t, P):
        coef = P.U * (P.nu / P.L ** 2 - 1 / P.T)
        return _stack(*(coef * f for f in profile(c, t, P)))

    def vorticity(c, t, P):
        e = -P.U / P.L * np.exp(-t / P.T)
        return _stack(e * np.cos(c[2] / P.L), e * np.cos(c[0] / P.L), e * np.cos(c[1] / P.L))

    return AnalyticField(
        "periodic-decay-3d", params, 3, "periodic", "U", velocity, dudt,
        pressure_fn=pressure, dpdt_fn=dpdt, vorticity_fn=vorticity,
        pressure_gradient_fn=pressure_gradient,
        period_fn=lambda P: (2 * np.pi * P.L,) * 3,
        description="U(sin(y/L), sin(z/L), sin(x/L)) exp(-t/T)")


def _gaussian_swirl(params):
    def velocity(c, t, P):
        x, y, z = c
        g = P.U * np.exp(-t / P.T) * np.exp(-(x * x + y * y + z * z) / P.L ** 2) / P.L
        return _stack(g * y, -g * x, 0.0 * g)

    def dudt(c, t, P):
        return -velocity(c, t, P) / P.T

    def vorticity(c, t, P):
        x, y, z = c
        L = P.L
        g = P.U * np.exp(-t / P.T) * np.exp(-(x * x + y * y + z * z) / L ** 2) / L
        return _stack(-2 * g * x * z / L ** 2, -2 * g * y * z / L ** 2,
                      g * (-2 + 2 * (x * x + y * y) / L ** 2))

    return AnalyticField(
        "gaussian-swirl-3d", params, 3, "schwartz", "U", velocity, dudt,
        vorticity_fn=vorticity,
        description="U exp(-t/T) exp(-|x|^2/L^2) (y/L, -x/L, 0)")


def _t_power(P, beta):
    return P.T ** float((beta[0] - beta[1]) / beta[1])


def _tg_embedded(params, beta=(5, 3)):
    beta = tuple(Fraction(b) for b in beta)
    a = (beta[0] - beta[1]) / beta[1]

    def velocity(c, t, P):
        amp = _t_power(P, beta)
        u, v = _tg_profile(c[0], c[1], P.L)
        return _stack(amp * u + 0.0 * t, amp * v)

    def dudt(c, t, P):
        return _stack(0.0 * c[0] + 0.0 * t, 0.0 * c[1])

    def vorticity(c, t, P):
        amp = _t_power(P, beta)
        return 2 * amp / P.L * np.sin(c[0] / P.L) * np.sin(c[1] / P.L) + 0.0 * t

    return AnalyticField(
        "tg-embedded-2d", params, 2, "periodic", f"T^({a})", velocity, dudt,
        vorticity_fn=vorticity, period_fn=lambda P: (2 * np.pi * P.L,) * 2, beta=beta,
        description="T^((bx-bt)/bt) (sin(x/L)cos(y/L), -cos(x/L)sin(y/L))")


def _gaussian_vortex(params, beta=(5, 3)):
    beta = tuple(Fraction(b) for b in beta)
    a = (beta[0] - beta[1]) / beta[1]

    def velocity(c, t, P):
        x, y, z = c
        L = P.L
        g = _t_power(P, beta) * np.exp(-(x * x + y * y + z * z) / L ** 2) / L ** 2 + 0.0 * t
        return _stack(g * y * z, g * x * z, -2 * g * x * y)

    def dudt(c, t, P):
        return 0.0 * velocity(c, t, P)

    def vorticity(c, t, P):
        x, y, z = c
        L = P.L
        g = _t_power(P, beta) * np.exp(-(x * x + y * y + z * z) / L ** 2) / L ** 2 + 0.0 * t
        return _stack(-g * x * (3 - (4 * y * y + 2 * z * z) / L ** 2),
                      g * y * (3 - (4 * x * x + 2 * z * z) / L ** 2),
                      g * 2 * z / L ** 2 * (y * y - x * x))

    return AnalyticField(
        "gaussian-vortex-3d", params, 3, "schwartz", f"T^({a})", velocity, dudt,
        vorticity_fn=vorticity, beta=beta,
        description="T^((bx-bt)/bt) (yz, xz, -2xy) exp(-|x|^2/L^2) / L^2")


def _taylor_green_exact(params):
    def velocity(c, t, P):
        u, v = _tg_profile(c[0], c[1], P.L)
        e = P.U * np.exp(-2 * P.nu * t / P.L ** 2)
        return _stack(e * u, e * v)

    def dudt(c, t, P):
        return -2 * P.nu / P.L ** 2 * velocity(c, t, P)

    def pressure(c, t, P):
        x, y = c
        e = P.U ** 2 / 4 * np.exp(-4 * P.nu * t / P.L ** 2)
        return e * (np.cos(2 * x / P.L) + np.cos(2 * y / P.L))

    def dpdt(c, t, P):
        return -4 * P.nu / P.L ** 2 * pressure(c, t, P)

    def vorticity(c, t, P):
        e = 2 * P.U / P.L * np.exp(-2 * P.nu * t / P.L ** 2)
        return e * np.sin(c[0] / P.L) * np.sin(c[1] / P.L)

    return AnalyticField(
        "taylor-green-exact-2d", params, 2, "periodic", "U", velocity, dudt,
        pressure_fn=pressure, dpdt_fn=dpdt, vorticity_fn=vorticity,
        period_fn=lambda P: (2 * np.pi * P.L,) * 2, exact_solution=True,
        description="decaying 2-D Taylor-Green vortex, exact NSE solution")


GALLERY = {
    "couette": _couette,
    "taylor-green-init": _taylor_green_init,
    "periodic-decay-3d": _periodic_decay,
    "gaussian-swirl-3d": _gaussian_swirl,
    "tg-embedded-2d": _tg_embedded,
    "gaussian-vortex-3d": _gaussian_vortex,
    "taylor-green-exact-2d": _taylor_green_exact,
}


def gallery_names():
    return list(GALLERY)


def gallery(name: str, **overrides) -> AnalyticField:
    """Build a named gallery field.

    Keyword overrides set parameters (``U``, ``L1``..``L3``, ``T``, ``nu``,
    ``h``, or ``L`` for all three lengths) and builder options such as
    ``terms`` for ``couette`` or ``beta`` for the embedded examples.
    """
    try:
        builder = GALLERY[name]
    except KeyError:
        raise KeyError(f"unknown gallery field {name!r}; known: {', '.join(GALLERY)}") from None
    if "L" in overrides:
        L = overrides.pop("L")
        for key in ("L1", "L2", "L3"):
            overrides.setdefault(key, L)
    params = FieldParameters(**{k: overrides.pop(k) for k in PARAM_NAMES if k in overrides})
    return builder(params, **overrides)


def leray_swirl() -> AnalyticField:
    """Leray-form field ``t^(-1/2) G(x/sqrt(t))`` with a Gaussian swirl profile.

    Self-similar under the standard group; singular at ``t = 0``.  Carries a
    synthetic pressure ``t^(-1) exp(-|x|^2/t)`` of the matching Leray form.
    """
    def velocity(c, t, P):
        x, y, z = c
        g = np.exp(-(x * x + y * y + z * z) / t) / t
        return _stack(g * y, -g * x, 0.0 * g)

    def dudt(c, t, P):
        x, y, z = c
        xi2 = (x * x + y * y + z * z) / t
        return -(1 - xi2) / t * velocity(c, t, P)

    def pressure(c, t, P):
        x, y, z = c
        return np.exp(-(x * x + y * y + z * z) / t) / t

    def dpdt(c, t, P):
        x, y, z = c
        xi2 = (x * x + y * y + z * z) / t
        return -(1 - xi2) / t * pressure(c, t, P)

    return AnalyticField(
        "leray-swirl-3d", FieldParameters(), 3, "schwartz", "t^(-1/2)", velocity, dudt,
        pressure_fn=pressure, dpdt_fn=dpdt,
        description="t^(-1/2) exp(-|xi|^2) (xi_2, -xi_1, 0), xi = x/sqrt(t)")


# -- Fourier fields ------------------------------------------------------------

@dataclass(frozen=True)
class FourierMode:
    n: tuple
    C: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        n = tuple(int(v) for v in self.n)
        if len(n) != 3:
            raise ValueError("mode index must have three integers")
        object.__setattr__(self, "n", n)
        for name in ("C", "S"):
            arr = np.asarray(getattr(self, name), dtype=float).reshape(3)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class FourierSpec:
    """Real Fourier series ``U * sum(C_n cos(k_n.x) + S_n sin(k_n.x))``.

    ``k_n = 2*pi*(n1/L1, n2/L2, n3/L3)``.  Mode indices may be negative:
    products such as ``sin(x)cos(y)`` need both ``x + y`` and ``x - y``.
    """

    modes: tuple
    periods: tuple = (2 * np.pi,) * 3
    amplitude: float = 1.0

    def __post_init__(self):
        modes = tuple(m if isinstance(m, FourierMode) else FourierMode(**m) for m in self.modes)
        if not modes:
            raise ValueError("a Fourier spec needs at least one mode")
        object.__setattr__(self, "modes", modes)
        periods = tuple(float(p) for p in self.periods)
        if len(periods) != 3 or not all(p > 0 for p in periods):
            raise ValueError("periods must be three positive numbers")
        object.__setattr__(self, "periods", periods)
        object.__setattr__(self, "amplitude", float(self.amplitude))

    def wavevector(self, mode):
        return 2 * np.pi * np.asarray(mode.n, dtype=float) / np.asarray(self.periods)

    @classmethod
    def from_dict(cls, data):
        modes = [FourierMode(m["n"], m.get("C", [0, 0, 0]), m.get("S", [0, 0, 0]))
                 for m in data["modes"]]
        return cls(tuple(modes), tuple(data.get("periods", (2 * np.pi,) * 3)),
                   data.get("amplitude", 1.0))

    def to_dict(self):
        return {"periods": list(self.periods), "amplitude": self.amplitude,
                "modes": [{"n": list(m.n), "C": m.C.tolist(), "S": m.S.tolist()}
                          for m in self.modes]}


def load_fourier_spec(path) -> FourierSpec:
    return FourierSpec.from_dict(json.loads(Path(path).read_text()))


def project_modes(spec: FourierSpec) -> FourierSpec:
    """Remove each coefficient's component along its mode's wavevector."""
    out = []
    for m in spec.modes:
        k = spec.wavevector(m)
        kk = k @ k
        if kk == 0:
            raise ValueError("the zero mode has no wavevector to project against")
        C = m.C - (k @ m.C) / kk * k
        S = m.S - (k @ m.S) / kk * k
        out.append(FourierMode(m.n, C, S))
    return replace(spec, modes=tuple(out))


def from_fourier(spec: FourierSpec, project: bool = True) -> AnalyticField:
    """Periodic 3-D field from a real Fourier series.

    The amplitude maps to ``U`` and the periods to ``L1..L3``, so the
    result embeds like any other ``U``-carried field.
    """
    if project:
        spec = project_modes(spec)
    n = np.array([m.n for m in spec.modes], dtype=float)
    C = np.array([m.C for m in spec.modes])
    S = np.array([m.S for m in spec.modes])

    def phases(c, P):
        lengths = np.array([P.L1, P.L2, P.L3])
        kvec = 2 * np.pi * n / lengths
        theta = sum(kvec[:, i].reshape((-1,) + (1,) * np.ndim(c[0])) * c[i] for i in range(3))
        return kvec, theta

    def velocity(c, t, P):
        c = np.broadcast_arrays(*c, t)[:3]
        _, theta = phases(c, P)
        cos, sin = np.cos(theta), np.sin(theta)
        return P.U * np.stack([np.tensordot(C[:, i], cos, 1) + np.tensordot(S[:, i], sin, 1)
                               for i in range(3)])

    def dudt(c, t, P):
        return 0.0 * velocity(c, t, P)

    def vorticity(c, t, P):
        c = np.broadcast_arrays(*c, t)[:3]
        kvec, theta = phases(c, P)
        kc, ks = np.cross(kvec, C), np.cross(kvec, S)
        cos, sin = np.cos(theta), np.sin(theta)
        return P.U * np.stack([np.tensordot(-kc[:, i], sin, 1) + np.tensordot(ks[:, i], cos, 1)
                               for i in range(3)])

    L1, L2, L3 = spec.periods
    params = FieldParameters(U=spec.amplitude, L1=L1, L2=L2, L3=L3)
    return AnalyticField(
        "fourier", params, 3, "periodic", "U", velocity, dudt,
        vorticity_fn=vorticity, period_fn=lambda P: (P.L1, P.L2, P.L3),
        divergence_free=project,
        description=f"real Fourier series with {len(spec.modes)} modes",
        meta={"spec": spec})


# -- self-similar families -----------------------------------------------------

def default_parameter_weights(alpha_x, alpha_t) -> dict:
    """Group exponent of each field parameter, read off the weight table."""
    wa = WeightAssignment(alpha_x, alpha_t, 0)
    return {name: wa[name].value for name in PARAM_NAMES}


@dataclass(frozen=True)
class SelfSimilarFamily:
    """One-parameter family ``k -> member(k)`` with ``member(1)`` the base field."""

    base: AnalyticField
    alpha_x: Fraction
    alpha_t: Fraction
    parameter_weights: Mapping[str, Fraction]

    @property
    def velocity_exponent(self) -> Fraction:
        """Exponent e in ``u_k(k^ax x, k^at t) = k^e u_1(x, t)``.

        This is the weight of the field's prefactor: ``alpha_x - alpha_t`` for
        ``U``-carried fields, ``a*alpha_t`` for a ``T^a`` prefactor.
        """
        return weight(self.base.prefactor, WeightAssignment(self.alpha_x, self.alpha_t, 0)).value

    def member(self, k) -> AnalyticField:
        k = float(k)
        if not k > 0:
            raise ValueError("scale factor k must be positive")
        return replace(self.base, params=self.base.params.scaled(self.parameter_weights, k))


def embed(field: AnalyticField, alpha_x, alpha_t, parameter_weights=None) -> SelfSimilarFamily:
    """Embed ``field`` as the identity-scale member of a self-similar family.

    Parameters rescale as ``L_i, h -> k^ax``, ``T -> k^at``,
    ``U -> k^(ax-at)`` and ``nu -> k^(2ax-at)``.  ``parameter_weights``
    overrides individual exponents.
    """
    ax, at = as_rational(alpha_x), as_rational(alpha_t)
    weights = default_parameter_weights(ax, at)
    if parameter_weights:
        weights.update({k: as_rational(v) for k, v in parameter_weights.items()})
    return SelfSimilarFamily(field, ax, at, weights)
