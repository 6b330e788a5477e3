"""The operators T and S with kernels ``rho(u)^b / rho(z,u)^c``, their adjoint, and the special cases.

Every operator acts slot by slot: on a separable ``f = f1 (x) f2`` the image
is the product of two single-domain integrals, which is how values are
computed here.  Generic inputs fall back to joint Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import TubePoint, complex_power_array, rho, rho_pair_array
from .integration import (
    IntegralResult,
    QuadratureConfig,
    SlotFunction,
    WeightedFunction,
    _joint_monte_carlo,
    _product,
    integrate_tube,
)

Pair = tuple[float, float]


class InadmissibleWeightsError(ValueError):
    """Weights outside ``alpha_i > -1`` without the formal flag, or quadrature against formal weights."""


def _pair(values) -> Pair:
    a, b = (float(v) for v in values)
    return (a, b)


@dataclass(frozen=True)
class OperatorParams:
    """Exponents of ``T_{a,b,c}`` / ``S_{a,b,c}`` with source weights ``alpha`` and target weights ``beta``.

    ``beta`` is only consulted for finite target exponents, so it is not
    validated here.
    """

    a: Pair
    b: Pair
    c: Pair
    alpha: Pair = (0.0, 0.0)
    beta: Pair = (0.0, 0.0)
    formal: bool = False

    def __post_init__(self) -> None:
        for name in ("a", "b", "c", "alpha", "beta"):
            value = _pair(getattr(self, name))
            if not all(math.isfinite(v) for v in value):
                raise ValueError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if not self.formal and min(self.alpha) <= -1.0:
            raise InadmissibleWeightsError(
                f"source weights must exceed -1, got alpha={self.alpha}; set formal=True for classifier-only use"
            )

    @property
    def admissible(self) -> bool:
        return min(self.alpha) > -1.0

    def swapped(self) -> "OperatorParams":
        """Exchange the roles of the two slots."""
        flip = lambda v: (v[1], v[0])  # noqa: E731
        return OperatorParams(flip(self.a), flip(self.b), flip(self.c), flip(self.alpha), flip(self.beta), self.formal)

    def with_c(self, c) -> "OperatorParams":
        return replace(self, c=_pair(c))

    def adjoint(self) -> "OperatorParams":
        """Parameters of T* as an operator of the same shape.

        ``T* f(z) = rho(z)^{b-alpha} int rho(u)^{beta+a} f(u) / rho(z,u)^c dV(u)`` slotwise,
        acting from the beta-weighted space to the alpha-weighted one.
        """
        a = tuple(b - al for b, al in zip(self.b, self.alpha))
        b = tuple(be + a0 for be, a0 in zip(self.beta, self.a))
        return OperatorParams(a, b, self.c, self.beta, self.alpha, formal=True)


def make_projection(n: int, gamma, alpha=(0.0, 0.0), beta=(0.0, 0.0)) -> OperatorParams:
    """``P_gamma = T_{0, gamma, n+1+gamma}``."""
    g = _check_gamma(gamma)
    return OperatorParams((0.0, 0.0), g, tuple(n + 1 + v for v in g), alpha, beta, formal=min(_pair(alpha)) <= -1)


def make_berezin(n: int, gamma, alpha=(0.0, 0.0), beta=(0.0, 0.0)) -> OperatorParams:
    """``B_gamma = S_{n+1+gamma, gamma, 2(n+1+gamma)}``."""
    g = _check_gamma(gamma)
    return OperatorParams(
        tuple(n + 1 + v for v in g),
        g,
        tuple(2 * (n + 1 + v) for v in g),
        alpha,
        beta,
        formal=min(_pair(alpha)) <= -1,
    )


def make_Tc(c, gamma, beta=(0.0, 0.0)) -> OperatorParams:
    """``T_c^gamma = T_{0, gamma, c}`` acting on the gamma-weighted space."""
    g = _check_gamma(gamma)
    return OperatorParams((0.0, 0.0), g, _pair(c), g, beta)


def _check_gamma(gamma) -> Pair:
    g = _pair(gamma)
    if min(g) <= -1.0:
        raise InadmissibleWeightsError(f"gamma must exceed -1, got {g}")
    return g


def _slot_integral(
    n: int,
    a: float,
    b: float,
    c: float,
    f: SlotFunction,
    z: TubePoint,
    cfg: QuadratureConfig,
    modulus_kernel: bool,
) -> IntegralResult:
    fn = f.fn

    def g(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        kern = rho_pair_array(x, y, z, reverse=True)
        if modulus_kernel:
            kv = np.abs(kern) ** (-c)
        else:
            kv = complex_power_array(kern, -c)
        return np.asarray(fn(x, y)) * kv

    weight = b + f.rho_exponent
    if f.support is not None and n == 1:
        res = integrate_tube(g, n, weight, cfg, support=f.support)
    else:
        anchor, scale = _locate(z, f.anchor, f.scale)
        res = integrate_tube(g, n, weight, cfg, anchor=anchor, scale=scale)
    if res.divergent:
        return res
    factor = rho(z) ** a
    return replace(res, value=res.value * factor, est_error=res.est_error * factor)


def _locate(z: TubePoint, other: TubePoint | None, other_scale: float | None) -> tuple[TubePoint, float]:
    """Center and scale for an integrand peaked near ``z`` and near ``other``."""
    if other is None:
        return z, rho(z)
    x = tuple(0.5 * (p + q) for p, q in zip(z.x, other.x))
    y = tuple(0.5 * (p + q) for p, q in zip(z.y, other.y))
    gap = max(abs(p - q) for p, q in zip(z.as_complex(), other.as_complex()))
    scale = max(rho(z), other_scale or rho(other), gap)
    return TubePoint(x, y), scale


def _apply(
    params: OperatorParams,
    f: WeightedFunction,
    z: TubePoint,
    w: TubePoint,
    cfg: QuadratureConfig | None,
    modulus_kernel: bool,
) -> IntegralResult:
    if not params.admissible:
        raise InadmissibleWeightsError("quadrature against formal weights is not allowed")
    cfg = cfg or QuadratureConfig()
    n = z.dim
    if f.separable:
        parts = []
        for k, point in enumerate((z, w)):
            res = _slot_integral(
                n,
                params.a[k],
                params.b[k],
                params.c[k],
                f.factors[k],
                point,
                replace(cfg, seed=cfg.seed + k),
                modulus_kernel,
            )
            if res.divergent:
                return res
            parts.append(res)
        return _product(*parts)
    return _apply_generic(params, f, z, w, cfg, modulus_kernel)


def _apply_generic(params, f, z, w, cfg, modulus_kernel) -> IntegralResult:
    def kernel(x, y, point, c):
        kern = rho_pair_array(x, y, point, reverse=True)
        return np.abs(kern) ** (-c) if modulus_kernel else complex_power_array(kern, -c)

    def joint(x1, y1, x2, y2):
        return f.evaluate(x1, y1, x2, y2) * kernel(x1, y1, z, params.c[0]) * kernel(x2, y2, w, params.c[1])

    hints = (
        f.hint(0) or SlotFunction(lambda x, y: x, anchor=z),
        f.hint(1) or SlotFunction(lambda x, y: x, anchor=w),
    )
    res = _joint_monte_carlo(WeightedFunction.generic(z.dim, joint, hints), z.dim, params.b, cfg)
    factor = rho(z) ** params.a[0] * rho(w) ** params.a[1]
    return replace(res, value=res.value * factor, est_error=res.est_error * factor)


def apply_T(params: OperatorParams, f: WeightedFunction, z: TubePoint, w: TubePoint, cfg=None) -> IntegralResult:
    """``T f(z, w)`` with the analytic kernel ``rho(z,u)^{-c_1} rho(w,eta)^{-c_2}``."""
    return _apply(params, f, z, w, cfg, modulus_kernel=False)


def apply_S(params: OperatorParams, f: WeightedFunction, z: TubePoint, w: TubePoint, cfg=None) -> IntegralResult:
    """``S f(z, w)`` with the modulus kernel ``|rho(z,u)|^{-c_1} |rho(w,eta)|^{-c_2}``."""
    return _apply(params, f, z, w, cfg, modulus_kernel=True)


def apply_T_adjoint(
    params: OperatorParams, f: WeightedFunction, z: TubePoint, w: TubePoint, cfg=None
) -> IntegralResult:
    """``T* f(z, w)`` for the pairings weighted by ``alpha`` (source) and ``beta`` (target)."""
    if not params.admissible:
        raise InadmissibleWeightsError("quadrature against formal weights is not allowed")
    return _apply(params.adjoint(), f, z, w, cfg, modulus_kernel=False)


def apply_slot(
    params: OperatorParams, slot: int, f: SlotFunction, z: TubePoint, cfg=None, modulus_kernel: bool = False
) -> IntegralResult:
    """One slot of T (or S): ``rho(z)^{a_i} int rho(u)^{b_i} f(u) / rho(z,u)^{c_i} dV(u)``."""
    if not params.admissible:
        raise InadmissibleWeightsError("quadrature against formal weights is not allowed")
    return _slot_integral(
        z.dim, params.a[slot], params.b[slot], params.c[slot], f, z, cfg or QuadratureConfig(), modulus_kernel
    )


def constant_function(n: int) -> WeightedFunction:
    one = SlotFunction(lambda x, y: np.ones(len(x)))
    return WeightedFunction.product(n, one, one)


def rho_power_function(n: int, exponents: Pair) -> WeightedFunction:
    """``rho(u)^{e_1} rho(eta)^{e_2}``."""
    slots = [SlotFunction(lambda x, y: np.ones(len(x)), rho_exponent=float(e)) for e in exponents]
    return WeightedFunction.product(n, *slots)


__all__ = [
    "InadmissibleWeightsError",
    "OperatorParams",
    "apply_S",
    "apply_T",
    "apply_T_adjoint",
    "apply_slot",
    "constant_function",
    "make_Tc",
    "make_berezin",
    "make_projection",
    "rho_power_function",
]
