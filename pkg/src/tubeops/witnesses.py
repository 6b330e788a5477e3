"""Test-function families whose images are known in closed form, norm-ratio sweeps and duality checks.

Two families are used:

* the direct family ``f_{xi,eta}(z,w) = rho(xi)^{E_1} rho(eta)^{E_2} / (rho(z,xi)^{n+1+b_1} rho(w,eta)^{n+1+b_2})``
  with ``E_i = n+1+b_i-(n+1+alpha_i)/p_i``, whose ``L^p_alpha`` norm does not
  depend on the anchors and whose image under T is
  ``C rho(z)^{a_1} rho(w)^{a_2} rho(xi)^{E_1} rho(eta)^{E_2} / (rho(z,xi)^{c_1} rho(w,eta)^{c_2})``;
* the dual family ``f_{u,eta}(z,w) = rho(z)^{t_1} rho(w)^{t_2} / (rho(z,u i)^{s_1} rho(w,eta i)^{s_2})``
  anchored on the vertical ray through ``i = (0', i)``, whose image under T*
  is again a single power of ``rho(z, u i)``.

Moving the anchors along the vertical ray ``(0', t i)`` scales every norm by
a power of ``t``; the ratio ``||T f|| / ||f||`` behaves like
``t^{sum_i (crit_i - c_i)}``, which is flat exactly on the critical line.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .classifier import exponents
from .geometry import TubePoint, complex_power_array, rho, rho_array, rho_pair_array
from .integration import IntegralResult, QuadratureConfig, SlotFunction, WeightedFunction, integrate_tube, slot_norm
from .operators import OperatorParams, apply_slot
from .special_functions import c1_constant

DEFAULT_SCALES = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)


class WitnessError(ValueError):
    """The family's exponents are outside the range where its norms are finite."""


def direct_exponent(n: int, p: float, b: float, alpha: float) -> float:
    """``n+1+b-(n+1+alpha)/p``; equals ``b - alpha`` when ``p = 1``."""
    return n + 1 + b - (n + 1 + alpha) / p


@dataclass(frozen=True)
class WitnessFamily:
    kind: str
    n: int
    anchors: tuple[TubePoint, TubePoint]
    powers: tuple[float, float]
    prefactors: tuple[float, float]
    rho_exponents: tuple[float, float] = (0.0, 0.0)

    def slot(self, i: int) -> SlotFunction:
        anchor, power, pref = self.anchors[i], self.powers[i], self.prefactors[i]

        def fn(x: np.ndarray, y: np.ndarray) -> np.ndarray:
            return pref * complex_power_array(rho_pair_array(x, y, anchor), -power)

        return SlotFunction(fn, self.rho_exponents[i], anchor=anchor, scale=rho(anchor))

    @property
    def function(self) -> WeightedFunction:
        return WeightedFunction.product(self.n, self.slot(0), self.slot(1))


def make_direct_family(n: int, p, params: OperatorParams, xi: TubePoint, eta: TubePoint) -> WitnessFamily:
    """``f_{xi,eta}``; needs ``alpha_i + 1 < p_i (b_i + 1)`` in each slot with finite ``p_i``."""
    p = exponents(p)
    pref, powers = [], []
    for i, anchor in enumerate((xi, eta)):
        b, al = params.b[i], params.alpha[i]
        if math.isinf(p[i]):
            raise WitnessError("the direct family is defined for finite source exponents")
        if not al + 1 < p[i] * (b + 1):
            raise WitnessError(f"slot {i + 1}: need alpha+1 < p(b+1), got alpha={al}, b={b}, p={p[i]}")
        pref.append(rho(anchor) ** direct_exponent(n, p[i], b, al))
        powers.append(n + 1 + b)
    return WitnessFamily("direct_family", n, (xi, eta), tuple(powers), tuple(pref))


@dataclass(frozen=True)
class DualExponents:
    s: tuple[float, float]
    t: tuple[float, float]


def _inv_conjugate(q: float) -> float:
    return 0.0 if q == 1.0 else (1.0 if math.isinf(q) else 1.0 - 1.0 / q)


def dual_exponents(n: int, q, params: OperatorParams) -> DualExponents:
    """Exponents one unit above each lower threshold, with ``s_i >= 1``."""
    q = exponents(q)
    ss, ts = [], []
    for i in range(2):
        a, c, be = params.a[i], params.c[i], params.beta[i]
        iq = _inv_conjugate(q[i])
        t = max(-(be + 1) * iq, -a - be - 1) + 1.0
        gap = max((n + 1 + be) * iq, be + a - c + n + 1) + 1.0
        ss.append(max(t + gap, 1.0))
        ts.append(t)
    return DualExponents(tuple(ss), tuple(ts))


def make_dual_family(n: int, q, params: OperatorParams, u: float, eta: float, exps: DualExponents | None = None) -> WitnessFamily:
    """``f_{u,eta}`` anchored at ``u i`` and ``eta i``."""
    exps = exps or dual_exponents(n, q, params)
    for i in range(2):
        if not exps.s[i] > 0:
            raise WitnessError("dual-family exponents need s_i > 0")
    anchors = (TubePoint.vertical(n, u), TubePoint.vertical(n, eta))
    return WitnessFamily("dual_family", n, anchors, exps.s, (1.0, 1.0), exps.t)


@dataclass(frozen=True)
class ClosedFormImage:
    """``constant * prod_i rho(z_i)^{outer_i} / rho(z_i, anchor_i)^{power_i}``."""

    constant: float
    outer: tuple[float, float]
    anchors: tuple[TubePoint, TubePoint]
    powers: tuple[float, float]
    description: str

    def slot_value(self, i: int, z: TubePoint) -> complex:
        x, y = np.array([z.x]), np.array([z.y])
        kern = complex_power_array(rho_pair_array(x, y, self.anchors[i]), -self.powers[i])[0]
        return rho(z) ** self.outer[i] * kern

    def __call__(self, z: TubePoint, w: TubePoint) -> complex:
        return self.constant * self.slot_value(0, z) * self.slot_value(1, w)


def closed_form_T_image(params: OperatorParams, family: WitnessFamily) -> ClosedFormImage:
    """Image of the direct family under T, from two applications of the integral identity."""
    if family.kind != "direct_family":
        raise WitnessError("T images are closed-form for the direct family")
    n = family.n
    consts = [c1_constant(n, params.c[i], n + 1 + params.b[i], params.b[i]) for i in range(2)]
    constant = consts[0] * consts[1] * family.prefactors[0] * family.prefactors[1]
    desc = (
        f"C1({n},{params.c[0]:g},{n + 1 + params.b[0]:g},{params.b[0]:g}) * "
        f"C1({n},{params.c[1]:g},{n + 1 + params.b[1]:g},{params.b[1]:g}) = {consts[0] * consts[1]:.12g}"
    )
    return ClosedFormImage(constant, params.a, family.anchors, params.c, desc)


def closed_form_adjoint_image(params: OperatorParams, family: WitnessFamily) -> ClosedFormImage:
    """Image of the dual family under T*."""
    if family.kind != "dual_family":
        raise WitnessError("T* images are closed-form for the dual family")
    n = family.n
    consts, powers = [], []
    for i in range(2):
        c, s, t = params.c[i], family.powers[i], family.rho_exponents[i]
        tt = params.beta[i] + params.a[i] + t
        consts.append(c1_constant(n, c, s, tt))
        powers.append(c + s - (n + 1 + tt))
    outer = tuple(params.b[i] - params.alpha[i] for i in range(2))
    desc = f"C1 product = {consts[0] * consts[1]:.12g}"
    return ClosedFormImage(consts[0] * consts[1], outer, family.anchors, tuple(powers), desc)


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepRow:
    scale: float
    ratio: float
    slope: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    slope: float
    converged: bool

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["scale", "ratio", "slope"])
        for row in self.rows:
            writer.writerow([repr(row.scale), repr(row.ratio), "" if math.isnan(row.slope) else repr(row.slope)])
        return buf.getvalue()


def _second_constant(n: int, kernel_power: float, weight: float, cfg: QuadratureConfig) -> IntegralResult:
    """``int rho(u)^weight / |rho(i,u)|^kernel_power dV(u)`` at the base point."""
    base = TubePoint.vertical(n, 1.0)
    return integrate_tube(
        lambda x, y: np.abs(rho_pair_array(x, y, base)) ** (-kernel_power), n, weight, cfg, anchor=base, scale=1.0
    )


def _image_slot(params: OperatorParams, i: int, image: ClosedFormImage, constant: float) -> SlotFunction:
    anchor, outer, power = image.anchors[i], image.outer[i], image.powers[i]
    return SlotFunction(
        lambda x, y: constant * complex_power_array(rho_pair_array(x, y, anchor), -power),
        rho_exponent=outer,
        anchor=anchor,
        scale=rho(anchor),
    )


def _ratio_quadrature(n, p, q, params, t, cfg) -> tuple[float, bool]:
    anchor = TubePoint.vertical(n, t)
    family = make_direct_family(n, p, params, anchor, anchor)
    image = closed_form_T_image(params, family)
    log_ratio, converged = 0.0, True
    for i in range(2):
        const = c1_constant(n, params.c[i], n + 1 + params.b[i], params.b[i]) * family.prefactors[i]
        top = slot_norm(_image_slot(params, i, image, const), n, q[i], params.beta[i], cfg)
        bottom = slot_norm(family.slot(i), n, p[i], params.alpha[i], cfg)
        if top.divergent or bottom.divergent:
            return math.inf, False
        converged &= top.converged and bottom.converged
        log_ratio += math.log(top.value) - math.log(bottom.value)
    return math.exp(log_ratio), converged


def _ratio_closed_form(n, p, q, params, cfg):
    """Ratio as a function of ``t`` from homogeneity and constants evaluated once at ``t = 1``."""
    log_const, power, converged = 0.0, 0.0, True
    for i in range(2):
        a, b, c, al, be = params.a[i], params.b[i], params.c[i], params.alpha[i], params.beta[i]
        e = direct_exponent(n, p[i], b, al)
        src = _second_constant(n, (n + 1 + b) * p[i], al, cfg)
        dst = _second_constant(n, c * q[i], be + a * q[i], cfg)
        if src.divergent or dst.divergent:
            return None, False
        converged &= src.converged and dst.converged
        c1 = c1_constant(n, c, n + 1 + b, b)
        log_const += math.log(c1) + math.log(dst.value) / q[i] - math.log(src.value) / p[i]
        power += e + (n + 1 + be) / q[i] + a - c
    return (lambda t: math.exp(log_const + power * math.log(t))), converged


def _fit_slope(scales: Sequence[float], ratios: Sequence[float]) -> float:
    if len(scales) < 2:
        return math.nan
    return -float(np.polyfit(np.log(scales), np.log(ratios), 1)[0])


def blowup_sweep(
    n: int,
    p,
    q,
    params: OperatorParams,
    scales: Sequence[float] = DEFAULT_SCALES,
    cfg: QuadratureConfig | None = None,
    method: str = "closed_form",
) -> SweepResult:
    """Norm ratio ``||T f_t|| / ||f_t||`` along anchors ``(0', t i)``.

    The reported slope is ``-d log(ratio) / d log(t)``, fitted by least
    squares; it equals ``sum_i (c_i - crit_i)``, so it vanishes on the critical
    line and has the sign of the offset off it.  ``method`` is
    ``"closed_form"`` (homogeneity plus constants computed once) or
    ``"quadrature"`` (every norm integrated at every scale).
    """
    cfg = cfg or QuadratureConfig()
    p, q = exponents(p), exponents(q)
    if any(math.isinf(v) for v in (*p, *q)):
        raise WitnessError("sweeps cover finite exponents")
    ratios, converged = [], True
    if method == "closed_form":
        fn, converged = _ratio_closed_form(n, p, q, params, cfg)
        if fn is None:
            raise WitnessError("a norm of the family or its image is infinite")
        ratios = [fn(t) for t in scales]
    elif method == "quadrature":
        for t in scales:
            ratio, conv = _ratio_quadrature(n, p, q, params, t, cfg)
            if not math.isfinite(ratio):
                raise WitnessError("a norm of the family or its image is infinite")
            ratios.append(ratio)
            converged &= conv
    else:
        raise ValueError(f"unknown sweep method {method!r}")
    rows = [
        SweepRow(t, r, _fit_slope(scales[: k + 1], ratios[: k + 1])) for k, (t, r) in enumerate(zip(scales, ratios))
    ]
    return SweepResult(tuple(rows), _fit_slope(scales, ratios), converged)


# ---------------------------------------------------------------------------
# bumps and duality


def make_bump(center: TubePoint, half_widths: tuple[float, float], amplitude: complex = 1.0, frequency: float = 0.0) -> SlotFunction:
    """Smooth bump supported in a box around ``center`` (``n = 1``), equal to ``amplitude`` at the center.

    ``frequency`` adds an oscillating phase ``exp(i frequency x)`` so pairings
    are genuinely complex.
    """
    if center.dim != 1:
        raise ValueError("bumps are defined on the upper half-plane")
    hx, hy = (float(h) for h in half_widths)
    x0, y0 = center.x[0], center.y[0]
    if not (hx > 0 and 0 < hy < y0):
        raise ValueError("the bump box must be nondegenerate and stay inside the half-plane")
    box = ((x0 - hx, x0 + hx), (y0 - hy, y0 + hy))

    def fn(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        u = (x[:, 0] - x0) / hx
        v = (y[:, 0] - y0) / hy
        inside = (np.abs(u) < 1) & (np.abs(v) < 1)
        us = np.where(inside, u, 0.0)
        vs = np.where(inside, v, 0.0)
        body = np.exp(2.0 - 1.0 / (1.0 - us**2) - 1.0 / (1.0 - vs**2))
        phase = np.exp(1j * frequency * (x[:, 0] - x0)) if frequency else 1.0
        return np.where(inside, amplitude * body * phase, 0.0)

    return SlotFunction(fn, anchor=center, support=box, scale=hy)


def random_bump(rng: np.random.Generator) -> SlotFunction:
    y0 = 10.0 ** rng.uniform(-0.5, 0.5)
    center = TubePoint((rng.uniform(-2, 2),), (y0,))
    half = (y0 * rng.uniform(0.2, 0.8), y0 * rng.uniform(0.2, 0.7))
    amp = complex(rng.normal(), rng.normal())
    return make_bump(center, half, amp, rng.uniform(-2, 2))


def _box_rule(box, order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    t, w = np.polynomial.legendre.leggauss(order)
    (x0, x1), (y0, y1) = box
    xs = 0.5 * (x1 - x0) * t + 0.5 * (x1 + x0)
    ys = 0.5 * (y1 - y0) * t + 0.5 * (y1 + y0)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    W = np.outer(w * 0.5 * (x1 - x0), w * 0.5 * (y1 - y0))
    return X.reshape(-1, 1), Y.reshape(-1, 1), W.reshape(-1)


def _pairing_slot(
    params: OperatorParams, slot: int, f: SlotFunction, g: SlotFunction, weight: float, order: int, cfg
) -> complex:
    """``int (T_slot f)(z) conj(g(z)) rho(z)^weight dV(z)`` with the outer integral on g's box."""
    x, y, w = _box_rule(g.support, order)
    gv = np.conj(g(x, y)) * rho_array(y) ** weight * w
    keep = np.nonzero(gv)[0]
    total = 0j
    for k in keep:
        z = TubePoint((x[k, 0],), (y[k, 0],))
        total += apply_slot(params, slot, f, z, cfg).value * gv[k]
    return total


@dataclass(frozen=True)
class DualityReport:
    forward: complex
    backward: complex
    gap: float


def duality_gap(
    params: OperatorParams,
    f: WeightedFunction,
    g: WeightedFunction,
    cfg: QuadratureConfig | None = None,
    orders: tuple[int, int] = (12, 16),
) -> DualityReport:
    """Relative gap between ``<T f, g>_beta`` and ``<f, T* g>_alpha`` for separable bump inputs.

    The two sides use different outer rules: T f is sampled on g's support
    and T* g on f's support, each inner integral being an adaptive box
    integral through the operator code.
    """
    cfg = cfg or QuadratureConfig(rel_tol=1e-6)
    if not (f.separable and g.separable):
        raise ValueError("duality checks take separable inputs")
    if any(s.support is None for s in (*f.factors, *g.factors)):
        raise ValueError("duality checks take compactly supported factors (see make_bump)")
    adj = params.adjoint()
    forward, backward = 1.0 + 0j, 1.0 + 0j
    for i in range(2):
        forward *= _pairing_slot(params, i, f.factors[i], g.factors[i], params.beta[i], orders[0], cfg)
        # <f, T* g> = conj(<T* g, f>)
        backward *= np.conj(_pairing_slot(adj, i, g.factors[i], f.factors[i], params.alpha[i], orders[1], cfg))
    scale = max(abs(forward), abs(backward))
    gap = 0.0 if scale == 0 else abs(forward - backward) / scale
    return DualityReport(complex(forward), complex(backward), float(gap))


def bump_pair(seed: int) -> tuple[WeightedFunction, WeightedFunction]:
    rng = np.random.default_rng(seed)
    f = WeightedFunction.product(1, random_bump(rng), random_bump(rng))
    g = WeightedFunction.product(1, random_bump(rng), random_bump(rng))
    return f, g


__all__ = [
    "ClosedFormImage",
    "DualExponents",
    "DualityReport",
    "SweepResult",
    "SweepRow",
    "WitnessError",
    "WitnessFamily",
    "blowup_sweep",
    "bump_pair",
    "closed_form_T_image",
    "closed_form_adjoint_image",
    "direct_exponent",
    "dual_exponents",
    "duality_gap",
    "make_bump",
    "make_direct_family",
    "make_dual_family",
]
