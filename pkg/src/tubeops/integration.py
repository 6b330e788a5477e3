"""Quadrature over T_B and T_B x T_B, mixed norms, and checks of the integral identities.

Two engines are provided.

``adaptive_tensor`` (``n = 1``)
    The half-plane is parametrized in log-polar coordinates around a boundary
    point ``(x_c, 0)``: ``x = x_c + e^s cos(theta)``, ``y = e^s sin(theta)``.
    The ``s`` window is grown by ``log(truncation_growth)`` at both ends until
    the newest strips are negligible, which is the same as growing the radius
    of the truncated domain geometrically.  Panels carry 16-node Gauss rules
    (checked against an 8-node rule) and are bisected adaptively.  Panels
    touching the boundary use Gauss-Jacobi nodes for the weight ``rho^w``, so
    ``w > -1`` is integrated without dyadic mesh grading.

``monte_carlo`` (any ``n``)
    Importance sampling in the coordinates ``(x, y', rho)`` with Cauchy
    proposals for ``x`` and ``y'`` and a Student-t proposal for ``log rho``;
    the map ``(y', rho) -> y`` has unit Jacobian, so the proposal covers the
    whole domain and the weights are exact.

Integrands are vectorized callables ``g(x, y)`` taking arrays of shape
``(N, n)`` and returning shape ``(N,)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_jacobi

from .geometry import (
    TubePoint,
    complex_power_array,
    rho,
    rho_array,
    rho_pair,
    rho_pair_array,
    sample_points,
)
from .special_functions import DivergentParameterError, c1_constant, first_identity_admissible

Integrand = Callable[[np.ndarray, np.ndarray], np.ndarray]
Box = tuple[tuple[float, float], tuple[float, float]]

METHODS = ("adaptive_tensor", "monte_carlo")


@dataclass(frozen=True)
class QuadratureConfig:
    method: str = "adaptive_tensor"
    rel_tol: float = 1e-4
    max_evals: int = 4_000_000
    seed: int = 0
    truncation_growth: float = 2.0

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if not 0.0 < self.rel_tol < 0.5:
            raise ValueError("rel_tol must lie in (0, 0.5)")
        if self.max_evals < 1000:
            raise ValueError("max_evals must be at least 1000")
        if not self.truncation_growth > 1.0:
            raise ValueError("truncation_growth must exceed 1")

    def for_dim(self, n: int) -> "QuadratureConfig":
        """The adaptive engine is two-dimensional; higher ``n`` falls back to Monte Carlo."""
        if n > 1 and self.method == "adaptive_tensor":
            return replace(self, method="monte_carlo", rel_tol=max(self.rel_tol, 1e-2))
        return self


@dataclass(frozen=True)
class IntegralResult:
    value: complex | float
    est_error: float
    evals: int
    converged: bool
    divergent: bool = False
    lower_bound: bool = False
    method: str = ""

    @property
    def magnitude(self) -> float:
        return abs(self.value)


def _product(a: IntegralResult, b: IntegralResult) -> IntegralResult:
    value = a.value * b.value
    err = abs(a.value) * b.est_error + abs(b.value) * a.est_error + a.est_error * b.est_error
    return IntegralResult(
        value=value,
        est_error=err,
        evals=a.evals + b.evals,
        converged=a.converged and b.converged,
        divergent=a.divergent or b.divergent,
        lower_bound=a.lower_bound or b.lower_bound,
        method=a.method or b.method,
    )


# ---------------------------------------------------------------------------
# adaptive tensor engine (n = 1)

_HIGH = 16
_LOW = 8


@lru_cache(maxsize=None)
def _legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


@lru_cache(maxsize=256)
def _jacobi(order: int, alpha: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = roots_jacobi(order, alpha, beta)
    return np.asarray(nodes), np.asarray(weights)

_INTERIOR, _LEFT, _RIGHT = 0, 1, 2


@dataclass
class _Panels:
    """Rectangles ``[a0, a1] x [b0, b1]`` with cached rule values."""

    a0: np.ndarray
    a1: np.ndarray
    b0: np.ndarray
    b1: np.ndarray
    kind: np.ndarray
    value: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    error: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @classmethod
    def empty(cls) -> "_Panels":
        z = np.zeros(0)
        return cls(z, z, z, z, np.zeros(0, dtype=int))

    def extend(self, other: "_Panels") -> None:
        for name in ("a0", "a1", "b0", "b1", "kind", "value", "error"):
            setattr(self, name, np.concatenate([getattr(self, name), getattr(other, name)]))

    def take(self, mask: np.ndarray) -> "_Panels":
        return _Panels(*(getattr(self, k)[mask] for k in ("a0", "a1", "b0", "b1", "kind", "value", "error")))

    def __len__(self) -> int:
        return len(self.a0)


class _PanelRule:
    """Evaluates tensor Gauss rules on batches of panels.

    ``polar=True`` treats ``(a, b)`` as ``(s, theta)``; otherwise as ``(x, y)``.
    Panel kinds mark the side touching the boundary, where Gauss-Jacobi nodes
    absorb the factor ``theta^w`` or ``(pi - theta)^w``.
    """

    def __init__(self, g: Integrand, weight: float, polar: bool, center_x: float = 0.0):
        self.g = g
        self.weight = weight
        self.polar = polar
        self.center_x = center_x
        self.evals = 0

    def _nodes_b(self, order: int, kind: int) -> tuple[np.ndarray, np.ndarray]:
        if kind == _LEFT:
            return _jacobi(order, 0.0, self.weight)
        if kind == _RIGHT:
            return _jacobi(order, self.weight, 0.0)
        return _legendre(order)

    def _apply(self, panels: _Panels, order: int) -> np.ndarray:
        out = np.zeros(len(panels), dtype=complex)
        xa, wa = _legendre(order)
        w = self.weight
        for kind in (_INTERIOR, _LEFT, _RIGHT):
            sel = np.nonzero(panels.kind == kind)[0]
            if sel.size == 0:
                continue
            a0, a1 = panels.a0[sel, None], panels.a1[sel, None]
            b0, b1 = panels.b0[sel, None], panels.b1[sel, None]
            xb, wb = self._nodes_b(order, kind)
            ha, hb = 0.5 * (a1 - a0), 0.5 * (b1 - b0)
            an = a0 + ha * (xa + 1.0)
            bn = b0 + hb * (xb + 1.0)
            if kind == _INTERIOR:
                bscale = hb
            else:
                bscale = hb ** (w + 1.0)
            A = np.repeat(an[:, :, None], order, axis=2)
            B = np.repeat(bn[:, None, :], order, axis=1)
            if self.polar:
                r = np.exp(A)
                x = self.center_x + r * np.cos(B)
                y = r * np.sin(B)
                sinb = np.sin(B)
                if kind == _INTERIOR:
                    ang = sinb ** w
                elif kind == _LEFT:
                    ang = (sinb / B) ** w
                else:
                    ang = (sinb / (np.pi - B)) ** w
                jac = r ** (w + 2.0) * ang
            else:
                x, y = A, B
                if kind != _INTERIOR:
                    raise AssertionError("boundary panels only occur in polar mode")
                jac = y ** w
            vals = np.asarray(self.g(x.reshape(-1, 1), y.reshape(-1, 1)), dtype=complex).reshape(A.shape)
            self.evals += vals.size
            vals = np.where(jac == 0.0, 0.0, vals * jac)
            tot = np.einsum("pij,i,j->p", vals, wa, wb)
            out[sel] = tot * ha[:, 0] * bscale[:, 0]
        return out

    def evaluate(self, panels: _Panels) -> None:
        hi = self._apply(panels, _HIGH)
        lo = self._apply(panels, _LOW)
        if not np.all(np.isfinite(hi)):
            raise FloatingPointError("integrand is not finite at quadrature nodes")
        panels.value = hi
        panels.error = np.abs(hi - lo)


def _split(panels: _Panels) -> _Panels:
    am = 0.5 * (panels.a0 + panels.a1)
    bm = 0.5 * (panels.b0 + panels.b1)
    a0 = np.concatenate([panels.a0, panels.a0, am, am])
    a1 = np.concatenate([am, am, panels.a1, panels.a1])
    b0 = np.concatenate([panels.b0, bm, panels.b0, bm])
    b1 = np.concatenate([bm, panels.b1, bm, panels.b1])
    # only the child that still touches the boundary keeps the Jacobi rule
    k = panels.kind
    k_low = np.where(k == _RIGHT, _INTERIOR, k)
    k_high = np.where(k == _LEFT, _INTERIOR, k)
    kind = np.concatenate([k_low, k_high, k_low, k_high])
    return _Panels(a0, a1, b0, b1, kind)


def _refine(panels: _Panels, rule: _PanelRule, rel_share: float, max_evals: int) -> _Panels:
    while True:
        total = panels.value.sum()
        err = panels.error.sum()
        mass = np.abs(panels.value).sum()
        if err <= rel_share * abs(total) or err <= 1e-15 * mass or mass == 0.0:
            return panels
        if rule.evals >= max_evals:
            return panels
        threshold = 0.25 * panels.error.max()
        mask = panels.error >= threshold
        children = _split(panels.take(mask))
        rule.evaluate(children)
        kept = panels.take(~mask)
        kept.extend(children)
        panels = kept


def _theta_strip(s0: float, s1: float) -> _Panels:
    edges = np.linspace(0.0, np.pi, 5)
    kind = np.array([_LEFT, _INTERIOR, _INTERIOR, _RIGHT])
    return _Panels(np.full(4, s0), np.full(4, s1), edges[:-1].copy(), edges[1:].copy(), kind)


def _adaptive_box(g: Integrand, weight: float, box: Box, cfg: QuadratureConfig) -> IntegralResult:
    (x0, x1), (y0, y1) = box
    if not y0 > 0.0:
        raise ValueError("support box must stay away from the boundary")
    rule = _PanelRule(g, weight, polar=False)
    xs = np.linspace(x0, x1, 3)
    ys = np.linspace(y0, y1, 3)
    A0, B0 = np.meshgrid(xs[:-1], ys[:-1], indexing="ij")
    A1, B1 = np.meshgrid(xs[1:], ys[1:], indexing="ij")
    panels = _Panels(A0.ravel(), A1.ravel(), B0.ravel(), B1.ravel(), np.zeros(A0.size, dtype=int))
    rule.evaluate(panels)
    panels = _refine(panels, rule, 0.5 * cfg.rel_tol, cfg.max_evals)
    value = panels.value.sum()
    err = float(panels.error.sum())
    converged = err <= cfg.rel_tol * abs(value) or (value == 0 and err == 0)
    return IntegralResult(_squeeze(value), err, rule.evals, bool(converged), method="adaptive_tensor")


def _squeeze(value: complex) -> complex | float:
    value = complex(value)
    return value.real if value.imag == 0.0 else value


def _stalled(inc: list, span: int = 3) -> bool:
    """True when the last ``span`` increments shrink by less than 2% per step."""
    recent = inc[-span:]
    return len(recent) == span and all(abs(recent[k + 1]) >= 0.98 * abs(recent[k]) for k in range(span - 1))


def _settled_ratio(inc: list, span: int = 5) -> tuple[float, float] | None:
    """Common ratio of the last increments when they form a stable geometric sequence below 0.98."""
    recent = [abs(v) for v in inc[-span:]]
    if len(recent) < span or min(recent) == 0.0:
        return None
    ratios = [recent[k + 1] / recent[k] for k in range(span - 1)]
    q = ratios[-1]
    wobble = max(abs(r - q) for r in ratios)
    if q >= 0.98 or wobble > 1e-3:
        return None
    return q, wobble


def _signed_tail(inc: list, tail: float) -> complex:
    if not inc or tail == 0.0 or inc[-1] == 0:
        return 0.0
    return tail * inc[-1] / abs(inc[-1])


def _adaptive_halfplane(
    g: Integrand, weight: float, cfg: QuadratureConfig, center_x: float, scale: float
) -> IntegralResult:
    if weight <= -1.0:
        return IntegralResult(math.inf, math.inf, 0, False, divergent=True, method="adaptive_tensor")
    rule = _PanelRule(g, weight, polar=True, center_x=center_x)
    h = math.log(cfg.truncation_growth)
    s_mid = math.log(scale)
    s_lo, s_hi = s_mid - 3 * h, s_mid + 3 * h
    panels = _Panels.empty()
    for k in range(6):
        panels.extend(_theta_strip(s_lo + k * h, s_lo + (k + 1) * h))
    rule.evaluate(panels)
    panels = _refine(panels, rule, 0.25 * cfg.rel_tol, cfg.max_evals)

    totals = [panels.value.sum()]
    increments = {"lo": [], "hi": []}
    active = {"lo": True, "hi": True}
    tails = {"lo": 0.0, "hi": 0.0}
    tail_errors = {"lo": 0.0, "hi": 0.0}
    divergent = False
    big_steps = 0
    max_steps = 400
    for _ in range(max_steps):
        if not (active["lo"] or active["hi"]) or rule.evals >= cfg.max_evals:
            break
        for side in ("lo", "hi"):
            if not active[side]:
                continue
            if side == "hi":
                strip = _theta_strip(s_hi, s_hi + h)
                s_hi += h
            else:
                strip = _theta_strip(s_lo - h, s_lo)
                s_lo -= h
            rule.evaluate(strip)
            strip = _refine(strip, rule, 0.05 * cfg.rel_tol, cfg.max_evals)
            increments[side].append(strip.value.sum())
            panels.extend(strip)
        total = panels.value.sum()
        previous = totals[-1]
        totals.append(total)
        if not np.isfinite(total):
            divergent = True
            break
        big_steps = big_steps + 1 if abs(total - previous) >= 0.1 * abs(previous) else 0
        # large relative growth only signals divergence while the increments are not shrinking;
        # slowly decaying power tails also grow by 10% per step for a while
        if len(totals) > 4 and big_steps >= 3 and any(_stalled(increments[side], 6) for side in ("lo", "hi")):
            divergent = True
            break
        for side in ("lo", "hi"):
            inc = increments[side]
            if not active[side] or not inc:
                continue
            last = abs(inc[-1])
            ratio = last / abs(inc[-2]) if len(inc) >= 2 and inc[-2] != 0 else math.inf
            tail = last * ratio / (1.0 - ratio) if ratio < 1.0 else math.inf
            if last == 0.0:
                tail = 0.0
            if tail <= 0.1 * cfg.rel_tol * abs(total) and last <= 0.25 * cfg.rel_tol * abs(total):
                active[side] = False
                tails[side] = tail
                tail_errors[side] = tail
                continue
            settled = _settled_ratio(inc)
            if settled is not None:
                q, wobble = settled
                tail = last * q / (1.0 - q)
                tail_err = tail * wobble / (1.0 - q)
                if tail_err <= 0.1 * cfg.rel_tol * abs(total):
                    active[side] = False
                    tails[side] = tail
                    tail_errors[side] = tail_err
                    continue
            # increments that stop shrinking signal a non-integrable tail
            if _stalled(inc, 6) and last > 0.25 * cfg.rel_tol * abs(total):
                divergent = True
        if divergent:
            break

    panels = _refine(panels, rule, 0.5 * cfg.rel_tol, cfg.max_evals)
    # geometric tail estimates are added to the value
    value = panels.value.sum() + _signed_tail(increments["lo"], tails["lo"]) + _signed_tail(increments["hi"], tails["hi"])
    if divergent:
        return IntegralResult(_squeeze(value), math.inf, rule.evals, False, divergent=True, method="adaptive_tensor")
    err = float(panels.error.sum()) + sum(tail_errors.values())
    truncated = active["lo"] or active["hi"]
    converged = (not truncated) and (err <= cfg.rel_tol * abs(value) or (value == 0 and err == 0))
    return IntegralResult(_squeeze(value), err, rule.evals, bool(converged), method="adaptive_tensor")


# ---------------------------------------------------------------------------
# Monte Carlo engine

_LOG_RHO_SCALE = 1.5
_LOG_RHO_CUTOFF = 300.0
_BATCH = 1 << 15


@dataclass(frozen=True)
class _Proposal:
    n: int
    center_x: np.ndarray
    center_yp: np.ndarray
    scale: float

    @classmethod
    def around(cls, n: int, anchor: TubePoint | None, scale: float) -> "_Proposal":
        if anchor is None:
            return cls(n, np.zeros(n), np.zeros(n - 1), scale)
        return cls(n, np.array(anchor.x), np.array(anchor.y[:-1]), scale)

    def draw(self, rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n, scale = self.n, self.scale
        root = math.sqrt(scale)
        cx = rng.standard_cauchy((size, n))
        cy = rng.standard_cauchy((size, n - 1))
        t = rng.standard_t(2.0, size)
        widths = np.full(n, root)
        widths[-1] = scale
        x = self.center_x + widths * cx
        yp = self.center_yp + root * cy
        log_rho = math.log(scale) + _LOG_RHO_SCALE * t
        keep = np.abs(log_rho - math.log(scale)) <= _LOG_RHO_CUTOFF
        log_rho = np.where(keep, log_rho, math.log(scale))
        r = np.exp(log_rho)
        y = np.concatenate([yp, (np.sum(yp ** 2, axis=1) + r)[:, None]], axis=1)
        log_density = (
            -np.sum(np.log(np.pi * widths) + np.log1p(cx ** 2), axis=1)
            - np.sum(np.log(np.pi * root) + np.log1p(cy ** 2), axis=1)
            + _student2_logpdf(t)
            - math.log(_LOG_RHO_SCALE)
            - log_rho
        )
        return x, y, np.where(keep, np.exp(-log_density), 0.0)


def _student2_logpdf(t: np.ndarray) -> np.ndarray:
    return -1.5 * np.log1p(t * t / 2.0) - math.log(2.0 * math.sqrt(2.0))


def _monte_carlo(
    g: Integrand, n: int, weight: float, cfg: QuadratureConfig, anchor: TubePoint | None, scale: float
) -> IntegralResult:
    if weight <= -1.0:
        return IntegralResult(math.inf, math.inf, 0, False, divergent=True, method="monte_carlo")
    rng = np.random.default_rng(cfg.seed)
    proposal = _Proposal.around(n, anchor, scale)
    total = 0j
    total_sq = 0.0
    count = 0
    while count < cfg.max_evals:
        x, y, inv_density = proposal.draw(rng, _BATCH)
        vals = np.asarray(g(x, y), dtype=complex) * rho_array(y) ** weight * inv_density
        vals = np.where(inv_density == 0.0, 0.0, vals)
        if not np.all(np.isfinite(vals)):
            raise FloatingPointError("integrand is not finite at sample points")
        total += vals.sum()
        total_sq += float(np.sum(np.abs(vals) ** 2))
        count += _BATCH
        mean = total / count
        var = max(total_sq / count - abs(mean) ** 2, 0.0)
        err = 3.0 * math.sqrt(var / count)
        if count >= 4 * _BATCH and err <= cfg.rel_tol * abs(mean):
            break
        if var == 0.0 and count >= 2 * _BATCH:
            break
    mean = total / count
    var = max(total_sq / count - abs(mean) ** 2, 0.0)
    err = 3.0 * math.sqrt(var / count)
    converged = err <= cfg.rel_tol * abs(mean) or (mean == 0 and err == 0.0)
    return IntegralResult(_squeeze(mean), err, count, bool(converged), method="monte_carlo")


# ---------------------------------------------------------------------------
# public API


def integrate_tube(
    g: Integrand,
    n: int,
    weight_exponent: float,
    cfg: QuadratureConfig | None = None,
    *,
    anchor: TubePoint | None = None,
    scale: float | None = None,
    support: Box | None = None,
) -> IntegralResult:
    """Approximate ``int_{T_B} g(z) rho(z)^weight_exponent dV(z)``.

    ``anchor`` and ``scale`` locate the region where ``g`` concentrates (the
    log-polar center and the first radius for ``n = 1``, the proposal center
    for Monte Carlo).  ``support`` restricts an ``n = 1`` integral to a box on
    which ``g`` is supported.
    """
    cfg = (cfg or QuadratureConfig()).for_dim(n)
    if scale is None:
        scale = rho(anchor) if anchor is not None else 1.0
    if cfg.method == "adaptive_tensor":
        if support is not None:
            return _adaptive_box(g, weight_exponent, support, cfg)
        center = anchor.x[0] if anchor is not None else 0.0
        return _adaptive_halfplane(g, weight_exponent, cfg, center, scale)
    return _monte_carlo(g, n, weight_exponent, cfg, anchor, scale)


@dataclass(frozen=True)
class SlotFunction:
    """A single-domain factor ``rho(z)^rho_exponent * fn(z)``.

    ``fn`` should be bounded near the boundary; explicit powers of ``rho``
    belong in ``rho_exponent`` so the quadrature can treat them as weights.
    ``anchor`` and ``support`` are hints for the integrators.
    """

    fn: Integrand
    rho_exponent: float = 0.0
    anchor: TubePoint | None = None
    support: Box | None = None
    scale: float | None = None

    def __call__(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        vals = np.asarray(self.fn(x, y))
        if self.rho_exponent == 0.0:
            return vals
        return vals * rho_array(y) ** self.rho_exponent

    def hints(self) -> dict:
        return {"anchor": self.anchor, "scale": self.scale, "support": self.support}

    def modulus(self) -> "SlotFunction":
        fn = self.fn
        return replace(self, fn=lambda x, y: np.abs(fn(x, y)))


@dataclass(frozen=True)
class WeightedFunction:
    """A function on T_B x T_B, either separable ``f1(u) f2(eta)`` or generic.

    A generic ``joint`` callable takes ``(x1, y1, x2, y2)`` batches of equal
    length; ``slot_hints`` give per-slot anchors for the samplers.
    """

    n: int
    factors: tuple[SlotFunction, SlotFunction] | None = None
    joint: Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray] | None = None
    slot_hints: tuple[SlotFunction | None, SlotFunction | None] = (None, None)

    def __post_init__(self) -> None:
        if (self.factors is None) == (self.joint is None):
            raise ValueError("give exactly one of factors or joint")

    @property
    def separable(self) -> bool:
        return self.factors is not None

    @classmethod
    def product(cls, n: int, f1: SlotFunction, f2: SlotFunction) -> "WeightedFunction":
        return cls(n, factors=(f1, f2))

    @classmethod
    def generic(cls, n: int, joint, slot_hints=(None, None)) -> "WeightedFunction":
        return cls(n, joint=joint, slot_hints=tuple(slot_hints))

    @classmethod
    def zero(cls, n: int) -> "WeightedFunction":
        return cls(n, joint=lambda x1, y1, x2, y2: np.zeros(len(x1)))

    def evaluate(self, x1: np.ndarray, y1: np.ndarray, x2: np.ndarray, y2: np.ndarray) -> np.ndarray:
        if self.factors is not None:
            return self.factors[0](x1, y1) * self.factors[1](x2, y2)
        return np.asarray(self.joint(x1, y1, x2, y2))

    def hint(self, slot: int) -> SlotFunction | None:
        if self.factors is not None:
            return self.factors[slot]
        return self.slot_hints[slot]

    def modulus(self) -> "WeightedFunction":
        if self.factors is not None:
            return WeightedFunction.product(self.n, self.factors[0].modulus(), self.factors[1].modulus())
        joint = self.joint
        return WeightedFunction.generic(self.n, lambda *a: np.abs(joint(*a)), self.slot_hints)

    def __add__(self, other: "WeightedFunction") -> "WeightedFunction":
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        a, b = self, other
        hints = tuple(a.hint(k) or b.hint(k) for k in range(2))
        return WeightedFunction.generic(self.n, lambda *args: a.evaluate(*args) + b.evaluate(*args), hints)


def _hint_kwargs(hint: SlotFunction | None) -> dict:
    return {} if hint is None else hint.hints()


def integrate_slot(
    f: SlotFunction, n: int, weight: float, cfg: QuadratureConfig | None = None
) -> IntegralResult:
    """Integrate one factor against ``dV_weight``."""
    return integrate_tube(f.fn, n, weight + f.rho_exponent, cfg, **f.hints())


def integrate_product(
    f: WeightedFunction, n: int, weights: tuple[float, float], cfg: QuadratureConfig | None = None
) -> IntegralResult:
    """``int int f dV_{w1} dV_{w2}``; separable inputs factor into two single-domain integrals."""
    cfg = cfg or QuadratureConfig()
    if f.separable:
        first = integrate_slot(f.factors[0], n, weights[0], cfg)
        if first.divergent:
            return first
        second = integrate_slot(f.factors[1], n, weights[1], replace(cfg, seed=cfg.seed + 1))
        return _product(first, second)
    return _joint_monte_carlo(f, n, weights, cfg)


def _slot_proposal(f: WeightedFunction, n: int, slot: int) -> _Proposal:
    hint = f.hint(slot)
    anchor = hint.anchor if hint is not None else None
    scale = (hint.scale if hint is not None else None) or (rho(anchor) if anchor is not None else 1.0)
    return _Proposal.around(n, anchor, scale)


def _joint_monte_carlo(
    f: WeightedFunction, n: int, weights: tuple[float, float], cfg: QuadratureConfig
) -> IntegralResult:
    if min(weights) <= -1.0:
        return IntegralResult(math.inf, math.inf, 0, False, divergent=True, method="monte_carlo")
    cfg = replace(cfg, method="monte_carlo", rel_tol=max(cfg.rel_tol, 1e-2))
    rng = np.random.default_rng(cfg.seed)
    props = (_slot_proposal(f, n, 0), _slot_proposal(f, n, 1))
    total, total_sq, count = 0j, 0.0, 0
    while count < cfg.max_evals:
        x1, y1, d1 = props[0].draw(rng, _BATCH)
        x2, y2, d2 = props[1].draw(rng, _BATCH)
        inv = d1 * d2
        vals = f.evaluate(x1, y1, x2, y2) * rho_array(y1) ** weights[0] * rho_array(y2) ** weights[1] * inv
        vals = np.where(inv == 0.0, 0.0, vals)
        total += vals.sum()
        total_sq += float(np.sum(np.abs(vals) ** 2))
        count += _BATCH
        mean = total / count
        var = max(total_sq / count - abs(mean) ** 2, 0.0)
        if var == 0.0 and count >= 2 * _BATCH:
            break
        if count >= 4 * _BATCH and 3.0 * math.sqrt(var / count) <= cfg.rel_tol * abs(mean):
            break
    mean = total / count
    var = max(total_sq / count - abs(mean) ** 2, 0.0)
    err = 3.0 * math.sqrt(var / count)
    converged = err <= cfg.rel_tol * abs(mean) or (mean == 0 and err == 0.0)
    return IntegralResult(_squeeze(mean), err, count, bool(converged), method="monte_carlo")


SUP_GRID_SIZE = 10_000


def grid_sup(
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
    n: int,
    seed: int = 0,
    anchor: TubePoint | None = None,
    scale: float | None = None,
) -> float:
    """Maximum of ``|fn|`` over a stratified sample grid (a lower bound for the ess-sup)."""
    if scale is None:
        scale = rho(anchor) if anchor is not None else 1.0
    pts = sample_points(n, SUP_GRID_SIZE, seed, scale)
    x = np.array([p.x for p in pts])
    y = np.array([p.y for p in pts])
    if anchor is not None:
        x = x + np.array(anchor.x)
    return float(np.max(np.abs(fn(x, y))))


def slot_norm(
    f: SlotFunction, n: int, p: float, weight: float, cfg: QuadratureConfig | None = None
) -> IntegralResult:
    """``||f||_{L^p(dV_weight)}``; ``p = inf`` uses the grid maximum."""
    if math.isinf(p):
        value = grid_sup(f, n, (cfg or QuadratureConfig()).seed, f.anchor, f.scale)
        return IntegralResult(value, 0.0, SUP_GRID_SIZE, True, lower_bound=True, method="grid_sup")
    fn = f.fn
    power = SlotFunction(lambda x, y: np.abs(fn(x, y)) ** p, p * f.rho_exponent, f.anchor, f.support, f.scale)
    res = integrate_slot(power, n, weight, cfg)
    if res.divergent:
        return res
    value = abs(res.value) ** (1.0 / p)
    rel = res.est_error / abs(res.value) / p if res.value != 0 else 0.0
    return replace(res, value=value, est_error=rel * value)


def mixed_norm(
    f: WeightedFunction,
    p: Sequence[float],
    weights: tuple[float, float],
    cfg: QuadratureConfig | None = None,
) -> IntegralResult:
    """Iterated norm ``(int (int |f|^{p1} dV_{w1})^{p2/p1} dV_{w2})^{1/p2}``.

    Separable inputs give the product of two single-domain norms.  Generic
    inputs are evaluated on a seeded product sample (importance-sampled in
    each slot), on which the iterated weighted sums are themselves a mixed
    norm, so the triangle inequality holds for the estimates.
    """
    cfg = cfg or QuadratureConfig()
    p1, p2 = (float(v) for v in p)
    if f.separable:
        first = slot_norm(f.factors[0], f.n, p1, weights[0], cfg)
        if first.divergent:
            return first
        second = slot_norm(f.factors[1], f.n, p2, weights[1], replace(cfg, seed=cfg.seed + 1))
        return _product(first, second)
    return _generic_mixed_norm(f, (p1, p2), weights, cfg)


def _slot_nodes(f: WeightedFunction, slot: int, p: float, weight: float, rng, size: int):
    """Nodes and quadrature weights for one slot of the product sample."""
    n = f.n
    if math.isinf(p):
        hint = f.hint(slot)
        anchor = hint.anchor if hint is not None else None
        scale = (hint.scale if hint is not None else None) or (rho(anchor) if anchor is not None else 1.0)
        pts = sample_points(n, size, int(rng.integers(2**31)), scale)
        x = np.array([q.x for q in pts]) + (np.array(anchor.x) if anchor is not None else 0.0)
        y = np.array([q.y for q in pts])
        return x, y, np.ones(size)
    x, y, inv = _slot_proposal(f, n, slot).draw(rng, size)
    return x, y, np.where(inv == 0.0, 0.0, rho_array(y) ** weight * inv / size)


def _lp(values: np.ndarray, weights: np.ndarray, p: float, axis: int) -> np.ndarray:
    if math.isinf(p):
        return np.max(values, axis=axis)
    return np.sum(weights * values ** p, axis=axis) ** (1.0 / p)


def _generic_mixed_norm(
    f: WeightedFunction, p: tuple[float, float], weights: tuple[float, float], cfg: QuadratureConfig
) -> IntegralResult:
    if any(w <= -1.0 for w, q in zip(weights, p) if not math.isinf(q)):
        return IntegralResult(math.inf, math.inf, 0, False, divergent=True, method="monte_carlo")
    rng = np.random.default_rng(cfg.seed)
    size = 2048
    x1, y1, w1 = _slot_nodes(f, 0, p[0], weights[0], rng, size)
    x2, y2, w2 = _slot_nodes(f, 1, p[1], weights[1], rng, size)
    i1 = np.repeat(np.arange(size), size)
    i2 = np.tile(np.arange(size), size)
    vals = np.abs(f.evaluate(x1[i1], y1[i1], x2[i2], y2[i2])).reshape(size, size)
    inner = _lp(vals, w1[:, None], p[0], axis=0)
    value = float(_lp(inner, w2, p[1], axis=0))
    # spread between the two halves of the outer sample as a crude error bar
    half = size // 2
    scale = 2.0 ** (0.0 if math.isinf(p[1]) else 1.0 / p[1])
    parts = [float(_lp(inner[sl], w2[sl], p[1], axis=0)) * scale for sl in (slice(0, half), slice(half, None))]
    err = abs(parts[0] - parts[1])
    lower = math.isinf(p[0]) or math.isinf(p[1])
    converged = err <= max(cfg.rel_tol, 0.05) * value or value == 0.0
    return IntegralResult(value, err, size * size, bool(converged), lower_bound=lower, method="monte_carlo")


# ---------------------------------------------------------------------------
# integral identities


@dataclass(frozen=True)
class IdentityReport:
    lhs: complex
    rhs: complex
    rel_err: float
    result: IntegralResult


def first_identity_integrand(z: TubePoint, u: TubePoint, r: float, s: float) -> Integrand:
    """``w -> rho(z, w)^{-r} rho(w, u)^{-s}`` (the ``rho(w)^t`` factor is the weight)."""

    def g(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        zw = rho_pair_array(x, y, z, reverse=True)
        wu = rho_pair_array(x, y, u)
        return complex_power_array(zw, -r) * complex_power_array(wu, -s)

    return g


def _midpoint(z: TubePoint, u: TubePoint) -> TubePoint:
    x = tuple(0.5 * (a + b) for a, b in zip(z.x, u.x))
    y = tuple(0.5 * (a + b) for a, b in zip(z.y, u.y))
    return TubePoint(x, y)


def verify_identity_first(
    n: int,
    r: float,
    s: float,
    t: float,
    z: TubePoint,
    u: TubePoint,
    cfg: QuadratureConfig | None = None,
) -> IdentityReport:
    """Compare ``int rho(w)^t / (rho(z,w)^r rho(w,u)^s) dV(w)`` with its closed form."""
    if not first_identity_admissible(n, r, s, t):
        raise DivergentParameterError(f"identity integral is infinite for r={r}, s={s}, t={t}, n={n}")
    rhs = c1_constant(n, r, s, t) * complex(complex_power_array(np.array([rho_pair(z, u)]), -(r + s - t - n - 1))[0])
    mid = _midpoint(z, u)
    spread = max(abs(a - b) for a, b in zip(z.as_complex(), u.as_complex()))
    scale = max(rho(z), rho(u), spread)
    result = integrate_tube(first_identity_integrand(z, u, r, s), n, t, cfg, anchor=mid, scale=scale)
    lhs = complex(result.value)
    return IdentityReport(lhs, rhs, abs(lhs - rhs) / abs(rhs), result)


@dataclass(frozen=True)
class HomogeneityReport:
    values: tuple[float, ...]
    homogeneity_spread: float
    constant: float
    divergent: bool
    preconditions_hold: bool
    results: tuple[IntegralResult, ...]


def second_identity_integrand(z: TubePoint, s: float) -> Integrand:
    def g(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.abs(rho_pair_array(x, y, z)) ** (-s)

    return g


def verify_identity_second(
    n: int, s: float, t: float, zs: Sequence[TubePoint], cfg: QuadratureConfig | None = None
) -> HomogeneityReport:
    """Check that ``rho(z)^{s-t-n-1} int rho(w)^t |rho(z,w)|^{-s} dV(w)`` does not depend on ``z``.

    The common value estimates the constant of the identity, for which no
    closed form is claimed.
    """
    holds = t > -1 and s - t > n + 1
    values, results = [], []
    divergent = False
    for k, z in enumerate(zs):
        res = integrate_tube(second_identity_integrand(z, s), n, t, cfg, anchor=z)
        results.append(res)
        if res.divergent or not res.converged:
            divergent = divergent or res.divergent
            if res.divergent:
                break
        values.append(abs(res.value) * rho(z) ** (s - t - n - 1))
    divergent = divergent or not holds
    if divergent or not values:
        return HomogeneityReport(tuple(values), math.inf, math.inf, True, holds, tuple(results))
    mean = float(np.mean(values))
    spread = (max(values) - min(values)) / mean
    return HomogeneityReport(tuple(values), spread, mean, False, holds, tuple(results))
