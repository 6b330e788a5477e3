"""Schur-test certificates for bounded configurations and their numerical verification.

For a slot with exponents ``(p, q)`` write ``1/p'`` for the conjugate
reciprocal (``0`` when ``p = 1``) and

    tau = (n+1+alpha)/p' + (n+1+beta)/q,

which equals ``c - a - b + alpha`` exactly on the critical line.  The Schur
exponents ``(r, s)`` are constrained through the two combinations

    X = r tau + a (r - s),          Y = s tau + (b - alpha)(s - r),

each of which must lie in an explicit open interval.  ``(r, s) -> (X, Y)`` is
linear with determinant ``tau * c``, so the feasible set is the preimage of a
box, and the canonical certificate is the preimage of the box center.  The
split exponents then follow as

    gamma = ((n+1+alpha)/p' + s - r) / tau,    delta = 1 - gamma.

With ``h1(u, eta) = rho(u)^{s1} rho(eta)^{s2}`` and
``h2(z, w) = rho(z)^{r1} rho(w)^{r2}`` both Schur inequalities reduce to a
product over the two slots of a one-point function divided by a power of
``rho``.  Verification computes those quotients by quadrature (or by
numerical maximization where the inequality involves a supremum) at seeded
points and checks that they are constant.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize

from .classifier import Status, classify, exponents, regime
from .geometry import TubePoint, rho, rho_pair_array, sample_points
from .integration import IntegralResult, QuadratureConfig, integrate_tube
from .operators import OperatorParams

SPREAD_TOL = 5e-2
FINITE_TARGET_THEOREMS = ("6.1", "6.2", "6.3", "6.4")
INF_TARGET_THEOREMS = ("6.5", "6.6", "6.7", "6.8", "6.9", "6.10", "6.11", "6.12", "6.13")


class InfeasibleCertificateError(ValueError):
    """No Schur exponents exist: the configuration is not bounded in a finite-target regime."""


def _inv_conjugate(p: float) -> float:
    if p == 1.0:
        return 0.0
    if math.isinf(p):
        return 1.0
    return 1.0 - 1.0 / p


@dataclass(frozen=True)
class SlotBox:
    """Feasible box for ``(X, Y)`` in one slot."""

    tau: float
    x_bounds: tuple[float, float]
    y_bounds: tuple[float, float]

    @property
    def feasible(self) -> bool:
        return self.x_bounds[0] < self.x_bounds[1] and self.y_bounds[0] < self.y_bounds[1]


def _slot_box(n: int, p: float, q: float, a: float, b: float, alpha: float, beta: float) -> SlotBox:
    ip = _inv_conjugate(p)
    tau = (n + 1 + alpha) * ip + (n + 1 + beta) / q
    x_bounds = (-tau * (beta + 1) / q - a * (n + 1 + beta) / q, a * (n + 1 + alpha) * ip)
    y_bounds = (-tau * (alpha + 1) * ip - (b - alpha) * (n + 1 + alpha) * ip, (b - alpha) * (n + 1 + beta) / q)
    return SlotBox(tau, x_bounds, y_bounds)


def _split_exponents(n: int, p: float, alpha: float, tau: float, r: float, s: float) -> tuple[float, float]:
    gamma = ((n + 1 + alpha) * _inv_conjugate(p) + s - r) / tau
    return gamma, 1.0 - gamma


def _rs_from_xy(tau: float, a: float, bma: float, x: float, y: float) -> tuple[float, float]:
    # [[tau + a, -a], [-bma, tau + bma]] @ (r, s) = (x, y)
    det = (tau + a) * (tau + bma) - a * bma
    r = ((tau + bma) * x + a * y) / det
    s = (bma * x + (tau + a) * y) / det
    return r, s


@dataclass(frozen=True)
class SchurCertificate:
    n: int
    p: tuple[float, float]
    q: tuple[float, float]
    params: OperatorParams
    regime: str
    tau: tuple[float, float]
    r: tuple[float, float]
    s: tuple[float, float]
    gamma: tuple[float, float]
    delta: tuple[float, float]
    r_interval: tuple[tuple[float, float], tuple[float, float]]
    s_interval: tuple[tuple[float, float], tuple[float, float]]
    margins: tuple[float, float] = field(default=(0.0, 0.0))

    @property
    def h1(self) -> str:
        return f"rho(u)^{self.s[0]:.12g} * rho(eta)^{self.s[1]:.12g}"

    @property
    def h2(self) -> str:
        return f"rho(z)^{self.r[0]:.12g} * rho(w)^{self.r[1]:.12g}"

    def kernel(self, i: int) -> str:
        a, b, c, al = self.params.a[i], self.params.b[i], self.params.c[i], self.params.alpha[i]
        return f"rho(z)^{a:.12g} rho(u)^{b - al:.12g} / |rho(z,u)|^{c:.12g}"

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "n": self.n,
            "p": [_fmt(v) for v in self.p],
            "q": [_fmt(v) for v in self.q],
            "params": {k: list(v) for k, v in asdict(self.params).items() if k != "formal"},
            "tau": list(self.tau),
            "r": list(self.r),
            "s": list(self.s),
            "gamma": list(self.gamma),
            "delta": list(self.delta),
            "r_interval": [list(v) for v in self.r_interval],
            "s_interval": [list(v) for v in self.s_interval],
            "margins": list(self.margins),
            "h1": self.h1,
            "h2": self.h2,
            "kernels": [self.kernel(0), self.kernel(1)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_human(self) -> str:
        rows = [f"regime: {self.regime}"]
        for name in ("tau", "r", "s", "gamma", "delta", "margins"):
            v = getattr(self, name)
            rows.append(f"{name}: ({v[0]:.12g}, {v[1]:.12g})")
        for name in ("r_interval", "s_interval"):
            v = getattr(self, name)
            rows.append(f"{name}: ({v[0][0]:.6g}, {v[0][1]:.6g}) x ({v[1][0]:.6g}, {v[1][1]:.6g})")
        rows.append(f"h1 = {self.h1}")
        rows.append(f"h2 = {self.h2}")
        return "\n".join(rows)


def _fmt(v: float):
    return "inf" if math.isinf(v) else v


def _slot_boxes(n, p, q, params: OperatorParams) -> list[SlotBox] | None:
    found = regime(p, q)
    if found is None or found[0] not in FINITE_TARGET_THEOREMS:
        raise InfeasibleCertificateError(f"certificates are built for finite targets in regimes {FINITE_TARGET_THEOREMS}")
    if not params.admissible or min(params.beta) <= -1.0:
        return None
    boxes = []
    for i in range(2):
        box = _slot_box(n, p[i], q[i], params.a[i], params.b[i], params.alpha[i], params.beta[i])
        consistent = abs(box.tau - (params.c[i] - params.a[i] - params.b[i] + params.alpha[i])) <= 1e-9
        if not (consistent and box.tau > 0 and box.feasible):
            return None
        boxes.append(box)
    return boxes


def feasibility_intervals(n: int, p, q, params: OperatorParams):
    """Intervals for ``r_i`` and ``s_i`` at the canonical point, or ``None`` when infeasible.

    The intervals are the ones stated in terms of ``gamma_i, delta_i`` and so
    depend on the chosen point; the feasible region itself is the box in
    ``(X, Y)`` described in the module docstring.
    """
    try:
        cert = build_certificate(n, p, q, params)
    except InfeasibleCertificateError:
        return None
    return cert.r_interval, cert.s_interval


def _assemble(n, p, q, params, theorem, boxes, rs) -> SchurCertificate:
    taus, gammas, deltas, r_int, s_int, margins = [], [], [], [], [], []
    for i, (box, (r, s)) in enumerate(zip(boxes, rs)):
        a, bma = params.a[i], params.b[i] - params.alpha[i]
        gamma, delta = _split_exponents(n, p[i], params.alpha[i], box.tau, r, s)
        ip = _inv_conjugate(p[i])
        taus.append(box.tau)
        gammas.append(gamma)
        deltas.append(delta)
        r_int.append((-(params.beta[i] + 1) / q[i] - a * delta, a * gamma))
        s_int.append((-(params.alpha[i] + 1) * ip - bma * gamma, bma * delta))
        x = r * box.tau + a * (r - s)
        y = s * box.tau + bma * (s - r)
        margins.append(min(_relative_margin(x, box.x_bounds), _relative_margin(y, box.y_bounds)))
    return SchurCertificate(
        n,
        (p[0], p[1]),
        (q[0], q[1]),
        params,
        theorem,
        tuple(taus),
        tuple(r for r, _ in rs),
        tuple(s for _, s in rs),
        tuple(gammas),
        tuple(deltas),
        tuple(r_int),
        tuple(s_int),
        tuple(margins),
    )


def _relative_margin(v: float, bounds: tuple[float, float]) -> float:
    lo, hi = bounds
    return min(v - lo, hi - v) / (hi - lo)


def build_certificate(n: int, p, q, params: OperatorParams) -> SchurCertificate:
    """Canonical Schur certificate; raises :class:`InfeasibleCertificateError` when none exists."""
    p, q = exponents(p), exponents(q)
    boxes = _slot_boxes(n, p, q, params)
    if boxes is None:
        raise InfeasibleCertificateError("the Schur exponent region is empty for these parameters")
    rs = []
    for i, box in enumerate(boxes):
        x = 0.5 * sum(box.x_bounds)
        y = 0.5 * sum(box.y_bounds)
        rs.append(_rs_from_xy(box.tau, params.a[i], params.b[i] - params.alpha[i], x, y))
    return _assemble(n, p, q, params, regime(p, q)[0], boxes, rs)


def with_exponents(cert: SchurCertificate, r=None, s=None) -> SchurCertificate:
    """The same certificate with ``r`` and/or ``s`` replaced; gamma, delta and margins are recomputed.

    The result need not be valid: moving a point outside its box gives
    negative margins, which is how corrupted certificates are built.
    """
    boxes = [
        _slot_box(cert.n, cert.p[i], cert.q[i], cert.params.a[i], cert.params.b[i], cert.params.alpha[i], cert.params.beta[i])
        for i in range(2)
    ]
    r = tuple(float(v) for v in (r if r is not None else cert.r))
    s = tuple(float(v) for v in (s if s is not None else cert.s))
    return _assemble(cert.n, cert.p, cert.q, cert.params, cert.regime, boxes, list(zip(r, s)))


# ---------------------------------------------------------------------------
# verification


_SUP_LOG_BOUND = 40.0


def slot_sup(z: TubePoint, kernel_power: float, rho_power: float) -> tuple[float, bool]:
    """``sup_u rho(u)^rho_power / |rho(z,u)|^kernel_power`` and whether it is finite.

    The search runs over ``u`` in coordinates relative to ``z``: the log of
    ``rho(u)/rho(z)`` and offsets in ``x`` and ``y'`` scaled to ``rho(z)``.
    A maximizer pinned at the edge of the log range means the supremum is
    infinite.
    """
    n = z.dim
    rz = rho(z)
    zx, zy = np.array(z.x), np.array(z.y)
    root = math.sqrt(rz)
    x_scale = np.array([root] * (n - 1) + [rz])

    def point(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        t = v[0]
        x = zx + v[1 : n + 1] * x_scale
        yp = zy[:-1] + v[n + 1 :] * root
        yn = float(np.sum(yp**2)) + rz * math.exp(t)
        return x[None, :], np.concatenate([yp, [yn]])[None, :]

    def neg_log(v: np.ndarray) -> float:
        x, y = point(v)
        mod = abs(rho_pair_array(x, y, z)[0])
        return -(rho_power * (math.log(rz) + v[0]) - kernel_power * math.log(mod))

    dim = 2 * n
    bounds = [(-_SUP_LOG_BOUND, _SUP_LOG_BOUND)] + [(-1e3, 1e3)] * (dim - 1)
    best = None
    for t0 in (-4.0, 0.0, 4.0):
        start = np.zeros(dim)
        start[0] = t0
        res = minimize(neg_log, start, method="Nelder-Mead", bounds=bounds,
                       options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000 * dim})
        if best is None or res.fun < best.fun:
            best = res
    finite = abs(best.x[0]) < _SUP_LOG_BOUND - 1.0
    return math.exp(-best.fun), finite


@dataclass(frozen=True)
class ConditionCheck:
    """Quotients of one Schur inequality at the sample points."""

    name: str
    ratios: tuple[float, ...]
    spread: float
    divergent: bool
    converged: bool

    @property
    def passed(self) -> bool:
        return self.converged and not self.divergent and self.spread < SPREAD_TOL


@dataclass(frozen=True)
class SchurReport:
    checks: tuple[ConditionCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def worst_spread(self) -> float:
        return max(c.spread for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "worst_spread": self.worst_spread,
            "checks": [
                {"name": c.name, "spread": c.spread, "divergent": c.divergent, "converged": c.converged,
                 "ratios": list(c.ratios)}
                for c in self.checks
            ],
        }


def _spread(values: list[float]) -> float:
    if not values or any(not math.isfinite(v) for v in values):
        return math.inf
    return (max(values) - min(values)) / abs(values[0])


def _power_integral(
    point: TubePoint, kernel_power: float, weight: float, cfg: QuadratureConfig
) -> IntegralResult:
    """``int rho(u)^weight / |rho(point,u)|^kernel_power dV(u)``."""

    def g(x, y):
        return np.abs(rho_pair_array(x, y, point)) ** (-kernel_power)

    return integrate_tube(g, point.dim, weight, cfg, anchor=point, scale=rho(point))


def _slot_first(cert: SchurCertificate, i: int, z: TubePoint, cfg) -> tuple[float, bool, bool]:
    """``||K_i(z,.)^gamma rho^s||_{L^{p'}(dV_alpha)} / rho(z)^r``."""
    par = cert.params
    a, bma, c, al = par.a[i], par.b[i] - par.alpha[i], par.c[i], par.alpha[i]
    g, s, r, p = cert.gamma[i], cert.s[i], cert.r[i], cert.p[i]
    rz = rho(z)
    if p == 1.0:
        value, finite = slot_sup(z, c * g, bma * g + s)
        return rz ** (a * g) * value / rz**r, not finite, True
    pc = p / (p - 1.0)
    res = _power_integral(z, c * g * pc, bma * g * pc + s * pc + al, cfg)
    if res.divergent:
        return math.inf, True, False
    value = rz ** (a * g) * abs(res.value) ** (1.0 / pc)
    return value / rz**r, False, res.converged


def _slot_second(cert: SchurCertificate, i: int, u: TubePoint, cfg) -> tuple[float, bool, bool]:
    """``||K_i(.,u)^delta rho^r||_{L^q(dV_beta)} / rho(u)^s``."""
    par = cert.params
    a, bma, c, be = par.a[i], par.b[i] - par.alpha[i], par.c[i], par.beta[i]
    d, s, r, q = cert.delta[i], cert.s[i], cert.r[i], cert.q[i]
    ru = rho(u)
    res = _power_integral(u, c * d * q, r * q + a * d * q + be, cfg)
    if res.divergent:
        return math.inf, True, False
    value = ru ** (bma * d) * abs(res.value) ** (1.0 / q)
    return value / ru**s, False, res.converged


def verify_schur_conditions(
    cert: SchurCertificate, sample_count: int = 10, cfg: QuadratureConfig | None = None, seed: int = 0
) -> SchurReport:
    """Check that both Schur quotients are constant across seeded sample points."""
    cfg = cfg or QuadratureConfig()
    n = cert.n
    firsts = sample_points(n, sample_count, seed), sample_points(n, sample_count, seed + 1)
    seconds = sample_points(n, sample_count, seed + 2), sample_points(n, sample_count, seed + 3)
    checks = []
    for name, fn, pts in (("first", _slot_first, firsts), ("second", _slot_second, seconds)):
        ratios, divergent, converged = [], False, True
        for k in range(sample_count):
            total = 1.0
            for i in range(2):
                value, div, conv = fn(cert, i, pts[i][k], cfg)
                divergent |= div
                converged &= conv
                total *= value
            ratios.append(total)
            if divergent:
                break
        spread = math.inf if divergent else _spread(ratios)
        checks.append(ConditionCheck(name, tuple(ratios), spread, divergent, converged))
    return SchurReport(tuple(checks))


@dataclass(frozen=True)
class InfinityReport:
    values: tuple[float, ...]
    rhos: tuple[tuple[float, float], ...]
    spread: float
    slopes: tuple[float, float]
    divergent: bool
    converged: bool

    @property
    def passed(self) -> bool:
        return self.converged and not self.divergent and self.spread < SPREAD_TOL

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "spread": self.spread,
            "slopes": list(self.slopes),
            "divergent": self.divergent,
            "values": list(self.values),
        }


def kernel_slice_norm(
    params: OperatorParams, i: int, p: float, z: TubePoint, cfg: QuadratureConfig
) -> tuple[float, bool, bool]:
    """``||K_i(z,.)||`` in ``L^{p'}(dV_alpha)`` with ``K_i(z,u) = rho(z)^a rho(u)^{b-alpha} / |rho(z,u)|^c``."""
    a, bma, c, al = params.a[i], params.b[i] - params.alpha[i], params.c[i], params.alpha[i]
    rz = rho(z)
    if p == 1.0:
        value, finite = slot_sup(z, c, bma)
        return rz**a * value, not finite, True
    pc = 1.0 if math.isinf(p) else p / (p - 1.0)
    res = _power_integral(z, c * pc, bma * pc + al, cfg)
    if res.divergent:
        return math.inf, True, False
    return rz**a * abs(res.value) ** (1.0 / pc), False, res.converged


def verify_infinity_condition(
    n: int, p, params: OperatorParams, sample_count: int = 10, cfg: QuadratureConfig | None = None, seed: int = 0
) -> InfinityReport:
    """Mixed ``p'``-norm of the kernel slice at seeded ``(z, w)``; constant when the operator is bounded into L^inf."""
    cfg = cfg or QuadratureConfig()
    p = exponents(p)
    zs, ws = sample_points(n, sample_count, seed), sample_points(n, sample_count, seed + 1)
    values, rhos, per_slot = [], [], ([], [])
    divergent, converged = False, True
    for z, w in zip(zs, ws):
        total = 1.0
        for i, point in enumerate((z, w)):
            value, div, conv = kernel_slice_norm(params, i, p[i], point, cfg)
            divergent |= div
            converged &= conv
            per_slot[i].append(value)
            total *= value
        values.append(total)
        rhos.append((rho(z), rho(w)))
        if divergent:
            break
    slopes = tuple(_log_slope([r[i] for r in rhos], per_slot[i]) for i in range(2))
    spread = math.inf if divergent else _spread(values)
    return InfinityReport(tuple(values), tuple(rhos), spread, slopes, divergent, converged)


def _log_slope(xs: list[float], ys: list[float]) -> float:
    if len(xs) < 2 or any(not (math.isfinite(y) and y > 0) for y in ys):
        return math.nan
    lx, ly = np.log(xs), np.log(ys)
    if np.ptp(lx) == 0:
        return 0.0
    return float(np.polyfit(lx, ly, 1)[0])


def certificate_exists(n: int, p, q, params: OperatorParams) -> bool:
    try:
        build_certificate(n, p, q, params)
    except InfeasibleCertificateError:
        return False
    return True


def certificate_for_bounded(n: int, p, q, params: OperatorParams) -> SchurCertificate:
    """Build a certificate after confirming the classifier reports the configuration bounded."""
    verdict = classify(n, p, q, params)
    if verdict.status is not Status.BOUNDED:
        raise InfeasibleCertificateError(f"configuration is {verdict.status.value}, no certificate")
    return build_certificate(n, p, q, params)


__all__ = [
    "ConditionCheck",
    "InfeasibleCertificateError",
    "InfinityReport",
    "SchurCertificate",
    "SchurReport",
    "build_certificate",
    "certificate_exists",
    "certificate_for_bounded",
    "feasibility_intervals",
    "kernel_slice_norm",
    "slot_sup",
    "verify_infinity_condition",
    "verify_schur_conditions",
    "with_exponents",
]
