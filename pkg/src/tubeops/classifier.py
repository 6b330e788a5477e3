"""Exact boundedness classification of T and S between mixed-norm spaces.

Every covered regime is a pair of per-slot regimes, one per coordinate of
T_B x T_B.  A slot regime is fixed by ``(p_i, q_i)``:

==========  ===========  =================  =========================  =====================
slot kind   p_i          q_i                conditions                 lambda_i
==========  ===========  =================  =========================  =====================
finite      (1, inf)     finite             -q a < beta+1,             (n+1+beta)/q
                                            alpha+1 < p (b+1)          - (n+1+alpha)/p
unit        1            finite             -q a < beta+1, alpha < b   (n+1+beta)/q
                                                                       - (n+1+alpha)
finite_inf  (1, inf)     inf                a > 0, alpha+1 < p (b+1)   -(n+1+alpha)/p
unit_inf    1            inf                a >= 0, b >= alpha         -(n+1+alpha)
inf_inf     inf          inf                a > 0, b > -1              0
==========  ===========  =================  =========================  =====================

plus the critical equality ``c_i = n+1+a_i+b_i+lambda_i`` in every slot.  The
theorem table additionally fixes which pairs of slot kinds (and orderings of
the exponents) are covered; everything else is ``outside_coverage``.

Infinite exponents are IEEE ``inf``, which is an exact tag; dispatch uses
``math.isinf``, never a comparison against a large sentinel.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum

from .operators import OperatorParams, make_berezin, make_projection, make_Tc

CRITICAL_TOL = 1e-9
INF = math.inf


def parse_exponent(value) -> float:
    """Accept a number or the token ``"inf"`` for an exponent in ``[1, inf]``."""
    if isinstance(value, str):
        token = value.strip().lower()
        if token in ("inf", "infinity", "∞", "+inf"):
            return INF
        value = float(token)
    value = float(value)
    if math.isnan(value) or value < 1.0:
        raise ValueError(f"exponent must lie in [1, inf], got {value!r}")
    return value


def format_exponent(value: float) -> float | str:
    return "inf" if math.isinf(value) else value


@dataclass(frozen=True)
class MixedExponents:
    p1: float
    p2: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "p1", parse_exponent(self.p1))
        object.__setattr__(self, "p2", parse_exponent(self.p2))

    @property
    def p_minus(self) -> float:
        return min(self.p1, self.p2)

    @property
    def p_plus(self) -> float:
        return max(self.p1, self.p2)

    def __getitem__(self, i: int) -> float:
        return (self.p1, self.p2)[i]

    def __iter__(self):
        return iter((self.p1, self.p2))

    def swapped(self) -> "MixedExponents":
        return MixedExponents(self.p2, self.p1)

    def conjugate(self) -> tuple[float, float]:
        """Reciprocals ``1/p_i'`` of the conjugate exponents."""
        return tuple(0.0 if p == 1.0 else (1.0 if math.isinf(p) else 1.0 - 1.0 / p) for p in self)

    def to_json(self) -> list:
        return [format_exponent(self.p1), format_exponent(self.p2)]


def exponents(value) -> MixedExponents:
    if isinstance(value, MixedExponents):
        return value
    return MixedExponents(*value)


class Status(str, Enum):
    BOUNDED = "bounded"
    UNBOUNDED = "unbounded"
    OUTSIDE = "outside_coverage"
    INADMISSIBLE = "inadmissible_weights"


EXIT_CODES = {Status.BOUNDED: 0, Status.UNBOUNDED: 1, Status.OUTSIDE: 2, Status.INADMISSIBLE: 3}


@dataclass(frozen=True)
class Condition:
    name: str
    statement: str
    holds: bool
    margin: float


@dataclass(frozen=True)
class BoundednessVerdict:
    status: Status
    theorem: str | None = None
    lam: tuple[float, float] | None = None
    failed: tuple[str, ...] = ()
    critical_c: tuple[float, float] | None = None
    operator_kind: str = "T"
    via: str | None = None
    conditions: tuple[Condition, ...] = field(default=(), compare=False)

    @property
    def bounded(self) -> bool:
        return self.status is Status.BOUNDED

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "theorem": self.theorem,
            "lambda": list(self.lam) if self.lam is not None else None,
            "failed": list(self.failed),
            "critical_c": list(self.critical_c) if self.critical_c is not None else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)

    def to_human(self) -> str:
        lines = [f"status: {self.status.value}"]
        if self.theorem is not None:
            label = self.theorem if self.via in (None, self.theorem) else f"{self.theorem} (via {self.via})"
            lines.append(f"theorem: {label}")
        if self.lam is not None:
            lines.append(f"lambda: ({self.lam[0]:.12g}, {self.lam[1]:.12g})")
        if self.critical_c is not None:
            lines.append(f"critical c: ({self.critical_c[0]:.12g}, {self.critical_c[1]:.12g})")
        for cond in self.conditions:
            mark = "ok  " if cond.holds else "FAIL"
            lines.append(f"  [{mark}] {cond.name}: {cond.statement}  (margin {cond.margin:+.6g})")
        return "\n".join(lines)


# regime table -------------------------------------------------------------

FINITE, UNIT, FINITE_INF, UNIT_INF, INF_INF = "finite", "unit", "finite_inf", "unit_inf", "inf_inf"

_INF_TARGET_TABLE = {
    (FINITE_INF, FINITE_INF): "6.5",
    (UNIT_INF, UNIT_INF): "6.6",
    (UNIT_INF, FINITE_INF): "6.7",
    (FINITE_INF, UNIT_INF): "6.8",
    (INF_INF, INF_INF): "6.9",
    (UNIT_INF, INF_INF): "6.10",
    (INF_INF, UNIT_INF): "6.11",
    (INF_INF, FINITE_INF): "6.12",
    (FINITE_INF, INF_INF): "6.13",
}

MIRROR_THEOREMS = {"6.3": "6.4", "6.4": "6.3", "6.7": "6.8", "6.8": "6.7",
                   "6.10": "6.11", "6.11": "6.10", "6.12": "6.13", "6.13": "6.12"}


def _slot_kind(p: float, q: float) -> str:
    p_unit = p == 1.0
    if math.isinf(q):
        if math.isinf(p):
            return INF_INF
        return UNIT_INF if p_unit else FINITE_INF
    if math.isinf(p):
        return "inf_finite"
    return UNIT if p_unit else FINITE


def regime(p: MixedExponents, q: MixedExponents) -> tuple[str, tuple[str, str]] | None:
    """The theorem covering ``(p, q)`` and its slot kinds, or ``None``."""
    p, q = exponents(p), exponents(q)
    kinds = (_slot_kind(p.p1, q.p1), _slot_kind(p.p2, q.p2))
    q_inf = (math.isinf(q.p1), math.isinf(q.p2))
    if all(q_inf):
        theorem = _INF_TARGET_TABLE.get(kinds)
        return (theorem, kinds) if theorem else None
    if any(q_inf) or math.isinf(p.p_plus):
        return None
    if kinds == (UNIT, UNIT):
        return "6.2", kinds
    if p.p_plus > q.p_minus:
        return None
    table = {(FINITE, FINITE): "6.1", (FINITE, UNIT): "6.3", (UNIT, FINITE): "6.4"}
    return table[kinds], kinds


def slot_lambda(kind: str, n: int, p: float, q: float, alpha: float, beta: float) -> float:
    if kind == FINITE:
        return (n + 1 + beta) / q - (n + 1 + alpha) / p
    if kind == UNIT:
        return (n + 1 + beta) / q - (n + 1 + alpha)
    if kind == FINITE_INF:
        return -(n + 1 + alpha) / p
    if kind == UNIT_INF:
        return -(n + 1 + alpha)
    if kind == INF_INF:
        return 0.0
    raise ValueError(f"no lambda for slot kind {kind!r}")


def slot_conditions(
    kind: str, i: int, n: int, p: float, q: float, a: float, b: float, c: float, alpha: float, beta: float
) -> tuple[list[Condition], float, float]:
    """Named conditions of one slot, its lambda and the critical c."""
    lam = slot_lambda(kind, n, p, q, alpha, beta)
    crit = n + 1 + a + b + lam
    conds = []
    if kind in (FINITE, UNIT):
        conds.append(Condition(f"a{i}_condition", f"-q{i}*a{i} < beta{i}+1", -q * a < beta + 1, beta + 1 + q * a))
    elif kind == UNIT_INF:
        conds.append(Condition(f"a{i}_condition", f"a{i} >= 0", a >= 0, a))
    else:
        conds.append(Condition(f"a{i}_condition", f"a{i} > 0", a > 0, a))
    if kind in (FINITE, FINITE_INF):
        conds.append(
            Condition(f"b{i}_condition", f"alpha{i}+1 < p{i}*(b{i}+1)", alpha + 1 < p * (b + 1), p * (b + 1) - alpha - 1)
        )
    elif kind == UNIT:
        conds.append(Condition(f"b{i}_condition", f"alpha{i} < b{i}", alpha < b, b - alpha))
    elif kind == UNIT_INF:
        conds.append(Condition(f"b{i}_condition", f"b{i} >= alpha{i}", b >= alpha, b - alpha))
    else:
        conds.append(Condition(f"b{i}_condition", f"b{i} > -1", b > -1, b + 1))
    conds.append(
        Condition(
            f"c{i}_critical",
            f"c{i} = n+1+a{i}+b{i}+lambda{i} = {crit:.12g}",
            abs(c - crit) <= CRITICAL_TOL,
            c - crit,
        )
    )
    return conds, lam, crit


def classify(
    n: int, p, q, params: OperatorParams, operator_kind: str = "T"
) -> BoundednessVerdict:
    """Boundedness of ``T_{a,b,c}`` (or ``S_{a,b,c}``) from ``L^p_alpha`` to ``L^q_beta``.

    The verdict does not depend on ``operator_kind``: each theorem asserts that
    S and T are bounded under the same conditions.
    """
    if operator_kind not in ("T", "S"):
        raise ValueError("operator_kind must be 'T' or 'S'")
    p, q = exponents(p), exponents(q)
    found = regime(p, q)
    if found is None:
        return BoundednessVerdict(Status.OUTSIDE, operator_kind=operator_kind)
    theorem, kinds = found
    conds: list[Condition] = []
    lams, crits = [], []
    for i, kind in enumerate(kinds):
        slot, lam, crit = slot_conditions(
            kind, i + 1, n, p[i], q[i], params.a[i], params.b[i], params.c[i], params.alpha[i], params.beta[i]
        )
        conds.extend(slot)
        lams.append(lam)
        crits.append(crit)
    weights = [Condition(f"alpha{i + 1}_admissible", f"alpha{i + 1} > -1", params.alpha[i] > -1, params.alpha[i] + 1)
               for i in range(2)]
    weights += [Condition(f"beta{i + 1}_admissible", f"beta{i + 1} > -1", params.beta[i] > -1, params.beta[i] + 1)
                for i in range(2) if not math.isinf(q[i])]
    bad_weights = tuple(c.name for c in weights if not c.holds)
    failed = tuple(c.name for c in conds if not c.holds)
    if bad_weights:
        status = Status.INADMISSIBLE
        failed = bad_weights + failed
    else:
        status = Status.UNBOUNDED if failed else Status.BOUNDED
    return BoundednessVerdict(
        status,
        theorem,
        (lams[0], lams[1]),
        failed,
        (crits[0], crits[1]),
        operator_kind,
        via=theorem,
        conditions=tuple(weights + conds),
    )


# corollaries for the special operators ---------------------------------------


class ConsistencyError(AssertionError):
    """The corollary-form conditions disagree with the theorem-table verdict."""


@dataclass(frozen=True)
class CorollaryForm:
    corollary: str
    bounded: bool
    forces_formal_alpha: bool
    conditions: tuple[tuple[str, bool], ...]


def _eq(lhs: float, rhs: float, scale: float) -> bool:
    return abs(lhs - rhs) <= CRITICAL_TOL * scale


def _power_balance(n, p, q, alpha, beta, i) -> tuple[str, bool]:
    """``p_i (n+1+beta_i) = q_i (n+1+alpha_i)``, with ``p_i = 1`` giving the unit-slot form."""
    return (
        f"p{i + 1}*(n+1+beta{i + 1}) = q{i + 1}*(n+1+alpha{i + 1})",
        _eq(p[i] * (n + 1 + beta[i]), q[i] * (n + 1 + alpha[i]), p[i] * q[i]),
    )


def _finite_target_forms(kind_pair, n, p, q, gamma, alpha, beta, berezin: bool):
    conds = []
    for i, kind in enumerate(kind_pair):
        k = i + 1
        if berezin:
            conds.append((f"-q{k}*(n+1+gamma{k}) < beta{k}+1", -q[i] * (n + 1 + gamma[i]) < beta[i] + 1))
        if kind == FINITE:
            conds.append((f"p{k}*(gamma{k}+1) > alpha{k}+1", p[i] * (gamma[i] + 1) > alpha[i] + 1))
        else:
            conds.append((f"gamma{k} > alpha{k}", gamma[i] > alpha[i]))
        conds.append(_power_balance(n, p, q, alpha, beta, i))
    return conds


_FINITE_COROLLARY_P = {"6.1": "7.4", "6.2": "7.5", "6.3": "7.6", "6.4": "7.7"}
_FINITE_COROLLARY_B = {"6.1": "7.10", "6.2": "7.11", "6.3": "7.12", "6.4": "7.13"}
_INF_COROLLARY_B = {"6.5": "7.14", "6.6": "7.15", "6.7": "7.16", "6.8": "7.17", "6.9": "7.18",
                    "6.10": "7.19", "6.11": "7.19", "6.12": "7.20", "6.13": "7.20"}


def _alpha_pinned(n, kinds, alpha) -> list[tuple[str, bool]]:
    """The infinite-target corollaries need ``alpha_i = -(n+1)`` in every slot with ``p_i < inf``."""
    return [
        (f"alpha{i + 1} = -(n+1)", _eq(alpha[i], -(n + 1), 1.0))
        for i, kind in enumerate(kinds)
        if kind != INF_INF
    ]


def projection_form(n, p, q, gamma, alpha, beta) -> CorollaryForm | None:
    found = regime(p, q)
    if found is None:
        return None
    theorem, kinds = found
    if theorem in _FINITE_COROLLARY_P:
        conds = _finite_target_forms(kinds, n, p, q, gamma, alpha, beta, berezin=False)
        return CorollaryForm(_FINITE_COROLLARY_P[theorem], all(h for _, h in conds), False, tuple(conds))
    if theorem == "6.6":
        conds = [(f"gamma{i + 1} >= alpha{i + 1}", gamma[i] >= alpha[i]) for i in range(2)]
        conds += _alpha_pinned(n, kinds, alpha)
        return CorollaryForm("7.8", all(h for _, h in conds), True, tuple(conds))
    return CorollaryForm("7.9", False, False, (("p != (1,1) with q = (inf, inf)", True),))


def berezin_form(n, p, q, gamma, alpha, beta) -> CorollaryForm | None:
    found = regime(p, q)
    if found is None:
        return None
    theorem, kinds = found
    if theorem in _FINITE_COROLLARY_B:
        conds = _finite_target_forms(kinds, n, p, q, gamma, alpha, beta, berezin=True)
        return CorollaryForm(_FINITE_COROLLARY_B[theorem], all(h for _, h in conds), False, tuple(conds))
    if theorem == "6.9":
        return CorollaryForm("7.18", True, False, ())
    conds = []
    for i, kind in enumerate(kinds):
        if kind == UNIT_INF:
            conds.append((f"gamma{i + 1} >= alpha{i + 1}", gamma[i] >= alpha[i]))
        elif kind == FINITE_INF:
            conds.append((f"gamma{i + 1} > alpha{i + 1}", gamma[i] > alpha[i]))
    conds += _alpha_pinned(n, kinds, alpha)
    return CorollaryForm(_INF_COROLLARY_B[theorem], all(h for _, h in conds), True, tuple(conds))


def tc_form(n, p, q, c, gamma, beta) -> CorollaryForm | None:
    found = regime(p, q)
    if found is None:
        return None
    theorem, kinds = found
    p, q = exponents(p), exponents(q)
    if theorem == "6.1":
        conds = []
        for i in range(2):
            lam = (n + 1 + beta[i]) / q[i] - (n + 1 + gamma[i]) / p[i]
            conds.append((f"beta{i + 1} > -1", beta[i] > -1))
            conds.append((f"c{i + 1} = n+1+gamma{i + 1}+lambda{i + 1}", abs(c[i] - (n + 1 + gamma[i] + lam)) <= CRITICAL_TOL))
        return CorollaryForm("7.1", all(h for _, h in conds), False, tuple(conds))
    if theorem == "6.6":
        conds = [(f"c{i + 1} = 0", abs(c[i]) <= CRITICAL_TOL) for i in range(2)]
        return CorollaryForm("7.2", all(h for _, h in conds), False, tuple(conds))
    if theorem == "6.2":
        return CorollaryForm("7.3", False, False, (("p = (1,1), q_i >= 1", True),))
    if theorem in ("6.3", "6.4") and p.p_plus < q.p_minus:
        return CorollaryForm("7.3", False, False, (("1 = p_- < p_+ < q_-", True),))
    if all(math.isinf(v) for v in q):
        return CorollaryForm("7.3", False, False, (("p != (1,1) with q = (inf, inf)", True),))
    return None


def _reconcile(verdict: BoundednessVerdict, form: CorollaryForm | None) -> BoundednessVerdict:
    if form is None:
        return verdict
    if verdict.status is Status.INADMISSIBLE and not form.forces_formal_alpha:
        # the corollary presupposes admissible weights
        return replace(verdict, theorem=form.corollary)
    if form.bounded != verdict.bounded and not form.forces_formal_alpha:
        raise ConsistencyError(
            f"corollary {form.corollary} says bounded={form.bounded} but theorem {verdict.via} gives {verdict.status.value}"
        )
    if form.forces_formal_alpha:
        if verdict.bounded:
            raise ConsistencyError(f"corollary {form.corollary} needs alpha = -(n+1) yet the theorem table reports bounded")
        failed = verdict.failed + tuple(name for name, holds in form.conditions if not holds)
        return replace(verdict, status=Status.INADMISSIBLE, theorem=form.corollary, failed=failed)
    return replace(verdict, theorem=form.corollary)


def classify_projection(n: int, p, q, gamma, alpha=(0.0, 0.0), beta=(0.0, 0.0)) -> BoundednessVerdict:
    """Boundedness of ``P_gamma`` from ``L^p_alpha`` to ``L^q_beta``, cross-checked against the corollary form."""
    p, q = exponents(p), exponents(q)
    params = make_projection(n, gamma, alpha, beta)
    verdict = classify(n, p, q, params, "T")
    return _reconcile(verdict, projection_form(n, p, q, params.b, params.alpha, params.beta))


def classify_berezin(n: int, p, q, gamma, alpha=(0.0, 0.0), beta=(0.0, 0.0)) -> BoundednessVerdict:
    """Boundedness of ``B_gamma`` from ``L^p_alpha`` to ``L^q_beta``, cross-checked against the corollary form."""
    p, q = exponents(p), exponents(q)
    params = make_berezin(n, gamma, alpha, beta)
    verdict = classify(n, p, q, params, "S")
    return _reconcile(verdict, berezin_form(n, p, q, params.b, params.alpha, params.beta))


def classify_Tc(n: int, p, q, c, gamma, beta=(0.0, 0.0)) -> BoundednessVerdict:
    """Boundedness of ``T_c^gamma`` from ``L^p_gamma`` to ``L^q_beta``, cross-checked against the corollary form."""
    p, q = exponents(p), exponents(q)
    params = make_Tc(c, gamma, beta)
    verdict = classify(n, p, q, params, "T")
    return _reconcile(verdict, tc_form(n, p, q, params.c, params.b, params.beta))
