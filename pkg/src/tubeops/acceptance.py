"""The eleven acceptance criteria as runnable checks, shared by the test suite and ``tubeops selftest``."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .classifier import (
    MIRROR_THEOREMS,
    ConsistencyError,
    Status,
    classify,
    classify_berezin,
    classify_projection,
    classify_Tc,
    regime,
)
from .configs import (
    ALL_THEOREMS,
    FINITE_THEOREMS,
    bounded_params,
    identity_draws,
    infinite_target_params,
    perturbed_params,
    regime_exponents,
    sweep_params,
)
from .geometry import TubePoint, rho, rho_pair, sample_points
from .integration import QuadratureConfig, verify_identity_first, verify_identity_second
from .operators import OperatorParams, apply_S, apply_T
from .schur import build_certificate, certificate_exists, verify_infinity_condition, verify_schur_conditions
from .witnesses import blowup_sweep, bump_pair, closed_form_T_image, duality_gap, make_direct_family


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float
    budget: float

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:>2}. {self.title}: {self.detail} ({self.seconds:.1f}s, budget {self.budget:g}s)"


def _timed(number: int, title: str, budget: float, body: Callable[[], tuple[bool, str]]) -> CriterionResult:
    start = time.perf_counter()
    passed, detail = body()
    elapsed = time.perf_counter() - start
    within = elapsed <= budget
    if not within:
        detail += "; over time budget"
    return CriterionResult(number, title, passed and within, detail, elapsed, budget)


def _scaled(count: int, quick: bool, floor: int = 1) -> int:
    return max(floor, count // 4) if quick else count


def criterion_1(quick: bool = False) -> CriterionResult:
    def body():
        worst = 0.0
        for r, s, t, z, u in identity_draws(_scaled(20, quick), seed=101):
            worst = max(worst, verify_identity_first(1, r, s, t, z, u).rel_err)
        pinned = verify_identity_first(1, 2.0, 2.0, 0.0, TubePoint.from_complex(1j), TubePoint.from_complex(2j))
        pinned_err = abs(pinned.lhs - 16 * math.pi / 9) / (16 * math.pi / 9)
        ok = worst <= 1e-2 and pinned_err <= 1e-2
        return ok, f"worst rel_err {worst:.2e}, pinned case {pinned.lhs.real:.6f} vs 16pi/9 (rel {pinned_err:.2e})"

    return _timed(1, "first integral identity", 60, body)


def criterion_2(quick: bool = False) -> CriterionResult:
    def body():
        zs = [TubePoint.from_complex(v) for v in (1j, 2j, 3 + 1j, 0.25j - 1, 5 + 7j)]
        rep = verify_identity_second(1, 4.0, 0.0, zs)
        boundary = verify_identity_second(1, 2.0, 0.0, zs[:1])
        ok = rep.homogeneity_spread < 2e-2 and not rep.divergent and boundary.divergent
        return ok, f"spread {rep.homogeneity_spread:.2e}, constant {rep.constant:.6f}, (2,0) divergent={boundary.divergent}"

    return _timed(2, "second identity homogeneity", 30, body)


def criterion_3(quick: bool = False) -> CriterionResult:
    def body():
        rng = np.random.default_rng(303)
        disagreements = bounded = 0
        count = _scaled(1000, quick)
        for _ in range(count):
            p, q = regime_exponents("6.1", rng)
            params = perturbed_params(1, p, q, rng)
            is_bounded = classify(1, p, q, params).status is Status.BOUNDED
            bounded += is_bounded
            disagreements += is_bounded != certificate_exists(1, p, q, params)
        return disagreements == 0, f"{count} configurations, {bounded} bounded, {disagreements} disagreements"

    return _timed(3, "classifier <=> certificate", 10, body)


def criterion_4(quick: bool = False) -> CriterionResult:
    def body():
        rng = np.random.default_rng(404)
        worst, failures = 0.0, 0
        count = _scaled(25, quick, floor=4)
        for k in range(count):
            theorem = FINITE_THEOREMS[k % 4]
            p, q = regime_exponents(theorem, rng)
            cert = build_certificate(1, p, q, bounded_params(1, p, q, rng))
            report = verify_schur_conditions(cert, 10, seed=1000 + k)
            worst = max(worst, report.worst_spread)
            failures += not report.passed
        return failures == 0, f"{count} certificates, worst spread {worst:.2e}, {failures} failures"

    return _timed(4, "Schur-condition constancy", 300, body)


def criterion_5(quick: bool = False) -> CriterionResult:
    def body():
        rng = np.random.default_rng(505)
        worst = {0.0: 0.0, 0.3: 0.0, -0.3: 0.0}
        mismatches = 0
        count = _scaled(20, quick, floor=4)
        for k in range(count):
            theorem = FINITE_THEOREMS[k % 4]
            p, q = regime_exponents(theorem, rng)
            params = sweep_params(1, p, q, rng)
            for offset in worst:
                shifted = params.with_c((params.c[0] + offset, params.c[1]))
                slope = blowup_sweep(1, p, q, shifted).slope
                integrated = blowup_sweep(1, p, q, shifted, method="quadrature").slope
                worst[offset] = max(worst[offset], abs(slope - offset), abs(integrated - offset))
                expected = Status.BOUNDED if offset == 0.0 else Status.UNBOUNDED
                mismatches += classify(1, p, q, shifted).status is not expected
        ok = all(v < 0.05 for v in worst.values()) and mismatches == 0
        detail = ", ".join(f"offset {k:+.1f}: max |slope-offset| {v:.2e}" for k, v in worst.items())
        return ok, f"{count} configurations; {detail}; {mismatches} classifier mismatches"

    return _timed(5, "criticality dichotomy", 300, body)


def criterion_6(quick: bool = False) -> CriterionResult:
    def body():
        rng = np.random.default_rng(606)
        worst, evaluations = 0.0, 0
        configs = _scaled(5, quick, floor=2)
        for k in range(configs):
            theorem = FINITE_THEOREMS[k % 4]
            p, q = regime_exponents(theorem, rng)
            params = bounded_params(1, p, q, rng)
            xi, eta = (TubePoint((rng.uniform(-2, 2),), (10 ** rng.uniform(-1, 1),)) for _ in range(2))
            family = make_direct_family(1, p, params, xi, eta)
            image = closed_form_T_image(params, family)
            for z, w in zip(sample_points(1, 5, 600 + k), sample_points(1, 5, 700 + k)):
                value = apply_T(params, family.function, z, w).value
                expected = image(z, w)
                worst = max(worst, abs(value - expected) / abs(expected))
                evaluations += 1
        return worst < 2e-2, f"{evaluations} evaluations, worst rel_err {worst:.2e}"

    return _timed(6, "operator oracle", 180, body)


DUALITY_PARAMS = (
    OperatorParams((0.0, 0.0), (0.0, 0.0), (2.0, 2.0)),
    OperatorParams((0.3, 0.2), (0.5, 1.0), (2.5, 3.7), (0.2, 0.4), (0.1, 0.3)),
    OperatorParams((1.0, 0.5), (0.0, 0.7), (3.2, 2.9), (-0.5, 0.0), (0.6, -0.3)),
)


def criterion_7(quick: bool = False) -> CriterionResult:
    def body():
        worst = 0.0
        count = _scaled(10, quick, floor=2)
        for k in range(count):
            f, g = bump_pair(seed=700 + k)
            worst = max(worst, duality_gap(DUALITY_PARAMS[k % len(DUALITY_PARAMS)], f, g).gap)
        return worst < 2e-2, f"{count} bump pairs, worst gap {worst:.2e}"

    return _timed(7, "adjoint duality", 180, body)


def criterion_8(quick: bool = False) -> CriterionResult:
    def body():
        rng = np.random.default_rng(808)
        violations, count = 0, _scaled(50, quick, floor=8)
        for k in range(count):
            theorem = FINITE_THEOREMS[k % 4]
            p, q = regime_exponents(theorem, rng)
            params = bounded_params(1, p, q, rng)
            xi, eta = (TubePoint((rng.uniform(-2, 2),), (10 ** rng.uniform(-1, 1),)) for _ in range(2))
            f = make_direct_family(1, p, params, xi, eta).function
            z, w = sample_points(1, 1, 800 + k)[0], sample_points(1, 1, 900 + k)[0]
            t = apply_T(params, f, z, w)
            s = apply_S(params, f.modulus(), z, w)
            violations += abs(t.value) > abs(s.value) + t.est_error + s.est_error
        return violations == 0, f"{count} evaluations, {violations} violations"

    return _timed(8, "pointwise domination", 120, body)


def _structural_suite(count_ts: int, count_cor: int) -> tuple[bool, str]:
    rng = np.random.default_rng(909)
    n = 1
    # T/S equality
    ts_mismatch = 0
    for k in range(count_ts):
        theorem = ALL_THEOREMS[k % len(ALL_THEOREMS)]
        if k % 7 == 0:
            p, q = _uncovered_exponents(rng)
        else:
            p, q = regime_exponents(theorem, rng)
        params = _any_params(n, p, q, rng)
        t, s = classify(n, p, q, params, "T"), classify(n, p, q, params, "S")
        ts_mismatch += (t.status, t.theorem, t.lam) != (s.status, s.theorem, s.lam)
    # index-swap symmetry
    swap_mismatch = 0
    for k in range(count_cor):
        theorem = ALL_THEOREMS[k % len(ALL_THEOREMS)]
        p, q = regime_exponents(theorem, rng)
        params = _any_params(n, p, q, rng)
        v = classify(n, p, q, params)
        w = classify(n, p.swapped(), q.swapped(), params.swapped())
        expected = MIRROR_THEOREMS.get(v.theorem, v.theorem)
        swap_mismatch += (w.status, w.theorem, w.lam) != (v.status, expected, v.lam[::-1])
    # corollary delegation agreement
    corollary_counts: dict[str, int] = {}
    disagreements = 0
    for kind, plan in COROLLARY_PLAN.items():
        multiplicity: dict[str, int] = {}
        for corollary in plan.values():
            multiplicity[corollary] = multiplicity.get(corollary, 0) + 1
        for theorem, corollary in plan.items():
            for _ in range(-(-count_cor // multiplicity[corollary])):
                try:
                    verdict = _corollary_case(kind, n, theorem, rng)
                except ConsistencyError:
                    disagreements += 1
                    continue
                if verdict.theorem != corollary:
                    disagreements += 1
                corollary_counts[verdict.theorem] = corollary_counts.get(verdict.theorem, 0) + 1
    # critical-line perturbation
    flips_missing = 0
    for k in range(count_cor):
        theorem = ALL_THEOREMS[k % len(ALL_THEOREMS)]
        p, q = regime_exponents(theorem, rng)
        params = bounded_params(n, p, q, rng)
        if classify(n, p, q, params).status is not Status.BOUNDED:
            flips_missing += 1
            continue
        for i in range(2):
            for sign in (-1.0, 1.0):
                c = list(params.c)
                c[i] += sign * 1e-6
                flips_missing += classify(n, p, q, params.with_c(c)).status is not Status.UNBOUNDED
    least = min(corollary_counts.values()) if corollary_counts else 0
    ok = ts_mismatch == 0 and swap_mismatch == 0 and disagreements == 0 and flips_missing == 0
    ok = ok and len(corollary_counts) == 20 and least >= count_cor
    detail = (
        f"T/S mismatches {ts_mismatch}/{count_ts}, swap mismatches {swap_mismatch}, "
        f"corollary disagreements {disagreements} over {len(corollary_counts)} corollaries "
        f"(min {least} cases each), missing criticality flips {flips_missing}"
    )
    return ok, detail


COROLLARY_PLAN = {
    "projection": {
        "6.1": "7.4", "6.2": "7.5", "6.3": "7.6", "6.4": "7.7", "6.6": "7.8",
        **{t: "7.9" for t in ("6.5", "6.7", "6.8", "6.9", "6.10", "6.11", "6.12", "6.13")},
    },
    "berezin": {
        "6.1": "7.10", "6.2": "7.11", "6.3": "7.12", "6.4": "7.13", "6.5": "7.14", "6.6": "7.15",
        "6.7": "7.16", "6.8": "7.17", "6.9": "7.18", "6.10": "7.19", "6.11": "7.19", "6.12": "7.20", "6.13": "7.20",
    },
    "tc": {
        "6.1": "7.1", "6.6": "7.2",
        **{t: "7.3" for t in ("6.2", "6.3", "6.4", "6.5", "6.7", "6.8", "6.9", "6.10", "6.11", "6.12", "6.13")},
    },
}


def _uncovered_exponents(rng):
    from .classifier import INF, MixedExponents

    choices = [
        ((2.0, 3.0), (2.0, 2.0)),
        ((1.5, 2.0), (INF, 3.0)),
        ((1.0, 1.0), (2.0, INF)),
        ((INF, 2.0), (3.0, 3.0)),
        ((3.0, 1.0), (2.0, 4.0)),
    ]
    p, q = choices[int(rng.integers(len(choices)))]
    return MixedExponents(*p), MixedExponents(*q)


def _any_params(n, p, q, rng) -> OperatorParams:
    if regime(p, q) is None:
        vals = rng.uniform(-1, 3, size=6)
        return OperatorParams(tuple(vals[:2]), tuple(vals[2:4]), tuple(vals[4:]))
    if rng.random() < 0.5:
        return bounded_params(n, p, q, rng)
    return perturbed_params(n, p, q, rng)


def _corollary_case(kind: str, n: int, theorem: str, rng):
    strict = kind == "tc" and theorem in ("6.3", "6.4")
    p, q = regime_exponents(theorem, rng, strict=strict)
    gamma = tuple(float(v) for v in rng.uniform(-0.9, 2.0, size=2))
    beta = tuple(float(v) for v in rng.uniform(-0.9, 2.0, size=2))
    if kind == "tc":
        # T_c^gamma: put c on the critical line half the time
        params_c = []
        verdict0 = classify_Tc(n, p, q, (1.0, 1.0), gamma, beta)
        for i in range(2):
            crit = verdict0.critical_c[i]
            params_c.append(crit if rng.random() < 0.5 else crit + float(rng.uniform(-1, 1)))
        if theorem == "6.6" and rng.random() < 0.5:
            params_c = [0.0, 0.0]
        elif theorem == "6.6" and rng.random() < 0.5:
            params_c[int(rng.integers(2))] = 0.0
        return classify_Tc(n, p, q, tuple(params_c), gamma, beta)
    alpha = tuple(float(v) for v in rng.uniform(-0.9, 2.0, size=2))
    if theorem in FINITE_THEOREMS and rng.random() < 0.5:
        # balance p_i (n+1+beta_i) = q_i (n+1+alpha_i) so the bounded branch is exercised
        beta = tuple(q[i] * (n + 1 + alpha[i]) / p[i] - (n + 1) for i in range(2))
    elif theorem not in FINITE_THEOREMS and rng.random() < 0.3:
        alpha = (-(n + 1.0), -(n + 1.0))
    fn = classify_projection if kind == "projection" else classify_berezin
    return fn(n, p, q, gamma, alpha, beta)


def criterion_9(quick: bool = False) -> CriterionResult:
    def body():
        return _structural_suite(_scaled(10_000, quick), _scaled(1000, quick))

    return _timed(9, "classifier structural suite", 5 if not quick else 5, body)


def criterion_10(quick: bool = False) -> CriterionResult:
    def body():
        violations, checked = 0, 0
        count = _scaled(10_000, quick)
        for n in (1, 2):
            zs = sample_points(n, count, seed=1000 + n, scale=1.0)
            ws = sample_points(n, count, seed=2000 + n, scale=3.0)
            for z, w in zip(zs, ws):
                d = rho_pair(z, z)
                rz = rho(z)
                if abs(d - rz) > 1e-12 * (1 + rz) or abs(d.imag) > 1e-12:
                    violations += 1
                if 2 * abs(rho_pair(z, w)) < max(rz, rho(w)) - 1e-12:
                    violations += 1
                checked += 1
        return violations == 0, f"{checked} pairs, {violations} violations"

    return _timed(10, "ρ inequality and diagonal consistency", 60, body)


def criterion_11(quick: bool = False) -> CriterionResult:
    def body():
        rng = np.random.default_rng(1111)
        worst, failures = 0.0, 0
        configs = _scaled(5, quick, floor=2)
        for k in range(configs):
            p, params = infinite_target_params(1, rng)
            rep = verify_infinity_condition(1, p, params, 10, seed=1100 + k)
            worst = max(worst, rep.spread)
            failures += not rep.passed
        return failures == 0, f"{configs} configurations, worst spread {worst:.2e}, {failures} failures"

    return _timed(11, "infinite-target slice-norm constancy", 120, body)


CRITERIA = (
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
    criterion_11,
)


def run_all(quick: bool = False, echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    results = []
    for criterion in CRITERIA:
        result = criterion(quick)
        results.append(result)
        if echo is not None:
            echo(result.line())
    return results
