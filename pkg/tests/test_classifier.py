import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tubeops.acceptance import COROLLARY_PLAN, _corollary_case
from tubeops.classifier import (
    CRITICAL_TOL,
    EXIT_CODES,
    MIRROR_THEOREMS,
    ConsistencyError,
    MixedExponents,
    Status,
    classify,
    classify_berezin,
    classify_projection,
    classify_Tc,
    parse_exponent,
    regime,
)
from tubeops.configs import ALL_THEOREMS, bounded_params, perturbed_params, regime_exponents
from tubeops.operators import OperatorParams

INF = math.inf
seeds = st.integers(min_value=0, max_value=2**32 - 1)
theorems = st.sampled_from(ALL_THEOREMS)


def _case(seed, theorem, bounded=True):
    rng = np.random.default_rng(seed)
    p, q = regime_exponents(theorem, rng)
    params = bounded_params(1, p, q, rng) if bounded else perturbed_params(1, p, q, rng)
    return p, q, params


@pytest.mark.parametrize("token", ["inf", "INF", " Infinity ", "∞"])
def test_parse_exponent_infinity(token):
    assert parse_exponent(token) == INF


@pytest.mark.parametrize("bad", ["0.5", "nan", "-inf", "abc", 0.99])
def test_parse_exponent_rejects(bad):
    with pytest.raises(ValueError):
        parse_exponent(bad)


def test_mixed_exponents_json_uses_inf_token():
    assert MixedExponents(2, "inf").to_json() == [2.0, "inf"]
    assert MixedExponents(1, 4).conjugate() == (0.0, 0.75)


@pytest.mark.parametrize(
    "p, q, expected",
    [
        ((2, 2), (2, 2), "6.1"),
        ((2, 3), (3, 5), "6.1"),
        ((1, 1), (1, 1), "6.2"),
        ((1, 1), (3, 1.5), "6.2"),
        ((2, 1), (2, 2), "6.3"),
        ((1, 2), (3, 2), "6.4"),
        ((2, 3), (INF, INF), "6.5"),
        ((1, 1), (INF, INF), "6.6"),
        ((1, 3), (INF, INF), "6.7"),
        ((3, 1), (INF, INF), "6.8"),
        ((INF, INF), (INF, INF), "6.9"),
        ((1, INF), (INF, INF), "6.10"),
        ((INF, 1), (INF, INF), "6.11"),
        ((INF, 2), (INF, INF), "6.12"),
        ((2, INF), (INF, INF), "6.13"),
    ],
)
def test_regime_table(p, q, expected):
    assert regime(MixedExponents(*p), MixedExponents(*q))[0] == expected


@pytest.mark.parametrize(
    "p, q",
    [((2, 3), (2, 2)), ((2, 2), (INF, 2)), ((1, 1), (2, INF)), ((INF, 2), (3, 3)), ((3, 1), (2, 4)), ((1, 2), (1.5, 3))],
)
def test_uncovered_exponents(p, q):
    params = OperatorParams((0, 0), (0, 0), (2, 2))
    verdict = classify(1, p, q, params)
    assert verdict.status is Status.OUTSIDE
    assert verdict.exit_code == 2
    assert verdict.to_dict() == {"status": "outside_coverage", "theorem": None, "lambda": None, "failed": [], "critical_c": None}


def test_bergman_type_bounded():
    verdict = classify(1, (2, 2), (2, 2), OperatorParams((0, 0), (0, 0), (2, 2)))
    assert verdict.status is Status.BOUNDED
    assert verdict.theorem == "6.1"
    assert verdict.lam == (0.0, 0.0)
    assert verdict.critical_c == (2.0, 2.0)


def test_off_critical_c_unbounded():
    verdict = classify(1, (2, 2), (2, 2), OperatorParams((0, 0), (0, 0), (2.3, 2)))
    assert verdict.status is Status.UNBOUNDED
    assert verdict.failed == ("c1_critical",)
    assert verdict.critical_c == (2.0, 2.0)


def test_infinite_source_and_target():
    verdict = classify(1, (INF, INF), (INF, INF), OperatorParams((1, 1), (0, 0), (3, 3)))
    assert verdict.status is Status.BOUNDED and verdict.theorem == "6.9"


def test_unit_to_infinity_weak_inequalities_attained():
    # a_i = 0 and b_i = alpha_i are allowed; c_i = n+1+a_i+b_i-(n+1+alpha_i) = 0
    verdict = classify(1, (1, 1), (INF, INF), OperatorParams((0, 0), (0.5, 0.5), (0, 0), (0.5, 0.5)))
    assert verdict.status is Status.BOUNDED and verdict.theorem == "6.6"


def test_mixed_unit_and_finite_source():
    # lambda = (-2, -2/3) at n = 1, alpha = 0
    verdict = classify(1, (1, 3), (INF, INF), OperatorParams((0, 1), (0, 0), (0, 7 / 3)))
    assert verdict.status is Status.BOUNDED and verdict.theorem == "6.7"
    assert verdict.lam == pytest.approx((-2.0, -2 / 3))


def test_finite_and_infinite_source():
    verdict = classify(1, (2, INF), (INF, INF), OperatorParams((1, 1), (0, 0), (2, 3)))
    assert verdict.status is Status.BOUNDED and verdict.theorem == "6.13"
    assert verdict.lam == (-1.0, 0.0)


def test_infinite_target_needs_positive_a():
    verdict = classify(1, (2, 2), (INF, INF), OperatorParams((0, 1), (0, 0), (1, 2)))
    assert verdict.status is Status.UNBOUNDED
    assert "a1_condition" in verdict.failed


def test_unit_source_b_condition_strict():
    verdict = classify(1, (1, 1), (2, 2), OperatorParams((0, 0), (0, 0), (2, 2)))
    assert "b1_condition" in verdict.failed


def test_inadmissible_target_weight():
    verdict = classify(1, (2, 2), (2, 2), OperatorParams((0, 0), (0, 0), (2, 2), (0, 0), (-1.5, 0)))
    assert verdict.status is Status.INADMISSIBLE
    assert verdict.failed[0] == "beta1_admissible"
    assert verdict.exit_code == 3


def test_target_weight_ignored_for_infinite_target():
    verdict = classify(1, (2, 2), (INF, INF), OperatorParams((1, 1), (0, 0), (2, 2), (0, 0), (-5, -5)))
    assert verdict.status is Status.BOUNDED


def test_formal_source_weight_is_inadmissible():
    verdict = classify(1, (2, 2), (2, 2), OperatorParams((0, 0), (0, 0), (2, 2), (-2, 0), formal=True))
    assert verdict.status is Status.INADMISSIBLE


def test_verdict_json_schema():
    verdict = classify(1, (2, 2), (2, 2), OperatorParams((0, 0), (0, 0), (2, 2)))
    data = json.loads(verdict.to_json())
    assert list(data) == ["status", "theorem", "lambda", "failed", "critical_c"]


def test_human_output_lists_named_conditions():
    text = classify(1, (2, 2), (2, 2), OperatorParams((0, 0), (0, 0), (2.3, 2))).to_human()
    assert "theorem: 6.1" in text
    assert "[FAIL] c1_critical" in text
    assert "margin +0.3" in text


def test_exit_codes():
    assert EXIT_CODES == {Status.BOUNDED: 0, Status.UNBOUNDED: 1, Status.OUTSIDE: 2, Status.INADMISSIBLE: 3}


def test_operator_kind_validated():
    with pytest.raises(ValueError):
        classify(1, (2, 2), (2, 2), OperatorParams((0, 0), (0, 0), (2, 2)), "P")


@given(seeds, theorems, st.booleans())
def test_T_and_S_share_verdicts(seed, theorem, bounded):
    p, q, params = _case(seed, theorem, bounded)
    t, s = classify(1, p, q, params, "T"), classify(1, p, q, params, "S")
    assert (t.status, t.theorem, t.lam, t.failed, t.critical_c) == (s.status, s.theorem, s.lam, s.failed, s.critical_c)


@given(seeds, theorems, st.booleans())
def test_index_swap_symmetry(seed, theorem, bounded):
    p, q, params = _case(seed, theorem, bounded)
    v = classify(1, p, q, params)
    w = classify(1, p.swapped(), q.swapped(), params.swapped())
    assert w.status is v.status
    assert w.theorem == MIRROR_THEOREMS.get(v.theorem, v.theorem)
    assert w.lam == v.lam[::-1]


@given(seeds, theorems)
def test_generated_configurations_are_bounded(seed, theorem):
    p, q, params = _case(seed, theorem)
    assert classify(1, p, q, params).status is Status.BOUNDED


@given(seeds, theorems, st.sampled_from([0, 1]), st.sampled_from([-1e-6, 1e-6]))
def test_critical_line_perturbation_flips_status(seed, theorem, slot, shift):
    p, q, params = _case(seed, theorem)
    c = list(params.c)
    c[slot] += shift
    verdict = classify(1, p, q, params.with_c(c))
    assert verdict.status is Status.UNBOUNDED
    assert verdict.failed == (f"c{slot + 1}_critical",)


@given(seeds, theorems, st.floats(min_value=-0.5, max_value=0.5))
def test_critical_tolerance(seed, theorem, frac):
    p, q, params = _case(seed, theorem)
    c = (params.c[0] + frac * CRITICAL_TOL, params.c[1])
    assert classify(1, p, q, params.with_c(c)).status is Status.BOUNDED


@given(st.integers(min_value=1, max_value=5), seeds, theorems)
def test_lambda_consistent_with_critical_c(n, seed, theorem):
    rng = np.random.default_rng(seed)
    p, q = regime_exponents(theorem, rng)
    params = bounded_params(n, p, q, rng)
    v = classify(n, p, q, params)
    for i in range(2):
        assert v.critical_c[i] == pytest.approx(n + 1 + params.a[i] + params.b[i] + v.lam[i])


# corollaries ------------------------------------------------------------------


def test_projection_bergman_bounded():
    verdict = classify_projection(1, (2, 2), (2, 2), (0, 0))
    assert verdict.status is Status.BOUNDED and verdict.theorem == "7.4" and verdict.via == "6.1"


def test_projection_into_infinity_unbounded():
    verdict = classify_projection(1, (2, 2), (INF, INF), (0, 0))
    assert verdict.status is Status.UNBOUNDED and verdict.theorem == "7.9"


def test_projection_unit_into_infinity_needs_formal_alpha():
    verdict = classify_projection(1, (1, 1), (INF, INF), (0, 0))
    assert verdict.status is Status.INADMISSIBLE and verdict.theorem == "7.8"
    assert "alpha1 = -(n+1)" in verdict.failed


def test_berezin_bounded():
    verdict = classify_berezin(1, (2, 2), (2, 2), (0, 0))
    assert verdict.status is Status.BOUNDED and verdict.theorem == "7.10"


def test_berezin_infinite_source_always_bounded():
    verdict = classify_berezin(1, (INF, INF), (INF, INF), (0.5, 2.0))
    assert verdict.status is Status.BOUNDED and verdict.theorem == "7.18"


def test_tc_unit_to_infinity_bounded_only_at_zero():
    assert classify_Tc(1, (1, 1), (INF, INF), (0, 0), (0.3, 0.3)).theorem == "7.2"
    assert classify_Tc(1, (1, 1), (INF, INF), (0, 0), (0.3, 0.3)).status is Status.BOUNDED
    assert classify_Tc(1, (1, 1), (INF, INF), (0.5, 0), (0.3, 0.3)).status is Status.UNBOUNDED


def test_tc_unit_source_unbounded():
    verdict = classify_Tc(1, (1, 1), (1, 1), (2.0, 2.0), (0, 0))
    assert verdict.status is Status.UNBOUNDED and verdict.theorem == "7.3"


def test_tc_critical_finite():
    # c = n+1+gamma+lambda with lambda = (n+1+beta)/q - (n+1+gamma)/p
    verdict = classify_Tc(1, (2, 2), (4, 4), (2 + 0.5 + (2.2 / 4 - 2.5 / 2),) * 2, (0.5, 0.5), (0.2, 0.2))
    assert verdict.status is Status.BOUNDED and verdict.theorem == "7.1"


def test_tc_one_infinite_target_outside():
    assert classify_Tc(1, (2, 2), (INF, 3), (2, 2), (0, 0)).status is Status.OUTSIDE


@given(seeds, st.sampled_from([(k, t) for k, plan in COROLLARY_PLAN.items() for t in plan]))
def test_corollaries_agree_with_theorems(seed, case):
    kind, theorem = case
    try:
        verdict = _corollary_case(kind, 1, theorem, np.random.default_rng(seed))
    except ConsistencyError as exc:  # pragma: no cover - reported as a failure
        pytest.fail(str(exc))
    assert verdict.theorem == COROLLARY_PLAN[kind][theorem]
