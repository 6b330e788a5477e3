"""Seeded parameter configurations for each regime, used by the self-test and the test suite."""

from __future__ import annotations

import numpy as np

from .classifier import FINITE, FINITE_INF, INF, INF_INF, UNIT, UNIT_INF, MixedExponents, regime, slot_lambda
from .geometry import TubePoint
from .operators import OperatorParams

FINITE_THEOREMS = ("6.1", "6.2", "6.3", "6.4")
ALL_THEOREMS = FINITE_THEOREMS + ("6.5", "6.6", "6.7", "6.8", "6.9", "6.10", "6.11", "6.12", "6.13")

# source-slot shape of each infinite-target regime: "p" finite > 1, "1", or "inf"
_INF_SHAPES = {
    "6.5": ("p", "p"),
    "6.6": ("1", "1"),
    "6.7": ("1", "p"),
    "6.8": ("p", "1"),
    "6.9": ("inf", "inf"),
    "6.10": ("1", "inf"),
    "6.11": ("inf", "1"),
    "6.12": ("inf", "p"),
    "6.13": ("p", "inf"),
}


def _p(rng: np.random.Generator) -> float:
    return float(rng.uniform(1.1, 4.0))


def regime_exponents(theorem: str, rng: np.random.Generator, strict: bool = False) -> tuple[MixedExponents, MixedExponents]:
    """Random ``(p, q)`` inside the hypotheses of ``theorem``.

    ``strict`` forces ``p_+ < q_-`` in the finite-target regimes.
    """
    gap = (0.05, 3.0) if strict else (0.0, 3.0)
    if theorem == "6.1":
        p = (_p(rng), _p(rng))
        lo = max(p)
        q = tuple(lo + (0.0 if (not strict and rng.random() < 0.1) else float(rng.uniform(*gap))) for _ in range(2))
    elif theorem == "6.2":
        p = (1.0, 1.0)
        q = tuple(1.0 if rng.random() < 0.1 else float(rng.uniform(1.0, 4.0)) for _ in range(2))
    elif theorem in ("6.3", "6.4"):
        p1 = _p(rng)
        q = tuple(p1 + (0.0 if (not strict and rng.random() < 0.1) else float(rng.uniform(*gap))) for _ in range(2))
        p = (p1, 1.0) if theorem == "6.3" else (1.0, p1)
    elif theorem in _INF_SHAPES:
        shape = {"p": _p, "1": lambda r: 1.0, "inf": lambda r: INF}
        p = tuple(shape[s](rng) for s in _INF_SHAPES[theorem])
        q = (INF, INF)
    else:
        raise ValueError(f"unknown theorem {theorem!r}")
    p, q = MixedExponents(*p), MixedExponents(*q)
    assert regime(p, q)[0] == theorem
    return p, q


def _slot_ranges(kind: str, p: float, q: float, alpha: float, beta: float) -> tuple[float, float, bool, bool]:
    """Lower bounds for ``a`` and ``b`` and whether each is attained (weak inequality)."""
    if kind == FINITE:
        return -(beta + 1) / q, (alpha + 1) / p - 1, False, False
    if kind == UNIT:
        return -(beta + 1) / q, alpha, False, False
    if kind == FINITE_INF:
        return 0.0, (alpha + 1) / p - 1, False, False
    if kind == UNIT_INF:
        return 0.0, alpha, True, True
    if kind == INF_INF:
        return 0.0, -1.0, False, False
    raise ValueError(kind)


def _kinds(p: MixedExponents, q: MixedExponents) -> tuple[str, str]:
    found = regime(p, q)
    if found is None:
        raise ValueError("exponents outside every regime")
    return found[1]


def bounded_params(
    n: int,
    p,
    q,
    rng: np.random.Generator,
    a_margin: tuple[float, float] = (0.1, 1.5),
    b_margin: tuple[float, float] = (0.1, 2.0),
    weights: tuple[float, float] = (-0.9, 2.0),
) -> OperatorParams:
    """Admissible parameters satisfying every condition of the regime, with ``c`` on the critical line."""
    p, q = MixedExponents(*p), MixedExponents(*q)
    kinds = _kinds(p, q)
    alpha = tuple(float(rng.uniform(*weights)) for _ in range(2))
    beta = tuple(float(rng.uniform(*weights)) for _ in range(2))
    a, b, c = [], [], []
    for i, kind in enumerate(kinds):
        a_lo, b_lo, a_weak, b_weak = _slot_ranges(kind, p[i], q[i], alpha[i], beta[i])
        ai = a_lo if a_weak and rng.random() < 0.2 else a_lo + float(rng.uniform(*a_margin))
        bi = b_lo if b_weak and rng.random() < 0.2 else b_lo + float(rng.uniform(*b_margin))
        lam = slot_lambda(kind, n, p[i], q[i], alpha[i], beta[i])
        a.append(ai)
        b.append(bi)
        c.append(n + 1 + ai + bi + lam)
    return OperatorParams(tuple(a), tuple(b), tuple(c), alpha, beta)


def perturbed_params(n: int, p, q, rng: np.random.Generator) -> OperatorParams:
    """Parameters near the bounded set: each condition is violated with some probability."""
    base = bounded_params(n, p, q, rng, a_margin=(-0.6, 1.5), b_margin=(-0.6, 2.0), weights=(-0.95, 2.0))
    beta = tuple(b if rng.random() > 0.05 else float(rng.uniform(-1.5, -1.0)) for b in base.beta)
    c = []
    for ci in base.c:
        u = rng.random()
        if u < 0.4:
            c.append(ci)
        elif u < 0.5:
            c.append(ci + float(rng.choice([-1, 1])) * 10.0 ** rng.uniform(-12, -10))
        else:
            c.append(ci + float(rng.choice([-1, 1])) * 10.0 ** rng.uniform(-8, 0))
    return OperatorParams(base.a, base.b, tuple(c), base.alpha, beta)


def sweep_params(n: int, p, q, rng: np.random.Generator) -> OperatorParams:
    """Bounded parameters whose witness norms stay finite after shifting ``c_1`` by ``-0.3``."""
    return bounded_params(n, p, q, rng, a_margin=(0.1, 1.5), b_margin=(0.5, 2.0))


def identity_draws(count: int, seed: int, margin: float = 0.5) -> list[tuple[float, float, float, TubePoint, TubePoint]]:
    """``(r, s, t, z, u)`` for the first integral identity at ``n = 1`` with every precondition held by ``margin``."""
    rng = np.random.default_rng(seed)
    draws = []
    for _ in range(count):
        t = float(rng.uniform(-1 + margin, 2.0))
        r = float(rng.uniform(margin, 3.0))
        s_lo = max(margin, 2 + margin + t - r)
        s = float(rng.uniform(s_lo, s_lo + 2.5))
        pts = []
        for _ in range(2):
            pts.append(TubePoint((float(rng.uniform(-3, 3)),), (float(10.0 ** rng.uniform(-1, 1)),)))
        draws.append((r, s, t, pts[0], pts[1]))
    return draws


def infinite_target_params(n: int, rng: np.random.Generator) -> tuple[MixedExponents, OperatorParams]:
    """A bounded configuration of the finite-source, infinite-target regime."""
    p, q = regime_exponents("6.5", rng)
    return p, bounded_params(n, p, q, rng)
