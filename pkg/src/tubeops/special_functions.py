"""Gamma function and the closed-form constant of the tube-domain integral identity."""

from __future__ import annotations

import math

# Lanczos approximation, g = 7 with nine coefficients.
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)


class DivergentParameterError(ValueError):
    """The integral identity's parameters lie where the integral is infinite."""


def _lanczos_series(x: float) -> tuple[float, float]:
    # x has already been shifted down by one
    acc = _LANCZOS_COEFFS[0]
    for k, coeff in enumerate(_LANCZOS_COEFFS[1:], start=1):
        acc += coeff / (x + k)
    return acc, x + _LANCZOS_G + 0.5


def log_gamma(x: float) -> float:
    """``log Gamma(x)`` for ``x > 0``."""
    x = float(x)
    if not x > 0.0 or not math.isfinite(x):
        raise ValueError(f"log_gamma needs a positive finite argument, got {x!r}")
    if x < 0.5:
        return log_gamma(x + 1.0) - math.log(x)
    acc, t = _lanczos_series(x - 1.0)
    return _HALF_LOG_TWO_PI + (x - 0.5) * math.log(t) - t + math.log(acc)


def gamma_fn(x: float) -> float:
    """Euler Gamma for ``x > 0``."""
    x = float(x)
    if not x > 0.0 or not math.isfinite(x):
        raise ValueError(f"gamma_fn needs a positive finite argument, got {x!r}")
    if x < 0.5:
        return gamma_fn(x + 1.0) / x
    if x > 140.0:
        return math.exp(log_gamma(x))
    acc, t = _lanczos_series(x - 1.0)
    return math.sqrt(2.0 * math.pi) * t ** (x - 0.5) * math.exp(-t) * acc


def first_identity_admissible(n: int, r: float, s: float, t: float) -> bool:
    return r > 0 and s > 0 and t > -1 and r + s - t > n + 1


def log_c1_constant(n: int, r: float, s: float, t: float) -> float:
    """Logarithm of :func:`c1_constant`."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not first_identity_admissible(n, r, s, t):
        raise DivergentParameterError(
            f"identity integral is infinite for n={n}, r={r}, s={s}, t={t} "
            "(need r, s > 0, t > -1, r + s - t > n + 1)"
        )
    return (
        (n + 1) * math.log(2.0)
        + n * math.log(math.pi)
        + log_gamma(1.0 + t)
        + log_gamma(r + s - t - n - 1.0)
        - (log_gamma(min(r, s)) + log_gamma(max(r, s)))
    )


def c1_constant(n: int, r: float, s: float, t: float) -> float:
    """``2^{n+1} pi^n Gamma(1+t) Gamma(r+s-t-n-1) / (Gamma(r) Gamma(s))``."""
    return math.exp(log_c1_constant(n, r, s, t))
