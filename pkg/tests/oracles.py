"""Closed forms used as independent references by several test modules."""

import math


def second_identity_oracle(s, t):
    """Half-plane value of ``int rho(u)^t / |rho(i,u)|^s dV(u)``.

    Integrating ``x`` first gives ``2^s (1+y)^{1-s} sqrt(pi) Gamma((s-1)/2) / Gamma(s/2)``,
    and the ``y`` integral is a beta function.
    """
    x_part = 2**s * math.sqrt(math.pi) * math.gamma((s - 1) / 2) / math.gamma(s / 2)
    return x_part * math.gamma(t + 1) * math.gamma(s - t - 2) / math.gamma(s - 1)
