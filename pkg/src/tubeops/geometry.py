"""Tube domain over the paraboloid base, its defining functions and point sampling.

Points of T_B are stored in real coordinates ``(x, y)`` with ``z = x + iy``.
The base is ``B = {y : |y'|^2 < y_n}`` so at ``n = 1`` the domain is the upper
half-plane.

Besides the scalar API on :class:`TubePoint` there are array versions
(``rho_array``, ``rho_pair_array``) used by the quadrature engines, which
evaluate integrands on batches of nodes stored as ``(N, n)`` arrays.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MEMBERSHIP_MARGIN = 1e-14


class MembershipError(ValueError):
    """Raised when a point is not in the open tube domain."""


@dataclass(frozen=True)
class TubePoint:
    """A point ``z = x + iy`` of T_B in real coordinates."""

    x: tuple[float, ...]
    y: tuple[float, ...]

    def __post_init__(self) -> None:
        x = tuple(float(v) for v in np.atleast_1d(self.x))
        y = tuple(float(v) for v in np.atleast_1d(self.y))
        if len(x) == 0 or len(x) != len(y):
            raise ValueError(f"x and y must have the same positive length, got {len(x)} and {len(y)}")
        if not all(math.isfinite(v) for v in x + y):
            raise ValueError("coordinates must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        gap = y[-1] - sum(v * v for v in y[:-1])
        if not gap > MEMBERSHIP_MARGIN * (1.0 + abs(y[-1])):
            raise MembershipError(f"point with y={y} is not interior: y_n - |y'|^2 = {gap:g}")

    @property
    def dim(self) -> int:
        return len(self.x)

    @classmethod
    def from_complex(cls, *zs: complex) -> "TubePoint":
        """Build a point from its complex coordinates ``(z_1, ..., z_n)``."""
        return cls(tuple(complex(z).real for z in zs), tuple(complex(z).imag for z in zs))

    @classmethod
    def vertical(cls, n: int, height: float) -> "TubePoint":
        """The point ``(0', height * i)``; ``height = 1`` gives the base point 𝐢."""
        return cls((0.0,) * n, (0.0,) * (n - 1) + (float(height),))

    def as_complex(self) -> tuple[complex, ...]:
        return tuple(complex(a, b) for a, b in zip(self.x, self.y))

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self.x), np.array(self.y)


def rho(z: TubePoint) -> float:
    """Height function ``rho(z) = y_n - |y'|^2``."""
    return z.y[-1] - sum(v * v for v in z.y[:-1])


def rho_pair(z: TubePoint, u: TubePoint) -> complex:
    """Polarization ``rho(z, u) = ((z' - conj u')^2 - 2i(z_n - conj u_n)) / 4``.

    The square is the complex bilinear sum over the first ``n - 1`` coordinates.
    """
    if z.dim != u.dim:
        raise ValueError(f"dimension mismatch: {z.dim} vs {u.dim}")
    zc, uc = z.as_complex(), u.as_complex()
    square = sum((a - b.conjugate()) ** 2 for a, b in zip(zc[:-1], uc[:-1]))
    value = 0.25 * (square - 2j * (zc[-1] - uc[-1].conjugate()))
    if not value.real > 0.0:
        raise ArithmeticError(f"Re rho(z,u) = {value.real!r} is not positive")
    return value


def complex_power(v: complex, e: float) -> complex:
    """Principal branch ``exp(e (ln|v| + i arg v))`` with ``arg v`` in ``(-pi, pi]``."""
    v = complex(v)
    if v == 0:
        raise ZeroDivisionError("complex_power of zero")
    if v.imag == 0.0 and v.real > 0.0:
        return complex(v.real ** e, 0.0)
    arg = math.atan2(v.imag, v.real)
    if arg == -math.pi:
        arg = math.pi
    return cmath.exp(e * complex(math.log(abs(v)), arg))


def rho_array(y: np.ndarray) -> np.ndarray:
    """``rho`` for a batch of imaginary parts of shape ``(N, n)``."""
    return y[:, -1] - np.sum(y[:, :-1] ** 2, axis=1)


def rho_pair_array(x: np.ndarray, y: np.ndarray, u: TubePoint, reverse: bool = False) -> np.ndarray:
    """``rho(z, u)`` for a batch ``z = x + iy`` of shape ``(N, n)`` against a fixed ``u``.

    With ``reverse=True`` returns ``rho(u, z)``, which is the complex conjugate.
    """
    ux, uy = u.as_arrays()
    dx = x - ux
    sy = y + uy
    square = np.sum(dx[:, :-1] ** 2 - sy[:, :-1] ** 2, axis=1) + 2j * np.sum(dx[:, :-1] * sy[:, :-1], axis=1)
    value = 0.25 * (square - 2j * (dx[:, -1] + 1j * sy[:, -1]))
    return np.conj(value) if reverse else value


def complex_power_array(v: np.ndarray, e: float) -> np.ndarray:
    """Vectorized principal-branch power; matches :func:`complex_power`."""
    v = np.asarray(v, dtype=complex)
    arg = np.angle(v)
    arg = np.where(arg == -np.pi, np.pi, arg)
    return np.exp(e * (np.log(np.abs(v)) + 1j * arg))


def sample_points(n: int, count: int, seed: int, scale: float = 1.0) -> list[TubePoint]:
    """Seeded interior points cycling through near-boundary, bulk and far-field strata."""
    if count < 1:
        raise ValueError("count must be at least 1")
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    points = []
    for k in range(count):
        stratum = k % 3
        if stratum == 0:
            height = scale * 10.0 ** rng.uniform(-4.0, -2.0)
            spread = scale
        elif stratum == 1:
            height = scale * 10.0 ** rng.uniform(-1.0, 1.0)
            spread = scale
        else:
            height = scale * 10.0 ** rng.uniform(1.0, 3.0)
            spread = scale * 10.0 ** rng.uniform(1.0, 3.0)
        x = rng.normal(0.0, spread, size=n)
        if n > 1:
            direction = rng.normal(size=n - 1)
            direction /= np.linalg.norm(direction)
            yp = direction * math.sqrt(scale) * rng.uniform(0.0, 2.0)
        else:
            yp = np.zeros(0)
        yn = float(np.sum(yp ** 2)) + height
        points.append(TubePoint(tuple(x), tuple(yp) + (yn,)))
    return points


def as_points(values: Sequence[TubePoint | complex]) -> list[TubePoint]:
    """Accept tube points or plain complex numbers (``n = 1``)."""
    return [v if isinstance(v, TubePoint) else TubePoint.from_complex(v) for v in values]
