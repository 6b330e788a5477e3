import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tubeops.geometry import (
    MembershipError,
    TubePoint,
    as_points,
    complex_power,
    complex_power_array,
    rho,
    rho_pair,
    rho_pair_array,
    sample_points,
)


@st.composite
def tube_points(draw, n=None):
    n = n or draw(st.integers(min_value=1, max_value=3))
    x = tuple(draw(st.floats(min_value=-50, max_value=50)) for _ in range(n))
    yp = tuple(draw(st.floats(min_value=-5, max_value=5)) for _ in range(n - 1))
    height = draw(st.floats(min_value=1e-3, max_value=1e3))
    return TubePoint(x, yp + (sum(v * v for v in yp) + height,))


def test_rho_base_point():
    assert rho(TubePoint.from_complex(1j)) == 1.0


def test_rho_n2():
    assert rho(TubePoint((0.0, 0.0), (1.0, 2.0))) == pytest.approx(1.0)


def test_boundary_point_rejected():
    with pytest.raises(MembershipError):
        TubePoint((0.0, 0.0), (0.5, 0.25))


def test_lower_half_plane_rejected():
    with pytest.raises(MembershipError):
        TubePoint.from_complex(-1j)


def test_rho_pair_diagonal_base():
    z = TubePoint.from_complex(1j)
    assert rho_pair(z, z) == pytest.approx(1.0)


def test_rho_pair_i_2i():
    assert rho_pair(TubePoint.from_complex(1j), TubePoint.from_complex(2j)) == pytest.approx(1.5)


@pytest.mark.parametrize("x", [-3.0, 0.5, 2.0, 10.0])
def test_rho_pair_horizontal_shift(x):
    value = rho_pair(TubePoint.from_complex(1j), TubePoint.from_complex(x + 1j))
    assert value == pytest.approx(1 + 0.5j * x)
    assert abs(value) == pytest.approx(math.sqrt(1 + x * x / 4))


@pytest.mark.parametrize(
    "v, e, expected",
    [(4.0, 0.5, 2.0), (1j, 2.0, -1.0), (1 + 1j, -1.0, (1 - 1j) / 2)],
)
def test_complex_power_examples(v, e, expected):
    assert complex_power(v, e) == pytest.approx(expected, abs=1e-15)


def test_complex_power_negative_real_axis_branch():
    assert complex_power(-4.0, 0.5) == pytest.approx(2j)
    assert complex_power(complex(-4.0, -0.0), 0.5) == pytest.approx(2j)


@given(
    st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False),
    st.floats(min_value=-4, max_value=4),
)
def test_complex_power_array_matches_scalar(v, e):
    vec = complex_power_array(np.array([v]), e)[0]
    assert vec == pytest.approx(complex_power(v, e), rel=1e-12, abs=1e-300)


@given(
    st.complex_numbers(min_magnitude=1e-2, max_magnitude=1e2, allow_nan=False, allow_infinity=False),
    st.floats(min_value=-3, max_value=3),
)
def test_complex_power_agrees_with_cmath_off_the_cut(v, e):
    if v.real < 0 and abs(v.imag) < 1e-9:
        return
    assert complex_power(v, e) == pytest.approx(cmath.exp(e * cmath.log(v)), rel=1e-10)


@given(tube_points())
def test_rho_pair_diagonal_consistency(z):
    d = rho_pair(z, z)
    assert abs(d - rho(z)) <= 1e-12 * (1 + rho(z))


@given(st.data())
def test_rho_pair_conjugate_symmetry(data):
    n = data.draw(st.integers(min_value=1, max_value=3))
    z, u = data.draw(tube_points(n)), data.draw(tube_points(n))
    assert rho_pair(u, z) == pytest.approx(rho_pair(z, u).conjugate(), rel=1e-12, abs=1e-12)


@given(st.data())
def test_rho_pair_lower_bound(data):
    n = data.draw(st.integers(min_value=1, max_value=3))
    z, w = data.draw(tube_points(n)), data.draw(tube_points(n))
    value = rho_pair(z, w)
    assert value.real > 0
    assert 2 * abs(value) >= max(rho(z), rho(w)) * (1 - 1e-12)


@given(st.data())
def test_rho_pair_array_matches_scalar(data):
    n = data.draw(st.integers(min_value=1, max_value=3))
    z, u = data.draw(tube_points(n)), data.draw(tube_points(n))
    x, y = (np.array([v]) for v in z.as_arrays())
    assert rho_pair_array(x, y, u)[0] == pytest.approx(rho_pair(z, u), rel=1e-11, abs=1e-11)
    assert rho_pair_array(x, y, u, reverse=True)[0] == pytest.approx(rho_pair(u, z), rel=1e-11, abs=1e-11)


def test_sample_points_contract():
    pts = sample_points(1, 3, seed=0)
    assert len(set(pts)) == 3
    assert all(rho(p) > 0 for p in pts)


def test_sample_points_deterministic():
    assert sample_points(2, 50, seed=3) == sample_points(2, 50, seed=3)
    assert sample_points(2, 50, seed=3) != sample_points(2, 50, seed=4)


def test_sample_points_membership_n2():
    for p in sample_points(2, 100, seed=7, scale=10):
        assert p.y[1] > p.y[0] ** 2


def test_sample_points_cover_strata():
    heights = sorted(rho(p) for p in sample_points(1, 30, seed=1))
    assert heights[0] < 1e-2 and heights[-1] > 10


def test_as_points_accepts_complex():
    assert as_points([1j, TubePoint.from_complex(2j)]) == [TubePoint.from_complex(1j), TubePoint.from_complex(2j)]


@given(
    st.floats(min_value=1e-3, max_value=1e3),
    st.floats(min_value=-1.5, max_value=1.5),
    st.floats(min_value=-4.0, max_value=4.0),
    st.floats(min_value=-4.0, max_value=4.0),
)
def test_complex_power_adds_exponents_off_the_cut(modulus, arg, a, b):
    v = modulus * cmath.exp(1j * arg)
    assert complex_power(v, a) * complex_power(v, b) == pytest.approx(complex_power(v, a + b), rel=1e-10)
