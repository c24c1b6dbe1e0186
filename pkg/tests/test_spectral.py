from fractions import Fraction

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from conftest import char_poly, largest_real_root_bracketed
from pcfkit.spectral import leading_eigenvalue, spectral_radius_below_one

entries = st.fractions(min_value=0, max_value=3, max_denominator=6)


@st.composite
def nonneg_matrices(draw, max_n=4):
    n = draw(st.integers(1, max_n))
    return [[draw(entries) for _ in range(n)] for _ in range(n)]


TOL = Fraction(1, 10**8)


@settings(max_examples=60, deadline=None)
@given(nonneg_matrices())
def test_enclosure_contains_spectral_radius(M):
    lo, hi = leading_eigenvalue(M, TOL)
    assert 0 <= lo <= hi and hi - lo <= TOL
    rho = max(abs(np.linalg.eigvals(np.array(M, dtype=float))))
    assert float(lo) - 1e-9 <= rho <= float(hi) + 1e-9


@settings(max_examples=40, deadline=None)
@given(nonneg_matrices(max_n=3))
def test_enclosure_brackets_char_poly_root(M):
    lo, hi = leading_eigenvalue(M, TOL)
    if hi == 0:
        return
    assert largest_real_root_bracketed(char_poly(M), lo, hi)


@settings(max_examples=40, deadline=None)
@given(nonneg_matrices(max_n=3), st.fractions(min_value=Fraction(1, 4), max_value=4, max_denominator=5))
def test_scale_equivariance(M, t):
    lo, hi = leading_eigenvalue(M, TOL)
    tlo, thi = leading_eigenvalue([[t * x for x in row] for row in M], t * TOL)
    # both enclosures hold t * rho, so they overlap after scaling
    assert max(t * lo, tlo) <= min(t * hi, thi)
    assert thi - tlo <= t * TOL


def test_exact_values():
    assert leading_eigenvalue([[1]]) == (1, 1)
    assert leading_eigenvalue([[0, 1], [1, 0]]) == (1, 1)
    assert leading_eigenvalue([[0, 0], [0, 0]]) == (0, 0)


def test_reducible_matrix_takes_block_maximum():
    M = [[Fraction(1, 2), 5], [0, Fraction(1, 3)]]
    lo, hi = leading_eigenvalue(M, TOL)
    assert lo <= Fraction(1, 2) <= hi


def test_spectral_radius_below_one():
    assert spectral_radius_below_one([[Fraction(1, 2), Fraction(1, 3)], [0, Fraction(1, 2)]])
    assert not spectral_radius_below_one([[1]])
    assert not spectral_radius_below_one([[0, 2], [Fraction(1, 2), 0]])


def test_rejects_negative_entries():
    with pytest.raises(ValueError):
        leading_eigenvalue([[-1]])
