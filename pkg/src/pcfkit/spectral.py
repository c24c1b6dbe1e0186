"""Certified Perron-Frobenius eigenvalues of nonnegative rational matrices."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import networkx as nx
import numpy as np

Matrix = list[list[Fraction]]

DEFAULT_TOL = Fraction(1, 10**9)


def as_fraction_matrix(M: Sequence[Sequence]) -> Matrix:
    out = [[Fraction(x) for x in row] for row in M]
    n = len(out)
    if any(len(row) != n for row in out):
        raise ValueError("matrix must be square")
    if any(x < 0 for row in out for x in row):
        raise ValueError("matrix must be nonnegative")
    return out


def strongly_connected_blocks(M: Matrix) -> list[list[int]]:
    g = nx.DiGraph()
    g.add_nodes_from(range(len(M)))
    g.add_edges_from((i, j) for i, row in enumerate(M) for j, x in enumerate(row) if x)
    return sorted(sorted(c) for c in nx.strongly_connected_components(g))


def _matvec(A: Matrix, v: list[Fraction]) -> list[Fraction]:
    return [sum((a * x for a, x in zip(row, v)), Fraction(0)) for row in A]


def collatz_wielandt(A: Matrix, v: Sequence[Fraction]) -> tuple[Fraction, Fraction]:
    """``min`` and ``max`` of ``(Av)_i / v_i`` for a positive vector ``v``."""
    Av = _matvec(A, list(v))
    q = [a / x for a, x in zip(Av, v)]
    return min(q), max(q)


def _round(x: Fraction, bits: int) -> Fraction:
    scale = 1 << bits
    return Fraction(max(1, round(x * scale)), scale)


def _irreducible_enclosure(B: Matrix, tol: Fraction, max_rounds: int = 400) -> tuple[Fraction, Fraction]:
    n = len(B)
    m = max(x for row in B for x in row)
    # I + B/m is primitive when B is irreducible, so its power iteration converges
    A = [[(Fraction(1) if i == j else Fraction(0)) + B[i][j] / m for j in range(n)] for i in range(n)]
    target = tol / m
    Af = np.array([[float(x) for x in row] for row in A])
    w, V = np.linalg.eig(Af)
    vec = np.abs(V[:, int(np.argmax(w.real))].real)
    vec = vec / vec.max()
    v = [Fraction(float(max(x, 1e-300))) for x in vec]
    bits = 60
    for _ in range(max_rounds):
        lo, hi = collatz_wielandt(A, v)
        if hi - lo <= target:
            return m * (lo - 1), m * (hi - 1)
        bits += 16
        Av = _matvec(A, v)
        top = max(Av)
        v = [_round(x / top, bits) for x in Av]
    raise RuntimeError("eigenvalue enclosure did not reach the requested width")


def leading_eigenvalue(M: Sequence[Sequence], tol: Fraction | float = DEFAULT_TOL) -> tuple[Fraction, Fraction]:
    """Rational interval ``[lo, hi]`` of width at most ``tol`` around the spectral radius.

    Reducible matrices are split into strongly connected blocks; 1x1 blocks are
    exact.  Scaling ``M`` and ``tol`` by the same ``t > 0`` scales the result by ``t``.
    """
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = as_fraction_matrix(M)
    if not A:
        return Fraction(0), Fraction(0)
    lo = hi = Fraction(0)
    for block in strongly_connected_blocks(A):
        if len(block) == 1:
            i = block[0]
            blo = bhi = A[i][i]
        else:
            B = [[A[i][j] for j in block] for i in block]
            blo, bhi = _irreducible_enclosure(B, tol)
        lo, hi = max(lo, blo), max(hi, bhi)
    return lo, hi


def determinant(M: Matrix) -> Fraction:
    A = [row[:] for row in M]
    n = len(A)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det *= A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            if f:
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    return det


def spectral_radius_below_one(M: Sequence[Sequence]) -> bool:
    """Exact test of ``rho(M) < 1``: ``I - M`` is a nonsingular M-matrix.

    For a Z-matrix this holds iff every leading principal minor is positive.
    """
    A = as_fraction_matrix(M)
    n = len(A)
    Z = [[(Fraction(1) if i == j else Fraction(0)) - A[i][j] for j in range(n)] for i in range(n)]
    return all(determinant([row[:k] for row in Z[:k]]) > 0 for k in range(1, n + 1))
