"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import math
import random
from fractions import Fraction
from math import lcm

import pytest

from pcfkit import catalog
from pcfkit.decomposition import combine_manifest
from pcfkit.monodromy import polynomial_recursion
from pcfkit.recursion import change_connecting_paths, compose, relabel_sheets


# -- exact characteristic polynomials -----------------------------------------


def char_poly(M) -> list[Fraction]:
    """Coefficients of det(xI - M), leading first (Faddeev-LeVerrier over Q)."""
    n = len(M)
    A = [[Fraction(x) for x in row] for row in M]
    coeffs = [Fraction(1)]
    Mk = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        # Mk = A (M_{k-1} + c_{k-1} I)
        prev = [[Mk[i][j] + (coeffs[-1] if i == j else 0) for j in range(n)] for i in range(n)]
        Mk = [[sum(A[i][t] * prev[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        coeffs.append(-sum(Mk[i][i] for i in range(n)) / k)
    return coeffs


def poly_eval(coeffs, x: Fraction) -> Fraction:
    out = Fraction(0)
    for c in coeffs:
        out = out * x + c
    return out


def largest_real_root_bracketed(coeffs, lo: Fraction, hi: Fraction) -> bool:
    """Sign change of the char poly on [lo, hi] and no sign change above ``hi``.

    A monic polynomial is positive beyond its largest real root; a sign change on
    [lo, hi] (or a root at an endpoint) then places that root inside.
    """
    plo, phi = poly_eval(coeffs, lo), poly_eval(coeffs, hi)
    if plo == 0 or phi == 0:
        return True
    if plo * phi > 0:
        return False
    # Cauchy bound: every root has modulus below 1 + max |c_i|
    bound = 1 + max(abs(c) for c in coeffs[1:])
    xs = [hi + (bound - hi) * Fraction(k, 64) for k in range(1, 65)]
    return all(poly_eval(coeffs, x) > 0 for x in xs)


# -- brute-force orbifold weights ---------------------------------------------


def brute_force_weights(port, depth: int | None = None) -> dict:
    """N(x) as the lcm of degrees of all iterates landing on ``x``.

    Chains start at a marked point, or at an unmarked critical point mapping into
    the marked set.  A value still growing at the largest depth is reported as inf.
    """
    labels = port.source.punctures
    n = len(labels)
    depth = depth or 4 * n

    def up_to(k):
        N = {x: 1 for x in labels}
        # cur[y] = (f^m(y), degree of f^m at y)
        cur = {y: (y, 1) for y in labels}
        for target, deg in port.unmarked_critical:
            N[target] = lcm(N[target], deg)
        extra = [(target, deg) for target, deg in port.unmarked_critical]
        for _ in range(k):
            cur = {y: (port.image[z], d * port.local_degree[z]) for y, (z, d) in cur.items()}
            for y, (z, d) in cur.items():
                N[z] = lcm(N[z], d)
            nxt = []
            for z, d in extra:
                z2 = port.image[z]
                d2 = d * port.local_degree[z]
                N[z2] = lcm(N[z2], d2)
                nxt.append((z2, d2))
            extra = nxt
        return N

    a, b = up_to(depth), up_to(2 * depth)
    return {x: (a[x] if a[x] == b[x] else math.inf) for x in labels}


def brute_force_chi(weights: dict) -> Fraction:
    total = Fraction(2)
    for v in weights.values():
        total -= 1 if v == math.inf else 1 - Fraction(1, v)
    return total


# -- recursion pool -----------------------------------------------------------


def _pool():
    out = {k: catalog.load_recursion(k) for k in ("z2_plus_i", "basilica", "rabbit")}
    out["quintic"] = polynomial_recursion([1, 0, 0, 0, 0, 0], {"0": 0, "1": 1})
    out["basilica^2"] = compose(out["basilica"], out["basilica"])
    for name in manifest_names():
        out[name] = combine_manifest(catalog.load(name)).recursion
    return {k: r for k, r in out.items() if r.degree <= 5 and r.target.n <= 6}


@pytest.fixture(scope="session")
def recursion_pool():
    return _pool()


def random_word(rng: random.Random, n: int, length: int) -> tuple[int, ...]:
    return tuple(rng.choice([1, -1]) * rng.randint(1, n) for _ in range(length))


def randomized(r, rng: random.Random, path_len: int = 3):
    """Same map after random sheet relabeling and random connecting paths."""
    sigma = list(range(r.degree))
    rng.shuffle(sigma)
    q = relabel_sheets(r, sigma)
    paths = [random_word(rng, q.source.n, rng.randint(0, path_len)) for _ in range(q.degree)]
    return change_connecting_paths(q, paths)


def manifest_names() -> list[str]:
    names = catalog.fixture_names()
    return [n for n in names if f"{n}.tree" in names]
