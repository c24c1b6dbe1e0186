"""Numerical wreath recursions of complex polynomials.

Used to build the fixture corpus from explicit maps such as ``z**2 + 1j``.  Loops
are read as words by counting signed crossings with a system of cuts: the cut of
a marked point ``q`` is the ray from ``q`` pointing away from the basepoint.
Lifted paths are followed by Newton continuation with adaptive subdivision.
"""

from __future__ import annotations

import cmath
import math
from typing import Mapping, Sequence

import numpy as np

from .recursion import BranchedCoverRecursion
from .words import MarkedSphere, normal_form


class MonodromyError(RuntimeError):
    pass


class CutSystem:
    def __init__(self, points: Sequence[complex], basepoint: complex):
        self.points = [complex(q) for q in points]
        self.base = complex(basepoint)
        self.dirs = []
        for q in self.points:
            v = q - self.base
            if abs(v) < 1e-12:
                raise MonodromyError("basepoint coincides with a marked point")
            self.dirs.append(v / abs(v))

    def crossings(self, path: np.ndarray) -> list[int]:
        """Signed cut crossings (1-based point index) along a polyline, in order."""
        A = path[:-1]
        D = path[1:] - path[:-1]
        events = []
        for k, (q, u) in enumerate(zip(self.points, self.dirs), start=1):
            den = (np.conj(u) * D).imag
            rel = A - q
            with np.errstate(divide="ignore", invalid="ignore"):
                s = (np.conj(rel) * u).imag / den
                t = (np.conj(rel) * D).imag / den
            hit = np.nonzero((np.abs(den) > 0) & (s >= 0) & (s < 1) & (t > 0))[0]
            for idx in hit:
                events.append((idx + s[idx], k if den[idx] > 0 else -k))
        events.sort()
        return [e[1] for e in events]

    def big_loop_order(self, radius: float) -> list[int]:
        """Cut indices met by the counterclockwise circle through the basepoint."""
        phi0 = cmath.phase(self.base)
        ts = np.linspace(0.0, 2 * math.pi, 4001)
        circle = radius * np.exp(1j * (phi0 + ts))
        word = self.crossings(circle)
        if sorted(word) != list(range(1, len(self.points) + 1)):
            raise MonodromyError(f"big loop word {word} is not a product of all generators")
        return word


class Polynomial:
    def __init__(self, coeffs: Sequence[complex]):
        # highest degree first, numpy convention
        self.c = np.array(coeffs, dtype=complex)
        self.dc = np.polyder(self.c)
        self.degree = len(self.c) - 1

    def __call__(self, z):
        return np.polyval(self.c, z)

    def deriv(self, z):
        return np.polyval(self.dc, z)

    def preimages(self, w: complex) -> np.ndarray:
        c = self.c.copy()
        c[-1] -= w
        roots = np.roots(c)
        return np.array(sorted(roots, key=lambda z: (round(cmath.phase(z), 9), abs(z))))

    def critical_values(self) -> list[complex]:
        return [complex(self(z)) for z in np.roots(self.dc)]

    def lift_path(self, w_path: np.ndarray, z0: complex) -> np.ndarray:
        out = [complex(z0)]
        z = complex(z0)
        for wa, wb in zip(w_path[:-1], w_path[1:]):
            z = self._lift_segment(complex(wa), complex(wb), z, out, depth=0)
        return np.array(out)

    def _lift_segment(self, wa, wb, z, out, depth):
        dp = self.deriv(z)
        if abs(dp) < 1e-14 or depth > 40:
            raise MonodromyError("path passes through a critical point")
        guess = z + (wb - wa) / dp
        zn = guess
        for _ in range(30):
            step = (self(zn) - wb) / self.deriv(zn)
            zn -= step
            if abs(step) < 1e-15 * max(1.0, abs(zn)):
                break
        ok = abs(self(zn) - wb) < 1e-9 * max(1.0, abs(wb)) and abs(zn - guess) <= 0.05 * abs(guess - z) + 1e-13
        if not ok:
            wm = 0.5 * (wa + wb)
            zm = self._lift_segment(wa, wm, z, out, depth + 1)
            return self._lift_segment(wm, wb, zm, out, depth + 1)
        out.append(zn)
        return zn


def _segment(a: complex, b: complex, h: float) -> np.ndarray:
    k = max(2, int(math.ceil(abs(b - a) / h)) + 1)
    return a + (b - a) * np.linspace(0.0, 1.0, k)


def _loop_around(base: complex, q: complex, eps: float, h: float) -> np.ndarray:
    u = (base - q) / abs(base - q)
    start = q + eps * u
    phi0 = cmath.phase(u)
    k = max(64, int(2 * math.pi * eps / h))
    circle = q + eps * np.exp(1j * (phi0 + np.linspace(0.0, 2 * math.pi, k)))
    return np.concatenate([_segment(base, start, h), circle[1:], _segment(start, base, h)[1:]])


def _dist_point_segment(p: complex, a: complex, b: complex) -> float:
    d = b - a
    t = max(0.0, min(1.0, ((p - a).conjugate() * d).real / abs(d) ** 2))
    return abs(p - (a + t * d))


def polynomial_recursion(
    coeffs: Sequence[complex],
    target_points: Mapping[str, complex],
    source_points: Mapping[str, complex] | None = None,
    basepoint: complex | None = None,
    infinity: str = "inf",
    eps: float | None = None,
) -> BranchedCoverRecursion:
    """Compute the recursion of a polynomial on marked spheres.

    ``target_points``/``source_points`` map labels to finite marked points; the
    label ``infinity`` is appended to both spheres.  Finite punctures are ordered
    so that ``x_1...x_{n-1}`` is the counterclockwise loop around all of them
    through the basepoint, which makes ``x_1...x_n = 1`` hold literally.
    """
    p = Polynomial(coeffs)
    source_points = dict(source_points if source_points is not None else target_points)
    tlabels = list(target_points)
    slabels = list(source_points)
    tpts = [complex(target_points[k]) for k in tlabels]
    spts = [complex(source_points[k]) for k in slabels]
    for q in spts:
        if not any(abs(p(q) - t) < 1e-8 * max(1, abs(t)) for t in tpts):
            raise MonodromyError(f"source point {q} does not map to a target point")
    for v in p.critical_values():
        if not any(abs(v - t) < 1e-8 * max(1, abs(v)) for t in tpts):
            raise MonodromyError(f"critical value {v} is not marked")
    scale = max([abs(z) for z in tpts + spts] + [1.0])
    if basepoint is None:
        errors = []
        for k in range(24):
            try:
                return polynomial_recursion(
                    coeffs, target_points, source_points, 3.0 * scale * cmath.exp(1j * (0.3137 + 0.2618 * k)), infinity, eps
                )
            except MonodromyError as exc:
                errors.append(str(exc))
        raise MonodromyError(f"no usable basepoint found: {errors[-1]}")
    b = complex(basepoint)
    radius = abs(b)
    if radius <= 1.2 * scale:
        raise MonodromyError("basepoint must lie well outside all marked points")
    if eps is None:
        pairs = [abs(a - c) for i, a in enumerate(tpts) for c in tpts[i + 1 :]]
        eps = 0.2 * min(pairs + [1.0])
    h = eps / 8

    tcuts = CutSystem(tpts, b)
    scuts = CutSystem(spts, b)
    torder = tcuts.big_loop_order(radius)
    sorder = scuts.big_loop_order(radius)
    # letter maps from cut index to generator index in the new order
    smap = {k: pos for pos, k in enumerate(sorder, start=1)}

    for k, q in enumerate(tpts):
        for j, other in enumerate(tpts):
            if j != k and _dist_point_segment(other, b, q) < 2 * eps:
                raise MonodromyError("spoke passes too close to another marked point; move the basepoint")

    sheets = p.preimages(b)
    d = p.degree

    def sheet_of(z: complex) -> int:
        dists = np.abs(sheets - z)
        j = int(np.argmin(dists))
        if dists[j] > 1e-6 * max(1.0, abs(z)):
            raise MonodromyError("lifted path did not end on a sheet")
        return j

    def word_of(path: np.ndarray) -> tuple[int, ...]:
        raw = scuts.crossings(path)
        return tuple(smap[abs(a)] * (1 if a > 0 else -1) for a in raw)

    n_s = len(spts) + 1
    loops = [_loop_around(b, tpts[k - 1], eps, h) for k in torder]
    phi0 = cmath.phase(b)
    big_cw = radius * np.exp(1j * (phi0 - np.linspace(0.0, 2 * math.pi, int(2 * math.pi * radius / h) + 2)))
    loops.append(big_cw)

    for z in sheets:
        for q in spts:
            if _dist_point_segment(q, b, z) < 1e-3 * scale:
                raise MonodromyError("connecting path passes through a marked point; move the basepoint")

    perms = []
    lifts = []
    for loop in loops:
        perm = []
        row = []
        for s, z0 in enumerate(sheets):
            lifted = p.lift_path(loop, z0)
            e = sheet_of(lifted[-1])
            closed = np.concatenate([_segment(b, z0, h * 4), lifted[1:], _segment(sheets[e], b, h * 4)[1:]])
            perm.append(e)
            row.append(normal_form(word_of(closed), n_s))
        perms.append(tuple(perm))
        lifts.append(tuple(row))

    target = MarkedSphere(tuple(tlabels[k - 1] for k in torder) + (infinity,))
    source = MarkedSphere(tuple(slabels[k - 1] for k in sorder) + (infinity,))
    return BranchedCoverRecursion(d, source, target, tuple(perms), tuple(lifts))
