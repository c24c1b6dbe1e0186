"""Numeric pullback iteration for quadratic spiders and matings.

Configurations are labeled points on the Riemann sphere (``complex("inf")`` for
infinity).  One pullback step replaces each point by the square-root preimage of
its image point, picking the root nearest the point's previous position.
Curves are tracked as bipartitions of the labels; their lengths are estimated
from the widest round annulus separating the two clusters.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

INF = complex(math.inf, 0)
COLLISION_TOL = 1e-13
BRANCH_TOL = 1e-12
# smallest relative point separation at which a settled run counts as converged
SEPARATION_FLOOR = 1e-6


class DomainError(ValueError):
    pass


class DegenerateConfiguration(ValueError):
    pass


class BranchAmbiguity(RuntimeError):
    pass


def is_inf(z: complex) -> bool:
    return math.isinf(z.real) or math.isinf(z.imag)


# -- collar geometry -----------------------------------------------------------


def collar_width(x: float) -> float:
    """Half-width of the standard collar about a closed geodesic of length ``x``."""
    if not x > 0:
        raise DomainError(f"geodesic length must be positive, got {x}")
    return math.asinh(1.0 / math.sinh(x / 2.0))


def full_collar_width(x: float) -> float:
    """Width of the whole collar, both sides of the geodesic; an involution of (0, inf)."""
    return 2.0 * collar_width(x)


# s(x) = x means sinh(x) sinh(x/2) = 1, i.e. 4v^3 + 4v^2 = 1 with v = sinh(x/2)^2
_V = max(r.real for r in np.roots([4.0, 4.0, 0.0, -1.0]) if abs(r.imag) < 1e-12)
COLLAR_FIXED_POINT = 2.0 * math.asinh(math.sqrt(_V))
FULL_COLLAR_FIXED_POINT = 2.0 * math.asinh(1.0)


def cusp_collar_area(delta: float) -> float:
    """Area of the horoball neighbourhood ``{Im z > delta}`` modulo ``z -> z + 2``."""
    if not delta > 0:
        raise DomainError("cusp parameter must be positive")
    return 2.0 / delta


def cusp_collar_boundary_length(delta: float) -> float:
    if not delta > 0:
        raise DomainError("cusp parameter must be positive")
    return 2.0 / delta


# -- length proxy --------------------------------------------------------------


def _ratio(center: complex, inner: np.ndarray, outer: np.ndarray) -> float:
    r1 = np.max(np.abs(inner - center))
    r2 = np.min(np.abs(outer - center)) if len(outer) else math.inf
    return r2 / r1


def _best_ratio(inner: Sequence[complex], outer: Sequence[complex]) -> float:
    """Largest outer/inner radius ratio of a round annulus around ``inner``."""
    inner = np.array(inner, dtype=complex)
    outer = np.array(outer, dtype=complex)
    if not len(outer):
        return math.inf
    # a frame fixed by the inner cluster keeps the search invariant under similarities
    c0 = inner.mean()
    far = int(np.argmax(np.abs(inner - c0)))
    unit = inner[far] - c0
    if abs(unit) == 0:
        unit = 1.0
    u = (inner - c0) / unit
    v = (outer - c0) / unit

    def f(p):
        return -math.log(max(_ratio(complex(p[0], p[1]), u, v), 1e-300))

    starts = [0j] + list(u)
    best = min(starts, key=lambda z: f((z.real, z.imag)))
    res = minimize(f, [best.real, best.imag], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 400})
    return max(math.exp(-res.fun), math.exp(-f((best.real, best.imag))))


def length_proxy(points: Mapping[str, complex], side: Iterable[str], tol: float = COLLISION_TOL) -> float:
    """Length estimate ``pi / m`` for the curve splitting ``side`` from the other labels.

    ``m = log(1 + R2/R1) / (2 pi)`` for the widest annulus of radii ``R1 < R2``
    about one finite cluster.  For well separated clusters this is the round
    annulus modulus; it stays finite when no round annulus separates them.
    """
    side = set(side)
    labels = list(points)
    other = [p for p in labels if p not in side]
    if len(side) < 2 or len(other) < 2 or not side <= set(labels):
        raise ValueError("each side of a bipartition needs at least two points")
    pts = [points[p] for p in labels]
    finite = [z for z in pts if not is_inf(z)]
    for a, b in itertools.combinations(finite, 2):
        if abs(a - b) <= tol * max(1.0, abs(a), abs(b)):
            raise DegenerateConfiguration("two points coincide")
    if len(finite) < len(pts) - 1:
        raise DegenerateConfiguration("two points at infinity")
    A = [points[p] for p in side]
    B = [points[p] for p in other]
    options = []
    for inner, outer in ((A, B), (B, A)):
        if any(is_inf(z) for z in inner):
            continue
        options.append(_best_ratio(inner, [z for z in outer if not is_inf(z)]))
    rho = max(options)
    return 2 * math.pi**2 / math.log1p(rho)


def bipartitions(labels: Sequence[str]) -> list[tuple[str, ...]]:
    """One side of every split of ``labels`` into two parts of size >= 2.

    The side not containing the last label is returned, so each curve appears once.
    """
    labels = list(labels)
    rest = labels[:-1]
    out = []
    for k in range(2, len(labels) - 1):
        for side in itertools.combinations(rest, k):
            out.append(tuple(side))
    return out


def class_name(side: Sequence[str]) -> str:
    return "{" + ",".join(side) + "}"


# -- configurations ------------------------------------------------------------


def angle_orbit(theta: Fraction) -> tuple[list[Fraction], list[int]]:
    """Orbit of ``theta`` under doubling, with successor indices."""
    theta = Fraction(theta) % 1
    orbit = [theta]
    while True:
        nxt = (2 * orbit[-1]) % 1
        if nxt in orbit:
            succ = list(range(1, len(orbit))) + [orbit.index(nxt)]
            return orbit, succ
        orbit.append(nxt)


@dataclass(frozen=True)
class SpiderConfiguration:
    """Labeled points with their images, the critical value label and branch references.

    ``legs`` holds the previous position of every point; the square root nearest
    to it is taken at the next step.
    """

    labels: tuple[str, ...]
    points: tuple[complex, ...]
    images: tuple[int, ...]
    critical_value: int
    legs: tuple[complex, ...]
    kind: str = "spider"
    # mating only: index of the second critical value
    critical_value_2: int | None = None
    angle: tuple[Fraction, ...] = ()

    def point(self, label: str) -> complex:
        return self.points[self.labels.index(label)]

    def as_dict(self) -> dict[str, complex]:
        return dict(zip(self.labels, self.points))

    def distance(self, other: "SpiderConfiguration") -> float:
        d = 0.0
        for a, b in zip(self.points, other.points):
            if is_inf(a) or is_inf(b):
                if is_inf(a) != is_inf(b):
                    return math.inf
                continue
            d = max(d, abs(a - b))
        return d

    def separation(self) -> float:
        """Smallest relative distance between two finite points (chordal-style for large points)."""
        fin = [z for z in self.points if not is_inf(z)]
        out = math.inf
        for a, b in itertools.combinations(fin, 2):
            out = min(out, abs(a - b) / max(1.0, abs(a), abs(b)))
        if len(fin) < len(self.points):
            out = min([out] + [1.0 / abs(a) for a in fin if abs(a) > 1])
        return out

    def collision(self, tol: float = COLLISION_TOL) -> tuple[str, str] | None:
        fin = [(p, z) for p, z in zip(self.labels, self.points) if not is_inf(z)]
        infs = [p for p, z in zip(self.labels, self.points) if is_inf(z)]
        for (p, a), (q, b) in itertools.combinations(fin, 2):
            if abs(a - b) <= tol * max(1.0, abs(a), abs(b)):
                return (p, q)
        for p, a in fin:
            if infs and abs(a) * tol > 1:
                return (p, infs[0])
        return None


def _root(value: complex, ref: complex) -> complex:
    if is_inf(value):
        return INF
    if value == 0:
        return 0j
    r = cmath.sqrt(value)
    if is_inf(ref):
        raise BranchAmbiguity("finite point has no finite reference position")
    d1, d2 = abs(r - ref), abs(-r - ref)
    if abs(d1 - d2) <= BRANCH_TOL * max(1.0, abs(r)):
        raise BranchAmbiguity(f"both square roots of {value:.6g} are equidistant from {ref:.6g}")
    return r if d1 < d2 else -r


def spider_start(theta: Fraction, rng: np.random.Generator | None = None) -> SpiderConfiguration:
    """Feet near ``r e^{2 pi i theta_k}``; with ``rng`` the radii and angles are jittered."""
    orbit, succ = angle_orbit(theta)
    pts = []
    for t in orbit:
        if rng is None:
            r, dt = 2.0, 0.0
        else:
            r, dt = rng.uniform(1.0, 3.0), rng.uniform(-0.05, 0.05)
        pts.append(r * cmath.exp(2j * math.pi * (float(t) + dt)))
    labels = [f"t{k}" for k in range(len(orbit))]
    images = list(succ)
    # periodic angles carry the critical point in the orbit; otherwise mark it
    periodic = succ[-1] == 0
    if periodic:
        pts[-1] = 0j
    else:
        labels.append("0")
        pts.append(0j)
        images.append(0)
    labels.append("inf")
    pts.append(INF)
    images.append(len(labels) - 1)
    return SpiderConfiguration(tuple(labels), tuple(pts), tuple(images), 0, tuple(pts), "spider", None, (Fraction(theta),))


def spider_step(cfg: SpiderConfiguration) -> SpiderConfiguration:
    c = cfg.points[cfg.critical_value]
    new = []
    for k, z in enumerate(cfg.points):
        w = cfg.points[cfg.images[k]]
        new.append(_root(w - c if not is_inf(w) else INF, z))
    return replace(cfg, points=tuple(new), legs=cfg.points)


def mating_start(theta1: Fraction, theta2: Fraction, rho: float = 0.5) -> SpiderConfiguration:
    """Formal mating: first factor inside the unit circle, second outside with angles negated.

    Critical points sit at 0 and infinity, the first critical value at 1.
    """
    labels, pts, images = [], [], []
    cvs = []
    for name, theta, place in (("a", theta1, lambda t: rho * cmath.exp(2j * math.pi * t)),
                               ("b", theta2, lambda t: cmath.exp(-2j * math.pi * t) / rho)):
        orbit, succ = angle_orbit(theta)
        base = len(labels)
        periodic = succ[-1] == 0
        crit = 0j if name == "a" else INF
        if theta == 0:
            # the critical point is its own critical value
            labels.append(f"{name}0")
            pts.append(crit)
            images.append(base)
            cvs.append(base)
            continue
        for k, t in enumerate(orbit):
            labels.append(f"{name}{k}")
            pts.append(crit if periodic and k == len(orbit) - 1 else place(float(t)))
            images.append(base + succ[k])
        if not periodic:
            labels.append(f"{name}c")
            pts.append(crit)
            images.append(base)
        cvs.append(base)
    scale = pts[cvs[0]]
    pts = [z if is_inf(z) else z / scale for z in pts]
    return SpiderConfiguration(
        tuple(labels), tuple(pts), tuple(images), cvs[0], tuple(pts), "mating", cvs[1], (Fraction(theta1), Fraction(theta2))
    )


def mating_step(cfg: SpiderConfiguration) -> SpiderConfiguration:
    """Pull back through the quadratic rational map with critical points 0 and infinity."""
    wa = cfg.points[cfg.critical_value]
    wb = cfg.points[cfg.critical_value_2]

    def mob(w: complex) -> complex:
        if is_inf(wb):
            return INF if is_inf(w) else w - wa
        if is_inf(w):
            return 1 + 0j
        if w == wb:
            return INF
        return (w - wa) / (w - wb)

    vals = [mob(cfg.points[cfg.images[k]]) for k in range(len(cfg.points))]
    v0 = vals[cfg.critical_value]
    if v0 == 0 or is_inf(v0):
        raise DegenerateConfiguration("critical value collided with a critical point")
    # dividing by v0 puts the first critical value at 1, the gauge of the references
    pts = tuple(_root(v if is_inf(v) else v / v0, z) for v, z in zip(vals, cfg.points))
    return replace(cfg, points=pts, legs=cfg.points)


# -- iteration state and classification ---------------------------------------


@dataclass
class PullbackIterationState:
    history: list[SpiderConfiguration]
    tracked: list[tuple[str, ...]]
    proxies: dict[str, list[float]] = field(default_factory=dict)
    status: str = "Running"
    collision: tuple[str, str] | None = None
    note: str | None = None

    @classmethod
    def start(cls, cfg: SpiderConfiguration, tracked: Iterable[Sequence[str]] | None = None) -> "PullbackIterationState":
        tracked = [tuple(s) for s in (bipartitions(cfg.labels) if tracked is None else tracked)]
        st = cls([cfg], tracked, {class_name(s): [] for s in tracked})
        st._record(cfg)
        return st

    @property
    def current(self) -> SpiderConfiguration:
        return self.history[-1]

    @property
    def steps(self) -> int:
        return len(self.history) - 1

    def _record(self, cfg: SpiderConfiguration) -> None:
        pts = cfg.as_dict()
        for s in self.tracked:
            self.proxies[class_name(s)].append(length_proxy(pts, s))

    def advance(self, n: int = 1) -> "PullbackIterationState":
        step = mating_step if self.current.kind == "mating" else spider_step
        for _ in range(n):
            if self.status != "Running":
                break
            try:
                cfg = step(self.current)
            except BranchAmbiguity as exc:
                self.status, self.note = "Indeterminate", str(exc)
                break
            except DegenerateConfiguration as exc:
                self.status, self.note = "Degenerate", str(exc)
                break
            self.history.append(cfg)
            pair = cfg.collision()
            if pair is not None:
                self.status, self.collision = "Degenerate", pair
                self.note = f"points {pair[0]} and {pair[1]} collided"
                break
            self._record(cfg)
        return self


@dataclass(frozen=True)
class Classification:
    kind: str
    shrinking: tuple[str, ...] = ()
    floor: float | None = None
    estimate: complex | None = None
    steps: int = 0
    reason: str | None = None

    def to_dict(self) -> dict:
        d = {"status": self.kind, "steps": self.steps, "shrinking": list(self.shrinking)}
        d["floor"] = None if self.floor is None or math.isinf(self.floor) else self.floor
        if self.estimate is not None:
            d["c"] = [self.estimate.real, self.estimate.imag]
        if self.reason:
            d["reason"] = self.reason
        return d


def _monotone_decreasing(seq: Sequence[float]) -> bool:
    return len(seq) >= 2 and all(b < a for a, b in zip(seq, seq[1:]))


def classify_sequences(
    proxies: Mapping[str, Sequence[float]],
    distances: Sequence[float],
    window: int = 20,
    threshold: float = 1e-3,
    tol: float = 1e-10,
    collided: Iterable[str] = (),
    separated: bool = True,
) -> Classification:
    """Classification from proxy histories and successive configuration distances.

    ``collided`` names classes already known to pinch (from a point collision).
    """
    steps = len(distances)
    collided = tuple(collided)
    shrinking = set(collided)
    for name, seq in proxies.items():
        tail = list(seq[-(window + 1) :])
        if len(seq) > window and tail[-1] < threshold and _monotone_decreasing(tail):
            shrinking.add(name)
    floor = None
    rest = [min(seq) for name, seq in proxies.items() if name not in shrinking and len(seq)]
    if rest:
        floor = min(rest)
    if shrinking:
        return Classification("Degenerate", tuple(sorted(shrinking)), floor, None, steps)
    if steps >= 1 and distances[-1] <= tol and separated:
        return Classification("Converged", (), floor, None, steps)
    reason = "not enough steps" if steps < window else "no convergence or pinching detected"
    return Classification("Indeterminate", (), floor, None, steps, reason)


def classify_iteration(
    state: PullbackIterationState, window: int = 20, threshold: float = 1e-3, tol: float = 1e-10
) -> Classification:
    dists = [b.distance(a) for a, b in zip(state.history, state.history[1:])]
    collided = []
    if state.collision is not None:
        p, q = state.collision
        for s in state.tracked:
            inside = set(s)
            # the pinching curve keeps both colliding points on one side
            if (p in inside) == (q in inside):
                seq = state.proxies[class_name(s)]
                if _monotone_decreasing(seq[-(window + 1) :]):
                    collided.append(class_name(s))
        if not collided:
            collided.append(class_name(sorted(state.collision)))
    elif state.status == "Degenerate":
        collided.append("unresolved")
    sep = state.current.separation() > SEPARATION_FLOOR
    out = classify_sequences(state.proxies, dists, window, threshold, tol, collided, sep)
    if state.status == "Indeterminate":
        out = Classification("Indeterminate", (), out.floor, None, state.steps, state.note)
    if out.kind == "Converged" and state.current.kind == "spider":
        out = replace(out, estimate=state.current.points[state.current.critical_value])
    if out.kind == "Degenerate" and state.note:
        out = replace(out, reason=state.note)
    return out


def iterate(state: PullbackIterationState, steps: int, tol: float = 1e-10) -> PullbackIterationState:
    """Advance until the configuration settles, degenerates, or ``steps`` are used.

    Settling only counts while the points stay apart: a run creeping towards a
    collision also takes ever smaller steps.
    """
    for _ in range(steps):
        state.advance()
        if state.status != "Running":
            break
        cur = state.history[-1]
        if cur.distance(state.history[-2]) <= tol and cur.separation() > SEPARATION_FLOOR:
            state.status = "Converged"
            break
    return state


def run_spider(
    theta: Fraction,
    steps: int = 200,
    rng: np.random.Generator | None = None,
    tracked: Iterable[Sequence[str]] | None = (),
    tol: float = 1e-10,
) -> tuple[PullbackIterationState, Classification]:
    """Spider run from a (possibly jittered) start; tracking is off by default for speed."""
    st = iterate(PullbackIterationState.start(spider_start(theta, rng), tracked), steps, tol)
    return st, classify_iteration(st, tol=tol)


def run_mating(
    theta1: Fraction,
    theta2: Fraction,
    steps: int = 100,
    tracked: Iterable[Sequence[str]] | None = None,
    window: int = 20,
    tol: float = 1e-10,
) -> tuple[PullbackIterationState, Classification]:
    st = iterate(PullbackIterationState.start(mating_start(theta1, theta2), tracked), steps, tol)
    return st, classify_iteration(st, window=window, tol=tol)


def critical_orbit_defect(theta: Fraction, c: complex) -> float:
    """``|f^(m+p)(0) - f^m(0)|`` for ``f = z^2 + c`` and the orbit shape of ``theta``."""
    orbit, succ = angle_orbit(theta)
    pre = succ[-1]  # index of the first periodic angle
    m, p = pre + 1, len(orbit) - pre
    z, seq = 0j, [0j]
    for _ in range(m + p):
        z = z * z + c
        seq.append(z)
    return abs(seq[m + p] - seq[m])
