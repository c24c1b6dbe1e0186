"""Curve classes, their pullbacks, transition matrices and obstruction search.

Isotopy classes of simple closed curves are handled as conjugacy classes of
words, up to inversion.  Simplicity is never decided: it is declared for seeds
and inherited by lifts.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .recursion import BranchedCoverRecursion, orbifold_signature, portrait
from .spectral import DEFAULT_TOL, leading_eigenvalue, spectral_radius_below_one
from .words import (
    MarkedSphere,
    Word,
    block_word,
    format_word,
    normal_form,
    parse_word,
    unoriented_key,
    word_key,
)


class Simplicity(enum.Enum):
    DECLARED_SIMPLE = "DeclaredSimple"
    LIFT_OF_SIMPLE = "LiftOfSimple"
    UNKNOWN = "Unknown"


class SphereMismatch(ValueError):
    pass


class NotStable(ValueError):
    pass


@dataclass(frozen=True)
class CurveClass:
    sphere: MarkedSphere
    key: Word
    simplicity: Simplicity = field(default=Simplicity.UNKNOWN, compare=False)

    @property
    def representative(self) -> Word:
        return self.key

    @property
    def is_trivial(self) -> bool:
        return not self.key

    def __str__(self) -> str:
        return format_word(self.key) or "1"

    def sort_key(self) -> tuple:
        return (len(self.key), word_key(self.key))


def normalize(word: Sequence[int] | str, sphere: MarkedSphere, simplicity: Simplicity = Simplicity.UNKNOWN) -> CurveClass:
    if isinstance(word, str):
        word = parse_word(word, sphere.n)
    return CurveClass(sphere, unoriented_key(normal_form(word, sphere.n)), simplicity)


@dataclass(frozen=True)
class Classification:
    kind: str  # "trivial" | "peripheral" | "essential"
    label: str | None = None

    def __str__(self) -> str:
        return f"peripheral({self.label})" if self.kind == "peripheral" else self.kind


def _peripheral_keys(sphere: MarkedSphere) -> dict[Word, str]:
    return {unoriented_key(sphere.generator(j)): sphere.punctures[j - 1] for j in range(1, sphere.n + 1)}


def classify(c: CurveClass) -> Classification:
    if c.is_trivial:
        return Classification("trivial")
    label = _peripheral_keys(c.sphere).get(c.key)
    if label is not None:
        return Classification("peripheral", label)
    return Classification("essential")


@dataclass(frozen=True)
class Certificate:
    kind: str  # "CertifiedByCoLift" | "AssertedByUser" | "Unverified"
    iterate: int | None = None

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.iterate is not None:
            d["iterate"] = self.iterate
        return d


UNVERIFIED = Certificate("Unverified")
ASSERTED = Certificate("AssertedByUser")


@dataclass(frozen=True)
class Multicurve:
    classes: tuple[CurveClass, ...]
    certificate: Certificate = UNVERIFIED

    def __post_init__(self):
        uniq = {c.key: c for c in self.classes}
        if len(uniq) != len(self.classes):
            raise ValueError("multicurve classes must be pairwise distinct")
        for c in self.classes:
            k = classify(c)
            if k.kind != "essential":
                raise ValueError(f"class {c} is {k}, not essential")
        object.__setattr__(self, "classes", tuple(sorted(self.classes, key=CurveClass.sort_key)))

    def keys(self) -> list[Word]:
        return [c.key for c in self.classes]

    def __len__(self) -> int:
        return len(self.classes)

    def to_dict(self) -> dict:
        return {"curves": [str(c) for c in self.classes], "certificate": self.certificate.to_dict()}

    @classmethod
    def from_dict(cls, d: dict, sphere: MarkedSphere) -> "Multicurve":
        cert = d.get("certificate", {"kind": "Unverified"})
        if isinstance(cert, str):
            cert = {"kind": cert}
        simp = Simplicity.DECLARED_SIMPLE if cert.get("kind") != "Unverified" else Simplicity.UNKNOWN
        classes = tuple(normalize(w, sphere, simp) for w in d["curves"])
        return cls(classes, Certificate(cert["kind"], cert.get("iterate")))


@dataclass(frozen=True)
class Component:
    curve: CurveClass
    degree: int
    classification: Classification
    sheets: tuple[int, ...]


@dataclass(frozen=True)
class PullbackResult:
    components: tuple[Component, ...]

    def essential(self) -> list[Component]:
        return [c for c in self.components if c.classification.kind == "essential"]

    def multiset(self) -> list[tuple[Word, int]]:
        return sorted((c.curve.key, c.degree) for c in self.components)


def pullback_class(r: BranchedCoverRecursion, c: CurveClass) -> PullbackResult:
    if c.sphere != r.target:
        raise SphereMismatch("curve does not live on the target sphere of the recursion")
    simp = Simplicity.LIFT_OF_SIMPLE if c.simplicity != Simplicity.UNKNOWN else Simplicity.UNKNOWN
    comps = []
    for cyc, w in r.word_cycles(c.key):
        cc = CurveClass(r.source, unoriented_key(w), simp)
        comps.append(Component(cc, len(cyc), classify(cc), cyc))
    return PullbackResult(tuple(comps))


def is_stable(r: BranchedCoverRecursion, gamma: Multicurve) -> tuple[bool, Component | None]:
    keys = set(gamma.keys())
    for c in gamma.classes:
        for comp in pullback_class(r, c).essential():
            if comp.curve.key not in keys:
                return False, comp
    return True, None


@dataclass(frozen=True)
class TransitionMatrix:
    index: Multicurve
    entries: tuple[tuple[Fraction, ...], ...]
    enclosure: tuple[Fraction, Fraction]

    def to_dict(self) -> dict:
        lo, hi = self.enclosure
        return {
            "index": [str(c) for c in self.index.classes],
            "entries": [[str(x) for x in row] for row in self.entries],
            "approx": [[float(x) for x in row] for row in self.entries],
            "lambda": {"lo": str(lo), "hi": str(hi)},
        }


def transition_entries(r: BranchedCoverRecursion, gamma: Multicurve) -> list[list[Fraction]]:
    idx = {k: i for i, k in enumerate(gamma.keys())}
    n = len(idx)
    M = [[Fraction(0)] * n for _ in range(n)]
    for j, delta in enumerate(gamma.classes):
        for comp in pullback_class(r, delta).components:
            i = idx.get(comp.curve.key)
            if i is not None:
                M[i][j] += Fraction(1, comp.degree)
    return M


def transition_matrix(r: BranchedCoverRecursion, gamma: Multicurve, tol=DEFAULT_TOL) -> TransitionMatrix:
    ok, witness = is_stable(r, gamma)
    if not ok:
        raise NotStable(f"multicurve is not stable: preimage {witness.curve} escapes")
    M = transition_entries(r, gamma)
    return TransitionMatrix(gamma, tuple(tuple(row) for row in M), leading_eigenvalue(M, tol))


@dataclass(frozen=True)
class Verdict:
    kind: str  # "Obstruction" | "NotObstruction" | "Indeterminate"
    enclosure: tuple[Fraction, Fraction]
    in_theorem_scope: bool = True
    disjointness_certified: bool = True

    def to_dict(self) -> dict:
        d = {
            "verdict": self.kind,
            "lambda": {"lo": str(self.enclosure[0]), "hi": str(self.enclosure[1])},
            "in_theorem_scope": self.in_theorem_scope,
        }
        if not self.disjointness_certified:
            d["note"] = "candidate obstruction (disjointness uncertified)"
        return d


def _theorem_scope(r: BranchedCoverRecursion) -> bool:
    if r.degree < 2 or not r.is_self_map:
        return False
    try:
        return orbifold_signature(portrait(r)).hyperbolic
    except ValueError:
        return False


def decide_obstruction(M: Sequence[Sequence[Fraction]], tol=DEFAULT_TOL) -> tuple[str, tuple[Fraction, Fraction]]:
    lo, hi = leading_eigenvalue(M, tol)
    if lo >= 1:
        return "Obstruction", (lo, hi)
    if hi < 1:
        return "NotObstruction", (lo, hi)
    if len(M) <= 6:
        return ("NotObstruction" if spectral_radius_below_one(M) else "Obstruction"), (lo, hi)
    return "Indeterminate", (lo, hi)


def is_obstruction(r: BranchedCoverRecursion, gamma: Multicurve, tol=DEFAULT_TOL) -> Verdict:
    tm = transition_matrix(r, gamma, tol)
    kind, enc = decide_obstruction(tm.entries, tol)
    return Verdict(kind, enc, _theorem_scope(r), gamma.certificate.kind != "Unverified")


# -- saturation and search ------------------------------------------------------


@dataclass
class SaturationResult:
    kind: str  # "InvariantCandidate" | "Exceeded"
    multicurve: Multicurve | None
    classes: list[CurveClass]
    iterations: int
    reason: str = ""

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "iterations": self.iterations, "classes": [str(c) for c in self.classes]}
        if self.multicurve is not None:
            d["multicurve"] = self.multicurve.to_dict()
        if self.reason:
            d["reason"] = self.reason
        return d


def _essential_seed(seed: Multicurve | Iterable[CurveClass]) -> list[CurveClass]:
    classes = seed.classes if isinstance(seed, Multicurve) else tuple(seed)
    return [c for c in classes if classify(c).kind == "essential"]


def pullback_levels(r: BranchedCoverRecursion, seed: Iterable[CurveClass], depth: int) -> list[set[Word]]:
    """Essential classes of the components of the k-th iterated preimage, k = 0..depth."""
    level = {c.key: c for c in seed}
    out = [set(level)]
    for _ in range(depth):
        nxt: dict[Word, CurveClass] = {}
        for c in level.values():
            for comp in pullback_class(r, c).essential():
                nxt.setdefault(comp.curve.key, comp.curve)
        level = nxt
        out.append(set(level))
    return out


def saturate(
    r: BranchedCoverRecursion, seed: Multicurve | Iterable[CurveClass], max_iter: int = 10, max_classes: int = 64
) -> SaturationResult:
    if not r.is_self_map:
        raise SphereMismatch("saturation needs a self-map")
    start = _essential_seed(seed)
    known: dict[Word, CurveClass] = {}
    for c in start:
        known.setdefault(c.key, c)
    if len(known) > max_classes:
        return SaturationResult("Exceeded", None, list(known.values()), 0, "max_classes")
    frontier = list(known.values())
    it = 0
    while frontier:
        if it >= max_iter:
            return SaturationResult("Exceeded", None, list(known.values()), it, "max_iter")
        it += 1
        new = []
        for c in frontier:
            for comp in pullback_class(r, c).essential():
                if comp.curve.key not in known:
                    known[comp.curve.key] = comp.curve
                    new.append(comp.curve)
        if len(known) > max_classes:
            return SaturationResult("Exceeded", None, list(known.values()), it, "max_classes")
        frontier = new
    closure = set(known)
    cert = UNVERIFIED
    for n, level in enumerate(pullback_levels(r, start, max(max_iter, 1))):
        if n >= 1 and closure <= level:
            cert = Certificate("CertifiedByCoLift", n)
            break
    mc = Multicurve(tuple(known.values()), cert)
    return SaturationResult("InvariantCandidate", mc, list(mc.classes), it)


def default_seeds(sphere: MarkedSphere) -> list[Multicurve]:
    """One single-curve multicurve per contiguous block of 2..n-2 punctures."""
    n = sphere.n
    seen: set[Word] = set()
    out = []
    for k in range(2, n - 1):
        for a in range(1, n - k + 2):
            c = normalize(block_word(a, a + k - 1), sphere, Simplicity.DECLARED_SIMPLE)
            if c.key in seen or classify(c).kind != "essential":
                continue
            seen.add(c.key)
            out.append(Multicurve((c,), ASSERTED))
    return out


@dataclass
class SearchResult:
    kind: str  # "Found" | "NoneFoundWithinBudget" | "Exceeded"
    multicurve: Multicurve | None
    verdict: Verdict | None
    report: list[dict]

    def to_dict(self) -> dict:
        d = {"result": self.kind, "seeds": self.report}
        if self.multicurve is not None:
            d["multicurve"] = self.multicurve.to_dict()
        if self.verdict is not None:
            d.update(self.verdict.to_dict())
        return d


def search_obstruction(
    r: BranchedCoverRecursion,
    seeds: Sequence[Multicurve] | None = None,
    max_iter: int = 10,
    max_classes: int = 64,
    tol=DEFAULT_TOL,
) -> SearchResult:
    """Saturate each seed and test the closure; stops at the first obstruction.

    The result is ``Exceeded`` when every seed ran out of budget.  Degree-one maps
    are homeomorphisms, so the search is skipped for them.
    """
    if seeds is None:
        seeds = default_seeds(r.target)
    if r.degree == 1:
        return SearchResult("NoneFoundWithinBudget", None, None, [{"skipped": "degree one"}])
    if max_classes < 1 or max_iter < 0:
        return SearchResult("Exceeded", None, None, [{"budget": "max_classes" if max_classes < 1 else "max_iter"}])
    report = []
    for seed in seeds:
        sat = saturate(r, seed, max_iter, max_classes)
        entry = {"seed": [str(c) for c in seed.classes], "saturation": sat.kind, "iterations": sat.iterations}
        if sat.kind == "Exceeded":
            entry["budget"] = sat.reason
            report.append(entry)
            continue
        gamma = sat.multicurve
        if not gamma.classes:
            entry["verdict"] = "empty"
            report.append(entry)
            continue
        verdict = is_obstruction(r, gamma, tol)
        entry["verdict"] = verdict.kind
        report.append(entry)
        if verdict.kind == "Obstruction":
            return SearchResult("Found", gamma, verdict, report)
    if report and all(e["saturation"] == "Exceeded" for e in report):
        return SearchResult("Exceeded", None, None, report)
    return SearchResult("NoneFoundWithinBudget", None, None, report)
