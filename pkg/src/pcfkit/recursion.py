"""Wreath-recursion encodings of branched covers between marked spheres.

For every target generator ``x_i`` a recursion stores a permutation of the sheets
and, per sheet ``s``, the lift of ``x_i`` starting at ``s`` closed up by the
connecting paths (a word over the source group).  Sheets are 0-based in memory
and 1-based in files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .words import (
    MarkedSphere,
    Word,
    WordSyntaxError,
    format_word,
    inverse,
    normal_form,
    oriented_key,
    parse_word,
)

INF = math.inf


class InvalidRecursion(ValueError):
    """Base class for recursion-level errors."""


class AmbiguousMarking(InvalidRecursion):
    pass


class NonSelfMap(InvalidRecursion):
    pass


class ChainMismatch(InvalidRecursion):
    pass


class ConventionError(InvalidRecursion):
    pass


class NotAPermutation(InvalidRecursion):
    pass


class FixtureFormatError(ValueError):
    pass


def cycles_of(perm: Sequence[int]) -> list[tuple[int, ...]]:
    """Cycles of a 0-based image array, each starting at its least element."""
    seen = [False] * len(perm)
    out = []
    for s in range(len(perm)):
        if seen[s]:
            continue
        cyc = []
        t = s
        while not seen[t]:
            seen[t] = True
            cyc.append(t)
            t = perm[t]
        out.append(tuple(cyc))
    return out


def invert_perm(perm: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(perm)
    for s, t in enumerate(perm):
        inv[t] = s
    return tuple(inv)


@dataclass(frozen=True)
class BranchedCoverRecursion:
    degree: int
    source: MarkedSphere
    target: MarkedSphere
    perms: tuple[tuple[int, ...], ...]
    lifts: tuple[tuple[Word, ...], ...]
    _inv: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        perms = tuple(tuple(p) for p in self.perms)
        lifts = tuple(tuple(normal_form(w, self.source.n) for w in row) for row in self.lifts)
        object.__setattr__(self, "perms", perms)
        object.__setattr__(self, "lifts", lifts)
        if len(perms) != self.target.n or len(lifts) != self.target.n:
            raise FixtureFormatError(
                f"expected {self.target.n} generator entries, got {len(perms)} perms / {len(lifts)} lift rows"
            )
        for i, (p, row) in enumerate(zip(perms, lifts), start=1):
            if len(p) != self.degree or len(row) != self.degree:
                raise FixtureFormatError(f"generator x{i}: arrays must have length {self.degree}")
            if sorted(p) != list(range(self.degree)):
                raise NotAPermutation(f"generator x{i}: {[a + 1 for a in p]} is not a permutation")
        object.__setattr__(self, "_inv", tuple(invert_perm(p) for p in perms))

    @property
    def is_self_map(self) -> bool:
        return self.source == self.target

    # -- evaluation ---------------------------------------------------------

    def step(self, letter: int, sheet: int) -> tuple[int, Word]:
        i = abs(letter) - 1
        if letter > 0:
            return self.perms[i][sheet], self.lifts[i][sheet]
        prev = self._inv[i][sheet]
        return prev, inverse(self.lifts[i][prev])

    def lift(self, word: Iterable[int], sheet: int) -> tuple[int, Word]:
        """Lift a target word from ``sheet``; returns the end sheet and the lift."""
        parts: list[int] = []
        s = sheet
        for a in word:
            s, w = self.step(a, s)
            parts.extend(w)
        return s, normal_form(parts, self.source.n)

    def permutation(self, word: Sequence[int]) -> tuple[int, ...]:
        return tuple(self.lift(word, s)[0] for s in range(self.degree))

    def word_cycles(self, word: Sequence[int]) -> list[tuple[tuple[int, ...], Word]]:
        """Cycles of the monodromy of ``word`` with the closed lift along each cycle."""
        out = []
        seen: set[int] = set()
        for s0 in range(self.degree):
            if s0 in seen:
                continue
            cyc = []
            parts: list[int] = []
            s = s0
            while True:
                seen.add(s)
                cyc.append(s)
                s, w = self.lift(word, s)
                parts.extend(w)
                if s == s0:
                    break
            out.append((tuple(cyc), normal_form(parts, self.source.n)))
        return out

    # -- (de)serialisation --------------------------------------------------

    def to_dict(self) -> dict:
        d = {
            "punctures": list(self.target.punctures),
            "degree": self.degree,
            "generators": [
                {"perm": [t + 1 for t in p], "lifts": [format_word(w) for w in row]}
                for p, row in zip(self.perms, self.lifts)
            ],
        }
        if not self.is_self_map:
            d["source_punctures"] = list(self.source.punctures)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BranchedCoverRecursion":
        try:
            target = MarkedSphere(tuple(d["punctures"]))
            source = MarkedSphere(tuple(d.get("source_punctures", d["punctures"])))
            degree = int(d["degree"])
            gens = d["generators"]
            perms = [tuple(int(t) - 1 for t in g["perm"]) for g in gens]
            lifts = [tuple(parse_word(w, source.n) for w in g["lifts"]) for g in gens]
        except (KeyError, TypeError, WordSyntaxError) as exc:
            raise FixtureFormatError(f"malformed recursion: {exc}") from exc
        return cls(degree, source, target, tuple(perms), tuple(lifts))

    def dumps(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True) + "\n"

    @classmethod
    def loads(cls, text: str) -> "BranchedCoverRecursion":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FixtureFormatError(f"invalid JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise FixtureFormatError("recursion file must hold a JSON object")
        return cls.from_dict(d)


def identity_recursion(sphere: MarkedSphere, target: MarkedSphere | None = None) -> BranchedCoverRecursion:
    """Degree-1 recursion whose lifts are the generators themselves.

    With a distinct ``target`` of the same size this is the map sending the i-th
    puncture of ``sphere`` to the i-th puncture of ``target``.
    """
    target = target or sphere
    if target.n != sphere.n:
        raise ChainMismatch("identity needs spheres with equal puncture counts")
    n = sphere.n
    return BranchedCoverRecursion(
        1, sphere, target, tuple((0,) for _ in range(n)), tuple((sphere.generator(i),) for i in range(1, n + 1))
    )


# -- validation ----------------------------------------------------------------


@dataclass
class Check:
    name: str
    ok: bool
    witness: object = None


@dataclass
class ValidationReport:
    checks: list[Check]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checks": [{"name": c.name, "ok": c.ok, "witness": c.witness} for c in self.checks],
        }


def _generator_keys(sphere: MarkedSphere) -> tuple[dict, dict]:
    pos = {}
    neg = {}
    for j in range(1, sphere.n + 1):
        g = sphere.generator(j)
        pos.setdefault(oriented_key(g), []).append(j)
        neg.setdefault(oriented_key(inverse(g)), []).append(j)
    return pos, neg


def orbits(perms: Iterable[Sequence[int]], degree: int) -> list[list[int]]:
    parent = list(range(degree))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for p in perms:
        for s, t in enumerate(p):
            a, b = find(s), find(t)
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for s in range(degree):
        groups.setdefault(find(s), []).append(s)
    return sorted(groups.values())


def validate(r: BranchedCoverRecursion) -> ValidationReport:
    checks = []
    d = r.degree
    parts = orbits(r.perms, d)
    checks.append(Check("transitivity", len(parts) == 1, None if len(parts) == 1 else [[s + 1 for s in o] for o in parts]))

    relator = tuple(range(1, r.target.n + 1))
    bad = []
    for s in range(d):
        t, w = r.lift(relator, s)
        if t != s or w:
            bad.append({"sheet": s + 1, "end": t + 1, "lift": format_word(w)})
    checks.append(Check("relator", not bad, bad or None))

    rh = sum(len(c) - 1 for p in r.perms for c in cycles_of(p))
    checks.append(Check("riemann_hurwitz", rh == 2 * d - 2, {"sum": rh, "expected": 2 * d - 2}))

    pos, neg = _generator_keys(r.source)
    designated: dict[int, list] = {}
    problems = []
    for i, p in enumerate(r.perms, start=1):
        for cyc in cycles_of(p):
            w = _cycle_lift(r, i, cyc)
            if not w:
                continue
            key = oriented_key(w)
            if key in pos:
                for j in pos[key]:
                    designated.setdefault(j, []).append((i, cyc[0] + 1))
            elif key in neg:
                problems.append({"generator": i, "cycle_start": cyc[0] + 1, "issue": "inverse orientation", "lift": format_word(w)})
            else:
                problems.append({"generator": i, "cycle_start": cyc[0] + 1, "issue": "not peripheral", "lift": format_word(w)})
    for j in range(1, r.source.n + 1):
        hits = designated.get(j, [])
        if len(hits) != 1:
            problems.append({"source_puncture": r.source.punctures[j - 1], "designations": len(hits)})
    checks.append(Check("markings", not problems, problems or None))
    return ValidationReport(checks)


def _cycle_lift(r: BranchedCoverRecursion, i: int, cyc: Sequence[int]) -> Word:
    return normal_form([a for s in cyc for a in r.lifts[i - 1][s]], r.source.n)


def require_valid(r: BranchedCoverRecursion) -> None:
    rep = validate(r)
    if not rep.ok:
        failed = [c.name for c in rep.checks if not c.ok]
        raise InvalidRecursion(f"invalid recursion: failed {failed}")


# -- portraits and orbifolds ---------------------------------------------------


@dataclass(frozen=True)
class Portrait:
    source: MarkedSphere
    target: MarkedSphere
    degree: int
    image: dict
    local_degree: dict
    # (target label, local degree, marked source label or None) for every cycle
    preimages: tuple
    unmarked_critical: tuple

    def critical_points(self) -> set[str]:
        return {p for p, k in self.local_degree.items() if k > 1}

    def invariant(self) -> tuple:
        """Hashable summary used for invariant-level comparisons."""
        return (
            self.degree,
            tuple((p, self.image[p], self.local_degree[p]) for p in self.source.punctures),
            tuple(sorted(self.unmarked_critical)),
        )


def portrait(r: BranchedCoverRecursion) -> Portrait:
    pos, neg = _generator_keys(r.source)
    image: dict[str, str] = {}
    local: dict[str, int] = {}
    pre = []
    unmarked = []
    for i, p in enumerate(r.perms, start=1):
        tlabel = r.target.punctures[i - 1]
        for cyc in cycles_of(p):
            w = _cycle_lift(r, i, cyc)
            key = oriented_key(w)
            if not w:
                pre.append((tlabel, len(cyc), None))
                if len(cyc) > 1:
                    unmarked.append((tlabel, len(cyc)))
                continue
            if key in neg and key not in pos:
                raise ConventionError(f"cycle of x{i} lifts to an inverse generator {format_word(w)}")
            hits = pos.get(key, [])
            if len(hits) > 1:
                raise AmbiguousMarking(f"lift {format_word(w)} conjugate to generators {hits}")
            if not hits:
                raise InvalidRecursion(f"lift {format_word(w)} of x{i} is neither trivial nor peripheral")
            label = r.source.punctures[hits[0] - 1]
            if label in image:
                raise AmbiguousMarking(f"source puncture {label} designated twice")
            image[label] = tlabel
            local[label] = len(cyc)
            pre.append((tlabel, len(cyc), label))
    missing = [p for p in r.source.punctures if p not in image]
    if missing:
        raise InvalidRecursion(f"source punctures without image: {missing}")
    return Portrait(r.source, r.target, r.degree, image, local, tuple(pre), tuple(unmarked))


@dataclass(frozen=True)
class OrbifoldSignature:
    values: dict
    chi: Fraction

    @property
    def hyperbolic(self) -> bool:
        return self.chi < 0

    def as_list(self, order: Sequence[str]) -> list:
        return [self.values[p] for p in order]


def orbifold_signature(port: Portrait) -> OrbifoldSignature:
    if port.source != port.target:
        raise NonSelfMap("orbifold signature needs a self-map")
    labels = port.source.punctures
    # periodic cycles containing a critical marked point
    inf_points: set[str] = set()
    for p in labels:
        orbit = [p]
        q = port.image[p]
        while q not in orbit:
            orbit.append(q)
            q = port.image[q]
        cycle = orbit[orbit.index(q):]
        if p in cycle and any(port.local_degree[c] > 1 for c in cycle):
            inf_points.add(p)
    back: dict[str, list] = {p: [] for p in labels}
    for tlabel, k, src in port.preimages:
        back[tlabel].append((k, src))
    N: dict[str, float] = {p: (INF if p in inf_points else 1) for p in labels}
    cap = len(labels) * max(max(port.local_degree.values()), 1)
    for _ in range(cap + 1):
        new = {}
        for p in labels:
            if p in inf_points:
                new[p] = INF
                continue
            val = 1
            for k, src in back[p]:
                m = 1 if src is None else N[src]
                if m == INF:
                    val = INF
                    break
                val = math.lcm(val, k * m)
            new[p] = val
        if new == N:
            break
        N = new
    else:
        raise RuntimeError("orbifold weights failed to stabilise within the iteration cap")
    chi = Fraction(2)
    for p in labels:
        chi -= 1 if N[p] == INF else 1 - Fraction(1, N[p])
    return OrbifoldSignature(dict(N), chi)


def is_hyperbolic_orbifold(sig: OrbifoldSignature) -> bool:
    return sig.chi < 0


# -- composition ---------------------------------------------------------------


def compose(f: BranchedCoverRecursion, g: BranchedCoverRecursion) -> BranchedCoverRecursion:
    """Recursion of ``f after g`` (``g: C -> A``, ``f: A -> B``).

    Sheet ``(s, t)`` with ``s`` an f-sheet and ``t`` a g-sheet has index
    ``s * deg(g) + t``.
    """
    if g.target != f.source:
        raise ChainMismatch(f"target of g {g.target.punctures} differs from source of f {f.source.punctures}")
    dg = g.degree
    perms = []
    lifts = []
    for i in range(f.target.n):
        p = []
        row = []
        for s in range(f.degree):
            w = f.lifts[i][s]
            s2 = f.perms[i][s]
            for t in range(dg):
                t2, lw = g.lift(w, t)
                p.append(s2 * dg + t2)
                row.append(lw)
        perms.append(tuple(p))
        lifts.append(tuple(row))
    return BranchedCoverRecursion(f.degree * dg, g.source, f.target, tuple(perms), tuple(lifts))


def relabel_sheets(r: BranchedCoverRecursion, sigma: Sequence[int]) -> BranchedCoverRecursion:
    """Rename sheet ``s`` to ``sigma[s]``."""
    d = r.degree
    inv = invert_perm(sigma)
    perms = tuple(tuple(sigma[p[inv[s]]] for s in range(d)) for p in r.perms)
    lifts = tuple(tuple(row[inv[s]] for s in range(d)) for row in r.lifts)
    return BranchedCoverRecursion(d, r.source, r.target, perms, lifts)


def change_connecting_paths(r: BranchedCoverRecursion, paths: Sequence[Word]) -> BranchedCoverRecursion:
    """Replace each lift ``w`` at sheet ``s`` by ``t_s w t_{perm(s)}^-1``."""
    n = r.source.n
    lifts = tuple(
        tuple(normal_form(list(paths[s]) + list(row[s]) + list(inverse(paths[p[s]])), n) for s in range(r.degree))
        for p, row in zip(r.perms, r.lifts)
    )
    return BranchedCoverRecursion(r.degree, r.source, r.target, r.perms, lifts)




def _half_twist(n: int, i: int) -> tuple[list[Word], list[Word]]:
    """Generators after exchanging positions ``i`` and ``i + 1`` (0-based).

    Returns the new generators as old words and the old generators as new words.
    The product ``x_1 ... x_n`` is preserved.
    """
    new_in_old = [(k + 1,) for k in range(n)]
    old_in_new = [(k + 1,) for k in range(n)]
    new_in_old[i] = (i + 1, i + 2, -(i + 1))
    new_in_old[i + 1] = (i + 1,)
    old_in_new[i] = (i + 2,)
    old_in_new[i + 1] = (-(i + 2), i + 1, i + 2)
    return new_in_old, old_in_new


def _substitute(word: Sequence[int], table: Sequence[Word], n: int) -> Word:
    out: list[int] = []
    for a in word:
        out.extend(table[a - 1] if a > 0 else inverse(table[-a - 1]))
    return normal_form(out, n)


def _swapped(sphere: MarkedSphere, i: int) -> MarkedSphere:
    p = list(sphere.punctures)
    p[i], p[i + 1] = p[i + 1], p[i]
    return MarkedSphere(tuple(p))


def _adjacent_swaps(current: Sequence[str], order: Sequence[str]) -> list[int]:
    if sorted(current) != sorted(order):
        raise ValueError(f"{list(order)} is not a reordering of {list(current)}")
    cur = list(current)
    swaps = []
    for k, label in enumerate(order):
        j = cur.index(label)
        while j > k:
            cur[j - 1], cur[j] = cur[j], cur[j - 1]
            swaps.append(j - 1)
            j -= 1
    return swaps


def swap_target_punctures(r: BranchedCoverRecursion, i: int) -> BranchedCoverRecursion:
    new_in_old, _ = _half_twist(r.target.n, i)
    perms = tuple(r.permutation(w) for w in new_in_old)
    lifts = tuple(tuple(r.lift(w, s)[1] for s in range(r.degree)) for w in new_in_old)
    return BranchedCoverRecursion(r.degree, r.source, _swapped(r.target, i), perms, lifts)


def swap_source_punctures(r: BranchedCoverRecursion, i: int) -> BranchedCoverRecursion:
    _, old_in_new = _half_twist(r.source.n, i)
    n = r.source.n
    lifts = tuple(tuple(_substitute(w, old_in_new, n) for w in row) for row in r.lifts)
    return BranchedCoverRecursion(r.degree, _swapped(r.source, i), r.target, r.perms, lifts)


def reorder_punctures(r: BranchedCoverRecursion, order: Sequence[str]) -> BranchedCoverRecursion:
    """Present a self-map with its punctures listed in ``order``.

    Each adjacent exchange is a half twist on both source and target generators,
    so the result describes the same map in a different peripheral basis.
    """
    if not r.is_self_map:
        raise NonSelfMap("reordering both sides needs a self-map")
    for i in _adjacent_swaps(r.target.punctures, order):
        r = swap_source_punctures(swap_target_punctures(r, i), i)
    return r
