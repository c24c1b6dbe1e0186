"""Cutting a map along an invariant multicurve, and gluing pieces back together.

Curves are handled in block form: every curve is the boundary of a disk holding
a contiguous run ``x_a ... x_b`` of the puncture order (never containing the last
puncture).  The blocks form a laminar family, hence a rooted tree whose nodes are
the complementary regions.  Each region is a small marked sphere: its own
punctures in order, with every child block collapsed to one cap.  A non-root
region lists the cap facing its parent last.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import networkx as nx

from .curves import Multicurve, is_stable, normalize, Simplicity, Certificate
from .recursion import (
    BranchedCoverRecursion,
    Check,
    FixtureFormatError,
    OrbifoldSignature,
    ValidationReport,
    compose,
    orbifold_signature,
    orbits,
    portrait,
    validate,
)
from .stallings import StallingsGraph, conjugator_onto
from .words import (
    MarkedSphere,
    Word,
    block_word,
    conjugator,
    inverse,
    is_conjugate,
    multiply,
    normal_form,
    unoriented_key,
)


class NotStandardForm(ValueError):
    pass


class InadmissiblePairing(ValueError):
    pass


class IncompatibleBoundaryDynamics(ValueError):
    pass


def cap_labels(name: str) -> tuple[str, str]:
    """Default labels of the two caps of curve ``name``: (child side, parent side)."""
    return f"cap:{name}:in", f"cap:{name}:out"


# -- the tree of regions -------------------------------------------------------


@dataclass(frozen=True)
class TreeEdge:
    name: str
    parent: str
    child: str
    start: int
    stop: int
    in_label: str
    out_label: str

    @property
    def word(self) -> Word:
        return block_word(self.start, self.stop)


@dataclass(frozen=True)
class ConfigurationTree:
    sphere: MarkedSphere
    edges: tuple[TreeEdge, ...]
    root: str = "root"
    _listing: dict = field(init=False, repr=False, compare=False)
    _items: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.sphere.n
        names = [self.root] + [e.child for e in self.edges]
        if len(set(names)) != len(names):
            raise NotStandardForm("node names must be distinct")
        for e in self.edges:
            if not (1 <= e.start and e.stop <= n - 1 and 2 <= e.stop - e.start + 1 <= n - 2):
                raise NotStandardForm(f"curve {e.name}: block {e.start}..{e.stop} is not essential")
        for a in self.edges:
            for b in self.edges:
                if a is b:
                    continue
                disjoint = a.stop < b.start or b.stop < a.start
                nested = (a.start <= b.start and b.stop <= a.stop) or (b.start <= a.start and a.stop <= b.stop)
                if not (disjoint or nested) or (a.start, a.stop) == (b.start, b.stop):
                    raise NotStandardForm(f"curves {a.name} and {b.name} intersect or coincide")
        by_child = {e.child: e for e in self.edges}
        listing: dict[str, tuple[str, ...]] = {}
        items: dict[str, tuple[Word, ...]] = {}
        for node in names:
            lo, hi = (1, n) if node == self.root else (by_child[node].start, by_child[node].stop)
            kids = sorted((e for e in self.edges if e.parent == node), key=lambda e: e.start)
            labs: list[str] = []
            words: list[Word] = []
            i = lo
            while i <= hi:
                kid = next((e for e in kids if e.start == i), None)
                if kid is not None:
                    labs.append(kid.out_label)
                    words.append(kid.word)
                    i = kid.stop + 1
                else:
                    labs.append(self.sphere.punctures[i - 1])
                    words.append(normal_form((i,), n))
                    i += 1
            if node != self.root:
                e = by_child[node]
                labs.append(e.in_label)
                words.append(inverse(e.word))
            if len(labs) < 3:
                raise NotStandardForm(f"region {node} has fewer than three punctures")
            listing[node] = tuple(labs)
            items[node] = tuple(words)
        # parent pointers must agree with the nesting of the blocks
        for e in self.edges:
            holders = [f for f in self.edges if f is not e and f.start <= e.start and e.stop <= f.stop]
            expect = min(holders, key=lambda f: f.stop - f.start).child if holders else self.root
            if e.parent != expect:
                raise NotStandardForm(f"curve {e.name} should hang below {expect}, not {e.parent}")
        object.__setattr__(self, "_listing", listing)
        object.__setattr__(self, "_items", items)

    # -- construction -------------------------------------------------------

    @classmethod
    def from_blocks(
        cls,
        sphere: MarkedSphere,
        blocks: Mapping[str, tuple[int, int]],
        root: str = "root",
        labels: Mapping[str, tuple[str, str]] | None = None,
        children: Mapping[str, str] | None = None,
    ) -> "ConfigurationTree":
        """Tree from named blocks; ``children`` names the region inside each curve."""
        labels = dict(labels or {})
        children = dict(children or {})
        spans = {name: tuple(b) for name, b in blocks.items()}
        edges = []
        for name, (a, b) in spans.items():
            holders = [m for m, (c, d) in spans.items() if m != name and c <= a and b <= d and (c, d) != (a, b)]
            parent = min(holders, key=lambda m: spans[m][1] - spans[m][0]) if holders else None
            ins, outs = labels.get(name, cap_labels(name))
            edges.append(
                TreeEdge(
                    name,
                    root if parent is None else children.get(parent, parent),
                    children.get(name, name),
                    a,
                    b,
                    ins,
                    outs,
                )
            )
        edges.sort(key=lambda e: (e.start, -e.stop))
        return cls(sphere, tuple(edges), root)

    @classmethod
    def from_curves(cls, sphere: MarkedSphere, curves: Multicurve | Mapping[str, Sequence[int]]) -> "ConfigurationTree":
        """Find each curve as a block of the puncture order; names default to g1, g2, ..."""
        if isinstance(curves, Multicurve):
            curves = {f"g{k}": c.key for k, c in enumerate(curves.classes, start=1)}
        n = sphere.n
        table = {}
        for a in range(1, n):
            for b in range(a + 1, n):
                if 2 <= b - a + 1 <= n - 2:
                    table.setdefault(unoriented_key(block_word(a, b)), (a, b))
        blocks = {}
        for name, w in curves.items():
            key = unoriented_key(normal_form(w, n))
            if key not in table:
                raise NotStandardForm(f"curve {name} is not a contiguous block of the puncture order")
            blocks[name] = table[key]
        return cls.from_blocks(sphere, blocks)

    def to_dict(self) -> dict:
        return {
            "punctures": list(self.sphere.punctures),
            "root": self.root,
            "edges": [
                {
                    "name": e.name,
                    "parent": e.parent,
                    "child": e.child,
                    "side": list(self.sphere.punctures[e.start - 1 : e.stop]),
                    "labels": [e.in_label, e.out_label],
                }
                for e in self.edges
            ],
        }

    @classmethod
    def from_dict(cls, d: dict, sphere: MarkedSphere | None = None) -> "ConfigurationTree":
        try:
            sphere = sphere or MarkedSphere(tuple(d["punctures"]))
            blocks, labels, children = {}, {}, {}
            for e in d["edges"]:
                idx = sorted(sphere.index(p) for p in e["side"])
                if idx != list(range(idx[0], idx[-1] + 1)):
                    raise NotStandardForm(f"side of {e['name']} is not contiguous in the puncture order")
                blocks[e["name"]] = (idx[0], idx[-1])
                if "labels" in e:
                    labels[e["name"]] = tuple(e["labels"])
                children[e["name"]] = e.get("child", e["name"])
        except (KeyError, TypeError, IndexError) as exc:
            raise FixtureFormatError(f"malformed tree: {exc}") from exc
        return cls.from_blocks(sphere, blocks, d.get("root", "root"), labels, children)

    # -- queries ------------------------------------------------------------

    def nodes(self) -> list[str]:
        """Root first, then depth-first in puncture order."""
        out = [self.root]
        order = sorted(self.edges, key=lambda e: (e.start, -e.stop))
        out.extend(e.child for e in order)
        return out

    def listing(self, node: str) -> tuple[str, ...]:
        return self._listing[node]

    def items(self, node: str) -> tuple[Word, ...]:
        """Each puncture of the region as a word in the big sphere."""
        return self._items[node]

    def small_sphere(self, node: str) -> MarkedSphere:
        return MarkedSphere(self._listing[node])

    def edge(self, name: str) -> TreeEdge:
        return next(e for e in self.edges if e.name == name)

    def edge_above(self, node: str) -> TreeEdge | None:
        return next((e for e in self.edges if e.child == node), None)

    def home(self, label: str) -> tuple[str, int]:
        """Region holding a puncture or cap label, with its 1-based position."""
        for node, labs in self._listing.items():
            if label in labs:
                return node, labs.index(label) + 1
        raise KeyError(label)

    def caps(self) -> dict[str, tuple[str, str]]:
        """Cap label -> (curve name, 'in' or 'out')."""
        out = {}
        for e in self.edges:
            out[e.in_label] = (e.name, "in")
            out[e.out_label] = (e.name, "out")
        return out

    def multicurve(self, certificate: Certificate | None = None) -> Multicurve:
        cert = certificate or Certificate("AssertedByUser")
        return Multicurve(tuple(normalize(e.word, self.sphere, Simplicity.DECLARED_SIMPLE) for e in self.edges), cert)

    def embed(self, node: str, word: Iterable[int]) -> Word:
        """Word in the region's generators, rewritten in the big sphere."""
        items = self._items[node]
        parts: list[int] = []
        for a in word:
            w = items[abs(a) - 1]
            parts.extend(w if a > 0 else inverse(w))
        return normal_form(parts, self.sphere.n)

    def parser(self, node: str) -> "_BlockParser":
        return _BlockParser(self._items[node][: len(self._items[node]) - 1])


class _BlockParser:
    """Rewrites words of a region subgroup in its basis of letter-disjoint blocks."""

    def __init__(self, basis: Sequence[Word]):
        self.basis = [tuple(b) for b in basis]
        self.first = {}
        self.last = {}
        for k, b in enumerate(self.basis, start=1):
            if any(a < 0 for a in b):
                raise ValueError("basis blocks must be positive words")
            self.first[b[0]] = k
            self.last[b[-1]] = k
        self.graph = StallingsGraph(self.basis)

    def parse(self, word: Sequence[int]) -> Word:
        out = []
        i = 0
        w = tuple(word)
        while i < len(w):
            a = w[i]
            if a > 0:
                k = self.first.get(a)
                b = self.basis[k - 1] if k else None
            else:
                k = self.last.get(-a)
                b = inverse(self.basis[k - 1]) if k else None
            if b is None or w[i : i + len(b)] != b:
                raise NotStandardForm(f"word {w} does not lie in the region subgroup")
            out.append(k if a > 0 else -k)
            i += len(b)
        return tuple(out)


# -- decomposition records -----------------------------------------------------


@dataclass(frozen=True)
class ComponentRecord:
    """A component of the preimage of one region, over that region."""

    node: str
    kind: str  # "piece" or "trivial"
    source: str | None
    sheets: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.sheets)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "degree": self.degree}
        if self.source is not None:
            d["source"] = self.source
        return d


@dataclass(frozen=True)
class AnnulusRecord:
    """Links a boundary cycle seen from the parent region to the same cycle seen from the child."""

    edge: str
    parent: tuple[int, int]
    child: tuple[int, int]
    length: int

    def to_dict(self) -> dict:
        return {"edge": self.edge, "parent": list(self.parent), "child": list(self.child), "length": self.length}

    @classmethod
    def from_dict(cls, d: dict) -> "AnnulusRecord":
        return cls(d["edge"], tuple(d["parent"]), tuple(d["child"]), int(d.get("length", 0)))


@dataclass(frozen=True)
class CapData:
    label: str
    node: str
    return_time: int | None
    degrees: tuple[int, ...]

    @property
    def returning(self) -> bool:
        return self.return_time is not None

    @property
    def first_return_degree(self) -> int | None:
        if self.return_time is None:
            return None
        out = 1
        for k in self.degrees:
            out *= k
        return out

    def to_dict(self) -> dict:
        if self.return_time is None:
            return {"kind": "NonReturning", "degrees": list(self.degrees)}
        return {"kind": "Returning", "return_time": self.return_time, "degree": self.first_return_degree}


@dataclass(frozen=True)
class SphereMapCycle:
    nodes: tuple[str, ...]
    first_return: BranchedCoverRecursion

    @property
    def signature(self) -> OrbifoldSignature:
        return orbifold_signature(portrait(self.first_return))


@dataclass(frozen=True)
class DecompositionResult:
    tree: ConfigurationTree
    degree: int
    pieces: dict  # source node -> recursion onto its image region
    components: dict  # target node -> tuple of ComponentRecord
    annuli: tuple[AnnulusRecord, ...]
    caps: dict
    cycles: tuple[SphereMapCycle, ...]

    def image_of(self, node: str) -> str:
        return _node_of_sphere(self.tree, self.pieces[node].target)

    def pairing(self) -> list[tuple[str, str]]:
        return [(e.in_label, e.out_label) for e in self.tree.edges]

    def to_manifest(self) -> dict:
        return {
            "degree": self.degree,
            "punctures": list(self.tree.sphere.punctures),
            "pieces": {k: self.pieces[k].to_dict() for k in self.tree.nodes()},
            "pairing": [list(p) for p in self.pairing()],
            "components": {m: [c.to_dict() for c in self.components[m]] for m in self.tree.nodes()},
            "annuli": [a.to_dict() for a in self.annuli],
        }

    def summary(self) -> dict:
        return {
            "degree": self.degree,
            "pieces": {
                k: {"image": self.image_of(k), "degree": self.pieces[k].degree, "punctures": list(self.tree.listing(k))}
                for k in self.tree.nodes()
            },
            "caps": {k: v.to_dict() for k, v in sorted(self.caps.items())},
            "cycles": [
                {
                    "nodes": list(c.nodes),
                    "degree": c.first_return.degree,
                    "signature": [_fmt_weight(x) for x in c.signature.as_list(c.first_return.source.punctures)],
                    "chi": str(c.signature.chi),
                }
                for c in self.cycles
            ],
        }


def _fmt_weight(x) -> int | str:
    return "inf" if x == float("inf") else int(x)


def _node_of_sphere(tree: ConfigurationTree, sphere: MarkedSphere) -> str:
    for node in tree.nodes():
        if tree.listing(node) == sphere.punctures:
            return node
    raise KeyError(sphere.punctures)


# -- decompose -----------------------------------------------------------------


def standard_form_check(r: BranchedCoverRecursion, gamma: Multicurve, tree: ConfigurationTree) -> ValidationReport:
    checks = [Check("certificate", gamma.certificate.kind != "Unverified", gamma.certificate.kind)]
    tree_keys = sorted(unoriented_key(e.word) for e in tree.edges)
    checks.append(Check("tree_matches_curves", tree_keys == sorted(gamma.keys()), None))
    checks.append(Check("same_sphere", tree.sphere == r.target == r.source, None))
    if checks[-1].ok:
        ok, witness = is_stable(r, gamma)
        checks.append(Check("stable", ok, None if ok else str(witness.curve)))
        degs = {}
        for e in tree.edges:
            degs[e.name] = sorted(len(cyc) for cyc, _ in r.word_cycles(e.word))
        checks.append(Check("boundary_degrees", True, degs))
    return ValidationReport(tuple(checks))


def _schreier(r: BranchedCoverRecursion, gens: Sequence[Word], orbit: Sequence[int]):
    """Lifted paths from the orbit's first sheet, and the lifts of loops there."""
    s0 = orbit[0]
    L: dict[int, Word] = {s0: ()}
    q = deque([s0])
    while q:
        s = q.popleft()
        for g in gens:
            t, w = r.lift(g, s)
            if t not in L:
                L[t] = multiply(L[s], w)
                q.append(t)
    n = r.source.n
    loops = []
    for s in orbit:
        for g in gens:
            t, w = r.lift(g, s)
            x = normal_form(L[s] + w + inverse(L[t]), n)
            if x:
                loops.append(x)
    return L, loops


def decompose(
    r: BranchedCoverRecursion, gamma: Multicurve, tree: ConfigurationTree | None = None
) -> DecompositionResult:
    if tree is None:
        tree = ConfigurationTree.from_curves(r.target, gamma)
    report = standard_form_check(r, gamma, tree)
    if not report.ok:
        bad = [c.name for c in report.checks if not c.ok]
        raise NotStandardForm(f"failed checks: {bad}")
    n = r.source.n
    nodes = tree.nodes()
    graphs = {j: tree.parser(j) for j in nodes}
    pieces: dict[str, BranchedCoverRecursion] = {}
    components: dict[str, tuple[ComponentRecord, ...]] = {}
    for m in nodes:
        gens = tree.items(m)
        perms = [r.permutation(g) for g in gens]
        recs = []
        for orb in orbits(perms, r.degree):
            orb = sorted(orb)
            L, loops = _schreier(r, gens, orb)
            found = None
            if loops:
                for j in nodes:
                    c = conjugator_onto(loops, graphs[j].graph)
                    if c is not None:
                        found = (j, c)
                        break
            if found is None:
                # a component carrying no region: only disks are allowed
                if loops:
                    raise NotStandardForm(f"a component over {m} matches no region")
                recs.append(ComponentRecord(m, "trivial", None, tuple(orb)))
                continue
            j, c = found
            if j in pieces:
                raise NotStandardForm(f"region {j} occurs twice in the preimage")
            local = {s: k for k, s in enumerate(orb)}
            lp, ll = [], []
            for g in gens:
                prow, lrow = [], []
                for s in orb:
                    t, w = r.lift(g, s)
                    x = normal_form(inverse(c) + L[s] + w + inverse(L[t]) + c, n)
                    prow.append(local[t])
                    lrow.append(graphs[j].parse(x))
                lp.append(tuple(prow))
                ll.append(tuple(lrow))
            pieces[j] = BranchedCoverRecursion(
                len(orb), tree.small_sphere(j), tree.small_sphere(m), tuple(lp), tuple(ll)
            )
            recs.append(ComponentRecord(m, "piece", j, tuple(orb)))
        components[m] = tuple(recs)
    missing = [j for j in nodes if j not in pieces]
    if missing:
        raise NotStandardForm(f"regions without a preimage piece: {missing}")

    def locate(m: str, s: int) -> tuple[int, int]:
        for k, rec in enumerate(components[m]):
            if s in rec.sheets:
                return k, rec.sheets.index(s)
        raise AssertionError("sheet not covered")

    annuli = []
    for e in tree.edges:
        for cyc, _ in r.word_cycles(e.word):
            annuli.append(AnnulusRecord(e.name, locate(e.parent, cyc[0]), locate(e.child, cyc[0]), len(cyc)))
    return DecompositionResult(
        tree, r.degree, pieces, components, tuple(annuli), cap_data(tree, pieces), first_return_maps(tree, pieces)
    )


def cap_data(tree: ConfigurationTree, pieces: Mapping[str, BranchedCoverRecursion]) -> dict[str, CapData]:
    """Follow each cap forward through the pieces until it comes back or cannot."""
    ports = {j: portrait(f) for j, f in pieces.items()}
    caps = tree.caps()
    out = {}
    for label in caps:
        node, _ = tree.home(label)
        cur, j = label, node
        degrees = []
        ret = None
        for step in range(1, len(caps) + 1):
            port = ports[j]
            degrees.append(port.local_degree[cur])
            cur = port.image[cur]
            j = _node_of_sphere(tree, pieces[j].target)
            if cur == label:
                ret = step
                break
            if cur not in caps:
                break
        out[label] = CapData(label, node, ret, tuple(degrees))
    return out


def first_return_maps(
    tree: ConfigurationTree, pieces: Mapping[str, BranchedCoverRecursion]
) -> tuple[SphereMapCycle, ...]:
    image = {j: _node_of_sphere(tree, f.target) for j, f in pieces.items()}
    seen: set[str] = set()
    out = []
    for j in tree.nodes():
        path = []
        k = j
        while k not in path and k not in seen:
            path.append(k)
            k = image[k]
        seen.update(path)
        if k in path:
            cyc = path[path.index(k) :]
            F = pieces[cyc[0]]
            for node in cyc[1:]:
                F = compose(pieces[node], F)
            out.append(SphereMapCycle(tuple(cyc), F))
    return tuple(out)


# -- combine -------------------------------------------------------------------


@dataclass(frozen=True)
class CombineResult:
    recursion: BranchedCoverRecursion
    tree: ConfigurationTree
    multicurve: Multicurve


def _glue_tree(pieces: Mapping[str, BranchedCoverRecursion], pairing: Sequence[tuple[str, str]]) -> ConfigurationTree:
    spheres = {j: f.source for j, f in pieces.items()}
    where: dict[str, str] = {}
    for j, S in spheres.items():
        for p in S.punctures:
            if p in where:
                raise InadmissiblePairing(f"label {p} appears on two spheres")
            where[p] = j
    partner: dict[str, str] = {}
    g = nx.MultiGraph()
    g.add_nodes_from(spheres)
    for a, b in pairing:
        for p in (a, b):
            if p not in where:
                raise InadmissiblePairing(f"unknown cap {p}")
            if p in partner:
                raise InadmissiblePairing(f"cap {p} is paired twice")
        if where[a] == where[b]:
            raise InadmissiblePairing(f"caps {a} and {b} lie on the same sphere")
        partner[a], partner[b] = b, a
        g.add_edge(where[a], where[b])
    if not nx.is_tree(nx.Graph(g)) or g.number_of_edges() != len(spheres) - 1:
        raise InadmissiblePairing("the pairing does not connect the spheres into a tree")
    roots = [j for j, S in spheres.items() if S.punctures[-1] not in partner]
    if len(roots) != 1:
        raise InadmissiblePairing("exactly one sphere must list an uncapped puncture last")
    root = roots[0]

    order: list[str] = []
    spans: dict[str, list] = {}

    def expand(j: str, came_from: str | None) -> None:
        labs = spheres[j].punctures
        if came_from is not None:
            if labs[-1] != came_from:
                raise InadmissiblePairing(f"cap {came_from} must be listed last on its sphere")
            labs = labs[:-1]
        for p in labs:
            if p in partner:
                q = partner[p]
                start = len(order) + 1
                expand(where[q], q)
                spans[q] = [where[q], start, len(order), p]
            else:
                order.append(p)

    expand(root, None)
    if len(order) != len(set(order)):
        raise InadmissiblePairing("glued sphere has repeated puncture labels")
    if len(order) < 3:
        raise InadmissiblePairing("glued sphere has fewer than three punctures")
    sphere = MarkedSphere(tuple(order))
    blocks, labels, children = {}, {}, {}
    for q, (child, a, b, p) in spans.items():
        name = q.split(":")[1] if q.startswith("cap:") and q.count(":") == 2 else child
        blocks[name] = (a, b)
        labels[name] = (q, p)
        children[name] = child
    try:
        tree = ConfigurationTree.from_blocks(sphere, blocks, root, labels, children)
    except NotStandardForm as exc:
        raise InadmissiblePairing(str(exc)) from exc
    for j, S in spheres.items():
        if tree.listing(j) != S.punctures:
            raise InadmissiblePairing(f"sphere {j} does not match its place in the glued tree")
    return tree


def _check_caps(tree: ConfigurationTree, pieces: Mapping[str, BranchedCoverRecursion]) -> None:
    ports = {j: portrait(f) for j, f in pieces.items()}
    caps = tree.caps()
    for e in tree.edges:
        imgs = []
        for label, node in ((e.in_label, e.child), (e.out_label, e.parent)):
            port = ports[node]
            imgs.append((port.image[label], port.local_degree[label]))
        (ia, da), (ib, db) = imgs
        if ia not in caps or ib not in caps:
            raise IncompatibleBoundaryDynamics(f"caps of {e.name} must map to caps")
        if caps[ia][0] != caps[ib][0] or caps[ia][1] == caps[ib][1]:
            raise IncompatibleBoundaryDynamics(f"caps of {e.name} map to {ia} and {ib}, not to one curve")
        if da != db:
            raise IncompatibleBoundaryDynamics(f"caps of {e.name} map with degrees {da} and {db}")


def combine(
    pieces: Mapping[str, BranchedCoverRecursion],
    pairing: Sequence[tuple[str, str]],
    degree: int | None = None,
    components: Mapping[str, Sequence[dict]] | None = None,
    annuli: Sequence[AnnulusRecord] | None = None,
) -> CombineResult:
    """Glue sphere maps along paired caps into one recursion.

    Over each region sit the pieces mapping onto it plus degree-one disks filling
    the rest of the degree.  Boundary cycles are matched either from ``annuli`` or
    automatically by length and conjugacy of the boundary loops.
    """
    tree = _glue_tree(pieces, pairing)
    nodes = tree.nodes()
    image = {}
    for j, f in pieces.items():
        try:
            image[j] = _node_of_sphere(tree, f.target)
        except KeyError:
            raise IncompatibleBoundaryDynamics(f"piece {j} maps to a sphere that is not part of the gluing") from None
    _check_caps(tree, pieces)
    if degree is None:
        degree = sum(f.degree for j, f in pieces.items() if image[j] == tree.root)

    # components over each region, as (kind, source) with their local degrees
    comps: dict[str, list[tuple[str, str | None]]] = {}
    for m in nodes:
        over = [j for j in nodes if image[j] == m]
        if components is not None and m in components:
            listed = [(c["kind"], c.get("source")) for c in components[m]]
            if sorted(s for k, s in listed if k == "piece") != sorted(over):
                raise IncompatibleBoundaryDynamics(f"component list over {m} disagrees with the pieces")
        else:
            listed = [("piece", j) for j in over]
            listed += [("trivial", None)] * (degree - sum(pieces[j].degree for j in over))
        if sum(pieces[s].degree if k == "piece" else 1 for k, s in listed) != degree:
            raise IncompatibleBoundaryDynamics(f"pieces over {m} exceed or miss the degree {degree}")
        comps[m] = listed

    def local_degree(m, k):
        kind, src = comps[m][k]
        return pieces[src].degree if kind == "piece" else 1

    n = tree.sphere.n
    beta: dict[tuple[str, int, int], int] = {}
    conn: dict[tuple[str, int, int], Word] = {}
    s = 0
    for k in range(len(comps[tree.root])):
        for ell in range(local_degree(tree.root, k)):
            beta[(tree.root, k, ell)] = s
            conn[(tree.root, k, ell)] = ()
            s += 1

    def act(m: str, k: int, ell: int, letter: int) -> tuple[int, Word]:
        """Local action of a region generator on component ``k``: (local sheet, big-sphere word)."""
        kind, src = comps[m][k]
        if kind == "trivial":
            return ell, ()
        e, u = pieces[src].step(letter, ell)
        return e, tree.embed(src, u)

    by_edge: dict[str, list[AnnulusRecord]] = {}
    for a in annuli or ():
        by_edge.setdefault(a.edge, []).append(a)

    queue = deque([tree.root])
    while queue:
        P = queue.popleft()
        for e in [e for e in tree.edges if e.parent == P]:
            C = e.child
            kpos = tree.listing(P).index(e.out_label) + 1
            inv_beta = {beta[(P, k, ell)]: (k, ell) for k in range(len(comps[P])) for ell in range(local_degree(P, k))}

            def parent_cycle(k0: int, l0: int):
                s1 = beta[(P, k0, l0)]
                sheets, words = [], []
                k, ell = k0, l0
                while True:
                    sheets.append(beta[(P, k, ell)])
                    e2, u = act(P, k, ell, kpos)
                    words.append(normal_form(conn[(P, k, ell)] + u + inverse(conn[(P, k, e2)]), n))
                    ell = e2
                    if beta[(P, k, ell)] == s1:
                        return sheets, words

            def child_cycle(k0: int, l0: int):
                locs, words = [], []
                ell = l0
                while True:
                    locs.append(ell)
                    ell, u = act(C, k0, ell, -tree.small_sphere(C).n)
                    words.append(u)
                    if ell == l0:
                        return locs, words

            ccycles = []
            for k in range(len(comps[C])):
                seen: set[int] = set()
                for ell in range(local_degree(C, k)):
                    if ell not in seen:
                        locs, words = child_cycle(k, ell)
                        seen.update(locs)
                        ccycles.append((k, locs, words))
            pairs = []
            if e.name in by_edge:
                for a in by_edge[e.name]:
                    k, ell = a.child
                    locs, words = child_cycle(k, ell)
                    pairs.append((a.parent, (k, locs, words)))
            else:
                done: set[int] = set()
                used: set[tuple[int, int]] = set()
                for s1 in sorted(inv_beta):
                    if s1 in done:
                        continue
                    kp, lp = inv_beta[s1]
                    sheets, words = parent_cycle(kp, lp)
                    done.update(sheets)
                    W = multiply(*words)
                    cands = [
                        c for c in ccycles
                        if (c[0], c[1][0]) not in used and len(c[1]) == len(sheets) and is_conjugate(multiply(*c[2]), W)
                    ]
                    if not W:
                        cands.sort(key=lambda c: comps[C][c[0]][0] != "trivial")
                    if not cands:
                        raise IncompatibleBoundaryDynamics(f"no boundary cycle below {e.name} matches sheet {s1}")
                    used.add((cands[0][0], cands[0][1][0]))
                    pairs.append(((kp, lp), cands[0]))
            for (kp, lp), (kc, locs, uwords) in pairs:
                sheets, wwords = parent_cycle(kp, lp)
                if len(sheets) != len(locs):
                    raise IncompatibleBoundaryDynamics(f"boundary cycles of {e.name} have different lengths")
                W, U = multiply(*wwords), multiply(*uwords)
                T = conjugator(U, W)
                if T is None:
                    raise IncompatibleBoundaryDynamics(f"boundary loops of {e.name} are not conjugate")
                t = normal_form(T, n)
                for i, ell in enumerate(locs):
                    if (C, kc, ell) in beta:
                        raise IncompatibleBoundaryDynamics(f"boundary cycle below {e.name} matched twice")
                    beta[(C, kc, ell)] = sheets[i]
                    conn[(C, kc, ell)] = t
                    t = normal_form(inverse(wwords[i]) + t + uwords[i], n)
            for k in range(len(comps[C])):
                for ell in range(local_degree(C, k)):
                    if (C, k, ell) not in beta:
                        raise IncompatibleBoundaryDynamics(f"sheet {ell} of a component below {e.name} is unmatched")
            queue.append(C)

    perms, lifts = [], []
    for label in tree.sphere.punctures:
        X, kpos = tree.home(label)
        inv_beta = {beta[(X, k, ell)]: (k, ell) for k in range(len(comps[X])) for ell in range(local_degree(X, k))}
        if sorted(inv_beta) != list(range(degree)):
            raise IncompatibleBoundaryDynamics(f"components over {X} do not cover every sheet once")
        prow, lrow = [], []
        for s in range(degree):
            k, ell = inv_beta[s]
            e2, u = act(X, k, ell, kpos)
            prow.append(beta[(X, k, e2)])
            lrow.append(normal_form(conn[(X, k, ell)] + u + inverse(conn[(X, k, e2)]), n))
        perms.append(tuple(prow))
        lifts.append(tuple(lrow))
    r = BranchedCoverRecursion(degree, tree.sphere, tree.sphere, tuple(perms), tuple(lifts))
    rep = validate(r)
    if not rep.ok:
        bad = [c.name for c in rep.checks if not c.ok]
        raise IncompatibleBoundaryDynamics(f"glued recursion fails validation: {bad}")
    gamma = tree.multicurve()
    ok, witness = is_stable(r, gamma)
    if not ok:
        raise IncompatibleBoundaryDynamics(f"glued multicurve is not invariant: {witness.curve}")
    return CombineResult(r, tree, gamma)


def combine_manifest(d: dict) -> CombineResult:
    try:
        pieces = {j: BranchedCoverRecursion.from_dict(p) for j, p in d["pieces"].items()}
        pairing = [tuple(p) for p in d["pairing"]]
        annuli = [AnnulusRecord.from_dict(a) for a in d["annuli"]] if "annuli" in d else None
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FixtureFormatError):
            raise
        raise FixtureFormatError(f"malformed manifest: {exc}") from exc
    return combine(pieces, pairing, d.get("degree"), d.get("components"), annuli)
