"""Stallings graphs of finitely generated subgroups of free groups.

Only what decomposition needs: fold a generating set, strip the hair to the
core, and find a conjugator carrying one subgroup onto another.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence

from .words import Word, free_reduce, inverse, multiply


class StallingsGraph:
    def __init__(self, generators: Iterable[Sequence[int]]):
        self.base = 0
        self.out: dict[int, dict[int, int]] = {0: {}}
        nxt = 1
        edges = []
        for w in generators:
            w = free_reduce(w)
            if not w:
                continue
            v = 0
            for k, a in enumerate(w):
                if k == len(w) - 1:
                    u = 0
                else:
                    u = nxt
                    nxt += 1
                    self.out[u] = {}
                edges.append((v, a, u))
                v = u
        self._fold(edges, nxt)

    def _fold(self, edges, nverts):
        parent = list(range(nverts))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        while True:
            out: dict[int, dict[int, int]] = {}
            merge = None
            for v, a, u in edges:
                v, u = find(v), find(u)
                for x, lab, y in ((v, a, u), (u, -a, v)):
                    cur = out.setdefault(x, {}).setdefault(lab, y)
                    if cur != y:
                        merge = (cur, y)
                        break
                if merge:
                    break
            if merge is None:
                break
            a1, b1 = merge
            parent[max(a1, b1)] = min(a1, b1)
        self.base = find(0)
        self.out = out
        self.out.setdefault(self.base, {})

    # -- queries --------------------------------------------------------------

    def vertices(self) -> list[int]:
        return sorted(self.out)

    def edge_count(self) -> int:
        return sum(1 for d in self.out.values() for a in d if a > 0)

    def contains(self, word: Sequence[int]) -> bool:
        v = self.base
        for a in free_reduce(word):
            v = self.out.get(v, {}).get(a)
            if v is None:
                return False
        return v == self.base

    def path_word(self, start: int, goal: int, allowed: set[int] | None = None) -> Word | None:
        prev: dict[int, tuple[int, int] | None] = {start: None}
        q = deque([start])
        while q:
            v = q.popleft()
            if v == goal:
                break
            for a, u in sorted(self.out[v].items()):
                if allowed is not None and u not in allowed:
                    continue
                if u not in prev:
                    prev[u] = (v, a)
                    q.append(u)
        if goal not in prev:
            return None
        letters = []
        v = goal
        while prev[v] is not None:
            p, a = prev[v]
            letters.append(a)
            v = p
        return tuple(reversed(letters))

    def core(self) -> tuple[set[int], int | None, Word]:
        """Core vertex set, the vertex where the hair meets it, and the hair word."""
        deg = {v: len(d) for v, d in self.out.items()}
        alive = {v for v in self.out if deg[v] > 0}
        q = deque(v for v in alive if deg[v] == 1)
        while q:
            v = q.popleft()
            if v not in alive or deg[v] != 1:
                continue
            alive.discard(v)
            for u in self.out[v].values():
                if u in alive:
                    deg[u] -= 1
                    if deg[u] == 1:
                        q.append(u)
        if not alive:
            return set(), None, ()
        if self.base in alive:
            return alive, self.base, ()
        # nearest core vertex along the hair
        best = None
        for v in sorted(alive):
            w = self.path_word(self.base, v)
            if w is not None and (best is None or len(w) < len(best[1])):
                best = (v, w)
        return alive, best[0], best[1]


def _based_isomorphic(G: StallingsGraph, core: set[int], u1: int, H: StallingsGraph, v: int) -> bool:
    mapping = {u1: v}
    q = deque([u1])
    while q:
        x = q.popleft()
        y = mapping[x]
        for a, x2 in G.out[x].items():
            if x2 not in core:
                continue
            y2 = H.out[y].get(a)
            if y2 is None:
                return False
            if x2 in mapping:
                if mapping[x2] != y2:
                    return False
            else:
                mapping[x2] = y2
                q.append(x2)
    if len(set(mapping.values())) != len(mapping):
        return False
    core_edges = sum(1 for x in core for a, y in G.out[x].items() if a > 0 and y in core)
    return len(mapping) == len(H.out) and core_edges == H.edge_count()


def conjugator_onto(K_gens: Iterable[Sequence[int]], H: StallingsGraph) -> Word | None:
    """Return ``c`` with ``<K_gens> == c H c^-1``, or ``None``.

    ``H`` must be a core graph (its basepoint has degree at least 2).
    """
    G = StallingsGraph(K_gens)
    core, u1, hair = G.core()
    if u1 is None:
        return None
    if len(core) != len(H.out):
        return None
    for v in H.vertices():
        if _based_isomorphic(G, core, u1, H, v):
            p = H.path_word(H.base, v)
            return multiply(hair, inverse(p))
    return None
