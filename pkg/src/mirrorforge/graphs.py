"""Stable graphs up to isomorphism, with automorphism counts."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations, product
from math import factorial


@dataclass(frozen=True)
class StableGraph:
    """genera[v]; mult[u][v] = number of edges u-v (loops on the diagonal); legs[j] = vertex of marking j+1."""

    genera: tuple
    mult: tuple
    legs: tuple
    aut: int

    @property
    def n_vertices(self) -> int:
        return len(self.genera)

    def edges(self) -> list[tuple[int, int]]:
        out = []
        V = self.n_vertices
        for u in range(V):
            for v in range(u, V):
                out.extend([(u, v)] * self.mult[u][v])
        return out

    def valence(self, v: int) -> int:
        loops = self.mult[v][v]
        return (sum(self.mult[v][u] for u in range(self.n_vertices) if u != v) + 2 * loops
                + sum(1 for x in self.legs if x == v))

    def dim(self, v: int) -> int:
        return 3 * self.genera[v] - 3 + self.valence(v)

    @property
    def genus(self) -> int:
        return sum(self.genera) + len(self.edges()) - self.n_vertices + 1

    def to_dict(self) -> dict:
        return {"genera": list(self.genera), "edges": [list(e) for e in self.edges()],
                "legs": {str(j + 1): v for j, v in enumerate(self.legs)}, "aut": self.aut}


def _connected(mult, V) -> bool:
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in range(V):
            if v not in seen and mult[u][v]:
                seen.add(v)
                stack.append(v)
    return len(seen) == V


def _permute(genera, mult, legs, perm):
    # perm[old] = new
    V = len(genera)
    inv = [0] * V
    for old, new in enumerate(perm):
        inv[new] = old
    g2 = tuple(genera[inv[i]] for i in range(V))
    m2 = tuple(tuple(mult[inv[i]][inv[j]] for j in range(V)) for i in range(V))
    l2 = tuple(perm[x] for x in legs)
    return g2, m2, l2


def _edge_matrices(V: int, E: int):
    slots = [(u, v) for u in range(V) for v in range(u, V)]

    def rec(i, left):
        if i == len(slots):
            if left == 0:
                yield {}
            return
        for c in range(left + 1):
            for rest in rec(i + 1, left - c):
                d = dict(rest)
                if c:
                    d[slots[i]] = c
                yield d

    for d in rec(0, E):
        m = [[0] * V for _ in range(V)]
        for (u, v), c in d.items():
            m[u][v] = m[v][u] = c
        yield tuple(tuple(r) for r in m)


class GraphRangeError(ValueError):
    pass


@lru_cache(maxsize=None)
def enumerate_stable_graphs(g: int, n: int, g_max: int = 2) -> tuple[StableGraph, ...]:
    if g < 0 or n < 0 or 2 * g - 2 + n <= 0:
        raise GraphRangeError(f"(g, n) = ({g}, {n}) is unstable")
    if g > g_max:
        raise GraphRangeError(f"genus {g} exceeds the configured maximum {g_max}")
    found: dict = {}
    for V in range(1, 2 * g - 2 + n + 1):
        for genera in product(range(g + 1), repeat=V):
            E = g - sum(genera) + V - 1
            if E < V - 1:
                continue
            for mult in _edge_matrices(V, E):
                if not _connected(mult, V):
                    continue
                for legs in product(range(V), repeat=n):
                    if not all(2 * genera[v] - 2 + _val(mult, legs, v) > 0 for v in range(V)):
                        continue
                    canon = min(_permute(genera, mult, legs, p) for p in permutations(range(V)))
                    if canon not in found:
                        found[canon] = _aut(*canon)
    return tuple(StableGraph(gg, m, l, a) for (gg, m, l), a in sorted(found.items()))


def _val(mult, legs, v) -> int:
    V = len(mult)
    return sum(mult[v][u] for u in range(V) if u != v) + 2 * mult[v][v] + sum(1 for x in legs if x == v)


def _aut(genera, mult, legs) -> int:
    V = len(genera)
    fixed = sum(1 for p in permutations(range(V)) if _permute(genera, mult, legs, p) == (genera, mult, legs))
    edge_part = 1
    for u in range(V):
        edge_part *= factorial(mult[u][u]) * 2 ** mult[u][u]
        for v in range(u + 1, V):
            edge_part *= factorial(mult[u][v])
    return fixed * edge_part
