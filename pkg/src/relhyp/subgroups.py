"""Stallings core graphs of finitely generated subgroups of F_n.

A core graph is a folded automaton: ``out[v]`` maps a letter (``+i`` or
``-i``) to the target vertex, and every edge is stored in both
directions.  Vertex 0 is the basepoint unless the graph is basepoint free.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

from .words import Alphabet, Word, cyclic_reduce, inverse, mul, reduce, word_key


@dataclass
class CoreGraph:
    out: list[dict[int, int]]
    basepoint: int | None = 0
    generators: tuple[Word, ...] = ()
    folded: bool = True

    @property
    def num_vertices(self) -> int:
        return len(self.out)

    def edges(self) -> list[tuple[int, int, int]]:
        """Positively labelled edges (u, x, v)."""
        return [(u, x, v) for u, d in enumerate(self.out) for x, v in sorted(d.items()) if x > 0]

    @property
    def num_edges(self) -> int:
        return len(self.edges())

    def degree(self, v: int) -> int:
        return len(self.out[v])

    def betti(self) -> int:
        comps = len(_components(self.out))
        return self.num_edges - self.num_vertices + comps

    def is_trivial(self) -> bool:
        return self.num_edges == 0

    def rank(self) -> int:
        return self.betti()

    def is_rose(self, rank: int) -> bool:
        """True iff the subgroup is all of F_rank."""
        return (self.num_vertices == 1
                and set(self.out[0]) == {s * i for i in range(1, rank + 1) for s in (1, -1)})

    def read(self, w: Sequence[int], start: int | None = None) -> tuple[int, int]:
        """Follow ``w`` from ``start``; return (vertex reached, letters read)."""
        v = self.basepoint if start is None else start
        for k, x in enumerate(w):
            nxt = self.out[v].get(x)
            if nxt is None:
                return v, k
            v = nxt
        return v, len(w)

    def spanning_paths(self, root: int | None = None) -> dict[int, Word]:
        """Shortlex-least path label from ``root`` to every vertex."""
        root = self.basepoint if root is None else root
        paths = {root: ()}
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for x in sorted(self.out[v], key=lambda y: (abs(y), y < 0)):
                u = self.out[v][x]
                if u not in paths:
                    paths[u] = paths[v] + (x,)
                    queue.append(u)
        return paths

    def free_generators(self) -> list[Word]:
        """A free basis read off a spanning tree at the basepoint."""
        root = self.basepoint
        paths = {root: ()}
        tree = set()
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for x in sorted(self.out[v], key=lambda y: (abs(y), y < 0)):
                u = self.out[v][x]
                if u not in paths:
                    paths[u] = paths[v] + (x,)
                    tree.add((v, x))
                    tree.add((u, -x))
                    queue.append(u)
        gens = []
        for u, x, v in self.edges():
            if (u, x) not in tree:
                gens.append(mul(paths[u], (x,), inverse(paths[v])))
        return gens

    def to_dot(self, alphabet: Alphabet | None = None, name: str = "core") -> str:
        alphabet = alphabet or Alphabet.standard(max([abs(x) for _, x, _ in self.edges()] + [1]))
        lines = [f"digraph {name} {{"]
        for v in range(self.num_vertices):
            shape = "doublecircle" if v == self.basepoint else "circle"
            lines.append(f"  v{v} [shape={shape}];")
        for u, x, v in self.edges():
            lines.append(f'  v{u} -> v{v} [label="{alphabet.names[x - 1]}"];')
        lines.append("}")
        return "\n".join(lines)


def _components(out: list[dict[int, int]]) -> list[set[int]]:
    seen: set[int] = set()
    comps = []
    for s in range(len(out)):
        if s in seen:
            continue
        comp = {s}
        stack = [s]
        while stack:
            v = stack.pop()
            for u in out[v].values():
                if u not in comp:
                    comp.add(u)
                    stack.append(u)
        seen |= comp
        comps.append(comp)
    return comps


def _fold(n: int, edges: list[tuple[int, int, int]]) -> tuple[list[dict[int, int]], list[int]]:
    """Stallings folding by union-find; returns (adjacency, vertex relabelling)."""
    parent = list(range(n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    out: list[dict[int, int]] = [dict() for _ in range(n)]
    work: deque = deque()
    for u, x, v in edges:
        work.append((u, x, v))
    while work:
        u, x, v = work.popleft()
        u, v = find(u), find(v)
        for a, y, b in ((u, x, v), (v, -x, u)):
            c = out[a].get(y)
            if c is None:
                out[a][y] = b
            else:
                c = find(c)
                if c != b:
                    # merge c and b; the smaller index survives
                    keep, gone = min(c, b), max(c, b)
                    parent[gone] = keep
                    for z, t in out[gone].items():
                        work.append((keep, z, t))
                    out[gone] = {}
                    out[a][y] = keep
    # normalise targets
    live = sorted({find(v) for v in range(n)})
    index = {v: i for i, v in enumerate(live)}
    result: list[dict[int, int]] = [dict() for _ in live]
    for v in live:
        for x, t in out[v].items():
            result[index[v]][x] = index[find(t)]
    return result, [index[find(v)] for v in range(n)]


def _trim(out: list[dict[int, int]], keep: int | None) -> tuple[list[dict[int, int]], dict[int, int]]:
    """Remove hanging trees (degree-1 vertices other than ``keep``)."""
    alive = set(range(len(out)))
    deg = {v: len(out[v]) for v in alive}
    stack = [v for v in alive if deg[v] <= 1 and v != keep]
    while stack:
        v = stack.pop()
        if v not in alive:
            continue
        alive.discard(v)
        for u in out[v].values():
            if u in alive:
                deg[u] -= 1
                if deg[u] <= 1 and u != keep:
                    stack.append(u)
    order = sorted(alive, key=lambda v: (v != keep, v))
    index = {v: i for i, v in enumerate(order)}
    new = [{x: index[t] for x, t in out[v].items() if t in alive} for v in order]
    return new, index


def build_core(generators: Iterable[Sequence[int]]) -> CoreGraph:
    """Folded based core graph of the subgroup generated by ``generators``."""
    gens = tuple(w for w in (reduce(g) for g in generators) if w)
    edges = []
    n = 1
    for w in gens:
        prev = 0
        for k, x in enumerate(w):
            nxt = 0 if k == len(w) - 1 else n
            if nxt:
                n += 1
            if x > 0:
                edges.append((prev, x, nxt))
            else:
                edges.append((nxt, -x, prev))
            prev = nxt
    out, _ = _fold(n, edges)
    out, _ = _trim(out, keep=0)
    return CoreGraph(out, 0, gens)


def basepoint_free(core: CoreGraph) -> CoreGraph:
    out, _ = _trim(core.out, keep=None)
    return CoreGraph(out, None, core.generators)


def contains(core: CoreGraph, w: Sequence[int]) -> bool:
    w = reduce(w)
    v, k = core.read(w)
    return k == len(w) and v == core.basepoint


def conjugate_into(core: CoreGraph, w: Sequence[int]) -> bool:
    """True iff some conjugate of ``w`` lies in the subgroup."""
    c, _ = cyclic_reduce(reduce(w))
    if not c:
        return True
    free = basepoint_free(core)
    for v in range(free.num_vertices):
        end, k = free.read(c, v)
        if k == len(c) and end == v:
            return True
    return False


def conjugator_into(core: CoreGraph, w: Sequence[int]) -> Word | None:
    """Some g with g w g^-1 in H, or None."""
    w = reduce(w)
    c, p = cyclic_reduce(w)
    if not c:
        return ()
    paths = core.spanning_paths()
    for v in sorted(paths, key=lambda u: word_key(paths[u])):
        end, k = core.read(c, v)
        if k == len(c) and end == v:
            # paths[v] c paths[v]^-1 in H, and c = p^-1 w p
            return mul(paths[v], inverse(p))
    return None


def subgroup_contains(big: CoreGraph, gens: Iterable[Sequence[int]]) -> bool:
    return all(contains(big, g) for g in gens)


def same_subgroup(a: CoreGraph, b: CoreGraph) -> bool:
    return subgroup_contains(a, b.generators) and subgroup_contains(b, a.generators)


def rebase(core: CoreGraph, v: int) -> tuple[Word, list[Word]]:
    """Generators of ``p^-1 H p`` where ``p`` labels a path base -> v."""
    p = core.spanning_paths()[v]
    return p, [mul(inverse(p), g, p) for g in core.generators]


def find_conjugator(target: CoreGraph, source: CoreGraph) -> Word | None:
    """Return h with target = h source h^-1, or None.

    Exhaustive over vertex pairs of the two based cores, so exact.
    """
    if target.betti() != source.betti():
        return None
    src_paths = source.spanning_paths()
    tgt_paths = target.spanning_paths()
    found = []
    for x in range(source.num_vertices):
        px = src_paths[x]
        src_gens = [mul(inverse(px), g, px) for g in source.generators]
        src_core = build_core(src_gens)
        for y in range(target.num_vertices):
            py = tgt_paths[y]
            tgt_gens = [mul(inverse(py), g, py) for g in target.generators]
            if subgroup_contains(src_core, tgt_gens) and subgroup_contains(build_core(tgt_gens), src_gens):
                found.append(mul(py, inverse(px)))
    if not found:
        return None
    return min(found, key=word_key)


def conjugate_subgroup_into(small: CoreGraph, big: CoreGraph) -> Word | None:
    """g with g small g^-1 <= big, searched over vertex pairs; None if none."""
    if small.is_trivial():
        return ()
    s_paths = small.spanning_paths()
    b_paths = big.spanning_paths()
    best = None
    for x in range(small.num_vertices):
        px = s_paths[x]
        gens = [mul(inverse(px), g, px) for g in small.generators]
        for y in range(big.num_vertices):
            ok = True
            for g in gens:
                end, k = big.read(g, y)
                if k != len(g) or end != y:
                    ok = False
                    break
            if ok:
                g = mul(b_paths[y], inverse(px))
                if best is None or word_key(g) < word_key(best):
                    best = g
    return best


# ------------------------------------------------------------ fiber products


@dataclass
class ProductComponent:
    vertices: list[tuple[int, int]]
    betti: int
    diagonal: bool
    witness: Word


def fiber_product(a: CoreGraph, b: CoreGraph) -> list[ProductComponent]:
    """Components of the pullback of two immersions, with witnesses.

    For a component containing (x, y) with path labels p_x, p_y from the
    basepoints, ``g = p_x p_y^-1`` satisfies g^-1 H_a g ∩ H_b != 1 when the
    component has positive Betti number.
    """
    pa = a.spanning_paths()
    pb = b.spanning_paths()
    seen: set[tuple[int, int]] = set()
    comps = []
    for start in product(range(a.num_vertices), range(b.num_vertices)):
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        queue = deque([start])
        n_edges = 0
        while queue:
            x, y = queue.popleft()
            for lab, x2 in a.out[x].items():
                y2 = b.out[y].get(lab)
                if y2 is None:
                    continue
                if lab > 0:
                    n_edges += 1
                if (x2, y2) not in seen:
                    seen.add((x2, y2))
                    comp.append((x2, y2))
                    queue.append((x2, y2))
        betti = n_edges - len(comp) + 1
        diagonal = a is b and all(x == y for x, y in comp)
        witnesses = [mul(pa[x], inverse(pb[y])) for x, y in comp]
        comps.append(ProductComponent(comp, betti, diagonal, min(witnesses, key=word_key)))
    return comps


@dataclass
class MalnormalReport:
    malnormal: bool
    violations: list[tuple[int, int, Word]] = field(default_factory=list)

    def lines(self, alphabet: Alphabet) -> list[str]:
        if self.malnormal:
            return ["MALNORMAL"]
        return [f"NOT MALNORMAL, witness g={alphabet.format(g)} (H{i + 1}, H{j + 1})"
                for i, j, g in self.violations]


def malnormal_report(family: Sequence[CoreGraph]) -> MalnormalReport:
    """Check g^-1 H_i g ∩ H_j = 1 except for i = j and g in H_i."""
    violations = []
    for i, hi in enumerate(family):
        if hi.is_trivial():
            continue
        for j, hj in enumerate(family):
            if hj.is_trivial():
                continue
            for comp in fiber_product(hi, hj if i != j else hi):
                if comp.betti <= 0:
                    continue
                if i == j and (0, 0) in comp.vertices:
                    continue
                violations.append((i, j, comp.witness))
    return MalnormalReport(not violations, violations)


# --------------------------------------------------------- rational subsets


class RationalAutomaton:
    """Finite automaton over F_n letters with Benois saturation.

    After :meth:`saturate`, a reduced word is the free reduction of some
    accepted word iff it is accepted directly (with epsilon moves).
    """

    def __init__(self):
        self.n = 0
        self.delta: list[dict[int, set[int]]] = []
        self.eps: list[set[int]] = []
        self._closure: list[frozenset[int]] | None = None

    def add_state(self) -> int:
        self.delta.append({})
        self.eps.append(set())
        self.n += 1
        return self.n - 1

    def add_edge(self, p: int, x: int, q: int) -> None:
        self.delta[p].setdefault(x, set()).add(q)
        self._closure = None

    def add_eps(self, p: int, q: int) -> None:
        self.eps[p].add(q)
        self._closure = None

    def add_word(self, p: int, w: Sequence[int], q: int) -> None:
        """Chain of fresh states reading ``w`` from p to q."""
        if not w:
            self.add_eps(p, q)
            return
        cur = p
        for k, x in enumerate(w):
            nxt = q if k == len(w) - 1 else self.add_state()
            self.add_edge(cur, x, nxt)
            cur = nxt

    def add_graph(self, core: CoreGraph, entry: int, exit_: int) -> None:
        """Glue a core graph between entry and exit via its basepoint."""
        offset = [self.add_state() for _ in range(core.num_vertices)]
        for u, d in enumerate(core.out):
            for x, v in d.items():
                self.add_edge(offset[u], x, offset[v])
        self.add_eps(entry, offset[core.basepoint])
        self.add_eps(offset[core.basepoint], exit_)

    def closure(self) -> list[frozenset[int]]:
        if self._closure is None:
            res = []
            for s in range(self.n):
                seen = {s}
                stack = [s]
                while stack:
                    v = stack.pop()
                    for u in self.eps[v]:
                        if u not in seen:
                            seen.add(u)
                            stack.append(u)
                res.append(frozenset(seen))
            self._closure = res
        return self._closure

    def saturate(self) -> None:
        changed = True
        while changed:
            changed = False
            clo = self.closure()
            # in_edges[q][x] = states p with p -x-> q
            for p in range(self.n):
                for x, targets in list(self.delta[p].items()):
                    for p2 in list(targets):
                        for q2 in clo[p2]:
                            for q in self.delta[q2].get(-x, ()):
                                if q not in clo[p] and q not in self.eps[p]:
                                    self.eps[p].add(q)
                                    self._closure = None
                                    changed = True
                        if self._closure is None:
                            clo = self.closure()

    def accepts(self, w: Sequence[int], start: int, final: int) -> bool:
        clo = self.closure()
        cur = set(clo[start])
        for x in w:
            nxt = set()
            for p in cur:
                for q in self.delta[p].get(x, ()):
                    nxt |= clo[q]
            if not nxt:
                return False
            cur = nxt
        return final in cur


def product_automaton(factors: int, rank: int, family: Sequence[CoreGraph],
                      letters: Sequence[Word] | None = None) -> tuple[RationalAutomaton, int, int]:
    """Automaton for products of at most ``factors`` elements of S^±1 ∪ ⋃H_i."""
    if letters is None:
        letters = [(s * i,) for i in range(1, rank + 1) for s in (1, -1)]
    aut = RationalAutomaton()
    start = aut.add_state()
    cur = start
    for _ in range(factors):
        nxt = aut.add_state()
        aut.add_eps(cur, nxt)
        for w in letters:
            aut.add_word(cur, w, nxt)
        for core in family:
            if not core.is_trivial():
                aut.add_graph(core, cur, nxt)
        cur = nxt
    aut.saturate()
    return aut, start, cur


class WeightedAutomaton:
    """Automaton with nonnegative integer weights, read modulo free reduction.

    :meth:`saturate` computes for every pair of states the least weight of a
    path whose label freely reduces to the empty word; afterwards
    :meth:`shortest` returns the least weight of a path whose label reduces
    to a given reduced word.
    """

    INF = float("inf")

    def __init__(self):
        self.n = 0
        self.out: list[dict[int, dict[int, int]]] = []  # out[p][x][q] = weight
        self.eps: dict[tuple[int, int], int] = {}
        self.dist: list[list[float]] | None = None

    def add_state(self) -> int:
        self.out.append({})
        self.n += 1
        self.dist = None
        return self.n - 1

    def add_edge(self, p: int, x: int, q: int, weight: int = 0) -> None:
        row = self.out[p].setdefault(x, {})
        row[q] = min(weight, row.get(q, weight))
        self.dist = None

    def add_eps(self, p: int, q: int, weight: int = 0) -> None:
        self.eps[p, q] = min(weight, self.eps.get((p, q), weight))
        self.dist = None

    def add_word(self, p: int, w: Sequence[int], q: int, weight: int = 0, both_ways: bool = False) -> None:
        """Chain reading ``w`` from p to q; the weight sits on the first step."""
        if not w:
            self.add_eps(p, q, weight)
            if both_ways:
                self.add_eps(q, p, weight)
            return
        cur = p
        states = [p] + [self.add_state() for _ in range(len(w) - 1)] + [q]
        for k, x in enumerate(w):
            wt = weight if k == 0 else 0
            self.add_edge(states[k], x, states[k + 1], wt)
            if both_ways:
                self.add_edge(states[k + 1], -x, states[k], wt)
            cur = states[k + 1]

    def add_graph(self, core: CoreGraph, entry: int, exit_: int, enter_weight: int = 1) -> None:
        offset = [self.add_state() for _ in range(core.num_vertices)]
        for u, d in enumerate(core.out):
            for x, v in d.items():
                self.add_edge(offset[u], x, offset[v], 0)
        self.add_eps(entry, offset[core.basepoint], enter_weight)
        self.add_eps(offset[core.basepoint], exit_, 0)

    def saturate(self) -> list[list[float]]:
        n, inf = self.n, self.INF
        d = [[inf] * n for _ in range(n)]
        for p in range(n):
            d[p][p] = 0
        for (p, q), w in self.eps.items():
            d[p][q] = min(d[p][q], w)
        # letter edges grouped for the wrapping rule p -x-> p' ~> q' -x^-1-> q
        incoming: dict[int, list[tuple[int, int, int]]] = {}
        for q2, row in enumerate(self.out):
            for x, targets in row.items():
                for q, w in targets.items():
                    incoming.setdefault(x, []).append((q2, q, w))
        changed = True
        while changed:
            changed = False
            _floyd(d)
            for p, row in enumerate(self.out):
                for x, targets in row.items():
                    back = incoming.get(-x, ())
                    for p2, w1 in targets.items():
                        dp2 = d[p2]
                        for q2, q, w2 in back:
                            c = w1 + dp2[q2] + w2
                            if c < d[p][q]:
                                d[p][q] = c
                                changed = True
        self.dist = d
        return d

    def shortest(self, w: Sequence[int], start: int, final: int) -> float:
        import numpy as np

        d = self.dist if self.dist is not None else self.saturate()
        dm = np.array(d, dtype=float)
        cur = dm[start].copy()
        for x in w:
            nxt = np.full(self.n, np.inf)
            for p in np.nonzero(np.isfinite(cur))[0]:
                cp = cur[p]
                for q, wt in self.out[p].get(x, {}).items():
                    if cp + wt < nxt[q]:
                        nxt[q] = cp + wt
            live = np.isfinite(nxt)
            if not live.any():
                return self.INF
            cur = (nxt[live][:, None] + dm[live]).min(axis=0)
        v = cur[final]
        return int(v) if np.isfinite(v) else self.INF


def _floyd(d: list[list[float]]) -> None:
    n = len(d)
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            if dik == float("inf"):
                continue
            di = d[i]
            for j in range(n):
                if dik + dk[j] < di[j]:
                    di[j] = dik + dk[j]
