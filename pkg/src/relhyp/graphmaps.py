"""Marked graphs, graph self-maps, transition matrices and train track checks.

Edges are numbered ``0..E-1``; an oriented edge is ``k+1`` (along the
edge) or ``-(k+1)`` (against it), so edge paths are tuples of nonzero ints
and free reduction of paths is :func:`relhyp.words.reduce`.  The "direction"
of an oriented edge is its initial germ.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .subgroups import build_core
from .words import (Alphabet, Automorphism, Word, apply_images, cyclic_reduce, derive_inverse,
                    inverse, least_rotation, mul, reduce, word_key)

Path = tuple


class GraphMapError(ValueError):
    """Ill-formed graph map."""


class NotHomotopyEquivalenceError(ValueError):
    """The induced map on pi_1 is not invertible."""


@dataclass
class Graph:
    vertex_names: list[str]
    edge_names: list[str]
    ends: list[tuple[int, int]]  # (tail, head) per edge

    @property
    def num_vertices(self) -> int:
        return len(self.vertex_names)

    @property
    def num_edges(self) -> int:
        return len(self.edge_names)

    def tail(self, oe: int) -> int:
        t, h = self.ends[abs(oe) - 1]
        return t if oe > 0 else h

    def head(self, oe: int) -> int:
        return self.tail(-oe)

    def oriented_edges(self) -> list[int]:
        return [s * (k + 1) for k in range(self.num_edges) for s in (1, -1)]

    def edge_index(self, name: str) -> int:
        return self.edge_names.index(name)

    def parse_path(self, text: str) -> Path:
        out = []
        for tok in text.replace(",", " ").split():
            if tok == "1":
                continue
            sign = 1
            if tok.endswith("^-1"):
                tok, sign = tok[:-3], -1
            try:
                out.append(sign * (self.edge_names.index(tok) + 1))
            except ValueError:
                raise GraphMapError(f"unknown edge {tok!r}") from None
        return tuple(out)

    def format_path(self, p: Sequence[int]) -> str:
        if not p:
            return "1"
        return " ".join(self.edge_names[abs(x) - 1] + ("" if x > 0 else "^-1") for x in p)

    def is_path(self, p: Sequence[int]) -> bool:
        return all(self.head(p[i]) == self.tail(p[i + 1]) for i in range(len(p) - 1))

    def euler_characteristic(self) -> int:
        return self.num_vertices - self.num_edges

    def components(self, edges: Sequence[int] | None = None) -> list[tuple[set[int], set[int]]]:
        """Connected components (vertices, edges) of the subgraph on ``edges``.

        Only vertices incident to the chosen edges are included.
        """
        edges = range(self.num_edges) if edges is None else edges
        parent = {}

        def find(v):
            while parent.setdefault(v, v) != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for k in edges:
            t, h = self.ends[k]
            parent[find(t)] = find(h)
        groups: dict[int, tuple[set[int], set[int]]] = {}
        for k in edges:
            r = find(self.ends[k][0])
            vs, es = groups.setdefault(r, (set(), set()))
            vs.update(self.ends[k])
            es.add(k)
        return list(groups.values())


def spanning_tree(graph: Graph, root: int = 0, edges: Sequence[int] | None = None) -> dict[int, Path]:
    """Tree paths from ``root`` to every reachable vertex, BFS in edge order."""
    allowed = set(range(graph.num_edges) if edges is None else edges)
    paths = {root: ()}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for k in sorted(allowed):
            for oe in (k + 1, -(k + 1)):
                if graph.tail(oe) == v and graph.head(oe) not in paths:
                    paths[graph.head(oe)] = paths[v] + (oe,)
                    queue.append(graph.head(oe))
    return paths


def tree_edges(paths: dict[int, Path]) -> set[int]:
    return {abs(p[-1]) - 1 for p in paths.values() if p}


@dataclass
class GraphSelfMap:
    """A graph self-map with an invariant filtration and a marking.

    ``labels[k]`` is the F_n word read along edge ``k``; the marking is the
    induced map pi_1(graph, base) -> F_n.
    """

    graph: Graph
    vmap: list[int]
    images: list[Path]
    strata: list[list[int]]
    labels: list[Word]
    rank: int
    alphabet: Alphabet = None  # type: ignore[assignment]
    base: int = 0

    def __post_init__(self):
        if self.alphabet is None:
            self.alphabet = Alphabet.standard(self.rank)
        self.images = [tuple(reduce(p)) for p in self.images]
        self.validate()

    # -- structure

    def validate(self) -> None:
        g = self.graph
        for k, p in enumerate(self.images):
            if any(abs(x) > g.num_edges for x in p):
                raise GraphMapError(f"image of {g.edge_names[k]} uses unknown edges")
            if not g.is_path(p):
                raise GraphMapError(f"image of {g.edge_names[k]} is not an edge path")
            t, h = g.ends[k]
            if p:
                if g.tail(p[0]) != self.vmap[t] or g.head(p[-1]) != self.vmap[h]:
                    raise GraphMapError(f"image of {g.edge_names[k]} has wrong endpoints")
            elif self.vmap[t] != self.vmap[h]:
                raise GraphMapError(f"collapsed edge {g.edge_names[k]} joins distinct images")
        seen: set[int] = set()
        for level, stratum in enumerate(self.strata):
            seen |= set(stratum)
            for k in stratum:
                if any(abs(x) - 1 not in seen for x in self.images[k]):
                    raise GraphMapError(
                        f"filtration not invariant: image of {g.edge_names[k]} leaves level {level + 1}")
        if seen != set(range(g.num_edges)):
            raise GraphMapError("filtration must cover every edge exactly")

    def stratum_of(self, k: int) -> int:
        for i, s in enumerate(self.strata):
            if k in s:
                return i
        raise KeyError(k)

    def image(self, oe: int) -> Path:
        p = self.images[abs(oe) - 1]
        return p if oe > 0 else inverse(p)

    def apply_path(self, p: Sequence[int], cap: int = 10**7) -> Path:
        return apply_images(self.images, p, cap)

    def iterate_path(self, p: Sequence[int], t: int, cap: int = 10**7) -> Path:
        p = reduce(p)
        for _ in range(t):
            p = self.apply_path(p, cap)
        return p

    def compose(self, other: "GraphSelfMap") -> "GraphSelfMap":
        """self o other on the same graph."""
        images = [self.apply_path(p) for p in other.images]
        vmap = [self.vmap[v] for v in other.vmap]
        return GraphSelfMap(self.graph, vmap, images, self.strata, self.labels, self.rank,
                            self.alphabet, self.base)

    # -- marking

    def label(self, p: Sequence[int]) -> Word:
        out: list[int] = []
        for x in p:
            w = self.labels[abs(x) - 1]
            out.extend(w if x > 0 else inverse(w))
        return reduce(out)

    def loop_basis(self) -> tuple[dict[int, Path], list[int], list[Path]]:
        tree = spanning_tree(self.graph, self.base)
        if len(tree) != self.graph.num_vertices:
            raise GraphMapError("graph is not connected")
        t_edges = tree_edges(tree)
        non_tree = [k for k in range(self.graph.num_edges) if k not in t_edges]
        loops = []
        for k in non_tree:
            a, b = self.graph.ends[k]
            loops.append(reduce(tree[a] + (k + 1,) + inverse(tree[b])))
        return tree, non_tree, loops

    def check_marking(self) -> None:
        _, non_tree, loops = self.loop_basis()
        words = [self.label(p) for p in loops]
        if len(non_tree) != self.rank or not build_core(words).is_rose(self.rank):
            raise GraphMapError("marking is not an isomorphism onto F_n")

    def induced_automorphism(self, require_surjective: bool = True) -> Automorphism:
        """The automorphism of F_n induced at the base vertex (tree-corrected).

        With ``require_surjective=False`` an injective endomorphism is
        returned as well (no inverse attached).
        """
        self.check_marking()
        tree, non_tree, loops = self.loop_basis()
        basis = [self.label(p) for p in loops]
        u = self.label(tree[self.vmap[self.base]])
        phi_basis = [mul(u, self.label(self.apply_path(p)), inverse(u)) for p in loops]
        if require_surjective and not build_core(phi_basis).is_rose(self.rank):
            raise NotHomotopyEquivalenceError("induced map on pi_1 is not surjective")
        # basis[i] = mu(y_i); x_j = mu(mu^-1(x_j))
        mu = derive_inverse(Automorphism(self.rank, tuple(basis)), search_bound=64 * self.rank)
        images = tuple(apply_images(phi_basis, mu.inverse_images[j]) for j in range(self.rank))
        return Automorphism(self.rank, images, None, self.alphabet)

    def vertex_connectors(self, alpha: Automorphism | None = None) -> tuple[Automorphism, dict[int, Word]]:
        """Words tau_v with label(f(x)) = tau_tail^-1 alpha(label(x)) tau_head for every edge x."""
        phi = self.induced_automorphism(require_surjective=False)
        alpha = alpha or phi
        gens = [(i,) for i in range(1, self.rank + 1)]
        c = common_conjugator([phi(x) for x in gens], [alpha(x) for x in gens])
        if c is None:
            raise GraphMapError("map does not represent the given automorphism")
        tree, _, _ = self.loop_basis()
        u = self.label(tree[self.vmap[self.base]])
        # label(f(loop)) = u^-1 phi(label(loop)) u = (c u)^-1 alpha(label(loop)) (c u)
        tau0 = mul(c, u)
        taus = {}
        for v, p in tree.items():
            taus[v] = mul(inverse(alpha(self.label(p))), tau0, self.label(self.apply_path(p)))
        return alpha, taus

    # -- output

    def to_dot(self, name: str = "graphmap") -> str:
        g = self.graph
        lines = [f"digraph {name} {{"]
        for v, nm in enumerate(g.vertex_names):
            lines.append(f'  "{nm}";')
        for k, (t, h) in enumerate(g.ends):
            img = g.format_path(self.images[k])
            lines.append(f'  "{g.vertex_names[t]}" -> "{g.vertex_names[h]}" '
                         f'[label="{g.edge_names[k]} -> {img}"];')
        lines.append("}")
        return "\n".join(lines)


def rose_map(alpha: Automorphism, strata: list[list[int]] | None = None) -> GraphSelfMap:
    """The map on the rose R_n realising ``alpha`` letter by letter."""
    n = alpha.rank
    graph = Graph(["v"], list(alpha.alphabet.names), [(0, 0)] * n)
    images = [tuple(w) for w in alpha.images]
    if strata is None:
        strata = matrix_filtration(_count_matrix(images, n))
    return GraphSelfMap(graph, [0], images, strata, [(i + 1,) for i in range(n)], n, alpha.alphabet)


def _count_matrix(images: Sequence[Sequence[int]], n: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=np.int64)
    for j, p in enumerate(images):
        for x in p:
            m[abs(x) - 1, j] += 1
    return m


def strongly_connected_blocks(m: np.ndarray) -> list[list[int]]:
    """Blocks of j -> i (m[i, j] > 0), every block listed after the blocks it reaches."""
    n = m.shape[0]
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on: set[int] = set()
    stack: list[int] = []
    out: list[list[int]] = []

    def visit(v):
        index[v] = low[v] = len(index)
        stack.append(v)
        on.add(v)
        for u in np.nonzero(m[:, v])[0]:
            u = int(u)
            if u not in index:
                visit(u)
                low[v] = min(low[v], low[u])
            elif u in on:
                low[v] = min(low[v], index[u])
        if low[v] == index[v]:
            comp = []
            while True:
                u = stack.pop()
                on.discard(u)
                comp.append(u)
                if u == v:
                    break
            out.append(sorted(comp))

    for v in range(n):
        if v not in index:
            visit(v)
    return out


def matrix_filtration(m: np.ndarray) -> list[list[int]]:
    """Strata from the block triangular form, lowest stratum first."""
    return strongly_connected_blocks(m)


# ------------------------------------------------------------ representing


def common_conjugator(us: Sequence[Word], vs: Sequence[Word]) -> Word | None:
    """Shortlex least c with c u_i c^-1 = v_i for all i, or None."""
    pairs = [(reduce(u), reduce(v)) for u, v in zip(us, vs)]
    for u, v in pairs:
        if len(cyclic_reduce(u)[0]) != len(cyclic_reduce(v)[0]):
            return None
    nontrivial = [(u, v) for u, v in pairs if u]
    if any(not u and v for u, v in pairs):
        return None
    if not nontrivial:
        return ()
    u, v = nontrivial[0]
    uc, p = cyclic_reduce(u)
    vc, q = cyclic_reduce(v)
    root = _primitive_root(uc)
    bound = sum(len(a) + len(b) for a, b in pairs) // max(len(root), 1) + 2
    candidates = []
    for k in range(len(uc)):
        r = uc[:k]
        if uc[k:] + uc[:k] != vc:
            continue
        for j in range(-bound, bound + 1):
            c = mul(q, inverse(r), _pow(root, j), inverse(p))
            if all(mul(c, a, inverse(c)) == b for a, b in pairs):
                candidates.append(c)
    if not candidates:
        return None
    return min(candidates, key=word_key)


def _pow(w: Word, j: int) -> Word:
    if j < 0:
        return reduce(inverse(w) * -j)
    return reduce(w * j)


def _primitive_root(w: Word) -> Word:
    n = len(w)
    for d in range(1, n + 1):
        if n % d == 0 and w[:d] * (n // d) == w:
            return w[:d]
    return w


def verify_represents(f: GraphSelfMap, alpha: Automorphism) -> bool:
    """True iff f induces alpha up to one global conjugation."""
    phi = f.induced_automorphism()
    gens = [(i,) for i in range(1, alpha.rank + 1)]
    c = common_conjugator([phi(x) for x in gens], [alpha(x) for x in gens])
    return c is not None


# ------------------------------------------------------- transition data


def transition_matrix(f: GraphSelfMap, edges: Sequence[int] | None = None) -> np.ndarray:
    """m[i, j] = number of times f(e_j) crosses e_i or its inverse."""
    edges = list(range(f.graph.num_edges) if edges is None else edges)
    index = {k: i for i, k in enumerate(edges)}
    m = np.zeros((len(edges), len(edges)), dtype=np.int64)
    for j, k in enumerate(edges):
        for x in f.images[k]:
            i = index.get(abs(x) - 1)
            if i is not None:
                m[i, j] += 1
    return m


@dataclass
class StratumClass:
    kind: str  # "zero" | "polynomial-permutation" | "exponential" | "unclassified"
    pf_eigenvalue: float | None = None
    converged: bool = True
    charpoly_root: float | None = None
    steps: int = 0
    note: str = ""


def pf_eigenvalue(m: np.ndarray, tol: float = 1e-12, max_steps: int = 10_000) -> tuple[float, bool, int]:
    """Perron-Frobenius eigenvalue by power iteration on M + I.

    The shift makes irreducible matrices primitive, so the iteration
    converges even for periodic blocks.  Reducible matrices are split into
    strongly connected blocks first (power iteration on a Jordan-type
    reducible matrix converges only like 1/t).
    """
    blocks = strongly_connected_blocks(m)
    if len(blocks) > 1:
        best, ok, total = 0.0, True, 0
        for b in blocks:
            lam, conv, steps = pf_eigenvalue(m[np.ix_(b, b)], tol, max_steps)
            best, ok, total = max(best, lam), ok and conv, total + steps
        return best, ok, total
    n = m.shape[0]
    a = m.astype(float) + np.eye(n)
    v = np.ones(n) / n
    lam = 0.0
    for step in range(1, max_steps + 1):
        w = a @ v
        s = w.sum()
        if s == 0:
            return 0.0, True, step
        w /= s
        new = (a @ w).sum() / w.sum()
        if abs(new - lam) < tol and np.abs(w - v).max() < tol:
            return new - 1.0, True, step
        v, lam = w, new
    return lam - 1.0, False, max_steps


def charpoly_spectral_radius(m: np.ndarray) -> float:
    coeffs = np.poly(m.astype(float))
    roots = np.roots(np.round(coeffs))
    return float(max(abs(roots))) if len(roots) else 0.0


def _is_permutation(m: np.ndarray) -> bool:
    return bool((m.sum(axis=0) == 1).all() and (m.sum(axis=1) == 1).all() and ((m == 0) | (m == 1)).all())


def classify_strata(f: GraphSelfMap, tol: float = 1e-10, max_steps: int = 10_000) -> list[StratumClass]:
    out = []
    for stratum in f.strata:
        m = transition_matrix(f, stratum)
        out.append(classify_matrix(m, tol, max_steps))
    return out


def classify_matrix(m: np.ndarray, tol: float = 1e-10, max_steps: int = 10_000) -> StratumClass:
    if not m.any():
        return StratumClass("zero", 0.0)
    if _is_permutation(m):
        return StratumClass("polynomial-permutation", 1.0)
    lam, ok, steps = pf_eigenvalue(m, tol, max_steps)
    root = charpoly_spectral_radius(m) if m.shape[0] <= 4 else None
    if lam > 1 + 1e-6:
        note = ""
        if root is not None and abs(root - lam) > 1e-6:
            note = f"power iteration {lam} disagrees with characteristic polynomial {root}"
        return StratumClass("exponential", lam, ok, root, steps, note)
    return StratumClass("unclassified", lam, ok, root, steps,
                        "non-permutation stratum without exponential growth")


# ------------------------------------------------------------ turns / gates


@dataclass
class TurnData:
    df: dict[int, int]
    gates: list[frozenset[int]]
    gate_of: dict[int, int]
    illegal_turns: list[tuple[int, int]]

    def is_illegal(self, d1: int, d2: int) -> bool:
        return d1 != d2 and self.gate_of.get(d1) == self.gate_of.get(d2) and d1 in self.gate_of


def derivative(f: GraphSelfMap) -> dict[int, int]:
    """Df on directions; collapsed edges map to 0."""
    df = {}
    for oe in f.graph.oriented_edges():
        img = f.image(oe)
        df[oe] = img[0] if img else 0
    return df


def turn_analysis(f: GraphSelfMap, directions: Sequence[int] | None = None) -> TurnData:
    g = f.graph
    df = derivative(f)
    dirs = list(g.oriented_edges() if directions is None else directions)
    steps = len(df) + 1
    limit = {}
    for d in dirs:
        x = d
        for _ in range(steps):
            x = df.get(x, 0)
            if x == 0:
                break
        limit[d] = x
    gates: list[frozenset[int]] = []
    gate_of: dict[int, int] = {}
    by_vertex: dict[int, list[int]] = {}
    for d in dirs:
        by_vertex.setdefault(g.tail(d), []).append(d)
    for v in sorted(by_vertex):
        groups: dict[int, list[int]] = {}
        for d in by_vertex[v]:
            # identified iff some iterate agrees; iterates stabilise after #directions steps
            key = limit[d] if limit[d] != 0 else ("own", d)
            groups.setdefault(key, []).append(d)
        for members in groups.values():
            gate_of.update({d: len(gates) for d in members})
            gates.append(frozenset(members))
    illegal = []
    for gate in gates:
        ms = sorted(gate, key=lambda d: (abs(d), d < 0))
        for i in range(len(ms)):
            for j in range(i + 1, len(ms)):
                illegal.append((ms[i], ms[j]))
    return TurnData(df, gates, gate_of, illegal)


def path_turns(p: Sequence[int]) -> list[tuple[int, int]]:
    """Turns (incoming direction reversed, outgoing direction) of a path."""
    return [(-p[i], p[i + 1]) for i in range(len(p) - 1)]


# ------------------------------------------------- relative train tracks


@dataclass
class RelativeTTReport:
    passed: bool
    strata: list[StratumClass]
    failures: list[str] = field(default_factory=list)
    exact: list[bool] = field(default_factory=list)


def verify_relative_tt(f: GraphSelfMap, horizon: int = 12) -> RelativeTTReport:
    """Check properties (1)-(3) of a relative train track, stratum by stratum."""
    classes = classify_strata(f)
    turns = turn_analysis(f)
    failures: list[str] = []
    exact: list[bool] = []
    g = f.graph
    name = g.edge_names
    for level, (stratum, cls) in enumerate(zip(f.strata, classes), start=1):
        sset = set(stratum)
        if cls.kind == "exponential":
            ok_gate = True
            for k in stratum:
                img = f.images[k]
                for d1, d2 in path_turns(img):
                    if abs(d1) - 1 in sset and abs(d2) - 1 in sset and turns.is_illegal(d1, d2):
                        ok_gate = False
                        failures.append(f"stratum {level}: f({name[k]}) contains illegal turn "
                                        f"({g.format_path((d1,))}, {g.format_path((d2,))})")
                if not img or abs(img[0]) - 1 not in sset or abs(img[-1]) - 1 not in sset:
                    failures.append(f"stratum {level}: initial-segments condition fails on {name[k]}")
            exact.append(True)
            if ok_gate:
                # brute-force spot check: no stratum edges cancel in f^t(e)
                for k in stratum:
                    p = (k + 1,)
                    for t in range(1, horizon + 1):
                        raw = [x for y in p for x in f.image(y)]
                        q = reduce(raw)
                        if _count(raw, sset) != _count(q, sset):
                            failures.append(f"stratum {level}: cancellation in f^{t}({name[k]})")
                            break
                        p = q
                        if len(p) > 200_000:
                            break
        elif cls.kind == "zero":
            exact.append(True)
        elif cls.kind == "polynomial-permutation":
            exact.append(True)
            m = transition_matrix(f, stratum)
            perm = {stratum[j]: stratum[int(np.argmax(m[:, j]))] for j in range(len(stratum))}
            # transitivity
            start = stratum[0]
            orbit = {start}
            x = perm[start]
            while x not in orbit:
                orbit.add(x)
                x = perm[x]
            if orbit != sset:
                failures.append(f"stratum {level}: permutation of edges is not transitive")
        else:
            exact.append(False)
            failures.append(f"stratum {level}: {cls.note}")
    return RelativeTTReport(not failures, classes, failures, exact)


def _count(p: Sequence[int], edges: set[int]) -> int:
    return sum(1 for x in p if abs(x) - 1 in edges)


def cyclic_path_key(p: Sequence[int]) -> Path:
    return least_rotation(cyclic_reduce(reduce(p))[0])
