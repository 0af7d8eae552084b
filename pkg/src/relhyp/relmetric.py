"""Relative word length, coned-off Cayley graph balls and the mapping torus.

Weights in a coned ball are stored doubled: a generator edge has weight 2
and a cone edge weight 1, so half-length cone edges stay integral.
"""

from __future__ import annotations

import csv
import heapq
import io
import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

from .subgroups import CoreGraph, WeightedAutomaton, build_core, contains, find_conjugator
from .words import Automorphism, Word, inverse, mul, reduce, word_key


class BallCapError(RuntimeError):
    def __init__(self, size: int, cap: int, radius_reached: float):
        super().__init__(f"ball has more than {cap} vertices (reached {size} at coned radius {radius_reached})")
        self.size, self.cap, self.radius_reached = size, cap, radius_reached


# ------------------------------------------------------------ rel length


@dataclass(frozen=True)
class RelLength:
    value: int
    certified: bool


class RelLengthOracle:
    """|w|_{S,H}: least number of factors from S^{+-1} and the H_i spelling w.

    A hub state carries a loop for every generator (weight 1); each H_i is
    a copy of its core graph entered with weight 1 and left for free.  The
    least weight of a path whose label freely reduces to w is the answer.
    """

    def __init__(self, rank: int, family: Sequence[CoreGraph] = ()):
        self.rank = rank
        self.family = list(family)
        aut = WeightedAutomaton()
        hub = aut.add_state()
        for i in range(1, rank + 1):
            aut.add_edge(hub, i, hub, 1)
            aut.add_edge(hub, -i, hub, 1)
        for core in self.family:
            if not core.is_trivial():
                aut.add_graph(core, hub, hub, enter_weight=1)
        aut.saturate()
        self.aut, self.hub = aut, hub
        self._cache: dict[Word, int] = {}

    def __call__(self, w: Sequence[int]) -> int:
        w = reduce(w)
        v = self._cache.get(w)
        if v is None:
            v = int(self.aut.shortest(w, self.hub, self.hub))
            self._cache[w] = v
        return v


def rel_length(w: Sequence[int], rank: int, family: Sequence[CoreGraph] = (),
               oracle: RelLengthOracle | None = None) -> RelLength:
    """Exact relative length.  Always certified: the automaton is exact."""
    oracle = oracle or RelLengthOracle(rank, family)
    return RelLength(oracle(w), True)


# ---------------------------------------------------------- mapping torus


@dataclass(frozen=True)
class MTElement:
    """t^t_exp . tail in F_n semidirect Z with t x t^-1 = alpha(x)."""

    t_exp: int
    tail: Word = ()

    def __post_init__(self):
        object.__setattr__(self, "tail", reduce(self.tail))

    def format(self, alphabet) -> str:
        return f"t^{self.t_exp} {alphabet.format(self.tail)}".strip()


def _alpha_power(alpha: Automorphism, w: Word, k: int) -> Word:
    if not w or k == 0:
        return reduce(w)
    f = alpha if k > 0 else alpha.inverse()
    for _ in range(abs(k)):
        w = f(w)
    return w


def mt_mul(x: MTElement, y: MTElement, alpha: Automorphism) -> MTElement:
    """(t^a u)(t^b v) = t^(a+b) alpha^-b(u) v."""
    return MTElement(x.t_exp + y.t_exp, mul(_alpha_power(alpha, x.tail, -y.t_exp), y.tail))


def mt_inv(x: MTElement, alpha: Automorphism) -> MTElement:
    """(t^a u)^-1 = t^-a alpha^a(u^-1)."""
    return MTElement(-x.t_exp, _alpha_power(alpha, inverse(x.tail), x.t_exp))


def mt_pow(x: MTElement, k: int, alpha: Automorphism) -> MTElement:
    base = x if k >= 0 else mt_inv(x, alpha)
    out = MTElement(0)
    for _ in range(abs(k)):
        out = mt_mul(out, base, alpha)
    return out


def mt_prod(xs: Iterable[MTElement], alpha: Automorphism) -> MTElement:
    out = MTElement(0)
    for x in xs:
        out = mt_mul(out, x, alpha)
    return out


class MTSubgroupError(ValueError):
    pass


@dataclass
class MTSubgroup:
    """H^alpha = <H, h^-1 t^m> with alpha^m(H) = h H h^-1."""

    base: CoreGraph
    m: int
    h: Word

    def stable_letter(self, alpha: Automorphism) -> MTElement:
        # h^-1 t^m = t^m alpha^-m(h^-1)
        return MTElement(self.m, _alpha_power(alpha, inverse(self.h), -self.m))

    def verify(self, alpha: Automorphism) -> None:
        if self.m < 1:
            raise MTSubgroupError("m must be positive")
        am = alpha.power(self.m)
        for g in self.base.generators:
            if not contains(self.base, mul(inverse(self.h), am(g), self.h)):
                raise MTSubgroupError("alpha^m(H) is not contained in h H h^-1")
        img = build_core([am(g) for g in self.base.generators])
        c = find_conjugator(img, self.base)
        if c is None:
            raise MTSubgroupError("alpha^m(H) is not conjugate to H")

    def generators(self, alpha: Automorphism) -> list[MTElement]:
        return [MTElement(0, g) for g in self.base.generators] + [self.stable_letter(alpha)]


def mt_member(g: MTElement, H: MTSubgroup, alpha: Automorphism) -> bool:
    if g.t_exp % H.m:
        return False
    s = H.stable_letter(alpha)
    x = mt_mul(mt_pow(s, -(g.t_exp // H.m), alpha), g, alpha)
    return x.t_exp == 0 and contains(H.base, x.tail)


def mt_member_bruteforce(g: MTElement, H: MTSubgroup, alpha: Automorphism, max_factors: int = 6) -> bool:
    """Search products of at most ``max_factors`` generators of H^alpha and inverses."""
    gens = H.generators(alpha)
    gens = gens + [mt_inv(x, alpha) for x in gens]
    seen = {MTElement(0)}
    frontier = [MTElement(0)]
    for _ in range(max_factors):
        nxt = []
        for x in frontier:
            for y in gens:
                z = mt_mul(x, y, alpha)
                if z not in seen:
                    seen.add(z)
                    nxt.append(z)
        frontier = nxt
    return g in seen


# ------------------------------------------------------------ coned balls


def coset_name(g: Sequence[int], core: CoreGraph) -> Word:
    """Canonical name of the left coset gH: the inverse of the shortest
    element of H g^-1, read through the core graph."""
    y = inverse(reduce(g))
    v, k = core.read(y, core.basepoint)
    t_v = core.spanning_paths()[v]
    return inverse(reduce(t_v + y[k:]))


@dataclass
class ConedBall:
    center: Hashable
    radius: int
    vertices: list[Hashable]
    kinds: list[str]  # "element" | "cone"
    adj: list[dict[int, int]]  # doubled weights
    dist: list[int]  # doubled distance from the center
    abs_cap: int
    truncated: bool
    index: dict[Hashable, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {v: i for i, v in enumerate(self.vertices)}

    @property
    def num_elements(self) -> int:
        return sum(1 for k in self.kinds if k == "element")

    @property
    def num_cones(self) -> int:
        return sum(1 for k in self.kinds if k == "cone")

    def edges(self) -> list[tuple[int, int, int]]:
        return [(i, j, w) for i, row in enumerate(self.adj) for j, w in row.items() if i < j]

    def to_csv(self, fmt=str) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["u", "u_kind", "v", "v_kind", "length"])
        for i, j, w in self.edges():
            wr.writerow([fmt(self.vertices[i]), self.kinds[i], fmt(self.vertices[j]), self.kinds[j], w / 2])
        return buf.getvalue()


def _free_abs_ball(rank: int, cap: int, vertex_cap: int):
    gens = [s * (i + 1) for i in range(rank) for s in (1, -1)]
    elems = [()]
    seen = {(): 0}
    frontier = [()]
    for _ in range(cap):
        nxt = []
        for w in frontier:
            for x in gens:
                if w and w[-1] == -x:
                    continue
                u = w + (x,)
                seen[u] = len(elems)
                elems.append(u)
                nxt.append(u)
                if len(elems) > vertex_cap:
                    raise BallCapError(len(elems), vertex_cap, _)
        frontier = nxt
    edges = []
    for w in elems:
        for x in gens:
            u = reduce(w + (x,))
            if u in seen and x > 0:
                edges.append((seen[w], seen[u]))
    return elems, edges


def _mt_abs_ball(alpha: Automorphism, cap: int, vertex_cap: int):
    gens = [MTElement(0, (s * (i + 1),)) for i in range(alpha.rank) for s in (1, -1)]
    gens += [MTElement(1), MTElement(-1)]
    elems = [MTElement(0)]
    seen = {MTElement(0): 0}
    frontier = [MTElement(0)]
    edges = set()
    for r in range(cap):
        nxt = []
        for x in frontier:
            for g in gens:
                y = mt_mul(x, g, alpha)
                if y not in seen:
                    seen[y] = len(elems)
                    elems.append(y)
                    nxt.append(y)
                    if len(elems) > vertex_cap:
                        raise BallCapError(len(elems), vertex_cap, r)
        frontier = nxt
    for x in elems:
        for g in gens:
            y = mt_mul(x, g, alpha)
            if y in seen:
                a, b = seen[x], seen[y]
                edges.add((min(a, b), max(a, b)))
    return elems, sorted(edges)


def _mt_coset_name(x: MTElement, H: MTSubgroup, alpha: Automorphism) -> tuple[int, Word]:
    r = x.t_exp % H.m
    if r > H.m - r:
        r -= H.m
    # x s^k with t-exponent r
    k = (r - x.t_exp) // H.m
    y = mt_mul(x, mt_pow(H.stable_letter(alpha), k, alpha), alpha)
    return y.t_exp, coset_name(y.tail, H.base)


def coned_ball(family: Sequence, radius: int, rank: int | None = None, alpha: Automorphism | None = None,
               abs_cap: int | None = None, vertex_cap: int = 200_000) -> ConedBall:
    """Ball of coned radius ``radius`` around the identity.

    With ``alpha`` the group is the mapping torus and ``family`` holds
    :class:`MTSubgroup` records; otherwise it is F_rank with core graphs.
    Ordinary vertices are limited to absolute length <= abs_cap (default
    the radius); when a cone reaches past that the ball is marked truncated.
    """
    if radius < 1:
        raise ValueError("radius must be >= 1")
    abs_cap = radius if abs_cap is None else abs_cap
    if alpha is None:
        elems, gedges = _free_abs_ball(rank, abs_cap, vertex_cap)
        names = [lambda g, c=c, i=i: ("cone", i, coset_name(g, c)) for i, c in enumerate(family) if not c.is_trivial()]
    else:
        elems, gedges = _mt_abs_ball(alpha, abs_cap, vertex_cap)
        names = [lambda g, H=H, i=i: ("cone", i) + _mt_coset_name(g, H, alpha) for i, H in enumerate(family)]
    n = len(elems)
    vertices: list[Hashable] = list(elems)
    kinds = ["element"] * n
    adj: list[dict[int, int]] = [dict() for _ in range(n)]
    for a, b in gedges:
        adj[a][b] = 2
        adj[b][a] = 2
    cone_idx: dict[Hashable, int] = {}
    for j, g in enumerate(elems):
        for name in names:
            c = name(g)
            k = cone_idx.get(c)
            if k is None:
                k = cone_idx[c] = len(vertices)
                vertices.append(c)
                kinds.append("cone")
                adj.append({})
            adj[j][k] = 1
            adj[k][j] = 1
    dist = _dijkstra(adj, 0, 2 * radius)
    keep = [i for i in range(len(vertices)) if dist.get(i, 10**9) <= 2 * radius]
    if len(keep) > vertex_cap:
        raise BallCapError(len(keep), vertex_cap, radius)
    remap = {old: new for new, old in enumerate(keep)}
    b_adj = [{remap[j]: w for j, w in adj[i].items() if j in remap} for i in keep]
    truncated = bool(cone_idx) and any(kinds[i] == "cone" for i in keep)
    return ConedBall(elems[0], radius, [vertices[i] for i in keep], [kinds[i] for i in keep], b_adj,
                     [dist[i] for i in keep], abs_cap, truncated)


def _dijkstra(adj: Sequence[dict[int, int]], src: int, limit: float = float("inf")) -> dict[int, int]:
    dist = {src: 0}
    heap = [(0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist.get(u, 10**18) or d > limit:
            continue
        for v, w in adj[u].items():
            nd = d + w
            if nd < dist.get(v, 10**18) and nd <= limit:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def _hops(adj: Sequence[dict[int, int]], src: int) -> dict[int, int]:
    dist = {src: 0}
    q = deque([src])
    while q:
        u = q.popleft()
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


# ----------------------------------------------------- delta and fineness


def four_point_defect(d, x, y, z, w) -> float:
    s = sorted((d(x, y) + d(z, w), d(x, z) + d(y, w), d(x, w) + d(y, z)), reverse=True)
    return (s[0] - s[1]) / 2


@dataclass
class DeltaReport:
    delta: float  # coned metric, cone edges of length 1/2
    delta_hops: float  # every edge of length 1
    quadruples: int
    certified: bool
    circuits: dict[tuple[Hashable, Hashable], int]
    circuit_len: float

    def to_csv(self, fmt=str) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["quantity", "value"])
        wr.writerow(["delta", self.delta])
        wr.writerow(["delta_hops", self.delta_hops])
        wr.writerow(["quadruples", self.quadruples])
        wr.writerow(["certified", self.certified])
        for (u, v), c in sorted(self.circuits.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1]))):
            wr.writerow([f"circuits<= {self.circuit_len} {fmt(u)} -- {fmt(v)}", c])
        return buf.getvalue()


def count_circuits(ball: ConedBall, u: int, v: int, max_len: float) -> int:
    """Embedded circuits of coned length <= max_len through the edge u-v."""
    budget = int(round(2 * max_len)) - ball.adj[u][v]
    count = 0
    visited = {u, v}
    stack = [(v, 0, iter(ball.adj[v].items()))]
    while stack:
        node, used, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            stack.pop()
            visited.discard(node)
            continue
        x, w = nxt
        if node == v and x == u:
            continue  # the edge itself
        if used + w > budget:
            continue
        if x == u:
            count += 1
            continue
        if x in visited:
            continue
        visited.add(x)
        stack.append((x, used + w, iter(ball.adj[x].items())))
    visited.discard(v)
    return count


def delta_and_fineness(ball: ConedBall, quadruple_samples: int = 1000, circuit_len: float = 3,
                       seed: int = 0, edges: Sequence[tuple[int, int]] | None = None) -> DeltaReport:
    rng = random.Random(seed)
    inner = [i for i, d in enumerate(ball.dist) if d <= ball.radius]  # coned radius <= R/2
    cache: dict[int, dict[int, int]] = {}
    hop_cache: dict[int, dict[int, int]] = {}

    def d(a, b):
        if a not in cache:
            cache[a] = _dijkstra(ball.adj, a)
        return cache[a][b] / 2

    def h(a, b):
        if a not in hop_cache:
            hop_cache[a] = _hops(ball.adj, a)
        return hop_cache[a][b]

    delta = delta_h = 0.0
    for _ in range(quadruple_samples):
        q = [rng.choice(inner) for _ in range(4)]
        delta = max(delta, four_point_defect(d, *q))
        delta_h = max(delta_h, four_point_defect(h, *q))
    if edges is None:
        edges = [(0, j) for j in ball.adj[0] if ball.kinds[j] == "cone"]
    circuits = {(ball.vertices[a], ball.vertices[b]): count_circuits(ball, a, b, circuit_len) for a, b in edges}
    return DeltaReport(delta, delta_h, quadruple_samples, not ball.truncated, circuits, circuit_len)


# ----------------------------------------------- relative hyperbolicity


@dataclass
class RelHypReport:
    certified: bool
    lam: float
    M: int
    N: int | None
    tested: int
    excluded: int
    witnesses: list[tuple[int, Word, int, int, int]]  # (N, w, |w|, |a^N w|, |a^-N w|)
    margins: dict[Word, float]

    def lines(self, alphabet) -> list[str]:
        out = [f"tested={self.tested} excluded={self.excluded} lambda={self.lam} M={self.M}"]
        if self.certified:
            out.append(f"CERTIFIED N={self.N}")
        else:
            out.append("NOT CERTIFIED")
            for N, w, r0, r1, r2 in self.witnesses:
                out.append(f"witness N={N} w={alphabet.format(w)} rel={r0} forward={r1} backward={r2}")
        return out


def all_words(rank: int, max_len: int) -> list[Word]:
    gens = [s * (i + 1) for i in range(rank) for s in (1, -1)]
    out: list[Word] = []
    frontier: list[Word] = [()]
    for _ in range(max_len):
        frontier = [w + (x,) for w in frontier for x in gens if not (w and w[-1] == -x)]
        out.extend(frontier)
    return out


def test_relhyp_auto(alpha: Automorphism, family: Sequence[CoreGraph], M: int = 2, R: int = 6,
                     N_range: Iterable[int] = range(1, 13), lam: float = 1.2, max_word: int = 6,
                     cap: int = 10**6) -> RelHypReport:
    """Least N with lam |w| <= max(|alpha^N w|, |alpha^-N w|) in the relative
    metric for every w of absolute length <= max_word with M <= |w| <= R."""
    from .growth import family_from_generators

    fam = family_from_generators(alpha, [list(c.generators) for c in family])
    if any(s is None for s in fam.step):
        raise ValueError("family is not alpha-invariant up to conjugation")
    inv = alpha.inverse()
    rel = RelLengthOracle(alpha.rank, family)
    words = [w for w in all_words(alpha.rank, max_word) if M <= rel(w) <= R]
    N_range = list(N_range)
    fwd: dict[Word, Word] = {w: w for w in words}
    bwd: dict[Word, Word] = {w: w for w in words}
    reached = 0
    witnesses = []
    margins: dict[Word, float] = {}
    order = list(words)
    for N in N_range:
        while reached < N:
            for w in words:
                fwd[w] = alpha(fwd[w], cap)
                bwd[w] = inv(bwd[w], cap)
            reached += 1
        failed = None
        for idx, w in enumerate(order):
            r0 = rel(w)
            r1, r2 = rel(fwd[w]), rel(bwd[w])
            if lam * r0 > max(r1, r2):
                failed = (N, w, r0, r1, r2)
                order.insert(0, order.pop(idx))  # likely to fail again
                break
        if failed is None:
            for w in words:
                margins[w] = max(rel(fwd[w]), rel(bwd[w])) / rel(w)
            return RelHypReport(True, lam, M, N, len(words), 0, witnesses, margins)
        witnesses.append(failed)
    return RelHypReport(False, lam, M, None, len(words), 0, witnesses, margins)


test_relhyp_auto.__test__ = False  # not a pytest test despite the name
