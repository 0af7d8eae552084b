"""Path calculus on the 1-skeleton of a beta train track complex.

Turn and half-turn legality, ILT counts, relative and absolute lengths,
normalization, quasi-geodesic checks and sampled constants.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .betatt import BetaComplex, half_turn_strongly_legal, turn_legality
from .subgroups import WeightedAutomaton
from .words import inverse, reduce

Path = tuple


@dataclass(frozen=True)
class LengthPair:
    abs: int
    rel: int


@dataclass(frozen=True)
class TurnInfo:
    start: int  # index of the incoming train track edge
    end: int  # index of the outgoing train track edge
    legal: bool | None
    reason: str
    half_turns: tuple[bool | None, ...]

    @property
    def counts(self) -> bool:
        """Whether this turn contributes to ILT."""
        return self.legal is False or any(h is False for h in self.half_turns)


@dataclass
class PathClass:
    turns: list[TurnInfo]
    end_half_turns: list[bool | None]
    ilt: int
    lengths: LengthPair

    @property
    def legal(self) -> bool | None:
        if any(t.legal is False for t in self.turns):
            return False
        if any(t.legal is None for t in self.turns):
            return None
        return True

    @property
    def strongly_legal(self) -> bool | None:
        halves = [h for t in self.turns for h in t.half_turns] + self.end_half_turns
        if self.legal is False or any(h is False for h in halves):
            return False
        if self.legal is None or any(h is None for h in halves):
            return None
        return True

    @property
    def ilt_with_ends(self) -> int:
        """ILT plus the end half turns that are not strongly legal."""
        return self.ilt + sum(1 for h in self.end_half_turns if h is False)

    @property
    def inconclusive(self) -> bool:
        return self.strongly_legal is None


def lengths(cx: BetaComplex, p: Sequence[int]) -> LengthPair:
    return LengthPair(len(p), sum(1 for x in p if cx.is_hat(x)))


def classify(cx: BetaComplex, p: Sequence[int], horizon: int = 12) -> PathClass:
    p = tuple(p)
    hats = [i for i, x in enumerate(p) if cx.is_hat(x)]
    turns = []
    for i, j in zip(hats, hats[1:]):
        legal, reason, _ = turn_legality(cx, p[i], p[i + 1:j], p[j], horizon)
        halves = []
        if j > i + 1 and cx.is_aux(p[i + 1]):
            halves.append(half_turn_strongly_legal(cx, p[i], p[i + 1])[0])
        if j > i + 1 and cx.is_aux(p[j - 1]):
            halves.append(half_turn_strongly_legal(cx, -p[j], -p[j - 1])[0])
        turns.append(TurnInfo(i, j, legal, reason, tuple(halves)))
    ends = []
    if hats:
        f0, l0 = hats[0], hats[-1]
        if f0 > 0 and cx.is_aux(p[f0 - 1]):
            ends.append(half_turn_strongly_legal(cx, -p[f0], -p[f0 - 1])[0])
        if l0 < len(p) - 1 and cx.is_aux(p[l0 + 1]):
            ends.append(half_turn_strongly_legal(cx, p[l0], p[l0 + 1])[0])
    ilt = sum(1 for t in turns if t.counts)
    return PathClass(turns, ends, ilt, lengths(cx, p))


def ilt(cx: BetaComplex, p: Sequence[int], horizon: int = 12) -> int:
    return classify(cx, p, horizon).ilt


# ---------------------------------------------------------- normalization


def _pre_inp_table(cx: BetaComplex) -> list[tuple[Path, Path]]:
    """Pre-INPs with their replacements: an auxiliary edge, or for an INP
    realised by a tripod, the auxiliary path that realises it."""
    seen = {}
    for oe, r in sorted(cx.pre_inps().items(), key=lambda kv: (abs(kv[0]), -kv[0])):
        if r and r not in seen:
            seen[r] = (oe,)
    for key, composite in cx.tripods:
        r = cx.retract(key)
        for r1, c1 in ((r, tuple(composite)), (inverse(r), inverse(composite))):
            if r1 and r1 not in seen:
                seen[r1] = c1
    return sorted(seen.items(), key=lambda kv: (-len(kv[0]), kv[1]))


def pre_inp_occurrences(cx: BetaComplex, p: Sequence[int]) -> list[tuple[int, int, Path]]:
    """All (start, stop, replacement) with p[start:stop] a pre-INP."""
    p = tuple(p)
    occ = []
    for r, oe in _pre_inp_table(cx):
        n = len(r)
        for i in range(len(p) - n + 1):
            if p[i:i + n] == r:
                occ.append((i, i + n, oe))
    return sorted(occ)


def isolated_occurrences(occ: Sequence[tuple[int, int, int]]) -> list[tuple[int, int, int]]:
    out = []
    for a in occ:
        ok = True
        for b in occ:
            if b is a:
                continue
            overlap = min(a[1], b[1]) - max(a[0], b[0])
            if overlap >= 1 and not (a[0] <= b[0] and b[1] <= a[1]):
                ok = False
                break
            if overlap >= 1 and (a[0], a[1]) == (b[0], b[1]):
                ok = False
                break
        if ok:
            out.append(a)
    return out


def normalize(cx: BetaComplex, p: Sequence[int]) -> Path:
    """The normalized path: retract, reduce, then collapse isolated pre-INPs."""
    r = cx.retract(p)
    if not cx.rhat:
        return r
    iso = isolated_occurrences(pre_inp_occurrences(cx, r))
    out: list[int] = []
    pos = 0
    for a, b, rep in iso:
        if a < pos:
            continue  # nested inside an earlier isolated occurrence
        out.extend(r[pos:a])
        out.extend(rep)
        pos = b
    out.extend(r[pos:])
    return tuple(out)


def iterate_normalized(cx: BetaComplex, p: Sequence[int], t: int, cap: int = 10**6,
                       horizon: int = 12) -> tuple[Path, list[tuple[int, LengthPair]]]:
    q = tuple(p)
    trace = [(ilt(cx, q, horizon), lengths(cx, q))]
    for _ in range(t):
        q = normalize(cx, cx.apply(q, cap))
        trace.append((ilt(cx, q, horizon), lengths(cx, q)))
    return q, trace


# -------------------------------------------------------------- sampling


def _edges_at(cx: BetaComplex) -> dict[int, list[int]]:
    out: dict[int, list[int]] = {v: [] for v in range(cx.graph.num_vertices)}
    for x in cx.graph.oriented_edges():
        out[cx.graph.tail(x)].append(x)
    return out


def random_walk(cx: BetaComplex, length: int, rng: random.Random, start: int | None = None,
                edges: Iterable[int] | None = None) -> Path:
    allowed = None if edges is None else set(edges)
    at = _edges_at(cx)
    v = rng.randrange(cx.graph.num_vertices) if start is None else start
    p: list[int] = []
    for _ in range(length):
        opts = [x for x in at[v] if (allowed is None or abs(x) - 1 in allowed) and (not p or x != -p[-1])]
        if not opts:
            break
        x = rng.choice(opts)
        p.append(x)
        v = cx.graph.head(x)
    return tuple(p)


def random_paths(cx: BetaComplex, n: int, rng: random.Random, max_len: int = 10) -> list[Path]:
    """Reduced walks in G^1; half of them use only the underlying graph and
    get pre-INPs spliced in at matching vertices."""
    prime = range(cx.num_prime_edges)
    pre = cx.pre_inps()
    out = []
    while len(out) < n:
        L = rng.randint(1, max_len)
        if rng.random() < 0.5 or not pre:
            p = random_walk(cx, L, rng)
        else:
            p = list(random_walk(cx, L, rng, edges=prime))
            for _ in range(rng.randint(1, 2)):
                i = rng.randint(0, len(p))
                v = cx.graph.head(p[i - 1]) if i else (cx.graph.tail(p[0]) if p else 0)
                fits = [r for r in pre.values() if cx.graph.tail(r[0]) == v]
                if fits:
                    p[i:i] = rng.choice(fits)
            p = reduce(p)
        if p:
            out.append(tuple(p))
    return out


def random_normalized_paths(cx: BetaComplex, n: int, rng: random.Random, max_len: int = 10) -> list[Path]:
    out = []
    while len(out) < n:
        for p in random_paths(cx, n - len(out), rng, max_len):
            q = normalize(cx, p)
            if q:
                out.append(q)
    return out


def short_paths(cx: BetaComplex, max_len: int) -> list[Path]:
    """Every reduced edge path of G^1 with 1..max_len edges."""
    at = _edges_at(cx)
    out = []
    frontier = [(x,) for x in cx.graph.oriented_edges()]
    for _ in range(max_len):
        out.extend(frontier)
        nxt = []
        for p in frontier:
            for x in at[cx.graph.head(p[-1])]:
                if x != -p[-1]:
                    nxt.append(p + (x,))
        frontier = nxt
    return out


def random_strongly_legal_paths(cx: BetaComplex, n: int, rng: random.Random, max_len: int = 8,
                                horizon: int = 12, tries: int = 50) -> list[Path]:
    """Grow paths edge by edge from a train track edge, keeping strong legality."""
    hat = sorted(cx.hat)
    if not hat:
        return []
    at = _edges_at(cx)
    out = []
    for _ in range(n * tries):
        if len(out) >= n:
            break
        k = rng.choice(hat)
        p = ((k + 1) * rng.choice((1, -1)),)
        target = rng.randint(1, max_len)
        while len(p) < target:
            opts = [x for x in at[cx.graph.head(p[-1])] if x != -p[-1]]
            rng.shuffle(opts)
            for x in opts:
                q = p + (x,)
                if classify(cx, q, horizon).strongly_legal is True:
                    p = q
                    break
            else:
                break
        if classify(cx, p, horizon).strongly_legal is True:
            out.append(p)
    return out


# ----------------------------------------------------------- constants


def expansion_exponent(cx: BetaComplex, max_b: int = 64) -> int | None:
    """Least b with |f^b(e)|_rel >= 2 for every train track edge e."""
    if not cx.hat:
        return None
    for b in range(1, max_b + 1):
        if all(lengths(cx, cx.iterate((k + 1,), b)).rel >= 2 for k in cx.hat):
            return b
    return None


def _lcp(a: Sequence[int], b: Sequence[int]) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def composition_pieces(g1: Sequence[int], g2: Sequence[int], star: Sequence[int]) -> tuple[int, int, int]:
    """Split star = g1' . middle . g2' with g1' a prefix of g1 and g2' a
    suffix of g2.  Returns (|middle|, |g1 - g1'|, |g2 - g2'|)."""
    a = _lcp(g1, star)
    b = _lcp(g2[::-1], star[::-1])
    b = min(b, len(star) - a)
    return len(star) - a - b, len(g1) - a, len(g2) - b


@dataclass
class ConstantsRecord:
    E: int
    C: int
    b: int | None
    J: float
    K: int | None
    lambda_N: dict[float, int | None]
    samples: int
    seed: int
    unstable: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"E": self.E, "C": self.C, "b": self.b, "J": self.J, "K": self.K,
                "lambda_N": {str(k): v for k, v in self.lambda_N.items()},
                "samples": self.samples, "seed": self.seed, "unstable": list(self.unstable)}


def composition_sample(cx: BetaComplex, rng: random.Random, max_len: int = 8) -> tuple[Path, Path]:
    """Two normalized paths that can be concatenated."""
    while True:
        g1 = normalize(cx, random_paths(cx, 1, rng, max_len)[0])
        if not g1:
            continue
        v = cx.graph.head(g1[-1])
        for _ in range(20):
            g2 = normalize(cx, random_walk(cx, rng.randint(1, max_len), rng, start=v))
            if g2 and cx.graph.tail(g2[0]) == v:
                return g1, g2
        # fall back to a pre-INP or empty start when v has no usable walks


def composition_defect(cx: BetaComplex, g1: Path, g2: Path) -> int:
    """Middle piece, plus trimmed ends when g1 g2 is already reduced."""
    star = normalize(cx, g1 + g2)
    mid, t1, t2 = composition_pieces(g1, g2, star)
    if reduce(cx.retract(g1) + cx.retract(g2)) == cx.retract(g1) + cx.retract(g2):
        return max(mid, t1, t2)
    return mid


def cancellation_defect(cx: BetaComplex, g1: Path, g2: Path) -> int:
    f1 = normalize(cx, cx.apply(g1))
    f2 = normalize(cx, cx.apply(g2))
    star = normalize(cx, cx.apply(g1 + g2))
    mid, t1, t2 = composition_pieces(f1, f2, star)
    return max(mid, t1, t2)


def halving_iterate(cx: BetaComplex, p: Path, K: int, horizon: int = 12, cap: int = 10**6) -> bool:
    k0 = ilt(cx, p, horizon)
    q = p
    for _ in range(K):
        q = normalize(cx, cx.apply(q, cap))
    return k0 >= 2 * ilt(cx, q, horizon)


def dichotomy_holds(cx: BetaComplex, p: Path, N: int, lam: float, cap: int = 10**6) -> bool:
    q = p
    for _ in range(N):
        q = normalize(cx, cx.apply(q, cap))
    r0, r1 = lengths(cx, p).rel, lengths(cx, q).rel
    return r1 >= lam * r0 or r0 >= lam * r1


def estimate_constants(cx: BetaComplex, samples: int = 500, seed: int = 0, lambdas: Sequence[float] = (2.0,),
                       max_len: int = 8, max_K: int = 8, max_N: int = 12, horizon: int = 12) -> ConstantsRecord:
    rng = random.Random(seed)
    unstable: list[str] = []
    b = expansion_exponent(cx)
    if cx.hat and b is None:
        unstable.append("b")

    pairs = [composition_sample(cx, rng, max_len) for _ in range(samples)]
    E = max((composition_defect(cx, g1, g2) for g1, g2 in pairs), default=0)
    C = max((cancellation_defect(cx, g1, g2) for g1, g2 in pairs), default=0)

    raw = random_paths(cx, samples, rng, max_len) + short_paths(cx, 2)
    J = 1.0
    for p in raw:
        k0 = classify(cx, p, horizon).ilt_with_ends
        k1 = ilt(cx, normalize(cx, p), horizon)
        if k0 == 0:
            if k1 > 0 and "J" not in unstable:
                unstable.append("J")
            continue
        J = max(J, k1 / k0)

    normed = random_normalized_paths(cx, samples, rng, max_len) + [normalize(cx, p) for p in short_paths(cx, 3)]
    normed = [p for p in normed if p]
    K = None
    with_turns = [p for p in normed if ilt(cx, p, horizon) > 0]
    for k in range(1, max_K + 1):
        if all(halving_iterate(cx, p, k, horizon) for p in with_turns):
            K = k
            break
    if K is None:
        unstable.append("K")

    lambda_N: dict[float, int | None] = {}
    for lam in lambdas:
        lambda_N[lam] = None
        for N in range(1, max_N + 1):
            if all(dichotomy_holds(cx, p, N, lam) for p in normed):
                lambda_N[lam] = N
                break
        if lambda_N[lam] is None:
            unstable.append(f"N({lam})")
    return ConstantsRecord(E, C, b, J, K, lambda_N, samples, seed, unstable)


# --------------------------------------------------------- quasi-geodesy


class CoverMetric:
    """Distances in the cover of G^1 whose vertices are (vertex, element).

    An edge e joins (tail e, g) to (head e, g label(e)); this is the
    1-skeleton of the universal cover of the complex with its Nielsen faces.
    The distance between lifts is the least weight of an edge path whose
    label freely reduces to the difference of the two elements.
    """

    def __init__(self, cx: BetaComplex, metric: str = "abs"):
        if metric not in ("abs", "rel"):
            raise ValueError("metric must be 'abs' or 'rel'")
        self.cx, self.metric = cx, metric
        aut = WeightedAutomaton()
        for _ in range(cx.graph.num_vertices):
            aut.add_state()
        for k in range(cx.num_edges):
            t, h = cx.graph.ends[k]
            w = 1 if (metric == "abs" or k in cx.hat) else 0
            aut.add_word(t, cx.labels[k], h, w, both_ways=True)
        aut.saturate()
        self.aut = aut

    def distance(self, v: int, w: int, g: Sequence[int]) -> float:
        """d((v, 1), (w, g))."""
        return self.aut.shortest(reduce(g), v, w)

    def path_distance(self, p: Sequence[int]) -> float:
        if not p:
            return 0
        return self.distance(self.cx.graph.tail(p[0]), self.cx.graph.head(p[-1]), self.cx.label(p))


@dataclass
class QGVerdict:
    status: str  # pass | fail | inconclusive
    worst: tuple[int, int, int, float] | None  # (i, j, length, distance)
    excess: float
    note: str = ""


def _metric(cx: BetaComplex, metric: str) -> CoverMetric:
    cache = cx.__dict__.setdefault("_cover_cache", {})
    key = (metric, len(cx.rhat), tuple(map(tuple, cx.labels)), tuple(cx.graph.ends), cx.hat)
    if key not in cache:
        cache[key] = CoverMetric(cx, metric)
    return cache[key]


def check_quasi_geodesic(cx: BetaComplex, p: Sequence[int], metric: str = "abs", lam: float = 1.0,
                         mu: float = 0.0, ball_radius: int = 10) -> QGVerdict:
    """Test |q| <= lam d(endpoints of q) + mu for every subpath q of p."""
    p = tuple(p)
    if len(p) > ball_radius:
        return QGVerdict("inconclusive", None, 0.0, f"path of length {len(p)} leaves the radius-{ball_radius} ball")
    cm = _metric(cx, metric)
    worst, excess = None, -math.inf
    for i, j in itertools.combinations(range(len(p) + 1), 2):
        q = p[i:j]
        n = len(q) if metric == "abs" else lengths(cx, q).rel
        d = cm.path_distance(q)
        e = n - (lam * d + mu)
        if e > excess:
            worst, excess = (i, j, n, d), e
    if worst is None:
        return QGVerdict("pass", None, 0.0)
    return QGVerdict("pass" if excess <= 1e-9 else "fail", worst, excess)
