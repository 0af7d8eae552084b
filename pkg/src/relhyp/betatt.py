"""Beta train track complexes: INPs, Nielsen faces and the level-by-level build.

A :class:`BetaComplex` stores the 1-skeleton G^1 as one :class:`Graph`.  The
edges of the underlying graph come first; every auxiliary edge is appended
after them and is a single path token.  Its two half-edges and the
auxiliary vertex in the middle are recorded only for cell counts.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .graphmaps import (Graph, GraphMapError, GraphSelfMap, classify_matrix, classify_strata,
                        spanning_tree)
from .subgroups import build_core, find_conjugator
from .words import Alphabet, Automorphism, Word, apply_images, inverse, mul, reduce, word_key

Path = tuple


class BetaError(ValueError):
    pass


class INPVerificationError(BetaError):
    pass


class BetaConstructionError(BetaError):
    pass


class InessentialComponentError(BetaError):
    pass


@dataclass
class BetaComplex:
    graph: Graph
    vmap: list[int]
    images: list[Path]
    hat: frozenset[int]
    rhat: dict[int, Path]
    labels: list[Word]
    rank: int
    alphabet: Alphabet
    base: int = 0
    aux_vertices: dict[int, str] = field(default_factory=dict)
    tripods: list[tuple[Path, Path]] = field(default_factory=list)
    log: list[str] = field(default_factory=list)
    degenerate: bool = False
    # edges of strata not yet attached during the build; ignored by validate
    pending: frozenset[int] = frozenset()

    # -- construction

    @classmethod
    def from_graphmap(cls, g: GraphSelfMap, hat: Iterable[int] | None = None) -> "BetaComplex":
        if hat is None:
            hat = [k for s, c in zip(g.strata, classify_strata(g)) if c.kind == "exponential" for k in s]
        graph = Graph(list(g.graph.vertex_names), list(g.graph.edge_names), list(g.graph.ends))
        return cls(graph, list(g.vmap), list(g.images), frozenset(hat), {}, list(g.labels),
                   g.rank, g.alphabet, g.base)

    def copy(self) -> "BetaComplex":
        graph = Graph(list(self.graph.vertex_names), list(self.graph.edge_names), list(self.graph.ends))
        return replace(self, graph=graph, vmap=list(self.vmap), images=list(self.images),
                       rhat=dict(self.rhat), labels=list(self.labels),
                       aux_vertices=dict(self.aux_vertices), tripods=list(self.tripods), log=list(self.log))

    # -- edge kinds

    @property
    def num_edges(self) -> int:
        return self.graph.num_edges

    @property
    def num_prime_edges(self) -> int:
        return self.graph.num_edges - len(self.rhat)

    def is_hat(self, oe: int) -> bool:
        return abs(oe) - 1 in self.hat

    def is_aux(self, oe: int) -> bool:
        return abs(oe) - 1 in self.rhat

    def x_edges(self) -> list[int]:
        return [k for k in range(self.num_edges) if k not in self.hat]

    def rhat_path(self, oe: int) -> Path:
        p = self.rhat[abs(oe) - 1]
        return p if oe > 0 else inverse(p)

    def image(self, oe: int) -> Path:
        p = self.images[abs(oe) - 1]
        return p if oe > 0 else inverse(p)

    def apply(self, p: Sequence[int], cap: int = 10**7) -> Path:
        return apply_images(self.images, p, cap)

    def iterate(self, p: Sequence[int], t: int, cap: int = 10**7) -> Path:
        p = reduce(p)
        for _ in range(t):
            p = self.apply(p, cap)
        return p

    def vertex_image(self, v: int, t: int = 1) -> int:
        for _ in range(t):
            v = self.vmap[v]
        return v

    def retract(self, p: Sequence[int]) -> Path:
        """r: replace auxiliary edges by their INPs until none remain, then reduce."""
        out: list[int] = []
        stack = list(reversed(p))
        while stack:
            x = stack.pop()
            if self.is_aux(x):
                stack.extend(reversed(self.rhat_path(x)))
            else:
                out.append(x)
        return reduce(out)

    def label(self, p: Sequence[int]) -> Word:
        out: list[int] = []
        for x in p:
            w = self.labels[abs(x) - 1]
            out.extend(w if x > 0 else inverse(w))
        return reduce(out)

    def pre_inps(self) -> dict[int, Path]:
        """Oriented auxiliary edge -> pre-INP r(e) in the underlying graph."""
        out = {}
        for k in self.rhat:
            r = self.retract((k + 1,))
            out[k + 1] = r
            out[-(k + 1)] = inverse(r)
        return out

    # -- derived maps

    def underlying(self) -> GraphSelfMap:
        m = self.num_prime_edges
        graph = Graph(list(self.graph.vertex_names), self.graph.edge_names[:m], self.graph.ends[:m])
        images = [self.retract(self.images[k]) for k in range(m)]
        return GraphSelfMap(graph, list(self.vmap), images, [list(range(m))], self.labels[:m],
                            self.rank, self.alphabet, self.base)

    def induced_automorphism(self) -> Automorphism:
        return self.underlying().induced_automorphism(require_surjective=False)

    def euler_characteristic(self, half_edges: bool = True) -> int:
        v, e = self.graph.num_vertices, self.num_edges
        if half_edges:
            return (v + len(self.rhat)) - (e + len(self.rhat))
        return v - e

    def x_components(self) -> list[tuple[set[int], set[int]]]:
        """Components (vertices, edges) of X, including isolated vertices."""
        comps = self.graph.components(self.x_edges())
        covered = set().union(*(vs for vs, _ in comps)) if comps else set()
        for v in range(self.graph.num_vertices):
            if v not in covered:
                comps.append(({v}, set()))
        return sorted(comps, key=lambda c: (min(c[0]), sorted(c[1])))

    def validate(self) -> None:
        g = self.graph
        for k, p in self.rhat.items():
            t, h = g.ends[k]
            if not p or g.tail(p[0]) != t or g.head(p[-1]) != h:
                raise BetaError(f"aux edge {g.edge_names[k]} and its INP have different endpoints")
        # acyclic retraction
        state: dict[int, int] = {}

        def visit(k):
            if state.get(k) == 1:
                raise BetaError("auxiliary retraction is cyclic")
            if state.get(k) == 2:
                return
            state[k] = 1
            for x in self.rhat[k]:
                if self.is_aux(x):
                    visit(abs(x) - 1)
            state[k] = 2

        for k in self.rhat:
            visit(k)
        for k in self.x_edges():
            if k in self.pending:
                continue
            if any(self.is_hat(x) for x in self.images[k]):
                raise BetaError(f"f(X) not contained in X at edge {g.edge_names[k]}")
        for k, p in enumerate(self.images):
            if not g.is_path(p):
                raise BetaError(f"image of {g.edge_names[k]} is not a path")

    # -- output

    def to_dot(self, name: str = "betatt") -> str:
        g = self.graph
        lines = [f"digraph {name} {{"]
        for nm in g.vertex_names:
            lines.append(f'  "{nm}";')
        for k, (t, h) in enumerate(g.ends):
            style = "solid" if k in self.hat else ("dotted" if k in self.rhat else "dashed")
            lines.append(f'  "{g.vertex_names[t]}" -> "{g.vertex_names[h]}" '
                         f'[label="{g.edge_names[k]}", style={style}];')
        lines.append("}")
        return "\n".join(lines)


# -------------------------------------------------------------- legality


def _last_hat(cx: BetaComplex, p: Path) -> int | None:
    for i in range(len(p) - 1, -1, -1):
        if cx.is_hat(p[i]):
            return i
    return None


def _first_hat(cx: BetaComplex, p: Path) -> int | None:
    for i, x in enumerate(p):
        if cx.is_hat(x):
            return i
    return None


def turn_legality(cx: BetaComplex, e_in: int, chi: Path, e_out: int,
                  horizon: int = 12) -> tuple[bool | None, str, int]:
    """Legality of the turn e_in . chi . e_out (e_in ends where chi starts).

    Iterates the turn under f, tracking only the last train track edge of
    the incoming image, the first one of the outgoing image and the reduced
    X-path between them.  Returns (legal, reason, iterate); ``legal`` is None
    when the horizon is reached without a repeated state.
    """
    seen = set()
    state = (e_in, tuple(chi), e_out)
    for t in range(horizon + 1):
        a, c, b = state
        if not c and b == -a:
            return False, "cancellation", t
        if len(c) == 1 and cx.is_aux(c[0]):
            eta = cx.rhat_path(c[0])
            if eta[0] == -a and eta[-1] == -b:
                return False, "auxiliary", t
        if state in seen:
            return True, "periodic", t
        seen.add(state)
        pa, pb = cx.image(a), cx.image(b)
        i, j = _last_hat(cx, pa), _first_hat(cx, pb)
        if i is None or j is None:
            return True, "dissolved", t
        c2 = reduce(pa[i + 1:] + cx.apply(c) + pb[:j])
        state = (pa[i], c2, pb[j])
    return None, "horizon", horizon


def half_turn_strongly_legal(cx: BetaComplex, e_in: int, aux: int,
                             horizon: int = 64) -> tuple[bool | None, int]:
    """Half turn e_in . aux ... : not strongly legal iff for some t >= 1 the
    first edge of f^t(r^(aux)) equals the first edge of f^t(e_in^-1)."""
    d = -e_in
    a = aux
    seen = set()
    for t in range(1, horizon + 1):
        img_a = cx.image(a)
        img_d = cx.image(d)
        if not img_a or not img_d:
            return True, t
        a, d = img_a[0], img_d[0]
        if not cx.is_aux(a):
            return True, t
        if cx.rhat_path(a)[0] == d:
            return False, t
        if (a, d) in seen:
            return True, t
        seen.add((a, d))
    return None, horizon


# ------------------------------------------------------------------- INPs


@dataclass(frozen=True)
class INP:
    path: Path
    split: int  # eta' = path[:split], eta'' = path[split:]
    period: int
    orbit: tuple[Path, ...]

    @property
    def branches(self) -> tuple[Path, Path]:
        return self.path[:self.split], self.path[self.split:]

    @property
    def tip(self) -> tuple[int, int]:
        return self.path[self.split - 1], self.path[self.split]

    def key(self) -> Path:
        return min(self.path, inverse(self.path), key=word_key)


@dataclass
class INPSearch:
    inps: list[INP]
    unresolved: list[str]


def _as_complex(f) -> BetaComplex:
    return f if isinstance(f, BetaComplex) else BetaComplex.from_graphmap(f)


def _power_images(cx: BetaComplex, t: int) -> list[Path]:
    imgs = [(k + 1,) for k in range(cx.num_edges)]
    for _ in range(t):
        imgs = [cx.apply(p) for p in imgs]
    return imgs


def count_illegal_turns(cx: BetaComplex, p: Path, horizon: int = 12) -> int:
    hats = [i for i, x in enumerate(p) if cx.is_hat(x)]
    n = 0
    for i, j in zip(hats, hats[1:]):
        legal, _, _ = turn_legality(cx, p[i], p[i + 1:j], p[j], horizon)
        if legal is False:
            n += 1
    return n


def search_periodic_inps(f, max_period: int = 6, max_rounds: int = 64, max_length: int = 16,
                         hat: Iterable[int] | None = None) -> INPSearch:
    cx = _as_complex(f)
    hat_set = set(cx.hat if hat is None else hat)
    if not hat_set:
        raise BetaError("no expanding edges: an INP needs a train track part")
    g = cx.graph
    found: dict[Path, INP] = {}
    unresolved: list[str] = []
    for t0 in range(1, max_period + 1):
        pimg = _power_images(cx, t0)
        fixed = {v for v in range(g.num_vertices) if cx.vertex_image(v, t0) == v}
        dirs = [s * (k + 1) for k in sorted(hat_set) for s in (1, -1)]
        dirs = [d for d in dirs if g.tail(d) in fixed and pimg[abs(d) - 1] and
                (pimg[abs(d) - 1] if d > 0 else inverse(pimg[abs(d) - 1]))[0] == d]
        rays: dict[int, Path] = {}
        for d in dirs:
            ray = (d,)
            ok = False
            for _ in range(max_rounds):
                nxt = apply_images(pimg, ray)
                if nxt[:len(ray)] != ray:
                    break
                if len(nxt) >= max_length:
                    ray, ok = nxt[:max_length], True
                    break
                if len(nxt) == len(ray):
                    break
                ray = nxt
            if ok:
                rays[d] = ray
            else:
                unresolved.append(f"period {t0}: direction {g.format_path((d,))} does not grow a ray")
        for d1 in rays:
            for d2 in rays:
                if d1 == d2:
                    continue
                r1, r2 = rays[d1], rays[d2]
                f1 = _prefix_images(pimg, r1)
                f2 = _prefix_images(pimg, r2)
                for l1 in range(1, len(r1) + 1):
                    for l2 in range(1, len(r2) + 1):
                        if g.head(r1[l1 - 1]) != g.head(r2[l2 - 1]) or r1[l1 - 1] == r2[l2 - 1]:
                            continue
                        eta = r1[:l1] + inverse(r2[:l2])
                        if not cx.is_hat(eta[0]) or not cx.is_hat(eta[-1]):
                            continue
                        if reduce(f1[l1] + inverse(f2[l2])) != eta:
                            continue
                        key = min(eta, inverse(eta), key=word_key)
                        if key in found:
                            continue
                        if _divisible(pimg, eta) or count_illegal_turns(cx, eta) != 1:
                            continue
                        orbit = [eta]
                        for _ in range(t0 - 1):
                            orbit.append(cx.apply(orbit[-1]))
                        inp = INP(eta, l1, t0, tuple(orbit))
                        found[key] = inp
                        for other in orbit[1:]:
                            found.setdefault(min(other, inverse(other), key=word_key), inp)
    # one representative per orbit, deterministic order
    reps: dict[Path, INP] = {}
    for inp in found.values():
        reps.setdefault(min((min(o, inverse(o), key=word_key) for o in inp.orbit), key=word_key), inp)
    return INPSearch([reps[k] for k in sorted(reps, key=word_key)], unresolved)


def _prefix_images(pimg: list[Path], ray: Path) -> list[Path]:
    out = [()]
    for x in ray:
        img = pimg[abs(x) - 1] if x > 0 else inverse(pimg[abs(x) - 1])
        out.append(reduce(out[-1] + img))
    return out


def _divisible(pimg: list[Path], eta: Path) -> bool:
    for i in range(1, len(eta)):
        if apply_images(pimg, eta[:i]) == eta[:i]:
            return True
    return False


def find_periodic_inps(f, max_period: int = 6, max_rounds: int = 64, max_length: int = 16) -> list[INP]:
    return search_periodic_inps(f, max_period, max_rounds, max_length).inps


def verify_inp(cx: BetaComplex, inp: INP) -> None:
    img = cx.iterate(inp.path, inp.period)
    if img != reduce(inp.path):
        raise INPVerificationError(f"f^{inp.period}(eta) = {cx.graph.format_path(img)} differs from eta")
    if cx.retract(img) != cx.retract(inp.path):
        raise INPVerificationError("retractions differ")


# ------------------------------------------------------- Nielsen faces


def expand_nielsen_faces(base, inps: Sequence[INP]) -> BetaComplex:
    cx = _as_complex(base).copy()
    for inp in inps:
        verify_inp(cx, inp)
        keys = [min(o, inverse(o), key=word_key) for o in inp.orbit]
        realised: dict[Path, Path] = {}
        for k in cx.rhat:
            realised[min(cx.rhat[k], inverse(cx.rhat[k]), key=word_key)] = (k + 1,)
        new_edges = []
        for key in keys:
            if key in realised:
                continue
            composite = _aux_composite(cx, key)
            if composite is not None:
                realised[key] = composite
                cx.tripods.append((key, composite))
                cx.log.append(f"tripod: INP {cx.graph.format_path(key)} realised by auxiliary path")
                continue
            k = cx.num_edges
            name = f"e{len(cx.rhat)}"
            while name in cx.graph.edge_names:
                name += "'"
            cx.graph.edge_names.append(name)
            cx.graph.ends.append((cx.graph.tail(key[0]), cx.graph.head(key[-1])))
            cx.images.append(())
            cx.labels.append(cx.label(cx.retract(key)))
            cx.rhat[k] = key
            cx.aux_vertices[k] = f"c{len(cx.aux_vertices)}"
            realised[key] = (k + 1,)
            new_edges.append(k)
        # f permutes the auxiliary edges along the orbit
        for k in new_edges:
            img = cx.apply(cx.rhat[k])
            key = min(img, inverse(img), key=word_key)
            path = realised.get(key)
            if path is None:
                raise INPVerificationError("image of an INP is not in its orbit")
            cx.images[k] = path if img == key else inverse(path)
    cx.validate()
    return cx


def _aux_composite(cx: BetaComplex, key: Path) -> Path | None:
    """A reduced path of at least two auxiliary edges homotopic to ``key``."""
    target = cx.retract(key)
    start, end = cx.graph.tail(key[0]), cx.graph.head(key[-1])
    aux = [s * (k + 1) for k in cx.rhat for s in (1, -1)]
    stack = [((), start)]
    while stack:
        p, v = stack.pop()
        if len(p) >= 2 and v == end and cx.retract(p) == target:
            return p
        if len(p) >= len(cx.rhat):
            continue
        for a in aux:
            if cx.graph.tail(a) == v and (not p or p[-1] != -a):
                stack.append((p + (a,), cx.graph.head(a)))
    return None


# ------------------------------------------------------ attach iterate


def _connector_powers(cx: BetaComplex, alpha: Automorphism, t: int) -> dict[int, Word]:
    """T_v with label(f^t(p)) = T_start^-1 alpha^t(label p) T_end."""
    _, tau = cx.underlying().vertex_connectors(alpha)
    out = {}
    for v in range(cx.graph.num_vertices):
        acc: Word = ()
        w = v
        for _ in range(t):
            acc = mul(alpha(acc), tau[w])
            w = cx.vmap[w]
        out[v] = acc
    return out


def attach_iterate(cx: BetaComplex, xprime: Iterable[int], t: int) -> tuple[BetaComplex, dict[int, Path]]:
    """Reglue every attaching point z on X' to f^t(z); returns (Y_1, h)."""
    xprime = set(xprime)
    if t == 0:
        return cx.copy(), {k: (k + 1,) for k in range(cx.num_edges)}
    if xprime & set(cx.hat):
        raise BetaError("X' must lie in the relative part")
    for k in xprime:
        if any(abs(x) - 1 not in xprime for x in cx.images[k]):
            raise BetaError("X' is not f-invariant")
    for vs, es in cx.graph.components(sorted(xprime)):
        if len(es) - len(vs) + 1 <= 0:
            raise InessentialComponentError("inessential component selected (trivial fundamental group)")
    alpha = cx.induced_automorphism()
    at = alpha.power(t)
    vx = {v for k in xprime for v in cx.graph.ends[k]}
    T = _connector_powers(cx, alpha, t)

    def hv(v):
        return cx.vertex_image(v, t) if v in vx else v

    h = {}
    for k in range(cx.num_edges):
        h[k] = cx.iterate((k + 1,), t) if k in xprime else (k + 1,)
    cx1 = cx.copy()
    for k in range(cx.num_edges):
        if k in xprime:
            continue
        a, b = cx.graph.ends[k]
        cx1.graph.ends[k] = (hv(a), hv(b))
        ta = T[a] if a in vx else ()
        tb = T[b] if b in vx else ()
        cx1.labels[k] = mul(inverse(ta), at(cx.labels[k]), tb)
    cx1.vmap = [cx.vmap[v] if v in vx else hv(cx.vmap[v]) for v in range(cx.graph.num_vertices)]
    for k in range(cx.num_edges):
        if k not in xprime:
            cx1.images[k] = apply_images([h[j] for j in range(cx.num_edges)], cx.images[k])
    for k in cx.rhat:
        cx1.rhat[k] = apply_images([h[j] for j in range(cx.num_edges)], cx.rhat[k]) if k in xprime else cx.rhat[k]
    himg = [h[j] for j in range(cx.num_edges)]
    for k in range(cx.num_edges):
        lhs = apply_images(himg, cx.images[k])
        rhs = cx1.apply(h[k])
        if lhs != rhs:
            raise BetaError(f"h f != f_1 h on edge {cx.graph.edge_names[k]}")
    cx1.log.append(f"attach_iterate t={t} on {sorted(cx.graph.edge_names[k] for k in xprime)}")
    return cx1, h


# ----------------------------------------------------------- the build


def build_beta_tt(g: GraphSelfMap, max_period: int = 6, max_rounds: int = 64, max_length: int = 16) -> BetaComplex:
    from .paths import classify, normalize

    classes = classify_strata(g)
    cx = BetaComplex.from_graphmap(g, hat=())
    hat: set[int] = set()
    expanded: set[Path] = set()

    def expand_current():
        nonlocal cx
        if not hat:
            return
        cx.hat = frozenset(hat)
        res = search_periodic_inps(cx, max_period, max_rounds, max_length)
        new = [i for i in res.inps if i.key() not in expanded]
        for msg in res.unresolved:
            cx.log.append("unresolved turn: " + msg)
        if new:
            cx = expand_nielsen_faces(cx, new)
            for i in new:
                expanded.update(min(o, inverse(o), key=word_key) for o in i.orbit)
            cx.log.append(f"expanded {len(new)} INP orbit(s)")

    for level, (stratum, cls) in enumerate(zip(g.strata, classes), start=1):
        cx.pending = frozenset(k for s in g.strata[level - 1:] for k in s)
        expand_current()
        cx.hat = frozenset(hat)
        for k in stratum:
            cx.images[k] = normalize(cx, cx.images[k])
        sset = set(stratum)
        m = _stratum_matrix(cx, stratum)
        kind = classify_matrix(m).kind
        touches_hat = any(cx.is_hat(x) for k in stratum for x in cx.images[k] if abs(x) - 1 not in sset)
        if kind == "exponential":
            hat |= sset
            cx.log.append(f"level {level}: case 1 (expanding) -> train track part")
        elif kind == "zero":
            if touches_hat:
                hat |= sset
                cx.log.append(f"level {level}: case 2 (maps into lower train track) -> train track part")
            else:
                cx.log.append(f"level {level}: case 3 (maps into X) -> relative part")
        elif kind == "polynomial-permutation":
            if touches_hat:
                # wings in the train track part: the stratum stays in the train track part
                hat |= sset
                cx.log.append(f"level {level}: case 4 (permutation with train track wings) -> train track part")
            else:
                cx.log.append(f"level {level}: case 3 (permutation into X) -> relative part")
        else:
            raise BetaConstructionError(f"level {level}: mixed stratum ({kind}); refusing to guess a case")
        cx.hat = frozenset(hat)
        if sset & hat:
            for t in range(0, 4):
                bad = [k for k in stratum if not classify(cx, cx.images[k]).strongly_legal]
                if not bad:
                    break
                if t == 3:
                    cx.log.append(f"level {level}: images of {[g.graph.edge_names[k] for k in bad]} "
                                  f"not strongly legal after attach_iterate")
                    break
                xprime = _adjacent_x(cx, stratum)
                if not xprime:
                    cx.log.append(f"level {level}: no X component to reglue")
                    break
                try:
                    cx, _ = attach_iterate(cx, xprime, 1)
                except BetaError as exc:
                    cx.log.append(f"level {level}: attach_iterate refused: {exc}")
                    break
    cx.pending = frozenset()
    expand_current()
    cx.hat = frozenset(hat)
    for k in range(cx.num_prime_edges):
        cx.images[k] = normalize(cx, cx.images[k])
    cx.degenerate = not hat
    if cx.degenerate:
        cx.log.append("degenerate: empty train track part (no expanding stratum)")
    cx.validate()
    return cx


def _stratum_matrix(cx: BetaComplex, stratum: Sequence[int]):
    import numpy as np

    idx = {k: i for i, k in enumerate(stratum)}
    m = np.zeros((len(stratum), len(stratum)), dtype=np.int64)
    for j, k in enumerate(stratum):
        for x in cx.images[k]:
            i = idx.get(abs(x) - 1)
            if i is not None:
                m[i, j] += 1
    return m


def _adjacent_x(cx: BetaComplex, stratum: Sequence[int]) -> set[int]:
    verts = {v for k in stratum for v in cx.graph.ends[k]}
    out: set[int] = set()
    for vs, es in cx.graph.components([k for k in cx.x_edges() if k not in stratum]):
        if vs & verts and len(es) - len(vs) + 1 > 0:
            out |= es
    return out


# --------------------------------------------------------- verification


@dataclass
class BetaReport:
    items: dict[str, bool]
    details: dict[str, object]

    @property
    def passed(self) -> bool:
        return all(self.items.values())


def verify_beta_properties(cx: BetaComplex, horizon: int = 12, samples: int = 100, seed: int = 0,
                           qg_lambda: float = 4.0, qg_mu: float = 4.0, ball_radius: int = 10,
                           growth_T: int = 16) -> BetaReport:
    from .growth import classify_growth
    from .paths import (check_quasi_geodesic, classify, expansion_exponent, normalize,
                        random_strongly_legal_paths, random_paths)

    rng = random.Random(seed)
    items: dict[str, bool] = {}
    details: dict[str, object] = {}
    alpha = cx.induced_automorphism()

    # (a) polynomial growth of X-loops
    loops = []
    for vs, es in cx.x_components():
        if not es:
            continue
        root = min(vs)
        tree = spanning_tree(cx.graph, root, sorted(es))
        t_edges = {abs(p[-1]) - 1 for p in tree.values() if p}
        basis = []
        for k in sorted(es - t_edges):
            a, b = cx.graph.ends[k]
            basis.append(cx.label(reduce(tree[a] + (k + 1,) + inverse(tree[b]))))
        for _ in range(max(1, samples // 10)):
            w: Word = ()
            for _ in range(rng.randint(1, 4)):
                x = rng.choice(basis)
                w = mul(w, x if rng.random() < 0.5 else inverse(x))
            if w:
                loops.append(w)
    verdicts = [classify_growth(alpha, w, growth_T) for w in loops]
    items["a"] = all(v.kind == "polynomial" for v in verdicts)
    details["a"] = [(alpha.alphabet.format(w), v.summary()) for w, v in zip(loops, verdicts)]

    # (c) edges of the train track part are (strongly) legal
    bad_c = [cx.graph.edge_names[k] for k in sorted(cx.hat)
             if not classify(cx, cx.images[k], horizon).legal]
    items["c"] = not bad_c
    details["c"] = bad_c

    # (d) strongly legal paths map to strongly legal paths
    sl = random_strongly_legal_paths(cx, samples, rng, max_len=8) if cx.hat else []
    bad_d = []
    for p in sl:
        img = cx.apply(p)
        if not classify(cx, img, horizon).strongly_legal:
            bad_d.append(cx.graph.format_path(p))
    items["d"] = not bad_d and (bool(sl) or not cx.hat)
    details["d"] = bad_d

    # (e) expansion exponent
    b = expansion_exponent(cx, horizon)
    items["e"] = b is not None
    details["e"] = b

    # (f) quasi-geodesy of strongly legal paths in the absolute metric
    worst = []
    ok_f = bool(sl)
    for p in sl:
        if len(p) > ball_radius:
            continue
        v = check_quasi_geodesic(cx, p, "abs", qg_lambda, qg_mu, ball_radius)
        if v.status != "pass":
            ok_f = False
            worst.append((cx.graph.format_path(p), v.status))
    items["f"] = ok_f
    details["f"] = worst

    # (h) iterates needed to strongly legalize, tabulated by ILT
    table: dict[int, int] = {}
    unresolved = 0
    for p in random_paths(cx, samples, rng, max_len=10):
        p = normalize(cx, p)
        ilt = classify(cx, p, horizon).ilt
        q = p
        for t in range(horizon + 1):
            if classify(cx, q, horizon).strongly_legal:
                table[ilt] = max(table.get(ilt, 0), t)
                break
            q = normalize(cx, cx.apply(q))
            if len(q) > 20000:
                unresolved += 1
                break
        else:
            unresolved += 1
    # report the bound as a function of ILT: t(k) = max over paths with ILT <= k
    running = 0
    for k in sorted(table):
        running = max(running, table[k])
        table[k] = running
    items["h"] = unresolved == 0 and bool(table)
    details["h"] = {"table": dict(sorted(table.items())), "unresolved": unresolved}
    return BetaReport(items, details)
