"""Growth of conjugacy classes under an automorphism and the characteristic family."""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graphmaps import spanning_tree, strongly_connected_blocks
from .subgroups import (CoreGraph, build_core, conjugate_into, contains, find_conjugator,
                        malnormal_report, same_subgroup)
from .words import (Automorphism, Word, WordLengthError, cyclic_reduce, inverse, mul, orbit_lengths,
                    reduce, word_key)

DEFAULT_MARGIN = 0.05


def _fit(x: Sequence[float], y: Sequence[float]) -> tuple[float, float, float]:
    """Least squares line: (slope, intercept, rms residual)."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if len(x) < 2 or np.ptp(x) == 0:
        return 0.0, float(y.mean()) if len(y) else 0.0, 0.0
    slope, icpt = np.polyfit(x, y, 1)
    res = y - (slope * x + icpt)
    return float(slope), float(icpt), float(np.sqrt(np.mean(res ** 2)))


@dataclass
class GrowthVerdict:
    kind: str  # polynomial | exponential | inconclusive
    rate: float  # fitted lambda-hat (exp of the semi-log slope)
    degree: int | None
    lengths: list[int]
    window: tuple[int, int]
    residuals: dict[str, float] = field(default_factory=dict)
    note: str = ""

    def summary(self) -> str:
        if self.kind == "exponential":
            return f"exponential lambda={self.rate:.6f}"
        if self.kind == "polynomial":
            return f"polynomial d={self.degree}"
        return f"inconclusive ({self.note})"


def classify_growth(alpha: Automorphism, w: Sequence[int], T: int = 16, margin: float = DEFAULT_MARGIN,
                    cap: int = 10**6) -> GrowthVerdict:
    """Decide exponential versus polynomial growth of ||alpha^t(w)|| for t <= T.

    The tail window is the last ceil(T/2) points.  Exponential needs the
    semi-log rate and the last ratio above 1 + margin, and the semi-log fit
    to beat the log-log fit.
    """
    if T < 8:
        raise ValueError("T must be at least 8")
    note = ""
    core = cyclic_reduce(reduce(w, alpha.rank))[0]
    ls = [len(core)]
    for _ in range(T):
        try:
            core = cyclic_reduce(alpha(core, cap))[0]
        except WordLengthError:
            note = f"length cap {cap} reached after t={len(ls) - 1}"
            break
        ls.append(len(core))
    if not ls or ls[0] == 0:
        return GrowthVerdict("polynomial", 1.0, 0, ls, (0, 0), {}, "trivial class")
    n = len(ls)
    h = max(2, math.ceil((n - 1) / 2))
    lo = max(1, n - h)
    ts = list(range(lo, n))
    tail = [ls[t] for t in ts]
    if min(tail) <= 0:
        return GrowthVerdict("inconclusive", 1.0, None, ls, (lo, n - 1), {}, "zero length in tail")
    s1, _, r1 = _fit(ts, [math.log(v) for v in tail])
    s2, _, r2 = _fit([math.log(t) for t in ts], [math.log(v) for v in tail])
    rate = math.exp(s1)
    last = tail[-1] / tail[-2]
    res = {"semilog": r1, "loglog": r2, "last_ratio": last, "loglog_slope": s2}
    if rate > 1 + margin and last > 1 + margin and r1 < r2:
        return GrowthVerdict("exponential", rate, None, ls, (lo, n - 1), res, note)
    if note:
        return GrowthVerdict("inconclusive", rate, None, ls, (lo, n - 1), res, note)
    return GrowthVerdict("polynomial", rate, max(0, int(round(s2))), ls, (lo, n - 1), res)


def growth_csv(alpha: Automorphism, w: Sequence[int], T: int) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["t", "length"])
    for t, v in enumerate(orbit_lengths(alpha, w, T)):
        wr.writerow([t, v])
    return buf.getvalue()


# ----------------------------------------------------- eigenvector supports


def _spectral_radius(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    return float(max(abs(np.linalg.eigvals(m.astype(float)))))


@dataclass
class EigenBlock:
    block: list[int]
    eigenvalue: float
    support: list[int]
    complement: list[int]
    complement_components: list[list[int]]


def eigen_support(m: np.ndarray, tol: float = 1e-9) -> list[EigenBlock]:
    m = np.asarray(m, dtype=np.int64)
    if (m < 0).any():
        raise ValueError("matrix must be nonnegative")
    n = m.shape[0]
    out = []
    for block in strongly_connected_blocks(m):
        lam = _spectral_radius(m[np.ix_(block, block)])
        if lam <= 1 + tol:
            continue
        # edges whose iterated images reach the block
        reach = set(block)
        changed = True
        while changed:
            changed = False
            for j in range(n):
                if j not in reach and any(m[i, j] > 0 for i in reach):
                    reach.add(j)
                    changed = True
        idx = sorted(reach)
        sub = m[np.ix_(idx, idx)].astype(float)
        # left eigenvector: v sub = lam v, i.e. (sub^T - lam I) v = 0
        a = sub.T - lam * np.eye(len(idx))
        _, s, vh = np.linalg.svd(a)
        v = vh[-1]
        if v.sum() < 0:
            v = -v
        v = v / max(abs(v).max(), tol)
        support = sorted(idx[k] for k in range(len(idx)) if abs(v[k]) > 1e-7)
        if not set(block) <= set(support):
            # repeated eigenvalue along a chain of blocks: no eigenvector lives on
            # this block, so fall back to every edge whose iterates cross it
            support = idx
        comp = sorted(set(range(n)) - set(support))
        out.append(EigenBlock(block, lam, support, comp, _weak_components(m, comp)))
    return out


def _weak_components(m: np.ndarray, items: Sequence[int]) -> list[list[int]]:
    items = list(items)
    parent = {i: i for i in items}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in items:
        for j in items:
            if m[i, j] > 0 or m[j, i] > 0:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in items:
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


# ------------------------------------------------------ characteristic family


@dataclass
class CharacteristicFamily:
    subgroups: list[CoreGraph]
    generators: list[list[Word]]
    sigma: list[int]
    m: list[int]
    h: list[Word | None]
    step: list[Word | None]  # alpha(H_i) = step_i H_sigma(i) step_i^-1
    notes: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.subgroups)

    def to_csv(self, alphabet) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["index", "generators", "sigma", "m", "h"])
        for i, gens in enumerate(self.generators):
            h = self.h[i]
            wr.writerow([i + 1, " , ".join(alphabet.format(g) for g in gens), self.sigma[i] + 1, self.m[i],
                         "?" if h is None else alphabet.format(h)])
        return buf.getvalue()


def _orbit_data(alpha: Automorphism, gens: list[list[Word]], cores: list[CoreGraph]):
    n = len(cores)
    sigma, step, notes = [], [], []
    for i in range(n):
        img = build_core([alpha(g) for g in gens[i]])
        for j in range(n):
            c = find_conjugator(img, cores[j])
            if c is not None:
                sigma.append(j)
                step.append(c)
                break
        else:
            sigma.append(i)
            step.append(None)
            notes.append(f"H{i + 1}: alpha(H{i + 1}) is not conjugate to a member")
    ms, hs = [], []
    for i in range(n):
        m, j = 1, sigma[i]
        while j != i and m <= n:
            j = sigma[j]
            m += 1
        ms.append(m)
        am = alpha.power(m)
        hs.append(find_conjugator(build_core([am(g) for g in gens[i]]), cores[i]))
    return sigma, step, ms, hs, notes


def family_from_generators(alpha: Automorphism, gens: Sequence[Sequence[Word]]) -> CharacteristicFamily:
    gens = [[reduce(g) for g in gs] for gs in gens]
    cores = [build_core(gs) for gs in gens]
    sigma, step, ms, hs, notes = _orbit_data(alpha, gens, cores)
    return CharacteristicFamily(cores, gens, sigma, ms, hs, step, notes)


def characteristic_family(cx) -> CharacteristicFamily:
    """One subgroup per relative component with nontrivial fundamental group."""
    alpha = cx.induced_automorphism()
    gens = []
    for vs, es in cx.x_components():
        if len(es) - len(vs) + 1 <= 0:
            continue
        root = min(vs)
        tree = spanning_tree(cx.graph, root, sorted(es))
        t_edges = {abs(p[-1]) - 1 for p in tree.values() if p}
        loops = []
        for k in sorted(es - t_edges):
            a, b = cx.graph.ends[k]
            loops.append(cx.label(reduce(tree[a] + (k + 1,) + inverse(tree[b]))))
        # conjugate to the base vertex so members live in the marked group
        to_root = _base_path_label(cx, root)
        gens.append([reduce(mul(to_root, g, inverse(to_root))) for g in loops])
    return family_from_generators(alpha, gens)


def _base_path_label(cx, v: int) -> Word:
    tree = spanning_tree(cx.graph, cx.base)
    return cx.label(tree[v]) if v in tree else ()


# ------------------------------------------------------------ verification


def core_morphism(a: CoreGraph, b: CoreGraph) -> dict[int, int] | None:
    """A label preserving map from the basepoint-free core a into b, if any.

    Exhaustive over the image of one vertex; the rest is forced because b
    is folded.
    """
    if a.num_vertices == 0:
        return {}
    for y in range(b.num_vertices):
        phi = {0: y}
        stack = [0]
        ok = True
        while stack and ok:
            x = stack.pop()
            for lab, x2 in a.out[x].items():
                y2 = b.out[phi[x]].get(lab)
                if y2 is None:
                    ok = False
                    break
                if x2 in phi:
                    if phi[x2] != y2:
                        ok = False
                        break
                else:
                    phi[x2] = y2
                    stack.append(x2)
        if ok:
            return phi
    return None


@dataclass
class FamilyReport:
    exhaustive: bool
    minimal: bool
    invariant: bool
    malnormal: bool
    witnesses: dict[str, object] = field(default_factory=dict)
    sampled: int = 0

    @property
    def passed(self) -> bool:
        return self.exhaustive and self.minimal and self.invariant and self.malnormal

    def lines(self, alphabet) -> list[str]:
        out = []
        for name in ("exhaustive", "minimal", "invariant", "malnormal"):
            ok = getattr(self, name)
            wit = self.witnesses.get(name)
            extra = "" if ok or wit is None else f" witness {wit if isinstance(wit, str) else alphabet.format(wit)}"
            out.append(f"{name}: {'PASS' if ok else 'FAIL'}{extra}")
        return out


def random_word(rank: int, length: int, rng: random.Random) -> Word:
    w: list[int] = []
    while len(w) < length:
        x = rng.choice([s * (i + 1) for i in range(rank) for s in (1, -1)])
        if w and w[-1] == -x:
            continue
        w.append(x)
    return tuple(w)


def sample_polynomial_words(alpha: Automorphism, n: int, rng: random.Random, T: int = 12,
                            max_tries: int = 20000, cap: int = 5000) -> list[Word]:
    """Words g v g^-1 with short v and g, kept when classify_growth says polynomial."""
    out: list[Word] = []
    for _ in range(max_tries):
        if len(out) >= n:
            break
        v = random_word(alpha.rank, rng.randint(1, 4), rng)
        g = random_word(alpha.rank, rng.randint(0, 4), rng)
        w = reduce(mul(g, v, inverse(g)))
        if not w:
            continue
        if classify_growth(alpha, w, T, cap=cap).kind == "polynomial":
            out.append(w)
    return out


def verify_family(family: CharacteristicFamily | Sequence[CoreGraph], alpha: Automorphism, sample: int = 200,
                  T: int = 12, seed: int = 0) -> FamilyReport:
    if not isinstance(family, CharacteristicFamily):
        family = family_from_generators(alpha, [list(c.generators) for c in family])
    rng = random.Random(seed)
    cores = family.subgroups
    wit: dict[str, object] = {}

    words = sample_polynomial_words(alpha, sample, rng, T)
    missed = [w for w in words if not any(conjugate_into(c, w) for c in cores)]
    exhaustive = not missed
    if missed:
        wit["exhaustive"] = min(missed, key=word_key)

    minimal = True
    for i, a in enumerate(cores):
        for j, b in enumerate(cores):
            if i != j and core_morphism(a, b) is not None:
                minimal = False
                wit["minimal"] = f"H{i + 1} -> H{j + 1}"

    invariant = True
    for i, gens in enumerate(family.generators):
        c = family.step[i]
        tgt = cores[family.sigma[i]]
        if c is None or not all(contains(tgt, mul(inverse(c), alpha(g), c)) for g in gens):
            invariant = False
            wit["invariant"] = f"H{i + 1}"
            continue
        h = family.h[i]
        am = alpha.power(family.m[i])
        if h is None or not same_subgroup(build_core([am(g) for g in gens]),
                                          build_core([mul(h, g, inverse(h)) for g in gens])):
            invariant = False
            wit["invariant"] = f"H{i + 1} (m={family.m[i]})"

    mal = malnormal_report(cores)
    if not mal.malnormal:
        wit["malnormal"] = mal.violations[0][2]
    return FamilyReport(exhaustive, minimal, invariant, mal.malnormal, wit, len(words))
