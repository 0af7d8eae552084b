import random

import pytest
from hypothesis import given, strategies as st

from relhyp.subgroups import (build_core, conjugate_into, conjugator_into, contains, fiber_product, find_conjugator,
                              malnormal_report, same_subgroup, subgroup_contains)
from relhyp.words import Alphabet, inverse, mul, reduce

A = Alphabet.standard(2)
P = A.parse


def naive_fold_member(gens, w):
    """Oracle: wedge of petals folded by repeated vertex identification, then read w."""
    edges = set()
    nxt = 1
    for g in gens:
        g = reduce(g)
        if not g:
            continue
        prev = 0
        for i, x in enumerate(g):
            tgt = 0 if i == len(g) - 1 else nxt
            if tgt:
                nxt += 1
            edges.add((prev, x, tgt) if x > 0 else (tgt, -x, prev))
            prev = tgt
    parent = {}

    def find(v):
        while parent.get(v, v) != v:
            v = parent[v]
        return v

    changed = True
    while changed:
        changed = False
        edges = {(find(u), x, find(v)) for u, x, v in edges}
        seen = {}
        for u, x, v in sorted(edges):
            for key, other in (((u, x, "out"), v), ((v, x, "in"), u)):
                if key in seen and seen[key] != other:
                    a, b = sorted((find(seen[key]), find(other)))
                    if a != b:
                        parent[b] = a
                        changed = True
                seen.setdefault(key, other)
            if changed:
                break
    edges = {(find(u), x, find(v)) for u, x, v in edges}
    v = find(0)
    for x in reduce(w):
        step = [b for a, y, b in edges if a == v and y == x] if x > 0 else \
            [a for a, y, b in edges if b == v and y == -x]
        if not step:
            return False
        v = step[0]
    return v == find(0)


short_words = st.lists(st.sampled_from([1, -1, 2, -2]), min_size=1, max_size=5).map(reduce).filter(bool)


def test_build_core_examples():
    c = build_core([P("a")])
    assert c.num_vertices == 1 and c.num_edges == 1
    assert build_core([P("a"), P("b")]).is_rose(2)
    c = build_core([P("a a"), P("a b")])
    assert c.num_vertices == 2
    assert sorted(c.edges()) == [(0, 1, 1), (1, 1, 0), (1, 2, 0)]


@pytest.mark.parametrize("gens, w, expected", [
    (["a"], "a a a", True), (["a"], "a b", False),
    (["a a", "a b"], "a b", True), (["a a", "a b"], "a b a^-1", False),
])
def test_contains_examples(gens, w, expected):
    assert contains(build_core([P(g) for g in gens]), P(w)) is expected


@pytest.mark.parametrize("gens, w, expected", [
    (["a"], "b a a a b^-1", True), (["a"], "a b", False),
    (["a a", "a b"], "b^-1 a b", False),
    # the product b^-1 a^-1 . a a . a b reduces to b^-1 a a b, a conjugate of a a
    (["a a", "a b"], "b^-1 a^-1 a a a b", True),
])
def test_conjugate_into_examples(gens, w, expected):
    core = build_core([P(g) for g in gens])
    assert conjugate_into(core, P(w)) is expected
    c = conjugator_into(core, P(w))
    assert (c is not None) is expected
    if expected:
        assert contains(core, mul(inverse(c), P(w), c)) or contains(core, mul(c, P(w), inverse(c)))


@given(st.lists(short_words, min_size=1, max_size=3), st.lists(st.sampled_from([1, -1, 2, -2]), max_size=8))
def test_membership_matches_folding_oracle(gens, w):
    assert contains(build_core(gens), w) == naive_fold_member(gens, w)


@given(st.lists(short_words, min_size=1, max_size=3), st.randoms(use_true_random=False))
def test_products_of_generators_are_members(gens, rnd):
    core = build_core(gens)
    assert all(contains(core, g) for g in gens)
    for _ in range(100):
        w = ()
        for _ in range(rnd.randint(0, 6)):
            g = rnd.choice(gens)
            w = mul(w, g if rnd.random() < 0.5 else inverse(g))
        assert contains(core, w)


@given(st.lists(short_words, min_size=1, max_size=3))
def test_fiber_product_has_diagonal_copy(gens):
    core = build_core(gens)
    diag = [c for c in fiber_product(core, core) if c.diagonal]
    assert len(diag) == 1 and diag[0].betti == core.betti()


@pytest.mark.parametrize("family, malnormal", [
    ([["a"], ["b"]], True),
    ([["a b a^-1 b^-1"]], True),
    ([["a a"]], False),
    ([["a"], ["b a b^-1"]], False),
])
def test_malnormal_examples(family, malnormal):
    assert malnormal_report([build_core([P(g) for g in gens]) for gens in family]).malnormal is malnormal


def test_malnormal_witness_in_integers():
    Z = Alphabet(("a",))
    rep = malnormal_report([build_core([Z.parse("a a")])])
    assert not rep.malnormal
    assert "NOT MALNORMAL, witness g=a" in rep.lines(Z)[0]


@given(st.lists(short_words, min_size=1, max_size=2), short_words, st.booleans())
def test_malnormal_verdict_invariant_under_conjugation(gens, g, both):
    fam = [gens, [P("a b a^-1 b^-1")]] if both else [gens]
    conj = [[mul(g, x, inverse(g)) for x in fam[0]]] + fam[1:]
    v1 = malnormal_report([build_core(x) for x in fam]).malnormal
    v2 = malnormal_report([build_core(x) for x in conj]).malnormal
    assert v1 == v2


@given(st.lists(short_words, min_size=1, max_size=2), short_words)
def test_find_conjugator(gens, g):
    src = build_core(gens)
    tgt = build_core([mul(g, x, inverse(g)) for x in gens])
    c = find_conjugator(tgt, src)
    assert c is not None
    assert same_subgroup(tgt, build_core([mul(c, x, inverse(c)) for x in gens]))


def test_subgroup_inclusion():
    big = build_core([P("a"), P("b b")])
    assert subgroup_contains(big, [P("a a"), P("b^-1 b^-1 a")])
    assert not subgroup_contains(big, [P("b")])
    rnd = random.Random(0)
    for _ in range(50):
        w = tuple(rnd.choice([1, -1, 2, -2]) for _ in range(6))
        assert contains(big, w) == naive_fold_member([P("a"), P("b b")], w)
