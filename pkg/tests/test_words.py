import pytest
from hypothesis import given, strategies as st

from relhyp.words import (Alphabet, Automorphism, CyclicWord, NotAutomorphismError, WordError, WordLengthError,
                          apply, are_conjugate, cyclic_length, cyclic_reduce, derive_inverse, inverse,
                          iterate, least_rotation, mul, orbit_lengths, power, reduce)

A = Alphabet.standard(2)
P = A.parse


def naive_reduce(w):
    """Oracle: delete adjacent inverse pairs until none remain."""
    w = list(w)
    changed = True
    while changed:
        changed = False
        for i in range(len(w) - 1):
            if w[i] == -w[i + 1]:
                del w[i:i + 2]
                changed = True
                break
    return tuple(w)


def naive_cyclic_length(w):
    w = list(naive_reduce(w))
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return len(w)


letters = st.sampled_from([1, -1, 2, -2])
raw_words = st.lists(letters, max_size=14).map(tuple)
reduced_words = raw_words.map(naive_reduce)


def random_aut(draw_ops):
    """Product of elementary Nielsen moves, always an automorphism with known inverse."""
    moves = {
        0: Automorphism.from_strings(["a b", "b"]),
        1: Automorphism.from_strings(["a", "b a"]),
        2: Automorphism.from_strings(["b", "a"]),
        3: Automorphism.from_strings(["a^-1", "b"]),
        4: Automorphism.from_strings(["b", "a b"]),
    }
    alpha = Automorphism.identity(2)
    for k in draw_ops:
        alpha = moves[k].compose(alpha)
    return alpha


auts = st.lists(st.integers(0, 4), max_size=4).map(random_aut)


@pytest.mark.parametrize("raw, expected", [("a a^-1 b", "b"), ("", ""), ("a b b^-1 a", "a a")])
def test_reduce_examples(raw, expected):
    assert reduce(P(raw)) == P(expected)


def test_reduce_rejects_bad_letters():
    with pytest.raises(WordError):
        reduce((0, 1))
    with pytest.raises(WordError):
        reduce((3,), rank=2)


@given(raw_words)
def test_reduce_matches_naive_oracle(w):
    assert reduce(w) == naive_reduce(w)


@given(raw_words, raw_words)
def test_reduce_idempotent_and_subadditive(u, v):
    assert reduce(reduce(u)) == reduce(u)
    assert len(reduce(u + v)) <= len(u) + len(v)


@given(reduced_words, reduced_words, reduced_words)
def test_group_laws(u, v, w):
    assert mul(mul(u, v), w) == mul(u, mul(v, w))
    assert mul(u, inverse(u)) == ()
    assert inverse(inverse(u)) == u
    assert power(u, 3) == mul(u, u, u)
    assert power(u, -2) == inverse(mul(u, u))


@pytest.mark.parametrize("w, cyc, conj", [("a b a^-1", "b", "a"), ("a b a^-1 b^-1", "a b a^-1 b^-1", ""),
                                          ("a^-1 b a a", "b a", "a^-1")])
def test_cyclic_reduce_examples(w, cyc, conj):
    c, g = cyclic_reduce(P(w))
    assert (c, g) == (P(cyc), P(conj))
    assert mul(g, c, inverse(g)) == reduce(P(w))


@given(reduced_words, reduced_words)
def test_cyclic_length_is_conjugacy_invariant(w, g):
    assert cyclic_length(w) == naive_cyclic_length(w)
    assert cyclic_length(mul(g, w, inverse(g))) == cyclic_length(w)
    assert are_conjugate(w, mul(g, w, inverse(g)))


@given(reduced_words)
def test_cyclic_word_rotations(w):
    c, _ = cyclic_reduce(w)
    rots = {c[i:] + c[:i] for i in range(len(c))} or {()}
    assert least_rotation(c) in rots
    assert all(CyclicWord.of(r) == CyclicWord.of(c) for r in rots)


def test_are_conjugate_negative():
    assert not are_conjugate(P("a"), P("b"))
    assert not are_conjugate(P("a b"), P("a b^-1"))


@pytest.mark.parametrize("w, image", [("a", "b"), ("a b", "b a b"), ("a a^-1 b", "a b")])
def test_apply_examples(fib, w, image):
    assert apply(fib, P(w)) == P(image)


@given(auts, auts, reduced_words)
def test_apply_respects_composition(alpha, beta, w):
    assert apply(alpha.compose(beta), w) == apply(alpha, apply(beta, w))


@given(auts, reduced_words, reduced_words)
def test_apply_is_homomorphism(alpha, u, v):
    assert apply(alpha, mul(u, v)) == mul(apply(alpha, u), apply(alpha, v))


def _check_inverse(alpha, beta):
    for x in (1, 2):
        assert apply(alpha, apply(beta, (x,))) == (x,)
        assert apply(beta, apply(alpha, (x,))) == (x,)


def test_derive_inverse_examples(fib, linear):
    inv = derive_inverse(Automorphism(2, fib.images), search_bound=64).inverse()
    assert inv.images == (P("b a^-1"), P("a"))
    _check_inverse(fib, inv)
    ident = Automorphism.identity(2)
    assert derive_inverse(ident).inverse().images == ident.images
    inv = derive_inverse(Automorphism(2, linear.images), search_bound=64).inverse()
    assert inv.images == (P("a"), P("b a^-1"))
    _check_inverse(linear, inv)


@given(auts)
def test_derive_inverse_on_random_automorphisms(alpha):
    beta = derive_inverse(Automorphism(2, alpha.images), search_bound=256).inverse()
    _check_inverse(alpha, beta)


def test_derive_inverse_rejects_endomorphism(bab):
    with pytest.raises(NotAutomorphismError):
        derive_inverse(Automorphism(2, bab.images), search_bound=16)


@pytest.mark.parametrize("aut, w, T, expected", [
    ("fib", "a", 4, [1, 1, 2, 3, 5]),
    ("linear", "b", 4, [1, 2, 3, 4, 5]),
    ("fib", "a b a^-1 b^-1", 4, [4, 4, 4, 4, 4]),
])
def test_orbit_lengths_examples(request, aut, w, T, expected):
    assert orbit_lengths(request.getfixturevalue(aut), P(w), T) == expected


def test_orbit_lengths_brute_force(fib):
    w = P("a b^-1 a")
    expected, cur = [], w
    for _ in range(9):
        expected.append(naive_cyclic_length(cur))
        cur = naive_reduce(tuple(y for x in cur for y in (fib.images[abs(x) - 1] if x > 0
                                                           else inverse(fib.images[abs(x) - 1]))))
    assert orbit_lengths(fib, w, 8) == expected


@given(reduced_words, reduced_words)
def test_orbit_lengths_conjugacy_invariant(w, g):
    fib = Automorphism.from_strings(["b", "a b"])
    assert orbit_lengths(fib, w, 5) == orbit_lengths(fib, mul(g, w, inverse(g)), 5)


def test_length_cap(fib):
    with pytest.raises(WordLengthError):
        iterate(fib, P("a"), 40, cap=1000)


def test_alphabet_roundtrip():
    w = P("a b^-1 a^3 b^-2")
    assert A.format(w) == "a b^-1 a a a b^-1 b^-1"
    assert P(A.format(w)) == w
    with pytest.raises(WordError):
        P("c")
