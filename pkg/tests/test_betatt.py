import pytest

from conftest import DATA

from relhyp.betatt import (BetaError, attach_iterate, build_beta_tt, expand_nielsen_faces, find_periodic_inps,
                           verify_beta_properties, verify_inp)
from relhyp.formats import parse_graphmap
from relhyp.graphmaps import rose_map
from relhyp.paths import classify
from relhyp.subgroups import build_core, contains
from relhyp.words import Automorphism, are_conjugate, cyclic_reduce, inverse, reduce

FIB = Automorphism.from_strings(["b", "a b"])
BAB = Automorphism(2, ((1,), (2, 1, 2)))
COMM = (1, 2, -1, -2)


@pytest.fixture(scope="module")
def fib_inps():
    return find_periodic_inps(rose_map(FIB))


def test_no_inps_without_illegal_turns():
    assert find_periodic_inps(rose_map(BAB)) == []


def test_identity_has_no_train_track_part():
    with pytest.raises(BetaError):
        find_periodic_inps(rose_map(Automorphism.identity(2)))


def test_fibonacci_has_one_inp(fib_inps):
    assert len(fib_inps) == 1
    inp = fib_inps[0]
    assert 2 % inp.period == 0
    assert are_conjugate(reduce(inp.path), COMM) or are_conjugate(reduce(inp.path), inverse(COMM))
    # the invariant conjugacy class has constant translation length
    assert len(cyclic_reduce(inp.path)[0]) == 4


def test_inp_is_periodic_after_tightening(fib_inps):
    f = rose_map(FIB)
    for inp in fib_inps:
        p = inp.path
        for _ in range(inp.period):
            p = reduce(f.apply_path(p))
        assert p == inp.path


def test_expand_nielsen_faces(fib_inps):
    f = rose_map(FIB)
    base = expand_nielsen_faces(f, [])
    assert base.num_edges == 2 and not base.rhat
    cx = expand_nielsen_faces(f, fib_inps)
    assert len(cx.rhat) == 1
    (k, eta), = cx.rhat.items()
    assert eta == fib_inps[0].path
    # one more edge: chi of the 1-skeleton drops by one, the face restores it
    assert cx.euler_characteristic() == base.euler_characteristic() - 1
    # marking of the underlying edges is unchanged; the aux edge is marked by its INP
    assert cx.labels[:2] == [(1,), (2,)]
    assert cx.labels[k] == cx.label(eta)
    rose = build_core([(1,), (2,)])
    assert all(contains(rose, lab) for lab in cx.labels)
    verify_inp(cx, fib_inps[0])


def test_build_examples(fib_cx, bab_cx):
    assert bab_cx.hat == {1} and bab_cx.x_edges() == [0] and not bab_cx.rhat
    comps = [es for _, es in bab_cx.x_components() if es]
    assert comps == [{0}]
    assert fib_cx.hat == {0, 1} and len(fib_cx.rhat) == 1 and fib_cx.x_edges() == [2]
    assert fib_cx.images[2] == (-3,)


@pytest.mark.parametrize("name, alpha", [("fib", FIB), ("bab", BAB)])
def test_shipped_complexes_match_a_fresh_build(request, name, alpha):
    shipped = request.getfixturevalue(f"{name}_cx")
    cx = build_beta_tt(rose_map(alpha))
    assert (cx.hat, cx.rhat, cx.images, cx.labels) == (shipped.hat, shipped.rhat, shipped.images, shipped.labels)


def test_identity_degenerates():
    cx = build_beta_tt(rose_map(Automorphism.identity(2)))
    assert cx.degenerate and not cx.hat
    rep = verify_beta_properties(cx, samples=20)
    assert not rep.items["e"]


def test_x_is_invariant_and_hat_images_legal(fib_cx, bab_cx, fibc_cx):
    for cx in (fib_cx, bab_cx, fibc_cx):
        for k in cx.x_edges():
            assert not any(cx.is_hat(x) for x in cx.images[k])
        for k in cx.hat:
            c = classify(cx, cx.images[k])
            assert c.strongly_legal
            # alternating concatenation of train track pieces and X pieces
            pieces = []
            for x in cx.images[k]:
                kind = cx.is_hat(x)
                if not pieces or pieces[-1][0] != kind:
                    pieces.append((kind, []))
                pieces[-1][1].append(x)
            assert all(pieces[i][0] != pieces[i + 1][0] for i in range(len(pieces) - 1))


def test_retract(fib_cx):
    aux = 3
    assert fib_cx.retract((aux,)) == COMM
    assert fib_cx.retract((aux, -aux)) == ()
    assert fib_cx.retract((1, 2)) == (1, 2)


def test_attach_iterate(bab_cx):
    cx1, h = attach_iterate(bab_cx, [0], 0)
    assert cx1.images == bab_cx.images and all(h[k] == (k + 1,) for k in h)
    cx1, h = attach_iterate(bab_cx, [0], 1)
    for k in range(bab_cx.num_edges):
        lhs = reduce(tuple(y for x in bab_cx.images[k] for y in (h[x - 1] if x > 0 else inverse(h[-x - 1]))))
        assert lhs == cx1.apply(h[k])


@pytest.mark.parametrize("name", ["fib", "bab", "fibc"])
def test_beta_properties(request, name):
    cx = request.getfixturevalue(f"{name}_cx")
    rep = verify_beta_properties(cx, samples=60)
    assert rep.passed, rep.items
    table = rep.details["h"]["table"]
    ks = sorted(table)
    assert all(table[a] <= table[b] for a, b in zip(ks, ks[1:]))


def test_rank_three_example():
    text = (DATA / "fibc.gm").read_text()
    cx = build_beta_tt(parse_graphmap(text))
    assert any("case 4" in line for line in cx.log)
    assert cx.hat == {0, 1, 2} and len(cx.rhat) == 2 and cx.tripods
