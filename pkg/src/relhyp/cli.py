"""Command line front end.

Every command prints a short reproducibility header (input hashes, seed,
caps) as ``#`` lines followed by CSV or text.  Exit status: 0 on success,
1 when a requested verification fails, 2 on input errors, 3 when a cap is
exceeded.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import os
import sys

from . import __version__
from .betatt import BetaError, build_beta_tt
from .formats import (FormatError, format_mt_element, parse_aut, parse_beta, parse_graphmap,
                      parse_mt_element, parse_subgroups, write_beta)
from .graphmaps import GraphMapError, rose_map, verify_relative_tt
from .growth import characteristic_family, classify_growth, family_from_generators, verify_family
from .paths import classify, estimate_constants, lengths, normalize
from .relmetric import (BallCapError, MTSubgroup, coned_ball, delta_and_fineness, mt_inv, mt_member, mt_mul,
                        rel_length, test_relhyp_auto)
from .subgroups import malnormal_report
from .words import WordLengthError, orbit_lengths

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3


class Output:
    """Collects named artifacts; prints them or writes them under --out."""

    def __init__(self, args, inputs):
        self.args = args
        self.header = [f"# relhyp {__version__} {args.command}"]
        for p in inputs:
            with open(p, "rb") as fh:
                digest = hashlib.sha256(fh.read()).hexdigest()[:16]
            self.header.append(f"# input {os.path.basename(p)} sha256={digest}")
        self.header.append(f"# seed={args.seed} cap_word={args.cap_word} cap_ball={args.cap_ball}")
        self.parts: list[tuple[str, str]] = []

    def add(self, name: str, text: str) -> None:
        self.parts.append((name, text if text.endswith("\n") else text + "\n"))

    def flush(self) -> None:
        head = "\n".join(self.header) + "\n"
        if self.args.out:
            os.makedirs(self.args.out, exist_ok=True)
            for name, text in self.parts:
                path = os.path.join(self.args.out, name)
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write(text if name.endswith(".dot") else head + text)
                print(path)
        else:
            sys.stdout.write(head)
            for _, text in self.parts:
                sys.stdout.write(text)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _is_graphmap(text: str) -> bool:
    return any(line.split()[:1] == ["edge"] for line in text.splitlines())


def _load_map(path: str):
    text = _read(path)
    if _is_graphmap(text):
        g = parse_graphmap(text)
        return g, g.induced_automorphism(require_surjective=False)
    alpha = parse_aut(text)
    return rose_map(alpha), alpha


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# ------------------------------------------------------------------ commands


def cmd_classify(args) -> int:
    alpha = parse_aut(_read(args.aut))
    w = alpha.alphabet.parse(args.word)
    out = Output(args, [args.aut])
    ls = orbit_lengths(alpha, w, args.T, args.cap_word)
    v = classify_growth(alpha, w, max(args.T, 8), cap=args.cap_word)
    out.add("growth.csv", _csv(list(enumerate(ls)), ["t", "length"]) + f"# verdict: {v.summary()}\n")
    out.flush()
    return EXIT_OK


def cmd_family(args) -> int:
    g, alpha = _load_map(args.map)
    cx = build_beta_tt(g)
    fam = characteristic_family(cx)
    rep = verify_family(fam, alpha, args.sample, args.T, args.seed)
    out = Output(args, [args.map])
    out.add("family.csv", fam.to_csv(alpha.alphabet) + "".join(f"# {x}\n" for x in rep.lines(alpha.alphabet)))
    out.flush()
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_ttverify(args) -> int:
    g = parse_graphmap(_read(args.graphmap))
    rep = verify_relative_tt(g, args.horizon)
    out = Output(args, [args.graphmap])
    lines = [f"relative train track: {'PASS' if rep.passed else 'FAIL'} (exact={rep.exact})"]
    for i, s in enumerate(rep.strata, start=1):
        lines.append(f"stratum {i}: {s.kind} lambda={float(s.pf_eigenvalue):.6f}")
    lines += [f"failure: {f}" for f in rep.failures]
    out.add("ttverify.txt", "\n".join(lines))
    out.flush()
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_betatt(args) -> int:
    g, _ = _load_map(args.map)
    cx = build_beta_tt(g, max_period=args.max_period)
    out = Output(args, [args.map])
    out.add("betatt.beta", write_beta(cx) + "".join(f"# {x}\n" for x in cx.log))
    if args.out:
        out.add("betatt.dot", cx.to_dot())
    out.flush()
    return EXIT_OK


def cmd_normalize(args) -> int:
    cx = parse_beta(_read(args.beta))
    p = cx.graph.parse_path(args.path)
    if not cx.graph.is_path(p):
        raise FormatError("edges do not form a path")
    q = normalize(cx, p)
    c = classify(cx, q)
    out = Output(args, [args.beta])
    out.add("normalize.csv", _csv([[cx.graph.format_path(q), c.ilt, lengths(cx, q).abs, lengths(cx, q).rel,
                                    c.strongly_legal]], ["path", "ilt", "abs", "rel", "strongly_legal"]))
    out.flush()
    return EXIT_OK


def cmd_constants(args) -> int:
    cx = parse_beta(_read(args.beta))
    rec = estimate_constants(cx, args.samples, args.seed, tuple(args.lam))
    rows = [[k, v] for k, v in rec.as_dict().items() if k not in ("lambda_N", "unstable")]
    rows += [[f"N(lambda={k})", v] for k, v in rec.lambda_N.items()]
    rows += [["unstable", " ".join(rec.unstable) or "-"]]
    out = Output(args, [args.beta])
    out.add("constants.csv", _csv(rows, ["constant", "value"]))
    out.flush()
    return EXIT_OK if not rec.unstable else EXIT_FAIL


def _family(path: str):
    alphabet, subs = parse_subgroups(_read(path))
    return alphabet, [c for _, c in subs]


def cmd_rellen(args) -> int:
    text = _read(args.family)
    if any(line.split()[:1] == ["map"] for line in text.splitlines()):
        alpha = parse_aut(text)
        alphabet, fam = alpha.alphabet, characteristic_family(build_beta_tt(rose_map(alpha))).subgroups
    else:
        alphabet, fam = _family(args.family)
    w = alphabet.parse(args.word)
    r = rel_length(w, alphabet.rank, fam)
    out = Output(args, [args.family])
    out.add("rellen.csv", _csv([[alphabet.format(w), len(w), r.value, r.certified]],
                               ["word", "abs", "rel", "certified"]))
    out.flush()
    return EXIT_OK


def _ball(args):
    alphabet, fam = _family(args.family)
    ball = coned_ball(fam, args.radius, rank=alphabet.rank, abs_cap=args.abs_cap, vertex_cap=args.cap_ball)

    def fmt(v):
        if isinstance(v, tuple) and v[:1] == ("cone",):
            return f"v(H{v[1] + 1}:{alphabet.format(v[2])})"
        return alphabet.format(v)

    return alphabet, ball, fmt


def cmd_ball(args) -> int:
    _, ball, fmt = _ball(args)
    out = Output(args, [args.family])
    out.add("ball.csv", ball.to_csv(fmt) + f"# elements={ball.num_elements} cones={ball.num_cones} "
                                          f"truncated={ball.truncated}\n")
    out.flush()
    return EXIT_OK


def cmd_delta(args) -> int:
    _, ball, fmt = _ball(args)
    rep = delta_and_fineness(ball, args.samples, args.length, args.seed)
    out = Output(args, [args.family])
    out.add("delta.csv", rep.to_csv(fmt))
    out.flush()
    return EXIT_OK


def cmd_relhyp(args) -> int:
    alpha = parse_aut(_read(args.aut))
    inputs = [args.aut]
    if args.family:
        _, fam = _family(args.family)
        inputs.append(args.family)
    else:
        fam = characteristic_family(build_beta_tt(rose_map(alpha))).subgroups
    rep = test_relhyp_auto(alpha, fam, args.M, args.R, range(1, args.N_max + 1), args.lam, args.max_word,
                           args.cap_word)
    out = Output(args, inputs)
    out.add("relhyp.txt", "\n".join(rep.lines(alpha.alphabet)))
    out.flush()
    return EXIT_OK if rep.certified else EXIT_FAIL


def cmd_malnormal(args) -> int:
    alphabet, fam = _family(args.family)
    rep = malnormal_report(fam)
    out = Output(args, [args.family])
    out.add("malnormal.txt", "\n".join(rep.lines(alphabet)))
    out.flush()
    return EXIT_OK if rep.malnormal else EXIT_FAIL


def cmd_mt(args) -> int:
    alpha = parse_aut(_read(args.aut))
    a = alpha.alphabet
    inputs = [args.aut]
    if args.op == "mul":
        xs = [parse_mt_element(x, a, alpha) for x in args.elements]
        res = xs[0]
        for y in xs[1:]:
            res = mt_mul(res, y, alpha)
        text = format_mt_element(res, a)
        ok = True
    elif args.op == "inv":
        text = format_mt_element(mt_inv(parse_mt_element(args.elements[0], a, alpha), alpha), a)
        ok = True
    else:
        if not args.family:
            raise FormatError("mt member needs --family")
        inputs.append(args.family)
        _, subs = parse_subgroups(_read(args.family), a)
        fam = family_from_generators(alpha, [list(c.generators) for _, c in subs])
        i = args.index - 1
        h = fam.h[i] if args.h is None else a.parse(args.h)
        m = fam.m[i] if args.m is None else args.m
        if h is None:
            raise FormatError("no conjugator found for the chosen subgroup; pass --h")
        H = MTSubgroup(fam.subgroups[i], m, h)
        H.verify(alpha)
        ok = mt_member(parse_mt_element(args.elements[0], a, alpha), H, alpha)
        text = "member" if ok else "not a member"
    out = Output(args, inputs)
    out.add("mt.txt", text)
    out.flush()
    return EXIT_OK


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="relhyp", description="Relative train tracks and relative hyperbolicity "
                                                           "for free group automorphisms.")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap-word", type=int, default=10**6, help="longest word allowed while iterating")
    p.add_argument("--cap-ball", type=int, default=200_000, help="most vertices allowed in a ball")
    p.add_argument("--out", help="directory for CSV/DOT artifacts (default: stdout)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("classify", help="growth of a word under an automorphism")
    s.add_argument("aut")
    s.add_argument("word")
    s.add_argument("-T", type=int, default=16)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("family", help="characteristic family with its checks")
    s.add_argument("map", help=".aut or graph-map file")
    s.add_argument("--sample", type=int, default=200)
    s.add_argument("-T", type=int, default=12)
    s.set_defaults(func=cmd_family)

    s = sub.add_parser("ttverify", help="verify a relative train track map")
    s.add_argument("graphmap")
    s.add_argument("--horizon", type=int, default=12)
    s.set_defaults(func=cmd_ttverify)

    s = sub.add_parser("betatt", help="build a beta train track map")
    s.add_argument("map", help=".aut or graph-map file")
    s.add_argument("--max-period", type=int, default=6)
    s.set_defaults(func=cmd_betatt)

    s = sub.add_parser("normalize", help="normalize a path in a beta complex")
    s.add_argument("beta")
    s.add_argument("path")
    s.set_defaults(func=cmd_normalize)

    s = sub.add_parser("constants", help="sampled constants E, C, b, J, K, N")
    s.add_argument("beta")
    s.add_argument("--samples", type=int, default=500)
    s.add_argument("--lambda", dest="lam", type=float, action="append", default=None)
    s.set_defaults(func=cmd_constants)

    s = sub.add_parser("rellen", help="relative word length")
    s.add_argument("family", help=".sub file, or .aut to use its characteristic family")
    s.add_argument("word")
    s.set_defaults(func=cmd_rellen)

    for name, func, helptext in (("ball", cmd_ball, "coned-off Cayley graph ball as an edge list"),
                                 ("delta", cmd_delta, "four-point delta and circuit counts"),
                                 ("fineness", cmd_delta, "circuit counts through cone edges")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("family")
        s.add_argument("--radius", type=int, default=3)
        s.add_argument("--abs-cap", type=int, default=None)
        s.add_argument("--samples", type=int, default=1000)
        s.add_argument("--length", type=float, default=3)
        s.set_defaults(func=func)

    s = sub.add_parser("relhyp", help="test relative hyperbolicity of an automorphism")
    s.add_argument("aut")
    s.add_argument("--family", help=".sub file (default: characteristic family)")
    s.add_argument("--lambda", dest="lam", type=float, default=1.2)
    s.add_argument("--M", type=int, default=2)
    s.add_argument("--R", type=int, default=6)
    s.add_argument("--N-max", type=int, default=12)
    s.add_argument("--max-word", type=int, default=6)
    s.set_defaults(func=cmd_relhyp)

    s = sub.add_parser("malnormal", help="malnormality of a subgroup family")
    s.add_argument("family")
    s.set_defaults(func=cmd_malnormal)

    s = sub.add_parser("mt", help="mapping torus arithmetic")
    s.add_argument("op", choices=["mul", "inv", "member"])
    s.add_argument("aut")
    s.add_argument("elements", nargs="+", help="words in the generators and t, e.g. 't^2 a a'")
    s.add_argument("--family")
    s.add_argument("--index", type=int, default=1)
    s.add_argument("--m", type=int)
    s.add_argument("--h")
    s.set_defaults(func=cmd_mt)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "constants" and args.lam is None:
        args.lam = [2.0]
    if args.cap_word <= 0 or args.cap_ball <= 0:
        print("error: caps must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (FormatError, GraphMapError, BetaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except WordLengthError as exc:
        print(f"error: word length cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except BallCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
