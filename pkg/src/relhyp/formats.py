"""Line-based text formats for automorphisms, subgroups, graph maps and beta complexes.

Lines are whitespace separated; ``#`` starts a comment.  Every parser
raises :class:`FormatError` carrying the offending line number.
"""

from __future__ import annotations

from .betatt import BetaComplex
from .graphmaps import Graph, GraphSelfMap
from .subgroups import CoreGraph, build_core
from .words import Alphabet, Automorphism, WordError


class FormatError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        super().__init__(f"line {line}: {msg}" if line else msg)
        self.line = line


def _lines(text: str):
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield n, line


def _split_eq(line: str, n: int, sep: str = "=") -> tuple[str, str]:
    if sep not in line:
        raise FormatError(f"expected '{sep}'", n)
    a, b = line.split(sep, 1)
    return a.strip(), b.strip()


def _alphabet(names: list[str], n: int) -> Alphabet:
    if len(set(names)) != len(names) or not names:
        raise FormatError("generator names must be distinct and nonempty", n)
    if "t" in names:
        raise FormatError("'t' is reserved for the mapping torus letter", n)
    return Alphabet(tuple(names))


def _parse_word(alpha: Alphabet, text: str, n: int):
    try:
        return alpha.parse(text)
    except ValueError as exc:
        raise FormatError(str(exc), n) from None


# ------------------------------------------------------------ automorphisms


def parse_aut(text: str) -> Automorphism:
    rank = None
    alphabet = None
    maps: dict[str, str] = {}
    invs: dict[str, str] = {}
    for n, line in _lines(text):
        head = line.split()[0]
        if head == "rank":
            try:
                rank = int(_split_eq(line, n)[1])
            except ValueError:
                raise FormatError("rank must be an integer", n) from None
        elif head == "gens":
            alphabet = _alphabet(_split_eq(line, n)[1].split(), n)
        elif head in ("map", "inv"):
            lhs, rhs = _split_eq(line[len(head):], n, "->")
            if alphabet is None:
                raise FormatError("'gens' must come before map lines", n)
            if lhs not in alphabet.names:
                raise FormatError(f"unknown generator {lhs!r}", n)
            _parse_word(alphabet, rhs, n)
            (maps if head == "map" else invs)[lhs] = (rhs, n)
        else:
            raise FormatError(f"unknown directive {head!r}", n)
    if alphabet is None:
        raise FormatError("missing 'gens' line")
    if rank is not None and rank != alphabet.rank:
        raise FormatError(f"rank = {rank} but {alphabet.rank} generators listed")
    missing = [x for x in alphabet.names if x not in maps]
    if missing:
        raise FormatError(f"no map line for {', '.join(missing)}")
    images = tuple(alphabet.parse(maps[x][0]) for x in alphabet.names)
    inv = None
    if invs:
        if len(invs) != alphabet.rank:
            raise FormatError("inverse must be given for every generator or none")
        inv = tuple(alphabet.parse(invs[x][0]) for x in alphabet.names)
    try:
        return Automorphism(alphabet.rank, images, inv, alphabet)
    except WordError as exc:
        raise FormatError(str(exc)) from None


def write_aut(alpha: Automorphism) -> str:
    a = alpha.alphabet
    out = [f"rank = {alpha.rank}", "gens = " + " ".join(a.names)]
    for i, w in enumerate(alpha.images):
        out.append(f"map {a.names[i]} -> {a.format(w)}")
    if alpha.inverse_images is not None:
        for i, w in enumerate(alpha.inverse_images):
            out.append(f"inv {a.names[i]} -> {a.format(w)}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- subgroups


def parse_subgroups(text: str, alphabet: Alphabet | None = None) -> tuple[Alphabet, list[tuple[str, CoreGraph]]]:
    subs = []
    pending = []
    for n, line in _lines(text):
        head = line.split()[0]
        if head == "gens":
            alphabet = _alphabet(_split_eq(line, n)[1].split(), n)
        elif head == "rank":
            continue
        elif head == "sub":
            name, rhs = _split_eq(line[3:], n)
            if not name:
                raise FormatError("subgroup needs a name", n)
            pending.append((name, rhs, n))
        else:
            raise FormatError(f"unknown directive {head!r}", n)
    if alphabet is None:
        letters = sorted({tok.split("^")[0] for _, rhs, _ in pending for tok in rhs.replace(",", " ").split()})
        alphabet = _alphabet(letters or ["a"], None)
    for name, rhs, n in pending:
        gens = [_parse_word(alphabet, part, n) for part in rhs.split(",") if part.strip()]
        subs.append((name, build_core(gens)))
    return alphabet, subs


def write_subgroups(alphabet: Alphabet, subs) -> str:
    out = ["gens = " + " ".join(alphabet.names)]
    for name, core in subs:
        out.append(f"sub {name} = " + " , ".join(alphabet.format(g) for g in core.generators))
    return "\n".join(out) + "\n"


# ----------------------------------------------------------------- graph maps


def _parse_graph_lines(text: str):
    st = {"alphabet": None, "vertices": [], "edges": [], "ends": [], "images": {}, "strata": {},
          "marks": {}, "base": None, "hat": None, "aux": {}, "faces": set(), "lines": {}}
    for n, line in _lines(text):
        head = line.split()[0]
        rest = line[len(head):].strip()
        if head == "gens":
            st["alphabet"] = _alphabet(_split_eq(line, n)[1].split(), n)
        elif head == "rank":
            continue
        elif head == "vertex":
            for v in rest.split():
                if v in st["vertices"]:
                    raise FormatError(f"duplicate vertex {v!r}", n)
                st["vertices"].append(v)
        elif head in ("edge", "aux"):
            if head == "aux":
                decl, path = _split_eq(rest, n)
            else:
                decl, path = rest, None
            name, ends = _split_eq(decl, n, ":")
            t, h = _split_eq(ends, n, "->")
            for v in (t, h):
                if v not in st["vertices"]:
                    raise FormatError(f"unknown vertex {v!r}", n)
            if name in st["edges"]:
                raise FormatError(f"duplicate edge {name!r}", n)
            st["edges"].append(name)
            st["ends"].append((st["vertices"].index(t), st["vertices"].index(h)))
            st["lines"][name] = n
            if path is not None:
                st["aux"][name] = (path, n)
        elif head == "image":
            name, path = _split_eq(rest, n, "->")
            st["images"][name] = (path, n)
        elif head == "stratum":
            k, names = _split_eq(rest, n)
            try:
                st["strata"][int(k)] = (names.split(), n)
            except ValueError:
                raise FormatError("stratum index must be an integer", n) from None
        elif head == "mark":
            name, word = _split_eq(rest, n)
            st["marks"][name] = (word, n)
        elif head == "base":
            st["base"] = (rest, n)
        elif head == "hat":
            st["hat"] = (_split_eq(line, n)[1].split(), n)
        elif head == "face":
            st["faces"].update(rest.split())
        elif head == "tripod":
            key, comp = _split_eq(rest, n)
            st.setdefault("tripods", []).append((key, comp, n))
        else:
            raise FormatError(f"unknown directive {head!r}", n)
    if st["alphabet"] is None:
        raise FormatError("missing 'gens' line")
    if not st["vertices"]:
        raise FormatError("no vertices")
    return st


def _graph_parts(st):
    aux_names = [e for e in st["edges"] if e in st["aux"]]
    prime = [e for e in st["edges"] if e not in st["aux"]]
    order = prime + aux_names
    idx = {e: st["edges"].index(e) for e in order}
    graph = Graph(list(st["vertices"]), order, [st["ends"][idx[e]] for e in order])
    alphabet = st["alphabet"]
    images = []
    for e in order:
        if e not in st["images"]:
            raise FormatError(f"no image line for edge {e!r}", st["lines"][e])
        text, n = st["images"][e]
        try:
            p = graph.parse_path(text)
        except (KeyError, ValueError) as exc:
            raise FormatError(f"bad path: {exc}", n) from None
        images.append(p)
    labels = []
    for e in order:
        if e in st["marks"]:
            text, n = st["marks"][e]
            labels.append(_parse_word(alphabet, text, n))
        else:
            labels.append(None)
    vmap = [None] * graph.num_vertices
    base = 0
    if st["base"] is not None:
        name, n = st["base"]
        if name not in st["vertices"]:
            raise FormatError(f"unknown base vertex {name!r}", n)
        base = st["vertices"].index(name)
    return graph, images, labels, vmap, base, prime, aux_names


def _vertex_map(graph: Graph, images, n_vertices: int) -> list[int]:
    vmap: list[int | None] = [None] * n_vertices
    for k, p in enumerate(images):
        if not p:
            continue
        t, h = graph.ends[k]
        for v, w in ((t, graph.tail(p[0])), (h, graph.head(p[-1]))):
            if vmap[v] is not None and vmap[v] != w:
                raise FormatError(f"edge images disagree on the image of vertex {graph.vertex_names[v]!r}")
            vmap[v] = w
    return [v if v is not None else i for i, v in enumerate(vmap)]


def parse_graphmap(text: str) -> GraphSelfMap:
    st = _parse_graph_lines(text)
    if st["aux"]:
        raise FormatError("aux lines belong to beta complex files")
    graph, images, labels, _, base, prime, _ = _graph_parts(st)
    if any(lab is None for lab in labels):
        missing = [e for e, lab in zip(graph.edge_names, labels) if lab is None]
        raise FormatError(f"no mark line for {', '.join(missing)}")
    vmap = _vertex_map(graph, images, graph.num_vertices)
    strata = []
    for k in sorted(st["strata"]):
        names, n = st["strata"][k]
        for e in names:
            if e not in graph.edge_names:
                raise FormatError(f"unknown edge {e!r} in stratum", n)
        strata.append([graph.edge_index(e) for e in names])
    if not strata:
        from .graphmaps import _count_matrix, matrix_filtration

        strata = matrix_filtration(_count_matrix(images, graph.num_edges))
    alphabet = st["alphabet"]
    try:
        return GraphSelfMap(graph, vmap, images, strata, labels, alphabet.rank, alphabet, base)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def write_graphmap(g: GraphSelfMap) -> str:
    a = g.alphabet
    gr = g.graph
    out = ["gens = " + " ".join(a.names), "vertex " + " ".join(gr.vertex_names)]
    if g.base:
        out.append(f"base {gr.vertex_names[g.base]}")
    for k, (t, h) in enumerate(gr.ends):
        out.append(f"edge {gr.edge_names[k]} : {gr.vertex_names[t]} -> {gr.vertex_names[h]}")
    for k in range(gr.num_edges):
        out.append(f"image {gr.edge_names[k]} -> {gr.format_path(g.images[k])}")
    for i, s in enumerate(g.strata, start=1):
        out.append(f"stratum {i} = " + " ".join(gr.edge_names[k] for k in s))
    for k in range(gr.num_edges):
        out.append(f"mark {gr.edge_names[k]} = {a.format(g.labels[k])}")
    return "\n".join(out) + "\n"


# ------------------------------------------------------------- beta complexes


def parse_beta(text: str) -> BetaComplex:
    st = _parse_graph_lines(text)
    graph, images, labels, _, base, prime, aux_names = _graph_parts(st)
    rhat = {}
    for e in aux_names:
        path, n = st["aux"][e]
        try:
            rhat[graph.edge_index(e)] = graph.parse_path(path)
        except (KeyError, ValueError) as exc:
            raise FormatError(f"bad INP path: {exc}", n) from None
    if st["hat"] is None:
        raise FormatError("missing 'hat' line")
    names, n = st["hat"]
    for e in names:
        if e not in prime:
            raise FormatError(f"hat edge {e!r} is not an edge of the underlying graph", n)
    hat = frozenset(graph.edge_index(e) for e in names)
    vmap = _vertex_map(graph, images, graph.num_vertices)
    alphabet = st["alphabet"]
    cx = BetaComplex(graph, vmap, images, hat, rhat, [lab if lab is not None else () for lab in labels],
                     alphabet.rank, alphabet, base, {k: f"c{i}" for i, k in enumerate(sorted(rhat))})
    for key, comp, n in st.get("tripods", []):
        try:
            kp, cp = graph.parse_path(key), graph.parse_path(comp)
        except (KeyError, ValueError) as exc:
            raise FormatError(f"bad tripod path: {exc}", n) from None
        if not all(cx.is_aux(x) for x in cp) or cx.retract(cp) != cx.retract(kp):
            raise FormatError("tripod path must be auxiliary edges retracting to the INP", n)
        cx.tripods.append((kp, cp))
    for k, lab in enumerate(labels):
        if lab is None:
            if k in rhat:
                cx.labels[k] = cx.label(cx.retract((k + 1,)))
            else:
                raise FormatError(f"no mark line for {graph.edge_names[k]}", st["lines"][graph.edge_names[k]])
    try:
        cx.validate()
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    return cx


def write_beta(cx: BetaComplex) -> str:
    a = cx.alphabet
    gr = cx.graph
    out = ["gens = " + " ".join(a.names), "vertex " + " ".join(gr.vertex_names)]
    if cx.base:
        out.append(f"base {gr.vertex_names[cx.base]}")
    for k, (t, h) in enumerate(gr.ends):
        decl = f"{gr.edge_names[k]} : {gr.vertex_names[t]} -> {gr.vertex_names[h]}"
        if k in cx.rhat:
            out.append(f"aux {decl} = {gr.format_path(cx.rhat[k])}")
        else:
            out.append(f"edge {decl}")
    out.append("hat = " + " ".join(gr.edge_names[k] for k in sorted(cx.hat)))
    for k in range(gr.num_edges):
        out.append(f"image {gr.edge_names[k]} -> {gr.format_path(cx.images[k])}")
    for k in range(gr.num_edges):
        out.append(f"mark {gr.edge_names[k]} = {a.format(cx.labels[k])}")
    for k in sorted(cx.rhat):
        out.append(f"face {gr.edge_names[k]}")
    for key, comp in cx.tripods:
        out.append(f"tripod {gr.format_path(key)} = {gr.format_path(comp)}")
    return "\n".join(out) + "\n"


# ----------------------------------------------------------- mapping torus


def parse_mt_element(text: str, alphabet: Alphabet, alpha: Automorphism):
    """A word in the generators and the letter t, multiplied out."""
    from .relmetric import MTElement, mt_mul

    out = MTElement(0)
    for tok in text.split():
        if tok == "1":
            continue
        base, _, exp = tok.partition("^")
        try:
            k = int(exp) if exp else 1
        except ValueError:
            raise FormatError(f"bad exponent in {tok!r}") from None
        if base == "t":
            out = mt_mul(out, MTElement(k), alpha)
        else:
            x = alphabet.letter(base)
            out = mt_mul(out, MTElement(0, (x if k > 0 else -x,) * abs(k)), alpha)
    return out


def format_mt_element(x, alphabet: Alphabet) -> str:
    parts = [] if x.t_exp == 0 else [f"t^{x.t_exp}"]
    if x.tail:
        parts.append(alphabet.format(x.tail))
    return " ".join(parts) or "1"
