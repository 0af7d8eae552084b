"""Free group word algebra.

Words are tuples of nonzero ints in Tietze form: generator ``i`` is ``i``
and its inverse is ``-i`` (generators are numbered from 1).  Every public
function returns freely reduced tuples.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass, field
from typing import Iterable, Sequence

Word = tuple

DEFAULT_LENGTH_CAP = 10**7


class WordError(ValueError):
    """Malformed letters or words."""


class WordLengthError(OverflowError):
    """An intermediate word grew past the configured length cap."""

    def __init__(self, length: int, cap: int):
        super().__init__(f"word length {length} exceeds cap {cap}")
        self.length = length
        self.cap = cap


class NotAutomorphismError(ValueError):
    """The images do not form a basis of F_n."""


class InverseNotFoundError(RuntimeError):
    """Not verified invertible within the search bound."""


def reduce(raw: Iterable[int], rank: int | None = None) -> Word:
    out: list[int] = []
    for x in raw:
        if x == 0 or (rank is not None and abs(x) > rank):
            raise WordError(f"letter {x} outside alphabet of rank {rank}")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def inverse(w: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(w))


def mul(*words: Sequence[int]) -> Word:
    return reduce(itertools.chain.from_iterable(words))


def power(w: Sequence[int], k: int) -> Word:
    if k < 0:
        return power(inverse(w), -k)
    return reduce(tuple(w) * k)


def conjugate(w: Sequence[int], g: Sequence[int]) -> Word:
    """g w g^-1."""
    return mul(g, w, inverse(g))


def cyclic_reduce(w: Sequence[int]) -> tuple[Word, Word]:
    """Split a reduced word as ``conjugator . core . conjugator^-1``.

    Returns ``(core, conjugator)`` with ``core`` cyclically reduced.
    """
    w = tuple(w)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == -w[j - 1]:
        i += 1
        j -= 1
    return w[i:j], w[:i]


def letter_key(x: int) -> tuple[int, int]:
    # a < A < b < B < ...
    return (abs(x), 0 if x > 0 else 1)


def word_key(w: Sequence[int]) -> tuple:
    """Shortlex key."""
    return (len(w), tuple(letter_key(x) for x in w))


def least_rotation(w: Sequence[int]) -> Word:
    w = tuple(w)
    if not w:
        return w
    best = min(range(len(w)), key=lambda i: [letter_key(x) for x in w[i:] + w[:i]])
    return w[best:] + w[:best]


@dataclass(frozen=True)
class CyclicWord:
    """A conjugacy class, stored as the least rotation of its cyclic core."""

    letters: Word

    @classmethod
    def of(cls, w: Sequence[int]) -> "CyclicWord":
        core, _ = cyclic_reduce(reduce(w))
        return cls(least_rotation(core))

    def __len__(self) -> int:
        return len(self.letters)

    def inverse(self) -> "CyclicWord":
        return CyclicWord.of(inverse(self.letters))


def cyclic_length(w: Sequence[int]) -> int:
    return len(cyclic_reduce(reduce(w))[0])


def are_conjugate(u: Sequence[int], v: Sequence[int]) -> bool:
    return CyclicWord.of(u) == CyclicWord.of(v)


# ---------------------------------------------------------------- alphabet


@dataclass(frozen=True)
class Alphabet:
    names: tuple[str, ...]

    @classmethod
    def standard(cls, rank: int) -> "Alphabet":
        if rank <= 26:
            return cls(tuple(string.ascii_lowercase[:rank]))
        return cls(tuple(f"x{i}" for i in range(1, rank + 1)))

    @property
    def rank(self) -> int:
        return len(self.names)

    def letter(self, token: str) -> int:
        token = token.strip()
        sign = 1
        if token.endswith("^-1"):
            token, sign = token[:-3], -1
        try:
            return sign * (self.names.index(token) + 1)
        except ValueError:
            raise WordError(f"unknown generator {token!r}") from None

    def parse(self, text: str) -> Word:
        """Parse whitespace separated letters like ``a b^-1 a``.

        ``1`` or an empty string is the identity.  Powers ``a^3``/``a^-2``
        are accepted as a convenience.
        """
        letters: list[int] = []
        for token in text.replace(",", " ").split():
            if token == "1":
                continue
            base, _, exp = token.partition("^")
            k = int(exp) if exp else 1
            x = self.letter(base)
            letters.extend([x if k > 0 else -x] * abs(k))
        return reduce(letters, self.rank)

    def format(self, w: Sequence[int]) -> str:
        if not w:
            return "1"
        return " ".join(self.names[abs(x) - 1] + ("" if x > 0 else "^-1") for x in w)


# ------------------------------------------------------------ automorphisms


@dataclass(frozen=True)
class Automorphism:
    """An endomorphism of F_n given by generator images.

    ``inverse_images`` is optional; when present it is checked on
    construction to be a two-sided inverse.
    """

    rank: int
    images: tuple[Word, ...]
    inverse_images: tuple[Word, ...] | None = field(default=None, compare=False)
    alphabet: Alphabet = field(default=None, compare=False)  # type: ignore[assignment]

    def __post_init__(self):
        if len(self.images) != self.rank:
            raise WordError("need one image per generator")
        object.__setattr__(self, "images", tuple(reduce(w, self.rank) for w in self.images))
        if self.alphabet is None:
            object.__setattr__(self, "alphabet", Alphabet.standard(self.rank))
        if self.inverse_images is not None:
            inv = tuple(reduce(w, self.rank) for w in self.inverse_images)
            object.__setattr__(self, "inverse_images", inv)
            for i in range(1, self.rank + 1):
                if apply_images(self.images, apply_images(inv, (i,))) != (i,) or apply_images(
                    inv, apply_images(self.images, (i,))
                ) != (i,):
                    raise NotAutomorphismError("supplied inverse does not invert the map")

    @classmethod
    def from_strings(cls, images: Sequence[str], inverse_images: Sequence[str] | None = None,
                     alphabet: Alphabet | None = None) -> "Automorphism":
        alphabet = alphabet or Alphabet.standard(len(images))
        inv = None if inverse_images is None else tuple(alphabet.parse(s) for s in inverse_images)
        return cls(len(images), tuple(alphabet.parse(s) for s in images), inv, alphabet)

    @classmethod
    def identity(cls, rank: int) -> "Automorphism":
        gens = tuple((i,) for i in range(1, rank + 1))
        return cls(rank, gens, gens)

    @classmethod
    def inner(cls, rank: int, v: Sequence[int]) -> "Automorphism":
        """w -> v w v^-1."""
        v = reduce(v, rank)
        return cls(rank, tuple(conjugate((i,), v) for i in range(1, rank + 1)),
                   tuple(conjugate((i,), inverse(v)) for i in range(1, rank + 1)))

    def __call__(self, w: Sequence[int], cap: int = DEFAULT_LENGTH_CAP) -> Word:
        return apply(self, w, cap)

    def compose(self, other: "Automorphism") -> "Automorphism":
        """self o other."""
        _check_rank(self, other.rank)
        images = tuple(apply(self, w) for w in other.images)
        inv = None
        if self.inverse_images is not None and other.inverse_images is not None:
            inv = tuple(apply_images(other.inverse_images, w) for w in self.inverse_images)
        return Automorphism(self.rank, images, inv, self.alphabet)

    def inverse(self) -> "Automorphism":
        if self.inverse_images is None:
            # derived once, then remembered (equality ignores inverse_images)
            found = derive_inverse(self, search_bound=64 * self.rank)
            object.__setattr__(self, "inverse_images", found.inverse_images)
        return Automorphism(self.rank, self.inverse_images, self.images, self.alphabet)

    def power(self, k: int) -> "Automorphism":
        if k < 0:
            return self.inverse().power(-k)
        result = Automorphism.identity(self.rank)
        result = Automorphism(self.rank, result.images, result.inverse_images, self.alphabet)
        for _ in range(k):
            result = self.compose(result)
        return result

    def format(self) -> str:
        a = self.alphabet
        return ", ".join(f"{a.names[i]} -> {a.format(w)}" for i, w in enumerate(self.images))


def _check_rank(alpha: Automorphism, rank: int) -> None:
    if alpha.rank != rank:
        raise WordError(f"rank mismatch: automorphism of rank {alpha.rank}, expected {rank}")


def apply_images(images: Sequence[Word], w: Sequence[int], cap: int = DEFAULT_LENGTH_CAP) -> Word:
    out: list[int] = []
    for x in w:
        img = images[x - 1] if x > 0 else inverse(images[-x - 1])
        for y in img:
            if out and out[-1] == -y:
                out.pop()
            else:
                out.append(y)
        if len(out) > cap:
            raise WordLengthError(len(out), cap)
    return tuple(out)


def apply(alpha: Automorphism, w: Sequence[int], cap: int = DEFAULT_LENGTH_CAP) -> Word:
    if any(abs(x) > alpha.rank or x == 0 for x in w):
        raise WordError(f"word uses letters outside rank {alpha.rank}")
    return apply_images(alpha.images, reduce(w), cap)


def iterate(alpha: Automorphism, w: Sequence[int], t: int, cap: int = DEFAULT_LENGTH_CAP) -> Word:
    """alpha^t(w); negative t uses the inverse."""
    if t < 0:
        return iterate(alpha.inverse(), w, -t, cap)
    w = reduce(w)
    for _ in range(t):
        w = apply(alpha, w, cap)
    return w


def orbit_lengths(alpha: Automorphism, w: Sequence[int], T: int,
                  cap: int = DEFAULT_LENGTH_CAP) -> list[int]:
    """Cyclic lengths ||alpha^t(w)|| for t = 0..T."""
    if T < 1:
        raise ValueError("T must be >= 1")
    core = cyclic_reduce(reduce(w, alpha.rank))[0]
    lengths = [len(core)]
    for _ in range(T):
        core = cyclic_reduce(apply(alpha, core, cap))[0]
        lengths.append(len(core))
    return lengths


# ---------------------------------------------------------- inversion


def _nielsen_moves(n: int):
    # (kind, i, j, sign): replace u_i by u_i u_j^s ("right") or u_j^s u_i ("left")
    for i in range(n):
        for j in range(n):
            if i != j:
                for s in (1, -1):
                    yield ("right", i, j, s)
                    yield ("left", i, j, s)


def _apply_move(t: list[Word], move) -> list[Word]:
    kind, i, j, s = move
    t = list(t)
    uj = t[j] if s > 0 else inverse(t[j])
    t[i] = mul(t[i], uj) if kind == "right" else mul(uj, t[i])
    return t


def derive_inverse(alpha: Automorphism, search_bound: int = 0) -> Automorphism:
    """Return ``alpha`` with verified inverse images.

    A supplied inverse is verified; otherwise, when ``search_bound > 0``,
    the images are Nielsen-reduced greedily using at most ``search_bound``
    elementary moves, tracking the composite of the moves.
    """
    if alpha.inverse_images is not None:
        return alpha
    from .subgroups import build_core  # local import, subgroups imports words

    core = build_core(alpha.images)
    if not core.is_rose(alpha.rank):
        raise NotAutomorphismError("images do not generate F_n")
    if search_bound <= 0:
        raise InverseNotFoundError("no inverse supplied and search disabled")

    n = alpha.rank
    cur = list(alpha.images)
    track = [(i,) for i in range(1, n + 1)]
    moves = list(_nielsen_moves(n))
    for _ in range(search_bound + 1):
        if all(len(u) == 1 for u in cur):
            break
        total = sum(map(len, cur))
        best = None
        for mv in moves:
            cand = _apply_move(cur, mv)
            k = sum(map(len, cand))
            if k < total and (best is None or k < best[0]):
                best = (k, mv)
        if best is None:
            raise InverseNotFoundError("Nielsen reduction stalled")
        cur = _apply_move(cur, best[1])
        track = _apply_move(track, best[1])
    else:
        raise InverseNotFoundError(f"not verified invertible within {search_bound} moves")
    if not all(len(u) == 1 for u in cur):
        raise InverseNotFoundError(f"not verified invertible within {search_bound} moves")
    # alpha o nu sends x_i to the letter cur[i]; nu is given by ``track``.
    # Hence alpha^-1(cur[i]) = track[i].
    inv: list[Word] = [()] * n
    for letter, img in zip(cur, track):
        x = letter[0]
        inv[abs(x) - 1] = img if x > 0 else inverse(img)
    return Automorphism(n, alpha.images, tuple(inv), alpha.alphabet)
