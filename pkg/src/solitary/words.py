"""Freely reduced words over named generators, and presentation parsing.

Letters are stored as small integer codes: generator ``i`` is ``2*i`` and
its inverse is ``2*i + 1``.  The code of an inverse letter is therefore
``code ^ 1``, and the codes coincide with coset-table column numbers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (
    AlphabetMismatch,
    EmptyAlphabet,
    IndexOutOfRange,
    PresentationSyntaxError,
    UnknownGenerator,
)

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def inverse_letter(code: int) -> int:
    return code ^ 1


def free_reduce(letters: Iterable[int]) -> tuple[int, ...]:
    """Cancel adjacent inverse pairs; stack based, single pass."""
    out: list[int] = []
    for x in letters:
        if out and out[-1] == x ^ 1:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def invert_letters(letters: Sequence[int]) -> tuple[int, ...]:
    return tuple(x ^ 1 for x in reversed(letters))


@dataclass(frozen=True)
class Alphabet:
    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if not names:
            raise EmptyAlphabet("an alphabet needs at least one generator")
        for n in names:
            if not isinstance(n, str) or not _IDENT.match(n) or not n.isascii():
                raise ValueError(f"invalid generator identifier {n!r}")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate generator names in {names}")

    def __len__(self) -> int:
        return len(self.names)

    @property
    def rank(self) -> int:
        return len(self.names)

    @property
    def width(self) -> int:
        """Number of letters, i.e. generators together with their inverses."""
        return 2 * len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownGenerator(name) from None

    def letter_name(self, code: int) -> str:
        name = self.names[code >> 1]
        return name + "^-1" if code & 1 else name

    def generator(self, name_or_index) -> "Word":
        i = name_or_index if isinstance(name_or_index, int) else self.index(name_or_index)
        return Word(self, (2 * i,))

    def generators(self) -> list["Word"]:
        return [Word(self, (2 * i,)) for i in range(self.rank)]

    def identity(self) -> "Word":
        return Word(self, ())


@dataclass(frozen=True)
class Word:
    """A freely reduced word; the constructor reduces eagerly."""

    alphabet: Alphabet
    letters: tuple[int, ...] = ()

    def __post_init__(self):
        width = self.alphabet.width
        for x in self.letters:
            if not isinstance(x, int) or x < 0 or x >= width:
                raise IndexOutOfRange(f"letter code {x!r} outside alphabet of width {width}")
        object.__setattr__(self, "letters", free_reduce(self.letters))

    def __len__(self) -> int:
        return len(self.letters)

    def __bool__(self) -> bool:
        return True

    def is_identity(self) -> bool:
        return not self.letters

    def _check(self, other: "Word"):
        if not isinstance(other, Word):
            raise TypeError(f"expected a Word, got {type(other).__name__}")
        if other.alphabet != self.alphabet:
            raise AlphabetMismatch(f"{self.alphabet.names} vs {other.alphabet.names}")

    def __mul__(self, other: "Word") -> "Word":
        return multiply(self, other)

    def __invert__(self) -> "Word":
        return invert(self)

    def __pow__(self, k: int) -> "Word":
        base = self if k >= 0 else invert(self)
        return Word(self.alphabet, base.letters * abs(k))

    def conjugate_by(self, g: "Word") -> "Word":
        """Return g * self * g^-1."""
        return multiply(multiply(g, self), invert(g))

    def sort_key(self):
        return (len(self.letters), self.letters)

    def __str__(self) -> str:
        return format_word(self)

    def __repr__(self) -> str:
        return f"Word({format_word(self)!r})"


def reduce(alphabet: Alphabet, letters: Iterable[int]) -> Word:
    return Word(alphabet, tuple(letters))


def multiply(u: Word, v: Word) -> Word:
    u._check(v)
    return Word(u.alphabet, u.letters + v.letters)


def invert(u: Word) -> Word:
    return Word(u.alphabet, invert_letters(u.letters))


def format_word(w: Word) -> str:
    if not w.letters:
        return "1"
    return "*".join(w.alphabet.letter_name(x) for x in w.letters)


@dataclass(frozen=True)
class Presentation:
    alphabet: Alphabet
    relators: tuple[Word, ...] = field(default=())

    def __post_init__(self):
        rels = tuple(self.relators)
        for r in rels:
            if r.alphabet != self.alphabet:
                raise AlphabetMismatch("relator over a different alphabet")
        object.__setattr__(self, "relators", rels)

    @classmethod
    def free(cls, *names: str) -> "Presentation":
        return cls(Alphabet(tuple(names)))

    @property
    def rank(self) -> int:
        return self.alphabet.rank

    @property
    def is_free(self) -> bool:
        return all(r.is_identity() for r in self.relators)

    def word(self, text: str) -> Word:
        return parse_word(self.alphabet, text)

    def words(self, text: str) -> list[Word]:
        return parse_words(self.alphabet, text)

    def __str__(self) -> str:
        return format_presentation(self)


def format_presentation(p: Presentation) -> str:
    gens = ",".join(p.alphabet.names)
    rels = ", ".join(format_word(r) for r in p.relators)
    return f"<{gens}| {rels}>" if rels else f"<{gens}|>"


def free_product(p: Presentation, q: Presentation) -> Presentation:
    """Presentation of the free product: disjoint generators, both relator sets."""
    clash = set(p.alphabet.names) & set(q.alphabet.names)
    if clash:
        raise AlphabetMismatch(f"free factors share generator names {sorted(clash)}")
    alphabet = Alphabet(p.alphabet.names + q.alphabet.names)
    shift = 2 * p.rank
    rels = [Word(alphabet, r.letters) for r in p.relators]
    rels += [Word(alphabet, tuple(x + shift for x in r.letters)) for r in q.relators]
    return Presentation(alphabet, tuple(rels))


def lift_word(w: Word, target: Alphabet) -> Word:
    """Re-express a word over a larger alphabet containing its generators by name."""
    codes = []
    for x in w.letters:
        i = target.index(w.alphabet.names[x >> 1])
        codes.append(2 * i + (x & 1))
    return Word(target, tuple(codes))


# --- parsing -----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<int>-?\d+)|(?P<sym>[<>|,^*()=]))")


def _tokenize(text: str):
    tokens = []
    pos = 0
    end = len(text.rstrip())
    while pos < end:
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise PresentationSyntaxError(start, "identifier, integer or one of < > | , ^ * ( ) =", text)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, alphabet: Alphabet | None = None):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.alphabet = alphabet

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_sym(self, sym: str):
        kind, val, pos = self.next()
        if kind != "sym" or val != sym:
            raise PresentationSyntaxError(pos, repr(sym), self.text)

    def at_sym(self, *syms: str) -> bool:
        kind, val, _ = self.peek()
        return kind == "sym" and val in syms

    def expect_end(self):
        kind, _, pos = self.peek()
        if kind != "end":
            raise PresentationSyntaxError(pos, "end of input", self.text)

    def presentation(self) -> Presentation:
        self.expect_sym("<")
        names = []
        if not self.at_sym("|"):
            names.append(self.ident())
            while self.at_sym(","):
                self.next()
                names.append(self.ident())
        self.expect_sym("|")
        if not names:
            raise EmptyAlphabet("presentation declares no generators")
        if len(set(names)) != len(names):
            raise PresentationSyntaxError(self.tokens[1][2], "distinct generator names", self.text)
        self.alphabet = Alphabet(tuple(names))
        relators = []
        if not self.at_sym(">"):
            relators.append(self.relator())
            while self.at_sym(","):
                self.next()
                relators.append(self.relator())
        self.expect_sym(">")
        self.expect_end()
        return Presentation(self.alphabet, tuple(relators))

    def ident(self) -> str:
        kind, val, pos = self.next()
        if kind != "ident":
            raise PresentationSyntaxError(pos, "generator identifier", self.text)
        return val

    def relator(self) -> Word:
        lhs = self.word()
        if self.at_sym("="):
            self.next()
            rhs = self.word()
            return Word(self.alphabet, lhs + invert_letters(rhs))
        return Word(self.alphabet, lhs)

    def word_list(self) -> list[Word]:
        if self.peek()[0] == "end":
            return []
        out = [Word(self.alphabet, self.word())]
        while self.at_sym(","):
            self.next()
            out.append(Word(self.alphabet, self.word()))
        self.expect_end()
        return out

    def word(self) -> tuple[int, ...]:
        letters = list(self.factor())
        while True:
            if self.at_sym("*"):
                self.next()
                letters.extend(self.factor())
            elif self.peek()[0] in ("ident", "int") or self.at_sym("("):
                letters.extend(self.factor())
            else:
                return free_reduce(letters)

    def factor(self) -> tuple[int, ...]:
        kind, val, pos = self.next()
        if kind == "ident":
            base: tuple[int, ...] = (2 * self.alphabet.index(val),)
        elif kind == "int" and val == "1":
            base = ()
        elif kind == "sym" and val == "(":
            base = self.word()
            self.expect_sym(")")
        else:
            raise PresentationSyntaxError(pos, "generator, '1' or '('", self.text)
        if self.at_sym("^"):
            self.next()
            kind, val, pos = self.next()
            if kind != "int":
                raise PresentationSyntaxError(pos, "integer exponent", self.text)
            k = int(val)
            if k < 0:
                base = invert_letters(base)
            base = free_reduce(base * abs(k))
        return base


def parse_presentation(text: str) -> Presentation:
    """Parse ``<g1,g2,...| r1, r2, ...>``; ``lhs = rhs`` becomes ``lhs*rhs^-1``."""
    return _Parser(text).presentation()


def parse_word(alphabet: Alphabet, text: str) -> Word:
    p = _Parser(text, alphabet)
    w = Word(alphabet, p.word())
    p.expect_end()
    return w


def parse_words(alphabet: Alphabet, text: str) -> list[Word]:
    """Comma separated words; the empty string gives an empty list."""
    return _Parser(text, alphabet).word_list()
