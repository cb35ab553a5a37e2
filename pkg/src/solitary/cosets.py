"""Finite-index subgroups of finitely presented groups via coset tables.

A coset table of ``H <= G`` lists, for every coset ``c`` of ``H`` and every
letter ``x`` (columns ``g1, g1^-1, g2, g2^-1, ...``), the coset reached by
right multiplication ``H u -> H u x``.  Coset 0 is ``H`` itself, so a word
``w`` lies in ``H`` exactly when tracing it from coset 0 returns to 0.

Every table handed out by this module is canonical: cosets are numbered
in order of first appearance when rows are scanned in order and columns
left to right, which is the same as breadth-first discovery from coset 0.
Structural equality of tables is therefore equality of subgroups.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from math import gcd
from typing import Iterable, Sequence

from .errors import AlphabetMismatch, ResourceBudgetExceeded
from .words import Presentation, Word, format_presentation, free_reduce, invert_letters

DEFAULT_MAX_COSETS = 100_000
DEFAULT_NODE_LIMIT = 20_000_000


@dataclass(frozen=True)
class Overflow:
    """Coset enumeration ran past its budget; the index may be infinite."""

    max_cosets: int

    def __bool__(self) -> bool:
        return False


class CosetTable:
    """A complete, transitive, canonically numbered coset table."""

    __slots__ = ("presentation", "flat", "width", "_hash")

    def __init__(self, presentation: Presentation, flat: Sequence[int], canonical: bool = True):
        self.presentation = presentation
        self.width = presentation.alphabet.width
        flat = tuple(flat)
        if len(flat) == 0 or len(flat) % self.width:
            raise ValueError("table size is not a positive multiple of the column count")
        if not canonical:
            flat = _relabel_from(flat, self.width, 0)
        self.flat = flat
        self._hash = None

    @classmethod
    def from_rows(cls, presentation: Presentation, rows: Iterable[Sequence[int]]) -> "CosetTable":
        """Build from rows in any numbering; the result is renumbered canonically."""
        flat = [v for row in rows for v in row]
        return cls(presentation, flat, canonical=False)

    @property
    def index(self) -> int:
        return len(self.flat) // self.width

    def __len__(self) -> int:
        return self.index

    @property
    def rows(self) -> list[list[int]]:
        w = self.width
        return [list(self.flat[i:i + w]) for i in range(0, len(self.flat), w)]

    def act(self, coset: int, letter: int) -> int:
        return self.flat[coset * self.width + letter]

    def trace(self, letters: Sequence[int], start: int = 0) -> int:
        flat, w, c = self.flat, self.width, start
        for x in letters:
            c = flat[c * w + x]
        return c

    def column(self, letter: int) -> list[int]:
        """The permutation ``c -> c*x`` of the cosets for one letter."""
        return list(self.flat[letter::self.width])

    def contains(self, w: Word) -> bool:
        return coset_of(self, w) == 0

    def rebase(self, coset: int) -> "CosetTable":
        """Canonical table of the stabilizer of ``coset`` (a conjugate of H)."""
        if coset == 0:
            return self
        return CosetTable(self.presentation, _relabel_from(self.flat, self.width, coset))

    def key(self):
        return (self.index, self.flat)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CosetTable):
            return NotImplemented
        return self.flat == other.flat and self.presentation == other.presentation

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.presentation, self.flat))
        return self._hash

    def __lt__(self, other: "CosetTable") -> bool:
        return self.key() < other.key()

    def __repr__(self) -> str:
        return f"CosetTable({format_presentation(self.presentation)!r}, index={self.index})"


def _relabel_from(flat: Sequence[int], width: int, start: int) -> tuple[int, ...]:
    """Renumber by breadth-first discovery from ``start``; rejects intransitive tables."""
    n = len(flat) // width
    new = [-1] * n
    new[start] = 0
    order = [start]
    i = 0
    while i < len(order):
        c = order[i]
        i += 1
        base = c * width
        for x in range(width):
            d = flat[base + x]
            if d < 0:
                raise ValueError("table is incomplete")
            if new[d] < 0:
                new[d] = len(order)
                order.append(d)
    if len(order) != n:
        raise ValueError("table is not transitive")
    out = []
    for c in order:
        base = c * width
        out.extend(new[flat[base + x]] for x in range(width))
    return tuple(out)


def validate_table(t: CosetTable) -> list[str]:
    """Return a list of violated invariants (empty when the table is sound)."""
    problems = []
    n, w, flat = t.index, t.width, t.flat
    if any(not (0 <= v < n) for v in flat):
        problems.append("incomplete or out-of-range entry")
        return problems
    for c in range(n):
        for x in range(w):
            if flat[flat[c * w + x] * w + (x ^ 1)] != c:
                problems.append(f"column {x ^ 1} is not inverse to column {x} at coset {c}")
    for r in t.presentation.relators:
        for c in range(n):
            if t.trace(r.letters, c) != c:
                problems.append(f"relator {r} does not close at coset {c}")
                break
    try:
        if _relabel_from(flat, w, 0) != flat:
            problems.append("numbering is not canonical")
    except ValueError as exc:
        problems.append(str(exc))
    return problems


def _check_alphabet(p: Presentation, words: Iterable[Word]):
    for w in words:
        if w.alphabet != p.alphabet:
            raise AlphabetMismatch(f"word {w} is over {w.alphabet.names}, expected {p.alphabet.names}")


# --- Todd-Coxeter ------------------------------------------------------------

class _Enumerator:
    """HLT coset enumeration with immediate coincidence processing."""

    def __init__(self, width: int, max_cosets: int):
        self.width = width
        self.max_cosets = max_cosets
        self.table: list[list[int]] = [[-1] * width]
        self.parent = [0]

    def rep(self, c: int) -> int:
        parent = self.parent
        root = c
        while parent[root] != root:
            root = parent[root]
        while parent[c] != root:
            parent[c], c = root, parent[c]
        return root

    def define(self, c: int, x: int) -> bool:
        if len(self.table) >= self.max_cosets:
            return False
        d = len(self.table)
        self.table.append([-1] * self.width)
        self.parent.append(d)
        self.table[c][x] = d
        self.table[d][x ^ 1] = c
        return True

    def coincidence(self, a: int, b: int):
        queue: list[int] = []
        self._merge(a, b, queue)
        i = 0
        table = self.table
        while i < len(queue):
            e = queue[i]
            i += 1
            for x in range(self.width):
                f = table[e][x]
                if f < 0:
                    continue
                if table[f][x ^ 1] == e:
                    table[f][x ^ 1] = -1
                e1, f1 = self.rep(e), self.rep(f)
                if table[e1][x] >= 0:
                    self._merge(f1, table[e1][x], queue)
                elif table[f1][x ^ 1] >= 0:
                    self._merge(e1, table[f1][x ^ 1], queue)
                else:
                    table[e1][x] = f1
                    table[f1][x ^ 1] = e1

    def _merge(self, k: int, l: int, queue: list[int]):
        k, l = self.rep(k), self.rep(l)
        if k == l:
            return
        lo, hi = min(k, l), max(k, l)
        self.parent[hi] = lo
        queue.append(hi)

    def scan_and_fill(self, c: int, word: Sequence[int]) -> bool:
        table = self.table
        f, i = c, 0
        b, j = c, len(word) - 1
        while True:
            while i <= j and table[f][word[i]] >= 0:
                f = table[f][word[i]]
                i += 1
            if i > j:
                if f != b:
                    self.coincidence(f, b)
                return True
            while j >= i and table[b][word[j] ^ 1] >= 0:
                b = table[b][word[j] ^ 1]
                j -= 1
            if j < i:
                self.coincidence(f, b)
                return True
            if i == j:
                table[f][word[i]] = b
                table[b][word[i] ^ 1] = f
                return True
            if not self.define(f, word[i]):
                return False
            # a coincidence may have killed c while scanning
            if self.parent[c] != c:
                return True

    def run(self, relators: list[tuple[int, ...]], subgens: list[tuple[int, ...]]) -> bool:
        for w in subgens:
            if w and not self.scan_and_fill(self.rep(0), w):
                return False
        c = 0
        while c < len(self.table):
            if self.parent[c] == c:
                for r in relators:
                    if not self.scan_and_fill(c, r):
                        return False
                    if self.parent[c] != c:
                        break
                if self.parent[c] == c:
                    for x in range(self.width):
                        if self.table[c][x] < 0 and not self.define(c, x):
                            return False
            c += 1
        return True

    def compact(self) -> tuple[int, ...]:
        live = [c for c in range(len(self.table)) if self.parent[c] == c]
        pos = {c: i for i, c in enumerate(live)}
        flat = []
        for c in live:
            row = self.table[c]
            if min(row) < 0:
                raise RuntimeError("coset enumeration finished with an undefined entry")
            flat.extend(pos[self.rep(d)] for d in row)
        return _relabel_from(flat, self.width, 0)


def todd_coxeter(p: Presentation, subgens: Sequence[Word] = (), max_cosets: int = DEFAULT_MAX_COSETS):
    """Enumerate the cosets of ``<subgens>`` in ``p``.

    Returns the canonical :class:`CosetTable`, or an :class:`Overflow` value
    when more than ``max_cosets`` cosets would have to be defined.
    """
    if max_cosets < 1:
        raise ValueError("max_cosets must be at least 1")
    _check_alphabet(p, subgens)
    relators = [r.letters for r in p.relators if r.letters]
    gens = [w.letters for w in subgens if w.letters]
    enum = _Enumerator(p.alphabet.width, max_cosets)
    if not enum.run(relators, gens):
        return Overflow(max_cosets)
    return CosetTable(p, enum.compact())


def coset_of(t: CosetTable, w: Word) -> int:
    if w.alphabet != t.presentation.alphabet:
        raise AlphabetMismatch(f"word {w} is not over the table's alphabet")
    return t.trace(w.letters)


# --- low index subgroups -----------------------------------------------------

def _cyclic_conjugates(relators: Iterable[tuple[int, ...]], width: int) -> list[list[tuple[int, ...]]]:
    by_first: list[set] = [set() for _ in range(width)]
    for r in relators:
        for word in (r, invert_letters(r)):
            for k in range(len(word)):
                rot = word[k:] + word[:k]
                by_first[rot[0]].add(rot)
    return [sorted(s) for s in by_first]


def low_index(p: Presentation, max_index: int, node_limit: int = DEFAULT_NODE_LIMIT) -> list[CosetTable]:
    """All subgroups of index at most ``max_index``, one canonical table each.

    Sims-style backtracking: the first undefined entry (row-major) is set to
    an existing coset or to a fresh one, and relator scans propagate
    deductions.  Filling in row-major order with fresh cosets numbered
    consecutively yields each subgroup exactly once, already canonical.
    """
    if max_index < 1:
        raise ValueError("max_index must be at least 1")
    width = p.alphabet.width
    relators = [r.letters for r in p.relators if r.letters]
    conj = _cyclic_conjugates(relators, width)
    has_relators = bool(relators)
    t = [-1] * (max_index * width)
    undo: list[int] = []
    found: list[tuple[int, tuple[int, ...]]] = []
    nodes = 0

    def assign(c: int, x: int, d: int):
        t[c * width + x] = d
        t[d * width + (x ^ 1)] = c
        undo.append(c * width + x)
        undo.append(d * width + (x ^ 1))

    def scan(c: int, word: tuple[int, ...], queue: list) -> bool:
        f, i, end = c, 0, len(word)
        while i < end:
            nxt = t[f * width + word[i]]
            if nxt < 0:
                break
            f = nxt
            i += 1
        if i == end:
            return f == c
        b, j = c, end - 1
        while j >= i:
            nxt = t[b * width + (word[j] ^ 1)]
            if nxt < 0:
                break
            b = nxt
            j -= 1
        if j < i:
            return f == b
        if j == i:
            x = word[i]
            if t[b * width + (x ^ 1)] >= 0:
                return False
            assign(f, x, b)
            queue.append((f, x))
        return True

    def propagate(c: int, x: int) -> bool:
        queue = [(c, x)]
        while queue:
            c, x = queue.pop()
            d = t[c * width + x]
            for word in conj[x]:
                if not scan(c, word, queue):
                    return False
            for word in conj[x ^ 1]:
                if not scan(d, word, queue):
                    return False
        return True

    def undo_to(mark: int):
        while len(undo) > mark:
            t[undo.pop()] = -1

    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * max_index * width + 100))

    def search(pos: int, n: int):
        nonlocal nodes
        nodes += 1
        if nodes > node_limit:
            raise ResourceBudgetExceeded(f"low-index search exceeded {node_limit} nodes")
        limit = n * width
        while pos < limit and t[pos] >= 0:
            pos += 1
        if pos == limit:
            found.append((n, tuple(t[:limit])))
            return
        c, x = divmod(pos, width)
        xi = x ^ 1
        for d in range(n):
            if t[d * width + xi] < 0:
                mark = len(undo)
                assign(c, x, d)
                if not has_relators or propagate(c, x):
                    search(pos + 1, n)
                undo_to(mark)
        if n < max_index:
            mark = len(undo)
            assign(c, x, n)
            if not has_relators or propagate(c, x):
                search(pos + 1, n + 1)
            undo_to(mark)

    search(0, 1)
    found.sort()
    return [CosetTable(p, flat) for _, flat in found]


# --- subgroup data from a table ----------------------------------------------

def spanning_tree(t: CosetTable) -> tuple[list[tuple[int, ...]], set[tuple[int, int]]]:
    """Breadth-first tree words ``u[c]`` (0 -> c) and the set of tree edges.

    Tree edges are recorded in the positive direction ``(c, 2*i)``.
    """
    w, flat = t.width, t.flat
    words: list = [None] * t.index
    words[0] = ()
    tree: set[tuple[int, int]] = set()
    order = [0]
    i = 0
    while i < len(order):
        c = order[i]
        i += 1
        for x in range(w):
            d = flat[c * w + x]
            if words[d] is None:
                words[d] = words[c] + (x,)
                order.append(d)
                tree.add((c, x) if x % 2 == 0 else (d, x ^ 1))
    return words, tree


def schreier_generators(t: CosetTable) -> list[Word]:
    """Generators of ``H``: one word ``u[c] x u[c*x]^-1`` per non-tree edge."""
    words, tree = spanning_tree(t)
    alphabet = t.presentation.alphabet
    gens = []
    for c in range(t.index):
        for x in range(0, t.width, 2):
            if (c, x) in tree:
                continue
            d = t.act(c, x)
            gens.append(Word(alphabet, words[c] + (x,) + invert_letters(words[d])))
    return gens


def normalizer_index(t: CosetTable) -> int:
    """``[N_G(H):H]``: the number of cosets whose stabilizer is exactly ``H``."""
    gens = [g.letters for g in schreier_generators(t)]
    return sum(1 for c in range(t.index) if all(t.trace(g, c) == c for g in gens))


def is_normal(t: CosetTable) -> bool:
    return normalizer_index(t) == t.index


def conjugates(t: CosetTable) -> set[CosetTable]:
    return {t.rebase(c) for c in range(t.index)}


def are_conjugate(a: CosetTable, b: CosetTable) -> bool:
    if a.presentation != b.presentation or a.index != b.index:
        return False
    return any(a.rebase(c) == b for c in range(a.index))


def conjugacy_representatives(tables: Iterable[CosetTable]) -> list[CosetTable]:
    """Keep the first table of each conjugacy class, preserving input order."""
    seen: set[CosetTable] = set()
    reps = []
    for t in tables:
        if t in seen:
            continue
        reps.append(t)
        seen |= conjugates(t)
    return reps


# --- overgroups via block systems --------------------------------------------

def _block_of_base(t: CosetTable, seed: Iterable[int]) -> frozenset[int]:
    """Block through coset 0 of the finest block system identifying ``seed``."""
    n, w, flat = t.index, t.width, t.flat
    parent = list(range(n))

    def find(c):
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    pending = []
    for s in seed:
        a, b = find(0), find(s)
        if a != b:
            parent[max(a, b)] = min(a, b)
            pending.append((0, s))
    while pending:
        a, b = pending.pop()
        for x in range(0, w, 2):
            fa, fb = find(flat[a * w + x]), find(flat[b * w + x])
            if fa != fb:
                parent[max(fa, fb)] = min(fa, fb)
                pending.append((flat[a * w + x], flat[b * w + x]))
    root = find(0)
    return frozenset(c for c in range(n) if find(c) == root)


def _quotient_table(t: CosetTable, block: frozenset[int]) -> CosetTable:
    """Coset table of the setwise stabilizer of ``block``, i.e. the overgroup."""
    n, w, flat = t.index, t.width, t.flat
    label = [-1] * n
    blocks: list[list[int]] = []
    words, _ = spanning_tree(t)
    for start in range(n):
        if label[start] >= 0:
            continue
        # the block through ``start`` is the image of ``block`` under u: 0 -> start
        members = sorted({t.trace(words[start], b) for b in block})
        for m in members:
            label[m] = len(blocks)
        blocks.append(members)
    rows = []
    for members in blocks:
        c = members[0]
        rows.append([label[flat[c * w + x]] for x in range(w)])
    return CosetTable.from_rows(t.presentation, rows)


def _blocks_through_base(t: CosetTable) -> list[frozenset[int]]:
    n = t.index
    found = {frozenset([0])}
    queue = [frozenset([0])]
    while queue:
        b = queue.pop()
        for p in range(1, n):
            if p in b:
                continue
            nb = _block_of_base(t, list(b) + [p])
            if nb not in found:
                found.add(nb)
                queue.append(nb)
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def overgroups(t: CosetTable) -> list[CosetTable]:
    """Every K with H <= K <= G, sorted by index descending (H first, G last)."""
    tables = {_quotient_table(t, b) for b in _blocks_through_base(t)}
    return sorted(tables, key=lambda k: (-k.index, k.flat))


def minimal_overgroups(t: CosetTable) -> list[CosetTable]:
    """The atoms of the overgroup lattice strictly above ``H``."""
    blocks = [b for b in _blocks_through_base(t) if len(b) > 1]
    atoms = [b for b in blocks if not any(o < b for o in blocks)]
    return sorted({_quotient_table(t, b) for b in atoms}, key=lambda k: (-k.index, k.flat))


def contains_subgroup(big: CosetTable, small_gens: Iterable[Word]) -> bool:
    return all(big.trace(g.letters) == 0 for g in small_gens)


# --- Schreier graphs and quotient images ---------------------------------------

@dataclass(frozen=True)
class SchreierGraph:
    """Vertices ``0..n-1``; one labeled edge per (vertex, generator)."""

    presentation: Presentation
    vertices: int
    edges: tuple[tuple[int, int, int], ...]
    basepoint: int = 0

    @classmethod
    def from_table(cls, t: CosetTable) -> "SchreierGraph":
        edges = tuple((c, x >> 1, t.act(c, x)) for c in range(t.index) for x in range(0, t.width, 2))
        return cls(t.presentation, t.index, edges, 0)


def permutation_order(perm: Sequence[int]) -> int:
    seen = [False] * len(perm)
    order = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        c = start
        while not seen[c]:
            seen[c] = True
            c = perm[c]
            length += 1
        order = order * length // gcd(order, length)
    return order


def cycle_type(perm: Sequence[int]) -> dict[int, int]:
    seen = [False] * len(perm)
    counts: dict[int, int] = {}
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        c = start
        while not seen[c]:
            seen[c] = True
            c = perm[c]
            length += 1
        counts[length] = counts.get(length, 0) + 1
    return dict(sorted(counts.items()))


def permutation_group_order(gens: Sequence[Sequence[int]], limit: int = 1_000_000) -> int:
    """Order of the group generated by permutations, by orbit closure on tuples."""
    n = len(gens[0]) if gens else 0
    identity = tuple(range(n))
    seen = {identity}
    frontier = [identity]
    gens = [tuple(g) for g in gens]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = tuple(g[i] for i in p)
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
                    if len(seen) > limit:
                        raise ResourceBudgetExceeded(f"permutation group larger than {limit}")
        frontier = nxt
    return len(seen)


def reduced_tree_word(t: CosetTable, coset: int) -> Word:
    words, _ = spanning_tree(t)
    return Word(t.presentation.alphabet, free_reduce(words[coset]))
