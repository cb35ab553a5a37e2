"""Folded core graphs for finitely generated subgroups of free groups.

A core graph is stored like a partial coset table: ``flat[v * width + x]``
is the endpoint of the edge labelled by letter ``x`` leaving ``v`` (or -1),
with every edge recorded at both ends.  Reading a word from the basepoint
follows these entries; the word lies in the subgroup iff the path exists
and closes up at the basepoint.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

from .cosets import CosetTable
from .errors import AlphabetMismatch, SeparationImpossible
from .words import Alphabet, Presentation, Word, free_reduce, invert_letters

INFINITE = math.inf


class CoreGraph:
    """Canonical folded core graph with basepoint 0."""

    __slots__ = ("alphabet", "flat", "width", "_hash")

    def __init__(self, alphabet: Alphabet, flat: Sequence[int]):
        self.alphabet = alphabet
        self.width = alphabet.width
        self.flat = tuple(flat)
        self._hash = None

    @property
    def vertices(self) -> int:
        return len(self.flat) // self.width

    def __len__(self) -> int:
        return self.vertices

    @property
    def rows(self) -> list[list[int]]:
        w = self.width
        return [list(self.flat[i:i + w]) for i in range(0, len(self.flat), w)]

    def edges(self) -> list[tuple[int, int, int]]:
        """Positive edges as ``(source, generator index, target)``."""
        w = self.width
        return [(v, x >> 1, self.flat[v * w + x])
                for v in range(self.vertices) for x in range(0, w, 2)
                if self.flat[v * w + x] >= 0]

    @property
    def is_complete(self) -> bool:
        return min(self.flat) >= 0

    def read(self, letters: Sequence[int], start: int = 0) -> tuple[int, int]:
        """Follow letters from ``start``; return (vertex reached, letters consumed)."""
        flat, w, v = self.flat, self.width, start
        for i, x in enumerate(letters):
            nxt = flat[v * w + x]
            if nxt < 0:
                return v, i
            v = nxt
        return v, len(letters)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoreGraph):
            return NotImplemented
        return self.flat == other.flat and self.alphabet == other.alphabet

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.alphabet, self.flat))
        return self._hash

    def __repr__(self) -> str:
        return f"CoreGraph({self.alphabet.names}, vertices={self.vertices})"


class _Folder:
    """Mutable labelled graph that folds on every edge insertion."""

    def __init__(self, width: int):
        self.width = width
        self.parent = [0]
        self.out: list[dict[int, int]] = [{}]

    def new_vertex(self) -> int:
        self.parent.append(len(self.parent))
        self.out.append({})
        return len(self.parent) - 1

    def find(self, v: int) -> int:
        parent = self.parent
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    def add_edge(self, u: int, x: int, v: int):
        pending = [(u, x, v)]
        while pending:
            u, x, v = pending.pop()
            u, v = self.find(u), self.find(v)
            t = self.out[u].get(x)
            if t is not None and self.find(t) != v:
                pending.append((u, x, v))
                self._merge(t, v, pending)
                continue
            s = self.out[v].get(x ^ 1)
            if s is not None and self.find(s) != u:
                pending.append((u, x, v))
                self._merge(s, u, pending)
                continue
            self.out[u][x] = v
            self.out[v][x ^ 1] = u

    def _merge(self, a: int, b: int, pending: list):
        a, b = self.find(a), self.find(b)
        if a == b:
            return
        if a > b:
            a, b = b, a
        self.parent[b] = a
        moved = self.out[b]
        self.out[b] = {}
        # stale references to b resolve through find(); re-inserting b's
        # edges at a folds any clash
        for x, t in moved.items():
            pending.append((a, x, t))

    def add_path(self, start: int, letters: Sequence[int], end: int | None = None) -> int:
        """Add a path spelling ``letters``; close it at ``end`` when given."""
        v = start
        last = len(letters) - 1
        for i, x in enumerate(letters):
            v = self.find(v)
            if i == last and end is not None:
                self.add_edge(v, x, end)
                v = end
            elif x in self.out[v]:
                v = self.out[v][x]
            else:
                nv = self.new_vertex()
                self.add_edge(v, x, nv)
                v = nv
        return self.find(v)

    def snapshot(self, prune: bool) -> tuple[list[int], list[dict[int, int]]]:
        """Live vertices (basepoint first) and resolved adjacency."""
        live = [v for v in range(len(self.parent)) if self.parent[v] == v]
        adj = {v: {x: self.find(t) for x, t in self.out[v].items()} for v in live}
        if prune:
            changed = True
            while changed:
                changed = False
                for v in list(adj):
                    if v != 0 and len(adj[v]) <= 1:
                        for x, t in adj[v].items():
                            adj[t].pop(x ^ 1, None)
                        del adj[v]
                        changed = True
        return sorted(adj), [adj[v] for v in sorted(adj)]


def _canonical(alphabet: Alphabet, verts: list[int], adj: list[dict[int, int]]) -> CoreGraph:
    width = alphabet.width
    index = {v: i for i, v in enumerate(verts)}
    base = index[0] if 0 in index else 0
    new = {base: 0}
    order = [base]
    i = 0
    while i < len(order):
        v = order[i]
        i += 1
        for x in range(width):
            t = adj[v].get(x)
            if t is None:
                continue
            t = index[t]
            if t not in new:
                new[t] = len(order)
                order.append(t)
    flat = []
    for v in order:
        row = adj[v]
        flat.extend(new[index[row[x]]] if x in row else -1 for x in range(width))
    return CoreGraph(alphabet, flat)


def _relabel(core: CoreGraph, rows: list[dict[int, int]]) -> CoreGraph:
    verts = list(range(len(rows)))
    return _canonical(core.alphabet, verts, rows)


def _check(alphabet: Alphabet, words: Iterable[Word]):
    for w in words:
        if w.alphabet != alphabet:
            raise AlphabetMismatch(f"word {w} is not over {alphabet.names}")


def fold(alphabet: Alphabet, gens: Iterable[Word]) -> CoreGraph:
    """Stallings folding of the wedge of generator loops, pruned to the core."""
    gens = list(gens)
    _check(alphabet, gens)
    folder = _Folder(alphabet.width)
    for g in gens:
        if g.letters:
            folder.add_path(0, g.letters, end=0)
    verts, adj = folder.snapshot(prune=True)
    return _canonical(alphabet, verts, adj)


def _folder_from(core: CoreGraph) -> _Folder:
    folder = _Folder(core.width)
    for _ in range(core.vertices - 1):
        folder.new_vertex()
    w = core.width
    for v in range(core.vertices):
        for x in range(w):
            t = core.flat[v * w + x]
            if t >= 0:
                folder.out[v][x] = t
    return folder


def contains(core: CoreGraph, w: Word) -> bool:
    if w.alphabet != core.alphabet:
        raise AlphabetMismatch(f"word {w} is not over {core.alphabet.names}")
    v, used = core.read(w.letters)
    return used == len(w.letters) and v == 0


def index(core: CoreGraph) -> int | float:
    """``[F:H]`` when every vertex has every label, otherwise ``INFINITE``."""
    return core.vertices if core.is_complete else INFINITE


def spanning_tree(core: CoreGraph) -> tuple[list[tuple[int, ...]], set[tuple[int, int]]]:
    w, flat = core.width, core.flat
    words: list = [None] * core.vertices
    words[0] = ()
    tree: set[tuple[int, int]] = set()
    order = [0]
    i = 0
    while i < len(order):
        v = order[i]
        i += 1
        for x in range(w):
            t = flat[v * w + x]
            if t >= 0 and words[t] is None:
                words[t] = words[v] + (x,)
                order.append(t)
                tree.add((v, x) if x % 2 == 0 else (t, x ^ 1))
    return words, tree


def core_generators(core: CoreGraph) -> list[Word]:
    """A free basis of ``H``: one word per positive non-tree edge."""
    words, tree = spanning_tree(core)
    gens = []
    w = core.width
    for v in range(core.vertices):
        for x in range(0, w, 2):
            t = core.flat[v * w + x]
            if t < 0 or (v, x) in tree:
                continue
            gens.append(Word(core.alphabet, words[v] + (x,) + invert_letters(words[t])))
    return gens


def hall_separate(core: CoreGraph, g: Word) -> CoreGraph:
    """A finite-index subgroup containing ``H`` but not ``g``.

    The path of ``g`` is glued onto the core at the basepoint, then each
    generator's partial injection on vertices is completed to a
    permutation by pairing vertices lacking an outgoing edge with vertices
    lacking an incoming edge, both in breadth-first vertex order.
    """
    if contains(core, g):
        raise SeparationImpossible(f"{g} already lies in the subgroup")
    folder = _folder_from(core)
    folder.add_path(0, g.letters)
    verts, adj = folder.snapshot(prune=False)
    graph = _canonical(core.alphabet, verts, adj)
    rows = [dict((x, t) for x, t in enumerate(graph.rows[v]) if t >= 0) for v in range(graph.vertices)]
    n = len(rows)
    for x in range(0, graph.width, 2):
        sources = [v for v in range(n) if x not in rows[v]]
        targets = [v for v in range(n) if (x ^ 1) not in rows[v]]
        for s, t in zip(sources, targets):
            rows[s][x] = t
            rows[t][x ^ 1] = s
    return _relabel(graph, rows)


def conjugate_core(core: CoreGraph, g: Word) -> CoreGraph:
    """Core graph of ``g H g^-1``."""
    _check(core.alphabet, [g])
    if not g.letters:
        return core
    return fold(core.alphabet, [h.conjugate_by(g) for h in core_generators(core)])


def core_to_table(core: CoreGraph, presentation: Presentation | None = None) -> CosetTable:
    """Coset table of a finite-index subgroup given by a complete core graph."""
    if not core.is_complete:
        raise ValueError("core graph has infinite index")
    p = presentation or Presentation(core.alphabet)
    return CosetTable(p, core.flat)


def table_to_core(t: CosetTable) -> CoreGraph:
    if not t.presentation.is_free:
        raise ValueError("core graphs describe subgroups of free groups only")
    return CoreGraph(t.presentation.alphabet, t.flat)


def coset_key(core: CoreGraph, letters: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Canonical label of the right coset ``H v``.

    ``v`` is read from the basepoint as far as the core allows; the
    remaining reduced suffix walks monotonically out into a hanging tree,
    so (vertex, suffix) determines the coset.
    """
    letters = free_reduce(letters)
    v, used = core.read(letters)
    return v, letters[used:]
