"""Finite truncations of permutation representations ``G -> Sym(X)``.

A ``PermRep`` is a multiset of transitive components.  Finite components
are quasiregular actions on the cosets of a finite-index subgroup; lazy
components are quasiregular actions ``G -> Sym(G/H)`` for an infinite-index
``H``, cut off at a breadth-first radius.

Points of ``G/H`` are left cosets ``uH`` and group elements act on the
left: ``w . uH = wuH``.  For a word the rightmost letter acts first, so
``apply(uv, x) == apply(u, apply(v, x))``.  Point labels are consecutive
integers assigned component by component in the canonical component
order; inside a finite component the labels follow breadth-first order
of the action from the basepoint (letters tried in column order).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .chabauty import SubgroupHandle, conjugate
from .cosets import (
    CosetTable,
    are_conjugate,
    conjugacy_representatives,
    cycle_type,
    low_index,
    normalizer_index,
)
from .errors import (
    AlphabetMismatch,
    ConjugateDuplicate,
    IndexOutOfRange,
    InvalidClassification,
    NotABijection,
    WindowExhausted,
    WindowMismatch,
)
from .words import Presentation, Word, format_word, free_product, free_reduce, invert_letters

DEFAULT_RADIUS = 6
DELTA, SIGMA = "Delta", "Sigma"


# --- components --------------------------------------------------------------

@dataclass(frozen=True)
class FiniteOrbit:
    """``G`` acting on the cosets of a finite-index subgroup."""

    table: CosetTable

    def sort_key(self):
        return (0, self.table.index, self.table.flat)


@dataclass(frozen=True)
class LazyOrbit:
    """``G`` acting on ``G/H`` for infinite-index ``H``, truncated at ``radius``."""

    handle: SubgroupHandle
    radius: int

    def sort_key(self):
        return (1, self.radius, self.handle.canonical_key())


class _FiniteChart:
    """Point numbering of one finite orbit: local label <-> coset number."""

    def __init__(self, table: CosetTable):
        w, flat = table.width, table.flat
        coset_of_point = [0]
        point_of_coset = {0: 0}
        i = 0
        while i < len(coset_of_point):
            c = coset_of_point[i]
            i += 1
            for x in range(w):
                # letter x acts on the left coset gH, i.e. on the right coset
                # H g^-1, by right multiplication with x^-1
                d = flat[c * w + (x ^ 1)]
                if d not in point_of_coset:
                    point_of_coset[d] = len(coset_of_point)
                    coset_of_point.append(d)
        self.table = table
        self.cosets = coset_of_point
        self.points = point_of_coset
        self.size = len(coset_of_point)
        # moves[x][p]: image of local point p under letter x
        self.moves = [[point_of_coset[flat[c * w + (x ^ 1)]] for c in coset_of_point] for x in range(w)]

    def apply(self, letters: Sequence[int], p: int) -> int:
        for x in reversed(letters):
            p = self.moves[x][p]
        return p


class _LazyChart:
    """Breadth-first coset representatives of ``G/H`` up to ``radius``."""

    def __init__(self, handle: SubgroupHandle, radius: int):
        width = handle.group.alphabet.width
        reps: list[tuple[int, ...]] = [()]
        keys = {self._key(handle, ()): 0}
        i = 0
        while i < len(reps):
            u = reps[i]
            i += 1
            if len(u) >= radius:
                continue
            for x in range(width):
                v = free_reduce((x,) + u)
                k = self._key(handle, v)
                if k not in keys:
                    keys[k] = len(reps)
                    reps.append(v)
        self.handle = handle
        self.reps = reps
        self.keys = keys
        self.size = len(reps)
        self.radius = radius
        self.moves = [[keys.get(self._key(handle, free_reduce((x,) + u)), -1) for u in reps] for x in range(width)]

    @staticmethod
    def _key(handle: SubgroupHandle, u: tuple[int, ...]):
        # uH = vH iff H u^-1 = H v^-1
        return handle.coset_key(invert_letters(u))

    def apply(self, letters: Sequence[int], p: int) -> int:
        v = free_reduce(tuple(letters) + self.reps[p])
        q = self.keys.get(self._key(self.handle, v))
        if q is None:
            raise WindowExhausted(f"image escapes the radius-{self.radius} window")
        return q


# --- window actions ----------------------------------------------------------

class _Window:
    """Shared evaluation on a labelled finite window.

    ``images[i][p]`` is the image of point ``p`` under generator ``i`` or -1
    when it leaves the window.
    """

    presentation: Presentation

    def window_images(self) -> tuple[tuple[int, ...], ...]:
        raise NotImplementedError

    @property
    def size(self) -> int:
        raise NotImplementedError

    def _check_point(self, x: int):
        if not isinstance(x, int) or not 0 <= x < self.size:
            raise IndexOutOfRange(f"point {x!r} outside the window of {self.size} points")

    def _check_word(self, w: Word):
        if w.alphabet != self.presentation.alphabet:
            raise AlphabetMismatch(f"word {w} is not over {self.presentation.alphabet.names}")

    def _inverse_images(self):
        inv = []
        for perm in self.window_images():
            back = [-1] * len(perm)
            for p, q in enumerate(perm):
                if q >= 0:
                    back[q] = p
            inv.append(back)
        return inv

    def _step(self, x: int, p: int) -> int:
        table = self.window_images()[x >> 1] if x % 2 == 0 else self._inverse_cache()[x >> 1]
        q = table[p]
        if q < 0:
            raise WindowExhausted(f"point {p} leaves the window under {self.presentation.alphabet.letter_name(x)}")
        return q

    def _inverse_cache(self):
        inv = getattr(self, "_inv", None)
        if inv is None:
            inv = self._inverse_images()
            object.__setattr__(self, "_inv", inv)
        return inv

    def apply(self, w: Word, x: int) -> int:
        self._check_word(w)
        self._check_point(x)
        for letter in reversed(w.letters):
            x = self._step(letter, x)
        return x

    def trace(self, x: int, w: Word) -> set[int]:
        """Points visited while applying ``w`` letter by letter, rightmost first."""
        self._check_word(w)
        self._check_point(x)
        seen = {x}
        for letter in reversed(w.letters):
            x = self._step(letter, x)
            seen.add(x)
        return seen

    def permutations(self) -> dict[str, list[int]]:
        names = self.presentation.alphabet.names
        return {names[i]: list(perm) for i, perm in enumerate(self.window_images())}

    def cycle_types(self) -> dict[str, dict[int, int]]:
        out = {}
        for name, perm in self.permutations().items():
            if min(perm, default=0) < 0:
                raise WindowExhausted(f"generator {name} is not defined on the whole window")
            out[name] = cycle_type(perm)
        return out

    def is_complete(self) -> bool:
        return all(min(perm, default=0) >= 0 for perm in self.window_images())

    def _orbit_table(self, x: int) -> CosetTable:
        """Coset table of the stabilizer of ``x`` read off a complete orbit."""
        width = self.presentation.alphabet.width
        order = [x]
        where = {x: 0}
        flat: list[int] = []
        i = 0
        while i < len(order):
            p = order[i]
            i += 1
            row = []
            for letter in range(width):
                # right coset H g^-1 times letter <-> point letter^-1 g x
                q = self._step(letter ^ 1, p)
                if q not in where:
                    where[q] = len(order)
                    order.append(q)
                row.append(where[q])
            flat.extend(row)
        return CosetTable(self.presentation, flat, canonical=False)

    def to_dot(self, name: str = "action") -> str:
        names = self.presentation.alphabet.names
        lines = [f"digraph {name} {{"]
        lines += [f"  {p};" for p in range(self.size)]
        for i, perm in enumerate(self.window_images()):
            for p, q in enumerate(perm):
                if q >= 0:
                    lines.append(f'  {p} -> {q} [label="{names[i]}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


class WindowAction(_Window):
    """A finite (possibly partial) action given by generator images.

    ``origin`` optionally records ``(rep, alpha)`` when the action is the
    relabelling ``alpha`` of a ``PermRep``; stabilizers are then taken from
    the original representation.
    """

    def __init__(self, presentation: Presentation, images: Sequence[Sequence[int]], origin=None):
        images = tuple(tuple(perm) for perm in images)
        if len(images) != presentation.rank:
            raise ValueError(f"need one image array per generator, got {len(images)}")
        n = len(images[0]) if images else 0
        for perm in images:
            if len(perm) != n:
                raise WindowMismatch("generator image arrays differ in length")
            seen = [q for q in perm if q >= 0]
            if len(set(seen)) != len(seen) or any(q >= n for q in seen):
                raise NotABijection("generator images are not injective on the window")
        self.presentation = presentation
        self.images = images
        self.origin = origin

    def window_images(self):
        return self.images

    @property
    def size(self) -> int:
        return len(self.images[0]) if self.images else 0

    def stabilizer(self, x: int) -> SubgroupHandle:
        self._check_point(x)
        if self.origin is not None:
            rep, alpha = self.origin
            return rep.stabilizer(alpha.index(x))
        return SubgroupHandle.finite_index(self._orbit_table(x))

    def window(self) -> "WindowAction":
        return self

    def __eq__(self, other) -> bool:
        if not isinstance(other, WindowAction):
            return NotImplemented
        return self.presentation == other.presentation and self.images == other.images

    def __hash__(self) -> int:
        return hash((self.presentation, self.images))

    def to_dict(self) -> dict:
        return {"presentation": str(self.presentation), "window": self.permutations()}

    def __repr__(self) -> str:
        return f"WindowAction({self.presentation}, points={self.size})"


class PermRep(_Window):
    """Immutable multiset of transitive components with global point labels."""

    def __init__(self, presentation: Presentation, components: Iterable[tuple[FiniteOrbit | LazyOrbit, int]] = ()):
        merged: dict = {}
        for comp, mult in components:
            if not isinstance(mult, int) or mult < 0:
                raise ValueError(f"multiplicity must be a non-negative integer, got {mult!r}")
            group = comp.table.presentation if isinstance(comp, FiniteOrbit) else comp.handle.group
            if group != presentation:
                raise AlphabetMismatch("component belongs to another presentation")
            if mult:
                merged[comp] = merged.get(comp, 0) + mult
        self.presentation = presentation
        self.components: tuple[tuple[FiniteOrbit | LazyOrbit, int], ...] = tuple(
            sorted(merged.items(), key=lambda item: item[0].sort_key()))
        self._lock = threading.Lock()
        self._charts = None
        self._images = None

    # lazy expansion; idempotent, so racing expanders would agree anyway
    def _expand(self):
        if self._charts is not None:
            return self._charts
        with self._lock:
            if self._charts is None:
                charts = []
                for comp, mult in self.components:
                    chart = _FiniteChart(comp.table) if isinstance(comp, FiniteOrbit) else _LazyChart(comp.handle, comp.radius)
                    charts.append(chart)
                offsets = []
                start = 0
                for chart, (_, mult) in zip(charts, self.components):
                    for _ in range(mult):
                        offsets.append((start, chart))
                        start += chart.size
                self._offsets = offsets
                self._size = start
                self._charts = charts
        return self._charts

    @property
    def size(self) -> int:
        self._expand()
        return self._size

    def window(self) -> WindowAction:
        return WindowAction(self.presentation, self.window_images())

    def window_images(self):
        if self._images is None:
            self._expand()
            rank = self.presentation.rank
            images = [[] for _ in range(rank)]
            for start, chart in self._offsets:
                for i in range(rank):
                    images[i].extend(q + start if q >= 0 else -1 for q in chart.moves[2 * i])
            self._images = tuple(tuple(perm) for perm in images)
        return self._images

    def locate(self, x: int) -> tuple[int, int, int]:
        """``(component position, copy number, local point)`` of label ``x``."""
        start, chart = self._component_at(x)
        copy = sum(1 for s, c in self._offsets if c is chart and s < start)
        return self._charts.index(chart), copy, x - start

    def _component_at(self, x: int):
        self._check_point(x)
        for start, chart in self._offsets:
            if start <= x < start + chart.size:
                return start, chart
        raise IndexOutOfRange(f"point {x}")

    def apply(self, w: Word, x: int) -> int:
        """``w . x``; lazy orbits are evaluated exactly, escaping raises ``WindowExhausted``."""
        self._check_word(w)
        start, chart = self._component_at(x)
        return start + chart.apply(w.letters, x - start)

    def stabilizer(self, x: int) -> SubgroupHandle:
        start, chart = self._component_at(x)
        p = x - start
        if isinstance(chart, _FiniteChart):
            return SubgroupHandle.finite_index(chart.table.rebase(chart.cosets[p]))
        return conjugate(chart.handle, Word(self.presentation.alphabet, chart.reps[p]))

    def representative(self, x: int) -> Word:
        """A word ``g`` with ``g . basepoint = x`` inside ``x``'s component."""
        start, chart = self._component_at(x)
        p = x - start
        if isinstance(chart, _LazyChart):
            return Word(self.presentation.alphabet, chart.reps[p])
        # breadth-first words in the left action
        words = {0: ()}
        order = [0]
        for q in order:
            for letter in range(self.presentation.alphabet.width):
                r = chart.moves[letter][q]
                if r not in words:
                    words[r] = (letter,) + words[q]
                    order.append(r)
        return Word(self.presentation.alphabet, words[p])

    def basepoints(self) -> list[int]:
        self._expand()
        return [start for start, _ in self._offsets]

    def embedding_into(self, other: "PermRep") -> dict[int, int]:
        """Label map sending each copy of a component here to the same copy in ``other``.

        Combinators only append components, so the map preserves the
        action: ``other.apply(w, m[x]) == m[self.apply(w, x)]``.
        """
        self._expand()
        other._expand()
        slots: dict = {}
        for comp, (start, _) in zip(_expanded(other), other._offsets):
            slots.setdefault(comp, []).append(start)
        used: dict = {}
        out = {}
        for comp, (start, chart) in zip(_expanded(self), self._offsets):
            k = used.get(comp, 0)
            used[comp] = k + 1
            if k >= len(slots.get(comp, ())):
                raise ValueError("representation is not contained in the target")
            target = slots[comp][k]
            for p in range(chart.size):
                out[start + p] = target + p
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, PermRep):
            return NotImplemented
        return self.presentation == other.presentation and self.components == other.components

    def __hash__(self) -> int:
        return hash((self.presentation, self.components))

    def to_dict(self, window: bool = True) -> dict:
        comps = []
        for comp, mult in self.components:
            if isinstance(comp, FiniteOrbit):
                comps.append({"kind": "FiniteOrbit", "multiplicity": mult, "table": comp.table.rows})
            else:
                comps.append({
                    "kind": "LazyOrbit",
                    "multiplicity": mult,
                    "radius": comp.radius,
                    "generators": [format_word(g) for g in comp.handle.generators()],
                    "core": comp.handle.core.rows if comp.handle.core is not None else None,
                })
        out = {"presentation": str(self.presentation), "components": comps}
        if window:
            out["window"] = self.permutations()
        return out

    def __repr__(self) -> str:
        return f"PermRep({self.presentation}, components={len(self.components)}, points={self.size})"


def _expanded(r: PermRep):
    for comp, mult in r.components:
        for _ in range(mult):
            yield comp


@dataclass(frozen=True)
class BasicOpen:
    """The neighbourhood of ``base`` fixed by the images of ``A`` under ``T``."""

    base: object
    T: tuple[Word, ...]
    A: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "T", tuple(sorted(set(self.T), key=lambda w: w.sort_key())))
        object.__setattr__(self, "A", tuple(sorted(set(self.A))))
        for a in self.A:
            self.base._check_point(a)
        for t in self.T:
            self.base._check_word(t)


# --- constructors and combinators --------------------------------------------

def quasiregular(h: SubgroupHandle, radius: int = DEFAULT_RADIUS) -> PermRep:
    """``G`` acting on ``G/H``; the basepoint (label 0) has stabilizer ``H``."""
    if h.is_finite_index:
        comp = FiniteOrbit(h.as_table())
    else:
        if radius < 0:
            raise ValueError("radius must be non-negative")
        comp = LazyOrbit(h, radius)
    return PermRep(h.group, [(comp, 1)])


def trivial_rep(p: Presentation, points: int = 1) -> PermRep:
    t = CosetTable(p, [0] * p.alphabet.width)
    return PermRep(p, [(FiniteOrbit(t), points)])


def disjoint_union(parts: Sequence[tuple[PermRep, int]]) -> PermRep:
    parts = list(parts)
    if not parts:
        raise ValueError("need at least one part")
    p = parts[0][0].presentation
    comps = []
    for r, mult in parts:
        if r.presentation != p:
            raise AlphabetMismatch("parts act on different presentations")
        if not isinstance(mult, int) or mult < 0:
            raise ValueError(f"multiplicity must be a non-negative integer, got {mult!r}")
        comps += [(comp, m * mult) for comp, m in r.components]
    return PermRep(p, comps)


def apply(r: _Window, w: Word, x: int) -> int:
    return r.apply(w, x)


def trace(r: _Window, x: int, w: Word) -> set[int]:
    return r.trace(x, w)


def stabilizer(r, x: int) -> SubgroupHandle:
    return r.stabilizer(x)


def tau_star_lerf(p: Presentation, max_index: int, copies: int, node_limit: int | None = None) -> PermRep:
    """Every finite transitive action of index at most ``max_index``, ``copies`` times each."""
    if copies < 1:
        raise ValueError("copies must be at least 1")
    tables = low_index(p, max_index) if node_limit is None else low_index(p, max_index, node_limit)
    reps = conjugacy_representatives(tables)
    return PermRep(p, [(FiniteOrbit(t), copies) for t in reps])


def tau_star_solitary(classified: Sequence[tuple[SubgroupHandle, str]], copies: int,
                      radius: int = DEFAULT_RADIUS) -> PermRep:
    """``copies`` orbits for each Delta subgroup and one orbit for each Sigma subgroup."""
    if copies < 1:
        raise ValueError("copies must be at least 1")
    classified = list(classified)
    if not classified:
        raise ValueError("need at least one classified subgroup")
    p = classified[0][0].group
    finite: list[CosetTable] = []
    seen = set()
    comps = []
    for h, cls in classified:
        if h.group != p:
            raise AlphabetMismatch("subgroups of different presentations")
        if cls not in (DELTA, SIGMA):
            raise InvalidClassification(f"class must be {DELTA} or {SIGMA}, got {cls!r}")
        if h.is_finite_index:
            t = h.as_table()
            if cls == SIGMA:
                raise InvalidClassification(
                    f"finite-index subgroup has normalizer index {normalizer_index(t)}, so it is {DELTA}")
            for other in finite:
                if are_conjugate(t, other):
                    raise ConjugateDuplicate(f"subgroups of index {t.index} are conjugate")
            finite.append(t)
        elif h in seen:
            raise ConjugateDuplicate("the same subgroup is listed twice")
        seen.add(h)
        comp = quasiregular(h, radius).components[0][0]
        comps.append((comp, copies if cls == DELTA else 1))
    return PermRep(p, comps)


def in_basic_open(candidate: _Window, o: BasicOpen) -> bool:
    if candidate.presentation != o.base.presentation:
        raise AlphabetMismatch("candidate and neighbourhood act on different presentations")
    for a in o.A:
        candidate._check_point(a)
        for t in o.T:
            if candidate.apply(t, a) != o.base.apply(t, a):
                return False
    return True


def add_orbits(r: PermRep, h: SubgroupHandle, m: int, radius: int = DEFAULT_RADIUS) -> PermRep:
    if h.group != r.presentation:
        raise AlphabetMismatch("subgroup of another presentation")
    if m == 0:
        return r
    return disjoint_union([(r, 1), (quasiregular(h, radius), m)])


def add_fixed_points(r: PermRep, k: int) -> PermRep:
    if k == 0:
        return r
    return disjoint_union([(r, 1), (trivial_rep(r.presentation), k)])


def _as_bijection(alpha, n: int) -> list[int]:
    if isinstance(alpha, Mapping):
        if set(alpha) != set(range(n)):
            raise NotABijection(f"map is not defined on exactly the {n} window points")
        alpha = [alpha[i] for i in range(n)]
    alpha = list(alpha)
    if len(alpha) != n or sorted(alpha) != list(range(n)):
        raise NotABijection(f"not a permutation of the {n} window points")
    return alpha


def conjugate_rep(r: _Window, alpha) -> WindowAction:
    """The relabelled action ``x -> alpha(r(g)(alpha^-1(x)))`` on the window."""
    n = r.size
    alpha = _as_bijection(alpha, n)
    images = []
    for perm in r.window_images():
        new = [-1] * n
        for p, q in enumerate(perm):
            new[alpha[p]] = alpha[q] if q >= 0 else -1
        images.append(new)
    origin = (r, alpha) if hasattr(r, "stabilizer") else None
    return WindowAction(r.presentation, images, origin)


def free_product_rep(phi: _Window, psi: _Window, beta=None) -> WindowAction:
    """``G * K`` acting on ``phi``'s window: ``G`` by ``phi``, ``K`` by ``psi``
    transported along ``beta`` (a map from ``psi``-labels to ``phi``-labels)."""
    n = phi.size
    if psi.size != n:
        raise WindowMismatch(f"windows have {n} and {psi.size} points")
    beta = list(range(n)) if beta is None else _as_bijection(beta, n)
    moved = conjugate_rep(psi, beta).images
    p = free_product(phi.presentation, psi.presentation)
    return WindowAction(p, tuple(phi.window_images()) + tuple(moved))
