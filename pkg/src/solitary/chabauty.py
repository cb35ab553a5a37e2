"""Subgroups as points of Sub(G): membership windows and isolation certificates."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import stallings
from .cosets import (
    CosetTable,
    Overflow,
    coset_of,
    minimal_overgroups,
    schreier_generators,
    todd_coxeter,
)
from .errors import AlphabetMismatch, NotFiniteIndex
from .stallings import CoreGraph, core_to_table
from .words import Presentation, Word, format_word, invert


class SubgroupHandle:
    """A subgroup of ``group`` backed by a coset table or a core graph."""

    __slots__ = ("group", "table", "core", "_key")

    def __init__(self, group: Presentation, table: CosetTable | None = None, core: CoreGraph | None = None):
        if (table is None) == (core is None):
            raise ValueError("give exactly one of table or core")
        if core is not None and not group.is_free:
            raise ValueError("core graphs only describe subgroups of free groups")
        if table is not None and table.presentation != group:
            raise AlphabetMismatch("table belongs to another presentation")
        self.group = group
        self.table = table
        self.core = core
        self._key = None

    @classmethod
    def finite_index(cls, table: CosetTable) -> "SubgroupHandle":
        return cls(table.presentation, table=table)

    @classmethod
    def free_core(cls, group: Presentation, core: CoreGraph) -> "SubgroupHandle":
        return cls(group, core=core)

    @classmethod
    def generated_by(cls, group: Presentation, gens: Sequence[Word], max_cosets: int = 100_000) -> "SubgroupHandle":
        """Free groups get a core graph; other groups need finite index."""
        if group.is_free:
            return cls(group, core=stallings.fold(group.alphabet, gens))
        t = todd_coxeter(group, gens, max_cosets)
        if isinstance(t, Overflow):
            raise NotFiniteIndex(f"coset enumeration overflowed at {max_cosets} cosets")
        return cls(group, table=t)

    @property
    def kind(self) -> str:
        return "FiniteIndex" if self.table is not None else "FreeCore"

    @property
    def is_finite_index(self) -> bool:
        return self.table is not None or self.core.is_complete

    @property
    def index(self) -> int | float:
        if self.table is not None:
            return self.table.index
        return stallings.index(self.core)

    def as_table(self) -> CosetTable:
        if self.table is not None:
            return self.table
        if not self.core.is_complete:
            raise NotFiniteIndex("subgroup has infinite index")
        return core_to_table(self.core, self.group)

    def member(self, w: Word) -> bool:
        if w.alphabet != self.group.alphabet:
            raise AlphabetMismatch(f"word {w} is not over {self.group.alphabet.names}")
        if self.table is not None:
            return self.table.trace(w.letters) == 0
        return stallings.contains(self.core, w)

    def coset_key(self, letters: Sequence[int]):
        """Label of the right coset ``H v``; equal labels mean equal cosets."""
        if self.table is not None:
            return self.table.trace(letters)
        return stallings.coset_key(self.core, letters)

    def generators(self) -> list[Word]:
        if self.table is not None:
            return schreier_generators(self.table)
        return stallings.core_generators(self.core)

    def canonical_key(self):
        if self._key is None:
            if self.is_finite_index:
                self._key = ("table", self.as_table().flat)
            else:
                self._key = ("core", self.core.flat)
        return self._key

    def __eq__(self, other) -> bool:
        if not isinstance(other, SubgroupHandle):
            return NotImplemented
        return self.group == other.group and self.canonical_key() == other.canonical_key()

    def __hash__(self) -> int:
        return hash((self.group, self.canonical_key()))

    def __repr__(self) -> str:
        gens = ", ".join(format_word(g) for g in self.generators())
        return f"SubgroupHandle({self.kind}, index={self.index}, <{gens}>)"


def _same_group(*handles: SubgroupHandle):
    g = handles[0].group
    for h in handles[1:]:
        if h.group != g:
            raise AlphabetMismatch("subgroups of different presentations")


def _dedupe(words: Iterable[Word]) -> tuple[Word, ...]:
    return tuple(sorted(set(words), key=lambda w: w.sort_key()))


@dataclass(frozen=True)
class MembershipConstraint:
    """Finite test data: members must contain every word of ``must_contain``
    and none of ``must_exclude``."""

    must_contain: tuple[Word, ...] = ()
    must_exclude: tuple[Word, ...] = ()

    def __post_init__(self):
        inc, exc = _dedupe(self.must_contain), _dedupe(self.must_exclude)
        clash = set(inc) & set(exc)
        if clash:
            raise ValueError(f"words both required and excluded: {sorted(map(str, clash))}")
        object.__setattr__(self, "must_contain", inc)
        object.__setattr__(self, "must_exclude", exc)

    def satisfied_by(self, k: SubgroupHandle) -> bool:
        return all(k.member(w) for w in self.must_contain) and not any(k.member(w) for w in self.must_exclude)

    def to_dict(self) -> dict:
        return {
            "must_contain": [format_word(w) for w in self.must_contain],
            "must_exclude": [format_word(w) for w in self.must_exclude],
        }


def window_test(k: SubgroupHandle, h: SubgroupHandle, omega: Iterable[Word]) -> bool:
    """Whether ``K`` lies in the basic neighbourhood ``W(H, omega)``."""
    _same_group(k, h)
    return all(k.member(w) == h.member(w) for w in set(omega))


def constraint_of_window(h: SubgroupHandle, omega: Iterable[Word]) -> MembershipConstraint:
    omega = set(omega)
    inside = [w for w in omega if h.member(w)]
    return MembershipConstraint(tuple(inside), tuple(omega.difference(inside)))


def isolation_certificate(h: SubgroupHandle) -> MembershipConstraint:
    """Finite tests singling out a finite-index ``H`` among all subgroups.

    ``must_contain`` generates ``H``, so any subgroup passing it lies in the
    (finite) envelope of ``H``; ``must_exclude`` holds one word of K minus H
    for every minimal overgroup K, which rules out every strict overgroup.
    """
    if not h.is_finite_index:
        raise NotFiniteIndex("isolation certificates are only issued for finite-index subgroups")
    t = h.as_table()
    contain = schreier_generators(t)
    exclude = []
    for k in minimal_overgroups(t):
        witnesses = [w for w in schreier_generators(k) if t.trace(w.letters) != 0]
        exclude.append(min(witnesses, key=lambda w: w.sort_key()))
    return MembershipConstraint(tuple(contain), tuple(exclude))


def conjugate(h: SubgroupHandle, g: Word) -> SubgroupHandle:
    """The handle of ``g H g^-1``."""
    if g.alphabet != h.group.alphabet:
        raise AlphabetMismatch(f"word {g} is not over {h.group.alphabet.names}")
    if h.table is not None:
        return SubgroupHandle(h.group, table=h.table.rebase(coset_of(h.table, invert(g))))
    return SubgroupHandle(h.group, core=stallings.conjugate_core(h.core, g))


@dataclass
class CertificateReport:
    status: str
    satisfies: bool
    offenders: list = field(default_factory=list)
    collisions: int = 0

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "satisfies": self.satisfies,
            "collisions": self.collisions,
            "offenders": [
                {"index": _index_text(k.index), "generators": [format_word(w) for w in k.generators()]}
                for k in self.offenders
            ],
        }


def _index_text(i):
    return i if isinstance(i, int) else "infinite"


class SubgroupUniverse:
    """A fixed finite list of subgroups, prepared for repeated certificate checks.

    When every member is of finite index in one presentation the tables are
    stacked into a single integer array and words are traced through all of
    them at once.
    """

    def __init__(self, handles: Iterable[SubgroupHandle]):
        self.handles = list(handles)
        self._counts: dict | None = None
        groups = {h.group for h in self.handles}
        self.vectorized = len(groups) == 1 and all(h.is_finite_index for h in self.handles)
        if self.vectorized:
            self._stack()

    def __len__(self) -> int:
        return len(self.handles)

    def _stack(self):
        tables = [h.as_table() for h in self.handles]
        width = tables[0].width
        self.width = width
        self.stride = max(t.index for t in tables) * width
        arr = np.zeros((len(tables), self.stride), dtype=np.int32)
        by_len: dict[int, list[int]] = {}
        for i, t in enumerate(tables):
            by_len.setdefault(len(t.flat), []).append(i)
        for size, rows in by_len.items():
            arr[np.array(rows), :size] = np.array([tables[i].flat for i in rows], dtype=np.int32)
        self._flat = arr.ravel()
        self._base = np.arange(len(tables), dtype=np.int64) * self.stride
        self._prefix_cache = {(): np.zeros(len(tables), dtype=np.int16)}

    _PREFIX_CACHE_DEPTH = 4

    def _full_positions(self, prefix: tuple[int, ...]) -> np.ndarray:
        """Coset reached by ``prefix`` in every member, memoised for short prefixes."""
        pos = self._prefix_cache.get(prefix)
        if pos is None:
            prev = self._full_positions(prefix[:-1])
            pos = self._flat[self._base + prev.astype(np.int64) * self.width + prefix[-1]].astype(np.int16)
            self._prefix_cache[prefix] = pos
        return pos

    def _members(self, letters: Sequence[int], idx: np.ndarray | None = None) -> np.ndarray:
        """Membership of ``letters`` in the members listed in ``idx`` (all by default).

        The word is split as p * m * s and lies in K iff tracing p * m and
        s^-1 from the base reach the same coset; p and s^-1 come from the cache.
        """
        d = self._PREFIX_CACHE_DEPTH
        head = tuple(letters[:d])
        tail = tuple(x ^ 1 for x in reversed(letters[len(head):][-d:]))
        middle = letters[len(head):len(letters) - len(tail)]
        pos, end = self._full_positions(head), self._full_positions(tail)
        base = self._base
        if idx is not None:
            pos, end, base = pos[idx], end[idx], base[idx]
        if middle:
            pos = pos.astype(np.int64)
            for x in middle:
                pos = self._flat[base + pos * self.width + x]
        return pos == end

    def satisfying(self, c: MembershipConstraint) -> list[int]:
        """Positions of the members that satisfy the constraint."""
        if not self.vectorized:
            return [i for i, k in enumerate(self.handles) if c.satisfied_by(k)]
        tests = [(w, True) for w in c.must_contain] + [(w, False) for w in c.must_exclude]
        tests.sort(key=lambda item: item[0].sort_key())
        idx = None
        for w, wanted in tests:
            hit = self._members(w.letters, idx)
            keep = hit if wanted else ~hit
            idx = np.flatnonzero(keep) if idx is None else idx[keep]
            if not len(idx):
                break
        if idx is None:
            idx = np.arange(len(self.handles))
        return [int(i) for i in idx]

    def count(self, h: SubgroupHandle) -> int:
        if self._counts is None:
            self._counts = {}
            for k in self.handles:
                key = k.canonical_key()
                self._counts[key] = self._counts.get(key, 0) + 1
        if self.handles and h.group != self.handles[0].group:
            return 0
        return self._counts.get(h.canonical_key(), 0)


def verify_certificate(c: MembershipConstraint, h: SubgroupHandle, universe) -> CertificateReport:
    """Check that ``h`` satisfies ``c`` and every other universe member violates it.

    Only a universe-relative statement: it proves nothing about subgroups
    outside ``universe``.
    """
    if not isinstance(universe, SubgroupUniverse):
        universe = SubgroupUniverse(universe)
    for k in universe.handles[:1]:
        _same_group(h, k)
    for w in c.must_contain + c.must_exclude:
        if w.alphabet != h.group.alphabet:
            raise AlphabetMismatch(f"constraint word {w} is over another alphabet")
    satisfies = c.satisfied_by(h)
    offenders = [universe.handles[i] for i in universe.satisfying(c) if universe.handles[i] != h]
    collisions = max(universe.count(h) - 1, 0)
    ok = satisfies and not offenders and not collisions
    return CertificateReport("pass" if ok else "fail", satisfies, offenders, collisions)
