"""Følner sets for finite windows of group actions.

Ratios ``|wF Δ F| / |F|`` are exact ``Fraction`` values and a set is
``(ε, Ω)``-Følner when every ratio is strictly below ``ε``.  Negative search
results are only ever relative to the documented search strategy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from .chabauty import SubgroupHandle
from .cosets import CosetTable, low_index, permutation_group_order, permutation_order
from .errors import (
    AlphabetMismatch,
    EmptySet,
    InsufficientFixedPoints,
    NoFolnerInOrbit,
    WindowExhausted,
    WindowMismatch,
)
from .permrep import DEFAULT_RADIUS, WindowAction, quasiregular
from .words import Presentation, Word, format_word, free_product, lift_word, parse_presentation

DEFAULT_STEP_LIMIT = 50


def as_fraction(value) -> Fraction:
    """Exact rational from an exact number or a ``"p/q"`` string; floats are refused."""
    if isinstance(value, float):
        raise TypeError("use an exact rational such as '1/4', not a float")
    return Fraction(value)


def fraction_text(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class FolnerReport:
    F: tuple[int, ...]
    omega: tuple[Word, ...]
    ratios: dict
    epsilon: Fraction
    max_ratio: Fraction
    passed: bool

    def to_dict(self) -> dict:
        return {
            "F": list(self.F),
            "ratios": {format_word(w): fraction_text(q) for w, q in self.ratios.items()},
            "max_ratio": fraction_text(self.max_ratio),
            "epsilon": fraction_text(self.epsilon),
            "pass": self.passed,
        }


def _dedupe(omega: Iterable[Word]) -> tuple[Word, ...]:
    return tuple(sorted(set(omega), key=lambda w: w.sort_key()))


def ratio(r, F: set[int], w: Word) -> Fraction:
    image = {r.apply(w, p) for p in F}
    return Fraction(len(image ^ F), len(F))


def folner_check(r, F: Iterable[int], omega: Iterable[Word], epsilon) -> FolnerReport:
    F = set(F)
    if not F:
        raise EmptySet("a Følner set must be nonempty")
    epsilon = as_fraction(epsilon)
    omega = _dedupe(omega)
    ratios = {w: ratio(r, F, w) for w in omega}
    top = max(ratios.values(), default=Fraction(0))
    return FolnerReport(tuple(sorted(F)), omega, ratios, epsilon, top, top < epsilon)


@dataclass(frozen=True)
class Found:
    F: tuple[int, ...]
    report: FolnerReport

    found = True

    def to_dict(self) -> dict:
        return {"result": "Found", "size": len(self.F), **self.report.to_dict()}


@dataclass(frozen=True)
class NotFoundUpTo:
    """The search strategy found nothing up to ``max_size`` points; not a proof."""

    max_size: int
    best: FolnerReport | None = None

    found = False

    def to_dict(self) -> dict:
        out = {"result": "NotFoundUpTo", "max_size": self.max_size}
        if self.best is not None:
            out["best_max_ratio"] = fraction_text(self.best.max_ratio)
        return out


class _Images:
    """Memoised images of points under the words of omega."""

    def __init__(self, r, omega: Sequence[Word]):
        self.r = r
        self.omega = omega
        self.cache: dict[tuple[int, int], int] = {}

    def image(self, k: int, p: int) -> int:
        key = (k, p)
        q = self.cache.get(key)
        if q is None:
            q = self.r.apply(self.omega[k], p)
            self.cache[key] = q
        return q

    def max_ratio(self, F: set[int]) -> Fraction:
        top = Fraction(0)
        for k in range(len(self.omega)):
            moved = sum(1 for p in F if self.image(k, p) not in F)
            top = max(top, Fraction(2 * moved, len(F)))
        return top


def _neighbours(r, p: int) -> list[int]:
    out = []
    for perm in r.window_images():
        if perm[p] >= 0:
            out.append(perm[p])
    for perm in r._inverse_cache():
        if perm[p] >= 0:
            out.append(perm[p])
    return out


def _bfs_order(r, x: int, limit: int) -> tuple[list[int], bool]:
    """Up to ``limit`` points of the orbit of ``x`` in breadth-first order.

    The flag reports whether the window cut the orbit short, i.e. some
    point reached had an image outside the window.
    """
    images = list(r.window_images()) + list(r._inverse_cache())
    order = [x]
    seen = {x}
    truncated = False
    i = 0
    while i < len(order) and len(order) < limit:
        p = order[i]
        i += 1
        for perm in images:
            q = perm[p]
            if q < 0:
                truncated = True
            elif q not in seen:
                seen.add(q)
                order.append(q)
                if len(order) >= limit:
                    break
    if len(order) < limit:
        truncated = truncated or any(perm[p] < 0 for p in order for perm in images)
    return order, truncated


def folner_search(r, x: int, omega: Iterable[Word], epsilon, max_size: int,
                  step_limit: int = DEFAULT_STEP_LIMIT):
    """Look for an ``(ε, Ω)``-Følner set inside the orbit of ``x``.

    Strategy: every breadth-first prefix of the orbit of ``x`` of size
    1..max_size is tested; if none passes, the prefix with the smallest
    maximal ratio (larger on ties) is improved by single-point swaps with
    its boundary, first improvement wins, for at most ``step_limit`` swaps.
    """
    epsilon = as_fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if max_size < 1:
        raise ValueError("max_size must be at least 1")
    omega = _dedupe(omega)
    r._check_point(x)
    for w in omega:
        r._check_word(w)
    order, truncated = _bfs_order(r, x, max_size)
    images = _Images(r, omega)
    best = None
    for m in range(1, len(order) + 1):
        F = set(order[:m])
        try:
            q = images.max_ratio(F)
        except WindowExhausted:
            break
        if q < epsilon:
            return Found(tuple(sorted(F)), folner_check(r, F, omega, epsilon))
        if best is None or q <= best[0]:
            best = (q, F)
    if best is None:
        raise WindowExhausted("the window is too small to evaluate any candidate")
    q, F = best
    for _ in range(step_limit):
        improved = _swap_step(r, images, F, q)
        if improved is None:
            break
        q, F = improved
        if q < epsilon:
            return Found(tuple(sorted(F)), folner_check(r, F, omega, epsilon))
    if truncated and len(order) < max_size:
        raise WindowExhausted(f"orbit truncated at {len(order)} points before reaching max_size={max_size}")
    return NotFoundUpTo(max_size, folner_check(r, F, omega, epsilon))


def prefix_ratios(r, x: int, omega: Iterable[Word], max_size: int) -> list[tuple[int, Fraction]]:
    """Max ratio of each breadth-first prefix tried by ``folner_search``."""
    omega = _dedupe(omega)
    order, _ = _bfs_order(r, x, max_size)
    images = _Images(r, omega)
    out = []
    for m in range(1, len(order) + 1):
        try:
            out.append((m, images.max_ratio(set(order[:m]))))
        except WindowExhausted:
            break
    return out


def _swap_step(r, images: _Images, F: set[int], q: Fraction):
    boundary = sorted({n for p in F for n in _neighbours(r, p)} - F)
    for out in sorted(F):
        for inn in boundary:
            G = (F - {out}) | {inn}
            try:
                g = images.max_ratio(G)
            except WindowExhausted:
                continue
            if g < q:
                return g, G
    return None


def coamenable_probe(h: SubgroupHandle, omega: Iterable[Word], epsilon, max_size: int,
                     radius: int = DEFAULT_RADIUS, step_limit: int = DEFAULT_STEP_LIMIT):
    """Følner search on ``G/H`` from the basepoint; finite index is immediate."""
    r = quasiregular(h, radius)
    omega = _dedupe(omega)
    if h.is_finite_index:
        whole = range(r.size)
        return Found(tuple(whole), folner_check(r, whole, omega, epsilon))
    return folner_search(r, 0, omega, epsilon, max_size, step_limit)


# --- BS(1,n) -----------------------------------------------------------------

def baumslag_solitar(n: int) -> Presentation:
    """``BS(1,n) = <s,t | t^-1 s t = s^n>``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return parse_presentation(f"<s,t| t^-1*s*t = s^{n}>")


@dataclass
class BSReport:
    n: int
    max_index: int
    quotients: list = field(default_factory=list)  # (index, order of s, quotient order)
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def nonvacuous(self) -> bool:
        return any(order > 1 for _, order, _ in self.quotients)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "max_index": self.max_index,
            "status": "pass" if self.passed else "fail",
            "nonvacuous": self.nonvacuous,
            "pairs": [[i, o] for i, o, _ in self.quotients],
            "quotient_orders": [g for _, _, g in self.quotients],
            "violations": [[i, o] for i, o in self.violations],
        }


def bs_obstruction_check(tables: Sequence[CosetTable], n: int, max_index: int = 0) -> BSReport:
    """Order of the image of ``s`` in each coset-action quotient, which must be prime to ``n``."""
    report = BSReport(n, max_index)
    for t in sorted(tables, key=lambda t: (t.index, t.flat)):
        s_perm = t.column(0)
        t_perm = t.column(2)
        order = permutation_order(s_perm)
        report.quotients.append((t.index, order, permutation_group_order([s_perm, t_perm])))
        if gcd(order, n) != 1:
            report.violations.append((t.index, order))
    return report


def bs_obstruction_probe(n: int, max_index: int, node_limit: int | None = None) -> BSReport:
    p = baumslag_solitar(n)
    tables = low_index(p, max_index) if node_limit is None else low_index(p, max_index, node_limit)
    return bs_obstruction_check(tables, n, max_index)


# --- free products -----------------------------------------------------------

@dataclass
class FreeProductFolner:
    action: WindowAction
    F: tuple[int, ...]
    case: int
    z: Word
    report: FolnerReport
    in_orbit: bool
    agrees_on_A: bool
    bound: Fraction | None = None
    ratio_bound: Fraction | None = None
    bound_holds: bool = True

    def __iter__(self):
        return iter((self.action, self.F))

    @property
    def passed(self) -> bool:
        return self.report.passed and self.in_orbit and self.agrees_on_A and self.bound_holds

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "F": list(self.F),
            "z": format_word(self.z),
            "report": self.report.to_dict(),
            "in_orbit": self.in_orbit,
            "agrees_on_A": self.agrees_on_A,
            "bound": fraction_text(self.bound) if self.bound is not None else None,
            "ratio_bound": fraction_text(self.ratio_bound) if self.ratio_bound is not None else None,
            "bound_holds": self.bound_holds,
            "window": self.action.permutations(),
        }


def _inverse(perm: Sequence[int]) -> list[int]:
    back = [-1] * len(perm)
    for p, q in enumerate(perm):
        if q >= 0:
            back[q] = p
    return back


def _orbit(perms: Sequence[Sequence[int]], start: int) -> tuple[list[int], bool]:
    """Orbit of ``start`` under partial permutations and their inverses; flag marks escapes."""
    moves = list(perms) + [_inverse(p) for p in perms]
    order = [start]
    seen = {start}
    escapes = False
    for p in order:
        for perm in moves:
            q = perm[p]
            if q < 0:
                escapes = True
            elif q not in seen:
                seen.add(q)
                order.append(q)
    return order, escapes


def _path_from(moves: Sequence[tuple[int, Sequence[int]]], x: int, targets: set[int]):
    """Breadth-first shortest letter path from ``x`` into ``targets``."""
    parent = {x: None}
    order = [x]
    for p in order:
        if p in targets:
            letters = []
            q = p
            while parent[q] is not None:
                q, letter = parent[q]
                letters.append(letter)
            # letters were collected from the end, which is the left of the word
            return p, tuple(letters)
        for letter, perm in moves:
            q = perm[p]
            if q >= 0 and q not in parent:
                parent[q] = (p, letter)
                order.append(q)
    return None, None


def free_product_folner(sigma, tau, x: int, S: Iterable[Word], T: Iterable[Word], epsilon,
                        A: Iterable[int] | None = None, max_centers: int | None = None) -> FreeProductFolner:
    """Build ``φ'*τ`` agreeing with ``σ`` on ``A`` whose orbit of ``x`` holds an
    ``(ε, S ∪ T)``-Følner set.

    Both actions must share one labelled window.  If every orbit met is
    closed the orbit of ``x`` itself is returned.  Otherwise a Følner set
    ``F`` for the side with an unbounded orbit is found, and the other side
    is conjugated by an involution swapping fixed points ``C`` with
    ``D = F - (B + {y})`` so that ``F`` is almost invariant under it too.
    """
    n = sigma.size
    if tau.size != n:
        raise WindowMismatch(f"windows have {n} and {tau.size} points")
    epsilon = as_fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    G, K = sigma.presentation, tau.presentation
    product = free_product(G, K)
    S, T = _dedupe(S), _dedupe(T)
    for w in S:
        sigma._check_word(w)
    for w in T:
        tau._check_word(w)
    sigma._check_point(x)
    A = {x} if A is None else set(A) | {x}
    for a in A:
        sigma._check_point(a)

    g_imgs = [list(p) for p in sigma.window_images()]
    k_imgs = [list(p) for p in tau.window_images()]
    both = g_imgs + k_imgs
    omega = [lift_word(w, product.alphabet) for w in S + T]

    def assemble(gi, ki) -> WindowAction:
        return WindowAction(product, [tuple(p) for p in gi] + [tuple(p) for p in ki])

    Lx, _ = _orbit(both, x)
    sides = [g_imgs, k_imgs]
    unbounded = [set(), set()]
    for side, imgs in enumerate(sides):
        done: set[int] = set()
        for p in Lx:
            if p in done:
                continue
            orb, escapes = _orbit(imgs, p)
            done.update(orb)
            if escapes:
                unbounded[side].add(min(orb))

    if not unbounded[0] and not unbounded[1]:
        action = assemble(g_imgs, k_imgs)
        F = set(Lx)
        report = folner_check(action, F, omega, epsilon)
        return FreeProductFolner(action, tuple(sorted(F)), 1, product.alphabet.identity(), report,
                                 True, True)

    # the Følner side has an unbounded orbit Y; the other side gets conjugated
    fside = 1 if unbounded[1] else 0
    mside = 1 - fside
    f_rep, m_rep = (tau, sigma) if fside == 1 else (sigma, tau)
    f_words, m_words = (T, S) if fside == 1 else (S, T)

    B = set(A)
    for s in m_words:
        for a in A:
            B.add(m_rep.apply(s, a))
    bound = Fraction(2 * (len(B) + 1)) / epsilon
    need = bound.numerator // bound.denominator + 1  # smallest size strictly above the bound

    F = _large_folner(f_rep, sides[fside], unbounded[fside], f_words, epsilon, need, max_centers)
    if F is None:
        raise NoFolnerInOrbit(f"no ({fraction_text(epsilon)}, T)-Følner set of size > "
                              f"{fraction_text(bound)} found in an unbounded orbit of the window")

    width_g = G.alphabet.width
    moves = []
    for j, p in enumerate(g_imgs):
        moves += [(2 * j, p), (2 * j + 1, _inverse(p))]
    for j, p in enumerate(k_imgs):
        moves += [(width_g + 2 * j, p), (width_g + 2 * j + 1, _inverse(p))]
    y, z_letters = _path_from(moves, x, F)
    if y is None:
        raise NoFolnerInOrbit("the Følner set is not reachable from x inside the window")
    z = Word(product.alphabet, z_letters)
    path = _visited(moves, x, z_letters)

    D = sorted(F - B - {y})
    m_imgs = sides[mside]
    fixed = [p for p in range(n) if all(perm[p] == p for perm in m_imgs)]
    excluded = B | F | path
    C = [p for p in fixed if p not in excluded][:len(D)]
    if len(C) < len(D):
        raise InsufficientFixedPoints(f"need {len(D)} points fixed by every generator outside "
                                      f"the excluded region, found {len(C)}")
    xi = list(range(n))
    for c, d in zip(C, D):
        xi[c], xi[d] = d, c
    new_m = [[xi[perm[xi[p]]] if perm[xi[p]] >= 0 else -1 for p in range(n)] for perm in m_imgs]
    gi, ki = (new_m, k_imgs) if mside == 0 else (g_imgs, new_m)
    action = assemble(gi, ki)

    report = folner_check(action, F, omega, epsilon)
    orbit, _ = _orbit(list(action.window_images()), x)
    modified = WindowAction(m_rep.presentation, new_m)
    agrees = all(modified.apply(s, a) == m_rep.apply(s, a) for s in m_words for a in A)
    # every modified-side word moves at most the points of F - D
    ratio_bound = Fraction(2 * (len(B) + 1), len(F))
    lifted = [lift_word(w, product.alphabet) for w in m_words]
    holds = ratio_bound < epsilon and all(report.ratios[w] <= ratio_bound for w in lifted)
    return FreeProductFolner(action, tuple(sorted(F)), 2, z, report, F <= set(orbit), agrees, bound,
                             ratio_bound, holds)


def _visited(moves, x: int, letters: Sequence[int]) -> set[int]:
    by_letter = dict(moves)
    seen = {x}
    p = x
    for letter in reversed(letters):
        p = by_letter[letter][p]
        seen.add(p)
    return seen


def _large_folner(rep, imgs, seeds, words, epsilon, need: int, max_centers):
    """Breadth-first balls of exactly ``need`` points inside an unbounded orbit meeting ``Lx``."""
    centres_tried = 0
    for seed in sorted(seeds):
        orb, _ = _orbit(imgs, seed)
        if len(orb) < need:
            continue
        for centre in orb:
            if max_centers is not None and centres_tried >= max_centers:
                return None
            centres_tried += 1
            ball, _ = _bfs_order(rep, centre, need)
            if len(ball) < need:
                continue
            F = set(ball)
            try:
                if all(ratio(rep, F, w) < epsilon for w in words):
                    return F
            except WindowExhausted:
                continue
    return None


def desk_instance(window: int, seed: int = 0, support: int = 6, lane: tuple[int, int] | None = None):
    """A seeded ``Z * Z`` test input on ``window`` points.

    ``t`` translates the lane ``[lo, hi)`` (leaving the window at ``hi - 1``)
    and fixes everything else; ``s`` permutes ``support`` random points and
    fixes the rest.  Returns ``(sigma, tau, x)`` with ``x`` on the lane.
    """
    import random

    rng = random.Random(seed)
    lo, hi = lane if lane is not None else (0, window)
    if not 0 <= lo < hi <= window:
        raise ValueError("lane must lie inside the window")
    G, K = parse_presentation("<s|>"), parse_presentation("<t|>")
    t = list(range(window))
    for p in range(lo, hi):
        t[p] = p + 1 if p + 1 < hi else -1
    s = list(range(window))
    moved = rng.sample(range(window), min(support, window))
    shuffled = moved[:]
    rng.shuffle(shuffled)
    for p, q in zip(moved, shuffled):
        s[p] = q
    x = rng.randrange(lo, hi)
    return WindowAction(G, [s]), WindowAction(K, [t]), x
