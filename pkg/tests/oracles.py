"""Brute-force reference computations that share no code with the package.

Letters here are ``(generator, sign)`` pairs and permutations are tuples;
only presentations are taken from the package, as plain data.
"""

from __future__ import annotations

import itertools
from fractions import Fraction


def letters_of(word):
    """Package letter codes -> (generator, +1/-1) pairs."""
    return [(x >> 1, -1 if x & 1 else 1) for x in word.letters]


def reduce_pairs(pairs):
    out = []
    for g, e in pairs:
        if out and out[-1] == (g, -e):
            out.pop()
        else:
            out.append((g, e))
    return tuple(out)


def reduced_words(rank: int, max_len: int):
    """Every freely reduced word of length <= max_len, as pair tuples."""
    words = [()]
    frontier = [()]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for g in range(rank):
                for e in (1, -1):
                    if w and w[-1] == (g, -e):
                        continue
                    nxt.append(w + ((g, e),))
        words += nxt
        frontier = nxt
    return words


def invert_perm(p):
    inv = [0] * len(p)
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


def right_trace(perms, invs, pairs, start=0):
    """Right action: apply letters left to right."""
    p = start
    for g, e in pairs:
        p = perms[g][p] if e == 1 else invs[g][p]
    return p


def _canonical(perms, invs, n):
    """BFS renumbering from 0 with columns g1, g1^-1, g2, ..."""
    order = [0]
    where = {0: 0}
    for p in order:
        for g in range(len(perms)):
            for q in (perms[g][p], invs[g][p]):
                if q not in where:
                    where[q] = len(order)
                    order.append(q)
    if len(order) != n:
        return None
    flat = []
    for p in order:
        for g in range(len(perms)):
            flat += [where[perms[g][p]], where[invs[g][p]]]
    return tuple(flat)


def pointed_actions(presentation, n: int) -> set[tuple[int, ...]]:
    """Canonical tables of transitive pointed right actions on exactly n points.

    Each distinct table is one subgroup (the stabilizer of point 0).
    """
    rank = presentation.rank
    rels = [letters_of(r) for r in presentation.relators]
    all_perms = list(itertools.permutations(range(n)))
    candidates = []
    for g in range(rank):
        # relators in one generator only prune that generator's candidates early
        own = [r for r in rels if r and all(h == g for h, _ in r)]
        keep = []
        for p in all_perms:
            inv = invert_perm(p)
            perms = {g: p}
            invs = {g: inv}
            if all(right_trace(perms, invs, r, s) == s for r in own for s in range(n)):
                keep.append(p)
        candidates.append(keep)
    found = set()
    for combo in itertools.product(*candidates):
        invs = [invert_perm(p) for p in combo]
        if not all(right_trace(combo, invs, r, s) == s for r in rels for s in range(n)):
            continue
        flat = _canonical(combo, invs, n)
        if flat is not None:
            found.add(flat)
    return found


def symmetric_difference_ratio(F: set, image: set) -> Fraction:
    return Fraction(len(F ^ image), len(F))


def apply_perm_word(images, pairs, x):
    """Left action on a window: rightmost letter first; None when leaving the window."""
    invs = []
    for perm in images:
        back = [-1] * len(perm)
        for p, q in enumerate(perm):
            if q >= 0:
                back[q] = p
        invs.append(back)
    for g, e in reversed(pairs):
        x = images[g][x] if e == 1 else invs[g][x]
        if x < 0:
            return None
    return x
