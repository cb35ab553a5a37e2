import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from solitary.cosets import (
    CosetTable, Overflow, are_conjugate, conjugacy_representatives, contains_subgroup, coset_of,
    cycle_type, is_normal, low_index, minimal_overgroups, normalizer_index, overgroups,
    permutation_group_order, reduced_tree_word, schreier_generators, todd_coxeter, validate_table,
)
from solitary.errors import AlphabetMismatch
from solitary.stallings import contains, fold
from solitary.words import Word, parse_presentation


def test_cyclic_quotient(Z):
    t = todd_coxeter(Z, [Z.word("a^3")])
    assert t.index == 3
    assert cycle_type(t.column(0)) == {3: 1}


def test_s3_regular(S3):
    t = todd_coxeter(S3, [])
    assert t.index == 6
    # oracle: (1 2) and (2 3) generate all six permutations of three points
    assert permutation_group_order([(1, 0, 2), (0, 2, 1)]) == 6


def test_free_group_overflows(F2):
    assert isinstance(todd_coxeter(F2, [], max_cosets=100), Overflow)


def test_subgen_order_irrelevant(F2):
    a = todd_coxeter(F2, F2.words("a^2, b, a*b*a^-1"))
    b = todd_coxeter(F2, F2.words("a*b*a^-1, b, a^2"))
    assert a == b and a.index == 2


def test_foreign_subgen_rejected(Z, F2):
    with pytest.raises(AlphabetMismatch):
        todd_coxeter(Z, [F2.word("b")])


@pytest.mark.parametrize("name,n,count", [("Z", 4, 4), ("F2", 2, 4), ("BS12", 2, 2)])
def test_low_index_counts(request, name, n, count):
    assert len(low_index(request.getfixturevalue(name), n)) == count


def test_low_index_tables_valid(S3):
    for t in low_index(S3, 6):
        assert validate_table(t) == []


def test_schreier_generators_of_3Z(Z):
    t = todd_coxeter(Z, [Z.word("a^3")])
    assert schreier_generators(t) == [Z.word("a^3")]


def test_schreier_generators_of_kernel(F2):
    t = todd_coxeter(F2, F2.words("a^2, b, a*b*a^-1"))
    gens = schreier_generators(t)
    core = fold(F2.alphabet, gens)
    assert all(contains(core, w) for w in F2.words("a^2, b, a*b*a^-1"))
    assert not contains(core, F2.word("a"))
    assert all(t.trace(w.letters) == 0 for w in gens)


def test_trace_examples(Z, S3):
    t3 = todd_coxeter(Z, [Z.word("a^3")])
    assert t3.trace(()) == 0
    assert t3.trace(Z.word("a^4").letters) == 1
    reg = todd_coxeter(S3, [])
    assert reg.trace(S3.word("(a*b)^3").letters) == 0


def test_overgroups_of_6Z(Z):
    t = todd_coxeter(Z, [Z.word("a^6")])
    assert sorted(k.index for k in overgroups(t)) == [1, 2, 3, 6]
    assert sorted(k.index for k in minimal_overgroups(t)) == [2, 3]


def test_overgroups_small_cases(F2):
    for t in low_index(F2, 2):
        assert sorted(k.index for k in overgroups(t)) == sorted({1, t.index})


def test_normalizer_index(F2):
    for t in low_index(F2, 3):
        if is_normal(t):
            assert normalizer_index(t) == t.index
    # stabilizer of a point in the natural action of S3: a -> (0 1), b -> (1 2)
    point = CosetTable.from_rows(F2, [[1, 1, 0, 0], [0, 0, 2, 2], [2, 2, 1, 1]])
    assert point.index == 3
    assert normalizer_index(point) == 1
    assert normalizer_index(low_index(F2, 1)[0]) == 1


def test_conjugacy_classes(F2):
    tables = low_index(F2, 3)
    reps = conjugacy_representatives(tables)
    covered = sum(len({t for t in tables if are_conjugate(t, r)}) for r in reps)
    assert covered == len(tables)


def test_contains_subgroup(Z):
    t2 = todd_coxeter(Z, [Z.word("a^2")])
    assert contains_subgroup(t2, [Z.word("a^6")])
    assert not contains_subgroup(t2, [Z.word("a^3")])


def test_reduced_tree_word(F2):
    for t in low_index(F2, 3):
        for c in range(t.index):
            assert coset_of(t, reduced_tree_word(t, c)) == c


@pytest.mark.slow
def test_low_index_f2_counts_match_oracle(F2):
    per_index = [len(oracles.pointed_actions(F2, n)) for n in range(1, 5)]
    ours = low_index(F2, 4)
    assert [sum(1 for t in ours if t.index == n) for n in range(1, 5)] == per_index


@given(st.lists(st.lists(st.integers(0, 3), min_size=1, max_size=6), min_size=1, max_size=3),
       st.lists(st.integers(0, 3), max_size=8))
def test_enumeration_membership_agrees_with_folding(gens, w):
    F2 = parse_presentation("<a,b|>")
    words = [Word(F2.alphabet, g) for g in gens]
    core = fold(F2.alphabet, words)
    if not core.is_complete:
        return
    t = todd_coxeter(F2, words)
    assert t.index == core.vertices
    word = Word(F2.alphabet, w)
    assert (t.trace(word.letters) == 0) == contains(core, word)


@given(st.integers(0, 10_000))
def test_rebase_is_conjugation(seed):
    rng = random.Random(seed)
    F2 = parse_presentation("<a,b|>")
    tables = low_index(F2, 3)
    t = rng.choice(tables)
    c = rng.randrange(t.index)
    g = reduced_tree_word(t, c)
    moved = t.rebase(c)
    w = Word(F2.alphabet, [rng.randrange(4) for _ in range(rng.randint(0, 6))])
    # stabilizer of coset c is g^-1 H g
    assert (moved.trace(w.letters) == 0) == (t.trace(w.conjugate_by(g).letters) == 0)
