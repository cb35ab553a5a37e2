import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from solitary.chabauty import SubgroupHandle, conjugate
from solitary.cosets import todd_coxeter
from solitary.errors import (
    ConjugateDuplicate, IndexOutOfRange, InvalidClassification, NotABijection, WindowExhausted,
    WindowMismatch,
)
from solitary.permrep import (
    DELTA, SIGMA, BasicOpen, WindowAction, add_fixed_points, add_orbits, conjugate_rep,
    disjoint_union, free_product_rep, in_basic_open, quasiregular, tau_star_lerf, tau_star_solitary,
    trivial_rep,
)
from solitary.stallings import conjugate_core, fold
from solitary.words import Word, parse_presentation

Z = parse_presentation("<a|>")
F2 = parse_presentation("<a,b|>")


def nZ(n):
    return SubgroupHandle.finite_index(todd_coxeter(Z, [Z.word(f"a^{n}")]))


def z_parts(*ns):
    return disjoint_union([(quasiregular(nZ(n)), 1) for n in ns])


def test_quasiregular_finite():
    r = quasiregular(nZ(3))
    assert r.cycle_types() == {"a": {3: 1}}
    assert r.stabilizer(0) == nZ(3)
    one = quasiregular(nZ(1))
    assert one.size == 1 and one.permutations() == {"a": [0]}


def test_quasiregular_lazy_reps():
    h = SubgroupHandle.generated_by(F2, F2.words("a^2, b^2"))
    r = quasiregular(h, radius=2)
    reps = [r.representative(x) for x in range(3)]
    assert reps == [F2.alphabet.identity(), F2.word("a"), F2.word("b")]
    # oracle: distinct cosets iff u^-1 v is outside H
    for u in reps:
        for v in reps:
            if u != v:
                assert not h.member(~u * v)


def test_apply_examples():
    r = z_parts(2, 3)
    assert r.apply(Z.alphabet.identity(), 4) == 4
    assert r.apply(Z.word("a"), 2) == 3
    lazy = quasiregular(SubgroupHandle.generated_by(F2, F2.words("a")), radius=0)
    with pytest.raises(WindowExhausted):
        lazy.apply(F2.word("b"), 0)
    with pytest.raises(IndexOutOfRange):
        r.apply(Z.word("a"), 5)


def test_stabilizer_examples():
    r = z_parts(2, 3)
    assert all(r.stabilizer(x) == nZ(3) for x in (2, 3, 4))
    lazy = quasiregular(SubgroupHandle.generated_by(F2, F2.words("b")), radius=2)
    x = next(p for p in range(lazy.size) if lazy.representative(p) == F2.word("a"))
    assert lazy.stabilizer(x).core == conjugate_core(fold(F2.alphabet, F2.words("b")), F2.word("a"))


def test_disjoint_union_examples():
    r = quasiregular(nZ(3))
    assert disjoint_union([(r, 1)]) == r
    six = disjoint_union([(quasiregular(nZ(n)), 2) for n in (1, 2, 3)])
    assert six.size == 12 and six.cycle_types()["a"] == {1: 2, 2: 2, 3: 2}
    assert z_parts(3, 1, 2) == z_parts(2, 3, 1)


def test_tau_star_examples():
    r = tau_star_lerf(Z, 3, 2)
    assert r.size == 12 and r.cycle_types()["a"] == {1: 2, 2: 2, 3: 2}
    f = tau_star_lerf(F2, 2, 1)
    assert f.size == 7 and len(f.components) == 4
    one = tau_star_lerf(F2, 1, 1)
    assert one.permutations() == {"a": [0], "b": [0]}


def test_tau_star_solitary():
    classified = [(nZ(n), DELTA) for n in (1, 2, 3)]
    assert tau_star_solitary(classified, 2) == tau_star_lerf(Z, 3, 2)
    free = SubgroupHandle.generated_by(F2, F2.words("a"))
    r = tau_star_solitary([(free, SIGMA)], 5, radius=1)
    assert r.components[0][1] == 1
    with pytest.raises(InvalidClassification):
        tau_star_solitary([(nZ(2), SIGMA)], 1)
    with pytest.raises(ConjugateDuplicate):
        tau_star_solitary([(nZ(2), DELTA), (nZ(2), DELTA)], 1)
    with pytest.raises(InvalidClassification):
        tau_star_solitary([(nZ(2), "Gamma")], 1)


def test_basic_open():
    r = z_parts(2, 1)
    assert in_basic_open(r, BasicOpen(r, tuple(Z.words("a")), (0,)))
    other = WindowAction(Z, [[1, 0, 2, 3]])
    changed = WindowAction(Z, [[1, 0, 3, 2]])
    assert in_basic_open(changed, BasicOpen(other, tuple(Z.words("a")), (0,)))
    swap = WindowAction(Z, [[1, 0]])
    ident = WindowAction(Z, [[0, 1]])
    assert not in_basic_open(ident, BasicOpen(swap, tuple(Z.words("a")), (0,)))


def test_trace_examples():
    r3, r2 = quasiregular(nZ(3)), quasiregular(nZ(2))
    assert r3.trace(0, Z.alphabet.identity()) == {0}
    assert r3.trace(0, Z.word("a^2")) == {0, 1, 2}
    assert r2.trace(0, Z.word("a^2")) == {0, 1}


def test_add_orbits_and_fixed_points():
    base = trivial_rep(Z)
    assert add_orbits(base, nZ(2), 0) == base
    bigger = add_orbits(base, nZ(2), 2)
    assert bigger.cycle_types()["a"] == {1: 1, 2: 2}
    assert all(bigger.stabilizer(b) == nZ(2) for b in bigger.basepoints() if b)
    assert add_fixed_points(base, 0) == base
    assert add_fixed_points(add_fixed_points(base, 1), 2) == add_fixed_points(base, 3)
    fixed = add_fixed_points(quasiregular(nZ(3)), 3)
    assert sum(1 for p, q in enumerate(fixed.permutations()["a"]) if p == q) == 3


def test_conjugate_rep_examples():
    r = quasiregular(nZ(3))
    assert conjugate_rep(r, [0, 1, 2]).images == r.window_images()
    moved = conjugate_rep(r, [1, 0, 2])
    assert moved.cycle_types() == r.cycle_types()
    assert moved.images != r.window_images()
    with pytest.raises(NotABijection):
        conjugate_rep(r, [0, 0, 1])


def test_free_product_rep():
    G, K = parse_presentation("<s|>"), parse_presentation("<t|>")
    phi = WindowAction(G, [[1, 0, 2]])
    psi = WindowAction(K, [[1, 2, 0]])
    r = free_product_rep(phi, psi)
    st_word = r.presentation.word("s*t")
    assert r.apply(st_word, 0) == phi.apply(G.word("s"), psi.apply(K.word("t"), 0))
    s_only = r.presentation.word("s^2")
    assert r.stabilizer(2).member(s_only) and phi.stabilizer(2).member(G.word("s"))
    trivial = free_product_rep(WindowAction(G, [[0]]), WindowAction(K, [[0]]))
    assert trivial.permutations() == {"s": [0], "t": [0]}
    with pytest.raises(WindowMismatch):
        free_product_rep(phi, WindowAction(K, [[0]]))


def test_window_action_rejects_non_injective():
    with pytest.raises(NotABijection):
        WindowAction(Z, [[1, 1]])


def test_embedding_preserves_action():
    small = z_parts(2)
    big = add_orbits(z_parts(2), nZ(3), 1)
    m = small.embedding_into(big)
    for x in range(small.size):
        assert big.apply(Z.word("a"), m[x]) == m[small.apply(Z.word("a"), x)]


def test_stabilizer_of_lazy_point_is_conjugate():
    h = SubgroupHandle.generated_by(F2, F2.words("a*b, b^2"))
    r = quasiregular(h, radius=2)
    for x in range(r.size):
        u = r.representative(x)
        assert r.stabilizer(x) == conjugate(h, u)


@st.composite
def windows(draw):
    n = draw(st.integers(1, 6))
    return WindowAction(F2, [draw(st.permutations(range(n))) for _ in range(2)])


word_st = st.lists(st.integers(0, 3), max_size=6).map(lambda xs: Word(F2.alphabet, xs))


@given(windows(), word_st, word_st, st.data())
def test_apply_is_left_action(r, u, v, data):
    x = data.draw(st.integers(0, r.size - 1))
    assert r.apply(u * v, x) == r.apply(u, r.apply(v, x))
    assert r.apply(u, x) == oracles.apply_perm_word(r.images, oracles.letters_of(u), x)


@given(windows(), word_st, st.data())
def test_stabilizer_membership_matches_oracle(r, w, data):
    x = data.draw(st.integers(0, r.size - 1))
    assert r.stabilizer(x).member(w) == (oracles.apply_perm_word(r.images, oracles.letters_of(w), x) == x)


@given(st.lists(st.integers(1, 5), min_size=1, max_size=4), st.data())
def test_union_order_is_irrelevant(ns, data):
    shuffled = data.draw(st.permutations(ns))
    assert z_parts(*ns) == z_parts(*shuffled)
