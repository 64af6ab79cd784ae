from collections import deque

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qtrunc import groups
from qtrunc.errors import ResourceError, StructuralError
from qtrunc.groups import GroupId, parse_group

Z2 = GroupId.free_abelian(2)
H3 = GroupId.heisenberg()
CATALOG = [
    GroupId.free_abelian(1),
    Z2,
    GroupId.cyclic(6),
    H3,
    GroupId.dihedral(4),
    GroupId.table("S3"),
    GroupId.table("Q8"),
]


def heis_mul(x, y):
    # independent copy of (a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')
    return (x[0] + y[0], x[1] + y[1], x[2] + y[2] + x[0] * y[1])


def heis_bfs(radius):
    gens = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)]
    dist = {(0, 0, 0): 0}
    q = deque([(0, 0, 0)])
    while q:
        x = q.popleft()
        if dist[x] == radius:
            continue
        for s in gens:
            y = heis_mul(x, s)
            if y not in dist:
                dist[y] = dist[x] + 1
                q.append(y)
    return dist


class TestMultiply:
    def test_heisenberg_product(self):
        assert groups.multiply(H3, (1, 0, 0), (0, 1, 0)) == (1, 1, 1)

    def test_cyclic_product(self):
        assert groups.multiply(GroupId.cyclic(5), 3, 4) == 2

    @pytest.mark.parametrize("g", CATALOG, ids=str)
    def test_inverse_gives_identity(self, g):
        for x in groups.enumerate_ball(g, 3):
            assert groups.multiply(g, x, groups.inverse(g, x)) == g.identity
            assert groups.multiply(g, groups.inverse(g, x), x) == g.identity

    @pytest.mark.parametrize("g", CATALOG, ids=str)
    def test_associative_on_small_ball(self, g):
        ball = groups.enumerate_ball(g, 2)
        for x in ball:
            for y in ball[:7]:
                for z in ball[:5]:
                    assert g.multiply(g.multiply(x, y), z) == g.multiply(x, g.multiply(y, z))

    def test_shape_mismatch_is_structural(self):
        with pytest.raises(StructuralError):
            groups.multiply(Z2, (1, 2, 3), (0, 0))
        with pytest.raises(StructuralError):
            groups.multiply(GroupId.cyclic(3), 1, (1,))


class TestWordLength:
    def test_l1_closed_form(self):
        assert groups.word_length(Z2, (3, -2)) == 5

    def test_identity_has_length_zero(self):
        for g in CATALOG:
            assert groups.word_length(g, g.identity) == 0

    def test_heisenberg_commutator_has_length_four(self):
        x, y = (1, 0, 0), (0, 1, 0)
        xi, yi = H3.inverse(x), H3.inverse(y)
        z = H3.multiply(H3.multiply(H3.multiply(x, y), xi), yi)
        assert z == (0, 0, 1)
        assert groups.word_length(H3, z) == 4

    def test_bfs_matches_closed_form(self):
        for x in groups.enumerate_ball(Z2, 4):
            assert groups.bfs_word_length(Z2, x) == groups.word_length(Z2, x)

    def test_heisenberg_against_independent_bfs(self):
        ref = heis_bfs(5)
        for x, d in ref.items():
            assert groups.word_length(H3, x) == d

    @pytest.mark.parametrize("g", CATALOG, ids=str)
    def test_symmetry_and_subadditivity(self, g):
        ball = groups.enumerate_ball(g, 4 if g.family != "heisenberg" else 3)
        L = {x: groups.word_length(g, x) for x in ball}
        for x in ball:
            assert groups.word_length(g, g.inverse(x)) == L[x]
        sample = ball[:: max(1, len(ball) // 25)]
        for x in sample:
            for y in sample:
                assert groups.word_length(g, g.multiply(x, y)) <= L[x] + L[y]

    def test_distance_is_left_invariant(self):
        g = GroupId.table("S3")
        els = g.elements()
        for z in els:
            for x in els:
                for y in els:
                    assert groups.distance(g, g.multiply(z, x), g.multiply(z, y)) == groups.distance(g, x, y)


class TestBall:
    def test_z2_ball_counts(self):
        for n in range(6):
            assert len(groups.enumerate_ball(Z2, n)) == 2 * n * n + 2 * n + 1

    def test_cyclic_two(self):
        assert groups.enumerate_ball(GroupId.cyclic(2), 1) == [0, 1]

    def test_heisenberg_counts_from_independent_bfs(self):
        ref = heis_bfs(4)
        for n in range(5):
            expect = sum(1 for d in ref.values() if d <= n)
            assert len(groups.enumerate_ball(H3, n)) == expect
        # frozen values of the oracle
        assert [len(groups.enumerate_ball(H3, n)) for n in range(5)] == [1, 5, 17, 53, 135]

    @pytest.mark.parametrize("g", CATALOG, ids=str)
    def test_ball_is_sorted_nested_and_exact(self, g):
        prev = []
        for n in range(4):
            ball = groups.enumerate_ball(g, n)
            assert ball == sorted(ball)
            assert set(prev) <= set(ball)
            assert all(groups.word_length(g, x) <= n for x in ball)
            if not g.is_finite:
                assert len(ball) > len(prev)
            prev = ball

    def test_finite_ball_stabilizes_at_group(self):
        g = GroupId.dihedral(4)
        assert len(groups.enumerate_ball(g, groups.diameter(g))) == 8

    def test_budget_exceeded(self):
        with pytest.raises(ResourceError, match="budget"):
            groups.enumerate_ball(Z2, 50, budget=100)

    def test_negative_radius(self):
        with pytest.raises(StructuralError):
            groups.enumerate_ball(Z2, -1)


class TestCatalog:
    @pytest.mark.parametrize("text,order", [("Z/6", 6), ("D4", 8), ("S3", 6), ("Q8", 8)])
    def test_parse_finite(self, text, order):
        assert parse_group(text).order == order

    def test_parse_infinite(self):
        assert parse_group("Z^2") == Z2
        assert parse_group("H3") == H3
        assert not parse_group("Z").is_finite

    def test_unknown(self):
        with pytest.raises(StructuralError):
            parse_group("SL2Z")

    @pytest.mark.parametrize("g", [x for x in CATALOG if x.is_finite], ids=str)
    def test_generators_symmetric_and_generate(self, g):
        S = set(g.generating_set)
        assert all(g.inverse(s) in S for s in S)
        assert len(groups.enumerate_ball(g, groups.diameter(g))) == g.order


@given(st.tuples(st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6)),
       st.tuples(st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6)))
def test_heisenberg_product_matches_formula(x, y):
    assert H3.multiply(x, y) == heis_mul(x, y)


@given(st.tuples(st.integers(-9, 9), st.integers(-9, 9)), st.tuples(st.integers(-9, 9), st.integers(-9, 9)))
def test_z2_length_triangle(x, y):
    assert groups.word_length(Z2, Z2.multiply(x, y)) <= groups.word_length(Z2, x) + groups.word_length(Z2, y)
    assert groups.word_length(Z2, x) == int(np.abs(x).sum())
