"""Exact identities for the polynomial core.

Derived expectations are recomputed in-place by brute-force expansion
oracles (never by the code path under test).
"""

import itertools
import random
from math import factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import bilinear_form, diagonal_form, lens_quadric, triple_product
from primearcs.forms import (
    Form,
    cross_part,
    evaluate,
    gamma_eval,
    gradient,
    homogeneous_part,
    parse_form,
    restrict_zero,
    substitute_diagonal,
    symmetric_multilinear,
)


def random_form(rng, n, d, n_terms=6, allow_lower=False):
    raw = []
    for _ in range(n_terms):
        deg = d if not allow_lower else rng.randint(0, d)
        expo = [0] * n
        for _ in range(deg):
            expo[rng.randrange(n)] += 1
        raw.append((tuple(expo), rng.randint(-5, 5)))
    return Form.from_terms(n, raw)


# ---------------------------------------------------------------- parsing

def test_parse_three_term_quadric():
    F = parse_form("1 2 0 0\n1 0 2 0\n-2 0 0 2")
    assert F.n_vars == 3
    assert F.degree == 2
    assert F.is_homogeneous()
    assert F == lens_quadric()


def test_parse_cancellation_gives_zero_form():
    F = parse_form("3 1 0\n-3 1 0")
    assert F.is_zero()
    assert F.degree == 0


def test_parse_single_monomial():
    F = parse_form("1 1 1 1")
    assert F == triple_product()
    assert F.degree == 3


def test_parse_comments_and_blank_lines():
    F = parse_form("# a comment\n\n2 1 0  # trailing\n")
    assert F == Form.from_terms(2, [((1, 0), 2)])


def test_parse_errors():
    with pytest.raises(ValueError, match="ragged"):
        parse_form("1 1 0\n1 1 0 0")
    with pytest.raises(ValueError, match="non-integer"):
        parse_form("1 x 0")
    with pytest.raises(ValueError, match="no terms"):
        parse_form("# nothing here\n")


# ---------------------------------------------------------------- evaluation

def test_evaluate_known_points(lens):
    assert evaluate(lens, (1, 1, 1)) == 0
    assert evaluate(lens, (7, 17, 13)) == 0  # 49 + 289 - 338, a prime point
    assert evaluate(lens, (3, 5, 0)) == 34


def test_evaluate_length_mismatch(lens):
    with pytest.raises(ValueError):
        evaluate(lens, (1, 2))


def test_sum_of_coefficients_at_ones():
    rng = random.Random(7)
    for _ in range(20):
        F = random_form(rng, 4, 3, allow_lower=True)
        assert evaluate(F, (1, 1, 1, 1)) == sum(F.terms.values())


# ---------------------------------------------------------------- gradient

def test_gradient_examples(lens):
    gx = gradient(lens)
    assert gx[0] == Form.from_terms(3, [((1, 0, 0), 2)])
    assert gx[1] == Form.from_terms(3, [((0, 1, 0), 2)])
    assert gx[2] == Form.from_terms(3, [((0, 0, 1), -4)])
    gp = gradient(triple_product())
    assert gp[0] == Form.from_terms(3, [((0, 1, 1), 1)])
    const = Form.from_terms(1, [((0,), 5)])
    assert gradient(const) == [Form.zero(1)]


def test_euler_identity_random_points():
    # sum x_i dF/dx_i = d * F for homogeneous F, exact integers
    rng = random.Random(11)
    for _ in range(10):
        n, d = rng.randint(2, 5), rng.randint(2, 4)
        F = random_form(rng, n, d)
        if F.is_zero():
            continue
        grads = gradient(F)
        for _ in range(10):
            x = [rng.randint(-9, 9) for _ in range(n)]
            lhs = sum(xi * evaluate(g, x) for xi, g in zip(x, grads))
            assert lhs == d * evaluate(F, x)


# ---------------------------------------------------------------- parts

def test_homogeneous_part_splits():
    f = parse_form("1 2\n3 1\n5 0")  # x^2 + 3x + 5
    assert homogeneous_part(f, 2) == Form.from_terms(1, [((2,), 1)])
    assert homogeneous_part(f, 0) == Form.from_terms(1, [((0,), 5)])
    assert homogeneous_part(f, 1) + homogeneous_part(f, 0) + homogeneous_part(f, 2) == f


def test_homogeneous_part_identity_case(lens):
    assert homogeneous_part(lens, 2) == lens
    assert homogeneous_part(lens, 3).is_zero()


def test_restrict_zero():
    F = parse_form("1 2 0 0\n1 1 1 0\n1 0 0 2")  # x1^2 + x1 x2 + x3^2
    assert restrict_zero(F, {1, 2}) == Form.from_terms(3, [((2, 0, 0), 1)])
    assert restrict_zero(F, set()) == F
    with pytest.raises(IndexError):
        restrict_zero(F, {3})


def test_restrict_zero_diagonal_block():
    D = diagonal_form(4, 3)
    R = restrict_zero(D, {0, 1})
    assert R == Form.from_terms(4, [((0, 0, 3, 0), 1), ((0, 0, 0, 3), 1)])


# ---------------------------------------------------------------- cross part

def test_cross_part_quadric():
    F = parse_form("1 2 0\n1 1 1\n1 0 2")  # x1^2 + x1 x2 + x2^2
    G = cross_part(F, {0}, {1})
    assert G == Form.from_terms(2, [((1, 1), 1)])


def test_cross_part_diagonal_is_zero():
    for d in (2, 3, 4):
        D = diagonal_form(5, d)
        assert cross_part(D, {0, 1}, {2, 3, 4}).is_zero()


def test_cross_part_fully_mixed():
    B = bilinear_form(3)
    G = cross_part(B, {0, 1, 2}, {3, 4, 5})
    assert G == B


def test_cross_part_zero_sections():
    # G(u, 0) = G(0, v) = 0 identically, on random cubics
    rng = random.Random(3)
    for _ in range(10):
        F = random_form(rng, 5, 3)
        u, v = {0, 1}, {2, 3, 4}
        G = cross_part(F, u, v)
        assert restrict_zero(G, v).is_zero()
        assert restrict_zero(G, u).is_zero()


def test_cross_part_overlap_rejected(lens):
    with pytest.raises(ValueError):
        cross_part(lens, {0, 1}, {1, 2})


# ---------------------------------------------------------------- diagonal substitution

def test_substitute_diagonal_examples():
    F = Form.from_terms(2, [((1, 1), 1)])  # v1 v2
    assert substitute_diagonal(F) == Form.from_terms(4, [((1, 1, 1, 1), 1)])
    P = Form.from_terms(1, [((3,), 1)])  # v1^3
    assert substitute_diagonal(P) == Form.from_terms(2, [((3, 3), 1)])
    Q = Form.from_terms(2, [((2, 0), 1), ((0, 2), -1)])
    assert substitute_diagonal(Q) == Form.from_terms(
        4, [((2, 0, 2, 0), 1), ((0, 2, 0, 2), -1)]
    )


def test_substitute_diagonal_bidegree_scaling():
    # G(s u; t v) = s^d t^d G(u; v) on random samples, exact
    rng = random.Random(5)
    for _ in range(10):
        m, d = rng.randint(1, 4), rng.randint(2, 3)
        F = random_form(rng, m, d)
        G = substitute_diagonal(F)
        s, t = rng.randint(-3, 3), rng.randint(-3, 3)
        u = [rng.randint(-4, 4) for _ in range(m)]
        v = [rng.randint(-4, 4) for _ in range(m)]
        su_tv = [s * ui for ui in u] + [t * vi for vi in v]
        assert evaluate(G, su_tv) == s**d * t**d * evaluate(G, u + v)


# ---------------------------------------------------------------- multilinear table

def test_table_entries_derived_by_expansion():
    # oracle: expand the product of d generic linear slots and match; for the
    # two pinned cases the expansion collapses to a hand count of orderings
    T = symmetric_multilinear(Form.from_terms(2, [((1, 1), 1)]))  # v1 v2, d = 2
    # monomial x1 x2 y1 y2 arises from 2 orderings on each side: 4 ordered
    # (j, k) pairs sharing the coefficient 1, so (2!)^2 G = 4 * (1/4) = 1
    assert T.entry((0, 1), (0, 1)) == 1
    assert T.entry((0, 1), (1, 0)) == 1  # symmetric under reordering
    T2 = symmetric_multilinear(Form.from_terms(1, [((2,), 1)]))  # v1^2
    # single ordering (1,1) on each side: (2!)^2 G = 4
    assert T2.entry((0, 0), (0, 0)) == 4


def test_table_vanishing_rule():
    rng = random.Random(9)
    for _ in range(6):
        F = random_form(rng, 3, 3)
        if F.is_zero():
            continue
        T = symmetric_multilinear(F)
        for j, k in T.entries:
            assert sorted(j) == sorted(k)  # j a permutation of k


def test_table_round_trip_exact():
    rng = random.Random(13)
    for _ in range(10):
        m, d = rng.randint(1, 4), rng.randint(2, 4)
        F = random_form(rng, m, d)
        if F.is_zero():
            continue
        T = symmetric_multilinear(F)
        assert T.reconstruct_diagonal() == substitute_diagonal(F)


def test_symmetric_multilinear_rejects_inhomogeneous():
    with pytest.raises(ValueError):
        symmetric_multilinear(parse_form("1 2\n1 1"))


# ---------------------------------------------------------------- gamma evaluation

def unit(i, m):
    e = [0] * m
    e[i] = 1
    return e


def test_gamma_unit_vectors():
    T = symmetric_multilinear(Form.from_terms(2, [((1, 1), 1)]))
    xs = [unit(0, 2), unit(1, 2)]
    ys = [unit(0, 2), unit(1, 2)]
    assert gamma_eval(T, xs, ys) == 1
    # swapping the two x slots keeps the value (symmetry)
    assert gamma_eval(T, [xs[1], xs[0]], ys) == 1


def test_gamma_zero_slot():
    T = symmetric_multilinear(Form.from_terms(2, [((2, 0), 1), ((1, 1), 3)]))
    assert gamma_eval(T, [[0, 0], [1, 2]], [[1, 1], [1, 1]]) == 0


def test_gamma_multilinearity():
    rng = random.Random(17)
    F = random_form(rng, 3, 3)
    T = symmetric_multilinear(F)
    xs = [[rng.randint(-3, 3) for _ in range(3)] for _ in range(3)]
    ys = [[rng.randint(-3, 3) for _ in range(3)] for _ in range(3)]
    a = [rng.randint(-3, 3) for _ in range(3)]
    b = [rng.randint(-3, 3) for _ in range(3)]
    for slot in range(3):
        combined = list(xs)
        combined[slot] = [ai + bi for ai, bi in zip(a, b)]
        xa, xb = list(xs), list(xs)
        xa[slot], xb[slot] = a, b
        assert gamma_eval(T, combined, ys) == gamma_eval(T, xa, ys) + gamma_eval(T, xb, ys)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10**6), st.data())
def test_gamma_symmetric_point_matches_scaled_form(seed, data):
    # specializing all slots gives (d!)^2 F(x1 y1, ..., xm ym); this is the
    # symmetric-point differencing identity, checked in exact integers
    rng = random.Random(seed)
    m, d = rng.randint(1, 3), rng.randint(2, 4)
    F = random_form(rng, m, d)
    if F.is_zero():
        return
    T = symmetric_multilinear(F)
    x = [rng.randint(-4, 4) for _ in range(m)]
    y = [rng.randint(-4, 4) for _ in range(m)]
    lhs = gamma_eval(T, [x] * d, [y] * d)
    rhs = factorial(d) ** 2 * evaluate(F, [xi * yi for xi, yi in zip(x, y)])
    assert lhs == rhs


def test_gamma_bad_shapes():
    T = symmetric_multilinear(Form.from_terms(2, [((1, 1), 1)]))
    with pytest.raises(ValueError):
        gamma_eval(T, [[1, 0]], [[1, 0], [0, 1]])
    with pytest.raises(ValueError):
        gamma_eval(T, [[1], [0, 1]], [[1, 0], [0, 1]])
