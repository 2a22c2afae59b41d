"""Exponential sums: direct evaluation, Vaughan decomposition, complete sums,
and the orthogonality mean.

Oracles: independent python loops over the same supports, never the
vectorized paths under test.
"""

import cmath
import itertools
import math
from fractions import Fraction

import pytest

from conftest import lens_quadric, square_difference
from primearcs.analytic import bump_weight
from primearcs.arith import build_tables, characters_mod
from primearcs.expsums import (
    CompleteSumSpec,
    WindowedBox,
    complete_sum,
    complete_sum_bound_report,
    exact_mean,
    s_alpha,
    s_vaughan,
    s_vaughan_terms,
    unit_residue_histogram,
)
from primearcs.forms import Form, evaluate


@pytest.fixture(scope="module")
def tables():
    return build_tables(2000)


def window_points(box, tables, mode="lambda"):
    coords = [box.coord_points(tables, j, mode) for j in range(box.n)]
    for combo in itertools.product(*coords):
        xs = tuple(x for x, _ in combo)
        w = 1.0
        for _, wj in combo:
            w *= wj
        yield xs, w


def brute_s_alpha(F, box, tables, alpha, mode="lambda"):
    total = 0j
    for xs, w in window_points(box, tables, mode):
        total += w * cmath.exp(2j * cmath.pi * alpha * evaluate(F, xs))
    return total


# ---------------------------------------------------------------- windows

def test_window_must_fit():
    w = bump_weight(0.2)
    with pytest.raises(ValueError, match="inside"):
        WindowedBox(100, (0.1, 0.5), w)


def test_window_low_edge_guard():
    box = WindowedBox(100, (0.5, 0.5), bump_weight(0.2))
    assert box.low_edge == 30.0
    with pytest.raises(ValueError, match="lower edge"):
        box.require_low_edge(31, "U*V")


# ---------------------------------------------------------------- s_alpha

def test_s_alpha_at_zero_is_weighted_mass(tables):
    F = square_difference()
    box = WindowedBox(100, (0.5, 0.5), bump_weight(0.2))
    direct = sum(w for _, w in window_points(box, tables))
    val = s_alpha(F, box, tables, Fraction(0))
    assert val.imag == 0
    assert val.real == pytest.approx(direct, rel=1e-12)
    assert val.real > 0


def test_s_alpha_at_one_equals_zero_value(tables):
    F = square_difference()
    box = WindowedBox(80, (0.5, 0.5), bump_weight(0.2))
    assert s_alpha(F, box, tables, Fraction(1)) == s_alpha(F, box, tables, Fraction(0))


def test_s_alpha_conjugate_symmetry(tables):
    F = square_difference()
    box = WindowedBox(90, (0.5, 0.5), bump_weight(0.2))
    a, b = s_alpha(F, box, tables, 0.3), s_alpha(F, box, tables, 0.7)
    assert b == pytest.approx(a.conjugate(), abs=1e-10)


def test_s_alpha_matches_brute_float(tables):
    F = lens_quadric()
    box = WindowedBox(60, (0.5, 0.5, 0.5), bump_weight(0.2))
    for alpha in (0.137, 0.5, 0.9999):
        assert s_alpha(F, box, tables, alpha) == pytest.approx(
            brute_s_alpha(F, box, tables, alpha), rel=1e-9
        )


def test_s_alpha_rational_matches_float(tables):
    F = square_difference()
    box = WindowedBox(70, (0.5, 0.5), bump_weight(0.2))
    assert s_alpha(F, box, tables, Fraction(3, 7)) == pytest.approx(
        s_alpha(F, box, tables, 3 / 7), rel=1e-9
    )


def test_s_alpha_triangle_inequality(tables):
    F = square_difference()
    box = WindowedBox(90, (0.5, 0.5), bump_weight(0.2))
    peak = s_alpha(F, box, tables, Fraction(0)).real
    for k in range(1, 20):
        assert abs(s_alpha(F, box, tables, k / 20)) <= peak + 1e-12


def test_s_alpha_thread_count_bit_reproducible(tables):
    F = lens_quadric()
    box = WindowedBox(60, (0.5, 0.5, 0.5), bump_weight(0.2))
    vals = {s_alpha(F, box, tables, 0.137, threads=t) for t in (1, 2, 5)}
    assert len(vals) == 1


def test_s_alpha_rejects_nan(tables):
    box = WindowedBox(60, (0.5, 0.5), bump_weight(0.2))
    with pytest.raises(ValueError):
        s_alpha(square_difference(), box, tables, float("nan"))


# ---------------------------------------------------------------- Vaughan decomposition

def test_cauchy_schwarz_squaring_inequality(tables):
    # |S|^4 <= (sum w_u^2)^2 (sum w_v^2)^2 * (differenced phase double sum)
    F = square_difference()
    box = WindowedBox(60, (0.5, 0.5), bump_weight(0.2))
    alpha = 0.31
    us = box.coord_points(tables, 0)
    vs = box.coord_points(tables, 1)
    S = s_alpha(F, box, tables, alpha)
    Wu = sum(w * w for _, w in us)
    Wv = sum(w * w for _, w in vs)
    D = 0.0
    for (y, _), (yp, _) in itertools.product(vs, vs):
        inner = sum(
            cmath.exp(2j * cmath.pi * alpha * (evaluate(F, (x, y)) - evaluate(F, (x, yp))))
            for x, _ in us
        )
        D += abs(inner) ** 2
    assert abs(S) ** 4 <= Wu**2 * Wv**2 * D * (1 + 1e-9)


def test_vaughan_matches_direct_spec_instance(tables):
    F = square_difference()
    box = WindowedBox(60, (0.5, 0.5), bump_weight(0.2))
    direct = s_alpha(F, box, tables, 0.137)
    decomposed = s_vaughan(F, box, tables, 0.137, U=3, V=3)
    assert abs(decomposed - direct) / abs(direct) < 1e-6


def test_vaughan_phase_free_case(tables):
    F = square_difference()
    box = WindowedBox(60, (0.5, 0.5), bump_weight(0.2))
    mass = s_alpha(F, box, tables, Fraction(0)).real
    assert s_vaughan(F, box, tables, Fraction(0), 4, 4).real == pytest.approx(mass, rel=1e-9)


def test_vaughan_single_variable_smoke(tables):
    F = Form.from_terms(1, [((2,), 1)])
    box = WindowedBox(80, (0.5,), bump_weight(0.2))
    terms = s_vaughan_terms(F, box, tables, 0.2, U=3, V=3)
    assert len(terms) == 3
    total = sum(terms.values())
    direct = s_alpha(F, box, tables, 0.2)
    assert abs(total - direct) / abs(direct) < 1e-9


def test_vaughan_seeded_instances(tables):
    import random

    rng = random.Random(2024)
    for _ in range(6):
        n = rng.randint(1, 3)
        raw = []
        for _ in range(3):
            e = [0] * n
            for _ in range(2):
                e[rng.randrange(n)] += 1
            raw.append((tuple(e), rng.randint(-3, 3)))
        F = Form.from_terms(n, raw)
        if F.is_zero():
            continue
        N = rng.choice((60, 80, 100))
        box = WindowedBox(N, (0.5,) * n, bump_weight(0.2))
        alpha = rng.random()
        direct = s_alpha(F, box, tables, alpha)
        dec = s_vaughan(F, box, tables, alpha, U=3, V=3)
        assert abs(dec - direct) <= 1e-6 * max(abs(direct), 1.0)


def test_vaughan_precondition_enforced(tables):
    F = square_difference()
    box = WindowedBox(60, (0.5, 0.5), bump_weight(0.2))  # low edge 18
    with pytest.raises(ValueError, match="lower edge"):
        s_vaughan(F, box, tables, 0.1, U=20, V=2)


# ---------------------------------------------------------------- complete sums

def brute_complete_sum(F, q, a, characters=None):
    units = [x for x in range(1, q + 1) if math.gcd(x, q) == 1] if q > 1 else [0]
    total = 0j
    for h in itertools.product(units, repeat=F.n_vars):
        w = 1 + 0j
        if characters:
            for chi, hj in zip(characters, h):
                if chi is not None:
                    w *= chi(hj).conjugate()
        total += w * cmath.exp(2j * cmath.pi * a * evaluate(F, h) / q)
    return total


def test_complete_sum_examples():
    sums2 = Form.from_terms(2, [((2, 0), 1), ((0, 2), 1)])
    assert complete_sum(sums2, CompleteSumSpec(2, 1)) == pytest.approx(1 + 0j)
    got = complete_sum(sums2, CompleteSumSpec(3, 1))
    expect = 4 * cmath.exp(2j * cmath.pi * 2 / 3)
    assert got == pytest.approx(expect, abs=1e-12)
    assert complete_sum(sums2, CompleteSumSpec(1, 0)) == pytest.approx(1 + 0j)


def test_complete_sum_conjugation():
    F = lens_quadric()
    for q in (5, 7, 12):
        a = 1
        plus = complete_sum(F, CompleteSumSpec(q, a))
        minus = complete_sum(F, CompleteSumSpec(q, q - a))
        assert minus == pytest.approx(plus.conjugate(), abs=1e-10)


def test_complete_sum_matches_brute():
    F = lens_quadric()
    for q, a in ((4, 3), (9, 2), (10, 7)):
        got = complete_sum(F, CompleteSumSpec(q, a))
        assert got == pytest.approx(brute_complete_sum(F, q, a), abs=1e-9)


def test_complete_sum_character_twist_matches_brute():
    F = square_difference()
    for q in (5, 8):
        chars = characters_mod(q)
        spec = CompleteSumSpec(q, 1, (chars[1], chars[-1]))
        got = complete_sum(F, spec)
        expect = brute_complete_sum(F, q, 1, (chars[1], chars[-1]))
        assert got == pytest.approx(expect, abs=1e-9)


def test_complete_sum_rejects_bad_numerator():
    with pytest.raises(ValueError):
        CompleteSumSpec(6, 3)


def test_histogram_total_is_unit_count():
    F = lens_quadric()
    for q in (6, 15):
        counts = unit_residue_histogram(F, q)
        phi = sum(1 for x in range(1, q + 1) if math.gcd(x, q) == 1)
        assert counts.sum() == phi**3


def test_bound_report_lens():
    F = lens_quadric()
    qs = [p for p in range(5, 200) if all(p % d for d in range(2, p))]
    rows = complete_sum_bound_report(F, qs, codim=3)
    assert not any(r["flag"] for r in rows)
    phi_cubed = [(q - 1) ** 3 for q in qs]
    for row, cap in zip(rows, phi_cubed):
        assert row["abs_A"] <= cap + 1e-9


# ---------------------------------------------------------------- exact mean

def test_exact_mean_diagonal_oracle(tables):
    # for x1^2 - x2^2 the windowed zeros are exactly the diagonal pairs
    F = square_difference()
    box = WindowedBox(40, (0.5, 0.5), bump_weight(0.2))
    oracle = 0.0
    for x, w in box.coord_points(tables, 0):
        oracle += w * box.varpi(1, x) * float(tables.lam[x])
    got = exact_mean(F, box, tables)
    assert got.value == pytest.approx(oracle, rel=1e-9)
    assert got.imag_residual < 1e-9
    assert got.value > 0


def test_exact_mean_no_zeros(tables):
    F = Form.from_terms(2, [((2, 0), 1), ((0, 2), 1)])  # positive definite
    box = WindowedBox(40, (0.5, 0.5), bump_weight(0.2))
    assert exact_mean(F, box, tables).value == pytest.approx(0.0, abs=1e-9)


def test_exact_mean_zero_form_total_mass(tables):
    F = Form.zero(2)
    box = WindowedBox(40, (0.5, 0.5), bump_weight(0.2))
    mass = sum(w for _, w in window_points(box, tables))
    assert exact_mean(F, box, tables).value == pytest.approx(mass, rel=1e-12)
