"""p-adic densities, the singular series, and Hensel witnesses.

The normalization sigma_p(k) = M*(p^k) p^k / phi(p^k)^n is chosen so that
the partial sums of the q-series over q = 1, p, ..., p^k reproduce sigma_p(k)
exactly; that identity, checked in exact rationals, is the correctness anchor
tying the series to the unit-solution counts.  The per-q term B(q) itself is
computed exactly through Ramanujan sums, and the plain complete-sum route
stays available as the independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .forms import Form, gradient
from .expsums import unit_residue_histogram
from .util import BudgetExceeded, check_budget, divisors, euler_phi, mobius


@dataclass(frozen=True)
class LocalDensity:
    p: int
    k: int
    m_star: int  # unit-coordinate solutions mod p^k
    sigma: Fraction  # m_star * p^k / phi(p^k)^n

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("density cannot be negative")


def unit_solutions(F: Form, p: int, k: int, budget: int = 10**9) -> int:
    """#{h in (units mod p^k)^n : F(h) = 0 mod p^k}, exact."""
    q = p**k
    check_budget(p ** (k * F.n_vars), f"unit solutions mod {p}^{k}", budget)
    return int(unit_residue_histogram(F, q, budget)[0])


def sigma_p(F: Form, p: int, k: int, budget: int = 10**9) -> LocalDensity:
    """Local density at p, depth k."""
    q = p**k
    m_star = unit_solutions(F, p, k, budget)
    density = Fraction(m_star * q, euler_phi(q) ** F.n_vars)
    return LocalDensity(p, k, m_star, density)


def ramanujan_sum(q: int, r: int) -> int:
    """sum over units a mod q of e(a r / q), an integer."""
    g = math.gcd(r % q, q) if q > 1 else 1
    return sum(d * mobius(q // d) for d in divisors(q) if g % d == 0)


def series_term(F: Form, q: int, budget: int = 10**9) -> Fraction:
    """B(q) = phi(q)^{-n} sum over units a of the complete sum A(q, a).

    Summing the unit-phase over a first turns each residue class of F into a
    Ramanujan sum, so the term is an exact rational; B is multiplicative in q.
    """
    counts = unit_residue_histogram(F, q, budget)
    total = sum(int(c) * ramanujan_sum(q, r) for r, c in enumerate(counts) if c)
    return Fraction(total, euler_phi(q) ** F.n_vars)


@dataclass
class SeriesResult:
    Q: int
    value: float
    terms: list  # (q, B(q) as float)
    partials: list  # (q, partial sum through q)
    exact_partial: Fraction
    tail_fit: Optional[float]  # fitted decay exponent of |B(q)|


def singular_series(F: Form, Q: int = 200, budget: int = 10**9) -> SeriesResult:
    """Partial sums of the q-series of normalized complete sums up to Q,
    with a tail-decay diagnostic fitted on the nonzero terms."""
    terms = []
    partials = []
    acc = Fraction(0)
    for q in range(1, Q + 1):
        b = series_term(F, q, budget)
        acc += b
        terms.append((q, float(b)))
        partials.append((q, float(acc)))
    pts = [(math.log(q), math.log(abs(b))) for q, b in terms if q > 1 and b != 0.0]
    tail_fit = None
    if len(pts) >= 3:
        xs, ys = zip(*pts)
        xbar, ybar = sum(xs) / len(xs), sum(ys) / len(ys)
        tail_fit = sum((x - xbar) * (y - ybar) for x, y in pts) / sum(
            (x - xbar) ** 2 for x in xs
        )
    return SeriesResult(Q, float(acc), terms, partials, acc, tail_fit)


def sigma_p_stabilized(
    F: Form, p: int, k_max: int = 4, work_budget: int = 2 * 10**7
) -> tuple[LocalDensity, bool]:
    """sigma_p at the smallest depth where consecutive values agree exactly.

    The flag reports whether stabilization was actually verified; escalation
    stops once the next depth would cost more than work_budget unit tuples,
    so large primes come back at depth 1 unverified rather than slowly.
    """
    prev = sigma_p(F, p, 1)
    if prev.m_star == 0:
        return prev, True
    for k in range(2, k_max + 1):
        if euler_phi(p**k) ** F.n_vars > work_budget:
            return prev, False
        cur = sigma_p(F, p, k)
        if cur.sigma == prev.sigma:
            return prev, True
        prev = cur
    return prev, False


def euler_product(
    F: Form, P: int = 50, k_max: int = 4, work_budget: int = 2 * 10**7
) -> tuple[float, list]:
    """prod over primes p <= P of sigma_p at stabilized depth, with the
    per-prime factor table."""
    from .util import primes_up_to

    rows = []
    prod = Fraction(1)
    for p in primes_up_to(P):
        dens, stable = sigma_p_stabilized(F, p, k_max, work_budget)
        rows.append({"p": p, "k": dens.k, "sigma": float(dens.sigma), "stable": stable})
        prod *= dens.sigma
        if prod == 0:
            break
    return float(prod), rows


# ------------------------------------------------------------------ Hensel witnesses

@dataclass(frozen=True)
class HenselWitness:
    p: int
    level: int
    h: tuple[int, ...]
    f_valuation: int  # capped at 2*level + 1 (infinity when F(h) = 0)
    grad_valuation: int

    @property
    def liftable(self) -> bool:
        return True


@dataclass(frozen=True)
class HenselObstruction:
    p: int
    levels_searched: int
    unit_zero_mod_p: bool  # does F even vanish at some unit tuple mod p?
    exhaustive: bool  # False when the budget cut the search short


def _valuations(arr: np.ndarray, p: int, cap: int) -> np.ndarray:
    v = np.zeros(arr.shape, dtype=np.int64)
    cur = arr.copy()
    for _ in range(cap):
        mask = (cur != 0) & (cur % p == 0)
        cur[mask] //= p
        v += mask
    v[arr == 0] = cap
    return v


def hensel_unit_witness(F: Form, p: int, max_level: int = 3, budget: int = 10**9):
    """Search for a unit tuple certifying a nonsingular zero in Z_p^x.

    Level 1 is the classical test: F(h) = 0 mod p with grad F(h) nonzero
    mod p.  When every unit zero mod p is singular, the search escalates
    (p <= 7 only) to representatives mod p^k and applies the Newton
    criterion v_p(F(h)) > 2 v_p(grad F(h)), which certifies a lift even
    through a singular reduction.  Failure returns an obstruction report
    scoped to the levels actually searched.
    """
    from .expsums import _form_mod_on_arrays, _unit_tuples_blocks

    n = F.n_vars
    grads = gradient(F)
    levels = max_level if p <= 7 else 1
    unit_zero = False
    searched = 0
    for k in range(1, levels + 1):
        q = p**k
        try:
            check_budget(euler_phi(q) ** n, f"Hensel search mod {p}^{k}", budget)
        except BudgetExceeded:
            return HenselObstruction(p, searched, unit_zero, exhaustive=False)
        f_cap = 2 * k + 1
        for coords in _unit_tuples_blocks(q, n):
            f_val = _valuations(_form_mod_on_arrays(F, coords, p**f_cap), p, f_cap)
            if k == 1:
                zero_mod_p = f_val >= 1
                if not zero_mod_p.any():
                    continue
                unit_zero = True
                singular = np.ones(len(f_val), dtype=bool)
                for g in grads:
                    singular &= _form_mod_on_arrays(g, coords, p) == 0
                hits = zero_mod_p & ~singular
            else:
                g_val = np.full(len(f_val), k, dtype=np.int64)
                for g in grads:
                    g_val = np.minimum(
                        g_val, _valuations(_form_mod_on_arrays(g, coords, q), p, k)
                    )
                hits = (f_val > 0) & (g_val < k) & (f_val > 2 * g_val)
            if hits.any():
                idx = int(np.argmax(hits))
                h = tuple(int(c[idx]) for c in coords)
                gv = 0 if k == 1 else int(g_val[idx])
                return HenselWitness(p, k, h, int(f_val[idx]), gv)
        searched = k
    return HenselObstruction(p, searched, unit_zero, exhaustive=True)
