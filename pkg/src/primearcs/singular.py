"""Rank of the singular locus and the structural machinery built on it.

The singular locus of a form F is the vanishing set of its gradient; its
codimension ("rank") drives every threshold in the circle-method analysis.
Exact algebraic dimension is out of scope; instead the dimension is read off
point counts over several prime fields (a Lang-Weil slope), which is exact
for the desk corpus where counts are genuinely polynomial in p, and flagged
low-confidence otherwise.  Degree-2 forms also get an exact Hessian rank as
a cross-check.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .forms import Form, cross_part, gradient, restrict_zero
from .util import BudgetExceeded, check_budget, run_sharded

DEFAULT_PRIMES = (101, 211, 401)
SLOPE_RESIDUAL_GATE = 0.25
_BLOCK = 1 << 21  # target vectorized block size for field enumeration


@dataclass(frozen=True)
class RankEstimate:
    """Estimated codimension of a gradient-type vanishing locus."""

    codim: int
    method: str  # hessian-exact | fp-slope | zero-form
    primes_used: tuple[int, ...]
    residual: float
    counts: tuple[int, ...] = ()
    n_vars: int = 0

    @property
    def confident(self) -> bool:
        return self.residual < SLOPE_RESIDUAL_GATE


@dataclass(frozen=True)
class DichotomyWitness:
    w: tuple[int, ...]
    u: tuple[int, ...]
    v: tuple[int, ...]
    codim_cross: int
    estimate: RankEstimate


@dataclass(frozen=True)
class DichotomyVerdict:
    case: str  # "I" or "II"
    witness: Optional[DichotomyWitness]
    c0: int
    partitions_scanned: int
    policy: str


# ------------------------------------------------------------------ thresholds

def c0_threshold(d: int, theta0: Fraction | float) -> int:
    """Least integer strictly above 8 d (d-1) 2^d / theta0, exact."""
    t = Fraction(theta0).limit_denominator(10**9) if isinstance(theta0, float) else Fraction(theta0)
    if not 0 < t < 1:
        raise ValueError("theta0 must lie in (0, 1)")
    bound = Fraction(8 * d * (d - 1) * 2**d) / t
    return math.floor(bound) + 1


def codim_threshold(d: int) -> int:
    """The headline rank requirement 2^8 3^4 5^2 d^3 (2d-1)^2 4^d."""
    if d < 2:
        raise ValueError("degree must be at least 2")
    return 2**8 * 3**4 * 5**2 * d**3 * (2 * d - 1) ** 2 * 4**d


# ------------------------------------------------------------------ exact rank, degree 2

def hessian_codim(F: Form) -> RankEstimate:
    """Exact rank of the symmetric coefficient matrix of a quadratic form.

    For degree 2 the gradient is linear, so the codimension of its zero set
    is exactly the matrix rank over the rationals.
    """
    if F.is_zero():
        return RankEstimate(0, "hessian-exact", (), 0.0, (), F.n_vars)
    if not (F.is_homogeneous() and F.degree == 2):
        raise ValueError("hessian rank needs a homogeneous quadratic")
    n = F.n_vars
    M = [[Fraction(0)] * n for _ in range(n)]
    for expo, coef in F.terms.items():
        idx = [i for i, e in enumerate(expo) if e]
        if len(idx) == 1:
            i = idx[0]
            M[i][i] += 2 * coef
        else:
            i, j = idx
            M[i][j] += coef
            M[j][i] += coef
    rank = _rank_fraction(M)
    return RankEstimate(rank, "hessian-exact", (), 0.0, (), n)


def _rank_fraction(M: list[list[Fraction]]) -> int:
    mat = [row[:] for row in M]
    rows, cols = len(mat), len(mat[0]) if mat else 0
    rank, r = 0, 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [v * inv for v in mat[r]]
        for i in range(rows):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        r += 1
        rank += 1
        if r == rows:
            break
    return rank


# ------------------------------------------------------------------ counting over F_p

def _rank_mod_p(rows: list[list[int]], p: int) -> tuple[int, bool]:
    """(rank, consistent) of an augmented system [A | b] mod p; the last
    column is the right-hand side."""
    mat = [[v % p for v in row] for row in rows]
    if not mat:
        return 0, True
    cols = len(mat[0])
    r = 0
    for c in range(cols - 1):
        piv = next((i for i in range(r, len(mat)) if mat[i][c]), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = pow(mat[r][c], -1, p)
        mat[r] = [(v * inv) % p for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c]:
                f = mat[i][c]
                mat[i] = [(a - f * b) % p for a, b in zip(mat[i], mat[r])]
        r += 1
        if r == len(mat):
            break
    consistent = all(any(row[:-1]) or not row[-1] for row in mat)
    return r, consistent


def _linear_system_count(forms: Sequence[Form], n_vars: int, p: int) -> int:
    """Zeros mod p of a system whose members all have degree <= 1."""
    rows = []
    for f in forms:
        row = [0] * n_vars
        const = 0
        for expo, coef in f.terms.items():
            deg = sum(expo)
            if deg == 0:
                const += coef
            else:
                row[expo.index(1)] += coef
        rows.append(row + [(-const) % p])
    rank, consistent = _rank_mod_p(rows, p)
    if not consistent:
        return 0
    return p ** (n_vars - rank)


def _eval_forms_zero_mask(forms, coords, p):
    """Joint zero mask of the system on mixed scalar/array coordinates,
    short-circuiting once the mask empties.  Values stay below p^2 between
    reductions, far from int64 overflow."""
    size = 1
    for c in coords:
        if isinstance(c, np.ndarray):
            size = c.size
            break
    cache: dict[tuple[int, int], object] = {}

    def power(i, e):
        key = (i, e)
        if key not in cache:
            if e == 1:
                cache[key] = coords[i]
            else:
                half = power(i, e // 2)
                out = (half * half) % p
                if e % 2:
                    out = (out * coords[i]) % p
                cache[key] = out
        return cache[key]

    mask = None
    for f in forms:
        acc = 0
        for expo, coef in f.terms.items():
            term = coef % p
            for i, e in enumerate(expo):
                if e:
                    term = (term * power(i, e)) % p
            acc = (acc + term) % p
        zero = (acc % p) == 0
        if isinstance(zero, (bool, np.bool_)):
            zero = np.full(size, bool(zero))
        mask = zero if mask is None else (mask & zero)
        if not mask.any():
            return mask
    return mask


def _count_over_box(forms, n_vars: int, p: int, fixed: dict[int, int], free: list[int], threads: int) -> int:
    """Count zeros with some coordinates pinned and the rest ranging over F_p."""
    tail = 0
    while tail < len(free) and p ** (tail + 1) <= _BLOCK:
        tail += 1
    head_vars, tail_vars = free[: len(free) - tail], free[len(free) - tail :]
    if tail_vars:
        tail_grids = np.indices((p,) * len(tail_vars), dtype=np.int64).reshape(len(tail_vars), -1)
    else:
        tail_grids = np.empty((0, 1), dtype=np.int64)

    def count_for_head(head_tuple):
        coords: list = [0] * n_vars  # inactive coordinates never occur in the forms
        for var, val in fixed.items():
            coords[var] = val
        for var, val in zip(head_vars, head_tuple):
            coords[var] = val
        for j, var in enumerate(tail_vars):
            coords[var] = tail_grids[j]
        return int(_eval_forms_zero_mask(forms, coords, p).sum())

    heads = list(itertools.product(range(p), repeat=len(head_vars)))
    return sum(run_sharded(count_for_head, heads, threads))


def fp_system_count(
    forms: Sequence[Form],
    n_vars: int,
    p: int,
    budget: int = 10**9,
    threads: int = 1,
) -> int:
    """Exact number of common zeros in F_p^{n_vars} of a polynomial system.

    Linear systems are solved by rank.  Otherwise only the variables that
    actually occur are enumerated (dummies contribute an exact factor of p
    each), and for homogeneous systems the count is assembled from scaling
    orbits: representatives have leading active coordinate 1, which saves a
    factor of p.  The outer coordinate loop is sharded across threads with a
    deterministic merge.
    """
    forms = [f for f in forms if not f.is_zero()]
    if not forms:
        return p**n_vars
    if all(f.degree <= 1 for f in forms):
        return _linear_system_count(forms, n_vars, p)

    active = sorted(set().union(*(f.active_vars() for f in forms)))
    a = len(active)
    homogeneous = all(f.is_homogeneous() for f in forms)
    work = (p**a - 1) // (p - 1) if homogeneous else p**a
    check_budget(work, f"F_p point count (p={p}, active vars={a})", budget)

    if homogeneous:
        # orbit representatives: first nonzero active coordinate equals 1
        reps = 0
        for lead in range(a):
            fixed = {active[i]: 0 for i in range(lead)}
            fixed[active[lead]] = 1
            reps += _count_over_box(forms, n_vars, p, fixed, active[lead + 1 :], threads)
        total_active = 1 + (p - 1) * reps
    else:
        total_active = _count_over_box(forms, n_vars, p, {}, active, threads)
    return p ** (n_vars - a) * total_active


def fp_singular_count(F: Form, p: int, budget: int = 10**9, threads: int = 1) -> int:
    """#{x in F_p^n : grad F(x) = 0 mod p}, exact."""
    return fp_system_count(gradient(F), F.n_vars, p, budget=budget, threads=threads)


# ------------------------------------------------------------------ slope estimates

def estimate_codim_system(
    forms: Sequence[Form],
    n_vars: int,
    primes: Sequence[int] = DEFAULT_PRIMES,
    threads: int = 1,
) -> RankEstimate:
    """Codimension of the common zero locus from point-count slopes.

    dim is the least-squares slope of log(count) against log(p), rounded;
    a rounding residual >= 0.25 flags the estimate as low-confidence.
    """
    if len(primes) < 3:
        raise ValueError("need at least three primes for a slope fit")
    live = [f for f in forms if not f.is_zero()]
    if not live:
        return RankEstimate(0, "zero-form", tuple(primes), 0.0, (), n_vars)
    counts = [fp_system_count(live, n_vars, p, threads=threads) for p in primes]
    if all(c == 0 for c in counts):
        return RankEstimate(n_vars, "fp-slope", tuple(primes), 0.0, tuple(counts), n_vars)
    if any(c == 0 for c in counts):
        # mixed emptiness cannot be fit; report empty with max residual flag
        return RankEstimate(n_vars, "fp-slope", tuple(primes), 1.0, tuple(counts), n_vars)
    xs = [math.log(p) for p in primes]
    ys = [math.log(c) for c in counts]
    xbar = sum(xs) / len(xs)
    ybar = sum(ys) / len(ys)
    slope = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys)) / sum(
        (x - xbar) ** 2 for x in xs
    )
    dim = min(max(round(slope), 0), n_vars)
    residual = abs(slope - round(slope))
    return RankEstimate(n_vars - dim, "fp-slope", tuple(primes), residual, tuple(counts), n_vars)


def estimate_codim(
    F: Form,
    primes: Sequence[int] = DEFAULT_PRIMES,
    threads: int = 1,
) -> RankEstimate:
    """Codimension of the singular locus of F via the slope method."""
    if F.is_zero():
        return RankEstimate(0, "zero-form", tuple(primes), 0.0, (), F.n_vars)
    return estimate_codim_system(gradient(F), F.n_vars, primes, threads=threads)


def best_codim(F: Form, primes: Sequence[int] = DEFAULT_PRIMES) -> RankEstimate:
    """Hessian-exact rank for quadratics, slope estimate otherwise."""
    if F.is_zero():
        return RankEstimate(0, "zero-form", (), 0.0, (), F.n_vars)
    if F.is_homogeneous() and F.degree == 2:
        return hessian_codim(F)
    return estimate_codim(F, primes)


# ------------------------------------------------------------------ structural reports

@dataclass(frozen=True)
class RestrictionReport:
    s: int
    codim_full: int
    codim_restricted: int
    lower_ok: bool
    upper_ok: bool
    full: RankEstimate
    restricted: RankEstimate

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok


def check_restriction_bounds(
    F: Form, s: int, primes: Sequence[int] = DEFAULT_PRIMES
) -> RestrictionReport:
    """Zeroing s variables can lower the rank by at most 2s and never raise it;
    violations are flagged as estimator noise, not dropped."""
    full = best_codim(F, primes)
    restricted = best_codim(restrict_zero(F, range(s)), primes)
    return RestrictionReport(
        s=s,
        codim_full=full.codim,
        codim_restricted=restricted.codim,
        lower_ok=restricted.codim >= full.codim - 2 * s,
        upper_ok=restricted.codim <= full.codim,
        full=full,
        restricted=restricted,
    )


@dataclass(frozen=True)
class SubadditivityReport:
    codim_full: int
    codim_u: int
    codim_cross: int
    codim_v: int
    ok: bool


def check_subadditivity(
    F: Form,
    u: Iterable[int],
    v: Iterable[int],
    primes: Sequence[int] = DEFAULT_PRIMES,
) -> SubadditivityReport:
    """codim V*_F <= codim V*_{F_u} + codim V*_{G} + codim V*_{F_v} with
    estimated values, for a two-block partition (u, v) of all variables."""
    us, vs = tuple(u), tuple(v)
    full = best_codim(F, primes)
    cu = best_codim(restrict_zero(F, vs), primes)
    cv = best_codim(restrict_zero(F, us), primes)
    cg = best_codim(cross_part(F, us, vs), primes)
    return SubadditivityReport(
        codim_full=full.codim,
        codim_u=cu.codim,
        codim_cross=cg.codim,
        codim_v=cv.codim,
        ok=full.codim <= cu.codim + cg.codim + cv.codim,
    )


def _two_block_splits(z: Sequence[int]):
    """Unordered splits of z into nonempty (u, v); u keeps the least element."""
    rest = list(z[1:])
    for r in range(len(rest) + 1):
        for extra in itertools.combinations(rest, r):
            u = (z[0],) + extra
            v = tuple(i for i in rest if i not in extra)
            if v:
                yield u, v


def dichotomy_classify(
    F: Form,
    c0: int,
    policy: str = "exhaustive",
    primes: Sequence[int] = DEFAULT_PRIMES,
    seed: int = 0,
    samples: int = 200,
) -> DichotomyVerdict:
    """Scan partitions x = (z, w), z = (u, v) for a cross part of rank > c0.

    Case I returns the first witness found; case II is always relative to the
    scanned family (exhaustive up to u<->v symmetry, or a seeded sample).
    """
    n = F.n_vars
    indices = tuple(range(n))
    scanned = 0

    def classify_one(w, u, v):
        G = cross_part(F, u, v)
        if G.is_zero():
            return None
        est = best_codim(G, primes)
        if est.codim > c0:
            return DichotomyWitness(w=w, u=u, v=v, codim_cross=est.codim, estimate=est)
        return None

    if policy == "exhaustive":
        if n > 12:
            raise ValueError("exhaustive scan capped at 12 variables")
        for zsize in range(2, n + 1):
            for z in itertools.combinations(indices, zsize):
                w = tuple(i for i in indices if i not in z)
                for u, v in _two_block_splits(z):
                    scanned += 1
                    hit = classify_one(w, u, v)
                    if hit:
                        return DichotomyVerdict("I", hit, c0, scanned, policy)
    elif policy == "randomized":
        rng = random.Random(seed)
        for _ in range(samples):
            labels = [rng.randrange(3) for _ in indices]  # 0 -> u, 1 -> v, 2 -> w
            u = tuple(i for i in indices if labels[i] == 0)
            v = tuple(i for i in indices if labels[i] == 1)
            w = tuple(i for i in indices if labels[i] == 2)
            if not u or not v:
                continue
            scanned += 1
            hit = classify_one(w, u, v)
            if hit:
                return DichotomyVerdict("I", hit, c0, scanned, policy)
    else:
        raise ValueError(f"unknown policy {policy!r}")
    return DichotomyVerdict("II", None, c0, scanned, policy)


@dataclass(frozen=True)
class ConcentrationResult:
    block_index: int
    codims: tuple[int, ...]
    bound: Fraction
    satisfied: bool


def rank_concentration(
    F: Form,
    blocks: Sequence[Sequence[int]],
    c0: int,
    primes: Sequence[int] = DEFAULT_PRIMES,
) -> ConcentrationResult:
    """Pigeonhole for case-II forms: some block keeps rank at least
    (codim V*_F - (k-1) c0) / k.  If no block does, the argmax block is
    returned with a violation flag (estimator error or a case-I form)."""
    k = len(blocks)
    full = best_codim(F, primes)
    codims = []
    for i in range(k):
        others = [j for b in (blocks[:i] + blocks[i + 1 :]) for j in b]
        codims.append(best_codim(restrict_zero(F, others), primes).codim)
    bound = Fraction(full.codim - (k - 1) * c0, k)
    for j, c in enumerate(codims):
        if c >= bound:
            return ConcentrationResult(j, tuple(codims), bound, True)
    worst = max(range(k), key=lambda j: codims[j])
    return ConcentrationResult(worst, tuple(codims), bound, False)
