"""The weighted exponential sum, its Vaughan decomposition, and complete sums.

Two phase paths, chosen by the type of alpha: for exact rationals a/q the
phase F(x) mod q lands in a precomputed root-of-unity table, so major-arc
comparisons carry no rounding at all; for float alpha the reduction of
alpha * F(x) mod 1 runs through the exact integer ratio of the float, which
keeps the reduced phase correct to one ulp however large F gets.

Enumeration always walks the prime-power support of the window, sharded by
the first coordinate with a fixed merge order, so results are reproducible
bit for bit at any thread count.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .analytic import SmoothWeight
from .arith import DirichletCharacter, SieveTables, nu2, nu3
from .forms import Form, evaluate, evaluate_mod
from .util import check_budget, euler_phi, run_sharded

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class WindowedBox:
    """Scaled window: coordinate j is weighted by w(x_j / N - x0_j).

    The support must sit strictly inside (0, N)^n; contexts with stronger
    needs (Vaughan cutoffs, major-arc moduli) call the require_* helpers,
    which name the violated inequality instead of failing silently.
    """

    N: int
    x0: tuple[float, ...]
    weight: SmoothWeight

    def __post_init__(self):
        d = self.weight.delta
        for j, c in enumerate(self.x0):
            if c - d <= 0 or c + d >= 1:
                raise ValueError(
                    f"coordinate {j + 1}: window [{c - d}, {c + d}] * N must sit inside (0, N)"
                )

    @property
    def n(self) -> int:
        return len(self.x0)

    def support(self, j: int) -> tuple[float, float]:
        d = self.weight.delta
        return ((self.x0[j] - d) * self.N, (self.x0[j] + d) * self.N)

    @property
    def low_edge(self) -> float:
        return min(self.support(j)[0] for j in range(self.n))

    def varpi(self, j: int, x: float) -> float:
        return float(self.weight(x / self.N - self.x0[j]))

    def require_low_edge(self, threshold: float, label: str) -> None:
        if not self.low_edge > threshold:
            raise ValueError(
                f"window lower edge {self.low_edge:.6g} must exceed {label} = {threshold:.6g}"
            )

    def coord_points(
        self, tables: SieveTables, j: int, mode: str = "lambda"
    ) -> list[tuple[int, float]]:
        """Integers in the support of coordinate j paired with their full
        weight varpi * Lambda (mode 'lambda') or varpi * Lambda* ('lambda_star')."""
        lo, hi = self.support(j)
        if hi > tables.limit:
            raise ValueError("sieve tables too small for this window")
        table = tables.lam if mode == "lambda" else tables.lam_star
        out = []
        for x in range(max(2, math.floor(lo) + 1), math.ceil(hi)):
            lam = float(table[x])
            if lam == 0.0:
                continue
            w = self.varpi(j, x)
            if w != 0.0:
                out.append((x, w * lam))
        return out


def _phase_fn(alpha):
    """Return (phase(x_values_int) -> complex) for the two alpha kinds."""
    if isinstance(alpha, (Fraction, int)):
        frac = Fraction(alpha) % 1
        q, a = frac.denominator, frac.numerator
        roots = np.exp(2j * np.pi * np.arange(q) / q)

        def rational_phase(F, xs):
            r = evaluate_mod(F, xs, q)
            return roots[(a * r) % q]

        return rational_phase
    alpha = float(alpha)
    if math.isnan(alpha):
        raise ValueError("alpha must not be NaN")
    num, den = alpha.as_integer_ratio()

    def float_phase(F, xs):
        v = evaluate(F, xs)
        return cmath.exp(2j * cmath.pi * (((num * v) % den) / den))

    return float_phase


def _product_sum(F, coords, phase, threads: int = 1) -> complex:
    """Sum of prod(weights) * phase(x) over the coordinate product set,
    sharded by the first coordinate, merged in coordinate order."""
    if any(not c for c in coords):
        return 0j
    sizes = 1
    for c in coords:
        sizes *= len(c)
    check_budget(sizes, "window enumeration")

    def shard(first):
        x1, w1 = first
        total = 0j
        for rest in itertools.product(*coords[1:]):
            xs = (x1,) + tuple(x for x, _ in rest)
            w = w1
            for _, wj in rest:
                w *= wj
            total += w * phase(F, xs)
        return total

    parts = run_sharded(shard, coords[0], threads)
    return sum(parts, start=0j)


def s_alpha(
    F: Form,
    box: WindowedBox,
    tables: SieveTables,
    alpha,
    weight_mode: str = "lambda",
    threads: int = 1,
) -> complex:
    """S(alpha): the window-weighted von Mangoldt sum with phase e(alpha F)."""
    if F.n_vars != box.n:
        raise ValueError("form and window dimension mismatch")
    coords = [box.coord_points(tables, j, weight_mode) for j in range(box.n)]
    return _product_sum(F, coords, _phase_fn(alpha), threads)


# ------------------------------------------------------------------ Vaughan decomposition

def _component_tables(box, tables, U, V):
    """Per-coordinate weight tables for the three Vaughan components,
    indexed by the window integer x:
      component 0:  sum_{s | x, s <= V} mu(s) log(x/s)
      component 1:  sum_{s | x, s <= UV} nu2(s)
      component 2:  sum_{s | x, s > U, x/s > V} Lambda(s) nu3(x/s)
    On the window (all x > U) the three add up to Lambda(x).
    """
    nu2_cache: dict[int, float] = {}
    nu3_cache: dict[int, int] = {}
    out = []
    for j in range(box.n):
        lo, hi = box.support(j)
        comp: dict[int, tuple[float, float, float]] = {}
        for x in range(max(2, math.floor(lo) + 1), math.ceil(hi)):
            if box.varpi(j, x) == 0.0:
                continue
            a1 = a2 = a3 = 0.0
            for s in tables.divisors(x):
                t = x // s
                if s <= V and tables.mu[s] and t > 1:
                    a1 += int(tables.mu[s]) * math.log(t)
                if s <= U * V:
                    if s not in nu2_cache:
                        nu2_cache[s] = nu2(s, U, V, tables)
                    a2 += nu2_cache[s]
                if s > U and t > V and tables.lam[s]:
                    if t not in nu3_cache:
                        nu3_cache[t] = nu3(t, V, tables)
                    a3 += float(tables.lam[s]) * nu3_cache[t]
            comp[x] = (a1, a2, a3)
        out.append(comp)
    return out


def s_vaughan_terms(
    F: Form,
    box: WindowedBox,
    tables: SieveTables,
    alpha,
    U: float,
    V: float,
    threads: int = 1,
) -> dict[tuple[int, ...], complex]:
    """All 3^n terms of the Vaughan decomposition of S(alpha), keyed by the
    component assignment per coordinate (0, 1, 2 as in the lemma's ordering).

    Empty components are allowed; assignments are evaluated in lexicographic
    order purely for reproducibility.
    """
    box.require_low_edge(U, "the type-I cutoff U")
    components = _component_tables(box, tables, U, V)
    phase = _phase_fn(alpha)
    typed: list[list[list[tuple[int, float]]]] = []
    for j in range(box.n):
        per_type: list[list[tuple[int, float]]] = [[], [], []]
        for x, parts in sorted(components[j].items()):
            w = box.varpi(j, x)
            for k in range(3):
                if parts[k] != 0.0:
                    per_type[k].append((x, w * parts[k]))
        typed.append(per_type)
    out = {}
    for assignment in itertools.product((0, 1, 2), repeat=box.n):
        coords = [typed[j][assignment[j]] for j in range(box.n)]
        out[assignment] = _product_sum(F, coords, phase, threads)
    return out


def s_vaughan(
    F: Form,
    box: WindowedBox,
    tables: SieveTables,
    alpha,
    U: float,
    V: float,
    threads: int = 1,
) -> complex:
    """Vaughan-decomposed S(alpha); equals s_alpha up to float rounding."""
    terms = s_vaughan_terms(F, box, tables, alpha, U, V, threads)
    return sum((terms[k] for k in sorted(terms)), start=0j)


# ------------------------------------------------------------------ complete sums

@dataclass(frozen=True)
class CompleteSumSpec:
    """Parameters of a complete unit-residue sum: modulus, numerator, and an
    optional character per coordinate (None means no twist there).  Assigned
    characters enter conjugated, matching the major-arc expansion."""

    q: int
    a: int
    characters: Optional[tuple[Optional[DirichletCharacter], ...]] = None

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("modulus must be positive")
        if math.gcd(self.a % self.q if self.q > 1 else 0, self.q) != 1:
            raise ValueError(f"need gcd(a, q) = 1, got a={self.a}, q={self.q}")
        if self.characters is not None:
            for chi in self.characters:
                if chi is not None and chi.q != self.q:
                    raise ValueError("character modulus differs from q")


def _unit_tuples_blocks(q: int, n: int, block: int = 1 << 20):
    """Yield coordinate arrays covering the unit tuples mod q in fixed order."""
    units = np.array([x for x in range(1, q + 1) if math.gcd(x, q) == 1], dtype=np.int64)
    if q == 1:
        units = np.array([0], dtype=np.int64)
    tail = 0
    while tail < n and len(units) ** (tail + 1) <= block:
        tail += 1
    head_n = n - tail
    tail_grids = (
        np.array(np.meshgrid(*([units] * tail), indexing="ij")).reshape(tail, -1)
        if tail
        else np.empty((0, 1), dtype=np.int64)
    )
    for head in itertools.product(units.tolist(), repeat=head_n):
        coords = [np.full(tail_grids.shape[1], h, dtype=np.int64) for h in head]
        coords.extend(tail_grids)
        yield coords


def _form_mod_on_arrays(F: Form, coords: Sequence[np.ndarray], q: int) -> np.ndarray:
    acc = np.zeros_like(coords[0])
    for expo, coef in F.terms.items():
        term = np.full_like(coords[0], coef % q)
        for i, e in enumerate(expo):
            if e:
                pw = coords[i] % q
                base = coords[i] % q
                for _ in range(e - 1):
                    pw = (pw * base) % q
                term = (term * pw) % q
        acc = (acc + term) % q
    return acc


def unit_residue_histogram(F: Form, q: int, budget: int = 10**9) -> np.ndarray:
    """counts[r] = #{h in U_q^n : F(h) = r mod q}, exact integers."""
    n = F.n_vars
    check_budget(euler_phi(q) ** n, f"complete sum over U_{q}^{n}", budget)
    counts = np.zeros(q, dtype=np.int64)
    for coords in _unit_tuples_blocks(q, n):
        r = _form_mod_on_arrays(F, coords, q)
        counts += np.bincount(r, minlength=q)
    return counts


def complete_sum(F: Form, spec: CompleteSumSpec, budget: int = 10**9) -> complex:
    """The complete character-twisted sum over unit residue tuples mod q,
    with exact phase arithmetic (residues indexed into an order-q root table)."""
    q, a, n = spec.q, spec.a % spec.q if spec.q > 1 else 0, F.n_vars
    if spec.characters is not None and len(spec.characters) != n:
        raise ValueError("need one character slot per variable")
    roots = np.exp(2j * np.pi * np.arange(q) / q)
    if spec.characters is None or all(c is None for c in spec.characters):
        counts = unit_residue_histogram(F, q, budget)
        return complex(np.sum(counts * roots[(a * np.arange(q)) % q]))
    check_budget(euler_phi(q) ** n, f"complete sum over U_{q}^{n}", budget)
    luts = []
    for chi in spec.characters:
        if chi is None:
            luts.append(np.ones(q, dtype=complex))
        else:
            luts.append(np.conj(np.array([chi(x) for x in range(q)], dtype=complex)))
    total = 0j
    for coords in _unit_tuples_blocks(q, n):
        r = _form_mod_on_arrays(F, coords, q)
        w = np.ones(len(r), dtype=complex)
        for j in range(n):
            w = w * luts[j][coords[j] % q]
        total += complex(np.sum(w * roots[(a * r) % q]))
    return total


def complete_sum_bound_report(
    F: Form, qs: Sequence[int], codim: int, a: int = 1
) -> list[dict]:
    """|A(q, a)| against the power-saving exponent n - codim/(2(2d-1)4^d).

    Rows carry the fitted exponent log|A| / log q; anything above the bound
    plus 0.1 is flagged."""
    n, d = F.n_vars, F.degree
    exponent_cap = n - codim / (2 * (2 * d - 1) * 4**d) + 0.1
    rows = []
    for q in qs:
        val = abs(complete_sum(F, CompleteSumSpec(q, a % q if q > 1 else 0)))
        fit = math.log(val) / math.log(q) if q > 1 and val > 0 else float("-inf")
        rows.append(
            {
                "q": q,
                "abs_A": val,
                "fit": fit,
                "cap": exponent_cap,
                "flag": bool(fit > exponent_cap),
            }
        )
    return rows


# ------------------------------------------------------------------ exact mean

@dataclass(frozen=True)
class ExactMean:
    value: float
    imag_residual: float
    bandwidth: int


def exact_mean(
    F: Form,
    box: WindowedBox,
    tables: SieveTables,
    weight_mode: str = "lambda",
    budget: int = 2 * 10**7,
) -> ExactMean:
    """Average of S(j/M) over j < M, M above twice the max of |F| on the box.

    F is integer valued on the window, so S restricted to [0,1) is a trig
    polynomial of bandwidth max|F|; averaging over M equispaced rationals
    recovers its constant coefficient, the weighted count of zeros of F.
    """
    bound = 0
    for expo, coef in F.terms.items():
        term = abs(coef)
        for j, e in enumerate(expo):
            if e:
                lo, hi = box.support(j)
                term *= int(math.ceil(max(abs(lo), abs(hi)))) ** e
        bound += term
    M = 2 * bound + 1
    check_budget(M, "orthogonality sampling bandwidth", budget)
    coords = [box.coord_points(tables, j, weight_mode) for j in range(box.n)]
    W = np.zeros(M)
    if all(coords):
        for combo in itertools.product(*coords):
            xs = tuple(x for x, _ in combo)
            w = 1.0
            for _, wj in combo:
                w *= wj
            W[evaluate_mod(F, xs, M)] += w
    samples = np.fft.fft(W)  # samples[j] = conj(S(j/M)) termwise regrouped
    mean = complex(samples.mean())
    return ExactMean(value=float(mean.real), imag_residual=abs(mean.imag), bandwidth=M)
