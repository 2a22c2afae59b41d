"""Sieve tables, Vaughan's identity components, and Dirichlet characters.

Lambda values are stored as floats (log of the underlying prime) but the
base prime of every prime power is kept alongside, so identities that float
cancellation cannot settle can be regrouped exactly by prime.  Character
values are exact roots of unity, held as rational angles, with complex
rendering on demand.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .util import check_budget, factorize

MAX_SIEVE = 10**8
MAX_CHARACTER_MODULUS = 10**4


class SieveTables:
    """Prime flags and the arithmetic functions the circle method consumes.

    Arrays are indexed 0..N and immutable after construction; lookups are
    safe to share across threads.
    """

    def __init__(self, limit: int):
        check_budget(limit, "sieve limit", MAX_SIEVE)
        if limit < 2:
            raise ValueError("sieve limit must be at least 2")
        self.limit = limit
        n = limit + 1

        spf = np.zeros(n, dtype=np.int64)
        for p in range(2, math.isqrt(limit) + 1):
            if spf[p] == 0:
                spf[p] = p
                seg = spf[p * p :: p]
                seg[seg == 0] = p
        untouched = np.flatnonzero(spf[2:] == 0) + 2
        spf[untouched] = untouched
        self.spf = spf

        idx = np.arange(n, dtype=np.int64)
        self.is_prime = np.zeros(n, dtype=bool)
        self.is_prime[2:] = spf[2:] == idx[2:]

        # base prime of each prime power (0 elsewhere)
        prime_of = np.zeros(n, dtype=np.int64)
        for p in np.flatnonzero(self.is_prime):
            p = int(p)
            q = p
            while q <= limit:
                prime_of[q] = p
                q *= p
        self.prime_of = prime_of

        with np.errstate(divide="ignore"):
            self.lam = np.where(prime_of > 0, np.log(np.maximum(prime_of, 1)), 0.0)
        logs = np.zeros(n)
        logs[1:] = np.log(idx[1:])
        self.log = logs
        self.lam_star = np.where(self.is_prime, logs, 0.0)

        mu = np.ones(n, dtype=np.int8)
        mu[0] = 0
        for p in np.flatnonzero(self.is_prime):
            p = int(p)
            mu[p::p] *= -1
            mu[p * p :: p * p] = 0
        self.mu = mu

        sigma0 = np.zeros(n, dtype=np.int64)
        for d in range(1, limit + 1):
            sigma0[d::d] += 1
        self.sigma0 = sigma0

    def primes(self) -> np.ndarray:
        return np.flatnonzero(self.is_prime)

    def prime_powers(self) -> np.ndarray:
        return np.flatnonzero(self.prime_of > 0)

    def divisors(self, x: int) -> list[int]:
        if not 1 <= x <= self.limit:
            raise ValueError("argument outside sieve range")
        divs = [1]
        while x > 1:
            p = int(self.spf[x])
            e = 0
            while x % p == 0:
                x //= p
                e += 1
            divs = [d * p**k for d in divs for k in range(e + 1)]
        return sorted(divs)


def build_tables(limit: int) -> SieveTables:
    return SieveTables(limit)


# ------------------------------------------------------------------ Vaughan pieces

def _lambda_of(x: int, tables: Optional[SieveTables]) -> float:
    if tables is not None and x <= tables.limit:
        return float(tables.lam[x])
    if x < 2:
        return 0.0
    fac = factorize(x)
    if len(fac) == 1:
        (p, _e), = fac.items()
        return math.log(p)
    return 0.0


def _mu_of(x: int, tables: Optional[SieveTables]) -> int:
    if tables is not None and x <= tables.limit:
        return int(tables.mu[x])
    fac = factorize(x)
    if any(e > 1 for e in fac.values()):
        return 0
    return -1 if len(fac) % 2 else 1


def _divisors_of(x: int, tables: Optional[SieveTables]) -> list[int]:
    if tables is not None and x <= tables.limit:
        return tables.divisors(x)
    from .util import divisors

    return divisors(x)


def nu2(s: int, U: float, V: float, tables: Optional[SieveTables] = None) -> float:
    """nu2(s) = - sum over factorizations s = c d with c <= V, d <= U of
    mu(c) Lambda(d); bounded by log s in absolute value."""
    if s < 1:
        raise ValueError("argument must be positive")
    total = 0.0
    for c in _divisors_of(s, tables):
        if c > V:
            continue
        d = s // c
        if d > U:
            continue
        m = _mu_of(c, tables)
        if m:
            total -= m * _lambda_of(d, tables)
    return total


def nu3(t: int, V: float, tables: Optional[SieveTables] = None) -> int:
    """nu3(t) = - sum of mu(c) over divisors c <= V; bounded by sigma0(t)."""
    if t < 1:
        raise ValueError("argument must be positive")
    return -sum(_mu_of(c, tables) for c in _divisors_of(t, tables) if c <= V)


def vaughan_residual(x: int, U: float, V: float, tables: Optional[SieveTables] = None) -> float:
    """Lambda(x) minus the four-piece decomposition; identically zero up to
    float rounding."""
    if x < 1:
        raise ValueError("argument must be positive")
    total = _lambda_of(x, tables) if x <= U else 0.0
    for s in _divisors_of(x, tables):
        t = x // s
        if s <= V:
            m = _mu_of(s, tables)
            if m and t > 1:
                total += m * math.log(t)
        if s <= U * V:
            total += nu2(s, U, V, tables)
        if s > U and t > V:
            total += _lambda_of(s, tables) * nu3(t, V, tables)
    return _lambda_of(x, tables) - total


def nu2_table(N: int, U: float, V: float, tables: SieveTables) -> np.ndarray:
    """nu2 on 1..N as a dense array, built from the (c, d) double loop."""
    out = np.zeros(N + 1)
    cmax = min(int(V), N)
    for c in range(1, cmax + 1):
        m = int(tables.mu[c])
        if m == 0:
            continue
        dmax = min(int(U), N // c)
        for d in range(2, dmax + 1):
            lam = tables.lam[d]
            if lam:
                out[c * d] -= m * lam
    return out


def nu3_table(N: int, V: float, tables: SieveTables) -> np.ndarray:
    out = np.zeros(N + 1, dtype=np.int64)
    cmax = min(int(V), N)
    for c in range(1, cmax + 1):
        m = int(tables.mu[c])
        if m:
            out[c::c] -= m
    return out


def vaughan_residual_max(N: int, U: float, V: float, tables: SieveTables) -> float:
    """max |residual| over 2 <= x <= N, assembled with sieve-style sweeps so
    the full range costs about N log N float operations."""
    if N > tables.limit:
        raise ValueError("sweep range exceeds the sieve tables")
    acc = np.zeros(N + 1)
    # opening term Lambda(x) 1_{[1,U]}(x)
    top = min(int(U), N)
    acc[: top + 1] += tables.lam[: top + 1]
    # mu(s) log t over st = x, s <= V
    logs = tables.log
    for s in range(1, min(int(V), N) + 1):
        m = int(tables.mu[s])
        if m:
            acc[s::s] += m * logs[1 : N // s + 1]
    # nu2(s) over st = x, s <= UV
    n2 = nu2_table(min(int(U * V), N), U, V, tables)
    for s in np.flatnonzero(n2):
        acc[s::s] += n2[s]
    # Lambda(s) nu3(t) over st = x, s > U, t > V
    n3 = nu3_table(N, V, tables)
    for s in tables.prime_powers():
        s = int(s)
        if s <= U:
            continue
        t_hi = N // s
        if t_hi <= V:
            break
        lo = int(V) + 1
        acc[s * lo :: s] += tables.lam[s] * n3[lo : t_hi + 1]
    residual = tables.lam[: N + 1] - acc
    return float(np.abs(residual[2:]).max())


# ------------------------------------------------------------------ characters

def _primitive_root(p: int, e: int) -> int:
    """Generator of the (cyclic) unit group mod p^e for odd p."""
    factors = list(factorize(p - 1))
    g = None
    for cand in range(2, p):
        if all(pow(cand, (p - 1) // f, p) != 1 for f in factors):
            g = cand
            break
    if g is None:
        raise ArithmeticError(f"no primitive root found mod {p}")
    if e == 1:
        return g
    if pow(g, p - 1, p * p) == 1:
        g += p
    return g


@dataclass(frozen=True)
class _CyclicFactor:
    modulus: int  # the prime power this factor belongs to
    order: int
    dlog: dict  # residue mod `modulus` -> exponent of the generator


def _unit_group_factors(q: int) -> list[_CyclicFactor]:
    factors: list[_CyclicFactor] = []
    for p, e in sorted(factorize(q).items()):
        pe = p**e
        if p == 2:
            if e == 1:
                continue  # trivial unit group
            if e == 2:
                factors.append(_CyclicFactor(4, 2, {1: 0, 3: 1}))
                continue
            # <-1> x <5>
            half = 2 ** (e - 2)
            dlog_sign: dict[int, int] = {}
            dlog_five: dict[int, int] = {}
            val = 1
            for k in range(half):
                dlog_sign[val] = 0
                dlog_five[val] = k
                dlog_sign[pe - val] = 1
                dlog_five[pe - val] = k
                val = val * 5 % pe
            factors.append(_CyclicFactor(pe, 2, dlog_sign))
            factors.append(_CyclicFactor(pe, half, dlog_five))
        else:
            g = _primitive_root(p, e)
            order = pe // p * (p - 1)
            dlog = {}
            val = 1
            for k in range(order):
                dlog[val] = k
                val = val * g % pe
            factors.append(_CyclicFactor(pe, order, dlog))
    return factors


class DirichletCharacter:
    """A character mod q, stored as exact root-of-unity angles per residue."""

    def __init__(self, q: int, factors: Sequence[_CyclicFactor], labels: tuple[int, ...]):
        self.q = q
        self._factors = tuple(factors)
        self.labels = labels
        angles: list[Optional[Fraction]] = [None] * q if q > 1 else [Fraction(0)]
        for x in range(1, q + 1):
            if math.gcd(x, q) != 1:
                continue
            t = Fraction(0)
            for fac, k in zip(factors, labels):
                t += Fraction(k * fac.dlog[x % fac.modulus], fac.order)
            angles[x % q] = t % 1
        self._angles = tuple(angles)

    @property
    def is_principal(self) -> bool:
        return all(k == 0 for k in self.labels)

    def angle(self, x: int) -> Optional[Fraction]:
        """Exact angle a/b with chi(x) = e(a/b), or None off the units."""
        return self._angles[x % self.q]

    def __call__(self, x: int) -> complex:
        t = self.angle(x)
        if t is None:
            return 0j
        return cmath.exp(2j * cmath.pi * float(t))

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        if self.q != other.q:
            raise ValueError("character moduli differ")
        labels = tuple(
            (a + b) % f.order for a, b, f in zip(self.labels, other.labels, self._factors)
        )
        return DirichletCharacter(self.q, self._factors, labels)

    def conj(self) -> "DirichletCharacter":
        labels = tuple((-a) % f.order for a, f in zip(self.labels, self._factors))
        return DirichletCharacter(self.q, self._factors, labels)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DirichletCharacter):
            return NotImplemented
        return self.q == other.q and self._angles == other._angles

    def __hash__(self):
        return hash((self.q, self._angles))

    def __repr__(self):
        kind = "principal " if self.is_principal else ""
        return f"<{kind}character mod {self.q}, labels={self.labels}>"


def characters_mod(q: int) -> list[DirichletCharacter]:
    """The full character group mod q, built through the CRT decomposition of
    the unit group (primitive roots at odd prime powers, <-1, 5> at powers
    of two).  Exactly phi(q) characters come back, principal first."""
    if q < 1:
        raise ValueError("modulus must be positive")
    check_budget(q, "character modulus", MAX_CHARACTER_MODULUS)
    factors = _unit_group_factors(q)
    out = []
    labels = [0] * len(factors)
    while True:
        out.append(DirichletCharacter(q, factors, tuple(labels)))
        for i in range(len(factors) - 1, -1, -1):
            labels[i] += 1
            if labels[i] < factors[i].order:
                break
            labels[i] = 0
        else:
            break
    return out
