"""Exact sparse integer polynomials in several variables.

Everything downstream (rank estimation, complete exponential sums, local
densities, brute-force counting) evaluates forms exactly, so coefficients are
arbitrary-precision Python ints and all identities here are integer identities.
Exponent vectors are stored dense as tuples; the variable count stays small at
desk scale (n <= ~12).

Variable indices are 0-based throughout the code; reports render them 1-based.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import factorial, prod
from typing import Iterable, Mapping, Sequence


@dataclass(frozen=True)
class Form:
    """Sparse multivariate polynomial with integer coefficients.

    ``terms`` maps an exponent tuple of length ``n_vars`` to a nonzero
    coefficient.  The zero polynomial has an empty term map and degree 0.
    Instances are treated as immutable values; all operations return new
    forms.
    """

    n_vars: int
    terms: Mapping[tuple[int, ...], int] = field(default_factory=dict)

    def __post_init__(self):
        for expo, coef in self.terms.items():
            if len(expo) != self.n_vars:
                raise ValueError(
                    f"exponent vector {expo} has length {len(expo)}, expected {self.n_vars}"
                )
            if coef == 0:
                raise ValueError(f"zero coefficient stored for {expo}")
            if any(e < 0 for e in expo):
                raise ValueError(f"negative exponent in {expo}")

    @staticmethod
    def from_terms(n_vars: int, raw: Iterable[tuple[Sequence[int], int]]) -> "Form":
        """Build a form, summing duplicate exponent vectors and dropping zeros."""
        acc: dict[tuple[int, ...], int] = {}
        for expo, coef in raw:
            key = tuple(int(e) for e in expo)
            acc[key] = acc.get(key, 0) + int(coef)
        return Form(n_vars, {e: c for e, c in acc.items() if c != 0})

    @staticmethod
    def zero(n_vars: int) -> "Form":
        return Form(n_vars, {})

    @property
    def degree(self) -> int:
        """Maximum total degree; 0 for the zero form."""
        if not self.terms:
            return 0
        return max(sum(e) for e in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_homogeneous(self) -> bool:
        degs = {sum(e) for e in self.terms}
        return len(degs) <= 1

    def active_vars(self) -> tuple[int, ...]:
        """Indices of variables that actually occur in some term."""
        seen = set()
        for expo in self.terms:
            for i, e in enumerate(expo):
                if e:
                    seen.add(i)
        return tuple(sorted(seen))

    def coefficient_bound(self) -> int:
        """Sum of absolute coefficient values (an l1 norm)."""
        return sum(abs(c) for c in self.terms.values())

    # small algebra, mainly used to state identities in tests
    def __add__(self, other: "Form") -> "Form":
        if self.n_vars != other.n_vars:
            raise ValueError("variable count mismatch")
        items = list(self.terms.items()) + list(other.terms.items())
        return Form.from_terms(self.n_vars, ((e, c) for e, c in items))

    def __sub__(self, other: "Form") -> "Form":
        return self + other.scale(-1)

    def scale(self, c: int) -> "Form":
        if c == 0:
            return Form.zero(self.n_vars)
        return Form(self.n_vars, {e: c * v for e, v in self.terms.items()})

    def __mul__(self, other: "Form") -> "Form":
        if self.n_vars != other.n_vars:
            raise ValueError("variable count mismatch")
        raw = []
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                raw.append((tuple(a + b for a, b in zip(e1, e2)), c1 * c2))
        return Form.from_terms(self.n_vars, raw)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Form):
            return NotImplemented
        return self.n_vars == other.n_vars and dict(self.terms) == dict(other.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for expo, coef in sorted(self.terms.items()):
            mono = "*".join(
                f"x{i + 1}" + (f"^{e}" if e > 1 else "")
                for i, e in enumerate(expo)
                if e
            )
            pieces.append(f"{coef}" + (f"*{mono}" if mono else ""))
        return " + ".join(pieces)


@dataclass(frozen=True)
class VariablePartition:
    """Disjoint blocks of variable indices whose union is range(n_vars).

    Empty blocks are legal and recorded explicitly.
    """

    n_vars: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        flat = [i for b in self.blocks for i in b]
        if len(flat) != len(set(flat)):
            raise ValueError("blocks overlap")
        if set(flat) != set(range(self.n_vars)):
            raise ValueError("blocks do not cover all variables")


def parse_form(text: str) -> Form:
    """Parse the plain-text form format: one term per line, ``c e1 e2 ... en``.

    ``#`` starts a comment, blank lines are skipped, duplicate exponent
    vectors are summed, zero-sum terms dropped.
    """
    raw: list[tuple[tuple[int, ...], int]] = []
    n_vars = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        tokens = body.split()
        try:
            values = [int(t) for t in tokens]
        except ValueError as exc:
            raise ValueError(f"line {lineno}: non-integer token in {body!r}") from exc
        if len(values) < 2:
            raise ValueError(f"line {lineno}: need a coefficient and at least one exponent")
        coef, expo = values[0], tuple(values[1:])
        if n_vars is None:
            n_vars = len(expo)
        elif len(expo) != n_vars:
            raise ValueError(
                f"line {lineno}: {len(expo)} exponents, expected {n_vars} (ragged input)"
            )
        raw.append((expo, coef))
    if n_vars is None:
        raise ValueError("no terms found in form file")
    return Form.from_terms(n_vars, raw)


def load_form(path: str) -> Form:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_form(fh.read())


def evaluate(F: Form, x: Sequence[int]) -> int:
    """Exact value of F at an integer point."""
    if len(x) != F.n_vars:
        raise ValueError(f"point has length {len(x)}, form has {F.n_vars} variables")
    total = 0
    for expo, coef in F.terms.items():
        term = coef
        for xi, e in zip(x, expo):
            if e:
                term *= xi**e
        total += term
    return total


def evaluate_float(F: Form, x: Sequence[float]) -> float:
    """Float value of F; used by the analytic modules, never by identity tests."""
    total = 0.0
    for expo, coef in F.terms.items():
        term = float(coef)
        for xi, e in zip(x, expo):
            if e:
                term *= xi**e
        total += term
    return total


def evaluate_mod(F: Form, x: Sequence[int], q: int) -> int:
    """F(x) mod q via modular exponentiation (keeps intermediates small)."""
    total = 0
    for expo, coef in F.terms.items():
        term = coef % q
        for xi, e in zip(x, expo):
            if e:
                term = (term * pow(xi % q, e, q)) % q
        total = (total + term) % q
    return total


def partial(F: Form, i: int) -> Form:
    """Partial derivative with respect to variable i."""
    if not 0 <= i < F.n_vars:
        raise IndexError(f"variable index {i} out of range")
    raw = []
    for expo, coef in F.terms.items():
        e = expo[i]
        if e == 0:
            continue
        new = list(expo)
        new[i] = e - 1
        raw.append((tuple(new), coef * e))
    return Form.from_terms(F.n_vars, raw)


def gradient(F: Form) -> list[Form]:
    """All partial derivatives; Euler's identity sum x_i dF/dx_i = d*F holds
    for homogeneous F."""
    return [partial(F, i) for i in range(F.n_vars)]


def homogeneous_part(f: Form, j: int) -> Form:
    """The degree-j homogeneous portion of f."""
    if j < 0:
        raise ValueError("degree must be nonnegative")
    return Form(f.n_vars, {e: c for e, c in f.terms.items() if sum(e) == j})


def restrict_zero(F: Form, zeroed: Iterable[int]) -> Form:
    """Set the given variables to zero: drop every term touching them.

    The ambient variable count is preserved; codimension estimates do not
    depend on trailing dummy variables.
    """
    zs = set(zeroed)
    for i in zs:
        if not 0 <= i < F.n_vars:
            raise IndexError(f"variable index {i} out of range")
    return Form(
        F.n_vars,
        {e: c for e, c in F.terms.items() if all(e[i] == 0 for i in zs)},
    )


def cross_part(F: Form, u: Iterable[int], v: Iterable[int]) -> Form:
    """The mixed part G(u, v) = F_z(u, v) - F_z(u, 0) - F_z(0, v).

    F is first restricted to the variables in u and v (everything else set to
    zero); the result keeps exactly the monomials mixing the two blocks, so
    G(u, 0) and G(0, v) vanish identically.
    """
    us, vs = set(u), set(v)
    if us & vs:
        raise ValueError(f"blocks overlap: {sorted(us & vs)}")
    others = set(range(F.n_vars)) - us - vs
    Fz = restrict_zero(F, others)
    Fu = restrict_zero(Fz, vs)
    Fv = restrict_zero(Fz, us)
    return Fz - Fu - Fv


def substitute_diagonal(F: Form) -> Form:
    """Substitute x_i -> u_i * v_i, producing a form in 2m variables.

    Variables 0..m-1 are the u block, m..2m-1 the v block.  The result is
    bihomogeneous of bidegree (d, d) when F is homogeneous of degree d.
    """
    m = F.n_vars
    raw = []
    for expo, coef in F.terms.items():
        raw.append((tuple(expo) + tuple(expo), coef))
    return Form.from_terms(2 * m, raw)


@dataclass(frozen=True)
class MultilinearTable:
    """Symmetric coefficients of g(x; y) = F(x_1 y_1, ..., x_m y_m).

    Writing g = sum_{j,k} G_{j,k} x_{j_1}...x_{j_d} y_{k_1}...y_{k_d} with
    G symmetric within each index block, the stored entry for a sorted pair
    of index tuples is the integer (d!)^2 * G_{j,k}.  Entries vanish unless
    the j tuple is a permutation of the k tuple, which for this g means the
    two sorted tuples coincide.
    """

    m: int
    d: int
    entries: Mapping[tuple[tuple[int, ...], tuple[int, ...]], int]

    def entry(self, j: Sequence[int], k: Sequence[int]) -> int:
        """Scaled coefficient (d!)^2 G_{j,k} for arbitrary (unsorted) tuples."""
        return self.entries.get((tuple(sorted(j)), tuple(sorted(k))), 0)

    def reconstruct_diagonal(self) -> Form:
        """Rebuild g(x; y) as a form in 2m variables (u block then v block);
        must reproduce substitute_diagonal of the source exactly."""
        raw = []
        for (j, _k), val in self.entries.items():
            expo = [0] * (2 * self.m)
            for idx in j:
                expo[idx] += 1
            for idx in _k:
                expo[self.m + idx] += 1
            mult = prod(factorial(e) for e in expo[: self.m])
            coef, rem = divmod(val, mult * mult)
            if rem:
                raise ValueError("table entry not divisible by its multiplicity")
            raw.append((tuple(expo), coef))
        return Form.from_terms(2 * self.m, raw)


def symmetric_multilinear(F3: Form) -> MultilinearTable:
    """Symmetrized coefficient table of F3(x_1 y_1, ..., x_m y_m).

    A monomial c * prod x_i^{e_i} of the degree-d form F3 contributes the
    scaled value c * (prod e_i!)^2 on the index multiset expanding e; the
    coefficient is spread evenly over all ordered arrangements, which is what
    symmetry forces, and (d!)^2 times the symmetric coefficient is then the
    integer stored here.
    """
    if not F3.is_homogeneous():
        raise ValueError("need a homogeneous form")
    d = F3.degree
    entries: dict[tuple[tuple[int, ...], tuple[int, ...]], int] = {}
    for expo, coef in F3.terms.items():
        idx = []
        for i, e in enumerate(expo):
            idx.extend([i] * e)
        key = tuple(idx)
        mult = prod(factorial(e) for e in expo)
        entries[(key, key)] = coef * mult * mult
    return MultilinearTable(F3.n_vars, d, entries)


def _arrangement_sum(vectors: Sequence[Sequence[int]], multiset: tuple[int, ...]) -> int:
    """Sum over distinct orderings s of the multiset of prod_t vectors[t][s_t]."""
    total = 0
    for arrangement in set(itertools.permutations(multiset)):
        term = 1
        for t, idx in enumerate(arrangement):
            term *= vectors[t][idx]
            if term == 0:
                break
        total += term
    return total


def gamma_eval(
    T: MultilinearTable,
    xs: Sequence[Sequence[int]],
    ys: Sequence[Sequence[int]],
) -> int:
    """The multilinear form built from the table: d vector slots on each side.

    Specializing every x slot to x and every y slot to y returns
    (d!)^2 * g(x; y) exactly.
    """
    if len(xs) != T.d or len(ys) != T.d:
        raise ValueError(f"need {T.d} vectors on each side")
    for vec in itertools.chain(xs, ys):
        if len(vec) != T.m:
            raise ValueError(f"vectors must have length {T.m}")
    total = 0
    for (j, k), val in T.entries.items():
        sx = _arrangement_sum(xs, j)
        if sx == 0:
            continue
        sy = _arrangement_sum(ys, k)
        total += val * sx * sy
    return total
