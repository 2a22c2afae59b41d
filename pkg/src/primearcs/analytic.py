"""Smooth window weights, real solutions, and oscillatory integrals.

The weight class fixes one analytic family, the standard mollifier
exp(1 - 1/(1 - (t/delta)^2)) on |t| < delta, which meets the support and
derivative-bound requirements of the smooth class by construction; the
derivative sup bound is computed, not prescribed.  Oscillatory integrals are
tensor Gauss-Legendre over the window with panel refinement, and a Monte
Carlo density estimator serves as the independent cross-oracle for the
tau-integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .forms import Form, evaluate_float, gradient

TWO_PI = 2.0 * math.pi


class SmoothWeight:
    """Nonnegative bump supported in [-delta, delta], positive on
    [-delta/2, delta/2], with computed sup bounds for derivatives up to
    order m0."""

    def __init__(self, delta: float, m0: int = 2, grid: int = 20001):
        if not 0 < delta <= 0.25:
            raise ValueError("delta must lie in (0, 1/4]")
        self.delta = float(delta)
        self.m0 = int(m0)
        self._deriv_funcs = _mollifier_derivatives(self.delta, self.m0)
        ts = np.linspace(-delta, delta, grid)
        sup = max(
            float(np.max(np.abs(self.derivative(k, ts)))) for k in range(self.m0 + 1)
        )
        self.c_bound = 1.01 * sup  # grid sup inflated to a safe class constant

    def __call__(self, t):
        return self.derivative(0, t)

    def derivative(self, k: int, t):
        """k-th derivative, elementwise on arrays, exactly zero off support."""
        if not 0 <= k <= self.m0:
            raise ValueError(f"derivative order {k} not tracked (m0={self.m0})")
        t = np.asarray(t, dtype=float)
        u = t / self.delta
        out = np.zeros_like(u)
        inside = np.abs(u) < 1.0
        if np.any(inside):
            out[inside] = self._deriv_funcs[k](u[inside])
        if out.ndim == 0:
            return float(out)
        return out

    def mass(self) -> float:
        """Integral of the weight over the line (paneled Gauss-Legendre)."""
        nodes, wts = np.polynomial.legendre.leggauss(20)
        total = 0.0
        panels = 8
        width = 2 * self.delta / panels
        for k in range(panels):
            lo = -self.delta + k * width
            ts = lo + (nodes + 1) * width / 2
            total += float(np.sum(wts * self(ts)) * width / 2)
        return total


def _mollifier_derivatives(delta: float, m0: int):
    """Symbolic derivative formulas of exp(1 - 1/(1 - u^2)), rescaled by the
    chain rule for the argument t/delta; returned as vectorized callables of
    the normalized coordinate u."""
    import sympy as sp

    u = sp.Symbol("u")
    base = sp.exp(1 - 1 / (1 - u**2))
    funcs = []
    expr = base
    for k in range(m0 + 1):
        scaled = expr / delta**k  # d^k/dt^k with t = delta * u
        funcs.append(sp.lambdify(u, scaled, modules="numpy"))
        expr = sp.diff(expr, u)
    return funcs


def bump_weight(delta: float, m0: int = 2) -> SmoothWeight:
    return SmoothWeight(delta, m0)


@dataclass(frozen=True)
class TwistSpec:
    """Coordinate exponents r_j + i t_j with r_j restricted to [-1, 0]."""

    r: tuple[float, ...]
    t: tuple[float, ...]

    def __post_init__(self):
        if len(self.r) != len(self.t):
            raise ValueError("r and t must have equal length")
        if any(not -1.0 <= rj <= 0.0 for rj in self.r):
            raise ValueError("r components must lie in [-1, 0]")

    @staticmethod
    def none(n: int) -> "TwistSpec":
        return TwistSpec((0.0,) * n, (0.0,) * n)


# ------------------------------------------------------------------ real solutions

@dataclass(frozen=True)
class RealSolution:
    x0: Optional[tuple[float, ...]]
    f_value: float
    grad_norm: float
    tries: int

    @property
    def found(self) -> bool:
        return self.x0 is not None


def real_nonsingular_solution(
    F: Form,
    margin: float = 0.15,
    seed: int = 0,
    tries: int = 200,
    f_tol: float = 1e-12,
    grad_tol: float = 1e-6,
) -> RealSolution:
    """Search (margin, 1-margin)^n for x0 with F(x0) = 0 and grad F(x0) != 0.

    Seeded random starts followed by Newton steps along the gradient
    direction; exhausting the budget returns a failure value, never raises.
    """
    n = F.n_vars
    grads = gradient(F)
    rng = np.random.default_rng(seed)
    best = RealSolution(None, math.inf, 0.0, tries)
    for attempt in range(tries):
        x = rng.uniform(margin + 0.02, 1 - margin - 0.02, size=n)
        ok = False
        for _ in range(60):
            f = evaluate_float(F, x)
            g = np.array([evaluate_float(gi, x) for gi in grads])
            gn2 = float(g @ g)
            if gn2 < grad_tol**2:
                break
            step = f / gn2
            x = x - step * g
            if np.any(x <= margin) or np.any(x >= 1 - margin):
                break
            if abs(evaluate_float(F, x)) < f_tol:
                ok = True
                break
        if ok:
            f = evaluate_float(F, x)
            g = np.array([evaluate_float(gi, x) for gi in grads])
            gn = float(np.sqrt(g @ g))
            if gn > grad_tol and np.all(x > margin) and np.all(x < 1 - margin):
                return RealSolution(tuple(float(v) for v in x), f, gn, attempt + 1)
    return best


def window_curvature_check(F: Form, x0: Sequence[float], delta: float) -> dict:
    """Heuristic smallness check for delta: the gradient should dominate the
    second-order drift across the window, so the zero set stays a graph."""
    grads = gradient(F)
    g = np.array([evaluate_float(gi, x0) for gi in grads])
    gn = float(np.sqrt(g @ g))
    spread = 0.0
    for corner in range(2 ** len(x0)):
        pt = [
            x0[i] + delta * (1 if (corner >> i) & 1 else -1) for i in range(len(x0))
        ]
        gc = np.array([evaluate_float(gi, pt) for gi in grads])
        spread = max(spread, float(np.linalg.norm(gc - g)))
    marginal = bool(spread > 0.5 * gn)
    return {"grad_norm": gn, "grad_spread": spread, "marginal": marginal}


# ------------------------------------------------------------------ oscillatory integrals

def _tensor_nodes(x0: Sequence[float], delta: float, order: int, panels: int):
    """Per-coordinate Gauss-Legendre nodes/weights over [x0_j - delta, x0_j + delta],
    split into equal panels."""
    base_nodes, base_wts = np.polynomial.legendre.leggauss(order)
    all_nodes, all_wts = [], []
    for xc in x0:
        lo = xc - delta
        width = 2 * delta / panels
        nodes = []
        wts = []
        for k in range(panels):
            a = lo + k * width
            nodes.append(a + (base_nodes + 1) * width / 2)
            wts.append(base_wts * width / 2)
        all_nodes.append(np.concatenate(nodes))
        all_wts.append(np.concatenate(wts))
    return all_nodes, all_wts


class WindowGrid:
    """Cached tensor quadrature data for one (form, weight, center) triple.

    The weight-times-quadrature mass and the form values are evaluated once;
    every (tau, twist) evaluation is then a single vectorized phase sum, which
    is what makes the tau-integral and the decay grids affordable.
    """

    def __init__(self, F: Form, weight: SmoothWeight, x0: Sequence[float], order: int, panels: int):
        delta = weight.delta
        if any(xc - delta <= 0 or xc + delta >= 1 for xc in x0):
            raise ValueError("window support must sit inside (0, 1)^n")
        n = len(x0)
        if (order * panels) ** n > 2 * 10**7:
            raise ValueError("quadrature grid too large; lower order or panels")
        self.x0 = tuple(x0)
        nodes, wts = _tensor_nodes(x0, delta, order, panels)
        self.nodes = nodes
        grids = np.meshgrid(*nodes, indexing="ij")
        w = np.ones_like(grids[0])
        for j in range(n):
            shape = [1] * n
            shape[j] = -1
            w = w * (weight(nodes[j] - x0[j]) * wts[j]).reshape(shape)
        self.w = w.ravel()
        fvals = np.zeros_like(grids[0])
        for expo, coef in F.terms.items():
            term = float(coef) * np.ones_like(fvals)
            for j, e in enumerate(expo):
                if e:
                    term = term * grids[j] ** e
            fvals += term
        self.f = fvals.ravel()
        self._logs = [np.log(g).ravel() for g in grids]

    def eval(self, tau: float, twist: Optional[TwistSpec] = None) -> complex:
        phase = (TWO_PI * tau) * self.f
        amp = self.w
        if twist is not None:
            for j, (rj, tj) in enumerate(zip(twist.r, twist.t)):
                if tj:
                    phase = phase + tj * self._logs[j]
                if rj:
                    amp = amp * np.exp(rj * self._logs[j])
        return complex(np.sum(amp * np.exp(1j * phase)))


def oscillatory_I(
    F: Form,
    weight: SmoothWeight,
    x0: Sequence[float],
    tau: float,
    twist: Optional[TwistSpec] = None,
    order: int = 12,
    panels: int = 8,
    error_estimate: bool = False,
):
    """The window integral of prod w(x_l - x0_l) * prod x_j^{r_j + i t_j}
    * e(tau F(x)) by tensor Gauss-Legendre panels.

    With error_estimate=True, returns (value, estimated quadrature error)
    where the estimate is the change under doubling the panel count.
    """
    value = WindowGrid(F, weight, x0, order, panels).eval(tau, twist)
    if not error_estimate:
        return value
    value2 = WindowGrid(F, weight, x0, order, 2 * panels).eval(tau, twist)
    return value2, abs(value2 - value)


def decay_uniformity_report(
    F: Form,
    weight: SmoothWeight,
    x0: Sequence[float],
    taus: Sequence[float],
    t_values: Sequence[float],
    order: int = 12,
    panels: int = 10,
) -> dict:
    """|I(tau; t)| * max(1, |tau|) over a (tau, axis-twist) grid.

    The twist grid places each t value on one coordinate axis at a time.
    Rows exceeding 3x the (tau=1, t=0) baseline are flagged; the bound being
    probed is uniform in t, so flags indicate either a window problem or a
    genuine counterexample worth staring at.
    """
    n = F.n_vars
    grid = WindowGrid(F, weight, x0, order, panels)
    baseline = abs(grid.eval(1.0)) * 1.0
    rows = []
    twists = [TwistSpec.none(n)]
    for tv in t_values:
        if tv == 0:
            continue
        for axis in range(n):
            t = [0.0] * n
            t[axis] = float(tv)
            twists.append(TwistSpec((0.0,) * n, tuple(t)))
    for tau in taus:
        for tw in twists:
            val = abs(grid.eval(tau, tw))
            product = val * max(1.0, abs(tau))
            rows.append(
                {
                    "tau": tau,
                    "t": tw.t,
                    "abs_I": val,
                    "product": product,
                    "flag": bool(product > 3.0 * baseline),
                }
            )
    return {"baseline": baseline, "rows": rows, "max_product": max(r["product"] for r in rows)}


@dataclass
class SingularIntegralResult:
    value: float
    imag_residual: float
    tail_estimate: float
    T_used: float
    decayed: bool


def singular_integral(
    F: Form,
    weight: SmoothWeight,
    x0: Sequence[float],
    T: float = 32.0,
    rel_increment: float = 1e-3,
    order: int = 10,
    panels: int = 6,
) -> SingularIntegralResult:
    """integral of I(tau) over |tau| < T, doubling T until the last octave
    pair contributes less than rel_increment of the running value or drops
    below an absolute floor of 1e-4 times the tau = 0 scale.

    Both signs of tau are integrated explicitly (no conjugate-symmetry
    shortcut), so the imaginary part of the result is a genuine residual
    diagnosing the realness of the density.  The grid is graded: a fine
    split of [-1, 1], then octaves subdivided to track the e(tau F)
    oscillation.  Doubling stops at the largest tau the spatial grid can
    resolve; reaching that cap without convergence clears the decayed flag,
    which signals a singular window.
    """
    gl_nodes, gl_wts = np.polynomial.legendre.leggauss(order)
    grid = WindowGrid(F, weight, x0, order, panels)
    f_span = float(max(abs(grid.f.min()), abs(grid.f.max()), np.ptp(grid.f), 1e-12))
    tau_resolvable = max(order * panels / (4.0 * f_span), 2.0)
    floor = 1e-4 * abs(grid.eval(0.0)) + 1e-300

    def integrate_segment(a, b, subdiv):
        total = 0.0 + 0.0j
        width = (b - a) / subdiv
        for k in range(subdiv):
            lo = a + k * width
            taus = lo + (gl_nodes + 1) * width / 2
            for tau, w in zip(taus, gl_wts * width / 2):
                total += w * grid.eval(tau)
        return total

    acc = integrate_segment(-1.0, 1.0, 12)
    t_lo = 1.0
    decayed = True
    while True:
        t_hi = min(2 * t_lo, T) if t_lo < T else 2 * t_lo
        subdiv = max(2, min(64, math.ceil((t_hi - t_lo) * f_span / 3.0)))
        inc = integrate_segment(t_lo, t_hi, subdiv) + integrate_segment(-t_hi, -t_lo, subdiv)
        acc += inc
        t_lo = t_hi
        converged = abs(inc) < max(rel_increment * abs(acc), floor)
        if t_lo >= T and converged:
            break
        if 2 * t_lo > tau_resolvable:
            decayed = converged
            break
    # local decay exponent from the last two octaves sets the tail estimate
    i_half = abs(grid.eval(t_lo / 2))
    i_last = abs(grid.eval(t_lo))
    if i_last > 0 and i_half > i_last:
        beta = math.log(i_half / i_last) / math.log(2)
        tail = i_last * t_lo / (beta - 1) if beta > 1 else math.inf
    else:
        tail = i_last * t_lo
    return SingularIntegralResult(
        value=acc.real,
        imag_residual=abs(acc.imag),
        tail_estimate=2 * tail,
        T_used=t_lo,
        decayed=decayed,
    )


@dataclass
class DensityEstimate:
    value: float
    std_error: float
    coarse_value: float
    richardson: float
    epsilon: float
    samples: int


def epsilon_density(
    F: Form,
    weight: SmoothWeight,
    x0: Sequence[float],
    eps: float = 0.02,
    samples: int = 200_000,
    seed: int = 0,
    batches: int = 50,
) -> DensityEstimate:
    """Monte Carlo estimate of the weighted real density near the window:
    (2 eps)^{-1} * integral of prod w(x - x0) over {|F| < eps}.

    This is the independent oracle for the tau-integral: both converge to
    the same weighted surface density.  Batch seeds derive from the root
    seed, so results are deterministic for a fixed (seed, batches).
    """
    n = F.n_vars
    delta = weight.delta
    box_vol = (2 * delta) ** n
    per_batch = max(1, samples // batches)
    fine_vals, coarse_vals = [], []
    for b in range(batches):
        rng = np.random.default_rng((seed, b))
        pts = rng.uniform(-delta, delta, size=(per_batch, n)) + np.asarray(x0)
        w = np.ones(per_batch)
        for j in range(n):
            w *= weight(pts[:, j] - x0[j])
        fv = np.zeros(per_batch)
        for expo, coef in F.terms.items():
            term = float(coef) * np.ones(per_batch)
            for j, e in enumerate(expo):
                if e:
                    term *= pts[:, j] ** e
            fv += term
        fine_vals.append(float(np.mean(w * (np.abs(fv) < eps / 2))) / eps)
        coarse_vals.append(float(np.mean(w * (np.abs(fv) < eps))) / (2 * eps))
    fine = np.array(fine_vals) * box_vol
    coarse = np.array(coarse_vals) * box_vol
    value = float(fine.mean())
    se = float(fine.std(ddof=1) / math.sqrt(len(fine))) if len(fine) > 1 else math.inf
    coarse_mean = float(coarse.mean())
    richardson = 2 * value - coarse_mean
    return DensityEstimate(value, se, coarse_mean, richardson, eps, per_batch * batches)
