"""Posynomial machinery and the successive-approximation building blocks.

The secrecy-rate objective is a ratio of posynomials in the jammer
powers, which is not directly a geometric program.  The denominator
posynomial is condensed into a single monomial by the weighted AM-GM
inequality (evaluated at an expansion point, where the bound is tight),
turning each SINR-ratio constraint into a valid GP constraint.  The
resulting program is solved in log space by a log-barrier Newton method.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import logsumexp

from .errors import (AccuracyError, DomainError, InvalidInputError,
                     NumericalError)
from .model import ChannelGains, Scenario, _check_dims

DEFAULT_WEIGHT_CLAMP = 1e-14


@dataclass(frozen=True)
class Monomial:
    """c * prod_k x_k**e_k with c > 0; exponents may be any reals."""

    coeff: float
    exponents: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.exponents, dtype=float)
        object.__setattr__(self, "exponents", e)
        if not (np.isfinite(self.coeff) and self.coeff > 0):
            raise InvalidInputError(f"monomial coefficient must be > 0, got {self.coeff}")
        if e.ndim != 1 or not np.isfinite(e).all():
            raise InvalidInputError("exponents must be a finite 1-d vector")

    @property
    def n_vars(self) -> int:
        return self.exponents.size

    def evaluate(self, x) -> float:
        x = _positive_point(x, self.n_vars)
        return float(math.exp(math.log(self.coeff) + self.exponents @ np.log(x)))


@dataclass(frozen=True)
class Posynomial:
    """Sum of monomials over a common variable vector."""

    terms: tuple

    def __post_init__(self):
        terms = tuple(self.terms)
        object.__setattr__(self, "terms", terms)
        if not terms:
            raise InvalidInputError("posynomial needs at least one term")
        widths = {t.n_vars for t in terms}
        if len(widths) != 1:
            raise InvalidInputError(f"mixed term widths {widths}")

    @property
    def n_vars(self) -> int:
        return self.terms[0].n_vars

    @cached_property
    def coeffs(self) -> np.ndarray:
        return np.array([t.coeff for t in self.terms])

    @cached_property
    def exponent_matrix(self) -> np.ndarray:
        return np.vstack([t.exponents for t in self.terms])

    def evaluate(self, x) -> float:
        x = _positive_point(x, self.n_vars)
        logs = np.log(self.coeffs) + self.exponent_matrix @ np.log(x)
        return float(np.exp(logsumexp(logs)))


def _positive_point(x, n_vars: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (n_vars,):
        raise InvalidInputError(f"point shape {x.shape} != ({n_vars},)")
    if not (np.isfinite(x).all() and (x > 0).all()):
        raise DomainError("posynomials are evaluated at strictly positive points")
    return x


@dataclass(frozen=True)
class CondensationWeights:
    """AM-GM weights, one per term of the condensed posynomial."""

    alpha: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        object.__setattr__(self, "alpha", a)
        if not ((a > 0).all() and abs(a.sum() - 1.0) < 1e-9):
            raise InvalidInputError("weights must be positive and sum to 1")


def condense(g: Posynomial, x_hat, clamp: float = DEFAULT_WEIGHT_CLAMP):
    """Best monomial lower bound of ``g`` touching it at ``x_hat``.

    Weighted AM-GM: with a_k proportional to the term values at x_hat,
    ghat(x) = prod_k (term_k(x)/a_k)**a_k satisfies ghat <= g everywhere
    and ghat(x_hat) = g(x_hat).  Weights below ``clamp`` are clamped and
    the vector renormalised, which perturbs tightness by O(clamp) but
    keeps downstream log-space arithmetic finite.
    """
    x_hat = _positive_point(x_hat, g.n_vars)
    logs = np.log(g.coeffs) + g.exponent_matrix @ np.log(x_hat)
    alpha = np.exp(logs - logsumexp(logs))
    if (alpha < clamp).any():
        alpha = np.maximum(alpha, clamp)
        alpha = alpha / alpha.sum()
    log_coeff = float(alpha @ (np.log(g.coeffs) - np.log(alpha)))
    exponents = alpha @ g.exponent_matrix
    return (Monomial(coeff=math.exp(log_coeff), exponents=exponents),
            CondensationWeights(alpha=alpha))


# ---------------------------------------------------------------------------
# SINR-ratio posynomials
# ---------------------------------------------------------------------------

def _product_posynomial(factor_a, factor_b, n_vars: int) -> Posynomial:
    """Expand (sum factor_a) * (sum factor_b) keeping like terms apart.

    Factors are lists of (coeff, var_index or None).  Zero-coefficient
    terms are dropped; terms are ordered by exponent vector so the
    layout is deterministic regardless of input order.
    """
    terms = []
    for ca, ia in factor_a:
        for cb, ib in factor_b:
            c = ca * cb
            if c == 0.0:
                continue
            e = np.zeros(n_vars)
            if ia is not None:
                e[ia] += 1.0
            if ib is not None:
                e[ib] += 1.0
            terms.append(Monomial(coeff=float(c), exponents=e))
    if not terms:
        raise InvalidInputError("posynomial product collapsed to zero")
    terms.sort(key=lambda t: tuple(t.exponents))
    return Posynomial(terms=tuple(terms))


def sinr_ratio_parts(scenario: Scenario, gains: ChannelGains, m: int):
    """(numerator, denominator) posynomials in the jammer powers whose
    ratio equals (1 + eavesdropper-m SINR) / (1 + destination SINR)."""
    _check_dims(scenario, gains)
    if not 0 <= m < scenario.n_eavesdroppers:
        raise InvalidInputError(f"eavesdropper index {m} out of range")
    n = scenario.n_jammers
    jam_d = [(gains.g_d[i], i) for i in range(n)]
    jam_e = [(gains.g_e[m, i], i) for i in range(n)]
    ps = scenario.p_source
    numerator = _product_posynomial(
        jam_e + [(scenario.sigma2_eaves[m], None), (ps * gains.h_e[m], None)],
        jam_d + [(scenario.sigma2_dest, None)], n)
    denominator = _product_posynomial(
        jam_d + [(ps * gains.h_d, None), (scenario.sigma2_dest, None)],
        jam_e + [(scenario.sigma2_eaves[m], None)], n)
    return numerator, denominator


@dataclass(frozen=True)
class CondensedRatio:
    """One eavesdropper's SINR-ratio with the denominator condensed."""

    numerator: Posynomial
    denominator_hat: Monomial
    weights: CondensationWeights

    def evaluate(self, p) -> float:
        return self.numerator.evaluate(p) / self.denominator_hat.evaluate(p)


def condensed_ratios(scenario: Scenario, gains: ChannelGains, p_tilde):
    """Condense every eavesdropper's ratio denominator at ``p_tilde``."""
    out = []
    for m in range(scenario.n_eavesdroppers):
        num, den = sinr_ratio_parts(scenario, gains, m)
        den_hat, w = condense(den, p_tilde)
        out.append(CondensedRatio(numerator=num, denominator_hat=den_hat,
                                  weights=w))
    return out


# ---------------------------------------------------------------------------
# GP assembly and solve
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GpProblem:
    """min objective (monomial) s.t. each posynomial constraint <= 1.

    ``warm_start`` must be strictly feasible; the log-barrier solver
    starts from it directly.
    """

    objective: Monomial
    constraints: tuple
    warm_start: np.ndarray

    def __post_init__(self):
        n = self.objective.n_vars
        for g in self.constraints:
            if g.n_vars != n:
                raise InvalidInputError("constraint width mismatch")
        ws = np.asarray(self.warm_start, dtype=float)
        object.__setattr__(self, "warm_start", ws)
        if ws.shape != (n,) or not ((ws > 0).all() and np.isfinite(ws).all()):
            raise InvalidInputError("warm start must be strictly positive")

    @property
    def n_vars(self) -> int:
        return self.objective.n_vars


def default_power_floor(scenario: Scenario) -> float:
    return 1e-8 * float(np.min(scenario.p_max))


def build_approx_program(scenario: Scenario, gains: ChannelGains, p_tilde,
                         p_floor: float | None = None):
    """GP whose solution improves the secrecy rate from ``p_tilde``.

    Variables are (p_1..p_N, t); t upper-bounds every condensed SINR
    ratio, so minimising t maximises the approximate secrecy rate.
    Returns (problem, ratios); the ratios expose the condensation used.
    """
    _check_dims(scenario, gains)
    n = scenario.n_jammers
    if p_floor is None:
        p_floor = default_power_floor(scenario)
    p_tilde = np.asarray(p_tilde, dtype=float)
    if p_tilde.shape != (n,):
        raise InvalidInputError(f"expansion point shape {p_tilde.shape} != ({n},)")
    if (p_tilde < 0).any() or (p_tilde > scenario.p_max * (1 + 1e-9)).any():
        raise InvalidInputError("expansion point outside the power box")
    # strict interior, where logs and the barrier are finite
    p_int = np.clip(p_tilde, p_floor * (1 + 1e-6),
                    scenario.p_max * (1 - 1e-9))

    ratios = condensed_ratios(scenario, gains, p_int)
    nv = n + 1
    t_col = np.zeros(nv)
    t_col[n] = 1.0

    constraints = []
    for r in ratios:
        den_c = r.denominator_hat.coeff
        den_e = r.denominator_hat.exponents
        terms = []
        for mono in r.numerator.terms:
            e = np.zeros(nv)
            e[:n] = mono.exponents - den_e
            e[n] = -1.0
            terms.append(Monomial(coeff=mono.coeff / den_c, exponents=e))
        constraints.append(Posynomial(terms=tuple(terms)))
    for i in range(n):
        up = np.zeros(nv)
        up[i] = 1.0
        constraints.append(Posynomial(
            terms=(Monomial(coeff=1.0 / scenario.p_max[i], exponents=up),)))
        down = np.zeros(nv)
        down[i] = -1.0
        constraints.append(Posynomial(
            terms=(Monomial(coeff=p_floor, exponents=down),)))

    t0 = max(r.evaluate(p_int) for r in ratios) * math.exp(0.1)
    warm = np.append(p_int, t0)
    problem = GpProblem(objective=Monomial(coeff=1.0, exponents=t_col),
                        constraints=tuple(constraints), warm_start=warm)
    return problem, ratios


@dataclass(frozen=True)
class GpSolution:
    x: np.ndarray
    value: float
    duality_gap: float
    newton_iterations: int


def gp_solve(problem: GpProblem, tol: float = 1e-9,
             max_newton: int = 600) -> GpSolution:
    """Log-barrier interior-point solve of a geometric program.

    Works on z = log x, where the objective is linear and each
    constraint is log-sum-exp (convex).  The barrier parameter grows
    geometrically until the duality gap certificate m/t_bar drops below
    ``tol``; the reported objective is then within ~tol of optimal in
    log terms (relative in x).
    """
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    m_c = len(problem.constraints)
    if m_c == 0:
        raise InvalidInputError("unbounded GP: no constraints")
    # All constraint terms stacked row-wise; reduceat segments recover
    # the per-constraint log-sum-exp without a Python loop.
    b_all = np.concatenate([np.log(g.coeffs) for g in problem.constraints])
    a_all = np.vstack([g.exponent_matrix for g in problem.constraints])
    sizes = np.array([len(g.terms) for g in problem.constraints])
    starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    groups = np.repeat(np.arange(m_c), sizes)
    c_obj = problem.objective.exponents

    def constraint_logs(z):
        v = b_all + a_all @ z
        tops = np.maximum.reduceat(v, starts)
        ex = np.exp(v - tops[groups])
        return tops + np.log(np.add.reduceat(ex, starts))

    z = np.log(problem.warm_start)
    fvals = constraint_logs(z)
    if (fvals >= 0).any():
        raise InvalidInputError(
            f"warm start violates constraints (max log value "
            f"{fvals.max():.3g})")

    n = z.size
    t_bar = 1.0
    total_newton = 0
    while True:
        # Newton on t_bar*c@z - sum log(-f_j)
        for _ in range(60):
            v = b_all + a_all @ z
            tops = np.maximum.reduceat(v, starts)
            ex = np.exp(v - tops[groups])
            sums = np.add.reduceat(ex, starts)
            fvals = tops + np.log(sums)
            w = ex / sums[groups]              # softmax within constraints
            s = -fvals                          # barrier slacks, > 0
            grad = t_bar * c_obj + a_all.T @ (w / s[groups])
            gj = np.add.reduceat(a_all * w[:, None], starts, axis=0)
            hess = ((a_all * (w / s[groups])[:, None]).T @ a_all
                    + gj.T @ (gj * (1.0 / s ** 2 - 1.0 / s)[:, None]))
            try:
                dz = np.linalg.solve(hess, -grad)
            except np.linalg.LinAlgError:
                dz = np.linalg.solve(hess + 1e-10 * np.eye(n), -grad)
            decrement = float(-grad @ dz)
            if not np.isfinite(decrement) or decrement < 0:
                dz = np.linalg.solve(hess + 1e-8 * np.eye(n), -grad)
                decrement = float(-grad @ dz)
                if not np.isfinite(decrement) or decrement < 0:
                    raise NumericalError("Newton direction became indefinite")
            total_newton += 1
            if decrement <= 2e-12:
                break
            phi0 = t_bar * (c_obj @ z) - np.log(-fvals).sum()
            alpha = 1.0
            while alpha > 1e-14:
                z_new = z + alpha * dz
                f_new = constraint_logs(z_new)
                if (f_new < 0).all():
                    phi_new = t_bar * (c_obj @ z_new) - np.log(-f_new).sum()
                    if phi_new <= phi0 - 0.25 * alpha * decrement:
                        break
                alpha *= 0.5
            else:
                break  # no admissible step; centring is as good as it gets
            z, fvals = z_new, f_new
            if total_newton >= max_newton:
                x = np.exp(z)
                raise AccuracyError(
                    f"GP barrier hit the Newton budget ({max_newton})",
                    best_estimate=GpSolution(
                        x=x, value=problem.objective.evaluate(x),
                        duality_gap=m_c / t_bar,
                        newton_iterations=total_newton))
        if m_c / t_bar <= tol:
            break
        t_bar *= 20.0
    x = np.exp(z)
    return GpSolution(x=x, value=problem.objective.evaluate(x),
                      duality_gap=m_c / t_bar,
                      newton_iterations=total_newton)
