"""Optimal fixed thresholds and preemption-benefit verdicts.

The threshold search is a dense grid followed by golden-section
refinement around the best grid cell.  A pure line search is not safe
here: the PAoI curve is monotone for memoryless service times and only
becomes convex for more regular shapes, so unimodality can never be
assumed.

An independent optimality verifier iterates the one-stage operator

    T(U) = min_theta { c(theta) + U * P(X > theta) },
    c(theta) = 2 * int_0^theta x dF(x) + theta * P(X > theta),

whose unique fixed point equals ``min_theta zeta(s_theta)`` over the same
grid whenever ``P(X > theta_min) < 1`` (the operator is then a
contraction with exactly that modulus).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analytic import paoi_fixed_threshold, paoi_xmin, paoi_zero_wait
from .distributions import ServiceDistribution
from .errors import DegenerateCondition, InvalidWindow, NoContraction

__all__ = [
    "OptimizationResult",
    "PreemptionVerdict",
    "WINNER_FIXED",
    "WINNER_ZERO_WAIT",
    "WINNER_XMIN",
    "default_window",
    "theta_grid",
    "optimal_threshold",
    "min_achievable_paoi",
    "bellman_tables",
    "bellman_apply",
    "bellman_fixed_point",
    "preemption_beneficial",
    "mean_residual_witness",
    "twopoint_benefit_threshold",
]

WINNER_FIXED = "fixed-threshold"
WINNER_XMIN = "xmin-threshold"
WINNER_ZERO_WAIT = "zero-wait"

# Preemption-capable winners are preferred on ties (within 1e-9 relative).
_WINNER_PRIORITY = (WINNER_FIXED, WINNER_XMIN, WINNER_ZERO_WAIT)
_TIE_REL_TOL = 1e-9

_DEFAULT_GRID_POINTS = 2000
_LOG_SPACING_RATIO = 100.0
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class OptimizationResult:
    """Outcome of the minimum-achievable-PAoI computation."""

    theta_opt: float
    zeta_opt: float
    zeta_zero_wait: float
    zeta_xmin: float
    zeta_min: float
    winner: str
    window: tuple[float, float]
    evaluations: int
    refine_iters: int


@dataclass(frozen=True)
class PreemptionVerdict:
    """Whether preemptions strictly beat the never-preempt baseline.

    ``condition`` is either ``"necessary-sufficient"`` (threshold-policy
    optimum vs ``2 E[X]``; ``margin`` is ``2 E[X]`` minus the best
    preemptive value, positive when beneficial) or
    ``"sufficient-residual"`` (a grid search for a threshold whose mean
    residual service exceeds the mean; ``margin`` is the largest residual
    excess found, ``nan`` when the mean diverges and the test is
    uninformative).
    """

    beneficial: bool
    witness_theta: Optional[float]
    condition: str
    margin: float


def default_window(d: ServiceDistribution) -> tuple[float, float]:
    """Search window hugging the support: barely above its minimum, out to
    the 1 - 1e-6 quantile."""
    xmin = d.support_min()
    lo = xmin * (1.0 + 1e-6) + 1e-9
    hi = d.quantile(1.0 - 1e-6)
    if not hi > lo:
        raise InvalidWindow(
            f"default window collapsed (support [{xmin}, ...] too narrow); "
            "pass an explicit window"
        )
    return lo, hi


def theta_grid(theta_min: float, theta_max: float, n: int = _DEFAULT_GRID_POINTS) -> np.ndarray:
    """Evaluation grid; log-spaced when the window spans over two decades."""
    if n < 2:
        raise InvalidWindow("grid needs at least 2 points")
    if theta_min > 0 and theta_max / theta_min > _LOG_SPACING_RATIO:
        return np.geomspace(theta_min, theta_max, n)
    return np.linspace(theta_min, theta_max, n)


def _validate_window(d: ServiceDistribution, theta_min: float, theta_max: float) -> None:
    if not (math.isfinite(theta_min) and math.isfinite(theta_max)):
        raise InvalidWindow("window endpoints must be finite")
    if theta_min < 0 or theta_min >= theta_max:
        raise InvalidWindow(f"need 0 <= theta_min < theta_max, got [{theta_min}, {theta_max}]")
    if theta_min < d.support_min():
        raise InvalidWindow(
            f"theta_min={theta_min} lies below the support minimum {d.support_min()}"
        )


def _golden_refine(fn, lo: float, hi: float, tol: float):
    """Golden-section descent; returns evaluated (value, point) pairs."""
    evaluated = []
    dist = hi - lo
    if dist <= tol:
        return evaluated, 0
    n = int(math.ceil(math.log(tol / dist) / math.log(_INV_PHI)))
    c = lo + _INV_PHI_SQ * dist
    e = lo + _INV_PHI * dist
    yc, ye = fn(c), fn(e)
    evaluated += [(yc, c), (ye, e)]
    for _ in range(max(n - 1, 0)):
        if yc < ye:
            hi, e, ye = e, c, yc
            dist *= _INV_PHI
            c = lo + _INV_PHI_SQ * dist
            yc = fn(c)
            evaluated.append((yc, c))
        else:
            lo, c, yc = c, e, ye
            dist *= _INV_PHI
            e = lo + _INV_PHI * dist
            ye = fn(e)
            evaluated.append((ye, e))
    return evaluated, max(n - 1, 0) + 2


def _search_optimal(d, theta_min, theta_max, tol, grid_points):
    _validate_window(d, theta_min, theta_max)
    if tol is None:
        tol = 1e-8 * (theta_max - theta_min)
    if tol <= 0:
        raise InvalidWindow("tol must be positive")

    thetas = theta_grid(theta_min, theta_max, grid_points)
    zetas = np.array([paoi_fixed_threshold(d, float(t)).zeta for t in thetas])
    i = int(np.argmin(zetas))  # first minimum: smallest theta wins ties
    evals = len(thetas)

    lo = float(thetas[max(i - 1, 0)])
    hi = float(thetas[min(i + 1, len(thetas) - 1)])
    candidates = [(float(zetas[i]), float(thetas[i]))]
    refined, iters = _golden_refine(
        lambda t: paoi_fixed_threshold(d, t).zeta, lo, hi, tol
    )
    candidates += refined
    evals += len(refined)

    best_val = min(v for v, _ in candidates)
    if math.isinf(best_val):
        ties = [t for _, t in candidates]
    else:
        cut = best_val + 1e-12 * (1.0 + abs(best_val))
        ties = [t for v, t in candidates if v <= cut]
    theta_best = min(ties)
    return theta_best, best_val, evals, iters


def optimal_threshold(
    d: ServiceDistribution,
    theta_min: float,
    theta_max: float,
    tol: Optional[float] = None,
    grid_points: int = _DEFAULT_GRID_POINTS,
) -> tuple[float, float]:
    """Global minimizer of the fixed-threshold PAoI over ``[theta_min, theta_max]``.

    Returns ``(theta, zeta)``.  Flat stretches tie-break toward the
    smallest threshold.
    """
    theta, zeta, _, _ = _search_optimal(d, theta_min, theta_max, tol, grid_points)
    return theta, zeta


def min_achievable_paoi(
    d: ServiceDistribution,
    theta_min: Optional[float] = None,
    theta_max: Optional[float] = None,
    tol: Optional[float] = None,
    grid_points: int = _DEFAULT_GRID_POINTS,
) -> OptimizationResult:
    """Minimum average PAoI over {best fixed threshold, zero-wait, xmin}.

    Candidates that are infinite still participate in the min; with an
    infinite service mean the zero-wait candidate simply never wins.
    """
    if theta_min is None or theta_max is None:
        lo, hi = default_window(d)
        theta_min = lo if theta_min is None else theta_min
        theta_max = hi if theta_max is None else theta_max
    theta_opt, zeta_opt, evals, iters = _search_optimal(
        d, theta_min, theta_max, tol, grid_points
    )
    zeta_zw = paoi_zero_wait(d)
    zeta_xm = paoi_xmin(d)

    by_tag = {
        WINNER_FIXED: zeta_opt,
        WINNER_XMIN: zeta_xm,
        WINNER_ZERO_WAIT: zeta_zw,
    }
    zeta_min = min(by_tag.values())
    winner = WINNER_FIXED
    for tag in _WINNER_PRIORITY:
        v = by_tag[tag]
        if v <= zeta_min or (
            math.isfinite(zeta_min) and v <= zeta_min * (1.0 + _TIE_REL_TOL)
        ):
            winner = tag
            break

    return OptimizationResult(
        theta_opt=theta_opt,
        zeta_opt=zeta_opt,
        zeta_zero_wait=zeta_zw,
        zeta_xmin=zeta_xm,
        zeta_min=zeta_min,
        winner=winner,
        window=(theta_min, theta_max),
        evaluations=evals,
        refine_iters=iters,
    )


def bellman_tables(
    d: ServiceDistribution,
    theta_min: float,
    theta_max: float,
    grid_points: int = _DEFAULT_GRID_POINTS,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Grid, per-attempt cost, and survival tables for the value iteration."""
    _validate_window(d, theta_min, theta_max)
    thetas = theta_grid(theta_min, theta_max, grid_points)
    m1 = np.array([d.truncated_first_moment(float(t)) for t in thetas])
    surv = np.array([d.sf(float(t)) for t in thetas])
    cost = 2.0 * m1 + thetas * surv
    return thetas, cost, surv


def bellman_apply(cost: np.ndarray, surv: np.ndarray, u: float) -> float:
    """One sweep of the operator: ``min over the grid of cost + u * surv``."""
    return float(np.min(cost + u * surv))


def bellman_fixed_point(
    d: ServiceDistribution,
    theta_min: float,
    theta_max: float,
    tol: float = 1e-10,
    grid_points: int = _DEFAULT_GRID_POINTS,
    max_iters: int = 1_000_000,
) -> float:
    """Value-iterate ``U <- min_theta {c(theta) + U * P(X > theta)}`` from 0.

    The fixed point independently recovers the grid minimum of
    ``zeta(s_theta)``.  Raises :class:`NoContraction` when
    ``P(X > theta_min)`` evaluates to 1 (window at or below the support,
    or so deep into the lower tail that the success probability
    underflows), since the modulus ``max P(X > theta)`` then fails to
    contract.
    """
    if tol <= 0:
        raise InvalidWindow("tol must be positive")
    _, cost, surv = bellman_tables(d, theta_min, theta_max, grid_points)
    if surv[0] >= 1.0:
        raise NoContraction(
            f"P(X > theta_min={theta_min}) = 1 to machine precision; "
            "value iteration cannot contract on this window"
        )
    u = 0.0
    for _ in range(max_iters):
        u_next = bellman_apply(cost, surv, u)
        if abs(u_next - u) < tol:
            return u_next
        u = u_next
    raise RuntimeError(
        f"value iteration did not converge within {max_iters} sweeps; "
        "the window's lower edge is too deep in the tail"
    )


def preemption_beneficial(
    d: ServiceDistribution,
    theta_min: Optional[float] = None,
    theta_max: Optional[float] = None,
    grid_points: int = _DEFAULT_GRID_POINTS,
) -> PreemptionVerdict:
    """Exact verdict: does some preemptive policy strictly beat ``2 E[X]``?

    Compares ``min(zeta(s_theta_opt), zeta_xmin)`` against ``2 E[X]`` with
    a 1e-9 relative strictness guard.  An infinite mean short-circuits to
    beneficial with infinite margin: any finite-PAoI threshold policy wins.
    """
    if theta_min is None or theta_max is None:
        lo, hi = default_window(d)
        theta_min = lo if theta_min is None else theta_min
        theta_max = hi if theta_max is None else theta_max
    theta_opt, zeta_opt, _, _ = _search_optimal(d, theta_min, theta_max, None, grid_points)
    mean = d.mean()
    if math.isinf(mean):
        return PreemptionVerdict(True, theta_opt, "necessary-sufficient", math.inf)

    zeta_xm = paoi_xmin(d)
    best = min(zeta_opt, zeta_xm)
    baseline = 2.0 * mean
    beneficial = best < baseline * (1.0 - _TIE_REL_TOL)
    witness = None
    if beneficial:
        witness = theta_opt if zeta_opt <= zeta_xm else d.support_min()
    return PreemptionVerdict(beneficial, witness, "necessary-sufficient", baseline - best)


def mean_residual_witness(d: ServiceDistribution, thetas) -> PreemptionVerdict:
    """Grid search for a threshold whose mean residual exceeds the mean.

    ``E[X - theta | X > theta] > E[X]`` at some theta certifies that
    restarting a long-running attempt beats letting it finish, so
    preemptions are beneficial.  The converse does not hold: finding no
    witness proves nothing.  For an infinite mean the comparison is
    vacuous and the verdict is returned unestablished with ``nan`` margin.
    """
    mean = d.mean()
    if math.isinf(mean):
        return PreemptionVerdict(False, None, "sufficient-residual", math.nan)
    best_margin = -math.inf
    witness = None
    for theta in np.asarray(thetas, dtype=float):
        try:
            residual = d.conditional_residual(float(theta))
        except DegenerateCondition:
            continue
        margin = residual - mean
        best_margin = max(best_margin, margin)
        if witness is None and margin > 0.0:
            witness = float(theta)
    return PreemptionVerdict(witness is not None, witness, "sufficient-residual", best_margin)


def twopoint_benefit_threshold(p: float, t1: float) -> float:
    """Critical upper atom for a two-point service law.

    For service time ``t1`` w.p. ``p`` and ``t2`` w.p. ``1-p``, preemptions
    are beneficial exactly when ``t2`` exceeds the returned value.  Solved
    from ``t1 (1+p)/p < 2 (p t1 + (1-p) t2)``, i.e. best-preemptive vs
    twice the mean.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("need 0 < p < 1")
    if t1 <= 0:
        raise ValueError("need t1 > 0")
    return t1 * (1.0 / p + 1.0 - 2.0 * p) / (2.0 * (1.0 - p))
