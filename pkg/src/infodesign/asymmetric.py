"""Asymmetric information structures and related checks.

Covers four analyses: the averaging argument showing asymmetric profiles
never help a revenue-minimising designer (an AM-GM gap that is zero only
for identical marginals), two parametric families in which asymmetry
strictly raises the buyers' surplus (two buyers, and one informed buyer
against degenerate competitors), the seller-worst structure under
buyer-specific prior means, and a consistency falsification for a
candidate interdependent-value construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._numerics import log1m, solve_bracketed
from .auctions import AuctionStats
from .distributions import (DomainError, PiecewiseDistribution, degenerate,
                            two_point_distribution)
from .solvers import (TwoPointSolution, step_mean, thresholds, _rs_u)

__all__ = [
    "AsymmetricProfile",
    "AsymTwoBuyerResult",
    "AsymLimitResult",
    "ConsistencyReport",
    "averaging_revenue_gap",
    "asym_buyer_search_n2",
    "asym_buyer_limit",
    "asym_prior_seller_worst",
    "asym_prior_revenue_with_common_k",
    "interdependence_consistency",
    "consistency_double_integral",
]


# ---------------------------------------------------------------------------
# step-CDF normalisation for the averaging gap
# ---------------------------------------------------------------------------


def _as_step(F):
    """Normalise a virtual-value CDF to (boundaries, levels, theta0).

    Accepts a TwoPointSolution, a (theta0, k, theta) triple, or an explicit
    (boundaries, levels, theta0) step description.
    """
    if isinstance(F, TwoPointSolution):
        theta0, k, theta = F.theta0, F.k, F.theta
    elif len(F) == 3 and np.ndim(F[0]) == 0 and np.ndim(F[1]) == 0 and np.ndim(F[2]) == 0:
        theta0, k, theta = map(float, F)
    else:
        boundaries, levels, theta0 = F
        return (np.asarray(boundaries, dtype=float),
                np.asarray(levels, dtype=float), float(theta0))
    if k > 0.0:
        return (np.asarray([0.0, k, 1.0]), np.asarray([theta0, theta]), theta0)
    return (np.asarray([0.0, 1.0]), np.asarray([theta]), theta0)


def _step_level_at(boundaries, levels, k):
    idx = np.clip(np.searchsorted(boundaries, k, side="right") - 1, 0,
                  len(levels) - 1)
    return levels[idx]


def averaging_revenue_gap(F1, F2, n: int = 2, *, mean_tol: float = 1e-8) -> float:
    """∫ Fbar^n - prod_i F_i dk for a two-type profile of virtual-value CDFs.

    For n buyers, ceil(n/2) use F1 and the rest F2, and Fbar is the
    buyer-average CDF.  By the AM-GM inequality the gap is nonnegative and
    vanishes exactly when F1 = F2: averaging an asymmetric profile always
    weakly lowers the integral the seller's revenue decreases in, so no
    asymmetric profile can beat the symmetric optimum.  Both CDFs must
    satisfy the same mean constraint.
    """
    if n < 2:
        raise DomainError("averaging needs at least two buyers")
    b1, l1, t01 = _as_step(F1)
    b2, l2, t02 = _as_step(F2)
    m1 = step_mean(b1, l1, t01)
    m2 = step_mean(b2, l2, t02)
    if abs(m1 - m2) > mean_tol:
        raise DomainError(
            f"profiles are not feasible for a common mean: {m1} vs {m2}")
    n1 = (n + 1) // 2
    n2 = n - n1
    knots = np.unique(np.concatenate([b1, b2]))
    gap = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        L1 = float(_step_level_at(b1, l1, a))
        L2 = float(_step_level_at(b2, l2, a))
        bar = (n1 * L1 + n2 * L2) / n
        gap += (b - a) * (bar ** n - L1 ** n1 * L2 ** n2)
    return gap


# ---------------------------------------------------------------------------
# two buyers, individual masses at signal zero
# ---------------------------------------------------------------------------


def _theta_for_mass(p: float, theta0: float) -> float:
    """theta solving (1-theta)(1 - log(1-theta) + log(1-theta0)) = p."""
    if p >= 1.0 - theta0:
        raise DomainError("no theta satisfies the mean constraint for this mass at zero")

    def f(theta):
        u = 1.0 - theta
        return u * (1.0 - math.log(u) + log1m(theta0)) - p

    return solve_bracketed(f, theta0, 1.0 - 1e-14)


@dataclass(frozen=True)
class AsymTwoBuyerResult:
    p: float
    theta01: float
    theta02: float
    theta1: float
    theta2: float
    stats: AuctionStats
    distributions: tuple


def asym_buyer_search_n2(p: float, theta01: float, theta02: float) -> AsymTwoBuyerResult:
    """Buyers' surplus for two buyers whose signal distributions put mass
    theta0i at 0, the rest on a zero-virtual-value Pareto stretch and an
    atom at 1, each theta_i pinned by its own mean constraint.

    Only defined below the mass-at-zero threshold r_b(2), where the
    symmetric optimum itself places mass at zero.
    """
    if not 0.0 < p < 1.0:
        raise DomainError("p must lie in (0,1)")
    if not (0.0 <= theta01 <= theta02 < 1.0):
        raise DomainError("need 0 <= theta01 <= theta02 < 1")
    if p >= thresholds(2).r_b:
        raise DomainError("the asymmetric mass-at-zero family needs p < r_b(2)")
    th1 = _theta_for_mass(p, theta01)
    th2 = _theta_for_mass(p, theta02)
    # labelled so buyer 1's Pareto stretch starts lower: x_i = (1-theta_i)/(1-theta0_i)
    surplus = (2.0 * (1.0 - th1) * (theta02 - th2)
               + theta02 * (1.0 - th1) * (log1m(theta01) - log1m(th1))
               + (2.0 - (1.0 - th1) * theta02 - th1 - th2)
               * (log1m(theta02) - log1m(th2)))
    revenue = 1.0 - th1 * th2
    stats = AuctionStats(revenue=revenue, total_surplus=revenue + surplus,
                         buyer_surplus=surplus,
                         sale_probability=1.0 - theta01 * theta02,
                         method="closed_form")
    gs = (two_point_distribution(theta01, 0.0, th1),
          two_point_distribution(theta02, 0.0, th2))
    return AsymTwoBuyerResult(p=p, theta01=theta01, theta02=theta02,
                              theta1=th1, theta2=th2, stats=stats,
                              distributions=gs)


# ---------------------------------------------------------------------------
# one informed buyer against degenerate competitors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AsymLimitResult:
    p: float
    theta0: float
    theta: float
    n: int
    x1: float
    stats: AuctionStats
    informed: PiecewiseDistribution
    competitor: PiecewiseDistribution


def asym_buyer_limit(p: float, theta0: float, theta: float, n: int,
                     *, mean_tol: float = 1e-3) -> AsymLimitResult:
    """Buyers' surplus when buyer 1 mixes an atom at 0, a Pareto stretch
    with constant virtual value p starting above p, and an atom at 1, while
    the other n-1 buyers see the degenerate signal p.

    The surplus p(1 + theta0) - theta*p - (1 - theta) does not depend on n:
    competitors at p never beat buyer 1's Pareto signals, and whenever
    buyer 1 sits at 0 a competitor wins at exactly p.
    """
    if n < 2:
        raise DomainError("needs at least one degenerate competitor")
    if not (0.0 <= theta0 <= theta <= 1.0) or not 0.0 < p < 1.0:
        raise DomainError("invalid parameters")
    mean = (p * (1.0 - theta0)
            + (1.0 - p) * (1.0 - theta)
            * (1.0 - math.log((1.0 - theta) / (1.0 - theta0)))
            if theta < 1.0 else p * (1.0 - theta0))
    if abs(mean - p) > mean_tol:
        raise DomainError(
            f"parameters violate the mean constraint: mean {mean} vs p {p}")
    surplus = p * (1.0 + theta0) - theta * p - (1.0 - theta)
    revenue = theta * p + (1.0 - theta)
    stats = AuctionStats(revenue=revenue, total_surplus=p * (1.0 + theta0),
                         buyer_surplus=surplus, sale_probability=1.0,
                         method="closed_form")
    g1 = two_point_distribution(theta0, p, theta)
    x1 = p + (1.0 - theta) * (1.0 - p) / (1.0 - theta0) if theta0 < 1.0 else p
    return AsymLimitResult(p=p, theta0=theta0, theta=theta, n=n, x1=x1,
                           stats=stats, informed=g1, competitor=degenerate(p))


# ---------------------------------------------------------------------------
# asymmetric prior means, two buyers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AsymmetricProfile:
    prior_means: tuple
    buyers: tuple            # TwoPointSolution per buyer
    distributions: tuple
    revenue: float


def asym_prior_seller_worst(p1: float, p2: float) -> AsymmetricProfile:
    """Seller-worst profile for two buyers with individual prior means:
    each buyer gets the zero-virtual-value truncated Pareto whose scale x_i
    solves x - x log x = p_i; revenue is 1 - theta1*theta2."""
    for p in (p1, p2):
        if not 0.0 < p < 1.0:
            raise DomainError("prior means must lie in (0,1)")
    buyers = []
    gs = []
    for p in (p1, p2):
        u = _rs_u(p)
        buyers.append(TwoPointSolution(theta0=0.0, k=0.0, theta=1.0 - u,
                                       top_mass=u, x_scale=u,
                                       case_label="zero_k"))
        gs.append(two_point_distribution(0.0, 0.0, 1.0 - u))
    revenue = 1.0 - buyers[0].theta * buyers[1].theta
    return AsymmetricProfile(prior_means=(p1, p2), buyers=tuple(buyers),
                             distributions=tuple(gs), revenue=revenue)


def asym_prior_revenue_with_common_k(p1: float, p2: float, k: float) -> float:
    """Revenue of the two-buyer asymmetric-prior profile when both buyers'
    low virtual value is forced to k (each theta_i from its own mean
    constraint); used to confirm k = 0 is optimal by grid search."""
    if k < 0.0 or k >= min(p1, p2):
        raise DomainError("need 0 <= k < min(p1, p2)")
    thetas = []
    for p in (p1, p2):
        u = _rs_u((p - k) / (1.0 - k))
        thetas.append(1.0 - u)
    return 1.0 - (1.0 - k) * thetas[0] * thetas[1]


# ---------------------------------------------------------------------------
# interdependent-value consistency check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConsistencyReport:
    p: float
    a: float
    lhs: float
    rhs: float
    violated: bool

    def to_dict(self) -> dict:
        return {"p": self.p, "a": self.a, "lhs": self.lhs, "rhs": self.rhs,
                "violated": self.violated}


def interdependence_consistency(p: float) -> ConsistencyReport:
    """Checks the candidate interdependent-value construction with interim
    value min{a/((1-s1)(1-s2)), 1}: consistency with independent binary
    values would require a(a - 2 log a) = p^2, but the left side is
    strictly larger on (0,1), so the construction induces correlation and
    is infeasible.
    """
    if not 0.0 < p < 1.0:
        raise DomainError("p must lie in (0,1)")

    def f(v):
        a = math.exp(v)
        return a * (1.0 - v + 0.5 * v * v) - p

    a = math.exp(solve_bracketed(f, -500.0, 0.0))
    lhs = a * (a - 2.0 * math.log(a))
    rhs = p * p
    return ConsistencyReport(p=p, a=a, lhs=lhs, rhs=rhs,
                             violated=lhs > rhs + 1e-12)


def consistency_double_integral(a: float) -> float:
    """Quadrature evaluation of P{t1 t2 <= a} + ∫∫_{t1 t2 > a} (a/(t1 t2))^2,
    the joint probability both values equal 1 under the candidate
    construction; cross-checks the closed form a(a - 2 log a)."""
    from scipy.integrate import quad

    if not 0.0 < a <= 1.0:
        raise DomainError("a must lie in (0,1]")
    prob_below, _ = quad(lambda t1: min(1.0, a / t1), 0.0, 1.0,
                         points=[a], limit=200)

    def inner(t1):
        lo = a / t1
        if lo >= 1.0:
            return 0.0
        val, _ = quad(lambda t2: (a / (t1 * t2)) ** 2, lo, 1.0, limit=200)
        return val

    tail, _ = quad(inner, a, 1.0, limit=200)
    return prob_below + tail
