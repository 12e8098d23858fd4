"""Closed-form seller-worst and buyer-optimal information structures.

Both design problems reduce to choosing a virtual-value distribution with
at most two support points {k, 1}, an optional extra mass at signal zero,
and the mean constraint

    (1-k)*(1-theta)*(1 - log(1-theta) + log(1-theta0)) + k*(1-theta0) = p.

The solvers pick the regime from three thresholds (all functions of the
number of buyers n), solve the scalar root equations with bracketed
bisection plus a safeguarded Newton polish, and assemble the induced
truncated-Pareto signal distribution.

Numerical note: the positive-k seller regime has its auxiliary root at
theta = 1 - exp(-Theta(n)), which underflows 1 - theta in double precision
already for n around 40.  All root solves therefore work in u = 1 - theta
(log scale where needed) and every downstream formula consumes u directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from ._numerics import BracketingError, log1m, power_log_series, solve_bracketed
from .auctions import AuctionStats
from .distributions import (BinaryPrior, DomainError, PiecewiseDistribution,
                            two_point_distribution)

__all__ = [
    "TwoPointSolution",
    "Thresholds",
    "DesignSolution",
    "thresholds",
    "solve_seller_worst",
    "solve_buyer_optimal",
    "mean_via_F",
    "surplus_via_F",
    "two_point_revenue",
    "two_point_buyer_surplus",
    "step_mean",
    "step_max_moment",
    "step_revenue",
    "limit_behavior",
    "LimitBehaviorTable",
]


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TwoPointSolution:
    """Design variables of the reduced problem.

    ``theta0``: mass at signal 0; ``k``: low virtual value; ``theta``:
    virtual-value CDF level on [k, 1); ``top_mass`` carries 1 - theta
    exactly (theta itself may round to 1.0 for large n); ``x_scale`` is the
    Pareto scale (1-theta)*(1-k)/(1-theta0).
    """

    theta0: float
    k: float
    theta: float
    top_mass: float
    x_scale: float
    case_label: str

    def distribution(self) -> PiecewiseDistribution:
        return two_point_distribution(self.theta0, self.k, self.theta)


@dataclass(frozen=True)
class Thresholds:
    """Regime boundaries in the prior mean p, for a given number of buyers."""

    n: int
    p_s: float
    r_b: float
    p_b: float
    theta_star_u: Optional[float] = None  # 1 - theta* (seller, positive-k regime)
    theta1_u: Optional[float] = None      # 1 - theta_1 (buyer, zero-mass boundary)
    theta2_u: Optional[float] = None      # 1 - theta_2 (buyer, positive-k regime)


@dataclass(frozen=True)
class DesignSolution:
    objective: str
    n: int
    p: float
    params: TwoPointSolution
    G: PiecewiseDistribution
    stats: AuctionStats

    def to_dict(self) -> dict:
        return {
            "objective": self.objective,
            "n": self.n,
            "p": self.p,
            "case": self.params.case_label,
            "theta0": self.params.theta0,
            "k": self.params.k,
            "theta": self.params.theta,
            "x_scale": self.params.x_scale,
            "revenue": self.stats.revenue,
            "total_surplus": self.stats.total_surplus,
            "buyer_surplus": self.stats.buyer_surplus,
            "sale_probability": self.stats.sale_probability,
        }


# ---------------------------------------------------------------------------
# mean / surplus functionals of virtual-value distributions
# ---------------------------------------------------------------------------


def _pow1m(u: float, n: int) -> float:
    """(1-u)**n computed from u, stable for tiny u."""
    if u >= 1.0:
        return 0.0
    return math.exp(n * math.log1p(-u))


def _as_params(F) -> tuple:
    if isinstance(F, TwoPointSolution):
        return F.theta0, F.k, F.theta, F.top_mass
    theta0, k, theta = F
    return float(theta0), float(k), float(theta), 1.0 - float(theta)


def mean_via_F(F) -> float:
    """Mean of the signal distribution induced by a two-point virtual-value
    distribution (theta0, k, theta); equals mean(G) of the assembled
    truncated Pareto."""
    theta0, k, theta, u = _as_params(F)
    if u <= 0.0:
        return k * (1.0 - theta0)
    return ((1.0 - k) * u * (1.0 - math.log(u) + log1m(theta0))
            + k * (1.0 - theta0))


def surplus_via_F(F, n: int) -> float:
    """Expected highest of n signals, ∫ x dG^n, in two-point form."""
    theta0, k, theta, u = _as_params(F)
    if n < 1:
        raise DomainError("n must be >= 1")
    if u <= 0.0:
        inner = -1.0
    else:
        inner = (n * u * (power_log_series(theta0, n) - power_log_series(theta, n)
                          + log1m(theta0) - math.log(u))
                 - _pow1m(u, n))
    return -k * theta0 ** n + (1.0 - k) * inner + 1.0


def two_point_revenue(F, n: int) -> float:
    """Optimal-auction revenue 1 - (1-k)*theta^n - k*theta0^n."""
    theta0, k, theta, u = _as_params(F)
    return 1.0 - (1.0 - k) * _pow1m(u, n) - k * theta0 ** n


def two_point_buyer_surplus(F, n: int) -> float:
    """Buyers' surplus n(1-k)(1-theta)[sum_i (theta0^i - theta^i)/i +
    log((1-theta0)/(1-theta))]."""
    theta0, k, theta, u = _as_params(F)
    if u <= 0.0:
        return 0.0
    return n * (1.0 - k) * u * (power_log_series(theta0, n)
                                - power_log_series(theta, n)
                                + log1m(theta0) - math.log(u))


def step_mean(boundaries: Sequence[float], levels: Sequence[float],
              theta0: float) -> float:
    """Mean functional for a general step virtual-value CDF.

    ``levels[i]`` is the CDF value on [boundaries[i], boundaries[i+1]);
    ``theta0`` is the CDF's left limit at 0 (mass at signal zero).
    """
    total = 0.0
    l0 = log1m(theta0)
    for a, b, L in zip(boundaries[:-1], boundaries[1:], levels):
        if L >= 1.0:
            continue
        total += (b - a) * (1.0 - L) * (1.0 - log1m(L) + l0)
    return total


def step_max_moment(boundaries: Sequence[float], levels: Sequence[float],
                    theta0: float, n: int) -> float:
    """∫ x dG^n for a general step virtual-value CDF."""
    total = 1.0
    l0 = log1m(theta0)
    s0 = power_log_series(theta0, n)
    for a, b, L in zip(boundaries[:-1], boundaries[1:], levels):
        w = b - a
        if L >= 1.0:
            total -= w
            continue
        total += w * (n * (1.0 - L) * (s0 - power_log_series(L, n) + l0 - log1m(L))
                      - L ** n)
    return total


def step_revenue(boundaries: Sequence[float], levels: Sequence[float],
                 n: int) -> float:
    """Optimal-auction revenue 1 - ∫ F^n of a step virtual-value CDF."""
    total = 1.0
    for a, b, L in zip(boundaries[:-1], boundaries[1:], levels):
        total -= (b - a) * L ** n
    return total


# ---------------------------------------------------------------------------
# threshold root equations
# ---------------------------------------------------------------------------


def _rs_u(p: float) -> float:
    """u solving u*(1 - log u) = p; the k=0, no-zero-mass regime level."""
    f = lambda v: math.exp(v) * (1.0 - v) - p
    v = solve_bracketed(f, -600.0, 0.0)
    return math.exp(v)


def _seller_star_u(n: int) -> float:
    """u = 1-theta* for the seller positive-k regime (n >= 3), solved on a
    log scale: the root sits at u ~ exp(-n)."""

    def f(v):
        u = math.exp(v)
        one_minus_u = -math.expm1(v)
        return one_minus_u * v + n * (one_minus_u + u * v)

    hi = math.log(1.0 / (n - 1.0))
    lo = -(n + 50.0)
    while f(lo) >= 0.0:
        lo *= 2.0
    return math.exp(solve_bracketed(f, lo, hi))


def _ell1_u(n: int) -> float:
    """u = 1-theta_1: root of theta^{n-1} + sum theta^i/i + log(1-theta)."""

    def f(u):
        th = 1.0 - u
        return th ** (n - 1) + power_log_series(th, n) + math.log(u)

    h = sum(1.0 / i for i in range(1, n))
    lo = math.exp(-(2.0 + h + 1.0))
    while f(lo) >= 0.0:
        lo *= 0.5
    return solve_bracketed(f, lo, 1.0 / n)


def _ell2_u(n: int) -> float:
    """u = 1-theta_2: root of (1-theta) theta^{n-2} log(1-theta) +
    theta^{n-1} + sum theta^i/i + log(1-theta), for n >= 3."""

    def f(u):
        th = 1.0 - u
        lg = math.log(u)
        return (u * th ** (n - 2) * lg + th ** (n - 1)
                + power_log_series(th, n) + lg)

    h = sum(1.0 / i for i in range(1, n))
    lo = math.exp(-(3.0 + h))
    while f(lo) >= 0.0:
        lo *= 0.5
    return solve_bracketed(f, lo, 1.0 / (n - 1.0))


def _p_of_u(u: float) -> float:
    return u * (1.0 - math.log(u)) if u > 0.0 else 0.0


@lru_cache(maxsize=None)
def thresholds(n: int) -> Thresholds:
    """Regime thresholds p_s (seller positive-k), r_b (buyer mass-at-zero)
    and p_b (buyer positive-k) for n buyers.

    For n in {1, 2} the positive-k regimes are empty (the governing root
    equations have no interior solution), reported as p_s = p_b = 1; for
    n = 1 the zero-mass regime covers everything, reported as r_b = 0.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if n == 1:
        return Thresholds(n=1, p_s=1.0, r_b=0.0, p_b=1.0)
    u1 = _ell1_u(n)
    r_b = _p_of_u(u1)
    if n == 2:
        return Thresholds(n=2, p_s=1.0, r_b=r_b, p_b=1.0, theta1_u=u1)
    us = _seller_star_u(n)
    u2 = _ell2_u(n)
    return Thresholds(n=n, p_s=_p_of_u(us), r_b=r_b, p_b=_p_of_u(u2),
                      theta_star_u=us, theta1_u=u1, theta2_u=u2)


# ---------------------------------------------------------------------------
# solvers
# ---------------------------------------------------------------------------


def _check_np(n: int, p: float) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"number of buyers must be an integer >= 1, got {n!r}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"prior mean must lie strictly in (0, 1), got {p!r}")


def _make_solution(objective: str, n: int, p: float, theta0: float, k: float,
                   u: float, case_label: str) -> DesignSolution:
    theta = 1.0 - u
    x_scale = u * (1.0 - k) / (1.0 - theta0)
    params = TwoPointSolution(theta0=theta0, k=k, theta=theta, top_mass=u,
                              x_scale=x_scale, case_label=case_label)
    g = params.distribution()
    revenue = two_point_revenue(params, n)
    buyer = two_point_buyer_surplus(params, n)
    stats = AuctionStats(revenue=revenue, total_surplus=revenue + buyer,
                         buyer_surplus=buyer,
                         sale_probability=1.0 - theta0 ** n,
                         method="closed_form")
    return DesignSolution(objective=objective, n=n, p=p, params=params,
                          G=g, stats=stats)


def solve_seller_worst(n: int, p: float) -> DesignSolution:
    """The unique symmetric signal distribution minimising optimal-auction
    revenue: a truncated Pareto with virtual values {k, 1}, always sold.

    k = 0 when p <= p_s(n), otherwise k > 0 is pinned by the mean
    constraint at the fixed level theta*.
    """
    _check_np(n, p)
    th = thresholds(n)
    if p <= th.p_s:
        u = _rs_u(p)
        return _make_solution("seller_worst", n, p, 0.0, 0.0, u, "zero_k")
    u = th.theta_star_u
    k = (p - th.p_s) / (1.0 - th.p_s)
    return _make_solution("seller_worst", n, p, 0.0, k, u, "positive_k")


def _buyer_mass_at_zero(n: int, p: float, u_rs: float):
    """Solve the coupled (theta, theta0) system of the mass-at-zero regime.

    Given theta, the mean constraint pins theta0 in closed form; the
    remaining stationarity condition is a monotone-bracketed scalar root in
    theta on (1 - p, theta_rs)."""

    def theta0_of(theta):
        a = 1.0 - theta
        return 1.0 - a * math.exp(p / a - 1.0)

    def g(theta):
        a = 1.0 - theta
        c = 1.0 - p / a
        t0 = theta0_of(theta)
        return (power_log_series(t0, n) + c * t0 ** (n - 1)
                - (theta ** (n - 1) + power_log_series(theta, n) + c))

    lo = 1.0 - p + 1e-13
    hi = 1.0 - u_rs - 1e-13
    theta = solve_bracketed(g, lo, hi)
    return theta0_of(theta), theta


def solve_buyer_optimal(n: int, p: float) -> DesignSolution:
    """The unique symmetric signal distribution maximising the buyers'
    surplus under the optimal auction.

    Three regimes in p: mass at signal zero with virtual values {0, 1}
    (p < r_b), the plain {0, 1} Pareto (r_b <= p <= p_b), and a positive
    low virtual value {k, 1} (p > p_b)."""
    _check_np(n, p)
    th = thresholds(n)
    if p < th.r_b:
        u_rs = _rs_u(p)
        theta0, theta = _buyer_mass_at_zero(n, p, u_rs)
        return _make_solution("buyer_optimal", n, p, theta0, 0.0,
                              1.0 - theta, "mass_at_zero")
    if p <= th.p_b:
        u = _rs_u(p)
        return _make_solution("buyer_optimal", n, p, 0.0, 0.0, u, "zero_k")
    u = th.theta2_u
    k = (p - th.p_b) / (1.0 - th.p_b)
    return _make_solution("buyer_optimal", n, p, 0.0, k, u, "positive_k")


# ---------------------------------------------------------------------------
# limit behaviour in the number of buyers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LimitBehaviorTable:
    p: float
    n_grid: tuple
    k_s: tuple
    k_b: tuple
    top_mass_s: tuple
    top_mass_b: tuple
    k_s_nondecreasing: bool
    k_b_nondecreasing: bool
    masses_nonincreasing: bool
    k_b_below_k_s: bool

    def rows(self):
        for i, n in enumerate(self.n_grid):
            yield {"n": n, "k_s": self.k_s[i], "k_b": self.k_b[i],
                   "top_mass_s": self.top_mass_s[i],
                   "top_mass_b": self.top_mass_b[i]}


def limit_behavior(p: float, n_grid: Sequence[int]) -> LimitBehaviorTable:
    """Track k and the mass at signal 1 along an increasing grid of n.

    Both optimal structures drift toward no disclosure: the low virtual
    value rises to p while the mass at 1 dies out.
    """
    ns = list(n_grid)
    if any(b <= a for a, b in zip(ns[:-1], ns[1:])):
        raise DomainError("n_grid must be strictly increasing")
    k_s, k_b, m_s, m_b = [], [], [], []
    for n in ns:
        s = solve_seller_worst(n, p)
        b = solve_buyer_optimal(n, p)
        k_s.append(s.params.k)
        k_b.append(b.params.k)
        m_s.append(s.params.top_mass)
        m_b.append(b.params.top_mass)
    tol = 1e-12
    nondec = lambda xs: all(b >= a - tol for a, b in zip(xs[:-1], xs[1:]))
    noninc = lambda xs: all(b <= a + tol for a, b in zip(xs[:-1], xs[1:]))
    both_pos = [i for i in range(len(ns)) if k_s[i] > 0 and k_b[i] > 0]
    return LimitBehaviorTable(
        p=p, n_grid=tuple(ns), k_s=tuple(k_s), k_b=tuple(k_b),
        top_mass_s=tuple(m_s), top_mass_b=tuple(m_b),
        k_s_nondecreasing=nondec(k_s),
        k_b_nondecreasing=nondec(k_b),
        masses_nonincreasing=noninc(m_s) and noninc(m_b),
        k_b_below_k_s=all(k_b[i] < k_s[i] + tol for i in both_pos),
    )
