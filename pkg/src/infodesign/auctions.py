"""Revenue and surplus of the optimal auction and of second-price auctions.

The optimal-auction evaluator implements the allocation that gives the good
to the buyer with the highest nonnegative ironed virtual value, breaking
virtual-value ties toward the highest signal (and splitting residual ties
evenly, which never changes revenue or surplus).  Closed-form evaluation
integrates the ironed virtual value against the highest-order-statistic
distribution in quantile space; Monte Carlo evaluation samples the actual
allocation and also covers asymmetric profiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .distributions import DomainError, PiecewiseDistribution, SampleStream
from .ironing import IronedProfile, iron

__all__ = [
    "AuctionStats",
    "UnsupportedConfiguration",
    "optimal_auction_eval",
    "second_price_eval",
    "best_reserve",
    "monte_carlo_auction",
]

DEFAULT_TRIALS = 10 ** 6
_MC_BATCH = 250_000


class UnsupportedConfiguration(RuntimeError):
    """Requested evaluation method cannot handle the given profile."""


@dataclass(frozen=True)
class AuctionStats:
    """Auction outcome summary.

    ``method`` is one of "closed_form", "quadrature", "monte_carlo"; in the
    Monte Carlo case ``std_error`` holds per-field standard errors.
    """

    revenue: float
    total_surplus: float
    buyer_surplus: float
    sale_probability: float
    method: str
    std_error: Optional[dict] = None

    def to_dict(self) -> dict:
        d = {
            "revenue": self.revenue,
            "total_surplus": self.total_surplus,
            "buyer_surplus": self.buyer_surplus,
            "sale_probability": self.sale_probability,
            "method": self.method,
        }
        if self.std_error is not None:
            d["std_error"] = dict(self.std_error)
        return d


# -- closed-form helpers ------------------------------------------------------


def _envelope_revenue(profile: IronedProfile, n: int) -> float:
    """∫ max(phi-hat, 0) dG^n for one distribution shared by n buyers."""
    tau0 = profile.tau_nonneg
    total = 0.0
    for (ta, tb, a, b, c) in profile.env_pieces:
        lo = max(ta, tau0)
        if tb <= lo:
            continue
        # slope b + 2 c tau integrated against d(tau^n)
        total += b * (tb ** n - lo ** n)
        total += 2.0 * c * n / (n + 1.0) * (tb ** (n + 1) - lo ** (n + 1))
    return total


def optimal_auction_eval(profile: Sequence[PiecewiseDistribution],
                         n_effective: int,
                         method: str = "closed_form",
                         *,
                         trials: int = DEFAULT_TRIALS,
                         stream: Optional[SampleStream] = None) -> AuctionStats:
    """Evaluate the optimal auction on a profile of signal distributions.

    A single-element profile is shared by all ``n_effective`` buyers;
    otherwise the profile length must equal ``n_effective``.  The closed
    form is only available in the symmetric case (every buyer's ironed
    virtual value is then a monotone function of the common signal).
    """
    gs = list(profile)
    if n_effective < 1:
        raise DomainError("need at least one buyer")
    if len(gs) not in (1, n_effective):
        raise DomainError("profile must have one distribution or n_effective of them")
    symmetric = len(gs) == 1 or all(g == gs[0] for g in gs)
    if method == "monte_carlo":
        return monte_carlo_auction(gs, n_effective, trials=trials, stream=stream)
    if not symmetric:
        raise UnsupportedConfiguration(
            "closed-form/quadrature evaluation requires a symmetric profile; "
            "use method='monte_carlo'")
    g = gs[0]
    prof = iron(g)
    n = n_effective
    tau0 = prof.tau_nonneg
    if method == "closed_form":
        revenue = _envelope_revenue(prof, n)
        surplus = g._integrate_against_power(n, tau0)
    elif method == "quadrature":
        revenue, surplus = _quadrature_eval(g, prof, n)
    else:
        raise DomainError(f"unknown method {method!r}")
    sale = 1.0 - tau0 ** n
    return AuctionStats(revenue=revenue, total_surplus=surplus,
                        buyer_surplus=surplus - revenue,
                        sale_probability=sale, method=method)


def _quadrature_eval(g: PiecewiseDistribution, prof: IronedProfile, n: int):
    from scipy.integrate import quad

    tau0 = prof.tau_nonneg
    revenue = 0.0
    surplus = 0.0
    for kind, ta, tb, data in g.tau_pieces:
        lo = max(ta, tau0)
        if tb <= lo:
            continue
        if kind == "atom":
            phi = prof.phi_at_tau(0.5 * (ta + tb))
            revenue += max(phi, 0.0) * (tb ** n - lo ** n)
            surplus += data * (tb ** n - lo ** n)
            continue
        if kind == "affine":
            A, B = data
            x_of = lambda t: A + B * t
        else:
            shift, scale = data
            x_of = lambda t: shift + scale / (1.0 - t)
        r, _ = quad(lambda t: max(prof.phi_at_tau(t), 0.0) * n * t ** (n - 1),
                    lo, tb, limit=200)
        s, _ = quad(lambda t: x_of(t) * n * t ** (n - 1), lo, tb, limit=200)
        revenue += r
        surplus += s
    return revenue, surplus


# -- second-price auction ------------------------------------------------------


def second_price_eval(g: PiecewiseDistribution, n: int, reserve: float = 0.0,
                      method: str = "closed_form") -> AuctionStats:
    """Second-price auction with a reserve: the winner pays
    max(second-highest signal, reserve) whenever the highest signal clears
    the reserve.  A reserve below the support acts like reserve zero.
    """
    if n < 2:
        raise DomainError("second-price evaluation needs n >= 2")
    r = max(reserve, g.support_lo)
    tau_r = float(g.cdf_left(r)) if r > g.support_lo else 0.0

    def K(t):
        return n * t ** (n - 1) - (n - 1) * t ** n

    def S2(t):
        return (n - 1) * t ** n - n * (n - 1) / (n + 1.0) * t ** (n + 1)

    if method == "closed_form":
        pay_second = 0.0
        for kind, ta, tb, data in g.tau_pieces:
            lo = max(ta, tau_r)
            if tb <= lo:
                continue
            dK = K(tb) - K(lo)
            if kind == "atom":
                pay_second += data * dK
            elif kind == "affine":
                A, B = data
                pay_second += A * dK + B * (S2(tb) - S2(lo))
            else:
                shift, scale = data
                pay_second += shift * dK + scale * n * (tb ** (n - 1) - lo ** (n - 1))
        revenue = r * (K(tau_r) - tau_r ** n) + pay_second
    elif method == "quadrature":
        from scipy.integrate import quad

        pay_second = 0.0
        for kind, ta, tb, data in g.tau_pieces:
            lo = max(ta, tau_r)
            if tb <= lo:
                continue
            if kind == "atom":
                pay_second += data * (K(tb) - K(lo))
                continue
            if kind == "affine":
                A, B = data
                x_of = lambda t: A + B * t
            else:
                shift, scale = data
                x_of = lambda t: shift + scale / (1.0 - t)
            v, _ = quad(lambda t: x_of(t) * n * (n - 1) * t ** (n - 2) * (1.0 - t),
                        lo, tb, limit=200)
            pay_second += v
        revenue = r * (K(tau_r) - tau_r ** n) + pay_second
    else:
        raise DomainError(f"unknown method {method!r}")

    surplus = g._integrate_against_power(n, tau_r)
    sale = 1.0 - tau_r ** n
    return AuctionStats(revenue=revenue, total_surplus=surplus,
                        buyer_surplus=surplus - revenue,
                        sale_probability=sale, method=method)


def best_reserve(g: PiecewiseDistribution, n: int, num: int = 401):
    """Scalar scan for the revenue-maximising reserve; returns (reserve, stats)."""
    grid = np.linspace(g.support_lo, g.support_hi, num)
    best_r, best = 0.0, None
    for r in grid:
        stats = second_price_eval(g, n, reserve=float(r))
        if best is None or stats.revenue > best.revenue:
            best_r, best = float(r), stats
    return best_r, best


# -- Monte Carlo ---------------------------------------------------------------


def monte_carlo_auction(profile: Sequence[PiecewiseDistribution],
                        n_effective: int,
                        *,
                        trials: int = DEFAULT_TRIALS,
                        stream: Optional[SampleStream] = None,
                        batch: int = _MC_BATCH) -> AuctionStats:
    """Simulate the optimal auction; works for asymmetric profiles.

    Trials are partitioned into fixed-size batches, each drawing from its own
    derived stream, so results are reproducible for a given (stream, trials)
    regardless of how the work is scheduled.
    """
    if stream is None:
        stream = SampleStream(0)
    gs = list(profile)
    if len(gs) == 1:
        gs = gs * n_effective
    if len(gs) != n_effective:
        raise DomainError("profile must have one distribution or n_effective of them")
    profs = [iron(g) for g in gs]

    sums = np.zeros(4)
    sumsq = np.zeros(4)
    done = 0
    chunk_index = 0
    while done < trials:
        m = min(batch, trials - done)
        rng_stream = stream.shifted(chunk_index)
        gen = rng_stream.generator()
        u = gen.random((n_effective, m))
        x = np.empty_like(u)
        phi = np.empty_like(u)
        for i in range(n_effective):
            x[i] = gs[i].quantile(u[i])
            phi[i] = profs[i].evaluate(x[i])
        win_phi = phi.max(axis=0)
        sold = win_phi >= 0.0
        x_masked = np.where(phi == win_phi[None, :], x, -np.inf)
        win_x = x_masked.max(axis=0)
        revenue_t = np.where(sold, np.maximum(win_phi, 0.0), 0.0)
        surplus_t = np.where(sold, win_x, 0.0)
        buyer_t = surplus_t - revenue_t
        sale_t = sold.astype(float)
        for j, arr in enumerate((revenue_t, surplus_t, buyer_t, sale_t)):
            sums[j] += arr.sum()
            sumsq[j] += (arr * arr).sum()
        done += m
        chunk_index += 1

    means = sums / trials
    var = np.maximum(sumsq / trials - means ** 2, 0.0)
    se = np.sqrt(var / trials)
    return AuctionStats(
        revenue=float(means[0]),
        total_surplus=float(means[1]),
        buyer_surplus=float(means[2]),
        sale_probability=float(means[3]),
        method="monte_carlo",
        std_error={
            "revenue": float(se[0]),
            "total_surplus": float(se[1]),
            "buyer_surplus": float(se[2]),
            "sale_probability": float(se[3]),
        },
    )
