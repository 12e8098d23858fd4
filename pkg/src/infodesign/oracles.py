"""Brute-force verification of the closed-form optima.

Nothing here trusts the solvers: the two-point oracle grids over the raw
design variables with the mean constraint eliminated by monotone bisection,
the random-F oracle throws feasible step CDFs with richer support at both
objectives, and the second-price oracle checks that full revelation
minimises revenue among random garblings of a discrete prior.  The oracles
falsify; they do not prove.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .distributions import (DomainError, PiecewiseDistribution, SampleStream,
                            Atom, LinearCdfSegment, from_atoms, is_mps)
from .ironing import iron
from .solvers import (TwoPointSolution, solve_buyer_optimal,
                      solve_seller_worst, step_mean, step_max_moment,
                      step_revenue)

__all__ = [
    "GridSpec",
    "DiscreteF",
    "OracleReport",
    "TwoPointOracleResult",
    "RandomSearchResult",
    "oracle_two_point",
    "oracle_random_F",
    "oracle_second_price_mps",
]


@dataclass(frozen=True)
class GridSpec:
    """Grid resolution per design variable plus zoom-in rounds; each round
    shrinks the search box tenfold around the incumbent."""

    resolution: int = 64
    refinement_rounds: int = 3

    def __post_init__(self):
        if self.resolution < 64:
            raise DomainError("grid resolution must be >= 64")
        if self.refinement_rounds < 0:
            raise DomainError("refinement_rounds must be >= 0")


@dataclass(frozen=True)
class DiscreteF:
    """Step virtual-value CDF: mass ``theta0`` at signal zero plus point
    masses ``masses`` on virtual values ``values`` in [0, 1]."""

    values: tuple
    masses: tuple
    theta0: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        m = np.asarray(self.masses, dtype=float)
        if len(v) != len(m) or len(v) == 0:
            raise DomainError("values and masses must align and be nonempty")
        if np.any(np.diff(v) < 0) or v[0] < 0.0 or v[-1] > 1.0:
            raise DomainError("values must be ascending within [0, 1]")
        if np.any(m < -1e-15) or self.theta0 < -1e-15:
            raise DomainError("masses must be nonnegative")
        if abs(self.theta0 + m.sum() - 1.0) > 1e-12:
            raise DomainError("masses plus theta0 must sum to 1 within 1e-12")

    def steps(self):
        """(boundaries, levels) of the CDF on [0, 1]."""
        v = np.asarray(self.values, dtype=float)
        m = np.asarray(self.masses, dtype=float)
        inner = v[v < 1.0]
        boundaries = np.concatenate([[0.0], inner[inner > 0.0], [1.0]])
        levels = self.theta0 + np.array(
            [m[v <= b].sum() for b in boundaries[:-1]])
        return boundaries, levels

    def mean(self) -> float:
        b, l = self.steps()
        return step_mean(b, l, self.theta0)

    def revenue(self, n: int) -> float:
        b, l = self.steps()
        return step_revenue(b, l, n)

    def buyer_surplus(self, n: int) -> float:
        b, l = self.steps()
        return step_max_moment(b, l, self.theta0, n) - step_revenue(b, l, n)


@dataclass(frozen=True)
class OracleReport:
    claim: str
    status: str          # "confirmed" | "violated" | "precondition_unmet"
    max_gap: float
    trials: int

    def to_dict(self) -> dict:
        return {"claim": self.claim, "status": self.status,
                "max_gap": self.max_gap, "trials": self.trials}


# ---------------------------------------------------------------------------
# exhaustive two-point grid
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TwoPointOracleResult:
    params: TwoPointSolution
    value: float            # objective at the incumbent
    objective: str
    final_step: tuple       # last grid spacing per (theta0, k)


def _mean_residual(theta0, k, theta, p):
    u = 1.0 - theta
    lg = np.where(u > 0.0, np.log(np.where(u > 0.0, u, 1.0)), 0.0)
    inner = np.where(u > 0.0, u * (1.0 - lg + np.log1p(-theta0)), 0.0)
    return (1.0 - k) * inner + k * (1.0 - theta0) - p


def _series_grid(theta, n):
    out = np.zeros_like(theta)
    for i in range(1, n):
        out += theta ** i / i
    return out


def _objective_grid(theta0, k, theta, n, objective):
    if objective == "seller_worst":
        return 1.0 - (1.0 - k) * theta ** n - k * theta0 ** n
    u = 1.0 - theta
    lg_u = np.where(u > 0.0, np.log(np.where(u > 0.0, u, 1.0)), 0.0)
    s = (_series_grid(theta0, n) - _series_grid(theta, n)
         + np.log1p(-theta0) - lg_u)
    return np.where(u > 0.0, n * (1.0 - k) * u * s, 0.0)


def oracle_two_point(n: int, p: float, objective: str,
                     spec: GridSpec = GridSpec()) -> TwoPointOracleResult:
    """Grid-plus-refinement search over (theta0, k) with theta eliminated
    through the mean constraint, which is monotone in theta.

    ``objective`` is "seller_worst" (minimise revenue) or "buyer_optimal"
    (maximise the buyers' surplus).  The incumbent must match the closed
    form within the final grid resolution.
    """
    if objective not in ("seller_worst", "buyer_optimal"):
        raise DomainError(f"unknown objective {objective!r}")
    res = spec.resolution
    t0_lo, t0_hi = 0.0, max(1.0 - p - 1e-9, 0.0)
    k_lo, k_hi = 0.0, max(p - 1e-9, 0.0)
    best = None
    for _ in range(spec.refinement_rounds + 1):
        t0 = np.linspace(t0_lo, t0_hi, res)
        kk = np.linspace(k_lo, k_hi, res)
        T0, K = np.meshgrid(t0, kk, indexing="ij")
        feas = (K * (1.0 - T0) <= p) & (p <= 1.0 - T0) & (T0 < 1.0) & (K < 1.0)
        T0f, Kf = T0[feas], K[feas]
        lo = np.maximum(T0f, 0.0)
        hi = np.full_like(T0f, 1.0 - 1e-15)
        flo = _mean_residual(T0f, Kf, lo, p)
        a, b = lo.copy(), hi.copy()
        fa = flo
        for _ in range(80):
            m = 0.5 * (a + b)
            fm = _mean_residual(T0f, Kf, m, p)
            left = (fm > 0.0) == (fa > 0.0)
            a = np.where(left, m, a)
            fa = np.where(left, fm, fa)
            b = np.where(left, b, m)
        TH = 0.5 * (a + b)
        ok = np.abs(_mean_residual(T0f, Kf, TH, p)) < 1e-8
        vals = _objective_grid(T0f, Kf, TH, n, objective)
        sign = 1.0 if objective == "seller_worst" else -1.0
        vals = np.where(ok, vals, np.inf * sign)
        idx = int(np.argmin(sign * vals))
        cand = (float(T0f[idx]), float(Kf[idx]), float(TH[idx]), float(vals[idx]))
        if best is None or sign * cand[3] < sign * best[3]:
            best = cand
        # zoom the box tenfold around the incumbent
        w0 = (t0_hi - t0_lo) / 10.0
        wk = (k_hi - k_lo) / 10.0
        t0_lo = max(best[0] - w0 / 2.0, 0.0)
        t0_hi = min(best[0] + w0 / 2.0, max(1.0 - p - 1e-9, 0.0))
        k_lo = max(best[1] - wk / 2.0, 0.0)
        k_hi = min(best[1] + wk / 2.0, max(p - 1e-9, 0.0))
    theta0, k, theta, value = best
    u = 1.0 - theta
    params = TwoPointSolution(theta0=theta0, k=k, theta=theta, top_mass=u,
                              x_scale=u * (1.0 - k) / (1.0 - theta0),
                              case_label="oracle")
    step = ((t0_hi - t0_lo) / max(res - 1, 1), (k_hi - k_lo) / max(res - 1, 1))
    return TwoPointOracleResult(params=params, value=value,
                                objective=objective, final_step=step)


# ---------------------------------------------------------------------------
# random richer-support search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RandomSearchResult:
    objective: str
    n: int
    p: float
    trials: int
    accepted: int
    closed_form_value: float
    best_value: float
    max_improvement: float
    best: Optional[DiscreteF]

    def report(self) -> OracleReport:
        status = "confirmed" if self.max_improvement <= 1e-6 else "violated"
        return OracleReport(claim=f"two_point_optimality_{self.objective}",
                            status=status, max_gap=self.max_improvement,
                            trials=self.trials)


def oracle_random_F(n: int, p: float, objective: str, trials: int,
                    support_points: int, s: SampleStream) -> RandomSearchResult:
    """Sample random feasible step CDFs with ``support_points`` >= 3 support
    values and check that none improves on the two-point optimum.

    Feasibility projection: non-top masses are scaled by a common factor
    and the top-value mass absorbs the remainder; the scale is bisected to
    meet the mean constraint, and draws whose feasible range misses p are
    rejected.
    """
    if support_points < 3:
        raise DomainError("richer-support search needs support_points >= 3")
    if objective == "seller_worst":
        sol = solve_seller_worst(n, p)
        closed = sol.stats.revenue
        sign = 1.0   # improvement = closed - value (lower revenue is better)
    elif objective == "buyer_optimal":
        sol = solve_buyer_optimal(n, p)
        closed = sol.stats.buyer_surplus
        sign = -1.0  # improvement = value - closed
    else:
        raise DomainError(f"unknown objective {objective!r}")

    if trials == 0:
        pr = sol.params
        vals = (pr.k, 1.0) if pr.k > 0.0 else (1.0,)
        masses = ((pr.theta - pr.theta0, pr.top_mass) if pr.k > 0.0
                  else (1.0 - pr.theta0,))
        inc = DiscreteF(values=vals, masses=masses, theta0=pr.theta0)
        return RandomSearchResult(objective=objective, n=n, p=p, trials=0,
                                  accepted=0, closed_form_value=closed,
                                  best_value=closed, max_improvement=0.0,
                                  best=inc)

    gen = s.generator()
    m = support_points
    best_improvement = -np.inf
    best_f = None
    best_val = closed
    accepted = 0

    batch = max(1, min(trials, 4096))
    done = 0
    while done < trials:
        t = min(batch, trials - done)
        done += t
        knots = np.sort(gen.random((t, m - 1)), axis=1)  # interior values
        has_mass0 = gen.random(t) < 0.5
        theta0 = np.where(has_mass0,
                          gen.random(t) * np.maximum(1.0 - p - 0.01, 0.0), 0.0)
        w = gen.random((t, m - 1)) + 1e-3  # raw masses on the interior knots
        # boundaries per row: 0, knots..., 1 ; levels: theta0 + t*cumsum(w)
        bounds = np.concatenate([np.zeros((t, 1)), knots, np.ones((t, 1))], axis=1)
        widths = np.diff(bounds, axis=1)
        csum = np.cumsum(w, axis=1)
        top_budget = 1.0 - theta0
        scale_hi = top_budget / csum[:, -1]

        def mean_of(scale):
            levels = np.concatenate([theta0[:, None],
                                     theta0[:, None] + scale[:, None] * csum],
                                    axis=1)
            one_minus = np.clip(1.0 - levels, 1e-300, 1.0)
            integrand = ((one_minus)
                         * (1.0 - np.log(one_minus) + np.log1p(-theta0)[:, None]))
            return (widths * integrand).sum(axis=1)

        lo = np.zeros(t)
        hi = scale_hi
        m_lo = mean_of(lo)        # = 1 - theta0
        m_hi = mean_of(hi)
        feasible = (m_hi <= p) & (p <= m_lo)
        a, b = lo.copy(), hi.copy()
        for _ in range(70):
            mid = 0.5 * (a + b)
            val = mean_of(mid)
            high = val > p          # mean decreasing in scale
            a = np.where(high, mid, a)
            b = np.where(high, b, mid)
        scale = 0.5 * (a + b)
        levels = np.concatenate([theta0[:, None],
                                 theta0[:, None] + scale[:, None] * csum],
                                axis=1)

        for i in range(t):
            if not feasible[i]:
                continue
            accepted += 1
            bnd = bounds[i]
            lev = levels[i]
            if objective == "seller_worst":
                val = step_revenue(bnd, lev, n)
                improvement = closed - val
            else:
                val = (step_max_moment(bnd, lev, theta0[i], n)
                       - step_revenue(bnd, lev, n))
                improvement = val - closed
            if improvement > best_improvement:
                best_improvement = improvement
                best_val = val
                top_mass = 1.0 - lev[-1]
                vals_i = tuple(knots[i]) + (1.0,)
                masses_i = tuple(scale[i] * w[i]) + (top_mass,)
                best_f = DiscreteF(values=vals_i,
                                   masses=tuple(float(x) for x in masses_i),
                                   theta0=float(theta0[i]))

    if best_f is None:
        best_improvement = 0.0
    return RandomSearchResult(objective=objective, n=n, p=p, trials=trials,
                              accepted=accepted, closed_form_value=closed,
                              best_value=best_val,
                              max_improvement=float(best_improvement),
                              best=best_f)


# ---------------------------------------------------------------------------
# second-price / full-revelation oracle
# ---------------------------------------------------------------------------


def _discrete_atoms(g: PiecewiseDistribution):
    atoms = []
    for pc in g.pieces:
        if isinstance(pc, Atom):
            atoms.append((pc.location, pc.mass))
        elif isinstance(pc, LinearCdfSegment) and pc.slope == 0.0:
            continue
        else:
            raise DomainError("oracle needs a purely discrete prior")
    return atoms


def _expected_min_of_two(xs, ms):
    """E[min of two iid draws] for a discrete distribution on [0, 1]."""
    xs = np.asarray(xs, dtype=float)
    cum = np.cumsum(ms)
    # ∫ (1 - G)^2 over [0, 1]
    knots = np.concatenate([[0.0], xs, [1.0]])
    levels = np.concatenate([[0.0], cum])
    total = 0.0
    for a, b, L in zip(knots[:-1], knots[1:], levels):
        total += (b - a) * (1.0 - L) ** 2
    return total


def _random_garbling(xs, ms, gen):
    """A random mean-preserving contraction: pool random contiguous groups
    to their barycenters, then mix back toward the original with random
    weight."""
    k = len(xs)
    n_groups = int(gen.integers(1, k + 1))
    cuts = np.sort(gen.choice(np.arange(1, k), size=min(n_groups - 1, k - 1),
                              replace=False)) if n_groups > 1 else np.array([], dtype=int)
    bounds = np.concatenate([[0], cuts, [k]])
    pooled_x, pooled_m = [], []
    for a, b in zip(bounds[:-1], bounds[1:]):
        mass = ms[a:b].sum()
        bary = float((xs[a:b] * ms[a:b]).sum() / mass)
        pooled_x.append(bary)
        pooled_m.append(float(mass))
    lam = float(gen.random())
    # mixture of the prior and the pooled contraction is itself a contraction
    mix_x = list(xs) + pooled_x
    mix_m = list((1.0 - lam) * np.asarray(ms)) + list(lam * np.asarray(pooled_m))
    agg = {}
    for x, m in zip(mix_x, mix_m):
        if m > 1e-15:
            agg[x] = agg.get(x, 0.0) + m
    items = sorted(agg.items())
    return (np.asarray([x for x, _ in items]),
            np.asarray([m for _, m in items]))


def oracle_second_price_mps(H: PiecewiseDistribution, n: int = 2,
                            trials: int = 1000,
                            s: SampleStream = SampleStream(0)) -> OracleReport:
    """Check that full revelation minimises reserve-free second-price
    revenue over random garblings of a discrete prior with nonnegative,
    regular virtual values (n = 2 only: revenue is then the expected
    minimum, and garbling shrinks the expected maximum of a fixed-mean
    pair)."""
    if n != 2:
        raise DomainError("the second-price oracle covers n = 2")
    atoms = _discrete_atoms(H)
    xs = np.asarray([a for a, _ in atoms])
    ms = np.asarray([m for _, m in atoms])
    prof = iron(H)
    phis = [prof.evaluate(x) for x in xs]
    if any(v < -1e-12 for v in phis) or any(
            b < a - 1e-12 for a, b in zip(phis[:-1], phis[1:])):
        return OracleReport(claim="full_revelation_minimizes_second_price",
                            status="precondition_unmet", max_gap=float("nan"),
                            trials=0)
    base = _expected_min_of_two(xs, ms)
    gen = s.generator()
    max_gap = 0.0
    for _ in range(trials):
        gx, gm = _random_garbling(xs, ms, gen)
        rev = _expected_min_of_two(gx, gm)
        max_gap = max(max_gap, base - rev)
    status = "confirmed" if max_gap <= 1e-9 else "violated"
    return OracleReport(claim="full_revelation_minimizes_second_price",
                        status=status, max_gap=float(max_gap), trials=trials)
