"""Information design in optimal auctions.

Solvers for seller-worst and buyer-optimal signal structures under a
binary prior, Myerson ironing and auction evaluation over piecewise
distributions, and brute-force oracles that verify the closed forms.
"""

from .asymmetric import (AsymLimitResult, AsymmetricProfile,
                         AsymTwoBuyerResult, ConsistencyReport,
                         asym_buyer_limit, asym_buyer_search_n2,
                         asym_prior_seller_worst, averaging_revenue_gap,
                         interdependence_consistency)
from .auctions import (AuctionStats, UnsupportedConfiguration, best_reserve,
                       monte_carlo_auction, optimal_auction_eval,
                       second_price_eval)
from .distributions import (Atom, BinaryPrior, DomainError, LinearCdfSegment,
                            ParetoSegment, PiecewiseDistribution, SampleStream,
                            degenerate, from_atoms, is_mps,
                            two_point_distribution)
from .ironing import IronedProfile, iron
from .oracles import (DiscreteF, GridSpec, OracleReport, oracle_random_F,
                      oracle_second_price_mps, oracle_two_point)
from .solvers import (DesignSolution, Thresholds, TwoPointSolution,
                      limit_behavior, mean_via_F, solve_buyer_optimal,
                      solve_seller_worst, surplus_via_F, thresholds,
                      two_point_buyer_surplus, two_point_revenue)

__all__ = [
    "Atom",
    "AuctionStats",
    "AsymLimitResult",
    "AsymmetricProfile",
    "AsymTwoBuyerResult",
    "BinaryPrior",
    "ConsistencyReport",
    "DesignSolution",
    "DiscreteF",
    "DomainError",
    "GridSpec",
    "IronedProfile",
    "LinearCdfSegment",
    "OracleReport",
    "ParetoSegment",
    "PiecewiseDistribution",
    "SampleStream",
    "Thresholds",
    "TwoPointSolution",
    "UnsupportedConfiguration",
    "asym_buyer_limit",
    "asym_buyer_search_n2",
    "asym_prior_seller_worst",
    "averaging_revenue_gap",
    "best_reserve",
    "degenerate",
    "from_atoms",
    "interdependence_consistency",
    "iron",
    "is_mps",
    "limit_behavior",
    "mean_via_F",
    "monte_carlo_auction",
    "optimal_auction_eval",
    "oracle_random_F",
    "oracle_second_price_mps",
    "oracle_two_point",
    "second_price_eval",
    "solve_buyer_optimal",
    "solve_seller_worst",
    "surplus_via_F",
    "thresholds",
    "two_point_buyer_surplus",
    "two_point_distribution",
    "two_point_revenue",
]
