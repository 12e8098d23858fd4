"""Shared helpers: independent oracles (plain bisection, adaptive
quadrature of the raw CDF) and a random piecewise-distribution builder.

The oracles here deliberately avoid the library's own closed-form paths so
that agreement between the two is meaningful.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from infodesign.distributions import (Atom, LinearCdfSegment, ParetoSegment,
                                      PiecewiseDistribution)


def bisect(f, lo, hi, iters=200):
    """Plain bisection, independent of the library's root solver."""
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if (f(mid) > 0) == (flo > 0):
            lo = mid
            flo = f(mid)
        else:
            hi = mid
    return 0.5 * (lo + hi)


def quad_mean(g: PiecewiseDistribution) -> float:
    """mean = support_hi - ∫ G, with G evaluated pointwise and integrated
    adaptively piece by piece."""
    total = 0.0
    edges = sorted({g.support_lo, g.support_hi}
                   | {pc.location for pc in g.pieces if isinstance(pc, Atom)}
                   | {pc.lo for pc in g.pieces if not isinstance(pc, Atom)}
                   | {pc.hi for pc in g.pieces if not isinstance(pc, Atom)})
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            val, _ = quad(lambda x: g.cdf(x), a, b, epsabs=1e-13, epsrel=1e-13,
                          limit=200)
            total += val
    return g.support_hi - total


def quad_max_moment(g: PiecewiseDistribution, n: int) -> float:
    """∫ x dG^n = support_hi - ∫ G^n, adaptively."""
    total = 0.0
    edges = sorted({g.support_lo, g.support_hi}
                   | {pc.location for pc in g.pieces if isinstance(pc, Atom)}
                   | {pc.lo for pc in g.pieces if not isinstance(pc, Atom)}
                   | {pc.hi for pc in g.pieces if not isinstance(pc, Atom)})
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            val, _ = quad(lambda x: g.cdf(x) ** n, a, b, epsabs=1e-13,
                          epsrel=1e-13, limit=200)
            total += val
    return g.support_hi - total


def random_piecewise(rng: np.random.Generator, support=(0.0, 1.0),
                     max_pieces: int = 5) -> PiecewiseDistribution:
    """A valid random distribution mixing atoms, flats, linear and Pareto
    pieces on the given support."""
    lo, hi = support
    n_seg = int(rng.integers(1, max_pieces + 1))
    cuts = np.sort(rng.uniform(lo, hi, size=n_seg - 1))
    edges = np.concatenate([[lo], cuts, [hi]])
    kinds = [rng.choice(["linear", "pareto", "flat"]) for _ in range(n_seg)]
    # mass budget: segments + optional atoms at the edges
    weights = rng.uniform(0.1, 1.0, size=n_seg)
    weights[np.asarray(kinds) == "flat"] = 0.0
    atom_sites = [i for i in range(n_seg + 1) if rng.random() < 0.3]
    atom_w = {i: rng.uniform(0.1, 1.0) for i in atom_sites}
    total = weights.sum() + sum(atom_w.values())
    if total <= 0:
        return random_piecewise(rng, support, max_pieces)
    weights = weights / total
    atom_w = {i: w / total for i, w in atom_w.items()}

    pieces = []
    t = 0.0
    for i in range(n_seg):
        if i in atom_w:
            pieces.append(Atom(float(edges[i]), atom_w[i]))
            t += atom_w[i]
        a, b, m = float(edges[i]), float(edges[i + 1]), float(weights[i])
        if m <= 1e-12:
            pieces.append(LinearCdfSegment(a, b, t, 0.0))
            continue
        if kinds[i] == "pareto" and 1.0 - t - m > 1e-9:
            k = (a * (1.0 - t) - b * (1.0 - t - m)) / m
            scale = (1.0 - t) * (a - k)
            pieces.append(ParetoSegment(a, b, scale, k))
        else:
            pieces.append(LinearCdfSegment(a, b, t, m / (b - a)))
        t += m
    if n_seg in atom_w:
        pieces.append(Atom(float(edges[-1]), atom_w[n_seg]))
        t += atom_w[n_seg]
    if abs(t - 1.0) > 1e-12:
        # fold the rounding residue into a final atom at the top
        residue = 1.0 - t
        if residue > 1e-12:
            if pieces and isinstance(pieces[-1], Atom) and pieces[-1].location == hi:
                last = pieces.pop()
                pieces.append(Atom(hi, last.mass + residue))
            else:
                pieces.append(Atom(hi, residue))
    return PiecewiseDistribution(lo, hi, tuple(pieces))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def irregular_example():
    """Two linear-density pieces on [1, 2] whose virtual value needs ironing."""
    return PiecewiseDistribution(1.0, 2.0, (
        LinearCdfSegment(1.0, 4.0 / 3.0, 0.0, 2.0),
        LinearCdfSegment(4.0 / 3.0, 2.0, 2.0 / 3.0, 0.5),
    ))
