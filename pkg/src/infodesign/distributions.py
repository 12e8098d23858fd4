"""Piecewise signal distributions on a bounded interval.

A distribution is assembled from three kinds of pieces that tile the
support: point masses (``Atom``), truncated-Pareto segments with CDF
``1 - scale/(x - shift)`` (constant virtual value ``shift`` below their
upper end), and linear-CDF segments (``slope >= 0``; slope zero encodes a
flat stretch with no mass).  Everything downstream -- ironing, auction
evaluation, the information-design solvers -- works off this grammar.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np

from ._numerics import power_log_series

__all__ = [
    "DomainError",
    "Atom",
    "ParetoSegment",
    "LinearCdfSegment",
    "Piece",
    "PiecewiseDistribution",
    "BinaryPrior",
    "SampleStream",
    "is_mps",
    "degenerate",
    "from_atoms",
    "two_point_distribution",
]

_TOL = 1e-12


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


@dataclass(frozen=True)
class Atom:
    location: float
    mass: float


@dataclass(frozen=True)
class ParetoSegment:
    """CDF value ``1 - scale/(x - shift)`` on ``[lo, hi)``; requires shift < lo."""

    lo: float
    hi: float
    scale: float
    shift: float


@dataclass(frozen=True)
class LinearCdfSegment:
    """CDF value ``cdf_lo + slope*(x - lo)`` on ``[lo, hi)``."""

    lo: float
    hi: float
    cdf_lo: float
    slope: float


Piece = Union[Atom, ParetoSegment, LinearCdfSegment]


@dataclass(frozen=True)
class SampleStream:
    """Deterministic random stream: identical (seed, stream_index) always
    reproduces the same sample sequence."""

    seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed,
                                    spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.PCG64(ss))

    def shifted(self, offset: int) -> "SampleStream":
        return SampleStream(self.seed, self.stream_index + offset)


@dataclass(frozen=True)
class BinaryPrior:
    """Bernoulli prior on {0, 1} with mean p in (0, 1)."""

    p: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"binary prior mean must lie in (0,1), got {self.p}")

    def distribution(self) -> "PiecewiseDistribution":
        return from_atoms([(0.0, 1.0 - self.p), (1.0, self.p)], support=(0.0, 1.0))


@dataclass(frozen=True)
class PiecewiseDistribution:
    """A CDF on ``[support_lo, support_hi]`` built from ordered pieces.

    Pieces must tile the support exactly; the running CDF must be
    nondecreasing, start at 0 and reach 1 at ``support_hi`` (within 1e-12).
    Instances are immutable and safe to share across threads.
    """

    support_lo: float
    support_hi: float
    pieces: tuple

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        self._validate()

    # -- validation ---------------------------------------------------------

    def _validate(self) -> None:
        if not self.support_hi >= self.support_lo:
            raise DomainError("support_hi must be >= support_lo")
        if not self.pieces:
            raise DomainError("a distribution needs at least one piece")
        x = self.support_lo
        t = 0.0
        for pc in self.pieces:
            if isinstance(pc, Atom):
                if abs(pc.location - x) > _TOL:
                    raise DomainError(f"atom at {pc.location} does not sit at the running edge {x}")
                if not 0.0 < pc.mass <= 1.0 + _TOL:
                    raise DomainError(f"atom mass {pc.mass} outside (0,1]")
                t += pc.mass
            elif isinstance(pc, LinearCdfSegment):
                if abs(pc.lo - x) > _TOL or pc.hi <= pc.lo:
                    raise DomainError("linear segment does not tile the support")
                if pc.slope < 0.0:
                    raise DomainError("linear segment slope must be >= 0")
                if abs(pc.cdf_lo - t) > 1e-9:
                    raise DomainError(
                        f"linear segment cdf_lo {pc.cdf_lo} != running cdf {t}")
                t = pc.cdf_lo + pc.slope * (pc.hi - pc.lo)
                x = pc.hi
            elif isinstance(pc, ParetoSegment):
                if abs(pc.lo - x) > _TOL or pc.hi <= pc.lo:
                    raise DomainError("pareto segment does not tile the support")
                if pc.scale <= 0.0 or pc.shift >= pc.lo:
                    raise DomainError("pareto segment needs scale > 0 and shift < lo")
                start = 1.0 - pc.scale / (pc.lo - pc.shift)
                if abs(start - t) > 1e-9:
                    raise DomainError(
                        f"pareto segment starts at cdf {start}, running cdf is {t}")
                t = 1.0 - pc.scale / (pc.hi - pc.shift)
                x = pc.hi
            else:
                raise DomainError(f"unknown piece type {type(pc)!r}")
            if t > 1.0 + 1e-9:
                raise DomainError("cdf exceeds 1")
        if abs(x - self.support_hi) > _TOL:
            raise DomainError(f"pieces end at {x}, support ends at {self.support_hi}")
        if abs(t - 1.0) > _TOL:
            raise DomainError(f"total probability is {t}, expected 1 within 1e-12")

    # -- cached lookup tables -----------------------------------------------

    @cached_property
    def _tables(self):
        """Per-piece (x_lo, x_hi, tau_lo, tau_hi) arrays for fast lookup."""
        x_lo, x_hi, t_lo, t_hi = [], [], [], []
        x = self.support_lo
        t = 0.0
        for pc in self.pieces:
            if isinstance(pc, Atom):
                x_lo.append(pc.location)
                x_hi.append(pc.location)
                t_lo.append(t)
                t += pc.mass
                t_hi.append(t)
            elif isinstance(pc, LinearCdfSegment):
                x_lo.append(pc.lo)
                x_hi.append(pc.hi)
                t_lo.append(t)
                # flats must be exact no-ops on the running cdf: piece fields
                # are only validated to 1e-9 and must not perturb boundaries
                if pc.slope != 0.0:
                    t = pc.cdf_lo + pc.slope * (pc.hi - pc.lo)
                t_hi.append(t)
            else:
                x_lo.append(pc.lo)
                x_hi.append(pc.hi)
                t_lo.append(t)
                t = 1.0 - pc.scale / (pc.hi - pc.shift)
                t_hi.append(t)
            x = x_hi[-1]
        t_hi[-1] = 1.0
        return (np.asarray(x_lo), np.asarray(x_hi),
                np.asarray(t_lo), np.minimum(np.asarray(t_hi), 1.0))

    # -- point evaluation ----------------------------------------------------

    def cdf(self, x):
        """Right-continuous CDF; an atom's location maps to the post-jump value."""
        scalar = np.ndim(x) == 0
        xv = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(xv < self.support_lo - _TOL) or np.any(xv > self.support_hi + _TOL):
            raise DomainError("cdf argument outside the support")
        out = self._cdf_array(xv, left=False)
        return float(out[0]) if scalar else out

    def cdf_left(self, x):
        """Left limit G(x^-)."""
        scalar = np.ndim(x) == 0
        xv = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(xv < self.support_lo - _TOL) or np.any(xv > self.support_hi + _TOL):
            raise DomainError("cdf argument outside the support")
        out = self._cdf_array(xv, left=True)
        return float(out[0]) if scalar else out

    def _cdf_array(self, xv, left: bool):
        x_lo, x_hi, t_lo, t_hi = self._tables
        xc = np.clip(xv, self.support_lo, self.support_hi)
        # piece index: last piece whose x_lo <= x; prefer atoms on exact hits
        side = "left" if left else "right"
        idx = np.searchsorted(x_lo, xc, side=side) - 1
        idx = np.clip(idx, 0, len(self.pieces) - 1)
        out = np.empty_like(xc)
        for i, pc in enumerate(self.pieces):
            sel = idx == i
            if not np.any(sel):
                continue
            xs = xc[sel]
            if isinstance(pc, Atom):
                base = np.where(xs >= pc.location, t_hi[i], t_lo[i])
                if left:
                    base = np.full_like(xs, t_lo[i])
                out[sel] = base
            elif isinstance(pc, LinearCdfSegment):
                out[sel] = pc.cdf_lo + pc.slope * (np.minimum(xs, pc.hi) - pc.lo)
            else:
                out[sel] = 1.0 - pc.scale / (np.minimum(xs, pc.hi) - pc.shift)
        return np.clip(out, 0.0, 1.0)

    def quantile(self, tau):
        """Generalized inverse inf{x : G(x) >= tau}; left endpoint on flats."""
        scalar = np.ndim(tau) == 0
        tv = np.atleast_1d(np.asarray(tau, dtype=float))
        if np.any(tv < -_TOL) or np.any(tv > 1.0 + _TOL):
            raise DomainError("quantile argument outside [0, 1]")
        x_lo, x_hi, t_lo, t_hi = self._tables
        idx = np.searchsorted(t_hi, np.clip(tv, 0.0, 1.0), side="left")
        idx = np.clip(idx, 0, len(self.pieces) - 1)
        out = np.empty_like(tv)
        for i, pc in enumerate(self.pieces):
            sel = idx == i
            if not np.any(sel):
                continue
            ts = tv[sel]
            if isinstance(pc, Atom):
                out[sel] = pc.location
            elif isinstance(pc, LinearCdfSegment):
                if pc.slope == 0.0:
                    out[sel] = pc.lo
                else:
                    out[sel] = np.clip(pc.lo + (ts - pc.cdf_lo) / pc.slope, pc.lo, pc.hi)
            else:
                out[sel] = np.clip(pc.shift + pc.scale / (1.0 - ts), pc.lo, pc.hi)
        return float(out[0]) if scalar else out

    # -- integrals -----------------------------------------------------------

    def mean(self) -> float:
        """Exact ∫ x dG, piece by piece (log antiderivative on Pareto pieces)."""
        total = 0.0
        for pc in self.pieces:
            if isinstance(pc, Atom):
                total += pc.location * pc.mass
            elif isinstance(pc, LinearCdfSegment):
                total += pc.slope * (pc.hi ** 2 - pc.lo ** 2) / 2.0
            else:
                a, b = pc.lo - pc.shift, pc.hi - pc.shift
                total += pc.scale * (math.log(b / a) + pc.shift * (1.0 / a - 1.0 / b))
        return total

    def partial_integral(self, x) -> float:
        """Exact ∫_{support_lo}^{x} G(t) dt."""
        scalar = np.ndim(x) == 0
        xv = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(xv < self.support_lo - _TOL) or np.any(xv > self.support_hi + _TOL):
            raise DomainError("partial_integral argument outside the support")
        xc = np.clip(xv, self.support_lo, self.support_hi)
        cum = self._cumulative_integrals
        x_lo, x_hi, _, _ = self._tables
        starts = np.asarray([pc.lo if not isinstance(pc, Atom) else pc.location
                             for pc in self.pieces])
        idx = np.clip(np.searchsorted(starts, xc, side="right") - 1, 0,
                      len(self.pieces) - 1)
        out = np.empty_like(xc)
        for i, pc in enumerate(self.pieces):
            sel = idx == i
            if not np.any(sel):
                continue
            xs = np.minimum(xc[sel], x_hi[i])
            if isinstance(pc, Atom):
                out[sel] = cum[i]
            elif isinstance(pc, LinearCdfSegment):
                d = np.maximum(xs - pc.lo, 0.0)
                out[sel] = cum[i] + pc.cdf_lo * d + pc.slope * d * d / 2.0
            else:
                d = np.maximum(xs - pc.lo, 0.0)
                out[sel] = cum[i] + d - pc.scale * (
                    np.log(np.maximum(xs, pc.lo) - pc.shift) - math.log(pc.lo - pc.shift))
        return float(out[0]) if scalar else out

    @cached_property
    def _cumulative_integrals(self):
        cum = [0.0]
        for pc in self.pieces:
            if isinstance(pc, Atom):
                cum.append(cum[-1])
            elif isinstance(pc, LinearCdfSegment):
                w = pc.hi - pc.lo
                cum.append(cum[-1] + pc.cdf_lo * w + pc.slope * w * w / 2.0)
            else:
                w = pc.hi - pc.lo
                cum.append(cum[-1] + w - pc.scale * math.log((pc.hi - pc.shift) / (pc.lo - pc.shift)))
        return np.asarray(cum[:-1])

    # -- quantile-space decomposition ----------------------------------------

    @cached_property
    def tau_pieces(self):
        """Mass-carrying pieces in quantile space.

        Returns tuples ``(kind, tau_a, tau_b, data)`` with kind one of
        "atom" (data = location), "affine" (data = (A, B), x = A + B*tau)
        or "pareto" (data = (shift, scale), x = shift + scale/(1-tau));
        zero-slope segments carry no quantile mass and are skipped.
        """
        out = []
        x_lo, x_hi, t_lo, t_hi = self._tables
        for i, pc in enumerate(self.pieces):
            ta, tb = float(t_lo[i]), float(t_hi[i])
            if isinstance(pc, Atom):
                out.append(("atom", ta, tb, pc.location))
            elif isinstance(pc, LinearCdfSegment):
                if pc.slope == 0.0 or tb <= ta:
                    continue
                # x(tau) = lo + (tau - cdf_lo)/slope
                out.append(("affine", ta, tb,
                            (pc.lo - pc.cdf_lo / pc.slope, 1.0 / pc.slope)))
            else:
                out.append(("pareto", ta, tb, (pc.shift, pc.scale)))
        return tuple(out)

    def tau_piece_x_left(self, piece) -> float:
        kind, ta, tb, data = piece
        if kind == "atom":
            return data
        if kind == "affine":
            return data[0] + data[1] * ta
        return data[0] + data[1] / (1.0 - ta)

    def moment_of_max(self, n: int) -> float:
        """Exact ∫ x dG^n: the expected highest of n independent draws."""
        if n < 1:
            raise DomainError("n must be >= 1")
        return self._integrate_against_power(n, 0.0)

    def _integrate_against_power(self, n: int, tau_floor: float) -> float:
        """∫_{tau >= tau_floor} x(tau) d(tau^n)."""
        total = 0.0
        for kind, ta, tb, data in self.tau_pieces:
            a, b = max(ta, tau_floor), tb
            if b <= a:
                continue
            dn = b ** n - a ** n
            if kind == "atom":
                total += data * dn
            elif kind == "affine":
                A, B = data
                total += A * dn + B * n / (n + 1.0) * (b ** (n + 1) - a ** (n + 1))
            else:
                shift, scale = data
                q = lambda t: -math.log1p(-t) - power_log_series(t, n)
                total += shift * dn + scale * n * (q(b) - q(a))
        return total

    # -- sampling --------------------------------------------------------------

    def sample(self, stream: SampleStream, count: int) -> np.ndarray:
        """Inverse-CDF sampling; reproducible for a fixed stream."""
        if count < 0:
            raise DomainError("count must be >= 0")
        u = stream.generator().random(count)
        return self.quantile(u)

    # -- serialization ----------------------------------------------------------

    def to_dict(self) -> dict:
        pieces = []
        for pc in self.pieces:
            if isinstance(pc, Atom):
                pieces.append({"type": "atom", "location": pc.location, "mass": pc.mass})
            elif isinstance(pc, ParetoSegment):
                pieces.append({"type": "pareto", "lo": pc.lo, "hi": pc.hi,
                               "scale": pc.scale, "shift": pc.shift})
            else:
                pieces.append({"type": "linear", "lo": pc.lo, "hi": pc.hi,
                               "cdf_lo": pc.cdf_lo, "slope": pc.slope})
        return {"support": [self.support_lo, self.support_hi], "pieces": pieces}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @staticmethod
    def from_dict(d: dict) -> "PiecewiseDistribution":
        pieces = []
        for pd in d["pieces"]:
            kind = pd["type"]
            if kind == "atom":
                pieces.append(Atom(pd["location"], pd["mass"]))
            elif kind == "pareto":
                pieces.append(ParetoSegment(pd["lo"], pd["hi"], pd["scale"], pd["shift"]))
            elif kind == "linear":
                pieces.append(LinearCdfSegment(pd["lo"], pd["hi"], pd["cdf_lo"], pd["slope"]))
            else:
                raise DomainError(f"unknown piece type {kind!r}")
        lo, hi = d["support"]
        return PiecewiseDistribution(lo, hi, tuple(pieces))

    @staticmethod
    def from_json(s: str) -> "PiecewiseDistribution":
        return PiecewiseDistribution.from_dict(json.loads(s))


# -- comparisons ----------------------------------------------------------------


def is_mps(g_fine: PiecewiseDistribution, g_coarse: PiecewiseDistribution,
           tol: float = 1e-9) -> bool:
    """True iff ``g_fine`` is a mean-preserving spread of ``g_coarse``.

    Checks ∫_lo^x (G_fine - G_coarse) dt >= -tol for all x together with
    mean agreement within tol; partial integrals are exact, the pointwise
    minimum is searched on a refined grid of both distributions' breakpoints.
    """
    if (abs(g_fine.support_lo - g_coarse.support_lo) > _TOL
            or abs(g_fine.support_hi - g_coarse.support_hi) > _TOL):
        raise DomainError("mean-preserving-spread comparison requires a common support")
    lo, hi = g_fine.support_lo, g_fine.support_hi
    if abs(g_fine.mean() - g_coarse.mean()) > tol:
        return False
    knots = {lo, hi}
    for g in (g_fine, g_coarse):
        x_lo, x_hi, _, _ = g._tables
        knots.update(map(float, x_lo))
        knots.update(map(float, x_hi))
    base = np.asarray(sorted(knots))
    grid = [base]
    for a, b in zip(base[:-1], base[1:]):
        if b > a:
            grid.append(np.linspace(a, b, 66)[1:-1])
    xs = np.unique(np.concatenate(grid))
    d = g_fine.partial_integral(xs) - g_coarse.partial_integral(xs)
    return bool(np.min(d) >= -tol)


# -- constructors -----------------------------------------------------------------


def degenerate(p: float, support=(0.0, 1.0)) -> PiecewiseDistribution:
    """Point mass at p (no disclosure when p is the prior mean)."""
    lo, hi = support
    if not lo <= p <= hi:
        raise DomainError("degenerate location outside the support")
    pieces = []
    if p > lo:
        pieces.append(LinearCdfSegment(lo, p, 0.0, 0.0))
    pieces.append(Atom(p, 1.0))
    if p < hi:
        pieces.append(LinearCdfSegment(p, hi, 1.0, 0.0))
    return PiecewiseDistribution(lo, hi, tuple(pieces))


def from_atoms(points: Iterable[tuple], support=(0.0, 1.0)) -> PiecewiseDistribution:
    """Discrete distribution from (location, mass) pairs inside the support."""
    lo, hi = support
    pts = sorted((float(x), float(m)) for x, m in points)
    if not pts:
        raise DomainError("no atoms given")
    pieces = []
    cur_x, cur_t = lo, 0.0
    for x, m in pts:
        if x < lo - _TOL or x > hi + _TOL:
            raise DomainError("atom outside the support")
        if x > cur_x:
            pieces.append(LinearCdfSegment(cur_x, x, cur_t, 0.0))
        pieces.append(Atom(x, m))
        cur_x = x
        cur_t += m
    if cur_x < hi:
        pieces.append(LinearCdfSegment(cur_x, hi, cur_t, 0.0))
    return PiecewiseDistribution(lo, hi, tuple(pieces))


def two_point_distribution(theta0: float, k: float, theta: float) -> PiecewiseDistribution:
    """Signal distribution whose virtual values take at most two positive
    levels: optional mass ``theta0`` at signal 0, a truncated-Pareto stretch
    with constant virtual value ``k`` carrying mass ``theta - theta0``, and
    an atom at 1 with the remaining mass ``1 - theta``.

    The Pareto scale is ``(1-theta)*(1-k)`` and its lower support endpoint is
    ``k + (1-theta)*(1-k)/(1-theta0)``.  Degenerate corners (theta == theta0,
    theta == 1) collapse to the corresponding discrete distributions.
    """
    if not (0.0 <= theta0 <= theta <= 1.0) or not 0.0 <= k < 1.0:
        raise DomainError("need 0 <= theta0 <= theta <= 1 and 0 <= k < 1")
    eps = 1e-14
    top = 1.0 - theta
    atoms = []
    if theta0 > eps:
        atoms.append((0.0, theta0))
    if top <= eps:
        # no mass above the Pareto stretch: everything left sits at k
        atoms.append((k, 1.0 - theta0))
        return from_atoms(atoms)
    if theta - theta0 <= eps:
        atoms.append((1.0, 1.0 - theta0))
        return from_atoms(atoms)
    scale = top * (1.0 - k)
    x_lo = k + scale / (1.0 - theta0)
    pieces = []
    if theta0 > eps:
        pieces.append(Atom(0.0, theta0))
    if x_lo > eps:
        pieces.append(LinearCdfSegment(0.0, x_lo, theta0, 0.0))
    pieces.append(ParetoSegment(x_lo, 1.0, scale, k))
    pieces.append(Atom(1.0, top))
    return PiecewiseDistribution(0.0, 1.0, tuple(pieces))
