"""Ironed virtual values via the quantile-space convex envelope.

For a signal distribution G the cumulative virtual surplus in quantile
space is Phi(tau) = a - (1 - tau) * x(tau), where a is the lowest point of
the support carrying mass and x(tau) the quantile function.  Its derivative
is the virtual value x - (1 - G(x))/G'(x) wherever G has a density; an atom
contributes a straight stretch whose slope is the usual discrete-type
virtual value (the gap to the next support point included).  Ironing takes
the lower convex envelope of Phi and reads the (nondecreasing) ironed
virtual value off its slope.

The envelope is computed exactly: Phi is piecewise quadratic and convex on
each piece, so a monotone-chain hull over piece breakpoints plus a
refinement grid locates the bridged regions, and the bridge endpoints are
then polished to machine precision from the tangency conditions of the
quadratics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .distributions import (Atom, DomainError, LinearCdfSegment, ParetoSegment,
                            PiecewiseDistribution)

__all__ = ["IronedProfile", "iron"]

_GRID = 4096  # refinement grid for bridge detection (exact polish follows)


@dataclass(frozen=True)
class _Seg:
    """One quadratic stretch of Phi: value a + b*tau + c*tau**2 on [ta, tb]."""

    ta: float
    tb: float
    a: float
    b: float
    c: float
    is_atom: bool = False
    atom_location: float = math.nan
    atom_mass: float = math.nan

    def value(self, tau):
        return self.a + tau * (self.b + self.c * tau)

    def slope(self, tau):
        return self.b + 2.0 * self.c * tau


@dataclass(frozen=True)
class IronedProfile:
    """Nondecreasing ironed virtual value paired with its source distribution.

    ``breakpoints``/``coeffs`` give phi-hat(x) = a + b*x on half-open
    x-intervals; ``atom_values`` pins the value at atom locations;
    ``ironed_intervals`` lists the x-ranges where convexification replaced
    the raw virtual value.
    """

    source: PiecewiseDistribution
    breakpoints: tuple
    coeffs: tuple
    atom_values: tuple           # ((location, value), ...)
    ironed_intervals: tuple      # ((x_lo, x_hi), ...)
    env_pieces: tuple            # ((ta, tb, a, b, c), ...) convex envelope of Phi
    raw_segments: tuple          # the pre-envelope quadratic stretches
    tau_nonneg: float            # inf{tau : ironed virtual value >= 0}

    # -- evaluation -------------------------------------------------------

    def evaluate(self, x):
        """phi-hat(x), vectorised; exact at atom locations."""
        scalar = np.ndim(x) == 0
        xv = np.atleast_1d(np.asarray(x, dtype=float))
        lo, hi = self.source.support_lo, self.source.support_hi
        if np.any(xv < lo - 1e-12) or np.any(xv > hi + 1e-12):
            raise DomainError("ironed profile evaluated outside the support")
        bp = np.asarray(self.breakpoints)
        idx = np.clip(np.searchsorted(bp, xv, side="right") - 1, 0,
                      len(self.coeffs) - 1)
        a = np.asarray([c[0] for c in self.coeffs])
        b = np.asarray([c[1] for c in self.coeffs])
        out = a[idx] + b[idx] * xv
        for loc, val in self.atom_values:
            out = np.where(xv == loc, val, out)
        return float(out[0]) if scalar else out

    def phi_at_tau(self, tau):
        """Envelope slope at quantile level tau (right-continuous)."""
        scalar = np.ndim(tau) == 0
        tv = np.atleast_1d(np.asarray(tau, dtype=float))
        ta = np.asarray([p[0] for p in self.env_pieces])
        idx = np.clip(np.searchsorted(ta, tv, side="right") - 1, 0,
                      len(self.env_pieces) - 1)
        out = np.empty_like(tv)
        for i, (a0, b0, aa, bb, cc) in enumerate(self.env_pieces):
            sel = idx == i
            if np.any(sel):
                out[sel] = bb + 2.0 * cc * tv[sel]
        return float(out[0]) if scalar else out

    def envelope_value(self, tau):
        """The convexified cumulative virtual surplus at tau."""
        scalar = np.ndim(tau) == 0
        tv = np.atleast_1d(np.asarray(tau, dtype=float))
        ta = np.asarray([p[0] for p in self.env_pieces])
        idx = np.clip(np.searchsorted(ta, tv, side="right") - 1, 0,
                      len(self.env_pieces) - 1)
        out = np.empty_like(tv)
        for i, (a0, b0, aa, bb, cc) in enumerate(self.env_pieces):
            sel = idx == i
            if np.any(sel):
                t = tv[sel]
                out[sel] = aa + t * (bb + cc * t)
        return float(out[0]) if scalar else out

    def raw_value(self, tau):
        """Pre-envelope cumulative virtual surplus (atoms already bridged to
        their next support point, so discrete virtual values are built in)."""
        scalar = np.ndim(tau) == 0
        tv = np.atleast_1d(np.asarray(tau, dtype=float))
        ta = np.asarray([s.ta for s in self.raw_segments])
        idx = np.clip(np.searchsorted(ta, tv, side="right") - 1, 0,
                      len(self.raw_segments) - 1)
        out = np.empty_like(tv)
        for i, s in enumerate(self.raw_segments):
            sel = idx == i
            if np.any(sel):
                out[sel] = s.value(tv[sel])
        return float(out[0]) if scalar else out

    @property
    def is_regular(self) -> bool:
        return len(self.ironed_intervals) == 0


# -------------------------------------------------------------------------
# construction
# -------------------------------------------------------------------------


def _build_segments(g: PiecewiseDistribution):
    pieces = g.tau_pieces
    if not pieces:
        raise DomainError("distribution carries no mass pieces")
    r0 = g.tau_piece_x_left(pieces[0])
    segs = []
    for i, (kind, ta, tb, data) in enumerate(pieces):
        if kind == "affine":
            A, B = data
            segs.append(_Seg(ta, tb, r0 - A, A - B, B))
        elif kind == "pareto":
            shift, scale = data
            segs.append(_Seg(ta, tb, r0 - shift - scale, shift, 0.0))
        else:  # atom: straight stretch to the next support point
            z = data
            if i + 1 < len(pieces):
                x_after = g.tau_piece_x_left(pieces[i + 1])
            else:
                x_after = z
            v_left = r0 - (1.0 - ta) * z
            v_right = r0 - (1.0 - tb) * x_after
            slope = (v_right - v_left) / (tb - ta)
            segs.append(_Seg(ta, tb, v_left - slope * ta, slope, 0.0,
                             is_atom=True, atom_location=z,
                             atom_mass=tb - ta))
    return segs, r0


def _candidates(segs):
    taus, vals, seg_ix = [], [], []
    for i, s in enumerate(segs):
        width = s.tb - s.ta
        if s.c > 0.0:
            m = max(16, int(round(_GRID * width)))
            grid = np.linspace(s.ta, s.tb, m + 1)
        else:
            grid = np.asarray([s.ta, s.tb])
        taus.append(grid)
        vals.append(s.value(grid))
        seg_ix.append(np.full(grid.shape, i, dtype=int))
    taus = np.concatenate(taus)
    vals = np.concatenate(vals)
    seg_ix = np.concatenate(seg_ix)
    # at a shared tau keep only the lowest value (drops at support gaps)
    order = np.lexsort((vals, taus))
    taus, vals, seg_ix = taus[order], vals[order], seg_ix[order]
    keep = np.ones(len(taus), dtype=bool)
    keep[1:] = taus[1:] != taus[:-1]
    return taus[keep], vals[keep], seg_ix[keep]


def _lower_hull(taus, vals):
    hull = []
    for i in range(len(taus)):
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = ((taus[a] - taus[o]) * (vals[i] - vals[o])
                     - (vals[a] - vals[o]) * (taus[i] - taus[o]))
            if cross <= 0.0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def _hull_interp(h_taus, h_vals, t):
    idx = np.clip(np.searchsorted(h_taus, t, side="right") - 1, 0, len(h_taus) - 2)
    t0, t1 = h_taus[idx], h_taus[idx + 1]
    w = np.where(t1 > t0, (t - t0) / np.where(t1 > t0, t1 - t0, 1.0), 0.0)
    return h_vals[idx] * (1.0 - w) + h_vals[idx + 1] * w


def _tangency_to_point(seg: _Seg, t_fix: float, v_fix: float) -> Optional[float]:
    """tau on a convex quadratic where the tangent passes through (t_fix, v_fix)."""
    if seg.c <= 0.0:
        return None
    rad = t_fix * t_fix + (seg.a + seg.b * t_fix - v_fix) / seg.c
    if rad < 0.0:
        return None
    root = math.sqrt(rad)
    for cand in (t_fix - root, t_fix + root):
        if seg.ta - 1e-12 <= cand <= seg.tb + 1e-12:
            return min(max(cand, seg.ta), seg.tb)
    return None


def _common_tangent(s1: _Seg, s2: _Seg):
    """Common tangent slope of two convex quadratics; returns (m, t1, t2)."""
    # h(m) = (a2 - a1) - (m - b2)^2/(4 c2) + (m - b1)^2/(4 c1) = 0
    A = 0.25 / s1.c - 0.25 / s2.c
    B = -0.5 * s1.b / s1.c + 0.5 * s2.b / s2.c
    C = (s2.a - s1.a) + 0.25 * s1.b ** 2 / s1.c - 0.25 * s2.b ** 2 / s2.c
    cands = []
    if abs(A) < 1e-300:
        if B != 0.0:
            cands = [-C / B]
    else:
        disc = B * B - 4.0 * A * C
        if disc >= 0.0:
            rt = math.sqrt(disc)
            cands = [(-B - rt) / (2.0 * A), (-B + rt) / (2.0 * A)]
    for m in cands:
        t1 = (m - s1.b) / (2.0 * s1.c)
        t2 = (m - s2.b) / (2.0 * s2.c)
        if (s1.ta - 1e-12 <= t1 <= s1.tb + 1e-12
                and s2.ta - 1e-12 <= t2 <= s2.tb + 1e-12 and t1 < t2):
            return m, min(max(t1, s1.ta), s1.tb), min(max(t2, s2.ta), s2.tb)
    return None


def _endpoint(seg: _Seg, tau: float) -> bool:
    return abs(tau - seg.ta) <= 1e-11 or abs(tau - seg.tb) <= 1e-11


def _polish_bridge(segs, i_left, t_left, i_right, t_right):
    """Refine a bridge's anchor quantiles to exact tangency."""
    sl, sr = segs[i_left], segs[i_right]
    left_free = sl.c > 0.0 and not _endpoint(sl, t_left)
    right_free = sr.c > 0.0 and not _endpoint(sr, t_right)
    if left_free and right_free:
        sol = _common_tangent(sl, sr)
        if sol is not None:
            _, t1, t2 = sol
            return t1, t2
        left_free = False  # fall back to single-sided solves
    if left_free and not right_free:
        t = _tangency_to_point(sl, t_right, sr.value(t_right))
        if t is not None:
            return t, t_right
    if right_free and not left_free:
        t = _tangency_to_point(sr, t_left, sl.value(t_left))
        if t is not None:
            return t_left, t
    return t_left, t_right


def iron(g: PiecewiseDistribution) -> IronedProfile:
    """Iron a distribution: returns the nondecreasing virtual value profile.

    Regular distributions come back with ``ironed_intervals`` empty.
    """
    segs, r0 = _build_segments(g)
    taus, vals, seg_ix = _candidates(segs)
    hull = _lower_hull(taus, vals)
    h_taus, h_vals = taus[hull], vals[hull]
    scale = max(1.0, float(np.max(np.abs(vals))))
    tol = 1e-11 * scale

    # per-segment arcs that lie on the hull; everything between arcs is bridged
    arcs = []  # (tau_start, tau_end, seg_index)
    for si, s in enumerate(segs):
        m = max(16, int(round(_GRID * (s.tb - s.ta))))
        grid = np.linspace(s.ta, s.tb, m + 1)
        on = s.value(grid) - _hull_interp(h_taus, h_vals, grid) <= tol
        i = 0
        while i <= m:
            if not on[i]:
                i += 1
                continue
            j = i
            while j + 1 <= m and on[j + 1]:
                j += 1
            arcs.append((float(grid[i]), float(grid[j]), si))
            i = j + 1
    arcs.sort()
    if not arcs:
        raise RuntimeError("convex envelope lost contact with the curve")

    # coalesce touching/overlapping arcs (numerical noise at shared
    # boundaries) into disjoint on-envelope intervals, remembering which
    # segment owns each end for the tangency polish
    spans = []  # [start, start_seg, end, end_seg]
    for (a0, a1, si) in arcs:
        if spans and a0 <= spans[-1][2] + 1e-12:
            if a1 > spans[-1][2]:
                spans[-1][2] = a1
                spans[-1][3] = si
        else:
            spans.append([a0, si, a1, si])

    bridges = []
    for a, b in zip(spans[:-1], spans[1:]):
        t_l, t_r = _polish_bridge(segs, a[3], a[2], b[1], b[0])
        bridges.append([t_l, t_r, a[3], b[1]])
    # merge bridges whose polished ends strictly crossed (degenerate arcs);
    # bridges merely touching at a kink vertex stay separate
    merged = []
    for br in sorted(bridges):
        if merged and br[0] < merged[-1][1] - 1e-12:
            t_l, t_r = _polish_bridge(segs, merged[-1][2], merged[-1][0],
                                      br[3], br[1])
            merged[-1] = [min(t_l, merged[-1][0]), max(t_r, br[1]),
                          merged[-1][2], br[3]]
        else:
            merged.append(br)
    bridges = merged

    # assemble the envelope in quantile space
    env = []
    for si, s in enumerate(segs):
        cur = s.ta
        for (t_l, t_r, il, ir) in bridges:
            if t_r <= cur or t_l >= s.tb:
                continue
            if t_l > cur:
                env.append((cur, t_l, s.a, s.b, s.c, si))
            cur = max(cur, min(t_r, s.tb))
        if cur < s.tb - 1e-15:
            env.append((cur, s.tb, s.a, s.b, s.c, si))
    for (t_l, t_r, il, ir) in bridges:
        v_l = segs[il].value(t_l)
        v_r = segs[ir].value(t_r)
        m = (v_r - v_l) / (t_r - t_l)
        env.append((t_l, t_r, v_l - m * t_l, m, 0.0, None))
    env.sort(key=lambda e: e[0])
    env = [e for e in env if e[1] - e[0] > 1e-15]

    # slope monotonicity is the defining invariant of the envelope
    slopes = []
    for (ta, tb, a, b, c, src) in env:
        slopes.extend((b + 2 * c * ta, b + 2 * c * tb))
    if np.any(np.diff(slopes) < -1e-9):
        raise RuntimeError("convex envelope produced a decreasing virtual value")

    # threshold quantile where the ironed virtual value turns nonnegative
    tau_nonneg = 1.0
    for (ta, tb, a, b, c, src) in env:
        s_lo = b + 2 * c * ta
        s_hi = b + 2 * c * tb
        if s_lo >= 0.0:
            tau_nonneg = ta
            break
        if s_hi >= 0.0 and c > 0.0:
            tau_nonneg = min(max(-b / (2.0 * c), ta), tb)
            break
    else:
        tau_nonneg = 1.0 if not env else tau_nonneg

    profile_env = tuple((ta, tb, a, b, c) for (ta, tb, a, b, c, src) in env)

    # x-space table -------------------------------------------------------
    breaks, coeffs = [], []
    atom_values = []
    pending_gap = None   # (x_lo, x_hi) awaiting the next piece's left value
    last_value = None    # phi-hat at the right edge of the last mass emitted

    def _emit(x_lo, x_hi, a, b):
        nonlocal pending_gap, last_value
        if pending_gap is not None:
            gl, gh = pending_gap
            breaks.append(gl)
            coeffs.append((a + b * x_lo, 0.0))  # flat stretch inherits the right value
            pending_gap = None
        if x_hi > x_lo:
            breaks.append(x_lo)
            coeffs.append((a, b))
        last_value = a + b * x_hi

    env_arr = env
    for pc in g.pieces:
        if isinstance(pc, LinearCdfSegment) and pc.slope == 0.0:
            if pc.hi > pc.lo:
                pending_gap = (pc.lo, pc.hi) if pending_gap is None else (pending_gap[0], pc.hi)
            continue
        # locate this piece among the mass pieces
        if isinstance(pc, Atom):
            ta = g.cdf_left(pc.location)
            tb = ta + pc.mass
            mid = 0.5 * (ta + tb)
            val = _slope_at(env_arr, mid)
            if pc.location == 0.0 and g.support_hi <= 1.0:
                val = -(1.0 - pc.mass) / pc.mass
            if pending_gap is not None:
                gl, gh = pending_gap
                breaks.append(gl)
                coeffs.append((val, 0.0))
                pending_gap = None
            atom_values.append((pc.location, val))
            last_value = val
            continue
        if isinstance(pc, LinearCdfSegment):
            ta = pc.cdf_lo
            tb = pc.cdf_lo + pc.slope * (pc.hi - pc.lo)
        else:
            ta = 1.0 - pc.scale / (pc.lo - pc.shift)
            tb = 1.0 - pc.scale / (pc.hi - pc.shift)
        sub = _clip_env(env_arr, ta, tb)
        for (sa, sb, a, b, c, src) in sub:
            x_a = _tau_to_x(pc, sa)
            x_b = _tau_to_x(pc, sb)
            if src is None:
                m = b + 2 * c * sa  # bridges are linear: slope constant
                _emit(x_a, x_b, m, 0.0)
            elif isinstance(pc, ParetoSegment):
                _emit(x_a, x_b, pc.shift, 0.0)
            else:
                # regular stretch of a linear-CDF piece: x - (1-G(x))/g(x)
                _emit(x_a, x_b, -pc.lo - (1.0 - pc.cdf_lo) / pc.slope, 2.0)
    if pending_gap is not None:
        gl, gh = pending_gap
        breaks.append(gl)
        coeffs.append((last_value, 0.0))
        pending_gap = None

    ironed = []
    for (t_l, t_r, il, ir) in bridges:
        ironed.append((float(g.quantile(t_l)), float(g.quantile(t_r))))

    return IronedProfile(
        source=g,
        breakpoints=tuple(breaks),
        coeffs=tuple(coeffs),
        atom_values=tuple(atom_values),
        ironed_intervals=tuple(ironed),
        env_pieces=profile_env,
        raw_segments=tuple(segs),
        tau_nonneg=float(tau_nonneg),
    )


def _slope_at(env, tau):
    for (ta, tb, a, b, c, src) in env:
        if ta - 1e-12 <= tau <= tb + 1e-12:
            return b + 2.0 * c * tau
    return env[-1][3] + 2.0 * env[-1][4] * env[-1][1]


def _clip_env(env, ta, tb):
    out = []
    for (sa, sb, a, b, c, src) in env:
        lo, hi = max(sa, ta), min(sb, tb)
        if hi > lo + 1e-15:
            out.append((lo, hi, a, b, c, src))
    return out


def _tau_to_x(pc, tau):
    if isinstance(pc, LinearCdfSegment):
        return min(max(pc.lo + (tau - pc.cdf_lo) / pc.slope, pc.lo), pc.hi)
    return min(max(pc.shift + pc.scale / (1.0 - tau), pc.lo), pc.hi)
