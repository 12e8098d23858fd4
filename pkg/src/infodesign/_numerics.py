"""Scalar root finding and series helpers shared across the package."""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "BracketingError",
    "solve_bracketed",
    "solve_bracketed_vec",
    "log1m",
    "power_log_series",
]


class BracketingError(RuntimeError):
    """Raised when a root solve is handed a bracket without a sign change."""


def log1m(theta: float) -> float:
    """log(1 - theta), accurate for theta near 0."""
    return math.log1p(-theta)


def solve_bracketed(f, lo: float, hi: float, *, df=None, ftol: float = 1e-12,
                    max_bisect: int = 200) -> float:
    """Root of ``f`` on ``[lo, hi]``: bisection to convergence, then a few
    safeguarded Newton steps when a derivative is supplied.

    The bracket endpoints must have opposite signs (an endpoint evaluating to
    exactly zero is returned as-is).
    """
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise BracketingError(
            f"no sign change on [{lo!r}, {hi!r}]: f(lo)={flo!r}, f(hi)={fhi!r}")
    a, b, fa = lo, hi, flo
    for _ in range(max_bisect):
        m = 0.5 * (a + b)
        if m <= a or m >= b:  # interval collapsed to adjacent floats
            break
        fm = f(m)
        if abs(fm) <= ftol and df is None:
            return m
        if fm == 0.0:
            return m
        if (fm > 0.0) == (fa > 0.0):
            a, fa = m, fm
        else:
            b = m
    x = 0.5 * (a + b)
    if df is not None:
        for _ in range(4):
            fx = f(x)
            d = df(x)
            if d == 0.0:
                break
            step = fx / d
            x_new = x - step
            if not (a <= x_new <= b):
                break
            x = x_new
    return x


def solve_bracketed_vec(f, lo, hi, *, iters: int = 80):
    """Vectorised bisection for monotone root problems on arrays of brackets.

    ``f`` maps an array of abscissae to an array of residuals; brackets where
    no sign change exists converge to an endpoint and should be filtered by
    the caller.
    """
    a = np.asarray(lo, dtype=float).copy()
    b = np.asarray(hi, dtype=float).copy()
    fa = f(a)
    for _ in range(iters):
        m = 0.5 * (a + b)
        fm = f(m)
        left = (fm > 0.0) == (fa > 0.0)
        a = np.where(left, m, a)
        fa = np.where(left, fm, fa)
        b = np.where(left, b, m)
    return 0.5 * (a + b)


def power_log_series(theta, n: int):
    """Sum_{i=1}^{n-1} theta**i / i, the truncation of -log(1 - theta).

    All terms share a sign, so direct summation is stable for any
    theta in [0, 1), including theta within a few ulp of 1; vectorised
    over ``theta`` for moderate ``n``.
    """
    if n <= 1:
        return np.zeros_like(np.asarray(theta, dtype=float)) if np.ndim(theta) else 0.0
    th = np.asarray(theta, dtype=float)
    i = np.arange(1, n, dtype=float)
    if th.ndim == 0:
        return float(np.sum(th ** i / i))
    # broadcast: (..., n-1) then reduce
    out = np.sum(th[..., None] ** i / i, axis=-1)
    return out
