import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infodesign.distributions import (Atom, BinaryPrior, LinearCdfSegment,
                                      PiecewiseDistribution, degenerate,
                                      from_atoms, two_point_distribution)
from infodesign.ironing import iron

from conftest import random_piecewise


def discrete_virtuals(atoms):
    """Textbook discrete virtual values v_i - (v_{i+1} - v_i)(1 - F_i)/f_i."""
    out = []
    cum = 0.0
    for i, (x, m) in enumerate(atoms):
        cum += m
        if i + 1 < len(atoms):
            out.append(x - (atoms[i + 1][0] - x) * (1.0 - cum) / m)
        else:
            out.append(x)
    return out


# -- the worked irregular example ------------------------------------------------


def closed_form_phi(x):
    if x < 1.25:
        return 2.0 * x - 1.5
    if x < 1.5:
        return 1.0
    return 2.0 * x - 2.0


def test_irregular_example_pointwise(irregular_example):
    prof = iron(irregular_example)
    xs = np.linspace(1.0, 2.0, 1000)
    errs = [abs(prof.evaluate(x) - closed_form_phi(x)) for x in xs]
    assert max(errs) < 1e-9


def test_irregular_example_interval(irregular_example):
    prof = iron(irregular_example)
    assert len(prof.ironed_intervals) == 1
    lo, hi = prof.ironed_intervals[0]
    assert lo == pytest.approx(1.25, abs=1e-9)
    assert hi == pytest.approx(1.5, abs=1e-9)


def test_irregular_example_envelope_geometry(irregular_example):
    prof = iron(irregular_example)
    taus = np.linspace(0.0, 1.0, 2001)
    env = prof.envelope_value(taus)
    raw = prof.raw_value(taus)
    assert np.all(env <= raw + 1e-12)
    # convexity: slopes nondecreasing
    slopes = np.diff(env) / np.diff(taus)
    assert np.all(np.diff(slopes) >= -1e-9)
    # equality at the ends of the ironed stretch (tau = 1/2 and 3/4)
    for t in (0.5, 0.75):
        assert prof.envelope_value(t) == pytest.approx(prof.raw_value(t), abs=1e-12)
    assert prof.envelope_value(0.6) < prof.raw_value(0.6) - 1e-4


# -- regular cases come back unchanged --------------------------------------------


def test_uniform_regular():
    g = PiecewiseDistribution(0.0, 1.0, (LinearCdfSegment(0.0, 1.0, 0.0, 1.0),))
    prof = iron(g)
    assert prof.ironed_intervals == ()
    for x in np.linspace(0.01, 0.99, 13):
        assert prof.evaluate(x) == pytest.approx(2 * x - 1, abs=1e-12)


def test_zero_virtual_pareto():
    g = two_point_distribution(0.0, 0.0, 0.8)
    prof = iron(g)
    assert prof.ironed_intervals == ()
    assert prof.evaluate(0.5) == 0.0
    assert prof.evaluate(0.05) == 0.0  # flat stretch below the support of mass
    assert prof.evaluate(1.0) == 1.0


def test_constant_virtual_k():
    g = two_point_distribution(0.0, 0.3, 0.7)
    prof = iron(g)
    assert prof.ironed_intervals == ()
    x = 0.5 * (g.quantile(0.2) + g.quantile(0.5))
    assert prof.evaluate(x) == pytest.approx(0.3, abs=1e-12)


def test_binary_prior_virtuals():
    p = 0.5
    prof = iron(BinaryPrior(p).distribution())
    assert prof.evaluate(0.0) == pytest.approx(-p / (1 - p), abs=1e-12)
    assert prof.evaluate(1.0) == 1.0
    assert prof.ironed_intervals == ()


def test_zero_atom_reported_value():
    theta0 = 0.1251
    g = two_point_distribution(theta0, 0.0, 0.8581)
    prof = iron(g)
    assert prof.evaluate(0.0) == pytest.approx(-(1 - theta0) / theta0, abs=1e-12)
    assert prof.ironed_intervals == ()
    # everything except the zero atom has nonnegative virtual value
    xs = np.linspace(g.quantile(theta0 + 1e-9), 1.0, 100)
    assert np.all(prof.evaluate(xs) >= -1e-12)


def test_degenerate_atom_top_rule():
    prof = iron(degenerate(0.4))
    assert prof.evaluate(0.4) == pytest.approx(0.4, abs=1e-15)
    assert prof.ironed_intervals == ()


def test_discrete_regular_prior_matches_formula():
    atoms = [(0.5, 1 / 3), (0.75, 1 / 3), (1.0, 1 / 3)]
    prof = iron(from_atoms(atoms))
    want = discrete_virtuals(atoms)
    got = [prof.evaluate(x) for x, _ in atoms]
    assert got == pytest.approx(want, abs=1e-12)
    assert prof.ironed_intervals == ()


def test_discrete_irregular_prior_is_ironed():
    # second atom's virtual value falls below the first; ironing pools them
    atoms = [(0.4, 0.5), (0.5, 0.1), (1.0, 0.4)]
    raw = discrete_virtuals(atoms)
    assert not all(b >= a for a, b in zip(raw[:-1], raw[1:]))
    prof = iron(from_atoms(atoms))
    vals = [prof.evaluate(x) for x, _ in atoms]
    assert all(b >= a - 1e-12 for a, b in zip(vals[:-1], vals[1:]))
    assert len(prof.ironed_intervals) >= 1


# -- properties over random distributions ------------------------------------------


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_envelope_below_raw_and_monotone(seed):
    g = random_piecewise(np.random.default_rng(seed))
    prof = iron(g)
    taus = np.linspace(0.0, 1.0, 801)
    assert np.all(prof.envelope_value(taus) <= prof.raw_value(taus) + 1e-9)
    phis = prof.phi_at_tau(taus)
    assert np.all(np.diff(phis) >= -1e-9)
    # x-space evaluation is monotone too
    xs = np.linspace(g.support_lo, g.support_hi, 801)
    vals = prof.evaluate(xs)
    assert np.all(np.diff(vals) >= -1e-9)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_ironing_idempotent_on_regular_density(seed):
    rng = np.random.default_rng(seed)
    # regular family: zero-mass-at-zero two-point distributions
    theta = float(rng.uniform(0.3, 0.95))
    k = float(rng.uniform(0.0, 0.5))
    prof = iron(two_point_distribution(0.0, k, theta))
    assert prof.ironed_intervals == ()


def test_ironed_interval_endpoints_touch_raw(rng):
    for _ in range(40):
        g = random_piecewise(rng)
        prof = iron(g)
        for lo, hi in prof.ironed_intervals:
            tl = g.cdf_left(lo)
            # the envelope touches the raw curve at bridge anchors
            assert prof.envelope_value(tl) == pytest.approx(
                prof.raw_value(tl), abs=1e-8)


def test_posted_price_optimality(rng):
    """The tangent-line property: for x0 at an untouched quantile and
    k = phi_hat(x0), no posted price beats x0 against marginal cost k."""
    checked = 0
    for _ in range(60):
        g = random_piecewise(rng)
        prof = iron(g)
        spans = _bridge_spans(prof, g)
        for tau0 in (0.15, 0.5, 0.85):
            if any(a - 1e-9 < tau0 < b + 1e-9 for a, b in spans):
                continue
            x0 = float(g.quantile(tau0))
            k = float(prof.evaluate(x0))
            bound = (x0 - k) * (1.0 - float(g.cdf_left(x0)))
            xs = np.linspace(g.support_lo, g.support_hi, 400)
            profits = (xs - k) * (1.0 - g.cdf(xs))
            assert np.max(profits) <= bound + 1e-9
            checked += 1
    assert checked > 50


def _bridge_spans(prof, g):
    return [(g.cdf_left(lo), g.cdf(hi)) for lo, hi in prof.ironed_intervals]


def test_pareto_cdf_dominance_at_pinned_point():
    """The truncated Pareto through a pinned point (x0, G(x0-)) with constant
    virtual value k lies weakly below the source distribution."""
    rng = np.random.default_rng(7)
    for _ in range(40):
        g = random_piecewise(rng)
        prof = iron(g)
        tau0 = float(rng.uniform(0.2, 0.8))
        spans = _bridge_spans(prof, g)
        if any(a - 1e-9 < tau0 < b + 1e-9 for a, b in spans):
            continue
        x0 = float(g.quantile(tau0))
        k = float(prof.evaluate(x0))
        pin = (x0 - k) * (1.0 - float(g.cdf_left(x0)))
        xs = np.linspace(max(g.support_lo, k + 1e-6), g.support_hi, 300)
        pareto_cdf = 1.0 - pin / (xs - k)
        assert np.all(g.cdf(xs) >= pareto_cdf - 1e-9)
