import math

import numpy as np
import pytest
from scipy.stats import ks_2samp

from mtbbm.errors import DomainError, InsufficientSamplesError
from mtbbm.extremal import (
    DecorationBank,
    PointPattern,
    additive_martingale,
    conditional_exceedance,
    derivative_martingale,
    dppp_sample,
    extremal_point_pattern,
    gap_point_pattern,
    laplace_functional,
    limit_law_compare,
    m_infinity_samples,
    rescaled_mass,
    shifted_pattern,
)
from mtbbm.extremal import test_functions as phi_library
from mtbbm.reports import EstimatorReport
from mtbbm.rng import generator_for
from mtbbm.simulate import run_replicates, simulate, simulate_replicate
from mtbbm.spectral import front


def test_martingales_at_time_zero(spec_b, sd_b):
    snap = simulate(spec_b, sd_b, (0.0, 1), 0.0, generator_for(1, 0))
    assert additive_martingale(snap, sd_b) == pytest.approx(sd_b.h[1])
    assert derivative_martingale(snap, sd_b) == pytest.approx(0.0)
    assert rescaled_mass(snap, sd_b) == pytest.approx(sd_b.h[1])


def test_martingale_means(spec_a, spec_b, sd_a, sd_b):
    for spec, sd, seed in ((spec_a, sd_a, 101), (spec_b, sd_b, 103)):
        for s_time in (1.0, 2.0):
            rep = run_replicates(
                spec, sd, (0.0, 0), s_time, 20_000, seed,
                lambda s, sd=sd: np.array([additive_martingale(s, sd), rescaled_mass(s, sd)]),
            )
            assert np.all(np.abs(np.asarray(rep.estimate) - sd.h[0]) <= 3.0 * np.asarray(rep.se))


def test_additive_martingale_median_decays(spec_a, sd_a):
    """The critical additive martingale drifts to zero almost surely; its
    median at a later time sits below the earlier one."""
    medians = []
    for s_time, seed in ((4.0, 107), (10.0, 109)):
        vals = [
            additive_martingale(simulate_replicate(spec_a, sd_a, (0.0, 0), s_time, seed, i), sd_a)
            for i in range(400)
        ]
        assert min(vals) > 0.0
        medians.append(np.median(vals))
    assert medians[1] < medians[0]


def test_pattern_frames(spec_b, sd_b):
    snap = simulate(spec_b, sd_b, (0.0, 0), 1.0, generator_for(5, 0))
    e_t = extremal_point_pattern(snap, sd_b)
    d_t = gap_point_pattern(snap)
    ebar = shifted_pattern(snap, sd_b, z=0.25)
    assert d_t.locations.max() == pytest.approx(0.0)
    # frames differ by exact constants
    np.testing.assert_allclose(
        ebar.locations - e_t.locations,
        front(1.0, sd_b) - sd_b.sqrt2lam * 1.0 - 0.25,
        atol=1e-12,
    )
    np.testing.assert_array_equal(e_t.marks, snap.types)


def test_single_particle_pattern(sd_a, spec_a):
    snap = simulate(spec_a, sd_a, (0.0, 0), 0.0, generator_for(1, 1))
    # observation at t=1 frame arithmetic on a hand-built snapshot
    from mtbbm.simulate import Snapshot

    snap = Snapshot(t=1.0, positions=np.array([0.0]), types=np.array([0]))
    pat = extremal_point_pattern(snap, sd_a)
    assert pat.locations[0] == pytest.approx(-math.sqrt(2.0))


def test_laplace_functional_basics():
    empty = PointPattern(np.empty(0), np.empty(0, dtype=int), frame="test")
    one = PointPattern(np.array([0.0]), np.array([0]), frame="test")

    def indicator(y, j):
        return (np.abs(np.asarray(y)) <= 1.0).astype(float)

    assert laplace_functional(empty, indicator) == 1.0
    assert laplace_functional(one, lambda y, j: np.zeros_like(np.asarray(y))) == 1.0
    assert laplace_functional(one, indicator) == pytest.approx(math.exp(-1.0))
    assert laplace_functional(one, indicator, shift=5.0) == 1.0


def test_phi_library_shapes():
    for name, phi in phi_library(2):
        ys = np.linspace(-10.0, 10.0, 401)
        for j in (0, 1):
            vals = phi(ys, np.full(ys.shape, j, dtype=int))
            assert (vals >= 0).all()
            assert vals[np.abs(ys) >= 5.0].max() == 0.0  # compact support


def test_extremal_counts_tight_over_time(spec_a, sd_a):
    """Mean number of recentered points above 0 stays bounded in t."""
    means = []
    for t, seed in ((8.0, 211), (10.0, 213)):
        m_t = front(t, sd_a)
        counts = [
            float(np.sum(simulate_replicate(spec_a, sd_a, (0.0, 0), t, seed, i).positions > m_t))
            for i in range(300)
        ]
        means.append(np.mean(counts))
    assert max(means) < 10.0
    assert max(means) / max(min(means), 1e-9) < 3.0


def test_conditional_exceedance_insufficient(spec_a, sd_a):
    with pytest.raises(InsufficientSamplesError):
        conditional_exceedance(spec_a, sd_a, 4.0, 6.0, 200, 17, min_accepted=50)


def test_conditional_exceedance_z_independence(spec_a, sd_a):
    """The overshoot law should not depend on the conditioning level."""
    h0 = conditional_exceedance(spec_a, sd_a, 7.0, 0.0, 20_000, 19, min_accepted=150)
    h1 = conditional_exceedance(spec_a, sd_a, 7.0, 1.0, 20_000, 23, min_accepted=100)
    assert ks_2samp(h0.overshoots, h1.overshoots).pvalue > 1e-3
    for pat in h0.bank.patterns[:20]:
        assert pat.locations.max() == pytest.approx(0.0)
        assert pat.locations.min() >= -h0.bank.depth - 1e-12


def test_m_infinity_proxy(spec_a, sd_a):
    vals, discard = m_infinity_samples(spec_a, sd_a, 6.0, 300, 29)
    assert discard < 0.2
    assert (vals > 0).all()


def _tiny_bank():
    pats = [
        PointPattern(np.array([0.0, -1.0]), np.array([0, 0]), frame="centered-at-max"),
        PointPattern(np.array([0.0]), np.array([0]), frame="centered-at-max"),
    ]
    return DecorationBank(patterns=pats, t=0.0, z=0.0, depth=5.0)


def test_dppp_empty_when_mass_zero(sd_a):
    pat = dppp_sample(0.0, 0.0, _tiny_bank(), -2.0, generator_for(1, 0), sd_a)
    assert pat.size == 0


def test_dppp_requires_bank_and_finite_window(sd_a):
    with pytest.raises(DomainError):
        dppp_sample(1.0, 1.0, DecorationBank([], 0.0, 0.0, 5.0), -2.0, generator_for(1, 0), sd_a)
    with pytest.raises(DomainError):
        dppp_sample(1.0, 1.0, _tiny_bank(), -math.inf, generator_for(1, 0), sd_a)


def test_dppp_atom_count_mean(sd_a):
    """Cluster-center count is Poisson with mean C * M * e^(-sqrt(2L) x_min);
    count clusters via the single-point decoration trick."""
    bank = DecorationBank([PointPattern(np.array([0.0]), np.array([0]), "centered-at-max")],
                          t=0.0, z=0.0, depth=1.0)
    c_inf, m_inf, x_min = 0.7, 1.3, -1.0
    target = c_inf * m_inf * math.exp(-sd_a.sqrt2lam * x_min)
    counts = np.array([
        dppp_sample(c_inf, m_inf, bank, x_min, generator_for(31, i), sd_a).size
        for i in range(10_000)
    ])
    rep = EstimatorReport.from_samples("atoms", counts, 31)
    assert abs(rep.estimate - target) <= 3.0 * rep.se


def test_dppp_decoration_translation(sd_a):
    rng = generator_for(37, 0)
    pat = dppp_sample(0.9, 1.0, _tiny_bank(), -1.5, rng, sd_a)
    assert np.all(pat.locations >= -1.5)
    # every point is either an atom (paired with nothing or a point 1 lower)
    # or sits exactly 1 below its atom
    locs = np.sort(pat.locations)[::-1]
    assert locs.size > 0


def test_limit_law_compare_shape(sd_a):
    res = limit_law_compare(np.array([0.0, 1.0, -1.0]), sd_a, 0.5, np.array([1.0, 2.0]))
    assert 0.0 <= res["sup_distance"] <= 1.0
    assert res["grid"].shape == res["ecdf"].shape == res["target"].shape


def test_limit_law_distance_small_and_shrinking(spec_a, sd_a):
    """Monte-Carlo law of M_t - m(t) against the mixed limit law built from
    the tail-integral constant and the martingale-limit proxy."""
    from mtbbm.extremal import estimate_C_infinity
    from mtbbm.simulate import simulate_max

    c_inf = float(estimate_C_infinity(spec_a, sd_a, [8.0, 16.0]).estimate)
    minf, _ = m_infinity_samples(spec_a, sd_a, 10.0, 500, 401)
    sups = []
    for t, seed in ((6.0, 403), (10.0, 409)):
        maxima = np.array([
            simulate_max(spec_a, (0.0, 0), t, generator_for(seed, i)) for i in range(4000)
        ]) - front(t, sd_a)
        sups.append(limit_law_compare(maxima, sd_a, c_inf, minf)["sup_distance"])
    assert sups[-1] < 0.15
    assert sups[1] < sups[0]
