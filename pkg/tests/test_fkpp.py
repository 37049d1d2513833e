import math

import numpy as np
import pytest

from mtbbm.errors import DomainError, DomainTooSmallError
from mtbbm.fkpp import (
    GridSolution,
    constant_ic,
    custom_ic,
    cv_integral,
    front_level_position,
    heaviside_ic,
    laplace_ic,
    solve,
    traveling_wave_profile,
    truncated_ic,
    typed_heaviside_ic,
)
from mtbbm.extremal import test_functions as phi_library
from mtbbm.simulate import run_replicates, typed_max
from mtbbm.spectral import front


def test_constant_ic_reduces_to_logistic(spec_a, sd_a):
    # v' = v - v^2 with v(0) = 1/2 gives v(1) = e / (1 + e)
    sol = solve(spec_a, sd_a, constant_ic(0.5), t_end=1.0, x_lo=-5.0, x_hi=5.0)
    target = math.e / (1.0 + math.e)
    assert np.abs(sol.at_time(1.0)[0] - target).max() < 1e-6
    assert sol.max_violation <= 1e-9


def test_heaviside_t0_is_the_ic(spec_a, sd_a):
    sol = solve(spec_a, sd_a, heaviside_ic(), t_end=0.0, x_lo=-5.0, x_hi=5.0)
    v = sol.at_time(0.0)[0]
    assert v[sol.x < -1e-12].min() == 1.0
    assert v[sol.x > 1e-12].max() == 0.0
    assert v[np.abs(sol.x) < 1e-12] == 0.5
    assert front_level_position(sol, 0.0, 0, 0.5) == pytest.approx(0.0)


def test_mckean_duality_model_a(spec_a, sd_a):
    sol = solve(spec_a, sd_a, heaviside_ic(), t_end=3.0, x_hi=15.0)
    xs = [0.0, 1.0, 2.0, 3.0, 4.0]

    def exceed(s):
        return np.array([float(s.positions.max() > x) for x in xs])

    rep = run_replicates(spec_a, sd_a, (0.0, 0), 3.0, 20_000, 303, exceed)
    for k, x in enumerate(xs):
        pde = float(sol.interp(3.0, 0, [x])[0])
        assert abs(pde - rep.estimate[k]) <= 3.0 * rep.se[k] + 0.02


def test_mckean_duality_model_b_typed(spec_b, sd_b):
    sol = solve(spec_b, sd_b, typed_heaviside_ic(1), t_end=2.0, x_hi=12.0)
    xs = [0.0, 1.0, 2.0]

    def exceed(s):
        m = typed_max(s, 1)
        m = -math.inf if m is None else m
        return np.array([float(m > x) for x in xs])

    rep = run_replicates(spec_b, sd_b, (0.0, 0), 2.0, 20_000, 307, exceed)
    for k, x in enumerate(xs):
        pde = float(sol.interp(2.0, 0, [x])[0])
        assert abs(pde - rep.estimate[k]) <= 3.0 * rep.se[k] + 0.02


def test_laplace_ic_matches_mc_laplace_functional(spec_a, sd_a):
    """1 - v(t, x) with survival-factor data reproduces the Monte-Carlo
    Laplace functional of the speed-frame pattern shifted by -x."""
    name, phi = phi_library(1)[0]
    sol = solve(spec_a, sd_a, laplace_ic(phi), t_end=2.0, x_lo=-12.0, x_hi=12.0)
    t = 2.0

    def functional(s, x):
        return float(np.exp(-np.sum(phi(s.positions - x, s.types))))

    for x in (0.0, 1.5):
        rep = run_replicates(spec_a, sd_a, (0.0, 0), t, 20_000, 311,
                             lambda s, x=x: functional(s, x))
        pde = 1.0 - float(sol.interp(t, 0, [x])[0])
        assert abs(pde - rep.estimate) <= 3.0 * rep.se + 0.01


def test_order_preservation_on_random_ic_pairs(spec_b, sd_b):
    rng = np.random.default_rng(12)
    for trial in range(3):
        a = np.sort(rng.random(3))[::-1]

        def lower(x, i, a=a):
            return np.full(np.asarray(x).shape, a[i + 1] if i == 0 else a[2])

        def upper(x, i, a=a):
            return np.full(np.asarray(x).shape, a[i] if i == 0 else a[1])

        kw = dict(t_end=1.0, x_lo=-4.0, x_hi=4.0, dx=0.1)
        sol_lo = solve(spec_b, sd_b, custom_ic(lower), **kw)
        sol_hi = solve(spec_b, sd_b, custom_ic(upper), **kw)
        assert np.all(sol_lo.at_time(1.0) <= sol_hi.at_time(1.0) + 1e-12)


def test_range_and_violation_accounting(spec_b, sd_b):
    sol = solve(spec_b, sd_b, typed_heaviside_ic(0), t_end=2.0, x_hi=12.0)
    assert sol.values.min() >= 0.0 and sol.values.max() <= 1.0
    assert sol.max_violation <= 1e-9


def test_grid_convergence_halving_dx(spec_a, sd_a):
    fine_kw = dict(t_end=3.0, x_lo=-15.0, x_hi=15.0)
    coarse = solve(spec_a, sd_a, heaviside_ic(), dx=0.05, **fine_kw)
    fine = solve(spec_a, sd_a, heaviside_ic(), dx=0.025, **fine_kw)
    probe = np.linspace(-10.0, 10.0, 401)
    diff = np.abs(coarse.interp(3.0, 0, probe) - fine.interp(3.0, 0, probe)).max()
    assert diff < 1e-3


def test_front_tracking_and_wave_profile(spec_a, sd_a):
    save = [20.0, 25.0, 30.0]
    sol = solve(spec_a, sd_a, heaviside_ic(), t_end=30.0, save_times=save)
    # centered profiles settle: sup distance between t=25 and t=30 is small
    off1, prof1 = traveling_wave_profile(sol, 25.0, 0, window=(-5.0, 10.0))
    off2, prof2 = traveling_wave_profile(sol, 30.0, 0, window=(-5.0, 10.0))
    assert np.abs(prof1 - prof2).max() < 0.02
    assert np.all(np.diff(prof2) <= 1e-9)  # monotone nonincreasing
    # tail shape: log v + sqrt(2 lambda*) x - log x flat over [3, 6]
    xf = front_level_position(sol, 30.0, 0, 0.5)
    xs = np.arange(3.0, 6.0 + 1e-9, 0.25)
    vals = sol.interp(30.0, 0, xf + xs)
    shape = np.log(vals) + sd_a.sqrt2lam * xs - np.log(xs)
    assert shape.max() - shape.min() < 0.5


def test_cv_integral_zero_solution(spec_a, sd_a):
    sol = solve(spec_a, sd_a, constant_ic(0.0), t_end=1.0, x_lo=-5.0, x_hi=10.0)
    assert cv_integral(sol, sd_a, 1.0) == 0.0


def test_cv_integral_stabilization_direction(spec_a, sd_a):
    sol = solve(spec_a, sd_a, heaviside_ic(), t_end=8.0, save_times=[4.0, 8.0])
    c4 = cv_integral(sol, sd_a, 4.0)
    c8 = cv_integral(sol, sd_a, 8.0)
    assert 0.0 < c4 < c8 < 1.0


def test_cv_integral_domain_guard(spec_a, sd_a):
    # right margin far too small for the traveling frame at r
    with pytest.raises((DomainTooSmallError, DomainError)):
        sol = solve(spec_a, sd_a, heaviside_ic(), t_end=2.0, x_lo=-8.0, x_hi=4.0)
        cv_integral(sol, sd_a, 2.0)


def test_boundary_contamination_detector(spec_a, sd_a):
    with pytest.raises(DomainTooSmallError, match="front reached the right margin"):
        solve(spec_a, sd_a, heaviside_ic(), t_end=6.0, x_lo=-8.0, x_hi=4.0,
              save_times=[3.0, 6.0])


def test_save_time_validation(spec_a, sd_a):
    with pytest.raises(DomainError, match="save time"):
        solve(spec_a, sd_a, heaviside_ic(), t_end=1.0, x_lo=-4.0, x_hi=4.0,
              save_times=[0.005])
    with pytest.raises(DomainError, match="not saved"):
        sol = solve(spec_a, sd_a, heaviside_ic(), t_end=1.0, x_lo=-4.0, x_hi=4.0)
        sol.at_time(0.5)


def test_truncated_ic_left_state(spec_a, sd_a):
    name, phi = phi_library(1)[0]
    ic = truncated_ic(phi, 3.0)
    v0 = ic.discretize(np.array([-6.0, -3.0 - 1e-12, 0.0, 6.0]), 1)
    assert v0[0, 0] == 1.0  # fully absorbing left of -L
    assert v0[0, -1] == pytest.approx(0.0)


def test_front_level_domain_errors(spec_a, sd_a):
    sol = solve(spec_a, sd_a, constant_ic(0.8), t_end=0.0, x_lo=-4.0, x_hi=4.0)
    with pytest.raises(DomainError):
        front_level_position(sol, 0.0, 0, 0.5)  # never crosses
    with pytest.raises(DomainError):
        front_level_position(sol, 0.0, 0, 1.5)  # level outside (0, 1)
