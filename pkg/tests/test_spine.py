import math

import numpy as np
import pytest

from mtbbm.errors import ModelError
from mtbbm.models import ModelSpec
from mtbbm.reports import EstimatorReport
from mtbbm.rng import generator_for
from mtbbm.spine import (
    NAMED_FUNCTIONALS,
    many_to_one_check,
    simulate_spine,
    size_biased_offspring,
    size_biased_tables,
    spine_generator,
)


def test_generator_model_a(spec_a, sd_a):
    gen = spine_generator(spec_a, sd_a)
    # with one type the chain never moves, but branch events fire at a + lambda*
    np.testing.assert_allclose(gen.matrix, [[0.0]], atol=1e-12)
    np.testing.assert_allclose(gen.event_rates, [2.0])


def test_generator_model_b(spec_b, sd_b):
    gen = spine_generator(spec_b, sd_b)
    np.testing.assert_allclose(gen.matrix, [[-2.0, 2.0], [2.0, -2.0]], atol=1e-10)
    np.testing.assert_allclose(gen.mu, [0.5, 0.5], atol=1e-10)


def test_generator_model_c_eigen_identity(spec_c, sd_c):
    # off-diagonal entries must equal a_i + lambda* because each row has a
    # single destination: a_i m_ij h_j / h_i = a_i + lambda*
    gen = spine_generator(spec_c, sd_c)
    lam = sd_c.lambda_star
    assert gen.matrix[0, 1] == pytest.approx(1.0 + lam, abs=1e-10)
    assert gen.matrix[1, 0] == pytest.approx(2.0 + lam, abs=1e-10)
    np.testing.assert_allclose(gen.matrix.sum(axis=1), [0.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(sd_c.mu @ gen.matrix, [0.0, 0.0], atol=1e-10)


def test_size_biased_probabilities_sum_to_one(spec_a, spec_b, spec_c, sd_a, sd_b, sd_c):
    for spec, sd in ((spec_a, sd_a), (spec_b, sd_b), (spec_c, sd_c)):
        for i, (atoms, total) in enumerate(size_biased_tables(spec, sd)):
            assert total == pytest.approx(1.0, abs=1e-10), (spec.name, i)
            for _, _, cont in atoms:
                assert cont.sum() == pytest.approx(1.0, abs=1e-12)


def test_size_biased_offspring_deterministic_cases(spec_a, spec_b, sd_a, sd_b):
    rng = generator_for(1, 0)
    kvec, j = size_biased_offspring(spec_a, sd_a, 0, rng)
    np.testing.assert_array_equal(kvec, [2])
    assert j == 0
    kvec, j = size_biased_offspring(spec_b, sd_b, 0, rng)
    np.testing.assert_array_equal(kvec, [0, 2])
    assert j == 1


def test_spine_branch_event_rate(spec_a, sd_a):
    # events fire at a + lambda* = 2; expect ~2t of them
    counts = [
        simulate_spine(spec_a, sd_a, 0, 10.0, generator_for(3, i)).branch_times.shape[0]
        for i in range(2000)
    ]
    rep = EstimatorReport.from_samples("events", counts, 3)
    assert abs(rep.estimate - 20.0) <= 3.0 * rep.se
    # d = 1: branch events never change the type
    path = simulate_spine(spec_a, sd_a, 0, 10.0, generator_for(3, 0))
    assert path.jump_times.size == 0


def test_spine_occupation_model_b(spec_b, sd_b):
    frac = np.zeros(2)
    n_batch = 20
    batch = np.empty(n_batch)
    for i in range(n_batch):
        path = simulate_spine(spec_b, sd_b, 0, 10.0, generator_for(5, i))
        batch[i] = path.occupation_fractions(2)[0]
        frac += path.occupation_fractions(2)
    rep = EstimatorReport.from_samples("occ", batch, 5)
    assert abs(rep.estimate - 0.5) <= 3.0 * rep.se


def test_spine_occupation_model_c(spec_c, sd_c):
    # long path split into batches for a batch-mean standard error
    n_batch = 25
    batch = np.empty(n_batch)
    for i in range(n_batch):
        path = simulate_spine(spec_c, sd_c, i % 2, 40.0, generator_for(7, i))
        batch[i] = path.occupation_fractions(2)[0]
    rep = EstimatorReport.from_samples("occ", batch, 7)
    assert abs(rep.estimate - sd_c.mu[0]) <= 3.0 * rep.se
    assert sd_c.mu.sum() == pytest.approx(1.0, abs=1e-12)


def test_spine_terminal_position_law(spec_b, sd_b):
    t = 4.0
    xs = np.empty(3000)
    jumps = np.empty(3000)
    for i in range(3000):
        path = simulate_spine(spec_b, sd_b, 0, t, generator_for(11, i))
        xs[i] = path.terminal_position
        jumps[i] = path.branch_times.shape[0]
    assert abs(xs.mean()) <= 3.0 * xs.std(ddof=1) / math.sqrt(xs.size)
    assert abs(xs.var(ddof=1) - t) <= 4.0 * t * math.sqrt(2.0 / xs.size)
    # independence of motion and type chain: vanishing correlation
    corr = np.corrcoef(xs, jumps)[0, 1]
    assert abs(corr) <= 3.0 / math.sqrt(xs.size)


@pytest.mark.parametrize("h_name, target", [
    ("ones", math.e),
    ("left-half", math.e / 2.0),
])
def test_many_to_one_model_a(spec_a, sd_a, h_name, target):
    lhs, rhs = many_to_one_check(spec_a, sd_a, NAMED_FUNCTIONALS[h_name], 1.0, 20_000, 13)
    tol = 3.0 * math.hypot(lhs.se, rhs.se)
    assert abs(lhs.estimate - rhs.estimate) <= max(tol, 1e-12)
    assert abs(lhs.estimate - target) <= 3.0 * lhs.se
    # H == 1 makes the spine side deterministic, so allow round-off there
    assert abs(rhs.estimate - target) <= max(3.0 * rhs.se, 1e-12)


def test_many_to_one_model_b_typed(spec_b, sd_b):
    target = 0.5 * (math.e**2 - math.e**-6)
    lhs, rhs = many_to_one_check(spec_b, sd_b, NAMED_FUNCTIONALS["type-1"], 2.0, 20_000, 17)
    tol = 3.0 * math.hypot(lhs.se, rhs.se)
    assert abs(lhs.estimate - rhs.estimate) <= tol
    assert abs(lhs.estimate - target) <= 3.0 * lhs.se


def test_spine_rejects_self_offspring_multitype():
    spec = ModelSpec(rates=(1.0, 1.0), offspring=(
        (((1, 1), 1.0),),
        (((2, 0), 1.0),),
    ))
    from mtbbm.spectral import spectral_data

    sd = spectral_data(spec, permissive=True)
    with pytest.raises(ModelError, match="strict-mode"):
        spine_generator(spec, sd)
    with pytest.raises(ModelError):
        simulate_spine(spec, sd, 0, 1.0, generator_for(1, 0))
