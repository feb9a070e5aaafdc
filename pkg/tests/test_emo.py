import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emothresh._backend import BACKENDS
from emothresh.emo import (
    EmoParams,
    Particle,
    Population,
    compute_charges,
    compute_forces,
    initialize,
    local_search,
    maximize,
    move_population,
    optimize,
    select_next,
)
from emothresh.objectives import HistogramObjective


def sphere(center):
    c = np.asarray(center, dtype=float)
    return lambda X: -((np.atleast_2d(X) - c) ** 2).sum(axis=1)


fitness_arrays = st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=30).map(np.array)


def test_defaults():
    p = EmoParams()
    assert (p.iter_max, p.iter_local, p.delta, p.pop_size, p.stall_fraction) == (150, 10, 0.025, 50, 0.1)
    assert p.stall_window == 15


@pytest.mark.parametrize(
    "bad", [dict(iter_max=0), dict(iter_local=-1), dict(pop_size=1), dict(delta=0), dict(stall_fraction=0), dict(lower=5, upper=5)]
)
def test_param_validation(bad):
    with pytest.raises(ValueError):
        EmoParams(**bad)


def test_initialize(two_impulse):
    obj = HistogramObjective("otsu", two_impulse)
    a = initialize(EmoParams(), 5, 7, obj)
    b = initialize(EmoParams(), 5, 7, obj)
    assert a.positions.shape == (50, 5)
    assert np.array_equal(a.positions, b.positions) and np.array_equal(a.fitness, b.fitness)
    assert (a.positions >= 0).all() and (a.positions <= 255).all()


def test_charges_examples():
    assert np.array_equal(compute_charges(np.full(4, 3.0), 2), np.ones(4))
    q = compute_charges(np.array([1.0, 5.0, 2.0]), 2)
    assert q[1] == 1.0
    with pytest.raises(ValueError):
        compute_charges(np.array([1.0, 2.0]))


@given(fitness_arrays, st.integers(1, 5))
def test_charge_range(f, k):
    q = compute_charges(f, k)
    assert ((q > 0) & (q <= 1)).all()
    assert (q[f == f.max()] == 1.0).all()
    if abs((f - f.max()).sum()) >= 1e-12:  # below this all charges are 1 by convention
        assert q[np.argmin(f)] < 1.0  # its share of the gap sum is at least 1/N


@given(st.lists(st.integers(-1000, 1000), min_size=2, max_size=30).map(lambda v: np.array(v, float)),
       st.integers(-1000, 1000), st.integers(1, 5))
def test_charge_shift_invariance(f, shift, k):
    assert np.array_equal(compute_charges(f, k), compute_charges(f + shift, k))


@pytest.fixture(params=["python", "cython"])
def kern(request):
    if request.param not in BACKENDS:
        pytest.skip("compiled kernels not built")
    return request.param


def test_forces_two_particles(kern):
    pop = Population(np.array([[0.0], [10.0]]), np.array([1.0, 2.0]))
    F = compute_forces(pop, np.ones(2), backend=kern)
    assert F[0, 0] == pytest.approx(0.1) and F[1, 0] == pytest.approx(0.1)


def test_coincident_particles_skipped(kern):
    pop = Population(np.array([[5.0, 5.0], [5.0, 5.0]]), np.array([1.0, 2.0]))
    assert np.array_equal(compute_forces(pop, np.ones(2), backend=kern), np.zeros((2, 2)))


@given(st.integers(2, 12), st.integers(1, 4), st.integers(0, 1000))
@settings(max_examples=30)
def test_force_backends_agree(n, k, seed):
    if "cython" not in BACKENDS:
        return
    rng = np.random.default_rng(seed)
    pop = Population(rng.random((n, k)) * 255, rng.random(n))
    q = compute_charges(pop)
    assert np.allclose(compute_forces(pop, q, "python"), compute_forces(pop, q, "cython"), rtol=1e-12, atol=1e-15)


def test_move_respects_upper_bound():
    X = np.array([[255.0, 10.0], [100.0, 100.0]])
    pop = Population(X, np.array([0.0, 1.0]))
    F = np.array([[1.0, 1.0], [0.0, 0.0]])
    moved = move_population(pop, F, 0, sphere([0, 0]))
    assert moved.positions[0, 0] == 255.0
    assert moved.positions[0, 1] > 10.0
    assert np.array_equal(moved.positions[1], X[1])  # best particle is fixed


def test_zero_force_particle_stays():
    X = np.array([[30.0], [40.0]])
    moved = move_population(Population(X, np.array([0.0, 1.0])), np.zeros((2, 1)), 0, sphere([0]))
    assert np.array_equal(moved.positions, X)


@given(st.integers(2, 10), st.integers(1, 4), st.integers(0, 10_000))
@settings(max_examples=40)
def test_move_and_local_search_stay_in_bounds(n, k, seed):
    rng = np.random.default_rng(seed)
    params = EmoParams(delta=0.5)
    fit = sphere(rng.random(k) * 255)
    pop = initialize(params, k, rng, fit)
    F = compute_forces(pop, compute_charges(pop)) * 1e6
    moved = move_population(pop, F, rng, fit, params)
    assert (moved.positions >= 0).all() and (moved.positions <= 255).all()
    for x, fx in zip(moved.positions, moved.fitness):
        z = local_search(Particle(x, fx), params, rng, fit)
        assert (z.position >= 0).all() and (z.position <= 255).all()
        assert z.fitness >= fx
        assert select_next(Particle(x, fx), z).fitness >= fx


def test_local_search_zero_budget():
    p = Particle(np.array([12.0]), -5.0)
    z = local_search(p, EmoParams(iter_local=0), 0, sphere([0]))
    assert np.array_equal(z.position, p.position) and z.fitness == p.fitness


def test_local_search_fixed_point_at_optimum():
    p = Particle(np.array([100.0]), 0.0)
    z = local_search(p, EmoParams(), 0, sphere([100]))
    assert z.position[0] == 100.0 and z.fitness == 0.0


def test_local_search_improves(three_impulse):
    obj = HistogramObjective("otsu", three_impulse)
    x = np.array([30.0, 130.0])
    fx = float(obj(x[None])[0])
    z = local_search(Particle(x, fx), EmoParams(delta=0.2), 3, obj)
    assert z.fitness > fx


def test_select_next():
    y3, z5 = Particle(np.zeros(1), 3.0), Particle(np.ones(1), 5.0)
    assert select_next(y3, z5) is z5
    y5 = Particle(np.zeros(1), 5.0)
    assert select_next(y5, z5) is y5


def test_two_impulse_k1(two_impulse, backend):
    res = optimize("otsu", two_impulse, 1, seed=0, backend=backend)
    assert res.best_fitness == 5625.0
    assert 51 <= res.best_thresholds[0] <= 200
    assert res.iterations_run <= 150
    assert res.stop_reason == "stall"


def test_history_and_determinism(suite_dists):
    dist = suite_dists["trimodal"]
    a = optimize("kapur", dist, 3, seed=11)
    b = optimize("kapur", dist, 3, seed=11)
    assert a.best_thresholds == b.best_thresholds and a.history == b.history
    assert np.array_equal(a.best_position, b.best_position)
    assert all(x <= y for x, y in zip(a.history, a.history[1:]))
    assert a.best_fitness == a.history[-1]
    assert len(a.history) == a.iterations_run


def test_backend_parity_otsu(suite_dists):
    if "cython" not in BACKENDS:
        pytest.skip("compiled kernels not built")
    dist = suite_dists["quadmodal"]
    py = optimize("otsu", dist, 3, seed=4, backend="python")
    cy = optimize("otsu", dist, 3, seed=4, backend="cython")
    assert py.history == cy.history and py.best_thresholds == cy.best_thresholds
    assert py.evaluations == cy.evaluations


def test_iter_max_stop(uniform):
    res = optimize("otsu", uniform, 2, EmoParams(iter_max=3, stall_fraction=1.0), seed=0)
    assert res.iterations_run == 3 and res.stop_reason == "iter_max"


def test_generic_callable():
    res = maximize(sphere([40.0, 200.0, 128.0]), 3, seed=2)
    assert res.best_thresholds == ()
    assert np.allclose(res.best_position, [40, 200, 128], atol=2.0)


@pytest.mark.parametrize("k", [0, 255])
def test_invalid_k(uniform, k):
    with pytest.raises(ValueError):
        optimize("otsu", uniform, k)
