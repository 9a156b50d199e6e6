import math

import numpy as np
import pytest

from busyloss import distributions as d
from busyloss import queue_sim as q
from busyloss.analytics import SystemModel, compute_r
from busyloss.ordering import check_against_cdf, check_dominance, standard_error


def _plan(A, B, n, reps, seed=0, **kw):
    return q.SimulationPlan(SystemModel(A, B, n), reps, seed, **kw)


def test_mm_zero_buffer_losses_are_geometric():
    res = q.run_many(_plan(d.exponential(1.0), d.exponential(2.0), 0, 100_000, seed=1))
    L = res.losses
    assert abs(L.mean() - 0.5) < 3 * standard_error(L)
    # P[L = 0] = 1 - r = 2/3
    p0 = (L.values == 0).mean()
    assert abs(p0 - 2 / 3) < 3 * math.sqrt(2 / 9 / L.n_obs)


@pytest.mark.parametrize("n", [1, 2])
def test_mm_loss_mean_is_rho_power(n):
    res = q.run_many(_plan(d.exponential(1.0), d.exponential(2.0), n, 100_000, seed=2))
    assert abs(res.losses.mean() - 0.5 ** (n + 1)) < 3 * standard_error(res.losses)


def test_deterministic_no_overlap():
    rec = q.run_busy_period(SystemModel(d.deterministic(2.0), d.deterministic(1.0), 1), np.random.default_rng(0))
    assert rec.served == 1 and rec.losses == 0 and rec.duration == 1.0
    assert rec.crossing_counts == [1, 0, 0]


def test_deterministic_tie_processes_departure_first():
    # arrival and departure coincide at t = 1: the period ends before the arrival
    rec = q.run_busy_period(SystemModel(d.deterministic(1.0), d.deterministic(1.0), 0), np.random.default_rng(0))
    assert rec.served == 1 and rec.losses == 0


def test_md_zero_buffer_empty_probability():
    res = q.run_many(_plan(d.exponential(1.0), d.deterministic(1.0), 0, 100_000, seed=3))
    p0 = (res.losses.values == 0).mean()
    assert abs(p0 - math.exp(-1)) < 3 * math.sqrt(math.exp(-1) * (1 - math.exp(-1)) / res.n_ok)


@pytest.mark.parametrize(
    "A,B,n",
    [(d.exponential(1.0), d.exponential(2.0), 2), (d.deterministic(1.0), d.exponential(1.25), 3),
     (d.exponential(1.0), d.deterministic(1.0), 1), (d.erlang(2, 2.0), d.hyperexponential([0.5, 0.5], [1, 4]), 2)],
    ids=str,
)
def test_conservation_and_inserted_counts(A, B, n):
    res = q.run_many(_plan(A, B, n, 4000, seed=4, collect_inserted_counts=True))
    counts = res.crossing_counts
    assert counts.shape[1] == n + 2
    assert np.all(counts[:, 0] == 1)
    # every arrival is either served or lost
    np.testing.assert_array_equal(counts.sum(axis=1), res.served.values + res.losses.values)
    np.testing.assert_array_equal(counts[:, n + 1], res.losses.values)
    # summed inserted counts at level j equal the crossings of level j + 1
    kap = res.inserted_counts
    for j in range(n + 1):
        assert kap[kap[:, 0] == j, 1].sum() == counts[:, j + 1].sum()
    assert (kap[:, 0] == 0).sum() == res.n_ok


def test_run_busy_period_record_consistency():
    model = SystemModel(d.deterministic(1.0), d.exponential(1.25), 2)
    rng = np.random.default_rng(9)
    for _ in range(200):
        rec = q.run_busy_period(model, rng, collect_inserted_counts=True)
        assert rec.arrivals == rec.served + rec.losses
        assert rec.losses == rec.crossing_counts[-1]
        assert sum(k for j, k in rec.inserted_counts if j == 2) == rec.losses


def test_run_many_is_reproducible():
    plan = _plan(d.deterministic(1.0), d.exponential(1.25), 2, 10_000, seed=5)
    a, b = q.run_many(plan), q.run_many(plan)
    np.testing.assert_array_equal(a.losses.values, b.losses.values)
    np.testing.assert_array_equal(a.duration.values, b.duration.values)


def test_run_many_independent_of_worker_count():
    plan = _plan(d.erlang(2, 2.0), d.exponential(1.5), 1, 3 * 4096 + 17, seed=6)
    a, b = q.run_many(plan, workers=1), q.run_many(plan, workers=8)
    np.testing.assert_array_equal(a.losses.values, b.losses.values)
    np.testing.assert_array_equal(a.crossing_counts, b.crossing_counts)
    np.testing.assert_array_equal(a.duration.values, b.duration.values)


def test_key_changes_stream():
    base = dict(seed=7)
    a = q.run_many(_plan(d.exponential(1.0), d.exponential(2.0), 1, 1000, key=("x",), **base))
    b = q.run_many(_plan(d.exponential(1.0), d.exponential(2.0), 1, 1000, key=("y",), **base))
    assert not np.array_equal(a.duration.values, b.duration.values)


def test_event_cap_truncates():
    plan = _plan(d.exponential(1.0), d.exponential(1.0), 3, 2000, seed=8, event_cap=5)
    res = q.run_many(plan)
    assert res.truncation_count > 0
    assert res.n_ok + res.truncation_count == 2000
    assert res.losses.truncation_count == res.truncation_count


def test_infinite_buffer_requires_exponential_service():
    with pytest.raises(ValueError):
        q.run_busy_period(SystemModel(d.exponential(1.0), d.deterministic(0.5), None), np.random.default_rng(0))


def test_infinite_buffer_generation_means():
    # E f(j) = phi^j with phi = 1/2 for M/M(lam=1, mu=2)
    res = q.run_many(q.SimulationPlan(SystemModel(d.exponential(1.0), d.exponential(2.0), None), 100_000, 10))
    for j in range(4):
        g = res.generation(j)
        assert abs(g.mean() - 0.5**j) < 3 * g.std() / math.sqrt(g.size) + 1e-12


@pytest.mark.parametrize("A", [d.deterministic(1.0), d.erlang(3, 3.0), d.hyperexponential([0.5, 0.5], [0.5, 2.0])],
                         ids=str)
def test_zero_buffer_distances_follow_interarrival_law(A):
    s = q.sample_level0_distances(SystemModel(A, d.exponential(1.5), 0), 20_000, seed=11)
    assert s.n_obs == 20_000
    excess, _ = check_against_cdf(s, A.cdf, alpha=0.001)
    assert excess <= 0


def test_one_buffer_distances_deterministic_arrivals():
    mu = 1.25

    def cdf(x):
        x = np.asarray(x, dtype=float)
        v = (np.exp(mu * x - mu) - math.exp(-mu)) / (1 - math.exp(-mu))
        return np.clip(v, 0.0, 1.0)

    s = q.sample_level0_distances(SystemModel(d.deterministic(1.0), d.exponential(mu), 1), 20_000, seed=12)
    excess, _ = check_against_cdf(s, cdf, alpha=0.001)
    assert excess <= 0
    assert s.values.max() <= 1.0


@pytest.mark.parametrize("n", [1, 3])
def test_mm_distances_are_exponential(n):
    s = q.sample_level0_distances(SystemModel(d.exponential(1.0), d.exponential(2.0), n), 20_000, seed=13)
    excess, _ = check_against_cdf(s, d.exponential(1.0).cdf, alpha=0.001)
    assert excess <= 0


def test_distances_independent_of_worker_count():
    m = SystemModel(d.deterministic(1.0), d.exponential(1.25), 2)
    a = q.sample_level0_distances(m, 9000, seed=14, workers=1)
    b = q.sample_level0_distances(m, 9000, seed=14, workers=8)
    np.testing.assert_array_equal(a.values, b.values)
    assert a.truncation_count == b.truncation_count


def test_distance_convention_drops_last_return():
    assert q._distances([0.1, 0.2, 0.3], 3) == [0.1, 0.2]
    assert q._distances([0.4], 1) == [0.4]
    assert q._distances([], 0) == []


def test_single_distance_sampler():
    m = SystemModel(d.deterministic(1.0), d.exponential(1.25), 0)
    x = q.sample_level0_distance(m, np.random.default_rng(0))
    assert x == 1.0


def test_distance_budget_exhausted():
    # Det(5) arrivals against Exp(100) service essentially never reach level 1 twice
    m = SystemModel(d.deterministic(5.0), d.exponential(100.0), 0)
    with pytest.raises(q.ResampleBudgetError):
        q.sample_level0_distances(m, 10, seed=0, budget_blocks=1, workers=1)


def test_wald_identity():
    res = q.run_many(_plan(d.deterministic(1.0), d.exponential(1.25), 2, 100_000, seed=15))
    w = res.wald_residuals()
    assert abs(w.mean()) < 3 * w.std() / math.sqrt(w.size)


def test_wald_identity_general_service():
    # E[T] = E[nu] / mu holds for any service law
    B = d.hyperexponential([0.5, 0.5], [1.0, 4.0])
    res = q.run_many(_plan(d.erlang(2, 2.0), B, 2, 100_000, seed=16))
    w = res.wald_residuals()
    assert abs(w.mean()) < 3 * w.std() / math.sqrt(w.size)


def test_inserted_counts_mm_are_geometric():
    res = q.run_many(_plan(d.exponential(1.0), d.exponential(2.0), 2, 40_000, seed=17, collect_inserted_counts=True))
    kap = res.inserted_counts[:, 1]
    r = 1 / 3
    excess, _ = check_against_cdf(kap, lambda k: np.where(np.asarray(k) < 0, 0.0,
                                                          1 - r ** (np.floor(k) + 1)), alpha=0.001)
    assert excess <= 0


def test_inserted_counts_dominate_geometric_for_nbu_nwu():
    A, B = d.erlang(2, 2.0), d.hyperexponential([0.5, 0.5], [1.0, 4.0])
    r = compute_r(A, B)
    res = q.run_many(_plan(A, B, 2, 20_000, seed=18, collect_inserted_counts=True))
    kap = res.inserted_counts[:, 1]
    geo = np.random.default_rng(19).geometric(1 - r, size=kap.size) - 1
    assert check_dominance(kap, geo, ">=", alpha=0.001).consistent
    assert kap.mean() >= r / (1 - r) - 3 * kap.std() / math.sqrt(kap.size)
