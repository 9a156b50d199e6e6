"""Samplers for the three comparison processes.

* ``geometric-gw``: Galton-Watson process, one ancestor, Geometric(r)
  offspring ``P[m] = r**m (1 - r)``.
* ``compound``: ``sum_{i=1}^{X_n} tau_i`` with ``X_n`` from the geometric
  process and ``tau_i`` the number of Poisson(lam) arrivals during a
  service time drawn from ``B``.
* ``gim1-type``: generation sizes realized as the crossing counts ``f(n)``
  of an infinite-buffer ``A/M/1`` busy period. Offspring of different
  generations are dependent; the dependence comes from the queue path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import streams
from .analytics import SystemModel
from .distributions import exponential
from .ordering import EmpiricalSample
from .queue_sim import DEFAULT_EVENT_CAP, SimulationPlan, _simulate, run_many

POPULATION_CAP = 10**8
PROCESSES = ("geometric-gw", "compound", "gim1-type")


class PopulationCapError(RuntimeError):
    pass


class TruncatedDrawError(RuntimeError):
    pass


@dataclass(frozen=True)
class GenerationSample:
    generation: int
    count: int
    process: str

    def __post_init__(self):
        if self.process not in PROCESSES:
            raise ValueError(f"unknown process {self.process!r}")
        if self.generation == 0 and self.count != 1:
            raise ValueError("generation 0 always has exactly one individual")


def _check_r(r):
    if not 0.0 < r < 1.0:
        raise ValueError(f"r must lie in (0, 1), got {r!r}")


def sample_gw(r, n, rng, cap=POPULATION_CAP):
    """Size of generation ``n``, sampling each individual's offspring separately."""
    _check_r(r)
    x = 1
    for _ in range(n):
        if x == 0:
            return 0
        if x > cap:
            raise PopulationCapError(f"population {x} exceeds cap {cap}")
        # numpy's geometric counts trials, offspring counts failures
        x = int(rng.geometric(1.0 - r, size=x).sum()) - x
    return x


def sample_gw_many(r, n, size, rng, cap=POPULATION_CAP):
    """``size`` independent generation-``n`` sizes.

    The offspring total of ``k`` individuals is NegativeBinomial(k, 1 - r),
    so whole generations are drawn at once.
    """
    _check_r(r)
    x = np.ones(size, dtype=np.int64)
    for _ in range(n):
        alive = x > 0
        if not alive.any():
            break
        if x.max() > cap:
            raise PopulationCapError(f"population {int(x.max())} exceeds cap {cap}")
        nxt = np.zeros_like(x)
        nxt[alive] = rng.negative_binomial(x[alive], 1.0 - r)
        x = nxt
    return x


def sample_tau(B, lam, size, rng):
    """Mixed-Poisson counts: draw a service time, then Poisson(lam * S) arrivals."""
    s = np.asarray(B.sample(rng, size), dtype=float)
    return rng.poisson(lam * s)


def _check_compound(r, B, lam, tol=1e-9):
    expected = 1.0 - B.lst(lam)
    if abs(r - expected) > tol:
        raise ValueError(f"r={r} inconsistent with 1 - B_hat(lam)={expected}")


def sample_compound(r, B, lam, n, rng):
    """One draw of ``sum_{i=1}^{X_n} tau_i``."""
    _check_compound(r, B, lam)
    x = sample_gw(r, n, rng)
    if x == 0:
        return 0
    return int(sample_tau(B, lam, x, rng).sum())


def sample_compound_many(r, B, lam, n, size, rng):
    _check_compound(r, B, lam)
    x = sample_gw_many(r, n, size, rng)
    total = int(x.sum())
    out = np.zeros(size, dtype=np.int64)
    if total:
        tau = sample_tau(B, lam, total, rng)
        owner = np.repeat(np.arange(size), x)
        np.add.at(out, owner, tau)
    return out


def _gim1_model(A, mu):
    model = SystemModel(A, exponential(mu), None)
    if model.rho > 1.0 + 1e-12:
        raise ValueError(f"GI/M/1-type process needs load <= 1, got rho={model.rho}")
    return model


def sample_gim1_type(A, mu, n, rng, event_cap=DEFAULT_EVENT_CAP, budget=100):
    """Generation-``n`` size ``f(n)`` from one infinite-buffer busy period."""
    model = _gim1_model(A, mu)
    if isinstance(rng, np.random.Generator):
        rng = streams.SimStreams.from_generator(model, rng)
    for _ in range(budget):
        f, _, _, truncated, _, _ = _simulate(-1, rng.next_interarrival, rng.next_service, event_cap, False, False)
        if not truncated:
            return f[n] if n < len(f) else 0
    raise TruncatedDrawError(f"{budget} consecutive busy periods hit the event cap {event_cap}")


def gim1_generations(A, mu, replications, seed, key=(), max_level=16, event_cap=DEFAULT_EVENT_CAP,
                     workers=None):
    """Generation sizes ``f(0..max_level)`` for many busy periods (rows)."""
    model = _gim1_model(A, mu)
    plan = SimulationPlan(model, replications, seed, event_cap, key=tuple(key), max_level=max_level)
    res = run_many(plan, workers)
    return res.crossing_counts, res.truncation_count


def sample_many(process, n, size, seed, key=(), workers=None, r=None, A=None, B=None, lam=None, mu=None):
    """Block-seeded bulk sampler used by the harness and the CLI."""
    sizes = streams.block_sizes(size)
    label = f"{process}[n={n}]"
    if process == "gim1-type":
        counts, trunc = gim1_generations(A, mu, size, seed, key, max_level=max(n, 1), workers=workers)
        return EmpiricalSample(counts[:, n], label, seed, trunc)

    def block(b):
        rng = streams.generator(seed, *key, b)
        if process == "geometric-gw":
            return sample_gw_many(r, n, sizes[b], rng)
        if process == "compound":
            return sample_compound_many(r, B, lam, n, sizes[b], rng)
        raise ValueError(f"unknown process {process!r}")

    values = np.concatenate(streams.map_blocks(block, len(sizes), workers))
    return EmpiricalSample(values, label, seed, 0)

