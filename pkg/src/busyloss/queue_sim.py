"""Busy-period simulation of single-server FIFO loss queues.

A busy period starts with an arrival to an empty system and ends at the
next departure that leaves the system empty. With ``n`` waiting places an
arrival that finds ``n + 1`` customers present is lost and changes nothing
but the counters. Every arrival that finds ``j`` customers present adds one
to the crossing count ``f(j)``, so ``f(n + 1)`` is the number of losses.

Two optional observables come from the deletion construction, computed
straight from the event sequence:

* inserted counts: for every interval opened by an arrival finding ``j``
  and closed by the departure leaving ``j``, the number of arrivals that
  found ``j + 1`` during it;
* level-0 distances: the time from each return to a single customer
  (departure leaving one, or a loss when ``n = 0``) to the next arrival.
  For a busy period with ``f(1) >= 2`` the last return is dropped; with
  ``f(1) = 1`` it is kept and may reach past the end of the busy period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import streams
from .analytics import SystemModel
from .ordering import EmpiricalSample

DEFAULT_EVENT_CAP = 10**7
DEFAULT_MAX_LEVEL = 32


class ResampleBudgetError(RuntimeError):
    pass


@dataclass
class BusyPeriodRecord:
    """Observables of one busy period.

    ``crossing_counts[j]`` is the number of arrivals finding ``j`` customers.
    For a finite buffer it has length ``n + 2``.
    """

    losses: int
    crossing_counts: list
    served: int
    duration: float
    truncated: bool = False
    inserted_counts: Optional[list] = None
    level0_distances: Optional[list] = None

    @property
    def arrivals(self):
        return sum(self.crossing_counts)


def _simulate(cap, next_a, next_s, event_cap, collect_dist, collect_kappa):
    """Core event loop; ``cap`` is the system capacity or -1 for infinite."""
    f = [1, 0] if cap < 0 else [0] * (cap + 1)
    f[0] = 1
    infinite = cap < 0
    ta = next_a()
    td = next_s()
    N = 1
    served = 0
    events = 1
    # deletion observables
    returns = [] if collect_dist else None
    open_counts = [0] if collect_kappa else None
    kappas = [] if collect_kappa else None

    if not collect_dist and not collect_kappa:
        while events < event_cap:
            events += 1
            if ta < td:
                if N == cap:
                    f[N] += 1
                else:
                    if infinite and N >= len(f):
                        f.append(0)
                    f[N] += 1
                    N += 1
                ta += next_a()
            else:
                served += 1
                N -= 1
                if N == 0:
                    return f, served, td, False, None, None
                td += next_s()
        return f, served, td, True, None, None

    while events < event_cap:
        events += 1
        if ta < td:
            if infinite and N >= len(f):
                f.append(0)
            f[N] += 1
            if collect_kappa:
                open_counts[N - 1] += 1
            if N == cap:
                if collect_dist and N == 1:
                    # with no waiting places a loss is a zero-length level-1 interval
                    t_loss = ta
                    ta += next_a()
                    returns.append(ta - t_loss)
                    continue
            else:
                N += 1
                if collect_kappa:
                    open_counts.append(0)
            ta += next_a()
        else:
            served += 1
            N -= 1
            if collect_kappa:
                kappas.append((N, open_counts.pop()))
            if N == 0:
                return f, served, td, False, returns, kappas
            if collect_dist and N == 1:
                returns.append(ta - td)
            td += next_s()
    return f, served, td, True, returns, kappas


def _distances(returns, f1):
    if not returns or f1 == 0:
        return []
    return returns if f1 == 1 else returns[:-1]


def run_busy_period(model, rng, collect_distances=False, collect_inserted_counts=False,
                    event_cap=DEFAULT_EVENT_CAP):
    """Simulate one busy period of ``model``.

    ``rng`` is a :class:`~busyloss.streams.SimStreams` or a
    ``numpy.random.Generator`` (from which fresh feeds are spawned).
    """
    if model.infinite and not model.service.is_exponential:
        raise ValueError("infinite buffer is only supported with exponential service")
    if isinstance(rng, np.random.Generator):
        rng = streams.SimStreams.from_generator(model, rng)
    cap = -1 if model.infinite else model.buffer + 1
    f, served, duration, truncated, returns, kappas = _simulate(
        cap, rng.next_interarrival, rng.next_service, event_cap, collect_distances, collect_inserted_counts
    )
    losses = 0 if model.infinite else f[cap]
    dist = None
    if collect_distances:
        dist = _distances(returns, f[1] if len(f) > 1 else 0)
    return BusyPeriodRecord(
        losses=losses,
        crossing_counts=list(f),
        served=served,
        duration=duration,
        truncated=truncated,
        inserted_counts=kappas,
        level0_distances=dist,
    )


@dataclass(frozen=True)
class SimulationPlan:
    """Independent busy-period replications of one model.

    ``key`` extends the seed path so that different experiments sharing a
    seed draw from unrelated streams. ``max_level`` bounds the crossing
    counts kept per period for an infinite buffer.
    """

    model: SystemModel
    replications: int
    seed: int = 0
    event_cap: int = DEFAULT_EVENT_CAP
    collect_distances: bool = False
    collect_inserted_counts: bool = False
    key: tuple = ()
    max_level: int = DEFAULT_MAX_LEVEL

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.event_cap < 1:
            raise ValueError("event_cap must be >= 1")


@dataclass
class SimulationResult:
    """Per-period arrays from :func:`run_many`; truncated periods are excluded."""

    plan: SimulationPlan
    losses: EmpiricalSample
    served: EmpiricalSample
    duration: EmpiricalSample
    crossing_counts: np.ndarray
    truncation_count: int
    rep_index: np.ndarray
    distances: Optional[EmpiricalSample] = None
    first_distances: Optional[EmpiricalSample] = None
    inserted_counts: Optional[np.ndarray] = None
    extra: dict = field(default_factory=dict)

    @property
    def n_ok(self):
        return self.losses.n_obs

    def generation(self, j):
        """Crossing count ``f(j)`` per period."""
        width = self.crossing_counts.shape[1]
        if j >= width:
            if self.plan.model.infinite:
                raise ValueError(f"level {j} beyond stored max_level {width - 1}")
            return np.zeros(self.n_ok, dtype=np.int64)
        return self.crossing_counts[:, j].astype(np.int64)

    def wald_residuals(self):
        """Per-period ``mu * T - nu``; has mean zero by Wald's identity."""
        mu = self.plan.model.mu
        return mu * self.duration.values - self.served.values


def _run_block(plan, b, size):
    model = plan.model
    rng = streams.SimStreams.from_seed(model, plan.seed, *plan.key, b)
    cap = -1 if model.infinite else model.buffer + 1
    width = plan.max_level + 1 if model.infinite else model.buffer + 2
    cd, ck = plan.collect_distances, plan.collect_inserted_counts
    losses = np.zeros(size, dtype=np.int64)
    served = np.zeros(size, dtype=np.int64)
    duration = np.zeros(size)
    counts = np.zeros((size, width), dtype=np.int64)
    ok = np.ones(size, dtype=bool)
    dist, first, kap = [], [], []
    na, ns = rng.next_interarrival, rng.next_service
    for i in range(size):
        f, nu, T, trunc, returns, kappas = _simulate(cap, na, ns, plan.event_cap, cd, ck)
        if trunc:
            ok[i] = False
            continue
        m = min(len(f), width)
        counts[i, :m] = f[:m]
        losses[i] = 0 if cap < 0 else f[cap]
        served[i] = nu
        duration[i] = T
        if cd:
            d = _distances(returns, f[1] if len(f) > 1 else 0)
            dist.extend(d)
            first.append(d[0] if d else math.nan)
        if ck:
            kap.extend(kappas)
    return losses[ok], served[ok], duration[ok], counts[ok], int((~ok).sum()), np.flatnonzero(ok), dist, first, kap


def run_many(plan, workers=None):
    """Run ``plan.replications`` busy periods.

    Replications are processed in blocks of :data:`streams.BLOCK_SIZE`, each
    with its own stream derived from ``(seed, *key, block)``; the output is
    identical for any worker count.
    """
    sizes = streams.block_sizes(plan.replications)
    parts = streams.map_blocks(lambda b: _run_block(plan, b, sizes[b]), len(sizes), workers)
    offsets = np.cumsum([0] + sizes[:-1])
    losses = np.concatenate([p[0] for p in parts])
    served = np.concatenate([p[1] for p in parts])
    duration = np.concatenate([p[2] for p in parts])
    counts = np.concatenate([p[3] for p in parts])
    trunc = sum(p[4] for p in parts)
    reps = np.concatenate([p[5] + off for p, off in zip(parts, offsets)])
    label = plan.model.label()
    mk = lambda v, name: EmpiricalSample(v, f"{name}[{label}]", plan.seed, trunc)  # noqa: E731
    result = SimulationResult(
        plan=plan,
        losses=mk(losses, "L"),
        served=mk(served, "nu"),
        duration=mk(duration, "T"),
        crossing_counts=counts,
        truncation_count=trunc,
        rep_index=reps,
    )
    if plan.collect_distances:
        result.distances = mk(np.array([d for p in parts for d in p[6]], dtype=float), "d_pool")
        first = np.array([d for p in parts for d in p[7]], dtype=float)
        result.first_distances = mk(first[~np.isnan(first)], "d1")
    if plan.collect_inserted_counts:
        result.inserted_counts = np.array([k for p in parts for k in p[8]], dtype=np.int64).reshape(-1, 2)
    return result


def sample_level0_distance(model, rng, budget=10**6, event_cap=DEFAULT_EVENT_CAP):
    """One level-0 distance ``d_1`` from a busy period of ``model``.

    Busy periods in which no distance is defined are resampled, up to
    ``budget`` attempts.
    """
    if not model.service.is_exponential:
        raise ValueError("level-0 distances need exponential service")
    if isinstance(rng, np.random.Generator):
        rng = streams.SimStreams.from_generator(model, rng)
    for _ in range(budget):
        rec = run_busy_period(model, rng, collect_distances=True, event_cap=event_cap)
        if not rec.truncated and rec.level0_distances:
            return rec.level0_distances[0]
    raise ResampleBudgetError(f"no level-0 distance observed in {budget} busy periods of {model.label()}")


def sample_level0_distances(model, size, seed, key=(), workers=None, budget_blocks=10_000,
                            event_cap=DEFAULT_EVENT_CAP):
    """``size`` independent draws of ``d_1``, one per busy period in which it is defined.

    Blocks of busy periods are simulated in order until enough draws are
    collected, so the result does not depend on ``workers``.
    """
    if not model.service.is_exponential:
        raise ValueError("level-0 distances need exponential service")
    workers = streams.default_workers() if workers is None else workers
    out, trunc, b = [], 0, 0
    plan = SimulationPlan(model, streams.BLOCK_SIZE, seed, event_cap, True, False, tuple(key))
    while len(out) < size:
        if b >= budget_blocks:
            raise ResampleBudgetError(f"only {len(out)} of {size} distances after {b} blocks")
        batch = list(range(b, b + max(1, workers)))
        parts = streams.map_blocks(lambda i: _run_block(plan, batch[i], streams.BLOCK_SIZE), len(batch), workers)
        for p in parts:
            if len(out) >= size:
                break
            out.extend(x for x in p[7] if not math.isnan(x))
            trunc += p[4]
        b += len(batch)
    values = np.array(out[:size])
    return EmpiricalSample(values, f"d1[{model.label()}]", seed, trunc)
