"""Seed derivation and buffered random feeds.

Replications are grouped into fixed-size blocks. Each block draws from its
own generator, derived from the run seed, an optional key path (claim, n,
...) and the block index. Results therefore do not depend on how blocks are
scheduled across workers.
"""

import itertools
import os
import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

BLOCK_SIZE = 4096
THREADS_ENV = "BUSYLOSS_THREADS"


def key_int(key):
    """Map a key component (int or str) to a nonnegative integer."""
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ValueError("seed keys must be nonnegative")
        return int(key)
    return zlib.crc32(str(key).encode("utf-8"))


def seed_sequence(seed, *key):
    return np.random.SeedSequence([int(seed) & (2**64 - 1), *(key_int(k) for k in key)])


def generator(seed, *key):
    """A ``numpy.random.Generator`` for the stream named by ``(seed, *key)``."""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *key)))


def default_workers():
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {value!r}") from None
    return os.cpu_count() or 1


def feed(spec, rng, chunk=256, max_chunk=65536):
    """Endless iterator of draws from ``spec``; fetches growing chunks from ``rng``."""
    if spec.family == "deterministic":
        return itertools.repeat(float(spec.params[0]))

    def gen():
        size = chunk
        while True:
            yield from spec.sample(rng, size).tolist()
            size = min(2 * size, max_chunk)

    return gen()


class SimStreams:
    """Independent interarrival and service feeds for the queue simulator.

    Keeping the two sequences separate means systems with different buffer
    sizes but the same seed see identical arrival and service sequences.
    """

    def __init__(self, interarrival, service, rng_a, rng_s):
        self.next_interarrival = feed(interarrival, rng_a).__next__
        self.next_service = feed(service, rng_s).__next__

    @classmethod
    def from_seed(cls, model, seed, *key):
        ss = seed_sequence(seed, *key)
        child_a, child_s = ss.spawn(2)
        return cls(
            model.interarrival,
            model.service,
            np.random.Generator(np.random.PCG64(child_a)),
            np.random.Generator(np.random.PCG64(child_s)),
        )

    @classmethod
    def from_generator(cls, model, rng):
        child_a, child_s = rng.spawn(2)
        return cls(model.interarrival, model.service, child_a, child_s)


def block_sizes(total, block=BLOCK_SIZE):
    """Sizes of the consecutive blocks covering ``total`` replications."""
    full, rest = divmod(int(total), block)
    return [block] * full + ([rest] if rest else [])


def map_blocks(func, n_blocks, workers=None):
    """``[func(b) for b in range(n_blocks)]``, possibly on a thread pool."""
    workers = default_workers() if workers is None else int(workers)
    if workers <= 1 or n_blocks <= 1:
        return [func(b) for b in range(n_blocks)]
    with ThreadPoolExecutor(max_workers=min(workers, n_blocks)) as pool:
        return list(pool.map(func, range(n_blocks)))
