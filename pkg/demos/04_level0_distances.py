"""
Level-0 distances
=================

After each return to a single customer, how long until the next arrival?
With no waiting room this is just an interarrival time. For IHR arrivals
the distance shrinks as the buffer grows, and for DHR arrivals it grows.
"""

import numpy as np

from busyloss import distributions as d
from busyloss.analytics import SystemModel
from busyloss.ordering import check_against_cdf, check_dominance
from busyloss.queue_sim import sample_level0_distances

cases = {
    "D/M (IHR)": (d.deterministic(1.0), d.exponential(1.25), "<="),
    "H2/M (DHR)": (d.hyperexponential([0.5, 0.5], [0.5, 2.0]), d.exponential(1.5), ">="),
}

for name, (A, B, op) in cases.items():
    ds = {n: sample_level0_distances(SystemModel(A, B, n), 50_000, seed=6, key=(n,)) for n in (0, 1, 3)}
    print(name)
    for n, s in ds.items():
        q = np.quantile(s.values, [0.25, 0.5, 0.75])
        print(f"  n={n}  mean {s.mean():.4f}  quartiles {np.round(q, 4)}")
    excess, _ = check_against_cdf(ds[0], A.cdf)
    print(f"  d^0 against A: {'inside' if excess <= 0 else 'outside'} the DKW band")
    for hi, lo in ((3, 1), (1, 0)):
        v = check_dominance(ds[hi], ds[lo], op)
        print(f"  d^{hi} {op}_st d^{lo}: {v.decision}")
