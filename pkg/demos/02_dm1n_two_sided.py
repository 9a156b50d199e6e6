"""
Two-sided bounds for D/M/1/n
============================

Unit interarrival times have an increasing hazard rate, and the service is
exponential. The mean loss count is then sandwiched between a geometric
Galton-Watson mean and the GI/M/1 root phi raised to the same power.
"""

import math

from busyloss import distributions as d
from busyloss.analytics import SystemModel, bounds_for, solve_phi
from busyloss.ordering import mean_ci
from busyloss.queue_sim import SimulationPlan, run_many

A = d.deterministic(1.0)
B = d.exponential(1.25)

ahat = A.lst(1.25)
print(f"A_hat(mu) = e^-1.25 = {ahat:.6f}, lower ratio {ahat / (1 - ahat):.4f}")
print(f"phi = {solve_phi(A, 1.25):.10f}")

for n in range(4):
    model = SystemModel(A, B, n)
    bs = bounds_for(model)
    res = run_many(SimulationPlan(model, 100_000, seed=3, key=("demo", n)))
    m, hw = mean_ci(res.losses, alpha=0.01)
    inside = bs.EL_lower - hw <= m <= bs.EL_upper + hw
    print(f"n={n}  {bs.EL_lower:.4f} <= {m:.4f} +/- {hw:.4f} <= {bs.EL_upper:.4f}  {'ok' if inside else 'OUTSIDE'}")

# with no waiting room the lower bound is attained: L_0 is geometric
bs = bounds_for(SystemModel(A, B, 0))
print(f"n=0 lower bound {bs.EL_lower:.5f} vs 1/(e^1.25 - 1) {1 / (math.exp(1.25) - 1):.5f}")
