"""
Losses in an M/M/1/n busy period
================================

With Poisson arrivals and exponential service every bound collapses to the
same number, so the mean loss count per busy period is exactly rho^(n+1).
This script simulates the queue and compares.
"""

from busyloss import distributions as d
from busyloss.analytics import SystemModel, bounds_for
from busyloss.ordering import mean_ci
from busyloss.queue_sim import SimulationPlan, run_many

# arrival rate 1, service rate 2: load 1/2
A = d.exponential(1.0)
B = d.exponential(2.0)

for n in range(4):
    model = SystemModel(A, B, n)
    res = run_many(SimulationPlan(model, replications=200_000, seed=1, key=("demo", n)))
    m, hw = mean_ci(res.losses, alpha=0.01)
    bs = bounds_for(model)
    print(f"n={n}  E[L] ~ {m:.5f} +/- {hw:.5f}   bounds [{bs.EL_lower:.5f}, {bs.EL_upper:.5f}]"
          f"   rho^(n+1) = {0.5 ** (n + 1):.5f}")

# the loss count with no waiting room is geometric; check a few probabilities
res = run_many(SimulationPlan(SystemModel(A, B, 0), 200_000, seed=2))
L = res.losses.values
for k in range(4):
    print(f"P[L_0 = {k}] ~ {(L == k).mean():.4f}   exact {(1 / 3) ** k * (2 / 3):.4f}")
