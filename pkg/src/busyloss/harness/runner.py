"""Run the configured claims and assemble a report.

Every claim is evaluated per buffer size ``n``. Draws are keyed by
``(seed, claim, n, ...)`` so adding or removing a claim never changes the
numbers another claim sees.
"""

from __future__ import annotations

import datetime as _dt
import time

import numpy as np
import scipy

from .. import __version__, analytics, branching, ordering, queue_sim
from ..distributions import classify
from .report import Report

Z = 3.0
UNRELIABLE_TRUNCATION = 0.01


def _orientations(claim, model):
    """Claim directions (``">="``/``"<="`` for ``L_n`` vs the comparison) or a skip reason."""
    A, B = model.interarrival, model.service
    ca, cb = classify(A), classify(B)
    dirs = []
    if claim == "gw-lower":
        if ca.nbu and cb.nwu:
            return [">="]
        return "needs interarrival NBU and service NWU"
    if claim == "gw-upper":
        if ca.nwu and cb.nbu:
            return ["<="]
        return "needs interarrival NWU and service NBU"
    if claim == "compound":
        if not A.is_exponential:
            return "needs exponential interarrival times"
        if cb.nbu:
            dirs.append("<=")
        if cb.nwu:
            dirs.append(">=")
        return dirs
    if claim in ("gim1-upper", "two-sided", "lemma-4.1-monotonicity"):
        if not B.is_exponential:
            return "needs exponential service"
        if not (ca.ihr or ca.dhr):
            return "needs interarrival IHR or DHR"
        if claim != "lemma-4.1-monotonicity" and model.rho > 1.0 + 1e-12:
            return f"needs load <= 1, got {model.rho:.6g}"
        if ca.ihr:
            dirs.append("<=")
        if ca.dhr:
            dirs.append(">=")
        return dirs
    if claim == "mean-bounds":
        return ["bounds"]
    if claim == "wald-consistency":
        return ["wald"]
    raise ValueError(f"unknown claim {claim!r}")


_LABELS = {"geometric-gw": "X_{gen}", "compound": "sum_(i<=X_{gen}) tau_i", "gim1-type": "Y_{gen}"}


def _relabel(sample, label):
    return ordering.EmpiricalSample(sample.values, label, sample.seed, sample.truncation_count)


def _stats(sample, alpha):
    m, hw = ordering.mean_ci(sample, alpha)
    return {"mean": m, "se": ordering.standard_error(sample), "ci_halfwidth": hw, "n_obs": sample.n_obs}


def _check(name, value, se, bound, side):
    """Mean-vs-bound check at ``Z`` standard errors; ``side`` is where the bound sits."""
    if side == "lower":
        ok = value + Z * se >= bound
    else:
        ok = value - Z * se <= bound
    return {"name": name, "side": side, "estimate": value, "se": se, "bound": bound, "ok": bool(ok)}


class _Runner:
    def __init__(self, config, workers):
        self.cfg = config
        self.workers = workers
        self.truncations = 0
        self._dist_cache = {}

    def queue(self, claim, n):
        cfg = self.cfg
        plan = queue_sim.SimulationPlan(
            cfg.model.with_buffer(n), cfg.replications, cfg.seed, cfg.event_cap, key=(claim, n, "queue")
        )
        res = queue_sim.run_many(plan, self.workers)
        self.truncations += res.truncation_count
        res.losses = _relabel(res.losses, "L_n")
        return res

    def comparison(self, process, claim, n, gen, **kw):
        cfg = self.cfg
        s = branching.sample_many(process, gen, cfg.replications, cfg.seed, (claim, n, process), self.workers, **kw)
        self.truncations += s.truncation_count
        return _relabel(s, _LABELS[process].format(gen=gen))

    def distances(self, claim, n):
        if n not in self._dist_cache:
            cfg = self.cfg
            s = queue_sim.sample_level0_distances(
                cfg.model.with_buffer(n), cfg.replications, cfg.seed, (claim, n, "d1"), self.workers,
                event_cap=cfg.event_cap,
            )
            self.truncations += s.truncation_count
            self._dist_cache[n] = _relabel(s, f"d^{n}")
        return self._dist_cache[n]

    def run(self, claim, n, prev_n):
        cfg = self.cfg
        model = cfg.model.with_buffer(n)
        entry = {"claim": claim, "n": n, "status": "skip", "reason": "", "unreliable": False,
                 "bounds": {}, "means": {}, "verdicts": [], "checks": []}
        dirs = _orientations(claim, model)
        if isinstance(dirs, str):
            entry["reason"] = dirs
            return entry
        try:
            bs = analytics.bounds_for(model)
        except (ValueError, ArithmeticError) as exc:
            bs = None
            entry["bounds"] = {"error": str(exc)}
        if bs is not None:
            entry["bounds"] = bs.as_dict()
        handler = getattr(self, "_" + claim.replace("-", "_").replace(".", "_"))
        trunc, total = handler(entry, model, bs, dirs, n, prev_n)
        if entry["status"] == "skip":
            return entry
        if total and trunc / total > UNRELIABLE_TRUNCATION:
            entry["unreliable"] = True
        ok = all(v["decision"] == "consistent" for v in entry["verdicts"]) and all(c["ok"] for c in entry["checks"])
        entry["status"] = "pass" if ok else "fail"
        return entry

    # claim handlers return (truncated, attempted) counts

    def _dominance_vs(self, entry, res, other, dirs, bound_mean, side_for):
        alpha = self.cfg.alpha
        L = res.losses
        entry["means"]["L"] = _stats(L, alpha)
        entry["means"]["comparison"] = _stats(other, alpha)
        for d in dirs:
            v = ordering.check_dominance(L, other, d, alpha)
            entry["verdicts"].append(v.as_dict())
            side = side_for[d]
            entry["checks"].append(_check("E[L_n]", L.mean(), ordering.standard_error(L), bound_mean, side))

    def _gw_lower(self, entry, model, bs, dirs, n, prev_n):
        return self._gw(entry, model, dirs, n, "gw-lower")

    def _gw_upper(self, entry, model, bs, dirs, n, prev_n):
        return self._gw(entry, model, dirs, n, "gw-upper")

    def _gw(self, entry, model, dirs, n, claim):
        r = analytics.compute_r(model.interarrival, model.service)
        res = self.queue(claim, n)
        X = self.comparison("geometric-gw", claim, n, n + 1, r=r)
        entry["comparison"] = {"process": "geometric-gw", "generation": n + 1, "r": r}
        entry["status"] = "run"
        self._dominance_vs(entry, res, X, dirs, analytics.gw_mean(r, n + 1), {">=": "lower", "<=": "upper"})
        return res.truncation_count, self.cfg.replications

    def _compound(self, entry, model, bs, dirs, n, prev_n):
        lam, mu, B = model.lam, model.mu, model.service
        r = 1.0 - B.lst(lam)
        res = self.queue("compound", n)
        S = self.comparison("compound", "compound", n, n, r=r, B=B, lam=lam)
        entry["comparison"] = {"process": "compound", "generation": n, "r": r}
        entry["status"] = "run"
        bound = (lam / mu) * analytics.gw_mean(r, n)
        self._dominance_vs(entry, res, S, dirs, bound, {">=": "lower", "<=": "upper"})
        return res.truncation_count, self.cfg.replications

    def _gim1_upper(self, entry, model, bs, dirs, n, prev_n):
        A, mu = model.interarrival, model.mu
        phi = analytics.solve_phi(A, mu)
        res = self.queue("gim1-upper", n)
        Y = self.comparison("gim1-type", "gim1-upper", n, n + 1, A=A, mu=mu)
        entry["comparison"] = {"process": "gim1-type", "generation": n + 1, "phi": phi}
        entry["status"] = "run"
        self._dominance_vs(entry, res, Y, dirs, phi ** (n + 1), {"<=": "upper", ">=": "lower"})
        return res.truncation_count + Y.truncation_count, 2 * self.cfg.replications

    def _two_sided(self, entry, model, bs, dirs, n, prev_n):
        res = self.queue("two-sided", n)
        L = res.losses
        entry["status"] = "run"
        entry["means"]["L"] = _stats(L, self.cfg.alpha)
        se = ordering.standard_error(L)
        entry["checks"].append(_check("E[L_n]", L.mean(), se, bs.EL_lower, "lower"))
        entry["checks"].append(_check("E[L_n]", L.mean(), se, bs.EL_upper, "upper"))
        return res.truncation_count, self.cfg.replications

    def _lemma_4_1_monotonicity(self, entry, model, bs, dirs, n, prev_n):
        alpha = self.cfg.alpha
        claim = "lemma-4.1-monotonicity"
        d = self.distances(claim, n)
        entry["status"] = "run"
        entry["means"]["d"] = _stats(d, alpha)
        if prev_n is None:
            if n == 0:
                excess, point = ordering.check_against_cdf(d, model.interarrival.cdf, alpha)
                entry["checks"].append({"name": "d^0 ~ A (DKW band)", "excess": excess, "worst_point": point,
                                        "ok": bool(excess <= 0)})
            else:
                entry["reason"] = "baseline for the smallest configured n"
            return d.truncation_count, d.n_obs
        prev = self.distances(claim, prev_n)
        entry["comparison"] = {"process": "level-0 distance", "n": prev_n}
        entry["means"]["comparison"] = _stats(prev, alpha)
        for direction in dirs:
            entry["verdicts"].append(ordering.check_dominance(d, prev, direction, alpha).as_dict())
        return d.truncation_count, d.n_obs

    def _wald_consistency(self, entry, model, bs, dirs, n, prev_n):
        res = self.queue("wald-consistency", n)
        resid = ordering.EmpiricalSample(res.wald_residuals(), "mu*T - nu")
        st = _stats(resid, self.cfg.alpha)
        entry["status"] = "run"
        entry["means"]["wald_residual"] = st
        entry["means"]["nu"] = _stats(res.served, self.cfg.alpha)
        entry["means"]["T"] = _stats(res.duration, self.cfg.alpha)
        ok = abs(st["mean"]) <= Z * st["se"]
        entry["checks"].append({"name": "|mu E[T] - E[nu]|", "estimate": st["mean"], "se": st["se"],
                                "bound": 0.0, "ok": bool(ok)})
        return res.truncation_count, self.cfg.replications

    def _mean_bounds(self, entry, model, bs, dirs, n, prev_n):
        if bs is None or bs.empty:
            entry["reason"] = "no closed-form bound applies" if bs is None else "; ".join(bs.notes)
            return 0, 0
        res = self.queue("mean-bounds", n)
        entry["status"] = "run"
        samples = {"EL": res.losses, "Enu": res.served, "ET": res.duration}
        for key, sample in samples.items():
            entry["means"][key] = _stats(sample, self.cfg.alpha)
            se = ordering.standard_error(sample)
            for side in ("lower", "upper"):
                bound = getattr(bs, f"{key}_{side}")
                if bound is not None:
                    entry["checks"].append(_check(key, sample.mean(), se, bound, side))
        return res.truncation_count, self.cfg.replications


def run_experiment(config, workers=None, include_timing=True):
    """Evaluate every claim of ``config`` for every ``n``; deterministic given the config."""
    started = time.perf_counter()
    runner = _Runner(config, workers)
    entries = []
    for claim in config.claims:
        prev = None
        for n in config.n_values:
            entries.append(runner.run(claim, n, prev))
            prev = n
    meta = {
        "package": "busyloss",
        "version": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "seed": config.seed,
        "model": f"{config.model.interarrival}/{config.model.service}/1/n",
        "rho": config.model.rho,
        "truncations": runner.truncations,
        "config": config.as_dict(),
    }
    timing = None
    if include_timing:
        timing = {
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "runtime_s": round(time.perf_counter() - started, 3),
        }
    return Report(entries=entries, meta=meta, timing=timing)
