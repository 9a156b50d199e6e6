"""Empirical CDFs and stochastic-order checks with DKW confidence bands.

A dominance check can only refute an ordering or remain consistent with
it. ``X >=_st Y`` is refuted when the empirical CDF of ``X`` exceeds that
of ``Y`` by more than the sum of the two DKW half-widths somewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

DEFAULT_ALPHA = 1e-3


@dataclass(frozen=True)
class EmpiricalSample:
    """I.i.d. scalar observations plus where they came from."""

    values: np.ndarray
    label: str = ""
    seed: int = 0
    truncation_count: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 1:
            raise ValueError("sample values must be one-dimensional")
        if values.dtype.kind not in "iuf":
            values = values.astype(float)
        if values.size and not np.all(np.isfinite(values)):
            raise ValueError(f"sample {self.label!r} contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_obs(self):
        return int(self.values.size)

    def mean(self):
        return float(self.values.mean())

    def map(self, func, label=None):
        return EmpiricalSample(func(self.values), label or self.label, self.seed, self.truncation_count)


def as_sample(x, label=""):
    return x if isinstance(x, EmpiricalSample) else EmpiricalSample(np.asarray(x), label)


class ECDF:
    """Right-continuous empirical CDF; evaluation is a binary search."""

    def __init__(self, sample):
        sample = as_sample(sample)
        if sample.n_obs < 1:
            raise ValueError("ECDF needs at least one observation")
        self.sorted = np.sort(sample.values)
        self.n = sample.n_obs

    def __call__(self, x):
        out = np.searchsorted(self.sorted, x, side="right") / self.n
        return out[()] if np.ndim(out) == 0 else out

    @property
    def jumps(self):
        return np.unique(self.sorted)


def ecdf(sample):
    return ECDF(sample)


def dkw_epsilon(n_obs, alpha=DEFAULT_ALPHA):
    """Half-width ``sqrt(ln(2/alpha) / (2 N))`` of the DKW band."""
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n_obs))


@dataclass(frozen=True)
class DominanceVerdict:
    """Outcome of checking ``left >=_st right`` (``left-dominates``) or the reverse.

    ``max_violation`` is the largest amount by which the CDF gap pointing
    the wrong way exceeds the combined band; it is negative when the claim
    is consistent.
    """

    direction: str
    alpha: float
    band_width: float
    eps_left: float
    eps_right: float
    max_violation: float
    worst_point: float
    decision: str
    left_label: str = ""
    right_label: str = ""

    @property
    def consistent(self):
        return self.decision == "consistent"

    def as_dict(self):
        return {
            "direction": self.direction,
            "claim": self.claim_text(),
            "alpha": self.alpha,
            "band_width": self.band_width,
            "eps_left": self.eps_left,
            "eps_right": self.eps_right,
            "max_violation": self.max_violation,
            "worst_point": self.worst_point,
            "decision": self.decision,
        }

    def claim_text(self):
        op = ">=_st" if self.direction == "left-dominates" else "<=_st"
        return f"{self.left_label or 'X'} {op} {self.right_label or 'Y'}"


_CLAIMS = {
    ">=": "left-dominates",
    "ge": "left-dominates",
    "left-dominates": "left-dominates",
    "<=": "right-dominates",
    "le": "right-dominates",
    "right-dominates": "right-dominates",
}


def check_dominance(X, Y, claim=">=", alpha=DEFAULT_ALPHA):
    """Check ``X >=_st Y`` (``claim=">="``) or ``X <=_st Y`` (``claim="<="``).

    The larger variable must have the smaller CDF. The claim is consistent
    when, at every jump point of either ECDF, the CDF of the larger sample
    exceeds that of the smaller by no more than ``eps_X + eps_Y``.
    """
    try:
        direction = _CLAIMS[claim]
    except KeyError:
        raise ValueError(f"unknown claim {claim!r}; use '>=' or '<='") from None
    X, Y = as_sample(X, "X"), as_sample(Y, "Y")
    if X.n_obs < 1 or Y.n_obs < 1:
        raise ValueError("both samples must be nonempty")
    fx, fy = ECDF(X), ECDF(Y)
    points = np.union1d(fx.jumps, fy.jumps)
    eps_x, eps_y = dkw_epsilon(X.n_obs, alpha), dkw_epsilon(Y.n_obs, alpha)
    band = eps_x + eps_y
    if direction == "left-dominates":
        gap = fx(points) - fy(points)
    else:
        gap = fy(points) - fx(points)
    excess = gap - band
    i = int(np.argmax(excess))
    worst = float(excess[i])
    return DominanceVerdict(
        direction=direction,
        alpha=alpha,
        band_width=band,
        eps_left=eps_x,
        eps_right=eps_y,
        max_violation=worst,
        worst_point=float(points[i]),
        decision="violated" if worst > 0 else "consistent",
        left_label=X.label,
        right_label=Y.label,
    )


def check_against_cdf(sample, cdf, alpha=DEFAULT_ALPHA):
    """Largest excursion of ``|ECDF - cdf|`` beyond the one-sample DKW band.

    Returns ``(excess, point)``; ``excess <= 0`` means the analytic law lies
    inside the band. Both one-sided limits at each jump are inspected, so
    laws with atoms are handled.
    """
    sample = as_sample(sample)
    f = ECDF(sample)
    x = f.jumps
    right = f(x)
    left = np.concatenate(([0.0], right[:-1]))
    theo = np.asarray(cdf(x), dtype=float)
    theo_left = np.asarray(cdf(np.nextafter(x, -np.inf)), dtype=float)
    dev = np.maximum(np.abs(right - theo), np.abs(left - theo_left))
    i = int(np.argmax(dev))
    return float(dev[i] - dkw_epsilon(sample.n_obs, alpha)), float(x[i])


def mean_ci(sample, alpha=0.05):
    """Sample mean and normal-approximation half-width ``z_{1-alpha/2} s / sqrt(n)``."""
    sample = as_sample(sample)
    if sample.n_obs < 2:
        raise ValueError("mean_ci needs at least two observations")
    v = sample.values.astype(float)
    m = float(v.mean())
    s = float(v.std(ddof=1))
    z = float(stats.norm.ppf(1.0 - alpha / 2.0))
    return m, z * s / math.sqrt(sample.n_obs)


def standard_error(sample):
    sample = as_sample(sample)
    v = sample.values.astype(float)
    return float(v.std(ddof=1) / math.sqrt(v.size))
