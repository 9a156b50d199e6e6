"""Parametric interarrival and service-time laws.

All families live on the nonnegative half-line and have a finite positive
mean. Each :class:`DistributionSpec` knows how to sample itself, evaluate
its CDF and density, compute its Laplace-Stieltjes transform at real
arguments and integrate test functions against itself.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from ._quadrature import DEFAULT_TOL, integrate

FAMILIES = (
    "exponential",
    "deterministic",
    "erlang",
    "hyperexponential",
    "uniform",
    "gamma",
    "weibull",
)


class ReliabilityClass(str, enum.Enum):
    IHR = "IHR"
    DHR = "DHR"
    NBU = "NBU"
    NWU = "NWU"


@dataclass(frozen=True)
class ReliabilityClassSet:
    """Reliability classes a law belongs to.

    ``basis`` is ``"parametric-rule"`` when the flags were derived from the
    family and its parameters, ``"declared"`` when supplied by the caller.
    Containment (IHR implies NBU, DHR implies NWU) is enforced.
    """

    flags: frozenset
    basis: str = "parametric-rule"

    def __post_init__(self):
        flags = frozenset(ReliabilityClass(f) for f in self.flags)
        if ReliabilityClass.IHR in flags:
            flags |= {ReliabilityClass.NBU}
        if ReliabilityClass.DHR in flags:
            flags |= {ReliabilityClass.NWU}
        object.__setattr__(self, "flags", flags)
        if self.basis not in ("parametric-rule", "declared"):
            raise ValueError(f"unknown basis {self.basis!r}")

    def __contains__(self, item):
        return ReliabilityClass(item) in self.flags

    @property
    def ihr(self):
        return ReliabilityClass.IHR in self.flags

    @property
    def dhr(self):
        return ReliabilityClass.DHR in self.flags

    @property
    def nbu(self):
        return ReliabilityClass.NBU in self.flags

    @property
    def nwu(self):
        return ReliabilityClass.NWU in self.flags

    def names(self):
        return sorted(f.value for f in self.flags)


ALL_CLASSES = frozenset(ReliabilityClass)
_BETTER = frozenset({ReliabilityClass.IHR, ReliabilityClass.NBU})
_WORSE = frozenset({ReliabilityClass.DHR, ReliabilityClass.NWU})


def _positive(name, value):
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return value


@dataclass(frozen=True)
class DistributionSpec:
    """Immutable description of a nonnegative law.

    Use the family constructors (:func:`exponential`, :func:`erlang`, ...)
    or :meth:`from_dict` rather than building instances directly.
    """

    family: str
    params: tuple = field(default=())

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "params", tuple(self._validate()))

    def _validate(self):
        fam, p = self.family, self.params
        if fam in ("exponential", "deterministic"):
            (x,) = p
            return (_positive("rate" if fam == "exponential" else "value", x),)
        if fam == "erlang":
            k, rate = p
            if int(k) != k or k < 1:
                raise ValueError(f"erlang shape must be a positive integer, got {k!r}")
            return (int(k), _positive("rate", rate))
        if fam in ("gamma", "weibull"):
            shape, scale_or_rate = p
            return (_positive("shape", shape), _positive("scale" if fam == "weibull" else "rate", scale_or_rate))
        if fam == "uniform":
            lo, hi = (float(v) for v in p)
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo < 0 or not lo < hi:
                raise ValueError(f"uniform requires 0 <= lo < hi, got ({lo}, {hi})")
            return (lo, hi)
        # hyperexponential
        weights, rates = p
        weights = tuple(float(w) for w in weights)
        rates = tuple(_positive("rate", r) for r in rates)
        if len(weights) != len(rates) or not weights:
            raise ValueError("hyperexponential needs equally many weights and rates")
        if any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-12:
            raise ValueError(f"hyperexponential weights must be nonnegative and sum to 1, got {weights}")
        return (weights, rates)

    # construction helpers

    @classmethod
    def from_dict(cls, d):
        """Build from a tagged record such as ``{"family": "erlang", "shape": 3, "rate": 3.0}``."""
        d = dict(d)
        fam = str(d.pop("family", "")).lower().replace("-", "").replace("_", "")
        try:
            if fam == "exponential":
                spec = exponential(d.pop("rate"))
            elif fam == "deterministic":
                spec = deterministic(d.pop("value"))
            elif fam == "erlang":
                spec = erlang(d.pop("shape"), d.pop("rate"))
            elif fam == "hyperexponential":
                spec = hyperexponential(d.pop("weights"), d.pop("rates"))
            elif fam == "uniform":
                spec = uniform(d.pop("lo"), d.pop("hi"))
            elif fam == "gamma":
                spec = gamma(d.pop("shape"), d.pop("rate"))
            elif fam == "weibull":
                spec = weibull(d.pop("shape"), d.pop("scale"))
            else:
                raise ValueError(f"unknown distribution family {fam!r}")
        except KeyError as exc:
            raise ValueError(f"{fam} distribution is missing parameter {exc.args[0]!r}") from None
        if d:
            raise ValueError(f"unexpected parameters for {fam}: {sorted(d)}")
        return spec

    def to_dict(self):
        fam, p = self.family, self.params
        names = {
            "exponential": ("rate",),
            "deterministic": ("value",),
            "erlang": ("shape", "rate"),
            "hyperexponential": ("weights", "rates"),
            "uniform": ("lo", "hi"),
            "gamma": ("shape", "rate"),
            "weibull": ("shape", "scale"),
        }[fam]
        out = {"family": fam}
        for k, v in zip(names, p):
            out[k] = list(v) if isinstance(v, tuple) else v
        return out

    def __str__(self):
        args = ", ".join(f"{k}={v}" for k, v in self.to_dict().items() if k != "family")
        return f"{self.family}({args})"

    # moments and probabilities

    @property
    def is_exponential(self):
        if self.family == "exponential":
            return True
        if self.family == "erlang":
            return self.params[0] == 1
        if self.family == "gamma" or self.family == "weibull":
            return self.params[0] == 1.0
        if self.family == "hyperexponential":
            return len(self._active_rates()) == 1
        return False

    def _active_rates(self):
        weights, rates = self.params
        return sorted({r for w, r in zip(weights, rates) if w > 0})

    def mean(self):
        fam, p = self.family, self.params
        if fam == "exponential":
            return 1.0 / p[0]
        if fam == "deterministic":
            return p[0]
        if fam in ("erlang", "gamma"):
            return p[0] / p[1]
        if fam == "hyperexponential":
            return sum(w / r for w, r in zip(*p))
        if fam == "uniform":
            return 0.5 * (p[0] + p[1])
        shape, scale = p
        return scale * math.gamma(1.0 + 1.0 / shape)

    def rate(self):
        """Reciprocal of the mean."""
        return 1.0 / self.mean()

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        fam, p = self.family, self.params
        xp = np.maximum(x, 0.0)
        if fam == "exponential":
            out = -np.expm1(-p[0] * xp)
        elif fam == "deterministic":
            out = (x >= p[0]).astype(float)
        elif fam in ("erlang", "gamma"):
            out = special.gammainc(p[0], p[1] * xp)
        elif fam == "hyperexponential":
            out = sum(w * -np.expm1(-r * xp) for w, r in zip(*p))
        elif fam == "uniform":
            lo, hi = p
            out = np.clip((x - lo) / (hi - lo), 0.0, 1.0)
        else:
            shape, scale = p
            out = -np.expm1(-((xp / scale) ** shape))
        out = np.where(x < 0, 0.0, out)
        return out[()] if out.ndim == 0 else out

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def pdf(self, x):
        """Density; undefined (raises) for the deterministic law."""
        fam, p = self.family, self.params
        x = np.asarray(x, dtype=float)
        if fam == "deterministic":
            raise ValueError("deterministic law has no density")
        if fam == "exponential":
            out = stats.expon.pdf(x, scale=1.0 / p[0])
        elif fam in ("erlang", "gamma"):
            out = stats.gamma.pdf(x, p[0], scale=1.0 / p[1])
        elif fam == "hyperexponential":
            out = sum(w * stats.expon.pdf(x, scale=1.0 / r) for w, r in zip(*p))
        elif fam == "uniform":
            out = stats.uniform.pdf(x, loc=p[0], scale=p[1] - p[0])
        else:
            out = stats.weibull_min.pdf(x, p[0], scale=p[1])
        out = np.asarray(out)
        return out[()] if out.ndim == 0 else out

    # expectations

    def expect(self, g, tol=DEFAULT_TOL):
        """Return ``E[g(X)]`` for a scalar function ``g``, by quadrature where needed."""
        fam, p = self.family, self.params
        if fam == "deterministic":
            return float(g(p[0]))
        if fam == "exponential":
            rate = p[0]
            return integrate(lambda x: g(x) * rate * math.exp(-rate * x), 0.0, np.inf, tol)
        if fam == "hyperexponential":
            return sum(
                w * integrate(lambda x, r=r: g(x) * r * math.exp(-r * x), 0.0, np.inf, tol / len(p[0]))
                for w, r in zip(*p)
                if w > 0
            )
        if fam == "uniform":
            lo, hi = p
            return integrate(lambda x: g(x), lo, hi, tol * (hi - lo)) / (hi - lo)
        if fam == "weibull":
            # x = scale * u**(1/shape) maps dF to e^{-u} du with a bounded integrand
            shape, scale = p
            return integrate(lambda u: g(scale * u ** (1.0 / shape)) * math.exp(-u), 0.0, np.inf, tol)
        shape, rate = p
        log_norm = special.gammaln(shape)

        def integrand(x):
            if x <= 0.0:
                return 0.0
            return g(x) * math.exp(shape * math.log(rate) + (shape - 1) * math.log(x) - rate * x - log_norm)

        if shape < 1:
            # integrable singularity at 0: substitute x = v**(1/shape)
            def sub(v):
                if v <= 0.0:
                    return g(0.0) * rate**shape / math.gamma(shape + 1)
                x = v ** (1.0 / shape)
                return g(x) * math.exp(shape * math.log(rate) - rate * x - log_norm) / shape

            return integrate(sub, 0.0, np.inf, tol)
        return integrate(integrand, 0.0, np.inf, tol)

    def lst(self, s, tol=DEFAULT_TOL):
        """Laplace-Stieltjes transform ``E[exp(-s X)]`` at a real ``s >= 0``."""
        s = float(s)
        if s < 0:
            raise ValueError(f"lst argument must be nonnegative, got {s}")
        fam, p = self.family, self.params
        if fam == "exponential":
            return p[0] / (p[0] + s)
        if fam == "deterministic":
            return math.exp(-s * p[0])
        if fam in ("erlang", "gamma"):
            return (p[1] / (p[1] + s)) ** p[0]
        if fam == "hyperexponential":
            return sum(w * r / (r + s) for w, r in zip(*p))
        if fam == "uniform":
            lo, hi = p
            if s == 0.0:
                return 1.0
            # (e^{-s lo} - e^{-s hi}) / (s (hi - lo)) without cancellation
            return math.exp(-s * lo) * -math.expm1(-s * (hi - lo)) / (s * (hi - lo))
        if s == 0.0:
            return 1.0
        if self.is_exponential:
            rate = self.rate()
            return rate / (rate + s)
        # quadrature noise must not push the transform above 1
        return min(1.0, self.expect(lambda x: math.exp(-s * x), tol))

    # sampling

    def sample(self, rng, size=None):
        """Draw from the law using a ``numpy.random.Generator``."""
        fam, p = self.family, self.params
        if fam == "exponential":
            return rng.exponential(1.0 / p[0], size)
        if fam == "deterministic":
            return p[0] if size is None else np.full(size, p[0])
        if fam in ("erlang", "gamma"):
            return rng.gamma(p[0], 1.0 / p[1], size)
        if fam == "uniform":
            return rng.uniform(p[0], p[1], size)
        if fam == "weibull":
            return p[1] * rng.weibull(p[0], size)
        weights, rates = p
        scales = 1.0 / np.asarray(rates)
        idx = rng.choice(len(weights), size=size, p=weights)
        out = rng.exponential(1.0, size) * scales[idx]
        return float(out) if size is None else out


def exponential(rate):
    return DistributionSpec("exponential", (rate,))


def deterministic(value):
    return DistributionSpec("deterministic", (value,))


def erlang(shape, rate):
    return DistributionSpec("erlang", (shape, rate))


def hyperexponential(weights, rates):
    return DistributionSpec("hyperexponential", (tuple(weights), tuple(rates)))


def uniform(lo, hi):
    return DistributionSpec("uniform", (lo, hi))


def gamma(shape, rate):
    return DistributionSpec("gamma", (shape, rate))


def weibull(shape, scale):
    return DistributionSpec("weibull", (shape, scale))


def sample(spec, rng):
    """One exact draw from ``spec``."""
    return float(spec.sample(rng))


def lst(spec, s, tol=DEFAULT_TOL):
    return spec.lst(s, tol)


def cdf(spec, x):
    return spec.cdf(x)


def mean(spec):
    return spec.mean()


def classify(spec):
    """Reliability classes implied by the family and its parameters."""
    if spec.is_exponential:
        return ReliabilityClassSet(ALL_CLASSES)
    fam = spec.family
    if fam in ("deterministic", "erlang", "uniform"):
        return ReliabilityClassSet(_BETTER)
    if fam in ("gamma", "weibull"):
        return ReliabilityClassSet(_BETTER if spec.params[0] > 1 else _WORSE)
    return ReliabilityClassSet(_WORSE)
