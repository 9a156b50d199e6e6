"""Closed-form quantities and busy-period bounds for ``A/B/1/n`` loss queues.

Notation used throughout:

* ``r``: geometric offspring parameter ``1 - int [1 - A(x)] dB(x)``,
  equivalently ``P[interarrival <= service]``.
* ``phi``: least root in ``[0, 1]`` of ``z = A_hat(mu - mu z)``.
* ``L_n``, ``nu_n``, ``T_n``: losses, customers served and duration of a
  busy period with ``n`` waiting places.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from scipy import optimize, stats

from . import distributions as dist
from ._quadrature import DEFAULT_TOL

INFINITE = None


@dataclass(frozen=True)
class SystemModel:
    """Single-server loss queue ``A/B/1/n``.

    ``buffer`` is the number of waiting places, excluding the server, or
    ``None`` for the infinite-buffer ``A/M/1`` system.
    """

    interarrival: dist.DistributionSpec
    service: dist.DistributionSpec
    buffer: Optional[int] = 0

    def __post_init__(self):
        if self.buffer is not None:
            if int(self.buffer) != self.buffer or self.buffer < 0:
                raise ValueError(f"buffer must be a nonnegative integer or None, got {self.buffer!r}")
            object.__setattr__(self, "buffer", int(self.buffer))

    @property
    def lam(self):
        return self.interarrival.rate()

    @property
    def mu(self):
        return self.service.rate()

    @property
    def rho(self):
        return self.lam / self.mu

    @property
    def infinite(self):
        return self.buffer is None

    def with_buffer(self, n):
        return SystemModel(self.interarrival, self.service, n)

    def label(self):
        cap = "inf" if self.buffer is None else str(self.buffer)
        return f"{self.interarrival}/{self.service}/1/{cap}"


class DegenerateModelError(ValueError):
    """The model has no nondegenerate offspring parameter."""


class ConvergenceError(RuntimeError):
    def __init__(self, message, last):
        super().__init__(f"{message}; last iterate {last!r}")
        self.last = last


def compute_r(A, B, tol=DEFAULT_TOL):
    """Offspring parameter ``r = int A(x) dB(x)``.

    Closed forms are used when either law is exponential; otherwise the
    integral is evaluated against ``B``.
    """
    if A.is_exponential:
        r = 1.0 - B.lst(A.rate(), tol)
    elif B.is_exponential:
        r = A.lst(B.rate(), tol)
    elif A.family == "deterministic" and B.family != "deterministic":
        r = float(B.sf(A.params[0]))
    else:
        r = B.expect(lambda x: float(A.cdf(x)), tol)
    if not 0.0 < r < 1.0:
        raise DegenerateModelError(f"offspring parameter r={r!r} outside (0, 1) for A={A}, B={B}")
    return r


def offspring_pgf(r, z):
    """Generating function ``(1 - r) / (1 - z r)`` of the Geometric(r) offspring law."""
    _check_r(r)
    return (1.0 - r) / (1.0 - z * r)


def offspring_pmf(r, m):
    """``P[kappa = m] = r**m (1 - r)``."""
    _check_r(r)
    return r**m * (1.0 - r)


def offspring_mean(r):
    _check_r(r)
    return r / (1.0 - r)


def gw_mean(r, n):
    """Mean size ``(r / (1 - r))**n`` of generation ``n`` (one ancestor)."""
    return offspring_mean(r) ** n


def _check_r(r):
    if not 0.0 < r < 1.0:
        raise ValueError(f"r must lie in (0, 1), got {r!r}")


def solve_phi(A, mu, tol=1e-12, max_iter=100_000, rho_tol=1e-12):
    """Least root of ``z = A_hat(mu - mu z)`` on ``[0, 1]``.

    Fixed-point iteration from zero; the iterates increase monotonically to
    the least root, so the trivial root ``z = 1`` is never captured when the
    load is below one. Falls back to bracketing if the iteration stalls.
    """
    mu = float(mu)
    rho = A.rate() / mu
    if rho > 1.0 + rho_tol:
        raise ValueError(f"solve_phi requires load <= 1, got rho={rho}")
    if abs(rho - 1.0) <= rho_tol:
        return 1.0

    def h(z):
        return A.lst(mu - mu * z)

    z = 0.0
    for _ in range(max_iter):
        z_next = h(z)
        if abs(z_next - z) < tol:
            z = z_next
            break
        z = z_next
    else:
        z = _bracket_phi(h, z)
    # extra steps drive the residual far below the stopping tolerance
    for _ in range(50):
        z_next = h(z)
        if abs(z_next - z) < 1e-15:
            break
        z = z_next
    return z


def _bracket_phi(h, lo):
    # g(lo) > 0 below the root, g < 0 just below 1 when rho < 1
    g = lambda z: h(z) - z  # noqa: E731
    gap = 1.0 - lo
    hi = None
    for k in range(1, 200):
        cand = 1.0 - gap / 2**k
        if g(cand) < 0:
            hi = cand
            break
    if hi is None:
        raise ConvergenceError("could not bracket the least root", lo)
    return optimize.brentq(g, lo, hi, xtol=1e-15, maxiter=1000)


def tau_pmf(B, lam, k, tol=DEFAULT_TOL):
    """``P[tau = k] = int e^{-lam x} (lam x)^k / k! dB(x)``.

    Number of Poisson(``lam``) arrivals during one service time.
    """
    k = int(k)
    if k < 0:
        raise ValueError("k must be nonnegative")
    lam = float(lam)
    if B.family == "deterministic":
        return float(stats.poisson.pmf(k, lam * B.params[0]))
    if B.family == "exponential":
        mu = B.params[0]
        p = mu / (mu + lam)
        return p * (1.0 - p) ** k
    return B.expect(lambda x: float(stats.poisson.pmf(k, lam * x)), tol)


def tau_mean(B, lam):
    return lam * B.mean()


@dataclass
class BoundSet:
    """Closed-form bounds on busy-period functionals for one buffer size.

    ``EL_weak`` holds the weaker generation-``n+1`` bound that the compound
    representation improves on (M/B systems only). ``notes`` records which
    class assumptions justified each populated entry.
    """

    n: int
    r: Optional[float] = None
    phi: Optional[float] = None
    EL_lower: Optional[float] = None
    EL_upper: Optional[float] = None
    Enu_lower: Optional[float] = None
    Enu_upper: Optional[float] = None
    ET_lower: Optional[float] = None
    ET_upper: Optional[float] = None
    EL_weak: Optional[float] = None
    applicability: Optional[str] = None
    degenerate: bool = False
    notes: list = field(default_factory=list)

    def __post_init__(self):
        self._check()

    def _check(self):
        for name in ("EL_lower", "EL_upper", "Enu_lower", "Enu_upper", "ET_lower", "ET_upper"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} is negative: {v}")
        for lo, hi in (("EL_lower", "EL_upper"), ("Enu_lower", "Enu_upper"), ("ET_lower", "ET_upper")):
            a, b = getattr(self, lo), getattr(self, hi)
            if a is not None and b is not None and a > b + 1e-12 * max(1.0, abs(b)):
                raise ValueError(f"{lo}={a} exceeds {hi}={b}")

    @property
    def empty(self):
        return all(
            getattr(self, k) is None
            for k in ("EL_lower", "EL_upper", "Enu_lower", "Enu_upper", "ET_lower", "ET_upper")
        )

    def as_dict(self):
        return {
            "n": self.n,
            "r": self.r,
            "phi": self.phi,
            "EL_lower": self.EL_lower,
            "EL_upper": self.EL_upper,
            "EL_weak": self.EL_weak,
            "Enu_lower": self.Enu_lower,
            "Enu_upper": self.Enu_upper,
            "ET_lower": self.ET_lower,
            "ET_upper": self.ET_upper,
            "applicability": self.applicability,
            "degenerate": self.degenerate,
            "notes": list(self.notes),
        }


def _partial_geometric(c, n):
    return sum(c**i for i in range(n + 1))


def _merge(bs, side, key, value, note):
    """Set ``key`` on ``side`` (``"lower"``/``"upper"``), keeping the tighter value."""
    name = f"{key}_{side}"
    cur = getattr(bs, name)
    if cur is None:
        setattr(bs, name, value)
    elif side == "lower":
        setattr(bs, name, max(cur, value))
    else:
        setattr(bs, name, min(cur, value))
    bs.notes.append(note)


def bounds_for(model, n=None):
    """All applicable closed-form bounds for ``model`` at buffer size ``n``.

    Directions follow the reliability classes of the laws. For an
    exponential law, which belongs to every class, both directions are
    emitted and coincide.
    """
    n = model.buffer if n is None else n
    if n is None:
        raise ValueError("bounds need a finite buffer size")
    A, B = model.interarrival, model.service
    cls_a, cls_b = dist.classify(A), dist.classify(B)
    lam, mu = model.lam, model.mu
    bs = BoundSet(n=n)

    if B.is_exponential:
        r = A.lst(mu)
        c = r / (1.0 - r)
        bs.r = r
        bs.applicability = "gw-only"
        for side, ok, tag in (("lower", cls_a.nbu, "NBU"), ("upper", cls_a.nwu, "NWU")):
            if not ok:
                continue
            _merge(bs, side, "EL", c ** (n + 1), f"EL_{side}: interarrival {tag}, exponential service")
            _merge(bs, side, "Enu", _partial_geometric(c, n), f"Enu_{side}: interarrival {tag}")
            _merge(bs, side, "ET", _partial_geometric(c, n) / mu, f"ET_{side}: Wald, interarrival {tag}")
        if (cls_a.ihr or cls_a.dhr) and model.rho <= 1.0 + 1e-12:
            phi = solve_phi(A, mu)
            bs.phi = phi
            bs.degenerate = phi == 1.0
            bs.applicability = "two-sided-gim1"
            for side, ok, tag in (("upper", cls_a.ihr, "IHR"), ("lower", cls_a.dhr, "DHR")):
                if not ok:
                    continue
                _merge(bs, side, "EL", phi ** (n + 1), f"EL_{side}: interarrival {tag}, load <= 1")
                _merge(bs, side, "Enu", _partial_geometric(phi, n), f"Enu_{side}: interarrival {tag}")
                _merge(bs, side, "ET", _partial_geometric(phi, n) / mu, f"ET_{side}: Wald, interarrival {tag}")
    elif A.is_exponential:
        r = 1.0 - B.lst(lam)
        c = r / (1.0 - r)
        bs.r = r
        bs.applicability = "compound"
        bs.EL_weak = c ** (n + 1)
        compound = (lam / mu) * c**n
        # NBU service bounds losses from above, NWU from below
        for side, ok, tag in (("upper", cls_b.nbu, "NBU"), ("lower", cls_b.nwu, "NWU")):
            if not ok:
                continue
            _merge(bs, side, "EL", compound, f"EL_{side}: compound sum, service {tag}")
            _merge(bs, side, "Enu", _partial_geometric(c, n), f"Enu_{side}: service {tag}")
            _merge(bs, side, "ET", _partial_geometric(c, n) / mu, f"ET_{side}: Wald, service {tag}")
    else:
        lower = cls_a.nbu and cls_b.nwu
        upper = cls_a.nwu and cls_b.nbu
        if lower or upper:
            r = compute_r(A, B)
            c = r / (1.0 - r)
            bs.r = r
            bs.applicability = "gw-only"
            side = "lower" if lower else "upper"
            _merge(bs, side, "EL", c ** (n + 1), f"EL_{side}: opposite NBU/NWU classes")
            _merge(bs, side, "Enu", _partial_geometric(c, n), f"Enu_{side}: opposite NBU/NWU classes")
            _merge(bs, side, "ET", _partial_geometric(c, n) / mu, f"ET_{side}: Wald")
        else:
            bs.notes.append(
                "no inequality applies: interarrival and service laws are not in opposite NBU/NWU classes "
                "and neither is exponential"
            )
    bs._check()
    return bs


def phi_residual(A, mu, phi):
    return abs(phi - A.lst(mu - mu * phi))


def expected_tau_sum(r, B, lam, n):
    """Mean of the compound sum of ``X_n`` independent mixed-Poisson counts."""
    return gw_mean(r, n) * tau_mean(B, lam)

