"""Shared adaptive quadrature engine.

Every transform, offspring parameter and mixed-Poisson mass in the package
goes through :func:`integrate` so that they agree to the same tolerance.
"""

import warnings

import numpy as np
from scipy import integrate as _sci

DEFAULT_TOL = 1e-10
MAX_SUBDIVISIONS = 2**20


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved abs. error {achieved:.3e})")
        self.achieved = achieved


def integrate(func, a, b, tol=DEFAULT_TOL, points=None):
    """Integrate ``func`` over ``[a, b]`` (``b`` may be ``np.inf``).

    Raises :class:`QuadratureError` when the estimated absolute error
    exceeds ``tol`` or scipy reports non-convergence.
    """
    kwargs = dict(epsabs=tol, epsrel=0.0, limit=MAX_SUBDIVISIONS)
    if points is not None and np.isfinite(b):
        kwargs["points"] = points
    with warnings.catch_warnings():
        warnings.simplefilter("error", _sci.IntegrationWarning)
        try:
            value, err = _sci.quad(func, a, b, **kwargs)
        except _sci.IntegrationWarning as exc:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", _sci.IntegrationWarning)
                _, err = _sci.quad(func, a, b, **kwargs)
            raise QuadratureError(f"quadrature did not converge: {exc}", err) from exc
    if err > tol:
        raise QuadratureError("quadrature tolerance not met", err)
    return value
