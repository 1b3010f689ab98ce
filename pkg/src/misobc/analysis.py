"""Closed-form DoF curves, the outer-bound region, and slope fitting."""

from dataclasses import dataclass

import numpy as np

from .errors import OutOfRange

__all__ = ["DoFEstimate", "DoFRegionPoint", "outer_bound_sum", "region_feasible",
           "baseline_dof", "fit_dof", "BASELINES"]

BASELINES = ("zf", "mat", "kobayashi", "optimal", "outer_bound")


def _check_alpha(alpha):
    if not 0.0 <= alpha <= 1.0:
        raise OutOfRange(f"alpha must lie in [0, 1], got {alpha!r}")


@dataclass(frozen=True)
class DoFEstimate:
    """Least-squares slope of sum rate against log2 P."""
    slope: float
    intercept: float
    residual_rms: float
    p_grid: tuple
    n_points: int
    secant: float


@dataclass(frozen=True)
class DoFRegionPoint:
    d1: float
    d2: float

    @property
    def total(self):
        return self.d1 + self.d2


def outer_bound_sum(alpha):
    """Sum-DoF outer bound ``2 - 2 alpha / 3`` for ``0 <= alpha <= 1``."""
    _check_alpha(alpha)
    return 2.0 - 2.0 * alpha / 3.0


def region_feasible(p, alpha, tol=0.0):
    """True iff ``2 d1 + d2 <= 3 - alpha``, ``d1 + 2 d2 <= 3 - alpha``, d >= 0."""
    _check_alpha(alpha)
    cap = 3.0 - alpha + tol
    return (p.d1 >= -tol and p.d2 >= -tol
            and 2.0 * p.d1 + p.d2 <= cap and p.d1 + 2.0 * p.d2 <= cap)


def baseline_dof(scheme, alpha):
    """Sum DoF of a scheme as a function of alpha."""
    _check_alpha(alpha)
    if scheme == "zf":
        return 2.0 - 2.0 * alpha
    if scheme == "mat":
        return 4.0 / 3.0
    if scheme == "kobayashi":
        return 2.0 * (1.0 + alpha) / (1.0 + 2.0 * alpha)
    if scheme in ("optimal", "outer_bound"):
        return outer_bound_sum(alpha)
    raise ValueError(f"unknown scheme {scheme!r}")


def fit_dof(rate_points):
    """
    Fit ``sum_rate = slope * log2(P) + intercept`` by ordinary least squares.

    Parameters
    ----------
    rate_points : sequence of (P, sum_rate)
        At least three points with strictly increasing linear-scale P.

    Returns
    -------
    DoFEstimate
        `secant` is the two-point slope through the largest two powers,
        kept as a diagnostic.
    """
    pts = [(float(p), float(r)) for p, r in rate_points]
    if len(pts) < 3:
        raise ValueError("need at least 3 points to fit a DoF slope")
    p = np.array([q[0] for q in pts])
    r = np.array([q[1] for q in pts])
    if len(np.unique(p)) != len(p):
        raise ValueError("duplicate power values")
    if np.any(np.diff(p) <= 0):
        raise ValueError("power values must be strictly increasing")
    if np.any(p <= 0) or not np.all(np.isfinite(r)):
        raise ValueError("powers must be positive and rates finite")
    x = np.log2(p)
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, r, rcond=None)
    resid = r - (slope * x + intercept)
    secant = (r[-1] - r[-2]) / (x[-1] - x[-2])
    return DoFEstimate(slope=float(slope), intercept=float(intercept),
                       residual_rms=float(np.sqrt(np.mean(resid ** 2))),
                       p_grid=tuple(p.tolist()), n_points=len(p), secant=float(secant))
