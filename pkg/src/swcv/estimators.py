"""Sliced-Wasserstein estimators: plain Monte Carlo, regression-adjusted
control-variate methods, nearest-neighbor control functionals and
(randomized) quasi-Monte Carlo averaging.

All estimators accept a prebuilt :class:`~swcv.sphere.DirectionSet` (except
the QMC pair, which owns its direction construction), so paired comparisons
across methods can reuse identical directions.  Final reductions over the
direction axis use exact compensated summation.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from math import ceil, fsum

import numpy as np

from .harmonics import HarmonicBasis, evaluate_basis
from .measures import GaussianMeasure
from .sphere import DirectionSet, qmc_directions, rqmc_directions, sample_uniform
from .wasserstein1d import IntegrandHandle

__all__ = [
    "EstimatorReport",
    "LinearRuleWeights",
    "mc_estimate",
    "olsmc",
    "shcv",
    "cv_lower",
    "cv_upper",
    "cvnn",
    "qmc_estimate",
    "rqmc_estimate",
    "shcv_weights",
]

_RANK_TOL = 1e-10
_WEIGHT_DENOM_TOL = 1e-12


@dataclass
class EstimatorReport:
    """Estimate value plus diagnostics.

    ``coefficients`` holds the fitted control-variate coefficients when the
    method computes any; ``residual_variance`` is the mean squared residual
    of the associated least-squares fit.  ``degenerate_control`` flags a
    fallback to plain Monte Carlo caused by a zero-variance control.
    """

    estimate: float
    method: str
    n: int
    coefficients: np.ndarray | None = None
    residual_variance: float | None = None
    wall_time: float = 0.0
    degenerate_control: bool = False

    def __post_init__(self):
        if self.residual_variance is not None and self.residual_variance < 0:
            raise ValueError("residual variance cannot be negative")


@dataclass(frozen=True)
class LinearRuleWeights:
    """Integration-rule weights w with w^T 1 = 1, reusable across integrands."""

    weights: np.ndarray
    source: str

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        total = fsum(w)
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"weights must sum to 1, got {total!r}")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]


def _as_fvals(fvals) -> np.ndarray:
    arr = np.asarray(fvals, dtype=float).ravel()
    if arr.shape[0] < 1:
        raise ValueError("need at least one integrand value")
    return arr


def mc_estimate(fvals) -> EstimatorReport:
    """Arithmetic mean of the integrand values (compensated summation)."""
    t0 = time.perf_counter()
    arr = _as_fvals(fvals)
    est = fsum(arr) / arr.shape[0]
    return EstimatorReport(est, "mc", arr.shape[0], wall_time=time.perf_counter() - t0)


def _usable_columns(phi: np.ndarray, n: int) -> int:
    """Length of the largest leading column block keeping [1 | phi] well posed.

    Columns are examined after centering (so collinearity with the intercept
    is caught) through a QR factorization; the first diagonal entry below
    1e-10 of the largest centered column norm marks the cut.  Trailing
    columns beyond n - 2 are always dropped.
    """
    s = min(phi.shape[1], max(n - 2, 0))
    if s == 0:
        return 0
    centered = phi[:, :s] - phi[:, :s].mean(axis=0)
    ref = float(np.linalg.norm(centered, axis=0).max())
    if ref == 0.0:
        return 0
    diag = np.abs(np.diag(np.linalg.qr(centered, mode="r")))
    bad = np.nonzero(diag < _RANK_TOL * ref)[0]
    return s if bad.size == 0 else int(bad[0])


def olsmc(fvals, phi) -> EstimatorReport:
    """Least-squares Monte Carlo: intercept of the regression of f on [1, phi].

    Solved through an orthogonal factorization of the centered regressor
    matrix.  If [1 | phi] is rank deficient beyond tolerance, trailing
    columns are dropped until the problem is well posed; the returned
    coefficient vector keeps the original length with zeros in the dropped
    positions.
    """
    t0 = time.perf_counter()
    arr = _as_fvals(fvals)
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    if phi.shape[0] != arr.shape[0]:
        raise ValueError(f"phi has {phi.shape[0]} rows for {arr.shape[0]} values")
    n, s = phi.shape
    kept = _usable_columns(phi, n)
    if n <= kept + 1:
        raise ValueError(f"need n > s + 1 (n = {n}, s = {kept} after reduction)")

    f_mean = fsum(arr) / n
    f_centered = arr - f_mean
    if kept == 0:
        beta = np.zeros(0)
        residuals = f_centered
    else:
        block = phi[:, :kept]
        col_means = block.mean(axis=0)
        centered = block - col_means
        beta = np.linalg.lstsq(centered, f_centered, rcond=None)[0]
        residuals = f_centered - centered @ beta
    estimate = f_mean - (fsum(phi[:, :kept].mean(axis=0) * beta) if kept else 0.0)
    coefficients = np.zeros(s)
    coefficients[:kept] = beta
    resvar = fsum(residuals * residuals) / n
    return EstimatorReport(
        estimate,
        "olsmc",
        n,
        coefficients=coefficients,
        residual_variance=resvar,
        wall_time=time.perf_counter() - t0,
    )


def shcv(mu, nu, p: float, dirs: DirectionSet, basis: HarmonicBasis) -> EstimatorReport:
    """Spherical-harmonics control-variate estimate of SW_p^p(mu, nu).

    Regresses the projected transport cost on the even-degree harmonic basis
    evaluated at the given directions and returns the fitted intercept.
    """
    t0 = time.perf_counter()
    if dirs.d != basis.dim:
        raise ValueError(f"directions dimension {dirs.d} != basis dimension {basis.dim}")
    handle = IntegrandHandle(mu, nu, p)
    fvals = handle.evaluate_many(dirs)
    phi = evaluate_basis(basis, dirs)
    report = olsmc(fvals, phi)
    report.method = "shcv"
    report.wall_time = time.perf_counter() - t0
    return report


def _measure_mean(measure) -> np.ndarray:
    if isinstance(measure, GaussianMeasure):
        return np.asarray(measure.mean)
    return measure.mean()


def _quadratic_control(mu, nu, dirs: DirectionSet, include_scatter: bool):
    """Control values c_k and their known sphere mean for the CV baselines.

    The base control is ``(theta^T (xbar - ybar))^2`` with mean
    ``||xbar - ybar||^2 / d``.  With ``include_scatter`` the weighted
    second-moment terms of both measures are added (for Gaussians: the true
    covariance quadratic forms), shifting the known mean by the trace terms.
    """
    theta = dirs.directions
    d = dirs.d
    delta = _measure_mean(mu) - _measure_mean(nu)
    control = (theta @ delta) ** 2
    known = float(delta @ delta) / d
    if include_scatter:
        for measure in (mu, nu):
            if isinstance(measure, GaussianMeasure):
                cov = measure.covariance
                control = control + np.einsum("nd,de,ne->n", theta, cov, theta)
                known += float(np.trace(cov)) / d
            else:
                centered = measure.atoms - measure.mean()
                proj = theta @ centered.T
                control = control + (proj * proj) @ measure.weights
                known += fsum(measure.weights * np.sum(centered * centered, axis=1)) / d
    return control, known


def _single_control_estimate(
    method: str, mu, nu, p, dirs, include_scatter, coefficient
) -> EstimatorReport:
    t0 = time.perf_counter()
    handle = IntegrandHandle(mu, nu, p)
    fvals = handle.evaluate_many(dirs)
    n = dirs.n
    mc = fsum(fvals) / n
    control, known = _quadratic_control(mu, nu, dirs, include_scatter)
    shifted = control - known
    shift_mean = fsum(shifted) / n
    centered = shifted - shift_mean
    denom = fsum(centered * centered)
    if denom <= 0.0:
        return EstimatorReport(
            mc,
            method,
            n,
            coefficients=np.zeros(1),
            residual_variance=fsum((fvals - mc) ** 2) / n,
            wall_time=time.perf_counter() - t0,
            degenerate_control=True,
        )
    if coefficient is None:
        coefficient = fsum((fvals - mc) * shifted) / denom
    estimate = mc - coefficient * shift_mean
    residuals = fvals - mc - coefficient * centered
    return EstimatorReport(
        estimate,
        method,
        n,
        coefficients=np.array([coefficient]),
        residual_variance=fsum(residuals * residuals) / n,
        wall_time=time.perf_counter() - t0,
    )


def cv_lower(mu, nu, p: float, dirs: DirectionSet, coefficient: float | None = None) -> EstimatorReport:
    """Single quadratic control variate built from the measure barycenters.

    The regression coefficient is fitted on the same sample unless a fixed
    ``coefficient`` is supplied (which makes the estimator exactly
    unbiased).  A zero-variance control (equal barycenters) falls back to
    plain Monte Carlo and sets the degenerate flag.
    """
    return _single_control_estimate("cvlow", mu, nu, p, dirs, False, coefficient)


def cv_upper(mu, nu, p: float, dirs: DirectionSet, coefficient: float | None = None) -> EstimatorReport:
    """Quadratic control including the weighted scatter of both measures.

    Equivalent to a single control ``theta^T M theta - Tr(M)/d`` where M sums
    the barycenter-gap outer product with both second-moment matrices.
    """
    return _single_control_estimate("cvup", mu, nu, p, dirs, True, coefficient)


def _nearest_values(train: np.ndarray, fvals: np.ndarray, queries: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """f value of the nearest training direction for each query row.

    Nearest in the ambient Euclidean metric, which on unit vectors is the
    largest inner product.
    """
    out = np.empty(queries.shape[0])
    for start in range(0, queries.shape[0], chunk):
        sims = queries[start : start + chunk] @ train.T
        out[start : start + chunk] = fvals[np.argmax(sims, axis=1)]
    return out


def cvnn(mu, nu, p: float, dirs: DirectionSet, seed: int) -> EstimatorReport:
    """Nearest-neighbor control functional estimate.

    Uses the leave-one-out 1-NN surrogate at each sample direction as a
    control variate; the surrogate's own integral is estimated by evaluating
    the full 1-NN predictor at ceil(n^(1 + 2/d)) fresh uniform directions.
    Integrand values are reused, so the fresh directions cost no new
    transport solves.
    """
    t0 = time.perf_counter()
    n, d = dirs.n, dirs.d
    if n < 2:
        raise ValueError("nearest-neighbor control needs n >= 2")
    handle = IntegrandHandle(mu, nu, p)
    theta = dirs.directions
    fvals = handle.evaluate_many(dirs)
    mc = fsum(fvals) / n

    loo = np.empty(n)
    chunk = 2048
    for start in range(0, n, chunk):
        sims = theta[start : start + chunk] @ theta.T
        rows = np.arange(start, min(start + chunk, n))
        sims[np.arange(rows.shape[0]), rows] = -np.inf
        loo[rows] = fvals[np.argmax(sims, axis=1)]

    n_fresh = int(ceil(n ** (1.0 + 2.0 / d)))
    fresh = sample_uniform(n_fresh, d, seed)
    surrogate = _nearest_values(theta, fvals, fresh.directions)
    surrogate_mean = fsum(surrogate) / n_fresh
    estimate = mc - (fsum(loo) / n - surrogate_mean)
    return EstimatorReport(estimate, "cvnn", n, wall_time=time.perf_counter() - t0)


def qmc_estimate(mu, nu, p: float, n: int, kind: str = "sobol") -> EstimatorReport:
    """Average the integrand over the deterministic low-discrepancy directions."""
    t0 = time.perf_counter()
    handle = IntegrandHandle(mu, nu, p)
    dirs = qmc_directions(n, mu.d, kind)
    est = fsum(handle.evaluate_many(dirs)) / n
    return EstimatorReport(est, "qmc", n, wall_time=time.perf_counter() - t0)


def rqmc_estimate(mu, nu, p: float, n: int, kind: str = "halton", seed: int = 0) -> EstimatorReport:
    """Average over one Haar-rotated copy of the low-discrepancy directions."""
    t0 = time.perf_counter()
    handle = IntegrandHandle(mu, nu, p)
    dirs = rqmc_directions(n, mu.d, kind, seed)
    est = fsum(handle.evaluate_many(dirs)) / n
    return EstimatorReport(est, "rqmc", n, wall_time=time.perf_counter() - t0)


def shcv_weights(phi, source: str = "") -> LinearRuleWeights:
    """Integration-rule weights reproducing the regression intercept.

    Computes ``w = (I - P) 1 / (1^T (I - P) 1)`` with P the orthogonal
    projector onto the column space of phi, after the same trailing-column
    reduction as :func:`olsmc`.  For any integrand values f, ``w @ f`` equals
    the corresponding intercept, so the weights can be amortized over many
    integrands.
    """
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    n, s = phi.shape
    kept = _usable_columns(phi, n)
    if n <= kept + 1:
        raise ValueError(f"need n > s + 1 (n = {n}, s = {kept} after reduction)")
    ones = np.ones(n)
    if kept == 0:
        return LinearRuleWeights(ones / n, source or "uniform")
    q, _ = np.linalg.qr(phi[:, :kept])
    deflected = ones - q @ (q.T @ ones)
    denom = fsum(deflected)
    if abs(denom) < _WEIGHT_DENOM_TOL * n:
        raise ValueError("the constant vector lies in the span of the controls")
    return LinearRuleWeights(deflected / denom, source or f"phi({n}x{kept})")
