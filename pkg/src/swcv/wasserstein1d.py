"""Exact one-dimensional transport costs and the sliced-distance integrand.

The 1D costs are exact for discrete measures: both quantile functions are
step functions, so integrating ``|F_a^{-1} - F_b^{-1}|^p`` over the merged
breakpoint partition incurs no discretization error at any order p.
"""
from __future__ import annotations

from math import fsum

import numpy as np

from .gaussian_exact import gaussian_integrand_many
from .measures import GaussianMeasure, Projected1D, _check_direction
from .sphere import DirectionSet

__all__ = [
    "w1d_equal_mass",
    "w1d_weighted",
    "IntegrandHandle",
    "integrand_eval",
]

_MERGE_TOL = 1e-15


def w1d_equal_mass(xs, ys, p: float) -> float:
    """Order-p transport cost between equal-size uniform 1D measures.

    Sorts both atom vectors and returns ``mean(|x_(i) - y_(i)|^p)``.
    """
    if p < 1:
        raise ValueError(f"order p must be >= 1, got {p}")
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    if xs.shape[0] != ys.shape[0]:
        raise ValueError(f"length mismatch: {xs.shape[0]} vs {ys.shape[0]}")
    if xs.shape[0] < 1:
        raise ValueError("need at least one atom per side")
    gaps = np.abs(np.sort(xs) - np.sort(ys))
    return fsum(gaps**p) / xs.shape[0]


def w1d_weighted(a: Projected1D, b: Projected1D, p: float) -> float:
    """Exact order-p transport cost between weighted 1D measures.

    Sorts each measure by value, merges the two cumulative-weight breakpoint
    sequences and sums ``|F_a^{-1} - F_b^{-1}|^p * dt`` over the merged
    partition.  Ties in values are broken by a stable sort; tie order cannot
    change the value since the quantile functions are piecewise constant.
    """
    if p < 1:
        raise ValueError(f"order p must be >= 1, got {p}")
    order_a = np.argsort(a.values, kind="stable")
    order_b = np.argsort(b.values, kind="stable")
    xa, wa = a.values[order_a], a.weights[order_a]
    xb, wb = b.values[order_b], b.weights[order_b]
    cum_a = np.cumsum(wa)
    cum_b = np.cumsum(wb)

    terms = []
    i = j = 0
    t = 0.0
    while i < xa.shape[0] and j < xb.shape[0]:
        ca, cb = cum_a[i], cum_b[j]
        nxt = min(ca, cb)
        seg = nxt - t
        if seg > 0.0:
            terms.append(abs(xa[i] - xb[j]) ** p * seg)
        t = nxt
        # advance both sides when the breakpoints coincide within tolerance,
        # which avoids spurious zero-width segments from rounding
        if abs(ca - cb) <= _MERGE_TOL:
            i += 1
            j += 1
        elif ca < cb:
            i += 1
        else:
            j += 1
    return fsum(terms)


def _w1d_uniform_batch(proj_a: np.ndarray, proj_b: np.ndarray, p: float) -> np.ndarray:
    """Row-wise equal-mass cost for two (n, m) projection matrices."""
    sa = np.sort(proj_a, axis=1)
    sb = np.sort(proj_b, axis=1)
    gaps = np.abs(sa - sb)
    if p == 2:
        return np.mean(gaps * gaps, axis=1)
    if p == 1:
        return np.mean(gaps, axis=1)
    return np.mean(gaps**p, axis=1)


def _sorted_quantile_data(values: np.ndarray, weights: np.ndarray):
    """Row-wise sorted values and matching cumulative weights."""
    order = np.argsort(values, axis=1, kind="stable")
    vals = np.take_along_axis(values, order, axis=1)
    cum = np.cumsum(weights[order], axis=1)
    return vals, cum


def _eval_step(vals: np.ndarray, cum: np.ndarray, probes: np.ndarray) -> np.ndarray:
    """Evaluate row-wise step quantile functions at probe levels.

    Rows are made globally monotone by adding disjoint per-row offsets so
    one flat searchsorted call serves all rows at once.
    """
    n, m = vals.shape
    k = probes.shape[1]
    offsets = 2.0 * np.arange(n)[:, None]
    idx = np.searchsorted((cum + offsets).ravel(), (probes + offsets).ravel(), side="left")
    idx -= np.repeat(np.arange(n) * m, k)
    np.clip(idx, 0, m - 1, out=idx)
    return vals[np.repeat(np.arange(n), k), idx].reshape(probes.shape)


def _w1d_weighted_batch(
    proj_a: np.ndarray,
    wa: np.ndarray,
    proj_b: np.ndarray,
    wb: np.ndarray,
    p: float,
) -> np.ndarray:
    """Row-wise weighted cost for projection matrices with shared weights.

    The merged breakpoint grid per row is the union of both sorted
    cumulative-weight sequences; both quantile functions are constant on
    each segment, so evaluating them at segment midpoints is exact.
    """
    vals_a, cum_a = _sorted_quantile_data(proj_a, wa)
    vals_b, cum_b = _sorted_quantile_data(proj_b, wb)
    knots = np.sort(np.concatenate([cum_a, cum_b], axis=1), axis=1)
    # cumulative sums drift from 1 by round-off; pin the endpoint and keep
    # every segment width nonnegative
    np.minimum(knots, 1.0, out=knots)
    knots[:, -1] = 1.0
    widths = np.diff(knots, axis=1, prepend=0.0)
    mids = knots - 0.5 * widths
    qa = _eval_step(vals_a, cum_a, mids)
    qb = _eval_step(vals_b, cum_b, mids)
    return np.sum(np.abs(qa - qb) ** p * widths, axis=1)


class IntegrandHandle:
    """Projected transport cost of a measure pair, evaluated per direction.

    Wraps two measures of common ambient dimension and an order ``p >= 1``;
    calling it with a unit direction returns the exact 1D cost between the
    projections.  Gaussian pairs use the closed form (p = 2 only).  The
    evaluation counter is diagnostics only; estimates never depend on it, and
    concurrent callers should keep per-thread handles and merge counts.
    """

    def __init__(self, mu, nu, p: float):
        if p < 1:
            raise ValueError(f"order p must be >= 1, got {p}")
        if isinstance(mu, GaussianMeasure) != isinstance(nu, GaussianMeasure):
            raise TypeError("mixed Gaussian/discrete pairs are not supported")
        if mu.d != nu.d:
            raise ValueError(f"dimension mismatch: {mu.d} vs {nu.d}")
        if isinstance(mu, GaussianMeasure) and p != 2:
            raise ValueError("Gaussian pairs only support p = 2")
        self.mu = mu
        self.nu = nu
        self.p = float(p)
        self.n_evaluations = 0
        self._gaussian = isinstance(mu, GaussianMeasure)
        self._uniform_pair = (
            not self._gaussian
            and mu.m == nu.m
            and mu.is_uniform()
            and nu.is_uniform()
        )

    @property
    def d(self) -> int:
        return self.mu.d

    def __call__(self, theta) -> float:
        theta = _check_direction(theta, self.d)
        return float(self.evaluate_many(theta[None, :])[0])

    def evaluate_many(self, directions, chunk: int = 4096) -> np.ndarray:
        """Evaluate the integrand at every row of a direction array or set."""
        theta = (
            directions.directions
            if isinstance(directions, DirectionSet)
            else np.atleast_2d(np.asarray(directions, dtype=float))
        )
        if theta.shape[1] != self.d:
            raise ValueError(
                f"directions have dimension {theta.shape[1]}, expected {self.d}"
            )
        n = theta.shape[0]
        if self._gaussian:
            out = gaussian_integrand_many(self.mu, self.nu, theta)
        else:
            out = np.empty(n)
            for start in range(0, n, chunk):
                block = theta[start : start + chunk]
                proj_a = block @ self.mu.atoms.T
                proj_b = block @ self.nu.atoms.T
                if self._uniform_pair:
                    out[start : start + chunk] = _w1d_uniform_batch(
                        proj_a, proj_b, self.p
                    )
                else:
                    out[start : start + chunk] = _w1d_weighted_batch(
                        proj_a, self.mu.weights, proj_b, self.nu.weights, self.p
                    )
        self.n_evaluations += n
        return out


def integrand_eval(handle: IntegrandHandle, theta) -> float:
    """Evaluate the handle at one unit direction, bumping its counter."""
    return handle(theta)
