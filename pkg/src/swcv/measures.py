"""Probability measure containers, 1D projections and moment diagnostics.

Two measure families are supported: weighted point sets (``DiscreteMeasure``)
and Gaussians with full covariance (``GaussianMeasure``).  Both are immutable
after construction and all operations here are pure functions, so values can
be shared freely across threads.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import fsum

import numpy as np

__all__ = [
    "DiscreteMeasure",
    "GaussianMeasure",
    "Projected1D",
    "project",
    "project_gaussian",
    "moment_p",
    "lipschitz_bound",
    "load_point_cloud",
]

WEIGHT_TOL = 1e-12
UNIT_NORM_TOL = 1e-12
SYMMETRY_TOL = 1e-12


def _frozen_array(values, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted point set ``sum_i weights[i] * delta(atoms[i])`` on R^d.

    Parameters
    ----------
    atoms : (m, d) array_like
        Atom coordinates, one point per row.
    weights : (m,) array_like
        Nonnegative weights summing to one (within 1e-12).  Weights are
        stored explicitly even when uniform.
    """

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        weights = np.asarray(self.weights, dtype=float).ravel()
        if atoms.ndim != 2 or atoms.shape[0] < 1 or atoms.shape[1] < 1:
            raise ValueError("atoms must be a nonempty (m, d) array")
        if weights.shape[0] != atoms.shape[0]:
            raise ValueError(
                f"got {weights.shape[0]} weights for {atoms.shape[0]} atoms"
            )
        if np.any(weights < 0.0):
            raise ValueError("weights must be nonnegative")
        total = fsum(weights)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights must sum to 1, got {total!r}")
        object.__setattr__(self, "atoms", _frozen_array(atoms))
        object.__setattr__(self, "weights", _frozen_array(weights))

    @classmethod
    def uniform(cls, atoms) -> "DiscreteMeasure":
        """Equal-weight measure on the given atoms."""
        atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
        m = atoms.shape[0]
        return cls(atoms, np.full(m, 1.0 / m))

    @property
    def m(self) -> int:
        return self.atoms.shape[0]

    @property
    def d(self) -> int:
        return self.atoms.shape[1]

    def mean(self) -> np.ndarray:
        """Barycenter ``sum_i w_i x_i``."""
        return self.weights @ self.atoms

    def is_uniform(self) -> bool:
        return bool(np.all(np.abs(self.weights - 1.0 / self.m) <= WEIGHT_TOL))


@dataclass(frozen=True)
class GaussianMeasure:
    """Gaussian measure N(mean, covariance) with SPD covariance.

    The covariance must be symmetric within 1e-12 and positive definite;
    definiteness is verified by a Cholesky factorization at construction so
    downstream square roots cannot fail late.
    """

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).ravel()
        cov = np.asarray(self.covariance, dtype=float)
        d = mean.shape[0]
        if d < 1 or cov.shape != (d, d):
            raise ValueError(f"covariance must be ({d}, {d}), got {cov.shape}")
        scale = max(1.0, float(np.abs(cov).max()))
        if np.abs(cov - cov.T).max() > SYMMETRY_TOL * scale:
            raise ValueError("covariance is not symmetric within 1e-12")
        cov = 0.5 * (cov + cov.T)
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise ValueError("covariance is not positive definite") from exc
        object.__setattr__(self, "mean", _frozen_array(mean))
        object.__setattr__(self, "covariance", _frozen_array(cov))

    @property
    def d(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class Projected1D:
    """One-dimensional weighted measure obtained by projecting atoms."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if values.shape != weights.shape:
            raise ValueError("values and weights must have equal length")
        if abs(fsum(weights) - 1.0) > WEIGHT_TOL:
            raise ValueError("weights must sum to 1")
        object.__setattr__(self, "values", _frozen_array(values))
        object.__setattr__(self, "weights", _frozen_array(weights))


def _check_direction(theta, d: int) -> np.ndarray:
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.shape[0] != d:
        raise ValueError(f"direction has dimension {theta.shape[0]}, expected {d}")
    norm = float(np.linalg.norm(theta))
    if abs(norm - 1.0) > UNIT_NORM_TOL:
        raise ValueError(f"direction is not unit norm (|theta| = {norm!r})")
    return theta


def project(measure: DiscreteMeasure, theta) -> Projected1D:
    """Push a discrete measure forward along the unit direction ``theta``.

    Returns the 1D measure with values ``<theta, x_i>`` and unchanged
    weights.  Directions outside the 1e-12 unit-norm tolerance are rejected,
    never renormalized.
    """
    theta = _check_direction(theta, measure.d)
    return Projected1D(measure.atoms @ theta, measure.weights)


def project_gaussian(g: GaussianMeasure, theta) -> tuple[float, float]:
    """Mean and variance of the 1D projection of a Gaussian measure."""
    theta = _check_direction(theta, g.d)
    mean = float(theta @ g.mean)
    var = float(theta @ g.covariance @ theta)
    return mean, var


def moment_p(measure, p: float) -> float:
    """Moment ``integral of ||x||^p`` of a supported measure.

    For discrete measures any ``p >= 1`` is allowed.  For Gaussians only
    ``p = 2`` has a simple closed form (trace of the covariance plus the
    squared mean norm); other orders are rejected.
    """
    if p < 1:
        raise ValueError(f"order p must be >= 1, got {p}")
    if isinstance(measure, DiscreteMeasure):
        norms = np.linalg.norm(measure.atoms, axis=1)
        return fsum(measure.weights * norms**p)
    if isinstance(measure, GaussianMeasure):
        if p != 2:
            raise ValueError("Gaussian moments are only implemented for p = 2")
        return float(np.trace(measure.covariance) + measure.mean @ measure.mean)
    raise TypeError(f"unsupported measure type {type(measure).__name__}")


def lipschitz_bound(mu, nu, p: float) -> float:
    """Lipschitz constant bound for the projected transport cost.

    Evaluates ``p * 2^(p-1) * max(Mp(mu), Mp(nu))^((p-1)/p)
    * (Mp(mu)^(1/p) + Mp(nu)^(1/p))`` from the p-th moments of both
    measures.
    """
    mp_mu = moment_p(mu, p)
    mp_nu = moment_p(nu, p)
    biggest = max(mp_mu, mp_nu)
    return (
        p
        * 2.0 ** (p - 1.0)
        * biggest ** ((p - 1.0) / p)
        * (mp_mu ** (1.0 / p) + mp_nu ** (1.0 / p))
    )


def load_point_cloud(path, weighted: bool = False) -> DiscreteMeasure:
    """Read a point cloud from a whitespace-separated text file.

    One point per line; lines starting with ``#`` are ignored.  With
    ``weighted=True`` the final column is parsed as a weight and the weights
    are renormalized to sum to one.
    """
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            try:
                rows.append([float(tok) for tok in stripped.split()])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: cannot parse {line!r}") from exc
    if not rows:
        raise ValueError(f"{path}: no points found")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path}: inconsistent column counts {sorted(widths)}")
    data = np.asarray(rows, dtype=float)
    if weighted:
        if data.shape[1] < 2:
            raise ValueError(f"{path}: weighted files need a final weight column")
        atoms, w = data[:, :-1], data[:, -1]
        if np.any(w < 0):
            raise ValueError(f"{path}: negative weights")
        total = fsum(w)
        if total <= 0:
            raise ValueError(f"{path}: weights sum to zero")
        return DiscreteMeasure(atoms, w / total)
    return DiscreteMeasure.uniform(data)
