"""Orthonormal spherical-harmonic bases of even degree in any dimension.

Bases are orthonormal with respect to the uniform *probability* measure on
the sphere, so the block sum of squares equals the block dimension and the
empirical Gram matrix of a uniform sample is close to the identity.  Only
even degrees are materialized: the projected-transport integrand is even, so
odd-degree functions are useless as control variates.

Construction depends on the ambient dimension:

* d = 2: cosine/sine pairs in the polar angle.
* d = 3: real basis from normalized associated Legendre functions.
* d >= 4: for each degree, a well-conditioned point set is selected greedily
  from a random pool by maximizing the Schur-complement increment of the
  Gegenbauer Gram matrix; the basis applies the inverse of its triangular
  factor to the kernel column vector.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial, sqrt

import numpy as np
from scipy.linalg import solve_triangular

from .sphere import DirectionSet

__all__ = [
    "count_degree",
    "count_even_cumulative",
    "GegenbauerEvaluator",
    "gegenbauer_eval",
    "HarmonicBlock",
    "HarmonicBasis",
    "build_basis",
    "evaluate_basis",
]

# Building more functions than this without an explicit cap is refused;
# the evaluation matrices would not fit desk-scale memory anyway.
MAX_UNCAPPED_FUNCTIONS = 2_000_000

_POOL_FACTOR = 50
_POOL_RETRIES = 3
_DIAG_RATIO_MIN = 1e-8


def count_degree(dim: int, degree: int) -> int:
    """Number of linearly independent spherical harmonics of one degree.

    Exact integer value of ``(2*degree + dim - 2) * (degree + dim - 3)! /
    (degree! * (dim - 2)!)``; degree 0 counts the constants.  Python integer
    arithmetic is exact at any size, so no overflow can occur here.
    """
    if dim < 2:
        raise ValueError("dimension must be >= 2")
    if degree < 0:
        raise ValueError("degree must be >= 0")
    if degree == 0:
        return 1
    num = (2 * degree + dim - 2) * factorial(degree + dim - 3)
    return num // (factorial(degree) * factorial(dim - 2))


def count_even_cumulative(dim: int, max_degree: int) -> int:
    """Total count of spherical harmonics of even degree 2..max_degree.

    Equals ``binom(max_degree + dim - 1, dim - 1) - 1`` and also the direct
    sum of the per-degree counts.
    """
    if dim < 2:
        raise ValueError("dimension must be >= 2")
    if max_degree < 2 or max_degree % 2 != 0:
        raise ValueError("max_degree must be an even integer >= 2")
    return comb(max_degree + dim - 1, dim - 1) - 1


@dataclass(frozen=True)
class GegenbauerEvaluator:
    """Gegenbauer polynomial C_degree^alpha with alpha = (dim - 2) / 2."""

    degree: int
    alpha: float

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be >= 0")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive (use dim >= 3)")


def _gegenbauer(degree: int, alpha: float, z):
    """Vectorized Gegenbauer evaluation by the three-term recurrence."""
    z = np.asarray(z, dtype=float)
    if degree == 0:
        return np.ones_like(z)
    prev = np.ones_like(z)
    cur = 2.0 * alpha * z
    for ell in range(2, degree + 1):
        prev, cur = cur, (
            2.0 * (ell + alpha - 1.0) * z * cur - (ell + 2.0 * alpha - 2.0) * prev
        ) / ell
    return cur


def gegenbauer_eval(ev: GegenbauerEvaluator, z):
    """Evaluate the polynomial at ``z`` in [-1, 1] (1e-12 slack allowed)."""
    arr = np.asarray(z, dtype=float)
    if np.any(np.abs(arr) > 1.0 + 1e-12):
        raise ValueError("arguments must lie in [-1, 1]")
    out = _gegenbauer(ev.degree, ev.alpha, arr)
    if np.isscalar(z) or np.ndim(z) == 0:
        return float(out)
    return out


def _normalized_legendre_table(z: np.ndarray, max_degree: int) -> dict:
    """Associated Legendre functions normalized for the probability measure.

    Returns arrays Q[(l, k)] with Q_{l,0}(z) = sqrt(2l+1) P_l(z) and
    Q_{l,k} = sqrt((2l+1)(l-k)!/(l+k)!) P_l^k(z), computed by the stable
    fully normalized recurrences.
    """
    s = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    table = {(0, 0): np.ones_like(z)}
    for k in range(0, max_degree + 1):
        if k > 0:
            table[(k, k)] = -sqrt((2 * k + 1) / (2 * k)) * s * table[(k - 1, k - 1)]
        older = None
        newer = table[(k, k)]
        for ell in range(k + 1, max_degree + 1):
            a = sqrt((4 * ell * ell - 1) / (ell * ell - k * k))
            q = a * z * newer
            if older is not None:
                b = sqrt(
                    (2 * ell + 1)
                    * (ell + k - 1)
                    * (ell - k - 1)
                    / ((ell - k) * (ell + k) * (2 * ell - 3))
                )
                q = q - b * older
            table[(ell, k)] = q
            older, newer = newer, q
    return table


@dataclass(frozen=True)
class HarmonicBlock:
    """One even-degree block of the basis.

    ``count`` is the number of functions materialized, ``full_count`` the
    block dimension; they differ only when the basis was built with a cap.
    ``points``, ``tri`` and ``scale`` carry the fundamental-system data used
    in dimensions >= 4 and are None otherwise.
    """

    degree: int
    count: int
    full_count: int
    points: np.ndarray | None = None
    tri: np.ndarray | None = None
    scale: float | None = None

    @property
    def diag_ratio(self) -> float | None:
        """Smallest-to-largest diagonal ratio of the triangular factor."""
        if self.tri is None:
            return None
        diag = np.abs(np.diag(self.tri))
        return float(diag.min() / diag.max())


@dataclass(frozen=True)
class HarmonicBasis:
    """Evaluable orthonormal system of even-degree spherical harmonics."""

    dim: int
    max_degree: int
    blocks: tuple
    seed: int

    @property
    def size(self) -> int:
        return sum(b.count for b in self.blocks)

    @property
    def is_complete(self) -> bool:
        return all(b.count == b.full_count for b in self.blocks)

    @property
    def identity(self) -> str:
        return (
            f"harmonics(dim={self.dim}, max_degree={self.max_degree}, "
            f"seed={self.seed}, size={self.size})"
        )

    def evaluate(self, dirs, chunk: int = 16384) -> np.ndarray:
        return evaluate_basis(self, dirs, chunk=chunk)


class FundamentalSystemError(RuntimeError):
    """Raised when no well-conditioned point set is found for a block."""


def _select_fundamental(dim, degree, count, seed, full_count):
    """Greedy max-determinant point selection for one degree block.

    Runs a pivoted Cholesky factorization of the Gegenbauer Gram matrix over
    a random candidate pool, keeping the ``count`` points with the largest
    Schur-complement increments.  The triangular factor diagonal must stay
    above 1e-8 of its largest entry; exhausted pools are redrawn a bounded
    number of times.
    """
    alpha = (dim - 2) / 2.0
    c_one = float(_gegenbauer(degree, alpha, np.array(1.0)))
    pool_n = _POOL_FACTOR * count
    worst_ratio = None
    for attempt in range(_POOL_RETRIES):
        rng = np.random.default_rng(
            np.random.SeedSequence([seed & 0xFFFFFFFF, dim, degree, attempt])
        )
        pts = rng.standard_normal((pool_n, dim))
        pts /= np.linalg.norm(pts, axis=1)[:, None]
        tri = np.zeros((count, count))
        coeffs = np.zeros((pool_n, count))
        resid = np.full(pool_n, c_one)
        chosen = np.empty(count, dtype=int)
        max_diag = 0.0
        failed_at = None
        for t in range(count):
            j = int(np.argmax(resid))
            pivot_sq = float(resid[j])
            pivot = sqrt(pivot_sq) if pivot_sq > 0.0 else 0.0
            if pivot <= _DIAG_RATIO_MIN * max_diag or pivot == 0.0:
                failed_at = t
                worst_ratio = pivot / max_diag if max_diag > 0 else 0.0
                break
            max_diag = max(max_diag, pivot)
            chosen[t] = j
            tri[t, :t] = coeffs[j, :t]
            tri[t, t] = pivot
            col = _gegenbauer(degree, alpha, pts @ pts[j])
            if t > 0:
                col = col - coeffs[:, :t] @ coeffs[j, :t]
            coeffs[:, t] = col / pivot
            resid -= coeffs[:, t] ** 2
            resid[j] = -np.inf
        if failed_at is None:
            scale = sqrt((degree + alpha) / alpha)
            return pts[chosen], tri, scale
    raise FundamentalSystemError(
        f"degree {degree} in dimension {dim}: no candidate kept the triangular "
        f"diagonal above {_DIAG_RATIO_MIN:g} of its maximum after "
        f"{_POOL_RETRIES} pools of {pool_n} points "
        f"(block dimension {full_count}, best rejected ratio {worst_ratio:g})"
    )


def build_basis(dim: int, max_degree: int, seed: int = 0, max_functions: int | None = None) -> HarmonicBasis:
    """Build the even-degree harmonic basis up to ``max_degree``.

    ``max_functions`` optionally caps the total number of functions: lower
    degrees are filled completely first and the top block is truncated.  A
    truncated block is still an orthonormal zero-mean family; only the
    constant-sum-of-squares identity needs the complete block.  The result
    is bit-reproducible for a fixed seed.
    """
    if dim < 2:
        raise ValueError("dimension must be >= 2")
    if max_degree < 2 or max_degree % 2 != 0:
        raise ValueError("max_degree must be an even integer >= 2")
    total = count_even_cumulative(dim, max_degree)
    if max_functions is None and total > MAX_UNCAPPED_FUNCTIONS:
        raise ValueError(
            f"basis would hold {total} functions; pass max_functions to cap it"
        )
    budget = total if max_functions is None else min(max_functions, total)
    if budget < 1:
        raise ValueError("max_functions must be >= 1")

    blocks = []
    for degree in range(2, max_degree + 1, 2):
        if budget <= 0:
            break
        full = count_degree(dim, degree)
        take = min(full, budget)
        budget -= take
        if dim >= 4:
            pts, tri, scale = _select_fundamental(dim, degree, take, seed, full)
            blocks.append(HarmonicBlock(degree, take, full, pts, tri, scale))
        else:
            blocks.append(HarmonicBlock(degree, take, full))
    return HarmonicBasis(dim, max_degree, tuple(blocks), seed)


def _eval_circular(basis: HarmonicBasis, theta: np.ndarray) -> np.ndarray:
    angle = np.arctan2(theta[:, 1], theta[:, 0])
    cols = []
    sqrt2 = sqrt(2.0)
    for block in basis.blocks:
        pair = [sqrt2 * np.cos(block.degree * angle), sqrt2 * np.sin(block.degree * angle)]
        cols.extend(pair[: block.count])
    return np.column_stack(cols)


def _eval_legendre(basis: HarmonicBasis, theta: np.ndarray) -> np.ndarray:
    z = theta[:, 2]
    azimuth = np.arctan2(theta[:, 1], theta[:, 0])
    table = _normalized_legendre_table(z, basis.max_degree)
    sqrt2 = sqrt(2.0)
    cols = []
    for block in basis.blocks:
        ell = block.degree
        per_block = [table[(ell, 0)]]
        for k in range(1, ell + 1):
            radial = sqrt2 * table[(ell, k)]
            per_block.append(radial * np.cos(k * azimuth))
            per_block.append(radial * np.sin(k * azimuth))
        cols.extend(per_block[: block.count])
    return np.column_stack(cols)


def _eval_fundamental(basis: HarmonicBasis, theta: np.ndarray) -> np.ndarray:
    alpha = (basis.dim - 2) / 2.0
    out = np.empty((theta.shape[0], basis.size))
    col = 0
    for block in basis.blocks:
        kernel = _gegenbauer(block.degree, alpha, theta @ block.points.T)
        vals = solve_triangular(block.tri, kernel.T, lower=True).T
        out[:, col : col + block.count] = block.scale * vals
        col += block.count
    return out


def evaluate_basis(basis: HarmonicBasis, dirs, chunk: int = 16384) -> np.ndarray:
    """Evaluate every basis function at every direction.

    Returns an (n, s) matrix whose column j holds function j at all
    directions.  Rows are processed in chunks; evaluation is pure, so
    callers may parallelize over row blocks.
    """
    theta = (
        dirs.directions
        if isinstance(dirs, DirectionSet)
        else np.atleast_2d(np.asarray(dirs, dtype=float))
    )
    if theta.shape[1] != basis.dim:
        raise ValueError(
            f"directions have dimension {theta.shape[1]}, expected {basis.dim}"
        )
    if basis.dim == 2:
        evaluator = _eval_circular
    elif basis.dim == 3:
        evaluator = _eval_legendre
    else:
        evaluator = _eval_fundamental
    n = theta.shape[0]
    if n <= chunk:
        return evaluator(basis, theta)
    out = np.empty((n, basis.size))
    for start in range(0, n, chunk):
        out[start : start + chunk] = evaluator(basis, theta[start : start + chunk])
    return out
