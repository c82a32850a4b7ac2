"""Shared test oracles.

Everything here is deliberately independent of the library's own evaluation
paths: the transport LP solves the assignment problem directly, and the
spherical quadrature integrates the closed-form Gaussian integrand with a
product rule.
"""
import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss
from scipy.optimize import linprog

from swcv.gaussian_exact import gaussian_integrand_many


def transport_lp_cost(xa, wa, xb, wb, p):
    """Optimal transport cost between two weighted 1D point sets via an LP."""
    xa = np.asarray(xa, dtype=float)
    xb = np.asarray(xb, dtype=float)
    ma, mb = len(xa), len(xb)
    cost = np.abs(xa[:, None] - xb[None, :]) ** p
    a_eq = np.zeros((ma + mb, ma * mb))
    for i in range(ma):
        a_eq[i, i * mb : (i + 1) * mb] = 1.0
    for j in range(mb):
        a_eq[ma + j, j::mb] = 1.0
    b_eq = np.concatenate([wa, wb])
    res = linprog(cost.ravel(), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    assert res.success, res.message
    return res.fun


def sphere_quadrature_sw2(g1, g2, n_polar=240, n_azim=480):
    """Sliced squared 2-Wasserstein value on S^2 by product quadrature.

    Gauss-Legendre in the polar cosine crossed with a periodic trapezoid in
    the azimuth; converges to ~1e-15 for the smooth Gaussian integrand.
    """
    z, wz = leggauss(n_polar)
    u = np.linspace(0.0, 2.0 * np.pi, n_azim, endpoint=False)
    zz, uu = np.meshgrid(z, u, indexing="ij")
    s = np.sqrt(1.0 - zz**2)
    dirs = np.column_stack(
        [(s * np.cos(uu)).ravel(), (s * np.sin(uu)).ravel(), zz.ravel()]
    )
    vals = gaussian_integrand_many(g1, g2, dirs).reshape(n_polar, n_azim)
    return float((wz @ vals.mean(axis=1)) / 2.0)


def circle_quadrature_sw(mu, nu, p=2.0, nodes=10**6):
    """Sliced cost on S^1 by midpoint quadrature over the half circle."""
    from swcv.wasserstein1d import IntegrandHandle

    t = (np.arange(nodes) + 0.5) * (np.pi / nodes)
    dirs = np.column_stack([np.cos(t), np.sin(t)])
    return float(np.mean(IntegrandHandle(mu, nu, p).evaluate_many(dirs)))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240607)
