import numpy as np
import pytest

from conftest import transport_lp_cost
from swcv.measures import DiscreteMeasure, GaussianMeasure, Projected1D, lipschitz_bound, project
from swcv.sphere import sample_uniform
from swcv.wasserstein1d import IntegrandHandle, integrand_eval, w1d_equal_mass, w1d_weighted


class TestEqualMass:
    def test_sorted_pairing(self):
        assert w1d_equal_mass([0.0, 1.0], [0.0, 2.0], 2.0) == 0.5

    def test_permutation_gives_zero(self, rng):
        xs = rng.standard_normal(9)
        ys = rng.permutation(xs)
        for p in (1.0, 2.0, 3.0):
            assert w1d_equal_mass(xs, ys, p) == 0.0

    def test_hand_sorted_example(self):
        assert abs(w1d_equal_mass([3.0, 0.0, 1.0], [2.0, 2.0, 2.0], 1.0) - 4.0 / 3.0) < 1e-15

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            w1d_equal_mass([0.0], [0.0, 1.0], 2.0)

    def test_rejects_low_order(self):
        with pytest.raises(ValueError, match="p"):
            w1d_equal_mass([0.0], [1.0], 0.5)


class TestWeighted:
    def test_identical_measures(self, rng):
        vals = rng.standard_normal(6)
        w = rng.random(6)
        w /= w.sum()
        a = Projected1D(vals, w)
        for p in (1.0, 2.0, 3.0):
            assert w1d_weighted(a, a, p) == 0.0

    def test_single_transport(self):
        a = Projected1D([0.0], [1.0])
        b = Projected1D([2.5], [1.0])
        assert w1d_weighted(a, b, 2.0) == 2.5**2

    def test_merged_partition_example(self):
        a = Projected1D([0.0, 1.0], [0.75, 0.25])
        b = Projected1D([0.0, 1.0], [0.25, 0.75])
        value = w1d_weighted(a, b, 1.0)
        assert abs(value - 0.5) < 1e-15
        lp = transport_lp_cost([0.0, 1.0], [0.75, 0.25], [0.0, 1.0], [0.25, 0.75], 1.0)
        assert abs(value - lp) < 1e-9

    def test_against_lp_oracle(self, rng):
        for _ in range(80):
            ma, mb = rng.integers(1, 7, size=2)
            xa = 3.0 * rng.standard_normal(ma)
            xb = 3.0 * rng.standard_normal(mb)
            wa = rng.random(ma) + 0.05
            wa /= wa.sum()
            wb = rng.random(mb) + 0.05
            wb /= wb.sum()
            p = float(rng.choice([1.0, 2.0, 3.0]))
            mine = w1d_weighted(Projected1D(xa, wa), Projected1D(xb, wb), p)
            assert abs(mine - transport_lp_cost(xa, wa, xb, wb, p)) < 1e-9

    def test_symmetry(self, rng):
        for _ in range(25):
            a = Projected1D(rng.standard_normal(5), np.full(5, 0.2))
            wb = rng.random(4)
            b = Projected1D(rng.standard_normal(4), wb / wb.sum())
            p = float(rng.choice([1.0, 2.0, 3.0]))
            assert abs(w1d_weighted(a, b, p) - w1d_weighted(b, a, p)) < 1e-12

    def test_uniform_weights_match_equal_mass(self, rng):
        for _ in range(40):
            m = int(rng.integers(1, 9))
            xs = rng.standard_normal(m)
            ys = rng.standard_normal(m)
            p = float(rng.choice([1.0, 2.0, 3.0]))
            a = Projected1D(xs, np.full(m, 1.0 / m))
            b = Projected1D(ys, np.full(m, 1.0 / m))
            assert abs(w1d_equal_mass(xs, ys, p) - w1d_weighted(a, b, p)) < 1e-12

    def test_tie_order_is_irrelevant(self, rng):
        # duplicated values with distinct weights, shuffled into every order
        vals = np.array([0.0, 1.0, 1.0, 1.0, 2.0])
        w = np.array([0.1, 0.2, 0.25, 0.15, 0.3])
        b = Projected1D(rng.standard_normal(4), np.full(4, 0.25))
        baseline = w1d_weighted(Projected1D(vals, w), b, 2.0)
        for _ in range(10):
            perm = rng.permutation(5)
            shuffled = w1d_weighted(Projected1D(vals[perm], w[perm]), b, 2.0)
            assert abs(shuffled - baseline) < 1e-12


class TestIntegrandHandle:
    def test_identical_measures_vanish(self, rng):
        m = DiscreteMeasure.uniform(rng.standard_normal((8, 3)))
        handle = IntegrandHandle(m, m, 2.0)
        theta = rng.standard_normal(3)
        theta /= np.linalg.norm(theta)
        assert handle(theta) == 0.0

    def test_two_atom_branches(self):
        mu = DiscreteMeasure.uniform([[0.0, 0.0], [1.0, 0.0]])
        nu = DiscreteMeasure.uniform([[0.0, 0.0], [1.0, 1.0]])
        handle = IntegrandHandle(mu, nu, 2.0)
        assert handle(np.array([1.0, 0.0])) == 0.0
        assert abs(handle(np.array([0.0, 1.0])) - 0.5) < 1e-15

    def test_counter_and_module_wrapper(self, rng):
        mu = DiscreteMeasure.uniform(rng.standard_normal((4, 2)))
        nu = DiscreteMeasure.uniform(rng.standard_normal((4, 2)))
        handle = IntegrandHandle(mu, nu, 1.0)
        integrand_eval(handle, np.array([1.0, 0.0]))
        handle.evaluate_many(sample_uniform(10, 2, 0))
        assert handle.n_evaluations == 11

    def test_batch_matches_scalar_weighted(self, rng):
        atoms_a = rng.standard_normal((7, 4))
        atoms_b = rng.standard_normal((5, 4))
        wa = rng.random(7)
        wb = rng.random(5)
        mu = DiscreteMeasure(atoms_a, wa / wa.sum())
        nu = DiscreteMeasure(atoms_b, wb / wb.sum())
        dirs = sample_uniform(300, 4, 3)
        for p in (1.0, 2.0, 2.5):
            handle = IntegrandHandle(mu, nu, p)
            batch = handle.evaluate_many(dirs)
            scalar = [
                w1d_weighted(project(mu, t), project(nu, t), p)
                for t in dirs.directions
            ]
            np.testing.assert_allclose(batch, scalar, atol=1e-13)

    def test_evenness(self, rng):
        mu = DiscreteMeasure.uniform(rng.standard_normal((6, 3)))
        wb = rng.random(9)
        nu = DiscreteMeasure(rng.standard_normal((9, 3)), wb / wb.sum())
        handle = IntegrandHandle(mu, nu, 2.0)
        for _ in range(20):
            theta = rng.standard_normal(3)
            theta /= np.linalg.norm(theta)
            assert abs(handle(theta) - handle(-theta)) < 1e-12

    def test_lipschitz_property(self, rng):
        mu = DiscreteMeasure.uniform(2.0 * rng.standard_normal((10, 3)))
        nu = DiscreteMeasure.uniform(2.0 * rng.standard_normal((12, 3)) + 1.0)
        for p in (1.0, 2.0):
            handle = IntegrandHandle(mu, nu, p)
            bound = lipschitz_bound(mu, nu, p)
            for _ in range(100):
                theta, gamma = rng.standard_normal((2, 3))
                theta /= np.linalg.norm(theta)
                gamma /= np.linalg.norm(gamma)
                gap = abs(handle(theta) - handle(gamma))
                assert gap <= bound * np.linalg.norm(theta - gamma) + 1e-9

    def test_gaussian_pair_uses_closed_form(self):
        g1 = GaussianMeasure([0.0, 0.0], np.eye(2))
        g2 = GaussianMeasure([1.0, 0.0], np.eye(2))
        handle = IntegrandHandle(g1, g2, 2.0)
        assert abs(handle(np.array([1.0, 0.0])) - 1.0) < 1e-15
        assert abs(handle(np.array([0.0, 1.0]))) < 1e-15

    def test_rejects_mixed_and_bad_order(self):
        disc = DiscreteMeasure.uniform([[0.0, 0.0]])
        gauss = GaussianMeasure([0.0, 0.0], np.eye(2))
        with pytest.raises(TypeError):
            IntegrandHandle(disc, gauss, 2.0)
        with pytest.raises(ValueError):
            IntegrandHandle(gauss, gauss, 1.0)
        with pytest.raises(ValueError):
            IntegrandHandle(disc, disc, 0.5)
