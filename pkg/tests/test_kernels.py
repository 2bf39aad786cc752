import os
import subprocess
import sys

import numpy as np
import pytest

from fasmap import kernels


class TestLosFlags:
    RECTS = np.array([[3.0, 3.0, 5.0, 5.0], [8.0, 1.0, 9.0, 9.0]])

    def test_hand_cases(self):
        # BS at origin; through the first rect, around it, and along an edge
        out = kernels.los_flags(0.0, 0.0, np.array([6.0, 0.0, 6.0]),
                                np.array([6.0, 6.0, 0.0]), self.RECTS)
        assert out.tolist() == [0, 1, 1]

    def test_tangency_blocked(self):
        # horizontal ray grazing the top edge y = 5 of the first rectangle
        out = kernels.los_flags(0.0, 5.0, np.array([7.0]), np.array([5.0]),
                                self.RECTS)
        assert out.tolist() == [0]

    def test_endpoint_inside(self):
        out = kernels.los_flags(0.0, 0.0, np.array([4.0]), np.array([4.0]),
                                self.RECTS)
        assert out.tolist() == [0]

    def test_no_rectangles(self):
        out = kernels.los_flags(0.0, 0.0, np.array([1.0]), np.array([1.0]),
                                np.zeros((0, 4)))
        assert out.tolist() == [1]

    def test_numba_matches_numpy(self, rng):
        for _ in range(5):
            rects = np.sort(rng.uniform(0, 20, size=(4, 2, 2)), axis=1)
            rects = rects.transpose(0, 2, 1).reshape(4, 4)[:, [0, 2, 1, 3]]
            # rows are now (xmin, ymin, xmax, ymax)
            px = rng.uniform(0, 20, 200)
            py = rng.uniform(0, 20, 200)
            bs = rng.uniform(0, 20, 2)
            fast = kernels.los_flags(bs[0], bs[1], px, py, rects)
            slow = kernels.los_flags_numpy(bs[0], bs[1], px, py, rects)
            np.testing.assert_array_equal(fast, slow)


class TestIdw:
    def test_single_observation_constant(self):
        out = kernels.idw(np.array([0.0, 5.0]), np.array([0.0, 5.0]),
                          np.array([1.0]), np.array([1.0]),
                          np.array([42.0]), 5, 2.0)
        np.testing.assert_allclose(out, 42.0)

    def test_coincident_target(self):
        out = kernels.idw(np.array([2.0]), np.array([3.0]),
                          np.array([2.0, 9.0]), np.array([3.0, 9.0]),
                          np.array([7.0, -1.0]), 2, 2.0)
        assert out.tolist() == [7.0]

    def test_two_point_hand_weights(self):
        # distances 1 and 2, power 2: weights 1 and 1/4
        out = kernels.idw(np.array([0.0]), np.array([0.0]),
                          np.array([1.0, 2.0]), np.array([0.0, 0.0]),
                          np.array([10.0, 20.0]), 2, 2.0)
        assert out[0] == pytest.approx((10.0 + 20.0 / 4.0) / 1.25)

    def test_k_clamped_to_observation_count(self):
        out = kernels.idw(np.array([0.0]), np.array([0.0]),
                          np.array([1.0, 3.0]), np.array([0.0, 0.0]),
                          np.array([1.0, 5.0]), 10, 2.0)
        assert np.isfinite(out).all()

    def test_numba_matches_numpy(self, rng):
        tx = rng.uniform(0, 10, 150)
        ty = rng.uniform(0, 10, 150)
        ox = rng.uniform(0, 10, 40)
        oy = rng.uniform(0, 10, 40)
        vals = rng.normal(size=40)
        for k, p in ((1, 2.0), (5, 2.0), (5, 1.0), (40, 3.0)):
            np.testing.assert_allclose(
                kernels.idw(tx, ty, ox, oy, vals, k, p),
                kernels.idw_numpy(tx, ty, ox, oy, vals, k, p), atol=1e-10)


class TestGroupedSolve:
    def test_identity_blocks(self, rng):
        rhs = rng.normal(size=(10, 4))
        inv_stack = np.stack([np.eye(4)] * 3)
        group = rng.integers(0, 3, size=10)
        np.testing.assert_allclose(
            kernels.grouped_solve(inv_stack, group, rhs), rhs, atol=1e-12)

    def test_matches_per_cell_matmul(self, rng):
        inv_stack = rng.normal(size=(6, 5, 5))
        group = rng.integers(0, 6, size=30)
        rhs = rng.normal(size=(30, 5))
        out = kernels.grouped_solve(inv_stack, group, rhs)
        for c in range(30):
            np.testing.assert_allclose(out[c], inv_stack[group[c]] @ rhs[c],
                                       atol=1e-12)

    def test_numba_matches_numpy(self, rng):
        inv_stack = rng.normal(size=(8, 12, 12))
        group = rng.integers(0, 8, size=500)
        rhs = rng.normal(size=(500, 12))
        np.testing.assert_allclose(
            kernels.grouped_solve(inv_stack, group, rhs),
            kernels.grouped_solve_numpy(inv_stack, group, rhs), atol=1e-10)


class TestFallbackFlag:
    def test_env_flag_disables_numba(self):
        code = ("import fasmap.kernels as k; "
                "print(k.USE_NUMBA, k.idw is k.idw_numpy)")
        env = dict(os.environ, FASMAP_NO_NUMBA="1")
        out = subprocess.run([sys.executable, "-c", code], env=env,
                             capture_output=True, text=True, check=True)
        assert out.stdout.split() == ["False", "True"]
