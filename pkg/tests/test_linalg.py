"""Kernel tests: matvec, least squares, symmetric eigen bounds, streams."""

import math

import mpmath
import numpy as np
import pytest

from snrspread.linalg import (
    RandomStream,
    SingularMatrixError,
    draw_standard_normal,
    draw_uniform01,
    extreme_eigen_sym,
    least_squares,
    matvec,
)


class TestMatvec:
    def test_identity(self):
        out = matvec(np.eye(3), [1.0, 2.0, 3.0])
        assert np.array_equal(out, [1.0, 2.0, 3.0])

    def test_hand_case(self):
        a = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, -1.0]])
        assert np.array_equal(matvec(a, [0.0, 0.0, 2.0]), [2.0, -2.0])

    def test_zero_matrix(self):
        assert np.array_equal(matvec(np.zeros((4, 2)), [5.0, -3.0]), np.zeros(4))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            matvec(np.eye(3), [1.0, 2.0])

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            matvec(np.array([[np.inf, 0.0]]), [1.0, 2.0])


def _normal_equations_mpmath(a: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Independent oracle: explicit (A^T A)^-1 A^T y at 50-digit precision."""
    with mpmath.workdps(50):
        am = mpmath.matrix(a.tolist())
        ym = mpmath.matrix(y.tolist())
        gram = am.T * am
        rhs = am.T * ym
        sol = mpmath.lu_solve(gram, rhs)
        return np.array([float(sol[i]) for i in range(sol.rows)])


class TestLeastSquares:
    def test_orthonormal_columns_project_exactly(self):
        q, _ = np.linalg.qr(np.arange(12.0).reshape(4, 3) + np.eye(4, 3))
        coeffs = np.array([2.0, -1.0, 0.5])
        v = least_squares(q, q @ coeffs)
        assert np.allclose(v, coeffs, atol=1e-12)

    def test_column_of_ones_gives_mean(self):
        v = least_squares(np.array([[1.0], [1.0]]), [1.0, 3.0])
        assert v.shape == (1,)
        assert math.isclose(v[0], 2.0, rel_tol=1e-14)

    def test_matches_extended_precision_normal_equations(self):
        stream = RandomStream(11, ("lstsq",))
        a = stream.standard_normal(12).reshape(6, 2)
        y = stream.standard_normal(6)
        expected = _normal_equations_mpmath(a, y)
        assert np.allclose(least_squares(a, y), expected, rtol=1e-10, atol=1e-12)

    def test_rank_deficient_raises(self):
        a = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])  # duplicate direction
        with pytest.raises(SingularMatrixError):
            least_squares(a, [1.0, 2.0, 3.0])

    def test_wide_system_rejected(self):
        with pytest.raises(ValueError):
            least_squares(np.ones((2, 3)), [1.0, 2.0])

    def test_residual_orthogonality_property(self):
        # residual must be orthogonal to every column, within 1e-9 * |A| * |y|
        for trial in range(20):
            stream = RandomStream(500 + trial, ("resid",))
            rows = 4 + trial % 5
            cols = 1 + trial % 3
            a = stream.standard_normal(rows * cols).reshape(rows, cols)
            y = stream.standard_normal(rows)
            res = y - a @ least_squares(a, y)
            bound = 1e-9 * np.linalg.norm(a) * np.linalg.norm(y)
            assert np.max(np.abs(a.T @ res)) <= bound


def _symmetric_3x3_eigs(g: np.ndarray) -> tuple[float, float]:
    """Independent oracle: trigonometric roots of det(G - lambda I) = 0."""
    q = np.trace(g) / 3.0
    p1 = g[0, 1] ** 2 + g[0, 2] ** 2 + g[1, 2] ** 2
    p2 = sum((g[i, i] - q) ** 2 for i in range(3)) + 2.0 * p1
    if p2 == 0.0:
        return q, q
    p = math.sqrt(p2 / 6.0)
    b = (g - q * np.eye(3)) / p
    det_b = (
        b[0, 0] * (b[1, 1] * b[2, 2] - b[1, 2] * b[2, 1])
        - b[0, 1] * (b[1, 0] * b[2, 2] - b[1, 2] * b[2, 0])
        + b[0, 2] * (b[1, 0] * b[2, 1] - b[1, 1] * b[2, 0])
    )
    phi = math.acos(min(1.0, max(-1.0, det_b / 2.0))) / 3.0
    hi = q + 2.0 * p * math.cos(phi)
    lo = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    return lo, hi


class TestExtremeEigenSym:
    def test_scaled_identity(self):
        lo, hi = extreme_eigen_sym(2.0 * np.eye(3))
        assert lo == pytest.approx(2.0, rel=1e-12)
        assert hi == pytest.approx(2.0, rel=1e-12)

    def test_known_2x2(self):
        lo, hi = extreme_eigen_sym(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert lo == pytest.approx(1.0, rel=1e-9)
        assert hi == pytest.approx(3.0, rel=1e-9)

    def test_random_gram_matches_cubic_roots(self):
        stream = RandomStream(3, ("gram",))
        a = stream.standard_normal(24).reshape(8, 3)
        g = a.T @ a
        lo, hi = extreme_eigen_sym(g)
        lo_ref, hi_ref = _symmetric_3x3_eigs(g)
        assert lo == pytest.approx(lo_ref, rel=1e-9, abs=1e-9)
        assert hi == pytest.approx(hi_ref, rel=1e-9)

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError, match="symmetric"):
            extreme_eigen_sym(np.array([[1.0, 1e-6], [0.0, 1.0]]))

    def test_rayleigh_quotient_bracket(self):
        stream = RandomStream(9, ("rayleigh",))
        a = stream.standard_normal(40).reshape(10, 4)
        g = a.T @ a
        lo, hi = extreme_eigen_sym(g)
        for _ in range(100):
            v = stream.standard_normal(4)
            v /= np.linalg.norm(v)
            quot = float(v @ g @ v)
            assert lo - 1e-9 <= quot <= hi + 1e-9

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            extreme_eigen_sym(np.ones((2, 3)))


class TestRandomStream:
    def test_identical_identity_reproduces_sequence(self):
        s1 = RandomStream(123, ("exp", 7))
        s2 = RandomStream(123, ("exp", 7))
        assert np.array_equal(s1.uniform01(64), s2.uniform01(64))
        assert np.array_equal(s1.standard_normal(33), s2.standard_normal(33))

    def test_distinct_ids_differ(self):
        a = RandomStream(123, ("exp", 7)).uniform01(32)
        b = RandomStream(123, ("exp", 8)).uniform01(32)
        c = RandomStream(124, ("exp", 7)).uniform01(32)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_int_and_string_ids_disjoint(self):
        a = RandomStream(1, (5,)).uniform01(16)
        b = RandomStream(1, ("5",)).uniform01(16)
        assert not np.array_equal(a, b)

    def test_child_matches_explicit_id(self):
        parent = RandomStream(77, ("run",))
        child = parent.child("trial", 3)
        explicit = RandomStream(77, ("run", "trial", 3))
        assert np.array_equal(child.uniform01(16), explicit.uniform01(16))

    def test_empty_draws(self):
        s = RandomStream(0)
        assert draw_uniform01(s, 0).shape == (0,)
        assert draw_standard_normal(s, 0).shape == (0,)

    def test_normal_moments_large_sample(self):
        z = RandomStream(2024, ("moments",)).standard_normal(1_000_000)
        assert abs(z.mean()) < 5.0 / math.sqrt(1_000_000)
        assert abs(z.var() - 1.0) < 0.01

    def test_uniform_range(self):
        u = RandomStream(5).uniform01(10_000)
        assert u.min() >= 0.0 and u.max() < 1.0

    def test_integers_in_range_and_deterministic(self):
        s1 = RandomStream(6, ("ints",))
        s2 = RandomStream(6, ("ints",))
        a = s1.integers(5000, 17)
        assert np.array_equal(a, s2.integers(5000, 17))
        assert a.min() >= 0 and a.max() <= 16
        assert set(np.unique(a)) == set(range(17))  # all values reachable

    def test_bad_seed_rejected(self):
        with pytest.raises(ValueError):
            RandomStream(-1)
        with pytest.raises(ValueError):
            RandomStream(2**64)

    def test_bad_stream_id_rejected(self):
        with pytest.raises(ValueError):
            RandomStream(0, (-3,))
        with pytest.raises(TypeError):
            RandomStream(0, (1.5,))

    def test_key_roundtrip(self):
        s = RandomStream(9, ("a", 1))
        master, sid = s.key()
        replay = RandomStream(master, sid)
        assert np.array_equal(s.uniform01(8), replay.uniform01(8))
