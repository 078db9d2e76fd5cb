"""Ensemble draws, Gram trace, coherence, and RIP tests."""

import math
from itertools import combinations

import numpy as np
import pytest

from snrspread.ensembles import (
    MatrixEnsemble,
    SensingMatrix,
    bernoulli,
    coherence,
    draw_matrix,
    gaussian,
    load_matrix,
    monte_carlo_rip_lower_bound,
    rademacher,
    rip_constant,
    row_orthogonal_scaled,
    save_matrix,
    trace_gram,
    unit_normalize_columns,
)
from snrspread.linalg import RandomStream
from snrspread.signals import BudgetExceededError, sample_support


class TestDrawMatrix:
    def test_gaussian_default_variance(self):
        sm = draw_matrix(gaussian(), 30, 300, RandomStream(7, ("g",)))
        assert sm.matrix.shape == (30, 300)
        assert sm.ensemble.variance == pytest.approx(1.0 / 30.0)
        assert sm.matrix.var() == pytest.approx(1.0 / 30.0, rel=0.10)

    def test_gaussian_explicit_variance(self):
        sm = draw_matrix(gaussian(0.25), 40, 60, RandomStream(8, ("g",)))
        assert sm.matrix.var() == pytest.approx(0.25, rel=0.10)

    def test_bernoulli_fraction(self):
        sm = draw_matrix(bernoulli(0.5), 50, 500, RandomStream(9, ("b",)))
        assert set(np.unique(sm.matrix)) <= {0.0, 1.0}
        assert sm.matrix.mean() == pytest.approx(0.5, abs=0.03)

    def test_rademacher_values(self):
        sm = draw_matrix(rademacher(), 20, 50, RandomStream(10, ("r",)))
        assert set(np.unique(sm.matrix)) == {-1.0, 1.0}
        sm2 = draw_matrix(rademacher(2.5), 20, 50, RandomStream(10, ("r",)))
        assert set(np.unique(sm2.matrix)) == {-2.5, 2.5}

    def test_row_orthogonal_contract(self):
        sm = draw_matrix(row_orthogonal_scaled(), 12, 48, RandomStream(11, ("ro",)))
        norms = np.linalg.norm(sm.matrix, axis=1)
        assert np.allclose(norms, math.sqrt(48 / 12), atol=1e-9)
        gram = sm.matrix @ sm.matrix.T
        assert np.max(np.abs(gram - (48 / 12) * np.eye(12))) <= 1e-9

    def test_row_orthogonal_requires_wide(self):
        with pytest.raises(ValueError):
            draw_matrix(row_orthogonal_scaled(), 5, 3, RandomStream(0))

    def test_invalid_dimensions(self):
        with pytest.raises(ValueError):
            draw_matrix(gaussian(), 0, 5, RandomStream(0))

    def test_determinism(self):
        a = draw_matrix(gaussian(), 6, 9, RandomStream(3, ("d", 1)))
        b = draw_matrix(gaussian(), 6, 9, RandomStream(3, ("d", 1)))
        assert np.array_equal(a.matrix, b.matrix)

    def test_ensemble_validation(self):
        with pytest.raises(ValueError):
            MatrixEnsemble("bernoulli")  # p required
        with pytest.raises(ValueError):
            bernoulli(1.0)
        with pytest.raises(ValueError):
            bernoulli(0.0)
        with pytest.raises(ValueError):
            MatrixEnsemble("gaussian", variance=-1.0)
        with pytest.raises(ValueError):
            MatrixEnsemble("lognormal")


class TestTraceGram:
    def test_identity(self):
        assert trace_gram(SensingMatrix(np.eye(7))) == pytest.approx(7.0)

    def test_row_orthogonal_equals_n(self):
        sm = draw_matrix(row_orthogonal_scaled(), 10, 40, RandomStream(12, ("t",)))
        assert trace_gram(sm) == pytest.approx(40.0, abs=1e-9)

    def test_rademacher_exact(self):
        sm = draw_matrix(rademacher(), 15, 33, RandomStream(13, ("t",)))
        assert trace_gram(sm) == 15 * 33

    def test_gaussian_expectation(self):
        # E{trace} = N at variance 1/M; mean over 200 draws lands within 5%
        stream = RandomStream(14, ("tg",))
        traces = [
            trace_gram(draw_matrix(gaussian(), 20, 60, stream.child(i)))
            for i in range(200)
        ]
        assert np.mean(traces) == pytest.approx(60.0, rel=0.05)


class TestCoherence:
    def test_orthogonal_columns(self):
        assert coherence(SensingMatrix(np.eye(5))) == pytest.approx(0.0, abs=1e-12)

    def test_identical_columns(self):
        mat = np.ones((3, 2))
        assert coherence(SensingMatrix(mat)) == pytest.approx(1.0)

    def test_matches_bruteforce_pairs(self):
        sm = draw_matrix(gaussian(), 4, 8, RandomStream(15, ("coh",)))
        mat = sm.matrix
        best = 0.0
        for i, j in combinations(range(8), 2):
            ci, cj = mat[:, i], mat[:, j]
            val = abs(float(ci @ cj)) / (np.linalg.norm(ci) * np.linalg.norm(cj))
            best = max(best, val)
        assert coherence(sm) == pytest.approx(best, rel=1e-12)

    def test_zero_column_rejected(self):
        mat = np.eye(3)
        mat[:, 1] = 0.0
        with pytest.raises(ValueError, match="zero column"):
            coherence(SensingMatrix(mat))


def _eig2x2(g: np.ndarray) -> tuple[float, float]:
    """Closed-form eigenvalues of a symmetric 2x2 (independent of LAPACK)."""
    a, b, c = g[0, 0], g[0, 1], g[1, 1]
    mid = 0.5 * (a + c)
    half = math.hypot(0.5 * (a - c), b)
    return mid - half, mid + half


class TestRipConstant:
    def test_orthonormal_columns_zero(self):
        assert rip_constant(SensingMatrix(np.eye(6)), 3) == pytest.approx(0.0, abs=1e-12)

    def test_k1_zero_after_normalization(self):
        sm = draw_matrix(gaussian(), 8, 20, RandomStream(16, ("rip",)))
        assert rip_constant(sm, 1) == pytest.approx(0.0, abs=1e-12)

    def test_matches_bruteforce_k2(self):
        sm = draw_matrix(gaussian(), 10, 15, RandomStream(17, ("rip",)))
        mat = sm.matrix / np.linalg.norm(sm.matrix, axis=0)
        best = 0.0
        for i, j in combinations(range(15), 2):
            sub = mat[:, [i, j]]
            lo, hi = _eig2x2(sub.T @ sub)
            best = max(best, 1.0 - lo, hi - 1.0)
        assert rip_constant(sm, 2) == pytest.approx(best, rel=1e-12)

    def test_permutation_invariant(self):
        sm = draw_matrix(gaussian(), 8, 12, RandomStream(18, ("rip",)))
        perm = RandomStream(19, ("perm",)).integers(200, 12)
        order = []
        for idx in perm.tolist():  # build a permutation from the stream
            if idx not in order:
                order.append(idx)
        order += [i for i in range(12) if i not in order]
        shuffled = SensingMatrix(sm.matrix[:, order])
        assert rip_constant(sm, 2) == pytest.approx(rip_constant(shuffled, 2), rel=1e-12)

    def test_budget_exceeded(self):
        sm = draw_matrix(gaussian(), 10, 40, RandomStream(20, ("rip",)))
        with pytest.raises(BudgetExceededError, match="monte_carlo_rip_lower_bound"):
            rip_constant(sm, 8, budget=1000)

    def test_bad_k(self):
        sm = draw_matrix(gaussian(), 4, 10, RandomStream(21, ("rip",)))
        with pytest.raises(ValueError):
            rip_constant(sm, 0)
        with pytest.raises(ValueError):
            rip_constant(sm, 5)  # k > M


class TestMonteCarloRip:
    def test_never_exceeds_exhaustive(self):
        for seed in range(5):
            sm = draw_matrix(gaussian(), 8, 12, RandomStream(seed, ("mc",)))
            full = rip_constant(sm, 2)
            mc = monte_carlo_rip_lower_bound(sm, 2, 40, RandomStream(seed, ("mcs",)))
            assert mc <= full + 1e-12

    def test_exhaustive_coverage_equality(self):
        sm = draw_matrix(gaussian(), 6, 5, RandomStream(30, ("cov",)))
        stream = RandomStream(31, ("covs",))
        n_samples = 600
        sampled = {sample_support(5, 2, stream.child(i)) for i in range(n_samples)}
        assert len(sampled) == 10  # all C(5,2) supports visited
        mc = monte_carlo_rip_lower_bound(sm, 2, n_samples, stream)
        assert mc == pytest.approx(rip_constant(sm, 2), rel=1e-12)

    def test_single_sample(self):
        sm = draw_matrix(gaussian(), 6, 9, RandomStream(32, ("one",)))
        stream = RandomStream(33, ("ones",))
        sup = sample_support(9, 2, stream.child(0))
        mat = sm.matrix / np.linalg.norm(sm.matrix, axis=0)
        sub = mat[:, list(sup)]
        lo, hi = _eig2x2(sub.T @ sub)
        expected = max(1.0 - lo, hi - 1.0)
        assert monte_carlo_rip_lower_bound(sm, 2, 1, stream) == pytest.approx(expected, rel=1e-12)

    def test_monotone_in_sample_count(self):
        sm = draw_matrix(gaussian(), 8, 14, RandomStream(34, ("mono",)))
        stream = RandomStream(35, ("monos",))
        values = [
            monte_carlo_rip_lower_bound(sm, 3, n, stream) for n in (1, 5, 20, 80, 200)
        ]
        assert all(a <= b + 1e-15 for a, b in zip(values, values[1:]))


class TestNormalizeAndPersistence:
    def test_unit_normalize_columns(self):
        sm = draw_matrix(gaussian(), 6, 10, RandomStream(40, ("norm",)))
        normed = unit_normalize_columns(sm)
        assert np.allclose(np.linalg.norm(normed.matrix, axis=0), 1.0, atol=1e-12)

    def test_save_load_roundtrip(self, tmp_path):
        sm = draw_matrix(bernoulli(0.3), 5, 8, RandomStream(41, ("io", 2)))
        csv_path, sidecar = save_matrix(sm, tmp_path / "matrix.csv")
        assert sidecar.exists()
        back = load_matrix(csv_path)
        assert np.array_equal(back.matrix, sm.matrix)
        assert back.ensemble == sm.ensemble
        assert back.seed == (41, ("io", 2))

    def test_roundtrip_full_precision(self, tmp_path):
        sm = draw_matrix(gaussian(), 4, 6, RandomStream(42, ("io",)))
        csv_path, _ = save_matrix(sm, tmp_path / "matrix.csv")
        back = load_matrix(csv_path)
        assert np.array_equal(back.matrix, sm.matrix)  # %.17g round-trips float64

    def test_load_without_sidecar(self, tmp_path):
        path = tmp_path / "bare.csv"
        np.savetxt(path, np.eye(3), fmt="%.17g", delimiter=",")
        back = load_matrix(path)
        assert back.ensemble is None
        assert np.array_equal(back.matrix, np.eye(3))
