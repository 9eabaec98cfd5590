"""Linear-algebra kernel tests: frozen examples plus seeded property sweeps."""

import numpy as np
import pytest

from cogia.errors import NoComplement, RankDeficient
from cogia.numerics import (
    DEFAULT_POLICY,
    TolerancePolicy,
    min_norm_right_solve,
    null_space_basis,
    orth_complement_vector,
    svd_factor,
)

RNG = np.random.default_rng(20240811)


def random_shapes(n, max_dim=16):
    rng = np.random.default_rng(7)
    return [(int(rng.integers(1, max_dim + 1)), int(rng.integers(1, max_dim + 1))) for _ in range(n)]


class TestTolerancePolicy:
    def test_defaults(self):
        assert DEFAULT_POLICY.rank_tol == 1e-9
        assert DEFAULT_POLICY.zero_tol == 1e-9

    @pytest.mark.parametrize("bad", [0.0, 1.0, -1e-3, 2.0])
    def test_rejects_out_of_range(self, bad):
        with pytest.raises(ValueError):
            TolerancePolicy(rank_tol=bad)
        with pytest.raises(ValueError):
            TolerancePolicy(zero_tol=bad)


class TestNullSpaceBasis:
    def test_coordinate_null_space(self):
        B = null_space_basis(np.array([[1.0, 0.0, 0.0]]))
        assert B.shape == (3, 2)
        # spans {e2, e3}: projector equals diag(0, 1, 1)
        np.testing.assert_allclose(B @ B.T, np.diag([0.0, 1.0, 1.0]), atol=1e-12)

    def test_full_rank_has_trivial_null_space(self):
        assert null_space_basis(np.eye(3)).shape == (3, 0)

    def test_seeded_wide_matrix(self):
        A = np.random.default_rng(3).standard_normal((2, 4))
        B = null_space_basis(A)
        assert B.shape == (4, 2)
        assert np.linalg.norm(A @ B) < 1e-10
        np.testing.assert_allclose(B.T @ B, np.eye(2), atol=1e-12)

    def test_zero_rows_spans_everything(self):
        B = null_space_basis(np.zeros((0, 4)))
        np.testing.assert_array_equal(B, np.eye(4))

    def test_sign_convention(self):
        B = null_space_basis(np.array([[1.0, 0.0, 0.0]]))
        for j in range(B.shape[1]):
            col = B[:, j]
            assert col[np.flatnonzero(col)[0]] > 0

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            null_space_basis(np.array([[np.nan, 1.0]]))


class TestOrthComplement:
    def test_plane_complement(self):
        u = orth_complement_vector(np.array([[1.0, 0.0]]))
        np.testing.assert_allclose(u, [0.0, 1.0], atol=1e-15)

    def test_full_space_has_no_complement(self):
        with pytest.raises(NoComplement):
            orth_complement_vector(np.eye(2))

    def test_seeded_residual(self):
        S = np.random.default_rng(11).standard_normal((3, 5))
        u = orth_complement_vector(S)
        assert abs(np.linalg.norm(u) - 1.0) < 1e-12
        assert np.linalg.norm(S @ u) < 1e-10


class TestMinNormRightSolve:
    def test_invertible_square(self):
        x = min_norm_right_solve(np.diag([2.0, 2.0]), np.array([2.0, 4.0]))
        np.testing.assert_allclose(x, [1.0, 2.0], atol=1e-12)

    def test_min_norm_picks_no_null_component(self):
        x = min_norm_right_solve(np.array([[1.0, 0.0, 0.0]]), np.array([5.0]))
        np.testing.assert_allclose(x, [5.0, 0.0, 0.0], atol=1e-12)

    def test_seeded_oracle_pinv(self):
        rng = np.random.default_rng(5)
        A = rng.standard_normal((3, 5))
        b = rng.standard_normal(3)
        x = min_norm_right_solve(A, b)
        assert np.linalg.norm(A @ x - b) < 1e-10
        # oracle: SVD pseudo-inverse
        np.testing.assert_allclose(x, np.linalg.pinv(A) @ b, atol=1e-10)
        # x orthogonal to the null space of A
        N = null_space_basis(A)
        assert np.linalg.norm(N.T @ x) < 1e-10

    def test_rank_deficient_raises(self):
        A = np.array([[1.0, 2.0, 0.0], [2.0, 4.0, 0.0]])  # second row dependent
        with pytest.raises(RankDeficient):
            min_norm_right_solve(A, np.array([1.0, 1.0]))

    def test_tall_matrix_raises(self):
        with pytest.raises(RankDeficient):
            min_norm_right_solve(np.ones((3, 2)), np.ones(3))

    def test_matrix_rhs(self):
        rng = np.random.default_rng(6)
        A = rng.standard_normal((2, 4))
        B = rng.standard_normal((2, 3))
        X = min_norm_right_solve(A, B)
        assert np.linalg.norm(A @ X - B) < 1e-10


class TestSvdFactor:
    def test_diagonal(self):
        _, g, _ = svd_factor(np.diag([3.0, 1.0]))
        np.testing.assert_allclose(g, [3.0, 1.0], atol=1e-14)

    def test_zero_matrix(self):
        _, g, _ = svd_factor(np.zeros((2, 2)))
        np.testing.assert_allclose(g, [0.0, 0.0])

    def test_seeded_reconstruction(self):
        A = np.random.default_rng(17).standard_normal((4, 3))
        phi, g, psi = svd_factor(A)
        assert np.linalg.norm(A - phi @ np.diag(g) @ psi.T) < 1e-10
        assert np.all(np.diff(g) <= 0) and np.all(g >= 0)
        np.testing.assert_allclose(phi.T @ phi, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(psi.T @ psi, np.eye(3), atol=1e-12)

    def test_left_factor_sign_convention(self):
        phi, _, _ = svd_factor(np.random.default_rng(19).standard_normal((5, 4)))
        for j in range(phi.shape[1]):
            col = phi[:, j]
            assert col[np.flatnonzero(col)[0]] > 0


class TestKernelProperties:
    """Spec invariants on 100 seeded matrices of mixed shapes."""

    def test_rank_nullity_and_annihilation(self):
        for idx, (m, n) in enumerate(random_shapes(100)):
            A = np.random.default_rng(100 + idx).standard_normal((m, n))
            B = null_space_basis(A)
            s = np.linalg.svd(A, compute_uv=False)
            rank = int(np.count_nonzero(s > DEFAULT_POLICY.rank_tol * s[0])) if s[0] > 0 else 0
            assert rank + B.shape[1] == n
            if B.shape[1]:
                assert np.linalg.norm(A @ B) <= 1e-10 * max(1.0, np.linalg.norm(A))
                np.testing.assert_allclose(B.T @ B, np.eye(B.shape[1]), atol=1e-10)

    def test_min_norm_beats_shifted_solutions(self):
        rng = np.random.default_rng(1234)
        for idx in range(30):
            m = int(rng.integers(1, 5))
            n = int(rng.integers(m + 1, m + 6))
            A = np.random.default_rng(500 + idx).standard_normal((m, n))
            b = np.random.default_rng(900 + idx).standard_normal(m)
            x = min_norm_right_solve(A, b)
            N = null_space_basis(A)
            for t in (-2.0, -0.5, 0.5, 2.0):
                shifted = x + t * N[:, 0]
                assert np.linalg.norm(x) <= np.linalg.norm(shifted) + 1e-12

    def test_determinism_bit_identical(self):
        A = np.random.default_rng(77).standard_normal((6, 9))
        b = np.random.default_rng(78).standard_normal(6)
        assert np.array_equal(null_space_basis(A), null_space_basis(A.copy()))
        assert np.array_equal(min_norm_right_solve(A, b), min_norm_right_solve(A.copy(), b.copy()))
        p1, g1, s1 = svd_factor(A)
        p2, g2, s2 = svd_factor(A.copy())
        assert np.array_equal(p1, p2) and np.array_equal(g1, g2) and np.array_equal(s1, s2)
