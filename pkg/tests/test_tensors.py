import json
import math

import numpy as np
import pytest

from thetanorm.tensors import (
    DenseTensor,
    Dims,
    frobenius,
    matricize,
    meet_join,
    random_low_rank,
    svd_nuclear,
    tensor_from_json,
    tensor_to_json,
)

SQRT2 = math.sqrt(2.0)

# Five small 2x2x2 instances with known unfolding nuclear norms, stored in
# vectorization order (last index fastest).
REFERENCE_222 = {
    1: [1, 0, 0, 0, 0, 0, 0, 1],
    2: [1, 0, 0, 0, 0, 0, 1, 0],
    3: [1, 0, 0, 0, 0, 1, 0, 0],
    4: [1, 0, 0, 1, 0, 0, 0, 0],
    5: [1, 0, 0, 1, 0, 0, 1, 0],
}
REFERENCE_222_UNFOLDING_NUCLEAR = {
    1: (2.0, 2.0, 2.0),
    2: (2.0, 2.0, SQRT2),
    3: (2.0, SQRT2, 2.0),
    4: (SQRT2, 2.0, 2.0),
    5: (SQRT2 + 1, SQRT2 + 1, SQRT2 + 1),
}


def reference_tensor(i: int) -> DenseTensor:
    return DenseTensor(Dims((2, 2, 2)), REFERENCE_222[i])


def jacobi_eigenvalues(A: np.ndarray, sweeps: int = 60) -> np.ndarray:
    """Cyclic Jacobi eigenvalue iteration for a symmetric matrix (test oracle)."""
    A = np.array(A, dtype=float)
    n = A.shape[0]
    for _ in range(sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off = max(off, abs(A[p, q]))
                if abs(A[p, q]) < 1e-15:
                    continue
                theta = 0.5 * math.atan2(2 * A[p, q], A[q, q] - A[p, p])
                c, s = math.cos(theta), math.sin(theta)
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                A = rot.T @ A @ rot
        if off < 1e-15:
            break
    return np.sort(np.diag(A))


class TestDims:
    def test_invariants(self):
        with pytest.raises(ValueError):
            Dims((3,))
        with pytest.raises(ValueError):
            Dims((2, 0))
        assert Dims((2, 3, 4)).size == 24
        assert Dims((2, 3, 4)).strides == (12, 4, 1)

    def test_flat_index_roundtrip(self):
        dims = Dims((2, 3, 4))
        for p, alpha in enumerate(dims.indices()):
            assert dims.flat_index(alpha) == p
            assert dims.multi_index(p) == alpha

    def test_last_index_fastest(self):
        dims = Dims((2, 2, 2))
        assert dims.flat_index((1, 1, 1)) == 0
        assert dims.flat_index((1, 1, 2)) == 1
        assert dims.flat_index((2, 2, 2)) == 7


class TestMeetJoin:
    def test_worked_order4_pair(self):
        lo, hi = meet_join((1, 2, 1, 2), (2, 1, 2, 3))
        assert lo == (1, 1, 1, 2)
        assert hi == (2, 2, 2, 3)

    def test_idempotent(self):
        a = (2, 1, 3)
        assert meet_join(a, a) == (a, a)

    def test_matrix_pair(self):
        assert meet_join((1, 2), (2, 1)) == ((1, 1), (2, 2))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            meet_join((1, 2), (1, 2, 3))


class TestMatricize:
    def test_rank_one_unfolding_is_rank_one(self):
        rng = np.random.default_rng(0)
        u, v, w = rng.standard_normal(2), rng.standard_normal(3), rng.standard_normal(4)
        X = DenseTensor.from_array(np.einsum("i,j,k->ijk", u, v, w))
        M = matricize(X, [1]).matrix
        assert M.shape == (2, 12)
        np.testing.assert_allclose(M, np.outer(u, np.kron(v, w)), atol=1e-14)
        s = np.linalg.svd(M, compute_uv=False)
        assert s[1] < 1e-12 * s[0]

    def test_entry_identity_brute_force(self):
        # Enumerate the index bijection directly for every mode subset.
        dims = Dims((2, 3, 2))
        rng = np.random.default_rng(1)
        X = DenseTensor(dims, rng.standard_normal(dims.size))
        for rows in [(1,), (2,), (3,), (1, 2), (2, 1), (1, 3), (2, 3), (3, 1), (1, 2, 3)]:
            mat = matricize(X, rows)
            row_sizes = [dims.sizes[m - 1] for m in mat.row_modes]
            col_sizes = [dims.sizes[m - 1] for m in mat.col_modes]
            for alpha in dims.indices():
                r = 0
                for m, n in zip(mat.row_modes, row_sizes):
                    r = r * n + (alpha[m - 1] - 1)
                c = 0
                for m, n in zip(mat.col_modes, col_sizes):
                    c = c * n + (alpha[m - 1] - 1)
                assert mat.matrix[r, c] == X.entry(alpha)

    def test_single_nonzero_lands_where_expected(self):
        X = DenseTensor.zeros((2, 2, 2))
        vals = X.values.copy()
        vals[Dims((2, 2, 2)).flat_index((2, 1, 2))] = 1.0
        X = DenseTensor((2, 2, 2), vals)
        M = matricize(X, [2]).matrix
        # 1-based: row 1 (second mode index 1), column 4 (= (i=2,k=2) packed).
        assert M[0, 3] == 1.0
        assert np.count_nonzero(M) == 1

    def test_unfolding_5_nuclear(self):
        M = matricize(reference_tensor(5), [1]).matrix
        assert abs(svd_nuclear(M) - (SQRT2 + 1)) < 1e-12

    def test_transpose_complement_identity(self):
        dims = Dims((2, 3, 4))
        X = DenseTensor(dims, np.random.default_rng(2).standard_normal(dims.size))
        np.testing.assert_array_equal(
            matricize(X, [3]).matrix.T, matricize(X, [1, 2]).matrix
        )

    def test_frobenius_preserved(self):
        dims = Dims((3, 2, 2, 2))
        X = DenseTensor(dims, np.random.default_rng(3).standard_normal(dims.size))
        for rows in [(1,), (2, 4), (1, 2, 3), (1, 2, 3, 4)]:
            assert abs(np.linalg.norm(matricize(X, rows).matrix) - frobenius(X)) < 1e-12

    def test_bad_modes(self):
        X = DenseTensor.zeros((2, 2))
        with pytest.raises(ValueError):
            matricize(X, [])
        with pytest.raises(ValueError):
            matricize(X, [3])
        with pytest.raises(ValueError):
            matricize(X, [1, 1])


class TestRandomLowRank:
    def test_rank_one_minors_vanish(self):
        X = random_low_rank((2, 3, 2), 1, seed=7)
        for mode in (1, 2, 3):
            M = matricize(X, [mode]).matrix
            for i in range(M.shape[0]):
                for k in range(i + 1, M.shape[0]):
                    for j in range(M.shape[1]):
                        for l in range(j + 1, M.shape[1]):
                            minor = M[i, j] * M[k, l] - M[i, l] * M[k, j]
                            assert abs(minor) < 1e-12

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_rank_two_unfolding_rank(self, seed):
        X = random_low_rank((3, 4, 2), 2, seed=seed)
        for mode in (1, 2, 3):
            M = matricize(X, [mode]).matrix
            s = np.linalg.svd(M, compute_uv=False)
            expected = min(2, *M.shape)
            assert s[expected - 1] > 1e-10
            if len(s) > expected:
                assert s[expected] < 1e-10 * s[0]

    def test_deterministic(self):
        a = random_low_rank((2, 2, 3), 2, seed=42)
        b = random_low_rank((2, 2, 3), 2, seed=42)
        np.testing.assert_array_equal(a.values, b.values)

    def test_bad_rank(self):
        with pytest.raises(ValueError):
            random_low_rank((2, 2), 0, seed=0)


class TestSvdNuclear:
    def test_identity(self):
        assert abs(svd_nuclear(np.eye(2)) - 2.0) < 1e-14

    def test_reference_instance_2(self):
        X = reference_tensor(2)
        assert abs(svd_nuclear(matricize(X, [1]).matrix) - 2.0) < 1e-12
        assert abs(svd_nuclear(matricize(X, [3]).matrix) - SQRT2) < 1e-12

    def test_against_jacobi_gram_oracle(self):
        M = np.random.default_rng(5).standard_normal((4, 5))
        eigs = jacobi_eigenvalues(M.T @ M)
        oracle = np.sqrt(np.clip(eigs, 0.0, None)).sum()
        assert abs(svd_nuclear(M) - oracle) < 1e-10 * (1 + oracle)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            svd_nuclear(np.array([[1.0, np.nan], [0.0, 1.0]]))


class TestFrobenius:
    def test_zero(self):
        assert frobenius(DenseTensor.zeros((2, 2, 2))) == 0.0

    def test_reference_instance_1(self):
        assert abs(frobenius(reference_tensor(1)) - SQRT2) < 1e-15

    def test_multiplicative_on_rank_one(self):
        rng = np.random.default_rng(6)
        u, v, w = rng.standard_normal(3), rng.standard_normal(2), rng.standard_normal(4)
        X = DenseTensor.from_array(np.einsum("i,j,k->ijk", u, v, w))
        expected = np.linalg.norm(u) * np.linalg.norm(v) * np.linalg.norm(w)
        assert abs(frobenius(X) - expected) < 1e-12


class TestJson:
    def test_roundtrip(self):
        X = random_low_rank((2, 3, 2), 2, seed=11)
        Y = tensor_from_json(tensor_to_json(X))
        assert Y.dims == X.dims
        np.testing.assert_array_equal(Y.values, X.values)

    def test_length_mismatch_rejected(self):
        doc = json.dumps({"dims": [2, 2], "values": [1.0, 2.0, 3.0]})
        with pytest.raises(ValueError):
            tensor_from_json(doc)

    def test_malformed_rejected(self):
        with pytest.raises(ValueError):
            tensor_from_json(json.dumps({"dims": [2, 2]}))
