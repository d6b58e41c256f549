import numpy as np
import pytest

from qstein.errors import BudgetExceeded, InvariantViolation, NotHermitian
from qstein.linalg import (DensityMatrix, check_hermitian, eig_hermitian, kron_power,
                           kron_power_array, kron_sum_power, matrix_function, positive_part_trace,
                           random_density, random_unitary, spectral_projectors, validate_density)


class TestValidation:
    def test_valid_state_has_no_problems(self):
        assert validate_density(np.diag([0.3, 0.7]).astype(complex)) == []

    @pytest.mark.parametrize("matrix, fragment", [
        (np.array([[0.5, 0.1], [0.0, 0.5]]), "Hermitian"),
        (np.diag([1.2, -0.2]), "positive semidefinite"),
        (np.diag([0.5, 0.4]), "unit trace"),
    ])
    def test_each_invariant_reported(self, matrix, fragment):
        problems = validate_density(matrix.astype(complex))
        assert any(fragment in p for p in problems)

    def test_all_problems_collected(self):
        bad = np.array([[1.5, 0.3], [0.0, -0.2]], dtype=complex)
        with pytest.raises(InvariantViolation) as err:
            DensityMatrix(bad)
        assert len(err.value.violations) == 3

    def test_matrix_is_read_only(self):
        d = DensityMatrix.diag([0.5, 0.5])
        with pytest.raises(ValueError):
            d.matrix[0, 0] = 1.0

    def test_check_hermitian_rejects(self):
        with pytest.raises(NotHermitian):
            check_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestSpectral:
    def test_reconstruct(self, rng):
        r = random_density(4, rng)
        s = eig_hermitian(r.matrix)
        assert np.allclose(s.reconstruct(), r.matrix, atol=1e-13)

    def test_matrix_function_sqrt(self, rng):
        r = random_density(3, rng).matrix
        root = matrix_function(r, np.sqrt)
        assert np.allclose(root @ root, r, atol=1e-12)

    def test_positive_part_trace(self):
        assert positive_part_trace(np.diag([2.0, -1.0, 0.5])) == pytest.approx(2.5)

    def test_spectral_projectors_split(self, rng):
        u = random_unitary(3, rng)
        m = u @ np.diag([2.0, 0.0, -1.0]) @ u.conj().T
        p_pos, p_zero, w = spectral_projectors(m, 1e-10)
        assert np.trace(p_pos).real == pytest.approx(1.0)
        assert np.trace(p_zero).real == pytest.approx(1.0)
        assert np.allclose(p_pos @ p_zero, 0, atol=1e-12)
        assert np.allclose(np.sort(w), [-1.0, 0.0, 2.0], atol=1e-12)

    def test_pure_state_eigenvalues_floored(self):
        d = DensityMatrix.pure([1.0, 1.0j])
        assert np.count_nonzero(d.eigenvalues) == 1

    def test_rotated_preserves_spectrum(self, rng):
        d = random_density(3, rng)
        u = random_unitary(3, rng)
        assert np.allclose(np.sort(d.rotated(u).eigenvalues), np.sort(d.eigenvalues), atol=1e-13)


class TestTensorPowers:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_kron_power_trace_and_dim(self, rng, n):
        d = random_density(2, rng)
        k = kron_power(d, n)
        assert k.dim == 2 ** n
        assert np.trace(k.matrix).real == pytest.approx(1.0)

    def test_budget(self):
        with pytest.raises(BudgetExceeded) as err:
            kron_power_array(np.eye(3), 8, max_dim=1000)
        assert err.value.required_dim == 3 ** 8

    def test_kron_sum_power_matches_kron_of_diagonals(self):
        v = np.array([0.1, -0.4, 2.0])
        expect = np.log(np.diag(np.kron(np.kron(np.diag(np.exp(v)), np.diag(np.exp(v))),
                                        np.diag(np.exp(v)))))
        assert np.allclose(kron_sum_power(v, 3), expect)

    def test_random_unitary_is_unitary(self, rng):
        u = random_unitary(5, rng)
        assert np.allclose(u.conj().T @ u, np.eye(5), atol=1e-12)

    @pytest.mark.parametrize("rank", [1, 2, 4])
    def test_random_density_rank(self, rng, rank):
        d = random_density(4, rng, rank=rank)
        assert np.count_nonzero(d.eigenvalues > 1e-12) == rank
