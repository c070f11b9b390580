import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqcap.errors import ArgumentError, ValidationError
from cqcap.operators import (
    ResolutionOfIdentity,
    density_violations,
    gen_inv_sqrt,
    partial_trace,
    quantum_relative_entropy,
    spectral_decompose,
    support_projector,
    tensor_product,
    von_neumann_entropy,
)
from cqcap.random_states import random_density, random_unitary
from oracles import relative_entropy_logm

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_hermitian(d, rng):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (g + g.conj().T) / 2


class TestSpectralDecompose:
    def test_identity(self):
        dec = spectral_decompose(np.eye(2))
        assert np.allclose(dec.values, [1, 1])

    def test_diagonal_sorted_descending(self):
        dec = spectral_decompose(np.diag([0.3, 0.7]))
        assert np.allclose(dec.values, [0.7, 0.3])
        assert np.allclose(np.abs(dec.vectors), [[0, 1], [1, 0]])

    def test_flip(self):
        dec = spectral_decompose(np.array([[0, 1], [1, 0]]))
        assert np.allclose(dec.values, [1, -1])

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValidationError, match="asymmetry"):
            spectral_decompose(np.array([[0, 1], [0.5, 0]]))

    @settings(max_examples=50, deadline=None)
    @given(seeds, st.integers(1, 6))
    def test_round_trip(self, seed, d):
        rng = np.random.default_rng(seed)
        h = random_hermitian(d, rng)
        dec = spectral_decompose(h)
        assert np.max(np.abs(dec.reconstruct() - h)) <= 1e-9
        gram = dec.vectors.conj().T @ dec.vectors
        assert np.max(np.abs(gram - np.eye(d))) <= 1e-9
        assert np.all(np.diff(dec.values) <= 0)

    def test_reproducible(self, rng):
        h = random_hermitian(4, rng)
        a, b = spectral_decompose(h), spectral_decompose(h.copy())
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.vectors, b.vectors)


class TestTensorAndPartialTrace:
    def test_identity(self):
        assert np.allclose(tensor_product([np.eye(2), np.eye(2)]), np.eye(4))

    def test_diagonal_ordering(self):
        a, b, c, d = 2.0, 3.0, 5.0, 7.0
        out = tensor_product([np.diag([a, b]), np.diag([c, d])])
        assert np.allclose(np.diag(out), [a * c, a * d, b * c, b * d])

    def test_trace_multiplicative(self, rng):
        A = rng.normal(size=(3, 3))
        B = rng.normal(size=(2, 2))
        assert np.isclose(np.trace(tensor_product([A, B])), np.trace(A) * np.trace(B))

    def test_empty(self):
        with pytest.raises(ArgumentError):
            tensor_product([])

    def test_product_state(self, rng):
        A, B = random_density(2, rng), random_density(3, rng)
        assert np.allclose(partial_trace(np.kron(A, B), 2, (2, 3)), A)
        assert np.allclose(partial_trace(np.kron(A, B), 1, (2, 3)), B)

    def test_maximally_entangled(self):
        psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
        rho = np.outer(psi, psi)
        for which in (1, 2):
            assert np.allclose(partial_trace(rho, which, (2, 2)), np.eye(2) / 2)

    def test_trace_preserved(self, rng):
        S = random_density(6, rng)
        assert np.isclose(np.trace(partial_trace(S, 1, (2, 3))), np.trace(S))
        assert np.isclose(np.trace(partial_trace(S, 2, (2, 3))), np.trace(S))

    def test_dimension_mismatch(self):
        with pytest.raises(ArgumentError):
            partial_trace(np.eye(5), 1, (2, 3))


class TestEntropy:
    def test_maximally_mixed(self):
        assert von_neumann_entropy(np.eye(2) / 2) == pytest.approx(1.0, abs=1e-12)

    def test_pure(self, rng):
        psi = rng.normal(size=3) + 1j * rng.normal(size=3)
        psi /= np.linalg.norm(psi)
        assert von_neumann_entropy(np.outer(psi, psi.conj())) == pytest.approx(0.0, abs=1e-12)

    def test_quarter(self):
        # -0.25 log2 0.25 - 0.75 log2 0.75
        assert von_neumann_entropy(np.diag([0.25, 0.75])) == pytest.approx(0.8112781244591328, abs=1e-12)

    def test_invalid(self):
        with pytest.raises(ValidationError):
            von_neumann_entropy(np.diag([0.5, 0.4]))

    @settings(max_examples=50, deadline=None)
    @given(seeds, st.integers(1, 5))
    def test_bounds(self, seed, d):
        rng = np.random.default_rng(seed)
        h = von_neumann_entropy(random_density(d, rng, int(rng.integers(1, d + 1))))
        assert -1e-9 <= h <= np.log2(d) + 1e-9

    @settings(max_examples=40, deadline=None)
    @given(seeds)
    def test_additive_on_products(self, seed):
        rng = np.random.default_rng(seed)
        S, T = random_density(2, rng), random_density(3, rng)
        assert von_neumann_entropy(np.kron(S, T)) == pytest.approx(
            von_neumann_entropy(S) + von_neumann_entropy(T), abs=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(seeds, st.integers(1, 3), st.integers(1, 3))
    def test_subadditive(self, seed, d1, d2):
        rng = np.random.default_rng(seed)
        S = random_density(d1 * d2, rng, int(rng.integers(1, d1 * d2 + 1)))
        h1 = von_neumann_entropy(partial_trace(S, 2, (d1, d2)))
        h2 = von_neumann_entropy(partial_trace(S, 1, (d1, d2)))
        assert von_neumann_entropy(S) <= h1 + h2 + 1e-9


class TestRelativeEntropy:
    def test_self(self, rng):
        S = random_density(3, rng)
        assert quantum_relative_entropy(S, S) == pytest.approx(0.0, abs=1e-10)

    def test_pure_vs_mixed(self):
        assert quantum_relative_entropy(np.diag([1.0, 0.0]), np.eye(2) / 2) == pytest.approx(1.0, abs=1e-12)

    def test_quarter(self):
        # 1 - h2(0.25)
        assert quantum_relative_entropy(np.diag([0.25, 0.75]), np.eye(2) / 2) == pytest.approx(
            0.18872187554086717, abs=1e-12)

    def test_support_violation(self):
        assert quantum_relative_entropy(np.eye(2) / 2, np.diag([1.0, 0.0])) == np.inf

    def test_dimension_mismatch(self):
        with pytest.raises(ArgumentError):
            quantum_relative_entropy(np.eye(2) / 2, np.eye(3) / 3)

    def test_matches_logm(self, rng):
        for _ in range(10):
            S, T = random_density(3, rng), random_density(3, rng)
            assert quantum_relative_entropy(S, T) == pytest.approx(relative_entropy_logm(S, T), abs=1e-8)


class TestGenInvSqrt:
    def test_identity(self):
        assert np.allclose(gen_inv_sqrt(np.eye(3)), np.eye(3))

    def test_kernel(self):
        assert np.allclose(gen_inv_sqrt(np.diag([4.0, 0.0])), np.diag([0.5, 0.0]))

    def test_support_identity(self, rng):
        X = random_density(4, rng, rank=2)
        R = gen_inv_sqrt(X)
        assert np.allclose(R @ X @ R, support_projector(X), atol=1e-9)

    def test_projector_fixed(self, rng):
        U = random_unitary(4, rng)
        P = U[:, :2] @ U[:, :2].conj().T
        assert np.allclose(gen_inv_sqrt(gen_inv_sqrt(P)), P, atol=1e-9)

    def test_negative(self):
        with pytest.raises(ValidationError):
            gen_inv_sqrt(np.diag([1.0, -0.1]))


class TestValidation:
    def test_lists_all_problems(self):
        problems = density_violations(np.array([[0.5, 0.2], [0.0, -0.05]]))
        assert len(problems) == 3

    def test_resolution_of_identity(self):
        povm = ResolutionOfIdentity((np.diag([1.0, 0.0]), np.diag([0.0, 0.5])))
        assert not povm.is_complete()
        assert np.allclose(povm.completion(), np.diag([0.0, 0.5]))
        with pytest.raises(ValidationError):
            ResolutionOfIdentity((np.eye(2), np.diag([0.0, 0.5])))
