import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floral.kernel import GramMatrix, KernelSpec, cross_gram, gram, gram_matvec, kernel_eval, signed_gram


class TestKernelEval:
    def test_self_similarity_is_one(self):
        x = np.array([0.3, -1.2, 4.0])
        assert kernel_eval(KernelSpec(gamma=1.0), x, x) == 1.0

    def test_unit_distance(self):
        v = kernel_eval(KernelSpec(gamma=1.0), np.array([0.0, 0.0]), np.array([1.0, 0.0]))
        assert v == pytest.approx(math.exp(-1.0), abs=1e-12)

    def test_gamma_scales_distance(self):
        v = kernel_eval(KernelSpec(gamma=0.5), np.array([1.0, 1.0]), np.array([3.0, 1.0]))
        assert v == pytest.approx(math.exp(-2.0), abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            kernel_eval(KernelSpec(gamma=1.0), np.zeros(2), np.zeros(3))

    def test_gamma_must_be_positive(self):
        with pytest.raises(ValueError):
            KernelSpec(gamma=0.0)


class TestGram:
    def test_single_point(self):
        K = gram(KernelSpec(gamma=2.0), np.array([[1.0, 2.0]]))
        assert K.entries.shape == (1, 1)
        assert K.entries[0, 0] == 1.0

    def test_identical_points(self):
        K = gram(KernelSpec(gamma=1.0), np.array([[1.0, 2.0], [1.0, 2.0]]))
        assert (K.entries == 1.0).all()

    def test_matches_elementwise_kernel_eval(self, rng):
        spec = KernelSpec(gamma=0.7)
        X = rng.normal(0, 1, (5, 3))
        K = gram(spec, X)
        for i in range(5):
            for j in range(5):
                assert K.entries[i, j] == kernel_eval(spec, X[i], X[j])

    def test_exact_symmetry_and_unit_diagonal(self, rng):
        K = gram(KernelSpec(gamma=1.3), rng.normal(0, 2, (40, 4)))
        assert np.array_equal(K.entries, K.entries.T)
        assert (np.diag(K.entries) == 1.0).all()
        assert (K.entries > 0).all() and (K.entries <= 1.0).all()

    def test_rejects_asymmetric_entries(self):
        bad = np.array([[1.0, 0.5], [0.4, 1.0]])
        with pytest.raises(ValueError, match="symmetric"):
            GramMatrix(entries=bad, spec=KernelSpec(gamma=1.0))


class TestSignedGram:
    def test_all_positive_labels_is_identity_on_gram(self, rng):
        K = gram(KernelSpec(gamma=1.0), rng.normal(0, 1, (6, 2)))
        assert np.array_equal(signed_gram(K, np.ones(6, dtype=int)), K.entries)

    def test_two_point_sign_algebra(self):
        K = gram(KernelSpec(gamma=1.0), np.array([[0.0, 0.0], [1.0, 0.0]]))
        a = K.entries[0, 1]
        out = signed_gram(K, np.array([1, -1]))
        assert out[0, 0] == 1.0 and out[1, 1] == 1.0
        assert out[0, 1] == -a and out[1, 0] == -a

    def test_matches_triple_loop(self, rng):
        K = gram(KernelSpec(gamma=0.9), rng.normal(0, 1, (6, 3)))
        y = rng.choice([-1, 1], 6)
        out = signed_gram(K, y)
        for i in range(6):
            for j in range(6):
                assert out[i, j] == y[i] * y[j] * K.entries[i, j]

    def test_global_flip_invariance(self, rng):
        K = gram(KernelSpec(gamma=1.0), rng.normal(0, 1, (8, 2)))
        y = rng.choice([-1, 1], 8)
        assert np.array_equal(signed_gram(K, y), signed_gram(K, -y))

    def test_positive_semidefinite(self, rng):
        K = gram(KernelSpec(gamma=1.0), rng.normal(0, 1, (12, 3)))
        y = rng.choice([-1, 1], 12)
        eigs = np.linalg.eigvalsh(signed_gram(K, y))
        assert eigs.min() >= -1e-8

    def test_length_mismatch(self, rng):
        K = gram(KernelSpec(gamma=1.0), rng.normal(0, 1, (4, 2)))
        with pytest.raises(ValueError, match="does not match"):
            signed_gram(K, np.ones(5, dtype=int))


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=2, max_value=20), st.integers(min_value=0, max_value=10**6))
def test_gram_symmetry_property(n, seed):
    X = np.random.default_rng(seed).normal(0, 1.5, (n, 2))
    K = gram(KernelSpec(gamma=0.8), X)
    assert np.array_equal(K.entries, K.entries.T)


def test_streaming_matvec_matches_dense(rng):
    spec = KernelSpec(gamma=0.6)
    X = rng.normal(0, 1, (37, 3))
    v = rng.normal(0, 1, 37)
    dense = gram(spec, X).entries @ v
    for block in (1, 5, 37, 64):
        assert np.abs(gram_matvec(spec, X, v, block_rows=block) - dense).max() <= 1e-9


def test_cross_gram_matches_kernel_eval(rng):
    spec = KernelSpec(gamma=1.1)
    A, B = rng.normal(0, 1, (3, 2)), rng.normal(0, 1, (4, 2))
    out = cross_gram(spec, A, B)
    for i in range(3):
        for j in range(4):
            assert out[i, j] == kernel_eval(spec, A[i], B[j])
