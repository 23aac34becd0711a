import numpy as np
import pytest

from qdh.fiveparty import BELL_VECTORS, bell_subprotocol
from qdh.linalg import (
    ContractViolation,
    DimensionError,
    hermitian_eig,
    kron,
    kron_all,
    partial_trace,
    trace_norm,
)
from qdh.protocol import ensemble_state
from conftest import random_density, random_hermitian

X = np.array([[0, 1], [1, 0]])


def test_kron_identity_and_diagonal():
    np.testing.assert_array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    np.testing.assert_array_equal(kron(np.diag([1, 2]), np.diag([3, 4])), np.diag([3, 4, 6, 8]))


def test_kron_entries_by_hand():
    out = kron(np.diag([1, 0]), X)
    assert out[0, 1] == 1
    assert out[2, 3] == 0


def test_kron_index_formula():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(2, 3))
    b = rng.normal(size=(3, 2))
    out = kron(a, b)
    for i, j, k, l in np.ndindex(2, 3, 3, 2):
        assert out[i * 3 + k, j * 2 + l] == a[i, j] * b[k, l]


def test_kron_cap():
    with pytest.raises(DimensionError):
        kron(np.eye(2**7), np.eye(2**8))


def test_kron_associative():
    rng = np.random.default_rng(2)
    for _ in range(10):
        a, b, c = (random_hermitian(rng, 2) for _ in range(3))
        np.testing.assert_allclose(kron(kron(a, b), c), kron(a, kron(b, c)), atol=1e-12)


def test_partial_trace_bell_marginal():
    phi = BELL_VECTORS["phi+"]
    np.testing.assert_allclose(partial_trace(np.outer(phi, phi), [2, 2], [0]), np.eye(2) / 2, atol=1e-12)


def test_partial_trace_product():
    rng = np.random.default_rng(3)
    for _ in range(10):
        a, b = random_hermitian(rng, 2), random_hermitian(rng, 3)
        np.testing.assert_allclose(partial_trace(kron(a, b), [2, 3], [1]), np.trace(a) * b, atol=1e-12)
        np.testing.assert_allclose(partial_trace(kron(a, b), [2, 3], [0]), np.trace(b) * a, atol=1e-12)


def test_partial_trace_preserves_trace():
    rng = np.random.default_rng(4)
    rho = random_density(rng, 12)
    for keep in ([0], [1], [2], [0, 2], []):
        out = partial_trace(rho, [2, 3, 2], keep)
        assert abs(np.trace(out) - 1) <= 1e-12


def test_partial_trace_dims_mismatch():
    with pytest.raises(DimensionError):
        partial_trace(np.eye(6), [2, 2], [0])


def test_eig_diagonal_and_pauli():
    vals, _ = hermitian_eig(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(vals, [3, 2, 1], atol=1e-12)
    vals, vecs = hermitian_eig(X)
    np.testing.assert_allclose(vals, [1, -1], atol=1e-12)
    plus = np.array([1, 1]) / np.sqrt(2)
    minus = np.array([1, -1]) / np.sqrt(2)
    assert abs(abs(np.vdot(plus, vecs[:, 0])) - 1) < 1e-12
    assert abs(abs(np.vdot(minus, vecs[:, 1])) - 1) < 1e-12


def test_eig_rejects_non_hermitian():
    with pytest.raises(ContractViolation):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


@pytest.mark.parametrize("d", [1, 2, 5, 16, 33, 64])
def test_eig_reconstruction_against_numpy(d):
    rng = np.random.default_rng(d)
    m = random_hermitian(rng, d)
    vals, vecs = hermitian_eig(m)
    assert np.all(np.diff(vals) <= 1e-12)
    np.testing.assert_allclose(vals, np.linalg.eigvalsh(m)[::-1], atol=1e-9)
    assert np.linalg.norm(vecs @ np.diag(vals) @ vecs.conj().T - m) <= 1e-9
    np.testing.assert_allclose(vecs.conj().T @ vecs, np.eye(d), atol=1e-9)
    np.testing.assert_allclose(m @ vecs, vecs * vals, atol=1e-9)


def test_eig_degenerate_spectrum():
    rng = np.random.default_rng(5)
    q, _ = np.linalg.qr(rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8)))
    m = q @ np.diag([1, 1, 1, 0, 0, 0, -2, -2]) @ q.conj().T
    vals, vecs = hermitian_eig((m + m.conj().T) / 2)
    np.testing.assert_allclose(vals, [1, 1, 1, 0, 0, 0, -2, -2], atol=1e-9)
    np.testing.assert_allclose(vecs.conj().T @ vecs, np.eye(8), atol=1e-9)


def test_receiver_ensemble_spectrum(scheme):
    """Uniform weight 1/16 on a 16-dim support of the 32-dim receiver space."""
    vals, _ = hermitian_eig(ensemble_state(scheme, 0).matrix)
    assert vals.size == 32
    np.testing.assert_allclose(vals[:16], 1 / 16, atol=1e-9)
    np.testing.assert_allclose(vals[16:], 0, atol=1e-9)
    np.testing.assert_allclose(np.sort(vals), np.sort(np.linalg.eigvalsh(ensemble_state(scheme, 0).matrix)), atol=1e-9)


def test_trace_norm_examples():
    assert abs(trace_norm(np.diag([1.0, -1.0])) - 2) < 1e-12
    assert trace_norm(np.zeros((3, 3))) == 0
    r0, r1 = bell_subprotocol().mixtures
    assert abs(trace_norm(r0.matrix - r1.matrix) - 2) < 1e-12


def test_trace_norm_triangle():
    rng = np.random.default_rng(6)
    for _ in range(20):
        a, b = random_hermitian(rng, 6), random_hermitian(rng, 6)
        assert trace_norm(a + b) <= trace_norm(a) + trace_norm(b) + 1e-9


def test_kron_all_vectors():
    v = kron_all(np.array([1, 0]), np.array([0, 1]), np.array([1, 0]))
    assert np.argmax(v) == 2
