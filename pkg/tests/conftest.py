"""Shared fixtures and dense reference implementations.

The dense helpers rebuild everything from Pauli matrices and full
2^n-dimensional vectors, independently of the package's even-sector
indexing, so the fast paths are checked against first principles.
"""

from functools import reduce

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")

I2 = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)


def kron_chain(mats):
    return reduce(np.kron, mats)


def dense_majorana(k: int, n: int) -> np.ndarray:
    """Jordan-Wigner generator k on the full 2^n space, qubit 1 leftmost."""
    m = (k + 1) // 2
    head = PAULI_X if k % 2 == 1 else PAULI_Y
    return kron_chain([PAULI_Z] * (m - 1) + [head] + [I2] * (n - m))


def dense_state(state) -> np.ndarray:
    """Embed an even-sector state into the full 2^n vector by label."""
    full = np.zeros(1 << state.n, dtype=np.complex128)
    for label, value in state.nonzero_items():
        full[label] = value
    return full


def dense_two_qubit_gate(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """4x4 unitary with A on span{00, 11} and B on span{01, 10}."""
    U = np.zeros((4, 4), dtype=np.complex128)
    U[0, 0], U[0, 3] = A[0, 0], A[0, 1]
    U[3, 0], U[3, 3] = A[1, 0], A[1, 1]
    U[1, 1], U[1, 2] = B[0, 0], B[0, 1]
    U[2, 1], U[2, 2] = B[1, 0], B[1, 1]
    return U


def dense_gate_on(n: int, site: int, U4: np.ndarray) -> np.ndarray:
    """The two-qubit gate at (site, site+1) on the full space."""
    return kron_chain(
        [np.eye(1 << (site - 1))] + [U4] + [np.eye(1 << (n - site - 1))]
    )


def dense_lambda_residual(state) -> float:
    """Two-copy residual ||sum_k (c_k psi)(c_k psi)^T||_F from dense matrices."""
    n = state.n
    psi = dense_state(state)
    T = np.zeros((1 << n, 1 << n), dtype=np.complex128)
    for k in range(1, 2 * n + 1):
        v = dense_majorana(k, n) @ psi
        T += np.outer(v, v)
    return float(np.linalg.norm(T))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
