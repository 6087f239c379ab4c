"""Dense complex linear algebra and truncated harmonic-oscillator operators.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.  The
tensor-product ordering is spin (left) times oscillator (right) everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from weakthermo.errors import NonHermitianError

HERMITIAN_RTOL = 1e-12
NORM_TOL = 1e-12

# Spin-1/2 operators in the {|up>, |down>} basis.
SX = np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex)
SY = np.array([[0.0, -0.5j], [0.5j, 0.0]], dtype=complex)
SZ = np.array([[0.5, 0.0], [0.0, -0.5]], dtype=complex)
I2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class FockSpace:
    """Truncated oscillator space of dimension ``dim`` and zero-point width ``sigma``."""

    dim: int
    sigma: float = 1.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"Fock dimension must be an integer >= 2, got {self.dim!r}")
        if not (self.sigma > 0 and np.isfinite(self.sigma)):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma!r}")


def check_hermitian(m: np.ndarray, rtol: float = HERMITIAN_RTOL) -> None:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonHermitianError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonHermitianError("matrix has non-finite entries")
    scale = np.linalg.norm(m)
    dev = np.linalg.norm(m - m.conj().T)
    if dev > rtol * scale:
        raise NonHermitianError(
            f"matrix is not Hermitian: ||M - M^dag|| = {dev:.3e} > {rtol:g} * ||M|| = {rtol * scale:.3e}"
        )


def hermitian_exp(m: np.ndarray, s: complex = 1.0) -> np.ndarray:
    """Return ``exp(s * M)`` for Hermitian ``M`` via its eigendecomposition."""
    m = np.asarray(m, dtype=complex)
    check_hermitian(m)
    w, v = np.linalg.eigh(m)
    return (v * np.exp(s * w)) @ v.conj().T


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product ``A (x) B``; the spin factor goes on the left by convention."""
    return np.kron(a, b)


def fock_operators(space: FockSpace) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Ladder, position and momentum matrices on the truncated space.

    ``z = sigma (a + a^dag)`` and ``p = i (a^dag - a) / (2 sigma)`` so that
    ``[z, p] = i`` away from the truncation corner.
    """
    n = np.arange(1, space.dim)
    a = np.diag(np.sqrt(n).astype(complex), k=1)
    adag = a.conj().T
    z = space.sigma * (a + adag)
    p = 1j * (adag - a) / (2.0 * space.sigma)
    return a, adag, z, p


def number_operator(space: FockSpace) -> np.ndarray:
    return np.diag(np.arange(space.dim).astype(complex))


def expectation(state: np.ndarray, m: np.ndarray) -> complex:
    """``<state| M |state>`` for a normalized state vector.

    When ``M`` is Hermitian the (roundoff) imaginary part is dropped and a
    real number is returned.
    """
    state = np.asarray(state, dtype=complex)
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[1] != state.shape[0]:
        raise ValueError(f"dimension mismatch: state {state.shape} vs operator {m.shape}")
    norm = np.vdot(state, state).real
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
    val = np.vdot(state, m @ state)
    if np.allclose(m, m.conj().T, rtol=0.0, atol=HERMITIAN_RTOL * max(np.linalg.norm(m), 1e-300)):
        return float(val.real)
    return complex(val)


def spectral_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2))
