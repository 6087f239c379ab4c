"""Spin Hamiltonian, thermal state and postselection states (hbar = k_B = 1)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from weakthermo.linalg import SX, SZ, check_hermitian, spectral_norm

# exp() overflows near 709 in double precision
MAX_EXPONENT = 700.0


@dataclass(frozen=True)
class SpinParams:
    """Detuning ``omega_z`` and Rabi frequency ``omega_R`` in rad/s."""

    omega_z: float
    omega_R: float

    def __post_init__(self):
        if not (math.isfinite(self.omega_z) and math.isfinite(self.omega_R)):
            raise ValueError("spin frequencies must be finite")


@dataclass(frozen=True)
class PostselectionAngles:
    """Bloch angles of ``cos(theta/2)|up> + exp(i phi) sin(theta/2)|down>``."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta!r}")
        if not 0.0 <= self.phi < 2.0 * math.pi:
            raise ValueError(f"phi must lie in [0, 2 pi), got {self.phi!r}")


def build_spin_hamiltonian(p: SpinParams) -> np.ndarray:
    return p.omega_z * SZ + p.omega_R * SX


def _gibbs_unchecked(h: np.ndarray, beta: float) -> np.ndarray:
    # Shifting by the extreme eigenvalue keeps every weight in (0, 1].
    w, v = np.linalg.eigh(h)
    x = -beta * w
    weights = np.exp(x - x.max())
    weights /= weights.sum()
    rho = (v * weights) @ v.conj().T
    return 0.5 * (rho + rho.conj().T)


def gibbs_state(h: np.ndarray, beta: float) -> np.ndarray:
    """Thermal density matrix ``exp(-beta H) / Tr exp(-beta H)``."""
    h = np.asarray(h, dtype=complex)
    check_hermitian(h)
    if not beta >= 0:
        raise ValueError(f"inverse temperature must be >= 0, got {beta!r}")
    if beta * spectral_norm(h) > MAX_EXPONENT:
        raise OverflowError(
            f"beta * ||H|| = {beta * spectral_norm(h):.3g} exceeds {MAX_EXPONENT:g}; "
            "the Gibbs weights leave the double-precision exponent range"
        )
    return _gibbs_unchecked(h, beta)


def postselect_state(angles: PostselectionAngles) -> np.ndarray:
    theta, phi = angles.theta, angles.phi
    # Pin the poles so that they are exact S_z eigenstates.
    c = 0.0 if theta == math.pi else math.cos(theta / 2)
    s = 0.0 if theta == 0.0 else math.sin(theta / 2)
    return np.array([c, complex(math.cos(phi), math.sin(phi)) * s], dtype=complex)


def is_high_temperature(p: SpinParams, beta: float, threshold: float = 0.1) -> bool:
    return beta * max(abs(p.omega_z), abs(p.omega_R)) <= threshold
