"""Cantilever pointer: exact joint evolution, postselection and readouts.

The interaction is ``H_int = -g S_z (x) z`` with ``z = sigma (a + a^dag)``,
so the impulsive propagator is ``U = exp(+i g0 S_z (x) (a + a^dag))`` with
the dimensionless strength ``g0 = g t sigma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from weakthermo.errors import ConvergenceError, OrthogonalPostselectionError, TruncationError
from weakthermo.linalg import I2, SZ, FockSpace, fock_operators, hermitian_exp, number_operator, tensor
from weakthermo.weak import MIN_POSTSELECT_PROB, WeakValue

LEAKAGE_TOL = 1e-8


@dataclass(frozen=True)
class CouplingParams:
    """Spin-pointer coupling.

    ``g0`` is the dimensionless strength ``g t sigma``; ``sigma`` is the
    pointer zero-point width and ``t`` the interaction time.  Free evolution
    of the cantilever (``omega_c a^dag a``) and of the spin during the window
    is off unless ``include_free_evolution`` is set.
    """

    g0: float
    sigma: float = 1.0
    t: float = 1.0
    include_free_evolution: bool = False
    omega_c: float = 0.0

    def __post_init__(self):
        if not (self.g0 >= 0 and math.isfinite(self.g0)):
            raise ValueError(f"g0 must be finite and >= 0, got {self.g0!r}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma!r}")
        if not self.t > 0:
            raise ValueError(f"interaction time must be positive, got {self.t!r}")

    @property
    def g(self) -> float:
        return self.g0 / (self.t * self.sigma)

    def fock_space(self, dim: int) -> FockSpace:
        return FockSpace(dim, self.sigma)


@dataclass(frozen=True, eq=False)
class PointerState:
    coeffs: np.ndarray
    sigma: float = 1.0

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    @property
    def space(self) -> FockSpace:
        return FockSpace(self.dim, self.sigma)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


@dataclass(frozen=True, eq=False)
class JointState:
    """Spin (x) pointer state, either a vector of length 2D or a 2D x 2D density."""

    data: np.ndarray
    pure: bool
    sigma: float = 1.0

    @property
    def pointer_dim(self) -> int:
        return self.data.shape[0] // 2

    @property
    def density(self) -> np.ndarray:
        if self.pure:
            return np.outer(self.data, self.data.conj())
        return self.data


class Readouts(NamedTuple):
    z_mean: float
    p_mean: float
    z_closed: Optional[float] = None
    p_closed: Optional[float] = None


def gaussian_ground_state(space: FockSpace) -> PointerState:
    coeffs = np.zeros(space.dim, dtype=complex)
    coeffs[0] = 1.0
    return PointerState(coeffs, space.sigma)


def _check_sigma(pointer_sigma: float, c: CouplingParams) -> None:
    if not math.isclose(pointer_sigma, c.sigma, rel_tol=1e-12):
        raise ValueError(f"pointer width {pointer_sigma!r} does not match coupling sigma {c.sigma!r}")


def joint_hamiltonian(space: FockSpace, c: CouplingParams, spin_hamiltonian: Optional[np.ndarray] = None) -> np.ndarray:
    _, _, z, _ = fock_operators(space)
    h = -c.g * tensor(SZ, z)
    if c.include_free_evolution:
        h = h + c.omega_c * tensor(I2, number_operator(space))
        if spin_hamiltonian is not None:
            h = h + tensor(np.asarray(spin_hamiltonian, dtype=complex), np.eye(space.dim))
    return h


def _pointer_populations(rho_joint: np.ndarray, dim: int) -> np.ndarray:
    r = rho_joint.reshape(2, dim, 2, dim)
    return np.real(np.einsum("snsn->n", r))


def evolve_exact(
    rho_s: np.ndarray,
    pointer: PointerState,
    c: CouplingParams,
    spin_hamiltonian: Optional[np.ndarray] = None,
) -> JointState:
    """Exact ``U rho(0) U^dag`` with ``rho(0) = rho_s (x) |phi><phi|``.

    ``spin_hamiltonian`` only enters when ``c.include_free_evolution`` is set.
    """
    _check_sigma(pointer.sigma, c)
    space = pointer.space
    rho0 = tensor(np.asarray(rho_s, dtype=complex), np.outer(pointer.coeffs, pointer.coeffs.conj()))
    u = hermitian_exp(joint_hamiltonian(space, c, spin_hamiltonian), -1j * c.t)
    rho = u @ rho0 @ u.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    pops = _pointer_populations(rho, space.dim)
    leak = pops[-2:].sum()
    if leak > LEAKAGE_TOL:
        raise TruncationError(
            f"truncation insufficient: {leak:.3e} of the pointer population sits in the top two "
            f"of {space.dim} Fock levels (g0 = {c.g0:g})"
        )
    return JointState(rho, pure=False, sigma=pointer.sigma)


def first_order_state(rho_s: np.ndarray, pointer: PointerState, c: CouplingParams) -> JointState:
    """``rho(0) + i g t [S_z (x) z, rho(0)]``; not positive, trace preserved."""
    _check_sigma(pointer.sigma, c)
    _, _, z, _ = fock_operators(pointer.space)
    rho0 = tensor(np.asarray(rho_s, dtype=complex), np.outer(pointer.coeffs, pointer.coeffs.conj()))
    k = tensor(SZ, z)
    rho = rho0 + 1j * c.g * c.t * (k @ rho0 - rho0 @ k)
    return JointState(rho, pure=False, sigma=pointer.sigma)


def postselect_pointer(joint: JointState, psi_f: np.ndarray) -> tuple[Union[PointerState, np.ndarray], float]:
    """Project the spin onto ``psi_f``.

    Returns the normalized pointer state (a :class:`PointerState` for pure
    input, a density matrix otherwise) and the postselection probability.
    """
    psi_f = np.asarray(psi_f, dtype=complex)
    d = joint.pointer_dim
    if joint.pure:
        vec = psi_f.conj() @ joint.data.reshape(2, d)
        prob = float(np.vdot(vec, vec).real)
        if not prob > MIN_POSTSELECT_PROB:
            raise OrthogonalPostselectionError(f"zero-probability postselection (p = {prob!r})")
        return PointerState(vec / math.sqrt(prob), joint.sigma), prob
    r = joint.data.reshape(2, d, 2, d)
    rho_p = np.einsum("s,snum,u->nm", psi_f.conj(), r, psi_f)
    prob = float(np.trace(rho_p).real)
    if not prob > MIN_POSTSELECT_PROB:
        raise OrthogonalPostselectionError(f"zero-probability postselection (p = {prob!r})")
    return rho_p / prob, prob


def weak_final_state(sw: Union[WeakValue, complex], c: CouplingParams, space: FockSpace) -> PointerState:
    """``kappa (|0> + i g0 S_w |1>)`` with ``kappa = (1 + g0^2 |S_w|^2)^(-1/2)``."""
    _check_sigma(space.sigma, c)
    s = complex(sw)
    kappa = 1.0 / math.sqrt(1.0 + c.g0**2 * abs(s) ** 2)
    coeffs = np.zeros(space.dim, dtype=complex)
    coeffs[0] = kappa
    coeffs[1] = 1j * c.g0 * s * kappa
    return PointerState(coeffs, space.sigma)


def readout_closed_form(sw: complex, c: CouplingParams) -> tuple[float, float]:
    """Position and momentum means of the two-level weak pointer state."""
    s = complex(sw)
    k2 = 1.0 / (1.0 + c.g0**2 * abs(s) ** 2)
    z = -2.0 * c.sigma * c.g0 * k2 * s.imag
    p = k2 * c.g0 / c.sigma * s.real
    return z, p


def weak_value_of_state(state: PointerState, g0: float) -> Optional[complex]:
    """Recover ``S_w`` from a state of the form ``kappa (|0> + i g0 S_w |1>)``, else None."""
    c = state.coeffs
    if g0 <= 0 or c[0] == 0 or np.any(c[2:] != 0):
        return None
    return complex(c[1] / (1j * g0 * c[0]))


def pointer_readouts(state: Union[PointerState, np.ndarray], c: CouplingParams) -> Readouts:
    """``<z>`` and ``<p>`` from the operator matrices.

    For a two-level weak pointer state the closed forms are filled in as
    well so the two routes can be compared.
    """
    if isinstance(state, PointerState):
        _check_sigma(state.sigma, c)
        _, _, z, p = fock_operators(state.space)
        v = state.coeffs
        z_mean = float(np.vdot(v, z @ v).real)
        p_mean = float(np.vdot(v, p @ v).real)
        sw = weak_value_of_state(state, c.g0)
        if sw is None:
            return Readouts(z_mean, p_mean)
        zc, pc = readout_closed_form(sw, c)
        return Readouts(z_mean, p_mean, zc, pc)
    rho = np.asarray(state)
    _, _, z, p = fock_operators(FockSpace(rho.shape[0], c.sigma))
    return Readouts(float(np.trace(rho @ z).real), float(np.trace(rho @ p).real))


def reconstruct_weak_value(
    z_mean: float,
    p_mean: float,
    c: CouplingParams,
    rtol: float = 1e-12,
    max_iter: int = 100,
) -> WeakValue:
    """Invert the closed-form readouts for ``S_w`` by fixed-point iteration on kappa^2."""
    if not c.g0 > 0:
        raise ValueError("cannot reconstruct a weak value with g0 = 0")
    # S_w * kappa^2, read straight off the two readouts
    scaled = complex(c.sigma * p_mean, -z_mean / (2.0 * c.sigma)) / c.g0
    k2 = 1.0
    prev = None
    for _ in range(max_iter):
        sw = scaled / k2
        if not abs(sw) < 1e150:
            break
        if prev is not None and abs(sw - prev) <= rtol * max(abs(sw), 1e-300):
            return WeakValue(sw, "exact")
        k2 = 1.0 / (1.0 + c.g0**2 * abs(sw) ** 2)
        prev = sw
    raise ConvergenceError(
        f"kappa^2 fixed point did not converge in {max_iter} iterations "
        f"(g0 |S_w kappa^2| = {c.g0 * abs(scaled):.3g}; readouts outside the weak-state range?)"
    )


def dominant_state(rho: np.ndarray) -> tuple[np.ndarray, float]:
    """Leading eigenvector of a density matrix and the purity ``Tr rho^2``."""
    w, v = np.linalg.eigh(rho)
    purity = float(np.real(np.trace(rho @ rho)))
    return v[:, -1], purity


def infidelity(rho_or_state: Union[PointerState, np.ndarray], target: PointerState) -> float:
    """``1 - |<target|v>|^2`` against the dominant eigenvector of a density (or a pure state)."""
    if isinstance(rho_or_state, PointerState):
        v = rho_or_state.coeffs
    else:
        v, _ = dominant_state(rho_or_state)
    return 1.0 - abs(np.vdot(target.coeffs, v)) ** 2
