"""Fisher information of the pointer state with respect to beta, and sampling experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

from weakthermo.errors import InsufficientPrecisionError
from weakthermo.linalg import SZ, FockSpace
from weakthermo.pointer import CouplingParams, reconstruct_weak_value, weak_final_state
from weakthermo.spin import (
    PostselectionAngles,
    SpinParams,
    _gibbs_unchecked,
    build_spin_hamiltonian,
    gibbs_state,
    postselect_state,
)
from weakthermo.weak import _sw_ratio, inversion_coefficients, invert_beta, weak_value_exact

BETA_FLOOR = 1e-12
# smallest relative change of S_w across a finite-difference stencil that we trust
FD_RESOLUTION = 1e-8


class _NoInformation:
    """Variance bound for a measurement that carries no information on beta."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NO_INFORMATION"

    def __str__(self):
        return "no-information"

    def __reduce__(self):
        return (_NoInformation, ())


NO_INFORMATION = _NoInformation()


@dataclass(frozen=True)
class QfiResult:
    fisher: float
    method: Literal["analytic", "finite-difference"]
    beta: float
    angles: PostselectionAngles


@dataclass(frozen=True)
class CrbResult:
    variance_bound: Union[float, _NoInformation]
    n_measurements: int = 1

    @property
    def informative(self) -> bool:
        return self.variance_bound is not NO_INFORMATION


@dataclass(frozen=True, eq=False)
class ExperimentRecord:
    """Outcome of a batch of simulated thermometry runs.

    ``samples_z`` / ``samples_p`` have shape ``(n_replicates, n_samples)``.
    ``crb`` is the bound for the ``n_measurements`` pointer copies used per
    replicate (one copy per position or momentum sample).
    """

    samples_z: np.ndarray
    samples_p: np.ndarray
    replicate_estimates: np.ndarray
    beta_estimate: float
    beta_true: float
    sample_variance: float
    crb: Union[float, _NoInformation]
    fisher: float
    n_measurements: int
    seed: int

    @property
    def variance_ratio(self) -> float:
        if self.crb is NO_INFORMATION:
            return math.nan
        return self.sample_variance / self.crb

    @property
    def variance_stderr(self) -> float:
        """Standard error of ``sample_variance`` under a normal model."""
        r = len(self.replicate_estimates)
        return self.sample_variance * math.sqrt(2.0 / (r - 1))


def _sw_at(h: np.ndarray, psi_f: np.ndarray, beta: float) -> complex:
    # no sign check on beta: finite-difference stencils may straddle beta = 0
    return _sw_ratio(_gibbs_unchecked(h, beta), psi_f)


def dSw_dbeta(h: np.ndarray, psi_f: np.ndarray, beta: float) -> complex:
    """Analytic beta-derivative of the exact weak value.

    With ``E = exp(-beta H)``, ``dE/dbeta = -H E`` and the quotient rule on
    ``<S_z E> / <E>``; the partition function cancels.
    """
    h = np.asarray(h, dtype=complex)
    psi_f = np.asarray(psi_f, dtype=complex)
    rho = gibbs_state(h, beta)
    bra = psi_f.conj()
    d = (bra @ rho @ psi_f).real
    num = bra @ SZ @ rho @ psi_f
    num_dot = -(bra @ SZ @ h @ rho @ psi_f)
    d_dot = -(bra @ h @ rho @ psi_f)
    return complex((num_dot * d - num * d_dot) / d**2)


def _spin_setup(angles: PostselectionAngles, p: SpinParams) -> tuple[np.ndarray, np.ndarray]:
    return build_spin_hamiltonian(p), postselect_state(angles)


def pointer_qfi(h: np.ndarray, psi_f: np.ndarray, beta: float, c: CouplingParams) -> float:
    """Pure-state QFI of ``kappa(|0> + i g0 S_w(beta) |1>)`` for an arbitrary postselection vector.

    For the unnormalized amplitude vector ``v = (1, a)`` with ``a = i g0 S_w``,
    ``F = 4 [<v'|v'>/<v|v> - |<v|v'>|^2/<v|v>^2]``, which collapses to
    ``4 |a'|^2 / (1 + |a|^2)^2``.
    """
    sw = weak_value_exact(gibbs_state(h, beta), psi_f).value
    a = 1j * c.g0 * sw
    a_dot = 1j * c.g0 * dSw_dbeta(h, psi_f, beta)
    norm = 1.0 + abs(a) ** 2
    f = 4.0 * (abs(a_dot) ** 2 / norm - abs(np.conj(a) * a_dot) ** 2 / norm**2)
    return max(f, 0.0)


def qfi_analytic(beta: float, angles: PostselectionAngles, c: CouplingParams, p: SpinParams) -> QfiResult:
    h, psi = _spin_setup(angles, p)
    return QfiResult(pointer_qfi(h, psi, beta, c), "analytic", beta, angles)


def _overlap_deficit(u: np.ndarray, v: np.ndarray) -> float:
    """``1 - |<u|v>|`` for unit vectors, without cancellation.

    Uses the Lagrange identity ``1 - |<u|v>|^2 = sum_{i<j} |u_i v_j - u_j v_i|^2``.
    """
    w = np.outer(u, v)
    wedge = w - w.T
    d2 = 0.5 * float(np.sum(np.abs(wedge) ** 2))
    return d2 / (1.0 + abs(np.vdot(u, v)))


def qfi_finite_difference(
    beta: float,
    angles: PostselectionAngles,
    c: CouplingParams,
    p: SpinParams,
    rel_step: float = 1e-4,
    beta_floor: float = BETA_FLOOR,
    max_widen: int = 6,
) -> QfiResult:
    """QFI from the fidelity between pointer states at neighbouring beta.

    ``F ~ 8 (1 - |<phi(beta - d/2)|phi(beta + d/2)>|) / d^2``; the symmetric
    stencil has an even error series, so one Richardson step over ``d`` and
    ``d/2`` leaves an O(d^4) error.
    """
    h, psi = _spin_setup(angles, p)
    # S_z eigenstate: S_w is exactly beta-independent
    if c.g0 == 0 or np.count_nonzero(psi) == 1:
        return QfiResult(0.0, "finite-difference", beta, angles)
    space = FockSpace(2, c.sigma)

    def estimate(step):
        s_lo = _sw_at(h, psi, beta - step / 2)
        s_hi = _sw_at(h, psi, beta + step / 2)
        lo = weak_final_state(s_lo, c, space).coeffs
        hi = weak_final_state(s_hi, c, space).coeffs
        return 8.0 * _overlap_deficit(lo, hi) / step**2, abs(s_hi - s_lo)

    delta = rel_step * max(beta, beta_floor)
    scale = max(abs(_sw_at(h, psi, beta)), 1e-300)
    for _ in range(max_widen + 1):
        f1, ds = estimate(delta)
        if ds >= FD_RESOLUTION * scale:
            f2, _ = estimate(delta / 2)
            return QfiResult(max((4.0 * f2 - f1) / 3.0, 0.0), "finite-difference", beta, angles)
        delta *= 10.0
    raise InsufficientPrecisionError(
        f"weak value changes by only {ds:.3e} (relative {ds / scale:.3e}) across the widest "
        f"stencil {delta / 10:.3e}; finite differences cannot resolve the QFI here"
    )


def cramer_rao(f: QfiResult, n: int = 1) -> CrbResult:
    if n < 1:
        raise ValueError(f"number of measurements must be positive, got {n}")
    if not f.fisher > 0:
        return CrbResult(NO_INFORMATION, n)
    return CrbResult(1.0 / (n * f.fisher), n)


def _sample_linear_gaussian(w: complex, n: int, rng: np.random.Generator, spread: float = 1.1) -> np.ndarray:
    """Draw ``n`` samples of ``u`` with density ``N(u; 0, 1) |1 + w u|^2 / (1 + |w|^2)``.

    Rejection sampling from the slightly wider proposal ``N(0, spread^2)``:
    the target/proposal ratio is then bounded, unlike with the unit Gaussian.
    """
    aw = abs(w)
    alpha = 1.0 - 1.0 / spread**2
    # maximiser of (1 + |w| u)^2 exp(-alpha u^2 / 2) over u >= 0
    if aw > 0:
        u_star = (-alpha + math.sqrt(alpha**2 + 8.0 * aw**2 * alpha)) / (2.0 * aw * alpha)
    else:
        u_star = 0.0
    bound = spread * (1.0 + aw * u_star) ** 2 * math.exp(-alpha * u_star**2 / 2) / (1.0 + aw**2)

    out = np.empty(n)
    filled = 0
    while filled < n:
        m = int((n - filled) * bound * 1.1) + 16
        u = rng.normal(0.0, spread, size=m)
        ratio = spread * np.exp(-alpha * u**2 / 2) * np.abs(1.0 + w * u) ** 2 / (1.0 + aw**2)
        keep = u[rng.uniform(0.0, bound, size=m) < ratio]
        take = min(len(keep), n - filled)
        out[filled : filled + take] = keep[:take]
        filled += take
    return out


def sample_pointer(sw: complex, c: CouplingParams, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Position and momentum outcomes on ``n`` copies each of the weak pointer state.

    In units of the vacuum spread, position sees amplitude ``1 + i g0 S_w u``
    and momentum ``1 + g0 S_w q`` (Hermite functions pick up ``(-i)^n`` under
    the Fourier transform), with ``z = sigma u`` and ``p = q / (2 sigma)``.
    """
    a = 1j * c.g0 * complex(sw)
    z = c.sigma * _sample_linear_gaussian(a, n, rng)
    p = _sample_linear_gaussian(-1j * a, n, rng) / (2.0 * c.sigma)
    return z, p


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def run_replicate(
    sw: complex,
    coeffs,
    c: CouplingParams,
    n_samples: int,
    seed: int,
    index: int,
) -> tuple[np.ndarray, np.ndarray, complex, float]:
    """One thermometry run: sample, average, reconstruct S_w, invert for beta."""
    rng = replicate_rng(seed, index)
    z, p = sample_pointer(sw, c, n_samples, rng)
    sw_hat = reconstruct_weak_value(float(z.mean()), float(p.mean()), c).value
    return z, p, sw_hat, invert_beta(sw_hat, coeffs)


def simulate_experiment(
    beta_true: float,
    angles: PostselectionAngles,
    c: CouplingParams,
    p: SpinParams,
    n_samples: int = 10_000,
    seed: int = 0,
    n_replicates: int = 100,
) -> ExperimentRecord:
    if n_samples < 1000:
        raise ValueError(f"n_samples must be >= 1000, got {n_samples}")
    if n_replicates < 2:
        raise ValueError("need at least two replicates to estimate a variance")
    h, psi = _spin_setup(angles, p)
    sw = weak_value_exact(gibbs_state(h, beta_true), psi).value
    coeffs = inversion_coefficients(h, psi)
    fisher = qfi_analytic(beta_true, angles, c, p)
    n_meas = 2 * n_samples
    crb = cramer_rao(fisher, n_meas)

    zs = np.empty((n_replicates, n_samples))
    ps = np.empty((n_replicates, n_samples))
    est = np.empty(n_replicates)
    for r in range(n_replicates):
        zs[r], ps[r], _, est[r] = run_replicate(sw, coeffs, c, n_samples, seed, r)
    return ExperimentRecord(
        samples_z=zs,
        samples_p=ps,
        replicate_estimates=est,
        beta_estimate=float(est.mean()),
        beta_true=beta_true,
        sample_variance=float(est.var(ddof=1)),
        crb=crb.variance_bound,
        fisher=fisher.fisher,
        n_measurements=n_meas,
        seed=seed,
    )
