"""Weak values of S_z under a thermal spin state and their inversion to beta."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

from weakthermo.errors import InsensitivePostselectionError, OrthogonalPostselectionError
from weakthermo.linalg import SZ, spectral_norm
from weakthermo.spin import SpinParams

MIN_POSTSELECT_PROB = 1e-300
DEGENERACY_RTOL = 1e-15


@dataclass(frozen=True)
class WeakValue:
    value: complex
    kind: Literal["exact", "first-order"] = "exact"

    def __complex__(self):
        return complex(self.value)

    @property
    def real(self) -> float:
        return float(np.real(self.value))

    @property
    def imag(self) -> float:
        return float(np.imag(self.value))


@dataclass(frozen=True)
class InversionCoefficients:
    """Postselected moments entering the linearized weak value.

    ``sz_mean = <S_z>``, ``h_mean = <H>``, ``szh_mean = <S_z H>`` (complex in
    general, S_z H is not Hermitian) and ``conv = <S_z><H>``, all in the
    postselection state.  ``h_norm`` sets the degeneracy scale.
    """

    sz_mean: float
    h_mean: float
    szh_mean: complex
    conv: float
    h_norm: float = 1.0

    @property
    def slope(self) -> complex:
        """First-order sensitivity ``dS_w/dbeta`` at beta = 0."""
        return self.conv - self.szh_mean


def _sw_ratio(rho: np.ndarray, psi_f: np.ndarray) -> complex:
    bra = np.conj(psi_f)
    prob = (bra @ rho @ psi_f).real
    if not prob > MIN_POSTSELECT_PROB:
        raise OrthogonalPostselectionError(
            f"orthogonal postselection: <psi_f|rho|psi_f> = {prob!r}"
        )
    return complex(bra @ SZ @ rho @ psi_f) / prob


def weak_value_exact(rho: np.ndarray, psi_f: np.ndarray) -> WeakValue:
    return WeakValue(_sw_ratio(np.asarray(rho, dtype=complex), np.asarray(psi_f, dtype=complex)), "exact")


def inversion_coefficients(h: np.ndarray, psi_f: np.ndarray) -> InversionCoefficients:
    h = np.asarray(h, dtype=complex)
    psi_f = np.asarray(psi_f, dtype=complex)
    bra = np.conj(psi_f)
    sz_mean = float((bra @ SZ @ psi_f).real)
    h_mean = float((bra @ h @ psi_f).real)
    szh_mean = complex(bra @ SZ @ h @ psi_f)
    return InversionCoefficients(
        sz_mean=sz_mean,
        h_mean=h_mean,
        szh_mean=szh_mean,
        conv=sz_mean * h_mean,
        h_norm=spectral_norm(h),
    )


def weak_value_first_order(h: np.ndarray, psi_f: np.ndarray, beta: float) -> WeakValue:
    """Weak value linearized in beta: ``<S_z> + beta (<S_z><H> - <S_z H>)``."""
    h = np.asarray(h, dtype=complex)
    x = beta * spectral_norm(h)
    if x > 0.5:
        raise ValueError(f"beta * ||H|| = {x:.3g} is outside the high-temperature expansion (<= 0.5)")
    if x > 0.1:
        warnings.warn(f"beta * ||H|| = {x:.3g} > 0.1; first-order weak value is inaccurate", stacklevel=2)
    co = inversion_coefficients(h, psi_f)
    return WeakValue(co.sz_mean + beta * co.slope, "first-order")


def invert_beta(
    sw: Union[WeakValue, complex],
    coeffs: InversionCoefficients,
    full_output: bool = False,
):
    """Estimate beta from a weak value through the linearized relation.

    Returns the real part of ``(S_w - <S_z>) / (<S_z><H> - <S_z H>)``.  With
    ``full_output=True`` a ``(beta, imag_residue)`` pair is returned instead;
    the residue measures how far the data sit from the real-beta model.
    """
    denom = coeffs.slope
    if abs(denom) <= DEGENERACY_RTOL * coeffs.h_norm:
        raise InsensitivePostselectionError(
            "insensitive postselection: the weak value does not depend on beta to first order "
            "(postselection state is an S_z eigenstate or the sensitivity vanishes)"
        )
    ratio = (complex(sw) - coeffs.sz_mean) / denom
    if full_output:
        return ratio.real, ratio.imag
    return ratio.real


def invert_beta_symmetric_x(sw: Union[WeakValue, complex], p: SpinParams) -> float:
    """Closed-form estimate ``2 (1 - 2 S_w) / (omega_R + 3 omega_z)``.

    Quoted special case for an equal superposition of S_x eigenstates; that
    superposition is the S_z eigenstate |up>, for which :func:`invert_beta`
    reports an insensitive postselection.  Kept for comparison only.
    """
    denom = p.omega_R + 3.0 * p.omega_z
    if denom == 0:
        raise ZeroDivisionError("omega_R + 3 omega_z vanishes")
    return float(np.real(2.0 * (1.0 - 2.0 * complex(sw)) / denom))
