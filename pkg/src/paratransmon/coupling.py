"""Capacitively coupled transmon pairs: eigenbasis couplings and dispersive shifts."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import DispersiveError, PhysicsError
from .series import DEFAULT_ORDER
from .tunable import FluxPoint, TransmonSpec, params_at_flux

RESONANCE_TOL = 1.0  # MHz
VALIDITY_FACTOR = 10.0


@dataclass(frozen=True)
class CoupledPair:
    """Fixed (or first) qubit ``qubit_F`` coupled by ``g_C`` (MHz) to ``qubit_T`` parked at ``phi_park``."""

    qubit_F: TransmonSpec
    qubit_T: TransmonSpec
    g_C: float
    phi_park: float = 0.0

    def __post_init__(self):
        if self.g_C < 0:
            raise PhysicsError(f"g_C must be non-negative, got {self.g_C}")

    def points(self, order: int = DEFAULT_ORDER) -> tuple[FluxPoint, FluxPoint]:
        return params_at_flux(self.qubit_F, 0.0, order), params_at_flux(self.qubit_T, self.phi_park, order)

    def swapped(self) -> "CoupledPair":
        if self.qubit_F.is_tunable and self.phi_park != 0.0:
            raise PhysicsError("swapping needs both qubits evaluated at zero flux")
        return CoupledPair(self.qubit_T, self.qubit_F, self.g_C, 0.0)

    def with_coupling(self, g_C: float) -> "CoupledPair":
        return CoupledPair(self.qubit_F, self.qubit_T, g_C, self.phi_park)

    def is_dispersive(self, factor: float = VALIDITY_FACTOR, order: int = DEFAULT_ORDER) -> bool:
        p1, p2 = self.points(order)
        return abs(p1.omega - p2.omega) > factor * coupling_scale(self.g_C, p1.xi, p2.xi)


def coupling_scale(g_C: float, xi_1: float, xi_2: float) -> float:
    """Quadrature-basis coupling ``g = g_C / (4 sqrt(xi_1 xi_2))``."""
    return g_C / (4 * math.sqrt(xi_1 * xi_2))


def g_C_for(g: float, xi_1: float, xi_2: float) -> float:
    return 4 * g * math.sqrt(xi_1 * xi_2)


@dataclass(frozen=True)
class Couplings:
    g: float
    g11: float
    g12: float
    g21: float
    g22: float


@dataclass(frozen=True)
class DispersiveReport:
    g: float
    g11: float
    g12: float
    g21: float
    g22: float
    d_omega_1: float
    d_omega_2: float
    d_eta_1: float
    d_eta_2: float
    chi: float


def couplings_from(g: float, lam_1: float, Lam_1: float, lam_2: float, Lam_2: float) -> Couplings:
    r2 = math.sqrt(2.0)
    return Couplings(g, g * lam_1 * lam_2, r2 * g * lam_1 * Lam_2, r2 * g * Lam_1 * lam_2, 2 * g * Lam_1 * Lam_2)


def eigenbasis_couplings(pair: CoupledPair, order: int = DEFAULT_ORDER) -> Couplings:
    p1, p2 = pair.points(order)
    g = coupling_scale(pair.g_C, p1.xi, p2.xi)
    return couplings_from(g, p1.lam, p1.Lam, p2.lam, p2.Lam)


def _guard(denominator: float, what: str, tol: float):
    if abs(denominator) < tol:
        raise DispersiveError(f"dispersive formula singular: {what} = {denominator:.6g} MHz (|.| < {tol} MHz)")


def dispersive_shifts(
    pair: CoupledPair,
    order: int = DEFAULT_ORDER,
    tolerance: float = RESONANCE_TOL,
    validity_factor: float = VALIDITY_FACTOR,
) -> DispersiveReport:
    """Leading-order state-dependent shifts from the transverse coupling (all MHz)."""
    p1, p2 = pair.points(order)
    c = couplings_from(coupling_scale(pair.g_C, p1.xi, p2.xi), p1.lam, p1.Lam, p2.lam, p2.Lam)
    g = c.g
    detuning = p1.omega - p2.omega
    _guard(detuning, "omega_1 - omega_2", tolerance)
    _guard(detuning - p1.eta, "omega_1 - omega_2 - eta_1 (pole)", tolerance)
    _guard(detuning + p2.eta, "omega_1 - omega_2 + eta_2 (pole)", tolerance)
    if abs(detuning) <= validity_factor * g:
        warnings.warn(
            f"|omega_1 - omega_2| = {abs(detuning):.4g} MHz is not >> g = {g:.4g} MHz", RuntimeWarning
        )
    g2 = g * g
    d_omega_1 = g2 * p1.lam**2 * p2.lam**2 / detuning
    d_omega_2 = -d_omega_1
    d_eta_1 = 2 * d_omega_1 - 2 * g2 * p2.lam**2 * p1.Lam**2 / (detuning - p1.eta)
    d_eta_2 = 2 * d_omega_2 + 2 * g2 * p1.lam**2 * p2.Lam**2 / (detuning + p2.eta)
    chi = 2 * g2 * (
        p1.lam**2 * p2.Lam**2 / (detuning + p2.eta) - p1.Lam**2 * p2.lam**2 / (detuning - p1.eta)
    )
    return DispersiveReport(g, c.g11, c.g12, c.g21, c.g22, d_omega_1, d_omega_2, d_eta_1, d_eta_2, chi)
