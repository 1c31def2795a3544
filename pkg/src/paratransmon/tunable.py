"""Flux-tunable (split-junction) transmons mapped onto an effective single junction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import JunctionCollapseError, PhysicsError
from .perturbation import transmon_series
from .series import DEFAULT_ORDER

XI_LIMIT = 0.5


@dataclass(frozen=True)
class TransmonSpec:
    """Charging and Josephson energies in MHz; ``E_J2 == 0`` is a fixed-frequency transmon."""

    E_C: float
    E_J1: float
    E_J2: float = 0.0
    label: str = ""

    def __post_init__(self):
        if not self.E_C > 0:
            raise PhysicsError(f"E_C must be positive, got {self.E_C}")
        if not self.E_J1 > 0:
            raise PhysicsError(f"E_J1 must be positive, got {self.E_J1}")
        if self.E_J2 < 0:
            raise PhysicsError(f"E_J2 must be non-negative, got {self.E_J2}")

    @classmethod
    def fixed(cls, E_C: float, xi: float, label: str = "") -> "TransmonSpec":
        if not xi > 0:
            raise PhysicsError(f"xi must be positive, got {xi}")
        return cls(E_C, 2 * E_C / xi**2, 0.0, label)

    @classmethod
    def from_xi_range(cls, E_C: float, xi_max: float, xi_min: float, label: str = "") -> "TransmonSpec":
        """SQUID with ``xi(0) = xi_max`` and ``xi(pi) = xi_min`` (names follow the frequency extrema)."""
        if not (xi_max > 0 and xi_min > 0):
            raise PhysicsError(f"xi_max and xi_min must be positive, got {xi_max}, {xi_min}")
        total = 2 * E_C / xi_max**2
        diff = 2 * E_C / xi_min**2
        if diff > total:
            raise PhysicsError("xi_min must exceed xi_max (E_J1 + E_J2 >= |E_J1 - E_J2|)")
        return cls(E_C, (total + diff) / 2, (total - diff) / 2, label)

    @property
    def is_tunable(self) -> bool:
        return self.E_J2 > 0


@dataclass(frozen=True)
class FluxPoint:
    phi_ext: float
    E_J_eff: float
    phi_eff: float
    xi: float
    omega: float
    eta: float
    lam: float
    Lam: float
    upsilon: float


def effective_junction(spec: TransmonSpec, phi_ext):
    """``(E_J_eff, phi_eff)`` of the SQUID at reduced flux ``phi_ext`` (radians, array friendly)."""
    phi = np.asarray(phi_ext, dtype=float)
    e1, e2 = spec.E_J1, spec.E_J2
    ej2 = e1 * e1 + e2 * e2 + 2 * e1 * e2 * np.cos(phi)
    ej = np.sqrt(np.clip(ej2, 0.0, None))
    bad = ej <= 1e-12 * (e1 + e2)
    if np.any(bad):
        where = float(np.atleast_1d(phi)[np.atleast_1d(bad)][0])
        raise JunctionCollapseError(
            f"effective junction vanishes at phi_ext={where:.6g}, transmon regime violated"
        )
    # two-argument form stays continuous through phi_ext = pi for asymmetric SQUIDs
    phi_eff = np.arctan2(e1 * np.sin(phi), e1 * np.cos(phi) + e2)
    if ej.ndim == 0:
        return float(ej), float(phi_eff)
    return ej, phi_eff


def xi_of(spec: TransmonSpec, phi_ext):
    ej, _ = effective_junction(spec, phi_ext)
    xi = np.sqrt(2 * spec.E_C / np.asarray(ej))
    if np.any(xi >= XI_LIMIT):
        raise PhysicsError(f"xi={float(np.max(xi)):.3g} outside the transmon regime (< {XI_LIMIT})")
    return xi if np.ndim(xi) else float(xi)


def dphi_eff_dphi_ext(spec: TransmonSpec, phi_ext):
    ej2 = spec.E_J1**2 + spec.E_J2**2 + 2 * spec.E_J1 * spec.E_J2 * np.cos(phi_ext)
    return spec.E_J1 * (spec.E_J1 + spec.E_J2 * np.cos(phi_ext)) / ej2


def params_at_flux(spec: TransmonSpec, phi_ext: float, order: int = DEFAULT_ORDER) -> FluxPoint:
    ej, phi_eff = effective_junction(spec, phi_ext)
    xi = xi_of(spec, phi_ext)
    vals = transmon_series(order).values(xi, spec.E_C)
    return FluxPoint(
        float(phi_ext), ej, phi_eff, xi,
        vals["omega"], vals["eta"], vals["lambda"], vals["Lambda"], vals["upsilon"],
    )


def sweet_spots(spec: TransmonSpec) -> list[tuple[float, str]]:
    """Flux points (mod 2 pi) where ``E_J_eff`` is extremal: 0 is the maximum, pi the minimum."""
    return [(0.0, "maximum"), (math.pi, "minimum")]
