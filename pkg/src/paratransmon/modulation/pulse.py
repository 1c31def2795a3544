"""Flux pulses and the transmon parameters they modulate.

Times are in microseconds and frequencies in MHz (cycles per microsecond), so
the reduced phase of the drive is ``tau = 2 pi omega_p t + theta_p`` and one
modulation period lasts ``1 / omega_p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..coupling import CoupledPair
from ..errors import PhysicsError
from ..perturbation import UPSILON_PREFACTOR, transmon_series
from ..series import DEFAULT_ORDER
from ..tunable import TransmonSpec, XI_LIMIT, dphi_eff_dphi_ext, effective_junction, params_at_flux

SERIES_PARAMETERS = ("omega", "eta", "omega12", "omega02", "lambda", "Lambda", "upsilon", "xi")
COUPLING_PARAMETERS = ("g", "g11", "g12", "g21", "g22")
DRIVE_PARAMETERS = ("nu01", "nu12", "nu02")
PARAMETERS = SERIES_PARAMETERS + COUPLING_PARAMETERS + DRIVE_PARAMETERS


@dataclass(frozen=True)
class FluxPulse:
    """``phi_ext(t) = phi_bar_p + phi_tilde_p cos(2 pi omega_p t + theta_p)`` (radians, MHz)."""

    phi_bar_p: float = 0.0
    phi_tilde_p: float = 0.0
    omega_p: float = 1.0
    theta_p: float = 0.0

    def __post_init__(self):
        if self.phi_tilde_p < 0:
            raise PhysicsError(f"phi_tilde_p must be non-negative, got {self.phi_tilde_p}")
        if not self.omega_p > 0:
            raise PhysicsError(f"omega_p must be positive, got {self.omega_p}")

    @property
    def period(self) -> float:
        return 1.0 / self.omega_p

    @property
    def at_sweet_spot(self) -> bool:
        return abs(math.sin(self.phi_bar_p)) < 1e-12

    def tau(self, t):
        return 2 * math.pi * self.omega_p * np.asarray(t, dtype=float) + self.theta_p

    def flux(self, t):
        return self.phi_bar_p + self.phi_tilde_p * np.cos(self.tau(t))

    def flux_rate(self, t):
        """``d phi_ext / dt`` in radians per microsecond."""
        return -2 * math.pi * self.omega_p * self.phi_tilde_p * np.sin(self.tau(t))

    def with_frequency(self, omega_p: float) -> "FluxPulse":
        return FluxPulse(self.phi_bar_p, self.phi_tilde_p, omega_p, self.theta_p)

    def with_amplitude(self, phi_tilde_p: float) -> "FluxPulse":
        return FluxPulse(self.phi_bar_p, phi_tilde_p, self.omega_p, self.theta_p)


@dataclass(frozen=True)
class ModulatedParameter:
    """A transmon quantity as a function of the external flux.

    ``power_terms`` lists ``(power, coefficient)`` pairs with ``f = sum c xi^power``
    when the quantity is a (generalized) power series in ``xi``; the analytic
    Fourier route needs it.
    """

    label: str
    function: Callable[[np.ndarray], np.ndarray]
    power_terms: tuple[tuple[float, float], ...] | None = None

    def __call__(self, phi_ext):
        return self.function(np.asarray(phi_ext, dtype=float))


def _xi_of_flux(spec: TransmonSpec, phi):
    ej, _ = effective_junction(spec, phi)
    xi = np.sqrt(2 * spec.E_C / np.asarray(ej))
    if np.any(xi >= XI_LIMIT):
        raise PhysicsError(f"xi={float(np.max(xi)):.3g} leaves the transmon regime during the pulse")
    return xi


def _terms(series, scale=1.0, offset=0.0):
    return tuple((k + offset, scale * float(c)) for k, c in series.items() if c)


def _combine(*parts):
    acc: dict[float, float] = {}
    for terms in parts:
        for p, c in terms:
            acc[p] = acc.get(p, 0.0) + c
    return tuple(sorted(acc.items()))


def modulated_parameter(
    spec: TransmonSpec,
    name: str,
    *,
    order: int = DEFAULT_ORDER,
    pair: CoupledPair | None = None,
    pulse: FluxPulse | None = None,
) -> ModulatedParameter:
    """Build the flux dependence of ``name`` for the tunable transmon ``spec``.

    Coupling parameters need ``pair`` (its ``qubit_F`` is the static partner);
    drive weights ``nu01, nu12, nu02`` need ``pulse``.
    """
    if name not in PARAMETERS:
        raise ValueError(f"unknown parameter {name!r}; choose from {', '.join(PARAMETERS)}")
    s = transmon_series(order)
    E_C = spec.E_C

    def series_value(key):
        def f(phi):
            return s.values(_xi_of_flux(spec, phi), E_C)[key]
        return f

    if name == "omega":
        return ModulatedParameter(name, series_value("omega"), _terms(s.omega, E_C))
    if name == "eta":
        return ModulatedParameter(name, series_value("eta"), _terms(s.eta, E_C))
    if name == "omega12":
        terms = _combine(_terms(s.omega, E_C), _terms(s.eta, -E_C))
        return ModulatedParameter(name, lambda phi: series_value("omega")(phi) - series_value("eta")(phi), terms)
    if name == "omega02":
        terms = _combine(_terms(s.omega, 2 * E_C), _terms(s.eta, -E_C))
        return ModulatedParameter(
            name, lambda phi: 2 * series_value("omega")(phi) - series_value("eta")(phi), terms
        )
    if name == "lambda":
        return ModulatedParameter(name, series_value("lambda"), _terms(s.lam))
    if name == "Lambda":
        return ModulatedParameter(name, series_value("Lambda"), _terms(s.Lam))
    if name == "upsilon":
        return ModulatedParameter(name, series_value("upsilon"), _terms(s.upsilon, UPSILON_PREFACTOR))
    if name == "xi":
        return ModulatedParameter(name, lambda phi: _xi_of_flux(spec, phi), ((1.0, 1.0),))

    if name in COUPLING_PARAMETERS:
        if pair is None:
            raise ValueError(f"{name} needs the coupled pair")
        fixed = params_at_flux(pair.qubit_F, 0.0, order)
        prefactor = pair.g_C / (4 * math.sqrt(fixed.xi))
        r2 = math.sqrt(2.0)
        weight, key = {
            "g": (1.0, None),
            "g11": (fixed.lam, "lambda"),
            "g12": (r2 * fixed.lam, "Lambda"),
            "g21": (r2 * fixed.Lam, "lambda"),
            "g22": (2 * fixed.Lam, "Lambda"),
        }[name]
        scale = prefactor * weight
        if key is None:
            terms = ((-0.5, scale),)
        else:
            terms = _terms(s.lam if key == "lambda" else s.Lam, scale, -0.5)

        def coupling(phi, key=key, scale=scale):
            xi = _xi_of_flux(spec, phi)
            own = 1.0 if key is None else s.values(xi)[key]
            return scale * own / np.sqrt(xi)

        return ModulatedParameter(name, coupling, terms)

    if pulse is None:
        raise ValueError(f"{name} needs the flux pulse")
    amp = pulse.omega_p * pulse.phi_tilde_p

    def drive(phi):
        xi = _xi_of_flux(spec, phi)
        vals = s.values(xi)
        slope = dphi_eff_dphi_ext(spec, phi)
        if name == "nu01":
            return amp * vals["lambda"] / (4 * np.sqrt(xi)) * slope
        if name == "nu12":
            return amp * vals["Lambda"] / (2 * np.sqrt(2 * xi)) * slope
        from scipy.special import j1

        ej, _ = effective_junction(spec, phi)
        return amp * j1(pulse.phi_tilde_p) * spec.E_J1 * spec.E_J2 / (4 * np.asarray(ej) ** 2) * vals["upsilon"]

    return ModulatedParameter(name, drive, None)


@dataclass(frozen=True)
class Waveform:
    label: str
    times: np.ndarray  # microseconds, one period starting at t = 0
    values: np.ndarray
    pulse: FluxPulse

    @property
    def tau(self):
        return self.pulse.tau(self.times)

    @property
    def grid_size(self) -> int:
        return len(self.times)


def parameter_waveform(
    spec: TransmonSpec,
    pulse: FluxPulse,
    parameter: str | ModulatedParameter,
    grid_size: int = 4096,
    *,
    order: int = DEFAULT_ORDER,
    pair: CoupledPair | None = None,
) -> Waveform:
    """Sample ``parameter`` on a uniform grid covering one modulation period."""
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    par = parameter if isinstance(parameter, ModulatedParameter) else modulated_parameter(
        spec, parameter, order=order, pair=pair, pulse=pulse
    )
    times = np.arange(grid_size) * (pulse.period / grid_size)
    flux = pulse.flux(times)
    # fail with the offending flux value rather than deep inside the series
    effective_junction(spec, flux)
    return Waveform(par.label, times, np.asarray(par(flux), dtype=float), pulse)
