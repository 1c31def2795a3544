"""Parametric gate operating points: sideband couplings, drives and activation frequencies."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import jv

from ..coupling import CoupledPair
from ..errors import PhysicsError
from ..series import DEFAULT_ORDER
from ..tunable import params_at_flux
from .fourier import DEFAULT_K_MAX, FourierExpansion, expansion_of, sideband_weights
from .pulse import FluxPulse

GATE_KINDS = ("iswap", "cz02", "cz20", "bellrabi")

# coupling channel -> transition frequency of the tunable qubit that dresses it
CHANNEL_FREQUENCY = {"g11": "omega", "g21": "omega", "g12": "omega12", "g22": "omega12"}
GATE_CHANNEL = {"iswap": "g11", "cz02": "g12", "cz20": "g21", "bellrabi": "g11"}


def _even_sideband(freq: FourierExpansion, omega_p: float, n: int) -> float:
    """Constrained Bessel product over the even harmonics, resonant at ``2 n omega_p``."""
    if not omega_p > 0:
        raise PhysicsError("omega_p must be positive")
    args = {k // 2: freq.coefficient(k) / (k * omega_p) for k in range(2, freq.K_max + 1, 2)}
    offset, weights = sideband_weights(args)
    idx = n + offset
    return float(weights[idx]) if 0 <= idx < len(weights) else 0.0


def _warn_off_sweet_spot(pulse: FluxPulse):
    if not pulse.at_sweet_spot:
        warnings.warn(
            "parking away from a sweet spot: odd harmonics are dropped, prediction is experimental",
            RuntimeWarning,
        )


@dataclass(frozen=True)
class EffectiveCoupling:
    channel: str
    n: int
    g_bar: float
    g_tilde: float
    leading: float  # g_bar times the all-harmonics Bessel product
    correction: float  # contribution of the modulated part of the coupling
    small_amplitude: float  # g_bar J_n(omega_tilde / (2 omega_p))

    @property
    def value(self) -> float:
        return self.leading + self.correction

    @property
    def ratio(self) -> float:
        """Bessel renormalization of the mean coupling, ``leading / g_bar``."""
        return self.leading / self.g_bar if self.g_bar else 0.0


def coupling_from_expansions(
    g: FourierExpansion, freq: FourierExpansion, omega_p: float, n: int, channel: str = ""
) -> EffectiveCoupling:
    """Coefficient of ``exp(2 i n tau)`` in ``g(t) exp(i int omega)`` (even harmonics).

    Each harmonic ``g_2k cos(2k tau)`` of the coupling shifts the sideband index by
    ``+-k``, so the correction is ``sum_k g_2k / 2 (E_{n-k} + E_{n+k})`` with ``E`` the
    Bessel products of the transition frequency; its ``k = 1`` term in the
    single-harmonic limit is ``g_tilde / 2 (J_{n-1} + J_{n+1})``.
    """
    g_bar, g_tilde = g.mean, g.second
    x = freq.second / (2 * omega_p)
    args = {k // 2: freq.coefficient(k) / (k * omega_p) for k in range(2, freq.K_max + 1, 2)}
    offset, weights = sideband_weights(args)

    def e(m):
        idx = m + offset
        return float(weights[idx]) if 0 <= idx < len(weights) else 0.0

    leading = g_bar * e(n)
    correction = 0.0
    for k in range(1, g.K_max // 2 + 1):
        gk = g.coefficient(2 * k)
        if gk:
            correction += 0.5 * gk * (e(n - k) + e(n + k))
    return EffectiveCoupling(channel, n, g_bar, g_tilde, leading, correction, g_bar * float(jv(n, x)))


def effective_coupling(
    pair: CoupledPair,
    pulse: FluxPulse,
    channel: str,
    n: int,
    *,
    K_max: int = DEFAULT_K_MAX,
    order: int = DEFAULT_ORDER,
    grid_size: int = 4096,
) -> EffectiveCoupling:
    """Sideband-``n`` coupling of channel ``g11 | g12 | g21 | g22`` (MHz)."""
    if channel not in CHANNEL_FREQUENCY:
        raise ValueError(f"unknown channel {channel!r}")
    if not pulse.omega_p > 0:
        raise PhysicsError("omega_p must be positive")
    _warn_off_sweet_spot(pulse)
    spec = pair.qubit_T
    pulse = FluxPulse(pair.phi_park, pulse.phi_tilde_p, pulse.omega_p, pulse.theta_p)
    g = expansion_of(spec, pulse, channel, K_max, grid_size, order=order, pair=pair)
    freq = expansion_of(spec, pulse, CHANNEL_FREQUENCY[channel], K_max, grid_size, order=order)
    return coupling_from_expansions(g, freq, pulse.omega_p, n, channel)


def drive_amplitude(nu: FourierExpansion, freq: FourierExpansion, omega_p: float, n: int, kind: str) -> float:
    """Sideband amplitude of a nonadiabatic drive ``2 nu(t) sin(j tau)``.

    ``kind`` is ``"single"`` (one-photon transitions 0-1 and 1-2, ``j = 1``, the
    ``(2n+1) omega_p`` sideband) or ``"double"`` (0-2, ``j = 2``, the ``2 n omega_p``
    sideband).  ``nu`` enters through its mean and second harmonic only.
    """
    nu_bar, nu_tilde = nu.mean, nu.second

    def e(m):
        return _even_sideband(freq, omega_p, m)

    if kind == "single":
        return (nu_bar - nu_tilde / 2) * (e(n) - e(n + 1)) + nu_tilde / 2 * (e(n - 1) - e(n + 2))
    if kind == "double":
        return nu_bar * (e(n - 1) - e(n + 1))
    raise ValueError(f"unknown drive kind {kind!r}")


@dataclass(frozen=True)
class Drives:
    Omega_01: float
    Omega_12: float
    Omega_02: float


def effective_drives(
    pair: CoupledPair,
    pulse: FluxPulse,
    n: int,
    *,
    K_max: int = DEFAULT_K_MAX,
    order: int = DEFAULT_ORDER,
    grid_size: int = 4096,
) -> Drives:
    spec = pair.qubit_T
    pulse = FluxPulse(pair.phi_park, pulse.phi_tilde_p, pulse.omega_p, pulse.theta_p)
    if pulse.phi_tilde_p == 0:
        return Drives(0.0, 0.0, 0.0)

    def exp(name):
        return expansion_of(spec, pulse, name, K_max, grid_size, order=order)

    omega01, omega12, omega02 = exp("omega"), exp("omega12"), exp("omega02")
    return Drives(
        drive_amplitude(exp("nu01"), omega01, pulse.omega_p, n, "single"),
        drive_amplitude(exp("nu12"), omega12, pulse.omega_p, n, "single"),
        drive_amplitude(exp("nu02"), omega02, pulse.omega_p, n, "double"),
    )


def phase_beta(expansion: FourierExpansion, pulse: FluxPulse, n: int) -> float:
    """``beta = 2 n theta_p - sum_k f_2k / (2k omega_p) sin(2 k theta_p)`` for a transition frequency."""
    total = 2 * n * pulse.theta_p
    for k in range(2, expansion.K_max + 1, 2):
        total -= expansion.coefficient(k) / (k * pulse.omega_p) * math.sin(k * pulse.theta_p)
    return total


@dataclass(frozen=True)
class GateOperatingPoint:
    kind: str
    omega_p: float
    detuning: float  # resonance condition 2 n omega_p = detuning
    n: int
    coupling: EffectiveCoupling
    beta: float

    @property
    def g_eff(self) -> float:
        return self.coupling.value

    @property
    def ratio(self) -> float:
        return self.coupling.ratio

    @property
    def pulse_for(self):
        return lambda base: FluxPulse(base.phi_bar_p, base.phi_tilde_p, self.omega_p, base.theta_p)


def gate_detuning(pair: CoupledPair, amplitude: float, kind: str, *, order: int = DEFAULT_ORDER,
                  K_max: int = DEFAULT_K_MAX, grid_size: int = 4096) -> float:
    """Frequency that the ``2 n omega_p`` sideband has to bridge for ``kind`` (MHz, signed)."""
    if kind not in GATE_KINDS:
        raise ValueError(f"unknown gate kind {kind!r}; choose from {', '.join(GATE_KINDS)}")
    fixed = params_at_flux(pair.qubit_F, 0.0, order)
    # the averages do not depend on omega_p
    probe = FluxPulse(pair.phi_park, amplitude, 1.0, 0.0)
    omega_T = expansion_of(pair.qubit_T, probe, "omega", K_max, grid_size, order=order).mean
    delta = fixed.omega - omega_T
    if kind == "iswap":
        return delta
    if kind == "cz02":
        eta_T = expansion_of(pair.qubit_T, probe, "eta", K_max, grid_size, order=order).mean
        return delta + eta_T
    if kind == "cz20":
        return delta - fixed.eta
    # |00> <-> |11> needs the counter-rotating sideband 2 n omega_p = -Sigma
    return -(fixed.omega + omega_T)


def activation_frequency(
    pair: CoupledPair,
    amplitude: float,
    kind: str,
    *,
    theta_p: float = 0.0,
    order: int = DEFAULT_ORDER,
    K_max: int = DEFAULT_K_MAX,
    grid_size: int = 4096,
) -> GateOperatingPoint:
    """Modulation frequency and coupling that activate ``kind`` at flux amplitude ``amplitude``.

    The first sideband on the side of the detuning is used, ``n = sign(detuning)``,
    so that ``2 n omega_p`` equals the detuning.
    """
    if not math.isfinite(amplitude) or amplitude < 0:
        raise PhysicsError(f"invalid modulation amplitude {amplitude}")
    if abs(math.sin(pair.phi_park)) > 1e-12:
        warnings.warn("parking is not at a sweet spot", RuntimeWarning)
    detuning = gate_detuning(pair, amplitude, kind, order=order, K_max=K_max, grid_size=grid_size)
    omega_p = abs(detuning) / 2
    if not omega_p > 0:
        raise PhysicsError("transition not reachable at this amplitude (required omega_p <= 0)")
    n = 1 if detuning > 0 else -1
    pulse = FluxPulse(pair.phi_park, amplitude, omega_p, theta_p)
    channel = GATE_CHANNEL[kind]
    coupling = effective_coupling(pair, pulse, channel, n, K_max=K_max, order=order, grid_size=grid_size)
    freq = expansion_of(pair.qubit_T, pulse, CHANNEL_FREQUENCY[channel], K_max, grid_size, order=order)
    return GateOperatingPoint(kind, omega_p, detuning, n, coupling, phase_beta(freq, pulse, n))


SWEEP_HEADER = ("amplitude", "omega_p_iswap", "omega_p_cz02", "omega_p_cz20", "ratio_iswap", "ratio_cz02", "ratio_cz20")


def gate_sweep(pair: CoupledPair, amplitudes, **kwargs) -> np.ndarray:
    """Rows of ``SWEEP_HEADER`` over modulation amplitudes."""
    rows = []
    for amp in amplitudes:
        points = [activation_frequency(pair, float(amp), kind, **kwargs) for kind in ("iswap", "cz02", "cz20")]
        rows.append([float(amp)] + [p.omega_p for p in points] + [p.ratio for p in points])
    return np.array(rows)


def format_value(x: float) -> str:
    # adding 0.0 turns -0.0 into 0.0
    return f"{x + 0.0:.12g}"


def sweep_csv(rows: np.ndarray, header=SWEEP_HEADER) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(float(v)) for v in row])
    return buf.getvalue()


def local_maxima(x: np.ndarray, y: np.ndarray) -> list[tuple[float, float]]:
    """Interior local maxima of ``y(x)`` refined by a parabola through the three bracketing samples."""
    out = []
    for i in range(1, len(y) - 1):
        if y[i] > y[i - 1] and y[i] >= y[i + 1]:
            denom = y[i - 1] - 2 * y[i] + y[i + 1]
            shift = 0.5 * (y[i - 1] - y[i + 1]) / denom if denom else 0.0
            h = x[i + 1] - x[i]
            out.append((x[i] + shift * h, y[i] - 0.25 * (y[i - 1] - y[i + 1]) * shift))
    return out
