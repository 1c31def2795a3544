"""Time-domain check of parametric gates: fixed-step fourth-order Magnus integration of the driven two-transmon model.

The state lives in the product of the three lowest eigenstates of each transmon
(index ``3 * F + T``).  Besides the time-dependent energies and the charge
coupling, the tunable transmon carries the nonadiabatic drive terms generated by
the moving eigenbasis.  To keep the fixed-step integrator accurate the
diagonal part is removed by the exact phase transformation
``psi_a = exp(-i Phi_a(t)) c_a`` with ``Phi_a = 2 pi int E_a``; populations are
unchanged by it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from ..coupling import CoupledPair
from ..errors import IntegrationError, PhysicsError
from ..perturbation import transmon_series
from ..series import DEFAULT_ORDER
from ..tunable import dphi_eff_dphi_ext, effective_junction, params_at_flux
from .fourier import expansion_of
from .gates import activation_frequency
from .pulse import FluxPulse

LEVELS = 3
NORM_TOLERANCE = 1e-6
STEPS_PER_PERIOD = 50

GATE_STATES = {
    "iswap": ((1, 0), (0, 1)),
    "cz02": ((1, 1), (0, 2)),
    "cz20": ((1, 1), (2, 0)),
    "bellrabi": ((0, 0), (1, 1)),
}


def _ladder_y(i: int, j: int) -> np.ndarray:
    """``i(|j><i| - |i><j|)`` on three levels (``i < j``)."""
    y = np.zeros((LEVELS, LEVELS), dtype=complex)
    y[j, i] = 1j
    y[i, j] = -1j
    return y


SIGMA_Y, S_Y, BIG_S_Y = _ladder_y(0, 1), _ladder_y(1, 2), _ladder_y(0, 2)
EYE = np.eye(LEVELS)


def index(f: int, t: int) -> int:
    return LEVELS * f + t


@dataclass(frozen=True)
class SimulationResult:
    times: np.ndarray
    populations: np.ndarray  # (len(times), 9)
    initial: tuple[int, int]
    target: tuple[int, int]
    rabi_frequency: float  # fitted, MHz
    predicted_frequency: float  # 2 |g_eff|, MHz
    fit_amplitude: float
    norm_drift: float
    step: float

    def population(self, f: int, t: int) -> np.ndarray:
        return self.populations[:, index(f, t)]

    @property
    def resonant_frequency(self) -> float:
        """On-resonance rate ``f sqrt(A)``: a detuned two-level oscillation has
        ``A = Omega^2 / (Omega^2 + delta^2)`` and ``f = sqrt(Omega^2 + delta^2)``."""
        return self.rabi_frequency * math.sqrt(min(max(self.fit_amplitude, 0.0), 1.0))

    @property
    def relative_error(self) -> float:
        return abs(self.resonant_frequency - self.predicted_frequency) / self.predicted_frequency


def max_step(pair: CoupledPair, order: int = DEFAULT_ORDER) -> float:
    """Largest allowed step (microseconds): 1/50 of the fastest qubit period."""
    fixed = params_at_flux(pair.qubit_F, 0.0, order)
    # E_J_eff peaks at phi_ext = 0 so the tunable qubit is fastest there
    fast = params_at_flux(pair.qubit_T, 0.0, order)
    return 1.0 / (STEPS_PER_PERIOD * max(fixed.omega, fast.omega))


class _Model:
    """Time-dependent coefficients of the Hamiltonian, vectorised over a time grid."""

    def __init__(self, pair: CoupledPair, pulse: FluxPulse, order: int, K_max: int = 120, grid: int = 8192):
        self.pair, self.pulse = pair, pulse
        self.series = transmon_series(order)
        fixed = params_at_flux(pair.qubit_F, 0.0, order)
        self.fixed = fixed
        self.E_F = np.array([0.0, fixed.omega, 2 * fixed.omega - fixed.eta])
        self.c_F = fixed.lam * SIGMA_Y + math.sqrt(2) * fixed.Lam * S_Y
        self.g_prefactor = pair.g_C / (4 * math.sqrt(fixed.xi))
        spec = pair.qubit_T
        # Fourier forms of the tunable energies give their time integrals in closed form
        self.omega01 = expansion_of(spec, pulse, "omega", K_max, grid, order=order)
        self.omega02 = expansion_of(spec, pulse, "omega02", K_max, grid, order=order)

    def _integral(self, expansion, t):
        p = self.pulse
        tau = p.tau(t)
        out = expansion.mean * t
        for k in range(1, expansion.K_max + 1):
            c = expansion.coefficient(k)
            if c:
                out = out + c / (2 * math.pi * k * p.omega_p) * (np.sin(k * tau) - math.sin(k * p.theta_p))
        return out

    def phases(self, t):
        """``Phi_a(t)`` for all nine product states, shape ``(len(t), 9)``."""
        phi_T = np.stack([np.zeros_like(t), self._integral(self.omega01, t), self._integral(self.omega02, t)], axis=1)
        phi_F = np.multiply.outer(t, self.E_F)
        return 2 * math.pi * (phi_F[:, :, None] + phi_T[:, None, :]).reshape(len(t), LEVELS * LEVELS)

    def coefficients(self, t):
        """Scalars multiplying the off-diagonal operators at times ``t`` (MHz)."""
        spec, p = self.pair.qubit_T, self.pulse
        phi = p.flux(t)
        ej, _ = effective_junction(spec, phi)
        xi = np.sqrt(2 * spec.E_C / np.asarray(ej))
        vals = self.series.values(xi)
        g = self.g_prefactor / np.sqrt(xi)
        rate = p.flux_rate(t) / (2 * math.pi)  # d phi_ext / dt in cycles per microsecond
        phi_eff_rate = dphi_eff_dphi_ext(spec, phi) * rate
        log_xi_rate = 0.5 * spec.E_J1 * spec.E_J2 * np.sin(phi) * rate / np.asarray(ej) ** 2
        return {
            "coupling_sigma": g * vals["lambda"],
            "coupling_s": g * math.sqrt(2) * vals["Lambda"],
            "drive_sigma": -phi_eff_rate * vals["lambda"] / (2 * np.sqrt(xi)),
            "drive_s": -phi_eff_rate * vals["Lambda"] / np.sqrt(2 * xi),
            "drive_S": -log_xi_rate * vals["upsilon"],
        }

    def operators(self):
        return {
            "coupling_sigma": np.kron(self.c_F, SIGMA_Y),
            "coupling_s": np.kron(self.c_F, S_Y),
            "drive_sigma": np.kron(EYE, SIGMA_Y),
            "drive_s": np.kron(EYE, S_Y),
            "drive_S": np.kron(EYE, BIG_S_Y),
        }


def _fit_rabi(times, population, guess):
    """Least-squares ``A sin^2(pi f t + phase)``; the start frequency comes from the spectrum."""
    centred = population - population.mean()
    pad = 16 * len(centred)
    spectrum = np.abs(np.fft.rfft(centred * np.hanning(len(centred)), pad))
    freqs = np.fft.rfftfreq(pad, times[1] - times[0])
    spectrum[freqs < 0.25 * guess] = 0.0
    f0 = float(freqs[np.argmax(spectrum)]) if np.any(spectrum) else guess

    def model(t, a, f, ph):
        return a * np.sin(np.pi * f * t + ph) ** 2

    popt, _ = curve_fit(model, times, population, p0=(max(population.max(), 1e-3), f0, 0.0), maxfev=20000)
    return abs(popt[1]), popt[0]


def simulate_gate(
    pair: CoupledPair,
    pulse: FluxPulse | None,
    kind: str,
    duration: float | None = None,
    step: float | None = None,
    *,
    amplitude: float | None = None,
    order: int = DEFAULT_ORDER,
    record_every: int = 10,
) -> SimulationResult:
    """Integrate the gate dynamics from the gate's initial state and fit the Rabi rate.

    Either give ``pulse`` (its ``omega_p`` is used as is) or ``amplitude`` to place
    the modulation at the activation frequency of ``kind``.  ``duration`` defaults
    to three predicted Rabi periods; times are microseconds.
    """
    if kind not in GATE_STATES:
        raise ValueError(f"unknown gate kind {kind!r}")
    point = None
    if pulse is None:
        if amplitude is None:
            raise ValueError("give a pulse or an amplitude")
        point = activation_frequency(pair, amplitude, kind, order=order)
        pulse = FluxPulse(pair.phi_park, amplitude, point.omega_p, 0.0)
    else:
        pulse = FluxPulse(pair.phi_park, pulse.phi_tilde_p, pulse.omega_p, pulse.theta_p)
        if pair.g_C > 0 and pulse.phi_tilde_p > 0:
            point = activation_frequency(pair, pulse.phi_tilde_p, kind, theta_p=pulse.theta_p, order=order)
    predicted = 2 * abs(point.g_eff) if point is not None else 0.0

    limit = max_step(pair, order)
    if step is None:
        step = limit
    if step > limit * (1 + 1e-12):
        raise IntegrationError(f"step {step:.3g} us exceeds 1/50 of the fastest qubit period ({limit:.3g} us)")
    if duration is None:
        if predicted <= 0:
            raise ValueError("duration is required when no Rabi oscillation is predicted")
        duration = 3.0 / predicted
    if predicted > 0 and duration < 2.0 / predicted * (1 - 1e-9):
        raise ValueError(f"duration must cover two predicted Rabi periods ({2.0 / predicted:.4g} us)")

    steps = int(math.ceil(duration / step))
    step = duration / steps
    model = _Model(pair, pulse, order)
    # two Gauss-Legendre nodes per step for the fourth-order Magnus propagator
    offsets = np.array([0.5 - math.sqrt(3) / 6, 0.5 + math.sqrt(3) / 6]) * step
    grid = (np.arange(steps)[:, None] * step + offsets[None, :]).ravel()
    phases = model.phases(grid)
    coeffs = model.coefficients(grid)
    ops = model.operators()
    names = list(ops)
    op_stack = np.stack([ops[k] for k in names])  # (m, 9, 9)
    coeff_stack = np.stack([coeffs[k] for k in names], axis=1)  # (2N, m)

    initial, target = GATE_STATES[kind]
    c = np.zeros(LEVELS * LEVELS, dtype=complex)
    c[index(*initial)] = 1.0
    record = [np.abs(c) ** 2]
    rec_times = [0.0]
    h = step
    chunk = 2048
    for start in range(0, steps, chunk):
        stop = min(start + chunk, steps)
        sl = slice(2 * start, 2 * stop)
        rot = np.exp(1j * phases[sl])
        v = np.einsum("tm,mab->tab", coeff_stack[sl], op_stack)
        # interaction-frame Hamiltonian (Hermitian): e^{i Phi} V e^{-i Phi}
        hv = rot[:, :, None] * v * np.conj(rot)[:, None, :]
        h1, h2 = hv[0::2], hv[1::2]
        # Omega = -i M with M Hermitian, so the propagator is exactly unitary
        m = (math.pi * h) * (h1 + h2) + (-1j * math.sqrt(3) * math.pi**2 * h * h / 3) * (h2 @ h1 - h1 @ h2)
        w, vec = np.linalg.eigh(m)
        props = (vec * np.exp(-1j * w)[:, None, :]) @ np.conj(np.swapaxes(vec, 1, 2))
        for s in range(start, stop):
            c = props[s - start] @ c
            if (s + 1) % record_every == 0 or s == steps - 1:
                record.append(np.abs(c) ** 2)
                rec_times.append((s + 1) * h)
    populations = np.array(record)
    drift = float(np.max(np.abs(populations.sum(axis=1) - 1.0)))
    if drift > NORM_TOLERANCE:
        raise IntegrationError(f"norm drift {drift:.3g} exceeds {NORM_TOLERANCE}; reduce the step")
    times = np.array(rec_times)
    rabi, amp = 0.0, 0.0
    if predicted > 0:
        rabi, amp = _fit_rabi(times, populations[:, index(*target)], predicted)
    return SimulationResult(times, populations, initial, target, rabi, predicted, amp, drift, step)


def trajectory_csv(result: SimulationResult) -> str:
    from .gates import format_value

    labels = [f"p{f}{t}" for f in range(LEVELS) for t in range(LEVELS)]
    lines = [",".join(["time_us"] + labels)]
    for t, row in zip(result.times, result.populations):
        lines.append(",".join([format_value(t)] + [format_value(v) for v in row]))
    return "\n".join(lines) + "\n"
