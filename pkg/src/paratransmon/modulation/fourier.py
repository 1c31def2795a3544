"""Harmonic content of modulated parameters and of their integrated phase."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import hyp2f1, jv

from ..errors import PhysicsError
from ..series import DEFAULT_ORDER
from ..tunable import TransmonSpec
from .pulse import FluxPulse, ModulatedParameter, Waveform, modulated_parameter

DEFAULT_K_MAX = 50
BESSEL_CUTOFF = 1e-12


class AliasingError(ValueError):
    pass


class ConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class FourierExpansion:
    """``f(t) = sum_k coefficients[k] cos(k tau)`` with ``tau = 2 pi omega_p t + theta_p``."""

    label: str
    coefficients: np.ndarray
    pulse: FluxPulse
    sweet_spot: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def K_max(self) -> int:
        return len(self.coefficients) - 1

    @property
    def mean(self) -> float:
        return float(self.coefficients[0])

    @property
    def second(self) -> float:
        return float(self.coefficients[2]) if self.K_max >= 2 else 0.0

    def coefficient(self, k: int) -> float:
        return float(self.coefficients[k]) if 0 <= k <= self.K_max else 0.0

    def reconstruct(self, t):
        tau = self.pulse.tau(t)
        k = np.arange(self.K_max + 1)
        return np.cos(np.multiply.outer(tau, k)) @ self.coefficients

    def even_only(self) -> "FourierExpansion":
        c = np.array(self.coefficients, dtype=float)
        c[1::2] = 0.0
        return FourierExpansion(self.label, c, self.pulse, self.sweet_spot, dict(self.meta))


def fourier_coefficients_quadrature(waveform: Waveform, K_max: int = DEFAULT_K_MAX) -> FourierExpansion:
    """Cosine projection of a one-period sampled waveform (trapezoid rule, spectrally accurate)."""
    n = waveform.grid_size
    if n < 8 * K_max:
        raise AliasingError(f"grid_size {n} < 8 * K_max = {8 * K_max}")
    spectrum = np.fft.rfft(waveform.values) / n
    # the samples start at t = 0, i.e. at tau = theta_p
    k_all = np.arange(len(spectrum))
    spectrum = spectrum * np.exp(-1j * k_all * waveform.pulse.theta_p)
    tail = np.abs(spectrum[n // 4:])
    scale = max(np.max(np.abs(spectrum)), 1e-300)
    if tail.size and np.max(tail) > 1e-10 * scale:
        raise AliasingError(
            f"harmonics near Nyquist reach {np.max(tail) / scale:.2e} of the peak, refine the grid"
        )
    coeffs = spectrum.real[: K_max + 1].copy()
    coeffs[1:] *= 2
    return FourierExpansion(
        waveform.label, coeffs, waveform.pulse, waveform.pulse.at_sweet_spot, {"method": "quadrature", "grid": n}
    )


def expansion_of(
    spec: TransmonSpec,
    pulse: FluxPulse,
    parameter: str | ModulatedParameter,
    K_max: int = DEFAULT_K_MAX,
    grid_size: int = 4096,
    **kwargs,
) -> FourierExpansion:
    from .pulse import parameter_waveform

    return fourier_coefficients_quadrature(parameter_waveform(spec, pulse, parameter, grid_size, **kwargs), K_max)


def _junction_moments(spec: TransmonSpec):
    # Xi = xi^-4 = Xi_bar + Xi_tilde cos(phi_ext)
    xi_bar_4 = (spec.E_J1**2 + spec.E_J2**2) / (4 * spec.E_C**2)
    xi_tilde_4 = spec.E_J1 * spec.E_J2 / (2 * spec.E_C**2)
    return xi_bar_4, xi_tilde_4


def _jacobi_anger(k_range: np.ndarray, m: int, pulse: FluxPulse) -> np.ndarray:
    """Cosine-series coefficients of ``cos(m phi_ext(tau))`` for harmonics ``k_range``."""
    k = k_range
    weight = np.where(k == 0, 1.0, 2.0)
    return weight * np.cos(m * pulse.phi_bar_p + k * math.pi / 2) * jv(k, m * pulse.phi_tilde_p)


def fourier_coefficients_analytic(
    spec: TransmonSpec,
    pulse: FluxPulse,
    parameter: str | ModulatedParameter,
    K_max: int = DEFAULT_K_MAX,
    N_max: int = 400,
    *,
    method: str = "hypergeometric",
    tolerance: float = 1e-10,
    order: int = DEFAULT_ORDER,
    pair=None,
) -> FourierExpansion:
    """Harmonics from the power-series form ``f = sum_p c_p xi^p`` with ``xi^-4`` linear in ``cos phi_ext``.

    ``method="binomial"`` expands ``(1 + X cos phi)^(-p/4)`` in powers of ``cos phi``;
    ``method="hypergeometric"`` uses the closed-form cosine coefficients of the same
    function (``X`` is the SQUID modulation depth ``Xi_tilde / Xi_bar``).
    """
    par = parameter if isinstance(parameter, ModulatedParameter) else modulated_parameter(
        spec, parameter, order=order, pair=pair, pulse=pulse
    )
    if par.power_terms is None:
        raise ValueError(f"{par.label} is not a power series in xi; use the quadrature route")
    if method not in ("binomial", "hypergeometric"):
        raise ValueError(f"unknown method {method!r}")
    xb4, xt4 = _junction_moments(spec)
    X = xt4 / xb4
    xi_bar = xb4 ** -0.25
    powers = np.array([p for p, _ in par.power_terms])
    scaled = np.array([c for _, c in par.power_terms]) * xi_bar**powers
    k = np.arange(K_max + 1)
    meta = {"method": method, "X": X}
    if method == "hypergeometric" and X * X >= 1:
        warnings.warn("X^2 >= 1: hypergeometric series diverges, using the binomial route", RuntimeWarning)
        method = "binomial"
        meta["method"] = "binomial (fallback)"

    total = np.zeros(K_max + 1)
    converged = False
    small_run = 0
    term_size = float("nan")
    # ratio[p] = (p/4)_n / n!, updated in place to avoid factorial overflow
    ratio = np.ones_like(powers)
    for n in range(N_max + 1):
        if n:
            ratio = ratio * (powers / 4 + n - 1) / n
        if method == "binomial":
            # Xi_tilde^n / n! times the n-th derivative of Xi^(-p/4) at Xi_bar
            a_n = float(np.sum(scaled * ratio)) * (-X) ** n
            s_kn = np.zeros(K_max + 1)
            for j in range(n // 2 + 1):
                weight = (1.0 if 2 * j == n else 2.0) * math.comb(n, j) / 2.0**n
                s_kn += weight * _jacobi_anger(k, n - 2 * j, pulse)
            term = a_n * s_kn
            size = abs(a_n)
        else:
            lead = np.sum(scaled * ratio * hyp2f1(n / 2 + powers / 8, (n + 1) / 2 + powers / 8, n + 1, X * X))
            c_n = (1.0 if n == 0 else 2.0) * (-X / 2) ** n * float(lead)
            term = c_n * _jacobi_anger(k, n, pulse)
            size = abs(c_n)
        total += term
        term_size = size
        ref = max(np.max(np.abs(total)), 1e-300)
        if size < tolerance * ref * (1 - min(abs(X), 0.999)):
            small_run += 1
            if small_run >= 3:
                converged = True
                break
        else:
            small_run = 0
    if not converged:
        raise ConvergenceError(
            f"analytic Fourier series not converged after N_max={N_max} terms (last term {term_size:.3e})"
        )
    meta["terms"] = n + 1
    meta["tail_estimate"] = term_size * abs(X) / (1 - min(abs(X), 0.999))
    return FourierExpansion(par.label, total, pulse, pulse.at_sweet_spot, meta)


def _bessel_block(x: float, cutoff: float = BESSEL_CUTOFF) -> tuple[int, np.ndarray]:
    """``J_m(x)`` for ``|m| <= L`` with the dropped weight below ``cutoff``."""
    ax = abs(x)
    L = int(ax) + 1
    while True:
        m = np.arange(-L, L + 1)
        vals = jv(m, x)
        if abs(vals[0]) + abs(vals[-1]) < cutoff * 1e-2 and L > ax:
            return L, vals
        L += max(4, L // 4)


@dataclass(frozen=True)
class PhaseExpansion:
    """``exp(i int f) = exp(i (f_0 t - Theta_p)) sum_n eps_n exp(i n tau)`` (angles in radians)."""

    Theta_p: float
    eps: np.ndarray
    n_max: int
    f0: float

    def epsilon(self, n: int) -> float:
        if abs(n) > self.n_max:
            return 0.0
        return float(self.eps[n + self.n_max])

    def indices(self):
        return np.arange(-self.n_max, self.n_max + 1)


def sideband_weights(arguments: dict[int, float], cutoff: float = BESSEL_CUTOFF) -> tuple[int, np.ndarray]:
    """All-orders Bessel products: ``sum over sum_k k l_k = n of prod_k J_{l_k}(a_k)``.

    Computed as a discrete convolution of one Bessel comb per harmonic, which is
    the same constrained sum the depth-first enumeration would visit.  Returns
    ``(offset, weights)`` with ``weights[n + offset]``.
    """
    weights = np.array([1.0])
    offset = 0
    for k in sorted(arguments):
        a = arguments[k]
        if abs(a) <= cutoff:
            continue
        L, vals = _bessel_block(a, cutoff)
        comb = np.zeros(2 * L * k + 1)
        comb[::k] = vals
        weights = np.convolve(weights, comb)
        offset += L * k
    return offset, weights


def integrated_phase_expansion(
    f: FourierExpansion, pulse: FluxPulse | None = None, n_max: int | None = None
) -> PhaseExpansion:
    pulse = pulse or f.pulse
    if not pulse.omega_p > 0:
        raise PhysicsError("omega_p must be positive")
    args = {k: f.coefficient(k) / (k * pulse.omega_p) for k in range(1, f.K_max + 1)}
    theta = sum(a * math.sin(k * pulse.theta_p) for k, a in args.items())
    offset, weights = sideband_weights(args)
    if n_max is None:
        n_max = offset
    eps = np.zeros(2 * n_max + 1)
    for n in range(-n_max, n_max + 1):
        idx = n + offset
        if 0 <= idx < len(weights):
            eps[n + n_max] = weights[idx]
    return PhaseExpansion(theta, eps, n_max, f.mean)
