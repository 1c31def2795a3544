"""Reproduction checks shared by ``paratransmon verify`` and the acceptance tests.

Each check returns a :class:`Check` with a one-line verdict.  Thresholds are
the published ones; nothing here is tuned to make a check pass.
"""

from __future__ import annotations

import json
import math
import time
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .coupling import CoupledPair, dispersive_shifts, g_C_for
from .modulation.fourier import (
    expansion_of,
    fourier_coefficients_analytic,
    integrated_phase_expansion,
)
from .modulation.gates import gate_sweep, local_maxima
from .modulation.pulse import FluxPulse, modulated_parameter
from .modulation.simulate import simulate_gate
from .oracle import build_single, build_transmon, chi_numeric, coupled_levels, diagonalize
from .perturbation import diagonalization_operator, transmon_series
from .tunable import TransmonSpec, params_at_flux

KHZ = 1e-3  # MHz

FIG2_DEVICE = dict(E_C=200.0, xi=0.2)
FIG4_DEVICE = TransmonSpec.from_xi_range(200.0, 0.16, 0.2, "fig4")
FIG5_PAIR = (TransmonSpec.fixed(200.0, 0.18, "q1"), TransmonSpec.fixed(200.0, 0.175, "q2"))
FIG5_COUPLINGS = (1.0, 2.0, 5.0, 10.0, 15.0, 20.0)  # g in MHz
FIG6_FIXED = TransmonSpec.fixed(200.0, 0.21, "F")
FIG6_TUNABLE = TransmonSpec.from_xi_range(190.0, 0.16, 0.2, "T")
FIG6_G_C = 5.0  # MHz; the ratio curves do not depend on it
FIG6_TARGETS = {"iswap": 0.62, "cz02": 0.73, "cz20": 0.41}
FIG6_AMPLITUDES = np.round(np.arange(0.05, 5.0 + 1e-9, 0.05), 10)
TRUNCATION_XI = (0.1, 0.15, 0.2, 0.25)


@dataclass(frozen=True)
class Check:
    key: str
    title: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.key} {self.title}: {self.detail}"


def _data(name: str) -> dict:
    return json.loads(resources.files("paratransmon").joinpath("data", name).read_text())


def _fraction(pair) -> Fraction:
    return Fraction(int(pair[0]), int(pair[1]))


def check_series_exact() -> Check:
    start = time.perf_counter()
    s = transmon_series(25)
    elapsed = time.perf_counter() - start
    printed = _data("series_order25.json")["series"]
    # printed brackets: omega/E_C = 4/xi - [...], eta/E_C = [...], lambda = 1 - [...],
    # Lambda = 1 - [...], upsilon = -sqrt2 [...]
    computed = {
        "omega": lambda k: -s.omega.coeff(k),
        "eta": lambda k: s.eta.coeff(k),
        "lambda": lambda k: -s.lam.coeff(k),
        "Lambda": lambda k: -s.Lam.coeff(k),
        "upsilon": lambda k: s.upsilon.coeff(k),
    }
    mismatches, total = [], 0
    for name, table in printed.items():
        for k, value in table.items():
            total += 1
            if computed[name](int(k)) != _fraction(value):
                mismatches.append(f"{name}[{k}]")
    ok = not mismatches and elapsed < 300
    detail = f"{total - len(mismatches)}/{total} rationals equal, derivation {elapsed:.1f} s"
    if mismatches:
        detail += "; mismatches " + ", ".join(mismatches[:8])
    return Check("1", "exact series coefficients", ok, detail)


def check_eigenstates() -> Check:
    printed = _data("diagonalization_operator.json")["matrices"]
    worst = 0.0
    for order, rows in printed.items():
        ref = np.array([[float(x) for x in row] for row in rows])
        got = diagonalization_operator(4, int(order), ref.shape[0])
        worst = max(worst, float(np.max(np.abs(got - ref))))
    return Check("2", "eigenstate corrections vs printed matrices", worst <= 1e-12, f"max deviation {worst:.2e}")


def _oracle_levels(E_C: float, E_J: float, dimension: int = 30) -> tuple[float, float]:
    ev = diagonalize(build_single(E_C, E_J, dimension)).eigenvalues
    return ev[1] - ev[0], 2 * ev[1] - ev[0] - ev[2]


def check_fig2() -> Check:
    E_C, xi = FIG2_DEVICE["E_C"], FIG2_DEVICE["xi"]
    w_num, eta_num = _oracle_levels(E_C, 2 * E_C / xi**2)
    s = transmon_series(25)
    errors = []
    for p in range(1, 26):
        v = s.truncate(p).values(xi, E_C)
        errors.append((p, abs(v["omega"] - w_num), abs(v["eta"] - eta_num)))
    late = [e for e in errors if e[0] >= 20]
    below = all(ew < KHZ and ee < KHZ for _, ew, ee in late)
    decreasing = all(b[1] < a[1] and b[2] < a[2] for a, b in zip(errors, errors[1:]))
    v = s.values(xi, E_C)
    rounded = round(v["omega"]) == 3788 and round(v["eta"]) == 230
    ok = below and decreasing and rounded
    return Check(
        "3",
        "single transmon at xi=0.2 vs oracle",
        ok,
        f"omega={v['omega']:.3f} eta={v['eta']:.3f} MHz; order-20/25 errors "
        f"{late[0][1] / KHZ:.2e}/{late[-1][1] / KHZ:.2e} kHz (omega), "
        f"{late[0][2] / KHZ:.2e}/{late[-1][2] / KHZ:.2e} kHz (eta); monotone decrease: {decreasing}",
    )


def check_fig4() -> Check:
    spec = FIG4_DEVICE
    top, bottom = params_at_flux(spec, 0.0), params_at_flux(spec, math.pi)
    got = tuple(round(x) for x in (top.omega, bottom.omega, top.eta, bottom.eta))
    worst = 0.0
    for phi in np.linspace(0.0, math.pi, 25):
        ev = diagonalize(build_transmon(spec, float(phi), 30)).eigenvalues
        point = params_at_flux(spec, float(phi))
        worst = max(worst, abs(point.omega - (ev[1] - ev[0])), abs(point.eta - (2 * ev[1] - ev[0] - ev[2])))
    ok = got == (4791, 3788, 222, 230) and worst < KHZ
    return Check(
        "4", "tunable transmon over flux", ok, f"(omega_max, omega_min, eta_max, eta_min) = {got}; max error {worst / KHZ:.2e} kHz"
    )


def _fig5_chi() -> list[tuple[float, float, float]]:
    q1, q2 = FIG5_PAIR
    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for g in FIG5_COUPLINGS:
            pair = CoupledPair(q1, q2, g_C_for(g, 0.18, 0.175))
            analytic = dispersive_shifts(pair).chi
            labels, _ = coupled_levels(pair, 30)
            out.append((g, analytic, chi_numeric(labels)))
    return out


def check_fig5() -> Check:
    q1, q2 = FIG5_PAIR
    p1, p2 = params_at_flux(q1, 0.0), params_at_flux(q2, 0.0)
    bare = tuple(round(x) for x in (p1.omega, p1.eta, p2.omega, p2.eta))
    rows = _fig5_chi()
    rel = [(g, abs(a - n) / abs(n)) for g, a, n in rows]
    pair = CoupledPair(q1, q2, 4.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        c1 = dispersive_shifts(pair).chi
        c2 = dispersive_shifts(pair.with_coupling(8.0)).chi
    scaling = abs(c2 / c1 - 4) / 4
    ok = bare == (4234, 226, 4361, 225) and all(r <= 0.05 for _, r in rel) and scaling <= 1e-10
    table = ", ".join(f"g={g:g}: {100 * r:.2f}%" for g, r in rel)
    return Check("5", "coupled pair dispersive shift vs oracle", ok, f"bare {bare}; chi deviation {table}; g^2 scaling {scaling:.1e}")


@lru_cache(maxsize=None)
def fig6_pair() -> CoupledPair:
    return CoupledPair(FIG6_FIXED, FIG6_TUNABLE, FIG6_G_C)


@lru_cache(maxsize=None)
def fig6_sweep() -> np.ndarray:
    return gate_sweep(fig6_pair(), FIG6_AMPLITUDES)


@lru_cache(maxsize=None)
def fig6_optima() -> dict[str, tuple[float, float]]:
    """Local maximum of each ratio curve closest to its published value."""
    rows = fig6_sweep()
    out = {}
    for col, kind in enumerate(("iswap", "cz02", "cz20")):
        maxima = local_maxima(rows[:, 0], rows[:, 4 + col])
        if maxima:
            out[kind] = min(maxima, key=lambda m: abs(m[1] - FIG6_TARGETS[kind]))
    return out


def check_fig6() -> Check:
    f, t = params_at_flux(FIG6_FIXED, 0.0), FIG6_TUNABLE
    top, bottom = params_at_flux(t, 0.0), params_at_flux(t, math.pi)
    device = tuple(round(x) for x in (f.omega, f.eta, top.omega, bottom.omega, top.eta, bottom.eta))
    optima = fig6_optima()
    parts, ok = [], device == (3597, 232, 4551, 3599, 211, 218)
    for kind, target in FIG6_TARGETS.items():
        if kind not in optima:
            parts.append(f"{kind}: no local maximum")
            ok = False
            continue
        amp, value = optima[kind]
        ok &= abs(value - target) <= 0.02
        parts.append(f"{kind} {value:.4f} at {amp:.3f} rad (target {target})")
    return Check("6", "parametric gate renormalization maxima", ok, f"device {device}; " + "; ".join(parts))


def check_fig7() -> Check:
    spec = FIG4_DEVICE
    pulse = FluxPulse(0.0, 2 * math.pi, 1.0, 0.0)
    t = (np.arange(3001) + 0.37) / 3001 * pulse.period
    worst, span = {}, None
    for name in ("omega", "eta"):
        f = expansion_of(spec, pulse, name, 50, 4096)
        direct = modulated_parameter(spec, name)(pulse.flux(t))
        worst[name] = float(np.max(np.abs(f.reconstruct(t) - direct)))
        if name == "omega":
            span = (round(float(direct.min())), round(float(direct.max())))
    ok = max(worst.values()) < 10 * KHZ and span == (3788, 4791)
    return Check(
        "7",
        "50-harmonic reconstruction for a 2 pi flux swing",
        ok,
        f"max error omega {worst['omega'] / KHZ:.2e} kHz, eta {worst['eta'] / KHZ:.2e} kHz; omega span {span} MHz",
    )


def check_odd_harmonics() -> Check:
    worst = 0.0
    for park in (0.0, math.pi):
        for amp in (0.4, 1.3, 2.9):
            pulse = FluxPulse(park, amp, 1.0, 0.0)
            for name in ("omega", "eta", "lambda"):
                c = expansion_of(FIG4_DEVICE, pulse, name, 50, 4096).coefficients
                worst = max(worst, float(np.max(np.abs(c[1::2])) / abs(c[0])))
    return Check("8a", "odd harmonics vanish at sweet spots", worst < 1e-9, f"max |f_odd|/|f_0| = {worst:.2e}")


def check_analytic_fourier() -> Check:
    worst = 0.0
    for amp in (0.5, 1.0, 2 * math.pi):
        pulse = FluxPulse(0.0, amp, 1.0, 0.4)
        for name in ("omega", "eta"):
            quad_f = expansion_of(FIG4_DEVICE, pulse, name, 50, 4096).coefficients[:11]
            f0 = abs(quad_f[0])
            for method in ("hypergeometric", "binomial"):
                ana = fourier_coefficients_analytic(FIG4_DEVICE, pulse, name, 10, method=method).coefficients
                scale = np.maximum(np.abs(quad_f), 1e-3 * f0)
                worst = max(worst, float(np.max(np.abs(ana - quad_f) / scale)))
    return Check("8b", "analytic vs quadrature harmonics (k <= 10)", worst < 1e-8, f"max relative deviation {worst:.2e}")


def check_phase_expansion() -> Check:
    spec = FIG4_DEVICE
    pulse = FluxPulse(0.0, 1.2, 400.0, 0.7)
    f = expansion_of(spec, pulse, "omega", 60, 4096)
    phase = integrated_phase_expansion(f)
    omega = modulated_parameter(spec, "omega")
    n = phase.indices()
    worst = 0.0
    for t in np.linspace(0.0, pulse.period, 17)[1:]:
        integral, _ = quad(lambda s: float(omega(pulse.flux(s))), 0.0, t, epsabs=1e-12, epsrel=1e-12, limit=200)
        direct = np.exp(2j * math.pi * integral)
        series = np.exp(1j * (2 * math.pi * phase.f0 * t - phase.Theta_p)) * np.sum(phase.eps * np.exp(1j * n * pulse.tau(t)))
        worst = max(worst, abs(series - direct))
    return Check("8c", "Bessel sideband expansion of exp(i int omega)", worst < 1e-8, f"max deviation {worst:.2e}")


@lru_cache(maxsize=None)
def fig6_simulations():
    optima = fig6_optima()
    return {kind: simulate_gate(fig6_pair(), None, kind, amplitude=optima[kind][0]) for kind in FIG6_TARGETS if kind in optima}


def check_rabi_rates() -> Check:
    sims = fig6_simulations()
    parts, ok = [], len(sims) == 3
    for kind, r in sims.items():
        ok &= r.relative_error <= 0.05
        parts.append(f"{kind} {r.resonant_frequency:.3f} vs {r.predicted_frequency:.3f} MHz ({100 * r.relative_error:.2f}%)")
    return Check("8d", "simulated Rabi rate vs 2 g_eff", ok, "; ".join(parts))


def check_norm() -> Check:
    drift = max(r.norm_drift for r in fig6_simulations().values())
    return Check("8e", "state norm conservation", drift < 1e-8, f"max drift {drift:.2e}")


def check_truncation() -> Check:
    parts, ok = [], True
    for xi in TRUNCATION_XI:
        E_J = 2 * 200.0 / xi**2
        a = diagonalize(build_single(200.0, E_J, 30)).eigenvalues[:3]
        b = diagonalize(build_single(200.0, E_J, 40)).eigenvalues[:3]
        shift = float(np.max(np.abs(a - b))) * 1e6  # Hz
        ok &= shift < 1.0
        parts.append(f"xi={xi:g}: {shift:.3g} Hz")
    return Check("8f", "oracle truncation stability 30 -> 40 states", ok, "; ".join(parts))


CHECKS: tuple[Callable[[], Check], ...] = (
    check_series_exact,
    check_eigenstates,
    check_fig2,
    check_fig4,
    check_fig5,
    check_fig6,
    check_fig7,
    check_odd_harmonics,
    check_analytic_fourier,
    check_phase_expansion,
    check_rabi_rates,
    check_norm,
    check_truncation,
)


def run_all(echo: Callable[[str], None] | None = None) -> list[Check]:
    results = []
    for fn in CHECKS:
        try:
            result = fn()
        except Exception as exc:  # a crash is a failed check, not an aborted run
            result = Check(fn.__name__, fn.__name__, False, f"raised {type(exc).__name__}: {exc}")
        results.append(result)
        if echo:
            echo(result.line())
    return results
