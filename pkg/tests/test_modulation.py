import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import jv

from paratransmon.coupling import CoupledPair
from paratransmon.errors import IntegrationError, JunctionCollapseError, PhysicsError
from paratransmon.modulation.fourier import (
    AliasingError,
    FourierExpansion,
    expansion_of,
    fourier_coefficients_analytic,
    fourier_coefficients_quadrature,
    integrated_phase_expansion,
    sideband_weights,
)
from paratransmon.modulation.gates import (
    SWEEP_HEADER,
    activation_frequency,
    coupling_from_expansions,
    drive_amplitude,
    effective_coupling,
    effective_drives,
    format_value,
    gate_sweep,
    local_maxima,
    phase_beta,
    sweep_csv,
)
from paratransmon.modulation.pulse import FluxPulse, Waveform, modulated_parameter, parameter_waveform
from paratransmon.modulation.simulate import max_step, simulate_gate, trajectory_csv
from paratransmon.tunable import TransmonSpec, params_at_flux

FIG4 = TransmonSpec.from_xi_range(200.0, 0.16, 0.2)
FIXED = TransmonSpec.fixed(200.0, 0.21)
TUNABLE = TransmonSpec.from_xi_range(190.0, 0.16, 0.2)
PAIR = CoupledPair(FIXED, TUNABLE, 5.0)


def sampled(values, omega_p=1.0, theta_p=0.0):
    pulse = FluxPulse(0.0, 0.0, omega_p, theta_p)
    n = len(values)
    return Waveform("test", np.arange(n) / (n * omega_p), np.asarray(values, dtype=float), pulse)


def fft_coefficient(values, m):
    """Coefficient of ``exp(i m tau)`` of samples on a uniform one-period tau grid."""
    n = len(values)
    return np.fft.fft(values)[m % n] / n


def test_pulse_validation_and_shape():
    with pytest.raises(PhysicsError):
        FluxPulse(0.0, -0.1, 1.0)
    with pytest.raises(PhysicsError):
        FluxPulse(0.0, 0.1, 0.0)
    p = FluxPulse(0.0, 0.3, 50.0, 0.2)
    assert p.period == 0.02
    assert p.flux(0.0) == pytest.approx(0.3 * math.cos(0.2))
    assert p.at_sweet_spot and FluxPulse(math.pi).at_sweet_spot and not FluxPulse(0.4).at_sweet_spot
    t, h = 0.003, 1e-7
    assert p.flux_rate(t) == pytest.approx((p.flux(t + h) - p.flux(t - h)) / (2 * h), rel=1e-7)


def test_zero_amplitude_waveform_is_parking_value():
    w = parameter_waveform(FIG4, FluxPulse(0.3, 0.0, 10.0), "omega", 64)
    np.testing.assert_allclose(w.values, params_at_flux(FIG4, 0.3).omega, rtol=1e-15)


def test_full_flux_quantum_modulation_spans_frequency_range():
    w = parameter_waveform(FIG4, FluxPulse(0.0, 2 * math.pi, 1.0), "omega", 4096)
    assert round(w.values.max()) == 4791
    assert round(w.values.min()) == 3788


def test_waveform_reports_collapsing_junction():
    sym = TransmonSpec(200.0, 5000.0, 5000.0)
    with pytest.raises(JunctionCollapseError, match="phi_ext"):
        parameter_waveform(sym, FluxPulse(0.0, math.pi, 1.0), "omega", 64)


def test_constant_waveform_has_only_mean():
    e = fourier_coefficients_quadrature(sampled(np.full(64, 3.5)), K_max=8)
    assert e.mean == pytest.approx(3.5, rel=1e-15)
    np.testing.assert_allclose(e.coefficients[1:], 0.0, atol=1e-14)


def test_cosine_projection_with_phase_offset():
    theta = 0.7
    omega_p = 2.0
    n = 256
    t = np.arange(n) / (n * omega_p)
    tau = 2 * np.pi * omega_p * t + theta
    e = fourier_coefficients_quadrature(sampled(1.0 + 0.5 * np.cos(2 * tau) - 0.25 * np.cos(3 * tau), omega_p, theta), 10)
    np.testing.assert_allclose(e.coefficients[:4], [1.0, 0.0, 0.5, -0.25], atol=1e-14)
    np.testing.assert_allclose(e.reconstruct(t), 1.0 + 0.5 * np.cos(2 * tau) - 0.25 * np.cos(3 * tau), atol=1e-14)


def test_aliasing_guards():
    with pytest.raises(AliasingError):
        fourier_coefficients_quadrature(sampled(np.ones(64)), K_max=10)
    # content right up to Nyquist means the grid is too coarse
    n = 64
    tau = 2 * np.pi * np.arange(n) / n
    with pytest.raises(AliasingError, match="Nyquist"):
        fourier_coefficients_quadrature(sampled(np.cos(30 * tau)), K_max=4)


def test_mean_equals_fine_grid_time_average():
    pulse = FluxPulse(0.0, 2 * math.pi, 1.0)
    e = expansion_of(FIG4, pulse, "omega", grid_size=4096)
    fine = parameter_waveform(FIG4, pulse, "omega", 20000)
    closed = np.append(fine.values, fine.values[0])
    avg = np.trapezoid(closed, dx=1.0) / (len(closed) - 1)
    assert e.mean == pytest.approx(avg, rel=1e-12)


def test_reconstruction_with_fifty_harmonics():
    pulse = FluxPulse(0.0, 2 * math.pi, 1.0)
    t = np.linspace(0.0, 1.0, 777)
    for name in ("omega", "eta"):
        e = expansion_of(FIG4, pulse, name, K_max=50)
        direct = modulated_parameter(FIG4, name)(pulse.flux(t))
        assert np.max(np.abs(e.reconstruct(t) - direct)) < 1e-6 * abs(e.mean)


@pytest.mark.parametrize("amplitude", [0.3, 1.0, 2 * math.pi])
def test_sweet_spot_parity(amplitude):
    for phi_bar in (0.0, math.pi):
        pulse = FluxPulse(phi_bar, amplitude, 1.0)
        e = expansion_of(FIG4, pulse, "omega")
        assert np.max(np.abs(e.coefficients[1::2])) < 1e-9 * abs(e.mean)
        a = fourier_coefficients_analytic(FIG4, pulse, "omega", K_max=12, method="binomial")
        assert np.max(np.abs(a.coefficients[1::2])) < 1e-9 * abs(a.mean)


def test_analytic_zero_amplitude():
    pulse = FluxPulse(0.4, 0.0, 1.0)
    for method in ("binomial", "hypergeometric"):
        a = fourier_coefficients_analytic(FIG4, pulse, "omega", K_max=6, method=method)
        assert a.mean == pytest.approx(params_at_flux(FIG4, 0.4).omega, rel=1e-12)
        np.testing.assert_allclose(a.coefficients[1:], 0.0, atol=1e-9)


@pytest.mark.parametrize("method", ["binomial", "hypergeometric"])
def test_analytic_matches_quadrature(method):
    pulse = FluxPulse(0.0, 1.0, 1.0, 0.4)
    q = expansion_of(FIG4, pulse, "omega", K_max=10)
    a = fourier_coefficients_analytic(FIG4, pulse, "omega", K_max=10, method=method)
    floor = 1e-3 * abs(q.mean)
    for k in range(11):
        assert abs(a.coefficient(k) - q.coefficient(k)) <= 1e-8 * max(abs(q.coefficient(k)), floor)


def test_upconversion_at_small_amplitude():
    e = expansion_of(FIG4, FluxPulse(0.0, 0.3, 1.0), "omega", K_max=8)
    assert abs(e.coefficient(2)) > 10 * abs(e.coefficient(4))
    assert all(abs(e.coefficient(2)) > abs(e.coefficient(k)) for k in (1, 3, 5, 7))


def test_small_amplitude_second_harmonic_is_quadratic():
    c = [expansion_of(FIG4, FluxPulse(0.0, a, 1.0), "omega", K_max=8).coefficient(2) for a in (0.02, 0.04)]
    assert c[1] / c[0] == pytest.approx(4.0, rel=1e-3)


def _expansion(coeffs, omega_p=3.0, theta_p=0.0):
    return FourierExpansion("test", np.array(coeffs, dtype=float), FluxPulse(0.0, 0.0, omega_p, theta_p))


def test_phase_expansion_trivial_and_single_harmonic():
    p = integrated_phase_expansion(_expansion([5.0, 0.0, 0.0, 0.0]))
    assert p.epsilon(0) == 1.0 and p.epsilon(1) == 0.0 and p.epsilon(-2) == 0.0
    f2, omega_p = 4.0, 3.0
    p = integrated_phase_expansion(_expansion([0.0, 0.0, f2]))
    for n in range(-8, 9):
        expected = jv(n // 2, f2 / (2 * omega_p)) if n % 2 == 0 else 0.0
        assert p.epsilon(n) == pytest.approx(expected, abs=1e-15)


def test_phase_expansion_reconstructs_exponential():
    omega_p, theta = 40.0, 0.3
    f = _expansion([4200.0, 0.0, -310.0, 0.0, 35.0, 0.0, -4.0], omega_p, theta)
    p = integrated_phase_expansion(f)
    t = np.linspace(0.0, 2.0 / omega_p, 301)
    tau = 2 * np.pi * omega_p * t + theta
    # direct: 2 pi times the integral of the oscillating part, starting from t = 0
    phase = sum(f.coefficient(k) / (k * omega_p) * (np.sin(k * tau) - math.sin(k * theta)) for k in range(1, 7))
    direct = np.exp(1j * phase)
    series = np.exp(-1j * p.Theta_p) * (np.exp(1j * np.outer(tau, p.indices())) @ p.eps)
    assert np.max(np.abs(series - direct)) < 1e-8
    assert np.sum(p.eps**2) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(st.integers(1, 6), st.floats(-3.0, 3.0), min_size=1, max_size=4))
def test_property_sideband_weights_unit_norm(arguments):
    # the weights are the Fourier coefficients of a unimodular function
    _, w = sideband_weights(arguments)
    assert np.sum(w**2) == pytest.approx(1.0, abs=1e-11)


def test_effective_coupling_without_modulation():
    pulse = FluxPulse(0.0, 0.0, 200.0)
    c0 = effective_coupling(PAIR, pulse, "g11", 0)
    assert c0.value == pytest.approx(c0.g_bar, rel=1e-14) and c0.ratio == pytest.approx(1.0)
    assert effective_coupling(PAIR, pulse, "g11", 1).value == 0.0
    assert effective_coupling(PAIR, pulse, "g21", -2).value == 0.0


def test_small_amplitude_ratio_approaches_single_bessel():
    devs = []
    for amp in (0.2, 0.1):
        c = effective_coupling(PAIR, FluxPulse(0.0, amp, 100.0), "g11", 1)
        devs.append(abs(c.leading - c.small_amplitude) / abs(c.small_amplitude))
    # at least the O(amplitude^2) reduction; the residual comes from the fourth harmonic, so it scales as amplitude^4
    assert devs[1] / devs[0] <= 0.25
    assert devs[1] / devs[0] == pytest.approx(1 / 16, rel=0.05)


def test_coupling_projection_in_time_domain():
    pulse = FluxPulse(0.0, 2.5, 300.0)
    g = expansion_of(TUNABLE, pulse, "g11", pair=PAIR)
    freq = expansion_of(TUNABLE, pulse, "omega")
    n_grid = 4096
    tau = 2 * np.pi * np.arange(n_grid) / n_grid
    phase = sum(freq.coefficient(k) / (k * pulse.omega_p) * np.sin(k * tau) for k in range(2, freq.K_max + 1, 2))
    g_t = g.reconstruct(np.arange(n_grid) / (n_grid * pulse.omega_p))
    for n in (-1, 1, 2):
        c = coupling_from_expansions(g, freq, pulse.omega_p, n)
        projected = fft_coefficient(g_t * np.exp(1j * phase), 2 * n)
        assert c.value == pytest.approx(projected.real, rel=1e-6, abs=1e-12 * abs(c.g_bar))
        assert abs(projected.imag) < 1e-10 * abs(c.g_bar)


def test_drive_projection_in_time_domain():
    pulse = FluxPulse(0.0, 3.0, 250.0)
    n_grid = 4096
    tau = 2 * np.pi * np.arange(n_grid) / n_grid
    for nu_name, freq_name, kind, j in (("nu01", "omega", "single", 1), ("nu02", "omega02", "double", 2)):
        nu = expansion_of(TUNABLE, pulse, nu_name)
        freq = expansion_of(TUNABLE, pulse, freq_name)
        phase = sum(freq.coefficient(k) / (k * pulse.omega_p) * np.sin(k * tau) for k in range(2, freq.K_max + 1, 2))
        nu_t = nu.mean + (nu.second * np.cos(2 * tau) if kind == "single" else 0.0)
        signal = 2j * nu_t * np.sin(j * tau) * np.exp(1j * phase)
        for n in (-2, -1, 0, 1):
            m = 2 * n + 1 if kind == "single" else 2 * n
            expected = fft_coefficient(signal, m)
            got = drive_amplitude(nu, freq, pulse.omega_p, n, kind)
            assert got == pytest.approx(expected.real, rel=1e-6, abs=1e-12 * abs(nu.mean))
            assert abs(expected.imag) < 1e-10 * abs(nu.mean)


def test_drives_vanish_without_modulation():
    d = effective_drives(PAIR, FluxPulse(0.0, 0.0, 100.0), 1)
    assert (d.Omega_01, d.Omega_12, d.Omega_02) == (0.0, 0.0, 0.0)


def test_single_drive_selection_rule_at_zero_argument():
    nu = _expansion([2.0, 0.0, 0.5])
    silent = _expansion([4000.0])
    assert drive_amplitude(nu, silent, 3.0, 0, "single") == pytest.approx(2.0 - 0.25)
    assert drive_amplitude(nu, silent, 3.0, -1, "single") == pytest.approx(-(2.0 - 0.25))
    assert drive_amplitude(nu, silent, 3.0, 2, "single") == 0.0
    with pytest.raises(ValueError):
        drive_amplitude(nu, silent, 3.0, 0, "triple")


def test_phase_beta_examples():
    f = _expansion([4000.0, 0.0, 300.0, 0.0, 20.0], omega_p=50.0)
    assert phase_beta(f, FluxPulse(0.0, 1.0, 50.0, 0.0), 1) == 0.0
    single = _expansion([4000.0, 0.0, 300.0], omega_p=50.0)
    theta = 0.4
    assert phase_beta(single, FluxPulse(0.0, 1.0, 50.0, theta), 0) == pytest.approx(-300.0 / 100.0 * math.sin(2 * theta))
    beta = phase_beta(f, FluxPulse(0.0, 1.0, 50.0, math.pi), 1)
    assert math.remainder(beta, 2 * math.pi) == pytest.approx(0.0, abs=1e-12)


def test_activation_frequency_small_amplitude_limit():
    point = activation_frequency(PAIR, 1e-3, "iswap")
    assert round(point.omega_p) == 477
    assert point.n == -1
    # n = -1: the ratio is J_1 of a vanishing argument
    assert point.ratio == pytest.approx(point.coupling.small_amplitude / point.coupling.g_bar, rel=1e-6)
    assert 0 < point.ratio < 1e-6


def test_controlled_z_frequencies_differ():
    cz02 = activation_frequency(PAIR, 2.0, "cz02")
    cz20 = activation_frequency(PAIR, 2.0, "cz20")
    iswap = activation_frequency(PAIR, 2.0, "iswap")
    assert cz02.omega_p != cz20.omega_p
    assert 2 * cz02.n * cz02.omega_p == pytest.approx(cz02.detuning)
    assert iswap.detuning - cz20.detuning == pytest.approx(params_at_flux(FIXED, 0.0).eta)


def test_activation_guards():
    with pytest.raises(ValueError):
        activation_frequency(PAIR, 1.0, "cnot")
    with pytest.raises(PhysicsError):
        activation_frequency(PAIR, -1.0, "iswap")


def test_gate_sweep_csv_layout():
    rows = gate_sweep(PAIR, [0.5, 1.0])
    text = sweep_csv(rows)
    lines = text.splitlines()
    assert lines[0] == ",".join(SWEEP_HEADER)
    parsed = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    np.testing.assert_allclose(parsed, rows, rtol=1e-11)
    assert format_value(-0.0) == "0"


def test_local_maxima_parabola():
    x = np.linspace(0.0, 2.0, 21)
    y = 1.0 - (x - 0.83) ** 2
    (peak,) = local_maxima(x, y)
    assert peak[0] == pytest.approx(0.83, abs=1e-12)
    assert peak[1] == pytest.approx(1.0, abs=1e-12)


def test_simulation_without_coupling_or_modulation_is_static():
    pair = CoupledPair(FIXED, TUNABLE, 0.0)
    result = simulate_gate(pair, FluxPulse(0.0, 0.0, 400.0), "iswap", duration=0.01)
    assert np.max(np.abs(result.populations - result.populations[0])) < 1e-12
    assert result.norm_drift < 1e-8
    assert result.step <= max_step(pair)
    lines = trajectory_csv(result).splitlines()
    assert lines[0].startswith("time_us,p00,")
    assert len(lines) == len(result.times) + 1


def test_simulation_guards():
    pair = CoupledPair(FIXED, TUNABLE, 0.0)
    with pytest.raises(IntegrationError, match="1/50"):
        simulate_gate(pair, FluxPulse(0.0, 0.0, 400.0), "iswap", duration=0.01, step=2 * max_step(pair))
    with pytest.raises(ValueError, match="duration is required"):
        simulate_gate(pair, FluxPulse(0.0, 0.0, 400.0), "iswap")
    with pytest.raises(ValueError, match="two predicted Rabi periods"):
        simulate_gate(PAIR, FluxPulse(0.0, 3.58, 400.0), "iswap", duration=0.01)
    with pytest.raises(ValueError):
        simulate_gate(PAIR, None, "iswap")
    with pytest.raises(ValueError):
        simulate_gate(PAIR, None, "swap", amplitude=1.0)
