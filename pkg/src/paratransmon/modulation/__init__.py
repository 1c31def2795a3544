from .fourier import (
    FourierExpansion,
    PhaseExpansion,
    fourier_coefficients_analytic,
    fourier_coefficients_quadrature,
    integrated_phase_expansion,
)
from .pulse import FluxPulse, ModulatedParameter, Waveform, modulated_parameter, parameter_waveform
