"""Single-photon scattering off a two-level scatterer in a harmonic trap.

The photon recoil couples the internal transition to the motional Fock
states, so reflection spectra develop phonon sidebands.  Quick start::

    from recoilscatter import ModelParams, SweepRequest, sweep, find_peaks
    pts = sweep(SweepRequest(ModelParams(0.8, 0.2, 0.05), n_points=200))
    peaks = find_peaks(pts, omega_ratio=0.2)
"""

from .channels import (
    ChannelAmplitudes,
    SpectrumPoint,
    channel_amplitudes,
    open_channel_count,
    outgoing_frequency,
    totals,
)
from .fock import displacement_element, displacement_matrix, displacement_row, laguerre_assoc
from .kernel import (
    KernelEngine,
    KernelMatrix,
    QuadratureConfig,
    QuadratureError,
    kernel_matrix,
    kernel_term,
    open_channel_momentum,
)
from .limits import LorentzianSpectrum, ld_amplitudes, ld_reflectance, ld_transmittance
from .model import EnergyBook, ModelParams, NaturalUnits, J_from_gamma, gamma_from_J, natural_units
from .solver import ExcitedAmplitudes, SolverError, solve_excited_amplitudes, source_vector
from .spectrum import Peak, SweepRequest, find_peaks, solve_point, sweep

__version__ = "0.1.0"

__all__ = [
    "ChannelAmplitudes", "SpectrumPoint", "channel_amplitudes", "open_channel_count",
    "outgoing_frequency", "totals",
    "displacement_element", "displacement_matrix", "displacement_row", "laguerre_assoc",
    "KernelEngine", "KernelMatrix", "QuadratureConfig", "QuadratureError", "kernel_matrix",
    "kernel_term", "open_channel_momentum",
    "LorentzianSpectrum", "ld_amplitudes", "ld_reflectance", "ld_transmittance",
    "EnergyBook", "ModelParams", "NaturalUnits", "J_from_gamma", "gamma_from_J", "natural_units",
    "ExcitedAmplitudes", "SolverError", "solve_excited_amplitudes", "source_vector",
    "Peak", "SweepRequest", "find_peaks", "solve_point", "sweep",
]
