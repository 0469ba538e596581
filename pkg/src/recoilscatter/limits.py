"""Lamb-Dicke limit: a fixed two-level scatterer.

With no recoil the problem collapses to a single channel and the spectra
are Lorentzians of half-width ``Gamma`` centred on the transition.  Nothing
here touches the kernel or the linear solver, so these curves serve as an
independent reference for the full calculation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LorentzianSpectrum", "ld_amplitudes", "ld_reflectance", "ld_transmittance"]


def ld_amplitudes(omega_k, Omega=1.0, Gamma=0.05):
    """Transmission and reflection amplitudes ``(t, r)``."""
    delta = np.asarray(omega_k, dtype=float) - Omega
    denom = delta + 1j * Gamma
    return (delta / denom)[()], (-1j * Gamma / denom)[()]


def ld_reflectance(omega_k, Omega=1.0, Gamma=0.05):
    delta = np.asarray(omega_k, dtype=float) - Omega
    return (Gamma**2 / (delta**2 + Gamma**2))[()]


def ld_transmittance(omega_k, Omega=1.0, Gamma=0.05):
    delta = np.asarray(omega_k, dtype=float) - Omega
    return (delta**2 / (delta**2 + Gamma**2))[()]


@dataclass(frozen=True)
class LorentzianSpectrum:
    Omega: float = 1.0
    Gamma: float = 0.05

    def __post_init__(self):
        if not self.Gamma > 0:
            raise ValueError("Gamma must be positive")

    def amplitudes(self, omega_k):
        return ld_amplitudes(omega_k, self.Omega, self.Gamma)

    def reflectance(self, omega_k):
        return ld_reflectance(omega_k, self.Omega, self.Gamma)

    def transmittance(self, omega_k):
        return ld_transmittance(omega_k, self.Omega, self.Gamma)

    @property
    def fwhm(self):
        return 2.0 * self.Gamma
