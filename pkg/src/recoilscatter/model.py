"""Dimensionless parameterization of the trapped two-level scatterer.

Everything internal runs in natural units with the transition frequency,
the photon group velocity and hbar set to one, so the resonant wavenumber
is one as well.  A model is fixed by three ratios: the Lamb-Dicke
parameter, the trap frequency and the radiative linewidth, the last two in
units of the transition frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "ModelParams",
    "NaturalUnits",
    "EnergyBook",
    "natural_units",
    "J_from_gamma",
    "gamma_from_J",
]

# Omega = v_g = hbar = 1
OMEGA = 1.0
V_G = 1.0


def J_from_gamma(gamma, v_g=V_G):
    """Photon-scatterer coupling J with ``gamma = 2 pi J**2 / v_g``."""
    return math.sqrt(gamma * v_g / (2.0 * math.pi))


def gamma_from_J(J, v_g=V_G):
    return 2.0 * math.pi * J * J / v_g


@dataclass(frozen=True)
class ModelParams:
    """The three dimensionless knobs of the model.

    Parameters
    ----------
    epsilon_ld : float
        Lamb-Dicke parameter, trap ground-state spread times resonant
        wavenumber.
    omega_ratio : float
        Trap frequency over transition frequency.
    gamma_ratio : float
        Radiative linewidth over transition frequency.
    """

    epsilon_ld: float
    omega_ratio: float
    gamma_ratio: float

    def __post_init__(self):
        for name in ("epsilon_ld", "omega_ratio", "gamma_ratio"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value) or value <= 0.0:
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, float(value))

    @property
    def units(self) -> "NaturalUnits":
        return natural_units(self)


@dataclass(frozen=True)
class NaturalUnits:
    """Derived constants with Omega = v_g = 1."""

    alpha: float
    omega: float
    J: float
    Gamma: float
    k_c: float
    Omega: float = OMEGA
    v_g: float = V_G


def natural_units(params: ModelParams) -> NaturalUnits:
    k_c = OMEGA / V_G
    return NaturalUnits(
        alpha=params.epsilon_ld / k_c,
        omega=params.omega_ratio * OMEGA,
        J=J_from_gamma(params.gamma_ratio * OMEGA, V_G),
        Gamma=params.gamma_ratio * OMEGA,
        k_c=k_c,
    )


@dataclass(frozen=True)
class EnergyBook:
    """Bare energies of the uncoupled problem for a given trap frequency."""

    omega: float
    Omega: float = OMEGA
    v_g: float = V_G

    def omega_k(self, k):
        return self.v_g * abs(k)

    def e_total(self, k):
        """Energy of the incident photon plus the motional ground state."""
        return self.omega_k(k) + 0.5 * self.omega

    def omega_pn(self, p, n):
        return self.omega_k(p) + (n + 0.5) * self.omega

    def omega_em(self, m):
        return self.Omega + (m + 0.5) * self.omega
