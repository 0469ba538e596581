"""Outgoing channel amplitudes and total reflection/transmission.

Channel ``n`` is the outgoing photon accompanied by ``n`` phonons; it
propagates with ``k_n = k - n w / v_g`` and is open only for ``k_n > 0``.
The photon ends up in a mixed state, so probabilities are summed over
channels and amplitudes are never added across them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import displacement_row
from .kernel import channel_detuning
from .model import EnergyBook, ModelParams, natural_units
from .solver import ExcitedAmplitudes

__all__ = [
    "ChannelAmplitudes",
    "SpectrumPoint",
    "channel_amplitudes",
    "totals",
    "outgoing_frequency",
    "open_channel_count",
]


@dataclass
class ChannelAmplitudes:
    k: np.ndarray
    open: np.ndarray
    t: np.ndarray
    r: np.ndarray
    omega_out: np.ndarray

    @property
    def n_channels(self):
        return len(self.k)


@dataclass
class SpectrumPoint:
    omega_k_over_Omega: float
    R: float
    T: float
    unitarity_defect: float
    n_max_used: int
    channels: ChannelAmplitudes
    converged: bool = True
    delta_R: float = 0.0
    error: str | None = None


def _is_open(k, n, params):
    u = natural_units(params)
    # k_n = (E - (n + 1/2) w) / v_g, snapped at threshold
    return channel_detuning(EnergyBook(u.omega).e_total(k), n, u.omega) > 0


def open_channel_count(k, params: ModelParams):
    n = 0
    while _is_open(k, n, params):
        n += 1
    return n


def channel_amplitudes(u_e: ExcitedAmplitudes, k, params: ModelParams) -> ChannelAmplitudes:
    """``t_n`` and ``r_n`` for every channel up to the larger of ``n_max`` and the last open one."""
    u = natural_units(params)
    n_top = max(u_e.n_max, open_channel_count(k, params) - 1)
    ns = np.arange(n_top + 1)
    k_n = k - ns * u.omega / u.v_g
    is_open = np.array([bool(_is_open(k, n, params)) for n in ns])
    t = np.zeros(n_top + 1, dtype=complex)
    r = np.zeros(n_top + 1, dtype=complex)
    t[0] = 1.0
    pref = -2j * math.pi * u.J / u.v_g
    for n in ns[is_open]:
        beta = u.alpha * k_n[n]
        # <n|exp(+-i beta X)|m> = conj(<m|exp(-+i beta X)|n>)
        fwd = np.conj(displacement_row(u_e.n_max, n, beta, +1))
        back = np.conj(displacement_row(u_e.n_max, n, beta, -1))
        t[n] += pref * np.dot(fwd, u_e.values)
        r[n] = pref * np.dot(back, u_e.values)
    omega_out = np.where(is_open, u.v_g * k_n, np.nan)
    return ChannelAmplitudes(k=k_n, open=is_open, t=t, r=r, omega_out=omega_out)


def totals(ch: ChannelAmplitudes):
    """Total reflectance, transmittance and the unitarity defect ``|R + T - 1|``."""
    R = float(np.sum(np.abs(ch.r) ** 2))
    T = float(np.sum(np.abs(ch.t) ** 2))
    return R, T, abs(R + T - 1.0)


def outgoing_frequency(n, k, params: ModelParams):
    """Frequency ``w_k - n w`` carried by the photon in open channel `n`."""
    u = natural_units(params)
    if not _is_open(k, n, params):
        raise ValueError(f"channel {n} is closed at k={k!r}")
    return u.v_g * abs(k) - n * u.omega
