"""Excited-state amplitudes of the single-photon scattering state.

The amplitudes ``u_e(m)`` of ``|vac> (x) |e, m>`` satisfy

    (E - w_em) u_e(m) = J <m|exp(i a k X)|0> + J sum_n F(m, n) u_e(n),

which, truncated to ``m, n <= n_max``, is a small dense complex system.
Its regularity comes from the decay part of the kernel; no artificial
broadening is added.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import displacement_row
from .kernel import KernelEngine, KernelMatrix, QuadratureConfig
from .model import EnergyBook, ModelParams, natural_units

__all__ = [
    "ExcitedAmplitudes",
    "SolverError",
    "source_vector",
    "system_matrix",
    "solve_excited_amplitudes",
]

RESIDUAL_TOL = 1e-10
MAX_CONDITION = 1e13


class SolverError(RuntimeError):
    pass


@dataclass
class ExcitedAmplitudes:
    k_in: float
    n_max: int
    values: np.ndarray
    residual_norm: float


def source_vector(k, params: ModelParams, n_max: int):
    """``s_m = J <m|exp(i alpha k X)|0>`` for ``m = 0..n_max``."""
    if not k > 0:
        raise ValueError(f"incident wavenumber must be positive, got {k!r}")
    u = natural_units(params)
    return u.J * displacement_row(n_max, 0, u.alpha * k, +1)


def system_matrix(k, params: ModelParams, kernel: KernelMatrix):
    """``diag(E - w_em) - J F`` on the kernel's truncation."""
    u = natural_units(params)
    book = EnergyBook(u.omega)
    m = np.arange(kernel.n_max + 1)
    detuning = book.e_total(k) - book.omega_em(m)
    F = kernel.values.copy()
    sing = list(kernel.singular)
    F[sing, sing] = 0.0
    A = np.diag(detuning).astype(complex) - u.J * F
    A[sing, sing] = np.inf
    return A


def solve_excited_amplitudes(k, params: ModelParams, n_max: int,
                             quad: QuadratureConfig | None = None,
                             kernel: KernelMatrix | None = None) -> ExcitedAmplitudes:
    """Solve the truncated linear system for ``u_e(m)``, ``m <= n_max``.

    A precomputed `kernel` with truncation ``>= n_max`` may be supplied;
    its leading block is used.  Sublevels whose kernel diagonal diverges at
    a channel threshold decouple and carry zero amplitude.
    """
    u = natural_units(params)
    if kernel is None:
        kernel = KernelEngine(params, n_max, quad=quad).matrix(EnergyBook(u.omega).e_total(k))
    elif kernel.n_max != n_max:
        kernel = kernel.block(n_max)
    s = source_vector(k, params, n_max)
    A = system_matrix(k, params, kernel)

    keep = np.ones(n_max + 1, dtype=bool)
    keep[list(kernel.singular)] = False
    Ak = A[np.ix_(keep, keep)]
    sk = s[keep]
    cond = np.linalg.cond(Ak)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SolverError(f"scattering system is ill-conditioned (cond={cond:.3e}) at k={k!r}")
    x = np.linalg.solve(Ak, sk)
    values = np.zeros(n_max + 1, dtype=complex)
    values[keep] = x

    residual = float(np.max(np.abs(Ak @ x - sk)))
    norm = float(np.max(np.abs(s))) if s.size else 0.0
    if norm > 0 and residual > RESIDUAL_TOL * norm:
        raise SolverError(f"linear solve residual {residual:.3e} too large at k={k!r}")
    return ExcitedAmplitudes(k_in=float(k), n_max=n_max, values=values, residual_norm=residual)
