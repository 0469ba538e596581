"""Energy sweeps, truncation control and peak analysis."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.signal

from .channels import SpectrumPoint, channel_amplitudes, totals
from .kernel import KernelEngine, QuadratureConfig, QuadratureError
from .model import EnergyBook, ModelParams, natural_units
from .solver import SolverError, solve_excited_amplitudes

__all__ = [
    "SweepRequest",
    "Peak",
    "default_n_max",
    "solve_point",
    "sweep",
    "find_peaks",
    "CONVERGENCE_TOL",
]

CONVERGENCE_TOL = 1e-4
N_MAX_STEP = 5
N_MAX_ESCALATION = 15


def default_n_max(omega_k, params: ModelParams):
    """Truncation heuristic: recoil spread plus the open inelastic channels."""
    n = math.ceil(4.0 * params.epsilon_ld**2 + (omega_k - 1.0) / params.omega_ratio) + 10
    return int(min(max(n, 10), 80))


@dataclass
class SweepRequest:
    params: ModelParams
    omega_k_min: float = 0.7
    omega_k_max: float = 2.2
    n_points: int = 400
    n_max: int | None = None  # None -> default_n_max per point
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)
    auto_truncation: bool = True  # False: no escalation past n_max + 5

    def __post_init__(self):
        if not self.omega_k_min > 0:
            raise ValueError("omega_k_min must be positive")
        if not self.omega_k_max > self.omega_k_min:
            raise ValueError("omega_k_max must exceed omega_k_min")
        if self.n_points < 2:
            raise ValueError("n_points must be at least 2")
        if self.n_max is not None and self.n_max < 0:
            raise ValueError("n_max must be non-negative")

    @property
    def grid(self):
        return np.linspace(self.omega_k_min, self.omega_k_max, self.n_points)


@dataclass(frozen=True)
class Peak:
    location: float
    height: float
    nearest_resonance_index: int
    shift: float
    prominence: float = float("nan")


class _Engines:
    """Kernel engines keyed by truncation, shared across the points of a sweep."""

    def __init__(self, params, quad):
        self.params = params
        self.quad = quad
        self._by_n = {}

    def get(self, n_max):
        for n, eng in self._by_n.items():
            if n >= n_max:
                return eng
        eng = KernelEngine(self.params, n_max, quad=self.quad)
        self._by_n[n_max] = eng
        return eng


def _reflect(k, params, kernel, n_max):
    ue = solve_excited_amplitudes(k, params, n_max, kernel=kernel)
    ch = channel_amplitudes(ue, k, params)
    R, T, defect = totals(ch)
    return R, T, defect, ch


def solve_point(omega_k, params: ModelParams, n_max: int | None = None,
                quad: QuadratureConfig | None = None, engines: _Engines | None = None,
                escalate: bool = True) -> SpectrumPoint:
    """One converged spectrum point.

    The system is solved at ``n_max`` and ``n_max + 5``.  If the reflectance
    moves by more than ``CONVERGENCE_TOL`` the check is repeated once at
    ``n_max + 10`` / ``n_max + 15`` (unless ``escalate`` is off); a point
    that still moves is returned with ``converged=False``.
    """
    quad = quad or QuadratureConfig()
    engines = engines or _Engines(params, quad)
    u = natural_units(params)
    k = omega_k / u.v_g
    e_total = EnergyBook(u.omega).e_total(k)
    n0 = default_n_max(omega_k, params) if n_max is None else n_max

    def attempt(n):
        K = engines.get(n + N_MAX_STEP).matrix(e_total)
        lo = _reflect(k, params, K, n)
        hi = _reflect(k, params, K, n + N_MAX_STEP)
        return lo, hi

    lo, hi = attempt(n0)
    n_used = n0 + N_MAX_STEP
    if escalate and abs(hi[0] - lo[0]) >= CONVERGENCE_TOL:
        lo, hi = attempt(n0 + N_MAX_ESCALATION - N_MAX_STEP)
        n_used = n0 + N_MAX_ESCALATION
    R, T, defect, ch = hi
    dR = abs(hi[0] - lo[0])
    return SpectrumPoint(
        omega_k_over_Omega=float(omega_k),
        R=R, T=T, unitarity_defect=defect, n_max_used=n_used,
        channels=ch, converged=dR < CONVERGENCE_TOL, delta_R=dR,
    )


def _failed_point(omega_k, exc):
    nan = float("nan")
    return SpectrumPoint(omega_k_over_Omega=float(omega_k), R=nan, T=nan, unitarity_defect=nan,
                         n_max_used=-1, channels=None, converged=False, delta_R=nan,
                         error=f"{type(exc).__name__}: {exc}")


def sweep(req: SweepRequest, progress=None) -> list[SpectrumPoint]:
    """Spectrum on a uniform ``omega_k`` grid, one point per grid value.

    Points whose solve raises are kept in place with ``converged=False`` and
    NaN observables.
    """
    engines = _Engines(req.params, req.quad)
    grid = req.grid
    if req.n_max is None:
        top = max(default_n_max(w, req.params) for w in grid)
    else:
        top = req.n_max
    engines.get(top + N_MAX_STEP)
    out = []
    for i, w in enumerate(grid):
        try:
            pt = solve_point(w, req.params, req.n_max, req.quad, engines, req.auto_truncation)
        except (QuadratureError, SolverError) as exc:
            pt = _failed_point(w, exc)
        out.append(pt)
        if progress is not None:
            progress(i + 1, len(grid))
    return out


def find_peaks(points, min_prominence=0.02, omega_ratio=None) -> list[Peak]:
    """Local maxima of R(omega_k) with prominence at least `min_prominence`.

    With `omega_ratio` given, each peak is labelled with the nearest phonon
    sideband ``1 + n * omega_ratio`` (``n >= 0``) and its offset from it.
    """
    if len(points) < 3:
        raise ValueError("peak finding needs at least three points")
    if not min_prominence > 0:
        raise ValueError("min_prominence must be positive")
    x = np.array([p.omega_k_over_Omega for p in points])
    y = np.array([p.R for p in points])
    if np.any(np.diff(x) <= 0):
        raise ValueError("points must be ordered in omega_k")
    idx, props = scipy.signal.find_peaks(np.nan_to_num(y, nan=-np.inf), prominence=min_prominence)
    peaks = []
    for i, prom in zip(idx, props["prominences"]):
        if omega_ratio is None:
            n, shift = 0, x[i] - 1.0
        else:
            n = max(0, int(round((x[i] - 1.0) / omega_ratio)))
            shift = x[i] - (1.0 + n * omega_ratio)
        peaks.append(Peak(float(x[i]), float(y[i]), n, float(shift), float(prom)))
    return peaks
