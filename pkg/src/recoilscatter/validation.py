"""Independent reference computations and the built-in invariant suite.

The references here deliberately avoid the production code paths:

* displacement elements come from a dense matrix exponential of the
  truncated position operator;
* the kernel is integrated over the full momentum line with a finite
  broadening ``eta`` in place of the ``+i0`` prescription, then
  extrapolated to ``eta -> 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.linalg

from .channels import totals
from .fock import displacement_matrix, displacement_row
from .kernel import KernelEngine, QuadratureConfig
from .limits import ld_reflectance
from .model import EnergyBook, ModelParams, natural_units
from .spectrum import solve_point

__all__ = [
    "CheckResult",
    "expm_displacement",
    "eta_oracle_kernel",
    "richardson_zero",
    "run_validation",
]

DEFAULT_ETAS = (1e-2, 1e-3, 1e-4)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def expm_displacement(beta, sign=1, levels=80):
    """``exp(sign i beta (a^dag + a))`` on a ``levels``-dimensional Fock space.

    Only the block well below ``levels`` is trustworthy.
    """
    off = np.sqrt(np.arange(1, levels, dtype=float))
    X = np.diag(off, 1) + np.diag(off, -1)
    return scipy.linalg.expm(sign * 1j * beta * X)


def richardson_zero(xs, values):
    """Polynomial (Lagrange) extrapolation of ``values(x)`` to ``x = 0``."""
    out = 0.0
    for i, xi in enumerate(xs):
        w = 1.0
        for j, xj in enumerate(xs):
            if j != i:
                w *= -xj / (xi - xj)
        out = out + w * values[i]
    return out


def eta_oracle_kernel(e_total, params: ModelParams, n_max, m_bar_max, cutoff,
                      etas=DEFAULT_ETAS, tol=1e-11):
    """Kernel block from broadened denominators ``1/(E' - |p| + i eta)``.

    The integral runs over ``[-cutoff, cutoff]`` with the complex
    displacement matrices, so none of the parity folding or pole
    subtraction of the production engine is reused.  Returns the
    extrapolated block and the per-``eta`` blocks.
    """
    u = natural_units(params)
    det = e_total - (np.arange(m_bar_max + 1) + 0.5) * u.omega
    poles = det[det > 0]

    def integrand(p, eta):
        beta = u.alpha * p
        A = displacement_matrix(n_max, m_bar_max, beta, +1)
        B = displacement_matrix(m_bar_max, n_max, beta, -1)
        h = 1.0 / (det - abs(p) + 1j * eta)
        return u.J * ((A * h) @ B)

    blocks = []
    for eta in etas:
        pts = {0.0}
        for pole in poles:
            for k in (0, 1, 3, 10, 30, 100):
                for s in (1, -1):
                    for t in (1, -1):
                        x = s * (pole + t * k * eta)
                        if -cutoff < x < cutoff:
                            pts.add(x)
        val, _ = scipy.integrate.quad_vec(
            lambda p: integrand(p, eta), -cutoff, cutoff,
            epsabs=tol, epsrel=tol, points=sorted(pts), limit=5000,
        )
        blocks.append(val)
    return richardson_zero(etas, blocks), blocks


def _check_displacement():
    worst = 0.0
    for beta in (0.1, 0.8, 1.6, 3.0):
        for sign in (1, -1):
            ref = expm_displacement(beta, sign, 120)[:21, :21]
            worst = max(worst, float(np.abs(displacement_matrix(20, 20, beta, sign) - ref).max()))
    return CheckResult("displacement vs matrix exponential", worst < 1e-10, f"max error {worst:.2e}")


def _check_row_unitarity():
    worst = 0.0
    for beta in (0.1, 0.8, 1.6, 3.0):
        for n in range(21):
            # spread of the displaced number state grows like beta * sqrt(n)
            M = n + math.ceil(10 + 8 * beta * beta + 6 * beta * math.sqrt(n))
            row = displacement_row(M, n, beta, +1)
            worst = max(worst, abs(float(np.sum(np.abs(row) ** 2)) - 1.0))
    return CheckResult("displacement row unitarity", worst < 1e-10, f"max defect {worst:.2e}")


def _check_kernel_oracle():
    params = ModelParams(0.8, 0.2, 0.05)
    u = natural_units(params)
    E = EnergyBook(u.omega).e_total(1.0)
    K = KernelEngine(params, 4).matrix(E)
    ref, _ = eta_oracle_kernel(E, params, 4, K.m_bar_max, K.cutoff)
    err = float(np.abs(ref - K.values).max())
    gain = float(np.max(np.diag(K.values).imag))
    ok = err < 1e-6 and gain <= 0
    return CheckResult("kernel vs broadened oracle", ok,
                       f"max error {err:.2e}, max Im F(m,m) {gain:.2e}")


def _check_unitarity_grid(n_points):
    worst, bad = 0.0, 0
    for params in (ModelParams(0.8, 0.2, 0.05), ModelParams(1.6, 0.2, 0.05)):
        for w in np.linspace(0.8, 2.0, n_points):
            pt = solve_point(w, params)
            worst = max(worst, pt.unitarity_defect)
            bad += not pt.converged
    ok = worst < 1e-6 and bad == 0
    return CheckResult("unitarity on a spectrum grid", ok,
                       f"max |R+T-1| {worst:.2e}, unconverged {bad}")


def _check_ld_limit():
    exact = (ld_reflectance(1.0, 1.0, 0.05) == 1.0
             and abs(ld_reflectance(1.05, 1.0, 0.05) - 0.5) < 1e-15
             and abs(ld_reflectance(0.95, 1.0, 0.05) - 0.5) < 1e-15)
    params = ModelParams(1e-3, 0.2, 0.05)
    grid = np.linspace(0.7, 2.2, 61)
    diffs = []
    for w in grid:
        if abs(w - 1.0) > 0.5:
            R, _, _ = totals(solve_point(w, params).channels)
            diffs.append(abs(R - ld_reflectance(w, 1.0, 0.05)))
    worst = max(diffs)
    return CheckResult("Lamb-Dicke limit", exact and worst < 0.01,
                       f"analytic points exact: {exact}, off-resonance deviation {worst:.2e}")


def run_validation(quick=False):
    """Run the invariant suite; returns a list of `CheckResult`.

    ``quick`` skips the broadened-kernel oracle (the slowest check) and
    thins the unitarity grid.
    """
    checks = [_check_displacement(), _check_row_unitarity()]
    if not quick:
        checks.append(_check_kernel_oracle())
    checks.append(_check_unitarity_grid(5 if quick else 15))
    checks.append(_check_ld_limit())
    return checks
