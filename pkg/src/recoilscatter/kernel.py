"""Photon-mediated coupling between excited motional sublevels.

The kernel is

    F(m, n) = J sum_mb  int dp  f_mb(p) / (E' - |p| + i0),
    f_mb(p) = <m|exp(i a p X)|mb> <mb|exp(-i a p X)|n>,    E' = E - (mb + 1/2) w,

taken over the intermediate phonon number ``mb``.  The ``+i0`` is split
into a principal value and half-residues at ``p = +-p*`` for every open
intermediate channel (``E' > 0``).  The principal value is evaluated by
subtracting ``f_mb`` at the pole of ``1/(E' - p)`` and adding back the
logarithm of the subtracted piece in closed form, so the remaining
integrand is smooth and only ever sampled on the real axis.

Notes on the real part
----------------------
Summed over all intermediate states, ``f_mb`` obeys a completeness
relation, ``sum_mb f_mb(p) = delta_mn``, so the principal-value integral
grows like ``log`` of the momentum cutoff.  The integral runs over
``|p| <= L`` with ``L = max(8/alpha, (1 + pad) * p*_max)``; the sum over
``mb`` is carried until the displaced Fock distributions at ``alpha * L``
are complete to ``completeness_tol``.  The result is therefore a definite,
cutoff-regulated kernel that does not depend on how many external levels
are requested.  At a channel threshold (``E' = 0``) the diagonal entry of
that channel diverges logarithmically; such indices are reported in
``KernelMatrix.singular``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .fock import reduced_elements
from .model import ModelParams, natural_units

__all__ = [
    "QuadratureConfig",
    "QuadratureError",
    "KernelMatrix",
    "KernelEngine",
    "channel_detuning",
    "open_channel_momentum",
    "integration_cutoff",
    "kernel_term",
    "kernel_matrix",
    "signed_reduced",
]

THRESHOLD_TOL = 1e-12


class QuadratureError(RuntimeError):
    """Adaptive quadrature gave up before reaching the requested tolerance."""

    def __init__(self, message, estimate, where=None):
        super().__init__(f"{message} (error estimate {estimate:.3e})")
        self.estimate = estimate
        self.where = where


@dataclass(frozen=True)
class QuadratureConfig:
    """Accuracy controls for the momentum integrals.

    ``panel_width`` is measured in units of the recoil argument
    ``alpha * p`` and ``gauss_order`` is the Gauss-Legendre order per panel.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 200
    domain_pad: float = 1.0
    panel_width: float = 0.5
    gauss_order: int = 20
    completeness_tol: float = 1e-13

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")
        if self.domain_pad < 0:
            raise ValueError("domain_pad must be non-negative")
        if self.panel_width <= 0 or self.gauss_order < 2:
            raise ValueError("invalid panel layout")


@dataclass
class KernelMatrix:
    """Kernel ``F(m, n)`` at fixed total energy, ``0 <= m, n <= n_max``.

    ``values = pv + residue``; ``pv`` is the principal-value part and
    ``residue`` the pole contribution (purely imaginary up to the
    real phase ``i**(m-n)``).  Diagonal entries listed in `singular` sit on a
    channel threshold and are ``-inf``.
    """

    e_total: float
    n_max: int
    m_bar_max: int
    values: np.ndarray
    pv: np.ndarray
    residue: np.ndarray
    cutoff: float
    error_estimate: float = 0.0
    completeness_defect: float = 0.0
    singular: tuple = ()

    def block(self, n_max):
        """Leading ``(n_max + 1)`` square block as a new KernelMatrix."""
        if n_max > self.n_max:
            raise ValueError(f"block {n_max} exceeds stored truncation {self.n_max}")
        s = slice(0, n_max + 1)
        return KernelMatrix(
            e_total=self.e_total,
            n_max=n_max,
            m_bar_max=self.m_bar_max,
            values=self.values[s, s].copy(),
            pv=self.pv[s, s].copy(),
            residue=self.residue[s, s].copy(),
            cutoff=self.cutoff,
            error_estimate=self.error_estimate,
            completeness_defect=self.completeness_defect,
            singular=tuple(i for i in self.singular if i <= n_max),
        )


def channel_detuning(e_total, m_bar, omega):
    """``E - (m_bar + 1/2) omega``, snapped to zero within round-off."""
    d = e_total - (np.asarray(m_bar) + 0.5) * omega
    scale = THRESHOLD_TOL * max(1.0, abs(e_total))
    return np.where(np.abs(d) <= scale, 0.0, d)[()]


def open_channel_momentum(e_total, m_bar, omega, v_g=1.0):
    """Pole momentum ``p*`` of intermediate channel `m_bar`, or None if closed."""
    d = float(channel_detuning(e_total, m_bar, omega))
    return d / v_g if d > 0 else None


def integration_cutoff(alpha, e_total, omega, pad=1.0):
    p_max = max(float(channel_detuning(e_total, 0, omega)), 0.0)
    return max(8.0 / alpha, (1.0 + pad) * p_max)


def signed_reduced(rows, cols, beta):
    """Real factors ``q`` with ``f_mb(p)_{mn} = i**(m-n) q[m, mb] q[n, mb]``."""
    rows = np.atleast_1d(rows)
    cols = np.atleast_1d(cols)
    diff = cols[None, :] - rows[:, None]
    s = np.where((diff > 0) & (diff % 2 == 1), -1.0, 1.0)
    return reduced_elements(rows, cols, beta) * s


def _even_phase(n):
    idx = np.arange(n + 1)
    d = idx[:, None] - idx[None, :]
    even = d % 2 == 0
    return np.where(even, np.where((d // 2) % 2 == 0, 1.0, -1.0), 0.0)


def _subtracted_log(detuning, cutoff):
    """Closed form of ``int_0^L dp / (E' - p)`` (principal value)."""
    with np.errstate(divide="ignore"):
        return np.log(np.abs(detuning)) - np.log(np.abs(detuning - cutoff))


# ---------------------------------------------------------------------------
# single term, scalar quadrature


def kernel_term(m, n, m_bar, e_total, params: ModelParams, quad: QuadratureConfig | None = None):
    """Contribution of one intermediate channel `m_bar` to ``F(m, n)``.

    Evaluated with scipy's adaptive quadrature on the folded half-line; used
    as a cross-check of :class:`KernelEngine`.
    """
    quad = quad or QuadratureConfig()
    u = natural_units(params)
    if (m - n) % 2:
        return 0j
    det = float(channel_detuning(e_total, m_bar, u.omega))
    L = integration_cutoff(u.alpha, e_total, u.omega, quad.domain_pad)

    def g(p):
        q = signed_reduced([m, n], [m_bar], u.alpha * p)
        return q[..., 0, 0] * q[..., 1, 0]

    anchored = -L <= det <= L
    g_a = float(g(abs(det))) if anchored else 0.0

    def integrand(p):
        if anchored and abs(p - det) < 1e-13 * max(1.0, L):
            h = 1e-7 * max(1.0, abs(det))
            return -(float(g(p + h)) - float(g(p - h))) / (2 * h)
        return (float(g(p)) - g_a) / (det - p)

    edges = np.arange(0.0, u.alpha * L + quad.panel_width, quad.panel_width) / u.alpha
    edges[-1] = L
    edges = np.unique(np.concatenate([edges, [det] if 0 < det < L else []]))
    total, err = 0.0, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for a, b in zip(edges[:-1], edges[1:]):
            try:
                val, e = integrate.quad(
                    integrand, a, b, epsabs=quad.abs_tol, epsrel=quad.rel_tol,
                    limit=quad.max_subdivisions,
                )
            except integrate.IntegrationWarning as exc:
                raise QuadratureError(str(exc), float("nan"), (m, n, m_bar)) from exc
            total += val
            err += e

    if anchored:
        if det == 0.0:
            if g_a != 0.0:
                return complex(-math.inf, 0.0)
        else:
            total += g_a * float(_subtracted_log(det, L))
    residue = g_a if det > 0 else 0.0
    phase = (-1.0) ** ((m - n) // 2)
    return 2.0 * u.J * phase * complex(total, -math.pi * residue)


# ---------------------------------------------------------------------------
# vectorized engine


@dataclass
class _Layout:
    cutoff: float
    m_bar_max: int
    completeness_defect: float
    base_edges: np.ndarray
    cache: dict = field(default_factory=dict)


class KernelEngine:
    """Kernel matrices for one model at many energies.

    Displacement factors at the quadrature nodes do not depend on the
    energy, so they are computed once per panel and reused; only the
    energy denominators change from call to call.
    """

    def __init__(self, params: ModelParams, n_max: int, m_bar_max: int | None = None,
                 quad: QuadratureConfig | None = None):
        if n_max < 0:
            raise ValueError("n_max must be non-negative")
        if m_bar_max is not None and m_bar_max < n_max:
            raise ValueError("m_bar_max must be at least n_max")
        self.params = params
        self.units = natural_units(params)
        self.n_max = int(n_max)
        self.fixed_m_bar_max = m_bar_max
        self.quad = quad or QuadratureConfig()
        self._layouts = {}
        x, w = np.polynomial.legendre.leggauss(self.quad.gauss_order)
        self._gl = (x, w)
        self._even = _even_phase(self.n_max) != 0

    # -- layout ------------------------------------------------------------

    def _completeness_defect(self, m_bar_max, beta):
        q = signed_reduced(np.arange(self.n_max + 1), np.arange(m_bar_max + 1), beta)
        return float(np.max(np.abs(1.0 - np.sum(q * q, axis=-1))))

    def _choose_m_bar_max(self, beta_max):
        tol = self.quad.completeness_tol
        spread = math.sqrt(self.n_max) + beta_max
        M = max(self.n_max + 15, int(math.ceil(spread * spread + 6.0 * spread + 10)))
        betas = np.linspace(0.0, beta_max, 9)[1:]
        while True:
            defect = self._completeness_defect(M, betas)
            if defect < tol:
                return M, defect
            M = int(M * 1.2) + 5

    def _layout(self, cutoff):
        key = round(cutoff, 12)
        lay = self._layouts.get(key)
        if lay is not None:
            return lay
        alpha = self.units.alpha
        beta_max = alpha * cutoff
        if self.fixed_m_bar_max is None:
            M, defect = self._choose_m_bar_max(beta_max)
        else:
            M = self.fixed_m_bar_max
            defect = self._completeness_defect(M, np.linspace(0.0, beta_max, 9)[1:])
        n_panels = max(1, int(math.ceil(beta_max / self.quad.panel_width)))
        edges = np.linspace(0.0, cutoff, n_panels + 1)
        lay = _Layout(cutoff, M, defect, edges)
        self._layouts[key] = lay
        return lay

    def _nodes(self, lay, a, b):
        key = (a, b)
        hit = lay.cache.get(key)
        if hit is None:
            x, w = self._gl
            p = 0.5 * (b - a) * x + 0.5 * (b + a)
            q = signed_reduced(np.arange(self.n_max + 1), np.arange(lay.m_bar_max + 1),
                               self.units.alpha * p)
            hit = (p, 0.5 * (b - a) * w, q)
            lay.cache[key] = hit
        return hit

    # -- evaluation ----------------------------------------------------------

    def _panel(self, lay, a, b, det, anchor_mat, anchored):
        p, w, q = self._nodes(lay, a, b)
        h = 1.0 / (det[None, :] - p[:, None])
        wh = w[:, None] * h
        raw = np.tensordot(q * wh[:, None, :], q, axes=([0, 2], [0, 2]))
        s = np.where(anchored, wh.sum(axis=0), 0.0)
        # odd m - n vanish on the full line; on the folded domain they are junk
        return (raw - anchor_mat @ s) * self._even

    def _too_close(self, det, a, b):
        """Poles that sit (almost) on a Gauss node of panel [a, b]."""
        x, _ = self._gl
        p = 0.5 * (b - a) * x + 0.5 * (b + a)
        inside = det[(det > a) & (det < b)]
        if inside.size == 0:
            return inside
        gap = np.min(np.abs(inside[:, None] - p[None, :]), axis=1)
        return inside[gap < 1e-9 * (b - a)]

    def matrix(self, e_total) -> KernelMatrix:
        u = self.units
        N = self.n_max
        cutoff = integration_cutoff(u.alpha, e_total, u.omega, self.quad.domain_pad)
        lay = self._layout(cutoff)
        M = lay.m_bar_max
        mb = np.arange(M + 1)
        det = np.asarray(channel_detuning(e_total, mb, u.omega), dtype=float)
        anchored = (det >= -cutoff) & (det <= cutoff)
        is_open = det > 0
        threshold = det == 0.0

        # f_mb evaluated at each channel's own pole |E'|
        anchor_mat = np.zeros((N + 1, N + 1, M + 1))
        idx = np.nonzero(anchored)[0]
        if idx.size:
            qa = signed_reduced(np.arange(N + 1), idx, u.alpha * np.abs(det[idx]))
            # qa[j, m, c] -> column c == idx[j]
            cols = qa[np.arange(idx.size), :, np.arange(idx.size)]
            anchor_mat[:, :, idx] = np.einsum("jm,jn->mnj", cols, cols)

        panels = [(float(a), float(b)) for a, b in zip(lay.base_edges[:-1], lay.base_edges[1:])]
        panels = self._split_at_close_poles(panels, det)

        def estimate(a, b):
            c = 0.5 * (a + b)
            whole = self._panel(lay, a, b, det, anchor_mat, anchored)
            left = self._panel(lay, a, c, det, anchor_mat, anchored)
            right = self._panel(lay, c, b, det, anchor_mat, anchored)
            halves = left + right
            return halves, float(np.max(np.abs(halves - whole)))

        results = {pn: estimate(*pn) for pn in panels}
        subdivisions = 0
        while True:
            total = sum(v for v, _ in results.values())
            err = sum(e for _, e in results.values())
            tol = max(self.quad.abs_tol, self.quad.rel_tol * float(np.max(np.abs(total))))
            if err <= tol:
                break
            span = cutoff
            bad = [pn for pn, (_, e) in results.items() if e > tol * (pn[1] - pn[0]) / span]
            if not bad:
                bad = [max(results, key=lambda pn: results[pn][1])]
            for a, b in bad:
                subdivisions += 1
                if subdivisions > self.quad.max_subdivisions:
                    raise QuadratureError(
                        f"kernel quadrature did not converge at E={e_total!r}", 2 * u.J * err
                    )
                del results[(a, b)]
                c = 0.5 * (a + b)
                for pn in self._split_at_close_poles([(a, c), (c, b)], det):
                    results[pn] = estimate(*pn)

        logs = np.zeros(M + 1)
        finite = anchored & ~threshold
        logs[finite] = _subtracted_log(det[finite], cutoff)
        pv = total + anchor_mat @ logs
        singular = []
        for c in np.nonzero(threshold)[0]:
            if c <= N:
                singular.append(int(c))
        res = anchor_mat @ is_open.astype(float)

        phase = _even_phase(N)
        scale = 2.0 * u.J
        pv_c = scale * phase * pv + 0j
        res_c = -1j * math.pi * scale * phase * res
        for c in singular:
            pv_c[c, c] = complex(-math.inf, 0.0)
        return KernelMatrix(
            e_total=float(e_total),
            n_max=N,
            m_bar_max=M,
            values=pv_c + res_c,
            pv=pv_c,
            residue=res_c,
            cutoff=cutoff,
            error_estimate=scale * err,
            completeness_defect=lay.completeness_defect,
            singular=tuple(singular),
        )

    def _split_at_close_poles(self, panels, det):
        out = []
        for a, b in panels:
            close = self._too_close(det, a, b)
            if close.size:
                edges = np.unique(np.concatenate([[a], close, [b]]))
                out.extend((float(x), float(y)) for x, y in zip(edges[:-1], edges[1:]))
            else:
                out.append((a, b))
        return out


def kernel_matrix(e_total, params: ModelParams, n_max: int, m_bar_max: int | None = None,
                  quad: QuadratureConfig | None = None) -> KernelMatrix:
    """``F(m, n)`` for ``0 <= m, n <= n_max`` at total energy `e_total`.

    With ``m_bar_max=None`` the intermediate sum is extended until the
    displaced Fock distributions are complete over the integration domain.
    """
    return KernelEngine(params, n_max, m_bar_max, quad).matrix(e_total)
