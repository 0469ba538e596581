"""Fock-space matrix elements of the recoil operator exp(+-i beta (a^dag + a)).

For integer ``m, n`` and real ``beta`` the element is

    <m| exp(s i beta X) |n> = (s i beta)**d * sqrt(k!/(k+d)!) * exp(-beta**2/2)
                              * L_k^d(beta**2),

with ``X = a^dag + a``, ``k = min(m, n)``, ``d = |m - n|`` and ``s = +-1``.
Everything except the phase ``(s i)**d`` is real, so the heavy lifting is
done on the real "reduced" element and the phase is attached at the end.
Factorial ratios go through ``lgamma`` and are exponentiated together with
the power and the Gaussian, which keeps indices in the hundreds finite.
"""

from __future__ import annotations

from math import lgamma

import numpy as np

__all__ = [
    "laguerre_assoc",
    "reduced_elements",
    "displacement_element",
    "displacement_row",
    "displacement_matrix",
    "phase_factor",
]

_PHASES = np.array([1.0, 1.0j, -1.0, -1.0j])


def laguerre_assoc(n, a, x):
    """Generalized Laguerre polynomial ``L_n^a(x)`` by upward recurrence.

    Parameters
    ----------
    n : int
        Degree, ``n >= 0``.
    a : int or array_like
        Order, ``a >= 0``.  Broadcasts against `x`.
    x : float or array_like
        Evaluation points, ``x >= 0``.

    Returns
    -------
    float or numpy.ndarray
    """
    if n < 0:
        raise ValueError("degree must be non-negative")
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    prev = np.ones(np.broadcast(x, a).shape)
    if n == 0:
        return prev[()]
    cur = 1.0 + a - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + a - x) * cur - (k + a) * prev) / (k + 1)
    return cur[()]


def _laguerre_table(kmax, orders, x):
    """``L_k^a(x)`` for ``k = 0..kmax`` and each order in `orders`.

    `x` has shape ``S``; the result has shape ``S + (kmax + 1, len(orders))``.
    """
    x = np.asarray(x, dtype=float)[..., None]
    a = np.asarray(orders, dtype=float)
    out = np.empty(x.shape[:-1] + (kmax + 1, a.size))
    prev = np.ones(np.broadcast_shapes(x.shape, a.shape))
    out[..., 0, :] = prev
    if kmax == 0:
        return out
    cur = 1.0 + a - x
    out[..., 1, :] = cur
    for k in range(1, kmax):
        prev, cur = cur, ((2 * k + 1 + a - x) * cur - (k + a) * prev) / (k + 1)
        out[..., k + 1, :] = cur
    return out


def reduced_elements(rows, cols, beta):
    """Phase-free displacement elements ``r[..., i, j]``.

    ``r`` is defined through ``<m|exp(s i beta X)|n> = (s i)**|m-n| * r``
    with ``m = rows[i]``, ``n = cols[j]``.  `beta` may be an array of any
    shape, which is prepended to the output shape.
    """
    rows = np.atleast_1d(np.asarray(rows, dtype=np.int64))
    cols = np.atleast_1d(np.asarray(cols, dtype=np.int64))
    if rows.size and rows.min() < 0 or cols.size and cols.min() < 0:
        raise ValueError("Fock indices must be non-negative")
    beta = np.asarray(beta, dtype=float)

    k = np.minimum(rows[:, None], cols[None, :])
    d = np.abs(rows[:, None] - cols[None, :])
    orders, d_index = np.unique(d, return_inverse=True)
    d_index = d_index.reshape(d.shape)
    table = _laguerre_table(int(k.max()), orders, beta * beta)
    lag = table[..., k, d_index]

    log_ratio = 0.5 * (
        np.vectorize(lgamma, otypes=[float])(k + 1.0)
        - np.vectorize(lgamma, otypes=[float])(k + d + 1.0)
    )
    b = beta[..., None, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        log_power = np.where(d == 0, 0.0, d * np.log(np.abs(b)))
    pref = np.exp(log_power - 0.5 * b * b + log_ratio)
    odd_negative = (b < 0) & (d % 2 == 1)
    pref = np.where(odd_negative, -pref, pref)
    return pref * lag


def phase_factor(rows, cols, sign=1):
    """``(sign * i)**|m - n|`` on the index grid."""
    rows = np.atleast_1d(np.asarray(rows, dtype=np.int64))
    cols = np.atleast_1d(np.asarray(cols, dtype=np.int64))
    d = np.abs(rows[:, None] - cols[None, :])
    ph = _PHASES[d % 4]
    return ph if sign > 0 else np.conj(ph)


def _check_sign(sign):
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")


def displacement_element(m, n, beta, sign=1):
    """``<m| exp(sign * i * beta * (a^dag + a)) |n>`` as a complex number."""
    _check_sign(sign)
    r = reduced_elements([m], [n], beta)[..., 0, 0]
    return (r * phase_factor([m], [n], sign)[0, 0])[()]


def displacement_row(m_max, n, beta, sign=1):
    """Elements ``<m|exp(sign i beta X)|n>`` for ``m = 0..m_max``."""
    _check_sign(sign)
    if m_max < 0:
        raise ValueError("m_max must be non-negative")
    rows = np.arange(m_max + 1)
    r = reduced_elements(rows, [n], beta)[..., :, 0]
    return r * phase_factor(rows, [n], sign)[:, 0]


def displacement_matrix(m_max, n_max, beta, sign=1):
    """Rectangular block ``<m|exp(sign i beta X)|n>``, ``m <= m_max``, ``n <= n_max``."""
    _check_sign(sign)
    rows = np.arange(m_max + 1)
    cols = np.arange(n_max + 1)
    return reduced_elements(rows, cols, beta) * phase_factor(rows, cols, sign)
