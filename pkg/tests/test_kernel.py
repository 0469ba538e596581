import math

import numpy as np
import pytest

from recoilscatter import ModelParams, natural_units
from recoilscatter.kernel import (
    KernelEngine,
    QuadratureConfig,
    QuadratureError,
    channel_detuning,
    integration_cutoff,
    kernel_matrix,
    kernel_term,
    open_channel_momentum,
)
from recoilscatter.validation import eta_oracle_kernel

BASE = ModelParams(0.8, 0.2, 0.05)
E_RES = 1.1  # omega_k = Omega at omega = 0.2

# Broadened-denominator oracle (eta in {1e-2, 1e-3, 1e-4}, extrapolated to 0),
# full momentum line, cutoff 10, 171 intermediate levels.
ORACLE_BLOCK = {
    (0, 0): -0.22163755198086915 - 0.4598749662926853j,
    (1, 1): -0.253955790544392 - 0.48688119858647827j,
    (2, 0): -0.005429199535455772 + 0.006744823839009568j,
    (4, 4): -0.5370542165841702 - 0.6595030772231805j,
    (3, 1): -0.009883616223040901 + 0.015519136111655781j,
    (4, 0): 0.0006014819007435181 + 4.405352553911347e-05j,
}
ORACLE_TERMS = {
    (0, 0, 0): 0.21012122064706112 - 0.29554694065278275j,
    (2, 0, 1): -0.03994395347355153 - 0.1714112147352596j,
    (1, 1, 3): -0.0731135761442987 - 0.007423842087901034j,
    (2, 2, 7): -0.015025788455903105 + 0j,
}


@pytest.fixture(scope="module")
def base_kernel():
    return KernelEngine(BASE, 4).matrix(E_RES)


def test_open_channel_momentum():
    w = 0.2
    assert open_channel_momentum(w / 2, 0, w) is None
    assert open_channel_momentum(1.1, 0, w) == pytest.approx(1.0)
    assert open_channel_momentum(1.1, 5, w) is None
    assert open_channel_momentum(1.1, 4, w) == pytest.approx(0.2)


def test_threshold_snapping():
    assert channel_detuning(1.1, 5, 0.2) == 0.0
    assert channel_detuning(1.0 + 0.1, 5, 0.2) == 0.0


def test_cutoff_covers_poles_and_gaussian():
    assert integration_cutoff(0.8, 1.1, 0.2) == 10.0
    assert integration_cutoff(1e-3, 1.1, 0.2) == 8000.0
    assert integration_cutoff(5.0, 3.1, 0.2) == pytest.approx(6.0)


@pytest.mark.parametrize("key", sorted(ORACLE_BLOCK))
def test_block_matches_eta_oracle(base_kernel, key):
    assert abs(base_kernel.values[key] - ORACLE_BLOCK[key]) < 1e-6


@pytest.mark.parametrize("key", sorted(ORACLE_TERMS))
def test_single_terms_match_eta_oracle(key):
    assert abs(kernel_term(*key, E_RES, BASE) - ORACLE_TERMS[key]) < 1e-6


def test_closed_intermediate_channel_is_real():
    v = kernel_term(2, 2, 7, E_RES, BASE)
    assert v.imag == 0.0
    assert v.real != 0.0


def test_odd_index_difference_vanishes(base_kernel):
    idx = np.arange(5)
    odd = (idx[:, None] - idx[None, :]) % 2 == 1
    assert np.all(base_kernel.values[odd] == 0)
    assert kernel_term(1, 0, 0, E_RES, BASE) == 0


def test_engine_equals_sum_of_terms(base_kernel):
    M = base_kernel.m_bar_max
    for m, n in [(3, 1)]:
        total = sum(kernel_term(m, n, mb, E_RES, BASE) for mb in range(M + 1))
        assert abs(total - base_kernel.values[m, n]) < 1e-9


def test_symmetric(base_kernel):
    F = base_kernel.values
    assert np.abs(F - F.T).max() < 1e-12


def test_decay_not_gain(base_kernel):
    assert np.all(np.diag(base_kernel.values).imag <= 0)


def test_split_into_pv_and_residue(base_kernel):
    K = base_kernel
    assert np.allclose(K.pv + K.residue, K.values, rtol=0, atol=1e-15)
    # pv is real and residue imaginary once the i**(m-n) phase is stripped
    assert np.all(K.pv.imag == 0)
    assert np.all(K.residue.real == 0)


def test_residue_closed_form(base_kernel):
    # -i pi J sum over open channels of f at +-p*, from the displacement elements
    from recoilscatter.fock import displacement_matrix

    u = natural_units(BASE)
    K = base_kernel
    expect = np.zeros((5, 5), complex)
    for mb in range(K.m_bar_max + 1):
        p = open_channel_momentum(E_RES, mb, u.omega)
        if p is None:
            continue
        for s in (1, -1):
            A = displacement_matrix(4, mb, s * u.alpha * p, +1)[:, mb]
            B = displacement_matrix(mb, 4, s * u.alpha * p, -1)[mb, :]
            expect += -1j * math.pi * u.J * np.outer(A, B)
    assert np.abs(expect - K.residue).max() < 1e-13


def test_m_bar_convergence(base_kernel):
    wider = KernelEngine(BASE, 4, m_bar_max=base_kernel.m_bar_max + 10).matrix(E_RES)
    assert np.abs(wider.values - base_kernel.values).max() < 1e-8
    assert base_kernel.completeness_defect < 1e-13


def test_independent_of_truncation():
    small = KernelEngine(BASE, 4).matrix(E_RES)
    big = KernelEngine(BASE, 12).matrix(E_RES)
    assert np.abs(big.block(4).values - small.values).max() < 1e-9


def test_lamb_dicke_limit_diagonal_decay():
    p = ModelParams(1e-3, 0.2, 0.05)
    u = natural_units(p)
    E = 1.05 + 0.1
    K = kernel_matrix(E, p, 7)
    im = np.diag(K.values).imag
    # channels m <= 5 open at this energy, 6 and 7 closed
    assert np.allclose(im[:6] * u.J, -u.Gamma, rtol=1e-5)
    # closed sublevels decay only through O(eps^2) admixture of open ones
    assert np.all(np.abs(im[6:]) < 1e-6)
    off = K.values - np.diag(np.diag(K.values))
    assert np.abs(off).max() < 1e-2 * np.abs(np.diag(K.values)).max()


def test_scales_with_J():
    a = kernel_matrix(E_RES, ModelParams(0.8, 0.2, 0.05), 3)
    b = kernel_matrix(E_RES, ModelParams(0.8, 0.2, 0.2), 3)
    assert np.allclose(b.values, 2 * a.values, rtol=1e-12, atol=1e-15)
    tiny = kernel_matrix(E_RES, ModelParams(0.8, 0.2, 1e-200), 3)
    assert np.abs(tiny.values).max() < 1e-99


def test_threshold_diagonal_is_singular():
    K = kernel_matrix(E_RES, BASE, 7)
    assert K.singular == (5,)
    assert K.values[5, 5].real == -math.inf
    assert np.all(np.isfinite(np.delete(np.diag(K.values), 5)))
    assert math.isinf(kernel_term(5, 5, 5, E_RES, BASE).real)


def test_block_view(base_kernel):
    b = base_kernel.block(2)
    assert b.n_max == 2
    assert np.array_equal(b.values, base_kernel.values[:3, :3])
    with pytest.raises(ValueError):
        base_kernel.block(9)


def test_quadrature_failure_is_reported():
    quad = QuadratureConfig(abs_tol=1e-16, rel_tol=1e-16, max_subdivisions=1)
    with pytest.raises(QuadratureError) as info:
        KernelEngine(BASE, 4, quad=quad).matrix(E_RES)
    assert info.value.estimate > 0


def test_quad_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(abs_tol=0)
    with pytest.raises(ValueError):
        QuadratureConfig(max_subdivisions=0)


def test_eta_oracle_small_block_live():
    # live spot check on a 2x2 block, independent of the frozen numbers
    K = KernelEngine(BASE, 1).matrix(1.3)
    ref, per_eta = eta_oracle_kernel(1.3, BASE, 1, K.m_bar_max, K.cutoff)
    assert np.abs(ref - K.values).max() < 1e-6
    # raw broadened values converge toward the extrapolation
    errs = [np.abs(b - ref).max() for b in per_eta]
    assert errs[0] > errs[1] > errs[2]
