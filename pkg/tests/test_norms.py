import math

import numpy as np
import pytest
import scipy.linalg as sla

from dhtlab import kernels as K
from dhtlab.norms import estimate_norm, norm_sweep, sweep_is_monotone
from dhtlab.norms import test_vector_bound as vector_bound
from dhtlab.numerics import Exponent, pichorides_constant
from dhtlab.seqops import ConvOperator, Seq, adjoint_kernel, scale_kernel

P2 = Exponent(2.0)
P4 = Exponent(4.0)
P43 = Exponent(4.0 / 3.0)


def _identity_kernel():
    def batch(ns):
        v = np.where(np.asarray(ns) == 0, 1.0, 0.0).astype(float)
        return v, np.zeros_like(v)
    return K.Kernel("I", batch, parity="even", tail_exponent=99.0)


def test_vector_bound_examples():
    op = ConvOperator(K.HILBERT, 64)
    val = vector_bound(op, Seq.delta(0), P2)
    oracle = math.sqrt(2 * sum(1.0 / (math.pi * n) ** 2 for n in range(1, 65)))
    assert val == pytest.approx(oracle, abs=1e-12)
    ident = ConvOperator(_identity_kernel(), 32)
    assert vector_bound(ident, Seq.from_dict({1: 2.0, -3: 1.0}), P4) \
        == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ValueError):
        vector_bound(op, Seq.from_dict({}), P2)


def test_untruncated_convolution_translation():
    # away from truncation, the bound transported by translation is identical
    from dhtlab.seqops import convolve, lp_norm
    a, b = Seq.delta(0), Seq.delta(5)
    ra = convolve(K.HILBERT, a, 20)
    rb = convolve(K.HILBERT, b, 25)
    va = math.fsum(abs(ra[n]) ** 2 for n in range(-15, 16))
    vb = math.fsum(abs(rb[n + 5]) ** 2 for n in range(-15, 16))
    assert va == vb


def test_identity_operator_estimate():
    op = ConvOperator(_identity_kernel(), 16)
    for e in (P2, P4):
        est = estimate_norm(op, e)
        assert est.value == pytest.approx(1.0, abs=1e-12)
        assert est.converged and est.iterations <= 4


def test_zero_operator_estimate():
    def batch(ns):
        z = np.zeros(len(ns))
        return z, z
    op = ConvOperator(K.Kernel("0", batch, parity="even", tail_exponent=9), 8)
    est = estimate_norm(op, P2)
    assert est.value == 0.0 and est.converged


def test_monotone_history():
    est = estimate_norm(ConvOperator(K.HILBERT, 128), P4, max_iter=2000,
                        tol=1e-12)
    h = est.history
    assert all(b >= a - 1e-12 for a, b in zip(h, h[1:]))


def test_certificate_reproduces_value():
    op = ConvOperator(K.J, 64)
    est = estimate_norm(op, P4, max_iter=2000, tol=1e-11)
    recomputed = vector_bound(op, est.certificate, P4)
    assert recomputed == pytest.approx(est.value, abs=1e-10)


@pytest.mark.parametrize("N", [64, 256])
def test_p2_matches_dense_svd(N):
    op = ConvOperator(K.HILBERT, N)
    sigma = float(sla.svdvals(op.matrix())[0])
    est = estimate_norm(op, P2, max_iter=20000, tol=1e-13)
    assert est.value == pytest.approx(sigma, abs=1e-8)
    assert est.value <= sigma + 1e-12  # certified lower bound


def test_duality_agreement():
    op = ConvOperator(K.J, 128)
    op_t = ConvOperator(adjoint_kernel(K.J), 128)
    est_p = estimate_norm(op, P4, max_iter=4000, tol=1e-12)
    est_q = estimate_norm(op_t, P43, max_iter=4000, tol=1e-12)
    assert abs(est_p.value - est_q.value) < 1e-6


def test_scaling_homogeneity_exact():
    op = ConvOperator(K.HILBERT, 32)
    op2 = ConvOperator(scale_kernel(K.HILBERT, 2.0), 32)
    # a tiny tolerance pins both runs to the same iteration count, so the
    # homogeneity of every operation makes the doubling exact
    e1 = estimate_norm(op, P2, max_iter=60, tol=1e-18)
    e2 = estimate_norm(op2, P2, max_iter=60, tol=1e-18)
    assert e2.value == 2.0 * e1.value
    assert np.array_equal(e2.certificate.values, e1.certificate.values)


def test_unitary_variants_close_to_one_at_p2():
    for kern in (K.KAK, K.RT):
        ests = norm_sweep(kern, P2, [64, 256], max_iter=3000, tol=1e-11)
        for est in ests:
            assert est.value <= 1.0 + 1e-9
        assert ests[1].value > ests[0].value - 1e-10


def test_sweep_monotone_and_bounded():
    ests = norm_sweep(K.HILBERT, P2, [64, 256, 1024], max_iter=2000, tol=1e-10)
    vals = [e.value for e in ests]
    assert sweep_is_monotone(ests, 1e-10)
    assert all(v <= 1.0 + 1e-9 for v in vals)
    assert vals[0] < vals[1] < vals[2]


def test_estimate_validates_arguments():
    op = ConvOperator(K.HILBERT, 8)
    with pytest.raises(ValueError):
        estimate_norm(op, P2, max_iter=0)
    with pytest.raises(ValueError):
        estimate_norm(op, P2, tol=0.0)
