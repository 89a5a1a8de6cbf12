import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dhtlab import kernels as K
from dhtlab.numerics import Exponent
from dhtlab.seqops import (ConvOperator, Seq, adjoint_kernel, convolve,
                           lp_norm, scale_kernel, seq_from_csv, seq_from_json,
                           seq_to_csv, seq_to_json, _convolve_dense_direct)

# frozen direct-summation value: sqrt(2 sum_{n=1..64} (pi n)^-2)
H_WINDOW64_L2 = 0.5746230539504595


def test_lp_norm_examples():
    assert lp_norm(Seq.delta(0), 3.0) == 1.0
    assert lp_norm(Seq(0, np.ones(4)), 2.0) == 2.0
    a = Seq(1, 1.0 / (math.pi * np.arange(1, 11)))
    h10 = sum(1.0 / n for n in range(1, 11))
    assert lp_norm(a, 1.0) == pytest.approx(h10 / math.pi, abs=1e-14)
    assert lp_norm(a, Exponent(2.0)) == pytest.approx(
        math.sqrt(sum(1.0 / (math.pi * n) ** 2 for n in range(1, 11))), abs=1e-14)
    assert lp_norm(a, math.inf) == pytest.approx(1.0 / math.pi, abs=1e-15)


def test_seq_semantics():
    a = Seq(2, np.array([0.0, 1.0, 0.0, -2.0, 0.0]))
    t = a.trimmed()
    assert t.offset == 3 and list(t.values) == [1.0, 0.0, -2.0]
    assert a[3] == 1.0 and a[100] == 0.0
    assert a.shift(4)[7] == 1.0
    assert Seq.from_dict({}).is_zero()


def test_convolve_delta_returns_kernel():
    out = convolve(K.HILBERT, Seq.delta(0), 5)
    assert np.array_equal(out.values, K.HILBERT.window(5))
    assert out[1] == pytest.approx(1.0 / math.pi, abs=1e-15)


def test_convolve_two_atoms():
    a = Seq.from_dict({0: 1.0, 1: 1.0})
    assert convolve(K.HILBERT, a, 3)[0] == pytest.approx(-1.0 / math.pi, abs=1e-15)


def test_convolve_j_delta():
    assert convolve(K.J, Seq.delta(0), 2)[1] == K.j_kernel(1)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=9),
       st.lists(st.floats(-5, 5), min_size=1, max_size=9),
       st.floats(-3, 3), st.floats(-3, 3))
@settings(max_examples=40, deadline=None)
def test_convolve_linearity(av, bv, alpha, beta):
    a, b = Seq(-2, np.array(av)), Seq(-1, np.array(bv))
    combo = Seq.from_dict({n: alpha * a[n] + beta * b[n] for n in range(-12, 13)})
    lhs = convolve(K.HILBERT, combo, 8)
    ra = convolve(K.HILBERT, a, 8)
    rb = convolve(K.HILBERT, b, 8)
    scale = max(1.0, np.max(np.abs(lhs.values)))
    for n in range(-8, 9):
        assert abs(lhs[n] - (alpha * ra[n] + beta * rb[n])) <= 1e-12 * scale


def test_translation_equivariance_exact():
    a = Seq.from_dict({-1: 0.7, 2: -1.3})
    base = convolve(K.J, a, 8)
    shifted = convolve(K.J, a.shift(3), 11)
    for n in range(-8, 9):
        assert shifted[n + 3] == base[n]


def test_direct_vs_fft_large_support():
    rng = np.random.default_rng(1)
    v = rng.choice([-1.0, 1.0], size=2 ** 16)
    kw = K.HILBERT.window(2 ** 10)
    direct = _convolve_dense_direct(v[:2048], kw)
    from scipy.signal import fftconvolve
    fast = fftconvolve(v[:2048], kw)
    rel = np.max(np.abs(direct - fast)) / np.max(np.abs(direct))
    assert rel < 1e-12
    # the public path flips to FFT above the threshold and stays consistent
    big = Seq(-(2 ** 15), v)
    small_piece = Seq(-(2 ** 15), v[:400])
    out_big = convolve(K.HILBERT, big, 64)
    out_small = convolve(K.HILBERT, small_piece, 64)
    manual = out_big.values - out_small.values  # linearity across paths
    rest = Seq(-(2 ** 15) + 400, v[400:])
    out_rest = convolve(K.HILBERT, rest, 64)
    assert np.max(np.abs(manual - out_rest.values)) < 1e-12 * max(
        1.0, np.max(np.abs(out_big.values)))


def test_adjoint_kernel():
    adj = adjoint_kernel(K.HILBERT)
    for n in range(-50, 51):
        assert adj.value(n) == -K.hilbert_kernel(n)
    adj_rt = adjoint_kernel(K.RT)
    assert adj_rt.value(2) == pytest.approx(1.0 / (math.pi * (-2 + 0.5)), rel=1e-15)
    inv = adjoint_kernel(adj_rt)
    assert np.array_equal(inv.window(100), K.RT.window(100))


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=7),
       st.lists(st.floats(-3, 3), min_size=1, max_size=7))
@settings(max_examples=30, deadline=None)
def test_adjoint_inner_product(av, bv):
    a, b = Seq(-3, np.array(av)), Seq(0, np.array(bv))
    if a.trimmed().is_zero() or b.trimmed().is_zero():
        return
    Ta = convolve(K.J, a, 12)
    Ttb = convolve(adjoint_kernel(K.J), b, 12)
    ip1 = math.fsum(Ta[n] * b[n] for n in range(-12, 13))
    ip2 = math.fsum(a[n] * Ttb[n] for n in range(-12, 13))
    scale = max(1.0, abs(ip1))
    assert abs(ip1 - ip2) <= 1e-12 * scale


def test_conv_operator_truncation():
    op = ConvOperator(K.HILBERT, 8)
    a = Seq.from_dict({0: 1.0, 20: 100.0})   # the far atom must be cut by P_N
    out = op.apply(a)
    expect = convolve(K.HILBERT, Seq.delta(0), 8)
    assert np.allclose(out.values, expect.values, rtol=0, atol=1e-15)


def test_conv_operator_matrix_matches_apply():
    op = ConvOperator(K.J, 10)
    rng = np.random.default_rng(3)
    v = rng.standard_normal(21)
    assert np.max(np.abs(op.matrix() @ v - op.apply_dense(v))) < 1e-13


def test_conv_operator_window_reads():
    op = ConvOperator(K.HILBERT, 64)
    v = np.zeros(129)
    v[64] = 1.0
    val = math.sqrt(np.sum(op.apply_dense(v) ** 2))
    oracle = math.sqrt(2 * sum(1.0 / (math.pi * n) ** 2 for n in range(1, 65)))
    assert val == pytest.approx(oracle, abs=1e-13)
    assert val == pytest.approx(H_WINDOW64_L2, abs=1e-12)


def test_scale_kernel():
    k = scale_kernel(K.HILBERT, 2.0)
    assert k.value(3) == 2.0 * K.hilbert_kernel(3)


def test_seq_io_roundtrip():
    a = Seq.from_dict({-2: 1.5, 0: -0.25, 4: 3.0})
    b = seq_from_csv(seq_to_csv(a))
    assert b.offset == a.trimmed().offset
    assert np.array_equal(b.values, a.trimmed().values)
    c = seq_from_json(seq_to_json(a))
    assert c.offset == a.offset and np.array_equal(c.values, a.values)
