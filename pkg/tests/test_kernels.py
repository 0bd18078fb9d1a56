"""Convolution kernel contract, hand oracles, and backend parity.

The tiny-case expectations are worked by hand from the definition
out[n,o,t] = b[o] + sum_k w[o,c,k] * x[n,c,t - k*dil] (zero padded):
tap 0 reads the current step, tap k reaches k*dil steps back.
"""
import os
import subprocess
import sys

import numpy as np
import pytest

from envinv.nn.kernels import BACKEND, conv1d_backward, conv1d_forward
from envinv.nn.kernels import numpy_backend as npk

try:
    from envinv.nn.kernels import _ckernels as ck
except ImportError:
    ck = None

BACKENDS = [("numpy", npk)] + ([("compiled", ck)] if ck is not None else [])


@pytest.mark.parametrize("name,mod", BACKENDS)
class TestHandOracles:
    def test_dilation_one(self, name, mod):
        # x=[1,2,3], w=(current=2, previous=10), b=1:
        #   t=0: 1 + 2*1 + 10*0 = 3
        #   t=1: 1 + 2*2 + 10*1 = 15
        #   t=2: 1 + 2*3 + 10*2 = 27
        x = np.array([[[1.0, 2.0, 3.0]]])
        w = np.array([[[2.0, 10.0]]])
        b = np.array([1.0])
        out = mod.conv1d_forward(x, w, b, 1)
        np.testing.assert_array_equal(out, [[[3.0, 15.0, 27.0]]])

    def test_dilation_two(self, name, mod):
        # same filter, dilation 2 reaches x[t-2]:
        #   t=0: 1+2*1=3, t=1: 1+2*2=5, t=2: 1+2*3+10*1=17
        x = np.array([[[1.0, 2.0, 3.0]]])
        w = np.array([[[2.0, 10.0]]])
        b = np.array([1.0])
        out = mod.conv1d_forward(x, w, b, 2)
        np.testing.assert_array_equal(out, [[[3.0, 5.0, 17.0]]])

    def test_identity_filter(self, name, mod):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((2, 3, 12))
        w = np.zeros((3, 3, 3))
        for c in range(3):
            w[c, c, 0] = 1.0
        out = mod.conv1d_forward(x, w, np.zeros(3), 4)
        np.testing.assert_allclose(out, x, atol=1e-15)

    def test_causality(self, name, mod):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((1, 2, 20))
        w = rng.standard_normal((4, 2, 3))
        b = rng.standard_normal(4)
        base = mod.conv1d_forward(x, w, b, 2)
        bumped = x.copy()
        bumped[0, :, 11] += 5.0
        out = mod.conv1d_forward(bumped, w, b, 2)
        np.testing.assert_array_equal(out[0, :, :11], base[0, :, :11])
        assert not np.allclose(out[0, :, 11], base[0, :, 11])


@pytest.mark.skipif(ck is None, reason="compiled kernels not built")
@pytest.mark.parametrize("dilation", [1, 2, 3, 16, 64])
@pytest.mark.parametrize("seed", range(3))
def test_backend_parity(dilation, seed):
    rng = np.random.default_rng(seed)
    b_, cin, cout, t, k = 3, 5, 7, 50, 3
    x = rng.standard_normal((b_, cin, t))
    w = rng.standard_normal((cout, cin, k))
    bias = rng.standard_normal(cout)
    gy = rng.standard_normal((b_, cout, t))

    np.testing.assert_allclose(
        npk.conv1d_forward(x, w, bias, dilation),
        ck.conv1d_forward(x, w, bias, dilation),
        atol=1e-12,
    )
    ngx, ngw, ngb = npk.conv1d_backward(x, w, gy, dilation)
    cgx, cgw, cgb = ck.conv1d_backward(x, w, gy, dilation)
    np.testing.assert_allclose(ngx, cgx, atol=1e-12)
    np.testing.assert_allclose(ngw, cgw, atol=1e-12)
    np.testing.assert_allclose(ngb, cgb, atol=1e-12)


def test_backward_matches_numeric_sum():
    # gradient of sum(out * gy) w.r.t. x, w, b via finite differences
    rng = np.random.default_rng(7)
    x = rng.standard_normal((2, 2, 9))
    w = rng.standard_normal((3, 2, 3))
    b = rng.standard_normal(3)
    gy = rng.standard_normal((2, 3, 9))
    dil = 2

    gx, gw, gb = npk.conv1d_backward(x, w, gy, dil)

    def loss():
        return float(np.sum(npk.conv1d_forward(x, w, b, dil) * gy))

    h = 1e-6
    for arr, grad in ((x, gx), (w, gw), (b, gb)):
        flat, gflat = arr.reshape(-1), grad.reshape(-1)
        for i in range(0, flat.size, max(1, flat.size // 10)):
            keep = flat[i]
            flat[i] = keep + h
            hi = loss()
            flat[i] = keep - h
            lo = loss()
            flat[i] = keep
            assert abs((hi - lo) / (2 * h) - gflat[i]) < 1e-5


def test_force_numpy_env_var():
    env = dict(os.environ, ENVINV_FORCE_NUMPY="1")
    out = subprocess.run(
        [sys.executable, "-c", "from envinv.nn.kernels import BACKEND; print(BACKEND)"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == "numpy"


def test_active_backend_is_reported():
    assert BACKEND in ("compiled", "numpy")
    x = np.zeros((1, 1, 4))
    out = conv1d_forward(x, np.ones((1, 1, 1)), np.zeros(1), 1)
    assert out.shape == (1, 1, 4)
    gx, gw, gb = conv1d_backward(x, np.ones((1, 1, 1)), np.ones((1, 1, 4)), 1)
    assert gx.shape == x.shape and gw.shape == (1, 1, 1) and gb.shape == (1,)
