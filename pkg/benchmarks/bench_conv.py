"""Compare the compiled convolution kernels against the numpy fallback.

Run:  python benchmarks/bench_conv.py [--reps 25]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from envinv.nn.kernels import BACKEND
from envinv.nn.kernels import numpy_backend as npk

try:
    from envinv.nn.kernels import _ckernels as ck
except ImportError:
    ck = None

SHAPES = [
    # batch, channels in/out, length, kernel, dilation
    (16, 4, 32, 288, 3, 1),
    (16, 32, 32, 288, 3, 16),
    (16, 32, 32, 1440, 3, 256),
    (4, 32, 32, 1440, 3, 512),
]


def _time(fn, reps: int) -> float:
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--reps", type=int, default=25)
    args = parser.parse_args()

    print(f"active backend: {BACKEND}")
    if ck is None:
        print("compiled kernels unavailable; showing numpy fallback only")

    header = f"{'shape (B,Cin,Cout,T,K,dil)':<34} {'numpy fwd':>10} {'cy fwd':>10} {'numpy bwd':>10} {'cy bwd':>10}"
    print(header)
    print("-" * len(header))
    rng = np.random.default_rng(0)
    for b, cin, cout, t, k, dil in SHAPES:
        x = rng.standard_normal((b, cin, t))
        w = rng.standard_normal((cout, cin, k))
        bias = rng.standard_normal(cout)
        gy = rng.standard_normal((b, cout, t))

        ref = npk.conv1d_forward(x, w, bias, dil)
        n_fwd = _time(lambda: npk.conv1d_forward(x, w, bias, dil), args.reps)
        n_bwd = _time(lambda: npk.conv1d_backward(x, w, gy, dil), args.reps)
        if ck is not None:
            got = ck.conv1d_forward(x, w, bias, dil)
            assert np.allclose(ref, got, atol=1e-12), "backend outputs diverge"
            c_fwd = _time(lambda: ck.conv1d_forward(x, w, bias, dil), args.reps)
            c_bwd = _time(lambda: ck.conv1d_backward(x, w, gy, dil), args.reps)
            cf, cb = f"{c_fwd * 1e3:8.2f}ms", f"{c_bwd * 1e3:8.2f}ms"
        else:
            cf = cb = "      n/a"
        shape = f"({b},{cin},{cout},{t},{k},{dil})"
        print(f"{shape:<34} {n_fwd * 1e3:8.2f}ms {cf} {n_bwd * 1e3:8.2f}ms {cb}")


if __name__ == "__main__":
    main()
