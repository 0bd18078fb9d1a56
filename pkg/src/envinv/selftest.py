"""Built-in verification suite behind `envinv selftest`.

Two families of checks, both against oracles implemented here and nowhere
else in the package.  Numerics: every backward rule is compared with central
finite differences of its own forward pass (h=1e-5, float64), primitives to
1e-4 relative error and composed graphs to 1e-3.  Metrics: auroc against
quadratic pair counting, weighted F1 against an explicit confusion matrix,
kNN against a pure-Python exhaustive scan.

The point of shipping this inside the package rather than leaving it to the
test suite is operational: a deployment can prove its numeric kernel and
metric stack sane from the command line, whichever conv backend got loaded.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .detect.knn import knn_classify
from .detect.regressor import RegressorParams, regressor_loss
from .evaluate.metrics import auroc, weighted_f1
from .nn import ops
from .nn.encoder import (
    EncoderParams,
    init_encoder,
    init_predictor,
    predict_env_log_probs,
    tcn_encode,
)
from .nn.tensor import constant, param

H = 1e-5
PRIMITIVE_TOL = 1e-4
COMPOSED_TOL = 1e-3
METRIC_TOL = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        mark = "ok  " if self.passed else "FAIL"
        return f"{mark} {self.name}: {self.detail}"


def _numeric_grad(f: Callable[[], float], array: np.ndarray) -> np.ndarray:
    grad = np.zeros_like(array)
    flat = array.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        keep = flat[i]
        flat[i] = keep + H
        hi = f()
        flat[i] = keep - H
        lo = f()
        flat[i] = keep
        gflat[i] = (hi - lo) / (2.0 * H)
    return grad


def _rel_err(analytic: np.ndarray, numeric: np.ndarray) -> float:
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1.0)
    return float(np.max(np.abs(analytic - numeric) / denom))


def _grad_gap(build: Callable, arrays: list[np.ndarray]) -> float:
    """Worst relative error between backward and central differences."""
    leaves = [param(a) for a in arrays]
    build(leaves).backward()
    analytic = [leaf.grad.copy() for leaf in leaves]

    def forward() -> float:
        return build([param(a) for a in arrays]).item()

    worst = 0.0
    for got, a in zip(analytic, arrays):
        worst = max(worst, _rel_err(got, _numeric_grad(forward, a)))
    return worst


def _away_from_kinks(x: np.ndarray, margin: float = 1e-3) -> np.ndarray:
    return np.where(np.abs(x) < margin, x + 2 * margin, x)


def _grad_check(name, seeds, case, tol=PRIMITIVE_TOL) -> CheckResult:
    """case(rng) -> (build, arrays); worst error over all seeds decides."""
    worst = 0.0
    for seed in seeds:
        build, arrays = case(np.random.default_rng(seed))
        worst = max(worst, _grad_gap(build, arrays))
    return CheckResult(name, worst < tol, f"max rel err {worst:.2e} (tol {tol:.0e})")


def _case_conv(dilation):
    def case(rng):
        x = rng.standard_normal((2, 3, 10))
        w = rng.standard_normal((4, 3, 3))
        b = rng.standard_normal(4)
        return (
            lambda p: ops.mean_all(
                ops.square(ops.causal_dilated_conv1d(p[0], p[1], p[2], dilation))
            ),
            [x, w, b],
        )

    return case


def _case_leaky(slope):
    def case(rng):
        x = _away_from_kinks(rng.standard_normal((4, 7)))
        return lambda p: ops.mean_all(ops.square(ops.leaky_relu(p[0], slope=slope))), [x]

    return case


def _case_arith(rng):
    a = rng.standard_normal((3, 5))
    b = rng.standard_normal((3, 5))
    return (
        lambda p: ops.mean_all(
            ops.square(
                ops.scale(ops.subtract(ops.add(p[0], p[1]), ops.scale(p[1], 0.5)), -2.5)
            )
        ),
        [a, b],
    )


def _case_linear(rng):
    x = rng.standard_normal((4, 6))
    w = rng.standard_normal((3, 6))
    b = rng.standard_normal(3)
    return lambda p: ops.mean_all(ops.square(ops.linear(p[0], p[1], p[2]))), [x, w, b]


def _case_pool_full(rng):
    x = rng.standard_normal((3, 4, 9))
    return lambda p: ops.mean_all(ops.square(ops.mean_over_time(p[0]))), [x]


def _case_pool_masked(rng):
    x = rng.standard_normal((3, 4, 9))
    lengths = np.array([9, 5, 2])
    return lambda p: ops.mean_all(ops.square(ops.mean_over_time(p[0], lengths))), [x]


def _case_nll(rng):
    x = rng.standard_normal((5, 4))
    targets = rng.integers(0, 4, size=5)
    return lambda p: ops.nll(ops.log_softmax(p[0]), targets), [x]


def _case_l2norm(rng):
    x = rng.standard_normal((4, 6)) + 0.1
    return lambda p: ops.mean_all(ops.square(ops.l2_normalize(p[0]))), [x]


def _case_row_norm(rng):
    x = rng.standard_normal((6, 4))
    x[np.abs(x).sum(axis=1) < 1e-2] += 0.5
    return lambda p: ops.mean_all(ops.row_norm(p[0])), [x]


def _case_reshape(rng):
    x = rng.standard_normal((3, 8))
    return lambda p: ops.mean_all(ops.square(ops.reshape(p[0], (6, 4)))), [x]


def _check_grad_reverse(seeds) -> CheckResult:
    """Forward identity; backward must equal -lam times the plain gradient,
    the plain gradient itself validated by central differences."""
    worst = 0.0
    for seed in seeds:
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((4, 5))
        for lam in (0.0, 0.3, 1.0):
            p = param(x)
            out = ops.mean_all(ops.square(ops.grad_reverse(p, lam)))
            if not np.array_equal(out.values, np.mean(x * x)):
                return CheckResult("grad_reverse", False, "forward is not the identity")
            out.backward()

            def forward() -> float:
                return ops.mean_all(ops.square(param(x))).item()

            fd = _numeric_grad(forward, x)
            worst = max(worst, _rel_err(p.grad, -lam * fd))
    return CheckResult(
        "grad_reverse", worst < PRIMITIVE_TOL,
        f"max rel err {worst:.2e} (tol {PRIMITIVE_TOL:.0e})",
    )


def _case_encoder(rng):
    enc = init_encoder(in_channels=3, emb_dim=5, rng=rng, channels=8, n_blocks=2)
    x = rng.standard_normal((2, 3, 16))
    target = rng.standard_normal((2, 5))
    arrays = [p.values.copy() for p in enc.parameters()]

    def build(leaves):
        rebuilt = EncoderParams(
            in_channels=enc.in_channels,
            emb_dim=enc.emb_dim,
            channels=enc.channels,
            n_blocks=enc.n_blocks,
            kernel=enc.kernel,
            conv_w=leaves[: enc.n_blocks],
            conv_b=leaves[enc.n_blocks : 2 * enc.n_blocks],
            proj_w=leaves[-2],
            proj_b=leaves[-1],
        )
        emb = tcn_encode(rebuilt, constant(x))
        return ops.mean_all(ops.square(ops.subtract(emb, constant(target))))

    return build, arrays


def _case_adversary(rng):
    from .nn.encoder import PredictorParams

    emb = rng.standard_normal((3, 6))
    pred = init_predictor(emb_dim=6, n_env=2, n_buckets=4, rng=rng)
    targets = rng.integers(0, 4, size=(3, 2))
    arrays = [emb, pred.w.values.copy(), pred.b.values.copy()]

    def build(leaves):
        rebuilt = PredictorParams(n_env=2, n_buckets=4, w=leaves[1], b=leaves[2])
        return ops.nll(predict_env_log_probs(rebuilt, leaves[0]), targets)

    return build, arrays


def _case_regressor(rng):
    n_env, n_sys, hidden = 3, 2, 6
    x = rng.standard_normal((8, n_env))
    y = rng.standard_normal((8, n_sys))
    arrays = [
        rng.standard_normal((hidden, n_env)) * 0.7,
        rng.standard_normal(hidden) * 0.7,
        rng.standard_normal((n_sys, hidden)) * 0.7,
        rng.standard_normal(n_sys) * 0.7,
    ]

    def build(leaves):
        rebuilt = RegressorParams(
            n_env=n_env, n_sys=n_sys, w1=leaves[0], b1=leaves[1], w2=leaves[2], b2=leaves[3]
        )
        return regressor_loss(rebuilt, x, y)

    return build, arrays


def run_numerics(n_seeds: int = 20) -> list[CheckResult]:
    seeds = range(n_seeds)
    results = [
        _grad_check("conv dilation=1", seeds, _case_conv(1)),
        _grad_check("conv dilation=2", seeds, _case_conv(2)),
        _grad_check("conv dilation=4", seeds, _case_conv(4)),
        _grad_check("leaky_relu slope=0.01", seeds, _case_leaky(0.01)),
        _grad_check("leaky_relu slope=0", seeds, _case_leaky(0.0)),
        _grad_check("add/subtract/scale", seeds, _case_arith),
        _grad_check("linear", seeds, _case_linear),
        _grad_check("mean_over_time full", seeds, _case_pool_full),
        _grad_check("mean_over_time masked", seeds, _case_pool_masked),
        _grad_check("log_softmax+nll", seeds, _case_nll),
        _grad_check("l2_normalize", seeds, _case_l2norm),
        _grad_check("row_norm", seeds, _case_row_norm),
        _grad_check("square/mean/reshape", seeds, _case_reshape),
        _check_grad_reverse(seeds),
        _grad_check("composed encoder loss", seeds, _case_encoder, tol=COMPOSED_TOL),
        _grad_check("composed env predictor nll", seeds, _case_adversary, tol=COMPOSED_TOL),
        _grad_check("composed regressor mse", seeds, _case_regressor, tol=COMPOSED_TOL),
    ]
    return results


def _auroc_pairs(scores: np.ndarray, labels: np.ndarray) -> float:
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                wins += 1.0
            elif sp == sn:
                wins += 0.5
    return wins / (pos.size * neg.size)


def _check_auroc(n_instances: int = 100) -> CheckResult:
    rng = np.random.default_rng(2024)
    worst = 0.0
    for i in range(n_instances):
        n = int(rng.integers(4, 60))
        labels = rng.integers(0, 2, size=n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        scores = rng.standard_normal(n)
        if i % 2:
            # quantize to force ties, the midrank path
            scores = np.round(scores * 2.0) / 2.0
        worst = max(worst, abs(auroc(scores, labels) - _auroc_pairs(scores, labels)))
    return CheckResult(
        f"auroc vs pair counting ({n_instances} instances)",
        worst < METRIC_TOL,
        f"max abs diff {worst:.2e} (tol {METRIC_TOL:.0e})",
    )


def _f1_confusion(pred: np.ndarray, true: np.ndarray, n_classes: int) -> float:
    conf = np.zeros((n_classes, n_classes), dtype=np.int64)
    for p, t in zip(pred, true):
        conf[t, p] += 1
    total = conf.sum()
    out = 0.0
    for c in range(n_classes):
        tp = conf[c, c]
        support = conf[c, :].sum()
        predicted = conf[:, c].sum()
        if support == 0:
            continue
        precision = tp / predicted if predicted else 0.0
        recall = tp / support
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        out += (support / total) * f1
    return out


def _check_weighted_f1(n_instances: int = 100) -> CheckResult:
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(n_instances):
        n = int(rng.integers(1, 60))
        n_classes = int(rng.integers(2, 5))
        true = rng.integers(0, n_classes, size=n)
        pred = rng.integers(0, n_classes, size=n)
        worst = max(
            worst, abs(weighted_f1(pred, true, n_classes) - _f1_confusion(pred, true, n_classes))
        )
    return CheckResult(
        f"weighted_f1 vs confusion matrix ({n_instances} instances)",
        worst < METRIC_TOL,
        f"max abs diff {worst:.2e} (tol {METRIC_TOL:.0e})",
    )


def _knn_exhaustive(emb, labels, query, k, positive_class):
    order = sorted(range(len(labels)), key=lambda i: (float(np.linalg.norm(emb[i] - query)), i))
    votes = [int(labels[i]) for i in order[:k]]
    counts = Counter(votes)
    best = max(counts.values())
    predicted = min(c for c, n in counts.items() if n == best)
    score = sum(v == positive_class for v in votes) / k
    return predicted, score


def _check_knn(n_queries: int = 200) -> CheckResult:
    rng = np.random.default_rng(11)
    mismatches = 0
    done = 0
    while done < n_queries:
        n = int(rng.integers(8, 40))
        dim = int(rng.integers(2, 7))
        n_classes = int(rng.integers(2, 4))
        emb = rng.standard_normal((n, dim))
        labels = rng.integers(0, n_classes, size=n)
        positive = n_classes - 1
        for _ in range(min(10, n_queries - done)):
            k = int(rng.integers(1, 8))
            # half the queries coincide with a training row to force 0-distance ties
            query = emb[int(rng.integers(0, n))].copy() if done % 2 else rng.standard_normal(dim)
            got = knn_classify(emb, labels, query, k=k, positive_class=positive)
            want = _knn_exhaustive(emb, labels, query, k, positive)
            if got[0] != want[0] or abs(got[1] - want[1]) > METRIC_TOL:
                mismatches += 1
            done += 1
    return CheckResult(
        f"knn vs exhaustive scan ({n_queries} queries)",
        mismatches == 0,
        f"{mismatches} mismatches",
    )


def run_metrics() -> list[CheckResult]:
    return [_check_auroc(), _check_weighted_f1(), _check_knn()]


def run_selftest(which: str = "all", n_seeds: int = 20) -> list[CheckResult]:
    results: list[CheckResult] = []
    if which in ("all", "numerics"):
        results.extend(run_numerics(n_seeds))
    if which in ("all", "metrics"):
        results.extend(run_metrics())
    return results
