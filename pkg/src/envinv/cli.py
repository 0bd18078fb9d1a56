"""Command-line entry point.

Every experiment artifact is produced through this module so runs can be
reproduced from a single shell line.  Exit codes: 0 success, 2 usage error,
1 runtime failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .core import AnomalyClass, load_dataset
from .core.io import fmt_float, write_dataset
from .datagen import PendulumConfig, SyntheticConfig, gen_pendulum, gen_synthetic, load_turbine
from .detect import (
    fit_regressor,
    isolation_forest_fit,
    knn_classify,
    lof_fit,
    lof_score,
    res_thresh_score,
    residuals,
)
from .embedding import Mode, TrainConfig, TrainedModel, embed_dataset, train, write_training_log
from .evaluate import (
    ALL_METHODS,
    EMBEDDING_METHODS,
    render_table,
    reports_from_outcomes,
    run_outcomes,
    write_reports,
)
from .evaluate.metrics import map_labels

SCORE_CHOICES = ("resthresh", "iforest", "lof", "knn")


def parse_seeds(text: str) -> list[int]:
    """Accept '0..4' ranges (inclusive) or comma lists like '0,2,5'."""
    text = text.strip()
    if ".." in text:
        lo, _, hi = text.partition("..")
        start, stop = int(lo), int(hi)
        if stop < start:
            raise ValueError(f"seed range {text!r} is empty")
        return list(range(start, stop + 1))
    return [int(part) for part in text.split(",") if part.strip() != ""]


def parse_grid(text: str) -> list[float]:
    values = [float(part) for part in text.split(",") if part.strip() != ""]
    if not values:
        raise ValueError("empty grid")
    return values


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def cmd_gen(args: argparse.Namespace) -> int:
    overrides = {}
    if args.n_series is not None:
        overrides["n_series"] = args.n_series
    if args.length is not None:
        overrides["length"] = args.length
    if args.kind == "synthetic":
        manifest, series, labels = gen_synthetic(SyntheticConfig(**overrides), args.seed)
    else:
        manifest, series, labels = gen_pendulum(PendulumConfig(**overrides), args.seed)
    write_dataset(args.out, manifest, series, labels)
    print(f"wrote {manifest.n_series} series to {args.out}")
    return 0


def cmd_ingest(args: argparse.Namespace) -> int:
    manifest, series, labels = load_turbine(args.dir, window_len=args.window_len)
    write_dataset(args.out, manifest, series, labels)
    print(f"ingested {manifest.n_series} windows to {args.out}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    dataset = load_dataset(args.dataset)
    config = TrainConfig(
        lam=args.lam,
        epochs=args.epochs,
        batch=args.batch,
        lr=args.lr,
        window_frac=args.window_frac,
        seed=args.seed,
        mode=Mode(args.mode),
    )
    model, log = train(dataset, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model.save(out / "model.ckpt")
    write_training_log(log, out / "training_log.csv")
    print(f"trained {config.mode.value} model, final loss {log[-1].total:.6f}, saved to {out}")
    return 0


def cmd_embed(args: argparse.Namespace) -> int:
    model = TrainedModel.load(args.ckpt)
    dataset = load_dataset(args.dataset)
    emb = embed_dataset(model, dataset)
    lines = ["series_id," + ",".join(f"e_{j}" for j in range(emb.shape[1]))]
    for s, row in zip(dataset.series, emb):
        lines.append(s.series_id + "," + ",".join(fmt_float(v) for v in row))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_text(out / "embeddings.csv", "\n".join(lines) + "\n")
    print(f"embedded {emb.shape[0]} series (dim {emb.shape[1]}) to {out / 'embeddings.csv'}")
    return 0


def _score_dataset(args: argparse.Namespace) -> list[tuple[str, float]]:
    dataset = load_dataset(args.dataset)
    series = list(dataset.series)
    method = args.method
    if method == "resthresh":
        reg = fit_regressor(series, args.seed)
        return [(s.series_id, res_thresh_score(residuals(reg, s))) for s in series]
    if method in ("iforest", "lof"):
        points = np.concatenate(
            [np.vstack([s.env, s.sys]).T for s in series], axis=0
        )
        if method == "iforest":
            forest = isolation_forest_fit(points, seed=args.seed)
            score_fn = forest.score
        else:
            model = lof_fit(points, k=args.k)
            score_fn = lambda pts: lof_score(model, pts)  # noqa: E731
        out = []
        for s in series:
            pts = np.vstack([s.env, s.sys]).T
            out.append((s.series_id, float(np.max(score_fn(pts)))))
        return out
    # knn scores each series against all others in embedding space
    if args.ckpt is None:
        raise ValueError("--ckpt is required for method knn")
    if not dataset.labels:
        raise ValueError("knn scoring needs a labelled dataset")
    model = TrainedModel.load(args.ckpt)
    emb = embed_dataset(model, dataset)
    classes = map_labels(list(dataset.labels), "two_class")
    out = []
    for i, s in enumerate(series):
        rest = np.delete(np.arange(len(series)), i)
        _, score = knn_classify(emb[rest], classes[rest], emb[i], k=args.k, positive_class=1)
        out.append((s.series_id, score))
    return out


def cmd_score(args: argparse.Namespace) -> int:
    rows = _score_dataset(args)
    lines = ["series_id,method,score"]
    lines += [f"{sid},{args.method},{fmt_float(v)}" for sid, v in rows]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_text(out / "scores.csv", "\n".join(lines) + "\n")
    print(f"scored {len(rows)} series with {args.method}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in ALL_METHODS:
            raise UsageError(f"--methods: unknown method {m!r} (choose from {', '.join(ALL_METHODS)})")
    seeds = parse_seeds(args.seeds)
    dataset = load_dataset(args.dataset)
    tasks = [(m, args.lam if m in EMBEDDING_METHODS else None) for m in methods]
    outcomes = run_outcomes(args.dataset, tasks, seeds, epochs=args.epochs, workers=args.workers)
    reports = []
    for m in methods:
        picked = {s: outcomes[(m, args.lam if m in EMBEDDING_METHODS else None, s)] for s in seeds}
        reports.extend(reports_from_outcomes(dataset.manifest.name, m, seeds, picked))
    write_reports(reports, args.out)
    for r in reports:
        if r.metric == "auroc":
            print(f"{r.dataset} {r.method} auroc {r.mean:.4f} +- {r.std:.4f}")
    return 0


def cmd_ablate(args: argparse.Namespace) -> int:
    grid = parse_grid(args.grid)
    seeds = parse_seeds(args.seeds)
    tasks = [("envinv", lam) for lam in grid]
    outcomes = run_outcomes(args.dataset, tasks, seeds, epochs=args.epochs, workers=args.workers)
    lines = ["lambda,seed,auroc"]
    for lam in grid:
        values = [outcomes[("envinv", lam, s)].auroc for s in seeds]
        lines += [f"{fmt_float(lam)},{s},{fmt_float(v)}" for s, v in zip(seeds, values)]
        lines.append(f"{fmt_float(lam)},mean,{fmt_float(float(np.mean(values)))}")
        lines.append(f"{fmt_float(lam)},std,{fmt_float(float(np.std(values)))}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_text(out / "ablation.csv", "\n".join(lines) + "\n")
    for lam in grid:
        values = [outcomes[("envinv", lam, s)].auroc for s in seeds]
        print(f"lambda={lam:g} auroc {np.mean(values):.4f} +- {np.std(values):.4f}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    table = render_table(args.reports, metric=args.metric)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_text(out / "table.csv", table)
    print(table, end="")
    return 0


def cmd_selftest(args: argparse.Namespace) -> int:
    from .selftest import run_selftest

    results = run_selftest(which=args.only, n_seeds=args.seeds)
    for result in results:
        print(result.line())
    passed = sum(r.passed for r in results)
    print(f"selftest: {passed}/{len(results)} checks passed")
    return 0 if passed == len(results) else 1


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .serve import build_app

    settings = {
        "dataset": args.dataset,
        "ckpt": args.ckpt,
        "port": args.port,
        "host": args.host,
        "static": args.static,
        "log": args.log,
    }
    if args.config is not None:
        import tomli

        with open(args.config, "rb") as fh:
            loaded = tomli.load(fh)
        for key, value in loaded.items():
            if key not in settings:
                raise ValueError(f"unknown config key {key!r} in {args.config}")
            if settings[key] in (None, _SERVE_DEFAULTS.get(key)):
                settings[key] = value
    if settings["dataset"] is None or settings["ckpt"] is None:
        raise UsageError("serve: --dataset and --ckpt are required (flags or config file)")
    app = build_app(
        settings["dataset"],
        settings["ckpt"],
        log_path=settings["log"],
        static_dir=settings["static"],
    )
    uvicorn.run(app, host=settings["host"], port=int(settings["port"]))
    return 0


_SERVE_DEFAULTS = {"port": 8000, "host": "127.0.0.1"}


class UsageError(ValueError):
    """Bad arguments detected after argparse; reported with exit code 2."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="envinv",
        description="environment-invariant embeddings for intrinsic anomaly detection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a seeded dataset")
    p.add_argument("kind", choices=("synthetic", "pendulum"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--n-series", type=int, default=None)
    p.add_argument("--length", type=int, default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("ingest", help="ingest external CSV exports")
    p.add_argument("kind", choices=("turbine",))
    p.add_argument("--dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--window-len", type=int, default=144)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train an embedding model")
    p.add_argument("--dataset", required=True)
    p.add_argument("--mode", choices=[m.value for m in Mode], default="envinv")
    p.add_argument("--lambda", dest="lam", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--lr", type=float, default=1.9e-3)
    p.add_argument("--window-frac", type=float, default=0.2)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("embed", help="embed a dataset with a trained model")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("score", help="score series for anomalies")
    p.add_argument("--method", choices=SCORE_CHOICES, required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--ckpt", default=None, help="embedding checkpoint (knn only)")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=5, help="neighbor count for knn/lof")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("eval", help="run seeded train/test experiments")
    p.add_argument("--dataset", required=True)
    p.add_argument("--methods", required=True, help="comma list, e.g. envinv,basic,resthresh")
    p.add_argument("--seeds", default="0..4")
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=None, help="override training epochs")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate-lambda", help="sweep the adversary weight")
    p.add_argument("--dataset", required=True)
    p.add_argument("--grid", default="0,1e-5,1e-4,1e-3,1e-2,1e-1,1")
    p.add_argument("--seeds", default="0..4")
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("report", help="render experiment reports")
    p.add_argument("action", choices=("render",))
    p.add_argument("--reports", nargs="+", required=True, help="reports.json files")
    p.add_argument("--metric", default="auroc")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("selftest", help="verify gradients and metrics against built-in oracles")
    p.add_argument("--only", choices=("all", "numerics", "metrics"), default="all")
    p.add_argument("--seeds", type=int, default=20, help="random seeds per gradient check")
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("serve", help="serve the label-triage API")
    p.add_argument("--dataset", default=None)
    p.add_argument("--ckpt", default=None)
    p.add_argument("--port", type=int, default=_SERVE_DEFAULTS["port"])
    p.add_argument("--host", default=_SERVE_DEFAULTS["host"])
    p.add_argument("--static", default=None, help="directory of UI assets to mount at /")
    p.add_argument("--log", default=None, help="event log path (default: inside the dataset dir)")
    p.add_argument("--config", default=None, help="TOML file with serve settings")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
