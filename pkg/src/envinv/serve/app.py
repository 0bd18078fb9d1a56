"""REST service for the label-triage workflow.

Read endpoints serve the dataset and the embedding-space neighbor structure;
the single write endpoint relabels a series with an optimistic-concurrency
precondition.  All state besides the event log is immutable after startup.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..core import Dataset, load_dataset, znormalize
from ..embedding import TrainedModel, embed_dataset
from ..nn import BACKEND
from .store import ConflictError, LabelStore

EVENT_LOG_NAME = "label_events.jsonl"


def build_app(
    dataset_dir: Path | str,
    ckpt_path: Path | str,
    log_path: Path | str | None = None,
    static_dir: Path | str | None = None,
) -> FastAPI:
    dataset_dir = Path(dataset_dir)
    raw = load_dataset(dataset_dir, normalize=False)
    model = TrainedModel.load(ckpt_path)
    normalized = Dataset(
        manifest=raw.manifest,
        series=tuple(znormalize(s) for s in raw.series),
        labels=raw.labels,
    )
    embeddings = embed_dataset(model, normalized)
    ids = [s.series_id for s in raw.series]
    index = {sid: i for i, sid in enumerate(ids)}
    store = LabelStore(
        base_labels=list(raw.labels),
        series_lengths={s.series_id: s.length for s in raw.series},
        log_path=Path(log_path) if log_path else dataset_dir / EVENT_LOG_NAME,
    )

    app = FastAPI(title="series label triage")

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok", "dataset": raw.manifest.name, "kernel_backend": BACKEND}

    @app.get("/api/datasets")
    def datasets() -> list[dict]:
        m = raw.manifest
        return [
            {
                "name": m.name,
                "n_series": m.n_series,
                "T": m.length,
                "N": m.n_env,
                "M": m.n_sys,
                "seed": m.seed,
                "series_ids": ids,
            }
        ]

    def _series_payload(sid: str) -> dict:
        s = raw.series[index[sid]]
        rec = store.current(sid)
        return {
            "series_id": sid,
            "env": s.env.tolist(),
            "sys": s.sys.tolist(),
            "label": int(rec.label),
            "class_name": rec.label.name.lower(),
            "ranges": [{"start": r.start, "length": r.length} for r in rec.ranges],
            "source": rec.source.value,
            "timestamp": rec.timestamp.isoformat(),
        }

    @app.get("/api/series/{sid}")
    def series(sid: str) -> dict:
        if sid not in index:
            raise HTTPException(status_code=404, detail=f"unknown series {sid!r}")
        return _series_payload(sid)

    @app.get("/api/series/{sid}/neighbors")
    def neighbors(sid: str, k: int = 5) -> dict:
        if sid not in index:
            raise HTTPException(status_code=404, detail=f"unknown series {sid!r}")
        if k < 1 or k > len(ids) - 1:
            raise HTTPException(
                status_code=400, detail=f"k must lie in [1, {len(ids) - 1}], got {k}"
            )
        q = index[sid]
        dist = np.linalg.norm(embeddings - embeddings[q], axis=1)
        dist[q] = np.inf
        nearest = np.argsort(dist, kind="stable")[:k]
        return {
            "series_id": sid,
            "neighbors": [
                {
                    "series_id": ids[i],
                    "distance": float(dist[i]),
                    "label": store.current_class(ids[i]),
                }
                for i in nearest
            ],
        }

    @app.post("/api/labels")
    async def relabel(request: Request) -> JSONResponse:
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(status_code=400, detail="body must be JSON") from None
        if not isinstance(body, dict):
            raise HTTPException(status_code=400, detail="body must be a JSON object")
        missing = [f for f in ("series_id", "new_class", "expected_class", "actor") if f not in body]
        if missing:
            raise HTTPException(status_code=400, detail=f"missing fields: {', '.join(missing)}")
        sid = body["series_id"]
        if not isinstance(sid, str) or not store.known(sid):
            raise HTTPException(status_code=404, detail=f"unknown series {sid!r}")
        if not isinstance(body["new_class"], int) or body["new_class"] not in (0, 1, 2):
            raise HTTPException(status_code=400, detail="new_class must be 0, 1 or 2")
        if not isinstance(body["expected_class"], int):
            raise HTTPException(status_code=400, detail="expected_class must be an integer")
        if not isinstance(body["actor"], str) or not body["actor"]:
            raise HTTPException(status_code=400, detail="actor must be a non-empty string")
        try:
            record = store.relabel(sid, body["new_class"], body["expected_class"], body["actor"])
        except ConflictError as exc:
            return JSONResponse(
                status_code=409,
                content={
                    "detail": f"expected_class is stale for {sid}",
                    "current_class": exc.current_class,
                },
            )
        return JSONResponse(status_code=200, content=_series_payload(record.series_id))

    @app.get("/api/labels/export")
    def export() -> dict:
        return {
            "csv": store.export_csv(),
            "events": [e.to_dict() for e in store.events()],
        }

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app
