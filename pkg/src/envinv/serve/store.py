"""Event-sourced label store.

The generator's labels are the base state; every human edit is one JSON line
appended to the event log.  Current state is always base + replay(log), so
the log can be replayed onto a fresh process (or audited line by line) and
must reproduce exactly what the service reported before a restart.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from ..core import AnomalyClass, LabelRecord, LabelSource, SnippetRange
from ..core.io import labels_csv_text


class ConflictError(Exception):
    def __init__(self, series_id: str, current_class: int) -> None:
        super().__init__(f"{series_id} is currently class {current_class}")
        self.series_id = series_id
        self.current_class = current_class


@dataclass(frozen=True)
class LabelEvent:
    series_id: str
    old_class: int
    new_class: int
    actor: str
    timestamp: str  # ISO 8601 UTC

    def to_dict(self) -> dict:
        return {
            "series_id": self.series_id,
            "old_class": self.old_class,
            "new_class": self.new_class,
            "actor": self.actor,
            "timestamp": self.timestamp,
        }


def _apply(record: LabelRecord, event: LabelEvent, series_length: int) -> LabelRecord:
    new_class = AnomalyClass(event.new_class)
    if new_class == AnomalyClass.NORMAL:
        ranges: tuple[SnippetRange, ...] = ()
    elif record.ranges:
        ranges = record.ranges
    else:
        # curator flags the series without marking a window: flag all of it
        ranges = (SnippetRange(start=0, length=series_length),)
    return LabelRecord(
        series_id=record.series_id,
        label=new_class,
        ranges=ranges,
        source=LabelSource.HUMAN,
        timestamp=datetime.fromisoformat(event.timestamp),
    )


class LabelStore:
    """Single-writer label state over an append-only JSONL log."""

    def __init__(
        self,
        base_labels: list[LabelRecord],
        series_lengths: dict[str, int],
        log_path: Path | str,
    ) -> None:
        self._lock = threading.Lock()
        self._lengths = dict(series_lengths)
        self._base = {rec.series_id: rec for rec in base_labels}
        self._current = dict(self._base)
        self._log_path = Path(log_path)
        self._events: list[LabelEvent] = []
        if self._log_path.exists():
            for line in self._log_path.read_text().splitlines():
                if line.strip():
                    self._replay_one(LabelEvent(**json.loads(line)))

    def _replay_one(self, event: LabelEvent) -> None:
        record = self._current[event.series_id]
        self._current[event.series_id] = _apply(record, event, self._lengths[event.series_id])
        self._events.append(event)

    def current(self, series_id: str) -> LabelRecord:
        return self._current[series_id]

    def current_class(self, series_id: str) -> int:
        return int(self._current[series_id].label)

    def known(self, series_id: str) -> bool:
        return series_id in self._current

    def relabel(self, series_id: str, new_class: int, expected_class: int, actor: str) -> LabelRecord:
        if new_class not in (0, 1, 2):
            raise ValueError(f"new_class must be 0, 1 or 2, got {new_class}")
        with self._lock:
            record = self._current[series_id]
            if int(record.label) != expected_class:
                raise ConflictError(series_id, int(record.label))
            event = LabelEvent(
                series_id=series_id,
                old_class=int(record.label),
                new_class=new_class,
                actor=actor,
                timestamp=datetime.now(timezone.utc).isoformat(),
            )
            with open(self._log_path, "a") as fh:
                fh.write(json.dumps(event.to_dict(), sort_keys=True) + "\n")
                fh.flush()
            self._replay_one(event)
            return self._current[series_id]

    def events(self) -> list[LabelEvent]:
        with self._lock:
            return list(self._events)

    def export_records(self) -> list[LabelRecord]:
        with self._lock:
            return [self._current[sid] for sid in sorted(self._current)]

    def export_csv(self) -> str:
        return labels_csv_text(self.export_records())
