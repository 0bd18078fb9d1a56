// In-memory stand-in for the serve REST API, installed as a fetch mock.
// It implements the same contract the Python service exposes: optimistic
// concurrency on POST /api/labels, append-only event history, range
// rewriting on relabel.  Tests drive the real UI against it end to end.

import type {
  AnomalyClass,
  DatasetInfo,
  LabelEvent,
  NeighborEntry,
  SeriesPayload,
  SnippetRange,
} from "../src/types.js";
import { CLASS_NAMES } from "../src/types.js";

interface SeriesState {
  env: number[][];
  sys: number[][];
  label: AnomalyClass;
  ranges: SnippetRange[];
  source: "generator" | "human";
  timestamp: string;
}

function wave(T: number, freq: number, phase: number): number[] {
  return Array.from({ length: T }, (_, t) => Math.sin((freq * t) / 10 + phase));
}

export class FixtureService {
  readonly T = 48;
  readonly series = new Map<string, SeriesState>();
  readonly neighborTable = new Map<string, NeighborEntry[]>();
  events: LabelEvent[] = [];
  failNext = false;
  requestLog: string[] = [];
  private clock = 0;

  constructor() {
    const ids = ["s00", "s01", "s02", "s03", "s04", "s05"];
    ids.forEach((sid, i) => {
      this.series.set(sid, {
        env: [wave(this.T, 1 + i, 0), wave(this.T, 2 + i, 1)],
        sys: [wave(this.T, 1 + i, 0.5)],
        label: 0,
        ranges: [],
        source: "generator",
        timestamp: this.tick(),
      });
    });
    // one intrinsic series with a marked window, like the generator emits
    const anom = this.series.get("s02")!;
    anom.label = 2;
    anom.ranges = [{ start: 12, length: 10 }];
    // fixed distances, ascending per anchor, deterministic across runs
    ids.forEach((sid, i) => {
      const others = ids.filter((o) => o !== sid);
      const entries = others.map((o, j) => ({
        series_id: o,
        distance: 0.1 * (j + 1) + 0.01 * i,
        label: this.series.get(o)!.label,
      }));
      this.neighborTable.set(sid, entries);
    });
  }

  private tick(): string {
    this.clock += 1;
    return new Date(Date.UTC(2026, 0, 1, 0, 0, this.clock)).toISOString();
  }

  /* test hooks */

  setLabelBehindUi(sid: string, label: AnomalyClass): void {
    const s = this.series.get(sid);
    if (!s) throw new Error(`unknown sid ${sid}`);
    s.label = label;
  }

  seedEvent(sid: string, oldClass: number, newClass: number, actor: string): void {
    const s = this.series.get(sid);
    if (!s) throw new Error(`unknown sid ${sid}`);
    const e: LabelEvent = {
      series_id: sid,
      old_class: oldClass,
      new_class: newClass,
      actor,
      timestamp: this.tick(),
    };
    this.events.push(e);
    this.applyEvent(s, e);
  }

  private applyEvent(s: SeriesState, e: LabelEvent): void {
    s.label = e.new_class as AnomalyClass;
    if (e.new_class === 0) s.ranges = [];
    else if (s.ranges.length === 0) s.ranges = [{ start: 0, length: this.T }];
    s.source = "human";
    s.timestamp = e.timestamp;
  }

  /* request handling */

  install(): void {
    globalThis.fetch = (async (input: RequestInfo | URL, init?: RequestInit) => {
      const url = typeof input === "string" ? input : input.toString();
      return this.handle(url, init);
    }) as typeof fetch;
  }

  async handle(url: string, init?: RequestInit): Promise<Response> {
    this.requestLog.push(`${init?.method ?? "GET"} ${url}`);
    if (this.failNext) {
      this.failNext = false;
      throw new TypeError("fetch failed");
    }
    const [path, query] = url.split("?") as [string, string | undefined];

    if (path === "/api/datasets") return json(200, [this.datasetInfo()]);

    const neighborMatch = path.match(/^\/api\/series\/([^/]+)\/neighbors$/);
    if (neighborMatch) {
      const sid = decodeURIComponent(neighborMatch[1] as string);
      if (!this.series.has(sid)) return json(404, { detail: `unknown series ${sid}` });
      const k = Number(new URLSearchParams(query).get("k") ?? "3");
      if (!Number.isInteger(k) || k < 1 || k > this.series.size - 1) {
        return json(400, { detail: `k must be in [1, ${this.series.size - 1}]` });
      }
      const entries = this.neighborTable
        .get(sid)!
        .slice(0, k)
        .map((e) => ({ ...e, label: this.series.get(e.series_id)!.label }));
      return json(200, { series_id: sid, neighbors: entries });
    }

    const seriesMatch = path.match(/^\/api\/series\/([^/]+)$/);
    if (seriesMatch) {
      const sid = decodeURIComponent(seriesMatch[1] as string);
      if (!this.series.has(sid)) return json(404, { detail: `unknown series ${sid}` });
      return json(200, this.payload(sid));
    }

    if (path === "/api/labels/export") {
      return json(200, { csv: this.csv(), events: this.events });
    }

    if (path === "/api/labels" && init?.method === "POST") {
      return this.relabel(JSON.parse(String(init.body)));
    }

    return json(404, { detail: `no route for ${path}` });
  }

  private relabel(body: Record<string, unknown>): Response {
    for (const field of ["series_id", "new_class", "expected_class", "actor"]) {
      if (!(field in body)) return json(400, { detail: `missing field ${field}` });
    }
    const sid = String(body.series_id);
    const s = this.series.get(sid);
    if (!s) return json(404, { detail: `unknown series ${sid}` });
    const newClass = body.new_class;
    if (typeof newClass !== "number" || ![0, 1, 2].includes(newClass)) {
      return json(400, { detail: `new_class must be 0, 1 or 2` });
    }
    if (typeof body.actor !== "string" || !body.actor.trim()) {
      return json(400, { detail: "actor must be a non-empty string" });
    }
    if (s.label !== body.expected_class) {
      return json(409, {
        detail: `label for ${sid} changed to ${s.label} since it was read`,
        current_class: s.label,
      });
    }
    const e: LabelEvent = {
      series_id: sid,
      old_class: s.label,
      new_class: newClass,
      actor: body.actor,
      timestamp: this.tick(),
    };
    this.events.push(e);
    this.applyEvent(s, e);
    return json(200, this.payload(sid));
  }

  private datasetInfo(): DatasetInfo {
    return {
      name: "fixture",
      n_series: this.series.size,
      T: this.T,
      N: 2,
      M: 1,
      seed: 0,
      series_ids: [...this.series.keys()],
    };
  }

  payload(sid: string): SeriesPayload {
    const s = this.series.get(sid)!;
    return {
      series_id: sid,
      env: s.env.map((ch) => [...ch]),
      sys: s.sys.map((ch) => [...ch]),
      label: s.label,
      class_name: CLASS_NAMES[s.label] as string,
      ranges: s.ranges.map((r) => ({ ...r })),
      source: s.source,
      timestamp: s.timestamp,
    };
  }

  private csv(): string {
    const rows = [...this.series.entries()].map(
      ([sid, s]) => `${sid},${s.label},${s.source}`,
    );
    return ["series_id,label,source", ...rows].join("\n");
  }
}

// plain object with the members api.ts actually touches; jsdom does not
// ship a global Response, so building one here keeps the tests hermetic
function json(status: number, body: unknown): Response {
  const snapshot = JSON.stringify(body);
  const resp = {
    status,
    ok: status >= 200 && status < 300,
    statusText: `HTTP ${status}`,
    json: async () => JSON.parse(snapshot),
  };
  return resp as unknown as Response;
}
