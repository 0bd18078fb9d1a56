// Thin fetch wrapper around the serve endpoints.  All embedding and scoring
// math stays on the server; this module only moves JSON.

import type {
  ConflictPayload,
  DatasetInfo,
  ExportPayload,
  NeighborsPayload,
  RelabelRequest,
  SeriesPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly body: unknown = null,
  ) {
    super(message);
    this.name = "ApiError";
  }

  /* The 409 body carries the label someone else wrote meanwhile. */
  get conflict(): ConflictPayload | null {
    if (this.status !== 409) return null;
    return this.body as ConflictPayload;
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let resp: Response;
  try {
    resp = await fetch(url, init);
  } catch (err) {
    throw new ApiError(0, `network error: ${String(err)}`);
  }
  let body: unknown = null;
  try {
    body = await resp.json();
  } catch {
    // non-JSON error page; keep body null
  }
  if (!resp.ok) {
    const detail =
      body && typeof body === "object" && "detail" in body
        ? String((body as { detail: unknown }).detail)
        : resp.statusText;
    throw new ApiError(resp.status, detail, body);
  }
  return body as T;
}

export function fetchDatasets(): Promise<DatasetInfo[]> {
  return request("/api/datasets");
}

export function fetchSeries(seriesId: string): Promise<SeriesPayload> {
  return request(`/api/series/${encodeURIComponent(seriesId)}`);
}

export function fetchNeighbors(seriesId: string, k: number): Promise<NeighborsPayload> {
  return request(`/api/series/${encodeURIComponent(seriesId)}/neighbors?k=${k}`);
}

export function fetchExport(): Promise<ExportPayload> {
  return request("/api/labels/export");
}

export function postRelabel(req: RelabelRequest): Promise<SeriesPayload> {
  return request("/api/labels", {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(req),
  });
}
