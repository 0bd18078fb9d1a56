// Wire types for the serve REST API.  These mirror the JSON the server
// actually emits; keep them in sync with the Python side by hand.

export type AnomalyClass = 0 | 1 | 2;

export const CLASS_NAMES: readonly string[] = ["normal", "extrinsic", "intrinsic"];

export type LabelSource = "generator" | "human";

export interface SnippetRange {
  start: number;
  length: number;
}

export interface SeriesPayload {
  series_id: string;
  env: number[][];
  sys: number[][];
  label: AnomalyClass;
  class_name: string;
  ranges: SnippetRange[];
  source: LabelSource;
  timestamp: string;
}

export interface NeighborEntry {
  series_id: string;
  distance: number;
  label: AnomalyClass;
}

export interface NeighborsPayload {
  series_id: string;
  neighbors: NeighborEntry[];
}

export interface DatasetInfo {
  name: string;
  n_series: number;
  T: number;
  N: number;
  M: number;
  seed: number;
  series_ids: string[];
}

export interface RelabelRequest {
  series_id: string;
  new_class: AnomalyClass;
  expected_class: AnomalyClass;
  actor: string;
}

export interface LabelEvent {
  series_id: string;
  old_class: number;
  new_class: number;
  actor: string;
  timestamp: string;
}

export interface ExportPayload {
  csv: string;
  events: LabelEvent[];
}

export interface ConflictPayload {
  detail: string;
  current_class: AnomalyClass;
}

export function className(label: number): string {
  return CLASS_NAMES[label] ?? `class ${label}`;
}
