// SVG rendering for series panels.  One lane per channel, environment lanes
// stacked above system lanes, anomaly ranges shaded behind the full stack.
// Everything is plain DOM so the same code runs in the browser and under
// jsdom in tests.

import { minMaxDownsample } from "./downsample.js";
import { className, type SeriesPayload } from "./types.js";

export interface ChartOptions {
  width: number;
  laneHeight: number;
  laneGap: number;
  envColor: string;
  sysColor: string;
  shadeColor: string;
}

const DEFAULTS: ChartOptions = {
  width: 640,
  laneHeight: 44,
  laneGap: 6,
  envColor: "#2f6fb2",
  sysColor: "#c4622d",
  shadeColor: "rgba(196, 98, 45, 0.18)",
};

const SVG_NS = "http://www.w3.org/2000/svg";

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, v);
  return el;
}

function lanePolyline(
  values: number[],
  width: number,
  laneTop: number,
  laneHeight: number,
): string {
  const n = values.length;
  const pts = minMaxDownsample(values);
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  const span = hi - lo;
  const pad = 3;
  const usable = laneHeight - 2 * pad;
  const xOf = (i: number) => (n > 1 ? (i / (n - 1)) * width : 0);
  const yOf = (v: number) =>
    span > 0 ? laneTop + pad + (1 - (v - lo) / span) * usable : laneTop + laneHeight / 2;
  return pts.map((p) => `${xOf(p.i).toFixed(2)},${yOf(p.v).toFixed(2)}`).join(" ");
}

export function seriesChart(
  payload: SeriesPayload,
  options: Partial<ChartOptions> = {},
): SVGSVGElement {
  const opt = { ...DEFAULTS, ...options };
  const lanes = payload.env.length + payload.sys.length;
  const laneStride = opt.laneHeight + opt.laneGap;
  const height = lanes * laneStride - opt.laneGap;
  const T = payload.env[0]?.length ?? 0;

  const svg = svgEl("svg", {
    viewBox: `0 0 ${opt.width} ${Math.max(height, 1)}`,
    preserveAspectRatio: "none",
  });
  svg.dataset.role = "series-chart";
  svg.dataset.seriesId = payload.series_id;
  svg.classList.add("series-chart");

  // shaded ranges first so the traces paint over them
  for (const r of payload.ranges) {
    const x0 = T > 1 ? (r.start / (T - 1)) * opt.width : 0;
    const x1 = T > 1 ? ((r.start + r.length - 1) / (T - 1)) * opt.width : opt.width;
    const rect = svgEl("rect", {
      x: x0.toFixed(2),
      y: "0",
      width: Math.max(x1 - x0, 1).toFixed(2),
      height: String(height),
    });
    rect.dataset.role = "range-shade";
    rect.setAttribute("fill", opt.shadeColor);
    svg.appendChild(rect);
  }

  const bands: Array<[string, number[][], string]> = [
    ["env", payload.env, opt.envColor],
    ["sys", payload.sys, opt.sysColor],
  ];
  let lane = 0;
  for (const [band, channels, color] of bands) {
    const group = svgEl("g", {});
    group.dataset.band = band;
    for (let c = 0; c < channels.length; c++, lane++) {
      const laneTop = lane * laneStride;
      const line = svgEl("polyline", {
        points: lanePolyline(channels[c] as number[], opt.width, laneTop, opt.laneHeight),
        fill: "none",
        stroke: color,
        "stroke-width": "1",
      });
      line.dataset.channel = `${band}${c}`;
      group.appendChild(line);
      const tag = svgEl("text", {
        x: "2",
        y: String(laneTop + 10),
        "font-size": "9",
        fill: color,
      });
      tag.textContent = `${band} ${c}`;
      group.appendChild(tag);
    }
    svg.appendChild(group);
  }
  return svg;
}

export function classBadge(label: number): HTMLSpanElement {
  const span = document.createElement("span");
  const name = className(label);
  span.className = `badge badge-${name}`;
  span.dataset.role = "class-badge";
  span.dataset.class = String(label);
  span.textContent = name;
  return span;
}
