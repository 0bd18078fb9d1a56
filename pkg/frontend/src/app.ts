// Label triage app.  Single page, no framework: the serve API is the only
// source of truth for labels, neighbor order, and distances, and every
// mutation goes through POST /api/labels.  The client renders what the
// server returns and nothing else.

import {
  ApiError,
  fetchDatasets,
  fetchExport,
  fetchNeighbors,
  fetchSeries,
  postRelabel,
} from "./api.js";
import { classBadge, seriesChart } from "./charts.js";
import {
  CLASS_NAMES,
  className,
  type AnomalyClass,
  type LabelEvent,
  type SeriesPayload,
} from "./types.js";

interface AppState {
  datasetName: string;
  seriesIds: string[];
  currentId: string;
  k: number;
  actor: string;
}

const SKELETON = `
<header class="topbar">
  <h1>envinv triage</h1>
  <span id="dataset-label" data-role="dataset-label"></span>
  <label>series
    <select id="series-select"></select>
  </label>
  <label>k
    <input id="k-input" type="number" min="1" value="3">
  </label>
  <label>actor
    <input id="actor-input" type="text" value="annotator">
  </label>
  <nav>
    <button id="nav-browse" class="active">browse</button>
    <button id="nav-audit">audit</button>
  </nav>
</header>
<div id="error-banner" hidden>
  <span data-role="error-message"></span>
  <button id="error-dismiss">dismiss</button>
</div>
<main id="browse-view">
  <section id="main-panel"></section>
  <aside id="neighbor-panel">
    <h2>nearest neighbors</h2>
    <div id="neighbor-list"></div>
  </aside>
</main>
<section id="audit-view" hidden>
  <h2>label history: <span id="audit-series"></span></h2>
  <table id="audit-table">
    <thead><tr><th>actor</th><th>class</th><th>change</th><th>time</th></tr></thead>
    <tbody></tbody>
  </table>
  <h2>all edits</h2>
  <table id="events-table">
    <thead><tr><th>series</th><th>change</th><th>actor</th><th>time</th></tr></thead>
    <tbody></tbody>
  </table>
</section>
<div id="conflict-dialog" hidden>
  <div class="dialog-box">
    <h2>label conflict</h2>
    <p data-role="conflict-message"></p>
    <p>current server class: <span id="conflict-class"></span></p>
    <button id="conflict-reload">reload series</button>
    <button id="conflict-dismiss">dismiss</button>
  </div>
</div>
`;

export async function initApp(root: HTMLElement): Promise<void> {
  root.innerHTML = SKELETON;
  const $ = <T extends HTMLElement>(sel: string): T => {
    const el = root.querySelector<T>(sel);
    if (!el) throw new Error(`missing element ${sel}`);
    return el;
  };

  const state: AppState = {
    datasetName: "",
    seriesIds: [],
    currentId: "",
    k: 3,
    actor: "annotator",
  };
  let conflictSid: string | null = null;

  const errorBanner = $("#error-banner");
  const showError = (msg: string): void => {
    const span = errorBanner.querySelector("[data-role=error-message]");
    if (span) span.textContent = msg;
    errorBanner.hidden = false;
  };
  $("#error-dismiss").addEventListener("click", () => {
    errorBanner.hidden = true;
  });

  const conflictDialog = $("#conflict-dialog");
  const openConflict = (sid: string, detail: string, currentClass: AnomalyClass): void => {
    conflictSid = sid;
    const msg = conflictDialog.querySelector("[data-role=conflict-message]");
    if (msg) msg.textContent = detail;
    const cls = $("#conflict-class");
    cls.textContent = "";
    cls.appendChild(classBadge(currentClass));
    conflictDialog.hidden = false;
  };
  $("#conflict-dismiss").addEventListener("click", () => {
    conflictDialog.hidden = true;
    conflictSid = null;
  });
  $("#conflict-reload").addEventListener("click", () => {
    if (!conflictSid) return;
    const sid = conflictSid;
    conflictDialog.hidden = true;
    conflictSid = null;
    void guard(async () => {
      const fresh = await fetchSeries(sid);
      updateCardsFor(fresh);
      await refreshAuditIfVisible();
    });
  });

  // every user-triggered async path funnels through here; failures land in
  // the banner and are never retried behind the user's back
  async function guard(fn: () => Promise<void>): Promise<void> {
    try {
      await fn();
    } catch (err) {
      if (err instanceof ApiError) {
        showError(err.status ? `API error ${err.status}: ${err.message}` : err.message);
      } else {
        showError(String(err));
      }
    }
  }

  function relabelControl(container: HTMLElement, payload: SeriesPayload): HTMLElement {
    const wrap = document.createElement("span");
    wrap.className = "relabel";
    const select = document.createElement("select");
    select.dataset.role = "relabel-select";
    CLASS_NAMES.forEach((name, idx) => {
      const opt = document.createElement("option");
      opt.value = String(idx);
      opt.textContent = name;
      if (idx === payload.label) opt.selected = true;
      select.appendChild(opt);
    });
    const apply = document.createElement("button");
    apply.dataset.role = "relabel-apply";
    apply.textContent = "apply";
    apply.addEventListener("click", () => {
      const newClass = Number(select.value) as AnomalyClass;
      const expected = Number(container.dataset.class) as AnomalyClass;
      void guard(async () => {
        try {
          const fresh = await postRelabel({
            series_id: payload.series_id,
            new_class: newClass,
            expected_class: expected,
            actor: state.actor,
          });
          updateCardsFor(fresh);
          await refreshAuditIfVisible();
        } catch (err) {
          if (err instanceof ApiError && err.conflict) {
            openConflict(payload.series_id, err.message, err.conflict.current_class);
            return;
          }
          throw err;
        }
      });
    });
    wrap.append(select, " ", apply);
    return wrap;
  }

  function fillSeriesCard(
    container: HTMLElement,
    payload: SeriesPayload,
    opts: { heading: string; distance?: number; chartWidth?: number },
  ): void {
    container.dataset.seriesId = payload.series_id;
    container.dataset.class = String(payload.label);
    container.textContent = "";
    const head = document.createElement("header");
    const title = document.createElement("strong");
    title.textContent = opts.heading;
    head.appendChild(title);
    if (opts.distance !== undefined) {
      const dist = document.createElement("span");
      dist.className = "distance";
      dist.dataset.role = "distance";
      dist.textContent = `d=${opts.distance.toFixed(4)}`;
      head.appendChild(dist);
    }
    head.appendChild(classBadge(payload.label));
    container.appendChild(head);
    container.appendChild(
      seriesChart(payload, opts.chartWidth ? { width: opts.chartWidth } : {}),
    );
    container.appendChild(relabelControl(container, payload));
  }

  // a confirmed write or reload refreshes every card showing that series,
  // so no stale class survives anywhere on screen
  function updateCardsFor(payload: SeriesPayload): void {
    const cards = root.querySelectorAll<HTMLElement>(
      `[data-series-card][data-series-id="${payload.series_id}"]`,
    );
    cards.forEach((card) => {
      const distEl = card.querySelector<HTMLElement>("[data-role=distance]");
      const distance = distEl ? Number(distEl.textContent?.slice(2)) : undefined;
      const width = card.dataset.seriesCard === "main" ? 640 : 320;
      fillSeriesCard(card, payload, {
        heading: payload.series_id,
        distance,
        chartWidth: width,
      });
    });
  }

  async function renderBrowse(): Promise<void> {
    const mainPanel = $("#main-panel");
    const neighborList = $("#neighbor-list");
    const [payload, neighbors] = await Promise.all([
      fetchSeries(state.currentId),
      fetchNeighbors(state.currentId, state.k),
    ]);
    mainPanel.textContent = "";
    const card = document.createElement("div");
    card.dataset.seriesCard = "main";
    card.className = "series-card main";
    fillSeriesCard(card, payload, { heading: payload.series_id, chartWidth: 640 });
    mainPanel.appendChild(card);

    // neighbor payloads fetched in parallel, rendered strictly in the order
    // the API returned them (ascending distance)
    const payloads = await Promise.all(
      neighbors.neighbors.map((n) => fetchSeries(n.series_id)),
    );
    neighborList.textContent = "";
    neighbors.neighbors.forEach((n, i) => {
      const nb = document.createElement("div");
      nb.dataset.seriesCard = "neighbor";
      nb.className = "series-card neighbor";
      fillSeriesCard(nb, payloads[i] as SeriesPayload, {
        heading: n.series_id,
        distance: n.distance,
        chartWidth: 320,
      });
      neighborList.appendChild(nb);
    });
  }

  async function renderAudit(): Promise<void> {
    const [payload, exported] = await Promise.all([
      fetchSeries(state.currentId),
      fetchExport(),
    ]);
    $("#audit-series").textContent = state.currentId;
    const ownEvents = exported.events.filter((e) => e.series_id === state.currentId);
    const auditBody = $("#audit-table").querySelector("tbody");
    if (!auditBody) throw new Error("missing audit tbody");
    auditBody.textContent = "";

    // the generator's original class is the oldest recorded old_class, or the
    // live label when nothing has been edited yet
    const originClass = ownEvents.length
      ? (ownEvents[0] as LabelEvent).old_class
      : payload.label;
    const originRow = document.createElement("tr");
    originRow.dataset.role = "audit-origin";
    originRow.innerHTML = `<td>generator</td><td>${className(originClass)}</td><td></td><td></td>`;
    auditBody.appendChild(originRow);
    for (const e of ownEvents) {
      const tr = document.createElement("tr");
      tr.dataset.role = "audit-edit";
      tr.innerHTML =
        `<td>${e.actor}</td><td>${className(e.new_class)}</td>` +
        `<td>${className(e.old_class)} → ${className(e.new_class)}</td><td>${e.timestamp}</td>`;
      auditBody.appendChild(tr);
    }

    const eventsBody = $("#events-table").querySelector("tbody");
    if (!eventsBody) throw new Error("missing events tbody");
    eventsBody.textContent = "";
    for (const e of exported.events) {
      const tr = document.createElement("tr");
      tr.innerHTML =
        `<td>${e.series_id}</td>` +
        `<td>${className(e.old_class)} → ${className(e.new_class)}</td>` +
        `<td>${e.actor}</td><td>${e.timestamp}</td>`;
      eventsBody.appendChild(tr);
    }
  }

  async function refreshAuditIfVisible(): Promise<void> {
    if (!$("#audit-view").hidden) await renderAudit();
  }

  const browseBtn = $("#nav-browse");
  const auditBtn = $("#nav-audit");
  const setView = (view: "browse" | "audit"): void => {
    $("#browse-view").hidden = view !== "browse";
    $("#audit-view").hidden = view !== "audit";
    browseBtn.classList.toggle("active", view === "browse");
    auditBtn.classList.toggle("active", view === "audit");
  };
  browseBtn.addEventListener("click", () => {
    setView("browse");
    void guard(renderBrowse);
  });
  auditBtn.addEventListener("click", () => {
    setView("audit");
    void guard(renderAudit);
  });

  const seriesSelect = $<HTMLSelectElement>("#series-select");
  seriesSelect.addEventListener("change", () => {
    state.currentId = seriesSelect.value;
    void guard(async () => {
      await renderBrowse();
      await refreshAuditIfVisible();
    });
  });

  const kInput = $<HTMLInputElement>("#k-input");
  kInput.addEventListener("change", () => {
    const k = Math.floor(Number(kInput.value));
    state.k = Math.max(1, Math.min(k || 1, state.seriesIds.length - 1));
    kInput.value = String(state.k);
    void guard(renderBrowse);
  });

  const actorInput = $<HTMLInputElement>("#actor-input");
  actorInput.addEventListener("change", () => {
    state.actor = actorInput.value.trim() || "annotator";
    actorInput.value = state.actor;
  });

  await guard(async () => {
    const datasets = await fetchDatasets();
    const ds = datasets[0];
    if (!ds) throw new Error("no dataset served");
    state.datasetName = ds.name;
    state.seriesIds = ds.series_ids;
    state.k = Math.min(state.k, Math.max(ds.series_ids.length - 1, 1));
    kInput.value = String(state.k);
    $("#dataset-label").textContent = `${ds.name} (${ds.n_series} series)`;
    seriesSelect.textContent = "";
    for (const sid of ds.series_ids) {
      const opt = document.createElement("option");
      opt.value = sid;
      opt.textContent = sid;
      seriesSelect.appendChild(opt);
    }
    state.currentId = ds.series_ids[0] ?? "";
    if (!state.currentId) throw new Error("dataset has no series");
    seriesSelect.value = state.currentId;
    await renderBrowse();
  });
}

const mount = typeof document !== "undefined" ? document.getElementById("app") : null;
if (mount) void initApp(mount);
