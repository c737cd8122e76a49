/**
 * Console bootstrap: wires the topology view, the design canvas, the
 * submit/schedule flow, and the live dashboard to the page. All domain
 * logic lives in the imported modules; this file is DOM plumbing.
 */

import { ApiError, ConsoleApi } from "./api.js";
import {
  addLink,
  canvasFromDesign,
  designFromCanvas,
  draftValid,
  newCanvas,
  refreshFindings,
  removeLink,
  togglePair,
  type DesignCanvas,
} from "./design.js";
import { LiveDashboardModel, renderDashboard } from "./dashboard.js";
import { CountsSubscription } from "./stream.js";
import {
  esc,
  renderBundleDetail,
  renderHubDetail,
  renderTopologyPanel,
} from "./topology_view.js";
import type { Finding, QkdReport, TopologyDoc, WindowPayload } from "./types.js";

// ---------- DOM refs ----------

const $ = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;

const $baseUrl = $<HTMLInputElement>("base-url");
const $token = $<HTMLInputElement>("token");
const $connect = $<HTMLButtonElement>("btn-connect");
const $health = $<HTMLSpanElement>("health");
const $topology = $<HTMLDivElement>("topology");
const $detail = $<HTMLDivElement>("detail");
const $canvasRoot = $<HTMLDivElement>("canvas");
const $findings = $<HTMLDivElement>("findings");
const $flow = $<HTMLDivElement>("flow");
const $dashboard = $<HTMLDivElement>("dashboard");
const $ledger = $<HTMLDivElement>("ledger");

// ---------- state ----------

let api: ConsoleApi | null = null;
let topo: TopologyDoc | null = null;
let canvas: DesignCanvas = newCanvas();
let model: LiveDashboardModel | null = null;
let subscription: CountsSubscription | null = null;
let monitorTimer: number | null = null;
let lastWindow: WindowPayload | null = null;
let lastRequestId: string | null = null;

// ---------- topology panel ----------

async function loadTopology(): Promise<void> {
  if (!api) return;
  try {
    topo = await api.topology();
    $topology.innerHTML = renderTopologyPanel(topo as unknown as Parameters<typeof renderTopologyPanel>[0]);
    $health.textContent = "connected";
    $health.className = "ok";
  } catch (err) {
    $topology.innerHTML = `<div class="error-panel"><h3>Service unreachable</h3><div>${esc(String(err))}</div></div>`;
    $health.textContent = "offline";
    $health.className = "bad";
  }
  renderCanvas();
}

$topology.addEventListener("click", (ev) => {
  const glyph = (ev.target as Element).closest("[data-kind]");
  if (!glyph || !topo) return;
  const kind = glyph.getAttribute("data-kind");
  const id = glyph.getAttribute("data-id") ?? "";
  if (kind === "hub") {
    const hub = topo.hubs.find((h) => h.id === id);
    if (hub) $detail.innerHTML = renderHubDetail(hub);
  } else if (kind === "bundle") {
    const bundle = topo.bundles.find((b) => b.id === id);
    if (bundle) $detail.innerHTML = renderBundleDetail(bundle);
  } else if (kind === "node") {
    $detail.innerHTML = `<div class="detail"><h3>Node ${esc(id)}</h3><div class="dim">QNIC attachment point; use it as a delivery endpoint in the canvas.</div></div>`;
  }
});

// ---------- design canvas panel ----------

function endpointOptions(selected: string): string {
  if (!topo) return `<option value="${esc(selected)}">${esc(selected) || "(no topology)"}</option>`;
  const opts: string[] = [`<option value=""${selected === "" ? " selected" : ""}>(pick)</option>`];
  for (const hub of topo.hubs) {
    opts.push(
      `<option value="${esc(hub.id)}.measure"${selected === `${hub.id}.measure` ? " selected" : ""}>${esc(hub.id)}.measure</option>`,
    );
    for (const n of hub.nodes) {
      opts.push(`<option value="${esc(n)}"${selected === n ? " selected" : ""}>${esc(n)}</option>`);
    }
  }
  return opts.join("");
}

function hubOptions(): string {
  if (!topo) return "";
  return topo.hubs.map((h) => `<option value="${esc(h.id)}">${esc(h.id)}</option>`).join("");
}

function renderCanvas(): void {
  refreshFindings(canvas, topo);
  const links = canvas.links
    .map((link, li) => {
      const arms = link.arms
        .map(
          (arm, ai) => `
        <div class="arm">
          <span class="dim">arm ${ai === 0 ? "a" : "b"} &#8594; tap ${2 * li + ai}</span>
          <select data-act="arm-endpoint" data-link="${li}" data-arm="${ai}">${endpointOptions(arm.endpoint)}</select>
          <label>basis&#176; <input type="number" step="0.5" value="${arm.basisDeg ?? 0}" data-act="arm-basis" data-link="${li}" data-arm="${ai}"></label>
          <label><input type="checkbox" ${arm.apc ? "checked" : ""} data-act="arm-apc" data-link="${li}" data-arm="${ai}"> APC</label>
        </div>`,
        )
        .join("");
      return `
      <div class="link-card${canvas.selection?.kind === "link" && canvas.selection.index === li ? " selected" : ""}">
        <div class="link-head">
          <strong>link ${li}</strong>
          <select data-act="link-hub" data-link="${li}">${topo ? topo.hubs.map((h) => `<option value="${esc(h.id)}"${h.id === link.sourceHub ? " selected" : ""}>${esc(h.id)}</option>`).join("") : `<option>${esc(link.sourceHub)}</option>`}</select>
          <select data-act="link-mode" data-link="${li}">
            <option value="entangled"${link.mode === "entangled" ? " selected" : ""}>entangled</option>
            <option value="heralded"${link.mode === "heralded" ? " selected" : ""}>heralded</option>
          </select>
          <label>pairs/s <input type="number" min="1" value="${link.pairRateHz ?? 1_000_000}" data-act="link-rate" data-link="${li}"></label>
          <label><input type="checkbox" ${pairActive(li) ? "checked" : ""} data-act="link-pair" data-link="${li}"> count coincidences</label>
          <button data-act="link-remove" data-link="${li}">remove</button>
        </div>
        ${arms}
      </div>`;
    })
    .join("");

  $canvasRoot.innerHTML = `
    ${links || `<div class="dim">empty design &#8212; add a source link</div>`}
    <div class="canvas-actions">
      <button data-act="add-link" ${topo ? "" : "disabled"}>add link</button>
      <label>window (ps) <input type="number" min="1" value="${canvas.windowPs ?? 1000}" data-act="window-ps"></label>
    </div>
    <div class="submit-row">
      <input id="request-id" placeholder="request id" value="${esc(lastRequestId ?? "")}">
      <label>start (s) <input id="start-s" type="number" step="0.1" value="1"></label>
      <label>end (s) <input id="end-s" type="number" step="0.1" value="7"></label>
      <label>priority <input id="priority" type="number" value="0"></label>
      <button id="btn-submit" data-act="submit" ${draftValid(canvas) ? "" : "disabled"}>submit design</button>
    </div>`;

  $findings.innerHTML = canvas.findings.length
    ? `<div class="findings"><h4>draft findings</h4><ul>${canvas.findings
        .map((f) => `<li><code>${esc(f.code)}</code> ${esc(f.message)}</li>`)
        .join("")}</ul></div>`
    : `<div class="ok-note">draft valid</div>`;
}

function pairActive(li: number): boolean {
  return (canvas.pairs ?? []).some((p) => p[0] === 2 * li && p[1] === 2 * li + 1);
}

$canvasRoot.addEventListener("click", (ev) => {
  const el = (ev.target as Element).closest("[data-act]");
  if (!el) return;
  const act = el.getAttribute("data-act");
  const li = Number(el.getAttribute("data-link") ?? -1);
  if (act === "add-link" && topo) {
    addLink(canvas, topo.hubs[0]?.id ?? "");
    renderCanvas();
  } else if (act === "link-remove") {
    removeLink(canvas, li);
    renderCanvas();
  } else if (act === "submit") {
    void submitFlow();
  }
});

$canvasRoot.addEventListener("change", (ev) => {
  const el = ev.target as HTMLInputElement | HTMLSelectElement;
  const act = el.getAttribute("data-act");
  if (!act) return;
  const li = Number(el.getAttribute("data-link") ?? -1);
  const ai = Number(el.getAttribute("data-arm") ?? -1);
  const link = canvas.links[li];
  if (act === "link-hub" && link) link.sourceHub = el.value;
  else if (act === "link-mode" && link) link.mode = el.value === "heralded" ? "heralded" : "entangled";
  else if (act === "link-rate" && link) link.pairRateHz = Number(el.value);
  else if (act === "link-pair" && link) togglePair(canvas, 2 * li, 2 * li + 1);
  else if (act === "window-ps") canvas.windowPs = Number(el.value);
  else if (link && link.arms[ai]) {
    const arm = link.arms[ai]!;
    if (act === "arm-endpoint") arm.endpoint = el.value;
    else if (act === "arm-basis") arm.basisDeg = Number(el.value);
    else if (act === "arm-apc") arm.apc = (el as HTMLInputElement).checked;
  }
  renderCanvas();
});

// ---------- submit / schedule / instantiate flow ----------

function findingsList(findings: Finding[]): string {
  return `<ul>${findings.map((f) => `<li><code>${esc(f.code)}</code> ${esc(f.message)}${f.element ? ` <span class="dim">(${esc(f.element)})</span>` : ""}</li>`).join("")}</ul>`;
}

function flowError(err: unknown): string {
  if (err instanceof ApiError) {
    const blocking =
      err.code === "E_CONFLICT" && err.findings.length
        ? `<div>blocking windows:</div>${findingsList(err.findings)}`
        : err.findings.length
          ? findingsList(err.findings)
          : "";
    return `<div class="failure"><code>${esc(err.code)}</code> ${esc(err.message)}${blocking}</div>`;
  }
  return `<div class="retry-banner">service unreachable &#8212; draft preserved. <button data-act="retry-submit">retry</button><div class="dim">${esc(String(err))}</div></div>`;
}

async function submitFlow(): Promise<void> {
  if (!api) {
    $flow.innerHTML = `<div class="failure">connect to a service first</div>`;
    return;
  }
  refreshFindings(canvas, topo);
  if (!draftValid(canvas)) {
    renderCanvas();
    return;
  }
  const requestId = $<HTMLInputElement>("request-id").value.trim() || `req-${Date.now()}`;
  lastRequestId = requestId;
  const body = {
    request_id: requestId,
    design: designFromCanvas(canvas),
    start_s: Number($<HTMLInputElement>("start-s").value),
    end_s: Number($<HTMLInputElement>("end-s").value),
    priority: Number($<HTMLInputElement>("priority").value),
  };
  $flow.innerHTML = `<div class="dim">submitting ${esc(requestId)}&#8230;</div>`;
  try {
    const res = await api.submitRequest(body);
    $flow.innerHTML =
      `<div class="ok-note">accepted <code>${esc(res.request_id)}</code></div>` +
      (res.findings.length ? findingsList(res.findings) : "") +
      `<button data-act="schedule" data-request="${esc(res.request_id)}">schedule</button>`;
  } catch (err) {
    $flow.innerHTML = flowError(err);
  }
}

$flow.addEventListener("click", async (ev) => {
  const el = (ev.target as Element).closest("[data-act]");
  if (!el || !api) return;
  const act = el.getAttribute("data-act");
  try {
    if (act === "retry-submit") {
      await submitFlow();
    } else if (act === "schedule") {
      const requestId = el.getAttribute("data-request")!;
      lastWindow = await api.schedule(requestId);
      $flow.innerHTML =
        `<div class="ok-note">scheduled <code>${esc(lastWindow.window_id)}</code> ` +
        `[${lastWindow.start_s}&#8211;${lastWindow.end_s} s, priority ${lastWindow.priority}]</div>` +
        `<div class="dim">resources: ${lastWindow.resources.map(esc).join(", ")}</div>` +
        `<button data-act="instantiate" data-request="${esc(requestId)}">instantiate when open</button>`;
    } else if (act === "instantiate") {
      const requestId = el.getAttribute("data-request")!;
      const monitor = await api.instantiate(requestId);
      $flow.innerHTML = `<div class="ok-note">running <code>${esc(monitor.handle_id)}</code></div>`;
      openDashboard(monitor.handle_id);
    }
  } catch (err) {
    $flow.innerHTML = flowError(err);
  }
});

// ---------- live dashboard ----------

function redrawDashboard(): void {
  if (!model || !api) return;
  $dashboard.innerHTML = renderDashboard(model);
}

$dashboard.addEventListener("click", async (ev) => {
  const el = (ev.target as Element).closest<HTMLButtonElement>('[data-act="download-archive"]');
  if (!el || !api) return;
  const status = $dashboard.querySelector(".archive-status");
  el.disabled = true;
  try {
    const { blob, manifestSha256 } = await api.downloadArchive(el.getAttribute("data-handle")!);
    if (typeof URL.createObjectURL === "function") {
      const href = URL.createObjectURL(blob);
      const a = document.createElement("a");
      a.href = href;
      a.download = `${el.getAttribute("data-handle")}.zip`;
      a.click();
      URL.revokeObjectURL(href);
    }
    if (status) {
      status.innerHTML =
        `${esc(String(blob.size))} bytes &#8212; manifest sha256 <code>${esc(manifestSha256 ?? "?")}</code>`;
    }
  } catch (err) {
    el.disabled = false;
    if (status) {
      const code = err instanceof ApiError ? err.code : "unreachable";
      status.innerHTML = `<span class="failure">download failed: ${esc(code)}</span>`;
    }
  }
});

function closeDashboard(): void {
  subscription?.stop();
  subscription = null;
  if (monitorTimer !== null) window.clearInterval(monitorTimer);
  monitorTimer = null;
}

function openDashboard(handleId: string): void {
  if (!api) return;
  closeDashboard();
  model = new LiveDashboardModel(handleId);
  redrawDashboard();

  subscription = new CountsSubscription(api, handleId, {
    follow: true,
    onRecord: (rec) => {
      model?.ingestRecord(rec);
      redrawDashboard();
    },
    onRetry: (err) => {
      if (err instanceof ApiError && err.code === "E_SCOPE") {
        model?.setLocked({ code: err.code, message: err.message, findings: err.findings });
        redrawDashboard();
        return false;
      }
      return true;
    },
    onEnd: () => void pollMonitor(),
  });
  void subscription.start();

  const pollMonitor = async () => {
    if (!api || !model) return;
    try {
      model.setMonitor(await api.monitor(handleId));
      redrawDashboard();
      if (model.frozen && monitorTimer !== null) {
        window.clearInterval(monitorTimer);
        monitorTimer = null;
      }
    } catch (err) {
      if (err instanceof ApiError && err.code === "E_SCOPE") {
        model.setLocked({ code: err.code, message: err.message, findings: err.findings });
        redrawDashboard();
        closeDashboard();
      }
    }
  };
  monitorTimer = window.setInterval(pollMonitor, 1000);
  void pollMonitor();
}

$<HTMLButtonElement>("btn-watch").addEventListener("click", () => {
  const handleId = $<HTMLInputElement>("watch-id").value.trim();
  if (handleId) openDashboard(handleId);
});

$<HTMLInputElement>("report-file").addEventListener("change", async (ev) => {
  const file = (ev.target as HTMLInputElement).files?.[0];
  if (!file || !model) return;
  try {
    model.setQkdReport(JSON.parse(await file.text()) as QkdReport);
    redrawDashboard();
  } catch {
    // not a JSON report; leave the panel as-is
  }
});

// ---------- ledger ----------

$<HTMLButtonElement>("btn-ledger").addEventListener("click", async () => {
  if (!api) return;
  try {
    const ledger = await api.ledger();
    const rows = ledger.entries
      .map(
        (e) =>
          `<tr><td><code>${esc(e.instantiation_id)}</code></td><td class="num">${e.duration_s}</td>` +
          `<td class="num">${e.weight}</td><td class="num">${e.fee_units}</td><td>${esc(e.mode)}</td></tr>`,
      )
      .join("");
    $ledger.innerHTML =
      `<table class="intervals"><thead><tr><th>run</th><th>duration (s)</th><th>weight</th><th>fee</th><th>mode</th></tr></thead>` +
      `<tbody>${rows}</tbody></table><div>total: <span class="num">${ledger.total_fee_units}</span> units</div>`;
  } catch (err) {
    $ledger.innerHTML = flowError(err);
  }
});

// ---------- init ----------

$connect.addEventListener("click", () => {
  api = new ConsoleApi($baseUrl.value.replace(/\/$/, ""), $token.value.trim() || "anonymous");
  void loadTopology();
});

canvas = canvasFromDesign({ format: "design.v1", links: [], pairs: [], window_ps: 1000 });
renderCanvas();
