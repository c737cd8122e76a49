/**
 * Live run dashboard: rolling count series, APC convergence, QKD report.
 *
 * Two hard rules, both contract-tested against recorded payloads:
 *
 *  - The displayed series is monotone in interval_start_ps. Holes in
 *    the stream are shown as gap rows; nothing is interpolated.
 *  - Every number shown is a number the service sent, rendered with
 *    String(). The model does no arithmetic on count data; chart bars
 *    scale for layout but carry no derived labels.
 */

import type {
  ApcSignal,
  CountRecordWire,
  ErrorBody,
  MonitorPayload,
  QkdReport,
} from "./types.js";
import { esc } from "./topology_view.js";

export const DEFAULT_WINDOW_RECORDS = 600;

export interface DashboardEntry {
  kind: "record" | "gap";
  record?: CountRecordWire;
}

export class LiveDashboardModel {
  readonly handleId: string;
  records: CountRecordWire[] = [];
  /** interval_start_ps of each record that is followed by a hole */
  gapsAfter = new Set<number>();
  staleDropped = 0;
  monitor: MonitorPayload | null = null;
  apcSeries = new Map<string, ApcSignal[]>();
  qkdReport: QkdReport | null = null;
  locked: ErrorBody | null = null;
  maxRecords: number;

  constructor(handleId: string, maxRecords = DEFAULT_WINDOW_RECORDS) {
    this.handleId = handleId;
    this.maxRecords = maxRecords;
  }

  /** Accept one streamed record; stale or duplicate intervals are dropped. */
  ingestRecord(rec: CountRecordWire): boolean {
    const last = this.records.at(-1);
    if (last) {
      if (rec.interval_start_ps <= last.interval_start_ps) {
        this.staleDropped += 1;
        return false;
      }
      if (last.interval_start_ps + last.interval_len_ps !== rec.interval_start_ps) {
        this.gapsAfter.add(last.interval_start_ps);
      }
    }
    this.records.push(rec);
    if (this.records.length > this.maxRecords) {
      const dropped = this.records.splice(0, this.records.length - this.maxRecords);
      for (const d of dropped) this.gapsAfter.delete(d.interval_start_ps);
    }
    return true;
  }

  setMonitor(m: MonitorPayload): void {
    this.monitor = m;
    for (const sig of m.apc_signals) {
      const key = `${sig.hub}.apc${sig.channel}`;
      const series = this.apcSeries.get(key) ?? [];
      const last = series.at(-1);
      if (!last || sig.t_s > last.t_s) series.push(sig);
      this.apcSeries.set(key, series);
    }
  }

  setQkdReport(report: QkdReport): void {
    this.qkdReport = report;
  }

  setLocked(err: ErrorBody): void {
    this.locked = err;
  }

  /** Completed or failed runs freeze: final values stay, stream is done. */
  get frozen(): boolean {
    return this.monitor?.state === "Completed" || this.monitor?.state === "Failed";
  }

  entries(): DashboardEntry[] {
    const out: DashboardEntry[] = [];
    for (const record of this.records) {
      out.push({ kind: "record", record });
      if (this.gapsAfter.has(record.interval_start_ps)) out.push({ kind: "gap" });
    }
    return out;
  }
}

// ---------- rendering ----------

const num = (v: number | string | boolean) => `<span class="num">${esc(String(v))}</span>`;

function stateBadge(state: string): string {
  return `<span class="badge badge-${esc(state.toLowerCase())}">${esc(state)}</span>`;
}

function channelColumns(records: CountRecordWire[]): { singles: string[]; pairs: string[] } {
  const singles = new Set<string>();
  const pairs = new Set<string>();
  for (const r of records) {
    for (const ch of Object.keys(r.singles)) singles.add(ch);
    for (const p of Object.keys(r.coincidences)) pairs.add(p);
  }
  return { singles: [...singles].sort(), pairs: [...pairs].sort() };
}

function intervalTable(model: LiveDashboardModel): string {
  if (model.records.length === 0) {
    return `<div class="dim">no count records yet</div>`;
  }
  const { singles, pairs } = channelColumns(model.records);
  const head =
    `<tr><th>interval start (ps)</th><th>length (ps)</th>` +
    singles.map((c) => `<th>ch ${esc(c)}</th>`).join("") +
    pairs.map((p) => `<th>cc ${esc(p)}</th>`).join("") +
    `</tr>`;
  const width = 2 + singles.length + pairs.length;
  const body = model
    .entries()
    .map((entry) => {
      if (entry.kind === "gap") {
        return `<tr class="gap-row"><td colspan="${width}">stream gap &#8212; intervals missing, not interpolated</td></tr>`;
      }
      const r = entry.record!;
      return (
        `<tr><td>${num(r.interval_start_ps)}</td><td>${num(r.interval_len_ps)}</td>` +
        singles.map((c) => `<td>${c in r.singles ? num(r.singles[c]!) : ""}</td>`).join("") +
        pairs.map((p) => `<td>${p in r.coincidences ? num(r.coincidences[p]!) : ""}</td>`).join("") +
        `</tr>`
      );
    })
    .join("");
  return `<table class="intervals"><thead>${head}</thead><tbody>${body}</tbody></table>`;
}

/** Unlabeled bars, one per interval; heights scale for layout only. */
function countChart(model: LiveDashboardModel): string {
  const { pairs } = channelColumns(model.records);
  const key = pairs[0];
  if (!key || model.records.length === 0) return "";
  const values = model.records.map((r) => r.coincidences[key] ?? 0);
  const peak = Math.max(...values, 1);
  const w = 640;
  const h = 120;
  const bw = Math.max(1, Math.floor(w / Math.max(values.length, 1)) - 1);
  const bars = model.records
    .map((r, i) => {
      const v = r.coincidences[key] ?? 0;
      const bh = Math.max(1, Math.round((v / peak) * (h - 8)));
      const x = i * (bw + 1);
      const gap = model.gapsAfter.has(r.interval_start_ps) ? ` bar-before-gap` : "";
      return `<rect class="bar${gap}" x="${x}" y="${h - bh}" width="${bw}" height="${bh}"><title>cc ${esc(key)}</title></rect>`;
    })
    .join("");
  return (
    `<svg class="count-chart" viewBox="0 0 ${w} ${h}" preserveAspectRatio="none" role="img">` +
    `${bars}</svg><div class="dim chart-caption">coincidences cc ${esc(key)} per interval</div>`
  );
}

function apcPanel(model: LiveDashboardModel): string {
  if (model.apcSeries.size === 0) {
    return `<div class="dim">no polarization channels on this run</div>`;
  }
  const blocks: string[] = [];
  for (const [key, series] of [...model.apcSeries.entries()].sort()) {
    const latest = series.at(-1)!;
    const peak = Math.max(...series.map((s) => s.error), 1e-9);
    const pts = series
      .map((s, i) => `${(i / Math.max(series.length - 1, 1)) * 120},${30 - (s.error / peak) * 28}`)
      .join(" ");
    blocks.push(
      `<div class="apc-channel"><h4>${esc(key)}</h4>` +
        `<svg class="apc-spark" viewBox="0 0 120 32" preserveAspectRatio="none"><polyline points="${pts}"/></svg>` +
        `<div>error ${num(latest.error)} &#183; evals ${num(latest.evaluations)} &#183; converged ${num(latest.converged)}</div>` +
        `</div>`,
    );
  }
  return blocks.join("");
}

function qkdPanel(model: LiveDashboardModel): string {
  const r = model.qkdReport;
  if (!r) return `<div class="dim">no key report received</div>`;
  const rows: [string, string][] = [
    ["q (QBER)", num(r.qber)],
    ["coincidences", num(r.n_coincidences)],
    ["sifted bits", num(r.sifted_bits)],
    ["reconciled bits", num(r.reconciled_bits)],
    ["final bits", num(r.final_bits)],
    ["final fraction", num(r.final_fraction)],
    ["keys match", num(r.keys_match)],
    ["offset (ps)", num(r.offset_ps)],
  ];
  return (
    `<table class="kv qkd">` +
    rows.map(([k, v]) => `<tr><td class="dim">${esc(k)}</td><td>${v}</td></tr>`).join("") +
    `</table>`
  );
}

export function renderDashboard(model: LiveDashboardModel): string {
  if (model.locked) {
    return (
      `<div class="locked-panel"><h3>&#128274; dashboard locked</h3>` +
      `<div><code>${esc(model.locked.code)}</code> ${esc(model.locked.message)}</div></div>`
    );
  }
  const m = model.monitor;
  const header = m
    ? `<div class="dash-header">${stateBadge(m.state)} <code>${esc(m.handle_id)}</code>` +
      ` <span class="dim">window</span> ${num(m.start_s)}&#8211;${num(m.end_s)} s` +
      ` <span class="dim">now</span> ${num(m.now_s)} s` +
      ` <span class="dim">records</span> ${num(m.records_visible)}` +
      (m.failure && typeof m.failure === "object" && "code" in m.failure
        ? `<div class="failure"><code>${esc(String(m.failure.code))}</code> ${esc(String((m.failure as ErrorBody).message ?? ""))}</div>`
        : "") +
      `</div>`
    : `<div class="dash-header">${stateBadge("Pending")} <code>${esc(model.handleId)}</code></div>`;
  // The archive route is scoped to the subscriber, so a plain href would
  // arrive without the bearer token; the button goes through the API client.
  const archive = model.frozen
    ? `<div class="archive"><button class="archive-link" data-act="download-archive"` +
      ` data-handle="${esc(model.handleId)}">download run archive</button>` +
      `<span class="archive-status"></span></div>`
    : "";
  const frozenNote = model.frozen
    ? `<div class="dim frozen-note">run ${esc(m?.state ?? "")} &#8212; final values frozen</div>`
    : "";
  return (
    `<div class="dashboard" data-handle="${esc(model.handleId)}">` +
    header +
    frozenNote +
    `<section class="panel"><h3>Counts per interval</h3>${countChart(model)}${intervalTable(model)}</section>` +
    `<section class="panel"><h3>Polarization control</h3>${apcPanel(model)}</section>` +
    `<section class="panel"><h3>Key distribution</h3>${qkdPanel(model)}</section>` +
    archive +
    `</div>`
  );
}
