/**
 * Topology rendering: topology.v1 -> interactive ring/spoke SVG.
 *
 * Pure string generation so it is testable without a DOM. Every hub,
 * node, and bundle becomes a selectable glyph carrying `data-kind` and
 * `data-id`; click wiring lives in main.ts. An invalid document yields
 * an error panel and no partial drawing.
 */

import type { BundleDoc, Finding, HubDoc, Json, SwitchDoc, TopologyDoc } from "./types.js";

const W = 900;
const H = 640;
const CX = W / 2;
const CY = H / 2;
const RING_R = 170;
const SPOKE_R = 118;
const KIND_OFFSET: Record<string, number> = { primary: -5, secondary: 0, lan: 5 };

export function esc(s: unknown): string {
  return String(s)
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

// ---------- validation ----------

function isObject(v: unknown): v is Record<string, Json> {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

/** Shape-check a topology.v1 document; findings instead of exceptions. */
export function validateTopologyDoc(doc: Json): Finding[] {
  const out: Finding[] = [];
  const bad = (message: string, element = "") =>
    out.push({ code: "E_SCHEMA", message, element });

  if (!isObject(doc)) {
    bad("topology document must be an object");
    return out;
  }
  if (doc.schema !== "topology.v1") {
    bad(`expected topology.v1, got ${JSON.stringify(doc.schema ?? null)}`);
    return out;
  }
  if (typeof doc.control_center !== "string") bad("control_center must be a string");
  if (!Array.isArray(doc.hubs) || doc.hubs.length === 0) {
    bad("hubs must be a non-empty list");
    return out;
  }
  const elements = new Set<string>([String(doc.control_center)]);
  doc.hubs.forEach((hub, i) => {
    const where = `hubs[${i}]`;
    if (!isObject(hub) || typeof hub.id !== "string") {
      bad(`${where} must be an object with an id`, where);
      return;
    }
    elements.add(hub.id);
    if (!Array.isArray(hub.nodes) || hub.nodes.some((n) => typeof n !== "string")) {
      bad(`${where}.nodes must be a list of node ids`, hub.id);
    } else {
      for (const n of hub.nodes) elements.add(String(n));
    }
    if (!Array.isArray(hub.switches) || hub.switches.some((s) => !isObject(s))) {
      bad(`${where}.switches must be a list of switch objects`, hub.id);
    }
  });
  if (out.length > 0) return out;
  if (!Array.isArray(doc.bundles)) {
    bad("bundles must be a list");
    return out;
  }
  doc.bundles.forEach((b, i) => {
    const where = `bundles[${i}]`;
    if (!isObject(b) || typeof b.id !== "string") {
      bad(`${where} must be an object with an id`, where);
      return;
    }
    for (const end of ["a", "b"] as const) {
      if (typeof b[end] !== "string" || !elements.has(b[end] as string)) {
        bad(`${where}.${end} names an unknown element ${JSON.stringify(b[end] ?? null)}`, b.id);
      }
    }
    for (const k of ["qubit_lanes", "timing_fibers", "lan_fibers", "length_km", "per_fiber_loss_db"]) {
      if (typeof b[k] !== "number") bad(`${where}.${k} must be a number`, b.id);
    }
  });
  return out;
}

// ---------- layout ----------

interface Pt {
  x: number;
  y: number;
}

function hubAngle(i: number, n: number): number {
  return -Math.PI / 2 + (2 * Math.PI * i) / n;
}

function hubPos(i: number, n: number): Pt {
  const a = hubAngle(i, n);
  return { x: CX + RING_R * Math.cos(a), y: CY + RING_R * Math.sin(a) };
}

function nodePos(hub: Pt, hubIdx: number, n: number, k: number, nNodes: number): Pt {
  const base = hubAngle(hubIdx, n);
  const spread = Math.PI / 2.2;
  const a = base - spread / 2 + (nNodes > 1 ? (spread * k) / (nNodes - 1) : 0);
  return { x: hub.x + SPOKE_R * Math.cos(a), y: hub.y + SPOKE_R * Math.sin(a) };
}

function offsetLine(a: Pt, b: Pt, off: number): [Pt, Pt] {
  const dx = b.x - a.x;
  const dy = b.y - a.y;
  const len = Math.hypot(dx, dy) || 1;
  const nx = (-dy / len) * off;
  const ny = (dx / len) * off;
  return [
    { x: a.x + nx, y: a.y + ny },
    { x: b.x + nx, y: b.y + ny },
  ];
}

const fmt = (v: number) => v.toFixed(1);

// ---------- rendering ----------

function bundleEdge(b: BundleDoc, pos: Map<string, Pt>, ring: boolean): string {
  const pa = pos.get(b.a);
  const pb = pos.get(b.b);
  if (!pa || !pb) return "";
  const cls = ring ? `edge ring-edge ${b.kind}` : `edge spoke-edge ${b.kind}`;
  const attrs = `class="${cls}" data-kind="bundle" data-id="${esc(b.id)}"`;
  if (b.a === b.b) {
    // one-hub ring: the bundle leaves and re-enters the same hub
    const r = 26 - KIND_OFFSET[b.kind]!;
    return `<circle ${attrs.replace(cls, cls + " self-loop")} cx="${fmt(pa.x)}" cy="${fmt(pa.y - 40)}" r="${r}" fill="none"/>`;
  }
  const [p1, p2] = offsetLine(pa, pb, KIND_OFFSET[b.kind] ?? 0);
  return `<line ${attrs} x1="${fmt(p1.x)}" y1="${fmt(p1.y)}" x2="${fmt(p2.x)}" y2="${fmt(p2.y)}"/>`;
}

/**
 * Render a validated topology document as an SVG string. Returns
 * {ok: false, findings} on an invalid document instead of drawing
 * anything.
 */
export function renderTopology(
  doc: Json,
): { ok: true; svg: string } | { ok: false; findings: Finding[] } {
  const findings = validateTopologyDoc(doc);
  if (findings.length > 0) return { ok: false, findings };
  const t = doc as unknown as TopologyDoc;

  const pos = new Map<string, Pt>();
  pos.set(t.control_center, { x: CX, y: CY });
  t.hubs.forEach((hub, i) => {
    const p = hubPos(i, t.hubs.length);
    pos.set(hub.id, p);
    hub.nodes.forEach((nid, k) => {
      pos.set(nid, nodePos(p, i, t.hubs.length, k, hub.nodes.length));
    });
  });

  const parts: string[] = [];
  const hubIds = new Set(t.hubs.map((h) => h.id));
  const edgeOrder = (b: BundleDoc) => (b.kind === "lan" ? 0 : 1);
  for (const b of [...t.bundles].sort((x, y) => edgeOrder(x) - edgeOrder(y))) {
    const ring = hubIds.has(b.a) && hubIds.has(b.b);
    parts.push(bundleEdge(b, pos, ring));
  }

  const cc = pos.get(t.control_center)!;
  parts.push(
    `<rect class="glyph cc" data-kind="cc" data-id="${esc(t.control_center)}" ` +
      `x="${fmt(cc.x - 18)}" y="${fmt(cc.y - 12)}" width="36" height="24" rx="4"/>`,
    `<text class="label cc-label" x="${fmt(cc.x)}" y="${fmt(cc.y + 4)}">${esc(t.control_center)}</text>`,
  );

  for (const hub of t.hubs) {
    const p = pos.get(hub.id)!;
    parts.push(
      `<circle class="glyph hub" data-kind="hub" data-id="${esc(hub.id)}" ` +
        `cx="${fmt(p.x)}" cy="${fmt(p.y)}" r="16"/>`,
      `<text class="label hub-label" x="${fmt(p.x)}" y="${fmt(p.y + 4)}">${esc(hub.id)}</text>`,
    );
    for (const nid of hub.nodes) {
      const np = pos.get(nid)!;
      const short = nid.includes("-") ? nid.split("-").at(-1) : nid;
      parts.push(
        `<circle class="glyph node" data-kind="node" data-id="${esc(nid)}" ` +
          `cx="${fmt(np.x)}" cy="${fmt(np.y)}" r="8"><title>${esc(nid)}</title></circle>`,
        `<text class="label node-label" x="${fmt(np.x)}" y="${fmt(np.y - 11)}">${esc(short)}</text>`,
      );
    }
  }

  const svg =
    `<svg class="topology" viewBox="0 0 ${W} ${H}" xmlns="http://www.w3.org/2000/svg" role="img">` +
    parts.join("") +
    `</svg>`;
  return { ok: true, svg };
}

/** SVG or error panel, ready to drop into the page. */
export function renderTopologyPanel(doc: Json): string {
  const res = renderTopology(doc);
  if (res.ok) return res.svg;
  const items = res.findings
    .map((f) => `<li><code>${esc(f.code)}</code> ${esc(f.message)}</li>`)
    .join("");
  return `<div class="error-panel"><h3>Topology document rejected</h3><ul>${items}</ul></div>`;
}

// ---------- detail panes ----------

/** Crossbar state as a port map: jumpers on the output side, then rows. */
export function renderPortMap(sw: SwitchDoc): string {
  const jumpers = sw.jumpers.length
    ? sw.jumpers.map((j) => `<span class="chip">${j[0]} &#8644; ${j[1]}</span>`).join("")
    : `<span class="dim">none</span>`;
  const rows = sw.mapping.length
    ? sw.mapping
        .map((m) => `<tr><td class="num">${m[0]}</td><td>&#8594;</td><td class="num">${m[1]}</td></tr>`)
        .join("")
    : `<tr><td colspan="3" class="dim">no rows mapped</td></tr>`;
  return (
    `<div class="portmap" data-switch="${esc(sw.id)}">` +
    `<h4>${esc(sw.id)} <span class="dim">${sw.rows}&#215;${sw.cols}</span></h4>` +
    `<div class="jumpers">jumpers: ${jumpers}</div>` +
    `<table class="mapping"><thead><tr><th>in</th><th></th><th>out</th></tr></thead>` +
    `<tbody>${rows}</tbody></table></div>`
  );
}

export function renderHubDetail(hub: HubDoc): string {
  return (
    `<div class="detail"><h3>Hub ${esc(hub.id)}</h3>` +
    `<div class="dim">nodes: ${hub.nodes.map(esc).join(", ")}</div>` +
    hub.switches.map(renderPortMap).join("") +
    `</div>`
  );
}

export function renderBundleDetail(b: BundleDoc): string {
  const rows: [string, string][] = [
    ["kind", b.kind],
    ["endpoints", `${b.a} &#8596; ${b.b}`],
    ["qubit lanes", String(b.qubit_lanes)],
    ["timing fibers", String(b.timing_fibers)],
    ["LAN fibers", String(b.lan_fibers)],
    ["length", `${b.length_km} km`],
    ["per-fiber loss", `${b.per_fiber_loss_db} dB`],
  ];
  return (
    `<div class="detail"><h3>Bundle ${esc(b.id)}</h3><table class="kv">` +
    rows.map(([k, v]) => `<tr><td class="dim">${esc(k)}</td><td>${v}</td></tr>`).join("") +
    `</table></div>`
  );
}
