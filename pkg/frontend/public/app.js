// src/api.ts
var ApiError = class extends Error {
  constructor(status, code, message, findings = []) {
    super(message);
    this.status = status;
    this.code = code;
    this.findings = findings;
    this.name = "ApiError";
  }
};
var ConsoleApi = class {
  constructor(baseUrl, token, fetchImpl = (...a) => fetch(...a)) {
    this.baseUrl = baseUrl;
    this.token = token;
    this.fetchImpl = fetchImpl;
  }
  get subscriberId() {
    return this.token;
  }
  async request(path, init = {}, auth = true) {
    const headers = new Headers(init.headers);
    if (auth) headers.set("Authorization", `Bearer ${this.token}`);
    if (init.body) headers.set("Content-Type", "application/json");
    const res = await this.fetchImpl(this.baseUrl + path, { ...init, headers });
    if (!res.ok) throw await toApiError(res);
    return await res.json();
  }
  health() {
    return this.request("/health", {}, false);
  }
  topology() {
    return this.request("/topology", {}, false);
  }
  submitRequest(body) {
    return this.request("/requests", {
      method: "POST",
      body: JSON.stringify(body)
    });
  }
  schedule(requestId) {
    return this.request(`/requests/${encodeURIComponent(requestId)}/schedule`, {
      method: "POST"
    });
  }
  instantiate(requestId) {
    return this.request("/instantiations", {
      method: "POST",
      body: JSON.stringify({ request_id: requestId })
    });
  }
  monitor(handleId) {
    return this.request(`/instantiations/${encodeURIComponent(handleId)}`);
  }
  /** Raw Response; the body is an NDJSON stream consumed by stream.ts. */
  async fetchCounts(handleId, opts = {}) {
    const params = new URLSearchParams({
      follow: String(opts.follow ?? true),
      after_ps: String(opts.afterPs ?? -1)
    });
    const res = await this.fetchImpl(
      `${this.baseUrl}/instantiations/${encodeURIComponent(handleId)}/counts?${params}`,
      {
        headers: { Authorization: `Bearer ${this.token}` },
        signal: opts.signal ?? null
      }
    );
    if (!res.ok) throw await toApiError(res);
    return res;
  }
  archiveUrl(handleId) {
    return `${this.baseUrl}/archives/${encodeURIComponent(handleId)}`;
  }
  /** Download the run archive; returns the zip plus its manifest digest. */
  async downloadArchive(handleId) {
    const res = await this.fetchImpl(this.archiveUrl(handleId), {
      headers: { Authorization: `Bearer ${this.token}` }
    });
    if (!res.ok) throw await toApiError(res);
    return {
      blob: await res.blob(),
      manifestSha256: res.headers.get("x-manifest-sha256") ?? ""
    };
  }
  ledger() {
    return this.request(`/ledger/${encodeURIComponent(this.subscriberId)}`);
  }
};
async function toApiError(res) {
  let body = {};
  try {
    body = await res.json();
  } catch {
  }
  return new ApiError(
    res.status,
    body.code ?? `HTTP_${res.status}`,
    body.message ?? res.statusText,
    body.findings ?? []
  );
}

// src/design.ts
var DESIGN_FORMAT = "design.v1";
var MODES = ["entangled", "heralded"];
var DEFAULT_WINDOW_PS = 1e3;
var LINK_KEYS = /* @__PURE__ */ new Set(["source_hub", "mode", "pair_rate_hz", "arms"]);
var ARM_KEYS = /* @__PURE__ */ new Set(["endpoint", "basis_deg", "apc"]);
var ROOT_KEYS = /* @__PURE__ */ new Set(["format", "links", "pairs", "window_ps"]);
function isObject(v) {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}
function restOf(doc, known) {
  const rest = {};
  for (const [k, v] of Object.entries(doc)) {
    if (!known.has(k) && v !== void 0) rest[k] = v;
  }
  return rest;
}
function asIntPair(v) {
  if (!Array.isArray(v) || v.length !== 2) return null;
  const [a, b] = v;
  if (typeof a !== "number" || typeof b !== "number") return null;
  return [a, b];
}
function parseArm(entry) {
  if (!isObject(entry)) {
    return { endpoint: "", rest: {}, raw: entry };
  }
  const arm = {
    endpoint: typeof entry.endpoint === "string" ? entry.endpoint : "",
    rest: restOf(entry, ARM_KEYS)
  };
  if (typeof entry.endpoint !== "string" && entry.endpoint !== void 0) {
    arm.rest.endpoint = entry.endpoint;
  }
  if (entry.basis_deg !== void 0) {
    if (typeof entry.basis_deg === "number") arm.basisDeg = entry.basis_deg;
    else arm.rest.basis_deg = entry.basis_deg;
  }
  if (entry.apc !== void 0) {
    if (typeof entry.apc === "boolean") arm.apc = entry.apc;
    else arm.rest.apc = entry.apc;
  }
  return arm;
}
function parseLink(entry) {
  if (!isObject(entry)) {
    return { sourceHub: "", mode: "entangled", arms: [], rest: {}, raw: entry };
  }
  const link = {
    sourceHub: typeof entry.source_hub === "string" ? entry.source_hub : "",
    mode: entry.mode === "heralded" ? "heralded" : "entangled",
    arms: Array.isArray(entry.arms) ? entry.arms.map(parseArm) : [],
    rest: restOf(entry, LINK_KEYS)
  };
  if (typeof entry.source_hub !== "string" && entry.source_hub !== void 0) {
    link.rest.source_hub = entry.source_hub;
  }
  if (entry.mode !== "entangled" && entry.mode !== "heralded" && entry.mode !== void 0) {
    link.rest.mode = entry.mode;
  }
  if (!Array.isArray(entry.arms) && entry.arms !== void 0) {
    link.rest.arms = entry.arms;
  }
  if (entry.pair_rate_hz !== void 0) {
    if (typeof entry.pair_rate_hz === "number") link.pairRateHz = entry.pair_rate_hz;
    else link.rest.pair_rate_hz = entry.pair_rate_hz;
  }
  return link;
}
function canvasFromDesign(doc) {
  if (!isObject(doc)) {
    return { links: [], rest: {}, selection: null, findings: [] };
  }
  const canvas2 = {
    links: Array.isArray(doc.links) ? doc.links.map(parseLink) : [],
    rest: restOf(doc, ROOT_KEYS),
    selection: null,
    findings: []
  };
  if (doc.format !== DESIGN_FORMAT && doc.format !== void 0) {
    canvas2.rest.format = doc.format;
  }
  if (!Array.isArray(doc.links) && doc.links !== void 0) {
    canvas2.rest.links = doc.links;
  }
  if (doc.pairs !== void 0) {
    const pairs = Array.isArray(doc.pairs) ? doc.pairs.map(asIntPair) : null;
    if (pairs && pairs.every((p) => p !== null)) {
      canvas2.pairs = pairs;
    } else {
      canvas2.rest.pairs = doc.pairs;
    }
  }
  if (doc.window_ps !== void 0) {
    if (typeof doc.window_ps === "number") canvas2.windowPs = doc.window_ps;
    else canvas2.rest.window_ps = doc.window_ps;
  }
  return canvas2;
}
function armDoc(arm) {
  if (arm.raw !== void 0) return arm.raw;
  const out = { endpoint: arm.endpoint };
  if (arm.basisDeg !== void 0) out.basis_deg = arm.basisDeg;
  if (arm.apc !== void 0) out.apc = arm.apc;
  for (const [k, v] of Object.entries(arm.rest)) out[k] = v;
  return out;
}
function linkDoc(link) {
  if (link.raw !== void 0) return link.raw;
  const out = {};
  if (!("source_hub" in link.rest)) out.source_hub = link.sourceHub;
  if (!("mode" in link.rest)) out.mode = link.mode;
  if (link.pairRateHz !== void 0) out.pair_rate_hz = link.pairRateHz;
  if (!("arms" in link.rest)) out.arms = link.arms.map(armDoc);
  for (const [k, v] of Object.entries(link.rest)) out[k] = v;
  return out;
}
function designFromCanvas(canvas2) {
  const out = {};
  if (!("format" in canvas2.rest)) out.format = DESIGN_FORMAT;
  if (!("links" in canvas2.rest)) out.links = canvas2.links.map(linkDoc);
  if (canvas2.pairs !== void 0) out.pairs = canvas2.pairs.map((p) => [p[0], p[1]]);
  if (canvas2.windowPs !== void 0) out.window_ps = canvas2.windowPs;
  for (const [k, v] of Object.entries(canvas2.rest)) out[k] = v;
  return out;
}
function endpointOk(ep, topo2) {
  if (typeof ep !== "string" || !ep) return false;
  if (!topo2) return true;
  for (const hub of topo2.hubs) {
    if (hub.nodes.includes(ep)) return true;
    if (ep === `${hub.id}.measure`) return true;
  }
  return false;
}
function validateDesign(doc, topo2 = null) {
  const out = [];
  const bad = (message, element = "") => out.push({ code: "E_SCHEMA", message, element });
  const unknown = (message, element = "") => out.push({ code: "E_UNKNOWN_ELEMENT", message, element });
  if (!isObject(doc)) {
    bad("design must be an object");
    return out;
  }
  if (doc.format !== DESIGN_FORMAT) {
    bad(`design format must be '${DESIGN_FORMAT}'`);
  }
  const links = doc.links ?? [];
  if (!Array.isArray(links)) {
    bad("links must be a list");
    return out;
  }
  links.forEach((link, li) => {
    const where = `links[${li}]`;
    if (!isObject(link)) {
      bad(`${where} must be an object`, where);
      return;
    }
    const hub = link.source_hub;
    const hubKnown = topo2 ? topo2.hubs.some((h) => h.id === hub) : typeof hub === "string" && !!hub;
    if (!hubKnown) {
      unknown(`${where}: unknown hub ${JSON.stringify(hub ?? null)}`, where);
    }
    if (link.mode !== "entangled" && link.mode !== "heralded") {
      bad(`${where}: mode must be one of ${JSON.stringify(MODES)}`, where);
    }
    const rate = link.pair_rate_hz ?? 1e6;
    if (typeof rate !== "number" || rate <= 0) {
      bad(`${where}: pair_rate_hz must be positive`, where);
    }
    const arms = link.arms;
    if (!Array.isArray(arms) || arms.length !== 2) {
      bad(`${where}: a source link has exactly two arms`, where);
      return;
    }
    arms.forEach((arm, oi) => {
      const at = `${where}.arms[${oi}]`;
      const ep = isObject(arm) ? arm.endpoint : void 0;
      if (!endpointOk(ep, topo2)) {
        unknown(`${at}: unknown endpoint ${JSON.stringify(ep ?? null)}`, at);
      }
      const basis = isObject(arm) ? arm.basis_deg ?? 0 : 0;
      if (typeof basis !== "number") {
        bad(`${at}: basis_deg must be a number`, at);
      }
    });
  });
  const nTaps = 2 * links.length;
  const pairs = doc.pairs ?? [];
  if (!Array.isArray(pairs)) {
    bad("pairs must be a list");
  } else {
    pairs.forEach((pair, pi) => {
      const p = asIntPair(pair);
      if (!p || !p.every((x) => Number.isInteger(x) && x >= 0 && x < nTaps)) {
        bad(`pairs[${pi}] must name two tap indices below ${nTaps}`, `pairs[${pi}]`);
      } else if (p[0] === p[1]) {
        bad(`pairs[${pi}] pairs a tap with itself`, `pairs[${pi}]`);
      }
    });
  }
  const window2 = doc.window_ps ?? DEFAULT_WINDOW_PS;
  if (typeof window2 !== "number" || !Number.isInteger(window2) || window2 <= 0) {
    bad("window_ps must be a positive integer");
  }
  return out;
}
function refreshFindings(canvas2, topo2 = null) {
  canvas2.findings = validateDesign(designFromCanvas(canvas2), topo2);
  return canvas2.findings;
}
function draftValid(canvas2) {
  return canvas2.findings.length === 0;
}
function newCanvas() {
  return { links: [], rest: {}, selection: null, findings: [] };
}
function addLink(canvas2, sourceHub) {
  const link = {
    sourceHub,
    mode: "entangled",
    pairRateHz: 1e6,
    arms: [
      { endpoint: "", basisDeg: 0, apc: false, rest: {} },
      { endpoint: "", basisDeg: 0, apc: false, rest: {} }
    ],
    rest: {}
  };
  canvas2.links.push(link);
  canvas2.selection = { kind: "link", index: canvas2.links.length - 1 };
  return link;
}
function removeLink(canvas2, index) {
  canvas2.links.splice(index, 1);
  if (canvas2.pairs !== void 0) {
    const lo = 2 * index;
    canvas2.pairs = canvas2.pairs.filter((p) => p[0] < lo || p[0] >= lo + 2).filter((p) => p[1] < lo || p[1] >= lo + 2).map((p) => [p[0] > lo ? p[0] - 2 : p[0], p[1] > lo ? p[1] - 2 : p[1]]);
  }
  canvas2.selection = null;
}
function togglePair(canvas2, a, b) {
  const pairs = canvas2.pairs ?? [];
  const at = pairs.findIndex((p) => p[0] === a && p[1] === b || p[0] === b && p[1] === a);
  if (at >= 0) pairs.splice(at, 1);
  else pairs.push([a, b]);
  canvas2.pairs = pairs;
}

// src/topology_view.ts
var W = 900;
var H = 640;
var CX = W / 2;
var CY = H / 2;
var RING_R = 170;
var SPOKE_R = 118;
var KIND_OFFSET = { primary: -5, secondary: 0, lan: 5 };
function esc(s) {
  return String(s).replaceAll("&", "&amp;").replaceAll("<", "&lt;").replaceAll(">", "&gt;").replaceAll('"', "&quot;");
}
function isObject2(v) {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}
function validateTopologyDoc(doc) {
  const out = [];
  const bad = (message, element = "") => out.push({ code: "E_SCHEMA", message, element });
  if (!isObject2(doc)) {
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
  const elements = /* @__PURE__ */ new Set([String(doc.control_center)]);
  doc.hubs.forEach((hub, i) => {
    const where = `hubs[${i}]`;
    if (!isObject2(hub) || typeof hub.id !== "string") {
      bad(`${where} must be an object with an id`, where);
      return;
    }
    elements.add(hub.id);
    if (!Array.isArray(hub.nodes) || hub.nodes.some((n) => typeof n !== "string")) {
      bad(`${where}.nodes must be a list of node ids`, hub.id);
    } else {
      for (const n of hub.nodes) elements.add(String(n));
    }
    if (!Array.isArray(hub.switches) || hub.switches.some((s) => !isObject2(s))) {
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
    if (!isObject2(b) || typeof b.id !== "string") {
      bad(`${where} must be an object with an id`, where);
      return;
    }
    for (const end of ["a", "b"]) {
      if (typeof b[end] !== "string" || !elements.has(b[end])) {
        bad(`${where}.${end} names an unknown element ${JSON.stringify(b[end] ?? null)}`, b.id);
      }
    }
    for (const k of ["qubit_lanes", "timing_fibers", "lan_fibers", "length_km", "per_fiber_loss_db"]) {
      if (typeof b[k] !== "number") bad(`${where}.${k} must be a number`, b.id);
    }
  });
  return out;
}
function hubAngle(i, n) {
  return -Math.PI / 2 + 2 * Math.PI * i / n;
}
function hubPos(i, n) {
  const a = hubAngle(i, n);
  return { x: CX + RING_R * Math.cos(a), y: CY + RING_R * Math.sin(a) };
}
function nodePos(hub, hubIdx, n, k, nNodes) {
  const base = hubAngle(hubIdx, n);
  const spread = Math.PI / 2.2;
  const a = base - spread / 2 + (nNodes > 1 ? spread * k / (nNodes - 1) : 0);
  return { x: hub.x + SPOKE_R * Math.cos(a), y: hub.y + SPOKE_R * Math.sin(a) };
}
function offsetLine(a, b, off) {
  const dx = b.x - a.x;
  const dy = b.y - a.y;
  const len = Math.hypot(dx, dy) || 1;
  const nx = -dy / len * off;
  const ny = dx / len * off;
  return [
    { x: a.x + nx, y: a.y + ny },
    { x: b.x + nx, y: b.y + ny }
  ];
}
var fmt = (v) => v.toFixed(1);
function bundleEdge(b, pos, ring) {
  const pa = pos.get(b.a);
  const pb = pos.get(b.b);
  if (!pa || !pb) return "";
  const cls = ring ? `edge ring-edge ${b.kind}` : `edge spoke-edge ${b.kind}`;
  const attrs = `class="${cls}" data-kind="bundle" data-id="${esc(b.id)}"`;
  if (b.a === b.b) {
    const r = 26 - KIND_OFFSET[b.kind];
    return `<circle ${attrs.replace(cls, cls + " self-loop")} cx="${fmt(pa.x)}" cy="${fmt(pa.y - 40)}" r="${r}" fill="none"/>`;
  }
  const [p1, p2] = offsetLine(pa, pb, KIND_OFFSET[b.kind] ?? 0);
  return `<line ${attrs} x1="${fmt(p1.x)}" y1="${fmt(p1.y)}" x2="${fmt(p2.x)}" y2="${fmt(p2.y)}"/>`;
}
function renderTopology(doc) {
  const findings = validateTopologyDoc(doc);
  if (findings.length > 0) return { ok: false, findings };
  const t = doc;
  const pos = /* @__PURE__ */ new Map();
  pos.set(t.control_center, { x: CX, y: CY });
  t.hubs.forEach((hub, i) => {
    const p = hubPos(i, t.hubs.length);
    pos.set(hub.id, p);
    hub.nodes.forEach((nid, k) => {
      pos.set(nid, nodePos(p, i, t.hubs.length, k, hub.nodes.length));
    });
  });
  const parts = [];
  const hubIds = new Set(t.hubs.map((h) => h.id));
  const edgeOrder = (b) => b.kind === "lan" ? 0 : 1;
  for (const b of [...t.bundles].sort((x, y) => edgeOrder(x) - edgeOrder(y))) {
    const ring = hubIds.has(b.a) && hubIds.has(b.b);
    parts.push(bundleEdge(b, pos, ring));
  }
  const cc = pos.get(t.control_center);
  parts.push(
    `<rect class="glyph cc" data-kind="cc" data-id="${esc(t.control_center)}" x="${fmt(cc.x - 18)}" y="${fmt(cc.y - 12)}" width="36" height="24" rx="4"/>`,
    `<text class="label cc-label" x="${fmt(cc.x)}" y="${fmt(cc.y + 4)}">${esc(t.control_center)}</text>`
  );
  for (const hub of t.hubs) {
    const p = pos.get(hub.id);
    parts.push(
      `<circle class="glyph hub" data-kind="hub" data-id="${esc(hub.id)}" cx="${fmt(p.x)}" cy="${fmt(p.y)}" r="16"/>`,
      `<text class="label hub-label" x="${fmt(p.x)}" y="${fmt(p.y + 4)}">${esc(hub.id)}</text>`
    );
    for (const nid of hub.nodes) {
      const np = pos.get(nid);
      const short = nid.includes("-") ? nid.split("-").at(-1) : nid;
      parts.push(
        `<circle class="glyph node" data-kind="node" data-id="${esc(nid)}" cx="${fmt(np.x)}" cy="${fmt(np.y)}" r="8"><title>${esc(nid)}</title></circle>`,
        `<text class="label node-label" x="${fmt(np.x)}" y="${fmt(np.y - 11)}">${esc(short)}</text>`
      );
    }
  }
  const svg = `<svg class="topology" viewBox="0 0 ${W} ${H}" xmlns="http://www.w3.org/2000/svg" role="img">` + parts.join("") + `</svg>`;
  return { ok: true, svg };
}
function renderTopologyPanel(doc) {
  const res = renderTopology(doc);
  if (res.ok) return res.svg;
  const items = res.findings.map((f) => `<li><code>${esc(f.code)}</code> ${esc(f.message)}</li>`).join("");
  return `<div class="error-panel"><h3>Topology document rejected</h3><ul>${items}</ul></div>`;
}
function renderPortMap(sw) {
  const jumpers = sw.jumpers.length ? sw.jumpers.map((j) => `<span class="chip">${j[0]} &#8644; ${j[1]}</span>`).join("") : `<span class="dim">none</span>`;
  const rows = sw.mapping.length ? sw.mapping.map((m) => `<tr><td class="num">${m[0]}</td><td>&#8594;</td><td class="num">${m[1]}</td></tr>`).join("") : `<tr><td colspan="3" class="dim">no rows mapped</td></tr>`;
  return `<div class="portmap" data-switch="${esc(sw.id)}"><h4>${esc(sw.id)} <span class="dim">${sw.rows}&#215;${sw.cols}</span></h4><div class="jumpers">jumpers: ${jumpers}</div><table class="mapping"><thead><tr><th>in</th><th></th><th>out</th></tr></thead><tbody>${rows}</tbody></table></div>`;
}
function renderHubDetail(hub) {
  return `<div class="detail"><h3>Hub ${esc(hub.id)}</h3><div class="dim">nodes: ${hub.nodes.map(esc).join(", ")}</div>` + hub.switches.map(renderPortMap).join("") + `</div>`;
}
function renderBundleDetail(b) {
  const rows = [
    ["kind", b.kind],
    ["endpoints", `${b.a} &#8596; ${b.b}`],
    ["qubit lanes", String(b.qubit_lanes)],
    ["timing fibers", String(b.timing_fibers)],
    ["LAN fibers", String(b.lan_fibers)],
    ["length", `${b.length_km} km`],
    ["per-fiber loss", `${b.per_fiber_loss_db} dB`]
  ];
  return `<div class="detail"><h3>Bundle ${esc(b.id)}</h3><table class="kv">` + rows.map(([k, v]) => `<tr><td class="dim">${esc(k)}</td><td>${v}</td></tr>`).join("") + `</table></div>`;
}

// src/dashboard.ts
var DEFAULT_WINDOW_RECORDS = 600;
var LiveDashboardModel = class {
  handleId;
  records = [];
  /** interval_start_ps of each record that is followed by a hole */
  gapsAfter = /* @__PURE__ */ new Set();
  staleDropped = 0;
  monitor = null;
  apcSeries = /* @__PURE__ */ new Map();
  qkdReport = null;
  locked = null;
  maxRecords;
  constructor(handleId, maxRecords = DEFAULT_WINDOW_RECORDS) {
    this.handleId = handleId;
    this.maxRecords = maxRecords;
  }
  /** Accept one streamed record; stale or duplicate intervals are dropped. */
  ingestRecord(rec) {
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
  setMonitor(m) {
    this.monitor = m;
    for (const sig of m.apc_signals) {
      const key = `${sig.hub}.apc${sig.channel}`;
      const series = this.apcSeries.get(key) ?? [];
      const last = series.at(-1);
      if (!last || sig.t_s > last.t_s) series.push(sig);
      this.apcSeries.set(key, series);
    }
  }
  setQkdReport(report) {
    this.qkdReport = report;
  }
  setLocked(err) {
    this.locked = err;
  }
  /** Completed or failed runs freeze: final values stay, stream is done. */
  get frozen() {
    return this.monitor?.state === "Completed" || this.monitor?.state === "Failed";
  }
  entries() {
    const out = [];
    for (const record of this.records) {
      out.push({ kind: "record", record });
      if (this.gapsAfter.has(record.interval_start_ps)) out.push({ kind: "gap" });
    }
    return out;
  }
};
var num = (v) => `<span class="num">${esc(String(v))}</span>`;
function stateBadge(state) {
  return `<span class="badge badge-${esc(state.toLowerCase())}">${esc(state)}</span>`;
}
function channelColumns(records) {
  const singles = /* @__PURE__ */ new Set();
  const pairs = /* @__PURE__ */ new Set();
  for (const r of records) {
    for (const ch of Object.keys(r.singles)) singles.add(ch);
    for (const p of Object.keys(r.coincidences)) pairs.add(p);
  }
  return { singles: [...singles].sort(), pairs: [...pairs].sort() };
}
function intervalTable(model2) {
  if (model2.records.length === 0) {
    return `<div class="dim">no count records yet</div>`;
  }
  const { singles, pairs } = channelColumns(model2.records);
  const head = `<tr><th>interval start (ps)</th><th>length (ps)</th>` + singles.map((c) => `<th>ch ${esc(c)}</th>`).join("") + pairs.map((p) => `<th>cc ${esc(p)}</th>`).join("") + `</tr>`;
  const width = 2 + singles.length + pairs.length;
  const body = model2.entries().map((entry) => {
    if (entry.kind === "gap") {
      return `<tr class="gap-row"><td colspan="${width}">stream gap &#8212; intervals missing, not interpolated</td></tr>`;
    }
    const r = entry.record;
    return `<tr><td>${num(r.interval_start_ps)}</td><td>${num(r.interval_len_ps)}</td>` + singles.map((c) => `<td>${c in r.singles ? num(r.singles[c]) : ""}</td>`).join("") + pairs.map((p) => `<td>${p in r.coincidences ? num(r.coincidences[p]) : ""}</td>`).join("") + `</tr>`;
  }).join("");
  return `<table class="intervals"><thead>${head}</thead><tbody>${body}</tbody></table>`;
}
function countChart(model2) {
  const { pairs } = channelColumns(model2.records);
  const key = pairs[0];
  if (!key || model2.records.length === 0) return "";
  const values = model2.records.map((r) => r.coincidences[key] ?? 0);
  const peak = Math.max(...values, 1);
  const w = 640;
  const h = 120;
  const bw = Math.max(1, Math.floor(w / Math.max(values.length, 1)) - 1);
  const bars = model2.records.map((r, i) => {
    const v = r.coincidences[key] ?? 0;
    const bh = Math.max(1, Math.round(v / peak * (h - 8)));
    const x = i * (bw + 1);
    const gap = model2.gapsAfter.has(r.interval_start_ps) ? ` bar-before-gap` : "";
    return `<rect class="bar${gap}" x="${x}" y="${h - bh}" width="${bw}" height="${bh}"><title>cc ${esc(key)}</title></rect>`;
  }).join("");
  return `<svg class="count-chart" viewBox="0 0 ${w} ${h}" preserveAspectRatio="none" role="img">${bars}</svg><div class="dim chart-caption">coincidences cc ${esc(key)} per interval</div>`;
}
function apcPanel(model2) {
  if (model2.apcSeries.size === 0) {
    return `<div class="dim">no polarization channels on this run</div>`;
  }
  const blocks = [];
  for (const [key, series] of [...model2.apcSeries.entries()].sort()) {
    const latest = series.at(-1);
    const peak = Math.max(...series.map((s) => s.error), 1e-9);
    const pts = series.map((s, i) => `${i / Math.max(series.length - 1, 1) * 120},${30 - s.error / peak * 28}`).join(" ");
    blocks.push(
      `<div class="apc-channel"><h4>${esc(key)}</h4><svg class="apc-spark" viewBox="0 0 120 32" preserveAspectRatio="none"><polyline points="${pts}"/></svg><div>error ${num(latest.error)} &#183; evals ${num(latest.evaluations)} &#183; converged ${num(latest.converged)}</div></div>`
    );
  }
  return blocks.join("");
}
function qkdPanel(model2) {
  const r = model2.qkdReport;
  if (!r) return `<div class="dim">no key report received</div>`;
  const rows = [
    ["q (QBER)", num(r.qber)],
    ["coincidences", num(r.n_coincidences)],
    ["sifted bits", num(r.sifted_bits)],
    ["reconciled bits", num(r.reconciled_bits)],
    ["final bits", num(r.final_bits)],
    ["final fraction", num(r.final_fraction)],
    ["keys match", num(r.keys_match)],
    ["offset (ps)", num(r.offset_ps)]
  ];
  return `<table class="kv qkd">` + rows.map(([k, v]) => `<tr><td class="dim">${esc(k)}</td><td>${v}</td></tr>`).join("") + `</table>`;
}
function renderDashboard(model2) {
  if (model2.locked) {
    return `<div class="locked-panel"><h3>&#128274; dashboard locked</h3><div><code>${esc(model2.locked.code)}</code> ${esc(model2.locked.message)}</div></div>`;
  }
  const m = model2.monitor;
  const header = m ? `<div class="dash-header">${stateBadge(m.state)} <code>${esc(m.handle_id)}</code> <span class="dim">window</span> ${num(m.start_s)}&#8211;${num(m.end_s)} s <span class="dim">now</span> ${num(m.now_s)} s <span class="dim">records</span> ${num(m.records_visible)}` + (m.failure && typeof m.failure === "object" && "code" in m.failure ? `<div class="failure"><code>${esc(String(m.failure.code))}</code> ${esc(String(m.failure.message ?? ""))}</div>` : "") + `</div>` : `<div class="dash-header">${stateBadge("Pending")} <code>${esc(model2.handleId)}</code></div>`;
  const archive = model2.frozen ? `<div class="archive"><button class="archive-link" data-act="download-archive" data-handle="${esc(model2.handleId)}">download run archive</button><span class="archive-status"></span></div>` : "";
  const frozenNote = model2.frozen ? `<div class="dim frozen-note">run ${esc(m?.state ?? "")} &#8212; final values frozen</div>` : "";
  return `<div class="dashboard" data-handle="${esc(model2.handleId)}">` + header + frozenNote + `<section class="panel"><h3>Counts per interval</h3>${countChart(model2)}${intervalTable(model2)}</section><section class="panel"><h3>Polarization control</h3>${apcPanel(model2)}</section><section class="panel"><h3>Key distribution</h3>${qkdPanel(model2)}</section>` + archive + `</div>`;
}

// src/stream.ts
async function* ndjsonObjects(body) {
  const reader = body.getReader();
  const decoder = new TextDecoder();
  let buf = "";
  try {
    for (; ; ) {
      const { done, value } = await reader.read();
      if (done) break;
      buf += decoder.decode(value, { stream: true });
      let nl;
      while ((nl = buf.indexOf("\n")) >= 0) {
        const line = buf.slice(0, nl).trim();
        buf = buf.slice(nl + 1);
        if (line) yield JSON.parse(line);
      }
    }
    const tail = (buf + decoder.decode()).trim();
    if (tail) yield JSON.parse(tail);
  } finally {
    reader.releaseLock();
  }
}
var CountsSubscription = class {
  constructor(source, handleId, opts) {
    this.source = source;
    this.handleId = handleId;
    this.opts = opts;
    this.lastIntervalPs = opts.afterPs ?? -1;
  }
  lastIntervalPs;
  stopped = false;
  controller = null;
  async start() {
    let attempt = 0;
    while (!this.stopped) {
      this.controller = new AbortController();
      try {
        const res = await this.source.fetchCounts(this.handleId, {
          follow: this.opts.follow ?? true,
          afterPs: this.lastIntervalPs,
          signal: this.controller.signal
        });
        if (!res.body) throw new Error("counts response has no body");
        for await (const record of ndjsonObjects(res.body)) {
          if (this.stopped) return;
          if (record.interval_start_ps <= this.lastIntervalPs) continue;
          this.lastIntervalPs = record.interval_start_ps;
          this.opts.onRecord(record);
        }
        this.opts.onEnd?.();
        return;
      } catch (err) {
        if (this.stopped) return;
        attempt += 1;
        const goOn = this.opts.onRetry?.(err, attempt) ?? true;
        if (!goOn) return;
        await sleep(this.opts.retryDelayMs ?? 1e3);
      }
    }
  }
  stop() {
    this.stopped = true;
    this.controller?.abort();
  }
};
function sleep(ms) {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

// src/main.ts
var $ = (id) => document.getElementById(id);
var $baseUrl = $("base-url");
var $token = $("token");
var $connect = $("btn-connect");
var $health = $("health");
var $topology = $("topology");
var $detail = $("detail");
var $canvasRoot = $("canvas");
var $findings = $("findings");
var $flow = $("flow");
var $dashboard = $("dashboard");
var $ledger = $("ledger");
var api = null;
var topo = null;
var canvas = newCanvas();
var model = null;
var subscription = null;
var monitorTimer = null;
var lastWindow = null;
var lastRequestId = null;
async function loadTopology() {
  if (!api) return;
  try {
    topo = await api.topology();
    $topology.innerHTML = renderTopologyPanel(topo);
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
  const glyph = ev.target.closest("[data-kind]");
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
function endpointOptions(selected) {
  if (!topo) return `<option value="${esc(selected)}">${esc(selected) || "(no topology)"}</option>`;
  const opts = [`<option value=""${selected === "" ? " selected" : ""}>(pick)</option>`];
  for (const hub of topo.hubs) {
    opts.push(
      `<option value="${esc(hub.id)}.measure"${selected === `${hub.id}.measure` ? " selected" : ""}>${esc(hub.id)}.measure</option>`
    );
    for (const n of hub.nodes) {
      opts.push(`<option value="${esc(n)}"${selected === n ? " selected" : ""}>${esc(n)}</option>`);
    }
  }
  return opts.join("");
}
function renderCanvas() {
  refreshFindings(canvas, topo);
  const links = canvas.links.map((link, li) => {
    const arms = link.arms.map(
      (arm, ai) => `
        <div class="arm">
          <span class="dim">arm ${ai === 0 ? "a" : "b"} &#8594; tap ${2 * li + ai}</span>
          <select data-act="arm-endpoint" data-link="${li}" data-arm="${ai}">${endpointOptions(arm.endpoint)}</select>
          <label>basis&#176; <input type="number" step="0.5" value="${arm.basisDeg ?? 0}" data-act="arm-basis" data-link="${li}" data-arm="${ai}"></label>
          <label><input type="checkbox" ${arm.apc ? "checked" : ""} data-act="arm-apc" data-link="${li}" data-arm="${ai}"> APC</label>
        </div>`
    ).join("");
    return `
      <div class="link-card${canvas.selection?.kind === "link" && canvas.selection.index === li ? " selected" : ""}">
        <div class="link-head">
          <strong>link ${li}</strong>
          <select data-act="link-hub" data-link="${li}">${topo ? topo.hubs.map((h) => `<option value="${esc(h.id)}"${h.id === link.sourceHub ? " selected" : ""}>${esc(h.id)}</option>`).join("") : `<option>${esc(link.sourceHub)}</option>`}</select>
          <select data-act="link-mode" data-link="${li}">
            <option value="entangled"${link.mode === "entangled" ? " selected" : ""}>entangled</option>
            <option value="heralded"${link.mode === "heralded" ? " selected" : ""}>heralded</option>
          </select>
          <label>pairs/s <input type="number" min="1" value="${link.pairRateHz ?? 1e6}" data-act="link-rate" data-link="${li}"></label>
          <label><input type="checkbox" ${pairActive(li) ? "checked" : ""} data-act="link-pair" data-link="${li}"> count coincidences</label>
          <button data-act="link-remove" data-link="${li}">remove</button>
        </div>
        ${arms}
      </div>`;
  }).join("");
  $canvasRoot.innerHTML = `
    ${links || `<div class="dim">empty design &#8212; add a source link</div>`}
    <div class="canvas-actions">
      <button data-act="add-link" ${topo ? "" : "disabled"}>add link</button>
      <label>window (ps) <input type="number" min="1" value="${canvas.windowPs ?? 1e3}" data-act="window-ps"></label>
    </div>
    <div class="submit-row">
      <input id="request-id" placeholder="request id" value="${esc(lastRequestId ?? "")}">
      <label>start (s) <input id="start-s" type="number" step="0.1" value="1"></label>
      <label>end (s) <input id="end-s" type="number" step="0.1" value="7"></label>
      <label>priority <input id="priority" type="number" value="0"></label>
      <button id="btn-submit" data-act="submit" ${draftValid(canvas) ? "" : "disabled"}>submit design</button>
    </div>`;
  $findings.innerHTML = canvas.findings.length ? `<div class="findings"><h4>draft findings</h4><ul>${canvas.findings.map((f) => `<li><code>${esc(f.code)}</code> ${esc(f.message)}</li>`).join("")}</ul></div>` : `<div class="ok-note">draft valid</div>`;
}
function pairActive(li) {
  return (canvas.pairs ?? []).some((p) => p[0] === 2 * li && p[1] === 2 * li + 1);
}
$canvasRoot.addEventListener("click", (ev) => {
  const el = ev.target.closest("[data-act]");
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
  const el = ev.target;
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
    const arm = link.arms[ai];
    if (act === "arm-endpoint") arm.endpoint = el.value;
    else if (act === "arm-basis") arm.basisDeg = Number(el.value);
    else if (act === "arm-apc") arm.apc = el.checked;
  }
  renderCanvas();
});
function findingsList(findings) {
  return `<ul>${findings.map((f) => `<li><code>${esc(f.code)}</code> ${esc(f.message)}${f.element ? ` <span class="dim">(${esc(f.element)})</span>` : ""}</li>`).join("")}</ul>`;
}
function flowError(err) {
  if (err instanceof ApiError) {
    const blocking = err.code === "E_CONFLICT" && err.findings.length ? `<div>blocking windows:</div>${findingsList(err.findings)}` : err.findings.length ? findingsList(err.findings) : "";
    return `<div class="failure"><code>${esc(err.code)}</code> ${esc(err.message)}${blocking}</div>`;
  }
  return `<div class="retry-banner">service unreachable &#8212; draft preserved. <button data-act="retry-submit">retry</button><div class="dim">${esc(String(err))}</div></div>`;
}
async function submitFlow() {
  if (!api) {
    $flow.innerHTML = `<div class="failure">connect to a service first</div>`;
    return;
  }
  refreshFindings(canvas, topo);
  if (!draftValid(canvas)) {
    renderCanvas();
    return;
  }
  const requestId = $("request-id").value.trim() || `req-${Date.now()}`;
  lastRequestId = requestId;
  const body = {
    request_id: requestId,
    design: designFromCanvas(canvas),
    start_s: Number($("start-s").value),
    end_s: Number($("end-s").value),
    priority: Number($("priority").value)
  };
  $flow.innerHTML = `<div class="dim">submitting ${esc(requestId)}&#8230;</div>`;
  try {
    const res = await api.submitRequest(body);
    $flow.innerHTML = `<div class="ok-note">accepted <code>${esc(res.request_id)}</code></div>` + (res.findings.length ? findingsList(res.findings) : "") + `<button data-act="schedule" data-request="${esc(res.request_id)}">schedule</button>`;
  } catch (err) {
    $flow.innerHTML = flowError(err);
  }
}
$flow.addEventListener("click", async (ev) => {
  const el = ev.target.closest("[data-act]");
  if (!el || !api) return;
  const act = el.getAttribute("data-act");
  try {
    if (act === "retry-submit") {
      await submitFlow();
    } else if (act === "schedule") {
      const requestId = el.getAttribute("data-request");
      lastWindow = await api.schedule(requestId);
      $flow.innerHTML = `<div class="ok-note">scheduled <code>${esc(lastWindow.window_id)}</code> [${lastWindow.start_s}&#8211;${lastWindow.end_s} s, priority ${lastWindow.priority}]</div><div class="dim">resources: ${lastWindow.resources.map(esc).join(", ")}</div><button data-act="instantiate" data-request="${esc(requestId)}">instantiate when open</button>`;
    } else if (act === "instantiate") {
      const requestId = el.getAttribute("data-request");
      const monitor = await api.instantiate(requestId);
      $flow.innerHTML = `<div class="ok-note">running <code>${esc(monitor.handle_id)}</code></div>`;
      openDashboard(monitor.handle_id);
    }
  } catch (err) {
    $flow.innerHTML = flowError(err);
  }
});
function redrawDashboard() {
  if (!model || !api) return;
  $dashboard.innerHTML = renderDashboard(model);
}
$dashboard.addEventListener("click", async (ev) => {
  const el = ev.target.closest('[data-act="download-archive"]');
  if (!el || !api) return;
  const status = $dashboard.querySelector(".archive-status");
  el.disabled = true;
  try {
    const { blob, manifestSha256 } = await api.downloadArchive(el.getAttribute("data-handle"));
    if (typeof URL.createObjectURL === "function") {
      const href = URL.createObjectURL(blob);
      const a = document.createElement("a");
      a.href = href;
      a.download = `${el.getAttribute("data-handle")}.zip`;
      a.click();
      URL.revokeObjectURL(href);
    }
    if (status) {
      status.innerHTML = `${esc(String(blob.size))} bytes &#8212; manifest sha256 <code>${esc(manifestSha256 ?? "?")}</code>`;
    }
  } catch (err) {
    el.disabled = false;
    if (status) {
      const code = err instanceof ApiError ? err.code : "unreachable";
      status.innerHTML = `<span class="failure">download failed: ${esc(code)}</span>`;
    }
  }
});
function closeDashboard() {
  subscription?.stop();
  subscription = null;
  if (monitorTimer !== null) window.clearInterval(monitorTimer);
  monitorTimer = null;
}
function openDashboard(handleId) {
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
    onEnd: () => void pollMonitor()
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
  monitorTimer = window.setInterval(pollMonitor, 1e3);
  void pollMonitor();
}
$("btn-watch").addEventListener("click", () => {
  const handleId = $("watch-id").value.trim();
  if (handleId) openDashboard(handleId);
});
$("report-file").addEventListener("change", async (ev) => {
  const file = ev.target.files?.[0];
  if (!file || !model) return;
  try {
    model.setQkdReport(JSON.parse(await file.text()));
    redrawDashboard();
  } catch {
  }
});
$("btn-ledger").addEventListener("click", async () => {
  if (!api) return;
  try {
    const ledger = await api.ledger();
    const rows = ledger.entries.map(
      (e) => `<tr><td><code>${esc(e.instantiation_id)}</code></td><td class="num">${e.duration_s}</td><td class="num">${e.weight}</td><td class="num">${e.fee_units}</td><td>${esc(e.mode)}</td></tr>`
    ).join("");
    $ledger.innerHTML = `<table class="intervals"><thead><tr><th>run</th><th>duration (s)</th><th>weight</th><th>fee</th><th>mode</th></tr></thead><tbody>${rows}</tbody></table><div>total: <span class="num">${ledger.total_fee_units}</span> units</div>`;
  } catch (err) {
    $ledger.innerHTML = flowError(err);
  }
});
$connect.addEventListener("click", () => {
  api = new ConsoleApi($baseUrl.value.replace(/\/$/, ""), $token.value.trim() || "anonymous");
  void loadTopology();
});
canvas = canvasFromDesign({ format: "design.v1", links: [], pairs: [], window_ps: 1e3 });
renderCanvas();
