/**
 * Design canvas model.
 *
 * The canvas is the client-side working copy of a design.v1 document:
 * links with two delivery arms each, coincidence pairings, and the
 * counting window. Parsing and serialization are lossless — optional
 * keys keep their presence or absence, unrecognized keys ride along in
 * `rest`, and entries that are not even objects are kept verbatim in
 * `raw` — so canvas -> design.v1 -> canvas reproduces an identical
 * document. Validation never blocks loading; a draft that fails
 * `validateDesign` is simply marked invalid with findings to overlay.
 */

import type {
  DesignDoc,
  Finding,
  Json,
  JsonObject,
  LinkMode,
  TopologyDoc,
} from "./types.js";

export const DESIGN_FORMAT = "design.v1";
export const MODES: LinkMode[] = ["entangled", "heralded"];
export const DEFAULT_WINDOW_PS = 1000;

// ---------- model ----------

export interface CanvasArm {
  endpoint: string;
  /** undefined means the key was absent in the document */
  basisDeg?: number;
  apc?: boolean;
  rest: JsonObject;
  /** set when the document entry was not an object; serialized verbatim */
  raw?: Json;
}

export interface CanvasLink {
  sourceHub: string;
  mode: LinkMode;
  pairRateHz?: number;
  arms: CanvasArm[];
  rest: JsonObject;
  raw?: Json;
}

export interface Selection {
  kind: "link" | "arm" | "pair";
  index: number;
  arm?: number;
}

export interface DesignCanvas {
  links: CanvasLink[];
  pairs?: [number, number][];
  windowPs?: number;
  rest: JsonObject;
  selection: Selection | null;
  findings: Finding[];
}

// ---------- helpers ----------

const LINK_KEYS = new Set(["source_hub", "mode", "pair_rate_hz", "arms"]);
const ARM_KEYS = new Set(["endpoint", "basis_deg", "apc"]);
const ROOT_KEYS = new Set(["format", "links", "pairs", "window_ps"]);

function isObject(v: unknown): v is JsonObject {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

function restOf(doc: JsonObject, known: Set<string>): JsonObject {
  const rest: JsonObject = {};
  for (const [k, v] of Object.entries(doc)) {
    if (!known.has(k) && v !== undefined) rest[k] = v;
  }
  return rest;
}

function asIntPair(v: Json): [number, number] | null {
  if (!Array.isArray(v) || v.length !== 2) return null;
  const [a, b] = v;
  if (typeof a !== "number" || typeof b !== "number") return null;
  return [a, b];
}

// ---------- parse ----------

function parseArm(entry: Json): CanvasArm {
  if (!isObject(entry)) {
    return { endpoint: "", rest: {}, raw: entry };
  }
  const arm: CanvasArm = {
    endpoint: typeof entry.endpoint === "string" ? entry.endpoint : "",
    rest: restOf(entry, ARM_KEYS),
  };
  if (typeof entry.endpoint !== "string" && entry.endpoint !== undefined) {
    arm.rest.endpoint = entry.endpoint;
  }
  if (entry.basis_deg !== undefined) {
    if (typeof entry.basis_deg === "number") arm.basisDeg = entry.basis_deg;
    else arm.rest.basis_deg = entry.basis_deg;
  }
  if (entry.apc !== undefined) {
    if (typeof entry.apc === "boolean") arm.apc = entry.apc;
    else arm.rest.apc = entry.apc;
  }
  return arm;
}

function parseLink(entry: Json): CanvasLink {
  if (!isObject(entry)) {
    return { sourceHub: "", mode: "entangled", arms: [], rest: {}, raw: entry };
  }
  const link: CanvasLink = {
    sourceHub: typeof entry.source_hub === "string" ? entry.source_hub : "",
    mode: entry.mode === "heralded" ? "heralded" : "entangled",
    arms: Array.isArray(entry.arms) ? entry.arms.map(parseArm) : [],
    rest: restOf(entry, LINK_KEYS),
  };
  if (typeof entry.source_hub !== "string" && entry.source_hub !== undefined) {
    link.rest.source_hub = entry.source_hub;
  }
  if (entry.mode !== "entangled" && entry.mode !== "heralded" && entry.mode !== undefined) {
    link.rest.mode = entry.mode;
  }
  if (!Array.isArray(entry.arms) && entry.arms !== undefined) {
    link.rest.arms = entry.arms;
  }
  if (entry.pair_rate_hz !== undefined) {
    if (typeof entry.pair_rate_hz === "number") link.pairRateHz = entry.pair_rate_hz;
    else link.rest.pair_rate_hz = entry.pair_rate_hz;
  }
  return link;
}

/** Load a design.v1 document into a fresh canvas. Never throws. */
export function canvasFromDesign(doc: Json): DesignCanvas {
  if (!isObject(doc)) {
    return { links: [], rest: {}, selection: null, findings: [] };
  }
  const canvas: DesignCanvas = {
    links: Array.isArray(doc.links) ? doc.links.map(parseLink) : [],
    rest: restOf(doc, ROOT_KEYS),
    selection: null,
    findings: [],
  };
  if (doc.format !== DESIGN_FORMAT && doc.format !== undefined) {
    canvas.rest.format = doc.format;
  }
  if (!Array.isArray(doc.links) && doc.links !== undefined) {
    canvas.rest.links = doc.links;
  }
  if (doc.pairs !== undefined) {
    const pairs = Array.isArray(doc.pairs) ? doc.pairs.map(asIntPair) : null;
    if (pairs && pairs.every((p) => p !== null)) {
      canvas.pairs = pairs as [number, number][];
    } else {
      canvas.rest.pairs = doc.pairs;
    }
  }
  if (doc.window_ps !== undefined) {
    if (typeof doc.window_ps === "number") canvas.windowPs = doc.window_ps;
    else canvas.rest.window_ps = doc.window_ps;
  }
  return canvas;
}

// ---------- serialize ----------

function armDoc(arm: CanvasArm): Json {
  if (arm.raw !== undefined) return arm.raw;
  const out: JsonObject = { endpoint: arm.endpoint };
  if (arm.basisDeg !== undefined) out.basis_deg = arm.basisDeg;
  if (arm.apc !== undefined) out.apc = arm.apc;
  for (const [k, v] of Object.entries(arm.rest)) out[k] = v;
  return out;
}

function linkDoc(link: CanvasLink): Json {
  if (link.raw !== undefined) return link.raw;
  const out: JsonObject = {};
  if (!("source_hub" in link.rest)) out.source_hub = link.sourceHub;
  if (!("mode" in link.rest)) out.mode = link.mode;
  if (link.pairRateHz !== undefined) out.pair_rate_hz = link.pairRateHz;
  if (!("arms" in link.rest)) out.arms = link.arms.map(armDoc);
  for (const [k, v] of Object.entries(link.rest)) out[k] = v;
  return out;
}

/** Serialize the canvas back to a design.v1 document. */
export function designFromCanvas(canvas: DesignCanvas): DesignDoc {
  const out: JsonObject = {};
  if (!("format" in canvas.rest)) out.format = DESIGN_FORMAT;
  if (!("links" in canvas.rest)) out.links = canvas.links.map(linkDoc);
  if (canvas.pairs !== undefined) out.pairs = canvas.pairs.map((p) => [p[0], p[1]]);
  if (canvas.windowPs !== undefined) out.window_ps = canvas.windowPs;
  for (const [k, v] of Object.entries(canvas.rest)) out[k] = v;
  return out as unknown as DesignDoc;
}

// ---------- validation ----------

function endpointOk(ep: unknown, topo: TopologyDoc | null): boolean {
  if (typeof ep !== "string" || !ep) return false;
  if (!topo) return true;
  for (const hub of topo.hubs) {
    if (hub.nodes.includes(ep)) return true;
    if (ep === `${hub.id}.measure`) return true;
  }
  return false;
}

/**
 * Structural checks matching what the service enforces on submit,
 * returning findings instead of raising. With a topology supplied the
 * hub and endpoint names are checked for existence too.
 */
export function validateDesign(doc: Json, topo: TopologyDoc | null = null): Finding[] {
  const out: Finding[] = [];
  const bad = (message: string, element = "") =>
    out.push({ code: "E_SCHEMA", message, element });
  const unknown = (message: string, element = "") =>
    out.push({ code: "E_UNKNOWN_ELEMENT", message, element });

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
    const hubKnown = topo ? topo.hubs.some((h) => h.id === hub) : typeof hub === "string" && !!hub;
    if (!hubKnown) {
      unknown(`${where}: unknown hub ${JSON.stringify(hub ?? null)}`, where);
    }
    if (link.mode !== "entangled" && link.mode !== "heralded") {
      bad(`${where}: mode must be one of ${JSON.stringify(MODES)}`, where);
    }
    const rate = link.pair_rate_hz ?? 1_000_000;
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
      const ep = isObject(arm) ? arm.endpoint : undefined;
      if (!endpointOk(ep, topo)) {
        unknown(`${at}: unknown endpoint ${JSON.stringify(ep ?? null)}`, at);
      }
      const basis = isObject(arm) ? (arm.basis_deg ?? 0) : 0;
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
  const window = doc.window_ps ?? DEFAULT_WINDOW_PS;
  if (typeof window !== "number" || !Number.isInteger(window) || window <= 0) {
    bad("window_ps must be a positive integer");
  }
  return out;
}

/** Re-validate the canvas draft and store the findings overlay. */
export function refreshFindings(canvas: DesignCanvas, topo: TopologyDoc | null = null): Finding[] {
  canvas.findings = validateDesign(designFromCanvas(canvas) as unknown as Json, topo);
  return canvas.findings;
}

export function draftValid(canvas: DesignCanvas): boolean {
  return canvas.findings.length === 0;
}

// ---------- editing ----------

export function newCanvas(): DesignCanvas {
  return { links: [], rest: {}, selection: null, findings: [] };
}

export function addLink(canvas: DesignCanvas, sourceHub: string): CanvasLink {
  const link: CanvasLink = {
    sourceHub,
    mode: "entangled",
    pairRateHz: 1_000_000,
    arms: [
      { endpoint: "", basisDeg: 0, apc: false, rest: {} },
      { endpoint: "", basisDeg: 0, apc: false, rest: {} },
    ],
    rest: {},
  };
  canvas.links.push(link);
  canvas.selection = { kind: "link", index: canvas.links.length - 1 };
  return link;
}

export function removeLink(canvas: DesignCanvas, index: number): void {
  canvas.links.splice(index, 1);
  // drop pairings that referenced the removed taps and reindex the rest
  if (canvas.pairs !== undefined) {
    const lo = 2 * index;
    canvas.pairs = canvas.pairs
      .filter((p) => p[0] < lo || p[0] >= lo + 2)
      .filter((p) => p[1] < lo || p[1] >= lo + 2)
      .map((p) => [p[0] > lo ? p[0] - 2 : p[0], p[1] > lo ? p[1] - 2 : p[1]]);
  }
  canvas.selection = null;
}

export function togglePair(canvas: DesignCanvas, a: number, b: number): void {
  const pairs = canvas.pairs ?? [];
  const at = pairs.findIndex((p) => (p[0] === a && p[1] === b) || (p[0] === b && p[1] === a));
  if (at >= 0) pairs.splice(at, 1);
  else pairs.push([a, b]);
  canvas.pairs = pairs;
}
