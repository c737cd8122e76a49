/**
 * Topology rendering against recorded topology.v1 documents: every hub,
 * node, and bundle must come out selectable, ring edges drawn, switch
 * states readable as port maps, and an invalid document must produce an
 * error panel with no partial drawing.
 */

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import {
  renderBundleDetail,
  renderHubDetail,
  renderPortMap,
  renderTopology,
  renderTopologyPanel,
  validateTopologyDoc,
} from "../src/topology_view.js";
import type { Json, TopologyDoc } from "../src/types.js";

const FIXTURES = fileURLToPath(new URL("./fixtures", import.meta.url));
const load = (f: string) => JSON.parse(readFileSync(join(FIXTURES, f), "utf8"));
const topo3 = load("topology_3hub.json") as TopologyDoc;
const topo1 = load("topology_1hub.json") as TopologyDoc;

const count = (hay: string, needle: string) => hay.split(needle).length - 1;

describe("renderTopology on a three-hub ring", () => {
  const res = renderTopology(topo3 as unknown as Json);
  const svg = res.ok ? res.svg : "";

  it("accepts the recorded document", () => {
    expect(validateTopologyDoc(topo3 as unknown as Json)).toEqual([]);
    expect(res.ok).toBe(true);
  });

  it("draws three hub glyphs and fifteen node glyphs", () => {
    expect(count(svg, 'data-kind="hub"')).toBe(3);
    expect(count(svg, 'data-kind="node"')).toBe(15);
  });

  it("draws ring edges between the hubs", () => {
    // three hub pairs, one edge per bundle kind
    expect(count(svg, "ring-edge")).toBe(9);
    expect(svg).not.toContain("self-loop");
  });

  it("makes every bundle selectable by id", () => {
    for (const b of topo3.bundles) {
      expect(svg).toContain(`data-id="${b.id}"`);
    }
  });

  it("places the control center", () => {
    expect(count(svg, 'data-kind="cc"')).toBe(1);
    expect(svg).toContain(`data-id="${topo3.control_center}"`);
  });
});

describe("renderTopology on a one-hub ring", () => {
  it("renders the ring as a self-loop", () => {
    const res = renderTopology(topo1 as unknown as Json);
    expect(res.ok).toBe(true);
    const svg = res.ok ? res.svg : "";
    expect(count(svg, 'data-kind="hub"')).toBe(1);
    expect(count(svg, 'data-kind="node"')).toBe(5);
    expect(count(svg, "self-loop")).toBe(3);
  });
});

describe("invalid topology documents", () => {
  it("yields an error panel and no partial render", () => {
    const html = renderTopologyPanel({ schema: "topology.v2" });
    expect(html).toContain("error-panel");
    expect(html).toContain("E_SCHEMA");
    expect(html).not.toContain("<svg");
  });

  it("rejects structural damage", () => {
    expect(validateTopologyDoc(null)).not.toEqual([]);
    expect(validateTopologyDoc({ schema: "topology.v1", control_center: "CC", hubs: [] })).not.toEqual([]);
    const broken = JSON.parse(JSON.stringify(topo3));
    broken.bundles[0].a = "H9";
    expect(validateTopologyDoc(broken).some((f) => f.message.includes("H9"))).toBe(true);
    const nonnum = JSON.parse(JSON.stringify(topo3));
    nonnum.bundles[2].length_km = "far";
    expect(validateTopologyDoc(nonnum)).not.toEqual([]);
  });
});

describe("switch port maps", () => {
  const hub0 = topo3.hubs[0]!;
  const ring = hub0.switches.find((s) => s.id.endsWith("ring60"))!;

  it("shows jumpers and mapped rows for the ring switch", () => {
    const html = renderPortMap(ring);
    expect(html).toContain(ring.id);
    expect(count(html, '<span class="chip">')).toBe(ring.jumpers.length);
    expect(html).toContain("no rows mapped");
  });

  it("renders each mapped row once mappings exist", () => {
    const html = renderPortMap({ ...ring, mapping: [[0, 59], [12, 3]] });
    expect(count(html, "<tr><td")).toBe(2);
    expect(html).toContain(">59<");
  });

  it("hub detail includes a port map per switch", () => {
    const html = renderHubDetail(hub0);
    expect(count(html, 'class="portmap"')).toBe(hub0.switches.length);
    for (const nid of hub0.nodes) expect(html).toContain(nid);
  });

  it("bundle detail lists the recorded fiber complement", () => {
    const b = topo3.bundles.find((x) => x.kind === "primary")!;
    const html = renderBundleDetail(b);
    expect(html).toContain(String(b.qubit_lanes));
    expect(html).toContain(`${b.length_km} km`);
  });
});
