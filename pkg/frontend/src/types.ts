/**
 * Wire types for the control service.
 *
 * Everything here mirrors a payload the service actually emits; the
 * console adds nothing. Document schemas are versioned by their
 * `format` / `schema` field (design.v1, config.v1, topology.v1).
 */

// ---------- JSON ----------

export type Json = null | boolean | number | string | Json[] | { [key: string]: Json };
export type JsonObject = { [key: string]: Json };

// ---------- findings / errors ----------

export interface Finding {
  code: string;
  message: string;
  element: string;
}

/** Error body every non-2xx response carries: {code, message, findings[]}. */
export interface ErrorBody {
  code: string;
  message: string;
  findings: Finding[];
}

// ---------- topology.v1 ----------

export interface SwitchDoc {
  id: string;
  rows: number;
  cols: number;
  jumpers: [number, number][];
  mapping: [number, number][];
}

export interface HubDoc {
  id: string;
  nodes: string[];
  switches: SwitchDoc[];
}

export interface BundleDoc {
  id: string;
  kind: "primary" | "secondary" | "lan";
  a: string;
  b: string;
  qubit_lanes: number;
  timing_fibers: number;
  lan_fibers: number;
  length_km: number;
  per_fiber_loss_db: number;
}

export interface TopologyDoc {
  schema: "topology.v1";
  control_center: string;
  params: JsonObject;
  hubs: HubDoc[];
  bundles: BundleDoc[];
}

// ---------- design.v1 ----------

export type LinkMode = "entangled" | "heralded";

export interface ArmDoc {
  endpoint: string;
  basis_deg?: number;
  apc?: boolean;
}

export interface LinkDoc {
  source_hub: string;
  mode: LinkMode;
  pair_rate_hz?: number;
  arms: ArmDoc[];
}

export interface DesignDoc {
  format: "design.v1";
  links: LinkDoc[];
  pairs?: [number, number][];
  window_ps?: number;
}

// ---------- service payloads ----------

export interface SubmitResponse {
  request_id: string;
  findings: Finding[];
  config: JsonObject;
}

export interface WindowPayload {
  window_id: string;
  request_id: string;
  subscriber_id: string;
  start_s: number;
  end_s: number;
  priority: number;
  resources: string[];
}

/** One accumulation interval as streamed over /counts (NDJSON lines). */
export interface CountRecordWire {
  interval_start_ps: number;
  interval_len_ps: number;
  singles: Record<string, number>;
  coincidences: Record<string, number>;
}

export interface ApcSignal {
  t_s: number;
  hub: string;
  channel: number;
  error: number;
  evaluations: number;
  converged: boolean;
}

export type HandleState = "Pending" | "Active" | "Completed" | "Failed";

export interface MonitorPayload {
  handle_id: string;
  state: HandleState;
  now_s: number;
  start_s: number;
  end_s: number;
  /** empty string while healthy; an error body after a rollback */
  failure: ErrorBody | JsonObject | string | null;
  device_health: Record<string, string>;
  latest_record: CountRecordWire | null;
  records_visible: number;
  apc_signals: ApcSignal[];
}

export interface LedgerEntryWire {
  instantiation_id: string;
  duration_s: number;
  weight: number;
  fee_units: number;
  mode: string;
}

export interface LedgerPayload {
  subscriber_id: string;
  total_fee_units: number;
  entries: LedgerEntryWire[];
}

export interface HealthPayload {
  status: string;
  now_s: number;
}

/**
 * Key report written by QKD runs (qkd-report.v1, the archive's
 * qkd_report.json). Displayed verbatim when present; the console never
 * derives q from counts itself.
 */
export interface QkdReport {
  format: "qkd-report.v1";
  seed: number;
  link: number;
  qber: number;
  n_coincidences: number;
  sifted_bits: number;
  reconciled_bits: number;
  final_bits: number;
  final_fraction: number;
  keys_match: boolean;
  offset_ps: number;
  transcript: JsonObject;
}
