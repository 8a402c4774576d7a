// Shapes served by the sentinel HTTP API (GET /modules, GET /topology,
// GET /view) and the view document pushed by sink stages.  These mirror
// the server's JSON exactly; the UI never derives analysis results of
// its own, it only draws what arrives.

export interface InterfaceInfo {
  name: string;
  direction: "in" | "out";
  address: string;
}

export type ModuleStatus = "registered" | "running" | "finished" | "failed";

export interface ModuleInfo {
  id: number;
  name: string;
  interfaces: InterfaceInfo[];
  features: string[];
  status: ModuleStatus;
  producers: number[];
  consumers: number[];
}

export interface TopologyEdge {
  producer: number;
  consumer: number;
}

export interface WireResult {
  producer: number;
  consumer: number;
  address: string;
}

// [process, index] with 1-based indices, as everywhere in the trace data.
export type Coord = [number, number];

export interface ViewEvent {
  p: number;
  i: number;
  kind?: string;
  kind_code?: number;
  attrs: Record<string, number | string>;
}

export interface ViewRelation {
  sp: number;
  si: number;
  dp: number;
  di: number;
}

export type AnomalyKind = "LengthMismatch" | "IsolatedSend" | "IsolatedReceive";

export interface AnomalyDoc {
  kind: AnomalyKind;
  events: Coord[];
  details: Record<string, number | string>;
  severity: "warning" | "error";
}

export interface OccurrenceDoc {
  base: number[];
  events: Coord[];
}

export interface IrregularityDoc {
  expected_base: number[];
  reason: "missing" | "perturbed";
  anomalies: number[];
}

export interface RunDoc {
  template: string;
  binding: number[];
  stride: number;
  occurrences: OccurrenceDoc[];
  irregularities: IrregularityDoc[];
}

export interface ViewDocument {
  processes: number;
  events: ViewEvent[];
  relations: ViewRelation[];
  anomalies: AnomalyDoc[];
  runs: RunDoc[];
}
