// Canned service responses for tests.  The view document is a verbatim
// capture of what a sink pushes for a two-process exchange trace with
// iteration 3 dropped on process 0: the partner's send and receive for
// that iteration stay pending, and the pattern run records a perturbed
// irregularity where the exchange resumed off its stride.

import type { ModuleInfo, TopologyEdge, ViewDocument } from "../src/types.js";

export const MODULES: ModuleInfo[] = [
  {
    id: 1,
    name: "generate",
    interfaces: [],
    features: ["send"],
    status: "running",
    producers: [],
    consumers: [2],
  },
  {
    id: 2,
    name: "analyze-failures",
    interfaces: [{ name: "in", direction: "in", address: "127.0.0.1:7501" }],
    features: ["receive", "send"],
    status: "running",
    producers: [1],
    consumers: [3],
  },
  {
    id: 3,
    name: "sink-json",
    interfaces: [{ name: "in", direction: "in", address: "127.0.0.1:7502" }],
    features: ["receive"],
    status: "finished",
    producers: [2],
    consumers: [],
  },
];

export const EDGES: TopologyEdge[] = [
  { producer: 1, consumer: 2 },
  { producer: 2, consumer: 3 },
];

export const VIEW: ViewDocument = {
  processes: 2,
  events: [
    { p: 0, i: 1, kind: "send", attrs: { dst: 1, len: 8, tag: 1 } },
    { p: 0, i: 2, kind: "receive", attrs: { len: 8, src: 1, tag: 1 } },
    { p: 0, i: 3, kind: "send", attrs: { dst: 1, len: 8, tag: 2 } },
    { p: 0, i: 4, kind: "receive", attrs: { len: 8, src: 1, tag: 2 } },
    { p: 0, i: 5, kind: "send", attrs: { dst: 1, len: 8, tag: 4 } },
    { p: 0, i: 6, kind: "receive", attrs: { len: 8, src: 1, tag: 4 } },
    { p: 0, i: 7, kind: "send", attrs: { dst: 1, len: 8, tag: 5 } },
    { p: 0, i: 8, kind: "receive", attrs: { len: 8, src: 1, tag: 5 } },
    { p: 0, i: 9, kind: "send", attrs: { dst: 1, len: 8, tag: 6 } },
    { p: 0, i: 10, kind: "receive", attrs: { len: 8, src: 1, tag: 6 } },
    { p: 1, i: 1, kind: "send", attrs: { dst: 0, len: 8, tag: 1 } },
    { p: 1, i: 2, kind: "receive", attrs: { len: 8, src: 0, tag: 1 } },
    { p: 1, i: 3, kind: "send", attrs: { dst: 0, len: 8, tag: 2 } },
    { p: 1, i: 4, kind: "receive", attrs: { len: 8, src: 0, tag: 2 } },
    { p: 1, i: 5, kind: "send", attrs: { dst: 0, len: 8, tag: 3 } },
    { p: 1, i: 6, kind: "receive", attrs: { len: 8, src: 0, tag: 3 } },
    { p: 1, i: 7, kind: "send", attrs: { dst: 0, len: 8, tag: 4 } },
    { p: 1, i: 8, kind: "receive", attrs: { len: 8, src: 0, tag: 4 } },
    { p: 1, i: 9, kind: "send", attrs: { dst: 0, len: 8, tag: 5 } },
    { p: 1, i: 10, kind: "receive", attrs: { len: 8, src: 0, tag: 5 } },
    { p: 1, i: 11, kind: "send", attrs: { dst: 0, len: 8, tag: 6 } },
    { p: 1, i: 12, kind: "receive", attrs: { len: 8, src: 0, tag: 6 } },
  ],
  relations: [
    { sp: 0, si: 1, dp: 1, di: 2 },
    { sp: 0, si: 3, dp: 1, di: 4 },
    { sp: 0, si: 5, dp: 1, di: 8 },
    { sp: 0, si: 7, dp: 1, di: 10 },
    { sp: 0, si: 9, dp: 1, di: 12 },
    { sp: 1, si: 1, dp: 0, di: 2 },
    { sp: 1, si: 3, dp: 0, di: 4 },
    { sp: 1, si: 7, dp: 0, di: 6 },
    { sp: 1, si: 9, dp: 0, di: 8 },
    { sp: 1, si: 11, dp: 0, di: 10 },
  ],
  anomalies: [
    { kind: "IsolatedSend", events: [[1, 5]], details: {}, severity: "error" },
    { kind: "IsolatedReceive", events: [[1, 6]], details: {}, severity: "error" },
  ],
  runs: [
    {
      template: "simple-exchange",
      binding: [0, 1],
      stride: 2,
      occurrences: [
        { base: [1, 1], events: [[0, 1], [0, 2], [1, 1], [1, 2]] },
        { base: [3, 3], events: [[0, 3], [0, 4], [1, 3], [1, 4]] },
        { base: [5, 7], events: [[0, 5], [0, 6], [1, 7], [1, 8]] },
        { base: [7, 9], events: [[0, 7], [0, 8], [1, 9], [1, 10]] },
        { base: [9, 11], events: [[0, 9], [0, 10], [1, 11], [1, 12]] },
      ],
      irregularities: [{ expected_base: [5, 5], reason: "perturbed", anomalies: [0, 1] }],
    },
  ],
};

// The smallest view showing a flagged pair: one message whose receive
// reports fewer bytes than the send put on the wire.
export const MISMATCH_VIEW: ViewDocument = {
  processes: 2,
  events: [
    { p: 0, i: 1, kind: "send", attrs: { dst: 1, len: 8 } },
    { p: 1, i: 1, kind: "receive", attrs: { len: 4, src: 0 } },
  ],
  relations: [{ sp: 0, si: 1, dp: 1, di: 1 }],
  anomalies: [
    {
      kind: "LengthMismatch",
      events: [
        [0, 1],
        [1, 1],
      ],
      details: { recv_len: 4, send_len: 8 },
      severity: "warning",
    },
  ],
  runs: [],
};

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}
