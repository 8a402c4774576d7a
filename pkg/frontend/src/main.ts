import { ApiError, SentinelClient } from "./api.js";
import { renderModuleTable, renderTopology } from "./dashboard.js";
import {
  ALL_ANOMALY_KINDS,
  DEFAULT_OPTIONS,
  renderAnomalyList,
  renderExplorer,
} from "./explorer.js";
import { Poller, type Snapshot } from "./poll.js";

const client = new SentinelClient("");

const el = (id: string): HTMLElement => {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node;
};

const banner = el("banner");
const moduleTable = el("module-table");
const topology = el("topology");
const explorer = el("explorer");
const anomalyPanel = el("anomaly-panel");
const filterBox = el("anomaly-filters");
const collapseToggle = el("collapse-toggle") as HTMLInputElement;
const wireProducer = el("wire-producer") as HTMLInputElement;
const wireConsumer = el("wire-consumer") as HTMLInputElement;
const wireResult = el("wire-result");

const options = {
  collapse: DEFAULT_OPTIONS.collapse,
  highlight: new Set(DEFAULT_OPTIONS.highlight),
};
let lastSnapshot: Snapshot | null = null;

function applySnapshot(snapshot: Snapshot): void {
  lastSnapshot = snapshot;
  banner.hidden = true;
  moduleTable.innerHTML = renderModuleTable(snapshot.modules);
  topology.innerHTML = renderTopology(snapshot.modules, snapshot.edges);
  renderView();
}

function renderView(): void {
  if (!lastSnapshot) {
    return;
  }
  const view = lastSnapshot.view;
  if (view === null) {
    explorer.innerHTML =
      '<p class="empty">No view pushed yet. Run a sink-json stage with --push-view.</p>';
    anomalyPanel.innerHTML = "";
    return;
  }
  explorer.innerHTML = renderExplorer(view, options);
  anomalyPanel.innerHTML = renderAnomalyList(view.anomalies, options.highlight);
}

function showError(error: unknown): void {
  banner.hidden = false;
  banner.textContent =
    error instanceof Error ? `service unreachable: ${error.message}` : "service unreachable";
}

for (const kind of ALL_ANOMALY_KINDS) {
  const label = document.createElement("label");
  const box = document.createElement("input");
  box.type = "checkbox";
  box.checked = true;
  box.addEventListener("change", () => {
    if (box.checked) {
      options.highlight.add(kind);
    } else {
      options.highlight.delete(kind);
    }
    renderView();
  });
  label.appendChild(box);
  label.appendChild(document.createTextNode(` ${kind}`));
  filterBox.appendChild(label);
}

collapseToggle.addEventListener("change", () => {
  options.collapse = collapseToggle.checked;
  renderView();
});

el("wire-button").addEventListener("click", () => {
  const producer = Number(wireProducer.value);
  const consumer = Number(wireConsumer.value);
  wireResult.className = "";
  client
    .wire(producer, consumer)
    .then((result) => {
      wireResult.textContent = `wired ${result.producer} -> ${result.consumer} at ${result.address}`;
      return poller.tick();
    })
    .catch((error: unknown) => {
      wireResult.className = "wire-error";
      wireResult.textContent =
        error instanceof ApiError ? `${error.errorName}: ${error.message}` : String(error);
    });
});

const poller = new Poller(client, applySnapshot, showError);
poller.start(1000);
