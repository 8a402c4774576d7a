import type { ModuleInfo, TopologyEdge, ViewDocument } from "./types.js";

export interface SnapshotSource {
  modules(): Promise<ModuleInfo[]>;
  topology(): Promise<TopologyEdge[]>;
  view(): Promise<ViewDocument | null>;
}

export interface Snapshot {
  modules: ModuleInfo[];
  edges: TopologyEdge[];
  view: ViewDocument | null;
}

// Polls the service and applies snapshots in order.  Responses carry
// the generation their request started with; anything older than the
// newest applied generation is dropped, so a slow request can never
// overwrite fresher data after the fact.
export class Poller {
  private nextGeneration = 1;
  private appliedGeneration = 0;

  constructor(
    private readonly client: SnapshotSource,
    private readonly onSnapshot: (snapshot: Snapshot) => void,
    private readonly onError: (error: unknown) => void,
  ) {}

  async tick(): Promise<void> {
    const generation = this.nextGeneration++;
    try {
      const [modules, edges, view] = await Promise.all([
        this.client.modules(),
        this.client.topology(),
        this.client.view(),
      ]);
      if (generation <= this.appliedGeneration) {
        return;
      }
      this.appliedGeneration = generation;
      this.onSnapshot({ modules, edges, view });
    } catch (error) {
      if (generation <= this.appliedGeneration) {
        return;
      }
      this.appliedGeneration = generation;
      this.onError(error);
    }
  }

  start(intervalMs = 1000): () => void {
    void this.tick();
    const timer = setInterval(() => void this.tick(), intervalMs);
    return () => clearInterval(timer);
  }
}
