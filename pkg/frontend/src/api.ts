import type { ModuleInfo, TopologyEdge, ViewDocument, WireResult } from "./types.js";

// Error bodies keep the server's exception name in detail.error so the
// UI can tell FeatureMismatch from NoInputInterface without string
// matching on messages.
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly errorName: string,
    message: string,
  ) {
    super(message);
    this.name = errorName;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class SentinelClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async modules(): Promise<ModuleInfo[]> {
    return this.get<ModuleInfo[]>("/modules");
  }

  async topology(): Promise<TopologyEdge[]> {
    return this.get<TopologyEdge[]>("/topology");
  }

  /** The latest pushed view, or null while no sink has pushed one. */
  async view(): Promise<ViewDocument | null> {
    const response = await this.fetchFn(`${this.base}/view`);
    if (response.status === 404) {
      return null;
    }
    if (!response.ok) {
      throw await this.toError(response);
    }
    return (await response.json()) as ViewDocument;
  }

  async wire(producer: number, consumer: number): Promise<WireResult> {
    const response = await this.fetchFn(`${this.base}/wire`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ producer, consumer }),
    });
    if (!response.ok) {
      throw await this.toError(response);
    }
    return (await response.json()) as WireResult;
  }

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchFn(`${this.base}${path}`);
    if (!response.ok) {
      throw await this.toError(response);
    }
    return (await response.json()) as T;
  }

  private async toError(response: Response): Promise<ApiError> {
    let name = `HTTP ${response.status}`;
    let message = response.statusText;
    try {
      const body = await response.json();
      const detail = (body as { detail?: { error?: string; message?: string } }).detail;
      if (detail?.error) {
        name = detail.error;
      }
      if (detail?.message) {
        message = detail.message;
      }
    } catch {
      // Non-JSON error body; the status line is all we have.
    }
    return new ApiError(response.status, name, message);
  }
}
