import { describe, expect, it } from "vitest";

import { ApiError, SentinelClient } from "../src/api.js";
import { EDGES, MODULES, VIEW, jsonResponse } from "./fixtures.js";

function clientWith(handler: (input: string, init?: RequestInit) => Response | Promise<Response>) {
  const calls: { input: string; init?: RequestInit }[] = [];
  const client = new SentinelClient("http://svc", async (input, init) => {
    calls.push({ input, init });
    return handler(input, init);
  });
  return { client, calls };
}

describe("SentinelClient", () => {
  it("fetches and parses the module table", async () => {
    const { client, calls } = clientWith(() => jsonResponse(MODULES));
    const modules = await client.modules();
    expect(calls[0]?.input).toBe("http://svc/modules");
    expect(modules).toHaveLength(3);
    expect(modules[1]?.features).toEqual(["receive", "send"]);
    expect(modules[2]?.status).toBe("finished");
  });

  it("fetches topology edges", async () => {
    const { client, calls } = clientWith(() => jsonResponse(EDGES));
    const edges = await client.topology();
    expect(calls[0]?.input).toBe("http://svc/topology");
    expect(edges).toEqual([
      { producer: 1, consumer: 2 },
      { producer: 2, consumer: 3 },
    ]);
  });

  it("returns the view document when one has been pushed", async () => {
    const { client } = clientWith(() => jsonResponse(VIEW));
    const view = await client.view();
    expect(view?.processes).toBe(2);
    expect(view?.events).toHaveLength(22);
  });

  it("returns null while no view has been pushed", async () => {
    const { client } = clientWith(() =>
      jsonResponse({ detail: { error: "NoView", message: "no view pushed yet" } }, 404),
    );
    expect(await client.view()).toBeNull();
  });

  it("posts wire requests as JSON", async () => {
    const { client, calls } = clientWith(() =>
      jsonResponse({ producer: 1, consumer: 2, address: "127.0.0.1:7501" }),
    );
    const result = await client.wire(1, 2);
    expect(calls[0]?.input).toBe("http://svc/wire");
    expect(calls[0]?.init?.method).toBe("POST");
    expect(JSON.parse(String(calls[0]?.init?.body))).toEqual({ producer: 1, consumer: 2 });
    expect(result.address).toBe("127.0.0.1:7501");
  });

  it("surfaces the server's error name verbatim", async () => {
    const { client } = clientWith(() =>
      jsonResponse(
        { detail: { error: "FeatureMismatch", message: "module 3 does not implement send" } },
        409,
      ),
    );
    const error = await client.wire(3, 1).catch((e: unknown) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect((error as ApiError).errorName).toBe("FeatureMismatch");
    expect((error as ApiError).status).toBe(409);
    expect((error as ApiError).message).toBe("module 3 does not implement send");
  });

  it("keeps UnknownModule and NoInputInterface distinguishable", async () => {
    for (const name of ["UnknownModule", "NoInputInterface"]) {
      const { client } = clientWith(() =>
        jsonResponse({ detail: { error: name, message: "nope" } }, name === "UnknownModule" ? 404 : 409),
      );
      const error = (await client.wire(1, 99).catch((e: unknown) => e)) as ApiError;
      expect(error.errorName).toBe(name);
    }
  });

  it("falls back to the status line for non-JSON error bodies", async () => {
    const { client } = clientWith(
      () => new Response("boom", { status: 500, statusText: "Internal Server Error" }),
    );
    const error = (await client.modules().catch((e: unknown) => e)) as ApiError;
    expect(error.errorName).toBe("HTTP 500");
    expect(error.message).toBe("Internal Server Error");
  });
});
