import { describe, expect, it } from "vitest";

import { renderModuleTable, renderTopology } from "../src/dashboard.js";
import type { ModuleInfo } from "../src/types.js";
import { EDGES, MODULES } from "./fixtures.js";

function count(haystack: string, needle: string): number {
  return haystack.split(needle).length - 1;
}

describe("renderModuleTable", () => {
  it("shows one row per module with every column", () => {
    const html = renderModuleTable(MODULES);
    for (const header of ["id", "name", "interfaces", "status", "features", "producers", "consumers"]) {
      expect(html).toContain(`<th>${header}</th>`);
    }
    expect(count(html, "<tr>")).toBe(4); // header plus three modules
    expect(html).toContain("analyze-failures");
    expect(html).toContain("in (in) 127.0.0.1:7501");
    expect(html).toContain("receive, send");
  });

  it("marks statuses with classes the stylesheet colors", () => {
    const html = renderModuleTable(MODULES);
    expect(count(html, 'class="status status-running"')).toBe(2);
    expect(count(html, 'class="status status-finished"')).toBe(1);
  });

  it("escapes module names", () => {
    const sneaky: ModuleInfo = {
      ...MODULES[0]!,
      name: '<img src=x onerror="1">',
    };
    const html = renderModuleTable([sneaky]);
    expect(html).not.toContain("<img");
    expect(html).toContain("&lt;img");
  });

  it("renders a hint instead of an empty table", () => {
    expect(renderModuleTable([])).toContain("No modules registered");
  });
});

describe("renderTopology", () => {
  it("draws one box per module and one arrow per wired edge", () => {
    const svg = renderTopology(MODULES, EDGES);
    expect(count(svg, "<rect")).toBe(3);
    expect(count(svg, 'class="topo-edge"')).toBe(2);
    expect(count(svg, "marker-end")).toBe(2);
  });

  it("places consumers to the right of their producers", () => {
    const svg = renderTopology(MODULES, EDGES);
    const xOf = (label: string): number => {
      const match = svg.match(new RegExp(`<text class="topo-name" x="([\\d.]+)"[^>]*>${label}`));
      expect(match).not.toBeNull();
      return Number(match![1]);
    };
    expect(xOf("1: generate")).toBeLessThan(xOf("2: analyze-failures"));
    expect(xOf("2: analyze-failures")).toBeLessThan(xOf("3: sink-json"));
  });

  it("keeps unwired modules in the first column", () => {
    const svg = renderTopology(MODULES, []);
    const xs = [...svg.matchAll(/<rect x="(\d+)"/g)].map((m) => Number(m[1]));
    expect(new Set(xs).size).toBe(1);
  });

  it("survives edges naming unknown modules", () => {
    const svg = renderTopology(MODULES, [{ producer: 7, consumer: 9 }]);
    expect(count(svg, 'class="topo-edge"')).toBe(0);
    expect(count(svg, "<rect")).toBe(3);
  });
});
