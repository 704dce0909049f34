import { describe, expect, it } from "vitest";

import { buildPanelView, buildPanelViews, pageItems, paletteColor } from "../src/panels.js";
import type { InteractionRequest } from "../src/types.js";

function gridRequest(n: number, overrides: Partial<InteractionRequest> = {}): InteractionRequest {
  return {
    requestId: "run-0-req0001",
    sessionId: "run-0",
    nodeId: "labeling",
    function: "interactiveLabeling",
    implementationKey: "builtin.interface.gridMatrixClassification",
    persistent: false,
    payload: {
      sampledObjects: Array.from({ length: n }, (_, i) => ({
        uuid: `o${i}`,
        content: { kind: "vector" as const, values: [i], length: 1 },
        currentLabel: { uuid: `o${i}`, status: "unlabeled" as const },
      })),
      categories: ["cat", "dog", "bird"],
      interfaceHints: { layout: "gridMatrix" as const, rows: 4, columns: 4 },
    },
    ...overrides,
  };
}

describe("buildPanelView", () => {
  it("derives a 4x4 grid with one page for 16 items", () => {
    const view = buildPanelView(gridRequest(16), true);
    expect(view.layout).toEqual({ kind: "gridMatrix", rows: 4, columns: 4 });
    expect(view.pageSize).toBe(16);
    expect(view.pageCount).toBe(1);
    expect(view.submitEnabled).toBe(true);
    expect(view.items).toHaveLength(16);
  });

  it("paginates items beyond the grid capacity", () => {
    const view = buildPanelView(gridRequest(21), true);
    expect(view.pageCount).toBe(2);
    expect(pageItems(view, 0)).toHaveLength(16);
    expect(pageItems(view, 1)).toHaveLength(5);
    expect(pageItems(view, 1)[0]?.uuid).toBe("o16");
  });

  it("palette order matches request categories with stable colors", () => {
    const view = buildPanelView(gridRequest(4), true);
    expect(view.categoryPalette.map((p) => p.category)).toEqual(["cat", "dog", "bird"]);
    expect(view.categoryPalette[0]?.color).toBe(paletteColor(0));
    const again = buildPanelView(gridRequest(4), true);
    expect(again.categoryPalette).toEqual(view.categoryPalette);
  });

  it("single object layout pages one at a time", () => {
    const request = gridRequest(3);
    request.payload.interfaceHints = { layout: "singleObject" };
    const view = buildPanelView(request, true);
    expect(view.layout).toEqual({ kind: "singleObject" });
    expect(view.pageSize).toBe(1);
    expect(view.pageCount).toBe(3);
  });
});

describe("buildPanelViews", () => {
  it("one view per pending request", () => {
    const views = buildPanelViews([gridRequest(16)], []);
    expect(views).toHaveLength(1);
    expect(views[0]?.requestId).toBe("run-0-req0001");
  });

  it("standing panel without an active request renders submit-disabled", () => {
    const standing = gridRequest(16, { persistent: true });
    const views = buildPanelViews([], [standing]);
    expect(views).toHaveLength(1);
    expect(views[0]?.requestId).toBeNull();
    expect(views[0]?.submitEnabled).toBe(false);
  });

  it("an active request supersedes its standing panel", () => {
    const active = gridRequest(16, { persistent: true });
    const views = buildPanelViews([active], [active]);
    expect(views).toHaveLength(1);
    expect(views[0]?.submitEnabled).toBe(true);
  });

  it("empty inputs give an empty list", () => {
    expect(buildPanelViews([], [])).toEqual([]);
  });
});
