/** Panel view-models: grid layout, pagination, category palette. */

import type { ContentPreview, InteractionRequest, LabelStatus } from "./types.js";

export interface PanelItem {
  uuid: string;
  content: ContentPreview;
  currentStatus: LabelStatus;
  currentCategory?: string;
}

export interface PaletteEntry {
  category: string;
  color: string;
}

export type PanelLayout =
  | { kind: "gridMatrix"; rows: number; columns: number }
  | { kind: "singleObject" };

export interface PanelView {
  requestId: string | null; // null: standing panel with no active request
  nodeId: string;
  taskFunction: string;
  persistent: boolean;
  layout: PanelLayout;
  items: PanelItem[];
  categoryPalette: PaletteEntry[];
  submitEnabled: boolean;
  pageSize: number;
  pageCount: number;
}

/** Stable palette color for the i-th category (golden-angle hues). */
export function paletteColor(index: number): string {
  const hue = Math.round((index * 137.508) % 360);
  return `hsl(${hue}, 65%, 45%)`;
}

function buildPalette(categories: string[]): PaletteEntry[] {
  return categories.map((category, i) => ({ category, color: paletteColor(i) }));
}

function buildLayout(request: InteractionRequest): PanelLayout {
  const hints = request.payload.interfaceHints;
  if (hints.layout === "gridMatrix") {
    return { kind: "gridMatrix", rows: hints.rows ?? 4, columns: hints.columns ?? 4 };
  }
  return { kind: "singleObject" };
}

export function buildPanelView(
  request: InteractionRequest,
  active: boolean,
): PanelView {
  const layout = buildLayout(request);
  const pageSize = layout.kind === "gridMatrix" ? layout.rows * layout.columns : 1;
  const items: PanelItem[] = request.payload.sampledObjects.map((obj) => ({
    uuid: obj.uuid,
    content: obj.content,
    currentStatus: obj.currentLabel.status,
    currentCategory: obj.currentLabel.category,
  }));
  return {
    requestId: active ? request.requestId : null,
    nodeId: request.nodeId,
    taskFunction: request.function,
    persistent: request.persistent,
    layout,
    items,
    categoryPalette: buildPalette(request.payload.categories),
    submitEnabled: active,
    pageSize,
    pageCount: Math.max(1, Math.ceil(items.length / pageSize)),
  };
}

/**
 * One view per pending request, plus standing persistent panels that
 * currently have no active request (rendered with submit disabled).
 */
export function buildPanelViews(
  pending: InteractionRequest[],
  standingPanels: InteractionRequest[],
): PanelView[] {
  const views = pending.map((request) => buildPanelView(request, true));
  const activeNodes = new Set(pending.map((request) => request.nodeId));
  for (const panel of standingPanels) {
    if (!activeNodes.has(panel.nodeId)) {
      views.push(buildPanelView(panel, false));
    }
  }
  return views;
}

/** Items shown on the given zero-based page. */
export function pageItems(view: PanelView, page: number): PanelItem[] {
  const start = page * view.pageSize;
  return view.items.slice(start, start + view.pageSize);
}
