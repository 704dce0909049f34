/** Pure HTML rendering: every view is a function of its data only. */

import type { PanelItem, PanelView } from "./panels.js";
import { pageItems } from "./panels.js";
import type { AssignmentMap } from "./submit.js";
import type { DashboardView } from "./status.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function renderContent(item: PanelItem): string {
  const content = item.content;
  if (content.kind === "image") {
    if (content.imageBase64) {
      return `<img class="object-image" src="data:image/png;base64,${content.imageBase64}" alt="${escapeHtml(item.uuid)}">`;
    }
    return `<span class="object-ref">${escapeHtml(content.imageRef ?? "")}</span>`;
  }
  if (content.kind === "text") {
    return `<span class="object-text">${escapeHtml(content.text)}</span>`;
  }
  const shown = content.values.map((v) => v.toFixed(3)).join(", ");
  const spark = renderSparkline(content.values);
  const suffix = content.length > content.values.length ? ", …" : "";
  return `${spark}<span class="object-vector">[${shown}${suffix}]</span>`;
}

function renderSparkline(values: number[]): string {
  if (values.length === 0) return "";
  const min = Math.min(...values);
  const span = Math.max(...values) - min || 1;
  const bars = "▁▂▃▄▅▆▇█";
  const chars = values
    .slice(0, 16)
    .map((v) => bars[Math.min(7, Math.floor(((v - min) / span) * 8))])
    .join("");
  return `<span class="sparkline" aria-hidden="true">${chars}</span>`;
}

function renderCell(
  item: PanelItem,
  view: PanelView,
  assignments: AssignmentMap,
): string {
  const assigned = assignments[item.uuid]?.category;
  const effective = assigned ?? item.currentCategory;
  const color =
    view.categoryPalette.find((p) => p.category === effective)?.color ?? "transparent";
  const badge = effective
    ? `<span class="cell-label" style="background:${color}">${escapeHtml(effective)}${assigned ? "" : " (default)"}</span>`
    : `<span class="cell-label cell-unlabeled">unlabeled</span>`;
  return [
    `<div class="cell${assigned ? " assigned" : ""}" data-uuid="${escapeHtml(item.uuid)}">`,
    renderContent(item),
    badge,
    `</div>`,
  ].join("");
}

export function renderPanel(
  view: PanelView,
  page: number,
  assignments: AssignmentMap,
  notice = "",
): string {
  const items = pageItems(view, page);
  const grid =
    view.layout.kind === "gridMatrix"
      ? `style="display:grid;grid-template-columns:repeat(${view.layout.columns},1fr);grid-template-rows:repeat(${view.layout.rows},auto);gap:6px"`
      : `class="single-object"`;
  const palette = view.categoryPalette
    .map(
      (entry, i) =>
        `<button class="palette" data-category="${escapeHtml(entry.category)}" ` +
        `style="border-color:${entry.color}" title="key ${i + 1}">` +
        `${i + 1} ${escapeHtml(entry.category)}</button>`,
    )
    .join("");
  const pager =
    view.pageCount > 1
      ? `<div class="pager">page ${page + 1}/${view.pageCount} ` +
        `<button data-page="${page - 1}" ${page === 0 ? "disabled" : ""}>prev</button>` +
        `<button data-page="${page + 1}" ${page + 1 >= view.pageCount ? "disabled" : ""}>next</button></div>`
      : "";
  const standing = view.requestId === null ? " (standing panel, waiting for work)" : "";
  return [
    `<section class="panel" data-request="${escapeHtml(view.requestId ?? "")}" data-node="${escapeHtml(view.nodeId)}">`,
    `<header><strong>${escapeHtml(view.taskFunction)}</strong> · ${escapeHtml(view.nodeId)}${standing}</header>`,
    `<div class="palette-row">${palette}</div>`,
    `<div class="cells" ${grid}>${items.map((item) => renderCell(item, view, assignments)).join("")}</div>`,
    pager,
    notice ? `<p class="notice">${escapeHtml(notice)}</p>` : "",
    `<button class="submit" ${view.submitEnabled ? "" : "disabled"}>submit</button>`,
    `</section>`,
  ].join("\n");
}

export function renderDashboard(view: DashboardView): string {
  const diagnostics = view.diagnostics
    .map(
      (d) =>
        `<li class="diag ${d.severity}"><span class="badge ${d.severity}">${d.severity}</span> ` +
        `<code>${escapeHtml(d.code)}</code> ${escapeHtml(d.message)}` +
        (d.subjects.length ? ` <em>[${d.subjects.map(escapeHtml).join(", ")}]</em>` : "") +
        `</li>`,
    )
    .join("");
  const percent = Math.round(view.progressFraction * 100);
  return [
    `<section class="dashboard" data-session="${escapeHtml(view.sessionId)}">`,
    `<header>session <code>${escapeHtml(view.sessionId)}</code> · ${escapeHtml(view.status)}</header>`,
    `<p>current node: <code>${escapeHtml(view.currentNode ?? "-")}</code></p>`,
    `<div class="progress"><div class="bar" style="width:${percent}%"></div></div>`,
    `<p>${escapeHtml(view.progressText)} (${percent}%)</p>`,
    view.diagnostics.length
      ? `<ul class="diagnostics">${diagnostics}</ul>`
      : `<p class="diagnostics-empty">workflow checks clean</p>`,
    `</section>`,
  ].join("\n");
}
