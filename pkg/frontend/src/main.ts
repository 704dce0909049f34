/** Browser entry point: 1s polling loop plus click/keyboard handlers. */

import { GatewayClient } from "./api.js";
import { buildPanelViews, type PanelView } from "./panels.js";
import { renderDashboard, renderPanel } from "./render.js";
import { buildDashboard } from "./status.js";
import { submitLabels, type AssignmentMap } from "./submit.js";

const POLL_MS = 1000;

interface UiState {
  sessionId: string | null;
  views: PanelView[];
  pages: Record<string, number>; // keyed by node id
  assignments: Record<string, AssignmentMap>; // keyed by request id
  activeCategory: string | null;
  notices: Record<string, string>;
}

function appRoot(): HTMLElement | null {
  return typeof document === "undefined" ? null : document.getElementById("app");
}

export function startApp(baseUrl: string = ""): void {
  const mount = appRoot();
  if (!mount) return;
  const root: HTMLElement = mount;
  const client = new GatewayClient(baseUrl);
  const state: UiState = {
    sessionId: null,
    views: [],
    pages: {},
    assignments: {},
    activeCategory: null,
    notices: {},
  };

  async function refresh(): Promise<void> {
    try {
      const sessions = await client.sessions();
      const first = sessions[0];
      if (!first) {
        root.innerHTML = `<p class="idle">no sessions on this server</p>`;
        return;
      }
      state.sessionId = first.id;
      const { pending, panels } = await client.requests(first.id);
      state.views = buildPanelViews(pending, panels);
      const panelHtml = state.views.length
        ? state.views
            .map((view) =>
              renderPanel(
                view,
                state.pages[view.nodeId] ?? 0,
                view.requestId ? state.assignments[view.requestId] ?? {} : {},
                view.requestId ? state.notices[view.requestId] ?? "" : "",
              ),
            )
            .join("\n")
        : `<p class="idle">nothing pending — the engine is working</p>`;
      root.innerHTML = renderDashboard(buildDashboard(first)) + panelHtml;
    } catch (err) {
      root.innerHTML =
        `<p class="banner-error">cannot reach the session server ` +
        `(${escape(String(err))}) — retrying…</p>`;
    }
  }

  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const palette = target.closest<HTMLElement>("button.palette");
    if (palette) {
      state.activeCategory = palette.dataset.category ?? null;
      void refresh();
      return;
    }
    const pager = target.closest<HTMLElement>("button[data-page]");
    if (pager) {
      const section = pager.closest<HTMLElement>("section.panel");
      const node = section?.dataset.node;
      if (node) state.pages[node] = Number(pager.dataset.page);
      void refresh();
      return;
    }
    const cell = target.closest<HTMLElement>("div.cell");
    if (cell && state.activeCategory) {
      const section = cell.closest<HTMLElement>("section.panel");
      const requestId = section?.dataset.request;
      const uuid = cell.dataset.uuid;
      if (requestId && uuid) {
        const map = (state.assignments[requestId] ??= {});
        map[uuid] = { category: state.activeCategory };
        void refresh();
      }
      return;
    }
    const submit = target.closest<HTMLElement>("button.submit");
    if (submit && state.sessionId) {
      const section = submit.closest<HTMLElement>("section.panel");
      const requestId = section?.dataset.request;
      const view = state.views.find((v) => v.requestId === requestId);
      if (!view || !requestId) return;
      void submitLabels(client, state.sessionId, view,
                        state.assignments[requestId] ?? {}).then((outcome) => {
        if (outcome.kind === "accepted") {
          delete state.assignments[requestId];
          delete state.notices[requestId];
        } else if (outcome.kind === "incomplete") {
          state.notices[requestId] =
            `assign a category to every item first (missing: ` +
            `${outcome.missing.slice(0, 4).join(", ")}` +
            `${outcome.missing.length > 4 ? ", …" : ""})`;
        } else if (outcome.kind === "conflict") {
          state.notices[requestId] = "already answered — refreshing";
        } else if (outcome.kind === "validation") {
          state.notices[requestId] = `rejected: ${outcome.detail}`;
        } else {
          state.notices[requestId] = "submission failed — try again";
        }
        void refresh();
      });
    }
  });

  if (typeof document !== "undefined") {
    document.addEventListener("keydown", (event) => {
      const index = Number(event.key) - 1;
      const palette = state.views[0]?.categoryPalette ?? [];
      const entry = palette[index];
      if (entry) {
        state.activeCategory = entry.category;
        void refresh();
      }
    });
  }

  void refresh();
  setInterval(() => void refresh(), POLL_MS);
}

function escape(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

startApp();
