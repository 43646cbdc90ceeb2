/**
 * Workbench shell: tab bar, status line with the observed revision and
 * per-panel staleness badges, error banner, and the recorded-session
 * export.  All reasoning output comes from the HTTP API.
 */

import { ApiClient, ApiError } from "./api";
import { Ctx } from "./context";
import { clear, el } from "./dom";
import { renderComposer } from "./panels/composer";
import { renderConstraints } from "./panels/constraints";
import { renderDescription } from "./panels/description";
import { renderGrid } from "./panels/grid";
import { renderHierarchy } from "./panels/hierarchy";
import { renderImplications } from "./panels/implications";
import { renderRelations } from "./panels/relations";
import { SessionState } from "./state";

type PanelName =
  | "grid"
  | "composer"
  | "implications"
  | "description"
  | "relations"
  | "hierarchy"
  | "constraints";

const PANELS: Record<PanelName, (c: HTMLElement, ctx: Ctx) => Promise<void>> = {
  grid: renderGrid,
  composer: renderComposer,
  implications: renderImplications,
  description: renderDescription,
  relations: renderRelations,
  hierarchy: renderHierarchy,
  constraints: renderConstraints,
};

export interface App {
  ctx: Ctx;
  open(panel: PanelName): Promise<void>;
  refresh(): Promise<void>;
  pollRevision(): Promise<void>;
  root: HTMLElement;
}

export function createApp(root: HTMLElement, serverUrl: string): App {
  const api = new ApiClient(serverUrl);
  const state = new SessionState(serverUrl);

  const errorBanner = el("div", { class: "error-banner" });
  const statusBar = el("div", { class: "status-bar" });
  const tabBar = el("nav", { class: "tabs" });
  const main = el("main", { class: "panel-host" });
  const exportButton = el("button", { class: "export-session" }, ["Export session script"]);
  const exportView = el("pre", { class: "session-script" });
  exportButton.onclick = () => {
    exportView.textContent = api.exportScript();
  };
  root.append(errorBanner, statusBar, tabBar, main, exportButton, exportView);

  let active: PanelName = "grid";

  const ctx: Ctx = {
    api,
    state,
    showError(err: unknown): void {
      clear(errorBanner);
      if (err instanceof ApiError) {
        const where = err.position !== undefined ? ` at position ${String(err.position)}` : "";
        errorBanner.append(
          el("span", { class: `api-error code-${err.code}` }, [`${err.code}: ${err.message}${where}`]),
        );
        if (err.status === 409) {
          const reload = el("button", { class: "reload-merge" }, ["Reload latest state"]);
          reload.onclick = () => void refresh();
          errorBanner.append(
            el("span", { class: "conflict" }, [" another session changed the store. "]),
            reload,
          );
        }
      } else {
        errorBanner.append(el("span", {}, [String(err)]));
      }
    },
    refresh,
  };

  for (const name of Object.keys(PANELS) as PanelName[]) {
    const tab = el("button", { class: `tab tab-${name}` }, [name]);
    tab.onclick = () => void open(name);
    tabBar.append(tab);
  }

  async function open(panel: PanelName): Promise<void> {
    active = panel;
    clear(errorBanner);
    clear(main);
    try {
      await PANELS[panel](main, ctx);
    } catch (err) {
      ctx.showError(err);
    }
    renderStatus();
  }

  async function refresh(): Promise<void> {
    await open(active);
  }

  async function pollRevision(): Promise<void> {
    try {
      const { revision } = await api.revision();
      state.noteRevision(revision);
      renderStatus();
    } catch {
      // server unreachable; the banner will say so on the next action
    }
  }

  function renderStatus(): void {
    clear(statusBar);
    statusBar.append(
      el("span", { class: "observed-revision" }, [`revision ${String(state.observedRevision)}`]),
    );
    for (const panel of Object.keys(PANELS) as PanelName[]) {
      const seen = state.renderedRevision(panel);
      if (seen === undefined) continue;
      const stale = state.isStale(panel);
      statusBar.append(
        el("span", { class: `panel-badge ${stale ? "stale" : "fresh"}`, "data-panel": panel }, [
          `${panel}@${String(seen)}${stale ? " (stale)" : ""}`,
        ]),
      );
    }
  }

  return { ctx, open, refresh, pollRevision, root };
}

declare global {
  interface Window {
    workbench?: App;
  }
}

if (typeof document !== "undefined") {
  const mount = document.getElementById("workbench-root");
  if (mount) {
    const url = mount.dataset.server ?? "http://127.0.0.1:8420";
    const app = createApp(mount, url);
    window.workbench = app;
    void app.open("grid");
    setInterval(() => void app.pollRevision(), 3000);
  }
}
