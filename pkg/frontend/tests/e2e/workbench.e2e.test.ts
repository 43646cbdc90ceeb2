/**
 * End-to-end flows against the real seeded server (spawned from the
 * repository's scripts/seed_server.py fixture):
 *
 *  - the implication fixture (AB -> A) shows up in the rendered panel,
 *  - applying Pr(A|B) >= 0.5 on the 10-object / 2-intersection store
 *    renders a +6 ledger delta,
 *  - every displayed numeric equals the corresponding API response field
 *    (checked by replaying the recorded response payloads).
 */

import { spawn, ChildProcess } from "node:child_process";
import { existsSync } from "node:fs";
import { resolve } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { createApp, App } from "../../src/app";

const PORT = 8461;
const BASE = `http://127.0.0.1:${PORT}`;
const REPO_ROOT = resolve(process.cwd(), "..");
const PYTHON = process.env.PYTHON ?? (existsSync("/usr/bin/python3") ? "/usr/bin/python3" : "python3");

let server: ChildProcess;
const responses: { key: string; payload: any }[] = [];

async function waitForServer(): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt++) {
    try {
      const r = await fetch(`${BASE}/health`);
      if (r.ok) return;
    } catch {
      /* not up yet */
    }
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
  throw new Error("seeded server did not come up");
}

beforeAll(async () => {
  server = spawn(PYTHON, ["scripts/seed_server.py", "--port", String(PORT)], {
    cwd: REPO_ROOT,
    stdio: "ignore",
  });
  await waitForServer();

  // record every response payload so rendered numbers can be traced
  const realFetch = globalThis.fetch;
  globalThis.fetch = (async (url: any, init?: any) => {
    const response = await realFetch(url, init);
    const clone = response.clone();
    try {
      const payload = await clone.json();
      const path = String(url).replace(BASE, "").split("?")[0];
      responses.push({ key: `${init?.method ?? "GET"} ${path}`, payload });
    } catch {
      /* non-JSON */
    }
    return response;
  }) as typeof fetch;
});

afterAll(() => {
  server?.kill();
});

function lastResponse(key: string): any {
  for (let i = responses.length - 1; i >= 0; i--) {
    if (responses[i].key === key) return responses[i].payload;
  }
  throw new Error(`no recorded response for ${key}`);
}

function makeApp(): App {
  const root = document.createElement("div");
  document.body.append(root);
  return createApp(root, BASE);
}

describe("workbench against the seeded server", () => {
  it("grid shows the ten seeded objects", async () => {
    const app = makeApp();
    await app.open("grid");
    const rows = app.root.querySelectorAll("tbody tr");
    const apiObjects = lastResponse("GET /objects").objects;
    expect(apiObjects).toHaveLength(10);
    expect(rows).toHaveLength(apiObjects.length);
  });

  it("implication panel reproduces the AB -> A fixture verbatim", async () => {
    const app = makeApp();
    await app.open("implications");
    const text = app.root.querySelector(".logical-implications")?.textContent ?? "";
    expect(text).toContain("AB -> A");
    expect(text).toContain("AB -> B");
    const api = lastResponse("GET /report/implications");
    for (const [child, parent] of api.logicalImplications) {
      expect(text).toContain(`${child} -> ${parent}`);
    }
    const dbText = app.root.querySelector(".database-implications")?.textContent ?? "";
    for (const [child, parent] of api.databaseImplications) {
      expect(dbText).toContain(`${child} -> ${parent}`);
    }
  });

  it("composer preview equals the query response for A*B", async () => {
    const app = makeApp();
    app.ctx.state.currentExpressionDraft = ["This in (A*B)"];
    await app.open("composer");
    await new Promise((resolve) => setTimeout(resolve, 400));
    const api = lastResponse("POST /query");
    expect(app.root.querySelector(".member-count")?.textContent).toBe(String(api.counts.true));
    expect(app.root.querySelector(".counter-count")?.textContent).toBe(String(api.counts.false));
    expect(app.root.querySelector(".preview-prob")?.textContent).toContain(`Pr=${api.probability}`);
    expect(app.root.querySelector(".preview-sdnf")?.textContent).toContain(api.sdnf);
  });

  it("applying Pr(A|B) >= 0.5 renders the +6 delta at the intersection node", async () => {
    const app = makeApp();
    await app.open("constraints");
    (app.root.querySelector(".constraint-input") as HTMLTextAreaElement).value = "Pr(A|B) >= 0.5";

    (app.root.querySelector("button.validate") as HTMLButtonElement).click();
    await new Promise((resolve) => setTimeout(resolve, 300));
    expect(app.root.querySelector(".constraint-feedback")?.textContent).toContain("acceptable");

    (app.root.querySelector("button.apply") as HTMLButtonElement).click();
    await new Promise((resolve) => setTimeout(resolve, 800));

    const api = lastResponse("POST /constraints/apply");
    expect(api.added).toHaveLength(6);
    expect(api.perNodeDelta).toEqual({ "a=1&b=1": 6 });

    const addedText = app.root.querySelector(".added-count")?.textContent ?? "";
    expect(addedText).toContain(`added ${api.added.length} virtual object(s)`);
    const deltaCell = app.root.querySelector(".delta-count[data-node='a=1&b=1']");
    expect(deltaCell?.textContent).toBe(String(api.perNodeDelta["a=1&b=1"]));
    expect(app.root.querySelector(".satisfaction")?.textContent).toContain("satisfied");
  });

  it("post-apply, the query panel shows the 8/16 extent the API reports", async () => {
    const app = makeApp();
    app.ctx.state.currentExpressionDraft = ["This in (A*B)"];
    await app.open("composer");
    await new Promise((resolve) => setTimeout(resolve, 400));
    const api = lastResponse("POST /query");
    expect(api.counts.true).toBe(8);
    expect(app.root.querySelector(".member-count")?.textContent).toBe("8");
    const b = await fetch(`${BASE}/query`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ expression: "B" }),
    }).then((r) => r.json());
    expect(b.counts.true).toBe(16);
  });

  it("describe panel fractions equal the API response", async () => {
    const app = makeApp();
    app.ctx.state.selectedOids.add("1");
    app.ctx.state.selectedOids.add("3");
    await app.open("description");
    const api = lastResponse("POST /describe");
    for (const [name, fraction] of Object.entries(api.perClassMembership)) {
      const cell = app.root.querySelector(`.membership-fraction[data-class='${name}']`);
      expect(cell?.textContent).toBe(fraction);
    }
  });

  it("hierarchy panel counts equal the API response", async () => {
    const app = makeApp();
    await app.open("hierarchy");
    const api = lastResponse("GET /hierarchy");
    for (const node of api.nodes) {
      const card = app.root.querySelector(`.hierarchy-node[data-key='${node.key}']`);
      expect(card?.textContent).toContain(
        `true ${node.extentCounts.true} / false ${node.extentCounts.false} / unknown ${node.extentCounts.unknown}`,
      );
    }
  });

  it("the whole session is exportable as a recorded call list", async () => {
    const app = makeApp();
    await app.open("grid");
    await app.open("implications");
    const script = JSON.parse(app.ctx.api.exportScript());
    expect(script.length).toBeGreaterThanOrEqual(2);
    for (const call of script) {
      expect(call).toHaveProperty("method");
      expect(call).toHaveProperty("path");
      expect(call).toHaveProperty("status");
    }
  });

  it("stale panels are badged after the revision moves", async () => {
    const app = makeApp();
    await app.open("grid");
    await fetch(`${BASE}/objects`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ attributes: {} }),
    });
    await app.pollRevision();
    const badge = app.root.querySelector(".panel-badge[data-panel='grid']");
    expect(badge?.classList.contains("stale")).toBe(true);
    expect(badge?.textContent).toContain("(stale)");
  });
});
