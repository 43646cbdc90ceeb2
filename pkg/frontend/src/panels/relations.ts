/**
 * Relation editor: pick source rows and target rows (s/t indicators),
 * add explicit edges, or define class / composite relations.
 */

import { Ctx } from "../context";
import { clear, el } from "../dom";

export async function renderRelations(container: HTMLElement, ctx: Ctx): Promise<void> {
  clear(container);
  const [objects, relations] = await Promise.all([ctx.api.listObjects(), ctx.api.listRelations()]);
  ctx.state.markRendered("relations", relations.revision);

  const name = el("input", { placeholder: "relation name", class: "relation-name" });
  const sources = el("select", { multiple: true, class: "edge-sources" } as any);
  const targets = el("select", { multiple: true, class: "edge-targets" } as any);
  for (const row of objects.objects) {
    sources.append(el("option", { value: row.oid }, [`s ${row.oid}`]));
    targets.append(el("option", { value: row.oid }, [`t ${row.oid}`]));
  }
  const addEdges = el("button", { class: "add-edges" }, ["Add Edges"]);
  addEdges.onclick = async () => {
    const pairs: [string, string][] = [];
    for (const s of [...sources.selectedOptions].map((o) => o.value)) {
      for (const t of [...targets.selectedOptions].map((o) => o.value)) {
        pairs.push([s, t]);
      }
    }
    try {
      await ctx.api.addEdges(name.value.trim(), pairs);
      await ctx.refresh();
    } catch (err) {
      ctx.showError(err);
    }
  };

  const domain = el("input", { placeholder: "domain class expression" });
  const range = el("input", { placeholder: "range class expression" });
  const defineClassRel = el("button", {}, ["Define class relation"]);
  defineClassRel.onclick = async () => {
    try {
      await ctx.api.defineRelation({
        name: name.value.trim(),
        variant: "class",
        domain: domain.value.trim(),
        range: range.value.trim(),
      });
      await ctx.refresh();
    } catch (err) {
      ctx.showError(err);
    }
  };

  const path = el("input", { placeholder: "dotted path, e.g. parent.parent" });
  const defineComposite = el("button", {}, ["Define composite"]);
  defineComposite.onclick = async () => {
    try {
      await ctx.api.defineRelation({
        name: name.value.trim(),
        variant: "composite",
        path: path.value.split(".").map((s) => s.trim()).filter(Boolean),
      });
      await ctx.refresh();
    } catch (err) {
      ctx.showError(err);
    }
  };

  container.append(
    el("div", { class: "panel-tag" }, [`relations @ revision ${String(relations.revision)}`]),
    el("div", {}, [name]),
    el("div", { class: "edge-builder" }, [sources, targets, addEdges]),
    el("div", {}, [domain, range, defineClassRel]),
    el("div", {}, [path, defineComposite]),
    el(
      "ul",
      { class: "relation-list" },
      relations.relations.map((rel: any) =>
        el("li", {}, [
          `${rel.name} (${rel.variant})` +
            (rel.variant === "explicit" ? ` ${String(rel.edges.length)} edge(s)` : ""),
        ]),
      ),
    ),
  );
}
