/**
 * ISA hierarchy: nodes in topological layers (top = any), each with its
 * member classes and extent counts; edges listed with their basis.
 */

import { HierarchyGraph } from "../api";
import { Ctx } from "../context";
import { clear, el } from "../dom";

export async function renderHierarchy(container: HTMLElement, ctx: Ctx): Promise<void> {
  const graph = await ctx.api.hierarchy();
  ctx.state.markRendered("hierarchy", graph.revision);
  clear(container);

  const layers = topologicalLayers(graph);
  container.append(
    el("div", { class: "panel-tag" }, [`hierarchy @ revision ${String(graph.revision)}`]),
    ...layers.map((layer, depth) =>
      el(
        "div",
        { class: "hierarchy-layer", "data-depth": String(depth) },
        layer.map((key) => nodeCard(graph, key)),
      ),
    ),
    el(
      "ul",
      { class: "hierarchy-edges" },
      graph.edges.map((edge) =>
        el("li", { class: edge.basis }, [`${edge.child} -> ${edge.parent} [${edge.basis}]`]),
      ),
    ),
  );
}

function nodeCard(graph: HierarchyGraph, key: string): HTMLElement {
  const node = graph.nodes.find((n) => n.key === key)!;
  return el("div", { class: "hierarchy-node", "data-key": key }, [
    el("div", { class: "node-members" }, [node.members.join(", ") || key]),
    el("div", { class: "node-intent" }, [key]),
    el("div", { class: "node-counts" }, [
      `true ${String(node.extentCounts.true)} / false ${String(node.extentCounts.false)}` +
        ` / unknown ${String(node.extentCounts.unknown)}`,
    ]),
  ]);
}

/** Layers by longest path from a top node (one with no parents). */
function topologicalLayers(graph: HierarchyGraph): string[][] {
  const parents = new Map<string, string[]>();
  for (const node of graph.nodes) parents.set(node.key, []);
  for (const edge of graph.edges) parents.get(edge.child)?.push(edge.parent);
  const depth = new Map<string, number>();
  const visiting = new Set<string>();

  const depthOf = (key: string): number => {
    const cached = depth.get(key);
    if (cached !== undefined) return cached;
    if (visiting.has(key)) return 0; // defensive: the server guarantees a DAG
    visiting.add(key);
    const ps = parents.get(key) ?? [];
    const d = ps.length === 0 ? 0 : 1 + Math.max(...ps.map(depthOf));
    visiting.delete(key);
    depth.set(key, d);
    return d;
  };

  const layers: string[][] = [];
  for (const node of graph.nodes) {
    const d = depthOf(node.key);
    while (layers.length <= d) layers.push([]);
    layers[d].push(node.key);
  }
  for (const layer of layers) layer.sort();
  return layers;
}
