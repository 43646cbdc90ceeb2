/**
 * Minimal description of the selected rows: the conjunct of decided
 * predicates plus the fraction of the selection inside each class.
 */

import { Ctx } from "../context";
import { clear, el, table } from "../dom";

export async function renderDescription(container: HTMLElement, ctx: Ctx): Promise<void> {
  clear(container);
  const oids = [...ctx.state.selectedOids].sort((a, b) => Number(a.replace("v", "")) - Number(b.replace("v", "")));
  if (oids.length === 0) {
    container.append(el("p", { class: "empty" }, ["select rows in the grid first"]));
    return;
  }
  const result = await ctx.api.describe(oids);
  ctx.state.markRendered("description", result.revision);
  container.append(
    el("div", { class: "panel-tag" }, [`description @ revision ${String(result.revision)}`]),
    el("div", { class: "described-oids" }, [`objects: ${oids.join(" ")}`]),
    el("div", { class: "description-conjunct" }, [result.description]),
    table(
      ["class", "membership fraction"],
      Object.entries(result.perClassMembership).map(([name, fraction]) => [
        name,
        el("span", { class: "membership-fraction", "data-class": name }, [fraction]),
      ]),
      { class: "membership-table" },
    ),
  );
}
