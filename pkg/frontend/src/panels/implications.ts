/** The four implication-report lists, rendered verbatim. */

import { Ctx } from "../context";
import { clear, el } from "../dom";

export async function renderImplications(container: HTMLElement, ctx: Ctx): Promise<void> {
  const report = await ctx.api.implications();
  ctx.state.markRendered("implications", report.revision);
  ctx.state.activeReport = "implications";
  clear(container);

  const section = (title: string, cls: string, pairs: [string, string][], arrow: string) =>
    el("div", { class: `report-section ${cls}` }, [
      el("h3", {}, [title]),
      pairs.length
        ? el("ul", {}, pairs.map(([a, b]) => el("li", {}, [`${a} ${arrow} ${b}`])))
        : el("p", { class: "empty" }, ["none"]),
    ]);

  container.append(
    el("div", { class: "panel-tag" }, [`implications @ revision ${String(report.revision)}`]),
    section("Logical equivalences", "logical-equivalences", report.logicalEquivalences, "="),
    section("Equivalences for the database", "database-equivalences", report.databaseEquivalences, "="),
    section("Logical implications", "logical-implications", report.logicalImplications, "->"),
    section("Implications for the database", "database-implications", report.databaseImplications, "->"),
  );
}
