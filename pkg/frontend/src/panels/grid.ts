/**
 * Object grid: one row per object, one column per attribute.  Clicking an
 * attribute header opens a small constraint builder that appends to the
 * class composer's draft; Hide removes the column (projection); clicking
 * a row toggles its selection for descriptions and relation edges.
 */

import { valueText, ObjectRow } from "../api";
import { Ctx } from "../context";
import { clear, el } from "../dom";

const RELOPS = ["<", "<=", ">", ">=", "=", "~<", "~<=", "~>", "~>=", "~="];

export async function renderGrid(container: HTMLElement, ctx: Ctx): Promise<void> {
  const payload = await ctx.api.listObjects();
  ctx.state.markRendered("grid", payload.revision);
  clear(container);

  const attrs = attributeColumns(payload.objects).filter(
    (a) => !ctx.state.hiddenAttributes.has(a),
  );
  const header = el("tr", {}, [
    el("th", {}, ["oid"]),
    ...attrs.map((attr) =>
      el("th", { "data-attr": attr }, [
        el("button", { class: "attr-name", onclick: () => toggleBuilder(attr) } as any, [attr]),
        el("button", { class: "hide-attr", title: `hide ${attr}`, onclick: () => hide(attr) } as any, ["Hide"]),
      ]),
    ),
  ]);

  const builderRow = el("tr", { class: "builder-row" });
  const body = el("tbody", {}, [
    ...payload.objects.map((row) => objectRow(row, attrs, ctx)),
  ]);
  const table = el("table", { class: "grid" }, [
    el("thead", {}, [header, builderRow]),
    body,
  ]);
  container.append(
    el("div", { class: "panel-tag" }, [`objects @ revision ${String(payload.revision)}`]),
    table,
  );

  function hide(attr: string): void {
    ctx.state.hiddenAttributes.add(attr);
    void renderGrid(container, ctx);
  }

  function toggleBuilder(attr: string): void {
    clear(builderRow as unknown as HTMLElement);
    const op = el("select", {}, RELOPS.map((o) => el("option", { value: o }, [o])));
    const constant = el("input", { placeholder: "constant" });
    const add = el("button", {}, ["add to draft"]);
    add.onclick = () => {
      const value = constant.value.trim();
      if (!value) return;
      ctx.state.currentExpressionDraft.push(`${attr}${op.value}${value}`);
      clear(builderRow as unknown as HTMLElement);
      void ctx.refresh();
    };
    builderRow.append(
      el("td", { colSpan: String(1 + attrs.length) } as any, [
        el("span", {}, [`constraint on ${attr}: `]),
        op,
        constant,
        add,
      ]),
    );
  }
}

function attributeColumns(objects: ObjectRow[]): string[] {
  const names = new Set<string>();
  for (const row of objects) for (const attr of Object.keys(row.attributes)) names.add(attr);
  return [...names].sort();
}

function objectRow(row: ObjectRow, attrs: string[], ctx: Ctx): HTMLTableRowElement {
  const selected = ctx.state.selectedOids.has(row.oid);
  const tr = el("tr", { class: selected ? "selected" : "", "data-oid": row.oid }, [
    el("td", {}, [selected ? `▶ ${row.oid}` : row.oid]),
    ...attrs.map((attr) =>
      el("td", { "data-attr": attr }, [
        (row.attributes[attr] ?? []).map(valueText).join(", "),
      ]),
    ),
  ]);
  tr.onclick = () => {
    ctx.state.toggleSelected(row.oid);
    void ctx.refresh();
  };
  return tr;
}
