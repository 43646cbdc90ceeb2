/**
 * Class composer: accumulates attribute constraints into a draft class,
 * previews its extent live (members and counterexamples straight from
 * the query response), lets the user name it, and composes the draft
 * with existing classes through union / intersection / difference.
 */

import { Ctx } from "../context";
import { clear, debounce, el, table } from "../dom";

export async function renderComposer(container: HTMLElement, ctx: Ctx): Promise<void> {
  clear(container);
  const draftText = ctx.state.draftExpression();

  const constraintList = el(
    "ul",
    { class: "draft-constraints" },
    ctx.state.currentExpressionDraft.map((text, index) => {
      const remove = el("button", {}, ["x"]);
      remove.onclick = () => {
        ctx.state.currentExpressionDraft.splice(index, 1);
        void ctx.refresh();
      };
      return el("li", {}, [text, " ", remove]);
    }),
  );

  const preview = el("div", { class: "extent-preview" }, ["previewing..."]);
  const nameInput = el("input", { placeholder: "class name", class: "class-name" });
  const defineButton = el("button", { class: "define-class" }, ["Define class"]);
  const combineSelect = el("select", { class: "combine-class" });
  const combineOp = el("select", { class: "combine-op" }, [
    el("option", { value: "+" }, ["Union..."]),
    el("option", { value: "*" }, ["Intersection..."]),
    el("option", { value: "-" }, ["Difference..."]),
  ]);
  const combineButton = el("button", { class: "combine" }, ["Combine"]);
  const status = el("div", { class: "composer-status" });

  container.append(
    el("div", { class: "draft-text" }, [`draft: ${draftText}`]),
    constraintList,
    preview,
    el("div", {}, [nameInput, defineButton]),
    el("div", {}, [combineOp, combineSelect, combineButton]),
    status,
  );

  const classes = await ctx.api.listClasses();
  for (const cls of classes.classes) {
    combineSelect.append(el("option", { value: cls.name }, [cls.name]));
  }

  const runPreview = async () => {
    try {
      const result = await ctx.api.query(draftText, 0, 25);
      ctx.state.markRendered("composer", result.revision);
      clear(preview);
      preview.append(
        el("div", { class: "preview-sdnf" }, [`canonical: ${result.sdnf}`]),
        table(
          ["", "count", "first oids"],
          [
            ["members", el("span", { class: "member-count" }, [String(result.counts.true)]), result.trueSet.join(" ")],
            ["counterexamples", el("span", { class: "counter-count" }, [String(result.counts.false)]), result.falseSet.join(" ")],
            ["unknown", String(result.counts.unknown), result.unknownSet.join(" ")],
          ],
          { class: "preview-table" },
        ),
        el("div", { class: "preview-prob" }, [
          `Pr=${result.probability} interval=[${result.beliefInterval[0]}, ${result.beliefInterval[1]}]`,
        ]),
      );
    } catch (err) {
      ctx.showError(err);
    }
  };
  debounce(() => void runPreview(), 150)();

  defineButton.onclick = async () => {
    try {
      const defined = await ctx.api.defineClass(nameInput.value.trim(), draftText);
      status.textContent = `defined ${defined.name} = ${defined.sdnf} (true count ${String(defined.extentCounts.true)})`;
      ctx.state.currentExpressionDraft = [];
      await ctx.refresh();
    } catch (err) {
      ctx.showError(err);
    }
  };

  combineButton.onclick = async () => {
    const other = combineSelect.value;
    if (!other) return;
    ctx.state.currentExpressionDraft = [
      `This in ((${ctx.state.draftExpression()})${combineOp.value}${other})`,
    ];
    await ctx.refresh();
  };
}
