/**
 * Probability-constraint editor: one constraint per line, inline
 * validation naming the forbidden type, apply with the virtual-object
 * ledger delta rendered exactly as the server reported it.
 */

import { ApplyResult } from "../api";
import { Ctx } from "../context";
import { clear, el, table } from "../dom";

export async function renderConstraints(container: HTMLElement, ctx: Ctx): Promise<void> {
  clear(container);
  const input = el("textarea", {
    class: "constraint-input",
    placeholder: "Pr(A|B) >= 0.3  (one per line)",
    rows: 4,
  } as any);
  input.value = ctx.state.constraintDraft;
  input.oninput = () => {
    ctx.state.constraintDraft = input.value;
  };
  const validateButton = el("button", { class: "validate" }, ["Validate"]);
  const applyButton = el("button", { class: "apply" }, ["Apply"]);
  const feedback = el("div", { class: "constraint-feedback" });
  const delta = el("div", { class: "ledger-delta" });
  container.append(input, el("div", {}, [validateButton, applyButton]), feedback, delta);
  if (ctx.state.lastApply) {
    renderDelta(delta, ctx.state.lastApply as ApplyResult);
  }

  const lines = () =>
    input.value
      .split("\n")
      .map((l) => l.trim())
      .filter(Boolean);

  validateButton.onclick = async () => {
    try {
      const result = await ctx.api.validateConstraints(lines());
      ctx.state.markRendered("constraints", result.revision);
      clear(feedback);
      if (result.valid) {
        feedback.append(el("p", { class: "valid" }, ["constraints are acceptable"]));
      } else {
        feedback.append(
          el(
            "ul",
            { class: "violations" },
            result.violations.map((v) =>
              el("li", { class: `violation type-${String(v.type)}` }, [
                `Type ${String(v.type)}: ${v.message}`,
              ]),
            ),
          ),
        );
      }
    } catch (err) {
      ctx.showError(err);
    }
  };

  applyButton.onclick = async () => {
    try {
      ctx.state.constraintDraft = input.value;
      const result = await ctx.api.applyConstraints(lines());
      ctx.state.markRendered("constraints", result.revision);
      ctx.state.lastApply = result;
      await ctx.refresh(); // re-renders this panel, which restores the delta
    } catch (err) {
      ctx.showError(err);
    }
  };
}

export function renderDelta(target: HTMLElement, result: ApplyResult): void {
  clear(target);
  target.append(
    el("h3", {}, ["virtual-object ledger delta"]),
    el("div", { class: "added-count" }, [`added ${String(result.added.length)} virtual object(s)`]),
    table(
      ["node", "delta"],
      Object.entries(result.perNodeDelta).map(([node, count]) => [
        el("span", { class: "delta-node" }, [node]),
        el("span", { class: "delta-count", "data-node": node }, [String(count)]),
      ]),
      { class: "delta-table" },
    ),
    el(
      "ul",
      { class: "moves" },
      result.moved.map((m) => el("li", {}, [`${m.oid}: ${m.from} -> ${m.to}`])),
    ),
    el(
      "ul",
      { class: "satisfaction" },
      result.satisfaction.map((s) =>
        el("li", { class: s.satisfied ? "satisfied" : "violated" }, [
          `${s.constraint}: ${s.satisfied ? "satisfied" : "VIOLATED"}`,
        ]),
      ),
    ),
  );
}
