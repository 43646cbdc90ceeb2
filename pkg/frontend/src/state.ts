/**
 * Per-tab session state: which revision each rendered panel observed,
 * the class-composer draft, and the current row selection.  A panel is
 * stale once the server revision moves past the one it rendered from.
 */

export class SessionState {
  observedRevision = -1;
  currentExpressionDraft: string[] = [];
  selectedOids = new Set<string>();
  activeReport: string | null = null;
  hiddenAttributes = new Set<string>();
  constraintDraft = "";
  lastApply: unknown = null;
  private rendered = new Map<string, number>();

  constructor(readonly serverUrl: string) {}

  noteRevision(revision: number): void {
    if (revision > this.observedRevision) this.observedRevision = revision;
  }

  markRendered(panel: string, revision: number): void {
    this.rendered.set(panel, revision);
    this.noteRevision(revision);
  }

  renderedRevision(panel: string): number | undefined {
    return this.rendered.get(panel);
  }

  isStale(panel: string): boolean {
    const seen = this.rendered.get(panel);
    return seen !== undefined && seen < this.observedRevision;
  }

  toggleSelected(oid: string): void {
    if (this.selectedOids.has(oid)) this.selectedOids.delete(oid);
    else this.selectedOids.add(oid);
  }

  draftExpression(): string {
    if (this.currentExpressionDraft.length === 0) return "any";
    return "any where " + this.currentExpressionDraft.join(" & ");
  }
}
