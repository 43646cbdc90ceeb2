/**
 * Typed client for the reasoning server.
 *
 * Every request is appended to an action log, so any UI session can be
 * exported as a replayable list of API calls; the panels never compute
 * reasoning results themselves, they only render fields of these
 * responses.
 */

export type AttrValue = string | { n: string };

export interface ObjectRow {
  oid: string;
  attributes: Record<string, AttrValue[]>;
}

export interface ExtentCounts {
  true: number;
  false: number;
  unknown: number;
}

export interface QueryResult {
  sdnf: string;
  trueSet: string[];
  falseSet: string[];
  unknownSet: string[];
  counts: ExtentCounts;
  nextCursor: number | null;
  probability: string;
  beliefInterval: [string, string];
  revision: number;
}

export interface ImplicationReport {
  revision: number;
  logicalEquivalences: [string, string][];
  databaseEquivalences: [string, string][];
  logicalImplications: [string, string][];
  databaseImplications: [string, string][];
}

export interface DescribeResult {
  revision: number;
  description: string;
  literals: string[];
  perClassMembership: Record<string, string>;
}

export interface HierarchyNode {
  key: string;
  members: string[];
  extentCounts: ExtentCounts;
}

export interface HierarchyEdge {
  child: string;
  parent: string;
  basis: "logical" | "databaseOnly";
}

export interface HierarchyGraph {
  revision: number;
  nodes: HierarchyNode[];
  edges: HierarchyEdge[];
}

export interface ValidationResult {
  valid: boolean;
  violations: { type: number; message: string }[];
  revision: number;
}

export interface ApplyResult {
  revision: number;
  added: { oid: string; home: string }[];
  moved: { oid: string; from: string; to: string }[];
  perNodeDelta: Record<string, number>;
  satisfaction: { constraint: string; satisfied: boolean }[];
}

export interface SummaryResult {
  revision: number;
  attr: string;
  groups: {
    value: AttrValue;
    count: number;
    aggregates: Record<string, Record<string, string | number>>;
  }[];
}

export interface ClassInfo {
  name: string;
  sdnf: string;
}

export interface RecordedCall {
  method: string;
  path: string;
  body?: unknown;
  status: number;
  revision?: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly position?: number,
  ) {
    super(message);
  }
}

export class ApiClient {
  readonly log: RecordedCall[] = [];

  constructor(readonly baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown, ifMatch?: number): Promise<T> {
    const headers: Record<string, string> = { "content-type": "application/json" };
    if (ifMatch !== undefined) headers["if-match"] = String(ifMatch);
    const response = await fetch(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload: any = await response.json();
    this.log.push({
      method,
      path,
      body,
      status: response.status,
      revision: typeof payload?.revision === "number" ? payload.revision : undefined,
    });
    if (!response.ok) {
      throw new ApiError(
        response.status,
        String(payload?.code ?? "HttpError"),
        String(payload?.message ?? response.statusText),
        payload?.position,
      );
    }
    return payload as T;
  }

  /** The session as a replayable script (reproducibility invariant). */
  exportScript(): string {
    return JSON.stringify(this.log, null, 2);
  }

  health() {
    return this.request<{ status: string }>("GET", "/health");
  }

  revision() {
    return this.request<{ revision: number }>("GET", "/revision");
  }

  listObjects() {
    return this.request<{ revision: number; objects: ObjectRow[] }>("GET", "/objects");
  }

  createObject(attributes: Record<string, AttrValue[]>, ifMatch?: number) {
    return this.request<{ oid: string; revision: number }>("POST", "/objects", { attributes }, ifMatch);
  }

  deleteObject(oid: string, ifMatch?: number) {
    return this.request<{ revision: number }>("DELETE", `/objects/${oid}`, undefined, ifMatch);
  }

  patchObject(oid: string, attributes: Record<string, AttrValue[]>, ifMatch?: number) {
    return this.request<{ oid: string; revision: number }>("PATCH", `/objects/${oid}`, { attributes }, ifMatch);
  }

  listClasses() {
    return this.request<{ revision: number; classes: ClassInfo[] }>("GET", "/classes");
  }

  defineClass(name: string, expression: string, ifMatch?: number) {
    return this.request<{ name: string; sdnf: string; extentCounts: ExtentCounts; revision: number }>(
      "POST",
      "/classes",
      { name, expression },
      ifMatch,
    );
  }

  classExtent(name: string, cursor = 0, limit = 200) {
    return this.request<QueryResult>("GET", `/classes/${name}/extent?cursor=${cursor}&limit=${limit}`);
  }

  query(expression: string, cursor = 0, limit = 200) {
    return this.request<QueryResult>("POST", "/query", { expression, cursor, limit });
  }

  implications() {
    return this.request<ImplicationReport>("GET", "/report/implications");
  }

  describe(oids: string[]) {
    return this.request<DescribeResult>("POST", "/describe", { oids });
  }

  hierarchy() {
    return this.request<HierarchyGraph>("GET", "/hierarchy");
  }

  summarize(attr: string) {
    return this.request<SummaryResult>("GET", `/summarize?attr=${encodeURIComponent(attr)}`);
  }

  listRelations() {
    return this.request<{ revision: number; relations: any[] }>("GET", "/relations");
  }

  defineRelation(body: Record<string, unknown>, ifMatch?: number) {
    return this.request<{ name: string; revision: number }>("POST", "/relations", body, ifMatch);
  }

  addEdges(name: string, edges: [string, string][], ifMatch?: number) {
    return this.request<{ name: string; revision: number }>(
      "POST",
      `/relations/${name}/edges`,
      { edges },
      ifMatch,
    );
  }

  validateConstraints(constraints: string[]) {
    return this.request<ValidationResult>("POST", "/constraints", { constraints });
  }

  applyConstraints(constraints: string[], ifMatch?: number) {
    return this.request<ApplyResult>("POST", "/constraints/apply", { constraints }, ifMatch);
  }
}

/** Render an attribute value exactly as the server encoded it. */
export function valueText(v: AttrValue): string {
  return typeof v === "string" ? JSON.stringify(v) : v.n;
}
