/**
 * Control gating: pure mirrors of the server's preconditions.
 *
 * A control is enabled only when the equivalent API call cannot be
 * rejected deterministically (ordering, already-done, invalid edge).
 * The server stays authoritative; these checks only decide what to
 * offer, never what happened.
 */

import { ProjectState, ROLLBACK_EDGES, RollbackEdge, STAGES, StageName } from "./types.js";

export function runnable(project: ProjectState, stage: StageName): boolean {
  const records = project.stages;
  if (STAGES.some((name) => records[name].status === "running")) return false;
  for (const name of STAGES.slice(0, STAGES.indexOf(stage))) {
    if (records[name].status !== "done") return false;
  }
  return records[stage].status !== "done";
}

export function rollbackable(project: ProjectState, edge: RollbackEdge): boolean {
  if (!ROLLBACK_EDGES.includes(edge)) return false;
  const from: StageName = edge === "S2toS1" ? "S2" : "S3";
  const status = project.stages[from].status;
  return status === "done" || status === "failed";
}

export function termsAvailable(project: ProjectState): boolean {
  const s3 = project.stages.S3.status;
  return s3 === "done" || s3 === "needs_repeat";
}

export function ontologyAvailable(project: ProjectState): boolean {
  // S4 has run at least once iff it recorded artifacts
  const s4 = project.stages.S4;
  return s4.status === "done" || Object.keys(s4.artifacts).length > 0;
}

export function searchAvailable(project: ProjectState): boolean {
  const s5 = project.stages.S5;
  return s5.status === "done" || Object.keys(s5.artifacts).length > 0;
}

export function isaCycleLocally(
  relations: { kind: string; source: string; target: string }[],
  source: string,
  target: string,
): boolean {
  // used only to annotate the UI before the server answers; the server
  // check remains authoritative
  if (source === target) return true;
  const next = new Map<string, string[]>();
  for (const rel of relations) {
    if (rel.kind !== "is_a") continue;
    const out = next.get(rel.source) ?? [];
    out.push(rel.target);
    next.set(rel.source, out);
  }
  const seen = new Set<string>();
  const stack = [target];
  while (stack.length) {
    const node = stack.pop()!;
    if (node === source) return true;
    if (seen.has(node)) continue;
    seen.add(node);
    for (const out of next.get(node) ?? []) stack.push(out);
  }
  return false;
}
