/**
 * Wire types mirrored from the control API. The dashboard never invents
 * fields of its own: everything rendered is derived from the last
 * response the server acknowledged.
 */

export type StageName = "S1" | "S2" | "S3" | "S4" | "S5";

export const STAGES: StageName[] = ["S1", "S2", "S3", "S4", "S5"];

export type StageStatus = "pending" | "running" | "done" | "needs_repeat" | "failed";

export interface StageRecord {
  status: StageStatus;
  started_at: string | null;
  finished_at: string | null;
  artifacts: Record<string, string>;
  stale: boolean;
  diagnostic: string | null;
}

export interface ProjectState {
  project_id: string;
  domain_name: string;
  version: number;
  config: Record<string, unknown>;
  stages: Record<StageName, StageRecord>;
}

export interface TermRow {
  term_id: string;
  surface: string;
  lemma_ids: string[];
  frequency: number;
  doc_count: number;
  status: "candidate" | "accepted" | "rejected";
}

export interface ConceptDto {
  concept_id: string;
  preferred_label: string;
  alt_labels: string[];
  definition: string | null;
}

export interface RelationDto {
  kind: "is_a" | "part_of" | "assoc";
  source: string;
  target: string;
  label: string | null;
}

export interface OntologyDto {
  graph_id: string;
  domain_name: string;
  version: number;
  concepts: ConceptDto[];
  relations: RelationDto[];
}

export interface SearchHitDto {
  kind: "document" | "term" | "concept";
  target_id: string;
  score: number;
  snippet: string | null;
}

export interface SearchResults {
  documents: SearchHitDto[];
  terms: SearchHitDto[];
  concepts: SearchHitDto[];
}

export type RollbackEdge = "S2toS1" | "S3toS2";

export const ROLLBACK_EDGES: RollbackEdge[] = ["S2toS1", "S3toS2"];

export class ApiError extends Error {
  constructor(
    public status: number,
    public errorType: string,
    message: string,
  ) {
    super(message);
  }
}
