/**
 * Typed client over the control API.
 *
 * Mutations carry the version token of the state they were decided on;
 * the server rejects stale tokens with 409. The client serializes
 * mutations (one in flight per project) so the token it sends is always
 * the one from the latest acknowledged response.
 */

import {
  ApiError,
  OntologyDto,
  ProjectState,
  RollbackEdge,
  SearchResults,
  StageName,
  TermRow,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private mutationChain: Promise<unknown> = Promise.resolve();

  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "Content-Type": "application/json" } };
    if (body !== undefined) init.body = JSON.stringify(body);
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const text = await response.text();
    const payload = text ? JSON.parse(text) : null;
    if (!response.ok) {
      const errorType = payload?.type ?? "HttpError";
      const message = payload?.error ?? payload?.detail ?? response.statusText;
      throw new ApiError(response.status, errorType, String(message));
    }
    return payload as T;
  }

  /** Serialize mutations: at most one in flight per client. */
  private mutate<T>(run: () => Promise<T>): Promise<T> {
    const next = this.mutationChain.then(run, run);
    this.mutationChain = next.catch(() => undefined);
    return next;
  }

  listProjects(): Promise<ProjectState[]> {
    return this.request("GET", "/projects");
  }

  getProject(id: string): Promise<ProjectState> {
    return this.request("GET", `/projects/${id}`);
  }

  createProject(domainName: string, config: Record<string, unknown>): Promise<ProjectState> {
    return this.mutate(() =>
      this.request("POST", "/projects", { domain_name: domainName, config }),
    );
  }

  runStage(id: string, stage: StageName, version: number): Promise<ProjectState & { stage_failure?: string }> {
    return this.mutate(() =>
      this.request("POST", `/projects/${id}/stages/${stage}/run`, { version }),
    );
  }

  rollback(id: string, edge: RollbackEdge, reason: string, version: number): Promise<ProjectState> {
    return this.mutate(() =>
      this.request("POST", `/projects/${id}/rollback`, { edge, reason, version }),
    );
  }

  listTerms(id: string, status?: string): Promise<{ version: number; terms: TermRow[] }> {
    const query = status ? `?status=${encodeURIComponent(status)}` : "";
    return this.request("GET", `/projects/${id}/terms${query}`);
  }

  decideTerm(id: string, termId: string, status: "accepted" | "rejected", version: number): Promise<ProjectState> {
    return this.mutate(() =>
      this.request("POST", `/projects/${id}/terms/${termId}/decision`, { status, version }),
    );
  }

  getOntology(id: string): Promise<{ version: number; graph: OntologyDto }> {
    return this.request("GET", `/projects/${id}/ontology`);
  }

  addConcept(id: string, label: string, altLabels: string[], version: number): Promise<ProjectState> {
    return this.mutate(() =>
      this.request("POST", `/projects/${id}/ontology/concepts`, {
        label,
        alt_labels: altLabels,
        version,
      }),
    );
  }

  patchConcept(
    id: string,
    conceptId: string,
    patch: { preferred_label?: string; alt_labels?: string[]; definition?: string },
    version: number,
  ): Promise<ProjectState> {
    return this.mutate(() =>
      this.request("PATCH", `/projects/${id}/ontology/concepts/${conceptId}`, { ...patch, version }),
    );
  }

  addRelation(
    id: string,
    relation: { kind: string; source: string; target: string; label?: string | null },
    version: number,
  ): Promise<ProjectState> {
    return this.mutate(() =>
      this.request("POST", `/projects/${id}/ontology/relations`, { ...relation, version }),
    );
  }

  removeRelation(
    id: string,
    relation: { kind: string; source: string; target: string; label?: string | null },
    version: number,
  ): Promise<ProjectState> {
    return this.mutate(() =>
      this.request("POST", `/projects/${id}/ontology/relations/remove`, { ...relation, version }),
    );
  }

  mergeWithLibrary(id: string, libraryRef: string, version: number): Promise<ProjectState> {
    return this.mutate(() =>
      this.request("POST", `/projects/${id}/ontology/merge`, { library_ref: libraryRef, version }),
    );
  }

  search(id: string, query: string, k = 10): Promise<SearchResults> {
    return this.request("GET", `/projects/${id}/search?q=${encodeURIComponent(query)}&k=${k}`);
  }
}
