/**
 * The model: the last server-acknowledged snapshots plus transient UI
 * notices. Views register as listeners and re-render on every change;
 * the model knows nothing about how it is displayed. Only the
 * controller writes to it, and only with data the API returned.
 */

import { OntologyDto, ProjectState, SearchResults, TermRow } from "./types.js";

export interface Notice {
  severity: "info" | "error" | "stale";
  text: string;
}

export interface Snapshot {
  project: ProjectState | null;
  terms: TermRow[];
  termsVersion: number | null;
  ontology: OntologyDto | null;
  search: SearchResults | null;
  notice: Notice | null;
  busy: boolean;
}

export type Listener = (snapshot: Snapshot) => void;

export class Model {
  private snapshot: Snapshot = {
    project: null,
    terms: [],
    termsVersion: null,
    ontology: null,
    search: null,
    notice: null,
    busy: false,
  };
  private listeners: Listener[] = [];

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  current(): Snapshot {
    return this.snapshot;
  }

  /** The optimistic-lock token mutations must carry. */
  version(): number | null {
    return this.snapshot.project?.version ?? null;
  }

  private notify(): void {
    for (const listener of [...this.listeners]) listener(this.snapshot);
  }

  private patch(partial: Partial<Snapshot>): void {
    this.snapshot = { ...this.snapshot, ...partial };
    this.notify();
  }

  setProject(project: ProjectState): void {
    this.patch({ project, notice: null });
  }

  setBusy(busy: boolean): void {
    this.patch({ busy });
  }

  setTerms(version: number, terms: TermRow[]): void {
    this.patch({ termsVersion: version, terms });
  }

  setOntology(ontology: OntologyDto): void {
    this.patch({ ontology });
  }

  setSearch(results: SearchResults): void {
    this.patch({ search: results });
  }

  setNotice(notice: Notice | null): void {
    this.patch({ notice });
  }
}
