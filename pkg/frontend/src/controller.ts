/**
 * The controller: translates user actions into API calls and folds the
 * acknowledged responses into the model. It never touches the DOM and
 * never stores state of its own beyond the api/model references, so any
 * view (real or scripted) drives the same code path.
 *
 * Every mutation sends the version token from the model's last snapshot;
 * a 409 becomes a "stale" notice prompting a refresh instead of a blind
 * retry.
 */

import { ApiClient } from "./api.js";
import { Model } from "./model.js";
import { ApiError, RollbackEdge, StageName } from "./types.js";

export class Controller {
  constructor(
    private api: ApiClient,
    private model: Model,
    private projectId: string,
  ) {}

  async refresh(): Promise<void> {
    const project = await this.api.getProject(this.projectId);
    this.model.setProject(project);
    await this.refreshPanels();
  }

  private async refreshPanels(): Promise<void> {
    const project = this.model.current().project;
    if (!project) return;
    if (["done", "needs_repeat"].includes(project.stages.S3.status)) {
      const { version, terms } = await this.api.listTerms(this.projectId);
      this.model.setTerms(version, terms);
    }
    if (project.stages.S4.status === "done" || Object.keys(project.stages.S4.artifacts).length) {
      const { graph } = await this.api.getOntology(this.projectId);
      this.model.setOntology(graph);
    }
  }

  private async mutation<T>(run: (version: number) => Promise<T>): Promise<T | null> {
    const version = this.model.version();
    if (version === null) {
      this.model.setNotice({ severity: "error", text: "no project loaded" });
      return null;
    }
    this.model.setBusy(true);
    try {
      return await run(version);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409 && err.errorType === "StaleVersion") {
        this.model.setNotice({
          severity: "stale",
          text: "someone else changed this project; refresh to continue",
        });
      } else if (err instanceof ApiError) {
        this.model.setNotice({ severity: "error", text: `${err.status} ${err.errorType}: ${err.message}` });
      } else {
        this.model.setNotice({ severity: "error", text: String(err) });
      }
      return null;
    } finally {
      this.model.setBusy(false);
    }
  }

  async runStage(stage: StageName): Promise<void> {
    const state = await this.mutation((version) => this.api.runStage(this.projectId, stage, version));
    if (state) {
      this.model.setProject(state);
      if (state.stage_failure) {
        this.model.setNotice({ severity: "error", text: `${stage} failed: ${state.stage_failure}` });
      }
      await this.refreshPanels();
    }
  }

  async rollback(edge: RollbackEdge, reason: string): Promise<void> {
    const state = await this.mutation((version) =>
      this.api.rollback(this.projectId, edge, reason, version),
    );
    if (state) this.model.setProject(state);
  }

  async decideTerm(termId: string, status: "accepted" | "rejected"): Promise<void> {
    const state = await this.mutation((version) =>
      this.api.decideTerm(this.projectId, termId, status, version),
    );
    if (state) {
      this.model.setProject(state);
      const { version, terms } = await this.api.listTerms(this.projectId);
      this.model.setTerms(version, terms);
    }
  }

  async addConcept(label: string, altLabels: string[]): Promise<void> {
    const state = await this.mutation((version) =>
      this.api.addConcept(this.projectId, label, altLabels, version),
    );
    if (state) await this.afterOntologyEdit(state);
  }

  async patchConcept(
    conceptId: string,
    patch: { preferred_label?: string; alt_labels?: string[]; definition?: string },
  ): Promise<void> {
    const state = await this.mutation((version) =>
      this.api.patchConcept(this.projectId, conceptId, patch, version),
    );
    if (state) await this.afterOntologyEdit(state);
  }

  async addRelation(kind: string, source: string, target: string, label?: string): Promise<void> {
    const state = await this.mutation((version) =>
      this.api.addRelation(this.projectId, { kind, source, target, label: label ?? null }, version),
    );
    if (state) await this.afterOntologyEdit(state);
  }

  async removeRelation(kind: string, source: string, target: string, label?: string): Promise<void> {
    const state = await this.mutation((version) =>
      this.api.removeRelation(this.projectId, { kind, source, target, label: label ?? null }, version),
    );
    if (state) await this.afterOntologyEdit(state);
  }

  async mergeWithLibrary(libraryRef: string): Promise<void> {
    const state = await this.mutation((version) =>
      this.api.mergeWithLibrary(this.projectId, libraryRef, version),
    );
    if (state) await this.afterOntologyEdit(state);
  }

  private async afterOntologyEdit(state: import("./types.js").ProjectState): Promise<void> {
    this.model.setProject(state);
    const { graph } = await this.api.getOntology(this.projectId);
    this.model.setOntology(graph);
  }

  async search(query: string, k = 10): Promise<void> {
    try {
      this.model.setSearch(await this.api.search(this.projectId, query, k));
    } catch (err) {
      if (err instanceof ApiError) {
        this.model.setNotice({ severity: "error", text: `${err.status} ${err.errorType}: ${err.message}` });
      } else throw err;
    }
  }
}
