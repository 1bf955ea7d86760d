/**
 * Stage board: five cards with statuses, a Run button per stage, and
 * the two rollback controls. Buttons are enabled exactly when the API
 * would accept the call (see gating.ts); errors and stale-version
 * conflicts surface as a banner.
 */

import { Controller } from "../controller.js";
import { rollbackable, runnable } from "../gating.js";
import { Model, Snapshot } from "../model.js";
import { ROLLBACK_EDGES, STAGES } from "../types.js";

const STAGE_TITLES: Record<string, string> = {
  S1: "corpus selection",
  S2: "linguistic analysis",
  S3: "term extraction",
  S4: "ontology integration",
  S5: "index and archive",
};

export class StagePanel {
  constructor(
    private root: HTMLElement,
    private model: Model,
    private controller: Controller,
  ) {
    model.subscribe((snapshot) => this.render(snapshot));
    this.render(model.current());
  }

  render(snapshot: Snapshot): void {
    const project = snapshot.project;
    this.root.innerHTML = "";
    if (!project) {
      this.root.textContent = "no project loaded";
      return;
    }

    if (snapshot.notice) {
      const banner = document.createElement("div");
      banner.className = `banner banner-${snapshot.notice.severity}`;
      banner.textContent = snapshot.notice.text;
      if (snapshot.notice.severity === "stale") {
        const refresh = document.createElement("button");
        refresh.textContent = "refresh";
        refresh.onclick = () => void this.controller.refresh();
        banner.appendChild(refresh);
      }
      this.root.appendChild(banner);
    }

    const board = document.createElement("div");
    board.className = "stage-board";
    for (const stage of STAGES) {
      const record = project.stages[stage];
      const card = document.createElement("div");
      card.className = `stage-card status-${record.status}`;
      const title = document.createElement("h3");
      title.textContent = `${stage} · ${STAGE_TITLES[stage]}`;
      const status = document.createElement("p");
      status.textContent = record.status + (record.stale ? " (stale)" : "");
      if (record.diagnostic) {
        status.title = record.diagnostic;
        status.textContent += ` — ${record.diagnostic}`;
      }
      const run = document.createElement("button");
      run.textContent = "Run";
      run.disabled = snapshot.busy || !runnable(project, stage);
      run.dataset.stage = stage;
      run.onclick = () => void this.controller.runStage(stage);
      card.append(title, status, run);
      board.appendChild(card);
    }
    this.root.appendChild(board);

    const rollbacks = document.createElement("div");
    rollbacks.className = "rollback-row";
    const reason = document.createElement("input");
    reason.placeholder = "rollback reason";
    reason.className = "rollback-reason";
    rollbacks.appendChild(reason);
    for (const edge of ROLLBACK_EDGES) {
      const button = document.createElement("button");
      button.textContent = `Rollback ${edge}`;
      button.dataset.edge = edge;
      button.disabled = snapshot.busy || !rollbackable(project, edge);
      button.onclick = () => void this.controller.rollback(edge, reason.value || "via dashboard");
      rollbacks.appendChild(button);
    }
    this.root.appendChild(rollbacks);
  }
}
