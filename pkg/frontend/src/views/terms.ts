/**
 * Term curation: paginated candidate list in the server's display
 * ranking, with accept/reject buttons. Decisions move rows between the
 * lists as soon as the server acknowledges them (the model is only fed
 * from responses).
 */

import { Controller } from "../controller.js";
import { termsAvailable } from "../gating.js";
import { Model, Snapshot } from "../model.js";
import { TermRow } from "../types.js";

const PAGE_SIZE = 15;

export class TermReview {
  private page = 0;
  private filter: "candidate" | "accepted" | "rejected" = "candidate";

  constructor(
    private root: HTMLElement,
    private model: Model,
    private controller: Controller,
  ) {
    model.subscribe((snapshot) => this.render(snapshot));
    this.render(model.current());
  }

  render(snapshot: Snapshot): void {
    this.root.innerHTML = "";
    const project = snapshot.project;
    if (!project || !termsAvailable(project)) {
      this.root.textContent = "run S3 to extract term candidates";
      return;
    }
    const rows = snapshot.terms.filter((t) => t.status === this.filter);
    if (!snapshot.terms.length) {
      this.root.textContent = "no candidates were extracted";
      return;
    }

    const tabs = document.createElement("div");
    tabs.className = "tabs";
    for (const status of ["candidate", "accepted", "rejected"] as const) {
      const tab = document.createElement("button");
      const count = snapshot.terms.filter((t) => t.status === status).length;
      tab.textContent = `${status} (${count})`;
      tab.className = status === this.filter ? "tab active" : "tab";
      tab.onclick = () => {
        this.filter = status;
        this.page = 0;
        this.render(this.model.current());
      };
      tabs.appendChild(tab);
    }
    this.root.appendChild(tabs);

    const pages = Math.max(1, Math.ceil(rows.length / PAGE_SIZE));
    this.page = Math.min(this.page, pages - 1);
    const table = document.createElement("table");
    table.className = "term-table";
    table.innerHTML =
      "<thead><tr><th>term</th><th>freq</th><th>docs</th><th></th></tr></thead>";
    const body = document.createElement("tbody");
    for (const term of rows.slice(this.page * PAGE_SIZE, (this.page + 1) * PAGE_SIZE)) {
      body.appendChild(this.row(term, snapshot.busy));
    }
    table.appendChild(body);
    this.root.appendChild(table);

    if (pages > 1) {
      const nav = document.createElement("div");
      nav.className = "pager";
      const prev = document.createElement("button");
      prev.textContent = "prev";
      prev.disabled = this.page === 0;
      prev.onclick = () => {
        this.page -= 1;
        this.render(this.model.current());
      };
      const next = document.createElement("button");
      next.textContent = "next";
      next.disabled = this.page >= pages - 1;
      next.onclick = () => {
        this.page += 1;
        this.render(this.model.current());
      };
      const where = document.createElement("span");
      where.textContent = ` page ${this.page + 1}/${pages} `;
      nav.append(prev, where, next);
      this.root.appendChild(nav);
    }
  }

  private row(term: TermRow, busy: boolean): HTMLTableRowElement {
    const tr = document.createElement("tr");
    tr.dataset.termId = term.term_id;
    tr.innerHTML = `<td>${term.surface}</td><td>${term.frequency}</td><td>${term.doc_count}</td>`;
    const actions = document.createElement("td");
    for (const status of ["accepted", "rejected"] as const) {
      if (term.status === status) continue;
      const button = document.createElement("button");
      button.textContent = status === "accepted" ? "accept" : "reject";
      button.disabled = busy;
      button.onclick = () => void this.controller.decideTerm(term.term_id, status);
      actions.appendChild(button);
    }
    tr.appendChild(actions);
    return tr;
  }
}
