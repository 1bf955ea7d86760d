/**
 * Search panel: one query box, results grouped by kind (documents with
 * snippets, then terms and concepts by label match).
 */

import { Controller } from "../controller.js";
import { searchAvailable } from "../gating.js";
import { Model, Snapshot } from "../model.js";

export class SearchPanel {
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
    if (!project || !searchAvailable(project)) {
      this.root.textContent = "run S5 to build the search index";
      return;
    }
    const form = document.createElement("form");
    const box = document.createElement("input");
    box.name = "q";
    box.placeholder = "search documents, terms, concepts";
    const go = document.createElement("button");
    go.textContent = "search";
    form.append(box, go);
    form.onsubmit = (ev) => {
      ev.preventDefault();
      if (box.value.trim()) void this.controller.search(box.value.trim());
    };
    this.root.appendChild(form);

    const results = snapshot.search;
    if (!results) return;
    for (const kind of ["documents", "terms", "concepts"] as const) {
      const hits = results[kind];
      if (!hits.length) continue;
      const heading = document.createElement("h3");
      heading.textContent = kind;
      const list = document.createElement("ul");
      for (const hit of hits) {
        const item = document.createElement("li");
        item.textContent = `${hit.target_id} (${hit.score.toFixed(4)})`;
        if (hit.snippet) {
          const snippet = document.createElement("em");
          snippet.textContent = ` ${hit.snippet}`;
          item.appendChild(snippet);
        }
        list.appendChild(item);
      }
      this.root.append(heading, list);
    }
  }
}
