/**
 * Ontology canvas: SVG render of concepts and relations with the
 * deterministic force layout, plus edit forms (add concept, edit
 * labels, add/remove relation, merge with a library ontology). Every
 * edit is an API call; server rejections (cycles, collisions) land in
 * the banner next to the form that caused them.
 */

import { Controller } from "../controller.js";
import { ontologyAvailable } from "../gating.js";
import { layoutGraph } from "../layout.js";
import { Model, Snapshot } from "../model.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export class GraphEditor {
  private selected: string | null = null;

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
    if (!project || !ontologyAvailable(project)) {
      this.root.textContent = "run S4 to build the ontology";
      return;
    }
    const graph = snapshot.ontology;
    if (!graph) {
      this.root.textContent = "loading ontology…";
      return;
    }
    if (snapshot.notice && snapshot.notice.severity !== "info") {
      const banner = document.createElement("div");
      banner.className = `banner banner-${snapshot.notice.severity}`;
      banner.textContent = snapshot.notice.text;
      this.root.appendChild(banner);
    }
    if (!graph.concepts.length) {
      const hint = document.createElement("p");
      hint.className = "empty-hint";
      hint.textContent = "empty ontology; accept terms and re-run S4, or add a concept below";
    }

    const positions = layoutGraph(
      graph.concepts.map((c) => c.concept_id),
      graph.relations.map((r) => ({ source: r.source, target: r.target })),
    );
    const at = new Map(positions.map((p) => [p.id, p]));

    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", "0 0 800 600");
    svg.setAttribute("class", "graph-canvas");
    for (const rel of graph.relations) {
      const a = at.get(rel.source);
      const b = at.get(rel.target);
      if (!a || !b) continue;
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(a.x));
      line.setAttribute("y1", String(a.y));
      line.setAttribute("x2", String(b.x));
      line.setAttribute("y2", String(b.y));
      line.setAttribute("class", `edge edge-${rel.kind}`);
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent = rel.kind === "assoc" ? rel.label ?? "assoc" : rel.kind;
      line.appendChild(title);
      svg.appendChild(line);
    }
    for (const concept of graph.concepts) {
      const pos = at.get(concept.concept_id);
      if (!pos) continue;
      const group = document.createElementNS(SVG_NS, "g");
      group.setAttribute("class", concept.concept_id === this.selected ? "node selected" : "node");
      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", String(pos.x));
      circle.setAttribute("cy", String(pos.y));
      circle.setAttribute("r", "14");
      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String(pos.x));
      label.setAttribute("y", String(pos.y - 18));
      label.setAttribute("text-anchor", "middle");
      label.textContent = concept.preferred_label;
      group.append(circle, label);
      group.addEventListener("click", () => {
        this.selected = concept.concept_id;
        this.render(this.model.current());
      });
      svg.appendChild(group);
    }
    this.root.appendChild(svg);
    this.root.appendChild(this.forms(snapshot));
  }

  private forms(snapshot: Snapshot): HTMLElement {
    const graph = snapshot.ontology!;
    const busy = snapshot.busy;
    const wrap = document.createElement("div");
    wrap.className = "graph-forms";

    const addConcept = document.createElement("form");
    addConcept.innerHTML =
      '<input name="label" placeholder="new concept label">' +
      '<input name="alts" placeholder="alt labels, comma separated">';
    const addButton = document.createElement("button");
    addButton.textContent = "add concept";
    addButton.disabled = busy;
    addConcept.appendChild(addButton);
    addConcept.onsubmit = (ev) => {
      ev.preventDefault();
      const label = (addConcept.elements.namedItem("label") as HTMLInputElement).value.trim();
      const alts = (addConcept.elements.namedItem("alts") as HTMLInputElement).value
        .split(",")
        .map((s) => s.trim())
        .filter(Boolean);
      if (label) void this.controller.addConcept(label, alts);
    };
    wrap.appendChild(addConcept);

    const options = graph.concepts
      .map((c) => `<option value="${c.concept_id}">${c.preferred_label}</option>`)
      .join("");
    const addRelation = document.createElement("form");
    addRelation.innerHTML =
      `<select name="kind"><option>is_a</option><option>part_of</option><option>assoc</option></select>` +
      `<select name="source">${options}</select>` +
      `<select name="target">${options}</select>` +
      '<input name="label" placeholder="assoc label">';
    const relButton = document.createElement("button");
    relButton.textContent = "add relation";
    relButton.disabled = busy || graph.concepts.length < 2;
    addRelation.appendChild(relButton);
    addRelation.onsubmit = (ev) => {
      ev.preventDefault();
      const value = (name: string) =>
        (addRelation.elements.namedItem(name) as HTMLSelectElement | HTMLInputElement).value;
      void this.controller.addRelation(
        value("kind"),
        value("source"),
        value("target"),
        value("kind") === "assoc" ? value("label") || "related" : undefined,
      );
    };
    wrap.appendChild(addRelation);

    if (this.selected && graph.concepts.some((c) => c.concept_id === this.selected)) {
      const concept = graph.concepts.find((c) => c.concept_id === this.selected)!;
      const edit = document.createElement("form");
      edit.className = "edit-concept";
      edit.innerHTML =
        `<span>${concept.concept_id}</span>` +
        `<input name="label" value="${concept.preferred_label}">` +
        `<input name="alts" value="${concept.alt_labels.join(", ")}">`;
      const save = document.createElement("button");
      save.textContent = "save labels";
      save.disabled = busy;
      edit.appendChild(save);
      edit.onsubmit = (ev) => {
        ev.preventDefault();
        const label = (edit.elements.namedItem("label") as HTMLInputElement).value.trim();
        const alts = (edit.elements.namedItem("alts") as HTMLInputElement).value
          .split(",")
          .map((s) => s.trim())
          .filter(Boolean);
        void this.controller.patchConcept(concept.concept_id, {
          preferred_label: label,
          alt_labels: alts,
        });
      };
      wrap.appendChild(edit);
    }

    const mergeForm = document.createElement("form");
    mergeForm.innerHTML = '<input name="ref" placeholder="library ref: domain[:version]">';
    const mergeButton = document.createElement("button");
    mergeButton.textContent = "merge library ontology";
    mergeButton.disabled = busy;
    mergeForm.appendChild(mergeButton);
    mergeForm.onsubmit = (ev) => {
      ev.preventDefault();
      const ref = (mergeForm.elements.namedItem("ref") as HTMLInputElement).value.trim();
      if (ref) void this.controller.mergeWithLibrary(ref);
    };
    wrap.appendChild(mergeForm);

    return wrap;
  }
}
