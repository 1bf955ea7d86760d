/**
 * Entry point: project picker, route tabs (Dashboard / Terms / Ontology
 * / Search), and the MVC wiring. A fixed-interval poll keeps stage
 * progress fresh while something is running.
 */

import { ApiClient } from "./api.js";
import { Controller } from "./controller.js";
import { Model } from "./model.js";
import { StagePanel } from "./views/stages.js";
import { TermReview } from "./views/terms.js";
import { GraphEditor } from "./views/graph.js";
import { SearchPanel } from "./views/search.js";

const POLL_MS = 3000;

const ROUTES = ["dashboard", "terms", "ontology", "search"] as const;
type Route = (typeof ROUTES)[number];

async function boot(): Promise<void> {
  const api = new ApiClient("");
  const nav = document.getElementById("nav")!;
  const main = document.getElementById("main")!;
  const picker = document.getElementById("project-picker") as HTMLSelectElement;

  const projects = await api.listProjects();
  picker.innerHTML = projects
    .map((p) => `<option value="${p.project_id}">${p.project_id}</option>`)
    .join("");
  if (!projects.length) {
    main.textContent = "no projects yet; create one with the CLI";
    return;
  }

  let route: Route = "dashboard";
  let teardown: (() => void) | null = null;

  function mount(projectId: string): void {
    teardown?.();
    main.innerHTML = "";
    const model = new Model();
    const controller = new Controller(api, model, projectId);

    const panels: Record<Route, HTMLElement> = {
      dashboard: document.createElement("section"),
      terms: document.createElement("section"),
      ontology: document.createElement("section"),
      search: document.createElement("section"),
    };
    new StagePanel(panels.dashboard, model, controller);
    new TermReview(panels.terms, model, controller);
    new GraphEditor(panels.ontology, model, controller);
    new SearchPanel(panels.search, model, controller);

    function show(which: Route): void {
      route = which;
      main.innerHTML = "";
      main.appendChild(panels[which]);
      nav.querySelectorAll("button").forEach((b) => {
        b.className = b.dataset.route === which ? "active" : "";
      });
    }

    nav.innerHTML = "";
    for (const name of ROUTES) {
      const tab = document.createElement("button");
      tab.textContent = name;
      tab.dataset.route = name;
      tab.onclick = () => show(name);
      nav.appendChild(tab);
    }
    show(route);

    void controller.refresh();
    const poll = setInterval(() => {
      const project = model.current().project;
      const active = project && Object.values(project.stages).some((s) => s.status === "running");
      if (active || !project) void controller.refresh();
    }, POLL_MS);
    teardown = () => clearInterval(poll);
  }

  picker.onchange = () => mount(picker.value);
  mount(projects[0].project_id);
}

void boot().catch((err) => {
  document.getElementById("main")!.textContent = `failed to reach the control API: ${err}`;
});
