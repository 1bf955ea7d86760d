/**
 * Deterministic force-directed layout for the ontology canvas.
 *
 * Plain spring/repulsion iteration seeded with a fixed PRNG so the same
 * graph always lands on the same coordinates (screenshots and tests stay
 * stable). No randomness after initial placement.
 */

export interface LayoutNode {
  id: string;
  x: number;
  y: number;
}

export interface LayoutEdge {
  source: string;
  target: string;
}

/** Mulberry32: tiny deterministic PRNG. */
export function prng(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function layoutGraph(
  ids: string[],
  edges: LayoutEdge[],
  width = 800,
  height = 600,
  seed = 42,
  iterations = 150,
): LayoutNode[] {
  const rand = prng(seed);
  const nodes = [...ids].sort().map((id) => ({
    id,
    x: width * (0.2 + 0.6 * rand()),
    y: height * (0.2 + 0.6 * rand()),
  }));
  const index = new Map(nodes.map((n, i) => [n.id, i]));
  const springLength = Math.min(width, height) / Math.max(2, Math.sqrt(nodes.length) + 1);
  const repulsion = springLength * springLength;

  for (let step = 0; step < iterations; step++) {
    const cooling = 1 - step / iterations;
    const fx = new Array(nodes.length).fill(0);
    const fy = new Array(nodes.length).fill(0);
    for (let i = 0; i < nodes.length; i++) {
      for (let j = i + 1; j < nodes.length; j++) {
        const dx = nodes[i].x - nodes[j].x;
        const dy = nodes[i].y - nodes[j].y;
        const dist2 = Math.max(dx * dx + dy * dy, 0.01);
        const force = repulsion / dist2;
        const dist = Math.sqrt(dist2);
        fx[i] += (dx / dist) * force;
        fy[i] += (dy / dist) * force;
        fx[j] -= (dx / dist) * force;
        fy[j] -= (dy / dist) * force;
      }
    }
    for (const edge of edges) {
      const a = index.get(edge.source);
      const b = index.get(edge.target);
      if (a === undefined || b === undefined || a === b) continue;
      const dx = nodes[b].x - nodes[a].x;
      const dy = nodes[b].y - nodes[a].y;
      const dist = Math.max(Math.sqrt(dx * dx + dy * dy), 0.1);
      const force = (dist - springLength) * 0.05;
      fx[a] += (dx / dist) * force * dist;
      fy[a] += (dy / dist) * force * dist;
      fx[b] -= (dx / dist) * force * dist;
      fy[b] -= (dy / dist) * force * dist;
    }
    for (let i = 0; i < nodes.length; i++) {
      nodes[i].x += Math.max(-10, Math.min(10, fx[i] * cooling * 0.1));
      nodes[i].y += Math.max(-10, Math.min(10, fy[i] * cooling * 0.1));
      nodes[i].x = Math.max(20, Math.min(width - 20, nodes[i].x));
      nodes[i].y = Math.max(20, Math.min(height - 20, nodes[i].y));
    }
  }
  return nodes;
}
