import type { AttackPath, GraphDoc, GraphNode } from './types.js';

// Layered layout for the proof DAG. Node ids arrive in topological
// order, so a single pass assigns each node the longest-path level of
// its predecessors plus one; columns within a level keep id order. The
// layout is cosmetic only.

export interface PlacedNode extends GraphNode {
  x: number;
  y: number;
}

export interface Layout {
  nodes: PlacedNode[];
  width: number;
  height: number;
}

export const X_SPACING = 190;
export const Y_SPACING = 90;
export const MARGIN = 60;

export function layeredLayout(doc: GraphDoc): Layout {
  const levels = new Map<number, number>();
  const incoming = new Map<number, number[]>();
  for (const [src, dst] of doc.edges) {
    const sources = incoming.get(dst) ?? [];
    sources.push(src);
    incoming.set(dst, sources);
  }
  const ordered = [...doc.nodes].sort((a, b) => a.id - b.id);
  for (const node of ordered) {
    const sources = incoming.get(node.id) ?? [];
    const level = sources.length
      ? Math.max(...sources.map((src) => levels.get(src) ?? 0)) + 1
      : 0;
    levels.set(node.id, level);
  }

  const columns = new Map<number, number>();
  const placed: PlacedNode[] = [];
  let maxColumn = 0;
  let maxLevel = 0;
  for (const node of ordered) {
    const level = levels.get(node.id) ?? 0;
    const column = columns.get(level) ?? 0;
    columns.set(level, column + 1);
    maxColumn = Math.max(maxColumn, column);
    maxLevel = Math.max(maxLevel, level);
    placed.push({
      ...node,
      x: MARGIN + column * X_SPACING,
      y: MARGIN + level * Y_SPACING,
    });
  }
  return {
    nodes: placed,
    width: MARGIN * 2 + maxColumn * X_SPACING + X_SPACING / 2,
    height: MARGIN * 2 + maxLevel * Y_SPACING,
  };
}

/** Node ids to highlight for one attack path: the goal/hypothesis/entry
 * nodes of each binary on the path plus the data-flow leaves between
 * consecutive hops. Matching is on canonical label text. */
export function highlightIds(doc: GraphDoc, path: AttackPath): Set<number> {
  const wanted = new Set<string>();
  for (const binary of path.binaries) {
    wanted.add(`vulnerableSoftware(${binary})`);
    wanted.add(`potentiallyVulnerableSoftware(${binary})`);
    wanted.add(`externalInteraction('Internet', ${binary}, internet)`);
  }
  const hopPrefixes = path.binaries
    .slice(0, -1)
    .map((src, i) => `dataFlow(${src}, ${path.binaries[i + 1]},`);
  const hypothesisPrefixes = path.binaries.map((b) => `bugHyp(${b},`);

  const ids = new Set<number>();
  for (const node of doc.nodes) {
    if (wanted.has(node.label)
      || hopPrefixes.some((prefix) => node.label.startsWith(prefix))
      || hypothesisPrefixes.some((prefix) => node.label.startsWith(prefix))) {
      ids.add(node.id);
    }
  }
  return ids;
}
