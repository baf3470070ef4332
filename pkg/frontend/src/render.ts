import { highlightIds, layeredLayout } from './layout.js';
import type { AttackPath, GraphDoc, Metrics, RiskRow } from './types.js';

// String-building renderers so they stay testable without a DOM.

const NODE_W = 170;
const NODE_H = 46;

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function truncate(label: string, max = 34): string {
  return label.length > max ? `${label.slice(0, max - 1)}…` : label;
}

function nodeShape(kind: string, x: number, y: number, classes: string): string {
  const cx = x + NODE_W / 2;
  const cy = y + NODE_H / 2;
  if (kind === 'LEAF') {
    return `<rect class="node ${classes}" x="${x}" y="${y}" width="${NODE_W}" height="${NODE_H}" rx="4"/>`;
  }
  if (kind === 'AND') {
    return `<ellipse class="node ${classes}" cx="${cx}" cy="${cy}" rx="${NODE_W / 2}" ry="${NODE_H / 2}"/>`;
  }
  const points = [
    `${cx},${y}`,
    `${x + NODE_W},${cy}`,
    `${cx},${y + NODE_H}`,
    `${x},${cy}`,
  ].join(' ');
  return `<polygon class="node ${classes}" points="${points}"/>`;
}

export function renderGraphSvg(
  doc: GraphDoc,
  highlightedPath: AttackPath | null = null,
): string {
  if (!doc.nodes.length) {
    return '<p class="empty-state">No attack graph: no vulnerable attack surface or compromised-OSS hypothesis applies.</p>';
  }
  const layout = layeredLayout(doc);
  const highlighted = highlightedPath
    ? highlightIds(doc, highlightedPath)
    : new Set<number>();
  const highlightClass = highlightedPath?.entry_kind === 'external'
    ? 'hl-external'
    : 'hl-hypothesis';
  const byId = new Map(layout.nodes.map((node) => [node.id, node]));

  const parts: string[] = [];
  parts.push(
    `<svg viewBox="0 0 ${layout.width} ${layout.height}" `
    + `width="${layout.width}" height="${layout.height}" `
    + 'xmlns="http://www.w3.org/2000/svg">',
  );
  parts.push(
    '<defs><marker id="arrow" viewBox="0 0 8 8" refX="7" refY="4" '
    + 'markerWidth="7" markerHeight="7" orient="auto-start-reverse">'
    + '<path d="M 0 0 L 8 4 L 0 8 z"/></marker></defs>',
  );
  for (const [src, dst] of doc.edges) {
    const from = byId.get(src);
    const to = byId.get(dst);
    if (!from || !to) continue;
    const lit = highlighted.has(src) && highlighted.has(dst)
      ? ` edge-${highlightClass}`
      : '';
    parts.push(
      `<line class="edge${lit}" marker-end="url(#arrow)" `
      + `x1="${from.x + NODE_W / 2}" y1="${from.y + NODE_H}" `
      + `x2="${to.x + NODE_W / 2}" y2="${to.y}"/>`,
    );
  }
  for (const node of layout.nodes) {
    const classes = `${node.kind.toLowerCase()}${
      highlighted.has(node.id) ? ` ${highlightClass}` : ''}`;
    parts.push(`<g data-node-id="${node.id}">`);
    parts.push(nodeShape(node.kind, node.x, node.y, classes));
    parts.push(
      `<text x="${node.x + NODE_W / 2}" y="${node.y + NODE_H / 2 + 4}" `
      + `text-anchor="middle"><title>${escapeHtml(node.label)}</title>`
      + `${escapeHtml(truncate(node.label))}</text>`,
    );
    parts.push('</g>');
  }
  parts.push('</svg>');
  return parts.join('');
}

export function renderMetricsBanner(
  metrics: Metrics,
  nodeCount: number,
  removedNodes: number,
): string {
  const removed = removedNodes > 0
    ? `<span class="badge removed">−${removedNodes} nodes</span>`
    : '';
  return (
    `<span class="stat">Attack points <b>${metrics.attack_points}</b></span>`
    + '<span class="stat">Potentially compromised OSS '
    + `<b>${metrics.potentially_compromised_oss}</b></span>`
    + `<span class="stat">Vulnerable binaries <b>${metrics.vulnerable_binaries}</b></span>`
    + `<span class="stat">Graph nodes <b>${nodeCount}</b></span>`
    + removed
  );
}

export function renderRiskTable(rows: RiskRow[]): string {
  if (!rows.length) {
    return '<p class="empty-state">No binaries at risk in this snapshot.</p>';
  }
  const body = rows
    .map(
      (row) =>
        `<tr><td>${escapeHtml(row.binary)}</td><td>${row.occurrences}</td>`
        + `<td>${row.interactions}</td><td>${row.impact.toFixed(1)}</td>`
        + `<td>${row.cve_count}</td><td>${row.likelihood.toFixed(1)}</td>`
        + `<td>${row.risk}</td></tr>`,
    )
    .join('');
  return (
    '<table class="risk"><thead><tr><th>Binary</th><th>Occurrences</th>'
    + '<th>Interactions</th><th>Impact</th><th># CVEs</th>'
    + '<th>Likelihood (%)</th><th>Risk</th></tr></thead>'
    + `<tbody>${body}</tbody></table>`
  );
}
