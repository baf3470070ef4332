import { ApiError, HttpApiClient } from './api.js';
import { Session } from './session.js';
import { renderGraphSvg, renderMetricsBanner, renderRiskTable } from './render.js';
import type { AttackPath } from './types.js';

const session = new Session(new HttpApiClient());

const el = (id: string) => document.getElementById(id) as HTMLElement;
const fileInput = el('firmware-file') as HTMLInputElement;
const extraFacts = el('extra-facts') as HTMLTextAreaElement;
const autoOss = el('auto-oss') as HTMLInputElement;
const uploadButton = el('upload') as HTMLButtonElement;
const undoButton = el('undo') as HTMLButtonElement;
const pathSelect = el('path-target') as HTMLSelectElement;
const inspectButton = el('inspect-path') as HTMLButtonElement;
const clearPathButton = el('clear-path') as HTMLButtonElement;

let highlightedPath: AttackPath | null = null;

function setStatus(text: string, isError = false): void {
  const status = el('status');
  status.textContent = text;
  status.className = isError ? 'status error' : 'status';
}

function render(): void {
  const busy = session.pending;
  uploadButton.disabled = busy;
  undoButton.disabled = busy || !session.hasSession || session.lineage.length < 2;
  inspectButton.disabled = busy || !session.hasSession;
  clearPathButton.disabled = highlightedPath === null;
  if (!session.hasSession) {
    el('metrics').innerHTML = '<span class="stat">Upload a firmware graph to begin.</span>';
    el('graph-pane').innerHTML = '';
    el('risk-pane').innerHTML = '';
    el('patch-pane').innerHTML = '';
    pathSelect.innerHTML = '';
    return;
  }
  const frame = session.current;
  el('metrics').innerHTML = renderMetricsBanner(
    frame.snapshot.metrics, session.nodeCount, frame.removedNodes,
  );
  el('graph-pane').innerHTML = renderGraphSvg(frame.graph, highlightedPath);
  el('risk-pane').innerHTML = renderRiskTable(frame.risk);

  const toggles = session.togglableBinaries().map((binary) => {
    const patched = session.isPatched(binary);
    const disabled = busy ? 'disabled' : '';
    const cls = patched ? 'patch-toggle patched' : 'patch-toggle';
    return `<button class="${cls}" data-binary="${binary}" ${disabled}>`
      + `${patched ? '✚ restore' : '✚ patch'} ${binary}</button>`;
  });
  el('patch-pane').innerHTML = toggles.join('');
  for (const button of el('patch-pane').querySelectorAll('button')) {
    button.addEventListener('click', () => {
      void toggle((button as HTMLButtonElement).dataset.binary as string);
    });
  }

  const targets = frame.snapshot.goal_binaries;
  pathSelect.innerHTML = targets
    .map((name) => `<option value="${name}">${name}</option>`)
    .join('');
}

async function upload(): Promise<void> {
  const file = fileInput.files?.[0];
  if (!file) {
    setStatus('Choose a firmware graph JSON file first.', true);
    return;
  }
  try {
    const text = await file.text();
    const doc = JSON.parse(text);
    highlightedPath = null;
    const body = {
      fW_name: doc.fW_name,
      graph: doc.graph,
      versions: doc.versions,
      extra_facts: extraFacts.value || undefined,
      auto_hypotheses: autoOss.checked,
    };
    const frame = await session.upload(body);
    setStatus(
      frame.graph.nodes.length
        ? `Analyzed ${frame.snapshot.fw_name}.`
        : `Analyzed ${frame.snapshot.fw_name}: no attack graph.`,
    );
  } catch (error) {
    if (error instanceof ApiError) {
      setStatus(`Validation failed: ${JSON.stringify(error.detail)}`, true);
    } else {
      setStatus(String(error), true);
    }
  }
  render();
}

async function toggle(binary: string): Promise<void> {
  if (!session.canToggle(binary)) {
    return;
  }
  highlightedPath = null;
  render();
  try {
    const frame = await session.toggle(binary);
    const patched = frame.snapshot.patched;
    setStatus(patched.length ? `Patched: ${patched.join(', ')}` : 'No patches active.');
  } catch (error) {
    setStatus(String(error), true);
  }
  render();
}

async function inspectPath(): Promise<void> {
  const target = pathSelect.value;
  if (!target) return;
  try {
    const paths = await session.pathsTo(target);
    highlightedPath = paths[0] ?? null;
    setStatus(
      highlightedPath
        ? `Shortest path: ${highlightedPath.binaries.join(' → ')}`
        : `No path reaches ${target}.`,
    );
  } catch (error) {
    setStatus(String(error), true);
  }
  render();
}

uploadButton.addEventListener('click', () => void upload());
undoButton.addEventListener('click', () => {
  highlightedPath = null;
  session.undo();
  setStatus('Returned to the previous snapshot.');
  render();
});
inspectButton.addEventListener('click', () => void inspectPath());
clearPathButton.addEventListener('click', () => {
  highlightedPath = null;
  render();
});

render();
