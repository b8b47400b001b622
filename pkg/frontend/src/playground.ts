// Playground (learners): force-laid-out stickers for a Ready material set,
// two-at-a-time selection, and an Explore popup showing the relation chain
// between the two selected words.

import { ApiClient, ApiRequestError, MaterialSet } from './api.js';
import { ForceLayout, scriptAdjacencyLinks } from './layout.js';
import { StickerSelection } from './selection.js';

export interface PlaygroundElements {
  canvas: HTMLElement;
  selectedPanel: HTMLElement;
  exploreButton: HTMLButtonElement;
  popup: HTMLElement;
}

export interface PlaygroundOptions {
  pollIntervalMs?: number;
  layoutTicks?: number;
  width?: number;
  height?: number;
}

export class Playground {
  readonly selection: StickerSelection;
  private materialSet: MaterialSet | null = null;
  private wordByStickerId = new Map<string, string>();

  constructor(
    private readonly api: ApiClient,
    private readonly el: PlaygroundElements,
    private readonly options: PlaygroundOptions = {},
  ) {
    this.selection = new StickerSelection(() => this.renderSelection());
    el.exploreButton.addEventListener('click', () => void this.explore());
    this.renderSelection();
  }

  async loadMaterialSet(setId: string): Promise<void> {
    this.materialSet = await this.api.getMaterialSet(setId);
    this.selection.clear();
    this.el.popup.hidden = true;
    this.renderCanvas();
  }

  private renderCanvas(): void {
    this.el.canvas.innerHTML = '';
    this.wordByStickerId.clear();
    if (!this.materialSet) return;
    const lines = this.materialSet.script.lines.filter((l) => l.sticker_id);
    const ids = lines.map((l) => l.sticker_id!);
    const width = this.options.width ?? 800;
    const height = this.options.height ?? 600;
    const layout = new ForceLayout(ids, scriptAdjacencyLinks(ids.length), { width, height });
    layout.run(this.options.layoutTicks ?? 300);
    const positions = layout.positions();
    for (const line of lines) {
      const id = line.sticker_id!;
      this.wordByStickerId.set(id, line.word);
      const pos = positions.get(id)!;
      const node = document.createElement('figure');
      node.className = 'playground-node';
      node.dataset.stickerId = id;
      node.dataset.word = line.word;
      node.style.position = 'absolute';
      node.style.left = `${pos.x.toFixed(1)}px`;
      node.style.top = `${pos.y.toFixed(1)}px`;
      const img = document.createElement('img');
      img.src = this.api.assetUrl(id);
      img.alt = line.word;
      const caption = document.createElement('figcaption');
      caption.textContent = line.word;
      node.append(img, caption);
      node.addEventListener('click', () => this.selection.toggle(id));
      this.el.canvas.appendChild(node);
    }
  }

  private renderSelection(): void {
    const selected = this.selection.selected;
    this.el.selectedPanel.innerHTML = '';
    for (const id of selected) {
      const chip = document.createElement('span');
      chip.className = 'selected-chip';
      chip.dataset.stickerId = id;
      chip.textContent = this.wordByStickerId.get(id) ?? id;
      this.el.selectedPanel.appendChild(chip);
    }
    for (const node of this.el.canvas.querySelectorAll<HTMLElement>('.playground-node')) {
      node.classList.toggle('selected', selected.includes(node.dataset.stickerId!));
    }
    this.el.exploreButton.disabled = selected.length !== 2;
  }

  async explore(): Promise<void> {
    if (!this.materialSet) return;
    const selected = this.selection.selected;
    if (selected.length !== 2) return;
    const wordA = this.wordByStickerId.get(selected[0])!;
    const wordB = this.wordByStickerId.get(selected[1])!;
    this.el.popup.hidden = false;
    this.el.popup.innerHTML = '<p class="popup-status">Exploring…</p>';
    try {
      const { job_id } = await this.api.explore(this.materialSet.id, wordA, wordB);
      const job = await this.api.waitForJob(job_id, { intervalMs: this.options.pollIntervalMs ?? 1000 });
      if (job.state === 'Failed' || !job.result_ref) {
        this.renderPopupError(job.error ?? 'exploration failed');
        return;
      }
      const exploration = await this.api.getExploration(job.result_ref);
      this.el.popup.innerHTML = '';
      const row = document.createElement('div');
      row.className = 'chain-row';
      for (const word of exploration.chain) {
        const node = document.createElement('figure');
        node.className = 'chain-node';
        node.dataset.word = word;
        const img = document.createElement('img');
        img.src = this.api.assetUrl(exploration.stickers[word]);
        img.alt = word;
        const label = document.createElement('figcaption');
        label.className = 'chain-label';
        label.textContent = word;
        node.append(img, label);
        row.appendChild(node);
      }
      this.el.popup.appendChild(row);
    } catch (err) {
      this.renderPopupError(err instanceof ApiRequestError ? err.message : String(err));
    }
  }

  private renderPopupError(detail: string): void {
    this.el.popup.hidden = false;
    this.el.popup.innerHTML = '';
    const p = document.createElement('p');
    p.className = 'popup-error';
    p.textContent = detail;
    this.el.popup.appendChild(p);
  }
}
