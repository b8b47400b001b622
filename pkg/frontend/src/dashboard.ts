// Dashboard (educators): pick a unit, enter a theme, generate a material
// set, review the script with highlighted words and the sticker grid, and
// refine individual sticker prompts. One active job at a time; the status
// indicator mirrors the job state exactly.

import { ApiClient, ApiRequestError, Job, MaterialSet, Unit } from './api.js';

export interface DashboardElements {
  unitSelect: HTMLSelectElement;
  themeInput: HTMLInputElement;
  generateButton: HTMLButtonElement;
  statusIndicator: HTMLElement;
  scriptPanel: HTMLElement;
  stickerGrid: HTMLElement;
  refinePanel: HTMLElement;
  refinePrompt: HTMLTextAreaElement;
  refineButton: HTMLButtonElement;
}

export interface DashboardOptions {
  pollIntervalMs?: number;
}

export class Dashboard {
  private units: Unit[] = [];
  private materialSet: MaterialSet | null = null;
  private selectedStickerId: string | null = null;
  private selectedWord: string | null = null;
  private jobActive = false;

  constructor(
    private readonly api: ApiClient,
    private readonly el: DashboardElements,
    private readonly options: DashboardOptions = {},
  ) {
    el.generateButton.addEventListener('click', () => void this.generate());
    el.refineButton.addEventListener('click', () => void this.refine());
    el.refinePrompt.addEventListener('input', () => this.syncControls());
    el.unitSelect.addEventListener('change', () => this.resetForUnit());
  }

  async init(): Promise<void> {
    const { units } = await this.api.getUnits();
    this.units = units;
    this.el.unitSelect.innerHTML = '';
    for (const unit of units) {
      const opt = document.createElement('option');
      opt.value = unit.id;
      opt.textContent = `${unit.title} (${unit.grade_label})`;
      this.el.unitSelect.appendChild(opt);
    }
    this.syncControls();
  }

  private resetForUnit(): void {
    this.materialSet = null;
    this.clearRefineSelection();
    this.el.scriptPanel.innerHTML = '';
    this.el.stickerGrid.innerHTML = '';
    this.setStatus('idle', '');
    this.syncControls();
  }

  private setStatus(state: string, detail: string): void {
    this.el.statusIndicator.dataset.state = state;
    this.el.statusIndicator.textContent = detail ? `${state}: ${detail}` : state;
  }

  private syncControls(): void {
    const unit = this.units.find((u) => u.id === this.el.unitSelect.value);
    const hasWords = !!unit && unit.words.length > 0;
    this.el.generateButton.disabled = this.jobActive || !hasWords;
    this.el.refineButton.disabled =
      this.jobActive || this.selectedStickerId === null || this.el.refinePrompt.value.trim() === '';
    this.el.refinePanel.hidden = this.selectedStickerId === null;
  }

  async generate(): Promise<void> {
    if (this.jobActive) return;
    const unitId = this.el.unitSelect.value;
    if (!unitId) return;
    this.jobActive = true;
    this.syncControls();
    try {
      const { job_id, material_set_id } = await this.api.createMaterialSet(unitId, this.el.themeInput.value.trim());
      this.setStatus('Pending', '');
      const job = await this.api.waitForJob(
        job_id,
        { intervalMs: this.options.pollIntervalMs ?? 1000 },
        (j: Job) => this.setStatus(j.state, ''),
      );
      if (job.state === 'Failed') {
        this.setStatus('Failed', job.error ?? 'generation failed');
        return;
      }
      this.materialSet = await this.api.getMaterialSet(material_set_id);
      this.renderScript();
      this.renderStickers();
      this.setStatus('Succeeded', '');
    } catch (err) {
      this.setStatus('Failed', err instanceof ApiRequestError ? err.message : String(err));
    } finally {
      this.jobActive = false;
      this.syncControls();
    }
  }

  private renderScript(): void {
    this.el.scriptPanel.innerHTML = '';
    if (!this.materialSet) return;
    for (const line of this.materialSet.script.lines) {
      const p = document.createElement('p');
      p.className = 'script-line';
      p.dataset.word = line.word;
      // highlight spans come from the API only; the client does no matching
      let cursor = 0;
      for (const span of line.highlights) {
        if (span.start > cursor) p.appendChild(document.createTextNode(line.sentence.slice(cursor, span.start)));
        const mark = document.createElement('mark');
        mark.className = 'highlight';
        mark.textContent = line.sentence.slice(span.start, span.end);
        p.appendChild(mark);
        cursor = span.end;
      }
      if (cursor < line.sentence.length) p.appendChild(document.createTextNode(line.sentence.slice(cursor)));
      this.el.scriptPanel.appendChild(p);
    }
  }

  private renderStickers(): void {
    this.el.stickerGrid.innerHTML = '';
    if (!this.materialSet) return;
    for (const line of this.materialSet.script.lines) {
      if (!line.sticker_id) continue;
      const cell = document.createElement('figure');
      cell.className = 'sticker-cell';
      cell.dataset.word = line.word;
      cell.dataset.stickerId = line.sticker_id;
      const img = document.createElement('img');
      img.src = this.api.assetUrl(line.sticker_id);
      img.alt = line.word;
      const caption = document.createElement('figcaption');
      caption.textContent = line.word;
      cell.append(img, caption);
      cell.addEventListener('click', () => this.selectSticker(line.sticker_id!, line.word, line.sticker_prompt));
      this.el.stickerGrid.appendChild(cell);
    }
  }

  selectSticker(stickerId: string, word: string, prompt: string): void {
    if (this.selectedStickerId === stickerId) {
      this.clearRefineSelection();
    } else {
      this.selectedStickerId = stickerId;
      this.selectedWord = word;
      this.el.refinePrompt.value = prompt;
    }
    for (const cell of this.el.stickerGrid.querySelectorAll<HTMLElement>('.sticker-cell')) {
      cell.classList.toggle('selected', cell.dataset.stickerId === this.selectedStickerId);
    }
    this.syncControls();
  }

  private clearRefineSelection(): void {
    this.selectedStickerId = null;
    this.selectedWord = null;
    this.el.refinePrompt.value = '';
  }

  async refine(): Promise<void> {
    if (this.jobActive || !this.selectedStickerId || !this.selectedWord || !this.materialSet) return;
    const stickerId = this.selectedStickerId;
    const word = this.selectedWord;
    const prompt = this.el.refinePrompt.value.trim();
    if (!prompt) return;
    this.jobActive = true;
    this.syncControls();
    try {
      const { job_id } = await this.api.refineSticker(stickerId, prompt);
      this.setStatus('Pending', '');
      const job = await this.api.waitForJob(
        job_id,
        { intervalMs: this.options.pollIntervalMs ?? 1000 },
        (j: Job) => this.setStatus(j.state, ''),
      );
      if (job.state === 'Failed' || !job.result_ref) {
        this.setStatus('Failed', job.error ?? 'refine failed');
        return;
      }
      // replace only the refined cell's image; the new asset id busts the cache
      const cell = this.el.stickerGrid.querySelector<HTMLElement>(`.sticker-cell[data-word="${word}"]`);
      if (cell) {
        cell.dataset.stickerId = job.result_ref;
        const img = cell.querySelector('img');
        if (img) img.src = this.api.assetUrl(job.result_ref);
      }
      this.selectedStickerId = job.result_ref;
      this.setStatus('Succeeded', '');
    } catch (err) {
      this.setStatus('Failed', err instanceof ApiRequestError ? err.message : String(err));
    } finally {
      this.jobActive = false;
      this.syncControls();
    }
  }

  get currentMaterialSet(): MaterialSet | null {
    return this.materialSet;
  }
}
