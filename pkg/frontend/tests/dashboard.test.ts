import { beforeEach, describe, expect, it } from 'vitest';
import { ApiClient, FetchLike } from '../src/api.js';
import { Dashboard } from '../src/dashboard.js';
import { buildDom } from './dom.js';

const UNIT = { id: 'u1', title: 'Unit 1', grade_label: 'Grade 2', words: ['spring', 'lake'] };

const READY_SET = {
  id: 'set1',
  unit_id: 'u1',
  theme: 'school trip',
  state: 'Ready',
  created_at: '2026-01-01T00:00:00Z',
  script: {
    lines: [
      {
        word: 'spring',
        sentence: 'In spring, the flowers bloom.',
        sticker_prompt: 'A spring scene.',
        highlights: [{ start: 3, end: 9 }],
        sticker_id: 'stick-spring',
      },
      {
        word: 'lake',
        sentence: 'We visit the lake together.',
        sticker_prompt: 'A calm lake.',
        highlights: [{ start: 13, end: 17 }],
        sticker_id: 'stick-lake',
      },
    ],
  },
};

function mockBackend(overrides: { failJob?: boolean } = {}): FetchLike {
  let jobPolls = 0;
  return async (url, init) => {
    const json = (status: number, body: unknown) =>
      new Response(JSON.stringify(body), { status, headers: { 'Content-Type': 'application/json' } });
    const path = new URL(url).pathname;
    if (path === '/units') return json(200, { units: [UNIT] });
    if (path === '/material-sets' && init?.method === 'POST')
      return json(202, { job_id: 'job1', material_set_id: 'set1' });
    if (path === '/jobs/job1') {
      jobPolls += 1;
      if (jobPolls === 1) return json(200, { id: 'job1', kind: 'Script', state: 'Running', attempts: 1 });
      if (overrides.failJob)
        return json(200, { id: 'job1', kind: 'Script', state: 'Failed', attempts: 3, error: 'validation failed' });
      return json(200, { id: 'job1', kind: 'Script', state: 'Succeeded', attempts: 1, result_ref: 'set1' });
    }
    if (path === '/material-sets/set1') return json(200, READY_SET);
    if (path === '/stickers/stick-spring/refine' && init?.method === 'POST')
      return json(202, { job_id: 'job2' });
    if (path === '/jobs/job2')
      return json(200, { id: 'job2', kind: 'Sticker', state: 'Succeeded', attempts: 1, result_ref: 'stick-spring-v2' });
    return json(404, { error: 'not_found', detail: path });
  };
}

describe('dashboard', () => {
  beforeEach(() => buildDom());

  async function readyDashboard(fetchImpl: FetchLike) {
    const { dashboard: el } = buildDom();
    const dash = new Dashboard(new ApiClient('http://backend.test', fetchImpl), el, { pollIntervalMs: 1 });
    await dash.init();
    return { dash, el };
  }

  it('generates, reaches Succeeded, and renders API-provided highlights only', async () => {
    const { dash, el } = await readyDashboard(mockBackend());
    el.themeInput.value = 'school trip';
    await dash.generate();
    expect(el.statusIndicator.dataset.state).toBe('Succeeded');
    const lines = el.scriptPanel.querySelectorAll('.script-line');
    expect(lines).toHaveLength(2);
    const marks = [...el.scriptPanel.querySelectorAll('mark.highlight')].map((m) => m.textContent);
    expect(marks).toEqual(['spring', 'lake']);
    expect(el.scriptPanel.textContent).toContain('In spring, the flowers bloom.');
    expect(el.stickerGrid.querySelectorAll('.sticker-cell')).toHaveLength(2);
  });

  it('shows failure detail in the status indicator when the job fails', async () => {
    const { dash, el } = await readyDashboard(mockBackend({ failJob: true }));
    await dash.generate();
    expect(el.statusIndicator.dataset.state).toBe('Failed');
    expect(el.statusIndicator.textContent).toContain('validation failed');
    expect(el.scriptPanel.children).toHaveLength(0);
  });

  it('disables controls while a job is active', async () => {
    let release: () => void = () => {};
    const gate = new Promise<void>((r) => (release = r));
    const backend = mockBackend();
    const gated: FetchLike = async (url, init) => {
      if (new URL(url).pathname === '/jobs/job1') await gate;
      return backend(url, init);
    };
    const { dash, el } = await readyDashboard(gated);
    const running = dash.generate();
    await new Promise((r) => setTimeout(r, 5));
    expect(el.generateButton.disabled).toBe(true);
    expect(el.refineButton.disabled).toBe(true);
    release();
    await running;
    expect(el.generateButton.disabled).toBe(false);
  });

  it('refine replaces exactly one grid image with the new asset id', async () => {
    const { dash, el } = await readyDashboard(mockBackend());
    await dash.generate();
    const before = [...el.stickerGrid.querySelectorAll('img')].map((i) => i.src);
    dash.selectSticker('stick-spring', 'spring', 'A spring scene.');
    expect(el.refinePanel.hidden).toBe(false);
    el.refinePrompt.value = 'A brighter spring scene.';
    el.refinePrompt.dispatchEvent(new Event('input'));
    expect(el.refineButton.disabled).toBe(false);
    await dash.refine();
    const after = [...el.stickerGrid.querySelectorAll('img')].map((i) => i.src);
    const changed = after.filter((src, i) => src !== before[i]);
    expect(changed).toHaveLength(1);
    expect(changed[0]).toContain('stick-spring-v2');
  });

  it('deselecting a sticker hides the refine panel', async () => {
    const { dash, el } = await readyDashboard(mockBackend());
    await dash.generate();
    dash.selectSticker('stick-spring', 'spring', 'A spring scene.');
    dash.selectSticker('stick-spring', 'spring', 'A spring scene.');
    expect(el.refinePanel.hidden).toBe(true);
    expect(el.refinePrompt.value).toBe('');
  });
});
