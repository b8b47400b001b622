// Page entrypoint: wires the Dashboard and Playground to the DOM. The API
// base URL comes from ?api=... or defaults to same-origin port 8000.

import { ApiClient } from './api.js';
import { Dashboard } from './dashboard.js';
import { Playground } from './playground.js';

function apiBaseUrl(): string {
  const param = new URLSearchParams(window.location.search).get('api');
  if (param) return param;
  return `${window.location.protocol}//${window.location.hostname || '127.0.0.1'}:8000`;
}

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

export function boot(): { dashboard: Dashboard; playground: Playground } {
  const api = new ApiClient(apiBaseUrl());

  const dashboard = new Dashboard(api, {
    unitSelect: byId('unit-select'),
    themeInput: byId('theme-input'),
    generateButton: byId('generate-button'),
    statusIndicator: byId('status-indicator'),
    scriptPanel: byId('script-panel'),
    stickerGrid: byId('sticker-grid'),
    refinePanel: byId('refine-panel'),
    refinePrompt: byId('refine-prompt'),
    refineButton: byId('refine-button'),
  });

  const playground = new Playground(api, {
    canvas: byId('playground-canvas'),
    selectedPanel: byId('selected-panel'),
    exploreButton: byId('explore-button'),
    popup: byId('explore-popup'),
  });

  byId<HTMLButtonElement>('open-playground').addEventListener('click', () => {
    const set = dashboard.currentMaterialSet;
    if (set) void playground.loadMaterialSet(set.id);
  });

  void dashboard.init();
  return { dashboard, playground };
}

if (typeof document !== 'undefined' && document.getElementById('unit-select')) {
  boot();
}
