// DOM glue: polling, tab switching, and the two human write paths.
// All rendering goes through the pure view functions.

import { ApiError, ObserverClient } from './api.js';
import { loadConfig, saveConfig } from './config.js';
import type { DocumentDetail } from './types.js';
import {
  TABS,
  type TabName,
  renderAgents,
  renderDiscussion,
  renderDocumentation,
  renderFloor,
  renderOverview,
} from './views.js';

const state = {
  config: loadConfig(),
  labId: new URLSearchParams(location.search).get('lab') ?? 'lab-1',
  tab: 'overview' as TabName,
  preview: null as DocumentDetail | null,
  pendingParent: '',
  error: '',
};

const client = () => new ObserverClient(state.config);

function el<T extends HTMLElement>(selector: string): T {
  const node = document.querySelector(selector);
  if (!node) {
    throw new Error(`missing element: ${selector}`);
  }
  return node as T;
}

async function refresh(): Promise<void> {
  const content = el<HTMLDivElement>('#content');
  try {
    const api = client();
    let html = '';
    if (state.tab === 'overview') {
      const [overview, suggestions] = await Promise.all([
        api.overview(state.labId),
        api.suggestions(state.labId),
      ]);
      html = renderOverview(overview, suggestions);
    } else if (state.tab === 'floor') {
      html = renderFloor(await api.overview(state.labId));
    } else if (state.tab === 'agents') {
      html = renderAgents(await api.overview(state.labId));
    } else if (state.tab === 'discussion') {
      html = renderDiscussion(await api.discussion(state.labId));
    } else {
      const documents = await api.documents(state.labId);
      html = renderDocumentation(documents, state.preview, (id) =>
        api.documentContentUrl(id),
      );
    }
    state.error = '';
    content.innerHTML = html;
    wireForms();
  } catch (error) {
    state.error =
      error instanceof ApiError
        ? `${error.status} ${error.code}: ${error.message}`
        : String(error);
  }
  el<HTMLDivElement>('#error').textContent = state.error;
}

function wireForms(): void {
  const suggestionForm = document.querySelector<HTMLFormElement>('#suggestion-form');
  suggestionForm?.addEventListener('submit', async (event) => {
    event.preventDefault();
    const body = new FormData(suggestionForm).get('body');
    if (typeof body === 'string' && body.trim()) {
      await client().postSuggestion(state.labId, body);
      await refresh();
    }
  });
  const discussionForm = document.querySelector<HTMLFormElement>('#discussion-form');
  discussionForm?.addEventListener('submit', async (event) => {
    event.preventDefault();
    const data = new FormData(discussionForm);
    const body = data.get('body');
    if (typeof body === 'string' && body.trim()) {
      await client().postDiscussion(
        state.labId,
        body,
        state.pendingParent || undefined,
      );
      state.pendingParent = '';
      await refresh();
    }
  });
  document.querySelectorAll<HTMLButtonElement>('button.reply').forEach((button) => {
    button.addEventListener('click', () => {
      state.pendingParent = button.dataset.parent ?? '';
      const textarea = document.querySelector<HTMLTextAreaElement>(
        '#discussion-form textarea',
      );
      textarea?.focus();
    });
  });
  document.querySelectorAll<HTMLButtonElement>('button.preview').forEach((button) => {
    button.addEventListener('click', async () => {
      const documentId = button.dataset.documentId;
      if (documentId) {
        state.preview = await client().documentDetail(documentId);
        await refresh();
      }
    });
  });
}

function wireChrome(): void {
  const nav = el<HTMLElement>('#tabs');
  nav.innerHTML = TABS.map(
    (tab) => `<button data-tab="${tab}" class="${tab === state.tab ? 'active' : ''}">${tab}</button>`,
  ).join('');
  nav.querySelectorAll<HTMLButtonElement>('button').forEach((button) => {
    button.addEventListener('click', async () => {
      state.tab = button.dataset.tab as TabName;
      wireChrome();
      await refresh();
    });
  });

  const settings = el<HTMLFormElement>('#settings');
  (settings.elements.namedItem('baseUrl') as HTMLInputElement).value =
    state.config.baseUrl;
  (settings.elements.namedItem('token') as HTMLInputElement).value = state.config.token;
  (settings.elements.namedItem('lab') as HTMLInputElement).value = state.labId;
  settings.addEventListener('submit', async (event) => {
    event.preventDefault();
    const data = new FormData(settings);
    state.config = {
      ...state.config,
      baseUrl: String(data.get('baseUrl') ?? state.config.baseUrl),
      token: String(data.get('token') ?? state.config.token),
    };
    state.labId = String(data.get('lab') ?? state.labId);
    saveConfig(state.config);
    await refresh();
  });
}

export function start(): void {
  wireChrome();
  void refresh();
  setInterval(() => void refresh(), state.config.pollIntervalMs);
}

start();
