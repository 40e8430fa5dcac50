import { readFileSync } from 'node:fs';
import { describe, expect, it } from 'vitest';

import {
  renderAgents,
  renderDiscussion,
  renderDocumentation,
  renderFloor,
  renderOverview,
  renderSuggestions,
  STALE_AFTER_MS,
  TABS,
} from '../src/views.js';
import type {
  DiscussionMessage,
  DocumentDetail,
  DocumentRecord,
  LabOverview,
  Suggestion,
} from '../src/types.js';

function fixture<T>(name: string): T {
  const url = new URL(`./fixtures/${name}.json`, import.meta.url);
  return JSON.parse(readFileSync(url, 'utf-8')) as T;
}

const overview = () => fixture<LabOverview>('overview');
const discussion = () => fixture<DiscussionMessage[]>('discussion');
const documents = () => fixture<DocumentRecord[]>('documents');
const documentDetail = () => fixture<DocumentDetail>('document_detail');
const suggestionsOpen = () => fixture<Suggestion[]>('suggestions_open');
const suggestionsConverted = () => fixture<Suggestion[]>('suggestions_converted');

const contentUrl = (id: string) => `http://api.test/documents/${id}/content`;

describe('all five tabs render from recorded API fixtures', () => {
  it('covers the documented tab set', () => {
    expect(TABS).toEqual(['overview', 'floor', 'agents', 'discussion', 'documentation']);
  });

  it('overview shows the active state hypothesis verbatim', () => {
    const data = overview();
    const html = renderOverview(data, suggestionsOpen());
    expect(html).toContain(data.lab.name);
    expect(html).toContain(data.active_state!.hypothesis);
    for (const objective of data.active_state!.objectives) {
      expect(html).toContain(objective);
    }
    expect(html).toContain('accepted');
  });

  it('lab floor renders a status grid of agents and current actions', () => {
    const data = overview();
    // give one agent an in-progress task so the action column is exercised
    data.tasks[0] = {
      ...data.tasks[0],
      status: 'in_progress',
      assignee: data.members[1].agent_id,
    };
    const html = renderFloor(data);
    for (const member of data.members) {
      expect(html).toContain(member.display_name);
    }
    expect(html).toContain('working on');
    expect(html).toContain('idle');
  });

  it('agents tab marks members stale when heartbeat age exceeds 300s', () => {
    const fresh = renderAgents(overview());
    expect(fresh).toContain('badge fresh');
    expect(fresh).not.toContain('badge stale');

    const aged = overview();
    aged.server_time = aged.members[0].last_heartbeat! + STALE_AFTER_MS + 1_000;
    const html = renderAgents(aged);
    expect(html).toContain('badge stale');
  });

  it('discussion renders replies nested under their parents', () => {
    const messages = discussion();
    const html = renderDiscussion(messages);
    const reply = messages.find((m) => m.parent_id !== null)!;
    const parentIndex = html.indexOf(`data-message-id="${reply.parent_id}"`);
    const replyIndex = html.indexOf(`data-message-id="${reply.message_id}"`);
    expect(parentIndex).toBeGreaterThanOrEqual(0);
    expect(replyIndex).toBeGreaterThan(parentIndex);
    expect(html).toContain('<ul class="replies">');
    expect(html).toContain('<strong>synthesis</strong>'); // markdown applied
  });

  it('documentation lists documents with preview and download', () => {
    const docs = documents();
    const detail = documentDetail();
    const html = renderDocumentation(docs, detail, contentUrl);
    expect(html).toContain(docs[0].title);
    expect(html).toContain(`http://api.test/documents/${docs[0].document_id}/content`);
    expect(html).toContain('download');
    // preview renders the markdown headings of the synthesis summary
    expect(html).toContain('<h1>');
    expect(html).toContain('Annotation sanity checks');
  });
});

describe('suggestion lifecycle is visible to the observer', () => {
  it('a posted suggestion renders as open', () => {
    const html = renderSuggestions(suggestionsOpen());
    expect(html).toContain('chip">open');
    expect(html).not.toContain('task-link');
  });

  it('after PI conversion it shows converted with a task link', () => {
    const converted = suggestionsConverted();
    const convertedEntry = converted.find((s) => s.status === 'converted')!;
    expect(convertedEntry.converted_task_id).toBeTruthy();
    const html = renderSuggestions(converted);
    expect(html).toContain('chip">converted');
    expect(html).toContain(convertedEntry.converted_task_id!);
    expect(html).toContain('chip">open'); // the untouched one stays open
  });
});

describe('no mutation affordances beyond the two write paths', () => {
  it('renders no vote, claim, or verify controls anywhere', () => {
    const everything = [
      renderOverview(overview(), suggestionsConverted()),
      renderFloor(overview()),
      renderAgents(overview()),
      renderDiscussion(discussion()),
      renderDocumentation(documents(), documentDetail(), contentUrl),
    ].join('\n');
    for (const affordance of ['vote', 'ballot', 'claim', 'verify', 'supersede']) {
      expect(everything.toLowerCase()).not.toContain(`>${affordance}<`);
    }
    const forms = everything.match(/<form id="([^"]+)"/g) ?? [];
    expect(new Set(forms)).toEqual(
      new Set(['<form id="suggestion-form"', '<form id="discussion-form"']),
    );
  });
});
