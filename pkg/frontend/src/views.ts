// Pure renderers: API data in, HTML strings out. No fetching, no DOM
// mutation, no protocol state — which keeps every tab snapshot-testable.

import { escapeHtml, renderMarkdown } from './markdown.js';
import type {
  DiscussionMessage,
  DocumentDetail,
  DocumentRecord,
  LabOverview,
  MemberView,
  Suggestion,
  TaskSummary,
} from './types.js';

export const STALE_AFTER_MS = 300_000;

export const TABS = ['overview', 'floor', 'agents', 'discussion', 'documentation'] as const;
export type TabName = (typeof TABS)[number];

const STATUS_ORDER = [
  'proposed',
  'in_progress',
  'completed',
  'critique_period',
  'voting',
  'accepted',
  'rejected',
  'superseded',
];

function heartbeatAge(member: MemberView, serverTime: number): string {
  if (member.last_heartbeat === null) {
    return 'never';
  }
  const seconds = Math.max(0, Math.round((serverTime - member.last_heartbeat) / 1000));
  return `${seconds}s ago`;
}

function staleBadge(member: MemberView, serverTime: number): string {
  const stale =
    member.last_heartbeat === null ||
    serverTime - member.last_heartbeat > STALE_AFTER_MS;
  return stale
    ? '<span class="badge stale">stale</span>'
    : '<span class="badge fresh">active</span>';
}

function taskChip(task: TaskSummary): string {
  return `<li class="task status-${escapeHtml(task.status)}">
    <span class="chip">${escapeHtml(task.status)}</span>
    <span class="type">${escapeHtml(task.task_type)}</span>
    ${escapeHtml(task.title)}
  </li>`;
}

// -- Overview ----------------------------------------------------------------

export function renderOverview(overview: LabOverview, suggestions: Suggestion[]): string {
  const state = overview.active_state;
  const counts = STATUS_ORDER.filter((s) => overview.task_status_counts[s])
    .map(
      (s) =>
        `<span class="count"><span class="chip">${escapeHtml(s)}</span> ${
          overview.task_status_counts[s]
        }</span>`,
    )
    .join(' ');
  const stateBlock = state
    ? `<section class="state">
        <h3>${escapeHtml(state.title)} <small>v${state.version} · ${escapeHtml(
          state.status,
        )}</small></h3>
        <p class="hypothesis">${escapeHtml(state.hypothesis)}</p>
        <ol class="objectives">${state.objectives
          .map((o) => `<li>${escapeHtml(o)}</li>`)
          .join('')}</ol>
      </section>`
    : '<section class="state"><p>No active research state.</p></section>';
  return `<div class="tab-overview">
    <h2>${escapeHtml(overview.lab.name)}</h2>
    <p class="governance">Governance: ${escapeHtml(overview.lab.governance.model)}${
      overview.lab.governance.quorum_fraction
        ? ` (quorum fraction ${escapeHtml(overview.lab.governance.quorum_fraction)})`
        : ''
    }</p>
    ${stateBlock}
    <section class="task-summary">
      <h3>Tasks</h3>
      <p class="counts">${counts || 'no tasks yet'}</p>
      <ul class="tasks">${overview.tasks.map(taskChip).join('')}</ul>
    </section>
    ${renderSuggestions(suggestions)}
  </div>`;
}

export function renderSuggestions(suggestions: Suggestion[]): string {
  const items = suggestions
    .map((s) => {
      const taskLink =
        s.status === 'converted' && s.converted_task_id
          ? ` <span class="task-link">→ task <code>${escapeHtml(
              s.converted_task_id,
            )}</code></span>`
          : '';
      return `<li class="suggestion status-${escapeHtml(s.status)}">
        <span class="chip">${escapeHtml(s.status)}</span>
        ${escapeHtml(s.body)}${taskLink}
        <small>by ${escapeHtml(s.author)}</small>
      </li>`;
    })
    .join('');
  return `<section class="suggestions">
    <h3>Suggestions</h3>
    <ul>${items || '<li class="empty">none yet</li>'}</ul>
    <form id="suggestion-form">
      <textarea name="body" placeholder="Propose a research idea to this lab" required></textarea>
      <button type="submit">Post suggestion</button>
    </form>
  </section>`;
}

// -- Lab Floor -----------------------------------------------------------------

export function renderFloor(overview: LabOverview): string {
  const byAssignee = new Map<string, TaskSummary>();
  for (const task of overview.tasks) {
    if (task.status === 'in_progress' && task.assignee) {
      byAssignee.set(task.assignee, task);
    }
  }
  const rows = overview.members
    .map((member) => {
      const working = byAssignee.get(member.agent_id);
      const action = working
        ? `working on <em>${escapeHtml(working.title)}</em>`
        : 'idle';
      return `<tr>
        <td>${escapeHtml(member.display_name)}</td>
        <td>${escapeHtml(member.role)}</td>
        <td>${staleBadge(member, overview.server_time)}</td>
        <td class="action">${action}</td>
      </tr>`;
    })
    .join('');
  return `<div class="tab-floor">
    <h2>Lab floor</h2>
    <table class="floor-grid">
      <thead><tr><th>Agent</th><th>Role</th><th>Liveness</th><th>Current action</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>
  </div>`;
}

// -- Agents ---------------------------------------------------------------------

export function renderAgents(overview: LabOverview): string {
  const rows = overview.members
    .map(
      (member) => `<tr>
      <td>${escapeHtml(member.display_name)} <code>${escapeHtml(member.agent_id)}</code></td>
      <td>${escapeHtml(member.role)}</td>
      <td>${heartbeatAge(member, overview.server_time)}</td>
      <td>${staleBadge(member, overview.server_time)}</td>
    </tr>`,
    )
    .join('');
  return `<div class="tab-agents">
    <h2>Agents</h2>
    <table class="roster">
      <thead><tr><th>Agent</th><th>Role</th><th>Last heartbeat</th><th>Status</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>
  </div>`;
}

// -- Discussion --------------------------------------------------------------------

export function renderDiscussion(messages: DiscussionMessage[]): string {
  const byParent = new Map<string | null, DiscussionMessage[]>();
  for (const message of messages) {
    const key = message.parent_id;
    const bucket = byParent.get(key) ?? [];
    bucket.push(message);
    byParent.set(key, bucket);
  }
  const renderThread = (message: DiscussionMessage): string => {
    const children = byParent.get(message.message_id) ?? [];
    return `<li class="message" data-message-id="${escapeHtml(message.message_id)}">
      <div class="meta">${escapeHtml(message.author)} · ${
        message.scope === 'lab' ? 'lab' : `task ${escapeHtml(message.scope)}`
      }</div>
      <div class="body">${renderMarkdown(message.body)}</div>
      <button class="reply" data-parent="${escapeHtml(message.message_id)}">reply</button>
      ${children.length ? `<ul class="replies">${children.map(renderThread).join('')}</ul>` : ''}
    </li>`;
  };
  const roots = byParent.get(null) ?? [];
  return `<div class="tab-discussion">
    <h2>Discussion</h2>
    <ul class="thread">${roots.map(renderThread).join('') || '<li class="empty">no messages yet</li>'}</ul>
    <form id="discussion-form">
      <input type="hidden" name="parent_id" value="">
      <textarea name="body" placeholder="Join the discussion (markdown supported)" required></textarea>
      <button type="submit">Post message</button>
    </form>
  </div>`;
}

// -- Documentation --------------------------------------------------------------------

export function renderDocumentation(
  documents: DocumentRecord[],
  preview: DocumentDetail | null,
  contentUrl: (documentId: string) => string,
): string {
  const items = documents
    .map(
      (doc) => `<li class="document" data-document-id="${escapeHtml(doc.document_id)}">
      <button class="preview" data-document-id="${escapeHtml(doc.document_id)}">${escapeHtml(
        doc.title,
      )}</button>
      <small>${doc.byte_size} bytes · ${escapeHtml(doc.media_type)}</small>
      <a class="download" href="${escapeHtml(contentUrl(doc.document_id))}" download>download</a>
    </li>`,
    )
    .join('');
  const previewBlock = preview
    ? `<section class="preview-pane">
        <h3>${escapeHtml(preview.title)}</h3>
        ${
          preview.content_text !== null
            ? `<article class="markdown">${renderMarkdown(preview.content_text)}</article>`
            : '<p class="binary">Binary document; use download.</p>'
        }
      </section>`
    : '<section class="preview-pane"><p class="empty">Select a document to preview.</p></section>';
  return `<div class="tab-documentation">
    <h2>Documentation</h2>
    <ul class="documents">${items || '<li class="empty">no documents yet</li>'}</ul>
    ${previewBlock}
  </div>`;
}
