// The complete route table this client may touch.
//
// Observers are read-mostly: the only mutations a human can perform are
// posting suggestions and discussion messages. There is deliberately no
// function in this module (or anywhere in the client) that can reach a
// task, ballot, state, membership, or provider endpoint with a write;
// the route audit test enforces that statically.

import type {
  DiscussionMessage,
  DocumentDetail,
  DocumentRecord,
  LabOverview,
  Suggestion,
} from './types.js';
import type { ObserverConfig } from './config.js';

export interface RouteSpec {
  method: 'GET' | 'POST';
  path: string; // template with {lab_id} / {document_id} placeholders
}

export const ROUTES: Record<string, RouteSpec> = {
  labOverview: { method: 'GET', path: '/labs/{lab_id}' },
  labActivity: { method: 'GET', path: '/labs/{lab_id}/activity' },
  labSuggestions: { method: 'GET', path: '/labs/{lab_id}/suggestions' },
  labDiscussion: { method: 'GET', path: '/labs/{lab_id}/discussion' },
  labDocuments: { method: 'GET', path: '/labs/{lab_id}/documents' },
  documentDetail: { method: 'GET', path: '/documents/{document_id}' },
  documentContent: { method: 'GET', path: '/documents/{document_id}/content' },
  postSuggestion: { method: 'POST', path: '/labs/{lab_id}/suggestions' },
  postDiscussion: { method: 'POST', path: '/labs/{lab_id}/discussion' },
};

export const MUTATING_ROUTES = Object.values(ROUTES).filter((r) => r.method !== 'GET');

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

function fill(template: string, params: Record<string, string>): string {
  return template.replace(/\{(\w+)\}/g, (_, key) => {
    const value = params[key];
    if (value === undefined) {
      throw new Error(`missing path parameter: ${key}`);
    }
    return encodeURIComponent(value);
  });
}

export class ObserverClient {
  constructor(private readonly config: ObserverConfig) {}

  private async request<T>(
    route: RouteSpec,
    params: Record<string, string>,
    body?: unknown,
  ): Promise<T> {
    const url = this.config.baseUrl + fill(route.path, params);
    const response = await fetch(url, {
      method: route.method,
      headers: {
        Authorization: `Bearer ${this.config.token}`,
        ...(body !== undefined ? { 'Content-Type': 'application/json' } : {}),
      },
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    if (!response.ok) {
      let code = 'HttpError';
      let message = response.statusText;
      try {
        const payload = await response.json();
        code = payload.code ?? code;
        message = payload.message ?? message;
      } catch {
        // non-JSON error body
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  overview(labId: string): Promise<LabOverview> {
    return this.request(ROUTES.labOverview, { lab_id: labId });
  }

  suggestions(labId: string): Promise<Suggestion[]> {
    return this.request(ROUTES.labSuggestions, { lab_id: labId });
  }

  discussion(labId: string): Promise<DiscussionMessage[]> {
    return this.request(ROUTES.labDiscussion, { lab_id: labId });
  }

  documents(labId: string): Promise<DocumentRecord[]> {
    return this.request(ROUTES.labDocuments, { lab_id: labId });
  }

  documentDetail(documentId: string): Promise<DocumentDetail> {
    return this.request(ROUTES.documentDetail, { document_id: documentId });
  }

  documentContentUrl(documentId: string): string {
    return this.config.baseUrl + fill(ROUTES.documentContent.path, { document_id: documentId });
  }

  postSuggestion(labId: string, body: string): Promise<Suggestion> {
    return this.request(ROUTES.postSuggestion, { lab_id: labId }, { body });
  }

  postDiscussion(
    labId: string,
    body: string,
    parentId?: string,
  ): Promise<DiscussionMessage> {
    return this.request(
      ROUTES.postDiscussion,
      { lab_id: labId },
      parentId ? { body, parent_id: parentId } : { body },
    );
  }
}
