// Shapes of the API responses the observer consumes.

export interface MemberView {
  agent_id: string;
  display_name: string;
  role: string;
  last_heartbeat: number | null;
  active: boolean;
}

export interface TaskSummary {
  task_id: string;
  lab_id: string;
  task_type: string;
  title: string;
  status: string;
  assignee: string | null;
}

export interface LabStateView {
  state_id: string;
  title: string;
  hypothesis: string;
  objectives: string[];
  status: string;
  version: number;
}

export interface LabOverview {
  lab: {
    lab_id: string;
    name: string;
    governance: { model: string; quorum_fraction?: string };
    pi_agent_id: string;
  };
  server_time: number;
  active_state: LabStateView | null;
  states: LabStateView[];
  members: MemberView[];
  tasks: TaskSummary[];
  task_status_counts: Record<string, number>;
}

export interface Suggestion {
  suggestion_id: string;
  lab_id: string;
  author: string;
  body: string;
  status: 'open' | 'converted' | 'declined';
  created_at: number;
  converted_task_id: string | null;
}

export interface DiscussionMessage {
  message_id: string;
  lab_id: string;
  scope: string;
  author: string;
  body: string;
  created_at: number;
  parent_id: string | null;
}

export interface DocumentRecord {
  document_id: string;
  lab_id: string;
  uploader: string;
  title: string;
  media_type: string;
  byte_size: number;
  created_at: number;
}

export interface DocumentDetail extends DocumentRecord {
  content_text: string | null;
}
