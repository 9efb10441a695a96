/** Shared payload types mirroring the HTTP API documents. */

export interface BiasHistoryRecord {
  step: number;
  sift_pipeline: string;
  bias_features: string[];
  bias_detection_function: string;
  bias_mitigation_function: string;
  mitigation_success_status: '' | 'TRUE' | 'FALSE';
  details: string;
}

export interface BiasHistoryExport {
  bias_history: BiasHistoryRecord[];
}

export interface ProjectDocument {
  project_id: string;
  name: string;
  description: string;
  data_location: string;
  status: string;
  revision: number;
  similar_projects: string[];
  older_versions: string[];
  timeout_days: number | null;
  bias_history: BiasHistoryRecord[];
  [key: string]: unknown;
}

export interface PendingGate {
  gate_id: string;
  project_id: string;
  pipeline: string;
  stage: string;
  prompt: string;
  options: string[];
  hog_refs: [string, number][];
}

export interface HogEntry {
  sme_field: string;
  question: string;
  answer: string;
  stages: string[];
  tags: string[];
}

export interface StageSpec {
  name: string;
  human: boolean;
  history: boolean;
  options: string[];
}

export type StageTable = Record<string, StageSpec[]>;

export interface SimilarityHit {
  project_id: string;
  score: number;
  verified: boolean;
}

export type Outcome =
  | { outcome: 'Advanced'; pipeline: string; stage: string }
  | { outcome: 'Blocked'; gate: PendingGate }
  | { outcome: 'Exited'; status: string };

export interface SimulationSummary {
  project_id: string;
  status: string;
  records: number;
  blocked_at: { pipeline: string; stage: string } | null;
}

export interface DecisionRequest {
  decision: string;
  rationale: string;
  decider: string;
  payload?: Record<string, unknown>;
}
