/** Typed client for the platform's JSON API. */

import { getApiBase } from "./config.js";

export interface Quantity {
  value: number;
  unit: string;
}

export type RecordDocument = Record<string, unknown>;

export interface Violation {
  rule_id: string;
  field_path: string;
  observed: string;
  message: string;
}

export interface ValidationReport {
  record_ref: string;
  catalog_version: string;
  passed: boolean;
  violations: Violation[];
  evaluated_at: string;
}

export interface AuditEvent {
  actor: string;
  identity: string;
  action: string;
  reason?: string | null;
  at: string;
}

export interface Envelope {
  envelope_id: string;
  state: string;
  record: RecordDocument;
  validation?: ValidationReport | null;
  decisions: AuditEvent[];
  created_at: string;
  updated_at: string;
}

export interface ApiError {
  status: number;
  code: string;
  detail: string;
  violations?: ValidationReport | null;
  envelope_id?: string | null;
}

export interface RecordSummary {
  record_id: string;
  polymers: string[];
  solvents: string[];
  needle_class?: string | null;
  collector_class?: string | null;
  concentration_wtpct?: number | null;
  voltage_kv?: number | null;
  flow_rate_ml_h?: number | null;
  distance_cm?: number | null;
  fiber_diameter_nm?: number | null;
  morphology?: string | null;
  instabilities: string[];
  image_count: number;
}

export interface QueryPage {
  total: number;
  limit: number;
  offset: number;
  items: RecordSummary[];
}

export interface FieldSummary {
  n: number;
  median?: number | null;
  q1?: number | null;
  q3?: number | null;
  min?: number | null;
  max?: number | null;
}

export interface SummaryStats {
  n: number;
  fields: Record<string, FieldSummary>;
}

export interface HistogramBin {
  lower: number;
  upper: number;
  count: number;
}

export interface Histogram {
  n: number;
  field: string;
  bins: HistogramBin[];
}

export interface VocabularyAxis {
  axis: string;
  kind: "categorical" | "quantitative";
  multi_valued?: boolean;
  terms?: string[];
  unit?: string;
}

export interface VocabularyManifest {
  version: string;
  axes: VocabularyAxis[];
}

export interface RuleDescriptor {
  rule_id: string;
  rule_class: string;
  description: string;
  severity: string;
}

export interface ReleaseManifest {
  label: string;
  released_at: string;
  record_count: number;
  dataset_digest: string;
  images_digest: string;
  vocabulary_version: string;
  catalog_version: string;
}

export class RequestFailed extends Error {
  constructor(public readonly error: ApiError) {
    super(`${error.code}: ${error.detail}`);
  }
}

export type Result<T> =
  | { ok: true; status: number; body: T }
  | { ok: false; status: number; error: ApiError };

async function request<T>(
  method: string,
  path: string,
  options: { token?: string | null; body?: unknown; params?: URLSearchParams } = {},
): Promise<Result<T>> {
  const headers: Record<string, string> = {};
  if (options.token) headers["Authorization"] = `Bearer ${options.token}`;
  let payload: string | undefined;
  if (options.body !== undefined) {
    headers["Content-Type"] = "application/json";
    payload = JSON.stringify(options.body);
  }
  const query = options.params ? `?${options.params.toString()}` : "";
  const response = await fetch(`${getApiBase()}${path}${query}`, {
    method,
    headers,
    body: payload,
  });
  const text = await response.text();
  const parsed = text ? JSON.parse(text) : null;
  if (response.ok) {
    return { ok: true, status: response.status, body: parsed as T };
  }
  return { ok: false, status: response.status, error: parsed as ApiError };
}

function unwrap<T>(result: Result<T>): T {
  if (!result.ok) throw new RequestFailed(result.error);
  return result.body;
}

export const api = {
  health: async () => unwrap(await request<{ status: string; records: number }>("GET", "/api/v1/health")),

  submitRecord: (record: RecordDocument, attribution: { name: string; contact: string }, token: string | null) =>
    request<Envelope>("POST", "/api/v1/records", { token, body: { record, attribution } }),

  reviseEnvelope: (envelopeId: string, record: RecordDocument, token: string | null) =>
    request<Envelope>("POST", `/api/v1/envelopes/${envelopeId}/revise`, { token, body: { record } }),

  getEnvelope: async (envelopeId: string) =>
    unwrap(await request<Envelope>("GET", `/api/v1/envelopes/${envelopeId}`)),

  moderationQueue: async (token: string | null) =>
    unwrap(await request<Envelope[]>("GET", "/api/v1/moderation/queue", { token })),

  claim: (envelopeId: string, token: string | null) =>
    request<Envelope>("POST", `/api/v1/moderation/${envelopeId}/claim`, { token }),

  decide: (envelopeId: string, decision: "accept" | "reject", reason: string | null, token: string | null) =>
    request<Envelope>("POST", `/api/v1/moderation/${envelopeId}/decision`, {
      token,
      body: { decision, reason },
    }),

  queryRecords: async (params: URLSearchParams) =>
    unwrap(await request<QueryPage>("GET", "/api/v1/records", { params })),

  statsSummary: async (params: URLSearchParams) =>
    unwrap(await request<SummaryStats>("GET", "/api/v1/stats/summary", { params })),

  statsHistogram: async (params: URLSearchParams) =>
    unwrap(await request<Histogram>("GET", "/api/v1/stats/histogram", { params })),

  vocabulary: async () =>
    unwrap(await request<VocabularyManifest>("GET", "/api/v1/vocabulary/emcv")),

  rules: async () =>
    unwrap(
      await request<{ catalog_version: string; rules: RuleDescriptor[] }>("GET", "/api/v1/rules"),
    ),

  releases: async () => unwrap(await request<ReleaseManifest[]>("GET", "/api/v1/releases")),

  releaseArtifactUrl: (label: string, artifact: string) =>
    `${getApiBase()}/api/v1/releases/${label}/${artifact}`,
};
