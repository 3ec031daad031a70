// Payload shapes mirroring the HTTP API.

export interface RankedAnswer {
  segment_index: number;
  text: string;
  score: number;
  confidence: number;
  rank: number;
  conflicts: number[];
  low_confidence: boolean;
}

export interface AskResponse {
  question: string;
  answers: RankedAnswer[];
  cer_q: number;
  frac_q: number;
  possibly_unanswerable: boolean;
  notices: string[];
}

export interface SegmentRow {
  segment_index: number;
  text: string;
  origin: string;
}

export interface AttributeValue {
  attribute: string;
  value: string;
}

export interface LabelRow {
  segment_index: number;
  text: string;
  categories: string[];
  attribute_values: AttributeValue[];
}

export type IconName =
  | "ExpectedUse"
  | "ExpectedCollection"
  | "PreciseLocation"
  | "DataRetention"
  | "ChildrenPrivacy";

export type IconColor = "Red" | "Green" | "Yellow" | "Gray";

export type Strategy = "conservative" | "permissive" | "very_permissive";

export interface IconAssignment {
  icon: IconName;
  color: IconColor;
  strategy: Strategy;
  evidence: number[];
}

export type ApiErrorCode =
  | "bad_input"
  | "not_found"
  | "model_missing"
  | "ambiguous_question"
  | "internal";

export interface ApiErrorBody {
  code: ApiErrorCode;
  message: string;
  detail?: string | null;
}

export interface IngestResponse {
  policy_id: string;
  segment_count: number;
}

export type ConfidenceBand = "high" | "medium" | "low";

// thresholds mirror the service config (qa.accept_threshold = 0.6)
export function confidenceBand(confidence: number): ConfidenceBand {
  if (confidence >= 0.6) return "high";
  if (confidence >= 0.3) return "medium";
  return "low";
}
