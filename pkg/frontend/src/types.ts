/** Wire contract of the questionnaire service. */

export interface QuestionOption {
  value: number;
  label: string;
}

export interface QuestionItem {
  code: string;
  prompt: string;
  kind: "ordinal" | "numeric";
  category: string;
  options?: QuestionOption[];
  range?: { min: number; max: number };
}

export interface QuestionnairePayload {
  items: QuestionItem[];
  artifact_fingerprint: string;
}

export interface ExplanationRule {
  code: string;
  rule: string;
  weight: number;
}

export interface PredictResponse {
  label: "Content" | "Discontent";
  probabilities: { discontent: number; content: number };
  explanation: {
    intercept: number;
    fidelity: number;
    rules: ExplanationRule[];
  };
  artifact_fingerprint: string;
  model: string;
}

export interface ValidationIssue {
  code: string;
  value: number;
  reason: string;
}

export interface ValidationError {
  error: "validation";
  missing_codes: string[];
  unknown_codes: string[];
  out_of_range: ValidationIssue[];
}

export type PredictOutcome =
  | { ok: true; body: PredictResponse }
  | { ok: false; error: ValidationError };
