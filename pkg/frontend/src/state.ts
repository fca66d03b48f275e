import type { PredictResponse, QuestionItem } from "./types.js";

/**
 * Answer state for the questionnaire form.
 *
 * Submit is allowed only when every item has an answer. Editing an answer
 * never clears the last response, so the result panel keeps showing the
 * previous prediction until a new one arrives (the what-if loop).
 */
export class FormState {
  readonly items: QuestionItem[];
  private answers = new Map<string, number>();
  lastResponse: PredictResponse | null = null;

  constructor(items: QuestionItem[]) {
    this.items = items;
  }

  setAnswer(code: string, value: number): void {
    if (!this.items.some((item) => item.code === code)) {
      throw new Error(`unknown question code ${code}`);
    }
    if (!Number.isFinite(value)) {
      this.answers.delete(code);
      return;
    }
    this.answers.set(code, value);
  }

  answerOf(code: string): number | undefined {
    return this.answers.get(code);
  }

  get answeredCount(): number {
    return this.answers.size;
  }

  get complete(): boolean {
    return this.items.every((item) => this.answers.has(item.code));
  }

  get unansweredCodes(): string[] {
    return this.items
      .filter((item) => !this.answers.has(item.code))
      .map((item) => item.code);
  }

  toRequest(): { answers: Record<string, number> } {
    const answers: Record<string, number> = {};
    for (const item of this.items) {
      const value = this.answers.get(item.code);
      if (value !== undefined) {
        answers[item.code] = value;
      }
    }
    return { answers };
  }

  recordResponse(response: PredictResponse): void {
    this.lastResponse = response;
  }
}

/** Group items by their life-domain category, preserving item order. */
export function groupByCategory(
  items: QuestionItem[],
): Map<string, QuestionItem[]> {
  const groups = new Map<string, QuestionItem[]>();
  for (const item of items) {
    const key = item.category || "other";
    const bucket = groups.get(key);
    if (bucket) {
      bucket.push(item);
    } else {
      groups.set(key, [item]);
    }
  }
  return groups;
}

/**
 * Bar color for a contribution weight. Weights are signed toward the
 * Content class by the service; green always means "toward the predicted
 * class", red means "against it".
 */
export function weightColor(
  weight: number,
  predicted: "Content" | "Discontent",
): "green" | "red" {
  const towardContent = weight >= 0;
  const predictedContent = predicted === "Content";
  return towardContent === predictedContent ? "green" : "red";
}
