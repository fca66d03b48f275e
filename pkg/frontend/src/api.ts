import type {
  PredictOutcome,
  QuestionnairePayload,
  ValidationError,
} from "./types.js";

/**
 * Thin client for the questionnaire service.
 *
 * Only one predict request is in flight at a time: submitting again aborts
 * the previous request before issuing the new one.
 */
export class ApiClient {
  private inFlight: AbortController | null = null;

  constructor(private readonly baseUrl: string = "") {}

  async fetchQuestionnaire(): Promise<QuestionnairePayload> {
    const response = await fetch(`${this.baseUrl}/questionnaire`);
    if (!response.ok) {
      throw new Error(`questionnaire request failed: ${response.status}`);
    }
    return (await response.json()) as QuestionnairePayload;
  }

  async predict(
    answers: Record<string, number>,
    full = false,
  ): Promise<PredictOutcome> {
    this.inFlight?.abort();
    const controller = new AbortController();
    this.inFlight = controller;
    try {
      const url = `${this.baseUrl}/predict${full ? "?full=true" : ""}`;
      const response = await fetch(url, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ answers }),
        signal: controller.signal,
      });
      if (response.status === 422) {
        return {
          ok: false,
          error: (await response.json()) as ValidationError,
        };
      }
      if (!response.ok) {
        throw new Error(`predict request failed: ${response.status}`);
      }
      return { ok: true, body: await response.json() };
    } finally {
      if (this.inFlight === controller) {
        this.inFlight = null;
      }
    }
  }
}
