import { vi } from "vitest";

import questionnaire from "./fixtures/questionnaire.json";
import predict from "./fixtures/predict.json";
import predictEdited from "./fixtures/predict_edited.json";
import validationError from "./fixtures/validation_error.json";
import answers from "./fixtures/answers.json";

import type {
  PredictResponse,
  QuestionnairePayload,
  ValidationError,
} from "../src/types.js";

export const fixtures = {
  questionnaire: questionnaire as unknown as QuestionnairePayload,
  predict: predict as unknown as PredictResponse,
  predictEdited: predictEdited as unknown as PredictResponse,
  validationError: validationError as unknown as ValidationError,
  answers: answers as unknown as Record<string, number>,
};

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export interface FetchLog {
  predictCalls: number;
  questionnaireCalls: number;
  lastBody: { answers: Record<string, number> } | null;
}

/**
 * Install a fetch mock that serves the captured service fixtures. The
 * predict handler answers with the edited-fixture response when the A2
 * answer matches the edited request, mirroring the real service.
 */
export function mockService(): FetchLog {
  const log: FetchLog = {
    predictCalls: 0,
    questionnaireCalls: 0,
    lastBody: null,
  };
  vi.stubGlobal(
    "fetch",
    vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
      const url = String(input);
      if (url.endsWith("/questionnaire")) {
        log.questionnaireCalls += 1;
        return jsonResponse(fixtures.questionnaire);
      }
      if (url.includes("/predict")) {
        log.predictCalls += 1;
        const body = JSON.parse(String(init?.body));
        log.lastBody = body;
        const missing = fixtures.questionnaire.items.some(
          (item) => body.answers[item.code] === undefined,
        );
        if (missing) {
          return jsonResponse(fixtures.validationError, 422);
        }
        if (body.answers["A2"] === 3) {
          return jsonResponse(fixtures.predictEdited);
        }
        return jsonResponse(fixtures.predict);
      }
      throw new Error(`unexpected request: ${url}`);
    }),
  );
  return log;
}

/** Answer every question in the rendered form via its DOM controls. */
export function fillForm(
  root: HTMLElement,
  answers: Record<string, number>,
): void {
  for (const [code, value] of Object.entries(answers)) {
    const field = root.querySelector<HTMLElement>(
      `.question[data-code="${code}"]`,
    );
    if (!field) throw new Error(`no rendered question for ${code}`);
    const radio = field.querySelector<HTMLInputElement>(
      `input[type="radio"][value="${value}"]`,
    );
    if (radio) {
      radio.checked = true;
      radio.dispatchEvent(new Event("change", { bubbles: true }));
      continue;
    }
    const numeric = field.querySelector<HTMLInputElement>(
      'input[type="number"]',
    );
    if (!numeric) throw new Error(`no control for ${code}`);
    numeric.value = String(value);
    numeric.dispatchEvent(new Event("change", { bubbles: true }));
  }
}
