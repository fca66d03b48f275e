import { ApiClient } from "./api.js";
import { FormState } from "./state.js";
import {
  renderQuestionnaire,
  renderResult,
  renderUnavailable,
  renderValidationIssues,
} from "./view.js";

export interface App {
  state: FormState;
  submit: () => Promise<void>;
}

/** Wire the form, submit button, and result panel together. */
export async function boot(
  root: HTMLElement,
  api: ApiClient = new ApiClient(),
): Promise<App | null> {
  root.innerHTML = "";
  const form = document.createElement("div");
  form.id = "form";
  const controls = document.createElement("div");
  controls.id = "controls";
  const submitButton = document.createElement("button");
  submitButton.id = "submit";
  submitButton.type = "button";
  submitButton.textContent = "Predict";
  submitButton.disabled = true;
  const progress = document.createElement("span");
  progress.id = "progress";
  controls.append(submitButton, progress);
  const result = document.createElement("div");
  result.id = "result";
  root.append(form, controls, result);

  let payload;
  try {
    payload = await api.fetchQuestionnaire();
  } catch (error) {
    renderUnavailable(root, String(error));
    return null;
  }
  if (!payload.items.length) {
    renderUnavailable(root, "the questionnaire is empty");
    return null;
  }

  const state = new FormState(payload.items);

  const refreshControls = () => {
    submitButton.disabled = !state.complete;
    progress.textContent =
      `${state.answeredCount} / ${state.items.length} answered`;
  };

  renderQuestionnaire(form, payload.items, {
    onAnswer: (code, value) => {
      state.setAnswer(code, value);
      refreshControls();
    },
  });
  refreshControls();
  renderResult(result, null);

  const submit = async () => {
    if (!state.complete) {
      return;
    }
    let outcome;
    try {
      outcome = await api.predict(state.toRequest().answers);
    } catch (error) {
      if ((error as Error).name === "AbortError") {
        return; // superseded by a newer submit
      }
      renderUnavailable(result, String(error));
      return;
    }
    if (outcome.ok) {
      state.recordResponse(outcome.body);
      renderResult(result, outcome.body);
    } else {
      renderValidationIssues(form, outcome.error);
    }
  };

  submitButton.addEventListener("click", () => {
    void submit();
  });
  return { state, submit };
}

declare global {
  interface Window {
    lifesatBooted?: Promise<App | null>;
  }
}

if (typeof document !== "undefined") {
  const root = document.getElementById("app");
  if (root) {
    window.lifesatBooted = boot(root);
  }
}
