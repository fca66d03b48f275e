import { groupByCategory, weightColor } from "./state.js";
import type {
  PredictResponse,
  QuestionItem,
  ValidationError,
} from "./types.js";

const CATEGORY_ORDER = ["physical", "mental", "economic", "social",
                        "cultural"];

export interface FormHandlers {
  onAnswer: (code: string, value: number) => void;
}

export function renderUnavailable(root: HTMLElement, detail: string): void {
  root.innerHTML = "";
  const panel = document.createElement("div");
  panel.className = "unavailable";
  panel.setAttribute("role", "alert");
  panel.textContent = `Service unavailable: ${detail}`;
  root.append(panel);
}

/** Build the questionnaire form, grouped into the five life domains. */
export function renderQuestionnaire(
  root: HTMLElement,
  items: QuestionItem[],
  handlers: FormHandlers,
): void {
  root.innerHTML = "";
  if (items.length === 0) {
    renderUnavailable(root, "the questionnaire is empty");
    return;
  }
  const groups = groupByCategory(items);
  const ordered = [
    ...CATEGORY_ORDER.filter((c) => groups.has(c)),
    ...[...groups.keys()].filter((c) => !CATEGORY_ORDER.includes(c)),
  ];
  for (const category of ordered) {
    const section = document.createElement("section");
    section.className = "category";
    section.dataset.category = category;
    const heading = document.createElement("h2");
    heading.textContent = category;
    section.append(heading);
    for (const item of groups.get(category) ?? []) {
      section.append(buildQuestion(item, handlers));
    }
    root.append(section);
  }
}

function buildQuestion(item: QuestionItem, handlers: FormHandlers):
    HTMLElement {
  const field = document.createElement("fieldset");
  field.className = "question unanswered";
  field.dataset.code = item.code;
  const legend = document.createElement("legend");
  legend.textContent = item.prompt;
  field.append(legend);

  const markAnswered = () => {
    field.classList.remove("unanswered");
    field.classList.remove("invalid");
    const note = field.querySelector(".issue");
    if (note) note.remove();
  };

  if (item.kind === "ordinal" && item.options) {
    for (const option of item.options) {
      const label = document.createElement("label");
      const input = document.createElement("input");
      input.type = "radio";
      input.name = item.code;
      input.value = String(option.value);
      input.addEventListener("change", () => {
        markAnswered();
        handlers.onAnswer(item.code, option.value);
      });
      label.append(input, document.createTextNode(` ${option.label}`));
      field.append(label);
    }
  } else {
    const input = document.createElement("input");
    input.type = "number";
    input.name = item.code;
    if (item.range) {
      input.min = String(item.range.min);
      input.max = String(item.range.max);
    }
    input.addEventListener("change", () => {
      const value = Number(input.value);
      if (input.value !== "" && Number.isFinite(value)) {
        markAnswered();
        handlers.onAnswer(item.code, value);
      } else {
        field.classList.add("unanswered");
        handlers.onAnswer(item.code, Number.NaN);
      }
    });
    field.append(input);
  }
  return field;
}

/** Flag the items named by a validation error, inline. */
export function renderValidationIssues(
  root: HTMLElement,
  error: ValidationError,
): void {
  const byCode = new Map<string, string>();
  for (const code of error.missing_codes) {
    byCode.set(code, "an answer is required");
  }
  for (const issue of error.out_of_range) {
    byCode.set(issue.code, issue.reason);
  }
  for (const [code, reason] of byCode) {
    const field = root.querySelector<HTMLElement>(
      `.question[data-code="${code}"]`,
    );
    if (!field) continue;
    field.classList.add("invalid");
    let note = field.querySelector<HTMLElement>(".issue");
    if (!note) {
      note = document.createElement("p");
      note.className = "issue";
      field.append(note);
    }
    note.textContent = reason;
  }
}

const WIDTH_DECIMALS = 1; // percent widths, within one pixel-rounding unit

/** Render the probability pair and the signed contribution bars. */
export function renderResult(
  root: HTMLElement,
  response: PredictResponse | null,
): void {
  root.innerHTML = "";
  if (response === null) {
    const hint = document.createElement("p");
    hint.className = "hint";
    hint.textContent = "Answer every question, then submit.";
    root.append(hint);
    return;
  }

  const verdict = document.createElement("h2");
  verdict.className = "verdict";
  verdict.textContent = response.label;
  root.append(verdict);

  const probs = document.createElement("div");
  probs.className = "probabilities";
  const entries: Array<["content" | "discontent", string]> = [
    ["content", "Content"],
    ["discontent", "Discontent"],
  ];
  for (const [key, title] of entries) {
    const value = response.probabilities[key];
    const row = document.createElement("div");
    row.className = "prob-row";
    const label = document.createElement("span");
    label.className = "prob-label";
    label.textContent = title;
    const track = document.createElement("div");
    track.className = "track";
    const bar = document.createElement("div");
    bar.className = `prob-bar ${key}`;
    bar.style.width = `${(value * 100).toFixed(WIDTH_DECIMALS)}%`;
    bar.dataset.value = String(value);
    const percent = document.createElement("span");
    percent.className = "prob-value";
    percent.textContent = `${(value * 100).toFixed(1)}%`;
    track.append(bar);
    row.append(label, track, percent);
    probs.append(row);
  }
  root.append(probs);

  const rules = response.explanation.rules;
  const section = document.createElement("div");
  section.className = "contributions";
  const heading = document.createElement("h3");
  heading.textContent = "Why";
  section.append(heading);
  const maxWeight = Math.max(...rules.map((r) => Math.abs(r.weight)), 0);
  if (rules.length === 0 || maxWeight === 0) {
    const none = document.createElement("p");
    none.className = "no-factors";
    none.textContent = "No significant factors.";
    section.append(none);
  } else {
    for (const rule of rules) {
      const row = document.createElement("div");
      row.className = "rule-row";
      const label = document.createElement("span");
      label.className = "rule-label";
      label.textContent = rule.rule;
      const track = document.createElement("div");
      track.className = "track";
      const bar = document.createElement("div");
      const color = weightColor(rule.weight, response.label);
      bar.className = `rule-bar ${color}`;
      const width = (Math.abs(rule.weight) / maxWeight) * 100;
      bar.style.width = `${width.toFixed(WIDTH_DECIMALS)}%`;
      bar.dataset.weight = String(rule.weight);
      bar.dataset.code = rule.code;
      track.append(bar);
      row.append(label, track);
      section.append(row);
    }
  }
  root.append(section);

  const footer = document.createElement("p");
  footer.className = "model-note";
  footer.textContent =
    `model ${response.model}, artifact ` +
    `${response.artifact_fingerprint.slice(0, 12)}`;
  root.append(footer);
}
