import { beforeEach, describe, expect, it, vi } from "vitest";

import { renderQuestionnaire, renderResult } from "../src/view.js";
import { fixtures } from "./helpers.js";

describe("renderQuestionnaire", () => {
  let root: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = '<div id="app"></div>';
    root = document.getElementById("app")!;
  });

  it("renders 27 controls across 5 category sections", () => {
    renderQuestionnaire(root, fixtures.questionnaire.items,
                        { onAnswer: vi.fn() });
    expect(root.querySelectorAll("section.category")).toHaveLength(5);
    expect(root.querySelectorAll(".question")).toHaveLength(27);
  });

  it("shows a service-unavailable view for an empty payload", () => {
    renderQuestionnaire(root, [], { onAnswer: vi.fn() });
    const panel = root.querySelector(".unavailable");
    expect(panel?.textContent).toMatch(/unavailable/i);
  });

  it("flags unanswered items and clears the flag on answer", () => {
    const onAnswer = vi.fn();
    renderQuestionnaire(root, fixtures.questionnaire.items, { onAnswer });
    const a2 = root.querySelector<HTMLElement>('.question[data-code="A2"]')!;
    expect(a2.classList.contains("unanswered")).toBe(true);
    const radio = a2.querySelector<HTMLInputElement>('input[value="2"]')!;
    radio.checked = true;
    radio.dispatchEvent(new Event("change", { bubbles: true }));
    expect(a2.classList.contains("unanswered")).toBe(false);
    expect(onAnswer).toHaveBeenCalledWith("A2", 2);
  });

  it("uses native inputs only, so keyboard completion works", () => {
    renderQuestionnaire(root, fixtures.questionnaire.items,
                        { onAnswer: vi.fn() });
    for (const field of root.querySelectorAll(".question")) {
      const controls = field.querySelectorAll("input");
      expect(controls.length).toBeGreaterThan(0);
      for (const control of controls) {
        expect(["radio", "number"]).toContain(control.type);
      }
    }
  });

  it("labels options straight from the payload", () => {
    renderQuestionnaire(root, fixtures.questionnaire.items,
                        { onAnswer: vi.fn() });
    const a2 = root.querySelector('.question[data-code="A2"]')!;
    const labels = [...a2.querySelectorAll("label")].map(
      (l) => l.textContent?.trim(),
    );
    expect(labels).toEqual(["Very poor", "Poor", "Well", "Very well"]);
  });
});

describe("renderResult", () => {
  let root: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = '<div id="result"></div>';
    root = document.getElementById("result")!;
  });

  it("shows probability bars with values verbatim from the response", () => {
    renderResult(root, fixtures.predict);
    const content = root.querySelector<HTMLElement>(".prob-bar.content")!;
    const discontent = root.querySelector<HTMLElement>(
      ".prob-bar.discontent",
    )!;
    expect(Number(content.dataset.value)).toBe(
      fixtures.predict.probabilities.content,
    );
    expect(Number(discontent.dataset.value)).toBe(
      fixtures.predict.probabilities.discontent,
    );
    const expectedWidth =
      (fixtures.predict.probabilities.content * 100).toFixed(1) + "%";
    expect(content.style.width).toBe(expectedWidth);
  });

  it("keeps bar lengths proportional to |weight|", () => {
    renderResult(root, fixtures.predict);
    const bars = [...root.querySelectorAll<HTMLElement>(".rule-bar")];
    expect(bars).toHaveLength(fixtures.predict.explanation.rules.length);
    const maxWeight = Math.max(
      ...fixtures.predict.explanation.rules.map((r) => Math.abs(r.weight)),
    );
    for (const bar of bars) {
      const weight = Math.abs(Number(bar.dataset.weight));
      const expected = ((weight / maxWeight) * 100).toFixed(1) + "%";
      expect(bar.style.width).toBe(expected);
    }
  });

  it("colors bars green toward the predicted class, red against", () => {
    renderResult(root, fixtures.predict);
    const predictedContent = fixtures.predict.label === "Content";
    for (const bar of root.querySelectorAll<HTMLElement>(".rule-bar")) {
      const weight = Number(bar.dataset.weight);
      const towardPredicted = (weight >= 0) === predictedContent;
      expect(bar.classList.contains(towardPredicted ? "green" : "red"))
        .toBe(true);
    }
  });

  it("says so when there are no significant factors", () => {
    const zeroed = {
      ...fixtures.predict,
      explanation: {
        ...fixtures.predict.explanation,
        rules: fixtures.predict.explanation.rules.map((r) => ({
          ...r,
          weight: 0,
        })),
      },
    };
    renderResult(root, zeroed);
    expect(root.querySelector(".no-factors")?.textContent).toMatch(
      /no significant factors/i,
    );
  });
});
