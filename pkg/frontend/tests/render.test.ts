import { describe, expect, test } from "vitest";

import { renderError, renderHistory, renderOptions } from "../src/render.js";
import type { HistoryEntry, Presentation } from "../src/types.js";

function presentation(thetas: number[][]): Presentation {
  return {
    episode: 3,
    options: thetas.map((theta, i) => ({ index: i, action: `a${i}`, theta })),
  };
}

describe("renderOptions", () => {
  test("no presentation renders the waiting state", () => {
    expect(renderOptions(null)).toContain("waiting");
    expect(renderOptions({ episode: 1, options: [] })).toContain("waiting");
  });

  test("two-dimensional options render as a clickable scatter", () => {
    const html = renderOptions(
      presentation([
        [0.2, 0.9],
        [0.8, 0.3],
        [0.4, 0.4],
      ]),
    );
    expect(html).toContain("<svg");
    expect(html.match(/data-index="/g)?.length).toBe(3);
    // all three estimates trade off, so every point is white
    expect(html.match(/fill="#fff"/g)?.length).toBe(3);
    expect(html).not.toContain('fill="#111"');
  });

  test("dominated points are filled black", () => {
    const html = renderOptions(
      presentation([
        [0.5, 0.5],
        [0.6, 0.6],
      ]),
    );
    expect(html.match(/fill="#fff"/g)?.length).toBe(1);
    expect(html.match(/fill="#111"/g)?.length).toBe(1);
  });

  test("single option renders one highlighted point", () => {
    const html = renderOptions(presentation([[0.5, 0.5]]));
    expect(html.match(/<circle/g)?.length).toBe(1);
    expect(html).toContain('fill="#fff"');
  });

  test("three-dimensional payloads fall back to a table", () => {
    const html = renderOptions(
      presentation([
        [0.1, 0.2, 0.3],
        [0.3, 0.2, 0.1],
      ]),
    );
    expect(html).toContain("<table");
    expect(html).not.toContain("<svg");
    expect(html).toContain("θ3");
    expect(html.match(/<tr class="option-row/g)?.length).toBe(2);
  });

  test("table sorting reorders rows by the requested coordinate", () => {
    const html = renderOptions(
      presentation([
        [0.9, 0.2, 0.3],
        [0.1, 0.2, 0.1],
      ]),
      { coordinate: 0, direction: 1 },
    );
    const first = html.indexOf('data-index="1"');
    const second = html.indexOf('data-index="0"');
    expect(first).toBeGreaterThan(-1);
    expect(first).toBeLessThan(second);
  });

  test("action names are escaped", () => {
    const view: Presentation = {
      episode: 1,
      options: [{ index: 0, action: "<img>", theta: [0.1, 0.2] }],
    };
    const html = renderOptions(view);
    expect(html).not.toContain("<img>");
    expect(html).toContain("&lt;img&gt;");
  });
});

describe("renderHistory", () => {
  test("empty history renders the waiting state", () => {
    expect(renderHistory([])).toContain("No episodes");
  });

  test("rows show the shown estimate next to the observation", () => {
    const entry: HistoryEntry = {
      episode: 1,
      options: [{ index: 0, action: "a0", theta: [0.111, 0.222] }],
      chosen_index: 0,
      chosen_by: "human",
      observation: [0.333, 0.444],
      posterior_means: [[0.1665, 0.333]],
    };
    const html = renderHistory([entry]);
    expect(html).toContain("0.111");
    expect(html).toContain("0.333");
    expect(html).toContain("0.167");
  });
});

describe("renderError", () => {
  test("null is empty, messages are escaped", () => {
    expect(renderError(null)).toBe("");
    expect(renderError("boom <b>")).toContain("boom &lt;b&gt;");
  });
});
