/** Markup builders for the session page. Pure functions from view state to
 * HTML/SVG strings; main.ts owns the DOM and event wiring.
 *
 * Two-dimensional presentations draw as a scatter of clickable points:
 * non-dominated estimates are white-filled, dominated ones black-filled.
 * Higher-dimensional presentations fall back to a sortable coordinate
 * table. No options yet means a waiting state, not an error.
 */
import { frontOptionIndexes } from "./dominance.js";
import type { HistoryEntry, OptionView, Presentation } from "./types.js";

const WIDTH = 480;
const HEIGHT = 420;
const MARGIN = 44;
const POINT_RADIUS = 9;

export interface TableSort {
  coordinate: number;
  direction: 1 | -1;
}

export function renderOptions(presentation: Presentation | null, sort?: TableSort): string {
  if (!presentation || presentation.options.length === 0) {
    return `<div class="waiting">Waiting for the next presentation…</div>`;
  }
  const dimension = presentation.options[0]!.theta.length;
  const header = `<h3>Episode ${presentation.episode}: pick your preferred option</h3>`;
  const body =
    dimension === 2
      ? renderScatter(presentation.options)
      : renderTable(presentation.options, sort);
  return header + body;
}

function renderScatter(options: readonly OptionView[]): string {
  const front = frontOptionIndexes(options as OptionView[]);
  const xs = options.map((o) => o.theta[0]!);
  const ys = options.map((o) => o.theta[1]!);
  const toX = scale(Math.min(...xs), Math.max(...xs), MARGIN, WIDTH - MARGIN);
  const toY = scale(Math.min(...ys), Math.max(...ys), HEIGHT - MARGIN, MARGIN);
  const points = options
    .map((option) => {
      const cx = toX(option.theta[0]!).toFixed(1);
      const cy = toY(option.theta[1]!).toFixed(1);
      const dominated = !front.has(option.index);
      const fill = dominated ? "#111" : "#fff";
      const klass = dominated ? "option-point dominated" : "option-point";
      const label = escapeHtml(option.action);
      return (
        `<g class="${klass}" data-index="${option.index}" cursor="pointer">` +
        `<circle cx="${cx}" cy="${cy}" r="${POINT_RADIUS}" fill="${fill}" stroke="#111" stroke-width="1.5">` +
        `<title>${label}: (${option.theta.map(short).join(", ")})</title>` +
        `</circle>` +
        `<text x="${cx}" y="${Number(cy) - POINT_RADIUS - 4}" text-anchor="middle" font-size="11">${label}</text>` +
        `</g>`
      );
    })
    .join("");
  const axes =
    `<line x1="${MARGIN}" y1="${HEIGHT - MARGIN}" x2="${WIDTH - MARGIN}" y2="${HEIGHT - MARGIN}" stroke="#888"/>` +
    `<line x1="${MARGIN}" y1="${MARGIN}" x2="${MARGIN}" y2="${HEIGHT - MARGIN}" stroke="#888"/>` +
    `<text x="${WIDTH / 2}" y="${HEIGHT - 8}" text-anchor="middle" font-size="12">objective 1</text>` +
    `<text x="12" y="${HEIGHT / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 12 ${HEIGHT / 2})">objective 2</text>`;
  return (
    `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" width="${WIDTH}" height="${HEIGHT}" role="img">` +
    axes +
    points +
    `</svg>` +
    `<p class="legend">white = non-dominated estimate, black = dominated</p>`
  );
}

function renderTable(options: readonly OptionView[], sort?: TableSort): string {
  const dimension = options[0]!.theta.length;
  const rows = [...options];
  if (sort) {
    rows.sort(
      (a, b) => sort.direction * (a.theta[sort.coordinate]! - b.theta[sort.coordinate]!),
    );
  }
  const front = frontOptionIndexes(options as OptionView[]);
  const headers = Array.from(
    { length: dimension },
    (_, i) => `<th data-coordinate="${i}" class="sortable">θ${i + 1}</th>`,
  ).join("");
  const body = rows
    .map((option) => {
      const klass = front.has(option.index) ? "option-row" : "option-row dominated";
      const cells = option.theta.map((v) => `<td>${short(v)}</td>`).join("");
      return (
        `<tr class="${klass}" data-index="${option.index}">` +
        `<td>${escapeHtml(option.action)}</td>` +
        cells +
        `</tr>`
      );
    })
    .join("");
  return (
    `<table class="options-table"><thead><tr><th>action</th>${headers}</tr></thead>` +
    `<tbody>${body}</tbody></table>` +
    `<p class="legend">greyed rows are dominated</p>`
  );
}

export function renderHistory(entries: readonly HistoryEntry[]): string {
  if (entries.length === 0) return `<div class="waiting">No episodes played yet.</div>`;
  const rows = entries
    .map((entry) => {
      const chosen = entry.options.find((o) => o.index === entry.chosen_index);
      const estimate = chosen ? chosen.theta.map(short).join(", ") : "—";
      const observed = entry.observation.map(short).join(", ");
      const mean = entry.posterior_means[entry.chosen_index];
      const meanText = mean && mean.length > 0 ? mean.map(short).join(", ") : "—";
      return (
        `<tr><td>${entry.episode}</td>` +
        `<td>${escapeHtml(chosen ? chosen.action : String(entry.chosen_index))}</td>` +
        `<td>(${estimate})</td><td>(${observed})</td><td>(${meanText})</td></tr>`
      );
    })
    .join("");
  return (
    `<table class="history-table">` +
    `<thead><tr><th>episode</th><th>chosen</th><th>θ shown</th><th>observed</th><th>posterior mean</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

export function renderError(message: string | null): string {
  if (!message) return "";
  return `<div class="error-banner" role="alert">${escapeHtml(message)} — retry when ready.</div>`;
}

function scale(lo: number, hi: number, outLo: number, outHi: number): (v: number) => number {
  const span = hi - lo;
  if (span === 0) return () => (outLo + outHi) / 2;
  return (v) => outLo + ((v - lo) / span) * (outHi - outLo);
}

function short(value: number): string {
  return value.toFixed(3);
}

function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
