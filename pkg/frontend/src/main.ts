/** Browser bootstrap: wires the service client, session controller, and
 * renderers to the page. All state transitions go through the controller,
 * so the strict present -> choose -> advance order and double-submission
 * suppression hold no matter how fast the user clicks.
 */
import { ServiceClient } from "./client.js";
import { renderError, renderHistory, renderOptions, type TableSort } from "./render.js";
import { SessionController } from "./session.js";

const $ = (id: string): HTMLElement => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
};

let controller: SessionController | null = null;
let tableSort: TableSort | undefined;

function redraw(): void {
  if (!controller) return;
  const view = controller.state;
  $("status").textContent =
    `session ${view.id} — episode ${view.episode} — ${view.status}` +
    (view.regretTrace.length > 0
      ? ` — regret ${view.regretTrace[view.regretTrace.length - 1]!.toFixed(3)}`
      : "");
  $("options").innerHTML = renderOptions(view.pending, tableSort);
  $("history").innerHTML = renderHistory(view.history);
  $("error").innerHTML = renderError(view.lastError);
}

async function startSession(): Promise<void> {
  const base = ($("base-url") as HTMLInputElement).value.trim() || "http://127.0.0.1:8000";
  const client = new ServiceClient(base);
  let config: { env: unknown; horizon: number; seed: number };
  try {
    config = JSON.parse(($("session-config") as HTMLTextAreaElement).value) as {
      env: unknown;
      horizon: number;
      seed: number;
    };
  } catch (error) {
    $("error").innerHTML = renderError(`session config is not valid JSON: ${error}`);
    return;
  }
  try {
    controller = await SessionController.create(client, {
      env: config.env,
      mode: "human",
      horizon: config.horizon,
      seed: config.seed,
    });
    tableSort = undefined;
    await controller.present();
  } catch (error) {
    $("error").innerHTML = renderError(error instanceof Error ? error.message : String(error));
  }
  redraw();
}

async function choose(index: number): Promise<void> {
  if (!controller) return;
  try {
    const outcome = await controller.submitAndAdvance(index);
    if (outcome.kind === "advanced" && outcome.result.status === "finished") {
      await controller.refreshHistory();
    }
  } catch {
    // the controller already put the message on the view
  }
  redraw();
}

function onOptionsClick(event: Event): void {
  const target = event.target as HTMLElement;
  const holder = target.closest<HTMLElement>("[data-index]");
  if (holder?.dataset.index !== undefined) {
    void choose(Number(holder.dataset.index));
    return;
  }
  const header = target.closest<HTMLElement>("th[data-coordinate]");
  if (header?.dataset.coordinate !== undefined) {
    const coordinate = Number(header.dataset.coordinate);
    tableSort =
      tableSort && tableSort.coordinate === coordinate
        ? { coordinate, direction: tableSort.direction === 1 ? -1 : 1 }
        : { coordinate, direction: 1 };
    redraw();
  }
}

$("start").addEventListener("click", () => void startSession());
$("options").addEventListener("click", onOptionsClick);
$("refresh-history").addEventListener("click", () => {
  if (controller) void controller.refreshHistory().then(redraw);
});
