import { ApiClient } from "./api.js";
import { Debouncer, StaleGuard } from "./debounce.js";
import {
  GoalPanel,
  SliderPanel,
  formatPrediction,
  sviPanelView,
  winnersView,
} from "./state.js";
import type { BaselineResponse, PolicyInfo, PredictResponse } from "./types.js";

const DEBOUNCE_MS = 150;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

export async function startApp(root: HTMLElement, baseUrl: string) {
  const api = new ApiClient(baseUrl);
  const guard = new StaleGuard();

  const banner = el("div", { class: "banner", hidden: "hidden" });
  root.appendChild(banner);
  const showError = (msg: string) => {
    banner.hidden = false;
    banner.textContent = msg;
  };
  const clearError = () => {
    banner.hidden = true;
  };

  let policiesMeta: PolicyInfo[];
  let baseline: BaselineResponse | null = null;
  try {
    policiesMeta = (await api.getPolicies()).policies;
  } catch (e) {
    showError(`service unreachable: ${e}`);
    return;
  }
  try {
    baseline = await api.getBaseline();
  } catch {
    baseline = null; // panel hidden below
  }

  const sliders = new SliderPanel(policiesMeta);
  const goals = new GoalPanel();

  // --- slider panel -------------------------------------------------------
  const sliderBox = el("section", { class: "sliders" });
  root.appendChild(sliderBox);
  const outputs: Record<string, HTMLElement> = {};
  for (const p of policiesMeta) {
    const row = el("div", { class: "slider-row" });
    row.appendChild(el("label", { for: `s-${p.name}` },
      `${p.name} (${p.range_label})`));
    const input = el("input", {
      id: `s-${p.name}`,
      type: "range",
      min: String(p.low),
      max: String(p.high),
      step: p.integer ? "1" : String((p.high - p.low) / 200),
      value: String(p.baseline),
    });
    const out = el("output", {}, String(p.baseline));
    outputs[p.name] = out;
    input.addEventListener("input", () => {
      const v = sliders.setValue(p.name, Number(input.value));
      out.textContent = String(v);
      schedulePrediction();
    });
    row.appendChild(input);
    row.appendChild(out);
    sliderBox.appendChild(row);
  }

  // --- prediction panel ---------------------------------------------------
  const predictionBox = el("section", { class: "prediction" });
  root.appendChild(predictionBox);

  function renderPrediction(response: PredictResponse) {
    predictionBox.replaceChildren();
    for (const [outcome, pred] of Object.entries(response.predictions)) {
      const view = formatPrediction(outcome, pred, baseline?.n_agents);
      const line = el("div", { class: "interval" });
      line.appendChild(el("strong", {}, `${view.outcome}: `));
      line.appendChild(
        el("span", {}, `${view.mean} [${view.lo}, ${view.hi}]`));
      if (baseline && outcome === "cumulative_infections") {
        const ref = formatPrediction(
          outcome,
          {
            mean: baseline.attack_rate_mean,
            sd: baseline.attack_rate_sd,
            lo90: baseline.attack_rate_mean,
            hi90: baseline.attack_rate_mean,
          },
          baseline.n_agents,
        );
        line.appendChild(el("span", { class: "ref" },
          ` (baseline ${ref.mean})`));
      }
      predictionBox.appendChild(line);
    }
    renderSvi(response);
  }

  // --- SVI panel ----------------------------------------------------------
  const sviBox = el("section", { class: "svi" });
  root.appendChild(sviBox);

  function renderSvi(response: PredictResponse | null) {
    sviBox.replaceChildren();
    if (!baseline) {
      sviBox.appendChild(el("p", {}, "baseline study unavailable"));
      return;
    }
    const view = sviPanelView(
      baseline, response?.predictions["svi_variance"] ?? null);
    for (const bar of view.bars) {
      sviBox.appendChild(
        el("div", { class: "bar" }, `${bar.bin}: ${bar.baselineRate}`));
    }
    const gauge = el("div", { class: "gauge" },
      `SVI variance: baseline ${view.baselineVariance}`
      + (view.predictedVariance ? ` vs policy ${view.predictedVariance}` : ""));
    sviBox.appendChild(gauge);
    if (view.reductionBadge) {
      sviBox.appendChild(el("span", { class: "badge" }, "variance reduced"));
    }
  }
  renderSvi(null);

  // --- request plumbing ---------------------------------------------------
  async function requestPrediction() {
    const seq = guard.issue();
    try {
      const response = await api.predict({ ...sliders.values });
      if (!guard.accept(seq)) return; // stale, a newer request is in flight
      clearError();
      sliders.acceptPrediction(response);
      renderPrediction(response);
    } catch (e) {
      showError(`prediction failed: ${e}`);
    }
  }
  const debouncer = new Debouncer(requestPrediction, DEBOUNCE_MS);
  const schedulePrediction = () => debouncer.post();

  // --- goal panel ---------------------------------------------------------
  const goalBox = el("section", { class: "goals" });
  root.appendChild(goalBox);
  const goalInput = el("input", { type: "number", step: "0.01",
                                  value: String(goals.goalAttackRate) });
  const searchBtn = el("button", {}, "find smallest policies");
  const winnersBox = el("div", { class: "winners" });
  goalBox.appendChild(el("label", {}, "goal attack rate"));
  goalBox.appendChild(goalInput);
  goalBox.appendChild(searchBtn);
  goalBox.appendChild(winnersBox);

  searchBtn.addEventListener("click", async () => {
    try {
      goals.setGoal(Number(goalInput.value));
      const response = await api.search({
        goal_attack_rate: goals.goalAttackRate,
        constraints: goals.constraints,
        count: goals.count,
      });
      goals.lastSearch = response;
      clearError();
      renderWinners(response);
    } catch (e) {
      showError(`search failed: ${e}`);
    }
  });

  function renderWinners(response: typeof goals.lastSearch) {
    winnersBox.replaceChildren();
    if (!response) return;
    const view = winnersView(response, policiesMeta.map((p) => p.name));
    winnersBox.appendChild(el("p", {}, view.headline));
    if (view.empty) {
      winnersBox.appendChild(el("p", { class: "empty" },
        "no qualifying policies"));
      return;
    }
    const table = el("table");
    const head = el("tr");
    for (const c of view.columns) head.appendChild(el("th", {}, c));
    table.appendChild(head);
    view.rows.forEach((row) => {
      const tr = el("tr", { class: "winner-row" });
      for (const cell of row.cells) tr.appendChild(el("td", {}, cell));
      tr.addEventListener("click", () => {
        sliders.loadPolicy(row.policy);
        for (const p of policiesMeta) {
          const input = document.getElementById(`s-${p.name}`) as HTMLInputElement;
          input.value = String(sliders.values[p.name]);
          outputs[p.name].textContent = String(sliders.values[p.name]);
        }
        schedulePrediction();
      });
      table.appendChild(tr);
    });
    winnersBox.appendChild(table);
  }

  // first paint: baseline prediction
  schedulePrediction();
}
