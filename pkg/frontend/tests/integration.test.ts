// Live contract test against a running service. Skipped unless
// RUN_INTEGRATION=1; point POLICYSCAPE_URL at the service (default
// http://127.0.0.1:8000).
import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { SliderPanel } from "../src/state.js";

const RUN = process.env.RUN_INTEGRATION === "1";
const URL = process.env.POLICYSCAPE_URL ?? "http://127.0.0.1:8000";

describe.skipIf(!RUN)("live service contract", () => {
  const client = new ApiClient(URL);

  it("slider bounds equal GET /policies ranges", async () => {
    const { policies } = await client.getPolicies();
    expect(policies).toHaveLength(10);
    const panel = new SliderPanel(policies);
    for (const p of policies) {
      expect(panel.setValue(p.name, p.low - 1)).toBe(p.low);
      expect(panel.setValue(p.name, p.high + 1)).toBe(p.high);
    }
  });

  it("a slider change yields the raw /predict response within 1s", async () => {
    const { policies } = await client.getPolicies();
    const panel = new SliderPanel(policies);
    panel.setValue("mask_adherence", 0.15);
    const t0 = Date.now();
    const response = await client.predict({ ...panel.values });
    const elapsed = Date.now() - t0;
    expect(elapsed).toBeLessThanOrEqual(1000);
    panel.acceptPrediction(response);
    expect(panel.lastPrediction).toBe(response); // rendered verbatim
    const pred = response.predictions["cumulative_infections"];
    expect(pred.lo90).toBeLessThanOrEqual(pred.mean);
    expect(pred.hi90).toBeGreaterThanOrEqual(pred.mean);
  });

  it("goal search returns ranked winners the UI shows verbatim", async () => {
    const response = await client.search({
      goal_attack_rate: 1.0,
      n_samples: 2000,
      count: 3,
      seed: 1,
    });
    expect(response.fraction_meeting_goal).toBe(1.0);
    expect(response.winners.length).toBe(3);
    const norms = response.winners.map((w) => w.intensity_norm);
    expect([...norms].sort((a, b) => a - b)).toEqual(norms);
  });
});
