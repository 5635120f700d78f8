import type {
  BaselineResponse,
  PolicyInfo,
  PredictResponse,
  Prediction,
  SearchResponse,
} from "./types.js";

/**
 * Slider panel state. Bounds always come from GET /policies; nothing about
 * the levers is hard-coded client-side.
 */
export class SliderPanel {
  readonly policies: PolicyInfo[];
  values: Record<string, number> = {};
  dirty = false;
  lastPrediction: PredictResponse | null = null;

  constructor(policies: PolicyInfo[]) {
    this.policies = policies;
    for (const p of policies) this.values[p.name] = p.baseline;
  }

  private info(name: string): PolicyInfo {
    const p = this.policies.find((x) => x.name === name);
    if (!p) throw new Error(`unknown policy ${name}`);
    return p;
  }

  /** Clamp into the service-provided range; integer levers round. */
  setValue(name: string, raw: number): number {
    const p = this.info(name);
    let v = Math.min(Math.max(raw, p.low), p.high);
    if (p.integer) v = Math.round(v);
    this.values[name] = v;
    this.dirty = true;
    return v;
  }

  /** Normalized mirror of the current values, 0 = baseline bound. */
  normalized(): number[] {
    return this.policies.map(
      (p) => (this.values[p.name] - p.low) / (p.high - p.low),
    );
  }

  loadPolicy(policy: Record<string, number>): void {
    for (const [name, value] of Object.entries(policy)) this.setValue(name, value);
  }

  acceptPrediction(response: PredictResponse): void {
    this.lastPrediction = response;
    this.dirty = false;
  }
}

export class GoalPanel {
  goalAttackRate = 0.2083;
  constraints: Record<string, number> = {};
  count = 10;
  lastSearch: SearchResponse | null = null;

  setGoal(value: number): void {
    if (!(value > 0 && value <= 1)) {
      throw new Error("goal attack rate must lie in (0, 1]");
    }
    this.goalAttackRate = value;
  }

  setCount(value: number): void {
    if (value < 1) throw new Error("winner count must be >= 1");
    this.count = Math.round(value);
  }

  toggleConstraint(name: string, bound: number | null): void {
    if (bound === null) delete this.constraints[name];
    else this.constraints[name] = bound;
  }
}

// ---------------------------------------------------------------- view models

export interface IntervalView {
  outcome: string;
  mean: string;
  lo: string;
  hi: string;
  raw: Prediction;
}

const OUTCOME_DIGITS: Record<string, number> = {
  cumulative_infections: 4,
  svi_variance: 6,
};

/**
 * Display strings for one prediction. The only arithmetic is unit
 * formatting: an optional population multiplier turns attack-rate fractions
 * into infection counts for display.
 */
export function formatPrediction(
  outcome: string,
  pred: Prediction,
  population?: number,
): IntervalView {
  const scale =
    population && outcome === "cumulative_infections" ? population : 1;
  const digits = scale === 1 ? OUTCOME_DIGITS[outcome] ?? 4 : 0;
  const fmt = (x: number) => (x * scale).toFixed(digits);
  return {
    outcome,
    mean: fmt(pred.mean),
    lo: fmt(pred.lo90),
    hi: fmt(pred.hi90),
    raw: pred,
  };
}

export interface WinnersView {
  headline: string;
  columns: string[];
  rows: { cells: string[]; normalized: number[]; policy: Record<string, number> }[];
  empty: boolean;
  warning: string | null;
}

/** Ranked-winners table rendered verbatim from the search response. */
export function winnersView(
  response: SearchResponse,
  policyNames: string[],
): WinnersView {
  const columns = ["#", ...policyNames, "intensity", "attack rate", "90% interval"];
  const rows = response.winners.map((w, i) => {
    const pred = w.predictions["cumulative_infections"];
    const cells = [
      String(i + 1),
      ...policyNames.map((name) => String(w.policy[name])),
      w.intensity_norm.toFixed(4),
      pred ? pred.mean.toFixed(4) : "-",
      pred ? `[${pred.lo90.toFixed(4)}, ${pred.hi90.toFixed(4)}]` : "-",
    ];
    return { cells, normalized: w.normalized, policy: w.policy };
  });
  return {
    headline: `${(response.fraction_meeting_goal * 100).toFixed(2)}% of ${
      response.n_candidates
    } emulated policies meet the goal`,
    columns,
    rows,
    empty: response.winners.length === 0,
    warning: response.warning,
  };
}

export interface SviPanelView {
  bars: { bin: string; baselineRate: string }[];
  baselineVariance: string;
  predictedVariance: string | null;
  reductionBadge: boolean;
}

/** Grouped SVI bars plus the variance gauge vs baseline. */
export function sviPanelView(
  baseline: BaselineResponse,
  predictedVariance: Prediction | null,
): SviPanelView {
  const reduction =
    predictedVariance !== null &&
    predictedVariance.mean < baseline.svi_variance_mean;
  return {
    bars: baseline.attack_rate_by_svi.map((b) => ({
      bin: b.bin,
      baselineRate: b.mean.toFixed(4),
    })),
    baselineVariance: baseline.svi_variance_mean.toExponential(3),
    predictedVariance:
      predictedVariance === null
        ? null
        : predictedVariance.mean.toExponential(3),
    reductionBadge: reduction,
  };
}
