"""Command-line entrypoint for the full pipeline: popgen -> simulate -> fit ->
explore -> rank -> validate, plus calibration utilities and the HTTP service."""

from __future__ import annotations

import csv
import json
import os
import sys

import click
import numpy as np

from .abm import DiseaseParams, N_DAYS
from .calibration import (
    CORE_PARAM_RANGES,
    SensitivityConfig,
    compute_targets,
    load_observed_targets,
    r0_experiment,
    sensitivity_surface,
    write_surface_csv,
)
from .design import DesignMatrix, augment, default_augmentation, lhs_sample
from .emulator import EmulatorModel
from .explorer import (
    GoalSpec,
    fraction_meeting_goal,
    load_winners_csv,
    mean_active_intensity,
    predict_candidates,
    rank_rows,
    sample_k_active,
    validate_candidates,
    write_candidates_csv,
    write_winners_csv,
)
from .fitting import fit_emulator_model
from .policy import POLICY_NAMES, PolicyVector
from .population import Population, PopulationConfig, generate_population
from .runstore import OutcomeTable, RunManifest, load_study, write_study
from .studies import run_study, write_daily_sidecar


def _fail(message):
    raise click.ClickException(message)


def _parse_policy(policy_file, sets):
    values = {}
    if policy_file:
        with open(policy_file) as f:
            values.update(json.load(f))
    for item in sets:
        if "=" not in item:
            _fail(f"--set expects name=value, got {item!r}")
        name, raw = item.split("=", 1)
        if name not in POLICY_NAMES:
            _fail(f"unknown policy {name!r}; known: {', '.join(POLICY_NAMES)}")
        values[name] = float(raw)
    try:
        policy = PolicyVector.from_dict(values)
        policy.validate()
    except ValueError as e:
        _fail(str(e))
    return policy


def _load_population(path):
    try:
        return Population.load(path)
    except FileNotFoundError:
        _fail(f"population file not found: {path}")
    except (ValueError, KeyError) as e:
        _fail(f"could not read population {path}: {e}")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def main():
    """Epidemic policy exploration: simulate, emulate, search, validate."""


@main.command()
@click.option("--agents", type=int, default=20000, show_default=True)
@click.option("--tracts", type=int, default=40, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--mean-household", type=float, default=2.5, show_default=True)
@click.option("--school-size", type=int, default=150, show_default=True)
@click.option("--workplace-size", type=int, default=20, show_default=True)
@click.option("--svi", type=click.Choice(["uniform", "empirical-weights"]),
              default="uniform", show_default=True)
@click.option("--adherence", type=float, default=0.8, show_default=True,
              help="Baseline quarantine adherence entering the SVI formula.")
@click.option("--out", type=click.Path(), required=True)
def popgen(agents, tracts, seed, mean_household, school_size, workplace_size,
           svi, adherence, out):
    """Generate a synthetic population file."""
    try:
        pop = generate_population(PopulationConfig(
            n_agents=agents, n_tracts=tracts, mean_household_size=mean_household,
            school_size=school_size, workplace_size=workplace_size,
            svi_distribution=svi, quarantine_adherence=adherence, seed=seed))
    except ValueError as e:
        _fail(str(e))
    pop.save(out)
    click.echo(f"wrote {agents} agents across {tracts} tracts to {out}")


@main.command()
@click.option("--pop", "pop_path", type=click.Path(exists=True), required=True)
@click.option("--design", "design_path", type=click.Path(exists=True),
              help="Normalized design CSV; one study row per design row.")
@click.option("--policy", "policy_file", type=click.Path(exists=True),
              help="JSON file of policy values in Table-1 units.")
@click.option("--set", "sets", multiple=True, metavar="NAME=VALUE",
              help="Inline policy override; repeatable.")
@click.option("--reps", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--days", type=int, default=N_DAYS, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Worker processes; -1 uses all cores.")
@click.option("--out", type=click.Path(), default="outcomes.csv", show_default=True)
@click.option("--daily-out", type=click.Path(), default=None,
              help="Sidecar CSV of daily diagnosis/test series.")
@click.option("--study", "study_dir", type=click.Path(), default=None,
              help="Write an atomic study directory instead of loose CSVs.")
def simulate(pop_path, design_path, policy_file, sets, reps, seed, days, jobs,
             out, daily_out, study_dir):
    """Run replicated simulations for a policy or a whole design."""
    pop = _load_population(pop_path)
    disease = DiseaseParams()
    if design_path and (policy_file or sets):
        _fail("--design and --policy/--set are mutually exclusive")
    if design_path:
        design = DesignMatrix.from_csv(design_path)
        values = design.values
    else:
        policy = _parse_policy(policy_file, sets)
        design = DesignMatrix(values=policy.normalize()[None, :])
        values = design.values
    try:
        table, rows = run_study(pop, disease, values, reps, base_seed=seed,
                                n_jobs=jobs, days=days, return_rows=True)
    except ValueError as e:
        _fail(str(e))

    config = {
        "population": os.path.abspath(pop_path),
        "n_agents": pop.n_agents,
        "reps": reps,
        "seed": seed,
        "days": days,
        "design_rows": int(values.shape[0]),
    }
    seeds = [seed + i * reps + r for i in range(values.shape[0]) for r in range(reps)]
    manifest = RunManifest(command=" ".join(sys.argv), config=config, seeds=seeds,
                           input_hashes={"population": pop.content_hash()})
    if study_dir:
        write_study(study_dir, design, table, manifest)
        write_daily_sidecar(os.path.join(study_dir, "daily.csv"), rows)
        click.echo(f"wrote study {study_dir} (run_id {manifest.run_id[:12]})")
        return
    if design_path:
        table.to_csv(out)
    else:
        _write_single_policy_csv(out, table)
    daily_out = daily_out or out + ".daily.csv"
    write_daily_sidecar(daily_out, rows)
    with open(out + ".manifest.json", "w") as f:
        json.dump(manifest.to_dict(), f, indent=2)
    click.echo(f"wrote {table.n_rows} outcome rows to {out}")


def _write_single_policy_csv(path, table: OutcomeTable):
    cols = [c for c in table.columns if c != "row_id"]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(cols)
        for i in range(table.n_rows):
            w.writerow([
                int(table.columns[c][i]) if c in ("replicate",
                                                  "cumulative_infections",
                                                  "cumulative_diagnoses")
                else repr(float(table.columns[c][i]))
                for c in cols])


@main.command()
@click.option("--n", type=int, default=1500, show_default=True,
              help="Total rows including augmentation when --augment is set.")
@click.option("--p", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--augment/--no-augment", "do_augment", default=True,
              show_default=True,
              help="Append the baseline point and the ten single-policy maxima.")
@click.option("--scaled", is_flag=True, help="Write Table-1 units instead of [0,1].")
@click.option("--out", type=click.Path(), required=True)
def design(n, p, seed, do_augment, scaled, out):
    """Write a Latin hypercube design CSV."""
    if do_augment and p == 10:
        extra = default_augmentation()
        if n <= extra.shape[0]:
            _fail(f"--n must exceed {extra.shape[0]} when augmenting")
        d = augment(lhs_sample(n - extra.shape[0], p, seed), extra)
    else:
        d = lhs_sample(n, p, seed)
    d.to_csv(out, scaled=scaled)
    click.echo(f"wrote {d.n}x{d.p} design to {out}")


@main.command()
@click.option("--design", "design_path", type=click.Path(exists=True))
@click.option("--outcomes", "outcomes_path", type=click.Path(exists=True))
@click.option("--study", "study_dir", type=click.Path(), default=None)
@click.option("--n-agents", type=int, default=None,
              help="Override the agent count used for attack-rate conversion.")
@click.option("--folds", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--restarts", type=int, default=8, show_default=True)
@click.option("--max-trees", type=int, default=300, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def fit(design_path, outcomes_path, study_dir, n_agents, folds, seed, restarts,
        max_trees, out):
    """Fit the two-stage emulator from a replicated study."""
    if study_dir:
        try:
            design, outcomes, manifest = load_study(study_dir)
        except (FileNotFoundError, ValueError) as e:
            _fail(str(e))
        n_agents = n_agents or manifest.config.get("n_agents")
    else:
        if not design_path or not outcomes_path:
            _fail("provide --study or both --design and --outcomes")
        design = DesignMatrix.from_csv(design_path)
        outcomes = OutcomeTable.from_csv(outcomes_path)
        manifest_path = outcomes_path + ".manifest.json"
        if n_agents is None and os.path.exists(manifest_path):
            with open(manifest_path) as f:
                n_agents = json.load(f).get("config", {}).get("n_agents")
    if not n_agents:
        _fail("agent count unknown; pass --n-agents or a study manifest")
    try:
        model = fit_emulator_model(design.values, outcomes, n_agents,
                                   folds=folds, seed=seed, n_restarts=restarts,
                                   max_trees=max_trees)
    except ValueError as e:
        _fail(str(e))
    model.save(out)
    gbm = model.outcomes["cumulative_infections"].gbm
    click.echo(f"wrote model to {out} "
               f"(gbm: {gbm.hyperparameters['n_trees']} trees, "
               f"cv-rmse {gbm.hyperparameters['cv_rmse']:.5f})")


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--policy", "policy_file", type=click.Path(exists=True))
@click.option("--set", "sets", multiple=True, metavar="NAME=VALUE")
@click.option("--outcomes", "outcome_names", multiple=True,
              type=click.Choice(["cumulative_infections", "svi_variance"]))
def predict(model_path, policy_file, sets, outcome_names):
    """Emulate one policy; prints JSON with mean, sd and the 90% interval."""
    model = EmulatorModel.load(model_path)
    policy = _parse_policy(policy_file, sets)
    x = policy.normalize()[None, :]
    names = list(outcome_names) or list(model.outcomes)
    preds = model.predict(x, outcome_names=names)
    out = {"policy": policy.to_dict(),
           "normalized": policy.normalize().tolist(),
           "predictions": {
               name: {k: float(v[0]) for k, v in arrs.items()}
               for name, arrs in preds.items()}}
    click.echo(json.dumps(out, indent=2))


def _parse_constraints(constrain):
    constraints = {}
    for item in constrain:
        if "=" not in item:
            _fail(f"--constrain expects name=bound, got {item!r}")
        name, raw = item.split("=", 1)
        constraints[name] = float(raw)
    return constraints


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--k", type=int, default=10, show_default=True,
              help="Number of active policies per candidate.")
@click.option("--n-per-combo", type=int, default=5000, show_default=True)
@click.option("--max-total", type=int, default=1_000_000, show_default=True,
              help="Cap on total candidates; n-per-combo shrinks to fit.")
@click.option("--goal-attack-rate", type=float, default=500_000 / 2_400_000,
              show_default=True)
@click.option("--outcome", type=click.Choice(["cumulative_infections",
                                              "svi_variance"]),
              default="cumulative_infections", show_default=True)
@click.option("--constrain", multiple=True, metavar="NAME=BOUND",
              help="Normalized upper bound for a policy; repeatable.")
@click.option("--strict", is_flag=True,
              help="Require the 90% upper bound, not the mean, to meet the goal.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def explore(model_path, k, n_per_combo, max_total, goal_attack_rate, outcome,
            constrain, strict, seed, out):
    """Sample k-active-policy candidates, emulate them, and flag goal-meeters."""
    from math import comb
    model = EmulatorModel.load(model_path)
    combos = comb(10, k) if 1 <= k <= 10 else 0
    if combos == 0:
        _fail("k must lie in [1, 10]")
    per = min(n_per_combo, max(1, max_total // combos))
    if per < n_per_combo:
        click.echo(f"note: capped n-per-combo at {per} to respect "
                   f"--max-total {max_total}", err=True)
    try:
        goal = GoalSpec(outcome=outcome, threshold=goal_attack_rate,
                        constraints=_parse_constraints(constrain), strict=strict)
    except ValueError as e:
        _fail(str(e))
    candidates = sample_k_active(k, per, seed=seed)
    predict_candidates(candidates, model, outcomes=(outcome,),
                       with_intervals=strict)
    frac = fraction_meeting_goal(candidates, goal)
    write_candidates_csv(out, candidates, goal)
    qualifying = candidates.meets_goal
    mean_intensity_all = float(np.mean([
        mean_active_intensity(candidates.values[i], candidates.active_mask[i])
        for i in range(candidates.n)]))
    mean_intensity_goal = (float(np.mean([
        mean_active_intensity(candidates.values[i], candidates.active_mask[i])
        for i in np.flatnonzero(qualifying)])) if qualifying.any() else None)
    click.echo(json.dumps({
        "k": k, "n_per_combo": per, "total": candidates.n,
        "fraction_meeting_goal": frac,
        "mean_active_intensity_all": mean_intensity_all,
        "mean_active_intensity_goal_meeting": mean_intensity_goal,
        "out": out,
    }, indent=2))


@main.command()
@click.option("--candidates", "candidates_path", type=click.Path(exists=True),
              required=True)
@click.option("--count", type=int, default=10, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def rank(candidates_path, count, out):
    """Pick the smallest-intensity goal-meeting candidates from an explore run."""
    values, flags, predictions = _read_candidates_csv(candidates_path)
    result = rank_rows(values, flags, predictions, count)
    if result.warning:
        click.echo(f"warning: {result.warning}", err=True)
    write_winners_csv(out, result)
    click.echo(f"wrote {len(result.winners)} winners to {out}")


def _read_candidates_csv(path):
    with open(path, newline="") as f:
        r = csv.reader(f)
        header = next(r)
        try:
            coord_idx = [header.index(name) for name in POLICY_NAMES]
            flag_idx = header.index("meets_goal")
        except ValueError:
            _fail(f"{path}: not an explore output (missing policy or "
                  f"meets_goal columns)")
        pred_cols = {h[len("pred_mean_"):]: i for i, h in enumerate(header)
                     if h.startswith("pred_mean_")}
        values, flags, preds = [], [], {name: [] for name in pred_cols}
        for row in r:
            values.append([float(row[i]) for i in coord_idx])
            flags.append(bool(int(row[flag_idx])))
            for name, i in pred_cols.items():
                preds[name].append(float(row[i]))
    return (np.asarray(values),
            np.asarray(flags, dtype=bool),
            {name: {"mean": np.asarray(v)} for name, v in preds.items()})


@main.command()
@click.option("--policies", "policies_path", type=click.Path(exists=True),
              required=True, help="Winners CSV from the rank command.")
@click.option("--pop", "pop_path", type=click.Path(exists=True), required=True)
@click.option("--reps", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--model", "model_path", type=click.Path(exists=True),
              help="Adds emulated columns next to simulated ones.")
@click.option("--out", type=click.Path(), default=None)
def validate(policies_path, pop_path, reps, seed, jobs, model_path, out):
    """Simulate ranked policies and compare against emulated predictions."""
    pop = _load_population(pop_path)
    policies = load_winners_csv(policies_path)
    if not policies:
        _fail(f"no policies found in {policies_path}")
    model = EmulatorModel.load(model_path) if model_path else None
    normalized = [p.normalize() for p in policies]
    rows = validate_candidates(pop, DiseaseParams(), normalized, reps=reps,
                               base_seed=seed, n_jobs=jobs, model=model)
    for i, row in enumerate(rows):
        row["policy_index"] = i + 1
    if out:
        with open(out, "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    click.echo(json.dumps(rows, indent=2, default=float))


@main.group()
def calibrate():
    """Baseline targets, sensitivity surfaces, and the index-case experiment."""


@calibrate.command()
@click.option("--pop", "pop_path", type=click.Path(exists=True), required=True)
@click.option("--reps", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--observed", type=click.Path(exists=True), default=None,
              help="External target curves (day, diagnoses, tests).")
def targets(pop_path, reps, seed, observed):
    """Report the underreporting ratio and case/positivity curves at baseline."""
    from .abm import run_simulation
    pop = _load_population(pop_path)
    disease = DiseaseParams()
    ratios, diag_curves = [], []
    for r in range(reps):
        out = run_simulation(pop, disease, PolicyVector.baseline(), seed + r)
        t = compute_targets(out)
        ratios.append(t.underreport_ratio)
        diag_curves.append(t.daily_diagnoses_curve)
    report = {
        "reps": reps,
        "underreport_ratio_mean": float(np.mean(ratios)),
        "underreport_ratio_sd": float(np.std(ratios, ddof=1)),
        "daily_diagnoses_mean": np.mean(diag_curves, axis=0).tolist(),
    }
    if observed:
        obs = load_observed_targets(observed)
        report["observed_total_diagnoses"] = float(obs["daily_diagnoses"].sum())
    click.echo(json.dumps(report, indent=2))


@calibrate.command()
@click.option("--pop", "pop_path", type=click.Path(exists=True), required=True)
@click.option("--pair", required=True,
              help=f"Two of {', '.join(CORE_PARAM_RANGES)} separated by a comma.")
@click.option("--lhs", "lhs_n", type=int, default=500, show_default=True)
@click.option("--reps", type=int, default=10, show_default=True)
@click.option("--grid", "grid_resolution", type=int, default=25, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def surface(pop_path, pair, lhs_n, reps, grid_resolution, seed, jobs, out):
    """Two-parameter sensitivity surface from an emulator over the core knobs."""
    pop = _load_population(pop_path)
    names = tuple(p.strip() for p in pair.split(","))
    if len(names) != 2:
        _fail("--pair needs exactly two comma-separated names")
    try:
        config = SensitivityConfig(param_pair=names, lhs_n=lhs_n, reps=reps,
                                   grid_resolution=grid_resolution)
        result = sensitivity_surface(pop, config, seed=seed, n_jobs=jobs)
    except ValueError as e:
        _fail(str(e))
    write_surface_csv(out, result)
    click.echo(f"wrote {len(result['rows'])} grid rows to {out}")


@calibrate.command()
@click.option("--pop", "pop_path", type=click.Path(exists=True), required=True)
@click.option("--beta", type=float, default=None,
              help="Base transmission rate; defaults to the calibrated value.")
@click.option("--sims", type=int, default=10000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default=None)
def r0(pop_path, beta, sims, seed, out):
    """Secondary-infection distribution for an index case."""
    pop = _load_population(pop_path)
    try:
        res = r0_experiment(pop, base_transmission_rate=beta, n_sims=sims,
                            seed=seed)
    except ValueError as e:
        _fail(str(e))
    if out:
        with open(out, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["secondary_infections"])
            for c in res["counts"]:
                w.writerow([int(c)])
    click.echo(json.dumps({k: res[k] for k in
                           ("base_transmission_rate", "n_sims", "mean",
                            "p25", "p75", "variance")}, indent=2))


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--baseline", "baseline_dir", type=click.Path(), default=None,
              help="Baseline study directory backing GET /baseline.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--sample-cap", type=int, default=500_000, show_default=True)
@click.option("--cors-origin", default="*", show_default=True)
def serve(model_path, baseline_dir, host, port, sample_cap, cors_origin):
    """Serve the emulator over HTTP for the what-if UI."""
    import uvicorn

    from .service import create_app
    app = create_app(model_path, baseline_dir, sample_cap=sample_cap,
                     cors_origin=cors_origin)
    uvicorn.run(app, host=host, port=port)
