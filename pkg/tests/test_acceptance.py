"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Desk scale means 20,000 agents, 40 tracts, 60 days. Heavy artifacts (the
20-replicate baseline batch and the 300-point x 10-replicate training study)
are built once and shared across criteria.
"""

import math
import time

import numpy as np
import pytest
from scipy.stats import spearmanr

from policyscape.abm import (
    E, IASYM, ISYM, P, R, S,
    DiseaseParams,
    Simulation,
    run_simulation,
)
from policyscape.design import augment, default_augmentation, lhs_sample
from policyscape.emulator import (
    GPModel,
    OutcomeEmulator,
    fit_gbm,
    fit_hetgp,
    log_marginal_likelihood,
    log_marginal_likelihood_grad,
    matern52,
    matern52_cross,
)
from policyscape.explorer import (
    GoalSpec,
    fraction_meeting_goal,
    intensity_norm,
    predict_candidates,
    rank_rows,
    sample_k_active,
)
from policyscape.fitting import fit_emulator_model
from policyscape.policy import POLICY_NAMES, PolicyVector
from policyscape.population import PopulationConfig, generate_population
from policyscape.studies import run_study

N_JOBS = 2


def verdict(name, ok, detail=""):
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def desk_pop():
    return generate_population(PopulationConfig(n_agents=20000, n_tracts=40, seed=7))


@pytest.fixture(scope="module")
def baseline_batch(desk_pop):
    t0 = time.time()
    outs = [run_simulation(desk_pop, DiseaseParams(), PolicyVector.baseline(),
                           seed=s) for s in range(20)]
    return outs, time.time() - t0


@pytest.fixture(scope="module")
def sweeps_study(desk_pop):
    design = augment(lhs_sample(289, 10, seed=101), default_augmentation())
    outcomes = run_study(desk_pop, DiseaseParams(), design.values, reps=10,
                         base_seed=5000, n_jobs=N_JOBS)
    return design, outcomes


@pytest.fixture(scope="module")
def sweeps_model(desk_pop, sweeps_study):
    design, outcomes = sweeps_study
    return fit_emulator_model(design.values, outcomes, desk_pop.n_agents,
                              folds=10, seed=0, n_restarts=8, max_trees=300)


# ---------------------------------------------------------------- criteria


def test_kernel_oracle():
    def closed_form(x, y, ls, sv):
        r = math.sqrt(sum(((a - b) / l) ** 2 for a, b, l in zip(x, y, ls)))
        u = math.sqrt(5.0) * r
        return sv * (1.0 + u + u * u / 3.0) * math.exp(-u)

    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        p = int(rng.integers(1, 11))
        x, y = rng.uniform(-2, 2, p), rng.uniform(-2, 2, p)
        ls = rng.uniform(0.05, 5.0, p)
        sv = float(rng.uniform(0.1, 10.0))
        ref = closed_form(x, y, ls, sv)
        got = matern52(x, y, ls, sv)
        worst = max(worst, abs(got - ref) / abs(ref))
    unit = matern52([0.0], [1.0], [1.0], 1.0)
    unit_ref = (1.0 + math.sqrt(5.0) + 5.0 / 3.0) * math.exp(-math.sqrt(5.0))
    unit_err = abs(unit - unit_ref) / unit_ref
    verdict("kernel-oracle", worst < 1e-12 and unit_err < 1e-12,
            f"(max rel err {worst:.2e}, unit-distance err {unit_err:.2e})")


def test_gp_oracle():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(25):
        n = int(rng.integers(3, 21))
        p = int(rng.integers(1, 4))
        X = rng.uniform(size=(n, p))
        y = rng.normal(size=n)
        ls = rng.uniform(0.2, 2.0, p)
        sv = float(rng.uniform(0.5, 3.0))
        noise = rng.uniform(1e-3, 1e-1, n)
        model = GPModel(X=X, y=y, lengthscales=ls, signal_variance=sv,
                        noise_variance_per_point=noise,
                        replicate_counts=np.ones(n, dtype=int),
                        noise_mode="homoskedastic").refactorize()
        Xnew = rng.uniform(size=(6, p))
        mean, var = model.predict(Xnew, include_noise=False)

        K = matern52_cross(X, X, ls, sv)
        np.fill_diagonal(K, sv)
        Kinv = np.linalg.inv(K + np.diag(noise))
        Ks = matern52_cross(Xnew, X, ls, sv)
        ref_mean = Ks @ Kinv @ y
        ref_var = sv - np.sum((Ks @ Kinv) * Ks, axis=1)
        scale = max(np.abs(ref_mean).max(), np.abs(ref_var).max(), 1e-12)
        worst = max(worst,
                    np.abs(mean - ref_mean).max() / scale,
                    np.abs(var - ref_var).max() / scale)

    grad_worst = 0.0
    h = 1e-5
    for _ in range(50):
        n = int(rng.integers(5, 21))
        p = int(rng.integers(1, 4))
        X = rng.uniform(size=(n, p))
        y = rng.normal(size=n)
        ls = rng.uniform(0.3, 2.0, p)
        sv = float(rng.uniform(0.5, 2.0))
        noise = rng.uniform(1e-2, 1e-1, n)
        _, grad = log_marginal_likelihood_grad(X, y, ls, sv, noise)
        theta = np.append(np.log(ls), math.log(sv))
        fd = np.empty_like(grad)
        for j in range(p + 1):
            tp, tm = theta.copy(), theta.copy()
            tp[j] += h
            tm[j] -= h
            fd[j] = (log_marginal_likelihood(X, y, np.exp(tp[:p]),
                                             math.exp(tp[p]), noise)
                     - log_marginal_likelihood(X, y, np.exp(tm[:p]),
                                               math.exp(tm[p]), noise)) / (2 * h)
        grad_worst = max(grad_worst, np.linalg.norm(grad - fd)
                         / max(np.linalg.norm(fd), 1e-12))
    verdict("gp-oracle", worst < 1e-8 and grad_worst < 1e-5,
            f"(posterior rel err {worst:.2e}, gradient rel err {grad_worst:.2e})")


def test_mle_recovery():
    rng = np.random.default_rng(77)
    true_ls = 0.2
    recovered = []
    for trial in range(20):
        X = np.sort(rng.uniform(size=100))[:, None]
        K = matern52_cross(X, X, [true_ls], 1.0)
        np.fill_diagonal(K, 1.0 + 1e-10)
        f = np.linalg.cholesky(K) @ rng.normal(size=100)
        reps = 5
        obs = f[:, None] + rng.normal(scale=0.1, size=(100, reps))
        means = obs.mean(axis=1)
        variances = obs.var(axis=1, ddof=1)
        model = fit_hetgp(X, means, variances, np.full(100, reps),
                          seed=trial, n_restarts=8)
        recovered.append(float(model.lengthscales[0]))
    med = float(np.median(recovered))
    ok_ls = true_ls / 2 <= med <= true_ls * 2

    # heteroskedastic ramp: noise sd grows 0.1 -> 1.0 across [0, 1]
    X = np.linspace(0, 1, 80)[:, None]
    sd = 0.1 + 0.9 * X[:, 0]
    obs = np.sin(2 * np.pi * X[:, 0])[:, None] \
        + rng.normal(size=(80, 20)) * sd[:, None]
    model = fit_hetgp(X, obs.mean(axis=1), obs.var(axis=1, ddof=1),
                      np.full(80, 20), seed=0, n_restarts=8)
    rho = spearmanr(model.noise_variance_per_point, sd ** 2).statistic
    verdict("mle-recovery", ok_ls and rho >= 0.8,
            f"(median lengthscale {med:.3f} for true 0.2, noise rank corr {rho:.3f})")


def test_lhs_property():
    ok = True
    for n in (10, 100, 1500):
        d = lhs_sample(n, 10, seed=42)
        for j in range(10):
            strata = np.floor(n * d.values[:, j]).astype(int)
            ok &= bool(np.array_equal(np.sort(strata), np.arange(n)))
        again = lhs_sample(n, 10, seed=42)
        ok &= bool(np.array_equal(d.values, again.values))
    verdict("lhs-property", ok, "(exact stratification and seed reproduction)")


def test_abm_invariants(desk_pop):
    d = DiseaseParams()
    a = run_simulation(desk_pop, d, PolicyVector.baseline(), seed=123)
    b = run_simulation(desk_pop, d, PolicyVector.baseline(), seed=123)
    deterministic = (
        a.cumulative_infections == b.cumulative_infections
        and np.array_equal(a.daily_diagnoses, b.daily_diagnoses)
        and np.array_equal(a.attack_rate_by_svi, b.attack_rate_by_svi))

    null = run_simulation(desk_pop, DiseaseParams(base_transmission_rate=0.0),
                          PolicyVector.baseline(), seed=1)
    null_ok = null.cumulative_infections == int(
        round(d.initial_seed_fraction * desk_pop.n_agents))

    allowed = np.zeros((6, 6), dtype=bool)
    for src, dsts in {S: (S, E), E: (E, P, IASYM), P: (P, ISYM),
                      ISYM: (ISYM, R), IASYM: (IASYM, R), R: (R,)}.items():
        for dst in dsts:
            allowed[src, dst] = True
    sim = Simulation(desk_pop, d, PolicyVector.baseline(), seed=9)
    prev = sim.state.copy()
    agent_days = 0
    violations = 0
    daily_ok = True
    for day in range(60):
        sim.step_day(day)
        violations += int((~allowed[prev, sim.state]).sum())
        agent_days += desk_pop.n_agents
        daily_ok &= not (sim.boosted & ~sim.vaccinated).any()
        daily_ok &= sim.daily_tests[day] <= sim.supply_pcr + sim.supply_antigen
        prev = sim.state.copy()

    verdict("abm-invariants",
            deterministic and null_ok and daily_ok and violations == 0
            and agent_days >= 10 ** 6,
            f"(violations {violations} over {agent_days} agent-days)")


def test_svi_gradient(baseline_batch):
    outs, elapsed = baseline_batch
    wins = sum(o.attack_rate_by_svi[3] > o.attack_rate_by_svi[0] for o in outs)
    verdict("svi-gradient", wins >= 18 and elapsed <= 600,
            f"(top bin exceeds bottom in {wins}/20 replicates, "
            f"{elapsed:.0f}s for 20 runs)")


def test_underreporting(baseline_batch):
    outs, _ = baseline_batch
    ratio = (np.mean([o.cumulative_infections for o in outs])
             / np.mean([o.cumulative_diagnoses for o in outs]))
    verdict("underreporting", 3.0 <= ratio <= 5.0,
            f"(infections/diagnoses = {ratio:.2f})")


def test_single_policy_sweeps(desk_pop, sweeps_model):
    emulator = sweeps_model.outcomes["cumulative_infections"]
    levels = np.linspace(0.0, 1.0, 11)
    rhos = {}
    inside = 0
    total = 0
    for name in ("mask_adherence", "ct_capacity", "vaccine_threshold"):
        j = POLICY_NAMES.index(name)
        sweep = np.zeros((11, 10))
        sweep[:, j] = levels
        mean, sd, lo, hi = emulator.predict_arrays(sweep)
        rhos[name] = spearmanr(levels, mean).statistic

        sims = run_study(desk_pop, DiseaseParams(), sweep, reps=10,
                         base_seed=90_000 + j * 1000, n_jobs=N_JOBS)
        sim_means = np.array([
            sims.columns["cumulative_infections"][sims.columns["row_id"] == i].mean()
            for i in range(11)]) / desk_pop.n_agents
        inside += int(np.sum((sim_means >= lo) & (sim_means <= hi)))
        total += 11
    coverage = inside / total
    ok = all(r <= -0.9 for r in rhos.values()) and coverage >= 0.8
    detail = ", ".join(f"{k} rho={v:.3f}" for k, v in rhos.items())
    verdict("single-policy-sweeps", ok,
            f"({detail}; validation coverage {coverage:.2f})")


def test_interaction_direction(desk_pop):
    d = DiseaseParams()

    def mean_inf(ct_norm, dur_norm, seed0):
        x = np.zeros(10)
        x[POLICY_NAMES.index("ct_capacity")] = ct_norm
        x[POLICY_NAMES.index("mask_duration_ct")] = dur_norm
        pol = PolicyVector.from_normalized(x)
        return np.mean([run_simulation(desk_pop, d, pol, seed=seed0 + s)
                        .cumulative_infections for s in range(20)])

    benefit_base_ct = mean_inf(0.0, 0.0, 300) - mean_inf(0.0, 1.0, 300)
    benefit_max_ct = mean_inf(1.0, 0.0, 300) - mean_inf(1.0, 1.0, 300)
    verdict("interaction-direction", benefit_max_ct > benefit_base_ct,
            f"(masking-after-tracing avoids {benefit_max_ct:.0f} infections at "
            f"max tracing vs {benefit_base_ct:.0f} at baseline tracing)")


def test_landscape_trend(baseline_batch, sweeps_model):
    outs, _ = baseline_batch
    baseline_attack = np.mean([o.cumulative_infections for o in outs]) / 20000
    goal = GoalSpec(threshold=0.7 * baseline_attack)
    fractions = {}
    k10_candidates = None
    for k in (1, 3, 5, 10):
        per = min(5000, max(1, 10 ** 6 // math.comb(10, k)))
        candidates = sample_k_active(k, per, seed=400 + k)
        predict_candidates(candidates, sweeps_model)
        fractions[k] = fraction_meeting_goal(candidates, goal)
        if k == 10:
            k10_candidates = candidates
    ks = sorted(fractions)
    non_decreasing = all(fractions[a] <= fractions[b] + 1e-12
                         for a, b in zip(ks, ks[1:]))
    constrained = GoalSpec(
        threshold=goal.threshold,
        constraints={"ct_capacity": 0.5, "mask_adherence": 0.5})
    frac_constrained = fraction_meeting_goal(k10_candidates, constrained)
    ok = non_decreasing and frac_constrained <= fractions[10]
    detail = ", ".join(f"k={k}: {fractions[k]:.3f}" for k in ks)
    verdict("landscape-trend", ok,
            f"({detail}; constrained k=10 {frac_constrained:.3f})")


def test_ranking_oracle():
    rng = np.random.default_rng(31)
    values = rng.uniform(size=(1000, 10))
    values[500:510] = values[100:110]  # force exact ties
    preds = {"cumulative_infections": {"mean": rng.uniform(size=1000)}}
    flags = preds["cumulative_infections"]["mean"] <= 0.5

    norm_ok = all(
        abs(intensity_norm(values[i]) - sum(float(v) ** 2 for v in values[i]))
        <= 1e-12 * max(1.0, intensity_norm(values[i]))
        for i in range(1000))

    result = rank_rows(values, flags, preds, count=10)
    brute = sorted(
        (i for i in range(1000) if flags[i]),
        key=lambda i: (sum(float(v) ** 2 for v in values[i]), i))[:10]
    rank_ok = [w.row_id for w in result.winners] == brute
    rerun = rank_rows(values, flags, preds, count=10)
    stable = [w.row_id for w in rerun.winners] == [w.row_id for w in result.winners]
    verdict("ranking-oracle", norm_ok and rank_ok and stable,
            f"(winners {[w.row_id for w in result.winners][:4]}... match brute force)")


def test_end_to_end_validation(desk_pop, baseline_batch, sweeps_model):
    outs, _ = baseline_batch
    baseline_attack = np.mean([o.cumulative_infections for o in outs]) / 20000
    baseline_var = np.mean([o.svi_variance for o in outs])

    goal = GoalSpec(threshold=0.7 * baseline_attack,
                    constraints={"ct_capacity": 0.5, "mask_adherence": 0.5})
    candidates = sample_k_active(10, 5000, seed=410)
    predict_candidates(candidates, sweeps_model)
    fraction_meeting_goal(candidates, goal)
    result = rank_rows(candidates.values, candidates.meets_goal,
                       candidates.predictions, count=10)
    assert len(result.winners) == 10, "fewer than 10 qualifying candidates"

    inf_wins = 0
    var_wins = 0
    for i, w in enumerate(result.winners):
        table = run_study(desk_pop, DiseaseParams(), w.normalized[None, :],
                          reps=20, base_seed=77_000 + i * 100, n_jobs=N_JOBS)
        sim_attack = table.columns["cumulative_infections"].mean() / 20000
        sim_var = table.columns["svi_variance"].mean()
        inf_wins += int(sim_attack < baseline_attack)
        var_wins += int(sim_var < baseline_var)
    verdict("end-to-end-validation", inf_wins == 10 and var_wins >= 7,
            f"(infections below baseline {inf_wins}/10, "
            f"svi variance below baseline {var_wins}/10)")


def test_throughput():
    X = lhs_sample(1500, 10, seed=0).values
    rng = np.random.default_rng(1)
    y = 0.4 * np.exp(-3 * X[:, 0]) + 0.2 * X[:, 1] \
        + rng.normal(scale=0.01, size=1500)
    gbm = fit_gbm(X, y, folds=5, seed=0,
                  grid={"max_depth": (3,), "learning_rate": (0.1,),
                        "min_leaf": (5,)},
                  max_trees=150)
    resid = y - gbm.predict(X)
    gp = GPModel(X=X, y=resid, lengthscales=np.full(10, 0.7),
                 signal_variance=float(np.var(resid) + 1e-6),
                 noise_variance_per_point=np.full(1500, 1e-4),
                 replicate_counts=np.full(1500, 20),
                 noise_mode="homoskedastic").refactorize()
    emulator = OutcomeEmulator(gp=gp, gbm=gbm)
    Xbig = lhs_sample(500_000, 10, seed=9).values
    t0 = time.time()
    mean, sd, lo, hi = emulator.predict_arrays(Xbig)
    elapsed = time.time() - t0
    verdict("throughput",
            elapsed <= 300 and np.isfinite(mean).all() and np.isfinite(sd).all(),
            f"(500,000 predictions on n=1500 model in {elapsed:.0f}s)")
