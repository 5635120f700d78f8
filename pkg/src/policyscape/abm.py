"""Discrete-day agent-based transmission engine with the ten policy levers.

One simulated day runs six phases in fixed order: vaccination/boosting,
transmission over household/venue/community contacts, disease progression,
test allocation, diagnosis processing with quarantine draws, and contact
tracing. All agent state lives in flat numpy arrays; a replicate is a pure
function of (population, disease params, policy, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .policy import FULL_SCALE_POPULATION, PolicyVector
from .population import ELIGIBLE_AGE_GROUPS, Population, quarantine_probability

# disease states
S, E, P, ISYM, IASYM, R = 0, 1, 2, 3, 4, 5

N_DAYS = 60


@dataclass
class DurationDist:
    """Integer day counts drawn uniformly from [lo, hi]; mean = (lo+hi)/2."""
    lo: int
    hi: int

    def sample(self, rng, size):
        return rng.integers(self.lo, self.hi + 1, size=size)

    @property
    def mean(self):
        return 0.5 * (self.lo + self.hi)


@dataclass
class DiseaseParams:
    base_transmission_rate: float = 0.055
    presymptomatic_fraction: float = 0.65
    asymptomatic_fraction: float = 0.35
    initial_infection_multiplier: float = 1.0
    initial_seed_fraction: float = 0.01
    latent_days: DurationDist = field(default_factory=lambda: DurationDist(1, 3))
    presymp_days: DurationDist = field(default_factory=lambda: DurationDist(1, 3))
    infectious_days: DurationDist = field(default_factory=lambda: DurationDist(4, 6))
    vaccine_efficacy: float = 0.45
    booster_efficacy: float = 0.60
    mask_efficacy: float = 0.50
    presymp_infectiousness: float = 0.5
    asymp_infectiousness: float = 0.5
    venue_contacts: float = 8.0
    # neighborhood encounters stay within the home tract; a thin global layer
    # keeps tracts epidemiologically coupled
    community_contacts: float = 3.0
    global_contacts: float = 1.0
    # baseline daily test supplies in full-scale (2.4M agent) units,
    # calibrated so infections run 3-5x ahead of diagnoses at baseline
    pcr_baseline_daily: float = 19200.0
    antigen_baseline_daily: float = 9600.0
    antigen_sensitivity: float = 0.85
    quarantine_days: int = 5
    # undiagnosed quarantiners keep this share of out-of-home contact;
    # a positive test upgrades them to full isolation
    quarantine_leakage: float = 0.3
    # None -> use the population's stored per-agent quarantine probability
    quarantine_adherence_baseline: float | None = None
    # age-group vaccination status quo: coverage at day 0 ramping to day-59 value
    vax_coverage_start: tuple = (0.0, 0.35, 0.55, 0.65, 0.75)
    vax_coverage_end: tuple = (0.0, 0.37, 0.57, 0.67, 0.77)
    boost_coverage_start: tuple = (0.0, 0.05, 0.15, 0.25, 0.35)
    boost_coverage_end: tuple = (0.0, 0.06, 0.16, 0.26, 0.36)
    booster_lag_days: int = 60

    def validate(self):
        probs = [self.presymptomatic_fraction, self.asymptomatic_fraction,
                 self.vaccine_efficacy, self.booster_efficacy, self.mask_efficacy,
                 self.presymp_infectiousness, self.asymp_infectiousness,
                 self.antigen_sensitivity]
        if any(not 0.0 <= v <= 1.0 for v in probs):
            raise ValueError("disease probabilities must lie in [0, 1]")
        if abs(self.presymptomatic_fraction + self.asymptomatic_fraction - 1.0) > 1e-9:
            raise ValueError(
                "presymptomatic_fraction and asymptomatic_fraction must sum to 1")
        if not 0.0 <= self.base_transmission_rate <= 0.5:
            raise ValueError("base_transmission_rate must lie in [0, 0.5]")
        if self.initial_infection_multiplier < 0:
            raise ValueError("initial_infection_multiplier must be >= 0")
        for dist in (self.latent_days, self.presymp_days, self.infectious_days):
            if dist.lo < 1 or dist.hi < dist.lo:
                raise ValueError("duration distributions need 1 <= lo <= hi")
        if self.booster_efficacy < self.vaccine_efficacy:
            raise ValueError("booster_efficacy must be >= vaccine_efficacy")


@dataclass
class SimOutcome:
    cumulative_infections: int
    cumulative_diagnoses: int
    daily_diagnoses: np.ndarray
    daily_tests: np.ndarray
    attack_rate_by_svi: np.ndarray
    svi_variance: float
    boosted_fraction: float

    def to_row(self):
        return {
            "cumulative_infections": self.cumulative_infections,
            "cumulative_diagnoses": self.cumulative_diagnoses,
            **{f"attack_svi_{b}": float(self.attack_rate_by_svi[b]) for b in range(4)},
            "svi_variance": self.svi_variance,
            "boosted_fraction": self.boosted_fraction,
        }


def sample_order_from_keys(keys, k):
    """First k indices by ascending key; ties impossible almost surely."""
    if k >= keys.size:
        return np.argsort(keys)
    part = np.argpartition(keys, k)[:k]
    return part[np.argsort(keys[part])]


def weighted_sample_without_replacement(weights, k, rng):
    """Indices of k draws without replacement, inclusion ordered by weight.

    Exponential-key trick: sorting Exp(1)/w gives the same law as sequential
    weighted draws, so the first k keys are the sample in draw order.
    """
    weights = np.asarray(weights, dtype=float)
    return sample_order_from_keys(rng.exponential(size=weights.size) / weights, k)


def compute_svi_outcomes(ever_infected, pop: Population):
    """Attack rate per SVI quartile bin and the sample variance of the four."""
    agent_bin = pop.tract_svi_bins()[pop.home_tract]
    bin_sizes = np.bincount(agent_bin, minlength=4)
    if (bin_sizes == 0).any():
        raise ValueError("every SVI bin needs at least one agent")
    infected = np.bincount(agent_bin, weights=ever_infected.astype(float), minlength=4)
    rates = infected / bin_sizes
    return rates, float(np.var(rates, ddof=1))


class Simulation:
    """Mutable per-replicate state; never shared across replicates."""

    def __init__(self, pop: Population, disease: DiseaseParams,
                 policy: PolicyVector, seed: int, days: int = N_DAYS):
        if pop.n_agents == 0:
            raise ValueError("population is empty")
        disease.validate()
        policy.validate()
        self.pop = pop
        self.disease = disease
        self.policy = policy
        self.days = days
        # one stream per stochastic subsystem, each drawing fixed-size daily
        # vectors indexed by agent id: outcomes are invariant to iteration
        # order and stay coupled across policy arms sharing a seed
        streams = np.random.SeedSequence(seed).spawn(5)
        self.rng_setup = np.random.default_rng(streams[0])
        self.rng_trans = np.random.default_rng(streams[1])
        self.rng_test = np.random.default_rng(streams[2])
        self.rng_quar = np.random.default_rng(streams[3])
        self.rng_trace = np.random.default_rng(streams[4])
        n = pop.n_agents
        scale = n / FULL_SCALE_POPULATION

        self.state = np.zeros(n, dtype=np.int8)
        self.remaining = np.zeros(n, dtype=np.int16)
        self.entry_day = np.full(n, -1, dtype=np.int16)
        self.vaccinated = np.zeros(n, dtype=bool)
        self.boosted = np.zeros(n, dtype=bool)
        self.vax_day = np.full(n, -(10 ** 4), dtype=np.int32)
        self.diagnosed = np.zeros(n, dtype=bool)
        self.quarantined_until = np.full(n, -1, dtype=np.int32)
        self.masked_until = np.full(n, -1, dtype=np.int32)
        self.ever_infected = np.zeros(n, dtype=bool)

        self.daily_diagnoses = np.zeros(days, dtype=np.int64)
        self.daily_tests = np.zeros(days, dtype=np.int64)

        if disease.quarantine_adherence_baseline is None:
            self.quarantine_prob = pop.quarantine_prob
        else:
            self.quarantine_prob = quarantine_probability(
                disease.quarantine_adherence_baseline, pop.agent_svi())

        # desk-scale rescaling of absolute Table-1 quantities
        self.supply_pcr = int(round(disease.pcr_baseline_daily * policy.pcr_mult * scale))
        self.supply_antigen = int(round(
            disease.antigen_baseline_daily * policy.antigen_mult * scale))
        self.ct_capacity = int(round(policy.ct_capacity * scale))

        # venue membership tables for tracing and transmission weights
        self.venue_sizes = np.bincount(pop.venue[pop.venue >= 0],
                                       minlength=max(pop.n_venues, 1))
        vw = np.zeros(n)
        has_venue = pop.venue >= 0
        sizes = self.venue_sizes[pop.venue[has_venue]]
        per_contact = np.minimum(1.0, disease.venue_contacts /
                                 np.maximum(sizes - 1, 1))
        per_contact[sizes <= 1] = 0.0
        vw[has_venue] = per_contact
        self.venue_weight = vw
        tract_sizes = pop.tract_agent_counts()
        self.tract_weight = np.minimum(
            1.0, disease.community_contacts / np.maximum(tract_sizes - 1, 1))
        self.global_weight = min(1.0, disease.global_contacts / max(n - 1, 1))

        order = np.argsort(pop.household, kind="stable")
        bounds = np.searchsorted(pop.household[order], np.arange(pop.n_households + 1))
        self._hh_order, self._hh_bounds = order, bounds
        vorder = np.argsort(pop.venue, kind="stable")
        vorder = vorder[pop.venue[vorder] >= 0]
        vbounds = np.searchsorted(pop.venue[vorder], np.arange(pop.n_venues + 1))
        self._venue_order, self._venue_bounds = vorder, vbounds

        self.vax_priority = self.rng_setup.random(n)
        self.boost_priority = self.rng_setup.random(n)
        # per-agent natural history is predestined at setup
        self.fate_asym = self.rng_setup.random(n) < disease.asymptomatic_fraction
        self.dur_latent = disease.latent_days.sample(self.rng_setup, n).astype(np.int16)
        self.dur_presymp = disease.presymp_days.sample(self.rng_setup, n).astype(np.int16)
        self.dur_infectious = disease.infectious_days.sample(self.rng_setup, n).astype(np.int16)

        self.trace_queue = []  # (contacts array, cursor) FIFO by diagnosis day
        self.new_symptomatic = np.zeros(n, dtype=bool)

        self._setup_initial_immunity()
        self._seed_infections()

    # ---------------------------------------------------------------- setup

    def _group_members(self, kind, gid):
        if kind == "household":
            order, bounds = self._hh_order, self._hh_bounds
        else:
            order, bounds = self._venue_order, self._venue_bounds
        return order[bounds[gid]:bounds[gid + 1]]

    def _setup_initial_immunity(self):
        pop, d = self.pop, self.disease
        for g in range(5):
            members = np.flatnonzero(pop.age_group == g)
            if members.size == 0:
                continue
            k = int(round(d.vax_coverage_start[g] * members.size))
            if k > 0:
                chosen = members[np.argpartition(self.vax_priority[members],
                                                 min(k, members.size) - 1)[:k]]
                self.vaccinated[chosen] = True
                self.vax_day[chosen] = -90
            kb = int(round(d.boost_coverage_start[g] * members.size))
            if kb > 0:
                vaxed = members[self.vaccinated[members]]
                kb = min(kb, vaxed.size)
                if kb > 0:
                    chosen = vaxed[np.argpartition(self.boost_priority[vaxed],
                                                   kb - 1)[:kb]]
                    self.boosted[chosen] = True

    def _seed_infections(self):
        d = self.disease
        n = self.pop.n_agents
        k = int(round(d.initial_infection_multiplier * d.initial_seed_fraction * n))
        k = min(k, n)
        if k == 0:
            return
        seeds = self.rng_setup.choice(n, size=k, replace=False)
        asym = self.fate_asym[seeds]
        self.state[seeds[asym]] = IASYM
        self.state[seeds[~asym]] = P
        self.remaining[seeds[asym]] = self.dur_infectious[seeds[asym]]
        self.remaining[seeds[~asym]] = self.dur_presymp[seeds[~asym]]
        self.entry_day[seeds] = -1
        self.ever_infected[seeds] = True

    # ---------------------------------------------------------------- phases

    def _coverage_target(self, start, end, day):
        return start + (end - start) * (day + 1) / self.days

    def apply_vaccination(self, day):
        """Phase 1: ramp each age group toward max(status quo, policy threshold)."""
        pop, d, pol = self.pop, self.disease, self.policy
        for g in ELIGIBLE_AGE_GROUPS:
            members = np.flatnonzero(pop.age_group == g)
            if members.size == 0:
                continue
            end = max(d.vax_coverage_end[g], pol.vaccine_threshold)
            target = self._coverage_target(d.vax_coverage_start[g], end, day)
            want = int(round(target * members.size)) - int(self.vaccinated[members].sum())
            if want > 0:
                unvax = members[~self.vaccinated[members]]
                take = min(want, unvax.size)
                if take > 0:
                    chosen = unvax[np.argpartition(self.vax_priority[unvax],
                                                   take - 1)[:take]]
                    self.vaccinated[chosen] = True
                    self.vax_day[chosen] = day

            end_b = max(d.boost_coverage_end[g], pol.booster_threshold)
            target_b = self._coverage_target(d.boost_coverage_start[g], end_b, day)
            want_b = int(round(target_b * members.size)) - int(self.boosted[members].sum())
            if want_b > 0:
                eligible = members[self.vaccinated[members]
                                   & ~self.boosted[members]
                                   & (day - self.vax_day[members] >= d.booster_lag_days)]
                take = min(want_b, eligible.size)
                if take > 0:
                    chosen = eligible[np.argpartition(self.boost_priority[eligible],
                                                      take - 1)[:take]]
                    self.boosted[chosen] = True

    def _mask_multiplier(self, idx, day):
        """Outgoing/incoming transmission multiplier from masking."""
        d, pol = self.disease, self.policy
        adherence = np.where(self.masked_until[idx] >= day, 1.0, pol.mask_adherence)
        return 1.0 - d.mask_efficacy * adherence

    def transmit(self, day):
        """Phase 2: exact 1 - prod(1 - rate) hazards over the contact layers."""
        d = self.disease
        pop = self.pop
        u_infection = self.rng_trans.random(pop.n_agents)
        infectious = np.flatnonzero((self.state == P) | (self.state == ISYM)
                                    | (self.state == IASYM))
        susceptible = np.flatnonzero(self.state == S)
        if infectious.size == 0 or susceptible.size == 0:
            return np.empty(0, dtype=np.int64)

        stage_mult = np.ones(infectious.size)
        st = self.state[infectious]
        stage_mult[st == P] = d.presymp_infectiousness
        stage_mult[st == IASYM] = d.asymp_infectiousness
        w = d.base_transmission_rate * stage_mult * self._mask_multiplier(infectious, day)

        # out-of-home contact share: quarantine leaks unless diagnosis firmed it
        out_inf = np.ones(infectious.size)
        q_inf = self.quarantined_until[infectious] >= day
        out_inf[q_inf] = np.where(self.diagnosed[infectious[q_inf]], 0.0,
                                  d.quarantine_leakage)

        # susceptibility class = immunity level x mask window x quarantine
        imm = self.vaccinated[susceptible].astype(np.int8) \
            + self.boosted[susceptible].astype(np.int8)
        masked = (self.masked_until[susceptible] >= day).astype(np.int8)
        quar = (self.quarantined_until[susceptible] >= day).astype(np.int8)
        class_id = (imm * 2 + masked) * 2 + quar
        imm_mult = np.array([1.0, 1.0 - d.vaccine_efficacy, 1.0 - d.booster_efficacy])
        mask_mult = np.array([1.0 - d.mask_efficacy * self.policy.mask_adherence,
                              1.0 - d.mask_efficacy])
        base_s = np.repeat(imm_mult, 2) * np.tile(mask_mult, 3)
        s_home = np.repeat(base_s, 2)
        s_out = s_home * np.tile([1.0, d.quarantine_leakage], 6)
        n_classes = s_home.size
        present = np.flatnonzero(np.bincount(class_id, minlength=n_classes))

        logsurv = np.zeros(susceptible.size)

        def group_log_survival(inf_sel, inf_w, groups, n_groups, s_table):
            """(class, group) table of sum(log(1 - s_c * w_j)) over infectious."""
            G = np.zeros((n_classes, n_groups))
            g_inf = groups[inf_sel]
            for c in present:
                if s_table[c] == 0.0:
                    continue
                contrib = np.log1p(-np.minimum(s_table[c] * inf_w, 0.999999))
                G[c] = np.bincount(g_inf, weights=contrib, minlength=n_groups)
            return G

        # household: quarantine does not reduce exposure at home
        G = group_log_survival(infectious, w, pop.household,
                               self.pop.n_households, s_home)
        logsurv += G[class_id, pop.household[susceptible]]

        # venue: school or workplace members, both sides scaled by leakage
        inf_venue = (pop.venue[infectious] >= 0) & (out_inf > 0)
        sus_venue = np.flatnonzero(pop.venue[susceptible] >= 0)
        if inf_venue.any() and sus_venue.size:
            vi = infectious[inf_venue]
            G = group_log_survival(
                vi, w[inf_venue] * out_inf[inf_venue] * self.venue_weight[vi],
                pop.venue, max(self.pop.n_venues, 1), s_out)
            logsurv[sus_venue] += G[class_id[sus_venue],
                                    pop.venue[susceptible[sus_venue]]]

        # tract community plus a thin global layer
        inf_out = out_inf > 0
        if inf_out.any():
            ci = infectious[inf_out]
            w_out = w[inf_out] * out_inf[inf_out]
            G = group_log_survival(ci, w_out * self.tract_weight[pop.home_tract[ci]],
                                   pop.home_tract, self.pop.n_tracts, s_out)
            logsurv += G[class_id, pop.home_tract[susceptible]]

            w_glob = w_out * self.global_weight
            totals = np.zeros(n_classes)
            for c in present:
                if s_out[c] != 0.0:
                    totals[c] = np.sum(
                        np.log1p(-np.minimum(s_out[c] * w_glob, 0.999999)))
            logsurv += totals[class_id]

        at_risk = np.flatnonzero(logsurv < 0)
        if at_risk.size == 0:
            return np.empty(0, dtype=np.int64)
        p_inf = -np.expm1(logsurv[at_risk])
        hit = at_risk[u_infection[susceptible[at_risk]] < p_inf]
        newly = susceptible[hit]
        self.state[newly] = E
        self.remaining[newly] = self.dur_latent[newly]
        self.entry_day[newly] = day
        self.ever_infected[newly] = True
        return newly

    def progress(self, day):
        """Phase 3: decrement stage clocks, advance along S->E->{P->Sym,Asym}->R."""
        self.new_symptomatic[:] = False
        active = ((self.state == E) | (self.state == P) | (self.state == ISYM)
                  | (self.state == IASYM)) & (self.entry_day < day)
        self.remaining[active] -= 1
        done = active & (self.remaining == 0)
        if not done.any():
            return
        idx = np.flatnonzero(done)
        st = self.state[idx]

        from_e = idx[st == E]
        if from_e.size:
            asym = self.fate_asym[from_e]
            to_asym, to_p = from_e[asym], from_e[~asym]
            self.state[to_asym] = IASYM
            self.remaining[to_asym] = self.dur_infectious[to_asym]
            self.state[to_p] = P
            self.remaining[to_p] = self.dur_presymp[to_p]
            self.entry_day[from_e] = day

        from_p = idx[st == P]
        if from_p.size:
            self.state[from_p] = ISYM
            self.remaining[from_p] = self.dur_infectious[from_p]
            self.entry_day[from_p] = day
            self.new_symptomatic[from_p] = True

        from_i = idx[(st == ISYM) | (st == IASYM)]
        if from_i.size:
            self.state[from_i] = R
            self.entry_day[from_i] = day

    def allocate_tests(self, day):
        """Phase 4: weighted sampling without replacement under daily supply."""
        pol = self.policy
        n = self.pop.n_agents
        exp_keys = self.rng_test.exponential(size=n)
        self._u_antigen = self.rng_test.random(n)
        eligible = np.flatnonzero(~self.diagnosed)
        supply = self.supply_pcr + self.supply_antigen
        if supply == 0 or eligible.size == 0:
            return (np.empty(0, dtype=np.int64),) * 2
        weights = np.ones(eligible.size)
        weights[self.state[eligible] == ISYM] *= pol.symptomatic_or
        weights[self.quarantined_until[eligible] >= day] *= pol.quarantine_test_or
        order = sample_order_from_keys(exp_keys[eligible] / weights,
                                       min(supply, eligible.size))
        tested = eligible[order]
        self.daily_tests[day] = tested.size
        pcr = tested[:self.supply_pcr]
        antigen = tested[self.supply_pcr:]
        return pcr, antigen

    def process_diagnoses(self, day, pcr, antigen):
        """Phase 5: positive results, then quarantine draws for new symptomatic
        or newly diagnosed agents."""
        d = self.disease
        u_quarantine = self.rng_quar.random(self.pop.n_agents)
        detectable = (self.state == P) | (self.state == ISYM) | (self.state == IASYM)
        pos_pcr = pcr[detectable[pcr]]
        det_ag = antigen[detectable[antigen]]
        pos_ag = det_ag[self._u_antigen[det_ag] < d.antigen_sensitivity]
        positives = np.concatenate([pos_pcr, pos_ag])
        if positives.size:
            self.diagnosed[positives] = True
            self.daily_diagnoses[day] = positives.size
            contacts = self._contacts_of(positives)
            if contacts.size:
                self.trace_queue.append([contacts, 0])

        candidates = np.flatnonzero(self.new_symptomatic)
        candidates = np.union1d(candidates, positives)
        if candidates.size:
            draws = u_quarantine[candidates] < self.quarantine_prob[candidates]
            chosen = candidates[draws]
            # already-quarantined agents extend isolation rather than re-enter
            self.quarantined_until[chosen] = np.maximum(
                self.quarantined_until[chosen], day + d.quarantine_days)

    def _contacts_of(self, cases):
        """Household plus venue members of each case, self excluded, deduped."""
        pop = self.pop
        chunks = []
        for a in cases:
            hh = self._group_members("household", pop.household[a])
            chunks.append(hh)
            if pop.venue[a] >= 0:
                chunks.append(self._group_members("venue", pop.venue[a]))
        if not chunks:
            return np.empty(0, dtype=np.int64)
        contacts = np.concatenate(chunks)
        contacts = np.unique(contacts)
        return contacts[~np.isin(contacts, cases)]

    def contact_trace(self, day):
        """Phase 6: FIFO tracing up to daily capacity; traced agents quarantine
        with the policy adherence and mask for the policy duration."""
        pol, d = self.policy, self.disease
        u_adherence = self.rng_trace.random(self.pop.n_agents)
        capacity = self.ct_capacity
        traced_today = []
        seen = np.zeros(self.pop.n_agents, dtype=bool)
        while capacity > 0 and self.trace_queue:
            contacts, cursor = self.trace_queue[0]
            chunk = contacts[cursor:cursor + capacity]
            fresh = chunk[~seen[chunk]]
            seen[fresh] = True
            traced_today.append(fresh)
            used = fresh.size
            capacity -= used
            cursor += chunk.size
            if cursor >= contacts.size:
                self.trace_queue.pop(0)
            else:
                self.trace_queue[0][1] = cursor
        if not traced_today:
            return np.empty(0, dtype=np.int64)
        traced = np.concatenate(traced_today)
        if traced.size == 0:
            return traced
        quar = traced[u_adherence[traced] < pol.quarantine_adherence_ct]
        self.quarantined_until[quar] = np.maximum(
            self.quarantined_until[quar], day + d.quarantine_days)
        if pol.mask_duration_ct > 0:
            self.masked_until[traced] = np.maximum(
                self.masked_until[traced], day + pol.mask_duration_ct)
        return traced

    def step_day(self, day):
        self.apply_vaccination(day)
        self.transmit(day)
        self.progress(day)
        pcr, antigen = self.allocate_tests(day)
        self.process_diagnoses(day, pcr, antigen)
        self.contact_trace(day)

    def outcome(self) -> SimOutcome:
        rates, variance = compute_svi_outcomes(self.ever_infected, self.pop)
        return SimOutcome(
            cumulative_infections=int(self.ever_infected.sum()),
            cumulative_diagnoses=int(self.diagnosed.sum()),
            daily_diagnoses=self.daily_diagnoses.copy(),
            daily_tests=self.daily_tests.copy(),
            attack_rate_by_svi=rates,
            svi_variance=variance,
            boosted_fraction=float(self.boosted.mean()),
        )


def run_simulation(pop: Population, disease: DiseaseParams, policy: PolicyVector,
                   seed: int, days: int = N_DAYS) -> SimOutcome:
    """Run one replicate for `days` steps; deterministic for a fixed seed."""
    sim = Simulation(pop, disease, policy, seed, days=days)
    for day in range(days):
        sim.step_day(day)
    return sim.outcome()


def simulate_index_case(pop: Population, disease: DiseaseParams, rng) -> int:
    """Direct secondary infections of one index case, interventions off.

    The index runs its full infectious course in an otherwise susceptible,
    unvaccinated population; infected contacts are removed from the risk pool
    but never transmit.
    """
    d = disease
    n = pop.n_agents
    index = int(rng.integers(n))
    asym = rng.random() < d.asymptomatic_fraction

    stages = []
    if asym:
        stages.append((d.asymp_infectiousness,
                       int(d.infectious_days.sample(rng, 1)[0])))
    else:
        stages.append((d.presymp_infectiousness,
                       int(d.presymp_days.sample(rng, 1)[0])))
        stages.append((1.0, int(d.infectious_days.sample(rng, 1)[0])))

    hh = pop.household == pop.household[index]
    ven = (pop.venue[index] >= 0) & (pop.venue == pop.venue[index])
    tract = pop.home_tract == pop.home_tract[index]
    hh[index] = False
    ven[index] = False
    tract[index] = False
    hh_idx = np.flatnonzero(hh)
    ven_idx = np.flatnonzero(ven)
    tract_idx = np.flatnonzero(tract)
    venue_size = ven_idx.size + 1
    vw = min(1.0, d.venue_contacts / max(venue_size - 1, 1)) if ven_idx.size else 0.0
    tw = d.community_contacts / max(tract_idx.size, 1)
    gw = d.global_contacts / max(n - 1, 1)

    still_susceptible = np.ones(n, dtype=bool)
    still_susceptible[index] = False
    secondary = 0
    for stage_mult, n_days in stages:
        rate = d.base_transmission_rate * stage_mult
        for _ in range(n_days):
            for idx, mult in ((hh_idx, 1.0), (ven_idx, vw), (tract_idx, tw)):
                if idx.size == 0 or mult == 0.0:
                    continue
                live = idx[still_susceptible[idx]]
                hit = live[rng.random(live.size) < rate * mult]
                still_susceptible[hit] = False
                secondary += hit.size
            # thin global layer
            others = np.flatnonzero(still_susceptible)
            hits = others[rng.random(others.size) < rate * gw]
            still_susceptible[hits] = False
            secondary += hits.size
    return secondary
