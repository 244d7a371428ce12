//! Comparative statics by central differences, and randomized sweeps that
//! tally how often each qualitative prediction holds.
//!
//! Three predictions are checked:
//! - `a`: raising a non-energy good's MEEC lowers its own consumption;
//! - `b`: it raises consumption of every other non-energy good;
//! - `c`: raising an energy good's energy content raises its output.
//!
//! Every trial scenario is generated from a per-trial seed, and its digest is
//! kept with any failure so the exact scenario can be rebuilt later.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::demand::solve_demands;
use crate::demand::non_energy_curves;
use crate::error::{ConfigError, SolveError, SolveResult};
use crate::model::{load_scenario, EconomyState, ScenarioConfig};
use crate::par::{self, Execution};
use crate::surplus::{EnergyProblem, EnergySideSolution};

/// Name of the generator written into sweep outputs.
pub const PRNG_NAME: &str = "ChaCha8";

pub const DEFAULT_STEP: f64 = 1e-3;

/// Parameter being perturbed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// `δ_e` of energy good `e`.
    EnergyContent(usize),
    /// Requirement multiplier of non-energy good `n` (scales its whole MEEC).
    NonEnergyMeec(usize),
    /// Requirement multiplier of energy good `e`.
    EnergyMeec(usize),
}

/// Quantity being differentiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Response {
    EnergyOutput(usize),
    Consumption(usize),
    Phi,
    Surplus,
}

/// How `φ` is treated at the perturbed points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PhiMode {
    /// Solved afresh at each point.
    Resolved,
    /// Pinned to the value solved at the base point.
    #[default]
    HeldAtBase,
    /// Pinned to a given value.
    #[serde(skip)]
    Fixed(f64),
}

struct Point {
    config: ScenarioConfig,
    state: EconomyState,
}

impl Point {
    fn new(config: &ScenarioConfig) -> Self {
        Point {
            config: config.clone(),
            state: EconomyState::initial(config),
        }
    }

    fn shifted(&self, target: Target, factor: f64) -> Self {
        let mut config = self.config.clone();
        let mut state = self.state.clone();
        match target {
            Target::EnergyContent(e) => config.energy_goods[e].energy_content *= factor,
            Target::NonEnergyMeec(n) => state.non_energy_efficiency[n] *= factor,
            Target::EnergyMeec(e) => state.energy_efficiency[e] *= factor,
        }
        Point { config, state }
    }

    fn target_value(&self, target: Target) -> f64 {
        match target {
            Target::EnergyContent(e) => self.config.energy_goods[e].energy_content,
            Target::NonEnergyMeec(n) => self.state.non_energy_efficiency[n],
            Target::EnergyMeec(e) => self.state.energy_efficiency[e],
        }
    }

    fn energy(&self, phi: Option<f64>) -> SolveResult<EnergySideSolution> {
        let problem = EnergyProblem::new(&self.config, &self.state)?;
        match phi {
            None => problem.solve(),
            Some(p) => problem.solve_at(p),
        }
    }

    fn evaluate(&self, response: Response, phi: Option<f64>) -> SolveResult<f64> {
        let energy = self.energy(phi)?;
        Ok(match response {
            Response::EnergyOutput(e) => energy
                .good(e)
                .map(|g| g.output)
                .ok_or_else(|| SolveError::UnknownId(format!("energy good #{e}")))?,
            Response::Phi => energy.phi,
            Response::Surplus => energy.usable_surplus,
            Response::Consumption(n) => {
                let curves = non_energy_curves(&self.config, &self.state)?;
                let demand = solve_demands(&self.config.preferences, &curves, energy.usable_surplus)?;
                *demand
                    .bundle
                    .get(n)
                    .ok_or_else(|| SolveError::UnknownId(format!("non-energy good #{n}")))?
            }
        })
    }
}

/// Central-difference `d response / d target` with relative step `step`.
pub fn perturb_and_sign(
    config: &ScenarioConfig,
    target: Target,
    response: Response,
    step: f64,
    phi_mode: PhiMode,
) -> SolveResult<f64> {
    if step == 0.0 || !step.is_finite() {
        return Err(SolveError::DegenerateStep);
    }
    let base = Point::new(config);
    let t0 = base.target_value(target);
    if t0 == 0.0 {
        return Err(SolveError::DegenerateStep);
    }
    let phi = match phi_mode {
        PhiMode::Resolved => None,
        PhiMode::Fixed(p) => Some(p),
        PhiMode::HeldAtBase => Some(base.energy(None)?.phi),
    };
    // the base point has to solve too
    base.evaluate(response, phi)?;
    let up = base.shifted(target, 1.0 + step).evaluate(response, phi)?;
    let down = base.shifted(target, 1.0 - step).evaluate(response, phi)?;
    Ok((up - down) / (2.0 * step * t0))
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = String;

    fn try_from([lo, hi]: [f64; 2]) -> Result<Self, Self::Error> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Ok(Interval { lo, hi })
        } else {
            Err(format!("invalid interval [{lo}, {hi}]"))
        }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    fn draw(&self, rng: &mut impl Rng) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.random_range(self.lo..=self.hi)
        }
    }

    fn draw_log(&self, rng: &mut impl Rng) -> f64 {
        Interval::new(self.lo.ln(), self.hi.ln()).draw(rng).exp()
    }

    fn draw_count(&self, rng: &mut impl Rng) -> usize {
        let (lo, hi) = (self.lo.round() as usize, self.hi.round() as usize);
        rng.random_range(lo..=hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum PreferenceFamily {
    CobbDouglas,
    Ces { sigma: Interval },
}

/// Ranges the random scenarios are drawn from.
///
/// All movers of a scenario share one embodied overhead ratio
/// `κ = d γ^A / ε`, so `ω_l = (1 + κ) ε_l`. Endowments are log-uniform.
/// Non-energy goods have constant MEECs unless `meec_curvature` is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioFamily {
    pub energy_goods: Interval,
    pub prime_movers: Interval,
    pub non_energy_goods: Interval,
    pub energy_content: Interval,
    pub returns_to_scale: Interval,
    pub scale: Interval,
    pub transfer: Interval,
    pub overhead: Interval,
    pub depreciation: Interval,
    pub endowment: Interval,
    pub utility_weight: Interval,
    pub meec_level: Interval,
    /// `c2` of the non-energy requirement profile (with `q_s = 1`, `ρ = 2`).
    pub meec_curvature: Interval,
    pub preferences: PreferenceFamily,
}

impl Default for ScenarioFamily {
    fn default() -> Self {
        ScenarioFamily {
            energy_goods: Interval::new(1.0, 2.0),
            prime_movers: Interval::new(1.0, 3.0),
            non_energy_goods: Interval::new(2.0, 3.0),
            energy_content: Interval::new(2.0, 50.0),
            returns_to_scale: Interval::new(0.3, 0.9),
            scale: Interval::new(0.5, 2.0),
            transfer: Interval::new(0.5, 5.0),
            overhead: Interval::new(0.0, 0.5),
            depreciation: Interval::new(0.05, 0.5),
            endowment: Interval::new(0.5, 500.0),
            utility_weight: Interval::new(0.2, 5.0),
            meec_level: Interval::new(0.5, 5.0),
            meec_curvature: Interval::new(0.0, 0.0),
            preferences: PreferenceFamily::Ces {
                sigma: Interval::new(1.5, 4.0),
            },
        }
    }
}

impl ScenarioFamily {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let family: ScenarioFamily = serde_json::from_str(text)?;
        family.validate()?;
        Ok(family)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("energy_goods", self.energy_goods),
            ("prime_movers", self.prime_movers),
            ("non_energy_goods", self.non_energy_goods),
            ("energy_content", self.energy_content),
            ("returns_to_scale", self.returns_to_scale),
            ("scale", self.scale),
            ("transfer", self.transfer),
            ("depreciation", self.depreciation),
            ("endowment", self.endowment),
            ("utility_weight", self.utility_weight),
            ("meec_level", self.meec_level),
        ];
        for (name, i) in positive {
            if i.lo <= 0.0 {
                return Err(ConfigError::invalid(name, "lower bound must be > 0"));
            }
        }
        if self.returns_to_scale.hi >= 1.0 {
            return Err(ConfigError::invalid("returns_to_scale", "must stay below 1"));
        }
        if self.depreciation.hi >= 1.0 {
            return Err(ConfigError::invalid("depreciation", "must stay below 1"));
        }
        if self.overhead.lo < 0.0 || self.meec_curvature.lo < 0.0 {
            return Err(ConfigError::invalid("overhead", "bounds must be >= 0"));
        }
        if let PreferenceFamily::Ces { sigma } = self.preferences {
            if sigma.lo <= 0.0 || (sigma.lo..=sigma.hi).contains(&1.0) {
                return Err(ConfigError::invalid("preferences.sigma", "must be > 0 and exclude 1"));
            }
        }
        Ok(())
    }

    /// Scenario document for one trial seed.
    pub fn document(&self, trial_seed: u64) -> Value {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
        let n_movers = self.prime_movers.draw_count(&mut rng).max(1);
        let n_energy = self.energy_goods.draw_count(&mut rng).max(1);
        let n_goods = self.non_energy_goods.draw_count(&mut rng).max(1);
        let kappa = self.overhead.draw(&mut rng);

        let mut movers = Vec::new();
        for l in 0..n_movers {
            let omega = self.transfer.draw(&mut rng);
            let eps = omega / (1.0 + kappa);
            let d = self.depreciation.draw(&mut rng);
            movers.push(json!({
                "id": format!("m{l}"),
                "power_rate": eps,
                "depreciation": d,
                "avg_embodied": kappa * eps / d,
                "endowment": self.endowment.draw_log(&mut rng),
                "max_accum_rate": 0.1
            }));
        }

        let mut energy = Vec::new();
        for e in 0..n_energy {
            let b = self.returns_to_scale.draw(&mut rng);
            let mut order: Vec<usize> = (0..n_movers).collect();
            order.shuffle(&mut rng);
            let used = rng.random_range(1..=n_movers);
            let shares: Vec<f64> = (0..used).map(|_| rng.random_range(0.2..=1.0)).collect();
            let total: f64 = shares.iter().sum();
            let mut exponents = Map::new();
            for (l, s) in order.iter().take(used).zip(&shares) {
                exponents.insert(format!("m{l}"), json!(b * s / total));
            }
            energy.push(json!({
                "id": format!("e{e}"),
                "energy_content": self.energy_content.draw(&mut rng),
                "technology": {
                    "kind": "cobb_douglas",
                    "scale": self.scale.draw(&mut rng),
                    "exponents": exponents
                }
            }));
        }

        let support = &movers[0];
        let support_omega = support["power_rate"].as_f64().unwrap_or(1.0) * (1.0 + kappa);
        let mut goods = Vec::new();
        for n in 0..n_goods {
            let level = self.meec_level.draw(&mut rng);
            goods.push(json!({
                "id": format!("n{n}"),
                "utility_weight": self.utility_weight.draw(&mut rng),
                "technology": {
                    "kind": "fixed_proportions",
                    "requirements": {"m0": 1.0},
                    "c0": level / support_omega,
                    "c2": self.meec_curvature.draw(&mut rng) / support_omega,
                    "q_s": 1.0,
                    "rho": 2.0
                }
            }));
        }

        let preferences = match self.preferences {
            PreferenceFamily::CobbDouglas => json!({"form": "cobb_douglas"}),
            PreferenceFamily::Ces { sigma } => json!({"form": "ces", "sigma": sigma.draw(&mut rng)}),
        };
        json!({
            "period_length": 1.0,
            "prime_movers": movers,
            "energy_goods": energy,
            "non_energy_goods": goods,
            "preferences": preferences,
            "horizon": 0,
            "solver": {"seed": trial_seed}
        })
    }

    pub fn scenario(&self, trial_seed: u64) -> Result<ScenarioConfig, ConfigError> {
        load_scenario(&self.document(trial_seed).to_string())
    }
}

/// Seed of trial `index` in a sweep seeded with `seed`.
pub fn trial_seed(seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.next_u64()
}

/// Rebuilds a failing trial's scenario and checks it is the one recorded.
pub fn reproduce(
    family: &ScenarioFamily,
    trial_seed: u64,
    digest: &str,
) -> Result<ScenarioConfig, ConfigError> {
    let config = family.scenario(trial_seed)?;
    if config.digest() != digest {
        return Err(ConfigError::invalid(
            "digest",
            format!("trial seed {trial_seed} regenerates digest {}", config.digest()),
        ));
    }
    Ok(config)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Proposition {
    /// Own MEEC up, own consumption down.
    A,
    /// Own MEEC up, other consumption up.
    B,
    /// Energy content up, output up.
    C,
}

impl Proposition {
    pub const ALL: [Proposition; 3] = [Proposition::A, Proposition::B, Proposition::C];

    pub fn id(self) -> &'static str {
        match self {
            Proposition::A => "a",
            Proposition::B => "b",
            Proposition::C => "c",
        }
    }

    /// +1 or -1: the sign the derivative should have.
    pub fn expected_sign(self) -> f64 {
        match self {
            Proposition::A => -1.0,
            Proposition::B | Proposition::C => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub proposition: Proposition,
    pub trial: usize,
    pub seed: u64,
    pub digest: String,
    pub derivative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discarded {
    pub proposition: Proposition,
    pub trial: usize,
    pub seed: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignTable {
    pub proposition: Proposition,
    /// Completed trials; `confirmed + failures.len()`.
    pub trials: usize,
    pub confirmed: usize,
    pub failures: Vec<Failure>,
    pub discarded: Vec<Discarded>,
    pub min_derivative: Option<f64>,
    pub max_derivative: Option<f64>,
    pub step: f64,
    /// False when no trial had the structure the proposition needs.
    pub applicable: bool,
}

impl SignTable {
    pub fn all_confirmed(&self) -> bool {
        self.failures.is_empty() && self.confirmed == self.trials
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub step: f64,
    /// Treatment of `φ` for proposition `c`.
    pub energy_phi: PhiMode,
    pub execution: Execution,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            step: DEFAULT_STEP,
            energy_phi: PhiMode::HeldAtBase,
            execution: Execution::Parallel,
        }
    }
}

enum Outcome {
    Derivative(f64),
    NotApplicable,
    Discarded(String),
}

struct TrialResult {
    index: usize,
    seed: u64,
    digest: String,
    outcomes: [Outcome; 3],
}

fn run_trial(family: &ScenarioFamily, seed: u64, index: usize, opts: &SuiteOptions) -> TrialResult {
    let tseed = trial_seed(seed, index);
    let config = match family.scenario(tseed) {
        Ok(c) => c,
        Err(e) => {
            let why = || Outcome::Discarded(format!("invalid scenario: {e}"));
            return TrialResult {
                index,
                seed: tseed,
                digest: String::new(),
                outcomes: [why(), why(), why()],
            };
        }
    };
    // pick the perturbed goods from a stream independent of the scenario draw
    let mut pick = ChaCha8Rng::seed_from_u64(tseed);
    pick.set_stream(1);
    let n_goods = config.non_energy_goods.len();
    let n = pick.random_range(0..n_goods);
    let other = (n_goods > 1).then(|| (n + pick.random_range(1..n_goods)) % n_goods);
    let e = pick.random_range(0..config.energy_goods.len());

    let measure = |target, response, mode| match perturb_and_sign(&config, target, response, opts.step, mode) {
        Ok(d) => Outcome::Derivative(d),
        Err(err) => Outcome::Discarded(err.to_string()),
    };
    let a = measure(Target::NonEnergyMeec(n), Response::Consumption(n), PhiMode::Resolved);
    let b = match other {
        Some(m) => measure(Target::NonEnergyMeec(n), Response::Consumption(m), PhiMode::Resolved),
        None => Outcome::NotApplicable,
    };
    let c = measure(Target::EnergyContent(e), Response::EnergyOutput(e), opts.energy_phi);
    TrialResult {
        index,
        seed: tseed,
        digest: config.digest(),
        outcomes: [a, b, c],
    }
}

/// Runs `trials` random scenarios and tallies one table per proposition.
pub fn proposition_suite(
    family: &ScenarioFamily,
    seed: u64,
    trials: usize,
    opts: &SuiteOptions,
) -> Vec<SignTable> {
    let results = par::map_range(trials, opts.execution, |i| run_trial(family, seed, i, opts));
    Proposition::ALL
        .iter()
        .enumerate()
        .map(|(k, &prop)| {
            let mut table = SignTable {
                proposition: prop,
                trials: 0,
                confirmed: 0,
                failures: Vec::new(),
                discarded: Vec::new(),
                min_derivative: None,
                max_derivative: None,
                step: opts.step,
                applicable: false,
            };
            for r in &results {
                match &r.outcomes[k] {
                    Outcome::NotApplicable => {}
                    Outcome::Discarded(reason) => {
                        table.applicable = true;
                        table.discarded.push(Discarded {
                            proposition: prop,
                            trial: r.index,
                            seed: r.seed,
                            reason: reason.clone(),
                        });
                    }
                    Outcome::Derivative(d) => {
                        table.applicable = true;
                        table.trials += 1;
                        table.min_derivative = Some(table.min_derivative.map_or(*d, |m| m.min(*d)));
                        table.max_derivative = Some(table.max_derivative.map_or(*d, |m| m.max(*d)));
                        if d * prop.expected_sign() > 0.0 {
                            table.confirmed += 1;
                        } else {
                            table.failures.push(Failure {
                                proposition: prop,
                                trial: r.index,
                                seed: r.seed,
                                digest: r.digest.clone(),
                                derivative: *d,
                            });
                        }
                    }
                }
            }
            table.failures.sort_by(|x, y| x.seed.cmp(&y.seed).then(x.trial.cmp(&y.trial)));
            table.discarded.sort_by(|x, y| x.seed.cmp(&y.seed).then(x.trial.cmp(&y.trial)));
            table
        })
        .collect()
}

/// Worst relative deviations from the tangency conditions at an optimum with
/// Cobb-Douglas energy technologies: `(ω_l + φ_l)/f_{l,e} = δ_e` within a
/// good, and `δ_e f_{l,e} = δ_{e'} f_{l,e'}` across goods sharing mover `l`.
pub fn tangency_residuals(
    config: &ScenarioConfig,
    state: &EconomyState,
    solution: &EnergySideSolution,
) -> SolveResult<(f64, f64)> {
    let problem = EnergyProblem::new(config, state)?;
    let mut within: f64 = 0.0;
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); config.movers.len()];
    for g in &solution.goods {
        if g.output <= 0.0 {
            continue;
        }
        let Some(fs) = problem.curve(g.index)?.marginal_products(g.output) else {
            continue;
        };
        for (l, f) in fs {
            let omega = config.movers[l].total_transfer();
            let ratio = (omega + solution.mover_surplus[l]) / f;
            within = within.max((ratio - g.energy_content).abs() / g.energy_content);
            values[l].push(g.energy_content * f);
        }
    }
    let mut across: f64 = 0.0;
    for vs in &values {
        if let (Some(lo), Some(hi)) = (
            vs.iter().cloned().reduce(f64::min),
            vs.iter().cloned().reduce(f64::max),
        ) {
            across = across.max((hi - lo) / hi);
        }
    }
    Ok((within, across))
}
