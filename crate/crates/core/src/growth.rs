//! Period-by-period accumulation of prime movers.
//!
//! Each period re-solves the static equilibrium on the current stocks, then
//! grows every active mover at `r_l · tanh(φ_l / ε_ref)`, where `φ_l` is the
//! mover's marginal energy surplus. Accumulation stops once every `φ_l` is
//! zero and no good has marginal surplus left: the steady state.

use log::{info, warn};
use thiserror::Error;

use crate::demand::{solve_consumer, ConsumerOutcome};
use crate::error::{SolveError, SolveResult};
use crate::model::{
    aggregate_power, AccumNormalization, EconomyState, Event, EventKind, GoodRef, PrimeMoverType,
    ScenarioConfig,
};
use crate::par::{self, Execution};
use crate::surplus::{Binding, EnergyProblem, EnergySideSolution};

/// `φ_l = φ ε_l / (1 - φ)` for every mover; zero where `active` is false.
pub fn mover_surplus_rates(
    phi: f64,
    movers: &[PrimeMoverType],
    active: &[bool],
) -> SolveResult<Vec<f64>> {
    if !(0.0..1.0).contains(&phi) {
        return Err(SolveError::PhiOutOfRange(phi));
    }
    Ok(movers
        .iter()
        .zip(active)
        .map(|(m, on)| if *on { phi * m.direct_energy() / (1.0 - phi) } else { 0.0 })
        .collect())
}

/// Scale dividing `φ_l` inside `tanh`.
pub fn accumulation_scale(mover: &PrimeMoverType, norm: AccumNormalization) -> f64 {
    match norm {
        AccumNormalization::DirectEnergy => mover.direct_energy(),
        AccumNormalization::Fixed(v) => v,
    }
}

/// One period of forward Euler with `φ_l` frozen:
/// `x ← x (1 + (r_l/substeps) tanh(φ_l/ε_ref))`, `substeps` times.
pub fn step_accumulation(
    stocks: &[f64],
    phi_l: &[f64],
    movers: &[PrimeMoverType],
    norm: AccumNormalization,
    substeps: u32,
) -> Vec<f64> {
    let n = substeps.max(1);
    stocks
        .iter()
        .zip(phi_l)
        .zip(movers)
        .map(|((x, p), m)| {
            let factor = 1.0 + m.max_accum_rate / n as f64 * (p / accumulation_scale(m, norm)).tanh();
            let mut x = x.max(0.0);
            for _ in 0..n {
                x *= factor;
            }
            x.max(0.0)
        })
        .collect()
}

/// Applies one event to the state. Shifts compose multiplicatively.
pub fn apply_event(
    config: &ScenarioConfig,
    state: &mut EconomyState,
    event: &Event,
) -> SolveResult<()> {
    match &event.kind {
        EventKind::EfficiencyShift { good, multiplier } | EventKind::MeecShift { good, multiplier } => {
            match *good {
                GoodRef::Energy(i) => {
                    if !state.energy_active[i] {
                        return Err(SolveError::UnknownId(config.energy_goods[i].id.clone()));
                    }
                    state.energy_efficiency[i] *= multiplier;
                }
                GoodRef::NonEnergy(i) => state.non_energy_efficiency[i] *= multiplier,
            }
        }
        EventKind::NewPrimeMover(i) => {
            if state.mover_active[*i] {
                return Err(SolveError::DuplicateId(config.movers[*i].id.clone()));
            }
            state.mover_active[*i] = true;
            state.stocks[*i] = config.movers[*i].endowment;
        }
        EventKind::NewEnergyGood(i) => {
            if state.energy_active[*i] {
                return Err(SolveError::DuplicateId(config.energy_goods[*i].id.clone()));
            }
            state.energy_active[*i] = true;
        }
        EventKind::EndowmentShock { mover, delta } => {
            if !state.mover_active[*mover] {
                return Err(SolveError::UnknownId(config.movers[*mover].id.clone()));
            }
            state.stocks[*mover] = (state.stocks[*mover] + delta).max(0.0);
        }
    }
    Ok(())
}

/// One energy good in one period; `None` fields while inactive.
#[derive(Debug, Clone, PartialEq)]
pub struct GoodRecord {
    pub output: Option<f64>,
    pub marginal_surplus: Option<f64>,
    pub meroi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodRecord {
    pub period: u32,
    /// Stocks at the start of the period, after events.
    pub stocks: Vec<f64>,
    pub phi: f64,
    pub mover_surplus: Vec<f64>,
    pub goods: Vec<GoodRecord>,
    pub usable_surplus: f64,
    pub gross_income: f64,
    pub gross_expenditure: f64,
    pub bundle: Vec<f64>,
    pub lambda: Option<f64>,
    pub power: f64,
    /// Cumulative extraction after this period's output.
    pub cumulative_extraction: Vec<f64>,
    /// Requirement multiplier per energy good (efficiency × depletion).
    pub requirement_multiplier: Vec<f64>,
    pub binding: Binding,
    pub usability_slack: f64,
    /// `max_l r_l tanh(φ_l/ε_ref) x̄_l`.
    pub max_accumulation: f64,
    /// `max_e α_e / δ_e` over producing goods.
    pub max_alpha_ratio: f64,
}

impl PeriodRecord {
    /// `I - G - E*`; zero by construction.
    pub fn conservation_residual(&self) -> f64 {
        self.gross_income - self.gross_expenditure - self.usable_surplus
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub period: u32,
    pub phi: f64,
    pub max_accumulation: f64,
    pub max_alpha_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub mover_ids: Vec<String>,
    pub good_ids: Vec<String>,
    pub non_energy_ids: Vec<String>,
    pub records: Vec<PeriodRecord>,
    pub steady_state: Option<SteadyState>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&PeriodRecord> {
        self.records.last()
    }
}

/// A failed period together with everything simulated before it.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("period {period}: {source}")]
pub struct SimulationError {
    pub period: u32,
    pub source: SolveError,
    pub partial: Box<Trajectory>,
}

/// Energy and consumer sides solved on one state.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticOutcome {
    pub energy: EnergySideSolution,
    pub consumer: ConsumerOutcome,
}

/// Static equilibrium for a given state; errors if the consumer's bundle
/// cannot be staffed by the movers left over from energy production.
pub fn solve_static(config: &ScenarioConfig, state: &EconomyState) -> SolveResult<StaticOutcome> {
    let energy = EnergyProblem::new(config, state)?.solve()?;
    let consumer = solve_consumer(config, state, energy.usable_surplus, &energy.remaining_endowment)?;
    if let Some((l, required, available)) = consumer.support.violation {
        return Err(SolveError::AllocationInfeasible {
            mover: config.movers[l].id.clone(),
            required,
            available,
        });
    }
    if !consumer.usability_ok() {
        warn!(
            "period {}: usability slack {} is negative (embodied overhead on non-energy inputs)",
            state.period, consumer.usability_slack
        );
    }
    Ok(StaticOutcome { energy, consumer })
}

fn record(
    config: &ScenarioConfig,
    state: &EconomyState,
    outcome: &StaticOutcome,
) -> PeriodRecord {
    let energy = &outcome.energy;
    let mut goods = vec![
        GoodRecord {
            output: None,
            marginal_surplus: None,
            meroi: None,
        };
        config.energy_goods.len()
    ];
    let mut cumulative = state.cumulative_extraction.clone();
    let mut max_alpha_ratio: f64 = 0.0;
    for g in &energy.goods {
        goods[g.index] = GoodRecord {
            output: Some(g.output),
            marginal_surplus: Some(g.marginal_surplus),
            meroi: g.meroi,
        };
        cumulative[g.index] += g.output;
        if g.output > 0.0 {
            max_alpha_ratio = max_alpha_ratio.max(g.marginal_surplus / g.energy_content);
        }
    }
    let max_accumulation = config
        .movers
        .iter()
        .enumerate()
        .map(|(l, m)| {
            m.max_accum_rate
                * (energy.mover_surplus[l] / accumulation_scale(m, config.accum_normalization)).tanh()
                * state.available(l)
        })
        .fold(0.0, f64::max);
    PeriodRecord {
        period: state.period,
        stocks: (0..config.movers.len()).map(|l| state.available(l)).collect(),
        phi: energy.phi,
        mover_surplus: energy.mover_surplus.clone(),
        goods,
        usable_surplus: energy.usable_surplus,
        gross_income: energy.gross_income,
        gross_expenditure: energy.gross_expenditure,
        bundle: outcome.consumer.demand.bundle.clone(),
        lambda: outcome.consumer.demand.lambda,
        power: aggregate_power(state, &config.movers),
        cumulative_extraction: cumulative,
        requirement_multiplier: config
            .energy_goods
            .iter()
            .enumerate()
            .map(|(i, g)| state.energy_multiplier(g, i))
            .collect(),
        binding: energy.binding.clone(),
        usability_slack: outcome.consumer.usability_slack,
        max_accumulation,
        max_alpha_ratio,
    }
}

fn is_steady(config: &ScenarioConfig, rec: &PeriodRecord) -> bool {
    let max_stock = rec.stocks.iter().cloned().fold(0.0, f64::max);
    rec.max_accumulation < config.solver.steady_state_tol * max_stock
        && rec.max_alpha_ratio < config.solver.alpha_tol
}

/// Runs the scenario from period 0 until its horizon or the steady state.
pub fn simulate(config: &ScenarioConfig) -> Result<Trajectory, SimulationError> {
    let mut traj = Trajectory {
        mover_ids: config.movers.iter().map(|m| m.id.clone()).collect(),
        good_ids: config.energy_goods.iter().map(|g| g.id.clone()).collect(),
        non_energy_ids: config.non_energy_goods.iter().map(|g| g.id.clone()).collect(),
        records: Vec::new(),
        steady_state: None,
    };
    let mut state = EconomyState::initial(config);
    let mut next_event = 0;
    loop {
        let t = state.period;
        let fail = |source: SolveError, traj: Trajectory| SimulationError {
            period: t,
            source,
            partial: Box::new(traj),
        };
        while next_event < config.events.len() && config.events[next_event].period <= t {
            if let Err(e) = apply_event(config, &mut state, &config.events[next_event]) {
                return Err(fail(e, traj));
            }
            next_event += 1;
        }
        state.activate_scheduled(config);

        let outcome = match solve_static(config, &state) {
            Ok(o) => o,
            Err(e) => return Err(fail(e, traj)),
        };
        let rec = record(config, &state, &outcome);
        let steady = next_event == config.events.len() && is_steady(config, &rec);
        let phi_l = rec.mover_surplus.clone();
        state.cumulative_extraction = rec.cumulative_extraction.clone();
        if steady {
            info!("steady state reached at period {t}");
            traj.steady_state = Some(SteadyState {
                period: t,
                phi: rec.phi,
                max_accumulation: rec.max_accumulation,
                max_alpha_ratio: rec.max_alpha_ratio,
            });
        }
        traj.records.push(rec);
        if steady || t >= config.horizon {
            return Ok(traj);
        }

        let grown = step_accumulation(
            &state.stocks,
            &phi_l,
            &config.movers,
            config.accum_normalization,
            config.solver.substeps,
        );
        for (l, x) in grown.into_iter().enumerate() {
            if state.mover_active[l] {
                state.stocks[l] = x;
            }
        }
        state.period += 1;
    }
}

/// Independent runs, e.g. a parameter sweep.
pub fn simulate_many(
    configs: &[ScenarioConfig],
    exec: Execution,
) -> Vec<Result<Trajectory, SimulationError>> {
    par::map(configs, exec, simulate)
}
