//! Energy-side surplus maximisation.
//!
//! For a candidate scarcity proportion `φ`, every energy good produces where
//! its marginal surplus `δ - γ(Q)` equals the scarcity premium
//! `φ/(1-φ) · Σ_l ε_l g'_l(Q) / L`. The equilibrium `φ*` is the smallest
//! value at which the realised surplus is usable by the movers left over for
//! non-energy production (complementary slackness on usability), counting
//! only movers that some non-energy technology can employ, raised
//! further if some mover's endowment would otherwise be exceeded.

use log::{debug, warn};

use crate::embodied::EmbodiedCurve;
use crate::error::{SolveError, SolveResult};
use crate::model::{EconomyState, ScenarioConfig, SolverSettings};
use crate::numerics::{bisect, brent, expand_upper_bracket, Bracket, Expansion};
use crate::par::{self, Execution};

/// Which constraint pins down `φ*`.
#[derive(Debug, Clone, PartialEq)]
pub enum Binding {
    None,
    Usability,
    /// Catalogue index of the mover whose endowment binds.
    Endowment(usize),
}

/// Per-good status reported alongside the solution.
#[derive(Debug, Clone, PartialEq)]
pub enum GoodBinding {
    None,
    Usability,
    Endowment(usize),
    /// Output capped by the remaining primary-energy stock.
    Resource,
    /// A required mover is unavailable.
    Unproducible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoodOutcome {
    /// Index into the scenario's energy-good catalogue.
    pub index: usize,
    pub id: String,
    pub energy_content: f64,
    pub output: f64,
    /// `γ_e(Q*)`.
    pub marginal_embodied: f64,
    /// `G_e(Q*)`.
    pub cumulative: f64,
    /// `α_e = δ_e - γ_e(Q*)`.
    pub marginal_surplus: f64,
    pub scarcity_premium: f64,
    /// `δ_e Q* - G_e`.
    pub surplus: f64,
    pub meroi: Option<f64>,
    /// `(mover, x_{l,e})`.
    pub employment: Vec<(usize, f64)>,
    pub binding: GoodBinding,
    /// `|δ - γ - premium| / δ`.
    pub premium_residual: f64,
    /// `(mover, |δ f_l - ω_l - φ_l| / δ)`, Cobb-Douglas goods only.
    pub productivity_residuals: Vec<(usize, f64)>,
    /// Number of mover types the good uses.
    pub used_movers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergySideSolution {
    pub phi: f64,
    pub goods: Vec<GoodOutcome>,
    /// `φ_l` per catalogue mover (zero for inactive movers).
    pub mover_surplus: Vec<f64>,
    /// `Σ_e x_{l,e}` per catalogue mover.
    pub energy_employment: Vec<f64>,
    /// Endowment left for non-energy production, per catalogue mover.
    pub remaining_endowment: Vec<f64>,
    pub usable_surplus: f64,
    pub gross_income: f64,
    pub gross_expenditure: f64,
    /// `Σ ε_l max(0, x̄_l - Σ_e x_{l,e})`.
    pub usable_capacity: f64,
    pub binding: Binding,
}

impl EnergySideSolution {
    pub fn is_null(&self) -> bool {
        self.goods.iter().all(|g| g.output == 0.0)
    }

    pub fn good(&self, index: usize) -> Option<&GoodOutcome> {
        self.goods.iter().find(|g| g.index == index)
    }

    pub fn max_premium_residual(&self) -> f64 {
        self.goods
            .iter()
            .filter(|g| g.output > 0.0 && g.binding != GoodBinding::Resource)
            .map(|g| g.premium_residual)
            .fold(0.0, f64::max)
    }

    pub fn max_productivity_residual(&self) -> f64 {
        self.goods
            .iter()
            .filter(|g| g.output > 0.0 && g.binding != GoodBinding::Resource)
            .flat_map(|g| g.productivity_residuals.iter().map(|(_, r)| *r))
            .fold(0.0, f64::max)
    }

    /// `E* - U(φ*)`; zero when usability binds, non-positive otherwise.
    pub fn usability_residual(&self) -> f64 {
        self.usable_surplus - self.usable_capacity
    }
}

#[derive(Debug, Clone)]
struct PreparedGood {
    index: usize,
    id: String,
    delta: f64,
    curve: EmbodiedCurve,
    resource_cap: Option<f64>,
    producible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Response {
    Finite(f64),
    Unbounded,
}

impl Response {
    fn value(self) -> f64 {
        match self {
            Response::Finite(q) => q,
            Response::Unbounded => f64::INFINITY,
        }
    }
}

const WALK_START: f64 = 1e-9;
const WALK_LIMIT: f64 = 1e15;

/// The energy side of one period, bound to the state's multipliers and stocks.
#[derive(Debug, Clone)]
pub struct EnergyProblem {
    goods: Vec<PreparedGood>,
    direct: Vec<f64>,
    transfer: Vec<f64>,
    available: Vec<f64>,
    active: Vec<bool>,
    /// Movers some non-energy technology can employ.
    supports: Vec<bool>,
    settings: SolverSettings,
    exec: Execution,
}

impl EnergyProblem {
    pub fn new(config: &ScenarioConfig, state: &EconomyState) -> SolveResult<Self> {
        let available: Vec<f64> = (0..config.movers.len()).map(|l| state.available(l)).collect();
        let mut goods = Vec::new();
        for (index, good) in config.energy_goods.iter().enumerate() {
            if !state.energy_active[index] {
                continue;
            }
            let curve = EmbodiedCurve::new(
                &good.technology,
                &config.movers,
                state.energy_multiplier(good, index),
            )?;
            let producible = curve.movers().all(|l| available[l] > 0.0);
            goods.push(PreparedGood {
                index,
                id: good.id.clone(),
                delta: good.energy_content,
                curve,
                resource_cap: state.remaining_resource(good, index),
                producible,
            });
        }
        Ok(EnergyProblem {
            goods,
            direct: config.movers.iter().map(|m| m.direct_energy()).collect(),
            transfer: config.movers.iter().map(|m| m.total_transfer()).collect(),
            available,
            active: state.mover_active.clone(),
            supports: (0..config.movers.len())
                .map(|l| {
                    config
                        .non_energy_goods
                        .iter()
                        .any(|g| g.technology.used_movers().any(|m| m == l))
                })
                .collect(),
            settings: config.solver,
            exec: Execution::Sequential,
        })
    }

    /// Solve goods' output conditions for each `φ` in parallel.
    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    fn position(&self, index: usize) -> SolveResult<&PreparedGood> {
        self.goods
            .iter()
            .find(|g| g.index == index)
            .ok_or_else(|| SolveError::UnknownId(format!("energy good #{index} (inactive)")))
    }

    fn premium(&self, g: &PreparedGood, q: f64, phi: f64) -> f64 {
        if phi == 0.0 {
            return 0.0;
        }
        let sum: f64 = g
            .curve
            .marginal_requirements(q)
            .iter()
            .map(|(l, gp)| self.direct[*l] * gp)
            .sum();
        phi / (1.0 - phi) * sum / g.curve.used_count() as f64
    }

    fn response(&self, g: &PreparedGood, phi: f64) -> SolveResult<Response> {
        if !g.producible {
            return Ok(Response::Finite(0.0));
        }
        let f = |q: f64| g.delta - g.curve.marginal(q) - self.premium(g, q, phi);
        let r = match expand_upper_bracket(f, WALK_START, WALK_LIMIT) {
            Expansion::NeverPositive => Response::Finite(0.0),
            Expansion::Unbounded => Response::Unbounded,
            Expansion::Found(b) => Response::Finite(brent(f, b, self.settings.root_tol)?),
        };
        Ok(match (r, g.resource_cap) {
            (_, Some(cap)) if r.value() > cap => Response::Finite(cap),
            _ => r,
        })
    }

    fn responses(&self, phi: f64) -> SolveResult<Vec<Response>> {
        par::map(&self.goods, self.exec, |g| self.response(g, phi))
            .into_iter()
            .collect()
    }

    fn employment_totals(&self, outputs: &[f64]) -> Vec<f64> {
        let mut totals = vec![0.0; self.available.len()];
        for (g, q) in self.goods.iter().zip(outputs) {
            for (l, x) in g.curve.requirements(*q) {
                totals[l] += x;
            }
        }
        totals
    }

    fn surplus_of(&self, outputs: &[f64]) -> (f64, f64) {
        let income: f64 = self.goods.iter().zip(outputs).map(|(g, q)| g.delta * q).sum();
        let spent: f64 = self.goods.iter().zip(outputs).map(|(g, q)| g.curve.cumulative(*q)).sum();
        (income, spent)
    }

    fn capacity(&self, employment: &[f64]) -> f64 {
        employment
            .iter()
            .enumerate()
            .filter(|(l, _)| self.supports[*l])
            .map(|(l, x)| self.direct[l] * (self.available[l] - x).max(0.0))
            .sum()
    }

    /// Usability residual `ρ(φ) = E(φ) - U(φ)`; `+∞` if some good is unbounded.
    pub fn usability_residual(&self, phi: f64) -> SolveResult<f64> {
        let resp = self.responses(phi)?;
        if resp.contains(&Response::Unbounded) {
            return Ok(f64::INFINITY);
        }
        let outputs: Vec<f64> = resp.iter().map(|r| r.value()).collect();
        let (income, spent) = self.surplus_of(&outputs);
        Ok(income - spent - self.capacity(&self.employment_totals(&outputs)))
    }

    /// Largest relative endowment overrun across movers; `≤ 0` when every
    /// per-type constraint holds.
    fn endowment_overrun(&self, phi: f64) -> SolveResult<(f64, Option<usize>)> {
        let resp = self.responses(phi)?;
        if resp.contains(&Response::Unbounded) {
            return Ok((f64::INFINITY, None));
        }
        let outputs: Vec<f64> = resp.iter().map(|r| r.value()).collect();
        let totals = self.employment_totals(&outputs);
        let mut worst = (f64::NEG_INFINITY, None);
        for (l, x) in totals.iter().enumerate() {
            if *x == 0.0 {
                continue;
            }
            let cap = self.available[l];
            let over = (x - cap) / cap.max(f64::MIN_POSITIVE) - 1e-12;
            if over > worst.0 {
                worst = (over, Some(l));
            }
        }
        Ok(worst)
    }

    /// Smallest `φ > from` with `f(φ) ≤ 0`, given `f(from) > 0`.
    fn first_crossing<F>(&self, from: f64, f: F) -> SolveResult<f64>
    where
        F: Fn(f64) -> SolveResult<f64>,
    {
        let mut grid: Vec<f64> = (1..64).map(|k| k as f64 / 64.0).collect();
        grid.extend((7..=45).map(|k| 1.0 - 0.5f64.powi(k)));
        grid.retain(|p| *p > from);
        let mut lo = (from, f(from)?);
        let mut crossing = None;
        let mut seen_negative = false;
        for p in grid {
            let v = f(p)?;
            if v <= 0.0 {
                if crossing.is_none() {
                    crossing = Some((lo, (p, v)));
                }
                seen_negative = true;
            } else if seen_negative {
                warn!("residual is not monotone in phi (positive again at {p}); using first crossing");
                break;
            } else {
                lo = (p, v);
            }
        }
        let ((a, fa), (b, fb)) = crossing.ok_or_else(|| {
            SolveError::Infeasible("no scarcity proportion below 1 satisfies the prime-mover constraints".into())
        })?;
        self.bisect_phi(&f, a, fa, b, fb)
    }

    fn bisect_phi<F>(&self, f: &F, a: f64, fa: f64, b: f64, fb: f64) -> SolveResult<f64>
    where
        F: Fn(f64) -> SolveResult<f64>,
    {
        // errors inside the closure are surfaced after the search; an
        // unbounded (+inf) residual only carries its sign
        let failure = std::cell::RefCell::new(None);
        let g = |p: f64| match f(p) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                1.0
            }
        };
        let phi = bisect(
            g,
            Bracket {
                lo: a,
                hi: b,
                f_lo: fa,
                f_hi: fb,
            },
            0.0,
        )?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(phi)
    }

    /// Full solve: `φ*` from usability, then per-type endowment caps.
    pub fn solve(&self) -> SolveResult<EnergySideSolution> {
        let base = self.responses(0.0)?;
        if base.iter().all(|r| *r == Response::Finite(0.0)) {
            if self.goods.iter().any(|g| !g.producible && g.delta > g.curve.marginal(0.0)) {
                return Err(SolveError::Infeasible(
                    "endowments cannot produce any energy good".into(),
                ));
            }
            return self.assemble(0.0, Binding::None);
        }

        let rho0 = self.usability_residual(0.0)?;
        let (mut phi, mut binding) = if rho0 <= 0.0 {
            (0.0, Binding::None)
        } else {
            (
                self.first_crossing(0.0, |p| self.usability_residual(p))?,
                Binding::Usability,
            )
        };

        let (over, mover) = self.endowment_overrun(phi)?;
        if over > 0.0 {
            phi = self.first_crossing(phi, |p| Ok(self.endowment_overrun(p)?.0))?;
            let (_, worst) = self.endowment_overrun(phi)?;
            binding = Binding::Endowment(worst.or(mover).unwrap_or(0));
        }
        debug!("energy side solved: phi = {phi}, binding = {binding:?}");

        self.assemble(phi, binding)
    }

    /// Diagnostic solve with `φ` imposed; no usability or endowment search.
    pub fn solve_at(&self, phi: f64) -> SolveResult<EnergySideSolution> {
        check_phi(phi)?;
        self.assemble(phi, Binding::None)
    }

    fn assemble(&self, phi: f64, binding: Binding) -> SolveResult<EnergySideSolution> {
        let resp = self.responses(phi)?;
        let mut outputs = Vec::with_capacity(resp.len());
        for (g, r) in self.goods.iter().zip(&resp) {
            match r {
                Response::Finite(q) => outputs.push(*q),
                Response::Unbounded => return Err(SolveError::NoBracket { good: g.id.clone() }),
            }
        }
        let mover_surplus: Vec<f64> = self
            .direct
            .iter()
            .enumerate()
            .map(|(l, eps)| if self.active[l] { phi * eps / (1.0 - phi) } else { 0.0 })
            .collect();

        let mut goods = Vec::with_capacity(self.goods.len());
        for (g, &q) in self.goods.iter().zip(&outputs) {
            let gamma = g.curve.marginal(q);
            let cumulative = g.curve.cumulative(q);
            let alpha = g.delta - gamma;
            let premium = self.premium(g, q, phi);
            let capped = g.resource_cap.is_some_and(|cap| q >= cap && cap < f64::INFINITY)
                && g.delta - gamma - premium > self.settings.foc_tol * g.delta;
            let good_binding = if !g.producible {
                GoodBinding::Unproducible
            } else if capped {
                GoodBinding::Resource
            } else {
                match binding {
                    Binding::None => GoodBinding::None,
                    Binding::Usability => GoodBinding::Usability,
                    Binding::Endowment(l) => GoodBinding::Endowment(l),
                }
            };
            let productivity_residuals = match g.curve.marginal_products(q) {
                Some(fs) if q > 0.0 => fs
                    .iter()
                    .map(|(l, f)| {
                        (*l, (g.delta * f - self.transfer[*l] - mover_surplus[*l]).abs() / g.delta)
                    })
                    .collect(),
                _ => Vec::new(),
            };
            goods.push(GoodOutcome {
                index: g.index,
                id: g.id.clone(),
                energy_content: g.delta,
                output: q,
                marginal_embodied: gamma,
                cumulative,
                marginal_surplus: alpha,
                scarcity_premium: premium,
                surplus: g.delta * q - cumulative,
                meroi: if q > 0.0 { Some(g.delta / gamma) } else { None },
                employment: g.curve.requirements(q),
                binding: good_binding,
                premium_residual: (g.delta - gamma - premium).abs() / g.delta,
                productivity_residuals,
                used_movers: g.curve.used_count(),
            });
        }

        let employment = self.employment_totals(&outputs);
        let (income, spent) = self.surplus_of(&outputs);
        let remaining = self
            .available
            .iter()
            .zip(&employment)
            .map(|(a, x)| (a - x).max(0.0))
            .collect();
        Ok(EnergySideSolution {
            phi,
            goods,
            mover_surplus,
            usable_capacity: self.capacity(&employment),
            energy_employment: employment,
            remaining_endowment: remaining,
            usable_surplus: income - spent,
            gross_income: income,
            gross_expenditure: spent,
            binding,
        })
    }

    /// `δ_e - γ_e(Q)` for an active good.
    pub fn marginal_surplus_at(&self, index: usize, q: f64) -> SolveResult<f64> {
        if q < 0.0 {
            return Err(SolveError::NegativeQuantity(q));
        }
        let g = self.position(index)?;
        Ok(g.delta - g.curve.marginal(q))
    }

    /// `φ/(1-φ) · Σ_l ε_l g'_l(Q) / L` for an active good.
    pub fn scarcity_premium(&self, index: usize, q: f64, phi: f64) -> SolveResult<f64> {
        check_phi(phi)?;
        if q < 0.0 {
            return Err(SolveError::NegativeQuantity(q));
        }
        let g = self.position(index)?;
        Ok(self.premium(g, q, phi))
    }

    /// Output of one good at a given `φ` (no constraint search).
    pub fn output_at(&self, index: usize, phi: f64) -> SolveResult<Option<f64>> {
        check_phi(phi)?;
        Ok(match self.response(self.position(index)?, phi)? {
            Response::Finite(q) => Some(q),
            Response::Unbounded => None,
        })
    }

    pub fn curve(&self, index: usize) -> SolveResult<&EmbodiedCurve> {
        Ok(&self.position(index)?.curve)
    }

    pub fn available(&self) -> &[f64] {
        &self.available
    }
}

fn check_phi(phi: f64) -> SolveResult<()> {
    if (0.0..1.0).contains(&phi) {
        Ok(())
    } else {
        Err(SolveError::PhiOutOfRange(phi))
    }
}

/// Solves the energy side for the current state.
pub fn solve_energy_side(config: &ScenarioConfig, state: &EconomyState) -> SolveResult<EnergySideSolution> {
    EnergyProblem::new(config, state)?.solve()
}

/// Energy side with `φ` imposed (diagnostic mode).
pub fn solve_energy_side_at(
    config: &ScenarioConfig,
    state: &EconomyState,
    phi: f64,
) -> SolveResult<EnergySideSolution> {
    EnergyProblem::new(config, state)?.solve_at(phi)
}

/// Marginal EROI `δ_e / γ_e(Q*)`; `None` when the good is not produced.
pub fn meroi(good: &GoodOutcome) -> Option<f64> {
    good.meroi
}

/// Marker values for a rendered equilibrium diagram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Figure1Markers {
    pub output: f64,
    pub marginal_embodied: f64,
    pub cumulative: f64,
    pub surplus: f64,
    pub marginal_surplus: f64,
}

/// Curve samples for one energy good's equilibrium diagram: the willingness
/// ceiling (flat at `δ` up to the power-saturating output, then vertical)
/// and the MEEC.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure1Report {
    pub good_id: String,
    pub energy_content: f64,
    /// Output at which the good alone would exhaust the movers left to it.
    pub saturation: f64,
    pub ceiling: Vec<(f64, f64)>,
    pub meec: Vec<(f64, f64)>,
    pub markers: Option<Figure1Markers>,
}

pub fn figure1_report(
    problem: &EnergyProblem,
    solution: &EnergySideSolution,
    index: usize,
    points: usize,
) -> SolveResult<Figure1Report> {
    let g = problem.position(index)?;
    let outcome = solution.good(index);
    let own: Vec<(usize, f64)> = outcome.map(|o| o.employment.clone()).unwrap_or_default();
    let mut left = problem.available.clone();
    for (l, x) in solution.energy_employment.iter().enumerate() {
        left[l] -= x;
    }
    for (l, x) in own {
        left[l] += x;
    }
    for v in &mut left {
        *v = v.max(0.0);
    }
    let saturation = g.curve.max_output_within(&left);
    let q_star = outcome.map(|o| o.output).unwrap_or(0.0);
    let unconstrained = match problem.response(g, 0.0)? {
        Response::Finite(q) => q,
        Response::Unbounded => saturation,
    };
    let mut span = q_star.max(unconstrained.min(saturation));
    if !(span.is_finite() && span > 0.0) {
        span = if saturation.is_finite() && saturation > 0.0 { saturation } else { 1.0 };
    }
    let q_max = 1.25 * span;
    let n = points.max(2);
    let meec = (0..n)
        .map(|i| {
            let q = q_max * i as f64 / (n - 1) as f64;
            (q, g.curve.marginal(q))
        })
        .collect();
    let ceiling = if saturation < q_max {
        vec![(0.0, g.delta), (saturation, g.delta), (saturation, 0.0)]
    } else {
        vec![(0.0, g.delta), (q_max, g.delta)]
    };
    let markers = outcome.filter(|o| o.output > 0.0).map(|o| Figure1Markers {
        output: o.output,
        marginal_embodied: o.marginal_embodied,
        cumulative: o.cumulative,
        surplus: o.surplus,
        marginal_surplus: o.marginal_surplus,
    });
    Ok(Figure1Report {
        good_id: g.id.clone(),
        energy_content: g.delta,
        saturation,
        ceiling,
        meec,
        markers,
    })
}
