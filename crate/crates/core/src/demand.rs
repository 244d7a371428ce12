//! Consumer side: spend the usable energy surplus on non-energy goods.
//!
//! Demands come from nested scalar solves. Preferences are replaced by the
//! additively separable transform `V = Σ a_n Q_n^s / s` (log form for
//! Cobb-Douglas), which ranks bundles identically; for a multiplier `μ`
//! each good solves `a_n Q^{s-1} = μ γ_n(Q)` on its own, and `μ` is then
//! bisected until the bundle exhausts the budget. The reported `λ*` is the
//! marginal utility of energy for the original utility function.

use crate::embodied::EmbodiedCurve;
use crate::error::{SolveError, SolveResult};
use crate::model::{EconomyState, PrimeMoverType, Preferences, ScenarioConfig};
use crate::numerics::{bisect, brent, expand_upper_bracket, Bracket, Expansion};

#[derive(Debug, Clone, PartialEq)]
pub struct DemandSolution {
    pub bundle: Vec<f64>,
    /// Marginal utility of energy surplus; `None` when there is nothing to spend.
    pub lambda: Option<f64>,
    pub energy: f64,
    /// `γ_n(Q_n*)`.
    pub marginal: Vec<f64>,
    /// `γ^A_n(Q_n*)`.
    pub average: Vec<f64>,
    /// `γ^A_n Q_n*`, joules.
    pub spent: Vec<f64>,
    /// `Σ γ^A_n Q_n* - E`.
    pub budget_residual: f64,
}

impl DemandSolution {
    fn empty(n: usize, energy: f64, curves: &[EmbodiedCurve]) -> Self {
        DemandSolution {
            bundle: vec![0.0; n],
            lambda: None,
            energy,
            marginal: curves.iter().map(|c| c.marginal(0.0)).collect(),
            average: curves.iter().map(|c| c.average(0.0)).collect(),
            spent: vec![0.0; n],
            budget_residual: 0.0,
        }
    }

    /// Largest `|U_n/λ - γ_n| / γ_n` over goods.
    pub fn max_foc_residual(&self, prefs: &Preferences) -> f64 {
        let Some(lambda) = self.lambda else { return 0.0 };
        (0..self.bundle.len())
            .map(|n| {
                let mu = prefs.marginal_utility(&self.bundle, n);
                (mu / lambda - self.marginal[n]).abs() / self.marginal[n]
            })
            .fold(0.0, f64::max)
    }
}

/// Movers employed in non-energy production and whether they fit.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportAllocation {
    /// Per good: `(mover, x_{l,n})`.
    pub employment: Vec<Vec<(usize, f64)>>,
    /// `Σ_n x_{l,n}` per catalogue mover.
    pub totals: Vec<f64>,
    pub feasible: bool,
    /// `(mover, required, available)` of the worst violation.
    pub violation: Option<(usize, f64, f64)>,
}

/// Full consumer-side result for one period.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsumerOutcome {
    pub demand: DemandSolution,
    pub support: SupportAllocation,
    /// `Σ_l ε_l Σ_n x_{l,n} - E`.
    pub usability_slack: f64,
}

impl ConsumerOutcome {
    pub fn usability_ok(&self) -> bool {
        self.usability_slack >= -1e-8 * self.demand.energy.max(1.0)
    }
}

const Q_START: f64 = 1e-12;
const Q_LIMIT: f64 = 1e18;

fn quantity_for(prefs: &Preferences, curve: &EmbodiedCurve, n: usize, mu: f64) -> SolveResult<f64> {
    let f = |q: f64| {
        if q == 0.0 {
            f64::INFINITY
        } else {
            prefs.separable_marginal(n, q) - mu * curve.marginal(q)
        }
    };
    match expand_upper_bracket(f, Q_START, Q_LIMIT) {
        Expansion::Found(b) => brent(f, b, 1e-15),
        Expansion::Unbounded => Ok(Q_LIMIT),
        Expansion::NeverPositive => Ok(0.0),
    }
}

fn spending(prefs: &Preferences, curves: &[EmbodiedCurve], mu: f64) -> SolveResult<(Vec<f64>, f64)> {
    let bundle = curves
        .iter()
        .enumerate()
        .map(|(n, c)| quantity_for(prefs, c, n, mu))
        .collect::<SolveResult<Vec<f64>>>()?;
    let total = bundle.iter().zip(curves).map(|(q, c)| c.cumulative(*q)).sum();
    Ok((bundle, total))
}

/// Utility-maximising bundle under `Σ γ^A_n Q_n ≤ E`.
pub fn solve_demands(
    prefs: &Preferences,
    curves: &[EmbodiedCurve],
    energy: f64,
) -> SolveResult<DemandSolution> {
    let n = curves.len();
    if n == 0 {
        return Err(SolveError::Infeasible("no non-energy goods to consume".into()));
    }
    if energy.is_nan() || energy <= 0.0 {
        return Ok(DemandSolution::empty(n, energy.max(0.0), curves));
    }

    // bracket the multiplier in log space around the Cobb-Douglas guess
    let weight_sum: f64 = prefs.weights.iter().sum();
    let excess = |ln_mu: f64| -> SolveResult<f64> { Ok(spending(prefs, curves, ln_mu.exp())?.1 - energy) };
    let mut lo = (weight_sum / energy).ln();
    let mut f_lo = excess(lo)?;
    let mut hi = lo;
    let mut f_hi = f_lo;
    let mut steps = 0;
    while f_lo <= 0.0 {
        hi = lo;
        f_hi = f_lo;
        lo -= 2.0;
        f_lo = excess(lo)?;
        steps += 1;
        if steps > 400 {
            return Err(SolveError::NoConvergence("demand multiplier bracket (low side)".into()));
        }
    }
    while f_hi > 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi += 2.0;
        f_hi = excess(hi)?;
        steps += 1;
        if steps > 400 {
            return Err(SolveError::NoConvergence("demand multiplier bracket (high side)".into()));
        }
    }

    let failure = std::cell::RefCell::new(None);
    let ln_mu = bisect(
        |x| match excess(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        Bracket { lo, hi, f_lo, f_hi },
        0.0,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let (bundle, total) = spending(prefs, curves, ln_mu.exp())?;
    let marginal: Vec<f64> = bundle.iter().zip(curves).map(|(q, c)| c.marginal(*q)).collect();
    let lambda = prefs.marginal_utility(&bundle, 0) / marginal[0];
    Ok(DemandSolution {
        average: bundle.iter().zip(curves).map(|(q, c)| c.average(*q)).collect(),
        spent: bundle.iter().zip(curves).map(|(q, c)| c.cumulative(*q)).collect(),
        marginal,
        lambda: Some(lambda),
        energy,
        budget_residual: total - energy,
        bundle,
    })
}

/// Movers needed to produce `bundle`, checked against what the energy
/// sector left over. Infeasible bundles are reported, never rescaled.
pub fn allocate_support_prime_movers(
    bundle: &[f64],
    curves: &[EmbodiedCurve],
    remaining: &[f64],
) -> SupportAllocation {
    let employment: Vec<Vec<(usize, f64)>> = bundle
        .iter()
        .zip(curves)
        .map(|(q, c)| c.requirements(*q))
        .collect();
    let mut totals = vec![0.0; remaining.len()];
    for good in &employment {
        for (l, x) in good {
            totals[*l] += x;
        }
    }
    let mut violation: Option<(usize, f64, f64)> = None;
    for (l, (need, have)) in totals.iter().zip(remaining).enumerate() {
        let tolerance = 1e-9 * have.max(1.0);
        if *need > have + tolerance {
            let worse = violation.is_none_or(|(_, r, a)| need - have > r - a);
            if worse {
                violation = Some((l, *need, *have));
            }
        }
    }
    SupportAllocation {
        employment,
        totals,
        feasible: violation.is_none(),
        violation,
    }
}

/// `Σ_l ε_l Σ_n x_{l,n} - E`; negative means surplus cannot all be used.
pub fn usability_slack(totals: &[f64], movers: &[PrimeMoverType], energy: f64) -> f64 {
    totals
        .iter()
        .zip(movers)
        .map(|(x, m)| m.direct_energy() * x)
        .sum::<f64>()
        - energy
}

/// Non-energy MEECs for the current state.
pub fn non_energy_curves(config: &ScenarioConfig, state: &EconomyState) -> SolveResult<Vec<EmbodiedCurve>> {
    config
        .non_energy_goods
        .iter()
        .zip(&state.non_energy_efficiency)
        .map(|(g, m)| EmbodiedCurve::new(&g.technology, &config.movers, *m))
        .collect()
}

/// Demand, support allocation and usability check in one call.
pub fn solve_consumer(
    config: &ScenarioConfig,
    state: &EconomyState,
    energy: f64,
    remaining: &[f64],
) -> SolveResult<ConsumerOutcome> {
    let curves = non_energy_curves(config, state)?;
    let demand = solve_demands(&config.preferences, &curves, energy)?;
    let support = allocate_support_prime_movers(&demand.bundle, &curves, remaining);
    let usability_slack = usability_slack(&support.totals, &config.movers, demand.energy);
    Ok(ConsumerOutcome {
        demand,
        support,
        usability_slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RequirementProfile, Technology};

    fn movers() -> Vec<PrimeMoverType> {
        vec![PrimeMoverType::new("w", 1.0, 1.0, 0.1, 0.0, 100.0)]
    }

    fn constant(c: f64) -> EmbodiedCurve {
        EmbodiedCurve::new(
            &Technology::fixed(vec![(0, 1.0)], RequirementProfile::constant(c)),
            &movers(),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn symmetric_cobb_douglas_demands() {
        let prefs = Preferences::cobb_douglas(vec![0.5, 0.5]);
        let d = solve_demands(&prefs, &[constant(1.0), constant(1.0)], 18.75).unwrap();
        assert!((d.bundle[0] - 9.375).abs() < 1e-9);
        assert!((d.bundle[1] - 9.375).abs() < 1e-9);
        assert!((d.lambda.unwrap() - 0.5).abs() < 1e-9);
        assert!(d.budget_residual.abs() < 1e-8 * 18.75);
        assert!(d.max_foc_residual(&prefs) < 1e-6);
    }

    #[test]
    fn dearer_good_gets_half() {
        let prefs = Preferences::cobb_douglas(vec![0.5, 0.5]);
        let d = solve_demands(&prefs, &[constant(2.0), constant(1.0)], 18.75).unwrap();
        assert!((d.bundle[0] - 4.6875).abs() < 1e-9);
        assert!((d.bundle[1] - 9.375).abs() < 1e-9);
        // tangency: U_1/U_2 = γ_1/γ_2
        let ratio = prefs.marginal_utility(&d.bundle, 0) / prefs.marginal_utility(&d.bundle, 1);
        assert!((ratio - 2.0).abs() < 1e-6);
    }

    #[test]
    fn single_good_collapses_to_budget_line() {
        let prefs = Preferences::cobb_douglas(vec![0.7]);
        let c = 3.0;
        let e = 12.0;
        let d = solve_demands(&prefs, &[constant(c)], e).unwrap();
        let q = e / c;
        assert!((d.bundle[0] - q).abs() < 1e-9 * q);
        let expected_lambda = 0.7 * q.powf(-0.3) / c;
        assert!((d.lambda.unwrap() - expected_lambda).abs() < 1e-9);
    }

    #[test]
    fn ces_matches_closed_form() {
        // Q_m = a_m^σ γ_m^{-σ} E / Σ a_k^σ γ_k^{1-σ}
        let sigma = 2.5;
        let a = [0.6, 1.4, 2.0];
        let g = [1.0, 2.5, 0.8];
        let e = 40.0;
        let prefs = Preferences::ces(sigma, a.to_vec());
        let curves: Vec<_> = g.iter().map(|c| constant(*c)).collect();
        let d = solve_demands(&prefs, &curves, e).unwrap();
        let denom: f64 = a.iter().zip(&g).map(|(a, g)| a.powf(sigma) * g.powf(1.0 - sigma)).sum();
        for m in 0..3 {
            let expected = a[m].powf(sigma) * g[m].powf(-sigma) * e / denom;
            assert!((d.bundle[m] - expected).abs() < 1e-9 * expected, "{m}");
        }
        assert!(d.max_foc_residual(&prefs) < 1e-6);
    }

    #[test]
    fn rising_meec_budget_exhaustion() {
        let prefs = Preferences::cobb_douglas(vec![1.0, 2.0]);
        let cd = EmbodiedCurve::new(&Technology::cobb_douglas(1.0, vec![(0, 0.6)]), &movers(), 1.0).unwrap();
        let d = solve_demands(&prefs, &[cd, constant(1.5)], 30.0).unwrap();
        assert!(d.budget_residual.abs() < 1e-8 * 30.0);
        assert!(d.max_foc_residual(&prefs) < 1e-6);
    }

    #[test]
    fn no_energy_means_empty_bundle() {
        let prefs = Preferences::cobb_douglas(vec![1.0]);
        let d = solve_demands(&prefs, &[constant(1.0)], 0.0).unwrap();
        assert_eq!(d.bundle, vec![0.0]);
        assert!(d.lambda.is_none());
    }

    #[test]
    fn support_allocation_cases() {
        let curves = [constant(1.0)];
        let a = allocate_support_prime_movers(&[9.375], &curves, &[20.0]);
        assert!((a.employment[0][0].1 - 9.375).abs() < 1e-12);
        assert!(a.feasible);
        let z = allocate_support_prime_movers(&[0.0], &curves, &[0.0]);
        assert!(z.feasible);
        assert_eq!(z.totals, vec![0.0]);
        let bad = allocate_support_prime_movers(&[9.375], &curves, &[5.0]);
        assert!(!bad.feasible);
        assert_eq!(bad.violation.unwrap().0, 0);
    }

    #[test]
    fn usability_slack_cases() {
        let m = movers();
        assert!(usability_slack(&[18.75], &m, 18.75).abs() < 1e-15);
        assert_eq!(usability_slack(&[3.0], &m, 0.0), 3.0);
        assert_eq!(usability_slack(&[10.0], &m, 12.0), -2.0);
    }
}
