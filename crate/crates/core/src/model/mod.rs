//! Domain types shared by every solver: prime movers, goods, technologies,
//! preferences and the mutable economy state the growth loop advances.

mod scenario;
mod technology;

pub use scenario::{
    load_scenario, AccumNormalization, EnergyGoodDoc, EventDoc, NonEnergyGoodDoc, PreferencesDoc,
    PrimeMoverDoc, ScenarioConfig, ScenarioDoc, SolverDoc, SolverSettings, TechnologyDoc,
    TolerancesDoc,
};
pub use technology::{RequirementProfile, Technology};

/// Direct energy transferred by one unit of a prime mover over one period,
/// with constant power: `p * dt`.
pub fn direct_energy(power_rate: f64, period_length: f64) -> f64 {
    power_rate * period_length
}

/// Total energy transferred per unit per period: direct energy plus the
/// depreciated share of the mover's own embodied energy.
pub fn total_transfer_per_unit(mover: &PrimeMoverType) -> f64 {
    mover.direct_energy + mover.depreciation * mover.avg_embodied
}

/// A class of energy-transferring agent or device.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeMoverType {
    pub id: String,
    /// Watts.
    pub power_rate: f64,
    pub depreciation: f64,
    /// Average embodied energy of one unit, joules.
    pub avg_embodied: f64,
    pub endowment: f64,
    /// Maximum unitary accumulation rate per period.
    pub max_accum_rate: f64,
    pub intro_period: u32,
    direct_energy: f64,
    total_transfer: f64,
}

impl PrimeMoverType {
    /// Builds a mover and fills its derived per-unit energies. The caller is
    /// responsible for validating the raw fields (see [`load_scenario`]).
    pub fn new(
        id: impl Into<String>,
        power_rate: f64,
        period_length: f64,
        depreciation: f64,
        avg_embodied: f64,
        endowment: f64,
    ) -> Self {
        let mut mover = PrimeMoverType {
            id: id.into(),
            power_rate,
            depreciation,
            avg_embodied,
            endowment,
            max_accum_rate: 0.0,
            intro_period: 0,
            direct_energy: 0.0,
            total_transfer: 0.0,
        };
        mover.refresh(period_length);
        mover
    }

    pub fn with_accumulation(mut self, rate: f64) -> Self {
        self.max_accum_rate = rate;
        self
    }

    pub fn with_intro_period(mut self, period: u32) -> Self {
        self.intro_period = period;
        self
    }

    fn refresh(&mut self, period_length: f64) {
        self.direct_energy = direct_energy(self.power_rate, period_length);
        self.total_transfer = total_transfer_per_unit(self);
    }

    /// `ε_l`, joules per unit per period.
    pub fn direct_energy(&self) -> f64 {
        self.direct_energy
    }

    /// `ω_l`, joules per unit per period.
    pub fn total_transfer(&self) -> f64 {
        self.total_transfer
    }
}

/// A good valued only for its energy content.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyGood {
    pub id: String,
    /// Joules per unit.
    pub energy_content: f64,
    pub technology: Technology,
    /// `None` means a renewable (unbounded) source.
    pub pes_stock: Option<f64>,
    pub depletion_exponent: f64,
    pub intro_period: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonEnergyGood {
    pub id: String,
    pub technology: Technology,
    pub utility_weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PreferenceForm {
    CobbDouglas,
    Ces { sigma: f64 },
}

/// Utility over non-energy goods: `Π Q_n^{a_n}` or `(Σ a_n Q_n^s)^{1/s}`
/// with `s = (σ - 1)/σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Preferences {
    pub form: PreferenceForm,
    pub weights: Vec<f64>,
}

impl Preferences {
    pub fn cobb_douglas(weights: Vec<f64>) -> Self {
        Preferences {
            form: PreferenceForm::CobbDouglas,
            weights,
        }
    }

    pub fn ces(sigma: f64, weights: Vec<f64>) -> Self {
        Preferences {
            form: PreferenceForm::Ces { sigma },
            weights,
        }
    }

    /// Exponent of the additively separable transform `V = Σ a_n Q_n^s / s`
    /// (`Σ a_n ln Q_n` when `s = 0`). `V` orders bundles exactly like `U`.
    pub fn separable_exponent(&self) -> f64 {
        match self.form {
            PreferenceForm::CobbDouglas => 0.0,
            PreferenceForm::Ces { sigma } => (sigma - 1.0) / sigma,
        }
    }

    pub fn utility(&self, bundle: &[f64]) -> f64 {
        match self.form {
            PreferenceForm::CobbDouglas => self
                .weights
                .iter()
                .zip(bundle)
                .map(|(a, q)| q.powf(*a))
                .product(),
            PreferenceForm::Ces { .. } => {
                let s = self.separable_exponent();
                let inner: f64 = self
                    .weights
                    .iter()
                    .zip(bundle)
                    .map(|(a, q)| a * q.powf(s))
                    .sum();
                inner.powf(1.0 / s)
            }
        }
    }

    /// `∂U/∂Q_n`.
    pub fn marginal_utility(&self, bundle: &[f64], n: usize) -> f64 {
        let a = self.weights[n];
        let q = bundle[n];
        match self.form {
            PreferenceForm::CobbDouglas => a * self.utility(bundle) / q,
            PreferenceForm::Ces { .. } => {
                let s = self.separable_exponent();
                let inner: f64 = self
                    .weights
                    .iter()
                    .zip(bundle)
                    .map(|(w, x)| w * x.powf(s))
                    .sum();
                inner.powf(1.0 / s - 1.0) * a * q.powf(s - 1.0)
            }
        }
    }

    /// Marginal of the separable transform: `a_n Q_n^{s-1}`.
    pub fn separable_marginal(&self, n: usize, q: f64) -> f64 {
        self.weights[n] * q.powf(self.separable_exponent() - 1.0)
    }

    /// Leading principal minors (orders 2..=n+1) of the bordered Hessian of
    /// the separable transform at `bundle`. Strict quasiconcavity requires
    /// minor `k` (bordering a `k-1` block) to have sign `(-1)^(k-1)`.
    pub fn bordered_minors(&self, bundle: &[f64]) -> Vec<f64> {
        let s = self.separable_exponent();
        let n = bundle.len();
        let grad: Vec<f64> = (0..n).map(|i| self.separable_marginal(i, bundle[i])).collect();
        let diag: Vec<f64> = (0..n)
            .map(|i| self.weights[i] * (s - 1.0) * bundle[i].powf(s - 2.0))
            .collect();
        (1..=n)
            .map(|k| {
                let mut m = vec![vec![0.0; k + 1]; k + 1];
                for i in 0..k {
                    m[0][i + 1] = grad[i];
                    m[i + 1][0] = grad[i];
                    m[i + 1][i + 1] = diag[i];
                }
                determinant(m)
            })
            .collect()
    }

    pub fn is_strictly_quasiconcave_at(&self, bundle: &[f64]) -> bool {
        let positive = (0..bundle.len()).all(|n| self.marginal_utility(bundle, n) > 0.0);
        positive
            && self
                .bordered_minors(bundle)
                .iter()
                .enumerate()
                .all(|(i, d)| if i % 2 == 0 { *d < 0.0 } else { *d > 0.0 })
    }
}

fn determinant(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|a, b| m[*a][col].abs().total_cmp(&m[*b][col].abs()))
            .unwrap();
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            let pivot = m[col].clone();
            for (dst, src) in m[row].iter_mut().zip(&pivot).skip(col) {
                *dst -= factor * src;
            }
        }
    }
    det
}

/// Identifies a good in either list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoodRef {
    Energy(usize),
    NonEnergy(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    /// Multiplier `< 1` on the good's input requirements.
    EfficiencyShift { good: GoodRef, multiplier: f64 },
    /// Multiplier `> 1`, exogenous deterioration.
    MeecShift { good: GoodRef, multiplier: f64 },
    /// Index into the scenario's mover catalogue.
    NewPrimeMover(usize),
    /// Index into the scenario's energy-good catalogue.
    NewEnergyGood(usize),
    EndowmentShock { mover: usize, delta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub period: u32,
    pub kind: EventKind,
}

/// Everything that changes from one period to the next.
#[derive(Debug, Clone, PartialEq)]
pub struct EconomyState {
    pub period: u32,
    pub stocks: Vec<f64>,
    pub mover_active: Vec<bool>,
    pub energy_active: Vec<bool>,
    pub cumulative_extraction: Vec<f64>,
    /// Requirement multipliers from efficiency/MEEC events, per energy good.
    pub energy_efficiency: Vec<f64>,
    pub non_energy_efficiency: Vec<f64>,
}

impl EconomyState {
    /// Period-0 state: endowments as stocks, catalogue entries introduced by
    /// events left inactive.
    pub fn initial(config: &ScenarioConfig) -> Self {
        let mut state = EconomyState {
            period: 0,
            stocks: config.movers.iter().map(|m| m.endowment).collect(),
            mover_active: vec![false; config.movers.len()],
            energy_active: vec![false; config.energy_goods.len()],
            cumulative_extraction: vec![0.0; config.energy_goods.len()],
            energy_efficiency: vec![1.0; config.energy_goods.len()],
            non_energy_efficiency: vec![1.0; config.non_energy_goods.len()],
        };
        state.activate_scheduled(config);
        state
    }

    /// Activates catalogue entries whose `intro_period` has arrived and that
    /// are not introduced by an event.
    pub fn activate_scheduled(&mut self, config: &ScenarioConfig) {
        for (i, m) in config.movers.iter().enumerate() {
            if !config.mover_from_event[i] && m.intro_period <= self.period {
                self.mover_active[i] = true;
            }
        }
        for (i, g) in config.energy_goods.iter().enumerate() {
            if !config.energy_from_event[i] && g.intro_period <= self.period {
                self.energy_active[i] = true;
            }
        }
    }

    /// Stock actually available to the solvers (zero for inactive types).
    pub fn available(&self, mover: usize) -> f64 {
        if self.mover_active[mover] {
            self.stocks[mover].max(0.0)
        } else {
            0.0
        }
    }

    /// Multiplier `(1 + cum/S)^θ` from resource depletion; 1 for renewables.
    pub fn depletion_multiplier(&self, good: &EnergyGood, index: usize) -> f64 {
        match good.pes_stock {
            Some(stock) if good.depletion_exponent > 0.0 => {
                (1.0 + self.cumulative_extraction[index] / stock).powf(good.depletion_exponent)
            }
            _ => 1.0,
        }
    }

    /// Combined requirement multiplier for energy good `index`.
    pub fn energy_multiplier(&self, good: &EnergyGood, index: usize) -> f64 {
        self.energy_efficiency[index] * self.depletion_multiplier(good, index)
    }

    /// Output still extractable this period; `None` when unbounded.
    pub fn remaining_resource(&self, good: &EnergyGood, index: usize) -> Option<f64> {
        good.pes_stock
            .map(|s| (s - self.cumulative_extraction[index]).max(0.0))
    }
}

/// Aggregate power `P = Σ p_l x_l` over active movers, watts.
pub fn aggregate_power(state: &EconomyState, movers: &[PrimeMoverType]) -> f64 {
    movers
        .iter()
        .enumerate()
        .filter(|(i, _)| state.mover_active[*i])
        .map(|(i, m)| m.power_rate * state.stocks[i])
        .sum()
}
