use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{
    EnergyGood, Event, EventKind, GoodRef, NonEnergyGood, PreferenceForm, Preferences,
    PrimeMoverType, RequirementProfile, Technology,
};
use crate::error::ConfigError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimeMoverDoc {
    pub id: String,
    pub power_rate: f64,
    pub depreciation: f64,
    #[serde(default)]
    pub avg_embodied: f64,
    pub endowment: f64,
    #[serde(default)]
    pub max_accum_rate: f64,
    #[serde(default)]
    pub intro_period: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TechnologyDoc {
    CobbDouglas {
        scale: f64,
        exponents: BTreeMap<String, f64>,
    },
    FixedProportions {
        requirements: BTreeMap<String, f64>,
        c0: f64,
        #[serde(default)]
        c1: f64,
        #[serde(default = "one")]
        tau: f64,
        #[serde(default)]
        c2: f64,
        #[serde(default = "one")]
        q_s: f64,
        #[serde(default = "one")]
        rho: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyGoodDoc {
    pub id: String,
    pub energy_content: f64,
    pub technology: TechnologyDoc,
    #[serde(default)]
    pub pes_stock: Option<f64>,
    #[serde(default)]
    pub depletion_exponent: f64,
    #[serde(default)]
    pub intro_period: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonEnergyGoodDoc {
    pub id: String,
    pub technology: TechnologyDoc,
    pub utility_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum PreferencesDoc {
    CobbDouglas,
    Ces { sigma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventDoc {
    EfficiencyShift {
        period: u32,
        good: String,
        multiplier: f64,
    },
    MeecShift {
        period: u32,
        good: String,
        multiplier: f64,
    },
    NewPrimeMover {
        period: u32,
        mover: PrimeMoverDoc,
    },
    NewEnergyGood {
        period: u32,
        good: EnergyGoodDoc,
    },
    EndowmentShock {
        period: u32,
        mover: String,
        delta: f64,
    },
}

impl EventDoc {
    pub fn period(&self) -> u32 {
        match self {
            EventDoc::EfficiencyShift { period, .. }
            | EventDoc::MeecShift { period, .. }
            | EventDoc::NewPrimeMover { period, .. }
            | EventDoc::NewEnergyGood { period, .. }
            | EventDoc::EndowmentShock { period, .. } => *period,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TolerancesDoc {
    pub root: f64,
    pub phi: f64,
    pub foc: f64,
    pub steady_state: f64,
    pub alpha: f64,
}

impl Default for TolerancesDoc {
    fn default() -> Self {
        TolerancesDoc {
            root: 1e-10,
            phi: 1e-10,
            foc: 1e-6,
            steady_state: 1e-8,
            alpha: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverDoc {
    pub tolerances: TolerancesDoc,
    pub seed: u64,
    pub substeps: u32,
}

impl Default for SolverDoc {
    fn default() -> Self {
        SolverDoc {
            tolerances: TolerancesDoc::default(),
            seed: 0,
            substeps: 1,
        }
    }
}

/// Scale that makes the accumulation rule's `tanh` argument dimensionless.
/// Written as `"direct_energy"` or a positive number of joules.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "NormalizationRepr", into = "NormalizationRepr")]
pub enum AccumNormalization {
    /// Each mover's own direct energy `ε_l`.
    #[default]
    DirectEnergy,
    /// A fixed reference energy, joules.
    Fixed(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NormalizationRepr {
    Tag(String),
    Value(f64),
}

impl TryFrom<NormalizationRepr> for AccumNormalization {
    type Error = String;

    fn try_from(repr: NormalizationRepr) -> Result<Self, Self::Error> {
        match repr {
            NormalizationRepr::Tag(t) if t == "direct_energy" => Ok(AccumNormalization::DirectEnergy),
            NormalizationRepr::Tag(t) => Err(format!(
                "expected \"direct_energy\" or a number, got \"{t}\""
            )),
            NormalizationRepr::Value(v) => Ok(AccumNormalization::Fixed(v)),
        }
    }
}

impl From<AccumNormalization> for NormalizationRepr {
    fn from(n: AccumNormalization) -> Self {
        match n {
            AccumNormalization::DirectEnergy => NormalizationRepr::Tag("direct_energy".into()),
            AccumNormalization::Fixed(v) => NormalizationRepr::Value(v),
        }
    }
}

/// The on-disk scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub period_length: f64,
    pub prime_movers: Vec<PrimeMoverDoc>,
    pub energy_goods: Vec<EnergyGoodDoc>,
    pub non_energy_goods: Vec<NonEnergyGoodDoc>,
    pub preferences: PreferencesDoc,
    #[serde(default)]
    pub events: Vec<EventDoc>,
    #[serde(default)]
    pub solver: SolverDoc,
    #[serde(default)]
    pub horizon: u32,
    #[serde(default)]
    pub accum_normalization: AccumNormalization,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub root_tol: f64,
    pub phi_tol: f64,
    pub foc_tol: f64,
    pub steady_state_tol: f64,
    pub alpha_tol: f64,
    pub substeps: u32,
    pub seed: u64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings::from(&SolverDoc::default())
    }
}

impl From<&SolverDoc> for SolverSettings {
    fn from(doc: &SolverDoc) -> Self {
        SolverSettings {
            root_tol: doc.tolerances.root,
            phi_tol: doc.tolerances.phi,
            foc_tol: doc.tolerances.foc,
            steady_state_tol: doc.tolerances.steady_state,
            alpha_tol: doc.tolerances.alpha,
            substeps: doc.substeps,
            seed: doc.seed,
        }
    }
}

/// A validated scenario. Movers and energy goods introduced by events are
/// part of the catalogues (flagged), so indices stay stable for a whole run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub period_length: f64,
    pub movers: Vec<PrimeMoverType>,
    pub energy_goods: Vec<EnergyGood>,
    pub non_energy_goods: Vec<NonEnergyGood>,
    pub preferences: Preferences,
    pub events: Vec<Event>,
    pub solver: SolverSettings,
    pub horizon: u32,
    pub accum_normalization: AccumNormalization,
    pub mover_from_event: Vec<bool>,
    pub energy_from_event: Vec<bool>,
    doc: ScenarioDoc,
}

/// Parses and validates a scenario document.
pub fn load_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let doc: ScenarioDoc = serde_json::from_str(text)?;
    ScenarioConfig::from_doc(doc)
}

fn finite(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::invalid(field, "must be a finite number"))
    }
}

fn positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    finite(field, v)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::invalid(field, format!("must be > 0, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<f64, ConfigError> {
    finite(field, v)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::invalid(field, format!("must be >= 0, got {v}")))
    }
}

fn mover_from_doc(
    doc: &PrimeMoverDoc,
    path: &str,
    period_length: f64,
) -> Result<PrimeMoverType, ConfigError> {
    positive(&format!("{path}.power_rate"), doc.power_rate)?;
    let d = finite(&format!("{path}.depreciation"), doc.depreciation)?;
    if !(d > 0.0 && d < 1.0) {
        return Err(ConfigError::invalid(
            format!("{path}.depreciation"),
            format!("d_l out of (0,1): {d}"),
        ));
    }
    non_negative(&format!("{path}.avg_embodied"), doc.avg_embodied)?;
    non_negative(&format!("{path}.endowment"), doc.endowment)?;
    non_negative(&format!("{path}.max_accum_rate"), doc.max_accum_rate)?;
    Ok(PrimeMoverType::new(
        doc.id.clone(),
        doc.power_rate,
        period_length,
        doc.depreciation,
        doc.avg_embodied,
        doc.endowment,
    )
    .with_accumulation(doc.max_accum_rate)
    .with_intro_period(doc.intro_period))
}

fn resolve_coefficients(
    coefs: &BTreeMap<String, f64>,
    path: &str,
    mover_index: &HashMap<String, usize>,
) -> Result<Vec<(usize, f64)>, ConfigError> {
    let mut out = Vec::with_capacity(coefs.len());
    for (id, v) in coefs {
        let field = format!("{path}.{id}");
        non_negative(&field, *v)?;
        let idx = mover_index
            .get(id)
            .ok_or_else(|| ConfigError::invalid(&field, format!("unknown prime mover `{id}`")))?;
        out.push((*idx, *v));
    }
    if !out.iter().any(|(_, v)| *v > 0.0) {
        return Err(ConfigError::invalid(
            path,
            "at least one coefficient must be positive",
        ));
    }
    Ok(out)
}

fn technology_from_doc(
    doc: &TechnologyDoc,
    path: &str,
    mover_index: &HashMap<String, usize>,
) -> Result<Technology, ConfigError> {
    match doc {
        TechnologyDoc::CobbDouglas { scale, exponents } => {
            positive(&format!("{path}.scale"), *scale)?;
            let ex = resolve_coefficients(exponents, &format!("{path}.exponents"), mover_index)?;
            let b: f64 = ex.iter().map(|(_, b)| b).sum();
            if b >= 1.0 {
                return Err(ConfigError::invalid(
                    format!("{path}.exponents"),
                    format!("returns to scale must be < 1, got {b}"),
                ));
            }
            Ok(Technology::cobb_douglas(*scale, ex))
        }
        TechnologyDoc::FixedProportions {
            requirements,
            c0,
            c1,
            tau,
            c2,
            q_s,
            rho,
        } => {
            let req =
                resolve_coefficients(requirements, &format!("{path}.requirements"), mover_index)?;
            positive(&format!("{path}.c0"), *c0)?;
            non_negative(&format!("{path}.c1"), *c1)?;
            positive(&format!("{path}.tau"), *tau)?;
            non_negative(&format!("{path}.c2"), *c2)?;
            positive(&format!("{path}.q_s"), *q_s)?;
            finite(&format!("{path}.rho"), *rho)?;
            if *rho < 1.0 {
                return Err(ConfigError::invalid(
                    format!("{path}.rho"),
                    format!("must be >= 1, got {rho}"),
                ));
            }
            Ok(Technology::fixed(
                req,
                RequirementProfile {
                    c0: *c0,
                    c1: *c1,
                    tau: *tau,
                    c2: *c2,
                    q_s: *q_s,
                    rho: *rho,
                },
            ))
        }
    }
}

fn energy_good_from_doc(
    doc: &EnergyGoodDoc,
    path: &str,
    mover_index: &HashMap<String, usize>,
) -> Result<EnergyGood, ConfigError> {
    positive(&format!("{path}.energy_content"), doc.energy_content)?;
    let technology = technology_from_doc(&doc.technology, &format!("{path}.technology"), mover_index)?;
    if let Some(s) = doc.pes_stock {
        positive(&format!("{path}.pes_stock"), s)?;
    }
    non_negative(&format!("{path}.depletion_exponent"), doc.depletion_exponent)?;
    if doc.pes_stock.is_none() && doc.depletion_exponent != 0.0 {
        return Err(ConfigError::invalid(
            format!("{path}.depletion_exponent"),
            "must be 0 for an unbounded (renewable) source",
        ));
    }
    Ok(EnergyGood {
        id: doc.id.clone(),
        energy_content: doc.energy_content,
        technology,
        pes_stock: doc.pes_stock,
        depletion_exponent: doc.depletion_exponent,
        intro_period: doc.intro_period,
    })
}

impl ScenarioConfig {
    pub fn from_doc(doc: ScenarioDoc) -> Result<Self, ConfigError> {
        let dt = positive("period_length", doc.period_length)?;

        // Mover catalogue: declared movers, then those introduced by events.
        let mut mover_docs: Vec<(String, &PrimeMoverDoc, bool)> = doc
            .prime_movers
            .iter()
            .enumerate()
            .map(|(i, m)| (format!("prime_movers[{i}]"), m, false))
            .collect();
        for (i, ev) in doc.events.iter().enumerate() {
            if let EventDoc::NewPrimeMover { mover, .. } = ev {
                mover_docs.push((format!("events[{i}].mover"), mover, true));
            }
        }
        let mut mover_index = HashMap::new();
        let mut movers = Vec::new();
        let mut mover_from_event = Vec::new();
        for (path, m, from_event) in &mover_docs {
            if mover_index.insert(m.id.clone(), movers.len()).is_some() {
                return Err(ConfigError::invalid(
                    format!("{path}.id"),
                    format!("duplicate prime mover id `{}`", m.id),
                ));
            }
            movers.push(mover_from_doc(m, path, dt)?);
            mover_from_event.push(*from_event);
        }

        let mut good_ids: HashMap<String, GoodRef> = HashMap::new();
        let mut energy_goods = Vec::new();
        let mut energy_from_event = Vec::new();
        let mut energy_docs: Vec<(String, &EnergyGoodDoc, bool)> = doc
            .energy_goods
            .iter()
            .enumerate()
            .map(|(i, g)| (format!("energy_goods[{i}]"), g, false))
            .collect();
        for (i, ev) in doc.events.iter().enumerate() {
            if let EventDoc::NewEnergyGood { good, .. } = ev {
                energy_docs.push((format!("events[{i}].good"), good, true));
            }
        }
        for (path, g, from_event) in &energy_docs {
            if good_ids
                .insert(g.id.clone(), GoodRef::Energy(energy_goods.len()))
                .is_some()
            {
                return Err(ConfigError::invalid(
                    format!("{path}.id"),
                    format!("duplicate good id `{}`", g.id),
                ));
            }
            energy_goods.push(energy_good_from_doc(g, path, &mover_index)?);
            energy_from_event.push(*from_event);
        }

        let mut non_energy_goods = Vec::new();
        for (i, g) in doc.non_energy_goods.iter().enumerate() {
            let path = format!("non_energy_goods[{i}]");
            if good_ids
                .insert(g.id.clone(), GoodRef::NonEnergy(non_energy_goods.len()))
                .is_some()
            {
                return Err(ConfigError::invalid(
                    format!("{path}.id"),
                    format!("duplicate good id `{}`", g.id),
                ));
            }
            positive(&format!("{path}.utility_weight"), g.utility_weight)?;
            non_energy_goods.push(NonEnergyGood {
                id: g.id.clone(),
                technology: technology_from_doc(
                    &g.technology,
                    &format!("{path}.technology"),
                    &mover_index,
                )?,
                utility_weight: g.utility_weight,
            });
        }

        let weights = non_energy_goods.iter().map(|g| g.utility_weight).collect();
        let preferences = match doc.preferences {
            PreferencesDoc::CobbDouglas => Preferences::cobb_douglas(weights),
            PreferencesDoc::Ces { sigma } => {
                positive("preferences.sigma", sigma)?;
                if sigma == 1.0 {
                    return Err(ConfigError::invalid(
                        "preferences.sigma",
                        "sigma = 1 is Cobb-Douglas; use form \"cobb_douglas\"",
                    ));
                }
                Preferences {
                    form: PreferenceForm::Ces { sigma },
                    weights,
                }
            }
        };

        let mut events = Vec::new();
        let mut next_new_mover = doc.prime_movers.len();
        let mut next_new_good = doc.energy_goods.len();
        for (i, ev) in doc.events.iter().enumerate() {
            let path = format!("events[{i}]");
            let kind = match ev {
                EventDoc::EfficiencyShift {
                    good, multiplier, ..
                } => {
                    let m = positive(&format!("{path}.multiplier"), *multiplier)?;
                    if m >= 1.0 {
                        return Err(ConfigError::invalid(
                            format!("{path}.multiplier"),
                            format!("efficiency shift multiplier must be < 1, got {m}"),
                        ));
                    }
                    EventKind::EfficiencyShift {
                        good: *good_ids.get(good).ok_or_else(|| {
                            ConfigError::invalid(format!("{path}.good"), format!("unknown good `{good}`"))
                        })?,
                        multiplier: m,
                    }
                }
                EventDoc::MeecShift {
                    good, multiplier, ..
                } => {
                    let m = positive(&format!("{path}.multiplier"), *multiplier)?;
                    if m <= 1.0 {
                        return Err(ConfigError::invalid(
                            format!("{path}.multiplier"),
                            format!("MEEC shift multiplier must be > 1, got {m}"),
                        ));
                    }
                    EventKind::MeecShift {
                        good: *good_ids.get(good).ok_or_else(|| {
                            ConfigError::invalid(format!("{path}.good"), format!("unknown good `{good}`"))
                        })?,
                        multiplier: m,
                    }
                }
                EventDoc::NewPrimeMover { period, .. } => {
                    movers[next_new_mover].intro_period = *period;
                    next_new_mover += 1;
                    EventKind::NewPrimeMover(next_new_mover - 1)
                }
                EventDoc::NewEnergyGood { period, .. } => {
                    energy_goods[next_new_good].intro_period = *period;
                    next_new_good += 1;
                    EventKind::NewEnergyGood(next_new_good - 1)
                }
                EventDoc::EndowmentShock { mover, delta, .. } => {
                    finite(&format!("{path}.delta"), *delta)?;
                    EventKind::EndowmentShock {
                        mover: *mover_index.get(mover).ok_or_else(|| {
                            ConfigError::invalid(
                                format!("{path}.mover"),
                                format!("unknown prime mover `{mover}`"),
                            )
                        })?,
                        delta: *delta,
                    }
                }
            };
            events.push(Event {
                period: ev.period(),
                kind,
            });
        }
        // stable: events sharing a period keep document order
        events.sort_by_key(|e| e.period);

        if !energy_goods
            .iter()
            .zip(&energy_from_event)
            .any(|(g, ev)| !ev && g.intro_period == 0)
        {
            return Err(ConfigError::invalid(
                "energy_goods",
                "at least one energy good must be active at t = 0",
            ));
        }
        if non_energy_goods.is_empty() {
            return Err(ConfigError::invalid(
                "non_energy_goods",
                "at least one non-energy good is required",
            ));
        }

        let s = &doc.solver;
        positive("solver.tolerances.root", s.tolerances.root)?;
        positive("solver.tolerances.phi", s.tolerances.phi)?;
        positive("solver.tolerances.foc", s.tolerances.foc)?;
        positive("solver.tolerances.steady_state", s.tolerances.steady_state)?;
        positive("solver.tolerances.alpha", s.tolerances.alpha)?;
        if s.substeps == 0 {
            return Err(ConfigError::invalid("solver.substeps", "must be >= 1"));
        }
        if let AccumNormalization::Fixed(v) = doc.accum_normalization {
            positive("accum_normalization", v)?;
        }

        Ok(ScenarioConfig {
            period_length: dt,
            movers,
            energy_goods,
            non_energy_goods,
            preferences,
            events,
            solver: SolverSettings::from(&doc.solver),
            horizon: doc.horizon,
            accum_normalization: doc.accum_normalization,
            mover_from_event,
            energy_from_event,
            doc,
        })
    }

    pub fn doc(&self) -> &ScenarioDoc {
        &self.doc
    }

    /// Pretty JSON of the (default-filled) document.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.doc).expect("scenario documents always serialize")
    }

    /// SHA-256 over the canonical (key-sorted, compact) form of a JSON
    /// document; independent of key order and whitespace.
    pub fn digest_of(text: &str) -> Result<String, ConfigError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        Ok(canonical_digest(&value))
    }

    pub fn digest(&self) -> String {
        let value = serde_json::to_value(&self.doc).expect("scenario documents always serialize");
        canonical_digest(&value)
    }

    pub fn mover_index(&self, id: &str) -> Option<usize> {
        self.movers.iter().position(|m| m.id == id)
    }

    pub fn energy_index(&self, id: &str) -> Option<usize> {
        self.energy_goods.iter().position(|g| g.id == id)
    }

    pub fn non_energy_index(&self, id: &str) -> Option<usize> {
        self.non_energy_goods.iter().position(|g| g.id == id)
    }
}

/// `serde_json::Value` objects are `BTreeMap`-backed, so compact
/// serialization is already key-sorted.
pub(crate) fn canonical_digest(value: &serde_json::Value) -> String {
    use sha2::{Digest, Sha256};
    let bytes = serde_json::to_vec(value).expect("JSON values always serialize");
    hex::encode(Sha256::digest(&bytes))
}
