//! Reference scenarios with closed-form answers, shared by tests, benches
//! and the acceptance suite.

use serde_json::json;

use crate::model::{load_scenario, ScenarioConfig};

/// Single energy good `δ = 10`, Cobb-Douglas `A = 1, β = 0.5`, one mover
/// with `ω = ε = 1`, and one non-energy good with a unit constant MEEC.
/// Minimised cost is `C(Q) = Q²`, so unconstrained output is 5 with surplus
/// 25; the usability constraint binds below an endowment of 50, where
/// `φ* = 1 - x̄/50`.
pub fn cd1_document(endowment: f64, accum_rate: f64, horizon: u32) -> serde_json::Value {
    json!({
        "period_length": 1.0,
        "prime_movers": [{
            "id": "worker",
            "power_rate": 1.0,
            "depreciation": 0.1,
            "avg_embodied": 0.0,
            "endowment": endowment,
            "max_accum_rate": accum_rate
        }],
        "energy_goods": [{
            "id": "grain",
            "energy_content": 10.0,
            "technology": {"kind": "cobb_douglas", "scale": 1.0, "exponents": {"worker": 0.5}}
        }],
        "non_energy_goods": [{
            "id": "cloth",
            "utility_weight": 1.0,
            "technology": {"kind": "fixed_proportions", "requirements": {"worker": 1.0}, "c0": 1.0}
        }],
        "preferences": {"form": "cobb_douglas"},
        "horizon": horizon,
        "solver": {"seed": 42}
    })
}

/// CD-1 with an abundant endowment (100).
pub fn cd1() -> ScenarioConfig {
    load_scenario(&cd1_document(100.0, 0.2, 500).to_string()).expect("fixture is valid")
}

/// CD-1 with `x̄ = 1` and `r = 0.2`: the growth reference run.
pub fn cd1_scarce() -> ScenarioConfig {
    load_scenario(&cd1_document(1.0, 0.2, 500).to_string()).expect("fixture is valid")
}

/// CD-1 with an arbitrary endowment.
pub fn cd1_with_endowment(endowment: f64) -> ScenarioConfig {
    load_scenario(&cd1_document(endowment, 0.2, 500).to_string()).expect("fixture is valid")
}
