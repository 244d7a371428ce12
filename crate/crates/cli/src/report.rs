//! CSV renderings of solver results. Every number goes through `g12`.

use egl_core::demand::ConsumerOutcome;
use egl_core::embodied::MeecPoint;
use egl_core::growth::{SimulationError, Trajectory};
use egl_core::model::ScenarioConfig;
use egl_core::statics::SignTable;
use egl_core::surplus::{Binding, EnergySideSolution, GoodBinding};

use crate::number::{g12, opt};

/// Header, rows and optional `#` comment lines before and after.
pub struct Table {
    pub before: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub after: Vec<String>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            before: Vec::new(),
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            after: Vec::new(),
        }
    }

    pub fn render(&self) -> String {
        let mut buf: Vec<u8> = Vec::new();
        for c in &self.before {
            buf.extend_from_slice(format!("# {c}\n").as_bytes());
        }
        {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(&mut buf);
            w.write_record(&self.header).expect("in-memory write");
            for r in &self.rows {
                w.write_record(r).expect("in-memory write");
            }
            w.flush().expect("in-memory flush");
        }
        for c in &self.after {
            buf.extend_from_slice(format!("# {c}\n").as_bytes());
        }
        String::from_utf8(buf).expect("CSV fields are UTF-8")
    }
}

fn binding_name(config: &ScenarioConfig, b: &GoodBinding) -> String {
    match b {
        GoodBinding::None => "none".into(),
        GoodBinding::Usability => "usability".into(),
        GoodBinding::Endowment(l) => format!("endowment:{}", config.movers[*l].id),
        GoodBinding::Resource => "resource".into(),
        GoodBinding::Unproducible => "unproducible".into(),
    }
}

pub fn binding_label(config: &ScenarioConfig, b: &Binding) -> String {
    match b {
        Binding::None => "none".into(),
        Binding::Usability => "usability".into(),
        Binding::Endowment(l) => format!("endowment:{}", config.movers[*l].id),
    }
}

pub fn energy_side(config: &ScenarioConfig, sol: &EnergySideSolution) -> Table {
    let mut t = Table::new(["good", "Q_star", "gamma", "alpha", "E_good", "meroi", "binding_constraint"]);
    for g in &sol.goods {
        t.rows.push(vec![
            g.id.clone(),
            g12(g.output),
            g12(g.marginal_embodied),
            g12(g.marginal_surplus),
            g12(g.surplus),
            opt(g.meroi),
            binding_name(config, &g.binding),
        ]);
    }
    t
}

pub fn energy_scalars(config: &ScenarioConfig, sol: &EnergySideSolution) -> Table {
    let mut t = Table::new(["phi", "E_total", "I", "G"]);
    t.rows.push(vec![
        g12(sol.phi),
        g12(sol.usable_surplus),
        g12(sol.gross_income),
        g12(sol.gross_expenditure),
    ]);
    t.after.push(format!("binding {}", binding_label(config, &sol.binding)));
    for (l, m) in config.movers.iter().enumerate() {
        t.after.push(format!(
            "mover {} phi_l={} energy_employment={} remaining={}",
            m.id,
            g12(sol.mover_surplus[l]),
            g12(sol.energy_employment[l]),
            g12(sol.remaining_endowment[l])
        ));
    }
    t
}

pub fn demand(config: &ScenarioConfig, outcome: &ConsumerOutcome) -> Table {
    let d = &outcome.demand;
    let mut t = Table::new(["good", "Q_star", "gamma_avg", "gamma_marginal", "energy_spent"]);
    for (n, g) in config.non_energy_goods.iter().enumerate() {
        t.rows.push(vec![
            g.id.clone(),
            g12(d.bundle[n]),
            g12(d.average[n]),
            g12(d.marginal[n]),
            g12(d.spent[n]),
        ]);
    }
    t
}

pub fn demand_scalars(config: &ScenarioConfig, outcome: &ConsumerOutcome) -> Table {
    let d = &outcome.demand;
    let mut t = Table::new(["lambda", "E", "budget_residual", "usability_slack"]);
    t.rows.push(vec![
        opt(d.lambda),
        g12(d.energy),
        g12(d.budget_residual),
        g12(outcome.usability_slack),
    ]);
    if !outcome.usability_ok() {
        t.after.push("usability slack negative: surplus exceeds direct energy of support movers".into());
    }
    for (l, m) in config.movers.iter().enumerate() {
        t.after.push(format!("support {} employment={}", m.id, g12(outcome.support.totals[l])));
    }
    t
}

pub fn meec(points: &[MeecPoint]) -> Table {
    let mut t = Table::new(["Q", "gamma", "gamma_avg", "G", "eta"]);
    for p in points {
        t.rows.push(vec![
            g12(p.quantity),
            g12(p.marginal),
            g12(p.average),
            g12(p.cumulative),
            g12(p.elasticity),
        ]);
    }
    t
}

pub fn trajectory(traj: &Trajectory, failure: Option<&SimulationError>) -> Table {
    let mut header: Vec<String> = ["t", "phi", "E_star", "P", "lambda"].map(String::from).to_vec();
    for id in &traj.good_ids {
        header.extend([format!("Q_{id}"), format!("alpha_{id}"), format!("meroi_{id}")]);
    }
    for id in &traj.mover_ids {
        header.extend([format!("x_{id}"), format!("phi_l_{id}")]);
    }
    let mut t = Table::new(header);
    for r in &traj.records {
        let mut row = vec![
            r.period.to_string(),
            g12(r.phi),
            g12(r.usable_surplus),
            g12(r.power),
            opt(r.lambda),
        ];
        for g in &r.goods {
            row.extend([opt(g.output), opt(g.marginal_surplus), opt(g.meroi)]);
        }
        for (x, p) in r.stocks.iter().zip(&r.mover_surplus) {
            row.extend([g12(*x), g12(*p)]);
        }
        t.rows.push(row);
    }
    t.after.push(format!("periods {}", traj.records.len()));
    match &traj.steady_state {
        Some(ss) => t.after.push(format!(
            "steady_state period={} phi={} max_accumulation={} relative_accumulation={} max_alpha_ratio={}",
            ss.period,
            g12(ss.phi),
            g12(ss.max_accumulation),
            g12(relative_accumulation(traj, ss.period)),
            g12(ss.max_alpha_ratio)
        )),
        None => t.after.push("steady_state none".into()),
    }
    if let Some(last) = traj.records.last() {
        for (id, c) in traj.good_ids.iter().zip(&last.cumulative_extraction) {
            t.after.push(format!("cumulative_extraction {id}={}", g12(*c)));
        }
    }
    if let Some(e) = failure {
        t.after.push(format!("failed period={} error={}", e.period, e.source));
    }
    t
}

/// Accumulation in period `t` over the largest stock then.
fn relative_accumulation(traj: &Trajectory, t: u32) -> f64 {
    traj.records
        .iter()
        .find(|r| r.period == t)
        .map(|r| {
            let max_stock = r.stocks.iter().cloned().fold(0.0, f64::max);
            if max_stock > 0.0 {
                r.max_accumulation / max_stock
            } else {
                0.0
            }
        })
        .unwrap_or(0.0)
}

pub fn sign_table(tables: &[SignTable], preamble: Vec<String>) -> Table {
    let mut t = Table::new(["proposition", "trials", "confirmed", "failed", "min_derivative", "max_derivative"]);
    t.before = preamble;
    for s in tables {
        t.rows.push(vec![
            s.proposition.id().to_string(),
            s.trials.to_string(),
            s.confirmed.to_string(),
            s.failures.len().to_string(),
            opt(s.min_derivative),
            opt(s.max_derivative),
        ]);
        if !s.applicable {
            t.after.push(format!("proposition {} not applicable: no second non-energy good", s.proposition.id()));
        }
        if !s.discarded.is_empty() {
            t.after.push(format!("proposition {} discarded {}", s.proposition.id(), s.discarded.len()));
        }
    }
    t
}

pub fn failures(tables: &[SignTable]) -> Table {
    let mut t = Table::new(["proposition", "trial", "seed", "digest", "derivative"]);
    for s in tables {
        for f in &s.failures {
            t.rows.push(vec![
                s.proposition.id().to_string(),
                f.trial.to_string(),
                f.seed.to_string(),
                f.digest.clone(),
                g12(f.derivative),
            ]);
        }
    }
    t
}

pub fn discarded(tables: &[SignTable]) -> Table {
    let mut t = Table::new(["proposition", "trial", "seed", "reason"]);
    for s in tables {
        for d in &s.discarded {
            t.rows.push(vec![
                s.proposition.id().to_string(),
                d.trial.to_string(),
                d.seed.to_string(),
                d.reason.clone(),
            ]);
        }
    }
    t
}
