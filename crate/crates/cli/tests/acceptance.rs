//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//! Expected values come from closed forms, hand-written quadrature and
//! brute-force search, never from the solver under test.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use egl_core::embodied::EmbodiedCurve;
use egl_core::growth::{apply_event, simulate, step_accumulation, Trajectory};
use egl_core::model::{
    load_scenario, AccumNormalization, EconomyState, PrimeMoverType, RequirementProfile, ScenarioConfig,
    Technology,
};
use egl_core::par::{map_range, Execution};
use egl_core::statics::{
    proposition_suite, reproduce, trial_seed, PreferenceFamily, ScenarioFamily, SuiteOptions,
};
use egl_core::surplus::{meroi, EnergyProblem};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario(name: &str) -> ScenarioConfig {
    let text = fs::read_to_string(repo().join("scenarios").join(name)).expect("scenario file");
    load_scenario(&text).expect("valid scenario")
}

fn solve(cfg: &ScenarioConfig) -> egl_core::surplus::EnergySideSolution {
    EnergyProblem::new(cfg, &EconomyState::initial(cfg))
        .and_then(|p| p.solve())
        .expect("energy side solves")
}

/// `ω_l` from the raw mover fields.
fn omega(m: &PrimeMoverType, period: f64) -> f64 {
    m.power_rate * period + m.depreciation * m.avg_embodied
}

/// Cobb-Douglas cost function `min Σ w_l x_l` s.t. `A Π x_l^{β_l} = Q`.
fn cd_cost(scale: f64, betas: &[f64], prices: &[f64], q: f64) -> f64 {
    let b: f64 = betas.iter().sum();
    let k: f64 = betas.iter().zip(prices).map(|(beta, w)| (w / beta).powf(beta / b)).product();
    b * (q / scale).powf(1.0 / b) * k
}

fn cd_params(cfg: &ScenarioConfig, good: usize) -> (f64, Vec<usize>, Vec<f64>) {
    match &cfg.energy_goods[good].technology {
        Technology::CobbDouglas { scale, exponents } => (
            *scale,
            exponents.iter().map(|(l, _)| *l).collect(),
            exponents.iter().map(|(_, b)| *b).collect(),
        ),
        Technology::FixedProportions { .. } => panic!("energy goods here are Cobb-Douglas"),
    }
}

/// `(G, γ)` of a Cobb-Douglas energy good at `q`.
fn cd_oracle(cfg: &ScenarioConfig, good: usize, q: f64) -> (f64, f64) {
    let (scale, movers, betas) = cd_params(cfg, good);
    let prices: Vec<f64> = movers.iter().map(|l| omega(&cfg.movers[*l], cfg.period_length)).collect();
    let b: f64 = betas.iter().sum();
    let g = cd_cost(scale, &betas, &prices, q);
    (g, if q > 0.0 { g / (b * q) } else { 0.0 })
}

/// `∫_0^q f` with `x = q u^8` to tame the power law at zero, composite
/// Simpson on 4000 panels.
fn oracle_integral(f: impl Fn(f64) -> f64, q: f64) -> f64 {
    let g = |u: f64| if u == 0.0 { 0.0 } else { f(q * u.powi(8)) * q * 8.0 * u.powi(7) };
    let n = 4000;
    let h = 1.0 / n as f64;
    let mut s = g(0.0) + g(1.0);
    for i in 1..n {
        s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn cd_family() -> ScenarioFamily {
    ScenarioFamily {
        preferences: PreferenceFamily::CobbDouglas,
        ..ScenarioFamily::default()
    }
}

fn closed_form_reference() -> Check {
    let start = Instant::now();
    let cfg = scenario("cd1.json");
    let sol = solve(&cfg);
    let elapsed = start.elapsed();
    let g = &sol.goods[0];
    let m = meroi(g).ok_or("no mEROI")?;
    ensure(rel(g.output, 5.0) < 1e-6, || format!("Q* = {}", g.output))?;
    ensure(rel(sol.usable_surplus, 25.0) < 1e-6, || format!("E* = {}", sol.usable_surplus))?;
    ensure(sol.phi == 0.0, || format!("phi = {}", sol.phi))?;
    ensure(rel(m, 1.0) < 1e-6, || format!("mEROI = {m}"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("Q*={} E*={} phi=0 mEROI={} in {:.2?}", g.output, sol.usable_surplus, m, elapsed))
}

fn optimality_residuals() -> Check {
    let family = cd_family();
    let (mut worst_foc, mut worst_output, mut worst_identity) = (0.0f64, 0.0f64, 0.0f64);
    let mut regimes = [0usize; 3];
    for i in 0..100 {
        let cfg = family.scenario(trial_seed(2024, i)).map_err(|e| e.to_string())?;
        let sol = solve(&cfg);
        regimes[match sol.binding {
            egl_core::surplus::Binding::None => 0,
            egl_core::surplus::Binding::Usability => 1,
            egl_core::surplus::Binding::Endowment(_) => 2,
        }] += 1;
        for g in sol.goods.iter().filter(|g| g.output > 0.0) {
            let (scale, movers, betas) = cd_params(&cfg, g.index);
            let x: Vec<f64> = movers
                .iter()
                .map(|l| g.employment.iter().find(|(m, _)| m == l).map(|p| p.1).unwrap_or(0.0))
                .collect();
            let f: f64 = scale * x.iter().zip(&betas).map(|(x, b)| x.powf(*b)).product::<f64>();
            worst_output = worst_output.max(rel(f, g.output));
            // δ ∂F/∂x_l = ω_l + φ_l with φ_l = φ ε_l / (1 - φ)
            for ((l, xl), b) in movers.iter().zip(&x).zip(&betas) {
                let m = &cfg.movers[*l];
                let phi_l = sol.phi * m.power_rate * cfg.period_length / (1.0 - sol.phi);
                let lhs = g.energy_content * b * f / xl;
                worst_foc = worst_foc.max(rel(lhs, omega(m, cfg.period_length) + phi_l));
            }
            let (_, gamma) = cd_oracle(&cfg, g.index, g.output);
            worst_identity = worst_identity
                .max(rel(g.energy_content, gamma + g.marginal_surplus))
                .max(rel(meroi(g).unwrap_or(f64::NAN), 1.0 + g.marginal_surplus / gamma));
        }
    }
    ensure(worst_foc < 1e-6, || format!("FOC residual {worst_foc:e}"))?;
    ensure(worst_output < 1e-6, || format!("output residual {worst_output:e}"))?;
    ensure(worst_identity < 1e-9, || format!("identity residual {worst_identity:e}"))?;
    Ok(format!(
        "100 scenarios (free/usability/endowment = {}/{}/{}): FOC {:.1e}, identities {:.1e}",
        regimes[0], regimes[1], regimes[2], worst_foc, worst_identity
    ))
}

fn embodied_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst_id, mut worst_oracle, mut worst_fd) = (0.0f64, 0.0f64, 0.0f64);
    for draw in 0..1000 {
        let n = rng.random_range(1..=3usize);
        let omegas: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..5.0)).collect();
        let movers: Vec<PrimeMoverType> = omegas
            .iter()
            .enumerate()
            .map(|(i, w)| PrimeMoverType::new(format!("m{i}"), *w, 1.0, 0.1, 0.0, 1.0))
            .collect();
        let q = 10f64.powf(rng.random_range(-2.0..2.0));
        let (curve, gamma, g) = if draw % 2 == 0 {
            let betas: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..0.9 / n as f64)).collect();
            let scale = rng.random_range(0.3..3.0);
            let tech = Technology::cobb_douglas(scale, betas.iter().cloned().enumerate().collect());
            let curve = EmbodiedCurve::new(&tech, &movers, 1.0).map_err(|e| e.to_string())?;
            let g = cd_cost(scale, &betas, &omegas, q);
            let b: f64 = betas.iter().sum();
            (curve, g / (b * q), g)
        } else {
            let p = RequirementProfile {
                c0: rng.random_range(0.1..3.0),
                c1: rng.random_range(0.0..3.0),
                tau: rng.random_range(0.2..5.0),
                c2: rng.random_range(0.0..2.0),
                q_s: rng.random_range(0.5..5.0),
                rho: rng.random_range(0.5..3.0),
            };
            let nu: Vec<f64> = (0..n).map(|_| rng.random_range(0.3..3.0)).collect();
            let w: f64 = nu.iter().zip(&omegas).map(|(v, o)| v * o).sum();
            let h = p.c0 * q
                + p.c1 * p.tau * (1.0 - (-q / p.tau).exp())
                + p.c2 * p.q_s / (p.rho + 1.0) * (q / p.q_s).powf(p.rho + 1.0);
            let hp = p.c0 + p.c1 * (-q / p.tau).exp() + p.c2 * (q / p.q_s).powf(p.rho);
            let tech = Technology::fixed(nu.iter().cloned().enumerate().collect(), p);
            let curve = EmbodiedCurve::new(&tech, &movers, 1.0).map_err(|e| e.to_string())?;
            (curve, w * hp, w * h)
        };
        let pt = curve.point(q);
        worst_id = worst_id.max(rel(pt.marginal, pt.average * (1.0 + pt.elasticity)));
        worst_oracle = worst_oracle.max(rel(pt.marginal, gamma)).max(rel(pt.cumulative, g));
        let dq = 1e-4 * q;
        let fd = (curve.cumulative(q + dq) - curve.cumulative(q - dq)) / (2.0 * dq);
        worst_fd = worst_fd.max(rel(fd, pt.marginal));
    }
    ensure(worst_id < 1e-8, || format!("gamma vs gammaA(1+eta): {worst_id:e}"))?;
    ensure(worst_oracle < 1e-8, || format!("curve vs closed form: {worst_oracle:e}"))?;
    ensure(worst_fd < 1e-6, || format!("dG/dQ vs gamma: {worst_fd:e}"))?;
    Ok(format!(
        "1000 draws: identity {worst_id:.1e}, closed form {worst_oracle:.1e}, central difference {worst_fd:.1e}"
    ))
}

fn surplus_accounting() -> Check {
    let family = cd_family();
    let mut configs: Vec<ScenarioConfig> = vec![scenario("cd1.json"), scenario("cd1_scarce.json")];
    for i in 0..100 {
        configs.push(family.scenario(trial_seed(77, i)).map_err(|e| e.to_string())?);
    }
    let (mut worst_parts, mut worst_area) = (0.0f64, 0.0f64);
    for cfg in &configs {
        let sol = solve(cfg);
        let mut parts = 0.0;
        let mut area = 0.0;
        for g in &sol.goods {
            let (big_g, _) = cd_oracle(cfg, g.index, g.output);
            parts += g.energy_content * g.output - big_g;
            area += oracle_integral(|q| g.energy_content - cd_oracle(cfg, g.index, q).1, g.output);
        }
        worst_parts = worst_parts.max(rel(sol.usable_surplus, parts));
        worst_area = worst_area.max(rel(sol.usable_surplus, area));
    }
    ensure(worst_parts < 1e-6, || format!("E vs sum(dQ - G): {worst_parts:e}"))?;
    ensure(worst_area < 1e-6, || format!("E vs quadrature: {worst_area:e}"))?;
    Ok(format!(
        "{} scenarios: sum {worst_parts:.1e}, quadrature {worst_area:.1e}",
        configs.len()
    ))
}

fn brute_force_fixed_point() -> Check {
    let (beta, scale, eps, delta, xbar): (f64, f64, f64, f64, f64) = (0.6, 1.5, 1.0, 10.0, 40.0);
    let (depr, avg): (f64, f64) = (0.1, 3.0);
    let om = eps + depr * avg;
    let doc = serde_json::json!({
        "period_length": 1.0,
        "prime_movers": [{"id": "m", "power_rate": eps, "depreciation": depr, "avg_embodied": avg,
                          "endowment": xbar, "max_accum_rate": 0.1}],
        "energy_goods": [{"id": "e", "energy_content": delta,
                          "technology": {"kind": "cobb_douglas", "scale": scale, "exponents": {"m": beta}}}],
        "non_energy_goods": [{"id": "n", "utility_weight": 1.0,
                              "technology": {"kind": "fixed_proportions", "requirements": {"m": 1.0}, "c0": 1.0}}],
        "preferences": {"form": "cobb_douglas"},
        "horizon": 0
    });
    let start = Instant::now();
    let cfg = load_scenario(&doc.to_string()).map_err(|e| e.to_string())?;
    let sol = solve(&cfg);
    let (q_star, phi_star) = (sol.goods[0].output, sol.phi);

    // x(Q) = (Q/A)^{1/β}; unconstrained optimum bounds the Q grid
    let q_free = scale * (delta * beta * scale / om).powf(beta / (1.0 - beta));
    let nq = 100_000;
    let q_max = 1.05 * q_free;
    let dq = q_max / (nq - 1) as f64;
    let xs: Vec<f64> = (0..nq).map(|i| (i as f64 * dq / scale).powf(1.0 / beta)).collect();
    let nphi = 1000;
    // per φ: grid argmax of δQ - (ω + φ_l) x(Q), then E - U at that Q
    let rows: Vec<(f64, f64)> = map_range(nphi, Execution::Parallel, |j| {
        let phi = j as f64 / nphi as f64;
        let price = om + phi * eps / (1.0 - phi);
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, x) in xs.iter().enumerate() {
            let v = delta * i as f64 * dq - price * x;
            if v > best.0 {
                best = (v, i);
            }
        }
        let q = best.1 as f64 * dq;
        let x = xs[best.1];
        (q, delta * q - om * x - eps * (xbar - x).max(0.0))
    });
    let elapsed = start.elapsed();
    let j = rows.iter().position(|(_, r)| *r <= 0.0).ok_or("usability never satisfied on the grid")?;
    ensure(j > 0, || "instance is not scarce".into())?;
    let (phi_lo, phi_hi) = ((j - 1) as f64 / nphi as f64, j as f64 / nphi as f64);
    let (q_lo, q_hi) = (rows[j].0.min(rows[j - 1].0) - dq, rows[j].0.max(rows[j - 1].0) + dq);
    ensure(phi_lo <= phi_star && phi_star <= phi_hi, || {
        format!("phi* = {phi_star} outside grid cell [{phi_lo}, {phi_hi}]")
    })?;
    ensure(q_lo <= q_star && q_star <= q_hi, || format!("Q* = {q_star} outside [{q_lo}, {q_hi}]"))?;
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "phi*={phi_star:.6} in [{phi_lo}, {phi_hi}], Q*={q_star:.6} in [{q_lo:.6}, {q_hi:.6}] on 1e5 x 1e3 grid in {elapsed:.2?}"
    ))
}

fn proposition_sweeps() -> Check {
    let family = ScenarioFamily::default();
    let seed = 42;
    let tables = proposition_suite(&family, seed, 200, &SuiteOptions::default());
    let mut summary = Vec::new();
    for t in &tables {
        for f in &t.failures {
            reproduce(&family, f.seed, &f.digest).map_err(|e| format!("failure not reproducible: {e}"))?;
        }
        let completed = t.trials - t.discarded.len();
        ensure(t.applicable && t.all_confirmed() && t.confirmed == completed && completed > 0, || {
            format!(
                "proposition {}: {}/{} confirmed, {} failures",
                t.proposition.id(),
                t.confirmed,
                completed,
                t.failures.len()
            )
        })?;
        summary.push(format!("{} {}/{}", t.proposition.id(), t.confirmed, completed));
    }
    // the recorded (seed, digest) pair rebuilds the trial
    let s0 = trial_seed(seed, 0);
    let digest = family.scenario(s0).map_err(|e| e.to_string())?.digest();
    reproduce(&family, s0, &digest).map_err(|e| e.to_string())?;
    Ok(format!("seed {seed}, 200 trials: {}", summary.join(", ")))
}

fn outputs(t: &Trajectory) -> Vec<f64> {
    t.records.iter().map(|r| r.goods[0].output.unwrap_or(0.0)).collect()
}

fn growth_reference() -> Check {
    let start = Instant::now();
    let cfg = scenario("cd1_scarce.json");
    let traj = simulate(&cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let q = outputs(&traj);
    let alpha: Vec<f64> = traj.records.iter().map(|r| r.goods[0].marginal_surplus.unwrap_or(0.0)).collect();
    let x: Vec<f64> = traj.records.iter().map(|r| r.stocks[0]).collect();
    for w in 1..traj.records.len() {
        ensure(x[w] >= x[w - 1], || format!("stock falls at period {w}"))?;
        ensure(q[w] >= q[w - 1], || format!("Q falls at period {w}"))?;
        if w >= 2 {
            ensure(alpha[w] <= alpha[w - 1], || format!("alpha rises at period {w}"))?;
        }
    }
    let ss = traj.steady_state.as_ref().ok_or("no steady state")?;
    let rec = traj.records.iter().find(|r| r.period == ss.period).ok_or("steady record")?;
    let delta = cfg.energy_goods[0].energy_content;
    let a = rec.goods[0].marginal_surplus.unwrap_or(f64::NAN);
    // accumulation measured independently from the stock path
    let m = &cfg.movers[0];
    let eps = m.power_rate * cfg.period_length;
    let next_x = x[rec.period as usize] * (1.0 + m.max_accum_rate * (rec.mover_surplus[0] / eps).tanh());
    let growth = (next_x - x[rec.period as usize]) / x[rec.period as usize];
    ensure(ss.period <= 500, || format!("steady state at {}", ss.period))?;
    ensure(a < 1e-6 * delta, || format!("alpha {a} at steady state"))?;
    ensure(growth < 1e-8, || format!("accumulation {growth:e} at steady state"))?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "steady state at period {} with Q={:.9} alpha={a:.2e} accumulation={growth:.2e} in {elapsed:.2?}",
        ss.period,
        q[q.len() - 1]
    ))
}

fn shock_directions() -> Check {
    let base_cfg = scenario("cd1_scarce.json");
    let shocked_cfg = scenario("cd1_efficiency.json");
    let event = shocked_cfg.events.first().ok_or("efficiency scenario has no event")?;

    let before = EconomyState::initial(&shocked_cfg);
    let mut after = before.clone();
    apply_event(&shocked_cfg, &mut after, event).map_err(|e| e.to_string())?;
    let p0 = EnergyProblem::new(&shocked_cfg, &before).map_err(|e| e.to_string())?;
    let p1 = EnergyProblem::new(&shocked_cfg, &after).map_err(|e| e.to_string())?;
    let (c0, c1) = (p0.curve(0).map_err(|e| e.to_string())?, p1.curve(0).map_err(|e| e.to_string())?);
    for k in 1..=1000 {
        let q = 20.0 * k as f64 / 1000.0;
        ensure(c1.marginal(q) < c0.marginal(q), || format!("MEEC not lowered at Q={q}"))?;
    }

    let steady_q = |cfg: &ScenarioConfig| -> Result<f64, String> {
        let t = simulate(cfg).map_err(|e| e.to_string())?;
        t.steady_state.as_ref().ok_or("no steady state")?;
        Ok(*outputs(&t).last().unwrap())
    };
    let q_base = steady_q(&base_cfg)?;
    let q_eff = steady_q(&shocked_cfg)?;
    let q_dep = steady_q(&scenario("cd1_depletion.json"))?;
    ensure(q_eff >= q_base, || format!("efficiency: {q_eff} < {q_base}"))?;
    ensure(q_dep <= q_base, || format!("depletion: {q_dep} > {q_base}"))?;
    Ok(format!(
        "MEEC lower at 1000 points; steady Q base {q_base:.6}, efficiency {q_eff:.6}, depletion {q_dep:.6}"
    ))
}

fn accumulation_endpoints() -> Check {
    let mut worst = 0.0f64;
    for (i, r) in [0.01, 0.05, 0.2, 0.5, 1.0].iter().enumerate() {
        let mut m = PrimeMoverType::new("m", 1.0 + i as f64, 1.0, 0.1, 0.0, 3.0);
        m.max_accum_rate = *r;
        let movers = [m];
        let x0 = 3.0;
        let still = step_accumulation(&[x0], &[0.0], &movers, AccumNormalization::DirectEnergy, 1)[0];
        ensure(still == x0, || format!("r={r}: zero surplus moved stock to {still}"))?;
        for phi_l in [1e6, 1e12, f64::INFINITY] {
            let x1 = step_accumulation(&[x0], &[phi_l], &movers, AccumNormalization::DirectEnergy, 1)[0];
            worst = worst.max(((x1 / x0) - (1.0 + r)).abs());
        }
    }
    ensure(worst < 1e-9, || format!("saturated factor off by {worst:e}"))?;
    // an abundant run has zero surplus per mover and so never accumulates
    let traj = simulate(&scenario("cd1.json")).map_err(|e| e.to_string())?;
    ensure(traj.records.iter().all(|r| r.stocks[0] == 100.0), || "abundant stock moved".into())?;
    Ok(format!("zero surplus exact, saturated factor within {worst:.1e}"))
}

fn run_egl(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_egl"))
        .args(args)
        .env("EGL_LOG", "quiet")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("egl {} failed: {}", args[0], String::from_utf8_lossy(&out.stderr))
    })
}

fn cli_determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let scen = repo().join("scenarios");
    let mut compared = 0;
    for run in ["a", "b", "c"] {
        let dir = tmp.path().join(run);
        run_egl(&["equilibrium", "--scenario", &s(&scen.join("cd1_scarce.json")), "--out", &s(&dir.join("eq"))])?;
        run_egl(&["simulate", "--scenario", &s(&scen.join("cd1_efficiency.json")), "--out", &s(&dir.join("sim"))])?;
        let mut args = vec![
            "statics".to_string(),
            "--family".into(),
            s(&scen.join("family_default.json")),
            "--seed".into(),
            "42".into(),
            "--trials".into(),
            "24".into(),
            "--out".into(),
            s(&dir.join("statics")),
        ];
        // the third run uses one thread: parallel and sequential agree too
        if run == "c" {
            args.push("--sequential".into());
        }
        run_egl(&args.iter().map(String::as_str).collect::<Vec<_>>())?;
    }
    for sub in ["eq", "sim", "statics"] {
        let a = tmp.path().join("a").join(sub);
        let mut names: Vec<_> = fs::read_dir(&a).map_err(|e| e.to_string())?.map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for name in names {
            let first = fs::read(a.join(&name)).map_err(|e| e.to_string())?;
            for other in ["b", "c"] {
                let second = fs::read(tmp.path().join(other).join(sub).join(&name)).map_err(|e| e.to_string())?;
                ensure(first == second, || format!("{sub}/{} differs in run {other}", name.to_string_lossy()))?;
            }
            compared += 1;
        }
    }
    Ok(format!("{compared} CSV/SVG/JSON files byte-identical across 3 runs"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("closed-form reference economy", closed_form_reference),
        ("optimality residuals on random economies", optimality_residuals),
        ("embodied-energy identity", embodied_identity),
        ("surplus accounting", surplus_accounting),
        ("scarcity fixed point vs brute force", brute_force_fixed_point),
        ("comparative-statics sign sweeps", proposition_sweeps),
        ("growth path to steady state", growth_reference),
        ("shock directions", shock_directions),
        ("accumulation endpoints", accumulation_endpoints),
        ("byte-identical CLI outputs", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail} ({secs:.2} s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {why} ({secs:.2} s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
