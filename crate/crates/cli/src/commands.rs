//! Dispatch of a validated [`ExperimentConfig`] to the core library.

use gutmanlab_core::classifiers::{
    binary_reject_from_scores, gutman_binary_from_score, gutman_multi_from_scores, scores, threshold_second_order,
    unnikrishnan_from_scores,
};
use gutmanlab_core::distributions::empirical_type;
use gutmanlab_core::divergences::{dispersion_v, gjs, kl, renyi, third_moment_t};
use gutmanlab_core::exponents::{exponent_f, exponent_fn, exponent_k};
use gutmanlab_core::simulation::{exact_binary, max_type1_search, mc_binary, mc_multi, weak_convergence_check};
use gutmanlab_core::{Distribution, EmpiricalType, ExponentSolution, Probability, SimulationReport, Verdict};
use serde_json::{json, Value};

use crate::config::*;
use crate::output::{num, Cell, Output, Table};
use crate::CliError;

/// Type-II panel: `(P₁, P₂) = (Bern(0.2), Bern(0.4))`.
const FIG1_A: (f64, f64) = (0.2, 0.4);
/// Type-I panel: threshold computed from `(Bern(0.2), Bern(0.228))`.
const FIG1_B: (f64, f64) = (0.2, 0.228);
const FIG1_ALPHA: f64 = 2.0;
const FIG1_EPSILON: f64 = 0.2;

pub fn execute(cmd: &Command) -> Result<Output, CliError> {
    match cmd {
        Command::Divergence(c) => divergence(c),
        Command::Exponent(c) => exponent(c),
        Command::Threshold(c) => {
            let spec = c.threshold.spec(c.distributions.len(), c.alpha, c.distributions[0].alphabet_size());
            let lambda = spec.threshold(&c.distributions, c.n)?;
            Ok(Output::new().field("lambda", num(lambda)))
        }
        Command::Classify(c) => classify(c),
        Command::SimulateBinary(c) => {
            let d = &c.distributions;
            let lambda = c.threshold.spec(2, c.alpha, d[0].alphabet_size()).threshold(d, c.n)?;
            let report = mc_binary(&d[0], &d[1], c.alpha, c.n, lambda, c.trials, c.seed)?;
            Ok(report_output(report, lambda))
        }
        Command::SimulateMulti(c) => {
            let d = &c.distributions;
            let lambda = c.threshold.spec(d.len(), c.alpha, d[0].alphabet_size()).threshold(d, c.n)?;
            let report = mc_multi(d, c.alpha, c.n, lambda, c.rule, c.trials, c.seed)?;
            Ok(report_output(report, lambda))
        }
        Command::Exact(c) => {
            let r = exact_binary(&c.distributions[0], &c.distributions[1], c.alpha, c.n, c.lambda)?;
            let rows = vec![
                ("beta1", Cell::Num(r.beta1.get())),
                ("beta2", Cell::Num(r.beta2.get())),
                ("enumerated_cells", Cell::Int(r.enumerated_cells)),
                ("mass_h1", Cell::Num(r.mass_h1)),
                ("mass_h2", Cell::Num(r.mass_h2)),
            ];
            Ok(Output::new()
                .field("beta1", num(r.beta1.get()))
                .field("beta2", num(r.beta2.get()))
                .field("enumerated_cells", json!(r.enumerated_cells))
                .field("mass_h1", num(r.mass_h1))
                .field("mass_h2", num(r.mass_h2))
                .with_table(key_value(rows)))
        }
        Command::MaxType1(c) => {
            let report = max_type1_search(c.alpha, c.n, c.lambda, c.grid_step, c.trials, c.seed)?;
            Ok(report_output(report, c.lambda))
        }
        Command::WeakConvergence(c) => {
            let w = weak_convergence_check(&c.distribution, c.alpha, c.n, c.trials, c.seed)?;
            Ok(Output::new()
                .field("ks_distance", num(w.ks_distance))
                .field("dof", json!(w.dof))
                .field("degenerate", json!(w.degenerate))
                .field("samples", json!(w.samples)))
        }
        Command::ReproduceFig1(c) => fig1(c),
    }
}

fn key_value(rows: Vec<(&str, Cell)>) -> Table {
    Table {
        header: vec!["quantity", "value"],
        rows: rows.into_iter().map(|(k, v)| vec![Cell::Text(k.to_owned()), v]).collect(),
    }
}

fn divergence(c: &DivergenceConfig) -> Result<Output, CliError> {
    let (p1, p2) = (&c.distributions[0], &c.distributions[1]);
    let mut out = Output::new();
    let mut rows = Vec::new();
    for q in &c.quantities {
        let (key, v) = match *q {
            Quantity::Gjs => ("gjs", gjs(p1, p2, c.alpha)?),
            Quantity::Kl => ("kl", kl(p1, p2)?),
            Quantity::Dispersion => ("dispersion", dispersion_v(p1, p2, c.alpha)?),
            Quantity::ThirdMoment => ("third_moment", third_moment_t(p1, p2, c.alpha)?),
            Quantity::Renyi(g) => ("renyi", renyi(g, p1, p2)?),
        };
        out = out.field(key, num(v));
        rows.push((key, Cell::Num(v)));
    }
    Ok(out.with_table(key_value(rows)))
}

fn exponent(c: &ExponentConfig) -> Result<Output, CliError> {
    let d = &c.distributions;
    let s: ExponentSolution = match c.kind {
        ExponentKind::F => exponent_f(&d[0], &d[1], c.alpha, c.lambda)?,
        ExponentKind::K => exponent_k(&d[0], &d[1], &d[2], c.alpha, c.lambda)?,
        ExponentKind::Fn => exponent_fn(&d[0], &d[1], c.alpha, c.lambda, c.n.expect("validated"))?,
    };
    let minimizers: Vec<Value> = s.minimizers.iter().map(|q| json!(q.probs())).collect();
    Ok(Output::new()
        .field("value", num(s.value))
        .field("minimizers", Value::Array(minimizers))
        .field("multipliers", Value::Array(s.multipliers.iter().map(|&m| num(m)).collect()))
        .field("converged", json!(s.converged))
        .field("residual", num(s.residual)))
}

fn verdict_json(v: Verdict) -> Value {
    match v {
        Verdict::Hypothesis(j) => json!({"label": v.to_string(), "index": j}),
        Verdict::Reject => json!({"label": v.to_string(), "index": null}),
    }
}

fn classify(c: &ClassifyConfig) -> Result<Output, CliError> {
    let training: Vec<EmpiricalType> = c
        .training
        .iter()
        .map(|s| empirical_type(s, c.alphabet_size))
        .collect::<Result<_, _>>()?;
    let y = empirical_type(&c.test, c.alphabet_size)?;
    let g = scores(&training, &y, c.alpha);
    let (verdict, tie) = match c.rule {
        ClassifyRule::GutmanBinary => (gutman_binary_from_score(g[0], c.lambda[0]), false),
        ClassifyRule::Unnikrishnan => {
            let r = unnikrishnan_from_scores(&g, c.lambda[0]);
            (r.verdict, r.tie)
        }
        ClassifyRule::GutmanMulti => (gutman_multi_from_scores(&g, c.lambda[0]), false),
        ClassifyRule::BinaryReject => (binary_reject_from_scores(g[0], g[1], c.lambda[0], c.lambda[1]), false),
    };
    Ok(Output::new()
        .field("verdict", verdict_json(verdict))
        .field("scores", Value::Array(g.iter().map(|&v| num(v)).collect()))
        .field("tie", json!(tie)))
}

fn report_output(report: SimulationReport, lambda: f64) -> Output {
    let rows = report
        .estimates
        .iter()
        .map(|e| {
            vec![
                Cell::Text(e.name.clone()),
                Cell::Num(e.value()),
                Cell::Num(e.stderr),
                Cell::Int(e.hits),
                Cell::Int(e.trials),
            ]
        })
        .collect();
    let table = Table { header: vec!["name", "estimate", "stderr", "hits", "trials"], rows };
    let value = serde_json::to_value(&report).expect("report serializes");
    Output::new().field("lambda", num(lambda)).field("report", value).with_table(table)
}

fn bern(p: f64) -> Distribution {
    Distribution::bernoulli(p).expect("fixed parameter in [0, 1]")
}

fn fig1(c: &Fig1Config) -> Result<Output, CliError> {
    let eps = Probability::open(FIG1_EPSILON).expect("fixed target in (0, 1)");
    let grid = c.n_grid.values();
    let mut rows = Vec::with_capacity(grid.len());
    let mut json_rows = Vec::with_capacity(grid.len());
    for (i, &n) in grid.iter().enumerate() {
        let seed = c.seed.wrapping_add(i as u64);
        match c.panel {
            Panel::A => {
                let (p1, p2) = (bern(FIG1_A.0), bern(FIG1_A.1));
                let lambda = threshold_second_order(&p1, &p2, FIG1_ALPHA, n, eps)?;
                let r = mc_binary(&p1, &p2, FIG1_ALPHA, n, lambda, c.trials, seed)?;
                let e = r.get("beta2").expect("binary report has beta2");
                log::info!("n={n} λ̂={lambda:.6} β̂₂={:.5}", e.value());
                rows.push(vec![Cell::Int(n), Cell::Num(e.value()), Cell::Num(e.stderr), Cell::Num(FIG1_EPSILON)]);
                json_rows.push(json!({"n": n, "beta2_hat": num(e.value()), "stderr": num(e.stderr), "target": num(FIG1_EPSILON)}));
            }
            Panel::B => {
                let (p1, p2) = (bern(FIG1_B.0), bern(FIG1_B.1));
                let lambda = threshold_second_order(&p1, &p2, FIG1_ALPHA, n, eps)?;
                let r = max_type1_search(FIG1_ALPHA, n, lambda, c.grid_step, c.trials, seed)?;
                let e = r.get("max_beta1").expect("search report has max_beta1");
                let log_hat = e.value().ln();
                // delta method: se(ln p̂) ≈ se(p̂)/p̂
                let se_log = if e.value() > 0.0 { e.stderr / e.value() } else { f64::INFINITY };
                let log_theory = -(n as f64) * lambda;
                log::info!("n={n} λ̂={lambda:.6} max β̂₁={:.3e}", e.value());
                rows.push(vec![Cell::Int(n), Cell::Num(log_hat), Cell::Num(se_log), Cell::Num(log_theory)]);
                json_rows.push(json!({
                    "n": n,
                    "log_max_beta1_hat": num(log_hat),
                    "stderr_log": num(se_log),
                    "log_theoretical": num(log_theory),
                }));
            }
        }
    }
    let header = match c.panel {
        Panel::A => vec!["n", "beta2_hat", "stderr", "target"],
        Panel::B => vec!["n", "log_max_beta1_hat", "stderr_log", "log_theoretical"],
    };
    Ok(Output::new().field("rows", Value::Array(json_rows)).with_table(Table { header, rows }))
}
