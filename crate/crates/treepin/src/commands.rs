use serde_json::json;
use treepin_core::closedform::{mean_g, second_moment_hd, HomogeneousTree};
use treepin_core::math::linspace;
use treepin_core::montecarlo::MonteCarlo;
use treepin_core::treesim::{exact_expectation_oracle, ExpectationTarget, Realization};
use treepin_core::{DefectKind, Error, ModelSpec};

use crate::config::{Grid, RunConfig};
use crate::exec::RayonExecutor;
use crate::record::{fmt_f64, fmt_opt, Outcome, Table};
use crate::CliError;

pub struct Context<'a> {
    pub exec: &'a RayonExecutor,
    pub node_budget: u64,
}

impl Context<'_> {
    fn mc(&self) -> MonteCarlo<'_, RayonExecutor> {
        MonteCarlo::new(self.exec).with_node_budget(self.node_budget)
    }
}

fn check_betas(betas: &[f64], strictly_positive: bool) -> Result<(), CliError> {
    let bad = betas
        .iter()
        .find(|b| !b.is_finite() || **b < 0.0 || (strictly_positive && **b == 0.0));
    match bad {
        Some(b) if strictly_positive => Err(CliError::Config(format!("beta must be > 0, got {b}"))),
        Some(b) => Err(CliError::Config(format!("beta must be >= 0, got {b}"))),
        None if betas.is_empty() => Err(CliError::Config("beta grid is empty".into())),
        None => Ok(()),
    }
}

/// Model with the defect potential taken from `u` when it is given.
fn model_with_u(cfg: &mut RunConfig) -> Result<ModelSpec, CliError> {
    let model = cfg.model()?;
    let Some(grid) = &cfg.u else {
        return Ok(model);
    };
    let u = match grid.values().as_slice() {
        [u] => *u,
        _ => {
            return Err(CliError::Config(
                "u must be a single value for this command".into(),
            ))
        }
    };
    if !model.has_defect() {
        return Err(CliError::Config(
            "u is set but the model has no defect".into(),
        ));
    }
    let model = model.with_u(u);
    model
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    cfg.model = Some(model.clone());
    cfg.u = None;
    Ok(model)
}

pub fn critical(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let model = cfg.model()?;
    let betas = cfg.beta_grid(Grid::Range {
        start: 0.0,
        stop: 3.0,
        count: 31,
    });
    check_betas(&betas, false)?;
    let tree = HomogeneousTree::new(&model.bulk, model.d)?;

    let mut table = Table::new("critical", &["beta", "lambda", "phi", "f_gap"]);
    for &b in &betas {
        table.row(&[
            fmt_f64(b),
            fmt_f64(tree.lambda(b)),
            fmt_f64(tree.phi(b)),
            fmt_f64(treepin_core::closedform::f_gap(&model.bulk, model.d, b)),
        ]);
    }
    let beta_c = tree.crit.beta_c.finite();
    let mut out = Outcome::new(json!({
        "beta_c": beta_c,
        "lambda_at_beta_c": beta_c.map(|_| tree.crit.lambda_at_beta_c),
        "phi_at_beta_c": beta_c.map(|_| tree.crit.phi_cap),
        "rows": betas.len(),
    }));
    match beta_c {
        Some(bc) => {
            out.say(format!("beta_c = {}", fmt_f64(bc)));
            out.say(format!(
                "lambda(beta_c) = {}",
                fmt_f64(tree.crit.lambda_at_beta_c)
            ));
        }
        None => out.say("beta_c = inf (weak disorder at every beta)"),
    }
    out.tables.push(table);
    Ok(out)
}

pub fn phase_diagram(cfg: &mut RunConfig, ctx: &Context) -> Result<Outcome, CliError> {
    let family = cfg.model()?;
    if !matches!(family.defect, DefectKind::SubtreeConstant { .. }) {
        return Err(CliError::Config(format!(
            "phase-diagram needs defect kind subtree_constant, got {}",
            family.defect.name()
        )));
    }
    let betas = cfg.beta_grid(Grid::Range {
        start: 0.25,
        stop: 3.0,
        count: 12,
    });
    check_betas(&betas, true)?;
    let us = cfg.u_grid(Grid::Range {
        start: -1.0,
        stop: 3.0,
        count: 9,
    });
    if us.is_empty() {
        return Err(CliError::Config("u grid is empty".into()));
    }
    let n = *cfg.n.get_or_insert(8);
    let replicas = *cfg.replicas.get_or_insert(20);
    let tol = cfg.tol();
    let cells = ctx
        .mc()
        .phase_scan(&family, &betas, &us, n, replicas, cfg.seed(), tol)?;

    let mut grid = Table::new(
        "phase_diagram",
        &[
            "beta",
            "u",
            "label",
            "F",
            "J",
            "F_at_beta_c",
            "free_energy_mean",
            "free_energy_stderr",
            "pinned_fraction_mean",
        ],
    );
    for c in &cells {
        grid.row(&[
            fmt_f64(c.beta),
            fmt_f64(c.u),
            c.label.as_str().to_owned(),
            fmt_f64(c.f_line),
            fmt_opt(c.j_line),
            fmt_opt(c.f_at_beta_c),
            fmt_f64(c.estimate.mean),
            fmt_f64(c.estimate.stderr),
            fmt_f64(c.pinned_fraction_mean),
        ]);
    }

    // boundary curves on a dense grid over the same beta range
    let tree = HomogeneousTree::new(&family.bulk, family.d)?;
    let d1 = family.d1;
    let log_d1 = (d1 as f64).ln();
    let lo = betas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = betas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let beta_c = tree.crit.beta_c.finite();
    let f_c = beta_c.map(|_| tree.f_at_beta_c(d1)).transpose()?;
    let mut curves = Table::new(
        "phase_boundary",
        &[
            "beta",
            "F",
            "J",
            "F_at_beta_c",
            "phi_minus_log_d1_over_beta",
        ],
    );
    let mut failures = Vec::new();
    let mut checked = 0usize;
    for b in linspace(lo, hi, if lo == hi { 1 } else { 201 }) {
        let f = tree.f_line(d1, b)?;
        let mid = (tree.phi(b) - log_d1) / b;
        let strong = beta_c.is_some_and(|bc| b > bc);
        let j = if strong {
            Some(tree.j_line(d1, b)?)
        } else {
            None
        };
        if let (Some(j), Some(fc)) = (j, f_c) {
            checked += 1;
            if !(fc < j && j < mid && mid < f) {
                failures.push(format!(
                    "boundary ordering F(beta_c) < J < (phi - log d1)/beta < F violated at beta = {b}"
                ));
            }
        }
        curves.row(&[
            fmt_f64(b),
            fmt_f64(f),
            fmt_opt(j),
            fmt_opt(f_c),
            fmt_f64(mid),
        ]);
    }

    let mut out = Outcome::new(json!({
        "beta_c": beta_c,
        "F_at_beta_c": f_c,
        "cells": cells,
        "boundary_points_checked": checked,
    }));
    out.say(format!(
        "{} cells, n = {n}, {replicas} replicas; boundary ordering checked at {checked} points",
        cells.len()
    ));
    out.failures = failures;
    out.tables.push(grid);
    out.tables.push(curves);
    Ok(out)
}

pub fn free_energy(cfg: &mut RunConfig, ctx: &Context) -> Result<Outcome, CliError> {
    let model = model_with_u(cfg)?;
    let beta = cfg.beta_single(1.0)?;
    check_betas(&[beta], false)?;
    let n_list = cfg.n_list.get_or_insert_with(|| vec![4, 6, 8, 10]).clone();
    let replicas = *cfg.replicas.get_or_insert(50);
    let report = ctx
        .mc()
        .estimate_free_energy(&model, beta, &n_list, replicas, cfg.seed())?;

    let mut table = Table::new(
        "free_energy",
        &[
            "n",
            "replicas",
            "mean",
            "stderr",
            "min",
            "max",
            "anchor_lower",
            "anchor_upper",
            "anchor_name",
        ],
    );
    for row in &report.rows {
        let e = &row.estimate;
        table.row(&[
            e.n.to_string(),
            e.replicas.to_string(),
            fmt_f64(e.mean),
            fmt_f64(e.stderr),
            fmt_f64(e.min),
            fmt_f64(e.max),
            fmt_f64(row.anchor.lower),
            fmt_f64(row.anchor.upper),
            row.anchor.kind.as_str().to_owned(),
        ]);
    }
    let mut out = Outcome::new(serde_json::to_value(&report).expect("report serializes"));
    out.say(format!(
        "limit anchor ({}): [{}, {}]",
        report.limit.kind.as_str(),
        fmt_f64(report.limit.lower),
        fmt_f64(report.limit.upper)
    ));
    if let Some(x) = report.extrapolated {
        out.say(format!("1/n extrapolation of the mean: {}", fmt_f64(x)));
    }
    out.tables.push(table);
    Ok(out)
}

pub fn pinned_profile(cfg: &mut RunConfig, ctx: &Context) -> Result<Outcome, CliError> {
    let model = model_with_u(cfg)?;
    if !model.has_defect() {
        return Err(CliError::Config(
            "pinned-profile needs a model with a defect".into(),
        ));
    }
    let beta = cfg.beta_single(1.0)?;
    check_betas(&[beta], false)?;
    let n = *cfg.n.get_or_insert(8);
    let replicas = *cfg.replicas.get_or_insert(50);
    let prof = ctx
        .mc()
        .empirical_pinned_profile(&model, beta, n, replicas, cfg.seed())?;

    let mut summary = Table::new(
        "pinned_profile",
        &[
            "n",
            "replicas",
            "fraction_mean",
            "fraction_stderr",
            "dominant_mean",
            "dominant_stderr",
        ],
    );
    summary.row(&[
        n.to_string(),
        replicas.to_string(),
        fmt_f64(prof.fraction.mean),
        fmt_f64(prof.fraction.stderr),
        fmt_f64(prof.dominant.mean),
        fmt_f64(prof.dominant.stderr),
    ]);
    let mut hist = Table::new(
        "pinned_histogram",
        &["bin_lo", "bin_hi", "fraction_count", "dominant_count"],
    );
    for i in 0..10 {
        hist.row(&[
            fmt_f64(i as f64 / 10.0),
            fmt_f64((i + 1) as f64 / 10.0),
            prof.fraction.histogram[i].to_string(),
            prof.dominant.histogram[i].to_string(),
        ]);
    }

    // analytic phase for the constant defect subtree, when it is defined
    let label = match model.defect {
        DefectKind::SubtreeConstant { u } if beta > 0.0 && !model.bulk.is_degenerate() => {
            let tree = HomogeneousTree::new(&model.bulk, model.d)?;
            Some(tree.classify_st(model.d1, beta, u, cfg.tol())?)
        }
        _ => None,
    };
    let mut out = Outcome::new(json!({ "profile": prof, "phase_label": label }));
    out.say(format!(
        "mean pinned fraction {} (stderr {})",
        fmt_f64(prof.fraction.mean),
        fmt_f64(prof.fraction.stderr)
    ));
    if let Some(l) = label {
        out.say(format!("analytic phase: {l}"));
    }
    out.tables.push(summary);
    out.tables.push(hist);
    Ok(out)
}

struct Check {
    name: &'static str,
    cases: usize,
    max_dev: f64,
    skipped: Option<String>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check {
            name,
            cases: 0,
            max_dev: 0.0,
            skipped: None,
        }
    }

    fn record(&mut self, dev: f64) {
        self.cases += 1;
        // NaN deviations must fail the check
        self.max_dev = if dev.is_nan() {
            f64::NAN
        } else {
            self.max_dev.max(dev)
        };
    }

    fn passes(&self, tol: f64) -> bool {
        self.max_dev <= tol
    }
}

fn relative_log_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

pub fn oracle_check(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let base = cfg.model()?;
    let betas = cfg.beta_grid(Grid::List(vec![0.5, 1.5]));
    check_betas(&betas, false)?;
    let n_max = *cfg.n.get_or_insert(6);
    let seeds = *cfg.seeds.get_or_insert(20);
    let tol = cfg.tol();
    let master = cfg.seed();
    if n_max < 1 {
        return Err(CliError::Config("n must be >= 1".into()));
    }
    let u = base.defect.u().unwrap_or(0.5);
    let (d, d1, bulk) = (base.d, base.d1, base.bulk.clone());
    let mut models = vec![
        ModelSpec::new(d, d1, bulk.clone(), DefectKind::None)?,
        ModelSpec::new(d, 1, bulk.clone(), DefectKind::BranchShift { u })?,
        ModelSpec::new(d, d1, bulk.clone(), DefectKind::SubtreeConstant { u })?,
        ModelSpec::new(d, d1, bulk.clone(), DefectKind::SubtreeShift { u })?,
    ];
    models.dedup();

    let mut brute = Check::new("brute_vs_recursive");
    let mut decomp = Check::new("decomposition_identity");
    for model in &models {
        for n in 1..=n_max {
            for s in 0..seeds {
                let seed = treepin_core::rng::replica_seed(master, s as u64);
                let real = Realization::new(model.clone(), seed, n);
                for &b in &betas {
                    let lz = real.log_partition(b)?;
                    brute.record((lz - real.brute_force_log_partition(b)?).abs());
                    if model.has_defect() {
                        decomp.record((lz - real.st_decomposition(b)?.log_partition()).abs());
                    }
                }
            }
        }
    }

    let mut moments = Check::new("exact_vs_closed_form_moments");
    if bulk.support().is_none() {
        moments.skipped = Some("continuous disorder has no finite support to enumerate".into());
    } else {
        let hd = &models[0];
        let tree = HomogeneousTree::new(&bulk, d).ok();
        let st = ModelSpec::new(d, d1, bulk.clone(), DefectKind::SubtreeConstant { u })?;
        for n in 1..=n_max.min(3) {
            for &b in &betas {
                let first = exact_expectation_oracle(hd, b, n, 1, ExpectationTarget::Partition);
                let first = match first {
                    Err(Error::SupportTooLarge { .. } | Error::DepthTooLarge { .. }) => continue,
                    r => r?,
                };
                let annealed = n as f64 * (bulk.log_mgf(b) + (d as f64).ln());
                moments.record(relative_log_gap(first, annealed));
                if tree.is_some() {
                    let second =
                        exact_expectation_oracle(hd, b, n, 2, ExpectationTarget::Partition)?;
                    moments.record(relative_log_gap(second, second_moment_hd(&bulk, d, b, n)?));
                }
                for k in 0..n {
                    let target = ExpectationTarget::ExitSum { k };
                    match exact_expectation_oracle(&st, b, n, 1, target) {
                        Err(Error::SupportTooLarge { .. }) => continue,
                        r => moments.record(relative_log_gap(r?, mean_g(&bulk, d, d1, b, k, n)?)),
                    }
                }
            }
        }
    }

    let mut table = Table::new(
        "oracle_check",
        &["check", "cases", "max_deviation", "tol", "status"],
    );
    let mut out = Outcome::new(serde_json::Value::Null);
    let mut rows = Vec::new();
    for c in [&brute, &decomp, &moments] {
        let status = match (&c.skipped, c.passes(tol)) {
            (Some(_), _) => "skipped",
            (None, true) => "pass",
            (None, false) => "fail",
        };
        match &c.skipped {
            Some(why) => out.say(format!("{}: skipped ({why})", c.name)),
            None => out.say(format!(
                "{}: {} cases, max deviation {} [{}]",
                c.name,
                c.cases,
                fmt_f64(c.max_dev),
                status
            )),
        }
        if status == "fail" {
            out.failures.push(format!(
                "{}: max deviation {} exceeds tol {}",
                c.name, c.max_dev, tol
            ));
        }
        table.row(&[
            c.name.to_owned(),
            c.cases.to_string(),
            fmt_f64(c.max_dev),
            fmt_f64(tol),
            status.to_owned(),
        ]);
        rows.push(json!({
            "check": c.name,
            "cases": c.cases,
            "max_deviation": c.max_dev,
            "status": status,
        }));
    }
    out.results = json!({ "checks": rows, "tol": tol });
    out.tables.push(table);
    Ok(out)
}
