//! One function per experiment. Each returns a JSON payload, the CSV tables
//! and whether every solve met its tolerances.

use std::sync::Arc;

use serde_json::{json, Value};

use plap_core::spectral::{
    check_caccioppoli, estimate_ep, estimate_r0, fit_decay_from, gap_certificate, gradient_decay_profile, log_slope,
    radial_profile, theoretical_decay, GapSettings,
};
use plap_core::{
    build_grid, disjoint_pieces, ls_upper_bound, solve_ground_state, sweep_converged, sweep_perturbed, EigenResult,
    Grid, PlapError,
};

use crate::config::{ConfigError, RunConfig};
use crate::record::Table;

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Solver(#[from] PlapError),
}

pub struct Outcome {
    pub payload: Value,
    pub tables: Vec<Table>,
    pub complete: bool,
}

fn missing(block: &str) -> CommandError {
    CommandError::Config(ConfigError::Invalid {
        field: block.to_string(),
        message: "section is required for this command".into(),
    })
}

fn grid(cfg: &RunConfig) -> Result<Arc<Grid>, CommandError> {
    Ok(Arc::new(build_grid(&cfg.domain, cfg.h, &cfg.grid_window())?))
}

fn summary(r: &EigenResult) -> Value {
    json!({
        "lambda": r.lambda,
        "residual": r.residual,
        "iterations": r.iterations,
        "converged": r.converged,
        "linf_ratio": r.linf_ratio,
        "nodes": r.u.grid().len(),
    })
}

pub fn cmd_eig(cfg: &RunConfig) -> Result<Outcome, CommandError> {
    let g = grid(cfg)?;
    let r = solve_ground_state(&g, cfg.p, &cfg.solver)?;
    let mut payload = summary(&r);
    payload["energy_history"] = json!(r.energy_history);
    Ok(Outcome { payload, tables: vec![], complete: r.converged })
}

pub fn cmd_lsbound(cfg: &RunConfig) -> Result<Outcome, CommandError> {
    let k = cfg.lsbound.as_ref().ok_or_else(|| missing("lsbound"))?.k;
    let window = plap_core::Window::centered(cfg.domain.dim(), cfg.half_width());
    let pieces = disjoint_pieces(&cfg.domain, k, cfg.h, &window)?;
    let lb = ls_upper_bound(&pieces, cfg.p, &cfg.solver)?;
    let payload = json!({
        "k": k,
        "bound": lb.bound,
        "pieces": lb.pieces.iter().map(summary).collect::<Vec<_>>(),
    });
    Ok(Outcome { payload, tables: vec![], complete: lb.converged() })
}

pub fn cmd_epinf(cfg: &RunConfig) -> Result<Outcome, CommandError> {
    let ep = cfg.ep.as_ref().ok_or_else(|| missing("ep"))?;
    let est = estimate_ep(&cfg.domain, cfg.p, &ep.radii, &ep.windows, cfg.h, &cfg.solver)?;
    let mut table = Table::new("ep_table", vec!["R", "window", "lambda_ext"]);
    for c in &est.table {
        table.push(vec![c.r, c.window, c.lambda_ext]);
    }
    let complete = est.table.iter().all(|c| c.converged) && est.monotone_ok;
    Ok(Outcome { payload: serde_json::to_value(&est).expect("serialisable"), tables: vec![table], complete })
}

pub fn cmd_decay(cfg: &RunConfig) -> Result<Outcome, CommandError> {
    let block = cfg.decay.as_ref().ok_or_else(|| missing("decay"))?;
    let ep_block = cfg.ep.as_ref().ok_or_else(|| missing("ep"))?;
    let g = grid(cfg)?;
    let r = solve_ground_state(&g, cfg.p, &cfg.solver)?;
    let est = estimate_ep(&cfg.domain, cfg.p, &ep_block.radii, &ep_block.windows, cfg.h, &cfg.solver)?;
    let ep = est.extrapolated;
    let first = theoretical_decay(r.lambda, ep, cfg.p, 0.0)?;
    let r0 = estimate_r0(&est, first.eps_lambda, ep);
    let fit = fit_decay_from(&r.u, block.floor, block.r_min)?;
    let model = theoretical_decay(r.lambda, ep, cfg.p, r0)?.with_fit(&fit);

    let mut cacc = Vec::new();
    for &radius in &block.cutoff_radii {
        for &frac in &block.delta_fractions {
            let delta = frac / (cfg.p - 1.0);
            let c = check_caccioppoli(&r.u, r.lambda, radius, delta, cfg.p)?;
            cacc.push(json!({ "R": radius, "delta": delta, "lhs": c.lhs, "rhs": c.rhs, "holds": c.holds }));
        }
    }
    let tails = gradient_decay_profile(&r.u, cfg.p, &block.tail_radii)?;
    let tail_slope = log_slope(&tails);

    let mut profile = Table::new("decay_profile", vec!["r", "max_abs_u", "envelope"]);
    for (radius, m) in radial_profile(&r.u) {
        profile.push(vec![radius, m, fit.c * (-model.alpha_theory * radius).exp()]);
    }
    let mut tail_table = Table::new("gradient_tails", vec!["R", "grad_lp_tail", "envelope"]);
    for &(radius, t) in &tails {
        tail_table.push(vec![radius, t, model.gradient_envelope(radius)]);
    }
    let cacc_ok = cacc.iter().all(|c| c["holds"] == json!(true));
    let payload = json!({
        "eigen": summary(&r),
        "model": model,
        "fit_bins": fit.bins,
        "caccioppoli": cacc,
        "gradient_tails": tails,
        "gradient_tail_slope": tail_slope,
        "ep_table": est,
    });
    Ok(Outcome { payload, tables: vec![profile, tail_table], complete: r.converged && cacc_ok })
}

pub fn cmd_perturb(cfg: &RunConfig) -> Result<Outcome, CommandError> {
    let block = cfg.perturb.as_ref().ok_or_else(|| missing("perturb"))?;
    let mut eps = block.eps.values()?;
    // the sweep reports in decreasing eps
    eps.sort_by(|a, b| b.total_cmp(a));
    let g = grid(cfg)?;
    let base = solve_ground_state(&g, cfg.p, &cfg.solver)?;
    let sweep = sweep_perturbed(&g, cfg.p, &block.potential, &eps, &cfg.solver)?;
    let mut table = Table::new("perturb", vec!["eps", "lambda", "residual"]);
    for (e, r) in eps.iter().zip(&sweep) {
        table.push(vec![*e, r.lambda, r.residual]);
    }
    let lambdas: Vec<f64> = sweep.iter().map(|r| r.lambda).collect();
    let payload = json!({
        "unperturbed": summary(&base),
        "eps": eps,
        "results": sweep.iter().map(summary).collect::<Vec<_>>(),
        "nonincreasing": lambdas.windows(2).all(|w| w[1] <= w[0]),
        "above_unperturbed": lambdas.iter().all(|l| *l >= base.lambda),
    });
    Ok(Outcome { payload, tables: vec![table], complete: base.converged && sweep_converged(&sweep) })
}

pub fn cmd_gap(cfg: &RunConfig) -> Result<Outcome, CommandError> {
    let block = cfg.gap.as_ref().ok_or_else(|| missing("gap"))?;
    let ep = cfg.ep.as_ref().ok_or_else(|| missing("ep"))?;
    let settings = GapSettings {
        safety: block.safety,
        no_gap_tolerance: block.no_gap_tolerance,
        radii: ep.radii.clone(),
        windows: ep.windows.clone(),
        piece_window: cfg.half_width(),
        solver: cfg.solver.clone(),
    };
    let report = gap_certificate(&cfg.domain, block.k, cfg.p, cfg.h, &settings)?;
    let complete = report.converged;
    Ok(Outcome { payload: serde_json::to_value(&report).expect("serialisable"), tables: vec![], complete })
}
