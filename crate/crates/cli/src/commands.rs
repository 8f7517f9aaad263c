//! One function per subcommand. Each writes its outputs plus `config.echo`
//! into the output directory and returns a short human-readable summary.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use scgarch::io::{
    read_matrix_path_csv, read_panel_csv, write_coeff_path_csv, write_columns_csv, write_garch_params_csv,
    write_key_values, write_matrix_path_csv, write_panel_csv,
};
use scgarch::{
    fit_model, generate_sim1, generate_sim2, loss_paths, moving_block_proxy, select_block_size, ComparisonScale,
    CovariancePath, EvalReport, ModelKind,
};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimKind {
    Sim1,
    Sim2,
}

/// Where `evaluate` gets its reference path.
#[derive(Clone, Debug, PartialEq)]
pub enum TruthSource {
    File(PathBuf),
    /// Moving-block proxy of this panel, width `block_size` from the config.
    MovingBlock(PathBuf),
}

fn pairs(items: &[(&str, String)]) -> Vec<(String, String)> {
    items.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn write_text(path: &Path, lines: &[String]) -> CliResult<()> {
    let io = |e: std::io::Error| scgarch::Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, lines.join("\n") + "\n").map_err(io)?;
    Ok(())
}

/// Settings as `key = value` lines, followed by run facts (inputs, derived
/// counts) as comments so the file can be passed back with `--config`.
fn write_echo(out: &Path, cfg: &RunConfig, facts: &[(&str, String)]) -> CliResult<()> {
    let mut lines: Vec<String> = cfg.echo().iter().map(|(k, v)| format!("{k} = {v}")).collect();
    lines.extend(facts.iter().map(|(k, v)| format!("# {k}: {v}")));
    write_text(&out.join("config.echo"), &lines)
}

pub fn simulate(kind: SimKind, cfg: &RunConfig, out: &Path) -> CliResult<String> {
    let mut cfg = cfg.clone();
    match kind {
        SimKind::Sim1 => {
            let sim = cfg.sim1_config();
            cfg.n = Some(sim.n);
            let data = generate_sim1::<f64>(&sim)?;
            write_panel_csv(out.join("panel.csv"), &data.panel()?)?;
            write_columns_csv(
                out.join("sim1.csv"),
                &["y", "x", "phi_true"],
                &[&data.y, &data.x, &data.phi_true],
            )?;
            write_echo(out, &cfg, &[("kind", "sim1".into())])?;
            Ok(format!("sim1: {} rows written to {}", sim.n, out.display()))
        }
        SimKind::Sim2 => {
            let sim = cfg.sim2_config();
            cfg.n = Some(sim.n);
            let data = generate_sim2::<f64>(&sim)?;
            write_panel_csv(out.join("panel.csv"), &data.panel)?;
            write_matrix_path_csv(out.join("truth_cov.csv"), &data.truth)?;
            write_echo(out, &cfg, &[("kind", "sim2".into()), ("pd_repairs", data.repairs.to_string())])?;
            Ok(format!(
                "sim2: {} rows, {} PD repairs, written to {}",
                sim.n,
                data.repairs,
                out.display()
            ))
        }
    }
}

pub fn fit(panel_path: &Path, cfg: &RunConfig, out: &Path) -> CliResult<String> {
    let panel = read_panel_csv::<f64>(panel_path)?;
    let fit = fit_model(&panel, cfg.model, &cfg.scgarch_config())?;
    write_matrix_path_csv(out.join("cov_path.csv"), &fit.cov_path)?;
    write_matrix_path_csv(out.join("corr_path.csv"), &fit.cov_path.to_correlation()?)?;
    write_coeff_path_csv(out.join("coeff_path.csv"), &fit.cholesky)?;
    write_garch_params_csv(out.join("garch_params.csv"), &fit.labels, &fit.garch_fits)?;
    let ordering: Vec<String> = fit.ordering.iter().map(|&k| panel.labels()[k].clone()).collect();
    write_text(&out.join("ordering.txt"), &ordering)?;
    let state_noise: Vec<String> = fit.state_noise.iter().map(f64::to_string).collect();
    let summary = pairs(&[
        ("model", fit.model.name().into()),
        ("n", fit.n().to_string()),
        ("p", fit.p().to_string()),
        ("ordering", ordering.join(",")),
        ("total_loglik", fit.total_loglik.to_string()),
        ("bic", fit.bic().to_string()),
        ("all_converged", fit.all_converged().to_string()),
        ("state_noise", state_noise.join(",")),
    ]);
    write_key_values(out.join("summary.txt"), &summary)?;
    write_echo(out, cfg, &[("panel", panel_path.display().to_string())])?;
    let mut msg = format!(
        "{} fit: n = {}, p = {}, total loglik = {}, BIC = {}",
        fit.model.name(),
        fit.n(),
        fit.p(),
        fit.total_loglik,
        fit.bic()
    );
    if !fit.all_converged() {
        msg.push_str("\nwarning: at least one GARCH fit did not converge");
    }
    Ok(msg)
}

fn write_eval_csv(path: &Path, report: &EvalReport<f64>) -> CliResult<()> {
    let mut lines = vec!["t,mae,mse".to_string()];
    for (t, (a, s)) in report.mae_path.iter().zip(&report.mse_path).enumerate() {
        lines.push(format!(
            "{},{},{}",
            t + 1,
            scgarch::io::format_value(*a),
            scgarch::io::format_value(*s)
        ));
    }
    lines.push(format!(
        "mean,{},{}",
        scgarch::io::format_value(report.mae),
        scgarch::io::format_value(report.mse)
    ));
    write_text(path, &lines)
}

pub fn evaluate(estimate_path: &Path, truth: &TruthSource, cfg: &RunConfig, out: &Path) -> CliResult<String> {
    let estimate = read_matrix_path_csv::<f64>(estimate_path)?;
    let (reference, source): (CovariancePath<f64>, Vec<(&str, String)>) = match truth {
        TruthSource::File(p) => (
            read_matrix_path_csv(p)?,
            vec![("truth_source", "file".into()), ("truth", p.display().to_string())],
        ),
        TruthSource::MovingBlock(p) => {
            let panel = read_panel_csv::<f64>(p)?;
            (
                moving_block_proxy(&panel, cfg.block_size)?,
                vec![
                    ("truth_source", "moving-block".into()),
                    ("truth", p.display().to_string()),
                    ("block_size_used", cfg.block_size.to_string()),
                ],
            )
        }
    };
    let report = loss_paths(&estimate, &reference, cfg.scale)?;
    write_eval_csv(&out.join("eval.csv"), &report)?;
    let mut summary = source.clone();
    summary.push(("scale", cfg.scale.name().into()));
    summary.push(("mae", report.mae.to_string()));
    summary.push(("mse", report.mse.to_string()));
    write_key_values(out.join("eval_summary.txt"), &pairs(&summary))?;
    let mut echo = source;
    echo.push(("estimate", estimate_path.display().to_string()));
    write_echo(out, cfg, &echo)?;
    Ok(format!("MAE = {}\nMSE = {}", report.mae, report.mse))
}

pub fn select_block(panel_path: &Path, cfg: &RunConfig, out: &Path) -> CliResult<String> {
    let panel = read_panel_csv::<f64>(panel_path)?;
    let sel = select_block_size(&panel, &cfg.candidates, cfg.threshold)?;
    let opt = |v: Option<f64>| v.map_or(String::new(), scgarch::io::format_value);
    let mut lines = vec!["q,mae,mse,diff_mae,diff_mse".to_string()];
    for row in &sel.table {
        lines.push(format!(
            "{},{},{},{},{}",
            row.q,
            scgarch::io::format_value(row.mae),
            scgarch::io::format_value(row.mse),
            opt(row.diff_mae),
            opt(row.diff_mse)
        ));
    }
    write_text(&out.join("block_selection.csv"), &lines)?;
    write_key_values(
        out.join("block_summary.txt"),
        &pairs(&[
            ("q_star", sel.q_star.to_string()),
            ("stable", sel.stable.to_string()),
            ("threshold", sel.threshold.to_string()),
        ]),
    )?;
    write_echo(out, cfg, &[("panel", panel_path.display().to_string())])?;
    let mut msg = format!("q* = {}", sel.q_star);
    if !sel.stable {
        msg.push_str("\nwarning: no candidate met the stabilization rule; the largest was returned");
    }
    Ok(msg)
}

/// Loss of one model in one replication, or why it failed.
#[derive(Clone, Debug)]
pub struct ReplicationRow {
    pub replication: usize,
    pub seed: u64,
    pub model: ModelKind,
    pub outcome: Result<[(f64, f64); 2], String>,
}

/// Mean losses of one model on one scale.
#[derive(Clone, Debug, PartialEq)]
pub struct LeagueRow {
    pub model: ModelKind,
    pub scale: ComparisonScale,
    pub mean_mse: f64,
    pub mean_mae: f64,
    pub replications: usize,
    pub failures: usize,
}

const MODELS: [ModelKind; 2] = [ModelKind::Scgarch, ModelKind::Cgarch];
const SCALES: [ComparisonScale; 2] = [ComparisonScale::Covariance, ComparisonScale::Correlation];

fn run_replication(cfg: &RunConfig, rep: usize) -> Vec<ReplicationRow> {
    let seed = scgarch::simgen::replication_seed(cfg.seed, rep);
    let sim = scgarch::Sim2Config { seed, ..cfg.sim2_config() };
    let model_cfg = cfg.scgarch_config();
    let data = generate_sim2::<f64>(&sim);
    MODELS
        .iter()
        .map(|&model| {
            let outcome = data.as_ref().map_err(|e| e.to_string()).and_then(|data| {
                let fit = fit_model(&data.panel, model, &model_cfg).map_err(|e| e.to_string())?;
                let mut losses = [(0.0, 0.0); 2];
                for (slot, &scale) in losses.iter_mut().zip(&SCALES) {
                    let r = loss_paths(&fit.cov_path, &data.truth, scale).map_err(|e| e.to_string())?;
                    *slot = (r.mae, r.mse);
                }
                Ok(losses)
            });
            ReplicationRow {
                replication: rep,
                seed,
                model,
                outcome,
            }
        })
        .collect()
}

pub fn league_table(rows: &[ReplicationRow]) -> Vec<LeagueRow> {
    let mut out = Vec::new();
    for &model in &MODELS {
        let mine: Vec<_> = rows.iter().filter(|r| r.model == model).collect();
        let ok: Vec<[(f64, f64); 2]> = mine.iter().filter_map(|r| r.outcome.clone().ok()).collect();
        for (k, &scale) in SCALES.iter().enumerate() {
            let m = ok.len().max(1) as f64;
            out.push(LeagueRow {
                model,
                scale,
                mean_mae: ok.iter().map(|l| l[k].0).sum::<f64>() / m,
                mean_mse: ok.iter().map(|l| l[k].1).sum::<f64>() / m,
                replications: ok.len(),
                failures: mine.len() - ok.len(),
            });
        }
    }
    out
}

pub fn benchmark(cfg: &RunConfig, out: &Path) -> CliResult<String> {
    if cfg.replications == 0 {
        return Err(CliError::Config("replications must be at least 1".into()));
    }
    let mut cfg = cfg.clone();
    cfg.n = Some(cfg.sim2_config().n);
    let rows: Vec<ReplicationRow> = (0..cfg.replications)
        .into_par_iter()
        .flat_map_iter(|rep| run_replication(&cfg, rep))
        .collect();

    let mut lines = vec!["replication,seed,model,status,cov_mae,cov_mse,corr_mae,corr_mse".to_string()];
    for r in &rows {
        let body = match &r.outcome {
            Ok([(cm, cs), (rm, rs)]) => format!("ok,{cm:.10e},{cs:.10e},{rm:.10e},{rs:.10e}"),
            Err(e) => format!("\"failed: {}\",,,,", e.replace('"', "'")),
        };
        lines.push(format!("{},{},{},{}", r.replication + 1, r.seed, r.model.name(), body));
    }
    let league = league_table(&rows);
    let mut table = vec!["model,scale,mean_mse,mean_mae,replications,failures".to_string()];
    for l in &league {
        table.push(format!(
            "{},{},{:.10e},{:.10e},{},{}",
            l.model.name(),
            l.scale.name(),
            l.mean_mse,
            l.mean_mae,
            l.replications,
            l.failures
        ));
    }
    write_text(&out.join("replications.csv"), &lines)?;
    write_text(&out.join("league.csv"), &table)?;
    write_echo(out, &cfg, &[])?;

    let failed_reps = (0..cfg.replications)
        .filter(|&rep| rows.iter().any(|r| r.replication == rep && r.outcome.is_err()))
        .count();
    if failed_reps == cfg.replications {
        return Err(CliError::BenchmarkFailed { total: cfg.replications });
    }
    let msg = table.join("\n");
    if failed_reps > 0 {
        eprintln!("{msg}");
        return Err(CliError::PartialBenchmark {
            failed: failed_reps,
            total: cfg.replications,
        });
    }
    Ok(msg)
}
