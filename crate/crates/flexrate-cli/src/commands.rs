//! The four subcommands: evaluate, sweep, recommend, validate.

use crate::config::{ConfigError, Resolved};
use crate::report::{fmt_sig9, render_csv, CsvRow};
use flexrate_core::blockage::{BodyGeometry, Deployment};
use flexrate_core::channel::EnvironmentParams;
use flexrate_core::error::Error as CoreError;
use flexrate_core::rate::{
    channel_expectations, expected_rate, recommend, ChannelExpectations, RateMode, RateReport,
    ScenarioCase,
};
use flexrate_core::radio::EfficiencyModel;
use flexrate_core::timebase::TimeMs;
use flexrate_core::validation::{run_validation, CheckStatus};
use rayon::prelude::*;
use std::io::Write;
use std::path::Path;

/// Exit codes: 0 success, 1 validation failure, 2 configuration error,
/// 3 numerical error.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Validation(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Validation(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

/// Core errors reached from a resolved configuration: numerical failures map
/// to exit 3, anything else was induced by the configured values (exit 2).
fn core_to_cli(e: CoreError) -> CliError {
    match e {
        CoreError::Numerical { .. } => CliError::Numerical(e.to_string()),
        _ => CliError::Config(e.to_string()),
    }
}

fn build_case(
    resolved: &Resolved,
    env: &EnvironmentParams,
    body: &BodyGeometry,
    distance_m: f64,
) -> Result<ScenarioCase, CliError> {
    Ok(ScenarioCase {
        environment: env.clone(),
        body: *body,
        deployment: Deployment::new(resolved.ap_height_m, distance_m).map_err(core_to_cli)?,
        budget: resolved.budget,
        delta_t: resolved.delta_t,
        mu_candidates: resolved.mu_candidates.clone(),
        tau_candidates: resolved.tau_candidates.clone(),
        m_rounding: resolved.m_rounding,
    })
}

/// Rows of one scenario cell at one scheduling interval: every candidate
/// numerology, with the group argmax of the configured metric flagged.
#[allow(clippy::too_many_arguments)]
fn cell_rows(
    resolved: &Resolved,
    model: &EfficiencyModel,
    env: &EnvironmentParams,
    scenario: &str,
    body: &BodyGeometry,
    distance_m: f64,
    expectations: &ChannelExpectations,
    tau: TimeMs,
    mode: RateMode,
) -> Result<Vec<CsvRow>, CliError> {
    let case = build_case(resolved, env, body, distance_m)?;
    let mut reports: Vec<RateReport> = Vec::new();
    for &mu in &resolved.mu_candidates {
        reports.push(expected_rate(&case, expectations, model, mu, tau).map_err(core_to_cli)?);
    }
    let best = reports
        .iter()
        .map(|r| mode.metric(r))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(reports
        .iter()
        .map(|r| {
            CsvRow::from_report(
                &env.name,
                scenario,
                distance_m,
                r,
                mode.metric(r) == best,
            )
        })
        .collect())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_evaluate(
    resolved: &Resolved,
    env_name: &str,
    scenario_name: &str,
    distance_m: f64,
    mu: u8,
    tau_ms: f64,
    mode: RateMode,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let model = resolved.efficiency_model().map_err(core_to_cli)?;
    let env = resolved.environment(env_name)?.clone();
    let body = *resolved.scenario(scenario_name)?;
    let tau = TimeMs::from_ms_f64(tau_ms)
        .map_err(|e| CliError::Config(format!("tau_ms: {e}")))?;
    let case = build_case(resolved, &env, &body, distance_m)?;

    // the requested pair must satisfy the xi integrality precondition
    let numerology = flexrate_core::radio::numerology_lookup(mu).map_err(core_to_cli)?;
    tau.exact_multiple_of(&numerology.tti).map_err(|e| {
        CliError::Config(format!(
            "slots-per-interval (xi) integrality for (mu={mu}, tau={tau}): {e}"
        ))
    })?;

    let expectations = channel_expectations(&case, &resolved.quad).map_err(core_to_cli)?;
    let report = expected_rate(&case, &expectations, &model, mu, tau).map_err(core_to_cli)?;

    // flag against the candidate numerologies at this interval
    let mut best = RateMode::metric(&mode, &report);
    for &m in &resolved.mu_candidates {
        if tau.exact_multiple_of(&flexrate_core::radio::numerology_lookup(m).unwrap().tti).is_ok() {
            if let Ok(r) = expected_rate(&case, &expectations, &model, m, tau) {
                best = best.max(mode.metric(&r));
            }
        }
    }
    let row = CsvRow::from_report(
        &env.name,
        scenario_name,
        distance_m,
        &report,
        mode.metric(&report) == best,
    );
    write!(out, "{}", render_csv(std::slice::from_ref(&row)))
        .map_err(|e| CliError::Config(format!("write failed: {e}")))?;
    Ok(())
}

/// One scenario cell of the sweep grid with its precomputed expectations.
struct Cell {
    env: EnvironmentParams,
    scenario: String,
    body: BodyGeometry,
    distance_m: f64,
    expectations: ChannelExpectations,
}

fn compute_cells(
    resolved: &Resolved,
    environments: &[EnvironmentParams],
) -> Result<Vec<Cell>, CliError> {
    let combos: Vec<(EnvironmentParams, String, BodyGeometry, f64)> = environments
        .iter()
        .flat_map(|env| {
            resolved.scenarios.iter().flat_map(move |(name, body)| {
                resolved
                    .distances_m
                    .iter()
                    .map(move |&d| (env.clone(), name.clone(), *body, d))
            })
        })
        .collect();
    combos
        .into_par_iter()
        .map(|(env, scenario, body, distance_m)| {
            let case = build_case(resolved, &env, &body, distance_m)?;
            let expectations =
                channel_expectations(&case, &resolved.quad).map_err(core_to_cli)?;
            Ok(Cell {
                env,
                scenario,
                body,
                distance_m,
                expectations,
            })
        })
        .collect()
}

fn sweep_rows(
    resolved: &Resolved,
    model: &EfficiencyModel,
    cells: &[Cell],
    taus: &[TimeMs],
    mode: RateMode,
) -> Result<Vec<CsvRow>, CliError> {
    let mut rows = Vec::new();
    for cell in cells {
        for &tau in taus {
            rows.extend(cell_rows(
                resolved,
                model,
                &cell.env,
                &cell.scenario,
                &cell.body,
                cell.distance_m,
                &cell.expectations,
                tau,
                mode,
            )?);
        }
    }
    rows.sort_by_key(|r| r.sort_key());
    Ok(rows)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

/// Emits `fig4.csv` (single interval, all environments) and `fig5.csv`
/// (interval comparison, car-park environment) into the output directory.
pub fn cmd_sweep(resolved: &Resolved, out_dir: &Path, mode: RateMode) -> Result<(), CliError> {
    let model = resolved.efficiency_model().map_err(core_to_cli)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out_dir.display())))?;

    let all_cells = compute_cells(resolved, &resolved.environments)?;
    let fig4 = sweep_rows(resolved, &model, &all_cells, &[resolved.fig4_tau], mode)?;
    write_file(&out_dir.join("fig4.csv"), &render_csv(&fig4))?;

    // interval comparison in the harsher outdoor environment
    let fig5_env = resolved
        .environments
        .iter()
        .find(|e| e.name == "car_park")
        .unwrap_or_else(|| resolved.environments.last().expect("non-empty"));
    let fig5_cells: Vec<&Cell> = all_cells
        .iter()
        .filter(|c| c.env.name == fig5_env.name)
        .collect();
    let mut fig5 = Vec::new();
    for cell in fig5_cells {
        for &tau in &resolved.tau_candidates {
            fig5.extend(cell_rows(
                resolved,
                &model,
                &cell.env,
                &cell.scenario,
                &cell.body,
                cell.distance_m,
                &cell.expectations,
                tau,
                mode,
            )?);
        }
    }
    fig5.sort_by_key(|r| r.sort_key());
    write_file(&out_dir.join("fig5.csv"), &render_csv(&fig5))?;

    println!(
        "wrote {} ({} rows) and {} ({} rows)",
        out_dir.join("fig4.csv").display(),
        fig4.len(),
        out_dir.join("fig5.csv").display(),
        fig5.len()
    );
    Ok(())
}

/// Reference best configurations for the default grid: (environment,
/// scenario, distance, mu, tau_ms).
pub const EXPECTED_BEST: [(&str, &str, f64, u8, f64); 8] = [
    ("office", "hand", 1.0, 2, 5.0),
    ("office", "hand", 10.0, 2, 5.0),
    ("office", "pocket", 1.0, 2, 5.0),
    ("office", "pocket", 10.0, 2, 5.0),
    ("car_park", "hand", 1.0, 2, 5.0),
    ("car_park", "hand", 10.0, 4, 0.25),
    ("car_park", "pocket", 1.0, 4, 0.25),
    ("car_park", "pocket", 10.0, 4, 0.25),
];

fn expected_best(env: &str, scenario: &str, distance_m: f64) -> Option<(u8, f64)> {
    EXPECTED_BEST
        .iter()
        .find(|(e, s, d, _, _)| *e == env && *s == scenario && *d == distance_m)
        .map(|&(_, _, _, mu, tau)| (mu, tau))
}

/// Ranks every candidate per scenario cell, writes `recommend.csv`, prints
/// an aligned table, and compares each cell against the embedded reference
/// recommendations (MATCH/MISMATCH with the rate gap).
pub fn cmd_recommend(
    resolved: &Resolved,
    out_dir: &Path,
    mode: RateMode,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let model = resolved.efficiency_model().map_err(core_to_cli)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out_dir.display())))?;

    let mut combos = Vec::new();
    for env in &resolved.environments {
        for (scenario, body) in &resolved.scenarios {
            for &d in &resolved.distances_m {
                combos.push((env.clone(), scenario.clone(), *body, d));
            }
        }
    }
    let recommendations: Vec<_> = combos
        .par_iter()
        .map(|(env, _scenario, body, d)| {
            let case = build_case(resolved, env, body, *d)?;
            recommend(&case, &model, &resolved.quad, mode).map_err(core_to_cli)
        })
        .collect::<Result<_, _>>()?;

    let mut csv = String::from(
        "environment,scenario,d_A_m,best_mu,best_tau_ms,rate_mbps,expected_mu,expected_tau_ms,verdict\n",
    );
    writeln!(
        out,
        "{:<10} {:<8} {:>7}  {:<16} {:>14}  {:<16} {:<10}",
        "env", "scenario", "d_A[m]", "best", "rate[Mbps]", "expected", "verdict"
    )
    .ok();
    let mut matches = 0usize;
    let mut with_expectation = 0usize;
    for ((env, scenario, _body, d), rec) in combos.iter().zip(&recommendations) {
        let best = format!("mu={} tau={}ms", rec.best_mu, rec.best_tau.as_f64());
        let rate_mbps = rec.best_rate_bps / 1e6;
        let (expected_str, verdict, gap) = match expected_best(&env.name, scenario, *d) {
            Some((emu, etau)) => {
                with_expectation += 1;
                let hit = rec.best_mu == emu && rec.best_tau.as_f64() == etau;
                if hit {
                    matches += 1;
                    (format!("mu={emu} tau={etau}ms"), "MATCH".to_string(), None)
                } else {
                    // rate gap between the computed best and the expected cell
                    let expected_rate = rec
                        .ranked
                        .iter()
                        .find(|r| r.mu == emu && r.tau.as_f64() == etau)
                        .map(|r| mode.metric(r) / 1e6);
                    (
                        format!("mu={emu} tau={etau}ms"),
                        "MISMATCH".to_string(),
                        expected_rate.map(|er| rate_mbps - er),
                    )
                }
            }
            None => ("-".to_string(), "N/A".to_string(), None),
        };
        let gap_note = gap
            .map(|g| format!(" (gap {} Mbps)", fmt_sig9(g)))
            .unwrap_or_default();
        writeln!(
            out,
            "{:<10} {:<8} {:>7}  {:<16} {:>14.3}  {:<16} {:<10}{}",
            env.name, scenario, d, best, rate_mbps, expected_str, verdict, gap_note
        )
        .ok();
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            env.name,
            scenario,
            fmt_sig9(*d),
            rec.best_mu,
            fmt_sig9(rec.best_tau.as_f64()),
            fmt_sig9(rate_mbps),
            expected_best(&env.name, scenario, *d)
                .map(|(m, _)| m.to_string())
                .unwrap_or_else(|| "-".into()),
            expected_best(&env.name, scenario, *d)
                .map(|(_, t)| fmt_sig9(t))
                .unwrap_or_else(|| "-".into()),
            verdict
        ));
    }
    write_file(&out_dir.join("recommend.csv"), &csv)?;
    if with_expectation > 0 {
        writeln!(
            out,
            "reference agreement: {matches}/{with_expectation} cells (rate mode: {})",
            mode.label()
        )
        .ok();
    }
    Ok(())
}

/// Runs the cross-check suite and prints one line per check; any failed
/// check makes the command exit 1.
pub fn cmd_validate(resolved: &Resolved, out: &mut impl Write) -> Result<(), CliError> {
    let setup = resolved.validation_setup();
    let report = run_validation(&setup);
    for c in &report.checks {
        writeln!(
            out,
            "{:<7} {:<32} measured={:<12} threshold={:<12} {}",
            c.status.label(),
            c.name,
            fmt_sig9(c.measured),
            fmt_sig9(c.threshold),
            c.detail
        )
        .ok();
    }
    let failed: Vec<String> = report.failures().map(|c| c.name.clone()).collect();
    let skipped = report
        .checks
        .iter()
        .filter(|c| c.status == CheckStatus::Skipped)
        .count();
    let passed = report
        .checks
        .iter()
        .filter(|c| c.status == CheckStatus::Pass)
        .count();
    writeln!(
        out,
        "validation: {passed} passed, {} failed, {skipped} skipped",
        failed.len()
    )
    .ok();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}
