use std::io::Read;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use qvolume::bell_tests::{bloch_decompose, first_scan_violations, OptimizerConfig};
use qvolume::estimation::PhaseHits;
use qvolume::partial_transpose::is_ppt;
use qvolume::positivity::{is_psd_newton, newton_coefficients, power_traces};
use qvolume::samplers::{
    hit_and_run_multi, multiphase_estimate, HitAndRunConfig, MultiphaseConfig, WalkState,
};
use qvolume::{make_family, HermitianMatrix, Predicate, RatioEstimate, RngStream, StatePredicate};

use crate::config::{Command, Format, RunConfig, Sampler, SCHEMA_VERSION};
use crate::CliError;

/// Rendered result of one command.
pub struct Artifact(pub String);

pub fn run(cfg: &RunConfig, cancel: Arc<AtomicBool>) -> Result<Artifact, CliError> {
    match cfg.command {
        Command::Ratio => ratio(cfg, cancel),
        Command::Bell => bell(cfg, cancel),
        Command::ScanCurve => scan_curve(cfg, cancel),
        Command::CheckPsd => check_psd(cfg),
        Command::PptCheck => ppt_check(cfg),
        Command::BasisDump => basis_dump(cfg),
    }
}

fn optimizer(cfg: &RunConfig) -> OptimizerConfig {
    OptimizerConfig {
        restarts: cfg.restarts,
        ..OptimizerConfig::default()
    }
}

fn unknown_predicate(name: &str, allowed: &str) -> CliError {
    CliError::Config(format!("unknown predicate `{name}` (choose one of {allowed})"))
}

fn ratio_predicate(cfg: &RunConfig) -> Result<Predicate, CliError> {
    let name = cfg.predicate.as_deref().unwrap_or("ppt");
    let tol = cfg.bell_tol();
    Ok(match name {
        "ppt" => Predicate::Ppt { tol: cfg.psd_tol() },
        "chsh" => Predicate::Chsh { tol },
        "12m" => Predicate::TwelveM { tol },
        "cg" | "cg-opt" => Predicate::CgOptimized { cfg: optimizer(cfg), tol },
        "cg-or-chsh" => Predicate::CgOrChsh { cfg: optimizer(cfg), tol },
        other => return Err(unknown_predicate(other, "ppt, chsh, cg, 12m, cg-or-chsh")),
    })
}

fn bell_predicate(cfg: &RunConfig) -> Result<Predicate, CliError> {
    let name = cfg.predicate.as_deref().unwrap_or("chsh");
    let tol = cfg.bell_tol();
    Ok(match name {
        "chsh" => Predicate::Chsh { tol },
        "12m" => Predicate::TwelveM { tol },
        "cg-body" => Predicate::CgBody { tol },
        "cg-opt" => Predicate::CgOptimized { cfg: optimizer(cfg), tol },
        "cg-scan" => Predicate::CgScan { m: cfg.scan_settings, tol },
        other => return Err(unknown_predicate(other, "chsh, 12m, cg-body, cg-opt, cg-scan")),
    })
}

fn hitrun(
    cfg: &RunConfig,
    predicate: &Predicate,
    cancel: Arc<AtomicBool>,
) -> Result<(RatioEstimate, usize, bool), CliError> {
    let family = make_family(cfg.family_name());
    let hr = HitAndRunConfig {
        cancel: Some(cancel),
        ..HitAndRunConfig::new(cfg.samples, cfg.block_size).with_chains(cfg.chains)
    };
    let mut out = hit_and_run_multi(&family, &[predicate as &dyn StatePredicate], &hr, &RngStream::new(cfg.seed, 0))?;
    let d = &out.diagnostics;
    log::info!(
        "{} steps, {:.3} draws per step, {} degenerate directions",
        d.steps,
        d.mean_draws_per_step(),
        d.degenerate_directions
    );
    if out.cancelled {
        log::warn!("interrupted: reporting the {} completed blocks", out.estimates[0].blocks_or_reps);
    }
    Ok((out.estimates.remove(0), out.chains, out.cancelled))
}

#[derive(Serialize)]
struct RatioReport<'a> {
    schema_version: u32,
    family: &'a str,
    sampler: &'a str,
    predicate: String,
    samples: u64,
    blocks: u64,
    ratio_mean: f64,
    ratio_sigma: f64,
    seed: u64,
    chains: usize,
    wall_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_phase: Option<Vec<PhaseHits>>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    cancelled: bool,
}

fn ratio(cfg: &RunConfig, cancel: Arc<AtomicBool>) -> Result<Artifact, CliError> {
    let predicate = ratio_predicate(cfg)?;
    let started = Instant::now();
    let (est, chains, cancelled) = match cfg.sampler {
        Sampler::Hitrun => hitrun(cfg, &predicate, cancel)?,
        Sampler::Multiphase => {
            let family = make_family(cfg.family_name());
            let mp = MultiphaseConfig::for_family(&family, cfg.samples, cfg.reps, cfg.phases)?;
            log::info!("multiphase with {} phases, {} repetitions", mp.radii.len(), mp.repetitions);
            let est = multiphase_estimate(&family, &predicate, &mp, &RngStream::new(cfg.seed, 0))?;
            (est, cfg.chains, false)
        }
    };
    let wall_seconds = started.elapsed().as_secs_f64();
    log::info!("{:.0} samples/s", est.samples as f64 / wall_seconds.max(1e-9));
    let report = RatioReport {
        schema_version: SCHEMA_VERSION,
        family: cfg.family_name().as_str(),
        sampler: cfg.sampler.as_str(),
        predicate: est.predicate_name.clone(),
        samples: est.samples,
        blocks: est.blocks_or_reps,
        ratio_mean: est.mean,
        ratio_sigma: est.sigma,
        seed: cfg.seed,
        chains,
        wall_seconds,
        per_phase: est.per_phase_hits,
        cancelled,
    };
    Ok(match cfg.format {
        Format::Json => Artifact(to_json(&report)),
        Format::Csv => Artifact(format!(
            "schema_version,family,sampler,predicate,samples,blocks,ratio_mean,ratio_sigma,seed,chains,wall_seconds\n\
             {},{},{},{},{},{},{},{},{},{},{}\n",
            report.schema_version,
            report.family,
            report.sampler,
            report.predicate,
            report.samples,
            report.blocks,
            report.ratio_mean,
            report.ratio_sigma,
            report.seed,
            report.chains,
            report.wall_seconds
        )),
    })
}

#[derive(Serialize)]
struct BellSettings {
    sampler: &'static str,
    seed: u64,
    chains: usize,
    block_size: u64,
    restarts: usize,
    scan_settings: usize,
    tol: f64,
}

#[derive(Serialize)]
struct BellReport<'a> {
    schema_version: u32,
    family: &'a str,
    predicate: String,
    ratio_mean: f64,
    ratio_sigma: f64,
    samples: u64,
    config: BellSettings,
    wall_seconds: f64,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    cancelled: bool,
}

fn bell(cfg: &RunConfig, cancel: Arc<AtomicBool>) -> Result<Artifact, CliError> {
    let predicate = bell_predicate(cfg)?;
    let started = Instant::now();
    let (est, chains, cancelled) = hitrun(cfg, &predicate, cancel)?;
    let report = BellReport {
        schema_version: SCHEMA_VERSION,
        family: cfg.family_name().as_str(),
        predicate: est.predicate_name.clone(),
        ratio_mean: est.mean,
        ratio_sigma: est.sigma,
        samples: est.samples,
        config: BellSettings {
            sampler: Sampler::Hitrun.as_str(),
            seed: cfg.seed,
            chains,
            block_size: cfg.block_size,
            restarts: cfg.restarts,
            scan_settings: cfg.scan_settings,
            tol: cfg.bell_tol(),
        },
        wall_seconds: started.elapsed().as_secs_f64(),
        cancelled,
    };
    Ok(match cfg.format {
        Format::Json => Artifact(to_json(&report)),
        Format::Csv => Artifact(format!(
            "schema_version,family,predicate,ratio_mean,ratio_sigma,samples,seed,chains,block_size,restarts,scan_settings,tol\n\
             {},{},{},{},{},{},{},{},{},{},{},{}\n",
            report.schema_version,
            report.family,
            report.predicate,
            report.ratio_mean,
            report.ratio_sigma,
            report.samples,
            report.config.seed,
            report.config.chains,
            report.config.block_size,
            report.config.restarts,
            report.config.scan_settings,
            report.config.tol
        )),
    })
}

/// `1, 2, 4, ..` below `m_max`, then `m_max`.
pub fn scan_grid(m_max: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = std::iter::successors(Some(1usize), |m| m.checked_mul(2))
        .take_while(|&m| m < m_max)
        .collect();
    grid.push(m_max);
    grid
}

#[derive(Serialize)]
struct ScanRow {
    m: usize,
    r_cg: f64,
    r_chsh: f64,
    r_cg_or_chsh: f64,
}

fn scan_curve(cfg: &RunConfig, cancel: Arc<AtomicBool>) -> Result<Artifact, CliError> {
    let family = make_family(cfg.family_name());
    let grid = scan_grid(cfg.scan_settings);
    let rng = RngStream::new(cfg.seed, 0);
    let mut walk = WalkState::new(&family, rng.sibling(0));
    let mut settings_rng = rng.sibling(1);
    // counts[k] = (cg, chsh, union) for grid[k]
    let mut counts = vec![[0u64; 3]; grid.len()];
    let mut states = 0u64;
    let tol = cfg.bell_tol();
    let report_every = (cfg.samples / 10).max(1);
    for i in 0..cfg.samples {
        if cancel.load(Ordering::Relaxed) {
            log::warn!("interrupted after {states} states");
            break;
        }
        walk.step(cfg.psd_tol())?;
        let rho = HermitianMatrix::from_entries(family.n, walk.matrix().to_vec())?;
        let (chsh, cg) = first_scan_violations(&bloch_decompose(&rho)?, cfg.scan_settings, &mut settings_rng, tol);
        for (c, &m) in counts.iter_mut().zip(&grid) {
            let cg_hit = cg.is_some_and(|k| k < m);
            let chsh_hit = chsh.is_some_and(|k| k < m);
            c[0] += cg_hit as u64;
            c[1] += chsh_hit as u64;
            c[2] += (cg_hit || chsh_hit) as u64;
        }
        states += 1;
        if (i + 1) % report_every == 0 {
            log::info!("{}/{} states scanned", i + 1, cfg.samples);
        }
    }
    if states == 0 {
        return Err(CliError::Core(qvolume::Error::InsufficientStatistics { hits: vec![0] }));
    }
    let rows: Vec<ScanRow> = grid
        .iter()
        .zip(&counts)
        .map(|(&m, c)| ScanRow {
            m,
            r_cg: c[0] as f64 / states as f64,
            r_chsh: c[1] as f64 / states as f64,
            r_cg_or_chsh: c[2] as f64 / states as f64,
        })
        .collect();
    Ok(match cfg.format {
        Format::Csv => {
            let mut s = String::from("m,R_CG,R_CHSH,R_CG+CHSH\n");
            for r in &rows {
                s.push_str(&format!("{},{},{},{}\n", r.m, r.r_cg, r.r_chsh, r.r_cg_or_chsh));
            }
            Artifact(s)
        }
        Format::Json => Artifact(to_json(&serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "family": cfg.family_name().as_str(),
            "samples": states,
            "seed": cfg.seed,
            "rows": rows,
        }))),
    })
}

fn read_matrix(cfg: &RunConfig) -> Result<HermitianMatrix, CliError> {
    let text = match &cfg.input {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?,
        None => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::Config(format!("cannot read standard input: {e}")))?;
            s
        }
    };
    HermitianMatrix::from_text(&text).map_err(|e| CliError::Config(format!("bad matrix input: {e}")))
}

fn check_psd(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let m = read_matrix(cfg)?;
    let n = m.dim();
    let psd = is_psd_newton(&m, cfg.psd_tol()).map_err(|e| CliError::Config(format!("bad matrix input: {e}")))?;
    let coefficients = newton_coefficients(&power_traces(&m, n)?, n)?;
    Ok(Artifact(to_json(&serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "n": n,
        "psd": psd,
        "tol": cfg.psd_tol(),
        "newton_coefficients": coefficients.c,
    }))))
}

fn ppt_check(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let (n_a, n_b) = (cfg.n_a.expect("validated"), cfg.n_b.expect("validated"));
    let m = read_matrix(cfg)?;
    let tol = cfg.psd_tol();
    let state = is_psd_newton(&m, tol).map_err(|e| CliError::Config(format!("bad matrix input: {e}")))?;
    let ppt = is_ppt(&m, n_a, n_b, tol).map_err(|e| CliError::Config(format!("bad matrix input: {e}")))?;
    Ok(Artifact(to_json(&serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "n": m.dim(),
        "n_a": n_a,
        "n_b": n_b,
        "state": state,
        "ppt": ppt,
        "tol": tol,
    }))))
}

fn basis_dump(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let f = make_family(cfg.family_name());
    let generators: Vec<String> = f.subspace_generators.iter().map(HermitianMatrix::to_text).collect();
    Ok(Artifact(to_json(&serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "family": f.name.as_str(),
        "n": f.n,
        "n_a": f.n_a,
        "n_b": f.n_b,
        "d": f.d(),
        "coefficient_scale": f.coefficient_scale,
        "axis_scales": f.axis_scales(),
        "mehta_coordinate_radius": f.mehta_coordinate_radius(),
        "outer_coordinate_radius": f.outer_coordinate_radius(),
        "generators": generators,
    }))))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_geometric_and_ends_at_m() {
        assert_eq!(scan_grid(1), vec![1]);
        assert_eq!(scan_grid(10), vec![1, 2, 4, 8, 10]);
        assert_eq!(scan_grid(16), vec![1, 2, 4, 8, 16]);
    }
}
