//! Experiment drivers. Each driver turns a validated config into one
//! metrics CSV (deterministic), one wall-time CSV, and a JSON manifest.

use super::config::{ExperimentConfig, ExperimentKind};
use super::csvio::{format_real, write_csv, CsvTable};
use crate::empirical::{sup_scaling_diag, FunctionalClass};
use crate::ensemble::{isotropy_check, psi2_estimate, sample_matrix, Ensemble};
use crate::geometry::{gaussian_width, r_star, rstar_closed_form, ClosedFormKind, SetDescriptor};
use crate::polytope::{neighborly_scan, ScanMode, ScanVerdict};
use crate::recover::{
    approx_reconstruct, compressible_signal, exact_recover, SparseVector,
};
use crate::rng::RngState;
use crate::{Error, Result};
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub metrics_path: PathBuf,
    pub times_path: PathBuf,
    pub manifest_path: PathBuf,
}

/// Run one experiment, writing `<kind>.csv`, `<kind>_times.csv` and
/// `<kind>_manifest.json` under `out_dir`. Partial outputs are removed
/// if any stage fails.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentOutput> {
    config.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let name = config.experiment.name();
    let out = ExperimentOutput {
        metrics_path: out_dir.join(format!("{name}.csv")),
        times_path: out_dir.join(format!("{name}_times.csv")),
        manifest_path: out_dir.join(format!("{name}_manifest.json")),
    };
    let run = || -> Result<()> {
        let (metrics, times) = dispatch(config)?;
        write_csv(&metrics, &out.metrics_path)?;
        write_csv(&times, &out.times_path)?;
        let manifest = serde_json::json!({
            "experiment": name,
            "config": config,
            "config_hash": format!("{:016x}", config.hash()),
            "base_seed": config.seed,
            "version": env!("CARGO_PKG_VERSION"),
            "tolerances": {
                "lp_feasibility": crate::lp::FEASIBILITY_TOL,
                "lp_optimality": crate::lp::OPTIMALITY_TOL,
                "exact_success_rel": crate::recover::EXACT_SUCCESS_TOL,
                "face_margin": crate::polytope::MARGIN_THRESHOLD,
            },
        });
        std::fs::write(
            &out.manifest_path,
            serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
        )?;
        Ok(())
    };
    match run() {
        Ok(()) => Ok(out),
        Err(e) => {
            for p in [&out.metrics_path, &out.times_path, &out.manifest_path] {
                let _ = std::fs::remove_file(p);
            }
            Err(e)
        }
    }
}

fn dispatch(config: &ExperimentConfig) -> Result<(CsvTable, CsvTable)> {
    match config.experiment {
        ExperimentKind::EnsembleCheck => ensemble_check(config),
        ExperimentKind::Width => width(config),
        ExperimentKind::Rstar => rstar(config),
        ExperimentKind::Empirical => empirical(config),
        ExperimentKind::Recover => recover(config),
        ExperimentKind::Phase => phase(config),
        ExperimentKind::Neighborly => neighborly(config),
    }
}

fn times_table(config: &ExperimentConfig, rows: Vec<(String, f64)>) -> CsvTable {
    let mut t = CsvTable::new(config.hash(), config.seed, &["row", "wall_ms"]);
    for (row, ms) in rows {
        t.push_row(vec![row, format!("{ms:.3}")]);
    }
    t
}

fn ensemble_check(config: &ExperimentConfig) -> Result<(CsvTable, CsvTable)> {
    let ensemble = Ensemble::of_kind(config.ensemble);
    let mut metrics = CsvTable::new(
        config.hash(),
        config.seed,
        &["direction_index", "empirical_moment", "std_err", "psi2_estimate"],
    );
    let mut times = Vec::new();
    // Canonical directions: the projection onto e_j is the j-th
    // coordinate, so each direction gets its own scalar stream.
    for j in 0..config.n {
        let start = Instant::now();
        let mut rng = RngState::with_stream(config.seed, j as u64);
        let mut dir = vec![0.0; config.n];
        dir[j] = 1.0;
        let report = isotropy_check(&ensemble, config.n, config.samples, &[dir], &mut rng)?;
        let mut scalar_rng = RngState::with_stream(config.seed, (config.n + j) as u64);
        let draws: Vec<f64> = (0..config.samples)
            .map(|_| ensemble.draw(&mut scalar_rng))
            .collect();
        let psi2 = psi2_estimate(&draws)?;
        metrics.push_row(vec![
            j.to_string(),
            format_real(report[0].empirical_moment),
            format_real(report[0].std_err),
            format_real(psi2),
        ]);
        times.push((j.to_string(), start.elapsed().as_secs_f64() * 1e3));
    }
    Ok((metrics, times_table(config, times)))
}

fn width(config: &ExperimentConfig) -> Result<(CsvTable, CsvTable)> {
    let set = config.set.as_ref().unwrap().to_descriptor(config.n)?;
    let start = Instant::now();
    let mut rng = RngState::new(config.seed);
    let est = gaussian_width(&set, config.samples, &mut rng)?;
    let mut metrics = CsvTable::new(
        config.hash(),
        config.seed,
        &["set", "n", "num_samples", "value", "std_err"],
    );
    metrics.push_row(vec![
        config.set.as_ref().unwrap().0.clone(),
        config.n.to_string(),
        est.num_samples.to_string(),
        format_real(est.value),
        format_real(est.std_err),
    ]);
    let times = times_table(
        config,
        vec![("0".into(), start.elapsed().as_secs_f64() * 1e3)],
    );
    Ok((metrics, times))
}

fn rstar(config: &ExperimentConfig) -> Result<(CsvTable, CsvTable)> {
    let set = config.set.as_ref().unwrap().to_descriptor(config.n)?;
    let k = config.k.unwrap();
    let start = Instant::now();
    let mut rng = RngState::new(config.seed);
    let fp = r_star(
        config.theta,
        &set,
        k,
        config.alpha,
        config.c_norm,
        config.samples,
        &mut rng,
    )?;
    let closed = match &set {
        SetDescriptor::L1Ball { .. } => Some(rstar_closed_form(
            config.theta,
            k,
            config.n,
            config.alpha,
            ClosedFormKind::L1,
        )?),
        SetDescriptor::WeakLpBall { p, .. } => Some(rstar_closed_form(
            config.theta,
            k,
            config.n,
            config.alpha,
            ClosedFormKind::WeakLp(*p),
        )?),
        _ => None,
    };
    let mut metrics = CsvTable::new(
        config.hash(),
        config.seed,
        &["set", "n", "k", "theta", "alpha", "c_norm", "rho", "crossed", "closed_form"],
    );
    metrics.push_row(vec![
        config.set.as_ref().unwrap().0.clone(),
        config.n.to_string(),
        k.to_string(),
        format_real(config.theta),
        format_real(config.alpha),
        format_real(config.c_norm),
        format_real(fp.rho),
        fp.crossed.to_string(),
        closed.map_or(String::new(), format_real),
    ]);
    let times = times_table(
        config,
        vec![("0".into(), start.elapsed().as_secs_f64() * 1e3)],
    );
    Ok((metrics, times))
}

fn empirical(config: &ExperimentConfig) -> Result<(CsvTable, CsvTable)> {
    let ensemble = Ensemble::of_kind(config.ensemble);
    let class = FunctionalClass::canonical_basis(config.n);
    let start = Instant::now();
    let mut rng = RngState::new(config.seed);
    let diag = sup_scaling_diag(&class, &ensemble, &config.k_grid, config.trials, &mut rng)?;
    let mut metrics = CsvTable::new(
        config.hash(),
        config.seed,
        &["k", "mean_sup_z", "std_err", "fitted_slope"],
    );
    for p in &diag.points {
        metrics.push_row(vec![
            p.k.to_string(),
            format_real(p.mean_sup_z),
            format_real(p.std_err),
            String::new(),
        ]);
    }
    // Footer row carries the fitted slope.
    metrics.push_row(vec![
        String::new(),
        String::new(),
        String::new(),
        format_real(diag.slope),
    ]);
    let times = times_table(
        config,
        vec![("all".into(), start.elapsed().as_secs_f64() * 1e3)],
    );
    Ok((metrics, times))
}

/// Draw an m-sparse sign vector on a fresh support.
pub(crate) fn random_sign_vector(n: usize, m: usize, rng: &mut RngState) -> SparseVector {
    let idx = rng.choose_indices(n, m);
    SparseVector::new(n, idx.iter().map(|&i| (i, rng.next_sign())).collect())
        .expect("indices are distinct")
}

fn recover(config: &ExperimentConfig) -> Result<(CsvTable, CsvTable)> {
    let ensemble = Ensemble::of_kind(config.ensemble);
    let k = config.k.unwrap();
    let n = config.n;
    match config.mode.as_deref().unwrap() {
        "exact" => {
            let m = config.m.unwrap();
            let results: Result<Vec<_>> = (0..config.trials)
                .into_par_iter()
                .map(|trial| {
                    let start = Instant::now();
                    let mut rng = RngState::new(config.seed + trial as u64);
                    let gamma = sample_matrix(&ensemble, k, n, &mut rng)?;
                    let z = random_sign_vector(n, m, &mut rng);
                    let t = exact_recover(&gamma, &z)?;
                    Ok((trial, t, start.elapsed().as_secs_f64() * 1e3))
                })
                .collect();
            let mut metrics = CsvTable::new(
                config.hash(),
                config.seed,
                &["trial", "outcome", "linf_error", "residual"],
            );
            let mut times = Vec::new();
            for (trial, t, ms) in results? {
                metrics.push_row(vec![
                    trial.to_string(),
                    if t.succeeded() { "success" } else { "failure" }.to_string(),
                    format_real(t.linf_error),
                    format_real(t.residual),
                ]);
                times.push((trial.to_string(), ms));
            }
            Ok((metrics, times_table(config, times)))
        }
        "approx" => {
            let epsilon = config.epsilon.unwrap();
            let set = match &config.set {
                Some(s) => s.to_descriptor(n)?,
                None => SetDescriptor::L1Ball { n, radius: 1.0 },
            };
            let results: Result<Vec<_>> = (0..config.trials)
                .into_par_iter()
                .map(|trial| {
                    let start = Instant::now();
                    let mut rng = RngState::new(config.seed + trial as u64);
                    let gamma = sample_matrix(&ensemble, k, n, &mut rng)?;
                    let v = compressible_signal(n, &mut rng);
                    let y = crate::linalg::apply(&gamma, &v)?;
                    let res = approx_reconstruct(&gamma, &y, &set, epsilon, config.max_iters)?;
                    let err = res
                        .point
                        .iter()
                        .zip(&v)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    Ok((trial, err, res.residual, res.iterations, start.elapsed().as_secs_f64() * 1e3))
                })
                .collect();
            let mut metrics = CsvTable::new(
                config.hash(),
                config.seed,
                &["trial", "l2_error", "residual", "iterations"],
            );
            let mut times = Vec::new();
            for (trial, err, resid, iters, ms) in results? {
                metrics.push_row(vec![
                    trial.to_string(),
                    format_real(err),
                    format_real(resid),
                    iters.to_string(),
                ]);
                times.push((trial.to_string(), ms));
            }
            Ok((metrics, times_table(config, times)))
        }
        other => Err(Error::Config(format!("unknown recover mode '{other}'"))),
    }
}

fn phase(config: &ExperimentConfig) -> Result<(CsvTable, CsvTable)> {
    let ensemble = Ensemble::of_kind(config.ensemble);
    let n = config.n;
    let mut cells = Vec::new();
    for &k in &config.k_grid {
        for &m in &config.m_grid {
            cells.push((k, m));
        }
    }
    let results: Result<Vec<_>> = cells
        .par_iter()
        .map(|&(k, m)| {
            let start = Instant::now();
            let mut successes = 0usize;
            for trial in 0..config.trials {
                // Seed arithmetic keyed by the cell so every (k, m) cell
                // sees an independent, reproducible seed block.
                let cell_seed = config
                    .seed
                    .wrapping_add((k as u64) << 40)
                    .wrapping_add((m as u64) << 24)
                    .wrapping_add(trial as u64);
                let mut rng = RngState::new(cell_seed);
                let gamma = sample_matrix(&ensemble, k, n, &mut rng)?;
                let z = random_sign_vector(n, m, &mut rng);
                if exact_recover(&gamma, &z)?.succeeded() {
                    successes += 1;
                }
            }
            Ok((k, m, successes, start.elapsed().as_secs_f64() * 1e3))
        })
        .collect();
    let mut metrics = CsvTable::new(
        config.hash(),
        config.seed,
        &["k", "m", "successes", "trials", "success_rate"],
    );
    let mut times = Vec::new();
    for (k, m, successes, ms) in results? {
        metrics.push_row(vec![
            k.to_string(),
            m.to_string(),
            successes.to_string(),
            config.trials.to_string(),
            format_real(if config.trials == 0 {
                0.0
            } else {
                successes as f64 / config.trials as f64
            }),
        ]);
        times.push((format!("{k}x{m}"), ms));
    }
    Ok((metrics, times_table(config, times)))
}

fn neighborly(config: &ExperimentConfig) -> Result<(CsvTable, CsvTable)> {
    let ensemble = Ensemble::of_kind(config.ensemble);
    let k = config.k.unwrap();
    let m = config.m.unwrap();
    let mut metrics = CsvTable::new(
        config.hash(),
        config.seed,
        &["seed", "verdict", "counterexample", "queries_checked"],
    );
    let mut times = Vec::new();
    for trial in 0..config.trials {
        let start = Instant::now();
        let seed = config.seed + trial as u64;
        let mut rng = RngState::new(seed);
        let gamma = sample_matrix(&ensemble, k, config.n, &mut rng)?;
        let mode = match config.sampled_queries {
            Some(q) => ScanMode::Sampled {
                num_queries: q,
                seed: seed ^ 0x5eed,
            },
            None => ScanMode::Exhaustive,
        };
        let report = neighborly_scan(&gamma, m, config.symmetric, config.strict_lt, &mode)?;
        let (verdict, counter) = match &report.verdict {
            ScanVerdict::Neighborly => ("neighborly".to_string(), String::new()),
            ScanVerdict::Counterexample(q) => (
                "counterexample".to_string(),
                format!("+{:?} -{:?}", q.i_plus, q.i_minus),
            ),
        };
        metrics.push_row(vec![
            seed.to_string(),
            verdict,
            counter,
            report.queries_checked.to_string(),
        ]);
        times.push((seed.to_string(), start.elapsed().as_secs_f64() * 1e3));
    }
    Ok((metrics, times_table(config, times)))
}
