//! Implementations of the CLI subcommands. Each returns the process exit
//! code: 0 on success, 1 for verification failures, 2 for domain errors
//! such as orthogonal post-selection.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use num_complex::Complex;

use qeraser_core::bloch::weak_argument_geometric;
use qeraser_core::experiment::{
    bruteforce_p13, derive_seed, estimate_visibility_phase, fit_purity, montecarlo_at, run_figure2,
    run_figure3, sample_counts, uniform_xi_grid, ScenarioPreset, ScenarioSpec, Snr,
    VisibilityPoint,
};
use qeraser_core::protocol::{visibility_closed_form, ProtocolConfig};
use qeraser_core::qmath::{bloch_from_state, pauli_along, BlochVector, CMat2, PureState};
use qeraser_core::values::{modular_value, weak_value, ComplexValue, ValueError};
use qeraser_core::verify;

use crate::output::{csv_table, fmt_float, RunManifest};
use crate::scenario::spec_lines;

fn ensure_out_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))
}

// ---------------------------------------------------------------------------
// weak-value
// ---------------------------------------------------------------------------

pub struct WeakValueInputs {
    /// Pauli axis, when the observable is sigma_n.
    pub axis: Option<BlochVector<f64>>,
    /// Explicit Hermitian entries, row major.
    pub matrix: Option<CMat2<f64>>,
    pub psi_i: PureState<f64>,
    pub psi_f: PureState<f64>,
    pub g: f64,
}

/// Parses "x" | "y" | "z" | "nx,ny,nz" into a unit direction.
pub fn parse_axis(text: &str) -> Result<BlochVector<f64>> {
    let v = match text.trim() {
        "x" => BlochVector::x_axis(),
        "y" => BlochVector::y_axis(),
        "z" => BlochVector::z_axis(),
        other => {
            let parts: Vec<f64> = other
                .split(',')
                .map(|p| p.trim().parse::<f64>().context("invalid axis component"))
                .collect::<Result<_>>()?;
            if parts.len() != 3 {
                bail!("axis '{other}' must be x, y, z or three comma-separated components");
            }
            BlochVector::new(parts[0], parts[1], parts[2])
        }
    };
    v.normalized()
        .map_err(|_| anyhow::anyhow!("axis has vanishing norm"))
}

/// Parses "re0,im0,re1,im1" into a normalized state.
pub fn parse_state(text: &str) -> Result<PureState<f64>> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>().context("invalid amplitude"))
        .collect::<Result<_>>()?;
    if parts.len() != 4 {
        bail!("state '{text}' must be four comma-separated reals re0,im0,re1,im1");
    }
    PureState::new(
        Complex::new(parts[0], parts[1]),
        Complex::new(parts[2], parts[3]),
    )
    .map_err(|e| anyhow::anyhow!("invalid state: {e}"))
}

/// Parses eight comma-separated reals as a row-major complex 2x2 matrix.
pub fn parse_matrix(text: &str) -> Result<CMat2<f64>> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>().context("invalid matrix entry"))
        .collect::<Result<_>>()?;
    if parts.len() != 8 {
        bail!("observable must be eight comma-separated reals (re,im per entry, row major)");
    }
    Ok(CMat2::from_rows(
        [
            Complex::new(parts[0], parts[1]),
            Complex::new(parts[2], parts[3]),
        ],
        [
            Complex::new(parts[4], parts[5]),
            Complex::new(parts[6], parts[7]),
        ],
    ))
}

fn print_value(label: &str, value: &ComplexValue<f64>) {
    println!("{label} = {} {}", fmt_float(value.re), fmt_float(value.im));
    println!(
        "{label}_polar = {} {}",
        fmt_float(value.modulus),
        fmt_float(value.argument)
    );
}

/// Computes and prints the weak and modular values in rectangular and
/// polar form, plus the geometric argument for the Pauli case.
pub fn cmd_weak_value(inputs: &WeakValueInputs) -> Result<i32> {
    let (observable, modular_generator) = match (&inputs.axis, &inputs.matrix) {
        (Some(axis), None) => {
            let sigma = pauli_along(axis).map_err(|e| anyhow::anyhow!("{e}"))?;
            println!(
                "observable = sigma_n, n = ({}, {}, {})",
                fmt_float(axis.x),
                fmt_float(axis.y),
                fmt_float(axis.z)
            );
            // Qubit convention: the gate applies exp(-i (g/2) sigma_n).
            (sigma, sigma.scale(Complex::new(0.5, 0.0)))
        }
        (None, Some(matrix)) => {
            println!("observable = explicit matrix {:?}", matrix.e);
            (*matrix, *matrix)
        }
        _ => bail!("exactly one of --n or --obs must be given"),
    };
    println!("g = {}", fmt_float(inputs.g));

    let a_w = match weak_value(&observable, &inputs.psi_i, &inputs.psi_f) {
        Ok(v) => v,
        Err(ValueError::OrthogonalPostselection) => {
            eprintln!(
                "error: orthogonal post-selection (<psi_f|psi_i> is below the overlap guard)"
            );
            return Ok(2);
        }
        Err(e) => bail!("{e}"),
    };
    let a_m = modular_value(&modular_generator, inputs.g, &inputs.psi_i, &inputs.psi_f)
        .map_err(|e| anyhow::anyhow!("{e}"))?;

    print_value("A_w", &a_w);
    print_value("A_m", &a_m);

    if let Some(axis) = &inputs.axis {
        let i = bloch_from_state(&inputs.psi_i);
        let f = bloch_from_state(&inputs.psi_f);
        match weak_argument_geometric(&i, axis, &f) {
            Ok(arg) => println!("geometric_arg = {}", fmt_float(arg)),
            Err(e) => println!("geometric_arg = undefined ({e})"),
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// figure2 / figure3
// ---------------------------------------------------------------------------

fn setup_names(spec: &ScenarioSpec<f64>, stem: &str) -> Vec<String> {
    match spec.preset {
        ScenarioPreset::Custom => vec![format!("{stem}_custom.csv")],
        _ => (1..=3).map(|k| format!("{stem}_theta{k}.csv")).collect(),
    }
}

pub fn cmd_figure2(spec: &ScenarioSpec<f64>, out: &Path) -> Result<i32> {
    ensure_out_dir(out)?;
    let tables = run_figure2(spec).map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut manifest = RunManifest::new("figure2", spec.seed, spec_lines(spec));
    for (table, name) in tables.iter().zip(setup_names(spec, "figure2")) {
        let csv = csv_table(
            "alpha_rad,V_theory,V_sampled,arg_rad,criterion",
            &table.rows,
            |row| {
                format!(
                    "{},{},{},{},{}",
                    fmt_float(row.alpha),
                    fmt_float(row.v_theory),
                    fmt_float(row.v_sampled),
                    fmt_float(row.arg_rad),
                    fmt_float(row.criterion),
                )
            },
        );
        let path = manifest.write_output(out, &name, &csv)?;
        println!("wrote {}", path.display());
    }
    let path = manifest.write(out)?;
    println!("wrote {}", path.display());
    Ok(0)
}

pub fn cmd_figure3(spec: &ScenarioSpec<f64>, out: &Path) -> Result<i32> {
    ensure_out_dir(out)?;
    let tables = run_figure3(spec).map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut manifest = RunManifest::new("figure3", spec.seed, spec_lines(spec));
    for (table, name) in tables.iter().zip(setup_names(spec, "figure3")) {
        let csv = csv_table(
            "alpha_rad,wv_exact,wv_polar,wv_weakapprox",
            &table.rows,
            |row| {
                format!(
                    "{},{},{},{}",
                    fmt_float(row.alpha),
                    fmt_float(row.wv_exact),
                    fmt_float(row.wv_polar),
                    fmt_float(row.wv_weakapprox),
                )
            },
        );
        let path = manifest.write_output(out, &name, &csv)?;
        println!("wrote {}", path.display());
    }
    let path = manifest.write(out)?;
    println!("wrote {}", path.display());
    Ok(0)
}

// ---------------------------------------------------------------------------
// montecarlo
// ---------------------------------------------------------------------------

pub struct MonteCarloArgs {
    pub theta: f64,
    pub purity: f64,
    pub alpha: f64,
    pub trials: usize,
    pub counts: u64,
    pub seed: u64,
}

pub fn cmd_montecarlo(args: &MonteCarloArgs, out: &Path) -> Result<i32> {
    ensure_out_dir(out)?;
    let report = montecarlo_at::<f64>(
        args.theta,
        args.purity,
        args.alpha,
        args.trials,
        args.counts,
        args.seed,
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;

    let lines = vec![
        ("theta".into(), fmt_float(args.theta)),
        ("p_m".into(), fmt_float(args.purity)),
        ("alpha".into(), fmt_float(args.alpha)),
        ("trials".into(), args.trials.to_string()),
        ("counts_per_setting".into(), args.counts.to_string()),
        ("seed".into(), args.seed.to_string()),
    ];
    let mut manifest = RunManifest::new("montecarlo", args.seed, lines);

    let rows: Vec<(usize, f64, f64)> = report
        .v_hats
        .iter()
        .zip(&report.n23_fractions)
        .enumerate()
        .map(|(k, (v, n23))| (k, *v, *n23))
        .collect();
    let csv = csv_table("trial,v_hat,n23_fraction", &rows, |(k, v, n23)| {
        format!("{k},{},{}", fmt_float(*v), fmt_float(*n23))
    });
    let path = manifest.write_output(out, "montecarlo.csv", &csv)?;
    println!("wrote {}", path.display());
    let path = manifest.write(out)?;
    println!("wrote {}", path.display());

    println!("v_true = {}", fmt_float(report.v_true));
    println!("phi_true = {}", fmt_float(report.phi_true));
    println!("sample_mean = {}", fmt_float(report.sample_mean));
    println!("sample_std = {}", fmt_float(report.sample_std));
    println!("sigma_v = {}", fmt_float(report.sigma_v));
    match qeraser_core::experiment::snr(report.v_true, args.counts)
        .map_err(|e| anyhow::anyhow!("{e}"))?
    {
        Snr::Finite(x) => println!("snr = {}", fmt_float(x)),
        Snr::Unbounded => println!("snr = unbounded"),
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// fit-purity
// ---------------------------------------------------------------------------

pub struct FitPurityArgs {
    pub theta: f64,
    pub purity: f64,
    pub counts: u64,
    pub alpha_grid: Vec<f64>,
    pub seed: u64,
}

/// Simulates coincidence scans at the given true purity, then recovers the
/// purity by the chi-square fit of the closed-form visibility.
pub fn cmd_fit_purity(args: &FitPurityArgs, out: &Path) -> Result<i32> {
    ensure_out_dir(out)?;
    let xi_grid = uniform_xi_grid::<f64>(qeraser_core::experiment::DEFAULT_XI_POINTS);

    let mut points = Vec::new();
    for (alpha_idx, &alpha) in args.alpha_grid.iter().enumerate() {
        let cfg = ProtocolConfig::cnot_preset(args.theta, args.purity, alpha)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        let mut records = Vec::new();
        for (xi_idx, &xi) in xi_grid.iter().enumerate() {
            let p13 = bruteforce_p13(&cfg, xi).map_err(|e| anyhow::anyhow!("{e}"))?;
            let mut rng = qeraser_core::experiment::rng_from_seed(derive_seed(
                args.seed,
                &[alpha_idx as u64, xi_idx as u64],
            ));
            records.push(
                sample_counts(xi, p13, args.counts, &mut rng)
                    .map_err(|e| anyhow::anyhow!("{e}"))?,
            );
        }
        let estimate = estimate_visibility_phase(&records).map_err(|e| anyhow::anyhow!("{e}"))?;
        points.push(VisibilityPoint {
            alpha,
            v_hat: estimate.v_hat,
            sigma_v: estimate.stderr_v.max(1e-9),
        });
    }

    let fit = fit_purity(args.theta, &points, |a: f64| a.tan().abs())
        .map_err(|e| anyhow::anyhow!("{e}"))?;

    let lines = vec![
        ("theta".into(), fmt_float(args.theta)),
        ("p_m_true".into(), fmt_float(args.purity)),
        ("counts_per_setting".into(), args.counts.to_string()),
        ("seed".into(), args.seed.to_string()),
        (
            "alpha_grid".into(),
            args.alpha_grid
                .iter()
                .map(|a| fmt_float(*a))
                .collect::<Vec<_>>()
                .join(","),
        ),
    ];
    let mut manifest = RunManifest::new("fit-purity", args.seed, lines);
    let csv = csv_table("alpha_rad,v_hat,sigma_v,v_model", &points, |p| {
        let model =
            visibility_closed_form(args.theta, fit.p_hat, p.alpha.tan().abs()).unwrap_or(f64::NAN);
        format!(
            "{},{},{},{}",
            fmt_float(p.alpha),
            fmt_float(p.v_hat),
            fmt_float(p.sigma_v),
            fmt_float(model),
        )
    });
    let path = manifest.write_output(out, "fit_purity.csv", &csv)?;
    println!("wrote {}", path.display());
    let path = manifest.write(out)?;
    println!("wrote {}", path.display());

    println!("p_hat = {}", fmt_float(fit.p_hat));
    println!("chi_square = {}", fmt_float(fit.chi_square));
    if fit.boundary_warning {
        println!("warning: fit landed on the purity boundary");
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

pub fn cmd_verify(trials: usize, seed: u64) -> Result<i32> {
    let reports = verify::run_all(trials, seed);
    let mut all_passed = true;
    for report in &reports {
        if report.passed() {
            println!("PASS {} ({} trials)", report.name, report.trials);
        } else {
            all_passed = false;
            println!(
                "FAIL {} ({} trials, {} failures)",
                report.name, report.trials, report.failures
            );
            if let Some(counterexample) = &report.first_counterexample {
                println!("  first counterexample: {counterexample}");
            }
        }
    }
    Ok(if all_passed { 0 } else { 1 })
}

/// Shared default output directory.
pub fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
