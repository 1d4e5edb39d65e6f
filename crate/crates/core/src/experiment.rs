//! Shot-noise emulation of the coincidence experiment: binomially sampled
//! counts, visibility and phase estimators, signal-to-noise formulas, purity
//! fitting, and the scenario runners behind the figure reproductions.
//!
//! Randomness is counter-based and splittable: every (setup, alpha, xi,
//! trial) cell derives its own stream from the scenario seed, so grids can
//! be evaluated in any order and still produce byte-identical tables.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use thiserror::Error;

use crate::protocol::{
    bruteforce_conditional, meter_configs, modulus_from_visibility, select_branch,
    visibility_from_amplitudes, weak_estimate, ProtocolConfig, ProtocolError,
};
use crate::{angle_distance, real, wrap_angle, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("invalid probability: p13 = {value} lies outside [0, 1]")]
    InvalidProbability { value: f64 },
    #[error("invalid visibility: V = {value} must lie in [0, 1]")]
    InvalidVisibility { value: f64 },
    #[error("no fringe: counts are flat, the visibility estimate is zero")]
    NoFringe,
    #[error("too few points: needed {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

pub type ExperimentResult<V> = Result<V, ExperimentError>;

/// Default number of coincidence counts per phase setting.
pub const DEFAULT_COUNTS_PER_SETTING: u64 = 4000;

/// Default seed used when none is supplied. Fixed, never wall clock.
pub const DEFAULT_SEED: u64 = 42;

/// Number of uniform phase settings in the default scan grid.
pub const DEFAULT_XI_POINTS: usize = 24;

// ---------------------------------------------------------------------------
// Seed derivation
// ---------------------------------------------------------------------------

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed for one grid cell from the scenario
/// seed and the cell's lane indices.
pub fn derive_seed(base: u64, lanes: &[u64]) -> u64 {
    let mut state = splitmix64(base);
    for &lane in lanes {
        state = splitmix64(state ^ lane.wrapping_mul(0xD1B5_4A32_D192_ED03));
    }
    state
}

fn rng_for(base: u64, lanes: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, lanes))
}

/// Seeds the counter-based generator used by the samplers.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Renormalized probability of the (1,3) coincidence at the `q_re` readout
/// and phase setting `xi`: `p(q_re) / (p(q_re) + p(-q_re))`, computed by
/// the oracle.
pub fn bruteforce_p13<T: Scalar>(cfg: &ProtocolConfig<T>, xi: T) -> ExperimentResult<T> {
    let configs = meter_configs(&cfg.m, &cfg.r)?;
    let outcome = bruteforce_conditional(cfg, &configs.q_re, xi)?;
    Ok(outcome.p_joint_q / outcome.postselect_prob)
}

// ---------------------------------------------------------------------------
// Counts
// ---------------------------------------------------------------------------

/// One phase setting's coincidence counts: detector pair (1,3) against
/// (2,3), with `n13 + n23 = n_total` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountRecord<T: Scalar> {
    pub xi: T,
    pub n13: u64,
    pub n23: u64,
    pub n_total: u64,
}

/// Samples `n13 ~ Binomial(n_total, p13)` with the given stream; `n23` is
/// the complement. `p13` is the renormalized joint probability
/// `p(q) / (p(q) + p(-q))` from the oracle.
pub fn sample_counts<T: Scalar>(
    xi: T,
    p13: T,
    n_total: u64,
    rng: &mut ChaCha8Rng,
) -> ExperimentResult<CountRecord<T>> {
    let p = p13.to_f64().unwrap_or(f64::NAN);
    if !(-1e-12..=1.0 + 1e-12).contains(&p) {
        return Err(ExperimentError::InvalidProbability { value: p });
    }
    let p = p.clamp(0.0, 1.0);
    let n13 = Binomial::new(n_total, p)
        .expect("clamped probability is valid")
        .sample(rng);
    Ok(CountRecord {
        xi,
        n13,
        n23: n_total - n13,
        n_total,
    })
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

/// Visibility and phase estimated from one scan of count records.
#[derive(Debug, Clone, Copy)]
pub struct VisibilityEstimate<T: Scalar> {
    /// Extremum-pair estimator: `(n13 - n23) / n_total` at the setting
    /// closest to the fitted phase. Follows the binomial statistics
    /// `E[V_hat] = V`, `Var[V_hat] = (1 - V^2) / N` exactly.
    pub v_hat: T,
    /// Phase of the fitted fringe, in `(-pi, pi]`.
    pub phi_hat: T,
    /// `sigma_V = sqrt((1 - V_hat^2) / N)` at the extremum setting.
    pub stderr_v: T,
    /// Amplitude-over-offset visibility of the least-squares fit, exposed
    /// as a diagnostic.
    pub v_fit: T,
}

/// Fits `n13(xi)` to `c (1 + V cos(phi - xi))` by least squares, then reads
/// the visibility off the counts at the fitted extremum: the record whose
/// setting is closest to `phi_hat` supplies `N13` and `N23`.
///
/// The fit locates the extremum; taking raw per-setting maxima instead
/// would select the upward noise fluctuation and bias the estimate.
/// Flat counts produce a no-fringe error (the estimate is zero there).
pub fn estimate_visibility_phase<T: Scalar>(
    records: &[CountRecord<T>],
) -> ExperimentResult<VisibilityEstimate<T>> {
    if records.len() < 3 {
        return Err(ExperimentError::TooFewPoints {
            needed: 3,
            got: records.len(),
        });
    }
    let samples: Vec<(T, T)> = records
        .iter()
        .map(|r| (r.xi, real::<T>(r.n13 as f64)))
        .collect();
    let (offset, amp_cos, amp_sin, _residual) =
        crate::protocol::fit_fringe(&samples).map_err(ExperimentError::Protocol)?;
    let amplitude = (amp_cos * amp_cos + amp_sin * amp_sin).sqrt();
    if amplitude <= offset.abs() * real::<T>(1e-12) {
        return Err(ExperimentError::NoFringe);
    }
    let phi_hat = wrap_angle(amp_sin.atan2(amp_cos));

    let extremum = records
        .iter()
        .min_by(|a, b| {
            angle_distance(a.xi, phi_hat)
                .partial_cmp(&angle_distance(b.xi, phi_hat))
                .expect("angles are finite")
        })
        .expect("records is nonempty");
    let n = real::<T>(extremum.n_total as f64);
    let v_hat = (real::<T>(extremum.n13 as f64) - real::<T>(extremum.n23 as f64)) / n;
    let stderr_v = ((T::one() - v_hat * v_hat).max(T::zero()) / n).sqrt();
    Ok(VisibilityEstimate {
        v_hat,
        phi_hat,
        stderr_v,
        v_fit: amplitude / offset,
    })
}

/// The raw extremum estimator: contrast of the record with the largest
/// `n13`. Overstates the visibility on noisy grids; exposed for comparison
/// with the fitted route.
pub fn raw_visibility_estimate<T: Scalar>(records: &[CountRecord<T>]) -> ExperimentResult<T> {
    let best = records
        .iter()
        .max_by_key(|r| r.n13)
        .ok_or(ExperimentError::TooFewPoints { needed: 1, got: 0 })?;
    let n = real::<T>(best.n_total as f64);
    Ok((real::<T>(best.n13 as f64) - real::<T>(best.n23 as f64)) / n)
}

/// Bootstrap cross-check of the visibility error bar: each record is
/// resampled binomially around its observed rate and the spread of the
/// re-estimated visibility is reported. The closed-form `sigma_V` stays
/// the primary error bar.
pub fn bootstrap_visibility_std<T: Scalar>(
    records: &[CountRecord<T>],
    resamples: usize,
    seed: u64,
) -> ExperimentResult<T> {
    if resamples < 2 {
        return Err(ExperimentError::TooFewPoints {
            needed: 2,
            got: resamples,
        });
    }
    let mut estimates = Vec::with_capacity(resamples);
    for resample in 0..resamples {
        let mut resampled = Vec::with_capacity(records.len());
        for (idx, record) in records.iter().enumerate() {
            let rate = real::<T>(record.n13 as f64 / record.n_total as f64);
            let mut rng = rng_for(seed, &[resample as u64, idx as u64]);
            resampled.push(sample_counts(record.xi, rate, record.n_total, &mut rng)?);
        }
        match estimate_visibility_phase(&resampled) {
            Ok(est) => estimates.push(est.v_hat),
            Err(ExperimentError::NoFringe) => estimates.push(T::zero()),
            Err(e) => return Err(e),
        }
    }
    let n = real::<T>(estimates.len() as f64);
    let mean = estimates.iter().fold(T::zero(), |acc, &v| acc + v) / n;
    let var = estimates
        .iter()
        .fold(T::zero(), |acc, &v| acc + (v - mean) * (v - mean))
        / (n - T::one());
    Ok(var.sqrt())
}

/// Signal-to-noise ratio of a visibility measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Snr<T: Scalar> {
    Finite(T),
    /// `V = 1`: the fringe has no noise at the extremum.
    Unbounded,
}

/// `SNR = V / sqrt(1 - V^2) * sqrt(N)`.
pub fn snr<T: Scalar>(v: T, n: u64) -> ExperimentResult<Snr<T>> {
    if v < T::zero() || v > T::one() {
        return Err(ExperimentError::InvalidVisibility {
            value: v.to_f64().unwrap_or(f64::NAN),
        });
    }
    if v == T::one() {
        return Ok(Snr::Unbounded);
    }
    let n = real::<T>(n as f64);
    Ok(Snr::Finite(v / (T::one() - v * v).sqrt() * n.sqrt()))
}

/// `sigma_V = sqrt((1 - V^2) / N)`.
pub fn estimator_std<T: Scalar>(v: T, n: u64) -> ExperimentResult<T> {
    if v < T::zero() || v > T::one() {
        return Err(ExperimentError::InvalidVisibility {
            value: v.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(((T::one() - v * v) / real::<T>(n as f64)).sqrt())
}

// ---------------------------------------------------------------------------
// Purity fit
// ---------------------------------------------------------------------------

/// One visibility measurement entering the purity fit.
#[derive(Debug, Clone, Copy)]
pub struct VisibilityPoint<T: Scalar> {
    pub alpha: T,
    pub v_hat: T,
    /// Standard error used as the chi-square weight; use 1 for unweighted.
    pub sigma_v: T,
}

/// Result of the chi-square purity fit.
#[derive(Debug, Clone, Copy)]
pub struct PurityFit<T: Scalar> {
    pub p_hat: T,
    pub chi_square: T,
    /// Set when the minimizer landed on the boundary of [0, 1].
    pub boundary_warning: bool,
}

/// Fits the meter purity by chi-square minimization of the closed-form
/// visibility against measured `(alpha, V_hat)` pairs, with
/// `mod_am_of_alpha` supplying the gate-value modulus for each setting.
///
/// A coarse scan over [0, 1] brackets the minimum, golden-section search
/// refines it to 1e-5.
pub fn fit_purity<T: Scalar>(
    theta: T,
    points: &[VisibilityPoint<T>],
    mod_am_of_alpha: impl Fn(T) -> T,
) -> ExperimentResult<PurityFit<T>> {
    if points.len() < 3 {
        return Err(ExperimentError::TooFewPoints {
            needed: 3,
            got: points.len(),
        });
    }
    let moduli: Vec<T> = points.iter().map(|p| mod_am_of_alpha(p.alpha)).collect();
    let chi_square = |p_m: T| -> ExperimentResult<T> {
        let mut total = T::zero();
        for (point, &modulus) in points.iter().zip(&moduli) {
            let model = crate::protocol::visibility_closed_form(theta, p_m, modulus)?;
            let sigma = if point.sigma_v > T::zero() {
                point.sigma_v
            } else {
                T::one()
            };
            let r = (point.v_hat - model) / sigma;
            total = total + r * r;
        }
        Ok(total)
    };

    // Coarse bracket.
    let steps = 64usize;
    let mut best_idx = 0usize;
    let mut best_val = T::infinity();
    for idx in 0..=steps {
        let p = real::<T>(idx as f64 / steps as f64);
        let val = chi_square(p)?;
        if val < best_val {
            best_val = val;
            best_idx = idx;
        }
    }
    let mut lo = real::<T>(best_idx.saturating_sub(1) as f64 / steps as f64);
    let mut hi = real::<T>(best_idx.min(steps - 1).saturating_add(1) as f64 / steps as f64);
    if hi > T::one() {
        hi = T::one();
    }

    // Golden-section refinement to 1e-5.
    let ratio = real::<T>(0.618_033_988_749_894_9);
    let tol = real::<T>(1e-5);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = chi_square(x1)?;
    let mut f2 = chi_square(x2)?;
    while (hi - lo) > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = chi_square(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = chi_square(x2)?;
        }
    }
    let p_hat = (lo + hi) * real::<T>(0.5);
    let edge = real::<T>(1e-4);
    Ok(PurityFit {
        p_hat,
        chi_square: chi_square(p_hat)?,
        boundary_warning: p_hat < edge || p_hat > T::one() - edge,
    })
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

/// Which preset a scenario was resolved from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioPreset {
    Figure2,
    Figure3,
    Custom,
}

impl ScenarioPreset {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioPreset::Figure2 => "figure2",
            ScenarioPreset::Figure3 => "figure3",
            ScenarioPreset::Custom => "custom",
        }
    }
}

/// Resolved description of one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec<T: Scalar> {
    pub preset: ScenarioPreset,
    /// Measurement strength for custom runs; the figure presets carry
    /// their own strengths.
    pub theta: T,
    pub p_m: T,
    /// Post-selection angles: `psi_f = cos(alpha)|0> + sin(alpha)|1>`.
    pub alpha_grid: Vec<T>,
    pub counts_per_setting: u64,
    pub seed: u64,
    pub xi_grid: Vec<T>,
}

/// The three meter strengths and purities of the visibility/argument
/// figure: `(theta, P_m)` pairs.
pub fn figure2_setups<T: Scalar>() -> [(T, T); 3] {
    [
        (real::<T>(0.499) * T::PI(), real::<T>(0.882)),
        (real::<T>(0.297) * T::PI(), real::<T>(0.836)),
        (real::<T>(0.092) * T::PI(), real::<T>(0.956)),
    ]
}

/// The weak-approximation baseline strength and purity `(theta_4, P_4m)`.
pub fn figure3_baseline<T: Scalar>() -> (T, T) {
    (real::<T>(0.025) * T::PI(), real::<T>(0.982))
}

/// Uniform grid of `n` phase settings over `[0, 2 pi)`.
pub fn uniform_xi_grid<T: Scalar>(n: usize) -> Vec<T> {
    (0..n)
        .map(|k| real::<T>(2.0) * T::PI() * real::<T>(k as f64) / real::<T>(n as f64))
        .collect()
}

/// Uniform alpha grid over `[start, end]` inclusive with `n` points.
pub fn linspace<T: Scalar>(start: T, end: T, n: usize) -> Vec<T> {
    if n <= 1 {
        return vec![start];
    }
    (0..n)
        .map(|k| start + (end - start) * real::<T>(k as f64) / real::<T>((n - 1) as f64))
        .collect()
}

impl<T: Scalar> ScenarioSpec<T> {
    /// Figure-2 defaults: alpha over [0, pi], 201 points, 24 phase
    /// settings, 4000 counts per setting.
    pub fn figure2_default() -> Self {
        Self {
            preset: ScenarioPreset::Figure2,
            theta: real::<T>(0.297) * T::PI(),
            p_m: real::<T>(0.836),
            alpha_grid: linspace(T::zero(), T::PI(), 201),
            counts_per_setting: DEFAULT_COUNTS_PER_SETTING,
            seed: DEFAULT_SEED,
            xi_grid: uniform_xi_grid(DEFAULT_XI_POINTS),
        }
    }

    /// Figure-3 defaults: alpha over [0, 0.49 pi], 99 points.
    pub fn figure3_default() -> Self {
        Self {
            preset: ScenarioPreset::Figure3,
            theta: real::<T>(0.297) * T::PI(),
            p_m: real::<T>(0.836),
            alpha_grid: linspace(T::zero(), real::<T>(0.49) * T::PI(), 99),
            counts_per_setting: DEFAULT_COUNTS_PER_SETTING,
            seed: DEFAULT_SEED,
            xi_grid: uniform_xi_grid(DEFAULT_XI_POINTS),
        }
    }
}

/// One row of the visibility/argument/criterion table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Figure2Row<T: Scalar> {
    pub alpha: T,
    pub v_theory: T,
    pub v_sampled: T,
    pub arg_rad: T,
    pub criterion: T,
}

/// One meter setup's table.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureSetup<T: Scalar, Row> {
    pub theta: T,
    pub p_m: T,
    pub rows: Vec<Row>,
}

/// One row of the weak-value comparison table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Figure3Row<T: Scalar> {
    pub alpha: T,
    pub wv_exact: T,
    pub wv_polar: T,
    pub wv_weakapprox: T,
}

/// Theory amplitudes of the CNOT scenario at one post-selection angle:
/// `(|s|, |M|, arg of the gate value, fringe visibility)`.
fn cnot_theory<T: Scalar>(theta: T, p_m: T, alpha: T) -> ExperimentResult<(T, T, T, T)> {
    let cfg = ProtocolConfig::cnot_preset(theta, p_m, alpha)?;
    let (s, m) = cfg.gate_amplitudes()?;
    let z = m * s.conj();
    // A vanishing cross amplitude means no fringe: the phase is
    // unmeasurable and reported as 0 rather than rounding noise.
    let arg = if z.norm() <= real::<T>(1e-12) * (s.norm_sqr() + m.norm_sqr()) {
        T::zero()
    } else {
        wrap_angle(z.im.atan2(z.re))
    };
    let v = visibility_from_amplitudes(theta, p_m, s.norm(), m.norm())?;
    Ok((s.norm(), m.norm(), arg, v))
}

/// Measured-route branch criterion: the no-eraser coincidence ratio
/// `p(-r|f) / p(r|f)` read from the oracle with `q = r`.
fn no_eraser_ratio<T: Scalar>(cfg: &ProtocolConfig<T>) -> ExperimentResult<T> {
    let outcome = bruteforce_conditional(cfg, &cfg.r, T::zero())?;
    Ok(outcome.p_joint_negq / outcome.p_joint_q)
}

/// Sampled visibility for one configuration: binomial counts on the xi
/// grid, then the fitted-extremum estimator. Flat fringes report zero.
fn sampled_visibility<T: Scalar>(
    cfg: &ProtocolConfig<T>,
    spec: &ScenarioSpec<T>,
    lanes: [u64; 2],
) -> ExperimentResult<T> {
    let mut records = Vec::with_capacity(spec.xi_grid.len());
    for (xi_idx, &xi) in spec.xi_grid.iter().enumerate() {
        let p13 = bruteforce_p13(cfg, xi)?;
        let mut rng = rng_for(spec.seed, &[lanes[0], lanes[1], xi_idx as u64]);
        records.push(sample_counts(xi, p13, spec.counts_per_setting, &mut rng)?);
    }
    match estimate_visibility_phase(&records) {
        Ok(estimate) => Ok(estimate.v_hat),
        Err(ExperimentError::NoFringe) => Ok(T::zero()),
        Err(e) => Err(e),
    }
}

/// Visibility, argument and branch criterion across the post-selection
/// grid, one table per meter setup of the figure presets.
pub fn run_figure2<T: Scalar>(
    spec: &ScenarioSpec<T>,
) -> ExperimentResult<Vec<FigureSetup<T, Figure2Row<T>>>> {
    let setups: Vec<(T, T)> = match spec.preset {
        ScenarioPreset::Custom => vec![(spec.theta, spec.p_m)],
        _ => figure2_setups::<T>().to_vec(),
    };
    let mut result = Vec::with_capacity(setups.len());
    for (setup_idx, &(theta, p_m)) in setups.iter().enumerate() {
        let mut rows = Vec::with_capacity(spec.alpha_grid.len());
        for (alpha_idx, &alpha) in spec.alpha_grid.iter().enumerate() {
            let (_, _, arg, v_theory) = cnot_theory(theta, p_m, alpha)?;
            let cfg = ProtocolConfig::cnot_preset(theta, p_m, alpha)?;
            let criterion = no_eraser_ratio(&cfg)?;
            let v_sampled = sampled_visibility(&cfg, spec, [setup_idx as u64, alpha_idx as u64])?;
            rows.push(Figure2Row {
                alpha,
                v_theory,
                v_sampled,
                arg_rad: arg,
                criterion,
            });
        }
        result.push(FigureSetup { theta, p_m, rows });
    }
    Ok(result)
}

/// Noiseless polar recovery of the signed gate value for one CNOT
/// configuration: closed-form visibility, root selection by the measured
/// criterion, sign from the recovered argument.
pub fn polar_signed_value<T: Scalar>(theta: T, p_m: T, alpha: T) -> ExperimentResult<T> {
    let (_, _, arg, v) = cnot_theory(theta, p_m, alpha)?;
    if v <= real::<T>(1e-12) {
        return Ok(T::zero());
    }
    let cfg = ProtocolConfig::cnot_preset(theta, p_m, alpha)?;
    let criterion = no_eraser_ratio(&cfg)?;
    let (minus, plus) = modulus_from_visibility(v, theta, p_m)?;
    let modulus = select_branch(minus, plus, criterion);
    // The argument takes only the two values 0 or pi in this scenario.
    let sign = if angle_distance(arg, T::PI()) < T::FRAC_PI_2() {
        -T::one()
    } else {
        T::one()
    };
    Ok(sign * modulus)
}

/// Weak-value comparison table: exact `tan(alpha)`, the polar pipeline at
/// each figure strength, and the weak-approximation baseline at
/// `(theta_4, P_4m)`.
pub fn run_figure3<T: Scalar>(
    spec: &ScenarioSpec<T>,
) -> ExperimentResult<Vec<FigureSetup<T, Figure3Row<T>>>> {
    let setups: Vec<(T, T)> = match spec.preset {
        ScenarioPreset::Custom => vec![(spec.theta, spec.p_m)],
        _ => figure2_setups::<T>().to_vec(),
    };
    let (theta4, p_4m) = figure3_baseline::<T>();
    let mut result = Vec::with_capacity(setups.len());
    for &(theta, p_m) in &setups {
        let mut rows = Vec::with_capacity(spec.alpha_grid.len());
        for &alpha in &spec.alpha_grid {
            let wv_polar = polar_signed_value(theta, p_m, alpha)?;

            let baseline = ProtocolConfig::cnot_preset(theta4, p_4m, alpha)?;
            let configs = meter_configs(&baseline.m, &baseline.r)?;
            let avg_re = bruteforce_conditional(&baseline, &configs.q_re, T::zero())?.average;
            let avg_im = bruteforce_conditional(&baseline, &configs.q_im, T::zero())?.average;
            let approx = weak_estimate(avg_re, avg_im, theta4)?;

            rows.push(Figure3Row {
                alpha,
                wv_exact: alpha.tan(),
                wv_polar,
                wv_weakapprox: approx.re,
            });
        }
        result.push(FigureSetup { theta, p_m, rows });
    }
    Ok(result)
}

// ---------------------------------------------------------------------------
// Monte Carlo visibility statistics
// ---------------------------------------------------------------------------

/// Statistics of the visibility estimator over seeded repetitions of a
/// fixed configuration.
#[derive(Debug, Clone)]
pub struct MonteCarloReport<T: Scalar> {
    pub v_true: T,
    pub phi_true: T,
    pub counts_per_setting: u64,
    pub v_hats: Vec<T>,
    pub n23_fractions: Vec<T>,
    pub sample_mean: T,
    pub sample_std: T,
    /// `sqrt((1 - V^2) / N)` at the true visibility.
    pub sigma_v: T,
}

/// Repeatedly simulates the scan of a fixed strength-pi/2, purity-one
/// configuration with gate value 1/3 (fringe visibility exactly 0.6,
/// phase 0) and collects the estimator statistics.
pub fn run_montecarlo<T: Scalar>(
    trials: usize,
    counts_per_setting: u64,
    seed: u64,
) -> ExperimentResult<MonteCarloReport<T>> {
    let alpha = real::<T>(1.0f64 / 3.0).atan();
    montecarlo_at(
        T::FRAC_PI_2(),
        T::one(),
        alpha,
        trials,
        counts_per_setting,
        seed,
    )
}

/// Monte Carlo statistics for an arbitrary CNOT configuration.
pub fn montecarlo_at<T: Scalar>(
    theta: T,
    p_m: T,
    alpha: T,
    trials: usize,
    counts_per_setting: u64,
    seed: u64,
) -> ExperimentResult<MonteCarloReport<T>> {
    let cfg = ProtocolConfig::cnot_preset(theta, p_m, alpha)?;
    let xi_grid: Vec<T> = uniform_xi_grid(DEFAULT_XI_POINTS);

    // The exact per-setting probabilities are trial independent.
    let mut p13s = Vec::with_capacity(xi_grid.len());
    for &xi in &xi_grid {
        p13s.push(bruteforce_p13(&cfg, xi)?);
    }
    let (s, m) = cfg.gate_amplitudes()?;
    let v_true = visibility_from_amplitudes(theta, p_m, s.norm(), m.norm())?;
    let z = m * s.conj();
    let phi_true = z.im.atan2(z.re);

    let mut v_hats = Vec::with_capacity(trials);
    let mut n23_fractions = Vec::with_capacity(trials);
    for trial in 0..trials {
        let mut records = Vec::with_capacity(xi_grid.len());
        for (xi_idx, (&xi, &p13)) in xi_grid.iter().zip(&p13s).enumerate() {
            let mut rng = rng_for(seed, &[trial as u64, xi_idx as u64]);
            records.push(sample_counts(xi, p13, counts_per_setting, &mut rng)?);
        }
        let estimate = estimate_visibility_phase(&records)?;
        let extremum = records
            .iter()
            .min_by(|a, b| {
                angle_distance(a.xi, estimate.phi_hat)
                    .partial_cmp(&angle_distance(b.xi, estimate.phi_hat))
                    .expect("finite")
            })
            .expect("records nonempty");
        n23_fractions.push(real::<T>(extremum.n23 as f64) / real::<T>(extremum.n_total as f64));
        v_hats.push(estimate.v_hat);
    }

    let n = real::<T>(v_hats.len() as f64);
    let mean = v_hats.iter().fold(T::zero(), |acc, &v| acc + v) / n;
    let var = v_hats
        .iter()
        .fold(T::zero(), |acc, &v| acc + (v - mean) * (v - mean))
        / (n - T::one());
    Ok(MonteCarloReport {
        v_true,
        phi_true,
        counts_per_setting,
        v_hats,
        n23_fractions,
        sample_mean: mean,
        sample_std: var.sqrt(),
        sigma_v: estimator_std(v_true, counts_per_setting)?,
    })
}
