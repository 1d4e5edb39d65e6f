//! Cross-route consistency suites: every closed form in the protocol is
//! checked against an independent route (the 4x4 oracle, the Bargmann
//! geometry, or the interference fit) over randomized configurations.
//!
//! The CLI `verify` subcommand runs these at a configurable trial count;
//! the acceptance tests pin them at 1000 trials.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bloch::{
    bargmann_solid_angle, decompose_triangle, mirror_image, weak_argument_geometric,
    weak_value_quadrangle, SphericalCoord,
};
use crate::experiment::derive_seed;
use crate::protocol::{
    branch_criterion, bruteforce_conditional, conditional_meter_average, default_scan_settings,
    interference_scan, meter_configs, modulus_from_visibility, select_branch,
    visibility_closed_form, weak_estimate, MeterConfigs, ProtocolConfig,
};
use crate::qmath::{pauli_along, state_from_bloch, BlochVector, PureState};
use crate::values::weak_value;
use crate::{angle_distance, Scalar};

/// Outcome of one randomized suite.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    /// Serialized description of the first failing configuration.
    pub first_counterexample: Option<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Uniform random unit vector (rejection sampled).
pub fn random_unit_vector<T: Scalar>(rng: &mut impl Rng) -> BlochVector<T> {
    loop {
        let v = BlochVector::new(
            crate::real::<T>(rng.gen_range(-1.0..1.0)),
            crate::real::<T>(rng.gen_range(-1.0..1.0)),
            crate::real::<T>(rng.gen_range(-1.0..1.0)),
        );
        let n = v.norm();
        if n > crate::real::<T>(0.1) && n < crate::real::<T>(1.0) {
            return v.normalized().expect("norm checked");
        }
    }
}

/// Random canonical pure state.
pub fn random_pure_state<T: Scalar>(rng: &mut impl Rng) -> PureState<T> {
    state_from_bloch(&random_unit_vector(rng)).expect("unit vector")
}

/// Random protocol configuration with `delta = 0`, strength in
/// `(0.05 pi, 0.95 pi)`, purity in `[0, 1]`, random observable, coupling
/// and selections (overlap kept above 1e-6).
pub fn random_config(rng: &mut impl Rng) -> ProtocolConfig<f64> {
    let r = random_unit_vector::<f64>(rng);
    let theta: f64 = rng.gen_range(0.05 * std::f64::consts::PI..0.95 * std::f64::consts::PI);
    let helper = if r.x.abs() < 0.9 {
        BlochVector::x_axis()
    } else {
        BlochVector::y_axis()
    };
    let e1 = r.cross(&helper).normalized().expect("helper not collinear");
    let e2 = r.cross(&e1);
    let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
    let mut m = r.scaled(theta.cos());
    m = BlochVector::new(
        m.x + theta.sin() * (phi.cos() * e1.x + phi.sin() * e2.x),
        m.y + theta.sin() * (phi.cos() * e1.y + phi.sin() * e2.y),
        m.z + theta.sin() * (phi.cos() * e1.z + phi.sin() * e2.z),
    );

    let n = random_unit_vector::<f64>(rng);
    let scale: f64 = rng.gen_range(0.1..2.0);
    let a = pauli_along(&n)
        .expect("unit direction")
        .scale(Complex::new(scale, 0.0));
    let g: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    let p_m: f64 = rng.gen_range(0.0..=1.0);

    loop {
        let psi_i = random_pure_state::<f64>(rng);
        let psi_f = random_pure_state::<f64>(rng);
        let cfg = ProtocolConfig::new(m, p_m, r, a, g, 0.0, psi_i, psi_f)
            .expect("construction from valid parts");
        if cfg.overlap().norm() > 1e-6 {
            return cfg;
        }
    }
}

fn describe_config(cfg: &ProtocolConfig<f64>) -> String {
    format!(
        "m=({:.17e},{:.17e},{:.17e}) P_m={:.17e} r=({:.17e},{:.17e},{:.17e}) \
         g={:.17e} delta={:.17e} theta={:.17e} psi_i={:?} psi_f={:?} A={:?}",
        cfg.m.x,
        cfg.m.y,
        cfg.m.z,
        cfg.p_m,
        cfg.r.x,
        cfg.r.y,
        cfg.r.z,
        cfg.g,
        cfg.delta,
        cfg.theta(),
        cfg.psi_i.amplitudes(),
        cfg.psi_f.amplitudes(),
        cfg.a.e,
    )
}

fn run_suite(
    name: &'static str,
    trials: usize,
    mut check: impl FnMut(usize) -> Result<(), String>,
) -> SuiteReport {
    let mut failures = 0;
    let mut first = None;
    for trial in 0..trials {
        if let Err(description) = check(trial) {
            failures += 1;
            if first.is_none() {
                first = Some(description);
            }
        }
    }
    SuiteReport {
        name,
        trials,
        failures,
        first_counterexample: first,
    }
}

/// Closed-form conditional average against the 4x4 oracle at both eraser
/// readout directions (tolerance 1e-10).
pub fn suite_conditional_average(trials: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[1]));
    run_suite("conditional average vs oracle", trials, move |_| {
        let cfg = random_config(&mut rng);
        let configs = meter_configs(&cfg.m, &cfg.r).map_err(|e| e.to_string())?;
        check_conditional_average(&cfg, &configs)
    })
}

/// The oracle-equivalence check for one configuration; mutation tests feed
/// a deliberately wrong `MeterConfigs` to confirm the suite catches it.
pub fn check_conditional_average(
    cfg: &ProtocolConfig<f64>,
    configs: &MeterConfigs<f64>,
) -> Result<(), String> {
    for q in [configs.q_re, configs.q_im] {
        let closed = conditional_meter_average(cfg, &q).map_err(|e| e.to_string())?;
        let brute = bruteforce_conditional(cfg, &q, 0.0).map_err(|e| e.to_string())?;
        if (closed.value - brute.average).abs() > 1e-10 {
            return Err(format!(
                "closed {} vs oracle {} at q=({},{},{}); {}",
                closed.value,
                brute.average,
                q.x,
                q.y,
                q.z,
                describe_config(cfg)
            ));
        }
    }
    Ok(())
}

/// Fitted visibility and phase from exact scans against the closed form
/// and the gate-value argument (tolerance 1e-9).
pub fn suite_visibility_identity(trials: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[2]));
    run_suite("visibility and phase identity", trials, move |_| {
        let cfg = random_config(&mut rng);
        let scan = interference_scan(&cfg, &default_scan_settings()).map_err(|e| e.to_string())?;
        let gate_value = cfg.effective_modular_value().map_err(|e| e.to_string())?;
        let closed = visibility_closed_form(cfg.theta(), cfg.p_m, gate_value.modulus)
            .map_err(|e| e.to_string())?;
        if (scan.visibility - closed).abs() > 1e-9 {
            return Err(format!(
                "scan V {} vs closed form {}; {}",
                scan.visibility,
                closed,
                describe_config(&cfg)
            ));
        }
        if scan.visibility > 1e-6 && angle_distance(scan.phase, gate_value.argument) > 1e-9 {
            return Err(format!(
                "scan phase {} vs arg A_m {}; {}",
                scan.phase,
                gate_value.argument,
                describe_config(&cfg)
            ));
        }
        Ok(())
    })
}

/// Visibility inversion round trip with branch selection over gate-value
/// moduli in [0.01, 100] (relative tolerance 1e-9).
pub fn suite_modulus_round_trip(trials: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[3]));
    run_suite("modulus round trip and branch", trials, move |_| {
        let theta: f64 = rng.gen_range(0.05 * std::f64::consts::PI..0.95 * std::f64::consts::PI);
        let p_m: f64 = rng.gen_range(0.05..=1.0);
        let target = 10.0f64.powf(rng.gen_range(-2.0..2.0));

        let v = visibility_closed_form(theta, p_m, target).map_err(|e| e.to_string())?;
        if v <= 0.0 {
            return Ok(());
        }
        let (minus, plus) = modulus_from_visibility(v, theta, p_m).map_err(|e| e.to_string())?;
        let criterion = branch_criterion(theta, p_m, target).map_err(|e| e.to_string())?;
        let recovered = select_branch(minus, plus, criterion);
        if (recovered - target).abs() > 1e-9 * target {
            return Err(format!(
                "recovered {recovered} vs target {target} (theta={theta}, P_m={p_m}, V={v})"
            ));
        }
        // Both roots reproduce the visibility they came from.
        for root in [minus, plus] {
            let back = visibility_closed_form(theta, p_m, root).map_err(|e| e.to_string())?;
            if (back - v).abs() > 1e-9 {
                return Err(format!(
                    "root {root} maps back to V {back}, expected {v} (theta={theta}, P_m={p_m})"
                ));
            }
        }
        Ok(())
    })
}

/// The three routes to the Pauli weak-value argument (closed form, Bargmann
/// quadrangle, direct weak value) plus the quadrangle decomposition
/// identity (tolerance 1e-9 mod 2 pi).
pub fn suite_geometric_phase(trials: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[4]));
    run_suite("geometric phase routes", trials, move |_| {
        // Draw a non-degenerate (i, n, f) triple.
        let (i, n, f) = loop {
            let i = random_unit_vector::<f64>(&mut rng);
            let n = random_unit_vector::<f64>(&mut rng);
            let f = random_unit_vector::<f64>(&mut rng);
            let mirrored = mirror_image(&i, &n);
            if [i.dot(&f), i.dot(&n), n.dot(&mirrored), mirrored.dot(&f)]
                .iter()
                .all(|d| *d > -0.95)
            {
                break (i, n, f);
            }
        };
        let arg = weak_argument_geometric(&i, &n, &f).map_err(|e| e.to_string())?;
        let omega = weak_value_quadrangle(&i, &n, &f).map_err(|e| e.to_string())?;
        if angle_distance(arg, -0.5 * omega.value) > 1e-9 {
            return Err(format!(
                "arctan {} vs -omega/2 {} for i={i:?} n={n:?} f={f:?}",
                arg,
                -0.5 * omega.value
            ));
        }
        let direct = weak_value(
            &pauli_along(&n).map_err(|e| e.to_string())?,
            &state_from_bloch(&i).map_err(|e| e.to_string())?,
            &state_from_bloch(&f).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        if angle_distance(arg, direct.argument) > 1e-9 {
            return Err(format!(
                "arctan {} vs direct arg {} for i={i:?} n={n:?} f={f:?}",
                arg, direct.argument
            ));
        }

        // Quadrangle decomposition on a non-winding triple.
        let coords = loop {
            let draw: Vec<SphericalCoord<f64>> = (0..3)
                .map(|_| SphericalCoord::new(rng.gen_range(-1.5..1.5), rng.gen_range(-0.7..0.7)))
                .collect();
            let non_winding = [
                (draw[0].eta - draw[1].eta).cos(),
                (draw[1].eta - draw[2].eta).cos(),
                (draw[2].eta - draw[0].eta).cos(),
            ]
            .iter()
            .all(|c| *c > 0.05);
            if non_winding {
                break draw;
            }
        };
        let states: Vec<PureState<f64>> = coords.iter().map(|c| c.to_state()).collect();
        let parts = match decompose_triangle(&states[0], &states[1], &states[2]) {
            Ok(p) => p,
            Err(_) => return Ok(()),
        };
        let triangle = match bargmann_solid_angle(&states) {
            Ok(t) => t,
            Err(_) => return Ok(()),
        };
        let sum: f64 = parts.iter().map(|p| p.value).sum();
        let wrapped = (sum - triangle.value).rem_euclid(4.0 * std::f64::consts::PI);
        let wrapped = wrapped.min(4.0 * std::f64::consts::PI - wrapped);
        if wrapped > 1e-9 {
            return Err(format!(
                "quadrangle sum {} vs triangle {} for {coords:?}",
                sum, triangle.value
            ));
        }
        Ok(())
    })
}

/// Branch criterion against the no-eraser coincidence ratio from the
/// oracle (tolerance 1e-10).
pub fn suite_criterion_ratio(trials: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[5]));
    run_suite("criterion equals no-eraser ratio", trials, move |_| {
        let cfg = random_config(&mut rng);
        let gate_value = cfg.effective_modular_value().map_err(|e| e.to_string())?;
        let criterion = branch_criterion(cfg.theta(), cfg.p_m, gate_value.modulus)
            .map_err(|e| e.to_string())?;
        let outcome = bruteforce_conditional(&cfg, &cfg.r, 0.0).map_err(|e| e.to_string())?;
        let ratio = outcome.p_joint_negq / outcome.p_joint_q;
        if (criterion - ratio).abs() > 1e-10 * ratio.max(1.0) {
            return Err(format!(
                "criterion {criterion} vs ratio {ratio}; {}",
                describe_config(&cfg)
            ));
        }
        Ok(())
    })
}

/// Weak-limit consistency at small strength and unit purity: the
/// two-average estimate lands within 5% of the gate value, and so does
/// `V / theta` for its modulus.
pub fn suite_weak_limit(trials: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[6]));
    run_suite("weak-limit consistency", trials, move |_| {
        let cfg = random_weak_config(&mut rng);
        let configs = meter_configs(&cfg.m, &cfg.r).map_err(|e| e.to_string())?;
        check_weak_limit(&cfg, &configs)
    })
}

/// Draws a weak-regime configuration: `theta <= 0.01 pi`, purity one, gate
/// value modulus at most one.
pub fn random_weak_config(rng: &mut impl Rng) -> ProtocolConfig<f64> {
    loop {
        let mut cfg = random_config(rng);
        cfg.p_m = 1.0;
        let theta: f64 = rng.gen_range(0.002..0.01) * std::f64::consts::PI;
        // Rebuild m at the weak angle in the plane spanned with the old m.
        let old_perp = cfg.m.sub(&cfg.r.scaled(cfg.m.dot(&cfg.r)));
        let e1 = match old_perp.normalized() {
            Ok(v) => v,
            Err(_) => continue,
        };
        cfg.m = BlochVector::new(
            cfg.r.x * theta.cos() + e1.x * theta.sin(),
            cfg.r.y * theta.cos() + e1.y * theta.sin(),
            cfg.r.z * theta.cos() + e1.z * theta.sin(),
        );
        if let Ok(value) = cfg.effective_modular_value() {
            if value.modulus <= 1.0 && value.modulus > 1e-3 {
                return cfg;
            }
        }
    }
}

/// The weak-limit check for one configuration; sensitive to the
/// orientation of both readout directions.
pub fn check_weak_limit(
    cfg: &ProtocolConfig<f64>,
    configs: &MeterConfigs<f64>,
) -> Result<(), String> {
    let theta = cfg.theta();
    let gate_value = cfg.effective_modular_value().map_err(|e| e.to_string())?;
    let avg_re = bruteforce_conditional(cfg, &configs.q_re, 0.0)
        .map_err(|e| e.to_string())?
        .average;
    let avg_im = bruteforce_conditional(cfg, &configs.q_im, 0.0)
        .map_err(|e| e.to_string())?
        .average;
    let estimate = weak_estimate(avg_re, avg_im, theta).map_err(|e| e.to_string())?;
    let error = (estimate.as_complex() - gate_value.as_complex()).norm();
    if error > 0.05 * gate_value.modulus {
        return Err(format!(
            "weak estimate {:?} vs gate value {:?} (error {error}); {}",
            estimate.as_complex(),
            gate_value.as_complex(),
            describe_config(cfg)
        ));
    }
    let v =
        visibility_closed_form(theta, cfg.p_m, gate_value.modulus).map_err(|e| e.to_string())?;
    if (v / theta - gate_value.modulus).abs() > 0.05 * gate_value.modulus {
        return Err(format!(
            "V/theta {} vs |A_m| {}; {}",
            v / theta,
            gate_value.modulus,
            describe_config(cfg)
        ));
    }
    Ok(())
}

/// Runs all suites at the given trial count.
pub fn run_all(trials: usize, seed: u64) -> Vec<SuiteReport> {
    vec![
        suite_conditional_average(trials, seed),
        suite_visibility_identity(trials, seed),
        suite_modulus_round_trip(trials, seed),
        suite_geometric_phase(trials, seed),
        suite_criterion_ratio(trials, seed),
        suite_weak_limit(trials, seed),
    ]
}
