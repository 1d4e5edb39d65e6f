//! The quantum-eraser measurement protocol: controlled gate, meter
//! configurations, closed-form conditional statistics, the interference
//! pipeline, modulus inversion with branch selection, the weak-limit
//! extraction, and a brute-force 4x4 density-matrix oracle that uses no
//! closed forms.
//!
//! Conventions fixed here:
//! - Composite ordering is meter (x) probe throughout.
//! - The gate applies `e^{i delta} U_A` on the probe when the meter is in
//!   the `-r` sector; all conditional statistics therefore involve the
//!   effective gate value `e^{i delta} A_m`, which reduces to the modular
//!   value at the default `delta = 0` and to the Pauli weak value for the
//!   CNOT preset.
//! - The compensating phase shifter advances the `+r` sector relative to
//!   `-r`, so joint fringes follow `1 + V cos(phi - xi)` and the `q_re`
//!   fringe peaks exactly at `xi = phi`.
//! - Near-orthogonal post-selection never divides by the overlap: both the
//!   closed form and the oracle work with the unnormalized transition
//!   amplitudes `s = <f|i>` and `M = <f| e^{i delta} U_A |i>`.

use num_complex::Complex;
use thiserror::Error;

use crate::qmath::{
    density_from_bloch, pauli_along, projector, tensor_product, unitary_exp, BlochVector, CMat2,
    CMat4, PureState, QMathError,
};
use crate::values::{matrix_element, ComplexValue};
use crate::{real, wrap_angle, Scalar, DEFAULT_TOL, OVERLAP_GUARD};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("collinear configuration: m and r leave the eraser plane undefined")]
    CollinearConfiguration,
    #[error("eraser violation: q.r = {dot} but the final meter basis must be orthogonal to r")]
    EraserViolation { dot: f64 },
    #[error("no post-selection: the post-selected pair has probability below 1e-15")]
    NoPostselection,
    #[error("degenerate strength: theta must lie strictly inside (0, pi)")]
    DegenerateStrength,
    #[error("singular coefficient: epsilon is a multiple of 2 pi")]
    SingularCoefficient,
    #[error("invalid visibility: V = {value} is outside (0, 1]")]
    InvalidVisibility { value: f64 },
    #[error(
        "inconsistent visibility: V = {visibility} exceeds the achievable maximum for \
         theta = {theta}, P_m = {p_m}"
    )]
    InconsistentVisibility {
        visibility: f64,
        theta: f64,
        p_m: f64,
    },
    #[error("division undefined: measurement strength theta must be positive")]
    DivisionUndefined,
    #[error("interference scan needs at least 3 distinct phase settings, got {distinct}")]
    DegenerateGrid { distinct: usize },
    #[error("model violation: fit residual {residual} on exact data (implementation bug)")]
    ModelViolation { residual: f64 },
    #[error(transparent)]
    Math(#[from] QMathError),
}

pub type ProtocolResult<V> = Result<V, ProtocolError>;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Full specification of one protocol run.
#[derive(Debug, Clone, Copy)]
pub struct ProtocolConfig<T: Scalar> {
    /// Initial meter direction.
    pub m: BlochVector<T>,
    /// Meter purity, in [0, 1].
    pub p_m: T,
    /// Control direction of the gate.
    pub r: BlochVector<T>,
    /// Probe observable (Hermitian 2x2).
    pub a: CMat2<T>,
    /// Coupling strength in radians.
    pub g: T,
    /// Gate phase; zero unless set by the CNOT preset.
    pub delta: T,
    /// Pre-selected probe state.
    pub psi_i: PureState<T>,
    /// Post-selected probe state.
    pub psi_f: PureState<T>,
}

impl<T: Scalar> ProtocolConfig<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        m: BlochVector<T>,
        p_m: T,
        r: BlochVector<T>,
        a: CMat2<T>,
        g: T,
        delta: T,
        psi_i: PureState<T>,
        psi_f: PureState<T>,
    ) -> ProtocolResult<Self> {
        let tol = real::<T>(1e-9);
        for v in [&m, &r] {
            if !v.is_unit(tol) {
                return Err(ProtocolError::Math(QMathError::InvalidDirection {
                    norm: v.norm().to_f64().unwrap_or(f64::NAN),
                }));
            }
        }
        if p_m < T::zero() || p_m > T::one() {
            return Err(ProtocolError::Math(QMathError::InvalidPurity {
                value: p_m.to_f64().unwrap_or(f64::NAN),
            }));
        }
        if !a.is_hermitian(real::<T>(DEFAULT_TOL)) {
            return Err(ProtocolError::Math(QMathError::NotHermitian {
                tol: DEFAULT_TOL,
            }));
        }
        Ok(Self {
            m,
            p_m,
            r,
            a,
            g,
            delta,
            psi_i,
            psi_f,
        })
    }

    /// The conceptual CNOT preset: control `r = +z`, observable `sx / 2`
    /// at `g = pi` with gate phase `pi / 2`, meter tilted by `theta` in the
    /// xz plane, probe pre-selected in `|0>` and post-selected in
    /// `cos(alpha)|0> + sin(alpha)|1>`.
    ///
    /// This is the only constructor that sets `delta` away from zero.
    pub fn cnot_preset(theta: T, p_m: T, alpha: T) -> ProtocolResult<Self> {
        let m = BlochVector::new(theta.sin(), T::zero(), theta.cos());
        let r = BlochVector::z_axis();
        let half = Complex::new(real::<T>(0.5), T::zero());
        let a = pauli_along(&BlochVector::x_axis())?.scale(half);
        Self::new(
            m,
            p_m,
            r,
            a,
            T::PI(),
            T::FRAC_PI_2(),
            PureState::zero(),
            PureState::real_superposition(alpha),
        )
    }

    /// Measurement strength `theta = arccos(m.r)` in `[0, pi]`.
    pub fn theta(&self) -> T {
        self.m.dot(&self.r).min(T::one()).max(-T::one()).acos()
    }

    /// Pre/post-selection overlap `<psi_f|psi_i>`.
    pub fn overlap(&self) -> Complex<T> {
        self.psi_f.inner(&self.psi_i)
    }

    /// True when the post-selection is exactly orthogonal to the
    /// pre-selection (within the overlap guard).
    pub fn is_orthogonal_selection(&self) -> bool {
        self.overlap().norm() <= real::<T>(OVERLAP_GUARD)
    }

    /// Unnormalized transition amplitudes `(s, M)` with `s = <f|i>` and
    /// `M = <f| e^{i delta} U_A |i>`. The modular value is `M / s`, but the
    /// pipeline never forms that ratio when `s` is within the overlap guard.
    pub fn gate_amplitudes(&self) -> ProtocolResult<(Complex<T>, Complex<T>)> {
        let u = unitary_exp(&self.a, self.g)?;
        let phase = Complex::from_polar(T::one(), self.delta);
        let s = self.overlap();
        let m = matrix_element(&u, &self.psi_i, &self.psi_f) * phase;
        Ok((s, m))
    }

    /// Effective gate value `e^{i delta} A_m`. Errors on orthogonal
    /// post-selection; the interference pipeline is the sanctioned route
    /// there.
    pub fn effective_modular_value(&self) -> ProtocolResult<ComplexValue<T>> {
        let (s, m) = self.gate_amplitudes()?;
        if s.norm() <= real::<T>(OVERLAP_GUARD) {
            return Err(ProtocolError::NoPostselection);
        }
        Ok(ComplexValue::from_complex(m / s))
    }
}

// ---------------------------------------------------------------------------
// Gate, phase shifter, meter configurations
// ---------------------------------------------------------------------------

/// The controlled gate `Pi_r (x) I + e^{i delta} Pi_{-r} (x) exp(-i g A)`,
/// a 4x4 unitary on meter (x) probe.
pub fn build_gate<T: Scalar>(cfg: &ProtocolConfig<T>) -> ProtocolResult<CMat4<T>> {
    let pi_r = projector(&cfg.r)?;
    let pi_neg = projector(&cfg.r.scaled(-T::one()))?;
    let u_a = unitary_exp(&cfg.a, cfg.g)?;
    let phase = Complex::from_polar(T::one(), cfg.delta);
    let controlled = tensor_product(&pi_neg, &u_a).scale(phase);
    Ok(tensor_product(&pi_r, &CMat2::identity()).add(&controlled))
}

/// Compensating phase shifter on the meter: advances the `+r` sector by
/// `xi` relative to `-r` (equal to `Pi_r + e^{-i xi} Pi_{-r}` up to a global
/// phase), so the joint fringe reads `1 + V cos(phi - xi)` and peaks at
/// `xi = phi`.
pub fn phase_shifter<T: Scalar>(r: &BlochVector<T>, xi: T) -> ProtocolResult<CMat2<T>> {
    let pi_r = projector(r)?;
    let pi_neg = projector(&r.scaled(-T::one()))?;
    let phase = Complex::from_polar(T::one(), -xi);
    Ok(pi_r.add(&pi_neg.scale(phase)))
}

/// The two final meter directions of the eraser readout.
#[derive(Debug, Clone, Copy)]
pub struct MeterConfigs<T: Scalar> {
    /// In the (m, r) plane, orthogonal to r, with `m.q_re >= 0`: picks the
    /// real part of the gate value.
    pub q_re: BlochVector<T>,
    /// Along `r x m`: picks the imaginary part.
    pub q_im: BlochVector<T>,
}

/// Meter readout directions for initial direction `m` and control `r`.
///
/// Undefined when `m` and `r` are collinear (`theta` at 0 or pi).
pub fn meter_configs<T: Scalar>(
    m: &BlochVector<T>,
    r: &BlochVector<T>,
) -> ProtocolResult<MeterConfigs<T>> {
    let in_plane = m.sub(&r.scaled(m.dot(r)));
    let out_of_plane = r.cross(m);
    if in_plane.norm() <= real::<T>(1e-9) {
        return Err(ProtocolError::CollinearConfiguration);
    }
    Ok(MeterConfigs {
        q_re: in_plane.normalized().map_err(ProtocolError::Math)?,
        q_im: out_of_plane.normalized().map_err(ProtocolError::Math)?,
    })
}

// ---------------------------------------------------------------------------
// Conditional statistics
// ---------------------------------------------------------------------------

/// Conditional meter average together with run metadata.
#[derive(Debug, Clone, Copy)]
pub struct ConditionalAverage<T: Scalar> {
    /// The post-selected average of `sigma_q`, in [-1, 1].
    pub value: T,
    /// Probability of the post-selection succeeding.
    pub postselect_prob: T,
    /// Set when the post-selection is exactly orthogonal and the value came
    /// from the unnormalized limit form.
    pub orthogonal_limit: bool,
}

/// Closed-form conditional average of the meter observable `sigma_q` for
/// the post-selected sub-ensemble:
///
/// `2 P_m [ (m.q) Re G + ((r x m).q) Im G ]
///    / [ (1 + P_m m.r) + (1 - P_m m.r) |G|^2 ]`
///
/// with `G` the effective gate value. Requires the eraser condition
/// `q.r = 0`; evaluated on the unnormalized amplitudes so exactly
/// orthogonal post-selection degrades gracefully (flagged in the result).
pub fn conditional_meter_average<T: Scalar>(
    cfg: &ProtocolConfig<T>,
    q: &BlochVector<T>,
) -> ProtocolResult<ConditionalAverage<T>> {
    let tol = real::<T>(1e-9);
    if !q.is_unit(tol) {
        return Err(ProtocolError::Math(QMathError::InvalidDirection {
            norm: q.norm().to_f64().unwrap_or(f64::NAN),
        }));
    }
    let dot = q.dot(&cfg.r);
    if dot.abs() > tol {
        return Err(ProtocolError::EraserViolation {
            dot: dot.to_f64().unwrap_or(f64::NAN),
        });
    }

    let (s, m_amp) = cfg.gate_amplitudes()?;
    let z = m_amp * s.conj();
    let mr = cfg.m.dot(&cfg.r);
    let two = real::<T>(2.0);

    let numerator = two * cfg.p_m * (cfg.m.dot(q) * z.re + cfg.r.cross(&cfg.m).dot(q) * z.im);
    let denominator =
        (T::one() + cfg.p_m * mr) * s.norm_sqr() + (T::one() - cfg.p_m * mr) * m_amp.norm_sqr();
    if denominator < real::<T>(1e-15) {
        return Err(ProtocolError::NoPostselection);
    }

    Ok(ConditionalAverage {
        value: numerator / denominator,
        postselect_prob: denominator * real::<T>(0.5),
        orthogonal_limit: s.norm() <= real::<T>(OVERLAP_GUARD),
    })
}

/// Outcome of one brute-force evaluation of the full 4x4 evolution.
#[derive(Debug, Clone, Copy)]
pub struct BruteForceOutcome<T: Scalar> {
    /// `(p_q - p_{-q}) / (p_q + p_{-q})`.
    pub average: T,
    /// Joint probability of meter `+q` and probe `psi_f`.
    pub p_joint_q: T,
    /// Joint probability of meter `-q` and probe `psi_f`.
    pub p_joint_negq: T,
    /// `p_q + p_{-q}`, the post-selection probability.
    pub postselect_prob: T,
}

/// Independent oracle: builds `rho_m (x) |psi_i><psi_i|`, applies the gate,
/// applies `R_xi (x) I`, and reads joint probabilities as traces against
/// `Pi_{+-q} (x) |psi_f><psi_f|`. No closed forms are used, and `q` is not
/// required to satisfy the eraser condition.
pub fn bruteforce_conditional<T: Scalar>(
    cfg: &ProtocolConfig<T>,
    q: &BlochVector<T>,
    xi: T,
) -> ProtocolResult<BruteForceOutcome<T>> {
    let rho_m = density_from_bloch(&cfg.m, cfg.p_m)?;
    let mut rho = tensor_product(&rho_m, &cfg.psi_i.projector());

    let gate = build_gate(cfg)?;
    rho = gate.mul(&rho).mul(&gate.adjoint());

    let shifter = tensor_product(&phase_shifter(&cfg.r, xi)?, &CMat2::identity());
    rho = shifter.mul(&rho).mul(&shifter.adjoint());

    let pi_f = cfg.psi_f.projector();
    let joint_prob = |meter_dir: &BlochVector<T>| -> ProtocolResult<T> {
        let effect = tensor_product(&projector(meter_dir)?, &pi_f);
        Ok(effect.mul(&rho).trace().re)
    };
    let p_q = joint_prob(q)?;
    let p_negq = joint_prob(&q.scaled(-T::one()))?;

    let total = p_q + p_negq;
    if total < real::<T>(1e-15) {
        return Err(ProtocolError::NoPostselection);
    }
    Ok(BruteForceOutcome {
        average: (p_q - p_negq) / total,
        p_joint_q: p_q,
        p_joint_negq: p_negq,
        postselect_prob: total,
    })
}

/// Weak-measurement extraction of the gate value from the two meter
/// averages: `(avg_re + i avg_im) / theta`.
///
/// Valid only for small strengths `theta ~ 0` with purity close to one; at
/// larger strengths the nonlinear denominator of the conditional average
/// makes this estimate break down (by design, that breakdown is part of
/// what the polar pipeline demonstrates).
pub fn weak_estimate<T: Scalar>(avg_re: T, avg_im: T, theta: T) -> ProtocolResult<ComplexValue<T>> {
    if theta <= T::zero() {
        return Err(ProtocolError::DivisionUndefined);
    }
    Ok(ComplexValue::from_complex(Complex::new(
        avg_re / theta,
        avg_im / theta,
    )))
}

// ---------------------------------------------------------------------------
// Visibility algebra
// ---------------------------------------------------------------------------

/// Meter coefficient `C_eps = (1 + P_m)/2 + (1 - P_m)/2 cot^2(eps/2)`.
pub fn coefficient_c<T: Scalar>(epsilon: T, p_m: T) -> ProtocolResult<T> {
    let half = real::<T>(0.5);
    let s = (epsilon * half).sin();
    if s.abs() <= real::<T>(OVERLAP_GUARD) {
        return Err(ProtocolError::SingularCoefficient);
    }
    let cot = (epsilon * half).cos() / s;
    Ok((T::one() + p_m) * half + (T::one() - p_m) * half * cot * cot)
}

fn check_strength<T: Scalar>(theta: T) -> ProtocolResult<()> {
    if theta <= T::zero() || theta >= T::PI() {
        return Err(ProtocolError::DegenerateStrength);
    }
    Ok(())
}

/// Fringe visibility as a function of strength, purity, and gate-value
/// modulus:
///
/// `V = 2 P_m tan(theta/2) |A_m| / (C_{theta+pi} + C_theta tan^2(theta/2) |A_m|^2)`.
pub fn visibility_closed_form<T: Scalar>(theta: T, p_m: T, mod_am: T) -> ProtocolResult<T> {
    check_strength(theta)?;
    if mod_am.is_infinite() {
        return Ok(T::zero());
    }
    let t = (theta * real::<T>(0.5)).tan();
    let c_theta = coefficient_c(theta, p_m)?;
    let c_shift = coefficient_c(theta + T::PI(), p_m)?;
    let two = real::<T>(2.0);
    Ok(two * p_m * t * mod_am / (c_shift + c_theta * t * t * mod_am * mod_am))
}

/// Visibility from the unnormalized transition amplitudes `|s| = |<f|i>|`
/// and `|M| = |<f| e^{i delta} U_A |i>|`; identical to
/// [`visibility_closed_form`] with `|A_m| = |M|/|s|` but finite at exactly
/// orthogonal post-selection.
pub fn visibility_from_amplitudes<T: Scalar>(
    theta: T,
    p_m: T,
    s_abs: T,
    m_abs: T,
) -> ProtocolResult<T> {
    check_strength(theta)?;
    let t = (theta * real::<T>(0.5)).tan();
    let c_theta = coefficient_c(theta, p_m)?;
    let c_shift = coefficient_c(theta + T::PI(), p_m)?;
    let two = real::<T>(2.0);
    let denominator = c_shift * s_abs * s_abs + c_theta * t * t * m_abs * m_abs;
    if denominator <= real::<T>(1e-300) {
        return Err(ProtocolError::NoPostselection);
    }
    Ok(two * p_m * t * m_abs * s_abs / denominator)
}

/// The two candidate gate-value moduli for a measured visibility:
/// `|A_m|_{-+} = P_m (1 -+ sqrt(1 - C_theta C_{theta+pi} V^2 / P_m^2))
///               / (C_theta tan(theta/2) V)`,
/// returned as `(minus, plus)`. The discriminant is clamped to zero within
/// 1e-12 (double-root configurations sit exactly at floating-point noise).
pub fn modulus_from_visibility<T: Scalar>(v: T, theta: T, p_m: T) -> ProtocolResult<(T, T)> {
    check_strength(theta)?;
    if v <= T::zero() || v > T::one() {
        return Err(ProtocolError::InvalidVisibility {
            value: v.to_f64().unwrap_or(f64::NAN),
        });
    }
    if p_m <= T::zero() {
        return Err(ProtocolError::InconsistentVisibility {
            visibility: v.to_f64().unwrap_or(f64::NAN),
            theta: theta.to_f64().unwrap_or(f64::NAN),
            p_m: p_m.to_f64().unwrap_or(f64::NAN),
        });
    }
    let t = (theta * real::<T>(0.5)).tan();
    let c_theta = coefficient_c(theta, p_m)?;
    let c_shift = coefficient_c(theta + T::PI(), p_m)?;
    let disc = T::one() - c_theta * c_shift * v * v / (p_m * p_m);
    if disc < -real::<T>(1e-12) {
        return Err(ProtocolError::InconsistentVisibility {
            visibility: v.to_f64().unwrap_or(f64::NAN),
            theta: theta.to_f64().unwrap_or(f64::NAN),
            p_m: p_m.to_f64().unwrap_or(f64::NAN),
        });
    }
    let sq = disc.max(T::zero()).sqrt();
    let plus = p_m * (T::one() + sq) / (c_theta * t * v);
    // Cancellation-free form of P (1 - sqrt(disc)) / (C_theta t V).
    let minus = c_shift * v / (p_m * t * (T::one() + sq));
    Ok((minus, plus))
}

/// Branch criterion `tan^2(theta/2) (C_theta / C_{theta+pi}) |A_m|^2`.
///
/// At most one selects the minus root: values <= 1 pick `minus`, values > 1
/// pick `plus`. Equals the no-eraser probability ratio `p(-r|f) / p(r|f)`.
pub fn branch_criterion<T: Scalar>(theta: T, p_m: T, mod_am: T) -> ProtocolResult<T> {
    check_strength(theta)?;
    let t = (theta * real::<T>(0.5)).tan();
    let c_theta = coefficient_c(theta, p_m)?;
    let c_shift = coefficient_c(theta + T::PI(), p_m)?;
    Ok(t * t * (c_theta / c_shift) * mod_am * mod_am)
}

/// Picks the physical root from [`modulus_from_visibility`] output using
/// the measured criterion value.
pub fn select_branch<T: Scalar>(minus: T, plus: T, criterion: T) -> T {
    if criterion <= T::one() {
        minus
    } else {
        plus
    }
}

// ---------------------------------------------------------------------------
// Interference scan
// ---------------------------------------------------------------------------

/// Result of fitting the joint-probability fringe `c (1 + V cos(phi - xi))`.
#[derive(Debug, Clone, Copy)]
pub struct InterferenceResult<T: Scalar> {
    /// Fringe contrast in [0, 1].
    pub visibility: T,
    /// Compensating phase in `(-pi, pi]`; equals the argument of the
    /// effective gate value.
    pub phase: T,
    /// Fitted fringe maximum and minimum of the joint probability.
    pub p_max: T,
    pub p_min: T,
    /// Post-selection probability (independent of `xi`).
    pub postselect_prob: T,
}

/// The default scan settings `{0, pi/2, pi}`: an exact three-point
/// inversion of the fringe model.
pub fn default_scan_settings<T: Scalar>() -> [T; 3] {
    [T::zero(), T::FRAC_PI_2(), T::PI()]
}

/// Scans the compensating phase over `xi_values`, evaluating exact joint
/// probabilities at `q_re` through the brute-force backend, and fits
/// `p(xi) = c (1 + V cos(phi - xi))`.
///
/// On exact data the model is exact; a residual above 1e-8 (relative to the
/// fringe mean) signals an implementation bug and is reported as an error.
pub fn interference_scan<T: Scalar>(
    cfg: &ProtocolConfig<T>,
    xi_values: &[T],
) -> ProtocolResult<InterferenceResult<T>> {
    let configs = meter_configs(&cfg.m, &cfg.r)?;
    let mut samples = Vec::with_capacity(xi_values.len());
    let mut postselect = T::zero();
    for (idx, &xi) in xi_values.iter().enumerate() {
        let outcome = bruteforce_conditional(cfg, &configs.q_re, xi)?;
        samples.push((xi, outcome.p_joint_q));
        if idx == 0 {
            postselect = outcome.postselect_prob;
        }
    }
    let (offset, amp_cos, amp_sin, residual) = fit_fringe(&samples)?;

    let amplitude = (amp_cos * amp_cos + amp_sin * amp_sin).sqrt();
    if residual > real::<T>(1e-8) {
        return Err(ProtocolError::ModelViolation {
            residual: residual.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(InterferenceResult {
        visibility: amplitude / offset,
        phase: wrap_angle(amp_sin.atan2(amp_cos)),
        p_max: offset + amplitude,
        p_min: offset - amplitude,
        postselect_prob: postselect,
    })
}

/// Least-squares fit of `y = a + b cos(xi) + c sin(xi)`; returns
/// `(a, b, c, relative max residual)`. With exactly three distinct settings
/// this is the exact inversion.
pub(crate) fn fit_fringe<T: Scalar>(samples: &[(T, T)]) -> ProtocolResult<(T, T, T, T)> {
    let mut distinct: Vec<T> = Vec::new();
    for &(xi, _) in samples {
        let w = wrap_angle(xi);
        if !distinct.iter().any(|&d| (d - w).abs() < real::<T>(1e-9)) {
            distinct.push(w);
        }
    }
    if distinct.len() < 3 {
        return Err(ProtocolError::DegenerateGrid {
            distinct: distinct.len(),
        });
    }

    let mut ata = [[T::zero(); 3]; 3];
    let mut atb = [T::zero(); 3];
    for &(xi, y) in samples {
        let row = [T::one(), xi.cos(), xi.sin()];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] = ata[i][j] + row[i] * row[j];
            }
            atb[i] = atb[i] + row[i] * y;
        }
    }
    let coeff = solve3(&mut ata, &mut atb).ok_or(ProtocolError::DegenerateGrid {
        distinct: distinct.len(),
    })?;

    let mut max_residual = T::zero();
    for &(xi, y) in samples {
        let model = coeff[0] + coeff[1] * xi.cos() + coeff[2] * xi.sin();
        let r = (y - model).abs();
        if r > max_residual {
            max_residual = r;
        }
    }
    let scale = coeff[0].abs().max(real::<T>(1e-300));
    Ok((coeff[0], coeff[1], coeff[2], max_residual / scale))
}

/// Gaussian elimination with partial pivoting for a 3x3 system.
#[allow(clippy::needless_range_loop)]
fn solve3<T: Scalar>(a: &mut [[T; 3]; 3], b: &mut [T; 3]) -> Option<[T; 3]> {
    for col in 0..3 {
        let mut pivot = col;
        for row in (col + 1)..3 {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() <= real::<T>(1e-300) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..3 {
            let factor = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] = a[row][k] - factor * a[col][k];
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = [T::zero(); 3];
    for col in (0..3).rev() {
        let mut acc = b[col];
        for k in (col + 1)..3 {
            acc = acc - a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}
