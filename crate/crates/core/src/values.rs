//! Definition-level weak and modular values and their polar representation.
//!
//! These are the reference truths the protocol module must reproduce from
//! interference data. Both quantities are conditional amplitude ratios of a
//! pre- and post-selected ensemble; the weak value attaches to the observable
//! itself, the modular value to the unitary it generates.
//!
//! Qubit convention: rotations `exp(-i (g/2) sigma_n)` are obtained by
//! passing `A = sigma_n / 2` to the generic `exp(-i g A)` — one exponential
//! code path, conventions resolved at the call sites.

use num_complex::Complex;
use thiserror::Error;

use crate::qmath::{unitary_exp, CMat2, PureState, QMathError};
use crate::{real, Scalar, OVERLAP_GUARD};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValueError {
    #[error("orthogonal post-selection: |<psi_f|psi_i>| is below the overlap guard")]
    OrthogonalPostselection,
    #[error("division undefined: coupling strength g must be nonzero")]
    DivisionUndefined,
    #[error(transparent)]
    Math(#[from] QMathError),
}

pub type ValueResult<V> = Result<V, ValueError>;

/// A complex value carried in both rectangular and polar form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexValue<T: Scalar> {
    pub re: T,
    pub im: T,
    pub modulus: T,
    pub argument: T,
}

impl<T: Scalar> ComplexValue<T> {
    pub fn from_complex(z: Complex<T>) -> Self {
        Self {
            re: z.re,
            im: z.im,
            modulus: z.norm(),
            argument: z.arg(),
        }
    }

    pub fn as_complex(&self) -> Complex<T> {
        Complex::new(self.re, self.im)
    }
}

/// Transition amplitude `<psi_f| M |psi_i>`.
pub(crate) fn matrix_element<T: Scalar>(
    m: &CMat2<T>,
    psi_i: &PureState<T>,
    psi_f: &PureState<T>,
) -> Complex<T> {
    let applied = psi_i.apply(m);
    let [f0, f1] = psi_f.amplitudes();
    f0.conj() * applied[0] + f1.conj() * applied[1]
}

fn post_selected_ratio<T: Scalar>(
    numerator: Complex<T>,
    psi_i: &PureState<T>,
    psi_f: &PureState<T>,
) -> ValueResult<ComplexValue<T>> {
    let overlap = psi_f.inner(psi_i);
    if overlap.norm() <= real::<T>(OVERLAP_GUARD) {
        return Err(ValueError::OrthogonalPostselection);
    }
    Ok(ComplexValue::from_complex(numerator / overlap))
}

/// Weak value `<psi_f| A |psi_i> / <psi_f|psi_i>` of a Hermitian observable.
///
/// Orthogonal pre- and post-selection is an error here; the protocol
/// pipeline, not this definition, is the sanctioned route for nearly
/// orthogonal post-selection.
pub fn weak_value<T: Scalar>(
    a: &CMat2<T>,
    psi_i: &PureState<T>,
    psi_f: &PureState<T>,
) -> ValueResult<ComplexValue<T>> {
    if !a.is_hermitian(real::<T>(crate::DEFAULT_TOL)) {
        return Err(ValueError::Math(QMathError::NotHermitian {
            tol: crate::DEFAULT_TOL,
        }));
    }
    post_selected_ratio(matrix_element(a, psi_i, psi_f), psi_i, psi_f)
}

/// Modular value `<psi_f| exp(-i g A) |psi_i> / <psi_f|psi_i>`.
pub fn modular_value<T: Scalar>(
    a: &CMat2<T>,
    g: T,
    psi_i: &PureState<T>,
    psi_f: &PureState<T>,
) -> ValueResult<ComplexValue<T>> {
    let u = unitary_exp(a, g)?;
    post_selected_ratio(matrix_element(&u, psi_i, psi_f), psi_i, psi_f)
}

/// First-order extraction of the weak value from a modular value:
/// `(1 - A_m) / (i g)`, from `A_m = 1 - i g A_w + o(g^2)`.
///
/// Converges to the weak value as `g -> 0` with error of order `g`.
pub fn weak_from_modular_firstorder<T: Scalar>(
    a_m: &ComplexValue<T>,
    g: T,
) -> ValueResult<ComplexValue<T>> {
    if g == T::zero() {
        return Err(ValueError::DivisionUndefined);
    }
    let one = Complex::new(T::one(), T::zero());
    let ig = Complex::new(T::zero(), g);
    Ok(ComplexValue::from_complex((one - a_m.as_complex()) / ig))
}

/// Exact inversion of the Pauli equivalence `A_m = -i sigma_{n,w}` that
/// holds for `A = sigma_n / 2` at `g = pi`: returns `i A_m`.
pub fn sigma_weak_from_modular_exact<T: Scalar>(a_m: &ComplexValue<T>) -> ComplexValue<T> {
    ComplexValue::from_complex(Complex::new(T::zero(), T::one()) * a_m.as_complex())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle_distance;
    use crate::qmath::{pauli_along, state_from_bloch, BlochVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn plus() -> PureState<f64> {
        PureState::real_superposition(std::f64::consts::FRAC_PI_4)
    }

    fn random_unit(rng: &mut impl Rng) -> BlochVector<f64> {
        loop {
            let v = BlochVector::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 0.1 && n < 1.0 {
                return v.normalized().unwrap();
            }
        }
    }

    #[test]
    fn weak_value_eigenstate_input() {
        let sz = pauli_along(&BlochVector::<f64>::z_axis()).unwrap();
        let w = weak_value(&sz, &PureState::zero(), &plus()).unwrap();
        assert_close(w.re, 1.0, 1e-15);
        assert_close(w.im, 0.0, 1e-15);
    }

    #[test]
    fn weak_value_tan_alpha_family() {
        // A = sx, psi_i = |0>, psi_f = cos a |0> + sin a |1>:
        // <f|sx|0> = sin a, <f|0> = cos a, so sigma_{x,w} = tan a.
        let sx = pauli_along(&BlochVector::<f64>::x_axis()).unwrap();
        for alpha in [std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_3] {
            let psi_f = PureState::real_superposition(alpha);
            let w = weak_value(&sx, &PureState::zero(), &psi_f).unwrap();
            assert_close(w.re, alpha.tan(), 1e-12);
            assert_close(w.im, 0.0, 1e-15);
        }
    }

    #[test]
    fn weak_value_rejects_orthogonal() {
        let sx = pauli_along(&BlochVector::<f64>::x_axis()).unwrap();
        let err = weak_value(&sx, &PureState::zero(), &PureState::one()).unwrap_err();
        assert!(matches!(err, ValueError::OrthogonalPostselection));
    }

    #[test]
    fn modular_value_identity_evolution() {
        let sx = pauli_along(&BlochVector::<f64>::x_axis()).unwrap();
        let m = modular_value(&sx, 0.0, &PureState::zero(), &plus()).unwrap();
        assert_close(m.re, 1.0, 1e-15);
        assert_close(m.im, 0.0, 1e-15);
    }

    #[test]
    fn modular_value_pi_pulse_is_minus_i_weak() {
        let sx = pauli_along(&BlochVector::<f64>::x_axis()).unwrap();
        let half_sx = sx.scale(Complex::new(0.5, 0.0));

        // psi_f = |+>: A_m = -i.
        let m = modular_value(&half_sx, std::f64::consts::PI, &PureState::zero(), &plus()).unwrap();
        assert_close(m.re, 0.0, 1e-15);
        assert_close(m.im, -1.0, 1e-12);

        // General alpha: A_m = -i tan(alpha).
        let alpha = 0.3;
        let psi_f = PureState::real_superposition(alpha);
        let m = modular_value(&half_sx, std::f64::consts::PI, &PureState::zero(), &psi_f).unwrap();
        assert_close(m.re, 0.0, 1e-14);
        assert_close(m.im, -alpha.tan(), 1e-12);
    }

    #[test]
    fn firstorder_extraction_identity_and_convergence() {
        let one = ComplexValue::from_complex(Complex::new(1.0, 0.0));
        let w = weak_from_modular_firstorder(&one, 0.7).unwrap();
        assert_close(w.modulus, 0.0, 1e-15);

        // A = sz, psi_i = |0>, psi_f = |+>: weak value 1. At g = 1e-4 the
        // first-order estimate lands within 1e-4.
        let sz = pauli_along(&BlochVector::<f64>::z_axis()).unwrap();
        let m = modular_value(&sz, 1e-4, &PureState::zero(), &plus()).unwrap();
        let w = weak_from_modular_firstorder(&m, 1e-4).unwrap();
        assert!((w.as_complex() - Complex::new(1.0, 0.0)).norm() < 1e-4);
    }

    #[test]
    fn firstorder_error_scales_linearly_in_g() {
        // psi_f = cos a|0> + sin a|1> with A = sx: exact weak value tan a.
        let sx = pauli_along(&BlochVector::<f64>::x_axis()).unwrap();
        let psi_f = PureState::real_superposition(0.5);
        let exact = Complex::new(0.5f64.tan(), 0.0);
        let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&g| {
                let m = modular_value(&sx, g, &PureState::zero(), &psi_f).unwrap();
                let w = weak_from_modular_firstorder(&m, g).unwrap();
                (w.as_complex() - exact).norm()
            })
            .collect();
        // One decade in g is one decade in error, within a factor ~2.
        assert!(errs[0] / errs[1] > 5.0 && errs[0] / errs[1] < 20.0);
        assert!(errs[1] / errs[2] > 5.0 && errs[1] / errs[2] < 20.0);
    }

    #[test]
    fn firstorder_rejects_zero_g() {
        let one = ComplexValue::from_complex(Complex::new(1.0, 0.0));
        assert!(matches!(
            weak_from_modular_firstorder(&one, 0.0),
            Err(ValueError::DivisionUndefined)
        ));
    }

    #[test]
    fn exact_equivalence_examples() {
        let minus_i = ComplexValue::from_complex(Complex::new(0.0, -1.0));
        let w = sigma_weak_from_modular_exact(&minus_i);
        assert_close(w.re, 1.0, 1e-15);
        assert_close(w.im, 0.0, 1e-15);

        let m = ComplexValue::from_complex(Complex::new(0.0, -0.75));
        let w = sigma_weak_from_modular_exact(&m);
        assert_close(w.re, 0.75, 1e-15);
    }

    #[test]
    fn exact_equivalence_random_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut checked = 0;
        while checked < 1000 {
            let i = random_unit(&mut rng);
            let n = random_unit(&mut rng);
            let f = random_unit(&mut rng);
            if i.dot(&f) < -0.95 {
                continue;
            }
            let psi_i = state_from_bloch(&i).unwrap();
            let psi_f = state_from_bloch(&f).unwrap();
            let sn = pauli_along(&n).unwrap();
            let half_sn = sn.scale(Complex::new(0.5, 0.0));

            let a_m = modular_value(&half_sn, std::f64::consts::PI, &psi_i, &psi_f).unwrap();
            let via_modular = sigma_weak_from_modular_exact(&a_m);
            let direct = weak_value(&sn, &psi_i, &psi_f).unwrap();
            assert!(
                (via_modular.as_complex() - direct.as_complex()).norm() < 1e-10,
                "{via_modular:?} vs {direct:?}"
            );
            checked += 1;
        }
    }

    #[test]
    fn modulus_invariant_under_global_phases() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let sx = pauli_along(&BlochVector::<f64>::x_axis()).unwrap();
        for _ in 0..1000 {
            let i = random_unit(&mut rng);
            let f = random_unit(&mut rng);
            if i.dot(&f) < -0.95 {
                continue;
            }
            let psi_i = state_from_bloch(&i).unwrap();
            let psi_f = state_from_bloch(&f).unwrap();
            let g: f64 = rng.gen_range(-3.0..3.0);

            let phase_i = Complex::from_polar(1.0, rng.gen_range(-3.0..3.0));
            let phase_f = Complex::from_polar(1.0, rng.gen_range(-3.0..3.0));
            let [i0, i1] = psi_i.amplitudes();
            let [f0, f1] = psi_f.amplitudes();
            let psi_i2 = PureState::new(i0 * phase_i, i1 * phase_i).unwrap();
            let psi_f2 = PureState::new(f0 * phase_f, f1 * phase_f).unwrap();

            let m1 = modular_value(&sx, g, &psi_i, &psi_f).unwrap();
            let m2 = modular_value(&sx, g, &psi_i2, &psi_f2).unwrap();
            assert_close(m1.modulus, m2.modulus, 1e-12);
        }
    }

    #[test]
    fn weak_argument_matches_geometric_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let mut checked = 0;
        while checked < 1000 {
            let i = random_unit(&mut rng);
            let n = random_unit(&mut rng);
            let f = random_unit(&mut rng);
            if i.dot(&f) < -0.95 {
                continue;
            }
            let w = weak_value(
                &pauli_along(&n).unwrap(),
                &state_from_bloch(&i).unwrap(),
                &state_from_bloch(&f).unwrap(),
            )
            .unwrap();
            let geometric = match crate::bloch::weak_argument_geometric(&i, &n, &f) {
                Ok(v) => v,
                Err(_) => continue,
            };
            assert!(angle_distance(w.argument, geometric) < 1e-9);
            checked += 1;
        }
    }

    #[test]
    fn exponential_additivity_sanity() {
        // <f|U(g1)U(g2)|i>/<f|i> equals the modular value at g1 + g2.
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let sx = pauli_along(&BlochVector::<f64>::x_axis()).unwrap();
        for _ in 0..200 {
            let g1: f64 = rng.gen_range(-2.0..2.0);
            let g2: f64 = rng.gen_range(-2.0..2.0);
            let f = random_unit(&mut rng);
            if f.z < -0.9 {
                continue;
            }
            let psi_i = PureState::zero();
            let psi_f = state_from_bloch(&f).unwrap();

            let u1 = unitary_exp(&sx, g1).unwrap();
            let u2 = unitary_exp(&sx, g2).unwrap();
            let combined = matrix_element(&u1.mul(&u2), &psi_i, &psi_f) / psi_f.inner(&psi_i);
            let direct = modular_value(&sx, g1 + g2, &psi_i, &psi_f).unwrap();
            assert!((combined - direct.as_complex()).norm() < 1e-12);
        }
    }

    #[test]
    fn finite_difference_derivative_at_zero() {
        // dA_m/dg at g=0 equals -i A_w, central differences at h = 1e-5.
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let h = 1e-5;
        for _ in 0..100 {
            let n = random_unit(&mut rng);
            let f = random_unit(&mut rng);
            if f.z < -0.9 {
                continue;
            }
            let a = pauli_along(&n).unwrap();
            let psi_i = PureState::zero();
            let psi_f = state_from_bloch(&f).unwrap();

            let m_plus = modular_value(&a, h, &psi_i, &psi_f).unwrap().as_complex();
            let m_minus = modular_value(&a, -h, &psi_i, &psi_f).unwrap().as_complex();
            let derivative = (m_plus - m_minus) / Complex::new(2.0 * h, 0.0);

            let w = weak_value(&a, &psi_i, &psi_f).unwrap().as_complex();
            let expected = Complex::new(0.0, -1.0) * w;
            assert!(
                (derivative - expected).norm() < 1e-6,
                "{derivative} vs {expected}"
            );
        }
    }

    #[test]
    fn complex_value_polar_consistency() {
        let z = Complex::new(-1.25f64, 0.5);
        let v = ComplexValue::from_complex(z);
        assert_close(v.modulus * v.argument.cos(), v.re, 1e-12);
        assert_close(v.modulus * v.argument.sin(), v.im, 1e-12);
        assert!(v.argument > -std::f64::consts::PI && v.argument <= std::f64::consts::PI);
    }
}
