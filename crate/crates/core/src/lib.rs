//! Desk-scale simulation of a qubit-meter quantum eraser interferometer.
//!
//! A probe qubit prepared in `|psi_i>` interacts with a qubit meter through a
//! controlled gate, the meter is read out in a basis orthogonal to the control
//! direction (the eraser condition), and the probe is post-selected on
//! `|psi_f>`. The fringe visibility and the compensating phase of the joint
//! detection pattern encode the modulus and the argument of the modular value
//! of the probe observable, which for Pauli observables at coupling `g = pi`
//! is equivalent to the weak value. The crate provides:
//!
//! - [`qmath`]: fixed-size complex linear algebra for 2x2 and 4x4 operators,
//!   Pauli algebra and Bloch-sphere conversions,
//! - [`bloch`]: Bloch-sphere geometry for the topological phase (mirror
//!   states, Pancharatnam connections, Bargmann solid angles),
//! - [`values`]: definition-level weak and modular values,
//! - [`protocol`]: the eraser measurement protocol (gate, meter
//!   configurations, closed-form statistics, visibility inversion) together
//!   with a brute-force density-matrix oracle,
//! - [`experiment`]: shot-noise emulation of the coincidence experiment with
//!   seeded, splittable randomness,
//! - [`verify`]: the cross-route consistency suites used by the CLI.
//!
//! All core math is generic over the real scalar type through [`Scalar`];
//! concrete `f64` aliases are exported at the crate root.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

pub mod bloch;
pub mod experiment;
pub mod protocol;
pub mod qmath;
pub mod values;
pub mod verify;

/// Real scalar type for the simulation: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Shorthand for lifting an `f64` literal into the generic scalar type.
#[inline]
pub(crate) fn real<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal must convert into the scalar type")
}

/// Default comparison tolerance used by validation predicates.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Guard threshold on overlap moduli below which geometry is rejected as
/// degenerate rather than extrapolated.
pub const OVERLAP_GUARD: f64 = 1e-12;

/// Wraps an angle into the half-open interval `(-pi, pi]`.
pub fn wrap_angle<T: Scalar>(x: T) -> T {
    let two_pi = T::PI() + T::PI();
    let y = (x + T::PI()).rem(two_pi);
    let y = if y <= T::zero() { y + two_pi } else { y };
    y - T::PI()
}

/// Angular distance between `a` and `b` modulo `2 pi`, in `[0, pi]`.
pub fn angle_distance<T: Scalar>(a: T, b: T) -> T {
    wrap_angle(a - b).abs()
}

pub use bloch::{SolidAngle, SphericalCoord};
pub use protocol::{InterferenceResult, MeterConfigs, ProtocolConfig};
pub use qmath::{BlochVector, CMat2, CMat4, PureState};
pub use values::ComplexValue;

/// `f64` aliases for the crate's domain types.
pub type PureState64 = PureState<f64>;
pub type BlochVector64 = BlochVector<f64>;
pub type CMat2f64 = CMat2<f64>;
pub type CMat4f64 = CMat4<f64>;
pub type ComplexValue64 = ComplexValue<f64>;
pub type ProtocolConfig64 = ProtocolConfig<f64>;
pub type SphericalCoord64 = SphericalCoord<f64>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_half_open_interval() {
        let pi = std::f64::consts::PI;
        assert_eq!(wrap_angle(pi), pi);
        assert_eq!(wrap_angle(-pi), pi);
        assert!((wrap_angle(3.0 * pi) - pi).abs() < 1e-12);
        assert!(wrap_angle(0.0).abs() < 1e-15);
        assert!((wrap_angle(2.5 * pi) - 0.5 * pi).abs() < 1e-12);
        assert!((wrap_angle(-2.5 * pi) + 0.5 * pi).abs() < 1e-12);
    }

    #[test]
    fn angle_distance_is_symmetric_mod_2pi() {
        let pi = std::f64::consts::PI;
        assert!(angle_distance(0.1, 0.1 + 2.0 * pi) < 1e-12);
        assert!((angle_distance(-pi + 1e-3, pi - 1e-3) - 2e-3).abs() < 1e-9);
    }

    #[test]
    fn wrap_angle_works_in_f32() {
        let pi = std::f32::consts::PI;
        assert!((wrap_angle(3.0f32 * pi) - pi).abs() < 1e-5);
    }

    #[test]
    fn concrete_aliases_resolve() {
        let v: BlochVector64 = BlochVector64::z_axis();
        let s: PureState64 = qmath::state_from_bloch(&v).unwrap();
        let p: CMat2f64 = s.projector();
        assert!((p.trace().re - 1.0).abs() < 1e-15);
        let joint: CMat4f64 = qmath::tensor_product(&p, &CMat2f64::identity());
        assert!((joint.trace().re - 2.0).abs() < 1e-15);
        let cfg: ProtocolConfig64 =
            ProtocolConfig64::cnot_preset(0.3 * std::f64::consts::PI, 0.9, 0.2).unwrap();
        let value: ComplexValue64 = cfg.effective_modular_value().unwrap();
        assert!((value.re - 0.2f64.tan()).abs() < 1e-12);
        let sc: SphericalCoord64 = SphericalCoord64::new(0.1, 0.2);
        assert!((sc.to_bloch().z - 0.4f64.sin()).abs() < 1e-15);
    }
}
