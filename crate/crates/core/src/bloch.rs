//! Bloch-sphere geometry for the topological phase: mirror states,
//! Pancharatnam connections, oriented solid angles of geodesic polygons, and
//! the closed-form argument of Pauli weak values.
//!
//! Solid angles are computed through the Bargmann route, `-2 arg` of the
//! cyclic product of state overlaps, which is exactly the connection algebra
//! of the protocol. A direct spherical-excess formula serves as the
//! independent oracle in the tests.

use num_complex::Complex;
use thiserror::Error;

use crate::qmath::{bloch_from_state, state_from_bloch, BlochVector, PureState, QMathError};
use crate::{real, Scalar, OVERLAP_GUARD};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlochError {
    #[error("undefined connection: states are orthogonal within the overlap guard")]
    UndefinedConnection,
    #[error("degenerate loop: states {from} and {to} are orthogonal within the overlap guard")]
    DegenerateLoop { from: usize, to: usize },
    #[error("loop too short: a geodesic polygon needs at least 3 states, got {len}")]
    LoopTooShort { len: usize },
    #[error("ambiguous equator lift: state {which} sits at a pole")]
    AmbiguousLift { which: usize },
    #[error("orthogonal post-selection: i and f are antipodal")]
    OrthogonalPostselection,
    #[error("undefined argument: both atan2 arguments vanish")]
    UndefinedArgument,
    #[error(transparent)]
    Math(#[from] QMathError),
}

pub type BlochResult<V> = Result<V, BlochError>;

/// Loop orientation on the sphere, read off the sign of the solid angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Counterclockwise,
    Clockwise,
}

/// A signed, oriented solid angle in steradians, reported in `(-4 pi, 4 pi]`.
///
/// The sign flips under sequence reversal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolidAngle<T: Scalar> {
    pub value: T,
    pub orientation: Orientation,
}

impl<T: Scalar> SolidAngle<T> {
    fn from_value(value: T) -> Self {
        let orientation = if value < T::zero() {
            Orientation::Clockwise
        } else {
            Orientation::Counterclockwise
        };
        Self { value, orientation }
    }
}

/// Half-angle spherical coordinates: `2 eta` is the azimuth and `2 chi` the
/// latitude, so the Bloch vector is
/// `(cos 2eta cos 2chi, sin 2eta cos 2chi, sin 2chi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalCoord<T: Scalar> {
    pub eta: T,
    pub chi: T,
}

impl<T: Scalar> SphericalCoord<T> {
    pub fn new(eta: T, chi: T) -> Self {
        Self { eta, chi }
    }

    pub fn to_bloch(&self) -> BlochVector<T> {
        let two = real::<T>(2.0);
        let (ce, se) = ((two * self.eta).cos(), (two * self.eta).sin());
        let (cc, sc) = ((two * self.chi).cos(), (two * self.chi).sin());
        BlochVector::new(ce * cc, se * cc, sc)
    }

    /// Reads `(chi, eta)` off a unit Bloch vector. At a pole the azimuth is
    /// arbitrary and comes out as zero; pole rejection is the caller's job.
    pub fn from_bloch(v: &BlochVector<T>) -> Self {
        let z = v.z.min(T::one()).max(-T::one());
        let half = real::<T>(0.5);
        Self {
            chi: z.asin() * half,
            eta: v.y.atan2(v.x) * half,
        }
    }

    /// Equator-lift representative ket
    /// `(e^{-i eta} cos(pi/4 - chi), e^{+i eta} sin(pi/4 - chi))`.
    ///
    /// In this gauge the overlap of two states with the same azimuth, and
    /// the overlap of two equator states, are both real and the connection
    /// is in phase (arg 0). This is the horizontal-lift convention that the
    /// quadrangle identities assume.
    pub fn to_state(&self) -> PureState<T> {
        let u = T::FRAC_PI_4() - self.chi;
        PureState::new(
            Complex::from_polar(u.cos(), -self.eta),
            Complex::from_polar(u.sin(), self.eta),
        )
        .expect("equator-lift amplitudes are normalized by construction")
    }

    /// The equator point with the same azimuth (`chi = 0`).
    pub fn equator_lift(&self) -> Self {
        Self {
            eta: self.eta,
            chi: T::zero(),
        }
    }
}

/// Mirror image of `i` through the `n` axis: `2 (n.i) n - i`.
///
/// Unit norm is preserved; the fixed points are `+-n`.
pub fn mirror_image<T: Scalar>(i: &BlochVector<T>, n: &BlochVector<T>) -> BlochVector<T> {
    let two = real::<T>(2.0);
    n.scaled(two * n.dot(i)).sub(i)
}

/// Pancharatnam connection `arg <b|a>` in `(-pi, pi]`.
///
/// Errors if the states are orthogonal within the overlap guard. The value
/// depends on the global phases of the representatives handed in; states
/// built through [`SphericalCoord::to_state`] satisfy the closed form of
/// [`pancharatnam_closed_form`].
pub fn pancharatnam_connection<T: Scalar>(a: &PureState<T>, b: &PureState<T>) -> BlochResult<T> {
    let overlap = b.inner(a);
    if overlap.norm() <= real::<T>(OVERLAP_GUARD) {
        return Err(BlochError::UndefinedConnection);
    }
    Ok(crate::wrap_angle(overlap.arg()))
}

/// Closed form of the connection for equator-lift representatives:
/// `arg <b|a> = atan2(sin(eta_b - eta_a) sin(chi_a + chi_b),
///                    cos(eta_b - eta_a) cos(chi_a - chi_b))`.
pub fn pancharatnam_closed_form<T: Scalar>(a: &SphericalCoord<T>, b: &SphericalCoord<T>) -> T {
    let d = b.eta - a.eta;
    let num = d.sin() * (a.chi + b.chi).sin();
    let den = d.cos() * (a.chi - b.chi).cos();
    num.atan2(den)
}

/// Oriented solid angle of the geodesic polygon through `states`, from the
/// Bargmann product: `-2 arg(<s1|sk><sk|s(k-1)> ... <s2|s1>)`.
///
/// Positive when the sequence runs counterclockwise seen from outside the
/// sphere. Reversing the sequence flips the sign exactly.
pub fn bargmann_solid_angle<T: Scalar>(states: &[PureState<T>]) -> BlochResult<SolidAngle<T>> {
    let k = states.len();
    if k < 3 {
        return Err(BlochError::LoopTooShort { len: k });
    }
    let guard = real::<T>(OVERLAP_GUARD);
    let mut product = Complex::new(T::one(), T::zero());
    for j in 0..k {
        // Edge s_j -> s_{j+1} contributes <s_{j+1}|s_j>.
        let next = (j + 1) % k;
        let overlap = states[next].inner(&states[j]);
        if overlap.norm() <= guard {
            return Err(BlochError::DegenerateLoop { from: j, to: next });
        }
        product = product * overlap;
    }
    Ok(SolidAngle::from_value(-real::<T>(2.0) * product.arg()))
}

/// Splits the spherical triangle `(a, b, c)` into the three spherical
/// quadrangles built on the equator lifts of its vertices, returning
/// `(O_abbea_e, O_bccebe, O_caaece)`.
///
/// Their sum reproduces the triangle's solid angle whenever the equator
/// projections of consecutive vertices are connected by their short arcs
/// without winding around the equator (the configuration the lift picture
/// assumes); a full winding shifts the sum by one hemisphere (2 pi).
pub fn decompose_triangle<T: Scalar>(
    a: &PureState<T>,
    b: &PureState<T>,
    c: &PureState<T>,
) -> BlochResult<[SolidAngle<T>; 3]> {
    let states = [a, b, c];
    let mut lifts: [Option<PureState<T>>; 3] = [None, None, None];
    for (idx, s) in states.iter().enumerate() {
        let v = bloch_from_state(s);
        // cos(2 chi) is the distance from the polar axis.
        if (v.x * v.x + v.y * v.y).sqrt() <= real::<T>(OVERLAP_GUARD) {
            return Err(BlochError::AmbiguousLift { which: idx });
        }
        lifts[idx] = Some(SphericalCoord::from_bloch(&v).equator_lift().to_state());
    }
    let (ae, be, ce) = (
        lifts[0].expect("lift computed"),
        lifts[1].expect("lift computed"),
        lifts[2].expect("lift computed"),
    );
    Ok([
        bargmann_solid_angle(&[*a, *b, be, ae])?,
        bargmann_solid_angle(&[*b, *c, ce, be])?,
        bargmann_solid_angle(&[*c, *a, ae, ce])?,
    ])
}

/// Argument of the weak value of the Pauli observable along `n` for
/// pre-selection `i` and post-selection `f`, in closed form:
/// `atan2((n x i).f, n.i + n.f)`.
///
/// Equals `-O(i, n, i', f) / 2` modulo `2 pi`, with `i'` the mirror image of
/// `i` through `n` and `O` the Bargmann solid angle of the quadrangle, and
/// equals the argument of the directly computed weak value.
pub fn weak_argument_geometric<T: Scalar>(
    i: &BlochVector<T>,
    n: &BlochVector<T>,
    f: &BlochVector<T>,
) -> BlochResult<T> {
    for v in [i, n, f] {
        if !v.is_unit(real::<T>(1e-9)) {
            return Err(BlochError::Math(QMathError::InvalidDirection {
                norm: v.norm().to_f64().unwrap_or(f64::NAN),
            }));
        }
    }
    // |<f|i>|^2 = (1 + f.i) / 2 vanishes only for antipodal directions.
    let two = real::<T>(2.0);
    if (T::one() + i.dot(f)) <= two * real::<T>(OVERLAP_GUARD) * real::<T>(OVERLAP_GUARD) {
        return Err(BlochError::OrthogonalPostselection);
    }
    let y = n.cross(i).dot(f);
    let x = n.dot(i) + n.dot(f);
    let guard = real::<T>(1e-14);
    if y.abs() < guard && x.abs() < guard {
        return Err(BlochError::UndefinedArgument);
    }
    Ok(crate::wrap_angle(y.atan2(x)))
}

/// Bargmann solid angle of the quadrangle `(i, n, i', f)` entering the weak
/// value argument, built from canonical state representatives (the cyclic
/// product is gauge invariant).
pub fn weak_value_quadrangle<T: Scalar>(
    i: &BlochVector<T>,
    n: &BlochVector<T>,
    f: &BlochVector<T>,
) -> BlochResult<SolidAngle<T>> {
    let mirrored = mirror_image(i, n);
    let loop_states = [
        state_from_bloch(i)?,
        state_from_bloch(n)?,
        state_from_bloch(&mirrored)?,
        state_from_bloch(f)?,
    ];
    bargmann_solid_angle(&loop_states)
}
