//! Fixed-size complex linear algebra for 2x2 and 4x4 operators, Pauli
//! algebra, Bloch-sphere conversions and density-operator construction.
//!
//! Dimensions are fixed by the types ([`CMat2`], [`CMat4`]), so shape errors
//! are unrepresentable. The tensor ordering is meter-first everywhere:
//! `tensor_product(meter, probe)` indexes the composite space as
//! `2 * meter_index + probe_index`. This convention is fixed repo-wide and
//! never configurable.

use num_complex::Complex;
use thiserror::Error;

use crate::{real, Scalar, DEFAULT_TOL, OVERLAP_GUARD};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QMathError {
    #[error("invalid direction: expected a unit vector, got norm {norm}")]
    InvalidDirection { norm: f64 },
    #[error("invalid purity: P_m must lie in [0, 1], got {value}")]
    InvalidPurity { value: f64 },
    #[error("invalid observable: matrix is not Hermitian within {tol}")]
    NotHermitian { tol: f64 },
    #[error("zero state: amplitudes have vanishing norm")]
    ZeroState,
}

pub type QMathResult<V> = Result<V, QMathError>;

// ---------------------------------------------------------------------------
// Bloch vectors
// ---------------------------------------------------------------------------

/// A real 3-vector on (or inside) the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector<T: Scalar> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> BlochVector<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    /// +z axis.
    pub fn z_axis() -> Self {
        Self::new(T::zero(), T::zero(), T::one())
    }

    /// +x axis.
    pub fn x_axis() -> Self {
        Self::new(T::one(), T::zero(), T::zero())
    }

    /// +y axis.
    pub fn y_axis() -> Self {
        Self::new(T::zero(), T::one(), T::zero())
    }

    pub fn dot(&self, other: &Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn scaled(&self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    /// Returns the unit vector along `self`, or an error for near-zero input.
    pub fn normalized(&self) -> QMathResult<Self> {
        let n = self.norm();
        if n <= real::<T>(OVERLAP_GUARD) {
            return Err(QMathError::InvalidDirection {
                norm: n.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(self.scaled(T::one() / n))
    }

    pub fn is_unit(&self, tol: T) -> bool {
        (self.norm() - T::one()).abs() <= tol
    }

    fn require_unit(&self, tol: T) -> QMathResult<()> {
        if self.is_unit(tol) {
            Ok(())
        } else {
            Err(QMathError::InvalidDirection {
                norm: self.norm().to_f64().unwrap_or(f64::NAN),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Pure states
// ---------------------------------------------------------------------------

/// A normalized 2-component complex amplitude vector (one qubit).
///
/// Construction normalizes; the global phase is kept as given. Canonical
/// form (first significant amplitude real and non-negative) is applied only
/// at comparison boundaries through [`PureState::canonicalized`], never
/// silently inside evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState<T: Scalar> {
    amp: [Complex<T>; 2],
}

impl<T: Scalar> PureState<T> {
    /// Normalizes the given amplitudes. Errors on a zero vector.
    pub fn new(a0: Complex<T>, a1: Complex<T>) -> QMathResult<Self> {
        let n = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
        if n <= real::<T>(OVERLAP_GUARD) {
            return Err(QMathError::ZeroState);
        }
        let inv = T::one() / n;
        Ok(Self {
            amp: [a0.scale(inv), a1.scale(inv)],
        })
    }

    /// `|0>` (the +z pole).
    pub fn zero() -> Self {
        Self {
            amp: [
                Complex::new(T::one(), T::zero()),
                Complex::new(T::zero(), T::zero()),
            ],
        }
    }

    /// `|1>` (the -z pole).
    pub fn one() -> Self {
        Self {
            amp: [
                Complex::new(T::zero(), T::zero()),
                Complex::new(T::one(), T::zero()),
            ],
        }
    }

    /// `cos(alpha)|0> + sin(alpha)|1>`, the real post-selection family.
    pub fn real_superposition(alpha: T) -> Self {
        Self {
            amp: [
                Complex::new(alpha.cos(), T::zero()),
                Complex::new(alpha.sin(), T::zero()),
            ],
        }
    }

    pub fn amplitudes(&self) -> [Complex<T>; 2] {
        self.amp
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amp[0].conj() * other.amp[0] + self.amp[1].conj() * other.amp[1]
    }

    /// Rank-1 projector `|self><self|`.
    pub fn projector(&self) -> CMat2<T> {
        let mut m = CMat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                m.e[i][j] = self.amp[i] * self.amp[j].conj();
            }
        }
        m
    }

    /// A state orthogonal to `self`: `(-conj(a1), conj(a0))`.
    pub fn orthogonal(&self) -> Self {
        Self {
            amp: [-self.amp[1].conj(), self.amp[0].conj()],
        }
    }

    /// Applies a 2x2 operator: `m |self>` (unnormalized result returned as
    /// raw amplitudes).
    pub fn apply(&self, m: &CMat2<T>) -> [Complex<T>; 2] {
        [
            m.e[0][0] * self.amp[0] + m.e[0][1] * self.amp[1],
            m.e[1][0] * self.amp[0] + m.e[1][1] * self.amp[1],
        ]
    }

    /// Canonical global phase: the first amplitude with modulus above the
    /// guard threshold is made real and non-negative.
    pub fn canonicalized(&self) -> Self {
        let guard = real::<T>(OVERLAP_GUARD);
        let reference = if self.amp[0].norm() > guard {
            self.amp[0]
        } else {
            self.amp[1]
        };
        let phase = Complex::from_polar(T::one(), -reference.arg());
        Self {
            amp: [self.amp[0] * phase, self.amp[1] * phase],
        }
    }

    /// Equality up to a global phase: `|<a|b>|` within `tol` of 1.
    pub fn approx_eq_up_to_phase(&self, other: &Self, tol: T) -> bool {
        (self.inner(other).norm() - T::one()).abs() <= tol
    }
}

// ---------------------------------------------------------------------------
// 2x2 and 4x4 complex matrices
// ---------------------------------------------------------------------------

/// A 2x2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMat2<T: Scalar> {
    pub e: [[Complex<T>; 2]; 2],
}

/// A 4x4 complex matrix (meter tensor probe composite space).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMat4<T: Scalar> {
    pub e: [[Complex<T>; 4]; 4],
}

macro_rules! impl_cmat {
    ($name:ident, $n:expr) => {
        impl<T: Scalar> $name<T> {
            pub fn zero() -> Self {
                Self {
                    e: [[Complex::new(T::zero(), T::zero()); $n]; $n],
                }
            }

            pub fn identity() -> Self {
                let mut m = Self::zero();
                for i in 0..$n {
                    m.e[i][i] = Complex::new(T::one(), T::zero());
                }
                m
            }

            pub fn add(&self, other: &Self) -> Self {
                let mut m = Self::zero();
                for i in 0..$n {
                    for j in 0..$n {
                        m.e[i][j] = self.e[i][j] + other.e[i][j];
                    }
                }
                m
            }

            pub fn sub(&self, other: &Self) -> Self {
                let mut m = Self::zero();
                for i in 0..$n {
                    for j in 0..$n {
                        m.e[i][j] = self.e[i][j] - other.e[i][j];
                    }
                }
                m
            }

            pub fn mul(&self, other: &Self) -> Self {
                let mut m = Self::zero();
                for i in 0..$n {
                    for j in 0..$n {
                        let mut acc = Complex::new(T::zero(), T::zero());
                        for k in 0..$n {
                            acc = acc + self.e[i][k] * other.e[k][j];
                        }
                        m.e[i][j] = acc;
                    }
                }
                m
            }

            pub fn scale(&self, s: Complex<T>) -> Self {
                let mut m = Self::zero();
                for i in 0..$n {
                    for j in 0..$n {
                        m.e[i][j] = self.e[i][j] * s;
                    }
                }
                m
            }

            /// Conjugate transpose.
            pub fn adjoint(&self) -> Self {
                let mut m = Self::zero();
                for i in 0..$n {
                    for j in 0..$n {
                        m.e[i][j] = self.e[j][i].conj();
                    }
                }
                m
            }

            pub fn trace(&self) -> Complex<T> {
                let mut acc = Complex::new(T::zero(), T::zero());
                for i in 0..$n {
                    acc = acc + self.e[i][i];
                }
                acc
            }

            /// Largest entry-wise absolute difference.
            pub fn max_abs_diff(&self, other: &Self) -> T {
                let mut worst = T::zero();
                for i in 0..$n {
                    for j in 0..$n {
                        let d = (self.e[i][j] - other.e[i][j]).norm();
                        if d > worst {
                            worst = d;
                        }
                    }
                }
                worst
            }

            pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
                self.max_abs_diff(other) <= tol
            }

            pub fn is_hermitian(&self, tol: T) -> bool {
                self.approx_eq(&self.adjoint(), tol)
            }

            pub fn is_unitary(&self, tol: T) -> bool {
                self.adjoint().mul(self).approx_eq(&Self::identity(), tol)
            }

            pub fn is_projector(&self, tol: T) -> bool {
                self.is_hermitian(tol) && self.mul(self).approx_eq(self, tol)
            }

            /// Hermitian, unit trace, eigenvalues bounded below by `-tol`.
            pub fn is_density(&self, tol: T) -> bool {
                if !self.is_hermitian(tol) {
                    return false;
                }
                let tr = self.trace();
                if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
                    return false;
                }
                self.hermitian_eigenvalues().iter().all(|&ev| ev >= -tol)
            }
        }
    };
}

impl_cmat!(CMat2, 2);
impl_cmat!(CMat4, 4);

impl<T: Scalar> CMat2<T> {
    pub fn from_rows(r0: [Complex<T>; 2], r1: [Complex<T>; 2]) -> Self {
        Self { e: [r0, r1] }
    }

    /// Real Pauli coefficients `(a0, ax, ay, az)` of a Hermitian matrix,
    /// `A = a0 I + ax sx + ay sy + az sz`.
    pub fn pauli_coefficients(&self) -> (T, T, T, T) {
        let half = real::<T>(0.5);
        let a0 = (self.e[0][0].re + self.e[1][1].re) * half;
        let az = (self.e[0][0].re - self.e[1][1].re) * half;
        let ax = (self.e[0][1].re + self.e[1][0].re) * half;
        let ay = (self.e[1][0].im - self.e[0][1].im) * half;
        (a0, ax, ay, az)
    }

    /// Eigenvalues of a Hermitian 2x2 matrix in ascending order, from the
    /// closed-form Pauli decomposition `a0 -+ |a|`.
    pub fn hermitian_eigenvalues(&self) -> [T; 2] {
        let (a0, ax, ay, az) = self.pauli_coefficients();
        let r = (ax * ax + ay * ay + az * az).sqrt();
        [a0 - r, a0 + r]
    }

    /// Expectation value `<s| M |s>` (real part; exact for Hermitian `M`).
    pub fn expectation(&self, s: &PureState<T>) -> T {
        let ms = s.apply(self);
        let amps = s.amplitudes();
        (amps[0].conj() * ms[0] + amps[1].conj() * ms[1]).re
    }
}

impl<T: Scalar> CMat4<T> {
    /// Eigenvalues of a Hermitian 4x4 matrix in ascending order.
    ///
    /// The complex Hermitian matrix `S + iK` is embedded as the real
    /// symmetric 8x8 block matrix `[[S, -K], [K, S]]` (eigenvalues doubled)
    /// and diagonalized by cyclic Jacobi sweeps.
    pub fn hermitian_eigenvalues(&self) -> [T; 4] {
        let mut m = [[T::zero(); 8]; 8];
        for i in 0..4 {
            for j in 0..4 {
                let s = (self.e[i][j].re + self.e[j][i].re) * real::<T>(0.5);
                let k = (self.e[i][j].im - self.e[j][i].im) * real::<T>(0.5);
                m[i][j] = s;
                m[i + 4][j + 4] = s;
                m[i][j + 4] = -k;
                m[i + 4][j] = k;
            }
        }
        let mut evs = jacobi_symmetric_eigenvalues(&mut m);
        evs.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
        [evs[0], evs[2], evs[4], evs[6]]
    }
}

/// Cyclic Jacobi eigenvalue iteration for a real symmetric 8x8 matrix.
#[allow(clippy::needless_range_loop)]
fn jacobi_symmetric_eigenvalues<T: Scalar>(m: &mut [[T; 8]; 8]) -> [T; 8] {
    let eps = real::<T>(1e-14);
    for _sweep in 0..64 {
        let mut off = T::zero();
        for p in 0..8 {
            for q in (p + 1)..8 {
                off = off + m[p][q] * m[p][q];
            }
        }
        if off.sqrt() <= eps {
            break;
        }
        for p in 0..8 {
            for q in (p + 1)..8 {
                if m[p][q].abs() <= eps * real::<T>(1e-2) {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (real::<T>(2.0) * m[p][q]);
                let t = {
                    let sign = if theta >= T::zero() {
                        T::one()
                    } else {
                        -T::one()
                    };
                    sign / (theta.abs() + (T::one() + theta * theta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..8 {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..8 {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut evs = [T::zero(); 8];
    for (i, ev) in evs.iter_mut().enumerate() {
        *ev = m[i][i];
    }
    evs
}

// ---------------------------------------------------------------------------
// Constructors required by the protocol
// ---------------------------------------------------------------------------

/// Pauli observable along a unit direction: `n_x sx + n_y sy + n_z sz`.
///
/// Hermitian, traceless, eigenvalues -1 and +1.
pub fn pauli_along<T: Scalar>(n: &BlochVector<T>) -> QMathResult<CMat2<T>> {
    n.require_unit(real::<T>(1e-9))?;
    let zero = T::zero();
    Ok(CMat2::from_rows(
        [Complex::new(n.z, zero), Complex::new(n.x, -n.y)],
        [Complex::new(n.x, n.y), Complex::new(-n.z, zero)],
    ))
}

/// Density operator with Bloch vector `P_m * m`: `(I + P_m m.sigma) / 2`.
///
/// Eigenvalues are `(1 -+ P_m) / 2`.
pub fn density_from_bloch<T: Scalar>(m: &BlochVector<T>, p_m: T) -> QMathResult<CMat2<T>> {
    m.require_unit(real::<T>(1e-9))?;
    if p_m < T::zero() || p_m > T::one() {
        return Err(QMathError::InvalidPurity {
            value: p_m.to_f64().unwrap_or(f64::NAN),
        });
    }
    let sigma = pauli_along(m)?;
    let half = Complex::new(real::<T>(0.5), T::zero());
    Ok(CMat2::identity()
        .add(&sigma.scale(Complex::new(p_m, T::zero())))
        .scale(half))
}

/// Canonical pure state for a unit Bloch direction:
/// `(cos(T/2), e^{i phi} sin(T/2))` with polar angle `T` and azimuth `phi`.
pub fn state_from_bloch<T: Scalar>(v: &BlochVector<T>) -> QMathResult<PureState<T>> {
    v.require_unit(real::<T>(1e-9))?;
    let half_theta = v.z.min(T::one()).max(-T::one()).acos() * real::<T>(0.5);
    let phi = v.y.atan2(v.x);
    let s = PureState::new(
        Complex::new(half_theta.cos(), T::zero()),
        Complex::from_polar(half_theta.sin(), phi),
    )?;
    Ok(s.canonicalized())
}

/// Bloch vector of a pure state: `(2 Re a0* a1, 2 Im a0* a1, |a0|^2 - |a1|^2)`.
pub fn bloch_from_state<T: Scalar>(s: &PureState<T>) -> BlochVector<T> {
    let [a0, a1] = s.amplitudes();
    let cross = a0.conj() * a1;
    let two = real::<T>(2.0);
    BlochVector::new(
        two * cross.re,
        two * cross.im,
        a0.norm_sqr() - a1.norm_sqr(),
    )
}

/// `exp(-i g A)` for a Hermitian 2x2 generator, by closed-form Pauli
/// decomposition: `e^{-i g a0} (cos(g r) I - i sin(g r) (a/r).sigma)`.
pub fn unitary_exp<T: Scalar>(a: &CMat2<T>, g: T) -> QMathResult<CMat2<T>> {
    let tol = real::<T>(DEFAULT_TOL);
    if !a.is_hermitian(tol) {
        return Err(QMathError::NotHermitian { tol: DEFAULT_TOL });
    }
    let (a0, ax, ay, az) = a.pauli_coefficients();
    let r = (ax * ax + ay * ay + az * az).sqrt();
    let global = Complex::from_polar(T::one(), -g * a0);
    if r <= real::<T>(OVERLAP_GUARD) {
        return Ok(CMat2::identity().scale(global));
    }
    let dir = BlochVector::new(ax / r, ay / r, az / r);
    let sigma = CMat2::from_rows(
        [Complex::new(dir.z, T::zero()), Complex::new(dir.x, -dir.y)],
        [Complex::new(dir.x, dir.y), Complex::new(-dir.z, T::zero())],
    );
    let angle = g * r;
    let cos_part = CMat2::identity().scale(Complex::new(angle.cos(), T::zero()));
    let sin_part = sigma.scale(Complex::new(T::zero(), -angle.sin()));
    Ok(cos_part.add(&sin_part).scale(global))
}

/// Projector onto the +1 eigenstate of `r.sigma`: `(I + r.sigma) / 2`.
pub fn projector<T: Scalar>(r: &BlochVector<T>) -> QMathResult<CMat2<T>> {
    r.require_unit(real::<T>(1e-9))?;
    let sigma = pauli_along(r)?;
    Ok(CMat2::identity()
        .add(&sigma)
        .scale(Complex::new(real::<T>(0.5), T::zero())))
}

/// Tensor product, meter-first: the composite index is
/// `2 * meter_index + probe_index`.
pub fn tensor_product<T: Scalar>(meter: &CMat2<T>, probe: &CMat2<T>) -> CMat4<T> {
    let mut m = CMat4::zero();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m.e[2 * i + k][2 * j + l] = meter.e[i][j] * probe.e[k][l];
                }
            }
        }
    }
    m
}
