//! Single-qubit linear algebra.
//!
//! States are kept both as Bloch vectors and as 2×2 density matrices
//! `ρ = ½(1 + r·σ)`. Square roots of states are carried in Pauli form
//! `√ρ = a₀ + a n·σ`, which for a qubit has the closed solution
//!
//! ```text
//! a₀² = (1 + √(1 − r²)) / 4,    a² = (1 − √(1 − r²)) / 4,    n = r / |r|
//! ```
//!
//! so no eigendecomposition is needed anywhere on the production path.

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat2 = Matrix2<C64>;

/// Tolerance for all state invariants.
pub const TOL: f64 = 1e-12;

/// States whose trace is off by less than this are renormalized on construction.
const RENORM_TOL: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub fn identity() -> CMat2 {
    CMat2::identity()
}

pub fn sigma_x() -> CMat2 {
    CMat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn sigma_y() -> CMat2 {
    CMat2::new(ZERO, -I, I, ZERO)
}

pub fn sigma_z() -> CMat2 {
    CMat2::new(ONE, ZERO, ZERO, -ONE)
}

/// `[σx, σy, σz]`.
pub fn pauli() -> [CMat2; 3] {
    [sigma_x(), sigma_y(), sigma_z()]
}

/// Builds `c0 + c·σ` from complex coefficients.
pub fn from_pauli(c0: C64, c: [C64; 3]) -> CMat2 {
    CMat2::new(c0 + c[2], c[0] - I * c[1], c[0] + I * c[1], c0 - c[2])
}

/// Builds `c0 + v·σ` from real coefficients.
pub fn from_real_pauli(c0: f64, v: &Vector3<f64>) -> CMat2 {
    from_pauli(
        C64::from(c0),
        [C64::from(v.x), C64::from(v.y), C64::from(v.z)],
    )
}

/// Inverse of [`from_pauli`]: `m = c0 + c·σ`.
pub fn pauli_components(m: &CMat2) -> (C64, [C64; 3]) {
    let c0 = (m[(0, 0)] + m[(1, 1)]) * 0.5;
    let cz = (m[(0, 0)] - m[(1, 1)]) * 0.5;
    let cx = (m[(0, 1)] + m[(1, 0)]) * 0.5;
    let cy = -I * (m[(1, 0)] - m[(0, 1)]) * 0.5;
    (c0, [cx, cy, cz])
}

/// `exp(−i θ u·σ) = cos θ − i sin θ u·σ` for a unit vector `u`.
pub fn su2_rotation(theta: f64, axis: &Vector3<f64>) -> CMat2 {
    let (s, c) = theta.sin_cos();
    let v = axis * s;
    from_pauli(C64::from(c), [-I * v.x, -I * v.y, -I * v.z])
}

fn max_abs_diff(a: &CMat2, b: &CMat2) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest elementwise deviation of `u†u` from the identity.
pub fn unitarity_defect(u: &CMat2) -> f64 {
    max_abs_diff(&(u.adjoint() * u), &identity())
}

/// Square root of a 2×2 Hermitian positive semidefinite matrix.
///
/// Negative eigenvalues from rounding are clamped to zero.
pub fn hermitian_sqrt(m: &CMat2) -> CMat2 {
    let (c0, c) = pauli_components(m);
    let h0 = c0.re;
    let h = Vector3::new(c[0].re, c[1].re, c[2].re);
    let hn = h.norm();
    let sp = (h0 + hn).max(0.0).sqrt();
    let sm = (h0 - hn).max(0.0).sqrt();
    let s0 = 0.5 * (sp + sm);
    if hn == 0.0 {
        return from_real_pauli(s0, &Vector3::zeros());
    }
    from_real_pauli(s0, &(h * (0.5 * (sp - sm) / hn)))
}

/// Polar projection `m (m†m)^{-1/2}` onto the unitary group.
pub fn unitarize(m: &CMat2) -> CMat2 {
    let p = hermitian_sqrt(&(m.adjoint() * m));
    match p.try_inverse() {
        Some(pinv) => m * pinv,
        None => *m,
    }
}

/// A Bloch vector with `|r| ≤ 1` (up to [`TOL`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector(Vector3<f64>);

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_vector(Vector3::new(x, y, z))
    }

    pub fn from_vector(v: Vector3<f64>) -> Result<Self> {
        let len = v.norm();
        if !len.is_finite() || len > 1.0 + TOL {
            return Err(Error::InvalidBloch(len));
        }
        Ok(Self(v))
    }

    /// `r · (sin θ cos ϕ, sin θ sin ϕ, cos θ)`.
    pub fn spherical(r: f64, theta: f64, azimuth: f64) -> Result<Self> {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = azimuth.sin_cos();
        Self::new(r * st * cp, r * st * sp, r * ct)
    }

    pub fn origin() -> Self {
        Self(Vector3::zeros())
    }

    pub fn vector(&self) -> Vector3<f64> {
        self.0
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }

    pub fn y(&self) -> f64 {
        self.0.y
    }

    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn length(&self) -> f64 {
        self.0.norm()
    }

    /// Unit direction `n = r/|r|`; `(0, 0, 1)` at the origin.
    pub fn direction(&self) -> Vector3<f64> {
        let len = self.length();
        if len == 0.0 {
            Vector3::z()
        } else {
            self.0 / len
        }
    }

    pub fn distance(&self, other: &BlochVector) -> f64 {
        (self.0 - other.0).norm()
    }
}

/// A qubit density matrix: Hermitian, unit trace, eigenvalues in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(CMat2);

impl DensityMatrix {
    /// Validates `m`. A trace within `1e−9` of one is divided out; anything
    /// further away is rejected.
    pub fn new(m: CMat2) -> Result<Self> {
        let herm = max_abs_diff(&m, &m.adjoint());
        if !herm.is_finite() || herm > TOL {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = m.trace().re;
        if (tr - 1.0).abs() > RENORM_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
        }
        let m = m.unscale(tr);
        // Eigenvalues are (1 ± |r|)/2.
        let r = bloch_of_matrix(&m).norm();
        if r > 1.0 + 2.0 * TOL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {:e}",
                0.5 * (1.0 - r)
            )));
        }
        Ok(Self(m))
    }

    pub fn from_bloch(r: &BlochVector) -> Self {
        Self(from_real_pauli(0.5, &(r.vector() * 0.5)))
    }

    pub fn maximally_mixed() -> Self {
        Self::from_bloch(&BlochVector::origin())
    }

    pub fn matrix(&self) -> &CMat2 {
        &self.0
    }

    pub fn bloch(&self) -> BlochVector {
        BlochVector(bloch_of_matrix(&self.0))
    }

    pub fn sqrt(&self) -> SqrtDensity {
        SqrtDensity::from_bloch(&self.bloch())
    }
}

fn bloch_of_matrix(m: &CMat2) -> Vector3<f64> {
    let (_, c) = pauli_components(m);
    Vector3::new(2.0 * c[0].re, 2.0 * c[1].re, 2.0 * c[2].re)
}

/// `ρ = ½(1 + r·σ)`.
pub fn density_from_bloch(r: &BlochVector) -> DensityMatrix {
    DensityMatrix::from_bloch(r)
}

pub fn bloch_from_density(rho: &DensityMatrix) -> BlochVector {
    rho.bloch()
}

/// `√ρ = a₀ + a n·σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtDensity {
    pub a0: f64,
    pub a: f64,
    pub n: Vector3<f64>,
}

impl SqrtDensity {
    pub fn from_bloch(r: &BlochVector) -> Self {
        let len = r.length();
        // √(1 − r²) turns a last-ulp error in |r| near 1 into ~1e−8, so
        // lengths that are 1 up to rounding are treated as exactly pure.
        let len = if len > 1.0 - 8.0 * f64::EPSILON {
            1.0
        } else {
            len
        };
        // √(1 − r²) without cancellation near r = 1.
        let s = ((1.0 - len) * (1.0 + len)).sqrt();
        let a0 = (0.25 * (1.0 + s)).sqrt();
        // From 2 a₀ a = r/2; avoids the 1 − s cancellation near r = 0.
        let a = len / (4.0 * a0);
        Self {
            a0,
            a,
            n: r.direction(),
        }
    }

    /// The Pauli part `a n` as a 3-vector.
    pub fn vector(&self) -> Vector3<f64> {
        self.n * self.a
    }

    pub fn matrix(&self) -> CMat2 {
        from_real_pauli(self.a0, &self.vector())
    }
}

pub fn sqrt_density(rho: &DensityMatrix) -> SqrtDensity {
    rho.sqrt()
}

/// A Hilbert-Schmidt lift `W` of a state, `ρ = W W†`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HSOperator(CMat2);

impl HSOperator {
    /// Checks that `W W†` is a valid density matrix.
    pub fn new(w: CMat2) -> Result<Self> {
        let rho = w * w.adjoint();
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > TOL {
            return Err(Error::InvalidLift(format!("W W^dag has trace {tr}")));
        }
        DensityMatrix::new(rho).map_err(|e| Error::InvalidLift(e.to_string()))?;
        Ok(Self(w))
    }

    /// `W = √ρ V`.
    pub fn lift(rho: &DensityMatrix, v: &CMat2) -> Self {
        Self(rho.sqrt().matrix() * v)
    }

    pub fn matrix(&self) -> &CMat2 {
        &self.0
    }

    pub fn density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.0 * self.0.adjoint())
    }

    /// `⟨self, other⟩ = Tr[self† other]`.
    pub fn inner(&self, other: &HSOperator) -> C64 {
        hs_inner(&self.0, &other.0)
    }
}

/// Hilbert-Schmidt inner product `Tr[W1† W2]`.
pub fn hs_inner(w1: &CMat2, w2: &CMat2) -> C64 {
    w1.iter().zip(w2.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Root fidelity `Tr √(√ρ2 ρ1 √ρ2)`.
pub fn fidelity_sqrt(rho1: &DensityMatrix, rho2: &DensityMatrix) -> f64 {
    // (√λ1 + √λ2)² = Tr m + 2√det m for m = √ρ2 ρ1 √ρ2, with Tr m = (1 + r1·r2)/2
    // and det m = det ρ1 det ρ2. Using Bloch lengths keeps √det accurate near pure states.
    let (r1, r2) = (rho1.bloch(), rho2.bloch());
    let det = |r: f64| ((1.0 - r) * (1.0 + r)).max(0.0);
    let cross = (det(r1.length()) * det(r2.length())).sqrt();
    (0.5 * (1.0 + r1.vector().dot(&r2.vector()) + cross))
        .max(0.0)
        .sqrt()
        .min(1.0)
}

/// Bures line element `ds² = dr²/(1 − r²) + r² dn·dn`.
pub fn bures_line_element(r: f64, dr: f64, dn_sq: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::BuresSingular(r));
    }
    Ok(dr * dr / (1.0 - r * r) + r * r * dn_sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: &CMat2, b: &CMat2, tol: f64) -> bool {
        max_abs_diff(a, b) <= tol
    }

    // Eigendecomposition square root, independent of the Pauli closed form.
    fn eigen_sqrt(m: &CMat2) -> CMat2 {
        let eig = SymmetricEigen::new(*m);
        let d = eig.eigenvalues.map(|l| C64::from(l.max(0.0).sqrt()));
        eig.eigenvectors * CMat2::from_diagonal(&d) * eig.eigenvectors.adjoint()
    }

    fn eigen_fidelity(r1: &DensityMatrix, r2: &DensityMatrix) -> f64 {
        let s2 = eigen_sqrt(r2.matrix());
        let m = s2 * r1.matrix() * s2;
        SymmetricEigen::new(m)
            .eigenvalues
            .iter()
            .map(|l| l.max(0.0).sqrt())
            .sum()
    }

    fn bloch_strategy() -> impl Strategy<Value = BlochVector> {
        (0.0..=1.0f64, 0.0..=PI, 0.0..2.0 * PI)
            .prop_map(|(r, t, p)| BlochVector::spherical(r, t, p).unwrap())
    }

    #[test]
    fn density_examples() {
        let mixed = density_from_bloch(&BlochVector::origin());
        assert!(close(
            mixed.matrix(),
            &CMat2::from_diagonal_element(C64::from(0.5)),
            1e-15
        ));

        let north = density_from_bloch(&BlochVector::new(0.0, 0.0, 1.0).unwrap());
        assert!(close(
            north.matrix(),
            &CMat2::new(ONE, ZERO, ZERO, ZERO),
            1e-15
        ));

        let t = PI / 3.0;
        let rho = density_from_bloch(&BlochVector::new(t.sin(), 0.0, t.cos()).unwrap());
        let expected = 3f64.sqrt() / 4.0;
        assert!((rho.matrix()[(0, 1)].re - expected).abs() < 1e-15);
        assert!((rho.matrix()[(1, 0)].re - expected).abs() < 1e-15);
        assert!((rho.matrix()[(0, 0)].re - 0.75).abs() < 1e-15);
    }

    #[test]
    fn rejects_long_bloch_vectors() {
        assert!(matches!(
            BlochVector::new(0.0, 0.0, 1.0 + 1e-9),
            Err(Error::InvalidBloch(_))
        ));
        assert!(BlochVector::new(0.0, 0.0, 1.0 + 1e-13).is_ok());
    }

    #[test]
    fn density_validation() {
        let not_herm = CMat2::new(C64::from(0.5), I, ZERO, C64::from(0.5));
        assert!(DensityMatrix::new(not_herm).is_err());
        let bad_trace = CMat2::from_diagonal_element(C64::from(0.6));
        assert!(DensityMatrix::new(bad_trace).is_err());
        let negative = CMat2::new(C64::from(1.2), ZERO, ZERO, C64::from(-0.2));
        assert!(DensityMatrix::new(negative).is_err());
        // Slightly off trace is renormalized.
        let nearly = CMat2::new(C64::from(0.5 + 1e-10), ZERO, ZERO, C64::from(0.5));
        let rho = DensityMatrix::new(nearly).unwrap();
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sqrt_examples() {
        let s = sqrt_density(&DensityMatrix::maximally_mixed());
        assert!((s.a0 - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(s.a, 0.0);
        assert_eq!(s.n, Vector3::z());

        let s = BlochVector::new(1.0, 0.0, 0.0)
            .map(|r| SqrtDensity::from_bloch(&r))
            .unwrap();
        assert!((s.a0 - 0.5).abs() < 1e-15);
        assert!((s.a - 0.5).abs() < 1e-15);

        let r = BlochVector::new(0.0, 0.6, 0.0).unwrap();
        let s = SqrtDensity::from_bloch(&r);
        assert!((s.a * s.a - 0.05).abs() < 1e-15);
        assert!((s.a0 * s.a0 - 0.45).abs() < 1e-15);
        let oracle = eigen_sqrt(density_from_bloch(&r).matrix());
        assert!(close(&s.matrix(), &oracle, 1e-12));
    }

    #[test]
    fn hs_inner_examples() {
        let d = CMat2::from_diagonal_element(C64::from(FRAC_1_SQRT_2));
        assert!((hs_inner(&d, &d) - ONE).norm() < 1e-15);
        assert_eq!(hs_inner(&identity(), &sigma_x()), ZERO);

        let w1 = CMat2::new(
            C64::new(0.1, 0.2),
            C64::new(-0.3, 0.4),
            C64::new(0.5, -0.6),
            C64::new(0.7, 0.8),
        );
        let w2 = CMat2::new(
            C64::new(-0.9, 0.1),
            C64::new(0.2, 0.3),
            C64::new(0.4, 0.5),
            C64::new(-0.6, 0.7),
        );
        let explicit = w1[(0, 0)].conj() * w2[(0, 0)]
            + w1[(0, 1)].conj() * w2[(0, 1)]
            + w1[(1, 0)].conj() * w2[(1, 0)]
            + w1[(1, 1)].conj() * w2[(1, 1)];
        assert!((hs_inner(&w1, &w2) - explicit).norm() < 1e-15);
        assert!((hs_inner(&w1, &w2) - (w1.adjoint() * w2).trace()).norm() < 1e-15);
    }

    #[test]
    fn hs_lift_has_unit_norm() {
        let rho = density_from_bloch(&BlochVector::new(0.3, -0.2, 0.5).unwrap());
        let v = su2_rotation(0.7, &Vector3::new(0.0, 0.6, 0.8));
        let w = HSOperator::lift(&rho, &v);
        let n = w.inner(&w);
        assert!((n.re - 1.0).abs() < 1e-14 && n.im.abs() < 1e-15);
        assert!(close(w.density().unwrap().matrix(), rho.matrix(), 1e-14));
        assert!(HSOperator::new(identity()).is_err());
        assert!(HSOperator::new(*w.matrix()).is_ok());
    }

    #[test]
    fn fidelity_examples() {
        let r0 = density_from_bloch(&BlochVector::new(0.0, 0.0, 0.3).unwrap());
        assert!((fidelity_sqrt(&r0, &r0) - 1.0).abs() < 1e-15);

        let up = density_from_bloch(&BlochVector::new(0.0, 0.0, 1.0).unwrap());
        let down = density_from_bloch(&BlochVector::new(0.0, 0.0, -1.0).unwrap());
        assert!(fidelity_sqrt(&up, &down).abs() < 1e-7);

        let mixed = DensityMatrix::maximally_mixed();
        let oracle = eigen_fidelity(&mixed, &up);
        assert!((oracle - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((fidelity_sqrt(&mixed, &up) - oracle).abs() < 1e-12);
    }

    #[test]
    fn bures_examples() {
        assert_eq!(bures_line_element(0.0, 0.1, 7.0).unwrap(), 0.1 * 0.1);
        assert!((bures_line_element(0.6, 0.0, 2.0).unwrap() - 0.72).abs() < 1e-15);
        assert!((bures_line_element(0.6, 0.1, 0.0).unwrap() - 0.01 / 0.64).abs() < 1e-15);
        assert!(matches!(
            bures_line_element(1.0, 0.1, 0.0),
            Err(Error::BuresSingular(_))
        ));
    }

    #[test]
    fn rotation_and_unitarize() {
        let u = su2_rotation(0.4, &Vector3::new(0.0, 1.0, 0.0));
        assert!(unitarity_defect(&u) < 1e-15);
        let noisy = u * C64::from(1.0 + 1e-6) + CMat2::from_diagonal_element(C64::new(1e-7, 0.0));
        assert!(unitarity_defect(&unitarize(&noisy)) < 1e-14);
    }

    proptest! {
        #[test]
        fn sqrt_squares_back(r in bloch_strategy()) {
            let rho = density_from_bloch(&r);
            let s = sqrt_density(&rho);
            prop_assert!((s.a0 * s.a0 + s.a * s.a - 0.5).abs() < 1e-12);
            prop_assert!((2.0 * s.a0 * s.a - r.length() / 2.0).abs() < 1e-12);
            let m = s.matrix();
            prop_assert!(close(&(m * m), rho.matrix(), 1e-12));
            prop_assert!(close(&m, &eigen_sqrt(rho.matrix()), 1e-7));
        }

        #[test]
        fn bloch_round_trip(r in bloch_strategy()) {
            let back = bloch_from_density(&density_from_bloch(&r));
            prop_assert!(back.distance(&r) < 1e-14);
        }

        #[test]
        fn fidelity_properties(a in bloch_strategy(), b in bloch_strategy()) {
            let (ra, rb) = (density_from_bloch(&a), density_from_bloch(&b));
            let f = fidelity_sqrt(&ra, &rb);
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!((f - fidelity_sqrt(&rb, &ra)).abs() < 1e-12);
            let lower = (ra.sqrt().matrix() * rb.sqrt().matrix()).trace().norm();
            prop_assert!(f >= lower - 1e-12);
            prop_assert!((f - eigen_fidelity(&ra, &rb)).abs() < 1e-6);
        }

        #[test]
        fn fidelity_equality_for_commuting(r1 in -1.0..=1.0f64, r2 in -1.0..=1.0f64) {
            let ra = density_from_bloch(&BlochVector::new(0.0, 0.0, r1).unwrap());
            let rb = density_from_bloch(&BlochVector::new(0.0, 0.0, r2).unwrap());
            let lower = (ra.sqrt().matrix() * rb.sqrt().matrix()).trace().norm();
            prop_assert!((fidelity_sqrt(&ra, &rb) - lower).abs() < 1e-12);
        }

        #[test]
        fn hs_inner_conjugate_symmetric(
            re in proptest::array::uniform8(-1.0..1.0f64)
        ) {
            let w1 = CMat2::new(C64::new(re[0], re[1]), C64::new(re[2], re[3]),
                                C64::new(re[4], re[5]), C64::new(re[6], re[7]));
            let w2 = CMat2::new(C64::new(re[7], re[0]), C64::new(re[1], -re[6]),
                                C64::new(re[5], re[2]), C64::new(-re[3], re[4]));
            prop_assert!((hs_inner(&w1, &w2) - hs_inner(&w2, &w1).conj()).norm() < 1e-14);
            let n = hs_inner(&w1, &w1);
            prop_assert!(n.re >= 0.0 && n.im.abs() < 1e-15);
        }
    }
}
