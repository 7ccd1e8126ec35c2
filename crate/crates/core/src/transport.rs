//! Uhlmann parallel transport along qubit paths.
//!
//! A path `ρ1, …, ρm` is lifted to `W̃_j = √ρ_j V_j` with every consecutive
//! overlap `W̃_{j+1}† W̃_j` positive. For qubits the step unitary has the closed
//! form
//!
//! ```text
//! V_{j+1} V_j† = (b₀a₀ + b·a + i (b×a)·σ) / √((b₀a₀ + b·a)² + |b×a|²)
//! ```
//!
//! with `√ρ_j = a₀ + a·σ`, `√ρ_{j+1} = b₀ + b·σ`. The holonomy phase is
//! `arg Tr[√ρ1 √ρm V_m V_1†]`. The continuous version integrates
//! `V̇ = 2i (ȧ×a)·σ V` ([`transport_ode`]).

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::qubit::{
    fidelity_sqrt, from_pauli, hermitian_sqrt, identity, unitarize, BlochVector, CMat2,
    DensityMatrix, HSOperator, SqrtDensity, C64,
};

/// Default bound on the Bloch distance between consecutive path points.
pub const DEFAULT_MAX_STEP: f64 = 0.1;

/// Default number of points for oracle-grade discretizations.
pub const DEFAULT_RESOLUTION: usize = 100_000;

const DEGENERATE_NORM_SQ: f64 = 1e-20;
const REUNITARIZE_EVERY: usize = 64;

/// An ordered sequence of at least two states.
#[derive(Debug, Clone)]
pub struct DensityPath {
    points: Vec<DensityMatrix>,
}

impl DensityPath {
    pub fn new(points: Vec<DensityMatrix>) -> Result<Self> {
        Self::with_max_step(points, DEFAULT_MAX_STEP)
    }

    /// Like [`DensityPath::new`] with a custom resolution guard. Pass
    /// `f64::INFINITY` to disable it.
    pub fn with_max_step(points: Vec<DensityMatrix>, max_step: f64) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::PathTooShort(points.len()));
        }
        for (index, pair) in points.windows(2).enumerate() {
            let distance = pair[0].bloch().distance(&pair[1].bloch());
            if distance >= max_step {
                return Err(Error::UnderResolved {
                    index,
                    distance,
                    max: max_step,
                });
            }
        }
        Ok(Self { points })
    }

    pub fn from_bloch<I>(points: I) -> Result<Self>
    where
        I: IntoIterator<Item = BlochVector>,
    {
        Self::new(
            points
                .into_iter()
                .map(|r| DensityMatrix::from_bloch(&r))
                .collect(),
        )
    }

    /// Samples `curve` on `m` uniformly spaced parameters in `[t0, t1]`, plus
    /// every knot of the curve that falls strictly inside and off the grid.
    pub fn sample<C: BlochCurve + ?Sized>(curve: &C, t0: f64, t1: f64, m: usize) -> Result<Self> {
        Self::sample_with_max_step(curve, t0, t1, m, DEFAULT_MAX_STEP)
    }

    pub fn sample_with_max_step<C: BlochCurve + ?Sized>(
        curve: &C,
        t0: f64,
        t1: f64,
        m: usize,
        max_step: f64,
    ) -> Result<Self> {
        if m < 2 {
            return Err(Error::PathTooShort(m));
        }
        let mut ts: Vec<f64> = (0..m)
            .map(|k| t0 + (t1 - t0) * k as f64 / (m - 1) as f64)
            .collect();
        ts.extend(curve.knots().into_iter().filter(|&k| k > t0 && k < t1));
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (t1 - t0).abs());
        let points = ts
            .into_iter()
            .map(|t| DensityMatrix::from_bloch(&curve.bloch(t)));
        Self::with_max_step(points.collect(), max_step)
    }

    pub fn points(&self) -> &[DensityMatrix] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> &DensityMatrix {
        &self.points[0]
    }

    pub fn last(&self) -> &DensityMatrix {
        &self.points[self.points.len() - 1]
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        Self { points }
    }

    /// The path `U ρ_j U†`.
    pub fn conjugated(&self, u: &CMat2) -> Result<Self> {
        let points = self
            .points
            .iter()
            .map(|rho| DensityMatrix::new(u * rho.matrix() * u.adjoint()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { points })
    }
}

/// Outcome of transporting a lift along a path.
#[derive(Debug, Clone, Copy)]
pub struct HolonomyResult {
    /// `arg Tr[√ρ1 √ρm V_m V_1†]` in `(−π, π]`.
    pub phase: f64,
    /// `|Tr[√ρ1 √ρm V_m V_1†]|`.
    pub visibility: f64,
    /// `V_m V_1†`.
    pub accumulated_v: CMat2,
}

impl HolonomyResult {
    pub fn from_unitary(start: &DensityMatrix, end: &DensityMatrix, v: CMat2) -> Self {
        let z = (start.sqrt().matrix() * end.sqrt().matrix() * v).trace();
        Self {
            phase: principal_arg(z),
            visibility: z.norm(),
            accumulated_v: v,
        }
    }
}

/// `arg z` mapped to `(−π, π]`.
pub fn principal_arg(z: C64) -> f64 {
    let phase = z.arg();
    if phase <= -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        phase
    }
}

/// Step unitary `V_{j+1} V_j†` from the square roots of the two states.
pub fn relative_unitary_sqrt(from: &SqrtDensity, to: &SqrtDensity) -> Result<CMat2> {
    let a = from.vector();
    let b = to.vector();
    let scalar = to.a0 * from.a0 + b.dot(&a);
    let cross = b.cross(&a);
    let norm_sq = scalar * scalar + cross.norm_squared();
    if norm_sq <= DEGENERATE_NORM_SQ {
        return Err(Error::DegeneratePair(norm_sq));
    }
    let inv = norm_sq.sqrt().recip();
    let i = C64::i();
    Ok(from_pauli(
        C64::from(scalar * inv),
        [
            i * (cross.x * inv),
            i * (cross.y * inv),
            i * (cross.z * inv),
        ],
    ))
}

/// Step unitary `V_{j+1} V_j†` making the lifts of `rho_j` and `rho_next` parallel.
pub fn relative_unitary(rho_j: &DensityMatrix, rho_next: &DensityMatrix) -> Result<CMat2> {
    relative_unitary_sqrt(&rho_j.sqrt(), &rho_next.sqrt())
}

/// The same step unitary through the polar decomposition
/// `√ρ_{j+1}⁻¹ √ρ_j⁻¹ √(√ρ_j ρ_{j+1} √ρ_j)`. Only defined for full-rank states.
pub fn relative_unitary_polar(rho_j: &DensityMatrix, rho_next: &DensityMatrix) -> Result<CMat2> {
    const PURE_MARGIN: f64 = 1e-9;
    if rho_j.bloch().length() >= 1.0 - PURE_MARGIN || rho_next.bloch().length() >= 1.0 - PURE_MARGIN
    {
        return Err(Error::SingularState);
    }
    let sj = hermitian_sqrt(rho_j.matrix());
    let sn = hermitian_sqrt(rho_next.matrix());
    let sj_inv = sj.try_inverse().ok_or(Error::SingularState)?;
    let sn_inv = sn.try_inverse().ok_or(Error::SingularState)?;
    let middle = hermitian_sqrt(&(sj * rho_next.matrix() * sj));
    Ok(sn_inv * sj_inv * middle)
}

/// Discrete parallel transport along `path`.
pub fn transport(path: &DensityPath) -> Result<HolonomyResult> {
    let roots: Vec<SqrtDensity> = path.points().iter().map(DensityMatrix::sqrt).collect();
    let mut acc = identity();
    for (j, pair) in roots.windows(2).enumerate() {
        acc = relative_unitary_sqrt(&pair[0], &pair[1])? * acc;
        if (j + 1) % REUNITARIZE_EVERY == 0 {
            acc = unitarize(&acc);
        }
    }
    Ok(HolonomyResult::from_unitary(
        path.first(),
        path.last(),
        unitarize(&acc),
    ))
}

/// The parallel lifts `W̃_j = √ρ_j V_j` with `V_1 = 1`.
pub fn parallel_lift(path: &DensityPath) -> Result<Vec<HSOperator>> {
    let roots: Vec<SqrtDensity> = path.points().iter().map(DensityMatrix::sqrt).collect();
    let mut v = identity();
    let mut lifts = Vec::with_capacity(roots.len());
    lifts.push(HSOperator::lift(path.first(), &v));
    for (j, pair) in roots.windows(2).enumerate() {
        v = relative_unitary_sqrt(&pair[0], &pair[1])? * v;
        if (j + 1) % REUNITARIZE_EVERY == 0 {
            v = unitarize(&v);
        }
        lifts.push(HSOperator::lift(&path.points()[j + 1], &v));
    }
    Ok(lifts)
}

/// Per-step overlap of consecutive parallel lifts.
#[derive(Debug, Clone, Copy)]
pub struct StepOverlap {
    /// `⟨W̃_{j+1}, W̃_j⟩ = Tr[W̃_{j+1}† W̃_j]`; real and positive for a parallel lift.
    pub overlap: C64,
    /// `Tr √(√ρ_{j+1} ρ_j √ρ_{j+1})`, the largest attainable `|overlap|`.
    pub fidelity: f64,
}

/// Overlaps between every pair of consecutive parallel lifts along `path`.
pub fn step_overlaps(path: &DensityPath) -> Result<Vec<StepOverlap>> {
    let lifts = parallel_lift(path)?;
    Ok(lifts
        .windows(2)
        .zip(path.points().windows(2))
        .map(|(w, rho)| StepOverlap {
            overlap: w[1].inner(&w[0]),
            fidelity: fidelity_sqrt(&rho[0], &rho[1]),
        })
        .collect())
}

/// A parametrized path `t ↦ r(t)` in the Bloch ball.
pub trait BlochCurve {
    fn bloch(&self, t: f64) -> BlochVector;

    /// Parameters where the curve may have a corner.
    fn knots(&self) -> Vec<f64> {
        Vec::new()
    }

    /// `dn/dt` for `n = r/|r|` on the smooth piece containing `piece`, if
    /// known in closed form. The default falls back to finite differences.
    fn direction_rate(&self, _t: f64, _piece: (f64, f64)) -> Option<Vector3<f64>> {
        None
    }
}

impl<F> BlochCurve for F
where
    F: Fn(f64) -> BlochVector,
{
    fn bloch(&self, t: f64) -> BlochVector {
        self(t)
    }
}

/// `ȧ×a = a² (ṅ×n)` at `t`. Finite-difference stencils stay inside `piece`.
fn transport_rate<C: BlochCurve + ?Sized>(curve: &C, t: f64, piece: (f64, f64)) -> Vector3<f64> {
    let r = curve.bloch(t);
    let root = SqrtDensity::from_bloch(&r);
    if root.a == 0.0 {
        return Vector3::zeros();
    }
    let n = r.direction();
    let n_dot = curve
        .direction_rate(t, piece)
        .unwrap_or_else(|| direction_rate_fd(curve, t, piece));
    n_dot.cross(&n) * (root.a * root.a)
}

fn direction_rate_fd<C: BlochCurve + ?Sized>(curve: &C, t: f64, piece: (f64, f64)) -> Vector3<f64> {
    let (lo, hi) = piece;
    let eps = (hi - lo) / 8.0;
    let n = |s: f64| curve.bloch(s).direction();
    if t - 2.0 * eps >= lo - 1e-15 && t + 2.0 * eps <= hi + 1e-15 {
        (n(t - 2.0 * eps) - n(t - eps) * 8.0 + n(t + eps) * 8.0 - n(t + 2.0 * eps)) / (12.0 * eps)
    } else {
        // One-sided, fourth order, pointing into the piece.
        let e = if t - lo < hi - t { eps } else { -eps };
        (n(t) * -25.0 + n(t + e) * 48.0 - n(t + 2.0 * e) * 36.0 + n(t + 3.0 * e) * 16.0
            - n(t + 4.0 * e) * 3.0)
            / (12.0 * e)
    }
}

fn generator(rate: Vector3<f64>) -> CMat2 {
    let i2 = C64::new(0.0, 2.0);
    from_pauli(C64::from(0.0), [i2 * rate.x, i2 * rate.y, i2 * rate.z])
}

/// Integrates `V̇ = 2i (ȧ×a)·σ V` from `V(t0) = 1` with classical fourth-order
/// steps, projecting back onto the unitaries after every step. Steps are
/// distributed over the smooth pieces between the curve's knots.
pub fn transport_ode<C: BlochCurve + ?Sized>(
    curve: &C,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<CMat2> {
    if steps < 10 {
        return Err(Error::InvalidParams(format!(
            "transport_ode needs at least 10 steps, got {steps}"
        )));
    }
    if !(t1 > t0) {
        return Err(Error::InvalidParams(format!(
            "empty parameter interval [{t0}, {t1}]"
        )));
    }
    let mut bounds = vec![t0];
    let mut knots: Vec<f64> = curve
        .knots()
        .into_iter()
        .filter(|&k| k > t0 && k < t1)
        .collect();
    knots.sort_by(f64::total_cmp);
    bounds.extend(knots);
    bounds.push(t1);

    let span = t1 - t0;
    let mut v = identity();
    for piece in bounds.windows(2) {
        let (lo, hi) = (piece[0], piece[1]);
        let n = (((hi - lo) / span) * steps as f64).ceil().max(1.0) as usize;
        let h = (hi - lo) / n as f64;
        for k in 0..n {
            let t = lo + h * k as f64;
            let step = (t, t + h);
            let g0 = generator(transport_rate(curve, t, step));
            let gm = generator(transport_rate(curve, t + 0.5 * h, step));
            let g1 = generator(transport_rate(curve, t + h, step));
            let k1 = g0 * v;
            let k2 = gm * (v + k1 * C64::from(0.5 * h));
            let k3 = gm * (v + k2 * C64::from(0.5 * h));
            let k4 = g1 * (v + k3 * C64::from(h));
            v += (k1 + k2 * C64::from(2.0) + k3 * C64::from(2.0) + k4) * C64::from(h / 6.0);
            v = unitarize(&v);
        }
    }
    Ok(v)
}
