//! Closed-form Uhlmann phase for the three-arc depolarizing path.
//!
//! The path starts at the north pole, descends a meridian to the x axis, runs
//! along the equator through an azimuth `φ`, and climbs back to the pole,
//! while the Bloch length decays as `r0 e^{−(4/3)(Γ/ω)ωt}`. On each arc
//! `ȧ×a` has a fixed direction, so the path-ordered transport is a product of
//! three SU(2) rotations `e^{−iχ m·σ} e^{−iκσz} e^{−iμσy}` with
//! `m = (sin φ, −cos φ, 0)`. The angles are
//!
//! ```text
//! θ(t_k, Δφ) = Δφ/2 − ½ ∫ √(1 − r0² e^{−8Γt/3}) ω dt     over [t_k, t_k + Δφ/ω]
//! ```
//!
//! and have an elementary antiderivative. Everything here is expressed in the
//! dimensionless time `τ = ωt`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::qubit::{su2_rotation, BlochVector, CMat2, DensityMatrix, SqrtDensity, C64};
use crate::transport::{principal_arg, transport, BlochCurve, DensityPath, HolonomyResult};

/// Geometry and decoherence strength of the three-arc path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSpec {
    /// Azimuth swept along the equator, in `(0, π]`.
    pub phi: f64,
    /// Decoherence efficiency Γ/ω.
    pub gamma_over_omega: f64,
    /// Initial Bloch length.
    pub r0: f64,
}

impl PathSpec {
    pub fn new(phi: f64, gamma_over_omega: f64, r0: f64) -> Result<Self> {
        if !(phi > 0.0 && phi <= PI) {
            return Err(Error::OutOfRange {
                value: phi,
                min: 0.0,
                max: PI,
            });
        }
        if !(gamma_over_omega >= 0.0 && gamma_over_omega.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "gamma/omega must be finite and non-negative, got {gamma_over_omega}"
            )));
        }
        if !(0.0..=1.0).contains(&r0) {
            return Err(Error::OutOfRange {
                value: r0,
                min: 0.0,
                max: 1.0,
            });
        }
        Ok(Self {
            phi,
            gamma_over_omega,
            r0,
        })
    }

    /// Total duration `ωt_D = φ + π`.
    pub fn duration(&self) -> f64 {
        self.phi + PI
    }

    /// Corners of the path at `B` and `C`.
    pub fn corners(&self) -> [f64; 2] {
        [FRAC_PI_2, self.phi + FRAC_PI_2]
    }

    /// Bloch length at dimensionless time `tau`.
    pub fn length_at(&self, tau: f64) -> f64 {
        self.r0 * (-4.0 * self.gamma_over_omega * tau / 3.0).exp()
    }

    /// Bloch length at the end point `D`.
    pub fn end_length(&self) -> f64 {
        self.length_at(self.duration())
    }

    fn segment(&self, tau: f64) -> usize {
        let [b, c] = self.corners();
        if tau <= b {
            0
        } else if tau <= c {
            1
        } else {
            2
        }
    }

    fn direction_on(&self, segment: usize, tau: f64) -> Vector3<f64> {
        match segment {
            0 => Vector3::new(tau.sin(), 0.0, tau.cos()),
            1 => Vector3::new(tau.sin(), -tau.cos(), 0.0),
            _ => {
                let (s, c) = (tau - self.phi).sin_cos();
                Vector3::new(self.phi.cos() * s, self.phi.sin() * s, -c)
            }
        }
    }

    fn direction_rate_on(&self, segment: usize, tau: f64) -> Vector3<f64> {
        match segment {
            0 => Vector3::new(tau.cos(), 0.0, -tau.sin()),
            1 => Vector3::new(tau.cos(), tau.sin(), 0.0),
            _ => {
                let (s, c) = (tau - self.phi).sin_cos();
                Vector3::new(self.phi.cos() * c, self.phi.sin() * c, s)
            }
        }
    }
}

/// Point of the path at dimensionless time `tau = ωt ∈ [0, φ + π]`.
pub fn path_point(spec: &PathSpec, tau: f64) -> Result<BlochVector> {
    const SLACK: f64 = 1e-12;
    if !(tau >= -SLACK && tau <= spec.duration() + SLACK) {
        return Err(Error::OutOfRange {
            value: tau,
            min: 0.0,
            max: spec.duration(),
        });
    }
    let tau = tau.clamp(0.0, spec.duration());
    let n = spec.direction_on(spec.segment(tau), tau);
    BlochVector::from_vector(n * spec.length_at(tau))
}

impl BlochCurve for PathSpec {
    fn bloch(&self, t: f64) -> BlochVector {
        let tau = t.clamp(0.0, self.duration());
        BlochVector::from_vector(self.direction_on(self.segment(tau), tau) * self.length_at(tau))
            .expect("path stays inside the Bloch ball")
    }

    fn knots(&self) -> Vec<f64> {
        self.corners().to_vec()
    }

    fn direction_rate(&self, t: f64, piece: (f64, f64)) -> Option<Vector3<f64>> {
        Some(self.direction_rate_on(self.segment(0.5 * (piece.0 + piece.1)), t))
    }
}

/// `d − ln(1 + d/(1+s))` for `s ≥ 0`, accurate when `d` is tiny.
fn d_minus_log1p(d: f64, s: f64) -> f64 {
    let c = 1.0 + s;
    let x = d / c;
    if x.abs() < 1e-2 {
        // d s/(1+s) + x²/2 − x³/3 + …
        let mut series = 0.0;
        let mut power = x;
        for k in 2..=12 {
            power *= x;
            let term = power / k as f64;
            series += if k % 2 == 0 { term } else { -term };
        }
        d * s / c + series
    } else {
        d - x.ln_1p()
    }
}

/// Rotation angle accumulated over `[tau_k, tau_k + delta_phi]`:
/// `Δφ/2 − ½ ∫ √(1 − r0² e^{−8(Γ/ω)τ/3}) dτ`.
pub fn angle_integral(spec: &PathSpec, tau_k: f64, delta_phi: f64) -> f64 {
    let r0 = spec.r0;
    let g = spec.gamma_over_omega;
    if g == 0.0 {
        // Also covers the r0 = 1 logarithmic limit, which gives Δφ/2.
        let s0 = ((1.0 - r0) * (1.0 + r0)).sqrt();
        return 0.5 * delta_phi * (1.0 - s0);
    }
    let k = 8.0 * g / 3.0;
    // s(τ) = √(1 − r0² e^{−kτ}) written to stay accurate near r0 = 1 and kτ → 0.
    let s = |tau: f64| ((1.0 - r0) * (1.0 + r0) - r0 * r0 * (-k * tau).exp_m1()).sqrt();
    let s1 = s(tau_k);
    let s2 = s(tau_k + delta_phi);
    if s1 + s2 == 0.0 {
        return 0.5 * delta_phi;
    }
    // With the antiderivative k∫s = −2s + ln((1+s)/(1−s)) = −2s + 2 ln(1+s) − 2 ln r0 + kτ
    // the angle collapses to (d − ln(1 + d/(1+s1)))/k, d = s2 − s1.
    let d = r0 * r0 * (-k * tau_k).exp() * -(-k * delta_phi).exp_m1() / (s1 + s2);
    d_minus_log1p(d, s1) / k
}

/// The three transport angles of the path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathAngles {
    /// Rotation about y on A→B.
    pub mu: f64,
    /// Rotation about z on B→C.
    pub kappa: f64,
    /// Rotation about m on C→D.
    pub chi: f64,
    /// Common value of μ and χ without decoherence.
    pub zeta: Option<f64>,
}

pub fn compute_angles(spec: &PathSpec) -> PathAngles {
    let [b, c] = spec.corners();
    let zeta = (spec.gamma_over_omega == 0.0)
        .then(|| 0.25 * PI * (1.0 - ((1.0 - spec.r0) * (1.0 + spec.r0)).sqrt()));
    PathAngles {
        mu: angle_integral(spec, 0.0, FRAC_PI_2),
        kappa: angle_integral(spec, b, spec.phi),
        chi: angle_integral(spec, c, FRAC_PI_2),
        zeta,
    }
}

/// Pauli coefficients of `√ρ_A = α + βσz` and `√ρ_D = ν + ησz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointCoeffs {
    pub alpha: f64,
    pub beta: f64,
    pub nu_end: f64,
    pub eta: f64,
}

pub fn endpoint_coeffs(spec: &PathSpec) -> EndpointCoeffs {
    let root = |r: f64| SqrtDensity::from_bloch(&BlochVector::new(0.0, 0.0, r).expect("r <= 1"));
    let a = root(spec.r0);
    let d = root(spec.end_length());
    EndpointCoeffs {
        alpha: a.a0,
        beta: a.a,
        nu_end: d.a0,
        eta: d.a,
    }
}

/// Axis of the third rotation, `m = (sin φ, −cos φ, 0)`.
pub fn third_axis(phi: f64) -> Vector3<f64> {
    Vector3::new(phi.sin(), -phi.cos(), 0.0)
}

/// `V_D V_A† = e^{−iχ m·σ} e^{−iκσz} e^{−iμσy}`.
pub fn v_d_from_angles(phi: f64, angles: &PathAngles) -> CMat2 {
    su2_rotation(angles.chi, &third_axis(phi))
        * su2_rotation(angles.kappa, &Vector3::z())
        * su2_rotation(angles.mu, &Vector3::y())
}

pub fn v_d(spec: &PathSpec) -> CMat2 {
    v_d_from_angles(spec.phi, &compute_angles(spec))
}

/// `Tr[√ρ_A √ρ_D V_D V_A†]`.
pub fn holonomy_trace(spec: &PathSpec) -> C64 {
    let e = endpoint_coeffs(spec);
    let v = v_d(spec);
    let upper = (e.alpha + e.beta) * (e.nu_end + e.eta);
    let lower = (e.alpha - e.beta) * (e.nu_end - e.eta);
    v[(0, 0)] * upper + v[(1, 1)] * lower
}

/// Uhlmann phase of the path, `arg Tr[√ρ_A √ρ_D V_D V_A†]`.
pub fn uhlmann_phase(spec: &PathSpec) -> f64 {
    if spec.r0 == 0.0 {
        return 0.0;
    }
    principal_arg(holonomy_trace(spec))
}

/// The single-arctan form of the phase,
/// `−arctan[(αη+βν)/(αν+βη) · (sin κ + sin(φ−κ) tan χ tan μ)/(cos κ + cos(φ−κ) tan χ tan μ)]`.
/// Branch-ambiguous; kept to validate [`uhlmann_phase`].
pub fn uhlmann_phase_arctan(spec: &PathSpec) -> f64 {
    let e = endpoint_coeffs(spec);
    let a = compute_angles(spec);
    let phi = spec.phi;
    let prefactor = (e.alpha * e.eta + e.beta * e.nu_end) / (e.alpha * e.nu_end + e.beta * e.eta);
    let t = a.chi.tan() * a.mu.tan();
    let ratio =
        (a.kappa.sin() + (phi - a.kappa).sin() * t) / (a.kappa.cos() + (phi - a.kappa).cos() * t);
    -(prefactor * ratio).atan()
}

/// Phase without decoherence,
/// `−arctan[r0 (sin κ + sin(φ−κ) tan²ζ)/(cos κ + cos(φ−κ) tan²ζ)]`.
pub fn uhlmann_phase_unitary(r0: f64, phi: f64) -> f64 {
    let shrink = 1.0 - ((1.0 - r0) * (1.0 + r0)).sqrt();
    let zeta = 0.25 * PI * shrink;
    let kappa = 0.5 * phi * shrink;
    let t2 = zeta.tan().powi(2);
    let ratio = (kappa.sin() + (phi - kappa).sin() * t2) / (kappa.cos() + (phi - kappa).cos() * t2);
    -(r0 * ratio).atan()
}

/// Interferometric mixed-state phase of the same unitary loop,
/// `−arctan[r0 tan(φ/2)]`.
pub fn interferometric_phase(r0: f64, phi: f64) -> f64 {
    -(r0 * (0.5 * phi).tan()).atan()
}

/// `|γ_g| − |φ_g|` for the unitary loop; never negative.
pub fn phase_dominance_gap(r0: f64, phi: f64) -> f64 {
    interferometric_phase(r0, phi).abs() - uhlmann_phase_unitary(r0, phi).abs()
}

/// Discrete-transport evaluation of the phase with `m` uniformly spaced samples
/// (plus the two corners).
pub fn discrete_holonomy(spec: &PathSpec, m: usize) -> Result<HolonomyResult> {
    let path = DensityPath::sample(spec, 0.0, spec.duration(), m)?;
    transport(&path)
}

/// Start and end states `ρ_A`, `ρ_D`.
pub fn endpoint_states(spec: &PathSpec) -> (DensityMatrix, DensityMatrix) {
    let a = DensityMatrix::from_bloch(&spec.bloch(0.0));
    let d = DensityMatrix::from_bloch(&spec.bloch(spec.duration()));
    (a, d)
}

/// Log–log slopes of the response to weak decoherence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakDecoherenceSlopes {
    /// Slope of `|φ_g(Γ/ω) − φ_g(0)|` at r0 = 1.
    pub pure_phase: f64,
    /// Same at the mixed initial length.
    pub mixed_phase: f64,
    /// Slope of `|μ(Γ/ω) − μ(0)|` at r0 = 1.
    pub pure_angle: f64,
    /// Same at the mixed initial length.
    pub mixed_angle: f64,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Fits how fast the phase and the first transport angle move away from their
/// unitary values as Γ/ω grows over `gamma_grid`, for a pure start and for a
/// start of length `mixed_r0`.
pub fn weak_decoherence_slopes(
    mixed_r0: f64,
    phi: f64,
    gamma_grid: &[f64],
) -> Result<WeakDecoherenceSlopes> {
    if gamma_grid.len() < 3 {
        return Err(Error::GridTooCoarse(format!(
            "need at least 3 points, got {}",
            gamma_grid.len()
        )));
    }
    if gamma_grid.iter().any(|g| !(g.is_finite() && *g > 0.0))
        || gamma_grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::GridTooCoarse(
            "grid must be positive and strictly increasing".into(),
        ));
    }
    let span = gamma_grid[gamma_grid.len() - 1] / gamma_grid[0];
    if span < 10.0 {
        return Err(Error::GridTooCoarse(format!(
            "grid spans a factor {span:.3}, need at least one decade"
        )));
    }
    if !(mixed_r0 > 0.0 && mixed_r0 < 1.0) {
        return Err(Error::OutOfRange {
            value: mixed_r0,
            min: 0.0,
            max: 1.0,
        });
    }

    let slopes = |r0: f64| -> Result<(f64, f64)> {
        let base = PathSpec::new(phi, 0.0, r0)?;
        let phase0 = uhlmann_phase(&base);
        let mu0 = compute_angles(&base).mu;
        let mut phase_dev = Vec::with_capacity(gamma_grid.len());
        let mut angle_dev = Vec::with_capacity(gamma_grid.len());
        for &g in gamma_grid {
            let spec = PathSpec::new(phi, g, r0)?;
            phase_dev.push((uhlmann_phase(&spec) - phase0).abs());
            angle_dev.push((compute_angles(&spec).mu - mu0).abs());
        }
        Ok((
            loglog_slope(gamma_grid, &phase_dev),
            loglog_slope(gamma_grid, &angle_dev),
        ))
    };
    let (pure_phase, pure_angle) = slopes(1.0)?;
    let (mixed_phase, mixed_angle) = slopes(mixed_r0)?;
    Ok(WeakDecoherenceSlopes {
        pure_phase,
        mixed_phase,
        pure_angle,
        mixed_angle,
    })
}
