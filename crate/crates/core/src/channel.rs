//! The depolarization channel for a qubit precessing under `H = ½ω σz`.
//!
//! Markovian form: `ρ̇ = i[ρ, H] − (2Γ/3) r·σ`, generated by the Lindblad
//! operators `√(Γ/3) σμ`, with the exact Bloch solution
//! `r(t) = r0 e^{−4Γt/3} (sin θ cos ωt, sin θ sin ωt, cos θ)`.
//!
//! Kraus form: `ρ ↦ (1 − p) RρR† + (p/3) Σμ σμ RρR† σμ`, which matches the
//! Markovian flow at time `t` for `p(t) = ¾ (1 − e^{−4Γt/3})` and
//! `R = exp(−½ iωt σz)`.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::qubit::{
    identity, pauli, sigma_z, su2_rotation, BlochVector, CMat2, DensityMatrix, C64,
};

/// Rates and initial condition of the depolarizing precession.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Decoherence rate Γ.
    pub gamma: f64,
    /// Precession frequency ω.
    pub omega: f64,
    /// Initial polar angle θ.
    pub theta: f64,
    /// Initial Bloch length.
    pub r0: f64,
}

impl ChannelParams {
    pub fn new(gamma: f64, omega: f64, theta: f64, r0: f64) -> Result<Self> {
        let ok = gamma >= 0.0
            && omega > 0.0
            && (0.0..=1.0).contains(&r0)
            && (0.0..=std::f64::consts::PI).contains(&theta)
            && gamma.is_finite()
            && omega.is_finite();
        if !ok {
            return Err(Error::InvalidParams(format!(
                "need gamma >= 0, omega > 0, 0 <= r0 <= 1, 0 <= theta <= pi; got \
                 gamma={gamma}, omega={omega}, theta={theta}, r0={r0}"
            )));
        }
        Ok(Self {
            gamma,
            omega,
            theta,
            r0,
        })
    }

    pub fn hamiltonian(&self) -> CMat2 {
        sigma_z() * C64::from(0.5 * self.omega)
    }

    /// `Lμ = √(Γ/3) σμ`.
    pub fn lindblad_operators(&self) -> [CMat2; 3] {
        let c = C64::from((self.gamma / 3.0).sqrt());
        pauli().map(|s| s * c)
    }

    /// `R(t) = exp(−½ iωt σz)`.
    pub fn precession(&self, t: f64) -> CMat2 {
        su2_rotation(0.5 * self.omega * t, &Vector3::z())
    }

    /// Bloch-length decay factor `e^{−4Γt/3}`.
    pub fn decay(&self, t: f64) -> f64 {
        (-4.0 * self.gamma * t / 3.0).exp()
    }

    pub fn initial_state(&self) -> DensityMatrix {
        let r = BlochVector::spherical(self.r0, self.theta, 0.0).expect("r0 <= 1");
        DensityMatrix::from_bloch(&r)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            value: t,
            min: 0.0,
            max: f64::INFINITY,
        })
    }
}

/// Closed-form Bloch vector of the depolarizing precession at time `t`.
pub fn bloch_solution(params: &ChannelParams, t: f64) -> Result<BlochVector> {
    check_time(t)?;
    let len = params.r0 * params.decay(t);
    BlochVector::spherical(len, params.theta, params.omega * t)
}

/// `i[ρ, H] − (2Γ/3) r·σ` for any (not necessarily normalized) matrix.
fn rhs_matrix(m: &CMat2, params: &ChannelParams) -> CMat2 {
    let h = params.hamiltonian();
    let commutator = (m * h - h * m) * C64::i();
    // r·σ = 2ρ − Tr ρ.
    let r_sigma = m * C64::from(2.0) - identity() * m.trace();
    commutator - r_sigma * C64::from(2.0 * params.gamma / 3.0)
}

/// Right-hand side of the depolarizing Lindblad equation.
pub fn lindblad_rhs(rho: &DensityMatrix, params: &ChannelParams) -> CMat2 {
    rhs_matrix(rho.matrix(), params)
}

/// Generic Lindblad right-hand side
/// `i[ρ, H] + Σ (LρL† − ½ L†Lρ − ½ ρL†L)`.
pub fn lindblad_rhs_generic(rho: &CMat2, hamiltonian: &CMat2, operators: &[CMat2]) -> CMat2 {
    let mut out = (rho * hamiltonian - hamiltonian * rho) * C64::i();
    for l in operators {
        let ldl = l.adjoint() * l;
        out += l * rho * l.adjoint() - (ldl * rho + rho * ldl) * C64::from(0.5);
    }
    out
}

/// Smallest step count accepted by [`integrate_lindblad`] for horizon `t1`.
pub fn min_lindblad_steps(params: &ChannelParams, t1: f64) -> usize {
    (100.0 * (params.gamma + params.omega) * t1).ceil() as usize
}

/// Fourth-order Runge-Kutta integration of the Lindblad equation from the
/// initial state of `params` up to `t1`.
pub fn integrate_lindblad(params: &ChannelParams, t1: f64, steps: usize) -> Result<DensityMatrix> {
    check_time(t1)?;
    let required = min_lindblad_steps(params, t1);
    if steps < required || steps == 0 {
        return Err(Error::StepCountTooLow {
            steps,
            required: required.max(1),
        });
    }
    let h = t1 / steps as f64;
    let half = C64::from(0.5 * h);
    let full = C64::from(h);
    let mut m = *params.initial_state().matrix();
    for _ in 0..steps {
        let k1 = rhs_matrix(&m, params);
        let k2 = rhs_matrix(&(m + k1 * half), params);
        let k3 = rhs_matrix(&(m + k2 * half), params);
        let k4 = rhs_matrix(&(m + k3 * full), params);
        m += (k1 + k2 * C64::from(2.0) + k3 * C64::from(2.0) + k4) * C64::from(h / 6.0);
    }
    DensityMatrix::new((m + m.adjoint()) * C64::from(0.5))
}

/// [`integrate_lindblad`] at a resolution that reproduces the closed form to
/// about `1e−10`.
pub fn integrate_lindblad_default(params: &ChannelParams, t1: f64) -> Result<DensityMatrix> {
    let steps = (4 * min_lindblad_steps(params, t1)).max(1000);
    integrate_lindblad(params, t1, steps)
}

/// `p(t) = ¾ (1 − e^{−4Γt/3})`.
pub fn depol_probability(params: &ChannelParams, t: f64) -> f64 {
    -0.75 * (-4.0 * params.gamma * t / 3.0).exp_m1()
}

/// Kraus operators of a channel, applied as `ρ ↦ Σ K ρ K†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    operators: Vec<CMat2>,
}

impl KrausSet {
    /// `{√(1−p) R, √(p/3) σx R, √(p/3) σy R, √(p/3) σz R}`.
    pub fn depolarizing(p: f64, rotation: CMat2) -> Result<Self> {
        if !(0.0..=0.75).contains(&p) {
            return Err(Error::OutOfRange {
                value: p,
                min: 0.0,
                max: 0.75,
            });
        }
        let keep = C64::from((1.0 - p).sqrt());
        let flip = C64::from((p / 3.0).sqrt());
        let [sx, sy, sz] = pauli();
        Ok(Self {
            operators: vec![
                rotation * keep,
                sx * rotation * flip,
                sy * rotation * flip,
                sz * rotation * flip,
            ],
        })
    }

    /// Depolarization with `p(t)` following precession `R(t)`.
    pub fn at_time(params: &ChannelParams, t: f64) -> Result<Self> {
        check_time(t)?;
        Self::depolarizing(depol_probability(params, t), params.precession(t))
    }

    /// Arbitrary operators; completeness is checked when applied.
    pub fn from_operators(operators: Vec<CMat2>) -> Self {
        Self { operators }
    }

    pub fn operators(&self) -> &[CMat2] {
        &self.operators
    }

    /// Largest elementwise deviation of `Σ K†K` from the identity.
    pub fn completeness_defect(&self) -> f64 {
        let sum = self
            .operators
            .iter()
            .fold(CMat2::zeros(), |acc, k| acc + k.adjoint() * k);
        (sum - identity())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// `Σ K ρ K†`.
pub fn kraus_apply(rho: &DensityMatrix, kraus: &KrausSet) -> Result<DensityMatrix> {
    let defect = kraus.completeness_defect();
    if defect > 1e-12 {
        return Err(Error::IncompleteKraus(defect));
    }
    let out = kraus.operators.iter().fold(CMat2::zeros(), |acc, k| {
        acc + k * rho.matrix() * k.adjoint()
    });
    DensityMatrix::new(out)
}
