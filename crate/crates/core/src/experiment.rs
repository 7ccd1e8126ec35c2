//! Four-qubit interferometric readout of the phase.
//!
//! The system qubit is purified by one qubit `b`, and the depolarizing channel
//! is dilated onto a pair of ancilla qubits `a1 a2`. Amplitudes are stored in
//! the order system ⊗ b ⊗ a1 ⊗ a2, so index `s·8 + b·4 + a1·2 + a2`.

use std::f64::consts::{PI, TAU};

use nalgebra::SMatrix;

use crate::analytic::{holonomy_trace, v_d, PathSpec};
use crate::error::{Error, Result};
use crate::qubit::{CMat2, C64};
use crate::transport::principal_arg;

/// Unitary on the three-qubit register `b ⊗ a1 ⊗ a2`.
pub type CMat8 = SMatrix<C64, 8, 8>;

const NORM_TOL: f64 = 1e-12;
const DEFAULT_DELTA_SAMPLES: usize = 720;

/// Normalized 16-amplitude state of system ⊗ b ⊗ a1 ⊗ a2.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector16([C64; 16]);

impl StateVector16 {
    pub fn new(amplitudes: [C64; 16]) -> Result<Self> {
        let state = Self(amplitudes);
        let defect = (state.norm() - 1.0).abs();
        if defect > NORM_TOL {
            return Err(Error::NormalizationFailure(format!(
                "state norm off by {defect:e}"
            )));
        }
        Ok(state)
    }

    pub fn index(s: usize, b: usize, a1: usize, a2: usize) -> usize {
        s * 8 + b * 4 + a1 * 2 + a2
    }

    pub fn amplitudes(&self) -> &[C64; 16] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    /// The eight-amplitude block attached to system state `s`.
    pub fn branch(&self, s: usize) -> [C64; 8] {
        std::array::from_fn(|k| self.0[s * 8 + k])
    }

    /// Reduced density matrix of the system qubit.
    pub fn reduced_system(&self) -> CMat2 {
        CMat2::from_fn(|i, j| {
            (0..8)
                .map(|k| self.0[i * 8 + k] * self.0[j * 8 + k].conj())
                .sum()
        })
    }

    /// Schmidt coefficients across the system | rest cut, largest first.
    pub fn schmidt_coefficients(&self) -> [f64; 2] {
        let rho = self.reduced_system();
        let tr = rho.trace().re;
        let gap = (rho[(0, 0)].re - rho[(1, 1)].re).hypot(2.0 * rho[(0, 1)].norm());
        [
            (0.5 * (tr + gap)).sqrt(),
            (0.5 * (tr - gap)).max(0.0).sqrt(),
        ]
    }

    /// `(u ⊗ I_b ⊗ I_a)|ψ⟩`.
    pub fn apply_system(&self, u: &CMat2) -> Self {
        Self(std::array::from_fn(|n| {
            let (i, k) = (n / 8, n % 8);
            u[(i, 0)] * self.0[k] + u[(i, 1)] * self.0[8 + k]
        }))
    }

    /// `(I_s ⊗ u)|ψ⟩` for `u` acting on `b ⊗ a1 ⊗ a2`.
    pub fn apply_register(&self, u: &CMat8) -> Self {
        Self(std::array::from_fn(|n| {
            let (i, k) = (n / 8, n % 8);
            (0..8).map(|l| u[(k, l)] * self.0[i * 8 + l]).sum()
        }))
    }
}

/// Path plus δ-scan resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub spec: PathSpec,
    pub delta_samples: usize,
}

impl ExperimentConfig {
    pub fn new(spec: PathSpec, delta_samples: usize) -> Result<Self> {
        if delta_samples < 8 {
            return Err(Error::InvalidParams(format!(
                "need at least 8 delta samples, got {delta_samples}"
            )));
        }
        Ok(Self {
            spec,
            delta_samples,
        })
    }

    pub fn with_default_samples(spec: PathSpec) -> Self {
        Self {
            spec,
            delta_samples: DEFAULT_DELTA_SAMPLES,
        }
    }
}

/// Depolarization at the end point: `p_D = ¾(1 − r_D/r_A)` together with
/// `1 − r_D`, both evaluated without cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointDepolarization {
    pub r_a: f64,
    pub r_d: f64,
    pub p_d: f64,
    pub one_minus_r_d: f64,
}

impl EndpointDepolarization {
    pub fn new(spec: &PathSpec) -> Self {
        let r_a = spec.r0;
        // 1 − r_D/r_A = −expm1(−(4/3)(Γ/ω)(φ+π)); defined at r_A = 0 too.
        let shrink = -(-4.0 * spec.gamma_over_omega * spec.duration() / 3.0).exp_m1();
        Self {
            r_a,
            r_d: r_a * (1.0 - shrink),
            p_d: 0.75 * shrink,
            one_minus_r_d: (1.0 - r_a) + r_a * shrink,
        }
    }
}

fn purified(r: f64, one_minus_r: f64) -> StateVector16 {
    let mut amps = [C64::from(0.0); 16];
    amps[StateVector16::index(0, 0, 0, 0)] = C64::from(((1.0 + r) / 2.0).sqrt());
    amps[StateVector16::index(1, 1, 0, 0)] = C64::from((one_minus_r / 2.0).sqrt());
    StateVector16(amps)
}

/// `(√((1+r_A)/2)|0⟩|0_b⟩ + √((1−r_A)/2)|1⟩|1_b⟩) ⊗ |0_a 0_a⟩`.
pub fn prepare_psi_a(spec: &PathSpec) -> StateVector16 {
    purified(spec.r0, 1.0 - spec.r0)
}

/// The Schmidt partners `|D⟩`, `|D⊥⟩` on `b ⊗ a1 ⊗ a2`.
pub fn endpoint_partners(spec: &PathSpec) -> ([C64; 8], [C64; 8]) {
    let e = EndpointDepolarization::new(spec);
    let zero = C64::from(0.0);
    let i = C64::i();
    let keep = (1.0 - e.p_d).sqrt();
    let flip = (e.p_d / 3.0).sqrt();
    let reg = |b: usize, a1: usize, a2: usize| b * 4 + a1 * 2 + a2;

    let mut d = [zero; 8];
    let upper = ((1.0 + e.r_a) / (1.0 + e.r_d)).sqrt();
    let lower = ((1.0 - e.r_a) / (1.0 + e.r_d)).sqrt();
    d[reg(0, 0, 0)] = C64::from(upper * keep);
    d[reg(0, 1, 1)] = C64::from(upper * flip);
    d[reg(1, 0, 1)] = C64::from(lower * flip);
    d[reg(1, 1, 0)] = -i * (lower * flip);

    let mut d_perp = [zero; 8];
    if e.one_minus_r_d == 0.0 {
        // Pure end point: |D⊥⟩ carries zero weight, take the limiting vector.
        d_perp[reg(1, 0, 0)] = C64::from(1.0);
    } else {
        let upper = ((1.0 + e.r_a) / e.one_minus_r_d).sqrt();
        let lower = ((1.0 - e.r_a) / e.one_minus_r_d).sqrt();
        d_perp[reg(0, 0, 1)] = C64::from(upper * flip);
        d_perp[reg(0, 1, 0)] = i * (upper * flip);
        d_perp[reg(1, 0, 0)] = C64::from(lower * keep);
        d_perp[reg(1, 1, 1)] = C64::from(-lower * flip);
    }
    (d, d_perp)
}

fn inner8(a: &[C64; 8], b: &[C64; 8]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm8(a: &[C64; 8]) -> f64 {
    inner8(a, a).re.sqrt()
}

/// `√((1+r_D)/2)|0⟩|D⟩ + √((1−r_D)/2)|1⟩|D⊥⟩`.
pub fn build_psi_d(spec: &PathSpec) -> Result<StateVector16> {
    let e = EndpointDepolarization::new(spec);
    let (d, d_perp) = endpoint_partners(spec);
    for (name, v) in [("D", &d), ("D-perp", &d_perp)] {
        let defect = (norm8(v) - 1.0).abs();
        if defect > NORM_TOL {
            return Err(Error::NormalizationFailure(format!(
                "|{name}> norm off by {defect:e}"
            )));
        }
    }
    let overlap = inner8(&d, &d_perp).norm();
    if overlap > NORM_TOL {
        return Err(Error::NormalizationFailure(format!(
            "<D|D-perp> = {overlap:e}"
        )));
    }
    let c0 = ((1.0 + e.r_d) / 2.0).sqrt();
    let c1 = (e.one_minus_r_d / 2.0).sqrt();
    let amps = std::array::from_fn(|n| if n < 8 { d[n] * c0 } else { d_perp[n - 8] * c1 });
    StateVector16::new(amps)
}

/// `(√((1+r_D)/2)|0⟩|0_b⟩ + √((1−r_D)/2)|1⟩|1_b⟩) ⊗ |0_a 0_a⟩`.
pub fn disentangled_target(spec: &PathSpec) -> StateVector16 {
    let e = EndpointDepolarization::new(spec);
    purified(e.r_d, e.one_minus_r_d)
}

/// Unitary on `b ⊗ a1 ⊗ a2` taking `|D⟩ → |0_b 0_a 0_a⟩` and
/// `|D⊥⟩ → |1_b 0_a 0_a⟩`. The complement is spanned by Gram–Schmidt over the
/// computational basis in index order and sent to the remaining basis states
/// in index order.
pub fn synthesize_disentangler(d: &[C64; 8], d_perp: &[C64; 8]) -> Result<CMat8> {
    let overlap = inner8(d, d_perp).norm();
    if overlap > NORM_TOL {
        return Err(Error::NotOrthogonal(overlap));
    }
    let mut sources: Vec<[C64; 8]> = Vec::with_capacity(8);
    for v in [d, d_perp] {
        let n = norm8(v);
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NormalizationFailure(format!(
                "partner norm off by {:e}",
                (n - 1.0).abs()
            )));
        }
        sources.push(*v);
    }
    for k in 0..8 {
        if sources.len() == 8 {
            break;
        }
        let mut v = [C64::from(0.0); 8];
        v[k] = C64::from(1.0);
        for _ in 0..2 {
            for s in &sources {
                let c = inner8(s, &v);
                for (x, y) in v.iter_mut().zip(s) {
                    *x -= c * y;
                }
            }
        }
        let n = norm8(&v);
        if n > 1e-6 {
            sources.push(v.map(|x| x / n));
        }
    }
    let targets = [0, 4, 1, 2, 3, 5, 6, 7];
    // U = Σ_k |t_k⟩⟨s_k|.
    let mut u = CMat8::zeros();
    for (s, &t) in sources.iter().zip(&targets) {
        for (col, x) in s.iter().enumerate() {
            u[(t, col)] = x.conj();
        }
    }
    Ok(u)
}

/// One sample of the interference pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub delta: f64,
    pub intensity: f64,
}

/// Outcome of the δ scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    /// Fringe shift from the scan maximum with quadratic refinement.
    pub phase: f64,
    /// Fringe visibility from the first Fourier harmonic of the scan.
    pub visibility: f64,
    /// `arg⟨Ψ_A|V_D V_A† ⊗ I|Ψ̃_D⟩`.
    pub direct_phase: f64,
    /// `|⟨Ψ_A|V_D V_A† ⊗ I|Ψ̃_D⟩|`.
    pub direct_visibility: f64,
    pub curve: Vec<ScanPoint>,
}

/// The two interfering arms: `|Ψ_A⟩` and `(V_D V_A† ⊗ I)|Ψ̃_D⟩`.
pub fn interfering_states(spec: &PathSpec) -> Result<(StateVector16, StateVector16)> {
    let psi_a = prepare_psi_a(spec);
    let psi_d = build_psi_d(spec)?;
    let (d, d_perp) = endpoint_partners(spec);
    let u = synthesize_disentangler(&d, &d_perp)?;
    let tilde = psi_d.apply_register(&u);
    let target = disentangled_target(spec);
    let miss = tilde
        .amplitudes()
        .iter()
        .zip(target.amplitudes())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if miss > 1e-10 {
        return Err(Error::NormalizationFailure(format!(
            "disentangled state misses its target by {miss:e}"
        )));
    }
    let arm = tilde.apply_system(&v_d(spec));
    for s in [&psi_a, &arm] {
        let defect = (s.norm() - 1.0).abs();
        if defect > NORM_TOL {
            return Err(Error::NormalizationFailure(format!(
                "state norm off by {defect:e}"
            )));
        }
    }
    Ok((psi_a, arm))
}

/// Scans `I(δ) = |e^{iδ}|Ψ_A⟩ + (V_D V_A† ⊗ I)|Ψ̃_D⟩|²` over `δ ∈ [0, 2π)` and
/// reads off the fringe shift and visibility.
pub fn interference_scan(config: &ExperimentConfig) -> Result<ScanResult> {
    let (psi_a, arm) = interfering_states(&config.spec)?;
    let overlap = psi_a.inner(&arm);
    if overlap.norm() < 1e-10 {
        return Err(Error::ZeroVisibility(overlap.norm()));
    }
    debug_assert!((overlap - holonomy_trace(&config.spec)).norm() < 1e-10);

    let n = config.delta_samples;
    let h = TAU / n as f64;
    let curve: Vec<ScanPoint> = (0..n)
        .map(|k| {
            let delta = k as f64 * h;
            let shift = C64::from_polar(1.0, delta);
            let intensity = psi_a
                .amplitudes()
                .iter()
                .zip(arm.amplitudes())
                .map(|(a, b)| (shift * a + b).norm_sqr())
                .sum();
            ScanPoint { delta, intensity }
        })
        .collect();

    let peak = (0..n)
        .max_by(|&i, &j| curve[i].intensity.total_cmp(&curve[j].intensity))
        .expect("at least 8 samples");
    let before = curve[(peak + n - 1) % n].intensity;
    let at = curve[peak].intensity;
    let after = curve[(peak + 1) % n].intensity;
    let curvature = before - 2.0 * at + after;
    let offset = if curvature < 0.0 {
        0.5 * (before - after) / curvature
    } else {
        0.0
    };
    let mut phase = (peak as f64 + offset) * h;
    if phase > PI {
        phase -= TAU;
    }

    let (c0, c1) = curve.iter().fold((0.0, C64::from(0.0)), |(c0, c1), p| {
        (
            c0 + p.intensity,
            c1 + C64::from_polar(p.intensity, -p.delta),
        )
    });
    let visibility = 2.0 * c1.norm() / c0;

    Ok(ScanResult {
        phase,
        visibility,
        direct_phase: principal_arg(overlap),
        direct_visibility: overlap.norm(),
        curve,
    })
}
