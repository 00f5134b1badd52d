//! Multiple-quantum coherence intensities.
//!
//! A coherence of order `n` picks up the phase `e^{-inφ}` under the decoding
//! rotation, so the detected signal is a trigonometric polynomial
//! `G(φ) = Σ_n J_n e^{inφ}`. Sampling `G` on `M` equally spaced phases and
//! taking a discrete Fourier transform recovers every `J_n` with `|n| < M/2`
//! exactly, which is the numerical route here. The closed forms for the pair
//! and the nearest-neighbour chain are the analytic route.

use std::f64::consts::PI;
use std::fmt;

use log::warn;

use crate::dynamics::{Experiment, ExperimentParams, RelaxationTime};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::spin::SpinSystem;

/// Default number of decoding phases.
pub const DEFAULT_PHASES: usize = 16;

/// Largest tolerated imaginary part of an extracted intensity.
pub const IMAG_TOL: f64 = 1e-10;

/// Intensities down to this are treated as round-off and clamped to zero.
pub const NEGATIVE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumMeta {
    pub tau: f64,
    pub t_mq: RelaxationTime,
    /// `None` for the high-temperature normalisation.
    pub beta: Option<f64>,
    pub system: String,
}

/// Intensities `J_n` indexed by coherence order.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherenceSpectrum {
    pub orders: Vec<i32>,
    pub intensities: Vec<f64>,
    pub meta: SpectrumMeta,
}

impl CoherenceSpectrum {
    pub fn intensity(&self, order: i32) -> Option<f64> {
        self.orders
            .iter()
            .position(|&n| n == order)
            .map(|k| self.intensities[k])
    }

    /// `J_n`, or zero when the order is absent from the spectrum.
    pub fn get(&self, order: i32) -> f64 {
        self.intensity(order).unwrap_or(0.0)
    }

    /// `J_{+2} + J_{−2}`.
    pub fn double_quantum(&self) -> f64 {
        self.get(2) + self.get(-2)
    }

    pub fn total(&self) -> f64 {
        self.intensities.iter().sum()
    }

    /// Every intensity divided by `norm`.
    pub fn normalized(&self, norm: f64) -> Self {
        Self {
            orders: self.orders.clone(),
            intensities: self.intensities.iter().map(|j| j / norm).collect(),
            meta: self.meta.clone(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.orders.iter().copied().zip(self.intensities.iter().copied())
    }
}

/// Extracts `J_n` for `|n| ≤ n_max` from the full pipeline using
/// `max(16, 2·n_max + 2)` decoding phases.
pub fn extract_spectrum(sys: &SpinSystem, params: &ExperimentParams, n_max: usize) -> Result<CoherenceSpectrum> {
    extract_spectrum_with(sys, params, n_max, DEFAULT_PHASES.max(2 * n_max + 2))
}

/// [`extract_spectrum`] with an explicit phase-grid size.
pub fn extract_spectrum_with(
    sys: &SpinSystem,
    params: &ExperimentParams,
    n_max: usize,
    phases: usize,
) -> Result<CoherenceSpectrum> {
    if phases < 2 * n_max + 2 {
        return Err(Error::InvalidParameter(format!(
            "{phases} phases cannot resolve orders up to {n_max}; need at least {}",
            2 * n_max + 2
        )));
    }
    if n_max < sys.max_coherence_order() {
        warn!(
            "n_max = {n_max} is below the highest order {} this system supports; higher orders may alias",
            sys.max_coherence_order()
        );
    }
    let exp = Experiment::new(sys, params)?;
    let step = 2.0 * PI / phases as f64;
    let signal = (0..phases)
        .map(|m| exp.signal(step * m as f64, params.t_mq))
        .collect::<Result<Vec<f64>>>()?;

    let n_max = n_max as i32;
    let orders: Vec<i32> = (-n_max..=n_max).collect();
    let intensities = orders
        .iter()
        .map(|&n| {
            let j: C64 = signal
                .iter()
                .enumerate()
                .map(|(m, &g)| C64::from_polar(g, -(n as f64) * step * m as f64))
                .sum::<C64>()
                / phases as f64;
            if j.im.abs() > IMAG_TOL {
                return Err(Error::ImaginaryResidue {
                    what: "coherence intensity",
                    residue: j.im,
                });
            }
            clamp_intensity(j.re)
        })
        .collect::<Result<Vec<f64>>>()?;

    Ok(CoherenceSpectrum {
        orders,
        intensities,
        meta: SpectrumMeta {
            tau: params.tau,
            t_mq: params.t_mq,
            beta: Some(params.beta),
            system: sys.describe(),
        },
    })
}

fn clamp_intensity(j: f64) -> Result<f64> {
    if j < -NEGATIVE_TOL {
        return Err(Error::InvalidParameter(format!("negative coherence intensity {j:e}")));
    }
    Ok(j.max(0.0))
}

/// Pair intensities:
/// `J_0 = tanh(β/2) cos²(Dτ) e^{−2τ/T}`, `J_{±2} = ½ tanh(β/2) sin²(Dτ) e^{−2τ/T}`.
pub fn closed_form_pair(params: &ExperimentParams) -> CoherenceSpectrum {
    let amp = (params.beta / 2.0).tanh() * params.t_mq.decay(2.0 * params.tau);
    let (s, c) = params.d_tau().sin_cos();
    let j0 = amp * c * c;
    let j2 = 0.5 * amp * s * s;
    CoherenceSpectrum {
        orders: vec![-2, 0, 2],
        intensities: vec![j2, j0, j2],
        meta: SpectrumMeta {
            tau: params.tau,
            t_mq: params.t_mq,
            beta: Some(params.beta),
            system: "pair".to_string(),
        },
    }
}

/// Nearest-neighbour chain of `n_spins`, high-temperature normalisation:
/// `J_0 = (e^{−2τ/T}/N) Σ_k cos²(2Dτ cos k)` over `k = πj/(N+1)`, `j = 1..N`.
///
/// The sine sum is the combined `±2` intensity; each order carries half.
pub fn closed_form_chain(n_spins: usize, params: &ExperimentParams) -> Result<CoherenceSpectrum> {
    if n_spins < 2 {
        return Err(Error::InvalidSystem(format!(
            "a chain needs at least two spins, got {n_spins}"
        )));
    }
    let decay = params.t_mq.decay(2.0 * params.tau);
    let two_d_tau = 2.0 * params.d_tau();
    let (mut cos_sum, mut sin_sum) = (0.0, 0.0);
    for j in 1..=n_spins {
        let k = PI * j as f64 / (n_spins + 1) as f64;
        let (s, c) = (two_d_tau * k.cos()).sin_cos();
        cos_sum += c * c;
        sin_sum += s * s;
    }
    let j0 = decay * cos_sum / n_spins as f64;
    let j_pm2 = decay * sin_sum / n_spins as f64;
    Ok(CoherenceSpectrum {
        orders: vec![-2, 0, 2],
        intensities: vec![j_pm2 / 2.0, j0, j_pm2 / 2.0],
        meta: SpectrumMeta {
            tau: params.tau,
            t_mq: params.t_mq,
            beta: None,
            system: format!("chain(N={n_spins})"),
        },
    })
}

/// How well one side of `D ≫ 1/T_MQ ≫ D/8` holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// Ratio at least 10.
    Satisfied,
    /// Ratio strictly between 1 and 10.
    Marginal,
    /// Ratio at most 1.
    Violated,
}

impl Condition {
    fn grade(ratio: f64) -> Self {
        if ratio >= 10.0 {
            Self::Satisfied
        } else if ratio > 1.0 {
            Self::Marginal
        } else {
            Self::Violated
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Satisfied => "satisfied",
            Self::Marginal => "marginal",
            Self::Violated => "violated",
        })
    }
}

/// Where `D·T_MQ` sits relative to `D ≫ 1/T_MQ ≫ D/8`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegimeDiagnostic {
    /// `D·T_MQ`.
    pub d_tmq: f64,
    /// `8/(D·T_MQ)`: how strongly relaxation masks next-nearest neighbours.
    pub nnn_ratio: f64,
    /// `D ≫ 1/T_MQ`.
    pub relaxation_weak: Condition,
    /// `1/T_MQ ≫ D/8`.
    pub nnn_masked: Condition,
}

impl RegimeDiagnostic {
    /// The pair theory only needs relaxation to be a perturbation.
    pub fn pair_valid(&self) -> bool {
        self.relaxation_weak == Condition::Satisfied
    }

    /// Loose reading of the chain window, `1 < D·T_MQ < 8`.
    ///
    /// Both sides can never be satisfied at the factor-10 level at once.
    pub fn chain_valid(&self) -> bool {
        self.d_tmq > 1.0 && self.d_tmq < 8.0
    }

    pub fn message(&self) -> String {
        let verdict = match (self.relaxation_weak, self.nnn_masked) {
            (Condition::Marginal, Condition::Marginal) => "both conditions marginal".to_string(),
            (a, b) => format!("D >> 1/T_MQ {a}, 1/T_MQ >> D/8 {b}"),
        };
        format!(
            "D*T_MQ = {:.6e}, 8/(D*T_MQ) = {:.6e} (D >> 1/T_MQ >> D/8): {verdict}; pair theory {}, chain window {}",
            self.d_tmq,
            self.nnn_ratio,
            if self.pair_valid() { "valid" } else { "questionable" },
            if self.chain_valid() { "met" } else { "not met" },
        )
    }
}

impl fmt::Display for RegimeDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message())
    }
}

/// Grades `D` (rad/s) against `T_MQ`. Never fails; callers decide whether to warn.
pub fn regime_check(coupling: f64, t_mq: RelaxationTime) -> RegimeDiagnostic {
    let d_tmq = coupling * t_mq.seconds();
    let nnn_ratio = 8.0 / d_tmq;
    RegimeDiagnostic {
        d_tmq,
        nnn_ratio,
        relaxation_weak: Condition::grade(d_tmq),
        nnn_masked: Condition::grade(nnn_ratio),
    }
}
