//! The four-period multiple-quantum experiment with linear relaxation towards
//! the rotating-frame equilibrium `ρ̄ = I/2^N`.
//!
//! With the relaxation term `−(ρ − ρ̄)/T_MQ` and `ρ̄` commuting with the
//! Hamiltonian, the deviation `ρ − ρ̄` evolves unitarily while decaying as
//! `exp(−t/T_MQ)`. Every stage is therefore a mixture of a unitarily
//! transported `ρ_eq` and `ρ̄`, and nothing has to be time-stepped:
//!
//! * preparation, time `τ` under `H_MQ`:
//!   `ρ(τ) = U ρ_eq U† e^{−τ/T} + (1 − e^{−τ/T}) ρ̄` with `U = exp(−i H_MQ τ)`;
//! * evolution under the decoding offset, phase `φ = Δ·t`, no relaxation:
//!   `V = exp(−iφ Iz)` applied to the transported part;
//! * mixing, time `τ` under `−H_MQ`: `U†` applied, total decay `e^{−2τ/T}`.
//!
//! The detected signal is `G(φ) = Tr(Iz ρ_final(φ))`.

use std::fmt;
use std::str::FromStr;

use log::warn;

use crate::error::{Error, Result};
use crate::linalg::{
    conjugate, hermitian_eigendecomposition, unitarity_defect, unitary_exp, ComplexMatrix, C64,
};
use crate::spin::{build_h_mq, build_rho_bar, build_rho_eq, SpinSystem};

/// Operational reading of `D·T_MQ ≫ 1`.
pub const REGIME_THRESHOLD: f64 = 10.0;

/// Largest imaginary part tolerated in `Tr(Iz ρ)`.
pub const REAL_TOL: f64 = 1e-12;

/// Spin-lattice relaxation time of the coherences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RelaxationTime {
    Finite(f64),
    Infinite,
}

impl RelaxationTime {
    /// `T_MQ` such that `τ/T_MQ = ratio`; a zero ratio means no relaxation.
    pub fn from_ratio(tau: f64, ratio: f64) -> Result<Self> {
        if !(ratio >= 0.0 && ratio.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tau/T_MQ must be a finite non-negative number, got {ratio}"
            )));
        }
        if ratio == 0.0 {
            Ok(Self::Infinite)
        } else if !(tau > 0.0) {
            Err(Error::InvalidParameter(format!(
                "tau/T_MQ = {ratio} needs a positive tau, got {tau}"
            )))
        } else {
            Ok(Self::Finite(tau / ratio))
        }
    }

    /// `exp(−t/T_MQ)`, exactly 1 for an infinite relaxation time.
    pub fn decay(&self, t: f64) -> f64 {
        match *self {
            Self::Infinite => 1.0,
            Self::Finite(t_mq) => (-t / t_mq).exp(),
        }
    }

    /// `t/T_MQ`.
    pub fn ratio(&self, t: f64) -> f64 {
        match *self {
            Self::Infinite => 0.0,
            Self::Finite(t_mq) => t / t_mq,
        }
    }

    pub fn seconds(&self) -> f64 {
        match *self {
            Self::Infinite => f64::INFINITY,
            Self::Finite(t) => t,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Self::Infinite)
    }
}

impl fmt::Display for RelaxationTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Infinite => f.write_str("inf"),
            Self::Finite(t) => write!(f, "{t}"),
        }
    }
}

impl FromStr for RelaxationTime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "inf" {
            return Ok(Self::Infinite);
        }
        let t: f64 = s
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("T_MQ must be a number or \"inf\", got {s:?}")))?;
        if t.is_finite() && t > 0.0 {
            Ok(Self::Finite(t))
        } else {
            Err(Error::InvalidParameter(format!(
                "T_MQ must be positive (or \"inf\"), got {s}"
            )))
        }
    }
}

/// Inputs of one run of the experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentParams {
    /// Dipolar coupling `D`, rad/s.
    pub coupling: f64,
    /// Preparation (and mixing) duration, s.
    pub tau: f64,
    pub t_mq: RelaxationTime,
    /// Decoding phase `φ = Δ·t`, rad.
    pub phase: f64,
    /// `ħω0/kT`.
    pub beta: f64,
}

impl ExperimentParams {
    pub fn new(coupling: f64, tau: f64, t_mq: RelaxationTime, beta: f64) -> Result<Self> {
        let p = Self {
            coupling,
            tau,
            t_mq,
            phase: 0.0,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters given by the dimensionless products `Dτ` and `τ/T_MQ`.
    pub fn from_dimensionless(coupling: f64, d_tau: f64, relax_ratio: f64, beta: f64) -> Result<Self> {
        if !(coupling > 0.0) {
            return Err(Error::InvalidParameter(format!("coupling D must be positive, got {coupling}")));
        }
        let tau = d_tau / coupling;
        Self::new(coupling, tau, RelaxationTime::from_ratio(tau, relax_ratio)?, beta)
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.coupling.is_finite() && self.coupling > 0.0) {
            return bad(format!("coupling D must be positive, got {}", self.coupling));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return bad(format!("tau must be non-negative, got {}", self.tau));
        }
        if let RelaxationTime::Finite(t) = self.t_mq {
            if !(t > 0.0) {
                return bad(format!("T_MQ must be positive, got {t}"));
            }
        }
        if !self.phase.is_finite() {
            return bad(format!("decoding phase must be finite, got {}", self.phase));
        }
        if !self.beta.is_finite() {
            return bad(format!("beta must be finite, got {}", self.beta));
        }
        Ok(())
    }

    pub fn d_tau(&self) -> f64 {
        self.coupling * self.tau
    }

    /// `τ/T_MQ`.
    pub fn relax_ratio(&self) -> f64 {
        self.t_mq.ratio(self.tau)
    }

    /// `D·T_MQ ≥ 10`: relaxation is a perturbation of the coherent dynamics.
    pub fn regime_ok(&self) -> bool {
        self.coupling * self.t_mq.seconds() >= REGIME_THRESHOLD
    }
}

/// Density matrices at the end of preparation, evolution and mixing.
#[derive(Clone, Debug)]
pub struct StageDensities {
    pub rho_prep: ComplexMatrix,
    pub rho_evolved: ComplexMatrix,
    pub rho_final: ComplexMatrix,
}

/// Reusable propagators for one `(system, D, τ, β)`.
///
/// Sweeps over the decoding phase or `T_MQ` only redo the cheap diagonal
/// rotation and the final mixture.
#[derive(Clone, Debug)]
pub struct Experiment {
    sys: SpinSystem,
    u_prep: ComplexMatrix,
    /// `U ρ_eq U†`.
    transported: ComplexMatrix,
    rho_eq: ComplexMatrix,
    rho_bar: ComplexMatrix,
    tau: f64,
}

impl Experiment {
    pub fn new(sys: &SpinSystem, params: &ExperimentParams) -> Result<Self> {
        params.validate()?;
        if !params.regime_ok() {
            warn!(
                "D*T_MQ = {:.3} is below {REGIME_THRESHOLD}; relaxation is not a small perturbation",
                params.coupling * params.t_mq.seconds()
            );
        }
        let h = build_h_mq(sys, params.coupling)?;
        let u_prep = unitary_exp(&h, params.tau)?;
        let rho_eq = build_rho_eq(sys, params.beta);
        let transported = conjugate(&u_prep, &rho_eq)?;
        Ok(Self {
            sys: sys.clone(),
            u_prep,
            transported,
            rho_eq,
            rho_bar: build_rho_bar(sys),
            tau: params.tau,
        })
    }

    pub fn system(&self) -> &SpinSystem {
        &self.sys
    }

    pub fn rho_eq(&self) -> &ComplexMatrix {
        &self.rho_eq
    }

    /// `exp(−i H_MQ τ)`.
    pub fn preparation_propagator(&self) -> &ComplexMatrix {
        &self.u_prep
    }

    /// `exp(−iφ Iz)`; diagonal.
    pub fn decoding_propagator(&self, phase: f64) -> ComplexMatrix {
        let diag: Vec<C64> = self
            .sys
            .iz_diagonal()
            .iter()
            .map(|&m| C64::from_polar(1.0, -phase * m))
            .collect();
        let mut v = ComplexMatrix::zeros(self.sys.dim());
        for (i, z) in diag.into_iter().enumerate() {
            v[(i, i)] = z;
        }
        v
    }

    pub fn preparation(&self, t_mq: RelaxationTime) -> Result<ComplexMatrix> {
        let w = t_mq.decay(self.tau);
        self.transported.mix(w, &self.rho_bar, 1.0 - w)
    }

    /// `V A V†` for the diagonal decoding rotation, done entrywise.
    fn decode(&self, a: &ComplexMatrix, phase: f64) -> ComplexMatrix {
        let m = self.sys.iz_diagonal();
        ComplexMatrix::from_fn(a.dim(), |i, j| a[(i, j)] * C64::from_polar(1.0, -phase * (m[i] - m[j])))
    }

    /// The transported, decoded and back-transported `ρ_eq`, before relaxation weights.
    fn refocused(&self, phase: f64) -> Result<ComplexMatrix> {
        let decoded = self.decode(&self.transported, phase);
        conjugate(&self.u_prep.adjoint(), &decoded)
    }

    pub fn stages(&self, phase: f64, t_mq: RelaxationTime) -> Result<StageDensities> {
        let w1 = t_mq.decay(self.tau);
        let w2 = t_mq.decay(2.0 * self.tau);
        let rho_prep = self.transported.mix(w1, &self.rho_bar, 1.0 - w1)?;
        // ρ̄ commutes with the decoding rotation.
        let rho_evolved = self.decode(&self.transported, phase).mix(w1, &self.rho_bar, 1.0 - w1)?;
        let rho_final = self.refocused(phase)?.mix(w2, &self.rho_bar, 1.0 - w2)?;
        Ok(StageDensities {
            rho_prep,
            rho_evolved,
            rho_final,
        })
    }

    pub fn final_state(&self, phase: f64, t_mq: RelaxationTime) -> Result<ComplexMatrix> {
        let w2 = t_mq.decay(2.0 * self.tau);
        self.refocused(phase)?.mix(w2, &self.rho_bar, 1.0 - w2)
    }

    /// `G(φ) = Tr(Iz ρ_final(φ))`.
    pub fn signal(&self, phase: f64, t_mq: RelaxationTime) -> Result<f64> {
        longitudinal_magnetization(&self.sys, &self.final_state(phase, t_mq)?)
    }
}

/// `ρ(τ)` at the end of the preparation period.
pub fn propagate_preparation(sys: &SpinSystem, params: &ExperimentParams) -> Result<ComplexMatrix> {
    Experiment::new(sys, params)?.preparation(params.t_mq)
}

/// All three stage densities for `params.phase`.
pub fn propagate_full(sys: &SpinSystem, params: &ExperimentParams) -> Result<StageDensities> {
    Experiment::new(sys, params)?.stages(params.phase, params.t_mq)
}

/// `Tr(Iz ρ)`; fails if the trace has an imaginary part above [`REAL_TOL`].
pub fn longitudinal_magnetization(sys: &SpinSystem, rho: &ComplexMatrix) -> Result<f64> {
    if rho.dim() != sys.dim() {
        return Err(Error::DimensionMismatch {
            left: sys.dim(),
            right: rho.dim(),
        });
    }
    // Iz is diagonal: Tr(Iz ρ) = Σ m_a ρ_aa.
    let t: C64 = sys
        .iz_diagonal()
        .iter()
        .enumerate()
        .map(|(a, &m)| rho[(a, a)] * m)
        .sum();
    if t.im.abs() > REAL_TOL {
        return Err(Error::ImaginaryResidue {
            what: "longitudinal magnetization",
            residue: t.im,
        });
    }
    Ok(t.re)
}

/// How far a matrix is from being a density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Physicality {
    /// `|Tr ρ − 1|`.
    pub trace_error: f64,
    /// `max |ρ_ij − conj(ρ_ji)|`.
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
}

impl Physicality {
    pub fn of(rho: &ComplexMatrix) -> Result<Self> {
        let trace_error = (rho.trace() - C64::new(1.0, 0.0)).norm();
        let hermiticity_defect = rho.hermiticity_defect().0;
        let eig = hermitian_eigendecomposition(rho)?;
        Ok(Self {
            trace_error,
            hermiticity_defect,
            min_eigenvalue: eig.values[0],
        })
    }

    pub fn is_physical(&self, tol: f64, psd_floor: f64) -> bool {
        self.trace_error <= tol && self.hermiticity_defect <= tol && self.min_eigenvalue >= -psd_floor
    }
}

/// `‖U†U − I‖_max` of the preparation and decoding propagators at `phase`.
pub fn propagator_unitarity(exp: &Experiment, phase: f64) -> f64 {
    unitarity_defect(exp.preparation_propagator()).max(unitarity_defect(&exp.decoding_propagator(phase)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::build_iz;
    use std::f64::consts::PI;

    fn pair_params(beta: f64, d_tau: f64, ratio: f64) -> ExperimentParams {
        ExperimentParams::from_dimensionless(1.0, d_tau, ratio, beta).unwrap()
    }

    #[test]
    fn zero_tau_prepares_rho_eq() {
        let sys = SpinSystem::pair();
        let p = ExperimentParams::new(2.0, 0.0, RelaxationTime::Finite(1.0), 3.0).unwrap();
        let rho = propagate_preparation(&sys, &p).unwrap();
        assert!(rho.max_abs_diff(&build_rho_eq(&sys, 3.0)).unwrap() < 1e-15);
    }

    #[test]
    fn infinite_relaxation_gives_printed_matrix() {
        let (beta, d_tau) = (2.0, 0.9);
        let rho = propagate_preparation(&SpinSystem::pair(), &pair_params(beta, d_tau, 0.0)).unwrap();
        let z = 4.0 * (beta / 2.0).cosh().powi(2);
        let corner = d_tau.sin() * beta.sinh() / z;
        assert!((rho[(0, 3)] - C64::new(0.0, -corner)).norm() < 1e-13);
        assert!((rho[(3, 0)] - C64::new(0.0, corner)).norm() < 1e-13);
    }

    #[test]
    fn full_relaxation_reaches_rho_bar() {
        let sys = SpinSystem::pair();
        let p = pair_params(6.0, 1.0, 800.0);
        let rho = propagate_preparation(&sys, &p).unwrap();
        assert!(rho.max_abs_diff(&build_rho_bar(&sys)).unwrap() < 1e-15);
    }

    #[test]
    fn mixing_undoes_preparation_without_decoding() {
        let sys = SpinSystem::chain(3).unwrap();
        let p = ExperimentParams::new(1.5, 0.8, RelaxationTime::Infinite, 2.0).unwrap();
        let st = propagate_full(&sys, &p).unwrap();
        assert!(st.rho_final.max_abs_diff(&build_rho_eq(&sys, 2.0)).unwrap() < 1e-13);
    }

    #[test]
    fn zero_tau_is_phase_independent() {
        let sys = SpinSystem::pair();
        for phase in [0.0, 0.4, 2.0, -1.1] {
            let p = ExperimentParams::new(1.0, 0.0, RelaxationTime::Finite(0.3), 6.0)
                .unwrap()
                .with_phase(phase);
            let st = propagate_full(&sys, &p).unwrap();
            assert!(st.rho_final.max_abs_diff(&build_rho_eq(&sys, 6.0)).unwrap() < 1e-15);
            let g = longitudinal_magnetization(&sys, &st.rho_final).unwrap();
            assert!((g - 3f64.tanh()).abs() < 1e-14);
        }
    }

    #[test]
    fn signal_is_cos_two_phi_at_nine_half_pi() {
        let sys = SpinSystem::pair();
        let exp = Experiment::new(&sys, &pair_params(6.0, 9.0 * PI / 2.0, 0.0)).unwrap();
        for k in 0..12 {
            let phase = 2.0 * PI * k as f64 / 12.0;
            let g = exp.signal(phase, RelaxationTime::Infinite).unwrap();
            let expected = 3f64.tanh() * (2.0 * phase).cos();
            assert!((g - expected).abs() < 1e-12, "phase {phase}: {g} vs {expected}");
        }
        assert!((3f64.tanh() - 0.99505).abs() < 1e-5);
    }

    #[test]
    fn magnetization_of_reference_states() {
        let sys = SpinSystem::pair();
        assert_eq!(longitudinal_magnetization(&sys, &build_rho_bar(&sys)).unwrap(), 0.0);
        let beta = 1.3;
        let m = longitudinal_magnetization(&sys, &build_rho_eq(&sys, beta)).unwrap();
        assert!((m - (beta / 2.0).tanh()).abs() < 1e-15);
    }

    #[test]
    fn magnetization_rejects_complex_trace() {
        let sys = SpinSystem::pair();
        let mut rho = build_rho_bar(&sys);
        rho[(0, 0)] += C64::new(0.0, 1e-6);
        assert!(matches!(
            longitudinal_magnetization(&sys, &rho),
            Err(Error::ImaginaryResidue { .. })
        ));
        let wrong = ComplexMatrix::identity(8);
        assert!(longitudinal_magnetization(&sys, &wrong).is_err());
    }

    #[test]
    fn relaxation_time_parsing() {
        assert_eq!("inf".parse::<RelaxationTime>().unwrap(), RelaxationTime::Infinite);
        assert_eq!(" 0.5 ".parse::<RelaxationTime>().unwrap(), RelaxationTime::Finite(0.5));
        assert!("-1".parse::<RelaxationTime>().is_err());
        assert!("0".parse::<RelaxationTime>().is_err());
        assert!("infinity".parse::<RelaxationTime>().is_err());
        assert_eq!(RelaxationTime::Infinite.to_string(), "inf");
        assert_eq!(RelaxationTime::Infinite.decay(1e300), 1.0);
    }

    #[test]
    fn regime_flag() {
        let p = ExperimentParams::new(10.0, 0.1, RelaxationTime::Finite(1.0), 1.0).unwrap();
        assert!(p.regime_ok());
        let p = ExperimentParams::new(10.0, 0.1, RelaxationTime::Finite(0.5), 1.0).unwrap();
        assert!(!p.regime_ok());
        let p = ExperimentParams::new(10.0, 0.1, RelaxationTime::Infinite, 1.0).unwrap();
        assert!(p.regime_ok());
    }

    #[test]
    fn invalid_params() {
        assert!(ExperimentParams::new(0.0, 1.0, RelaxationTime::Infinite, 1.0).is_err());
        assert!(ExperimentParams::new(1.0, -1.0, RelaxationTime::Infinite, 1.0).is_err());
        assert!(ExperimentParams::new(1.0, 1.0, RelaxationTime::Finite(0.0), 1.0).is_err());
        assert!(ExperimentParams::new(1.0, 1.0, RelaxationTime::Infinite, f64::NAN).is_err());
        assert!(RelaxationTime::from_ratio(1.0, -0.1).is_err());
    }

    #[test]
    fn stage_physicality() {
        let sys = SpinSystem::pair();
        let p = pair_params(6.0, 1.0, 0.4).with_phase(0.7);
        let st = propagate_full(&sys, &p).unwrap();
        for rho in [&st.rho_prep, &st.rho_evolved, &st.rho_final] {
            let phys = Physicality::of(rho).unwrap();
            assert!(phys.is_physical(1e-12, 1e-10), "{phys:?}");
        }
        let iz = build_iz(&sys);
        let g = crate::linalg::trace_product(&iz, &st.rho_final).unwrap();
        assert!((g.re - longitudinal_magnetization(&sys, &st.rho_final).unwrap()).abs() < 1e-15);
    }
}
