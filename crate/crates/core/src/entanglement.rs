//! Two-spin entanglement after the preparation period: Wootters concurrence,
//! the temperature below which the pair is entangled, the link between the
//! concurrence and the double-quantum intensity, and the rms fluctuation of
//! the entanglement entropy.
//!
//! The two-qubit basis `{|00⟩, |01⟩, |10⟩, |11⟩}` is identified with the spin
//! basis `(uu, ud, du, dd)`.

use crate::dynamics::{propagate_preparation, ExperimentParams};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigendecomposition, hermitian_sqrt, ComplexMatrix, C64};
use crate::spin::{SpinSystem, BOLTZMANN, HBAR};

/// Eigenvalues of `√ρ ρ̃ √ρ` below this are rejected as unphysical.
pub const EIGEN_REJECT: f64 = 1e-8;

/// Eigenvalues of `√ρ ρ̃ √ρ` down to this are clamped to zero.
pub const EIGEN_CLAMP: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConcurrenceInputs {
    pub beta: f64,
    pub d_tau: f64,
    /// `τ/T_MQ`.
    pub relax_ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConcurrenceResult {
    pub concurrence: f64,
    /// Square roots of the eigenvalues of `ρρ̃`, descending.
    pub lambdas: [f64; 4],
    /// rms entanglement fluctuation `ΔE(C)`.
    pub delta_e: f64,
    pub inputs: Option<ConcurrenceInputs>,
}

/// `σ_y ⊗ σ_y` in the `(uu, ud, du, dd)` basis: real, with `−1` on the
/// corners and `+1` on the inner anti-diagonal.
fn sigma_yy() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4);
    m[(0, 3)] = C64::new(-1.0, 0.0);
    m[(3, 0)] = C64::new(-1.0, 0.0);
    m[(1, 2)] = C64::new(1.0, 0.0);
    m[(2, 1)] = C64::new(1.0, 0.0);
    m
}

fn require_two_qubits(rho: &ComplexMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            left: 4,
            right: rho.dim(),
        });
    }
    Ok(())
}

/// Spin-flipped state `ρ̃ = (σ_y ⊗ σ_y) ρ* (σ_y ⊗ σ_y)`.
pub fn spin_flip(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_two_qubits(rho)?;
    let yy = sigma_yy();
    yy.matmul(&rho.conj())?.matmul(&yy)
}

/// Wootters concurrence of a two-qubit density matrix.
///
/// The eigenvalues of `ρρ̃` are taken from the Hermitian matrix
/// `√ρ ρ̃ √ρ`, which is similar to `ρρ̃` and has the same spectrum.
pub fn concurrence_numeric(rho: &ComplexMatrix) -> Result<ConcurrenceResult> {
    require_two_qubits(rho)?;
    let root = hermitian_sqrt(rho)?;
    let flipped = spin_flip(rho)?;
    let r = root.matmul(&flipped)?.matmul(&root)?;
    // Symmetrise away round-off before the Hermitian solver checks it.
    let r = r.add(&r.adjoint())?.scale(0.5);
    let eig = hermitian_eigendecomposition(&r)?;

    let mut lambdas = [0.0; 4];
    for (slot, &w) in lambdas.iter_mut().zip(eig.values.iter().rev()) {
        if w < -EIGEN_REJECT {
            return Err(Error::NotPositive { eigenvalue: w });
        }
        *slot = if w < EIGEN_CLAMP { w.max(0.0) } else { w }.sqrt();
    }
    let concurrence = (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0);
    Ok(ConcurrenceResult {
        concurrence,
        lambdas,
        delta_e: fluctuation_unchecked(concurrence),
        inputs: None,
    })
}

/// Concurrence of the pair at the end of preparation, computed from the
/// propagated density matrix.
pub fn concurrence_at(params: &ExperimentParams) -> Result<ConcurrenceResult> {
    let rho = propagate_preparation(&SpinSystem::pair(), params)?;
    let mut result = concurrence_numeric(&rho)?;
    result.inputs = Some(ConcurrenceInputs {
        beta: params.beta,
        d_tau: params.d_tau(),
        relax_ratio: params.relax_ratio(),
    });
    Ok(result)
}

/// Closed-form concurrence of the prepared pair:
///
/// `C = max[0, e^{−x}(|sin Dτ| sinh β − 1)/(2cosh²(β/2)) − (1 − e^{−x})/2]`
/// with `x = τ/T_MQ`.
pub fn concurrence_closed_form(beta: f64, d_tau: f64, relax_ratio: f64) -> f64 {
    let w = (-relax_ratio).exp();
    let t = (beta / 2.0).tanh();
    // sinh β/(2cosh²(β/2)) = tanh(β/2) and 1/(2cosh²(β/2)) = (1 − tanh²(β/2))/2;
    // this form stays finite for large β.
    let bracket = w * (d_tau.sin().abs() * t - 0.5 * (1.0 - t * t)) - 0.5 * (1.0 - w);
    bracket.max(0.0)
}

/// `β` above which the prepared pair can be entangled, for `x = τ/T_MQ`.
/// `None` once `x ≥ ln 3`.
pub fn onset_beta(relax_ratio: f64) -> Option<f64> {
    let a = relax_ratio.exp() - 1.0;
    let s = (2.0 + a).sqrt();
    if !(s < 2.0) {
        return None;
    }
    Some((s / (2.0 - s)).ln())
}

/// Temperature (K) below which the prepared pair is entangled:
/// `T_E = ħω0 / (k ln(√(2+a)/(2 − √(2+a))))`, `a = e^{τ/T_MQ} − 1`.
pub fn onset_temperature(omega0: f64, relax_ratio: f64) -> Option<f64> {
    onset_beta(relax_ratio).map(|b| HBAR * omega0 / (BOLTZMANN * b))
}

/// Concurrence from the measured double-quantum intensity `J_2 + J_{−2}`:
///
/// `C = √(tanh(β/2)(J_2 + J_{−2})) − e^{−x}/(2cosh²(β/2)) − (1 − e^{−x})/2`,
/// clamped at zero like the closed form it reproduces.
pub fn concurrence_from_coherences(beta: f64, double_quantum: f64, relax_ratio: f64) -> Result<f64> {
    if !(double_quantum >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "double-quantum intensity must be non-negative, got {double_quantum}"
        )));
    }
    let w = (-relax_ratio).exp();
    let t = (beta / 2.0).tanh();
    let c = (t * double_quantum).sqrt() - 0.5 * w * (1.0 - t * t) - 0.5 * (1.0 - w);
    Ok(c.max(0.0))
}

/// rms fluctuation of the entanglement entropy, `ΔE = C log₂[(1 + √(1 − C²))/C]`.
///
/// Zero at both ends of `[0, 1]`.
pub fn entanglement_fluctuation(c: f64) -> Result<f64> {
    const TOL: f64 = 1e-12;
    if !(-TOL..=1.0 + TOL).contains(&c) {
        return Err(Error::InvalidParameter(format!("concurrence must lie in [0, 1], got {c}")));
    }
    Ok(fluctuation_unchecked(c.clamp(0.0, 1.0)))
}

fn fluctuation_unchecked(c: f64) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    c * ((1.0 + (1.0 - c * c).sqrt()) / c).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{build_rho_bar, build_rho_eq};
    use std::f64::consts::{LN_2, PI};

    fn pure(amps: [f64; 4]) -> ComplexMatrix {
        ComplexMatrix::from_fn(4, |i, j| C64::new(amps[i] * amps[j], 0.0))
    }

    #[test]
    fn flip_of_reference_states() {
        let mixed = build_rho_bar(&SpinSystem::pair());
        assert_eq!(spin_flip(&mixed).unwrap(), mixed);
        let up = pure([1.0, 0.0, 0.0, 0.0]);
        assert_eq!(spin_flip(&up).unwrap(), pure([0.0, 0.0, 0.0, 1.0]));
        assert!(spin_flip(&ComplexMatrix::identity(2)).is_err());
    }

    #[test]
    fn bell_and_mixed() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = concurrence_numeric(&pure([h, 0.0, 0.0, h])).unwrap();
        assert!((bell.concurrence - 1.0).abs() < 1e-12);
        assert!(bell.delta_e.abs() < 1e-6);
        let mixed = concurrence_numeric(&build_rho_bar(&SpinSystem::pair())).unwrap();
        assert_eq!(mixed.concurrence, 0.0);
        for l in mixed.lambdas {
            assert!((l - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn thermal_state_is_separable() {
        let r = concurrence_numeric(&build_rho_eq(&SpinSystem::pair(), 4.0)).unwrap();
        assert_eq!(r.concurrence, 0.0);
        assert!(r.lambdas.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn figure_edge_value() {
        let expected = (6f64.sinh() - 1.0) / (2.0 * 3f64.cosh().powi(2));
        let c = concurrence_closed_form(6.0, 9.0 * PI / 2.0, 0.0);
        assert!((c - expected).abs() < 1e-14);
        assert!((c - 0.99012).abs() < 1e-5);
        let p = ExperimentParams::from_dimensionless(1.0, 9.0 * PI / 2.0, 0.0, 6.0).unwrap();
        let numeric = concurrence_at(&p).unwrap();
        assert!((numeric.concurrence - expected).abs() < 1e-10);
        assert_eq!(numeric.inputs.unwrap().beta, 6.0);
    }

    #[test]
    fn closed_form_limits() {
        assert_eq!(concurrence_closed_form(6.0, 1.0, 50.0), 0.0);
        assert_eq!(concurrence_closed_form(6.0, 0.0, 0.0), 0.0);
        assert_eq!(concurrence_closed_form(2.0, PI, 0.0), 0.0);
        assert!(concurrence_closed_form(800.0, PI / 2.0, 0.0) <= 1.0);
    }

    #[test]
    fn onset_values() {
        let omega0 = 2.0 * PI * 5e8;
        let t0 = onset_temperature(omega0, 0.0).unwrap();
        assert!((t0 - 0.027).abs() < 5e-4, "{t0}");
        assert!(onset_temperature(omega0, 3f64.ln()).is_none());
        assert!(onset_temperature(omega0, 2.0).is_none());
        let t_half = onset_temperature(omega0, 0.5).unwrap();
        assert!(t_half < t0);
        // at x = 0 the threshold is sinh β = 1
        assert!((onset_beta(0.0).unwrap() - 1f64.asinh()).abs() < 1e-14);
    }

    #[test]
    fn coherence_relation_edge_cases() {
        assert_eq!(concurrence_from_coherences(3.0, 0.0, 0.0).unwrap(), 0.0);
        let faded = 0.9 * (-80f64).exp();
        assert_eq!(concurrence_from_coherences(3.0, faded, 40.0).unwrap(), 0.0);
        assert!(concurrence_from_coherences(3.0, -0.1, 0.0).is_err());
    }

    #[test]
    fn fluctuation_values() {
        assert_eq!(entanglement_fluctuation(0.0).unwrap(), 0.0);
        assert_eq!(entanglement_fluctuation(1.0).unwrap(), 0.0);
        let v = entanglement_fluctuation(0.6).unwrap();
        assert!((v - 0.6 * 3f64.ln() / LN_2).abs() < 1e-15);
        assert!((v - 0.95098).abs() < 1e-5);
        assert!(entanglement_fluctuation(1.1).is_err());
        assert!(entanglement_fluctuation(-0.01).is_err());
        assert_eq!(entanglement_fluctuation(1.0 + 1e-13).unwrap(), 0.0);
    }
}
