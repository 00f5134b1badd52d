//! Spin-1/2 operators, Hamiltonians and thermal states for a dipolar pair or a
//! nearest-neighbour chain.
//!
//! Basis states are indexed by bit strings: site 0 is the most significant
//! bit (leftmost tensor factor), and a `0` bit is spin up with `Iz = +1/2`.
//! Index 0 is therefore `|up…up⟩`, and for a pair the order is
//! `(uu, ud, du, dd)`.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

pub const MAX_SPINS: usize = 12;

/// A line of `n_spins` spin-1/2 nuclei; two spins make the dipolar pair.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinSystem {
    n_spins: usize,
    iz: Vec<f64>,
}

impl SpinSystem {
    pub fn new(n_spins: usize) -> Result<Self> {
        if n_spins == 0 || n_spins > MAX_SPINS {
            return Err(Error::InvalidSystem(format!(
                "number of spins must be in 1..={MAX_SPINS}, got {n_spins}"
            )));
        }
        let dim = 1usize << n_spins;
        let iz = (0..dim)
            .map(|s| n_spins as f64 / 2.0 - (s as u32).count_ones() as f64)
            .collect();
        Ok(Self { n_spins, iz })
    }

    pub fn pair() -> Self {
        Self::new(2).expect("two spins")
    }

    /// A chain of at least two spins.
    pub fn chain(n_spins: usize) -> Result<Self> {
        if n_spins < 2 {
            return Err(Error::InvalidSystem(format!(
                "a chain needs at least two spins, got {n_spins}"
            )));
        }
        Self::new(n_spins)
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.iz.len()
    }

    pub fn is_pair(&self) -> bool {
        self.n_spins == 2
    }

    /// Eigenvalues of total `Iz` along the computational basis.
    pub fn iz_diagonal(&self) -> &[f64] {
        &self.iz
    }

    /// Highest coherence order the Hilbert space can carry.
    pub fn max_coherence_order(&self) -> usize {
        self.n_spins
    }

    pub fn describe(&self) -> String {
        if self.is_pair() {
            "pair".to_string()
        } else {
            format!("chain(N={})", self.n_spins)
        }
    }

    fn site_mask(&self, site: usize) -> usize {
        assert!(site < self.n_spins, "site {site} out of range");
        1 << (self.n_spins - 1 - site)
    }

    /// `Iz` of one site.
    pub fn site_iz(&self, site: usize) -> ComplexMatrix {
        let mask = self.site_mask(site);
        let diag: Vec<f64> = (0..self.dim())
            .map(|s| if s & mask == 0 { 0.5 } else { -0.5 })
            .collect();
        ComplexMatrix::from_real_diagonal(&diag)
    }

    /// Raising operator `I⁺` of one site.
    pub fn site_raise(&self, site: usize) -> ComplexMatrix {
        let mask = self.site_mask(site);
        let mut m = ComplexMatrix::zeros(self.dim());
        for s in (0..self.dim()).filter(|s| s & mask != 0) {
            m[(s & !mask, s)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Lowering operator `I⁻` of one site.
    pub fn site_lower(&self, site: usize) -> ComplexMatrix {
        self.site_raise(site).adjoint()
    }
}

/// Dipolar coupling constants of the bonds of a chain, rad/s.
#[derive(Clone, Debug, PartialEq)]
pub enum Couplings<'a> {
    Uniform(f64),
    PerBond(&'a [f64]),
}

impl From<f64> for Couplings<'_> {
    fn from(d: f64) -> Self {
        Couplings::Uniform(d)
    }
}

impl<'a> From<&'a [f64]> for Couplings<'a> {
    fn from(d: &'a [f64]) -> Self {
        Couplings::PerBond(d)
    }
}

impl Couplings<'_> {
    /// Resolves to a single constant. Per-bond lists must name every bond and
    /// be uniform, since the chain closed forms assume a single `D`.
    pub fn uniform(&self, sys: &SpinSystem) -> Result<f64> {
        let d = match *self {
            Couplings::Uniform(d) => d,
            Couplings::PerBond(bonds) => {
                let expected = sys.n_spins().saturating_sub(1);
                if bonds.len() != expected {
                    return Err(Error::InvalidParameter(format!(
                        "{} bond couplings given for {expected} bonds",
                        bonds.len()
                    )));
                }
                let Some(&first) = bonds.first() else {
                    return Ok(0.0);
                };
                if bonds.iter().any(|&b| b != first) {
                    return Err(Error::NonUniformCoupling(bonds.to_vec()));
                }
                first
            }
        };
        if !d.is_finite() {
            return Err(Error::InvalidParameter(format!("coupling must be finite, got {d}")));
        }
        Ok(d)
    }
}

/// Total `Iz = Σ_i Iz_i`.
pub fn build_iz(sys: &SpinSystem) -> ComplexMatrix {
    ComplexMatrix::from_real_diagonal(sys.iz_diagonal())
}

/// Double-quantum Hamiltonian `−(D/2) Σ_bonds (I_i⁺ I_{i+1}⁺ + I_i⁻ I_{i+1}⁻)`.
///
/// Built directly on basis indices: the bond term flips two adjacent down
/// spins up (and back), so each nonzero entry is `−D/2` between states that
/// differ only in those two bits.
pub fn build_h_mq<'a>(sys: &SpinSystem, couplings: impl Into<Couplings<'a>>) -> Result<ComplexMatrix> {
    let d = couplings.into().uniform(sys)?;
    let n = sys.n_spins();
    let mut h = ComplexMatrix::zeros(sys.dim());
    let amp = C64::new(-d / 2.0, 0.0);
    for bond in 0..n.saturating_sub(1) {
        let both = sys.site_mask(bond) | sys.site_mask(bond + 1);
        for s in (0..sys.dim()).filter(|s| s & both == both) {
            let raised = s & !both;
            h[(raised, s)] += amp;
            h[(s, raised)] += amp;
        }
    }
    Ok(h)
}

/// Secular dipolar Hamiltonian `D(3 Iz1 Iz2 − I1·I2)` of a spin pair.
///
/// Only used as a reference; the experiment evolves under [`build_h_mq`].
pub fn build_h_dz(sys: &SpinSystem, d: f64) -> Result<ComplexMatrix> {
    if !sys.is_pair() {
        return Err(Error::InvalidSystem(format!(
            "the secular dipolar Hamiltonian is defined for a pair, got {} spins",
            sys.n_spins()
        )));
    }
    let zz = sys.site_iz(0).matmul(&sys.site_iz(1))?;
    let flip_flop = sys
        .site_raise(0)
        .matmul(&sys.site_lower(1))?
        .add(&sys.site_lower(0).matmul(&sys.site_raise(1))?)?;
    // 3 IzIz − (IzIz + (I+I− + I−I+)/2)
    zz.mix(2.0 * d, &flip_flop, -0.5 * d)
}

/// Thermal state `exp(β Iz) / Tr exp(β Iz)`.
pub fn build_rho_eq(sys: &SpinSystem, beta: f64) -> ComplexMatrix {
    // Shift by the largest exponent so large β does not overflow.
    let top = sys.n_spins() as f64 / 2.0 * beta.abs();
    let weights: Vec<f64> = sys.iz_diagonal().iter().map(|&m| (beta * m - top).exp()).collect();
    let z: f64 = weights.iter().sum();
    let diag: Vec<f64> = weights.iter().map(|w| w / z).collect();
    ComplexMatrix::from_real_diagonal(&diag)
}

/// Rotating-frame equilibrium `I / 2^N` reached by full relaxation.
pub fn build_rho_bar(sys: &SpinSystem) -> ComplexMatrix {
    ComplexMatrix::identity(sys.dim()).scale(1.0 / sys.dim() as f64)
}

/// `Tr(Iz ρ_eq) = (N/2)·tanh(β/2)`, the signal available at `τ = 0`.
pub fn equilibrium_polarization(sys: &SpinSystem, beta: f64) -> f64 {
    sys.n_spins() as f64 / 2.0 * (beta / 2.0).tanh()
}

/// Source of the inverse-temperature parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Thermal {
    /// Lattice temperature in kelvin.
    Temperature(f64),
    /// `β = ħω0/kT`, dimensionless.
    Beta(f64),
}

/// Larmor frequency, thermal state and dipolar coupling of a sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    /// `ω0`, rad/s.
    pub omega0: f64,
    pub thermal: Thermal,
    /// `D`, rad/s.
    pub coupling: f64,
}

impl PhysicalParams {
    pub fn new(omega0: f64, thermal: Thermal, coupling: f64) -> Result<Self> {
        let p = Self {
            omega0,
            thermal,
            coupling,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("omega0", self.omega0)?;
        positive("coupling D", self.coupling)?;
        match self.thermal {
            Thermal::Temperature(t) => positive("temperature", t),
            Thermal::Beta(b) => positive("beta", b),
        }
    }

    pub fn beta(&self) -> f64 {
        match self.thermal {
            Thermal::Beta(b) => b,
            Thermal::Temperature(t) => HBAR * self.omega0 / (BOLTZMANN * t),
        }
    }

    pub fn temperature(&self) -> f64 {
        match self.thermal {
            Thermal::Temperature(t) => t,
            Thermal::Beta(b) => HBAR * self.omega0 / (BOLTZMANN * b),
        }
    }
}
