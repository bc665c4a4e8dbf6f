//! Physical constants, experimental parameters and derived coupling quantities.
//!
//! Unit conventions, applied everywhere in this crate:
//!
//! * all rates and detunings (`gamma`, `kappa`, `delta_*`, `g`, `eta`) are
//!   angular frequencies in rad/s;
//! * the free spectral range `fsr` is an ordinary frequency in Hz and is
//!   converted by an explicit factor 2π wherever it enters a rate formula;
//! * lengths are in meters, temperatures in Kelvin, energies in Joules.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Planck constant (J·s).
pub const PLANCK: f64 = 6.626_070_15e-34;

pub const TAU: f64 = std::f64::consts::TAU;
pub const PI: f64 = std::f64::consts::PI;

/// Relative tolerance for the finesse/kappa/fsr consistency check.
const TRIO_TOL: f64 = 1e-6;

/// Cavity topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Linear,
    Ring,
}

impl std::fmt::Display for Geometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Geometry::Linear => write!(f, "linear"),
            Geometry::Ring => write!(f, "ring"),
        }
    }
}

/// Experimental constants of one atom-cavity configuration.
///
/// `finesse`, `kappa` and `fsr` are linked by `finesse = π·(2π·fsr)/kappa`;
/// [`PhysParams::resolve_trio`] fills in a missing member and rejects an
/// inconsistent over-determined triple.
#[derive(Debug, Clone)]
pub struct PhysParams {
    /// Atomic linewidth Γ (rad/s).
    pub gamma: f64,
    /// Cavity field decay κ (rad/s).
    pub kappa: f64,
    /// Free spectral range (Hz).
    pub fsr: f64,
    /// Finesse, `π·(2π·fsr)/kappa`.
    pub finesse: f64,
    /// Gaussian mode waist (m).
    pub waist: f64,
    /// Atomic transition wavelength (m).
    pub lambda_a: f64,
    /// Lattice wavelength (m); the lattice period is `lambda_lat/2`.
    pub lambda_lat: f64,
    /// Total atom number N.
    pub n_atoms: f64,
    /// Number of lattice sites N_s.
    pub n_sites: usize,
    /// Intensity reflectivity of each cavity mirror.
    pub r_mir: f64,
    /// Extra per-pass amplitude loss factor, 1 = lossless.
    pub r_ls: f64,
    /// Incident field amplitude; sets the pump rate η.
    pub alpha_in: f64,
    /// Cloud temperature (K).
    pub temp: f64,
    /// Lattice depth V₀ (J).
    pub v0: f64,
    pub geometry: Geometry,
    /// Optional override of the atom-field coupling g (rad/s). When absent,
    /// g is derived from Γ, fsr and the mode geometry.
    pub g_override: Option<f64>,
    /// Drive Rabi frequency Ω (rad/s) for the saturated-polarizability option.
    pub rabi: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        PhysParams {
            gamma: TAU * 7.4e3,
            kappa: TAU * 3.4e6,
            fsr: 7.4e9,
            finesse: 0.0, // resolved from kappa and fsr
            waist: 70e-6,
            lambda_a: 689e-9,
            lambda_lat: 689e-9,
            n_atoms: 2e5,
            n_sites: 301,
            r_mir: 0.998,
            r_ls: 1.0,
            alpha_in: 1.0,
            temp: 0.0,
            v0: 0.0,
            geometry: Geometry::Linear,
            g_override: None,
            rabi: 0.0,
        }
    }
    // finesse = 0.0 above means "derive me"; see resolve_trio
}

impl PhysParams {
    /// Fill in the missing member of (kappa, fsr, finesse) and check
    /// consistency when all three are supplied. Zero or negative entries are
    /// treated as missing.
    pub fn resolve_trio(&mut self) -> Result<()> {
        let have = |x: f64| x > 0.0;
        match (have(self.kappa), have(self.fsr), have(self.finesse)) {
            (true, true, true) => {
                let f_expect = PI * (TAU * self.fsr) / self.kappa;
                let rel = (self.finesse - f_expect).abs() / f_expect;
                if rel > TRIO_TOL {
                    return Err(Error::Config(format!(
                        "kappa, fsr, finesse over-determined and inconsistent: \
                         finesse = {} but pi*(2pi*fsr)/kappa = {} ({:.3e} relative)",
                        self.finesse, f_expect, rel
                    )));
                }
            }
            (true, true, false) => self.finesse = PI * (TAU * self.fsr) / self.kappa,
            (true, false, true) => self.fsr = self.finesse * self.kappa / (PI * TAU),
            (false, true, true) => self.kappa = PI * (TAU * self.fsr) / self.finesse,
            _ => {
                return Err(Error::Config(
                    "need at least two of kappa, fsr, finesse".into(),
                ))
            }
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if !(self.gamma > 0.0) {
            return bad("gamma must be > 0");
        }
        if !(self.kappa > 0.0) {
            return bad("kappa must be > 0");
        }
        if !(self.fsr > 0.0) {
            return bad("fsr must be > 0");
        }
        if !(self.waist > 0.0) {
            return bad("waist must be > 0");
        }
        if self.n_sites < 1 {
            return bad("n_sites must be >= 1");
        }
        if self.n_atoms < 0.0 {
            return bad("n_atoms must be >= 0");
        }
        if !(0.0..=1.0).contains(&self.r_mir) {
            return bad("r_mir must lie in [0, 1]");
        }
        if !(self.r_ls > 0.0 && self.r_ls <= 1.0) {
            return bad("r_ls must lie in (0, 1]");
        }
        if !(self.lambda_a > 0.0 && self.lambda_lat > 0.0) {
            return bad("wavelengths must be > 0");
        }
        Ok(())
    }

    /// Cavity length from the free spectral range: c/(2·fsr) for a linear
    /// cavity, round-trip length c/fsr for a ring.
    pub fn cavity_length(&self) -> f64 {
        match self.geometry {
            Geometry::Linear => SPEED_OF_LIGHT / (2.0 * self.fsr),
            Geometry::Ring => SPEED_OF_LIGHT / self.fsr,
        }
    }

    /// Lattice laser angular frequency 2πc/λ_lat.
    pub fn omega_lat(&self) -> f64 {
        TAU * SPEED_OF_LIGHT / self.lambda_lat
    }
}

/// Quantities derived from [`PhysParams`]; all of them are plain functions of
/// the inputs. A few resolved inputs (Γ, κ, fsr, N, N_s) are carried along so
/// downstream operations need only this struct.
#[derive(Debug, Clone, Copy)]
pub struct DerivedParams {
    /// Atom-field coupling g (rad/s), half the one-photon Rabi frequency.
    pub g: f64,
    /// Single-atom cooperativity Υ = 4g²/(κΓ).
    pub upsilon: f64,
    /// Resonant single-photon light shift: 0 on resonance.
    pub u0: f64,
    /// Resonant single-photon scattering rate γ₀ = 2g²/Γ (rad/s).
    pub gamma0: f64,
    /// Resonant single-atom reflection coefficient β₀ = −i·πΥ/F.
    pub beta0: C64,
    /// Atoms per lattice layer N₁ = N/N_s.
    pub n1: f64,
    /// Resonant optical density of the cloud, N·|β₀| = πΥ_N/F.
    pub od: f64,
    /// Pump rate η = α_in·sqrt(κ·2π·fsr) (rad/s).
    pub eta: f64,
    /// Thermal layer width z̄ (m).
    pub zbar: f64,
    /// Probe wavenumber at the atomic transition, 2π/λ_a (1/m).
    pub k: f64,
    // resolved inputs carried for downstream use
    pub gamma: f64,
    pub kappa: f64,
    pub fsr: f64,
    pub finesse: f64,
    pub n_atoms: f64,
    pub n_sites: usize,
}

impl DerivedParams {
    /// Thermal width in phase units, k·z̄.
    pub fn kzbar(&self) -> f64 {
        self.k * self.zbar
    }

    /// Resonant per-atom reflection magnitude used by the cavity transfer
    /// matrix model, fixed by requiring that the TMM reproduce the open-Dicke
    /// spectra at low optical density: g²/(2Γ·fsr) for a linear cavity,
    /// 2g²/(Γ·fsr) for a ring (single lattice pass per round trip, no
    /// standing-wave enhancement).
    pub fn zeta_tmm(&self, geometry: Geometry) -> f64 {
        match geometry {
            Geometry::Linear => self.g * self.g / (2.0 * self.gamma * self.fsr),
            Geometry::Ring => 2.0 * self.g * self.g / (self.gamma * self.fsr),
        }
    }
}

/// Compute all derived coupling quantities.
pub fn derive(p: &PhysParams) -> Result<DerivedParams> {
    p.validate()?;
    let k = TAU / p.lambda_a;
    let k2w2 = k * k * p.waist * p.waist;
    if !(k2w2 > 0.0) {
        return Err(Error::Degenerate("k^2 w^2 = 0: invalid mode geometry".into()));
    }
    let dfsr_ang = TAU * p.fsr;
    let g = match p.g_override {
        Some(g) => g,
        None => 0.5 * (6.0 * p.gamma * dfsr_ang / k2w2).sqrt(),
    };
    let upsilon = 4.0 * g * g / (p.kappa * p.gamma);
    let finesse = if p.finesse > 0.0 {
        p.finesse
    } else {
        PI * dfsr_ang / p.kappa
    };
    // beta0 = -i*pi*Upsilon/F = -i*4g^2/(dfsr_ang*Gamma); equals -i*6/(k^2 w^2)
    // when g is not overridden.
    let beta0_mag = PI * upsilon / finesse;
    let beta0 = C64::new(0.0, beta0_mag);
    let n1 = p.n_atoms / p.n_sites as f64;
    let od = p.n_atoms * beta0_mag;
    let eta = p.alpha_in * (p.kappa * dfsr_ang).sqrt();
    let zbar = if p.v0 > 0.0 {
        (2.0 * BOLTZMANN * p.temp / p.v0).sqrt() / k
    } else if p.temp == 0.0 {
        0.0
    } else {
        return Err(Error::Degenerate(
            "v0 = 0 with temp > 0: thermal layer width undefined".into(),
        ));
    };
    Ok(DerivedParams {
        g,
        upsilon,
        u0: 0.0,
        gamma0: 2.0 * g * g / p.gamma,
        beta0,
        n1,
        od,
        eta,
        zbar,
        k,
        gamma: p.gamma,
        kappa: p.kappa,
        fsr: p.fsr,
        finesse,
        n_atoms: p.n_atoms,
        n_sites: p.n_sites,
    })
}

/// Single-photon light shift and scattering rate, U_γ = g²/(Δ_a + iΓ/2).
///
/// The real part is the light shift U₀, minus the imaginary part the
/// scattering rate γ₀; finite for all real Δ_a since Γ > 0.
pub fn u_gamma(d: &DerivedParams, delta_a: f64) -> C64 {
    C64::new(d.g * d.g, 0.0) / C64::new(delta_a, 0.5 * d.gamma)
}

/// Complex atomic polarizability in units of 6π/k³, optionally saturated by a
/// drive of Rabi frequency Ω:
/// `(i − 2Δ_a/Γ)/(1 + 4Δ_a²/Γ² + 2Ω²/Γ²)`.
///
/// At Ω = 0 this reduces to −1/(i + 2Δ_a/Γ).
pub fn polarizability(delta_a: f64, rabi: f64, gamma: f64) -> C64 {
    let x = 2.0 * delta_a / gamma;
    let s = 2.0 * rabi * rabi / (gamma * gamma);
    C64::new(-x, 1.0) / (1.0 + x * x + s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apparatus() -> PhysParams {
        let mut p = PhysParams {
            fsr: 1.27e9,
            n_atoms: 2e5,
            n_sites: 300,
            finesse: 0.0,
            geometry: Geometry::Ring,
            ..PhysParams::default()
        };
        p.resolve_trio().unwrap();
        p
    }

    #[test]
    fn od_matches_apparatus_anchor() {
        let d = derive(&apparatus()).unwrap();
        // 6N/(k^2 w^2) evaluates to about 3 for the apparatus numbers
        assert!((d.od - 3.0).abs() / 3.0 < 0.05, "od = {}", d.od);
    }

    #[test]
    fn od_and_beta0_identities() {
        let d = derive(&apparatus()).unwrap();
        let k2w2 = d.k * d.k * 70e-6 * 70e-6;
        let direct = 6.0 * 2e5 / k2w2;
        assert!((d.od - direct).abs() / direct < 1e-12);
        // |beta0| = pi*Upsilon/F
        assert!((d.beta0.norm() - PI * d.upsilon / d.finesse).abs() <= 1e-12 * d.beta0.norm());
        // od = pi*Upsilon_N/F
        assert!((d.od - PI * d.n_atoms * d.upsilon / d.finesse).abs() <= 1e-12 * d.od);
    }

    #[test]
    fn layer_reflectivity_scalar_oracle() {
        // N1*|beta0| against an independent evaluation of 6/(k^2 w^2) * N/N_s
        let d = derive(&apparatus()).unwrap();
        let k = TAU / 689e-9;
        let oracle = 6.0 / (k * k * 70e-6 * 70e-6) * (2e5 / 300.0);
        let got = d.n1 * d.beta0.norm();
        assert!((got - oracle).abs() / oracle < 1e-12);
        assert!((got - 0.0098).abs() < 2e-4, "N1*beta0 = {}", got);
    }

    #[test]
    fn empty_cloud() {
        let mut p = apparatus();
        p.n_atoms = 0.0;
        let d = derive(&p).unwrap();
        assert_eq!(d.od, 0.0);
        let eta_full = derive(&apparatus()).unwrap().eta;
        assert_eq!(d.eta, eta_full);
    }

    #[test]
    fn cooperativity_identity() {
        for fsr in [1e8, 1.27e9, 7.4e9, 1.07e10] {
            let mut p = PhysParams {
                fsr,
                finesse: 0.0,
                ..PhysParams::default()
            };
            p.resolve_trio().unwrap();
            let d = derive(&p).unwrap();
            let lhs = 4.0 * d.g * d.g / (p.kappa * p.gamma);
            assert!((lhs - d.upsilon).abs() <= 1e-12 * d.upsilon);
        }
    }

    #[test]
    fn trio_resolution_and_rejection() {
        // derive kappa from finesse and fsr
        let mut p = PhysParams {
            kappa: 0.0,
            fsr: 7.4e9,
            finesse: 1500.0,
            ..PhysParams::default()
        };
        p.resolve_trio().unwrap();
        assert!((p.finesse - PI * TAU * p.fsr / p.kappa).abs() / p.finesse < 1e-12);

        // inconsistent triple is rejected, not silently re-derived
        let mut bad = PhysParams {
            kappa: TAU * 3.4e6,
            fsr: 7.4e9,
            finesse: 1500.0,
            ..PhysParams::default()
        };
        assert!(matches!(bad.resolve_trio(), Err(Error::Config(_))));
    }

    #[test]
    fn zbar_degenerate_input() {
        let mut p = apparatus();
        p.temp = 1e-6;
        p.v0 = 0.0;
        assert!(matches!(derive(&p), Err(Error::Degenerate(_))));
        p.v0 = PLANCK * 1e5;
        let d = derive(&p).unwrap();
        let oracle = (2.0 * BOLTZMANN * 1e-6 / (PLANCK * 1e5)).sqrt() / (TAU / 689e-9);
        assert!((d.zbar - oracle).abs() / oracle < 1e-12);
    }

    #[test]
    fn u_gamma_on_resonance_and_far_detuned() {
        let d = derive(&apparatus()).unwrap();
        let u = u_gamma(&d, 0.0);
        assert!(u.re.abs() < 1e-12 * u.norm());
        assert!((u.im + 2.0 * d.g * d.g / d.gamma).abs() < 1e-9 * u.norm());
        let far = u_gamma(&d, 1e12);
        assert!(far.norm() < 1e-7 * u.norm());
    }

    #[test]
    fn u_gamma_complex_arithmetic_oracle() {
        let d = derive(&apparatus()).unwrap();
        // Delta_a = Gamma/2 -> U = g^2 (1 - i)/Gamma
        let u = u_gamma(&d, 0.5 * d.gamma);
        let oracle = C64::new(d.g * d.g, 0.0) / C64::new(0.5 * d.gamma, 0.5 * d.gamma);
        assert!((u - oracle).norm() < 1e-14 * oracle.norm());
        let closed = C64::new(1.0, -1.0) * d.g * d.g / d.gamma;
        assert!((u - closed).norm() < 1e-12 * closed.norm());
    }

    #[test]
    fn u_gamma_defining_identity_over_detuning_range() {
        let d = derive(&apparatus()).unwrap();
        let g2 = d.g * d.g;
        for i in -10..=10 {
            let da = i as f64 * d.gamma;
            let back = u_gamma(&d, da) * C64::new(da, 0.5 * d.gamma);
            assert!((back - g2).norm() <= 1e-12 * g2);
        }
    }

    #[test]
    fn polarizability_trivial_points() {
        let gamma = TAU * 7.4e3;
        let p0 = polarizability(0.0, 0.0, gamma);
        assert!((p0 - C64::new(0.0, 1.0)).norm() < 1e-15);
        // bleached medium
        let bleached = polarizability(0.0, 1e6 * gamma, gamma);
        assert!(bleached.norm() < 1e-9);
        // linear limit equals -1/(i + 2 Delta/Gamma)
        for i in -8..=8 {
            let da = 0.7 * i as f64 * gamma;
            let lin = -C64::new(1.0, 0.0) / C64::new(2.0 * da / gamma, 1.0);
            assert!((polarizability(da, 0.0, gamma) - lin).norm() < 1e-14);
        }
    }

    #[test]
    fn polarizability_saturated_scalar_oracle() {
        // Delta_a = Gamma, Omega = Gamma -> (i - 2)/7
        let gamma = 1.7;
        let got = polarizability(gamma, gamma, gamma);
        let oracle = C64::new(-2.0, 1.0) / 7.0;
        assert!((got - oracle).norm() < 1e-15);
    }

    #[test]
    fn ring_layer_coupling_reproduces_light_shift() {
        // fsr * zeta_ring * polarizability(delta) = -U_gamma exactly: the
        // per-layer reflection coefficient and the single-photon light shift
        // are the same physics in two normalizations
        let d = derive(&apparatus()).unwrap();
        let zeta = d.zeta_tmm(Geometry::Ring);
        for i in -12..=12 {
            let da = 0.8 * i as f64 * d.gamma;
            let lhs = d.fsr * zeta * polarizability(da, 0.0, d.gamma);
            let rhs = -u_gamma(&d, da);
            assert!(
                (lhs - rhs).norm() <= 1e-12 * rhs.norm(),
                "delta_a = {da}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn polarizability_sign_structure() {
        let gamma = TAU * 7.4e3;
        for i in 1..=20 {
            let da = 0.3 * i as f64 * gamma;
            assert!(polarizability(da, 0.0, gamma).re < 0.0);
            assert!(polarizability(-da, 0.0, gamma).re > 0.0);
            assert!(polarizability(da, 0.0, gamma).im > 0.0);
            assert!(polarizability(-da, 0.0, gamma).im > 0.0);
        }
    }
}
