//! Atomic bunching parameters b₀ and b± for discrete, incommensurate, thermal
//! and population-weighted lattices.
//!
//! Direct summation over lattice sites is the normative implementation; the
//! closed Dirichlet-kernel forms are provided as cross-checks only (their
//! sign at a site phase of exactly π depends on the parity of the site
//! number, the direct sum does not).

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Geometry of the atomic stack.
#[derive(Debug, Clone)]
pub struct LatticeConfig {
    /// Number of lattice sites N_s.
    pub n_sites: usize,
    /// Phase advance per site, k·λ_lat/2 (rad).
    pub site_phase: f64,
    /// Global lattice offset k·z₀ (rad).
    pub z0_phase: f64,
    /// Thermal width k·z̄ (dimensionless).
    pub kzbar: f64,
    /// Per-site populations |c_j|²; `None` means uniform.
    pub weights: Option<Vec<f64>>,
}

impl LatticeConfig {
    pub fn uniform(n_sites: usize, site_phase: f64, z0_phase: f64) -> Self {
        LatticeConfig {
            n_sites,
            site_phase,
            z0_phase,
            kzbar: 0.0,
            weights: None,
        }
    }

    /// Centered site indices j = (1−N_s)/2, …, (N_s−1)/2.
    ///
    /// Half-integers for even N_s, integers for odd N_s.
    pub fn site_indices(&self) -> impl Iterator<Item = f64> + '_ {
        let half = (self.n_sites as f64 - 1.0) / 2.0;
        (0..self.n_sites).map(move |m| m as f64 - half)
    }

    /// Site phases k·z_j = j·site_phase + z0_phase.
    pub fn site_phases(&self) -> impl Iterator<Item = f64> + '_ {
        self.site_indices()
            .map(move |j| j * self.site_phase + self.z0_phase)
    }

    /// Check user-supplied weights against the total atom number.
    pub fn validate_weights(&self, n_total: f64) -> Result<()> {
        if let Some(w) = &self.weights {
            if w.len() != self.n_sites {
                return Err(Error::Config(format!(
                    "weights length {} != n_sites {}",
                    w.len(),
                    self.n_sites
                )));
            }
            if w.iter().any(|&x| x < 0.0) {
                return Err(Error::Config("negative site weight".into()));
            }
            let sum: f64 = w.iter().sum();
            if n_total > 0.0 && (sum - n_total).abs() > 1e-9 * n_total {
                return Err(Error::Config(format!(
                    "weights sum {sum} inconsistent with n_atoms {n_total}"
                )));
            }
        }
        Ok(())
    }
}

/// Bunching parameters of one atomic distribution. `b_minus` is always the
/// conjugate of `b_plus` and is not stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bunching {
    /// Linear-cavity bunching, mean of cos²(k·z_j) ∈ [0, 1].
    pub b0: f64,
    /// Ring-cavity bunching, mean of exp(+2i·k·z_j), |b₊| ≤ 1.
    pub b_plus: C64,
}

impl Bunching {
    pub fn b_minus(&self) -> C64 {
        self.b_plus.conj()
    }
}

/// Bunching of explicit atom positions (phases k·z_j).
pub fn bunching_discrete(positions: &[f64]) -> Result<Bunching> {
    if positions.is_empty() {
        return Err(Error::Degenerate("bunching of an empty position list".into()));
    }
    let n = positions.len() as f64;
    let mut b0 = 0.0;
    let mut bp = C64::new(0.0, 0.0);
    for &kz in positions {
        let c = kz.cos();
        b0 += c * c;
        bp += C64::from_polar(1.0, 2.0 * kz);
    }
    Ok(Bunching {
        b0: b0 / n,
        b_plus: bp / n,
    })
}

/// Bunching of a uniformly populated lattice, by direct summation.
pub fn bunching_lattice(cfg: &LatticeConfig) -> Bunching {
    let phases: Vec<f64> = cfg.site_phases().collect();
    bunching_discrete(&phases).expect("n_sites >= 1")
}

/// Closed Dirichlet-kernel forms of the lattice bunching parameters
/// (cross-check for [`bunching_lattice`]).
pub fn bunching_lattice_closed(cfg: &LatticeConfig) -> Bunching {
    let n = cfg.n_sites as f64;
    let kernel = dirichlet_ratio(cfg.site_phase, cfg.n_sites);
    let b0 = 0.5 + (2.0 * cfg.z0_phase).cos() * kernel / (2.0 * n);
    let b_plus = C64::from_polar(1.0, 2.0 * cfg.z0_phase) * (kernel / n);
    Bunching { b0, b_plus }
}

/// sin(N_s·φ)/sin(φ) with the correct N_s-parity limit at multiples of π.
fn dirichlet_ratio(phi: f64, n_sites: usize) -> f64 {
    let s = phi.sin();
    if s.abs() > 1e-9 {
        (n_sites as f64 * phi).sin() / s
    } else {
        // centered comb: sum of exp(2i j phi) -> +/- N_s by parity of the
        // nearest multiple of pi and of N_s
        let m = (phi / std::f64::consts::PI).round() as i64;
        let sign = if (m * (n_sites as i64 - 1)) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        sign * n_sites as f64
    }
}

/// Small-detuning sinc limit of the Dirichlet kernel near site_phase = π:
/// sinc(N_s(π − site_phase)). For even N_s this differs from the direct sum
/// by an overall sign.
pub fn bunching_sinc_limit(cfg: &LatticeConfig) -> Bunching {
    let n = cfg.n_sites as f64;
    let x = n * (std::f64::consts::PI - cfg.site_phase);
    let sinc = if x.abs() < 1e-12 { 1.0 } else { x.sin() / x };
    let b0 = 0.5 + (2.0 * cfg.z0_phase).cos() * sinc / 2.0;
    let b_plus = C64::from_polar(1.0, 2.0 * cfg.z0_phase) * sinc;
    Bunching { b0, b_plus }
}

/// Thermal bunching: the zero-temperature values scaled by the Debye-Waller
/// factor exp(−2(k·z̄)²), with b₀ contracting towards its homogeneous value
/// of 1/2.
pub fn bunching_thermal(cfg: &LatticeConfig) -> Bunching {
    let cold = bunching_lattice(cfg);
    let dw = (-2.0 * cfg.kzbar * cfg.kzbar).exp();
    Bunching {
        b0: 0.5 + (cold.b0 - 0.5) * dw,
        b_plus: cold.b_plus * dw,
    }
}

/// Bunching of a population-weighted lattice together with the effective atom
/// numbers N_eff = N·b that enter the normal mode splitting.
#[derive(Debug, Clone, Copy)]
pub struct WeightedBunching {
    pub bunching: Bunching,
    /// N·b₀.
    pub n_eff_0: f64,
    /// N·|b₊|.
    pub n_eff_plus: f64,
}

/// Bunching of a lattice with per-site populations `weights` summing to
/// `n_total`.
pub fn bunching_weighted(cfg: &LatticeConfig, n_total: f64) -> Result<WeightedBunching> {
    let weights = cfg
        .weights
        .as_ref()
        .ok_or_else(|| Error::Degenerate("weighted bunching without weights".into()))?;
    if weights.len() != cfg.n_sites {
        return Err(Error::Config(format!(
            "weights length {} != n_sites {}",
            weights.len(),
            cfg.n_sites
        )));
    }
    // the sum of the weights may fall short of n_total (truncation leak in
    // evolved populations); the shortfall simply reduces the coupled fraction
    let mut b0 = 0.0;
    let mut bp = C64::new(0.0, 0.0);
    for (kz, &w) in cfg.site_phases().zip(weights.iter()) {
        let c = kz.cos();
        b0 += w * c * c;
        bp += w * C64::from_polar(1.0, 2.0 * kz);
    }
    let norm = if n_total > 0.0 { n_total } else { 1.0 };
    let bunching = Bunching {
        b0: b0 / norm,
        b_plus: bp / norm,
    };
    Ok(WeightedBunching {
        bunching,
        n_eff_0: n_total * bunching.b0,
        n_eff_plus: n_total * bunching.b_plus.norm(),
    })
}
