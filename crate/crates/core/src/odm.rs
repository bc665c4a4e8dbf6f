//! Open-Dicke-model steady states and spectra for linear and ring cavities.
//!
//! Mean-field amplitudes only; the low-saturation (linearized) solutions are
//! closed-form, the saturating case is solved by damped fixed-point iteration
//! seeded with the linearized solution.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::{u_gamma, DerivedParams, Geometry};

/// Probe drive of one spectrum point.
#[derive(Debug, Clone, Copy)]
pub struct DriveConfig {
    /// Laser detuning from the nearest empty-cavity mode, Δ_c (rad/s).
    pub delta_c: f64,
    /// Laser detuning from the atomic transition, Δ_a (rad/s).
    pub delta_a: f64,
    /// Pump rate of the forward (+) mode.
    pub eta_plus: C64,
    /// Pump rate of the backward (−) mode; unused for linear cavities.
    pub eta_minus: C64,
}

impl DriveConfig {
    /// Atom-cavity detuning Δ_ca = Δ_c − Δ_a (derived, never stored).
    pub fn delta_ca(&self) -> f64 {
        self.delta_c - self.delta_a
    }

    fn delta_kappa(&self, d: &DerivedParams) -> C64 {
        C64::new(self.delta_c, d.kappa)
    }
}

/// Steady-state intracavity photon-field amplitudes.
#[derive(Debug, Clone, Copy)]
pub struct SteadyState {
    pub alpha_plus: C64,
    /// Zero for a linear cavity.
    pub alpha_minus: C64,
}

/// Spontaneous-emission handling in the collective coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spont {
    Full,
    /// Drop the imaginary part of U_γ (γ₀ = 0), as appropriate deep in the
    /// bad-cavity limit.
    Neglected,
}

fn coupling(d: &DerivedParams, delta_a: f64, spont: Spont) -> C64 {
    let u = u_gamma(d, delta_a);
    match spont {
        Spont::Full => u,
        Spont::Neglected => C64::new(u.re, 0.0),
    }
}

/// Linearized steady state of a laser-pumped linear cavity:
/// α = iη / (Δ_κ − N·U_γ·b₀).
pub fn steady_linear(d: &DerivedParams, drive: &DriveConfig, b0: f64, n_atoms: f64) -> SteadyState {
    steady_linear_opts(d, drive, b0, n_atoms, Spont::Full)
}

pub fn steady_linear_opts(
    d: &DerivedParams,
    drive: &DriveConfig,
    b0: f64,
    n_atoms: f64,
    spont: Spont,
) -> SteadyState {
    let u = coupling(d, drive.delta_a, spont);
    let alpha = C64::i() * drive.eta_plus / (drive.delta_kappa(d) - n_atoms * u * b0);
    SteadyState {
        alpha_plus: alpha,
        alpha_minus: C64::new(0.0, 0.0),
    }
}

/// Linearized steady state of a ring cavity with counter-propagating modes
/// coupled by Bragg scattering:
/// α± = [iη±(Δ_κ − NU_γ) + iη∓·NU_γ·b∓] / [(Δ_κ − NU_γ)² − N²U_γ²|b₊|²].
pub fn steady_ring(
    d: &DerivedParams,
    drive: &DriveConfig,
    b_plus: C64,
    n_atoms: f64,
) -> SteadyState {
    steady_ring_opts(d, drive, b_plus, n_atoms, Spont::Full)
}

pub fn steady_ring_opts(
    d: &DerivedParams,
    drive: &DriveConfig,
    b_plus: C64,
    n_atoms: f64,
    spont: Spont,
) -> SteadyState {
    let u = coupling(d, drive.delta_a, spont);
    let nu = n_atoms * u;
    let dk = drive.delta_kappa(d);
    let b_minus = b_plus.conj();
    let denom = (dk - nu) * (dk - nu) - nu * nu * b_plus.norm_sqr();
    let alpha_plus = (C64::i() * drive.eta_plus * (dk - nu)
        + C64::i() * drive.eta_minus * nu * b_minus)
        / denom;
    let alpha_minus = (C64::i() * drive.eta_minus * (dk - nu)
        + C64::i() * drive.eta_plus * nu * b_plus)
        / denom;
    SteadyState {
        alpha_plus,
        alpha_minus,
    }
}

/// Symmetric and antisymmetric mode combinations α₊ ± α₋·e^{−2i·kz₀}.
pub fn ring_sym_antisym(state: &SteadyState, z0_phase: f64) -> (C64, C64) {
    let rot = state.alpha_minus * C64::from_polar(1.0, -2.0 * z0_phase);
    (state.alpha_plus + rot, state.alpha_plus - rot)
}

/// Damping of the fixed-point iteration in [`solve_nonlinear`].
const FP_DAMPING: f64 = 0.5;
const FP_MAX_ITER: usize = 10_000;

/// Steady state of the saturating (nonlinear) equations for explicitly placed
/// atoms, by damped fixed-point iteration started from the linearized
/// solution. `positions` holds (k·z_j, weight) pairs. Returns the branch
/// continuously connected to the linear solution.
pub fn solve_nonlinear(
    d: &DerivedParams,
    drive: &DriveConfig,
    positions: &[(f64, f64)],
    geometry: Geometry,
) -> Result<SteadyState> {
    let u = u_gamma(d, drive.delta_a);
    let dk = drive.delta_kappa(d);
    let sat_scale = 2.0 * (u / d.g).norm_sqr();

    // linearized initial guess
    let (b, n_tot) = realized_bunching(positions);
    let mut state = match geometry {
        Geometry::Linear => steady_linear(d, drive, b.b0, n_tot),
        Geometry::Ring => steady_ring(d, drive, b.b_plus, n_tot),
    };

    let mut residual = f64::INFINITY;
    for _ in 0..FP_MAX_ITER {
        let next = match geometry {
            Geometry::Linear => {
                // sum_j U w_j cos^2(kz_j) / (1 + sat |alpha|^2 cos^2(kz_j))
                let mut s = C64::new(0.0, 0.0);
                let a2 = state.alpha_plus.norm_sqr();
                for &(kz, w) in positions {
                    let c2 = kz.cos().powi(2);
                    s += u * w * c2 / (1.0 + sat_scale * a2 * c2);
                }
                SteadyState {
                    alpha_plus: C64::i() * drive.eta_plus / (dk - s),
                    alpha_minus: C64::new(0.0, 0.0),
                }
            }
            Geometry::Ring => {
                // position-resolved 2x2 system M(alpha) * alpha = i eta
                let mut m11 = dk;
                let mut m12 = C64::new(0.0, 0.0);
                let mut m21 = C64::new(0.0, 0.0);
                let mut m22 = dk;
                for &(kz, w) in positions {
                    let e = C64::from_polar(1.0, kz);
                    let local = e * state.alpha_plus + e.conj() * state.alpha_minus;
                    let sat = 1.0 + sat_scale * local.norm_sqr();
                    let uu = u * w / sat;
                    m11 -= uu;
                    m22 -= uu;
                    m12 -= uu * e.conj() * e.conj();
                    m21 -= uu * e * e;
                }
                let det = m11 * m22 - m12 * m21;
                SteadyState {
                    alpha_plus: (C64::i() * drive.eta_plus * m22
                        - C64::i() * drive.eta_minus * m12)
                        / det,
                    alpha_minus: (C64::i() * drive.eta_minus * m11
                        - C64::i() * drive.eta_plus * m21)
                        / det,
                }
            }
        };
        state = SteadyState {
            alpha_plus: (1.0 - FP_DAMPING) * state.alpha_plus + FP_DAMPING * next.alpha_plus,
            alpha_minus: (1.0 - FP_DAMPING) * state.alpha_minus + FP_DAMPING * next.alpha_minus,
        };
        residual = nonlinear_residual(d, drive, positions, geometry, &state);
        let scale = drive.eta_plus.norm()
            + drive.eta_minus.norm()
            + d.kappa * (state.alpha_plus.norm() + state.alpha_minus.norm());
        if residual < 1e-10 * scale {
            return Ok(state);
        }
    }
    Err(Error::NonConvergence {
        iterations: FP_MAX_ITER,
        residual,
    })
}

/// Norm of the steady-state defect of the saturating equations.
pub fn nonlinear_residual(
    d: &DerivedParams,
    drive: &DriveConfig,
    positions: &[(f64, f64)],
    geometry: Geometry,
    state: &SteadyState,
) -> f64 {
    let u = u_gamma(d, drive.delta_a);
    let dk = drive.delta_kappa(d);
    let sat_scale = 2.0 * (u / d.g).norm_sqr();
    match geometry {
        Geometry::Linear => {
            let a2 = state.alpha_plus.norm_sqr();
            let mut lhs = C64::new(0.0, 0.0);
            for &(kz, w) in positions {
                let c2 = kz.cos().powi(2);
                lhs += -u * state.alpha_plus * w * c2 / (1.0 + sat_scale * a2 * c2);
            }
            (lhs - (C64::i() * drive.eta_plus - dk * state.alpha_plus)).norm()
        }
        Geometry::Ring => {
            let mut lhs_p = C64::new(0.0, 0.0);
            let mut lhs_m = C64::new(0.0, 0.0);
            for &(kz, w) in positions {
                let e = C64::from_polar(1.0, kz);
                let local = e * state.alpha_plus + e.conj() * state.alpha_minus;
                let sat = 1.0 + sat_scale * local.norm_sqr();
                lhs_p += -u * w * (state.alpha_plus + e.conj() * e.conj() * state.alpha_minus) / sat;
                lhs_m += -u * w * (state.alpha_minus + e * e * state.alpha_plus) / sat;
            }
            let rp = lhs_p - (C64::i() * drive.eta_plus - dk * state.alpha_plus);
            let rm = lhs_m - (C64::i() * drive.eta_minus - dk * state.alpha_minus);
            (rp.norm_sqr() + rm.norm_sqr()).sqrt()
        }
    }
}

fn realized_bunching(positions: &[(f64, f64)]) -> (crate::bunching::Bunching, f64) {
    let n: f64 = positions.iter().map(|&(_, w)| w).sum();
    if n == 0.0 {
        return (
            crate::bunching::Bunching {
                b0: 0.0,
                b_plus: C64::new(0.0, 0.0),
            },
            0.0,
        );
    }
    let mut b0 = 0.0;
    let mut bp = C64::new(0.0, 0.0);
    for &(kz, w) in positions {
        b0 += w * kz.cos().powi(2);
        bp += w * C64::from_polar(1.0, 2.0 * kz);
    }
    (
        crate::bunching::Bunching {
            b0: b0 / n,
            b_plus: bp / n,
        },
        n,
    )
}

/// Transmission, reflection and absorption of a linear cavity, normalized to
/// the pump intensity: T = |κα/η|², R = |1 − κα/η|², A = 1 − T − R.
#[derive(Debug, Clone, Copy)]
pub struct LinearSpectrum {
    pub t: f64,
    pub r: f64,
    pub a: f64,
}

pub fn spectra_linear(
    state: &SteadyState,
    drive: &DriveConfig,
    d: &DerivedParams,
) -> Result<LinearSpectrum> {
    if drive.eta_plus.norm() == 0.0 {
        return Err(Error::Degenerate("spectra require a nonzero pump".into()));
    }
    let ratio = d.kappa * state.alpha_plus / drive.eta_plus;
    let t = ratio.norm_sqr();
    let r = (C64::new(1.0, 0.0) - ratio).norm_sqr();
    Ok(LinearSpectrum { t, r, a: 1.0 - t - r })
}

/// Ring-cavity output channels, all normalized to the + pump intensity:
/// T± = |κα±/η₊|², R± = |η±/η₊ − κα±/η₊|², A = Σ±(|η±/η₊|² − T± − R±).
#[derive(Debug, Clone, Copy)]
pub struct RingSpectrum {
    pub t_plus: f64,
    pub t_minus: f64,
    pub r_plus: f64,
    pub r_minus: f64,
    pub a: f64,
}

pub fn spectra_ring(
    state: &SteadyState,
    drive: &DriveConfig,
    d: &DerivedParams,
) -> Result<RingSpectrum> {
    if drive.eta_plus.norm() == 0.0 {
        return Err(Error::Degenerate("spectra require a nonzero + pump".into()));
    }
    let rp = d.kappa * state.alpha_plus / drive.eta_plus;
    let rm = d.kappa * state.alpha_minus / drive.eta_plus;
    let pump_ratio = drive.eta_minus / drive.eta_plus;
    let t_plus = rp.norm_sqr();
    let t_minus = rm.norm_sqr();
    let r_plus = (C64::new(1.0, 0.0) - rp).norm_sqr();
    let r_minus = (pump_ratio - rm).norm_sqr();
    let a = (1.0 - t_plus - r_plus) + (pump_ratio.norm_sqr() - t_minus - r_minus);
    Ok(RingSpectrum {
        t_plus,
        t_minus,
        r_plus,
        r_minus,
        a,
    })
}
