//! 2×2 complex transfer/scattering matrix algebra and the element matrices of
//! the one-dimensional cavity model.
//!
//! A transfer matrix maps the amplitude pair (α₊, α₋) at one axial point to
//! the pair at another; a scattering matrix maps incoming onto outgoing
//! amplitudes of the same element. The two descriptions are related by
//! partial inversion and the conversions are involutive.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Which linear-map convention a [`Mat2`] is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatRole {
    Transfer,
    Scattering,
}

/// Ordered pair of counter-propagating field amplitudes at one axial point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmpPair {
    pub plus: C64,
    pub minus: C64,
}

impl AmpPair {
    pub fn new(plus: C64, minus: C64) -> Self {
        AmpPair { plus, minus }
    }

    /// Local intensity of the superposed field, |α₊ + α₋|².
    pub fn intensity(&self) -> f64 {
        (self.plus + self.minus).norm_sqr()
    }

    /// Directed energy flux, |α₊|² − |α₋|².
    pub fn flux(&self) -> f64 {
        self.plus.norm_sqr() - self.minus.norm_sqr()
    }
}

/// 2×2 complex matrix with an explicit role tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m11: C64,
    pub m12: C64,
    pub m21: C64,
    pub m22: C64,
    pub role: MatRole,
}

impl Mat2 {
    pub fn transfer(m11: C64, m12: C64, m21: C64, m22: C64) -> Self {
        Mat2 {
            m11,
            m12,
            m21,
            m22,
            role: MatRole::Transfer,
        }
    }

    pub fn scattering(m11: C64, m12: C64, m21: C64, m22: C64) -> Self {
        Mat2 {
            m11,
            m12,
            m21,
            m22,
            role: MatRole::Scattering,
        }
    }

    pub fn identity(role: MatRole) -> Self {
        Mat2 {
            m11: C64::new(1.0, 0.0),
            m12: C64::new(0.0, 0.0),
            m21: C64::new(0.0, 0.0),
            m22: C64::new(1.0, 0.0),
            role,
        }
    }

    pub fn det(&self) -> C64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// Matrix product self·rhs (apply `rhs` first). Roles must match.
    pub fn compose(&self, rhs: &Mat2) -> Mat2 {
        debug_assert_eq!(self.role, rhs.role);
        Mat2 {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
            role: self.role,
        }
    }

    pub fn apply(&self, v: AmpPair) -> AmpPair {
        AmpPair {
            plus: self.m11 * v.plus + self.m12 * v.minus,
            minus: self.m21 * v.plus + self.m22 * v.minus,
        }
    }

    pub fn inverse(&self) -> Result<Mat2> {
        let det = self.det();
        if det.norm() == 0.0 {
            return Err(Error::SingularConversion);
        }
        Ok(Mat2 {
            m11: self.m22 / det,
            m12: -self.m12 / det,
            m21: -self.m21 / det,
            m22: self.m11 / det,
            role: self.role,
        })
    }

    pub fn max_entry_norm(&self) -> f64 {
        self.m11
            .norm()
            .max(self.m12.norm())
            .max(self.m21.norm())
            .max(self.m22.norm())
    }
}

impl std::ops::Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        self.compose(&rhs)
    }
}

/// Scattering matrix from a transfer matrix by partial inversion:
/// S = (1/T₂₂)·[[det T, T₁₂], [−T₂₁, 1]].
pub fn s_from_t(t: &Mat2) -> Result<Mat2> {
    debug_assert_eq!(t.role, MatRole::Transfer);
    if t.m22.norm() == 0.0 {
        return Err(Error::SingularConversion);
    }
    Ok(Mat2 {
        m11: t.det() / t.m22,
        m12: t.m12 / t.m22,
        m21: -t.m21 / t.m22,
        m22: C64::new(1.0, 0.0) / t.m22,
        role: MatRole::Scattering,
    })
}

/// Transfer matrix from a scattering matrix, the inverse prescription:
/// T = (1/S₂₂)·[[det S, S₁₂], [−S₂₁, 1]].
pub fn t_from_s(s: &Mat2) -> Result<Mat2> {
    debug_assert_eq!(s.role, MatRole::Scattering);
    if s.m22.norm() == 0.0 {
        return Err(Error::SingularConversion);
    }
    Ok(Mat2 {
        m11: s.det() / s.m22,
        m12: s.m12 / s.m22,
        m21: -s.m21 / s.m22,
        m22: C64::new(1.0, 0.0) / s.m22,
        role: MatRole::Transfer,
    })
}

/// Free-space propagation over a phase φ = k·z: diag(e^{iφ}, e^{−iφ}).
pub fn propagation_phase(phase: f64) -> Mat2 {
    Mat2::transfer(
        C64::from_polar(1.0, phase),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::from_polar(1.0, -phase),
    )
}

/// Lossless beam-splitter scattering matrix [[t, −r], [r, t]].
pub fn beamsplitter_s(r_amp: f64) -> Result<Mat2> {
    let t_amp = t_from_r(r_amp)?;
    Ok(Mat2::scattering(
        C64::new(t_amp, 0.0),
        C64::new(-r_amp, 0.0),
        C64::new(r_amp, 0.0),
        C64::new(t_amp, 0.0),
    ))
}

/// Lossless beam-splitter transfer matrix (1/t)·[[1, −r], [−r, 1]].
pub fn beamsplitter_t(r_amp: f64) -> Result<Mat2> {
    let t_amp = t_from_r(r_amp)?;
    let inv_t = C64::new(1.0 / t_amp, 0.0);
    let mr = C64::new(-r_amp / t_amp, 0.0);
    Ok(Mat2::transfer(inv_t, mr, mr, inv_t))
}

/// Inverse of [`beamsplitter_t`], (1/t)·[[1, r], [r, 1]].
pub fn beamsplitter_t_inv(r_amp: f64) -> Result<Mat2> {
    let t_amp = t_from_r(r_amp)?;
    let inv_t = C64::new(1.0 / t_amp, 0.0);
    let pr = C64::new(r_amp / t_amp, 0.0);
    Ok(Mat2::transfer(inv_t, pr, pr, inv_t))
}

fn t_from_r(r_amp: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r_amp) {
        return Err(Error::Config(format!(
            "amplitude reflectivity {r_amp} outside [0, 1]"
        )));
    }
    let t_amp = (1.0 - r_amp * r_amp).sqrt();
    if t_amp == 0.0 {
        return Err(Error::Config("perfectly reflecting element has no transfer matrix".into()));
    }
    Ok(t_amp)
}

/// Per-pass loss (or diagonal mirror reflection): diag(±r, ±1/r). The
/// negative branch carries the 180° phase shift of a reflection.
pub fn loss(r_ls: f64, negative: bool) -> Mat2 {
    let s = if negative { -1.0 } else { 1.0 };
    Mat2::transfer(
        C64::new(s * r_ls, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(s / r_ls, 0.0),
    )
}

/// Transfer matrix of one thin atomic layer of reflection coefficient β₁:
/// [[1+iβ₁, iβ₁], [−iβ₁, 1−iβ₁]]; unimodular for any β₁.
pub fn atomic_layer(beta1: C64) -> Mat2 {
    let ib = C64::i() * beta1;
    Mat2::transfer(
        C64::new(1.0, 0.0) + ib,
        ib,
        -ib,
        C64::new(1.0, 0.0) - ib,
    )
}
