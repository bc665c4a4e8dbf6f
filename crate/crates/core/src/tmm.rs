//! Transfer matrix model of a linear cavity containing a one-dimensional
//! atomic lattice: spectra, intracavity fields and diagnostics.
//!
//! Phase bookkeeping: the probe detuning enters the single-pass cavity phase
//! as Δ_c/(2·fsr); the lattice carries an exact geometric phase
//! π(1 + Δ_lat/ω_lat) per period; the free-space segment between lattice and
//! output mirror absorbs the residual so the total phase closes on the
//! resonant round-trip condition. The lattice is registered to the mode so
//! that the central site sits at a field antinode when `z0_phase = 0`,
//! matching the bunching conventions of the open Dicke model.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::mat2::{
    atomic_layer, beamsplitter_t, beamsplitter_t_inv, loss, propagation_phase, s_from_t, AmpPair,
    Mat2, MatRole,
};
use crate::params::{polarizability, DerivedParams, Geometry, PhysParams, PI, SPEED_OF_LIGHT, TAU};

/// Probe point of one spectrum evaluation. All detunings in rad/s.
#[derive(Debug, Clone, Copy)]
pub struct Probe {
    pub delta_c: f64,
    pub delta_a: f64,
    pub delta_lat: f64,
}

/// Geometry and coupling data of a linear cavity with an embedded lattice.
#[derive(Debug, Clone)]
pub struct CavityLayout {
    /// Free spectral range (Hz); fixes the cavity length c/(2·fsr).
    pub fsr: f64,
    pub lambda_a: f64,
    pub lambda_lat: f64,
    /// Lattice laser angular frequency 2πc/λ_lat.
    pub omega_lat: f64,
    pub gamma: f64,
    /// Resonant per-atom reflection magnitude (see `DerivedParams::zeta_tmm`).
    pub zeta: f64,
    /// Atoms per layer N₁.
    pub n1: f64,
    pub n_sites: usize,
    /// Lattice offset k·z₀ against the mode antinode (rad).
    pub z0_phase: f64,
    /// Thermal layer width k·z̄; 0 disables sublayer splitting.
    pub kzbar: f64,
    /// Sublayers per period for the thermal stack.
    pub n_sublayers: usize,
    /// Intensity reflectivities of input and output mirror.
    pub r_mir: (f64, f64),
    /// Extra per-pass amplitude loss factor.
    pub r_ls: f64,
    /// Drive Rabi frequency for the saturated-polarizability option (rad/s).
    pub rabi: f64,
    /// Cavity length offset δL (m), added to the mirror spacing.
    pub cav_offset: f64,
    /// Optional fixed site phase; when set it replaces π(1 + Δ_lat/ω_lat).
    pub site_phase_override: Option<f64>,
}

impl CavityLayout {
    pub fn from_params(p: &PhysParams, d: &DerivedParams) -> Result<Self> {
        let layout = CavityLayout {
            fsr: p.fsr,
            lambda_a: p.lambda_a,
            lambda_lat: p.lambda_lat,
            omega_lat: p.omega_lat(),
            gamma: p.gamma,
            zeta: d.zeta_tmm(Geometry::Linear),
            n1: d.n1,
            n_sites: p.n_sites,
            z0_phase: 0.0,
            kzbar: d.kzbar(),
            n_sublayers: 30,
            r_mir: (p.r_mir, p.r_mir),
            r_ls: p.r_ls,
            rabi: p.rabi,
            cav_offset: 0.0,
            site_phase_override: None,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn length(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.fsr) + self.cav_offset
    }

    /// Mirror-to-lattice distance.
    pub fn mirror_gap(&self) -> f64 {
        0.5 * (self.length() - self.n_sites as f64 * self.lambda_lat / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mirror_gap() < -1e-9 * self.length() {
            return Err(Error::Config(format!(
                "cavity too short: length {:.3e} m < lattice extent {:.3e} m",
                self.length(),
                self.n_sites as f64 * self.lambda_lat / 2.0
            )));
        }
        if self.n_sublayers == 0 {
            return Err(Error::Config("n_sublayers must be >= 1".into()));
        }
        Ok(())
    }

    /// Phase advance per lattice period seen by the probe.
    pub fn period_phase(&self, probe: &Probe) -> f64 {
        match self.site_phase_override {
            Some(p) => p,
            None => PI * (1.0 + probe.delta_lat / self.omega_lat),
        }
    }

    /// Reflection coefficient of one full atomic layer at this probe point.
    pub fn beta1(&self, probe: &Probe) -> C64 {
        self.n1 * self.zeta * polarizability(probe.delta_a, self.rabi, self.gamma)
    }

    /// Static phase of the input-mirror-to-lattice segment: registers the
    /// central site at antinode offset z₀. Reduced modulo 2π with the π-part
    /// of the lattice phase handled exactly, so that the closure subtraction
    /// in `exit_phase` does not lose precision to large phase multiples.
    fn entry_phase(&self, period: f64) -> f64 {
        PI / 2.0 + self.z0_phase - lattice_phase_mod_tau(self.n_sites + 1, period) / 2.0
    }

    /// Phase of the lattice-to-output-mirror segment: absorbs the closure
    /// residual so the empty-cavity resonance sits at Δ_c = 0 (even mode
    /// number convention), plus the length-offset phase k·δL.
    fn exit_phase(&self, probe: &Probe, period: f64) -> f64 {
        let total = 0.5 * probe.delta_c / self.fsr + TAU * self.cav_offset / self.lambda_a;
        total - self.entry_phase(period) - lattice_phase_mod_tau(self.n_sites, period)
    }
}

/// One thin sheet of the discretized lattice: propagation to the sheet, then
/// the sheet itself.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Sheet {
    /// Propagation phase preceding the sheet.
    pub pre_phase: f64,
    /// Reflection coefficient of the sheet.
    pub beta: C64,
    /// Atoms carried by the sheet.
    pub weight: f64,
}

/// Sheet sequence of one lattice, input side first. Cold lattices hold one
/// full-strength sheet per period; a thermal width splits each period into
/// sublayers whose weights follow the site Gaussian wrapped to the period,
/// with sublayer 0 exactly on the site and each period renormalized to carry
/// n1 atoms.
pub(crate) fn build_sheets(
    n_sites: usize,
    beta1: C64,
    n1: f64,
    period: f64,
    kzbar: f64,
    n_sublayers: usize,
) -> Vec<Sheet> {
    if kzbar <= 0.0 || n_sites == 0 {
        return (0..n_sites)
            .map(|_| Sheet {
                pre_phase: period,
                beta: beta1,
                weight: n1,
            })
            .collect();
    }
    let nss = n_sublayers;
    let dphi = period / nss as f64;
    let mut w = vec![0.0; nss];
    let mut sum = 0.0;
    for (i, wi) in w.iter_mut().enumerate() {
        let d = (i as f64 * dphi).min(period - i as f64 * dphi);
        *wi = (-d * d / (2.0 * kzbar * kzbar)).exp();
        sum += *wi;
    }
    for wi in w.iter_mut() {
        *wi /= sum;
    }
    let mut sheets = Vec::with_capacity(n_sites * nss);
    for _ in 0..n_sites {
        // light encounters sublayer nss-1 first and the on-site sublayer 0
        // last, at the period end where the cold sheet sits
        for i in (0..nss).rev() {
            sheets.push(Sheet {
                pre_phase: dphi,
                beta: beta1 * w[i],
                weight: n1 * w[i],
            });
        }
    }
    sheets
}

fn stack_sheets(layout: &CavityLayout, probe: &Probe) -> Vec<Sheet> {
    build_sheets(
        layout.n_sites,
        layout.beta1(probe),
        layout.n1,
        layout.period_phase(probe),
        layout.kzbar,
        layout.n_sublayers,
    )
}

/// (n·period) mod 2π, splitting off the integer multiples of π so that large
/// lattices do not erode the phase precision of the closure bookkeeping.
/// Any remaining π ambiguity of a half-phase is physically inert: every
/// observable is π-periodic in the lattice registration offset.
pub(crate) fn lattice_phase_mod_tau(n: usize, period: f64) -> f64 {
    let eps = period - PI;
    let base = if n % 2 == 0 { 0.0 } else { PI };
    (base + n as f64 * eps).rem_euclid(TAU)
}

/// Total transfer matrix of the atomic stack, `[A·P(period)]^{N_s}` in the
/// cold case, sublayer-resolved when a thermal width is set. An exactly
/// uncoupled stack collapses to a single reduced propagation phase so the
/// empty cavity stays bit-clean against the closure bookkeeping.
pub fn lattice_stack(layout: &CavityLayout, probe: &Probe) -> Mat2 {
    let period = layout.period_phase(probe);
    if layout.beta1(probe).norm() == 0.0 {
        return propagation_phase(lattice_phase_mod_tau(layout.n_sites, period));
    }
    let mut m = Mat2::identity(MatRole::Transfer);
    for sheet in stack_sheets(layout, probe) {
        m = atomic_layer(sheet.beta) * (propagation_phase(sheet.pre_phase) * m);
    }
    m
}

/// Total transfer and scattering matrices of the assembled cavity.
pub fn assemble_linear(layout: &CavityLayout, probe: &Probe) -> Result<(Mat2, Mat2)> {
    let period = layout.period_phase(probe);
    let bs1 = beamsplitter_t(layout.r_mir.0.sqrt())?;
    let bs2_inv = beamsplitter_t_inv(layout.r_mir.1.sqrt())?;
    let mut m = if layout.beta1(probe).norm() == 0.0 || layout.n_sites == 0 {
        // uncoupled interior: one exact single-pass phase
        let total = 0.5 * probe.delta_c / layout.fsr + TAU * layout.cav_offset / layout.lambda_a;
        propagation_phase(total) * bs1
    } else {
        let mut m = propagation_phase(layout.entry_phase(period)) * bs1;
        m = lattice_stack(layout, probe) * m;
        propagation_phase(layout.exit_phase(probe, period)) * m
    };
    if layout.r_ls < 1.0 {
        m = loss(layout.r_ls, false) * m;
    }
    let t_tot = bs2_inv * m;
    let s_tot = s_from_t(&t_tot)?;
    Ok((t_tot, s_tot))
}

/// Transmission, reflection, absorption and transmitted phase at one probe
/// point, for pumping through the input mirror only.
#[derive(Debug, Clone, Copy)]
pub struct TmmPoint {
    pub t: f64,
    pub r: f64,
    pub a: f64,
    /// Phase of the transmitted amplitude, in (−π, π].
    pub phase_out: f64,
}

pub fn spectrum_point_linear(layout: &CavityLayout, probe: &Probe) -> Result<TmmPoint> {
    let (_, s) = assemble_linear(layout, probe)?;
    let t = s.m11.norm_sqr();
    let r = s.m21.norm_sqr();
    Ok(TmmPoint {
        t,
        r,
        a: 1.0 - t - r,
        phase_out: s.m11.arg(),
    })
}

/// Field samples along the optical axis, evaluated at element boundaries.
#[derive(Debug, Clone)]
pub struct IntensityProfile {
    pub rows: Vec<ProfileRow>,
}

#[derive(Debug, Clone, Copy)]
pub struct ProfileRow {
    /// Axial position in units of λ_lat.
    pub z_over_lambda: f64,
    pub pair: AmpPair,
    /// Atoms of the sheet at this boundary (0 for plain propagation points).
    pub density_weight: f64,
}

impl ProfileRow {
    pub fn intensity(&self) -> f64 {
        self.pair.intensity()
    }
    pub fn flux(&self) -> f64 {
        self.pair.flux()
    }
}

/// Intracavity amplitudes at every layer boundary for unit input amplitude.
pub fn intensity_profile(layout: &CavityLayout, probe: &Probe) -> Result<IntensityProfile> {
    let period = layout.period_phase(probe);
    let (t_tot, _) = assemble_linear(layout, probe)?;
    if t_tot.m22.norm() == 0.0 {
        return Err(Error::SingularConversion);
    }
    // input vector (alpha_in, alpha_out^-) for alpha_in = 1
    let input = AmpPair::new(C64::new(1.0, 0.0), -t_tot.m21 / t_tot.m22);

    let bs1 = beamsplitter_t(layout.r_mir.0.sqrt())?;
    let mut partial = bs1;
    let gap = layout.mirror_gap() / layout.lambda_lat;

    let mut rows = Vec::new();
    // just inside the input mirror
    rows.push(ProfileRow {
        z_over_lambda: 0.0,
        pair: partial.apply(input),
        density_weight: 0.0,
    });
    partial = propagation_phase(layout.entry_phase(period)) * partial;
    // a lattice-period phase corresponds to half a lattice wavelength
    let mut z = gap;
    for sheet in stack_sheets(layout, probe) {
        partial = propagation_phase(sheet.pre_phase) * partial;
        z += 0.5 * sheet.pre_phase / period;
        rows.push(ProfileRow {
            z_over_lambda: z,
            pair: partial.apply(input),
            density_weight: sheet.weight,
        });
        partial = atomic_layer(sheet.beta) * partial;
    }
    // lattice end, after the last sheet
    rows.push(ProfileRow {
        z_over_lambda: z,
        pair: partial.apply(input),
        density_weight: 0.0,
    });
    Ok(IntensityProfile { rows })
}

/// Amplitudes at an axial position z ∈ [0, L] (m), resolved to the nearest
/// recorded layer boundary.
pub fn field_at(layout: &CavityLayout, probe: &Probe, z: f64) -> Result<AmpPair> {
    let len = layout.length();
    if !(0.0..=len).contains(&z) {
        return Err(Error::OutOfRange { z, len });
    }
    let profile = intensity_profile(layout, probe)?;
    let z_lat = z / layout.lambda_lat;
    let row = profile
        .rows
        .iter()
        .min_by(|a, b| {
            let da = (a.z_over_lambda - z_lat).abs();
            let db = (b.z_over_lambda - z_lat).abs();
            da.partial_cmp(&db).unwrap()
        })
        .expect("profile has rows");
    Ok(row.pair)
}

/// Linear correlation between per-layer flux drop and per-layer overlap
/// n(z)·|α₊+α₋|²; both are proportional where spontaneous emission is the
/// only loss channel.
pub fn spont_check(profile: &IntensityProfile) -> Result<f64> {
    let sheets: Vec<&ProfileRow> = profile
        .rows
        .iter()
        .filter(|r| r.density_weight > 0.0)
        .collect();
    if sheets.len() < 3 {
        return Err(Error::UndefinedCorrelation(format!(
            "need at least 3 atomic layers, got {}",
            sheets.len()
        )));
    }
    let mut drops = Vec::with_capacity(sheets.len() - 1);
    let mut overlaps = Vec::with_capacity(sheets.len() - 1);
    for pair in sheets.windows(2) {
        drops.push(pair[0].flux() - pair[1].flux());
        overlaps.push(pair[0].density_weight * pair[0].intensity());
    }
    pearson(&drops, &overlaps)
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation(
            "zero variance in flux drops or overlaps".into(),
        ));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Result of the cavity-length retuning search.
#[derive(Debug, Clone, Copy)]
pub struct Retune {
    /// Length offset maximizing transmission, centered into (−λ_a/4, λ_a/4].
    pub delta_l: f64,
    pub t_before: f64,
    pub t_after: f64,
    /// Transmission landscape was flat (no mirrors); `delta_l` is 0.
    pub flat: bool,
}

/// Length offset that restores maximum transmission, from a coarse scan over
/// one free spectral range in δL refined by golden-section search.
pub fn retune_length(layout: &CavityLayout, probe: &Probe) -> Result<Retune> {
    let window = layout.lambda_a / 2.0;
    let t_at = |dl: f64| -> Result<f64> {
        let mut l = layout.clone();
        l.cav_offset += dl;
        Ok(spectrum_point_linear(&l, probe)?.t)
    };
    let t_before = t_at(0.0)?;

    const COARSE: usize = 1000;
    let mut best = (0.0, f64::MIN);
    let mut lo_t = f64::MAX;
    for i in 0..COARSE {
        let dl = window * i as f64 / COARSE as f64;
        let t = t_at(dl)?;
        if t > best.1 {
            best = (dl, t);
        }
        lo_t = lo_t.min(t);
    }
    if best.1 - lo_t <= 1e-12 * best.1.abs().max(1e-300) {
        return Ok(Retune {
            delta_l: 0.0,
            t_before,
            t_after: t_before,
            flat: true,
        });
    }
    // golden-section refinement around the coarse maximum
    let step = window / COARSE as f64;
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = t_at(x1)?;
    let mut f2 = t_at(x2)?;
    for _ in 0..200 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = t_at(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = t_at(x1)?;
        }
        let fbest = f1.max(f2);
        if (f1 - f2).abs() <= 1e-8 * fbest.abs() && (b - a) < 1e-6 * window {
            break;
        }
    }
    let mut delta_l = 0.5 * (a + b);
    // center into (-lambda/4, lambda/4]
    let half = layout.lambda_a / 4.0;
    while delta_l > half {
        delta_l -= window;
    }
    while delta_l <= -half {
        delta_l += window;
    }
    let t_after = t_at(delta_l)?;
    Ok(Retune {
        delta_l,
        t_before,
        t_after: t_after.max(t_before),
        flat: false,
    })
}

/// Per-layer field and transmission of a bare lattice in free space (no
/// cavity), pumped from the left with unit amplitude.
#[derive(Debug, Clone, Copy)]
pub struct BareLayerPoint {
    /// 1-based layer index.
    pub layer: usize,
    /// |α₊+α₋|² at the layer.
    pub intensity: f64,
    /// Intensity transmission of a stack truncated after this layer.
    pub trans_after: f64,
}

/// Field at each layer of the free-standing stack plus the transmission of
/// every truncated sub-stack. `phases` gives the inter-layer propagation
/// phases (layer j sits after `phases[j]`).
pub fn bare_stack_profile(beta1: C64, phases: &[f64]) -> Vec<BareLayerPoint> {
    let n = phases.len();
    // full stack first, for the input-side reflection
    let mut full = Mat2::identity(MatRole::Transfer);
    for &p in phases {
        full = atomic_layer(beta1) * (propagation_phase(p) * full);
    }
    let refl = if full.m22.norm() == 0.0 {
        C64::new(0.0, 0.0)
    } else {
        -full.m21 / full.m22
    };
    let input = AmpPair::new(C64::new(1.0, 0.0), refl);

    let mut out = Vec::with_capacity(n);
    let mut partial = Mat2::identity(MatRole::Transfer);
    for (j, &p) in phases.iter().enumerate() {
        partial = propagation_phase(p) * partial;
        let at_layer = partial.apply(input);
        partial = atomic_layer(beta1) * partial;
        // truncated stack of j+1 layers: its own transmission
        let trans_after = if partial.m22.norm() == 0.0 {
            0.0
        } else {
            (partial.det() / partial.m22).norm_sqr()
        };
        out.push(BareLayerPoint {
            layer: j + 1,
            intensity: at_layer.intensity(),
            trans_after,
        });
    }
    out
}
