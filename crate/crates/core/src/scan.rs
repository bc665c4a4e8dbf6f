//! Sweep orchestration, model comparison, figure-style experiments and all
//! file I/O.
//!
//! Grids are evaluated point-parallel with a deterministic output ordering:
//! identical configuration gives byte-identical CSV output across runs and
//! thread counts. Every emitted grid carries its fully resolved parameter set
//! in the header; re-running from that header reproduces the grid.

use std::io::Write;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::bloch::{evolve_populations, BlochConfig};
use crate::bunching::{bunching_thermal, bunching_weighted, Bunching, LatticeConfig};
use crate::config::RawConfig;
use crate::error::{Error, Result};
use crate::odm::{
    spectra_linear, spectra_ring, steady_linear_opts, steady_ring_opts, DriveConfig, Spont,
};
use crate::params::{derive, DerivedParams, Geometry, PhysParams, PI, TAU};
use crate::ring::{spectrum_point_ring, RingLayout};
use crate::tmm::{bare_stack_profile, spectrum_point_linear, CavityLayout, Probe};

/// Which model evaluates the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Odm,
    Tmm,
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Model::Odm => write!(f, "odm"),
            Model::Tmm => write!(f, "tmm"),
        }
    }
}

/// Scan axis names. Detuning axes are specified in units of Γ, `time` in
/// Bloch periods, `z0_phase` in radians, `cav_offset` in units of λ_lat/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisName {
    DeltaC,
    DeltaA,
    DeltaCa,
    DeltaLat,
    Time,
    Z0Phase,
    CavOffset,
}

impl AxisName {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "delta_c" => AxisName::DeltaC,
            "delta_a" => AxisName::DeltaA,
            "delta_ca" => AxisName::DeltaCa,
            "delta_lat" => AxisName::DeltaLat,
            "time" => AxisName::Time,
            "z0_phase" => AxisName::Z0Phase,
            "cav_offset" => AxisName::CavOffset,
            _ => return Err(Error::Config(format!("unknown axis `{s}`"))),
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            AxisName::DeltaC => "delta_c",
            AxisName::DeltaA => "delta_a",
            AxisName::DeltaCa => "delta_ca",
            AxisName::DeltaLat => "delta_lat",
            AxisName::Time => "time",
            AxisName::Z0Phase => "z0_phase",
            AxisName::CavOffset => "cav_offset",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Axis {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn value(&self, i: usize) -> f64 {
        if self.points == 1 {
            return self.min;
        }
        self.min + (self.max - self.min) * i as f64 / (self.points - 1) as f64
    }

    pub fn step(&self) -> f64 {
        if self.points <= 1 {
            0.0
        } else {
            (self.max - self.min) / (self.points - 1) as f64
        }
    }
}

/// Output channels of a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    T,
    R,
    A,
    TPlus,
    TMinus,
    RPlus,
    RMinus,
    Phase,
    B0,
    AbsBPlus,
    NEff,
}

impl Channel {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "T" => Channel::T,
            "R" => Channel::R,
            "A" => Channel::A,
            "T_plus" => Channel::TPlus,
            "T_minus" => Channel::TMinus,
            "R_plus" => Channel::RPlus,
            "R_minus" => Channel::RMinus,
            "phase" => Channel::Phase,
            "b0" => Channel::B0,
            "abs_b_plus" => Channel::AbsBPlus,
            "n_eff" => Channel::NEff,
            _ => return Err(Error::Config(format!("unknown channel `{s}`"))),
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Channel::T => "T",
            Channel::R => "R",
            Channel::A => "A",
            Channel::TPlus => "T_plus",
            Channel::TMinus => "T_minus",
            Channel::RPlus => "R_plus",
            Channel::RMinus => "R_minus",
            Channel::Phase => "phase",
            Channel::B0 => "b0",
            Channel::AbsBPlus => "abs_b_plus",
            Channel::NEff => "n_eff",
        }
    }
}

/// Wannier-Bloch settings for time-resolved scans and the monitor.
#[derive(Debug, Clone)]
pub struct BlochSettings {
    pub nu: f64,
    pub omega_blo: f64,
    pub half_range: usize,
    pub comb_half: usize,
    pub comb_stride: usize,
}

impl BlochSettings {
    pub fn build(&self, n_total: f64) -> Result<BlochConfig> {
        BlochConfig::comb(
            self.half_range,
            self.comb_half,
            self.comb_stride,
            n_total,
            self.nu,
            self.omega_blo,
        )
    }
}

/// Fully resolved simulation configuration: physical parameters plus the
/// fixed (non-axis) knobs of a scan.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub phys: PhysParams,
    pub derived: DerivedParams,
    pub delta_c: Option<f64>,
    pub delta_a: Option<f64>,
    pub delta_ca: Option<f64>,
    pub delta_lat: f64,
    pub z0_phase: f64,
    /// Cavity length offset in meters.
    pub cav_offset: f64,
    /// η₋/η₊.
    pub pump_ratio: f64,
    pub neglect_gamma0: bool,
    /// Fixed site phase in radians, replacing π(1 + Δ_lat/ω_lat).
    pub site_phase_override: Option<f64>,
    pub n_sublayers: usize,
    pub seed: u64,
    pub n_offsets: usize,
    pub bloch: Option<BlochSettings>,
    /// Static per-site populations loaded from a single-column CSV.
    pub weights: Option<Vec<f64>>,
}

impl SimConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let mut phys = PhysParams::default();
        phys.gamma = raw.f64_or("gamma", phys.gamma)?;
        let gamma = phys.gamma;

        // trio handling: user-supplied members are fixed; defaults fill in
        // until two are known, the third is derived
        let kappa = raw.rate("kappa", gamma)?;
        let fsr = raw.f64("fsr")?;
        let finesse = raw.f64("finesse")?;
        let supplied = [kappa.is_some(), fsr.is_some(), finesse.is_some()]
            .iter()
            .filter(|&&b| b)
            .count();
        phys.kappa = kappa.unwrap_or(0.0);
        phys.fsr = fsr.unwrap_or(0.0);
        phys.finesse = finesse.unwrap_or(0.0);
        if supplied < 2 {
            if phys.kappa == 0.0 {
                phys.kappa = PhysParams::default().kappa;
            }
            if phys.fsr == 0.0 && phys.finesse == 0.0 {
                phys.fsr = PhysParams::default().fsr;
            }
        }

        phys.waist = raw.f64_or("waist", phys.waist)?;
        phys.lambda_a = raw.f64_or("lambda_a", phys.lambda_a)?;
        phys.lambda_lat = raw.f64_or("lambda_lat", phys.lambda_lat)?;
        phys.n_atoms = raw.f64_or("n_atoms", phys.n_atoms)?;
        phys.n_sites = raw.usize_or("n_sites", phys.n_sites)?;
        phys.r_mir = raw.f64_or("r_mir", phys.r_mir)?;
        phys.r_ls = raw.f64_or("r_ls", phys.r_ls)?;
        phys.alpha_in = raw.f64_or("alpha_in", phys.alpha_in)?;
        phys.temp = raw.f64_or("temp", phys.temp)?;
        phys.v0 = raw.f64_or("v0", phys.v0)?;
        phys.geometry = match raw.get("geometry").unwrap_or("linear") {
            "linear" => Geometry::Linear,
            "ring" => Geometry::Ring,
            other => return Err(Error::Config(format!("unknown geometry `{other}`"))),
        };
        phys.g_override = raw.rate("g", gamma)?;
        phys.rabi = raw.rate("rabi", gamma)?.unwrap_or(0.0);
        phys.resolve_trio()?;
        let derived = derive(&phys)?;

        let bloch = if raw.contains("nu") {
            Some(BlochSettings {
                nu: raw.f64_or("nu", 8.0)?,
                omega_blo: raw.f64_or("omega_blo", TAU * 50.0)?,
                half_range: raw.usize_or("half_range", 96)?,
                comb_half: raw.usize_or("comb_half", 40)?,
                comb_stride: raw.usize_or("comb_stride", 4)?,
            })
        } else {
            None
        };

        let weights = match raw.path("weights_csv") {
            Some(p) => {
                let w = RawConfig::load_column_csv(&p)?;
                let probe_cfg = LatticeConfig {
                    n_sites: phys.n_sites,
                    site_phase: PI,
                    z0_phase: 0.0,
                    kzbar: 0.0,
                    weights: Some(w.clone()),
                };
                probe_cfg.validate_weights(phys.n_atoms)?;
                Some(w)
            }
            None => None,
        };

        let cfg = SimConfig {
            delta_c: raw.rate("delta_c", gamma)?,
            delta_a: raw.rate("delta_a", gamma)?,
            delta_ca: raw.rate("delta_ca", gamma)?,
            delta_lat: raw.rate("delta_lat", gamma)?.unwrap_or(0.0),
            z0_phase: raw.f64_or("z0_phase", 0.0)?,
            cav_offset: raw.f64_or("cav_offset", 0.0)? * phys.lambda_lat / 2.0,
            pump_ratio: raw.f64_or("pump_ratio", 0.0)?,
            neglect_gamma0: raw.f64_or("neglect_gamma0", 0.0)? != 0.0,
            site_phase_override: raw.f64("site_phase_over_pi")?.map(|v| v * PI),
            n_sublayers: raw.usize_or("n_sublayers", 30)?,
            seed: raw.f64_or("seed", 0.0)? as u64,
            n_offsets: raw.usize_or("n_offsets", 7)?,
            bloch,
            weights,
            phys,
            derived,
        };
        Ok(cfg)
    }

    fn spont(&self) -> Spont {
        if self.neglect_gamma0 {
            Spont::Neglected
        } else {
            Spont::Full
        }
    }

    /// Fixed-point drive used outside scans (monitor, profiles).
    pub fn drive(&self) -> DriveConfig {
        let dc = self.delta_c.unwrap_or(0.0);
        let da = self.delta_a.unwrap_or(dc - self.delta_ca.unwrap_or(0.0));
        DriveConfig {
            delta_c: dc,
            delta_a: da,
            eta_plus: C64::new(self.derived.eta, 0.0),
            eta_minus: C64::new(self.derived.eta * self.pump_ratio, 0.0),
        }
    }
}

/// One rectangular scan.
#[derive(Debug, Clone)]
pub struct ScanSpec {
    pub model: Model,
    pub x: Axis,
    pub y: Axis,
    pub channels: Vec<Channel>,
    pub config: SimConfig,
}

impl ScanSpec {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let config = SimConfig::from_raw(raw)?;
        let model = match raw.get("model").unwrap_or("odm") {
            "odm" => Model::Odm,
            "tmm" => Model::Tmm,
            other => return Err(Error::Config(format!("unknown model `{other}`"))),
        };
        let axis = |prefix: &str, def_name: &str, def: (f64, f64, usize)| -> Result<Axis> {
            let name = AxisName::parse(raw.get(&format!("{prefix}_axis")).unwrap_or(def_name))?;
            let range = raw.get(&format!("{prefix}_range"));
            let (min, max) = match range {
                Some(r) => {
                    let parts: Vec<&str> =
                        r.split([',', ' ']).filter(|s| !s.is_empty()).collect();
                    if parts.len() != 2 {
                        return Err(Error::Config(format!(
                            "{prefix}_range: expected `min max`, got `{r}`"
                        )));
                    }
                    let lo: f64 = parts[0]
                        .parse()
                        .map_err(|_| Error::Config(format!("{prefix}_range: bad number")))?;
                    let hi: f64 = parts[1]
                        .parse()
                        .map_err(|_| Error::Config(format!("{prefix}_range: bad number")))?;
                    (lo, hi)
                }
                None => (def.0, def.1),
            };
            let points = raw.usize_or(&format!("{prefix}_points"), def.2)?;
            Ok(Axis {
                name,
                min,
                max,
                points,
            })
        };
        let x = axis("x", "delta_c", (-1500.0, 1500.0, 400))?;
        let y = axis("y", "delta_lat", (-2e8, 2e8, 100))?;

        let channels = match raw.get("channels") {
            Some(list) => list
                .split(',')
                .map(|s| Channel::parse(s.trim()))
                .collect::<Result<Vec<_>>>()?,
            None => match config.phys.geometry {
                Geometry::Linear => vec![Channel::T, Channel::R, Channel::A],
                Geometry::Ring => vec![
                    Channel::TPlus,
                    Channel::TMinus,
                    Channel::RPlus,
                    Channel::RMinus,
                    Channel::A,
                ],
            },
        };
        let spec = ScanSpec {
            model,
            x,
            y,
            channels,
            config,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.points < 2 || self.y.points < 2 {
            return Err(Error::Config("each axis needs at least 2 points".into()));
        }
        if self.x.name == self.y.name {
            return Err(Error::Config("axis names must be distinct".into()));
        }
        for axis in [&self.x, &self.y] {
            if axis.name == AxisName::Time {
                if self.config.bloch.is_none() {
                    return Err(Error::Config(
                        "time axis requires Wannier-Bloch settings (key `nu`)".into(),
                    ));
                }
                if self.model == Model::Tmm {
                    return Err(Error::Config(
                        "time-resolved scans are evaluated with the Dicke model".into(),
                    ));
                }
                if self.config.weights.is_some() {
                    return Err(Error::Config(
                        "weights_csv and a time axis are mutually exclusive".into(),
                    ));
                }
            }
        }
        if self.config.weights.is_some() && self.model == Model::Tmm {
            return Err(Error::Config(
                "per-site weights are a Dicke-model feature; the transfer matrix \
                 lattice is uniform (optionally thermal)"
                    .into(),
            ));
        }
        let geometry = self.config.phys.geometry;
        for ch in &self.channels {
            let ok = match ch {
                Channel::T | Channel::R => geometry == Geometry::Linear,
                Channel::TPlus | Channel::TMinus | Channel::RPlus | Channel::RMinus => {
                    geometry == Geometry::Ring
                }
                Channel::B0 | Channel::A | Channel::Phase | Channel::AbsBPlus | Channel::NEff => {
                    true
                }
            };
            if !ok {
                return Err(Error::Config(format!(
                    "channel {} not available for {} geometry",
                    ch.as_str(),
                    geometry
                )));
            }
        }
        Ok(())
    }
}

/// Rectangular scan result with provenance header.
#[derive(Debug, Clone)]
pub struct SpectrumGrid {
    pub x: Axis,
    pub y: Axis,
    pub channels: Vec<Channel>,
    /// Fully resolved `key = value` pairs reproducing this grid.
    pub header: Vec<(String, String)>,
    /// Row-major values: `data[(iy*nx + ix)*nch + ic]`.
    pub data: Vec<f64>,
}

impl SpectrumGrid {
    pub fn get(&self, ix: usize, iy: usize, channel: Channel) -> f64 {
        let ic = self
            .channels
            .iter()
            .position(|c| *c == channel)
            .expect("channel present");
        self.data[(iy * self.x.points + ix) * self.channels.len() + ic]
    }

    pub fn channel_plane(&self, channel: Channel) -> Vec<f64> {
        let ic = self
            .channels
            .iter()
            .position(|c| *c == channel)
            .expect("channel present");
        let nch = self.channels.len();
        self.data.iter().skip(ic).step_by(nch).copied().collect()
    }

    /// CSV: `# key = value` provenance lines, a column header row, then one
    /// row per grid point (x fastest).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for (k, v) in &self.header {
            writeln!(w, "# {k} = {v}")?;
        }
        write!(w, "{},{}", self.x.name.as_str(), self.y.name.as_str())?;
        for ch in &self.channels {
            write!(w, ",{}", ch.as_str())?;
        }
        writeln!(w)?;
        let nch = self.channels.len();
        for iy in 0..self.y.points {
            for ix in 0..self.x.points {
                write!(w, "{}", fmt17(self.x.value(ix)))?;
                write!(w, ",{}", fmt17(self.y.value(iy)))?;
                let base = (iy * self.x.points + ix) * nch;
                for ic in 0..nch {
                    write!(w, ",{}", fmt17(self.data[base + ic]))?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }

    /// Header lines as a parseable configuration string.
    pub fn header_as_config(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.header {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(v);
            s.push('\n');
        }
        s
    }

    /// L2 distance between unit-normalized channel planes.
    pub fn normalized_l2_distance(&self, other: &SpectrumGrid, channel: Channel) -> f64 {
        let a = self.channel_plane(channel);
        let b = other.channel_plane(channel);
        assert_eq!(a.len(), b.len());
        let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        a.iter()
            .zip(&b)
            .map(|(&x, &y)| {
                let d = x / na - y / nb;
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// 17-significant-digit float formatting (lossless for f64).
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Resolved detunings of one grid point.
#[derive(Debug, Clone, Copy)]
struct PointCtx {
    delta_c: f64,
    delta_a: f64,
    delta_lat: f64,
    z0_phase: f64,
    cav_offset: f64,
}

fn resolve_point(spec: &ScanSpec, x_val: f64, y_val: f64) -> Result<PointCtx> {
    let cfg = &spec.config;
    let gamma = cfg.phys.gamma;
    let mut dc = cfg.delta_c;
    let mut da = cfg.delta_a;
    let mut dca = cfg.delta_ca;
    let mut dlat = cfg.delta_lat;
    let mut z0 = cfg.z0_phase;
    let mut offset = cfg.cav_offset;
    let mut axis_set = [false; 3]; // c, a, ca set by an axis
    for (axis, val) in [(&spec.x, x_val), (&spec.y, y_val)] {
        match axis.name {
            AxisName::DeltaC => {
                dc = Some(val * gamma);
                axis_set[0] = true;
            }
            AxisName::DeltaA => {
                da = Some(val * gamma);
                axis_set[1] = true;
            }
            AxisName::DeltaCa => {
                dca = Some(val * gamma);
                axis_set[2] = true;
            }
            AxisName::DeltaLat => dlat = val * gamma,
            AxisName::Time => {} // handled by the caller via evolved weights
            AxisName::Z0Phase => z0 = val,
            AxisName::CavOffset => offset = val * cfg.phys.lambda_lat / 2.0,
        }
    }
    // an axis-scanned detuning takes precedence; a fixed third member of the
    // (delta_c, delta_a, delta_ca) triple is dropped when both partners are
    // scanned, otherwise a full fixed triple is rejected
    if axis_set.iter().filter(|&&b| b).count() == 2 {
        if !axis_set[0] {
            dc = None;
        }
        if !axis_set[1] {
            da = None;
        }
        if !axis_set[2] {
            dca = None;
        }
    }
    let (delta_c, delta_a) = match (dc, da, dca) {
        (Some(c), Some(a), None) => (c, a),
        (Some(c), None, Some(ca)) => (c, c - ca),
        (None, Some(a), Some(ca)) => (a + ca, a),
        (Some(c), None, None) => (c, c), // default delta_ca = 0
        (None, Some(a), None) => (a, a),
        (None, None, Some(ca)) => (ca, 0.0),
        (None, None, None) => (0.0, 0.0),
        (Some(_), Some(_), Some(_)) => {
            return Err(Error::Config(
                "delta_c, delta_a and delta_ca jointly over-determined".into(),
            ))
        }
    };
    Ok(PointCtx {
        delta_c,
        delta_a,
        delta_lat: dlat,
        z0_phase: z0,
        cav_offset: offset,
    })
}

/// Bunching of the configured lattice at one grid point, including thermal
/// smearing and optional time-evolved weights.
fn point_bunching(cfg: &SimConfig, ctx: &PointCtx, weights: Option<&[f64]>) -> Result<Bunching> {
    let site_phase = match cfg.site_phase_override {
        Some(p) => p,
        None => PI * (1.0 + ctx.delta_lat / cfg.phys.omega_lat()),
    };
    match weights {
        Some(w) => {
            let lat = LatticeConfig {
                n_sites: w.len(),
                site_phase,
                z0_phase: ctx.z0_phase,
                kzbar: 0.0,
                weights: Some(w.to_vec()),
            };
            Ok(bunching_weighted(&lat, cfg.phys.n_atoms)?.bunching)
        }
        None => {
            let lat = LatticeConfig {
                n_sites: cfg.phys.n_sites,
                site_phase,
                z0_phase: ctx.z0_phase,
                kzbar: cfg.derived.kzbar(),
                weights: None,
            };
            Ok(bunching_thermal(&lat))
        }
    }
}

fn eval_point(spec: &ScanSpec, ctx: &PointCtx, weights: Option<&[f64]>) -> Result<Vec<f64>> {
    let cfg = &spec.config;
    let d = &cfg.derived;
    let geometry = cfg.phys.geometry;
    let b = point_bunching(cfg, ctx, weights)?;
    let n_eff = match geometry {
        Geometry::Linear => cfg.phys.n_atoms * b.b0,
        Geometry::Ring => cfg.phys.n_atoms * b.b_plus.norm(),
    };

    struct Out {
        t: f64,
        r: f64,
        a: f64,
        t_plus: f64,
        t_minus: f64,
        r_plus: f64,
        r_minus: f64,
        phase: f64,
    }

    let out = match (spec.model, geometry) {
        (Model::Odm, Geometry::Linear) => {
            let drive = DriveConfig {
                delta_c: ctx.delta_c,
                delta_a: ctx.delta_a,
                eta_plus: C64::new(d.eta, 0.0),
                eta_minus: C64::new(0.0, 0.0),
            };
            let s = steady_linear_opts(d, &drive, b.b0, cfg.phys.n_atoms, cfg.spont());
            let sp = spectra_linear(&s, &drive, d)?;
            Out {
                t: sp.t,
                r: sp.r,
                a: sp.a,
                t_plus: 0.0,
                t_minus: 0.0,
                r_plus: 0.0,
                r_minus: 0.0,
                phase: (d.kappa * s.alpha_plus / drive.eta_plus).arg(),
            }
        }
        (Model::Odm, Geometry::Ring) => {
            let drive = DriveConfig {
                delta_c: ctx.delta_c,
                delta_a: ctx.delta_a,
                eta_plus: C64::new(d.eta, 0.0),
                eta_minus: C64::new(d.eta * cfg.pump_ratio, 0.0),
            };
            let s = steady_ring_opts(d, &drive, b.b_plus, cfg.phys.n_atoms, cfg.spont());
            let sp = spectra_ring(&s, &drive, d)?;
            Out {
                t: 0.0,
                r: 0.0,
                a: sp.a,
                t_plus: sp.t_plus,
                t_minus: sp.t_minus,
                r_plus: sp.r_plus,
                r_minus: sp.r_minus,
                phase: (d.kappa * s.alpha_plus / drive.eta_plus).arg(),
            }
        }
        (Model::Tmm, Geometry::Linear) => {
            let mut layout = CavityLayout::from_params(&cfg.phys, d)?;
            layout.z0_phase = ctx.z0_phase;
            layout.cav_offset = ctx.cav_offset;
            layout.n_sublayers = cfg.n_sublayers;
            layout.site_phase_override = cfg.site_phase_override;
            let probe = Probe {
                delta_c: ctx.delta_c,
                delta_a: ctx.delta_a,
                delta_lat: ctx.delta_lat,
            };
            let pt = spectrum_point_linear(&layout, &probe)?;
            Out {
                t: pt.t,
                r: pt.r,
                a: pt.a,
                t_plus: 0.0,
                t_minus: 0.0,
                r_plus: 0.0,
                r_minus: 0.0,
                phase: pt.phase_out,
            }
        }
        (Model::Tmm, Geometry::Ring) => {
            let mut layout = RingLayout::from_params(&cfg.phys, d)?;
            layout.z0_phase = ctx.z0_phase;
            layout.cav_offset = ctx.cav_offset;
            layout.n_sublayers = cfg.n_sublayers;
            layout.site_phase_override = cfg.site_phase_override;
            let probe = Probe {
                delta_c: ctx.delta_c,
                delta_a: ctx.delta_a,
                delta_lat: ctx.delta_lat,
            };
            let pt = spectrum_point_ring(&layout, &probe, C64::new(cfg.pump_ratio, 0.0))?;
            Out {
                t: 0.0,
                r: 0.0,
                a: pt.a,
                t_plus: pt.t_plus,
                t_minus: pt.t_minus,
                r_plus: pt.r_plus,
                r_minus: pt.r_minus,
                phase: pt.phase_out,
            }
        }
    };

    Ok(spec
        .channels
        .iter()
        .map(|ch| match ch {
            Channel::T => out.t,
            Channel::R => out.r,
            Channel::A => out.a,
            Channel::TPlus => out.t_plus,
            Channel::TMinus => out.t_minus,
            Channel::RPlus => out.r_plus,
            Channel::RMinus => out.r_minus,
            Channel::Phase => out.phase,
            Channel::B0 => b.b0,
            Channel::AbsBPlus => b.b_plus.norm(),
            Channel::NEff => n_eff,
        })
        .collect())
}

/// Run one scan; deterministic output regardless of thread count.
pub fn run_scan(spec: &ScanSpec) -> Result<SpectrumGrid> {
    spec.validate()?;
    let cfg = &spec.config;

    // time-evolved site populations are shared across the non-time axis
    let time_axis_is_x = spec.x.name == AxisName::Time;
    let time_axis_is_y = spec.y.name == AxisName::Time;
    let time_weights: Option<Vec<Vec<f64>>> = if time_axis_is_x || time_axis_is_y {
        let settings = cfg
            .bloch
            .as_ref()
            .ok_or_else(|| Error::Config("time axis without Bloch settings".into()))?;
        let bloch_cfg = settings.build(cfg.phys.n_atoms)?;
        let axis = if time_axis_is_x { &spec.x } else { &spec.y };
        let period = bloch_cfg.period();
        let mut per_time = Vec::with_capacity(axis.points);
        for i in 0..axis.points {
            let t = axis.value(i) * period;
            per_time.push(evolve_populations(&bloch_cfg, t)?.weights);
        }
        Some(per_time)
    } else {
        None
    };

    let nx = spec.x.points;
    let ny = spec.y.points;
    let rows: Result<Vec<Vec<f64>>> = (0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let ix = idx % nx;
            let iy = idx / nx;
            let ctx = resolve_point(spec, spec.x.value(ix), spec.y.value(iy))?;
            let weights = time_weights
                .as_ref()
                .map(|tw| {
                    let ti = if time_axis_is_x { ix } else { iy };
                    tw[ti].as_slice()
                })
                .or(cfg.weights.as_deref());
            eval_point(spec, &ctx, weights)
        })
        .collect();
    let rows = rows?;
    let nch = spec.channels.len();
    let mut data = Vec::with_capacity(nx * ny * nch);
    for row in rows {
        data.extend_from_slice(&row);
    }
    Ok(SpectrumGrid {
        x: spec.x,
        y: spec.y,
        channels: spec.channels.clone(),
        header: grid_header(spec),
        data,
    })
}

fn grid_header(spec: &ScanSpec) -> Vec<(String, String)> {
    let cfg = &spec.config;
    let p = &cfg.phys;
    let d = &cfg.derived;
    let mut h: Vec<(String, String)> = Vec::new();
    let mut push = |k: &str, v: String| h.push((k.to_string(), v));
    push("model", spec.model.to_string());
    push("geometry", p.geometry.to_string());
    push("gamma", fmt17(p.gamma));
    push("kappa", fmt17(p.kappa));
    push("fsr", fmt17(p.fsr));
    push("finesse", fmt17(p.finesse));
    push("waist", fmt17(p.waist));
    push("lambda_a", fmt17(p.lambda_a));
    push("lambda_lat", fmt17(p.lambda_lat));
    push("n_atoms", fmt17(p.n_atoms));
    push("n_sites", p.n_sites.to_string());
    push("r_mir", fmt17(p.r_mir));
    push("r_ls", fmt17(p.r_ls));
    push("alpha_in", fmt17(p.alpha_in));
    push("temp", fmt17(p.temp));
    push("v0", fmt17(p.v0));
    push("g", fmt17(d.g));
    push("rabi", fmt17(p.rabi));
    if let Some(v) = cfg.delta_c {
        push("delta_c", fmt17(v));
    }
    if let Some(v) = cfg.delta_a {
        push("delta_a", fmt17(v));
    }
    if let Some(v) = cfg.delta_ca {
        push("delta_ca", fmt17(v));
    }
    push("delta_lat", fmt17(cfg.delta_lat));
    push("z0_phase", fmt17(cfg.z0_phase));
    push("cav_offset", fmt17(cfg.cav_offset / (p.lambda_lat / 2.0)));
    push("pump_ratio", fmt17(cfg.pump_ratio));
    push(
        "neglect_gamma0",
        if cfg.neglect_gamma0 { "1" } else { "0" }.to_string(),
    );
    if let Some(v) = cfg.site_phase_override {
        push("site_phase_over_pi", fmt17(v / PI));
    }
    push("n_sublayers", cfg.n_sublayers.to_string());
    push("seed", cfg.seed.to_string());
    push("n_offsets", cfg.n_offsets.to_string());
    if let Some(b) = &cfg.bloch {
        push("nu", fmt17(b.nu));
        push("omega_blo", fmt17(b.omega_blo));
        push("half_range", b.half_range.to_string());
        push("comb_half", b.comb_half.to_string());
        push("comb_stride", b.comb_stride.to_string());
    }
    push("x_axis", spec.x.name.as_str().to_string());
    push(
        "x_range",
        format!("{} {}", fmt17(spec.x.min), fmt17(spec.x.max)),
    );
    push("x_points", spec.x.points.to_string());
    push("y_axis", spec.y.name.as_str().to_string());
    push(
        "y_range",
        format!("{} {}", fmt17(spec.y.min), fmt17(spec.y.max)),
    );
    push("y_points", spec.y.points.to_string());
    let chans: Vec<&str> = spec.channels.iter().map(|c| c.as_str()).collect();
    push("channels", chans.join(","));
    h
}

/// Channel-wise difference statistics between the two models on one grid.
#[derive(Debug, Clone)]
pub struct DiffReport {
    pub channels: Vec<ChannelDiff>,
}

#[derive(Debug, Clone, Copy)]
pub struct ChannelDiff {
    pub channel: Channel,
    pub max_abs: f64,
    pub at_x: f64,
    pub at_y: f64,
    pub mean_abs: f64,
}

impl DiffReport {
    pub fn max_for(&self, channel: Channel) -> Option<f64> {
        self.channels
            .iter()
            .find(|c| c.channel == channel)
            .map(|c| c.max_abs)
    }
}

/// Run the scan under both models and report per-channel differences.
pub fn compare_models(spec: &ScanSpec) -> Result<(DiffReport, SpectrumGrid, SpectrumGrid)> {
    let mut odm_spec = spec.clone();
    odm_spec.model = Model::Odm;
    let mut tmm_spec = spec.clone();
    tmm_spec.model = Model::Tmm;
    let odm = run_scan(&odm_spec)?;
    let tmm = run_scan(&tmm_spec)?;
    let mut channels = Vec::new();
    for &ch in &spec.channels {
        let a = odm.channel_plane(ch);
        let b = tmm.channel_plane(ch);
        let mut max_abs = 0.0;
        let mut at = (0usize, 0usize);
        let mut sum = 0.0;
        for (i, (&x, &y)) in a.iter().zip(&b).enumerate() {
            let diff = (x - y).abs();
            sum += diff;
            if diff > max_abs {
                max_abs = diff;
                at = (i % spec.x.points, i / spec.x.points);
            }
        }
        channels.push(ChannelDiff {
            channel: ch,
            max_abs,
            at_x: spec.x.value(at.0),
            at_y: spec.y.value(at.1),
            mean_abs: sum / a.len() as f64,
        });
    }
    Ok((DiffReport { channels }, odm, tmm))
}

/// Per-offset grids of the band-filter experiment plus their element-wise sum.
#[derive(Debug, Clone)]
pub struct FilterResult {
    /// Offsets in units of λ_lat/2.
    pub offsets: Vec<f64>,
    pub grids: Vec<SpectrumGrid>,
    pub sum: SpectrumGrid,
}

/// Run the TMM grid at cavity-length offsets n/n_offsets·λ_lat/2, n = 1…,
/// and element-wise sum the results.
pub fn filter_experiment(spec: &ScanSpec, n_offsets: usize, r_mir: f64) -> Result<FilterResult> {
    if n_offsets < 1 {
        return Err(Error::Config("n_offsets must be >= 1".into()));
    }
    let mut base = spec.clone();
    base.model = Model::Tmm;
    base.config.phys.r_mir = r_mir;
    let mut offsets = Vec::with_capacity(n_offsets);
    let mut grids = Vec::with_capacity(n_offsets);
    for n in 1..=n_offsets {
        let frac = n as f64 / n_offsets as f64;
        let mut s = base.clone();
        s.config.cav_offset = frac * s.config.phys.lambda_lat / 2.0;
        offsets.push(frac);
        grids.push(run_scan(&s)?);
    }
    let mut sum = grids[0].clone();
    for g in &grids[1..] {
        for (acc, v) in sum.data.iter_mut().zip(&g.data) {
            *acc += v;
        }
    }
    sum.header
        .push(("summed_offsets".into(), n_offsets.to_string()));
    Ok(FilterResult {
        offsets,
        grids,
        sum,
    })
}

/// One row of the free-space lattice table.
#[derive(Debug, Clone, Copy)]
pub struct FreeSpaceRow {
    pub layer: usize,
    /// |α₊+α₋|² at the layer.
    pub intensity: f64,
    /// Transmission of a stack truncated after this layer.
    pub trans_after: f64,
    /// Exponential-attenuation reference |1/(1−iβ₁)|^{2·layer}.
    pub beer: f64,
    /// Hyperbolic reference 1/(1 + c·layer) with the same initial slope.
    pub ohm: f64,
}

/// Field and transmission along a bare lattice in free space (no cavity),
/// with exponential and hyperbolic reference columns. Disordered mode draws
/// the inter-layer phases from the seeded deterministic generator.
pub fn free_space_intensity(
    cfg: &SimConfig,
    delta_a: f64,
    delta_lat: f64,
    disorder: bool,
    seed: u64,
) -> Vec<FreeSpaceRow> {
    let p = &cfg.phys;
    let d = &cfg.derived;
    // free-space sheet coupling from the polarizability alone
    let k2w2 = d.k * d.k * p.waist * p.waist;
    let zeta_free = 6.0 / k2w2;
    let beta1 = d.n1 * zeta_free * crate::params::polarizability(delta_a, p.rabi, p.gamma);
    let period = PI * (1.0 + delta_lat / p.omega_lat());
    let phases: Vec<f64> = if disorder {
        let mut state = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
        (0..p.n_sites).map(|_| PI * uniform01(&mut state)).collect()
    } else {
        vec![period; p.n_sites]
    };
    let profile = bare_stack_profile(beta1, &phases);
    let gamma_beer = 2.0 * (C64::new(1.0, 0.0) - C64::i() * beta1).norm().ln();
    profile
        .iter()
        .map(|pt| {
            let j = pt.layer as f64;
            FreeSpaceRow {
                layer: pt.layer,
                intensity: pt.intensity,
                trans_after: pt.trans_after,
                beer: (-gamma_beer * j).exp(),
                ohm: 1.0 / (1.0 + gamma_beer * j),
            }
        })
        .collect()
}

/// Lattice-induced shift of the cavity resonance.
#[derive(Debug, Clone, Copy)]
pub struct ShiftReport {
    /// δ_fsr·N₁·|β₀| in angular units (rad/s).
    pub shift: f64,
    pub ratio_to_kappa: f64,
}

pub fn resonance_shift_report(d: &DerivedParams) -> ShiftReport {
    let shift = TAU * d.fsr * d.n1 * d.beta0.norm();
    ShiftReport {
        shift,
        ratio_to_kappa: shift / d.kappa,
    }
}

/// Deterministic 64-bit generator for disorder realizations.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform sample in [0, 1).
pub fn uniform01(state: &mut u64) -> f64 {
    (splitmix64(state) >> 11) as f64 / (1u64 << 53) as f64
}

/// CSV writer for monitor time series:
/// `t_over_Tblo, b0_or_abs_bplus, N_eff, T_plus, T_minus`.
pub fn write_monitor_csv<W: Write>(
    mut w: W,
    points: &[crate::bloch::MonitorPoint],
    geometry: Geometry,
) -> Result<()> {
    writeln!(w, "t_over_Tblo,b0_or_abs_bplus,N_eff,T_plus,T_minus")?;
    for pt in points {
        let b = match geometry {
            Geometry::Linear => pt.b0,
            Geometry::Ring => pt.abs_b_plus,
        };
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt17(pt.t_over_period),
            fmt17(b),
            fmt17(pt.n_eff),
            fmt17(pt.t_plus),
            fmt17(pt.t_minus)
        )?;
    }
    Ok(())
}

/// CSV writer for intensity profiles:
/// `z_over_lambda, abs_ap2, abs_am2, abs_sum2, flux, density_weight`.
pub fn write_profile_csv<W: Write>(mut w: W, profile: &crate::tmm::IntensityProfile) -> Result<()> {
    writeln!(w, "z_over_lambda,abs_ap2,abs_am2,abs_sum2,flux,density_weight")?;
    for row in &profile.rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt17(row.z_over_lambda),
            fmt17(row.pair.plus.norm_sqr()),
            fmt17(row.pair.minus.norm_sqr()),
            fmt17(row.intensity()),
            fmt17(row.flux()),
            fmt17(row.density_weight)
        )?;
    }
    Ok(())
}

/// CSV writer for one-dimensional ring spectra:
/// `delta_c_over_gamma, T_plus, T_minus, R_plus, R_minus, A`.
pub fn write_ring_line_csv<W: Write>(
    mut w: W,
    rows: &[(f64, crate::ring::RingTmmPoint)],
) -> Result<()> {
    writeln!(w, "delta_c_over_gamma,T_plus,T_minus,R_plus,R_minus,A")?;
    for (dc_over_gamma, pt) in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt17(*dc_over_gamma),
            fmt17(pt.t_plus),
            fmt17(pt.t_minus),
            fmt17(pt.r_plus),
            fmt17(pt.r_minus),
            fmt17(pt.a)
        )?;
    }
    Ok(())
}

/// CSV writer for the free-space lattice table.
pub fn write_free_space_csv<W: Write>(mut w: W, rows: &[FreeSpaceRow]) -> Result<()> {
    writeln!(w, "layer,intensity,trans_after,beer,ohm")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.layer,
            fmt17(r.intensity),
            fmt17(r.trans_after),
            fmt17(r.beer),
            fmt17(r.ohm)
        )?;
    }
    Ok(())
}
