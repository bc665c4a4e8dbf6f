//! Wannier-Bloch time evolution of site populations and the cavity monitor
//! signals derived from the resulting time-dependent bunching.
//!
//! The evolution operator over the site index j is
//! U_{jj'}(t) = exp[i(j−j')(π−ωt)/2 − i·j'·ωt]·J_{j−j'}(2ν·sin(ωt/2)),
//! unitary on the infinite lattice and truncated here to a finite symmetric
//! range; the truncation leak is reported as a diagnostic.

use num_complex::Complex64 as C64;

use crate::bunching::{bunching_weighted, LatticeConfig, WeightedBunching};
use crate::error::{Error, Result};
use crate::odm::{spectra_linear, spectra_ring, steady_linear, steady_ring, DriveConfig};
use crate::params::{DerivedParams, Geometry, PI};

/// Bessel function of the first kind, integer order, by backward recurrence
/// with normalization. Positive and moderate arguments; |error| below 1e-12
/// for |x| ≤ 50 and any order.
pub fn bessel_jn(n: i64, x: f64) -> f64 {
    let n_abs = n.unsigned_abs() as usize;
    let row = bessel_jn_row(x.abs(), n_abs);
    let mut v = row[n_abs];
    // parity relations for negative order and negative argument
    if n < 0 && n_abs % 2 == 1 {
        v = -v;
    }
    if x < 0.0 && n_abs % 2 == 1 {
        v = -v;
    }
    v
}

/// J_0(x) … J_{n_max}(x) for x ≥ 0 in one backward sweep.
pub fn bessel_jn_row(x: f64, n_max: usize) -> Vec<f64> {
    if x == 0.0 {
        let mut row = vec![0.0; n_max + 1];
        row[0] = 1.0;
        return row;
    }
    // start the downward recurrence well above both the order and the
    // argument so the spurious solution has decayed away
    let start = n_max.max(x as usize) + 52;
    let start = start + (start % 2); // even
    let mut jp = 0.0f64; // J_{m+1}
    let mut jc = 1e-300f64; // J_m (arbitrary tiny seed)
    let mut row = vec![0.0; n_max + 1];
    let mut norm = 0.0f64; // accumulates J_0 + 2 sum J_{2k}
    for m in (0..=start).rev() {
        let jm = (2.0 * (m as f64 + 1.0) / x) * jc - jp; // J_m
        jp = jc;
        jc = jm;
        if jc.abs() > 1e250 {
            // rescale mid-recurrence to avoid overflow
            jc *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            for r in row.iter_mut() {
                *r *= 1e-250;
            }
        }
        if m <= n_max {
            row[m] = jc;
        }
        if m % 2 == 0 {
            norm += if m == 0 { jc } else { 2.0 * jc };
        }
    }
    for r in row.iter_mut() {
        *r /= norm;
    }
    row
}

/// Spreading dynamics of one symmetric site range j ∈ [−half_range, half_range].
#[derive(Debug, Clone)]
pub struct BlochConfig {
    /// Maximum spreading ν, in lattice sites.
    pub nu: f64,
    /// Bloch oscillation angular frequency (rad/s).
    pub omega_blo: f64,
    /// Initial site amplitudes c_j(0), length 2·half_range + 1, with
    /// Σ|c_j|² = N.
    pub c0: Vec<C64>,
    pub half_range: usize,
}

impl BlochConfig {
    pub fn n_sites(&self) -> usize {
        2 * self.half_range + 1
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega_blo
    }

    /// Total atom number carried by the initial state.
    pub fn total(&self) -> f64 {
        self.c0.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Real non-negative amplitudes populating every `stride`-th site of
    /// |j| ≤ comb_half, normalized to n_total, embedded in the wider range.
    pub fn comb(
        half_range: usize,
        comb_half: usize,
        stride: usize,
        n_total: f64,
        nu: f64,
        omega_blo: f64,
    ) -> Result<Self> {
        if comb_half > half_range || stride == 0 {
            return Err(Error::Config("comb does not fit the site range".into()));
        }
        let n_sites = 2 * half_range + 1;
        let mut c0 = vec![C64::new(0.0, 0.0); n_sites];
        let mut occupied = 0usize;
        for j in -(comb_half as i64)..=comb_half as i64 {
            if j.rem_euclid(stride as i64) == 0 {
                occupied += 1;
            }
        }
        let amp = (n_total / occupied as f64).sqrt();
        for j in -(comb_half as i64)..=comb_half as i64 {
            if j.rem_euclid(stride as i64) == 0 {
                c0[(j + half_range as i64) as usize] = C64::new(amp, 0.0);
            }
        }
        Ok(BlochConfig {
            nu,
            omega_blo,
            c0,
            half_range,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.c0.len() != self.n_sites() {
            return Err(Error::Config(format!(
                "c0 length {} != site count {}",
                self.c0.len(),
                self.n_sites()
            )));
        }
        if self.omega_blo <= 0.0 {
            return Err(Error::Config("omega_blo must be > 0".into()));
        }
        Ok(())
    }
}

/// Dense evolution operator over the truncated site range.
#[derive(Debug, Clone)]
pub struct EvolutionOp {
    pub dim: usize,
    /// Row-major U_{jj'}; indices offset by half_range.
    pub data: Vec<C64>,
}

impl EvolutionOp {
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.data[r * self.dim..(r + 1) * self.dim];
            let mut acc = C64::new(0.0, 0.0);
            for (m, &c) in row.iter().zip(v) {
                acc += m * c;
            }
            *o = acc;
        }
        out
    }

    /// Largest entry of |U†U − 1| over columns at least `margin` sites away
    /// from the truncation edge. Edge columns are not unitary by
    /// construction (their norm leaks past the range); interior columns
    /// recover the infinite-lattice unitarity once `margin` exceeds the
    /// Bessel spreading reach.
    pub fn unitarity_defect(&self, margin: usize) -> f64 {
        let n = self.dim;
        if 2 * margin >= n {
            return 0.0;
        }
        let cols: Vec<usize> = (margin..n - margin).collect();
        let mut worst = 0.0f64;
        for &i in &cols {
            for &j in &cols {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.data[k * n + i].conj() * self.data[k * n + j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - expect).norm());
            }
        }
        worst
    }
}

/// U(t) on the truncated range.
pub fn evolution_operator(cfg: &BlochConfig, t: f64) -> EvolutionOp {
    let dim = cfg.n_sites();
    let half = cfg.half_range as i64;
    let wt = cfg.omega_blo * t;
    let arg = 2.0 * cfg.nu * (0.5 * wt).sin();
    let max_order = 2 * cfg.half_range;
    let bessel = bessel_jn_row(arg.abs(), max_order);
    let mut data = vec![C64::new(0.0, 0.0); dim * dim];
    for r in 0..dim {
        let j = r as i64 - half;
        for c in 0..dim {
            let jp = c as i64 - half;
            let dj = j - jp;
            let mut bv = bessel[dj.unsigned_abs() as usize];
            if dj < 0 && dj.rem_euclid(2) == 1 {
                bv = -bv;
            }
            if arg < 0.0 && dj.rem_euclid(2) == 1 {
                bv = -bv;
            }
            let phase = 0.5 * dj as f64 * (PI - wt) - jp as f64 * wt;
            data[r * dim + c] = C64::from_polar(1.0, phase) * bv;
        }
    }
    EvolutionOp { dim, data }
}

/// Site populations |c_j(t)|² and the truncation leak.
#[derive(Debug, Clone)]
pub struct Populations {
    pub weights: Vec<f64>,
    /// Fraction of the norm lost past the range edge, 1 − Σ|c(t)|²/N.
    pub leak_fraction: f64,
}

pub fn evolve_populations(cfg: &BlochConfig, t: f64) -> Result<Populations> {
    cfg.validate()?;
    let u = evolution_operator(cfg, t);
    let c = u.apply(&cfg.c0);
    let weights: Vec<f64> = c.iter().map(|a| a.norm_sqr()).collect();
    let total = cfg.total();
    let now: f64 = weights.iter().sum();
    Ok(Populations {
        weights,
        leak_fraction: if total > 0.0 { 1.0 - now / total } else { 0.0 },
    })
}

/// One sample of the cavity monitor.
#[derive(Debug, Clone, Copy)]
pub struct MonitorPoint {
    /// Time in units of the Bloch period.
    pub t_over_period: f64,
    pub b0: f64,
    pub abs_b_plus: f64,
    /// Effective atom number N·b coupling to the probed mode (b₀ for a
    /// linear cavity, |b₊| for a ring).
    pub n_eff: f64,
    pub t_plus: f64,
    /// 0 for a linear cavity.
    pub t_minus: f64,
    pub leak_fraction: f64,
}

/// Monitor traces: evolve the populations, form the weighted bunching on the
/// probe lattice and evaluate one steady-state spectrum point per time.
pub fn monitor_timeseries(
    cfg: &BlochConfig,
    lattice: &LatticeConfig,
    d: &DerivedParams,
    drive: &DriveConfig,
    geometry: Geometry,
    times: &[f64],
) -> Result<Vec<MonitorPoint>> {
    cfg.validate()?;
    if lattice.n_sites != cfg.n_sites() {
        return Err(Error::Config(format!(
            "lattice sites {} != evolution sites {}",
            lattice.n_sites,
            cfg.n_sites()
        )));
    }
    let n_total = cfg.total();
    let period = cfg.period();
    times
        .iter()
        .map(|&t| {
            let pops = evolve_populations(cfg, t)?;
            let mut wl = lattice.clone();
            wl.weights = Some(pops.weights.clone());
            let wb: WeightedBunching = bunching_weighted(&wl, n_total)?;
            let (t_plus, t_minus, n_eff) = match geometry {
                Geometry::Linear => {
                    let s = steady_linear(d, drive, wb.bunching.b0, n_total);
                    let sp = spectra_linear(&s, drive, d)?;
                    (sp.t, 0.0, wb.n_eff_0)
                }
                Geometry::Ring => {
                    let s = steady_ring(d, drive, wb.bunching.b_plus, n_total);
                    let sp = spectra_ring(&s, drive, d)?;
                    (sp.t_plus, sp.t_minus, wb.n_eff_plus)
                }
            };
            Ok(MonitorPoint {
                t_over_period: t / period,
                b0: wb.bunching.b0,
                abs_b_plus: wb.bunching.b_plus.norm(),
                n_eff,
                t_plus,
                t_minus,
                leak_fraction: pops.leak_fraction,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive, PhysParams, TAU};

    /// Integral representation (1/π)∫₀^π cos(nθ − x sinθ)dθ by Simpson's
    /// rule; independent oracle for the recurrence implementation.
    fn bessel_quadrature(n: i64, x: f64) -> f64 {
        let steps = 20_000; // even
        let h = PI / steps as f64;
        let f = |theta: f64| (n as f64 * theta - x * theta.sin()).cos();
        let mut acc = f(0.0) + f(PI);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        acc * h / (3.0 * PI)
    }

    #[test]
    fn bessel_against_quadrature_oracle() {
        for &x in &[0.1, 1.0, 7.3, 16.0, 31.9] {
            for n in [0i64, 1, 2, 5, 17, 40] {
                let got = bessel_jn(n, x);
                let want = bessel_quadrature(n, x);
                assert!(
                    (got - want).abs() < 1e-10,
                    "J_{n}({x}): {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn bessel_parity_and_zero_argument() {
        assert_eq!(bessel_jn(0, 0.0), 1.0);
        assert_eq!(bessel_jn(3, 0.0), 0.0);
        let x = 4.7;
        assert!((bessel_jn(-3, x) + bessel_jn(3, x)).abs() < 1e-15);
        assert!((bessel_jn(-4, x) - bessel_jn(4, x)).abs() < 1e-15);
        assert!((bessel_jn(1, -x) + bessel_jn(1, x)).abs() < 1e-15);
    }

    #[test]
    fn bessel_sum_rule() {
        // J_0^2 + 2 sum J_n^2 = 1, checked at the largest argument in use
        let x = 16.0;
        let row = bessel_jn_row(x, 60);
        let mut s = row[0] * row[0];
        for v in &row[1..] {
            s += 2.0 * v * v;
        }
        assert!((s - 1.0).abs() < 1e-12, "sum rule defect {}", (s - 1.0).abs());
    }

    fn single_site_cfg(nu: f64, half_range: usize) -> BlochConfig {
        let n_sites = 2 * half_range + 1;
        let mut c0 = vec![C64::new(0.0, 0.0); n_sites];
        c0[half_range] = C64::new(1.0, 0.0);
        BlochConfig {
            nu,
            omega_blo: TAU * 50.0,
            c0,
            half_range,
        }
    }

    #[test]
    fn evolution_identity_at_zero_and_full_period() {
        let cfg = single_site_cfg(8.0, 40);
        for t in [0.0, cfg.period()] {
            let u = evolution_operator(&cfg, t);
            for r in 0..u.dim {
                for c in 0..u.dim {
                    let expect = if r == c { 1.0 } else { 0.0 };
                    let v = u.data[r * u.dim + c];
                    assert!(
                        (v - expect).norm() < 1e-9,
                        "t={t}: U[{r}][{c}] = {v}"
                    );
                }
            }
        }
    }

    #[test]
    fn unitarity_on_period_grid() {
        // nu = 16: Bessel argument up to 32, spreading reach well inside the
        // 64-site margin
        let cfg = single_site_cfg(16.0, 100);
        let margin = 64;
        for i in 0..100 {
            let t = cfg.period() * i as f64 / 99.0;
            let u = evolution_operator(&cfg, t);
            // interior column norms every point, full defect every tenth
            for c in margin..u.dim - margin {
                let s: f64 = (0..u.dim).map(|r| u.data[r * u.dim + c].norm_sqr()).sum();
                assert!((s - 1.0).abs() < 1e-9, "t={t} col={c}: {s}");
            }
            if i % 10 == 0 {
                assert!(u.unitarity_defect(margin) < 1e-9, "t = {t}");
            }
        }
    }

    #[test]
    fn populations_conserved_and_refocused() {
        let cfg = single_site_cfg(8.0, 48);
        let period = cfg.period();
        for frac in [0.13, 0.5, 0.77] {
            let p = evolve_populations(&cfg, frac * period).unwrap();
            assert!(p.leak_fraction.abs() < 1e-9, "leak {}", p.leak_fraction);
        }
        let back = evolve_populations(&cfg, period).unwrap();
        assert!((back.weights[cfg.half_range] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn spreading_envelope_reaches_two_nu_sites() {
        let cfg = single_site_cfg(8.0, 48);
        let p = evolve_populations(&cfg, 0.5 * cfg.period()).unwrap();
        // at half a period the argument is 2 nu = 16: occupation out to
        // about +/- 16 sites, negligible beyond
        let spread: f64 = (0..=16)
            .map(|off| p.weights[cfg.half_range + off] + p.weights[cfg.half_range - off])
            .sum();
        assert!(spread > 0.99, "inside +/-16: {spread}");
        assert!(p.weights[cfg.half_range + 14] > 1e-6);
        assert!(p.weights[cfg.half_range + 30] < 1e-8);
    }

    #[test]
    fn homogeneous_population_is_stationary() {
        let half = 40;
        let n_sites = 2 * half + 1;
        let cfg = BlochConfig {
            nu: 6.0,
            omega_blo: TAU * 50.0,
            c0: vec![C64::new(1.0, 0.0); n_sites],
            half_range: half,
        };
        let p = evolve_populations(&cfg, 0.31 * cfg.period()).unwrap();
        // interior sites away from the range edges keep their population
        for m in (half - 10)..=(half + 10) {
            assert!(
                (p.weights[m] - 1.0).abs() < 1e-6,
                "site {}: {}",
                m as i64 - half as i64,
                p.weights[m]
            );
        }
    }

    fn monitor_setup() -> (BlochConfig, LatticeConfig, DerivedParams, DriveConfig) {
        let gamma = TAU * 7.4e3;
        let n_total = 2e6;
        let cfg = BlochConfig::comb(96, 40, 4, n_total, 8.0, TAU * 50.0).unwrap();
        let lattice = LatticeConfig {
            n_sites: cfg.n_sites(),
            site_phase: 0.75 * PI,
            z0_phase: 0.0,
            kzbar: 0.0,
            weights: None,
        };
        let mut p = PhysParams {
            n_atoms: n_total,
            n_sites: cfg.n_sites(),
            g_override: Some(gamma),
            finesse: 0.0,
            geometry: Geometry::Ring,
            ..PhysParams::default()
        };
        p.kappa = p.fsr * (1.0 - 0.998) / 0.998f64.sqrt();
        p.resolve_trio().unwrap();
        let d = derive(&p).unwrap();
        let drive = DriveConfig {
            delta_c: -d.g * n_total.sqrt(),
            delta_a: -d.g * n_total.sqrt(),
            eta_plus: C64::new(d.eta, 0.0),
            eta_minus: C64::new(0.0, 0.0),
        };
        (cfg, lattice, d, drive)
    }

    #[test]
    fn comb_starts_perfectly_bunched() {
        let (cfg, lattice, d, drive) = monitor_setup();
        let pts =
            monitor_timeseries(&cfg, &lattice, &d, &drive, Geometry::Ring, &[0.0]).unwrap();
        assert!((pts[0].abs_b_plus - 1.0).abs() < 1e-9);
        assert!((pts[0].n_eff - 2e6).abs() < 1e-3 * 2e6);
    }

    #[test]
    fn monitor_traces_periodic_and_backscatter_gated() {
        let (cfg, lattice, d, drive) = monitor_setup();
        let period = cfg.period();
        let times: Vec<f64> = (0..160).map(|i| period * i as f64 / 80.0).collect();
        let pts =
            monitor_timeseries(&cfg, &lattice, &d, &drive, Geometry::Ring, &times).unwrap();
        // periodicity trace-to-trace
        for i in 0..80 {
            assert!((pts[i].t_plus - pts[i + 80].t_plus).abs() < 1e-6);
            assert!((pts[i].t_minus - pts[i + 80].t_minus).abs() < 1e-6);
            assert!((pts[i].abs_b_plus - pts[i + 80].abs_b_plus).abs() < 1e-6);
        }
        // the reverse mode only lights up when the lattice is bunched
        for pt in &pts {
            if pt.abs_b_plus < 1e-6 {
                assert!(pt.t_minus < 1e-6, "T- = {} at b+ = {}", pt.t_minus, pt.abs_b_plus);
            }
        }
        // and it does light up at refocusing instants
        assert!(pts[0].t_minus > 1e-3);
    }

    #[test]
    fn homogeneous_comb_gives_constant_traces() {
        let (cfg0, mut lattice, d, drive) = monitor_setup();
        let half = cfg0.half_range;
        let n_sites = 2 * half + 1;
        let n_total = 2e6;
        let amp = (n_total / n_sites as f64).sqrt();
        let cfg = BlochConfig {
            nu: 8.0,
            omega_blo: cfg0.omega_blo,
            c0: vec![C64::new(amp, 0.0); n_sites],
            half_range: half,
        };
        lattice.n_sites = n_sites;
        let period = cfg.period();
        let times: Vec<f64> = (0..40).map(|i| period * i as f64 / 40.0).collect();
        let pts =
            monitor_timeseries(&cfg, &lattice, &d, &drive, Geometry::Ring, &times).unwrap();
        // interior loss and gain balance; the truncated range edges
        // contribute a small residual drift
        let t0 = pts[0].t_plus;
        for pt in &pts {
            assert!((pt.t_plus - t0).abs() < 1e-2 * t0.max(1e-12), "{} vs {t0}", pt.t_plus);
        }
    }

    #[test]
    fn monitor_rejects_mismatched_lattice() {
        let (cfg, mut lattice, d, drive) = monitor_setup();
        lattice.n_sites += 1;
        assert!(
            monitor_timeseries(&cfg, &lattice, &d, &drive, Geometry::Ring, &[0.0]).is_err()
        );
    }
}
