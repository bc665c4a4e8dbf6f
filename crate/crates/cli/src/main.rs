//! Command-line front end: deterministic parameter sweeps, model comparison,
//! intensity profiles, Bloch-oscillation monitors and parameter reports.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64 as C64;

use cavlat_core::bunching::LatticeConfig;
use cavlat_core::config::RawConfig;
use cavlat_core::params::{Geometry, PI, TAU};
use cavlat_core::ring::{ring_intensity_profile, spectrum_point_ring, RingLayout};
use cavlat_core::scan::{
    compare_models, filter_experiment, free_space_intensity, resonance_shift_report, run_scan,
    write_free_space_csv, write_monitor_csv, write_profile_csv, write_ring_line_csv, AxisName,
    ScanSpec, SimConfig,
};
use cavlat_core::tmm::{intensity_profile, CavityLayout, Probe};
use cavlat_core::{Error, Result};

#[derive(Parser)]
#[command(name = "cavlat", version, about = "Optical response of cold-atom lattices in cavities")]
struct Cli {
    /// Flat key-value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the configured model (odm | tmm).
    #[arg(long, global = true)]
    model: Option<String>,

    /// Override the configured geometry (linear | ring).
    #[arg(long, global = true)]
    geometry: Option<String>,

    /// Output path (CSV); experiments with several outputs derive suffixed
    /// names from it.
    #[arg(long, global = true, default_value = "out.csv")]
    out: PathBuf,

    /// Worker threads; defaults to all cores. The output is identical for
    /// any thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the configured 2D scan and write the grid CSV.
    Spectrum {
        /// Emit a 1D ring spectrum (delta_c line scan) in the dedicated
        /// ring CSV format instead of a grid.
        #[arg(long)]
        line: bool,
    },
    /// Avoided-crossing map: like `spectrum`, with delta_a × delta_ca axes
    /// unless the config names others.
    Avoided,
    /// Intracavity intensity profile at the configured probe point, or the
    /// free-space lattice table with `--free-space`.
    Intensity {
        #[arg(long)]
        free_space: bool,
    },
    /// Wannier-Bloch monitor time series.
    Bloch,
    /// Band-filter experiment: one grid per cavity-length offset plus their
    /// sum.
    Filter,
    /// Run both models on the configured scan and print difference
    /// statistics.
    Compare,
    /// Print derived coupling quantities and the lattice-induced resonance
    /// shift.
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn load_raw(cli: &Cli) -> Result<RawConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let mut raw = RawConfig::from_file(path)?;
    if let Some(m) = &cli.model {
        raw.set("model", m);
    }
    if let Some(g) = &cli.geometry {
        raw.set("geometry", g);
    }
    Ok(raw)
}

fn writer(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::Spectrum { line } => {
            let raw = load_raw(cli)?;
            if *line {
                return ring_line(cli, &raw);
            }
            let spec = ScanSpec::from_raw(&raw)?;
            let grid = run_scan(&spec)?;
            grid.write_csv(writer(&cli.out)?)?;
            eprintln!(
                "wrote {} ({} x {} points, {} channels)",
                cli.out.display(),
                spec.x.points,
                spec.y.points,
                spec.channels.len()
            );
            Ok(())
        }
        Cmd::Avoided => {
            let mut raw = load_raw(cli)?;
            if raw.get("x_axis").is_none() {
                raw.set("x_axis", "delta_a");
                raw.set("x_range", "-1500 1500");
            }
            if raw.get("y_axis").is_none() {
                raw.set("y_axis", "delta_ca");
                raw.set("y_range", "-1500 1500");
            }
            let spec = ScanSpec::from_raw(&raw)?;
            let grid = run_scan(&spec)?;
            grid.write_csv(writer(&cli.out)?)?;
            eprintln!("wrote {}", cli.out.display());
            Ok(())
        }
        Cmd::Intensity { free_space } => {
            let raw = load_raw(cli)?;
            let cfg = SimConfig::from_raw(&raw)?;
            let drive = cfg.drive();
            if *free_space {
                let disorder = raw.f64_or("disorder", 0.0)? != 0.0;
                let rows =
                    free_space_intensity(&cfg, drive.delta_a, cfg.delta_lat, disorder, cfg.seed);
                write_free_space_csv(writer(&cli.out)?, &rows)?;
            } else {
                let probe = Probe {
                    delta_c: drive.delta_c,
                    delta_a: drive.delta_a,
                    delta_lat: cfg.delta_lat,
                };
                let profile = match cfg.phys.geometry {
                    Geometry::Linear => {
                        let mut layout = CavityLayout::from_params(&cfg.phys, &cfg.derived)?;
                        layout.z0_phase = cfg.z0_phase;
                        layout.cav_offset = cfg.cav_offset;
                        layout.n_sublayers = cfg.n_sublayers;
                        layout.site_phase_override = cfg.site_phase_override;
                        intensity_profile(&layout, &probe)?
                    }
                    Geometry::Ring => {
                        let mut layout = RingLayout::from_params(&cfg.phys, &cfg.derived)?;
                        layout.z0_phase = cfg.z0_phase;
                        layout.cav_offset = cfg.cav_offset;
                        layout.n_sublayers = cfg.n_sublayers;
                        layout.site_phase_override = cfg.site_phase_override;
                        let input = cavlat_core::mat2::AmpPair::new(
                            C64::new(1.0, 0.0),
                            C64::new(cfg.pump_ratio, 0.0),
                        );
                        ring_intensity_profile(&layout, &probe, input)?
                    }
                };
                write_profile_csv(writer(&cli.out)?, &profile)?;
            }
            eprintln!("wrote {}", cli.out.display());
            Ok(())
        }
        Cmd::Bloch => {
            let raw = load_raw(cli)?;
            let cfg = SimConfig::from_raw(&raw)?;
            let settings = cfg
                .bloch
                .as_ref()
                .ok_or_else(|| Error::Config("bloch monitor requires the `nu` key".into()))?;
            let bloch_cfg = settings.build(cfg.phys.n_atoms)?;
            if cfg.phys.n_sites != bloch_cfg.n_sites() {
                return Err(Error::Config(format!(
                    "n_sites = {} must equal the evolution range 2*half_range+1 = {}",
                    cfg.phys.n_sites,
                    bloch_cfg.n_sites()
                )));
            }
            let site_phase = cfg
                .site_phase_override
                .unwrap_or(PI * (1.0 + cfg.delta_lat / cfg.phys.omega_lat()));
            let lattice = LatticeConfig {
                n_sites: bloch_cfg.n_sites(),
                site_phase,
                z0_phase: cfg.z0_phase,
                kzbar: 0.0,
                weights: None,
            };
            let t_points = raw.usize_or("t_points", 160)?;
            let t_periods = raw.f64_or("t_periods", 2.0)?;
            let period = bloch_cfg.period();
            let times: Vec<f64> = (0..t_points)
                .map(|i| t_periods * period * i as f64 / t_points as f64)
                .collect();
            let pts = cavlat_core::bloch::monitor_timeseries(
                &bloch_cfg,
                &lattice,
                &cfg.derived,
                &cfg.drive(),
                cfg.phys.geometry,
                &times,
            )?;
            write_monitor_csv(writer(&cli.out)?, &pts, cfg.phys.geometry)?;
            eprintln!("wrote {}", cli.out.display());
            Ok(())
        }
        Cmd::Filter => {
            let raw = load_raw(cli)?;
            let spec = ScanSpec::from_raw(&raw)?;
            let n_offsets = spec.config.n_offsets;
            let r_mir = spec.config.phys.r_mir;
            let result = filter_experiment(&spec, n_offsets, r_mir)?;
            for (i, grid) in result.grids.iter().enumerate() {
                let path = with_suffix(&cli.out, &format!("off{}", i + 1));
                grid.write_csv(writer(&path)?)?;
                eprintln!("wrote {}", path.display());
            }
            let sum_path = with_suffix(&cli.out, "sum");
            result.sum.write_csv(writer(&sum_path)?)?;
            eprintln!("wrote {}", sum_path.display());
            Ok(())
        }
        Cmd::Compare => {
            let raw = load_raw(cli)?;
            let spec = ScanSpec::from_raw(&raw)?;
            let (report, _, _) = compare_models(&spec)?;
            println!("model comparison on {} x {} grid:", spec.x.points, spec.y.points);
            for ch in &report.channels {
                println!(
                    "  {:9} max |diff| = {:.6e} at ({} = {:.6e}, {} = {:.6e}), mean = {:.6e}",
                    ch.channel.as_str(),
                    ch.max_abs,
                    spec.x.name.as_str(),
                    ch.at_x,
                    spec.y.name.as_str(),
                    ch.at_y,
                    ch.mean_abs
                );
            }
            Ok(())
        }
        Cmd::Report => {
            let raw = load_raw(cli)?;
            let cfg = SimConfig::from_raw(&raw)?;
            let d = &cfg.derived;
            let shift = resonance_shift_report(d);
            println!("resolved parameters:");
            println!("  Gamma/2pi      = {:.6} kHz", d.gamma / TAU / 1e3);
            println!("  kappa/2pi      = {:.6} MHz", d.kappa / TAU / 1e6);
            println!("  fsr            = {:.6} GHz", d.fsr / 1e9);
            println!("  finesse        = {:.3}", d.finesse);
            println!("  g/Gamma        = {:.6}", d.g / d.gamma);
            println!("  cooperativity  = {:.6e}", d.upsilon);
            println!("  |beta0|        = {:.6e}", d.beta0.norm());
            println!("  N1*|beta0|     = {:.6e}", d.n1 * d.beta0.norm());
            println!("  optical density= {:.4}", d.od);
            println!("  eta            = {:.6e} rad/s", d.eta);
            println!("  k*zbar         = {:.6}", d.kzbar());
            println!(
                "  lattice shift  = 2pi * {:.4} MHz ({:.3} kappa)",
                shift.shift / TAU / 1e6,
                shift.ratio_to_kappa
            );
            Ok(())
        }
    }
}

fn ring_line(cli: &Cli, raw: &RawConfig) -> Result<()> {
    let spec = ScanSpec::from_raw(raw)?;
    let cfg = &spec.config;
    if cfg.phys.geometry != Geometry::Ring {
        return Err(Error::Config("--line emits the ring spectrum format".into()));
    }
    if spec.x.name != AxisName::DeltaC {
        return Err(Error::Config("--line scans delta_c on the x axis".into()));
    }
    let mut layout = RingLayout::from_params(&cfg.phys, &cfg.derived)?;
    layout.z0_phase = cfg.z0_phase;
    layout.cav_offset = cfg.cav_offset;
    layout.n_sublayers = cfg.n_sublayers;
    layout.site_phase_override = cfg.site_phase_override;
    let gamma = cfg.phys.gamma;
    let mut rows = Vec::with_capacity(spec.x.points);
    for i in 0..spec.x.points {
        let dc_over_gamma = spec.x.value(i);
        let dc = dc_over_gamma * gamma;
        let da = dc - cfg.delta_ca.unwrap_or(0.0);
        let probe = Probe {
            delta_c: dc,
            delta_a: da,
            delta_lat: cfg.delta_lat,
        };
        rows.push((
            dc_over_gamma,
            spectrum_point_ring(&layout, &probe, C64::new(cfg.pump_ratio, 0.0))?,
        ));
    }
    write_ring_line_csv(writer(&cli.out)?, &rows)?;
    eprintln!("wrote {}", cli.out.display());
    Ok(())
}
