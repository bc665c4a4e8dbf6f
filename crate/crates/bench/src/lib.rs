//! Shared setup for the criterion benchmarks.

use cavlat_core::config::RawConfig;
use cavlat_core::scan::{ScanSpec, SimConfig};

pub const LOW_OD_LINEAR: &str = "
gamma = 46495.57127312894
fsr = 7.4e9
kappa = 14814822.23706488
r_mir = 0.998
waist = 70e-6
lambda_a = 689e-9
lambda_lat = 689e-9
n_atoms = 5e5
n_sites = 301
g_over_gamma = 1
geometry = linear
delta_ca_over_gamma = 0
";

pub fn low_od_config() -> SimConfig {
    SimConfig::from_raw(&RawConfig::parse(LOW_OD_LINEAR).unwrap()).unwrap()
}

pub fn low_od_spec(extra: &str) -> ScanSpec {
    let raw = RawConfig::parse(&format!("{LOW_OD_LINEAR}\n{extra}")).unwrap();
    ScanSpec::from_raw(&raw).unwrap()
}
