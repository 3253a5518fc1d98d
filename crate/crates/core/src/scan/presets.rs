//! Named parameter sets for buffer-gas cells.

use crate::error::{Error, Result};

use super::config::RawConfig;

pub const NAMES: [&str; 4] = ["vacuum", "kr_0.12torr", "ne_30torr", "ne_100torr"];

const COMMON: &str = r#"
[medium]
density_per_cm3 = 2.5e11
length_cm = 2.5
wavelength_nm = 795.0
ku_mhz = 250.0

[fields]
omega_d_mhz = 2.5
omega_p_mhz = 0.5
"#;

fn specific(name: &str) -> Option<&'static str> {
    Some(match name {
        "vacuum" => {
            r#"
[rates]
gamma_r_mhz = 3.0
gamma_deph_mhz = 0.0
gamma_bc_khz = 30.0

[sweep]
start_mhz = 0.0
stop_mhz = 1000.0
points = 21
"#
        }
        "kr_0.12torr" => {
            r#"
[rates]
gamma_r_mhz = 3.0
gamma_deph_mhz = 0.6
gamma_bc_khz = 10.0

[sweep]
start_mhz = 0.0
stop_mhz = 2000.0
points = 21
"#
        }
        "ne_30torr" => {
            r#"
[rates]
gamma_r_mhz = 3.0
gamma_deph_mhz = 150.0
gamma_bc_khz = 0.7

[sweep]
start_mhz = 0.0
stop_mhz = 2000.0
points = 21
"#
        }
        "ne_100torr" => {
            r#"
[rates]
gamma_r_mhz = 3.0
gamma_deph_mhz = 450.0
gamma_bc_khz = 0.5

[sweep]
start_mhz = 0.0
stop_mhz = 2000.0
points = 21
"#
        }
        _ => return None,
    })
}

/// Full TOML text of a preset.
pub fn text(name: &str) -> Result<String> {
    let body = specific(name).ok_or_else(|| {
        Error::Config(format!("unknown preset `{name}` (known: {})", NAMES.join(", ")))
    })?;
    Ok(format!("preset = \"{name}\"\n{COMMON}{body}"))
}

pub(crate) fn raw(name: &str) -> Result<RawConfig> {
    RawConfig::parse(&text(name)?)
}

pub fn warning(name: &str) -> Option<&'static str> {
    (name == "kr_0.12torr").then_some(
        "preset kr_0.12torr is outside the model: below about 1 Torr the atoms cross the beam \
         ballistically and the ground-state decay is set by transit, which is not modelled; \
         gamma_bc_khz is a placeholder",
    )
}
