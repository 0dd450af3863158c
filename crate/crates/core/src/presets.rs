//! Named parameter sets used by the CLI presets and golden fixtures.

use crate::bath::g_c_max;
use crate::error::{Error, Result};
use crate::units::SystemParams;

/// Ratios `g_c / g_c,max` of the threshold family.
pub const FIG3_RATIOS: [f64; 5] = [0.0, 0.24, 0.5, 0.75, 0.9];

/// One member of a preset; single-member presets have an empty label.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetMember {
    pub label: String,
    pub params: SystemParams,
}

pub const PRESET_NAMES: [&str; 3] = ["fig1-cooled", "fig1-bare", "fig3"];

/// Laser-cooled reference set (`SystemParams::default()`).
pub fn fig1_cooled() -> SystemParams {
    SystemParams::default()
}

/// The reference set with the cooling laser off.
pub fn fig1_bare() -> SystemParams {
    fig1_cooled().with_g_c(0.0)
}

/// Laser-cooling-dominated family at `-delta_c = omega_m = sqrt(3) kappa_c / 2`.
/// The uncooled member keeps `gamma_m = 1e-6` so its resonance stays finite.
pub fn fig3_family() -> Result<Vec<PresetMember>> {
    let base = fig1_cooled();
    let g_max = g_c_max(&base)?;
    Ok(FIG3_RATIOS
        .iter()
        .map(|&r| PresetMember {
            label: format!("gc{r}"),
            params: if r == 0.0 {
                base.with_g_c(0.0)
            } else {
                base.with_g_c(r * g_max).with_gamma_m(0.0)
            },
        })
        .collect())
}

pub fn preset(name: &str) -> Result<Vec<PresetMember>> {
    let single = |params| {
        Ok(vec![PresetMember {
            label: String::new(),
            params,
        }])
    };
    match name {
        "fig1-cooled" => single(fig1_cooled()),
        "fig1-bare" => single(fig1_bare()),
        "fig3" => fig3_family(),
        other => Err(Error::InvalidParam {
            field: "preset",
            reason: format!("unknown preset {other:?}; expected one of {}", PRESET_NAMES.join(", ")),
        }),
    }
}
