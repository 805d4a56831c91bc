//! Parameter grids of the published figures.
//!
//! Every preset starts from [`PolaritonSpec::default`]: ω′ = ω = 1 eV,
//! Γ_X = 0.2 eV, Γ_P = 0.4 eV, A_X = 0.1 eV, A_P = 0, ε₁ = 0, ε₂ = 1 eV,
//! T = 300 K and an 8.27 ps horizon.

use super::config::linspace;
use super::{Axis, SweepConfig, SweepPlan};
use crate::error::{Error, Result};
use crate::model::PolaritonSpec;
use crate::units;

const ENERGIES: &[&str] = &["E_TLS", "E_pho", "E_int", "E_total"];
const HEAT: &[&str] = &["Qdot_X", "Qdot_P", "Qdot_irrev"];

/// Short tag for a float in series labels: `3e-5`, `0.05`, `0`.
fn tag(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.abs() < 1e-3 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn coupling_grid() -> Vec<f64> {
    linspace(1.0, 3.0, 41)
}

fn base() -> PolaritonSpec {
    PolaritonSpec::default()
}

fn chi_series(name: &str, chis: &[f64], outputs: &[&str], notes: &str) -> SweepPlan {
    SweepPlan {
        name: name.into(),
        notes: notes.into(),
        series: chis
            .iter()
            .map(|&chi| {
                SweepConfig::new(PolaritonSpec { chi, ..base() }, Axis::V, coupling_grid())
                    .labelled(format!("chi{}", tag(chi)))
                    .with_outputs(outputs)
            })
            .collect(),
    }
}

fn fig1_panel(name: &str, outputs: &[&str]) -> SweepPlan {
    SweepPlan {
        name: name.into(),
        notes: "chi sweep at V = 2 omega".into(),
        series: vec![SweepConfig::new(base().with_coupling(2.0), Axis::Chi, linspace(0.0, 9e-5, 10))
            .labelled("resonance")
            .with_outputs(outputs)],
    }
}

fn fig5(name: &str, v: f64) -> SweepPlan {
    let grid = linspace(0.0, 0.09, 10);
    let spec = base().with_coupling(v);
    SweepPlan {
        name: name.into(),
        notes: format!("V = {v}; one amplitude fixed at 0.05 eV, the other swept"),
        series: vec![
            SweepConfig::new(PolaritonSpec { a_x: 0.05, ..spec.clone() }, Axis::AP, grid.clone())
                .labelled("AX_fixed")
                .with_outputs(ENERGIES),
            SweepConfig::new(PolaritonSpec { a_p: 0.05, ..spec }, Axis::AX, grid)
                .labelled("AP_fixed")
                .with_outputs(ENERGIES),
        ],
    }
}

fn fig6() -> SweepPlan {
    let grid = linspace(0.01, 0.09, 9);
    let mut series = Vec::new();
    for chi in [0.0, 1e-4, 4e-4, 1e-3] {
        for (axis, proto) in [(Axis::AlphaX, "exciton"), (Axis::AlphaP, "phonon")] {
            series.push(
                SweepConfig::new(PolaritonSpec { chi, ..base() }.with_coupling(2.0), axis, grid.clone())
                    .labelled(format!("{proto}_chi{}", tag(chi)))
                    .with_outputs(&["E_total", "Wbar", "Qbar_irr", "Eff"]),
            );
        }
    }
    SweepPlan {
        name: "fig6".into(),
        notes: "V = 2 omega; chi values {0, 1e-4, 4e-4, 1e-3} are a declared choice".into(),
        series,
    }
}

fn fig7() -> SweepPlan {
    let horizon = units::ps_to_inv_ev(827.0);
    SweepPlan {
        name: "fig7".into(),
        notes: "chi = 4e-4, Gamma_X = Gamma_P / 2, horizon 827 ps".into(),
        series: [0.01, 0.08, 0.4]
            .iter()
            .map(|&gp| {
                let spec = PolaritonSpec { chi: 4e-4, gamma_p: gp, gamma_x: gp / 2.0, t_final: horizon, ..base() };
                SweepConfig::new(spec, Axis::V, coupling_grid())
                    .labelled(format!("GammaP{}", tag(gp)))
                    .with_outputs(ENERGIES)
            })
            .collect(),
    }
}

fn fig4() -> SweepPlan {
    let outputs = ["E_TLS", "E_int", "E_pho", "E_total", "Qdot_X", "Qdot_P", "Wdot_X", "Wdot_P", "Wbar"];
    SweepPlan {
        name: "fig4".into(),
        notes: "chi = 0; exciton versus phonon driving at 0.05 eV".into(),
        series: vec![
            SweepConfig::new(PolaritonSpec { a_x: 0.05, a_p: 0.0, ..base() }, Axis::V, coupling_grid())
                .labelled("exciton")
                .with_outputs(&outputs),
            SweepConfig::new(PolaritonSpec { a_x: 0.0, a_p: 0.05, ..base() }, Axis::V, coupling_grid())
                .labelled("phonon")
                .with_outputs(&outputs),
        ],
    }
}

/// Names of every preset, in catalog order.
pub const PRESET_NAMES: &[&str] =
    &["fig1a", "fig1b", "fig1c", "fig1d", "fig2", "fig3", "fig4", "fig5ab", "fig5cd", "fig6", "fig7"];

/// Looks up a preset by name.
pub fn preset(name: &str) -> Result<SweepPlan> {
    let strong = [2e-4, 5e-4, 1e-3, 2e-3, 6e-3];
    Ok(match name {
        "fig1a" => chi_series("fig1a", &[0.0, 3e-5, 6e-5], &["E_total"], "V sweep for three chi"),
        "fig1b" => fig1_panel("fig1b", &["E_TLS", "E_pho", "E_int"]),
        "fig1c" => fig1_panel("fig1c", &["Qdot_X", "Qdot_P"]),
        "fig1d" => fig1_panel("fig1d", &["Wbar"]),
        "fig2" => chi_series("fig2", &strong, ENERGIES, "strongly anharmonic V sweeps"),
        "fig3" => chi_series("fig3", &strong, HEAT, "strongly anharmonic V sweeps"),
        "fig4" => fig4(),
        "fig5ab" => fig5("fig5ab", 2.0),
        "fig5cd" => fig5("fig5cd", 1.75),
        "fig6" => fig6(),
        "fig7" => fig7(),
        other => return Err(Error::UnknownPreset(other.to_string())),
    })
}

/// The full catalog.
pub fn figure_presets() -> Vec<SweepPlan> {
    PRESET_NAMES.iter().map(|n| preset(n).expect("catalog names resolve")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_complete_and_valid() {
        let all = figure_presets();
        assert!(all.len() >= 9);
        for p in &all {
            p.validate().unwrap_or_else(|e| panic!("{}: {e}", p.name));
        }
    }

    #[test]
    fn fig7_horizon() {
        let p = preset("fig7").unwrap();
        assert!((p.series[0].base.t_final - 1_256_434.18).abs() < 1.0);
        assert_eq!(p.series[0].base.gamma_x, 0.005);
    }

    #[test]
    fn labels() {
        assert_eq!(tag(3e-5), "3e-5");
        assert_eq!(tag(0.05), "0.05");
        let p = preset("fig1a").unwrap();
        let labels: Vec<_> = p.series.iter().map(|s| s.label.as_str()).collect();
        assert_eq!(labels, ["chi0", "chi3e-5", "chi6e-5"]);
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(preset("fig9"), Err(Error::UnknownPreset(_))));
    }
}
