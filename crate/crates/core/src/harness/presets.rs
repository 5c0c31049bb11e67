//! Built-in sweep recipes. Energies are in units of the reference tunneling
//! splitting (`delta = 1`), with `hbar = k_B = 1`.
//!
//! Preset names follow the reference parameter sets they reproduce. Grid
//! ranges and resolutions are a local choice (60 points unless noted).

use std::f64::consts::PI;

use super::config::{Grid, Spacing, SweepConfig, SweepKind};
use crate::bath::BathSpec;
use crate::error::{Error, Result};
use crate::methods::{Method, DEFAULT_M_MAX, DEFAULT_TOL};

pub const PRESETS: [&str; 9] = [
    "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig11a", "fig11b",
];

pub const DEFAULT_POINTS: usize = 60;

/// Temperature-sweep bias `Delta T = 0.3 T_a`.
pub const TEMPERATURE_DT_FRACTION: f64 = 0.3;

/// `epsilon = 0`, `Omega = 28`, `gamma = 0.0071/pi`, `Lambda = 1000 pi`,
/// `T_h = 1`, `T_c = 0.5`.
fn base(lambda: f64, omega_rc: f64, gamma: f64) -> SweepConfig {
    let hot = BathSpec {
        lambda,
        omega_rc,
        gamma,
        cutoff: 1000.0 * PI,
        temperature: 1.0,
    };
    SweepConfig {
        kind: SweepKind::Lambda,
        epsilon: 0.0,
        delta: 1.0,
        hot,
        cold: hot.with_temperature(0.5),
        grid: Grid::linear(0.25, 15.0, DEFAULT_POINTS),
        methods: vec![Method::RcQme(2), Method::RcQme(4), Method::Bmr, Method::effsb()],
        m_list: vec![2, 3, 4, 5],
        tol: DEFAULT_TOL,
        m_max: DEFAULT_M_MAX,
        dt_fraction: TEMPERATURE_DT_FRACTION,
        output: None,
    }
}

const FIG4_OMEGA: f64 = 28.0;
const FIG4_GAMMA: f64 = 0.0071 / PI;

/// Intermediate coupling used for the splitting and temperature sweeps.
const INTERMEDIATE_LAMBDA: f64 = 4.0;

pub fn preset(name: &str) -> Result<SweepConfig> {
    let cfg = match name {
        // Effective splitting and coupling against symmetric lambda.
        "fig3" => SweepConfig {
            kind: SweepKind::EffParams,
            grid: Grid::linear(0.0, 20.0, DEFAULT_POINTS),
            methods: vec![],
            ..base(0.0, FIG4_OMEGA, FIG4_GAMMA)
        },
        // Current against symmetric lambda in [0.25, 15].
        "fig4" => base(0.0, FIG4_OMEGA, FIG4_GAMMA),
        // As fig4 with Omega = 10.
        "fig5" => SweepConfig {
            grid: Grid::linear(0.25, 10.0, DEFAULT_POINTS),
            ..base(0.0, 10.0, FIG4_GAMMA)
        },
        // Current against the tunneling splitting at lambda = 4.
        "fig6" => SweepConfig {
            kind: SweepKind::Delta,
            grid: Grid::linear(0.1, 5.0, DEFAULT_POINTS),
            methods: vec![Method::RcQme(4), Method::Bmr, Method::effsb()],
            ..base(INTERMEDIATE_LAMBDA, FIG4_OMEGA, FIG4_GAMMA)
        },
        // J / Delta T against T_a in [0.1, 2] at lambda = 4.
        "fig7" => SweepConfig {
            kind: SweepKind::Temperature,
            grid: Grid::linear(0.1, 2.0, DEFAULT_POINTS),
            methods: vec![Method::RcQme(4), Method::Bmr, Method::effsb()],
            ..base(INTERMEDIATE_LAMBDA, FIG4_OMEGA, FIG4_GAMMA)
        },
        // High-temperature continuation, T_a in [0.1, 40] on a log grid.
        "fig8" => SweepConfig {
            kind: SweepKind::Temperature,
            grid: Grid {
                spacing: Spacing::Log,
                ..Grid::linear(0.1, 40.0, DEFAULT_POINTS)
            },
            methods: vec![Method::RcQme(4), Method::Bmr, Method::effsb()],
            ..base(INTERMEDIATE_LAMBDA, FIG4_OMEGA, FIG4_GAMMA)
        },
        // Forward current and rectification against chi in [-0.9, 0.9] at
        // mean lambda = 2, Delta T = 0.5.
        "fig9" => SweepConfig {
            kind: SweepKind::Asymmetry,
            grid: Grid::linear(-0.9, 0.9, 19),
            methods: vec![Method::Bmr, Method::effsb()],
            ..base(2.0, FIG4_OMEGA, FIG4_GAMMA)
        },
        // gamma = 0.005, Omega = 10.
        "fig11a" => SweepConfig {
            grid: Grid::linear(0.25, 10.0, DEFAULT_POINTS),
            methods: vec![Method::RcQme(2), Method::RcQme(3), Method::RcQme(4), Method::Bmr, Method::effsb()],
            ..base(0.0, 10.0, 0.005)
        },
        // gamma = 0.005, Omega = 5.
        "fig11b" => SweepConfig {
            grid: Grid::linear(0.25, 6.0, DEFAULT_POINTS),
            methods: vec![Method::RcQme(2), Method::RcQme(3), Method::RcQme(4), Method::Bmr, Method::effsb()],
            ..base(0.0, 5.0, 0.005)
        },
        _ => {
            return Err(Error::Config(format!(
                "unknown preset `{name}`; available: {}",
                PRESETS.join(", ")
            )))
        }
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_valid_and_round_trips() {
        for name in PRESETS {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap();
            assert_eq!(SweepConfig::from_text(&cfg.to_text()).unwrap(), cfg, "{name}");
        }
        assert!(preset("fig10").unwrap_err().to_string().contains("fig11b"));
    }

    #[test]
    fn preset_values() {
        let f4 = preset("fig4").unwrap();
        assert_eq!(f4.hot.omega_rc, 28.0);
        assert_eq!(f4.hot.gamma, 0.0071 / PI);
        assert_eq!(f4.hot.cutoff, 1000.0 * PI);
        assert_eq!((f4.hot.temperature, f4.cold.temperature), (1.0, 0.5));
        assert_eq!(f4.grid.points, 60);
        let labels: Vec<String> = f4.methods.iter().map(|m| m.label()).collect();
        assert_eq!(labels, ["J_rcqme_M2", "J_rcqme_M4", "J_bmr", "J_effsb"]);

        assert_eq!(preset("fig5").unwrap().hot.omega_rc, 10.0);
        let b = preset("fig11b").unwrap();
        assert_eq!((b.hot.gamma, b.hot.omega_rc), (0.005, 5.0));
        let a = preset("fig11a").unwrap();
        assert_eq!((a.hot.gamma, a.hot.omega_rc), (0.005, 10.0));
        let t = preset("fig7").unwrap();
        assert_eq!(t.kind, SweepKind::Temperature);
        assert_eq!(t.dt_fraction, 0.3);
        let r = preset("fig9").unwrap();
        assert_eq!(r.kind, SweepKind::Asymmetry);
        assert!(r.grid.start > -1.0 && r.grid.stop < 1.0);
    }
}
