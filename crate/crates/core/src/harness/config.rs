//! Sweep configuration and its flat `key = value` text format.
//!
//! Blank lines and lines starting with `#` are ignored. Keys that name both
//! baths at once (`lambda`, `omega_rc`, `gamma`, `cutoff`) set the hot and
//! cold values together; serialization always writes the per-bath keys.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::bath::BathSpec;
use crate::error::{Error, Result};
use crate::hamiltonian::JunctionModel;
use crate::methods::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// Symmetric coupling `lambda_h = lambda_c = x`.
    Lambda,
    /// Tunneling splitting.
    Delta,
    /// Mean temperature `T_a`, with `T_h/c = T_a (1 +- dt_fraction / 2)`.
    Temperature,
    /// Asymmetry `chi` at fixed mean coupling.
    Asymmetry,
    /// Current against truncation `M` at the base model.
    MConvergence,
    /// Effective two-level parameters against symmetric coupling.
    EffParams,
}

impl SweepKind {
    pub const ALL: [SweepKind; 6] = [
        SweepKind::Lambda,
        SweepKind::Delta,
        SweepKind::Temperature,
        SweepKind::Asymmetry,
        SweepKind::MConvergence,
        SweepKind::EffParams,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepKind::Lambda => "lambda",
            SweepKind::Delta => "delta",
            SweepKind::Temperature => "temperature",
            SweepKind::Asymmetry => "asymmetry",
            SweepKind::MConvergence => "m_convergence",
            SweepKind::EffParams => "eff_params",
        }
    }

    pub fn needs_methods(&self) -> bool {
        matches!(
            self,
            SweepKind::Lambda | SweepKind::Delta | SweepKind::Temperature | SweepKind::Asymmetry
        )
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| {
                let names: Vec<_> = SweepKind::ALL.iter().map(|k| k.name()).collect();
                Error::Config(format!("unknown sweep kind `{s}`; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

impl FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "linear" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            other => Err(Error::Config(format!("unknown spacing `{other}`; expected linear or log"))),
        }
    }
}

impl Spacing {
    fn name(&self) -> &'static str {
        match self {
            Spacing::Linear => "linear",
            Spacing::Log => "log",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Grid {
    pub fn linear(start: f64, stop: f64, points: usize) -> Self {
        Self {
            start,
            stop,
            points,
            spacing: Spacing::Linear,
        }
    }

    /// Grid values; both endpoints are included exactly.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    return self.stop;
                }
                let t = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.start + (self.stop - self.start) * t,
                    Spacing::Log => (self.start.ln() + (self.stop.ln() - self.start.ln()) * t).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub kind: SweepKind,
    pub epsilon: f64,
    pub delta: f64,
    pub hot: BathSpec,
    pub cold: BathSpec,
    pub grid: Grid,
    pub methods: Vec<Method>,
    /// Truncations for `m_convergence`.
    pub m_list: Vec<usize>,
    pub tol: f64,
    pub m_max: usize,
    /// `(T_h - T_c) / T_a` for temperature sweeps.
    pub dt_fraction: f64,
    pub output: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        super::presets::preset("fig4").expect("built-in preset")
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("`{key}` expects a number, got `{value}`")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("`{key}` expects a non-negative integer, got `{value}`")))
}

impl SweepConfig {
    pub fn model(&self) -> Result<JunctionModel> {
        JunctionModel::new(self.epsilon, self.delta, self.hot, self.cold).map_err(|e| Error::Config(e.to_string()))
    }

    /// Method list with EFF-SB taking this configuration's `tol` and `m_max`.
    pub fn resolved_methods(&self) -> Vec<Method> {
        self.methods
            .iter()
            .map(|m| match m {
                Method::EffSb { .. } => Method::EffSb {
                    tol: self.tol,
                    m_max: self.m_max,
                },
                other => *other,
            })
            .collect()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        let value = value.trim();
        let num = || parse_f64(key, value);
        match key {
            "kind" => self.kind = value.parse()?,
            "epsilon" => self.epsilon = num()?,
            "delta" => self.delta = num()?,
            "lambda" => {
                let x = num()?;
                self.hot.lambda = x;
                self.cold.lambda = x;
            }
            "lambda_hot" => self.hot.lambda = num()?,
            "lambda_cold" => self.cold.lambda = num()?,
            "omega_rc" => {
                let x = num()?;
                self.hot.omega_rc = x;
                self.cold.omega_rc = x;
            }
            "omega_hot" => self.hot.omega_rc = num()?,
            "omega_cold" => self.cold.omega_rc = num()?,
            "gamma" => {
                let x = num()?;
                self.hot.gamma = x;
                self.cold.gamma = x;
            }
            "gamma_hot" => self.hot.gamma = num()?,
            "gamma_cold" => self.cold.gamma = num()?,
            "cutoff" => {
                let x = num()?;
                self.hot.cutoff = x;
                self.cold.cutoff = x;
            }
            "cutoff_hot" => self.hot.cutoff = num()?,
            "cutoff_cold" => self.cold.cutoff = num()?,
            "t_hot" => self.hot.temperature = num()?,
            "t_cold" => self.cold.temperature = num()?,
            "start" => self.grid.start = num()?,
            "stop" => self.grid.stop = num()?,
            "points" => self.grid.points = parse_usize(key, value)?,
            "spacing" => self.grid.spacing = value.parse()?,
            "methods" => {
                self.methods = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<Vec<Method>>>()?
            }
            "m_list" => {
                self.m_list = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_usize(key, s))
                    .collect::<Result<Vec<_>>>()?
            }
            "tol" => self.tol = num()?,
            "m_max" => self.m_max = parse_usize(key, value)?,
            "dt_fraction" => self.dt_fraction = num()?,
            "output" => self.output = if value.is_empty() { None } else { Some(PathBuf::from(value)) },
            _ => return Err(Error::Config(format!("unknown configuration key `{key}`"))),
        }
        self.methods = self.resolved_methods();
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{assignment}` is not of the form key=value")))?;
        self.set(k, v)
    }

    /// Applies every assignment in `text` on top of `self`.
    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            self.apply_override(line)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        cfg.merge_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let methods: Vec<String> = self.methods.iter().map(|m| m.to_string()).collect();
        let m_list: Vec<String> = self.m_list.iter().map(|m| m.to_string()).collect();
        let pairs: Vec<(&str, String)> = vec![
            ("kind", self.kind.name().into()),
            ("epsilon", self.epsilon.to_string()),
            ("delta", self.delta.to_string()),
            ("lambda_hot", self.hot.lambda.to_string()),
            ("lambda_cold", self.cold.lambda.to_string()),
            ("omega_hot", self.hot.omega_rc.to_string()),
            ("omega_cold", self.cold.omega_rc.to_string()),
            ("gamma_hot", self.hot.gamma.to_string()),
            ("gamma_cold", self.cold.gamma.to_string()),
            ("cutoff_hot", self.hot.cutoff.to_string()),
            ("cutoff_cold", self.cold.cutoff.to_string()),
            ("t_hot", self.hot.temperature.to_string()),
            ("t_cold", self.cold.temperature.to_string()),
            ("start", self.grid.start.to_string()),
            ("stop", self.grid.stop.to_string()),
            ("points", self.grid.points.to_string()),
            ("spacing", self.grid.spacing.name().into()),
            ("methods", methods.join(",")),
            ("m_list", m_list.join(",")),
            ("tol", self.tol.to_string()),
            ("m_max", self.m_max.to_string()),
            ("dt_fraction", self.dt_fraction.to_string()),
            (
                "output",
                self.output.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
            ),
        ];
        for (k, v) in pairs {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        let model = self.model()?;
        let g = &self.grid;
        if self.kind != SweepKind::MConvergence {
            if g.points < 2 {
                return Err(Error::Config(format!("grid needs at least 2 points, got {}", g.points)));
            }
            if !(g.start < g.stop) || !g.start.is_finite() || !g.stop.is_finite() {
                return Err(Error::Config(format!("grid needs start < stop, got {} .. {}", g.start, g.stop)));
            }
            if g.spacing == Spacing::Log && !(g.start > 0.0) {
                return Err(Error::Config("log spacing needs start > 0".into()));
            }
        }
        if self.kind.needs_methods() && self.methods.is_empty() {
            return Err(Error::Config("no methods requested".into()));
        }
        if !(self.tol > 0.0) || self.m_max < 2 {
            return Err(Error::Config(format!(
                "need tol > 0 and m_max >= 2, got tol = {}, m_max = {}",
                self.tol, self.m_max
            )));
        }
        match self.kind {
            SweepKind::Lambda | SweepKind::EffParams if g.start < 0.0 => {
                Err(Error::Config("coupling grid must be non-negative".into()))
            }
            SweepKind::Delta | SweepKind::Temperature if !(g.start > 0.0) => {
                Err(Error::Config("grid must be positive".into()))
            }
            SweepKind::Temperature if !(self.dt_fraction > 0.0 && self.dt_fraction < 2.0) => Err(Error::Config(
                format!("dt_fraction must lie in (0, 2), got {}", self.dt_fraction),
            )),
            SweepKind::Asymmetry if !(g.start > -1.0 && g.stop < 1.0) => {
                Err(Error::Config("asymmetry grid must lie inside (-1, 1)".into()))
            }
            SweepKind::Asymmetry if model.hot.lambda + model.cold.lambda <= 0.0 => {
                Err(Error::Config("asymmetry sweep needs a nonzero mean coupling".into()))
            }
            SweepKind::MConvergence
                if self.m_list.is_empty()
                    || self.m_list.iter().any(|&m| m < 2)
                    || self.m_list.windows(2).any(|w| w[0] >= w[1]) =>
            {
                Err(Error::Config("m_list must be strictly ascending with every M >= 2".into()))
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_default() {
        let cfg = SweepConfig::default();
        assert_eq!(SweepConfig::from_text(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn parses_comments_and_shared_keys() {
        let cfg = SweepConfig::from_text("# comment\n\nkind = delta\nlambda = 3\nomega_rc=10\nmethods = bmr, effsb\n").unwrap();
        assert_eq!(cfg.kind, SweepKind::Delta);
        assert_eq!((cfg.hot.lambda, cfg.cold.lambda), (3.0, 3.0));
        assert_eq!((cfg.hot.omega_rc, cfg.cold.omega_rc), (10.0, 10.0));
        assert_eq!(cfg.methods.len(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "bogus = 1",
            "points = x",
            "methods =",
            "points = 1",
            "start = 5\nstop = 1",
            "kind = nope",
            "delta = -1",
            "kind = asymmetry\nstart = -1\nstop = 0.5",
            "kind = m_convergence\nm_list = 4,3",
            "no equals sign",
        ] {
            let err = SweepConfig::from_text(text).unwrap_err();
            assert!(err.is_config(), "{text}: {err}");
        }
    }

    #[test]
    fn effsb_follows_tolerance_keys() {
        let cfg = SweepConfig::from_text("methods = effsb\ntol = 1e-4\nm_max = 6").unwrap();
        assert_eq!(cfg.methods, vec![Method::EffSb { tol: 1e-4, m_max: 6 }]);
    }

    #[test]
    fn grid_values() {
        let g = Grid::linear(0.25, 15.0, 60);
        let v = g.values();
        assert_eq!(v.len(), 60);
        assert_eq!(v[0], 0.25);
        assert_eq!(v[59], 15.0);
        assert!((v[1] - v[0] - 0.25).abs() < 1e-12);
        let log = Grid {
            spacing: Spacing::Log,
            ..Grid::linear(0.1, 40.0, 5)
        };
        let v = log.values();
        assert!((v[1] / v[0] - v[2] / v[1]).abs() < 1e-12);
    }
}
