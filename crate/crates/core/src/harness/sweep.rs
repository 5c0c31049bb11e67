use std::fmt;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{SweepConfig, SweepKind};
use crate::error::{Error, Result};
use crate::hamiltonian::{converge_effective, JunctionModel};
use crate::methods::{current_rcqme, evaluate, rectification, Method};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Value(f64),
    Int(i64),
    Failed,
}

impl Cell {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Cell::Value(v) => Some(v),
            Cell::Int(i) => Some(i as f64),
            Cell::Failed => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Value(v) => write!(f, "{v:.16e}"),
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Failed => write!(f, "failed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    pub values: Vec<Cell>,
    /// `;`-free tokens such as `J_effsb:unconverged`.
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub x: f64,
    pub column: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Peak {
    pub column: String,
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub kind: SweepKind,
    pub points: usize,
    pub peaks: Vec<Peak>,
    pub failures: Vec<Failure>,
    pub flagged_rows: usize,
}

impl fmt::Display for SweepSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} sweep: {} points", self.kind.name(), self.points)?;
        for p in &self.peaks {
            writeln!(f, "  max {} = {:.6e} at x = {:.6}", p.column, p.value, p.x)?;
        }
        writeln!(f, "  failed cells: {}", self.failures.len())?;
        for fail in &self.failures {
            writeln!(f, "    x = {:.6} {}: {}", fail.x, fail.column, fail.message)?;
        }
        write!(f, "  rows with diagnostic flags: {}", self.flagged_rows)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub header: Vec<String>,
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
    failures: Vec<Failure>,
}

impl SweepOutput {
    /// CSV with a unit-annotated header, 17 significant digits, LF endings.
    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push_str(",flags\n");
        for row in &self.rows {
            s.push_str(&format!("{:.16e}", row.x));
            for c in &row.values {
                s.push(',');
                s.push_str(&c.to_string());
            }
            s.push(',');
            s.push_str(&row.flags.join(";"));
            s.push('\n');
        }
        s
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.header.iter().skip(1).position(|h| h.split(' ').next() == Some(name))?;
        Some(self.rows.iter().map(|r| r.values[idx].value()).collect())
    }

    pub fn has_failures(&self) -> bool {
        !self.failures.is_empty()
    }
}

fn x_header(kind: SweepKind) -> &'static str {
    match kind {
        SweepKind::Lambda | SweepKind::EffParams => "lambda (Delta)",
        SweepKind::Delta => "delta (Delta)",
        SweepKind::Temperature => "T_a (Delta)",
        SweepKind::Asymmetry => "chi (1)",
        SweepKind::MConvergence => "M (1)",
    }
}

fn value_headers(cfg: &SweepConfig, methods: &[Method]) -> Vec<String> {
    match cfg.kind {
        SweepKind::Lambda | SweepKind::Delta => methods.iter().map(|m| format!("{} (Delta^2)", m.label())).collect(),
        SweepKind::Temperature => methods.iter().map(|m| format!("{}/dT (Delta)", m.label())).collect(),
        SweepKind::Asymmetry => methods
            .iter()
            .flat_map(|m| {
                let l = m.label();
                [format!("{l}_fwd (Delta^2)"), format!("R_{} (1)", &l[2..])]
            })
            .collect(),
        SweepKind::EffParams => [
            "delta_eff (Delta)",
            "f_hot (1)",
            "f_cold (1)",
            "(delta_eff*f_hot)^2 (Delta^2)",
            "m_used (1)",
            "converged (1)",
        ]
        .map(String::from)
        .to_vec(),
        SweepKind::MConvergence => ["J_h (Delta^2)", "rel_change (1)", "wall_time (s)"].map(String::from).to_vec(),
    }
}

fn point_model(cfg: &SweepConfig, base: &JunctionModel, x: f64) -> JunctionModel {
    match cfg.kind {
        SweepKind::Lambda | SweepKind::EffParams => base.with_couplings(x, x),
        SweepKind::Delta => JunctionModel { delta: x, ..*base },
        SweepKind::Temperature => {
            let half = 0.5 * cfg.dt_fraction;
            base.with_temperatures(x * (1.0 + half), x * (1.0 - half))
        }
        SweepKind::Asymmetry | SweepKind::MConvergence => *base,
    }
}

struct PointResult {
    values: Vec<Cell>,
    flags: Vec<String>,
    failures: Vec<(String, String)>,
}

fn evaluate_point(cfg: &SweepConfig, base: &JunctionModel, methods: &[Method], x: f64) -> PointResult {
    let model = point_model(cfg, base, x);
    let mut out = PointResult {
        values: vec![],
        flags: vec![],
        failures: vec![],
    };
    match cfg.kind {
        SweepKind::Lambda | SweepKind::Delta | SweepKind::Temperature => {
            let scale = if cfg.kind == SweepKind::Temperature {
                1.0 / (cfg.dt_fraction * x)
            } else {
                1.0
            };
            for &m in methods {
                match evaluate(&model, m) {
                    Ok(r) => {
                        out.values.push(Cell::Value(r.current * scale));
                        if r.warning {
                            out.flags.push(format!("{}:warning", m.label()));
                        }
                        if r.converged == Some(false) {
                            out.flags.push(format!("{}:unconverged", m.label()));
                        }
                    }
                    Err(e) => {
                        out.values.push(Cell::Failed);
                        out.failures.push((m.label(), e.to_string()));
                    }
                }
            }
        }
        SweepKind::Asymmetry => {
            let mean = 0.5 * (model.hot.lambda + model.cold.lambda);
            for &m in methods {
                match rectification(&model, mean, x, m) {
                    Ok(r) => {
                        out.values.push(Cell::Value(r.current_forward));
                        out.values.push(Cell::Value(r.ratio));
                    }
                    Err(e) => {
                        out.values.extend([Cell::Failed, Cell::Failed]);
                        out.failures.push((m.label(), e.to_string()));
                    }
                }
            }
        }
        SweepKind::EffParams => match converge_effective(&model, cfg.tol, cfg.m_max) {
            Ok(eff) => {
                out.values.extend([
                    Cell::Value(eff.delta_eff),
                    Cell::Value(eff.f_hot),
                    Cell::Value(eff.f_cold),
                    Cell::Value((eff.delta_eff * eff.f_hot).powi(2)),
                    Cell::Int(eff.m_used as i64),
                    Cell::Int(i64::from(eff.converged)),
                ]);
                if !eff.converged {
                    out.flags.push("unconverged".into());
                }
                if eff.ill_conditioned {
                    out.flags.push("ill_conditioned".into());
                }
            }
            Err(e) => {
                out.values.extend([Cell::Failed; 6]);
                out.failures.push(("delta_eff".into(), e.to_string()));
            }
        },
        SweepKind::MConvergence => unreachable!("handled by m_convergence_report"),
    }
    out
}

fn summarize(kind: SweepKind, header: &[String], rows: &[SweepRow], failures: Vec<Failure>) -> SweepSummary {
    let mut peaks = Vec::new();
    for (i, h) in header.iter().skip(1).enumerate() {
        let best = rows
            .iter()
            .filter_map(|r| r.values[i].value().filter(|v| v.is_finite()).map(|v| (r.x, v)))
            .max_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((x, value)) = best {
            peaks.push(Peak {
                column: h.split(' ').next().unwrap_or(h).to_string(),
                x,
                value,
            });
        }
    }
    SweepSummary {
        kind,
        points: rows.len(),
        peaks,
        failures,
        flagged_rows: rows.iter().filter(|r| !r.flags.is_empty()).count(),
    }
}

/// Evaluates the configured sweep on a pool of `workers` threads (0 picks
/// the rayon default). Rows come back in grid order regardless of the pool
/// size. Per-point failures are recorded in the row and do not stop the
/// sweep.
pub fn run_sweep(cfg: &SweepConfig, workers: usize) -> Result<SweepOutput> {
    cfg.validate()?;
    let base = cfg.model()?;
    if cfg.kind == SweepKind::MConvergence {
        return m_convergence_sweep(cfg, &base);
    }
    let methods = cfg.resolved_methods();
    let grid = cfg.grid.values();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;
    let results: Vec<PointResult> =
        pool.install(|| grid.par_iter().map(|&x| evaluate_point(cfg, &base, &methods, x)).collect());

    let mut header = vec![x_header(cfg.kind).to_string()];
    header.extend(value_headers(cfg, &methods));
    let mut failures = Vec::new();
    let rows: Vec<SweepRow> = grid
        .iter()
        .zip(results)
        .map(|(&x, p)| {
            failures.extend(p.failures.into_iter().map(|(column, message)| Failure { x, column, message }));
            SweepRow {
                x,
                values: p.values,
                flags: p.flags,
            }
        })
        .collect();
    let summary = summarize(cfg.kind, &header, &rows, failures.clone());
    Ok(SweepOutput {
        header,
        rows,
        summary,
        failures,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MConvergenceRow {
    pub m: usize,
    pub current: f64,
    /// `|J(M) - J(M_prev)| / |J(M_prev)|`; zero for the first row and when
    /// both currents vanish.
    pub relative_change: f64,
    pub wall_time_s: f64,
}

pub fn m_convergence_report(model: &JunctionModel, m_list: &[usize]) -> Result<Vec<MConvergenceRow>> {
    if m_list.is_empty() || m_list.iter().any(|&m| m < 2) || m_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("m_list must be strictly ascending with every M >= 2".into()));
    }
    let mut rows: Vec<MConvergenceRow> = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let start = Instant::now();
        let current = current_rcqme(model, m)?.current;
        let wall_time_s = start.elapsed().as_secs_f64();
        let relative_change = match rows.last() {
            Some(prev) if prev.current != 0.0 => ((current - prev.current) / prev.current).abs(),
            Some(_) if current != 0.0 => f64::INFINITY,
            _ => 0.0,
        };
        rows.push(MConvergenceRow {
            m,
            current,
            relative_change,
            wall_time_s,
        });
    }
    Ok(rows)
}

fn m_convergence_sweep(cfg: &SweepConfig, base: &JunctionModel) -> Result<SweepOutput> {
    let table = m_convergence_report(base, &cfg.m_list)?;
    let mut header = vec![x_header(cfg.kind).to_string()];
    header.extend(value_headers(cfg, &[]));
    let rows: Vec<SweepRow> = table
        .iter()
        .map(|r| SweepRow {
            x: r.m as f64,
            values: vec![Cell::Value(r.current), Cell::Value(r.relative_change), Cell::Value(r.wall_time_s)],
            flags: vec![],
        })
        .collect();
    let summary = summarize(cfg.kind, &header, &rows, vec![]);
    Ok(SweepOutput {
        header,
        rows,
        summary,
        failures: vec![],
    })
}
