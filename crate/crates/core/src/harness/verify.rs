//! Oracle suite behind the `verify` subcommand.

use std::f64::consts::PI;
use std::fmt;

use crate::bath::{gamma_rate, kernel_equivalence_residual, BathSpec};
use crate::hamiltonian::{four_level_delta_eff, build_enlarged_rectangular, diagonalize, effective_at, JunctionModel};
use crate::methods::{bmr_closed_form, current_bmr};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{status}] {}: {}", self.name, self.detail)
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
}

fn worst<I: Iterator<Item = f64>>(it: I) -> f64 {
    it.fold(0.0, f64::max)
}

fn check(name: &'static str, value: f64, bound: f64) -> Check {
    Check {
        name,
        passed: value.is_finite() && value < bound,
        detail: format!("{value:.3e} < {bound:.0e}"),
    }
}

fn kernel_check(name: &'static str, bath: BathSpec) -> Check {
    let residual = worst(log_grid(1e-2 * bath.omega_rc, 1e2 * bath.omega_rc, 50).map(|w| {
        kernel_equivalence_residual(w, &bath).unwrap_or(f64::INFINITY)
    }));
    check(name, residual, 1e-8)
}

/// Runs the closed-form oracles; every check is cheap (well under a second).
pub fn run_verification() -> Vec<Check> {
    let fig4 = BathSpec {
        lambda: 2.0,
        omega_rc: 28.0,
        gamma: 0.0071 / PI,
        cutoff: 1000.0 * PI,
        temperature: 1.0,
    };
    let fig11a = BathSpec {
        omega_rc: 10.0,
        gamma: 0.005,
        ..fig4
    };
    let fig11b = BathSpec { omega_rc: 5.0, ..fig11a };
    let model = JunctionModel {
        epsilon: 0.0,
        delta: 1.0,
        hot: fig4,
        cold: fig4.with_temperature(0.5),
    };

    let mut checks = vec![
        kernel_check("kernel equivalence, Omega = 28", fig4),
        kernel_check("kernel equivalence, Omega = 10", fig11a),
        kernel_check("kernel equivalence, Omega = 5", fig11b),
    ];

    let c_oracle = worst((0..=20).map(|k| {
        let lambda = 0.5 * 28.0 * k as f64 / 20.0;
        let m = model.with_couplings(lambda, 0.0);
        let numeric = build_enlarged_rectangular(&m, 2, 1)
            .and_then(|es| diagonalize(&es))
            .map(|s| s.eigenvalues[1] - s.eigenvalues[0]);
        match (numeric, four_level_delta_eff(1.0, 28.0, lambda)) {
            (Ok(n), Ok(c)) => (n / c - 1.0).abs(),
            _ => f64::INFINITY,
        }
    }));
    checks.push(check("four-level closed-form splitting", c_oracle, 1e-10));

    let balance = worst(log_grid(1e-2, 50.0, 30).map(|w| {
        let ratio = gamma_rate(-w, &fig4) / gamma_rate(w, &fig4);
        (ratio / (w / fig4.temperature).exp() - 1.0).abs()
    }));
    checks.push(check("detailed balance of residual-bath rates", balance, 1e-12));

    let decoupled = effective_at(&model.with_couplings(0.0, 0.0), 3)
        .map(|e| (e.delta_eff - 1.0).abs() + e.f_hot.abs() + e.f_cold.abs())
        .unwrap_or(f64::INFINITY);
    checks.push(check("decoupled effective parameters", decoupled, 1e-12));

    let bmr = [0.1, 1.0, 4.0]
        .iter()
        .map(|&l| {
            let m = model.with_couplings(l, l);
            match (current_bmr(&m), bmr_closed_form(&m)) {
                (Ok(r), Ok(c)) => (r.current / c - 1.0).abs(),
                _ => f64::INFINITY,
            }
        })
        .fold(0.0, f64::max);
    checks.push(check("bare-spin solver against closed form", bmr, 1e-8));
    checks
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for c in super::run_verification() {
            assert!(c.passed, "{c}");
        }
    }
}
