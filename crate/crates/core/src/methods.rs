//! Heat-current calculators and the rectification study.
//!
//! The reported scalar current is the hot-side current `J_h` (positive when
//! heat leaves the hot bath).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::{arr1, arr2, Array2};
use ndarray_linalg::{Eigh, UPLO};

use crate::bath::{bose_occupation, j_ssb, BathSpec};
use crate::error::{Error, Result};
use crate::hamiltonian::{converge_effective, BathSide, EffectiveSB, JunctionModel};
use crate::redfield::{solve_junction, solve_setup, BathChannel, RateFunction, RedfieldSetup};

pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_M_MAX: usize = 8;

/// Below this magnitude a reverse current makes the rectification ratio undefined.
pub const MIN_REVERSE_CURRENT: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Redfield equation on the enlarged system with `M` levels per oscillator.
    RcQme(usize),
    /// Redfield equation on the bare spin with Brownian rates.
    Bmr,
    /// Closed-form two-level current with converged effective parameters.
    EffSb { tol: f64, m_max: usize },
}

impl Method {
    pub fn effsb() -> Self {
        Method::EffSb {
            tol: DEFAULT_TOL,
            m_max: DEFAULT_M_MAX,
        }
    }

    /// Column label used in sweep output.
    pub fn label(&self) -> String {
        match self {
            Method::RcQme(m) => format!("J_rcqme_M{m}"),
            Method::Bmr => "J_bmr".into(),
            Method::EffSb { .. } => "J_effsb".into(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::RcQme(m) => write!(f, "rcqme:{m}"),
            Method::Bmr => write!(f, "bmr"),
            Method::EffSb { .. } => write!(f, "effsb"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    /// `rcqme:M`, `bmr` or `effsb`. EFF-SB takes the default tolerance and
    /// truncation limit.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "bmr" => Ok(Method::Bmr),
            "effsb" => Ok(Method::effsb()),
            _ => {
                let m = s
                    .strip_prefix("rcqme:")
                    .and_then(|m| m.parse::<usize>().ok())
                    .ok_or_else(|| Error::Config(format!("unknown method `{s}`; expected rcqme:M, bmr or effsb")))?;
                if m == 0 {
                    return Err(Error::Config("rcqme needs M >= 1".into()));
                }
                Ok(Method::RcQme(m))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: Method,
    /// Hot-side current.
    pub current: f64,
    pub current_cold: Option<f64>,
    pub m_used: Option<usize>,
    pub delta_eff: Option<f64>,
    pub f_hot: Option<f64>,
    pub f_cold: Option<f64>,
    pub converged: Option<bool>,
    /// Set when a numerical diagnostic was exceeded (residual, degeneracy,
    /// failed cross-check).
    pub warning: bool,
}

impl MethodResult {
    fn bare(method: Method, current: f64) -> Self {
        Self {
            method,
            current,
            current_cold: None,
            m_used: None,
            delta_eff: None,
            f_hot: None,
            f_cold: None,
            converged: None,
            warning: false,
        }
    }
}

pub fn evaluate(model: &JunctionModel, method: Method) -> Result<MethodResult> {
    match method {
        Method::RcQme(m) => current_rcqme(model, m),
        Method::Bmr => current_bmr(model),
        Method::EffSb { tol, m_max } => current_effsb(model, tol, m_max),
    }
}

pub fn current_rcqme(model: &JunctionModel, m: usize) -> Result<MethodResult> {
    let r = solve_junction(model, m)?;
    Ok(MethodResult {
        current_cold: Some(r.current_cold),
        m_used: Some(m),
        warning: r.residual_warning,
        ..MethodResult::bare(Method::RcQme(m), r.current_hot)
    })
}

/// Golden-rule current through a two-level system with splitting `gap` and
/// effective spectral densities `j_hot`, `j_cold` evaluated at the gap.
pub fn two_level_current(gap: f64, j_hot: f64, j_cold: f64, n_hot: f64, n_cold: f64) -> f64 {
    let denominator = j_hot * (2.0 * n_hot + 1.0) + j_cold * (2.0 * n_cold + 1.0);
    if denominator == 0.0 {
        return 0.0;
    }
    2.0 * PI * gap * j_hot * j_cold * (n_hot - n_cold) / denominator
}

/// Bare-spin current for `epsilon = 0` in closed form.
pub fn bmr_closed_form(model: &JunctionModel) -> Result<f64> {
    let d = model.delta;
    Ok(two_level_current(
        d,
        j_ssb(d, &model.hot),
        j_ssb(d, &model.cold),
        bose_occupation(d, model.hot.temperature)?,
        bose_occupation(d, model.cold.temperature)?,
    ))
}

pub fn current_bmr(model: &JunctionModel) -> Result<MethodResult> {
    let h = arr2(&[
        [0.5 * model.epsilon, 0.5 * model.delta],
        [0.5 * model.delta, -0.5 * model.epsilon],
    ]);
    let (energies, u) = h.eigh(UPLO::Lower).map_err(|e| Error::Eigensolver {
        dimension: 2,
        max_abs: model.epsilon.abs().max(model.delta) * 0.5,
        message: e.to_string(),
    })?;
    let sigma_z = arr2(&[[1.0, 0.0], [0.0, -1.0]]);
    let coupling: Array2<f64> = u.t().dot(&sigma_z).dot(&u);
    let coupling = (&coupling + &coupling.t()) * 0.5;
    let channel = |side: BathSide, bath: BathSpec| BathChannel {
        side,
        coupling: coupling.clone(),
        rate: RateFunction::Brownian(bath),
    };
    let setup = RedfieldSetup::from_parts(
        arr1(&[energies[0], energies[1]]),
        vec![channel(BathSide::Hot, model.hot), channel(BathSide::Cold, model.cold)],
        model.degeneracy_threshold(),
    )?;
    let mut warning = false;
    let (hot, cold) = if model.hot.lambda == 0.0 && model.cold.lambda == 0.0 {
        (0.0, 0.0)
    } else {
        let r = solve_setup(&setup)?;
        warning = r.residual_warning;
        (r.current_hot, r.current_cold)
    };
    if model.epsilon == 0.0 {
        let closed = bmr_closed_form(model)?;
        if (hot - closed).abs() > 1e-8 * closed.abs().max(1e-300) && (hot - closed).abs() > 1e-18 {
            log::warn!("BMR solver {hot:e} disagrees with the closed form {closed:e}");
            warning = true;
        }
    }
    Ok(MethodResult {
        current_cold: Some(cold),
        warning,
        ..MethodResult::bare(Method::Bmr, hot)
    })
}

/// Effective Ohmic spectral density `gamma Delta_eff |f|^2 exp(-Delta_eff / Lambda)`.
pub fn effective_spectral_density(eff: &EffectiveSB, bath: &BathSpec, side: BathSide) -> f64 {
    let f = eff.f(side);
    bath.gamma * eff.delta_eff * f * f * (-eff.delta_eff / bath.cutoff).exp()
}

/// Closed-form EFF-SB current for given effective parameters.
pub fn effsb_current(eff: &EffectiveSB, model: &JunctionModel) -> Result<f64> {
    let gap = eff.delta_eff;
    Ok(two_level_current(
        gap,
        effective_spectral_density(eff, &model.hot, BathSide::Hot),
        effective_spectral_density(eff, &model.cold, BathSide::Cold),
        bose_occupation(gap, model.hot.temperature)?,
        bose_occupation(gap, model.cold.temperature)?,
    ))
}

/// Symmetric-junction form of [`effsb_current`], using `|f_hot|` for both
/// baths. `with_cutoff = false` drops `exp(-Delta_eff / Lambda)`.
pub fn effsb_symmetric_current(eff: &EffectiveSB, model: &JunctionModel, with_cutoff: bool) -> Result<f64> {
    let gap = eff.delta_eff;
    let n_h = bose_occupation(gap, model.hot.temperature)?;
    let n_c = bose_occupation(gap, model.cold.temperature)?;
    let cutoff = if with_cutoff {
        (-gap / model.hot.cutoff).exp()
    } else {
        1.0
    };
    Ok(2.0 * PI * model.hot.gamma * eff.f_hot * eff.f_hot * gap * gap * cutoff * (n_h - n_c)
        / (2.0 * n_h + 2.0 * n_c + 2.0))
}

pub fn current_effsb(model: &JunctionModel, tol: f64, m_max: usize) -> Result<MethodResult> {
    let eff = converge_effective(model, tol, m_max)?;
    let meta = |current: f64, warning: bool| MethodResult {
        m_used: Some(eff.m_used),
        delta_eff: Some(eff.delta_eff),
        f_hot: Some(eff.f_hot),
        f_cold: Some(eff.f_cold),
        converged: Some(eff.converged),
        warning,
        ..MethodResult::bare(Method::EffSb { tol, m_max }, current)
    };
    if eff.ill_conditioned {
        return Ok(meta(0.0, true));
    }
    let current = effsb_current(&eff, model)?;
    let mut warning = !eff.converged;
    if model.is_symmetric() && model.hot.lambda == model.cold.lambda && eff.delta_eff < 1e-3 * model.hot.cutoff {
        let symmetric = effsb_symmetric_current(&eff, model, true)?;
        if (current - symmetric).abs() > 1e-10 * current.abs().max(1e-300) && (current - symmetric).abs() > 1e-20 {
            log::warn!("EFF-SB current {current:e} disagrees with the symmetric form {symmetric:e}");
            warning = true;
        }
    }
    Ok(meta(current, warning))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectificationResult {
    pub chi: f64,
    pub lambda: f64,
    pub current_forward: f64,
    pub current_reverse: f64,
    pub ratio: f64,
}

/// Sets `lambda_h = lambda (1 - chi)`, `lambda_c = lambda (1 + chi)` and
/// compares the currents under the original and the reversed temperature bias.
pub fn rectification(model: &JunctionModel, lambda_mean: f64, chi: f64, method: Method) -> Result<RectificationResult> {
    if !(chi.abs() < 1.0) {
        return Err(Error::Domain(format!("asymmetry chi must satisfy |chi| < 1, got {chi}")));
    }
    let forward_model = model.with_couplings(lambda_mean * (1.0 - chi), lambda_mean * (1.0 + chi));
    let forward = evaluate(&forward_model, method)?.current;
    let reverse = evaluate(&forward_model.reversed_bias(), method)?.current;
    if reverse.abs() < MIN_REVERSE_CURRENT {
        return Err(Error::UndefinedRatio { reverse });
    }
    Ok(RectificationResult {
        chi,
        lambda: lambda_mean,
        current_forward: forward,
        current_reverse: reverse,
        ratio: (forward / reverse).abs(),
    })
}

/// Closed-form rectification ratio of the effective two-level model for
/// baths that differ only in temperature and coupling, with coupling ratio
/// `r = |f_hot|^2 / |f_cold|^2`.
pub fn rectification_analytic(eff: &EffectiveSB, t_hot: f64, t_cold: f64) -> Result<f64> {
    if !(eff.delta_eff > 0.0) {
        return Err(Error::Domain(format!("need delta_eff > 0, got {}", eff.delta_eff)));
    }
    let r = (eff.f_hot * eff.f_hot) / (eff.f_cold * eff.f_cold);
    rectification_from_ratio(r, bose_occupation(eff.delta_eff, t_hot)?, bose_occupation(eff.delta_eff, t_cold)?)
}

/// `[r(2n_c+1) + (2n_h+1)] / [r(2n_h+1) + (2n_c+1)]`; `r = inf` gives the limit.
pub fn rectification_from_ratio(r: f64, n_hot: f64, n_cold: f64) -> Result<f64> {
    let (a, b) = (2.0 * n_hot + 1.0, 2.0 * n_cold + 1.0);
    if r.is_infinite() {
        return Ok(b / a);
    }
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("coupling ratio must be >= 0, got {r}")));
    }
    Ok((r * b + a) / (r * a + b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RectificationTrend {
    pub rows: Vec<RectificationResult>,
    pub nondecreasing: bool,
}

pub fn rectification_strength_trend(
    model: &JunctionModel,
    lambdas: &[f64],
    chi: f64,
    method: Method,
) -> Result<RectificationTrend> {
    if lambdas.len() < 2 {
        return Err(Error::Domain("trend needs at least two coupling strengths".into()));
    }
    let rows = lambdas
        .iter()
        .map(|&l| rectification(model, l, chi, method))
        .collect::<Result<Vec<_>>>()?;
    let nondecreasing = rows.windows(2).all(|w| w[1].ratio >= w[0].ratio);
    Ok(RectificationTrend { rows, nondecreasing })
}
