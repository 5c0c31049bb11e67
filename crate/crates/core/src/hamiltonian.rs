//! The enlarged system: spin plus one truncated reaction coordinate per bath.
//!
//! Basis index `n = s * (M_h * M_c) + l_h * M_c + l_c`, where `s = 0` is spin
//! up (`sigma_z = +1`), `s = 1` is spin down, and `l_h`, `l_c` count the
//! oscillator levels of the hot and cold reaction coordinates.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};

use crate::bath::BathSpec;
use crate::error::{Error, Result};

/// Largest truncation accepted when building the enlarged Hamiltonian.
/// A dense `2M^2 x 2M^2` matrix at this size takes about 80 MB.
pub const MAX_LEVELS: usize = 40;

/// Relative size (in units of the bare tunneling splitting) below which two
/// eigenvalues are treated as degenerate.
pub const DEGENERACY_RELATIVE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BathSide {
    Hot,
    Cold,
}

impl BathSide {
    pub const BOTH: [BathSide; 2] = [BathSide::Hot, BathSide::Cold];
}

/// Spin bias and tunneling plus the two reservoirs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionModel {
    pub epsilon: f64,
    pub delta: f64,
    pub hot: BathSpec,
    pub cold: BathSpec,
}

impl JunctionModel {
    pub fn new(epsilon: f64, delta: f64, hot: BathSpec, cold: BathSpec) -> Result<Self> {
        let model = Self {
            epsilon,
            delta,
            hot,
            cold,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: self.epsilon,
                reason: "must be finite",
            });
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: self.delta,
                reason: "must be finite and > 0",
            });
        }
        self.hot.validate()?;
        self.cold.validate()
    }

    pub fn bath(&self, side: BathSide) -> &BathSpec {
        match side {
            BathSide::Hot => &self.hot,
            BathSide::Cold => &self.cold,
        }
    }

    pub fn with_couplings(mut self, lambda_hot: f64, lambda_cold: f64) -> Self {
        self.hot.lambda = lambda_hot;
        self.cold.lambda = lambda_cold;
        self
    }

    pub fn with_temperatures(mut self, t_hot: f64, t_cold: f64) -> Self {
        self.hot.temperature = t_hot;
        self.cold.temperature = t_cold;
        self
    }

    /// Same couplings, temperatures exchanged.
    pub fn reversed_bias(self) -> Self {
        self.with_temperatures(self.cold.temperature, self.hot.temperature)
    }

    /// Exchanges the two reservoirs wholesale.
    pub fn swapped(self) -> Self {
        Self {
            hot: self.cold,
            cold: self.hot,
            ..self
        }
    }

    /// True when both baths agree in every field except temperature.
    pub fn is_symmetric(&self) -> bool {
        let (h, c) = (&self.hot, &self.cold);
        h.lambda == c.lambda && h.omega_rc == c.omega_rc && h.gamma == c.gamma && h.cutoff == c.cutoff
    }

    pub fn degeneracy_threshold(&self) -> f64 {
        DEGENERACY_RELATIVE * self.delta
    }
}

/// Truncated enlarged-system Hamiltonian and the unit-normalized
/// reaction-coordinate position operators that couple to the residual baths.
#[derive(Debug, Clone)]
pub struct EnlargedSystem {
    m_hot: usize,
    m_cold: usize,
    pub hamiltonian: Array2<f64>,
    pub coupling_hot: Array2<f64>,
    pub coupling_cold: Array2<f64>,
    degeneracy_threshold: f64,
}

impl EnlargedSystem {
    /// Levels per reaction coordinate. For the rectangular debug layout this
    /// is the hot truncation.
    pub fn m_levels(&self) -> usize {
        self.m_hot
    }

    pub fn levels(&self) -> (usize, usize) {
        (self.m_hot, self.m_cold)
    }

    pub fn dimension(&self) -> usize {
        2 * self.m_hot * self.m_cold
    }

    pub fn basis_index(&self, spin_down: bool, l_hot: usize, l_cold: usize) -> usize {
        usize::from(spin_down) * self.m_hot * self.m_cold + l_hot * self.m_cold + l_cold
    }

    pub fn coupling(&self, side: BathSide) -> &Array2<f64> {
        match side {
            BathSide::Hot => &self.coupling_hot,
            BathSide::Cold => &self.coupling_cold,
        }
    }

    pub fn degeneracy_threshold(&self) -> f64 {
        self.degeneracy_threshold
    }
}

pub fn build_enlarged(model: &JunctionModel, m: usize) -> Result<EnlargedSystem> {
    build_enlarged_rectangular(model, m, m)
}

/// Debug layout with different truncations for the two reaction coordinates.
#[doc(hidden)]
pub fn build_enlarged_rectangular(model: &JunctionModel, m_hot: usize, m_cold: usize) -> Result<EnlargedSystem> {
    if m_hot == 0 || m_cold == 0 {
        return Err(Error::Domain("reaction coordinates need at least one level".into()));
    }
    if m_hot > MAX_LEVELS || m_cold > MAX_LEVELS {
        return Err(Error::Resource(format!(
            "M = {} exceeds the limit of {MAX_LEVELS} levels (dimension 2M^2)",
            m_hot.max(m_cold)
        )));
    }
    let block = m_hot * m_cold;
    let dim = 2 * block;
    let mut h = Array2::<f64>::zeros((dim, dim));
    let mut v_hot = Array2::<f64>::zeros((dim, dim));
    let mut v_cold = Array2::<f64>::zeros((dim, dim));
    let index = |s: usize, lh: usize, lc: usize| s * block + lh * m_cold + lc;
    let (wh, wc) = (model.hot.omega_rc, model.cold.omega_rc);
    let (gh, gc) = (model.hot.lambda, model.cold.lambda);

    for s in 0..2 {
        let sz = if s == 0 { 1.0 } else { -1.0 };
        for lh in 0..m_hot {
            for lc in 0..m_cold {
                let n = index(s, lh, lc);
                h[[n, n]] = 0.5 * model.epsilon * sz + wh * (lh as f64 + 0.5) + wc * (lc as f64 + 0.5);
                if s == 0 {
                    let flipped = index(1, lh, lc);
                    h[[n, flipped]] = 0.5 * model.delta;
                    h[[flipped, n]] = 0.5 * model.delta;
                }
                if lh > 0 {
                    let lower = index(s, lh - 1, lc);
                    let x = (lh as f64).sqrt();
                    v_hot[[n, lower]] = x;
                    v_hot[[lower, n]] = x;
                    h[[n, lower]] = sz * gh * x;
                    h[[lower, n]] = sz * gh * x;
                }
                if lc > 0 {
                    let lower = index(s, lh, lc - 1);
                    let x = (lc as f64).sqrt();
                    v_cold[[n, lower]] = x;
                    v_cold[[lower, n]] = x;
                    h[[n, lower]] = sz * gc * x;
                    h[[lower, n]] = sz * gc * x;
                }
            }
        }
    }
    Ok(EnlargedSystem {
        m_hot,
        m_cold,
        hamiltonian: h,
        coupling_hot: v_hot,
        coupling_cold: v_cold,
        degeneracy_threshold: model.degeneracy_threshold(),
    })
}

/// Eigen-decomposition of the enlarged system with couplings rotated into the
/// energy basis.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Array1<f64>,
    /// Columns are eigenvectors; in each column the entry of largest
    /// magnitude is positive (ties go to the lowest index).
    pub eigenvectors: Array2<f64>,
    pub coupling_hot_d: Array2<f64>,
    pub coupling_cold_d: Array2<f64>,
    pub m_levels: usize,
    pub degeneracy_threshold: f64,
    /// `max |U^T U - I|`.
    pub orthogonality_error: f64,
    /// `max |H U - U diag(E)| / max |H|`.
    pub residual: f64,
}

impl Spectrum {
    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn coupling(&self, side: BathSide) -> &Array2<f64> {
        match side {
            BathSide::Hot => &self.coupling_hot_d,
            BathSide::Cold => &self.coupling_cold_d,
        }
    }
}

fn max_abs<'a>(values: impl IntoIterator<Item = &'a f64>) -> f64 {
    values.into_iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn diagonalize(es: &EnlargedSystem) -> Result<Spectrum> {
    let h = &es.hamiltonian;
    let dim = h.nrows();
    let h_max = max_abs(h.iter());
    let (eigenvalues, mut u) = h.eigh(UPLO::Lower).map_err(|e| Error::Eigensolver {
        dimension: dim,
        max_abs: h_max,
        message: e.to_string(),
    })?;

    for mut column in u.columns_mut() {
        let mut pivot = 0;
        for (i, v) in column.iter().enumerate() {
            if v.abs() > column[pivot].abs() {
                pivot = i;
            }
        }
        if column[pivot] < 0.0 {
            column.mapv_inplace(|x| -x);
        }
    }

    let gram = u.t().dot(&u);
    let orthogonality_error = max_abs((&gram - &Array2::<f64>::eye(dim)).iter());
    let hu = h.dot(&u);
    let ue = &u * &eigenvalues.view().insert_axis(ndarray::Axis(0));
    let residual = max_abs((&hu - &ue).iter()) / h_max.max(f64::MIN_POSITIVE);
    if !(orthogonality_error < 1e-10) || !(residual < 1e-8) {
        return Err(Error::Eigensolver {
            dimension: dim,
            max_abs: h_max,
            message: format!("inaccurate decomposition: orthogonality {orthogonality_error:e}, residual {residual:e}"),
        });
    }

    let rotate = |v: &Array2<f64>| u.t().dot(v).dot(&u);
    Ok(Spectrum {
        coupling_hot_d: rotate(&es.coupling_hot),
        coupling_cold_d: rotate(&es.coupling_cold),
        eigenvalues,
        eigenvectors: u,
        m_levels: es.m_levels(),
        degeneracy_threshold: es.degeneracy_threshold(),
        orthogonality_error,
        residual,
    })
}

/// Renormalized two-level model read off the lowest two eigenstates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveSB {
    pub delta_eff: f64,
    /// `<1| V_hot |2>`; signed, physical formulas use `|f|^2`.
    pub f_hot: f64,
    pub f_cold: f64,
    pub m_used: usize,
    pub converged: bool,
    /// The lowest two levels are quasi-degenerate.
    pub ill_conditioned: bool,
}

impl EffectiveSB {
    pub fn f(&self, side: BathSide) -> f64 {
        match side {
            BathSide::Hot => self.f_hot,
            BathSide::Cold => self.f_cold,
        }
    }
}

pub fn effective_sb(spec: &Spectrum) -> Result<EffectiveSB> {
    if spec.dimension() < 2 {
        return Err(Error::Domain("effective model needs at least two levels".into()));
    }
    let delta_eff = spec.eigenvalues[1] - spec.eigenvalues[0];
    let ill_conditioned = delta_eff < spec.degeneracy_threshold;
    if ill_conditioned {
        log::warn!("lowest two levels are quasi-degenerate (gap {delta_eff:e}); effective model is ill-conditioned");
    }
    Ok(EffectiveSB {
        delta_eff,
        f_hot: spec.coupling_hot_d[[0, 1]],
        f_cold: spec.coupling_cold_d[[0, 1]],
        m_used: spec.m_levels,
        converged: true,
        ill_conditioned,
    })
}

/// Effective parameters at a single truncation.
pub fn effective_at(model: &JunctionModel, m: usize) -> Result<EffectiveSB> {
    effective_sb(&diagonalize(&build_enlarged(model, m)?)?)
}

pub fn converge_effective(model: &JunctionModel, tol: f64, m_max: usize) -> Result<EffectiveSB> {
    converge_effective_with_history(model, tol, m_max).map(|(eff, _)| eff)
}

/// Refines `M` from 2 until `Delta_eff` and both `|f_i|` change by less than
/// `tol` (relative) between successive truncations. Returns the accepted
/// parameters and the per-`M` history.
pub fn converge_effective_with_history(
    model: &JunctionModel,
    tol: f64,
    m_max: usize,
) -> Result<(EffectiveSB, Vec<EffectiveSB>)> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if m_max < 2 {
        return Err(Error::Domain(format!("m_max must be at least 2, got {m_max}")));
    }
    let first = effective_at(model, 2)?;
    let mut history = vec![first];
    // Decoupled spin: the lowest two states are exact at any truncation.
    if model.hot.lambda == 0.0 && model.cold.lambda == 0.0 {
        return Ok((first, history));
    }
    let mut previous = first;
    for m in 3..=m_max {
        let current = effective_at(model, m)?;
        history.push(current);
        let gap_change = (current.delta_eff - previous.delta_eff).abs() / current.delta_eff.abs().max(1e-300);
        let f_change = |a: f64, b: f64| (a.abs() - b.abs()).abs() / a.abs().max(1e-12);
        if gap_change < tol
            && f_change(current.f_hot, previous.f_hot) < tol
            && f_change(current.f_cold, previous.f_cold) < tol
        {
            return Ok((current, history));
        }
        previous = current;
    }
    let mut last = previous;
    last.converged = false;
    log::warn!("effective parameters not converged to {tol} by M = {m_max}");
    Ok((last, history))
}

/// Spin with splitting `delta` (`epsilon = 0`) and one oscillator truncated
/// to two levels, written in the bare spin eigenbasis where the coupling
/// `lambda sigma_z X` flips both. Basis `|+,0>, |+,1>, |-,0>, |-,1>`.
pub fn four_level_matrix(delta: f64, omega_rc: f64, lambda: f64) -> Array2<f64> {
    let mut h = Array2::zeros((4, 4));
    h[[0, 0]] = delta + omega_rc;
    h[[1, 1]] = delta + 3.0 * omega_rc;
    h[[2, 2]] = -delta + omega_rc;
    h[[3, 3]] = -delta + 3.0 * omega_rc;
    for (a, b) in [(0, 3), (1, 2)] {
        h[[a, b]] = 2.0 * lambda;
        h[[b, a]] = 2.0 * lambda;
    }
    h * 0.5
}

/// Closed-form gap between the lowest two levels of [`four_level_matrix`].
pub fn four_level_delta_eff(delta: f64, omega_rc: f64, lambda: f64) -> Result<f64> {
    if !(omega_rc > delta) {
        return Err(Error::Domain(format!(
            "closed form assumes omega_rc > delta, got omega_rc = {omega_rc}, delta = {delta}"
        )));
    }
    let common = delta * delta + 4.0 * lambda * lambda + omega_rc * omega_rc;
    let cross = 2.0 * delta * omega_rc;
    Ok(0.5 * (common + cross).sqrt() - 0.5 * (common - cross).sqrt())
}

/// Gaussian-decay fit `ln Delta_eff = c - lambda^2 / lambda_m^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaFit {
    pub lambda_m: f64,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in `ln Delta_eff`.
    pub residual: f64,
}

pub fn fit_lambda_m(samples: &[(f64, f64)]) -> Result<LambdaFit> {
    let points: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(l, d)| *l > 0.0 && *d > 0.0)
        .map(|&(l, d)| (l * l, d.ln()))
        .collect();
    if points.len() < 5 {
        return Err(Error::Fit(format!(
            "need at least 5 samples with lambda > 0 and delta_eff > 0, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all samples share one lambda".into()));
    }
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(Error::Fit(format!("slope {slope:e} is not negative; no Gaussian decay")));
    }
    let intercept = mean_y - slope * mean_x;
    let residual = (points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(LambdaFit {
        lambda_m: (-1.0 / slope).sqrt(),
        slope,
        intercept,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn model(lh: f64, lc: f64, omega: f64) -> JunctionModel {
        let bath = BathSpec::new(lh, omega, 0.0071 / PI, 1000.0 * PI, 1.0).unwrap();
        JunctionModel::new(0.0, 1.0, bath, BathSpec { lambda: lc, temperature: 0.5, ..bath }).unwrap()
    }

    fn sorted_eigenvalues(h: &Array2<f64>) -> Vec<f64> {
        let (e, _) = h.eigh(UPLO::Lower).unwrap();
        e.to_vec()
    }

    #[test]
    fn single_level_is_bare_spin() {
        let mut m = model(3.0, 2.0, 28.0);
        m.epsilon = 0.4;
        let es = build_enlarged(&m, 1).unwrap();
        assert_eq!(es.dimension(), 2);
        assert!(es.coupling_hot.iter().all(|&x| x == 0.0));
        assert!(es.coupling_cold.iter().all(|&x| x == 0.0));
        let spec = diagonalize(&es).unwrap();
        let half = 0.5 * (0.4f64.powi(2) + 1.0).sqrt();
        assert!((spec.eigenvalues[0] - (28.0 - half)).abs() < 1e-12);
        assert!((spec.eigenvalues[1] - (28.0 + half)).abs() < 1e-12);
    }

    #[test]
    fn structure_is_symmetric_and_local() {
        let es = build_enlarged(&model(2.0, 1.5, 28.0), 3).unwrap();
        let d = es.dimension();
        assert_eq!(d, 18);
        for i in 0..d {
            for j in 0..d {
                assert_eq!(es.hamiltonian[[i, j]], es.hamiltonian[[j, i]]);
                assert_eq!(es.coupling_hot[[i, j]], es.coupling_hot[[j, i]]);
            }
            assert_eq!(es.coupling_hot[[i, i]], 0.0);
            assert_eq!(es.coupling_cold[[i, i]], 0.0);
        }
        // V_hot only connects neighbouring hot levels at fixed spin and cold level.
        for s in [false, true] {
            for lh in 0..3 {
                for lc in 0..3 {
                    let n = es.basis_index(s, lh, lc);
                    for t in [false, true] {
                        for kh in 0..3 {
                            for kc in 0..3 {
                                let k = es.basis_index(t, kh, kc);
                                let v = es.coupling_hot[[n, k]];
                                let allowed = s == t && lc == kc && (lh as i64 - kh as i64).abs() == 1;
                                if allowed {
                                    assert_eq!(v, (lh.max(kh) as f64).sqrt());
                                } else {
                                    assert_eq!(v, 0.0);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn decoupled_spectrum_is_tensor_sum() {
        let mut m = model(0.0, 0.0, 7.0);
        m.cold.omega_rc = 5.0;
        m.epsilon = 0.3;
        let spec = diagonalize(&build_enlarged(&m, 3).unwrap()).unwrap();
        let half = 0.5 * (0.09f64 + 1.0).sqrt();
        let mut expected = Vec::new();
        for s in [-half, half] {
            for lh in 0..3 {
                for lc in 0..3 {
                    expected.push(s + 7.0 * (lh as f64 + 0.5) + 5.0 * (lc as f64 + 0.5));
                }
            }
        }
        expected.sort_by(f64::total_cmp);
        for (a, b) in spec.eigenvalues.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_closed_form_four_level_model() {
        for lambda in [0.0, 1.0, 3.0, 7.5] {
            let es = build_enlarged(&model(lambda, 0.0, 28.0), 2).unwrap();
            let full = sorted_eigenvalues(&es.hamiltonian);
            let c = sorted_eigenvalues(&four_level_matrix(1.0, 28.0, lambda));
            // Cold oscillator frozen in |0> adds 14 to the lowest four levels.
            let lowest: Vec<f64> = full.iter().take(2).map(|e| e - 14.0).collect();
            assert!((lowest[0] - c[0]).abs() < 1e-10 && (lowest[1] - c[1]).abs() < 1e-10);
            let gap = four_level_delta_eff(1.0, 28.0, lambda).unwrap();
            assert!(((c[1] - c[0]) - gap).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_limits() {
        assert!((four_level_delta_eff(1.0, 28.0, 0.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(four_level_delta_eff(2.0, 1.0, 0.5).is_err());
        for k in 0..=20 {
            let lambda = 0.2 * 28.0 * k as f64 / 20.0;
            let exact = four_level_delta_eff(1.0, 28.0, lambda).unwrap();
            let approx = (-2.0 * lambda * lambda / 784.0).exp();
            assert!((exact - approx).abs() < 0.01);
        }
    }

    #[test]
    fn sign_convention_and_accuracy() {
        let spec = diagonalize(&build_enlarged(&model(2.0, 3.0, 10.0), 3).unwrap()).unwrap();
        for col in spec.eigenvectors.columns() {
            let mut pivot = 0;
            for (i, v) in col.iter().enumerate() {
                if v.abs() > col[pivot].abs() {
                    pivot = i;
                }
            }
            assert!(col[pivot] > 0.0);
        }
        assert!(spec.orthogonality_error < 1e-12);
        assert!(spec.residual < 1e-10);
        let trace: f64 = build_enlarged(&model(2.0, 3.0, 10.0), 3).unwrap().hamiltonian.diag().sum();
        assert!((spec.eigenvalues.sum() / trace - 1.0).abs() < 1e-10);
    }

    #[test]
    fn effective_parameters_at_zero_coupling() {
        let mut m = model(0.0, 0.0, 28.0);
        m.epsilon = 0.7;
        let eff = effective_at(&m, 3).unwrap();
        assert!((eff.delta_eff - (0.49f64 + 1.0).sqrt()).abs() < 1e-12);
        assert_eq!(eff.f_hot.abs(), 0.0);
        assert_eq!(eff.f_cold.abs(), 0.0);
    }

    #[test]
    fn effective_gap_decreases_and_coupling_grows_linearly() {
        let mut last = f64::INFINITY;
        for k in 0..=16 {
            let eff = effective_at(&model(0.5 * k as f64, 0.5 * k as f64, 28.0), 4).unwrap();
            assert!(eff.delta_eff < last);
            last = eff.delta_eff;
        }
        let small = effective_at(&model(0.1, 0.1, 28.0), 4).unwrap();
        let double = effective_at(&model(0.2, 0.2, 28.0), 4).unwrap();
        let ratio = double.f_hot.abs() / small.f_hot.abs();
        assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn exchange_symmetry() {
        let mut m = model(1.3, 2.1, 12.0);
        m.cold.omega_rc = 9.0;
        m.epsilon = 0.2;
        let a = diagonalize(&build_enlarged(&m, 3).unwrap()).unwrap();
        let b = diagonalize(&build_enlarged(&m.swapped(), 3).unwrap()).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(b.eigenvalues.iter()) {
            assert!((x - y).abs() < 1e-10);
        }
        let ea = effective_sb(&a).unwrap();
        let eb = effective_sb(&b).unwrap();
        assert!((ea.f_hot.abs() - eb.f_cold.abs()).abs() < 1e-10);
    }

    #[test]
    fn decoupled_cold_oscillator_factorizes() {
        let m = model(3.0, 0.0, 28.0);
        let narrow = effective_sb(&diagonalize(&build_enlarged_rectangular(&m, 4, 1).unwrap()).unwrap()).unwrap();
        let square = effective_at(&m, 4).unwrap();
        assert!((narrow.delta_eff - square.delta_eff).abs() < 1e-8);
        assert!((narrow.f_hot.abs() - square.f_hot.abs()).abs() < 1e-8);
    }

    #[test]
    fn convergence_in_m() {
        let (eff, history) = converge_effective_with_history(&model(0.0, 0.0, 28.0), 1e-3, 6).unwrap();
        assert!(eff.converged && eff.m_used == 2 && history.len() == 1);

        let (eff, history) = converge_effective_with_history(&model(4.0, 4.0, 28.0), 1e-3, 8).unwrap();
        assert!(eff.converged);
        assert!(eff.m_used <= 5, "m_used {}", eff.m_used);
        assert_eq!(history.last().unwrap().m_used, eff.m_used);

        let (eff, _) = converge_effective_with_history(&model(20.0, 20.0, 28.0), 1e-12, 3).unwrap();
        assert!(!eff.converged && eff.m_used == 3);
        assert!(converge_effective(&model(1.0, 1.0, 28.0), 0.0, 4).is_err());
        assert!(converge_effective(&model(1.0, 1.0, 28.0), 1e-3, 1).is_err());
    }

    #[test]
    fn lambda_m_fit() {
        let data: Vec<(f64, f64)> = (1..=10).map(|k| (0.3 * k as f64, (-(0.09 * (k * k) as f64) / 4.0).exp())).collect();
        let fit = fit_lambda_m(&data).unwrap();
        assert!((fit.lambda_m - 2.0).abs() < 1e-10);
        let scaled: Vec<(f64, f64)> = data.iter().map(|&(l, d)| (l, 3.7 * d)).collect();
        assert!((fit_lambda_m(&scaled).unwrap().lambda_m - 2.0).abs() < 1e-10);

        let closed: Vec<(f64, f64)> = (1..=20)
            .map(|k| {
                let l = 0.3 * 28.0 * k as f64 / 20.0;
                (l, four_level_delta_eff(1.0, 28.0, l).unwrap())
            })
            .collect();
        let fit = fit_lambda_m(&closed).unwrap();
        assert!((fit.lambda_m / (28.0 / 2f64.sqrt()) - 1.0).abs() < 0.1);

        let growing: Vec<(f64, f64)> = (1..=6).map(|k| (k as f64, k as f64)).collect();
        assert!(matches!(fit_lambda_m(&growing), Err(Error::Fit(_))));
        assert!(matches!(fit_lambda_m(&data[..3]), Err(Error::Fit(_))));
    }

    #[test]
    fn resource_limit() {
        assert!(matches!(build_enlarged(&model(1.0, 1.0, 28.0), MAX_LEVELS + 1), Err(Error::Resource(_))));
        assert!(matches!(build_enlarged(&model(1.0, 1.0, 28.0), 0), Err(Error::Domain(_))));
    }
}
