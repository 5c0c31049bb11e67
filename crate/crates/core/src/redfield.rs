//! Non-secular Redfield dynamics of the enlarged system in its energy
//! eigenbasis, steady states and per-bath heat currents.
//!
//! Density matrices are vectorized column-major: `rho[m, n]` sits at index
//! `m + n * d`.
//!
//! For a bath with energy-basis coupling `V` and golden-rule rate `G(w)`
//! (emission at `w < 0`), let `W[j, k] = V[j, k] * G(E_j - E_k)` and
//! `A = V W`. The dissipator is
//!
//! ```text
//! D(rho) = -A rho - rho A^T + W rho V + V rho W^T
//! ```
//!
//! which is `-[V, W rho - rho W^T]` with the principal-value (Lamb shift)
//! parts dropped.

use std::f64::consts::FRAC_1_SQRT_2;

use ndarray::{s, Array1, Array2, ArrayViewMut1};
use ndarray_linalg::{EigValsh, JobSvd, SVDDC, UPLO};
use num_complex::Complex64;

use crate::bath::{family_rate, gamma_rate, BathSpec, SpectralFamily};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_enlarged, diagonalize, BathSide, JunctionModel, Spectrum};

/// Singular values below this fraction of the largest count toward the null space.
pub const NULL_SPACE_RELATIVE: f64 = 1e-10;
/// Steady-state residual above which a warning is raised.
pub const RESIDUAL_WARNING: f64 = 1e-8;
/// The Redfield generator is not completely positive; steady-state
/// eigenvalues down to `-POSITIVITY_WARNING` are logged at debug level only.
pub const POSITIVITY_WARNING: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateFunction {
    /// Residual Ohmic bath of a reaction coordinate.
    Ohmic(BathSpec),
    /// Brownian spectral density acting directly on the spin.
    Brownian(BathSpec),
    Zero,
}

impl RateFunction {
    pub fn rate(&self, omega: f64) -> f64 {
        match self {
            RateFunction::Ohmic(b) => gamma_rate(omega, b),
            RateFunction::Brownian(b) => family_rate(omega, b, SpectralFamily::Brownian),
            RateFunction::Zero => 0.0,
        }
    }
}

/// One residual bath: its coupling operator in the energy basis and its rate.
#[derive(Debug, Clone)]
pub struct BathChannel {
    pub side: BathSide,
    pub coupling: Array2<f64>,
    pub rate: RateFunction,
}

#[derive(Debug, Clone)]
pub struct RedfieldSetup {
    pub energies: Array1<f64>,
    pub channels: Vec<BathChannel>,
    /// Bohr frequencies smaller than this are treated as exactly zero.
    pub degeneracy_threshold: f64,
}

impl RedfieldSetup {
    /// Residual Ohmic baths acting on the reaction coordinates.
    pub fn from_spectrum(spectrum: &Spectrum, model: &JunctionModel) -> Self {
        let channels = BathSide::BOTH
            .iter()
            .map(|&side| BathChannel {
                side,
                coupling: spectrum.coupling(side).clone(),
                rate: RateFunction::Ohmic(*model.bath(side)),
            })
            .collect();
        Self {
            energies: spectrum.eigenvalues.clone(),
            channels,
            degeneracy_threshold: spectrum.degeneracy_threshold,
        }
    }

    pub fn from_parts(energies: Array1<f64>, channels: Vec<BathChannel>, degeneracy_threshold: f64) -> Result<Self> {
        let d = energies.len();
        for ch in &channels {
            if ch.coupling.dim() != (d, d) {
                return Err(Error::Domain(format!(
                    "coupling is {:?}, expected {d}x{d}",
                    ch.coupling.dim()
                )));
            }
            for i in 0..d {
                for j in 0..i {
                    if (ch.coupling[[i, j]] - ch.coupling[[j, i]]).abs() > 1e-12 * (1.0 + ch.coupling[[i, j]].abs()) {
                        return Err(Error::Domain("coupling operator must be symmetric".into()));
                    }
                }
            }
        }
        Ok(Self {
            energies,
            channels,
            degeneracy_threshold,
        })
    }

    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    /// `W` and `A = V W` for one channel.
    fn rate_weighted(&self, ch: &BathChannel) -> (Array2<f64>, Array2<f64>) {
        let d = self.dimension();
        let mut w = Array2::<f64>::zeros((d, d));
        for j in 0..d {
            for k in 0..d {
                let v = ch.coupling[[j, k]];
                if v != 0.0 {
                    let mut omega = self.energies[j] - self.energies[k];
                    if omega.abs() < self.degeneracy_threshold {
                        omega = 0.0;
                    }
                    w[[j, k]] = v * ch.rate.rate(omega);
                }
            }
        }
        let a = ch.coupling.dot(&w);
        (w, a)
    }
}

/// Column-major vectorization.
pub fn vectorize(rho: &Array2<Complex64>) -> Array1<Complex64> {
    rho.t().iter().copied().collect()
}

pub fn unvectorize(v: &Array1<Complex64>, d: usize) -> Array2<Complex64> {
    Array2::from_shape_fn((d, d), |(m, n)| v[m + n * d])
}

/// Redfield generator split into a real dissipative matrix and the Bohr
/// frequencies of the coherent part.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    dim: usize,
    /// `E_m - E_n`.
    pub bohr: Array2<f64>,
    /// `d^2 x d^2`, acting on column-major vectorized matrices.
    pub dissipative: Array2<f64>,
}

impl Liouvillian {
    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// Full complex superoperator.
    pub fn to_complex(&self) -> Array2<Complex64> {
        let d = self.dim;
        let mut l = self.dissipative.mapv(|x| Complex64::new(x, 0.0));
        for m in 0..d {
            for n in 0..d {
                let i = m + n * d;
                l[[i, i]] += Complex64::new(0.0, -self.bohr[[m, n]]);
            }
        }
        l
    }

    pub fn apply(&self, rho: &Array2<Complex64>) -> Array2<Complex64> {
        let d = self.dim;
        let v = vectorize(rho);
        let re = self.dissipative.dot(&v.mapv(|z| z.re));
        let im = self.dissipative.dot(&v.mapv(|z| z.im));
        Array2::from_shape_fn((d, d), |(m, n)| {
            let i = m + n * d;
            Complex64::new(re[i], im[i]) + Complex64::new(0.0, -self.bohr[[m, n]]) * rho[[m, n]]
        })
    }
}

pub fn build_liouvillian(setup: &RedfieldSetup) -> Liouvillian {
    let d = setup.dimension();
    let e = &setup.energies;
    let bohr = Array2::from_shape_fn((d, d), |(m, n)| e[m] - e[n]);
    let mut r = Array2::<f64>::zeros((d * d, d * d));
    for ch in &setup.channels {
        let (w, a) = setup.rate_weighted(ch);
        let v = &ch.coupling;
        // Row (m, n), column (j, k):
        // -d_nk A_mj - d_mj A_nk + V_nk W_mj + W_nk V_mj
        for n in 0..d {
            for k in 0..d {
                let (vnk, wnk) = (v[[n, k]], w[[n, k]]);
                let diag_nk = n == k;
                if vnk == 0.0 && wnk == 0.0 && !diag_nk {
                    continue;
                }
                for m in 0..d {
                    let row = m + n * d;
                    let mut out = r.slice_mut(s![row, k * d..(k + 1) * d]);
                    for j in 0..d {
                        let mut x = vnk * w[[m, j]] + wnk * v[[m, j]];
                        if diag_nk {
                            x -= a[[m, j]];
                        }
                        out[j] += x;
                    }
                }
            }
        }
        for m in 0..d {
            for n in 0..d {
                let row = m + n * d;
                for k in 0..d {
                    r[[row, m + k * d]] -= a[[n, k]];
                }
            }
        }
    }
    Liouvillian {
        dim: d,
        bohr,
        dissipative: r,
    }
}

/// Real matrix of the generator restricted to Hermitian matrices, in the
/// orthonormal basis `E_aa`, `(E_ab + E_ba)/sqrt2`, `i(E_ab - E_ba)/sqrt2`
/// (`a < b`). Coordinates are ordered as all diagonal entries first, then
/// the `(x_ab, y_ab)` pairs in row-major order of `(a, b)`.
fn hermitian_real_form(l: &Liouvillian) -> Array2<f64> {
    let d = l.dim;
    let n = d * d;
    let s = FRAC_1_SQRT_2;
    let r = &l.dissipative;
    let pairs = upper_pairs(d);
    let project = |o_re: &[f64], o_im: &[f64], mut col: ArrayViewMut1<f64>| {
        for c in 0..d {
            col[c] = o_re[c + c * d];
        }
        for (p, &(c, e)) in pairs.iter().enumerate() {
            col[d + 2 * p] = (o_re[c + e * d] + o_re[e + c * d]) * s;
            col[d + 2 * p + 1] = (o_im[c + e * d] - o_im[e + c * d]) * s;
        }
    };
    let mut g = Array2::<f64>::zeros((n, n));
    let mut o_re = vec![0.0; n];
    let mut o_im = vec![0.0; n];
    for a in 0..d {
        let aa = a + a * d;
        for i in 0..n {
            o_re[i] = r[[i, aa]];
            o_im[i] = 0.0;
        }
        project(&o_re, &o_im, g.column_mut(a));
    }
    for (p, &(a, b)) in pairs.iter().enumerate() {
        let (ab, ba) = (a + b * d, b + a * d);
        let w = l.bohr[[a, b]] * s;
        for i in 0..n {
            o_re[i] = (r[[i, ab]] + r[[i, ba]]) * s;
            o_im[i] = 0.0;
        }
        o_im[ab] = -w;
        o_im[ba] = w;
        project(&o_re, &o_im, g.column_mut(d + 2 * p));

        for i in 0..n {
            o_re[i] = 0.0;
            o_im[i] = (r[[i, ab]] - r[[i, ba]]) * s;
        }
        o_re[ab] = w;
        o_re[ba] = w;
        project(&o_re, &o_im, g.column_mut(d + 2 * p + 1));
    }
    g
}

const REFINEMENT_STEPS: usize = 2;

/// Dot product in twice the working precision (Ogita, Rump and Oishi's Dot2).
fn compensated_dot(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    let (mut sum, mut err) = (0.0_f64, 0.0_f64);
    for (&x, &y) in a.iter().zip(b.iter()) {
        let p = x * y;
        let p_err = x.mul_add(y, -p);
        let t = sum + p;
        let z = t - sum;
        err += (sum - (t - z)) + (p - z) + p_err;
        sum = t;
    }
    sum + err
}

fn upper_pairs(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|a| (a + 1..d).map(move |b| (a, b))).collect()
}

fn from_hermitian_coordinates(x: &Array1<f64>, d: usize) -> Array2<Complex64> {
    let mut rho = Array2::<Complex64>::zeros((d, d));
    for a in 0..d {
        rho[[a, a]] = Complex64::new(x[a], 0.0);
    }
    for (p, &(a, b)) in upper_pairs(d).iter().enumerate() {
        let z = Complex64::new(x[d + 2 * p], x[d + 2 * p + 1]) * FRAC_1_SQRT_2;
        rho[[a, b]] = z;
        rho[[b, a]] = z.conj();
    }
    rho
}

/// Hermitian, unit-trace density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Array2<Complex64>);

impl DensityMatrix {
    /// Hermitizes and normalizes the trace.
    pub fn new(matrix: Array2<Complex64>) -> Result<Self> {
        let (r, c) = matrix.dim();
        if r != c || r == 0 {
            return Err(Error::Domain(format!("density matrix must be square and nonempty, got {r}x{c}")));
        }
        let herm = (&matrix + &matrix.t().mapv(|z| z.conj())) * Complex64::new(0.5, 0.0);
        let trace: f64 = herm.diag().iter().map(|z| z.re).sum();
        if !(trace.abs() > 1e-300) || !trace.is_finite() {
            return Err(Error::Domain(format!("cannot normalize a matrix with trace {trace:e}")));
        }
        Ok(Self(herm / Complex64::new(trace, 0.0)))
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.0.diag().sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.0.diag().iter().map(|z| z.re).collect()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dimension();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((self.0[[i, j]] - self.0[[j, i]].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let ev = self
            .0
            .eigvalsh(UPLO::Lower)
            .map_err(|e| Error::Eigensolver {
                dimension: self.dimension(),
                max_abs: self.0.iter().fold(0.0, |m, z| m.max(z.norm())),
                message: e.to_string(),
            })?;
        Ok(ev.iter().copied().fold(f64::INFINITY, f64::min))
    }
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// `||L vec(rho)|| / ||L||_F`.
    pub residual_norm: f64,
    pub null_space_dim: usize,
    /// Of the row-equilibrated real generator, descending.
    pub singular_values: Vec<f64>,
    pub min_eigenvalue: f64,
    pub residual_warning: bool,
}

/// Null vector of the generator via a full SVD of its real Hermitian form.
///
/// Rows are scaled to unit norm first: the coherent part is much larger than
/// the dissipative one and would otherwise limit the accuracy of the
/// dissipative balance that fixes the heat currents.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyState> {
    solve_null_space(l, false)
}

/// With `allow_degenerate`, a multi-dimensional null space is accepted and
/// the state is the projection of the identity onto it.
fn solve_null_space(l: &Liouvillian, allow_degenerate: bool) -> Result<SteadyState> {
    let d = l.dim;
    let g = hermitian_real_form(l);
    let g_norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut scaled = g.clone();
    for mut row in scaled.rows_mut() {
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row /= norm;
        }
    }
    let (u, sigma, vt) = scaled.svddc(JobSvd::All).map_err(|e| Error::Svd(e.to_string()))?;
    let (u, vt) = match (u, vt) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Svd("singular vectors missing".into())),
    };
    let sigma_max = sigma[0];
    let null_space_dim = sigma.iter().filter(|&&x| x < NULL_SPACE_RELATIVE * sigma_max).count();
    if null_space_dim == 0 || (null_space_dim != 1 && !allow_degenerate) {
        return Err(Error::DegenerateSteadyState {
            dimension: null_space_dim,
        });
    }
    let n = vt.nrows();
    let mut x = Array1::<f64>::zeros(n);
    for row in vt.slice(s![n - null_space_dim.., ..]).rows() {
        let overlap: f64 = row.slice(s![..d]).sum();
        x.scaled_add(if null_space_dim == 1 { 1.0 } else { overlap }, &row);
    }
    // Refinement against the non-null singular directions, with residuals
    // accumulated in compensated arithmetic.
    let rank = n - null_space_dim;
    for _ in 0..REFINEMENT_STEPS {
        let r = Array1::from_iter(scaled.rows().into_iter().map(|row| compensated_dot(row, x.view())));
        let coeffs = u.slice(s![.., ..rank]).t().dot(&r) / sigma.slice(s![..rank]);
        x -= &vt.slice(s![..rank, ..]).t().dot(&coeffs);
    }
    let trace: f64 = x.slice(s![..d]).sum();
    let x = x / trace;
    let residual = g.dot(&x);
    let residual_norm = residual.dot(&residual).sqrt() / g_norm.max(f64::MIN_POSITIVE);
    let rho = DensityMatrix::new(from_hermitian_coordinates(&x, d))?;
    let min_eigenvalue = rho.min_eigenvalue()?;
    let residual_warning = residual_norm > RESIDUAL_WARNING;
    if residual_warning {
        log::warn!("steady-state residual {residual_norm:e} exceeds {RESIDUAL_WARNING:e}");
    }
    if min_eigenvalue < -POSITIVITY_WARNING {
        log::warn!("steady state has a negative eigenvalue {min_eigenvalue:e}");
    } else if min_eigenvalue < 0.0 {
        log::debug!("steady state has a negative eigenvalue {min_eigenvalue:e}");
    }
    Ok(SteadyState {
        rho,
        residual_norm,
        null_space_dim,
        singular_values: sigma.to_vec(),
        min_eigenvalue,
        residual_warning,
    })
}

fn real_to_complex(a: &Array2<f64>) -> Array2<Complex64> {
    a.mapv(|x| Complex64::new(x, 0.0))
}

/// Redfield terms of all channels attached to `side`, without the coherent part.
pub fn dissipator_apply(setup: &RedfieldSetup, side: BathSide, rho: &Array2<Complex64>) -> Array2<Complex64> {
    let d = setup.dimension();
    let mut out = Array2::<Complex64>::zeros((d, d));
    for ch in setup.channels.iter().filter(|c| c.side == side) {
        let (w, a) = setup.rate_weighted(ch);
        let (w, a, v) = (real_to_complex(&w), real_to_complex(&a), real_to_complex(&ch.coupling));
        out = out - a.dot(rho) - rho.dot(&a.t()) + w.dot(rho).dot(&v) + v.dot(rho).dot(&w.t());
    }
    out
}

/// `-i [H, rho]` in the energy basis.
pub fn coherent_apply(setup: &RedfieldSetup, rho: &Array2<Complex64>) -> Array2<Complex64> {
    let e = &setup.energies;
    Array2::from_shape_fn(rho.dim(), |(m, n)| Complex64::new(0.0, -(e[m] - e[n])) * rho[[m, n]])
}

/// `Tr[D_side(rho) H]`, positive when energy flows from the bath into the system.
///
/// Energies are measured from the ground state; each dissipator is
/// trace-free, so the shift only removes cancellation against the
/// zero-point energy of the oscillators.
pub fn heat_current(setup: &RedfieldSetup, rho: &DensityMatrix, side: BathSide) -> f64 {
    let d_rho = dissipator_apply(setup, side, rho.matrix());
    let e0 = setup.energies.iter().copied().fold(f64::INFINITY, f64::min);
    d_rho
        .diag()
        .iter()
        .zip(setup.energies.iter())
        .map(|(z, e)| z.re * (e - e0))
        .sum()
}

#[derive(Debug, Clone)]
pub struct SteadyStateResult {
    pub rho: DensityMatrix,
    pub current_hot: f64,
    pub current_cold: f64,
    pub residual_norm: f64,
    pub null_space_dim: usize,
    pub min_eigenvalue: f64,
    pub residual_warning: bool,
    pub singular_values: Vec<f64>,
}

pub fn solve_setup(setup: &RedfieldSetup) -> Result<SteadyStateResult> {
    solve_setup_inner(setup, false)
}

fn solve_setup_inner(setup: &RedfieldSetup, allow_degenerate: bool) -> Result<SteadyStateResult> {
    let ss = solve_null_space(&build_liouvillian(setup), allow_degenerate)?;
    Ok(SteadyStateResult {
        current_hot: heat_current(setup, &ss.rho, BathSide::Hot),
        current_cold: heat_current(setup, &ss.rho, BathSide::Cold),
        rho: ss.rho,
        residual_norm: ss.residual_norm,
        null_space_dim: ss.null_space_dim,
        min_eigenvalue: ss.min_eigenvalue,
        residual_warning: ss.residual_warning,
        singular_values: ss.singular_values,
    })
}

/// Largest `M` accepted by the dense steady-state solver. The real generator
/// has `4 M^4` rows; at `M = 6` that is 5184 and a full SVD takes minutes.
pub const MAX_SOLVER_LEVELS: usize = 6;

/// Enlarged system, energy basis, Redfield generator, steady state and both
/// currents.
///
/// When the spin is decoupled (`lambda_h = lambda_c = 0` or `M = 1`) the
/// stationary state is not unique. Every stationary state then carries zero
/// current (reported as exactly zero), and the projection of the identity onto the null space is
/// returned with `null_space_dim > 1`.
pub fn solve_junction(model: &JunctionModel, m: usize) -> Result<SteadyStateResult> {
    if m > MAX_SOLVER_LEVELS {
        return Err(Error::Resource(format!(
            "M = {m} exceeds the dense solver limit of {MAX_SOLVER_LEVELS}"
        )));
    }
    let decoupled = m == 1 || (model.hot.lambda == 0.0 && model.cold.lambda == 0.0);
    let spectrum = diagonalize(&build_enlarged(model, m)?)?;
    let mut r = solve_setup_inner(&RedfieldSetup::from_spectrum(&spectrum, model), decoupled)?;
    if decoupled {
        r.current_hot = 0.0;
        r.current_cold = 0.0;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn fig4_model(lambda: f64) -> JunctionModel {
        let hot = BathSpec::new(lambda, 28.0, 0.0071 / PI, 1000.0 * PI, 1.0).unwrap();
        JunctionModel::new(0.0, 1.0, hot, hot.with_temperature(0.5)).unwrap()
    }

    fn two_level(t: f64, gap: f64) -> RedfieldSetup {
        let bath = BathSpec::new(0.0, 1.0, 0.02, 50.0, t).unwrap();
        let coupling = ndarray::arr2(&[[0.3, 1.0], [1.0, -0.2]]);
        RedfieldSetup::from_parts(
            ndarray::arr1(&[0.0, gap]),
            vec![BathChannel {
                side: BathSide::Hot,
                coupling,
                rate: RateFunction::Ohmic(bath),
            }],
            1e-9,
        )
        .unwrap()
    }

    fn hermitian(d: usize, seed: u64) -> Array2<Complex64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let a = Array2::from_shape_fn((d, d), |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        &a + &a.t().mapv(|z| z.conj())
    }

    #[test]
    fn vectorization_round_trip() {
        let rho = hermitian(4, 1);
        let v = vectorize(&rho);
        assert_eq!(v[2 + 4], rho[[2, 1]]);
        assert_eq!(unvectorize(&v, 4), rho);
    }

    #[test]
    fn matrix_and_superoperator_forms_agree() {
        let m = fig4_model(2.0);
        let spec = diagonalize(&build_enlarged(&m, 2).unwrap()).unwrap();
        let setup = RedfieldSetup::from_spectrum(&spec, &m);
        let l = build_liouvillian(&setup);
        let full = l.to_complex();
        for seed in 0..5 {
            let rho = hermitian(8, seed);
            let direct = coherent_apply(&setup, &rho)
                + dissipator_apply(&setup, BathSide::Hot, &rho)
                + dissipator_apply(&setup, BathSide::Cold, &rho);
            let via_l = l.apply(&rho);
            let via_full = unvectorize(&full.dot(&vectorize(&rho)), 8);
            let scale = direct.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
            for ((x, y), z) in direct.iter().zip(via_l.iter()).zip(via_full.iter()) {
                assert!((x - y).norm() < 1e-12 * scale.max(1.0));
                assert!((x - z).norm() < 1e-12 * scale.max(1.0));
            }
        }
    }

    #[test]
    fn trace_and_hermiticity_preserved() {
        let m = fig4_model(3.0);
        let spec = diagonalize(&build_enlarged(&m, 3).unwrap()).unwrap();
        let setup = RedfieldSetup::from_spectrum(&spec, &m);
        let l = build_liouvillian(&setup);
        let d = 18;
        // Trace functional: sum over diagonal rows of each column.
        let scale = l.dissipative.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        for col in 0..d * d {
            let t: f64 = (0..d).map(|a| l.dissipative[[a + a * d, col]]).sum();
            assert!(t.abs() < 1e-12 * scale.max(1.0));
        }
        for seed in 0..20 {
            let out = l.apply(&hermitian(d, seed));
            for i in 0..d {
                for j in 0..d {
                    assert!((out[[i, j]] - out[[j, i]].conj()).norm() < 1e-12);
                }
            }
            for side in BathSide::BOTH {
                let dr = dissipator_apply(&setup, side, &hermitian(d, seed));
                assert!(dr.diag().sum().norm() < 1e-12);
            }
        }
    }

    #[test]
    fn two_level_gibbs_state() {
        for (t, gap) in [(1.0, 1.0), (0.5, 1.0), (2.0, 0.3)] {
            let setup = two_level(t, gap);
            let ss = steady_state(&build_liouvillian(&setup)).unwrap();
            let p = ss.rho.populations();
            assert!((p[1] / p[0] - (-gap / t).exp()).abs() < 1e-8, "{p:?}");
            assert!((ss.rho.trace().re - 1.0).abs() < 1e-12);
            assert!(ss.rho.hermiticity_error() < 1e-14);
            assert_eq!(ss.null_space_dim, 1);
        }
    }

    #[test]
    fn closed_system_is_degenerate() {
        let mut setup = two_level(1.0, 1.0);
        setup.channels[0].rate = RateFunction::Zero;
        let l = build_liouvillian(&setup);
        assert!(l.dissipative.iter().all(|&x| x == 0.0));
        assert!(matches!(steady_state(&l), Err(Error::DegenerateSteadyState { dimension: 2 })));
        let rho = hermitian(2, 3);
        assert!(dissipator_apply(&setup, BathSide::Hot, &rho).iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn equilibrium_carries_no_current() {
        let m = fig4_model(1.0).with_temperatures(0.75, 0.75);
        let r = solve_junction(&m, 3).unwrap();
        assert!(r.current_hot.abs() < 1e-12 && r.current_cold.abs() < 1e-12, "{} {}", r.current_hot, r.current_cold);
        // Only the lowest pair is populated above rounding at T = 0.75.
        let p = r.rho.populations();
        assert!(p[0] >= p[1] && p[2..].iter().all(|&x| x < 1e-12));
    }

    #[test]
    fn currents_are_conserved_and_flow_downhill() {
        for lambda in [0.5, 2.0, 5.0] {
            let r = solve_junction(&fig4_model(lambda), 3).unwrap();
            let scale = r.current_hot.abs().max(r.current_cold.abs());
            assert!((r.current_hot + r.current_cold).abs() < 1e-10 * scale + 1e-14);
            assert!(r.current_hot > 0.0 && r.current_cold < 0.0);
            assert!(!r.residual_warning);
            assert!(r.min_eigenvalue > -1e-6);
        }
    }

    #[test]
    fn decoupled_spin_carries_no_current() {
        for (lambda, m) in [(0.0, 2), (0.0, 3), (3.0, 1)] {
            let r = solve_junction(&fig4_model(lambda), m).unwrap();
            assert!(r.null_space_dim > 1);
            assert!(r.current_hot.abs() < 1e-12 && r.current_cold.abs() < 1e-12);
            assert!((r.rho.trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn solver_limit() {
        assert!(matches!(solve_junction(&fig4_model(1.0), MAX_SOLVER_LEVELS + 1), Err(Error::Resource(_))));
    }
}
