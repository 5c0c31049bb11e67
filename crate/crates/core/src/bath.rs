//! Bath spectral densities, thermal occupations and the rates built from them.
//!
//! Energies are measured in units of the bare tunneling splitting with
//! `hbar = k_B = 1`. Two spectral families appear:
//!
//! * the Brownian-oscillator density of the original spin-boson model,
//!   `J(w) = 4 g w W^2 l^2 / ((W^2 - w^2)^2 + (2 pi g W w)^2)`, and
//! * the Ohmic density of the residual baths left after extracting a reaction
//!   coordinate, `J(w) = g w exp(-w / cutoff)`.
//!
//! Rates follow the convention that a positive frequency is energy absorbed
//! by the system from the bath, so `gamma_rate(w) = pi J(w) n(w)` for `w > 0`
//! and `pi J(|w|) (n(|w|) + 1)` for `w < 0`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{self, QuadratureEstimate};

/// Above this width parameter the second-order treatment of the residual
/// bath is questionable; a warning is logged.
pub const GAMMA_WARNING_THRESHOLD: f64 = 0.1;

/// Physical parameters of one reservoir.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    /// Coupling of the spin to the reaction coordinate.
    pub lambda: f64,
    /// Reaction-coordinate frequency, the peak of the Brownian density.
    pub omega_rc: f64,
    /// Dimensionless width / residual coupling.
    pub gamma: f64,
    /// High-frequency cutoff of the residual Ohmic bath.
    pub cutoff: f64,
    pub temperature: f64,
}

/// Which spectral density a rate is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectralFamily {
    /// Brownian oscillator density of the standard spin-boson model.
    Brownian,
    /// Ohmic density of the residual bath after the reaction-coordinate mapping.
    Ohmic,
}

impl BathSpec {
    pub fn new(lambda: f64, omega_rc: f64, gamma: f64, cutoff: f64, temperature: f64) -> Result<Self> {
        let spec = Self {
            lambda,
            omega_rc,
            gamma,
            cutoff,
            temperature,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, value, reason })
            }
        }
        check(self.lambda.is_finite() && self.lambda >= 0.0, "lambda", self.lambda, "must be finite and >= 0")?;
        check(self.omega_rc.is_finite() && self.omega_rc > 0.0, "omega_rc", self.omega_rc, "must be finite and > 0")?;
        check(self.gamma.is_finite() && self.gamma > 0.0, "gamma", self.gamma, "must be finite and > 0")?;
        check(self.cutoff > 0.0 && !self.cutoff.is_nan(), "cutoff", self.cutoff, "must be > 0")?;
        check(
            self.temperature.is_finite() && self.temperature > 0.0,
            "temperature",
            self.temperature,
            "must be finite and > 0",
        )?;
        if !self.is_weakly_damped() {
            log::warn!(
                "gamma = {} exceeds {}; the residual bath is no longer weakly coupled",
                self.gamma,
                GAMMA_WARNING_THRESHOLD
            );
        }
        Ok(())
    }

    pub fn is_weakly_damped(&self) -> bool {
        self.gamma <= GAMMA_WARNING_THRESHOLD
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    pub fn with_temperature(self, temperature: f64) -> Self {
        Self { temperature, ..self }
    }

    /// Spectral density of the given family at `omega >= 0`.
    pub fn spectral_density(&self, family: SpectralFamily, omega: f64) -> f64 {
        match family {
            SpectralFamily::Brownian => j_ssb(omega, self),
            SpectralFamily::Ohmic => j_rc(omega, self),
        }
    }

    /// `lim_{w->0} J(w) / w` for the given family.
    pub fn low_frequency_slope(&self, family: SpectralFamily) -> f64 {
        match family {
            SpectralFamily::Brownian => 4.0 * self.gamma * self.lambda * self.lambda / (self.omega_rc * self.omega_rc),
            SpectralFamily::Ohmic => self.gamma,
        }
    }
}

/// Bose–Einstein occupation `1 / (exp(omega / T) - 1)`.
pub fn bose_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("bose_occupation needs omega > 0, got {omega}")));
    }
    if !(temperature > 0.0) {
        return Err(Error::Domain(format!(
            "bose_occupation needs temperature > 0, got {temperature}"
        )));
    }
    Ok(1.0 / (omega / temperature).exp_m1())
}

/// Brownian-oscillator spectral density of the standard spin-boson model.
pub fn j_ssb(omega: f64, bath: &BathSpec) -> f64 {
    if omega == 0.0 {
        return 0.0;
    }
    let w2 = bath.omega_rc * bath.omega_rc;
    let detuning = w2 - omega * omega;
    let damping = 2.0 * PI * bath.gamma * bath.omega_rc * omega;
    4.0 * bath.gamma * omega * w2 * bath.lambda * bath.lambda / (detuning * detuning + damping * damping)
}

/// Ohmic spectral density of the residual bath.
pub fn j_rc(omega: f64, bath: &BathSpec) -> f64 {
    bath.gamma * omega * (-omega / bath.cutoff).exp()
}

/// Golden-rule rate for exchanging energy `omega` with an Ohmic residual bath.
pub fn gamma_rate(omega: f64, bath: &BathSpec) -> f64 {
    family_rate(omega, bath, SpectralFamily::Ohmic)
}

/// [`gamma_rate`] for an arbitrary spectral family. At `omega == 0` the
/// continuous limit `pi T lim J(w)/w` is returned.
pub fn family_rate(omega: f64, bath: &BathSpec, family: SpectralFamily) -> f64 {
    let t = bath.temperature;
    if omega == 0.0 {
        return PI * bath.low_frequency_slope(family) * t;
    }
    let w = omega.abs();
    let j = bath.spectral_density(family, w);
    // Deep-quantum limit: exp_m1 overflows to inf and n -> 0.
    let n = 1.0 / (w / t).exp_m1();
    if omega > 0.0 {
        PI * j * n
    } else {
        PI * j * (n + 1.0)
    }
}

/// Reaction-coordinate parameters after absorbing the quadratic term by a
/// squeezing rotation of each oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedBathParams {
    pub eta: f64,
    pub lambda_tilde: f64,
    pub omega_tilde: f64,
    pub gamma_tilde: f64,
}

pub fn rotated_params(bath: &BathSpec) -> RotatedBathParams {
    let eta = bath.gamma * bath.cutoff / bath.omega_rc;
    let scale = 1.0 + 4.0 * eta;
    let root = scale.sqrt();
    RotatedBathParams {
        eta,
        lambda_tilde: bath.lambda / root.sqrt(),
        omega_tilde: bath.omega_rc * root,
        gamma_tilde: bath.gamma / root,
    }
}

/// Compares the imaginary part of the memory kernel generated by the
/// reaction-coordinate model (spin coupled to one oscillator that is damped
/// by an Ohmic bath with infinite cutoff) with `pi J_SSB(omega)` and returns
/// `|ratio - 1|`.
///
/// A finite cutoff would add an `O(omega / cutoff)` correction to the
/// damping; the comparison is made in the infinite-cutoff limit.
pub fn kernel_equivalence_residual(omega: f64, bath: &BathSpec) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!(
            "kernel comparison needs omega > 0 (J_SSB vanishes at 0), got {omega}"
        )));
    }
    let target = PI * j_ssb(omega, bath);
    if target == 0.0 {
        return Err(Error::Domain("J_SSB(omega) is zero; ratio undefined".into()));
    }
    let w = bath.omega_rc;
    let kappa_sq = 2.0 * w * bath.lambda * bath.lambda;
    let z = Complex64::new(omega, 0.0);
    let damping = Complex64::new(0.0, 2.0 * PI * w * bath.gamma);
    let l = -z * z + damping * z;
    let kernel = kappa_sq / (w * w) * l / (w * w + l);
    Ok((kernel.im / target - 1.0).abs())
}

/// `integral_0^inf J(w) / w dw`.
///
/// The Ohmic case is the closed form `gamma * cutoff`. The Brownian case is
/// integrated adaptively on `[0, 50 W]`, split at the peak, and the bound
/// `4 g W^2 l^2 / (3 (1 - 1/2500)^2 (50 W)^3)` on the remaining tail is folded
/// into the error estimate.
pub fn reorganization_energy(bath: &BathSpec, family: SpectralFamily) -> Result<QuadratureEstimate> {
    match family {
        SpectralFamily::Ohmic => Ok(QuadratureEstimate {
            value: bath.gamma * bath.cutoff,
            error_estimate: 0.0,
            evaluations: 0,
        }),
        SpectralFamily::Brownian => {
            let w = bath.omega_rc;
            let slope = bath.low_frequency_slope(SpectralFamily::Brownian);
            let integrand = |x: f64| if x == 0.0 { slope } else { j_ssb(x, bath) / x };
            let upper = 50.0 * w;
            // Panels that resolve the Lorentzian peak of half-width ~ pi g W.
            let width = (PI * bath.gamma * w).max(1e-6 * w);
            let mut breaks = vec![0.0, w];
            for k in [1.0, 10.0, 100.0] {
                let d = k * width;
                if d < w {
                    breaks.push(w - d);
                }
                if w + d < upper {
                    breaks.push(w + d);
                }
            }
            breaks.push(upper);
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            let mut value = 0.0;
            let mut error = 0.0;
            let mut evaluations = 0;
            for pair in breaks.windows(2) {
                let part = quad::integrate(integrand, pair[0], pair[1], 1e-15, 1e-11, 4000).map_err(|e| match e {
                    Error::Quadrature { partial, error_estimate } => Error::Quadrature {
                        partial: value + partial,
                        error_estimate: error + error_estimate,
                    },
                    other => other,
                })?;
                value += part.value;
                error += part.error_estimate;
                evaluations += part.evaluations;
            }
            let tail = 4.0 * bath.gamma * w * w * bath.lambda * bath.lambda
                / (3.0 * (1.0 - 1.0 / 2500.0_f64).powi(2) * upper.powi(3));
            Ok(QuadratureEstimate {
                value,
                error_estimate: error + tail,
                evaluations,
            })
        }
    }
}
