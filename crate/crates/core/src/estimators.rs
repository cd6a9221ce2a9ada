//! Radiance contributed by one photon beam to one camera ray segment.
//!
//! Both estimators use box spatial kernels: `1/(2R)` across the beam for the
//! 1D blur and `1/(πR²)` over the disc around the beam for the 2D blur.

use std::f64::consts::PI;

use thiserror::Error;

use crate::beam_map::RayBeamIntersection;
use crate::kernels::TemporalKernel;
use crate::media::Medium;
use crate::photon::PhotonBeam;
use crate::spectrum::Spectrum;

/// Below this magnitude `(1 - e^{-x}) / x` is evaluated by its Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatialBlur {
    /// Blur along the ray only, paired with a temporal kernel.
    Blur1D,
    /// Blur over the disc around the beam, with a uniform time footprint.
    Blur2D,
}

/// How a splat spreads its value over time. Both supports integrate to one.
#[derive(Debug, Clone, Copy)]
pub enum TimeSupport<'k> {
    /// Uniform over `[t_minus, t_plus]`; a zero-width interval is a point mass.
    Uniform { t_minus: f64, t_plus: f64 },
    /// `kernel` centred at `center` with half-width `bandwidth`.
    Kernel {
        center: f64,
        bandwidth: f64,
        kernel: &'k dyn TemporalKernel,
    },
}

impl TimeSupport<'_> {
    /// Fraction of the unit mass lying before `t`.
    pub fn cdf(&self, t: f64) -> f64 {
        match *self {
            TimeSupport::Uniform { t_minus, t_plus } => {
                if t_plus > t_minus {
                    ((t - t_minus) / (t_plus - t_minus)).clamp(0.0, 1.0)
                } else if t >= t_minus {
                    1.0
                } else {
                    0.0
                }
            }
            TimeSupport::Kernel {
                center,
                bandwidth,
                kernel,
            } => kernel.cdf((t - center) / bandwidth),
        }
    }

    /// Density at `t` (infinite nowhere; a point mass reports zero).
    pub fn density(&self, t: f64) -> f64 {
        match *self {
            TimeSupport::Uniform { t_minus, t_plus } => {
                if t_plus > t_minus && t >= t_minus && t <= t_plus {
                    1.0 / (t_plus - t_minus)
                } else {
                    0.0
                }
            }
            TimeSupport::Kernel {
                center,
                bandwidth,
                kernel,
            } => kernel.eval_scaled(t - center, bandwidth),
        }
    }

    /// Closed interval outside of which the density vanishes.
    pub fn extent(&self) -> (f64, f64) {
        match *self {
            TimeSupport::Uniform { t_minus, t_plus } => (t_minus, t_plus),
            TimeSupport::Kernel { center, bandwidth, .. } => (center - bandwidth, center + bandwidth),
        }
    }
}

/// Radiance spread over time for one pixel.
#[derive(Debug, Clone, Copy)]
pub struct RadianceSplat<'k> {
    pub value: Spectrum,
    pub support: TimeSupport<'k>,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EstimatorError {
    #[error("negative radiance {0:?} from beam estimate")]
    NegativeRadiance(Spectrum),
}

/// `(1 - e^{-x}) / x`, continuous through `x = 0`.
pub fn one_minus_exp_over_x(x: f64) -> f64 {
    if x.abs() < SERIES_THRESHOLD {
        1.0 - 0.5 * x + x * x / 6.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// 2D blur estimate. Integrates the transmittance-weighted in-scattering
/// exactly over the part of the ray inside the blur cylinder. The time
/// footprint is spread evenly over the interval's arrival times.
pub fn estimate_beam_2d<'k>(
    isect: &RayBeamIntersection,
    beam: &PhotonBeam,
    medium: &Medium,
) -> Result<RadianceSplat<'k>, EstimatorError> {
    let width = isect.s_r_plus - isect.s_r_minus;
    let st = medium.sigma_t();
    let kernel = 1.0 / (PI * beam.radius * beam.radius);
    let phase = medium.phase.eval_unchecked(isect.cos_theta);
    // along the ray the summed distance grows at rate 1 - cos(theta)
    let x = st * (1.0 - isect.cos_theta) * width;
    let attenuation = (-st * (isect.s_r_minus + isect.s_b_at_entry)).exp();
    let scalar = kernel * phase * medium.sigma_s() * attenuation * width * one_minus_exp_over_x(x);
    let value = beam.flux * scalar;
    if !value.is_nonnegative() {
        return Err(EstimatorError::NegativeRadiance(value));
    }
    Ok(RadianceSplat {
        value,
        support: TimeSupport::Uniform {
            t_minus: isect.t_minus,
            t_plus: isect.t_plus,
        },
    })
}

/// 1D blur estimate at the closest approach, spread in time by `kernel`.
/// Returns `None` for near-parallel pairs and for pairs whose closest
/// approach falls outside either segment.
pub fn estimate_beam_1d<'k>(
    isect: &RayBeamIntersection,
    beam: &PhotonBeam,
    medium: &Medium,
    kernel: &'k dyn TemporalKernel,
    bandwidth: f64,
) -> Option<RadianceSplat<'k>> {
    if isect.degenerate || !isect.closest_in_segments {
        return None;
    }
    let st = medium.sigma_t();
    let scalar =
        medium.phase.eval_unchecked(isect.cos_theta) * medium.sigma_s() * (-st * (isect.s_b + isect.s_r)).exp()
            / (2.0 * beam.radius * isect.sin_theta);
    Some(RadianceSplat {
        value: beam.flux * scalar,
        support: TimeSupport::Kernel {
            center: isect.t_center,
            bandwidth,
            kernel,
        },
    })
}
