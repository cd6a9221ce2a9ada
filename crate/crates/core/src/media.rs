//! Homogeneous participating media: extinction, phase functions, free-flight
//! sampling and time of flight.

use std::f64::consts::PI;

use rand::Rng;
use thiserror::Error;

use crate::math::Vec3;

/// Speed of light in vacuum [m/s].
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub const INV_4PI: f64 = 1.0 / (4.0 * PI);

/// Below this |g| the Henyey-Greenstein inversion loses precision and the
/// isotropic sampler is used instead.
const HG_ISOTROPIC_EPS: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MediaError {
    #[error("distance must be finite and non-negative, got {0}")]
    InvalidDistance(f64),
    #[error("index of refraction must be >= 1, got {0}")]
    InvalidIor(f64),
    #[error("cosine must lie in [-1, 1], got {0}")]
    CosineOutOfRange(f64),
    #[error("{name} must be finite and non-negative, got {value}")]
    InvalidCoefficient { name: &'static str, value: f64 },
    #[error("Henyey-Greenstein asymmetry must lie in (-1, 1), got {0}")]
    InvalidAsymmetry(f64),
}

/// Angular scattering distribution. Scattering delay is always zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseFunction {
    Isotropic,
    HenyeyGreenstein { g: f64 },
}

impl PhaseFunction {
    pub fn henyey_greenstein(g: f64) -> Result<Self, MediaError> {
        if !(g > -1.0 && g < 1.0) {
            return Err(MediaError::InvalidAsymmetry(g));
        }
        Ok(PhaseFunction::HenyeyGreenstein { g })
    }

    /// Mean cosine of the distribution.
    pub fn asymmetry(&self) -> f64 {
        match *self {
            PhaseFunction::Isotropic => 0.0,
            PhaseFunction::HenyeyGreenstein { g } => g,
        }
    }

    /// Phase value for the cosine between the propagation direction before
    /// and after scattering. Inputs are not range checked; see [`eval_phase`].
    #[inline]
    pub fn eval_unchecked(&self, cos_theta: f64) -> f64 {
        match *self {
            PhaseFunction::Isotropic => INV_4PI,
            PhaseFunction::HenyeyGreenstein { g } => {
                let denom = 1.0 + g * g - 2.0 * g * cos_theta;
                INV_4PI * (1.0 - g * g) / (denom * denom.sqrt())
            }
        }
    }

    /// Sample a scattered direction around the propagation direction `incoming`.
    pub fn sample_direction<R: Rng + ?Sized>(&self, incoming: Vec3, rng: &mut R) -> (Vec3, f64) {
        let s = sample_phase(self, rng);
        let (t, b) = incoming.orthonormal_basis();
        let sin_theta = (1.0 - s.cos_theta * s.cos_theta).max(0.0).sqrt();
        let (sp, cp) = s.phi.sin_cos();
        let dir = (t * (sin_theta * cp) + b * (sin_theta * sp) + incoming * s.cos_theta).normalized();
        (dir, s.pdf)
    }
}

/// Homogeneous medium. Coefficients are in 1/m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    sigma_a: f64,
    sigma_s: f64,
    sigma_t: f64,
    pub phase: PhaseFunction,
    ior: f64,
}

impl Medium {
    pub fn new(sigma_a: f64, sigma_s: f64, phase: PhaseFunction, ior: f64) -> Result<Self, MediaError> {
        for (name, value) in [("sigma_a", sigma_a), ("sigma_s", sigma_s)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(MediaError::InvalidCoefficient { name, value });
            }
        }
        if !(ior.is_finite() && ior >= 1.0) {
            return Err(MediaError::InvalidIor(ior));
        }
        if let PhaseFunction::HenyeyGreenstein { g } = phase {
            PhaseFunction::henyey_greenstein(g)?;
        }
        Ok(Self {
            sigma_a,
            sigma_s,
            sigma_t: sigma_a + sigma_s,
            phase,
            ior,
        })
    }

    /// Non-scattering region with the given index of refraction.
    pub fn clear(ior: f64) -> Result<Self, MediaError> {
        Self::new(0.0, 0.0, PhaseFunction::Isotropic, ior)
    }

    pub fn vacuum() -> Self {
        Self {
            sigma_a: 0.0,
            sigma_s: 0.0,
            sigma_t: 0.0,
            phase: PhaseFunction::Isotropic,
            ior: 1.0,
        }
    }

    pub fn sigma_a(&self) -> f64 {
        self.sigma_a
    }
    pub fn sigma_s(&self) -> f64 {
        self.sigma_s
    }
    pub fn sigma_t(&self) -> f64 {
        self.sigma_t
    }
    pub fn ior(&self) -> f64 {
        self.ior
    }

    /// Single-scattering albedo; zero for a non-extinguishing region.
    pub fn albedo(&self) -> f64 {
        if self.sigma_t > 0.0 {
            self.sigma_s / self.sigma_t
        } else {
            0.0
        }
    }

    pub fn is_participating(&self) -> bool {
        self.sigma_t > 0.0
    }

    #[inline]
    pub fn transmittance_unchecked(&self, distance: f64) -> f64 {
        (-self.sigma_t * distance).exp()
    }
}

/// `exp(-sigma_t * distance)`.
pub fn transmittance(medium: &Medium, distance: f64) -> Result<f64, MediaError> {
    if !(distance.is_finite() && distance >= 0.0) {
        return Err(MediaError::InvalidDistance(distance));
    }
    Ok(medium.transmittance_unchecked(distance))
}

/// Propagation delay `eta / c * distance` in seconds.
pub fn time_of_flight(eta: f64, distance: f64) -> Result<f64, MediaError> {
    if !(eta >= 1.0) {
        return Err(MediaError::InvalidIor(eta));
    }
    if !(distance.is_finite() && distance >= 0.0) {
        return Err(MediaError::InvalidDistance(distance));
    }
    Ok(eta / SPEED_OF_LIGHT * distance)
}

pub fn eval_phase(phase: &PhaseFunction, cos_theta: f64) -> Result<f64, MediaError> {
    if !(-1.0..=1.0).contains(&cos_theta) {
        return Err(MediaError::CosineOutOfRange(cos_theta));
    }
    Ok(phase.eval_unchecked(cos_theta))
}

/// A scattering angle relative to the incoming propagation axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSample {
    pub cos_theta: f64,
    pub phi: f64,
    pub pdf: f64,
}

pub fn sample_phase<R: Rng + ?Sized>(phase: &PhaseFunction, rng: &mut R) -> PhaseSample {
    let u: f64 = rng.random();
    let phi = 2.0 * PI * rng.random::<f64>();
    let cos_theta = match *phase {
        PhaseFunction::HenyeyGreenstein { g } if g.abs() >= HG_ISOTROPIC_EPS => {
            let sq = (1.0 - g * g) / (1.0 - g + 2.0 * g * u);
            ((1.0 + g * g - sq * sq) / (2.0 * g)).clamp(-1.0, 1.0)
        }
        _ => 1.0 - 2.0 * u,
    };
    let pdf = match *phase {
        PhaseFunction::Isotropic => INV_4PI,
        // the near-isotropic branch still reports the true HG density
        PhaseFunction::HenyeyGreenstein { .. } => phase.eval_unchecked(cos_theta),
    };
    PhaseSample { cos_theta, phi, pdf }
}

/// Outcome of exponential distance sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FreeFlight {
    Interaction {
        distance: f64,
        pdf: f64,
    },
    /// `sigma_t == 0`: the photon never interacts.
    NoInteraction,
}

pub fn sample_free_flight<R: Rng + ?Sized>(medium: &Medium, rng: &mut R) -> FreeFlight {
    let st = medium.sigma_t;
    if st <= 0.0 {
        return FreeFlight::NoInteraction;
    }
    // 1 - u lies in (0, 1], so the log is finite
    let u: f64 = rng.random();
    let distance = -(1.0 - u).ln() / st;
    FreeFlight::Interaction {
        distance,
        pdf: st * (-st * distance).exp(),
    }
}
