//! Temporal smoothing kernels.
//!
//! Each kernel is given in canonical form on `[-1, 1]` with unit integral;
//! a bandwidth `T` turns it into `k(t / T) / T`.

use std::fmt::Debug;

use crate::registry::Registry;

pub trait TemporalKernel: Debug + Send + Sync {
    fn name(&self) -> &'static str;
    /// Canonical density; zero outside `[-1, 1]`.
    fn eval(&self, u: f64) -> f64;
    /// Integral of the canonical density from -1 to `u`.
    fn cdf(&self, u: f64) -> f64;

    /// Density of the scaled kernel at offset `t` for bandwidth `bandwidth`.
    fn eval_scaled(&self, t: f64, bandwidth: f64) -> f64 {
        self.eval(t / bandwidth) / bandwidth
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BoxKernel;

impl TemporalKernel for BoxKernel {
    fn name(&self) -> &'static str {
        "box"
    }

    fn eval(&self, u: f64) -> f64 {
        if (-1.0..=1.0).contains(&u) {
            0.5
        } else {
            0.0
        }
    }

    fn cdf(&self, u: f64) -> f64 {
        0.5 * (u.clamp(-1.0, 1.0) + 1.0)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Epanechnikov;

impl TemporalKernel for Epanechnikov {
    fn name(&self) -> &'static str {
        "epanechnikov"
    }

    fn eval(&self, u: f64) -> f64 {
        if (-1.0..=1.0).contains(&u) {
            0.75 * (1.0 - u * u)
        } else {
            0.0
        }
    }

    fn cdf(&self, u: f64) -> f64 {
        let u = u.clamp(-1.0, 1.0);
        0.25 * (2.0 + 3.0 * u - u * u * u)
    }
}

pub const DEFAULT_KERNEL: &str = "epanechnikov";

pub fn registry() -> Registry<dyn TemporalKernel> {
    let mut r: Registry<dyn TemporalKernel> = Registry::new("temporal kernel");
    r.register("box", || Box::new(BoxKernel));
    r.register("epanechnikov", || Box::new(Epanechnikov));
    r
}
