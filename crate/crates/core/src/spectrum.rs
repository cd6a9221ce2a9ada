use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, MulAssign, Sub};

/// RGB radiometric quantity (radiance, flux or intensity depending on context).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Spectrum(pub [f64; 3]);

impl Spectrum {
    pub const ZERO: Spectrum = Spectrum([0.0; 3]);
    pub const ONE: Spectrum = Spectrum([1.0; 3]);

    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Spectrum([r, g, b])
    }

    pub const fn splat(v: f64) -> Self {
        Spectrum([v; 3])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn is_black(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&c| c >= 0.0)
    }

    pub fn max_component(&self) -> f64 {
        self.0[0].max(self.0[1]).max(self.0[2])
    }

    /// Rec. 709 luminance.
    pub fn luminance(&self) -> f64 {
        0.2126 * self.0[0] + 0.7152 * self.0[1] + 0.0722 * self.0[2]
    }

    pub fn sum(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn map(self, f: impl Fn(f64) -> f64) -> Spectrum {
        Spectrum([f(self.0[0]), f(self.0[1]), f(self.0[2])])
    }
}

impl Index<usize> for Spectrum {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Spectrum {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for Spectrum {
    type Output = Spectrum;
    #[inline]
    fn add(self, o: Spectrum) -> Spectrum {
        Spectrum([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for Spectrum {
    #[inline]
    fn add_assign(&mut self, o: Spectrum) {
        for i in 0..3 {
            self.0[i] += o.0[i];
        }
    }
}

impl Sub for Spectrum {
    type Output = Spectrum;
    fn sub(self, o: Spectrum) -> Spectrum {
        Spectrum([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Mul for Spectrum {
    type Output = Spectrum;
    fn mul(self, o: Spectrum) -> Spectrum {
        Spectrum([self.0[0] * o.0[0], self.0[1] * o.0[1], self.0[2] * o.0[2]])
    }
}

impl Mul<f64> for Spectrum {
    type Output = Spectrum;
    #[inline]
    fn mul(self, s: f64) -> Spectrum {
        Spectrum([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl MulAssign<f64> for Spectrum {
    fn mul_assign(&mut self, s: f64) {
        for c in &mut self.0 {
            *c *= s;
        }
    }
}

impl MulAssign for Spectrum {
    fn mul_assign(&mut self, o: Spectrum) {
        for i in 0..3 {
            self.0[i] *= o.0[i];
        }
    }
}

impl Div<f64> for Spectrum {
    type Output = Spectrum;
    fn div(self, s: f64) -> Spectrum {
        self * (1.0 / s)
    }
}
