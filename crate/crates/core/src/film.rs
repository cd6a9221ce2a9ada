//! Time-binned radiance film, its binary file format and frame export.
//!
//! Each bin holds the radiance integrated over the bin's time span, so the
//! bins of a pixel sum to its time-integrated radiance.
//!
//! File layout (little-endian): the 5-byte magic `TPBF1`, `u32` width,
//! `u32` height, `u32` bins, `f64` t_min and `f64` t_max in seconds, `u32`
//! channel count (3), then `f32` samples ordered by bin, then row, then
//! column, then channel.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::estimators::RadianceSplat;
use crate::scene::TimeRange;
use crate::spectrum::Spectrum;

pub const MAGIC: &[u8; 5] = b"TPBF1";
pub const HEADER_LEN: usize = 5 + 4 * 3 + 8 * 2 + 4;

#[derive(Debug, Error)]
pub enum FilmError {
    #[error("film dimensions differ: {0:?} vs {1:?}")]
    DimensionMismatch((u32, u32, usize), (u32, u32, usize)),
    #[error("bad magic, not a film file")]
    BadMagic,
    #[error("film file truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("film dimensions {width}x{height}x{bins} overflow")]
    Overflow { width: u32, height: u32, bins: u32 },
    #[error("unsupported channel count {0}")]
    Channels(u32),
    #[error("invalid time range [{0}, {1}]")]
    TimeRange(f64, f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransientFilm {
    pub width: u32,
    pub height: u32,
    pub time: TimeRange,
    // pixel-major: ((pixel * bins) + bin) * 3 + channel
    data: Vec<f64>,
    /// Energy that fell outside `[t_min, t_max]`.
    pub overflow: Spectrum,
}

/// Mutable view of one pixel's time profile.
pub struct PixelBins<'a> {
    pub bins: &'a mut [f64],
    pub time: TimeRange,
    pub overflow: Spectrum,
}

impl PixelBins<'_> {
    /// Distribute `splat` over the bins according to its time support.
    pub fn splat(&mut self, splat: &RadianceSplat) {
        let t = self.time;
        let bw = t.bin_width();
        let support = &splat.support;
        let inside = support.cdf(t.t_max) - support.cdf(t.t_min);
        let outside = (1.0 - inside).max(0.0);
        if outside > 0.0 {
            self.overflow += splat.value * outside;
        }
        if inside <= 0.0 {
            return;
        }
        let (lo, hi) = support.extent();
        let first = (((lo - t.t_min) / bw).floor().max(0.0) as usize).min(t.bins - 1);
        let last = (((hi - t.t_min) / bw).floor().max(0.0) as usize).min(t.bins - 1);
        let mut below = support.cdf(t.t_min + first as f64 * bw);
        for bin in first..=last {
            let edge = if bin + 1 == t.bins {
                t.t_max
            } else {
                t.t_min + (bin + 1) as f64 * bw
            };
            let above = support.cdf(edge);
            let w = above - below;
            below = above;
            if w > 0.0 {
                let o = bin * 3;
                for c in 0..3 {
                    self.bins[o + c] += splat.value[c] * w;
                }
            }
        }
    }

    /// Deposit the whole value at a single instant.
    pub fn add_point(&mut self, time: f64, value: Spectrum) {
        match self.time_bin(time) {
            Some(bin) => {
                for c in 0..3 {
                    self.bins[bin * 3 + c] += value[c];
                }
            }
            None => self.overflow += value,
        }
    }

    /// Add to one bin directly.
    pub fn add_to_bin(&mut self, bin: usize, value: Spectrum) {
        for c in 0..3 {
            self.bins[bin * 3 + c] += value[c];
        }
    }

    fn time_bin(&self, time: f64) -> Option<usize> {
        let t = self.time;
        if !(time >= t.t_min && time < t.t_max) {
            return None;
        }
        Some((((time - t.t_min) / t.bin_width()) as usize).min(t.bins - 1))
    }
}

impl TransientFilm {
    pub fn new(width: u32, height: u32, time: TimeRange) -> Self {
        assert!(time.bins >= 1 && time.t_max > time.t_min, "invalid film time range");
        Self {
            width,
            height,
            time,
            data: vec![0.0; width as usize * height as usize * time.bins * 3],
            overflow: Spectrum::ZERO,
        }
    }

    pub fn bins(&self) -> usize {
        self.time.bins
    }

    pub fn bin_width(&self) -> f64 {
        self.time.bin_width()
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn pixel_index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    fn dims(&self) -> (u32, u32, usize) {
        (self.width, self.height, self.time.bins)
    }

    pub fn get(&self, pixel: usize, bin: usize) -> Spectrum {
        let o = (pixel * self.time.bins + bin) * 3;
        Spectrum([self.data[o], self.data[o + 1], self.data[o + 2]])
    }

    pub fn set(&mut self, pixel: usize, bin: usize, value: Spectrum) {
        let o = (pixel * self.time.bins + bin) * 3;
        self.data[o..o + 3].copy_from_slice(&value.0);
    }

    /// Time profile of one pixel, bin-major RGB.
    pub fn profile(&self, pixel: usize) -> &[f64] {
        let n = self.time.bins * 3;
        &self.data[pixel * n..(pixel + 1) * n]
    }

    pub fn pixel_bins(&mut self, pixel: usize) -> PixelBins<'_> {
        let n = self.time.bins * 3;
        PixelBins {
            bins: &mut self.data[pixel * n..(pixel + 1) * n],
            time: self.time,
            overflow: Spectrum::ZERO,
        }
    }

    pub fn splat(&mut self, pixel: usize, splat: &RadianceSplat) {
        let mut p = self.pixel_bins(pixel);
        p.splat(splat);
        let o = p.overflow;
        self.overflow += o;
    }

    /// Raw samples in pixel-major order.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Sum over bins of one pixel.
    pub fn time_integral(&self, pixel: usize) -> Spectrum {
        let mut s = Spectrum::ZERO;
        for bin in 0..self.time.bins {
            s += self.get(pixel, bin);
        }
        s
    }

    /// Sum of all bins over all pixels.
    pub fn total(&self) -> Spectrum {
        let mut s = Spectrum::ZERO;
        for chunk in self.data.chunks_exact(3) {
            s += Spectrum([chunk[0], chunk[1], chunk[2]]);
        }
        s
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite()) && self.overflow.is_finite()
    }

    pub fn same_shape(&self, other: &TransientFilm) -> Result<(), FilmError> {
        if self.dims() != other.dims() {
            return Err(FilmError::DimensionMismatch(self.dims(), other.dims()));
        }
        Ok(())
    }

    /// `self = self * keep + other * add`, element-wise.
    pub fn blend(&mut self, keep: f64, other: &TransientFilm, add: f64) -> Result<(), FilmError> {
        self.same_shape(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = *a * keep + *b * add;
        }
        self.overflow = self.overflow * keep + other.overflow * add;
        Ok(())
    }
}

/// Step-emission response from an impulse response: the integral of the
/// impulse response up to the end of each bin, stored as bin-integrated
/// values like any other film.
pub fn heaviside_transform(film: &TransientFilm) -> TransientFilm {
    let mut out = film.clone();
    let bw = film.bin_width();
    let bins = film.time.bins;
    for pixel in 0..film.pixel_count() {
        let mut running = Spectrum::ZERO;
        for bin in 0..bins {
            running += film.get(pixel, bin);
            out.set(pixel, bin, running * bw);
        }
    }
    out.overflow = Spectrum::ZERO;
    out
}

fn payload_len(width: u32, height: u32, bins: u32) -> Option<u64> {
    (width as u64)
        .checked_mul(height as u64)?
        .checked_mul(bins as u64)?
        .checked_mul(12)
}

pub fn write_film(film: &TransientFilm, path: &Path) -> Result<(), FilmError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_film_to(film, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_film_to<W: Write>(film: &TransientFilm, w: &mut W) -> Result<(), FilmError> {
    let bins = film.time.bins as u32;
    w.write_all(MAGIC)?;
    w.write_all(&film.width.to_le_bytes())?;
    w.write_all(&film.height.to_le_bytes())?;
    w.write_all(&bins.to_le_bytes())?;
    w.write_all(&film.time.t_min.to_le_bytes())?;
    w.write_all(&film.time.t_max.to_le_bytes())?;
    w.write_all(&3u32.to_le_bytes())?;
    let mut plane = Vec::with_capacity(film.pixel_count() * 12);
    for bin in 0..film.time.bins {
        plane.clear();
        for pixel in 0..film.pixel_count() {
            for c in film.get(pixel, bin).0 {
                plane.extend_from_slice(&(c as f32).to_le_bytes());
            }
        }
        w.write_all(&plane)?;
    }
    Ok(())
}

pub fn read_film(path: &Path) -> Result<TransientFilm, FilmError> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    decode_film(&bytes)
}

pub fn decode_film(bytes: &[u8]) -> Result<TransientFilm, FilmError> {
    if bytes.len() < MAGIC.len() || &bytes[..5] != MAGIC {
        return Err(FilmError::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(FilmError::Truncated {
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let (width, height, bins) = (u32_at(5), u32_at(9), u32_at(13));
    let (t_min, t_max) = (f64_at(17), f64_at(25));
    let channels = u32_at(33);
    if channels != 3 {
        return Err(FilmError::Channels(channels));
    }
    let payload = payload_len(width, height, bins)
        .filter(|&p| p <= (usize::MAX / 2) as u64)
        .ok_or(FilmError::Overflow { width, height, bins })?;
    let expected = HEADER_LEN as u64 + payload;
    if bytes.len() as u64 != expected {
        return Err(FilmError::Truncated {
            expected,
            found: bytes.len() as u64,
        });
    }
    if bins == 0 || !(t_max > t_min) || !t_min.is_finite() || !t_max.is_finite() {
        return Err(FilmError::TimeRange(t_min, t_max));
    }
    let mut film = TransientFilm::new(
        width,
        height,
        TimeRange {
            t_min,
            t_max,
            bins: bins as usize,
        },
    );
    let mut o = HEADER_LEN;
    for bin in 0..bins as usize {
        for pixel in 0..film.pixel_count() {
            let mut s = Spectrum::ZERO;
            for c in 0..3 {
                s[c] = f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as f64;
                o += 4;
            }
            film.set(pixel, bin, s);
        }
    }
    Ok(film)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameFormat {
    /// Portable float map, exposure-scaled and unclamped.
    Pfm,
    /// 8-bit portable pixmap, exposure-scaled then clamped to [0, 1].
    Ppm,
}

/// Write one image per time bin into `dir`, named `frame_NNNNN.{pfm,ppm}`.
pub fn write_frames(
    film: &TransientFilm,
    dir: &Path,
    exposure: f64,
    format: FrameFormat,
) -> Result<Vec<PathBuf>, FilmError> {
    std::fs::create_dir_all(dir)?;
    let (w, h) = (film.width as usize, film.height as usize);
    let mut paths = Vec::with_capacity(film.bins());
    for bin in 0..film.bins() {
        let (ext, bytes) = match format {
            FrameFormat::Pfm => {
                let mut out = format!("PF\n{w} {h}\n-1.0\n").into_bytes();
                // PFM scanlines run bottom to top
                for y in (0..h).rev() {
                    for x in 0..w {
                        for c in film.get(y * w + x, bin).0 {
                            out.extend_from_slice(&((c * exposure) as f32).to_le_bytes());
                        }
                    }
                }
                ("pfm", out)
            }
            FrameFormat::Ppm => {
                let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
                for pixel in 0..w * h {
                    for c in film.get(pixel, bin).0 {
                        out.push(ppm_level(c, exposure));
                    }
                }
                ("ppm", out)
            }
        };
        let path = dir.join(format!("frame_{bin:05}.{ext}"));
        std::fs::write(&path, bytes)?;
        paths.push(path);
    }
    Ok(paths)
}

/// 8-bit level for a bin value: scale, clamp, round. No gamma.
pub fn ppm_level(value: f64, exposure: f64) -> u8 {
    let v = (value * exposure).clamp(0.0, 1.0);
    if v.is_nan() {
        0
    } else {
        (v * 255.0).round() as u8
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::TimeSupport;

    fn range(bins: usize) -> TimeRange {
        TimeRange {
            t_min: 0.0,
            t_max: 1.0,
            bins,
        }
    }

    #[test]
    fn interval_over_two_bins_splits_evenly() {
        let mut f = TransientFilm::new(1, 1, range(4));
        f.splat(
            0,
            &RadianceSplat {
                value: Spectrum::splat(2.0),
                support: TimeSupport::Uniform {
                    t_minus: 0.25,
                    t_plus: 0.75,
                },
            },
        );
        assert_eq!(f.get(0, 0), Spectrum::ZERO);
        assert!((f.get(0, 1)[0] - 1.0).abs() < 1e-15);
        assert!((f.get(0, 2)[0] - 1.0).abs() < 1e-15);
        assert_eq!(f.overflow, Spectrum::ZERO);
    }

    #[test]
    fn splat_outside_goes_to_overflow() {
        let mut f = TransientFilm::new(1, 1, range(4));
        f.splat(
            0,
            &RadianceSplat {
                value: Spectrum::splat(3.0),
                support: TimeSupport::Uniform {
                    t_minus: 2.0,
                    t_plus: 3.0,
                },
            },
        );
        assert_eq!(f.total(), Spectrum::ZERO);
        assert_eq!(f.overflow, Spectrum::splat(3.0));
    }

    #[test]
    fn zero_film_has_exact_payload_size() {
        let f = TransientFilm::new(2, 2, range(4));
        let mut buf = Vec::new();
        write_film_to(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 192);
    }

    #[test]
    fn decode_rejects_bad_input() {
        let f = TransientFilm::new(2, 1, range(3));
        let mut buf = Vec::new();
        write_film_to(&f, &mut buf).unwrap();
        assert!(matches!(
            decode_film(&buf[..buf.len() - 1]),
            Err(FilmError::Truncated { .. })
        ));
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(decode_film(&bad), Err(FilmError::BadMagic)));
        let mut huge = buf.clone();
        huge[5..9].copy_from_slice(&u32::MAX.to_le_bytes());
        huge[9..13].copy_from_slice(&u32::MAX.to_le_bytes());
        huge[13..17].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(matches!(decode_film(&huge), Err(FilmError::Overflow { .. })));
    }

    #[test]
    fn heaviside_of_impulse_is_a_step() {
        let mut f = TransientFilm::new(1, 1, range(5));
        f.set(0, 0, Spectrum::splat(1.0));
        let h = heaviside_transform(&f);
        for bin in 0..5 {
            assert_eq!(h.get(0, bin), Spectrum::splat(0.2));
        }
    }

    #[test]
    fn ppm_levels_clamp_after_scaling() {
        assert_eq!(ppm_level(0.5, 1.0), 128);
        assert_eq!(ppm_level(0.5, 4.0), 255);
        assert_eq!(ppm_level(-1.0, 1.0), 0);
    }
}
