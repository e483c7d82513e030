use std::f64::consts::PI;

use crate::error::{positive, Error, Result};

/// Uniform periodic grid with wavenumbers in FFT order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
}

impl Grid {
    pub const MIN_POINTS: usize = 256;

    pub fn new(n: usize, length: f64) -> Result<Self> {
        positive("grid.length", length)?;
        if !n.is_power_of_two() || n < Self::MIN_POINTS {
            return Err(Error::invalid(
                "grid.points",
                format!("must be a power of two >= {}, got {n}", Self::MIN_POINTS),
            ));
        }
        Ok(Self { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dz(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn dk(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Signed mode number of FFT bin `i`.
    pub fn mode_number(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    pub fn k(&self, i: usize) -> f64 {
        self.mode_number(i) as f64 * self.dk()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.k(i)).collect()
    }

    pub fn z(&self, j: usize) -> f64 {
        j as f64 * self.dz()
    }

    pub fn nyquist(&self) -> f64 {
        PI / self.dz()
    }

    /// FFT bin of signed mode number `m`.
    pub fn index_of_mode(&self, m: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if m >= half || m < -half {
            return None;
        }
        Some(if m >= 0 { m as usize } else { (m + self.n as i64) as usize })
    }

    /// FFT bin closest to wavenumber `k`.
    pub fn nearest_index(&self, k: f64) -> Option<usize> {
        self.index_of_mode((k / self.dk()).round() as i64)
    }
}
