//! Radial density tables for user-supplied kernels.

use crate::error::{Error, Result};
use crate::measure::power_integral;
use crate::scalar::Scalar;

/// Radial density `k(r)` given at increasing radii, interpolated log-log
/// (piecewise power law). Outside the table the density is only defined when
/// the matching decay exponent is set: `k(r) ∝ r^{-exponent}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialTable<T> {
    radii: Vec<T>,
    density: Vec<T>,
    inner_exponent: Option<T>,
    outer_exponent: Option<T>,
}

impl<T: Scalar> RadialTable<T> {
    pub fn new(radii: Vec<T>, density: Vec<T>) -> Result<Self> {
        if radii.len() != density.len() || radii.len() < 2 {
            return Err(Error::InvalidSpec(
                "radial table needs at least two (radius, density) rows".into(),
            ));
        }
        for w in radii.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidSpec(
                    "table radii must be strictly increasing".into(),
                ));
            }
        }
        if radii[0] <= T::zero() || density.iter().any(|&k| !(k > T::zero()) || !k.is_finite()) {
            return Err(Error::InvalidSpec(
                "table radii and densities must be positive and finite".into(),
            ));
        }
        Ok(Self {
            radii,
            density,
            inner_exponent: None,
            outer_exponent: None,
        })
    }

    /// Parses two whitespace- or comma-separated columns; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut radii = Vec::new();
        let mut density = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 2 {
                return Err(Error::InvalidSpec(format!(
                    "table line {}: expected 2 columns, found {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| Error::InvalidSpec(format!("table line {}: {e}", lineno + 1)))
            };
            radii.push(parse(cols[0])?);
            density.push(parse(cols[1])?);
        }
        Self::new(radii, density)
    }

    pub fn with_inner_exponent(mut self, gamma: T) -> Self {
        self.inner_exponent = Some(gamma);
        self
    }

    pub fn with_outer_exponent(mut self, gamma: T) -> Self {
        self.outer_exponent = Some(gamma);
        self
    }

    pub fn inner_exponent(&self) -> Option<T> {
        self.inner_exponent
    }

    pub fn outer_exponent(&self) -> Option<T> {
        self.outer_exponent
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    fn first(&self) -> T {
        self.radii[0]
    }

    fn last(&self) -> T {
        *self.radii.last().unwrap()
    }

    fn segment_slope(&self, i: usize) -> T {
        (self.density[i + 1] / self.density[i]).ln() / (self.radii[i + 1] / self.radii[i]).ln()
    }

    /// Density at radius `r`.
    pub fn density(&self, r: T) -> Result<T> {
        if r < self.first() {
            let g = self.inner_exponent.ok_or_else(|| {
                Error::RejectedInput(format!(
                    "radius {r} below table start {} and no inner exponent set",
                    self.first()
                ))
            })?;
            return Ok(self.density[0] * (r / self.first()).powf(-g));
        }
        if r > self.last() {
            let g = self.outer_exponent.ok_or_else(|| {
                Error::RejectedInput(format!(
                    "radius {r} beyond table end {} and no outer exponent set",
                    self.last()
                ))
            })?;
            return Ok(*self.density.last().unwrap() * (r / self.last()).powf(-g));
        }
        let i = match self.radii.iter().position(|&x| x > r) {
            Some(0) => 0,
            Some(i) => i - 1,
            None => self.radii.len() - 2,
        };
        let i = i.min(self.radii.len() - 2);
        Ok(self.density[i] * (r / self.radii[i]).powf(self.segment_slope(i)))
    }

    /// `∫_a^b r^q k(r) dr`, exact for the piecewise power-law density.
    pub fn moment(&self, a: T, b: T, q: T) -> Result<T> {
        if !(b > a) {
            return Ok(T::zero());
        }
        let mut total = T::zero();
        // below the table
        if a < self.first() {
            let g = self.inner_exponent.ok_or_else(|| {
                Error::RejectedInput("integration below table start needs an inner exponent".into())
            })?;
            let hi = b.min(self.first());
            let c = self.density[0] * self.first().powf(g);
            total = total + c * power_integral(a, hi, q - g + T::one())?;
        }
        for i in 0..self.radii.len() - 1 {
            let lo = a.max(self.radii[i]);
            let hi = b.min(self.radii[i + 1]);
            if hi > lo {
                let g = self.segment_slope(i);
                let c = self.density[i] * self.radii[i].powf(-g);
                total = total + c * power_integral(lo, hi, q + g + T::one())?;
            }
        }
        if b > self.last() {
            let g = self.outer_exponent.ok_or_else(|| {
                Error::RejectedInput("integration beyond table end needs an outer exponent".into())
            })?;
            let lo = a.max(self.last());
            let c = *self.density.last().unwrap() * self.last().powf(g);
            total = total + c * power_integral(lo, b, q - g + T::one())?;
        }
        Ok(total)
    }
}
