use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Static description of the double cavity.
///
/// The cavity spans `[-l1, l2]` with the wall at `x = 0`, where
/// `l1 = (L + dl) / 2` and `l2 = (L - dl) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    pub length: f64,
    pub dl: f64,
    pub alpha: f64,
    pub v: f64,
}

impl CavityGeometry {
    pub fn new(length: f64, dl: f64, alpha: f64, v: f64) -> Result<Self> {
        let g = Self { length, dl, alpha, v };
        g.validate()?;
        Ok(g)
    }

    /// Unit-length cavity with a dielectric wall and no potential.
    pub fn unit(dl: f64, alpha: f64) -> Result<Self> {
        Self::new(1.0, dl, alpha, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidGeometry(m));
        if !(self.length > 0.0 && self.length.is_finite()) {
            return bad(format!("length {} must be positive", self.length));
        }
        if !(self.dl.abs() < self.length) {
            return bad(format!("|dl| = {} must be below L", self.dl.abs()));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return bad(format!("alpha {} must be >= 0", self.alpha));
        }
        if !(self.v >= 0.0) || !self.v.is_finite() {
            return bad(format!("v {} must be >= 0", self.v));
        }
        Ok(())
    }

    pub fn l1(&self) -> f64 {
        0.5 * (self.length + self.dl)
    }

    pub fn l2(&self) -> f64 {
        0.5 * (self.length - self.dl)
    }

    /// Same cavity with a different wall displacement.
    pub fn with_dl(&self, dl: f64) -> Self {
        Self { dl, ..*self }
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self { alpha, ..*self }
    }

    /// Geometry from the left sub-cavity fraction `l1 / L`.
    pub fn from_l1_fraction(length: f64, l1_frac: f64, alpha: f64) -> Result<Self> {
        Self::new(length, (2.0 * l1_frac - 1.0) * length, alpha, 0.0)
    }
}
