use crate::error::{Error, Result};
use crate::geometry::CavityGeometry;

/// `1 - sin(x)/x`, accurate for small `x`.
pub fn one_minus_sinc(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        x2 / 6.0 - x2 * x2 / 120.0
    } else {
        1.0 - x.sin() / x
    }
}

pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `int_{x0}^{x1} cos(kappa x + theta) dx` without cancellation at small `kappa`.
pub fn cos_integral(kappa: f64, theta: f64, x0: f64, x1: f64) -> f64 {
    let w = x1 - x0;
    w * (kappa * 0.5 * (x0 + x1) + theta).cos() * sinc(0.5 * kappa * w)
}

/// `int_{x0}^{x1} sin(p x + phi) sin(q x + psi) dx`.
pub fn sine_product_integral(p: f64, phi: f64, q: f64, psi: f64, x0: f64, x1: f64) -> f64 {
    0.5 * (cos_integral(p - q, phi - psi, x0, x1) - cos_integral(p + q, phi + psi, x0, x1))
}

/// Eigenfunction of the double cavity, stored as normalized amplitudes of
/// `sin(k (x + l1))` on the left and `sin(k (x - l2))` on the right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeFunction {
    pub geometry: CavityGeometry,
    pub k: f64,
    pub left: f64,
    pub right: f64,
}

fn half_norm(k: f64, len: f64) -> f64 {
    0.5 * len * one_minus_sinc(2.0 * k * len)
}

impl ModeFunction {
    /// Builds the mode for an admissible `k`. The sign is fixed so that the
    /// slope at the left wall is positive (or, if the left part vanishes,
    /// negative at the right wall).
    pub fn new(geometry: CavityGeometry, k: f64) -> Self {
        let (l1, l2) = (geometry.l1(), geometry.l2());
        let (s1, s2) = ((k * l1).sin(), (k * l2).sin());
        let (mut a, mut b) = if s1 * s1 + s2 * s2 > 1e-8 {
            (s2, -s1)
        } else {
            let (c1, c2) = ((k * l1).cos(), (k * l2).cos());
            (c2, c1 - (geometry.alpha * k + geometry.v / k) * s1)
        };
        let n2 = a * a * half_norm(k, l1) + b * b * half_norm(k, l2) + geometry.alpha * (a * s1).powi(2);
        let n = n2.sqrt();
        a /= n;
        b /= n;
        let flip = if a.abs() > 1e-13 * b.abs() { a < 0.0 } else { b > 0.0 };
        if flip {
            a = -a;
            b = -b;
        }
        Self { geometry, k, left: a, right: b }
    }

    pub fn negated(&self) -> Self {
        Self { left: -self.left, right: -self.right, ..*self }
    }

    pub fn at_wall(&self) -> f64 {
        self.left * (self.k * self.geometry.l1()).sin()
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let (l1, l2) = (self.geometry.l1(), self.geometry.l2());
        let slack = 1e-12 * self.geometry.length;
        if x < -l1 - slack || x > l2 + slack {
            return Err(Error::OutOfDomain { x, lo: -l1, hi: l2 });
        }
        Ok(self.eval_continued(x))
    }

    /// Analytic continuation of each branch past its own domain.
    pub fn eval_continued(&self, x: f64) -> f64 {
        if x < 0.0 {
            self.left * (self.k * (x + self.geometry.l1())).sin()
        } else {
            self.right * (self.k * (x - self.geometry.l2())).sin()
        }
    }

    /// Generalized product of the continued branches of `self` and `other`
    /// over the cavity `domain`.
    pub fn overlap_on(&self, other: &ModeFunction, domain: &CavityGeometry) -> f64 {
        let (d1, d2) = (domain.l1(), domain.l2());
        let (p, q) = (self.k, other.k);
        let left = sine_product_integral(p, p * self.geometry.l1(), q, q * other.geometry.l1(), -d1, 0.0);
        let right = sine_product_integral(p, -p * self.geometry.l2(), q, -q * other.geometry.l2(), 0.0, d2);
        self.left * other.left * left + self.right * other.right * right + domain.alpha * self.at_wall() * other.at_wall()
    }

    /// Share of the norm in `x < 0`, with the wall term split evenly.
    pub fn left_fraction(&self) -> f64 {
        let g = &self.geometry;
        let w = g.alpha * self.at_wall().powi(2);
        self.left * self.left * half_norm(self.k, g.l1()) + 0.5 * w
    }
}

/// Normalization constant of the mode written with amplitudes
/// `sin(k l2)` (left) and `-sin(k l1)` (right).
pub fn normalization(geom: &CavityGeometry, k: f64) -> Result<f64> {
    let (l1, l2) = (geom.l1(), geom.l2());
    let (s1, s2) = ((k * l1).sin(), (k * l2).sin());
    let n2 = 0.5 * (l1 * s2 * s2 + l2 * s1 * s1 + (k * geom.length).sin() * s1 * s2 / k);
    if n2 < 1e-14 * geom.length {
        return Err(Error::DegenerateNorm(k));
    }
    Ok(n2.sqrt())
}

pub fn eval_mode(mode: &ModeFunction, x: f64) -> Result<f64> {
    mode.eval(x)
}

/// `int f g dx + alpha f(0) g(0)` for two modes of the same cavity.
pub fn inner_product(f: &ModeFunction, g: &ModeFunction) -> f64 {
    f.overlap_on(g, &f.geometry)
}
