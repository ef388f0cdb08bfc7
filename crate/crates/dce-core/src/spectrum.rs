use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CavityGeometry;
use crate::modes::ModeFunction;

/// Mode tag assigned from where the mode keeps its norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeLabel {
    Global(usize),
    LeftLocalized(usize),
    RightLocalized(usize),
    Zeroth,
}

impl std::fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModeLabel::Global(m) => write!(f, "G{m}"),
            ModeLabel::LeftLocalized(l) => write!(f, "L{l}"),
            ModeLabel::RightLocalized(l) => write!(f, "R{l}"),
            ModeLabel::Zeroth => write!(f, "Z"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub n_modes: usize,
    pub scan_step: f64,
    pub root_tol: f64,
    pub tol_accept: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { n_modes: 15, scan_step: PI / 20.0, root_tol: 1e-14, tol_accept: 1e-9 }
    }
}

impl SolveOptions {
    pub fn with_modes(n_modes: usize) -> Self {
        Self { n_modes, ..Self::default() }
    }

    pub fn validate(&self, geom: &CavityGeometry) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidOptions(m));
        if self.n_modes == 0 {
            return bad("n_modes must be positive".into());
        }
        if !(self.scan_step > 0.0 && self.scan_step < PI / (4.0 * geom.length)) {
            return bad(format!("scan_step {} must lie in (0, pi/4L)", self.scan_step));
        }
        if !(self.root_tol > 0.0 && self.root_tol <= 1e-10) {
            return bad(format!("root_tol {} must lie in (0, 1e-10]", self.root_tol));
        }
        if !(self.tol_accept > 0.0) {
            return bad("tol_accept must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveNumberSpectrum {
    pub k: Vec<f64>,
    pub labels: Vec<ModeLabel>,
    pub geometry: CavityGeometry,
}

impl WaveNumberSpectrum {
    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    pub fn omega(&self, m: usize) -> f64 {
        self.k[m]
    }

    /// Index of the mode carrying `label`.
    pub fn find(&self, label: ModeLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn truncated(&self, n: usize) -> Self {
        Self {
            k: self.k[..n.min(self.len())].to_vec(),
            labels: self.labels[..n.min(self.len())].to_vec(),
            geometry: self.geometry,
        }
    }
}

/// Cleared-denominator eigenvalue residual; zero at admissible wavenumbers.
pub fn characteristic_residual(k: f64, geom: &CavityGeometry) -> f64 {
    let l = geom.length;
    k * (geom.alpha + geom.v / (k * k)) * ((k * geom.dl).cos() - (k * l).cos()) - 2.0 * (k * l).sin()
}

/// Typical size of the residual terms at `k`; used to judge acceptance.
fn residual_scale(k: f64, geom: &CavityGeometry) -> f64 {
    (2.0 + 2.0 * k * (geom.alpha + geom.v / (k * k))) * (1.0 + k * geom.length)
}

fn residual_derivatives(k: f64, geom: &CavityGeometry) -> (f64, f64) {
    let (l, d, a, v) = (geom.length, geom.dl, geom.alpha, geom.v);
    let c = (k * d).cos() - (k * l).cos();
    let dc_dk = -d * (k * d).sin() + l * (k * l).sin();
    let f_k = (a - v / (k * k)) * c + (a * k + v / k) * dc_dk - 2.0 * l * (k * l).cos();
    let f_d = -(a * k + v / k) * k * (k * d).sin();
    (f_k, f_d)
}

fn bisect(geom: &CavityGeometry, mut a: f64, mut b: f64, mut fa: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b || (b - a) <= tol * m.abs() {
            break;
        }
        let fm = characteristic_residual(m, geom);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Looks for a hidden pair of roots around a local minimum of |F|.
/// Returns the point of the opposite sign if one exists.
fn split_point(geom: &CavityGeometry, a: f64, b: f64, sign: f64) -> Option<f64> {
    let g = |x: f64| sign * characteristic_residual(x, geom);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..120 {
        if g1 < 0.0 {
            return Some(x1);
        }
        if g2 < 0.0 {
            return Some(x2);
        }
        if hi - lo < 1e-15 * hi {
            break;
        }
        if g1 < g2 {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - r * (hi - lo);
            g1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + r * (hi - lo);
            g2 = g(x2);
        }
    }
    None
}

/// All roots of the residual in `(k_lo, k_hi]`, ascending.
pub fn roots_in(geom: &CavityGeometry, k_lo: f64, k_hi: f64, step: f64, tol: f64, limit: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut xs = [k_lo, k_lo, k_lo];
    let mut fs = [characteristic_residual(k_lo, geom); 3];
    let mut filled = 1;
    let mut x = k_lo;
    while x < k_hi && roots.len() < limit {
        let nx = (x + step).min(k_hi);
        let nf = characteristic_residual(nx, geom);
        xs = [xs[1], xs[2], nx];
        fs = [fs[1], fs[2], nf];
        filled = (filled + 1).min(3);
        let (a, fa) = (xs[1], fs[1]);
        if fa == 0.0 {
            if a > k_lo {
                roots.push(a);
            }
        } else if nf != 0.0 && (fa > 0.0) != (nf > 0.0) {
            roots.push(bisect(geom, a, nx, fa, tol));
        } else if filled == 3
            && fs.iter().all(|f| *f != 0.0 && (*f > 0.0) == (fa > 0.0))
            && fa.abs() <= fs[0].abs()
            && fa.abs() <= fs[2].abs()
        {
            let sign = fa.signum();
            if let Some(s) = split_point(geom, xs[0], xs[2], sign) {
                let fsplit = characteristic_residual(s, geom);
                roots.push(bisect(geom, xs[0], s, fs[0], tol));
                roots.push(bisect(geom, s, xs[2], fsplit, tol));
            }
        }
        x = nx;
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * b.abs().max(1.0));
    roots
}

fn accept(k: f64, geom: &CavityGeometry, tol_accept: f64) -> bool {
    characteristic_residual(k, geom).abs() <= tol_accept * residual_scale(k, geom)
}

pub fn solve_spectrum(geom: &CavityGeometry, opts: &SolveOptions) -> Result<WaveNumberSpectrum> {
    geom.validate()?;
    opts.validate(geom)?;
    let ceiling = 2.0 * (opts.n_modes as f64 + 4.0) * PI / geom.length;
    let start = 1e-8 / geom.length;
    let found = roots_in(geom, start, ceiling, opts.scan_step, opts.root_tol, opts.n_modes + 2);
    let k: Vec<f64> = found.into_iter().filter(|&k| accept(k, geom, opts.tol_accept)).collect();
    if k.len() < opts.n_modes {
        return Err(Error::BracketingFailure { found: k.len(), wanted: opts.n_modes, ceiling });
    }
    let k = k[..opts.n_modes].to_vec();
    let labels = vec![ModeLabel::Global(0); k.len()];
    let spec = WaveNumberSpectrum { k, labels, geometry: *geom };
    Ok(classify_modes(&spec))
}

/// Weak-wall expansion of the `m`-th wavenumber.
pub fn k_transparent_approx(geom: &CavityGeometry, m: usize) -> f64 {
    let l = geom.length;
    let n = (m + 1) as f64;
    let parity = if m % 2 == 0 { 1.0 } else { -1.0 };
    (n * PI / l) * (1.0 - geom.alpha / (2.0 * l) * (1.0 + parity * (n * PI * geom.dl / l).cos()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Strong-wall expansion of the `m`-th mode localized on `side`.
///
/// The correction has the same sign on both sides, as required by the
/// mirror symmetry `dl -> -dl` of the residual.
pub fn k_conducting_approx(geom: &CavityGeometry, m: usize, side: Side) -> f64 {
    let span = match side {
        Side::Left => geom.length + geom.dl,
        Side::Right => geom.length - geom.dl,
    };
    let mp = m as f64 * PI;
    (2.0 * mp / span) * (1.0 + span / (2.0 * geom.alpha * mp * mp))
}

/// Lowest wavenumber for a nearly opaque wall.
pub fn k_zero_approx(geom: &CavityGeometry) -> f64 {
    let l = geom.length;
    (4.0 * l / (geom.alpha * (l * l - geom.dl * geom.dl))).sqrt()
}

/// Slope of an admissible wavenumber with respect to the wall displacement.
#[allow(non_snake_case)]
pub fn dk_dDeltaL(geom: &CavityGeometry, k: f64) -> Result<f64> {
    dk_ddl(geom, k)
}

pub fn dk_ddl(geom: &CavityGeometry, k: f64) -> Result<f64> {
    if geom.v == 0.0 {
        if geom.alpha < 1e-8 * geom.length {
            return Ok(0.0);
        }
        let (l, d, a) = (geom.length, geom.dl, geom.alpha);
        let den = (l + 2.0 / (a * k * k)) * (k * l).sin() - d * (k * d).sin() - (2.0 * l / (a * k)) * (k * l).cos();
        if den.abs() < 1e-12 {
            return Err(Error::SingularSlope(den));
        }
        return Ok(k * (k * d).sin() / den);
    }
    let (f_k, f_d) = residual_derivatives(k, geom);
    if f_k.abs() < 1e-12 {
        return Err(Error::SingularSlope(f_k));
    }
    Ok(-f_d / f_k)
}

/// Tracks every root of `prev` to `new_geom` by local bracketing.
pub fn continue_spectrum(prev: &WaveNumberSpectrum, new_geom: &CavityGeometry) -> Result<WaveNumberSpectrum> {
    new_geom.validate()?;
    let shift = new_geom.dl - prev.geometry.dl;
    if shift == 0.0 && new_geom == &prev.geometry {
        return Ok(prev.clone());
    }
    let n = prev.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let k = prev.k[i];
        let slope = residual_derivatives(k, &prev.geometry);
        let predicted = if slope.0.abs() > 1e-300 { k - slope.1 / slope.0 * shift } else { k };
        let gap_lo = if i > 0 { k - prev.k[i - 1] } else { k };
        let gap_hi = if i + 1 < n { prev.k[i + 1] - k } else { PI / prev.geometry.length };
        let half = 0.45 * gap_lo.min(gap_hi);
        let root = track_root(new_geom, predicted, half).ok_or(Error::ContinuationLost { index: i, k })?;
        out.push(root);
    }
    Ok(WaveNumberSpectrum { k: out, labels: prev.labels.clone(), geometry: *new_geom })
}

fn track_root(geom: &CavityGeometry, center: f64, half: f64) -> Option<f64> {
    let samples = 32;
    let lo = (center - half).max(1e-12);
    let hi = center + half;
    let h = (hi - lo) / samples as f64;
    let mut best: Option<(f64, f64)> = None;
    let mut fa = characteristic_residual(lo, geom);
    for j in 0..samples {
        let a = lo + j as f64 * h;
        let b = a + h;
        let fb = characteristic_residual(b, geom);
        if fa == 0.0 || (fb != 0.0 && (fa > 0.0) != (fb > 0.0)) {
            let r = if fa == 0.0 { a } else { bisect(geom, a, b, fa, 1e-15) };
            let dist = (r - center).abs();
            if best.map_or(true, |(_, d)| dist < d) {
                best = Some((r, dist));
            }
        }
        fa = fb;
    }
    if best.is_none() && characteristic_residual(hi, geom) == 0.0 {
        return Some(hi);
    }
    best.map(|(r, _)| r)
}

/// Fraction of the generalized norm carried by `x < 0`; the wall term is split evenly.
pub fn left_norm_fraction(geom: &CavityGeometry, k: f64) -> f64 {
    let m = ModeFunction::new(*geom, k);
    m.left_fraction()
}

/// Assigns localization labels from norm fractions. Localized modes are
/// numbered by the nearest harmonic of their sub-cavity, so a branch keeps
/// its index when another mode hybridizes.
pub fn classify_modes(spectrum: &WaveNumberSpectrum) -> WaveNumberSpectrum {
    let geom = &spectrum.geometry;
    let branch = |k: f64, len: f64| ((k * len / PI).round() as usize).max(1);
    let mut labels = Vec::with_capacity(spectrum.len());
    for (m, &k) in spectrum.k.iter().enumerate() {
        let f = left_norm_fraction(geom, k);
        let lowest_local = PI / geom.l1().max(geom.l2());
        let label = if m == 0 && geom.alpha > geom.length && k < 0.5 * lowest_local && f > 0.05 && f < 0.95 {
            ModeLabel::Zeroth
        } else if f > 0.95 {
            ModeLabel::LeftLocalized(branch(k, geom.l1()))
        } else if f < 0.05 {
            ModeLabel::RightLocalized(branch(k, geom.l2()))
        } else {
            ModeLabel::Global(m)
        };
        labels.push(label);
    }
    WaveNumberSpectrum { k: spectrum.k.clone(), labels, geometry: *geom }
}
