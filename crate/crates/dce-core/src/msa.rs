use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::couplings::CouplingMatrices;
use crate::dynamics::{BogoliubovMatrices, OccupationVector};
use crate::error::{Error, Result};
use crate::geometry::CavityGeometry;
use crate::rk4::Rk4;
use crate::spectrum::{dk_ddl, WaveNumberSpectrum};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionKind {
    SingleMode(usize),
    /// Pair creation, indices ascending.
    Sum(usize, usize),
    /// Exchange between a lower and a higher mode.
    Difference(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceCondition {
    pub kind: ConditionKind,
    /// Frequency combination that is matched exactly.
    pub target: f64,
    pub detuning: f64,
}

pub fn detect_conditions(spectrum: &WaveNumberSpectrum, omega: f64, tol: f64) -> Vec<ResonanceCondition> {
    let w = &spectrum.k;
    let mut out = Vec::new();
    let mut push = |kind, target: f64| {
        let detuning = (omega - target).abs();
        if detuning < tol {
            out.push(ResonanceCondition { kind, target, detuning });
        }
    };
    for n in 0..w.len() {
        push(ConditionKind::SingleMode(n), 2.0 * w[n]);
        for l in n + 1..w.len() {
            push(ConditionKind::Sum(n, l), w[n] + w[l]);
            let (lo, hi) = if w[n] <= w[l] { (n, l) } else { (l, n) };
            push(ConditionKind::Difference(lo, hi), w[hi] - w[lo]);
        }
    }
    out.sort_by(|a, b| a.detuning.total_cmp(&b.detuning));
    out
}

/// Raised when a mode near the cut holds photons and is resonantly tied to
/// a mode beyond it.
pub fn truncation_warning(extended: &WaveNumberSpectrum, kept: usize, omega: f64, tol: f64, occupations: &[f64]) -> bool {
    detect_conditions(extended, omega, tol).iter().any(|c| {
        let (a, b) = match c.kind {
            ConditionKind::SingleMode(_) => return false,
            ConditionKind::Sum(a, b) | ConditionKind::Difference(a, b) => (a.min(b), a.max(b)),
        };
        a < kept && b >= kept && a + 2 >= kept && occupations.get(a).is_some_and(|&n| n > 0.01)
    })
}

#[derive(Debug, Clone, Default)]
pub struct MsaOptions {
    /// Defaults to `epsilon * omega`.
    pub detuning_tol: Option<f64>,
    /// Use these instead of detecting them.
    pub conditions: Option<Vec<ResonanceCondition>>,
    /// RK4 steps per unit of slow time.
    pub steps_per_unit: Option<usize>,
}

/// Slow amplitudes on a grid of lab times; `tau = epsilon * t`.
#[derive(Debug, Clone)]
pub struct SlowAmplitudes {
    pub t: Vec<f64>,
    pub tau: Vec<f64>,
    pub a: Vec<DMatrix<C64>>,
    pub b: Vec<DMatrix<C64>>,
    pub omega: Vec<f64>,
    pub conditions: Vec<ResonanceCondition>,
}

impl SlowAmplitudes {
    pub fn bogoliubov(&self, i: usize) -> BogoliubovMatrices {
        BogoliubovMatrices {
            a: self.a[i].clone(),
            b: self.b[i].clone(),
            omega_in: self.omega.clone(),
            omega_out: self.omega.clone(),
            residual: 0.0,
        }
    }

    pub fn photon_numbers(&self, n0: &OccupationVector) -> Result<Vec<Vec<f64>>> {
        (0..self.t.len()).map(|i| crate::dynamics::photon_numbers(&self.bogoliubov(i), n0)).collect()
    }

    /// `sum_l 2 w_l (|B_lm|^2 - |A_lm|^2)` for every column at sample `i`.
    pub fn column_norms(&self, i: usize) -> Vec<f64> {
        let (a, b) = (&self.a[i], &self.b[i]);
        (0..a.ncols())
            .map(|m| (0..a.nrows()).map(|l| 2.0 * self.omega[l] * (b[(l, m)].norm_sqr() - a[(l, m)].norm_sqr())).sum())
            .collect()
    }
}

/// One linear term of the reduced system: `target' += coeff e^{i sign delta t} source`.
#[derive(Debug, Clone, Copy)]
struct Term {
    into_a: bool,
    row: usize,
    from_a: bool,
    src: usize,
    coeff: f64,
    phase_sign: f64,
    delta: f64,
}

fn reduced_terms(conds: &[ResonanceCondition], omega: &[f64], g: &DMatrix<f64>, eta: &[f64], drive: f64) -> Vec<Term> {
    let mut terms = Vec::new();
    for c in conds {
        let delta = drive - c.target;
        let w = c.target;
        let mut add = |into_a, row, from_a, src, coeff, phase_sign| {
            terms.push(Term { into_a, row, from_a, src, coeff, phase_sign, delta });
        };
        match c.kind {
            ConditionKind::SingleMode(l) => {
                add(true, l, false, l, 0.5 * eta[l], 1.0);
                add(false, l, true, l, 0.5 * eta[l], -1.0);
            }
            ConditionKind::Sum(l, n) => {
                let cl = w / (2.0 * omega[l]) * g[(n, l)] * (omega[n] - 0.5 * w);
                let cn = w / (2.0 * omega[n]) * g[(l, n)] * (omega[l] - 0.5 * w);
                add(true, l, false, n, cl, 1.0);
                add(false, l, true, n, cl, -1.0);
                add(true, n, false, l, cn, 1.0);
                add(false, n, true, l, cn, -1.0);
            }
            ConditionKind::Difference(lo, hi) => {
                let ch = -w / (2.0 * omega[hi]) * g[(lo, hi)] * (omega[lo] + 0.5 * w);
                let cl = -w / (2.0 * omega[lo]) * g[(hi, lo)] * (omega[hi] - 0.5 * w);
                add(true, hi, true, lo, ch, 1.0);
                add(true, lo, true, hi, cl, -1.0);
                add(false, hi, false, lo, ch, -1.0);
                add(false, lo, false, hi, cl, 1.0);
            }
        }
    }
    terms
}

/// Integrates the reduced equations from vacuum-normalized start values.
/// `t_grid` holds lab times; the slow time is `epsilon * t`.
pub fn evolve_msa(
    couplings: &CouplingMatrices,
    drive: f64,
    epsilon: f64,
    t_grid: &[f64],
    opts: &MsaOptions,
) -> Result<SlowAmplitudes> {
    let spec = &couplings.spectrum;
    let geom = couplings.geometry;
    let omega = spec.k.clone();
    let n = omega.len();
    let conds = match &opts.conditions {
        Some(c) => c.clone(),
        None => detect_conditions(spec, drive, opts.detuning_tol.unwrap_or((epsilon * drive).abs())),
    };
    let mut eta = vec![0.0; n];
    for c in &conds {
        if let ConditionKind::SingleMode(l) = c.kind {
            eta[l] = geom.length * dk_ddl(&geom, omega[l])?;
        }
    }
    let terms = reduced_terms(&conds, &omega, &couplings.g, &eta, drive);
    let init_b = DMatrix::from_fn(n, n, |l, m| if l == m { C64::new(1.0 / (2.0 * omega[l]).sqrt(), 0.0) } else { C64::new(0.0, 0.0) });
    integrate_terms(&terms, &omega, DMatrix::zeros(n, n), init_b, epsilon, t_grid, opts, conds)
}

#[allow(clippy::too_many_arguments)]
fn integrate_terms(
    terms: &[Term],
    omega: &[f64],
    a0: DMatrix<C64>,
    b0: DMatrix<C64>,
    epsilon: f64,
    t_grid: &[f64],
    opts: &MsaOptions,
    conditions: Vec<ResonanceCondition>,
) -> Result<SlowAmplitudes> {
    let (n, cols) = (a0.nrows(), a0.ncols());
    let size = n * cols;
    let mut y = vec![C64::new(0.0, 0.0); 2 * size];
    for l in 0..n {
        for m in 0..cols {
            y[l * cols + m] = a0[(l, m)];
            y[size + l * cols + m] = b0[(l, m)];
        }
    }
    let rate = terms.iter().map(|t| t.coeff.abs() * epsilon.abs() + t.delta.abs()).fold(0.0, f64::max);
    let per_unit = opts.steps_per_unit.unwrap_or(200) as f64;
    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        dy.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for term in terms {
            let ph = C64::from_polar(term.coeff * epsilon, term.phase_sign * term.delta * t);
            let src = if term.from_a { 0 } else { size } + term.src * cols;
            let dst = if term.into_a { 0 } else { size } + term.row * cols;
            for m in 0..cols {
                dy[dst + m] += ph * y[src + m];
            }
        }
    };
    let mut rhs = rhs;
    let mut rk = Rk4::new(2 * size);
    let mut t = 0.0;
    let mut out = SlowAmplitudes {
        t: Vec::new(),
        tau: Vec::new(),
        a: Vec::new(),
        b: Vec::new(),
        omega: omega.to_vec(),
        conditions,
    };
    for &target in t_grid {
        if target < t {
            return Err(Error::InvalidOptions("time grid must be ascending and >= 0".into()));
        }
        let span = target - t;
        let steps = if rate > 0.0 { (span * rate * per_unit).ceil().max(1.0) as usize } else { 1 };
        let h = span / steps as f64;
        for s in 0..steps {
            rk.step(t + s as f64 * h, h, &mut y, &mut rhs);
        }
        if y.iter().any(|v| !(v.norm() < 1e12)) {
            return Err(Error::StabilityFailure(target));
        }
        t = target;
        out.t.push(target);
        out.tau.push(epsilon * target);
        out.a.push(DMatrix::from_fn(n, cols, |l, m| y[l * cols + m]));
        out.b.push(DMatrix::from_fn(n, cols, |l, m| y[size + l * cols + m]));
    }
    Ok(out)
}

/// `sinh^2(L k1' eps t_f / 2)` for the drive at twice mode `mode`.
pub fn closed_form_resonance(geom: &CavityGeometry, spectrum: &WaveNumberSpectrum, mode: usize, epsilon: f64, t_f: f64) -> Result<f64> {
    let eta = geom.length * dk_ddl(geom, spectrum.k[mode])?;
    Ok((0.5 * eta * epsilon * t_f).sinh().powi(2))
}

/// Pair rate per unit slow time, `g_hl (w_h^2 - w_l^2) / (4 sqrt(w_l w_h))`.
pub fn pair_rate(couplings: &CouplingMatrices, lo: usize, hi: usize) -> f64 {
    let w = &couplings.spectrum.k;
    couplings.g[(hi, lo)] * (w[hi] * w[hi] - w[lo] * w[lo]) / (4.0 * (w[lo] * w[hi]).sqrt())
}

pub fn closed_form_sum(couplings: &CouplingMatrices, lo: usize, hi: usize, epsilon: f64, t_f: f64) -> f64 {
    (pair_rate(couplings, lo, hi) * epsilon * t_f).sinh().powi(2)
}

/// Populations `(N0 cos^2, N0 sin^2)` of the exchanged pair.
pub fn closed_form_difference(couplings: &CouplingMatrices, lo: usize, hi: usize, n_start: f64, epsilon: f64, t_f: f64) -> (f64, f64) {
    let theta = pair_rate(couplings, lo, hi) * epsilon * t_f;
    (n_start * theta.cos().powi(2), n_start * theta.sin().powi(2))
}

/// Rest offset at which the zeroth mode bridges the lowest localized pair.
pub fn zeroth_mode_geometry(alpha: f64, length: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::OutOfRange(format!("alpha = {alpha} must be positive")));
    }
    Ok(length / (1.0 + PI * PI * alpha / length).sqrt())
}

/// Analytic couplings of the zeroth mode to the lowest left and right modes.
pub fn zeroth_couplings(alpha: f64, length: f64, l0: f64) -> (f64, f64) {
    let c = |s: f64| 1.0 / (2.0 * PI * (alpha * (length + s * l0)).sqrt());
    (c(1.0), c(-1.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct ZerothSeries {
    pub l0: f64,
    /// Zeroth, lowest left, lowest right.
    pub omega: [f64; 3],
    pub couplings: (f64, f64),
    pub t_f: Vec<f64>,
    pub n: Vec<[f64; 3]>,
}

/// Three-mode reduced evolution with the drive at `w0 + w1(left)`; the
/// amplitudes are indexed zeroth, lowest left, lowest right.
/// With `matched` the exchange with the right mode is taken as exactly
/// resonant, as the strong-wall frequencies predict; otherwise the residual
/// detuning of the solved spectrum is kept.
pub fn zeroth_mode_amplitudes(spectrum: &WaveNumberSpectrum, epsilon: f64, t_grid: &[f64], matched: bool) -> Result<SlowAmplitudes> {
    let geom = spectrum.geometry;
    let z = find_label(spectrum, crate::spectrum::ModeLabel::Zeroth)?;
    let lp = find_label(spectrum, crate::spectrum::ModeLabel::LeftLocalized(1))?;
    let lm = find_label(spectrum, crate::spectrum::ModeLabel::RightLocalized(1))?;
    let omega = [spectrum.k[z], spectrum.k[lp], spectrum.k[lm]];
    let (gp, gm) = zeroth_couplings(geom.alpha, geom.length, geom.dl);
    let mut g = DMatrix::zeros(3, 3);
    g[(1, 0)] = gp;
    g[(0, 1)] = -gp;
    g[(2, 0)] = gm;
    g[(0, 2)] = -gm;
    let drive = omega[0] + omega[1];
    let conds = vec![
        ResonanceCondition { kind: ConditionKind::Sum(0, 1), target: omega[0] + omega[1], detuning: 0.0 },
        ResonanceCondition { kind: ConditionKind::Difference(0, 2), target: omega[2] - omega[0], detuning: (drive - omega[2] + omega[0]).abs() },
    ];

    let mut terms = reduced_terms(&conds, &omega, &g, &[0.0; 3], drive);
    if matched {
        for t in &mut terms {
            t.delta = 0.0;
        }
    }
    let init_b = DMatrix::from_fn(3, 3, |l, m| if l == m { C64::new(1.0 / (2.0 * omega[l]).sqrt(), 0.0) } else { C64::new(0.0, 0.0) });
    integrate_terms(&terms, &omega, DMatrix::zeros(3, 3), init_b, epsilon, t_grid, &MsaOptions::default(), conds)
}

pub fn zeroth_mode_photon_series(spectrum: &WaveNumberSpectrum, epsilon: f64, t_grid: &[f64], matched: bool) -> Result<ZerothSeries> {
    let geom = spectrum.geometry;
    let amps = zeroth_mode_amplitudes(spectrum, epsilon, t_grid, matched)?;
    let n = amps
        .photon_numbers(&OccupationVector::vacuum(3))?
        .into_iter()
        .map(|v| [v[0], v[1], v[2]])
        .collect();
    let omega = [amps.omega[0], amps.omega[1], amps.omega[2]];
    Ok(ZerothSeries { l0: geom.dl, omega, couplings: zeroth_couplings(geom.alpha, geom.length, geom.dl), t_f: t_grid.to_vec(), n })
}

fn find_label(spectrum: &WaveNumberSpectrum, label: crate::spectrum::ModeLabel) -> Result<usize> {
    spectrum
        .find(label)
        .ok_or_else(|| Error::OutOfRange(format!("no mode labelled {label} in the spectrum")))
}

/// Slope of the zeroth wavenumber in the strong-wall limit.
pub fn zeroth_slope_approx(geom: &CavityGeometry, k0: f64) -> f64 {
    geom.dl * k0 / (4.0 * geom.l1() * geom.l2())
}

/// `<N0>` under a drive at twice the zeroth frequency.
pub fn zeroth_single_mode(geom: &CavityGeometry, k0: f64, epsilon: f64, t_f: f64) -> f64 {
    (0.5 * geom.length * zeroth_slope_approx(geom, k0) * epsilon * t_f).sinh().powi(2)
}
