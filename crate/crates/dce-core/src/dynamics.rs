use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chebyshev::ChebyshevFit;
use crate::couplings::{coupling_matrices, CouplingMatrices};
use crate::error::{Error, Result};
use crate::geometry::CavityGeometry;
use crate::modes::ModeFunction;
use crate::rk4::Rk4;
use crate::spectrum::{continue_spectrum, solve_spectrum, SolveOptions, WaveNumberSpectrum};
use crate::C64;

/// Harmonic wall drive `dl(t) = l0 + L eps sin(omega t)` for `0 <= t <= t_f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallTrajectory {
    pub l0: f64,
    pub epsilon: f64,
    pub omega: f64,
    pub t_f: f64,
}

impl WallTrajectory {
    /// True when the amplitude is small against both sub-cavities.
    pub fn amplitude_ok(&self, geom: &CavityGeometry) -> bool {
        let g = geom.with_dl(self.l0);
        self.epsilon.abs() < 0.1 * g.l1().min(g.l2()) / geom.length
    }

    pub fn delta_l(&self, length: f64, t: f64) -> f64 {
        if (0.0..=self.t_f).contains(&t) {
            self.l0 + length * self.epsilon * (self.omega * t).sin()
        } else {
            self.l0
        }
    }

    pub fn lambda(&self, t: f64) -> f64 {
        lambda_of_t(self, t).0
    }
}

/// Wall velocity over `L` and its time derivative.
pub fn lambda_of_t(traj: &WallTrajectory, t: f64) -> (f64, f64) {
    if t < 0.0 || t > traj.t_f {
        return (0.0, 0.0);
    }
    let w = traj.omega;
    (traj.epsilon * w * (w * t).cos(), -traj.epsilon * w * w * (w * t).sin())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum EquationVariant {
    /// Second-derivative coupling multiplied into the first-derivative one.
    A,
    #[default]
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub n_modes: usize,
    /// Step as a fraction of the shortest period.
    pub dt_fraction: f64,
    pub variant: EquationVariant,
    pub table_nodes: usize,
    pub frozen_couplings: bool,
    pub window_periods: f64,
    pub window_samples: usize,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            n_modes: 15,
            dt_fraction: 1.0 / 40.0,
            variant: EquationVariant::B,
            table_nodes: 12,
            frozen_couplings: false,
            window_periods: 20.0,
            window_samples: 400,
        }
    }
}

/// Mode amplitudes for every source column at one time.
#[derive(Debug, Clone)]
pub struct ModeState {
    pub t: f64,
    pub q: DMatrix<C64>,
    pub qdot: DMatrix<C64>,
}

/// Coefficients of `Q = A e^{i w t} + B e^{-i w t}`; row = out mode, column = in mode.
#[derive(Debug, Clone)]
pub struct BogoliubovMatrices {
    pub a: DMatrix<C64>,
    pub b: DMatrix<C64>,
    pub omega_in: Vec<f64>,
    pub omega_out: Vec<f64>,
    pub residual: f64,
}

impl BogoliubovMatrices {
    pub fn identity(omega: &[f64]) -> Self {
        let n = omega.len();
        Self {
            a: DMatrix::zeros(n, n),
            b: DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(1.0 / (2.0 * omega[i]).sqrt(), 0.0) } else { C64::new(0.0, 0.0) }),
            omega_in: omega.to_vec(),
            omega_out: omega.to_vec(),
            residual: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.omega_out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega_out.is_empty()
    }

    /// Largest deviation of `sum_l 2 w_l (B* B' - A* A')` from the identity.
    pub fn symplectic_defect(&self) -> f64 {
        let n = self.a.ncols();
        let mut worst: f64 = 0.0;
        for m in 0..n {
            for mp in 0..n {
                let mut s = C64::new(0.0, 0.0);
                for l in 0..self.a.nrows() {
                    let w2 = 2.0 * self.omega_out[l];
                    s += (self.b[(l, m)].conj() * self.b[(l, mp)] - self.a[(l, m)].conj() * self.a[(l, mp)]) * w2;
                }
                let target = if m == mp { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationVector(pub Vec<f64>);

impl OccupationVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::OutOfRange("occupations must be >= 0".into()));
        }
        Ok(Self(values))
    }

    pub fn vacuum(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn get(&self, m: usize) -> f64 {
        self.0.get(m).copied().unwrap_or(0.0)
    }
}

/// `<N_l> = 2 w_l sum_m [(1 + N_m) |A_lm|^2 + N_m |B_lm|^2]`.
pub fn photon_numbers(bog: &BogoliubovMatrices, n0: &OccupationVector) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(bog.len());
    for l in 0..bog.a.nrows() {
        let mut s = 0.0;
        for m in 0..bog.a.ncols() {
            let nm = n0.get(m);
            s += (1.0 + nm) * bog.a[(l, m)].norm_sqr() + nm * bog.b[(l, m)].norm_sqr();
        }
        let v = 2.0 * bog.omega_out[l] * s;
        if v < -1e-9 {
            return Err(Error::NegativeOccupancy { mode: l, value: v });
        }
        out.push(v);
    }
    Ok(out)
}

/// Wavenumbers and couplings as smooth functions of the wall displacement.
struct ModeTables {
    k: ChebyshevFit,
    g: ChebyshevFit,
    h: ChebyshevFit,
}

fn flatten(m: &DMatrix<f64>) -> Vec<f64> {
    // row-major: index n * size + l
    let n = m.nrows();
    (0..n * n).map(|i| m[(i / n, i % n)]).collect()
}

fn build_tables(couplings: &CouplingMatrices, traj: &WallTrajectory, cfg: &DynamicsConfig) -> Result<ModeTables> {
    let spec = &couplings.spectrum;
    let geom = couplings.geometry;
    let n = spec.len();
    let constant = || ModeTables {
        k: ChebyshevFit::constant(spec.k.clone()),
        g: ChebyshevFit::constant(flatten(&couplings.g)),
        h: ChebyshevFit::constant(flatten(&couplings.h)),
    };
    if traj.epsilon == 0.0 {
        return Ok(constant());
    }
    let reach = traj.epsilon.abs() * geom.length;
    let (lo, hi) = (traj.l0 - reach, traj.l0 + reach);
    let nodes = ChebyshevFit::nodes(lo, hi, cfg.table_nodes);
    let reference: Vec<ModeFunction> = spec.k.iter().map(|&k| ModeFunction::new(geom, k)).collect();
    let mut ks = Vec::with_capacity(nodes.len());
    let mut gs = Vec::with_capacity(nodes.len());
    let mut hs = Vec::with_capacity(nodes.len());
    for &x in &nodes {
        let s = track(spec, x)?;
        ks.push(s.k.clone());
        if cfg.frozen_couplings {
            gs.push(flatten(&couplings.g));
            hs.push(flatten(&couplings.h));
            continue;
        }
        let c = coupling_matrices(&s.geometry, &s, n)?;
        let sign: Vec<f64> = s
            .k
            .iter()
            .zip(&reference)
            .map(|(&k, r)| ModeFunction::new(s.geometry, k).overlap_on(r, &geom).signum())
            .collect();
        let fix = |m: &DMatrix<f64>| DMatrix::from_fn(n, n, |a, b| m[(a, b)] * sign[a] * sign[b]);
        gs.push(flatten(&fix(&c.g)));
        hs.push(flatten(&fix(&c.h)));
    }
    Ok(ModeTables {
        k: ChebyshevFit::from_samples(lo, hi, &ks),
        g: ChebyshevFit::from_samples(lo, hi, &gs),
        h: ChebyshevFit::from_samples(lo, hi, &hs),
    })
}

/// Follows the spectrum to displacement `dl` in small steps.
fn track(spec: &WaveNumberSpectrum, dl: f64) -> Result<WaveNumberSpectrum> {
    let start = spec.geometry.dl;
    let steps = ((dl - start).abs() / (1e-3 * spec.geometry.length)).ceil().max(1.0) as usize;
    let mut s = spec.clone();
    for i in 1..=steps {
        let x = start + (dl - start) * i as f64 / steps as f64;
        s = continue_spectrum(&s, &spec.geometry.with_dl(x))?;
    }
    Ok(s)
}

/// Slowly varying amplitudes `a, b` of `Q = a e^{i w t} + b e^{-i w t}`
/// with `w` the rest frequencies; stored as two row-major n x n blocks.
struct Integrator<'a> {
    n: usize,
    omega: Vec<f64>,
    traj: WallTrajectory,
    length: f64,
    tables: &'a ModeTables,
    variant: EquationVariant,
    kk: Vec<f64>,
    gg: Vec<f64>,
    hh: Vec<f64>,
    q: Vec<C64>,
    x: Vec<C64>,
}

impl<'a> Integrator<'a> {
    fn rhs(&mut self, t: f64, y: &[C64], dy: &mut [C64]) {
        let n = self.n;
        let (lam, lam_dot) = lambda_of_t(&self.traj, t);
        let dl = self.traj.l0 + self.length * self.traj.epsilon * (self.traj.omega * t).sin();
        self.tables.k.eval_into(dl, &mut self.kk);
        self.tables.g.eval_into(dl, &mut self.gg);
        if !matches!(self.variant, EquationVariant::B) || lam != 0.0 {
            self.tables.h.eval_into(dl, &mut self.hh);
        }
        let (a, b) = y.split_at(n * n);
        let phases: Vec<C64> = self.omega.iter().map(|w| C64::from_polar(1.0, w * t)).collect();
        for l in 0..n {
            let e = phases[l];
            let w = self.omega[l];
            for m in 0..n {
                let i = l * n + m;
                let (ae, be) = (a[i] * e, b[i] * e.conj());
                let q = ae + be;
                let qd = C64::new(0.0, w) * (ae - be);
                self.q[i] = q;
                self.x[i] = qd * (2.0 * lam) + q * lam_dot;
            }
        }
        let lam2 = lam * lam;
        for l in 0..n {
            let e = phases[l];
            let w = self.omega[l];
            let detune = self.kk[l] * self.kk[l] - w * w;
            let scale = C64::new(0.0, -0.5 / w);
            for m in 0..n {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..n {
                    let g = self.gg[k * n + l];
                    let h = self.hh[k * n + l];
                    let idx = k * n + m;
                    match self.variant {
                        EquationVariant::B => s += self.x[idx] * g + self.q[idx] * (lam2 * h),
                        EquationVariant::A => s += (self.x[idx] + self.q[idx] * (lam2 * h)) * g,
                    }
                }
                let f = -(self.q[l * n + m] * detune) - s;
                let fs = f * scale;
                dy[l * n + m] = fs * e.conj();
                dy[n * n + l * n + m] = -(fs * e);
            }
        }
    }
}

/// Applies the stop of the walls at `t`: the field and its time derivative
/// are carried over to the rest basis, after which the amplitudes are frozen.
fn stop_map(tables: &ModeTables, traj: &WallTrajectory, omega: &[f64], length: f64, t: f64, y: &[C64]) -> (DMatrix<C64>, DMatrix<C64>) {
    let n = omega.len();
    let dl = traj.delta_l(length, t);
    let (lam, _) = lambda_of_t(traj, t);
    let (a, b) = y.split_at(n * n);
    let mut q = DMatrix::<C64>::zeros(n, n);
    let mut qd = DMatrix::<C64>::zeros(n, n);
    for l in 0..n {
        let e = C64::from_polar(1.0, omega[l] * t);
        for m in 0..n {
            let i = l * n + m;
            q[(l, m)] = a[i] * e + b[i] * e.conj();
            qd[(l, m)] = C64::new(0.0, omega[l]) * (a[i] * e - b[i] * e.conj());
        }
    }
    let g_at = |x: f64| DMatrix::from_row_slice(n, n, &tables.g.eval(x));
    let o = basis_overlap(&g_at, traj.l0, dl, length).map(|v| C64::new(v, 0.0));
    let g = g_at(dl).map(|v| C64::new(v, 0.0));
    let ot = o.transpose();
    let q_new = &ot * &q;
    let qd_new = &ot * (qd + g.transpose() * &q * C64::new(lam, 0.0));
    (q_new, qd_new)
}

/// Overlaps `(Phi_n(to), Phi_l(from))` from `dO/dx = g(x) O / L`.
fn basis_overlap(g_at: &dyn Fn(f64) -> DMatrix<f64>, from: f64, to: f64, length: f64) -> DMatrix<f64> {
    let n = g_at(from).nrows();
    let mut o = DMatrix::<f64>::identity(n, n);
    let steps = 16;
    let h = (to - from) / steps as f64 / length;
    let f = |x: f64, o: &DMatrix<f64>| g_at(x) * o;
    for s in 0..steps {
        let x = from + (to - from) * s as f64 / steps as f64;
        let xm = x + 0.5 * (to - from) / steps as f64;
        let xe = x + (to - from) / steps as f64;
        let k1 = f(x, &o);
        let k2 = f(xm, &(&o + &k1 * (0.5 * h)));
        let k3 = f(xm, &(&o + &k2 * (0.5 * h)));
        let k4 = f(xe, &(&o + &k3 * h));
        o += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    o
}

fn amplitudes_at(omega: &[f64], t: f64, q: &DMatrix<C64>, qd: &DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
    let n = omega.len();
    let mut a = DMatrix::zeros(n, q.ncols());
    let mut b = DMatrix::zeros(n, q.ncols());
    for l in 0..n {
        let e = C64::from_polar(1.0, omega[l] * t);
        let iw = C64::new(0.0, omega[l]);
        for m in 0..q.ncols() {
            a[(l, m)] = (q[(l, m)] + qd[(l, m)] / iw) * 0.5 * e.conj();
            b[(l, m)] = (q[(l, m)] - qd[(l, m)] / iw) * 0.5 * e;
        }
    }
    (a, b)
}

/// Free-evolution samples of `(a, b)` over `[t0, t0 + span]`.
fn window_samples(omega: &[f64], a: &DMatrix<C64>, b: &DMatrix<C64>, t0: f64, span: f64, count: usize) -> Vec<ModeState> {
    let n = omega.len();
    (0..count)
        .map(|s| {
            let t = t0 + span * s as f64 / (count.max(2) - 1) as f64;
            let mut q = DMatrix::zeros(n, a.ncols());
            let mut qd = DMatrix::zeros(n, a.ncols());
            for l in 0..n {
                let e = C64::from_polar(1.0, omega[l] * t);
                for m in 0..a.ncols() {
                    q[(l, m)] = a[(l, m)] * e + b[(l, m)] * e.conj();
                    qd[(l, m)] = C64::new(0.0, omega[l]) * (a[(l, m)] * e - b[(l, m)] * e.conj());
                }
            }
            ModeState { t, q, qdot: qd }
        })
        .collect()
}

/// Output of one integration: the stopped states at each requested `t_f`.
#[derive(Debug, Clone)]
pub struct StopSnapshot {
    pub t_f: f64,
    pub a: DMatrix<C64>,
    pub b: DMatrix<C64>,
}

/// Integrates the coupled mode equations once and records the stopped
/// amplitudes at every time in `t_grid` (ascending).
pub fn evolve_snapshots(
    couplings: &CouplingMatrices,
    traj: &WallTrajectory,
    cfg: &DynamicsConfig,
    t_grid: &[f64],
) -> Result<Vec<StopSnapshot>> {
    let spec = &couplings.spectrum;
    let n = spec.len();
    let omega = spec.k.clone();
    let length = couplings.geometry.length;
    let t_end = t_grid.iter().cloned().fold(0.0, f64::max);
    let run = WallTrajectory { t_f: t_end, ..*traj };
    let tables = build_tables(couplings, &run, cfg)?;
    let k_max = omega.iter().cloned().fold(0.0, f64::max) * (1.0 + 2.0 * traj.epsilon.abs());
    let dt_max = cfg.dt_fraction * 2.0 * PI / k_max;

    // field and its time derivative are continuous when the drive switches
    // on, so the velocity term of the moving basis enters the start values
    let (lam0, _) = lambda_of_t(&run, 0.0);
    let mut y = vec![C64::new(0.0, 0.0); 2 * n * n];
    for m in 0..n {
        let qm = 1.0 / (2.0 * omega[m]).sqrt();
        for l in 0..n {
            let q = if l == m { qm } else { 0.0 };
            let qd = C64::new(0.0, -omega[l] * q) - C64::new(lam0 * couplings.g[(m, l)] * qm, 0.0);
            let iw = C64::new(0.0, omega[l]);
            y[l * n + m] = (C64::new(q, 0.0) + qd / iw) * 0.5;
            y[n * n + l * n + m] = (C64::new(q, 0.0) - qd / iw) * 0.5;
        }
    }
    let mut integ = Integrator {
        n,
        omega: omega.clone(),
        traj: run,
        length,
        tables: &tables,
        variant: cfg.variant,
        kk: vec![0.0; n],
        gg: vec![0.0; n * n],
        hh: vec![0.0; n * n],
        q: vec![C64::new(0.0, 0.0); n * n],
        x: vec![C64::new(0.0, 0.0); n * n],
    };
    let mut rk = Rk4::new(2 * n * n);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        if target < t {
            return Err(Error::InvalidOptions("t_f grid must be ascending and >= 0".into()));
        }
        let span = target - t;
        let steps = (span / dt_max).ceil() as usize;
        if steps > 0 {
            let h = span / steps as f64;
            for s in 0..steps {
                let t0 = t + s as f64 * h;
                rk.step(t0, h, &mut y, |tt, yy, dd| integ.rhs(tt, yy, dd));
            }
            if y.iter().any(|v| !(v.norm() < 1e12)) {
                return Err(Error::StabilityFailure(target));
            }
        }
        t = target;
        let stop = WallTrajectory { t_f: target, ..*traj };
        let (q, qd) = stop_map(&tables, &stop, &omega, length, target, &y);
        let (a, b) = amplitudes_at(&omega, target, &q, &qd);
        out.push(StopSnapshot { t_f: target, a, b });
    }
    Ok(out)
}

/// Runs the drive up to `traj.t_f`, then samples the free field over the
/// extraction window. States are returned from `t = 0` on.
pub fn evolve(couplings: &CouplingMatrices, traj: &WallTrajectory, cfg: &DynamicsConfig) -> Result<Vec<ModeState>> {
    let omega = couplings.spectrum.k.clone();
    let snap = evolve_snapshots(couplings, traj, cfg, &[traj.t_f])?;
    let s = &snap[0];
    let n = omega.len();
    let mut states = window_samples(&omega, &DMatrix::zeros(n, n), &BogoliubovMatrices::identity(&omega).b, 0.0, 0.0, 1);
    let span = window_span(&omega, cfg);
    states.extend(window_samples(&omega, &s.a, &s.b, traj.t_f, span, cfg.window_samples));
    Ok(states)
}

fn window_span(omega: &[f64], cfg: &DynamicsConfig) -> f64 {
    let w_min = omega.iter().cloned().fold(f64::INFINITY, f64::min);
    cfg.window_periods * 2.0 * PI / w_min
}

/// Recovers `A, B` from states in `[window.0, window.1]` by time averaging
/// against `e^{-/+ i w t}`.
pub fn extract_bogoliubov(states: &[ModeState], omega_out: &[f64], window: (f64, f64)) -> Result<BogoliubovMatrices> {
    let w_min = omega_out.iter().cloned().fold(f64::INFINITY, f64::min);
    let needed = 20.0 * 2.0 * PI / w_min;
    let span = window.1 - window.0;
    if span < needed * (1.0 - 1e-9) {
        return Err(Error::WindowTooShort { window: span, needed });
    }
    let picked: Vec<&ModeState> = states.iter().filter(|s| s.t >= window.0 && s.t <= window.1).collect();
    if picked.is_empty() {
        return Err(Error::WindowTooShort { window: 0.0, needed });
    }
    let (n, cols) = (picked[0].q.nrows(), picked[0].q.ncols());
    let mut a = DMatrix::<C64>::zeros(n, cols);
    let mut b = DMatrix::<C64>::zeros(n, cols);
    let mut each = Vec::with_capacity(picked.len());
    for s in &picked {
        let (sa, sb) = amplitudes_at(omega_out, s.t, &s.q, &s.qdot);
        a += &sa;
        b += &sb;
        each.push((sa, sb));
    }
    let count = picked.len() as f64;
    a /= C64::new(count, 0.0);
    b /= C64::new(count, 0.0);
    let mut residual: f64 = 0.0;
    let mut q_norm: f64 = 0.0;
    for ((sa, sb), s) in each.iter().zip(&picked) {
        residual = residual.max((sa - &a).camax()).max((sb - &b).camax());
        q_norm = q_norm.max(s.q.camax());
    }
    let bound = 1e-4 * q_norm;
    if residual > bound {
        return Err(Error::PoorFit { residual, bound });
    }
    Ok(BogoliubovMatrices { a, b, omega_in: omega_out.to_vec(), omega_out: omega_out.to_vec(), residual })
}

#[derive(Debug, Clone, Serialize)]
pub struct PhotonSeries {
    pub t_f: Vec<f64>,
    /// `n[i][l]`: occupation of mode `l` at `t_f[i]`.
    pub n: Vec<Vec<f64>>,
    pub defect: Vec<f64>,
    pub omega: Vec<f64>,
    pub labels: Vec<String>,
}

/// Everything needed to run the drive at one rest geometry.
#[derive(Debug, Clone)]
pub struct Setup {
    pub geometry: CavityGeometry,
    pub spectrum: WaveNumberSpectrum,
    pub couplings: CouplingMatrices,
}

impl Setup {
    pub fn new(geom: &CavityGeometry, n_modes: usize) -> Result<Self> {
        let spectrum = solve_spectrum(geom, &SolveOptions::with_modes(n_modes))?;
        let couplings = coupling_matrices(geom, &spectrum, n_modes)?;
        Ok(Self { geometry: *geom, spectrum, couplings })
    }
}

pub fn bogoliubov_series(setup: &Setup, traj: &WallTrajectory, cfg: &DynamicsConfig, t_grid: &[f64]) -> Result<Vec<BogoliubovMatrices>> {
    let omega = setup.spectrum.k.clone();
    let snaps = evolve_snapshots(&setup.couplings, traj, cfg, t_grid)?;
    let span = window_span(&omega, cfg);
    snaps
        .iter()
        .map(|s| {
            let states = window_samples(&omega, &s.a, &s.b, s.t_f, span, cfg.window_samples.max(2));
            extract_bogoliubov(&states, &omega, (s.t_f, s.t_f + span))
        })
        .collect()
}

/// Photon numbers after stopping the drive at each `t_f` of the grid.
pub fn photon_number_series(
    geom: &CavityGeometry,
    traj: &WallTrajectory,
    n0: &OccupationVector,
    t_grid: &[f64],
    cfg: &DynamicsConfig,
) -> Result<PhotonSeries> {
    let rest = geom.with_dl(traj.l0);
    let setup = Setup::new(&rest, cfg.n_modes)?;
    photon_number_series_with(&setup, traj, n0, t_grid, cfg)
}

pub fn photon_number_series_with(
    setup: &Setup,
    traj: &WallTrajectory,
    n0: &OccupationVector,
    t_grid: &[f64],
    cfg: &DynamicsConfig,
) -> Result<PhotonSeries> {
    let bogs = bogoliubov_series(setup, traj, cfg, t_grid)?;
    let mut n = Vec::with_capacity(bogs.len());
    let mut defect = Vec::with_capacity(bogs.len());
    for b in &bogs {
        n.push(photon_numbers(b, n0)?);
        defect.push(b.symplectic_defect());
    }
    Ok(PhotonSeries {
        t_f: t_grid.to_vec(),
        n,
        defect,
        omega: setup.spectrum.k.clone(),
        labels: setup.spectrum.labels.iter().map(|l| l.to_string()).collect(),
    })
}
