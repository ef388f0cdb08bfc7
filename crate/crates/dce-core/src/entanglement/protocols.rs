use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::gaussian::{log_negativity, GaussianState};
use super::overlap::{overlap_coefficients, OverlapCoefficients};
use crate::couplings::coupling_matrices;
use crate::dynamics::BogoliubovMatrices;
use crate::error::{Error, Result};
use crate::geometry::CavityGeometry;
use crate::msa::{zeroth_mode_photon_series, ZerothSeries};
use crate::spectrum::{classify_modes, solve_spectrum, ModeLabel, Side, SolveOptions, WaveNumberSpectrum};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntanglementOptions {
    pub n_local: usize,
    pub n_global: usize,
    pub dt: f64,
    /// How far below 1/2 a symplectic eigenvalue may fall before the
    /// covariance is rejected.
    pub physicality_tol: f64,
}

impl Default for EntanglementOptions {
    fn default() -> Self {
        Self { n_local: 20, n_global: 2000, dt: 0.0, physicality_tol: 1e-6 }
    }
}

/// Local annihilation operators as `a_j = sum_m (u_jm a_m + w_jm a_m^dag)`
/// over the input modes; rows list the left modes first, then the right.
#[derive(Debug, Clone)]
pub struct ComposedTransformation {
    pub u: DMatrix<C64>,
    pub w: DMatrix<C64>,
    pub n_left: usize,
}

impl ComposedTransformation {
    /// `sum_m |u_jm|^2 - |w_jm|^2` for each local mode.
    pub fn norms(&self) -> Vec<f64> {
        (0..self.u.nrows())
            .map(|j| (0..self.u.ncols()).map(|m| self.u[(j, m)].norm_sqr() - self.w[(j, m)].norm_sqr()).sum())
            .collect()
    }

    pub fn defect(&self) -> f64 {
        self.norms().iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Composes the wall-motion map (global out modes in terms of in modes)
/// with the quench projection onto both sides. `bog` may cover only the
/// lowest global modes; the rest pass through unchanged.
pub fn compose_bogoliubov(bog: &BogoliubovMatrices, left: &OverlapCoefficients, right: &OverlapCoefficients, omega: &[f64]) -> Result<ComposedTransformation> {
    let n = omega.len();
    let s = bog.len();
    if s > n || left.xi.nrows() != n || right.xi.nrows() != n {
        return Err(Error::Dimension(format!("{s} moving modes, {n} global modes")));
    }
    let rows = left.xi.ncols() + right.xi.ncols();
    let mut u = DMatrix::<C64>::zeros(rows, n);
    let mut w = DMatrix::<C64>::zeros(rows, n);
    for (off, ov) in [(0, left), (left.xi.ncols(), right)] {
        for j in 0..ov.xi.ncols() {
            for m in 0..n {
                if m >= s {
                    u[(off + j, m)] = ov.xi[(m, j)].conj();
                    w[(off + j, m)] = -ov.chi[(m, j)].conj();
                    continue;
                }
                let (mut su, mut sw) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                for k in 0..s {
                    let r = (2.0 * omega[k]).sqrt();
                    let (x, c) = (ov.xi[(k, j)].conj(), ov.chi[(k, j)].conj());
                    su += (x * bog.b[(k, m)] - c * bog.a[(k, m)]) * r;
                    sw += (x * bog.a[(k, m)].conj() - c * bog.b[(k, m)].conj()) * r;
                }
                u[(off + j, m)] = su;
                w[(off + j, m)] = sw;
            }
        }
    }
    let out = ComposedTransformation { u, w, n_left: left.xi.ncols() };
    let d = out.defect();
    if d > 1e-2 {
        return Err(Error::SymplecticViolation(d));
    }
    Ok(out)
}

pub fn covariance_from_bogoliubov(composed: &ComposedTransformation, n0: &[f64], tol: f64) -> Result<GaussianState> {
    let state = GaussianState::from_linear_map(&composed.u, &composed.w, n0);
    state.check_physical_within(tol)?;
    Ok(state)
}

/// `values[(n - 1, m - 1)]` pairs left mode `n` with right mode `m`.
#[derive(Debug, Clone, Serialize)]
pub struct NegativityMap {
    pub values: DMatrix<f64>,
    pub protocol: String,
    pub t_f: f64,
    pub min_symplectic: f64,
}

impl NegativityMap {
    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.values[(n - 1, m - 1)]
    }

    pub fn max(&self) -> f64 {
        self.values.max()
    }
}

pub fn negativity_map(state: &GaussianState, n_left: usize, n_right: usize) -> Result<DMatrix<f64>> {
    let vals: Result<Vec<f64>> = (0..n_left * n_right)
        .into_par_iter()
        .map(|i| log_negativity(state, i / n_right, n_left + i % n_right))
        .collect();
    Ok(DMatrix::from_row_slice(n_left, n_right, &vals?))
}

/// Occupations of the local modes after the quench.
#[derive(Debug, Clone, Serialize)]
pub struct LocalPhotons {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// Share of each total carried by the upper tenth of global modes.
    pub tail_fraction: f64,
    pub truncation_warning: bool,
}

pub fn sudden_wall_photons(left: &OverlapCoefficients, right: &OverlapCoefficients, n0: &[f64]) -> LocalPhotons {
    let n = left.xi.nrows();
    let cut = n - n / 10;
    let mut tail: f64 = 0.0;
    let mut count = |ov: &OverlapCoefficients| -> Vec<f64> {
        (0..ov.xi.ncols())
            .map(|j| {
                let term = |m: usize| {
                    let nm = n0.get(m).copied().unwrap_or(0.0);
                    nm * ov.xi[(m, j)].norm_sqr() + (1.0 + nm) * ov.chi[(m, j)].norm_sqr()
                };
                let total: f64 = (0..n).map(term).sum();
                let upper: f64 = (cut..n).map(term).sum();
                if total > 0.0 {
                    tail = tail.max(upper / total);
                }
                total
            })
            .collect()
    };
    let l = count(left);
    let r = count(right);
    LocalPhotons { left: l, right: r, tail_fraction: tail, truncation_warning: tail > 0.01 }
}

fn global_spectrum(geom: &CavityGeometry, n: usize) -> Result<WaveNumberSpectrum> {
    solve_spectrum(geom, &SolveOptions::with_modes(n))
}

/// Negativity after switching the central barrier on, starting from a
/// wall-motion map `bog` over the lowest global modes.
pub fn quench_negativity(geom: &CavityGeometry, spectrum: &WaveNumberSpectrum, bog: &BogoliubovMatrices, opts: &EntanglementOptions) -> Result<(DMatrix<f64>, f64)> {
    let left = overlap_coefficients(geom, spectrum, Side::Left, opts.n_local, opts.dt);
    let right = overlap_coefficients(geom, spectrum, Side::Right, opts.n_local, opts.dt);
    let composed = compose_bogoliubov(bog, &left, &right, &spectrum.k)?;
    let state = covariance_from_bogoliubov(&composed, &[], opts.physicality_tol)?;
    let nu = super::gaussian::symplectic_eigenvalues(&state.v);
    let min = nu.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((negativity_map(&state, opts.n_local, opts.n_local)?, min))
}

pub fn protocol_static(geom: &CavityGeometry, opts: &EntanglementOptions) -> Result<NegativityMap> {
    let spectrum = global_spectrum(geom, opts.n_global)?;
    let bog = BogoliubovMatrices::identity(&[]);
    let (values, min) = quench_negativity(geom, &spectrum, &bog, opts)?;
    Ok(NegativityMap { values, protocol: "static".into(), t_f: 0.0, min_symplectic: min })
}

/// Pair creation in global modes 1 and 2 at slow time `tau`, with the
/// signed rate `gamma`.
pub fn toy_dce_bogoliubov(gamma: f64, tau: f64, omega: &[f64]) -> BogoliubovMatrices {
    let mut bog = BogoliubovMatrices::identity(omega);
    let (c, s) = ((0.5 * gamma * tau).cosh(), (0.5 * gamma * tau).sinh());
    let r = |i: usize| (2.0 * omega[i]).sqrt();
    bog.b[(1, 1)] = C64::new(c / r(1), 0.0);
    bog.b[(2, 2)] = C64::new(c / r(2), 0.0);
    bog.a[(1, 2)] = C64::new(s / r(1), 0.0);
    bog.a[(2, 1)] = C64::new(s / r(2), 0.0);
    bog
}

/// `g_21 (w2^2 - w1^2) / (2 sqrt(w1 w2))` for the rest geometry.
pub fn toy_rate(geom: &CavityGeometry) -> Result<f64> {
    let s = global_spectrum(geom, 4)?;
    let c = coupling_matrices(geom, &s, 4)?;
    let w = &s.k;
    Ok(c.g[(2, 1)] * (w[2] * w[2] - w[1] * w[1]) / (2.0 * (w[1] * w[2]).sqrt()))
}

pub fn protocol_dce(geom: &CavityGeometry, epsilon: f64, t_grid: &[f64], opts: &EntanglementOptions) -> Result<Vec<NegativityMap>> {
    let spectrum = global_spectrum(geom, opts.n_global)?;
    let gamma = toy_rate(geom)?;
    let omega = &spectrum.k[..3];
    t_grid
        .iter()
        .map(|&t| {
            let bog = toy_dce_bogoliubov(gamma, epsilon * t, omega);
            let (values, min) = quench_negativity(geom, &spectrum, &bog, opts)?;
            Ok(NegativityMap { values, protocol: "dce".into(), t_f: t, min_symplectic: min })
        })
        .collect()
}

/// Zeroth-mode drive followed by a slow quench: the lowest left and right
/// global modes turn into the first local modes, and the zeroth mode is
/// traced out.
pub fn protocol_zeroth(alpha: f64, epsilon: f64, t_grid: &[f64], matched: bool, opts: &EntanglementOptions) -> Result<(Vec<NegativityMap>, ZerothSeries)> {
    let l0 = crate::msa::zeroth_mode_geometry(alpha, 1.0)?;
    let geom = CavityGeometry::unit(l0, alpha)?;
    let spectrum = classify_modes(&global_spectrum(&geom, 6)?);
    if spectrum.find(ModeLabel::Zeroth).is_none() {
        return Err(Error::OutOfRange("no zeroth mode at this susceptibility".into()));
    }
    let series = zeroth_mode_photon_series(&spectrum, epsilon, t_grid, matched)?;
    let amps = zeroth_amplitudes(&spectrum, epsilon, t_grid, matched)?;
    let n = opts.n_local;
    let mut maps = Vec::with_capacity(t_grid.len());
    for (i, &t) in t_grid.iter().enumerate() {
        let (a, b) = &amps[i];
        // rows: left local 1..n then right local 1..n; inputs: zeroth, left, right
        let mut u = DMatrix::<C64>::zeros(2 * n, 3 + 2 * (n - 1));
        let mut w = DMatrix::<C64>::zeros(2 * n, 3 + 2 * (n - 1));
        for (row, global) in [(0, 1), (n, 2)] {
            let r = (2.0 * series.omega[global]).sqrt();
            for m in 0..3 {
                u[(row, m)] = b[(global, m)] * r;
                w[(row, m)] = a[(global, m)].conj() * r;
            }
        }
        for j in 1..n {
            u[(j, 2 + j)] = C64::new(1.0, 0.0);
            u[(n + j, 2 + n - 1 + j)] = C64::new(1.0, 0.0);
        }
        let state = covariance_from_bogoliubov(&ComposedTransformation { u, w, n_left: n }, &[], opts.physicality_tol)?;
        let nu = super::gaussian::symplectic_eigenvalues(&state.v);
        let min = nu.iter().cloned().fold(f64::INFINITY, f64::min);
        maps.push(NegativityMap { values: negativity_map(&state, n, n)?, protocol: "zeroth".into(), t_f: t, min_symplectic: min });
    }
    Ok((maps, series))
}

fn zeroth_amplitudes(spectrum: &WaveNumberSpectrum, epsilon: f64, t_grid: &[f64], matched: bool) -> Result<Vec<(DMatrix<C64>, DMatrix<C64>)>> {
    let amps = crate::msa::zeroth_mode_amplitudes(spectrum, epsilon, t_grid, matched)?;
    Ok(amps.a.into_iter().zip(amps.b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> EntanglementOptions {
        EntanglementOptions { n_local: 6, n_global: 300, ..Default::default() }
    }

    #[test]
    fn toy_map_is_symplectic_and_starts_at_identity() {
        let w = [1.0, 2.0, 3.0];
        let id = toy_dce_bogoliubov(3.0, 0.0, &w);
        let exact = BogoliubovMatrices::identity(&w);
        assert!((&id.b - &exact.b).camax() < 1e-15 && id.a.camax() == 0.0);
        for tau in [0.1, 1.0, 4.0] {
            let scale = (3.0f64 * tau).cosh();
            assert!(toy_dce_bogoliubov(3.0, tau, &w).symplectic_defect() < 1e-14 * scale);
        }
    }

    #[test]
    fn dce_at_zero_time_equals_static() {
        let g = CavityGeometry::unit(0.0, 0.0).unwrap();
        let stat = protocol_static(&g, &small()).unwrap();
        let dce = protocol_dce(&g, 3e-3, &[0.0], &small()).unwrap();
        assert!((&stat.values - &dce[0].values).amax() < 1e-12);
    }

    #[test]
    fn static_symmetric_map_is_symmetric() {
        let g = CavityGeometry::unit(0.0, 0.0).unwrap();
        let map = protocol_static(&g, &small()).unwrap();
        let v = &map.values;
        assert!((v - v.transpose()).amax() < 1e-9);
        assert!(v.iter().all(|&x| x >= 0.0));
        assert!((map.get(1, 1) - map.max()).abs() < 1e-12);
    }

    #[test]
    fn composed_norms_hold() {
        let g = CavityGeometry::unit(0.0, 0.0).unwrap();
        let s = global_spectrum(&g, 300).unwrap();
        let l = overlap_coefficients(&g, &s, Side::Left, 4, 0.0);
        let r = overlap_coefficients(&g, &s, Side::Right, 4, 0.0);
        let bog = toy_dce_bogoliubov(-4.0, 1.0, &s.k[..3]);
        let c = compose_bogoliubov(&bog, &l, &r, &s.k).unwrap();
        assert!(c.defect() < 0.01);
    }

    #[test]
    fn conducting_wall_keeps_occupations() {
        let g = CavityGeometry::unit(0.2, 1e6).unwrap();
        let s = global_spectrum(&g, 60).unwrap();
        let l = overlap_coefficients(&g, &s, Side::Left, 3, 0.0);
        let r = overlap_coefficients(&g, &s, Side::Right, 3, 0.0);
        let mut n0 = vec![0.0; 60];
        n0[1] = 2.0;
        let out = sudden_wall_photons(&l, &r, &n0);
        let total: f64 = out.left.iter().chain(&out.right).sum();
        assert!((total - 2.0).abs() < 1e-3, "{total}");
    }

    #[test]
    fn transparent_quench_creates_photons() {
        let g = CavityGeometry::unit(0.0, 0.0).unwrap();
        let s = global_spectrum(&g, 400).unwrap();
        let l = overlap_coefficients(&g, &s, Side::Left, 5, 0.0);
        let r = overlap_coefficients(&g, &s, Side::Right, 5, 0.0);
        let out = sudden_wall_photons(&l, &r, &[]);
        assert!(out.left.iter().all(|&n| n > 0.0));
        assert!(out.left.windows(2).all(|p| p[1] < p[0]));
    }
}
