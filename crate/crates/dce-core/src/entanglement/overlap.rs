use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::geometry::CavityGeometry;
use crate::modes::{sinc, ModeFunction};
use crate::spectrum::{Side, WaveNumberSpectrum};
use crate::C64;

/// Mode of one closed half after the central wall becomes a mirror.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizedMode {
    pub side: Side,
    /// Starts at 1.
    pub index: usize,
    pub frequency: f64,
}

impl LocalizedMode {
    pub fn new(geom: &CavityGeometry, side: Side, index: usize) -> Self {
        Self { side, index, frequency: PI * index as f64 / side_length(geom, side) }
    }
}

pub fn side_length(geom: &CavityGeometry, side: Side) -> f64 {
    match side {
        Side::Left => geom.l1(),
        Side::Right => geom.l2(),
    }
}

/// Projections of the global modes (rows) onto the local modes of one side
/// (columns).
#[derive(Debug, Clone)]
pub struct OverlapCoefficients {
    pub side: Side,
    pub xi: DMatrix<C64>,
    pub chi: DMatrix<C64>,
    pub local: Vec<LocalizedMode>,
    pub dt: f64,
}

impl OverlapCoefficients {
    /// `sum_m |xi_ml|^2 - |chi_ml|^2` for every local mode.
    pub fn consistency(&self) -> Vec<f64> {
        (0..self.xi.ncols())
            .map(|l| (0..self.xi.nrows()).map(|m| self.xi[(m, l)].norm_sqr() - self.chi[(m, l)].norm_sqr()).sum())
            .collect()
    }
}

/// `int_0^s sin(w y) sin(k y) dy`, smooth through `w = k`.
pub fn sine_overlap(w: f64, k: f64, s: f64) -> f64 {
    0.5 * (s * sinc((w - k) * s) - ((w + k) * s).sin() / (w + k))
}

pub fn overlap_coefficients(
    geom: &CavityGeometry,
    spectrum: &WaveNumberSpectrum,
    side: Side,
    n_local: usize,
    dt: f64,
) -> OverlapCoefficients {
    let s = side_length(geom, side);
    let local: Vec<LocalizedMode> = (1..=n_local).map(|l| LocalizedMode::new(geom, side, l)).collect();
    let n = spectrum.len();
    let mut xi = DMatrix::zeros(n, n_local);
    let mut chi = DMatrix::zeros(n, n_local);
    for (m, &k) in spectrum.k.iter().enumerate() {
        let mode = ModeFunction::new(*geom, k);
        let amp = match side {
            Side::Left => mode.left,
            Side::Right => mode.right,
        };
        for (l, loc) in local.iter().enumerate() {
            let w = loc.frequency;
            let proj = (2.0 / s).sqrt() * amp * sine_overlap(w, k, s);
            let norm = 2.0 * (w * k).sqrt();
            xi[(m, l)] = C64::from_polar((w + k) / norm * proj, -(w - k) * dt);
            chi[(m, l)] = C64::from_polar(-(w - k) / norm * proj, -(w + k) * dt);
        }
    }
    OverlapCoefficients { side, xi, chi, local, dt }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{solve_spectrum, SolveOptions};

    #[test]
    fn overlap_is_continuous_at_coincidence() {
        let s = 0.7;
        let w = 3.0 * PI / s;
        let at = sine_overlap(w, w, s);
        assert!((at - 0.5 * s).abs() < 1e-12);
        for d in [1e-9, 1e-7, 1e-5] {
            assert!((sine_overlap(w, w + d, s) - at).abs() < 10.0 * d);
        }
    }

    #[test]
    fn local_projection_sums_to_one() {
        let g = CavityGeometry::unit(0.0, 0.0).unwrap();
        let s = solve_spectrum(&g, &SolveOptions::with_modes(200)).unwrap();
        for side in [Side::Left, Side::Right] {
            let ov = overlap_coefficients(&g, &s, side, 5, 0.0);
            for v in ov.consistency() {
                assert!((v - 1.0).abs() < 0.01, "{v}");
            }
        }
    }

    #[test]
    fn zero_delay_keeps_coefficients_real() {
        let g = CavityGeometry::unit(0.3, 0.5).unwrap();
        let s = solve_spectrum(&g, &SolveOptions::with_modes(20)).unwrap();
        let ov = overlap_coefficients(&g, &s, Side::Right, 4, 0.0);
        assert!(ov.xi.iter().chain(ov.chi.iter()).all(|c| c.im == 0.0));
        let delayed = overlap_coefficients(&g, &s, Side::Right, 4, 0.3);
        for (a, b) in ov.xi.iter().zip(delayed.xi.iter()) {
            assert!((a.norm() - b.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn perfect_mirror_maps_modes_onto_themselves() {
        let g = CavityGeometry::unit(0.3, 1e6).unwrap();
        let s = solve_spectrum(&g, &SolveOptions::with_modes(12)).unwrap();
        let ov = overlap_coefficients(&g, &s, Side::Left, 3, 0.0);
        for l in 0..3 {
            let best = (0..12).map(|m| ov.xi[(m, l)].norm()).fold(0.0, f64::max);
            assert!(best > 0.999);
        }
    }
}
