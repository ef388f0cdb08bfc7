use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::CavityGeometry;
use crate::modes::ModeFunction;
use crate::spectrum::{continue_spectrum, WaveNumberSpectrum};

/// First and second displacement-derivative couplings between modes.
///
/// `g[(n, l)] = L (d Phi_n, Phi_l)` and `h[(n, l)] = L^2 (d^2 Phi_n, Phi_l)`.
#[derive(Debug, Clone)]
pub struct CouplingMatrices {
    pub g: DMatrix<f64>,
    pub h: DMatrix<f64>,
    pub geometry: CavityGeometry,
    pub spectrum: WaveNumberSpectrum,
}

pub const DEFAULT_STEP: f64 = 2e-4;

pub fn coupling_matrices(geom: &CavityGeometry, spectrum: &WaveNumberSpectrum, n_modes: usize) -> Result<CouplingMatrices> {
    coupling_matrices_with_step(geom, spectrum, n_modes, DEFAULT_STEP * geom.length)
}

/// Modes of `spec`, with signs flipped to agree with `reference`.
pub fn aligned_modes(spec: &WaveNumberSpectrum, reference: &[ModeFunction]) -> Vec<ModeFunction> {
    spec.k
        .iter()
        .zip(reference)
        .map(|(&k, r)| {
            let m = ModeFunction::new(spec.geometry, k);
            if m.overlap_on(r, &r.geometry) < 0.0 {
                m.negated()
            } else {
                m
            }
        })
        .collect()
}

pub fn coupling_matrices_with_step(
    geom: &CavityGeometry,
    spectrum: &WaveNumberSpectrum,
    n_modes: usize,
    delta: f64,
) -> Result<CouplingMatrices> {
    if spectrum.len() < n_modes {
        return Err(Error::Dimension(format!("spectrum has {} modes, need {n_modes}", spectrum.len())));
    }
    let base = spectrum.truncated(n_modes);
    let reference: Vec<ModeFunction> = base.k.iter().map(|&k| ModeFunction::new(*geom, k)).collect();

    let mut shifted = Vec::with_capacity(4);
    for dir in [-1.0, 1.0] {
        let one = continue_spectrum(&base, &geom.with_dl(geom.dl + dir * delta))?;
        let two = continue_spectrum(&one, &geom.with_dl(geom.dl + 2.0 * dir * delta))?;
        let m1 = aligned_modes(&one, &reference);
        let m2 = aligned_modes(&two, &m1);
        shifted.push((dir, m1, m2));
    }

    let n = n_modes;
    let overlap = |modes: &[ModeFunction]| {
        DMatrix::from_fn(n, n, |a, b| modes[a].overlap_on(&reference[b], geom))
    };
    let m0 = overlap(&reference);
    let (mut mm1, mut mm2, mut mp1, mut mp2) = (m0.clone(), m0.clone(), m0.clone(), m0.clone());
    for (dir, m1, m2) in &shifted {
        if *dir < 0.0 {
            mm1 = overlap(m1);
            mm2 = overlap(m2);
        } else {
            mp1 = overlap(m1);
            mp2 = overlap(m2);
        }
    }
    let l = geom.length;
    let g = (&mm2 - &mm1 * 8.0 + &mp1 * 8.0 - &mp2) * (l / (12.0 * delta));
    let h = (-&mm2 + &mm1 * 16.0 - &m0 * 30.0 + &mp1 * 16.0 - &mp2) * (l * l / (12.0 * delta * delta));
    Ok(CouplingMatrices { g, h, geometry: *geom, spectrum: base })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{solve_spectrum, SolveOptions};

    fn setup(dl: f64, alpha: f64, n: usize) -> (CavityGeometry, WaveNumberSpectrum) {
        let g = CavityGeometry::unit(dl, alpha).unwrap();
        let s = solve_spectrum(&g, &SolveOptions::with_modes(n)).unwrap();
        (g, s)
    }

    #[test]
    fn g_is_antisymmetric() {
        let (geom, s) = setup(0.44, 0.5, 10);
        let c = coupling_matrices(&geom, &s, 10).unwrap();
        let scale = c.g.amax();
        for a in 0..10 {
            for b in 0..10 {
                assert!((c.g[(a, b)] + c.g[(b, a)]).abs() < 1e-6 * scale);
            }
        }
    }

    #[test]
    fn symmetric_cavity_has_no_diagonal() {
        let (geom, s) = setup(0.0, 0.5, 8);
        let c = coupling_matrices(&geom, &s, 8).unwrap();
        for a in 0..8 {
            assert!(c.g[(a, a)].abs() < 1e-6);
        }
    }

    #[test]
    fn transparent_shaker_coupling() {
        // at alpha = 0 the modes translate rigidly, so g follows from a
        // closed-form integral of cos(k_n y) sin(k_l y)
        let (geom, s) = setup(0.0, 0.0, 4);
        let c = coupling_matrices(&geom, &s, 4).unwrap();
        assert!((c.g[(1, 2)] - 2.4).abs() < 1e-6);
        assert!((c.g[(2, 1)] + 2.4).abs() < 1e-6);
        assert!(c.g[(0, 2)].abs() < 1e-6);
    }

    #[test]
    fn step_halving_consistency() {
        let (geom, s) = setup(0.44, 0.5, 6);
        let a = coupling_matrices_with_step(&geom, &s, 6, 2e-4).unwrap();
        let b = coupling_matrices_with_step(&geom, &s, 6, 1e-4).unwrap();
        let dg = (&a.g - &b.g).amax() / a.g.amax();
        let dh = (&a.h - &b.h).amax() / a.h.amax();
        assert!(dg < 1e-6, "{dg}");
        assert!(dh < 1e-4, "{dh}");
    }

    #[test]
    fn h_antisymmetric_part_is_derivative_of_g() {
        let (geom, s) = setup(0.3, 0.5, 6);
        let d = 2e-4;
        let c0 = coupling_matrices(&geom, &s, 6).unwrap();
        let sp = continue_spectrum(&s.truncated(6), &geom.with_dl(0.3 + d)).unwrap();
        let sm = continue_spectrum(&s.truncated(6), &geom.with_dl(0.3 - d)).unwrap();
        let cp = coupling_matrices(&sp.geometry, &sp, 6).unwrap();
        let cm = coupling_matrices(&sm.geometry, &sm, 6).unwrap();
        for a in 0..6 {
            for b in 0..6 {
                let dg = (cp.g[(a, b)] - cm.g[(a, b)]) / (2.0 * d);
                let anti = c0.h[(a, b)] - c0.h[(b, a)];
                assert!((anti - 2.0 * dg).abs() < 1e-3 * (1.0 + dg.abs()), "{a} {b} {anti} {dg}");
            }
        }
    }
}
