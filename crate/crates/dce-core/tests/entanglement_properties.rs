use dce_core::entanglement::*;
use dce_core::spectrum::{solve_spectrum, Side, SolveOptions};
use dce_core::CavityGeometry;

fn geom(dl: f64, alpha: f64) -> CavityGeometry {
    CavityGeometry::unit(dl, alpha).unwrap()
}

fn opts(n_local: usize, n_global: usize) -> EntanglementOptions {
    EntanglementOptions { n_local, n_global, ..Default::default() }
}

#[test]
fn static_map_is_stable_when_global_modes_double() {
    for l0 in [0.0, 0.6] {
        let g = geom(l0, 0.0);
        let loose = |n| EntanglementOptions { physicality_tol: 1e-3, ..opts(20, n) };
        let a = protocol_static(&g, &loose(200)).unwrap();
        let b = protocol_static(&g, &loose(400)).unwrap();
        for n in 1..=20 {
            for m in 1..=20 {
                let (x, y) = (a.get(n, m), b.get(n, m));
                assert!((x - y).abs() < 0.02 * b.max(), "l0 {l0} ({n},{m}): {x} vs {y}");
            }
        }
    }
}

#[test]
fn static_map_decays_along_anti_diagonals() {
    let m = protocol_static(&geom(0.0, 0.0), &opts(12, 2000)).unwrap();
    for n in 1..=12 {
        for k in 1..=12 {
            assert!((m.get(n, k) - m.get(k, n)).abs() < 1e-10);
        }
    }
    for sum in 3..=20usize {
        let line: Vec<f64> = (1..sum).filter(|&n| n <= 10 && sum - n <= 10 && 2 * n <= sum).map(|n| m.get(n, sum - n)).collect();
        // ordered from the far end of the line in towards the diagonal
        assert!(line.windows(2).all(|p| p[0] <= p[1] + 1e-12), "n + m = {sum}: {line:?}");
    }
    assert_eq!(m.max(), m.get(1, 1));
}

#[test]
fn weak_barrier_lowers_the_symmetric_maximum() {
    let mut last = f64::INFINITY;
    for alpha in [0.0, 0.03, 0.1, 0.3] {
        let m = protocol_static(&geom(0.0, alpha), &opts(8, 2000)).unwrap();
        assert_eq!(m.max(), m.get(1, 1));
        assert!(m.get(1, 1) < last);
        last = m.get(1, 1);
        for n in 1..=8 {
            for k in 1..=8 {
                assert!((m.get(n, k) - m.get(k, n)).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn sudden_barrier_photons_converge_with_global_modes() {
    let g = geom(0.0, 0.0);
    let count = |n| {
        let s = solve_spectrum(&g, &SolveOptions::with_modes(n)).unwrap();
        let l = overlap_coefficients(&g, &s, Side::Left, 6, 0.0);
        let r = overlap_coefficients(&g, &s, Side::Right, 6, 0.0);
        sudden_wall_photons(&l, &r, &[])
    };
    let (a, b) = (count(200), count(400));
    for (x, y) in a.left.iter().zip(&b.left) {
        assert!((x - y).abs() < 0.01 * y, "{x} vs {y}");
    }
    assert!(b.left.iter().zip(&b.right).all(|(x, y)| (x - y).abs() < 1e-10 * x));
    assert!(b.left.windows(2).all(|p| p[1] < p[0]));
}

#[test]
fn symmetric_transparent_cavity_overlaps_by_parity() {
    let g = geom(0.0, 0.0);
    let s = solve_spectrum(&g, &SolveOptions::with_modes(200)).unwrap();
    let l = overlap_coefficients(&g, &s, Side::Left, 5, 0.0);
    let r = overlap_coefficients(&g, &s, Side::Right, 5, 0.0);
    for m in 0..200 {
        for j in 0..5 {
            assert!((l.xi[(m, j)].norm() - r.xi[(m, j)].norm()).abs() < 1e-12);
            assert!((l.chi[(m, j)].norm() - r.chi[(m, j)].norm()).abs() < 1e-12);
        }
    }
    for sum in l.consistency().iter().chain(&r.consistency()) {
        assert!((sum - 1.0).abs() < 0.01, "{sum}");
    }
}
