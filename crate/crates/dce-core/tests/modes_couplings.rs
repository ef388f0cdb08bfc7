use std::f64::consts::PI;

use dce_core::couplings::coupling_matrices;
use dce_core::modes::{inner_product, ModeFunction};
use dce_core::spectrum::{solve_spectrum, ModeLabel, SolveOptions};
use dce_core::CavityGeometry;

fn geom(dl: f64, alpha: f64) -> CavityGeometry {
    CavityGeometry::unit(dl, alpha).unwrap()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Weighted product with the wall term, by quadrature.
fn weighted(g: &CavityGeometry, f: impl Fn(f64) -> f64, h: impl Fn(f64) -> f64) -> f64 {
    let prod = |x: f64| f(x) * h(x);
    simpson(prod, -g.l1(), 0.0, 20_000) + simpson(prod, 0.0, g.l2(), 20_000) + g.alpha * f(0.0) * h(0.0)
}

fn modes(g: &CavityGeometry, n: usize) -> Vec<ModeFunction> {
    let s = solve_spectrum(g, &SolveOptions::with_modes(n)).unwrap();
    s.k.iter().map(|&k| ModeFunction::new(*g, k)).collect()
}

#[test]
fn orthonormal_over_a_parameter_grid() {
    for alpha in [0.1, 0.5, 3.0, 30.0, 125.0] {
        for dl in [-0.6, -0.2, 0.0, 0.3, 0.7] {
            let g = geom(dl, alpha);
            let u = modes(&g, 8);
            for n in 0..8 {
                for l in n..8 {
                    let q = weighted(&g, |x| u[n].eval(x).unwrap(), |x| u[l].eval(x).unwrap());
                    let target = if n == l { 1.0 } else { 0.0 };
                    assert!((q - target).abs() < 1e-8, "alpha {alpha} dl {dl} ({n},{l}): {q}");
                    assert!((inner_product(&u[n], &u[l]) - q).abs() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn parseval_for_a_smooth_profile() {
    let g = geom(0.3, 0.5);
    let (l1, l2) = (g.l1(), g.l2());
    let f = |x: f64| (x + l1) * (l2 - x);
    let norm = weighted(&g, f, f);
    let u = modes(&g, 50);
    let captured: f64 = u.iter().map(|m| weighted(&g, f, |x| m.eval(x).unwrap()).powi(2)).sum();
    assert!((captured - norm).abs() / norm < 1e-4, "{captured} vs {norm}");
}

#[test]
fn left_localized_mode_is_small_on_the_right() {
    let g = geom(0.44, 125.0);
    let s = solve_spectrum(&g, &SolveOptions::with_modes(6)).unwrap();
    let u = ModeFunction::new(g, s.k[s.find(ModeLabel::LeftLocalized(1)).unwrap()]);
    let peak = (0..=1000).map(|i| u.eval(-g.l1() * i as f64 / 1000.0).unwrap().abs()).fold(0.0, f64::max);
    let r = u.eval(0.5 * g.l2()).unwrap().abs() / peak;
    // leakage through the wall to first order in 1/alpha
    let (l1, l2) = (g.l1(), g.l2());
    let k = PI / l1 * (1.0 + 2.0 * l1 / (2.0 * g.alpha * PI * PI));
    let expect = ((k * l1).sin() / (k * l2).sin() * (0.5 * k * l2).sin()).abs();
    assert!((r - expect).abs() < 0.02 * expect, "{r} vs {expect}");
    assert!(r < 1.5e-3);
}

#[test]
fn first_coupling_matches_finite_differences_of_modes() {
    let g = geom(0.44, 0.5);
    let n = 6;
    let c = coupling_matrices(&g, &solve_spectrum(&g, &SolveOptions::with_modes(n)).unwrap(), n).unwrap();
    let h = 1e-5;
    let base = modes(&g, n);
    let up = modes(&g.with_dl(g.dl + h), n);
    let down = modes(&g.with_dl(g.dl - h), n);
    let scale = c.g.amax();
    for a in 0..n {
        let d = |x: f64| (up[a].eval_continued(x) - down[a].eval_continued(x)) / (2.0 * h);
        for b in 0..n {
            let q = g.length * weighted(&g, d, |x| base[b].eval(x).unwrap());
            assert!((q - c.g[(a, b)]).abs() < 1e-4 * scale, "g[{a},{b}] {q} vs {}", c.g[(a, b)]);
        }
    }
}
