use dce_core::dynamics::*;
use dce_core::msa::*;
use dce_core::spectrum::{solve_spectrum, ModeLabel, SolveOptions};
use dce_core::CavityGeometry;

const EPS: f64 = 3e-3;

fn geom(dl: f64, alpha: f64) -> CavityGeometry {
    CavityGeometry::unit(dl, alpha).unwrap()
}

fn grid(step: f64, end: f64) -> Vec<f64> {
    (1..=(end / step).round() as usize).map(|i| i as f64 * step).collect()
}

fn exact(setup: &Setup, omega: f64, epsilon: f64, t: &[f64], n0: &[f64]) -> PhotonSeries {
    let traj = WallTrajectory { l0: setup.geometry.dl, epsilon, omega, t_f: *t.last().unwrap() };
    let cfg = DynamicsConfig { n_modes: setup.spectrum.len(), ..Default::default() };
    photon_number_series_with(setup, &traj, &OccupationVector::new(n0.to_vec()).unwrap(), t, &cfg).unwrap()
}

#[test]
fn reversing_the_drive_sign_keeps_photon_numbers() {
    let setup = Setup::new(&geom(0.44, 0.5), 8).unwrap();
    let w = 2.0 * setup.spectrum.k[1];
    let t = grid(40.0, 200.0);
    let plus = exact(&setup, w, EPS, &t, &[0.0; 8]);
    let minus = exact(&setup, w, -EPS, &t, &[0.0; 8]);
    for (a, b) in plus.n.iter().zip(&minus.n) {
        assert!((a[1] - b[1]).abs() < 0.01 * a[1], "{} vs {}", a[1], b[1]);
    }
}

#[test]
fn slow_amplitudes_follow_the_exact_dynamics() {
    let setup = Setup::new(&geom(0.44, 0.5), 8).unwrap();
    let w = 2.0 * setup.spectrum.k[1];
    let t = grid(40.0, 200.0);
    let full = exact(&setup, w, EPS, &t, &[0.0; 8]);
    let slow = evolve_msa(&setup.couplings, w, EPS, &t, &MsaOptions::default()).unwrap();
    let approx = slow.photon_numbers(&OccupationVector::vacuum(8)).unwrap();
    for (a, b) in full.n.iter().zip(&approx) {
        assert!((a[1] - b[1]).abs() < 0.05 * a[1], "{} vs {}", a[1], b[1]);
    }
}

#[test]
fn conducting_wall_drive_finds_the_left_ladder() {
    let s = solve_spectrum(&geom(0.44, 125.0), &SolveOptions::with_modes(15)).unwrap();
    let w = 2.0 * s.k[1];
    let found: Vec<ConditionKind> = detect_conditions(&s, w, EPS * w).iter().map(|c| c.kind).collect();
    assert!(found.contains(&ConditionKind::SingleMode(1)));
    let mut rungs = 0;
    for kind in &found {
        match *kind {
            ConditionKind::SingleMode(m) => assert_eq!(m, 1),
            ConditionKind::Difference(lo, hi) => {
                let (ModeLabel::LeftLocalized(a), ModeLabel::LeftLocalized(b)) = (s.labels[lo], s.labels[hi]) else {
                    panic!("{} and {} are not both left modes", s.labels[lo], s.labels[hi]);
                };
                assert_eq!(b, a + 2);
                rungs += 1;
            }
            ConditionKind::Sum(..) => panic!("unexpected {kind:?}"),
        }
    }
    assert!(rungs >= 3, "{found:?}");
    assert!(detect_conditions(&s, 0.37 * s.k[1], EPS * s.k[1]).is_empty());
}

#[test]
fn transparent_shaker_has_a_pair_channel() {
    let s = solve_spectrum(&geom(0.2, 0.0), &SolveOptions::with_modes(10)).unwrap();
    let w = s.k[1] + s.k[2];
    let found: Vec<ConditionKind> = detect_conditions(&s, w, EPS * w).iter().map(|c| c.kind).collect();
    assert!(found.contains(&ConditionKind::Sum(1, 2)));
    assert!(found.contains(&ConditionKind::Difference(0, 5)));
}

#[test]
fn pair_creation_alone_matches_its_closed_form() {
    let setup = Setup::new(&geom(0.2, 0.0), 6).unwrap();
    let k = &setup.spectrum.k;
    let w = k[1] + k[2];
    let only = ResonanceCondition { kind: ConditionKind::Sum(1, 2), target: w, detuning: 0.0 };
    let t = grid(50.0, 500.0);
    let slow = evolve_msa(&setup.couplings, w, EPS, &t, &MsaOptions { conditions: Some(vec![only]), ..Default::default() }).unwrap();
    let n = slow.photon_numbers(&OccupationVector::vacuum(6)).unwrap();
    for (i, &tf) in t.iter().enumerate() {
        let expect = closed_form_sum(&setup.couplings, 1, 2, EPS, tf);
        assert!(expect > 0.0);
        assert!((n[i][1] - expect).abs() < 1e-3 * expect, "{} vs {expect}", n[i][1]);
        assert!((n[i][1] - n[i][2]).abs() < 1e-9 * expect);
        for &col in &slow.column_norms(i) {
            assert!((col - 1.0).abs() < 1e-6, "{col}");
        }
    }
}

#[test]
fn exchange_alone_conserves_photons() {
    let setup = Setup::new(&geom(0.04, 0.5), 6).unwrap();
    let k = &setup.spectrum.k;
    let w = k[2] - k[1];
    let only = ResonanceCondition { kind: ConditionKind::Difference(1, 2), target: w, detuning: 0.0 };
    let t = grid(500.0, 20000.0);
    let slow = evolve_msa(&setup.couplings, w, EPS, &t, &MsaOptions { conditions: Some(vec![only]), ..Default::default() }).unwrap();
    let mut n0 = vec![0.0; 6];
    n0[1] = 50.0;
    for n in slow.photon_numbers(&OccupationVector::new(n0).unwrap()).unwrap() {
        assert!((n.iter().sum::<f64>() - 50.0).abs() < 1e-8);
    }
}

#[test]
fn truncation_warning_needs_photons_at_the_cut() {
    let strong = solve_spectrum(&geom(0.44, 125.0), &SolveOptions::with_modes(20)).unwrap();
    let w = 2.0 * strong.k[1];
    let kept = 8;
    assert!(truncation_warning(&strong, kept, w, EPS * w, &[1.0; 20]));
    assert!(!truncation_warning(&strong, kept, w, EPS * w, &[0.0; 20]));
    let weak = solve_spectrum(&geom(0.44, 0.5), &SolveOptions::with_modes(20)).unwrap();
    let w = 2.0 * weak.k[1];
    assert!(!truncation_warning(&weak, kept, w, EPS * w, &[1.0; 20]));
}
