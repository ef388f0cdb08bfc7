//! Superconducting-circuit realisation of the cavity.
//!
//! A transmission line terminated by two SQUIDs with a third one in the
//! middle behaves like the double cavity: the middle SQUID capacitance
//! plays the wall susceptibility, its Josephson energy the wall potential,
//! and flux through the outer pair moves both effective end walls in phase.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::WallTrajectory;
use crate::error::{Error, Result};
use crate::geometry::CavityGeometry;

/// Fine-structure constant.
pub const FINE_STRUCTURE: f64 = 7.297_352_5693e-3;

/// `(2e)^2` in natural Heaviside-Lorentz units, `16 pi alpha_fs`.
pub const PAIR_CHARGE_SQUARED: f64 = 16.0 * PI * FINE_STRUCTURE;

/// Below this value of `e^2 E_J / (v_w^2 c_a)` the outer SQUIDs are only
/// loosely Dirichlet; below 1 the mapping is refused.
pub const DIRICHLET_WARN: f64 = 100.0;

/// Harmonic flux `f(t) = bias + amplitude sin(frequency t)` for
/// `0 <= t <= duration`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxDrive {
    pub bias: f64,
    pub amplitude: f64,
    pub frequency: f64,
    pub duration: f64,
}

impl FluxDrive {
    pub fn constant(bias: f64) -> Self {
        Self { bias, amplitude: 0.0, frequency: 0.0, duration: 0.0 }
    }

    pub fn at(&self, t: f64) -> f64 {
        self.bias + self.amplitude * (self.frequency * t).sin()
    }
}

/// Circuit description. Lengths are in units of the cavity length, so
/// `length` is normally 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    /// Capacitance per unit length.
    pub c_a: f64,
    /// Inductance per unit length.
    pub l_ind: f64,
    pub c_j0: f64,
    pub e_j0: f64,
    /// Josephson energy of each outer SQUID.
    pub e_j_outer: f64,
    pub flux_center: f64,
    pub flux_outer: FluxDrive,
    pub length: f64,
    /// Position offset of the middle SQUID before the outer-SQUID shift.
    pub offset: f64,
}

impl CircuitParams {
    pub fn wave_speed(&self) -> f64 {
        1.0 / (self.l_ind * self.c_a).sqrt()
    }

    fn scale(&self) -> f64 {
        let v = self.wave_speed();
        v * v * self.c_a
    }

    pub fn dirichlet_ratio(&self) -> f64 {
        0.25 * PAIR_CHARGE_SQUARED * self.e_j_outer / self.scale()
    }

    /// `E_J'` at flux `f`.
    pub fn outer_stiffness(&self, f: f64) -> f64 {
        PAIR_CHARGE_SQUARED * 2.0 * self.e_j_outer * f.cos() / self.scale()
    }

    pub fn susceptibility(&self) -> f64 {
        self.c_j0 / self.scale()
    }

    pub fn wall_potential(&self) -> f64 {
        PAIR_CHARGE_SQUARED * 2.0 * self.e_j0 * self.flux_center.cos() / self.scale()
    }

    /// Exact wall offset produced by the outer flux at time `t`.
    pub fn delta_l(&self, t: f64) -> f64 {
        let f = if (0.0..=self.flux_outer.duration).contains(&t) { self.flux_outer.at(t) } else { self.flux_outer.bias };
        self.offset - 2.0 / self.outer_stiffness(f)
    }

    fn validate(&self) -> Result<()> {
        let positive = [("c_a", self.c_a), ("l_ind", self.l_ind), ("length", self.length), ("e_j_outer", self.e_j_outer)];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::OutOfRange(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.c_j0 >= 0.0) || !(self.e_j0 >= 0.0) {
            return Err(Error::OutOfRange("central SQUID parameters must be >= 0".into()));
        }
        Ok(())
    }
}

/// Result of mapping a circuit onto the cavity.
#[derive(Debug, Clone, Serialize)]
pub struct CavityMapping {
    pub geometry: CavityGeometry,
    pub trajectory: WallTrajectory,
    /// RMS of the exact offset minus the fitted harmonic template, over the
    /// template amplitude (zero for an undriven circuit).
    pub fit_residual: f64,
    pub dirichlet_ratio: f64,
    pub warnings: Vec<String>,
}

/// RMS difference over one drive period between the exact offset and the
/// linearised harmonic template, relative to the template amplitude.
fn drive_fit_residual(cp: &CircuitParams, l0: f64, amp: f64) -> f64 {
    let drive = cp.flux_outer;
    if amp == 0.0 || drive.frequency == 0.0 {
        return 0.0;
    }
    let n = 256;
    let period = 2.0 * PI / drive.frequency.abs();
    let mut sq = 0.0;
    for i in 0..n {
        let t = period * i as f64 / n as f64;
        let exact = cp.offset - 2.0 / cp.outer_stiffness(drive.at(t));
        let model = l0 + amp * (drive.frequency * t).sin();
        sq += (exact - model).powi(2);
    }
    (sq / n as f64).sqrt() / amp.abs()
}

pub fn circuit_to_cavity(cp: &CircuitParams) -> Result<CavityMapping> {
    cp.validate()?;
    let ratio = cp.dirichlet_ratio();
    if ratio <= 1.0 {
        return Err(Error::DirichletApproxInvalid(ratio));
    }
    let mut warnings = Vec::new();
    if ratio < DIRICHLET_WARN {
        warnings.push(format!("outer SQUID ratio {ratio:.3} is below {DIRICHLET_WARN}"));
    }
    let drive = cp.flux_outer;
    let stiff = cp.outer_stiffness(drive.bias);
    if !(stiff > 0.0) {
        return Err(Error::OutOfRange(format!("outer flux bias {} gives a non-positive Josephson stiffness", drive.bias)));
    }
    if 1.0 / stiff > 0.1 * cp.length {
        warnings.push(format!("wall shift 1/E_J' = {:.3e} is not small against the length", 1.0 / stiff));
    }
    let l0 = cp.offset - 2.0 / stiff;
    let amp = -2.0 * drive.amplitude * drive.bias.tan() / stiff;
    let geometry = CavityGeometry::new(cp.length, l0, cp.susceptibility(), cp.wall_potential())?;
    let trajectory = WallTrajectory { l0, epsilon: amp / cp.length, omega: drive.frequency, t_f: drive.duration };
    let fit_residual = drive_fit_residual(cp, l0, amp);
    if fit_residual > 0.01 {
        return Err(Error::PoorDriveFit(fit_residual));
    }
    Ok(CavityMapping { geometry, trajectory, fit_residual, dirichlet_ratio: ratio, warnings })
}

/// Circuit that reproduces `geom` and `traj`. Line constants, length,
/// middle offset and both Josephson energies come from `reference`; the
/// fluxes and the middle capacitance are solved for.
pub fn cavity_to_circuit(geom: &CavityGeometry, traj: &WallTrajectory, reference: &CircuitParams) -> Result<CircuitParams> {
    reference.validate()?;
    let mut cp = CircuitParams { length: geom.length, ..*reference };
    let scale = cp.scale();
    cp.c_j0 = geom.alpha * scale;
    cp.flux_center = if geom.v == 0.0 {
        if cp.e_j0 == 0.0 { 0.0 } else { 0.5 * PI }
    } else {
        let c = geom.v * scale / (PAIR_CHARGE_SQUARED * 2.0 * cp.e_j0);
        if !(c.abs() <= 1.0) {
            return Err(Error::OutOfRange(format!("wall potential needs cos(f0) = {c}")));
        }
        c.acos()
    };
    let shift = cp.offset - traj.l0;
    let full = PAIR_CHARGE_SQUARED * 2.0 * cp.e_j_outer / scale;
    let c = 2.0 / (full * shift);
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::OutOfRange(format!("rest offset needs cos(f) = {c}")));
    }
    let bias = c.acos();
    let amp = traj.epsilon * geom.length;
    let amplitude = if amp == 0.0 {
        0.0
    } else {
        let t = bias.tan();
        if t == 0.0 {
            return Err(Error::OutOfRange("a driven offset needs a nonzero flux bias".into()));
        }
        -amp * full * c / (2.0 * t)
    };
    cp.flux_outer = FluxDrive { bias, amplitude, frequency: traj.omega, duration: traj.t_f };
    Ok(cp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn reference() -> CircuitParams {
        CircuitParams {
            c_a: 1.0,
            l_ind: 1.0,
            c_j0: 0.5,
            e_j0: 0.0,
            e_j_outer: 2000.0,
            flux_center: 0.0,
            flux_outer: FluxDrive::constant(0.3),
            length: 1.0,
            offset: 0.5,
        }
    }

    #[test]
    fn constant_flux_gives_static_offset() {
        let cp = reference();
        let m = circuit_to_cavity(&cp).unwrap();
        assert_eq!(m.trajectory.epsilon, 0.0);
        let expect = cp.offset - 2.0 / cp.outer_stiffness(0.3);
        assert_eq!(m.geometry.dl, expect);
        assert_eq!(m.fit_residual, 0.0);
        assert!(m.warnings.is_empty());
    }

    #[test]
    fn no_central_capacitance_is_transparent() {
        let cp = CircuitParams { c_j0: 0.0, ..reference() };
        assert_eq!(circuit_to_cavity(&cp).unwrap().geometry.alpha, 0.0);
        let g = CavityGeometry::unit(0.3, 0.0).unwrap();
        let traj = WallTrajectory { l0: 0.3, epsilon: 0.0, omega: 0.0, t_f: 0.0 };
        assert_eq!(cavity_to_circuit(&g, &traj, &reference()).unwrap().c_j0, 0.0);
    }

    #[test]
    fn analogy_pairings_are_exact() {
        let cp = CircuitParams { c_a: 2.0, l_ind: 0.125, c_j0: 0.7, e_j0: 3.0, flux_center: 0.4, ..reference() };
        let m = circuit_to_cavity(&cp).unwrap();
        let vw2 = 1.0 / (cp.l_ind * cp.c_a);
        assert_eq!(m.geometry.alpha, cp.c_j0 / (vw2 * cp.c_a));
        let v = PAIR_CHARGE_SQUARED * 2.0 * cp.e_j0 * cp.flux_center.cos() / (vw2 * cp.c_a);
        assert!((m.geometry.v - v).abs() <= 1e-15 * v);
    }

    #[test]
    fn weak_outer_squids_are_refused() {
        let cp = CircuitParams { e_j_outer: 1.0, ..reference() };
        assert!(matches!(circuit_to_cavity(&cp), Err(Error::DirichletApproxInvalid(_))));
        let cp = CircuitParams { e_j_outer: 300.0, ..reference() };
        let m = circuit_to_cavity(&cp).unwrap();
        assert_eq!(m.warnings.len(), 1);
    }

    #[test]
    fn large_flux_swing_fails_the_fit() {
        let drive = FluxDrive { bias: 1.2, amplitude: 0.3, frequency: 3.0, duration: 10.0 };
        let cp = CircuitParams { flux_outer: drive, ..reference() };
        assert!(matches!(circuit_to_cavity(&cp), Err(Error::PoorDriveFit(_))));
    }

    #[test]
    fn small_flux_swing_maps_to_harmonic_motion() {
        let drive = FluxDrive { bias: 0.6, amplitude: 2e-4, frequency: 7.0, duration: 50.0 };
        let cp = CircuitParams { flux_outer: drive, ..reference() };
        let m = circuit_to_cavity(&cp).unwrap();
        assert!(m.fit_residual < 1e-3);
        for t in [0.1, 0.77, 3.4] {
            let exact = cp.delta_l(t);
            let lin = m.trajectory.delta_l(cp.length, t);
            assert!((exact - lin).abs() < 2e-3 * (m.trajectory.epsilon * cp.length).abs());
        }
    }

    #[test]
    fn unreachable_offset_is_out_of_range() {
        let g = CavityGeometry::unit(0.6, 1.0).unwrap();
        let traj = WallTrajectory { l0: 0.6, epsilon: 0.0, omega: 0.0, t_f: 0.0 };
        assert!(matches!(cavity_to_circuit(&g, &traj, &reference()), Err(Error::OutOfRange(_))));
    }

    proptest! {
        #[test]
        fn round_trip_reproduces_cavity(alpha in 0.0f64..130.0, v in 0.0f64..0.5, l0 in -0.5f64..0.45,
                                        eps in -3e-3f64..3e-3, omega in 0.1f64..20.0, tf in 0.0f64..500.0) {
            let geom = CavityGeometry::new(1.0, l0, alpha, v).unwrap();
            let traj = WallTrajectory { l0, epsilon: eps, omega, t_f: tf };
            let reference = CircuitParams { e_j0: 5.0, e_j_outer: 5000.0, offset: 1.5, ..reference() };
            let cp = cavity_to_circuit(&geom, &traj, &reference).unwrap();
            let back = circuit_to_cavity(&cp).unwrap();
            prop_assert!((back.geometry.alpha - alpha).abs() <= 1e-12 * (1.0 + alpha));
            prop_assert!((back.geometry.v - v).abs() <= 1e-12);
            prop_assert!((back.geometry.dl - l0).abs() <= 1e-12);
            prop_assert!((back.trajectory.epsilon - eps).abs() <= 1e-12);
            prop_assert_eq!(back.trajectory.omega, omega);
            prop_assert_eq!(back.trajectory.t_f, tf);
        }
    }
}
