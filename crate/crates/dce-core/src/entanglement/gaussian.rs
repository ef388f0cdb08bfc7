use nalgebra::{DMatrix, Matrix2, Matrix4};

use crate::error::{Error, Result};
use crate::C64;

/// Zero-mean Gaussian state in `(q0, p0, q1, p1, ...)` ordering.
#[derive(Debug, Clone)]
pub struct GaussianState {
    pub v: DMatrix<f64>,
}

impl GaussianState {
    pub fn vacuum(n: usize) -> Self {
        Self { v: DMatrix::identity(2 * n, 2 * n) * 0.5 }
    }

    pub fn modes(&self) -> usize {
        self.v.nrows() / 2
    }

    /// Covariance of `a_j = sum_m (u_jm a_m + w_jm a_m^dag)` acting on a
    /// thermal-diagonal input with occupations `n0`.
    pub fn from_linear_map(u: &DMatrix<C64>, w: &DMatrix<C64>, n0: &[f64]) -> Self {
        let (n, cols) = (u.nrows(), u.ncols());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut c = DMatrix::<C64>::zeros(2 * n, cols);
        for j in 0..n {
            for m in 0..cols {
                let (a, b) = (u[(j, m)], w[(j, m)].conj());
                let weight = (2.0 * n0.get(m).copied().unwrap_or(0.0) + 1.0).sqrt();
                c[(2 * j, m)] = (a + b) * s * weight;
                c[(2 * j + 1, m)] = (a - b) * C64::new(0.0, -s) * weight;
            }
        }
        let v = (&c * c.adjoint()).map(|z| z.re);
        Self { v: (&v + v.transpose()) * 0.5 }
    }

    pub fn block(&self, j: usize, k: usize) -> Matrix4<f64> {
        let idx = [2 * j, 2 * j + 1, 2 * k, 2 * k + 1];
        Matrix4::from_fn(|a, b| self.v[(idx[a], idx[b])])
    }

    pub fn check_physical(&self) -> Result<()> {
        self.check_physical_within(1e-6)
    }

    pub fn check_physical_within(&self, tol: f64) -> Result<()> {
        let nu = symplectic_eigenvalues(&self.v);
        let min = nu.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < 0.5 - tol {
            return Err(Error::PhysicalityViolation(min));
        }
        Ok(())
    }
}

/// Symplectic spectrum of a positive-definite covariance, ascending and
/// each value listed once.
pub fn symplectic_eigenvalues(v: &DMatrix<f64>) -> Vec<f64> {
    let n = v.nrows() / 2;
    let eig = v.clone().symmetric_eigen();
    let root = &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(|x| x.max(0.0).sqrt())) * eig.eigenvectors.transpose();
    let mut omega = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        omega[(2 * i, 2 * i + 1)] = 1.0;
        omega[(2 * i + 1, 2 * i)] = -1.0;
    }
    let m = &root * omega * &root;
    let sq = -(&m * &m);
    let sq = (&sq + sq.transpose()) * 0.5;
    let mut vals: Vec<f64> = sq.symmetric_eigenvalues().iter().map(|x| x.max(0.0).sqrt()).collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals.chunks(2).map(|p| 0.5 * (p[0] + p[p.len() - 1])).collect()
}

/// `max(0, -ln(2 nu))` with `nu` the smaller partially transposed symplectic
/// eigenvalue of the two-mode block.
pub fn log_negativity(state: &GaussianState, j: usize, k: usize) -> Result<f64> {
    block_log_negativity(&state.block(j, k))
}

pub fn block_log_negativity(b: &Matrix4<f64>) -> Result<f64> {
    let vj: Matrix2<f64> = b.fixed_view::<2, 2>(0, 0).into();
    let vk: Matrix2<f64> = b.fixed_view::<2, 2>(2, 2).into();
    let c: Matrix2<f64> = b.fixed_view::<2, 2>(0, 2).into();
    let sigma = vj.determinant() + vk.determinant() - 2.0 * c.determinant();
    let det = b.determinant();
    let disc = sigma * sigma - 4.0 * det;
    let scale = sigma * sigma;
    if disc < -1e-9 * scale.max(1.0) {
        return Err(Error::NonPositiveDiscriminant(disc));
    }
    let nu2 = 0.5 * sigma - 0.5 * disc.max(0.0).sqrt();
    let nu = nu2.max(0.0).sqrt();
    Ok((-(2.0 * nu).ln()).max(0.0))
}

/// Two-mode squeezed vacuum with squeezing `r`.
pub fn two_mode_squeezed(r: f64) -> GaussianState {
    let (c, s) = ((2.0 * r).cosh() * 0.5, (2.0 * r).sinh() * 0.5);
    let mut v = DMatrix::zeros(4, 4);
    for i in 0..4 {
        v[(i, i)] = c;
    }
    v[(0, 2)] = s;
    v[(2, 0)] = s;
    v[(1, 3)] = -s;
    v[(3, 1)] = -s;
    GaussianState { v }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Smallest symplectic eigenvalue of the partial transpose from the
    /// eigenvalues of `Omega V~`.
    fn brute_force_nu(v: &Matrix4<f64>) -> f64 {
        let t = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0));
        let vt = t * v * t;
        let mut omega = Matrix4::zeros();
        omega[(0, 1)] = 1.0;
        omega[(1, 0)] = -1.0;
        omega[(2, 3)] = 1.0;
        omega[(3, 2)] = -1.0;
        (omega * vt).complex_eigenvalues().iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn vacuum_has_no_negativity() {
        let s = GaussianState::vacuum(3);
        assert_eq!(log_negativity(&s, 0, 2).unwrap(), 0.0);
        let nu = symplectic_eigenvalues(&s.v);
        assert!(nu.iter().all(|x| (x - 0.5).abs() < 1e-14));
    }

    #[test]
    fn squeezed_pair_matches_closed_form_and_brute_force() {
        for r in [0.0, 0.1, 0.5, 1.0] {
            let s = two_mode_squeezed(r);
            let n = log_negativity(&s, 0, 1).unwrap();
            assert!((n - 2.0 * r).abs() < 1e-9);
            let nu = brute_force_nu(&s.block(0, 1));
            assert!(((-(2.0 * nu).ln()).max(0.0) - n).abs() < 1e-9);
        }
    }

    #[test]
    fn linear_map_identity_gives_vacuum() {
        let u = DMatrix::<C64>::identity(3, 3);
        let w = DMatrix::<C64>::zeros(3, 3);
        let s = GaussianState::from_linear_map(&u, &w, &[0.0; 3]);
        assert!((s.v.clone() - DMatrix::identity(6, 6) * 0.5).amax() < 1e-15);
        let hot = GaussianState::from_linear_map(&u, &w, &[2.0, 0.0, 0.0]);
        assert!((hot.v[(0, 0)] - 2.5).abs() < 1e-14);
    }

    #[test]
    fn squeezing_map_builds_textbook_covariance() {
        let r: f64 = 0.4;
        let u = DMatrix::from_diagonal_element(2, 2, C64::new(r.cosh(), 0.0));
        let w = DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(r.sinh(), 0.0), C64::new(r.sinh(), 0.0), C64::new(0.0, 0.0)]);
        let s = GaussianState::from_linear_map(&u, &w, &[0.0, 0.0]);
        assert!((s.v.clone() - two_mode_squeezed(r).v).amax() < 1e-14);
        s.check_physical().unwrap();
    }

    #[test]
    fn unphysical_state_is_rejected() {
        let s = GaussianState { v: DMatrix::identity(2, 2) * 0.3 };
        assert!(matches!(s.check_physical(), Err(Error::PhysicalityViolation(_))));
    }

    fn rotation(theta: f64, sq: f64) -> Matrix2<f64> {
        let (c, s) = (theta.cos(), theta.sin());
        Matrix2::new(c, -s, s, c) * Matrix2::new(sq, 0.0, 0.0, 1.0 / sq)
    }

    proptest! {
        #[test]
        fn invariant_under_local_symplectic_maps(r in 0.0f64..1.5, a in -3.0f64..3.0, b in -3.0f64..3.0, sa in 0.5f64..2.0, sb in 0.5f64..2.0) {
            let base = two_mode_squeezed(r).block(0, 1);
            let mut t = Matrix4::zeros();
            t.fixed_view_mut::<2, 2>(0, 0).copy_from(&rotation(a, sa));
            t.fixed_view_mut::<2, 2>(2, 2).copy_from(&rotation(b, sb));
            let moved = t * base * t.transpose();
            let n0 = block_log_negativity(&base).unwrap();
            let n1 = block_log_negativity(&moved).unwrap();
            prop_assert!((n0 - n1).abs() < 1e-8);
            let swapped = Matrix4::from_fn(|i, j| {
                let p = [1, 0, 3, 2];
                base[(p[i], p[j])]
            });
            prop_assert!((block_log_negativity(&swapped).unwrap() - n0).abs() < 1e-9);
        }

        #[test]
        fn random_states_agree_with_brute_force(r in 0.0f64..1.2, a in -3.0f64..3.0, nth in 0.0f64..2.0) {
            let mut base = two_mode_squeezed(r).block(0, 1);
            for i in 0..4 {
                base[(i, i)] += nth;
            }
            let mut t = Matrix4::zeros();
            t.fixed_view_mut::<2, 2>(0, 0).copy_from(&rotation(a, 1.3));
            t.fixed_view_mut::<2, 2>(2, 2).copy_from(&rotation(-a, 0.8));
            let v = t * base * t.transpose();
            let n = block_log_negativity(&v).unwrap();
            let nu = brute_force_nu(&v);
            prop_assert!(((-(2.0 * nu).ln()).max(0.0) - n).abs() < 1e-8);
        }
    }
}
