use std::f64::consts::PI;

/// Chebyshev interpolant of a vector-valued function on `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct ChebyshevFit {
    lo: f64,
    hi: f64,
    coeffs: Vec<Vec<f64>>,
    width: usize,
}

impl ChebyshevFit {
    /// Interpolation nodes for `n` terms.
    pub fn nodes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|j| {
                let u = (PI * (j as f64 + 0.5) / n as f64).cos();
                0.5 * (lo + hi) + 0.5 * (hi - lo) * u
            })
            .collect()
    }

    /// Fit from samples taken at `nodes(lo, hi, samples.len())`.
    pub fn from_samples(lo: f64, hi: f64, samples: &[Vec<f64>]) -> Self {
        let n = samples.len();
        let width = samples[0].len();
        let mut coeffs = vec![vec![0.0; width]; n];
        for (i, c) in coeffs.iter_mut().enumerate() {
            for (j, s) in samples.iter().enumerate() {
                let t = (PI * i as f64 * (j as f64 + 0.5) / n as f64).cos();
                for (cc, v) in c.iter_mut().zip(s) {
                    *cc += 2.0 / n as f64 * t * v;
                }
            }
        }
        for c in coeffs[0].iter_mut() {
            *c *= 0.5;
        }
        Self { lo, hi, coeffs, width }
    }

    /// A fit that returns `value` everywhere.
    pub fn constant(value: Vec<f64>) -> Self {
        let width = value.len();
        Self { lo: 0.0, hi: 0.0, coeffs: vec![value], width }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        out.copy_from_slice(&self.coeffs[0]);
        if self.coeffs.len() == 1 {
            return;
        }
        let u = (2.0 * x - self.lo - self.hi) / (self.hi - self.lo);
        let (mut t0, mut t1) = (1.0, u);
        for (i, c) in self.coeffs.iter().enumerate().skip(1) {
            let t = if i == 1 {
                t1
            } else {
                let t2 = 2.0 * u * t1 - t0;
                t0 = t1;
                t1 = t2;
                t2
            };
            for (o, ci) in out.iter_mut().zip(c) {
                *o += ci * t;
            }
        }
    }

    pub fn eval(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.width];
        self.eval_into(x, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_smooth_functions() {
        let (lo, hi) = (0.4, 0.5);
        let nodes = ChebyshevFit::nodes(lo, hi, 10);
        let samples: Vec<Vec<f64>> = nodes.iter().map(|&x| vec![(3.0 * x).sin(), x * x]).collect();
        let fit = ChebyshevFit::from_samples(lo, hi, &samples);
        for i in 0..=20 {
            let x = lo + (hi - lo) * i as f64 / 20.0;
            let v = fit.eval(x);
            assert!((v[0] - (3.0 * x).sin()).abs() < 1e-13);
            assert!((v[1] - x * x).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_fit() {
        let f = ChebyshevFit::constant(vec![1.5, -2.0]);
        assert_eq!(f.eval(10.0), vec![1.5, -2.0]);
    }
}
