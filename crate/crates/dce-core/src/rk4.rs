/// Classic fourth-order Runge-Kutta step for `y' = f(t, y)` on a flat state.
pub struct Rk4<T> {
    k: [Vec<T>; 4],
    tmp: Vec<T>,
}

pub trait Field: Copy + std::ops::Add<Output = Self> + std::ops::Mul<f64, Output = Self> + Default {}

impl<T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default> Field for T {}

impl<T: Field> Rk4<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            k: [vec![T::default(); dim], vec![T::default(); dim], vec![T::default(); dim], vec![T::default(); dim]],
            tmp: vec![T::default(); dim],
        }
    }

    pub fn step<F>(&mut self, t: f64, h: f64, y: &mut [T], mut f: F)
    where
        F: FnMut(f64, &[T], &mut [T]),
    {
        let [k1, k2, k3, k4] = &mut self.k;
        f(t, y, k1);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + k1[i] * (0.5 * h);
        }
        f(t + 0.5 * h, &self.tmp, k2);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + k2[i] * (0.5 * h);
        }
        f(t + 0.5 * h, &self.tmp, k3);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + k3[i] * h;
        }
        f(t + h, &self.tmp, k4);
        for i in 0..y.len() {
            y[i] = y[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
    }
}
