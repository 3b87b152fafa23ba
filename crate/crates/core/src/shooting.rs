//! Shooting oracle for the positive eigenvalue of `𝓛`, independent of the
//! dense eigensolve.
//!
//! An eigenfunction with `𝓛y = e y` solves the third-order ODE
//! `y''' = y' + e y - p (Q^{p-1} y)'`. Far from the soliton the solutions
//! behave like `e^{σx}` with `σ³ - σ = e`. Decay at `-∞` selects the single
//! root `σ₃ > 0`; decay at `+∞` selects the two-dimensional span of the
//! roots with negative real part. An eigenvalue is a value of `e` at which
//! the two families meet, detected by the 3×3 determinant at the matching
//! point.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::linop::cubic_roots;
use crate::profiles::SolitonContext;

type State = [f64; 3];

/// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive integration of `y' = f(x, y)` from `x0` to `x1` (either direction).
/// `h` carries the step size between calls.
fn integrate(f: &impl Fn(f64, &State) -> State, x0: f64, y0: State, x1: f64, rtol: f64, h: &mut f64) -> State {
    let dir = (x1 - x0).signum();
    let mut x = x0;
    let mut y = y0;
    let atol = rtol * 1e-6;
    while (x1 - x) * dir > 0.0 {
        let step = h.abs().min((x1 - x).abs()) * dir;
        let mut k = [[0.0; 3]; 7];
        k[0] = f(x, &y);
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for i in 0..3 {
                    ys[i] += step * A[s][j] * kj[i];
                }
            }
            k[s] = f(x + C[s] * step, &ys);
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for i in 0..3 {
            let mut e = 0.0;
            for s in 0..7 {
                let b5 = if s < 6 { A[6][s] } else { 0.0 };
                y5[i] += step * b5 * k[s][i];
                e += step * (b5 - B4[s]) * k[s][i];
            }
            let sc = atol + rtol * y[i].abs().max(y5[i].abs());
            err = err.max((e / sc).abs());
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            x += step;
            y = y5;
            if (x1 - x).abs() < 1e-14 * x1.abs().max(1.0) {
                x = x1;
            }
        }
        *h = (step.abs() * factor).max(1e-12);
    }
    y
}

/// Shooting setup on the span `[x_left, x_right]` with matching point `x_match`,
/// all taken from grid nodes closest to `-L/2`, `L/2` and `0`.
#[derive(Clone, Copy, Debug)]
pub struct Shooting {
    p: u32,
    grid: Grid,
    j_left: usize,
    j_match: usize,
    j_right: usize,
    pub rtol: f64,
}

impl Shooting {
    pub fn new(ctx: &SolitonContext, grid: Grid) -> Self {
        let nearest = |x: f64| ((x + grid.half_length()) / grid.spacing()).round() as usize;
        let l2 = 0.5 * grid.half_length();
        Self {
            p: ctx.p,
            grid,
            j_left: nearest(-l2),
            j_match: nearest(0.0),
            j_right: nearest(l2).min(grid.n_points() - 1),
            rtol: 1e-10,
        }
    }

    fn rhs(&self, e: f64) -> impl Fn(f64, &State) -> State {
        let p = f64::from(self.p);
        let a = 0.5 * (p - 1.0);
        move |x: f64, y: &State| {
            let ch = (a * x).cosh();
            let v = 0.5 * (p + 1.0) / (ch * ch);
            let dv = -2.0 * a * (a * x).tanh() * v;
            [y[1], y[2], y[1] + e * y[0] - p * (dv * y[0] + v * y[1])]
        }
    }

    fn left_start(&self, e: f64) -> Result<State> {
        let s3 = cubic_roots(e)?.sigma3;
        Ok([1.0, s3, s3 * s3])
    }

    /// Basis of the decaying subspace at `+∞`: the kernel of the left
    /// eigenvector `(σ₃² - 1, σ₃, 1)` of the constant-coefficient companion matrix.
    fn right_start(&self, e: f64) -> Result<[State; 2]> {
        let s3 = cubic_roots(e)?.sigma3;
        Ok([[1.0, 0.0, -(s3 * s3 - 1.0)], [0.0, 1.0, -s3]])
    }

    /// Integrates across grid nodes `from..=to` (either direction), recording
    /// the state at each node.
    fn sweep(&self, e: f64, y0: State, from: usize, to: usize) -> Vec<State> {
        let f = self.rhs(e);
        let mut h = 0.01;
        let mut out = vec![y0];
        let mut y = y0;
        let mut j = from;
        while j != to {
            let next = if to > from { j + 1 } else { j - 1 };
            y = integrate(&f, self.grid.x(j), y, self.grid.x(next), self.rtol, &mut h);
            out.push(y);
            j = next;
        }
        out
    }

    /// Matching determinant `det[y_left, r₁, r₂]` at the matching node.
    pub fn determinant(&self, e: f64) -> Result<f64> {
        let yl = *self.sweep(e, self.left_start(e)?, self.j_left, self.j_match).last().expect("nonempty");
        let [w1, w2] = self.right_start(e)?;
        let r1 = *self.sweep(e, w1, self.j_right, self.j_match).last().expect("nonempty");
        let r2 = *self.sweep(e, w2, self.j_right, self.j_match).last().expect("nonempty");
        let norm = |v: &State| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let det = yl[0] * (r1[1] * r2[2] - r1[2] * r2[1]) - yl[1] * (r1[0] * r2[2] - r1[2] * r2[0])
            + yl[2] * (r1[0] * r2[1] - r1[1] * r2[0]);
        Ok(det / (norm(&yl) * norm(&r1) * norm(&r2)))
    }

    /// Samples the determinant on `samples` equispaced points of `[lo, hi]`.
    pub fn scan(&self, lo: f64, hi: f64, samples: usize) -> Result<Vec<(f64, f64)>> {
        (0..samples)
            .map(|i| {
                let e = lo + (hi - lo) * i as f64 / (samples.max(2) - 1) as f64;
                Ok((e, self.determinant(e)?))
            })
            .collect()
    }

    /// Root of the matching determinant inside `bracket`.
    pub fn shoot_e0(&self, bracket: (f64, f64)) -> Result<f64> {
        let (mut a, mut b) = bracket;
        if !(a > 0.0 && b > a) {
            return Err(Error::Domain(format!("shooting bracket must satisfy 0 < lo < hi, got {bracket:?}")));
        }
        let mut fa = self.determinant(a)?;
        let mut fb = self.determinant(b)?;
        if fa * fb > 0.0 {
            return Err(Error::NotFound(format!(
                "matching determinant has no sign change on [{a}, {b}] ({fa:e}, {fb:e})"
            )));
        }
        // Illinois-modified regula falsi
        let mut side = 0;
        for _ in 0..200 {
            let c = (a * fb - b * fa) / (fb - fa);
            let fc = self.determinant(c)?;
            if fc == 0.0 || (b - a).abs() < 1e-14 * c.abs() {
                return Ok(c);
            }
            if fc * fb > 0.0 {
                b = c;
                fb = fc;
                if side == -1 {
                    fa *= 0.5;
                }
                side = -1;
            } else {
                a = c;
                fa = fc;
                if side == 1 {
                    fb *= 0.5;
                }
                side = 1;
            }
            if (b - a).abs() < 1e-13 * c.abs() {
                return Ok(0.5 * (a + b));
            }
        }
        Ok(0.5 * (a + b))
    }

    /// Eigenfunction at `e` assembled from the left solution and the matching
    /// combination of the right pair; zero outside the shooting span.
    pub fn eigenfunction(&self, e: f64) -> Result<GridFunction> {
        let left = self.sweep(e, self.left_start(e)?, self.j_left, self.j_match);
        let [w1, w2] = self.right_start(e)?;
        let r1 = self.sweep(e, w1, self.j_right, self.j_match);
        let r2 = self.sweep(e, w2, self.j_right, self.j_match);
        let y0 = *left.last().expect("nonempty");
        let (u, v) = (*r1.last().expect("nonempty"), *r2.last().expect("nonempty"));
        // least squares y0 ≈ a u + b v
        let dot = |x: &State, y: &State| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
        let (uu, uv, vv, uy, vy) = (dot(&u, &u), dot(&u, &v), dot(&v, &v), dot(&u, &y0), dot(&v, &y0));
        let det = uu * vv - uv * uv;
        let a = (uy * vv - vy * uv) / det;
        let b = (vy * uu - uy * uv) / det;
        let mut values = vec![0.0; self.grid.n_points()];
        for (k, s) in left.iter().enumerate() {
            values[self.j_left + k] = s[0];
        }
        for (k, (s1, s2)) in r1.iter().zip(&r2).enumerate() {
            let j = self.j_right - k;
            if j > self.j_match {
                values[j] = a * s1[0] + b * s2[0];
            }
        }
        GridFunction::new(self.grid, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrator_exponential() {
        let f = |_x: f64, y: &State| [y[1], y[2], y[0]];
        let mut h = 0.1;
        // y = e^x solves y''' = y
        let y = integrate(&f, 0.0, [1.0, 1.0, 1.0], 3.0, 1e-12, &mut h);
        assert!((y[0] / 3f64.exp() - 1.0).abs() < 1e-10);
        let y = integrate(&f, 3.0, y, 0.0, 1e-12, &mut h);
        assert!((y[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn determinant_changes_sign_once_on_positive_axis() {
        let ctx = SolitonContext::new(6).unwrap();
        let s = Shooting::new(&ctx, Grid::new(40.0, 1024).unwrap());
        let scan = s.scan(0.1, 3.0, 30).unwrap();
        let changes = scan.windows(2).filter(|w| w[0].1 * w[1].1 < 0.0).count();
        assert_eq!(changes, 1);
        let e0 = s.shoot_e0((0.1, 3.0)).unwrap();
        assert!((e0 - 0.6345).abs() < 1e-3);
        assert!(s.shoot_e0((5.0, 7.0)).is_err());
    }
}
