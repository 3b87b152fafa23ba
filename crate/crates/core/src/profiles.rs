//! Solitons of gKdV, the conserved functionals and the explicit unstable data.
//!
//! `Q` solves `Q'' + Q^p = Q` and has the closed form
//! `Q(x) = [(p+1) / (2 cosh²((p-1)x/2))]^{1/(p-1)}`; the speed-`c` soliton is
//! `Q_c(x) = c^{1/(p-1)} Q(√c x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// Grid on which the Gagliardo–Nirenberg constant is calibrated.
const GN_REFERENCE: (f64, usize) = (40.0, 4096);

/// Closed-form ground state.
pub fn eval_q(p: u32, x: f64) -> f64 {
    let pm1 = f64::from(p - 1);
    let ch = (0.5 * pm1 * x).cosh();
    (0.5 * f64::from(p + 1) / (ch * ch)).powf(1.0 / pm1)
}

/// `Q'(x) = -tanh((p-1)x/2) Q(x)`.
pub fn eval_q_prime(p: u32, x: f64) -> f64 {
    -(0.5 * f64::from(p - 1) * x).tanh() * eval_q(p, x)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolitonContext {
    pub p: u32,
    pub c: f64,
    pub gn_constant: f64,
}

impl SolitonContext {
    /// Unit-speed context for exponent `p`.
    pub fn new(p: u32) -> Result<Self> {
        Self::with_speed(p, 1.0)
    }

    pub fn with_speed(p: u32, c: f64) -> Result<Self> {
        if p < 2 {
            return Err(Error::Domain(format!("nonlinearity exponent must be >= 2, got {p}")));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Domain(format!("wave speed must be positive, got {c}")));
        }
        let mut ctx = Self { p, c, gn_constant: 1.0 };
        ctx.gn_constant = ctx.calibrate_gn();
        Ok(ctx)
    }

    /// Fails unless `p > 5`, the regime in which the soliton is unstable.
    pub fn require_supercritical(&self) -> Result<()> {
        if self.p > 5 {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "p > 5 required for the instability experiments, got p = {}",
                self.p
            )))
        }
    }

    pub fn q(&self, x: f64) -> f64 {
        eval_q(self.p, x)
    }

    pub fn q_prime(&self, x: f64) -> f64 {
        eval_q_prime(self.p, x)
    }

    /// `Q_c(x)` at this context's speed.
    pub fn qc(&self, x: f64) -> f64 {
        self.qc_at(self.c, x).expect("speed validated at construction")
    }

    pub fn qc_at(&self, c: f64, x: f64) -> Result<f64> {
        if !(c > 0.0) {
            return Err(Error::Domain(format!("wave speed must be positive, got {c}")));
        }
        Ok(c.powf(1.0 / f64::from(self.p - 1)) * eval_q(self.p, c.sqrt() * x))
    }

    /// `Q` sampled on a grid.
    pub fn sample_q(&self, grid: &Grid) -> GridFunction {
        grid.sample(|x| eval_q(self.p, x))
    }

    pub fn sample_q_prime(&self, grid: &Grid) -> GridFunction {
        grid.sample(|x| eval_q_prime(self.p, x))
    }

    /// `Q_c` sampled on a grid.
    pub fn sample_qc(&self, grid: &Grid) -> GridFunction {
        grid.sample(|x| self.qc(x))
    }

    /// `Q(· - y)`.
    pub fn sample_q_translate(&self, grid: &Grid, y: f64) -> GridFunction {
        grid.sample(|x| eval_q(self.p, x - y))
    }

    /// Exact mass-scaling exponent `(5-p)/(2(p-1))` of `∫Q_c²`.
    pub fn mass_scaling_exponent(&self) -> f64 {
        (5.0 - f64::from(self.p)) / (2.0 * f64::from(self.p - 1))
    }

    /// `λ₀ = (p-1)(p+3)/4`, the negative eigenvalue of `L` is `-λ₀`.
    pub fn lambda0(&self) -> f64 {
        f64::from((self.p - 1) * (self.p + 3)) / 4.0
    }

    /// Scaling generator `S = Q/(p-1) + x Q'/2`, satisfying `LS = -Q`.
    pub fn scaling_derivative_s(&self, grid: &Grid) -> GridFunction {
        let pm1 = f64::from(self.p - 1);
        grid.sample(|x| eval_q(self.p, x) / pm1 + 0.5 * x * eval_q_prime(self.p, x))
    }

    /// `Q^{(p+1)/2}`, the ground state of `L`.
    pub fn ground_state(&self, grid: &Grid) -> GridFunction {
        let e = 0.5 * f64::from(self.p + 1);
        grid.sample(|x| eval_q(self.p, x).powf(e))
    }

    /// Mass, energy and Weinstein functional by spectral quadrature.
    pub fn functionals(&self, u: &GridFunction) -> FunctionalValues {
        let mass = u.inner_unchecked(u);
        let ux = u.dx();
        let grad = ux.inner_unchecked(&ux);
        let potential: f64 =
            u.values().iter().map(|v| v.powi(self.p as i32 + 1)).sum::<f64>() * u.grid().spacing();
        let energy = 0.5 * grad - potential / f64::from(self.p + 1);
        FunctionalValues {
            mass,
            energy,
            weinstein: energy + 0.5 * mass,
        }
    }

    /// `u_{0,n}(x) = λ Q(λ² x)` with `λ = 1 + sign/n`.
    pub fn instability_data(&self, grid: &Grid, n: u32, sign: i32) -> Result<GridFunction> {
        let lambda = self.instability_lambda(n, sign)?;
        Ok(grid.sample(|x| lambda * eval_q(self.p, lambda * lambda * x)))
    }

    pub fn instability_lambda(&self, n: u32, sign: i32) -> Result<f64> {
        if n == 0 || !(sign == 1 || sign == -1) {
            return Err(Error::Domain(format!("need n >= 1 and sign = ±1, got n = {n}, sign = {sign}")));
        }
        if sign == -1 && n < 2 {
            return Err(Error::Domain("n >= 2 required when sign = -1".into()));
        }
        Ok(1.0 + f64::from(sign) / f64::from(n))
    }

    /// `‖v‖_{p+1}^{p+1} - C_GN ‖v'‖₂^{(p-1)/2} ‖v‖₂^{(p+3)/2}`; nonpositive, zero
    /// exactly on the family `aQ(λx+b)`.
    pub fn gn_equality_check(&self, v: &GridFunction) -> Result<f64> {
        if v.max_abs() == 0.0 {
            return Err(Error::Domain("Gagliardo–Nirenberg defect undefined for v = 0".into()));
        }
        let (lhs, rhs) = self.gn_sides(v);
        Ok(lhs - self.gn_constant * rhs)
    }

    fn gn_sides(&self, v: &GridFunction) -> (f64, f64) {
        let p = self.p as i32;
        let lhs = v.values().iter().map(|x| x.abs().powi(p + 1)).sum::<f64>() * v.grid().spacing();
        let vx = v.dx();
        let grad = vx.inner_unchecked(&vx).sqrt();
        let l2 = v.l2_norm();
        let rhs = grad.powf(0.5 * f64::from(p - 1)) * l2.powf(0.5 * f64::from(p + 3));
        (lhs, rhs)
    }

    fn calibrate_gn(&self) -> f64 {
        let grid = Grid::new(GN_REFERENCE.0, GN_REFERENCE.1).expect("reference grid is valid");
        let (lhs, rhs) = self.gn_sides(&self.sample_q(&grid));
        lhs / rhs
    }

    /// `‖Q - Q(·+h)‖²_{H¹}`.
    pub fn translation_gap(&self, grid: &Grid, h: f64) -> f64 {
        let q = self.sample_q(grid);
        let shifted = grid.sample(|x| eval_q(self.p, x + h));
        (&q - &shifted).h1_norm().powi(2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValues {
    pub mass: f64,
    pub energy: f64,
    pub weinstein: f64,
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// `C(p-1,k) > ((p-1)/4) C(4,k)` for `k ∈ {2,3,4}`, the inequality that makes
/// `E(u_{0,n}) < E(Q)`.
pub fn instability_binomial_inequality(p: u32) -> bool {
    (2..=4).all(|k| binomial(p - 1, k) > f64::from(p - 1) / 4.0 * binomial(4, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ctx() -> SolitonContext {
        SolitonContext::new(6).unwrap()
    }

    #[test]
    fn closed_form_values() {
        assert_relative_eq!(eval_q(6, 0.0), 3.5f64.powf(0.2), max_relative = 1e-15);
        assert_relative_eq!(eval_q(6, 0.0), 1.284735, max_relative = 1e-6);
        assert_eq!(eval_q(7, 2.5), eval_q(7, -2.5));
        let ratio = eval_q(6, 20.0) / eval_q(6, 19.0);
        assert!((ratio / (-1.0f64).exp() - 1.0).abs() < 0.01);
    }

    #[test]
    fn q_prime_matches_difference_quotient() {
        let h = 1e-5;
        for x in [-3.0, -0.4, 0.0, 1.1, 5.0] {
            let fd = (eval_q(6, x + h) - eval_q(6, x - h)) / (2.0 * h);
            assert!((fd - eval_q_prime(6, x)).abs() < 1e-9);
        }
    }

    #[test]
    fn context_validation() {
        assert!(SolitonContext::new(1).is_err());
        assert!(SolitonContext::with_speed(6, 0.0).is_err());
        assert!(SolitonContext::new(4).unwrap().require_supercritical().is_err());
        assert!(ctx().require_supercritical().is_ok());
        assert!(ctx().qc_at(-1.0, 0.0).is_err());
        assert_eq!(ctx().qc_at(1.0, 0.7).unwrap(), eval_q(6, 0.7));
    }

    #[test]
    fn mass_scaling_and_sign_of_derivative() {
        let g = Grid::new(40.0, 2048).unwrap();
        let c = ctx();
        let m1 = c.functionals(&c.sample_q(&g)).mass;
        let q4 = g.sample(|x| c.qc_at(4.0, x).unwrap());
        let m4 = c.functionals(&q4).mass;
        assert_relative_eq!(m4 / m1, 4f64.powf(-0.1), max_relative = 1e-8);
        let h = 1e-4;
        let mp = c.functionals(&g.sample(|x| c.qc_at(1.0 + h, x).unwrap())).mass;
        let mm = c.functionals(&g.sample(|x| c.qc_at(1.0 - h, x).unwrap())).mass;
        assert!(mp < mm);
    }

    #[test]
    fn s_is_even_with_known_center() {
        let g = Grid::new(40.0, 1024).unwrap();
        let c = ctx();
        let s = c.scaling_derivative_s(&g);
        assert!((&s - &s.reflect()).max_abs() < 1e-13);
        assert_relative_eq!(s.values()[512], eval_q(6, 0.0) / 5.0, max_relative = 1e-15);
    }

    #[test]
    fn energy_of_q_by_pohozaev() {
        let g = Grid::new(40.0, 2048).unwrap();
        let c = ctx();
        let q = c.sample_q(&g);
        let f = c.functionals(&q);
        let q7: f64 = q.values().iter().map(|v| v.powi(7)).sum::<f64>() * g.spacing();
        assert_relative_eq!(f.energy, q7 / 28.0, max_relative = 1e-10);
        assert_eq!(f.weinstein, f.energy + 0.5 * f.mass);
        let zero = c.functionals(&g.zeros());
        assert_eq!((zero.mass, zero.energy, zero.weinstein), (0.0, 0.0, 0.0));
    }

    #[test]
    fn unstable_data_properties() {
        let g = Grid::new(40.0, 2048).unwrap();
        let c = ctx();
        let q = c.sample_q(&g);
        let fq = c.functionals(&q);
        for n in [5, 10, 50] {
            for sign in [1, -1] {
                let u = c.instability_data(&g, n, sign).unwrap();
                let f = c.functionals(&u);
                assert_relative_eq!(f.mass, fq.mass, max_relative = 1e-10);
                assert!(f.energy < fq.energy);
            }
        }
        assert!(c.instability_data(&g, 1, -1).is_err());
        // second-order coefficient for λ = 1 - 1/n
        let n = 50.0;
        let u = c.instability_data(&g, 50, -1).unwrap();
        let q7: f64 = q.values().iter().map(|v| v.powi(7)).sum::<f64>() * g.spacing();
        let predicted = 5.0 * (-1.0) / 14.0 * q7;
        let measured = n * n * (c.functionals(&u).energy - fq.energy);
        assert!((measured / predicted - 1.0).abs() < 0.05, "{measured} vs {predicted}");
    }

    #[test]
    fn gn_defect() {
        let c = ctx();
        let g = Grid::new(40.0, 8192).unwrap();
        assert!(c.gn_equality_check(&c.sample_q(&g)).unwrap().abs() < 1e-10);
        let v = g.sample(|x| 2.0 * eval_q(6, 3.0 * x + 1.0));
        assert!(c.gn_equality_check(&v).unwrap() <= 1e-8);
        let bump = g.sample(|x| eval_q(6, x) + 1.5 * (-(x - 6.0) * (x - 6.0) / 4.0).exp());
        assert!(c.gn_equality_check(&bump).unwrap() < -1e-3);
        assert!(c.gn_equality_check(&g.zeros()).is_err());
    }

    #[test]
    fn binomial_inequality() {
        for p in 6..=12 {
            assert!(instability_binomial_inequality(p), "p = {p}");
        }
        assert_eq!(binomial(6, 3), 20.0);
    }

    #[test]
    fn translation_gap_bounds() {
        // the ratio decreases from its h -> 0 limit, so the two-sided bound is
        // checked with β taken as the smallest ratio on |h| <= 0.1
        let g = Grid::new(40.0, 1024).unwrap();
        let c = ctx();
        let ratios: Vec<f64> = [-0.1, -0.05, -1e-3, 0.02, 0.1]
            .iter()
            .map(|&h| c.translation_gap(&g, h) / (h * h))
            .collect();
        let beta = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(beta > 0.0);
        assert!(ratios.iter().all(|&r| r <= 4.0 * beta));
        let limit = c.translation_gap(&g, 1e-3) / 1e-6;
        assert!(ratios.iter().all(|&r| r <= limit * (1.0 + 1e-9)));
    }
}
