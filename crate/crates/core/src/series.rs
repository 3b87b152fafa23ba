//! Exponential series `Σⱼ e^{-j e₀ t} fⱼ(x)` and the recursive construction of
//! the approximate special solutions `𝒱ₖᴬ`.
//!
//! `𝒱ₖᴬ = Σ_{j=1}^{k} e^{-j e₀ t} 𝒵ⱼᴬ` with `𝒵₁ᴬ = A𝒴₊` and
//! `𝒵_{j+1} = (𝓛 - (j+1)e₀)^{-1} [R(𝒱ⱼ)]_{j+1}`, where
//! `R(h) = -∂ Σ_{i=2}^{p} C(p,i) Q^{p-i} h^i`. The defect
//! `εₖ = ∂ₜ𝒱ₖ + 𝓛𝒱ₖ - R(𝒱ₖ)` then only carries indices `k+1 ..= pk`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::tail_decay_rates;
use crate::grid::{Grid, GridFunction};
use crate::linop::{resolvent_solve, SpectralData};
use crate::profiles::binomial;

#[derive(Clone, Debug, PartialEq)]
pub struct ExpSeries {
    e0: f64,
    grid: Grid,
    terms: BTreeMap<u32, GridFunction>,
}

/// Product of two grid functions computed on a twice-padded grid.
fn product(a: &GridFunction, b: &GridFunction) -> GridFunction {
    use crate::grid::{forward, inverse, resize_spectrum};
    let n = a.len();
    let m = 2 * n;
    let ratio = m as f64 / n as f64;
    let up = |f: &GridFunction| -> Vec<f64> {
        inverse(&resize_spectrum(&f.spectrum(), m)).into_iter().map(|v| v * ratio).collect()
    };
    let (fa, fb) = (up(a), up(b));
    let prod: Vec<f64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    let back: Vec<_> = resize_spectrum(&forward(&prod), n).into_iter().map(|c| c / ratio).collect();
    GridFunction::from_raw(*a.grid(), inverse(&back))
}

impl ExpSeries {
    pub fn new(e0: f64, grid: Grid) -> Self {
        Self {
            e0,
            grid,
            terms: BTreeMap::new(),
        }
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn indices(&self) -> Vec<u32> {
        self.terms.keys().copied().collect()
    }

    pub fn min_index(&self) -> Option<u32> {
        self.terms.keys().next().copied()
    }

    pub fn max_index(&self) -> Option<u32> {
        self.terms.keys().next_back().copied()
    }

    pub fn coefficient(&self, j: u32) -> Option<&GridFunction> {
        self.terms.get(&j)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &GridFunction)> {
        self.terms.iter().map(|(j, f)| (*j, f))
    }

    /// Adds `f` to the coefficient of index `j`.
    pub fn add_term(&mut self, j: u32, f: GridFunction) -> Result<()> {
        if j == 0 {
            return Err(Error::Domain("series indices start at 1".into()));
        }
        self.grid.ensure_same(f.grid())?;
        match self.terms.get_mut(&j) {
            Some(g) => *g = &*g + &f,
            None => {
                self.terms.insert(j, f);
            }
        }
        Ok(())
    }

    /// `Σⱼ e^{-j e₀ t} fⱼ`.
    pub fn eval(&self, t: f64) -> GridFunction {
        let mut out = self.grid.zeros();
        for (j, f) in &self.terms {
            out = out.axpy((-(f64::from(*j)) * self.e0 * t).exp(), f);
        }
        out
    }

    /// Time derivative as a series: coefficients `-j e₀ fⱼ`.
    pub fn time_derivative(&self) -> Self {
        self.map(|j, f| f.scale(-(f64::from(j)) * self.e0))
    }

    pub fn map(&self, f: impl Fn(u32, &GridFunction) -> GridFunction) -> Self {
        Self {
            e0: self.e0,
            grid: self.grid,
            terms: self.terms.iter().map(|(j, g)| (*j, f(*j, g))).collect(),
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|_, f| f.scale(a))
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        if self.e0 != other.e0 {
            return Err(Error::Usage(format!(
                "series with different rates {} and {}",
                self.e0, other.e0
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (j, f) in &other.terms {
            out.add_term(*j, f.clone())?;
        }
        Ok(out)
    }

    /// Index-convolution product truncated beyond `max_index`. Returns the
    /// product and the number of dropped index pairs.
    pub fn mul(&self, other: &Self, max_index: u32) -> Result<(Self, usize)> {
        self.compatible(other)?;
        let mut out = Self::new(self.e0, self.grid);
        let mut dropped = 0;
        for (i, f) in &self.terms {
            for (j, g) in &other.terms {
                if i + j > max_index {
                    dropped += 1;
                    continue;
                }
                out.add_term(i + j, product(f, g))?;
            }
        }
        Ok((out, dropped))
    }

    /// `k`-fold power truncated beyond `max_index`.
    pub fn power(&self, k: u32, max_index: u32) -> Result<Self> {
        Ok(self.powers(k, max_index)?.0.pop().expect("k >= 2 yields powers"))
    }

    /// Powers `2..=k`, plus the total number of dropped index pairs.
    fn powers(&self, k: u32, max_index: u32) -> Result<(Vec<Self>, usize)> {
        if k < 2 {
            return Err(Error::Domain(format!("series power needs k >= 2, got {k}")));
        }
        let mut out = Vec::new();
        let mut dropped = 0;
        let mut cur = self.clone();
        for _ in 2..=k {
            let (next, d) = cur.mul(self, max_index)?;
            dropped += d;
            out.push(next.clone());
            cur = next;
        }
        Ok((out, dropped))
    }

    /// Multiplies every coefficient pointwise by `w` (on the padded grid).
    pub fn mul_function(&self, w: &GridFunction) -> Self {
        self.map(|_, f| product(w, f))
    }

    /// Largest absolute coefficient difference, over the union of indices.
    pub fn max_difference(&self, other: &Self) -> Result<f64> {
        self.compatible(other)?;
        let zero = self.grid.zeros();
        let mut idx: Vec<u32> = self.indices();
        idx.extend(other.indices());
        Ok(idx
            .into_iter()
            .map(|j| {
                let a = self.terms.get(&j).unwrap_or(&zero);
                let b = other.terms.get(&j).unwrap_or(&zero);
                (a - b).max_abs()
            })
            .fold(0.0, f64::max))
    }
}

/// `R(h) = -∂ Σ_{i=2}^p C(p,i) Q^{p-i} h^i` as a series, truncated beyond
/// `max_index`; the second component counts dropped index pairs.
pub fn nonlinear_remainder(v: &ExpSeries, sd: &SpectralData, max_index: u32) -> Result<(ExpSeries, usize)> {
    let p = sd.op.p();
    let q = sd.op.q();
    let mut sum = ExpSeries::new(v.e0(), *v.grid());
    if v.is_empty() {
        return Ok((sum, 0));
    }
    let (powers, dropped) = v.powers(p, max_index)?;
    for (i, pw) in (2..=p).zip(powers) {
        let weight = q.map(|x| binomial(p, i) * x.powi((p - i) as i32));
        let term = if i == p { pw.scale(binomial(p, i)) } else { pw.mul_function(&weight) };
        sum = sum.add(&term)?;
    }
    Ok((sum.map(|_, f| f.dx().scale(-1.0)), dropped))
}

/// `R(h)` evaluated directly on a grid function.
pub fn nonlinear_remainder_field(h: &GridFunction, sd: &SpectralData) -> GridFunction {
    let p = sd.op.p();
    let q = sd.op.q();
    let mut acc = h.grid().zeros();
    for i in 2..=p {
        let c = binomial(p, i);
        acc = acc.zip_with(&q.zip_with(h, |a, b| c * a.powi((p - i) as i32) * b.powi(i as i32)), |x, y| x + y);
    }
    acc.dx().scale(-1.0)
}

/// `𝒱ₖᴬ` together with its defect series `εₖᴬ`.
#[derive(Clone, Debug)]
pub struct SpecialSeries {
    pub amplitude: f64,
    pub k_max: u32,
    pub v: ExpSeries,
    pub residual: ExpSeries,
    /// Index pairs dropped by truncation at `p·k_max` while forming the defect.
    pub dropped_products: usize,
}

pub fn build_series(amplitude: f64, k_max: u32, sd: &SpectralData) -> Result<SpecialSeries> {
    if k_max == 0 {
        return Err(Error::Domain("series order k_max must be >= 1".into()));
    }
    let grid = *sd.grid();
    let p = sd.op.p();
    let mut v = ExpSeries::new(sd.e0, grid);
    let empty = ExpSeries::new(sd.e0, grid);
    if amplitude == 0.0 {
        return Ok(SpecialSeries {
            amplitude,
            k_max,
            v,
            residual: empty,
            dropped_products: 0,
        });
    }
    v.add_term(1, sd.y_plus.scale(amplitude))?;
    for k in 1..k_max {
        let (r, _) = nonlinear_remainder(&v, sd, k + 1)?;
        let u = r.coefficient(k + 1).cloned().unwrap_or_else(|| grid.zeros());
        let z = resolvent_solve(sd, &u, f64::from(k + 1) * sd.e0)?;
        v.add_term(k + 1, z)?;
    }
    let (r, dropped) = nonlinear_remainder(&v, sd, p * k_max)?;
    let mut residual = ExpSeries::new(sd.e0, grid);
    for (j, f) in r.terms() {
        if j > k_max {
            residual.add_term(j, f.scale(-1.0))?;
        }
    }
    Ok(SpecialSeries {
        amplitude,
        k_max,
        v,
        residual,
        dropped_products: dropped,
    })
}

/// Grid defect `∂ₜ𝒱 + 𝓛𝒱 - R(𝒱) - εₖ` at time `t`, with `∂ₜ` from fourth-order
/// central differences of step `h`. Returns `(‖defect‖₂, ‖εₖ(t)‖₂)`.
pub fn defect_check(s: &SpecialSeries, sd: &SpectralData, t: f64, h: f64) -> (f64, f64) {
    let ev = |t: f64| s.v.eval(t);
    let dt = ev(t - 2.0 * h)
        .axpy(-8.0, &ev(t - h))
        .axpy(8.0, &ev(t + h))
        .axpy(-1.0, &ev(t + 2.0 * h))
        .scale(1.0 / (12.0 * h));
    let vt = ev(t);
    let eps = s.residual.eval(t);
    let defect = &(&(&dt + &sd.op.lcal(&vt)) - &nonlinear_remainder_field(&vt, sd)) - &eps;
    (defect.l2_norm(), eps.l2_norm())
}

/// Fitted exponential tail rate of one coefficient.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoefficientDecay {
    pub index: u32,
    /// `None` when the coefficient is numerically zero.
    pub rate: Option<f64>,
    pub left: Option<f64>,
    pub right: Option<f64>,
    pub note: Option<String>,
}

/// Tail decay rates of every coefficient on `5 ≤ |x| ≤ L/2`.
pub fn coefficient_decay_report(s: &ExpSeries) -> Result<Vec<CoefficientDecay>> {
    let l2 = 0.5 * s.grid().half_length();
    s.terms()
        .map(|(j, f)| {
            if f.max_abs() < 1e-300 {
                return Ok(CoefficientDecay {
                    index: j,
                    rate: None,
                    left: None,
                    right: None,
                    note: Some("coefficient numerically zero".into()),
                });
            }
            let (l, r) = tail_decay_rates(f, 5.0, l2)?;
            Ok(CoefficientDecay {
                index: j,
                rate: Some(l.min(r)),
                left: Some(l),
                right: Some(r),
                note: None,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(g: &Grid, c: f64) -> GridFunction {
        g.sample(|x| (-(x - c) * (x - c) / 2.0).exp())
    }

    #[test]
    fn eval_and_index_arithmetic() {
        let g = Grid::new(20.0, 256).unwrap();
        let e0 = 0.7;
        let empty = ExpSeries::new(e0, g);
        assert_eq!(empty.eval(1.0).max_abs(), 0.0);
        let mut s = ExpSeries::new(e0, g);
        let f = bump(&g, 0.0);
        s.add_term(1, f.clone()).unwrap();
        let a = s.eval(0.3).max_abs();
        let b = s.eval(0.3 + 2f64.ln() / e0).max_abs();
        assert!((a / b - 2.0).abs() < 1e-12);
        let p3 = s.power(3, 10).unwrap();
        assert_eq!(p3.indices(), vec![3]);
        let direct = f.powi(3);
        assert!((p3.coefficient(3).unwrap() - &direct).max_abs() < 1e-10);
        assert!(s.add_term(0, f).is_err());
    }

    #[test]
    fn bilinear_product_of_two_term_series() {
        let g = Grid::new(20.0, 256).unwrap();
        let (f1, f2, g1, g2) = (bump(&g, 0.0), bump(&g, 1.0), bump(&g, -1.0), bump(&g, 0.5));
        let mut a = ExpSeries::new(1.0, g);
        a.add_term(1, f1.clone()).unwrap();
        a.add_term(2, f2.clone()).unwrap();
        let mut b = ExpSeries::new(1.0, g);
        b.add_term(1, g1.clone()).unwrap();
        b.add_term(3, g2.clone()).unwrap();
        let (prod, dropped) = a.mul(&b, 4).unwrap();
        assert_eq!(dropped, 1);
        assert_eq!(prod.indices(), vec![2, 3, 4]);
        assert!((prod.coefficient(2).unwrap() - &(&f1 * &g1)).max_abs() < 1e-12);
        assert!((prod.coefficient(3).unwrap() - &(&f2 * &g1)).max_abs() < 1e-12);
        assert!((prod.coefficient(4).unwrap() - &(&f1 * &g2)).max_abs() < 1e-12);
        // evaluation commutes with the product up to the dropped term
        let t = 0.4;
        let lhs = prod.eval(t);
        let rhs = &a.eval(t) * &b.eval(t);
        let missing = (&f2 * &g2).scale((-5.0 * t).exp());
        assert!((&(&lhs + &missing) - &rhs).max_abs() < 1e-12);
    }

    #[test]
    fn time_derivative_matches_difference() {
        let g = Grid::new(20.0, 64).unwrap();
        let mut s = ExpSeries::new(0.5, g);
        s.add_term(2, bump(&g, 0.0)).unwrap();
        let h = 1e-4;
        let fd = (&s.eval(1.0 + h) - &s.eval(1.0 - h)).scale(0.5 / h);
        assert!((&fd - &s.time_derivative().eval(1.0)).max_abs() < 1e-8);
    }
}
