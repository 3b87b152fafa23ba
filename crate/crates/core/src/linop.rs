//! The linearized operators around `Q`.
//!
//! `L = -∂² + 1 - pQ^{p-1}` is self-adjoint; `𝓛 = -∂L` generates the
//! linearized flow `h_t + 𝓛h = 0`. The real spectrum of `𝓛` is
//! `{-e₀, 0, e₀}`; `𝒴₊` spans the `e₀` eigenspace, `𝒴₋ = ±𝒴₊(-x)` the `-e₀`
//! one, and `Z± = L𝒴±` are eigenfunctions of the adjoint `L∂`.

use faer::prelude::*;
use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::profiles::SolitonContext;

/// `L`, `𝓛` and their dense matrices on one grid.
#[derive(Clone, Debug)]
pub struct Linearization {
    grid: Grid,
    p: u32,
    q: GridFunction,
    q_prime: GridFunction,
    potential: GridFunction,
}

impl Linearization {
    pub fn new(ctx: &SolitonContext, grid: Grid) -> Self {
        let q = ctx.sample_q(&grid);
        let p = ctx.p;
        let potential = q.map(|v| f64::from(p) * v.powi(p as i32 - 1));
        Self {
            grid,
            p,
            q_prime: ctx.sample_q_prime(&grid),
            q,
            potential,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> &GridFunction {
        &self.q
    }

    pub fn q_prime(&self) -> &GridFunction {
        &self.q_prime
    }

    /// `pQ^{p-1}` on the grid.
    pub fn potential(&self) -> &GridFunction {
        &self.potential
    }

    /// `Lu = -u'' + u - pQ^{p-1}u`.
    pub fn apply_l(&self, u: &GridFunction) -> Result<GridFunction> {
        self.grid.ensure_same(u.grid())?;
        Ok(self.l(u))
    }

    pub(crate) fn l(&self, u: &GridFunction) -> GridFunction {
        let uxx = u.dxx();
        GridFunction::from_raw(
            self.grid,
            uxx.values()
                .iter()
                .zip(u.values())
                .zip(self.potential.values())
                .map(|((d2, v), w)| -d2 + v - w * v)
                .collect(),
        )
    }

    /// `𝓛u = -(Lu)'`.
    pub fn apply_lcal(&self, u: &GridFunction) -> Result<GridFunction> {
        self.grid.ensure_same(u.grid())?;
        Ok(self.lcal(u))
    }

    pub(crate) fn lcal(&self, u: &GridFunction) -> GridFunction {
        self.l(u).dx().scale(-1.0)
    }

    /// Adjoint `𝓛* = L∂`.
    pub fn apply_adjoint(&self, u: &GridFunction) -> Result<GridFunction> {
        self.grid.ensure_same(u.grid())?;
        Ok(self.l(&u.dx()))
    }

    /// First column of the circulant matrix of `∂^order`.
    fn circulant_column(&self, order: u32) -> Vec<f64> {
        let mut e = vec![0.0; self.grid.n_points()];
        e[0] = 1.0;
        GridFunction::from_raw(self.grid, e)
            .derivative(order)
            .expect("order in range")
            .into_values()
    }

    /// Dense matrix of `L` (symmetric).
    pub fn l_matrix(&self) -> Mat<f64> {
        let n = self.grid.n_points();
        let d2 = self.circulant_column(2);
        let w = self.potential.values();
        Mat::from_fn(n, n, |i, j| {
            let mut v = -d2[(i + n - j) % n];
            if i == j {
                v += 1.0 - w[i];
            }
            v
        })
    }

    /// Dense matrix of `𝓛 = ∂³ - ∂ + ∂·pQ^{p-1}`.
    pub fn lcal_matrix(&self) -> Mat<f64> {
        let n = self.grid.n_points();
        let d1 = self.circulant_column(1);
        let d3 = self.circulant_column(3);
        let w = self.potential.values();
        Mat::from_fn(n, n, |i, j| {
            let k = (i + n - j) % n;
            d3[k] - d1[k] + d1[k] * w[j]
        })
    }

    /// Dense matrix of `1 - ∂²`, the Gram matrix of the `H¹` product up to `dx`.
    pub fn h1_matrix(&self) -> Mat<f64> {
        let n = self.grid.n_points();
        let d2 = self.circulant_column(2);
        Mat::from_fn(n, n, |i, j| {
            let v = -d2[(i + n - j) % n];
            if i == j {
                v + 1.0
            } else {
                v
            }
        })
    }
}

/// Filtering and singularity thresholds for the dense spectral computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralTolerances {
    /// `|Im λ| < imag_factor · spectral radius` counts as real.
    pub imag_factor: f64,
    /// `Re λ > real_tol` counts as positive.
    pub real_tol: f64,
    /// Eigenvalues with `|λ| < kernel_tol` are the split discrete image of
    /// the double zero eigenvalue and are never selected.
    pub kernel_tol: f64,
    /// Minimum distance between a resolvent shift and the computed spectrum.
    pub spectral_gap_tol: f64,
}

impl Default for SpectralTolerances {
    fn default() -> Self {
        Self {
            imag_factor: 1e-8,
            real_tol: 1e-6,
            kernel_tol: 1e-3,
            spectral_gap_tol: 1e-6,
        }
    }
}

/// Inner products certifying the normalization of `𝒴±`, `Z±`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationCertificate {
    pub yp_zm: f64,
    pub ym_zp: f64,
    pub yp_zp: f64,
    pub ym_zm: f64,
    pub zp_dq: f64,
    pub zm_dq: f64,
    /// `(Q', 𝒴₊')`, positive by convention.
    pub dq_dyp: f64,
}

#[derive(Clone, Debug)]
pub struct SpectralData {
    pub e0: f64,
    pub y_plus: GridFunction,
    pub y_minus: GridFunction,
    pub z_plus: GridFunction,
    pub z_minus: GridFunction,
    /// `‖𝓛𝒴₊ - e₀𝒴₊‖/‖𝒴₊‖`.
    pub residual_plus: f64,
    /// `‖𝓛𝒴₋ + e₀𝒴₋‖/‖𝒴₋‖`.
    pub residual_minus: f64,
    /// `‖L(Z±') ± e₀Z±‖/‖Z±‖`.
    pub adjoint_residual_plus: f64,
    pub adjoint_residual_minus: f64,
    pub mu: f64,
    pub certificate: NormalizationCertificate,
    /// `η = (𝒴₊, L𝒴₊(-·))` before normalization; `𝒴₋ = sign(η) 𝒴₊(-·)`.
    pub eta: f64,
    /// Eigenvalue from the dense solve before the two-sided Rayleigh refinement.
    pub e0_dense: f64,
    /// The selected negative real eigenvalue, independently of `e₀`.
    pub e0_mirror: f64,
    /// Relative distance between the independently computed `-e₀`
    /// eigenvector and the best multiple of the reflected `𝒴₊`.
    pub reflection_defect: f64,
    /// `max |Re λ|` over eigenvalues other than `±e₀` and the kernel pair.
    pub max_essential_real: f64,
    /// The split image of the zero eigenvalue.
    pub kernel_cluster: Vec<Complex64>,
    pub spectral_radius: f64,
    pub eigenvalues: Vec<Complex64>,
    pub tolerances: SpectralTolerances,
    pub op: Linearization,
}

/// JSON summary of a [`SpectralData`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralRecord {
    pub p: u32,
    pub half_length: f64,
    pub n_points: usize,
    pub e0: f64,
    pub e0_dense: f64,
    pub e0_mirror: f64,
    pub mu: f64,
    pub residual_plus: f64,
    pub residual_minus: f64,
    pub adjoint_residual_plus: f64,
    pub adjoint_residual_minus: f64,
    pub eta: f64,
    pub reflection_defect: f64,
    pub max_essential_real: f64,
    pub kernel_cluster: Vec<(f64, f64)>,
    pub spectral_radius: f64,
    pub certificate: NormalizationCertificate,
    pub tolerances: SpectralTolerances,
}

impl SpectralData {
    pub fn record(&self) -> SpectralRecord {
        SpectralRecord {
            p: self.op.p,
            half_length: self.op.grid.half_length(),
            n_points: self.op.grid.n_points(),
            e0: self.e0,
            e0_dense: self.e0_dense,
            e0_mirror: self.e0_mirror,
            mu: self.mu,
            residual_plus: self.residual_plus,
            residual_minus: self.residual_minus,
            adjoint_residual_plus: self.adjoint_residual_plus,
            adjoint_residual_minus: self.adjoint_residual_minus,
            eta: self.eta,
            reflection_defect: self.reflection_defect,
            max_essential_real: self.max_essential_real,
            kernel_cluster: self.kernel_cluster.iter().map(|c| (c.re, c.im)).collect(),
            spectral_radius: self.spectral_radius,
            certificate: self.certificate,
            tolerances: self.tolerances,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.op.grid
    }

    /// The same eigendata interpolated onto another grid, with the eigen
    /// residuals re-measured there.
    pub fn transfer(&self, ctx: &SolitonContext, grid: Grid) -> Result<Self> {
        if grid == self.op.grid {
            return Ok(self.clone());
        }
        let op = Linearization::new(ctx, grid);
        let y_plus = self.y_plus.interpolate_to(&grid);
        let y_minus = self.y_minus.interpolate_to(&grid);
        let z_plus = self.z_plus.interpolate_to(&grid);
        let z_minus = self.z_minus.interpolate_to(&grid);
        let rel = |r: GridFunction, v: &GridFunction| r.l2_norm() / v.l2_norm();
        let residual_plus = rel(op.lcal(&y_plus).axpy(-self.e0, &y_plus), &y_plus);
        let residual_minus = rel(op.lcal(&y_minus).axpy(self.e0, &y_minus), &y_minus);
        Ok(Self {
            y_plus,
            y_minus,
            z_plus,
            z_minus,
            residual_plus,
            residual_minus,
            op,
            ..self.clone()
        })
    }
}

/// Real representative of a complex eigenvector: rotate the largest entry onto
/// the positive real axis and drop the imaginary part.
fn realify(column: impl Iterator<Item = Complex64>) -> Vec<f64> {
    let v: Vec<Complex64> = column.collect();
    let pivot = v
        .iter()
        .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
        .copied()
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    v.iter().map(|c| (c * phase).re).collect()
}

fn to_col(v: &[f64]) -> Mat<f64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

/// Dense eigendecomposition of `𝓛`, isolation of `±e₀` and construction of
/// the normalized `𝒴±`, `Z±`.
pub fn compute_spectrum(ctx: &SolitonContext, grid: Grid, tol: SpectralTolerances) -> Result<SpectralData> {
    ctx.require_supercritical()?;
    let op = Linearization::new(ctx, grid);
    let n = grid.n_points();
    let m = op.lcal_matrix();
    let eig = m
        .eigen()
        .map_err(|e| Error::LinearAlgebra(format!("eigendecomposition failed: {e:?}")))?;
    let values: Vec<Complex64> = (0..n).map(|i| {
        let c = eig.S()[i];
        Complex64::new(c.re, c.im)
    }).collect();
    let radius = values.iter().fold(0.0f64, |r, c| r.max(c.norm()));
    let imag_tol = tol.imag_factor * radius;
    let is_real_isolated =
        |c: &Complex64| c.im.abs() < imag_tol && c.re.abs() > tol.real_tol && c.norm() > tol.kernel_tol;
    let positive: Vec<usize> = (0..n).filter(|&i| is_real_isolated(&values[i]) && values[i].re > 0.0).collect();
    if positive.len() != 1 {
        return Err(Error::SpectralAmbiguity {
            found: positive.len(),
            candidates: positive.iter().map(|&i| values[i].re).collect(),
        });
    }
    let negative: Vec<usize> = (0..n).filter(|&i| is_real_isolated(&values[i]) && values[i].re < 0.0).collect();
    if negative.len() != 1 {
        return Err(Error::SpectralAmbiguity {
            found: negative.len(),
            candidates: negative.iter().map(|&i| values[i].re).collect(),
        });
    }
    let (ip, im) = (positive[0], negative[0]);
    let e0_dense = values[ip].re;
    let e0_mirror = values[im].re;
    let kernel: Vec<usize> = (0..n).filter(|&i| values[i].norm() <= tol.kernel_tol).collect();
    let max_essential_real = (0..n)
        .filter(|&i| i != ip && i != im && !kernel.contains(&i))
        .fold(0.0f64, |r, i| r.max(values[i].re.abs()));

    let u = eig.U();
    let column = |j: usize| (0..n).map(move |i| {
        let c = u[(i, j)];
        Complex64::new(c.re, c.im)
    });
    let raw_plus = realify(column(ip));
    let raw_minus = realify(column(im));

    // one step of inverse iteration polishes the realified eigenvector
    let shifted = Mat::from_fn(n, n, |i, j| m[(i, j)] - if i == j { e0_dense } else { 0.0 });
    let lu = shifted.partial_piv_lu();
    let sol = lu.solve(to_col(&raw_plus));
    let norm = (0..n).map(|i| sol[(i, 0)] * sol[(i, 0)]).sum::<f64>().sqrt();
    let y = GridFunction::new(grid, (0..n).map(|i| sol[(i, 0)] / norm).collect())?;

    let y_check = y.reflect();
    let z_check = op.l(&y_check);
    let e0 = op.lcal(&y).inner_unchecked(&z_check) / y.inner_unchecked(&z_check);

    let minus = GridFunction::new(grid, raw_minus)?;
    let s = minus.inner_unchecked(&y_check) / y_check.inner_unchecked(&y_check);
    let reflection_defect = minus.axpy(-s, &y_check).l2_norm() / minus.l2_norm();

    let eta = y.inner_unchecked(&z_check);
    let mut y_plus = y.scale(1.0 / eta.abs().sqrt());
    let mut y_minus = y_plus.reflect().scale(eta.signum());
    let q_prime = op.q_prime.clone();
    if q_prime.inner_unchecked(&y_plus.dx()) < 0.0 {
        y_plus = y_plus.scale(-1.0);
        y_minus = y_minus.scale(-1.0);
    }
    let z_plus = op.l(&y_plus);
    let z_minus = op.l(&y_minus);
    let certificate = NormalizationCertificate {
        yp_zm: y_plus.inner_unchecked(&z_minus),
        ym_zp: y_minus.inner_unchecked(&z_plus),
        yp_zp: y_plus.inner_unchecked(&z_plus),
        ym_zm: y_minus.inner_unchecked(&z_minus),
        zp_dq: z_plus.inner_unchecked(&q_prime),
        zm_dq: z_minus.inner_unchecked(&q_prime),
        dq_dyp: q_prime.inner_unchecked(&y_plus.dx()),
    };
    let residual_plus = op.lcal(&y_plus).axpy(-e0, &y_plus).l2_norm() / y_plus.l2_norm();
    let residual_minus = op.lcal(&y_minus).axpy(e0, &y_minus).l2_norm() / y_minus.l2_norm();
    let adjoint_residual_plus = op.l(&z_plus.dx()).axpy(e0, &z_plus).l2_norm() / z_plus.l2_norm();
    let adjoint_residual_minus = op.l(&z_minus.dx()).axpy(-e0, &z_minus).l2_norm() / z_minus.l2_norm();

    Ok(SpectralData {
        e0,
        mu: decay_rate_mu(e0)?,
        y_plus,
        y_minus,
        z_plus,
        z_minus,
        residual_plus,
        residual_minus,
        adjoint_residual_plus,
        adjoint_residual_minus,
        certificate,
        eta,
        e0_dense,
        e0_mirror,
        reflection_defect,
        max_essential_real,
        kernel_cluster: kernel.iter().map(|&i| values[i]).collect(),
        spectral_radius: radius,
        eigenvalues: values,
        tolerances: tol,
        op,
    })
}

/// Roots of `x³ - x - λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicRoots {
    pub lambda: f64,
    pub sigma1: Complex64,
    pub sigma2: Complex64,
    pub sigma3: f64,
}

/// Which of the three root configurations `λ` falls in, relative to the
/// double-root threshold `2/(3√3)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootCase {
    /// `λ > 2/(3√3)`: a complex pair with real part `-σ₃/2`.
    ComplexPair,
    /// `λ = 2/(3√3)`: a double root `-1/√3`.
    DoubleRoot,
    /// `0 ≤ λ < 2/(3√3)`: three real roots.
    ThreeReal,
}

impl CubicRoots {
    pub fn case(&self) -> RootCase {
        let crit = 2.0 / (3.0 * 3f64.sqrt());
        if (self.lambda - crit).abs() <= 1e-12 {
            RootCase::DoubleRoot
        } else if self.lambda > crit {
            RootCase::ComplexPair
        } else {
            RootCase::ThreeReal
        }
    }

    pub fn roots(&self) -> [Complex64; 3] {
        [self.sigma1, self.sigma2, Complex64::new(self.sigma3, 0.0)]
    }
}

pub fn cubic_roots(lambda: f64) -> Result<CubicRoots> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("cubic roots need λ >= 0, got {lambda}")));
    }
    let f = |x: f64| x * x * x - x - lambda;
    // f is convex and increasing right of 1/√3, so Newton from the right
    // converges monotonically to the real root
    let mut x = 1.0 + lambda;
    for _ in 0..200 {
        let dx = f(x) / (3.0 * x * x - 1.0);
        x -= dx;
        if dx.abs() <= 1e-16 * x.abs() {
            break;
        }
    }
    let s3 = x;
    // x³ - x - λ = (x - σ₃)(x² + σ₃x + σ₃² - 1)
    let disc = 4.0 - 3.0 * s3 * s3;
    let (mut r1, mut r2) = if disc >= 0.0 {
        let d = disc.sqrt();
        (Complex64::new((-s3 - d) / 2.0, 0.0), Complex64::new((-s3 + d) / 2.0, 0.0))
    } else {
        let d = (-disc).sqrt();
        (Complex64::new(-s3 / 2.0, -d / 2.0), Complex64::new(-s3 / 2.0, d / 2.0))
    };
    let polish = |mut z: Complex64| {
        for _ in 0..3 {
            let d = 3.0 * z * z - 1.0;
            if d.norm() < 1e-6 {
                break;
            }
            z -= (z * z * z - z - lambda) / d;
        }
        z
    };
    if disc.abs() > 1e-10 {
        r1 = polish(r1);
        r2 = polish(r2);
        if disc < 0.0 {
            // keep the pair exactly conjugate
            let re = 0.5 * (r1.re + r2.re);
            let im = 0.5 * (r2.im - r1.im).abs();
            r1 = Complex64::new(re, -im);
            r2 = Complex64::new(re, im);
        }
    }
    Ok(CubicRoots {
        lambda,
        sigma1: r1,
        sigma2: r2,
        sigma3: s3,
    })
}

/// `μ = ¼ min_{λ ≥ e₀} (σ₃, -Re σ₂, e₀, 1)`, evaluated on a dense sample of
/// `[e₀, e₀ + 10]`; since `σ₃` and `-Re σ₂` are nondecreasing the minimum sits
/// at `λ = e₀`, which is included.
pub fn decay_rate_mu(e0: f64) -> Result<f64> {
    if !(e0 > 0.0) {
        return Err(Error::Domain(format!("decay rate needs e0 > 0, got {e0}")));
    }
    let mut m = e0.min(1.0);
    for i in 0..=2000 {
        let r = cubic_roots(e0 + 10.0 * f64::from(i) / 2000.0)?;
        m = m.min(r.sigma3).min(-r.sigma2.re);
    }
    Ok(0.25 * m)
}

/// Subspace constraints for [`coercivity_sigma`].
#[derive(Clone, Debug)]
pub enum Constraints {
    /// Orthogonal to `Z₊`, `Z₋`, `Q'`.
    Adjoint,
    /// Orthogonal to `Q^{(p+1)/2}`, `Q'`.
    GroundState,
    None,
    Custom(Vec<GridFunction>),
}

/// Minimum of `(Lv,v)/‖v‖²_{H¹}` over grid functions orthogonal to the
/// selected constraints, by a projected symmetric eigensolve.
pub fn coercivity_sigma(ctx: &SolitonContext, sd: &SpectralData, constraints: &Constraints) -> Result<f64> {
    let op = &sd.op;
    let grid = *op.grid();
    let n = grid.n_points();
    let cons: Vec<GridFunction> = match constraints {
        Constraints::Adjoint => vec![sd.z_plus.clone(), sd.z_minus.clone(), op.q_prime.clone()],
        Constraints::GroundState => vec![ctx.ground_state(&grid), op.q_prime.clone()],
        Constraints::None => Vec::new(),
        Constraints::Custom(v) => {
            for c in v {
                grid.ensure_same(c.grid())?;
            }
            v.clone()
        }
    };
    if cons.len() >= n {
        return Err(Error::Usage(format!(
            "{} constraints leave no admissible subspace on {grid}",
            cons.len()
        )));
    }
    let l = op.l_matrix();
    let b = op.h1_matrix();
    let (a_red, b_red) = if cons.is_empty() {
        (l, b)
    } else {
        let c = Mat::from_fn(n, cons.len(), |i, j| cons[j].values()[i]);
        let q = c.qr().compute_Q();
        let p = q.get(.., cons.len()..).to_owned();
        let pt = p.transpose();
        (pt * &l * &p, pt * &b * &p)
    };
    let sym = |m: &Mat<f64>| Mat::from_fn(m.nrows(), m.ncols(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let b_eig = sym(&b_red)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("H¹ Gram eigensolve failed: {e:?}")))?;
    let k = b_red.nrows();
    let bu = b_eig.U();
    let bs = b_eig.S();
    let w = Mat::from_fn(k, k, |i, j| bu[(i, j)] / bs[j].sqrt());
    let c = w.transpose() * sym(&a_red) * &w;
    let vals = sym(&c)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("projected eigensolve failed: {e:?}")))?;
    Ok(vals[0])
}

/// Solves `(𝓛 - shift) z = rhs` densely.
pub fn resolvent_solve(sd: &SpectralData, rhs: &GridFunction, shift: f64) -> Result<GridFunction> {
    let op = &sd.op;
    op.grid.ensure_same(rhs.grid())?;
    let target = Complex64::new(shift, 0.0);
    let distance = sd
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |d, c| d.min((c - target).norm()));
    let tolerance = sd.tolerances.spectral_gap_tol * sd.e0.max(1.0);
    if distance <= tolerance {
        return Err(Error::NearSingular { shift, distance, tolerance });
    }
    let n = op.grid.n_points();
    let mut m = op.lcal_matrix();
    for i in 0..n {
        m[(i, i)] -= shift;
    }
    let sol = m.partial_piv_lu().solve(to_col(rhs.values()));
    let z = GridFunction::new(op.grid, (0..n).map(|i| sol[(i, 0)]).collect())?;
    let residual = op.lcal(&z).axpy(-shift, &z).zip_with(rhs, |a, b| a - b).l2_norm();
    let scale = rhs.l2_norm();
    if residual > 1e-9 * scale.max(f64::MIN_POSITIVE) && scale > 0.0 {
        return Err(Error::LinearAlgebra(format!(
            "resolvent residual {residual:e} exceeds 1e-9 of ‖rhs‖ = {scale:e}"
        )));
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_isolates_e0_and_certifies_normalization() {
        let ctx = SolitonContext::new(6).unwrap();
        let grid = Grid::new(40.0, 1024).unwrap();
        let sd = compute_spectrum(&ctx, grid, SpectralTolerances::default()).unwrap();
        let shot = crate::shooting::Shooting::new(&ctx, grid).shoot_e0((0.1, 3.0)).unwrap();
        assert!((sd.e0 - shot).abs() < 1e-6 * shot, "{} vs {shot}", sd.e0);
        assert!((sd.e0 + sd.e0_mirror).abs() < 1e-8);
        assert!(sd.kernel_cluster.iter().all(|c| c.norm() < 1e-3));
        let c = sd.certificate;
        assert!((c.yp_zm - 1.0).abs() < 1e-8 && c.yp_zp.abs() < 1e-8);
        assert!(c.zp_dq.abs() < 1e-8 && c.zm_dq.abs() < 1e-8 && c.dq_dyp > 0.0);
        assert!(sd.reflection_defect < 1e-8);
        assert!(sd.mu > 0.0 && sd.mu < 1.0);

        // a kernel tolerance that swallows ±e0 leaves no candidate
        let wide = SpectralTolerances { kernel_tol: 1.0, ..Default::default() };
        assert!(matches!(
            compute_spectrum(&ctx, grid, wide),
            Err(Error::SpectralAmbiguity { found: 0, .. })
        ));
    }

    #[test]
    fn resolvent_and_coercivity() {
        let ctx = SolitonContext::new(6).unwrap();
        let grid = Grid::new(40.0, 512).unwrap();
        let sd = compute_spectrum(&ctx, grid, SpectralTolerances::default()).unwrap();
        let rhs = grid.sample(|x| (-x * x).exp() * x);
        let z = resolvent_solve(&sd, &rhs, 2.0 * sd.e0).unwrap();
        let back = sd.op.apply_lcal(&z).unwrap().axpy(-2.0 * sd.e0, &z);
        assert!((&back - &rhs).l2_norm() < 1e-9 * rhs.l2_norm());
        assert!(matches!(resolvent_solve(&sd, &rhs, sd.e0), Err(Error::NearSingular { .. })));

        let constrained = coercivity_sigma(&ctx, &sd, &Constraints::Adjoint).unwrap();
        let ground = coercivity_sigma(&ctx, &sd, &Constraints::GroundState).unwrap();
        let free = coercivity_sigma(&ctx, &sd, &Constraints::None).unwrap();
        assert!(constrained > 0.0 && ground > 0.0, "{constrained} {ground}");
        assert!(free < 0.0, "L has a negative direction, got {free}");
    }

    #[test]
    fn cubic_root_cases() {
        let s = 1.0 / 3f64.sqrt();
        let r = cubic_roots(2.0 / (3.0 * 3f64.sqrt())).unwrap();
        assert_eq!(r.case(), RootCase::DoubleRoot);
        assert!((r.sigma3 - 2.0 * s).abs() < 1e-12);
        assert!((r.sigma1.re + s).abs() < 1e-7 && (r.sigma2.re + s).abs() < 1e-7);
        let r = cubic_roots(0.0).unwrap();
        assert_eq!(r.case(), RootCase::ThreeReal);
        assert!((r.sigma1.re + 1.0).abs() < 1e-15 && r.sigma2.norm() < 1e-15 && (r.sigma3 - 1.0).abs() < 1e-15);
        let r = cubic_roots(1.0).unwrap();
        assert_eq!(r.case(), RootCase::ComplexPair);
        assert!((r.sigma1.re + r.sigma3 / 2.0).abs() < 1e-12);
        assert!((r.sigma2.re + r.sigma3 / 2.0).abs() < 1e-12);
        assert!(cubic_roots(-0.1).is_err());
    }

    #[test]
    fn cubic_root_residuals() {
        for i in 0..200 {
            let lambda = f64::from(i) * 0.05;
            let r = cubic_roots(lambda).unwrap();
            for z in r.roots() {
                assert!((z * z * z - z - lambda).norm() <= 1e-12 * (1.0 + lambda), "λ = {lambda}");
            }
            if lambda > 0.0 {
                assert!(r.sigma3 > 1.0 / 3f64.sqrt());
                assert!(r.sigma1.re <= r.sigma2.re && r.sigma2.re < 0.0);
            }
        }
    }

    #[test]
    fn mu_bounds() {
        for e0 in [0.05, 0.3, 0.6345, 2.0, 10.0] {
            let mu = decay_rate_mu(e0).unwrap();
            assert!(mu > 0.0 && mu < e0 && mu <= 0.25);
        }
        let mut prev = 0.0;
        for i in 1..50 {
            let s3 = cubic_roots(f64::from(i) * 0.2).unwrap().sigma3;
            assert!(s3 > prev);
            prev = s3;
        }
        assert!(decay_rate_mu(0.0).is_err());
    }

    #[test]
    fn operator_identities_on_q() {
        let ctx = SolitonContext::new(6).unwrap();
        let grid = Grid::new(40.0, 1024).unwrap();
        let op = Linearization::new(&ctx, grid);
        let dq = op.q_prime().clone();
        assert!(op.apply_l(&dq).unwrap().l2_norm() <= 1e-8 * dq.l2_norm());
        let s = ctx.scaling_derivative_s(&grid);
        let q = op.q().clone();
        assert!((&op.apply_l(&s).unwrap() + &q).l2_norm() <= 1e-8 * q.l2_norm());
        let g = ctx.ground_state(&grid);
        let r = op.apply_l(&g).unwrap().axpy(ctx.lambda0(), &g);
        assert!(r.l2_norm() <= 1e-8 * ctx.lambda0() * g.l2_norm());
        let lq_q = op.apply_l(&q).unwrap().inner(&q).unwrap();
        let q7: f64 = q.values().iter().map(|v| v.powi(7)).sum::<f64>() * grid.spacing();
        assert!((lq_q / (-5.0 * q7) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn dense_matrices_match_operators() {
        let ctx = SolitonContext::new(6).unwrap();
        let grid = Grid::new(20.0, 64).unwrap();
        let op = Linearization::new(&ctx, grid);
        let u = grid.sample(|x| (-(x - 1.0) * (x - 1.0)).exp() * (1.0 + x));
        let m = op.lcal_matrix();
        let mu = &m * to_col(u.values());
        let direct = op.apply_lcal(&u).unwrap();
        for i in 0..64 {
            assert!((mu[(i, 0)] - direct.values()[i]).abs() < 1e-10);
        }
        let l = op.l_matrix();
        let lu = &l * to_col(u.values());
        let direct = op.apply_l(&u).unwrap();
        for i in 0..64 {
            assert!((lu[(i, 0)] - direct.values()[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn reflection_conjugates_lcal() {
        let ctx = SolitonContext::new(6).unwrap();
        let grid = Grid::new(40.0, 512).unwrap();
        let op = Linearization::new(&ctx, grid);
        let u = grid.sample(|x| (-(x - 2.0) * (x - 2.0) / 3.0).exp() + 0.3 * (-(x + 1.0) * (x + 1.0)).exp());
        let lhs = op.apply_lcal(&u.reflect()).unwrap();
        let rhs = op.apply_lcal(&u).unwrap().reflect();
        assert!((&lhs + &rhs).max_abs() <= 1e-10 * rhs.max_abs());
    }
}
