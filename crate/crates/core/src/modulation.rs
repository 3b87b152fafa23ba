//! Decomposition of states near the soliton family.
//!
//! A state close to the tube `{Q(· - y)}` is written `u(· + a) = Q + ε` with the
//! center `a` fixed by `(ε, Q') = 0`. The defect is then projected on `Z±`,
//! paired with the virial weight `ζ` and measured on right half-lines.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::Trajectory;
use crate::fit::{centered_derivative, linear_fit, LinearFit};
use crate::grid::{Grid, GridFunction};
use crate::linop::SpectralData;
use crate::profiles::SolitonContext;

/// Fraction of `‖Q‖_{H¹}` used as the default tube radius for modulation.
pub const DEFAULT_TUBE_FRACTION: f64 = 0.3;
/// Newton tolerance on `|(u(·+a) - Q, Q')|`.
pub const CENTER_TOL: f64 = 1e-11;

/// Right half-line offsets used for tail masses along tracked runs.
pub fn default_tail_offsets() -> Vec<f64> {
    (2..=16).map(f64::from).collect()
}

/// `(1 + k²) û conj(q̂)` with the Nyquist mode removed, the kernel of all
/// `H¹` correlations against translates of `q`.
fn h1_cross_spectrum(u: &GridFunction, q: &GridFunction) -> Vec<Complex64> {
    let ks = u.grid().wavenumbers();
    let nyq = u.len() / 2;
    let (a, b) = (u.spectrum(), q.spectrum());
    a.iter()
        .zip(&b)
        .zip(&ks)
        .enumerate()
        .map(|(m, ((x, y), k))| if m == nyq { Complex64::new(0.0, 0.0) } else { (1.0 + k * k) * x * y.conj() })
        .collect()
}

/// `Σ_m k_m^order X_m e^{i k_m y}` (real part), scaled to an inner product.
fn phase_sum(grid: &Grid, x: &[Complex64], y: f64, order: i32) -> f64 {
    let ks = grid.wavenumbers();
    let scale = grid.spacing() / x.len() as f64;
    let unit = Complex64::new(0.0, 1.0).powi(order);
    scale
        * x.iter()
            .zip(&ks)
            .map(|(c, k)| (unit * k.powi(order) * c * Complex64::from_polar(1.0, k * y)).re)
            .sum::<f64>()
}

/// Wraps `y` into `[-L, L)`.
fn wrap(grid: &Grid, y: f64) -> f64 {
    let l = grid.half_length();
    (y + l).rem_euclid(2.0 * l) - l
}

/// `inf_y ‖u - Q_c(· - y)‖_{H¹}` and its minimizer.
///
/// The `H¹` correlation is scanned on all grid shifts with one FFT, refined
/// by a parabola through the best node and its neighbours, then polished by
/// Newton on the correlation derivative. The distance itself is evaluated
/// directly (not from the expanded square) to keep small distances accurate.
pub fn tube_distance(u: &GridFunction, ctx: &SolitonContext) -> (f64, f64) {
    let grid = *u.grid();
    let q = ctx.sample_qc(&grid);
    let x = h1_cross_spectrum(u, &q);
    let n = grid.n_points();
    let dx = grid.spacing();
    let corr: Vec<f64> = crate::grid::inverse(&x).into_iter().map(|v| v * dx).collect();
    let j = (0..n).max_by(|&a, &b| corr[a].total_cmp(&corr[b])).unwrap_or(0);
    let (cm, c0, cp) = (corr[(j + n - 1) % n], corr[j], corr[(j + 1) % n]);
    let curv = cm - 2.0 * c0 + cp;
    let offset = if curv < 0.0 { (0.5 * (cm - cp) / curv).clamp(-1.0, 1.0) } else { 0.0 };
    let mut y = wrap(&grid, (j as f64 + offset) * dx);
    for _ in 0..20 {
        let d1 = phase_sum(&grid, &x, y, 1);
        let d2 = phase_sum(&grid, &x, y, 2);
        if d2 >= 0.0 {
            break;
        }
        let step = (-d1 / d2).clamp(-dx, dx);
        y = wrap(&grid, y + step);
        if step.abs() < 1e-15 * grid.half_length() {
            break;
        }
    }
    let distance = (u - &q.shift(-y)).h1_norm();
    (distance, y)
}

/// Modulation center `a` with `(u(·+a) - Q_c, Q_c') = 0`.
///
/// Newton starts from `guess` when given (continuation along a trajectory),
/// otherwise from the tube-distance minimizer. Fails when `u` is farther than
/// `eps0` from the tube or Newton stagnates.
pub fn center(u: &GridFunction, ctx: &SolitonContext, guess: Option<f64>, eps0: f64) -> Result<f64> {
    let grid = *u.grid();
    let q = ctx.sample_qc(&grid);
    let dq = q.dx();
    let start = match guess {
        Some(a) => a,
        None => {
            let (d, y) = tube_distance(u, ctx);
            if d > eps0 {
                return Err(Error::Modulation(format!("state is {d:.3e} from the soliton tube, radius {eps0:.3e}")));
            }
            y
        }
    };
    let (uh, dqh) = (u.spectrum(), dq.spectrum());
    let nyq = u.len() / 2;
    let x: Vec<Complex64> = uh
        .iter()
        .zip(&dqh)
        .enumerate()
        .map(|(m, (a, b))| if m == nyq { Complex64::new(0.0, 0.0) } else { a * b.conj() })
        .collect();
    let base = q.inner_unchecked(&dq);
    let mut a = start;
    let mut g = phase_sum(&grid, &x, a, 0) - base;
    let mut iter = 0;
    while g.abs() > CENTER_TOL {
        let slope = phase_sum(&grid, &x, a, 1);
        if slope.abs() < 1e-300 || iter == 60 {
            return Err(Error::Modulation(format!(
                "center Newton stagnated at a = {a}, |g| = {:.3e} after {iter} iterations",
                g.abs()
            )));
        }
        a = wrap(&grid, a - g / slope);
        g = phase_sum(&grid, &x, a, 0) - base;
        iter += 1;
    }
    let eps = &u.shift(a) - &q;
    let size = eps.h1_norm();
    if size > eps0 {
        let (d, _) = tube_distance(u, ctx);
        if d > eps0 {
            return Err(Error::Modulation(format!("state left the soliton tube: distance {d:.3e} > {eps0:.3e}")));
        }
    }
    Ok(a)
}

/// Output of [`decompose`].
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub center: f64,
    pub eps: GridFunction,
    /// `(ε, Z₊)`.
    pub alpha_plus: f64,
    /// `(ε, Z₋)`.
    pub alpha_minus: f64,
}

pub fn decompose(u: &GridFunction, sd: &SpectralData, ctx: &SolitonContext, guess: Option<f64>, eps0: f64) -> Result<Decomposition> {
    sd.grid().ensure_same(u.grid())?;
    let a = center(u, ctx, guess, eps0)?;
    let eps = &u.shift(a) - &ctx.sample_qc(u.grid());
    Ok(Decomposition {
        center: a,
        alpha_plus: eps.inner_unchecked(&sd.z_plus),
        alpha_minus: eps.inner_unchecked(&sd.z_minus),
        eps,
    })
}

/// Linear projections `((ε, Z₊), (ε, Z₋))` without recentering.
pub fn project(eps: &GridFunction, sd: &SpectralData) -> Result<(f64, f64)> {
    Ok((eps.inner(&sd.z_plus)?, eps.inner(&sd.z_minus)?))
}

/// Virial weight `ζ(x) = ∫_{-L}^x (S + βQ^{(p+1)/2})` with `β = -∫QS / ∫Q^{(p+3)/2}`.
#[derive(Clone, Debug)]
pub struct Virial {
    pub beta: f64,
    pub zeta: GridFunction,
    /// `Q^{(p+1)/2}`, the weight of `a(t) = ∫εQ^{(p+1)/2}`.
    pub ground: GridFunction,
    pub lambda0: f64,
}

impl Virial {
    pub fn new(ctx: &SolitonContext, grid: &Grid) -> Self {
        let q = ctx.sample_q(grid);
        let s = ctx.scaling_derivative_s(grid);
        let ground = ctx.ground_state(grid);
        let e = 0.5 * f64::from(ctx.p + 3);
        let beta = -q.inner_unchecked(&s) / q.map(|v| v.powf(e)).integral();
        let zeta = s.axpy(beta, &ground).primitive();
        Self {
            beta,
            zeta,
            ground,
            lambda0: ctx.lambda0(),
        }
    }

    /// `J = ∫ εζ`.
    pub fn j(&self, eps: &GridFunction) -> Result<f64> {
        eps.inner(&self.zeta)
    }

    /// `a = ∫ εQ^{(p+1)/2}`.
    pub fn a(&self, eps: &GridFunction) -> Result<f64> {
        eps.inner(&self.ground)
    }
}

/// `∫_{x>x₀} (u² + u_x²)(x + x_center) dx` for each offset, truncated at the
/// right edge of the domain (no periodic wrap-around).
pub fn tail_mass(u: &GridFunction, x_center: f64, offsets: &[f64]) -> Vec<f64> {
    let grid = *u.grid();
    let dx = grid.spacing();
    let mid = grid.n_points() / 2;
    offsets
        .iter()
        .map(|&x0| {
            let s = x_center + x0;
            let v = u.shift(s);
            let vx = v.dx();
            let density: Vec<f64> = v.values().iter().zip(vx.values()).map(|(a, b)| a * a + b * b).collect();
            let end = grid.half_length() - s;
            let mut total = 0.5 * density[mid] * dx;
            for (j, d) in density.iter().enumerate().skip(mid + 1) {
                if grid.x(j) > end {
                    break;
                }
                total += d * dx;
            }
            total
        })
        .collect()
}

/// One tracked sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulationSample {
    pub t: f64,
    pub center: f64,
    pub eps_h1: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    /// `∫εQ^{(p+1)/2}`.
    pub a: f64,
    pub virial_j: f64,
    pub mass: f64,
    pub energy: f64,
    pub weinstein: f64,
    pub tails: Vec<f64>,
    /// `|(ε, Q')| / (‖ε‖‖Q'‖)`.
    pub orthogonality: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModulationTrack {
    pub offsets: Vec<f64>,
    pub eps0: f64,
    pub samples: Vec<ModulationSample>,
    /// Set when modulation failed before the trajectory ended.
    pub stopped: Option<(f64, String)>,
}

impl ModulationTrack {
    /// Column order of [`ModulationTrack::to_csv`].
    pub fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = [
            "t", "center", "eps_h1", "alpha_plus", "alpha_minus", "a", "virial_j", "mass", "energy", "weinstein",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        cols.extend(self.offsets.iter().map(|x| format!("tail_{x}")));
        cols
    }

    /// CSV with 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns().join(",");
        out.push('\n');
        for s in &self.samples {
            let mut row = vec![
                s.t, s.center, s.eps_h1, s.alpha_plus, s.alpha_minus, s.a, s.virial_j, s.mass, s.energy, s.weinstein,
            ];
            row.extend(&s.tails);
            out.push_str(&row.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn max_orthogonality(&self) -> f64 {
        self.samples.iter().map(|s| s.orthogonality).fold(0.0, f64::max)
    }

    /// `sup_{t, x₀} tail_mass · e^{x₀/4}`.
    pub fn tail_bound(&self) -> f64 {
        self.samples
            .iter()
            .flat_map(|s| s.tails.iter().zip(&self.offsets).map(|(m, x0)| m * (0.25 * x0).exp()))
            .fold(0.0, f64::max)
    }
}

/// Tracks the decomposition along a trajectory with Newton continuation,
/// stopping at the first modulation failure.
pub fn track(traj: &Trajectory, sd: &SpectralData, ctx: &SolitonContext, eps0: f64, offsets: &[f64]) -> Result<ModulationTrack> {
    let grid = *sd.grid();
    let virial = Virial::new(ctx, &grid);
    let dq = ctx.sample_qc(&grid).dx();
    let dq_norm = dq.l2_norm();
    let mut samples = Vec::with_capacity(traj.times.len());
    let mut guess = None;
    let mut stopped = None;
    for ((t, u), f) in traj.times.iter().zip(&traj.snapshots).zip(&traj.functionals) {
        let d = match decompose(u, sd, ctx, guess, eps0) {
            Ok(d) => d,
            Err(e) => {
                stopped = Some((*t, e.to_string()));
                break;
            }
        };
        guess = Some(d.center);
        let eps_l2 = d.eps.l2_norm();
        let orthogonality = if eps_l2 > 0.0 { d.eps.inner_unchecked(&dq).abs() / (eps_l2 * dq_norm) } else { 0.0 };
        samples.push(ModulationSample {
            t: *t,
            center: d.center,
            eps_h1: d.eps.h1_norm(),
            alpha_plus: d.alpha_plus,
            alpha_minus: d.alpha_minus,
            a: virial.a(&d.eps)?,
            virial_j: virial.j(&d.eps)?,
            mass: f.mass,
            energy: f.energy,
            weinstein: f.weinstein,
            tails: tail_mass(u, d.center, offsets),
            orthogonality,
        });
    }
    Ok(ModulationTrack {
        offsets: offsets.to_vec(),
        eps0,
        samples,
        stopped,
    })
}

/// Comparison of the finite-difference `J'` with `βλ₀ a(t)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JPrimeReport {
    pub beta: f64,
    pub lambda0: f64,
    /// `max |J' - βλ₀a| / ‖ε‖²_{H¹}` over interior samples.
    pub remainder_constant: f64,
    /// Median of the same ratio, less sensitive to the early transient.
    pub remainder_median: f64,
    /// Start of the final window on which `a(t)` keeps one sign.
    pub persistence_start: Option<f64>,
    /// Sign of `a` on that window.
    pub sign: i32,
    /// Fraction of the tracked span covered by the window.
    pub persistence_fraction: f64,
    /// `J` strictly monotone with the sign of `a` across the window.
    pub j_monotone: bool,
    pub samples: usize,
}

pub fn jprime_check(track: &ModulationTrack, ctx: &SolitonContext, grid: &Grid) -> Result<JPrimeReport> {
    let virial = Virial::new(ctx, grid);
    let ts = track.times();
    let js: Vec<f64> = track.samples.iter().map(|s| s.virial_j).collect();
    let dj = centered_derivative(&ts, &js)?;
    let mut ratios: Vec<f64> = track
        .samples
        .iter()
        .zip(&dj)
        .filter_map(|(s, d)| {
            let k = (*d)? - virial.beta * virial.lambda0 * s.a;
            (s.eps_h1 > 0.0).then(|| k.abs() / (s.eps_h1 * s.eps_h1))
        })
        .collect();
    ratios.sort_by(f64::total_cmp);
    let remainder_constant = ratios.last().copied().unwrap_or(0.0);
    let remainder_median = ratios.get(ratios.len() / 2).copied().unwrap_or(0.0);

    let sign_of = |v: f64| if v > 0.0 { 1 } else if v < 0.0 { -1 } else { 0 };
    let last_sign = track.samples.last().map(|s| sign_of(s.a)).unwrap_or(0);
    let mut start = track.samples.len();
    while start > 0 && sign_of(track.samples[start - 1].a) == last_sign && last_sign != 0 {
        start -= 1;
    }
    let window = &track.samples[start..];
    let span = ts.last().zip(ts.first()).map(|(b, a)| b - a).unwrap_or(0.0);
    let persistence_fraction = match (window.first(), window.last()) {
        (Some(a), Some(b)) if span > 0.0 => (b.t - a.t) / span,
        _ => 0.0,
    };
    let j_monotone = window.len() >= 2
        && window
            .windows(2)
            .all(|w| sign_of(w[1].virial_j - w[0].virial_j) == last_sign);
    Ok(JPrimeReport {
        beta: virial.beta,
        lambda0: virial.lambda0,
        remainder_constant,
        remainder_median,
        persistence_start: window.first().map(|s| s.t),
        sign: last_sign,
        persistence_fraction,
        j_monotone,
        samples: ratios.len(),
    })
}

/// `max |x'(t) - (1 - frame_speed)| / ‖ε‖_{H¹}`: the modulation-speed constant
/// for a run recorded in a frame moving at `frame_speed`.
pub fn modulation_speed_constant(track: &ModulationTrack, frame_speed: f64) -> Result<f64> {
    let ts = track.times();
    let xs: Vec<f64> = track.samples.iter().map(|s| s.center).collect();
    let dx = centered_derivative(&ts, &xs)?;
    Ok(track
        .samples
        .iter()
        .zip(&dx)
        .filter_map(|(s, d)| {
            let d = (*d)? + frame_speed - 1.0;
            (s.eps_h1 > 0.0).then(|| d.abs() / s.eps_h1)
        })
        .fold(0.0, f64::max))
}

/// Constants `C±` with `|α₊' - e₀α₊| ≤ C₊(α₊² + α₋²)` and `|α₋' + e₀α₋| ≤ C₋(α₊² + α₋²)`.
pub fn alpha_system_constants(track: &ModulationTrack, e0: f64) -> Result<(f64, f64)> {
    let ts = track.times();
    let ap: Vec<f64> = track.samples.iter().map(|s| s.alpha_plus).collect();
    let am: Vec<f64> = track.samples.iter().map(|s| s.alpha_minus).collect();
    let dp = centered_derivative(&ts, &ap)?;
    let dm = centered_derivative(&ts, &am)?;
    let mut cp = 0.0f64;
    let mut cm = 0.0f64;
    for i in 0..ts.len() {
        let (Some(a), Some(b)) = (dp[i], dm[i]) else { continue };
        let q = ap[i] * ap[i] + am[i] * am[i];
        if q > 0.0 {
            cp = cp.max((a - e0 * ap[i]).abs() / q);
            cm = cm.max((b + e0 * am[i]).abs() / q);
        }
    }
    Ok((cp, cm))
}

/// Fit of `log α₋(t) e^{e₀t}` flattening: returns the late-time limit estimate
/// of `A = lim e^{e₀t} α₋(t)` and the slope of `log |α₋|` (expected `-e₀`).
pub fn fit_amplitude(track: &ModulationTrack, e0: f64) -> Result<(f64, LinearFit)> {
    let ts = track.times();
    let ys: Vec<f64> = track.samples.iter().map(|s| s.alpha_minus.abs()).collect();
    let (xs, ls): (Vec<f64>, Vec<f64>) =
        ts.iter().zip(&ys).filter(|(_, y)| **y > 0.0).map(|(t, y)| (*t, y.ln())).unzip();
    let fit = linear_fit(&xs, &ls)?;
    let last = track
        .samples
        .last()
        .ok_or_else(|| Error::Usage("empty modulation track".into()))?;
    Ok((last.alpha_minus * (e0 * last.t).exp(), fit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::tail_decay_rates;

    fn setup() -> (SolitonContext, Grid) {
        (SolitonContext::new(6).unwrap(), Grid::new(40.0, 1024).unwrap())
    }

    fn eps0(ctx: &SolitonContext, g: &Grid) -> f64 {
        DEFAULT_TUBE_FRACTION * ctx.sample_q(g).h1_norm()
    }

    #[test]
    fn center_of_translates_and_even_perturbations() {
        let (ctx, g) = setup();
        let r = eps0(&ctx, &g);
        assert!(center(&ctx.sample_q(&g), &ctx, None, r).unwrap().abs() < 1e-12);
        let a = center(&ctx.sample_q_translate(&g, 0.3), &ctx, None, r).unwrap();
        assert!((a - 0.3).abs() < 1e-10, "a = {a}");
        let even = g.sample(|x| ctx.q(x) + 0.01 * (-x * x).exp());
        assert!(center(&even, &ctx, None, r).unwrap().abs() < 1e-10);
        assert!(matches!(center(&g.zeros(), &ctx, None, r), Err(Error::Modulation(_))));
    }

    #[test]
    fn tube_distance_cases() {
        let (ctx, g) = setup();
        // N = 1024 leaves an H¹ truncation floor near 1e-10 for Q itself
        let fine = Grid::new(40.0, 2048).unwrap();
        let (d, y) = tube_distance(&ctx.sample_q_translate(&fine, 7.3), &ctx);
        assert!(d <= 1e-10, "d = {d}");
        assert!((y - 7.3).abs() < 1e-9);
        let (d, _) = tube_distance(&g.zeros(), &ctx);
        assert!((d - ctx.sample_q(&g).h1_norm()).abs() < 1e-12);
        let ds: Vec<f64> = [5, 10, 20, 40]
            .iter()
            .map(|&n| tube_distance(&ctx.instability_data(&g, n, 1).unwrap(), &ctx).0)
            .collect();
        assert!(ds[0] > 0.0 && ds[0] < ctx.sample_q(&g).h1_norm());
        assert!(ds.windows(2).all(|w| w[1] < w[0]), "{ds:?}");
    }

    #[test]
    fn virial_weight_properties() {
        let (ctx, g) = setup();
        let v = Virial::new(&ctx, &g);
        assert!(v.beta > 0.0);
        assert!(v.zeta.is_finite());
        let (left, _) = tail_decay_rates(&v.zeta, 5.0, 20.0).unwrap();
        assert!(left > 0.5, "left rate {left}");
        assert_eq!(v.j(&g.zeros()).unwrap(), 0.0);
    }

    #[test]
    fn soliton_tail_masses_decay_like_exp_minus_two_x() {
        let (ctx, g) = setup();
        let m = tail_mass(&ctx.sample_q(&g), 0.0, &[2.0, 4.0, 8.0]);
        assert!((m[1] / m[0] / (-4.0f64).exp() - 1.0).abs() < 0.02, "{m:?}");
        assert!((m[2] / m[1] / (-8.0f64).exp() - 1.0).abs() < 0.02, "{m:?}");
        let left_only = g.sample(|x| (-(x + 20.0) * (x + 20.0)).exp());
        assert!(tail_mass(&left_only, 0.0, &[2.0])[0] < 1e-20);
    }

    #[test]
    fn decomposition_projections() {
        let (ctx, g) = setup();
        let sd = crate::linop::compute_spectrum(&ctx, g, Default::default()).unwrap();
        let r = eps0(&ctx, &g);
        let q = ctx.sample_q(&g);
        let d = decompose(&q, &sd, &ctx, None, r).unwrap();
        assert!(d.alpha_plus.abs() < 1e-12 && d.alpha_minus.abs() < 1e-12 && d.eps.max_abs() < 1e-12);

        // exact pairing of the linear projection
        let delta = 1e-3;
        let (ap, am) = project(&sd.y_plus.scale(delta), &sd).unwrap();
        assert!(ap.abs() < 1e-8 && (am - delta).abs() < 1e-8);

        // recentering moves ε by a multiple of Q' and adds O(δ²) to α±
        let alphas = |delta: f64, v: &GridFunction| {
            let d = decompose(&q.axpy(delta, v), &sd, &ctx, None, r).unwrap();
            (d.alpha_plus, d.alpha_minus)
        };
        let (ap1, am1) = alphas(delta, &sd.y_plus);
        let (ap2, am2) = alphas(0.5 * delta, &sd.y_plus);
        let rp = ap1 / ap2;
        let rm = (am1 - delta) / (am2 - 0.5 * delta);
        assert!((rp - 4.0).abs() < 0.3 && (rm - 4.0).abs() < 0.3, "{rp} {rm}");

        let bump = g.sample(|x| (-(x - 0.5) * (x - 0.5)).exp());
        let (bp, bm) = project(&bump, &sd).unwrap();
        let perp = bump.axpy(-bm, &sd.y_plus).axpy(-bp, &sd.y_minus);
        let (pp, pm) = project(&perp, &sd).unwrap();
        assert!(pp.abs() < 1e-8 && pm.abs() < 1e-8, "{pp:e} {pm:e}");
        let (a1, b1) = alphas(delta, &perp);
        let (a2, b2) = alphas(0.5 * delta, &perp);
        assert!(a1.abs().max(b1.abs()) < 5.0 * delta * delta);
        assert!((a1 / a2 - 4.0).abs() < 0.3 && (b1 / b2 - 4.0).abs() < 0.3);
    }
}
