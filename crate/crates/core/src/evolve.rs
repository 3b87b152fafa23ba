//! Fourier pseudospectral time integration of gKdV.
//!
//! In a frame moving with speed `s`, `v(t,x) = u(t, x + st)` satisfies
//! `v_t = -v_xxx + s v_x - (F(v))_x` with flux `F(v) = v^p`. The linear part
//! has the symbol `ik³ + isk` and is propagated exactly; the flux term is
//! handled by fourth-order exponential time differencing (ETDRK4) with the
//! φ-functions evaluated by contour averaging.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dealias_factor, plans, resize_spectrum, Grid, GridFunction};
use crate::linop::SpectralData;
use crate::profiles::{FunctionalValues, SolitonContext};

/// Reference frame of the computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Frame {
    Lab,
    /// Moves with the unit-speed soliton.
    CoMoving,
    /// Moves with speed `c`.
    Speed(f64),
}

impl Frame {
    pub fn speed(&self) -> f64 {
        match self {
            Frame::Lab => 0.0,
            Frame::CoMoving => 1.0,
            Frame::Speed(c) => *c,
        }
    }
}

/// What to do when the solution reaches the ends of the periodic cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgePolicy {
    Abort,
    Warn,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Time attached to the initial state.
    pub t_start: f64,
    pub frame: Frame,
    pub record_every: usize,
    pub dealias: bool,
    /// Multiplies the flux; `0` gives the linear (Airy) flow.
    pub nonlinearity: f64,
    pub edge_policy: EdgePolicy,
    /// Edge amplitude relative to the peak that triggers the edge policy.
    pub edge_threshold: f64,
    /// Spectral tail (top tenth of the modes, relative to the largest mode)
    /// above which the run stops as unresolved.
    pub tail_limit: f64,
}

impl EvolveConfig {
    pub fn new(dt: f64, t_end: f64, frame: Frame) -> Self {
        Self {
            dt,
            t_end,
            t_start: 0.0,
            frame,
            record_every: 100,
            dealias: true,
            nonlinearity: 1.0,
            edge_policy: EdgePolicy::Abort,
            edge_threshold: 1e-8,
            tail_limit: 1e-3,
        }
    }

    /// Chooses `record_every` so that samples are at most `spacing` apart.
    pub fn with_sample_spacing(mut self, spacing: f64) -> Self {
        self.record_every = ((spacing / self.dt).floor() as usize).max(1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::Config(format!("t_end must be nonnegative, got {}", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be at least 1".into()));
        }
        if let Frame::Speed(c) = self.frame {
            if !c.is_finite() {
                return Err(Error::Config(format!("frame speed must be finite, got {c}")));
            }
        }
        Ok(())
    }
}

/// `1e-4 (L/40)³ (1024/N)³`.
pub fn default_dt(grid: &Grid) -> f64 {
    1e-4 * (grid.half_length() / 40.0).powi(3) * (1024.0 / grid.n_points() as f64).powi(3)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Termination {
    Completed,
    /// Non-finite or overflowing values; carries the last time with a valid state.
    BlowUpSuspected { last_valid_time: f64 },
    EdgeContamination { time: f64, ratio: f64 },
    Unresolved { time: f64, tail: f64 },
    /// Stopped by the observer.
    Stopped { time: f64 },
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<GridFunction>,
    pub functionals: Vec<FunctionalValues>,
    pub termination: Termination,
    pub warnings: Vec<String>,
    pub config: EvolveConfig,
}

impl Trajectory {
    pub fn last(&self) -> &GridFunction {
        self.snapshots.last().expect("trajectories hold the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectories hold the initial state")
    }

    pub fn completed(&self) -> bool {
        self.termination == Termination::Completed
    }
}

/// Maximal relative drifts of the conserved quantities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub mass: f64,
    pub energy: f64,
    pub weinstein: f64,
}

impl ConservationReport {
    pub fn max(&self) -> f64 {
        self.mass.max(self.energy).max(self.weinstein)
    }
}

pub fn conservation_report(traj: &Trajectory) -> Result<ConservationReport> {
    let first = traj
        .functionals
        .first()
        .ok_or_else(|| Error::Usage("empty trajectory".into()))?;
    let drift = |f: fn(&FunctionalValues) -> f64| {
        let base = f(first).abs().max(f64::MIN_POSITIVE);
        traj.functionals.iter().map(|v| (f(v) - f(first)).abs() / base).fold(0.0, f64::max)
    };
    Ok(ConservationReport {
        mass: drift(|v| v.mass),
        energy: drift(|v| v.energy),
        weinstein: drift(|v| v.weinstein),
    })
}

/// Observer verdict after each recorded sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Flux `F` with `v_t = … - (F(v))_x`.
enum Flux<'a> {
    Power { p: u32, scale: f64, pad: usize },
    Linear { weight: &'a [f64] },
}

struct Stepper<'a> {
    n: usize,
    k: Vec<f64>,
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
    flux: Flux<'a>,
    nyquist: usize,
}

impl<'a> Stepper<'a> {
    fn new(grid: &Grid, dt: f64, speed: f64, flux: Flux<'a>) -> Self {
        let n = grid.n_points();
        let k = grid.wavenumbers();
        const M: usize = 32;
        let roots: Vec<Complex64> = (0..M)
            .map(|j| Complex64::from_polar(1.0, PI * (j as f64 + 0.5) * 2.0 / M as f64))
            .collect();
        let mut e = Vec::with_capacity(n);
        let mut e2 = Vec::with_capacity(n);
        let mut q = Vec::with_capacity(n);
        let mut f1 = Vec::with_capacity(n);
        let mut f2 = Vec::with_capacity(n);
        let mut f3 = Vec::with_capacity(n);
        for &kk in &k {
            let l = Complex64::new(0.0, kk * kk * kk + speed * kk);
            let hl = l * dt;
            e.push(hl.exp());
            e2.push((hl * 0.5).exp());
            let (mut sq, mut s1, mut s2, mut s3) = (Complex64::default(), Complex64::default(), Complex64::default(), Complex64::default());
            for r in &roots {
                let z = hl + r;
                let ez = z.exp();
                let z3 = z * z * z;
                sq += ((z * 0.5).exp() - 1.0) / z;
                s1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
                s2 += (2.0 + z + ez * (z - 2.0)) / z3;
                s3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
            }
            let m = M as f64;
            q.push(sq * dt / m);
            f1.push(s1 * dt / m);
            f2.push(s2 * dt / m);
            f3.push(s3 * dt / m);
        }
        Self {
            n,
            k,
            e,
            e2,
            q,
            f1,
            f2,
            f3,
            flux,
            nyquist: n / 2,
        }
    }

    /// `-ik·F̂(v)` from the spectrum of `v`.
    fn nonlinear(&self, vh: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut fh = match &self.flux {
            Flux::Power { p, scale, pad } => {
                let m = pad * n;
                let (fwd, inv) = plans(m);
                let mut buf = resize_spectrum(vh, m);
                inv.process(&mut buf);
                let norm = 1.0 / n as f64;
                for c in buf.iter_mut() {
                    *c = Complex64::new(scale * (c.re * norm).powi(*p as i32), 0.0);
                }
                fwd.process(&mut buf);
                let mut out = resize_spectrum(&buf, n);
                let r = n as f64 / m as f64;
                for c in out.iter_mut() {
                    *c *= r;
                }
                out
            }
            Flux::Linear { weight } => {
                let (fwd, inv) = plans(n);
                let mut buf = vh.to_vec();
                inv.process(&mut buf);
                let norm = 1.0 / n as f64;
                for (c, w) in buf.iter_mut().zip(weight.iter()) {
                    *c = Complex64::new(w * c.re * norm, 0.0);
                }
                fwd.process(&mut buf);
                buf
            }
        };
        for (j, (c, kk)) in fh.iter_mut().zip(&self.k).enumerate() {
            *c = if j == self.nyquist { Complex64::default() } else { *c * Complex64::new(0.0, -kk) };
        }
        fh
    }

    fn step(&self, v: &mut [Complex64]) {
        let nv = self.nonlinear(v);
        let a: Vec<Complex64> = (0..self.n).map(|j| self.e2[j] * v[j] + self.q[j] * nv[j]).collect();
        let na = self.nonlinear(&a);
        let b: Vec<Complex64> = (0..self.n).map(|j| self.e2[j] * v[j] + self.q[j] * na[j]).collect();
        let nb = self.nonlinear(&b);
        let c: Vec<Complex64> = (0..self.n)
            .map(|j| self.e2[j] * a[j] + self.q[j] * (2.0 * nb[j] - nv[j]))
            .collect();
        let nc = self.nonlinear(&c);
        for j in 0..self.n {
            v[j] = self.e[j] * v[j] + nv[j] * self.f1[j] + 2.0 * (na[j] + nb[j]) * self.f2[j] + nc[j] * self.f3[j];
        }
    }
}

fn physical(grid: &Grid, vh: &[Complex64]) -> Vec<f64> {
    crate::grid::inverse(vh).into_iter().take(grid.n_points()).collect()
}

fn spectral_tail(vh: &[Complex64]) -> f64 {
    let n = vh.len();
    let peak = vh.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    if peak == 0.0 {
        return 0.0;
    }
    let cut = (0.9 * (n / 2) as f64) as usize;
    let tail = vh
        .iter()
        .enumerate()
        .filter(|(j, _)| {
            let m = if *j <= n / 2 { *j } else { n - j };
            m > cut
        })
        .fold(0.0f64, |m, (_, c)| m.max(c.norm()));
    tail / peak
}

fn edge_ratio(u: &[f64]) -> f64 {
    let n = u.len();
    let band = (n / 64).max(1);
    let peak = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let edge = u[..band].iter().chain(&u[n - band..]).fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        0.0
    } else {
        edge / peak
    }
}

fn integrate(
    u0: &GridFunction,
    cfg: &EvolveConfig,
    ctx: &SolitonContext,
    flux: Flux<'_>,
    observer: &mut dyn FnMut(f64, &GridFunction) -> Control,
) -> Result<Trajectory> {
    cfg.validate()?;
    let grid = *u0.grid();
    let steps = (cfg.t_end / cfg.dt).round().max(if cfg.t_end > 0.0 { 1.0 } else { 0.0 }) as usize;
    let dt = if steps > 0 { cfg.t_end / steps as f64 } else { cfg.dt };
    let stepper = Stepper::new(&grid, dt, cfg.frame.speed(), flux);
    let mut vh = u0.spectrum();
    let mut traj = Trajectory {
        times: vec![cfg.t_start],
        snapshots: vec![u0.clone()],
        functionals: vec![ctx.functionals(u0)],
        termination: Termination::Completed,
        warnings: Vec::new(),
        config: *cfg,
    };
    let mut edge_warned = false;
    if observer(cfg.t_start, u0) == Control::Stop {
        traj.termination = Termination::Stopped { time: cfg.t_start };
        return Ok(traj);
    }
    for s in 1..=steps {
        stepper.step(&mut vh);
        let t = cfg.t_start + s as f64 * dt;
        let finite = vh.iter().all(|c| c.re.is_finite() && c.im.is_finite());
        if s % cfg.record_every != 0 && s != steps && finite {
            continue;
        }
        let values = physical(&grid, &vh);
        let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !finite || !peak.is_finite() || peak > 1e6 {
            traj.termination = Termination::BlowUpSuspected {
                last_valid_time: traj.final_time(),
            };
            return Ok(traj);
        }
        let tail = spectral_tail(&vh);
        if tail > cfg.tail_limit {
            traj.termination = Termination::Unresolved { time: t, tail };
            return Ok(traj);
        }
        let ratio = edge_ratio(&values);
        if ratio > cfg.edge_threshold {
            match cfg.edge_policy {
                EdgePolicy::Abort => {
                    traj.termination = Termination::EdgeContamination { time: t, ratio };
                    return Ok(traj);
                }
                EdgePolicy::Warn if !edge_warned => {
                    edge_warned = true;
                    traj.warnings.push(format!(
                        "edge amplitude {ratio:.3e} of peak at t = {t:.6} exceeds {:.1e}",
                        cfg.edge_threshold
                    ));
                }
                _ => {}
            }
        }
        let u = GridFunction::from_raw(grid, values);
        traj.times.push(t);
        traj.functionals.push(ctx.functionals(&u));
        let verdict = observer(t, &u);
        traj.snapshots.push(u);
        if verdict == Control::Stop {
            traj.termination = Termination::Stopped { time: t };
            return Ok(traj);
        }
    }
    Ok(traj)
}

fn check_resolved(u0: &GridFunction) -> Result<()> {
    let tail = spectral_tail(&u0.spectrum());
    if tail > 1e-10 {
        return Err(Error::Domain(format!(
            "initial data under-resolved: spectral tail {tail:.2e} of peak exceeds 1e-10"
        )));
    }
    Ok(())
}

/// Evolves gKdV from `u0`.
pub fn run(u0: &GridFunction, cfg: &EvolveConfig, ctx: &SolitonContext) -> Result<Trajectory> {
    run_with_observer(u0, cfg, ctx, &mut |_, _| Control::Continue)
}

/// As [`run`], calling `observer` on every recorded sample.
pub fn run_with_observer(
    u0: &GridFunction,
    cfg: &EvolveConfig,
    ctx: &SolitonContext,
    observer: &mut dyn FnMut(f64, &GridFunction) -> Control,
) -> Result<Trajectory> {
    check_resolved(u0)?;
    let pad = if cfg.dealias { dealias_factor(ctx.p) } else { 1 };
    integrate(
        u0,
        cfg,
        ctx,
        Flux::Power {
            p: ctx.p,
            scale: cfg.nonlinearity,
            pad,
        },
        observer,
    )
}

/// Backward evolution over `[t_start - t_end, t_start]` through the symmetry
/// `u(t,x) ↦ u(-t,-x)`, which maps solutions to solutions in every frame.
/// Samples are returned in decreasing time. Unlike [`run`], the initial state
/// is only held to the configured `tail_limit`, so that evolved states can be
/// sent back.
pub fn run_backward(u0: &GridFunction, cfg: &EvolveConfig, ctx: &SolitonContext) -> Result<Trajectory> {
    let mut mirrored = *cfg;
    mirrored.t_start = 0.0;
    let pad = if cfg.dealias { dealias_factor(ctx.p) } else { 1 };
    let flux = Flux::Power {
        p: ctx.p,
        scale: cfg.nonlinearity,
        pad,
    };
    let mut traj = integrate(&u0.reflect(), &mirrored, ctx, flux, &mut |_, _| Control::Continue)?;
    for t in traj.times.iter_mut() {
        *t = cfg.t_start - *t;
    }
    for s in traj.snapshots.iter_mut() {
        *s = s.reflect();
    }
    traj.config = *cfg;
    traj.termination = match traj.termination {
        Termination::BlowUpSuspected { last_valid_time } => Termination::BlowUpSuspected {
            last_valid_time: cfg.t_start - last_valid_time,
        },
        Termination::EdgeContamination { time, ratio } => Termination::EdgeContamination {
            time: cfg.t_start - time,
            ratio,
        },
        Termination::Unresolved { time, tail } => Termination::Unresolved {
            time: cfg.t_start - time,
            tail,
        },
        Termination::Stopped { time } => Termination::Stopped { time: cfg.t_start - time },
        Termination::Completed => Termination::Completed,
    };
    Ok(traj)
}

/// Integrates the linear flow `h_t = -𝓛h` (co-moving frame, no nonlinearity).
pub fn evolve_linearized(h0: &GridFunction, sd: &SpectralData, cfg: &EvolveConfig, ctx: &SolitonContext) -> Result<Trajectory> {
    sd.grid().ensure_same(h0.grid())?;
    let mut cfg = *cfg;
    cfg.frame = Frame::CoMoving;
    integrate(
        h0,
        &cfg,
        ctx,
        Flux::Linear {
            weight: sd.op.potential().values(),
        },
        &mut |_, _| Control::Continue,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (SolitonContext, Grid) {
        (SolitonContext::new(6).unwrap(), Grid::new(40.0, 1024).unwrap())
    }

    #[test]
    fn linearized_flow_decays_and_grows_along_eigenfunctions() {
        let (ctx, grid) = setup();
        let sd = crate::linop::compute_spectrum(&ctx, grid, Default::default()).unwrap();
        let cfg = EvolveConfig::new(1e-4, 1.0, Frame::CoMoving);
        for (h0, rate) in [(&sd.y_plus, -sd.e0), (&sd.y_minus, sd.e0)] {
            let traj = evolve_linearized(h0, &sd, &cfg, &ctx).unwrap();
            let expected = h0.scale(rate.exp());
            let err = (traj.last() - &expected).l2_norm() / expected.l2_norm();
            assert!(err < 1e-7, "rate {rate}: relative error {err:e}");
        }
    }

    #[test]
    fn config_validation() {
        let mut c = EvolveConfig::new(0.0, 1.0, Frame::Lab);
        assert!(c.validate().is_err());
        c.dt = 1e-3;
        assert!(c.validate().is_ok());
        c.record_every = 0;
        assert!(c.validate().is_err());
        assert!((default_dt(&Grid::new(40.0, 1024).unwrap()) - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn soliton_is_stationary_in_comoving_frame() {
        let (ctx, g) = setup();
        let q = ctx.sample_q(&g);
        let cfg = EvolveConfig::new(0.01, 1.0, Frame::CoMoving);
        let tr = run(&q, &cfg, &ctx).unwrap();
        assert!(tr.completed());
        assert!((tr.last() - &q).max_abs() < 1e-9);
        let drift = conservation_report(&tr).unwrap();
        assert!(drift.mass < 1e-11);
    }

    #[test]
    fn linear_airy_flow_conserves_mass() {
        let (ctx, g) = setup();
        let u = g.sample(|x| (-(x * x) / 4.0).exp());
        let mut cfg = EvolveConfig::new(0.01, 2.0, Frame::Lab);
        cfg.nonlinearity = 0.0;
        cfg.edge_policy = EdgePolicy::Off;
        let tr = run(&u, &cfg, &ctx).unwrap();
        assert!(conservation_report(&tr).unwrap().mass < 1e-12);
    }

    #[test]
    fn backward_run_inverts_forward_run() {
        let (ctx, g) = setup();
        let u0 = g.sample(|x| ctx.q(x) + 0.005 * (-(x - 1.0) * (x - 1.0)).exp());
        let mut cfg = EvolveConfig::new(1.25e-4, 1.0, Frame::CoMoving);
        cfg.edge_policy = EdgePolicy::Off;
        let fwd = run(&u0, &cfg, &ctx).unwrap();
        let mut back_cfg = cfg;
        back_cfg.t_start = 1.0;
        let back = run_backward(fwd.last(), &back_cfg, &ctx).unwrap();
        assert!((back.final_time()).abs() < 1e-12);
        assert!((back.last() - &u0).h1_norm() < 1e-7);
    }

    #[test]
    fn rejects_unresolved_data() {
        let (ctx, g) = setup();
        let spike = g.sample(|x| if x.abs() < 0.05 { 1.0 } else { 0.0 });
        let cfg = EvolveConfig::new(1e-3, 0.1, Frame::Lab);
        assert!(run(&spike, &cfg, &ctx).is_err());
    }
}
