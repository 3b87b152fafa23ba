//! The acceptance checklist: soliton and operator identities, spectrum,
//! coercivity, series residual orders, solver fidelity and the long-run
//! scenarios, each reduced to named pass/fail checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{conservation_report, default_dt, run, EvolveConfig, Frame};
use crate::experiments::{
    run_classification_shift, run_gradient_sign, run_instability, run_scaling, run_special, ExperimentReport,
    GradientParams, InstabilityParams, ScalingParams, ShiftParams, SpecialParams,
};
use crate::fit::log_slope;
use crate::grid::{Grid, GridFunction};
use crate::linop::{coercivity_sigma, compute_spectrum, Constraints, Linearization, SpectralData, SpectralTolerances};
use crate::profiles::{binomial, SolitonContext};
use crate::series::build_series;
use crate::shooting::Shooting;

/// Outcome of one checklist item.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: String,
    pub title: String,
    pub report: ExperimentReport,
    /// Set when the item could not be evaluated at all.
    pub error: Option<String>,
    pub skipped: bool,
}

impl CriterionResult {
    fn new(id: &str, title: &str) -> Self {
        Self {
            id: id.to_string(),
            title: title.to_string(),
            report: ExperimentReport::new(&format!("criterion {id}"), &serde_json::Value::Null),
            error: None,
            skipped: false,
        }
    }

    fn skipped(id: &str, title: &str, why: &str) -> Self {
        let mut c = Self::new(id, title);
        c.skipped = true;
        c.report.observe(why);
        c
    }

    fn failed(id: &str, title: &str, e: &Error) -> Self {
        let mut c = Self::new(id, title);
        c.error = Some(e.to_string());
        c
    }

    pub fn passed(&self) -> bool {
        !self.skipped && self.error.is_none() && !self.report.checks.is_empty() && self.report.passed()
    }

    /// `PASS`, `FAIL` or `SKIP`.
    pub fn verdict(&self) -> &'static str {
        if self.skipped {
            "SKIP"
        } else if self.passed() {
            "PASS"
        } else {
            "FAIL"
        }
    }

    /// Copies the checks, quantities, notes and drifts of a scenario report
    /// under a label.
    fn absorb(&mut self, label: &str, sub: &ExperimentReport) {
        let r = &mut self.report;
        for c in &sub.checks {
            r.check(format!("{label}: {}", c.name), c.value, &c.relation, c.threshold);
        }
        for (k, v) in &sub.quantities {
            r.quantity(format!("{label}: {k}"), *v);
        }
        for o in &sub.observations {
            r.observe(format!("{label}: {o}"));
        }
        for (k, v) in &sub.conservation {
            r.conservation.insert(format!("{label}: {k}"), *v);
        }
        r.valid &= sub.valid;
    }

    fn hint_if_failed(&mut self, grid: &Grid) {
        if !self.report.all_checks_passed() {
            self.report.observe(format!(
                "residuals above tolerance on {grid}: the grid is likely under-resolved; increase N (and keep L ≥ 30)"
            ));
        }
    }
}

/// Inputs of [`run_checklist`].
#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub p: u32,
    pub grid: Grid,
    pub tolerances: SpectralTolerances,
    /// Include the evolution-based items 6–10 (minutes rather than seconds).
    pub long: bool,
    /// Run the order-6 series alongside the order-3 rate item.
    pub supplement: bool,
}

impl VerifyOptions {
    pub fn new(p: u32, grid: Grid) -> Self {
        Self {
            p,
            grid,
            tolerances: SpectralTolerances::default(),
            long: true,
            supplement: true,
        }
    }
}

fn trapezoid(f: &GridFunction) -> f64 {
    f.integral()
}

/// Item 1: profile equation residual, Pohozaev identity, mass scaling.
///
/// The residual is measured on a grid with twice the points of `grid`: the
/// analytic strip of `Q` is only `π/(p−1)` wide, and on the default grid the
/// spectral second derivative amplifies the truncation floor above 1e−10.
pub fn soliton_identities(ctx: &SolitonContext, grid: &Grid) -> Result<CriterionResult> {
    let mut c = CriterionResult::new("1", "soliton identities");
    let p = ctx.p as i32;
    let fine = Grid::new(grid.half_length(), 2 * grid.n_points())?;
    for (label, g) in [("fine", &fine), ("base", grid)] {
        let q = ctx.sample_q(g);
        let res = q.dxx().zip_with(&q, |d2, v| d2 + v.powi(p) - v).max_abs() / q.max_abs();
        c.report.quantity(format!("profile residual ({label}, N = {})", g.n_points()), res);
    }
    let q = ctx.sample_q(&fine);
    let res = q.dxx().zip_with(&q, |d2, v| d2 + v.powi(p) - v).max_abs() / q.max_abs();
    c.report.check("‖Q''+Q^p−Q‖∞/‖Q‖∞ (refined grid)", res, "<=", 1e-10);

    let dq = ctx.sample_q_prime(&fine);
    let lhs = 2.0 * trapezoid(&dq.map(|v| v * v));
    let rhs = f64::from(p - 1) / f64::from(p + 1) * trapezoid(&q.map(|v| v.powi(p + 1)));
    c.report.quantity("2∫Q'²", lhs);
    c.report.check("Pohozaev relative defect", (lhs / rhs - 1.0).abs(), "<=", 1e-9);

    let m1 = trapezoid(&q.map(|v| v * v));
    let expected = ctx.mass_scaling_exponent();
    c.report.quantity("expected mass exponent", expected);
    for speed in [0.5, 2.0, 4.0] {
        let qc = fine.sample(|x| ctx.qc_at(speed, x).expect("positive speed"));
        let mc = trapezoid(&qc.map(|v| v * v));
        let exponent = (mc / m1).ln() / f64::ln(speed);
        c.report.check(format!("mass exponent error at c = {speed}"), (exponent - expected).abs(), "<=", 1e-6);
    }
    c.hint_if_failed(&fine);
    Ok(c)
}

/// Item 2: `LQ' = 0`, `LS = −Q`, `L Q^{(p+1)/2} = −λ₀ Q^{(p+1)/2}`.
pub fn l_identities(ctx: &SolitonContext, grid: &Grid) -> Result<CriterionResult> {
    let mut c = CriterionResult::new("2", "identities of L");
    let op = Linearization::new(ctx, *grid);
    let dq = op.q_prime();
    c.report.check("‖LQ'‖/‖Q'‖", op.apply_l(dq)?.l2_norm() / dq.l2_norm(), "<=", 1e-8);
    let s = ctx.scaling_derivative_s(grid);
    let q = op.q();
    c.report.check("‖LS+Q‖/‖Q‖", (&op.apply_l(&s)? + q).l2_norm() / q.l2_norm(), "<=", 1e-8);
    let lambda0 = f64::from((ctx.p - 1) * (ctx.p + 3)) / 4.0;
    c.report.quantity("λ₀", lambda0);
    let g = ctx.ground_state(grid);
    let r = op.apply_l(&g)?.axpy(lambda0, &g).l2_norm();
    c.report.quantity("‖Lg+λ₀g‖/‖g‖", r / g.l2_norm());
    c.report.check("‖Lg+λ₀g‖/‖λ₀g‖", r / (lambda0 * g.l2_norm()), "<=", 1e-8);
    c.hint_if_failed(grid);
    Ok(c)
}

/// Count of eigenvalues that pass the real, nonzero, positive filter.
fn positive_real_count(sd: &SpectralData) -> usize {
    let t = &sd.tolerances;
    let imag_tol = t.imag_factor * sd.spectral_radius;
    sd.eigenvalues
        .iter()
        .filter(|c| c.im.abs() < imag_tol && c.re > t.real_tol && c.norm() > t.kernel_tol)
        .count()
}

/// Item 3: isolated `e₀`, shooting agreement, reflection and normalization.
pub fn spectrum_checks(ctx: &SolitonContext, sd: &SpectralData) -> Result<CriterionResult> {
    let mut c = CriterionResult::new("3", "spectrum of 𝓛");
    let grid = *sd.grid();
    c.report.quantity("e0", sd.e0);
    c.report.quantity("e0 (dense, unrefined)", sd.e0_dense);
    c.report.quantity("mu", sd.mu);
    let count = positive_real_count(sd);
    c.report.quantity("positive real eigenvalues after filtering", count as f64);
    c.report.check_flag("exactly one positive real eigenvalue", count == 1);
    let shot = Shooting::new(ctx, grid).shoot_e0((0.1, 3.0))?;
    c.report.quantity("e0 (shooting)", shot);
    c.report.check("|e0 dense − shooting|/e0", (sd.e0 - shot).abs() / shot, "<=", 1e-6);
    c.report.check("𝒴₋ vs reflected 𝒴₊", sd.reflection_defect, "<=", 1e-8);
    let cert = &sd.certificate;
    c.report.check("|(𝒴₊,Z₋) − 1|", (cert.yp_zm - 1.0).abs(), "<=", 1e-8);
    c.report.check("|(𝒴₊,Z₊)|", cert.yp_zp.abs(), "<=", 1e-8);
    c.report.check("|(Z₊,Q')|", cert.zp_dq.abs(), "<=", 1e-8);
    c.report.check("|(Z₋,Q')|", cert.zm_dq.abs(), "<=", 1e-8);
    c.report.check("(Q',𝒴₊')", cert.dq_dyp, ">", 0.0);
    c.report.quantity("residual 𝒴₊", sd.residual_plus);
    c.report.quantity("residual 𝒴₋", sd.residual_minus);
    c.hint_if_failed(&grid);
    Ok(c)
}

/// Item 4: constrained coercivity constant on two grids.
pub fn coercivity_checks(ctx: &SolitonContext, sd: &SpectralData, coarse: &SpectralData) -> Result<CriterionResult> {
    let mut c = CriterionResult::new("4", "coercivity");
    let fine_sigma = coercivity_sigma(ctx, sd, &Constraints::Adjoint)?;
    let coarse_sigma = coercivity_sigma(ctx, coarse, &Constraints::Adjoint)?;
    c.report.quantity(format!("sigma (N = {})", sd.grid().n_points()), fine_sigma);
    c.report.quantity(format!("sigma (N = {})", coarse.grid().n_points()), coarse_sigma);
    c.report.check("sigma", fine_sigma, ">", 0.0);
    c.report
        .check("relative change between grids", (coarse_sigma / fine_sigma - 1.0).abs(), "<=", 0.05);
    Ok(c)
}

/// `max_j ‖[ε₁]_j − C(p,j)∂ₓ(Q^{p−j}𝒴₊^j)‖/‖C(p,j)∂ₓ(Q^{p−j}𝒴₊^j)‖` for `A = 1`,
/// with the closed form evaluated pointwise on the grid.
pub fn k1_closed_form_defect(sd: &SpectralData) -> Result<f64> {
    let s = build_series(1.0, 1, sd)?;
    let p = sd.op.p();
    let q = sd.op.q();
    let y = &sd.y_plus;
    let mut worst = 0.0f64;
    for j in 2..=p {
        let closed = q
            .zip_with(y, |qv, yv| binomial(p, j) * qv.powi((p - j) as i32) * yv.powi(j as i32))
            .dx();
        let got = s.residual.coefficient(j).cloned().unwrap_or_else(|| sd.grid().zeros());
        worst = worst.max((&got - &closed).l2_norm() / closed.l2_norm());
    }
    Ok(worst)
}

/// Item 5: decay rates of the series residual and the closed form of its
/// `k = 1` coefficients.
///
/// The closed form is compared on `fine`. Pointwise powers `𝒴₊^j` alias
/// whatever Fourier tail `𝒴₊` carries (about 1e−9 relative on the default
/// grid), while the series forms padded products, so on the base grid the
/// two discretizations differ at the 1e−4 level for `j = p`.
pub fn series_residual_orders(sd: &SpectralData, fine: &SpectralData) -> Result<CriterionResult> {
    let mut c = CriterionResult::new("5", "series residual order");
    let e0 = sd.e0;
    let (lo, hi) = (6.0 / e0, 12.0 / e0);
    let ts: Vec<f64> = (0..=60).map(|i| lo + (hi - lo) * f64::from(i) / 60.0).collect();
    for k in 1..=4 {
        let s = build_series(1.0, k, sd)?;
        let ys: Vec<f64> = ts.iter().map(|&t| s.residual.eval(t).l2_norm()).collect();
        let fit = log_slope(&ts, &ys, lo, hi)?;
        let expected = f64::from(k + 1) * e0;
        c.report.quantity(format!("k={k} rate/e0"), -fit.slope / e0);
        c.report.check(format!("k={k} rate error"), (-fit.slope / expected - 1.0).abs(), "<=", 0.02);
    }
    c.report
        .quantity(format!("k=1 closed-form defect (N = {})", sd.grid().n_points()), k1_closed_form_defect(sd)?);
    c.report.check(
        format!("k=1 coefficients vs closed form (N = {})", fine.grid().n_points()),
        k1_closed_form_defect(fine)?,
        "<=",
        1e-9,
    );
    Ok(c)
}

/// Item 6: soliton propagation over `T = 10`, conservation, and the
/// temporal order from two step sizes.
pub fn solver_fidelity(ctx: &SolitonContext, grid: &Grid) -> Result<CriterionResult> {
    let mut c = CriterionResult::new("6", "solver fidelity");
    let q = ctx.sample_q(grid);
    let horizon = 10.0;
    let dt = default_dt(grid);
    let traj = run(&q, &EvolveConfig::new(dt, horizon, Frame::Lab), ctx)?;
    let exact = ctx.sample_q_translate(grid, horizon);
    c.report.quantity("dt", dt);
    c.report.check("sup error at T = 10", (traj.last() - &exact).max_abs(), "<=", 1e-6);
    let drift = conservation_report(&traj)?;
    c.report.check("mass drift", drift.mass, "<=", 1e-9);
    c.report.check("F drift", drift.weinstein, "<=", 1e-9);
    c.report.quantity("energy drift", drift.energy);
    c.report.conservation.insert("T=10".into(), drift);

    let short = 1.0;
    let exact = ctx.sample_q_translate(grid, short);
    let scale = (grid.half_length() / 40.0).powi(3) * (1024.0 / grid.n_points() as f64).powi(3);
    let mut errors = Vec::new();
    for h in [4e-4, 2e-4, 1e-4] {
        let tr = run(&q, &EvolveConfig::new(h * scale, short, Frame::Lab), ctx)?;
        let e = (tr.last() - &exact).max_abs();
        c.report.quantity(format!("error at T = 1, dt = {:e}", h * scale), e);
        errors.push(e);
    }
    c.report.quantity("convergence factor (coarse pair)", errors[0] / errors[1]);
    c.report.check("convergence factor / 16 − 1", (errors[1] / errors[2] / 16.0 - 1.0).abs(), "<=", 0.2);
    Ok(c)
}

/// Item 7: the `e^{−2e₀t}` remainder for `A = ±1` at series order `k_max`.
pub fn special_rate(ctx: &SolitonContext, sd: &SpectralData, k_max: u32, id: &str) -> Result<CriterionResult> {
    let mut c = CriterionResult::new(id, &format!("special solution rate, k = {k_max}"));
    for a in [1.0, -1.0] {
        let r = run_special(ctx, sd, &SpecialParams {
            amplitude: a,
            k_max,
            ..Default::default()
        })?;
        c.absorb(&format!("A={a}"), &r);
    }
    Ok(c)
}

/// Items 8 and 9 from one instability report, plus the `λ = 1 − 1/n` energy
/// expansion.
pub fn instability_checks(ctx: &SolitonContext, sd: &SpectralData) -> Result<(CriterionResult, CriterionResult)> {
    let mut c8 = CriterionResult::new("8", "instability");
    let mut c9 = CriterionResult::new("9", "virial and tails");
    let params = InstabilityParams::default();
    let r = run_instability(ctx, sd, &params)?;
    c8.absorb("instability", &r);

    let fine = Grid::new(40.0, 2048)?;
    let q = ctx.sample_q(&fine);
    let eq = ctx.functionals(&q).energy;
    let n = 50u32;
    let u = ctx.instability_data(&fine, n, -1)?;
    let measured = f64::from(n * n) * (ctx.functionals(&u).energy - eq);
    let p = f64::from(ctx.p);
    let predicted = (p - 1.0) * (5.0 - p) / (2.0 * (p + 1.0)) * trapezoid(&q.map(|v| v.powi(ctx.p as i32 + 1)));
    c8.report.quantity("n²(E−E(Q)) at λ = 1 − 1/50", measured);
    c8.report.quantity("second-order prediction", predicted);
    c8.report.check("energy expansion relative error", (measured / predicted - 1.0).abs(), "<=", 0.05);

    let get = |k: &str| r.quantities.get(&format!("n=10 {k}")).copied();
    match (get("a_sign"), get("a_persistence_fraction"), get("j_monotone"), get("tail_bound")) {
        (Some(sign), Some(frac), Some(mono), Some(tail)) => {
            c9.report.quantity("a sign on the final window", sign);
            c9.report.quantity("tail bound sup tail·e^{x₀/4}", tail);
            for k in ["jprime_remainder_constant", "jprime_remainder_median"] {
                if let Some(v) = get(k) {
                    c9.report.quantity(k, v);
                }
            }
            c9.report.check("|sign of a|", sign.abs(), ">=", 1.0);
            c9.report.check("fraction of the tracked span with one sign of a", frac, ">=", 0.5);
            c9.report.check_flag("J monotone on that window", mono == 1.0);
            c9.report.check_flag("tail bound finite", tail.is_finite());
        }
        _ => {
            c9.error = Some("n = 10 run produced no modulation track".into());
        }
    }
    if let Some(d) = r.conservation.get("n=10") {
        c9.report.conservation.insert("n=10".into(), *d);
    }
    Ok((c8, c9))
}

/// Item 10: gradient sign dichotomy, speed scaling and series homogeneity.
pub fn dichotomy_and_scaling(ctx: &SolitonContext, sd: &SpectralData) -> Result<CriterionResult> {
    let mut c = CriterionResult::new("10", "gradient dichotomy and scaling");
    let g = run_gradient_sign(ctx, sd, &GradientParams {
        amplitudes: vec![-1.0, 1.0],
        ..Default::default()
    })?;
    c.absorb("gradient", &g);
    let s = run_scaling(ctx, sd, &ScalingParams::default())?;
    c.absorb("scaling", &s);
    let h = run_classification_shift(sd, &ShiftParams::default())?;
    c.absorb("shift", &h);
    Ok(c)
}

fn guarded(id: &str, title: &str, r: Result<CriterionResult>) -> CriterionResult {
    r.unwrap_or_else(|e| CriterionResult::failed(id, title, &e))
}

/// Runs the whole checklist in order. Items that need the spectrum fail with
/// the spectral error when it cannot be computed.
pub fn run_checklist(opts: &VerifyOptions) -> Result<Vec<CriterionResult>> {
    let ctx = SolitonContext::new(opts.p)?;
    let grid = opts.grid;
    let mut out = vec![
        guarded("1", "soliton identities", soliton_identities(&ctx, &grid)),
        guarded("2", "identities of L", l_identities(&ctx, &grid)),
    ];
    let spectrum = compute_spectrum(&ctx, grid, opts.tolerances);
    let titles: [(&str, &str); 8] = [
        ("3", "spectrum of 𝓛"),
        ("4", "coercivity"),
        ("5", "series residual order"),
        ("6", "solver fidelity"),
        ("7", "special solution rate, k = 3"),
        ("8", "instability"),
        ("9", "virial and tails"),
        ("10", "gradient dichotomy and scaling"),
    ];
    let sd = match spectrum {
        Ok(sd) => sd,
        Err(e) => {
            let msg = format!("{e}; the grid may be under-resolved, try a larger N");
            for (id, title) in titles {
                let mut c = CriterionResult::new(id, title);
                c.error = Some(msg.clone());
                out.push(c);
            }
            return Ok(out);
        }
    };
    out.push(guarded("3", titles[0].1, spectrum_checks(&ctx, &sd)));
    let coarse_n = grid.n_points() / 2;
    out.push(guarded(
        "4",
        titles[1].1,
        Grid::new(grid.half_length(), coarse_n)
            .and_then(|g| compute_spectrum(&ctx, g, opts.tolerances))
            .and_then(|coarse| coercivity_checks(&ctx, &sd, &coarse)),
    ));
    out.push(guarded(
        "5",
        titles[2].1,
        Grid::new(grid.half_length(), 2 * grid.n_points())
            .and_then(|g| compute_spectrum(&ctx, g, opts.tolerances))
            .and_then(|fine| series_residual_orders(&sd, &fine)),
    ));
    if !opts.long {
        for (id, title) in &titles[3..] {
            out.push(CriterionResult::skipped(id, title, "long items not requested"));
        }
        return Ok(out);
    }
    out.push(guarded("6", titles[3].1, solver_fidelity(&ctx, &grid)));
    out.push(guarded("7", titles[4].1, special_rate(&ctx, &sd, 3, "7")));
    if opts.supplement {
        out.push(guarded("7+", "special solution rate, k = 6", special_rate(&ctx, &sd, 6, "7+")));
    }
    match instability_checks(&ctx, &sd) {
        Ok((c8, c9)) => out.extend([c8, c9]),
        Err(e) => out.extend([
            CriterionResult::failed("8", titles[5].1, &e),
            CriterionResult::failed("9", titles[6].1, &e),
        ]),
    }
    out.push(guarded("10", titles[7].1, dichotomy_and_scaling(&ctx, &sd)));
    Ok(out)
}

/// One line per item, then the failing checks and notes of each failure.
pub fn format_checklist(items: &[CriterionResult]) -> String {
    let mut s = String::new();
    for c in items {
        s.push_str(&format!("[{}] {:>3}  {}\n", c.verdict(), c.id, c.title));
        if let Some(e) = &c.error {
            s.push_str(&format!("         error: {e}\n"));
        }
        if !c.skipped {
            for f in c.report.failed_checks() {
                s.push_str(&format!("         {} = {:.4e} (need {} {:.4e})\n", f.name, f.value, f.relation, f.threshold));
            }
            if !c.passed() {
                for o in &c.report.observations {
                    s.push_str(&format!("         note: {o}\n"));
                }
            }
        }
    }
    s
}

/// Quantities of every item, keyed `id/name`.
pub fn checklist_quantities(items: &[CriterionResult]) -> BTreeMap<String, f64> {
    items
        .iter()
        .flat_map(|c| c.report.quantities.iter().map(move |(k, v)| (format!("{}/{k}", c.id), *v)))
        .collect()
}
