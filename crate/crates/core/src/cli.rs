//! Subcommands behind the `gkdv` binary. Each returns whether every declared
//! tolerance held; errors are reported by the caller.

use std::io::Write;
use std::path::Path;

use crate::config::{Purpose, RunConfig};
use crate::error::{Error, Result};
use crate::evolve::{conservation_report, default_dt, run_with_observer, Control, EvolveConfig, Frame};
use crate::experiments::{run_scenario, special_initial_state, ExperimentReport, Table};
use crate::io::{fields_table, gnuplot_script, write_atomic, write_csv, write_field_binary, write_json, write_report, CacheOutcome, SpectralCache};
use crate::linop::SpectralData;
use crate::profiles::SolitonContext;
use crate::series::{build_series, coefficient_decay_report, defect_check};
use crate::verify::{checklist_quantities, format_checklist, run_checklist, VerifyOptions};

type Out<'a> = &'a mut dyn Write;

fn spectral_data(cfg: &RunConfig, ctx: &SolitonContext, out: Out) -> Result<SpectralData> {
    let cache = SpectralCache::new(cfg.cache_dir());
    let (sd, outcome) = cache.get_or_compute(ctx, cfg.grid()?, cfg.linop)?;
    let how = match outcome {
        CacheOutcome::Hit => "cached",
        CacheOutcome::Computed => "computed",
    };
    writeln!(out, "spectrum ({how}): e0 = {:.16e}", sd.e0)?;
    Ok(sd)
}

/// Adds remediation advice to errors the user can act on.
fn with_hint(e: Error) -> Error {
    match e {
        Error::SpectralAmbiguity { .. } => Error::Config(format!(
            "{e}\nhint: raise N (resolution) or L (domain), or adjust [linop] kernel_tol / imag_factor"
        )),
        other => other,
    }
}

pub fn cmd_spectrum(cfg: &RunConfig, out: Out) -> Result<bool> {
    cfg.validate(Purpose::Experiments)?;
    let ctx = SolitonContext::new(cfg.profiles.p)?;
    let sd = spectral_data(cfg, &ctx, out).map_err(with_hint)?;
    let dir = cfg.output.dir.join("spectrum");
    let rec = sd.record();
    write_json(&dir.join("spectrum.json"), &rec)?;
    let q = ctx.sample_q(sd.grid());
    let t = fields_table(&[
        ("Q", &q),
        ("Y_plus", &sd.y_plus),
        ("Y_minus", &sd.y_minus),
        ("Z_plus", &sd.z_plus),
        ("Z_minus", &sd.z_minus),
    ])?;
    write_csv(&dir.join("eigenfunctions.csv"), &t)?;
    for (name, f) in [("Y_plus", &sd.y_plus), ("Y_minus", &sd.y_minus), ("Z_plus", &sd.z_plus), ("Z_minus", &sd.z_minus)] {
        write_field_binary(&dir.join(format!("{name}.f64")), f)?;
    }
    let mut ev = Table::new(&["re", "im"]);
    for c in &sd.eigenvalues {
        ev.push(vec![c.re, c.im]);
    }
    write_csv(&dir.join("eigenvalues.csv"), &ev)?;
    if cfg.output.plots {
        let gp = gnuplot_script("eigenfunctions.csv", "eigenfunctions", "x", &["Y_plus", "Y_minus"], false);
        write_atomic(&dir.join("eigenfunctions.gp"), gp.as_bytes())?;
    }
    let c = &rec.certificate;
    writeln!(out, "mu = {:.16e}", rec.mu)?;
    writeln!(out, "e0 dense = {:.16e}, mirror = {:.16e}", rec.e0_dense, rec.e0_mirror)?;
    writeln!(out, "residuals: Y+ {:.3e}  Y- {:.3e}  Z+ {:.3e}  Z- {:.3e}", rec.residual_plus, rec.residual_minus, rec.adjoint_residual_plus, rec.adjoint_residual_minus)?;
    writeln!(out, "certificate: (Y+,Z-) = {:.3e}  (Y+,Z+) = {:.3e}  (Z+,Q') = {:.3e}  (Z-,Q') = {:.3e}  (Q',Y+') = {:.3e}", c.yp_zm, c.yp_zp, c.zp_dq, c.zm_dq, c.dq_dyp)?;
    writeln!(out, "written to {}", dir.display())?;
    Ok(true)
}

fn print_report(r: &ExperimentReport, out: Out) -> Result<()> {
    for (k, v) in &r.quantities {
        writeln!(out, "  {k} = {v:.16e}")?;
    }
    for f in &r.fits {
        writeln!(out, "  fit {}: slope {:.6e} on [{:.4}, {:.4}], residual {:.2e}", f.name, f.fit.slope, f.fit.window.0, f.fit.window.1, f.fit.residual)?;
    }
    for c in &r.checks {
        let verdict = if c.passed { "pass" } else { "FAIL" };
        writeln!(out, "  [{verdict}] {} = {:.6e} ({} {:.6e})", c.name, c.value, c.relation, c.threshold)?;
    }
    for (k, d) in &r.conservation {
        writeln!(out, "  drift {k}: mass {:.2e} energy {:.2e} F {:.2e}", d.mass, d.energy, d.weinstein)?;
    }
    for o in &r.observations {
        writeln!(out, "  note: {o}")?;
    }
    if !r.valid {
        writeln!(out, "  report INVALID: conservation drift above limit")?;
    }
    Ok(())
}

pub fn cmd_run(name: &str, cfg: &RunConfig, out: Out) -> Result<bool> {
    cfg.validate(Purpose::Experiments)?;
    let scenario = cfg.scenario(name)?;
    let ctx = SolitonContext::new(cfg.profiles.p)?;
    let sd = spectral_data(cfg, &ctx, out).map_err(with_hint)?;
    let mut report = run_scenario(&ctx, &sd, &scenario)?;
    let dir = cfg.output.dir.join(scenario.name());
    write_report(&dir, &mut report, cfg.output.plots)?;
    writeln!(out, "scenario {}:", scenario.name())?;
    print_report(&report, out)?;
    writeln!(out, "written to {}", dir.display())?;
    Ok(report.passed())
}

pub fn cmd_verify(cfg: &RunConfig, long: bool, out: Out) -> Result<bool> {
    cfg.validate(Purpose::Experiments)?;
    let mut opts = VerifyOptions::new(cfg.profiles.p, cfg.grid()?);
    opts.tolerances = cfg.linop;
    opts.long = long;
    let items = run_checklist(&opts)?;
    write!(out, "{}", format_checklist(&items))?;
    write_json(&cfg.output.dir.join("verify.json"), &items)?;
    let mut names = String::from("name,value\n");
    for (k, v) in checklist_quantities(&items) {
        names.push_str(&format!("\"{}\",{v:.16e}\n", k.replace('"', "'")));
    }
    write_atomic(&cfg.output.dir.join("verify_quantities.csv"), names.as_bytes())?;
    Ok(items.iter().all(|c| c.passed() || c.skipped))
}

pub fn cmd_series(cfg: &RunConfig, out: Out) -> Result<bool> {
    cfg.validate(Purpose::Experiments)?;
    let ctx = SolitonContext::new(cfg.profiles.p)?;
    let sd = spectral_data(cfg, &ctx, out).map_err(with_hint)?;
    let a = cfg.experiments.amplitude.unwrap_or(1.0);
    let k = cfg.experiments.k_max.unwrap_or(3);
    let t0 = cfg.experiments.t0.unwrap_or(6.0 / sd.e0);
    let s = build_series(a, k, &sd)?;
    let dir = cfg.output.dir.join("series");
    let names: Vec<String> = s.v.indices().iter().map(|j| format!("Z{j}")).collect();
    let fields: Vec<(&str, &_)> = names
        .iter()
        .zip(s.v.terms())
        .map(|(n, (_, f))| (n.as_str(), f))
        .collect();
    if !fields.is_empty() {
        write_csv(&dir.join("coefficients.csv"), &fields_table(&fields)?)?;
    }
    let decay = coefficient_decay_report(&s.v)?;
    write_json(&dir.join("decay.json"), &decay)?;
    let mut res = Table::new(&["j", "l2_norm"]);
    for (j, f) in s.residual.terms() {
        res.push(vec![f64::from(j), f.l2_norm()]);
    }
    write_csv(&dir.join("residual_norms.csv"), &res)?;
    let (defect, eps) = defect_check(&s, &sd, t0, 1e-3);
    writeln!(out, "series A = {a}, k = {k}, t0 = {t0:.6}")?;
    for (j, f) in s.v.terms() {
        writeln!(out, "  ‖Z{j}‖₂ = {:.6e}", f.l2_norm())?;
    }
    for d in &decay {
        if let Some(r) = d.rate {
            writeln!(out, "  tail rate of Z{} = {r:.6}", d.index)?;
        }
    }
    writeln!(out, "  ‖𝒱(t0)‖_H1 = {:.6e}", s.v.eval(t0).h1_norm())?;
    writeln!(out, "  ‖εₖ(t0)‖₂ = {eps:.6e}, defect of the identity = {defect:.3e}")?;
    writeln!(out, "written to {}", dir.display())?;
    Ok(true)
}

/// Evolves `Q_c`, or `Q + 𝒱ₖᴬ(t0)` when an amplitude is configured, in the
/// frame moving with the soliton.
pub fn cmd_evolve(cfg: &RunConfig, out: Out) -> Result<bool> {
    let with_series = cfg.experiments.amplitude.is_some_and(|a| a != 0.0);
    cfg.validate(if with_series { Purpose::Experiments } else { Purpose::Soliton })?;
    let c = cfg.profiles.c;
    let ctx = SolitonContext::with_speed(cfg.profiles.p, c)?;
    let grid = cfg.grid()?;
    let target = ctx.sample_qc(&grid);
    let (u0, t_start) = if with_series {
        if c != 1.0 {
            return Err(Error::Config("the series initial state is built for c = 1".into()));
        }
        let sd = spectral_data(cfg, &ctx, out).map_err(with_hint)?;
        let t0 = cfg.experiments.t0.unwrap_or(6.0 / sd.e0);
        let s = build_series(cfg.experiments.amplitude.unwrap_or(0.0), cfg.experiments.k_max.unwrap_or(3), &sd)?;
        (special_initial_state(&ctx, &s, t0)?, t0)
    } else {
        (target.clone(), 0.0)
    };
    let horizon = cfg.experiments.horizon.unwrap_or(10.0);
    let dt = cfg.evolve.dt.unwrap_or_else(|| default_dt(&grid) / c.powf(1.5));
    let mut ecfg = EvolveConfig::new(dt, horizon, Frame::Speed(c)).with_sample_spacing(cfg.evolve.sample_spacing.unwrap_or(0.1));
    ecfg.t_start = t_start;
    let mut table = Table::new(&["t", "mass", "energy", "weinstein", "distance"]);
    let traj = run_with_observer(&u0, &ecfg, &ctx, &mut |t, u| {
        let f = ctx.functionals(u);
        table.push(vec![t, f.mass, f.energy, f.weinstein, (u - &target).h1_norm()]);
        Control::Continue
    })?;
    let drift = conservation_report(&traj)?;
    let dir = cfg.output.dir.join("evolve");
    write_csv(&dir.join("trajectory.csv"), &table)?;
    let last = traj.last();
    write_csv(&dir.join("final.csv"), &fields_table(&[("u0", &u0), ("u", last)])?)?;
    write_field_binary(&dir.join("final.f64"), last)?;
    write_json(&dir.join("drift.json"), &drift)?;
    if cfg.output.plots {
        let gp = gnuplot_script("trajectory.csv", "distance to the soliton", "t", &["distance"], true);
        write_atomic(&dir.join("trajectory.gp"), gp.as_bytes())?;
    }
    writeln!(out, "evolved to t = {:.6} ({:?}), dt = {dt:e}", traj.final_time(), traj.termination)?;
    writeln!(out, "  drift: mass {:.3e} energy {:.3e} F {:.3e}", drift.mass, drift.energy, drift.weinstein)?;
    writeln!(out, "  final distance to Q_c: {:.6e}", (last - &target).h1_norm())?;
    for w in &traj.warnings {
        writeln!(out, "  warning: {w}")?;
    }
    writeln!(out, "written to {}", dir.display())?;
    Ok(traj.completed())
}

/// Reads the configuration file, if any; a missing path is an error, an
/// empty file gives the defaults.
pub fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}
