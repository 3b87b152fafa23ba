//! Decay rate of the speed-c special solution against the c = 1 rate; the
//! ratio should be c^{3/2}.
//!
//! Usage: `cargo run --release --example scaling -- [c]`

use gkdv_core::experiments::{run_scaling, ScalingParams};
use gkdv_core::linop::compute_spectrum;
use gkdv_core::{Grid, SolitonContext};

fn main() -> gkdv_core::Result<()> {
    let c: f64 = std::env::args().nth(1).map(|s| s.parse().expect("c")).unwrap_or(2.0);
    let ctx = SolitonContext::new(6)?;
    let sd = compute_spectrum(&ctx, Grid::new(40.0, 1024)?, Default::default())?;
    let report = run_scaling(&ctx, &sd, &ScalingParams { c, ..Default::default() })?;
    for (name, value) in &report.quantities {
        println!("{name:>16} = {value:.8e}");
    }
    for f in &report.fits {
        println!("fit {}: slope {:.6e} on [{:.3}, {:.3}], residual {:.2e}", f.name, f.fit.slope, f.fit.window.0, f.fit.window.1, f.fit.residual);
    }
    for ch in &report.checks {
        let verdict = if ch.passed { "pass" } else { "FAIL" };
        println!("[{verdict}] {} = {:.4e} ({} {:.4e})", ch.name, ch.value, ch.relation, ch.threshold);
    }
    for o in &report.observations {
        println!("note: {o}");
    }
    Ok(())
}
