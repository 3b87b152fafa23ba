//! Sign of ‖∂ₓu‖² − ‖Q'‖² along the special solutions Uᴬ for A = −1, 0, 1,
//! forward in time and, for A ≤ 0, backward.
//!
//! Usage: `cargo run --release --example gradient_sign`

use gkdv_core::experiments::{run_gradient_sign, GradientParams};
use gkdv_core::linop::compute_spectrum;
use gkdv_core::{Grid, SolitonContext};

fn main() -> gkdv_core::Result<()> {
    let ctx = SolitonContext::new(6)?;
    let sd = compute_spectrum(&ctx, Grid::new(40.0, 1024)?, Default::default())?;
    let report = run_gradient_sign(&ctx, &sd, &GradientParams::default())?;
    for (name, value) in &report.quantities {
        println!("{name:>48} = {value:.6e}");
    }
    for c in &report.checks {
        let verdict = if c.passed { "pass" } else { "FAIL" };
        println!("[{verdict}] {} = {:.4e} ({} {:.4e})", c.name, c.value, c.relation, c.threshold);
    }
    for (label, c) in &report.conservation {
        println!("drift {label}: mass {:.2e} energy {:.2e} F {:.2e}", c.mass, c.energy, c.weinstein);
    }
    for o in &report.observations {
        println!("note: {o}");
    }
    println!("valid: {}", report.valid);
    Ok(())
}
