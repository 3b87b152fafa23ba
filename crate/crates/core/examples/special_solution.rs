//! Evolves Q + 𝒱ₖᴬ(t₀) and fits the decay of ‖u − Q − Ae^{−e₀t}𝒴₊‖_{H¹}.
//!
//! Usage: `cargo run --release --example special_solution -- [A] [k]`

use gkdv_core::experiments::{run_special, SpecialParams};
use gkdv_core::linop::compute_spectrum;
use gkdv_core::{Grid, SolitonContext};

fn main() -> gkdv_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let amplitude: f64 = args.next().map(|s| s.parse().expect("A")).unwrap_or(1.0);
    let k_max: u32 = args.next().map(|s| s.parse().expect("k")).unwrap_or(3);
    let ctx = SolitonContext::new(6)?;
    let sd = compute_spectrum(&ctx, Grid::new(40.0, 1024)?, Default::default())?;
    let params = SpecialParams {
        amplitude,
        k_max,
        ..Default::default()
    };
    let report = run_special(&ctx, &sd, &params)?;
    println!("e0 = {:.10}", sd.e0);
    for (name, value) in &report.quantities {
        println!("{name:>24} = {value:.6e}");
    }
    for c in &report.checks {
        println!("[{}] {} = {:.4e} ({} {:.4e})", if c.passed { "pass" } else { "FAIL" }, c.name, c.value, c.relation, c.threshold);
    }
    for o in &report.observations {
        println!("note: {o}");
    }
    let r = &report.tables["r"];
    for row in r.rows.iter().step_by((r.rows.len() / 12).max(1)) {
        println!("t = {:8.3}  r = {:.3e}  series mismatch = {:.3e}", row[0], row[1], row[2]);
    }
    Ok(())
}
