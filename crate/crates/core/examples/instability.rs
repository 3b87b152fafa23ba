//! Exit times of the rescaled solitons u_{0,n} = λQ(λ²x), λ = 1 + 1/n, from
//! the δ-tube around the soliton family, with virial and tail diagnostics.
//!
//! Usage: `cargo run --release --example instability -- [n ...]`

use gkdv_core::experiments::{run_instability, InstabilityParams};
use gkdv_core::linop::compute_spectrum;
use gkdv_core::{Grid, SolitonContext};

fn main() -> gkdv_core::Result<()> {
    let n_list: Vec<u32> = std::env::args().skip(1).map(|s| s.parse().expect("n")).collect();
    let ctx = SolitonContext::new(6)?;
    let sd = compute_spectrum(&ctx, Grid::new(40.0, 1024)?, Default::default())?;
    let params = InstabilityParams {
        n_list: if n_list.is_empty() { vec![5, 10, 20] } else { n_list },
        ..Default::default()
    };
    let report = run_instability(&ctx, &sd, &params)?;
    for (name, value) in &report.quantities {
        println!("{name:>36} = {value:.6e}");
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
    Ok(())
}
