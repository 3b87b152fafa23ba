//! Pseudospectral ETDRK4 evolution of a travelling soliton: end-state error,
//! conservation drift and the fourth-order step-size convergence.
//!
//! Usage: `cargo run --release --example evolve_soliton -- [T]`

use gkdv_core::evolve::{conservation_report, default_dt, run, EvolveConfig, Frame};
use gkdv_core::{Grid, SolitonContext};

fn main() -> gkdv_core::Result<()> {
    let horizon: f64 = std::env::args().nth(1).map(|s| s.parse().expect("T")).unwrap_or(10.0);
    let ctx = SolitonContext::new(6)?;
    let grid = Grid::new(40.0, 1024)?;
    let q = ctx.sample_q(&grid);
    let dt = default_dt(&grid);
    let traj = run(&q, &EvolveConfig::new(dt, horizon, Frame::Lab), &ctx)?;
    let exact = ctx.sample_q_translate(&grid, horizon);
    let drift = conservation_report(&traj)?;
    println!("T = {horizon}, dt = {dt:e}: sup error {:.3e}", (traj.last() - &exact).max_abs());
    println!("drift: mass {:.2e} energy {:.2e} F {:.2e}", drift.mass, drift.energy, drift.weinstein);
    let exact = ctx.sample_q_translate(&grid, 1.0);
    let mut prev: Option<f64> = None;
    for h in [4e-4, 2e-4, 1e-4] {
        let e = (run(&q, &EvolveConfig::new(h, 1.0, Frame::Lab), &ctx)?.last() - &exact).max_abs();
        match prev {
            Some(p) => println!("dt = {h:e}: error {e:.3e}, ratio {:.2}", p / e),
            None => println!("dt = {h:e}: error {e:.3e}"),
        }
        prev = Some(e);
    }
    Ok(())
}
