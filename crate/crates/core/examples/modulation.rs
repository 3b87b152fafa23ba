//! Modulation of a perturbed soliton: recentring, `α±` projections, the
//! virial functional and tail masses along a short co-moving run.
//!
//! Usage: `cargo run --release --example modulation -- [delta]`

use gkdv_core::evolve::{run, EvolveConfig, Frame};
use gkdv_core::linop::compute_spectrum;
use gkdv_core::modulation::{decompose, default_tail_offsets, track, tube_distance};
use gkdv_core::{Grid, SolitonContext};

fn main() -> gkdv_core::Result<()> {
    let delta: f64 = std::env::args().nth(1).map(|s| s.parse().expect("delta")).unwrap_or(1e-3);
    let ctx = SolitonContext::new(6)?;
    let grid = Grid::new(40.0, 1024)?;
    let sd = compute_spectrum(&ctx, grid, Default::default())?;
    let eps0 = 0.3 * ctx.sample_q(&grid).h1_norm();
    let u0 = ctx.sample_q_translate(&grid, 0.7).axpy(delta, &sd.y_minus.shift(-0.7));
    let (d, y) = tube_distance(&u0, &ctx);
    println!("tube distance {d:.6e} at y = {y:.12}");
    let dec = decompose(&u0, &sd, &ctx, None, eps0)?;
    println!("center {:.12}, α+ {:+.6e}, α- {:+.6e}, ‖ε‖_H1 {:.3e}", dec.center, dec.alpha_plus, dec.alpha_minus, dec.eps.h1_norm());

    let cfg = EvolveConfig::new(1e-4, 3.0, Frame::CoMoving).with_sample_spacing(0.05);
    let traj = run(&u0, &cfg, &ctx)?;
    let tr = track(&traj, &sd, &ctx, eps0, &default_tail_offsets())?;
    println!("{:>6} {:>14} {:>12} {:>12} {:>12}", "t", "center", "α-", "a", "J");
    for s in tr.samples.iter().step_by(10) {
        println!("{:6.2} {:14.10} {:+12.4e} {:+12.4e} {:+12.4e}", s.t, s.center, s.alpha_minus, s.a, s.virial_j);
    }
    println!("max orthogonality defect {:.2e}; tail bound {:.3e}", tr.max_orthogonality(), tr.tail_bound());
    if let Some((t, reason)) = &tr.stopped {
        println!("tracking stopped at t = {t}: {reason}");
    }
    Ok(())
}
