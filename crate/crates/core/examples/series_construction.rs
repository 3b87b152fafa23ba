//! The series `𝒱ₖᴬ = Σ e^{−je₀t}𝒵ⱼᴬ`: coefficient sizes, tail rates, and the
//! decay rate `(k+1)e₀` of the residual.
//!
//! Usage: `cargo run --release --example series_construction -- [A] [k]`

use gkdv_core::fit::log_slope;
use gkdv_core::linop::compute_spectrum;
use gkdv_core::series::{build_series, coefficient_decay_report, defect_check};
use gkdv_core::{Grid, SolitonContext};

fn main() -> gkdv_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let a: f64 = args.next().map(|s| s.parse().expect("A")).unwrap_or(1.0);
    let k: u32 = args.next().map(|s| s.parse().expect("k")).unwrap_or(4);
    let ctx = SolitonContext::new(6)?;
    let sd = compute_spectrum(&ctx, Grid::new(40.0, 1024)?, Default::default())?;
    let s = build_series(a, k, &sd)?;
    for d in coefficient_decay_report(&s.v)? {
        let z = s.v.coefficient(d.index).expect("present");
        println!("Z{}: ‖·‖₂ = {:.6e}, tail rate {:?}", d.index, z.l2_norm(), d.rate);
    }
    let (lo, hi) = (6.0 / sd.e0, 12.0 / sd.e0);
    let ts: Vec<f64> = (0..=40).map(|i| lo + (hi - lo) * f64::from(i) / 40.0).collect();
    let ys: Vec<f64> = ts.iter().map(|&t| s.residual.eval(t).l2_norm()).collect();
    let fit = log_slope(&ts, &ys, lo, hi)?;
    println!("residual decay rate / e0 = {:.6} (expected {})", -fit.slope / sd.e0, k + 1);
    let (defect, eps) = defect_check(&s, &sd, lo, 1e-3);
    println!("at t0 = {lo:.4}: ‖𝒱‖_H1 = {:.4e}, ‖ε‖ = {eps:.4e}, identity defect {defect:.3e}", s.v.eval(lo).h1_norm());
    Ok(())
}
