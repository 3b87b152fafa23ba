//! Closed-form soliton, its functionals, the mass scaling in `c` and the
//! compressed data `λQ(λ²x)` used for the instability runs.
//!
//! Usage: `cargo run --release --example soliton_profiles -- [p]`

use gkdv_core::{Grid, SolitonContext};

fn main() -> gkdv_core::Result<()> {
    let p: u32 = std::env::args().nth(1).map(|s| s.parse().expect("p")).unwrap_or(6);
    let ctx = SolitonContext::new(p)?;
    let grid = Grid::new(40.0, 2048)?;
    let q = ctx.sample_q(&grid);
    let fq = ctx.functionals(&q);
    println!("p = {p}: Q(0) = {:.16e}", ctx.q(0.0));
    println!("mass {:.12e}  energy {:.12e}  F {:.12e}", fq.mass, fq.energy, fq.weinstein);
    let residual = q.dxx().zip_with(&q, |d2, v| d2 + v.powi(p as i32) - v).max_abs();
    println!("‖Q''+Q^p−Q‖∞ = {residual:.3e}");
    println!("λ₀ = {}", ctx.lambda0());

    println!("\nmass scaling, expected exponent {}", ctx.mass_scaling_exponent());
    for c in [0.5, 2.0, 4.0] {
        let qc = grid.sample(|x| ctx.qc_at(c, x).expect("c > 0"));
        let exponent = (ctx.functionals(&qc).mass / fq.mass).ln() / f64::ln(c);
        println!("  c = {c}: measured exponent {exponent:.12}");
    }

    if p > 5 {
        println!("\nλ = 1 ± 1/n data: mass defect and energy gap");
        for n in [5, 10, 20, 50] {
            for sign in [1, -1] {
                let u = ctx.instability_data(&grid, n, sign)?;
                let f = ctx.functionals(&u);
                println!(
                    "  n = {n:>2}, λ = {:.4}: Δmass {:+.2e}  E − E(Q) {:+.6e}",
                    ctx.instability_lambda(n, sign)?,
                    f.mass - fq.mass,
                    f.energy - fq.energy
                );
            }
        }
    }
    Ok(())
}
