//! The eigenpair `±e₀` of the linearized operator: dense eigensolve, shooting
//! cross-check, normalization certificate and coercivity.
//!
//! Usage: `cargo run --release --example spectrum -- [N] [L]`

use gkdv_core::linop::{coercivity_sigma, compute_spectrum, Constraints};
use gkdv_core::shooting::Shooting;
use gkdv_core::{Grid, SolitonContext};

fn main() -> gkdv_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse().expect("N")).unwrap_or(1024);
    let l: f64 = args.next().map(|s| s.parse().expect("L")).unwrap_or(40.0);
    let ctx = SolitonContext::new(6)?;
    let grid = Grid::new(l, n)?;
    let sd = compute_spectrum(&ctx, grid, Default::default())?;
    let shot = Shooting::new(&ctx, grid).shoot_e0((0.1, 3.0))?;
    println!("e0 = {:.16e} (dense {:.16e}, shooting {:.16e})", sd.e0, sd.e0_dense, shot);
    println!("mirror eigenvalue {:.16e}, decay rate mu = {:.6}", sd.e0_mirror, sd.mu);
    println!("kernel cluster {:?}", sd.kernel_cluster);
    println!("max |Re λ| elsewhere {:.3e}", sd.max_essential_real);
    println!("residuals: {:.3e} {:.3e}; reflection defect {:.3e}", sd.residual_plus, sd.residual_minus, sd.reflection_defect);
    let c = &sd.certificate;
    println!("(Y+,Z-) = {:.12}  (Y+,Z+) = {:.2e}  (Z±,Q') = {:.2e}, {:.2e}  (Q',Y+') = {:.6}", c.yp_zm, c.yp_zp, c.zp_dq, c.zm_dq, c.dq_dyp);
    for (name, cons) in [("{Z+, Z-, Q'}", Constraints::Adjoint), ("{Q^(p+1)/2, Q'}", Constraints::GroundState)] {
        println!("coercivity constant on {name}^⊥: {:.6}", coercivity_sigma(&ctx, &sd, &cons)?);
    }
    Ok(())
}
