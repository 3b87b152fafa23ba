//! Acceptance checklist at p = 6, L = 40, N = 1024. Prints one line per
//! criterion, then fails if any numbered criterion failed.
//!
//! Item 7 is evaluated as stated, with the order-3 series. An extra line
//! reports the same measurement with the order-6 series; it is informational
//! and never replaces item 7.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture` to see the
//! lines as they are produced. The evolution items take several minutes.

use gkdv_core::linop::compute_spectrum;
use gkdv_core::profiles::eval_q;
use gkdv_core::shooting::Shooting;
use gkdv_core::verify::{format_checklist, run_checklist, CriterionResult, VerifyOptions};
use gkdv_core::{Grid, SolitonContext};

/// Oracles that do not go through the code paths being checked.
fn independent_oracles(items: &[CriterionResult]) -> Vec<(String, bool)> {
    let q = |id: &str, name: &str| {
        items
            .iter()
            .find(|c| c.id == id)
            .and_then(|c| c.report.quantities.get(name).copied())
    };
    let mut out = Vec::new();
    // λ₀ = (p−1)(p+3)/4 at p = 6
    out.push(("λ₀ = 45/4".to_string(), q("2", "λ₀") == Some(11.25)));
    // mass exponent (5−p)/(2(p−1)) = −1/10
    out.push(("mass exponent = −1/10".to_string(), q("1", "expected mass exponent") == Some(-0.1)));
    // 2∫Q'² against a closed-form integral by substitution: with
    // Q = (7/2 sech²(5x/2))^{1/5}, ∫Q^7 = (7/2)^{7/5}·(2/5)·B(1/2, 7/5),
    // and Pohozaev gives 2∫Q'² = (5/7)∫Q^7.
    let beta = gamma(0.5) * gamma(1.4) / gamma(1.9);
    let q7 = 3.5f64.powf(1.4) * 0.4 * beta;
    let pohozaev = q("1", "2∫Q'²").map(|v| (v / (5.0 / 7.0 * q7) - 1.0).abs());
    out.push((format!("2∫Q'² vs Beta-function value (rel {pohozaev:?})"), pohozaev.is_some_and(|d| d < 1e-9)));
    // e₀ from shooting on its own grid, against the checklist value
    let e0 = q("3", "e0");
    let shot = Shooting::new(&SolitonContext::new(6).unwrap(), Grid::new(40.0, 2048).unwrap())
        .shoot_e0((0.1, 3.0))
        .ok();
    let agree = matches!((e0, shot), (Some(a), Some(b)) if ((a - b) / b).abs() < 1e-6);
    out.push((format!("e0 {e0:?} vs shooting on N = 2048 {shot:?}"), agree));
    // Q(0) from the closed form
    out.push(("Q(0) = (7/2)^{1/5}".to_string(), (eval_q(6, 0.0) - 3.5f64.powf(0.2)).abs() < 1e-15));
    out
}

/// Lanczos approximation, accurate to ~1e-15 for the positive arguments used here.
fn gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let t = x + G + 0.5;
    let s = C[0] + (1..9).map(|i| C[i] / (x + i as f64)).sum::<f64>();
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * s
}

#[test]
fn acceptance() {
    let grid = Grid::new(40.0, 1024).unwrap();
    let ctx = SolitonContext::new(6).unwrap();
    // fail early and clearly if the spectrum itself is unavailable
    compute_spectrum(&ctx, grid, Default::default()).expect("spectrum at the default grid");
    let items = run_checklist(&VerifyOptions::new(6, grid)).unwrap();

    println!("{}", format_checklist(&items));
    for c in &items {
        let label = if c.id == "7+" {
            "criterion 7 supplement (k = 6, informational)".to_string()
        } else {
            format!("criterion {}", c.id)
        };
        println!("{label}: {} ({})", c.verdict(), c.title);
    }
    let oracles = independent_oracles(&items);
    for (name, ok) in &oracles {
        println!("oracle {}: {name}", if *ok { "PASS" } else { "FAIL" });
    }

    let failed: Vec<&str> = items
        .iter()
        .filter(|c| c.id != "7+" && !c.passed())
        .map(|c| c.id.as_str())
        .collect();
    assert!(oracles.iter().all(|o| o.1), "independent oracle mismatch");
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
