//! Measure the pointwise sparse-domination ratio
//! `T f(z) / (Q^0 f(z) + Q^(1/3) f(z))`: finite, and stable under refining
//! the function mesh.
//!
//! ```bash
//! cargo run --example sparse_domination
//! ```

use bekolle::harness::{sparse_domination_ratio, ExperimentContext, TestFunctionSpec};

fn main() -> bekolle::Result<()> {
    let ctx = ExperimentContext::default();
    let points = ctx.sample_points(200);

    for gamma in [0.0, 1.0] {
        println!("alpha = 0, gamma = {gamma}:");
        for spec in [
            TestFunctionSpec::indicator_of_unit_square(),
            TestFunctionSpec::Tent { center: 0.5, width: 0.5, height: 0.25 },
        ] {
            let coarse = spec.realize_at(&ctx.window, 64, 64)?;
            let fine = spec.realize_at(&ctx.window, 128, 128)?;
            let rc = sparse_domination_ratio(&coarse, 0.0, gamma, &points, &ctx.cfg)?;
            let rf = sparse_domination_ratio(&fine, 0.0, gamma, &points, &ctx.cfg)?;
            let drift = (rf.max_ratio - rc.max_ratio).abs() / rf.max_ratio;
            println!(
                "  f = {:<24} max ratio {:.6} -> {:.6} (drift {:.2}%), witness z = {:.3} + {:.4}i",
                spec.describe(),
                rc.max_ratio,
                rf.max_ratio,
                100.0 * drift,
                rf.witness.0,
                rf.witness.1,
            );
        }
    }
    println!("\nThe dyadic sums are truncated from below, so each ratio is an upper estimate.");
    Ok(())
}
