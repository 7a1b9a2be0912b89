//! The improved bound at the special pair (p0, q0), and the necessity probe:
//! for a weight outside the class, tents sliding toward the boundary make the
//! raw operator-norm ratio climb without bound.
//!
//! ```bash
//! cargo run --example special_exponents
//! ```

use bekolle::harness::{necessity_tent_ratios, p0q0_experiment, ExperimentContext, TestFunctionSpec};
use bekolle::measure::Weight;

fn main() -> bekolle::Result<()> {
    let ctx = ExperimentContext { nx: 64, ny: 64, ..ExperimentContext::default() };
    let functions = [
        TestFunctionSpec::indicator_of_unit_square(),
        TestFunctionSpec::Tent { center: 0.5, width: 0.5, height: 0.25 },
    ];

    let rep = p0q0_experiment(0.0, 1.0, &Weight::power(0.125), &functions, &ctx)?;
    let extra = &rep.params["extra"];
    println!(
        "special pair at (alpha, gamma) = (0, 1): p0 = {}, q0 = {}",
        extra["p0"], extra["q0"]
    );
    println!(
        "bracket power used: {} (generic exponent would be {})",
        rep.exponent_used, extra["generic_exponent"]
    );
    for e in &rep.entries {
        println!("  {:<28} normalized ratio {:>10.6}  pass {}", e.parameter, e.ratio.value, e.pass);
    }

    // Necessity: y^(1/2) sits outside the admissible interval at
    // (0, 1, 1.5); the unnormalized ratios grow as the tents approach the
    // boundary.
    println!("\nnecessity probe with w = y^(1/2) (divergent bracket):");
    let ratios = necessity_tent_ratios(0.0, 1.0, 1.5, &Weight::power(0.5), 1..=8, &ctx)?;
    for (k, r) in (1..).zip(&ratios) {
        println!("  tent height 2^-{k:<2} ratio {:>12.6}", r);
    }
    Ok(())
}
