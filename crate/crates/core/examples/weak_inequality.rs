//! The weak-type experiments at p = 1: super-level sets of `T f` measured
//! against `w^q dV_alpha`, and of `P+ f` against `w^q dV_eta`.
//!
//! ```bash
//! cargo run --example weak_inequality
//! ```

use bekolle::harness::{
    weak_inequality_experiment_p, weak_inequality_experiment_t, ExperimentContext,
    TestFunctionSpec,
};
use bekolle::measure::Weight;

fn main() -> bekolle::Result<()> {
    let ctx = ExperimentContext { nx: 64, ny: 64, ..ExperimentContext::default() };
    let functions = [TestFunctionSpec::indicator_of_unit_square()];
    let (alpha, gamma) = (0.0, 1.0); // q = 2

    for w in [Weight::one(), Weight::power(-0.25)] {
        let rep = weak_inequality_experiment_t(alpha, gamma, &w, &functions, &ctx)?;
        println!("weak type for the fractional operator, w = {}:", w.describe());
        println!("  bracket = {:.6}", rep.constant_used.value);
        for e in &rep.entries {
            println!(
                "  {:<36} sup {:>10.6}  normalized {:>10.6}  pass {}",
                e.parameter, e.lhs.value, e.ratio.value, e.pass
            );
        }

        let rep = weak_inequality_experiment_p(alpha, gamma, &w, &functions, &ctx)?;
        println!(
            "weak type for the projection (measure w^q dV_eta, eta = {}):",
            rep.params["eta"]
        );
        for e in &rep.entries {
            println!(
                "  {:<36} sup {:>10.6}  normalized {:>10.6}  pass {}",
                e.parameter, e.lhs.value, e.ratio.value, e.pass
            );
        }
        println!();
    }
    println!("Both candidate bracket powers (q and q^2) are logged for the fractional operator.");
    Ok(())
}
