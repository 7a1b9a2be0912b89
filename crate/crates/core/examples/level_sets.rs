//! Decompose super-level sets of the dyadic operator into maximal dyadic
//! Carleson squares, and classify them into the heavy/light families used by
//! the weak-type argument.
//!
//! ```bash
//! cargo run --example level_sets
//! ```

use bekolle::geometry::{Rect, Shift};
use bekolle::harness::{classify_level_families, level_set_decomposition, TestFunctionSpec};
use bekolle::measure::Weight;
use bekolle::operators::OperatorConfig;

fn main() -> bekolle::Result<()> {
    let window = Rect::new(0.0, 1.0, 0.0, 1.0)?;
    let f = TestFunctionSpec::indicator_of_unit_square().realize_at(&window, 4, 4)?;
    let cfg = OperatorConfig::default();

    for lambda in [0.5, 1.5, 3.0] {
        let rep = level_set_decomposition(&f, 0.0, 0.0, Shift::Zero, lambda, &cfg)?;
        println!(
            "lambda = {lambda}: {} maximal squares, measure {:.6}",
            rep.maximal_squares.len(),
            rep.super_level_measure
        );
        for (idx, (value, parent)) in rep
            .maximal_squares
            .iter()
            .zip(rep.square_values.iter().zip(&rep.parent_values))
            .take(6)
        {
            let iv = idx.interval();
            println!(
                "  Q over [{:>9.5}, {:>9.5}) at scale {:>3}: value {:.4} > {lambda} >= parent {:.4}",
                iv.left,
                iv.right(),
                idx.j,
                value,
                parent
            );
        }
    }

    // The weak-type argument splits the maximal squares by how much of their
    // mass survives at level 2 lambda.
    let fam = classify_level_families(
        &f,
        0.0,
        0.0,
        Shift::Zero,
        1.1,
        2.0,
        &Weight::one(),
        0.0,
        &cfg,
    )?;
    println!(
        "\nfamilies at lambda = {}: threshold fraction {:.4}, heavy {}, light {}",
        fam.lambda,
        fam.threshold_fraction,
        fam.heavy.len(),
        fam.light.len()
    );
    Ok(())
}
