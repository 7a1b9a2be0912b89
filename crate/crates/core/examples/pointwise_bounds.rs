//! Pointwise structure of the operators: the kernel, the order
//! `y^gamma P+ f <= T f`, the dyadic model values with certified truncation
//! tails, and the out-part domination by the dyadic maximal function.
//!
//! ```bash
//! cargo run --example pointwise_bounds
//! ```

use bekolle::geometry::{DyadicIndex, Shift};
use bekolle::harness::TestFunctionSpec;
use bekolle::operators::{
    apply_p_plus, apply_t, geometric_tail_constants, kernel, DyadicOperator, MaximalFunction,
    OperatorConfig,
};
use bekolle::measure::Weight;

fn main() -> bekolle::Result<()> {
    println!("kernel |z - conj(w)|^-(2+alpha-gamma):");
    println!("  z = w = i, alpha=0, gamma=0      -> {}", kernel(0.0, 1.0, 0.0, 1.0, 0.0, 0.0));
    println!("  z = i, w = 1 + i, alpha=0        -> {}", kernel(0.0, 1.0, 1.0, 1.0, 0.0, 0.0));

    let window = bekolle::geometry::Rect::new(0.0, 1.0, 0.0, 1.0)?;
    let f = TestFunctionSpec::indicator_of_unit_square().realize_at(&window, 8, 8)?;
    let cfg = OperatorConfig::default();

    println!("\npointwise order y^gamma P+ f <= T f (alpha = 0, gamma = 1):");
    for (zx, zy) in [(0.5, 0.25), (0.1, 0.8), (1.5, 0.4)] {
        let t = apply_t(&f, 0.0, 1.0, zx, zy, &cfg)?;
        let p = apply_p_plus(&f, 0.0, zx, zy, &cfg)?;
        println!("  z = {zx} + {zy}i: y P+f = {:>9.6} <= Tf = {:>9.6}", zy * p, t);
    }

    // Dyadic model operator: hand-checkable values on the unit indicator.
    let cfg_small = OperatorConfig { j_min: -1, j_max: 2, ..cfg };
    let op = DyadicOperator::new(&f, 0.0, 0.0, Shift::Zero, &cfg_small)?;
    let v = op.eval(0.5, 0.25)?;
    println!(
        "\ndyadic sum at z = 0.5 + 0.25i over scales [-1, 2]: {} (tail bound {:.6})",
        v.truncated_value, v.tail_bound
    );
    let split = op.eval_split(&DyadicIndex::new(Shift::Zero, 0, 0), 0.5, 0.25)?;
    println!(
        "  split at the unit square: in = {}, out = {}",
        split.in_part, split.out_part.truncated_value
    );

    // Outside the support square the dyadic sum is controlled by the dyadic
    // maximal function times a geometric constant.
    let op = DyadicOperator::new(&f, 0.0, 0.5, Shift::Zero, &cfg)?;
    let maximal = MaximalFunction::new(&f, &Weight::one(), 0.0, 0.5)?;
    let (c1, c2) = geometric_tail_constants(0.0, 0.5);
    println!("\nout-part domination (alpha=0, gamma=0.5): geometric constants {c1:.4} / {c2:.4}");
    for (zx, zy) in [(1.7, 0.01), (3.2, 0.4), (-0.6, 0.2)] {
        let q = op.eval(zx, zy)?.truncated_value;
        let m = maximal.eval_dyadic(zx, zy, Shift::Zero, cfg.j_min, cfg.j_max)?;
        println!(
            "  z = {zx} + {zy}i: Q f = {q:>10.6} <= {:>10.6} = C * M f for C = {c2:.4}",
            c2 * m
        );
    }
    Ok(())
}
