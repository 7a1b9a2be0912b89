//! Weight-class brackets over Carleson squares: family suprema against the
//! closed forms for power weights, the class-relation identity, and the
//! reverse-doubling constant they control.
//!
//! ```bash
//! cargo run --example weight_constants
//! ```

use bekolle::geometry::Rect;
use bekolle::measure::{
    b1q_constant, bekolle_constant, bpq_constant, interval_family, power_b1q_closed_form,
    power_bpq_closed_form, reverse_doubling_theta, Weight,
};

fn main() -> bekolle::Result<()> {
    let window = Rect::new(0.0, 1.0, 0.0, 1.0)?;
    let family = interval_family(&window, -8, 4, 500, 7);
    println!("family: {} intervals (both grids + random)\n", family.len());

    let (p, q, alpha) = (2.0, 2.0, 0.0);
    println!("brackets at p = q = 2, alpha = 0:");
    for s in [0.0, 0.25, -0.25, 0.5] {
        let w = Weight::power(s);
        let sup = bpq_constant(&w, p, q, alpha, &family, 1e-9)?;
        let closed = power_bpq_closed_form(s, p, q, alpha);
        println!(
            "  [y^{s:>5}]_B_pq : family sup {:>12.8} vs closed form {:>12.8}  (witness [{:.4}, {:.4}))",
            sup.value,
            closed,
            sup.witness.left,
            sup.witness.right()
        );
    }

    println!("\nlimit class (p = 1) needs ess sup of 1/w, so only s <= 0 survives:");
    for s in [0.0, -0.25, 0.25] {
        let w = Weight::power(s);
        let sup = b1q_constant(&w, q, alpha, &family, 1e-9)?;
        println!(
            "  [y^{s:>5}]_B_1q : {:>12.8} (closed form {:>12.8})",
            sup.value,
            power_b1q_closed_form(s, q, alpha)
        );
    }

    // Class relation: [w^q] in the Bekolle-Bonami class at r = 1 + q/p'
    // equals [w]^q in B_(p,q,alpha).
    let w = Weight::power(0.25);
    let r = 1.0 + q / (p / (p - 1.0));
    let bracket = bpq_constant(&w, p, q, alpha, &family, 1e-9)?;
    let bek = bekolle_constant(&w.pow(q), r, alpha, &family, 1e-9)?;
    println!(
        "\nclass relation at r = {r}: [w^q]_B_r = {:.12} vs [w]^q = {:.12}",
        bek.value,
        bracket.value.powf(q)
    );

    // Reverse doubling: the bottom half of every Carleson square carries at
    // most a theta < 1 fraction of the weighted mass.
    let (theta, c) = reverse_doubling_theta(p, alpha, bek.value)?;
    println!("reverse doubling from [w^q]_B_2: C_(p,alpha) = {c}, theta = {theta:.6}");
    Ok(())
}
