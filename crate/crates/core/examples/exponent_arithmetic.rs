//! The exponent bookkeeping: q from (alpha, gamma, p), conjugates, r, eta,
//! the constant powers of the strong and weak bounds, and the special pair
//! (p0, q0) with its improved exponent.
//!
//! ```bash
//! cargo run --example exponent_arithmetic
//! ```

use bekolle::measure::{exponents_from, p0q0};

fn main() -> bekolle::Result<()> {
    println!("{:>6} {:>6} {:>5} {:>8} {:>8} {:>8} {:>8} {:>9}", "alpha", "gamma", "p", "q", "p'", "r", "eta", "strong");
    for (alpha, gamma, p) in [
        (0.0, 0.0, 2.0),
        (0.0, 1.0, 1.5),
        (1.0, 1.0, 2.0),
        (-0.5, 0.5, 1.25),
        (2.5, 2.0, 1.5),
    ] {
        let e = exponents_from(alpha, gamma, p)?;
        println!(
            "{alpha:>6} {gamma:>6} {p:>5} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>9.4}",
            e.q,
            e.p_prime,
            e.r,
            e.eta,
            e.strong_exponent()
        );
    }

    println!("\nweak regime (p = 1): q = (2+alpha)/(2+alpha-gamma)");
    for (alpha, gamma) in [(0.0, 1.0), (1.0, 1.5), (0.0, 0.5)] {
        let e = exponents_from(alpha, gamma, 1.0)?;
        println!(
            "  alpha={alpha}, gamma={gamma}: q={:.4}, eta={:.4}, candidate powers q={:.2} / q^2={:.2}, projection 2q-1={:.2}",
            e.q,
            e.eta,
            e.weak_t_exponent_stated(),
            e.weak_t_exponent_derived(),
            e.weak_p_exponent()
        );
    }

    println!("\nspecial pair (p0, q0) and the exponent gap:");
    for (alpha, gamma) in [(0.0, 1.0), (2.0, 2.0), (0.0, 0.2)] {
        let (p0, q0) = p0q0(alpha, gamma)?;
        let e = exponents_from(alpha, gamma, p0)?;
        println!(
            "  alpha={alpha}, gamma={gamma}: p0={p0:.6}, q0={q0:.6}, q0 < generic exponent {:.4}",
            e.strong_exponent()
        );
    }
    Ok(())
}
