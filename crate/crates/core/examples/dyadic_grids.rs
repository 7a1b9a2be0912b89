//! Tour of the two shifted dyadic grids and the covering constructions.
//!
//! ```bash
//! cargo run --example dyadic_grids
//! ```

use bekolle::geometry::{find_adjacent_cover, find_dyadic_cover, DyadicIndex, Interval, Shift};

fn main() -> bekolle::Result<()> {
    println!("The two grids realize 2^j([0,1) + m + (-1)^j beta), beta in {{0, 1/3}}.\n");

    for beta in Shift::BOTH {
        println!("grid beta = {beta}, scale j = 0:");
        for m in -1..=1 {
            let iv = DyadicIndex::new(beta, 0, m).interval();
            println!("  m = {m:>2}: [{:>8.5}, {:>8.5})", iv.left, iv.right());
        }
    }

    let idx = DyadicIndex::new(Shift::Third, 0, 0);
    println!("\nparent chain from {:?} ({:?}):", idx, idx.interval());
    let mut cur = idx;
    for _ in 0..4 {
        cur = cur.parent()?;
        let iv = cur.interval();
        println!("  j = {:>2}: [{:>9.5}, {:>9.5})", cur.j, iv.left, iv.right());
    }

    // Covering lemma, part 1: a single dyadic interval J with I ⊆ J and
    // |J| <= 8|I|, found in one of the two grids.
    println!("\nsingle-grid covers (|J| <= 8 |I|):");
    for (left, len) in [(0.4, 0.5), (0.9, 0.2), (-3.7, 1.3)] {
        let target = Interval::new(left, len)?;
        let (beta, j) = find_dyadic_cover(&target)?;
        let jiv = j.interval();
        println!(
            "  [{:>5.2}, {:>5.2}) -> beta={beta}, [{:>9.5}, {:>9.5}), blowup {:.2}",
            target.left,
            target.right(),
            jiv.left,
            jiv.right(),
            jiv.length / len
        );
    }

    // Covering lemma, part 2: two adjacent equal-length intervals in a
    // prescribed grid with |I| < L <= 2|I|.
    println!("\nadjacent covers in the standard grid:");
    for (left, len) in [(0.9, 0.2), (0.0, 1.0)] {
        let target = Interval::new(left, len)?;
        let (a, b) = find_adjacent_cover(&target, Shift::Zero)?;
        println!(
            "  [{:>5.2}, {:>5.2}) -> [{:>6.3}, {:>6.3}) + [{:>6.3}, {:>6.3})",
            target.left,
            target.right(),
            a.interval().left,
            a.interval().right(),
            b.interval().left,
            b.interval().right(),
        );
    }
    Ok(())
}
