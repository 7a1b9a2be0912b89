//! Intervals, the two shifted dyadic grids on the real line, Carleson squares
//! over the upper half-plane, and the covering constructions used everywhere
//! else in the crate.
//!
//! The grids are `D^beta = { 2^j([0,1) + m + (-1)^j beta) : j, m integers }`
//! for `beta` in `{0, 1/3}`. All intervals are half-open `[left, left + len)`,
//! so each grid tiles the line exactly at every scale. Point membership is
//! decided by index arithmetic (`floor` of the scaled coordinate), never by
//! comparing realized endpoints, which keeps tiling exact at deep scales.

use crate::error::{Error, Result};

/// Smallest admissible dyadic scale exponent.
pub const MIN_SCALE: i32 = -40;
/// Largest admissible dyadic scale exponent.
pub const MAX_SCALE: i32 = 40;

/// Grid shift tag: `beta = 0` is the standard dyadic grid, `beta = 1/3` the
/// shifted companion grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Shift {
    Zero,
    Third,
}

impl Shift {
    pub const BOTH: [Shift; 2] = [Shift::Zero, Shift::Third];

    /// The shift value `beta` itself.
    pub fn value(self) -> f64 {
        match self {
            Shift::Zero => 0.0,
            Shift::Third => 1.0 / 3.0,
        }
    }

    /// `3 * (-1)^j * beta` as an exact integer: 0 for `beta = 0`,
    /// `±1` for `beta = 1/3`.
    fn thirds_at_scale(self, j: i32) -> i64 {
        match self {
            Shift::Zero => 0,
            Shift::Third => {
                if j.rem_euclid(2) == 0 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    /// The signed shift `(-1)^j * beta` in floating point.
    pub fn at_scale(self, j: i32) -> f64 {
        self.thirds_at_scale(j) as f64 / 3.0
    }
}

impl std::fmt::Display for Shift {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Shift::Zero => write!(f, "0"),
            Shift::Third => write!(f, "1/3"),
        }
    }
}

/// `2^j`, exact for `j` in the supported scale window.
pub fn pow2(j: i32) -> f64 {
    f64::powi(2.0, j)
}

fn check_scale(j: i64) -> Result<i32> {
    if j < MIN_SCALE as i64 || j > MAX_SCALE as i64 {
        return Err(Error::ScaleOutOfRange {
            j,
            min: MIN_SCALE,
            max: MAX_SCALE,
        });
    }
    Ok(j as i32)
}

/// Half-open interval `[left, left + length)` with `length > 0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Interval {
    pub left: f64,
    pub length: f64,
}

impl Interval {
    pub fn new(left: f64, length: f64) -> Result<Interval> {
        if !(left.is_finite() && length.is_finite() && length > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "interval requires finite left and length > 0, got left={left}, length={length}"
            )));
        }
        Ok(Interval { left, length })
    }

    pub fn right(&self) -> f64 {
        self.left + self.length
    }

    pub fn center(&self) -> f64 {
        self.left + 0.5 * self.length
    }

    pub fn contains(&self, x: f64) -> bool {
        self.left <= x && x < self.right()
    }

    /// `other ⊆ self` on realized endpoints.
    pub fn covers(&self, other: &Interval) -> bool {
        self.left <= other.left && other.right() <= self.right()
    }

    /// The Carleson square over this interval.
    pub fn carleson_square(&self) -> CarlesonSquare {
        CarlesonSquare { base: *self }
    }
}

/// Index `(beta, j, m)` of the grid member `2^j([0,1) + m + (-1)^j beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct DyadicIndex {
    pub beta: Shift,
    pub j: i32,
    pub m: i64,
}

impl DyadicIndex {
    pub fn new(beta: Shift, j: i32, m: i64) -> DyadicIndex {
        DyadicIndex { beta, j, m }
    }

    /// The realized interval; its length is exactly `2^j`. The left endpoint
    /// is computed as `((3m + 3 (-1)^j beta) / 3) * 2^j` with one rounding
    /// before the exact power-of-two scaling, so realized left endpoints are
    /// monotone in the exact grid order across scales.
    pub fn interval(&self) -> Interval {
        let len = pow2(self.j);
        let k = 3 * self.m + self.beta.thirds_at_scale(self.j);
        Interval { left: (k as f64 / 3.0) * len, length: len }
    }

    /// The Carleson square over the realized interval.
    pub fn square(&self) -> CarlesonSquare {
        self.interval().carleson_square()
    }

    /// Position index of `x` at scale `j` in grid `beta`: the unique `m` with
    /// `x` in the realized cell. This is the membership arithmetic; it is the
    /// source of truth for tiling.
    pub fn position(beta: Shift, j: i32, x: f64) -> i64 {
        let scaled = x * pow2(-j) - beta.at_scale(j);
        let m = scaled.floor();
        debug_assert!(m.abs() < 9.0e18);
        m as i64
    }

    /// The grid cell of grid `beta` at scale `j` containing `x`.
    pub fn cell_containing(beta: Shift, j: i32, x: f64) -> DyadicIndex {
        DyadicIndex::new(beta, j, DyadicIndex::position(beta, j, x))
    }

    /// Membership by index arithmetic.
    pub fn contains_x(&self, x: f64) -> bool {
        DyadicIndex::position(self.beta, self.j, x) == self.m
    }

    /// `z = x + iy` lies in the Carleson square over this interval.
    pub fn square_contains(&self, x: f64, y: f64) -> bool {
        y > 0.0 && y < pow2(self.j) && self.contains_x(x)
    }

    /// The dyadic parent: same grid, scale `j + 1`, realized interval
    /// containing this one. Exact integer arithmetic: with
    /// `e = 3 * (-1)^j * beta` (so `e` in `{0, 1, -1}`), the parent position
    /// is `floor((m + e) / 2)`.
    pub fn parent(&self) -> Result<DyadicIndex> {
        let j = check_scale(self.j as i64 + 1)?;
        let e = self.beta.thirds_at_scale(self.j);
        Ok(DyadicIndex::new(self.beta, j, (self.m + e).div_euclid(2)))
    }

    /// The two children at scale `j - 1`, ordered left to right.
    pub fn children(&self) -> Result<[DyadicIndex; 2]> {
        let j = check_scale(self.j as i64 - 1)?;
        let e = self.beta.thirds_at_scale(j);
        let lo = 2 * self.m - e;
        Ok([
            DyadicIndex::new(self.beta, j, lo),
            DyadicIndex::new(self.beta, j, lo + 1),
        ])
    }

    /// `self ⊆ other` in the dyadic order (same grid only).
    pub fn is_descendant_of(&self, other: &DyadicIndex) -> bool {
        if self.beta != other.beta || self.j > other.j {
            return false;
        }
        let mut cur = *self;
        while cur.j < other.j {
            match cur.parent() {
                Ok(p) => cur = p,
                Err(_) => return false,
            }
        }
        cur.m == other.m
    }
}

/// Axis-aligned rectangle in the closed upper half-plane:
/// `[x0, x1) x [y0, y1)` with `x0 < x1` and `0 <= y0 < y1`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Rect> {
        if !(x0.is_finite() && x1.is_finite() && y0.is_finite() && y1.is_finite())
            || x0 >= x1
            || y0 < 0.0
            || y0 >= y1
        {
            return Err(Error::InvalidArgument(format!(
                "rectangle requires x0 < x1 and 0 <= y0 < y1, got [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        Ok(Rect { x0, x1, y0, y1 })
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.x0 <= x && x < self.x1 && self.y0 <= y && y < self.y1
    }

    /// Intersection, or `None` when it has zero area.
    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x0.max(other.x0);
        let x1 = self.x1.min(other.x1);
        let y0 = self.y0.max(other.y0);
        let y1 = self.y1.min(other.y1);
        if x0 < x1 && y0 < y1 {
            Some(Rect { x0, x1, y0, y1 })
        } else {
            None
        }
    }
}

/// Carleson square `Q_I = I x (0, |I|)` with its top and bottom halves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarlesonSquare {
    pub base: Interval,
}

impl CarlesonSquare {
    pub fn side(&self) -> f64 {
        self.base.length
    }

    /// The full square as a rectangle (the `y = 0` edge carries no mass for
    /// any `dV_alpha` with `alpha > -1`).
    pub fn rect(&self) -> Rect {
        Rect {
            x0: self.base.left,
            x1: self.base.right(),
            y0: 0.0,
            y1: self.base.length,
        }
    }

    /// Top half `T_I = I x [|I|/2, |I|)`.
    pub fn top_half(&self) -> Rect {
        Rect {
            x0: self.base.left,
            x1: self.base.right(),
            y0: 0.5 * self.base.length,
            y1: self.base.length,
        }
    }

    /// Bottom half `B_I = I x (0, |I|/2)`.
    pub fn bottom_half(&self) -> Rect {
        Rect {
            x0: self.base.left,
            x1: self.base.right(),
            y0: 0.0,
            y1: 0.5 * self.base.length,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.base.contains(x) && y > 0.0 && y < self.base.length
    }
}

/// Smallest `j` with `2^j >= len` (by direct comparison, no log rounding).
fn scale_at_least(len: f64) -> Result<i32> {
    let mut j = check_scale(len.log2().ceil() as i64)?;
    while j > MIN_SCALE && pow2(j - 1) >= len {
        j -= 1;
    }
    while pow2(j) < len {
        j = check_scale(j as i64 + 1)?;
    }
    Ok(j)
}

/// A dyadic interval `J` in one of the two grids with `I ⊆ J` and
/// `|J| <= 8|I|`. Tries `beta = 0` first, then `beta = 1/3`, smallest
/// qualifying scale first, so the witness is deterministic.
pub fn find_dyadic_cover(interval: &Interval) -> Result<(Shift, DyadicIndex)> {
    let j_lo = scale_at_least(interval.length)?;
    for beta in Shift::BOTH {
        let mut j = j_lo;
        while pow2(j) <= 8.0 * interval.length {
            let cell = DyadicIndex::cell_containing(beta, j, interval.left);
            if cell.interval().covers(interval) {
                return Ok((beta, cell));
            }
            j = check_scale(j as i64 + 1)?;
        }
    }
    // Unreachable for finite intervals: the scale with 2^j in (4|I|, 8|I|]
    // always admits a cover in at least one grid.
    Err(Error::InvalidArgument(format!(
        "no dyadic cover found for [{}, {})",
        interval.left,
        interval.right()
    )))
}

/// Two adjacent intervals of grid `beta`, of equal length `L` with
/// `|I| < L <= 2|I|`, covering `I`. Ordered left to right.
pub fn find_adjacent_cover(interval: &Interval, beta: Shift) -> Result<(DyadicIndex, DyadicIndex)> {
    // The unique scale with |I| < 2^j <= 2|I|.
    let mut j = scale_at_least(interval.length)?;
    if pow2(j) <= interval.length {
        j = check_scale(j as i64 + 1)?;
    }
    let first = DyadicIndex::cell_containing(beta, j, interval.left);
    debug_assert!(pow2(j) > interval.length && pow2(j) <= 2.0 * interval.length);
    if first.interval().covers(interval) {
        // I sits inside a single cell; pair it with its left neighbor.
        let left = DyadicIndex::new(beta, j, first.m - 1);
        Ok((left, first))
    } else {
        let right = DyadicIndex::new(beta, j, first.m + 1);
        Ok((first, right))
    }
}

/// All indices `I` of grid `beta` with scale in `[j_min, j_max]` whose
/// Carleson square contains `z = x + iy`, ordered by increasing scale.
/// At most one index per scale; scales with `2^j <= y` contribute none.
pub fn dyadic_squares_containing(
    x: f64,
    y: f64,
    beta: Shift,
    j_min: i32,
    j_max: i32,
) -> Vec<DyadicIndex> {
    debug_assert!(y > 0.0 && j_min <= j_max);
    (j_min..=j_max)
        .filter(|&j| pow2(j) > y)
        .map(|j| DyadicIndex::cell_containing(beta, j, x))
        .collect()
}

/// The smallest-scale interval of grid `beta` within `j <= j_max` whose
/// realized interval contains `[x0, x1]`, if any.
pub fn smallest_dyadic_cover_in_grid(
    x0: f64,
    x1: f64,
    beta: Shift,
    j_max: i32,
) -> Option<DyadicIndex> {
    let len = x1 - x0;
    if len <= 0.0 {
        return None;
    }
    let mut j = scale_at_least(len).ok()?;
    while j <= j_max {
        let cell = DyadicIndex::cell_containing(beta, j, x0);
        let iv = cell.interval();
        if iv.left <= x0 && x1 <= iv.right() {
            return Some(cell);
        }
        j += 1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(left: f64, length: f64) -> Interval {
        Interval::new(left, length).unwrap()
    }

    #[test]
    fn dyadic_interval_realization() {
        let a = DyadicIndex::new(Shift::Zero, 0, 0).interval();
        assert_eq!((a.left, a.length), (0.0, 1.0));

        // 2^1([0,1) + 0 - 1/3) = [-2/3, 4/3)
        let b = DyadicIndex::new(Shift::Third, 1, 0).interval();
        assert!((b.left - (-2.0 / 3.0)).abs() < 1e-15);
        assert_eq!(b.length, 2.0);

        let c = DyadicIndex::new(Shift::Zero, -1, 3).interval();
        assert_eq!((c.left, c.length), (1.5, 0.5));
    }

    /// Enumeration oracle: the parent is the unique scale-(j+1) cell claiming
    /// the child's midpoint (interior points are immune to endpoint rounding,
    /// and tiling makes the claim unique).
    fn parent_by_enumeration(idx: &DyadicIndex) -> DyadicIndex {
        let center = idx.interval().center();
        let cand = DyadicIndex::cell_containing(idx.beta, idx.j + 1, center);
        // The candidate must contain the whole child up to rounding.
        let (c, p) = (idx.interval(), cand.interval());
        let slack = 1e-12 * c.length;
        assert!(p.left <= c.left + slack && c.right() <= p.right() + slack);
        cand
    }

    #[test]
    fn dyadic_parent_examples() {
        let p = DyadicIndex::new(Shift::Zero, 0, 0).parent().unwrap();
        assert_eq!(p, DyadicIndex::new(Shift::Zero, 1, 0));
        assert_eq!(p.interval(), iv(0.0, 2.0));

        let p = DyadicIndex::new(Shift::Zero, 0, 3).parent().unwrap();
        assert_eq!(p, DyadicIndex::new(Shift::Zero, 1, 1));
        assert_eq!(p.interval(), iv(2.0, 2.0));

        let child = DyadicIndex::new(Shift::Third, 0, 0);
        assert!((child.interval().left - 1.0 / 3.0).abs() < 1e-15);
        let p = child.parent().unwrap();
        assert_eq!(p, parent_by_enumeration(&child));
        assert!(p.interval().covers(&child.interval()));
    }

    #[test]
    fn parent_matches_enumeration_oracle() {
        for beta in Shift::BOTH {
            for j in [-3, -2, -1, 0, 1, 4] {
                for m in -17..17 {
                    let idx = DyadicIndex::new(beta, j, m);
                    assert_eq!(idx.parent().unwrap(), parent_by_enumeration(&idx));
                }
            }
        }
    }

    #[test]
    fn children_invert_parent() {
        for beta in Shift::BOTH {
            for j in [-2, 0, 3] {
                for m in -9..9 {
                    let idx = DyadicIndex::new(beta, j, m);
                    let kids = idx.children().unwrap();
                    assert_eq!(kids[0].m + 1, kids[1].m);
                    for kid in kids {
                        assert_eq!(kid.parent().unwrap(), idx);
                        // Realized containment, allowing endpoint rounding.
                        let (p, c) = (idx.interval(), kid.interval());
                        let slack = 1e-12 * p.length;
                        assert!(p.left <= c.left + slack && c.right() <= p.right() + slack);
                        assert!(idx.contains_x(c.center()));
                    }
                }
            }
        }
    }

    #[test]
    fn cover_examples() {
        // Smallest qualifying scale wins; beta = 0 preferred.
        let (beta, j) = find_dyadic_cover(&iv(0.4, 0.5)).unwrap();
        assert_eq!(beta, Shift::Zero);
        assert_eq!(j.interval(), iv(0.0, 1.0));

        // A dyadic interval covers itself.
        let (beta, j) = find_dyadic_cover(&iv(0.0, 1.0)).unwrap();
        assert_eq!(beta, Shift::Zero);
        assert_eq!(j.interval(), iv(0.0, 1.0));

        // [0.9, 1.1) straddles a standard-grid boundary at every qualifying
        // scale, so the shifted grid must be used. The smallest qualifying
        // shifted cover is [5/6, 4/3).
        let target = iv(0.9, 0.2);
        for j in -3..=0 {
            let cell = DyadicIndex::cell_containing(Shift::Zero, j, target.left);
            assert!(!cell.interval().covers(&target));
        }
        let (beta, j) = find_dyadic_cover(&target).unwrap();
        assert_eq!(beta, Shift::Third);
        assert!(j.interval().covers(&target));
        assert!(j.interval().length <= 8.0 * target.length);
        assert!((j.interval().left - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn adjacent_cover_examples() {
        let (a, b) = find_adjacent_cover(&iv(0.9, 0.2), Shift::Zero).unwrap();
        assert_eq!(a.interval(), iv(0.75, 0.25));
        assert_eq!(b.interval(), iv(1.0, 0.25));

        // I = [0,1) sits inside the single cell [0,2); pair with left neighbor.
        let (a, b) = find_adjacent_cover(&iv(0.0, 1.0), Shift::Zero).unwrap();
        assert_eq!(a.interval(), iv(-2.0, 2.0));
        assert_eq!(b.interval(), iv(0.0, 2.0));

        // Shifted grid, |I| = 1/2 so L = 1; I sits inside [1/3, 4/3).
        let target = iv(1.0 / 3.0, 0.5);
        let (a, b) = find_adjacent_cover(&target, Shift::Third).unwrap();
        assert_eq!(b.m, a.m + 1);
        assert_eq!(a.interval().length, 1.0);
        assert!((b.interval().left - 1.0 / 3.0).abs() < 1e-12);
        assert!(a.interval().left <= target.left && target.right() <= b.interval().right());
    }

    #[test]
    fn adjacent_cover_postcondition_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let len = 10f64.powf(rng.gen_range(-3.0..3.0));
            let left = rng.gen_range(-50.0..50.0);
            let target = iv(left, len);
            for beta in Shift::BOTH {
                let (a, b) = find_adjacent_cover(&target, beta).unwrap();
                let (ia, ib) = (a.interval(), b.interval());
                assert_eq!(ia.length, ib.length);
                assert!(ia.length > len && ia.length <= 2.0 * len);
                assert!((ia.right() - ib.left).abs() <= 1e-9 * ia.length, "adjacent");
                assert!(ia.left <= target.left && target.right() <= ib.right());
            }
        }
    }

    #[test]
    fn squares_containing_examples() {
        let found = dyadic_squares_containing(0.5, 0.25, Shift::Zero, -1, 2);
        let lefts: Vec<(f64, f64)> = found
            .iter()
            .map(|i| (i.interval().left, i.interval().length))
            .collect();
        assert_eq!(lefts, vec![(0.5, 0.5), (0.0, 1.0), (0.0, 2.0), (0.0, 4.0)]);

        assert!(dyadic_squares_containing(0.5, 4.0, Shift::Zero, -1, 2).is_empty());

        let found = dyadic_squares_containing(-0.1, 0.1, Shift::Zero, -3, 0);
        let lefts: Vec<(f64, f64)> = found
            .iter()
            .map(|i| (i.interval().left, i.interval().length))
            .collect();
        assert_eq!(
            lefts,
            vec![(-0.125, 0.125), (-0.25, 0.25), (-0.5, 0.5), (-1.0, 1.0)]
        );
    }

    #[test]
    fn tiling_membership_is_exact() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20_000 {
            let x = rng.gen_range(-1000.0..1000.0);
            let j = rng.gen_range(-20..20);
            for beta in Shift::BOTH {
                let cell = DyadicIndex::cell_containing(beta, j, x);
                assert!(cell.contains_x(x));
                // Neighbors do not claim the point.
                assert!(!DyadicIndex::new(beta, j, cell.m - 1).contains_x(x));
                assert!(!DyadicIndex::new(beta, j, cell.m + 1).contains_x(x));
            }
        }
    }

    #[test]
    fn scale_out_of_range_is_reported() {
        let idx = DyadicIndex::new(Shift::Zero, MAX_SCALE, 0);
        assert!(matches!(idx.parent(), Err(Error::ScaleOutOfRange { .. })));
    }

    #[test]
    fn carleson_square_halves_partition() {
        let sq = iv(0.25, 0.5).carleson_square();
        let (q, t, b) = (sq.rect(), sq.top_half(), sq.bottom_half());
        assert_eq!(q.y0, 0.0);
        assert_eq!(q.y1, 0.5);
        assert_eq!(t.y0, b.y1);
        assert_eq!(t.y1, q.y1);
        assert!(t.intersect(&b).is_none());
    }
}
