//! Adaptive two-dimensional quadrature over rectangles.
//!
//! The rule is per-cell tensor midpoint with adaptive bisection into four
//! quadrants; the error estimate compares one bisection level (Richardson,
//! midpoint rule has order two so the coarse/fine gap overestimates the fine
//! error by a factor of three). Integrands with a boundary singularity at
//! `y = 0` are handled by geometric strip refinement toward the boundary.

use crate::error::{Error, Result};
use crate::geometry::Rect;

/// Hard cap on bisection depth; beyond this the requested tolerance is
/// reported as unattainable rather than silently degraded.
const MAX_DEPTH: u32 = 26;

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error_bound: f64,
    pub evals: u64,
}

fn midpoint<F: Fn(f64, f64) -> f64>(f: &F, r: &Rect) -> f64 {
    let (cx, cy) = r.center();
    f(cx, cy) * r.area()
}

fn quadrants(r: &Rect) -> [Rect; 4] {
    let (cx, cy) = r.center();
    [
        Rect { x0: r.x0, x1: cx, y0: r.y0, y1: cy },
        Rect { x0: cx, x1: r.x1, y0: r.y0, y1: cy },
        Rect { x0: r.x0, x1: cx, y0: cy, y1: r.y1 },
        Rect { x0: cx, x1: r.x1, y0: cy, y1: r.y1 },
    ]
}

fn adaptive_rec<F: Fn(f64, f64) -> f64>(
    f: &F,
    r: &Rect,
    coarse: f64,
    tol: f64,
    depth: u32,
    out: &mut QuadResult,
) -> Result<()> {
    let quads = quadrants(r);
    let fine: [f64; 4] = [
        midpoint(f, &quads[0]),
        midpoint(f, &quads[1]),
        midpoint(f, &quads[2]),
        midpoint(f, &quads[3]),
    ];
    out.evals += 4;
    let fine_sum: f64 = fine.iter().sum();
    // Gate on the extrapolated value's residual (one order below the
    // coarse/fine gap), as in adaptive Simpson.
    let err = (fine_sum - coarse).abs() / 15.0;
    if err <= tol || !err.is_finite() {
        if !err.is_finite() {
            return Err(Error::ToleranceNotMet {
                requested: tol,
                achieved: f64::INFINITY,
            });
        }
        // One Richardson extrapolation step on acceptance.
        out.value += fine_sum + (fine_sum - coarse) / 3.0;
        out.error_bound += err;
        return Ok(());
    }
    if depth >= MAX_DEPTH {
        return Err(Error::ToleranceNotMet {
            requested: tol,
            achieved: err,
        });
    }
    for (q, c) in quads.iter().zip(fine) {
        adaptive_rec(f, q, c, tol / 4.0, depth + 1, out)?;
    }
    Ok(())
}

/// Integrate `f` over `rect` to absolute tolerance `tol`.
pub fn adaptive_quad<F: Fn(f64, f64) -> f64>(f: &F, rect: &Rect, tol: f64) -> Result<QuadResult> {
    let mut out = QuadResult { value: 0.0, error_bound: 0.0, evals: 1 };
    let coarse = midpoint(f, rect);
    adaptive_rec(f, rect, coarse, tol, 0, &mut out)?;
    Ok(out)
}

/// Integrate `f` over a rectangle whose lower edge sits on the boundary
/// `y = 0`, where `f` may blow up. The rectangle is cut into geometric
/// strips `y in [y1 / 2^(k+1), y1 / 2^k)`; strip `k` receives the error
/// budget `tol / (4 (k+1)(k+2))` (summing to `tol/4`), and the loop stops
/// once the geometric extrapolation of the remaining strips drops below
/// `tol/2`. Integrands barely on the convergent side of the `y = 0`
/// divergence need many strips and get slow; they still converge.
pub fn adaptive_quad_boundary<F: Fn(f64, f64) -> f64>(
    f: &F,
    rect: &Rect,
    tol: f64,
) -> Result<QuadResult> {
    if rect.y0 > 0.0 {
        return adaptive_quad(f, rect, tol);
    }
    let mut out = QuadResult { value: 0.0, error_bound: 0.0, evals: 0 };
    let mut top = rect.y1;
    let mut prev = f64::INFINITY;
    for k in 0u64..=4000 {
        let bottom = top * 0.5;
        let strip = Rect { x0: rect.x0, x1: rect.x1, y0: bottom, y1: top };
        let strip_tol = tol / (4.0 * (k + 1) as f64 * (k + 2) as f64);
        let part = adaptive_quad(f, &strip, strip_tol)?;
        out.value += part.value;
        out.error_bound += part.error_bound;
        out.evals += part.evals;
        let contrib = part.value.abs();
        if k >= 4 && contrib < prev {
            // Strips decay geometrically with observed ratio rho < 1; bound
            // the remainder by contrib * rho / (1 - rho).
            let rho = contrib / prev;
            let remainder = contrib * rho / (1.0 - rho);
            if remainder < tol * 0.5 {
                out.error_bound += remainder;
                return Ok(out);
            }
        }
        prev = contrib;
        top = bottom;
    }
    Err(Error::ToleranceNotMet { requested: tol, achieved: prev })
}
