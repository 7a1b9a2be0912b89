//! The measures `dV_alpha = y^alpha dx dy`, weights and their integrals,
//! weighted norms, the Bekolle-Bonami class constants, reverse doubling, and
//! the exponent arithmetic tying `(alpha, gamma, p)` to `q`, `r`, `eta` and
//! the special pair `(p0, q0)`.
//!
//! Every weight representable here (power `y^s`, piecewise-constant grid, or
//! a pointwise power of either) admits an exact closed-form integral against
//! `dV_alpha`, so the integration routines are exact up to rounding; the
//! adaptive quadrature route in [`crate::quadrature`] is kept as an
//! independent cross-check of the closed forms.

use crate::error::{Error, Result};
use crate::geometry::{Interval, Rect};
use rand::Rng;

/// `\int_rect dV_alpha`, closed form. Domain error if `alpha <= -1`.
pub fn dv_alpha(rect: &Rect, alpha: f64) -> Result<f64> {
    if alpha <= -1.0 {
        return Err(Error::InvalidArgument(format!(
            "dV_alpha requires alpha > -1, got {alpha}"
        )));
    }
    let e = alpha + 1.0;
    Ok(rect.width() * (rect.y1.powf(e) - rect.y0.powf(e)) / e)
}

/// `\int_{y0}^{y1} y^e dy`, with divergence signalling at the boundary.
fn y_moment(y0: f64, y1: f64, e: f64, what: &str) -> Result<f64> {
    if y0 == 0.0 && e <= -1.0 {
        return Err(Error::DivergentIntegral(format!(
            "{what}: exponent {e} <= -1 on a rectangle touching y = 0"
        )));
    }
    if e == -1.0 {
        Ok((y1 / y0).ln())
    } else {
        Ok((y1.powf(e + 1.0) - y0.powf(e + 1.0)) / (e + 1.0))
    }
}

/// A weight on the upper half-plane: strictly positive, locally integrable.
///
/// `Grid` weights take their cell value inside their window and the value 1
/// outside it, so they are globally defined and bounded; `Scaled` is the
/// pointwise power `base(z)^power`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Weight {
    Power { s: f64 },
    Grid(GridWeight),
    Scaled { base: Box<Weight>, power: f64 },
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridWeight {
    pub window: Rect,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `iy * nx + ix`, strictly positive.
    pub values: Vec<f64>,
}

impl GridWeight {
    pub fn new(window: Rect, nx: usize, ny: usize, values: Vec<f64>) -> Result<GridWeight> {
        if nx == 0 || ny == 0 || values.len() != nx * ny {
            return Err(Error::InvalidArgument(format!(
                "grid weight needs nx*ny values, got {}x{} with {}",
                nx,
                ny,
                values.len()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidArgument(
                "grid weight values must be finite and > 0".into(),
            ));
        }
        Ok(GridWeight { window, nx, ny, values })
    }

    fn cell_rect(&self, ix: usize, iy: usize) -> Rect {
        let dx = self.window.width() / self.nx as f64;
        let dy = self.window.height() / self.ny as f64;
        Rect {
            x0: self.window.x0 + ix as f64 * dx,
            x1: self.window.x0 + (ix + 1) as f64 * dx,
            y0: self.window.y0 + iy as f64 * dy,
            y1: self.window.y0 + (iy + 1) as f64 * dy,
        }
    }

    fn value_at(&self, x: f64, y: f64) -> f64 {
        if !self.window.contains(x, y) {
            return 1.0;
        }
        let ix = (((x - self.window.x0) / self.window.width() * self.nx as f64) as usize)
            .min(self.nx - 1);
        let iy = (((y - self.window.y0) / self.window.height() * self.ny as f64) as usize)
            .min(self.ny - 1);
        self.values[iy * self.nx + ix]
    }
}

impl Weight {
    pub fn power(s: f64) -> Weight {
        Weight::Power { s }
    }

    pub fn one() -> Weight {
        Weight::Power { s: 0.0 }
    }

    /// Pointwise value at `z = x + iy`, `y > 0`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Weight::Power { s } => y.powf(*s),
            Weight::Grid(g) => g.value_at(x, y),
            Weight::Scaled { base, power } => base.eval(x, y).powf(*power),
        }
    }

    /// The pointwise power `self^t`, normalized so that powers of power
    /// weights stay closed-form.
    pub fn pow(&self, t: f64) -> Weight {
        if t == 1.0 {
            return self.clone();
        }
        match self {
            Weight::Power { s } => Weight::Power { s: s * t },
            Weight::Grid(_) => Weight::Scaled { base: Box::new(self.clone()), power: t },
            Weight::Scaled { base, power } => base.pow(power * t),
        }
    }

    /// Reduce to one of the two canonical shapes: a pure power exponent, or
    /// a grid weight raised to a power.
    fn canonical(&self) -> CanonicalWeight<'_> {
        match self {
            Weight::Power { s } => CanonicalWeight::Power(*s),
            Weight::Grid(g) => CanonicalWeight::Grid(g, 1.0),
            Weight::Scaled { base, power } => match base.canonical() {
                CanonicalWeight::Power(s) => CanonicalWeight::Power(s * power),
                CanonicalWeight::Grid(g, t) => CanonicalWeight::Grid(g, t * power),
            },
        }
    }

    /// `\int_rect w dV_alpha`, exact. Signals divergence for power weights
    /// whose combined exponent makes the boundary integral blow up.
    pub fn integrate(&self, rect: &Rect, alpha: f64) -> Result<f64> {
        if alpha <= -1.0 {
            return Err(Error::InvalidArgument(format!(
                "integration against dV_alpha requires alpha > -1, got {alpha}"
            )));
        }
        match self.canonical() {
            CanonicalWeight::Power(s) => {
                let m = y_moment(rect.y0, rect.y1, s + alpha, "power weight")?;
                Ok(rect.width() * m)
            }
            CanonicalWeight::Grid(g, t) => {
                let mut total = match rect.intersect(&g.window) {
                    None => dv_alpha(rect, alpha)?,
                    Some(inner) => {
                        let mut acc = dv_alpha(rect, alpha)? - dv_alpha(&inner, alpha)?;
                        for iy in 0..g.ny {
                            for ix in 0..g.nx {
                                if let Some(part) = g.cell_rect(ix, iy).intersect(&inner) {
                                    acc += g.values[iy * g.nx + ix].powf(t)
                                        * dv_alpha(&part, alpha)?;
                                }
                            }
                        }
                        acc
                    }
                };
                // Guard against negative round-off on thin remainders.
                if total < 0.0 && total > -1e-12 {
                    total = 0.0;
                }
                Ok(total)
            }
        }
    }

    /// Essential supremum of `self^t` over `rect`; `f64::INFINITY` when
    /// unbounded (power weights with a negative combined exponent on a
    /// rectangle touching the boundary).
    pub fn ess_sup_pow(&self, t: f64, rect: &Rect) -> f64 {
        match self.canonical() {
            CanonicalWeight::Power(s) => {
                let e = s * t;
                if e > 0.0 {
                    rect.y1.powf(e)
                } else if e == 0.0 {
                    1.0
                } else if rect.y0 == 0.0 {
                    f64::INFINITY
                } else {
                    rect.y0.powf(e)
                }
            }
            CanonicalWeight::Grid(g, u) => {
                let e = u * t;
                let mut sup = f64::NEG_INFINITY;
                let mut covered = 0.0;
                if let Some(inner) = rect.intersect(&g.window) {
                    covered = inner.area();
                    for iy in 0..g.ny {
                        for ix in 0..g.nx {
                            if g.cell_rect(ix, iy).intersect(&inner).is_some() {
                                sup = sup.max(g.values[iy * g.nx + ix].powf(e));
                            }
                        }
                    }
                }
                if covered + 1e-15 < rect.area() {
                    sup = sup.max(1.0);
                }
                sup
            }
        }
    }

    /// Short text form for reports.
    pub fn describe(&self) -> String {
        match self {
            Weight::Power { s } if *s == 0.0 => "1".to_string(),
            Weight::Power { s } => format!("y^{s}"),
            Weight::Grid(g) => format!("grid[{}x{}]", g.nx, g.ny),
            Weight::Scaled { base, power } => format!("({})^{}", base.describe(), power),
        }
    }
}

enum CanonicalWeight<'a> {
    Power(f64),
    Grid(&'a GridWeight, f64),
}

/// Independent quadrature route for `\int_rect w dV_alpha`; used to
/// cross-check the closed forms, never as the primary path.
pub fn integrate_weight_adaptive(w: &Weight, rect: &Rect, alpha: f64, tol: f64) -> Result<f64> {
    let g = |x: f64, y: f64| w.eval(x, y) * y.powf(alpha);
    Ok(crate::quadrature::adaptive_quad_boundary(&g, rect, tol)?.value)
}

// ---------------------------------------------------------------------------
// Grid test functions
// ---------------------------------------------------------------------------

/// Piecewise-constant nonnegative test function on a uniform mesh inside a
/// bounded window; zero outside the window.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridFunction {
    pub window: Rect,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `iy * nx + ix`, nonnegative.
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(window: Rect, nx: usize, ny: usize, values: Vec<f64>) -> Result<GridFunction> {
        if nx == 0 || ny == 0 || values.len() != nx * ny {
            return Err(Error::InvalidArgument(format!(
                "grid function needs nx*ny values, got {}x{} with {}",
                nx,
                ny,
                values.len()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument(
                "grid function values must be finite and >= 0".into(),
            ));
        }
        Ok(GridFunction { window, nx, ny, values })
    }

    /// Build from a pointwise sampler evaluated at cell centers.
    pub fn from_fn(
        window: Rect,
        nx: usize,
        ny: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<GridFunction> {
        let dx = window.width() / nx as f64;
        let dy = window.height() / ny as f64;
        let mut values = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                let x = window.x0 + (ix as f64 + 0.5) * dx;
                let y = window.y0 + (iy as f64 + 0.5) * dy;
                values.push(f(x, y));
            }
        }
        GridFunction::new(window, nx, ny, values)
    }

    pub fn dx(&self) -> f64 {
        self.window.width() / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.window.height() / self.ny as f64
    }

    pub fn cell_rect(&self, ix: usize, iy: usize) -> Rect {
        Rect {
            x0: self.window.x0 + ix as f64 * self.dx(),
            x1: self.window.x0 + (ix + 1) as f64 * self.dx(),
            y0: self.window.y0 + iy as f64 * self.dy(),
            y1: self.window.y0 + (iy + 1) as f64 * self.dy(),
        }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        if !self.window.contains(x, y) {
            return 0.0;
        }
        let ix = (((x - self.window.x0) / self.dx()) as usize).min(self.nx - 1);
        let iy = (((y - self.window.y0) / self.dy()) as usize).min(self.ny - 1);
        self.values[iy * self.nx + ix]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    pub fn scale(&self, factor: f64) -> GridFunction {
        GridFunction {
            window: self.window,
            nx: self.nx,
            ny: self.ny,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Pointwise sum on this mesh (the other function is sampled at cell
    /// centers).
    pub fn add(&self, other: &GridFunction) -> GridFunction {
        let mut out = self.clone();
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let c = self.cell_rect(ix, iy).center();
                out.values[iy * self.nx + ix] += other.value(c.0, c.1);
            }
        }
        out
    }

    /// Exact `\int_E f y^e dx dy` for an axis-aligned `E`; `O(nx * ny)`.
    /// Use [`MomentTable`] for repeated queries.
    pub fn integral_dv(&self, rect: &Rect, e: f64) -> Result<f64> {
        let Some(inner) = rect.intersect(&self.window) else {
            return Ok(0.0);
        };
        let mut acc = 0.0;
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let v = self.values[iy * self.nx + ix];
                if v == 0.0 {
                    continue;
                }
                if let Some(part) = self.cell_rect(ix, iy).intersect(&inner) {
                    acc += v * part.width() * y_moment(part.y0, part.y1, e, "grid function")?;
                }
            }
        }
        Ok(acc)
    }

    /// Total `\int f dV_alpha` over the window.
    pub fn total_mass(&self, alpha: f64) -> Result<f64> {
        self.integral_dv(&self.window, alpha)
    }
}

/// Per-column cumulative table for fast exact integrals
/// `\int_E f(x, y) y^e dx dy` over axis-aligned rectangles `E`.
///
/// Queries cost `O(columns overlapped)`; partial cells are handled exactly
/// because `f` is constant per cell and the `y`-moment has a closed form.
pub struct MomentTable<'a> {
    f: &'a GridFunction,
    e: f64,
    /// `col_cum[ix * (ny+1) + iy]` = integral of `f * y^e` over column `ix`,
    /// rows `0..iy`.
    col_cum: Vec<f64>,
}

impl<'a> MomentTable<'a> {
    pub fn new(f: &'a GridFunction, e: f64) -> Result<MomentTable<'a>> {
        let mut row_moment = Vec::with_capacity(f.ny);
        for iy in 0..f.ny {
            let r = f.cell_rect(0, iy);
            row_moment.push(y_moment(r.y0, r.y1, e, "moment table")?);
        }
        let mut col_cum = vec![0.0; f.nx * (f.ny + 1)];
        let dx = f.dx();
        for ix in 0..f.nx {
            for iy in 0..f.ny {
                col_cum[ix * (f.ny + 1) + iy + 1] = col_cum[ix * (f.ny + 1) + iy]
                    + f.values[iy * f.nx + ix] * dx * row_moment[iy];
            }
        }
        Ok(MomentTable { f, e, col_cum })
    }

    pub fn exponent(&self) -> f64 {
        self.e
    }

    /// Exact integral of `f * y^e` over `rect`.
    pub fn integral(&self, rect: &Rect) -> f64 {
        let f = self.f;
        let Some(inner) = rect.intersect(&f.window) else {
            return 0.0;
        };
        let dx = f.dx();
        let dy = f.dy();
        // Rows iy0 .. iy1-1 meet the query; columns ix0 .. ix1-1 likewise.
        let ix0 = (((inner.x0 - f.window.x0) / dx).floor() as usize).min(f.nx - 1);
        let ix1 = (((inner.x1 - f.window.x0) / dx).ceil() as usize).clamp(ix0 + 1, f.nx);
        let iy0 = (((inner.y0 - f.window.y0) / dy).floor() as usize).min(f.ny - 1);
        let iy1 = (((inner.y1 - f.window.y0) / dy).ceil() as usize).clamp(iy0 + 1, f.ny);

        // Moments of the slivers of the bottom and top rows that fall
        // outside the query; subtracted per column below. Shared by all
        // columns since the mesh is uniform.
        let row_lo_start = f.window.y0 + iy0 as f64 * dy;
        let below = if inner.y0 > row_lo_start {
            y_moment(row_lo_start, inner.y0, self.e, "moment query").unwrap_or(0.0)
        } else {
            0.0
        };
        let row_hi_end = f.window.y0 + iy1 as f64 * dy;
        let above = if inner.y1 < row_hi_end {
            y_moment(inner.y1, row_hi_end.min(f.window.y1), self.e, "moment query")
                .unwrap_or(0.0)
        } else {
            0.0
        };

        let mut acc = 0.0;
        for ix in ix0..ix1 {
            let cell_x0 = f.window.x0 + ix as f64 * dx;
            let cell_x1 = cell_x0 + dx;
            let w = (inner.x1.min(cell_x1) - inner.x0.max(cell_x0)).max(0.0);
            if w == 0.0 {
                continue;
            }
            let base = ix * (f.ny + 1);
            let mut col = self.col_cum[base + iy1] - self.col_cum[base + iy0];
            col -= self.f.values[iy0 * f.nx + ix] * dx * below;
            col -= self.f.values[(iy1 - 1) * f.nx + ix] * dx * above;
            acc += (w / dx) * col;
        }
        acc.max(0.0)
    }
}

// ---------------------------------------------------------------------------
// Weighted norms
// ---------------------------------------------------------------------------

/// `||f||_{p, w, alpha} = (\int |f|^p w dV_alpha)^{1/p}`, exact cellwise for
/// piecewise-constant `f`.
pub fn weighted_lp_norm(f: &GridFunction, w: &Weight, p: f64, alpha: f64) -> Result<f64> {
    if p < 1.0 {
        return Err(Error::InvalidArgument(format!("norm requires p >= 1, got {p}")));
    }
    let mut acc = 0.0;
    for iy in 0..f.ny {
        for ix in 0..f.nx {
            let v = f.values[iy * f.nx + ix];
            if v == 0.0 {
                continue;
            }
            acc += v.powf(p) * w.integrate(&f.cell_rect(ix, iy), alpha)?;
        }
    }
    Ok(acc.powf(1.0 / p))
}

// ---------------------------------------------------------------------------
// Exponent arithmetic
// ---------------------------------------------------------------------------

/// The exponent bundle derived from `(alpha, gamma, p)`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Exponents {
    pub alpha: f64,
    pub gamma: f64,
    pub p: f64,
    pub q: f64,
    /// Conjugate of `p`; `inf` when `p = 1` (never used numerically then).
    pub p_prime: f64,
    pub q_prime: f64,
    /// `r = 1 + q / p'`.
    pub r: f64,
    /// `eta = (2 + alpha)(q/p - 1) + alpha`.
    pub eta: f64,
    /// `p = 1`: only the weak-type statements apply.
    pub weak_regime: bool,
}

impl Exponents {
    /// Constant exponent of the strong bound, `1 + p'/p + q/p'`.
    pub fn strong_exponent(&self) -> f64 {
        1.0 + self.p_prime / self.p + self.q / self.p_prime
    }

    /// Exponent appearing in the weak-type statement for the fractional
    /// operator.
    pub fn weak_t_exponent_stated(&self) -> f64 {
        self.q
    }

    /// Exponent the weak-type argument actually produces for the fractional
    /// operator.
    pub fn weak_t_exponent_derived(&self) -> f64 {
        self.q * self.q
    }

    /// Exponent of the weak-type bound for the positive projection.
    pub fn weak_p_exponent(&self) -> f64 {
        2.0 * self.q - 1.0
    }
}

fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

/// Derive the full exponent bundle. Preconditions: `alpha > -1`,
/// `0 <= gamma < 2 + alpha`, and `1 <= p < (2 + alpha) / gamma`
/// (any `p >= 1` when `gamma = 0`).
pub fn exponents_from(alpha: f64, gamma: f64, p: f64) -> Result<Exponents> {
    if alpha <= -1.0 {
        return Err(Error::InvalidArgument(format!("alpha must be > -1, got {alpha}")));
    }
    if !(0.0..2.0 + alpha).contains(&gamma) {
        return Err(Error::InvalidArgument(format!(
            "gamma must satisfy 0 <= gamma < 2 + alpha, got gamma={gamma}, alpha={alpha}"
        )));
    }
    if p < 1.0 {
        return Err(Error::InvalidArgument(format!("p must be >= 1, got {p}")));
    }
    let t = gamma / (2.0 + alpha);
    if gamma > 0.0 && p >= (2.0 + alpha) / gamma {
        return Err(Error::InvalidArgument(format!(
            "p must be < (2 + alpha)/gamma = {}, got {p}",
            (2.0 + alpha) / gamma
        )));
    }
    let q = 1.0 / (1.0 / p - t);
    let p_prime = conjugate(p);
    let q_prime = conjugate(q);
    let r = if p_prime.is_infinite() { 1.0 } else { 1.0 + q / p_prime };
    let eta = (2.0 + alpha) * (q / p - 1.0) + alpha;
    Ok(Exponents {
        alpha,
        gamma,
        p,
        q,
        p_prime,
        q_prime,
        r,
        eta,
        weak_regime: p == 1.0,
    })
}

/// The special exponent pair with the improved constant: for
/// `t = gamma / (2 + alpha)` in `(0, 1)`,
/// `p0 = (2 - t) / (t - t^2 + 1)` and `q0 = (2 - t) / (1 - t)`.
pub fn p0q0(alpha: f64, gamma: f64) -> Result<(f64, f64)> {
    if alpha <= -1.0 || gamma <= 0.0 || gamma >= 2.0 + alpha {
        return Err(Error::InvalidArgument(format!(
            "p0/q0 requires alpha > -1 and 0 < gamma < 2 + alpha, got alpha={alpha}, gamma={gamma}"
        )));
    }
    let t = gamma / (2.0 + alpha);
    let p0 = (2.0 - t) / (t - t * t + 1.0);
    let q0 = (2.0 - t) / (1.0 - t);
    Ok((p0, q0))
}

// ---------------------------------------------------------------------------
// Weight class constants
// ---------------------------------------------------------------------------

/// Outcome of a family supremum for a weight-class bracket. The family is a
/// finite stand-in for the supremum over all intervals, so a finite `value`
/// is a certified lower bound on the true constant; `f64::INFINITY` records a
/// divergent factor with the offending interval as witness.
#[derive(Debug, Clone, serde::Serialize)]
pub struct WeightConstantReport {
    pub value: f64,
    pub witness: Interval,
    pub family_size: usize,
    pub quad_tolerance: f64,
}

fn family_sup(
    family: &[Interval],
    alpha: f64,
    tol: f64,
    mut per_square: impl FnMut(&Rect, f64) -> Result<f64>,
) -> Result<WeightConstantReport> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("interval family is empty".into()));
    }
    let mut best = f64::NEG_INFINITY;
    let mut witness = family[0];
    for interval in family {
        let rect = interval.carleson_square().rect();
        let denom = dv_alpha(&rect, alpha)?;
        let v = match per_square(&rect, denom) {
            Ok(v) => v,
            Err(Error::DivergentIntegral(_)) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        if v > best {
            best = v;
            witness = *interval;
            if best.is_infinite() {
                break;
            }
        }
    }
    Ok(WeightConstantReport {
        value: best,
        witness,
        family_size: family.len(),
        quad_tolerance: tol,
    })
}

/// `[w]_{B_{p,q,alpha}}`: supremum over the family of
/// `(avg of w^q)^(1/q) (avg of w^{-p'})^(1/p')` with averages against
/// `dV_alpha` over the Carleson square.
pub fn bpq_constant(
    w: &Weight,
    p: f64,
    q: f64,
    alpha: f64,
    family: &[Interval],
    tol: f64,
) -> Result<WeightConstantReport> {
    if p <= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "B_(p,q,alpha) bracket requires p > 1, got {p}"
        )));
    }
    let p_prime = conjugate(p);
    let wq = w.pow(q);
    let wmp = w.pow(-p_prime);
    family_sup(family, alpha, tol, |rect, denom| {
        let a = wq.integrate(rect, alpha)? / denom;
        let b = wmp.integrate(rect, alpha)? / denom;
        Ok(a.powf(1.0 / q) * b.powf(1.0 / p_prime))
    })
}

/// `[w]_{B_{1,q,alpha}}`: supremum over the family of
/// `(avg of w^q)^(1/q) * esssup_(Q_I) w^{-1}`.
pub fn b1q_constant(
    w: &Weight,
    q: f64,
    alpha: f64,
    family: &[Interval],
    tol: f64,
) -> Result<WeightConstantReport> {
    if q < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "B_(1,q,alpha) bracket requires q >= 1, got {q}"
        )));
    }
    let wq = w.pow(q);
    family_sup(family, alpha, tol, |rect, denom| {
        let sup_inv = w.ess_sup_pow(-1.0, rect);
        if sup_inv.is_infinite() {
            return Ok(f64::INFINITY);
        }
        let a = wq.integrate(rect, alpha)? / denom;
        Ok(a.powf(1.0 / q) * sup_inv)
    })
}

/// `[w]_{B_(p,alpha)}` (Bekolle-Bonami): supremum over the family of
/// `(avg of w) (avg of w^{1-p'})^(p-1)`.
pub fn bekolle_constant(
    w: &Weight,
    p: f64,
    alpha: f64,
    family: &[Interval],
    tol: f64,
) -> Result<WeightConstantReport> {
    if p <= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "Bekolle-Bonami bracket requires p > 1, got {p}"
        )));
    }
    let p_prime = conjugate(p);
    let w1 = w.clone();
    let w2 = w.pow(1.0 - p_prime);
    family_sup(family, alpha, tol, |rect, denom| {
        let a = w1.integrate(rect, alpha)? / denom;
        let b = w2.integrate(rect, alpha)? / denom;
        Ok(a * b.powf(p - 1.0))
    })
}

/// Closed-form `[y^s]_{B_(p,q,alpha)}` per Carleson square (the bracket is
/// the same for every square, so this is the exact supremum).
/// Returns `f64::INFINITY` outside the admissible range
/// `-(alpha+1)/q < s < (alpha+1)/p'`.
pub fn power_bpq_closed_form(s: f64, p: f64, q: f64, alpha: f64) -> f64 {
    let p_prime = conjugate(p);
    let a1 = alpha + 1.0;
    if q * s + a1 <= 0.0 || a1 - p_prime * s <= 0.0 {
        return f64::INFINITY;
    }
    (a1 / (q * s + a1)).powf(1.0 / q) * (a1 / (a1 - p_prime * s)).powf(1.0 / p_prime)
}

/// Closed-form `[y^s]_{B_(1,q,alpha)}`; finite only for
/// `-(alpha+1)/q < s <= 0`.
pub fn power_b1q_closed_form(s: f64, q: f64, alpha: f64) -> f64 {
    let a1 = alpha + 1.0;
    if s > 0.0 || q * s + a1 <= 0.0 {
        return f64::INFINITY;
    }
    (a1 / (q * s + a1)).powf(1.0 / q)
}

/// Closed-form `[y^s]_{B_(p,alpha)}`; finite only for
/// `-(alpha+1) < s < (alpha+1)(p-1)`.
pub fn power_bekolle_closed_form(s: f64, p: f64, alpha: f64) -> f64 {
    let p_prime = conjugate(p);
    let a1 = alpha + 1.0;
    if s + a1 <= 0.0 || (1.0 - p_prime) * s + a1 <= 0.0 {
        return f64::INFINITY;
    }
    (a1 / (s + a1)) * (a1 / ((1.0 - p_prime) * s + a1)).powf(p - 1.0)
}

/// Reverse doubling: `C_(p,alpha) = max(2, (2^(1+alpha)/(2^(1+alpha)-1))^p)`
/// and `theta = 1 - 1/(C_(p,alpha) [w])`. Returns `(theta, c_p_alpha)`.
pub fn reverse_doubling_theta(p: f64, alpha: f64, bracket: f64) -> Result<(f64, f64)> {
    if bracket < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "Bekolle-Bonami bracket must be >= 1, got {bracket}"
        )));
    }
    let two_a = f64::powf(2.0, 1.0 + alpha);
    let c = f64::max(2.0, (two_a / (two_a - 1.0)).powf(p));
    Ok((1.0 - 1.0 / (c * bracket), c))
}

// ---------------------------------------------------------------------------
// Interval families
// ---------------------------------------------------------------------------

/// Finite stand-in for "all intervals": every dyadic interval (both grids)
/// meeting the window across the scale range, plus `n_random` seeded random
/// intervals overlapping the window.
pub fn interval_family(
    window: &Rect,
    j_min: i32,
    j_max: i32,
    n_random: usize,
    seed: u64,
) -> Vec<Interval> {
    use crate::geometry::{DyadicIndex, Shift};
    use rand::SeedableRng;

    let mut family = Vec::new();
    for beta in Shift::BOTH {
        for j in j_min..=j_max {
            let lo = DyadicIndex::position(beta, j, window.x0);
            let hi = DyadicIndex::position(beta, j, window.x1);
            for m in lo..=hi {
                family.push(DyadicIndex::new(beta, j, m).interval());
            }
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let w = window.width();
    for _ in 0..n_random {
        let len = w * 2f64.powf(rng.gen_range(-10.0..2.0));
        let left = rng.gen_range(window.x0 - 0.5 * len..window.x1 - 0.5 * len);
        family.push(Interval { left, length: len });
    }
    family
}
