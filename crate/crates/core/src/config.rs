//! Run configuration: one JSON document controlling window, meshes, scale
//! window, tolerances, weights, test functions, exponent grid, and seeds.
//! CLI flags override file values.

use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::harness::{ExperimentContext, IndicatorSquare, TestFunctionSpec};
use crate::measure::{GridWeight, Weight};
use crate::operators::OperatorConfig;

/// Weight specification as it appears in config files:
/// `{"kind":"power","s":...}` or
/// `{"kind":"grid","window":{...},"nx":...,"ny":...,"values":[...]}`.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum WeightSpec {
    Power { s: f64 },
    Grid { window: Rect, nx: usize, ny: usize, values: Vec<f64> },
}

impl WeightSpec {
    pub fn build(&self) -> Result<Weight> {
        match self {
            WeightSpec::Power { s } => {
                if !s.is_finite() {
                    return Err(Error::Config(format!("power weight exponent must be finite, got {s}")));
                }
                Ok(Weight::Power { s: *s })
            }
            WeightSpec::Grid { window, nx, ny, values } => Ok(Weight::Grid(
                GridWeight::new(*window, *nx, *ny, values.clone())
                    .map_err(|e| Error::Config(e.to_string()))?,
            )),
        }
    }
}

/// One `(alpha, gamma, p)` triple of the exponent grid.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct ExponentTriple {
    pub alpha: f64,
    pub gamma: f64,
    pub p: f64,
}

fn default_window() -> Rect {
    Rect { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 }
}

fn default_mesh() -> (usize, usize) {
    (128, 128)
}

fn default_scale_window() -> (i32, i32) {
    (-12, 8)
}

fn default_quad_tol() -> f64 {
    1e-5
}

fn default_eval_floor() -> f64 {
    crate::geometry::pow2(-10)
}

fn default_lambda_grid() -> usize {
    64
}

fn default_seed() -> u64 {
    1
}

fn default_c_max() -> f64 {
    1e3
}

fn default_verify_points() -> usize {
    200
}

fn default_family_random() -> usize {
    1000
}

fn default_weights() -> Vec<WeightSpec> {
    vec![
        WeightSpec::Power { s: 0.0 },
        WeightSpec::Power { s: 0.15 },
        WeightSpec::Power { s: 0.25 },
        WeightSpec::Grid {
            window: default_window(),
            nx: 2,
            ny: 2,
            values: vec![0.8, 1.25, 1.1, 0.9],
        },
    ]
}

fn default_functions() -> Vec<TestFunctionSpec> {
    vec![
        TestFunctionSpec::Indicator {
            squares: vec![IndicatorSquare { left: 0.0, length: 1.0, height: 1.0 }],
        },
        TestFunctionSpec::Indicator {
            squares: vec![
                IndicatorSquare { left: 0.0, length: 0.5, height: 1.0 },
                IndicatorSquare { left: 0.5, length: 0.5, height: 2.0 },
                IndicatorSquare { left: 0.0, length: 1.0, height: 0.5 },
            ],
        },
        TestFunctionSpec::Tent { center: 0.5, width: 0.5, height: 0.25 },
        TestFunctionSpec::FloorPlus {
            base: Box::new(TestFunctionSpec::Indicator {
                squares: vec![IndicatorSquare { left: 0.25, length: 0.5, height: 1.0 }],
            }),
            floor: 1e-6,
        },
    ]
}

fn default_exponent_grid() -> Vec<ExponentTriple> {
    vec![
        ExponentTriple { alpha: 0.0, gamma: 0.0, p: 2.0 },
        ExponentTriple { alpha: 0.0, gamma: 1.0, p: 1.5 },
    ]
}

/// The complete run configuration. Every field has a default, so `{}` is a
/// valid config file.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_window")]
    pub window: Rect,
    /// Evaluation mesh (nx, ny) for operator norms and level sets.
    #[serde(default = "default_mesh")]
    pub mesh: (usize, usize),
    /// Dyadic truncation window (j_min, j_max).
    #[serde(default = "default_scale_window")]
    pub scale_window: (i32, i32),
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    #[serde(default = "default_eval_floor")]
    pub eval_floor: f64,
    #[serde(default = "default_weights")]
    pub weights: Vec<WeightSpec>,
    #[serde(default = "default_functions")]
    pub functions: Vec<TestFunctionSpec>,
    #[serde(default = "default_exponent_grid")]
    pub exponent_grid: Vec<ExponentTriple>,
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid_size: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_c_max")]
    pub c_max: f64,
    /// Sample points used by the verification checks.
    #[serde(default = "default_verify_points")]
    pub verify_points: usize,
    /// Random intervals added to family suprema.
    #[serde(default = "default_family_random")]
    pub family_random: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config must parse")
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("{e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window.x0 >= self.window.x1
            || self.window.y0 < 0.0
            || self.window.y0 >= self.window.y1
        {
            return Err(Error::Config(format!(
                "window must satisfy x0 < x1 and 0 <= y0 < y1, got {:?}",
                self.window
            )));
        }
        if self.mesh.0 == 0 || self.mesh.1 == 0 {
            return Err(Error::Config("mesh axes must be positive".into()));
        }
        if self.scale_window.0 > self.scale_window.1 {
            return Err(Error::Config(format!(
                "scale window requires j_min <= j_max, got {:?}",
                self.scale_window
            )));
        }
        if self.scale_window.0 < crate::geometry::MIN_SCALE
            || self.scale_window.1 > crate::geometry::MAX_SCALE
        {
            return Err(Error::Config(format!(
                "scale window must sit inside [{}, {}]",
                crate::geometry::MIN_SCALE,
                crate::geometry::MAX_SCALE
            )));
        }
        if self.quad_tol <= 0.0 || !self.quad_tol.is_finite() {
            return Err(Error::Config(format!("quadTol must be positive, got {}", self.quad_tol)));
        }
        if self.eval_floor <= 0.0 || self.eval_floor.is_nan() {
            return Err(Error::Config(format!(
                "evalFloor must be positive, got {}",
                self.eval_floor
            )));
        }
        if self.lambda_grid_size < 2 {
            return Err(Error::Config("lambdaGridSize must be at least 2".into()));
        }
        if self.c_max <= 0.0 || self.c_max.is_nan() {
            return Err(Error::Config(format!("cMax must be positive, got {}", self.c_max)));
        }
        for t in &self.exponent_grid {
            if t.alpha <= -1.0 {
                return Err(Error::Config(format!("alpha must be > -1, got {}", t.alpha)));
            }
            if !(0.0..2.0 + t.alpha).contains(&t.gamma) {
                return Err(Error::Config(format!(
                    "gamma must satisfy 0 <= gamma < 2 + alpha, got ({}, {})",
                    t.alpha, t.gamma
                )));
            }
            if t.p < 1.0 {
                return Err(Error::Config(format!("p must be >= 1, got {}", t.p)));
            }
        }
        for w in &self.weights {
            w.build()?;
        }
        Ok(())
    }

    pub fn operator_config(&self) -> OperatorConfig {
        OperatorConfig {
            quad_tol: self.quad_tol,
            j_min: self.scale_window.0,
            j_max: self.scale_window.1,
            eval_floor: self.eval_floor,
        }
    }

    pub fn context(&self) -> ExperimentContext {
        ExperimentContext {
            window: self.window,
            nx: self.mesh.0,
            ny: self.mesh.1,
            cfg: self.operator_config(),
            lambda_grid_size: self.lambda_grid_size,
            c_max: self.c_max,
            seed: self.seed,
            family_random: self.family_random,
        }
    }

    pub fn built_weights(&self) -> Result<Vec<Weight>> {
        self.weights.iter().map(|w| w.build()).collect()
    }
}
