//! Benchmark objectives and the registry the rest of the toolkit resolves
//! function ids against.
//!
//! Every objective is minimized. Evaluating a point outside the registered
//! domain is an error; bound repair is the optimizer's job.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box the search runs in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidDomain("dimension must be positive".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::InvalidDomain(format!(
                "lower has {} bounds, upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::InvalidDomain(format!(
                    "dimension {i}: lower {lo} must be finite and below upper {hi}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The same `[lower, upper]` interval on every axis.
    pub fn uniform(dimension: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; dimension], vec![upper; dimension])
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        self.check(point).is_ok()
    }

    /// Validates length and bounds of `point`.
    pub fn check(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                actual: point.len(),
            });
        }
        for (index, ((&value, &lower), &upper)) in
            point.iter().zip(&self.lower).zip(&self.upper).enumerate()
        {
            // NaN fails both comparisons and is rejected too
            if !(value >= lower && value <= upper) {
                return Err(Error::OutOfBounds {
                    index,
                    value,
                    lower,
                    upper,
                });
            }
        }
        Ok(())
    }

    /// Clamps every coordinate into the box.
    pub fn clamp(&self, point: &mut [f64]) {
        for ((x, &lo), &hi) in point.iter_mut().zip(&self.lower).zip(&self.upper) {
            *x = x.clamp(lo, hi);
        }
    }
}

pub type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A named black-box objective on a fixed domain.
#[derive(Clone)]
pub struct ObjectiveFunction {
    pub id: String,
    pub domain: SearchDomain,
    /// Known minimum value, used for the termination error.
    pub optimum_value: f64,
    /// Location of the minimum, when known.
    pub optimum_point: Option<Vec<f64>>,
    evaluator: Evaluator,
}

impl fmt::Debug for ObjectiveFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveFunction")
            .field("id", &self.id)
            .field("domain", &self.domain)
            .field("optimum_value", &self.optimum_value)
            .finish_non_exhaustive()
    }
}

impl ObjectiveFunction {
    pub fn new<F>(id: impl Into<String>, domain: SearchDomain, optimum_value: f64, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            id: id.into(),
            domain,
            optimum_value,
            optimum_point: None,
            evaluator: Arc::new(f),
        }
    }

    pub fn with_optimum_point(mut self, point: Vec<f64>) -> Self {
        self.optimum_point = Some(point);
        self
    }

    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    /// Checked evaluation.
    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        self.domain.check(point)?;
        Ok((self.evaluator)(point))
    }

    /// Evaluation without the bounds check, for callers that already
    /// guarantee in-domain points (the GA clamps every genome).
    pub(crate) fn evaluate_unchecked(&self, point: &[f64]) -> f64 {
        debug_assert!(self.domain.contains(point));
        (self.evaluator)(point)
    }
}

pub fn ackley(x: &[f64]) -> f64 {
    const A: f64 = 20.0;
    const B: f64 = 0.2;
    const C: f64 = 2.0 * PI;
    let n = x.len() as f64;
    let sum_sq = x.iter().map(|v| v * v).sum::<f64>();
    let sum_cos = x.iter().map(|v| (C * v).cos()).sum::<f64>();
    // grouped so both halves cancel exactly at the origin
    (A - A * (-B * (sum_sq / n).sqrt()).exp()) + (std::f64::consts::E - (sum_cos / n).exp())
}

pub fn rastrigin(x: &[f64]) -> f64 {
    const A: f64 = 10.0;
    A * x.len() as f64 + x.iter().map(|v| v * v - A * (2.0 * PI * v).cos()).sum::<f64>()
}

pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
        .sum()
}

/// Inverted Gaussian bell, `1 - exp(-|x|^2 / 2)`.
pub fn gaussian(x: &[f64]) -> f64 {
    let sum_sq = x.iter().map(|v| v * v).sum::<f64>();
    -(-sum_sq / 2.0).exp_m1()
}

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Function ids resolved by the CLI and stored in knowledge base files.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    functions: BTreeMap<String, ObjectiveFunction>,
}

impl Registry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Ackley, Gaussian, Rastrigin and Rosenbrock in `dimension` dimensions.
    pub fn builtin(dimension: usize) -> Result<Self> {
        let mut registry = Self::empty();
        let zeros = vec![0.0; dimension];
        registry.register(
            ObjectiveFunction::new(
                "ackley",
                SearchDomain::uniform(dimension, -32.768, 32.768)?,
                0.0,
                ackley,
            )
            .with_optimum_point(zeros.clone()),
        )?;
        registry.register(
            ObjectiveFunction::new(
                "gaussian",
                SearchDomain::uniform(dimension, -5.0, 5.0)?,
                0.0,
                gaussian,
            )
            .with_optimum_point(zeros.clone()),
        )?;
        registry.register(
            ObjectiveFunction::new(
                "rastrigin",
                SearchDomain::uniform(dimension, -5.12, 5.12)?,
                0.0,
                rastrigin,
            )
            .with_optimum_point(zeros),
        )?;
        registry.register(
            ObjectiveFunction::new(
                "rosenbrock",
                SearchDomain::uniform(dimension, -5.0, 10.0)?,
                0.0,
                rosenbrock,
            )
            .with_optimum_point(vec![1.0; dimension]),
        )?;
        Ok(registry)
    }

    pub fn register(&mut self, function: ObjectiveFunction) -> Result<()> {
        if self.functions.contains_key(&function.id) {
            return Err(Error::DuplicateFunction(function.id));
        }
        // domain was validated on construction, but the fields are public
        SearchDomain::new(
            function.domain.lower().to_vec(),
            function.domain.upper().to_vec(),
        )?;
        self.functions.insert(function.id.clone(), function);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<&ObjectiveFunction> {
        self.functions.get(id).ok_or_else(|| Error::UnknownFunction {
            id: id.to_string(),
            registered: self.ids(),
        })
    }

    pub fn evaluate(&self, id: &str, point: &[f64]) -> Result<f64> {
        self.get(id)?.evaluate(point)
    }

    pub fn domain_of(&self, id: &str) -> Result<&SearchDomain> {
        Ok(&self.get(id)?.domain)
    }

    pub fn ids(&self) -> Vec<String> {
        self.functions.keys().cloned().collect()
    }
}
