use alloc::string::String;
use alloc::vec::Vec;
use rand::Rng;

use super::OptimizerError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Continuous,
    /// Searched uniformly in `ln` space.
    LogContinuous,
    /// Searched as a real and rounded half away from zero on decode.
    Integer,
}

/// One bounded hyperparameter. Bounds are inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    name: String,
    kind: ParamKind,
    lower: f64,
    upper: f64,
}

impl ParamSpec {
    pub fn new(name: impl Into<String>, kind: ParamKind, lower: f64, upper: f64) -> Result<Self, OptimizerError> {
        let name = name.into();
        if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
            return Err(OptimizerError::InvalidParam(name));
        }
        if kind == ParamKind::LogContinuous && lower <= 0.0 {
            return Err(OptimizerError::InvalidParam(name));
        }
        Ok(Self { name, kind, lower, upper })
    }

    pub fn continuous(name: impl Into<String>, lower: f64, upper: f64) -> Result<Self, OptimizerError> {
        Self::new(name, ParamKind::Continuous, lower, upper)
    }

    pub fn log_continuous(name: impl Into<String>, lower: f64, upper: f64) -> Result<Self, OptimizerError> {
        Self::new(name, ParamKind::LogContinuous, lower, upper)
    }

    pub fn integer(name: impl Into<String>, lower: i64, upper: i64) -> Result<Self, OptimizerError> {
        Self::new(name, ParamKind::Integer, lower as f64, upper as f64)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ParamKind {
        self.kind
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Bounds of the coordinate the optimizers move in. Integer ranges are
    /// widened by half a unit so every integer gets an equal share of the
    /// interval after rounding.
    pub fn internal_bounds(&self) -> (f64, f64) {
        match self.kind {
            ParamKind::Continuous => (self.lower, self.upper),
            ParamKind::LogContinuous => (libm::log(self.lower), libm::log(self.upper)),
            ParamKind::Integer => (self.lower - 0.5, self.upper + 0.5),
        }
    }

    pub fn decode(&self, internal: f64) -> ParamValue {
        match self.kind {
            ParamKind::Continuous => ParamValue::Real(internal.clamp(self.lower, self.upper)),
            ParamKind::LogContinuous => {
                ParamValue::Real(libm::exp(internal).clamp(self.lower, self.upper))
            }
            ParamKind::Integer => {
                ParamValue::Integer(libm::round(internal).clamp(self.lower, self.upper) as i64)
            }
        }
    }

    /// Internal coordinate that decodes to `value`.
    pub fn encode(&self, value: f64) -> f64 {
        match self.kind {
            ParamKind::LogContinuous => libm::log(value),
            _ => value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamValue {
    Real(f64),
    Integer(i64),
}

impl ParamValue {
    pub fn as_f64(self) -> f64 {
        match self {
            ParamValue::Real(x) => x,
            ParamValue::Integer(i) => i as f64,
        }
    }
}

/// Decoded hyperparameters in search-space order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assignment {
    entries: Vec<(String, ParamValue)>,
}

impl Assignment {
    pub fn new(entries: Vec<(String, ParamValue)>) -> Self {
        Self { entries }
    }

    pub fn get(&self, name: &str) -> Option<ParamValue> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn real(&self, name: &str) -> Option<f64> {
        self.get(name).map(ParamValue::as_f64)
    }

    pub fn integer(&self, name: &str) -> Option<i64> {
        match self.get(name)? {
            ParamValue::Integer(i) => Some(i),
            ParamValue::Real(x) => Some(libm::round(x) as i64),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, ParamValue)> {
        self.entries.iter().map(|(n, v)| (n.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Ordered, uniquely named box of hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    params: Vec<ParamSpec>,
}

impl SearchSpace {
    pub fn new(params: Vec<ParamSpec>) -> Result<Self, OptimizerError> {
        if params.is_empty() {
            return Err(OptimizerError::InvalidConfig("search space has no parameters"));
        }
        for (i, p) in params.iter().enumerate() {
            if params[..i].iter().any(|q| q.name == p.name) {
                return Err(OptimizerError::DuplicateParam(p.name.clone()));
            }
        }
        Ok(Self { params })
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    pub fn check_dim(&self, position: &[f64]) -> Result<(), OptimizerError> {
        if position.len() != self.dim() {
            return Err(OptimizerError::DimensionMismatch { expected: self.dim(), found: position.len() });
        }
        Ok(())
    }

    pub fn decode(&self, position: &[f64]) -> Result<Assignment, OptimizerError> {
        self.check_dim(position)?;
        Ok(Assignment::new(
            self.params.iter().zip(position).map(|(p, &x)| (p.name.clone(), p.decode(x))).collect(),
        ))
    }

    /// Clamps each coordinate into its internal bounds. Returns a mask of the
    /// coordinates that were moved.
    pub fn clamp(&self, position: &mut [f64]) -> Vec<bool> {
        self.params
            .iter()
            .zip(position.iter_mut())
            .map(|(p, x)| {
                let (lo, hi) = p.internal_bounds();
                let clamped = if x.is_nan() { lo } else { x.clamp(lo, hi) };
                let moved = clamped != *x;
                *x = clamped;
                moved
            })
            .collect()
    }

    pub fn contains(&self, position: &[f64]) -> bool {
        position.len() == self.dim()
            && self.params.iter().zip(position).all(|(p, &x)| {
                let (lo, hi) = p.internal_bounds();
                lo <= x && x <= hi
            })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.params
            .iter()
            .map(|p| {
                let (lo, hi) = p.internal_bounds();
                lo + rng.random::<f64>() * (hi - lo)
            })
            .collect()
    }
}
