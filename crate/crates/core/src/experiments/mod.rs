//! Reproducible experiment runners. Every randomized family is drawn from a
//! ChaCha stream seeded by the caller, so equal seeds give identical reports.

mod dichotomy;
mod example23;
mod incomparable;
mod pipeline;

pub use dichotomy::{exp_dichotomy, BlockClass};
pub use example23::{exp_example23, exp_example23_on};
pub use incomparable::{exp_incomparable, exp_incomparable_on, incomparable_blocks, BlockFamily};
pub use pipeline::{assembled_spec, coordinate_prefix, exp_pipeline, PipelineConfig};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::Serialize;
use serde_json::Value;

use crate::scalar::{ratio, Scalar};
use crate::vector::CoefVector;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
    /// Replayable evidence for a failure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: Value) -> Self {
        Check {
            name: name.into(),
            passed,
            detail,
            witness: None,
        }
    }

    pub fn with_witness(mut self, w: Value) -> Self {
        self.witness = Some(w);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub checks: Vec<Check>,
    pub data: Value,
    /// Optional CSV side table (`id,norm_a,norm_b,ratio`).
    #[serde(skip)]
    pub csv: Option<String>,
}

impl ExperimentReport {
    pub(crate) fn new(experiment: &str, seed: u64) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            seed,
            passed: true,
            notes: Vec::new(),
            checks: Vec::new(),
            data: Value::Null,
            csv: None,
        }
    }

    pub(crate) fn push(&mut self, c: Check) {
        self.passed &= c.passed;
        self.checks.push(c);
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `p/q` with `p ∈ [-9, 9] \ {0}`, `q ∈ [1, 4]`.
pub(crate) fn random_rational(rng: &mut ChaCha8Rng) -> Scalar {
    let mut p = 0;
    while p == 0 {
        p = rng.gen_range(-9i64..=9);
    }
    ratio(p, rng.gen_range(1i64..=4))
}

/// Nonzero vector supported in `[lo, hi]`, each index kept with probability
/// `density`.
pub(crate) fn random_vector(rng: &mut ChaCha8Rng, lo: usize, hi: usize, density: f64) -> CoefVector {
    loop {
        let mut pairs = Vec::new();
        for i in lo..=hi {
            if rng.gen_bool(density) {
                pairs.push((i, random_rational(rng)));
            }
        }
        let v = CoefVector::from_pairs(pairs);
        if !v.is_zero() {
            return v;
        }
    }
}

pub(crate) fn json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}
