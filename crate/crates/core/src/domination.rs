//! One-sided domination witnesses and the ℓ1+ prefix test.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FrameError, Result};
use crate::scalar::{format_scalar, Certified, NormValue, Scalar};
use crate::vector::CoefVector;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeEntry {
    pub id: usize,
    pub vector: CoefVector,
    pub norm_a: NormValue,
    pub norm_b: NormValue,
    pub ratio: NormValue,
}

/// Evidence about `‖a‖_A ≤ K ‖a‖_B` on a finite family. A large or growing
/// ratio witnesses non-domination; a bounded ratio proves nothing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominationWitness {
    pub label: &'static str,
    pub entries: Vec<ProbeEntry>,
    pub max_ratio: NormValue,
    pub max_ratio_enclosure: Certified,
    pub argmax: usize,
    /// Ratios are nondecreasing along the family.
    pub monotone_growth: bool,
    /// Ratios are strictly increasing along the family.
    pub strictly_growing: bool,
}

impl DominationWitness {
    pub fn argmax_vector(&self) -> &CoefVector {
        &self.entries[self.argmax].vector
    }

    /// `id,norm_a,norm_b,ratio` with norms as floats and exact ratios.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,norm_a,norm_b,ratio,ratio_exact\n");
        for e in &self.entries {
            let exact = e.ratio.exact().map(|r| format_scalar(&r)).unwrap_or_else(|| {
                format!("sqrt({})", format_scalar(e.ratio.stored()))
            });
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.id,
                e.norm_a.to_f64(),
                e.norm_b.to_f64(),
                e.ratio.to_f64(),
                exact
            ));
        }
        out
    }
}

/// Evaluates both norms on every family member (in parallel, results kept in
/// family order) and reports the largest ratio `A/B`.
pub fn domination_probe<A, B>(norm_a: A, norm_b: B, family: &[CoefVector]) -> Result<DominationWitness>
where
    A: Fn(&CoefVector) -> Result<NormValue> + Sync,
    B: Fn(&CoefVector) -> Result<NormValue> + Sync,
{
    if family.is_empty() {
        return Err(FrameError::Precondition("empty family".into()));
    }
    if let Some(id) = family.iter().position(CoefVector::is_zero) {
        return Err(FrameError::ZeroVector { id });
    }
    let entries = family
        .par_iter()
        .enumerate()
        .map(|(id, v)| {
            let a = norm_a(v)?;
            let b = norm_b(v)?;
            let ratio = a.ratio(&b).ok_or(FrameError::DegenerateNorm { id })?;
            Ok(ProbeEntry {
                id,
                vector: v.clone(),
                norm_a: a,
                norm_b: b,
                ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut argmax = 0;
    for (i, e) in entries.iter().enumerate() {
        if e.ratio.cmp_norm(&entries[argmax].ratio) == Ordering::Greater {
            argmax = i;
        }
    }
    let pairs = entries.windows(2);
    let monotone_growth = pairs.clone().all(|w| w[1].ratio.cmp_norm(&w[0].ratio).is_ge());
    let strictly_growing = pairs.clone().all(|w| w[1].ratio.cmp_norm(&w[0].ratio).is_gt());
    let max_ratio = entries[argmax].ratio.clone();
    Ok(DominationWitness {
        label: "witness",
        max_ratio_enclosure: max_ratio.enclosure(),
        max_ratio,
        argmax,
        monotone_growth,
        strictly_growing,
        entries,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ell1PlusReport {
    pub holds: bool,
    /// First prefix length `n` with `‖Σ_{i≤n} y_i‖ < α n`.
    pub first_failure: Option<usize>,
    /// `n ↦ ‖Σ_{i≤n} y_i‖` for `n = 1, 2, …`.
    pub profile: Vec<NormValue>,
}

/// Checks `‖Σ_{i≤n} y_i‖ ≥ α n` for every prefix of a block sequence.
pub fn ell1plus_prefix_test<N>(norm: N, blocks: &[CoefVector], alpha: &Scalar) -> Result<Ell1PlusReport>
where
    N: Fn(&CoefVector) -> Result<NormValue>,
{
    for (i, w) in blocks.windows(2).enumerate() {
        if !w[0].precedes(&w[1]) {
            return Err(FrameError::OverlappingSupports { index: i + 2 });
        }
    }
    let mut acc = CoefVector::zero();
    let mut profile = Vec::with_capacity(blocks.len());
    let mut first_failure = None;
    for (i, b) in blocks.iter().enumerate() {
        acc = acc.add(b);
        let v = norm(&acc)?;
        let target = alpha * Scalar::from_integer((i as i64 + 1).into());
        if first_failure.is_none() && v.cmp_scalar(&target) == Ordering::Less {
            first_failure = Some(i + 1);
        }
        profile.push(v);
    }
    Ok(Ell1PlusReport {
        holds: first_failure.is_none(),
        first_failure,
        profile,
    })
}
