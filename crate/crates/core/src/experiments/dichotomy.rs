use num_traits::Signed;
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use super::{json, random_rational, rng, Check, ExperimentReport};
use crate::error::{FrameError, Result};
use crate::frame::{partial_reconstruction, synthesis, FrameProvider};
use crate::norms::{min_norm, nk_norm};
use crate::scalar::{format_scalar, int, pow2, NormValue, Scalar};
use crate::schedule::NkSchedule;
use crate::vector::CoefVector;

pub const MAX_BLOCKS: usize = 10;
const COEFFICIENT_VECTORS: usize = 200;
const TAIL_SEARCH: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockClass {
    /// `‖S y_i‖ ≤ 2^{-i}`.
    SmallImage,
    /// `‖S y_i‖ > 2^{-i}`.
    LargeImage,
}

/// Least `k ≥ lo` with `sup_{k≤m≤n} ‖P_[m,n] x‖ ≤ 2^{-bound}`.
fn tail_index<F: FrameProvider + ?Sized>(frame: &F, x: &CoefVector, lo: usize, bound: usize) -> Option<usize> {
    let eps = pow2(-(bound as i64));
    let hi = frame.search_limit().min(lo + TAIL_SEARCH);
    (lo..=hi).find(|&k| frame.coef_tail(x, k).is_some_and(|t| t <= eps))
}

/// Picks `k_1 < k_2 < … < k_{n+1}` with `supp y_i ⊆ [N_{k_i}, k_{i+1}]` and
/// `sup_{k_{i+1}≤m≤n} ‖P_[m,n] S y_i‖ ≤ 2^{-k_i}`; `k_{i+1}` is taken least.
fn block_indices<F: FrameProvider + ?Sized>(
    frame: &F,
    blocks: &[CoefVector],
    images: &[CoefVector],
    sched: &NkSchedule,
) -> Result<Vec<usize>> {
    let first = blocks[0].min_index().unwrap_or(0);
    let k1 = (1..=first).take_while(|&k| sched.n(k) <= first).last().ok_or_else(|| {
        FrameError::Precondition(format!(
            "(i) fails at block 1: support starts at {first} before N_1 = {}",
            sched.n(1)
        ))
    })?;
    let mut ks = vec![k1];
    for (i, (y, s)) in blocks.iter().zip(images).enumerate() {
        let ki = ks[i];
        let lo = y.max_index().unwrap_or(0).max(ki + 1);
        let next = tail_index(frame, s, lo, ki).ok_or_else(|| {
            FrameError::Precondition(format!(
                "(ii) fails at block {}: no k ≥ {lo} with tail of S y below 2^-{ki}",
                i + 1
            ))
        })?;
        if let Some(nb) = blocks.get(i + 1) {
            let start = nb.min_index().unwrap_or(0);
            if sched.n(next) > start {
                return Err(FrameError::Precondition(format!(
                    "(i) fails at block {}: support starts at {start} before N_{next} = {}",
                    i + 2,
                    sched.n(next)
                )));
            }
        }
        ks.push(next);
    }
    Ok(ks)
}

/// Splits a block family by the size of its images and checks the matching
/// finite inequalities: the `3 sup|a_i|` bound for small images, the
/// concentration bounds for large ones.
pub fn exp_dichotomy<F: FrameProvider + ?Sized>(
    frame: &F,
    blocks: &[CoefVector],
    sched: &NkSchedule,
    seed: u64,
) -> Result<ExperimentReport> {
    if blocks.is_empty() || blocks.len() > MAX_BLOCKS {
        return Err(FrameError::Precondition(format!(
            "need between 1 and {MAX_BLOCKS} blocks, got {}",
            blocks.len()
        )));
    }
    sched.require_increasing()?;
    for (i, y) in blocks.iter().enumerate() {
        if y.is_zero() {
            return Err(FrameError::ZeroVector { id: i });
        }
        if i > 0 && !blocks[i - 1].precedes(y) {
            return Err(FrameError::OverlappingSupports { index: i + 1 });
        }
        let n = nk_norm(frame, y, sched)?;
        if !n.value.cmp_scalar(&int(1)).is_eq() {
            return Err(FrameError::Precondition(format!(
                "block {} has norm {} instead of 1",
                i + 1,
                n.value.to_f64()
            )));
        }
    }
    let space = frame.space();
    let images = blocks
        .iter()
        .map(|y| synthesis(frame, 1, y.max_index().unwrap_or(1), y))
        .collect::<Result<Vec<_>>>()?;
    let ks = block_indices(frame, blocks, &images, sched)?;

    let image_norms: Vec<NormValue> = images.iter().map(|s| space.norm(s)).collect();
    let classes: Vec<BlockClass> = image_norms
        .iter()
        .enumerate()
        .map(|(i, n)| {
            if n.cmp_scalar(&pow2(-(i as i64 + 1))).is_le() {
                BlockClass::SmallImage
            } else {
                BlockClass::LargeImage
            }
        })
        .collect();
    let verdict = if classes.iter().all(|c| *c == BlockClass::SmallImage) {
        "small_images"
    } else if classes.iter().all(|c| *c == BlockClass::LargeImage) {
        "large_images"
    } else {
        "mixed"
    };

    let mut report = ExperimentReport::new("dichotomy", seed);
    let small: Vec<usize> = (0..blocks.len()).filter(|&i| classes[i] == BlockClass::SmallImage).collect();
    let large: Vec<usize> = (0..blocks.len()).filter(|&i| classes[i] == BlockClass::LargeImage).collect();
    if !small.is_empty() {
        report.push(small_image_bound(frame, blocks, &small, sched, seed)?);
    }
    if !large.is_empty() {
        report.push(concentration(frame, &images, &image_norms, &ks, &large)?);
    }
    report.data = json!({
        "verdict": verdict,
        "k": ks,
        "classes": classes,
        "image_norms": image_norms.iter().map(NormValue::to_f64).collect::<Vec<_>>(),
        "schedule": sched.to_string(),
    });
    Ok(report)
}

/// `sup_{m≤n} ‖S_[m,n] Σ a_i y_i‖ ≤ 3 sup|a_i|` on seeded coefficients.
fn small_image_bound<F: FrameProvider + ?Sized>(
    frame: &F,
    blocks: &[CoefVector],
    members: &[usize],
    sched: &NkSchedule,
    seed: u64,
) -> Result<Check> {
    let mut r = rng(seed);
    let mut worst: Option<NormValue> = None;
    let mut worst_nk: Option<NormValue> = None;
    let mut witness = None;
    for id in 0..COEFFICIENT_VECTORS {
        let coefs: Vec<Scalar> = members
            .iter()
            .map(|_| if r.gen_bool(0.9) { random_rational(&mut r) } else { int(0) })
            .collect();
        let sup = coefs.iter().map(|c| c.abs()).max().unwrap_or_else(|| int(0));
        if sup == int(0) {
            continue;
        }
        let w = members
            .iter()
            .zip(&coefs)
            .fold(CoefVector::zero(), |acc, (&i, c)| acc.add_scaled(c, &blocks[i]));
        let value = min_norm(frame, &w).value;
        let ratio = value.scale(&(int(1) / &sup));
        let nk = nk_norm(frame, &w, sched)?.value.scale(&(int(1) / &sup));
        if ratio.cmp_scalar(&int(3)).is_gt() && witness.is_none() {
            witness = Some(json!({ "id": id, "vector": json(&w), "sup_coefficient": format_scalar(&sup) }));
        }
        if worst.as_ref().is_none_or(|b| ratio.cmp_norm(b).is_gt()) {
            worst = Some(ratio);
        }
        if worst_nk.as_ref().is_none_or(|b| nk.cmp_norm(b).is_gt()) {
            worst_nk = Some(nk);
        }
    }
    let mut c = Check::new(
        "small_image_bound",
        witness.is_none(),
        json!({
            "blocks": members.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "vectors": COEFFICIENT_VECTORS,
            "bound": 3,
            "worst_ratio": worst.as_ref().map(NormValue::to_f64),
            "worst_nk_ratio": worst_nk.as_ref().map(NormValue::to_f64),
        }),
    );
    if let Some(w) = witness {
        c = c.with_witness(w);
    }
    Ok(c)
}

/// `‖P_[k_i,k_{i+1}) S y_i‖ ≥ ‖S y_i‖ - 2^{1-k_i}` and
/// `‖P_[k_j,k_{j+1}) S y_i‖ ≤ 2^{-k_i}` for `j ≠ i`.
fn concentration<F: FrameProvider + ?Sized>(
    frame: &F,
    images: &[CoefVector],
    norms: &[NormValue],
    ks: &[usize],
    members: &[usize],
) -> Result<Check> {
    let space = frame.space();
    let window = |j: usize, x: &CoefVector| partial_reconstruction(frame, ks[j], ks[j + 1] - 1, x);
    let mut witness = None;
    let mut c_lower: Option<Scalar> = None;
    for &i in members {
        let ki = ks[i] as i64;
        let own = space.norm(&window(i, &images[i])?);
        let need = norms[i].enclosure().upper - pow2(1 - ki);
        let own_lo = own.enclosure().lower;
        if own_lo < need && witness.is_none() {
            witness = Some(json!({ "inequality": "iv", "block": i + 1, "window": [ks[i], ks[i + 1] - 1] }));
        }
        for j in (0..images.len()).filter(|&j| j != i) {
            let leak = space.norm(&window(j, &images[i])?);
            if leak.cmp_scalar(&pow2(-ki)).is_gt() && witness.is_none() {
                witness = Some(json!({ "inequality": "v", "block": i + 1, "window": [ks[j], ks[j + 1] - 1] }));
            }
        }
        let lo = norms[i].enclosure().lower;
        if c_lower.as_ref().is_none_or(|c| lo < *c) {
            c_lower = Some(lo);
        }
    }
    let mut c = Check::new(
        "concentration",
        witness.is_none(),
        json!({
            "blocks": members.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "c_lower": c_lower.as_ref().map(format_scalar),
        }),
    );
    if let Some(w) = witness {
        c = c.with_witness(w);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{CanonicalBasis, Example23, TailOverride, TailTemplate};
    use crate::space::AmbientSpace;

    fn odd_blocks() -> Vec<CoefVector> {
        (2..=7)
            .map(|i| CoefVector::unit(2 * i - 1).scale(&pow2(-2 * (i as i64 - 1))))
            .collect()
    }

    #[test]
    fn normalized_odd_blocks_have_small_images() {
        let r = exp_dichotomy(&Example23, &odd_blocks(), &NkSchedule::successor(), 4).unwrap();
        assert!(r.passed, "{:#?}", r.checks);
        assert_eq!(r.data["verdict"], "small_images");
        assert_eq!(r.data["k"], json!([2, 3, 5, 7, 9, 11, 13]));
        assert!(r.check("concentration").is_none());
    }

    #[test]
    fn canonical_even_blocks_concentrate() {
        let blocks: Vec<_> = (1..=5).map(|i| CoefVector::unit(2 * i)).collect();
        let frame = CanonicalBasis(AmbientSpace::L2);
        let r = exp_dichotomy(&frame, &blocks, &NkSchedule::successor(), 4).unwrap();
        assert!(r.passed, "{:#?}", r.checks);
        assert_eq!(r.data["verdict"], "large_images");
        assert_eq!(r.data["k"], json!([1, 3, 5, 7, 9, 11]));
        assert_eq!(r.check("concentration").unwrap().detail["c_lower"], "1");
    }

    #[test]
    fn mixed_family_is_split_per_block() {
        // z_3/4 has image e_1/4 ≤ 1/2; the even vector keeps norm 1
        let blocks = vec![CoefVector::unit(3).scale(&pow2(-2)), CoefVector::unit(6)];
        let r = exp_dichotomy(&Example23, &blocks, &NkSchedule::successor(), 1).unwrap();
        assert_eq!(r.data["verdict"], "mixed");
        assert_eq!(r.data["classes"], json!(["small_image", "large_image"]));
    }

    #[test]
    fn preconditions_name_the_failing_condition() {
        let frame = CanonicalBasis(AmbientSpace::L2);
        // N_k = k + 1 leaves no room before e_1
        let err = exp_dichotomy(&frame, &[CoefVector::unit(1)], &NkSchedule::successor(), 0).unwrap_err();
        assert!(err.to_string().contains("(i)"), "{err}");
        // adjacent blocks force k_2 = 3 > N^{-1}(3)
        let err = exp_dichotomy(
            &frame,
            &[CoefVector::unit(2), CoefVector::unit(3)],
            &NkSchedule::successor(),
            0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("(i) fails at block 2"), "{err}");
        let err = exp_dichotomy(&frame, &[CoefVector::unit(2).scale(&int(2))], &NkSchedule::successor(), 0)
            .unwrap_err();
        assert!(err.to_string().contains("norm"), "{err}");
        let blind = TailOverride::new(frame, TailTemplate::None, TailTemplate::Exact);
        let err = exp_dichotomy(&blind, &[CoefVector::unit(2)], &NkSchedule::successor(), 0).unwrap_err();
        assert!(err.to_string().contains("(ii) fails at block 1"), "{err}");
    }
}
