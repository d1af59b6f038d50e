use serde_json::json;

use super::{json, random_vector, rng, Check, ExperimentReport};
use crate::domination::domination_probe;
use crate::error::{FrameError, Result};
use crate::frame::{frame_constant, Example23};
use crate::norms::{k_subnorm, subsequence_norm, KIndexSet};
use crate::scalar::{format_scalar, int, pow2};
use crate::schedule::NkSchedule;
use crate::vector::CoefVector;

/// Largest block index the experiment accepts.
pub const MAX_BLOCK: usize = 5;
const CONVERSE_VECTORS: usize = 50;
const CONVERSE_WIDTH: usize = 8;

/// Indices `k_0 < k_1 < …` and blocks `y_1, y_2, …` (stored from `y[0]`).
#[derive(Clone, Debug, PartialEq)]
pub struct BlockFamily {
    pub k: Vec<usize>,
    pub y: Vec<CoefVector>,
}

impl BlockFamily {
    fn k(&self, d: usize) -> usize {
        self.k[d]
    }

    fn y(&self, d: usize) -> &CoefVector {
        &self.y[d - 1]
    }

    fn depth(&self) -> usize {
        self.y.len().min(self.k.len().saturating_sub(2))
    }
}

/// `k_d = 2^d` and `y_d = z_{2^d + 1}` for `d ≤ depth`; under `N_k = k + 1`
/// the block `y_d` sits at `N_{k_d}` and has `‖y_d‖_{k_d} = 2^{k_d}`.
pub fn incomparable_blocks(depth: usize) -> BlockFamily {
    BlockFamily {
        k: (0..=depth + 1).map(|d| 1usize << d).collect(),
        y: (1..=depth).map(|d| CoefVector::unit((1 << d) + 1)).collect(),
    }
}

pub fn exp_incomparable(l: &[usize], m: &[usize], seed: u64) -> Result<ExperimentReport> {
    let top = l.iter().chain(m).copied().max().unwrap_or(0);
    exp_incomparable_on(&incomparable_blocks(top.max(1)), l, m, seed)
}

pub fn exp_incomparable_on(
    family: &BlockFamily,
    l: &[usize],
    m: &[usize],
    seed: u64,
) -> Result<ExperimentReport> {
    let frame = Example23;
    let sched = NkSchedule::successor();
    let mut l: Vec<usize> = l.to_vec();
    let mut m: Vec<usize> = m.to_vec();
    l.sort_unstable();
    l.dedup();
    m.sort_unstable();
    m.dedup();
    if l.is_empty() || m.is_empty() {
        return Err(FrameError::Precondition("both index lists must be nonempty".into()));
    }
    let top = *l.last().unwrap().max(m.last().unwrap());
    if l[0] == 0 || m[0] == 0 || top > MAX_BLOCK {
        return Err(FrameError::Precondition(format!(
            "block indices must lie in [1, {MAX_BLOCK}]"
        )));
    }
    let depth = family.depth();
    if top > depth {
        return Err(FrameError::Precondition(format!(
            "family has {depth} blocks, lists reach {top}"
        )));
    }

    // growth and placement preconditions of the block family
    let mut failing = Vec::new();
    for d in 1..=depth {
        let y = family.y(d);
        let (lo, hi) = (y.min_index().unwrap_or(0), y.max_index().unwrap_or(0));
        let placed = !y.is_zero()
            && lo >= sched.n(family.k(d - 1))
            && hi < sched.n(family.k(d + 1));
        let grows = d < 2
            || k_subnorm(&frame, y, family.k(d), &sched)
                .value
                .cmp_scalar(&pow2(2 * family.k(d - 1) as i64))
                .is_ge();
        if !(placed && grows) {
            failing.push(d);
        }
    }
    if !failing.is_empty() {
        return Err(FrameError::Precondition(format!(
            "block family violates the growth precondition at d = {failing:?}"
        )));
    }

    let ks_l = KIndexSet::list(l.iter().map(|&d| family.k(d)).collect())?;
    let ks_m = KIndexSet::list(m.iter().map(|&d| family.k(d)).collect())?;
    let fc = frame_constant(&frame, sched.n(family.k(depth)))?;
    let c = fc
        .certified_upper
        .clone()
        .ok_or_else(|| FrameError::Precondition("no certified frame constant".into()))?;

    let mut report = ExperimentReport::new("incomparable", seed);
    report.notes.push(
        "support condition of the next block read as supp(y_{j+1})".into(),
    );

    // d ∈ L \ M: the L-norm beats the M-norm by 2^{k_{d-1}} / C
    let mut rows = Vec::new();
    let mut witness = None;
    for &d in l.iter().filter(|d| !m.contains(d) && **d > 1) {
        let y = family.y(d);
        let nl = subsequence_norm(&frame, y, &ks_l, &sched)?;
        let nm = subsequence_norm(&frame, y, &ks_m, &sched)?;
        let target = pow2(family.k(d - 1) as i64) / &c;
        let ok = nl.value.cmp_norm(&nm.value.scale(&target)).is_ge();
        let r = nl.value.ratio(&nm.value);
        rows.push(json!({
            "d": d,
            "norm_l": json(&nl.value),
            "norm_m": json(&nm.value),
            "ratio": r.as_ref().map(|r| r.to_f64()),
            "required": format_scalar(&target),
            "passed": ok,
        }));
        if !ok && witness.is_none() {
            witness = Some(json!({ "d": d, "vector": json(y) }));
        }
    }
    let mut sep = Check::new("separation", witness.is_none(), json!({ "blocks": rows }));
    if let Some(w) = witness {
        sep = sep.with_witness(w);
    }
    report.push(sep);

    // converse: past the cutoff every L-index is an M-index
    let cutoff = m
        .iter()
        .copied()
        .find(|&mp| l.iter().filter(|&&d| d >= mp).all(|d| m.contains(d)));
    match cutoff {
        Some(mp) => {
            let lo = sched.n(family.k(mp));
            let mut r = rng(seed);
            let fam: Vec<CoefVector> = (0..CONVERSE_VECTORS)
                .map(|_| random_vector(&mut r, lo, lo + CONVERSE_WIDTH - 1, 0.5))
                .collect();
            let probe = domination_probe(
                |a| Ok(subsequence_norm(&frame, a, &ks_l, &sched)?.value),
                |a| Ok(subsequence_norm(&frame, a, &ks_m, &sched)?.value),
                &fam,
            )?;
            let ok = probe.max_ratio.cmp_scalar(&int(1)).is_le();
            let mut chk = Check::new(
                "converse_domination",
                ok,
                json!({
                    "cutoff": mp,
                    "support": [lo, lo + CONVERSE_WIDTH - 1],
                    "vectors": CONVERSE_VECTORS,
                    "max_ratio": json(&probe.max_ratio),
                }),
            );
            if !ok {
                chk = chk.with_witness(json!({ "id": probe.argmax, "vector": json(probe.argmax_vector()) }));
            }
            report.csv = Some(probe.to_csv());
            report.push(chk);
        }
        None => report
            .notes
            .push("no cutoff index in M covers the tail of L; converse skipped".into()),
    }

    report.data = json!({
        "l": l,
        "m": m,
        "k": family.k.iter().take(depth + 1).collect::<Vec<_>>(),
        "frame_constant": format_scalar(&c),
        "schedule": sched.to_string(),
    });
    Ok(report)
}
