use serde_json::json;

use super::{json, random_vector, rng, Check, ExperimentReport};
use crate::error::Result;
use crate::frame::{analysis, frame_constant, partial_reconstruction, FrameProvider, FrameSpec, GeneratorSpec, TailTemplate};
use crate::nksearch::{find_schedule, validate_schedule};
use crate::norms::nk_norm;
use crate::operator::FiniteRankOperator;
use crate::pelczynski::{assemble_bap_frame, AssembledFrame, SplitRule};
use crate::scalar::{format_scalar, NormValue};
use crate::schedule::NkSchedule;
use crate::space::AmbientSpace;
use crate::vector::CoefVector;

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub ops: Vec<FiniteRankOperator>,
    pub rule: SplitRule,
    pub test_family: Option<Vec<CoefVector>>,
    /// Schedule depth requested from the search; the search continues past
    /// it until `N_k` leaves the frame.
    pub k_max: usize,
    /// Validation box is `[1, N_{k_max} + extra_horizon]`.
    pub extra_horizon: usize,
    pub probes: usize,
}

impl PipelineConfig {
    pub fn new(ops: Vec<FiniteRankOperator>, rule: SplitRule) -> Self {
        PipelineConfig {
            ops,
            rule,
            test_family: None,
            k_max: 8,
            extra_horizon: 20,
            probes: 20,
        }
    }
}

/// `A_k = e*_k ⊗ e_k` for `k ≤ n`.
pub fn coordinate_prefix(space: AmbientSpace, n: usize) -> Vec<FiniteRankOperator> {
    (1..=n)
        .map(|k| FiniteRankOperator::coordinate_projection(space, &[k]))
        .collect()
}

fn stage_failure(report: &mut ExperimentReport, stage: &str, err: impl ToString) {
    report.push(Check::new(stage, false, json!({ "stage": stage, "error": err.to_string() })));
}

fn splits_for(cfg: &PipelineConfig) -> Vec<usize> {
    cfg.ops
        .iter()
        .enumerate()
        .map(|(i, a)| cfg.rule.m_for(i + 1, a.rank()))
        .collect()
}

/// Frame description that rebuilds the assembled frame.
pub fn assembled_spec(cfg: &PipelineConfig) -> FrameSpec {
    FrameSpec {
        space: cfg.ops.first().map_or(AmbientSpace::L2, |a| a.domain),
        generators: GeneratorSpec::Assembled {
            operators: cfg.ops.iter().map(|a| a.terms.clone()).collect(),
            splits: splits_for(cfg),
            test_family: cfg.test_family.clone(),
        },
        coef_tail: TailTemplate::Exact,
        dual_tail: TailTemplate::Exact,
        frame_constant: None,
    }
}

/// Schedule certified until `N_k` passes the last pair of a finite frame.
fn full_schedule(frame: &AssembledFrame, k_max: usize) -> Result<(NkSchedule, usize)> {
    let len = frame.len().unwrap_or(0);
    let mut depth = k_max.max(1);
    loop {
        let s = find_schedule(frame, depth)?;
        let last = s.n(depth);
        if last > len {
            return Ok((s, depth));
        }
        depth += len + 1 - last;
    }
}

/// End to end: assemble the split frame, search and validate a schedule,
/// bound the analysis operator into the associated space and compare
/// partial reconstructions with the operator residuals at block boundaries.
pub fn exp_pipeline(cfg: &PipelineConfig, seed: u64) -> ExperimentReport {
    let mut report = ExperimentReport::new("pipeline", seed);
    let splits = splits_for(cfg);
    let spec = assembled_spec(cfg);
    report.data = json!({ "frame_spec": json(&spec) });

    let frame = match assemble_bap_frame(&cfg.ops, &splits, cfg.test_family.clone()) {
        Ok(f) => f,
        Err(e) => {
            stage_failure(&mut report, "assemble", e);
            return report;
        }
    };
    let len = frame.len().unwrap_or(0);
    report.push(Check::new(
        "assemble",
        true,
        json!({ "pairs": len, "boundaries": frame.boundaries, "splits": splits }),
    ));

    let (sched, depth) = match full_schedule(&frame, cfg.k_max) {
        Ok(s) => s,
        Err(e) => {
            stage_failure(&mut report, "nk find", e);
            return report;
        }
    };
    report.push(Check::new(
        "nk find",
        true,
        json!({ "depth": depth, "n": (1..=depth).map(|k| sched.n(k)).collect::<Vec<_>>() }),
    ));
    report.data["schedule"] = json(&sched);

    let horizon = sched.n(depth) + cfg.extra_horizon;
    match validate_schedule(&frame, &sched, depth, horizon) {
        Ok(v) => {
            let mut c = Check::new(
                "nk validate",
                v.passed,
                json!({ "horizon": horizon, "k_max": depth, "worst_upper": format_scalar(&v.worst.upper) }),
            );
            if let Some(k) = v.first_failure {
                c = c.with_witness(json(&v.per_k[k - 1]));
            }
            report.push(c);
            report.data["validation"] = json(&v);
        }
        Err(e) => {
            stage_failure(&mut report, "nk validate", e);
            return report;
        }
    }

    if let Err(e) = norm_checks(&frame, &sched, cfg, seed, &mut report) {
        stage_failure(&mut report, "norm", e);
    }
    report
}

fn norm_checks(
    frame: &AssembledFrame,
    sched: &NkSchedule,
    cfg: &PipelineConfig,
    seed: u64,
    report: &mut ExperimentReport,
) -> Result<()> {
    let space = frame.space;
    let len = frame.len().unwrap_or(0);
    let dim = (1..=len)
        .filter_map(|i| frame.vector_at(i).max_index().max(frame.functional_at(i).max_index()))
        .max()
        .unwrap_or(1);
    let fc = frame_constant(frame, len.max(dim))?;
    let c = fc.certified_upper.clone().unwrap_or_else(|| fc.attaining_norm.upper.clone());

    let mut r = rng(seed);
    let family: Vec<CoefVector> = (0..cfg.probes).map(|_| random_vector(&mut r, 1, dim, 0.6)).collect();

    // ‖T x‖ ≤ C ‖x‖ in the associated norm
    let mut worst: Option<NormValue> = None;
    let mut witness = None;
    for (id, x) in family.iter().enumerate() {
        let a = analysis(frame, x, len).coefficients;
        let tn = nk_norm(frame, &a, sched)?.value;
        let xn = space.norm(x);
        if tn.cmp_norm(&xn.scale(&c)).is_gt() && witness.is_none() {
            witness = Some(json!({ "id": id, "vector": json(x) }));
        }
        if let Some(q) = tn.ratio(&xn) {
            if worst.as_ref().is_none_or(|w| q.cmp_norm(w).is_gt()) {
                worst = Some(q);
            }
        }
    }
    let mut chk = Check::new(
        "analysis_bound",
        witness.is_none() && fc.certified_upper.is_some(),
        json!({
            "frame_constant": format_scalar(&c),
            "certified": fc.certified_upper.is_some(),
            "worst_ratio": worst.as_ref().map(NormValue::to_f64),
            "vectors": family.len(),
        }),
    );
    if let Some(w) = witness {
        chk = chk.with_witness(w);
    }
    report.push(chk);

    // block-boundary residuals match the operator residuals exactly
    let blocks = frame.systems.len();
    let test_family = cfg
        .test_family
        .clone()
        .unwrap_or_else(|| (1..=dim).map(CoefVector::unit).collect());
    let mut defect = None;
    let mut max_defect: Option<NormValue> = None;
    let mut residuals = Vec::new();
    for (id, x) in family.iter().chain(&test_family).enumerate() {
        let mut row = Vec::with_capacity(blocks);
        for k in 1..=blocks {
            let lk = frame.boundaries[k];
            let left = if lk == 0 {
                x.clone()
            } else {
                x.sub(&partial_reconstruction(frame, 1, lk, x)?)
            };
            let right = frame.block_residual(x, k);
            let gap = space.norm(&left.sub(&right));
            if max_defect.as_ref().is_none_or(|g| gap.cmp_norm(g).is_gt()) {
                max_defect = Some(gap);
            }
            if left != right && defect.is_none() {
                defect = Some(json!({ "id": id, "block": k, "vector": json(x) }));
            }
            row.push(space.norm(&right).to_f64());
        }
        residuals.push(row);
    }
    let final_nonzero = test_family
        .iter()
        .position(|x| !frame.block_residual(x, blocks).is_zero());
    let ok = defect.is_none() && final_nonzero.is_none();
    let mut chk = Check::new(
        "block_residuals",
        ok,
        json!({
            "boundaries": frame.boundaries,
            "max_defect": max_defect.as_ref().map_or(0.0, NormValue::to_f64),
            "final_residual_zero": final_nonzero.is_none(),
            "test_family": test_family.len(),
        }),
    );
    if let Some(w) = defect {
        chk = chk.with_witness(w);
    } else if let Some(i) = final_nonzero {
        chk = chk.with_witness(json!({ "test_vector": json(&test_family[i]) }));
    }
    report.push(chk);
    report.data["residual_norms"] = json(&residuals);
    Ok(())
}
