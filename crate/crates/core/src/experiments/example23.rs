use serde_json::json;

use super::{json, random_vector, rng, Check, ExperimentReport};
use crate::domination::ell1plus_prefix_test;
use crate::frame::{Example23, FrameProvider};
use crate::nksearch::find_schedule;
use crate::norms::{min_norm, min_norm_closed_form_ex23, nk_norm};
use crate::scalar::{format_scalar, int, pow2, NormValue};
use crate::schedule::NkSchedule;
use crate::vector::CoefVector;

const RANDOM_VECTORS: usize = 500;
const PROFILE_LEN: usize = 12;
const ODD_BLOCKS: usize = 6;

pub fn exp_example23(seed: u64) -> ExperimentReport {
    exp_example23_on(&Example23, seed)
}

/// The three repeated-`e_1` checks run against `frame`; the oracles always
/// describe the unmodified frame, so a corrupted frame fails them.
pub fn exp_example23_on<F: FrameProvider + ?Sized>(frame: &F, seed: u64) -> ExperimentReport {
    let mut report = ExperimentReport::new("example23", seed);
    report.data = json!({ "frame": frame.label() });

    // (a) brute-force interval sup against the closed form
    let mut r = rng(seed);
    let mut mismatch = None;
    for id in 0..RANDOM_VECTORS {
        let a = random_vector(&mut r, 1, 20, 0.35);
        let got = min_norm(frame, &a).value.squared_value();
        let want = min_norm_closed_form_ex23(&a);
        if got != want {
            mismatch = Some(json!({
                "id": id,
                "vector": json(&a),
                "min_norm_squared": format_scalar(&got),
                "closed_form_squared": format_scalar(&want),
            }));
            break;
        }
    }
    let mut c = Check::new(
        "closed_form",
        mismatch.is_none(),
        json!({ "vectors": RANDOM_VECTORS, "support": [1, 20] }),
    );
    if let Some(w) = mismatch {
        c = c.with_witness(w);
    }
    report.push(c);

    // (b) the odd blocks are ℓ1+ with profile exactly n
    let blocks: Vec<CoefVector> = (1..=PROFILE_LEN).map(|i| CoefVector::unit(2 * i - 1)).collect();
    let check = match ell1plus_prefix_test(|a| Ok(min_norm(frame, a).value), &blocks, &int(1)) {
        Ok(p) => {
            let bad = p
                .profile
                .iter()
                .enumerate()
                .find(|(n, v)| v.exact() != Some(int(*n as i64 + 1)));
            let mut c = Check::new(
                "ell1plus_profile",
                bad.is_none() && p.holds,
                json!({ "profile": p.profile.iter().map(NormValue::to_f64).collect::<Vec<_>>() }),
            );
            if let Some((n, v)) = bad {
                c = c.with_witness(json!({ "n": n + 1, "norm": json(v) }));
            }
            c
        }
        Err(e) => Check::new("ell1plus_profile", false, json!({ "error": e.to_string() })),
    };
    report.push(check);

    // (c) the odd blocks blow up in the composition-decay norm
    report.push(odd_block_growth(frame));
    report
}

fn odd_block_growth<F: FrameProvider + ?Sized>(frame: &F) -> Check {
    let name = "odd_block_growth";
    let sched = match find_schedule(frame, 2 * ODD_BLOCKS) {
        Ok(s) => s,
        Err(e) => return Check::new(name, false, json!({ "stage": "nk find", "error": e.to_string() })),
    };
    let successor = NkSchedule::successor();
    let found_successor = (1..=2 * ODD_BLOCKS).all(|k| sched.n(k) == successor.n(k));
    let mut values = Vec::new();
    let mut witness = None;
    for i in 1..=ODD_BLOCKS {
        let z = CoefVector::unit(2 * i - 1);
        let want = pow2(2 * i as i64 - 2);
        match nk_norm(frame, &z, &sched) {
            Ok(r) => {
                let ok = r.value.cmp_scalar(&want).is_eq();
                values.push(r.value.to_f64());
                if !ok && witness.is_none() {
                    witness = Some(json!({ "i": i, "report": json(&r), "expected": format_scalar(&want) }));
                }
            }
            Err(e) => {
                return Check::new(name, false, json!({ "stage": "nk norm", "error": e.to_string() }));
            }
        }
    }
    let mut c = Check::new(
        name,
        found_successor && witness.is_none(),
        json!({
            "schedule": sched.to_string(),
            "schedule_is_successor": found_successor,
            "values": values,
        }),
    );
    if let Some(w) = witness {
        c = c.with_witness(w);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::PatchedFrame;

    #[test]
    fn default_run_passes_for_any_seed() {
        for seed in [1, 7] {
            let r = exp_example23(seed);
            assert!(r.passed, "{:#?}", r.checks);
        }
    }

    #[test]
    fn moved_vector_breaks_closed_form() {
        let bad = PatchedFrame::new(Example23).with_vector(3, CoefVector::unit(9));
        let r = exp_example23_on(&bad, 3);
        assert!(!r.check("closed_form").unwrap().passed);
        assert!(r.check("closed_form").unwrap().witness.is_some());
        assert!(!r.passed);
    }
}
