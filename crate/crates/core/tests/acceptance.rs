//! Release gate: one line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use frameforge::experiments::{coordinate_prefix, exp_incomparable, exp_pipeline, PipelineConfig};
use frameforge::scalar::{from_f64, int, pow2, ratio};
use frameforge::{
    analysis, find_schedule, frame_constant, min_norm, min_norm_closed_form_ex23, nk_norm, operator_norm,
    split_operator, subsequence_norm, validate_schedule, verify_pel, AmbientSpace, BuiltinFrame, CanonicalBasis,
    CoefVector, Example23, FiniteRankOperator, FrameProvider, KIndexSet, RankOne, Scalar,
};

const SEED: u64 = 0x00ac_ce97;
const BLOCK_SLACK: f64 = 1e-9;
const LIMIT_SPLIT: Duration = Duration::from_secs(10);
const LIMIT_CLOSED_FORM: Duration = Duration::from_secs(5);
const LIMIT_INCOMPARABLE: Duration = Duration::from_secs(30);

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rational(rng: &mut ChaCha8Rng) -> Scalar {
    ratio(rng.gen_range(-6..=6), rng.gen_range(1..=5))
}

fn random_vector(rng: &mut ChaCha8Rng, lo: usize, hi: usize, density: f64) -> CoefVector {
    let mut pairs = Vec::new();
    for i in lo..=hi {
        if rng.gen_bool(density) {
            pairs.push((i, rational(rng)));
        }
    }
    CoefVector::from_pairs(pairs)
}

fn random_operator(rng: &mut ChaCha8Rng) -> FiniteRankOperator {
    loop {
        let dim = rng.gen_range(2..=4);
        let terms = (0..rng.gen_range(1..=3))
            .map(|_| RankOne {
                functional: random_vector(rng, 1, dim, 0.7),
                vector: random_vector(rng, 1, dim, 0.7),
            })
            .collect();
        let a = FiniteRankOperator::new(AmbientSpace::L2, terms);
        if a.rank() > 0 {
            return a;
        }
    }
}

fn split_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let slack = from_f64(BLOCK_SLACK);
    let start = Instant::now();
    let mut systems = 0;
    for case in 0..100 {
        let a = random_operator(&mut rng);
        let a_norm = operator_norm(&a).map_err(|e| e.to_string())?;
        for m in [1usize, 2, 5] {
            let s = split_operator(&a, m).map_err(|e| e.to_string())?;
            ensure(s.d <= 3, || format!("case {case}: rank {} above 3", s.d))?;
            for q in 0..=m {
                let partial = s.partial(1, q * s.d);
                ensure(partial.same_map(&a.scale(&ratio(q as i64, m as i64))), || {
                    format!("case {case}, m={m}: identity fails at q={q}")
                })?;
            }
            for q in 0..m {
                for r in 1..=s.d {
                    let block = s.partial(q * s.d + 1, q * s.d + r);
                    let n = operator_norm(&block).map_err(|e| e.to_string())?;
                    let bound = ratio(r as i64, m as i64) * &a_norm.upper + &slack;
                    ensure(n.upper <= bound, || format!("case {case}, m={m}: block (q={q}, r={r}) too large"))?;
                }
            }
            let report = verify_pel(&s).map_err(|e| e.to_string())?;
            ensure(report.passed && report.exact_equalities, || format!("case {case}, m={m}: verifier disagrees"))?;
            systems += 1;
        }
    }
    let t = start.elapsed();
    ensure(t < LIMIT_SPLIT, || format!("took {t:?}"))?;
    Ok(format!("{systems} split systems exact, {t:.2?}"))
}

fn closed_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let start = Instant::now();
    for id in 0..500 {
        let a = random_vector(&mut rng, 1, 20, 0.35);
        let got = min_norm(&Example23, &a).value.squared_value();
        ensure(got == min_norm_closed_form_ex23(&a), || format!("vector {id} mismatches"))?;
    }
    let t = start.elapsed();
    ensure(t < LIMIT_CLOSED_FORM, || format!("took {t:?}"))?;
    Ok(format!("500 vectors exact, {t:.2?}"))
}

fn pathology() -> Outcome {
    let mut sum = CoefVector::zero();
    for n in 1..=12 {
        sum = sum.add(&CoefVector::unit(2 * n - 1));
        let v = min_norm(&Example23, &sum).value;
        ensure(v.cmp_scalar(&int(n as i64)).is_eq(), || format!("prefix {n} has norm {}", v.to_f64()))?;
    }
    let sched = find_schedule(&Example23, 12).map_err(|e| e.to_string())?;
    ensure((1..=12).all(|k| sched.n(k) == k + 1), || format!("schedule {sched}"))?;
    for i in 1..=6 {
        let v = nk_norm(&Example23, &CoefVector::unit(2 * i - 1), &sched).map_err(|e| e.to_string())?.value;
        ensure(v.cmp_scalar(&pow2(2 * i as i64 - 2)).is_eq(), || format!("z_{} has norm {}", 2 * i - 1, v.to_f64()))?;
    }
    Ok("min prefix norms = n, n ≤ 12; composition norms 2^{2i-2}, i ≤ 6".into())
}

fn builtins() -> [BuiltinFrame; 2] {
    [
        BuiltinFrame::CanonicalBasis(CanonicalBasis(AmbientSpace::L2)),
        BuiltinFrame::Example23(Example23),
    ]
}

fn schedule_soundness() -> Outcome {
    for frame in builtins() {
        let sched = find_schedule(&frame, 12).map_err(|e| e.to_string())?;
        ensure((1..=12).all(|k| sched.n(k) == k + 1), || format!("{}: schedule {sched}", frame.label()))?;
        let v = validate_schedule(&frame, &sched, 12, 50).map_err(|e| e.to_string())?;
        ensure(v.passed && v.worst.upper.is_zero(), || format!("{}: worst {}", frame.label(), v.worst.midpoint()))?;
        let wider = sched.shifted(5);
        let w = validate_schedule(&frame, &wider, 12, 50).map_err(|e| e.to_string())?;
        ensure(w.passed, || format!("{}: enlarged schedule fails", frame.label()))?;
    }
    Ok("N_k = k+1 to k=12, worst composition 0 at horizon 50, N_k+5 validates".into())
}

fn norm_order() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    for frame in builtins() {
        let sched = find_schedule(&frame, 12).map_err(|e| e.to_string())?;
        let c = frame_constant(&frame, 16)
            .map_err(|e| e.to_string())?
            .certified_upper
            .ok_or("no certified frame constant")?;
        let pool: Vec<usize> = (1..=10).collect();
        for id in 0..1000 {
            let x = random_vector(&mut rng, 1, 8, 0.5);
            let lo = min_norm(&frame, &x).value;
            let nk = nk_norm(&frame, &x, &sched).map_err(|e| e.to_string())?.value;
            ensure(lo.cmp_norm(&nk).is_le(), || format!("{}: min > nk on vector {id}", frame.label()))?;

            let ks: Vec<usize> = pool.choose_multiple(&mut rng, 4).copied().collect();
            let mut few = ks[..2].to_vec();
            few.sort_unstable();
            let mut ks = ks;
            ks.sort_unstable();
            let small = KIndexSet::list(few).map_err(|e| e.to_string())?;
            let large = KIndexSet::list(ks).map_err(|e| e.to_string())?;
            let ns = subsequence_norm(&frame, &x, &small, &sched).map_err(|e| e.to_string())?.value;
            let nl = subsequence_norm(&frame, &x, &large, &sched).map_err(|e| e.to_string())?.value;
            ensure(ns.cmp_norm(&nl).is_le(), || format!("{}: subsequence order fails on {id}", frame.label()))?;

            let a = analysis(&frame, &x, 64).coefficients;
            let t = nk_norm(&frame, &a, &sched).map_err(|e| e.to_string())?.value;
            ensure(t.cmp_norm(&frame.space().norm(&x).scale(&c)).is_le(), || {
                format!("{}: analysis bound fails on {id}", frame.label())
            })?;
        }
    }
    Ok("1000 vectors per builtin frame".into())
}

fn incomparability() -> Outcome {
    let start = Instant::now();
    let r = exp_incomparable(&[1, 2, 3, 4], &[2, 4], SEED).map_err(|e| e.to_string())?;
    let sep = r.check("separation").ok_or("no separation check")?;
    let row = &sep.detail["blocks"][0];
    ensure(sep.passed && row["d"] == 3, || format!("separation {}", sep.detail))?;
    let conv = r.check("converse_domination").ok_or("no converse check")?;
    ensure(conv.passed, || format!("converse {}", conv.detail))?;
    let t = start.elapsed();
    ensure(t < LIMIT_INCOMPARABLE, || format!("took {t:?}"))?;
    Ok(format!(
        "ratio {} ≥ {} at d=3, converse max ratio {}, {t:.2?}",
        row["ratio"], row["required"].as_str().unwrap_or("?"), conv.detail["max_ratio"]["approx"]
    ))
}

fn pipeline() -> Outcome {
    let cfg = PipelineConfig::new(coordinate_prefix(AmbientSpace::L2, 8), "m_k=k".parse().map_err(|e| format!("{e}"))?);
    let r = exp_pipeline(&cfg, SEED);
    let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    ensure(r.passed, || format!("failing stages {failed:?}"))?;
    let res = r.check("block_residuals").ok_or("no residual check")?;
    ensure(res.detail["max_defect"] == 0.0 && res.detail["final_residual_zero"] == true, || {
        format!("residuals {}", res.detail)
    })?;
    let n = &r.check("nk find").ok_or("no schedule")?.detail["n"];
    let head: Vec<String> = n.as_array().into_iter().flatten().take(8).map(|v| v.to_string()).collect();
    Ok(format!("N = {}, ..., residual defect 0 at every block boundary", head.join(",")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("split exactness", split_exactness),
        ("closed form", closed_form),
        ("ℓ1+ pathology", pathology),
        ("schedule soundness", schedule_soundness),
        ("norm order", norm_order),
        ("incomparability", incomparability),
        ("pipeline", pipeline),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let line = match run() {
            Ok(detail) => format!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                format!("criterion {}: FAIL  {name}: {why}", i + 1)
            }
        };
        println!("{line}");
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
