//! Finding and checking schedules with
//! `‖P_[m0,n0] P_[m,n]‖ ≤ ε_k` for `m0 ≤ n0 ≤ k` and `N_k ≤ m ≤ n`.

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FrameError, Result};
use crate::frame::FrameProvider;
use crate::operator::{operator_norm, FiniteRankOperator, RankOne};
use crate::scalar::{opt_scalar_serde, pow2, ratio, scalar_serde, Certified, Scalar};
use crate::schedule::{NkSchedule, ScheduleCertificate, TailRecord};
use crate::space::pair;
use crate::vector::CoefVector;

/// Slack allowed by the finite part of [`validate_schedule`].
pub fn validation_slack() -> Scalar {
    ratio(1, 1_000_000_000)
}

fn default_target(k: usize) -> Scalar {
    pow2(-(k as i64))
}

/// Upper bounds for `‖x_j‖`, `j ≤ k`.
fn head_norms<F: FrameProvider + ?Sized>(frame: &F, k: usize) -> Result<Vec<Scalar>> {
    (1..=k)
        .map(|j| {
            let x = frame.vector_at(j);
            if x.is_zero() && frame.len().is_none_or(|l| j <= l) {
                return Err(FrameError::ZeroFrameVector(j));
            }
            Ok(frame.space().norm(&x).upper_rational())
        })
        .collect()
}

/// Tail records at `n` when every `j ≤ k` beats its threshold, `None` otherwise.
fn certify<F: FrameProvider + ?Sized>(
    frame: &F,
    k: usize,
    n: usize,
    eps: &Scalar,
    norms: &[Scalar],
) -> Result<Option<Vec<TailRecord>>> {
    let kq = Scalar::from_integer((k as i64).into());
    let mut records = Vec::with_capacity(k);
    for (idx, xn) in norms.iter().enumerate() {
        let j = idx + 1;
        let tail = frame.dual_tail(j, n).ok_or(FrameError::NoShrinkingCertificate)?;
        if xn.is_zero() {
            records.push(TailRecord {
                j,
                x_norm_upper: xn.clone(),
                dual_tail: tail,
                threshold: Scalar::zero(),
            });
            continue;
        }
        let threshold = eps / (&kq * xn);
        if tail >= threshold {
            return Ok(None);
        }
        records.push(TailRecord {
            j,
            x_norm_upper: xn.clone(),
            dual_tail: tail,
            threshold,
        });
    }
    Ok(Some(records))
}

/// Least admissible `N_k > max(k, N_{k-1})` for each `k ≤ k_max`, with
/// targets `ε_k = 2^{-k}`.
pub fn find_schedule<F: FrameProvider + ?Sized>(frame: &F, k_max: usize) -> Result<NkSchedule> {
    find_schedule_with(frame, k_max, default_target)
}

/// As [`find_schedule`] with custom positive targets `ε_k`.
pub fn find_schedule_with<F, E>(frame: &F, k_max: usize, targets: E) -> Result<NkSchedule>
where
    F: FrameProvider + ?Sized,
    E: Fn(usize) -> Scalar,
{
    let limit = frame.search_limit();
    let mut values = Vec::with_capacity(k_max);
    let mut certs = Vec::with_capacity(k_max);
    let mut prev = 0usize;
    for k in 1..=k_max {
        let eps = targets(k);
        if eps <= Scalar::zero() {
            return Err(FrameError::Precondition(format!("target ε_{k} must be positive")));
        }
        let norms = head_norms(frame, k)?;
        let start = k.max(prev) + 1;
        let probe = |n: usize| certify(frame, k, n, &eps, &norms);
        let (n_k, records) = if let Some(r) = probe(start)? {
            (start, r)
        } else {
            // Dual tails are nonincreasing in N: gallop, then bisect.
            let mut lo = start;
            let mut step = 1;
            let (mut hi, mut hi_rec) = loop {
                let cand = start + step;
                if cand > limit {
                    return Err(FrameError::TailCertificateTooWeak { k, limit });
                }
                if let Some(r) = probe(cand)? {
                    break (cand, r);
                }
                lo = cand;
                step *= 2;
            };
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                match probe(mid)? {
                    Some(r) => {
                        hi = mid;
                        hi_rec = r;
                    }
                    None => lo = mid,
                }
            }
            (hi, hi_rec)
        };
        values.push(n_k);
        certs.push(ScheduleCertificate {
            k,
            n_k,
            epsilon: eps,
            records,
        });
        prev = n_k;
    }
    let mut sched = NkSchedule::from_list(values);
    sched.certificates = certs;
    Ok(sched)
}

/// Recomputes every tail in a certificate and checks its threshold.
pub fn check_certificate<F: FrameProvider + ?Sized>(frame: &F, cert: &ScheduleCertificate) -> bool {
    cert.records.iter().all(|r| {
        frame.dual_tail(r.j, cert.n_k).as_ref() == Some(&r.dual_tail)
            && (r.x_norm_upper.is_zero() || r.dual_tail < r.threshold)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KValidation {
    pub k: usize,
    pub n_k: usize,
    #[serde(with = "scalar_serde")]
    pub target: Scalar,
    /// Largest composition norm found on the box, with its tuple `(m0, n0, m, n)`.
    pub finite_worst: Certified,
    pub worst_tuple: Option<(usize, usize, usize, usize)>,
    pub finite_ok: bool,
    /// `k · max_j ‖x_j‖ · dual_tail(j, N_k)`, covering every `n`.
    #[serde(with = "opt_scalar_serde")]
    pub tail_bound: Option<Scalar>,
    pub tail_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub horizon: usize,
    pub k_max: usize,
    pub passed: bool,
    pub first_failure: Option<usize>,
    pub worst: Certified,
    pub per_k: Vec<KValidation>,
}

/// Exhaustive check of all compositions inside `[1, H]` plus the certificate
/// bound for the part beyond `H`.
pub fn validate_schedule<F: FrameProvider + ?Sized>(
    frame: &F,
    sched: &NkSchedule,
    k_max: usize,
    horizon: usize,
) -> Result<ValidationReport> {
    if k_max >= 1 && horizon < sched.n(k_max) {
        return Err(FrameError::Precondition(format!(
            "horizon {horizon} is below N_{k_max} = {}",
            sched.n(k_max)
        )));
    }
    let space = frame.space();
    let h = frame.clamp(horizon);
    let funcs: Vec<CoefVector> = (1..=h).map(|i| frame.functional_at(i).restrict(1, horizon)).collect();
    let vecs: Vec<CoefVector> = (1..=h).map(|i| frame.vector_at(i)).collect();
    let mut per_k = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let n_k = sched.n(k);
        let target = default_target(k);
        let kk = k.min(h);
        let gram: Vec<Vec<Scalar>> = (0..kk)
            .map(|j| {
                let f = frame.functional_at(j + 1);
                vecs.iter().map(|x| pair(&f, x)).collect()
            })
            .collect();
        let rows: Vec<Result<(Certified, Option<(usize, usize, usize, usize)>)>> = (n_k..=h)
            .into_par_iter()
            .map(|m| {
                let mut worst = Certified::exact(Scalar::zero());
                let mut tuple = None;
                let mut g = vec![CoefVector::zero(); kk];
                for n in m..=h {
                    for (gj, row) in g.iter_mut().zip(&gram) {
                        let c = &row[n - 1];
                        if !c.is_zero() && !funcs[n - 1].is_zero() {
                            *gj = gj.add_scaled(c, &funcs[n - 1]);
                        }
                    }
                    for m0 in 1..=kk {
                        let mut op = FiniteRankOperator::zero(space);
                        for n0 in m0..=kk {
                            if !g[n0 - 1].is_zero() && !vecs[n0 - 1].is_zero() {
                                op.terms.push(RankOne {
                                    functional: g[n0 - 1].clone(),
                                    vector: vecs[n0 - 1].clone(),
                                });
                            }
                            if op.terms.is_empty() {
                                if tuple.is_none() {
                                    tuple = Some((m0, n0, m, n));
                                }
                                continue;
                            }
                            let c = operator_norm(&op)?;
                            if c.upper > worst.upper || tuple.is_none() {
                                worst = c;
                                tuple = Some((m0, n0, m, n));
                            }
                        }
                    }
                }
                Ok((worst, tuple))
            })
            .collect();
        let mut finite_worst = Certified::exact(Scalar::zero());
        let mut worst_tuple = None;
        for r in rows {
            let (c, t) = r?;
            if worst_tuple.is_none() || c.upper > finite_worst.upper {
                finite_worst = c;
                worst_tuple = t;
            }
        }
        let finite_ok = finite_worst.upper <= &target + validation_slack();
        let tail_bound = tail_bound(frame, k, n_k);
        let tail_ok = tail_bound.as_ref().is_some_and(|b| *b <= target);
        per_k.push(KValidation {
            k,
            n_k,
            target,
            finite_worst,
            worst_tuple,
            finite_ok,
            tail_bound,
            tail_ok,
        });
    }
    let first_failure = per_k.iter().find(|v| !(v.finite_ok && v.tail_ok)).map(|v| v.k);
    let worst = per_k
        .iter()
        .map(|v| v.finite_worst.clone())
        .fold(Certified::exact(Scalar::zero()), |a, b| if b.upper > a.upper { b } else { a });
    Ok(ValidationReport {
        horizon,
        k_max,
        passed: first_failure.is_none(),
        first_failure,
        worst,
        per_k,
    })
}

fn tail_bound<F: FrameProvider + ?Sized>(frame: &F, k: usize, n: usize) -> Option<Scalar> {
    let mut best = Scalar::zero();
    for j in 1..=frame.clamp(k) {
        let xn = frame.space().norm(&frame.vector_at(j)).upper_rational();
        let t = frame.dual_tail(j, n)?;
        let v = xn * t;
        if v > best {
            best = v;
        }
    }
    Some(best * Scalar::from_integer((k as i64).into()))
}

/// `ε_k = c · r^k` targets for [`find_schedule_with`].
pub fn geometric_targets(c: Scalar, r: Scalar) -> impl Fn(usize) -> Scalar {
    move |k| &c * num_traits::pow(r.clone(), k)
}
