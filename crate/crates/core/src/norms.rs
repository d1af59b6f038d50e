//! Exact evaluation of associated norms on finitely supported coefficient
//! vectors.
//!
//! All suprema are finite maxima: only intervals meeting the support of the
//! coefficient vector contribute, and only `k` with `N_k ≤ max supp a`.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::frame::{partial_reconstruction, synthesis, FrameProvider};
use crate::scalar::{pow2, NormValue, Scalar};
use crate::schedule::NkSchedule;
use crate::space::pair;
use crate::vector::CoefVector;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum NormMode {
    Min,
    KSubnorm { k: usize },
    Nk,
    Subsequence { ks: KIndexSet },
}

/// The tuple at which a reported supremum is attained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Attainment {
    /// `‖Σ_{i=m}^n a_i x_i‖`.
    Interval { m: usize, n: usize },
    /// `2^k ‖P_[m0,n0] S_[m,n] a‖`.
    Composite {
        k: usize,
        m0: usize,
        n0: usize,
        m: usize,
        n: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormReport {
    #[serde(flatten)]
    pub mode: NormMode,
    pub value: NormValue,
    /// `None` for the zero vector (and for empty suprema).
    pub attained: Option<Attainment>,
}

impl NormReport {
    fn zero<F: FrameProvider + ?Sized>(frame: &F, mode: NormMode) -> Self {
        NormReport {
            mode,
            value: NormValue::zero(frame.space().is_hilbert()),
            attained: None,
        }
    }

    /// Recomputes the value at the attaining tuple from scratch.
    pub fn reproduce<F: FrameProvider + ?Sized>(&self, frame: &F, a: &CoefVector) -> Result<NormValue> {
        evaluate_attainment(frame, a, self.attained.as_ref())
    }
}

/// Value of a single tuple of an associated-norm supremum.
pub fn evaluate_attainment<F: FrameProvider + ?Sized>(
    frame: &F,
    a: &CoefVector,
    at: Option<&Attainment>,
) -> Result<NormValue> {
    let space = frame.space();
    match at {
        None => Ok(NormValue::zero(space.is_hilbert())),
        Some(&Attainment::Interval { m, n }) => Ok(space.norm(&synthesis(frame, m, n, a)?)),
        Some(&Attainment::Composite { k, m0, n0, m, n }) => {
            let y = synthesis(frame, m, n, a)?;
            let z = partial_reconstruction(frame, m0, n0, &y)?;
            Ok(space.norm(&z).scale(&pow2(k as i64)))
        }
    }
}

/// A set of `k` indices: a finite list plus, optionally, every `k ≥ from`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KIndexSet {
    pub listed: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<usize>,
}

impl KIndexSet {
    pub fn all() -> Self {
        KIndexSet {
            listed: Vec::new(),
            from: Some(1),
        }
    }

    pub fn list(ks: Vec<usize>) -> Result<Self> {
        let s = KIndexSet {
            listed: ks,
            from: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let increasing = self.listed.windows(2).all(|w| w[0] < w[1]);
        let positive = self.listed.first().is_none_or(|&k| k >= 1) && self.from != Some(0);
        let ordered = match (self.listed.last(), self.from) {
            (Some(&l), Some(f)) => l < f,
            _ => true,
        };
        if increasing && positive && ordered {
            Ok(())
        } else {
            Err(FrameError::Precondition(
                "subsequence indices must be strictly increasing and positive".into(),
            ))
        }
    }

    pub fn contains(&self, k: usize) -> bool {
        self.from.is_some_and(|f| k >= f) || self.listed.binary_search(&k).is_ok()
    }

    pub fn is_subset_of(&self, other: &KIndexSet) -> bool {
        let tail_ok = match (self.from, other.from) {
            (None, _) => true,
            (Some(a), Some(b)) => a >= b,
            (Some(_), None) => false,
        };
        tail_ok && self.listed.iter().all(|&k| other.contains(k))
    }
}

impl FromStr for KIndexSet {
    type Err = FrameError;

    /// `2,5,7`, `5..`, `1,3,6..` or `all`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t == "all" {
            return Ok(KIndexSet::all());
        }
        let bad = || FrameError::Parse(format!("unrecognised index set {s:?}"));
        let mut set = KIndexSet {
            listed: Vec::new(),
            from: None,
        };
        for part in t.split(',').map(str::trim) {
            if set.from.is_some() {
                return Err(bad());
            }
            if let Some(h) = part.strip_suffix("..") {
                set.from = Some(h.parse().map_err(|_| bad())?);
            } else {
                set.listed.push(part.parse().map_err(|_| bad())?);
            }
        }
        set.validate()?;
        Ok(set)
    }
}

impl fmt::Display for KIndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.listed.iter().map(|k| k.to_string()).collect();
        if let Some(from) = self.from {
            parts.push(format!("{from}.."));
        }
        write!(f, "{}", parts.join(","))
    }
}

fn support_of(a: &CoefVector) -> Vec<(usize, Scalar)> {
    a.iter().map(|(i, v)| (i, v.clone())).collect()
}

/// `sup_{m≤n} ‖Σ_{i=m}^n a_i x_i‖`, by enumerating runs of support indices.
pub fn min_norm<F: FrameProvider + ?Sized>(frame: &F, a: &CoefVector) -> NormReport {
    let space = frame.space();
    let mut report = NormReport::zero(frame, NormMode::Min);
    let supp = support_of(a);
    let vectors: Vec<CoefVector> = supp.iter().map(|(i, _)| frame.vector_at(*i)).collect();
    for p in 0..supp.len() {
        let mut acc = CoefVector::zero();
        for q in p..supp.len() {
            acc = acc.add_scaled(&supp[q].1, &vectors[q]);
            let v = space.norm(&acc);
            if report.attained.is_none() || v.cmp_norm(&report.value).is_gt() {
                report.value = v;
                report.attained = Some(Attainment::Interval {
                    m: supp[p].0,
                    n: supp[q].0,
                });
            }
        }
    }
    report
}

/// Squared value of `sup_I ( |Σ_{i∈I odd} a_i|² + Σ_{i∈I even} |a_i|² )`
/// over all integer intervals `I ⊆ [1, max supp a]`.
pub fn min_norm_closed_form_ex23(a: &CoefVector) -> Scalar {
    let top = a.max_index().unwrap_or(0);
    let mut best = Scalar::zero();
    for m in 1..=top {
        let mut odd = Scalar::zero();
        let mut even = Scalar::zero();
        for i in m..=top {
            let v = a.get(i);
            if i % 2 == 1 {
                odd += v;
            } else {
                even += &v * &v;
            }
            let total = &odd * &odd + &even;
            if total > best {
                best = total;
            }
        }
    }
    best
}

/// `sup 2^k ‖P_[m0,n0] S_[m,n] a‖` over `m0 ≤ n0 ≤ k` and `N_k ≤ m ≤ n`.
pub fn k_subnorm<F: FrameProvider + ?Sized>(
    frame: &F,
    a: &CoefVector,
    k: usize,
    sched: &NkSchedule,
) -> NormReport {
    let mut report = NormReport::zero(frame, NormMode::KSubnorm { k });
    if k == 0 {
        return report;
    }
    let space = frame.space();
    let nk = sched.n(k);
    let supp: Vec<(usize, Scalar)> = support_of(a).into_iter().filter(|(i, _)| *i >= nk).collect();
    if supp.is_empty() {
        return report;
    }
    let kk = frame.clamp(k);
    let funcs: Vec<CoefVector> = (1..=kk).map(|j| frame.functional_at(j)).collect();
    let head: Vec<CoefVector> = (1..=kk).map(|j| frame.vector_at(j)).collect();
    // gram[q][j] = f_{j+1}(x_{s_q})
    let gram: Vec<Vec<Scalar>> = supp
        .iter()
        .map(|(i, _)| {
            let x = frame.vector_at(*i);
            funcs.iter().map(|f| pair(f, &x)).collect()
        })
        .collect();
    let factor = pow2(k as i64);
    let mut best: Option<(NormValue, Attainment)> = None;
    for p in 0..supp.len() {
        let mut c = vec![Scalar::zero(); kk];
        for q in p..supp.len() {
            for (cj, g) in c.iter_mut().zip(&gram[q]) {
                if !g.is_zero() {
                    *cj += &supp[q].1 * g;
                }
            }
            let nz: Vec<usize> = (0..kk).filter(|&j| !c[j].is_zero()).collect();
            for s in 0..nz.len() {
                let mut acc = CoefVector::zero();
                for t in s..nz.len() {
                    acc = acc.add_scaled(&c[nz[t]], &head[nz[t]]);
                    let v = space.norm(&acc).scale(&factor);
                    if best.as_ref().is_none_or(|(b, _)| v.cmp_norm(b).is_gt()) {
                        best = Some((
                            v,
                            Attainment::Composite {
                                k,
                                m0: nz[s] + 1,
                                n0: nz[t] + 1,
                                m: supp[p].0,
                                n: supp[q].0,
                            },
                        ));
                    }
                }
            }
        }
    }
    if let Some((v, at)) = best {
        report.value = v;
        report.attained = Some(at);
    }
    report
}

/// `max(min_norm(a), sup_{k ∈ ks, N_k ≤ max supp a} k_subnorm(a, k))`.
pub fn subsequence_norm<F: FrameProvider + ?Sized>(
    frame: &F,
    a: &CoefVector,
    ks: &KIndexSet,
    sched: &NkSchedule,
) -> Result<NormReport> {
    ks.validate()?;
    sched.require_increasing()?;
    let base = min_norm(frame, a);
    let mut report = NormReport {
        mode: NormMode::Subsequence { ks: ks.clone() },
        value: base.value,
        attained: base.attained,
    };
    let top = a.max_index().unwrap_or(0);
    for k in sched.ks_up_to(top).into_iter().filter(|&k| ks.contains(k)) {
        let sub = k_subnorm(frame, a, k, sched);
        if sub.value.cmp_norm(&report.value).is_gt() {
            report.value = sub.value;
            report.attained = sub.attained;
        }
    }
    Ok(report)
}

/// The norm forcing composition decay into the associated space: both parts,
/// every `k`.
pub fn nk_norm<F: FrameProvider + ?Sized>(
    frame: &F,
    a: &CoefVector,
    sched: &NkSchedule,
) -> Result<NormReport> {
    let mut r = subsequence_norm(frame, a, &KIndexSet::all(), sched)?;
    r.mode = NormMode::Nk;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{CanonicalBasis, Example23};
    use crate::scalar::int;
    use crate::space::AmbientSpace;

    fn z(i: usize) -> CoefVector {
        CoefVector::unit(i)
    }

    fn sq(v: i64) -> NormValue {
        NormValue::from_squared(int(v * v))
    }

    #[test]
    fn min_norm_examples() {
        let r = min_norm(&Example23, &z(1).add(&z(3)));
        assert_eq!(r.value, sq(2));
        assert_eq!(r.attained, Some(Attainment::Interval { m: 1, n: 3 }));
        let a = CoefVector::from_ints(&[(1, 3), (2, -4), (7, 1)]);
        let c = min_norm(&CanonicalBasis(AmbientSpace::L2), &a);
        assert_eq!(c.value, NormValue::from_squared(int(26)));
        for n in 1..=12 {
            let a = CoefVector::from_pairs((1..=n).map(|i| (2 * i - 1, int(1))));
            assert_eq!(min_norm(&Example23, &a).value, sq(n as i64));
        }
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(min_norm_closed_form_ex23(&z(2)), int(1));
        assert_eq!(min_norm_closed_form_ex23(&z(1).add(&z(3))), int(4));
        let a = CoefVector::from_ints(&[(1, 1), (2, 1), (3, -1)]);
        assert_eq!(min_norm_closed_form_ex23(&a), int(2));
    }

    #[test]
    fn k_subnorm_examples() {
        let s = NkSchedule::successor();
        let r = k_subnorm(&Example23, &z(3), 2, &s);
        assert_eq!(r.value, sq(4));
        assert_eq!(
            r.attained,
            Some(Attainment::Composite { k: 2, m0: 1, n0: 1, m: 3, n: 3 })
        );
        assert!(k_subnorm(&Example23, &z(3), 3, &s).value.is_zero());
        let canon = CanonicalBasis(AmbientSpace::L2);
        let a = CoefVector::from_ints(&[(1, 1), (4, 2), (9, -3)]);
        for k in 1..10 {
            assert!(k_subnorm(&canon, &a, k, &s).value.is_zero());
        }
    }

    #[test]
    fn nk_norm_examples() {
        let s = NkSchedule::successor();
        assert_eq!(nk_norm(&Example23, &z(1), &s).unwrap().value, sq(1));
        let r = nk_norm(&Example23, &z(3), &s).unwrap();
        assert_eq!(r.value, sq(4));
        assert_eq!(r.reproduce(&Example23, &z(3)).unwrap(), r.value);
        for i in 1..=6usize {
            let r = nk_norm(&Example23, &z(2 * i - 1), &s).unwrap();
            assert_eq!(r.value, NormValue::from_squared(pow2(2 * (2 * i as i64 - 2))));
        }
        let canon = CanonicalBasis(AmbientSpace::L2);
        let a = CoefVector::from_ints(&[(2, 1), (3, 2)]);
        assert_eq!(nk_norm(&canon, &a, &s).unwrap().value, NormValue::from_squared(int(5)));
        assert!(matches!(
            nk_norm(&canon, &a, &NkSchedule::constant(1)),
            Err(FrameError::InvalidSchedule(_))
        ));
    }

    #[test]
    fn subsequence_examples() {
        let s = NkSchedule::successor();
        let late: KIndexSet = "5..".parse().unwrap();
        assert_eq!(subsequence_norm(&Example23, &z(3), &late, &s).unwrap().value, sq(1));
        let two: KIndexSet = "2".parse().unwrap();
        assert_eq!(subsequence_norm(&Example23, &z(3), &two, &s).unwrap().value, sq(4));
        assert!("3,2".parse::<KIndexSet>().is_err());
        assert!(two.is_subset_of(&KIndexSet::all()));
        assert!(!late.is_subset_of(&two));
    }
}
