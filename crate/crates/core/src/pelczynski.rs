//! Splitting a finite-rank operator into rank-one pieces whose partial sums
//! stay controlled, and assembling frames from a sequence of such operators.

use std::str::FromStr;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auerbach::{auerbach_basis, AuerbachSystem};
use crate::error::{FrameError, Result};
use crate::frame::{scan_coupling, ExplicitPair, FrameProvider};
use crate::operator::{fraction, operator_norm, FiniteRankOperator};
use crate::scalar::{ratio, scalar_serde, Certified, Scalar};
use crate::space::{pair, AmbientSpace};
use crate::vector::CoefVector;

/// Slack for the enclosure-based inequality checks.
pub fn pel_slack() -> Scalar {
    ratio(1, 1_000_000_000)
}

/// The `m·d` pairs `x_{qd+r} = e_r`, `f_{qd+r} = (1/m) A* e*_r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSystem {
    pub space: AmbientSpace,
    pub source: FiniteRankOperator,
    pub d: usize,
    pub m: usize,
    #[serde(with = "scalar_serde")]
    pub tau: Scalar,
    pub pairs: Vec<ExplicitPair>,
}

impl SplitSystem {
    /// `Σ_{j=lo}^{hi} f_j ⊗ x_j` (1-based, inclusive; empty when `lo > hi`).
    pub fn partial(&self, lo: usize, hi: usize) -> FiniteRankOperator {
        let mut op = FiniteRankOperator::zero(self.space);
        for p in self.pairs.iter().take(hi).skip(lo.saturating_sub(1)) {
            op.push(p.f.clone(), p.x.clone());
        }
        op
    }
}

pub fn split_operator(a: &FiniteRankOperator, m: usize) -> Result<SplitSystem> {
    if m == 0 {
        return Err(FrameError::Precondition("split count m must be at least 1".into()));
    }
    if a.domain != a.codomain {
        return Err(FrameError::SpaceMismatch("splitting needs an operator X → X".into()));
    }
    let sys: AuerbachSystem = auerbach_basis(&a.range_basis(), a.codomain)?;
    let d = sys.dim();
    let inv_m = Scalar::one() / Scalar::from_integer((m as i64).into());
    let round: Vec<ExplicitPair> = sys
        .vectors
        .iter()
        .zip(&sys.functionals)
        .map(|(e, es)| ExplicitPair {
            x: e.clone(),
            f: a.adjoint_apply(es).scale(&inv_m),
        })
        .collect();
    let pairs = (0..m).flat_map(|_| round.iter().cloned()).collect();
    Ok(SplitSystem {
        space: a.domain,
        source: a.clone(),
        d,
        m,
        tau: sys.tau,
        pairs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockCheck {
    pub q: usize,
    pub r: usize,
    pub norm: Certified,
    #[serde(with = "scalar_serde")]
    pub bound: Scalar,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PelReport {
    pub passed: bool,
    pub operator_norm: Certified,
    /// Largest `‖Σ_{j≤qd} f_j⊗x_j - (q/m)A‖` over `q`.
    pub equality_defect: Certified,
    pub exact_equalities: bool,
    pub first_failing_q: Option<usize>,
    /// Block with the largest `norm.upper / bound`.
    pub worst_block: Option<BlockCheck>,
    pub first_failing_block: Option<(usize, usize)>,
}

/// Checks the telescoping identities at every `q` and the block bounds at
/// every `(q, r)`.
pub fn verify_pel(s: &SplitSystem) -> Result<PelReport> {
    let a = &s.source;
    let a_norm = operator_norm(a)?;
    let d = s.d;
    let slack = pel_slack();
    let exact_mode = s.tau.is_zero();
    let eq_tol = Scalar::from_integer((d as i64).into()) * &s.tau * &a_norm.upper + &slack;
    let eq_rows: Vec<Result<(usize, bool, Certified)>> = (0..=s.m)
        .into_par_iter()
        .map(|q| {
            let diff = s.partial(1, q * d).minus(&a.scale(&fraction(q, s.m)));
            if diff.is_zero() {
                return Ok((q, true, Certified::exact(Scalar::zero())));
            }
            let n = operator_norm(&diff)?;
            let ok = !exact_mode && n.upper <= eq_tol;
            Ok((q, ok, n))
        })
        .collect();
    let mut equality_defect = Certified::exact(Scalar::zero());
    let mut first_failing_q = None;
    let mut exact_equalities = true;
    for row in eq_rows {
        let (q, ok, n) = row?;
        exact_equalities &= n.upper.is_zero();
        if !ok && first_failing_q.is_none() {
            first_failing_q = Some(q);
        }
        if n.upper > equality_defect.upper {
            equality_defect = n;
        }
    }

    let tuples: Vec<(usize, usize)> = (0..s.m).flat_map(|q| (1..=d).map(move |r| (q, r))).collect();
    let blocks: Vec<Result<BlockCheck>> = tuples
        .par_iter()
        .map(|&(q, r)| {
            let block = s.partial(q * d + 1, q * d + r);
            let norm = operator_norm(&block)?;
            let rq = Scalar::from_integer((r as i64).into());
            let bound = (fraction(r, s.m) + &rq * &s.tau) * &a_norm.lower;
            Ok(BlockCheck { q, r, norm, bound })
        })
        .collect();
    let mut worst_block: Option<BlockCheck> = None;
    let mut first_failing_block = None;
    for b in blocks {
        let b = b?;
        if first_failing_block.is_none() && b.norm.upper > &b.bound + &slack {
            first_failing_block = Some((b.q, b.r));
        }
        let excess = &b.norm.upper - &b.bound;
        if worst_block.as_ref().is_none_or(|w| excess > &w.norm.upper - &w.bound) {
            worst_block = Some(b);
        }
    }
    Ok(PelReport {
        passed: first_failing_q.is_none() && first_failing_block.is_none(),
        operator_norm: a_norm,
        equality_defect,
        exact_equalities,
        first_failing_q,
        worst_block,
        first_failing_block,
    })
}

/// How `m_k` is chosen from `k` and `d_k = rank A_k`: a product of factors
/// from `k`, `d_k` and positive integers, e.g. `m_k=k*d_k`, `m_k=2k`, `m_k=3`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitRule {
    pub constant: u64,
    pub k_power: u32,
    pub d_power: u32,
}

impl SplitRule {
    pub fn m_for(&self, k: usize, d: usize) -> usize {
        let v = self.constant as usize * k.pow(self.k_power) * d.max(1).pow(self.d_power);
        v.max(1)
    }
}

impl Default for SplitRule {
    fn default() -> Self {
        SplitRule {
            constant: 1,
            k_power: 1,
            d_power: 1,
        }
    }
}

impl FromStr for SplitRule {
    type Err = FrameError;

    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let body = t.strip_prefix("m_k=").unwrap_or(&t);
        let bad = || FrameError::Parse(format!("unrecognised split rule {s:?}"));
        let mut rule = SplitRule {
            constant: 1,
            k_power: 0,
            d_power: 0,
        };
        for factor in body.split('*') {
            let digits: String = factor.chars().take_while(|c| c.is_ascii_digit()).collect();
            let rest = &factor[digits.len()..];
            if !digits.is_empty() {
                rule.constant *= digits.parse::<u64>().map_err(|_| bad())?;
            }
            match rest {
                "" if !digits.is_empty() => {}
                "k" => rule.k_power += 1,
                "d_k" | "d" => rule.d_power += 1,
                _ => return Err(bad()),
            }
        }
        if rule.constant == 0 {
            return Err(bad());
        }
        Ok(rule)
    }
}

/// Frame obtained by concatenating the split systems of `A_1, A_2, …`.
#[derive(Clone, Debug)]
pub struct AssembledFrame {
    pub space: AmbientSpace,
    pub systems: Vec<SplitSystem>,
    /// `L_k`: index of the last pair of block `k` (`L_0 = 0`).
    pub boundaries: Vec<usize>,
    op_norms: Vec<Scalar>,
    pairs: Vec<ExplicitPair>,
}

impl AssembledFrame {
    pub fn operators(&self) -> impl Iterator<Item = &FiniteRankOperator> {
        self.systems.iter().map(|s| &s.source)
    }

    /// Block `k` (1-based), `q`, `r` with `l = L_{k-1} + q d_k + r`, `0 ≤ r < d_k`.
    /// Indices at or past the end map to `(blocks + 1, 0, 0)`.
    pub fn decompose(&self, l: usize) -> (usize, usize, usize) {
        for (k, s) in self.systems.iter().enumerate() {
            let start = self.boundaries[k];
            if l < self.boundaries[k + 1] {
                let off = l - start;
                let d = s.d.max(1);
                return (k + 1, off / d, off % d);
            }
        }
        (self.systems.len() + 1, 0, 0)
    }

    /// `‖f - Σ_{i<k} A_i* f‖ + (q/m_k)‖A_k* f‖ + (r/m_k + rτ)‖A_k‖‖f‖` for
    /// `l = L_{k-1} + q d_k + r`, bounding `‖f ∘ P_[1,l] - f‖`.
    fn drift_bound(&self, f: &CoefVector, l: usize) -> Scalar {
        let (k, q, r) = self.decompose(l);
        let mut head = f.clone();
        for s in self.systems.iter().take(k - 1) {
            head = head.sub(&s.source.adjoint_apply(f));
        }
        let mut total = self.space.dual_norm(&head).upper_rational();
        if let Some(s) = self.systems.get(k - 1) {
            if q > 0 {
                total += fraction(q, s.m) * self.space.dual_norm(&s.source.adjoint_apply(f)).upper_rational();
            }
            if r > 0 {
                let rq = Scalar::from_integer((r as i64).into());
                total += (fraction(r, s.m) + rq * &s.tau)
                    * &self.op_norms[k - 1]
                    * self.space.dual_norm(f).upper_rational();
            }
        }
        total
    }

    /// `x - Σ_{i≤k} A_i x`.
    pub fn block_residual(&self, x: &CoefVector, k: usize) -> CoefVector {
        self.systems
            .iter()
            .take(k)
            .fold(x.clone(), |acc, s| acc.sub(&s.source.apply(x)))
    }
}

pub fn assemble_bap_frame(
    ops: &[FiniteRankOperator],
    splits: &[usize],
    test_family: Option<Vec<CoefVector>>,
) -> Result<AssembledFrame> {
    if ops.is_empty() {
        return Err(FrameError::Precondition("no operators to assemble".into()));
    }
    if ops.len() != splits.len() {
        return Err(FrameError::Precondition(format!(
            "{} operators but {} split counts",
            ops.len(),
            splits.len()
        )));
    }
    let space = ops[0].domain;
    if ops.iter().any(|a| a.domain != space || a.codomain != space) {
        return Err(FrameError::SpaceMismatch("all operators must act on one space".into()));
    }
    let systems = ops
        .par_iter()
        .zip(splits.par_iter())
        .map(|(a, &m)| split_operator(a, m))
        .collect::<Result<Vec<_>>>()?;

    let rates: Vec<Scalar> = systems.iter().map(|s| fraction(s.d, s.m)).collect();
    let nonincreasing = rates.windows(2).all(|w| w[1] <= w[0]);
    let decays = rates.len() < 2 || rates.last() < rates.first();
    if !(nonincreasing && decays) {
        return Err(FrameError::Precondition(
            "rank/split ratios d_k/m_k must decrease across the prefix".into(),
        ));
    }

    let family = test_family.unwrap_or_else(|| {
        let top = ops
            .iter()
            .flat_map(|a| a.terms.iter())
            .flat_map(|t| t.vector.max_index().into_iter().chain(t.functional.max_index()))
            .max()
            .unwrap_or(0);
        (1..=top).map(CoefVector::unit).collect()
    });
    for (id, x) in family.iter().enumerate() {
        let sum = ops.iter().fold(CoefVector::zero(), |acc, a| acc.add(&a.apply(x)));
        if sum != *x {
            return Err(FrameError::Precondition(format!(
                "operators do not reconstruct test vector {id}: {x}"
            )));
        }
    }

    let op_norms = ops
        .iter()
        .map(|a| operator_norm(a).map(|c| c.upper))
        .collect::<Result<Vec<_>>>()?;
    let mut boundaries = vec![0];
    let mut pairs = Vec::new();
    for s in &systems {
        pairs.extend(s.pairs.iter().cloned());
        boundaries.push(pairs.len());
    }
    Ok(AssembledFrame {
        space,
        systems,
        boundaries,
        op_norms,
        pairs,
    })
}

impl FrameProvider for AssembledFrame {
    fn space(&self) -> AmbientSpace {
        self.space
    }
    fn len(&self) -> Option<usize> {
        Some(self.pairs.len())
    }
    fn vector_at(&self, i: usize) -> CoefVector {
        self.pairs.get(i.wrapping_sub(1)).map(|p| p.x.clone()).unwrap_or_default()
    }
    fn functional_at(&self, i: usize) -> CoefVector {
        self.pairs.get(i.wrapping_sub(1)).map(|p| p.f.clone()).unwrap_or_default()
    }
    fn label(&self) -> String {
        let ms: Vec<String> = self.systems.iter().map(|s| format!("{}x{}", s.d, s.m)).collect();
        format!("assembled frame in {} from blocks [{}]", self.space, ms.join(", "))
    }
    fn analysis_horizon(&self, x: &CoefVector) -> Option<usize> {
        Some(self.pairs.iter().rposition(|p| !pair(&p.f, x).is_zero()).map_or(0, |p| p + 1))
    }
    fn coupling(&self, j: usize) -> Option<Vec<usize>> {
        Some(scan_coupling(self, j, self.pairs.len()))
    }
    /// `2 max_{l ≥ N-1} drift(f_j, l)`: `f_j ∘ P_[m,n]` is the difference of
    /// two drifts at `n` and `m - 1`.
    fn dual_tail(&self, j: usize, n: usize) -> Option<Scalar> {
        let f = self.functional_at(j);
        let len = self.pairs.len();
        let lo = n.saturating_sub(1).min(len);
        let best = (lo..=len)
            .map(|l| self.drift_bound(&f, l))
            .max()
            .unwrap_or_else(Scalar::zero);
        Some(best * Scalar::from_integer(2.into()))
    }
    fn search_limit(&self) -> usize {
        self.pairs.len() + 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::partial_reconstruction;
    use crate::scalar::int;

    fn cp(space: AmbientSpace, c: &[usize]) -> FiniteRankOperator {
        FiniteRankOperator::coordinate_projection(space, c)
    }

    #[test]
    fn line_split_halves() {
        let a = cp(AmbientSpace::L2, &[1]);
        let s = split_operator(&a, 2).unwrap();
        assert_eq!(s.pairs.len(), 2);
        for p in &s.pairs {
            assert_eq!(p.x, CoefVector::unit(1));
            assert_eq!(p.f, CoefVector::unit(1).scale(&ratio(1, 2)));
        }
        assert!(s.partial(1, 1).same_map(&a.scale(&ratio(1, 2))));
        assert!(s.partial(1, 0).is_zero());
        assert!(s.partial(1, 2).same_map(&a));
        let r = verify_pel(&s).unwrap();
        assert!(r.passed && r.exact_equalities);
    }

    #[test]
    fn rank_two_l2_split_verifies() {
        let mut a = FiniteRankOperator::zero(AmbientSpace::L2);
        a.push(CoefVector::from_ints(&[(1, 2), (2, -1)]), CoefVector::from_ints(&[(1, 1), (3, 2)]));
        a.push(CoefVector::from_ints(&[(3, 1)]), CoefVector::from_ints(&[(2, 3), (3, -1)]));
        let s = split_operator(&a, 3).unwrap();
        assert_eq!(s.d, 2);
        let r = verify_pel(&s).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.equality_defect.upper, int(0));
    }

    #[test]
    fn corrupted_system_fails_at_covering_q() {
        let a = cp(AmbientSpace::L1, &[1, 2]);
        let mut s = split_operator(&a, 3).unwrap();
        // j = 4 is (q = 1, r = 2), covered first by q = 2
        let j = 4;
        s.pairs[j - 1].f = s.pairs[j - 1].f.scale(&int(2));
        let r = verify_pel(&s).unwrap();
        assert!(!r.passed);
        assert_eq!(r.first_failing_q, Some(2));
        assert_eq!(r.equality_defect, Certified::exact(ratio(1, 3)));
    }

    #[test]
    fn split_rules() {
        assert_eq!("m_k=k*d_k".parse::<SplitRule>().unwrap(), SplitRule::default());
        assert_eq!("m_k=k".parse::<SplitRule>().unwrap().m_for(4, 3), 4);
        assert_eq!("2k".parse::<SplitRule>().unwrap().m_for(4, 3), 8);
        assert_eq!("m_k=2*k".parse::<SplitRule>().unwrap().m_for(3, 1), 6);
        assert_eq!("3".parse::<SplitRule>().unwrap().m_for(9, 9), 3);
        assert!("m_k=j".parse::<SplitRule>().is_err());
    }

    #[test]
    fn coordinate_prefix_assembles() {
        let ops: Vec<_> = (1..=4).map(|k| cp(AmbientSpace::L2, &[k])).collect();
        let f = assemble_bap_frame(&ops, &[1, 2, 3, 4], None).unwrap();
        assert_eq!(f.len(), Some(10));
        assert_eq!(f.boundaries, vec![0, 1, 3, 6, 10]);
        let x = CoefVector::from_ints(&[(1, 1), (2, -2), (3, 5), (4, 7)]);
        assert_eq!(f.analysis_horizon(&x), Some(10));
        assert_eq!(partial_reconstruction(&f, 1, 10, &x).unwrap(), x);
        for k in 1..=4 {
            let p = partial_reconstruction(&f, 1, f.boundaries[k], &x).unwrap();
            assert_eq!(x.sub(&p), f.block_residual(&x, k));
        }
        // second pair lives in block 2, which ends at 3
        assert_eq!(f.dual_tail(2, 4), Some(int(0)));
        assert!(f.dual_tail(2, 3).unwrap() > int(0));
    }

    #[test]
    fn single_line_and_bad_rates() {
        let f = assemble_bap_frame(&[cp(AmbientSpace::L1, &[1])], &[1], None).unwrap();
        assert_eq!(f.vector_at(1), CoefVector::unit(1));
        assert_eq!(f.functional_at(1), CoefVector::unit(1));
        let ops = [cp(AmbientSpace::L1, &[1]), cp(AmbientSpace::L1, &[2])];
        assert!(assemble_bap_frame(&ops, &[2, 1], None).is_err());
        assert!(assemble_bap_frame(&ops, &[1, 1], None).is_err());
        assert!(assemble_bap_frame(&ops[..1], &[1], Some(vec![CoefVector::unit(2)])).is_err());
    }
}
