//! Finite-rank operators `Σ_j f_j ⊗ x_j` and their ℓp → ℓp norms.

use std::collections::BTreeSet;

use nalgebra::SymmetricEigen;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::linalg::RMatrix;
use crate::scalar::{from_f64, int, ratio, sqrt_enclosure, to_f64, Certified, Scalar};
use crate::space::{pair, AmbientSpace};
use crate::vector::CoefVector;

/// `x ↦ f(x) · vector`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankOne {
    #[serde(rename = "f")]
    pub functional: CoefVector,
    #[serde(rename = "x")]
    pub vector: CoefVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteRankOperator {
    pub domain: AmbientSpace,
    pub codomain: AmbientSpace,
    pub terms: Vec<RankOne>,
}

/// Coordinate matrix of an operator: rows are indexed by `row_index`
/// (codomain coordinates) and columns by `col_index` (domain coordinates).
#[derive(Clone, Debug, PartialEq)]
pub struct InducedMatrix {
    pub row_index: Vec<usize>,
    pub col_index: Vec<usize>,
    pub matrix: RMatrix,
}

impl FiniteRankOperator {
    pub fn new(space: AmbientSpace, terms: Vec<RankOne>) -> Self {
        FiniteRankOperator {
            domain: space,
            codomain: space,
            terms,
        }
    }

    pub fn zero(space: AmbientSpace) -> Self {
        Self::new(space, Vec::new())
    }

    pub fn rank_one(space: AmbientSpace, functional: CoefVector, vector: CoefVector) -> Self {
        Self::new(space, vec![RankOne { functional, vector }])
    }

    /// Identity on the span of the listed coordinates.
    pub fn coordinate_projection(space: AmbientSpace, coords: &[usize]) -> Self {
        Self::new(
            space,
            coords
                .iter()
                .map(|&c| RankOne {
                    functional: CoefVector::unit(c),
                    vector: CoefVector::unit(c),
                })
                .collect(),
        )
    }

    pub fn push(&mut self, functional: CoefVector, vector: CoefVector) {
        self.terms.push(RankOne { functional, vector });
    }

    pub fn apply(&self, x: &CoefVector) -> CoefVector {
        self.terms.iter().fold(CoefVector::zero(), |acc, t| {
            acc.add_scaled(&pair(&t.functional, x), &t.vector)
        })
    }

    /// `A* g = Σ_j g(x_j) f_j`.
    pub fn adjoint_apply(&self, g: &CoefVector) -> CoefVector {
        self.terms.iter().fold(CoefVector::zero(), |acc, t| {
            acc.add_scaled(&pair(g, &t.vector), &t.functional)
        })
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        FiniteRankOperator {
            domain: self.domain,
            codomain: self.codomain,
            terms: self
                .terms
                .iter()
                .map(|t| RankOne {
                    functional: t.functional.scale(c),
                    vector: t.vector.clone(),
                })
                .collect(),
        }
    }

    /// Formal sum; terms are concatenated.
    pub fn plus(&self, other: &FiniteRankOperator) -> Self {
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out
    }

    pub fn minus(&self, other: &FiniteRankOperator) -> Self {
        self.plus(&other.scale(&int(-1)))
    }

    /// Functionals restricted to domain coordinates in `[1, hi]`.
    pub fn restrict_domain(&self, hi: usize) -> Self {
        FiniteRankOperator {
            domain: self.domain,
            codomain: self.codomain,
            terms: self
                .terms
                .iter()
                .map(|t| RankOne {
                    functional: t.functional.restrict(1, hi),
                    vector: t.vector.clone(),
                })
                .collect(),
        }
    }

    pub fn matrix(&self) -> InducedMatrix {
        let rows: BTreeSet<usize> = self.terms.iter().flat_map(|t| t.vector.support()).collect();
        let cols: BTreeSet<usize> = self
            .terms
            .iter()
            .flat_map(|t| t.functional.support())
            .collect();
        let row_index: Vec<usize> = rows.into_iter().collect();
        let col_index: Vec<usize> = cols.into_iter().collect();
        let mut matrix = RMatrix::zeros(row_index.len(), col_index.len());
        for t in &self.terms {
            for (r, xv) in t.vector.iter() {
                let ri = row_index.binary_search(&r).unwrap();
                for (c, fv) in t.functional.iter() {
                    let ci = col_index.binary_search(&c).unwrap();
                    matrix.add_to(ri, ci, &(xv * fv));
                }
            }
        }
        InducedMatrix {
            row_index,
            col_index,
            matrix,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.matrix().matrix.is_zero()
    }

    /// Exact operator equality (as linear maps on finitely supported vectors).
    pub fn same_map(&self, other: &FiniteRankOperator) -> bool {
        self.minus(other).is_zero()
    }

    pub fn rank(&self) -> usize {
        self.matrix().matrix.rank()
    }

    /// Basis of the range, as vectors over the codomain coordinates.
    pub fn range_basis(&self) -> Vec<CoefVector> {
        let im = self.matrix();
        let (_, pivots) = im.matrix.rref();
        pivots
            .into_iter()
            .map(|c| {
                CoefVector::from_pairs(
                    im.matrix
                        .column(c)
                        .into_iter()
                        .enumerate()
                        .map(|(r, v)| (im.row_index[r], v)),
                )
            })
            .collect()
    }
}

/// Norm of `A: ℓp → ℓp` for p ∈ {1, 2, ∞}.
///
/// ℓ1 and ℓ∞ norms are exact (max column / row ℓ1 sums). The ℓ2 norm is the
/// largest singular value, enclosed between an exact Rayleigh quotient and an
/// upper bound `u` certified by exact positive definiteness of `u²I − AᵀA`.
pub fn operator_norm(a: &FiniteRankOperator) -> Result<Certified> {
    if a.domain != a.codomain {
        return Err(FrameError::SpaceMismatch(format!(
            "operator norm needs ℓp → ℓp, got {} → {}",
            a.domain, a.codomain
        )));
    }
    let im = a.matrix();
    let m = &im.matrix;
    if m.is_zero() {
        return Ok(Certified::exact(Scalar::zero()));
    }
    match a.domain {
        AmbientSpace::L1 => Ok(Certified::exact(max_abs_sum(m.cols(), |c| m.column(c)))),
        AmbientSpace::Linf => Ok(Certified::exact(max_abs_sum(m.rows(), |r| {
            (0..m.cols()).map(|c| m.get(r, c).clone()).collect()
        }))),
        AmbientSpace::L2 => Ok(spectral_norm(m)),
    }
}

fn max_abs_sum(n: usize, line: impl Fn(usize) -> Vec<Scalar>) -> Scalar {
    (0..n)
        .map(|i| line(i).iter().map(|v| v.abs()).sum::<Scalar>())
        .max()
        .unwrap_or_else(Scalar::zero)
}

/// Matrices with at most one nonzero per row and column have norm max|entry|
/// in every ℓp.
fn monomial_norm(m: &RMatrix) -> Option<Scalar> {
    let mut best = Scalar::zero();
    let mut col_used = vec![false; m.cols()];
    for r in 0..m.rows() {
        let mut seen = false;
        for (c, used) in col_used.iter_mut().enumerate() {
            let v = m.get(r, c);
            if v.is_zero() {
                continue;
            }
            if seen || *used {
                return None;
            }
            seen = true;
            *used = true;
            best = best.max(v.abs());
        }
    }
    Some(best)
}

fn spectral_norm(m: &RMatrix) -> Certified {
    if let Some(v) = monomial_norm(m) {
        return Certified::exact(v);
    }
    // Gram matrix on the smaller side; both have the same nonzero spectrum.
    let gram = if m.cols() <= m.rows() {
        m.transpose().mul(m)
    } else {
        m.mul(&m.transpose())
    };
    let n = gram.rows();
    if n == 1 {
        return sqrt_enclosure(gram.get(0, 0));
    }
    let eig = SymmetricEigen::new(gram.to_f64());
    let (imax, lambda) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, l)| if l > best.1 { (i, l) } else { best });
    let v: Vec<Scalar> = eig.eigenvectors.column(imax).iter().map(|&x| from_f64(x)).collect();

    // Rayleigh quotient vᵀGv / vᵀv ≤ λ_max, exact.
    let mut num = Scalar::zero();
    for i in 0..n {
        if v[i].is_zero() {
            continue;
        }
        let mut row = Scalar::zero();
        for j in 0..n {
            if !v[j].is_zero() {
                row += gram.get(i, j) * &v[j];
            }
        }
        num += &v[i] * row;
    }
    let den: Scalar = v.iter().map(|x| x * x).sum();
    let rq = if den.is_zero() { Scalar::zero() } else { num / den };

    let trace: Scalar = (0..n).map(|i| gram.get(i, i).clone()).sum();
    let base = lambda.max(to_f64(&rq)).max(f64::MIN_POSITIVE);
    let mut upper_sq = None;
    for margin in [1e-13, 1e-11, 1e-9, 1e-6, 1e-3] {
        let mu = from_f64(base * (1.0 + margin));
        if mu >= trace {
            break;
        }
        let mut shifted = gram.clone();
        for i in 0..n {
            shifted.set(i, i, &mu - gram.get(i, i));
            for j in 0..n {
                if i != j {
                    shifted.set(i, j, -gram.get(i, j).clone());
                }
            }
        }
        if shifted.is_positive_definite() {
            upper_sq = Some(mu);
            break;
        }
    }
    // λ_max ≤ trace(G) always holds for a positive semidefinite G.
    let upper_sq = upper_sq.unwrap_or(trace);
    Certified {
        lower: sqrt_enclosure(&rq).lower,
        upper: sqrt_enclosure(&upper_sq).upper,
    }
}

/// `Σ_j f_j ⊗ x_j` over a list of pairs.
pub fn sum_of_rank_ones<'a, I>(space: AmbientSpace, pairs: I) -> FiniteRankOperator
where
    I: IntoIterator<Item = (&'a CoefVector, &'a CoefVector)>,
{
    FiniteRankOperator::new(
        space,
        pairs
            .into_iter()
            .map(|(f, x)| RankOne {
                functional: f.clone(),
                vector: x.clone(),
            })
            .collect(),
    )
}

/// `q/m` as a scalar.
pub(crate) fn fraction(q: usize, m: usize) -> Scalar {
    ratio(q as i64, m as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix_op(space: AmbientSpace, rows: &[&[i64]]) -> FiniteRankOperator {
        // A = Σ_r e_r ⊗ (row r as functional)
        let mut a = FiniteRankOperator::zero(space);
        for (r, row) in rows.iter().enumerate() {
            let f = CoefVector::from_pairs(
                row.iter().enumerate().map(|(c, &v)| (c + 1, int(v))),
            );
            a.push(f, CoefVector::unit(r + 1));
        }
        a
    }

    #[test]
    fn identity_has_norm_one() {
        let id = FiniteRankOperator::coordinate_projection(AmbientSpace::L2, &[1, 2]);
        assert_eq!(operator_norm(&id).unwrap(), Certified::exact(int(1)));
    }

    #[test]
    fn rank_one_factorizes() {
        let f = CoefVector::from_ints(&[(1, 1), (2, 2)]);
        let x = CoefVector::from_ints(&[(1, 3), (3, -1)]);
        for sp in [AmbientSpace::L1, AmbientSpace::L2, AmbientSpace::Linf] {
            let a = FiniteRankOperator::rank_one(sp, f.clone(), x.clone());
            let n = operator_norm(&a).unwrap();
            let expected_sq = sp.dual_norm(&f).product(&sp.norm(&x)).squared_value();
            assert!(&n.lower * &n.lower <= expected_sq);
            assert!(&n.upper * &n.upper >= expected_sq);
        }
    }

    #[test]
    fn linf_row_sums() {
        // matrix [[1,1],[0,0]]; sign-vector brute force gives 2
        let a = matrix_op(AmbientSpace::Linf, &[&[1, 1], &[0, 0]]);
        assert_eq!(operator_norm(&a).unwrap(), Certified::exact(int(2)));
        let mut best = 0i64;
        for s1 in [-1i64, 1] {
            for s2 in [-1i64, 1] {
                best = best.max((s1 + s2).abs());
            }
        }
        assert_eq!(best, 2);
    }

    #[test]
    fn l2_enclosure_is_tight() {
        // [[1,1],[0,1]] has σ_max = golden ratio
        let a = matrix_op(AmbientSpace::L2, &[&[1, 1], &[0, 1]]);
        let n = operator_norm(&a).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(to_f64(&n.lower) <= phi + 1e-15 && to_f64(&n.upper) >= phi - 1e-15);
        assert!(to_f64(&n.width()) <= 1e-9 * phi);
    }

    #[test]
    fn mismatched_spaces_error() {
        let mut a = FiniteRankOperator::coordinate_projection(AmbientSpace::L2, &[1]);
        a.codomain = AmbientSpace::L1;
        assert!(matches!(operator_norm(&a), Err(FrameError::SpaceMismatch(_))));
    }
}
