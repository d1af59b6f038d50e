use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FrameProvider;
use crate::error::{FrameError, Result};
use crate::linalg::RMatrix;
use crate::operator::{operator_norm, FiniteRankOperator, RankOne};
use crate::scalar::{opt_scalar_serde, scalar_serde, Certified, Scalar};
use crate::space::pair;
use crate::vector::CoefVector;

fn check_interval(m: usize, n: usize) -> Result<()> {
    if m < 1 || m > n {
        return Err(FrameError::EmptyInterval { m, n });
    }
    Ok(())
}

/// `P_[m,n] x = Σ_{i=m}^n f_i(x) x_i`.
pub fn partial_reconstruction<F: FrameProvider + ?Sized>(
    frame: &F,
    m: usize,
    n: usize,
    x: &CoefVector,
) -> Result<CoefVector> {
    check_interval(m, n)?;
    let mut top = frame.clamp(n);
    if let Some(h) = frame.analysis_horizon(x) {
        top = top.min(h);
    }
    let mut out = CoefVector::zero();
    for i in m..=top {
        let c = pair(&frame.functional_at(i), x);
        if !c.is_zero() {
            out = out.add_scaled(&c, &frame.vector_at(i));
        }
    }
    Ok(out)
}

/// `S_[m,n] a = Σ_{i=m}^n a_i x_i`.
pub fn synthesis<F: FrameProvider + ?Sized>(
    frame: &F,
    m: usize,
    n: usize,
    a: &CoefVector,
) -> Result<CoefVector> {
    check_interval(m, n)?;
    if let (Some(len), Some(top)) = (frame.len(), a.max_index()) {
        if top > len {
            return Err(FrameError::BeyondFrame { index: top, len });
        }
    }
    Ok(a.iter()
        .filter(|(i, _)| (m..=n).contains(i))
        .fold(CoefVector::zero(), |acc, (i, c)| {
            acc.add_scaled(c, &frame.vector_at(i))
        }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    /// `(f_i(x))_{i ≤ n}`.
    pub coefficients: CoefVector,
    /// Index past which every coefficient vanishes, when the frame knows it.
    pub vanishes_after: Option<usize>,
}

/// Truncated analysis operator `x ↦ (f_i(x))_{i=1}^n`.
pub fn analysis<F: FrameProvider + ?Sized>(frame: &F, x: &CoefVector, n: usize) -> Analysis {
    let star = frame.analysis_horizon(x);
    let top = frame.clamp(star.map_or(n, |s| s.min(n)));
    let coefficients =
        CoefVector::from_pairs((1..=top).map(|i| (i, pair(&frame.functional_at(i), x))));
    Analysis {
        coefficients,
        vanishes_after: star,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameConstant {
    pub horizon: usize,
    /// Certified lower bound: max over boxed intervals of the lower end of
    /// the enclosure of `‖P_[m,n]‖`.
    #[serde(with = "scalar_serde")]
    pub lower: Scalar,
    /// Enclosure of the norm attaining `lower`.
    pub attaining_norm: Certified,
    pub attaining_interval: Option<(usize, usize)>,
    /// Certified upper bound for the frame constant, when available.
    #[serde(with = "opt_scalar_serde")]
    pub certified_upper: Option<Scalar>,
}

/// Lower estimate of the frame constant `sup_{m≤n} ‖P_[m,n]‖` from all
/// intervals in `[1, H]`, with functionals restricted to coordinates `[1, H]`.
pub fn frame_constant<F: FrameProvider + ?Sized>(frame: &F, horizon: usize) -> Result<FrameConstant> {
    let h = frame.clamp(horizon.max(1));
    let space = frame.space();
    let gens: Vec<(CoefVector, CoefVector)> = (1..=h)
        .map(|i| (frame.functional_at(i).restrict(1, horizon), frame.vector_at(i)))
        .collect();
    let per_start: Vec<Result<Vec<(usize, usize, Certified)>>> = (1..=h)
        .into_par_iter()
        .map(|m| {
            let mut op = FiniteRankOperator::zero(space);
            let mut out = Vec::new();
            for n in m..=h {
                let (f, x) = &gens[n - 1];
                if !f.is_zero() && !x.is_zero() {
                    op.terms.push(RankOne {
                        functional: f.clone(),
                        vector: x.clone(),
                    });
                }
                out.push((m, n, operator_norm(&op)?));
            }
            Ok(out)
        })
        .collect();
    let mut best: Option<(usize, usize, Certified)> = None;
    let mut max_upper = Scalar::zero();
    for row in per_start {
        for (m, n, c) in row? {
            if c.upper > max_upper {
                max_upper = c.upper.clone();
            }
            if best.as_ref().is_none_or(|b| c.lower > b.2.lower) {
                best = Some((m, n, c));
            }
        }
    }
    let (interval, attaining_norm) = match best {
        Some((m, n, c)) => (Some((m, n)), c),
        None => (None, Certified::exact(Scalar::zero())),
    };
    // A finite frame fully inside the box has no intervals outside it.
    let covers_all = frame.len().is_some_and(|l| l <= horizon)
        && (1..=h).all(|i| frame.functional_at(i).max_index().is_none_or(|t| t <= horizon));
    let certified_upper = frame
        .frame_constant_bound()
        .or_else(|| covers_all.then_some(max_upper));
    Ok(FrameConstant {
        horizon,
        lower: attaining_norm.lower.clone(),
        attaining_norm,
        attaining_interval: interval,
        certified_upper,
    })
}

/// Certified upper bound for `‖f ∘ P_[N,∞)‖`.
///
/// `f` is expanded as `Σ c_j f_j` over the frame functionals (earliest
/// pivots, free coefficients zero) and the bound is `Σ |c_j| dual_tail(j, N)`.
pub fn shrinking_tail_bound<F: FrameProvider + ?Sized>(
    frame: &F,
    f: &CoefVector,
    n: usize,
) -> Result<Scalar> {
    if n < 1 {
        return Err(FrameError::Precondition("N must be at least 1".into()));
    }
    if frame.dual_tail(1, n).is_none() {
        return Err(FrameError::NoShrinkingCertificate);
    }
    if f.is_zero() {
        return Ok(Scalar::zero());
    }
    let coeffs = expand_functional(frame, f)?;
    let mut bound = Scalar::zero();
    for (j, c) in coeffs {
        let t = frame.dual_tail(j, n).ok_or(FrameError::NoShrinkingCertificate)?;
        bound += c.abs() * t;
    }
    Ok(bound)
}

/// Coefficients `c_j` with `f = Σ c_j f_j`, searching growing prefixes of
/// the functional list.
pub(crate) fn expand_functional<F: FrameProvider + ?Sized>(
    frame: &F,
    f: &CoefVector,
) -> Result<Vec<(usize, Scalar)>> {
    let top = f.max_index().unwrap_or(1);
    let limit = frame.clamp(frame.search_limit().max(4 * top + 8));
    let mut horizon = frame.clamp(2 * top + 2);
    loop {
        let funcs: Vec<CoefVector> = (1..=horizon).map(|j| frame.functional_at(j)).collect();
        let mut coords: Vec<usize> = funcs
            .iter()
            .flat_map(|g| g.support())
            .chain(f.support())
            .collect();
        coords.sort_unstable();
        coords.dedup();
        let mut a = RMatrix::zeros(coords.len(), horizon);
        for (j, g) in funcs.iter().enumerate() {
            for (c, v) in g.iter() {
                let r = coords.binary_search(&c).unwrap();
                a.set(r, j, v.clone());
            }
        }
        let b: Vec<Scalar> = coords.iter().map(|&c| f.get(c)).collect();
        if let Some(x) = a.solve(&b) {
            return Ok(x
                .into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(j, c)| (j + 1, c))
                .collect());
        }
        if horizon >= limit {
            return Err(FrameError::NotInFunctionalSpan { horizon });
        }
        horizon = frame.clamp((horizon * 2).min(limit));
    }
}
