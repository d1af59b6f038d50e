//! Schauder frames `(x_i, f_i)` given coordinate-wise, with computable tail
//! certificates, and the partial-sum operators built from them.

mod builtin;
mod ops;
mod spec;

pub use builtin::{BuiltinFrame, CanonicalBasis, Example23, ExplicitFrame, ExplicitPair, PatchedFrame, TailOverride, TailTemplate};
pub use ops::{
    analysis, frame_constant, partial_reconstruction, shrinking_tail_bound, synthesis, Analysis,
    FrameConstant,
};
pub use spec::{FrameSpec, GeneratorSpec};

use num_traits::Zero;

use crate::scalar::{NormValue, Scalar};
use crate::space::{pair, AmbientSpace};
use crate::vector::CoefVector;

/// A Schauder frame whose generators can be queried one index at a time.
///
/// Indices are 1-based. A finite frame (`len() == Some(L)`) has no pairs past
/// `L`; callers clamp ranges with [`FrameProvider::clamp`].
pub trait FrameProvider: Send + Sync {
    fn space(&self) -> AmbientSpace;

    /// Number of pairs, `None` for an infinite frame.
    fn len(&self) -> Option<usize>;

    /// `x_i`.
    fn vector_at(&self, i: usize) -> CoefVector;

    /// `f_i`.
    fn functional_at(&self, i: usize) -> CoefVector;

    fn label(&self) -> String;

    /// `n*`: an index past which every `f_i(x)` vanishes, when known.
    fn analysis_horizon(&self, x: &CoefVector) -> Option<usize>;

    /// The indices `i` for which the term `f_j(x_i) f_i` can be nonzero, when
    /// that set is finite and known.
    fn coupling(&self, j: usize) -> Option<Vec<usize>>;

    /// Upper bound for `sup_{N≤m≤n} ‖P_[m,n] x‖`.
    fn coef_tail(&self, x: &CoefVector, n: usize) -> Option<Scalar> {
        exact_coef_tail(self, x, n)
    }

    /// Upper bound for `sup_{N≤m≤n} ‖f_j ∘ P_[m,n]‖ = ‖Σ_{i=m}^n f_j(x_i) f_i‖`.
    fn dual_tail(&self, j: usize, n: usize) -> Option<Scalar> {
        exact_dual_tail(self, j, n)
    }

    /// A certified global bound on the frame constant.
    fn frame_constant_bound(&self) -> Option<Scalar> {
        None
    }

    /// Largest index a schedule search may try.
    fn search_limit(&self) -> usize {
        4096
    }

    fn clamp(&self, n: usize) -> usize {
        match self.len() {
            Some(l) => n.min(l),
            None => n,
        }
    }
}

impl<T: FrameProvider + ?Sized> FrameProvider for Box<T> {
    fn space(&self) -> AmbientSpace {
        (**self).space()
    }
    fn len(&self) -> Option<usize> {
        (**self).len()
    }
    fn vector_at(&self, i: usize) -> CoefVector {
        (**self).vector_at(i)
    }
    fn functional_at(&self, i: usize) -> CoefVector {
        (**self).functional_at(i)
    }
    fn label(&self) -> String {
        (**self).label()
    }
    fn analysis_horizon(&self, x: &CoefVector) -> Option<usize> {
        (**self).analysis_horizon(x)
    }
    fn coupling(&self, j: usize) -> Option<Vec<usize>> {
        (**self).coupling(j)
    }
    fn coef_tail(&self, x: &CoefVector, n: usize) -> Option<Scalar> {
        (**self).coef_tail(x, n)
    }
    fn dual_tail(&self, j: usize, n: usize) -> Option<Scalar> {
        (**self).dual_tail(j, n)
    }
    fn frame_constant_bound(&self) -> Option<Scalar> {
        (**self).frame_constant_bound()
    }
    fn search_limit(&self) -> usize {
        (**self).search_limit()
    }
}

/// Largest norm over sums of consecutive runs of `terms` (already in index
/// order). Runs are what distinct intervals select from a sparse list.
pub(crate) fn sup_over_runs(space: AmbientSpace, terms: &[CoefVector], dual: bool) -> NormValue {
    let eval = |v: &CoefVector| if dual { space.dual_norm(v) } else { space.norm(v) };
    let mut best = NormValue::zero(space.is_hilbert());
    for start in 0..terms.len() {
        let mut acc = CoefVector::zero();
        for t in &terms[start..] {
            acc = acc.add(t);
            best = best.max_of(eval(&acc));
        }
    }
    best
}

/// Tail of the reconstruction series of `x`, computed exactly from `n*`.
pub fn exact_coef_tail<F: FrameProvider + ?Sized>(frame: &F, x: &CoefVector, n: usize) -> Option<Scalar> {
    let top = frame.clamp(frame.analysis_horizon(x)?);
    let terms: Vec<CoefVector> = (n.max(1)..=top)
        .filter_map(|i| {
            let c = pair(&frame.functional_at(i), x);
            (!c.is_zero()).then(|| frame.vector_at(i).scale(&c))
        })
        .collect();
    Some(sup_over_runs(frame.space(), &terms, false).upper_rational())
}

/// `sup_{N≤m≤n} ‖Σ_{i=m}^n f_j(x_i) f_i‖_dual`, computed exactly from the
/// finite coupling set of `j`.
pub fn exact_dual_tail<F: FrameProvider + ?Sized>(frame: &F, j: usize, n: usize) -> Option<Scalar> {
    let fj = frame.functional_at(j);
    let terms: Vec<CoefVector> = frame
        .coupling(j)?
        .into_iter()
        .filter(|&i| i >= n)
        .filter_map(|i| {
            let c = pair(&fj, &frame.vector_at(i));
            (!c.is_zero()).then(|| frame.functional_at(i).scale(&c))
        })
        .collect();
    Some(sup_over_runs(frame.space(), &terms, true).upper_rational())
}

/// Coupling set of `j` by direct scan of a finite frame.
pub(crate) fn scan_coupling<F: FrameProvider + ?Sized>(frame: &F, j: usize, len: usize) -> Vec<usize> {
    let fj = frame.functional_at(j);
    (1..=len)
        .filter(|&i| !pair(&fj, &frame.vector_at(i)).is_zero() && !frame.functional_at(i).is_zero())
        .collect()
}
