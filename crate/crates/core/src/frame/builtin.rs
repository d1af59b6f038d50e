use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{scan_coupling, FrameProvider};
use crate::pelczynski::AssembledFrame;
use crate::scalar::{scalar_serde, Scalar};
use crate::space::{pair, AmbientSpace};
use crate::vector::CoefVector;

/// The unit vector basis `x_i = e_i`, `f_i = e_i*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CanonicalBasis(pub AmbientSpace);

impl FrameProvider for CanonicalBasis {
    fn space(&self) -> AmbientSpace {
        self.0
    }
    fn len(&self) -> Option<usize> {
        None
    }
    fn vector_at(&self, i: usize) -> CoefVector {
        CoefVector::unit(i)
    }
    fn functional_at(&self, i: usize) -> CoefVector {
        CoefVector::unit(i)
    }
    fn label(&self) -> String {
        format!("canonical basis of {}", self.0)
    }
    fn analysis_horizon(&self, x: &CoefVector) -> Option<usize> {
        Some(x.max_index().unwrap_or(0))
    }
    fn coupling(&self, j: usize) -> Option<Vec<usize>> {
        Some(vec![j])
    }
    fn frame_constant_bound(&self) -> Option<Scalar> {
        Some(Scalar::one())
    }
}

/// The redundant frame of ℓ2 whose odd vectors repeat `e_1`:
/// `x_1 = e_1, f_1 = e_1*`, and for `i ≥ 1`
/// `x_{2i} = e_{i+1}, f_{2i} = e_{i+1}*, x_{2i+1} = e_1, f_{2i+1} = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Example23;

impl FrameProvider for Example23 {
    fn space(&self) -> AmbientSpace {
        AmbientSpace::L2
    }
    fn len(&self) -> Option<usize> {
        None
    }
    fn vector_at(&self, i: usize) -> CoefVector {
        if i % 2 == 0 {
            CoefVector::unit(i / 2 + 1)
        } else {
            CoefVector::unit(1)
        }
    }
    fn functional_at(&self, i: usize) -> CoefVector {
        match i {
            1 => CoefVector::unit(1),
            i if i % 2 == 0 => CoefVector::unit(i / 2 + 1),
            _ => CoefVector::zero(),
        }
    }
    fn label(&self) -> String {
        "redundant ℓ2 frame with repeated e_1".into()
    }
    fn analysis_horizon(&self, x: &CoefVector) -> Option<usize> {
        // coordinate 1 is read by f_1, coordinate c ≥ 2 by f_{2c-2}
        Some(
            x.support()
                .map(|c| if c == 1 { 1 } else { 2 * c - 2 })
                .max()
                .unwrap_or(0),
        )
    }
    fn coupling(&self, j: usize) -> Option<Vec<usize>> {
        Some(match j {
            1 => vec![1],
            j if j % 2 == 0 => vec![j],
            _ => vec![],
        })
    }
    fn frame_constant_bound(&self) -> Option<Scalar> {
        // every P_[m,n] is a coordinate projection or zero
        Some(Scalar::one())
    }
}

/// A finite frame given by an explicit list of pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplicitFrame {
    pub space: AmbientSpace,
    pub pairs: Vec<ExplicitPair>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplicitPair {
    pub x: CoefVector,
    pub f: CoefVector,
}

impl FrameProvider for ExplicitFrame {
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
        format!("explicit frame of {} pairs in {}", self.pairs.len(), self.space)
    }
    fn analysis_horizon(&self, x: &CoefVector) -> Option<usize> {
        Some(
            self.pairs
                .iter()
                .rposition(|p| !pair(&p.f, x).is_zero())
                .map_or(0, |p| p + 1),
        )
    }
    fn coupling(&self, j: usize) -> Option<Vec<usize>> {
        Some(scan_coupling(self, j, self.pairs.len()))
    }
}

/// Closed-form tail certificate attached to a frame description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailTemplate {
    /// Computed exactly from the generators (finite coupling / `n*`).
    Exact,
    /// `c · ratio^N` (times `‖x‖` for coefficient tails).
    Geometric {
        #[serde(with = "scalar_serde")]
        c: Scalar,
        #[serde(with = "scalar_serde")]
        ratio: Scalar,
    },
    /// No certificate; only horizon-limited operations are available.
    None,
}

/// A frame with its tail certificates replaced by closed-form templates.
#[derive(Debug)]
pub struct TailOverride<F> {
    pub inner: F,
    pub coef_tail: TailTemplate,
    pub dual_tail: TailTemplate,
    pub constant: Option<Scalar>,
}

impl<F: FrameProvider> TailOverride<F> {
    pub fn new(inner: F, coef_tail: TailTemplate, dual_tail: TailTemplate) -> Self {
        TailOverride {
            inner,
            coef_tail,
            dual_tail,
            constant: None,
        }
    }
}

fn geometric(c: &Scalar, ratio: &Scalar, n: usize) -> Scalar {
    c * num_traits::pow(ratio.clone(), n)
}

impl<F: FrameProvider> FrameProvider for TailOverride<F> {
    fn space(&self) -> AmbientSpace {
        self.inner.space()
    }
    fn len(&self) -> Option<usize> {
        self.inner.len()
    }
    fn vector_at(&self, i: usize) -> CoefVector {
        self.inner.vector_at(i)
    }
    fn functional_at(&self, i: usize) -> CoefVector {
        self.inner.functional_at(i)
    }
    fn label(&self) -> String {
        self.inner.label()
    }
    fn analysis_horizon(&self, x: &CoefVector) -> Option<usize> {
        self.inner.analysis_horizon(x)
    }
    fn coupling(&self, j: usize) -> Option<Vec<usize>> {
        self.inner.coupling(j)
    }
    fn coef_tail(&self, x: &CoefVector, n: usize) -> Option<Scalar> {
        match &self.coef_tail {
            TailTemplate::Exact => self.inner.coef_tail(x, n),
            TailTemplate::Geometric { c, ratio } => {
                Some(geometric(c, ratio, n) * self.space().norm(x).upper_rational())
            }
            TailTemplate::None => None,
        }
    }
    fn dual_tail(&self, j: usize, n: usize) -> Option<Scalar> {
        match &self.dual_tail {
            TailTemplate::Exact => self.inner.dual_tail(j, n),
            TailTemplate::Geometric { c, ratio } => Some(geometric(c, ratio, n)),
            TailTemplate::None => None,
        }
    }
    fn frame_constant_bound(&self) -> Option<Scalar> {
        self.constant.clone().or_else(|| self.inner.frame_constant_bound())
    }
    fn search_limit(&self) -> usize {
        self.inner.search_limit()
    }
}

/// A frame with some generators replaced. Replacing generators voids the
/// inner frame's certificates and constant bound.
pub struct PatchedFrame<F> {
    pub inner: F,
    pub vectors: BTreeMap<usize, CoefVector>,
    pub functionals: BTreeMap<usize, CoefVector>,
}

impl<F: FrameProvider> PatchedFrame<F> {
    pub fn new(inner: F) -> Self {
        PatchedFrame {
            inner,
            vectors: BTreeMap::new(),
            functionals: BTreeMap::new(),
        }
    }

    pub fn with_vector(mut self, i: usize, x: CoefVector) -> Self {
        self.vectors.insert(i, x);
        self
    }

    pub fn with_functional(mut self, i: usize, f: CoefVector) -> Self {
        self.functionals.insert(i, f);
        self
    }
}

impl<F: FrameProvider> FrameProvider for PatchedFrame<F> {
    fn space(&self) -> AmbientSpace {
        self.inner.space()
    }
    fn len(&self) -> Option<usize> {
        self.inner.len()
    }
    fn vector_at(&self, i: usize) -> CoefVector {
        self.vectors.get(&i).cloned().unwrap_or_else(|| self.inner.vector_at(i))
    }
    fn functional_at(&self, i: usize) -> CoefVector {
        self.functionals
            .get(&i)
            .cloned()
            .unwrap_or_else(|| self.inner.functional_at(i))
    }
    fn label(&self) -> String {
        format!("patched {}", self.inner.label())
    }
    fn analysis_horizon(&self, x: &CoefVector) -> Option<usize> {
        let base = self.inner.analysis_horizon(x)?;
        let patched = self
            .functionals
            .iter()
            .filter(|(_, f)| !pair(f, x).is_zero())
            .map(|(i, _)| *i)
            .max()
            .unwrap_or(0);
        Some(base.max(patched))
    }
    fn coupling(&self, _j: usize) -> Option<Vec<usize>> {
        None
    }
    fn coef_tail(&self, _x: &CoefVector, _n: usize) -> Option<Scalar> {
        None
    }
    fn dual_tail(&self, _j: usize, _n: usize) -> Option<Scalar> {
        None
    }
}

/// The frames the tool knows how to build.
pub enum BuiltinFrame {
    CanonicalBasis(CanonicalBasis),
    Example23(Example23),
    PelczynskiAssembled(Box<AssembledFrame>),
    UserJson(Box<TailOverride<Box<dyn FrameProvider>>>),
}

macro_rules! delegate {
    ($self:ident, $f:ident ( $($arg:expr),* )) => {
        match $self {
            BuiltinFrame::CanonicalBasis(fr) => fr.$f($($arg),*),
            BuiltinFrame::Example23(fr) => fr.$f($($arg),*),
            BuiltinFrame::PelczynskiAssembled(fr) => fr.$f($($arg),*),
            BuiltinFrame::UserJson(fr) => fr.$f($($arg),*),
        }
    };
}

impl FrameProvider for BuiltinFrame {
    fn space(&self) -> AmbientSpace {
        delegate!(self, space())
    }
    fn len(&self) -> Option<usize> {
        delegate!(self, len())
    }
    fn vector_at(&self, i: usize) -> CoefVector {
        delegate!(self, vector_at(i))
    }
    fn functional_at(&self, i: usize) -> CoefVector {
        delegate!(self, functional_at(i))
    }
    fn label(&self) -> String {
        delegate!(self, label())
    }
    fn analysis_horizon(&self, x: &CoefVector) -> Option<usize> {
        delegate!(self, analysis_horizon(x))
    }
    fn coupling(&self, j: usize) -> Option<Vec<usize>> {
        delegate!(self, coupling(j))
    }
    fn coef_tail(&self, x: &CoefVector, n: usize) -> Option<Scalar> {
        delegate!(self, coef_tail(x, n))
    }
    fn dual_tail(&self, j: usize, n: usize) -> Option<Scalar> {
        delegate!(self, dual_tail(j, n))
    }
    fn frame_constant_bound(&self) -> Option<Scalar> {
        delegate!(self, frame_constant_bound())
    }
    fn search_limit(&self) -> usize {
        delegate!(self, search_limit())
    }
}
