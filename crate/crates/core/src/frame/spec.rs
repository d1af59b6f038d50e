//! JSON description of a frame: generators plus tail-certificate templates.
//!
//! ```json
//! { "space": "L2",
//!   "generators": { "template": "example23" },
//!   "coef_tail": { "kind": "exact" },
//!   "dual_tail": { "kind": "geometric", "c": "1", "ratio": "1/2" },
//!   "frame_constant": "1" }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    BuiltinFrame, CanonicalBasis, Example23, ExplicitFrame, ExplicitPair, FrameProvider, TailOverride,
    TailTemplate,
};
use crate::error::{FrameError, Result};
use crate::operator::{FiniteRankOperator, RankOne};
use crate::pelczynski::assemble_bap_frame;
use crate::scalar::{opt_scalar_serde, Scalar};
use crate::space::AmbientSpace;
use crate::vector::CoefVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "template", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Canonical,
    Example23,
    Explicit {
        pairs: Vec<ExplicitPair>,
    },
    /// Frame assembled from a finite-rank operator prefix by splitting each
    /// operator into `m_k` rounds of rank-one pieces.
    Assembled {
        operators: Vec<Vec<RankOne>>,
        splits: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test_family: Option<Vec<CoefVector>>,
    },
}

fn exact_tail() -> TailTemplate {
    TailTemplate::Exact
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub space: AmbientSpace,
    pub generators: GeneratorSpec,
    #[serde(default = "exact_tail")]
    pub coef_tail: TailTemplate,
    #[serde(default = "exact_tail")]
    pub dual_tail: TailTemplate,
    #[serde(default, with = "opt_scalar_serde", skip_serializing_if = "Option::is_none")]
    pub frame_constant: Option<Scalar>,
}

impl FrameSpec {
    pub fn example23() -> Self {
        FrameSpec {
            space: AmbientSpace::L2,
            generators: GeneratorSpec::Example23,
            coef_tail: TailTemplate::Exact,
            dual_tail: TailTemplate::Exact,
            frame_constant: None,
        }
    }

    pub fn canonical(space: AmbientSpace) -> Self {
        FrameSpec {
            space,
            generators: GeneratorSpec::Canonical,
            coef_tail: TailTemplate::Exact,
            dual_tail: TailTemplate::Exact,
            frame_constant: None,
        }
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    fn plain(&self) -> bool {
        self.coef_tail == TailTemplate::Exact
            && self.dual_tail == TailTemplate::Exact
            && self.frame_constant.is_none()
    }

    pub fn build(&self) -> Result<BuiltinFrame> {
        let inner: Box<dyn FrameProvider> = match &self.generators {
            GeneratorSpec::Canonical => {
                if self.plain() {
                    return Ok(BuiltinFrame::CanonicalBasis(CanonicalBasis(self.space)));
                }
                Box::new(CanonicalBasis(self.space))
            }
            GeneratorSpec::Example23 => {
                if self.space != AmbientSpace::L2 {
                    return Err(FrameError::SpaceMismatch(
                        "the repeated-e_1 frame lives in L2".into(),
                    ));
                }
                if self.plain() {
                    return Ok(BuiltinFrame::Example23(Example23));
                }
                Box::new(Example23)
            }
            GeneratorSpec::Explicit { pairs } => {
                if let Some(p) = pairs.iter().position(|p| p.x.is_zero()) {
                    return Err(FrameError::ZeroFrameVector(p + 1));
                }
                Box::new(ExplicitFrame {
                    space: self.space,
                    pairs: pairs.clone(),
                })
            }
            GeneratorSpec::Assembled {
                operators,
                splits,
                test_family,
            } => {
                let ops: Vec<FiniteRankOperator> = operators
                    .iter()
                    .map(|t| FiniteRankOperator::new(self.space, t.clone()))
                    .collect();
                let frame = assemble_bap_frame(&ops, splits, test_family.clone())?;
                if self.plain() {
                    return Ok(BuiltinFrame::PelczynskiAssembled(Box::new(frame)));
                }
                Box::new(frame)
            }
        };
        let mut wrapped = TailOverride::new(inner, self.coef_tail.clone(), self.dual_tail.clone());
        wrapped.constant = self.frame_constant.clone();
        Ok(BuiltinFrame::UserJson(Box::new(wrapped)))
    }
}
