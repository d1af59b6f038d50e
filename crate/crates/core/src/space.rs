//! The concrete sequence spaces ℓ1, ℓ2 and ℓ∞ (the latter standing in for c0
//! on finitely supported vectors).

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::FrameError;
use crate::scalar::{NormValue, Scalar};
use crate::vector::CoefVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AmbientSpace {
    L1,
    L2,
    #[serde(rename = "LINF", alias = "C0")]
    Linf,
}

impl AmbientSpace {
    /// Space whose norm is dual to this one on finitely supported vectors.
    pub fn dual(self) -> AmbientSpace {
        match self {
            AmbientSpace::L1 => AmbientSpace::Linf,
            AmbientSpace::L2 => AmbientSpace::L2,
            AmbientSpace::Linf => AmbientSpace::L1,
        }
    }

    pub fn norm(self, v: &CoefVector) -> NormValue {
        match self {
            AmbientSpace::L1 => {
                NormValue::plain(v.iter().map(|(_, a)| a.abs()).fold(Scalar::zero(), |s, a| s + a))
            }
            AmbientSpace::L2 => {
                NormValue::from_squared(v.iter().map(|(_, a)| a * a).fold(Scalar::zero(), |s, a| s + a))
            }
            AmbientSpace::Linf => NormValue::plain(v.sup_abs()),
        }
    }

    /// Norm of `f` as a functional on this space.
    pub fn dual_norm(self, f: &CoefVector) -> NormValue {
        self.dual().norm(f)
    }

    pub fn is_hilbert(self) -> bool {
        self == AmbientSpace::L2
    }
}

impl fmt::Display for AmbientSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AmbientSpace::L1 => "L1",
            AmbientSpace::L2 => "L2",
            AmbientSpace::Linf => "LINF",
        })
    }
}

impl FromStr for AmbientSpace {
    type Err = FrameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "L1" | "ELL1" => Ok(AmbientSpace::L1),
            "L2" | "ELL2" => Ok(AmbientSpace::L2),
            "LINF" | "C0" | "ELLINF" => Ok(AmbientSpace::Linf),
            other => Err(FrameError::Parse(format!("unknown space {other:?}"))),
        }
    }
}

/// Norm of `v` in `sp`.
pub fn ambient_norm(v: &CoefVector, sp: AmbientSpace) -> NormValue {
    sp.norm(v)
}

/// The duality pairing `f(x)`: sum of products over the common support.
pub fn pair(f: &CoefVector, x: &CoefVector) -> Scalar {
    let (fe, xe) = (f.entries(), x.entries());
    let (mut i, mut j) = (0, 0);
    let mut s = Scalar::zero();
    while i < fe.len() && j < xe.len() {
        match fe[i].0.cmp(&xe[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                s += &fe[i].1 * &xe[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn closed_form_norms() {
        assert_eq!(ambient_norm(&CoefVector::unit(1), AmbientSpace::L2).exact(), Some(int(1)));
        let ones = CoefVector::from_ints(&[(1, 1), (2, 1)]);
        assert_eq!(ambient_norm(&ones, AmbientSpace::L1).exact(), Some(int(2)));
        let v = CoefVector::from_ints(&[(1, 3), (2, 4)]);
        assert_eq!(ambient_norm(&v, AmbientSpace::L2).exact(), Some(int(5)));
        assert_eq!(ambient_norm(&v, AmbientSpace::Linf).exact(), Some(int(4)));
        assert_eq!(AmbientSpace::L1.dual_norm(&v).exact(), Some(int(4)));
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(pair(&CoefVector::unit(1), &CoefVector::unit(1)), int(1));
        assert_eq!(pair(&CoefVector::unit(1), &CoefVector::unit(2)), int(0));
        let f = CoefVector::from_ints(&[(1, 1), (2, 2)]);
        let x = CoefVector::from_ints(&[(1, 3), (2, -1)]);
        assert_eq!(pair(&f, &x), int(1));
    }

    #[test]
    fn parses_space_names() {
        assert_eq!("linf".parse::<AmbientSpace>().unwrap(), AmbientSpace::Linf);
        assert_eq!("c0".parse::<AmbientSpace>().unwrap(), AmbientSpace::Linf);
        assert!("l3".parse::<AmbientSpace>().is_err());
        let s: AmbientSpace = serde_json::from_str("\"LINF\"").unwrap();
        assert_eq!(s, AmbientSpace::Linf);
    }
}
