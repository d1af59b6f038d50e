//! Finitely supported coefficient sequences indexed from 1.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::FrameError;
use crate::scalar::{bigint_from_json, bigint_to_json, format_scalar, int, Scalar};

/// Sorted `(index, value)` pairs; indices strictly increase and no stored
/// value is zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CoefVector {
    entries: Vec<(usize, Scalar)>,
}

impl CoefVector {
    pub fn zero() -> Self {
        CoefVector::default()
    }

    /// Builds a vector from arbitrary pairs; repeated indices are summed.
    ///
    /// Panics on index 0.
    pub fn from_pairs<I: IntoIterator<Item = (usize, Scalar)>>(pairs: I) -> Self {
        let mut entries: Vec<(usize, Scalar)> = pairs.into_iter().collect();
        assert!(entries.iter().all(|(i, _)| *i >= 1), "indices are 1-based");
        entries.sort_by_key(|(i, _)| *i);
        let mut out: Vec<(usize, Scalar)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match out.last_mut() {
                Some((j, w)) if *j == i => *w += v,
                _ => out.push((i, v)),
            }
        }
        out.retain(|(_, v)| !v.is_zero());
        CoefVector { entries: out }
    }

    pub fn from_ints(pairs: &[(usize, i64)]) -> Self {
        Self::from_pairs(pairs.iter().map(|&(i, v)| (i, int(v))))
    }

    /// `e_i`, the i-th unit vector (or coordinate functional).
    pub fn unit(i: usize) -> Self {
        Self::from_pairs([(i, int(1))])
    }

    pub fn entries(&self) -> &[(usize, Scalar)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Scalar)> + '_ {
        self.entries.iter().map(|(i, v)| (*i, v))
    }

    pub fn get(&self, i: usize) -> Scalar {
        match self.entries.binary_search_by_key(&i, |(j, _)| *j) {
            Ok(p) => self.entries[p].1.clone(),
            Err(_) => Scalar::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|(i, _)| *i)
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn min_index(&self) -> Option<usize> {
        self.entries.first().map(|(i, _)| *i)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|(i, _)| *i)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        CoefVector {
            entries: self.entries.iter().map(|(i, v)| (*i, v * c)).collect(),
        }
    }

    /// `self + c * other`, merging the sorted supports.
    pub fn add_scaled(&self, c: &Scalar, other: &CoefVector) -> Self {
        if c.is_zero() || other.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some((i, u)), Some((j, w))) => match i.cmp(j) {
                    Ordering::Less => {
                        out.push((*i, u.clone()));
                        a.next();
                    }
                    Ordering::Greater => {
                        out.push((*j, w * c));
                        b.next();
                    }
                    Ordering::Equal => {
                        let s = u + w * c;
                        if !s.is_zero() {
                            out.push((*i, s));
                        }
                        a.next();
                        b.next();
                    }
                },
                (Some((i, u)), None) => {
                    out.push((*i, u.clone()));
                    a.next();
                }
                (None, Some((j, w))) => {
                    out.push((*j, w * c));
                    b.next();
                }
                (None, None) => break,
            }
        }
        CoefVector { entries: out }
    }

    pub fn add(&self, other: &CoefVector) -> Self {
        self.add_scaled(&int(1), other)
    }

    pub fn sub(&self, other: &CoefVector) -> Self {
        self.add_scaled(&int(-1), other)
    }

    /// Coordinates with index in `[lo, hi]`.
    pub fn restrict(&self, lo: usize, hi: usize) -> Self {
        CoefVector {
            entries: self
                .entries
                .iter()
                .filter(|(i, _)| (lo..=hi).contains(i))
                .cloned()
                .collect(),
        }
    }

    /// Maximum absolute coefficient.
    pub fn sup_abs(&self) -> Scalar {
        self.entries
            .iter()
            .map(|(_, v)| v.abs())
            .max()
            .unwrap_or_else(Scalar::zero)
    }

    /// True when every index of `self` is smaller than every index of `other`.
    pub fn precedes(&self, other: &CoefVector) -> bool {
        match (self.max_index(), other.min_index()) {
            (Some(a), Some(b)) => a < b,
            _ => true,
        }
    }
}

impl fmt::Display for CoefVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(i, v)| format!("{}·e{}", format_scalar(v), i))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// JSON form: `[[index, numerator, denominator], ...]`.
impl Serialize for CoefVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let triples: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|(i, v)| {
                serde_json::Value::Array(vec![
                    serde_json::Value::from(*i),
                    bigint_to_json(v.numer()),
                    bigint_to_json(v.denom()),
                ])
            })
            .collect();
        triples.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoefVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Vec::<Vec<serde_json::Value>>::deserialize(d)?;
        parse_triples(&raw).map_err(serde::de::Error::custom)
    }
}

fn parse_triples(raw: &[Vec<serde_json::Value>]) -> Result<CoefVector, FrameError> {
    let mut pairs = Vec::with_capacity(raw.len());
    for t in raw {
        if t.len() != 3 {
            return Err(FrameError::Parse(format!(
                "expected [index, numerator, denominator], got {} items",
                t.len()
            )));
        }
        let idx = t[0]
            .as_u64()
            .filter(|&i| i >= 1)
            .ok_or_else(|| FrameError::Parse(format!("bad index {}", t[0])))?;
        let num = bigint_from_json(&t[1])?;
        let den = bigint_from_json(&t[2])?;
        if den.is_zero() {
            return Err(FrameError::Parse("zero denominator".into()));
        }
        pairs.push((idx as usize, Scalar::new(num, den)));
    }
    Ok(CoefVector::from_pairs(pairs))
}
