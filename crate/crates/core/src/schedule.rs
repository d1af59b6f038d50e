//! Index schedules `N_1 < N_2 < …` and the certificates that justify them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::scalar::{scalar_serde, Scalar};

/// Per-`j` record of a tail certificate at `N_k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailRecord {
    pub j: usize,
    /// Rational upper bound for `‖x_j‖`.
    #[serde(with = "scalar_serde")]
    pub x_norm_upper: Scalar,
    /// `dual_tail(j, N_k)`.
    #[serde(with = "scalar_serde")]
    pub dual_tail: Scalar,
    /// `ε_k / (k ‖x_j‖)`; the stored tail is strictly below it.
    #[serde(with = "scalar_serde")]
    pub threshold: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleCertificate {
    pub k: usize,
    pub n_k: usize,
    #[serde(with = "scalar_serde")]
    pub epsilon: Scalar,
    pub records: Vec<TailRecord>,
}

/// A schedule given by an explicit prefix followed by `N_k = slope·k + offset`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NkSchedule {
    pub prefix: Vec<usize>,
    pub slope: u64,
    pub offset: i64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<ScheduleCertificate>,
}

impl NkSchedule {
    /// `N_k = slope·k + offset`.
    pub fn affine(slope: u64, offset: i64) -> Self {
        NkSchedule {
            prefix: Vec::new(),
            slope,
            offset,
            certificates: Vec::new(),
        }
    }

    /// `N_k = k + 1`.
    pub fn successor() -> Self {
        Self::affine(1, 1)
    }

    /// Explicit values, continued by steps of one.
    pub fn from_list(values: Vec<usize>) -> Self {
        let offset = values.last().map_or(1, |&l| l as i64 - values.len() as i64);
        NkSchedule {
            prefix: values,
            slope: 1,
            offset,
            certificates: Vec::new(),
        }
    }

    /// `N_k = n` for every `k`. Not increasing; only useful as a negative
    /// example for validation.
    pub fn constant(n: usize) -> Self {
        Self::affine(0, n as i64)
    }

    pub fn n(&self, k: usize) -> usize {
        assert!(k >= 1, "schedules are indexed from 1");
        if let Some(&v) = self.prefix.get(k - 1) {
            return v;
        }
        let v = self.slope as i64 * k as i64 + self.offset;
        v.max(1) as usize
    }

    pub fn is_strictly_increasing(&self) -> bool {
        if self.n(1) < 1 {
            return false;
        }
        let p = self.prefix.len();
        let prefix_ok = self.prefix.windows(2).all(|w| w[0] < w[1]);
        let rule_ok = self.slope >= 1 && self.slope as i64 * (p as i64 + 1) + self.offset >= 1;
        let join_ok = p == 0 || self.n(p + 1) > self.n(p);
        prefix_ok && rule_ok && join_ok
    }

    pub fn require_increasing(&self) -> Result<()> {
        if self.is_strictly_increasing() {
            Ok(())
        } else {
            Err(FrameError::InvalidSchedule(format!(
                "{self} is not strictly increasing"
            )))
        }
    }

    /// Every `k` with `N_k ≤ top`, in increasing order.
    pub fn ks_up_to(&self, top: usize) -> Vec<usize> {
        debug_assert!(self.is_strictly_increasing());
        (1..).take_while(|&k| self.n(k) <= top).collect()
    }

    /// `N_k + d` for every `k`.
    pub fn shifted(&self, d: usize) -> Self {
        NkSchedule {
            prefix: self.prefix.iter().map(|v| v + d).collect(),
            slope: self.slope,
            offset: self.offset + d as i64,
            certificates: Vec::new(),
        }
    }

    /// Coordinatewise `self ≥ other` on `1..=k_max`.
    pub fn dominates(&self, other: &NkSchedule, k_max: usize) -> bool {
        (1..=k_max).all(|k| self.n(k) >= other.n(k))
    }

    /// Reads either a template (`k+1`, `2k+3`, `2*k`, `3,5,8`) or a path to a
    /// JSON file holding a schedule (optionally under a `schedule` key).
    pub fn load(arg: &str) -> Result<Self> {
        if let Ok(s) = arg.parse() {
            return Ok(s);
        }
        let text = std::fs::read_to_string(arg)
            .map_err(|e| FrameError::Parse(format!("schedule {arg:?}: not a template, and {e}")))?;
        let v: serde_json::Value = serde_json::from_str(&text)?;
        let body = v.get("schedule").cloned().unwrap_or(v);
        Ok(serde_json::from_value(body)?)
    }
}

impl FromStr for NkSchedule {
    type Err = FrameError;

    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || FrameError::Parse(format!("unrecognised schedule template {s:?}"));
        if t.is_empty() {
            return Err(bad());
        }
        if t.chars().all(|c| c.is_ascii_digit() || c == ',') {
            let values = t
                .split(',')
                .map(|p| p.parse::<usize>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            return Ok(NkSchedule::from_list(values));
        }
        let kpos = t.find('k').ok_or_else(bad)?;
        let head = t[..kpos].trim_end_matches('*');
        let slope = if head.is_empty() {
            1
        } else {
            head.parse::<u64>().map_err(|_| bad())?
        };
        let tail = &t[kpos + 1..];
        let offset = if tail.is_empty() {
            0
        } else if let Some(r) = tail.strip_prefix('+') {
            r.parse::<i64>().map_err(|_| bad())?
        } else if let Some(r) = tail.strip_prefix('-') {
            -r.parse::<i64>().map_err(|_| bad())?
        } else {
            return Err(bad());
        };
        Ok(NkSchedule::affine(slope, offset))
    }
}

impl fmt::Display for NkSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.prefix {
            write!(f, "{v},")?;
        }
        let slope = match self.slope {
            1 => String::new(),
            s => s.to_string(),
        };
        match self.offset {
            0 => write!(f, "{slope}k"),
            o if o > 0 => write!(f, "{slope}k+{o}"),
            o => write!(f, "{slope}k{o}"),
        }
    }
}
