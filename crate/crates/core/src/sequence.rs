//! Arrival sequences and their observation-path counts `S_k`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of firms arriving in each period, `(n_1, ..., n_T)`, all `n_t >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct PeriodSequence(Vec<u32>);

impl PeriodSequence {
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidSequence("at least one period required".into()));
        }
        if let Some(t) = counts.iter().position(|&n| n == 0) {
            return Err(Error::InvalidSequence(format!(
                "period {} has no firms",
                t + 1
            )));
        }
        Ok(PeriodSequence(counts))
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn periods(&self) -> usize {
        self.0.len()
    }

    pub fn total_firms(&self) -> u64 {
        self.0.iter().map(|&n| n as u64).sum()
    }

    /// Firms in period `t` (1-based).
    pub fn count(&self, t: usize) -> u32 {
        self.0[t - 1]
    }

    /// Counts after period `t`, `(n_{t+1}, ..., n_T)`; empty for `t = T`.
    pub fn suffix(&self, t: usize) -> Result<&[u32]> {
        self.check_period(t)?;
        Ok(&self.0[t..])
    }

    /// Counts up to and including period `t`.
    pub fn prefix(&self, t: usize) -> Result<PeriodSequence> {
        self.check_period(t)?;
        Ok(PeriodSequence(self.0[..t].to_vec()))
    }

    /// This sequence followed by `suffix`.
    pub fn extend(&self, suffix: &[u32]) -> Result<PeriodSequence> {
        let mut counts = self.0.clone();
        counts.extend_from_slice(suffix);
        PeriodSequence::new(counts)
    }

    /// `prod_{s <= t} (1 + n_s)` as a float.
    pub fn prefix_product(&self, t: usize) -> f64 {
        self.0[..t].iter().map(|&n| 1.0 + n as f64).product()
    }

    fn check_period(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.0.len() {
            return Err(Error::BadPeriod {
                period: t,
                periods: self.0.len(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<u32>> for PeriodSequence {
    type Error = Error;
    fn try_from(v: Vec<u32>) -> Result<Self> {
        PeriodSequence::new(v)
    }
}

impl From<PeriodSequence> for Vec<u32> {
    fn from(s: PeriodSequence) -> Self {
        s.0
    }
}

/// Parses comma-separated counts; an empty string is an empty list.
pub fn parse_counts(s: &str) -> Result<Vec<u32>> {
    let s = s.trim().trim_start_matches('[').trim_end_matches(']').trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<u32>()
                .map_err(|e| Error::InvalidSequence(format!("{part:?}: {e}")))
        })
        .collect()
}

impl FromStr for PeriodSequence {
    type Err = Error;

    /// Accepts `"1,2,3"` or `"[1,2,3]"`.
    fn from_str(s: &str) -> Result<Self> {
        PeriodSequence::new(parse_counts(s)?)
    }
}

impl fmt::Display for PeriodSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `S_1, ..., S_T` for a sequence. `S_0 = 1` and `S_k = 0` beyond `T`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SMeasures(Vec<u64>);

impl SMeasures {
    /// Builds the measures period by period with
    /// `S_k(n + n_t) = S_k(n) + n_t S_{k-1}(n)`.
    pub fn of_counts(counts: &[u32]) -> Result<Self> {
        // levels[k] holds S_k, levels[0] = 1
        let mut levels = vec![1u64];
        for &n in counts {
            levels.push(0);
            for k in (1..levels.len()).rev() {
                let added = levels[k - 1]
                    .checked_mul(n as u64)
                    .ok_or(Error::Overflow { level: k })?;
                levels[k] = levels[k]
                    .checked_add(added)
                    .ok_or(Error::Overflow { level: k })?;
            }
        }
        levels.remove(0);
        Ok(SMeasures(levels))
    }

    /// `S_k` with the boundary conventions.
    pub fn get(&self, k: usize) -> u64 {
        match k {
            0 => 1,
            k if k <= self.0.len() => self.0[k - 1],
            _ => 0,
        }
    }

    pub fn values(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn s_measures(n: &PeriodSequence) -> Result<SMeasures> {
    SMeasures::of_counts(n.counts())
}

/// Measures of the remainder game after period `t`.
pub fn suffix_measures(n: &PeriodSequence, t: usize) -> Result<SMeasures> {
    SMeasures::of_counts(n.suffix(t)?)
}

/// Whether `1 + sum S_k = prod (1 + n_k)` holds exactly in 128-bit arithmetic.
pub fn product_identity_check(n: &PeriodSequence) -> bool {
    let Ok(s) = s_measures(n) else {
        return false;
    };
    let lhs = s
        .values()
        .iter()
        .try_fold(1u128, |acc, &v| acc.checked_add(v as u128));
    let rhs = n
        .counts()
        .iter()
        .try_fold(1u128, |acc, &v| acc.checked_mul(1 + v as u128));
    matches!((lhs, rhs), (Some(l), Some(r)) if l == r)
}
