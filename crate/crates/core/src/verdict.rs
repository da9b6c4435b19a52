//! Shared verdict shape for exhaustive-or-sampled property checks.

use serde::{Deserialize, Serialize};

/// How a verdict was reached. Sampled verdicts are evidence, not proofs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    Sampled,
}

impl std::str::FromStr for Mode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Mode::Exact),
            "sampled" => Ok(Mode::Sampled),
            other => Err(crate::Error::param(format!("unknown mode {other:?}"))),
        }
    }
}

/// Outcome of checking a universally quantified property. A witness, when
/// present, is an exactly verified counterexample regardless of the mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict<W> {
    pub holds: bool,
    pub mode: Mode,
    /// Number of instances examined.
    pub checked: u64,
    pub witness: Option<W>,
}

impl<W> Verdict<W> {
    pub fn pass(mode: Mode, checked: u64) -> Self {
        Self {
            holds: true,
            mode,
            checked,
            witness: None,
        }
    }

    pub fn fail(mode: Mode, checked: u64, witness: W) -> Self {
        Self {
            holds: false,
            mode,
            checked,
            witness: Some(witness),
        }
    }
}

/// `C(n, k)` saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Lexicographic k-subsets of `0..n`, as index vectors.
pub(crate) struct Combinations {
    n: usize,
    idx: Vec<usize>,
    first: bool,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            idx: (0..k).collect(),
            first: k <= n,
        }
    }

    /// Advances to the next subset; returns `None` when exhausted.
    pub(crate) fn next_subset(&mut self) -> Option<&[usize]> {
        if self.first {
            self.first = false;
            return Some(&self.idx);
        }
        let k = self.idx.len();
        if k > self.n {
            return None;
        }
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                return Some(&self.idx);
            }
        }
        None
    }
}
