//! Second-eigenvalue estimates for regular graphs and the mixing inequality
//! `|e(A,B) - d|A||B|/n| <= lambda sqrt(|A||B|)`.

use num_traits::Float;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::rng::splitmix64;
use crate::scalar::Scalar;
use crate::verdict::{Mode, Verdict};

/// Iteration cap for each power-iteration run.
pub const MAX_ITERATIONS: usize = 10_000;
/// Relative change in the Rayleigh quotient that counts as converged.
pub const TOLERANCE: f64 = 1e-12;
/// Largest `n` for which [`mixing_lemma_check`] enumerates all pairs.
pub const MIXING_EXACT_CAP: usize = 16;

fn regular(g: &Graph) -> Result<usize> {
    g.regular_degree().ok_or(Error::NotRegular)
}

/// `max(|lambda_2|, |lambda_n|)` of the adjacency matrix of a regular graph.
///
/// Two power iterations on the complement of the all-ones vector: one on
/// `A + dI` (top eigenvalue `lambda_2 + d`) and one on `dI - A` (top
/// eigenvalue `d - lambda_n`). Both operators are positive semidefinite, so
/// the Rayleigh quotient converges monotonically from below.
pub fn estimate_lambda<F: Float>(g: &Graph) -> Result<F> {
    let d = regular(g)?;
    let n = g.n();
    if n <= 1 || d == 0 {
        return Ok(F::zero());
    }
    let df = F::from(d).unwrap();
    let top2 = top_on_complement(g, |ax, x| ax + df * x);
    let bottom = top_on_complement(g, |ax, x| df * x - ax);
    let l2 = top2 - df;
    let ln = df - bottom;
    Ok(l2.abs().max(ln.abs()))
}

fn project_out_ones<F: Float>(x: &mut [F]) {
    let n = F::from(x.len()).unwrap();
    let mean = x.iter().fold(F::zero(), |a, &b| a + b) / n;
    for v in x.iter_mut() {
        *v = *v - mean;
    }
}

fn normalize<F: Float>(x: &mut [F]) -> F {
    let norm = x.iter().fold(F::zero(), |a, &b| a + b * b).sqrt();
    if norm > F::zero() {
        for v in x.iter_mut() {
            *v = *v / norm;
        }
    }
    norm
}

fn top_on_complement<F: Float>(g: &Graph, op: impl Fn(F, F) -> F) -> F {
    let n = g.n();
    // Fixed pseudo-random start so results do not depend on caller state.
    let mut x: Vec<F> = (0..n)
        .map(|i| F::from((splitmix64(i as u64) >> 11) as f64 / (1u64 << 53) as f64 - 0.5).unwrap())
        .collect();
    project_out_ones(&mut x);
    normalize(&mut x);
    let mut y = vec![F::zero(); n];
    let mut rq = F::zero();
    let tol = F::from(TOLERANCE).unwrap();
    for _ in 0..MAX_ITERATIONS {
        for v in 0..n {
            let ax = g.neighbors(v).iter().fold(F::zero(), |a, &w| a + x[w]);
            y[v] = op(ax, x[v]);
        }
        let next = x.iter().zip(&y).fold(F::zero(), |a, (&xi, &yi)| a + xi * yi);
        project_out_ones(&mut y);
        if normalize(&mut y) == F::zero() {
            return next;
        }
        std::mem::swap(&mut x, &mut y);
        let done = (next - rq).abs() <= tol * next.abs().max(F::one());
        rq = next;
        if done {
            break;
        }
    }
    rq
}

/// A pair of disjoint sets violating the mixing inequality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixingWitness {
    pub a: Vec<Vertex>,
    pub b: Vec<Vertex>,
    pub edges: u64,
}

pub type MixingVerdict = Verdict<MixingWitness>;

/// Exact test of the inequality for given counts, by squaring:
/// `(e n - d a b)^2 <= lambda^2 a b n^2`.
pub fn mixing_violated<S: Scalar>(n: usize, d: usize, lambda: &S, a: usize, b: usize, e: u64) -> bool {
    let lhs = (e as i128 * n as i128 - (d * a * b) as i128).unsigned_abs() as u64;
    let lhs = S::from_count(lhs);
    let rhs = lambda.clone() * lambda.clone() * S::from_count((a * b) as u64) * S::from_count((n * n) as u64);
    lhs.clone() * lhs > rhs
}

/// Checks the mixing inequality for all disjoint non-empty pairs when
/// `n <= MIXING_EXACT_CAP`, otherwise on `samples` random pairs (sizes
/// uniform in `1..=n/2`).
pub fn mixing_lemma_check<S: Scalar, R: Rng + ?Sized>(
    g: &Graph,
    d: usize,
    lambda: &S,
    samples: u64,
    rng: &mut R,
) -> Result<MixingVerdict> {
    let deg = regular(g)?;
    if deg != d && g.n() > 0 {
        return Err(Error::param(format!("graph is {deg}-regular, not {d}-regular")));
    }
    if g.n() <= MIXING_EXACT_CAP {
        Ok(mixing_exact(g, d, lambda))
    } else {
        Ok(mixing_sampled(g, d, lambda, samples, rng))
    }
}

fn mixing_exact<S: Scalar>(g: &Graph, d: usize, lambda: &S) -> MixingVerdict {
    let n = g.n();
    let full: u32 = (1u32 << n) - 1;
    let mut checked = 0u64;
    let mut cnt = vec![0u32; n];
    for am in 1..=full {
        for (v, c) in cnt.iter_mut().enumerate() {
            *c = g.neighbors(v).iter().filter(|&&w| am >> w & 1 == 1).count() as u32;
        }
        let rest = full & !am;
        let mut bm = rest;
        while bm != 0 {
            checked += 1;
            let mut e = 0u64;
            let mut r = bm;
            while r != 0 {
                let v = r.trailing_zeros() as usize;
                r &= r - 1;
                e += cnt[v] as u64;
            }
            let (a, b) = (am.count_ones() as usize, bm.count_ones() as usize);
            if mixing_violated(n, d, lambda, a, b, e) {
                let bits = |m: u32| (0..n).filter(|&i| m >> i & 1 == 1).collect();
                return Verdict::fail(
                    Mode::Exact,
                    checked,
                    MixingWitness {
                        a: bits(am),
                        b: bits(bm),
                        edges: e,
                    },
                );
            }
            bm = (bm - 1) & rest;
        }
    }
    Verdict::pass(Mode::Exact, checked)
}

fn mixing_sampled<S: Scalar, R: Rng + ?Sized>(
    g: &Graph,
    d: usize,
    lambda: &S,
    samples: u64,
    rng: &mut R,
) -> MixingVerdict {
    let n = g.n();
    let mut order: Vec<Vertex> = (0..n).collect();
    let mut checked = 0;
    for _ in 0..samples {
        let a = rng.random_range(1..=n / 2);
        let b = rng.random_range(1..=n / 2);
        order.shuffle(rng);
        let mut sa = order[..a].to_vec();
        let mut sb = order[a..a + b].to_vec();
        sa.sort_unstable();
        sb.sort_unstable();
        checked += 1;
        let e = crate::graph::count_pair_edges(g, &sa, &sb).expect("disjoint by construction") as u64;
        if mixing_violated(n, d, lambda, a, b, e) {
            return Verdict::fail(Mode::Sampled, checked, MixingWitness { a: sa, b: sb, edges: e });
        }
    }
    Verdict::pass(Mode::Sampled, checked)
}
