//! Random host graphs and upper-uniformity verdicts.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::scalar::Scalar;
use crate::verdict::{binomial, Mode, Verdict};

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::param(format!("probability {p} outside [0, 1]")))
    }
}

/// Indices in `0..len` kept independently with probability `p`, drawn by
/// geometric skipping.
fn kept_indices<R: Rng + ?Sized>(len: usize, p: f64, rng: &mut R) -> Result<Vec<usize>> {
    check_probability(p)?;
    if p == 0.0 || len == 0 {
        return Ok(Vec::new());
    }
    if p == 1.0 {
        return Ok((0..len).collect());
    }
    let geo = Geometric::new(p).map_err(|e| Error::param(e.to_string()))?;
    let mut out = Vec::with_capacity(((len as f64) * p * 1.1) as usize + 8);
    let mut i: u64 = 0;
    loop {
        i = i.saturating_add(geo.sample(rng));
        if i >= len as u64 {
            return Ok(out);
        }
        out.push(i as usize);
        i += 1;
    }
}

/// Erdős–Rényi `G(n, p)`.
pub fn sample_gnp<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    let total = n * n.saturating_sub(1) / 2;
    let idx = kept_indices(total, p, rng)?;
    // Pairs are indexed lexicographically: (0,1), (0,2), .., (1,2), ..
    let mut edges = Vec::with_capacity(idx.len());
    let (mut u, mut row_start) = (0usize, 0usize);
    for i in idx {
        while i >= row_start + (n - 1 - u) {
            row_start += n - 1 - u;
            u += 1;
        }
        edges.push((u, u + 1 + (i - row_start)));
    }
    Graph::from_edges(n, edges)
}

/// `G(p)`: keep each edge of `g` independently with probability `p`.
///
/// Edges are visited in lexicographic order, so on `K_n` this consumes the
/// random stream exactly like [`sample_gnp`] and returns the same graph.
pub fn keep_each_edge<R: Rng + ?Sized>(g: &Graph, p: f64, rng: &mut R) -> Result<Graph> {
    let edges: Vec<_> = g.edges().collect();
    let idx = kept_indices(edges.len(), p, rng)?;
    Graph::from_edges(g.n(), idx.into_iter().map(|i| edges[i]))
}

/// A violated instance of the upper-uniformity inequality.
///
/// For the pair form `w` is non-empty and `edges = e(U, W)`; for the induced
/// form `w` is empty and `edges = e(G[U])`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformityWitness {
    pub u: Vec<Vertex>,
    pub w: Vec<Vertex>,
    pub edges: u64,
}

pub type UniformityVerdict = Verdict<UniformityWitness>;

/// Which inequality to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UniformityForm {
    /// `e(U, W) <= (1 + eta) p |U| |W|` for disjoint `|U|, |W| >= eta n`.
    Pair,
    /// `e(G[U]) <= (1 + eta) p C(|U|, 2)` for `|U| >= 2 eta n`.
    Induced,
}

/// Re-evaluates the inequality on a witness. Returns `true` when violated.
pub fn witness_violates<S: Scalar>(g: &Graph, p: &S, eta: &S, wit: &UniformityWitness) -> bool {
    let slack = S::one() + eta.clone();
    if wit.w.is_empty() {
        let mut inside = vec![false; g.n()];
        for &v in &wit.u {
            inside[v] = true;
        }
        let e: u64 = wit
            .u
            .iter()
            .map(|&v| g.neighbors(v).iter().filter(|&&x| inside[x] && x > v).count() as u64)
            .sum();
        let k = wit.u.len() as u64;
        let pairs = S::from_count(k * k.saturating_sub(1) / 2);
        S::from_count(e) > slack * p.clone() * pairs
    } else {
        let e = crate::graph::count_pair_edges(g, &wit.u, &wit.w).map(|e| e as u64);
        match e {
            Ok(e) => {
                let prod = S::from_count(wit.u.len() as u64 * wit.w.len() as u64);
                S::from_count(e) > slack * p.clone() * prod
            }
            Err(_) => false,
        }
    }
}

/// Minimum set size `max(1, ceil(factor * eta * n))`.
fn min_size<S: Scalar>(eta: &S, factor: u64, n: usize) -> usize {
    let s = (eta.clone() * S::from_count(factor * n as u64)).ceil_to_u64();
    (s.max(1)) as usize
}

/// Number of unordered qualifying instances for exact enumeration.
pub fn qualifying_count<S: Scalar>(n: usize, eta: &S, form: UniformityForm) -> u128 {
    let n64 = n as u64;
    match form {
        UniformityForm::Pair => {
            let s = min_size(eta, 1, n) as u64;
            let mut total: u128 = 0;
            for a in s..=n64 {
                for b in s..=n64.saturating_sub(a) {
                    let t = binomial(n64, a).saturating_mul(binomial(n64 - a, b));
                    total = total.saturating_add(t);
                }
            }
            total / 2
        }
        UniformityForm::Induced => {
            let s = min_size(eta, 2, n) as u64;
            (s.max(2)..=n64).fold(0u128, |acc, k| acc.saturating_add(binomial(n64, k)))
        }
    }
}

/// Checks `(p, eta)`-upper-uniformity.
///
/// Exact mode enumerates every qualifying instance and fails with
/// [`Error::BudgetExceeded`] if there are more than `budget`. Sampled mode
/// draws `budget` instances: sizes uniform in `[ceil(eta n), max(that, n/2)]`
/// (doubled lower bound for the induced form) and vertex sets from a uniform
/// shuffle. Sampled passes are evidence only.
pub fn check_upper_uniform<S: Scalar, R: Rng + ?Sized>(
    g: &Graph,
    p: &S,
    eta: &S,
    form: UniformityForm,
    mode: Mode,
    budget: u64,
    rng: &mut R,
) -> Result<UniformityVerdict> {
    if *p < S::zero() || *eta < S::zero() {
        return Err(Error::param("p and eta must be non-negative"));
    }
    match mode {
        Mode::Exact => {
            let needed = qualifying_count(g.n(), eta, form);
            if needed > budget as u128 || g.n() > 30 {
                return Err(Error::BudgetExceeded {
                    needed,
                    budget: budget as u128,
                });
            }
            Ok(match form {
                UniformityForm::Pair => exact_pair(g, p, eta),
                UniformityForm::Induced => exact_induced(g, p, eta),
            })
        }
        Mode::Sampled => Ok(sampled(g, p, eta, form, budget, rng)),
    }
}

fn bits(mask: u32) -> Vec<Vertex> {
    (0..32).filter(|&i| mask >> i & 1 == 1).collect()
}

fn exact_pair<S: Scalar>(g: &Graph, p: &S, eta: &S) -> UniformityVerdict {
    let n = g.n();
    let s = min_size(eta, 1, n) as u32;
    let nb: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w))
        .collect();
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let slack = S::one() + eta.clone();
    let mut checked = 0u64;
    for um in 1..=full {
        if um.count_ones() < s {
            continue;
        }
        let low_u = um.trailing_zeros();
        let rest = full & !um;
        // W ranges over subsets of `rest` whose lowest vertex exceeds U's.
        let rest = rest & !((1u32 << low_u) - 1);
        let mut wm = rest;
        while wm != 0 {
            if wm.count_ones() >= s {
                checked += 1;
                let mut e = 0u64;
                let mut r = wm;
                while r != 0 {
                    let v = r.trailing_zeros() as usize;
                    r &= r - 1;
                    e += (nb[v] & um).count_ones() as u64;
                }
                let prod = (um.count_ones() * wm.count_ones()) as u64;
                if S::from_count(e) > slack.clone() * p.clone() * S::from_count(prod) {
                    return Verdict::fail(
                        Mode::Exact,
                        checked,
                        UniformityWitness {
                            u: bits(um),
                            w: bits(wm),
                            edges: e,
                        },
                    );
                }
            }
            wm = (wm - 1) & rest;
        }
    }
    Verdict::pass(Mode::Exact, checked)
}

fn exact_induced<S: Scalar>(g: &Graph, p: &S, eta: &S) -> UniformityVerdict {
    let n = g.n();
    let s = min_size(eta, 2, n).max(2) as u32;
    let nb: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w))
        .collect();
    let slack = S::one() + eta.clone();
    let mut checked = 0u64;
    let full: u64 = 1u64 << n;
    for um in 1..full {
        let um = um as u32;
        let k = um.count_ones();
        if k < s {
            continue;
        }
        checked += 1;
        let mut twice = 0u64;
        let mut r = um;
        while r != 0 {
            let v = r.trailing_zeros() as usize;
            r &= r - 1;
            twice += (nb[v] & um).count_ones() as u64;
        }
        let e = twice / 2;
        let pairs = (k as u64) * (k as u64 - 1) / 2;
        if S::from_count(e) > slack.clone() * p.clone() * S::from_count(pairs) {
            return Verdict::fail(
                Mode::Exact,
                checked,
                UniformityWitness {
                    u: bits(um),
                    w: Vec::new(),
                    edges: e,
                },
            );
        }
    }
    Verdict::pass(Mode::Exact, checked)
}

fn sampled<S: Scalar, R: Rng + ?Sized>(
    g: &Graph,
    p: &S,
    eta: &S,
    form: UniformityForm,
    budget: u64,
    rng: &mut R,
) -> UniformityVerdict {
    let n = g.n();
    let mut order: Vec<Vertex> = (0..n).collect();
    let mut checked = 0;
    match form {
        UniformityForm::Pair => {
            let s = min_size(eta, 1, n);
            if 2 * s > n {
                return Verdict::pass(Mode::Sampled, 0);
            }
            let hi = (n / 2).max(s);
            for _ in 0..budget {
                let a = rng.random_range(s..=hi);
                let b = rng.random_range(s..=hi.min(n - a));
                order.shuffle(rng);
                let mut u = order[..a].to_vec();
                let mut w = order[a..a + b].to_vec();
                u.sort_unstable();
                w.sort_unstable();
                checked += 1;
                let e = crate::graph::count_pair_edges(g, &u, &w).expect("disjoint by construction");
                let wit = UniformityWitness { u, w, edges: e as u64 };
                if witness_violates(g, p, eta, &wit) {
                    return Verdict::fail(Mode::Sampled, checked, wit);
                }
            }
        }
        UniformityForm::Induced => {
            let s = min_size(eta, 2, n).max(2);
            if s > n {
                return Verdict::pass(Mode::Sampled, 0);
            }
            let hi = (n / 2).max(s);
            for _ in 0..budget {
                let a = rng.random_range(s..=hi);
                order.shuffle(rng);
                let mut u = order[..a].to_vec();
                u.sort_unstable();
                checked += 1;
                let mut wit = UniformityWitness {
                    u,
                    w: Vec::new(),
                    edges: 0,
                };
                let inside = crate::graph::mask(n, &wit.u);
                wit.edges = wit
                    .u
                    .iter()
                    .map(|&v| g.neighbors(v).iter().filter(|&&x| inside[x] && x > v).count() as u64)
                    .sum();
                if witness_violates(g, p, eta, &wit) {
                    return Verdict::fail(Mode::Sampled, checked, wit);
                }
            }
        }
    }
    Verdict::pass(Mode::Sampled, checked)
}

/// Maximum number of restarts in [`random_regular`].
pub const REGULAR_RESTARTS: usize = 200;

/// Random `d`-regular simple graph on `n` vertices.
///
/// Configuration model with local rejection: stubs are paired two at a time
/// uniformly among the unpaired ones, and a draw that would create a loop or a
/// repeated edge is discarded. If the remaining stubs admit no valid pair the
/// whole pairing restarts. The output is close to, but not exactly, uniform.
pub fn random_regular<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Graph> {
    if (n * d) % 2 == 1 {
        return Err(Error::param(format!("n*d must be even (n={n}, d={d})")));
    }
    if d >= n && !(n == 0 && d == 0) {
        return Err(Error::param(format!("degree {d} needs more than {n} vertices")));
    }
    'restart: for _ in 0..REGULAR_RESTARTS {
        let mut stubs: Vec<Vertex> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        let mut adj: Vec<Vec<Vertex>> = vec![Vec::with_capacity(d); n];
        let mut edges = Vec::with_capacity(n * d / 2);
        while !stubs.is_empty() {
            let len = stubs.len();
            let mut placed = false;
            for _ in 0..(50 + 4 * len) {
                let i = rng.random_range(0..len);
                let j = rng.random_range(0..len);
                let (u, v) = (stubs[i], stubs[j]);
                if i == j || u == v || adj[u].contains(&v) {
                    continue;
                }
                adj[u].push(v);
                adj[v].push(u);
                edges.push((u.min(v), u.max(v)));
                let (hi, lo) = (i.max(j), i.min(j));
                stubs.swap_remove(hi);
                stubs.swap_remove(lo);
                placed = true;
                break;
            }
            if !placed {
                continue 'restart;
            }
        }
        return Graph::from_edges(n, edges);
    }
    Err(Error::Stage {
        stage: "random-regular".into(),
        detail: format!("no simple pairing after {REGULAR_RESTARTS} restarts; retry with a new stream"),
    })
}
