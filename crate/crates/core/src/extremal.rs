//! Closed-form extremal functions for cycles and paths, the matching
//! extremal constructions, and the random-overlay lower bound for
//! `ex(G, C_t)`.
//!
//! All values are exact. A fraction of `C(n, 2)` is stored as its absolute
//! edge count over `C(n, 2)`, unreduced, so thresholds compare as integers.

use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::RngStream;
use crate::Rational;

pub fn binom2(n: usize) -> u128 {
    let n = n as u128;
    n * n.saturating_sub(1) / 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(t: usize) -> Self {
        if t.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// Which closed-form branch produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// Two cliques sharing a vertex, `t >= (n+3)/2`.
    TwoCliques,
    /// Balanced complete bipartite graph.
    Bipartite,
    /// Path threshold `floor(n(t-1)/2) + 1`.
    PathBound,
    /// Short even cycles, `t < gamma n`.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremalQuery {
    pub n: usize,
    pub t: usize,
    pub gamma: Rational,
}

impl ExtremalQuery {
    pub fn new(n: usize, t: usize, gamma: Rational) -> Result<Self> {
        if t < 3 || t > n {
            return Err(Error::param(format!("need 3 <= t <= n, got t = {t}, n = {n}")));
        }
        if gamma <= Rational::from_integer(0) || gamma >= Rational::from_integer(1) {
            return Err(Error::param(format!("need 0 < gamma < 1, got {gamma}")));
        }
        Ok(Self { n, t, gamma })
    }

    pub fn parity(&self) -> Parity {
        Parity::of(self.t)
    }
}

/// `numerator / C(n, 2)`, with `numerator` the absolute edge count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremalValue {
    pub numerator: u128,
    pub denominator: u128,
    pub branch: Branch,
}

impl ExtremalValue {
    pub fn absolute(&self) -> u128 {
        self.numerator
    }

    pub fn as_rational(&self) -> Rational {
        Rational::new(self.numerator as i128, self.denominator as i128)
    }

    pub fn as_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

/// `2t >= n + 3`, i.e. `t >= (n+3)/2` with the tie included.
#[inline]
pub fn in_two_clique_regime(t: usize, n: usize) -> bool {
    2 * t >= n + 3
}

fn two_clique_edges(n: usize, t: usize) -> u128 {
    binom2(t - 1) + binom2(n - t + 2)
}

fn bipartite_edges(n: usize) -> u128 {
    (n as u128 * n as u128) / 4
}

fn check_cycle_range(t: usize, n: usize) -> Result<()> {
    if n < 3 || t < 3 || t > n {
        return Err(Error::param(format!("need 3 <= t <= n, got t = {t}, n = {n}")));
    }
    Ok(())
}

/// The odd/even extremal fraction `g^gamma(t, n)`.
pub fn g_function(q: &ExtremalQuery) -> ExtremalValue {
    let (n, t) = (q.n, q.t);
    let denominator = binom2(n);
    let (numerator, branch) = if in_two_clique_regime(t, n) {
        (two_clique_edges(n, t) + 1, Branch::TwoCliques)
    } else if t % 2 == 1 {
        (bipartite_edges(n) + 1, Branch::Bipartite)
    } else if Rational::from_integer(t as i128) < q.gamma * Rational::from_integer(n as i128) {
        (0, Branch::Zero)
    } else {
        (eg_path_bound(t, n) + 1, Branch::PathBound)
    };
    ExtremalValue {
        numerator,
        denominator,
        branch,
    }
}

/// Woodall's threshold `w(t, n)`: at least this fraction of `C(n, 2)` edges
/// forces cycles of every length `3..=t`.
pub fn woodall_threshold(t: usize, n: usize) -> Result<ExtremalValue> {
    check_cycle_range(t, n)?;
    let (numerator, branch) = if in_two_clique_regime(t, n) {
        (two_clique_edges(n, t) + 1, Branch::TwoCliques)
    } else {
        (bipartite_edges(n) + 1, Branch::Bipartite)
    };
    Ok(ExtremalValue {
        numerator,
        denominator: binom2(n),
        branch,
    })
}

/// More than this many edges force a path with `t` edges.
pub fn eg_path_bound(t: usize, n: usize) -> u128 {
    (t.saturating_sub(1) as u128 * n as u128) / 2
}

/// More than this many edges force a cycle of length at least `t`.
pub fn eg_cycle_bound(t: usize, n: usize) -> u128 {
    (n.saturating_sub(1) as u128 * t.saturating_sub(1) as u128) / 2
}

/// Two cliques of orders `t-1` and `n-t+2` sharing vertex `t-2`.
pub fn build_woodall_graph(n: usize, t: usize) -> Result<Graph> {
    check_cycle_range(t, n)?;
    if !in_two_clique_regime(t, n) {
        return Err(Error::param(format!("need t >= (n+3)/2, got t = {t}, n = {n}")));
    }
    let first = 0..t - 1;
    let second = t - 2..n;
    let mut edges = Vec::new();
    for u in first.clone() {
        for v in u + 1..first.end {
            edges.push((u, v));
        }
    }
    for u in second.clone() {
        for v in u + 1..second.end {
            edges.push((u, v));
        }
    }
    Graph::from_edges(n, edges)
}

/// `K_{floor(n/2), ceil(n/2)}`.
pub fn build_bipartite_extremal(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::param("need n >= 2"));
    }
    Ok(Graph::complete_bipartite(n / 2, n - n / 2))
}

/// `floor(n/t)` disjoint copies of `K_t` plus a clique on the remaining
/// vertices.
pub fn build_clique_blocks(n: usize, t: usize) -> Result<Graph> {
    if t == 0 || t > n {
        return Err(Error::param(format!("need 1 <= t <= n, got t = {t}, n = {n}")));
    }
    let mut edges = Vec::new();
    let mut start = 0;
    while start < n {
        let end = (start + t).min(n);
        for u in start..end {
            for v in u + 1..end {
                edges.push((u, v));
            }
        }
        start = end;
    }
    Graph::from_edges(n, edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Construction {
    TwoCliques,
    Bipartite,
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Construction::TwoCliques => "two-cliques",
            Construction::Bipartite => "bipartite",
        })
    }
}

/// The explicit `C_t`-free construction for `(n, t)`, when one is known:
/// two cliques for `t >= (n+3)/2`, the balanced complete bipartite graph for
/// smaller odd `t`.
pub fn extremal_example(n: usize, t: usize) -> Result<(Construction, Graph)> {
    check_cycle_range(t, n)?;
    if in_two_clique_regime(t, n) {
        Ok((Construction::TwoCliques, build_woodall_graph(n, t)?))
    } else if t % 2 == 1 {
        Ok((Construction::Bipartite, build_bipartite_extremal(n)?))
    } else {
        Err(Error::param(format!(
            "no explicit extremal construction for even t = {t} < (n+3)/2 with n = {n}"
        )))
    }
}

/// Edge count of [`extremal_example`], from the closed form.
pub fn ex_cycle_construction_edges(n: usize, t: usize) -> Result<usize> {
    check_cycle_range(t, n)?;
    if in_two_clique_regime(t, n) {
        Ok(two_clique_edges(n, t) as usize)
    } else if t % 2 == 1 {
        Ok(bipartite_edges(n) as usize)
    } else {
        Err(Error::param(format!("no explicit construction for even t = {t} < (n+3)/2")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OverlayResult {
    #[serde(skip)]
    pub subgraph: Graph,
    pub kept: usize,
    pub host_edges: usize,
    pub extremal_edges: usize,
    pub construction: Construction,
    /// `ceil(ex * e(G) / C(n, 2))`.
    pub bound: u128,
    pub bound_met: bool,
    pub trials: usize,
}

/// Best of `trials` uniformly random placements of the extremal example
/// intersected with `g`. The result is `C_t`-free because the placed
/// construction is.
pub fn overlay_lower_bound(g: &Graph, t: usize, trials: usize, rng: RngStream) -> Result<OverlayResult> {
    let n = g.n();
    let (construction, template) = extremal_example(n, t)?;
    let template_edges: Vec<_> = template.edges().collect();
    let mut r = rng.rng();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<(usize, Vec<usize>)> = None;
    for _ in 0..trials.max(1) {
        perm.shuffle(&mut r);
        let kept = template_edges
            .iter()
            .filter(|&&(u, v)| g.has_edge(perm[u], perm[v]))
            .count();
        if best.as_ref().is_none_or(|(k, _)| kept > *k) {
            best = Some((kept, perm.clone()));
        }
    }
    let (kept, sigma) = best.expect("at least one trial");
    let subgraph = Graph::from_edges(
        n,
        template_edges
            .iter()
            .map(|&(u, v)| (sigma[u], sigma[v]))
            .filter(|&(u, v)| g.has_edge(u, v)),
    )?;
    let ex = template_edges.len() as u128;
    let host_edges = g.edge_count();
    let c = binom2(n);
    let bound = (ex * host_edges as u128).div_ceil(c);
    Ok(OverlayResult {
        subgraph,
        kept,
        host_edges,
        extremal_edges: template_edges.len(),
        construction,
        bound,
        bound_met: kept as u128 >= bound,
        trials: trials.max(1),
    })
}

/// One CSV row for the `extremal` subcommand:
/// `n,t,parity,g_num,g_den,w_num,w_den,eg_path,eg_cycle`.
pub fn csv_row(q: &ExtremalQuery) -> Result<String> {
    let g = g_function(q);
    let w = woodall_threshold(q.t, q.n)?;
    Ok(format!(
        "{},{},{},{},{},{},{},{},{}",
        q.n,
        q.t,
        q.parity(),
        g.numerator,
        g.denominator,
        w.numerator,
        w.denominator,
        eg_path_bound(q.t, q.n),
        eg_cycle_bound(q.t, q.n)
    ))
}

pub const CSV_HEADER: &str = "n,t,parity,g_num,g_den,w_num,w_den,eg_path,eg_cycle";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn q(n: usize, t: usize, gamma: (i128, i128)) -> ExtremalQuery {
        ExtremalQuery::new(n, t, Rational::new(gamma.0, gamma.1)).unwrap()
    }

    fn frac(v: ExtremalValue) -> (u128, u128) {
        (v.numerator, v.denominator)
    }

    #[test]
    fn g_function_examples() {
        assert_eq!(frac(g_function(&q(10, 7, (1, 10)))), (26, 45));
        assert_eq!(frac(g_function(&q(20, 5, (1, 10)))), (101, 190));
        let zero = g_function(&q(20, 6, (1, 2)));
        assert_eq!((zero.numerator, zero.branch), (0, Branch::Zero));
        assert_eq!(frac(g_function(&q(20, 10, (1, 4)))), (91, 190));
    }

    #[test]
    fn query_validation() {
        assert!(ExtremalQuery::new(10, 2, Rational::new(1, 2)).is_err());
        assert!(ExtremalQuery::new(10, 11, Rational::new(1, 2)).is_err());
        assert!(ExtremalQuery::new(10, 5, Rational::from_integer(1)).is_err());
        assert!(ExtremalQuery::new(10, 5, Rational::from_integer(0)).is_err());
    }

    #[test]
    fn tie_at_half_is_inclusive() {
        // n = 11: (n+3)/2 = 7 exactly.
        assert_eq!(g_function(&q(11, 7, (1, 10))).branch, Branch::TwoCliques);
        assert_eq!(g_function(&q(11, 6, (1, 10))).branch, Branch::PathBound);
    }

    #[test]
    fn woodall_examples() {
        assert_eq!(frac(woodall_threshold(8, 12).unwrap()), (37, 66));
        let w = woodall_threshold(5, 20).unwrap();
        assert_eq!(frac(w), (101, 190));
        assert_eq!(w, g_function(&q(20, 5, (1, 3))));
        for n in 3..60 {
            for t in (3..=n).step_by(2) {
                let w = woodall_threshold(t, n).unwrap();
                assert!(2 * w.numerator > w.denominator, "n={n} t={t}");
            }
        }
        assert!(woodall_threshold(2, 5).is_err());
    }

    #[test]
    fn erdos_gallai_examples() {
        assert_eq!(eg_path_bound(3, 10), 10);
        assert_eq!(eg_path_bound(1, 7), 0);
        assert_eq!(eg_path_bound(6, 6), 15);
        assert_eq!(eg_cycle_bound(4, 6), 7);
        assert_eq!(eg_cycle_bound(3, 5), 4);
        assert_eq!(eg_cycle_bound(9, 9), 32);
    }

    #[test]
    fn woodall_graph_examples() {
        let g = build_woodall_graph(12, 8).unwrap();
        assert_eq!(g.edge_count(), 36);
        assert_eq!(oracle::longest_cycle_exact(&g).unwrap(), 7);
        let g = build_woodall_graph(5, 4).unwrap();
        assert_eq!(g.edge_count(), 6);
        assert_eq!(oracle::longest_cycle_exact(&g).unwrap(), 3);
        let g = build_woodall_graph(7, 7).unwrap();
        assert_eq!(g.degree(6), 1);
        assert!(!oracle::has_cycle_of_length(&g, 7).unwrap());
        assert!(build_woodall_graph(10, 6).is_err());
    }

    #[test]
    fn other_constructions() {
        let k34 = build_bipartite_extremal(7).unwrap();
        assert_eq!(k34.edge_count(), 12);
        assert!(oracle::cycle_spectrum_exact(&k34).unwrap().shortest_odd().is_none());
        let c4 = build_bipartite_extremal(4).unwrap();
        assert_eq!(c4.edge_count(), 4);
        assert_eq!(c4.regular_degree(), Some(2));
        assert!(c4.is_connected());
        let blocks = build_clique_blocks(9, 3).unwrap();
        assert_eq!(blocks.edge_count(), 9);
        assert_eq!(oracle::cycle_spectrum_exact(&blocks).unwrap().longest_path, 2);
        assert!(build_clique_blocks(3, 4).is_err());
    }

    #[test]
    fn overlay_on_trivial_hosts() {
        let r = overlay_lower_bound(&Graph::complete(10), 7, 3, RngStream::new(1, 0)).unwrap();
        assert_eq!(r.kept, r.extremal_edges);
        assert_eq!(r.bound, r.extremal_edges as u128);
        assert!(r.bound_met);
        let r = overlay_lower_bound(&Graph::empty(10), 7, 3, RngStream::new(1, 0)).unwrap();
        assert_eq!((r.kept, r.bound), (0, 0));
        assert!(r.bound_met);
        assert!(overlay_lower_bound(&Graph::complete(10), 4, 3, RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn csv_row_format() {
        assert_eq!(csv_row(&q(10, 7, (1, 10))).unwrap(), "10,7,odd,26,45,26,45,30,27");
    }
}
