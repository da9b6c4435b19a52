//! p-densities, regular-pair and epsilon-property verdicts, cluster
//! partitions and the two auxiliary cluster graphs.
//!
//! Partitions are random near-equipartitions; regularity is measured, not
//! guaranteed.

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, Graph, Vertex};
use crate::rng::RngStream;
use crate::verdict::{binomial, Mode, Verdict};
use crate::Rational;

fn ceil_mul(eps: &Rational, m: usize) -> usize {
    let c = (*eps * Rational::from_integer(m as i128)).ceil().to_integer();
    c.max(1) as usize
}

fn check_disjoint(g: &Graph, u: &[Vertex], w: &[Vertex]) -> Result<Vec<bool>> {
    graph::check_vertices(g, u)?;
    graph::check_vertices(g, w)?;
    let wm = graph::mask(g.n(), w);
    if let Some(&v) = u.iter().find(|&&v| wm[v]) {
        return Err(Error::Overlap(v));
    }
    Ok(wm)
}

/// `d_{G,p}(U, W) = e(U, W) / (p |U| |W|)`.
pub fn p_density(g: &Graph, u: &[Vertex], w: &[Vertex], p: &Rational) -> Result<Rational> {
    if u.is_empty() || w.is_empty() {
        return Err(Error::param("p-density needs two non-empty sets"));
    }
    if *p <= Rational::zero() {
        return Err(Error::param("p must be positive"));
    }
    let e = graph::count_pair_edges(g, u, w)?;
    Ok(Rational::from_integer(e as i128) / (*p * Rational::from_integer((u.len() * w.len()) as i128)))
}

/// Subsets `U1 ⊆ V1`, `U2 ⊆ V2` of the threshold size spanning no edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmptyPairWitness {
    pub u1: Vec<Vertex>,
    pub u2: Vec<Vertex>,
}

impl EmptyPairWitness {
    /// Re-checks that the two sets are disjoint and span no edge.
    pub fn verify(&self, g: &Graph) -> bool {
        matches!(graph::count_pair_edges(g, &self.u1, &self.u2), Ok(0))
    }
}

pub type PropertyVerdict = Verdict<EmptyPairWitness>;

/// Number of subsets the exact epsilon-property check enumerates.
pub fn eps_property_cost(a: usize, b: usize, s: usize) -> u128 {
    binomial(a as u64, s as u64).min(binomial(b as u64, s as u64))
}

/// Threshold size `max(1, ceil(eps m))` of the epsilon-property.
pub fn eps_threshold(eps: &Rational, m: usize) -> usize {
    ceil_mul(eps, m)
}

/// Checks that every `U1 ⊆ V1`, `U2 ⊆ V2` with `|U1|, |U2| >= eps m` spans an
/// edge.
///
/// Only threshold-size sets are needed, since supersets of an edge-spanning
/// pair span edges. The property fails iff some `s`-set on the cheaper side
/// has at least `s` common non-neighbours on the other. Exact mode covers all
/// `C(|side|, s)` choices by a pruned depth-first search; sampled mode tests
/// `budget` random pairs of `s`-sets.
#[allow(clippy::too_many_arguments)]
pub fn check_eps_property<R: Rng + ?Sized>(
    g: &Graph,
    v1: &[Vertex],
    v2: &[Vertex],
    eps: &Rational,
    m: usize,
    mode: Mode,
    budget: u64,
    rng: &mut R,
) -> Result<PropertyVerdict> {
    check_disjoint(g, v1, v2)?;
    let s = eps_threshold(eps, m);
    if s > v1.len() || s > v2.len() {
        return Ok(Verdict::pass(mode, 0));
    }
    let swapped = binomial(v2.len() as u64, s as u64) < binomial(v1.len() as u64, s as u64);
    let (a, b) = if swapped { (v2, v1) } else { (v1, v2) };
    let witness = |mut sub: Vec<Vertex>, mut free: Vec<Vertex>| {
        sub.sort_unstable();
        free.sort_unstable();
        if swapped {
            EmptyPairWitness { u1: free, u2: sub }
        } else {
            EmptyPairWitness { u1: sub, u2: free }
        }
    };
    match mode {
        Mode::Exact => {
            let needed = binomial(a.len() as u64, s as u64);
            if needed > budget as u128 {
                return Err(Error::BudgetExceeded {
                    needed,
                    budget: budget as u128,
                });
            }
            // Depth-first over subsets of `a` in index order, keeping the
            // common non-neighbourhood in `b`; branches whose pool drops
            // below `s` cannot finish a witness.
            let mut adj = vec![false; g.n()];
            let non_nbrs = |x: Vertex, pool: &[Vertex], adj: &mut Vec<bool>| -> Vec<Vertex> {
                for &y in g.neighbors(x) {
                    adj[y] = true;
                }
                let out = pool.iter().copied().filter(|&y| !adj[y]).collect();
                for &y in g.neighbors(x) {
                    adj[y] = false;
                }
                out
            };
            let cands: Vec<Vertex> = a
                .iter()
                .copied()
                .filter(|&x| non_nbrs(x, b, &mut adj).len() >= s)
                .collect();
            let mut checked = 0u64;
            let mut stack: Vec<(usize, Vec<Vertex>)> = Vec::new();
            let mut chosen: Vec<Vertex> = Vec::new();
            let mut next = 0usize;
            let mut pool = b.to_vec();
            loop {
                if chosen.len() == s {
                    let free = pool[..s].to_vec();
                    return Ok(Verdict::fail(Mode::Exact, checked, witness(chosen, free)));
                }
                if next + (s - chosen.len()) <= cands.len() {
                    checked += 1;
                    let x = cands[next];
                    let p = non_nbrs(x, &pool, &mut adj);
                    if p.len() >= s {
                        stack.push((next, std::mem::replace(&mut pool, p)));
                        chosen.push(x);
                    }
                    next += 1;
                } else {
                    match stack.pop() {
                        Some((i, old)) => {
                            chosen.pop();
                            pool = old;
                            next = i + 1;
                        }
                        None => break,
                    }
                }
            }
            Ok(Verdict::pass(Mode::Exact, needed.min(u64::MAX as u128) as u64))
        }
        Mode::Sampled => {
            let mut pa = a.to_vec();
            let mut pb = b.to_vec();
            for checked in 1..=budget {
                let (x, _) = pa.partial_shuffle(rng, s);
                let x = x.to_vec();
                let (y, _) = pb.partial_shuffle(rng, s);
                let y = y.to_vec();
                let ym = graph::mask(g.n(), &y);
                if x.iter().all(|&u| g.neighbors(u).iter().all(|&w| !ym[w])) {
                    return Ok(Verdict::fail(Mode::Sampled, checked, witness(x, y)));
                }
            }
            Ok(Verdict::pass(Mode::Sampled, budget))
        }
    }
}

/// Sub-pair whose p-density deviates from the full pair by more than eps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrregularWitness {
    pub u: Vec<Vertex>,
    pub w: Vec<Vertex>,
    pub density: Rational,
    pub pair_density: Rational,
}

impl IrregularWitness {
    pub fn verify(&self, g: &Graph, full_u: &[Vertex], full_w: &[Vertex], eps: &Rational, p: &Rational) -> bool {
        let in_u = graph::mask(g.n(), full_u);
        let in_w = graph::mask(g.n(), full_w);
        if !self.u.iter().all(|&v| in_u[v]) || !self.w.iter().all(|&v| in_w[v]) {
            return false;
        }
        if Rational::from_integer(self.u.len() as i128) < *eps * Rational::from_integer(full_u.len() as i128)
            || Rational::from_integer(self.w.len() as i128) < *eps * Rational::from_integer(full_w.len() as i128)
        {
            return false;
        }
        match (p_density(g, &self.u, &self.w, p), p_density(g, full_u, full_w, p)) {
            (Ok(a), Ok(b)) => (a - b).abs() > *eps,
            _ => false,
        }
    }
}

pub type RegularityVerdict = Verdict<IrregularWitness>;

/// Largest side for which the exact regular-pair check is attempted.
pub const REGULAR_EXACT_SIDE_CAP: usize = 20;

/// Number of sub-pairs the exact regular-pair check enumerates.
pub fn eps_regular_cost(a: usize, b: usize, eps: &Rational) -> u128 {
    let side = |n: usize| {
        let s = ceil_mul(eps, n).min(n.max(1));
        (s..=n).fold(0u128, |acc, k| acc.saturating_add(binomial(n as u64, k as u64)))
    };
    side(a).saturating_mul(side(b))
}

/// Checks `|d(U', W') - d(U, W)| <= eps` for all `U' ⊆ U`, `W' ⊆ W` with
/// `|U'| >= eps |U|`, `|W'| >= eps |W|`.
///
/// Sampled mode draws sizes uniformly from the qualifying range; the first two
/// samples are the sub-pairs formed by the highest and lowest degree vertices
/// into the other side, which catches lopsided pairs quickly.
#[allow(clippy::too_many_arguments)]
pub fn check_eps_regular_pair<R: Rng + ?Sized>(
    g: &Graph,
    u: &[Vertex],
    w: &[Vertex],
    eps: &Rational,
    p: &Rational,
    mode: Mode,
    budget: u64,
    rng: &mut R,
) -> Result<RegularityVerdict> {
    let w_mask = check_disjoint(g, u, w)?;
    let full = p_density(g, u, w, p)?;
    let su = ceil_mul(eps, u.len()).min(u.len());
    let sw = ceil_mul(eps, w.len()).min(w.len());
    let u_mask = graph::mask(g.n(), u);
    let test = |su_: &[Vertex], sw_: &[Vertex]| -> Option<IrregularWitness> {
        let e = graph::count_pair_edges_masked(g, su_, &graph::mask(g.n(), sw_));
        let d = Rational::from_integer(e as i128) / (*p * Rational::from_integer((su_.len() * sw_.len()) as i128));
        ((d - full).abs() > *eps).then(|| {
            let (mut a, mut b) = (su_.to_vec(), sw_.to_vec());
            a.sort_unstable();
            b.sort_unstable();
            IrregularWitness {
                u: a,
                w: b,
                density: d,
                pair_density: full,
            }
        })
    };
    match mode {
        Mode::Exact => {
            let needed = eps_regular_cost(u.len(), w.len(), eps);
            if needed > budget as u128 || u.len() > REGULAR_EXACT_SIDE_CAP || w.len() > REGULAR_EXACT_SIDE_CAP {
                return Err(Error::BudgetExceeded {
                    needed,
                    budget: budget as u128,
                });
            }
            let subsets = |set: &[Vertex], s: usize| -> Vec<Vec<Vertex>> {
                let n = set.len();
                (1u32..(1u32 << n))
                    .filter(|m| m.count_ones() as usize >= s)
                    .map(|m| (0..n).filter(|&i| m >> i & 1 == 1).map(|i| set[i]).collect())
                    .collect()
            };
            let us = subsets(u, su);
            let ws = subsets(w, sw);
            let mut checked = 0;
            for a in &us {
                for b in &ws {
                    checked += 1;
                    if let Some(wit) = test(a, b) {
                        return Ok(Verdict::fail(Mode::Exact, checked, wit));
                    }
                }
            }
            Ok(Verdict::pass(Mode::Exact, checked))
        }
        Mode::Sampled => {
            let by_degree = |set: &[Vertex], other: &[bool]| {
                let mut v: Vec<(usize, Vertex)> = set
                    .iter()
                    .map(|&x| (g.neighbors(x).iter().filter(|&&y| other[y]).count(), x))
                    .collect();
                v.sort_unstable();
                v.into_iter().map(|(_, x)| x).collect::<Vec<_>>()
            };
            let u_sorted = by_degree(u, &w_mask);
            let w_sorted = by_degree(w, &u_mask);
            let mut checked = 0;
            if budget >= 1 {
                checked += 1;
                let a = &u_sorted[u.len() - su..];
                let b = &w_sorted[w.len() - sw..];
                if let Some(wit) = test(a, b) {
                    return Ok(Verdict::fail(Mode::Sampled, checked, wit));
                }
            }
            if budget >= 2 {
                checked += 1;
                if let Some(wit) = test(&u_sorted[..su], &w_sorted[..sw]) {
                    return Ok(Verdict::fail(Mode::Sampled, checked, wit));
                }
            }
            let (mut pu, mut pw) = (u.to_vec(), w.to_vec());
            while checked < budget {
                checked += 1;
                let a = rng.random_range(su..=u.len());
                let b = rng.random_range(sw..=w.len());
                let (sa, _) = pu.partial_shuffle(rng, a);
                let sa = sa.to_vec();
                let (sb, _) = pw.partial_shuffle(rng, b);
                if let Some(wit) = test(&sa, sb) {
                    return Ok(Verdict::fail(Mode::Sampled, checked, wit));
                }
            }
            Ok(Verdict::pass(Mode::Sampled, checked))
        }
    }
}

/// Near-equipartition `(V_1, .., V_k)` of `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterPartition {
    pub assignment: Vec<usize>,
    pub k: usize,
    pub sizes: Vec<usize>,
}

impl ClusterPartition {
    pub fn from_assignment(assignment: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("a partition needs at least one cluster"));
        }
        let mut sizes = vec![0; k];
        for &c in &assignment {
            if c >= k {
                return Err(Error::param(format!("cluster index {c} out of range for k={k}")));
            }
            sizes[c] += 1;
        }
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        if hi - lo > 1 {
            return Err(Error::param(format!("cluster sizes range from {lo} to {hi}")));
        }
        Ok(Self { assignment, k, sizes })
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    /// Smallest cluster size, `floor(n / k)`.
    pub fn m(&self) -> usize {
        self.sizes.iter().copied().min().unwrap_or(0)
    }

    /// Sorted vertex lists, one per cluster.
    pub fn clusters(&self) -> Vec<Vec<Vertex>> {
        let mut out = vec![Vec::new(); self.k];
        for (v, &c) in self.assignment.iter().enumerate() {
            out[c].push(v);
        }
        out
    }
}

/// Uniformly random near-equipartition of `0..n` into `k` clusters.
pub fn equipartition<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<ClusterPartition> {
    if k == 0 || k > n {
        return Err(Error::param(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let mut order: Vec<Vertex> = (0..n).collect();
    order.shuffle(rng);
    let mut assignment = vec![0; n];
    for (pos, &v) in order.iter().enumerate() {
        assignment[v] = pos % k;
    }
    ClusterPartition::from_assignment(assignment, k)
}

/// How pair verdicts are obtained when building cluster graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    Exact,
    Sampled,
    /// Exact whenever the pair fits the budget, sampled otherwise.
    Auto,
}

impl std::str::FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Policy::Exact),
            "sampled" => Ok(Policy::Sampled),
            "auto" => Ok(Policy::Auto),
            other => Err(Error::param(format!("unknown verdict policy {other:?}"))),
        }
    }
}

/// Mode recorded on a cluster graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphMode {
    Exact,
    Sampled,
    /// Some pairs exact, some sampled.
    Mixed,
    /// Edges copied from a reduced graph.
    DerivedFromR,
}

impl GraphMode {
    fn of(modes: impl Iterator<Item = Mode>) -> Self {
        let (mut ex, mut sa) = (false, false);
        for m in modes {
            match m {
                Mode::Exact => ex = true,
                Mode::Sampled => sa = true,
            }
        }
        match (ex, sa) {
            (true, true) => GraphMode::Mixed,
            (false, true) => GraphMode::Sampled,
            _ => GraphMode::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord<W> {
    pub i: usize,
    pub j: usize,
    pub verdict: Verdict<W>,
}

/// Graph on clusters whose edges are pairs with the epsilon-property.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsilonGraph {
    pub k: usize,
    pub edges: Vec<(usize, usize)>,
    pub epsilon: Rational,
    pub mode: GraphMode,
    pub pairs: Vec<PairRecord<EmptyPairWitness>>,
}

impl EpsilonGraph {
    pub fn to_graph(&self) -> Graph {
        Graph::from_edges(self.k, self.edges.iter().copied()).expect("cluster pairs are distinct")
    }
}

fn all_pairs(k: usize) -> Vec<(usize, usize)> {
    (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect()
}

/// Limits for pair verdicts: `exact` caps the enumeration size of an exact
/// check, `samples` is the number of random sub-pairs a sampled check tries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub exact: u64,
    pub samples: u64,
}

impl Budget {
    pub const DEFAULT_SAMPLES: u64 = 16;

    pub fn new(exact: u64) -> Self {
        Self {
            exact,
            samples: Self::DEFAULT_SAMPLES,
        }
    }

    fn for_mode(&self, mode: Mode) -> u64 {
        match mode {
            Mode::Exact => self.exact,
            Mode::Sampled => self.samples,
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self::new(10_000_000)
    }
}

fn resolve(policy: Policy, cost: u128, budget: u64) -> Mode {
    match policy {
        Policy::Exact => Mode::Exact,
        Policy::Sampled => Mode::Sampled,
        Policy::Auto if cost <= budget as u128 => Mode::Exact,
        Policy::Auto => Mode::Sampled,
    }
}

fn check_partition(g: &Graph, part: &ClusterPartition) -> Result<()> {
    if part.n() != g.n() {
        return Err(Error::param(format!(
            "partition covers {} vertices but the graph has {}",
            part.n(),
            g.n()
        )));
    }
    Ok(())
}

/// Builds the epsilon-graph `S` with threshold `eps m`, `m` the smallest
/// cluster size. Pair `(i, j)` uses the random stream `stream.child(index)`
/// where `index` enumerates pairs lexicographically.
pub fn build_epsilon_graph(
    g: &Graph,
    part: &ClusterPartition,
    eps: &Rational,
    policy: Policy,
    budget: Budget,
    stream: RngStream,
) -> Result<EpsilonGraph> {
    check_partition(g, part)?;
    let clusters = part.clusters();
    let m = part.m();
    let s = eps_threshold(eps, m);
    let pairs = all_pairs(part.k);
    let records: Vec<PairRecord<EmptyPairWitness>> = pairs
        .par_iter()
        .enumerate()
        .map(|(idx, &(i, j))| {
            let cost = eps_property_cost(clusters[i].len(), clusters[j].len(), s);
            let mode = resolve(policy, cost, budget.exact);
            let mut rng = stream.child(idx as u64).rng();
            check_eps_property(g, &clusters[i], &clusters[j], eps, m, mode, budget.for_mode(mode), &mut rng)
                .map(|verdict| PairRecord { i, j, verdict })
        })
        .collect::<Result<_>>()?;
    Ok(EpsilonGraph {
        k: part.k,
        edges: records.iter().filter(|r| r.verdict.holds).map(|r| (r.i, r.j)).collect(),
        epsilon: *eps,
        mode: GraphMode::of(records.iter().map(|r| r.verdict.mode)),
        pairs: records,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedPair {
    pub i: usize,
    pub j: usize,
    pub density: Rational,
    /// `None` when the density is below the floor and regularity was skipped.
    pub regularity: Option<RegularityVerdict>,
}

/// Graph on clusters whose edges are regular pairs of p-density at least rho.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedGraph {
    pub k: usize,
    pub edges: Vec<(usize, usize)>,
    pub rho: Rational,
    pub epsilon: Rational,
    pub p: Rational,
    pub mode: GraphMode,
    pub pairs: Vec<ReducedPair>,
}

impl ReducedGraph {
    pub fn to_graph(&self) -> Graph {
        Graph::from_edges(self.k, self.edges.iter().copied()).expect("cluster pairs are distinct")
    }

    /// `e(R) >= (x + tau) C(k, 2)`.
    pub fn edge_bound_holds(&self, x: &Rational, tau: &Rational) -> bool {
        reduced_edge_bound_check(self.k, self.edges.len(), x, tau)
    }
}

/// Default density floor `10 eps`.
pub fn default_rho(eps: &Rational) -> Rational {
    *eps * Rational::from_integer(10)
}

#[allow(clippy::too_many_arguments)]
pub fn build_reduced_graph(
    g: &Graph,
    part: &ClusterPartition,
    rho: &Rational,
    eps: &Rational,
    p: &Rational,
    policy: Policy,
    budget: Budget,
    stream: RngStream,
) -> Result<ReducedGraph> {
    check_partition(g, part)?;
    if *p <= Rational::zero() || *p > Rational::one() {
        return Err(Error::param("p must lie in (0, 1]"));
    }
    let clusters = part.clusters();
    let pairs = all_pairs(part.k);
    let records: Vec<ReducedPair> = pairs
        .par_iter()
        .enumerate()
        .map(|(idx, &(i, j))| {
            let density = p_density(g, &clusters[i], &clusters[j], p)?;
            let regularity = if density >= *rho {
                let cost = eps_regular_cost(clusters[i].len(), clusters[j].len(), eps);
                let too_big = clusters[i].len() > REGULAR_EXACT_SIDE_CAP || clusters[j].len() > REGULAR_EXACT_SIDE_CAP;
                let mode = match policy {
                    Policy::Auto if too_big => Mode::Sampled,
                    _ => resolve(policy, cost, budget.exact),
                };
                let mut rng = stream.child(idx as u64).rng();
                Some(check_eps_regular_pair(g, &clusters[i], &clusters[j], eps, p, mode, budget.for_mode(mode), &mut rng)?)
            } else {
                None
            };
            Ok(ReducedPair {
                i,
                j,
                density,
                regularity,
            })
        })
        .collect::<Result<_>>()?;
    let edges = records
        .iter()
        .filter(|r| r.regularity.as_ref().is_some_and(|v| v.holds))
        .map(|r| (r.i, r.j))
        .collect();
    let mode = GraphMode::of(records.iter().filter_map(|r| r.regularity.as_ref().map(|v| v.mode)));
    Ok(ReducedGraph {
        k: part.k,
        edges,
        rho: *rho,
        epsilon: *eps,
        p: *p,
        mode,
        pairs: records,
    })
}

/// `S` with `E(S) = E(R)`: regular pairs of density above `eps` have the
/// epsilon-property, so no re-check is made. Requires `eps < rho`.
pub fn epsilon_graph_from_reduced(r: &ReducedGraph) -> Result<EpsilonGraph> {
    if r.rho <= r.epsilon {
        return Err(Error::param(format!(
            "deriving S from R needs rho > eps (rho={}, eps={})",
            r.rho, r.epsilon
        )));
    }
    Ok(EpsilonGraph {
        k: r.k,
        edges: r.edges.clone(),
        epsilon: r.epsilon,
        mode: GraphMode::DerivedFromR,
        pairs: Vec::new(),
    })
}

/// `e >= (x + tau) C(k, 2)`, evaluated exactly.
pub fn reduced_edge_bound_check(k: usize, edges: usize, x: &Rational, tau: &Rational) -> bool {
    let pairs = Rational::from_integer((k * k.saturating_sub(1) / 2) as i128);
    Rational::from_integer(edges as i128) >= (*x + *tau) * pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::keep_each_edge;

    fn r(a: i128, b: i128) -> Rational {
        Rational::new(a, b)
    }

    fn sides(a: usize, b: usize) -> (Vec<Vertex>, Vec<Vertex>) {
        ((0..a).collect(), (a..a + b).collect())
    }

    #[test]
    fn p_density_examples() {
        let (u, w) = sides(3, 3);
        let k33 = Graph::complete_bipartite(3, 3);
        assert_eq!(p_density(&k33, &u, &w, &r(1, 1)).unwrap(), r(1, 1));
        assert_eq!(p_density(&Graph::empty(6), &u, &w, &r(1, 1)).unwrap(), r(0, 1));
        let minus = k33.filter_edges(|a, b| (a, b) != (0, 3));
        assert_eq!(p_density(&minus, &u, &w, &r(1, 2)).unwrap(), r(16, 9));
        assert!(p_density(&k33, &[], &w, &r(1, 2)).is_err());
        assert!(p_density(&k33, &u, &w, &r(0, 1)).is_err());
        assert!(matches!(p_density(&k33, &[0, 1], &[1, 2], &r(1, 1)), Err(Error::Overlap(1))));
    }

    #[test]
    fn eps_property_examples() {
        let mut rng = RngStream::new(0, 0).rng();
        let (a, b) = sides(5, 5);
        let k55 = Graph::complete_bipartite(5, 5);
        let v = check_eps_property(&k55, &a, &b, &r(1, 5), 5, Mode::Exact, 1000, &mut rng).unwrap();
        assert!(v.holds);
        let v = check_eps_property(&Graph::empty(10), &a, &b, &r(1, 5), 5, Mode::Exact, 1000, &mut rng).unwrap();
        let w = v.witness.unwrap();
        assert_eq!((w.u1.len(), w.u2.len()), (1, 1));
        assert!(w.verify(&Graph::empty(10)));
        let matching_removed = k55.filter_edges(|x, y| y != x + 5);
        let v = check_eps_property(&matching_removed, &a, &b, &r(2, 5), 5, Mode::Exact, 1000, &mut rng).unwrap();
        assert!(v.holds);
        assert_eq!(v.checked, 10);
        let v = check_eps_property(&matching_removed, &a, &b, &r(1, 5), 5, Mode::Exact, 1000, &mut rng).unwrap();
        assert!(!v.holds);
        assert!(v.witness.unwrap().verify(&matching_removed));
        assert!(matches!(
            check_eps_property(&k55, &a, &b, &r(2, 5), 5, Mode::Exact, 3, &mut rng),
            Err(Error::BudgetExceeded { needed: 10, budget: 3 })
        ));
    }

    /// Checks the property over all sizes at least the threshold.
    fn naive_property(g: &Graph, a: &[Vertex], b: &[Vertex], s: usize) -> bool {
        let sub = |set: &[Vertex]| -> Vec<Vec<Vertex>> {
            (1u32..1 << set.len())
                .filter(|m| m.count_ones() as usize >= s)
                .map(|m| (0..set.len()).filter(|&i| m >> i & 1 == 1).map(|i| set[i]).collect())
                .collect()
        };
        for x in sub(a) {
            for y in sub(b) {
                if graph::count_pair_edges(g, &x, &y).unwrap() == 0 {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn superset_rule_and_monotonicity() {
        for seed in 0..40 {
            let mut rng = RngStream::new(seed, 3).rng();
            let sz = rng.random_range(2..=8);
            let (a, b) = sides(sz, sz);
            let host = Graph::complete_bipartite(sz, sz);
            let g = keep_each_edge(&host, 0.35, &mut rng).unwrap();
            let mut prev = false;
            for num in 1..=sz as i128 {
                let eps = r(num, sz as i128);
                let v = check_eps_property(&g, &a, &b, &eps, sz, Mode::Exact, u64::MAX, &mut rng).unwrap();
                assert_eq!(v.holds, naive_property(&g, &a, &b, num as usize), "seed {seed} eps {eps}");
                assert!(!prev || v.holds, "monotonicity");
                prev = v.holds;
                if let Some(w) = v.witness {
                    assert!(w.verify(&g));
                }
            }
        }
    }

    #[test]
    fn sampled_property_witness_is_exact() {
        let mut rng = RngStream::new(5, 0).rng();
        let (a, b) = sides(40, 40);
        let g = keep_each_edge(&Graph::complete_bipartite(40, 40), 0.05, &mut rng).unwrap();
        let v = check_eps_property(&g, &a, &b, &r(1, 10), 40, Mode::Sampled, 100, &mut rng).unwrap();
        assert_eq!(v.mode, Mode::Sampled);
        if let Some(w) = &v.witness {
            assert!(w.verify(&g));
            assert_eq!(w.u1.len(), 4);
        }
        assert!(!v.holds);
    }

    #[test]
    fn regular_pair_examples() {
        let mut rng = RngStream::new(0, 0).rng();
        let (u, w) = sides(4, 4);
        let k44 = Graph::complete_bipartite(4, 4);
        for eps in [r(1, 10), r(3, 10), r(1, 2)] {
            assert!(check_eps_regular_pair(&k44, &u, &w, &eps, &r(1, 1), Mode::Exact, u64::MAX, &mut rng)
                .unwrap()
                .holds);
            assert!(check_eps_regular_pair(&Graph::empty(8), &u, &w, &eps, &r(1, 1), Mode::Exact, u64::MAX, &mut rng)
                .unwrap()
                .holds);
        }
        let half = k44.filter_edges(|a, _| a < 2);
        let v = check_eps_regular_pair(&half, &u, &w, &r(3, 10), &r(1, 1), Mode::Exact, u64::MAX, &mut rng).unwrap();
        assert!(!v.holds);
        let wit = v.witness.unwrap();
        assert!(wit.verify(&half, &u, &w, &r(3, 10), &r(1, 1)));
        assert_eq!(wit.pair_density, r(1, 2));
        let v = check_eps_regular_pair(&half, &u, &w, &r(3, 10), &r(1, 1), Mode::Sampled, 5, &mut rng).unwrap();
        assert!(!v.holds);
        assert_eq!(v.witness.unwrap().u, vec![0, 1]);
    }

    #[test]
    fn equipartition_sizes() {
        let mut rng = RngStream::new(0, 0).rng();
        assert_eq!(equipartition(10, 2, &mut rng).unwrap().sizes, vec![5, 5]);
        let mut s = equipartition(10, 3, &mut rng).unwrap().sizes;
        s.sort();
        assert_eq!(s, vec![3, 3, 4]);
        let p = equipartition(7, 7, &mut rng).unwrap();
        assert!(p.sizes.iter().all(|&x| x == 1));
        assert!(equipartition(5, 0, &mut rng).is_err());
        assert!(equipartition(5, 6, &mut rng).is_err());
        for n in (1..=1000).step_by(37) {
            for k in (1..=n).step_by(13) {
                let p = equipartition(n, k, &mut rng).unwrap();
                let (lo, hi) = (n / k, n.div_ceil(k));
                assert!(p.sizes.iter().all(|&x| x == lo || x == hi));
                assert_eq!(p.sizes.iter().sum::<usize>(), n);
                assert_eq!(p.clusters().iter().map(|c| c.len()).sum::<usize>(), n);
            }
        }
    }

    #[test]
    fn cluster_graph_examples() {
        let stream = RngStream::new(1, 0);
        let part = equipartition(12, 4, &mut stream.rng()).unwrap();
        let eps = r(1, 30);
        let rho = default_rho(&eps);
        let kn = Graph::complete(12);
        let rg = build_reduced_graph(&kn, &part, &rho, &eps, &r(1, 1), Policy::Exact, Budget::new(u64::MAX), stream).unwrap();
        assert_eq!(rg.edges.len(), 6);
        let sg = build_epsilon_graph(&kn, &part, &eps, Policy::Exact, Budget::new(u64::MAX), stream).unwrap();
        assert_eq!((sg.edges.len(), sg.mode), (6, GraphMode::Exact));
        let d = epsilon_graph_from_reduced(&rg).unwrap();
        assert_eq!((d.edges.len(), d.mode), (6, GraphMode::DerivedFromR));

        let e = Graph::empty(12);
        let rg = build_reduced_graph(&e, &part, &rho, &eps, &r(1, 1), Policy::Exact, Budget::new(u64::MAX), stream).unwrap();
        assert!(rg.edges.is_empty());
        let sg = build_epsilon_graph(&e, &part, &eps, Policy::Exact, Budget::new(u64::MAX), stream).unwrap();
        assert!(sg.edges.is_empty());

        let bad = ReducedGraph { rho: eps, ..rg };
        assert!(epsilon_graph_from_reduced(&bad).is_err());
    }

    fn planted(k: usize, m: usize, q: f64, stream: RngStream) -> (Graph, ClusterPartition) {
        let n = k * m;
        let mut rng = stream.rng();
        let host = Graph::complete(n).filter_edges(|a, b| a / m != b / m);
        let g = keep_each_edge(&host, q, &mut rng).unwrap();
        let part = ClusterPartition::from_assignment((0..n).map(|v| v / m).collect(), k).unwrap();
        (g, part)
    }

    #[test]
    fn planted_dense_pairs_give_complete_s() {
        let stream = RngStream::new(11, 0);
        let (g, part) = planted(4, 6, 0.9, stream);
        let s = build_epsilon_graph(&g, &part, &r(1, 3), Policy::Exact, Budget::new(u64::MAX), stream).unwrap();
        assert_eq!(s.edges.len(), 6);
    }

    #[test]
    fn reduced_edges_are_epsilon_edges() {
        for seed in 0..10 {
            let stream = RngStream::new(seed, 2);
            let (g, part) = planted(4, 6, 0.8, stream);
            let eps = r(1, 3);
            let rho = r(1, 2);
            let rg = build_reduced_graph(&g, &part, &rho, &eps, &r(1, 1), Policy::Exact, Budget::new(u64::MAX), stream).unwrap();
            let sg = build_epsilon_graph(&g, &part, &eps, Policy::Exact, Budget::new(u64::MAX), stream).unwrap();
            for e in &rg.edges {
                assert!(sg.edges.contains(e), "seed {seed}: R-edge {e:?} missing from S");
            }
        }
    }

    #[test]
    fn edge_bound_examples() {
        assert!(reduced_edge_bound_check(5, 10, &r(1, 2), &r(1, 2)));
        assert!(!reduced_edge_bound_check(5, 0, &r(1, 2), &r(1, 100)));
        assert!(reduced_edge_bound_check(20, 120, &r(1, 2), &r(1, 10)));
        assert!(!reduced_edge_bound_check(20, 113, &r(1, 2), &r(1, 10)));
    }
}
