//! Cycles of an exact prescribed length, stitched together from tree
//! embeddings along a path or an odd cycle of the cluster graph.

use std::time::Instant;

use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedder::{
    self, Copy, EmbedError, EmbedTrace, LargeOptions, LayoutChoice, TreeEmbedding, TreeSpec,
};
use crate::extremal::{self, ExtremalQuery, Parity};
use crate::graph::{self, Graph, Side, Vertex, VertexSeq};
use crate::regularity::{self, Budget, ClusterPartition, GraphMode, Policy};
use crate::rng::RngStream;
use crate::{Error, Rational, Result};

/// Largest cluster graph searched exactly for paths and odd cycles.
pub const S_EXACT_CAP: usize = 20;
pub const DEFAULT_C1: f64 = 2.5;

fn ri(x: usize) -> Rational {
    Rational::from_integer(x as i128)
}

/// The four ranges of `t` distinguished when reading off a substructure of
/// the cluster graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TCase {
    /// Even, `t < gamma n`.
    ShortEven,
    /// Even, `gamma n <= t < (n+3)/2`.
    MidEven,
    /// Odd, `t < (n+3)/2`.
    MidOdd,
    /// `t >= (n+3)/2`.
    Long,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleRequest {
    pub t: usize,
    pub parity: Parity,
    pub case: TCase,
}

impl CycleRequest {
    pub fn new(t: usize, n: usize, gamma: &Rational) -> Result<Self> {
        if t < 3 || t > n {
            return Err(Error::param(format!("need 3 <= t <= n, got t = {t}, n = {n}")));
        }
        let parity = Parity::of(t);
        let case = if extremal::in_two_clique_regime(t, n) {
            TCase::Long
        } else if parity == Parity::Odd {
            TCase::MidOdd
        } else if ri(t) < *gamma * ri(n) {
            TCase::ShortEven
        } else {
            TCase::MidEven
        };
        Ok(Self { t, parity, case })
    }
}

/// The admissible range of `t` for a given substructure, with whether `t`
/// falls inside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lower: f64,
    pub upper: Rational,
    pub inside: bool,
}

/// Range for a path of odd length `b` (even `t`) or an odd cycle of length
/// `b` (odd `t`), with `delta = 48 eps`.
pub fn key_window(parity: Parity, b: usize, t: usize, n: usize, k: usize, eps: &Rational, c1: f64) -> Window {
    let log_inv = (1.0 / eps.to_f64().unwrap_or(f64::NAN)).ln();
    let (scale, a) = match parity {
        Parity::Even => (1.0, Rational::new((b + 1) as i128, k as i128)),
        Parity::Odd => ((b.saturating_sub(1)) as f64 / 2.0, Rational::new(b as i128, k as i128)),
    };
    let lower = scale * c1 / log_inv * (n as f64).ln();
    let upper = (Rational::one() - ri(48) * *eps) * a * ri(n);
    let inside = t as f64 >= lower && ri(t) <= upper;
    Window { lower, upper, inside }
}

/// Which construction a plan follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// Short even cycle from one small-arity tree on one pair.
    EvenSmall,
    /// Even cycle from one binary tree on one pair.
    EvenSingle,
    /// Two trees on a path of three pairs joined by two edges.
    EvenDouble,
    /// Two end trees and two chains through halved interior clusters.
    EvenChain,
    /// Odd cycle with small-arity trees.
    OddSmall,
    /// Odd cycle with binary trees.
    OddLarge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Half {
    Whole,
    First,
    Second,
}

/// A cluster of the plan's sequence, or one half of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterRef {
    pub pos: usize,
    pub half: Half,
}

impl ClusterRef {
    fn whole(pos: usize) -> Self {
        Self { pos, half: Half::Whole }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedTree {
    pub x: ClusterRef,
    pub y: ClusterRef,
    pub spec: TreeSpec,
    /// Side (x = left, y = right) of the copy-A leaves.
    pub a_leaves: Side,
    /// Embedded whole with the small-tree method instead of path + trees.
    pub small: bool,
}

/// Traversal of one tree from a leaf of `from` to a leaf of the other copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub tree: usize,
    pub from: Copy,
}

impl Segment {
    fn to(&self) -> Copy {
        match self.from {
            Copy::A => Copy::B,
            Copy::B => Copy::A,
        }
    }
}

/// Joins the end of one segment to the start of the next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Link {
    Edge,
    /// Through one vertex of the cluster at this position.
    Vertex { pos: usize },
}

impl Link {
    fn len(&self) -> usize {
        match self {
            Link::Edge => 1,
            Link::Vertex { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StitchPlan {
    pub t: usize,
    pub parity: Parity,
    pub branch: Branch,
    pub b: usize,
    /// Cluster indices along the path (`b + 1` of them) or cycle (`b`).
    pub clusters: Vec<usize>,
    pub eps: Rational,
    pub m: usize,
    pub r: usize,
    pub h: usize,
    pub trees: Vec<PlannedTree>,
    pub segments: Vec<Segment>,
    /// `links[i]` joins segment `i` to segment `i + 1` (cyclically).
    pub links: Vec<Link>,
    pub window: Window,
}

impl StitchPlan {
    /// Cycle length implied by the plan: each segment contributes
    /// `ell + 2h`, each link its own length.
    pub fn total(&self) -> usize {
        let seg: usize = self
            .segments
            .iter()
            .map(|s| self.trees[s.tree].spec.longest_path())
            .sum();
        seg + self.links.iter().map(Link::len).sum::<usize>()
    }

    fn check(self) -> Result<Self> {
        if self.total() != self.t {
            return Err(Error::param(format!(
                "plan adds up to {} instead of {}",
                self.total(),
                self.t
            )));
        }
        if self.links.len() != self.segments.len() {
            return Err(Error::param("one link per segment is required"));
        }
        Ok(self)
    }
}

/// Shared inputs of the planners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanParams {
    pub eps: Rational,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub c1: f64,
    /// Caps the depth of the large trees; `None` keeps the depth that gives
    /// `eps m` leaves.
    pub max_depth: Option<usize>,
}

impl PlanParams {
    fn large_depth(&self) -> usize {
        let h = embedder::large_tree_depth(&self.eps, self.m);
        self.max_depth.map_or(h, |c| h.min(c))
    }
}

/// Largest odd integer at most `x`.
pub fn floor_odd(x: i64) -> i64 {
    if x.rem_euclid(2) == 1 {
        x
    } else {
        x - 1
    }
}

/// Two even values summing to `s` (even) that differ by at most 2.
fn split_even(s: i64) -> (i64, i64) {
    let half = s / 2;
    if half % 2 == 0 {
        (half, half)
    } else {
        (half + 1, half - 1)
    }
}

/// `(ell_1, ell_3)` for two trees of depth `h` on a path of three pairs.
pub fn double_lengths(t: usize, h: usize) -> (i64, i64) {
    split_even(t as i64 - 4 * h as i64 - 2)
}

/// `(ell_0, ell_star, ell_1, ell_b)` for a chain over `b >= 5` pairs.
pub fn chain_lengths(t: usize, b: usize, h: usize) -> (i64, i64, i64, i64) {
    let (ti, bi, hi) = (t as i64, b as i64, h as i64);
    let l0 = floor_odd((ti - bi + 1) / (bi + 1)) - 2 * hi;
    let lstar = (l0 + 2 * hi) * (bi - 3) / 2 + (bi - 5) / 2 - 2 * hi;
    let (l1, lb) = split_even(ti - 2 * lstar - 8 * hi - 4);
    (l0, lstar, l1, lb)
}

/// `(ell_0, ell_1)` for `(b-1)/2` trees of depth `h` around an odd cluster
/// cycle of length `b`.
pub fn odd_lengths(t: usize, b: usize, h: usize) -> (i64, i64) {
    let (ti, bi, hi) = (t as i64, b as i64, h as i64);
    let l0 = floor_odd((2 * ti - 2 - (1 + 2 * hi) * (bi - 1)).div_euclid(bi - 1));
    let l1 = ti - 1 - (bi - 1) / 2 - hi * (bi - 1) - (bi - 3) / 2 * l0;
    (l0, l1)
}

fn small_shape(t: usize, p: &PlanParams) -> Option<(usize, usize)> {
    let two_em = ri(2) * p.eps * ri(p.m);
    if ri(t) > two_em {
        return None;
    }
    embedder::small_tree_shape(&p.eps, p.m).ok()
}

fn spec(r: usize, h: usize, ell: i64, what: &str) -> Result<TreeSpec> {
    if ell < 1 {
        return Err(Error::param(format!("{what} = {ell} is too short for this branch")));
    }
    TreeSpec::new(r, h, ell as usize)
}

/// Plan for an even cycle along a cluster path of odd length `b`.
pub fn plan_even_cycle(path: &[usize], t: usize, p: &PlanParams) -> Result<StitchPlan> {
    if path.len() < 2 {
        return Err(Error::param("a cluster path needs at least one edge"));
    }
    let b = path.len() - 1;
    if b.is_multiple_of(2) {
        return Err(Error::param(format!("path length {b} is even")));
    }
    if t % 2 == 1 || t < 4 {
        return Err(Error::param(format!("paths give even cycles of length at least 4, not {t}")));
    }
    let window = key_window(Parity::Even, b, t, p.n, p.k, &p.eps, p.c1);
    let ti = t as i64;
    let base = |branch, r, h, trees, segments, links| StitchPlan {
        t,
        parity: Parity::Even,
        branch,
        b,
        clusters: path.to_vec(),
        eps: p.eps,
        m: p.m,
        r,
        h,
        trees,
        segments,
        links,
        window: window.clone(),
    };
    let one_pair = |r: usize, h: usize, small: bool, branch| -> Result<StitchPlan> {
        let ell = ti - 2 * h as i64 - 1;
        let tree = PlannedTree {
            x: ClusterRef::whole(0),
            y: ClusterRef::whole(1),
            spec: spec(r, h, ell, "ell")?,
            a_leaves: Side::Left,
            small,
        };
        base(
            branch,
            r,
            h,
            vec![tree],
            vec![Segment { tree: 0, from: Copy::A }],
            vec![Link::Edge],
        )
        .check()
    };
    if let Some((r, h)) = small_shape(t, p) {
        return one_pair(r, h, true, Branch::EvenSmall);
    }
    let h = p.large_depth();
    let tree = |x: ClusterRef, y: ClusterRef, ell: i64, a_leaves: Side, what: &str| -> Result<PlannedTree> {
        Ok(PlannedTree {
            x,
            y,
            spec: spec(2, h, ell, what)?,
            a_leaves,
            small: false,
        })
    };
    let seg = |tree, from| Segment { tree, from };
    match b {
        1 => one_pair(2, h, false, Branch::EvenSingle),
        3 => {
            let (l1, l3) = double_lengths(t, h);
            if l3 < 2 {
                return Err(Error::param(format!("t = {t} is too short for two trees of depth {h}")));
            }
            let trees = vec![
                tree(ClusterRef::whole(0), ClusterRef::whole(1), l1, Side::Right, "ell_1")?,
                tree(ClusterRef::whole(2), ClusterRef::whole(3), l3, Side::Left, "ell_3")?,
            ];
            base(
                Branch::EvenDouble,
                2,
                h,
                trees,
                vec![seg(0, Copy::A), seg(1, Copy::A)],
                vec![Link::Edge, Link::Edge],
            )
            .check()
        }
        _ => {
            let (l0, lstar, l1, lb) = chain_lengths(t, b, h);
            if l0 < 1 || lstar < 1 || lb < 2 {
                return Err(Error::param(format!(
                    "t = {t} is too short for a chain over {b} pairs with depth {h}"
                )));
            }
            let mut trees = vec![
                tree(ClusterRef::whole(0), ClusterRef::whole(1), l1, Side::Right, "ell_1")?,
                tree(ClusterRef::whole(b - 1), ClusterRef::whole(b), lb, Side::Left, "ell_b")?,
            ];
            let pairs: Vec<usize> = (2..b - 1).step_by(2).collect();
            let mut chain = [Vec::new(), Vec::new()];
            for (c, half) in [(0, Half::First), (1, Half::Second)] {
                for &x in &pairs {
                    chain[c].push(trees.len());
                    trees.push(tree(
                        ClusterRef { pos: x, half },
                        ClusterRef { pos: x + 1, half },
                        l0,
                        Side::Left,
                        "ell_0",
                    )?);
                }
            }
            let mut segments = vec![seg(0, Copy::A)];
            segments.extend(chain[1].iter().map(|&i| seg(i, Copy::A)));
            segments.push(seg(1, Copy::A));
            segments.extend(chain[0].iter().rev().map(|&i| seg(i, Copy::B)));
            let links = vec![Link::Edge; segments.len()];
            base(Branch::EvenChain, 2, h, trees, segments, links).check()
        }
    }
}

/// Plan for an odd cycle along a cluster cycle of odd length `b`.
pub fn plan_odd_cycle(cycle: &[usize], t: usize, p: &PlanParams) -> Result<StitchPlan> {
    let b = cycle.len();
    if b < 3 || b.is_multiple_of(2) {
        return Err(Error::param(format!("need an odd cluster cycle of length at least 3, got {b}")));
    }
    if t.is_multiple_of(2) {
        return Err(Error::param(format!("odd cluster cycles give odd cycles, not {t}")));
    }
    let window = key_window(Parity::Odd, b, t, p.n, p.k, &p.eps, p.c1);
    let (r, h, small, branch) = match small_shape(t, p) {
        Some((r, h)) => (r, h, true, Branch::OddSmall),
        None => (2, p.large_depth(), false, Branch::OddLarge),
    };
    let (l0, l1) = odd_lengths(t, b, h);
    if (b > 3 && l0 < 1) || l1 < 1 {
        return Err(Error::param(format!("t = {t} is too short for {} trees of depth {h}", (b - 1) / 2)));
    }
    let count = (b - 1) / 2;
    let mut trees = Vec::with_capacity(count);
    for i in 0..count {
        let ell = if i == 0 { l1 } else { l0 };
        trees.push(PlannedTree {
            x: ClusterRef::whole(2 * i),
            y: ClusterRef::whole(2 * i + 1),
            spec: spec(r, h, ell, if i == 0 { "ell_1" } else { "ell_0" })?,
            a_leaves: Side::Left,
            small,
        });
    }
    let segments = (0..count).map(|tree| Segment { tree, from: Copy::A }).collect();
    let mut links = vec![Link::Edge; count - 1];
    links.push(Link::Vertex { pos: b - 1 });
    StitchPlan {
        t,
        parity: Parity::Odd,
        branch,
        b,
        clusters: cycle.to_vec(),
        eps: p.eps,
        m: p.m,
        r,
        h,
        trees,
        segments,
        links,
        window,
    }
    .check()
}

/// Vertices picked to realise one link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkChoice {
    pub end: Vertex,
    pub via: Option<Vertex>,
    pub start: Vertex,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "stage")]
pub enum StitchFailure {
    #[error("plan: {0}")]
    Plan(String),
    #[error("tree {tree}: {error}")]
    Tree { tree: usize, error: EmbedError },
    #[error("no edge between leaf sets of link {link} ({} and {} vertices)", left.len(), right.len())]
    Connector {
        link: usize,
        left: Vec<Vertex>,
        right: Vec<Vertex>,
    },
    #[error("no vertex of cluster {cluster} sees both leaf sets of link {link}")]
    ClosingVertex {
        link: usize,
        cluster: usize,
        first: Vec<Vertex>,
        last: Vec<Vertex>,
    },
    #[error("host vertex {0} used twice")]
    Overlap(Vertex),
    #[error("assembled cycle rejected: {0}")]
    Verification(String),
}

impl StitchFailure {
    pub fn stage(&self) -> &'static str {
        match self {
            StitchFailure::Plan(_) => "plan",
            StitchFailure::Tree { .. } => "tree",
            StitchFailure::Connector { .. } => "connector",
            StitchFailure::ClosingVertex { .. } => "closing-vertex",
            StitchFailure::Overlap(_) => "overlap",
            StitchFailure::Verification(_) => "verification",
        }
    }
}

impl From<StitchFailure> for Error {
    fn from(f: StitchFailure) -> Self {
        Error::Stage {
            stage: format!("stitch/{}", f.stage()),
            detail: f.to_string(),
        }
    }
}

/// How `find_cycle_of_length` arrived at the plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindContext {
    pub request: CycleRequest,
    pub retry: usize,
    pub s_edges: usize,
    /// `(g^gamma(t, n) + beta/32) C(k, 2)`.
    pub s_threshold: Rational,
    pub s_threshold_met: bool,
    pub s_mode: GraphMode,
    pub k_condition_met: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleCertificate {
    pub t: usize,
    pub cycle: VertexSeq,
    pub plan: StitchPlan,
    pub links: Vec<LinkChoice>,
    pub traces: Vec<EmbedTrace>,
    pub context: Option<FindContext>,
}

impl CycleCertificate {
    pub fn verify(&self, g: &Graph) -> bool {
        graph::verify_cycle(g, &self.cycle, self.t).is_ok()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecOptions {
    pub layout: LayoutChoice,
    pub restarts: usize,
    pub stream: RngStream,
}

impl ExecOptions {
    pub fn new(stream: RngStream) -> Self {
        Self {
            layout: LayoutChoice::Auto,
            restarts: 4,
            stream,
        }
    }
}

fn region(clusters: &[Vec<Vertex>], plan: &StitchPlan, c: ClusterRef) -> Vec<Vertex> {
    let v = &clusters[plan.clusters[c.pos]];
    let mid = v.len() / 2;
    match c.half {
        Half::Whole => v.clone(),
        Half::First => v[..mid].to_vec(),
        Half::Second => v[mid..].to_vec(),
    }
}

/// First edge between `left` and `right`, scanning `left` in order and each
/// neighbour list in order.
fn scan_edge(g: &Graph, left: &[Vertex], right: &[Vertex]) -> Option<(Vertex, Vertex)> {
    let rm = graph::mask(g.n(), right);
    let mut best: Option<(Vertex, Vertex)> = None;
    for &x in left {
        if let Some(&y) = g.neighbors(x).iter().filter(|&&y| rm[y]).min() {
            best = Some((x, y));
            break;
        }
    }
    best
}

/// Embeds every planned tree, finds the links and assembles the cycle.
pub fn execute_plan(
    g: &Graph,
    part: &ClusterPartition,
    plan: &StitchPlan,
    opts: ExecOptions,
) -> std::result::Result<CycleCertificate, StitchFailure> {
    if part.n() != g.n() {
        return Err(StitchFailure::Plan("partition does not cover the graph".into()));
    }
    if plan.clusters.iter().any(|&c| c >= part.k) {
        return Err(StitchFailure::Plan("plan names a cluster outside the partition".into()));
    }
    let clusters = part.clusters();
    let embedded: Vec<TreeEmbedding> = plan
        .trees
        .par_iter()
        .enumerate()
        .map(|(i, pt)| {
            let x = region(&clusters, plan, pt.x);
            let y = region(&clusters, plan, pt.y);
            let res = if pt.small {
                embedder::embed_small_with(g, &x, &y, &plan.eps, plan.m, pt.spec, pt.a_leaves)
            } else {
                let (eps, m) = match pt.x.half {
                    Half::Whole => (plan.eps, plan.m),
                    _ => {
                        let m2 = x.len().min(y.len()).max(1);
                        (plan.eps * ri(plan.m) / ri(m2), m2)
                    }
                };
                let lo = LargeOptions {
                    layout: opts.layout,
                    stream: opts.stream.child(i as u64),
                    restarts: opts.restarts,
                };
                embedder::embed_large_with(g, &x, &y, &eps, m, pt.spec, pt.a_leaves, lo)
            };
            res.map_err(|error| StitchFailure::Tree { tree: i, error })
        })
        .collect::<std::result::Result<_, _>>()?;
    let mut used = vec![false; g.n()];
    for e in &embedded {
        for &v in &e.map {
            if std::mem::replace(&mut used[v], true) {
                return Err(StitchFailure::Overlap(v));
            }
        }
    }
    let segs = &plan.segments;
    let mut choices = Vec::with_capacity(segs.len());
    for (i, link) in plan.links.iter().enumerate() {
        let cur = segs[i];
        let next = segs[(i + 1) % segs.len()];
        let end = embedded[cur.tree].host_leaves(cur.to());
        let start = embedded[next.tree].host_leaves(next.from);
        match *link {
            Link::Edge => match scan_edge(g, &end, &start) {
                Some((x, y)) => choices.push(LinkChoice {
                    end: x,
                    via: None,
                    start: y,
                }),
                None => {
                    return Err(StitchFailure::Connector {
                        link: i,
                        left: end,
                        right: start,
                    })
                }
            },
            Link::Vertex { pos } => {
                let em = graph::mask(g.n(), &end);
                let sm = graph::mask(g.n(), &start);
                let found = clusters[plan.clusters[pos]].iter().copied().filter(|&v| !used[v]).find_map(|v| {
                    let a = g.neighbors(v).iter().copied().find(|&w| em[w])?;
                    let c = g.neighbors(v).iter().copied().find(|&w| sm[w])?;
                    Some(LinkChoice {
                        end: a,
                        via: Some(v),
                        start: c,
                    })
                });
                match found {
                    Some(c) => {
                        used[c.via.unwrap()] = true;
                        choices.push(c);
                    }
                    None => {
                        return Err(StitchFailure::ClosingVertex {
                            link: i,
                            cluster: plan.clusters[pos],
                            first: start,
                            last: end,
                        })
                    }
                }
            }
        }
    }
    let mut cycle = Vec::with_capacity(plan.t);
    for (i, s) in segs.iter().enumerate() {
        let from = choices[(i + segs.len() - 1) % segs.len()].start;
        let to = choices[i].end;
        let piece = embedded[s.tree]
            .leaf_to_leaf(s.from, from, to)
            .ok_or_else(|| StitchFailure::Verification(format!("segment {i} endpoints are not leaves")))?;
        cycle.extend(piece);
        if let Some(v) = choices[i].via {
            cycle.push(v);
        }
    }
    graph::verify_cycle(g, &cycle, plan.t).map_err(|e| StitchFailure::Verification(format!("{e:?}")))?;
    Ok(CycleCertificate {
        t: plan.t,
        cycle,
        plan: plan.clone(),
        links: choices,
        traces: embedded.into_iter().map(|e| e.trace).collect(),
        context: None,
    })
}

fn bits(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask >> i & 1 == 1)
}

fn adjacency_masks(s: &Graph) -> Result<Vec<u32>> {
    if s.n() > S_EXACT_CAP {
        return Err(Error::TooLarge {
            n: s.n(),
            cap: S_EXACT_CAP,
        });
    }
    Ok((0..s.n())
        .map(|v| s.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w))
        .collect())
}

/// A longest path of the cluster graph, by dynamic programming over vertex
/// subsets; ties go to the lexicographically smallest subset.
pub fn longest_path_exact(s: &Graph) -> Result<Vec<usize>> {
    let adj = adjacency_masks(s)?;
    let k = s.n();
    if k == 0 {
        return Ok(Vec::new());
    }
    let full = 1usize << k;
    // ends[mask]: vertices v such that some path covers exactly `mask` and
    // ends at v.
    let mut ends = vec![0u32; full];
    for v in 0..k {
        ends[1 << v] = 1 << v;
    }
    let mut best = (1u32, 1usize, 0usize);
    for mask in 1..full {
        let e = ends[mask];
        if e == 0 {
            continue;
        }
        let size = (mask as u32).count_ones();
        if size > best.0 {
            best = (size, mask, e.trailing_zeros() as usize);
        }
        for v in bits(e) {
            for w in bits(adj[v] & !(mask as u32)) {
                ends[mask | 1 << w] |= 1 << w;
            }
        }
    }
    let (_, mut mask, mut v) = best;
    let mut path = vec![v];
    while mask.count_ones() > 1 {
        let rest = mask & !(1 << v);
        let u = bits(ends[rest] & adj[v]).next().expect("predecessor exists");
        path.push(u);
        mask = rest;
        v = u;
    }
    Ok(path)
}

/// A cycle of exactly `b` clusters, found by a subset DP over paths starting
/// at the cycle's smallest vertex.
pub fn cycle_of_length_exact(s: &Graph, b: usize) -> Result<Option<Vec<usize>>> {
    let adj = adjacency_masks(s)?;
    let k = s.n();
    if b < 3 || b > k {
        return Ok(None);
    }
    let full = 1usize << k;
    let mut ends = vec![0u32; full];
    for start in 0..k {
        let low = (1usize << (start + 1)) - 1;
        ends.iter_mut().for_each(|e| *e = 0);
        ends[1 << start] = 1 << start;
        for mask in (1usize << start)..full {
            // Only subsets whose smallest member is `start`.
            if mask & low != 1 << start || ends[mask] == 0 {
                continue;
            }
            let size = mask.count_ones() as usize;
            if size == b {
                if let Some(v) = bits(ends[mask] & adj[start]).next() {
                    let mut m = mask as u32;
                    let mut cur = v;
                    let mut cyc = vec![cur];
                    while m.count_ones() > 1 {
                        let rest = m & !(1 << cur);
                        let u = bits(ends[rest as usize] & adj[cur]).next().expect("predecessor exists");
                        cyc.push(u);
                        m = rest;
                        cur = u;
                    }
                    cyc.reverse();
                    return Ok(Some(cyc));
                }
                continue;
            }
            for v in bits(ends[mask]) {
                for w in bits(adj[v] & !(mask as u32) & !(low as u32)) {
                    ends[mask | 1 << w] |= 1 << w;
                }
            }
        }
    }
    Ok(None)
}

pub fn default_gamma(eps: &Rational, k: usize) -> Rational {
    let k = ri(k.max(1));
    let g = ri(2) * (Rational::one() - ri(48) * *eps) / k;
    if g > Rational::zero() {
        g
    } else {
        Rational::one() / (ri(4) * k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindConfig {
    pub beta: Rational,
    /// Defaults to `2(1 - 48 eps)/k`.
    pub gamma: Option<Rational>,
    pub eps: Rational,
    pub k: usize,
    pub c1: f64,
    pub c2: Rational,
    pub retries: usize,
    pub policy: Policy,
    pub budget: Budget,
    pub layout: LayoutChoice,
    pub restarts: usize,
    /// Seconds; checked between attempts.
    pub time_limit: Option<f64>,
    /// See [`PlanParams::max_depth`].
    pub max_depth: Option<usize>,
}

impl FindConfig {
    pub fn new(beta: Rational, eps: Rational, k: usize) -> Self {
        Self {
            beta,
            gamma: None,
            eps,
            k,
            c1: DEFAULT_C1,
            c2: Rational::new(48, 10_000),
            retries: 5,
            policy: Policy::Auto,
            budget: Budget::default(),
            layout: LayoutChoice::Auto,
            restarts: 4,
            time_limit: Some(60.0),
            max_depth: None,
        }
    }

    /// The configured `gamma`, else `2(1 - 48 eps)/k`, else (when that is
    /// not positive) `1/(4k)`.
    pub fn gamma(&self) -> Rational {
        self.gamma.unwrap_or_else(|| default_gamma(&self.eps, self.k))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptReport {
    pub retry: usize,
    pub s_edges: usize,
    pub s_threshold: Rational,
    /// Length of the longest path (even `t`) or the odd cycle lengths
    /// available (odd `t`) in the cluster graph.
    pub substructures: Vec<usize>,
    pub failures: Vec<(usize, StitchFailure)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Error)]
#[error("no cycle of length {t}: {reason}")]
pub struct FindFailure {
    pub t: usize,
    pub reason: String,
    pub attempts: Vec<AttemptReport>,
}

impl FindFailure {
    /// Stage of the last recorded failure, or `"s-graph"` when no plan was
    /// ever executed.
    pub fn stage(&self) -> String {
        self.attempts
            .iter()
            .rev()
            .find_map(|a| a.failures.last().map(|f| f.1.stage().to_string()))
            .unwrap_or_else(|| if self.reason.contains("time") { "timeout".into() } else { "s-graph".into() })
    }
}

fn s_threshold(t: usize, n: usize, cfg: &FindConfig) -> Rational {
    let g = ExtremalQuery::new(n, t, cfg.gamma())
        .map(|q| extremal::g_function(&q).as_rational())
        .unwrap_or_else(|_| Rational::zero());
    (g + cfg.beta / ri(32)) * ri(cfg.k * cfg.k.saturating_sub(1) / 2)
}

/// Searches for a cycle of length exactly `t`: partitions the vertices,
/// builds the cluster graph, reads off a path or odd cycle exactly and
/// executes the matching plan, over fresh partitions up to `cfg.retries`.
///
/// Substructures whose window contains `t` are tried first, then the rest in
/// increasing `b`; the window is recorded in the plan.
pub fn find_cycle_of_length(
    g: &Graph,
    t: usize,
    cfg: &FindConfig,
    partition: Option<&ClusterPartition>,
    stream: RngStream,
) -> std::result::Result<CycleCertificate, FindFailure> {
    let n = g.n();
    let fail = |reason: String, attempts| FindFailure { t, reason, attempts };
    let request = CycleRequest::new(t, n, &cfg.gamma()).map_err(|e| fail(e.to_string(), Vec::new()))?;
    if cfg.k == 0 || cfg.k > n || cfg.k > S_EXACT_CAP {
        return Err(fail(format!("k = {} must lie in [1, min(n, {S_EXACT_CAP})]", cfg.k), Vec::new()));
    }
    let started = Instant::now();
    let threshold = s_threshold(t, n, cfg);
    let k_ok = ri(cfg.k) * cfg.eps * cfg.eps >= ri(2);
    let mut attempts = Vec::new();
    for retry in 0..cfg.retries.max(1) {
        if cfg.time_limit.is_some_and(|l| started.elapsed().as_secs_f64() > l) {
            return Err(fail("time limit reached".into(), attempts));
        }
        let rs = stream.child(retry as u64);
        let part = match partition {
            Some(p) => p.clone(),
            None => regularity::equipartition(n, cfg.k, &mut rs.child(0).rng()).map_err(|e| fail(e.to_string(), attempts.clone()))?,
        };
        let sg = regularity::build_epsilon_graph(g, &part, &cfg.eps, cfg.policy, cfg.budget, rs.child(1))
            .map_err(|e| fail(e.to_string(), attempts.clone()))?;
        let s = sg.to_graph();
        let params = PlanParams {
            eps: cfg.eps,
            m: part.m(),
            n,
            k: part.k,
            c1: cfg.c1,
            max_depth: cfg.max_depth,
        };
        let mut report = AttemptReport {
            retry,
            s_edges: sg.edges.len(),
            s_threshold: threshold,
            substructures: Vec::new(),
            failures: Vec::new(),
        };
        let mut plans: Vec<(usize, std::result::Result<StitchPlan, String>)> = Vec::new();
        match request.parity {
            Parity::Even => {
                let path = longest_path_exact(&s).map_err(|e| fail(e.to_string(), attempts.clone()))?;
                let len = path.len().saturating_sub(1);
                report.substructures.push(len);
                for b in (1..=len).step_by(2) {
                    plans.push((b, plan_even_cycle(&path[..=b], t, &params).map_err(|e| e.to_string())));
                }
            }
            Parity::Odd => {
                for b in (3..=part.k).step_by(2) {
                    if let Some(c) = cycle_of_length_exact(&s, b).map_err(|e| fail(e.to_string(), attempts.clone()))? {
                        report.substructures.push(b);
                        plans.push((b, plan_odd_cycle(&c, t, &params).map_err(|e| e.to_string())));
                    }
                }
            }
        }
        // Inside-window plans first, stable in b.
        plans.sort_by_key(|(b, p)| (!matches!(p, Ok(p) if p.window.inside), *b));
        for (i, (b, plan)) in plans.into_iter().enumerate() {
            if cfg.time_limit.is_some_and(|l| started.elapsed().as_secs_f64() > l) {
                break;
            }
            let plan = match plan {
                Ok(p) => p,
                Err(e) => {
                    report.failures.push((b, StitchFailure::Plan(e)));
                    continue;
                }
            };
            // A cycle on clusters of this plan cannot be longer than they are.
            let room: usize = plan.clusters.iter().map(|&c| part.sizes[c]).sum();
            if room < t {
                report
                    .failures
                    .push((b, StitchFailure::Plan(format!("clusters hold {room} vertices, fewer than {t}"))));
                continue;
            }
            let opts = ExecOptions {
                layout: cfg.layout,
                restarts: cfg.restarts,
                stream: rs.child(2 + i as u64),
            };
            match execute_plan(g, &part, &plan, opts) {
                Ok(mut cert) => {
                    cert.context = Some(FindContext {
                        request,
                        retry,
                        s_edges: sg.edges.len(),
                        s_threshold: threshold,
                        s_threshold_met: ri(sg.edges.len()) >= threshold,
                        s_mode: sg.mode,
                        k_condition_met: k_ok,
                    });
                    return Ok(cert);
                }
                Err(f) => report.failures.push((b, f)),
            }
        }
        attempts.push(report);
        if partition.is_some() && attempts.len() >= 2 {
            // A fixed partition gives the same cluster graph on every retry;
            // two passes cover the randomised steps.
            break;
        }
    }
    let reason = if attempts.iter().all(|a| a.substructures.is_empty()) {
        "cluster graph has no usable path or odd cycle".to_string()
    } else {
        "every plan failed".to_string()
    };
    Err(fail(reason, attempts))
}
