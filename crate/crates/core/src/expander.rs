//! Bipartite expanders: verdicts, the vertex-removal cleanup, the DFS
//! path partition and a long-path heuristic.

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, Graph, Side, Vertex, VertexSeq};
use crate::rng::RngStream;
use crate::verdict::{binomial, Combinations, Mode, Verdict};
use crate::Rational;

fn ri(x: usize) -> Rational {
    Rational::from_integer(x as i128)
}

fn floor_usize(x: &Rational) -> usize {
    let f = x.floor().to_integer();
    if f < 0 {
        0
    } else {
        f as usize
    }
}

/// `(B, ell)`: every admissible `X` with `1 <= |X| <= B` has
/// `|Gamma(X)| >= ell |X|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpanderParams {
    pub cap: Rational,
    pub ell: Rational,
}

impl ExpanderParams {
    pub fn new(cap: Rational, ell: Rational) -> Result<Self> {
        if cap < Rational::one() || ell <= Rational::zero() {
            return Err(Error::param(format!("need B >= 1 and ell > 0 (B={cap}, ell={ell})")));
        }
        Ok(Self { cap, ell })
    }

    /// Largest admissible set size, `floor(B)`.
    pub fn max_size(&self) -> usize {
        floor_usize(&self.cap)
    }
}

/// A set that expands too little: `|Gamma(X)| < ell |X|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionWitness {
    pub side: Side,
    pub set: Vec<Vertex>,
    pub gamma: usize,
}

pub type ExpanderVerdict = Verdict<ExpansionWitness>;

struct Pair<'a> {
    g: &'a Graph,
    parts: [&'a [Vertex]; 2],
    masks: [Vec<bool>; 2],
}

impl<'a> Pair<'a> {
    fn new(g: &'a Graph, v1: &'a [Vertex], v2: &'a [Vertex]) -> Result<Self> {
        graph::check_vertices(g, v1)?;
        graph::check_vertices(g, v2)?;
        let m1 = graph::mask(g.n(), v1);
        let m2 = graph::mask(g.n(), v2);
        if let Some(&v) = v2.iter().find(|&&v| m1[v]) {
            return Err(Error::Overlap(v));
        }
        Ok(Self {
            g,
            parts: [v1, v2],
            masks: [m1, m2],
        })
    }

    /// `|Gamma(X) ∩ other side|`, using `scratch` as a cleared flag buffer.
    fn gamma(&self, side: Side, set: &[Vertex], scratch: &mut [bool]) -> usize {
        let other = &self.masks[side.other().index()];
        let mut hit = Vec::new();
        for &x in set {
            for &y in self.g.neighbors(x) {
                if other[y] && !scratch[y] {
                    scratch[y] = true;
                    hit.push(y);
                }
            }
        }
        for &y in &hit {
            scratch[y] = false;
        }
        hit.len()
    }
}

fn violates(gamma: usize, size: usize, ell: &Rational) -> bool {
    ri(gamma) < *ell * ri(size)
}

/// Exact enumeration cost of [`check_bipartite_expander`].
pub fn expander_check_cost(a: usize, b: usize, params: &ExpanderParams) -> u128 {
    let cap = params.max_size();
    let side = |n: usize| (1..=cap.min(n)).fold(0u128, |acc, s| acc.saturating_add(binomial(n as u64, s as u64)));
    side(a).saturating_add(side(b))
}

/// Checks the bipartite expander property of `G[V1, V2]`.
///
/// Sampled mode tries, per side, every singleton, a greedily grown
/// low-expansion set from each of the lowest-degree vertices, and then random
/// subsets until `budget` sets have been examined.
pub fn check_bipartite_expander<R: Rng + ?Sized>(
    g: &Graph,
    v1: &[Vertex],
    v2: &[Vertex],
    params: &ExpanderParams,
    mode: Mode,
    budget: u64,
    rng: &mut R,
) -> Result<ExpanderVerdict> {
    let pair = Pair::new(g, v1, v2)?;
    let cap = params.max_size();
    let mut scratch = vec![false; g.n()];
    let mut checked = 0u64;
    match mode {
        Mode::Exact => {
            let needed = expander_check_cost(v1.len(), v2.len(), params);
            if needed > budget as u128 {
                return Err(Error::BudgetExceeded {
                    needed,
                    budget: budget as u128,
                });
            }
            for side in [Side::Left, Side::Right] {
                let part = pair.parts[side.index()];
                let mut set = Vec::with_capacity(cap);
                for s in 1..=cap.min(part.len()) {
                    let mut comb = Combinations::new(part.len(), s);
                    while let Some(idx) = comb.next_subset() {
                        checked += 1;
                        set.clear();
                        set.extend(idx.iter().map(|&i| part[i]));
                        let gamma = pair.gamma(side, &set, &mut scratch);
                        if violates(gamma, s, &params.ell) {
                            return Ok(Verdict::fail(
                                Mode::Exact,
                                checked,
                                ExpansionWitness {
                                    side,
                                    set: set.clone(),
                                    gamma,
                                },
                            ));
                        }
                    }
                }
            }
            Ok(Verdict::pass(Mode::Exact, checked))
        }
        Mode::Sampled => {
            for side in [Side::Left, Side::Right] {
                let alive = pair.parts[side.index()].to_vec();
                let found = greedy_violator(&pair, &alive, &pair.masks[side.other().index()], cap, &params.ell, &mut checked);
                if let Some((set, gamma)) = found {
                    return Ok(Verdict::fail(Mode::Sampled, checked, ExpansionWitness { side, set, gamma }));
                }
            }
            while checked < budget && cap > 0 {
                checked += 1;
                let side = if rng.random_bool(0.5) { Side::Left } else { Side::Right };
                let mut part = pair.parts[side.index()].to_vec();
                if part.is_empty() {
                    continue;
                }
                let s = rng.random_range(1..=cap.min(part.len()));
                let (set, _) = part.partial_shuffle(rng, s);
                let mut set = set.to_vec();
                set.sort_unstable();
                let gamma = pair.gamma(side, &set, &mut scratch);
                if violates(gamma, s, &params.ell) {
                    return Ok(Verdict::fail(Mode::Sampled, checked, ExpansionWitness { side, set, gamma }));
                }
            }
            Ok(Verdict::pass(Mode::Sampled, checked))
        }
    }
}

/// Re-evaluates an expansion witness against `G[V1, V2]`.
pub fn expansion_witness_holds(g: &Graph, v1: &[Vertex], v2: &[Vertex], ell: &Rational, w: &ExpansionWitness) -> bool {
    let Ok(pair) = Pair::new(g, v1, v2) else {
        return false;
    };
    let own = &pair.masks[w.side.index()];
    if w.set.is_empty() || !w.set.iter().all(|&v| own[v]) {
        return false;
    }
    let mut scratch = vec![false; g.n()];
    let gamma = pair.gamma(w.side, &w.set, &mut scratch);
    gamma == w.gamma && violates(gamma, w.set.len(), ell)
}

/// Greedy search for `X ⊆ alive` with `|X| <= cap` and
/// `|Gamma(X) ∩ other_alive| < ell |X|`.
///
/// Singletons are tried first. Then, from each vertex of low degree, a set is
/// grown by repeatedly adding the vertex that brings the fewest new
/// neighbours; the first size at which the set violates is returned.
fn greedy_violator(
    pair: &Pair<'_>,
    alive: &[Vertex],
    other_alive: &[bool],
    cap: usize,
    ell: &Rational,
    checked: &mut u64,
) -> Option<(Vec<Vertex>, usize)> {
    if cap == 0 || alive.is_empty() {
        return None;
    }
    let g = pair.g;
    let deg = |v: Vertex| g.neighbors(v).iter().filter(|&&y| other_alive[y]).count();
    let mut by_deg: Vec<(usize, Vertex)> = alive.iter().map(|&v| (deg(v), v)).collect();
    by_deg.sort_unstable();
    for &(d, v) in &by_deg {
        *checked += 1;
        if violates(d, 1, ell) {
            let gamma = d;
            return Some((vec![v], gamma));
        }
    }
    if cap < 2 {
        return None;
    }
    // Any violating set has every member of degree below ell * cap.
    let limit = *ell * ri(cap);
    let candidates: Vec<Vertex> = by_deg.iter().filter(|(d, _)| ri(*d) < limit).map(|&(_, v)| v).collect();
    let in_alive = {
        let mut m = vec![false; g.n()];
        for &v in alive {
            m[v] = true;
        }
        m
    };
    let mut covered = vec![false; g.n()];
    let mut in_set = vec![false; g.n()];
    for &start in &candidates {
        let mut set = vec![start];
        in_set[start] = true;
        let mut gamma_list: Vec<Vertex> = Vec::new();
        for &y in g.neighbors(start) {
            if other_alive[y] && !covered[y] {
                covered[y] = true;
                gamma_list.push(y);
            }
        }
        let mut result = None;
        while set.len() < cap {
            // Candidates: second neighbours through the current Gamma, plus
            // the global low-degree list as a fallback.
            let mut best: Option<(usize, Vertex)> = None;
            let mut consider = |x: Vertex, covered: &[bool]| {
                if in_set[x] || !in_alive[x] {
                    return;
                }
                let new = g.neighbors(x).iter().filter(|&&y| other_alive[y] && !covered[y]).count();
                if best.is_none_or(|(b, bv)| (new, x) < (b, bv)) {
                    best = Some((new, x));
                }
            };
            for &y in &gamma_list {
                for &x in g.neighbors(y) {
                    consider(x, &covered);
                }
            }
            for &x in candidates.iter().take(64) {
                consider(x, &covered);
            }
            let Some((_, x)) = best else { break };
            set.push(x);
            in_set[x] = true;
            for &y in g.neighbors(x) {
                if other_alive[y] && !covered[y] {
                    covered[y] = true;
                    gamma_list.push(y);
                }
            }
            *checked += 1;
            if violates(gamma_list.len(), set.len(), ell) {
                let mut s = set.clone();
                s.sort_unstable();
                result = Some((s, gamma_list.len()));
                break;
            }
        }
        for &y in &gamma_list {
            covered[y] = false;
        }
        for &x in &set {
            in_set[x] = false;
        }
        if result.is_some() {
            return result;
        }
    }
    None
}

/// Parameters of the cleanup: threshold `eps m`, final cap `a x`, ratio `b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanupParams {
    pub eps: Rational,
    pub m: usize,
    pub a: Rational,
    pub b: Rational,
}

impl CleanupParams {
    /// Validates `(2b + 2)(1 - eps - ab) > 1` and `(2b + 2) eps >= 1`.
    pub fn new(eps: Rational, m: usize, a: Rational, b: Rational) -> Result<Self> {
        let zero = Rational::zero();
        let one = Rational::one();
        if eps <= zero || a <= zero || b <= zero {
            return Err(Error::param("eps, a and b must be positive"));
        }
        let two = ri(2);
        let f = two * b + two;
        if f * (one - eps - a * b) <= one {
            return Err(Error::param(format!("(2b+2)(1-eps-ab) > 1 fails for eps={eps}, a={a}, b={b}")));
        }
        if f * eps < one {
            return Err(Error::param(format!("(2b+2)eps >= 1 fails for eps={eps}, b={b}")));
        }
        Ok(Self { eps, m, a, b })
    }

    /// Skips the parameter constraints; used where the pipeline applies the
    /// cleanup outside the regime in which it is guaranteed to succeed.
    pub fn unchecked(eps: Rational, m: usize, a: Rational, b: Rational) -> Self {
        Self { eps, m, a, b }
    }

    pub fn threshold(&self) -> Rational {
        self.eps * ri(self.m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Removal {
    pub side: Side,
    pub set: Vec<Vertex>,
    /// `|Gamma(set) ∩ other side|` at removal time, below `b |set|`.
    pub gamma: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum CleanupOutcome {
    Success { u1: Vec<Vertex>, u2: Vec<Vertex> },
    /// Two sets of size at least `eps m` with no edges between them.
    EpsWitness { a1: Vec<Vertex>, a2: Vec<Vertex> },
    /// Removals reached `eps m` on one side but the complement of its
    /// neighbourhood is too small for a witness; only possible when the size
    /// precondition fails.
    Inconclusive { side: Side },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanupTrace {
    pub removed_left: Vec<Removal>,
    pub removed_right: Vec<Removal>,
    pub outcome: CleanupOutcome,
    /// Whether `|V1|, |V2| >= (2b + 2) eps m` held.
    pub size_condition_met: bool,
    /// How violating sets were searched for: the greedy family, then the
    /// verification pass in the stated mode.
    pub search: String,
    pub verification: Option<Mode>,
}

impl CleanupTrace {
    /// Independent re-check of the outcome: success sets are large enough,
    /// witness sets are large enough and span no edges.
    pub fn verify(&self, g: &Graph, v1: &[Vertex], v2: &[Vertex], params: &CleanupParams) -> bool {
        let th = params.threshold();
        let one = Rational::one();
        match &self.outcome {
            CleanupOutcome::Success { u1, u2 } => {
                let ok = |u: &[Vertex], v: &[Vertex]| {
                    let vm = graph::mask(g.n(), v);
                    u.iter().all(|&x| vm[x]) && ri(u.len()) >= (one - params.eps) * ri(v.len())
                };
                ok(u1, v1) && ok(u2, v2)
            }
            CleanupOutcome::EpsWitness { a1, a2 } => {
                ri(a1.len()) >= th && ri(a2.len()) >= th && matches!(graph::count_pair_edges(g, a1, a2), Ok(0))
            }
            CleanupOutcome::Inconclusive { .. } => !self.size_condition_met,
        }
    }

    pub fn success_sets(&self) -> Option<(&[Vertex], &[Vertex])> {
        match &self.outcome {
            CleanupOutcome::Success { u1, u2 } => Some((u1, u2)),
            _ => None,
        }
    }
}

/// Iteratively removes sets of size at most `eps m` that expand by less than
/// `b` into the other side.
///
/// The search is greedy; once it finds nothing, `verify` (if given) runs
/// [`check_bipartite_expander`] with `(floor(eps m), b)` on the current pair,
/// falling back to sampled mode when exact enumeration exceeds the budget,
/// and any violator it finds is removed as well.
pub fn cleanup_to_expander(
    g: &Graph,
    v1: &[Vertex],
    v2: &[Vertex],
    params: &CleanupParams,
    verify: Option<(Mode, u64, RngStream)>,
) -> Result<CleanupTrace> {
    let pair = Pair::new(g, v1, v2)?;
    let th = params.threshold();
    let cap = floor_usize(&th);
    let f = ri(2) * params.b + ri(2);
    let size_condition_met = ri(v1.len()) >= f * th && ri(v2.len()) >= f * th;
    let mut alive = [v1.to_vec(), v2.to_vec()];
    let mut alive_mask = [pair.masks[0].clone(), pair.masks[1].clone()];
    let mut removed: [Vec<Removal>; 2] = [Vec::new(), Vec::new()];
    let mut removed_count = [0usize; 2];
    let mut verification = None;
    let mut rng = verify.map(|(_, _, s)| s.rng());
    loop {
        let mut found = None;
        for side in [Side::Left, Side::Right] {
            let i = side.index();
            let mut checked = 0;
            if let Some((set, gamma)) = greedy_violator(&pair, &alive[i], &alive_mask[1 - i], cap, &params.b, &mut checked) {
                found = Some((side, set, gamma));
                break;
            }
        }
        if found.is_none() {
            if let (Some((mode, budget, _)), Some(rng)) = (verify, rng.as_mut()) {
                if cap >= 1 {
                    let ep = ExpanderParams {
                        cap: ri(cap),
                        ell: params.b,
                    };
                    let mode = match mode {
                        Mode::Exact if expander_check_cost(alive[0].len(), alive[1].len(), &ep) > budget as u128 => Mode::Sampled,
                        m => m,
                    };
                    verification = Some(match (verification, mode) {
                        (Some(Mode::Sampled), _) => Mode::Sampled,
                        _ => mode,
                    });
                    let v = check_bipartite_expander(g, &alive[0], &alive[1], &ep, mode, budget, rng)?;
                    if let Some(w) = v.witness {
                        found = Some((w.side, w.set, w.gamma));
                    }
                }
            }
        }
        let Some((side, set, gamma)) = found else {
            return Ok(CleanupTrace {
                removed_left: std::mem::take(&mut removed[0]),
                removed_right: std::mem::take(&mut removed[1]),
                outcome: CleanupOutcome::Success {
                    u1: alive[0].clone(),
                    u2: alive[1].clone(),
                },
                size_condition_met,
                search: "greedy".into(),
                verification,
            });
        };
        let i = side.index();
        for &v in &set {
            alive_mask[i][v] = false;
        }
        alive[i].retain(|&v| alive_mask[i][v]);
        removed_count[i] += set.len();
        removed[i].push(Removal { side, set, gamma });
        if ri(removed_count[i]) >= th {
            // The union W of removed sets on this side expands by less than
            // b into what is left of the other side.
            let w: Vec<Vertex> = {
                let mut w: Vec<Vertex> = removed[i].iter().flat_map(|r| r.set.iter().copied()).collect();
                w.sort_unstable();
                w
            };
            let mut hit = vec![false; g.n()];
            for &x in &w {
                for &y in g.neighbors(x) {
                    hit[y] = true;
                }
            }
            let rest: Vec<Vertex> = pair.parts[1 - i].iter().copied().filter(|&y| !hit[y]).collect();
            let need = th.ceil().to_integer() as usize;
            let outcome = if rest.len() >= need.max(1) {
                let rest = rest[..need.max(1)].to_vec();
                if i == 0 {
                    CleanupOutcome::EpsWitness { a1: w, a2: rest }
                } else {
                    CleanupOutcome::EpsWitness { a1: rest, a2: w }
                }
            } else {
                CleanupOutcome::Inconclusive { side }
            };
            return Ok(CleanupTrace {
                removed_left: std::mem::take(&mut removed[0]),
                removed_right: std::mem::take(&mut removed[1]),
                outcome,
                size_condition_met,
                search: "greedy".into(),
                verification,
            });
        }
    }
}

/// Which part of the two-case corollary to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorollaryCase {
    /// Clusters of size at least `m/2 - 1`.
    One,
    /// Clusters of size at least `20 eps m`.
    Two,
}

/// Expander parameters as multiples of `x = min(|V1|, |V2|)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaledParams {
    pub cap_per_x: Rational,
    pub ell: Rational,
}

impl ScaledParams {
    pub fn at(&self, x: usize) -> ExpanderParams {
        ExpanderParams {
            cap: self.cap_per_x * ri(x),
            ell: self.ell,
        }
    }

    /// A bipartite `(A, ell + 1)`-expander is a plain `(2A, ell / 2)`-expander.
    pub fn to_plain(&self) -> ScaledParams {
        ScaledParams {
            cap_per_x: self.cap_per_x * ri(2),
            ell: (self.ell - Rational::one()) / ri(2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorollaryParams {
    pub bipartite: ScaledParams,
    pub plain: ScaledParams,
}

pub fn corollary_params(eps: &Rational, case: CorollaryCase) -> Result<CorollaryParams> {
    if *eps <= Rational::zero() || *eps >= Rational::new(1, 85) {
        return Err(Error::param(format!("eps must lie in (0, 1/85), got {eps}")));
    }
    let bipartite = match case {
        CorollaryCase::One => ScaledParams {
            cap_per_x: ri(6) * *eps,
            ell: Rational::one() / (ri(8) * *eps) + Rational::one(),
        },
        CorollaryCase::Two => ScaledParams {
            cap_per_x: Rational::new(1, 10),
            ell: ri(9),
        },
    };
    let plain = bipartite.to_plain();
    Ok(CorollaryParams { bipartite, plain })
}

/// Cleanup parameters `(a, b)` realising a corollary case.
pub fn corollary_cleanup(eps: &Rational, m: usize, case: CorollaryCase) -> Result<CleanupParams> {
    let c = corollary_params(eps, case)?;
    Ok(CleanupParams::unchecked(*eps, m, c.bipartite.cap_per_x, c.bipartite.ell))
}

/// `V = S ∪ T ∪ U` with `|S| = |T|`, no `S`-`T` edges and `U` spanned by
/// `path`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DfsPartition {
    pub s: Vec<Vertex>,
    pub t: Vec<Vertex>,
    pub u: Vec<Vertex>,
    pub path: VertexSeq,
}

impl DfsPartition {
    /// Independent check of all invariants against `g`.
    pub fn verify(&self, g: &Graph) -> bool {
        let n = g.n();
        let mut seen = vec![0u8; n];
        for (tag, set) in [(1u8, &self.s), (2, &self.t), (3, &self.u)] {
            for &v in set.iter() {
                if v >= n || seen[v] != 0 {
                    return false;
                }
                seen[v] = tag;
            }
        }
        if seen.contains(&0) || self.s.len() != self.t.len() {
            return false;
        }
        if self.s.iter().any(|&v| g.neighbors(v).iter().any(|&w| seen[w] == 2)) {
            return false;
        }
        let mut p = self.path.clone();
        p.sort_unstable();
        p == self.u && (self.path.len() <= 1 || graph::verify_path(g, &self.path).is_ok())
    }
}

/// Runs DFS and returns the first snapshot where the finished and unvisited
/// vertex sets have equal size; `path` is the DFS stack at that moment.
///
/// Neighbours and new roots are taken in ascending order unless `order`
/// supplies a stream, in which case each adjacency list is shuffled.
pub fn dfs_path_partition(g: &Graph, order: Option<RngStream>) -> DfsPartition {
    let n = g.n();
    let adj: Vec<Vec<Vertex>> = match order {
        None => (0..n).map(|v| g.neighbors(v).to_vec()).collect(),
        Some(s) => {
            let mut rng = s.rng();
            (0..n)
                .map(|v| {
                    let mut l = g.neighbors(v).to_vec();
                    l.shuffle(&mut rng);
                    l
                })
                .collect()
        }
    };
    // 0 = unvisited, 1 = on stack, 2 = finished
    let mut state = vec![0u8; n];
    let mut cursor = vec![0usize; n];
    let mut stack: Vec<Vertex> = Vec::new();
    let (mut finished, mut unvisited) = (0usize, n);
    let mut next_root = 0;
    loop {
        if finished == unvisited {
            break;
        }
        if let Some(&v) = stack.last() {
            let mut pushed = false;
            while cursor[v] < adj[v].len() {
                let w = adj[v][cursor[v]];
                cursor[v] += 1;
                if state[w] == 0 {
                    state[w] = 1;
                    stack.push(w);
                    unvisited -= 1;
                    pushed = true;
                    break;
                }
            }
            if !pushed {
                stack.pop();
                state[v] = 2;
                finished += 1;
            }
        } else {
            while state[next_root] != 0 {
                next_root += 1;
            }
            state[next_root] = 1;
            stack.push(next_root);
            unvisited -= 1;
        }
    }
    let pick = |tag: u8| (0..n).filter(|&v| state[v] == tag).collect::<Vec<_>>();
    DfsPartition {
        s: pick(2),
        t: pick(0),
        u: pick(1),
        path: stack,
    }
}

/// Long path by randomized DFS with a fewest-free-neighbours rule, extended
/// by rotations at both ends. Restarts run in parallel on
/// `stream.child(i)`; the longest result wins (ties to the lowest index).
pub fn longest_path_greedy(g: &Graph, stream: RngStream, restarts: usize) -> VertexSeq {
    if g.n() == 0 {
        return Vec::new();
    }
    let best = (0..restarts.max(1))
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.child(i as u64).rng();
            let p = one_path(g, &mut rng);
            (p.len(), std::cmp::Reverse(i), p)
        })
        .max_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)))
        .map(|t| t.2)
        .unwrap_or_default();
    debug_assert!(best.len() <= 1 || graph::verify_path(g, &best).is_ok());
    best
}

/// Rotation-extension inside the 2-core (where every endpoint has a pivot),
/// then each end is continued into the trees hanging off the core.
fn one_path<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> VertexSeq {
    let core = two_core(g);
    let mut path = if core.is_empty() {
        core_path(g, rng)
    } else {
        let (h, map) = graph::induced_subgraph(g, &core).expect("core vertices are valid");
        core_path(&h, rng).into_iter().map(|v| map[v]).collect()
    };
    let mut on = graph::mask(g.n(), &path);
    for _ in 0..2 {
        let end = *path.last().unwrap();
        let tail = deepest_branch(g, end, &on);
        for &v in &tail {
            on[v] = true;
        }
        path.extend(tail);
        path.reverse();
    }
    path
}

/// Vertices surviving repeated removal of degree-at-most-1 vertices.
fn two_core(g: &Graph) -> Vec<Vertex> {
    let n = g.n();
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut gone = vec![false; n];
    let mut stack: Vec<Vertex> = (0..n).filter(|&v| deg[v] <= 1).collect();
    while let Some(v) = stack.pop() {
        if gone[v] {
            continue;
        }
        gone[v] = true;
        for &w in g.neighbors(v) {
            if !gone[w] {
                deg[w] -= 1;
                if deg[w] == 1 {
                    stack.push(w);
                }
            }
        }
    }
    (0..n).filter(|&v| !gone[v]).collect()
}

/// Longest path leaving `from` through vertices not in `blocked`, by DFS
/// over the off-path part (a forest when `from` sits on the 2-core, where
/// the search is exact); capped to keep cyclic leftovers cheap.
fn deepest_branch(g: &Graph, from: Vertex, blocked: &[bool]) -> VertexSeq {
    let mut best: VertexSeq = Vec::new();
    let mut cur: VertexSeq = Vec::new();
    let mut on = blocked.to_vec();
    let mut steps = 0usize;
    let mut stack: Vec<(Vertex, usize)> = vec![(from, 0)];
    while let Some(&mut (v, ref mut i)) = stack.last_mut() {
        steps += 1;
        if steps > 50 * g.n() + 100 {
            break;
        }
        if let Some(&w) = g.neighbors(v)[*i..].iter().find(|&&w| !on[w]) {
            *i = g.neighbors(v).iter().position(|&x| x == w).unwrap() + 1;
            on[w] = true;
            cur.push(w);
            if cur.len() > best.len() {
                best = cur.clone();
            }
            stack.push((w, 0));
        } else {
            stack.pop();
            if let Some(w) = cur.pop() {
                on[w] = false;
            }
            if stack.is_empty() {
                break;
            }
        }
    }
    best
}

fn core_path<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> VertexSeq {
    let n = g.n();
    let mut on_path = vec![false; n];
    let mut pos = vec![usize::MAX; n];
    let start = rng.random_range(0..n);
    let mut path = vec![start];
    on_path[start] = true;
    pos[start] = 0;
    let free_deg = |v: Vertex, on: &[bool]| g.neighbors(v).iter().filter(|&&w| !on[w]).count();
    // Extends the tail while possible, preferring the free neighbour with
    // the fewest onward options; dead ends are left for the very last step
    // since they admit no rotation.
    let extend = |path: &mut Vec<Vertex>, on: &mut Vec<bool>, pos: &mut Vec<usize>, rng: &mut R| loop {
        let end = *path.last().unwrap();
        let mut best: Option<(usize, u32, Vertex)> = None;
        for &w in g.neighbors(end) {
            if !on[w] {
                let f = free_deg(w, on);
                if f == 0 {
                    continue;
                }
                let key = (f, rng.random::<u32>(), w);
                if best.is_none_or(|b| key < b) {
                    best = Some(key);
                }
            }
        }
        match best {
            Some((.., w)) => {
                on[w] = true;
                pos[w] = path.len();
                path.push(w);
            }
            None => break,
        }
    };
    extend(&mut path, &mut on_path, &mut pos, rng);
    // Rotation-extension: a breadth-first search over rotated paths (keyed
    // by endpoint) until one has a free neighbour, at each end in turn.
    let mut budget = 100 * n + 1000;
    let mut stuck_ends = 0;
    while budget > 0 && stuck_ends < 2 {
        match rotate_to_live(g, &path, &on_path, &mut budget) {
            Some(p) => {
                path = p;
                for (j, &v) in path.iter().enumerate() {
                    pos[v] = j;
                }
                extend(&mut path, &mut on_path, &mut pos, rng);
                stuck_ends = 0;
            }
            None => {
                stuck_ends += 1;
                path.reverse();
                for (j, &v) in path.iter().enumerate() {
                    pos[v] = j;
                }
            }
        }
    }
    path
}

/// Pósa rotations of `path` at its last vertex, explored breadth-first with
/// at most `ROTATION_STATES` distinct endpoints; returns the first rotated
/// path whose end has a neighbour off the path.
fn rotate_to_live(g: &Graph, path: &[Vertex], on_path: &[bool], budget: &mut usize) -> Option<VertexSeq> {
    const ROTATION_STATES: usize = 256;
    let k = path.len() - 1;
    let mut seen_end = std::collections::HashSet::new();
    seen_end.insert(path[k]);
    let mut queue = std::collections::VecDeque::from([path.to_vec()]);
    let mut pos = vec![usize::MAX; g.n()];
    while let Some(p) = queue.pop_front() {
        if *budget == 0 {
            return None;
        }
        *budget = budget.saturating_sub(1 + k / 32);
        for (j, &v) in p.iter().enumerate() {
            pos[v] = j;
        }
        let end = p[k];
        for &w in g.neighbors(end) {
            let i = pos[w];
            if !on_path[w] || i + 1 >= k {
                continue;
            }
            let new_end = p[i + 1];
            if !seen_end.insert(new_end) {
                continue;
            }
            let mut q = p.clone();
            q[i + 1..].reverse();
            let onward = |x: Vertex| g.neighbors(x).iter().any(|&y| !on_path[y]);
            if g.neighbors(new_end).iter().any(|&x| !on_path[x] && onward(x)) {
                return Some(q);
            }
            if seen_end.len() < ROTATION_STATES {
                queue.push_back(q);
            }
        }
    }
    None
}
