//! Edge colourings and constructive monochromatic odd cycles: bipartiteness,
//! shortest odd cycles, vertex-disjoint paths, block decomposition, diameter
//! bounds and the three-step long odd cycle search.

use std::collections::VecDeque;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expander;
use crate::graph::{self, Graph, Vertex, VertexSeq};
use crate::rng::RngStream;
use crate::{Error, Result};

const NONE: usize = usize::MAX;

/// A colour in `0..r` for every edge, aligned with `Graph::edges()` order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeColoring {
    pub r: usize,
    pub edges: Vec<(Vertex, Vertex)>,
    pub colors: Vec<usize>,
}

impl EdgeColoring {
    pub fn new(g: &Graph, r: usize, colors: Vec<usize>) -> Result<Self> {
        let edges: Vec<_> = g.edges().collect();
        if r == 0 {
            return Err(Error::param("need at least one colour"));
        }
        if colors.len() != edges.len() {
            return Err(Error::param(format!("{} colours for {} edges", colors.len(), edges.len())));
        }
        if let Some(c) = colors.iter().find(|&&c| c >= r) {
            return Err(Error::param(format!("colour {c} out of range for r = {r}")));
        }
        Ok(Self { r, edges, colors })
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.r];
        for &c in &self.colors {
            s[c] += 1;
        }
        s
    }
}

/// Independent uniform colours.
pub fn color_random<R: Rng + ?Sized>(g: &Graph, r: usize, rng: &mut R) -> Result<EdgeColoring> {
    if r == 0 {
        return Err(Error::param("need at least one colour"));
    }
    let colors = (0..g.edge_count()).map(|_| rng.random_range(0..r)).collect();
    EdgeColoring::new(g, r, colors)
}

/// Colour 0 on edges crossing `side`, colour 1 inside either part.
pub fn cut_coloring(g: &Graph, side: &[bool]) -> Result<EdgeColoring> {
    if side.len() != g.n() {
        return Err(Error::param("side mask must cover every vertex"));
    }
    let colors = g.edges().map(|(u, v)| usize::from(side[u] == side[v])).collect();
    EdgeColoring::new(g, 2, colors)
}

/// Colourings used by the Ramsey experiments. Vertex classes are index
/// ranges, which is harmless on exchangeable random hosts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColoringPattern {
    Random,
    /// `r = 2`: colour 0 across the halves, colour 1 inside.
    BalancedCut,
    /// `r = 2`: parts of sizes `n/3` and `2n/3`; colour 1 only inside the
    /// larger part.
    ThirdSplit,
    /// `r = 3`: quarters `A, B, C, D`; `AB, CD` get 0, `AD, BC` get 1, the
    /// rest 2.
    Abcd,
    /// Halve recursively; cross edges at depth `j` get colour `r - 1 - j`,
    /// the last colour class is what remains inside the pieces.
    Doubling,
}

impl ColoringPattern {
    /// Number of colours the pattern needs, if fixed.
    pub fn required_r(self) -> Option<usize> {
        match self {
            ColoringPattern::BalancedCut | ColoringPattern::ThirdSplit => Some(2),
            ColoringPattern::Abcd => Some(3),
            ColoringPattern::Random | ColoringPattern::Doubling => None,
        }
    }
}

impl std::str::FromStr for ColoringPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(ColoringPattern::Random),
            "balanced-cut" => Ok(ColoringPattern::BalancedCut),
            "third-split" => Ok(ColoringPattern::ThirdSplit),
            "abcd" => Ok(ColoringPattern::Abcd),
            "doubling" => Ok(ColoringPattern::Doubling),
            other => Err(Error::param(format!("unknown colouring pattern {other:?}"))),
        }
    }
}

fn doubling_color(mut lo: usize, mut hi: usize, u: Vertex, v: Vertex, r: usize) -> usize {
    let mut c = r - 1;
    while c > 0 {
        let mid = lo + (hi - lo) / 2;
        match (u < mid, v < mid) {
            (true, true) => hi = mid,
            (false, false) => lo = mid,
            _ => return c,
        }
        c -= 1;
    }
    0
}

pub fn pattern_coloring<R: Rng + ?Sized>(g: &Graph, pattern: ColoringPattern, r: usize, rng: &mut R) -> Result<EdgeColoring> {
    if let Some(req) = pattern.required_r() {
        if r != req {
            return Err(Error::param(format!("pattern {pattern:?} needs r = {req}, got {r}")));
        }
    }
    let n = g.n();
    let colors: Vec<usize> = match pattern {
        ColoringPattern::Random => return color_random(g, r, rng),
        ColoringPattern::BalancedCut => {
            let side: Vec<bool> = (0..n).map(|v| v < n / 2).collect();
            return cut_coloring(g, &side);
        }
        ColoringPattern::ThirdSplit => g.edges().map(|(u, v)| usize::from(u >= n / 3 && v >= n / 3)).collect(),
        ColoringPattern::Abcd => {
            let q = |v: usize| (4 * v / n.max(1)).min(3);
            g.edges()
                .map(|(u, v)| match (q(u).min(q(v)), q(u).max(q(v))) {
                    (0, 1) | (2, 3) => 0,
                    (0, 3) | (1, 2) => 1,
                    _ => 2,
                })
                .collect()
        }
        ColoringPattern::Doubling => {
            if r == 0 {
                return Err(Error::param("need at least one colour"));
            }
            g.edges().map(|(u, v)| doubling_color(0, n, u, v, r)).collect()
        }
    };
    EdgeColoring::new(g, r, colors)
}

/// The spanning subgraph of colour `i`.
pub fn color_class(g: &Graph, coloring: &EdgeColoring, i: usize) -> Result<Graph> {
    if i >= coloring.r {
        return Err(Error::param(format!("colour {i} out of range for r = {}", coloring.r)));
    }
    if coloring.edges.len() != g.edge_count() {
        return Err(Error::param("colouring belongs to another graph"));
    }
    let edges = coloring
        .edges
        .iter()
        .zip(&coloring.colors)
        .filter(|(_, &c)| c == i)
        .map(|(&e, _)| e);
    Graph::from_edges(g.n(), edges)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Bipartiteness {
    /// `side[v]` is the colour of `v`.
    Bipartite { side: Vec<bool> },
    OddCycle { cycle: VertexSeq },
}

impl Bipartiteness {
    pub fn is_bipartite(&self) -> bool {
        matches!(self, Bipartiteness::Bipartite { .. })
    }
}

/// BFS layering; a same-layer edge closes an odd cycle through the two BFS
/// tree paths down to their meeting point.
pub fn is_bipartite(g: &Graph) -> Bipartiteness {
    let n = g.n();
    let mut depth = vec![NONE; n];
    let mut parent = vec![NONE; n];
    for s in 0..n {
        if depth[s] != NONE {
            continue;
        }
        depth[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &w in g.neighbors(u) {
                if depth[w] == NONE {
                    depth[w] = depth[u] + 1;
                    parent[w] = u;
                    q.push_back(w);
                } else if depth[w] == depth[u] {
                    let (mut a, mut b) = (u, w);
                    let mut left = vec![a];
                    let mut right = vec![b];
                    while a != b {
                        a = parent[a];
                        b = parent[b];
                        left.push(a);
                        right.push(b);
                    }
                    right.pop();
                    right.reverse();
                    // u .. lca .. w; the edge w-u closes it.
                    left.extend(right);
                    return Bipartiteness::OddCycle { cycle: left };
                }
            }
        }
    }
    Bipartiteness::Bipartite {
        side: depth.iter().map(|&d| d % 2 == 1).collect(),
    }
}

/// A shortest odd cycle, by BFS from every vertex in the bipartite double
/// cover; the closed odd walk of minimum length is always a cycle.
pub fn shortest_odd_cycle(g: &Graph) -> Option<VertexSeq> {
    let n = g.n();
    let results: Vec<(usize, Vertex)> = (0..n)
        .into_par_iter()
        .filter_map(|s| {
            let d = parity_bfs(g, s, None).0[2 * s + 1];
            (d != NONE).then_some((d, s))
        })
        .collect();
    let &(_, s) = results.iter().min()?;
    let (_, parent) = parity_bfs(g, s, None);
    let mut walk = Vec::new();
    let mut x = 2 * s + 1;
    while x != 2 * s {
        walk.push(x / 2);
        x = parent[x];
    }
    walk.reverse();
    let mut cycle = vec![s];
    cycle.extend(walk.into_iter().take_while(|&v| v != s));
    debug_assert!(graph::verify_cycle(g, &cycle, cycle.len()).is_ok());
    Some(cycle)
}

/// Distances and parents in the double cover, state `2v + parity`.
fn parity_bfs(g: &Graph, s: Vertex, stop: Option<usize>) -> (Vec<usize>, Vec<usize>) {
    let mut dist = vec![NONE; 2 * g.n()];
    let mut parent = vec![NONE; 2 * g.n()];
    dist[2 * s] = 0;
    let mut q = VecDeque::from([2 * s]);
    while let Some(x) = q.pop_front() {
        if stop.is_some_and(|c| dist[x] >= c) {
            break;
        }
        let (u, p) = (x / 2, x % 2);
        for &w in g.neighbors(u) {
            let y = 2 * w + (1 - p);
            if dist[y] == NONE {
                dist[y] = dist[x] + 1;
                parent[y] = x;
                q.push_back(y);
            }
        }
    }
    (dist, parent)
}

/// Shortest path from `s` to `t` avoiding `blocked` (except the endpoints).
fn bfs_path(g: &Graph, s: Vertex, t: Vertex, blocked: &[bool]) -> Option<VertexSeq> {
    let mut parent = vec![NONE; g.n()];
    parent[s] = s;
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        if u == t {
            let mut p = vec![t];
            let mut x = t;
            while x != s {
                x = parent[x];
                p.push(x);
            }
            p.reverse();
            return Some(p);
        }
        for &w in g.neighbors(u) {
            if parent[w] == NONE && (w == t || !blocked[w]) {
                parent[w] = u;
                q.push_back(w);
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Disjointness {
    /// Paths share no vertex at all.
    Full,
    /// Paths share no interior vertex; endpoints may repeat and each
    /// `A`-`B` edge is usable once.
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DisjointOutcome {
    /// Each path starts in `A`, ends in `B` and has no other vertex in
    /// `A` or `B`.
    Paths { paths: Vec<VertexSeq> },
    /// Removing these vertices and edges separates `A` from `B`; together
    /// there are fewer than `count` of them.
    Cut {
        vertices: Vec<Vertex>,
        edges: Vec<(Vertex, Vertex)>,
    },
}

struct Flow {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
}

impl Flow {
    fn new(nodes: usize) -> Self {
        Self {
            head: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn arc(&mut self, u: usize, v: usize, c: i64) {
        self.head[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.head[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
    }

    fn augment(&mut self, s: usize, t: usize) -> bool {
        let mut via = vec![NONE; self.head.len()];
        let mut seen = vec![false; self.head.len()];
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &a in &self.head[u] {
                let v = self.to[a];
                if self.cap[a] > 0 && !seen[v] {
                    seen[v] = true;
                    via[v] = a;
                    q.push_back(v);
                }
            }
        }
        if !seen[t] {
            return false;
        }
        let mut v = t;
        while v != s {
            let a = via[v];
            self.cap[a] -= 1;
            self.cap[a ^ 1] += 1;
            v = self.to[a ^ 1];
        }
        true
    }

    fn reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.head.len()];
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &a in &self.head[u] {
                if self.cap[a] > 0 && !seen[self.to[a]] {
                    seen[self.to[a]] = true;
                    q.push_back(self.to[a]);
                }
            }
        }
        seen
    }
}

/// Up to `count` disjoint `A`-`B` paths by unit augmentations on the
/// vertex-split network, or a separating set smaller than `count`.
pub fn disjoint_paths(g: &Graph, a: &[Vertex], b: &[Vertex], count: usize, mode: Disjointness) -> Result<DisjointOutcome> {
    let n = g.n();
    let am = graph::mask(n, a);
    let bm = graph::mask(n, b);
    if let Some(v) = a.iter().copied().find(|&v| v >= n) {
        return Err(Error::VertexOutOfRange { vertex: v, n });
    }
    if let Some(v) = b.iter().copied().find(|&v| v >= n) {
        return Err(Error::VertexOutOfRange { vertex: v, n });
    }
    if let Some(v) = (0..n).find(|&v| am[v] && bm[v]) {
        return Err(Error::Overlap(v));
    }
    let big = (count + 1) as i64;
    let (src, snk) = (2 * n, 2 * n + 1);
    let mut f = Flow::new(2 * n + 2);
    let terminal_cap = |v: usize| match mode {
        Disjointness::Internal if am[v] || bm[v] => big,
        _ => 1,
    };
    for v in 0..n {
        f.arc(2 * v, 2 * v + 1, terminal_cap(v));
        if am[v] {
            f.arc(src, 2 * v, big);
        }
        if bm[v] {
            f.arc(2 * v + 1, snk, big);
        }
    }
    // Index of the first u -> v arc, for recovering direct edges.
    let mut direct = Vec::new();
    for (u, v) in g.edges() {
        for (x, y) in [(u, v), (v, u)] {
            let c = if mode == Disjointness::Internal && am[x] && bm[y] {
                direct.push((f.to.len(), x, y));
                1
            } else {
                big
            };
            f.arc(2 * x + 1, 2 * y, c);
        }
    }
    let mut flow = 0;
    while flow < count && f.augment(src, snk) {
        flow += 1;
    }
    if flow < count {
        let seen = f.reachable(src);
        let vertices: Vec<Vertex> = (0..n).filter(|&v| seen[2 * v] && !seen[2 * v + 1]).collect();
        let edges: Vec<_> = direct
            .iter()
            .filter(|&&(arc, x, y)| seen[2 * x + 1] && !seen[2 * y] && f.cap[arc] == 0)
            .map(|&(_, x, y)| (x.min(y), x.max(y)))
            .collect();
        return Ok(DisjointOutcome::Cut { vertices, edges });
    }
    // Decompose: used flow on arc a is the reverse residual cap[a ^ 1].
    let mut used: Vec<i64> = (0..f.to.len()).map(|a| if a % 2 == 0 { f.cap[a ^ 1] } else { 0 }).collect();
    let mut paths = Vec::with_capacity(count);
    for _ in 0..count {
        let mut walk = vec![src];
        let mut pos = vec![NONE; f.head.len()];
        pos[src] = 0;
        let mut u = src;
        while u != snk {
            let a = *f.head[u]
                .iter()
                .find(|&&a| a % 2 == 0 && used[a] > 0)
                .expect("flow conservation");
            used[a] -= 1;
            u = f.to[a];
            if pos[u] != NONE {
                // Drop a circulation.
                for x in walk.drain(pos[u] + 1..) {
                    pos[x] = NONE;
                }
            } else {
                pos[u] = walk.len();
                walk.push(u);
            }
        }
        let mut verts: Vec<Vertex> = walk[1..walk.len() - 1].iter().step_by(2).map(|&x| x / 2).collect();
        let end = verts.iter().position(|&v| bm[v]).expect("path reaches B");
        verts.truncate(end + 1);
        let start = verts.iter().rposition(|&v| am[v]).expect("path starts in A");
        paths.push(verts.split_off(start));
    }
    Ok(DisjointOutcome::Paths { paths })
}

/// Checks either outcome against its definition.
pub fn verify_disjoint_outcome(g: &Graph, a: &[Vertex], b: &[Vertex], count: usize, mode: Disjointness, out: &DisjointOutcome) -> bool {
    let n = g.n();
    let am = graph::mask(n, a);
    let bm = graph::mask(n, b);
    match out {
        DisjointOutcome::Paths { paths } => {
            let mut seen = vec![0usize; n];
            let mut edges_used = std::collections::HashSet::new();
            if paths.len() != count {
                return false;
            }
            for p in paths {
                if p.is_empty() || graph::verify_path(g, p).is_err() || !am[p[0]] || !bm[p[p.len() - 1]] {
                    return false;
                }
                if p[1..p.len() - 1].iter().any(|&v| am[v] || bm[v]) {
                    return false;
                }
                let counted: &[Vertex] = match mode {
                    Disjointness::Full => p,
                    Disjointness::Internal => &p[1..p.len() - 1],
                };
                for &v in counted {
                    seen[v] += 1;
                    if seen[v] > 1 {
                        return false;
                    }
                }
                if mode == Disjointness::Internal && p.len() == 2 && !edges_used.insert((p[0], p[1])) {
                    return false;
                }
            }
            true
        }
        DisjointOutcome::Cut { vertices, edges } => {
            if vertices.len() + edges.len() >= count {
                return false;
            }
            if mode == Disjointness::Full && !edges.is_empty() {
                return false;
            }
            let cut = graph::mask(n, vertices);
            let h = g.filter_edges(|u, v| !edges.contains(&(u.min(v), u.max(v))));
            let mut seen = cut.clone();
            let mut q: VecDeque<Vertex> = a.iter().copied().filter(|&v| !cut[v]).collect();
            for &v in &q {
                seen[v] = true;
            }
            while let Some(u) = q.pop_front() {
                if bm[u] {
                    return false;
                }
                for &w in h.neighbors(u) {
                    if !seen[w] {
                        seen[w] = true;
                        q.push_back(w);
                    }
                }
            }
            true
        }
    }
}

/// Blocks (maximal 2-connected pieces, bridges and isolated vertices) and
/// the cut vertices joining them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockCutTree {
    pub n: usize,
    pub blocks: Vec<Vec<Vertex>>,
    pub cut_vertices: Vec<Vertex>,
    /// `(block, index into cut_vertices)` for every cut vertex in a block.
    pub incidence: Vec<(usize, usize)>,
}

impl BlockCutTree {
    /// The incidence structure is a forest and block sizes sum to at most
    /// `2n`.
    pub fn check(&self) -> bool {
        let total: usize = self.blocks.iter().map(Vec::len).sum();
        if total > 2 * self.n.max(1) {
            return false;
        }
        let h = self.blocks.len();
        let mut uf: Vec<usize> = (0..h + self.cut_vertices.len()).collect();
        fn find(uf: &mut [usize], mut x: usize) -> usize {
            while uf[x] != x {
                uf[x] = uf[uf[x]];
                x = uf[x];
            }
            x
        }
        for &(bl, c) in &self.incidence {
            let (x, y) = (find(&mut uf, bl), find(&mut uf, h + c));
            if x == y {
                return false;
            }
            uf[x] = y;
        }
        true
    }
}

/// Lowpoint decomposition with an explicit edge stack.
pub fn block_cut_tree(g: &Graph) -> BlockCutTree {
    let n = g.n();
    let mut disc = vec![NONE; n];
    let mut low = vec![0; n];
    let mut is_cut = vec![false; n];
    let mut blocks = Vec::new();
    let mut time = 0;
    let mut estack: Vec<(Vertex, Vertex)> = Vec::new();
    for root in 0..n {
        if disc[root] != NONE {
            continue;
        }
        if g.degree(root) == 0 {
            disc[root] = time;
            time += 1;
            blocks.push(vec![root]);
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        let mut root_children = 0;
        let mut stack = vec![(root, NONE, 0usize)];
        while let Some(&mut (v, parent, ref mut i)) = stack.last_mut() {
            if *i < g.neighbors(v).len() {
                let w = g.neighbors(v)[*i];
                *i += 1;
                if disc[w] == NONE {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    estack.push((v, w));
                    if v == root {
                        root_children += 1;
                    }
                    stack.push((w, v, 0));
                } else if w != parent && disc[w] < disc[v] {
                    estack.push((v, w));
                    low[v] = low[v].min(disc[w]);
                }
                continue;
            }
            stack.pop();
            if parent == NONE {
                continue;
            }
            low[parent] = low[parent].min(low[v]);
            if low[v] >= disc[parent] {
                if parent != root {
                    is_cut[parent] = true;
                }
                let mut block = Vec::new();
                while let Some((x, y)) = estack.pop() {
                    block.push(x);
                    block.push(y);
                    if (x, y) == (parent, v) {
                        break;
                    }
                }
                block.sort_unstable();
                block.dedup();
                blocks.push(block);
            }
        }
        if root_children > 1 {
            is_cut[root] = true;
        }
    }
    let cut_vertices: Vec<Vertex> = (0..n).filter(|&v| is_cut[v]).collect();
    let mut index = vec![NONE; n];
    for (i, &c) in cut_vertices.iter().enumerate() {
        index[c] = i;
    }
    let incidence = blocks
        .iter()
        .enumerate()
        .flat_map(|(bi, bl)| bl.iter().filter(|&&v| is_cut[v]).map(move |&v| (bi, v)).collect::<Vec<_>>())
        .map(|(bi, v)| (bi, index[v]))
        .collect();
    BlockCutTree {
        n,
        blocks,
        cut_vertices,
        incidence,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiameterReport {
    pub diameter: usize,
    /// `ceil(3k / (delta + 1)) - 1`.
    pub bound: usize,
    pub holds: bool,
}

/// Exact diameter against the minimum-degree bound.
pub fn diameter_check(g: &Graph) -> Result<DiameterReport> {
    let k = g.n();
    if k == 0 || !g.is_connected() {
        return Err(Error::param("diameter bound needs a connected graph"));
    }
    let delta = g.min_degree();
    if delta < 2 {
        return Err(Error::param(format!("minimum degree {delta} is below 2")));
    }
    let diameter = (0..k)
        .into_par_iter()
        .map(|s| g.bfs_distances(s).into_iter().max().unwrap_or(0))
        .max()
        .unwrap_or(0);
    let bound = (3 * k).div_ceil(delta + 1) - 1;
    Ok(DiameterReport {
        diameter,
        bound,
        holds: diameter <= bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongOddParams {
    /// Step II aims for a cycle of length about `delta_prime * k / 2`.
    pub delta_prime: f64,
    /// Allowed excess over the Step II target.
    pub slack: usize,
    pub restarts: usize,
    pub stream: RngStream,
}

impl LongOddParams {
    pub fn new(stream: RngStream) -> Self {
        Self {
            delta_prime: 0.1,
            slack: 120,
            restarts: 8,
            stream,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub cycle: Option<VertexSeq>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OddCycleCertificate {
    pub cycle: VertexSeq,
    pub stages: Vec<StageRecord>,
}

impl OddCycleCertificate {
    pub fn len(&self) -> usize {
        self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycle.is_empty()
    }

    pub fn verify(&self, g: &Graph) -> bool {
        self.cycle.len() % 2 == 1 && graph::verify_cycle(g, &self.cycle, self.cycle.len()).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum OddCycleError {
    #[error("graph is bipartite")]
    Bipartite,
}

/// Cycle vertices from position `i` to `j` going forward, inclusive.
fn arc(c: &[Vertex], i: usize, j: usize) -> Vec<Vertex> {
    let l = c.len();
    let mut out = vec![c[i]];
    let mut x = i;
    while x != j {
        x = (x + 1) % l;
        out.push(c[x]);
    }
    out
}

/// Greedy path from `start` inside `allowed`, preferring neighbours with
/// few free neighbours, stopping at `target` edges.
fn anchored_path(g: &Graph, start: Vertex, allowed: &[bool], target: usize) -> VertexSeq {
    let mut on = vec![false; g.n()];
    on[start] = true;
    let mut p = vec![start];
    while p.len() <= target {
        let u = *p.last().unwrap();
        let free = |w: Vertex| g.neighbors(w).iter().filter(|&&x| allowed[x] && !on[x]).count();
        let next = g
            .neighbors(u)
            .iter()
            .copied()
            .filter(|&w| allowed[w] && !on[w])
            .min_by_key(|&w| (free(w), w));
        match next {
            Some(w) => {
                on[w] = true;
                p.push(w);
            }
            None => break,
        }
    }
    p
}

/// A long cycle of `g`: greedy long paths closed through the farthest
/// neighbour of either end.
fn long_cycle(g: &Graph, stream: RngStream, restarts: usize) -> Option<VertexSeq> {
    let mut best: Option<VertexSeq> = None;
    for comp in g.components() {
        if comp.len() < 3 {
            continue;
        }
        let (h, map) = graph::induced_subgraph(g, &comp).ok()?;
        let p = expander::longest_path_greedy(&h, stream.child(comp[0] as u64), restarts);
        let mut cand: Option<VertexSeq> = None;
        for q in [p.clone(), p.iter().rev().copied().collect::<Vec<_>>()] {
            if let Some(j) = (2..q.len()).rev().find(|&j| h.has_edge(q[0], q[j])) {
                if cand.as_ref().is_none_or(|c| c.len() < j + 1) {
                    cand = Some(q[..=j].to_vec());
                }
            }
        }
        if let Some(c) = cand {
            let c: Vec<Vertex> = c.into_iter().map(|v| map[v]).collect();
            if best.as_ref().is_none_or(|b| b.len() < c.len()) {
                best = Some(c);
            }
        }
    }
    best
}

/// Joins an odd cycle `c1` and a disjoint cycle `c2` through two disjoint
/// paths, taking the long arc of `c2` and the arc of `c1` that makes the
/// total odd. Returns the longest such cycle over all path pairs.
fn parity_fix(g: &Graph, c1: &[Vertex], c2: &[Vertex]) -> Option<VertexSeq> {
    let want = c1.len().min(c2.len());
    let mut paths = None;
    for cnt in (2..=want).rev() {
        if let Ok(DisjointOutcome::Paths { paths: p }) = disjoint_paths(g, c1, c2, cnt, Disjointness::Full) {
            paths = Some(p);
            break;
        }
        if cnt == want {
            // Fall back to the pair count quickly when the full set fails.
            if let Ok(DisjointOutcome::Paths { paths: p }) = disjoint_paths(g, c1, c2, 2, Disjointness::Full) {
                paths = Some(p);
            }
            break;
        }
    }
    let paths = paths?;
    let pos = |c: &[Vertex], v: Vertex| c.iter().position(|&x| x == v).expect("endpoint on cycle");
    let mut best: Option<VertexSeq> = None;
    for i in 0..paths.len() {
        for j in i + 1..paths.len() {
            let (p1, p2) = (&paths[i], &paths[j]);
            let (v1, u1) = (pos(c1, p1[0]), pos(c2, p1[p1.len() - 1]));
            let (v2, u2) = (pos(c1, p2[0]), pos(c2, p2[p2.len() - 1]));
            let fwd = arc(c2, u1, u2);
            let bwd = arc(c2, u2, u1);
            let long2: Vec<Vertex> = if fwd.len() >= bwd.len() { fwd } else { bwd.into_iter().rev().collect() };
            let base = (p1.len() - 1) + (long2.len() - 1) + (p2.len() - 1);
            for back in [arc(c1, v2, v1), arc(c1, v1, v2).into_iter().rev().collect::<Vec<_>>()] {
                if (base + back.len() - 1).is_multiple_of(2) {
                    continue;
                }
                let mut cyc = p1.clone();
                cyc.extend(&long2[1..]);
                cyc.extend(p2.iter().rev().skip(1));
                cyc.extend(&back[1..back.len() - 1]);
                if best.as_ref().is_none_or(|b| b.len() < cyc.len()) {
                    best = Some(cyc);
                }
            }
        }
    }
    best
}

/// Inserts two outside vertices `x, y` between consecutive cycle vertices
/// `a, b` whenever `a-x-y-b` is a path, until no insertion applies.
pub fn extend_cycle(g: &Graph, cycle: &[Vertex]) -> VertexSeq {
    let mut c = cycle.to_vec();
    let mut on = graph::mask(g.n(), &c);
    let mut i = 0;
    let mut idle = 0;
    while idle < c.len() {
        let (a, b) = (c[i], c[(i + 1) % c.len()]);
        let hit = g.neighbors(a).iter().copied().filter(|&x| !on[x]).find_map(|x| {
            g.neighbors(x)
                .iter()
                .copied()
                .find(|&y| !on[y] && g.has_edge(y, b))
                .map(|y| (x, y))
        });
        match hit {
            Some((x, y)) => {
                on[x] = true;
                on[y] = true;
                c.splice(i + 1..i + 1, [x, y]);
                idle = 0;
            }
            None => {
                idle += 1;
                i = (i + 1) % c.len();
            }
        }
    }
    c
}

/// Shortest odd cycle, then a medium odd cycle through one of its edges,
/// then a long cycle away from it with a parity fix through the medium
/// cycle. Returns the longest verified odd cycle seen.
pub fn long_odd_cycle(g: &Graph, params: &LongOddParams) -> std::result::Result<OddCycleCertificate, OddCycleError> {
    let n = g.n();
    let c0 = shortest_odd_cycle(g).ok_or(OddCycleError::Bipartite)?;
    let mut stages = vec![StageRecord {
        stage: "shortest-odd".into(),
        cycle: Some(c0.clone()),
        note: format!("length {}", c0.len()),
    }];
    let mut best = c0.clone();
    let keep = |c: &VertexSeq, best: &mut VertexSeq| {
        if c.len() % 2 == 1 && c.len() > best.len() && graph::verify_cycle(g, c, c.len()).is_ok() {
            *best = c.clone();
        }
    };

    // Step II: a path from v avoiding u, bent back to u.
    let target = ((params.delta_prime * n as f64) / 2.0).ceil() as usize;
    let on_c0 = graph::mask(n, &c0);
    let (u, v) = (c0[0], c0[1]);
    let mut allowed: Vec<bool> = on_c0.iter().map(|&x| !x).collect();
    let mut c1: Option<VertexSeq> = None;
    let p = anchored_path(g, v, &allowed, target.max(1));
    allowed[v] = true;
    for end in (1..p.len()).rev() {
        let mut blocked: Vec<bool> = allowed.iter().map(|&x| !x).collect();
        for &x in &p[..end] {
            blocked[x] = true;
        }
        blocked[u] = false;
        if let Some(back) = bfs_path(g, p[end], u, &blocked) {
            // Path v .. w .. u of length end + back.len() - 1.
            let mut cyc: Vec<Vertex> = p[..=end].to_vec();
            cyc.extend(&back[1..]);
            let len = cyc.len() - 1;
            if len % 2 == 1 {
                // Close with the even arc of c0 from u back to v.
                cyc.extend(c0[2..].iter().rev());
            }
            c1 = Some(cyc);
            break;
        }
    }
    let c1 = match c1 {
        Some(c) if graph::verify_cycle(g, &c, c.len()).is_ok() => {
            let lo = target;
            let hi = target + params.slack;
            stages.push(StageRecord {
                stage: "medium-odd".into(),
                note: format!("length {} against window [{lo}, {hi}]", c.len()),
                cycle: Some(c.clone()),
            });
            keep(&c, &mut best);
            c
        }
        _ => {
            stages.push(StageRecord {
                stage: "medium-odd".into(),
                cycle: None,
                note: "no return path; continuing with the shortest odd cycle".into(),
            });
            c0.clone()
        }
    };

    // Step III: long cycle outside c1, then parity fix.
    let on_c1 = graph::mask(n, &c1);
    let rest: Vec<Vertex> = (0..n).filter(|&x| !on_c1[x]).collect();
    let c2 = graph::induced_subgraph(g, &rest)
        .ok()
        .and_then(|(h, map)| long_cycle(&h, params.stream, params.restarts).map(|c| c.into_iter().map(|x| map[x]).collect::<Vec<_>>()));
    match c2 {
        None => stages.push(StageRecord {
            stage: "long-cycle".into(),
            cycle: None,
            note: "no cycle outside the medium cycle".into(),
        }),
        Some(c2) => {
            stages.push(StageRecord {
                stage: "long-cycle".into(),
                note: format!("length {}", c2.len()),
                cycle: Some(c2.clone()),
            });
            keep(&c2, &mut best);
            match parity_fix(g, &c1, &c2) {
                Some(c) => {
                    stages.push(StageRecord {
                        stage: "parity-fix".into(),
                        note: format!("length {}", c.len()),
                        cycle: Some(c.clone()),
                    });
                    keep(&c, &mut best);
                }
                None => stages.push(StageRecord {
                    stage: "parity-fix".into(),
                    cycle: None,
                    note: "fewer than two disjoint paths between the cycles".into(),
                }),
            }
        }
    }
    let ext = extend_cycle(g, &best);
    if ext.len() > best.len() {
        stages.push(StageRecord {
            stage: "extension".into(),
            note: format!("length {}", ext.len()),
            cycle: Some(ext.clone()),
        });
        keep(&ext, &mut best);
    }
    Ok(OddCycleCertificate { cycle: best, stages })
}

/// Edges left inside the parts by a greedy 2-colouring improved by single
/// vertex moves: an upper bound on the distance to bipartite.
pub fn bipartite_deficiency(g: &Graph) -> (usize, Vec<bool>) {
    let n = g.n();
    let mut side = vec![false; n];
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &w in g.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    side[w] = !side[u];
                    q.push_back(w);
                }
            }
        }
    }
    loop {
        let mut moved = false;
        for v in 0..n {
            let same = g.neighbors(v).iter().filter(|&&w| side[w] == side[v]).count();
            if 2 * same > g.degree(v) {
                side[v] = !side[v];
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    let d = g.edges().filter(|&(u, v)| side[u] == side[v]).count();
    (d, side)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub color: usize,
    pub edges: usize,
    pub bipartite: bool,
    /// Greedy upper bound on edges to delete for bipartiteness.
    pub deficiency: usize,
    /// `deficiency / k^2`.
    pub farness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonoReport {
    pub k: usize,
    pub r: usize,
    pub eps: f64,
    pub classes: Vec<ClassReport>,
    pub color: Option<usize>,
    pub block: Option<Vec<Vertex>>,
    /// Whether the chosen block has deficiency above `eps k b / 3`.
    pub block_rule_met: bool,
    pub cycle: Option<OddCycleCertificate>,
    /// `k / (r 2^(r+4))`.
    pub bound: f64,
    pub meets_bound: bool,
}

/// Default far-ness parameter `1/(r 2^(r+2))`.
pub fn default_eps(r: usize) -> f64 {
    1.0 / (r as f64 * 2f64.powi(r as i32 + 2))
}

/// Picks the colour class farthest from bipartite, its farthest block, and
/// runs the long odd cycle search inside that block.
pub fn monochromatic_odd_cycle(g: &Graph, coloring: &EdgeColoring, eps: f64, stream: RngStream) -> Result<MonoReport> {
    let k = g.n();
    let r = coloring.r;
    let graphs: Vec<Graph> = (0..r).map(|i| color_class(g, coloring, i)).collect::<Result<_>>()?;
    let classes: Vec<ClassReport> = graphs
        .par_iter()
        .enumerate()
        .map(|(i, h)| {
            let bipartite = is_bipartite(h).is_bipartite();
            let deficiency = if bipartite { 0 } else { bipartite_deficiency(h).0.max(1) };
            ClassReport {
                color: i,
                edges: h.edge_count(),
                bipartite,
                deficiency,
                farness: deficiency as f64 / (k.max(1) * k.max(1)) as f64,
            }
        })
        .collect();
    let bound = k as f64 / (r as f64 * 2f64.powi(r as i32 + 4));
    let mut report = MonoReport {
        k,
        r,
        eps,
        classes,
        color: None,
        block: None,
        block_rule_met: false,
        cycle: None,
        bound,
        meets_bound: false,
    };
    let Some(chosen) = report
        .classes
        .iter()
        .filter(|c| !c.bipartite)
        .max_by_key(|c| (c.deficiency, std::cmp::Reverse(c.color)))
        .map(|c| c.color)
    else {
        return Ok(report);
    };
    report.color = Some(chosen);
    let h = &graphs[chosen];
    let bct = block_cut_tree(h);
    let mut best: Option<(f64, usize, Vec<Vertex>, Graph, Vec<Vertex>)> = None;
    for block in bct.blocks.iter().filter(|b| b.len() >= 3) {
        let (sub, map) = graph::induced_subgraph(h, block)?;
        if is_bipartite(&sub).is_bipartite() {
            continue;
        }
        let d = bipartite_deficiency(&sub).0.max(1);
        let score = d as f64 / (k as f64 * block.len() as f64);
        if best.as_ref().is_none_or(|b| score > b.0) {
            best = Some((score, d, block.clone(), sub, map));
        }
    }
    let (_, d, block, sub, map) = best.expect("a non-bipartite graph has a non-bipartite block");
    report.block_rule_met = d as f64 > eps * k as f64 * block.len() as f64 / 3.0;
    report.block = Some(block);
    let cert = long_odd_cycle(&sub, &LongOddParams::new(stream)).expect("block is not bipartite");
    let lift = |c: &VertexSeq| c.iter().map(|&x| map[x]).collect::<Vec<_>>();
    let cert = OddCycleCertificate {
        cycle: lift(&cert.cycle),
        stages: cert
            .stages
            .into_iter()
            .map(|s| StageRecord {
                cycle: s.cycle.as_ref().map(lift),
                ..s
            })
            .collect(),
    };
    report.meets_bound = cert.len() as f64 >= bound;
    report.cycle = Some(cert);
    Ok(report)
}
