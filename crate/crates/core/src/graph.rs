//! Immutable simple undirected graphs on dense vertex ids `0..n`, plus exact
//! verification of paths, cycles and pair edge counts.
//!
//! Every certificate produced elsewhere in the crate is checked against these
//! primitives, so they are deliberately small and independent of the
//! constructive code.

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = usize;

/// Ordered list of vertex ids. Used for paths and cycles.
pub type VertexSeq = Vec<Vertex>;

/// Simple undirected graph with sorted adjacency lists.
///
/// Serialises as `{"n": .., "edges": [[u, v], ..]}`.
#[derive(Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(into = "GraphRepr", try_from = "GraphRepr")]
pub struct Graph {
    adj: Vec<Vec<Vertex>>,
    m: usize,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        GraphRepr {
            n: g.n(),
            edges: g.edges().collect(),
        }
    }
}

impl TryFrom<GraphRepr> for Graph {
    type Error = Error;

    fn try_from(r: GraphRepr) -> Result<Self> {
        Graph::from_edges(r.n, r.edges)
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n())
            .field("m", &self.m)
            .finish()
    }
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges and
    /// out-of-range endpoints.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut adj = vec![Vec::new(); n];
        let mut m = 0;
        for (u, v) in edges {
            check_vertex(u, n)?;
            check_vertex(v, n)?;
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
            m += 1;
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicateEdge(u.min(w[0]), u.max(w[0])));
            }
        }
        Ok(Self { adj, m })
    }

    /// Builds a graph from pairs that may repeat; duplicates collapse and
    /// self-loops are dropped.
    pub fn from_edges_lossy<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            check_vertex(u, n)?;
            check_vertex(v, n)?;
            if u != v {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        let mut twice = 0;
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
            twice += list.len();
        }
        Ok(Self { adj, m: twice / 2 })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
            m: 0,
        }
    }

    pub fn complete(n: usize) -> Self {
        let adj = (0..n)
            .map(|u| (0..n).filter(|&v| v != u).collect())
            .collect();
        Self {
            adj,
            m: n * n.saturating_sub(1) / 2,
        }
    }

    /// The cycle `0-1-...-(n-1)-0`; requires `n >= 3`.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a cycle needs at least 3 vertices");
        Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).expect("valid cycle")
    }

    /// The path `0-1-...-(n-1)`.
    pub fn path(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("valid path")
    }

    /// `K_{a,b}` with left side `0..a` and right side `a..a+b`.
    pub fn complete_bipartite(a: usize, b: usize) -> Self {
        let edges = (0..a).flat_map(|u| (a..a + b).map(move |v| (u, v)));
        Self::from_edges(a + b, edges).expect("valid complete bipartite graph")
    }

    /// Star with center 0 and `leaves` leaves.
    pub fn star(leaves: usize) -> Self {
        Self::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v))).expect("valid star")
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.adj.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n() && v < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// `Some(d)` when every vertex has degree `d`.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.adj.first().map_or(0, Vec::len);
        self.adj.iter().all(|l| l.len() == d).then_some(d)
    }

    /// New graph on the same vertex set keeping only edges accepted by `keep`.
    pub fn filter_edges<F>(&self, mut keep: F) -> Self
    where
        F: FnMut(Vertex, Vertex) -> bool,
    {
        let kept: Vec<_> = self.edges().filter(|&(u, v)| keep(u, v)).collect();
        Self::from_edges(self.n(), kept).expect("subset of a simple graph is simple")
    }

    /// New graph with the extra edges added (duplicates of existing edges are
    /// ignored).
    pub fn with_edges<I>(&self, extra: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        Self::from_edges_lossy(self.n(), self.edges().chain(extra))
    }

    /// Connected components as sorted vertex lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<Vertex>> {
        let mut seen = vec![false; self.n()];
        let mut out = Vec::new();
        for s in 0..self.n() {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                i += 1;
                for &w in self.neighbors(u) {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n() <= 1 || self.components().len() == 1
    }

    /// BFS distances from `s` (`usize::MAX` for unreachable vertices).
    pub fn bfs_distances(&self, s: Vertex) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n()];
        dist[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &w in self.neighbors(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Reads the text format: `n m` header then `m` lines `u v` with `u < v`.
    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let (line_no, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let header = header?;
        let [n, m] = parse_pair(&header, line_no)?;
        let mut edges = Vec::with_capacity(m);
        for (line_no, line) in lines {
            let line = line?;
            let [u, v] = parse_pair(&line, line_no)?;
            if u >= v {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected u < v, got {u} {v}"),
                });
            }
            if v >= n {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("vertex {v} out of range for n = {n}"),
                });
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header announces {m} edges, found {}", edges.len()),
            });
        }
        Self::from_edges(n, edges)
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.n(), self.edge_count())?;
        for (u, v) in self.edges() {
            writeln!(w, "{u} {v}")?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_text(std::io::BufReader::new(f))
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_text(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

fn parse_pair(line: &str, line_no: usize) -> Result<[usize; 2]> {
    let mut it = line.split_whitespace();
    let mut next = || -> Result<usize> {
        it.next()
            .ok_or_else(|| Error::Parse {
                line: line_no,
                msg: "expected two integers".into(),
            })?
            .parse()
            .map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("{e}"),
            })
    };
    let pair = [next()?, next()?];
    if it.next().is_some() {
        return Err(Error::Parse {
            line: line_no,
            msg: "trailing tokens".into(),
        });
    }
    Ok(pair)
}

#[inline]
pub(crate) fn check_vertex(v: Vertex, n: usize) -> Result<()> {
    if v < n {
        Ok(())
    } else {
        Err(Error::VertexOutOfRange { vertex: v, n })
    }
}

pub(crate) fn check_vertices(g: &Graph, set: &[Vertex]) -> Result<()> {
    set.iter().try_for_each(|&v| check_vertex(v, g.n()))
}

/// Boolean membership mask of a vertex set.
pub fn mask(n: usize, set: &[Vertex]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &v in set {
        m[v] = true;
    }
    m
}

/// Why a claimed path or cycle was rejected. Indices refer to positions in the
/// submitted sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rejection {
    LengthMismatch { expected: usize, actual: usize },
    TooShort { len: usize },
    OutOfRange { index: usize, vertex: Vertex },
    Repeated { index: usize, vertex: Vertex },
    MissingEdge { index: usize, u: Vertex, v: Vertex },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::LengthMismatch { expected, actual } => {
                write!(f, "expected {expected} vertices, got {actual}")
            }
            Rejection::TooShort { len } => write!(f, "a cycle needs at least 3 vertices, got {len}"),
            Rejection::OutOfRange { index, vertex } => {
                write!(f, "vertex {vertex} at index {index} is out of range")
            }
            Rejection::Repeated { index, vertex } => {
                write!(f, "vertex {vertex} repeats at index {index}")
            }
            Rejection::MissingEdge { index, u, v } => {
                write!(f, "missing edge {u}-{v} after index {index}")
            }
        }
    }
}

impl std::error::Error for Rejection {}

/// A cycle that passed [`verify_cycle`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifiedCycle {
    vertices: VertexSeq,
}

impl VerifiedCycle {
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn into_vertices(self) -> VertexSeq {
        self.vertices
    }
}

fn check_distinct(g: &Graph, seq: &[Vertex]) -> std::result::Result<(), Rejection> {
    let mut seen = vec![false; g.n()];
    for (index, &vertex) in seq.iter().enumerate() {
        if vertex >= g.n() {
            return Err(Rejection::OutOfRange { index, vertex });
        }
        if std::mem::replace(&mut seen[vertex], true) {
            return Err(Rejection::Repeated { index, vertex });
        }
    }
    Ok(())
}

/// Accepts iff `seq` lists exactly `t` distinct vertices and cyclically
/// consecutive entries are adjacent in `g`.
pub fn verify_cycle(g: &Graph, seq: &[Vertex], t: usize) -> std::result::Result<VerifiedCycle, Rejection> {
    if seq.len() != t {
        return Err(Rejection::LengthMismatch {
            expected: t,
            actual: seq.len(),
        });
    }
    if seq.len() < 3 {
        return Err(Rejection::TooShort { len: seq.len() });
    }
    check_distinct(g, seq)?;
    for index in 0..seq.len() {
        let (u, v) = (seq[index], seq[(index + 1) % seq.len()]);
        if !g.has_edge(u, v) {
            return Err(Rejection::MissingEdge { index, u, v });
        }
    }
    Ok(VerifiedCycle {
        vertices: seq.to_vec(),
    })
}

/// Accepts iff the vertices are distinct and consecutive entries are
/// adjacent; returns the length in edges. The empty sequence is rejected.
pub fn verify_path(g: &Graph, seq: &[Vertex]) -> std::result::Result<usize, Rejection> {
    if seq.is_empty() {
        return Err(Rejection::TooShort { len: 0 });
    }
    check_distinct(g, seq)?;
    for index in 0..seq.len() - 1 {
        let (u, v) = (seq[index], seq[index + 1]);
        if !g.has_edge(u, v) {
            return Err(Rejection::MissingEdge { index, u, v });
        }
    }
    Ok(seq.len() - 1)
}

/// External neighbourhood: vertices outside `set` with a neighbour inside it.
/// Returned sorted.
pub fn neighborhood(g: &Graph, set: &[Vertex]) -> Result<Vec<Vertex>> {
    check_vertices(g, set)?;
    let inside = mask(g.n(), set);
    let mut hit = vec![false; g.n()];
    let mut out = Vec::new();
    for &u in set {
        for &w in g.neighbors(u) {
            if !inside[w] && !hit[w] {
                hit[w] = true;
                out.push(w);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Induced subgraph on `set`; vertex `i` of the result is `set[i]` in `g`
/// (after removing duplicates, keeping first occurrences).
pub fn induced_subgraph(g: &Graph, set: &[Vertex]) -> Result<(Graph, Vec<Vertex>)> {
    check_vertices(g, set)?;
    let mut index = vec![usize::MAX; g.n()];
    let mut map = Vec::with_capacity(set.len());
    for &v in set {
        if index[v] == usize::MAX {
            index[v] = map.len();
            map.push(v);
        }
    }
    let mut edges = Vec::new();
    for (i, &u) in map.iter().enumerate() {
        for &w in g.neighbors(u) {
            let j = index[w];
            if j != usize::MAX && i < j {
                edges.push((i, j));
            }
        }
    }
    let sub = Graph::from_edges(map.len(), edges)?;
    Ok((sub, map))
}

/// `e_G(U, W)` for disjoint `U`, `W`.
pub fn count_pair_edges(g: &Graph, left: &[Vertex], right: &[Vertex]) -> Result<usize> {
    check_vertices(g, left)?;
    check_vertices(g, right)?;
    let r = mask(g.n(), right);
    if let Some(&v) = left.iter().find(|&&v| r[v]) {
        return Err(Error::Overlap(v));
    }
    Ok(count_pair_edges_masked(g, left, &r))
}

/// Unchecked core of [`count_pair_edges`] with a precomputed right-side mask.
pub(crate) fn count_pair_edges_masked(g: &Graph, left: &[Vertex], right_mask: &[bool]) -> usize {
    left.iter()
        .map(|&u| g.neighbors(u).iter().filter(|&&w| right_mask[w]).count())
        .sum()
}

/// Which side of a bipartite pair a vertex belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }
}

/// A pair of disjoint vertex sets of a host graph; adjacency queries only
/// see edges running between the two sides.
#[derive(Debug, Clone)]
pub struct BipartitePairView<'g> {
    host: &'g Graph,
    left: Vec<Vertex>,
    right: Vec<Vertex>,
    side: Vec<Option<Side>>,
}

impl<'g> BipartitePairView<'g> {
    pub fn new(host: &'g Graph, left: Vec<Vertex>, right: Vec<Vertex>) -> Result<Self> {
        check_vertices(host, &left)?;
        check_vertices(host, &right)?;
        let mut side = vec![None; host.n()];
        for &v in &left {
            side[v] = Some(Side::Left);
        }
        for &v in &right {
            if side[v].is_some() {
                return Err(Error::Overlap(v));
            }
            side[v] = Some(Side::Right);
        }
        Ok(Self {
            host,
            left,
            right,
            side,
        })
    }

    pub fn host(&self) -> &'g Graph {
        self.host
    }

    pub fn left(&self) -> &[Vertex] {
        &self.left
    }

    pub fn right(&self) -> &[Vertex] {
        &self.right
    }

    pub fn part(&self, side: Side) -> &[Vertex] {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn side_of(&self, v: Vertex) -> Option<Side> {
        self.side.get(v).copied().flatten()
    }

    /// Neighbours of `v` on the opposite side of the pair.
    pub fn cross_neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        let want = self.side_of(v).map(Side::other);
        self.host
            .neighbors(v)
            .iter()
            .copied()
            .filter(move |&w| want.is_some() && self.side[w] == want)
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        matches!((self.side_of(u), self.side_of(v)), (Some(a), Some(b)) if a != b)
            && self.host.has_edge(u, v)
    }

    pub fn edge_count(&self) -> usize {
        self.left
            .iter()
            .map(|&u| self.cross_neighbors(u).count())
            .sum()
    }
}
