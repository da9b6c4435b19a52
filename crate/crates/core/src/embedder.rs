//! Trees made of two complete `r`-ary trees whose roots are joined by a path,
//! and their embedding into bipartite pairs.
//!
//! Embeddings are found greedily with bounded backtracking and are always
//! re-checked against the host before being returned.

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expander::{self, CleanupOutcome, CorollaryCase};
use crate::graph::{self, Graph, Side, Vertex, VertexSeq};
use crate::rng::RngStream;
use crate::{Error, Rational};

/// Retreat steps allowed per tree vertex in the greedy embedding.
pub const RETREATS_PER_VERTEX: usize = 50;
/// Host candidates ranked per tree vertex.
const CANDIDATE_CAP: usize = 48;
/// Roots tried before an embedding into a whole pair gives up.
pub const ROOT_ATTEMPTS: usize = 64;
/// Root candidates tried per attachment vertex.
const ATTACH_ROOTS: usize = 8;
/// Upper bound on the size of abstract trees we are willing to build.
pub const MAX_TREE_VERTICES: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeSpec {
    pub r: usize,
    pub h: usize,
    pub ell: usize,
}

impl TreeSpec {
    pub fn new(r: usize, h: usize, ell: usize) -> crate::Result<Self> {
        if r == 0 {
            return Err(Error::param("tree arity must be at least 1"));
        }
        if ell == 0 {
            return Err(Error::param("joining path length must be at least 1"));
        }
        let spec = Self { r, h, ell };
        match spec.checked_vertex_count() {
            Some(c) if c <= MAX_TREE_VERTICES => Ok(spec),
            _ => Err(Error::TooLarge {
                n: usize::MAX,
                cap: MAX_TREE_VERTICES,
            }),
        }
    }

    fn checked_copy_size(&self) -> Option<usize> {
        if self.r == 1 {
            return self.h.checked_add(1);
        }
        let mut total: usize = 0;
        let mut level: usize = 1;
        for _ in 0..=self.h {
            total = total.checked_add(level)?;
            level = level.checked_mul(self.r)?;
        }
        Some(total)
    }

    fn checked_vertex_count(&self) -> Option<usize> {
        (self.ell - 1).checked_add(self.checked_copy_size()?.checked_mul(2)?)
    }

    /// Vertices of one `T^(r,h)`.
    pub fn copy_size(&self) -> usize {
        self.checked_copy_size().expect("validated spec")
    }

    pub fn leaves_per_copy(&self) -> usize {
        self.r.pow(self.h as u32)
    }

    pub fn vertex_count(&self) -> usize {
        self.ell - 1 + 2 * self.copy_size()
    }

    pub fn longest_path(&self) -> usize {
        self.ell + 2 * self.h
    }
}

/// Smallest `h` with `r^h >= x` (0 when `x <= 1`).
pub fn depth_for(r: usize, x: &Rational) -> usize {
    let mut h = 0;
    let mut level = Rational::one();
    if r < 2 {
        return 0;
    }
    while level < *x {
        level *= Rational::from_integer(r as i128);
        h += 1;
    }
    h
}

/// A rooted tree stored as parent pointers; the root is vertex 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Parents", into = "Parents")]
pub struct RootedTree {
    pub parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct Parents {
    parent: Vec<Option<usize>>,
}

impl TryFrom<Parents> for RootedTree {
    type Error = Error;
    fn try_from(p: Parents) -> crate::Result<Self> {
        Self::from_parents(p.parent)
    }
}

impl From<RootedTree> for Parents {
    fn from(t: RootedTree) -> Self {
        Parents { parent: t.parent }
    }
}

impl RootedTree {
    pub fn from_parents(parent: Vec<Option<usize>>) -> crate::Result<Self> {
        let n = parent.len();
        if n == 0 || parent[0].is_some() {
            return Err(Error::param("vertex 0 must be the root"));
        }
        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate().skip(1) {
            match p {
                Some(p) if *p < n && *p != v => children[*p].push(v),
                _ => return Err(Error::param(format!("vertex {v} has no valid parent"))),
            }
        }
        let t = Self { parent, children };
        if t.bfs_order().len() != n {
            return Err(Error::param("parent pointers do not form a tree"));
        }
        Ok(t)
    }

    /// `T^(r,h)` in heap order: the children of `v` are `r v + 1 ..= r v + r`.
    pub fn complete(r: usize, h: usize) -> crate::Result<Self> {
        let spec = TreeSpec::new(r.max(1), h, 1)?;
        let c = spec.copy_size();
        let parent = (0..c).map(|v| (v > 0).then(|| (v - 1) / r.max(1))).collect();
        Self::from_parents(parent)
    }

    pub fn star(k: usize) -> Self {
        Self::complete(k.max(1), usize::from(k > 0)).expect("small tree")
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn bfs_order(&self) -> Vec<usize> {
        let mut order = vec![0];
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            order.extend_from_slice(&self.children[v]);
            i += 1;
            if order.len() > self.len() {
                break;
            }
        }
        order
    }

    pub fn depths(&self) -> Vec<usize> {
        let mut d = vec![0; self.len()];
        for v in self.bfs_order() {
            if let Some(p) = self.parent[v] {
                d[v] = d[p] + 1;
            }
        }
        d
    }

    pub fn max_degree(&self) -> usize {
        (0..self.len())
            .map(|v| self.children[v].len() + usize::from(self.parent[v].is_some()))
            .max()
            .unwrap_or(0)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parent.iter().enumerate().filter_map(|(v, p)| p.map(|p| (p, v)))
    }
}

/// `T^(r,h)_ell` rooted at `root_a`.
///
/// Layout: copy A occupies `0..c` in heap order, the inner path vertices
/// follow, then copy B in heap order starting at `root_b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractTree {
    pub spec: TreeSpec,
    pub tree: RootedTree,
    pub root_a: usize,
    pub root_b: usize,
    pub leaves_a: Vec<usize>,
    pub leaves_b: Vec<usize>,
    /// From `root_a` to `root_b`, both included.
    pub path: Vec<usize>,
}

pub fn make_trhl(spec: TreeSpec) -> crate::Result<AbstractTree> {
    let spec = TreeSpec::new(spec.r, spec.h, spec.ell)?;
    let c = spec.copy_size();
    let r = spec.r;
    let inner = spec.ell - 1;
    let root_b = c + inner;
    let n = spec.vertex_count();
    let mut parent = vec![None; n];
    for v in 1..c {
        parent[v] = Some((v - 1) / r);
    }
    let mut path = vec![0];
    for k in 0..inner {
        let v = c + k;
        parent[v] = Some(*path.last().unwrap());
        path.push(v);
    }
    parent[root_b] = Some(*path.last().unwrap());
    path.push(root_b);
    for local in 1..c {
        parent[root_b + local] = Some(root_b + (local - 1) / r);
    }
    let leaves = spec.leaves_per_copy();
    let tree = RootedTree::from_parents(parent)?;
    Ok(AbstractTree {
        spec,
        tree,
        root_a: 0,
        root_b,
        leaves_a: (c - leaves..c).collect(),
        leaves_b: (root_b + c - leaves..root_b + c).collect(),
        path,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Copy {
    A,
    B,
}

impl AbstractTree {
    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    pub fn leaves(&self, copy: Copy) -> &[usize] {
        match copy {
            Copy::A => &self.leaves_a,
            Copy::B => &self.leaves_b,
        }
    }

    fn copy_offset(&self, copy: Copy) -> usize {
        match copy {
            Copy::A => self.root_a,
            Copy::B => self.root_b,
        }
    }

    /// Walk from a leaf of `copy` up to that copy's root.
    pub fn to_root(&self, leaf: usize, copy: Copy) -> Vec<usize> {
        let root = self.copy_offset(copy);
        let mut out = vec![leaf];
        let mut v = leaf;
        while v != root {
            v = self.tree.parent[v].expect("leaf below its root");
            out.push(v);
        }
        out
    }

    /// Structural check: leaves sit at depth exactly `h` below their root and
    /// `path` is a root-to-root path of length `ell`.
    pub fn check(&self) -> std::result::Result<(), String> {
        let h = self.spec.h;
        for copy in [Copy::A, Copy::B] {
            for &l in self.leaves(copy) {
                if self.to_root(l, copy).len() != h + 1 {
                    return Err(format!("leaf {l} is not at depth {h}"));
                }
                if h > 0 && !self.tree.children(l).is_empty() {
                    return Err(format!("leaf {l} has children"));
                }
            }
        }
        if self.path.len() != self.spec.ell + 1
            || self.path.first() != Some(&self.root_a)
            || self.path.last() != Some(&self.root_b)
        {
            return Err("joining path has the wrong shape".into());
        }
        for w in self.path.windows(2) {
            if self.tree.parent[w[1]] != Some(w[0]) {
                return Err(format!("path step {}-{} is not a tree edge", w[0], w[1]));
            }
        }
        Ok(())
    }
}

/// Where a stuck greedy embedding stopped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frontier {
    /// Abstract vertex that found no host image.
    pub vertex: usize,
    /// Host image of its parent, if it has one.
    pub parent_host: Option<Vertex>,
    /// Tree vertices embedded at the deepest point reached.
    pub embedded: usize,
    pub retreats: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "stage")]
pub enum EmbedError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("cleanup found sets of {} and {} vertices with no edges between them", a1.len(), a2.len())]
    Cleanup { a1: Vec<Vertex>, a2: Vec<Vertex> },
    #[error("cleanup was inconclusive on the {side:?} side")]
    CleanupInconclusive { side: Side },
    #[error("needed a path of length {needed}, found {found}")]
    Path { needed: usize, found: usize },
    #[error("no attachment among {scanned} candidate positions")]
    Attachment { scanned: usize },
    #[error("tree stuck at abstract vertex {} after {} retreats", frontier.vertex, frontier.retreats)]
    Tree { frontier: Frontier },
    #[error("embedding failed verification: {0}")]
    Verification(String),
}

impl EmbedError {
    pub fn stage(&self) -> &'static str {
        match self {
            EmbedError::Invalid(_) => "input",
            EmbedError::Cleanup { .. } | EmbedError::CleanupInconclusive { .. } => "cleanup",
            EmbedError::Path { .. } => "path",
            EmbedError::Attachment { .. } => "attachment",
            EmbedError::Tree { .. } => "tree",
            EmbedError::Verification(_) => "verification",
        }
    }
}

impl From<EmbedError> for Error {
    fn from(e: EmbedError) -> Self {
        Error::Stage {
            stage: format!("embed/{}", e.stage()),
            detail: e.to_string(),
        }
    }
}

impl From<Error> for EmbedError {
    fn from(e: Error) -> Self {
        EmbedError::Invalid(e.to_string())
    }
}

type EmbedResult<T> = std::result::Result<T, EmbedError>;

fn count_free(g: &Graph, v: Vertex, allowed: &[bool], used: &[bool], cap: usize) -> usize {
    let mut c = 0;
    for &w in g.neighbors(v) {
        if allowed[w] && !used[w] {
            c += 1;
            if c >= cap {
                break;
            }
        }
    }
    c
}

/// Greedy BFS-order embedding of `tree` with its root on `root_host`.
///
/// Vertices at even depth must land where `allowed[0]` holds, odd depth where
/// `allowed[1]` holds, and nothing marked in `used` is touched. Candidates are
/// ranked by the number of free admissible neighbours. On failure `used` is
/// restored; on success the images are marked used.
fn embed_rooted(
    g: &Graph,
    tree: &RootedTree,
    root_host: Vertex,
    allowed: [&[bool]; 2],
    used: &mut [bool],
    budget: usize,
) -> EmbedResult<Vec<Vertex>> {
    let order = tree.bfs_order();
    let depth = tree.depths();
    let n = tree.len();
    let root = order[0];
    let stuck = |vertex, parent_host, embedded, retreats| EmbedError::Tree {
        frontier: Frontier {
            vertex,
            parent_host,
            embedded,
            retreats,
        },
    };
    let need_root = tree.children(root).len();
    if used[root_host] || !allowed[0][root_host] || count_free(g, root_host, allowed[1], used, need_root) < need_root {
        return Err(stuck(root, None, 0, 0));
    }
    let mut map = vec![usize::MAX; n];
    map[root] = root_host;
    used[root_host] = true;
    let mut cands: Vec<Option<Vec<Vertex>>> = vec![None; n];
    let mut next = vec![0usize; n];
    let mut pos = 1;
    let mut retreats = 0;
    let mut deepest = 1;
    while pos < n {
        let v = order[pos];
        let p = tree.parent[v].expect("non-root");
        if cands[pos].is_none() {
            let parity = depth[v] % 2;
            let need = tree.children(v).len();
            let mut list: Vec<(usize, Vertex)> = g
                .neighbors(map[p])
                .iter()
                .copied()
                .filter(|&w| !used[w] && allowed[parity][w])
                .filter_map(|w| {
                    let a = count_free(g, w, allowed[1 - parity], used, need + 8);
                    (a >= need).then_some((a, w))
                })
                .collect();
            list.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            list.truncate(CANDIDATE_CAP);
            cands[pos] = Some(list.into_iter().map(|x| x.1).collect());
            next[pos] = 0;
        }
        let list = cands[pos].as_ref().unwrap();
        if next[pos] < list.len() {
            let w = list[next[pos]];
            next[pos] += 1;
            map[v] = w;
            used[w] = true;
            pos += 1;
            deepest = deepest.max(pos);
            continue;
        }
        cands[pos] = None;
        if pos == 1 || retreats >= budget {
            let parent_host = Some(map[p]);
            for &u in &order[..pos] {
                used[map[u]] = false;
            }
            return Err(stuck(v, parent_host, deepest, retreats));
        }
        retreats += 1;
        pos -= 1;
        let u = order[pos];
        used[map[u]] = false;
        map[u] = usize::MAX;
    }
    Ok(map)
}

/// Greedy embedding of `tree` into `host` with the root on `root_host`.
///
/// `d` caps the tree's maximum degree. Any host vertex may be used; the
/// result is checked for injectivity and edge preservation.
pub fn fp_embed_tree(host: &Graph, tree: &RootedTree, root_host: Vertex, d: usize) -> EmbedResult<Vec<Vertex>> {
    if root_host >= host.n() {
        return Err(EmbedError::Invalid(format!("root {root_host} is not a host vertex")));
    }
    if tree.max_degree() > d {
        return Err(EmbedError::Invalid(format!(
            "tree has maximum degree {} above the cap {d}",
            tree.max_degree()
        )));
    }
    let all = vec![true; host.n()];
    let mut used = vec![false; host.n()];
    let map = embed_rooted(
        host,
        tree,
        root_host,
        [&all, &all],
        &mut used,
        RETREATS_PER_VERTEX * tree.len(),
    )?;
    check_map(host, tree, &map).map_err(EmbedError::Verification)?;
    Ok(map)
}

fn check_map(g: &Graph, tree: &RootedTree, map: &[Vertex]) -> std::result::Result<(), String> {
    if map.len() != tree.len() {
        return Err("map size differs from tree size".into());
    }
    let mut seen = vec![false; g.n()];
    for &v in map {
        if v >= g.n() {
            return Err(format!("image {v} is not a host vertex"));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(format!("host vertex {v} used twice"));
        }
    }
    for (p, c) in tree.edges() {
        if !g.has_edge(map[p], map[c]) {
            return Err(format!("tree edge {p}-{c} maps to non-edge {}-{}", map[p], map[c]));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// The whole tree embedded greedily in one pass.
    Whole,
    /// Corner blocks, middle blocks and attachment exactly as in the
    /// construction.
    Proof,
    /// A long path anywhere in the pair, trees on any unused vertex.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayoutChoice {
    /// Proof layout when its size constraints can be met, else free.
    #[default]
    Auto,
    Proof,
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EmbedTrace {
    pub layout: Option<Layout>,
    pub removed: [usize; 2],
    pub corner_size: Option<usize>,
    pub middle_size: Option<usize>,
    pub path_needed: Option<usize>,
    pub path_found: Option<usize>,
    /// Attachment index `s` (proof layout) or window offset (free layout).
    pub attachment: Option<usize>,
    pub root_attempts: usize,
    /// Why the proof layout was not used, when it was skipped.
    pub fallback: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeEmbedding {
    pub tree: AbstractTree,
    pub map: Vec<Vertex>,
    pub sides: Vec<Side>,
    pub trace: EmbedTrace,
}

impl TreeEmbedding {
    pub fn host_leaves(&self, copy: Copy) -> Vec<Vertex> {
        self.tree.leaves(copy).iter().map(|&l| self.map[l]).collect()
    }

    pub fn leaf_side(&self, copy: Copy) -> Side {
        self.sides[self.tree.leaves(copy)[0]]
    }

    /// Host path from leaf `from` of copy `start` through both roots to leaf
    /// `to` of the other copy; `None` if either is not a leaf there.
    pub fn leaf_to_leaf(&self, start: Copy, from: Vertex, to: Vertex) -> Option<VertexSeq> {
        let end = match start {
            Copy::A => Copy::B,
            Copy::B => Copy::A,
        };
        let find = |copy: Copy, host: Vertex| self.tree.leaves(copy).iter().copied().find(|&l| self.map[l] == host);
        let a = find(start, from)?;
        let b = find(end, to)?;
        let mut abs = self.tree.to_root(a, start);
        let mut inner: Vec<usize> = self.tree.path[1..self.tree.path.len() - 1].to_vec();
        if start == Copy::B {
            inner.reverse();
        }
        abs.extend(inner);
        let mut tail = self.tree.to_root(b, end);
        tail.reverse();
        abs.extend(tail);
        Some(abs.into_iter().map(|v| self.map[v]).collect())
    }

    /// Independent check against the pair `(v1, v2)`: injective, edges
    /// preserved, every image on its recorded side, sides alternate along
    /// tree edges, leaves at depth `h`.
    pub fn verify(&self, g: &Graph, v1: &[Vertex], v2: &[Vertex]) -> std::result::Result<(), String> {
        self.tree.check()?;
        check_map(g, &self.tree.tree, &self.map)?;
        if self.sides.len() != self.map.len() {
            return Err("side list has the wrong length".into());
        }
        let m1 = graph::mask(g.n(), v1);
        let m2 = graph::mask(g.n(), v2);
        for (a, (&v, &s)) in self.map.iter().zip(&self.sides).enumerate() {
            let ok = match s {
                Side::Left => m1[v],
                Side::Right => m2[v],
            };
            if !ok {
                return Err(format!("abstract vertex {a} maps to {v}, not on the {s:?} side"));
            }
        }
        for (p, c) in self.tree.tree.edges() {
            if self.sides[p] == self.sides[c] {
                return Err(format!("tree edge {p}-{c} stays on one side"));
            }
        }
        Ok(())
    }
}

/// Side mask helpers for a pair.
struct PairMasks {
    side: Vec<Option<Side>>,
    masks: [Vec<bool>; 2],
}

impl PairMasks {
    fn new(g: &Graph, v1: &[Vertex], v2: &[Vertex]) -> EmbedResult<Self> {
        let view = graph::BipartitePairView::new(g, v1.to_vec(), v2.to_vec())?;
        let side = (0..g.n()).map(|v| view.side_of(v)).collect();
        Ok(Self {
            side,
            masks: [graph::mask(g.n(), v1), graph::mask(g.n(), v2)],
        })
    }

    fn sub(g: &Graph, a: &[Vertex], b: &[Vertex]) -> [Vec<bool>; 2] {
        [graph::mask(g.n(), a), graph::mask(g.n(), b)]
    }
}

/// Side of the copy-A root so that copy-A leaves land on `a_leaves`.
fn root_side(a_leaves: Side, h: usize) -> Side {
    if h.is_multiple_of(2) {
        a_leaves
    } else {
        a_leaves.other()
    }
}

fn finish(
    g: &Graph,
    v1: &[Vertex],
    v2: &[Vertex],
    tree: AbstractTree,
    map: Vec<Vertex>,
    side_of: &[Option<Side>],
    trace: EmbedTrace,
) -> EmbedResult<TreeEmbedding> {
    let sides = map
        .iter()
        .map(|&v| side_of[v].ok_or_else(|| EmbedError::Verification(format!("{v} lies outside the pair"))))
        .collect::<EmbedResult<Vec<Side>>>()?;
    let e = TreeEmbedding { tree, map, sides, trace };
    e.verify(g, v1, v2).map_err(EmbedError::Verification)?;
    Ok(e)
}

/// Embeds all of `T^(r,h)_ell` greedily inside `(u1, u2)` with copy-A leaves
/// on `a_leaves`, trying roots in order of decreasing cross degree.
fn embed_whole(
    g: &Graph,
    u1: &[Vertex],
    u2: &[Vertex],
    spec: TreeSpec,
    a_leaves: Side,
    trace: &mut EmbedTrace,
) -> EmbedResult<(AbstractTree, Vec<Vertex>)> {
    let tree = make_trhl(spec)?;
    let masks = PairMasks::sub(g, u1, u2);
    let rs = root_side(a_leaves, spec.h);
    let allowed = [&masks[rs.index()][..], &masks[rs.other().index()][..]];
    let unused = vec![false; g.n()];
    let mut roots: Vec<(usize, Vertex)> = match rs {
        Side::Left => u1,
        Side::Right => u2,
    }
    .iter()
    .map(|&v| (count_free(g, v, allowed[1], &unused, usize::MAX), v))
    .collect();
    roots.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut last = None;
    let mut used = vec![false; g.n()];
    for &(_, root) in roots.iter().take(ROOT_ATTEMPTS) {
        trace.root_attempts += 1;
        match embed_rooted(g, &tree.tree, root, allowed, &mut used, RETREATS_PER_VERTEX * tree.len()) {
            Ok(map) => return Ok((tree, map)),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or(EmbedError::Tree {
        frontier: Frontier {
            vertex: 0,
            parent_host: None,
            embedded: 0,
            retreats: 0,
        },
    }))
}

fn eps_range(eps: &Rational) -> EmbedResult<()> {
    if *eps <= Rational::zero() || *eps >= Rational::one() {
        return Err(EmbedError::Invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// Arity and depth of the small-tree branch: `r = floor(1/(16 eps)) - 2`,
/// `h` the least integer with `r^h >= eps m`.
pub fn small_tree_shape(eps: &Rational, m: usize) -> EmbedResult<(usize, usize)> {
    if *eps <= Rational::zero() {
        return Err(EmbedError::Invalid("eps must be positive".into()));
    }
    let r = (Rational::one() / (Rational::from_integer(16) * eps)).floor().to_integer() - 2;
    if r < 2 {
        return Err(EmbedError::Invalid(format!("arity < 2: floor(1/(16 eps)) - 2 = {r} for eps = {eps}")));
    }
    let r = r as usize;
    Ok((r, depth_for(r, &(*eps * Rational::from_integer(m as i128)))))
}

/// Depth of the binary trees used for long joining paths.
pub fn large_tree_depth(eps: &Rational, m: usize) -> usize {
    depth_for(2, &(*eps * Rational::from_integer(m as i128)))
}

/// `T^(r,h)_ell` with the small-tree arity and depth, after cleaning the pair.
pub fn embed_small_trhl(
    g: &Graph,
    v1: &[Vertex],
    v2: &[Vertex],
    eps: &Rational,
    m: usize,
    ell: usize,
) -> EmbedResult<TreeEmbedding> {
    let (r, h) = small_tree_shape(eps, m)?;
    eps_range(eps)?;
    let spec = TreeSpec::new(r, h, ell)?;
    embed_small_with(g, v1, v2, eps, m, spec, Side::Left)
}

/// Cleans `(v1, v2)` with the first corollary case and embeds `spec` whole.
/// Copy-A leaves land on `a_leaves`; copy-B leaves on the same side when
/// `ell` is even and on the other side when it is odd.
pub fn embed_small_with(
    g: &Graph,
    v1: &[Vertex],
    v2: &[Vertex],
    eps: &Rational,
    m: usize,
    spec: TreeSpec,
    a_leaves: Side,
) -> EmbedResult<TreeEmbedding> {
    let pm = PairMasks::new(g, v1, v2)?;
    let params = match expander::corollary_cleanup(eps, m, CorollaryCase::One) {
        Ok(p) => p,
        Err(_) => expander::CleanupParams::unchecked(
            *eps,
            m,
            Rational::from_integer(6) * *eps,
            Rational::one() / (Rational::from_integer(8) * *eps) + Rational::one(),
        ),
    };
    let cleaned = expander::cleanup_to_expander(g, v1, v2, &params, None)?;
    let mut trace = EmbedTrace {
        layout: Some(Layout::Whole),
        removed: [
            cleaned.removed_left.iter().map(|r| r.set.len()).sum(),
            cleaned.removed_right.iter().map(|r| r.set.len()).sum(),
        ],
        ..Default::default()
    };
    let (u1, u2) = match cleaned.outcome {
        CleanupOutcome::Success { u1, u2 } => (u1, u2),
        CleanupOutcome::EpsWitness { a1, a2 } => return Err(EmbedError::Cleanup { a1, a2 }),
        CleanupOutcome::Inconclusive { side } => return Err(EmbedError::CleanupInconclusive { side }),
    };
    let (tree, map) = embed_whole(g, &u1, &u2, spec, a_leaves, &mut trace)?;
    finish(g, v1, v2, tree, map, &pm.side, trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LargeOptions {
    pub layout: LayoutChoice,
    pub stream: RngStream,
    /// Restarts of the long-path search.
    pub restarts: usize,
}

impl LargeOptions {
    pub fn new(stream: RngStream) -> Self {
        Self {
            layout: LayoutChoice::Auto,
            stream,
            restarts: 4,
        }
    }
}

/// `T^(2,h)_ell` with `h = ceil(log2(eps m))`, built from a long path with a
/// binary tree hung off each end.
///
/// For even `ell` every leaf lands on `leaf_side`; for odd `ell` the copy-A
/// leaves do and copy B takes the other side.
#[allow(clippy::too_many_arguments)]
pub fn embed_large_trhl(
    g: &Graph,
    v1: &[Vertex],
    v2: &[Vertex],
    eps: &Rational,
    m: usize,
    ell: usize,
    leaf_side: Side,
    opts: LargeOptions,
) -> EmbedResult<TreeEmbedding> {
    eps_range(eps)?;
    let spec = TreeSpec::new(2, large_tree_depth(eps, m), ell)?;
    embed_large_with(g, v1, v2, eps, m, spec, leaf_side, opts)
}

/// As [`embed_large_trhl`] with an explicit tree shape and no range check on
/// `eps` (the caller may pass rescaled sub-cluster parameters).
#[allow(clippy::too_many_arguments)]
pub fn embed_large_with(
    g: &Graph,
    v1: &[Vertex],
    v2: &[Vertex],
    eps: &Rational,
    m: usize,
    spec: TreeSpec,
    a_leaves: Side,
    opts: LargeOptions,
) -> EmbedResult<TreeEmbedding> {
    let pm = PairMasks::new(g, v1, v2)?;
    let mut trace = EmbedTrace::default();
    if spec.ell < 3 {
        trace.layout = Some(Layout::Whole);
        trace.fallback = Some(format!("joining path of length {} embedded directly", spec.ell));
        let (tree, map) = embed_whole(g, v1, v2, spec, a_leaves, &mut trace)?;
        return finish(g, v1, v2, tree, map, &pm.side, trace);
    }
    let th = *eps * Rational::from_integer(m as i128);
    let em = th.ceil().to_integer().max(1) as usize;
    let q = 4 * em;
    if opts.layout != LayoutChoice::Free {
        let corner = (Rational::from_integer(21) * th).ceil().to_integer().max(1) as usize;
        let middle = ((Rational::one() - Rational::from_integer(43) * *eps) * Rational::from_integer(m as i128))
            .floor()
            .to_integer()
            .max(0) as usize;
        let needed = spec.ell + q - 4;
        let reason = if middle == 0 {
            Some("middle blocks would be empty".to_string())
        } else if 2 * corner + middle > v1.len().min(v2.len()) {
            Some(format!(
                "two corners of {corner} and a middle of {middle} exceed a side of {}",
                v1.len().min(v2.len())
            ))
        } else if needed + 1 > 2 * middle {
            Some(format!("path of length {needed} cannot fit in middle blocks of {middle}"))
        } else {
            None
        };
        trace.corner_size = Some(corner);
        trace.middle_size = Some(middle);
        trace.path_needed = Some(needed);
        match reason {
            None => {
                let mut t = trace.clone();
                match proof_layout(g, v1, v2, eps, m, spec, a_leaves, opts, corner, middle, q, &pm, &mut t) {
                    Ok(e) => return Ok(e),
                    Err(e) if opts.layout == LayoutChoice::Proof => return Err(e),
                    Err(e) => trace.fallback = Some(format!("proof layout failed at {}: {e}", e.stage())),
                }
            }
            Some(r) if opts.layout == LayoutChoice::Proof => return Err(EmbedError::Invalid(r)),
            Some(r) => trace.fallback = Some(r),
        }
    }
    free_layout(g, v1, v2, spec, a_leaves, opts, &pm, trace)
}

/// Cross-edge subgraph on `a ∪ b`; returns it with the local-to-host map.
fn cross_subgraph(g: &Graph, a: &[Vertex], b: &[Vertex]) -> (Graph, Vec<Vertex>) {
    let mut set = a.to_vec();
    set.extend_from_slice(b);
    let (sub, map) = graph::induced_subgraph(g, &set).expect("pair vertices are valid");
    let left = a.len();
    let cross = sub.filter_edges(|u, v| (u < left) != (v < left));
    (cross, map)
}

fn long_path(g: &Graph, a: &[Vertex], b: &[Vertex], stream: RngStream, restarts: usize) -> VertexSeq {
    let (h, map) = cross_subgraph(g, a, b);
    let p = expander::longest_path_greedy(&h, stream, restarts);
    p.into_iter().map(|v| map[v]).collect()
}

struct Hung {
    root: Vertex,
    map: Vec<Vertex>,
}

/// Tries neighbours of `at` on `root_side` as roots of `T^(r,h)`.
#[allow(clippy::too_many_arguments)]
fn hang_tree(
    g: &Graph,
    rooted: &RootedTree,
    at: Vertex,
    root_side: Side,
    masks: &[Vec<bool>; 2],
    used: &mut [bool],
    attempts: &mut usize,
) -> Option<Hung> {
    let allowed = [&masks[root_side.index()][..], &masks[root_side.other().index()][..]];
    let mut cand: Vec<Vertex> = g
        .neighbors(at)
        .iter()
        .copied()
        .filter(|&w| allowed[0][w] && !used[w])
        .collect();
    cand.sort_unstable();
    for &w in cand.iter().take(ATTACH_ROOTS) {
        *attempts += 1;
        if let Ok(map) = embed_rooted(g, rooted, w, allowed, used, RETREATS_PER_VERTEX * rooted.len()) {
            return Some(Hung { root: w, map });
        }
    }
    None
}

fn release(used: &mut [bool], vs: &[Vertex]) {
    for &v in vs {
        used[v] = false;
    }
}

/// Joins the two hung trees and the window into one abstract embedding.
/// `first` hangs at `window[0]`, `second` at its last vertex.
fn assemble(
    spec: TreeSpec,
    first: Hung,
    second: Hung,
    window: &[Vertex],
    first_is_a: bool,
) -> EmbedResult<(AbstractTree, Vec<Vertex>)> {
    let tree = make_trhl(spec)?;
    let (a, b, inner): (Hung, Hung, Vec<Vertex>) = if first_is_a {
        (first, second, window.to_vec())
    } else {
        (second, first, window.iter().rev().copied().collect())
    };
    let mut map = Vec::with_capacity(tree.len());
    debug_assert_eq!(a.map[0], a.root);
    map.extend_from_slice(&a.map);
    map.extend_from_slice(&inner);
    debug_assert_eq!(b.map[0], b.root);
    map.extend_from_slice(&b.map);
    Ok((tree, map))
}

#[allow(clippy::too_many_arguments)]
fn proof_layout(
    g: &Graph,
    v1: &[Vertex],
    v2: &[Vertex],
    eps: &Rational,
    m: usize,
    spec: TreeSpec,
    a_leaves: Side,
    opts: LargeOptions,
    corner: usize,
    middle: usize,
    q: usize,
    pm: &PairMasks,
    trace: &mut EmbedTrace,
) -> EmbedResult<TreeEmbedding> {
    let mut rng = opts.stream.child(0).rng();
    let mut a = v1.to_vec();
    let mut b = v2.to_vec();
    a.shuffle(&mut rng);
    b.shuffle(&mut rng);
    let (u11, u12, x1) = (&a[..corner], &a[corner..2 * corner], &a[2 * corner..2 * corner + middle]);
    let (u21, u22, x2) = (&b[..corner], &b[corner..2 * corner], &b[2 * corner..2 * corner + middle]);
    let params = expander::CleanupParams::unchecked(
        *eps,
        m,
        Rational::new(1, 10),
        Rational::from_integer(9),
    );
    let mut corners = Vec::new();
    for (ua, ub) in [(u11, u21), (u12, u22)] {
        let c = expander::cleanup_to_expander(g, ua, ub, &params, None)?;
        trace.removed[0] += c.removed_left.iter().map(|r| r.set.len()).sum::<usize>();
        trace.removed[1] += c.removed_right.iter().map(|r| r.set.len()).sum::<usize>();
        match c.outcome {
            CleanupOutcome::Success { u1, u2 } => corners.push(PairMasks::sub(g, &u1, &u2)),
            CleanupOutcome::EpsWitness { a1, a2 } => return Err(EmbedError::Cleanup { a1, a2 }),
            CleanupOutcome::Inconclusive { side } => return Err(EmbedError::CleanupInconclusive { side }),
        }
    }
    let needed = spec.ell + q - 4;
    let mut p = long_path(g, x1, x2, opts.stream.child(1), opts.restarts);
    let found = p.len().saturating_sub(1);
    trace.path_found = Some(found);
    if found < needed {
        return Err(EmbedError::Path { needed, found });
    }
    p.truncate(needed + 1);
    let odd = spec.ell % 2 == 1;
    if odd && pm.side[p[0]] != Some(Side::Left) {
        p.reverse();
    }
    // Tree 1 hangs off u_s into corner pair 1, tree 2 off v_{q-s} into corner
    // pair 2. Roots sit on `sides[i]`.
    let start_side = pm.side[p[0]].expect("path inside the pair");
    let (sides, s_odd) = if odd {
        ([Side::Right, Side::Left], true)
    } else {
        let r = root_side(a_leaves, spec.h);
        ([r, r], start_side == r.other())
    };
    let rooted = RootedTree::complete(spec.r, spec.h)?;
    let mut used = vec![false; g.n()];
    let big_l = needed;
    let mut scanned = 0;
    for s in (1..q).filter(|s| (s % 2 == 1) == s_odd) {
        scanned += 1;
        let lo = s - 1;
        let hi = big_l + s + 1 - q;
        let window = &p[lo..=hi];
        for &v in window {
            used[v] = true;
        }
        let first = hang_tree(g, &rooted, p[lo], sides[0], &corners[0], &mut used, &mut trace.root_attempts);
        let second = first
            .as_ref()
            .and_then(|_| hang_tree(g, &rooted, p[hi], sides[1], &corners[1], &mut used, &mut trace.root_attempts));
        match (first, second) {
            (Some(f), Some(sc)) => {
                trace.layout = Some(Layout::Proof);
                trace.attachment = Some(s);
                let first_leaf = leaf_side_of(sides[0], spec.h);
                let first_is_a = first_leaf == a_leaves;
                let (tree, map) = assemble(spec, f, sc, window, first_is_a)?;
                return finish(g, v1, v2, tree, map, &pm.side, trace.clone());
            }
            (f, _) => {
                if let Some(f) = f {
                    release(&mut used, &f.map);
                }
                release(&mut used, window);
            }
        }
    }
    Err(EmbedError::Attachment { scanned })
}

fn leaf_side_of(root: Side, h: usize) -> Side {
    if h.is_multiple_of(2) {
        root
    } else {
        root.other()
    }
}

#[allow(clippy::too_many_arguments)]
fn free_layout(
    g: &Graph,
    v1: &[Vertex],
    v2: &[Vertex],
    spec: TreeSpec,
    a_leaves: Side,
    opts: LargeOptions,
    pm: &PairMasks,
    mut trace: EmbedTrace,
) -> EmbedResult<TreeEmbedding> {
    let inner = spec.ell - 2;
    let p = long_path(g, v1, v2, opts.stream.child(2), opts.restarts);
    let found = p.len().saturating_sub(1);
    trace.path_needed = Some(inner);
    trace.path_found = Some(found);
    if p.is_empty() || found < inner {
        return Err(EmbedError::Path { needed: inner, found });
    }
    let rooted = RootedTree::complete(spec.r, spec.h)?;
    let mut used = vec![false; g.n()];
    let even = spec.ell.is_multiple_of(2);
    let want_root = root_side(a_leaves, spec.h);
    let mut scanned = 0;
    for o in 0..=found - inner {
        let (u, v) = (p[o], p[o + inner]);
        let su = pm.side[u].expect("path inside the pair");
        let sv = pm.side[v].expect("path inside the pair");
        if even && su != want_root.other() {
            continue;
        }
        scanned += 1;
        let window = &p[o..=o + inner];
        for &w in window {
            used[w] = true;
        }
        let first = hang_tree(g, &rooted, u, su.other(), &pm.masks, &mut used, &mut trace.root_attempts);
        let second = first
            .as_ref()
            .and_then(|_| hang_tree(g, &rooted, v, sv.other(), &pm.masks, &mut used, &mut trace.root_attempts));
        match (first, second) {
            (Some(f), Some(sc)) => {
                trace.layout = Some(Layout::Free);
                trace.attachment = Some(o);
                let first_is_a = leaf_side_of(su.other(), spec.h) == a_leaves;
                let (tree, map) = assemble(spec, f, sc, window, first_is_a)?;
                return finish(g, v1, v2, tree, map, &pm.side, trace);
            }
            (f, _) => {
                if let Some(f) = f {
                    release(&mut used, &f.map);
                }
                release(&mut used, window);
            }
        }
    }
    Err(EmbedError::Attachment { scanned })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Tree diameter by two breadth-first sweeps.
    fn diameter(t: &RootedTree) -> usize {
        let n = t.len();
        let mut adj = vec![Vec::new(); n];
        for (p, c) in t.edges() {
            adj[p].push(c);
            adj[c].push(p);
        }
        let far = |s: usize| {
            let mut d = vec![usize::MAX; n];
            d[s] = 0;
            let mut q = std::collections::VecDeque::from([s]);
            let mut last = s;
            while let Some(v) = q.pop_front() {
                last = v;
                for &w in &adj[v] {
                    if d[w] == usize::MAX {
                        d[w] = d[v] + 1;
                        q.push_back(w);
                    }
                }
            }
            (last, d[last])
        };
        far(far(0).0).1
    }

    fn random_bipartite(a: usize, b: usize, p: f64, seed: u64) -> (Graph, Vec<Vertex>, Vec<Vertex>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..a {
            for v in 0..b {
                if rng.random_bool(p) {
                    edges.push((u, a + v));
                }
            }
        }
        (
            Graph::from_edges(a + b, edges).unwrap(),
            (0..a).collect(),
            (a..a + b).collect(),
        )
    }

    #[test]
    fn make_trhl_examples() {
        let t = make_trhl(TreeSpec::new(2, 1, 1).unwrap()).unwrap();
        assert_eq!(t.len(), 6);
        assert_eq!(diameter(&t.tree), 3);
        assert_eq!((t.leaves_a.len(), t.leaves_b.len()), (2, 2));
        let t = make_trhl(TreeSpec::new(2, 2, 3).unwrap()).unwrap();
        assert_eq!(t.len(), 16);
        assert_eq!(diameter(&t.tree), 7);
        let t = make_trhl(TreeSpec::new(5, 0, 4).unwrap()).unwrap();
        assert_eq!(t.len(), 5);
        assert_eq!(t.tree.max_degree(), 2);
        assert!(TreeSpec::new(2, 1, 0).is_err());
        assert!(TreeSpec::new(0, 1, 1).is_err());
    }

    #[test]
    fn make_trhl_grid() {
        for r in 2..=6usize {
            for h in 0..=6usize {
                for ell in 1..=20usize {
                    let t = make_trhl(TreeSpec::new(r, h, ell).unwrap()).unwrap();
                    let expected = ell - 1 + 2 * (r.pow(h as u32 + 1) - 1) / (r - 1);
                    assert_eq!(t.len(), expected, "r={r} h={h} ell={ell}");
                    assert_eq!(t.leaves_a.len(), r.pow(h as u32));
                    t.check().unwrap();
                    if r <= 3 || h <= 4 {
                        assert_eq!(diameter(&t.tree), ell + 2 * h, "r={r} h={h} ell={ell}");
                    }
                }
            }
        }
        let t = make_trhl(TreeSpec::new(1, 3, 2).unwrap()).unwrap();
        assert_eq!(t.len(), 2 + 1 + 2 * 3);
    }

    #[test]
    fn fp_star_and_matching() {
        let g = Graph::complete_bipartite(20, 20);
        let map = fp_embed_tree(&g, &RootedTree::star(5), 0, 5).unwrap();
        assert_eq!(map[0], 0);
        assert!(map[1..].iter().all(|&v| v >= 20));
        let matching = Graph::from_edges(8, [(0, 4), (1, 5), (2, 6), (3, 7)]).unwrap();
        for root in 0..8 {
            assert!(matches!(
                fp_embed_tree(&matching, &RootedTree::star(2), root, 2),
                Err(EmbedError::Tree { .. })
            ));
        }
        assert!(matches!(
            fp_embed_tree(&matching, &RootedTree::star(2), 8, 2),
            Err(EmbedError::Invalid(_))
        ));
        assert!(matches!(
            fp_embed_tree(&g, &RootedTree::star(5), 0, 4),
            Err(EmbedError::Invalid(_))
        ));
    }

    #[test]
    fn fp_binary_tree_in_random_pairs() {
        let tree = RootedTree::complete(2, 5).unwrap();
        assert_eq!(tree.len(), 63);
        let mut ok = 0;
        for seed in 0..50 {
            let (g, _, _) = random_bipartite(200, 200, 0.1, seed);
            let root = (seed as usize * 7) % 400;
            if let Ok(map) = fp_embed_tree(&g, &tree, root, 3) {
                check_map(&g, &tree, &map).unwrap();
                ok += 1;
            }
        }
        assert!(ok >= 48, "{ok} of 50");
    }

    #[test]
    fn small_branch_rejects_degenerate_arity() {
        let g = Graph::complete_bipartite(64, 64);
        let (a, b): (Vec<_>, Vec<_>) = ((0..64).collect(), (64..128).collect());
        let err = embed_small_trhl(&g, &a, &b, &Rational::new(1, 32), 64, 3).unwrap_err();
        assert!(err.to_string().contains("arity < 2"), "{err}");
    }

    #[test]
    fn small_branch_dense_random_pair() {
        let (g, a, b) = random_bipartite(500, 500, 0.2, 11);
        let eps = Rational::new(1, 100);
        assert_eq!(small_tree_shape(&eps, 500).unwrap(), (4, 2));
        let e = embed_small_trhl(&g, &a, &b, &eps, 500, 9).unwrap();
        assert_eq!(e.map.len(), 50);
        e.verify(&g, &a, &b).unwrap();
        assert_eq!(diameter(&e.tree.tree), 9 + 4);
        assert_eq!(e.host_leaves(Copy::A).len(), 16);
        // odd ell: copy A leaves on the left, copy B on the right
        assert_eq!(e.leaf_side(Copy::A), Side::Left);
        assert_eq!(e.leaf_side(Copy::B), Side::Right);
    }

    #[test]
    fn small_branch_minimal_ell() {
        let g = Graph::complete_bipartite(100, 100);
        let (a, b): (Vec<_>, Vec<_>) = ((0..100).collect(), (100..200).collect());
        let e = embed_small_trhl(&g, &a, &b, &Rational::new(1, 100), 100, 1).unwrap();
        e.verify(&g, &a, &b).unwrap();
        assert_eq!(e.tree.path.len(), 2);
        let (la, lb) = (e.host_leaves(Copy::A), e.host_leaves(Copy::B));
        let p = e.leaf_to_leaf(Copy::A, la[0], lb[0]).unwrap();
        assert_eq!(graph::verify_path(&g, &p).unwrap(), 1 + 2 * e.tree.spec.h);
    }

    /// Two K_{50,50} blocks plus a random middle of density 1/2.
    fn planted_pair(seed: u64) -> (Graph, Vec<Vertex>, Vec<Vertex>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..200usize {
            for v in 0..200usize {
                let keep = match (u / 50, v / 50) {
                    (0, 0) | (1, 1) => true,
                    (x, y) if x >= 2 && y >= 2 => rng.random_bool(0.5),
                    _ => false,
                };
                if keep {
                    edges.push((u, 200 + v));
                }
            }
        }
        (
            Graph::from_edges(400, edges).unwrap(),
            (0..200).collect(),
            (200..400).collect(),
        )
    }

    #[test]
    fn large_odd_planted() {
        let (g, a, b) = planted_pair(5);
        let eps = Rational::new(1, 50);
        let e = embed_large_trhl(&g, &a, &b, &eps, 200, 151, Side::Left, LargeOptions::new(RngStream::new(1, 0))).unwrap();
        e.verify(&g, &a, &b).unwrap();
        assert_eq!(e.tree.spec.h, 2);
        assert_eq!(diameter(&e.tree.tree), 151 + 4);
        assert_eq!(e.leaf_side(Copy::A), Side::Left);
        assert_eq!(e.leaf_side(Copy::B), Side::Right);
        let (la, lb) = (e.host_leaves(Copy::A), e.host_leaves(Copy::B));
        let p = e.leaf_to_leaf(Copy::B, lb[3], la[1]).unwrap();
        assert_eq!(graph::verify_path(&g, &p).unwrap(), 155);
        assert!(e.trace.layout.is_some());
    }

    #[test]
    fn large_even_leaf_side() {
        let (g, a, b) = planted_pair(6);
        let eps = Rational::new(1, 50);
        for side in [Side::Left, Side::Right] {
            let e = embed_large_trhl(&g, &a, &b, &eps, 200, 150, side, LargeOptions::new(RngStream::new(2, 0))).unwrap();
            e.verify(&g, &a, &b).unwrap();
            let mask = graph::mask(400, if side == Side::Left { &a } else { &b });
            for copy in [Copy::A, Copy::B] {
                assert!(e.host_leaves(copy).iter().all(|&v| mask[v]));
            }
            assert_eq!(diameter(&e.tree.tree), 154);
        }
    }

    #[test]
    fn large_proof_layout_on_complete_pair() {
        let g = Graph::complete_bipartite(300, 300);
        let (a, b): (Vec<_>, Vec<_>) = ((0..300).collect(), (300..600).collect());
        let eps = Rational::new(1, 100);
        for ell in [151, 150, 3, 4] {
            let mut opts = LargeOptions::new(RngStream::new(3, ell as u64));
            opts.layout = LayoutChoice::Proof;
            let e = embed_large_trhl(&g, &a, &b, &eps, 300, ell, Side::Right, opts).unwrap();
            e.verify(&g, &a, &b).unwrap();
            assert_eq!(e.trace.layout, Some(Layout::Proof));
            // smallest admissible attachment index
            assert!(e.trace.attachment.unwrap() <= 2);
            assert_eq!(e.leaf_side(Copy::A), Side::Right);
        }
    }

    #[test]
    fn large_empty_pair_fails_at_path() {
        let g = Graph::empty(400);
        let (a, b): (Vec<_>, Vec<_>) = ((0..200).collect(), (200..400).collect());
        let err = embed_large_trhl(
            &g,
            &a,
            &b,
            &Rational::new(1, 50),
            200,
            151,
            Side::Left,
            LargeOptions::new(RngStream::new(0, 0)),
        )
        .unwrap_err();
        assert_eq!(err.stage(), "path");
    }
}
