//! Exact ground truth for small graphs: cycle spectra and longest paths.
//!
//! Two independent enumerators live here. The subset DP is the primary
//! oracle; the pruned DFS exists only to cross-check it.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal;
use crate::graph::Graph;

/// Hard cap for the subset DP.
pub const DP_CAP: usize = 14;
/// Cap for the DFS cross-check enumerator.
pub const DFS_CAP: usize = 12;
/// Cap for [`ex_check_small`].
pub const EX_CHECK_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleSpectrum {
    /// Lengths `l` in `[3, n]` for which the graph has a cycle of length `l`.
    pub present: BTreeSet<usize>,
    /// Longest path length in edges (0 for a graph with vertices but no edges).
    pub longest_path: usize,
}

impl CycleSpectrum {
    pub fn girth(&self) -> Option<usize> {
        self.present.first().copied()
    }

    pub fn circumference(&self) -> Option<usize> {
        self.present.last().copied()
    }

    pub fn shortest_odd(&self) -> Option<usize> {
        self.present.iter().copied().find(|l| l % 2 == 1)
    }

    pub fn longest_odd(&self) -> Option<usize> {
        self.present.iter().rev().copied().find(|l| l % 2 == 1)
    }
}

fn check_cap(g: &Graph, cap: usize) -> Result<()> {
    if g.n() > cap {
        Err(Error::TooLarge { n: g.n(), cap })
    } else {
        Ok(())
    }
}

fn neighbor_masks(g: &Graph) -> Vec<u32> {
    (0..g.n())
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | (1 << w)))
        .collect()
}

/// Exact spectrum via reachability DP over `(subset, endpoint)`.
///
/// `from_min[mask]` holds the endpoints of Hamiltonian paths of `mask` that
/// start at the smallest vertex of `mask`; a cycle on exactly `mask` exists
/// iff one of them is adjacent to that start. `any[mask]` drops the start
/// restriction and yields the longest path.
pub fn cycle_spectrum_exact(g: &Graph) -> Result<CycleSpectrum> {
    check_cap(g, DP_CAP)?;
    let n = g.n();
    let nb = neighbor_masks(g);
    let full = 1usize << n;
    let mut from_min = vec![0u32; full];
    let mut any = vec![0u32; full];
    let mut present = BTreeSet::new();
    let mut longest_path = 0;
    for v in 0..n {
        from_min[1 << v] = 1 << v;
        any[1 << v] = 1 << v;
    }
    for mask in 1..full {
        let size = mask.count_ones() as usize;
        let low = mask.trailing_zeros() as usize;
        if size > 1 {
            let mut fm = 0u32;
            let mut an = 0u32;
            let mut rest = mask;
            while rest != 0 {
                let w = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let prev = mask & !(1 << w);
                if any[prev] & nb[w] != 0 {
                    an |= 1 << w;
                }
                if w != low && from_min[prev] & nb[w] != 0 {
                    fm |= 1 << w;
                }
            }
            from_min[mask] = fm;
            any[mask] = an;
        }
        if any[mask] != 0 {
            longest_path = longest_path.max(size - 1);
        }
        if size >= 3 && from_min[mask] & nb[low] != 0 {
            present.insert(size);
        }
    }
    if n == 0 {
        longest_path = 0;
    }
    Ok(CycleSpectrum {
        present,
        longest_path,
    })
}

pub fn has_cycle_of_length(g: &Graph, t: usize) -> Result<bool> {
    Ok(cycle_spectrum_exact(g)?.present.contains(&t))
}

/// Length of a longest cycle, or 0 for forests.
pub fn longest_cycle_exact(g: &Graph) -> Result<usize> {
    Ok(cycle_spectrum_exact(g)?.circumference().unwrap_or(0))
}

/// Independent enumerator: explicit DFS over simple paths with early exit
/// once nothing new can be learned.
pub fn cycle_spectrum_dfs(g: &Graph) -> Result<CycleSpectrum> {
    check_cap(g, DFS_CAP)?;
    let n = g.n();
    let mut st = DfsState {
        g,
        on_path: vec![false; n],
        present: BTreeSet::new(),
        longest_path: 0,
    };
    for s in 0..n {
        st.on_path[s] = true;
        st.cycles_from(s, s, 1);
        st.on_path[s] = false;
    }
    for s in 0..n {
        if st.longest_path + 1 == n {
            break;
        }
        st.on_path[s] = true;
        st.paths_from(s, 0);
        st.on_path[s] = false;
    }
    Ok(CycleSpectrum {
        present: st.present,
        longest_path: st.longest_path,
    })
}

struct DfsState<'g> {
    g: &'g Graph,
    on_path: Vec<bool>,
    present: BTreeSet<usize>,
    longest_path: usize,
}

impl DfsState<'_> {
    /// Cycles whose smallest vertex is `start`, walking only larger vertices.
    fn cycles_from(&mut self, start: usize, u: usize, len: usize) {
        if self.g.n() >= 3 && self.present.len() == self.g.n() - 2 {
            return;
        }
        for &w in self.g.neighbors(u) {
            if w == start && len >= 3 {
                self.present.insert(len);
            } else if w > start && !self.on_path[w] {
                self.on_path[w] = true;
                self.cycles_from(start, w, len + 1);
                self.on_path[w] = false;
            }
        }
    }

    fn paths_from(&mut self, u: usize, len: usize) {
        self.longest_path = self.longest_path.max(len);
        if self.longest_path + 1 == self.g.n() {
            return;
        }
        for &w in self.g.neighbors(u) {
            if !self.on_path[w] {
                self.on_path[w] = true;
                self.paths_from(w, len + 1);
                self.on_path[w] = false;
            }
        }
    }
}

/// Outcome of checking one extremal construction against the oracle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExCheck {
    pub n: usize,
    pub t: usize,
    pub construction: String,
    pub edges: usize,
    /// `ex(n, C_t)` as given by the closed-form branch for this regime.
    pub formula_edges: usize,
    pub cycle_free: bool,
}

impl ExCheck {
    pub fn verified(&self) -> bool {
        self.cycle_free && self.edges == self.formula_edges
    }
}

/// Certifies the extremal construction for `(n, t)`: its edge count matches
/// the closed form and the oracle confirms it has no `C_t`.
///
/// Only the construction side is certified; this never claims that no
/// denser `C_t`-free graph exists.
pub fn ex_check_small(n: usize, t: usize) -> Result<ExCheck> {
    if n > EX_CHECK_CAP {
        return Err(Error::TooLarge {
            n,
            cap: EX_CHECK_CAP,
        });
    }
    let (construction, g) = extremal::extremal_example(n, t)?;
    let formula_edges = extremal::ex_cycle_construction_edges(n, t)?;
    let cycle_free = !has_cycle_of_length(&g, t)?;
    Ok(ExCheck {
        n,
        t,
        construction: construction.to_string(),
        edges: g.edge_count(),
        formula_edges,
        cycle_free,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn spectrum_examples() {
        let c7 = cycle_spectrum_exact(&Graph::cycle(7)).unwrap();
        assert_eq!(c7.present, set(&[7]));
        assert_eq!(c7.longest_path, 6);
        assert_eq!(cycle_spectrum_exact(&Graph::complete(5)).unwrap().present, set(&[3, 4, 5]));
        let w = extremal::build_woodall_graph(12, 8).unwrap();
        let s = cycle_spectrum_exact(&w).unwrap();
        assert_eq!(s.circumference(), Some(7));
        assert_eq!(cycle_spectrum_dfs(&w).unwrap(), s);
    }

    #[test]
    fn has_cycle_examples() {
        let k34 = Graph::complete_bipartite(3, 4);
        assert!(!has_cycle_of_length(&k34, 5).unwrap());
        assert!(has_cycle_of_length(&Graph::cycle(9), 9).unwrap());
        assert!(!has_cycle_of_length(&Graph::cycle(9), 8).unwrap());
        assert_eq!(longest_cycle_exact(&Graph::path(6)).unwrap(), 0);
    }

    #[test]
    fn caps_are_enforced() {
        assert!(matches!(
            cycle_spectrum_exact(&Graph::empty(15)),
            Err(Error::TooLarge { n: 15, cap: 14 })
        ));
        assert!(cycle_spectrum_dfs(&Graph::empty(13)).is_err());
        assert!(ex_check_small(11, 7).is_err());
    }

    #[test]
    fn complete_graphs_have_full_spectrum() {
        for n in 3..=10 {
            let s = cycle_spectrum_exact(&Graph::complete(n)).unwrap();
            assert_eq!(s.present, (3..=n).collect());
            assert_eq!(s.longest_path, n - 1);
        }
    }

    #[test]
    fn ex_check_examples() {
        let a = ex_check_small(8, 6).unwrap();
        assert_eq!((a.edges, a.formula_edges), (16, 16));
        assert!(a.verified());
        let b = ex_check_small(7, 5).unwrap();
        assert_eq!(b.edges, 12);
        assert!(b.verified());
        let c = ex_check_small(6, 5).unwrap();
        assert!(c.verified(), "{c:?}");
    }

    #[test]
    fn trivial_graphs() {
        let s = cycle_spectrum_exact(&Graph::empty(0)).unwrap();
        assert!(s.present.is_empty());
        assert_eq!(s.longest_path, 0);
        assert_eq!(cycle_spectrum_exact(&Graph::empty(3)).unwrap().longest_path, 0);
        assert_eq!(cycle_spectrum_dfs(&Graph::empty(3)).unwrap().longest_path, 0);
    }
}
