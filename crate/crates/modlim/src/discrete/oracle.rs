//! Label-setting shortest-path oracle for the constraint generator.
//!
//! Paths are weighted by the trapezoid rule, `(ρ(u) + ρ(v))/2 · step`,
//! which makes edge weights nonnegative for ρ ≥ 0 — Dijkstra's label
//! setting applies.  Ties in ρ-length are broken by Euclidean length and
//! then by node id, which keeps the oracle deterministic even on the flat
//! initial density ρ ≡ 0.

use super::raster::DiscreteDomain;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Lexicographic key (ρ-length, Euclidean length, node), min-ordered via
/// `Reverse`-free manual flipping in the `Ord` impl.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Key {
    dist: f64,
    eu: f64,
    node: u32,
}

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we pop the smallest key.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.eu.total_cmp(&self.eu))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) const NO_PRED: u32 = u32::MAX;

/// One shortest source→sink path.
#[derive(Debug, Clone)]
pub(crate) struct PathResult {
    pub len: f64,
    pub path: Vec<u32>,
}

/// Shortest-path labels from a node set, swept to exhaustion.
pub(crate) struct Labels {
    pub dist: Vec<f64>,
    pub pred: Vec<u32>,
}

impl Labels {
    /// Walk predecessors from `v` back to the originating set (pred chain
    /// ends at `NO_PRED`); returns the node sequence ending at `v`'s origin.
    pub fn walk_back(&self, v: u32) -> Vec<u32> {
        let mut out = vec![v];
        let mut cur = v;
        while self.pred[cur as usize] != NO_PRED {
            cur = self.pred[cur as usize];
            out.push(cur);
        }
        out
    }
}

/// Window predicate: node column within `[w.0, w.1]` (inclusive); `None`
/// admits every node.
type Window = Option<(usize, usize)>;

fn in_window(dd: &DiscreteDomain, window: Window, v: u32) -> bool {
    match window {
        None => true,
        Some((lo, hi)) => {
            let (c, _) = dd.col_row(v);
            lo <= c && c <= hi
        }
    }
}

/// Run label setting from `seeds` until exhaustion (`stop_at_sink = false`)
/// or until the first sink pops (`stop_at_sink = true`, returning early).
/// Returns the labels and, when stopped at a sink, that sink.
fn sweep(
    dd: &DiscreteDomain,
    rho: &[f64],
    seeds: &[u32],
    window: Window,
    stop_at_sink: bool,
) -> (Labels, Option<u32>) {
    let n = dd.n_nodes();
    let mut dist = vec![f64::INFINITY; n];
    let mut eu = vec![f64::INFINITY; n];
    let mut pred = vec![NO_PRED; n];
    let mut settled = vec![false; n];
    let mut heap: BinaryHeap<Key> = BinaryHeap::new();
    for &s in seeds {
        if in_window(dd, window, s) {
            dist[s as usize] = 0.0;
            eu[s as usize] = 0.0;
            heap.push(Key {
                dist: 0.0,
                eu: 0.0,
                node: s,
            });
        }
    }
    while let Some(Key { dist: d, eu: e, node: u }) = heap.pop() {
        let ui = u as usize;
        if settled[ui] {
            continue;
        }
        settled[ui] = true;
        if stop_at_sink && dd.is_sink(u) {
            return (Labels { dist, pred }, Some(u));
        }
        dd.for_each_neighbor(u, |v, step| {
            let vi = v as usize;
            if settled[vi] || !in_window(dd, window, v) {
                return;
            }
            let w = 0.5 * (rho[ui] + rho[vi]) * step;
            let nd = d + w;
            let ne = e + step;
            if nd < dist[vi] || (nd == dist[vi] && ne < eu[vi]) {
                dist[vi] = nd;
                eu[vi] = ne;
                pred[vi] = u;
                heap.push(Key {
                    dist: nd,
                    eu: ne,
                    node: v,
                });
            }
        });
    }
    (Labels { dist, pred }, None)
}

/// Cheapest source→sink path under `rho`, or `None` when the arcs are not
/// connected (within the window, if one is given).
pub(crate) fn shortest_to_sink(
    dd: &DiscreteDomain,
    rho: &[f64],
    window: Window,
) -> Option<PathResult> {
    let (labels, hit) = sweep(dd, rho, dd.sources(), window, true);
    let sink = hit?;
    let mut path = labels.walk_back(sink);
    path.reverse();
    Some(PathResult {
        len: labels.dist[sink as usize],
        path,
    })
}

/// Full label sweeps from the sources and from the sinks (the graph is
/// undirected, so sink labels give distances *to* the sink set).
pub(crate) fn forward_backward(dd: &DiscreteDomain, rho: &[f64]) -> (Labels, Labels) {
    let (fwd, _) = sweep(dd, rho, dd.sources(), None, false);
    let (bwd, _) = sweep(dd, rho, dd.sinks(), None, false);
    (fwd, bwd)
}

/// For each column, the best through-node path (forward tree to `v` plus
/// backward tree from `v`) with combined ρ-length below `threshold`; one
/// candidate per column, deduplicated and restricted to simple paths.
pub(crate) fn per_column_paths(
    dd: &DiscreteDomain,
    fwd: &Labels,
    bwd: &Labels,
    threshold: f64,
) -> Vec<PathResult> {
    let mut out = Vec::new();
    for c in 0..dd.cols() {
        let mut best: Option<(f64, u32)> = None;
        for r in 0..=dd.top_row(c) {
            let v = dd.node_id(c, r);
            let (df, db) = (fwd.dist[v as usize], bwd.dist[v as usize]);
            if df.is_finite() && db.is_finite() {
                let tot = df + db;
                if best.map_or(true, |(b, _)| tot < b) {
                    best = Some((tot, v));
                }
            }
        }
        let Some((len, v)) = best else { continue };
        if len >= threshold {
            continue;
        }
        // Stitch: source→v from the forward tree, then v→sink from the
        // backward tree (skipping the duplicated v).
        let mut path = fwd.walk_back(v);
        path.reverse();
        let tail = bwd.walk_back(v);
        path.extend(tail.iter().skip(1));
        // Only simple paths become constraints: a self-intersecting stitch
        // is dominated by the simple path inside it.
        let mut seen = std::collections::HashSet::with_capacity(path.len());
        if path.iter().all(|&n| seen.insert(n)) {
            out.push(PathResult { len, path });
        }
    }
    out
}

/// Scan all width-`kcols` windows: returns the best path overall and every
/// per-window best path below `threshold` (one candidate per window).
pub(crate) fn windowed_paths(
    dd: &DiscreteDomain,
    rho: &[f64],
    kcols: usize,
    threshold: f64,
) -> (Option<PathResult>, Vec<PathResult>) {
    let cols = dd.cols();
    let width = kcols.min(cols - 1);
    let (src_lo, src_hi) = dd.source_col_range();
    let sink_cols = dd.sink_cols();
    let mut best: Option<PathResult> = None;
    let mut violated: Vec<PathResult> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for w0 in 0..cols - width {
        let w1 = w0 + width;
        // Cheap feasibility: some source column and some sink column in the
        // window.
        if src_hi < w0 || src_lo > w1 {
            continue;
        }
        let any_sink = sink_cols
            .binary_search(&w0)
            .map_or_else(|i| i < sink_cols.len() && sink_cols[i] <= w1, |_| true);
        if !any_sink {
            continue;
        }
        let Some(found) = shortest_to_sink(dd, rho, Some((w0, w1))) else {
            continue;
        };
        if best.as_ref().map_or(true, |b| found.len < b.len) {
            best = Some(found.clone());
        }
        if found.len < threshold && seen.insert(found.path.clone()) {
            violated.push(found);
        }
    }
    (best, violated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::rasterize;
    use crate::domain::{build_graph_domain, BoundaryFunction, BoundaryQuadruple, Interval};

    fn unit_square(h: f64) -> DiscreteDomain {
        let f =
            BoundaryFunction::constant(Interval::new(0.0, 1.0).unwrap(), 1.0).unwrap();
        let d = build_graph_domain(f).unwrap();
        rasterize(&d, h, &BoundaryQuadruple::full_arcs(&d)).unwrap()
    }

    #[test]
    fn unit_density_shortest_path_is_vertical() {
        let g = unit_square(0.25);
        let rho = vec![1.0; g.n_nodes()];
        let r = shortest_to_sink(&g, &rho, None).unwrap();
        // Height 1 at unit density, minus the half-weight endpoints:
        // trapezoid rule gives exactly 1.0 for constant ρ.
        assert!((r.len - 1.0).abs() < 1e-12, "{}", r.len);
        // The path is a straight column: constant x.
        let xs: Vec<f64> = r.path.iter().map(|&v| g.xy(v).0).collect();
        assert!(xs.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(r.path.len(), 5);
    }

    #[test]
    fn zero_density_paths_tie_break_on_euclidean_length() {
        let g = unit_square(0.25);
        let rho = vec![0.0; g.n_nodes()];
        let r = shortest_to_sink(&g, &rho, None).unwrap();
        assert_eq!(r.len, 0.0);
        // Euclidean tie-breaking forces a shortest geometric route: straight
        // up one column (length 1, no diagonal detours).
        assert_eq!(r.path.len(), 5);
    }

    #[test]
    fn window_restriction_excludes_far_sinks() {
        // Source on the left end, sink on the right end of a flat strip.
        let f =
            BoundaryFunction::constant(Interval::new(0.0, 4.0).unwrap(), 1.0).unwrap();
        let d = build_graph_domain(f).unwrap();
        let q = BoundaryQuadruple::new(
            &d,
            crate::domain::PrimeEnd::bottom(0.0),
            crate::domain::PrimeEnd::bottom(1.0),
            crate::domain::PrimeEnd::top(4.0),
            crate::domain::PrimeEnd::top(3.0),
        )
        .unwrap();
        let g = rasterize(&d, 0.25, &q).unwrap();
        let rho = vec![0.0; g.n_nodes()];
        // Unrestricted: connected.
        assert!(shortest_to_sink(&g, &rho, None).is_some());
        // Window covering only the source columns: no sink reachable.
        assert!(shortest_to_sink(&g, &rho, Some((0, 4))).is_none());
        // windowed_paths with a window too narrow to span the gap finds
        // nothing; with a wide window it finds the connection.
        let (best, _) = windowed_paths(&g, &rho, 4, 0.5);
        assert!(best.is_none());
        let (best, violated) = windowed_paths(&g, &rho, 12, 0.5);
        assert!(best.is_some());
        assert!(!violated.is_empty());
    }

    #[test]
    fn per_column_paths_cover_every_column() {
        let g = unit_square(0.25);
        let rho = vec![0.0; g.n_nodes()];
        let (fwd, bwd) = forward_backward(&g, &rho);
        let paths = per_column_paths(&g, &fwd, &bwd, 1.0);
        // One violated candidate per column at zero density.
        assert_eq!(paths.len(), g.cols());
        for p in &paths {
            assert_eq!(p.len, 0.0);
            assert!(g.is_source(*p.path.first().unwrap()));
            assert!(g.is_sink(*p.path.last().unwrap()));
        }
    }
}
