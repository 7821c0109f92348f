//! Rasterization of graph domains onto square grids.
//!
//! Nodes sit at `(x₀ + c·h, r·h)` for columns `c = 0..=n` and rows
//! `r = 0..=top_row(c)`.  For step profiles the jump positions are snapped
//! to the nearest column and each snapped jump becomes a vertical wall
//! column of nodes spanning the jump; the column height elsewhere follows
//! the snapped piece values.  Node quadrature weights are the exact areas
//! of the half-`h` cells clipped to the (snapped) domain, with a tiny floor
//! so that no existing node carries zero weight.
//!
//! The requested spacing is adjusted to divide the interval length evenly;
//! the effective spacing is reported on the result.

use crate::domain::{BoundaryFunction, BoundaryQuadruple, GraphDomain, ProfileKind};
use crate::discrete::DiscreteError;

/// Edge step length factor for diagonal moves.
pub(crate) const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Relative floor applied to clipped cell areas (units of `h²`).
const AREA_FLOOR_FRAC: f64 = 1e-6;

/// A rasterized domain: grid geometry, node areas, and marked source/sink
/// node sets.
#[derive(Debug, Clone)]
pub struct DiscreteDomain {
    h: f64,
    requested_h: f64,
    x0: f64,
    /// Number of columns (cells + 1).
    cols: usize,
    /// Highest row index per column; rows run `0..=top_row[c]`.
    top_row: Vec<usize>,
    /// Node-id offset of each column (prefix sums of column heights).
    offsets: Vec<u32>,
    n_nodes: usize,
    node_col: Vec<u32>,
    node_row: Vec<u32>,
    area: Vec<f64>,
    sources: Vec<u32>,
    sinks: Vec<u32>,
    is_source: Vec<bool>,
    is_sink: Vec<bool>,
}

impl DiscreteDomain {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn requested_h(&self) -> f64 {
        self.requested_h
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn top_row(&self, col: usize) -> usize {
        self.top_row[col]
    }

    pub fn node_id(&self, col: usize, row: usize) -> u32 {
        debug_assert!(row <= self.top_row[col]);
        self.offsets[col] + row as u32
    }

    pub fn col_row(&self, id: u32) -> (usize, usize) {
        (self.node_col[id as usize] as usize, self.node_row[id as usize] as usize)
    }

    /// Node position in domain coordinates.
    pub fn xy(&self, id: u32) -> (f64, f64) {
        let (c, r) = self.col_row(id);
        (self.x0 + c as f64 * self.h, r as f64 * self.h)
    }

    /// Quadrature weight (clipped cell area) of a node.
    pub fn area(&self, id: u32) -> f64 {
        self.area[id as usize]
    }

    pub fn areas(&self) -> &[f64] {
        &self.area
    }

    /// Total quadrature weight; approximates the domain area.
    pub fn total_area(&self) -> f64 {
        self.area.iter().sum()
    }

    pub fn sources(&self) -> &[u32] {
        &self.sources
    }

    pub fn sinks(&self) -> &[u32] {
        &self.sinks
    }

    pub fn is_source(&self, id: u32) -> bool {
        self.is_source[id as usize]
    }

    pub fn is_sink(&self, id: u32) -> bool {
        self.is_sink[id as usize]
    }

    /// Visit the neighbors of a node with their step lengths.  Diagonal
    /// steps require both orthogonal support nodes to exist, so that no
    /// step cuts across a boundary notch.
    pub fn for_each_neighbor<F: FnMut(u32, f64)>(&self, id: u32, mut visit: F) {
        let (c, r) = self.col_row(id);
        let c = c as isize;
        let r = r as isize;
        let exists = |cc: isize, rr: isize| -> bool {
            cc >= 0
                && (cc as usize) < self.cols
                && rr >= 0
                && (rr as usize) <= self.top_row[cc as usize]
        };
        const STEPS: [(isize, isize); 8] = [
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ];
        for (dc, dr) in STEPS {
            let (cc, rr) = (c + dc, r + dr);
            if !exists(cc, rr) {
                continue;
            }
            if dc != 0 && dr != 0 && !(exists(c + dc, r) && exists(c, r + dr)) {
                continue;
            }
            let len = if dc != 0 && dr != 0 {
                self.h * SQRT_2
            } else {
                self.h
            };
            visit(self.node_id(cc as usize, rr as usize), len);
        }
    }

    /// `ρ`-length of a node path under the trapezoid edge rule.
    pub fn path_length(&self, path: &[u32], rho: &[f64]) -> f64 {
        let mut total = 0.0;
        for w in path.windows(2) {
            let (c0, r0) = self.col_row(w[0]);
            let (c1, r1) = self.col_row(w[1]);
            let diag = c0 != c1 && r0 != r1;
            let len = if diag { self.h * SQRT_2 } else { self.h };
            total += 0.5 * (rho[w[0] as usize] + rho[w[1] as usize]) * len;
        }
        total
    }

    /// Column range `[min, max]` containing source nodes.
    pub(crate) fn source_col_range(&self) -> (usize, usize) {
        let mut lo = usize::MAX;
        let mut hi = 0;
        for &s in &self.sources {
            let (c, _) = self.col_row(s);
            lo = lo.min(c);
            hi = hi.max(c);
        }
        (lo, hi)
    }

    /// Sorted, deduplicated list of columns containing sink nodes.
    pub(crate) fn sink_cols(&self) -> Vec<usize> {
        let mut cols: Vec<usize> = self.sinks.iter().map(|&s| self.col_row(s).0).collect();
        cols.sort_unstable();
        cols.dedup();
        cols
    }
}

/// Round `v/h` to the nearest integer, breaking exact halves downward (with
/// a tiny guard band so floating-point noise around the half never flips
/// the result upward).
fn round_half_down(v: f64, h: f64) -> usize {
    ((v / h + 0.5 - 1e-9).floor().max(0.0)) as usize
}

/// Snap an x-position to its nearest column index.
fn snap_col(x: f64, x0: f64, h: f64, cols: usize) -> usize {
    (((x - x0) / h + 0.5).floor().max(0.0) as usize).min(cols - 1)
}

/// The grid skeleton without arc markings.
struct GridCore {
    h: f64,
    x0: f64,
    cols: usize,
    top_row: Vec<usize>,
    offsets: Vec<u32>,
    n_nodes: usize,
    node_col: Vec<u32>,
    node_row: Vec<u32>,
    area: Vec<f64>,
    /// Snapped jumps: `(column, low piece value, high piece value)`.
    walls: Vec<(usize, f64, f64)>,
}

/// Build the grid for a profile: snapped column heights and clipped areas.
fn build_grid(f: &BoundaryFunction, h_req: f64) -> Result<GridCore, DiscreteError> {
    if !h_req.is_finite() || !(h_req > 0.0) {
        return Err(DiscreteError::BadOptions {
            reason: format!("cell size h must be finite and positive, got {h_req}"),
        });
    }
    let iv = f.interval();
    let len = iv.length();
    // Adjust h to divide the interval length evenly.
    let ncells = ((len / h_req).round() as usize).max(1);
    let h = len / ncells as f64;
    let cols = ncells + 1;
    let x0 = iv.lo();

    // Resolution preconditions: h below the narrowest piece and below the
    // lowest profile height (so walls and pieces are individually resolved
    // and every column has at least one interior row).
    let min_w = f.min_piece_width();
    if !(h < min_w) {
        return Err(DiscreteError::ResolutionTooCoarse {
            h,
            feature: "the narrowest profile piece",
            size: min_w,
        });
    }
    let min_h = min_span_value(f);
    if !(h < min_h) {
        return Err(DiscreteError::ResolutionTooCoarse {
            h,
            feature: "the lowest profile height",
            size: min_h,
        });
    }

    // Snapped jump columns (step profiles; empty otherwise).  The piece
    // width precondition makes the snapped columns strictly increasing and
    // interior.
    let jumps = f.jumps();
    let walls: Vec<(usize, f64, f64)> = jumps
        .iter()
        .map(|j| {
            let col = snap_col(j.x, x0, h, cols);
            (col, j.left.min(j.right), j.left.max(j.right))
        })
        .collect();

    // Column heights from the snapped profile's usc envelope.
    let is_step = f.kind() == ProfileKind::Step;
    let mut top_row = vec![0usize; cols];
    if is_step {
        let (bxs, bys) = step_parts_scaled(f);
        // Snapped columns of all piece boundaries (strictly increasing: the
        // piece-width precondition keeps snapped columns distinct).
        let all_cols: Vec<usize> = bxs.iter().map(|&x| snap_col(x, x0, h, cols)).collect();
        for (c, tr) in top_row.iter_mut().enumerate() {
            // Piece index: number of boundaries whose snapped column is < c.
            let k = all_cols.partition_point(|&wc| wc < c);
            let v = if k < all_cols.len() && all_cols[k] == c {
                // On a snapped boundary column: the usc envelope, so the
                // wall spans the jump.
                bys[k].max(bys[k + 1])
            } else {
                bys[k]
            };
            *tr = round_half_down(v, h);
        }
    } else {
        for (c, tr) in top_row.iter_mut().enumerate() {
            let x = x0 + c as f64 * h;
            *tr = round_half_down(f.value(x), h);
        }
    }

    // Node layout.
    let mut offsets = Vec::with_capacity(cols + 1);
    let mut acc: u32 = 0;
    for &t in &top_row {
        offsets.push(acc);
        acc += (t + 1) as u32;
    }
    offsets.push(acc);
    let n_nodes = acc as usize;
    let mut node_col = vec![0u32; n_nodes];
    let mut node_row = vec![0u32; n_nodes];
    for c in 0..cols {
        for r in 0..=top_row[c] {
            let id = (offsets[c] + r as u32) as usize;
            node_col[id] = c as u32;
            node_row[id] = r as u32;
        }
    }

    // Clipped cell areas against the snapped profile.
    let snapped = SnappedProfile::new(f, x0, h, cols);
    let mut area = vec![0.0; n_nodes];
    let floor = AREA_FLOOR_FRAC * h * h;
    for c in 0..cols {
        let cx = x0 + c as f64 * h;
        let (x_lo, x_hi) = ((cx - 0.5 * h).max(iv.lo()), (cx + 0.5 * h).min(iv.hi()));
        for r in 0..=top_row[c] {
            let ry = r as f64 * h;
            let (y_lo, y_hi) = ((ry - 0.5 * h).max(0.0), ry + 0.5 * h);
            let a = snapped.clipped_area(x_lo, x_hi, y_lo, y_hi);
            area[(offsets[c] + r as u32) as usize] = a.max(floor);
        }
    }

    let offsets_trunc = offsets[..cols].to_vec();
    Ok(GridCore {
        h,
        x0,
        cols,
        top_row,
        offsets: offsets_trunc,
        n_nodes,
        node_col,
        node_row,
        area,
        walls,
    })
}

/// Minimum over the profile's spans (piece/knot values), ignoring stored
/// jump values: the lowest height the raster must resolve.
fn min_span_value(f: &BoundaryFunction) -> f64 {
    f.spans_in(f.interval().lo(), f.interval().hi())
        .iter()
        .map(|s| s.min())
        .fold(f64::INFINITY, f64::min)
}

fn step_parts_scaled(f: &BoundaryFunction) -> (Vec<f64>, Vec<f64>) {
    // Reconstruct scaled step parts from the spans accessor so this module
    // needs no access to profile internals.
    let iv = f.interval();
    let spans = f.spans_in(iv.lo(), iv.hi());
    let mut bxs = Vec::new();
    let mut bys = Vec::new();
    for (i, s) in spans.iter().enumerate() {
        bys.push(s.y0);
        if i + 1 < spans.len() {
            bxs.push(s.x1);
        }
    }
    (bxs, bys)
}

/// Piecewise clipping geometry: the snapped profile for step functions, or
/// the true profile for continuous kinds.
struct SnappedProfile {
    /// Linear spans `(x0, x1, y0, y1)` covering the interval.
    spans: Vec<(f64, f64, f64, f64)>,
}

impl SnappedProfile {
    fn new(f: &BoundaryFunction, x0: f64, h: f64, cols: usize) -> Self {
        let iv = f.interval();
        let spans = if f.kind() == ProfileKind::Step {
            let all = f.spans_in(iv.lo(), iv.hi());
            // Move each internal span boundary to its snapped x-position.
            let mut cuts = vec![iv.lo()];
            for s in all.iter().take(all.len().saturating_sub(1)) {
                let col = snap_col(s.x1, x0, h, cols);
                cuts.push(x0 + col as f64 * h);
            }
            cuts.push(iv.hi());
            all.iter()
                .enumerate()
                .map(|(i, s)| (cuts[i], cuts[i + 1], s.y0, s.y0))
                .collect()
        } else {
            f.spans_in(iv.lo(), iv.hi())
                .iter()
                .map(|s| (s.x0, s.x1, s.y0, s.y1))
                .collect()
        };
        SnappedProfile { spans }
    }

    /// Area of `[x_lo, x_hi] × [y_lo, y_hi]` intersected with the region
    /// under the profile (`0 ≤ y ≤ profile(x)`), exactly.
    fn clipped_area(&self, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> f64 {
        if x_hi <= x_lo || y_hi <= y_lo {
            return 0.0;
        }
        let mut total = 0.0;
        for &(sx0, sx1, sy0, sy1) in &self.spans {
            let (a, b) = (sx0.max(x_lo), sx1.min(x_hi));
            if b <= a {
                continue;
            }
            total += integrate_band(sx0, sx1, sy0, sy1, a, b, y_lo, y_hi);
        }
        total
    }
}

/// `∫_a^b [min(v(t), y_hi) − y_lo]₊ dt` for the linear `v` through
/// `(sx0, sy0)–(sx1, sy1)`, exactly (split at the level crossings).
#[allow(clippy::too_many_arguments)]
fn integrate_band(
    sx0: f64,
    sx1: f64,
    sy0: f64,
    sy1: f64,
    a: f64,
    b: f64,
    y_lo: f64,
    y_hi: f64,
) -> f64 {
    let slope = if sx1 > sx0 { (sy1 - sy0) / (sx1 - sx0) } else { 0.0 };
    let v = |t: f64| sy0 + slope * (t - sx0);
    // Collect crossing points of v with y_lo and y_hi inside (a, b).
    let mut cuts = [a, b, a, b];
    let mut ncuts = 2;
    if slope != 0.0 {
        for level in [y_lo, y_hi] {
            let t = sx0 + (level - sy0) / slope;
            if t > a && t < b {
                cuts[ncuts] = t;
                ncuts += 1;
            }
        }
    }
    let cuts = &mut cuts[..ncuts];
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let mut total = 0.0;
    for i in 1..cuts.len() {
        let (t0, t1) = (cuts[i - 1], cuts[i]);
        if t1 <= t0 {
            continue;
        }
        // The integrand is linear on (t0, t1): trapezoid rule is exact.
        let g = |t: f64| (v(t).min(y_hi) - y_lo).max(0.0);
        total += 0.5 * (g(t0) + g(t1)) * (t1 - t0);
    }
    total
}

/// Rasterize a graph domain with the arcs of a boundary quadruple: the
/// source arc `[a, b]` marks bottom-row nodes, the sink arc `[d, c]` marks
/// top-boundary nodes (including wall columns at snapped jumps inside the
/// arc).
pub fn rasterize(
    domain: &GraphDomain,
    h: f64,
    quad: &BoundaryQuadruple,
) -> Result<DiscreteDomain, DiscreteError> {
    let core = build_grid(domain.f(), h)?;
    let GridCore {
        h,
        x0,
        cols,
        top_row,
        offsets,
        n_nodes,
        node_col,
        node_row,
        area,
        walls,
    } = core;

    let mut is_source = vec![false; n_nodes];
    let mut is_sink = vec![false; n_nodes];

    // Source: bottom-row nodes over [a.x, b.x].
    let a_col = snap_col(quad.a.x, x0, h, cols);
    let b_col = snap_col(quad.b.x, x0, h, cols);
    for c in a_col..=b_col {
        is_source[offsets[c] as usize] = true;
    }

    // Sink: top nodes over [d.x, c.x] plus full wall columns at snapped
    // jumps whose column lies inside the arc (inclusive of the endpoints:
    // the wall is one column of nodes, not resolvable below scale h).
    let d_col = snap_col(quad.d.x, x0, h, cols);
    let c_col = snap_col(quad.c.x, x0, h, cols);
    for c in d_col..=c_col {
        is_sink[(offsets[c] + top_row[c] as u32) as usize] = true;
    }
    for &(wc, low, _high) in &walls {
        if wc >= d_col && wc <= c_col {
            let r_low = round_half_down(low, h);
            for r in r_low..=top_row[wc] {
                is_sink[(offsets[wc] + r as u32) as usize] = true;
            }
        }
    }

    // The height precondition (h < min profile height) keeps the arcs
    // disjoint: sinks live at rows ≥ 1, sources at row 0.
    debug_assert!(
        (0..n_nodes).all(|i| !(is_source[i] && is_sink[i])),
        "source and sink arcs must be disjoint"
    );

    let sources: Vec<u32> = (0..n_nodes as u32).filter(|&i| is_source[i as usize]).collect();
    let sinks: Vec<u32> = (0..n_nodes as u32).filter(|&i| is_sink[i as usize]).collect();

    Ok(DiscreteDomain {
        h,
        requested_h: h,
        x0,
        cols,
        top_row,
        offsets,
        n_nodes,
        node_col,
        node_row,
        area,
        sources,
        sinks,
        is_source,
        is_sink,
    })
}

/// Rasterize the rectangle `(x_lo, x_hi) × (0, height)` with both marked
/// arcs on the bottom edge: source `[src_lo, src_hi] × {0}` and sink
/// `[sink_from, x_hi] × {0}`.  The walls and the top edge are left
/// unmarked, so every grid path of the box family is (up to
/// discretization) a curve of the half-plane family connecting
/// `[src_lo, src_hi]` to `[sink_from, ∞)`: the box estimate approaches
/// the half-plane value from below as the truncation box grows.
pub fn box_with_bottom_arcs(
    x_lo: f64,
    x_hi: f64,
    height: f64,
    h_req: f64,
    src: (f64, f64),
    sink_from: f64,
) -> Result<DiscreteDomain, DiscreteError> {
    let iv = crate::domain::Interval::new(x_lo, x_hi).map_err(|_| DiscreteError::BadOptions {
        reason: format!("box x-range [{x_lo}, {x_hi}] is degenerate"),
    })?;
    if !(height > 0.0) || !height.is_finite() {
        return Err(DiscreteError::BadOptions {
            reason: format!("box height must be positive, got {height}"),
        });
    }
    if !(x_lo < src.0 && src.0 < src.1 && src.1 < sink_from && sink_from < x_hi) {
        return Err(DiscreteError::BadOptions {
            reason: "need x_lo < src.0 < src.1 < sink_from < x_hi".into(),
        });
    }
    let f = BoundaryFunction::constant(iv, height).expect("validated above");
    let core = build_grid(&f, h_req)?;
    let GridCore {
        h,
        x0,
        cols,
        top_row,
        offsets,
        n_nodes,
        node_col,
        node_row,
        area,
        walls: _,
    } = core;

    let mut is_source = vec![false; n_nodes];
    let mut is_sink = vec![false; n_nodes];

    let sa = snap_col(src.0, x0, h, cols);
    let sb = snap_col(src.1, x0, h, cols);
    let tc = snap_col(sink_from, x0, h, cols);
    if sa == 0 || tc <= sb + 1 {
        return Err(DiscreteError::BadOptions {
            reason: "source arc must be separated from the box walls and the sink arc \
                     by at least one cell"
                .into(),
        });
    }
    for c in sa..=sb {
        is_source[offsets[c] as usize] = true;
    }
    // Bottom sink segment; walls and top edge stay neutral.
    for c in tc..cols {
        is_sink[offsets[c] as usize] = true;
    }

    let sources: Vec<u32> = (0..n_nodes as u32).filter(|&i| is_source[i as usize]).collect();
    let sinks: Vec<u32> = (0..n_nodes as u32).filter(|&i| is_sink[i as usize]).collect();

    Ok(DiscreteDomain {
        h,
        requested_h: h_req,
        x0,
        cols,
        top_row,
        offsets,
        n_nodes,
        node_col,
        node_row,
        area,
        sources,
        sinks,
        is_source,
        is_sink,
    })
}
