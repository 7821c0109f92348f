//! Limit experiments tying the three modulus computations together: the
//! ε → 0 stretch sweep whose scaled values converge to the vertical-family
//! modulus, the η → 0 sweep of restricted families, the sandwich inequality
//! chaining the two, the Riemann-sum upper bound, the vanishing bound for
//! wide subfamilies, and the monotone continuous approximation of a
//! lower-semicontinuous step profile.

use crate::discrete::{
    rasterize, solve_modulus, DiscreteError, ModulusEstimate, SolveOptions,
};
use crate::domain::{
    build_graph_domain, BoundaryFunction, BoundaryQuadruple, DomainError, GraphDomain,
    ProfileKind,
};
use crate::vertical::{modulus_vertical, vertical_family, VerticalError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("bad arguments: {reason}")]
    BadArguments { reason: String },
    #[error(
        "h schedule too coarse at eps = {eps}: pitch {h} cannot resolve {feature} = {size}"
    )]
    ScheduleTooCoarse {
        eps: f64,
        h: f64,
        feature: &'static str,
        size: f64,
    },
    #[error("unsupported profile kind: {reason}")]
    UnsupportedKind { reason: String },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Vertical(#[from] VerticalError),
    #[error(transparent)]
    Discrete(#[from] DiscreteError),
}

/// Shared knobs for the sweep experiments.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Cells per stretched minimum height: `h = eps · min f / h_divisor`.
    pub h_divisor: f64,
    /// Relative duality-gap tolerance per solve.
    pub tol: f64,
    /// Outer iteration cap per solve.
    pub max_iter: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            h_divisor: 8.0,
            tol: 1e-3,
            max_iter: 200,
        }
    }
}

impl SweepConfig {
    fn validate(&self) -> Result<(), HarnessError> {
        if !self.h_divisor.is_finite() || self.h_divisor < 2.0 {
            return Err(HarnessError::BadArguments {
                reason: format!("h_divisor must be ≥ 2, got {}", self.h_divisor),
            });
        }
        Ok(())
    }

    fn solve_options(&self, eta: Option<f64>) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            eta,
            ..Default::default()
        }
    }
}

/// One row of an ε sweep: the solve on the stretched, rasterized domain.
#[derive(Debug, Clone, Copy)]
pub struct EpsRow {
    pub eps: f64,
    /// Effective grid pitch used for this row.
    pub h: f64,
    /// Solver value on the stretched grid, `mod(Γ^ε)` up to the gap.
    pub raw_modulus: f64,
    pub eps_times_modulus: f64,
    /// Dual lower bound on the raw modulus.
    pub lower_bound: f64,
    /// Duality gap of the raw solve.
    pub gap: f64,
    /// False when the row hit the iteration limit (partial certificate).
    pub converged: bool,
}

/// Report of an ε → 0 sweep with Richardson extrapolation of the last
/// three rows and comparison against the exact vertical-family modulus.
#[derive(Debug, Clone)]
pub struct SweepReport {
    pub rows: Vec<EpsRow>,
    pub extrapolated_limit: f64,
    /// Observed convergence order from the last three rows (None when the
    /// extrapolation fell back to the final value).
    pub observed_rate: Option<f64>,
    /// Exact `mod(Γ_v)` from the vertical-family closed form.
    pub target: f64,
    /// `|extrapolated − target| / target`, or `|extrapolated|` when the
    /// target vanishes (empty vertical family).
    pub relative_error: f64,
    /// Whether the last three scaled values were monotone (a non-monotone
    /// tail makes the extrapolation unreliable and is flagged, not fixed).
    pub monotone_tail: bool,
}

/// One row of an η sweep.
#[derive(Debug, Clone, Copy)]
pub struct EtaRow {
    pub eta: f64,
    /// Solver value for the restricted family `Γ_{<η}`.
    pub restricted_modulus: f64,
    pub gap: f64,
    pub converged: bool,
}

/// Report of an η → 0 sweep of restricted families on a fixed grid.
#[derive(Debug, Clone)]
pub struct EtaReport {
    pub rows: Vec<EtaRow>,
    /// The last (smallest-η) row's value.
    pub limit_estimate: f64,
    /// Rows must be nondecreasing in η (family inclusion) within the summed
    /// duality gaps; false flags a violation beyond that slack.
    pub monotone: bool,
}

/// Result of a three-point Richardson extrapolation.
#[derive(Debug, Clone, Copy)]
pub struct RichardsonResult {
    pub limit: f64,
    /// Observed order; None when the extrapolation fell back to the last
    /// value (converged differences or an unreliable ratio).
    pub rate: Option<f64>,
    /// False when the three values alternate (non-monotone tail).
    pub monotone: bool,
}

/// Extrapolate a sequence `v(ε) = L + C·ε^p` from three values at
/// `ε, ε/ratio, ε/ratio²`.  Exact on sequences of exactly that form; falls
/// back to `v3` when the differences are at rounding level, alternate in
/// sign, or give an order outside `[0.2, 12]` (where the formula would
/// amplify noise instead of cancelling error).
pub fn richardson(v1: f64, v2: f64, v3: f64, ratio: f64) -> RichardsonResult {
    assert!(ratio.is_finite() && ratio > 1.0, "ratio must exceed 1");
    let d1 = v1 - v2;
    let d2 = v2 - v3;
    let scale = v1.abs().max(v2.abs()).max(v3.abs()).max(1e-300);
    if d1.abs() <= 1e-13 * scale || d2.abs() <= 1e-13 * scale {
        // Differences at rounding level: already converged.
        return RichardsonResult {
            limit: v3,
            rate: None,
            monotone: true,
        };
    }
    if d1 * d2 <= 0.0 {
        return RichardsonResult {
            limit: v3,
            rate: None,
            monotone: false,
        };
    }
    let p = (d1 / d2).ln() / ratio.ln();
    if !(0.2..=12.0).contains(&p) {
        return RichardsonResult {
            limit: v3,
            rate: None,
            monotone: true,
        };
    }
    RichardsonResult {
        limit: v3 - d2 / (ratio.powf(p) - 1.0),
        rate: Some(p),
        monotone: true,
    }
}

fn check_decreasing(name: &str, list: &[f64]) -> Result<(), HarnessError> {
    if list.is_empty() {
        return Err(HarnessError::BadArguments {
            reason: format!("{name} must be nonempty"),
        });
    }
    for v in list {
        if !v.is_finite() || *v <= 0.0 {
            return Err(HarnessError::BadArguments {
                reason: format!("{name} entries must be finite and positive, got {v}"),
            });
        }
    }
    if list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(HarnessError::BadArguments {
            reason: format!("{name} must be strictly decreasing"),
        });
    }
    Ok(())
}

/// Rebuild a quadruple on a vertically scaled copy of its domain (prime
/// ends project to x-coordinates, which the stretch preserves).
fn requad(
    de: &GraphDomain,
    q: &BoundaryQuadruple,
) -> Result<BoundaryQuadruple, DomainError> {
    BoundaryQuadruple::new(de, q.a, q.b, q.c, q.d)
}

fn raster_stretched(
    d: &GraphDomain,
    q: &BoundaryQuadruple,
    eps: f64,
    cfg: &SweepConfig,
) -> Result<(crate::discrete::DiscreteDomain, f64), HarnessError> {
    let de = d.scale_vertical(eps)?;
    let qe = requad(&de, q)?;
    let h_req = eps * d.f().min_value() / cfg.h_divisor;
    let g = rasterize(&de, h_req, &qe).map_err(|e| match e {
        DiscreteError::ResolutionTooCoarse { h, feature, size } => {
            HarnessError::ScheduleTooCoarse {
                eps,
                h,
                feature,
                size,
            }
        }
        other => HarnessError::Discrete(other),
    })?;
    Ok((g, h_req))
}

/// Solve, treating an iteration-limit result as a usable partial row.
fn solve_row(
    g: &crate::discrete::DiscreteDomain,
    opts: &SolveOptions,
) -> Result<(ModulusEstimate, bool), HarnessError> {
    match solve_modulus(g, opts) {
        Ok(est) => Ok((est, true)),
        Err(DiscreteError::IterationLimit(est)) => Ok((*est, false)),
        Err(e) => Err(HarnessError::Discrete(e)),
    }
}

/// The ε → 0 experiment: for each `eps` rasterize the vertically stretched
/// domain at pitch `eps·min f / h_divisor`, solve the discrete modulus of
/// the marked arcs, and record `eps · mod(Γ^ε)`.  The last three rows are
/// Richardson-extrapolated and compared against the exact vertical-family
/// modulus of `(d, q)`.
pub fn epsilon_sweep(
    d: &GraphDomain,
    q: &BoundaryQuadruple,
    eps_list: &[f64],
    cfg: &SweepConfig,
) -> Result<SweepReport, HarnessError> {
    cfg.validate()?;
    check_decreasing("eps_list", eps_list)?;
    if eps_list.len() < 3 {
        return Err(HarnessError::BadArguments {
            reason: "extrapolation needs ≥ 3 points".into(),
        });
    }
    let n = eps_list.len();
    let r1 = eps_list[n - 3] / eps_list[n - 2];
    let r2 = eps_list[n - 2] / eps_list[n - 1];
    if (r1 - r2).abs() > 1e-9 * r1 {
        return Err(HarnessError::BadArguments {
            reason: format!(
                "the last three eps must be in geometric progression \
                 (ratios {r1} and {r2})"
            ),
        });
    }

    let target = modulus_vertical(&vertical_family(d, q))?;
    let mut rows = Vec::with_capacity(n);
    for &eps in eps_list {
        let (g, _) = raster_stretched(d, q, eps, cfg)?;
        let (est, converged) = solve_row(&g, &cfg.solve_options(None))?;
        rows.push(EpsRow {
            eps,
            h: g.h(),
            raw_modulus: est.value,
            eps_times_modulus: eps * est.value,
            lower_bound: est.lower_bound,
            gap: est.gap,
            converged,
        });
    }

    let v = [
        rows[n - 3].eps_times_modulus,
        rows[n - 2].eps_times_modulus,
        rows[n - 1].eps_times_modulus,
    ];
    let rr = richardson(v[0], v[1], v[2], r1);
    let relative_error = if target.abs() > 1e-12 {
        (rr.limit - target).abs() / target.abs()
    } else {
        rr.limit.abs()
    };
    Ok(SweepReport {
        rows,
        extrapolated_limit: rr.limit,
        observed_rate: rr.rate,
        target,
        relative_error,
        monotone_tail: rr.monotone,
    })
}

/// The η → 0 experiment: rasterize once at pitch `h`, then solve the
/// η-restricted family for each η of the (strictly decreasing) list.
pub fn eta_sweep(
    d: &GraphDomain,
    q: &BoundaryQuadruple,
    eta_list: &[f64],
    h: f64,
    cfg: &SweepConfig,
) -> Result<EtaReport, HarnessError> {
    cfg.validate()?;
    check_decreasing("eta_list", eta_list)?;
    if !h.is_finite() || h <= 0.0 {
        return Err(HarnessError::BadArguments {
            reason: format!("h must be finite and positive, got {h}"),
        });
    }
    let g = rasterize(d, h, q)?;
    let mut rows = Vec::with_capacity(eta_list.len());
    for &eta in eta_list {
        let (est, converged) = solve_row(&g, &cfg.solve_options(Some(eta)))?;
        rows.push(EtaRow {
            eta,
            restricted_modulus: est.value,
            gap: est.gap,
            converged,
        });
    }
    let limit_estimate = rows.last().expect("nonempty").restricted_modulus;
    // Family inclusion Γ_{<η'} ⊆ Γ_{<η} for η' < η forces the exact
    // restricted moduli to be nondecreasing in η; the solver estimates may
    // violate that only within their duality gaps.
    let monotone = rows.windows(2).all(|w| {
        w[1].restricted_modulus <= w[0].restricted_modulus + w[0].gap + w[1].gap + 1e-12
    });
    Ok(EtaReport {
        rows,
        limit_estimate,
        monotone,
    })
}

/// Configuration of a sandwich experiment: both sweeps plus the fixed grid
/// pitch of the η side.
#[derive(Debug, Clone)]
pub struct SandwichConfig {
    pub eps_list: Vec<f64>,
    pub eta_list: Vec<f64>,
    /// Grid pitch for the η sweep.
    pub h_eta: f64,
    pub sweep: SweepConfig,
}

/// Verdict of the sandwich experiment around
/// `mod(Γ_v) ≤ lim ε·mod(Γ^ε) ≤ lim mod(Γ_{<η})`.
#[derive(Debug, Clone)]
pub struct SandwichVerdict {
    /// Exact vertical modulus `mod(Γ_v)`.
    pub target: f64,
    /// Extrapolated ε-limit.
    pub eps_limit: f64,
    /// η-limit estimate (last η row).
    pub eta_limit: f64,
    /// Combined tolerance: the two limiting rows' scaled gaps plus a 3%
    /// discretization allowance on the magnitude of the compared values.
    pub tol_chain: f64,
    /// `target ≤ eps_limit + tol_chain`.
    pub first_holds: bool,
    /// `eps_limit ≤ eta_limit + tol_chain`.
    pub second_holds: bool,
    pub eps_report: SweepReport,
    pub eta_report: EtaReport,
}

impl SandwichVerdict {
    pub fn holds(&self) -> bool {
        self.first_holds && self.second_holds
    }
}

/// Run both sweeps and check the two inequalities of the sandwich within
/// an explicit tolerance budget (solver gaps + 3% discretization
/// allowance; the allowance is recorded in the verdict, never silently
/// absorbed).
pub fn sandwich_check(
    d: &GraphDomain,
    q: &BoundaryQuadruple,
    cfg: &SandwichConfig,
) -> Result<SandwichVerdict, HarnessError> {
    let eps_report = epsilon_sweep(d, q, &cfg.eps_list, &cfg.sweep)?;
    let eta_report = eta_sweep(d, q, &cfg.eta_list, cfg.h_eta, &cfg.sweep)?;
    let target = eps_report.target;
    let eps_limit = eps_report.extrapolated_limit;
    let eta_limit = eta_report.limit_estimate;
    let last_eps = eps_report.rows.last().expect("≥ 3 rows");
    let last_eta = eta_report.rows.last().expect("nonempty");
    let scale = target.abs().max(eps_limit.abs()).max(eta_limit.abs());
    let tol_chain =
        last_eps.eps * last_eps.gap + last_eta.gap + 0.03 * scale + 1e-12;
    Ok(SandwichVerdict {
        target,
        eps_limit,
        eta_limit,
        tol_chain,
        first_holds: target <= eps_limit + tol_chain,
        second_holds: eps_limit <= eta_limit + tol_chain,
        eps_report,
        eta_report,
    })
}

/// The Riemann-sum upper bound for the η-restricted modulus: for a
/// partition `lo = x_0 < … < x_n = hi` of the base interval,
/// `Σ_i (x_{i+1} − x_i + 2η) / min_{[x_i − η, x_{i+1} + η]} f`
/// upper-bounds `mod(Γ_{<η})`.  Exact for step and piecewise-linear kinds.
pub fn riemann_upper_bound(
    d: &GraphDomain,
    partition: &[f64],
    eta: f64,
) -> Result<f64, HarnessError> {
    if !eta.is_finite() || eta <= 0.0 {
        return Err(HarnessError::BadArguments {
            reason: format!("eta must be finite and positive, got {eta}"),
        });
    }
    let iv = d.interval();
    if partition.len() < 2 {
        return Err(HarnessError::BadArguments {
            reason: "partition needs at least two points".into(),
        });
    }
    if partition.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(HarnessError::BadArguments {
            reason: "partition must be strictly increasing".into(),
        });
    }
    let span = iv.hi() - iv.lo();
    let first = partition[0];
    let last = *partition.last().expect("len ≥ 2");
    if (first - iv.lo()).abs() > 1e-9 * span || (last - iv.hi()).abs() > 1e-9 * span {
        return Err(HarnessError::BadArguments {
            reason: format!(
                "partition must span [{}, {}], got [{first}, {last}]",
                iv.lo(),
                iv.hi()
            ),
        });
    }
    let f = d.f();
    let mut total = 0.0;
    for w in partition.windows(2) {
        let m = f.min_on(w[0] - eta, w[1] + eta);
        total += (w[1] - w[0] + 2.0 * eta) / m;
    }
    Ok(total)
}

/// Check of the vanishing wide-family bound
/// `eps · mod(Γ^ε_{≥η}) ≤ eps² · area(D) / η²`, with the left side
/// estimated through subadditivity as
/// `eps · (mod(Γ^ε) − mod(Γ^ε_{<η}))` from two solves on the same grid.
#[derive(Debug, Clone, Copy)]
pub struct WideFamilyReport {
    pub eps: f64,
    pub eta: f64,
    pub h: f64,
    /// Full-family solver value on the stretched grid.
    pub full_value: f64,
    /// η-restricted solver value on the same grid.
    pub restricted_value: f64,
    /// `max(0, full − restricted)`: a lower estimate of `mod(Γ^ε_{≥η})`.
    pub excess: f64,
    /// `eps · excess`.
    pub scaled_excess: f64,
    /// `eps² · area(D) / η²`.
    pub bound: f64,
    /// `scaled_excess ≤ bound + slack` with slack = scaled gaps + 3% of
    /// the bound.
    pub holds: bool,
}

pub fn wide_family_check(
    d: &GraphDomain,
    q: &BoundaryQuadruple,
    eps: f64,
    eta: f64,
    cfg: &SweepConfig,
) -> Result<WideFamilyReport, HarnessError> {
    cfg.validate()?;
    for (name, v) in [("eps", eps), ("eta", eta)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(HarnessError::BadArguments {
                reason: format!("{name} must be finite and positive, got {v}"),
            });
        }
    }
    let (g, _) = raster_stretched(d, q, eps, cfg)?;
    let (full, _) = solve_row(&g, &cfg.solve_options(None))?;
    let (restricted, _) = solve_row(&g, &cfg.solve_options(Some(eta)))?;
    let excess = (full.value - restricted.value).max(0.0);
    let bound = eps * eps * d.area() / (eta * eta);
    let slack = eps * (full.gap + restricted.gap) + 0.03 * bound + 1e-12;
    Ok(WideFamilyReport {
        eps,
        eta,
        h: g.h(),
        full_value: full.value,
        restricted_value: restricted.value,
        excess,
        scaled_excess: eps * excess,
        bound,
        holds: eps * excess <= bound + slack,
    })
}

/// One row of the lsc-approximation report.
#[derive(Debug, Clone, Copy)]
pub struct LscRow {
    pub n: f64,
    /// `∫ dx / f_n` over the base interval.
    pub integral: f64,
    /// `|integral − target|` against the exact `∫ dx / f`.
    pub abs_diff: f64,
}

/// Report accompanying the approximating sequence.
#[derive(Debug, Clone)]
pub struct LscReport {
    pub rows: Vec<LscRow>,
    /// Exact `∫ dx / f`.
    pub target: f64,
    /// `f_n ≤ f_{n+1} ≤ f` held at every sample point.
    pub monotone_pointwise: bool,
    /// `abs_diff` nonincreasing along `n_list`.
    pub diffs_decreasing: bool,
    /// Number of sample points used for the pointwise check.
    pub samples: usize,
}

/// Number of sample points for the pointwise monotonicity check.
const LSC_SAMPLES: usize = 1000;

/// Monotone continuous approximation of a lower-semicontinuous step
/// profile by the inf-convolutions `f_n(x) = inf_y { f(y) + n·|x − y| }`,
/// floored at `c = min f > 0` (the floor is provably inactive — the
/// convolution of an `f ≥ c` stays `≥ c` — but is applied for fidelity to
/// the construction).  Each `f_n` is returned as an exact piecewise-linear
/// profile; the report records `∫ dx / f_n → ∫ dx / f` and the pointwise
/// monotonicity `f_n ≤ f_{n+1} ≤ f` on a sample grid.
pub fn lsc_approximation(
    f: &BoundaryFunction,
    n_list: &[f64],
) -> Result<(Vec<BoundaryFunction>, LscReport), HarnessError> {
    if f.kind() != ProfileKind::Step {
        return Err(HarnessError::UnsupportedKind {
            reason: format!(
                "lsc approximation is defined for step profiles; got {:?}",
                f.kind()
            ),
        });
    }
    if n_list.is_empty() {
        return Err(HarnessError::BadArguments {
            reason: "n_list must be nonempty".into(),
        });
    }
    for v in n_list {
        if !v.is_finite() || *v <= 0.0 {
            return Err(HarnessError::BadArguments {
                reason: format!("n_list entries must be finite and positive, got {v}"),
            });
        }
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HarnessError::BadArguments {
            reason: "n_list must be strictly increasing".into(),
        });
    }
    let c = f.min_value();
    if !(c > 0.0) {
        return Err(HarnessError::BadArguments {
            reason: format!("profile must be positive (min value {c})"),
        });
    }

    let iv = f.interval();
    let (lo, hi) = (iv.lo(), iv.hi());
    let candidates = step_candidates(f);

    let mut envs = Vec::with_capacity(n_list.len());
    for &n in n_list {
        envs.push(lower_envelope(iv, &candidates, n, c)?);
    }

    // Exact target and per-n integrals via the vertical-modulus closed
    // forms (step: exact spans; piecewise linear: 1e−11 quadrature).
    let dom = build_graph_domain(f.clone())?;
    let target = modulus_vertical(&vertical_family(
        &dom,
        &BoundaryQuadruple::full_arcs(&dom),
    ))?;
    let mut rows = Vec::with_capacity(envs.len());
    for (&n, env) in n_list.iter().zip(&envs) {
        let edom = build_graph_domain(env.clone())?;
        let integral = modulus_vertical(&vertical_family(
            &edom,
            &BoundaryQuadruple::full_arcs(&edom),
        ))?;
        rows.push(LscRow {
            n,
            integral,
            abs_diff: (integral - target).abs(),
        });
    }

    let mut monotone = true;
    for i in 0..LSC_SAMPLES {
        let x = lo + (hi - lo) * (i as f64) / ((LSC_SAMPLES - 1) as f64);
        let fx = f.value(x);
        let mut prev = f64::NEG_INFINITY;
        for env in &envs {
            let v = env.value(x);
            if v < prev - 1e-9 || v > fx + 1e-9 {
                monotone = false;
            }
            prev = v;
        }
    }
    let diffs_decreasing = rows
        .windows(2)
        .all(|w| w[1].abs_diff <= w[0].abs_diff + 1e-15);

    Ok((
        envs,
        LscReport {
            rows,
            target,
            monotone_pointwise: monotone,
            diffs_decreasing,
            samples: LSC_SAMPLES,
        },
    ))
}

/// A flat-bottomed cone candidate: value `v` on `[a, b]`, rising with
/// slope `n` outside.  Pieces contribute slabs, stored jump values
/// contribute point cones (`a == b`).
#[derive(Debug, Clone, Copy)]
struct Candidate {
    a: f64,
    b: f64,
    v: f64,
}

impl Candidate {
    fn eval(&self, x: f64, n: f64) -> f64 {
        let d = (self.a - x).max(x - self.b).max(0.0);
        self.v + n * d
    }
}

fn step_candidates(f: &BoundaryFunction) -> Vec<Candidate> {
    let scale = f.yscale();
    let iv = f.interval();
    let (xs, ys, jys) = f.step_parts();
    let mut out = Vec::with_capacity(ys.len() + jys.len());
    for (i, &v) in ys.iter().enumerate() {
        let a = if i == 0 { iv.lo() } else { xs[i - 1] };
        let b = if i == xs.len() { iv.hi() } else { xs[i] };
        out.push(Candidate {
            a,
            b,
            v: v * scale,
        });
    }
    for (i, &v) in jys.iter().enumerate() {
        out.push(Candidate {
            a: xs[i],
            b: xs[i],
            v: v * scale,
        });
    }
    out
}

/// Exact lower envelope `min_j candidate_j(x)` over `[lo, hi]` as a
/// piecewise-linear profile.  Every candidate corner and every pairwise
/// crossing is a knot, so the envelope is linear between consecutive knots.
fn lower_envelope(
    iv: crate::domain::Interval,
    cands: &[Candidate],
    n: f64,
    floor: f64,
) -> Result<BoundaryFunction, HarnessError> {
    let (lo, hi) = (iv.lo(), iv.hi());
    let mut knots: Vec<f64> = vec![lo, hi];
    for c in cands {
        for x in [c.a, c.b] {
            if lo < x && x < hi {
                knots.push(x);
            }
        }
    }
    // Pairwise crossings, span by span over each pair's merged corners.
    for (i, p) in cands.iter().enumerate() {
        for q in &cands[i + 1..] {
            let mut bs = vec![lo, hi, p.a, p.b, q.a, q.b];
            bs.retain(|x| (lo..=hi).contains(x));
            bs.sort_by(f64::total_cmp);
            bs.dedup();
            for w in bs.windows(2) {
                let (s, t) = (w[0], w[1]);
                if t <= s {
                    continue;
                }
                let ds = p.eval(s, n) - q.eval(s, n);
                let dt = p.eval(t, n) - q.eval(t, n);
                if ds * dt < 0.0 {
                    let x = s + (t - s) * ds / (ds - dt);
                    if lo < x && x < hi {
                        knots.push(x);
                    }
                }
            }
        }
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    // Drop knots closer than the exactness of the crossing formula allows;
    // between the survivors all candidates are still linear.
    let min_sep = 1e-12 * (hi - lo);
    let mut xs: Vec<f64> = vec![knots[0]];
    for &x in &knots[1..] {
        if x - *xs.last().expect("nonempty") > min_sep {
            xs.push(x);
        }
    }
    if *xs.last().expect("nonempty") < hi {
        // The dedup above may have swallowed hi into a near-coincident
        // knot; force the exact endpoint.
        let k = xs.len() - 1;
        xs[k] = hi;
    }
    let values: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let m = cands
                .iter()
                .map(|c| c.eval(x, n))
                .fold(f64::INFINITY, f64::min);
            let v = m.max(floor);
            debug_assert!(v >= floor - 1e-12);
            v
        })
        .collect();
    Ok(BoundaryFunction::piecewise_linear(iv, xs, values)?)
}
