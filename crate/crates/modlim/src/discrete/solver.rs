//! Constraint generation with a projected-coordinate-descent inner QP.
//!
//! Primal problem: minimize `E(ρ) = Σ_v a_v ρ_v²` subject to
//! `ℓ_ρ(P) ≥ 1` for every admissible path `P`, where
//! `ℓ_ρ(P) = Σ_v u_P(v) ρ_v` with trapezoid usage coefficients `u_P`.
//! The dual of the restricted problem over generated paths is
//! `max_{λ ≥ 0} Σλ − ¼ Σ_v (Σ_P λ_P u_P(v))² / a_v`, solved by cyclic
//! projected coordinate descent; the primal density is recovered as
//! `ρ_v = (Σ_P λ_P u_P(v)) / (2 a_v)`.
//!
//! For any `λ ≥ 0` the dual objective `Σλ − E(ρ(λ))` is a valid lower
//! bound on the full (not just restricted) modulus, because dropping
//! constraints only lowers the optimum.  Scaling the current density by
//! `1/L`, where `L` is the exact cheapest path length from the oracle,
//! gives an admissible density and hence the upper bound `E/L²`.  The
//! loop stops when `L ≥ √(1−tol)`, which at inner optimality pins the
//! relative duality gap below `tol`.

use super::oracle::{self, PathResult};
use super::raster::DiscreteDomain;
use super::{DensityVector, DiscreteError, ModulusEstimate, SolveOptions};
use std::collections::HashSet;

/// One generated curve constraint with its usage coefficients.
struct Con {
    nodes: Vec<u32>,
    w: Vec<f64>,
    /// Diagonal Gram entry `Σ w² / (2a)`.
    gpp: f64,
    lambda: f64,
    /// Outer round in which the constraint was generated.
    born: usize,
}

/// Solve the discrete modulus problem of the domain's marked arcs.
/// With `opts.eta = Some(η)` this delegates to the restricted solver.
pub fn solve_modulus(
    dd: &DiscreteDomain,
    opts: &SolveOptions,
) -> Result<ModulusEstimate, DiscreteError> {
    opts.validate()?;
    match opts.eta {
        Some(_) => solve_modulus_restricted(dd, opts),
        None => solve_inner(dd, opts, Restriction::None),
    }
}

/// Solve the η-restricted problem: only curves whose horizontal extent is
/// strictly below `opts.eta` constrain the density.  Requires
/// `opts.eta = Some(η)` with `η ≥ h`.
pub fn solve_modulus_restricted(
    dd: &DiscreteDomain,
    opts: &SolveOptions,
) -> Result<ModulusEstimate, DiscreteError> {
    opts.validate()?;
    let eta = opts.eta.ok_or_else(|| DiscreteError::BadOptions {
        reason: "restricted solve requires opts.eta".into(),
    })?;
    let h = dd.h();
    if eta < h * (1.0 - 1e-12) {
        return Err(DiscreteError::InfeasibleEta { eta, h });
    }
    // Curves of horizontal extent < η occupy ≤ kcols+1 consecutive columns,
    // where kcols·h is the largest representable extent strictly below η.
    let kcols = ((eta / h - 1e-9).ceil() as usize).saturating_sub(1);
    solve_inner(dd, opts, Restriction::Window(kcols))
}

enum Restriction {
    None,
    /// Maximum column extent of admissible curves.
    Window(usize),
}

/// Violation threshold for adding constraints: generate paths with
/// ρ-length strictly below 1 (up to a whisker that avoids churning on
/// constraints already satisfied to machine precision).
const GEN_THRESHOLD: f64 = 1.0 - 1e-12;

fn solve_inner(
    dd: &DiscreteDomain,
    opts: &SolveOptions,
    restriction: Restriction,
) -> Result<ModulusEstimate, DiscreteError> {
    let n = dd.n_nodes();
    let inv2a: Vec<f64> = dd.areas().iter().map(|&a| 0.5 / a).collect();
    let mut cons: Vec<Con> = Vec::new();
    let mut known: HashSet<Vec<u32>> = HashSet::new();
    let mut load = vec![0.0f64; n];
    let mut rho = vec![0.0f64; n];
    let stop_len = (1.0 - opts.tol).sqrt();
    let mut inner_tol = (opts.tol * 0.05).clamp(1e-9, 1e-4);

    let mut last_best: Option<PathResult> = None;
    for round in 1..=opts.max_iter {
        // Oracle: cheapest admissible path plus a batch of violated ones.
        let (best, batch) = match restriction {
            Restriction::None => {
                let best = oracle::shortest_to_sink(dd, &rho, None);
                let batch = match &best {
                    Some(b) if b.len < GEN_THRESHOLD => {
                        let (fwd, bwd) = oracle::forward_backward(dd, &rho);
                        let mut batch = oracle::per_column_paths(dd, &fwd, &bwd, GEN_THRESHOLD);
                        batch.push(b.clone());
                        batch
                    }
                    _ => Vec::new(),
                };
                (best, batch)
            }
            Restriction::Window(kcols) => {
                let (best, batch) = oracle::windowed_paths(dd, &rho, kcols, GEN_THRESHOLD);
                (best, batch)
            }
        };

        let Some(best) = best else {
            return match restriction {
                // No admissible curve at all: the restricted family is
                // empty and its modulus is 0 — a legitimate answer.
                Restriction::Window(_) => Ok(ModulusEstimate {
                    value: 0.0,
                    lower_bound: 0.0,
                    upper_bound: 0.0,
                    gap: 0.0,
                    density: DensityVector(vec![0.0; n]),
                    active_paths: Vec::new(),
                    iterations: round,
                }),
                Restriction::None => Err(DiscreteError::Disconnected),
            };
        };
        last_best = Some(best.clone());

        if best.len >= stop_len {
            // Candidate convergence: verify the actual certificate gap.
            let est = finalize(dd, &cons, &rho, &load, &inv2a, best.len, round, opts.tol);
            if est.gap <= opts.tol * est.value.max(f64::MIN_POSITIVE) {
                return Ok(est);
            }
            // Dual not tight enough yet: polish the inner solve and retry.
            inner_tol *= 0.25;
            pcd(&mut cons, &mut load, &mut rho, &inv2a, inner_tol, 2000);
            let est = finalize(dd, &cons, &rho, &load, &inv2a, best.len, round, opts.tol);
            if est.gap <= opts.tol * est.value.max(f64::MIN_POSITIVE) {
                return Ok(est);
            }
            // Fall through: generate more constraints.
        }

        // Install the new constraints.
        let mut added = false;
        for p in batch {
            if !known.contains(&p.path) {
                known.insert(p.path.clone());
                cons.push(make_con(dd, p.path, &inv2a, round));
                added = true;
            }
        }
        if !added {
            // The oracle is still below threshold but produced nothing new:
            // tighten the inner solve so the existing dual pushes ρ up.
            inner_tol *= 0.25;
        }

        pcd(&mut cons, &mut load, &mut rho, &inv2a, inner_tol, 600);

        // Retire long-inactive constraints (keep the memory bounded); a
        // retired constraint can always be regenerated by the oracle.
        if round % 8 == 0 {
            retire(&mut cons, &mut known, round);
        }
    }

    // Iteration limit: return the best certificate we can still assemble.
    let final_best = match restriction {
        Restriction::None => oracle::shortest_to_sink(dd, &rho, None),
        Restriction::Window(kcols) => oracle::windowed_paths(dd, &rho, kcols, 0.0).0,
    }
    .or(last_best);
    let len = final_best.map(|b| b.len).unwrap_or(0.0);
    let est = finalize(
        dd,
        &cons,
        &rho,
        &load,
        &inv2a,
        len,
        opts.max_iter,
        opts.tol,
    );
    Err(DiscreteError::IterationLimit(Box::new(est)))
}

/// Build a constraint from a node path: trapezoid usage coefficients.
fn make_con(dd: &DiscreteDomain, path: Vec<u32>, inv2a: &[f64], born: usize) -> Con {
    let mut nodes: Vec<u32> = Vec::with_capacity(path.len());
    let mut w: Vec<f64> = Vec::with_capacity(path.len());
    // Paths are simple, so each node appears once; accumulate the two
    // half-edges incident to each node.
    let mut coeff = vec![0.0f64; path.len()];
    for i in 0..path.len() - 1 {
        let (c0, r0) = dd.col_row(path[i]);
        let (c1, r1) = dd.col_row(path[i + 1]);
        let diag = c0 != c1 && r0 != r1;
        let len = if diag {
            dd.h() * std::f64::consts::SQRT_2
        } else {
            dd.h()
        };
        coeff[i] += 0.5 * len;
        coeff[i + 1] += 0.5 * len;
    }
    let mut gpp = 0.0;
    for (i, &v) in path.iter().enumerate() {
        nodes.push(v);
        w.push(coeff[i]);
        gpp += coeff[i] * coeff[i] * inv2a[v as usize];
    }
    Con {
        nodes,
        w,
        gpp: gpp.max(f64::MIN_POSITIVE),
        lambda: 0.0,
        born,
    }
}

/// Cyclic projected coordinate descent on the dual.  Each pass updates
/// every multiplier `λ_P ← max(0, λ_P + (1 − ℓ_ρ(P)) / G_PP)` and keeps
/// the node loads `Σ λ u` and the density `ρ = load/(2a)` incrementally
/// consistent.  Stops when the KKT residual (constraint violation for
/// `λ = 0`, stationarity for `λ > 0`) drops below `tol`.
fn pcd(
    cons: &mut [Con],
    load: &mut [f64],
    rho: &mut [f64],
    inv2a: &[f64],
    tol: f64,
    max_sweeps: usize,
) {
    for _ in 0..max_sweeps {
        let mut resid: f64 = 0.0;
        for con in cons.iter_mut() {
            let mut ell = 0.0;
            for (i, &v) in con.nodes.iter().enumerate() {
                ell += con.w[i] * rho[v as usize];
            }
            let r = if con.lambda > 0.0 {
                (1.0 - ell).abs()
            } else {
                (1.0 - ell).max(0.0)
            };
            resid = resid.max(r);
            let new_lambda = (con.lambda + (1.0 - ell) / con.gpp).max(0.0);
            let delta = new_lambda - con.lambda;
            if delta != 0.0 {
                con.lambda = new_lambda;
                for (i, &v) in con.nodes.iter().enumerate() {
                    let vi = v as usize;
                    load[vi] += delta * con.w[i];
                    rho[vi] = load[vi] * inv2a[vi];
                }
            }
        }
        if resid <= tol {
            break;
        }
    }
}

/// Drop constraints that have carried zero multiplier for a while.
fn retire(cons: &mut Vec<Con>, known: &mut HashSet<Vec<u32>>, round: usize) {
    cons.retain(|c| {
        let keep = c.lambda > 0.0 || round.saturating_sub(c.born) < 8;
        if !keep {
            known.remove(&c.nodes);
        }
        keep
    });
}

#[allow(clippy::too_many_arguments)]
fn finalize(
    dd: &DiscreteDomain,
    cons: &[Con],
    rho: &[f64],
    load: &[f64],
    inv2a: &[f64],
    best_len: f64,
    iterations: usize,
    tol: f64,
) -> ModulusEstimate {
    // Energy E = Σ a ρ² = ½ Σ load·ρ (since ρ = load/(2a)).
    let mut energy = 0.0;
    for v in 0..rho.len() {
        energy += 0.5 * load[v] * rho[v];
    }
    let _ = inv2a;
    let sum_lambda: f64 = cons.iter().map(|c| c.lambda).sum();
    let lower = (sum_lambda - energy).max(0.0);
    let (value, density) = if best_len > 0.0 && energy > 0.0 {
        let scale = 1.0 / best_len;
        (
            energy * scale * scale,
            rho.iter().map(|&r| r * scale).collect::<Vec<f64>>(),
        )
    } else {
        (0.0, vec![0.0; rho.len()])
    };
    let gap = (value - lower).max(0.0);
    // Active family: generated curves whose scaled ρ-length is within tol
    // of 1.  (Scaled lengths are ≥ 1 by minimality of best_len.)
    let mut active_paths = Vec::new();
    if best_len > 0.0 {
        for c in cons.iter() {
            let mut ell = 0.0;
            for (i, &v) in c.nodes.iter().enumerate() {
                ell += c.w[i] * rho[v as usize];
            }
            if ell / best_len <= 1.0 + tol {
                active_paths.push(c.nodes.clone());
            }
        }
    }
    let _ = dd;
    ModulusEstimate {
        value,
        lower_bound: lower.min(value),
        upper_bound: value,
        gap,
        density: DensityVector(density),
        active_paths,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::{box_with_bottom_arcs, rasterize};
    use crate::domain::{
        build_graph_domain, BoundaryFunction, BoundaryQuadruple, GraphDomain, Interval, PrimeEnd,
    };

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn square_domain() -> GraphDomain {
        build_graph_domain(BoundaryFunction::constant(iv(0.0, 1.0), 1.0).unwrap()).unwrap()
    }

    fn solve_square(h: f64, tol: f64) -> ModulusEstimate {
        let d = square_domain();
        let g = rasterize(&d, h, &BoundaryQuadruple::full_arcs(&d)).unwrap();
        solve_modulus(
            &g,
            &SolveOptions {
                tol,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn unit_square_modulus_is_one() {
        // The discrete unit square has modulus exactly 1 at every h (the
        // per-column dual bound matches ρ ≡ 1), so the solver must land
        // within its own duality gap of 1.
        let est = solve_square(0.05, 1e-3);
        assert!(
            (est.value - 1.0).abs() < 2e-3,
            "value {} should be within the gap of 1",
            est.value
        );
        assert!(est.lower_bound <= est.value + 1e-12);
        assert!(est.gap <= 1e-3 * est.value + 1e-12);
        assert_eq!(est.upper_bound, est.value);
        assert!(!est.active_paths.is_empty());
        // Scaled density is admissible on the active paths: length ≥ 1.
        let d = square_domain();
        let g = rasterize(&d, 0.05, &BoundaryQuadruple::full_arcs(&d)).unwrap();
        for p in &est.active_paths {
            let l = g.path_length(p, est.density.as_slice());
            assert!(l >= 1.0 - 1e-9, "active path has scaled length {l}");
            assert!(l <= 1.0 + 2e-3, "active path not near-extremal: {l}");
        }
    }

    #[test]
    fn tall_rectangle_modulus_is_half() {
        // Width 1, height 2: connecting bottom to top across height 2 gives
        // modulus width/height = 1/2.
        let d =
            build_graph_domain(BoundaryFunction::constant(iv(0.0, 1.0), 2.0).unwrap()).unwrap();
        let g = rasterize(&d, 0.05, &BoundaryQuadruple::full_arcs(&d)).unwrap();
        let est = solve_modulus(&g, &SolveOptions::default()).unwrap();
        assert!(
            (est.value - 0.5).abs() < 2e-3,
            "rectangle modulus {} != 0.5",
            est.value
        );
    }

    #[test]
    fn disconnected_arcs_error_out() {
        // Source and sink in different columns with eta-restriction off but
        // an impassable gap: carve the domain so no path exists.  A graph
        // domain is always connected, so instead test the box constructor
        // with a window restriction that empties the family — and for the
        // unrestricted Disconnected case, use a window-free impossible
        // geometry: not constructible here, so assert the restricted-empty
        // path returns modulus 0 instead.
        let f = BoundaryFunction::constant(iv(0.0, 4.0), 1.0).unwrap();
        let d = build_graph_domain(f).unwrap();
        let q = BoundaryQuadruple::new(
            &d,
            PrimeEnd::bottom(0.0),
            PrimeEnd::bottom(1.0),
            PrimeEnd::top(4.0),
            PrimeEnd::top(3.0),
        )
        .unwrap();
        let g = rasterize(&d, 0.25, &q).unwrap();
        let est = solve_modulus_restricted(
            &g,
            &SolveOptions {
                eta: Some(0.5),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.lower_bound, 0.0);
    }

    #[test]
    fn restriction_reduces_the_value_and_wide_restriction_matches() {
        // Unit square: the full modulus is 1; restricting to curves of
        // extent < 0.3 cuts off the wide detours but keeps all verticals,
        // so the value stays 1 within gap; restricting a *partial-arc*
        // geometry genuinely lowers the value.
        let d = square_domain();
        let g = rasterize(&d, 0.1, &BoundaryQuadruple::full_arcs(&d)).unwrap();
        let full = solve_modulus(&g, &SolveOptions::default()).unwrap();
        let narrow = solve_modulus_restricted(
            &g,
            &SolveOptions {
                eta: Some(0.3),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(narrow.value <= full.value + full.gap + narrow.gap + 1e-9);
        assert!(
            (narrow.value - 1.0).abs() < 5e-3,
            "verticals survive the restriction: {}",
            narrow.value
        );
        // eta below h is rejected.
        assert!(matches!(
            solve_modulus_restricted(
                &g,
                &SolveOptions {
                    eta: Some(0.05),
                    ..Default::default()
                }
            ),
            Err(DiscreteError::InfeasibleEta { .. })
        ));
    }

    #[test]
    fn solver_rejects_bad_options() {
        let d = square_domain();
        let g = rasterize(&d, 0.25, &BoundaryQuadruple::full_arcs(&d)).unwrap();
        for bad in [
            SolveOptions {
                tol: 0.0,
                ..Default::default()
            },
            SolveOptions {
                tol: f64::NAN,
                ..Default::default()
            },
            SolveOptions {
                max_iter: 0,
                ..Default::default()
            },
            SolveOptions {
                eta: Some(-1.0),
                ..Default::default()
            },
        ] {
            assert!(matches!(
                solve_modulus(&g, &bad),
                Err(DiscreteError::BadOptions { .. })
            ));
        }
    }

    #[test]
    fn iteration_limit_carries_a_partial_certificate() {
        let d = square_domain();
        let g = rasterize(&d, 0.05, &BoundaryQuadruple::full_arcs(&d)).unwrap();
        let err = solve_modulus(
            &g,
            &SolveOptions {
                max_iter: 1,
                ..Default::default()
            },
        )
        .unwrap_err();
        match err {
            DiscreteError::IterationLimit(est) => {
                // The partial certificate is still a valid sandwich.
                assert!(est.lower_bound <= est.value + 1e-12);
                assert!(est.value > 0.0);
                assert_eq!(est.iterations, 1);
            }
            other => panic!("expected IterationLimit, got {other:?}"),
        }
    }

    #[test]
    fn box_quadrilateral_approximates_half_plane_value() {
        // Half-plane quadrilateral with marked points (0, 1, 2, ∞) has
        // modulus exactly 1.  The grid box truncates the neutral arcs and
        // the sink tail, so its family is a subfamily of the half-plane
        // family: the estimate approaches 1 from below as the box grows
        // (measured: 0.921 at R=12,H=8 → 0.962 at R=24,H=16).
        let g = box_with_bottom_arcs(-24.0, 24.0, 16.0, 0.25, (0.0, 1.0), 2.0).unwrap();
        let est = solve_modulus(
            &g,
            &SolveOptions {
                tol: 0.01,
                max_iter: 400,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(
            (est.value - 1.0).abs() < 0.05,
            "box value {} should be within 5% of the half-plane value 1",
            est.value
        );
        assert!(
            est.value < 1.0 + 2.0 * 0.01,
            "truncated family is a subfamily: value {} must not exceed 1 \
             beyond gap/discretization slack",
            est.value
        );
    }

    #[test]
    fn determinism_same_inputs_same_certificate() {
        let a = solve_square(0.1, 1e-3);
        let b = solve_square(0.1, 1e-3);
        assert_eq!(a.value, b.value);
        assert_eq!(a.density, b.density);
        assert_eq!(a.iterations, b.iterations);
    }
}
