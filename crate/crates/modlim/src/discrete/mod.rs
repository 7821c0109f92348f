//! Discrete `p = 2` modulus on rasterized domains.
//!
//! The continuous modulus problem — minimize `∫∫ ρ²` over densities with
//! `ρ`-length ≥ 1 on every admissible curve — is discretized on a square
//! grid: node densities, 8-neighbor steps of length `h` and `h√2`, edge
//! mass `(ρ(u) + ρ(v))/2 · step`, and per-node quadrature weights equal to
//! the clipped cell areas.  The solver is constraint generation: a
//! label-setting shortest-path oracle proposes violated curve constraints,
//! an inner projected-coordinate-descent quadratic program re-optimizes the
//! dual multipliers, and the loop stops when the cheapest curve has
//! `ρ`-length within tolerance of 1.  Both primal (admissible density ⇒
//! upper bound) and dual (multipliers ⇒ lower bound) certificates are
//! returned.

mod oracle;
pub mod raster;
mod solver;

pub use raster::{box_with_bottom_arcs, rasterize, DiscreteDomain};
pub use solver::{solve_modulus, solve_modulus_restricted};

use thiserror::Error;

/// Options for the discrete solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Relative duality-gap target: stop when `gap ≤ tol · value`
    /// (equivalently, when the cheapest curve has `ρ`-length ≥ `√(1−tol)`).
    pub tol: f64,
    /// Outer constraint-generation round limit.
    pub max_iter: usize,
    /// Horizontal-extent restriction: only curves spanning fewer than `eta`
    /// horizontal units are constrained.  `None` solves the unrestricted
    /// problem.
    pub eta: Option<f64>,
    /// Reserved for randomized tie-breaking experiments; the default solver
    /// path is fully deterministic and ignores it.
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-3,
            max_iter: 200,
            eta: None,
            seed: 0,
        }
    }
}

/// Node densities on a [`DiscreteDomain`], indexed by node id.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityVector(pub Vec<f64>);

impl DensityVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Primal-dual result of a discrete modulus solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusEstimate {
    /// Certified upper bound: the energy of the returned admissible density.
    pub value: f64,
    /// Certified lower bound from the dual multipliers.
    pub lower_bound: f64,
    /// Equal to `value` (the estimate itself is the upper certificate).
    pub upper_bound: f64,
    /// `value − lower_bound`, clamped at 0.
    pub gap: f64,
    /// Admissible density scaled so every curve has `ρ`-length ≥ 1.
    pub density: DensityVector,
    /// Generated curves whose `ρ`-length is within tolerance of 1 —
    /// the near-extremal family.  Each is a sequence of node ids.
    pub active_paths: Vec<Vec<u32>>,
    /// Outer constraint-generation rounds used.
    pub iterations: usize,
}

#[derive(Debug, Error)]
pub enum DiscreteError {
    #[error("resolution too coarse: h = {h} must be below {feature} = {size}")]
    ResolutionTooCoarse {
        h: f64,
        feature: &'static str,
        size: f64,
    },
    #[error("source and sink arcs are not connected on the grid")]
    Disconnected,
    #[error(
        "iteration limit reached with duality gap {gap:.3e} (value {value:.6}); \
         partial certificate attached",
        gap = .0.gap,
        value = .0.value
    )]
    IterationLimit(Box<ModulusEstimate>),
    #[error("eta = {eta} is below the cell size h = {h}; the restricted family is unresolvable")]
    InfeasibleEta { eta: f64, h: f64 },
    #[error("invalid solver options: {reason}")]
    BadOptions { reason: String },
}

impl SolveOptions {
    pub(crate) fn validate(&self) -> Result<(), DiscreteError> {
        if !self.tol.is_finite() || !(self.tol > 0.0) || self.tol > 0.5 {
            return Err(DiscreteError::BadOptions {
                reason: format!("tol must lie in (0, 0.5], got {}", self.tol),
            });
        }
        if self.max_iter == 0 {
            return Err(DiscreteError::BadOptions {
                reason: "max_iter must be at least 1".into(),
            });
        }
        if let Some(eta) = self.eta {
            if !eta.is_finite() || !(eta > 0.0) {
                return Err(DiscreteError::BadOptions {
                    reason: format!("eta must be finite and positive, got {eta}"),
                });
            }
        }
        Ok(())
    }
}
