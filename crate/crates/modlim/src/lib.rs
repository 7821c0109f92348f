//! Conformal-modulus computations on planar graph domains.
//!
//! A *graph domain* is the region under the graph of a positive,
//! lower-semicontinuous boundary profile `f` on an open interval:
//! `D = {(x, y) : x in (A, B), 0 < y < f(x)}`.  This crate computes the
//! conformal modulus of curve families connecting marked boundary arcs of
//! such domains, three different ways, and provides experiment harnesses
//! that relate them:
//!
//! * [`analytic`] — closed-form quadrilateral moduli via the Grötzsch ring
//!   function (arithmetic-geometric-mean elliptic integrals), cross-ratio
//!   masses, and Möbius normalization of circle quadruples to half-plane
//!   triples.
//! * [`vertical`] — the exact modulus of the family of vertical segments
//!   under a profile, `∫ dx / f(x)`, with its extremal density and a
//!   randomized verifier for the extremality criterion.
//! * [`discrete`] — a grid solver for the continuous `p = 2` modulus on a
//!   rasterized domain, using constraint generation over shortest paths and
//!   a projected-coordinate-descent inner quadratic program, returning
//!   primal-dual certificates.
//! * [`harness`] — vertical-compression (`y ↦ εy`) and width-restriction
//!   (`η`) sweep experiments with Richardson extrapolation, a sandwich
//!   verdict combining both, Riemann-sum upper bounds, wide-family
//!   vanishing checks, and inf-convolution approximation of profiles from
//!   below.
//! * [`report`] — deterministic CSV / SVG / text rendering with fixed
//!   12-significant-digit formatting.

pub mod analytic;
pub mod discrete;
pub mod domain;
pub mod harness;
pub mod quadrature;
pub mod report;
pub mod vertical;

pub use analytic::{
    asymptotic_defect, asymptotic_modulus, grotzsch_mu, liouville_mass_circle,
    liouville_mass_halfplane, normalize_to_halfplane, quad_modulus, AnalyticError,
    CircleQuadruple, HalfPlaneTriple,
};
pub use discrete::{
    rasterize, solve_modulus, solve_modulus_restricted, DensityVector, DiscreteDomain,
    DiscreteError, ModulusEstimate, SolveOptions,
};
pub use domain::{
    boundary_from_json, boundary_to_json, build_graph_domain, overlap_interval, scale_vertical,
    BoundaryFunction, BoundaryQuadruple, DomainError, Edge, GraphDomain, Interval, PrimeEnd,
    ProfileKind, Side, StripDomain,
};
pub use harness::{
    epsilon_sweep, eta_sweep, lsc_approximation, richardson, riemann_upper_bound, sandwich_check,
    wide_family_check, EpsRow, EtaReport, EtaRow, HarnessError, LscReport, LscRow,
    RichardsonResult, SandwichConfig, SandwichVerdict, SweepConfig, SweepReport,
    WideFamilyReport,
};
pub use vertical::{
    check_beurling, check_beurling_with, extremal_density, modulus_vertical, transverse_measure,
    vertical_family, BeurlingProbes, BeurlingReport, ExtremalDensity, VerticalError,
    VerticalFamily,
};
