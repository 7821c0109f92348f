//! Domain model: boundary profiles, graph domains, prime-end markings, and
//! strips between two profiles.
//!
//! A graph domain is `D = {(x, y) : x ∈ (A, B), 0 < y < f(x)}` for a positive
//! boundary profile `f` that is lower-semicontinuous (lsc).  Profiles are
//! represented exactly as step functions or piecewise-linear interpolants;
//! vertical scaling is kept as a lazy factor so that repeated scalings
//! compose bit-exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors for domain construction and validation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("interval endpoints must be finite with lo < hi (got [{lo}, {hi}])")]
    EmptyInterval { lo: f64, hi: f64 },
    #[error("{what} must be finite (got {value} at position {index})")]
    NonFinite {
        what: &'static str,
        value: f64,
        index: usize,
    },
    #[error("breakpoints must be strictly increasing and lie strictly inside the interval (violated at position {index})")]
    BadBreakpoints { index: usize },
    #[error("knots must be strictly increasing and span the interval exactly (violated at position {index})")]
    BadKnots { index: usize },
    #[error("expected {expected} values, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("not lower-semicontinuous at x = {at}: stored value {stored} exceeds the smaller one-sided limit {limit}")]
    NotLsc { at: f64, stored: f64, limit: f64 },
    #[error("lower profile is not upper-semicontinuous at x = {at}: stored value {stored} is below the larger one-sided limit {limit}")]
    NotUsc { at: f64, stored: f64, limit: f64 },
    #[error("profile values must be strictly positive (got {value} at x = {at})")]
    NonPositive { value: f64, at: f64 },
    #[error("vertical scale factor must be finite and strictly positive (got {factor})")]
    BadScale { factor: f64 },
    #[error("invalid prime end: {reason}")]
    InvalidPrimeEnd { reason: String },
    #[error("invalid boundary quadruple: {reason}")]
    InvalidQuadruple { reason: String },
    #[error("strip profiles must share one interval (got [{lo_f}, {hi_f}] and [{lo_g}, {hi_g}])")]
    MismatchedIntervals {
        lo_f: f64,
        hi_f: f64,
        lo_g: f64,
        hi_g: f64,
    },
    #[error("strip is degenerate: upper profile does not exceed lower profile near x = {at} (gap {gap})")]
    DegenerateStrip { at: f64, gap: f64 },
    #[error("domain spec: {0}")]
    Spec(String),
}

/// A nonempty bounded open interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, DomainError> {
        if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
            return Err(DomainError::EmptyInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn contains_closed(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Intersection as an open interval; `None` when empty or degenerate.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo < hi {
            Some(Interval { lo, hi })
        } else {
            None
        }
    }
}

/// How a profile is represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// Piecewise constant with finitely many jumps; the representable lsc case.
    Step,
    /// Continuous piecewise-linear interpolant.
    PiecewiseLinear,
    /// Continuous samples joined linearly (same evaluation as
    /// `PiecewiseLinear`, kept distinct for provenance of the data).
    SampledContinuous,
}

/// One linear span of a profile graph: the values `y0 → y1` over `[x0, x1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSpan {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl LinearSpan {
    pub fn value_at(&self, x: f64) -> f64 {
        if self.x1 == self.x0 {
            return self.y0;
        }
        let t = (x - self.x0) / (self.x1 - self.x0);
        self.y0 + t * (self.y1 - self.y0)
    }

    pub fn min(&self) -> f64 {
        self.y0.min(self.y1)
    }
}

/// A jump discontinuity of a step profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub x: f64,
    /// Limit from the left.
    pub left: f64,
    /// Limit from the right.
    pub right: f64,
    /// Stored value at the breakpoint itself (≤ min(left, right) for lsc).
    pub stored: f64,
}

/// A boundary profile on an interval: a positive function given exactly as a
/// step function or a piecewise-linear interpolant, together with a lazy
/// vertical scale factor.
///
/// Step profiles carry an explicit stored value at each interior breakpoint;
/// lower-semicontinuity (`stored ≤ min` of the one-sided limits) is enforced
/// at construction.  All evaluation accessors return *scaled* values.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFunction {
    kind: ProfileKind,
    interval: Interval,
    /// Step: interior breakpoints (possibly empty).
    /// PiecewiseLinear / SampledContinuous: knots including both endpoints.
    xs: Vec<f64>,
    /// Step: piece values, length `xs.len() + 1`.
    /// PiecewiseLinear / SampledContinuous: knot values, length `xs.len()`.
    ys: Vec<f64>,
    /// Step only: stored value at each interior breakpoint.
    jump_ys: Vec<f64>,
    /// Lazy vertical scale; multiplying profiles composes by multiplying
    /// this factor, which keeps `scale(a).scale(b) == scale(a*b)` bit-exact.
    yscale: f64,
}

fn check_finite(what: &'static str, vals: &[f64]) -> Result<(), DomainError> {
    for (i, &v) in vals.iter().enumerate() {
        if !v.is_finite() {
            return Err(DomainError::NonFinite {
                what,
                value: v,
                index: i,
            });
        }
    }
    Ok(())
}

impl BoundaryFunction {
    /// Step profile: `piece_values[i]` on the open span between consecutive
    /// breakpoints (with the interval endpoints as outer fenceposts).
    /// `breakpoint_values[i]`, when given, is the stored value at
    /// `breakpoints[i]`; it defaults to the smaller adjacent piece value,
    /// the lower-semicontinuous canonical choice.  Semicontinuity is *not*
    /// validated here — a graph-domain top profile must be lsc (checked by
    /// [`build_graph_domain`]), while a strip's lower profile must be usc
    /// (checked by [`StripDomain::new`]).
    pub fn step(
        interval: Interval,
        breakpoints: Vec<f64>,
        piece_values: Vec<f64>,
        breakpoint_values: Option<Vec<f64>>,
    ) -> Result<Self, DomainError> {
        check_finite("breakpoint", &breakpoints)?;
        check_finite("piece value", &piece_values)?;
        for (i, &b) in breakpoints.iter().enumerate() {
            let prev = if i == 0 { interval.lo } else { breakpoints[i - 1] };
            if !(b > prev) || !(b < interval.hi) {
                return Err(DomainError::BadBreakpoints { index: i });
            }
        }
        if piece_values.len() != breakpoints.len() + 1 {
            return Err(DomainError::ArityMismatch {
                expected: breakpoints.len() + 1,
                got: piece_values.len(),
            });
        }
        let jump_ys = match breakpoint_values {
            Some(w) => {
                check_finite("breakpoint value", &w)?;
                if w.len() != breakpoints.len() {
                    return Err(DomainError::ArityMismatch {
                        expected: breakpoints.len(),
                        got: w.len(),
                    });
                }
                w
            }
            None => (0..breakpoints.len())
                .map(|i| piece_values[i].min(piece_values[i + 1]))
                .collect(),
        };
        Ok(BoundaryFunction {
            kind: ProfileKind::Step,
            interval,
            xs: breakpoints,
            ys: piece_values,
            jump_ys,
            yscale: 1.0,
        })
    }

    /// Constant profile.
    pub fn constant(interval: Interval, value: f64) -> Result<Self, DomainError> {
        Self::step(interval, Vec::new(), vec![value], None)
    }

    /// Continuous piecewise-linear profile.  The knots must be strictly
    /// increasing and span the interval exactly (first knot = `lo`, last
    /// knot = `hi`).
    pub fn piecewise_linear(
        interval: Interval,
        knots: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self, DomainError> {
        Self::interpolant(ProfileKind::PiecewiseLinear, interval, knots, values)
    }

    /// Continuous profile from samples, evaluated by linear interpolation.
    pub fn sampled(
        interval: Interval,
        knots: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self, DomainError> {
        Self::interpolant(ProfileKind::SampledContinuous, interval, knots, values)
    }

    fn interpolant(
        kind: ProfileKind,
        interval: Interval,
        knots: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self, DomainError> {
        check_finite("knot", &knots)?;
        check_finite("knot value", &values)?;
        if knots.len() < 2 {
            return Err(DomainError::BadKnots { index: 0 });
        }
        if values.len() != knots.len() {
            return Err(DomainError::ArityMismatch {
                expected: knots.len(),
                got: values.len(),
            });
        }
        if knots[0] != interval.lo {
            return Err(DomainError::BadKnots { index: 0 });
        }
        if *knots.last().unwrap() != interval.hi {
            return Err(DomainError::BadKnots {
                index: knots.len() - 1,
            });
        }
        for i in 1..knots.len() {
            if !(knots[i] > knots[i - 1]) {
                return Err(DomainError::BadKnots { index: i });
            }
        }
        Ok(BoundaryFunction {
            kind,
            interval,
            xs: knots,
            ys: values,
            jump_ys: Vec::new(),
            yscale: 1.0,
        })
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn yscale(&self) -> f64 {
        self.yscale
    }

    pub fn is_step(&self) -> bool {
        self.kind == ProfileKind::Step
    }

    /// Return this profile scaled vertically by `factor` (lazy: only the
    /// scale field changes, so scalings compose bit-exactly).
    pub fn scaled(&self, factor: f64) -> Result<Self, DomainError> {
        if !factor.is_finite() || !(factor > 0.0) {
            return Err(DomainError::BadScale { factor });
        }
        let mut out = self.clone();
        out.yscale = self.yscale * factor;
        Ok(out)
    }

    /// Pointwise value (scaled).  Arguments outside the closed interval are
    /// clamped to the nearest endpoint.
    pub fn value(&self, x: f64) -> f64 {
        let x = x.clamp(self.interval.lo, self.interval.hi);
        self.yscale * self.raw_value(x)
    }

    fn raw_value(&self, x: f64) -> f64 {
        match self.kind {
            ProfileKind::Step => {
                // Exact hits on a breakpoint return the stored value.
                match self.xs.binary_search_by(|b| b.partial_cmp(&x).unwrap()) {
                    Ok(i) => self.jump_ys[i],
                    Err(i) => self.ys[i],
                }
            }
            _ => {
                let i = match self.xs.binary_search_by(|b| b.partial_cmp(&x).unwrap()) {
                    Ok(i) => return self.ys[i],
                    Err(i) => i.clamp(1, self.xs.len() - 1),
                };
                let span = LinearSpan {
                    x0: self.xs[i - 1],
                    x1: self.xs[i],
                    y0: self.ys[i - 1],
                    y1: self.ys[i],
                };
                span.value_at(x)
            }
        }
    }

    /// Upper-semicontinuous envelope value (scaled): at a step breakpoint,
    /// the larger of the two one-sided limits.  Used when rasterization
    /// should not lose the taller side of a jump.
    pub fn upper_value(&self, x: f64) -> f64 {
        let x = x.clamp(self.interval.lo, self.interval.hi);
        match self.kind {
            ProfileKind::Step => {
                match self.xs.binary_search_by(|b| b.partial_cmp(&x).unwrap()) {
                    Ok(i) => self.yscale * self.ys[i].max(self.ys[i + 1]),
                    Err(i) => self.yscale * self.ys[i],
                }
            }
            _ => self.value(x),
        }
    }

    /// Global minimum over the closed interval (scaled).  Positive iff the
    /// profile is a valid graph-domain boundary.
    pub fn min_value(&self) -> f64 {
        let m = self
            .ys
            .iter()
            .chain(self.jump_ys.iter())
            .fold(f64::INFINITY, |a, &b| a.min(b));
        self.yscale * m
    }

    /// Global maximum over the closed interval (scaled).
    pub fn max_value(&self) -> f64 {
        let m = self
            .ys
            .iter()
            .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        self.yscale * m
    }

    /// Exact minimum of the profile over the closed interval `[a, b]`
    /// (clamped to the profile's interval), including stored jump values at
    /// breakpoints inside `[a, b]`.
    pub fn min_on(&self, a: f64, b: f64) -> f64 {
        let a = a.clamp(self.interval.lo, self.interval.hi);
        let b = b.clamp(self.interval.lo, self.interval.hi);
        if b < a {
            return f64::INFINITY;
        }
        let mut m = f64::INFINITY;
        match self.kind {
            ProfileKind::Step => {
                // Pieces with positive-length overlap with [a, b].
                for (i, &v) in self.ys.iter().enumerate() {
                    let lo = if i == 0 { self.interval.lo } else { self.xs[i - 1] };
                    let hi = if i == self.xs.len() {
                        self.interval.hi
                    } else {
                        self.xs[i]
                    };
                    if hi.min(b) > lo.max(a) {
                        m = m.min(v);
                    }
                }
                // Stored values at breakpoints inside [a, b].
                for (i, &x) in self.xs.iter().enumerate() {
                    if a <= x && x <= b {
                        m = m.min(self.jump_ys[i]);
                    }
                }
                // Degenerate single-point query on a non-breakpoint.
                if m == f64::INFINITY {
                    return self.value(a);
                }
            }
            _ => {
                m = self.raw_value(a).min(self.raw_value(b));
                for i in 0..self.xs.len() {
                    if a < self.xs[i] && self.xs[i] < b {
                        m = m.min(self.ys[i]);
                    }
                }
                return self.yscale * m;
            }
        }
        self.yscale * m
    }

    /// Area under the profile over its whole interval (scaled), i.e. the
    /// area of the graph domain it bounds.
    pub fn area(&self) -> f64 {
        let raw = match self.kind {
            ProfileKind::Step => {
                let mut s = 0.0;
                for (i, &v) in self.ys.iter().enumerate() {
                    let lo = if i == 0 { self.interval.lo } else { self.xs[i - 1] };
                    let hi = if i == self.xs.len() {
                        self.interval.hi
                    } else {
                        self.xs[i]
                    };
                    s += (hi - lo) * v;
                }
                s
            }
            _ => {
                let mut s = 0.0;
                for i in 1..self.xs.len() {
                    s += 0.5 * (self.ys[i - 1] + self.ys[i]) * (self.xs[i] - self.xs[i - 1]);
                }
                s
            }
        };
        self.yscale * raw
    }

    /// The profile graph over `[a, b]` as linear spans with scaled values.
    /// Step profiles yield constant spans split at breakpoints; stored jump
    /// values (measure zero) are not emitted.
    pub fn spans_in(&self, a: f64, b: f64) -> Vec<LinearSpan> {
        let a = a.clamp(self.interval.lo, self.interval.hi);
        let b = b.clamp(self.interval.lo, self.interval.hi);
        let mut out = Vec::new();
        if b <= a {
            return out;
        }
        match self.kind {
            ProfileKind::Step => {
                for (i, &v) in self.ys.iter().enumerate() {
                    let lo = if i == 0 { self.interval.lo } else { self.xs[i - 1] };
                    let hi = if i == self.xs.len() {
                        self.interval.hi
                    } else {
                        self.xs[i]
                    };
                    let (clo, chi) = (lo.max(a), hi.min(b));
                    if chi > clo {
                        out.push(LinearSpan {
                            x0: clo,
                            x1: chi,
                            y0: self.yscale * v,
                            y1: self.yscale * v,
                        });
                    }
                }
            }
            _ => {
                for i in 1..self.xs.len() {
                    let (lo, hi) = (self.xs[i - 1], self.xs[i]);
                    let (clo, chi) = (lo.max(a), hi.min(b));
                    if chi > clo {
                        let span = LinearSpan {
                            x0: lo,
                            x1: hi,
                            y0: self.ys[i - 1],
                            y1: self.ys[i],
                        };
                        out.push(LinearSpan {
                            x0: clo,
                            x1: chi,
                            y0: self.yscale * span.value_at(clo),
                            y1: self.yscale * span.value_at(chi),
                        });
                    }
                }
            }
        }
        out
    }

    /// Interior x-positions where the profile is non-smooth (breakpoints or
    /// knots) restricted to `(a, b)`; quadrature split points.
    pub fn kinks_in(&self, a: f64, b: f64) -> Vec<f64> {
        self.xs
            .iter()
            .copied()
            .filter(|&x| x > a && x < b)
            .collect()
    }

    /// Jump discontinuities (step profiles only; empty otherwise), scaled.
    pub fn jumps(&self) -> Vec<Jump> {
        if self.kind != ProfileKind::Step {
            return Vec::new();
        }
        let mut out = Vec::new();
        for (i, &x) in self.xs.iter().enumerate() {
            let (l, r) = (self.ys[i], self.ys[i + 1]);
            if l != r {
                out.push(Jump {
                    x,
                    left: self.yscale * l,
                    right: self.yscale * r,
                    stored: self.yscale * self.jump_ys[i],
                });
            }
        }
        out
    }

    /// Width of the narrowest smooth piece (gap between consecutive
    /// breakpoints / knots, with the interval endpoints as fenceposts).
    pub fn min_piece_width(&self) -> f64 {
        let mut prev = self.interval.lo;
        let mut min_w = f64::INFINITY;
        let inner: &[f64] = match self.kind {
            ProfileKind::Step => &self.xs,
            // For interpolants the first and last knot coincide with the
            // interval endpoints; skip them.
            _ => &self.xs[1..self.xs.len() - 1],
        };
        for &x in inner {
            min_w = min_w.min(x - prev);
            prev = x;
        }
        min_w.min(self.interval.hi - prev)
    }

    /// Raw (unscaled) piece data for step profiles:
    /// `(breakpoints, piece_values, stored_values)`.
    pub(crate) fn step_parts(&self) -> (&[f64], &[f64], &[f64]) {
        debug_assert_eq!(self.kind, ProfileKind::Step);
        (&self.xs, &self.ys, &self.jump_ys)
    }
}

/// JSON wire format for boundary profiles.
#[derive(Debug, Serialize, Deserialize)]
struct ProfileSpec {
    kind: String,
    interval: [f64; 2],
    #[serde(default)]
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    breakpoint_values: Option<Vec<f64>>,
}

/// Parse a boundary profile from its JSON description:
///
/// ```json
/// {"kind": "step", "interval": [0.0, 2.0], "breakpoints": [1.0], "values": [1.0, 2.0]}
/// ```
///
/// `kind` is `"step"`, `"piecewise_linear"`, or `"sampled"`.  For `step`,
/// `values` has one more entry than `breakpoints` and the optional
/// `breakpoint_values` gives stored values at the breakpoints.  For the
/// continuous kinds, `breakpoints` lists all knots including the interval
/// endpoints and `values` matches it in length.
pub fn boundary_from_json(text: &str) -> Result<BoundaryFunction, DomainError> {
    let spec: ProfileSpec =
        serde_json::from_str(text).map_err(|e| DomainError::Spec(e.to_string()))?;
    let interval = Interval::new(spec.interval[0], spec.interval[1])?;
    match spec.kind.as_str() {
        "step" => BoundaryFunction::step(
            interval,
            spec.breakpoints,
            spec.values,
            spec.breakpoint_values,
        ),
        "piecewise_linear" => {
            BoundaryFunction::piecewise_linear(interval, spec.breakpoints, spec.values)
        }
        "sampled" => BoundaryFunction::sampled(interval, spec.breakpoints, spec.values),
        other => Err(DomainError::Spec(format!(
            "unknown profile kind {other:?}; expected \"step\", \"piecewise_linear\", or \"sampled\""
        ))),
    }
}

/// Serialize a profile back to the JSON wire format.  The lazy vertical
/// scale is multiplied out into the stored values.
pub fn boundary_to_json(f: &BoundaryFunction) -> String {
    let s = f.yscale;
    let spec = match f.kind {
        ProfileKind::Step => ProfileSpec {
            kind: "step".into(),
            interval: [f.interval.lo, f.interval.hi],
            breakpoints: f.xs.clone(),
            values: f.ys.iter().map(|v| v * s).collect(),
            breakpoint_values: Some(f.jump_ys.iter().map(|v| v * s).collect()),
        },
        ProfileKind::PiecewiseLinear | ProfileKind::SampledContinuous => ProfileSpec {
            kind: if f.kind == ProfileKind::PiecewiseLinear {
                "piecewise_linear"
            } else {
                "sampled"
            }
            .into(),
            interval: [f.interval.lo, f.interval.hi],
            breakpoints: f.xs.clone(),
            values: f.ys.iter().map(|v| v * s).collect(),
            breakpoint_values: None,
        },
    };
    serde_json::to_string_pretty(&spec).expect("profile spec serializes")
}

/// A graph domain `{(x, y) : x ∈ (A, B), 0 < y < f(x)}` with a validated
/// positive profile.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphDomain {
    f: BoundaryFunction,
    area: f64,
}

/// Check that a step profile's stored breakpoint values do not exceed the
/// adjacent piece values (lower semicontinuity at the jumps; the other
/// profile kinds are continuous, hence always lsc).
fn check_lsc(f: &BoundaryFunction) -> Result<(), DomainError> {
    if f.kind == ProfileKind::Step {
        let (xs, ys, jys) = f.step_parts();
        for (i, &v) in jys.iter().enumerate() {
            let limit = ys[i].min(ys[i + 1]);
            if v > limit {
                return Err(DomainError::NotLsc {
                    at: xs[i],
                    stored: v * f.yscale,
                    limit: limit * f.yscale,
                });
            }
        }
    }
    Ok(())
}

/// Validate a profile as a graph-domain boundary: lower-semicontinuous and
/// strictly positive everywhere.
pub fn build_graph_domain(f: BoundaryFunction) -> Result<GraphDomain, DomainError> {
    check_lsc(&f)?;
    let m = f.min_value();
    if !(m > 0.0) {
        // Locate a witness x for the error message.
        let at = match f.kind {
            ProfileKind::Step => {
                let (xs, ys, jys) = f.step_parts();
                let mut at = f.interval.lo;
                let mut best = f64::INFINITY;
                for (i, &v) in ys.iter().enumerate() {
                    if v < best {
                        best = v;
                        let lo = if i == 0 { f.interval.lo } else { xs[i - 1] };
                        let hi = if i == xs.len() { f.interval.hi } else { xs[i] };
                        at = 0.5 * (lo + hi);
                    }
                }
                for (i, &v) in jys.iter().enumerate() {
                    if v < best {
                        best = v;
                        at = xs[i];
                    }
                }
                at
            }
            _ => {
                let mut at = f.interval.lo;
                let mut best = f64::INFINITY;
                for (i, &v) in f.ys.iter().enumerate() {
                    if v < best {
                        best = v;
                        at = f.xs[i];
                    }
                }
                at
            }
        };
        return Err(DomainError::NonPositive { value: m, at });
    }
    let area = f.area();
    Ok(GraphDomain { f, area })
}

/// Vertically compress or stretch the domain: `(x, y) ↦ (x, factor·y)`.
pub fn scale_vertical(d: &GraphDomain, factor: f64) -> Result<GraphDomain, DomainError> {
    build_graph_domain(d.f.scaled(factor)?)
}

impl GraphDomain {
    pub fn f(&self) -> &BoundaryFunction {
        &self.f
    }

    pub fn interval(&self) -> Interval {
        self.f.interval()
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn min_height(&self) -> f64 {
        self.f.min_value()
    }

    pub fn scale_vertical(&self, factor: f64) -> Result<GraphDomain, DomainError> {
        scale_vertical(self, factor)
    }
}

/// Which boundary edge a prime end sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    /// The segment `(A, B) × {0}`.
    Bottom,
    /// The graph of `f`.
    Top,
}

/// Disambiguates the two prime ends that share an x-position at a jump of a
/// step profile (the vertical wall there has a left face and a right face).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    None,
}

/// A boundary prime end reduced to its accessible coordinates: an
/// x-position, the edge it lies on, and (at a jump of the top profile) which
/// face of the wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimeEnd {
    pub x: f64,
    pub edge: Edge,
    pub side: Side,
}

impl PrimeEnd {
    pub fn bottom(x: f64) -> Self {
        PrimeEnd {
            x,
            edge: Edge::Bottom,
            side: Side::None,
        }
    }

    pub fn top(x: f64) -> Self {
        PrimeEnd {
            x,
            edge: Edge::Top,
            side: Side::None,
        }
    }

    fn validate(&self, d: &GraphDomain) -> Result<(), DomainError> {
        let iv = d.interval();
        if !self.x.is_finite() || !iv.contains_closed(self.x) {
            return Err(DomainError::InvalidPrimeEnd {
                reason: format!(
                    "x = {} lies outside the closed interval [{}, {}]",
                    self.x,
                    iv.lo(),
                    iv.hi()
                ),
            });
        }
        if self.side != Side::None {
            if self.edge != Edge::Top {
                return Err(DomainError::InvalidPrimeEnd {
                    reason: "side tags are only meaningful on the top edge".into(),
                });
            }
            let is_jump = d.f().jumps().iter().any(|j| j.x == self.x);
            if !is_jump {
                return Err(DomainError::InvalidPrimeEnd {
                    reason: format!(
                        "side tag at x = {} requires a jump of the profile there",
                        self.x
                    ),
                });
            }
        }
        Ok(())
    }
}

/// Four prime ends in counterclockwise boundary order marking two disjoint
/// arcs: the *source* arc from `a` to `b` along the bottom edge and the
/// *sink* arc from `c` to `d` along the top edge.
///
/// Counterclockwise order along the boundary of a graph domain runs
/// left-to-right along the bottom and right-to-left along the top, so the
/// constructor requires `a.x < b.x` (both on the bottom) and `d.x ≤ c.x`
/// (both on the top; equality allowed at a jump where the two faces of the
/// wall are distinct prime ends).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryQuadruple {
    pub a: PrimeEnd,
    pub b: PrimeEnd,
    pub c: PrimeEnd,
    pub d: PrimeEnd,
}

impl BoundaryQuadruple {
    pub fn new(
        domain: &GraphDomain,
        a: PrimeEnd,
        b: PrimeEnd,
        c: PrimeEnd,
        d: PrimeEnd,
    ) -> Result<Self, DomainError> {
        for (p, name) in [(&a, "a"), (&b, "b"), (&c, "c"), (&d, "d")] {
            p.validate(domain).map_err(|e| match e {
                DomainError::InvalidPrimeEnd { reason } => DomainError::InvalidPrimeEnd {
                    reason: format!("{name}: {reason}"),
                },
                other => other,
            })?;
        }
        if a.edge != Edge::Bottom || b.edge != Edge::Bottom {
            return Err(DomainError::InvalidQuadruple {
                reason: "a and b must lie on the bottom edge".into(),
            });
        }
        if c.edge != Edge::Top || d.edge != Edge::Top {
            return Err(DomainError::InvalidQuadruple {
                reason: "c and d must lie on the top edge".into(),
            });
        }
        if !(a.x < b.x) {
            return Err(DomainError::InvalidQuadruple {
                reason: format!("need a.x < b.x (got a.x = {}, b.x = {})", a.x, b.x),
            });
        }
        if c.x < d.x {
            return Err(DomainError::InvalidQuadruple {
                reason: format!(
                    "need d.x <= c.x for counterclockwise order (got c.x = {}, d.x = {})",
                    c.x, d.x
                ),
            });
        }
        if c.x == d.x && (c.side == d.side || c.side == Side::None) {
            return Err(DomainError::InvalidQuadruple {
                reason: "coincident top prime ends need distinct side tags".into(),
            });
        }
        Ok(BoundaryQuadruple { a, b, c, d })
    }

    /// The quadruple marking the full bottom edge as source and the full top
    /// edge as sink.
    pub fn full_arcs(domain: &GraphDomain) -> Self {
        let iv = domain.interval();
        BoundaryQuadruple {
            a: PrimeEnd::bottom(iv.lo()),
            b: PrimeEnd::bottom(iv.hi()),
            c: PrimeEnd::top(iv.hi()),
            d: PrimeEnd::top(iv.lo()),
        }
    }
}

/// Open x-interval over which the source arc `[a, b]` (bottom) and the sink
/// arc `[d, c]` (top) face each other: `(max(a.x, d.x), min(b.x, c.x))`.
/// `None` when the arcs share no vertical line.
pub fn overlap_interval(q: &BoundaryQuadruple) -> Option<Interval> {
    let lo = q.a.x.max(q.d.x);
    let hi = q.b.x.min(q.c.x);
    if lo < hi {
        Some(Interval { lo, hi })
    } else {
        None
    }
}

/// A strip `{(x, y) : x ∈ (A, B), g(x) < y < f(x)}` between a lower profile
/// `g` (upper-semicontinuous) and an upper profile `f`
/// (lower-semicontinuous), with `g < f` pointwise.
#[derive(Debug, Clone, PartialEq)]
pub struct StripDomain {
    f: BoundaryFunction,
    g: BoundaryFunction,
}

impl StripDomain {
    pub fn new(f: BoundaryFunction, g: BoundaryFunction) -> Result<Self, DomainError> {
        let (fi, gi) = (f.interval(), g.interval());
        if fi != gi {
            return Err(DomainError::MismatchedIntervals {
                lo_f: fi.lo(),
                hi_f: fi.hi(),
                lo_g: gi.lo(),
                hi_g: gi.hi(),
            });
        }
        // Lower-semicontinuity of the upper profile.
        check_lsc(&f)?;
        // Upper-semicontinuity of the lower profile: the stored value at a
        // jump must not fall below the larger one-sided limit.
        if g.kind == ProfileKind::Step {
            let (xs, ys, jys) = g.step_parts();
            for (i, &x) in xs.iter().enumerate() {
                let limit = ys[i].max(ys[i + 1]);
                if jys[i] < limit {
                    return Err(DomainError::NotUsc {
                        at: x,
                        stored: g.yscale * jys[i],
                        limit: g.yscale * limit,
                    });
                }
            }
        }
        // Positive gap f − g everywhere on the closed interval: check the
        // linear spans of the difference (exact for both representations)
        // plus the stored values at every breakpoint of either profile.
        let (lo, hi) = (fi.lo(), fi.hi());
        let mut min_gap = f64::INFINITY;
        let mut at = lo;
        let mut record = |gap: f64, x: f64| {
            if gap < min_gap {
                min_gap = gap;
                at = x;
            }
        };
        let mut cuts: Vec<f64> = vec![lo, hi];
        cuts.extend(f.kinks_in(lo, hi));
        cuts.extend(g.kinks_in(lo, hi));
        cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
        cuts.dedup();
        for w in cuts.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            if x1 <= x0 {
                continue;
            }
            // One smooth span of both profiles: the gap is linear, so its
            // minimum is attained at a span endpoint (use one-sided limits,
            // i.e. span endpoint values, not stored values).
            for fs in f.spans_in(x0, x1) {
                let g0 = g.spans_in(x0, x1)
                    .first()
                    .map(|gs| gs.value_at(fs.x0))
                    .unwrap_or_else(|| g.value(fs.x0));
                let g1 = g.spans_in(x0, x1)
                    .first()
                    .map(|gs| gs.value_at(fs.x1))
                    .unwrap_or_else(|| g.value(fs.x1));
                record(fs.y0 - g0, fs.x0);
                record(fs.y1 - g1, fs.x1);
            }
        }
        // Stored values at breakpoints (both profiles) and interval endpoints.
        let mut probe_xs: Vec<f64> = vec![lo, hi];
        probe_xs.extend(f.kinks_in(lo, hi));
        probe_xs.extend(g.kinks_in(lo, hi));
        for x in probe_xs {
            record(f.value(x) - g.value(x), x);
        }
        if !(min_gap > 0.0) {
            return Err(DomainError::DegenerateStrip { at, gap: min_gap });
        }
        Ok(StripDomain { f, g })
    }

    pub fn f(&self) -> &BoundaryFunction {
        &self.f
    }

    pub fn g(&self) -> &BoundaryFunction {
        &self.g
    }

    pub fn interval(&self) -> Interval {
        self.f.interval()
    }

    /// The gap `f(x) − g(x)`.
    pub fn gap(&self, x: f64) -> f64 {
        self.f.value(x) - self.g.value(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn interval_rejects_degenerate() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(0.0, f64::INFINITY).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn step_evaluation_and_stored_jump_values() {
        // {1 on (0,1), 2 on (1,2)}, canonical stored value min(1,2) = 1.
        let f = BoundaryFunction::step(iv(0.0, 2.0), vec![1.0], vec![1.0, 2.0], None).unwrap();
        assert_eq!(f.value(0.5), 1.0);
        assert_eq!(f.value(1.5), 2.0);
        assert_eq!(f.value(1.0), 1.0); // stored = lsc-canonical minimum
        assert_eq!(f.upper_value(1.0), 2.0); // usc envelope takes the tall side
        assert_eq!(f.value(-3.0), 1.0); // clamped
        assert_eq!(f.value(9.0), 2.0); // clamped
        assert_eq!(f.min_value(), 1.0);
        assert_eq!(f.max_value(), 2.0);
        assert_eq!(f.area(), 3.0);
        assert_eq!(f.min_piece_width(), 1.0);
    }

    #[test]
    fn graph_domain_rejects_value_above_lsc_limit() {
        // The profile itself constructs (a strip's lower profile may be
        // usc), but it is not a legal graph-domain top boundary.
        let f = BoundaryFunction::step(
            iv(0.0, 2.0),
            vec![1.0],
            vec![1.0, 2.0],
            Some(vec![1.5]),
        )
        .unwrap();
        let err = build_graph_domain(f).unwrap_err();
        match err {
            DomainError::NotLsc { at, stored, limit } => {
                assert_eq!(at, 1.0);
                assert_eq!(stored, 1.5);
                assert_eq!(limit, 1.0);
            }
            other => panic!("expected NotLsc, got {other:?}"),
        }
        // A stored value *below* both limits is a legal lsc function.
        let f = BoundaryFunction::step(
            iv(0.0, 2.0),
            vec![1.0],
            vec![1.0, 2.0],
            Some(vec![0.25]),
        )
        .unwrap();
        assert_eq!(f.value(1.0), 0.25);
        assert_eq!(f.min_value(), 0.25);
        assert!(build_graph_domain(f).is_ok());
    }

    #[test]
    fn step_rejects_bad_breakpoints_and_arity() {
        assert!(matches!(
            BoundaryFunction::step(iv(0.0, 2.0), vec![0.0], vec![1.0, 2.0], None),
            Err(DomainError::BadBreakpoints { .. })
        ));
        assert!(matches!(
            BoundaryFunction::step(iv(0.0, 2.0), vec![1.5, 1.0], vec![1.0, 2.0, 3.0], None),
            Err(DomainError::BadBreakpoints { .. })
        ));
        assert!(matches!(
            BoundaryFunction::step(iv(0.0, 2.0), vec![1.0], vec![1.0], None),
            Err(DomainError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn piecewise_linear_interpolates() {
        let f = BoundaryFunction::piecewise_linear(
            iv(0.0, 1.0),
            vec![0.0, 1.0],
            vec![1.0, 2.0],
        )
        .unwrap();
        assert_eq!(f.value(0.0), 1.0);
        assert_eq!(f.value(1.0), 2.0);
        assert!((f.value(0.25) - 1.25).abs() < 1e-15);
        assert!((f.area() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn piecewise_linear_requires_spanning_knots() {
        assert!(matches!(
            BoundaryFunction::piecewise_linear(iv(0.0, 1.0), vec![0.1, 1.0], vec![1.0, 2.0]),
            Err(DomainError::BadKnots { .. })
        ));
        assert!(matches!(
            BoundaryFunction::piecewise_linear(iv(0.0, 1.0), vec![0.0, 0.9], vec![1.0, 2.0]),
            Err(DomainError::BadKnots { .. })
        ));
    }

    #[test]
    fn lazy_scale_composes_bit_exactly() {
        let f = BoundaryFunction::step(iv(0.0, 2.0), vec![1.0], vec![1.0, 2.0], None).unwrap();
        let a = f.scaled(0.3).unwrap().scaled(0.7).unwrap();
        let b = f.scaled(0.3 * 0.7).unwrap();
        assert_eq!(a, b); // bit-exact composition, not just approximate
        assert_eq!(a.value(1.5), 2.0 * (0.3 * 0.7));
        assert!(f.scaled(0.0).is_err());
        assert!(f.scaled(-1.0).is_err());
        assert!(f.scaled(f64::NAN).is_err());
    }

    #[test]
    fn min_on_closed_subintervals() {
        let f = BoundaryFunction::step(
            iv(0.0, 3.0),
            vec![1.0, 2.0],
            vec![3.0, 1.0, 2.0],
            Some(vec![0.5, 1.0]),
        )
        .unwrap();
        assert_eq!(f.min_on(0.0, 0.9), 3.0);
        assert_eq!(f.min_on(0.0, 1.0), 0.5); // picks up the stored value at the jump
        assert_eq!(f.min_on(1.1, 1.9), 1.0);
        assert_eq!(f.min_on(2.5, 3.0), 2.0);
        assert_eq!(f.min_on(0.0, 3.0), 0.5);
        // Piecewise-linear: interior knot minimum and endpoint evaluations.
        let g = BoundaryFunction::piecewise_linear(
            iv(0.0, 2.0),
            vec![0.0, 1.0, 2.0],
            vec![2.0, 1.0, 2.0],
        )
        .unwrap();
        assert_eq!(g.min_on(0.5, 1.5), 1.0);
        assert_eq!(g.min_on(0.0, 0.5), 1.5);
    }

    #[test]
    fn graph_domain_requires_positive_profile() {
        let f = BoundaryFunction::step(iv(0.0, 2.0), vec![1.0], vec![1.0, 2.0], None).unwrap();
        assert!(build_graph_domain(f).is_ok());
        let bad =
            BoundaryFunction::step(iv(0.0, 2.0), vec![1.0], vec![1.0, 0.0], None).unwrap();
        assert!(matches!(
            build_graph_domain(bad),
            Err(DomainError::NonPositive { .. })
        ));
        // Positive pieces but a zero stored value at the jump also fails.
        let bad2 = BoundaryFunction::step(
            iv(0.0, 2.0),
            vec![1.0],
            vec![1.0, 2.0],
            Some(vec![0.0]),
        )
        .unwrap();
        assert!(matches!(
            build_graph_domain(bad2),
            Err(DomainError::NonPositive { .. })
        ));
    }

    #[test]
    fn scale_vertical_scales_area_linearly() {
        let f = BoundaryFunction::step(iv(0.0, 2.0), vec![1.0], vec![1.0, 2.0], None).unwrap();
        let d = build_graph_domain(f).unwrap();
        let d2 = scale_vertical(&d, 0.25).unwrap();
        assert!((d2.area() - 0.25 * d.area()).abs() < 1e-15);
        assert_eq!(d2.min_height(), 0.25);
    }

    #[test]
    fn quadruple_ordering_and_side_tags() {
        let f = BoundaryFunction::step(iv(0.0, 2.0), vec![1.0], vec![1.0, 2.0], None).unwrap();
        let d = build_graph_domain(f).unwrap();
        // Full arcs are always valid.
        let q = BoundaryQuadruple::full_arcs(&d);
        assert_eq!(overlap_interval(&q).unwrap(), iv(0.0, 2.0));
        // Valid: source on the left half of the bottom, sink above it.
        BoundaryQuadruple::new(
            &d,
            PrimeEnd::bottom(0.0),
            PrimeEnd::bottom(1.0),
            PrimeEnd::top(1.0),
            PrimeEnd::top(0.0),
        )
        .unwrap();
        // Wrong order on the bottom.
        assert!(BoundaryQuadruple::new(
            &d,
            PrimeEnd::bottom(1.0),
            PrimeEnd::bottom(0.0),
            PrimeEnd::top(2.0),
            PrimeEnd::top(0.0),
        )
        .is_err());
        // Side tag requires an actual jump at that x.
        assert!(BoundaryQuadruple::new(
            &d,
            PrimeEnd::bottom(0.0),
            PrimeEnd::bottom(2.0),
            PrimeEnd {
                x: 0.5,
                edge: Edge::Top,
                side: Side::Left,
            },
            PrimeEnd::top(0.0),
        )
        .is_err());
        // Side tags at the jump x = 1 are accepted, and coincident top ends
        // with distinct faces form a valid (empty-overlap) sink arc.
        let wall = BoundaryQuadruple::new(
            &d,
            PrimeEnd::bottom(0.0),
            PrimeEnd::bottom(2.0),
            PrimeEnd {
                x: 1.0,
                edge: Edge::Top,
                side: Side::Right,
            },
            PrimeEnd {
                x: 1.0,
                edge: Edge::Top,
                side: Side::Left,
            },
        )
        .unwrap();
        assert!(overlap_interval(&wall).is_none());
        // Bottom prime ends never carry side tags.
        assert!(BoundaryQuadruple::new(
            &d,
            PrimeEnd {
                x: 0.0,
                edge: Edge::Bottom,
                side: Side::Left,
            },
            PrimeEnd::bottom(2.0),
            PrimeEnd::top(2.0),
            PrimeEnd::top(0.0),
        )
        .is_err());
    }

    #[test]
    fn overlap_interval_cases() {
        let f = BoundaryFunction::constant(iv(0.0, 4.0), 1.0).unwrap();
        let d = build_graph_domain(f).unwrap();
        // Disjoint x-ranges: source [0,1], sink over [2,3].
        let q = BoundaryQuadruple::new(
            &d,
            PrimeEnd::bottom(0.0),
            PrimeEnd::bottom(1.0),
            PrimeEnd::top(3.0),
            PrimeEnd::top(2.0),
        )
        .unwrap();
        assert!(overlap_interval(&q).is_none());
        // Partial overlap.
        let q2 = BoundaryQuadruple::new(
            &d,
            PrimeEnd::bottom(0.0),
            PrimeEnd::bottom(3.0),
            PrimeEnd::top(4.0),
            PrimeEnd::top(2.0),
        )
        .unwrap();
        let ov = overlap_interval(&q2).unwrap();
        assert_eq!((ov.lo(), ov.hi()), (2.0, 3.0));
    }

    #[test]
    fn strip_requires_usc_lower_and_positive_gap() {
        let f = BoundaryFunction::constant(iv(0.0, 2.0), 2.0).unwrap();
        let g = BoundaryFunction::constant(iv(0.0, 2.0), 1.0).unwrap();
        let s = StripDomain::new(f.clone(), g.clone()).unwrap();
        assert_eq!(s.gap(0.7), 1.0);
        // Lower step profile with the lsc-canonical stored value (the
        // minimum) is not usc.
        let g_bad =
            BoundaryFunction::step(iv(0.0, 2.0), vec![1.0], vec![0.5, 1.0], None).unwrap();
        assert!(matches!(
            StripDomain::new(f.clone(), g_bad),
            Err(DomainError::NotUsc { .. })
        ));
        // With the usc-canonical stored value (the maximum) it is accepted.
        let g_ok = BoundaryFunction::step(
            iv(0.0, 2.0),
            vec![1.0],
            vec![0.5, 1.0],
            Some(vec![1.0]),
        )
        .unwrap();
        StripDomain::new(f.clone(), g_ok).unwrap();
        // Touching profiles are degenerate.
        let g_touch = BoundaryFunction::piecewise_linear(
            iv(0.0, 2.0),
            vec![0.0, 1.0, 2.0],
            vec![1.0, 2.0, 1.0],
        )
        .unwrap();
        assert!(matches!(
            StripDomain::new(f.clone(), g_touch),
            Err(DomainError::DegenerateStrip { .. })
        ));
        // Mismatched intervals.
        let g_short = BoundaryFunction::constant(iv(0.0, 1.0), 1.0).unwrap();
        assert!(matches!(
            StripDomain::new(f, g_short),
            Err(DomainError::MismatchedIntervals { .. })
        ));
        drop(g);
    }

    #[test]
    fn json_round_trip_step() {
        let text = r#"{"kind": "step", "interval": [0.0, 2.0],
                        "breakpoints": [1.0], "values": [1.0, 2.0]}"#;
        let f = boundary_from_json(text).unwrap();
        assert_eq!(f.kind(), ProfileKind::Step);
        assert_eq!(f.value(0.5), 1.0);
        assert_eq!(f.value(1.5), 2.0);
        let back = boundary_from_json(&boundary_to_json(&f)).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn json_round_trip_scaled_profile_bakes_scale_into_values() {
        let f = boundary_from_json(
            r#"{"kind": "piecewise_linear", "interval": [0.0, 1.0],
                "breakpoints": [0.0, 1.0], "values": [1.0, 2.0]}"#,
        )
        .unwrap()
        .scaled(0.5)
        .unwrap();
        let back = boundary_from_json(&boundary_to_json(&f)).unwrap();
        assert_eq!(back.value(0.0), 0.5);
        assert_eq!(back.value(1.0), 1.0);
        assert_eq!(back.yscale(), 1.0); // scale was multiplied out on export
    }

    #[test]
    fn json_rejects_malformed_specs() {
        assert!(boundary_from_json("{").is_err());
        assert!(boundary_from_json(r#"{"kind": "spline", "interval": [0, 1], "values": [1]}"#)
            .is_err());
        assert!(boundary_from_json(
            r#"{"kind": "step", "interval": [1.0, 0.0], "values": [1.0]}"#
        )
        .is_err());
        assert!(boundary_from_json(
            r#"{"kind": "step", "interval": [0.0, 1.0], "breakpoints": [0.5], "values": [1.0]}"#
        )
        .is_err());
    }

    #[test]
    fn spans_and_kinks() {
        let f = BoundaryFunction::step(iv(0.0, 2.0), vec![1.0], vec![1.0, 2.0], None)
            .unwrap()
            .scaled(2.0)
            .unwrap();
        let spans = f.spans_in(0.5, 1.5);
        assert_eq!(spans.len(), 2);
        assert_eq!((spans[0].x0, spans[0].x1, spans[0].y0), (0.5, 1.0, 2.0));
        assert_eq!((spans[1].x0, spans[1].x1, spans[1].y0), (1.0, 1.5, 4.0));
        assert_eq!(f.kinks_in(0.0, 2.0), vec![1.0]);
        let jumps = f.jumps();
        assert_eq!(jumps.len(), 1);
        assert_eq!((jumps[0].left, jumps[0].right, jumps[0].stored), (2.0, 4.0, 2.0));
    }
}
