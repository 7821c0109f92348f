//! Closed-form conformal moduli: the Grötzsch ring function via
//! arithmetic-geometric-mean (AGM) elliptic integrals, cross-ratio masses on
//! the circle and the half-plane, and Möbius normalization of circle
//! quadruples to half-plane triples.
//!
//! Conventions.  A half-plane quadrilateral has vertices
//! `w1 < w2 < w3 < ∞` on the real line; its modulus is the modulus of the
//! curve family connecting the boundary arc `[w1, w2]` to the arc
//! `[w3, +∞]` inside the upper half-plane, and equals
//! `(2/π)·μ(√((w3 − w2)/(w3 − w1)))` where `μ` is the Grötzsch ring
//! function.  The *mass* of the quadruple is the logarithm of the associated
//! cross-ratio; as the arcs separate (`w2 → w3`) the modulus grows like
//! `mass/π + (2/π)·ln 4`, and the *defect* is the difference between the
//! modulus and that two-term approximation.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("argument out of range for {what}: {value} (require {requires})")]
    OutOfRange {
        what: &'static str,
        value: f64,
        requires: &'static str,
    },
    #[error("degenerate quadruple: {reason}")]
    DegenerateQuadruple { reason: String },
    #[error("invalid half-plane triple ({w1}, {w2}, {w3}): require w1 < w2 < w3, all finite")]
    InvalidTriple { w1: f64, w2: f64, w3: f64 },
}

/// Below this argument `μ(r)` is evaluated by its asymptotic expansion
/// `ln(4/r)`; the switch point is chosen where the dropped `r²/4` term is
/// far below double-precision resolution of the value (~3·10⁻¹⁷ relative).
pub const MU_ASYMPTOTIC_THRESHOLD: f64 = 1e-8;

/// Arithmetic-geometric mean of two positive numbers.
fn agm(mut a: f64, mut b: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    for _ in 0..64 {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        if (an - bn).abs() <= 4.0 * f64::EPSILON * an {
            return 0.5 * (an + bn);
        }
        a = an;
        b = bn;
    }
    0.5 * (a + b)
}

/// The Grötzsch ring function
/// `μ(r) = (π/2)·AGM(1, √(1−r²)) / AGM(1, r)` for `r ∈ (0, 1)`:
/// the modulus of the ring domain between the unit circle and the radial
/// slit `[0, r]`.  For `r < MU_ASYMPTOTIC_THRESHOLD` the asymptotic branch
/// `ln(4/r)` is used; the two branches agree to full double precision at
/// the seam.
pub fn grotzsch_mu(r: f64) -> Result<f64, AnalyticError> {
    if !r.is_finite() || !(0.0 < r && r < 1.0) {
        return Err(AnalyticError::OutOfRange {
            what: "grotzsch_mu",
            value: r,
            requires: "0 < r < 1",
        });
    }
    if r < MU_ASYMPTOTIC_THRESHOLD {
        return Ok((4.0 / r).ln());
    }
    // (1−r)(1+r) evaluates 1−r² without cancellation near r = 1.
    let r_comp = ((1.0 - r) * (1.0 + r)).sqrt();
    Ok(std::f64::consts::FRAC_PI_2 * agm(1.0, r_comp) / agm(1.0, r))
}

/// Modulus of the half-plane quadrilateral with vertices
/// `(w1, w2, w3, ∞)`: the modulus of the family connecting `[w1, w2]` to
/// `[w3, ∞]` in the upper half-plane.
pub fn quad_modulus(t: &HalfPlaneTriple) -> f64 {
    let r2 = (t.w3 - t.w2) / (t.w3 - t.w1);
    // 0 < r² < 1 is guaranteed by the triple's ordering invariant.
    let r = r2.sqrt();
    std::f64::consts::FRAC_2_PI
        * grotzsch_mu(r).expect("r in (0,1) by the triple ordering invariant")
}

/// Three finite, increasing real boundary points; the fourth vertex of the
/// associated half-plane quadrilateral is fixed at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlaneTriple {
    w1: f64,
    w2: f64,
    w3: f64,
}

impl HalfPlaneTriple {
    pub fn new(w1: f64, w2: f64, w3: f64) -> Result<Self, AnalyticError> {
        if !(w1.is_finite() && w2.is_finite() && w3.is_finite()) || !(w1 < w2 && w2 < w3) {
            return Err(AnalyticError::InvalidTriple { w1, w2, w3 });
        }
        Ok(HalfPlaneTriple { w1, w2, w3 })
    }

    pub fn w1(&self) -> f64 {
        self.w1
    }

    pub fn w2(&self) -> f64 {
        self.w2
    }

    pub fn w3(&self) -> f64 {
        self.w3
    }

    /// The conjugate triple: images of `(w2, w3, ∞)` under
    /// `w ↦ −1/(w − w1)`, which swaps the roles of the two marked arcs.
    /// The product of the moduli of a triple and its conjugate is 1.
    pub fn conjugate(&self) -> HalfPlaneTriple {
        let p = -1.0 / (self.w2 - self.w1);
        let q = -1.0 / (self.w3 - self.w1);
        HalfPlaneTriple {
            w1: p,
            w2: q,
            w3: 0.0,
        }
    }
}

/// Mass of the half-plane triple: `ln((w3 − w1)/(w3 − w2))`, the logarithm
/// of the cross-ratio of `(w1, w2, w3, ∞)`.  Grows without bound as the
/// arcs `[w1, w2]` and `[w3, ∞]` separate conformally.
pub fn liouville_mass_halfplane(t: &HalfPlaneTriple) -> f64 {
    ((t.w3 - t.w1) / (t.w3 - t.w2)).ln()
}

/// Four distinct points on the unit circle in strict counterclockwise
/// order, stored as angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleQuadruple {
    angles: [f64; 4],
}

const MIN_ANGLE_SEPARATION: f64 = 1e-12;

impl CircleQuadruple {
    /// Angles in radians; each is reduced modulo 2π.  After placing the
    /// first angle, the remaining three must follow in strict
    /// counterclockwise order, with every consecutive gap (including the
    /// wrap-around back to the first point) at least `1e-12`.
    pub fn new(angles: [f64; 4]) -> Result<Self, AnalyticError> {
        for (i, &a) in angles.iter().enumerate() {
            if !a.is_finite() {
                return Err(AnalyticError::DegenerateQuadruple {
                    reason: format!("angle {i} is not finite"),
                });
            }
        }
        let tau = std::f64::consts::TAU;
        let reduce = |a: f64| a.rem_euclid(tau);
        let base = reduce(angles[0]);
        // Gaps from the first point, cumulative around the circle.
        let rel: Vec<f64> = angles[1..]
            .iter()
            .map(|&a| {
                let mut d = reduce(a) - base;
                if d < 0.0 {
                    d += tau;
                }
                d
            })
            .collect();
        let mut prev = 0.0;
        for (i, &d) in rel.iter().enumerate() {
            if d - prev < MIN_ANGLE_SEPARATION {
                return Err(AnalyticError::DegenerateQuadruple {
                    reason: format!(
                        "points {} and {} are not in strict counterclockwise order \
                         (angular gap {:.3e})",
                        i,
                        i + 1,
                        d - prev
                    ),
                });
            }
            prev = d;
        }
        if tau - prev < MIN_ANGLE_SEPARATION {
            return Err(AnalyticError::DegenerateQuadruple {
                reason: format!(
                    "points 3 and 0 are not separated (angular gap {:.3e})",
                    tau - prev
                ),
            });
        }
        Ok(CircleQuadruple { angles })
    }

    pub fn angles(&self) -> [f64; 4] {
        self.angles
    }

    pub fn points(&self) -> [Complex64; 4] {
        self.angles.map(|a| Complex64::new(a.cos(), a.sin()))
    }
}

/// Mass of a circle quadruple `(a, b, c, d)`: the logarithm of the real
/// cross-ratio `((a−c)(b−d)) / ((a−d)(b−c))`, which is > 1 for points in
/// counterclockwise order marking the arcs `ab` and `cd`.
pub fn liouville_mass_circle(q: &CircleQuadruple) -> f64 {
    let [a, b, c, d] = q.points();
    let cr = ((a - c) * (b - d)) / ((a - d) * (b - c));
    debug_assert!(
        cr.im.abs() <= 1e-9 * cr.re.abs().max(1.0),
        "cross-ratio of concircular points must be real, got {cr}"
    );
    debug_assert!(cr.re > 1.0);
    cr.re.ln()
}

/// Möbius-normalize a circle quadruple `(a, b, c, d)` to the half-plane
/// triple `(0, 1, t)` with `t > 1`: `a ↦ 0`, `b ↦ 1`, `d ↦ ∞`, and `c ↦ t`.
/// The map preserves cross-ratios, hence masses and moduli.
pub fn normalize_to_halfplane(q: &CircleQuadruple) -> Result<HalfPlaneTriple, AnalyticError> {
    let [a, b, c, d] = q.points();
    // S(z) = ((z − a)(b − d)) / ((z − d)(b − a)) sends a→0, b→1, d→∞.
    let t = ((c - a) * (b - d)) / ((c - d) * (b - a));
    if t.im.abs() > 1e-9 * t.re.abs().max(1.0) {
        return Err(AnalyticError::DegenerateQuadruple {
            reason: format!("normalized third point is not real: {t}"),
        });
    }
    if !(t.re > 1.0) {
        return Err(AnalyticError::DegenerateQuadruple {
            reason: format!(
                "normalized third point t = {} must exceed 1; quadruple is not in \
                 counterclockwise order",
                t.re
            ),
        });
    }
    HalfPlaneTriple::new(0.0, 1.0, t.re)
}

/// Two-term large-mass approximation of the quadrilateral modulus:
/// `mass/π + (2/π)·ln 4`.
pub fn asymptotic_modulus(mass: f64) -> f64 {
    mass / std::f64::consts::PI + std::f64::consts::FRAC_2_PI * 4.0f64.ln()
}

/// Defect of the two-term approximation: `quad_modulus − asymptotic_modulus`.
/// Tends to 0 (like the square of the gap) as the arcs separate.
pub fn asymptotic_defect(t: &HalfPlaneTriple) -> f64 {
    quad_modulus(t) - asymptotic_modulus(liouville_mass_halfplane(t))
}
