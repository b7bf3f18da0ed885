//! Ambit-set geometry.
//!
//! The ambit sets supported by the engine are compact planar sets with
//! piecewise-C¹ boundaries: disks, annuli, convex polygons (counter-
//! clockwise), and differences "outer minus holes".  Everything downstream —
//! flux plans, characteristic-function oracles, parallel-set areas — reduces
//! to a handful of exact geometric primitives implemented here:
//!
//! * signed distance to the set and distance to its boundary,
//! * boundary components with outward normals (outward *with respect to the
//!   set*, so hole boundaries point into the hole),
//! * exact parallel-set (collar) areas with explicit validity radii,
//! * quadrature node sets covering the eroded interior and the collar,
//! * intersection angles of an arbitrary circle with the boundary.

use crate::quad::GaussLegendre;
use crate::vec2::Vec2;
use crate::{AmbitError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// A compact ambit set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AmbitSet {
    Disk {
        center: Vec2,
        radius: f64,
    },
    Annulus {
        center: Vec2,
        inner: f64,
        outer: f64,
    },
    /// Convex polygon, vertices in counter-clockwise order.
    Polygon { vertices: Vec<Vec2> },
    /// Set difference `outer \ (hole₁ ∪ hole₂ ∪ ...)`.
    ///
    /// Holes must be disks or convex polygons, strictly inside the outer
    /// set and pairwise disjoint.
    Difference {
        outer: Box<AmbitSet>,
        holes: Vec<AmbitSet>,
    },
}

/// One connected boundary curve of an ambit set.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryComponent {
    Circle {
        center: Vec2,
        radius: f64,
        /// Whether the set lies *outside* this circle (hole / inner ring).
        hole: bool,
    },
    Loop {
        /// Counter-clockwise vertices.
        vertices: Vec<Vec2>,
        hole: bool,
    },
}

/// A small boundary patch produced by [`AmbitSet::discretize_boundary`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryElement {
    /// Midpoint of the patch.
    pub point: Vec2,
    /// Outward unit normal of the set at the midpoint.
    pub normal: Vec2,
    /// Arc length of the patch.
    pub length: f64,
}

/// Per-component regularity report: reach of the boundary curve and corner
/// locations (where the normal is discontinuous and the reach degenerates).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReachReport {
    pub components: Vec<ComponentReach>,
    /// True when every component has strictly positive reach (no corners).
    pub positive_reach: bool,
    /// Minimum reach over components (0 when corners are present).
    pub min_reach: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentReach {
    pub description: String,
    pub reach: f64,
    pub corners: Vec<Vec2>,
}

impl BoundaryComponent {
    pub fn length(&self) -> f64 {
        match self {
            BoundaryComponent::Circle { radius, .. } => TAU * radius,
            BoundaryComponent::Loop { vertices, .. } => polygon_perimeter(vertices),
        }
    }

    fn describe(&self, index: usize) -> String {
        match self {
            BoundaryComponent::Circle { radius, hole, .. } => format!(
                "component {index}: circle of radius {radius}{}",
                if *hole { " (hole)" } else { "" }
            ),
            BoundaryComponent::Loop { vertices, hole } => format!(
                "component {index}: polygon loop with {} vertices{}",
                vertices.len(),
                if *hole { " (hole)" } else { "" }
            ),
        }
    }

    /// Split the component into patches no longer than `max_len`, never
    /// spanning a corner.
    pub fn elements(&self, max_len: f64) -> Vec<BoundaryElement> {
        let mut out = Vec::new();
        match self {
            BoundaryComponent::Circle { center, radius, hole } => {
                let n = (TAU * radius / max_len).ceil().max(4.0) as usize;
                let dt = TAU / n as f64;
                for k in 0..n {
                    let t = (k as f64 + 0.5) * dt;
                    let u = Vec2::unit(t);
                    let normal = if *hole { -u } else { u };
                    out.push(BoundaryElement {
                        point: *center + u * *radius,
                        normal,
                        length: radius * dt,
                    });
                }
            }
            BoundaryComponent::Loop { vertices, hole } => {
                let m = vertices.len();
                for i in 0..m {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % m];
                    let len = (b - a).norm();
                    let t = (b - a) * (1.0 / len);
                    // ccw loop: outward normal is the tangent rotated -90°.
                    let mut normal = Vec2::new(t.y, -t.x);
                    if *hole {
                        normal = -normal;
                    }
                    let n = (len / max_len).ceil().max(1.0) as usize;
                    for k in 0..n {
                        let s = (k as f64 + 0.5) / n as f64;
                        out.push(BoundaryElement {
                            point: a + t * (s * len),
                            normal,
                            length: len / n as f64,
                        });
                    }
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Polygon primitives.
// ---------------------------------------------------------------------------

fn polygon_area(vertices: &[Vec2]) -> f64 {
    let m = vertices.len();
    let mut acc = 0.0;
    for i in 0..m {
        acc += vertices[i].cross(vertices[(i + 1) % m]);
    }
    0.5 * acc
}

fn polygon_perimeter(vertices: &[Vec2]) -> f64 {
    let m = vertices.len();
    (0..m).map(|i| (vertices[(i + 1) % m] - vertices[i]).norm()).sum()
}

/// Signed distance to a convex ccw polygon: negative inside.
fn polygon_signed_distance(vertices: &[Vec2], q: Vec2) -> f64 {
    let m = vertices.len();
    let mut max_halfplane = f64::NEG_INFINITY;
    for i in 0..m {
        let a = vertices[i];
        let b = vertices[(i + 1) % m];
        let t = (b - a).normalized();
        let n = Vec2::new(t.y, -t.x);
        max_halfplane = max_halfplane.max(n.dot(q - a));
    }
    if max_halfplane <= 0.0 {
        // Inside: the half-plane bound is exact for convex sets.
        max_halfplane
    } else {
        // Outside: exact distance is to the nearest edge segment.
        let mut d = f64::INFINITY;
        for i in 0..m {
            d = d.min(point_segment_distance(q, vertices[i], vertices[(i + 1) % m]));
        }
        d
    }
}

pub(crate) fn point_segment_distance(q: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let t = ((q - a).dot(ab) / ab.norm_sq()).clamp(0.0, 1.0);
    (q - (a + ab * t)).norm()
}

fn segment_segment_distance(a1: Vec2, b1: Vec2, a2: Vec2, b2: Vec2) -> f64 {
    // Convex components never interpenetrate in validated sets, so the
    // endpoint/project candidates cover the minimum.
    let mut d = f64::INFINITY;
    d = d.min(point_segment_distance(a1, a2, b2));
    d = d.min(point_segment_distance(b1, a2, b2));
    d = d.min(point_segment_distance(a2, a1, b1));
    d = d.min(point_segment_distance(b2, a1, b1));
    d
}

/// Range of distances from point `c` to segment [a, b].
fn segment_distance_range(c: Vec2, a: Vec2, b: Vec2) -> (f64, f64) {
    let dmin = point_segment_distance(c, a, b);
    let dmax = (a - c).norm().max((b - c).norm());
    (dmin, dmax)
}

/// Distance between two boundary curves.
fn component_distance(a: &BoundaryComponent, b: &BoundaryComponent) -> f64 {
    match (a, b) {
        (
            BoundaryComponent::Circle { center: c1, radius: r1, .. },
            BoundaryComponent::Circle { center: c2, radius: r2, .. },
        ) => {
            let d = (*c1 - *c2).norm();
            if d >= r1 + r2 {
                d - r1 - r2
            } else if *r1 >= d + r2 {
                r1 - d - r2
            } else if *r2 >= d + r1 {
                r2 - d - r1
            } else {
                0.0
            }
        }
        (
            BoundaryComponent::Circle { center, radius, .. },
            BoundaryComponent::Loop { vertices, .. },
        )
        | (
            BoundaryComponent::Loop { vertices, .. },
            BoundaryComponent::Circle { center, radius, .. },
        ) => {
            let m = vertices.len();
            let mut best = f64::INFINITY;
            for i in 0..m {
                let (dmin, dmax) = segment_distance_range(*center, vertices[i], vertices[(i + 1) % m]);
                let d = if *radius >= dmin && *radius <= dmax {
                    0.0
                } else {
                    (dmin - radius).abs().min((dmax - radius).abs())
                };
                best = best.min(d);
            }
            best
        }
        (
            BoundaryComponent::Loop { vertices: v1, .. },
            BoundaryComponent::Loop { vertices: v2, .. },
        ) => {
            let (m1, m2) = (v1.len(), v2.len());
            let mut best = f64::INFINITY;
            for i in 0..m1 {
                for j in 0..m2 {
                    best = best.min(segment_segment_distance(
                        v1[i],
                        v1[(i + 1) % m1],
                        v2[j],
                        v2[(j + 1) % m2],
                    ));
                }
            }
            best
        }
    }
}

/// Sutherland–Hodgman clip of a convex polygon against `n·q ≤ offset`.
fn clip_halfplane(poly: &[Vec2], n: Vec2, offset: f64) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let m = poly.len();
    for i in 0..m {
        let a = poly[i];
        let b = poly[(i + 1) % m];
        let da = n.dot(a) - offset;
        let db = n.dot(b) - offset;
        if da <= 0.0 {
            out.push(a);
            if db > 0.0 {
                out.push(a + (b - a) * (da / (da - db)));
            }
        } else if db <= 0.0 {
            out.push(a + (b - a) * (da / (da - db)));
        }
    }
    out
}

/// Erode a convex ccw polygon by `r` (exact for convex polygons).
pub fn inset_polygon(vertices: &[Vec2], r: f64) -> Vec<Vec2> {
    let mut poly = vertices.to_vec();
    let m = vertices.len();
    for i in 0..m {
        if poly.len() < 3 {
            return Vec::new();
        }
        let a = vertices[i];
        let b = vertices[(i + 1) % m];
        let t = (b - a).normalized();
        let n = Vec2::new(t.y, -t.x);
        poly = clip_halfplane(&poly, n, n.dot(a) - r);
    }
    if poly.len() < 3 || polygon_area(&poly) <= 0.0 {
        Vec::new()
    } else {
        poly
    }
}

fn polygon_inradius(vertices: &[Vec2]) -> f64 {
    // Bisection on erosion non-emptiness; the inradius of a convex polygon
    // is the largest r with a non-empty inset.
    let (lo_init, hi_init) = (0.0, polygon_perimeter(vertices));
    let (mut lo, mut hi) = (lo_init, hi_init);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if inset_polygon(vertices, mid).is_empty() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

fn polygon_interior_angle(vertices: &[Vec2], i: usize) -> f64 {
    let m = vertices.len();
    let prev = vertices[(i + m - 1) % m];
    let v = vertices[i];
    let next = vertices[(i + 1) % m];
    let e_in = (v - prev).normalized();
    let e_out = (next - v).normalized();
    // Interior angle of a convex ccw polygon: π - turning angle.
    PI - e_in.cross(e_out).atan2(e_in.dot(e_out))
}

// ---------------------------------------------------------------------------
// AmbitSet API.
// ---------------------------------------------------------------------------

impl AmbitSet {
    pub fn disk(center: Vec2, radius: f64) -> Self {
        AmbitSet::Disk { center, radius }
    }

    pub fn annulus(center: Vec2, inner: f64, outer: f64) -> Self {
        AmbitSet::Annulus { center, inner, outer }
    }

    pub fn polygon(vertices: Vec<Vec2>) -> Self {
        AmbitSet::Polygon { vertices }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AmbitSet::Disk { radius, .. } => {
                if !(*radius > 0.0) {
                    return Err(AmbitError::Config("disk radius must be > 0".into()));
                }
            }
            AmbitSet::Annulus { inner, outer, .. } => {
                if !(*inner > 0.0 && outer > inner) {
                    return Err(AmbitError::Config(
                        "annulus needs 0 < inner < outer".into(),
                    ));
                }
            }
            AmbitSet::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(AmbitError::Config("polygon needs at least 3 vertices".into()));
                }
                if polygon_area(vertices) <= 0.0 {
                    return Err(AmbitError::Config(
                        "polygon vertices must be in counter-clockwise order with positive area"
                            .into(),
                    ));
                }
                let m = vertices.len();
                let scale = self.diameter();
                for i in 0..m {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % m];
                    let c = vertices[(i + 2) % m];
                    if (b - a).norm() < 1e-12 * scale {
                        return Err(AmbitError::Config(format!(
                            "polygon has (near-)duplicate vertices at index {i}"
                        )));
                    }
                    if (b - a).cross(c - b) < -1e-12 * scale * scale {
                        return Err(AmbitError::Config(format!(
                            "polygon is not convex at vertex index {}",
                            (i + 1) % m
                        )));
                    }
                }
            }
            AmbitSet::Difference { outer, holes } => {
                outer.validate()?;
                if matches!(**outer, AmbitSet::Difference { .. }) {
                    return Err(AmbitError::Config(
                        "nested differences are not supported; flatten the holes".into(),
                    ));
                }
                if holes.is_empty() {
                    return Err(AmbitError::Config(
                        "difference needs at least one hole (use the outer set directly)".into(),
                    ));
                }
                for (j, h) in holes.iter().enumerate() {
                    h.validate()?;
                    if !matches!(h, AmbitSet::Disk { .. } | AmbitSet::Polygon { .. }) {
                        return Err(AmbitError::Config(format!(
                            "hole {j} must be a disk or convex polygon"
                        )));
                    }
                    // Strictly inside: every point of the hole is interior
                    // to the outer set with positive boundary clearance.
                    let clearance = h
                        .boundary_components()
                        .iter()
                        .map(|hc| {
                            outer
                                .boundary_components()
                                .iter()
                                .map(|oc| component_distance(hc, oc))
                                .fold(f64::INFINITY, f64::min)
                        })
                        .fold(f64::INFINITY, f64::min);
                    let inside = h
                        .boundary_components()
                        .iter()
                        .flat_map(|hc| hc.elements(h.diameter() / 16.0))
                        .all(|e| outer.contains(e.point));
                    if !inside || clearance <= 0.0 {
                        return Err(AmbitError::Config(format!(
                            "hole {j} is not strictly inside the outer set \
                             (boundary clearance {clearance:.3e})"
                        )));
                    }
                }
                for j in 0..holes.len() {
                    for k in j + 1..holes.len() {
                        let (cj, ck) = (holes[j].boundary_components(), holes[k].boundary_components());
                        let d = cj
                            .iter()
                            .flat_map(|a| ck.iter().map(move |b| component_distance(a, b)))
                            .fold(f64::INFINITY, f64::min);
                        let overlapping = holes[j]
                            .boundary_components()
                            .iter()
                            .flat_map(|hc| hc.elements(holes[j].diameter() / 16.0))
                            .any(|e| holes[k].contains(e.point));
                        if d <= 0.0 || overlapping {
                            return Err(AmbitError::Config(format!(
                                "holes {j} and {k} are not disjoint (separation {d:.3e})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Closed-set membership (boundary points are contained).
    pub fn contains(&self, q: Vec2) -> bool {
        match self {
            AmbitSet::Disk { center, radius } => (q - *center).norm_sq() <= radius * radius,
            AmbitSet::Annulus { center, inner, outer } => {
                let d2 = (q - *center).norm_sq();
                d2 >= inner * inner && d2 <= outer * outer
            }
            AmbitSet::Polygon { vertices } => polygon_signed_distance(vertices, q) <= 0.0,
            AmbitSet::Difference { outer, holes } => {
                outer.contains(q) && holes.iter().all(|h| h.signed_distance(q) >= 0.0)
            }
        }
    }

    /// Signed distance: negative inside, positive outside, zero on `∂R`.
    pub fn signed_distance(&self, q: Vec2) -> f64 {
        match self {
            AmbitSet::Disk { center, radius } => (q - *center).norm() - radius,
            AmbitSet::Annulus { center, inner, outer } => {
                let d = (q - *center).norm();
                (inner - d).max(d - outer)
            }
            AmbitSet::Polygon { vertices } => polygon_signed_distance(vertices, q),
            AmbitSet::Difference { outer, holes } => {
                let mut sd = outer.signed_distance(q);
                for h in holes {
                    sd = sd.max(-h.signed_distance(q));
                }
                sd
            }
        }
    }

    /// Distance to the boundary `∂R` (unsigned).
    pub fn boundary_distance(&self, q: Vec2) -> f64 {
        self.signed_distance(q).abs()
    }

    pub fn area(&self) -> f64 {
        match self {
            AmbitSet::Disk { radius, .. } => PI * radius * radius,
            AmbitSet::Annulus { inner, outer, .. } => PI * (outer * outer - inner * inner),
            AmbitSet::Polygon { vertices } => polygon_area(vertices),
            AmbitSet::Difference { outer, holes } => {
                outer.area() - holes.iter().map(|h| h.area()).sum::<f64>()
            }
        }
    }

    /// Total boundary length `H¹(∂R)`, holes included.
    pub fn perimeter(&self) -> f64 {
        self.boundary_components().iter().map(|c| c.length()).sum()
    }

    /// Axis-aligned bounding box (min corner, max corner).
    pub fn bbox(&self) -> (Vec2, Vec2) {
        match self {
            AmbitSet::Disk { center, radius } => (
                *center - Vec2::new(*radius, *radius),
                *center + Vec2::new(*radius, *radius),
            ),
            AmbitSet::Annulus { center, outer, .. } => (
                *center - Vec2::new(*outer, *outer),
                *center + Vec2::new(*outer, *outer),
            ),
            AmbitSet::Polygon { vertices } => {
                let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for v in vertices {
                    lo = Vec2::new(lo.x.min(v.x), lo.y.min(v.y));
                    hi = Vec2::new(hi.x.max(v.x), hi.y.max(v.y));
                }
                (lo, hi)
            }
            AmbitSet::Difference { outer, .. } => outer.bbox(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            AmbitSet::Disk { radius, .. } => 2.0 * radius,
            AmbitSet::Annulus { outer, .. } => 2.0 * outer,
            AmbitSet::Polygon { vertices } => {
                let mut best = 0.0f64;
                for (i, a) in vertices.iter().enumerate() {
                    for b in &vertices[i + 1..] {
                        best = best.max((*a - *b).norm());
                    }
                }
                best
            }
            AmbitSet::Difference { outer, .. } => outer.diameter(),
        }
    }

    /// Boundary curves with hole orientation flags.
    pub fn boundary_components(&self) -> Vec<BoundaryComponent> {
        match self {
            AmbitSet::Disk { center, radius } => vec![BoundaryComponent::Circle {
                center: *center,
                radius: *radius,
                hole: false,
            }],
            AmbitSet::Annulus { center, inner, outer } => vec![
                BoundaryComponent::Circle { center: *center, radius: *outer, hole: false },
                BoundaryComponent::Circle { center: *center, radius: *inner, hole: true },
            ],
            AmbitSet::Polygon { vertices } => vec![BoundaryComponent::Loop {
                vertices: vertices.clone(),
                hole: false,
            }],
            AmbitSet::Difference { outer, holes } => {
                let mut comps = outer.boundary_components();
                for h in holes {
                    for c in h.boundary_components() {
                        comps.push(match c {
                            BoundaryComponent::Circle { center, radius, hole } => {
                                BoundaryComponent::Circle { center, radius, hole: !hole }
                            }
                            BoundaryComponent::Loop { vertices, hole } => {
                                BoundaryComponent::Loop { vertices, hole: !hole }
                            }
                        });
                    }
                }
                comps
            }
        }
    }

    /// Outward unit normal of the set at (or nearest to) `q`.
    ///
    /// Returns the zero vector where the normal is not defined: at polygon
    /// corners (within `tol` of arc length) and at component centers.
    pub fn outward_normal(&self, q: Vec2, tol: f64) -> Vec2 {
        // Locate the nearest boundary component.
        let comps = self.boundary_components();
        let mut best = (f64::INFINITY, Vec2::ZERO);
        for c in &comps {
            let (d, n) = match c {
                BoundaryComponent::Circle { center, radius, hole } => {
                    let v = q - *center;
                    let len = v.norm();
                    if len < tol.max(1e-300) {
                        ((len - radius).abs(), Vec2::ZERO)
                    } else {
                        let u = v * (1.0 / len);
                        ((len - radius).abs(), if *hole { -u } else { u })
                    }
                }
                BoundaryComponent::Loop { vertices, hole } => {
                    let m = vertices.len();
                    let mut bd = f64::INFINITY;
                    let mut bn = Vec2::ZERO;
                    for i in 0..m {
                        let a = vertices[i];
                        let b = vertices[(i + 1) % m];
                        let ab = b - a;
                        let len = ab.norm();
                        let t = ((q - a).dot(ab) / ab.norm_sq()).clamp(0.0, 1.0);
                        let d = (q - (a + ab * t)).norm();
                        if d < bd {
                            bd = d;
                            // Corner (projection at a vertex): undefined normal.
                            if t * len <= tol || (1.0 - t) * len <= tol {
                                bn = Vec2::ZERO;
                            } else {
                                let tu = ab * (1.0 / len);
                                let n = Vec2::new(tu.y, -tu.x);
                                bn = if *hole { -n } else { n };
                            }
                        }
                    }
                    (bd, bn)
                }
            };
            if d < best.0 {
                best = (d, n);
            }
        }
        best.1
    }

    /// Largest radius for which collar decompositions and the closed
    /// parallel-area formulas below are valid, together with a description
    /// of the limiting feature.
    pub fn validity_radius(&self) -> (f64, String) {
        match self {
            AmbitSet::Disk { radius, .. } => (*radius, "disk center".into()),
            AmbitSet::Annulus { inner, outer, .. } => {
                if *inner < (outer - inner) / 2.0 {
                    (*inner, "annulus center".into())
                } else {
                    ((outer - inner) / 2.0, "annulus ring width".into())
                }
            }
            AmbitSet::Polygon { vertices } => {
                (polygon_inradius(vertices), "polygon inradius".into())
            }
            AmbitSet::Difference { outer, holes } => {
                let mut best = outer.validity_radius();
                for (j, h) in holes.iter().enumerate() {
                    let hv = h.validity_radius();
                    if hv.0 < best.0 {
                        best = (hv.0, format!("hole {j} {}", hv.1));
                    }
                }
                // Collars of distinct components must not meet.
                let comps = self.boundary_components();
                for i in 0..comps.len() {
                    for j in i + 1..comps.len() {
                        // Skip the built-in annulus pair (already covered by
                        // ring width) only when both belong to the same
                        // annulus; distances still give the same bound.
                        let d = component_distance(&comps[i], &comps[j]) / 2.0;
                        if d < best.0 {
                            best = (
                                d,
                                format!(
                                    "separation between {} and {}",
                                    comps[i].describe(i),
                                    comps[j].describe(j)
                                ),
                            );
                        }
                    }
                }
                best
            }
        }
    }

    fn require_valid_radius(&self, r: f64) -> Result<()> {
        if !(r > 0.0) {
            return Err(AmbitError::Config("parallel radius must be > 0".into()));
        }
        let (v, what) = self.validity_radius();
        if r >= v {
            return Err(AmbitError::Config(format!(
                "radius {r} exceeds the validity radius {v:.6} of the set (limited by {what})"
            )));
        }
        Ok(())
    }

    /// Exact area of the parallel set `{q : d(q, ∂R) ≤ r}`.
    ///
    /// Closed forms: `4πRr` for a disk, `4π(a+b)r` for an annulus, and
    /// `Pr + πr² + (A - area(inset_r))` for a convex polygon (outer band
    /// plus exact eroded complement).  Components of a difference
    /// contribute additively while their collars stay disjoint.
    pub fn parallel_set_area(&self, r: f64) -> Result<f64> {
        self.validate()?;
        self.require_valid_radius(r)?;
        Ok(match self {
            AmbitSet::Disk { radius, .. } => 4.0 * PI * radius * r,
            AmbitSet::Annulus { inner, outer, .. } => 4.0 * PI * (inner + outer) * r,
            AmbitSet::Polygon { vertices } => {
                let outer_band = polygon_perimeter(vertices) * r + PI * r * r;
                let inset = inset_polygon(vertices, r);
                let inner_band = polygon_area(vertices) - polygon_area(&inset);
                outer_band + inner_band
            }
            AmbitSet::Difference { outer, holes } => {
                let mut total = outer.parallel_set_area(r)?;
                for h in holes {
                    total += h.parallel_set_area(r)?;
                }
                total
            }
        })
    }

    /// One-sided Minkowski content `lim_{r→0} |(∂R)_r| / (2r) = H¹(∂R)`,
    /// estimated from the parallel-set areas by Richardson extrapolation.
    pub fn minkowski_content(&self) -> Result<f64> {
        self.validate()?;
        let (v, _) = self.validity_radius();
        let r0 = 0.25 * v;
        let mut prev = self.parallel_set_area(r0)? / (2.0 * r0);
        let mut best = prev;
        for k in 1..=12 {
            let r = r0 * 0.5f64.powi(k);
            let cur = self.parallel_set_area(r)? / (2.0 * r);
            best = crate::quad::richardson_linear(prev, cur);
            prev = cur;
        }
        Ok(best)
    }

    /// Boundary patches of length at most `max_len` (outward normals).
    pub fn discretize_boundary(&self, max_len: f64) -> Vec<BoundaryElement> {
        self.boundary_components()
            .iter()
            .flat_map(|c| c.elements(max_len))
            .collect()
    }

    /// Reach and corner diagnostics per boundary component.
    pub fn reach_report(&self) -> ReachReport {
        let comps = self.boundary_components();
        let mut out = Vec::new();
        for (i, c) in comps.iter().enumerate() {
            match c {
                BoundaryComponent::Circle { radius, .. } => out.push(ComponentReach {
                    description: c.describe(i),
                    reach: *radius,
                    corners: Vec::new(),
                }),
                BoundaryComponent::Loop { vertices, .. } => out.push(ComponentReach {
                    description: c.describe(i),
                    reach: 0.0,
                    corners: vertices.clone(),
                }),
            }
        }
        let min_reach = out.iter().map(|c| c.reach).fold(f64::INFINITY, f64::min);
        ReachReport {
            positive_reach: out.iter().all(|c| c.reach > 0.0),
            min_reach: if min_reach.is_finite() { min_reach } else { 0.0 },
            components: out,
        }
    }

    /// Angles (sorted, in `[0, 2π)`) at which the circle of radius `rho`
    /// around `center` crosses `∂R`.
    pub fn circle_crossings(&self, center: Vec2, rho: f64, out: &mut Vec<f64>) {
        match self {
            AmbitSet::Disk { center: c, radius } => {
                circle_circle_crossings(center, rho, *c, *radius, out);
            }
            AmbitSet::Annulus { center: c, inner, outer } => {
                circle_circle_crossings(center, rho, *c, *outer, out);
                circle_circle_crossings(center, rho, *c, *inner, out);
            }
            AmbitSet::Polygon { vertices } => {
                let m = vertices.len();
                for i in 0..m {
                    circle_segment_crossings(center, rho, vertices[i], vertices[(i + 1) % m], out);
                }
            }
            AmbitSet::Difference { outer, holes } => {
                outer.circle_crossings(center, rho, out);
                for h in holes {
                    h.circle_crossings(center, rho, out);
                }
            }
        }
    }
}

fn circle_circle_crossings(center: Vec2, rho: f64, c2: Vec2, r2: f64, out: &mut Vec<f64>) {
    let d_vec = c2 - center;
    let d = d_vec.norm();
    if d <= 1e-300 {
        return; // concentric: either no crossing or degenerate overlap
    }
    // Crossing exists iff |d - r2| < rho < d + r2.
    let cos_t = (d * d + rho * rho - r2 * r2) / (2.0 * d * rho);
    if cos_t.abs() >= 1.0 {
        return;
    }
    let base = d_vec.angle();
    let t = cos_t.acos();
    out.push(normalize_angle(base + t));
    out.push(normalize_angle(base - t));
}

fn circle_segment_crossings(center: Vec2, rho: f64, a: Vec2, b: Vec2, out: &mut Vec<f64>) {
    // Solve |a + t(b-a) - center|² = rho² for t in [0, 1].
    let d = b - a;
    let f = a - center;
    let qa = d.norm_sq();
    let qb = 2.0 * f.dot(d);
    let qc = f.norm_sq() - rho * rho;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= 0.0 || qa <= 0.0 {
        return;
    }
    let sq = disc.sqrt();
    for t in [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)] {
        if (0.0..=1.0).contains(&t) {
            let p = a + d * t;
            out.push(normalize_angle((p - center).angle()));
        }
    }
}

pub(crate) fn normalize_angle(t: f64) -> f64 {
    let mut t = t % TAU;
    if t < 0.0 {
        t += TAU;
    }
    t
}

// ---------------------------------------------------------------------------
// Quadrature node sets over eroded interiors and collars.
// ---------------------------------------------------------------------------

/// Positively or negatively weighted quadrature node in the plane.
#[derive(Debug, Clone, Copy)]
pub struct AreaNode {
    pub q: Vec2,
    pub w: f64,
}

/// Quadrature nodes covering the eroded interior `R ⊖ r = {q ∈ R : d(q, ∂R) ≥ r}`,
/// exact region algebra (difference holes enter with negative weights over
/// their dilations).
///
/// `n_rad`/`n_ang` control the per-component resolution.
pub fn interior_quadrature(
    set: &AmbitSet,
    r: f64,
    n_rad: usize,
    n_ang: usize,
) -> Result<Vec<AreaNode>> {
    set.validate()?;
    set.require_valid_radius(r)?;
    let mut nodes = Vec::new();
    push_interior_nodes(set, r, n_rad, n_ang, 1.0, &mut nodes)?;
    Ok(nodes)
}

fn push_interior_nodes(
    set: &AmbitSet,
    r: f64,
    n_rad: usize,
    n_ang: usize,
    sign: f64,
    nodes: &mut Vec<AreaNode>,
) -> Result<()> {
    let gl = GaussLegendre::new(n_rad);
    match set {
        AmbitSet::Disk { center, radius } => {
            polar_nodes(*center, 0.0, radius - r, &gl, n_ang, sign, nodes);
        }
        AmbitSet::Annulus { center, inner, outer } => {
            polar_nodes(*center, inner + r, outer - r, &gl, n_ang, sign, nodes);
        }
        AmbitSet::Polygon { vertices } => {
            let inset = inset_polygon(vertices, r);
            if !inset.is_empty() {
                fan_triangulation_nodes(&inset, &gl, sign, nodes);
            }
        }
        AmbitSet::Difference { outer, holes } => {
            push_interior_nodes(outer, r, n_rad, n_ang, sign, nodes)?;
            for h in holes {
                push_dilation_nodes(h, r, n_rad, n_ang, -sign, nodes);
            }
        }
    }
    Ok(())
}

/// Nodes covering the dilation `H ⊕ r` of a disk or convex polygon.
fn push_dilation_nodes(
    hole: &AmbitSet,
    r: f64,
    n_rad: usize,
    n_ang: usize,
    sign: f64,
    nodes: &mut Vec<AreaNode>,
) {
    let gl = GaussLegendre::new(n_rad);
    match hole {
        AmbitSet::Disk { center, radius } => {
            polar_nodes(*center, 0.0, radius + r, &gl, n_ang, sign, nodes);
        }
        AmbitSet::Polygon { vertices } => {
            // Polygon + edge rectangles + vertex wedges (exact dilation).
            fan_triangulation_nodes(vertices, &gl, sign, nodes);
            let m = vertices.len();
            for i in 0..m {
                let a = vertices[i];
                let b = vertices[(i + 1) % m];
                let len = (b - a).norm();
                let t = (b - a) * (1.0 / len);
                let n = Vec2::new(t.y, -t.x);
                // Edge rectangle [0,len]×(0,r].
                let n_t = ((n_ang as f64 * len / polygon_perimeter(vertices)).ceil() as usize).max(2);
                for (x, wx) in gl_line(&gl, 0.0, len, n_t) {
                    for (s, ws) in gl.nodes_on(0.0, r) {
                        nodes.push(AreaNode { q: a + t * x + n * s, w: sign * wx * ws });
                    }
                }
                // Vertex wedge at b: polar fan between this edge normal and
                // the next edge normal.
                let c = vertices[(i + 2) % m];
                let t2 = (c - b).normalized();
                let n2 = Vec2::new(t2.y, -t2.x);
                let a0 = n.angle();
                let mut a1 = n2.angle();
                while a1 < a0 {
                    a1 += TAU;
                }
                let wedge = GaussLegendre::new(8);
                for (ang, wa) in wedge.nodes_on(a0, a1) {
                    for (rho, wr) in gl.nodes_on(0.0, r) {
                        nodes.push(AreaNode {
                            q: b + Vec2::unit(ang) * rho,
                            w: sign * wa * wr * rho,
                        });
                    }
                }
            }
        }
        _ => unreachable!("holes are validated to be disks or polygons"),
    }
}

fn polar_nodes(
    center: Vec2,
    rho_lo: f64,
    rho_hi: f64,
    gl: &GaussLegendre,
    n_ang: usize,
    sign: f64,
    nodes: &mut Vec<AreaNode>,
) {
    if rho_hi <= rho_lo {
        return;
    }
    let dt = TAU / n_ang as f64;
    for k in 0..n_ang {
        let ang = (k as f64 + 0.5) * dt;
        let u = Vec2::unit(ang);
        for (rho, w) in gl.nodes_on(rho_lo, rho_hi) {
            nodes.push(AreaNode { q: center + u * rho, w: sign * w * rho * dt });
        }
    }
}

/// Tensor Gauss nodes over a convex polygon by fan triangulation from the
/// centroid.
fn fan_triangulation_nodes(
    vertices: &[Vec2],
    gl: &GaussLegendre,
    sign: f64,
    nodes: &mut Vec<AreaNode>,
) {
    let m = vertices.len();
    let centroid = vertices.iter().fold(Vec2::ZERO, |acc, &v| acc + v) * (1.0 / m as f64);
    for i in 0..m {
        let a = vertices[i];
        let b = vertices[(i + 1) % m];
        // Map (u, v) ∈ [0,1]² to the triangle (centroid, a, b) with the
        // standard degenerate (Duffy) transform; Jacobian = 2·Area·u.
        let area2 = (a - centroid).cross(b - centroid); // = 2·area, ccw positive
        for (u, wu) in gl.nodes_on(0.0, 1.0) {
            for (v, wv) in gl.nodes_on(0.0, 1.0) {
                let p = centroid + ((a - centroid) * (1.0 - v) + (b - centroid) * v) * u;
                nodes.push(AreaNode { q: p, w: sign * wu * wv * area2 * u });
            }
        }
    }
}

fn gl_line(gl: &GaussLegendre, lo: f64, hi: f64, panels: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(panels * gl.len());
    for k in 0..panels {
        let a = lo + (hi - lo) * k as f64 / panels as f64;
        let b = lo + (hi - lo) * (k + 1) as f64 / panels as f64;
        out.extend(gl.nodes_on(a, b));
    }
    out
}

/// Quadrature nodes covering the whole set `R` (difference holes enter as
/// negatively weighted nodes over the full hole).
pub fn region_quadrature(set: &AmbitSet, n_rad: usize, n_ang: usize) -> Result<Vec<AreaNode>> {
    set.validate()?;
    let gl = GaussLegendre::new(n_rad);
    let mut nodes = Vec::new();
    push_region_nodes(set, &gl, n_ang, 1.0, &mut nodes);
    Ok(nodes)
}

fn push_region_nodes(
    set: &AmbitSet,
    gl: &GaussLegendre,
    n_ang: usize,
    sign: f64,
    nodes: &mut Vec<AreaNode>,
) {
    match set {
        AmbitSet::Disk { center, radius } => polar_nodes(*center, 0.0, *radius, gl, n_ang, sign, nodes),
        AmbitSet::Annulus { center, inner, outer } => {
            polar_nodes(*center, *inner, *outer, gl, n_ang, sign, nodes)
        }
        AmbitSet::Polygon { vertices } => fan_triangulation_nodes(vertices, gl, sign, nodes),
        AmbitSet::Difference { outer, holes } => {
            push_region_nodes(outer, gl, n_ang, sign, nodes);
            for h in holes {
                push_region_nodes(h, gl, n_ang, -sign, nodes);
            }
        }
    }
}

/// Quadrature nodes covering the collar `{q : d(q, ∂R) ≤ r}`.
///
/// Transverse placement uses the substitution `s = r·sin(φ)`: the collar
/// profiles of the small-radius theory behave like `√(1 - (s/r)²)`, which
/// the substitution turns into a smooth (cosine) integrand, so moderate node
/// counts reach near-spectral accuracy.
pub fn collar_quadrature(
    set: &AmbitSet,
    r: f64,
    n_tangential: usize,
    n_transverse: usize,
) -> Result<Vec<AreaNode>> {
    set.validate()?;
    set.require_valid_radius(r)?;
    let gl_s = GaussLegendre::new(n_transverse);
    let gl_t = GaussLegendre::new(8);
    let mut nodes = Vec::new();
    for comp in set.boundary_components() {
        match comp {
            BoundaryComponent::Circle { center, radius, .. } => {
                // q = center + (radius + s)·u(α), Jacobian (radius + s).
                let n_ang = n_tangential.max(8);
                let dt = TAU / n_ang as f64;
                for k in 0..n_ang {
                    let ang = (k as f64 + 0.5) * dt;
                    let u = Vec2::unit(ang);
                    for (phi, wp) in gl_s.nodes_on(-PI / 2.0, PI / 2.0) {
                        let s = r * phi.sin();
                        let jac = r * phi.cos() * (radius + s) * dt;
                        nodes.push(AreaNode { q: center + u * (radius + s), w: wp * jac });
                    }
                }
            }
            BoundaryComponent::Loop { vertices, .. } => {
                let m = vertices.len();
                let perim = polygon_perimeter(&vertices);
                for i in 0..m {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % m];
                    let len = (b - a).norm();
                    let t = (b - a) * (1.0 / len);
                    let n = Vec2::new(t.y, -t.x);
                    let n_t = ((n_tangential as f64 * len / perim).ceil() as usize).max(4);
                    let cot_a = 1.0 / (0.5 * polygon_interior_angle(&vertices, i)).tan();
                    let cot_b = 1.0 / (0.5 * polygon_interior_angle(&vertices, (i + 1) % m)).tan();
                    // The strip length is only piecewise-smooth across s = 0,
                    // so integrate the two sides on separate panels.
                    // Outer side: full rectangle strip.
                    for (phi, wp) in gl_s.nodes_on(0.0, PI / 2.0) {
                        let s = r * phi.sin(); // signed offset along +n (outward)
                        let ds = r * phi.cos() * wp;
                        for (x, wx) in gl_line(&gl_t, 0.0, len, n_t) {
                            nodes.push(AreaNode { q: a + t * x + n * s, w: wx * ds });
                        }
                    }
                    // Inner side: clip to the nearest-edge (bisector) cell.
                    for (phi, wp) in gl_s.nodes_on(-PI / 2.0, 0.0) {
                        let s = r * phi.sin();
                        let ds = r * phi.cos() * wp;
                        let lo = -s * cot_a;
                        let hi = len + s * cot_b;
                        if hi > lo {
                            for (x, wx) in gl_line(&gl_t, lo, hi, n_t) {
                                nodes.push(AreaNode { q: a + t * x + n * s, w: wx * ds });
                            }
                        }
                    }
                }
                // Outer vertex wedges.
                for i in 0..m {
                    let prev = vertices[(i + m - 1) % m];
                    let v = vertices[i];
                    let next = vertices[(i + 1) % m];
                    let t1 = (v - prev).normalized();
                    let t2 = (next - v).normalized();
                    let n1 = Vec2::new(t1.y, -t1.x);
                    let n2 = Vec2::new(t2.y, -t2.x);
                    let a0 = n1.angle();
                    let mut a1 = n2.angle();
                    while a1 < a0 {
                        a1 += TAU;
                    }
                    let wedge = GaussLegendre::new(8);
                    for (ang, wa) in wedge.nodes_on(a0, a1) {
                        for (phi, wr) in gl_s.nodes_on(0.0, PI / 2.0) {
                            let rho = r * phi.sin();
                            nodes.push(AreaNode {
                                q: v + Vec2::unit(ang) * rho,
                                w: wa * wr * rho * r * phi.cos(),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(nodes)
}
