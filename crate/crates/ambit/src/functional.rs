//! Circle functionals: flux and circulation on shrinking circles.
//!
//! The flux of the field around the circle of radius `r` at `p` is
//!
//! ```text
//! D_r(p) = r ∫₀^{2π} X(p + r·u(θ)) · u(θ) dθ,
//! ```
//!
//! and the circulation replaces `u(θ)` by its quarter-turn `u(θ)^⊥`.
//! Exchanging the θ-integral with the basis integral collapses the
//! functional to a single weighted integral against the basis,
//!
//! ```text
//! D_r(p) = ∫ χ(q) V(q) L(dq),
//! χ(q)   = r ∫₀^{2π} F(p - q + r·u) · u · 1_R(q - p - r·u) dθ,
//! ```
//!
//! which this module evaluates three ways, kept deliberately independent:
//!
//! * [`ChiRule::Trapezoid`] — the same equispaced θ-sum as the direct
//!   definition, reordered per basis cell; pathwise identical to the direct
//!   evaluation (used to pin the plan machinery against the definition);
//! * [`ChiRule::ArcGauss`] — the boundary-crossing arcs are found exactly
//!   and integrated by Gauss panels (near-exact for smooth kernels);
//! * the interior divergence route — for `q` deeper than `r` inside `R` the
//!   full circle lies in the set and the rotation form of Green's theorem
//!   turns `χ(q)` into `∫_{D_r} div F` (flux) or `∫_{D_r} curl F`
//!   (circulation), reduced to a one-dimensional radial integral.
//!
//! [`FluxPlan`] precomputes the per-cell weights once per configuration, so
//! a Monte Carlo replicate costs one cell draw and one multiply per touched
//! cell.

use crate::field::{AtomRealization, GridRealization, GridSpec, LevyRealization, VolatilitySpec};
use crate::geometry::{collar_quadrature, interior_quadrature, region_quadrature, AmbitSet};
use crate::kernel::Kernel;
use crate::levy::{LimitSeed, Triplet, TripletSampler};
use crate::quad::GaussLegendre;
use crate::rng::CounterRng;
use crate::vec2::Vec2;
use crate::{AmbitError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Which circle functional to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircleFunctional {
    Flux,
    Circulation,
}

impl CircleFunctional {
    /// Direction the field is paired with at angle θ.
    #[inline]
    pub fn dir(&self, u: Vec2) -> Vec2 {
        match self {
            CircleFunctional::Flux => u,
            CircleFunctional::Circulation => u.perp(),
        }
    }

    /// The matching first-order invariant of the kernel along a ray.
    fn invariant_radial(&self, kernel: &Kernel, rho: f64) -> f64 {
        match self {
            CircleFunctional::Flux => kernel.divergence_radial(rho),
            CircleFunctional::Circulation => kernel.curl_radial(rho),
        }
    }

    fn invariant_at(&self, kernel: &Kernel, q: Vec2) -> f64 {
        self.invariant_radial(kernel, q.norm())
    }

    fn invariant_free(&self, kernel: &Kernel) -> bool {
        match self {
            CircleFunctional::Flux => kernel.divergence_free(),
            CircleFunctional::Circulation => kernel.curl_free(),
        }
    }
}

/// How collar weights are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChiRule {
    /// Exact boundary arcs, Gauss panels on each inside arc.
    ArcGauss,
    /// Equispaced trapezoid with the given θ-count — bitwise the same sum
    /// as the direct circle discretization (at `p = 0`).
    Trapezoid(usize),
}

// ---------------------------------------------------------------------------
// χ weight evaluation.
// ---------------------------------------------------------------------------

/// Evaluate `χ` at offset `w = q - p` (set coordinates).
pub fn chi_weight(
    kernel: &Kernel,
    set: &AmbitSet,
    which: CircleFunctional,
    w: Vec2,
    r: f64,
    rule: ChiRule,
) -> f64 {
    match rule {
        ChiRule::Trapezoid(n) => chi_trapezoid(kernel, set, which, w, r, n),
        ChiRule::ArcGauss => {
            let sd = set.signed_distance(w);
            if sd >= r {
                0.0
            } else if sd <= -r {
                chi_interior(kernel, set, which, w, r)
            } else {
                chi_collar_arcs(kernel, set, which, w, r)
            }
        }
    }
}

fn chi_trapezoid(
    kernel: &Kernel,
    set: &AmbitSet,
    which: CircleFunctional,
    w: Vec2,
    r: f64,
    n: usize,
) -> f64 {
    let dt = TAU / n as f64;
    let mut acc = 0.0;
    for k in 0..n {
        let u = Vec2::unit(k as f64 * dt);
        if set.contains(w - u * r) {
            acc += kernel.eval(-w + u * r).dot(which.dir(u));
        }
    }
    acc * r * dt
}

/// Interior weight via the matching Green identity, or a full-circle arc
/// integral when the identity does not apply (singular kernel with the
/// origin inside the probe disk).
fn chi_interior(kernel: &Kernel, set: &AmbitSet, which: CircleFunctional, w: Vec2, r: f64) -> f64 {
    let _ = set;
    if kernel.singular_at_origin() && w.norm() <= r * (1.0 + 1e-9) {
        return full_circle_arc(kernel, which, w, r, 512);
    }
    if which.invariant_free(kernel) {
        return 0.0;
    }
    disk_invariant_integral(kernel, which, w.norm(), r)
}

/// `∫_{D_r(v)} g(|y|) dy` for `g` the divergence/curl radial profile and
/// `|v| = d`: the probe disk in the kernel's radial coordinates.
///
/// Reduced to one dimension by the ring-arc angle
/// `θ(ρ) = 2·acos((d² + ρ² - r²)/(2dρ))`; the square-root endpoint behavior
/// of `θ` is absorbed by the substitutions `ρ = d - r·cos τ` (resp.
/// `ρ = r - d·cos τ`), making the integrand smooth in `τ`.
pub fn disk_invariant_integral(
    kernel: &Kernel,
    which: CircleFunctional,
    d: f64,
    r: f64,
) -> f64 {
    let gl = GaussLegendre::new(32);
    let g = |rho: f64| which.invariant_radial(kernel, rho);
    if d < 1e-14 {
        // Concentric: full rings throughout.
        return gl
            .nodes_on(0.0, r)
            .map(|(rho, w)| w * g(rho) * rho * TAU)
            .sum();
    }
    let arc_angle = |rho: f64| {
        let c = ((d * d + rho * rho - r * r) / (2.0 * d * rho)).clamp(-1.0, 1.0);
        2.0 * c.acos()
    };
    if d >= r {
        // ρ ∈ [d-r, d+r], ρ = d - r·cos τ.
        gl.nodes_on(0.0, PI)
            .map(|(tau, w)| {
                let rho = d - r * tau.cos();
                w * g(rho) * rho * arc_angle(rho) * r * tau.sin()
            })
            .sum()
    } else {
        // Full rings up to r - d, then partial rings with ρ = r - d·cos τ.
        let full: f64 = gl
            .nodes_on(0.0, r - d)
            .map(|(rho, w)| w * g(rho) * rho * TAU)
            .sum();
        let partial: f64 = gl
            .nodes_on(0.0, PI)
            .map(|(tau, w)| {
                let rho = r - d * tau.cos();
                w * g(rho) * rho * arc_angle(rho) * d * tau.sin()
            })
            .sum();
        full + partial
    }
}

/// Full-circle arc integral `r ∮ F(-w + r·u)·dir(u) dθ` by the periodic
/// trapezoid rule (spectrally accurate for smooth kernels).
fn full_circle_arc(kernel: &Kernel, which: CircleFunctional, w: Vec2, r: f64, n: usize) -> f64 {
    let dt = TAU / n as f64;
    let mut acc = 0.0;
    for k in 0..n {
        let u = Vec2::unit(k as f64 * dt);
        acc += kernel.eval(-w + u * r).dot(which.dir(u));
    }
    acc * r * dt
}

/// Collar weight: find boundary crossings exactly, classify arcs by their
/// midpoints, and integrate the inside arcs.
fn chi_collar_arcs(
    kernel: &Kernel,
    set: &AmbitSet,
    which: CircleFunctional,
    w: Vec2,
    r: f64,
) -> f64 {
    // The traced point is w - r·u(θ) = w + r·unit(θ + π): crossing angles φ
    // of the circle around w translate to θ = φ + π.
    let mut angles = Vec::new();
    set.circle_crossings(w, r, &mut angles);
    if angles.is_empty() {
        // Tangent or degenerate: the whole circle is on one side.
        return if set.contains(w - Vec2::new(r, 0.0)) {
            full_circle_arc(kernel, which, w, r, 256)
        } else {
            0.0
        };
    }
    for a in &mut angles {
        *a = crate::geometry::normalize_angle(*a + PI);
    }
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut acc = 0.0;
    let m = angles.len();
    for i in 0..m {
        let t0 = angles[i];
        let t1 = if i + 1 < m { angles[i + 1] } else { angles[0] + TAU };
        if t1 - t0 < 1e-14 {
            continue;
        }
        let mid = 0.5 * (t0 + t1);
        if set.contains(w - Vec2::unit(mid) * r) {
            acc += arc_integral(kernel, which, w, r, t0, t1);
        }
    }
    acc
}

/// `r ∫_{t0}^{t1} F(-w + r·u(θ))·dir(u(θ)) dθ`.
fn arc_integral(
    kernel: &Kernel,
    which: CircleFunctional,
    w: Vec2,
    r: f64,
    t0: f64,
    t1: f64,
) -> f64 {
    if let Kernel::Constant { value } = kernel {
        // Closed form: ∫ u dθ and ∫ u⊥ dθ are antiderivative differences.
        let integral_dir = match which {
            CircleFunctional::Flux => {
                Vec2::new(t1.sin() - t0.sin(), -(t1.cos() - t0.cos()))
            }
            CircleFunctional::Circulation => {
                Vec2::new(t1.cos() - t0.cos(), t1.sin() - t0.sin())
            }
        };
        return r * value.dot(integral_dir);
    }
    let gl = GaussLegendre::new(16);
    let panels = ((t1 - t0) / (PI / 2.0)).ceil().max(1.0) as usize;
    let mut acc = 0.0;
    for k in 0..panels {
        let a = t0 + (t1 - t0) * k as f64 / panels as f64;
        let b = t0 + (t1 - t0) * (k + 1) as f64 / panels as f64;
        acc += gl
            .nodes_on(a, b)
            .map(|(t, wt)| {
                let u = Vec2::unit(t);
                wt * kernel.eval(-w + u * r).dot(which.dir(u))
            })
            .sum::<f64>();
    }
    r * acc
}

// ---------------------------------------------------------------------------
// Direct evaluation on a realization.
// ---------------------------------------------------------------------------

/// Evaluate the functional straight from the definition: discretize the
/// circle with `n_theta` equispaced nodes and evaluate the field at each.
pub fn functional_direct(
    kernel: &Kernel,
    set: &AmbitSet,
    vol: &VolatilitySpec,
    which: CircleFunctional,
    p: Vec2,
    r: f64,
    n_theta: usize,
    realization: &LevyRealization,
) -> Result<f64> {
    let dt = TAU / n_theta as f64;
    let mut acc = 0.0;
    for k in 0..n_theta {
        let u = Vec2::unit(k as f64 * dt);
        let x = crate::field::eval_field(kernel, set, vol, p + u * r, realization)?;
        acc += x.dot(which.dir(u));
    }
    Ok(acc * r * dt)
}

// ---------------------------------------------------------------------------
// Precomputed cell plans.
// ---------------------------------------------------------------------------

/// Per-cell χ weights for one (set, kernel, p, r, rule) configuration.
///
/// Executing the plan on a replicate costs one substream draw per entry;
/// zero-weight cells are dropped at build time, so divergence-free kernels
/// skip the entire interior.
#[derive(Debug, Clone)]
pub struct FluxPlan {
    pub spec: GridSpec,
    pub which: CircleFunctional,
    pub r: f64,
    entries: Vec<(u64, f64)>,
    pub n_collar: usize,
    pub n_interior: usize,
}

/// Linear interpolation table for the radial interior weight.
struct RadialTable {
    d0: f64,
    step: f64,
    vals: Vec<f64>,
}

impl RadialTable {
    fn build(kernel: &Kernel, which: CircleFunctional, r: f64, d_max: f64, step: f64) -> Self {
        let n = ((d_max / step).ceil() as usize + 2).max(2);
        let vals = (0..n)
            .map(|i| disk_invariant_integral(kernel, which, i as f64 * step, r))
            .collect();
        RadialTable { d0: 0.0, step, vals }
    }

    fn eval(&self, d: f64) -> f64 {
        let t = ((d - self.d0) / self.step).max(0.0);
        let i = (t as usize).min(self.vals.len() - 2);
        let frac = t - i as f64;
        self.vals[i] * (1.0 - frac) + self.vals[i + 1] * frac
    }
}

impl FluxPlan {
    pub fn build(
        kernel: &Kernel,
        set: &AmbitSet,
        vol: &VolatilitySpec,
        which: CircleFunctional,
        p: Vec2,
        r: f64,
        spec: &GridSpec,
        rule: ChiRule,
    ) -> Result<FluxPlan> {
        kernel.validate()?;
        set.validate()?;
        if !(r > 0.0) {
            return Err(AmbitError::Config("probe radius must be > 0".into()));
        }
        let (set_lo, set_hi) = set.bbox();
        let pad = Vec2::new(r, r);
        let (ix0, ix1, iy0, iy1) =
            spec.cells_overlapping(set_lo + p - pad, set_hi + p + pad);
        let need_interior = !which.invariant_free(kernel) || kernel.singular_at_origin();
        // Radial interior table (smooth kernels only; the singular
        // origin-enclosing case is rare and evaluated directly).
        let table = if need_interior && !kernel.singular_at_origin() {
            let corners = [
                spec.window.lo,
                spec.window.hi,
                Vec2::new(spec.window.lo.x, spec.window.hi.y),
                Vec2::new(spec.window.hi.x, spec.window.lo.y),
            ];
            let d_max = corners.iter().map(|c| (*c - p).norm()).fold(0.0, f64::max);
            Some(RadialTable::build(kernel, which, r, d_max, spec.h / 4.0))
        } else {
            None
        };
        let mut entries = Vec::new();
        let mut n_collar = 0;
        let mut n_interior = 0;
        for iy in iy0..=iy1 {
            for ix in ix0..=ix1 {
                let c = spec.cell_center(ix, iy);
                let w = c - p;
                let weight = match rule {
                    ChiRule::Trapezoid(n) => {
                        let chi = chi_trapezoid(kernel, set, which, w, r, n);
                        if chi != 0.0 {
                            n_collar += 1;
                        }
                        chi
                    }
                    ChiRule::ArcGauss => {
                        let sd = set.signed_distance(w);
                        if sd >= r {
                            0.0
                        } else if sd <= -r {
                            if !need_interior {
                                0.0
                            } else {
                                n_interior += 1;
                                match &table {
                                    Some(t) => t.eval(w.norm()),
                                    None => chi_interior(kernel, set, which, w, r),
                                }
                            }
                        } else {
                            n_collar += 1;
                            chi_collar_arcs(kernel, set, which, w, r)
                        }
                    }
                };
                if weight != 0.0 {
                    entries.push((spec.cell_index(ix, iy), weight * vol.eval(c)));
                }
            }
        }
        Ok(FluxPlan {
            spec: spec.clone(),
            which,
            r,
            entries,
            n_collar,
            n_interior,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Draw one replicate: sample each touched cell from its substream.
    pub fn execute(&self, sampler: &TripletSampler, stream_key: u64) -> f64 {
        let area = self.spec.cell_area();
        let mut acc = 0.0;
        for &(idx, weight) in &self.entries {
            let mut rng = CounterRng::for_cell(stream_key, idx);
            acc += weight * sampler.sample_cell(area, &mut rng);
        }
        acc
    }

    /// Evaluate on a fully materialized grid (for equivalence checks).
    pub fn execute_on_grid(&self, grid: &GridRealization) -> Result<f64> {
        if grid.spec != self.spec {
            return Err(AmbitError::Config(
                "grid realization does not match the plan's grid".into(),
            ));
        }
        Ok(self
            .entries
            .iter()
            .map(|&(idx, weight)| weight * grid.values[idx as usize])
            .sum())
    }

    /// Sum of squared weights (times cell area) — the variance factor for a
    /// unit Gaussian basis.
    pub fn weight_l2(&self) -> f64 {
        self.spec.cell_area() * self.entries.iter().map(|&(_, w)| w * w).sum::<f64>()
    }
}

// ---------------------------------------------------------------------------
// Atom-path evaluation and the interior/boundary decomposition.
// ---------------------------------------------------------------------------

/// Functional on an exact atom realization: `Σ χ(q_i)·V(q_i)·J_i` plus the
/// deterministic drift contribution.
pub fn functional_on_atoms(
    kernel: &Kernel,
    set: &AmbitSet,
    vol: &VolatilitySpec,
    which: CircleFunctional,
    p: Vec2,
    r: f64,
    atoms: &AtomRealization,
    rule: ChiRule,
) -> Result<f64> {
    let mut acc = 0.0;
    for &(q, mass) in &atoms.atoms {
        let chi = chi_weight(kernel, set, which, q - p, r, rule);
        acc += chi * vol.eval(q) * mass;
    }
    if atoms.drift_density != 0.0 {
        acc += atoms.drift_density * drift_chi_integral(kernel, set, vol, which, p, r, rule)?;
    }
    Ok(acc)
}

/// `∫ χ(q) V(q) dq` — the deterministic drift weight.  For constant
/// volatility the continuum value is exactly zero (the χ field integrates
/// the kernel against `∮ u dθ = 0`), so only the discrete trapezoid rule
/// produces a (tiny, consistent) residual.
fn drift_chi_integral(
    kernel: &Kernel,
    set: &AmbitSet,
    vol: &VolatilitySpec,
    which: CircleFunctional,
    p: Vec2,
    r: f64,
    rule: ChiRule,
) -> Result<f64> {
    match rule {
        ChiRule::Trapezoid(n) => {
            // Mirror the direct path: per θ-node, the drift field is
            // drift·∫_{R} F(-v)V(p+r·u+v) dv.
            let nodes = region_quadrature(set, 24, 128)?;
            let dt = TAU / n as f64;
            let mut acc = 0.0;
            for k in 0..n {
                let u = Vec2::unit(k as f64 * dt);
                let centre = p + u * r;
                let mut drift = Vec2::ZERO;
                for node in &nodes {
                    drift += kernel.eval(-node.q) * (node.w * vol.eval(centre + node.q));
                }
                acc += drift.dot(which.dir(u));
            }
            Ok(acc * r * dt)
        }
        ChiRule::ArcGauss => {
            if vol.is_trivial() {
                return Ok(0.0);
            }
            // Non-trivial volatility: integrate χ·V over the χ support.
            let quad = chi_quadrature(kernel, set, which, r, 512, 24, 24, 192)?;
            Ok(quad
                .nodes
                .iter()
                .map(|n| n.area_w * n.chi * vol.eval(p + n.w))
                .sum())
        }
    }
}

/// Interior/boundary split of the atom-path functional, with each side
/// computed by an independent route.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Decomposition {
    /// Direct definition: θ-trapezoid over field evaluations.
    pub direct: f64,
    /// Same trapezoid reordered per atom (must match `direct` bitwise up to
    /// summation order).
    pub by_weights_trapezoid: f64,
    /// Independent total: exact collar arcs for near-boundary atoms plus a
    /// dense periodic-trapezoid circle quadrature for interior atoms (no
    /// Green identity involved).
    pub by_weights_smooth: f64,
    /// Interior part via the Green identity (radial quadrature).
    pub interior: f64,
    /// Boundary part via exact arcs.
    pub boundary: f64,
    /// Conditioning scale: the L¹ mass of the per-atom contributions, for
    /// forming relative identity gaps.
    pub scale: f64,
}

pub fn decompose_on_atoms(
    kernel: &Kernel,
    set: &AmbitSet,
    vol: &VolatilitySpec,
    which: CircleFunctional,
    p: Vec2,
    r: f64,
    n_theta: usize,
    atoms: &AtomRealization,
) -> Result<Decomposition> {
    let direct = functional_direct(
        kernel,
        set,
        vol,
        which,
        p,
        r,
        n_theta,
        &LevyRealization::Atoms(atoms.clone()),
    )?;
    let by_weights_trapezoid =
        functional_on_atoms(kernel, set, vol, which, p, r, atoms, ChiRule::Trapezoid(n_theta))?;
    let mut interior = 0.0;
    let mut boundary = 0.0;
    let mut smooth_total = 0.0;
    let mut scale = 0.0;
    for &(q, mass) in &atoms.atoms {
        let w = q - p;
        let sd = set.signed_distance(w);
        if sd >= r {
            continue;
        }
        if sd <= -r {
            // Interior atom: Green-identity radial route feeds `interior`;
            // the independent total integrates the circle directly with a
            // dense periodic trapezoid (spectrally accurate for the smooth
            // kernels used here).
            interior += interior_dual_route(kernel, set, which, w, r)? * vol.eval(q) * mass;
            let v = chi_trapezoid(kernel, set, which, w, r, 512) * vol.eval(q) * mass;
            smooth_total += v;
            scale += v.abs();
        } else {
            let v = chi_collar_arcs(kernel, set, which, w, r) * vol.eval(q) * mass;
            boundary += v;
            smooth_total += v;
            scale += v.abs();
        }
    }
    if atoms.drift_density != 0.0 {
        // Continuum drift contribution is exactly zero; fold nothing into
        // the smooth routes (it cancels identically in `∮ u dθ = 0`).
    }
    Ok(Decomposition {
        direct,
        by_weights_trapezoid,
        by_weights_smooth: smooth_total,
        interior,
        boundary,
        scale,
    })
}

/// Line integral of a deterministic vector field `G` over the circle
/// `∂D_r(p)`: flux `∮ G·n dl` or circulation `∮ G·t dl`, by the periodic
/// trapezoid rule with `n_theta` nodes.
pub fn line_integral<G: Fn(Vec2) -> Vec2>(
    field: G,
    which: CircleFunctional,
    p: Vec2,
    r: f64,
    n_theta: usize,
) -> f64 {
    let dt = TAU / n_theta as f64;
    let mut acc = 0.0;
    for k in 0..n_theta {
        let u = Vec2::unit(k as f64 * dt);
        acc += field(p + u * r).dot(which.dir(u));
    }
    acc * r * dt
}

/// Interior weight by the Green identity; the arc route stays available to
/// callers through `chi_weight`, keeping the two genuinely independent.
fn interior_dual_route(
    kernel: &Kernel,
    set: &AmbitSet,
    which: CircleFunctional,
    w: Vec2,
    r: f64,
) -> Result<f64> {
    Ok(chi_interior(kernel, set, which, w, r))
}

/// Pathwise value of the invariant density field at `p`:
/// `σ(p) = Σ_{q_i ∈ R+p} inv(p - q_i)·J_i + drift·∫_R inv(-v) dv`, where
/// `inv` is the kernel divergence (flux) or curl (circulation).
pub fn pathwise_invariant_field(
    kernel: &Kernel,
    set: &AmbitSet,
    which: CircleFunctional,
    p: Vec2,
    atoms: &AtomRealization,
) -> Result<f64> {
    let mut acc = 0.0;
    for &(q, mass) in &atoms.atoms {
        if set.contains(q - p) {
            acc += which.invariant_at(kernel, p - q) * mass;
        }
    }
    if atoms.drift_density != 0.0 {
        let nodes = region_quadrature(set, 24, 128)?;
        let drift: f64 = nodes
            .iter()
            .map(|n| n.w * which.invariant_at(kernel, -n.q))
            .sum();
        acc += atoms.drift_density * drift;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Exact characteristic function of the functional.
// ---------------------------------------------------------------------------

/// One signed area node with its χ value.
#[derive(Debug, Clone, Copy)]
pub struct ChiNode {
    pub w: Vec2,
    pub area_w: f64,
    pub chi: f64,
}

/// Signed quadrature covering the support of χ: collar nodes carry the
/// exact arc weight, interior nodes the radial Green-identity weight (the
/// region algebra of difference sets works because the radial formula
/// agrees with χ on the true eroded region and both signs of node use the
/// same formula).
#[derive(Debug, Clone)]
pub struct ChiQuadrature {
    pub nodes: Vec<ChiNode>,
    pub r: f64,
}

pub fn chi_quadrature(
    kernel: &Kernel,
    set: &AmbitSet,
    which: CircleFunctional,
    r: f64,
    n_tangential: usize,
    n_transverse: usize,
    n_rad: usize,
    n_ang: usize,
) -> Result<ChiQuadrature> {
    let mut nodes = Vec::new();
    for node in collar_quadrature(set, r, n_tangential, n_transverse)? {
        let chi = chi_collar_arcs(kernel, set, which, node.q, r);
        nodes.push(ChiNode { w: node.q, area_w: node.w, chi });
    }
    if !which.invariant_free(kernel) || kernel.singular_at_origin() {
        for node in interior_quadrature(set, r, n_rad, n_ang)? {
            let chi = chi_interior(kernel, set, which, node.q, r);
            nodes.push(ChiNode { w: node.q, area_w: node.w, chi });
        }
    }
    Ok(ChiQuadrature { nodes, r })
}

/// Exact characteristic function `E exp(izD_r) = exp(∫ ψ(z·χ(q)) dq)` of
/// the functional under the basis `triplet`.
pub fn cf_flux_exact(triplet: &Triplet, quad: &ChiQuadrature, z: f64) -> Result<Complex64> {
    let mut exponent = Complex64::new(0.0, 0.0);
    for node in &quad.nodes {
        if node.chi != 0.0 {
            exponent += triplet.psi(z * node.chi)? * node.area_w;
        }
    }
    Ok(exponent.exp())
}

/// Second moment of the functional for a pure-Gaussian basis
/// (`Var = b² ∫ χ² dq`).
pub fn flux_variance_gaussian(b: f64, quad: &ChiQuadrature) -> f64 {
    b * b * quad.nodes.iter().map(|n| n.area_w * n.chi * n.chi).sum::<f64>()
}

// ---------------------------------------------------------------------------
// Limiting line-integral fields on the boundary.
// ---------------------------------------------------------------------------

/// One boundary element with the limit integrand `ξ = -F(-s)·dir(n(s))`.
#[derive(Debug, Clone, Copy)]
pub struct LimitElement {
    pub len: f64,
    pub xi: f64,
}

/// Discretize `∂R` and evaluate the limit integrand on each element.  The
/// leading minus sign is the orientation of the small-circle limit: the
/// probe circle's contack point sees the kernel argument `-s`.
pub fn limit_boundary_elements(
    kernel: &Kernel,
    set: &AmbitSet,
    which: CircleFunctional,
    max_len: f64,
) -> Vec<LimitElement> {
    set.discretize_boundary(max_len)
        .iter()
        .map(|e| LimitElement {
            len: e.length,
            xi: -kernel.eval(-e.point).dot(which.dir(e.normal)),
        })
        .collect()
}

/// Draw one realization of the limit functional `∫_{∂R} ξ dM` with `M` the
/// independently-scattered seed basis controlled by arc length.
pub fn sample_limit_functional(
    seed: &LimitSeed,
    elements: &[LimitElement],
    rng: &mut CounterRng,
) -> f64 {
    let inv_beta = 1.0 / seed_stability_index(seed);
    elements
        .iter()
        .map(|e| e.xi * e.len.powf(inv_beta) * seed.sample(rng))
        .sum()
}

fn seed_stability_index(seed: &LimitSeed) -> f64 {
    match seed {
        LimitSeed::Gaussian { .. } => 2.0,
        LimitSeed::Stable { beta, .. } => *beta,
    }
}

/// Exact characteristic function of the limit functional:
/// `exp(Σ_e len_e · ψ_seed(z·ξ_e))`.
pub fn cf_limit_exact(seed: &LimitSeed, elements: &[LimitElement], z: f64) -> Complex64 {
    let exponent: Complex64 = elements
        .iter()
        .map(|e| seed.psi(z * e.xi) * e.len)
        .sum();
    exponent.exp()
}

/// Variance of the Gaussian limit functional `b² ∫_{∂R} ξ² H¹(ds)`.
pub fn limit_variance_gaussian(b: f64, elements: &[LimitElement]) -> f64 {
    b * b * elements.iter().map(|e| e.len * e.xi * e.xi).sum::<f64>()
}
