//! Integration kernels.
//!
//! The engine works with planar kernels of two shapes:
//!
//! * `Constant` — a fixed vector field `F(q) = v`;
//! * `Isotropic` — `F(q) = R_φ q · f(|q|)`, a radial profile `f` pushed
//!   through the rotation `R_φ`.  The mixing angle interpolates between a
//!   gradient-type field (`φ = 0`, curl-free) and a rotational field
//!   (`φ = π/2`, divergence-free).
//!
//! For the isotropic family both first-order invariants have closed forms
//! in terms of the radial profile:
//!
//! ```text
//! div F(q)  = cos(φ) · (2 f(ρ) + ρ f'(ρ)),      ρ = |q|,
//! curl F(q) = sin(φ) · (2 f(ρ) + ρ f'(ρ)).
//! ```
//!
//! The common factor `2f + ρf'` is exposed as [`Kernel::ring_profile`]; the
//! profile `f(x) = K x⁻²` annihilates it, giving a kernel that is divergence-
//! and curl-free away from the origin.

use crate::geometry::AmbitSet;
use crate::vec2::Vec2;
use crate::{AmbitError, Result};
use serde::{Deserialize, Serialize};

/// Scalar radial profile `f(x)` for `x > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialProfile {
    /// `f(x) = coefficient · x^exponent`.
    PowerLaw { coefficient: f64, exponent: f64 },
    /// `f(x) = Σ_k coefficients[k] · x^k`.
    Polynomial { coefficients: Vec<f64> },
    /// Smooth bump supported on `(center - width, center + width)`:
    /// `f(x) = amplitude · exp(1 - 1/(1 - t²))` with `t = (x - center)/width`,
    /// identically zero outside the support.  Infinitely differentiable.
    BumpVanishing { amplitude: f64, center: f64, width: f64 },
}

impl RadialProfile {
    pub fn validate(&self) -> Result<()> {
        match self {
            RadialProfile::PowerLaw { coefficient, exponent } => {
                if !coefficient.is_finite() || !exponent.is_finite() {
                    return Err(AmbitError::Config("power-law profile parameters must be finite".into()));
                }
            }
            RadialProfile::Polynomial { coefficients } => {
                if coefficients.is_empty() {
                    return Err(AmbitError::Config("polynomial profile needs coefficients".into()));
                }
            }
            RadialProfile::BumpVanishing { width, .. } => {
                if !(*width > 0.0) {
                    return Err(AmbitError::Config("bump profile width must be > 0".into()));
                }
            }
        }
        Ok(())
    }

    /// `f(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            RadialProfile::PowerLaw { coefficient, exponent } => coefficient * x.powf(*exponent),
            RadialProfile::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
            RadialProfile::BumpVanishing { amplitude, center, width } => {
                let t = (x - center) / width;
                if t.abs() >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / (1.0 - t * t)).exp()
                }
            }
        }
    }

    /// `f'(x)`.
    pub fn deriv(&self, x: f64) -> f64 {
        match self {
            RadialProfile::PowerLaw { coefficient, exponent } => {
                coefficient * exponent * x.powf(exponent - 1.0)
            }
            RadialProfile::Polynomial { coefficients } => {
                let mut acc = 0.0;
                for (k, c) in coefficients.iter().enumerate().skip(1).rev() {
                    acc = acc * x + k as f64 * c;
                }
                acc
            }
            RadialProfile::BumpVanishing { center, width, .. } => {
                let t = (x - center) / width;
                if t.abs() >= 1.0 {
                    0.0
                } else {
                    let g = 1.0 - t * t;
                    self.eval(x) * (-2.0 * t / (g * g)) / width
                }
            }
        }
    }

    /// True when the profile blows up as `x → 0` (negative power law).
    pub fn singular_at_origin(&self) -> bool {
        matches!(self, RadialProfile::PowerLaw { exponent, .. } if *exponent < 0.0)
    }
}

/// A planar kernel `F : R² → R²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    Constant { value: Vec2 },
    Isotropic { phi: f64, profile: RadialProfile },
}

impl Kernel {
    pub fn constant(value: Vec2) -> Self {
        Kernel::Constant { value }
    }

    pub fn isotropic(phi: f64, profile: RadialProfile) -> Self {
        Kernel::Isotropic { phi, profile }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Kernel::Constant { value } => {
                if !value.x.is_finite() || !value.y.is_finite() {
                    return Err(AmbitError::Config("constant kernel value must be finite".into()));
                }
                Ok(())
            }
            Kernel::Isotropic { phi, profile } => {
                if !phi.is_finite() {
                    return Err(AmbitError::Config("kernel mixing angle must be finite".into()));
                }
                profile.validate()
            }
        }
    }

    /// `F(q)`.  At the origin the isotropic kernel evaluates to zero by
    /// convention (the radial factor is multiplied by `q`); quadrature
    /// rules never place nodes exactly there.
    pub fn eval(&self, q: Vec2) -> Vec2 {
        match self {
            Kernel::Constant { value } => *value,
            Kernel::Isotropic { phi, profile } => {
                let rho = q.norm();
                if rho == 0.0 {
                    return Vec2::ZERO;
                }
                q.rotate(*phi) * profile.eval(rho)
            }
        }
    }

    /// The radial invariant factor `2 f(x) + x f'(x)` (zero for constant
    /// kernels).  Divergence and curl are `cos φ`, `sin φ` multiples of it.
    pub fn ring_profile(&self, x: f64) -> f64 {
        match self {
            Kernel::Constant { .. } => 0.0,
            Kernel::Isotropic { profile, .. } => 2.0 * profile.eval(x) + x * profile.deriv(x),
        }
    }

    /// `div F(q) = cos(φ) · (2f + ρf')` at `ρ = |q|`.
    pub fn divergence(&self, q: Vec2) -> f64 {
        self.divergence_radial(q.norm())
    }

    /// Divergence as a function of the distance from the origin.
    pub fn divergence_radial(&self, rho: f64) -> f64 {
        match self {
            Kernel::Constant { .. } => 0.0,
            Kernel::Isotropic { phi, .. } => phi.cos() * self.ring_profile(rho),
        }
    }

    /// `curl F(q) = sin(φ) · (2f + ρf')` at `ρ = |q|`.
    pub fn curl(&self, q: Vec2) -> f64 {
        self.curl_radial(q.norm())
    }

    /// Curl as a function of the distance from the origin.
    pub fn curl_radial(&self, rho: f64) -> f64 {
        match self {
            Kernel::Constant { .. } => 0.0,
            Kernel::Isotropic { phi, .. } => phi.sin() * self.ring_profile(rho),
        }
    }

    /// True when the divergence vanishes identically.
    pub fn divergence_free(&self) -> bool {
        match self {
            Kernel::Constant { .. } => true,
            Kernel::Isotropic { phi, profile } => {
                phi.cos().abs() < 1e-15 || ring_profile_identically_zero(profile)
            }
        }
    }

    /// True when the curl vanishes identically.
    pub fn curl_free(&self) -> bool {
        match self {
            Kernel::Constant { .. } => true,
            Kernel::Isotropic { phi, profile } => {
                phi.sin().abs() < 1e-15 || ring_profile_identically_zero(profile)
            }
        }
    }

    /// True when the kernel is singular at the origin.
    pub fn singular_at_origin(&self) -> bool {
        match self {
            Kernel::Constant { .. } => false,
            Kernel::Isotropic { profile, .. } => profile.singular_at_origin(),
        }
    }

    /// Largest value of `|F(-q)|` over `q ∈ ∂R`, sampled densely enough to
    /// resolve the boundary components.
    pub fn max_norm_on_reflected_boundary(&self, set: &AmbitSet) -> f64 {
        let max_len = set.perimeter() / 2048.0;
        set.discretize_boundary(max_len)
            .iter()
            .map(|e| self.eval(-e.point).norm())
            .fold(0.0, f64::max)
    }

    /// Whether the kernel vanishes on the reflected boundary `-∂R`, the
    /// condition separating the boundary-driven small-radius regimes from
    /// the classical area-order one.
    pub fn vanishes_on_reflected_boundary(&self, set: &AmbitSet) -> bool {
        let scale = match self {
            Kernel::Constant { value } => value.norm(),
            Kernel::Isotropic { profile, .. } => {
                // Typical magnitude of F over the reflected boundary radii.
                let (lo, hi) = set.bbox();
                let rho = 0.5 * (lo.norm() + hi.norm()).max(1.0);
                profile.eval(rho).abs() * rho
            }
        };
        self.max_norm_on_reflected_boundary(set) <= 1e-12 * (1.0 + scale)
    }
}

fn ring_profile_identically_zero(profile: &RadialProfile) -> bool {
    // 2f + xf' ≡ 0 exactly for the inverse-square power law.
    matches!(
        profile,
        RadialProfile::PowerLaw { exponent, .. } if (*exponent + 2.0).abs() < 1e-15
    ) || matches!(
        profile,
        RadialProfile::PowerLaw { coefficient, .. } if *coefficient == 0.0
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn sample_kernels() -> Vec<Kernel> {
        vec![
            Kernel::constant(Vec2::new(1.0, -0.5)),
            Kernel::isotropic(0.0, RadialProfile::PowerLaw { coefficient: 0.7, exponent: 2.0 }),
            Kernel::isotropic(
                0.9,
                RadialProfile::Polynomial { coefficients: vec![1.0, 0.0, -2.0, 0.0, 1.0] },
            ),
            Kernel::isotropic(
                FRAC_PI_2,
                RadialProfile::BumpVanishing { amplitude: 1.3, center: 0.75, width: 0.2 },
            ),
            Kernel::isotropic(PI / 4.0, RadialProfile::PowerLaw { coefficient: 1.0, exponent: -2.0 }),
        ]
    }

    #[test]
    fn divergence_and_curl_match_finite_differences() {
        let h = 1e-5;
        for kernel in sample_kernels() {
            for q in [Vec2::new(0.8, 0.1), Vec2::new(-0.4, 0.6), Vec2::new(0.3, -0.9)] {
                let dxf = (kernel.eval(q + Vec2::new(h, 0.0)) - kernel.eval(q - Vec2::new(h, 0.0)))
                    * (0.5 / h);
                let dyf = (kernel.eval(q + Vec2::new(0.0, h)) - kernel.eval(q - Vec2::new(0.0, h)))
                    * (0.5 / h);
                let div_fd = dxf.x + dyf.y;
                let curl_fd = dxf.y - dyf.x;
                assert!(
                    (kernel.divergence(q) - div_fd).abs() < 2e-6 * (1.0 + div_fd.abs()),
                    "divergence mismatch for {kernel:?} at {q:?}: closed {}, fd {div_fd}",
                    kernel.divergence(q)
                );
                assert!(
                    (kernel.curl(q) - curl_fd).abs() < 2e-6 * (1.0 + curl_fd.abs()),
                    "curl mismatch for {kernel:?} at {q:?}: closed {}, fd {curl_fd}",
                    kernel.curl(q)
                );
            }
        }
    }

    #[test]
    fn inverse_square_profile_kills_both_invariants() {
        let kernel =
            Kernel::isotropic(0.3, RadialProfile::PowerLaw { coefficient: 2.0, exponent: -2.0 });
        assert!(kernel.divergence_free());
        assert!(kernel.curl_free());
        for rho in [0.2, 0.7, 1.9] {
            assert!(kernel.ring_profile(rho).abs() < 1e-12);
        }
        // But the field itself is far from zero.
        assert!(kernel.eval(Vec2::new(0.5, 0.0)).norm() > 1.0);
    }

    #[test]
    fn reflected_boundary_weights_are_radial_constants() {
        // On an origin-centered circle of radius ρ the flux weight
        // F(-ρu)·u = -ρ f(ρ) cos φ and the circulation weight
        // F(-ρu)·u⊥ = -ρ f(ρ) sin φ, independent of the angle.
        let phi = 0.6;
        let profile = RadialProfile::Polynomial { coefficients: vec![0.5, 1.5] };
        let kernel = Kernel::isotropic(phi, profile.clone());
        let rho = 1.3;
        for k in 0..16 {
            let u = Vec2::unit(2.0 * PI * k as f64 / 16.0);
            let val = kernel.eval(-u * rho);
            let flux_w = val.dot(u);
            let circ_w = val.dot(u.perp());
            assert!((flux_w - (-rho * profile.eval(rho) * phi.cos())).abs() < 1e-12);
            assert!((circ_w - (-rho * profile.eval(rho) * phi.sin())).abs() < 1e-12);
        }
    }

    #[test]
    fn bump_profile_is_smooth_and_compactly_supported() {
        let profile = RadialProfile::BumpVanishing { amplitude: 2.0, center: 0.75, width: 0.2 };
        assert_eq!(profile.eval(0.54), 0.0);
        assert_eq!(profile.eval(0.96), 0.0);
        assert!(profile.eval(0.75) > 0.0);
        assert!((profile.eval(0.75) - 2.0).abs() < 1e-12, "peak value is the amplitude");
        // Derivative matches finite differences inside the support.
        for x in [0.62, 0.75, 0.88] {
            let h = 1e-6;
            let fd = (profile.eval(x + h) - profile.eval(x - h)) / (2.0 * h);
            assert!((profile.deriv(x) - fd).abs() < 1e-5 * (1.0 + fd.abs()));
        }
        // Vanishes to all orders at the support edge: values decay fast.
        assert!(profile.eval(0.949) < 1e-8);
    }

    #[test]
    fn reflected_boundary_vanishing_check() {
        use crate::geometry::AmbitSet;
        let ring = AmbitSet::annulus(Vec2::ZERO, 0.5, 1.0);
        let bump = Kernel::isotropic(
            0.4,
            RadialProfile::BumpVanishing { amplitude: 1.0, center: 0.75, width: 0.2 },
        );
        assert!(
            bump.vanishes_on_reflected_boundary(&ring),
            "bump supported strictly inside the ring vanishes on both circles"
        );
        let poly = Kernel::isotropic(
            0.4,
            RadialProfile::Polynomial { coefficients: vec![1.0, 0.0, -2.0, 0.0, 1.0] },
        );
        let disk = AmbitSet::disk(Vec2::ZERO, 1.0);
        assert!(
            poly.vanishes_on_reflected_boundary(&disk),
            "(1-x²)² vanishes on the unit circle"
        );
        let constant = Kernel::constant(Vec2::new(1.0, 0.0));
        assert!(!constant.vanishes_on_reflected_boundary(&disk));
    }

    #[test]
    fn serde_round_trip() {
        let kernel = Kernel::isotropic(
            0.25,
            RadialProfile::BumpVanishing { amplitude: 1.0, center: 0.7, width: 0.1 },
        );
        let s = serde_json::to_string(&kernel).unwrap();
        assert!(s.contains("\"kind\":\"isotropic\""));
        assert!(s.contains("\"kind\":\"bump_vanishing\""));
        let back: Kernel = serde_json::from_str(&s).unwrap();
        assert_eq!(kernel, back);
    }
}
