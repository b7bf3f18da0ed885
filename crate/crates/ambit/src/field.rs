//! Field realization engine.
//!
//! A homogeneous independently-scattered basis is materialized over a
//! rectangular window of square cells: the basis mass of each cell is an
//! independent draw from the cell law held by a
//! [`TripletSampler`](crate::levy::TripletSampler), keyed by the cell index
//! through the counter RNG.  Because every cell owns an independent
//! substream, a "lazy" consumer that touches only some cells (the flux
//! plans) sees exactly the same values as a fully materialized grid — the
//! two access patterns are pathwise identical, not merely equal in law.
//!
//! For compound-Poisson bases the module also offers an exact atom
//! realization (finite jump list plus deterministic drift density), which
//! sidesteps cell discretization entirely.

use crate::geometry::{region_quadrature, AmbitSet};
use crate::kernel::Kernel;
use crate::levy::{Triplet, TripletSampler};
use crate::rng::CounterRng;
use crate::vec2::Vec2;
use crate::{AmbitError, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::{Read, Write};

/// Axis-aligned simulation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: Vec2,
    pub hi: Vec2,
}

impl Window {
    pub fn new(lo: Vec2, hi: Vec2) -> Self {
        Window { lo, hi }
    }

    pub fn contains(&self, q: Vec2) -> bool {
        q.x >= self.lo.x && q.x <= self.hi.x && q.y >= self.lo.y && q.y <= self.hi.y
    }

    pub fn area(&self) -> f64 {
        (self.hi.x - self.lo.x).max(0.0) * (self.hi.y - self.lo.y).max(0.0)
    }
}

/// Window covering `R + p` for every evaluation point, padded by the probe
/// radius and a few cells of slack so no touched cell can fall outside.
pub fn window_for(set: &AmbitSet, points: &[Vec2], max_r: f64, h: f64) -> Window {
    let (set_lo, set_hi) = set.bbox();
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &p in points {
        lo = Vec2::new(lo.x.min(set_lo.x + p.x), lo.y.min(set_lo.y + p.y));
        hi = Vec2::new(hi.x.max(set_hi.x + p.x), hi.y.max(set_hi.y + p.y));
    }
    let pad = max_r + 5.0 * h;
    Window::new(lo - Vec2::new(pad, pad), hi + Vec2::new(pad, pad))
}

/// A window partitioned into square cells of side `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub window: Window,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    /// Cover `window` with cells of side `h` (the window is expanded to a
    /// whole number of cells on the high side).
    pub fn new(window: Window, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(AmbitError::Config("cell size h must be > 0".into()));
        }
        let nx = ((window.hi.x - window.lo.x) / h).ceil().max(1.0) as usize;
        let ny = ((window.hi.y - window.lo.y) / h).ceil().max(1.0) as usize;
        if nx.saturating_mul(ny) > 1 << 28 {
            return Err(AmbitError::Config(format!(
                "grid of {nx}×{ny} cells is too large; increase h or shrink the window"
            )));
        }
        let hi = Vec2::new(window.lo.x + nx as f64 * h, window.lo.y + ny as f64 * h);
        Ok(GridSpec { window: Window::new(window.lo, hi), h, nx, ny })
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Vec2 {
        Vec2::new(
            self.window.lo.x + (ix as f64 + 0.5) * self.h,
            self.window.lo.y + (iy as f64 + 0.5) * self.h,
        )
    }

    pub fn cell_index(&self, ix: usize, iy: usize) -> u64 {
        (iy * self.nx + ix) as u64
    }

    /// Index range of cells whose centers fall in `[lo, hi]`, clamped to
    /// the grid.
    pub fn cells_overlapping(&self, lo: Vec2, hi: Vec2) -> (usize, usize, usize, usize) {
        let ix0 = (((lo.x - self.window.lo.x) / self.h - 0.5).floor().max(0.0)) as usize;
        let iy0 = (((lo.y - self.window.lo.y) / self.h - 0.5).floor().max(0.0)) as usize;
        let ix1 = ((((hi.x - self.window.lo.x) / self.h - 0.5).ceil()).max(0.0) as usize)
            .min(self.nx.saturating_sub(1));
        let iy1 = ((((hi.y - self.window.lo.y) / self.h - 0.5).ceil()).max(0.0) as usize)
            .min(self.ny.saturating_sub(1));
        (ix0.min(self.nx.saturating_sub(1)), ix1, iy0.min(self.ny.saturating_sub(1)), iy1)
    }
}

/// Deterministic volatility factor `V(q)` for weighted integrals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VolatilitySpec {
    /// `V ≡ 1` (plain, stationary field).
    One,
    /// `V(q) = 1 + amplitude · exp(1 - 1/(1 - t²))`, `t = |q - center|/radius`:
    /// a smooth localized thickening of the basis.
    RadialBump { center: Vec2, amplitude: f64, radius: f64 },
}

impl VolatilitySpec {
    pub fn eval(&self, q: Vec2) -> f64 {
        match self {
            VolatilitySpec::One => 1.0,
            VolatilitySpec::RadialBump { center, amplitude, radius } => {
                let t = (q - *center).norm() / radius;
                if t >= 1.0 {
                    1.0
                } else {
                    1.0 + amplitude * (1.0 - 1.0 / (1.0 - t * t)).exp()
                }
            }
        }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, VolatilitySpec::One)
    }
}

/// Fully materialized basis masses per cell.
#[derive(Debug, Clone)]
pub struct GridRealization {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

/// Exact compound-Poisson realization: atoms plus a deterministic drift
/// density (the truncation-compensated drift of the basis).
#[derive(Debug, Clone)]
pub struct AtomRealization {
    pub window: Window,
    pub atoms: Vec<(Vec2, f64)>,
    pub drift_density: f64,
}

/// A realized basis over a window, in one of the two representations.
#[derive(Debug, Clone)]
pub enum LevyRealization {
    Grid(GridRealization),
    Atoms(AtomRealization),
}

/// Materialize every cell of `spec` under the sampler, using the per-cell
/// substreams of `stream_key`.
pub fn realize_grid(sampler: &TripletSampler, spec: &GridSpec, stream_key: u64) -> GridRealization {
    let area = spec.cell_area();
    let mut values = vec![0.0; spec.n_cells()];
    for iy in 0..spec.ny {
        for ix in 0..spec.nx {
            let idx = spec.cell_index(ix, iy);
            let mut rng = CounterRng::for_cell(stream_key, idx);
            values[idx as usize] = sampler.sample_cell(area, &mut rng);
        }
    }
    GridRealization { spec: spec.clone(), values }
}

/// Exact atom realization of a compound-Poisson basis over `window`.
///
/// Requires a pure-jump-plus-drift triplet (`b = 0`, compound-Poisson jump
/// part); other bases have infinitely many small jumps and only admit cell
/// approximations.
pub fn realize_atoms(triplet: &Triplet, window: Window, stream_key: u64) -> Result<AtomRealization> {
    triplet.validate()?;
    let (rate, jumps) = match &triplet.nu {
        crate::levy::LevyMeasure::Cp { rate, jumps } => (*rate, jumps.clone()),
        _ => {
            return Err(AmbitError::Unsupported(
                "exact atom realizations require a compound-Poisson jump part".into(),
            ))
        }
    };
    if triplet.b != 0.0 {
        return Err(AmbitError::Unsupported(
            "exact atom realizations require b = 0 (no Gaussian component)".into(),
        ));
    }
    let mut rng = CounterRng::for_cell(stream_key, u64::MAX);
    let n = rng.poisson(rate * window.area());
    let mut atoms = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let x = window.lo.x + (window.hi.x - window.lo.x) * rng.uniform();
        let y = window.lo.y + (window.hi.y - window.lo.y) * rng.uniform();
        atoms.push((Vec2::new(x, y), jumps.sample(&mut rng)));
    }
    let drift_density = triplet.gamma - rate * jumps.truncated_mean(1.0);
    Ok(AtomRealization { window, atoms, drift_density })
}

/// Evaluate the field `X(p) = ∫_{R+p} F(p - q) V(q) L(dq)` on a realization.
pub fn eval_field(
    kernel: &Kernel,
    set: &AmbitSet,
    vol: &VolatilitySpec,
    p: Vec2,
    realization: &LevyRealization,
) -> Result<Vec2> {
    match realization {
        LevyRealization::Grid(grid) => {
            let (set_lo, set_hi) = set.bbox();
            let (ix0, ix1, iy0, iy1) =
                grid.spec.cells_overlapping(set_lo + p, set_hi + p);
            let mut acc = Vec2::ZERO;
            for iy in iy0..=iy1 {
                for ix in ix0..=ix1 {
                    let c = grid.spec.cell_center(ix, iy);
                    if set.contains(c - p) {
                        let v = grid.values[grid.spec.cell_index(ix, iy) as usize];
                        acc += kernel.eval(p - c) * (v * vol.eval(c));
                    }
                }
            }
            Ok(acc)
        }
        LevyRealization::Atoms(atoms) => {
            let mut acc = Vec2::ZERO;
            for &(q, mass) in &atoms.atoms {
                if set.contains(q - p) {
                    acc += kernel.eval(p - q) * (mass * vol.eval(q));
                }
            }
            if atoms.drift_density != 0.0 {
                // ∫_{R+p} F(p-q) V(q) dq = ∫_R F(-w) V(p+w) dw.
                let nodes = region_quadrature(set, 24, 128)?;
                let mut drift = Vec2::ZERO;
                for node in nodes {
                    drift += kernel.eval(-node.q) * (node.w * vol.eval(p + node.q));
                }
                acc += drift * atoms.drift_density;
            }
            Ok(acc)
        }
    }
}

// ---------------------------------------------------------------------------
// Binary dump / replay.
// ---------------------------------------------------------------------------

const DUMP_MAGIC: &[u8; 8] = b"AMBITFLD";
const DUMP_VERSION: u32 = 1;

/// Stable hash of the generating model configuration, stored in dumps so a
/// replay under a different model is rejected.
pub fn config_hash(triplet: &Triplet) -> Result<[u8; 32]> {
    let json = serde_json::to_string(triplet)?;
    let mut hasher = Sha256::new();
    hasher.update(json.as_bytes());
    Ok(hasher.finalize().into())
}

impl GridRealization {
    /// Write the realization with a self-describing header: window, cell
    /// size, grid shape, and the hash of the generating triplet.
    pub fn dump<W: Write>(&self, out: &mut W, triplet: &Triplet) -> Result<()> {
        out.write_all(DUMP_MAGIC)?;
        out.write_all(&DUMP_VERSION.to_le_bytes())?;
        for v in [
            self.spec.window.lo.x,
            self.spec.window.lo.y,
            self.spec.window.hi.x,
            self.spec.window.hi.y,
            self.spec.h,
        ] {
            out.write_all(&v.to_le_bytes())?;
        }
        out.write_all(&(self.spec.nx as u64).to_le_bytes())?;
        out.write_all(&(self.spec.ny as u64).to_le_bytes())?;
        out.write_all(&config_hash(triplet)?)?;
        for v in &self.values {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Read a dumped realization back, verifying the header and the model
    /// hash.
    pub fn replay<R: Read>(input: &mut R, triplet: &Triplet) -> Result<GridRealization> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != DUMP_MAGIC {
            return Err(AmbitError::Config("not a field dump (bad magic)".into()));
        }
        let mut b4 = [0u8; 4];
        input.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != DUMP_VERSION {
            return Err(AmbitError::Config(format!("unsupported dump version {version}")));
        }
        let mut b8 = [0u8; 8];
        let mut next = || -> Result<f64> {
            input.read_exact(&mut b8)?;
            Ok(f64::from_le_bytes(b8))
        };
        let (lx, ly, hx, hy, h) = (next()?, next()?, next()?, next()?, next()?);
        let mut b8 = [0u8; 8];
        input.read_exact(&mut b8)?;
        let nx = u64::from_le_bytes(b8) as usize;
        input.read_exact(&mut b8)?;
        let ny = u64::from_le_bytes(b8) as usize;
        let mut hash = [0u8; 32];
        input.read_exact(&mut hash)?;
        if hash != config_hash(triplet)? {
            return Err(AmbitError::Config(
                "dump was generated under a different model configuration (hash mismatch)".into(),
            ));
        }
        let mut values = vec![0.0; nx * ny];
        for v in &mut values {
            input.read_exact(&mut b8)?;
            *v = f64::from_le_bytes(b8);
        }
        Ok(GridRealization {
            spec: GridSpec {
                window: Window::new(Vec2::new(lx, ly), Vec2::new(hx, hy)),
                h,
                nx,
                ny,
            },
            values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{JumpDistribution, LevyMeasure};
    use std::f64::consts::PI;

    #[test]
    fn grid_spec_rounds_up_to_whole_cells() {
        let spec = GridSpec::new(Window::new(Vec2::ZERO, Vec2::new(1.05, 0.95)), 0.1).unwrap();
        assert_eq!((spec.nx, spec.ny), (11, 10));
        assert!((spec.window.hi.x - 1.1).abs() < 1e-12);
        let c = spec.cell_center(0, 0);
        assert!((c - Vec2::new(0.05, 0.05)).norm() < 1e-12);
    }

    #[test]
    fn deterministic_drift_field_matches_area_integral() {
        // Pure drift basis: X(p) = v · γ · |R| for a constant kernel,
        // approximated by the cell sum to O(h · perimeter).
        let triplet = Triplet::new(0.7, 0.0, LevyMeasure::None);
        let sampler = TripletSampler::new(&triplet).unwrap();
        let set = AmbitSet::disk(Vec2::ZERO, 1.0);
        let p = Vec2::new(0.3, -0.2);
        let window = window_for(&set, &[p], 0.0, 0.01);
        let spec = GridSpec::new(window, 0.01).unwrap();
        let grid = realize_grid(&sampler, &spec, 42);
        let kernel = Kernel::constant(Vec2::new(2.0, -1.0));
        let x = eval_field(&kernel, &set, &VolatilitySpec::One, p, &LevyRealization::Grid(grid))
            .unwrap();
        let want = Vec2::new(2.0, -1.0) * (0.7 * PI);
        assert!(
            (x - want).norm() < 0.7 * 0.01 * (2.0 * PI) * 3.0,
            "drift field {x:?} vs exact {want:?}"
        );
    }

    #[test]
    fn atom_field_is_exact_for_hand_built_atoms() {
        let set = AmbitSet::disk(Vec2::ZERO, 1.0);
        let kernel = Kernel::isotropic(
            0.0,
            crate::kernel::RadialProfile::PowerLaw { coefficient: 1.0, exponent: 2.0 },
        );
        let atoms = AtomRealization {
            window: Window::new(Vec2::new(-2.0, -2.0), Vec2::new(2.0, 2.0)),
            atoms: vec![(Vec2::new(0.5, 0.0), 2.0), (Vec2::new(5.0, 5.0), 100.0)],
            drift_density: 0.0,
        };
        let p = Vec2::new(0.2, 0.1);
        let x = eval_field(&kernel, &set, &VolatilitySpec::One, p, &LevyRealization::Atoms(atoms))
            .unwrap();
        // Only the first atom lies in R + p; F(p - q) = (p-q)|p-q|².
        let d = p - Vec2::new(0.5, 0.0);
        let want = d * (d.norm_sq() * 2.0);
        assert!((x - want).norm() < 1e-12);
    }

    #[test]
    fn volatility_bump_scales_atom_contributions() {
        let set = AmbitSet::disk(Vec2::ZERO, 1.0);
        let kernel = Kernel::constant(Vec2::new(1.0, 0.0));
        let q0 = Vec2::new(0.5, 0.0);
        let atoms = AtomRealization {
            window: Window::new(Vec2::new(-2.0, -2.0), Vec2::new(2.0, 2.0)),
            atoms: vec![(q0, 1.0)],
            drift_density: 0.0,
        };
        let vol = VolatilitySpec::RadialBump { center: q0, amplitude: 0.5, radius: 0.3 };
        let x = eval_field(&kernel, &set, &vol, Vec2::ZERO, &LevyRealization::Atoms(atoms))
            .unwrap();
        assert!((x.x - 1.5).abs() < 1e-12, "bump peak multiplies the atom by 1.5");
    }

    #[test]
    fn atom_realization_matches_grid_realization_in_mean() {
        // Same CP basis realized as exact atoms and as cells: means of
        // X(p) under a constant kernel agree (law-level check, small M).
        let jumps = JumpDistribution::Point { value: 1.0 };
        let triplet = Triplet::new(0.0, 0.0, LevyMeasure::Cp { rate: 3.0, jumps });
        let sampler = TripletSampler::new(&triplet).unwrap();
        let set = AmbitSet::disk(Vec2::ZERO, 0.8);
        let kernel = Kernel::constant(Vec2::new(1.0, 0.0));
        let window = window_for(&set, &[Vec2::ZERO], 0.0, 0.05);
        let spec = GridSpec::new(window, 0.05).unwrap();
        let m = 400;
        let mut mean_grid = 0.0;
        let mut mean_atoms = 0.0;
        for k in 0..m {
            let grid = realize_grid(&sampler, &spec, 1000 + k);
            mean_grid += eval_field(
                &kernel,
                &set,
                &VolatilitySpec::One,
                Vec2::ZERO,
                &LevyRealization::Grid(grid),
            )
            .unwrap()
            .x;
            let atoms = realize_atoms(&triplet, window, 5000 + k).unwrap();
            mean_atoms += eval_field(
                &kernel,
                &set,
                &VolatilitySpec::One,
                Vec2::ZERO,
                &LevyRealization::Atoms(atoms),
            )
            .unwrap()
            .x;
        }
        mean_grid /= m as f64;
        mean_atoms /= m as f64;
        // E X = (γ_cp-mean shift) — with drift compensation both estimate
        // rate·E[J]·|R| + (γ - rate E[J1])·|R| = |R|·(γ + rate·E[J 1_{|J|>1}])
        // = |R| · 0 + rate·|R|·1... for unit jumps: drift_density = -3·1? No:
        // E L(A) = |A|(γ + rate·E[J·1_{|J|>1}]) = 0 here (γ=0, |J|=1 ≤ 1 so
        // the big-jump part is empty and the compensator cancels the atoms
        // in expectation)... the truncation keeps E[J 1_{|J|≤1}] = 1
        // compensated, so E X = 0 for both paths.
        let tol = 4.0 * (3.0 * PI * 0.64f64).sqrt() / (m as f64).sqrt();
        assert!(mean_grid.abs() < tol, "grid mean {mean_grid} vs tolerance {tol}");
        assert!(mean_atoms.abs() < tol, "atom mean {mean_atoms} vs tolerance {tol}");
        assert!(
            (mean_grid - mean_atoms).abs() < 2.0 * tol,
            "paths disagree: {mean_grid} vs {mean_atoms}"
        );
    }

    #[test]
    fn dump_replay_round_trips_and_rejects_wrong_model() {
        let triplet = Triplet::gaussian(1.0);
        let sampler = TripletSampler::new(&triplet).unwrap();
        let spec =
            GridSpec::new(Window::new(Vec2::new(-0.5, -0.5), Vec2::new(0.5, 0.5)), 0.1).unwrap();
        let grid = realize_grid(&sampler, &spec, 7);
        let mut buf = Vec::new();
        grid.dump(&mut buf, &triplet).unwrap();
        let back = GridRealization::replay(&mut buf.as_slice(), &triplet).unwrap();
        assert_eq!(back.spec, grid.spec);
        assert_eq!(back.values, grid.values);
        let other = Triplet::gaussian(2.0);
        let err = GridRealization::replay(&mut buf.as_slice(), &other).unwrap_err();
        assert!(err.to_string().contains("hash mismatch"), "got: {err}");
        let err = GridRealization::replay(&mut b"NOTADUMP".as_slice(), &triplet).unwrap_err();
        assert!(err.to_string().contains("magic"), "got: {err}");
    }

    #[test]
    fn atom_realization_rejects_non_cp_bases() {
        let window = Window::new(Vec2::ZERO, Vec2::new(1.0, 1.0));
        assert!(realize_atoms(&Triplet::gaussian(1.0), window, 1).is_err());
        let stable = Triplet::strictly_stable(1.0, 1.0, 1.5);
        assert!(realize_atoms(&stable, window, 1).is_err());
    }
}
