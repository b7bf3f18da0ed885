//! Experiment harness: rate scans, distribution checks, invariance
//! batteries.
//!
//! Everything here is deterministic given the experiment seed: replicate
//! streams are derived from `(seed, tag, radius index, replicate index)`,
//! never from thread scheduling, so multi-threaded runs produce the same
//! numbers as single-threaded ones.

use crate::field::{realize_atoms, window_for, GridSpec};
use crate::functional::{
    chi_weight, functional_on_atoms, ChiRule, CircleFunctional, Decomposition, FluxPlan,
};
use crate::geometry::AmbitSet;
use crate::kernel::Kernel;
use crate::levy::{classify_regime, LevyMeasure, LimitSeed, Regime, Triplet, TripletSampler};
use crate::report::{CfSample, FunctionalSample};
use crate::rng::{derive_key, CounterRng};
use crate::vec2::Vec2;
use crate::{AmbitError, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

const TAG_SCAN: u64 = 0x5343414e; // "SCAN"
const TAG_POINTS: u64 = 0x504f494e; // "POIN"
const TAG_LIMIT: u64 = 0x4c494d54; // "LIMT"
const TAG_AUDIT: u64 = 0x41554454; // "AUDT"

/// Install an explicit global worker-pool size (no-op once a pool exists).
pub fn configure_threads(n: usize) {
    if n >= 1 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
    }
}

/// Set up the global worker pool from `AMBIT_THREADS` (default: all cores).
/// Returns the effective thread count.
pub fn configure_threads_from_env() -> usize {
    if let Ok(s) = std::env::var("AMBIT_THREADS") {
        if let Ok(n) = s.parse::<usize>() {
            if n >= 1 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .ok();
                return n;
            }
        }
    }
    rayon::current_num_threads()
}

// ---------------------------------------------------------------------------
// Order statistics and the log-log slope fit.
// ---------------------------------------------------------------------------

/// Linear-interpolation quantile of an unsorted sample.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    quantile_sorted(&sorted, q)
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let t = q * (n - 1) as f64;
    let i = (t.floor() as usize).min(n - 2);
    let frac = t - i as f64;
    sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

/// Interquartile range — the scale statistic used throughout (finite for
/// heavy-tailed laws, where sample variances are useless).
pub fn iqr(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25)
}

/// Ordinary least squares on (x, y) with a t-based confidence half-width
/// for the slope.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub se: f64,
    /// Half-width of the 95% confidence interval.
    pub ci_half: f64,
}

pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    let n = xs.len();
    if n < 3 || n != ys.len() {
        return Err(AmbitError::Config(
            "slope fit needs at least 3 matched points".into(),
        ));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(AmbitError::Numerical("degenerate abscissae in slope fit".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let dof = (n - 2) as f64;
    let se = (ssr / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| AmbitError::Numerical(format!("t quantile: {e}")))?
        .inverse_cdf(0.975);
    Ok(SlopeFit { slope, intercept, se, ci_half: t * se })
}

// ---------------------------------------------------------------------------
// Rate scans.
// ---------------------------------------------------------------------------

/// Which execution path realizes the basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanPath {
    /// Choose atoms for pure compound-Poisson bases, cell plans otherwise.
    Auto,
    CellPlans,
    Atoms,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanConfig {
    pub kernel: Kernel,
    pub set: AmbitSet,
    pub vol: crate::field::VolatilitySpec,
    pub triplet: Triplet,
    pub which: CircleFunctional,
    pub p: Vec2,
    pub radii: Vec<f64>,
    pub replicates: usize,
    /// θ-resolution recorded with each sample (the plan route resolves arcs
    /// exactly; this is the equivalent direct-definition resolution).
    pub n_theta: usize,
    pub h: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanRow {
    pub r: f64,
    pub median: f64,
    pub iqr: f64,
    pub normalizer: f64,
    pub normalized_iqr: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateScan {
    pub regime: Regime,
    pub rows: Vec<ScanRow>,
    pub fit: SlopeFit,
    #[serde(skip)]
    pub samples: Vec<FunctionalSample>,
}

impl RateScan {
    /// All draws recorded at radius `r` (in replicate order).
    pub fn values_at(&self, r: f64) -> Vec<f64> {
        self.samples
            .iter()
            .filter(|s| s.r == r)
            .map(|s| s.value)
            .collect()
    }
}

fn atoms_available(triplet: &Triplet) -> bool {
    triplet.b == 0.0 && matches!(triplet.nu, LevyMeasure::Cp { .. })
}

/// Shared per-radius execution state for scans.
struct ScanEngine {
    regime: Regime,
    use_atoms: bool,
    window: crate::field::Window,
    sampler: Option<TripletSampler>,
    spec: Option<GridSpec>,
}

impl ScanEngine {
    fn new(config: &ScanConfig, path: ScanPath) -> Result<ScanEngine> {
        config.kernel.validate()?;
        config.set.validate()?;
        config.triplet.validate()?;
        if config.radii.is_empty() || config.replicates < 8 {
            return Err(AmbitError::Config(
                "scan needs a radius grid and at least 8 replicates".into(),
            ));
        }
        let vanishes = config.kernel.vanishes_on_reflected_boundary(&config.set);
        let regime = classify_regime(&config.triplet, vanishes)?;
        let use_atoms = match path {
            ScanPath::Atoms => {
                if !atoms_available(&config.triplet) {
                    return Err(AmbitError::Unsupported(
                        "atom path requires a pure compound-Poisson basis".into(),
                    ));
                }
                true
            }
            ScanPath::CellPlans => false,
            ScanPath::Auto => atoms_available(&config.triplet),
        };
        let max_r = config.radii.iter().cloned().fold(0.0, f64::max);
        let window = window_for(&config.set, &[config.p], max_r, config.h);
        let sampler = if use_atoms { None } else { Some(TripletSampler::new(&config.triplet)?) };
        let spec = if use_atoms { None } else { Some(GridSpec::new(window, config.h)?) };
        Ok(ScanEngine { regime, use_atoms, window, sampler, spec })
    }

    /// Replicate values at radius index `ri` of the config's grid.  Streams
    /// are keyed by `(seed, radius index, replicate)`, so the same index
    /// yields the same draws whether or not other radii are evaluated.
    fn values(&self, config: &ScanConfig, ri: usize) -> Result<Vec<f64>> {
        let r = config.radii[ri];
        if self.use_atoms {
            (0..config.replicates)
                .into_par_iter()
                .map(|m| {
                    let key = derive_key(config.seed, &[TAG_SCAN, ri as u64, m as u64]);
                    let atoms = realize_atoms(&config.triplet, self.window, key)?;
                    functional_on_atoms(
                        &config.kernel,
                        &config.set,
                        &config.vol,
                        config.which,
                        config.p,
                        r,
                        &atoms,
                        ChiRule::ArcGauss,
                    )
                })
                .collect::<Result<Vec<f64>>>()
        } else {
            let plan = FluxPlan::build(
                &config.kernel,
                &config.set,
                &config.vol,
                config.which,
                config.p,
                r,
                self.spec.as_ref().unwrap(),
                ChiRule::ArcGauss,
            )?;
            let sampler = self.sampler.as_ref().unwrap();
            Ok((0..config.replicates)
                .into_par_iter()
                .map(|m| {
                    let key = derive_key(config.seed, &[TAG_SCAN, ri as u64, m as u64]);
                    plan.execute(sampler, key)
                })
                .collect())
        }
    }
}

/// Replicate draws at a single radius (the first entry of `config.radii`),
/// plus the classified regime — for distribution checks that need draws but
/// no rate fit.
pub struct RadiusDraws {
    pub regime: Regime,
    pub values: Vec<f64>,
}

pub fn draws_at_radius(config: &ScanConfig, path: ScanPath) -> Result<RadiusDraws> {
    let engine = ScanEngine::new(config, path)?;
    let values = engine.values(config, 0)?;
    Ok(RadiusDraws { regime: engine.regime, values })
}

/// Run a scale scan of the functional over the radius grid: `replicates`
/// independent fields per radius, robust scale per radius, and the log-log
/// slope of scale against radius.
pub fn run_scan(config: &ScanConfig, path: ScanPath) -> Result<RateScan> {
    if config.radii.len() < 3 {
        return Err(AmbitError::Config(
            "rate scan needs at least 3 radii for the slope fit".into(),
        ));
    }
    let engine = ScanEngine::new(config, path)?;
    let regime = engine.regime;
    let mut samples = Vec::with_capacity(config.radii.len() * config.replicates);
    let mut rows = Vec::with_capacity(config.radii.len());
    for (ri, &r) in config.radii.iter().enumerate() {
        let values = engine.values(config, ri)?;
        let normalizer = regime.normalizer(r);
        for (m, &v) in values.iter().enumerate() {
            samples.push(FunctionalSample {
                replicate: m,
                p: config.p,
                r,
                value: v,
                normalizer,
                n_theta: config.n_theta,
                seed: config.seed,
            });
        }
        let scale = iqr(&values);
        rows.push(ScanRow {
            r,
            median: median(&values),
            iqr: scale,
            normalizer,
            normalized_iqr: scale / normalizer,
        });
    }
    for row in &rows {
        if !(row.iqr > 0.0) {
            return Err(AmbitError::Numerical(format!(
                "degenerate scale at r = {} (IQR = {}); cannot fit a rate",
                row.r, row.iqr
            )));
        }
    }
    let xs: Vec<f64> = rows.iter().map(|row| row.r.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|row| row.iqr.ln()).collect();
    let fit = fit_slope(&xs, &ys)?;
    Ok(RateScan { regime, rows, fit, samples })
}

// ---------------------------------------------------------------------------
// Characteristic-function comparison.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CfReport {
    pub rows: Vec<CfSample>,
    pub sup_dist: f64,
    pub threshold: f64,
    pub pass: bool,
    pub replicates: usize,
}

/// Compare the empirical characteristic function of `draws` against an
/// exact oracle on `z_grid`.  The acceptance threshold is
/// `3/√M + slack` (Monte Carlo band plus a discretization allowance).
pub fn cf_compare<F>(draws: &[f64], z_grid: &[f64], slack: f64, oracle: F) -> Result<CfReport>
where
    F: Fn(f64) -> Result<Complex64>,
{
    if draws.is_empty() {
        return Err(AmbitError::Config("empirical CF needs draws".into()));
    }
    let m = draws.len() as f64;
    let mut rows = Vec::with_capacity(z_grid.len());
    let mut sup = 0.0f64;
    for &z in z_grid {
        let mut emp = Complex64::new(0.0, 0.0);
        for &x in draws {
            emp += Complex64::new(0.0, z * x).exp();
        }
        emp /= m;
        let oracle_v = oracle(z)?;
        sup = sup.max((emp - oracle_v).norm());
        rows.push(CfSample {
            z,
            emp_re: emp.re,
            emp_im: emp.im,
            oracle_re: oracle_v.re,
            oracle_im: oracle_v.im,
        });
    }
    let threshold = 3.0 / m.sqrt() + slack;
    Ok(CfReport { rows, sup_dist: sup, threshold, pass: sup <= threshold, replicates: draws.len() })
}

/// Symmetric grid of `n` points on `[-z_max, z_max]`.
pub fn symmetric_grid(z_max: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| -z_max + 2.0 * z_max * i as f64 / (n - 1) as f64)
        .collect()
}

/// Draw `m` realizations of the limit functional.
pub fn limit_draws(
    seed_law: &LimitSeed,
    elements: &[crate::functional::LimitElement],
    m: usize,
    seed: u64,
) -> Vec<f64> {
    let stream = derive_key(seed, &[TAG_LIMIT]);
    (0..m)
        .into_par_iter()
        .map(|k| {
            let mut rng = CounterRng::for_cell(stream, k as u64);
            crate::functional::sample_limit_functional(seed_law, elements, &mut rng)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Distribution equality (stationarity / isotropy checks).
// ---------------------------------------------------------------------------

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n, m) = (sa.len(), sb.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n && j < m {
        let x = sa[i].min(sb[j]);
        while i < n && sa[i] <= x {
            i += 1;
        }
        while j < m && sb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    d
}

/// KS rejection threshold at level α (asymptotic two-sample form).
pub fn ks_threshold(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Independent functional draws at several evaluation points (one plan per
/// point, independent replicate streams per point).
pub fn draws_at_points(
    kernel: &Kernel,
    set: &AmbitSet,
    vol: &crate::field::VolatilitySpec,
    triplet: &Triplet,
    which: CircleFunctional,
    points: &[Vec2],
    r: f64,
    h: f64,
    replicates: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let sampler = TripletSampler::new(triplet)?;
    let window = window_for(set, points, r, h);
    let spec = GridSpec::new(window, h)?;
    let mut out = Vec::with_capacity(points.len());
    for (pi, &p) in points.iter().enumerate() {
        let plan = FluxPlan::build(kernel, set, vol, which, p, r, &spec, ChiRule::ArcGauss)?;
        let values: Vec<f64> = (0..replicates)
            .into_par_iter()
            .map(|m| {
                let key = derive_key(seed, &[TAG_POINTS, pi as u64, m as u64]);
                plan.execute(&sampler, key)
            })
            .collect();
        out.push(values);
    }
    Ok(out)
}

/// Flux and circulation draws on the *same* realizations (coupled), for
/// invariance ratio tests.
pub fn coupled_pair_draws(
    kernel: &Kernel,
    set: &AmbitSet,
    vol: &crate::field::VolatilitySpec,
    triplet: &Triplet,
    p: Vec2,
    r: f64,
    h: f64,
    replicates: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let sampler = TripletSampler::new(triplet)?;
    let window = window_for(set, &[p], r, h);
    let spec = GridSpec::new(window, h)?;
    let flux_plan = FluxPlan::build(
        kernel,
        set,
        vol,
        CircleFunctional::Flux,
        p,
        r,
        &spec,
        ChiRule::ArcGauss,
    )?;
    let circ_plan = FluxPlan::build(
        kernel,
        set,
        vol,
        CircleFunctional::Circulation,
        p,
        r,
        &spec,
        ChiRule::ArcGauss,
    )?;
    let pairs: Vec<(f64, f64)> = (0..replicates)
        .into_par_iter()
        .map(|m| {
            let key = derive_key(seed, &[TAG_POINTS, u64::MAX, m as u64]);
            (flux_plan.execute(&sampler, key), circ_plan.execute(&sampler, key))
        })
        .collect();
    Ok(pairs.into_iter().unzip())
}

// ---------------------------------------------------------------------------
// Decomposition audit.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionAudit {
    pub replicates: usize,
    /// Worst relative gap between the direct definition and the reordered
    /// per-atom trapezoid sum.
    pub worst_direct_gap: f64,
    /// Worst relative gap between the smooth-route total and its
    /// interior + boundary split recombination.
    pub worst_split_gap: f64,
    /// Worst relative gap between the smooth and trapezoid routes (bounded
    /// by the θ-discretization error, reported for context).
    pub worst_route_gap: f64,
}

pub fn decomposition_audit(
    kernel: &Kernel,
    set: &AmbitSet,
    vol: &crate::field::VolatilitySpec,
    which: CircleFunctional,
    triplet: &Triplet,
    p: Vec2,
    r: f64,
    n_theta: usize,
    replicates: usize,
    seed: u64,
) -> Result<DecompositionAudit> {
    let window = window_for(set, &[p], r, 0.01);
    let mut worst_direct = 0.0f64;
    let mut worst_split = 0.0f64;
    let mut worst_route = 0.0f64;
    let decomps: Vec<Decomposition> = (0..replicates)
        .into_par_iter()
        .map(|m| {
            let key = derive_key(seed, &[TAG_AUDIT, m as u64]);
            let atoms = realize_atoms(triplet, window, key)?;
            crate::functional::decompose_on_atoms(kernel, set, vol, which, p, r, n_theta, &atoms)
        })
        .collect::<Result<Vec<_>>>()?;
    for d in &decomps {
        // Condition on the L¹ mass of the contributions; a realization with
        // no atoms near the circle has every route ≈ 0 and carries no
        // information about the identity.
        let scale = d.scale.max(d.direct.abs()).max(1e-9);
        worst_direct = worst_direct.max((d.direct - d.by_weights_trapezoid).abs() / scale);
        worst_split =
            worst_split.max((d.by_weights_smooth - (d.interior + d.boundary)).abs() / scale);
        worst_route = worst_route.max((d.by_weights_smooth - d.by_weights_trapezoid).abs() / scale);
    }
    Ok(DecompositionAudit {
        replicates,
        worst_direct_gap: worst_direct,
        worst_split_gap: worst_split,
        worst_route_gap: worst_route,
    })
}

/// Exact directional fourth cumulant shape of the field at the origin:
/// `∫_R (F(-q)·e_α)⁴ dq`.  The fourth cumulant of `X(0)·e_α` equals this
/// integral times the seed's fourth cumulant, so for a non-Gaussian basis
/// the map `α ↦ value` is constant exactly when the one-point law is
/// isotropic.
pub fn directional_fourth_moment(
    kernel: &Kernel,
    set: &AmbitSet,
    alpha: f64,
    n_rad: usize,
    n_ang: usize,
) -> Result<f64> {
    let e = Vec2::unit(alpha);
    let nodes = crate::geometry::region_quadrature(set, n_rad, n_ang)?;
    Ok(nodes
        .iter()
        .map(|n| {
            let proj = kernel.eval(-n.q).dot(e);
            n.w * proj * proj * proj * proj
        })
        .sum())
}

/// Collar χ values along the transverse profile, in units of `r`, for
/// boundary diagnostics: offsets `t ∈ (-1, 1)` map to `foot + t·r·n`.
pub fn transverse_profile(
    kernel: &Kernel,
    set: &AmbitSet,
    which: CircleFunctional,
    foot: Vec2,
    normal: Vec2,
    r: f64,
    ts: &[f64],
) -> Vec<f64> {
    ts.iter()
        .map(|&t| chi_weight(kernel, set, which, foot + normal * (t * r), r, ChiRule::ArcGauss))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::VolatilitySpec;
    use crate::levy::JumpDistribution;

    #[test]
    fn quantiles_and_iqr_match_hand_values() {
        let v = vec![4.0, 1.0, 3.0, 2.0];
        assert!((median(&v) - 2.5).abs() < 1e-12);
        assert!((quantile(&v, 0.25) - 1.75).abs() < 1e-12);
        assert!((iqr(&v) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn slope_fit_recovers_exact_power_law() {
        let xs: Vec<f64> = [0.01f64, 0.02, 0.04, 0.08].iter().map(|r| r.ln()).collect();
        let ys: Vec<f64> = [0.01f64, 0.02, 0.04, 0.08]
            .iter()
            .map(|r| (3.0 * r.powf(1.5)).ln())
            .collect();
        let fit = fit_slope(&xs, &ys).unwrap();
        assert!((fit.slope - 1.5).abs() < 1e-12);
        assert!(fit.ci_half < 1e-9, "exact data has a vanishing CI");
    }

    #[test]
    fn ks_statistic_detects_shift_and_accepts_identity() {
        let a: Vec<f64> = (0..500).map(|i| i as f64 / 500.0).collect();
        let b: Vec<f64> = (0..500).map(|i| i as f64 / 500.0 + 0.3).collect();
        assert!(ks_two_sample(&a, &a) < 1e-12);
        assert!(ks_two_sample(&a, &b) > 0.25);
        assert!(ks_threshold(500, 500, 0.01) < 0.11);
    }

    #[test]
    fn gaussian_scan_recovers_the_boundary_rate() {
        // Small, fast scan: Gaussian basis, constant kernel, coarse cells.
        // The IQR of the flux scales like r^{3/2}.
        let config = ScanConfig {
            kernel: Kernel::constant(Vec2::new(1.0, 0.0)),
            set: AmbitSet::disk(Vec2::ZERO, 1.0),
            vol: VolatilitySpec::One,
            triplet: Triplet::gaussian(1.0),
            which: CircleFunctional::Flux,
            p: Vec2::new(0.1, 0.0),
            radii: vec![0.16, 0.08, 0.04],
            replicates: 400,
            n_theta: 256,
            h: 0.004,
            seed: 11,
        };
        let scan = run_scan(&config, ScanPath::CellPlans).unwrap();
        assert_eq!(scan.regime, Regime::GaussianAttractor);
        assert!(
            (scan.fit.slope - 1.5).abs() < 0.12,
            "slope {} ± {}",
            scan.fit.slope,
            scan.fit.ci_half
        );
    }

    #[test]
    fn atom_scan_matches_auto_path_selection() {
        let jumps = JumpDistribution::Gaussian { mean: 0.0, std: 1.0 };
        let triplet = Triplet::new(0.0, 0.0, LevyMeasure::Cp { rate: 4.0, jumps });
        let config = ScanConfig {
            kernel: Kernel::isotropic(
                0.3,
                crate::kernel::RadialProfile::Polynomial {
                    coefficients: vec![1.0, 0.0, -2.0, 0.0, 1.0],
                },
            ),
            set: AmbitSet::disk(Vec2::ZERO, 1.0),
            vol: VolatilitySpec::One,
            triplet,
            which: CircleFunctional::Flux,
            p: Vec2::ZERO,
            radii: vec![0.2, 0.1, 0.05],
            replicates: 64,
            n_theta: 256,
            h: 0.01,
            seed: 5,
        };
        let scan = run_scan(&config, ScanPath::Auto).unwrap();
        assert_eq!(scan.regime, Regime::Classical);
        assert_eq!(scan.samples.len(), 3 * 64);
        // Atom path was selected: rerunning with the explicit path gives
        // identical values.
        let scan2 = run_scan(&config, ScanPath::Atoms).unwrap();
        assert_eq!(scan.values_at(0.1), scan2.values_at(0.1));
    }

    #[test]
    fn cf_compare_accepts_matching_law() {
        // Standard normal draws against the exact normal CF.
        let mut rng = CounterRng::new(99, &[7]);
        let draws: Vec<f64> = (0..4000).map(|_| rng.normal()).collect();
        let grid = symmetric_grid(2.0, 21);
        let report = cf_compare(&draws, &grid, 0.01, |z| {
            Ok(Complex64::new((-0.5 * z * z).exp(), 0.0))
        })
        .unwrap();
        assert!(report.pass, "sup dist {} vs {}", report.sup_dist, report.threshold);
        // A mismatched oracle fails.
        let bad = cf_compare(&draws, &grid, 0.01, |z| {
            Ok(Complex64::new((-2.0 * z * z).exp(), 0.0))
        })
        .unwrap();
        assert!(!bad.pass);
    }
}
