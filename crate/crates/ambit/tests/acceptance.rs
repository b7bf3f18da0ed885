//! Acceptance battery: one test per advertised guarantee of the engine.
//! Each test prints a single `ACCEPTANCE <name>: PASS/FAIL (...)` line
//! (visible under `--nocapture`) and then asserts the verdict, including
//! the per-criterion runtime budget.

mod common;

use ambit::field::VolatilitySpec;
use ambit::functional::{
    cf_limit_exact, limit_boundary_elements, line_integral, CircleFunctional,
};
use ambit::geometry::AmbitSet;
use ambit::kernel::{Kernel, RadialProfile};
use ambit::lab::{self, ScanConfig, ScanPath};
use ambit::levy::{
    v_beta, JumpDistribution, LevyMeasure, LimitSeed, Regime, Triplet,
};
use ambit::quad::GaussLegendre;
use ambit::Vec2;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::time::Instant;

fn verdict(name: &str, pass: bool, budget_s: f64, t0: Instant, details: &str) {
    let elapsed = t0.elapsed().as_secs_f64();
    let ok = pass && elapsed <= budget_s;
    println!(
        "ACCEPTANCE {name}: {} ({details}; {elapsed:.1}s of {budget_s:.0}s budget)",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "{name}: {details} (elapsed {elapsed:.1}s, budget {budget_s:.0}s)");
}

fn sup_cf_distance<F: Fn(f64) -> Complex64>(draws: &[f64], grid: &[f64], oracle: F) -> f64 {
    let m = draws.len() as f64;
    grid.iter()
        .map(|&z| {
            let mut emp = Complex64::new(0.0, 0.0);
            for &x in draws {
                emp += Complex64::new(0.0, z * x).exp();
            }
            (emp / m - oracle(z)).norm()
        })
        .fold(0.0, f64::max)
}

fn bump_free_profile() -> RadialProfile {
    RadialProfile::Polynomial { coefficients: vec![1.0, 0.0, -2.0, 0.0, 1.0] }
}

fn radius_grid() -> Vec<f64> {
    vec![0.04, 0.028, 0.02, 0.014, 0.01]
}

fn cp_basis(rate: f64) -> Triplet {
    Triplet::new(
        0.0,
        0.0,
        LevyMeasure::Cp { rate, jumps: JumpDistribution::Gaussian { mean: 0.0, std: 1.0 } },
    )
}

/// Circle averages of an injected smooth field recover its divergence and
/// curl at second order (machine-exact for quadratic fields).
#[test]
fn circle_stokes_oracle() {
    let t0 = Instant::now();
    let g = |q: Vec2| Vec2::new(q.x * q.x, q.x * q.y);
    let points = [Vec2::new(0.7, -0.3), Vec2::new(-1.2, 0.5), Vec2::new(0.1, 2.0)];
    let r = 1e-2;
    let mut worst = 0.0f64;
    for p in points {
        let area = PI * r * r;
        let flux = line_integral(g, CircleFunctional::Flux, p, r, 512);
        let circ = line_integral(g, CircleFunctional::Circulation, p, r, 512);
        worst = worst.max((flux / area - 3.0 * p.x).abs() / (3.0 * p.x).abs());
        worst = worst.max((circ / area - p.y).abs() / p.y.abs());
    }

    // Convergence order in r (quadratic test field: the trapezoid rule is
    // exact, so errors sit at rounding level and the order check is
    // satisfied by the machine floor).
    let p = points[0];
    let errs: Vec<f64> = [0.04, 0.02, 0.01]
        .iter()
        .map(|&rr| {
            (line_integral(g, CircleFunctional::Flux, p, rr, 512) / (PI * rr * rr)
                - 3.0 * p.x)
                .abs()
                / (3.0 * p.x).abs()
        })
        .collect();
    let floor = errs.iter().all(|e| *e < 1e-12);
    let order_ok = floor || {
        let o1 = (errs[0] / errs[1]).log2();
        let o2 = (errs[1] / errs[2]).log2();
        o1 >= 1.9 && o2 >= 1.9
    };
    verdict(
        "circle-stokes-oracle",
        worst < 1e-3 && order_ok,
        10.0,
        t0,
        &format!(
            "worst relative error {worst:.2e}, convergence {}",
            if floor { "exact to rounding" } else { "second order" }
        ),
    );
}

/// The three evaluation routes for the functional agree pathwise on random
/// compound-Poisson realizations: direct = reordered trapezoid, and the
/// independent smooth total = interior + boundary split.
#[test]
fn decomposition_identity() {
    let t0 = Instant::now();
    let shapes = [
        AmbitSet::disk(Vec2::ZERO, 1.0),
        AmbitSet::polygon(vec![
            Vec2::new(-1.0, -1.0),
            Vec2::new(1.0, -1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
        ]),
        AmbitSet::annulus(Vec2::ZERO, 0.5, 1.0),
    ];
    let kernels = [
        (Kernel::isotropic(0.4, bump_free_profile()), CircleFunctional::Flux),
        (
            Kernel::isotropic(-1.1, RadialProfile::Polynomial { coefficients: vec![0.5, 1.0, -1.0] }),
            CircleFunctional::Circulation,
        ),
    ];
    let triplet = cp_basis(16.0);
    let mut worst_direct = 0.0f64;
    let mut worst_split = 0.0f64;
    for (si, set) in shapes.iter().enumerate() {
        for (ki, (kernel, which)) in kernels.iter().enumerate() {
            let audit = lab::decomposition_audit(
                kernel,
                set,
                &VolatilitySpec::One,
                *which,
                &triplet,
                Vec2::new(0.1, -0.05),
                0.2,
                256,
                100,
                9000 + (si * 2 + ki) as u64,
            )
            .unwrap();
            worst_direct = worst_direct.max(audit.worst_direct_gap);
            worst_split = worst_split.max(audit.worst_split_gap);
        }
    }
    verdict(
        "decomposition-identity",
        worst_direct < 1e-10 && worst_split < 1e-10,
        60.0,
        t0,
        &format!(
            "600 realizations: worst direct gap {worst_direct:.2e}, worst split gap {worst_split:.2e}"
        ),
    );
}

/// Bounded-variation (compound Poisson) basis: the functional scales like
/// r² and its normalized value tracks the pathwise invariant density.
#[test]
fn compound_poisson_classical_rate() {
    use ambit::field::{realize_atoms, window_for};
    use ambit::functional::{functional_on_atoms, pathwise_invariant_field, ChiRule};
    use ambit::rng::derive_key;

    let t0 = Instant::now();
    let kernel = Kernel::isotropic(0.0, bump_free_profile());
    let set = AmbitSet::disk(Vec2::ZERO, 1.0);
    let config = ScanConfig {
        kernel: kernel.clone(),
        set: set.clone(),
        vol: VolatilitySpec::One,
        triplet: cp_basis(4.0),
        which: CircleFunctional::Flux,
        p: Vec2::ZERO,
        radii: radius_grid(),
        replicates: 2000,
        n_theta: 256,
        h: 0.002,
        seed: 31001,
    };
    let scan = lab::run_scan(&config, ScanPath::Atoms).unwrap();
    let slope_ok = (scan.fit.slope - 2.0).abs() <= 0.1;
    let regime_ok = matches!(scan.regime, Regime::Classical);

    // Pathwise limit at r = 1e-2: (πr²)⁻¹·flux vs the invariant density.
    let p = Vec2::new(0.1, -0.2);
    let r = 1e-2;
    let window = window_for(&set, &[p], r, 0.01);
    let mut rel_errors = Vec::new();
    for m in 0..500u64 {
        let atoms = realize_atoms(&config.triplet, window, derive_key(31002, &[m])).unwrap();
        let flux = functional_on_atoms(
            &kernel,
            &set,
            &VolatilitySpec::One,
            CircleFunctional::Flux,
            p,
            r,
            &atoms,
            ChiRule::ArcGauss,
        )
        .unwrap();
        let sigma =
            pathwise_invariant_field(&kernel, &set, CircleFunctional::Flux, p, &atoms).unwrap();
        rel_errors.push((flux / (PI * r * r) - sigma).abs() / sigma.abs().max(1e-12));
    }
    let med = lab::median(&rel_errors);
    verdict(
        "compound-poisson-classical-rate",
        slope_ok && regime_ok && med < 2e-2,
        300.0,
        t0,
        &format!(
            "slope {:.3} (target 2.0±0.1), median pathwise error {med:.2e} (< 2e-2)",
            scan.fit.slope
        ),
    );
}

/// Gaussian basis component: interquartile range scales like r^{3/2}, the
/// normalized variance approaches the boundary energy π, and the normalized
/// law matches the exact Gaussian boundary-integral limit.
#[test]
fn gaussian_boundary_rate() {
    let t0 = Instant::now();
    let kernel = Kernel::constant(Vec2::new(1.0, 0.0));
    let set = AmbitSet::disk(Vec2::ZERO, 1.0);
    let triplet = Triplet::gaussian(1.0);
    let config = ScanConfig {
        kernel: kernel.clone(),
        set: set.clone(),
        vol: VolatilitySpec::One,
        triplet: triplet.clone(),
        which: CircleFunctional::Flux,
        p: Vec2::ZERO,
        radii: radius_grid(),
        replicates: 2000,
        n_theta: 256,
        h: 0.001,
        seed: 41001,
    };
    let scan = lab::run_scan(&config, ScanPath::Auto).unwrap();
    let slope_ok = (scan.fit.slope - 1.5).abs() <= 0.1;
    let regime_ok = matches!(scan.regime, Regime::GaussianAttractor);

    let r = 0.01;
    let normalizer = scan.regime.normalizer(r);
    let normalized: Vec<f64> = scan.values_at(r).iter().map(|v| v / normalizer).collect();
    let mean = normalized.iter().sum::<f64>() / normalized.len() as f64;
    let var = normalized.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / (normalized.len() - 1) as f64;
    let var_ok = (var - PI).abs() / PI <= 0.10;

    let seed_law = LimitSeed::from_triplet(&triplet).unwrap();
    let elements = limit_boundary_elements(&kernel, &set, CircleFunctional::Flux, 0.005);
    let grid = lab::symmetric_grid(3.0, 61);
    let sup = sup_cf_distance(&normalized, &grid, |z| cf_limit_exact(&seed_law, &elements, z));
    verdict(
        "gaussian-boundary-rate",
        slope_ok && regime_ok && var_ok && sup < 0.08,
        600.0,
        t0,
        &format!(
            "slope {:.3} (1.5±0.1), normalized variance {var:.3} (π±10%), sup CF distance {sup:.3} (< 0.08)",
            scan.fit.slope
        ),
    );
}

/// Symmetric 1.5-stable basis: rate r^{1+1/β} and convergence of the
/// normalized law to the exact stable boundary-integral limit.
#[test]
fn stable_boundary_rate() {
    let t0 = Instant::now();
    let kernel = Kernel::constant(Vec2::new(1.0, 0.0));
    let set = AmbitSet::disk(Vec2::ZERO, 1.0);
    let triplet = Triplet::strictly_stable(1.0, 1.0, 1.5);
    let config = ScanConfig {
        kernel: kernel.clone(),
        set: set.clone(),
        vol: VolatilitySpec::One,
        triplet: triplet.clone(),
        which: CircleFunctional::Flux,
        p: Vec2::ZERO,
        radii: radius_grid(),
        replicates: 2000,
        n_theta: 256,
        h: 0.002,
        seed: 51001,
    };
    let scan = lab::run_scan(&config, ScanPath::Auto).unwrap();
    let target = 1.0 + 1.0 / 1.5;
    let slope_ok = (scan.fit.slope - target).abs() <= 0.15;
    let regime_ok = matches!(scan.regime, Regime::StableAttractor { .. });

    let r = 0.01;
    let cf_config = ScanConfig { radii: vec![r], replicates: 5000, h: 0.001, seed: 51002, ..config };
    let draws = lab::draws_at_radius(&cf_config, ScanPath::Auto).unwrap();
    let normalizer = draws.regime.normalizer(r);
    let normalized: Vec<f64> = draws.values.iter().map(|v| v / normalizer).collect();
    let seed_law = LimitSeed::from_triplet(&triplet).unwrap();
    let elements = limit_boundary_elements(&kernel, &set, CircleFunctional::Flux, 0.005);
    let grid = lab::symmetric_grid(1.0, 61);
    let sup = sup_cf_distance(&normalized, &grid, |z| cf_limit_exact(&seed_law, &elements, z));
    verdict(
        "stable-boundary-rate",
        slope_ok && regime_ok && sup < 0.08,
        900.0,
        t0,
        &format!(
            "slope {:.3} ({target:.3}±0.15), sup CF distance {sup:.3} (< 0.08)",
            scan.fit.slope
        ),
    );
}

/// The closed-form rate constants match their quadrature definition.
#[test]
fn rate_constants() {
    let t0 = Instant::now();
    let gl = GaussLegendre::new(64);
    let quadrature = |beta: f64| {
        let integral = gl.integrate(-FRAC_PI_2, FRAC_PI_2, |t| t.cos().powf(beta + 1.0));
        2.0 * integral.powf(1.0 / beta)
    };
    let mut worst = 0.0f64;
    for k in 0..=10 {
        let beta = 1.0 + 0.1 * k as f64;
        worst = worst.max((v_beta(beta) - quadrature(beta)).abs() / v_beta(beta));
    }
    let pinned =
        (v_beta(1.0) - PI).abs() < 1e-10 && (v_beta(2.0) - 2.0 * (4.0f64 / 3.0).sqrt()).abs() < 1e-10;
    verdict(
        "rate-constants",
        worst < 1e-10 && pinned,
        10.0,
        t0,
        &format!("worst quadrature gap {worst:.2e}, endpoints pinned to π and 2√(4/3)"),
    );
}

/// Collar areas match closed forms and the shrinking-collar estimate
/// recovers the boundary length.
#[test]
fn collar_geometry() {
    let t0 = Instant::now();
    let disk = AmbitSet::disk(Vec2::ZERO, 1.0);
    let square = AmbitSet::polygon(vec![
        Vec2::new(-1.0, -1.0),
        Vec2::new(1.0, -1.0),
        Vec2::new(1.0, 1.0),
        Vec2::new(-1.0, 1.0),
    ]);
    let annulus = AmbitSet::annulus(Vec2::ZERO, 0.5, 1.0);

    let r = 0.05;
    let d = disk.parallel_set_area(r).unwrap();
    let disk_gap = (d - 4.0 * PI * r).abs() / d;
    let s = square.parallel_set_area(r).unwrap();
    let s_exact = 8.0 * 2.0 * r + PI * r * r - 4.0 * r * r;
    let square_gap = (s - s_exact).abs() / s_exact;

    let mut worst_content = 0.0f64;
    for (set, h1) in [
        (&disk, 2.0 * PI),
        (&square, 8.0),
        (&annulus, 3.0 * PI),
    ] {
        let content = set.minkowski_content().unwrap();
        worst_content = worst_content.max((content - h1).abs() / h1);
    }
    verdict(
        "collar-geometry",
        disk_gap < 1e-6 && square_gap < 1e-6 && worst_content < 5e-3,
        10.0,
        t0,
        &format!(
            "closed-form gaps {disk_gap:.2e}/{square_gap:.2e}, worst boundary-length error {worst_content:.2e}"
        ),
    );
}

/// Near a boundary point the weight per unit radius follows the chord law
/// 2·√(1-t²)·F·u and vanishes outside the collar.
#[test]
fn boundary_chord_profile() {
    let t0 = Instant::now();
    let set = AmbitSet::disk(Vec2::ZERO, 1.0);
    let kernel = Kernel::constant(Vec2::new(1.0, 0.0));
    let foot = Vec2::unit(0.4);
    let r = 1e-3;
    let ts = [-0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75];
    let mut worst = 0.0f64;
    let mut edges_zero = true;
    for which in [CircleFunctional::Flux, CircleFunctional::Circulation] {
        let prof = lab::transverse_profile(&kernel, &set, which, foot, foot, r, &ts);
        let f = Vec2::new(1.0, 0.0).dot(which.dir(foot));
        for (&t, &chi) in ts.iter().zip(&prof) {
            let limit = 2.0 * (1.0 - t * t).sqrt() * f;
            worst = worst.max((chi / r - limit).abs() / limit.abs());
        }
        let edge = lab::transverse_profile(&kernel, &set, which, foot, foot, r, &[-1.0, 1.0]);
        edges_zero &= edge == vec![0.0, 0.0];
    }
    verdict(
        "boundary-chord-profile",
        worst < 2e-2 && edges_zero,
        10.0,
        t0,
        &format!("worst chord-law error {worst:.2e} (< 2e-2), exact zeros at the collar edges"),
    );
}

/// Structural invariances: a tangential kernel gives pathwise zero flux, a
/// radial kernel pathwise zero circulation, a mixed kernel neither; the
/// directional fourth moment is flat exactly on rotation-invariant sets.
#[test]
fn invariance_battery() {
    let t0 = Instant::now();
    let triplet = cp_basis(8.0);
    let annulus = AmbitSet::annulus(Vec2::ZERO, 0.5, 1.0);
    let disk = AmbitSet::disk(Vec2::ZERO, 1.0);
    let ratio = |kernel: &Kernel, set: &AmbitSet, seed: u64| {
        let (flux, circ) = lab::coupled_pair_draws(
            kernel,
            set,
            &VolatilitySpec::One,
            &triplet,
            Vec2::ZERO,
            0.01,
            0.004,
            200,
            seed,
        )
        .unwrap();
        let abs = |v: &[f64]| v.iter().map(|x| x.abs()).collect::<Vec<_>>();
        (lab::median(&abs(&flux)), lab::median(&abs(&circ)))
    };

    // Tangential inverse-square kernel on an annulus: divergence-free, so
    // the flux vanishes pathwise while the circulation does not.
    let vortex = Kernel::isotropic(
        FRAC_PI_2,
        RadialProfile::PowerLaw { coefficient: 0.4, exponent: -2.0 },
    );
    let (flux_med, circ_med) = ratio(&vortex, &annulus, 91);
    let incompressible_ok = circ_med > 0.0 && flux_med <= 0.05 * circ_med;

    // Radial quadratic kernel on a disk: curl-free, the dual statement.
    let source = Kernel::isotropic(0.0, RadialProfile::PowerLaw { coefficient: 0.4, exponent: 2.0 });
    let (flux_med, circ_med) = ratio(&source, &disk, 92);
    let irrotational_ok = flux_med > 0.0 && circ_med <= 0.05 * flux_med;

    // Mixed kernel: both functionals must be visibly active.
    let mixed =
        Kernel::isotropic(FRAC_PI_4, RadialProfile::PowerLaw { coefficient: 0.4, exponent: 2.0 });
    let (flux_med, circ_med) = ratio(&mixed, &disk, 93);
    let mixed_ok = flux_med > 0.05 * circ_med && circ_med > 0.05 * flux_med;

    // Directional fourth moment: flat on the disk and annulus, visibly
    // varying on a square whose inscribed circle the kernel outgrows.
    let kernel = Kernel::isotropic(0.0, bump_free_profile());
    let angles = [0.0, 0.3, PI / 8.0, 1.1, 2.0];
    let spread = |set: &AmbitSet| {
        let vals: Vec<f64> = angles
            .iter()
            .map(|&a| lab::directional_fourth_moment(&kernel, set, a, 64, 256).unwrap())
            .collect();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / (vals.iter().sum::<f64>() / vals.len() as f64)
    };
    let square = AmbitSet::polygon(vec![
        Vec2::new(-0.6, -0.6),
        Vec2::new(0.6, -0.6),
        Vec2::new(0.6, 0.6),
        Vec2::new(-0.6, 0.6),
    ]);
    let iso_ok = spread(&disk) < 1e-8 && spread(&annulus) < 1e-8 && spread(&square) > 5e-3;

    verdict(
        "invariance-battery",
        incompressible_ok && irrotational_ok && mixed_ok && iso_ok,
        300.0,
        t0,
        &format!(
            "incompressible {incompressible_ok}, irrotational {irrotational_ok}, mixed control {mixed_ok}, isotropy discriminator {iso_ok}"
        ),
    );
}

/// A kernel that vanishes on the reflected boundary suppresses the Gaussian
/// boundary attractor: the rate drops back to the classical r².
#[test]
fn vanishing_kernel_classical_rate() {
    let t0 = Instant::now();
    let config = ScanConfig {
        kernel: Kernel::isotropic(
            0.0,
            RadialProfile::BumpVanishing { amplitude: 1.0, center: 0.5, width: 0.3 },
        ),
        set: AmbitSet::disk(Vec2::ZERO, 1.0),
        vol: VolatilitySpec::One,
        triplet: Triplet::gaussian(1.0),
        which: CircleFunctional::Flux,
        p: Vec2::ZERO,
        radii: radius_grid(),
        replicates: 500,
        n_theta: 256,
        h: 0.004,
        seed: 61001,
    };
    let scan = lab::run_scan(&config, ScanPath::Auto).unwrap();
    let slope_ok = (scan.fit.slope - 2.0).abs() <= 0.1;
    let regime_ok = matches!(scan.regime, Regime::Classical);
    verdict(
        "vanishing-kernel-classical-rate",
        slope_ok && regime_ok,
        300.0,
        t0,
        &format!("slope {:.3} (2.0±0.1) despite the Gaussian component", scan.fit.slope),
    );
}

/// The modular function obeys its structural bounds on random tuples across
/// every supported measure family.
#[test]
fn modular_function_bounds() {
    let t0 = Instant::now();
    let violation = common::modular_suite_violation(1000, 7071);
    verdict(
        "modular-function-bounds",
        violation.is_none(),
        60.0,
        t0,
        &violation.unwrap_or_else(|| "1000 random tuples, all four bounds hold".into()),
    );
}
