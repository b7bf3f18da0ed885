//! Command-line front end for the ambit-field engine.
//!
//! Subcommands: `geometry`, `simulate`, `flux-scan`, `limit-check`,
//! `model-demo`, `decomposition-audit`.  All stochastic commands take a
//! mandatory `--seed`; identical argv + seed produce byte-identical output
//! files.
//!
//! Exit codes: 0 all checks passed, 1 a statistical verdict failed,
//! 2 configuration error (malformed/unsupported config, unreadable files),
//! 3 numerical failure.

use ambit::field::{
    eval_field, realize_grid, window_for, GridRealization, GridSpec, LevyRealization,
    VolatilitySpec,
};
use ambit::functional::{
    cf_flux_exact, cf_limit_exact, chi_quadrature, limit_boundary_elements, CircleFunctional,
};
use ambit::geometry::AmbitSet;
use ambit::kernel::Kernel;
use ambit::lab::{
    self, cf_compare, coupled_pair_draws, decomposition_audit, iqr, median, run_scan,
    symmetric_grid, ScanPath,
};
use ambit::levy::{LimitSeed, Triplet, TripletSampler};
use ambit::report::{
    write_cf_rows, write_provenance_comments, write_scan_values, RunStamp,
};
use ambit::rng::derive_key;
use ambit::{AmbitError, Vec2};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ambit", version, about = "Simulation and verification engine for 2D vector ambit fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if absent).
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct StochasticArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Base seed for all replicate streams.
    #[arg(long)]
    seed: u64,
    /// Worker threads (the AMBIT_THREADS environment variable overrides).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Geometry diagnostics: areas, perimeter, reach, Minkowski content.
    Geometry {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Realize one field and evaluate it at the configured points.
    Simulate {
        #[command(flatten)]
        stochastic: StochasticArgs,
        /// Save the realized noise grid to this file.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Load a previously dumped noise grid instead of sampling.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Scale scan of the flux/circulation over a shrinking radius grid.
    FluxScan {
        #[command(flatten)]
        stochastic: StochasticArgs,
    },
    /// Compare normalized draws against an exact characteristic function.
    LimitCheck {
        #[command(flatten)]
        stochastic: StochasticArgs,
    },
    /// Incompressible / irrotational model demonstrations.
    ModelDemo {
        #[command(flatten)]
        stochastic: StochasticArgs,
    },
    /// Pathwise interior/boundary decomposition identity audit.
    DecompositionAudit {
        #[command(flatten)]
        stochastic: StochasticArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => {
            eprintln!("verdict: FAIL");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                AmbitError::Numerical(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> ambit::Result<bool> {
    match cli.command {
        Command::Geometry { common } => cmd_geometry(&common),
        Command::Simulate { stochastic, dump, replay } => {
            configure_threads(stochastic.threads);
            cmd_simulate(&stochastic, dump.as_deref(), replay.as_deref())
        }
        Command::FluxScan { stochastic } => {
            configure_threads(stochastic.threads);
            cmd_flux_scan(&stochastic)
        }
        Command::LimitCheck { stochastic } => {
            configure_threads(stochastic.threads);
            cmd_limit_check(&stochastic)
        }
        Command::ModelDemo { stochastic } => {
            configure_threads(stochastic.threads);
            cmd_model_demo(&stochastic)
        }
        Command::DecompositionAudit { stochastic } => {
            configure_threads(stochastic.threads);
            cmd_decomposition_audit(&stochastic)
        }
    }
}

/// `AMBIT_THREADS` wins over `--threads`; otherwise install the flag value.
fn configure_threads(flag: Option<usize>) {
    if std::env::var("AMBIT_THREADS").is_ok() {
        lab::configure_threads_from_env();
    } else if let Some(n) = flag {
        lab::configure_threads(n);
    }
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> ambit::Result<(T, Vec<u8>)> {
    let bytes = fs::read(path).map_err(|e| {
        AmbitError::Config(format!("cannot read config {}: {e}", path.display()))
    })?;
    let parsed = serde_json::from_slice(&bytes)
        .map_err(|e| AmbitError::Config(format!("config {}: {e}", path.display())))?;
    Ok((parsed, bytes))
}

fn ensure_out(dir: &Path) -> ambit::Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> ambit::Result<()> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    fs::write(path, body)?;
    Ok(())
}

fn default_vol() -> VolatilitySpec {
    VolatilitySpec::One
}

fn default_n_theta() -> usize {
    256
}

// ---------------------------------------------------------------------------
// geometry
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct GeometryConfig {
    set: AmbitSet,
    /// Optional collar radius for the parallel-set area report.
    parallel_radius: Option<f64>,
}

#[derive(Serialize)]
struct GeometryReport {
    stamp: RunStamp,
    area: f64,
    perimeter: f64,
    diameter: f64,
    validity_radius: f64,
    validity_limited_by: String,
    minkowski_content: f64,
    reach: ambit::geometry::ReachReport,
    parallel_radius: Option<f64>,
    parallel_set_area: Option<f64>,
}

fn cmd_geometry(common: &CommonArgs) -> ambit::Result<bool> {
    let (config, bytes) = read_config::<GeometryConfig>(&common.config)?;
    ensure_out(&common.out)?;
    config.set.validate()?;
    let (validity_radius, validity_limited_by) = config.set.validity_radius();
    let parallel_set_area = match config.parallel_radius {
        Some(r) => Some(config.set.parallel_set_area(r)?),
        None => None,
    };
    let report = GeometryReport {
        stamp: RunStamp::from_config_bytes(&bytes, 0),
        area: config.set.area(),
        perimeter: config.set.perimeter(),
        diameter: config.set.diameter(),
        validity_radius,
        validity_limited_by,
        minkowski_content: config.set.minkowski_content()?,
        reach: config.set.reach_report(),
        parallel_radius: config.parallel_radius,
        parallel_set_area,
    };
    write_json(&common.out.join("geometry_report.json"), &report)?;
    Ok(true)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct SimulateConfig {
    triplet: Triplet,
    kernel: Kernel,
    set: AmbitSet,
    #[serde(default = "default_vol")]
    vol: VolatilitySpec,
    h: f64,
    points: Vec<Vec2>,
}

#[derive(Serialize)]
struct SimulateReport {
    stamp: RunStamp,
    n_cells: usize,
    window_lo: Vec2,
    window_hi: Vec2,
    replayed: bool,
    dumped: bool,
}

fn cmd_simulate(
    args: &StochasticArgs,
    dump: Option<&Path>,
    replay: Option<&Path>,
) -> ambit::Result<bool> {
    let (config, bytes) = read_config::<SimulateConfig>(&args.common.config)?;
    ensure_out(&args.common.out)?;
    if config.points.is_empty() {
        return Err(AmbitError::Config("simulate: points must be non-empty".into()));
    }
    let grid = match replay {
        Some(path) => {
            let mut f = fs::File::open(path)?;
            GridRealization::replay(&mut f, &config.triplet)?
        }
        None => {
            let sampler = TripletSampler::new(&config.triplet)?;
            let window = window_for(&config.set, &config.points, 0.0, config.h);
            let spec = GridSpec::new(window, config.h)?;
            realize_grid(&sampler, &spec, derive_key(args.seed, &[0x53494d]))
        }
    };
    if let Some(path) = dump {
        let mut f = fs::File::create(path)?;
        grid.dump(&mut f, &config.triplet)?;
    }
    let realization = LevyRealization::Grid(grid);
    let stamp = RunStamp::from_config_bytes(&bytes, args.seed);
    let mut out = Vec::new();
    write_provenance_comments(&mut out, &stamp)?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(["p_x", "p_y", "x1", "x2"])?;
        for &p in &config.points {
            let v = eval_field(&config.kernel, &config.set, &config.vol, p, &realization)?;
            w.write_record(&[
                format!("{}", p.x),
                format!("{}", p.y),
                format!("{}", v.x),
                format!("{}", v.y),
            ])?;
        }
        w.flush()?;
    }
    fs::write(args.common.out.join("field_values.csv"), out)?;
    let (n_cells, lo, hi) = match &realization {
        LevyRealization::Grid(g) => (g.spec.n_cells(), g.spec.window.lo, g.spec.window.hi),
        LevyRealization::Atoms(_) => unreachable!("simulate always uses grids"),
    };
    let report = SimulateReport {
        stamp,
        n_cells,
        window_lo: lo,
        window_hi: hi,
        replayed: replay.is_some(),
        dumped: dump.is_some(),
    };
    write_json(&args.common.out.join("simulate_report.json"), &report)?;
    Ok(true)
}

// ---------------------------------------------------------------------------
// flux-scan
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct FluxScanConfig {
    kernel: Kernel,
    set: AmbitSet,
    #[serde(default = "default_vol")]
    vol: VolatilitySpec,
    triplet: Triplet,
    functional: CircleFunctional,
    p: Vec2,
    radii: Vec<f64>,
    replicates: usize,
    #[serde(default = "default_n_theta")]
    n_theta: usize,
    h: f64,
    #[serde(default)]
    path: Option<ScanPath>,
    /// Optional verdict: require `|slope - target| <= tol`.
    slope_target: Option<f64>,
    slope_tol: Option<f64>,
}

#[derive(Serialize)]
struct FluxScanReport {
    stamp: RunStamp,
    regime: ambit::levy::Regime,
    rows: Vec<lab::ScanRow>,
    slope: f64,
    slope_ci_half: f64,
    intercept: f64,
    slope_target: Option<f64>,
    slope_tol: Option<f64>,
    verdict: Option<bool>,
}

fn cmd_flux_scan(args: &StochasticArgs) -> ambit::Result<bool> {
    let (config, bytes) = read_config::<FluxScanConfig>(&args.common.config)?;
    ensure_out(&args.common.out)?;
    let scan_config = lab::ScanConfig {
        kernel: config.kernel,
        set: config.set,
        vol: config.vol,
        triplet: config.triplet,
        which: config.functional,
        p: config.p,
        radii: config.radii,
        replicates: config.replicates,
        n_theta: config.n_theta,
        h: config.h,
        seed: args.seed,
    };
    let scan = run_scan(&scan_config, config.path.unwrap_or(ScanPath::Auto))?;
    let stamp = RunStamp::from_config_bytes(&bytes, args.seed);
    let mut out = Vec::new();
    write_provenance_comments(&mut out, &stamp)?;
    write_scan_values(&mut out, &scan.samples)?;
    fs::write(args.common.out.join("rates.csv"), out)?;
    let verdict = match (config.slope_target, config.slope_tol) {
        (Some(target), Some(tol)) => Some((scan.fit.slope - target).abs() <= tol),
        _ => None,
    };
    let report = FluxScanReport {
        stamp,
        regime: scan.regime,
        rows: scan.rows,
        slope: scan.fit.slope,
        slope_ci_half: scan.fit.ci_half,
        intercept: scan.fit.intercept,
        slope_target: config.slope_target,
        slope_tol: config.slope_tol,
        verdict,
    };
    write_json(&args.common.out.join("report.json"), &report)?;
    Ok(verdict.unwrap_or(true))
}

// ---------------------------------------------------------------------------
// limit-check
// ---------------------------------------------------------------------------

#[derive(Deserialize, Serialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum CfOracle {
    /// Normalized draws against the exact boundary-limit law.
    Limit,
    /// Raw draws against the exact finite-radius characteristic function.
    FiniteR,
}

fn default_z_max() -> f64 {
    3.0
}

fn default_n_z() -> usize {
    61
}

fn default_element_len() -> f64 {
    0.005
}

#[derive(Deserialize)]
struct LimitCheckConfig {
    kernel: Kernel,
    set: AmbitSet,
    triplet: Triplet,
    functional: CircleFunctional,
    p: Vec2,
    r: f64,
    h: f64,
    replicates: usize,
    oracle: CfOracle,
    #[serde(default = "default_z_max")]
    z_max: f64,
    #[serde(default = "default_n_z")]
    n_z: usize,
    #[serde(default)]
    slack: f64,
    #[serde(default = "default_element_len")]
    element_len: f64,
}

#[derive(Serialize)]
struct LimitCheckReport {
    stamp: RunStamp,
    oracle: CfOracle,
    regime: ambit::levy::Regime,
    normalizer: f64,
    replicates: usize,
    sup_dist: f64,
    threshold: f64,
    pass: bool,
}

fn cmd_limit_check(args: &StochasticArgs) -> ambit::Result<bool> {
    let (config, bytes) = read_config::<LimitCheckConfig>(&args.common.config)?;
    ensure_out(&args.common.out)?;
    let scan_config = lab::ScanConfig {
        kernel: config.kernel.clone(),
        set: config.set.clone(),
        vol: VolatilitySpec::One,
        triplet: config.triplet.clone(),
        which: config.functional,
        p: config.p,
        radii: vec![config.r],
        replicates: config.replicates,
        n_theta: default_n_theta(),
        h: config.h,
        seed: args.seed,
    };
    let draws = lab::draws_at_radius(&scan_config, ScanPath::Auto)?;
    let raw = draws.values;
    let normalizer = draws.regime.normalizer(config.r);
    let grid = symmetric_grid(config.z_max, config.n_z);
    let report = match config.oracle {
        CfOracle::Limit => {
            let normalized: Vec<f64> = raw.iter().map(|v| v / normalizer).collect();
            let seed_law = LimitSeed::from_triplet(&config.triplet)?;
            let elements = limit_boundary_elements(
                &config.kernel,
                &config.set,
                config.functional,
                config.element_len,
            );
            cf_compare(&normalized, &grid, config.slack, |z| {
                Ok(cf_limit_exact(&seed_law, &elements, z))
            })?
        }
        CfOracle::FiniteR => {
            let quad = chi_quadrature(
                &config.kernel,
                &config.set,
                config.functional,
                config.r,
                512,
                24,
                48,
                256,
            )?;
            cf_compare(&raw, &grid, config.slack, |z| {
                cf_flux_exact(&config.triplet, &quad, z)
            })?
        }
    };
    let stamp = RunStamp::from_config_bytes(&bytes, args.seed);
    let mut out = Vec::new();
    write_provenance_comments(&mut out, &stamp)?;
    write_cf_rows(&mut out, &report.rows)?;
    fs::write(args.common.out.join("limit_check.csv"), out)?;
    let json = LimitCheckReport {
        stamp,
        oracle: config.oracle,
        regime: draws.regime,
        normalizer,
        replicates: report.replicates,
        sup_dist: report.sup_dist,
        threshold: report.threshold,
        pass: report.pass,
    };
    write_json(&args.common.out.join("report.json"), &json)?;
    Ok(json.pass)
}

// ---------------------------------------------------------------------------
// model-demo
// ---------------------------------------------------------------------------

#[derive(Deserialize, Serialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum ModelExpectation {
    Incompressible,
    Irrotational,
    None,
}

fn default_ratio_tol() -> f64 {
    0.05
}

#[derive(Deserialize)]
struct IsotropyCheckConfig {
    angles: Vec<f64>,
    tol: f64,
    expect_isotropic: bool,
}

#[derive(Deserialize)]
struct ModelDemoConfig {
    kernel: Kernel,
    set: AmbitSet,
    triplet: Triplet,
    r: f64,
    h: f64,
    replicates: usize,
    expect: ModelExpectation,
    #[serde(default = "default_ratio_tol")]
    ratio_tol: f64,
    isotropy: Option<IsotropyCheckConfig>,
}

#[derive(Serialize)]
struct IsotropyReport {
    spread: f64,
    tol: f64,
    expect_isotropic: bool,
    pass: bool,
}

#[derive(Serialize)]
struct ModelDemoReport {
    stamp: RunStamp,
    expect: ModelExpectation,
    median_abs_flux: f64,
    iqr_flux: f64,
    median_abs_circulation: f64,
    iqr_circulation: f64,
    flux_over_circulation_scale: f64,
    circulation_over_flux_scale: f64,
    ratio_tol: f64,
    isotropy: Option<IsotropyReport>,
    pass: bool,
}

fn cmd_model_demo(args: &StochasticArgs) -> ambit::Result<bool> {
    let (config, bytes) = read_config::<ModelDemoConfig>(&args.common.config)?;
    ensure_out(&args.common.out)?;
    let (flux, circ) = coupled_pair_draws(
        &config.kernel,
        &config.set,
        &VolatilitySpec::One,
        &config.triplet,
        Vec2::ZERO,
        config.r,
        config.h,
        config.replicates,
        args.seed,
    )?;
    let abs_flux: Vec<f64> = flux.iter().map(|v| v.abs()).collect();
    let abs_circ: Vec<f64> = circ.iter().map(|v| v.abs()).collect();
    let median_abs_flux = median(&abs_flux);
    let median_abs_circ = median(&abs_circ);
    let iqr_flux = iqr(&flux);
    let iqr_circ = iqr(&circ);
    let flux_ratio = median_abs_flux / iqr_circ.max(f64::MIN_POSITIVE);
    let circ_ratio = median_abs_circ / iqr_flux.max(f64::MIN_POSITIVE);
    let mut pass = match config.expect {
        ModelExpectation::Incompressible => flux_ratio < config.ratio_tol,
        ModelExpectation::Irrotational => circ_ratio < config.ratio_tol,
        ModelExpectation::None => true,
    };
    let isotropy = match &config.isotropy {
        Some(check) => {
            if check.angles.len() < 2 {
                return Err(AmbitError::Config(
                    "isotropy check needs at least two angles".into(),
                ));
            }
            let values = check
                .angles
                .iter()
                .map(|&a| lab::directional_fourth_moment(&config.kernel, &config.set, a, 64, 256))
                .collect::<ambit::Result<Vec<f64>>>()?;
            let max = values.iter().cloned().fold(f64::MIN, f64::max);
            let min = values.iter().cloned().fold(f64::MAX, f64::min);
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let spread = (max - min) / mean.abs().max(f64::MIN_POSITIVE);
            let iso_pass = (spread <= check.tol) == check.expect_isotropic;
            pass = pass && iso_pass;
            Some(IsotropyReport {
                spread,
                tol: check.tol,
                expect_isotropic: check.expect_isotropic,
                pass: iso_pass,
            })
        }
        None => None,
    };
    let stamp = RunStamp::from_config_bytes(&bytes, args.seed);
    let mut out = Vec::new();
    write_provenance_comments(&mut out, &stamp)?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(["replicate", "flux", "circulation"])?;
        for (i, (f, c)) in flux.iter().zip(&circ).enumerate() {
            w.write_record(&[i.to_string(), format!("{f}"), format!("{c}")])?;
        }
        w.flush()?;
    }
    fs::write(args.common.out.join("pairs.csv"), out)?;
    let report = ModelDemoReport {
        stamp,
        expect: config.expect,
        median_abs_flux,
        iqr_flux,
        median_abs_circulation: median_abs_circ,
        iqr_circulation: iqr_circ,
        flux_over_circulation_scale: flux_ratio,
        circulation_over_flux_scale: circ_ratio,
        ratio_tol: config.ratio_tol,
        isotropy,
        pass,
    };
    write_json(&args.common.out.join("model_demo_report.json"), &report)?;
    Ok(pass)
}

// ---------------------------------------------------------------------------
// decomposition-audit
// ---------------------------------------------------------------------------

fn default_audit_replicates() -> usize {
    100
}

fn default_audit_tol() -> f64 {
    1e-10
}

#[derive(Deserialize)]
struct DecompositionAuditConfig {
    kernel: Kernel,
    set: AmbitSet,
    #[serde(default = "default_vol")]
    vol: VolatilitySpec,
    triplet: Triplet,
    functional: CircleFunctional,
    p: Vec2,
    r: f64,
    #[serde(default = "default_n_theta")]
    n_theta: usize,
    #[serde(default = "default_audit_replicates")]
    replicates: usize,
    #[serde(default = "default_audit_tol")]
    tol: f64,
}

#[derive(Serialize)]
struct DecompositionAuditReport {
    stamp: RunStamp,
    audit: lab::DecompositionAudit,
    tol: f64,
    pass: bool,
}

fn cmd_decomposition_audit(args: &StochasticArgs) -> ambit::Result<bool> {
    let (config, bytes) = read_config::<DecompositionAuditConfig>(&args.common.config)?;
    ensure_out(&args.common.out)?;
    let audit = decomposition_audit(
        &config.kernel,
        &config.set,
        &config.vol,
        config.functional,
        &config.triplet,
        config.p,
        config.r,
        config.n_theta,
        config.replicates,
        args.seed,
    )?;
    let pass = audit.worst_direct_gap.max(audit.worst_split_gap) <= config.tol;
    let report = DecompositionAuditReport {
        stamp: RunStamp::from_config_bytes(&bytes, args.seed),
        audit,
        tol: config.tol,
        pass,
    };
    write_json(&args.common.out.join("decomposition_audit.json"), &report)?;
    Ok(pass)
}
