//! Subcommand front-end wiring ingestion -> pipeline -> evaluation ->
//! rendering. Every run is a pure function of (input files, config): the
//! seed is mandatory, and report and line outputs are byte-identical
//! across repeat runs and thread counts.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{parse_bbox, parse_hidden, FileConfig};
use crate::contour::{arc_length_km, extract_contours, principal_contour, ContourSpec};
use crate::error::{Error, Result};
use crate::evaluate::{build_report, point_to_polyline_km, Landmark};
use crate::field::{brand_field, gdhi_field, ScalarField};
use crate::geodata::{
    load_boundary, load_income_csv, load_landmarks_csv, load_lines, load_reference_line, load_store_csv, make_grid,
    synth_two_brand, write_store_csv, LandmassMask, PolylineFeature, ReferenceLine,
};
use crate::geom::{BoundingBox, Polyline, ENGLAND_BBOX};
use crate::mlp::{Activation, NetworkArch, TrainConfig};
use crate::render::{render_svg, Layer, Scene, Viewport};
use crate::resample::{ResamplePlan, SplitSpec};
use crate::standardize::Standardizer;
use crate::svm::{hyperplane_to_polyline, svm_pipeline, SvmConfig};

/// Validation failures exit 2, pipeline failures exit 3.
enum CliError {
    Validation(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

fn validation(e: Error) -> CliError {
    CliError::Validation(e.to_string())
}

#[derive(Parser)]
#[command(name = "divideline", version, about = "Geographic dividing lines from labeled point populations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic two-brand store CSV (test fixture)
    Synth(SynthArgs),
    /// Dividing line from a class-balanced linear SVM ensemble
    Svm(SvmArgs),
    /// Dividing line from the 0.5 contour of an averaged network field
    Ann(AnnArgs),
    /// Income contour from a network regression of regional GDHI
    Gdhi(GdhiArgs),
    /// Compare dividing lines against landmarks and a reference line
    Compare(CompareArgs),
    /// Render stores, heatmap, and lines as an SVG figure
    Render(RenderArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Flat key=value config file; explicit flags override file entries
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker thread cap (env DIVIDELINE_THREADS as fallback)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// RNG seed (mandatory: runs must be reproducible)
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_north: Option<usize>,
    #[arg(long)]
    n_south: Option<usize>,
    /// Latitude displacement between cluster centers, degrees
    #[arg(long)]
    separation: Option<f64>,
    /// Isotropic cluster noise, degrees
    #[arg(long)]
    noise_sd: Option<f64>,
    #[arg(long)]
    north_name: Option<String>,
    #[arg(long)]
    south_name: Option<String>,
    /// Output CSV path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ModelCommonArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// RNG seed (mandatory: runs must be reproducible)
    #[arg(long)]
    seed: Option<u64>,
    /// Labeled store CSV (header brand,lat,lon)
    #[arg(long)]
    stores: Option<PathBuf>,
    #[arg(long)]
    north_brand: Option<String>,
    #[arg(long)]
    south_brand: Option<String>,
    /// Landmass boundary GeoJSON (Polygon/MultiPolygon)
    #[arg(long)]
    boundary: Option<PathBuf>,
    /// Number of balanced resamples in the ensemble
    #[arg(long)]
    resamples: Option<usize>,
    /// Training fraction of the single holdout split
    #[arg(long)]
    train_frac: Option<f64>,
    /// Evaluation bbox: lon_min,lon_max,lat_min,lat_max
    #[arg(long, allow_hyphen_values = true)]
    bbox: Option<String>,
    #[arg(long)]
    grid_nlon: Option<usize>,
    #[arg(long)]
    grid_nlat: Option<usize>,
    /// Output line GeoJSON
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output report JSON
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SvmArgs {
    #[command(flatten)]
    model: ModelCommonArgs,
    /// Soft-margin box penalty
    #[arg(long)]
    c: Option<f64>,
    /// KKT tolerance
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_passes: Option<usize>,
}

#[derive(Args, Clone)]
struct NetArgs {
    /// Hidden layer sizes, comma separated (e.g. 10 or 16,8)
    #[arg(long)]
    hidden: Option<String>,
    /// Hidden activation: relu or tanh
    #[arg(long)]
    activation: Option<String>,
    /// Gradient-descent learning rate
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    /// L2 weight decay
    #[arg(long)]
    l2: Option<f64>,
    /// Early-stop loss threshold
    #[arg(long)]
    target_loss: Option<f64>,
}

#[derive(Args)]
struct AnnArgs {
    #[command(flatten)]
    model: ModelCommonArgs,
    #[command(flatten)]
    net: NetArgs,
    /// Also dump the averaged field as CSV (lon,lat,value)
    #[arg(long)]
    field: Option<PathBuf>,
}

#[derive(Args)]
struct GdhiArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// RNG seed (mandatory: runs must be reproducible)
    #[arg(long)]
    seed: Option<u64>,
    /// Regional income CSV (header region,lat,lon,gdhi)
    #[arg(long)]
    income: Option<PathBuf>,
    #[arg(long)]
    boundary: Option<PathBuf>,
    #[arg(long)]
    train_frac: Option<f64>,
    /// Number of differently-seeded networks averaged into the map
    #[arg(long)]
    seed_ensemble: Option<usize>,
    /// Contour threshold in GBP (default: unweighted mean of the column)
    #[arg(long)]
    national_mean: Option<f64>,
    #[command(flatten)]
    net: NetArgs,
    #[arg(long, allow_hyphen_values = true)]
    bbox: Option<String>,
    #[arg(long)]
    grid_nlon: Option<usize>,
    #[arg(long)]
    grid_nlat: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    field: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Line GeoJSON files to compare (principal line per file)
    #[arg(long, num_args = 1..)]
    lines: Vec<PathBuf>,
    /// Landmarks CSV (header name,lat,lon)
    #[arg(long)]
    landmarks: Option<PathBuf>,
    /// Reference line GeoJSON (LineString)
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Model accuracies to embed, repeated name=value
    #[arg(long)]
    accuracy: Vec<String>,
    /// Arc-length samples per discrepancy evaluation
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Field CSV (lon,lat,value) to draw as a heatmap
    #[arg(long)]
    field: Option<PathBuf>,
    /// Report JSON (supplies the heatmap anchor level)
    #[arg(long)]
    report: Option<PathBuf>,
    /// Line GeoJSON files to draw
    #[arg(long, num_args = 0..)]
    lines: Vec<PathBuf>,
    /// Reference line to draw dashed
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    stores: Option<PathBuf>,
    #[arg(long)]
    north_brand: Option<String>,
    #[arg(long)]
    south_brand: Option<String>,
    #[arg(long)]
    boundary: Option<PathBuf>,
    #[arg(long)]
    landmarks: Option<PathBuf>,
    /// Heatmap anchor level (overrides the report)
    #[arg(long)]
    level: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    bbox: Option<String>,
    #[arg(long)]
    width: Option<f64>,
    #[arg(long)]
    height: Option<f64>,
    /// Compress longitude by cos(53 deg) for visual fidelity
    #[arg(long)]
    aspect_cos_lat: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Binary entry point; returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Synth(args) => run_synth(args),
        Command::Svm(args) => run_svm(args),
        Command::Ann(args) => run_ann(args),
        Command::Gdhi(args) => run_gdhi(args),
        Command::Compare(args) => run_compare(args),
        Command::Render(args) => run_render(args),
    };
    match outcome {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            3
        }
    }
}

fn load_file_config(common: &CommonArgs) -> std::result::Result<FileConfig, CliError> {
    match &common.config {
        Some(path) => FileConfig::load(path).map_err(validation),
        None => Ok(FileConfig::empty()),
    }
}

fn thread_pool(common: &CommonArgs, cfg: &FileConfig) -> std::result::Result<rayon::ThreadPool, CliError> {
    let mut threads = cfg.resolve_opt::<usize>("threads", common.threads).map_err(validation)?;
    if threads.is_none() {
        if let Ok(env) = std::env::var("DIVIDELINE_THREADS") {
            threads = Some(
                env.parse::<usize>()
                    .map_err(|_| CliError::Validation(format!("DIVIDELINE_THREADS={env:?} is not a count")))?,
            );
        }
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Validation(format!("cannot build thread pool: {e}")))
}

fn write_text(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.clone(), source })
}

fn report_json<T: Serialize>(report: &T) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serialization cannot fail");
    text.push('\n');
    text
}

fn grid_spec(
    cfg: &FileConfig,
    bbox: &Option<String>,
    n_lon: &Option<usize>,
    n_lat: &Option<usize>,
) -> std::result::Result<(BoundingBox, usize, usize), CliError> {
    let bbox = match cfg.resolve_opt::<String>("bbox", bbox.clone()).map_err(validation)? {
        Some(text) => parse_bbox(&text).map_err(validation)?,
        None => ENGLAND_BBOX,
    };
    let n_lon = cfg.resolve("grid-nlon", *n_lon, Some(300)).map_err(validation)?;
    let n_lat = cfg.resolve("grid-nlat", *n_lat, Some(300)).map_err(validation)?;
    Ok((bbox, n_lon, n_lat))
}

fn net_config(
    cfg: &FileConfig,
    net: &NetArgs,
    seed: u64,
) -> std::result::Result<(NetworkArch, TrainConfig), CliError> {
    let hidden_text = cfg.resolve("hidden", net.hidden.clone(), Some("10".to_string())).map_err(validation)?;
    let hidden_sizes = parse_hidden(&hidden_text).map_err(validation)?;
    let activation_text =
        cfg.resolve("activation", net.activation.clone(), Some("relu".to_string())).map_err(validation)?;
    let activation: Activation = activation_text.parse().map_err(validation)?;
    let arch = NetworkArch { hidden_sizes, activation };
    arch.validate().map_err(validation)?;
    let train = TrainConfig {
        learning_rate: cfg
            .resolve("lr", net.lr, Some(TrainConfig::DEFAULT_LEARNING_RATE))
            .map_err(validation)?,
        epochs: cfg.resolve("epochs", net.epochs, Some(TrainConfig::DEFAULT_EPOCHS)).map_err(validation)?,
        seed,
        l2: cfg.resolve("l2", net.l2, Some(TrainConfig::DEFAULT_L2)).map_err(validation)?,
        target_loss: cfg
            .resolve("target-loss", net.target_loss, Some(TrainConfig::DEFAULT_TARGET_LOSS))
            .map_err(validation)?,
    };
    train.validate().map_err(validation)?;
    Ok((arch, train))
}

fn load_optional_boundary(
    cfg: &FileConfig,
    flag: &Option<PathBuf>,
) -> std::result::Result<Option<LandmassMask>, CliError> {
    match cfg.resolve_existing_path_opt("boundary", flag.clone()).map_err(validation)? {
        Some(path) => Ok(Some(load_boundary(&path).map_err(validation)?)),
        None => Ok(None),
    }
}

fn run_synth(args: &SynthArgs) -> std::result::Result<String, CliError> {
    let cfg = load_file_config(&args.common)?;
    let seed = cfg.resolve::<u64>("seed", args.seed, None).map_err(validation)?;
    let n_north = cfg.resolve("n-north", args.n_north, Some(400)).map_err(validation)?;
    let n_south = cfg.resolve("n-south", args.n_south, Some(150)).map_err(validation)?;
    let separation = cfg.resolve("separation", args.separation, Some(1.0)).map_err(validation)?;
    let noise_sd = cfg.resolve("noise-sd", args.noise_sd, Some(0.3)).map_err(validation)?;
    let north = cfg.resolve("north-name", args.north_name.clone(), Some("Greggs".into())).map_err(validation)?;
    let south = cfg.resolve("south-name", args.south_name.clone(), Some("Pret".into())).map_err(validation)?;
    let out = cfg.resolve::<PathBuf>("out", args.out.clone(), None).map_err(validation)?;
    if n_north < 2 || n_south < 2 || noise_sd < 0.0 {
        return Err(CliError::Validation("need n-north >= 2, n-south >= 2, noise-sd >= 0".into()));
    }

    let mut dataset = synth_two_brand(n_north, n_south, separation, noise_sd, seed)?;
    dataset = crate::geodata::StoreDataset::new(
        dataset.points().to_vec(),
        crate::geodata::BrandNames { north, south },
    )?;
    write_store_csv(&dataset, &out)?;
    Ok(format!("synth: wrote {} points to {}", dataset.len(), out.display()))
}

#[derive(Serialize)]
struct SvmReport {
    model: &'static str,
    seed: u64,
    resamples: usize,
    train_fraction: f64,
    c: f64,
    accuracy_mean_resample: f64,
    accuracy_averaged_model: f64,
    w: [f64; 2],
    b: f64,
    standardizer: Standardizer,
    nonconverged: usize,
    line_length_km: f64,
    per_resample_accuracy: Vec<f64>,
}

fn run_svm(args: &SvmArgs) -> std::result::Result<String, CliError> {
    let cfg = load_file_config(&args.model.common)?;
    let seed = cfg.resolve::<u64>("seed", args.model.seed, None).map_err(validation)?;
    let stores = cfg.resolve_existing_path("stores", args.model.stores.clone()).map_err(validation)?;
    let north = cfg
        .resolve("north-brand", args.model.north_brand.clone(), Some("Greggs".into()))
        .map_err(validation)?;
    let south = cfg
        .resolve("south-brand", args.model.south_brand.clone(), Some("Pret".into()))
        .map_err(validation)?;
    let resamples = cfg.resolve("resamples", args.model.resamples, Some(1000)).map_err(validation)?;
    let train_frac = cfg.resolve("train-frac", args.model.train_frac, Some(0.8)).map_err(validation)?;
    let svm_cfg = SvmConfig {
        c: cfg.resolve("c", args.c, Some(1.0)).map_err(validation)?,
        tol: cfg.resolve("tol", args.tol, Some(1e-4)).map_err(validation)?,
        max_passes: cfg.resolve("max-passes", args.max_passes, Some(1000)).map_err(validation)?,
    };
    svm_cfg.validate().map_err(validation)?;
    let (bbox, _, _) = grid_spec(&cfg, &args.model.bbox, &args.model.grid_nlon, &args.model.grid_nlat)?;
    let out = cfg.resolve::<PathBuf>("out", args.model.out.clone(), None).map_err(validation)?;
    let report_path = cfg.resolve::<PathBuf>("report", args.model.report.clone(), None).map_err(validation)?;
    // the boundary does not change the SVM geometry (the line clips to the
    // bbox); loading it here still validates shared config files early
    let _ = load_optional_boundary(&cfg, &args.model.boundary)?;
    let pool = thread_pool(&args.model.common, &cfg)?;

    let dataset = load_store_csv(&stores, &north, &south).map_err(validation)?;
    let plan = ResamplePlan::new(resamples, seed).map_err(validation)?;
    let split_spec = SplitSpec::new(train_frac, true, seed).map_err(validation)?;

    let outcome = pool.install(|| svm_pipeline(&dataset, &plan, &split_spec, &svm_cfg))?;
    // clipping needs only the bbox; a 2x2 unmasked grid carries it
    let clip_grid = make_grid(bbox, 2, 2, None)?;
    let line = hyperplane_to_polyline(&outcome.hyperplane, &clip_grid)?;
    let length_km = arc_length_km(&line);

    write_text(
        &out,
        &crate::geodata::polylines_to_geojson(&[PolylineFeature { line: &line, name: "svm".into(), level: None, rank: 0 }]),
    )?;
    let report = SvmReport {
        model: "svm",
        seed,
        resamples,
        train_fraction: train_frac,
        c: svm_cfg.c,
        accuracy_mean_resample: outcome.mean_resample_accuracy,
        accuracy_averaged_model: outcome.averaged_model_accuracy,
        w: outcome.hyperplane.w,
        b: outcome.hyperplane.b,
        standardizer: outcome.hyperplane.standardizer,
        nonconverged: outcome.nonconverged,
        line_length_km: length_km,
        per_resample_accuracy: outcome.per_resample_accuracy,
    };
    write_text(&report_path, &report_json(&report))?;
    Ok(format!(
        "svm: accuracy_mean_resample={:.4} accuracy_averaged_model={:.4} line_length_km={:.1}",
        report.accuracy_mean_resample, report.accuracy_averaged_model, length_km
    ))
}

fn field_csv(field: &ScalarField) -> String {
    let mut out = String::from("lon,lat,value\n");
    let g = &field.grid;
    for j in 0..g.n_lat {
        for i in 0..g.n_lon {
            let v = field.value_at(i, j);
            if v.is_finite() {
                let p = g.node(i, j);
                out.push_str(&format!("{},{},{}\n", p.lon, p.lat, v));
            }
        }
    }
    out
}

fn write_contours(
    contours: &[Polyline],
    principal: &Polyline,
    level: f64,
    name: &str,
    out: &PathBuf,
) -> Result<()> {
    // principal first (rank 0), the rest by descending length
    let mut rest: Vec<&Polyline> = contours.iter().filter(|c| *c != principal).collect();
    rest.sort_by(|a, b| arc_length_km(b).total_cmp(&arc_length_km(a)));
    let mut features = vec![PolylineFeature { line: principal, name: name.to_string(), level: Some(level), rank: 0 }];
    for (k, line) in rest.into_iter().enumerate() {
        features.push(PolylineFeature { line, name: format!("{name}-{}", k + 1), level: Some(level), rank: k + 1 });
    }
    write_text(out, &crate::geodata::polylines_to_geojson(&features))
}

#[derive(Serialize)]
struct AnnReport {
    model: &'static str,
    seed: u64,
    resamples: usize,
    train_fraction: f64,
    hidden: Vec<usize>,
    activation: Activation,
    learning_rate: f64,
    epochs: usize,
    l2: f64,
    level: f64,
    accuracy_mean_resample: f64,
    accuracy_ensemble_mean: f64,
    n_contours: usize,
    principal_length_km: f64,
    per_resample_accuracy: Vec<f64>,
}

fn run_ann(args: &AnnArgs) -> std::result::Result<String, CliError> {
    let cfg = load_file_config(&args.model.common)?;
    let seed = cfg.resolve::<u64>("seed", args.model.seed, None).map_err(validation)?;
    let stores = cfg.resolve_existing_path("stores", args.model.stores.clone()).map_err(validation)?;
    let north = cfg
        .resolve("north-brand", args.model.north_brand.clone(), Some("Greggs".into()))
        .map_err(validation)?;
    let south = cfg
        .resolve("south-brand", args.model.south_brand.clone(), Some("Pret".into()))
        .map_err(validation)?;
    let resamples = cfg.resolve("resamples", args.model.resamples, Some(1000)).map_err(validation)?;
    let train_frac = cfg.resolve("train-frac", args.model.train_frac, Some(0.8)).map_err(validation)?;
    let (arch, train_cfg) = net_config(&cfg, &args.net, seed)?;
    let (bbox, n_lon, n_lat) = grid_spec(&cfg, &args.model.bbox, &args.model.grid_nlon, &args.model.grid_nlat)?;
    let out = cfg.resolve::<PathBuf>("out", args.model.out.clone(), None).map_err(validation)?;
    let report_path = cfg.resolve::<PathBuf>("report", args.model.report.clone(), None).map_err(validation)?;
    let field_path = cfg.resolve_opt::<PathBuf>("field", args.field.clone()).map_err(validation)?;
    let mask = load_optional_boundary(&cfg, &args.model.boundary)?;
    let pool = thread_pool(&args.model.common, &cfg)?;

    let dataset = load_store_csv(&stores, &north, &south).map_err(validation)?;
    let plan = ResamplePlan::new(resamples, seed).map_err(validation)?;
    let split_spec = SplitSpec::new(train_frac, true, seed).map_err(validation)?;
    let grid = make_grid(bbox, n_lon, n_lat, mask.as_ref())?;

    let outcome = pool.install(|| brand_field(&dataset, &grid, &plan, &split_spec, &arch, &train_cfg))?;
    let level = 0.5;
    let contours = extract_contours(&outcome.field, &ContourSpec::new(level)?)?;
    let principal = principal_contour(&contours).expect("extract_contours returns nonempty").clone();
    let principal_length = arc_length_km(&principal);

    write_contours(&contours, &principal, level, "ann", &out)?;
    if let Some(path) = &field_path {
        write_text(path, &field_csv(&outcome.field))?;
    }
    let report = AnnReport {
        model: "ann",
        seed,
        resamples,
        train_fraction: train_frac,
        hidden: arch.hidden_sizes.clone(),
        activation: arch.activation,
        learning_rate: train_cfg.learning_rate,
        epochs: train_cfg.epochs,
        l2: train_cfg.l2,
        level,
        accuracy_mean_resample: outcome.mean_resample_accuracy,
        accuracy_ensemble_mean: outcome.ensemble_mean_accuracy,
        n_contours: contours.len(),
        principal_length_km: principal_length,
        per_resample_accuracy: outcome.per_resample_accuracy,
    };
    write_text(&report_path, &report_json(&report))?;
    Ok(format!(
        "ann: accuracy_mean_resample={:.4} contours={} principal_length_km={:.1}",
        report.accuracy_mean_resample,
        contours.len(),
        principal_length
    ))
}

#[derive(Serialize)]
struct GdhiReport {
    model: &'static str,
    seed: u64,
    seed_ensemble: usize,
    train_fraction: f64,
    national_mean: f64,
    scale_lo: f64,
    scale_hi: f64,
    level: f64,
    mean_abs_score: f64,
    mean_r_squared: f64,
    n_contours: usize,
    principal_length_km: f64,
    per_seed_abs_score: Vec<f64>,
}

fn run_gdhi(args: &GdhiArgs) -> std::result::Result<String, CliError> {
    let cfg = load_file_config(&args.common)?;
    let seed = cfg.resolve::<u64>("seed", args.seed, None).map_err(validation)?;
    let income_path = cfg.resolve_existing_path("income", args.income.clone()).map_err(validation)?;
    let train_frac = cfg.resolve("train-frac", args.train_frac, Some(0.8)).map_err(validation)?;
    let seed_ensemble = cfg.resolve("seed-ensemble", args.seed_ensemble, Some(10)).map_err(validation)?;
    let national_mean = cfg.resolve_opt::<f64>("national-mean", args.national_mean).map_err(validation)?;
    let (arch, train_cfg) = net_config(&cfg, &args.net, seed)?;
    let (bbox, n_lon, n_lat) = grid_spec(&cfg, &args.bbox, &args.grid_nlon, &args.grid_nlat)?;
    let out = cfg.resolve::<PathBuf>("out", args.out.clone(), None).map_err(validation)?;
    let report_path = cfg.resolve::<PathBuf>("report", args.report.clone(), None).map_err(validation)?;
    let field_path = cfg.resolve_opt::<PathBuf>("field", args.field.clone()).map_err(validation)?;
    let mask = load_optional_boundary(&cfg, &args.boundary)?;
    let pool = thread_pool(&args.common, &cfg)?;

    let mut income = load_income_csv(&income_path).map_err(validation)?;
    if let Some(mean) = national_mean {
        income = income.with_national_mean(mean).map_err(validation)?;
    }
    let split_spec = SplitSpec::new(train_frac, false, seed).map_err(validation)?;
    let grid = make_grid(bbox, n_lon, n_lat, mask.as_ref())?;

    let outcome = pool.install(|| gdhi_field(&income, &grid, &arch, &train_cfg, &split_spec, seed_ensemble))?;
    let contours = extract_contours(&outcome.field, &ContourSpec::new(outcome.level)?)?;
    let principal = principal_contour(&contours).expect("extract_contours returns nonempty").clone();
    let principal_length = arc_length_km(&principal);

    write_contours(&contours, &principal, outcome.level, "gdhi", &out)?;
    if let Some(path) = &field_path {
        write_text(path, &field_csv(&outcome.field))?;
    }
    let report = GdhiReport {
        model: "gdhi",
        seed,
        seed_ensemble,
        train_fraction: train_frac,
        national_mean: income.national_mean(),
        scale_lo: outcome.lo,
        scale_hi: outcome.hi,
        level: outcome.level,
        mean_abs_score: outcome.mean_abs_score,
        mean_r_squared: outcome.mean_r_squared,
        n_contours: contours.len(),
        principal_length_km: principal_length,
        per_seed_abs_score: outcome.per_seed_abs_score,
    };
    write_text(&report_path, &report_json(&report))?;
    Ok(format!(
        "gdhi: mean_abs_score={:.4} level={:.4} contours={} principal_length_km={:.1}",
        report.mean_abs_score,
        report.level,
        contours.len(),
        principal_length
    ))
}

fn run_compare(args: &CompareArgs) -> std::result::Result<String, CliError> {
    let cfg = load_file_config(&args.common)?;
    if args.lines.is_empty() {
        return Err(CliError::Validation("compare needs at least one --lines file".into()));
    }
    let out = cfg.resolve::<PathBuf>("out", args.out.clone(), None).map_err(validation)?;
    let samples = cfg.resolve("samples", args.samples, Some(200)).map_err(validation)?;
    if samples < 2 {
        return Err(CliError::Validation("--samples must be >= 2".into()));
    }

    let mut lines: Vec<(String, Polyline)> = Vec::new();
    for path in &args.lines {
        if !path.exists() {
            return Err(CliError::Validation(format!("file not found: {}", path.display())));
        }
        let mut loaded = load_lines(path).map_err(validation)?;
        if loaded.is_empty() {
            return Err(CliError::Validation(format!("{}: no LineString features", path.display())));
        }
        // principal line per file: rank 0 when tagged, else the first
        loaded.sort_by_key(|(_, _, rank)| rank.unwrap_or(usize::MAX));
        let (name, line, _) = loaded.swap_remove(0);
        let mut unique = name;
        while lines.iter().any(|(n, _)| *n == unique) {
            unique.push('+');
        }
        lines.push((unique, line));
    }

    let landmarks: Vec<Landmark> = match cfg.resolve_existing_path_opt("landmarks", args.landmarks.clone()).map_err(validation)? {
        Some(path) => load_landmarks_csv(&path).map_err(validation)?,
        None => Vec::new(),
    };
    let reference: Option<ReferenceLine> =
        match cfg.resolve_existing_path_opt("reference", args.reference.clone()).map_err(validation)? {
            Some(path) => Some(load_reference_line(&path).map_err(validation)?),
            None => None,
        };
    let mut accuracies = BTreeMap::new();
    for entry in &args.accuracy {
        let Some((name, value)) = entry.split_once('=') else {
            return Err(CliError::Validation(format!("--accuracy wants name=value, got {entry:?}")));
        };
        let value: f64 = value
            .parse()
            .map_err(|_| CliError::Validation(format!("--accuracy value {value:?} is not a number")))?;
        accuracies.insert(name.to_string(), value);
    }

    let report = build_report(&lines, &landmarks, reference.as_ref(), accuracies, samples);
    write_text(&out, &report_json(&report))?;

    let nearest = report
        .landmark_distances
        .values()
        .flat_map(|per| per.values())
        .fold(f64::INFINITY, |a, &b| a.min(b));
    let nearest_text = if nearest.is_finite() { format!(" nearest_landmark_km={nearest:.2}") } else { String::new() };
    Ok(format!("compare: lines={}{nearest_text} -> {}", lines.len(), out.display()))
}

fn run_render(args: &RenderArgs) -> std::result::Result<String, CliError> {
    let cfg = load_file_config(&args.common)?;
    let out = cfg.resolve::<PathBuf>("out", args.out.clone(), None).map_err(validation)?;
    let bbox = match cfg.resolve_opt::<String>("bbox", args.bbox.clone()).map_err(validation)? {
        Some(text) => parse_bbox(&text).map_err(validation)?,
        None => ENGLAND_BBOX,
    };
    let width = cfg.resolve("width", args.width, Some(820.0)).map_err(validation)?;
    let height = cfg.resolve("height", args.height, Some(600.0)).map_err(validation)?;

    // anchor level: flag, else the report's `level`, else 0.5
    let mut level = cfg.resolve_opt::<f64>("level", args.level).map_err(validation)?;
    if level.is_none() {
        if let Some(path) = cfg.resolve_existing_path_opt("report", args.report.clone()).map_err(validation)? {
            let text = std::fs::read_to_string(&path)
                .map_err(|source| validation(Error::Io { path: path.clone(), source }))?;
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            level = value.get("level").and_then(serde_json::Value::as_f64);
        }
    }
    let level = level.unwrap_or(0.5);

    let mut layers = Vec::new();
    if let Some(path) = cfg.resolve_existing_path_opt("field", args.field.clone()).map_err(validation)? {
        let text =
            std::fs::read_to_string(&path).map_err(|source| validation(Error::Io { path: path.clone(), source }))?;
        let mut samples = Vec::new();
        for (k, line) in text.lines().enumerate().skip(1) {
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return Err(CliError::Validation(format!("{}: line {}: want lon,lat,value", path.display(), k + 1)));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Validation(format!("{}: line {}: bad number {s:?}", path.display(), k + 1)))
            };
            samples.push((parse(parts[0])?, parse(parts[1])?, parse(parts[2])?));
        }
        let field = ScalarField::from_samples(&samples).map_err(validation)?;
        layers.push(Layer::Heatmap { field, level });
    }
    if let Some(path) = cfg.resolve_existing_path_opt("boundary", args.boundary.clone()).map_err(validation)? {
        layers.push(Layer::Boundary { mask: load_boundary(&path).map_err(validation)? });
    }
    if let Some(path) = cfg.resolve_existing_path_opt("stores", args.stores.clone()).map_err(validation)? {
        let north = cfg
            .resolve("north-brand", args.north_brand.clone(), Some("Greggs".into()))
            .map_err(validation)?;
        let south = cfg
            .resolve("south-brand", args.south_brand.clone(), Some("Pret".into()))
            .map_err(validation)?;
        let dataset = load_store_csv(&path, &north, &south).map_err(validation)?;
        layers.push(Layer::Points { points: dataset.points().to_vec(), radius_px: 2.0 });
    }
    for path in &args.lines {
        if !path.exists() {
            return Err(CliError::Validation(format!("file not found: {}", path.display())));
        }
        let loaded = load_lines(path).map_err(validation)?;
        for (_, line, rank) in loaded {
            let principal = rank.unwrap_or(0) == 0;
            layers.push(Layer::Line {
                line,
                stroke: "#000000".into(),
                width_px: if principal { 2.0 } else { 1.0 },
                dashed: false,
            });
        }
    }
    if let Some(path) = cfg.resolve_existing_path_opt("reference", args.reference.clone()).map_err(validation)? {
        let reference = load_reference_line(&path).map_err(validation)?;
        layers.push(Layer::Line { line: reference.polyline, stroke: "#555555".into(), width_px: 1.5, dashed: true });
    }
    if let Some(path) = cfg.resolve_existing_path_opt("landmarks", args.landmarks.clone()).map_err(validation)? {
        for landmark in load_landmarks_csv(&path).map_err(validation)? {
            layers.push(Layer::Landmark { landmark });
        }
    }
    if layers.is_empty() {
        return Err(CliError::Validation("nothing to render: give --field, --stores, --lines, ...".into()));
    }

    let scene = Scene {
        viewport: Viewport { bbox, width_px: width, height_px: height, aspect_cos_lat: args.aspect_cos_lat },
        layers,
    };
    let svg = render_svg(&scene)?;
    write_text(&out, &svg)?;
    Ok(format!("render: wrote {}", out.display()))
}

/// Nearest landmark distance over a set of lines (summary helper shared
/// with tests).
pub fn nearest_landmark_km(lines: &[Polyline], landmarks: &[Landmark]) -> Option<f64> {
    lines
        .iter()
        .flat_map(|line| landmarks.iter().map(move |lm| point_to_polyline_km(lm.point, line)))
        .min_by(f64::total_cmp)
}
