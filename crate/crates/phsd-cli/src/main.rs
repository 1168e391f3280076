//! Command-line driver: build radial sampling masks, take masked Fourier
//! measurements, run the sparse reconstructions, and score the results.
//!
//! Exit codes: 0 success, 1 usage error, 2 malformed or mismatched data,
//! 3 numerical failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use phsd::io::{
    read_fits_primary, read_mask, read_pgm, write_comparison_csv, write_mask, write_pgm,
    write_report_csv, ExperimentReport,
};
use phsd::{
    bp_douglas_rachford, lasso_fista, measure, operator_norm, psnr, radial_mask,
    ComposedOperator, Image, MeasurementVector, PhsdError, SamplingMask, SolveMethod,
    SolveResult, SolverConfig, TransformHandle,
};

#[derive(Parser)]
#[command(name = "phsd", version, about = "Sparse image reconstruction from radial Fourier samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a radial-line sampling mask and write it to a file.
    Mask(MaskArgs),
    /// Apply a sampling mask to an image and write the measured values.
    Measure(MeasureArgs),
    /// Reconstruct an image from masked Fourier measurements.
    Reconstruct(ReconstructArgs),
    /// Print the PSNR of a test image against a reference.
    Evaluate(EvaluateArgs),
    /// Reconstruct with both bases under one mask and tabulate the PSNR gap.
    Compare(RunArgs),
}

#[derive(Args)]
struct MaskArgs {
    /// Grid size n; the mask covers an n x n Fourier grid.
    #[arg(long)]
    size: usize,

    /// Number of radial lines.
    #[arg(long, default_value_t = 50)]
    lines: usize,

    /// Sample points per line; defaults to the grid size.
    #[arg(long, alias = "points-per-line")]
    points: Option<usize>,

    /// Close the mask under Fourier conjugation.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    hermitian: bool,

    /// Reserved for jittered mask variants; the fixed geometry ignores it.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output mask file.
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct MeasureArgs {
    /// Input image (PGM or FITS).
    #[arg(long, short)]
    input: PathBuf,

    /// Mask file to sample with.
    #[arg(long)]
    mask: PathBuf,

    /// Output measurement file.
    #[arg(long, short)]
    output: PathBuf,

    /// Swap the image axes before measuring.
    #[arg(long, action = ArgAction::SetTrue)]
    transpose: bool,

    /// Cap for the power-of-two center crop; 0 keeps the largest fit.
    #[arg(long, default_value_t = 0)]
    max_size: usize,
}

#[derive(Args)]
struct ReconstructArgs {
    #[command(flatten)]
    run: RunArgs,

    /// Sparsifying basis to reconstruct with.
    #[arg(long, value_enum, default_value_t = BasisChoice::Phsd)]
    basis: BasisChoice,
}

#[derive(Args)]
struct RunArgs {
    /// Input image (PGM or FITS).
    #[arg(long, short)]
    input: PathBuf,

    /// Directory for reconstructions, the mask, and the CSV report.
    #[arg(long, short)]
    output_dir: PathBuf,

    /// Wavelet order p.
    #[arg(long, default_value_t = 2)]
    order: u8,

    /// Decomposition levels.
    #[arg(long, default_value_t = 4)]
    levels: u8,

    /// Physical scale mapping row frequency to the exponential rate.
    #[arg(long, default_value_t = 1.0)]
    y_scale: f64,

    /// Radial lines in the generated mask.
    #[arg(long, default_value_t = 50)]
    lines: usize,

    /// Sample points per line; defaults to the grid size.
    #[arg(long, alias = "points-per-line")]
    points: Option<usize>,

    /// Close the generated mask under Fourier conjugation.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    hermitian: bool,

    /// Use this mask file instead of generating one.
    #[arg(long, conflicts_with_all = ["lines", "points", "hermitian", "seed"])]
    mask_file: Option<PathBuf>,

    /// Solver to run.
    #[arg(long, value_enum, default_value_t = SolverChoice::Both)]
    solver: SolverChoice,

    /// Lasso penalty weight.
    #[arg(long, default_value_t = 1.0)]
    mu: f64,

    /// Prox scale of the equality-constrained solver.
    #[arg(long, default_value_t = 100.0)]
    gamma: f64,

    /// Solver iteration budget.
    #[arg(long, default_value_t = 10)]
    iterations: usize,

    /// Swap the image axes before reconstructing.
    #[arg(long, action = ArgAction::SetTrue)]
    transpose: bool,

    /// Mask generation seed (the fixed geometry ignores it).
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Cap for the power-of-two center crop; 0 keeps the largest fit.
    #[arg(long, default_value_t = 0)]
    max_size: usize,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Reference image (PGM or FITS).
    #[arg(long)]
    reference: PathBuf,

    /// Image to score against the reference.
    #[arg(long)]
    test: PathBuf,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum BasisChoice {
    Phsd,
    Daub2d,
    Both,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum SolverChoice {
    Bp,
    Lasso,
    Both,
}

impl SolverChoice {
    fn methods(self) -> Vec<SolveMethod> {
        match self {
            SolverChoice::Bp => vec![SolveMethod::Bp],
            SolverChoice::Lasso => vec![SolveMethod::Lasso],
            SolverChoice::Both => vec![SolveMethod::Bp, SolveMethod::Lasso],
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Mask(args) => cmd_mask(&args),
        Command::Measure(args) => cmd_measure(&args),
        Command::Reconstruct(args) => cmd_run(&args.run, args.basis, false),
        Command::Evaluate(args) => cmd_evaluate(&args),
        Command::Compare(args) => cmd_run(&args, BasisChoice::Both, true),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &PhsdError) -> u8 {
    match err {
        PhsdError::Param(_) => 1,
        PhsdError::Dims(_) | PhsdError::Format(_) | PhsdError::Io(_) => 2,
        PhsdError::Numerics(_) => 3,
    }
}

/// Read a PGM or FITS image, optionally transpose, then center-crop each
/// axis to a power of two. Returns the image and a `WxH->WxH` note when the
/// crop changed the shape.
fn read_input_image(
    path: &Path,
    transpose: bool,
    max_size: usize,
) -> Result<(Image, Option<String>), PhsdError> {
    let bytes = fs::read(path)?;
    let mut img = decode_image(&bytes, path)?;
    if transpose {
        img = img.transposed();
    }
    let cropped = img.center_crop_pow2(max_size);
    let crop = (cropped.width != img.width || cropped.height != img.height)
        .then(|| format!("{}x{}->{}x{}", img.width, img.height, cropped.width, cropped.height));
    Ok((cropped, crop))
}

fn decode_image(bytes: &[u8], path: &Path) -> Result<Image, PhsdError> {
    if bytes.starts_with(b"P") {
        read_pgm(bytes)
    } else if bytes.starts_with(b"SIMPLE") {
        read_fits_primary(bytes)
    } else {
        Err(PhsdError::format(format!(
            "unrecognized image format in {}: expected PGM (P5) or FITS",
            path.display()
        )))
    }
}

fn image_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "image".into())
}

fn cmd_mask(args: &MaskArgs) -> Result<(), PhsdError> {
    let points = args.points.unwrap_or(args.size);
    let mask = radial_mask(args.size, args.lines, points, args.hermitian, args.seed)?;
    fs::write(&args.output, write_mask(&mask))?;
    println!(
        "wrote {}: n={}, lines={}, points={}, hermitian={}, M={}",
        args.output.display(),
        args.size,
        args.lines,
        points,
        args.hermitian,
        mask.len()
    );
    Ok(())
}

fn cmd_measure(args: &MeasureArgs) -> Result<(), PhsdError> {
    let (img, crop) = read_input_image(&args.input, args.transpose, args.max_size)?;
    if let Some(note) = &crop {
        eprintln!("note: center-cropped input {note}");
    }
    let mask = read_mask(&fs::read(&args.mask)?)?;
    let meas = measure(&img, &mask)?;
    let mut out = String::with_capacity(meas.values.len() * 48 + 16);
    out.push_str(&format!("meas {}\n", meas.values.len()));
    for ((u, v), z) in mask.indices.iter().zip(&meas.values) {
        out.push_str(&format!("{u} {v} {:.16e} {:.16e}\n", z.re, z.im));
    }
    fs::write(&args.output, out)?;
    println!("wrote {}: M={} from {}", args.output.display(), meas.values.len(), mask.id());
    Ok(())
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<(), PhsdError> {
    let reference = decode_image(&fs::read(&args.reference)?, &args.reference)?;
    let test = decode_image(&fs::read(&args.test)?, &args.test)?;
    let value = psnr(&reference, &test)?;
    if value.is_finite() {
        println!("psnr_db = {value:.6}");
    } else {
        println!("psnr_db = inf");
    }
    Ok(())
}

/// Mask for a run: read from file (shape-checked against the image) or
/// generate the radial geometry. Returns the mask and, for generated masks,
/// the nominal lines/points for the report.
fn obtain_mask(
    args: &RunArgs,
    img: &Image,
) -> Result<(SamplingMask, Option<usize>, Option<usize>), PhsdError> {
    if let Some(path) = &args.mask_file {
        let mask = read_mask(&fs::read(path)?)?;
        if mask.n_t != img.height || mask.n_y != img.width {
            return Err(PhsdError::dims(format!(
                "mask grid {}x{} does not match image {}x{}",
                mask.n_t, mask.n_y, img.height, img.width
            )));
        }
        return Ok((mask, None, None));
    }
    if img.width != img.height {
        return Err(PhsdError::param(format!(
            "generated radial masks need a square grid, image is {}x{}; supply --mask-file",
            img.width, img.height
        )));
    }
    let points = args.points.unwrap_or(img.width);
    let mask = radial_mask(img.width, args.lines, points, args.hermitian, args.seed)?;
    Ok((mask, Some(args.lines), Some(points)))
}

struct RowSpec {
    basis: BasisChoice,
    method: SolveMethod,
}

fn row_specs(basis: BasisChoice, solver: SolverChoice) -> Vec<RowSpec> {
    let bases = match basis {
        BasisChoice::Phsd => vec![BasisChoice::Phsd],
        BasisChoice::Daub2d => vec![BasisChoice::Daub2d],
        BasisChoice::Both => vec![BasisChoice::Phsd, BasisChoice::Daub2d],
    };
    let mut specs = Vec::new();
    for &b in &bases {
        for &m in &solver.methods() {
            specs.push(RowSpec { basis: b, method: m });
        }
    }
    specs
}

fn method_name(method: SolveMethod) -> &'static str {
    match method {
        SolveMethod::Bp => "bp",
        SolveMethod::Lasso => "lasso",
    }
}

struct RowOutcome {
    report: ExperimentReport,
    image: Image,
}

#[allow(clippy::too_many_arguments)]
fn run_row(
    spec: &RowSpec,
    id: &str,
    reference: &Image,
    mask: &SamplingMask,
    y: &MeasurementVector,
    args: &RunArgs,
    lines: Option<usize>,
    points: Option<usize>,
    crop: Option<String>,
) -> Result<RowOutcome, PhsdError> {
    let transform = match spec.basis {
        BasisChoice::Phsd => TransformHandle::phsd(
            reference.height,
            reference.width,
            args.order,
            args.levels,
            args.y_scale,
        )?,
        BasisChoice::Daub2d => {
            TransformHandle::daub2d(reference.height, reference.width, args.order, args.levels)?
        }
        BasisChoice::Both => unreachable!("row specs never carry Both"),
    };
    let op = ComposedOperator::new(mask.clone(), transform)?;
    let norm = operator_norm(&op, 60, 0);

    let mut cfg = match spec.method {
        SolveMethod::Bp => SolverConfig::bp(),
        SolveMethod::Lasso => SolverConfig::lasso(),
    };
    cfg.mu = args.mu;
    cfg.gamma = args.gamma;
    cfg.iterations = args.iterations;

    let start = Instant::now();
    let result: SolveResult = match spec.method {
        SolveMethod::Bp => bp_douglas_rachford(&op, y, &cfg)?,
        SolveMethod::Lasso => lasso_fista(&op, y, &cfg)?,
    };
    let (recon, imag_residue) = op.transform().inverse(&result.beta, reference.bit_depth)?;
    let wall = start.elapsed().as_secs_f64();

    let psnr_db = psnr(reference, &recon)?;
    let max_mod = result.beta.values.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let sparsity_k = result.beta.sparsity_report(1e-3 * max_mod).k;

    let report = ExperimentReport {
        image_id: id.to_string(),
        basis_tag: op.transform().basis_tag().to_string(),
        method: method_name(spec.method).to_string(),
        lines,
        points,
        hermitian: mask.hermitian_completed,
        measurements: mask.len(),
        n: op.coefficient_len(),
        iterations: result.iterations_run,
        mu: cfg.mu,
        gamma: cfg.gamma,
        psnr_db,
        final_residual: result.residual,
        kkt_residual: result.kkt_residual,
        sparsity_k,
        operator_norm: norm,
        lambda_clamped_pairs: op.transform().clamped_pairs(),
        imag_residue,
        crop,
        wall_time_seconds: wall,
    };
    Ok(RowOutcome { report, image: recon })
}

fn cmd_run(args: &RunArgs, basis: BasisChoice, comparison: bool) -> Result<(), PhsdError> {
    let (img, crop) = read_input_image(&args.input, args.transpose, args.max_size)?;
    if let Some(note) = &crop {
        eprintln!("note: center-cropped input {note}");
    }
    let id = image_id(&args.input);
    fs::create_dir_all(&args.output_dir)?;

    let (mask, lines, points) = obtain_mask(args, &img)?;
    fs::write(args.output_dir.join(format!("{id}_mask.txt")), write_mask(&mask))?;
    let y = measure(&img, &mask)?;

    let mut rows: Vec<ExperimentReport> = Vec::new();
    let mut first_failure: Option<PhsdError> = None;
    for spec in row_specs(basis, args.solver) {
        match run_row(&spec, &id, &img, &mask, &y, args, lines, points, crop.clone()) {
            Ok(outcome) => {
                let name =
                    format!("{id}_{}_{}.pgm", outcome.report.basis_tag, outcome.report.method);
                fs::write(args.output_dir.join(&name), write_pgm(&outcome.image))?;
                println!(
                    "{}/{}: psnr={:.3} dB, residual={:.3e}, M={}, wrote {name}",
                    outcome.report.basis_tag,
                    outcome.report.method,
                    outcome.report.psnr_db,
                    outcome.report.final_residual,
                    outcome.report.measurements,
                );
                rows.push(outcome.report);
            }
            Err(err) => {
                eprintln!("error in row {}/{}: {err}", spec_label(&spec), method_name(spec.method));
                first_failure.get_or_insert(err);
            }
        }
    }

    if comparison {
        let deltas = psnr_deltas(&rows);
        for (row, delta) in rows.iter().zip(&deltas) {
            if let Some(d) = delta {
                println!("{}/{}: psnr_delta_db={:+.3} vs phsd", row.basis_tag, row.method, d);
            }
        }
        let csv = write_comparison_csv(&rows, &deltas)?;
        fs::write(args.output_dir.join("comparison.csv"), csv)?;
    } else {
        fs::write(args.output_dir.join("report.csv"), write_report_csv(&rows)?)?;
    }

    match first_failure {
        Some(err) => Err(err),
        None => Ok(()),
    }
}

fn spec_label(spec: &RowSpec) -> &'static str {
    match spec.basis {
        BasisChoice::Phsd => "phsd",
        BasisChoice::Daub2d => "daub2d",
        BasisChoice::Both => "both",
    }
}

/// PSNR gap of each row against the same-solver row in the hybrid basis;
/// empty for the hybrid rows themselves and when no counterpart exists.
fn psnr_deltas(rows: &[ExperimentReport]) -> Vec<Option<f64>> {
    rows.iter()
        .map(|row| {
            if row.basis_tag.starts_with("phsd") {
                return None;
            }
            rows.iter()
                .find(|r| r.basis_tag.starts_with("phsd") && r.method == row.method)
                .map(|r| row.psnr_db - r.psnr_db)
        })
        .collect()
}
