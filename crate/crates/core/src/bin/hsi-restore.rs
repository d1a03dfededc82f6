use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hsi_restore::io::{
    band_pgm, denormalize_bands, load_ht3, metrics_csv, normalize_bands, parse_run_config, save_ht3, trace_csv,
    write_atomic, RunConfig,
};
use hsi_restore::metrics::{mpsnr, mssim, MetricsReport};
use hsi_restore::noise::{apply_noise, NoiseSpec};
use hsi_restore::solver::denoise;
use hsi_restore::synthetic::{low_rank_scene, SceneSpec};
use hsi_restore::{Error, Result, Tensor3};

/// Mixed-noise restoration of hyperspectral cubes stored as HT31 files.
#[derive(Parser)]
#[command(name = "hsi-restore", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Corrupt a clean cube with one of the simulated noise cases.
    Simulate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Noise case 1-6; may instead come from `case_id` in --spec.
        #[arg(long)]
        case: Option<u8>,
        #[arg(long)]
        seed: Option<u64>,
        /// `key = value` file overriding individual noise parameters.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Also write the resolved spec to this file.
        #[arg(long)]
        echo: Option<PathBuf>,
    },
    /// Restore a noisy cube.
    Denoise {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Clean cube for per-iteration quality in the trace.
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out_sparse: Option<PathBuf>,
        #[arg(long)]
        out_gauss: Option<PathBuf>,
        /// Map each band to [0, 1] before solving and back afterwards.
        #[arg(long)]
        normalize: bool,
    },
    /// Quality report of a cube against a reference.
    Metrics {
        #[arg(long)]
        x: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export one band (1-based) as an 8-bit PGM image.
    Bands {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        band: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-band min-max normalization to [0, 1].
    Normalize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a seeded low-rank test scene with values in [0, 1].
    Synth {
        /// Cube size as `rows,cols,bands`.
        #[arg(long, value_parser = parse_dims)]
        dims: (usize, usize, usize),
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        components: usize,
        #[arg(long)]
        no_blocks: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_dims(s: &str) -> std::result::Result<(usize, usize, usize), String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("bad dimension `{p}`")))
        .collect::<std::result::Result<_, _>>()?;
    match parts[..] {
        [m, n, p] if m > 0 && n > 0 && p > 0 => Ok((m, n, p)),
        _ => Err("expected three positive integers `rows,cols,bands`".into()),
    }
}

fn read_config(path: &Path) -> Result<RunConfig> {
    parse_run_config(&std::fs::read_to_string(path)?)
}

fn check_unit_range(t: &Tensor3, path: &Path) -> Result<()> {
    if t.as_slice().iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidParameter(format!(
            "{} has values outside [0, 1]; run `normalize` first",
            path.display()
        )));
    }
    Ok(())
}

fn check_dims(expected: &Tensor3, found: &Tensor3) -> Result<()> {
    if expected.dims() != found.dims() {
        return Err(Error::DimensionMismatch {
            expected: expected.dims(),
            found: found.dims(),
        });
    }
    Ok(())
}

fn simulate(
    input: &Path,
    out: &Path,
    case: Option<u8>,
    seed: Option<u64>,
    spec_file: Option<&Path>,
    echo: Option<&Path>,
) -> Result<()> {
    let clean = load_ht3(input)?;
    check_unit_range(&clean, input)?;
    let bands = clean.dims().2;
    let overrides = spec_file.map(read_config).transpose()?;
    let file_case = overrides.as_ref().and_then(RunConfig::case_id);
    let case = match (case, file_case) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::InvalidParameter(format!("--case {a} conflicts with case_id={b} in the spec file")));
        }
        (Some(c), _) | (None, Some(c)) => c,
        (None, None) => return Err(Error::InvalidParameter("no noise case given (--case or case_id)".into())),
    };
    let mut spec = NoiseSpec::default_case(case, bands)?;
    if let Some(cfg) = &overrides {
        cfg.override_noise(&mut spec);
    }
    if let Some(s) = seed {
        spec.seed = s;
    }
    spec.validate(bands)?;
    let (noisy, _) = apply_noise(&clean, &spec)?;
    let text = spec.to_config();
    save_ht3(out, &noisy)?;
    if let Some(p) = echo {
        write_atomic(p, text.as_bytes())?;
    }
    print!("{text}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_denoise(
    input: &Path,
    out: &Path,
    config: Option<&Path>,
    reference: Option<&Path>,
    trace: Option<&Path>,
    out_sparse: Option<&Path>,
    out_gauss: Option<&Path>,
    normalize: bool,
) -> Result<()> {
    let observed = load_ht3(input)?;
    let cfg = match config {
        Some(p) => read_config(p)?.solver,
        None => Default::default(),
    };
    cfg.validate()?;
    let clean = reference.map(load_ht3).transpose()?;
    if let Some(c) = &clean {
        check_dims(&observed, c)?;
    }
    let (work, transform) = if normalize {
        let (t, tr) = normalize_bands(&observed);
        (t, Some(tr))
    } else {
        (observed.clone(), None)
    };
    let work_ref = match (&clean, &transform) {
        (Some(c), Some(tr)) => Some(tr.apply(c)),
        (Some(c), None) => Some(c.clone()),
        _ => None,
    };
    let result = denoise(&work, &cfg, work_ref.as_ref())?;
    let restore = |t: &Tensor3| match &transform {
        Some(tr) => denormalize_bands(t, tr),
        None => t.clone(),
    };
    let low_rank = restore(&result.low_rank);

    save_ht3(out, &low_rank)?;
    if let Some(p) = out_sparse {
        save_ht3(p, &scale_only(&result.sparse, transform.as_ref()))?;
    }
    if let Some(p) = out_gauss {
        save_ht3(p, &scale_only(&result.gaussian, transform.as_ref()))?;
    }
    if let Some(p) = trace {
        write_atomic(p, trace_csv(&result.trace).as_bytes())?;
    }

    let rows = result.trace.rows.len();
    let last = result.trace.rows.last().map_or(0.0, |r| r.max_error());
    let status = if result.trace.converged { "converged" } else { "stopped" };
    print!("{status} after {rows} iterations, max error {last:.3e}");
    if let Some(c) = &clean {
        print!(
            "; mpsnr {:.3} -> {:.3} dB, mssim {:.4} -> {:.4}",
            mpsnr(&observed, c)?,
            mpsnr(&low_rank, c)?,
            mssim(&observed, c)?,
            mssim(&low_rank, c)?
        );
    }
    println!();
    Ok(())
}

/// Maps a noise component back to original gray levels: scale only, no offset.
fn scale_only(t: &Tensor3, transform: Option<&hsi_restore::io::BandTransform>) -> Tensor3 {
    match transform {
        Some(tr) => {
            let zero = denormalize_bands(&Tensor3::zeros(t.dims()), tr);
            &denormalize_bands(t, tr) - &zero
        }
        None => t.clone(),
    }
}

fn run_metrics(x: &Path, reference: &Path, out: &Path) -> Result<()> {
    let xt = load_ht3(x)?;
    let rt = load_ht3(reference)?;
    check_dims(&rt, &xt)?;
    let report = MetricsReport::compute(&xt, &rt)?;
    write_atomic(out, metrics_csv(&report).as_bytes())?;
    println!(
        "mpsnr {:.4} mssim {:.4} ergas {:.4} msad {:.4}",
        report.mpsnr, report.mssim, report.ergas, report.msad
    );
    Ok(())
}

fn run_bands(input: &Path, band: usize, out: &Path) -> Result<()> {
    let t = load_ht3(input)?;
    let bands = t.dims().2;
    if band == 0 || band > bands {
        return Err(Error::InvalidParameter(format!("band {band} outside 1..={bands}")));
    }
    write_atomic(out, &band_pgm(&t, band - 1)?)
}

fn run_normalize(input: &Path, out: &Path) -> Result<()> {
    let (t, _) = normalize_bands(&load_ht3(input)?);
    save_ht3(out, &t)
}

fn run_synth(dims: (usize, usize, usize), seed: u64, components: usize, no_blocks: bool, out: &Path) -> Result<()> {
    if components == 0 && no_blocks {
        return Err(Error::InvalidParameter("scene needs at least one component".into()));
    }
    let mut spec = SceneSpec::new(dims, seed);
    spec.smooth_components = components;
    spec.blocks = !no_blocks;
    save_ht3(out, &low_rank_scene(&spec))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { input, out, case, seed, spec, echo } => {
            simulate(&input, &out, case, seed, spec.as_deref(), echo.as_deref())
        }
        Command::Denoise { input, out, config, reference, trace, out_sparse, out_gauss, normalize } => run_denoise(
            &input,
            &out,
            config.as_deref(),
            reference.as_deref(),
            trace.as_deref(),
            out_sparse.as_deref(),
            out_gauss.as_deref(),
            normalize,
        ),
        Command::Metrics { x, reference, out } => run_metrics(&x, &reference, &out),
        Command::Bands { input, band, out } => run_bands(&input, band, &out),
        Command::Normalize { input, out } => run_normalize(&input, &out),
        Command::Synth { dims, seed, components, no_blocks, out } => {
            run_synth(dims, seed, components, no_blocks, &out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
