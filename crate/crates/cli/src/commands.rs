use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use geodesic_interp::io;
use geodesic_interp::metrics::{evaluate as score, EvalReport, MaskKind, Metric};
use geodesic_interp::sampling::{Density, SamplingSpec};
use geodesic_interp::synthetic::{generate_scene, SceneConfig};
use geodesic_interp::{derive_params, extend_sparse, Error, FilterParams, Sample, SparseField};
use rand::seq::index::sample as pick_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{
    Bandwidths, BenchArgs, EvaluateArgs, FixtureArgs, InterpolateArgs, SampleArgs, SweepArgs,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lib(e) if e.is_io() => 2,
            CliError::Lib(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage: {msg}"),
            CliError::Lib(e) => e.fmt(f),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult = Result<(), CliError>;

impl Bandwidths {
    fn params(&self) -> Result<FilterParams, Error> {
        derive_params(self.sigma_r, self.sigma_s)
    }
}

/// CSV sink: a file when a path is given, stdout otherwise.
fn emit_csv(out: Option<&Path>, header: &str, rows: &[String]) -> CliResult {
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    match out {
        Some(path) => fs::write(path, text).map_err(|source| {
            Error::Io {
                path: path.to_path_buf(),
                source,
            }
            .into()
        }),
        None => {
            // A closed stdout pipe is not worth an error code.
            let _ = std::io::stdout().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn no_empty_list(flag: &str, empty: bool) -> CliResult {
    if empty {
        return Err(CliError::Usage(format!(
            "--{flag} needs at least one entry"
        )));
    }
    Ok(())
}

pub fn interpolate(args: InterpolateArgs) -> CliResult {
    let params = args.bandwidths.params()?;
    let guidance = io::read_field(&args.guidance)?;
    let sparse = io::read_sparse(&args.sparse)?;
    let start = Instant::now();
    let dense = args.method.run(&sparse, &guidance, &params)?;
    let elapsed = start.elapsed().as_secs_f64();
    io::write_field(&args.out, &dense)?;
    println!("elapsed {elapsed:.6} s");
    Ok(())
}

pub fn sample(args: SampleArgs) -> CliResult {
    let gt = io::read_field(&args.gt)?;
    let guidance = io::read_field(&args.guidance)?;
    let sparse = SamplingSpec::new(args.mode, args.density).sample(&gt, &guidance)?;
    io::write_sparse(&args.out, &sparse)?;
    Ok(())
}

pub fn evaluate(args: EvaluateArgs) -> CliResult {
    let estimate = io::read_field(&args.estimate)?;
    let gt = io::read_field(&args.gt)?;
    let mask = args.mask.as_deref().map(io::read_mask).transpose()?;
    let start = Instant::now();
    let value = score(args.metric, &estimate, &gt, mask.as_ref())?;
    let report = EvalReport {
        metric: args.metric,
        value,
        mask: if mask.is_some() {
            MaskKind::External
        } else {
            MaskKind::All
        },
        density: 1.0,
        elapsed: start.elapsed().as_secs_f64(),
    };
    emit_csv(None, EvalReport::CSV_HEADER, &[report.csv_row()])
}

pub fn sweep(args: SweepArgs) -> CliResult {
    no_empty_list("densities", args.densities.is_empty())?;
    no_empty_list("methods", args.methods.is_empty())?;
    let params = args.bandwidths.params()?;
    let gt = io::read_field(&args.gt)?;
    let guidance = io::read_field(&args.guidance)?;
    let inputs = args
        .densities
        .iter()
        .map(|&d| {
            SamplingSpec::new(args.mode, d)
                .sample(&gt, &guidance)
                .map(|s| (d, s))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for method in &args.methods {
        for (density, sparse) in &inputs {
            let start = Instant::now();
            let dense = method.run(sparse, &guidance, &params)?;
            let elapsed = start.elapsed().as_secs_f64();
            let rmse = score(Metric::Rmse, &dense, &gt, None)?;
            rows.push(format!(
                "{method},{},{rmse},{elapsed}",
                density.inverse_root()
            ));
        }
    }
    emit_csv(
        args.out.as_deref(),
        "method,inv_root_density,rmse,elapsed",
        &rows,
    )
}

/// Random distinct sites with random scalar values.
fn random_samples(
    rng: &mut ChaCha8Rng,
    w: usize,
    h: usize,
    density: Density,
) -> Result<SparseField, Error> {
    let samples: Vec<Sample> = pick_indices(rng, w * h, density.count_of(w * h))
        .into_iter()
        .map(|i| Sample::new(i % w, i / w, [rng.gen_range(0.0..100.0)]))
        .collect();
    extend_sparse(&samples, w, h, 1)
}

pub fn bench(args: BenchArgs) -> CliResult {
    no_empty_list("densities", args.densities.is_empty())?;
    no_empty_list("methods", args.methods.is_empty())?;
    let params = args.bandwidths.params()?;
    let guidance = io::read_field(&args.guidance)?;
    let (w, h) = (guidance.width(), guidance.height());
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut rows = Vec::new();
    for &density in &args.densities {
        let sparse = random_samples(&mut rng, w, h, density)?;
        for method in &args.methods {
            let mut best = f64::INFINITY;
            for _ in 0..args.repeats {
                let start = Instant::now();
                method.run(&sparse, &guidance, &params)?;
                best = best.min(start.elapsed().as_secs_f64());
            }
            rows.push(format!(
                "{method},{},{},{},{best}",
                density.value(),
                density.inverse_root(),
                sparse.known_count()
            ));
        }
    }
    emit_csv(
        args.out.as_deref(),
        "method,density,inv_root_density,known,elapsed",
        &rows,
    )
}

pub fn fixture(args: FixtureArgs) -> CliResult {
    if args.width == 0 || args.height == 0 {
        return Err(CliError::Usage(
            "--width and --height must be positive".into(),
        ));
    }
    let scene = generate_scene(&SceneConfig::new(args.width, args.height), args.seed);
    io::write_pfm(&args.out_gt, &scene.disparity)?;
    io::write_image(&args.out_guidance, &scene.guidance)?;
    Ok(())
}
