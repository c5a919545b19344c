//! Subcommand implementations. Each writes its report to `out` and returns
//! errors instead of exiting.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use wtahash::datagen::{self, generate_artfc, ArtfcSpec, Dataset, FvecsReader};
use wtahash::eval::{self, Algorithm, BenchConfig, EvalReport};
use wtahash::trainer::{self, StopReason, TrainOptions};
use wtahash::wta::hash_columns;
use wtahash::{DenseMatrix, ModelConfig};

use crate::args::{BenchArgs, Cli, Command, GenArgs, HashArgs, Mode, TrainArgs};
use crate::format::{self, CodeWriter};
use crate::run_config::{default_algorithms, DatasetSource, Output, RunConfig};
use crate::{io_context, CliError, Result};

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Gen(a) => cmd_gen(&a, out),
        Command::Train(a) => cmd_train(&a, out),
        Command::Hash(a) => cmd_hash(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
    }
}

enum InputKind {
    Fvecs,
    Csv,
}

fn input_kind(path: &Path) -> Result<InputKind> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("fvecs") => Ok(InputKind::Fvecs),
        Some("csv" | "tsv" | "txt") => Ok(InputKind::Csv),
        _ => Err(CliError::Config(format!(
            "{}: unknown input format; expected a .fvecs or .csv file",
            path.display()
        ))),
    }
}

fn delimiter_byte(c: char) -> Result<u8> {
    u8::try_from(c)
        .ok()
        .filter(u8::is_ascii)
        .ok_or_else(|| CliError::Config(format!("delimiter must be a single ASCII character, got {c:?}")))
}

/// Names the file in I/O errors, which the library reports bare.
fn with_path(path: &Path) -> impl FnOnce(wtahash::Error) -> CliError + '_ {
    move |e| match e {
        wtahash::Error::Io(e) => CliError::Data(format!("{}: {e}", path.display())),
        e => e.into(),
    }
}

/// Loads a dense input file as a `d x n` matrix.
pub fn load_dense(path: &Path, delimiter: u8) -> Result<DenseMatrix> {
    match input_kind(path)? {
        InputKind::Fvecs => datagen::load_fvecs(path),
        InputKind::Csv => datagen::load_csv(path, delimiter),
    }
    .map_err(with_path(path))
}

fn preprocess(x: DenseMatrix, normalize: bool) -> DenseMatrix {
    if normalize {
        x.center_columns()
    } else {
        x
    }
}

fn positive(value: usize, flag: &str) -> Result<usize> {
    if value == 0 {
        Err(CliError::Config(format!("{flag} must be positive")))
    } else {
        Ok(value)
    }
}

pub fn cmd_gen(args: &GenArgs, out: &mut dyn Write) -> Result<()> {
    let spec = ArtfcSpec {
        n_train: args.n_train,
        n_test: args.n_test,
        d: args.d,
        d_out: args.d_out,
        k: args.k,
        seed: args.seed,
    };
    spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
    fs::create_dir_all(&args.out).map_err(io_context(&args.out))?;
    let (train, test) = generate_artfc(&spec)?;
    for (split, data) in [("train", &train), ("test", &test)] {
        let path = args.out.join(format!("{split}.fvecs"));
        datagen::save_fvecs(&path, &data.x).map_err(with_path(&path))?;
        format::save_codes(&args.out.join(format!("{split}.wtay")), data.y.as_ref().expect("generated codes"))?;
    }
    writeln!(
        out,
        "{}: {} train + {} test samples, d={}, d_out={}, k={}, seed={} -> {}",
        spec.name(),
        spec.n_train,
        spec.n_test,
        spec.d,
        spec.d_out,
        spec.k,
        spec.seed,
        args.out.display()
    )?;
    Ok(())
}

pub fn cmd_train(args: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    if let Some(w) = args.workers {
        positive(w, "--workers")?;
    }
    let delimiter = delimiter_byte(args.delimiter)?;
    let x = preprocess(load_dense(&args.data, delimiter)?, args.normalize);
    let d = x.rows();
    let started = Instant::now();
    let (model, unsup) = match args.mode {
        Mode::Sup => {
            let path = args
                .codes
                .as_ref()
                .ok_or_else(|| CliError::Config("--codes is required in sup mode".into()))?;
            let y = format::load_codes(path)?;
            for (flag, given, actual) in [("--dout", args.d_out, y.rows()), ("--k", args.k, y.weight())] {
                if given.is_some_and(|g| g != actual) {
                    return Err(CliError::Data(format!(
                        "{flag} {} does not match the codes file ({actual})",
                        given.unwrap()
                    )));
                }
            }
            if y.cols() != x.cols() {
                return Err(CliError::Data(format!(
                    "{} holds {} codes but {} holds {} samples",
                    path.display(),
                    y.cols(),
                    args.data.display(),
                    x.cols()
                )));
            }
            let cfg = ModelConfig::new(d, y.rows(), y.weight(), args.c, args.seed)?;
            (trainer::train_supervised(&x, &y, &cfg, args.workers)?, None)
        }
        Mode::Unsup => {
            let d_out = args.d_out.ok_or_else(|| CliError::Config("--dout is required in unsup mode".into()))?;
            let k = args.k.ok_or_else(|| CliError::Config("--k is required in unsup mode".into()))?;
            let cfg = ModelConfig::new(d, d_out, k, args.c, args.seed)?;
            let options = TrainOptions {
                max_iterations: positive(args.max_iterations, "--max-iterations")?,
                workers: args.workers,
                ..TrainOptions::default()
            };
            let outcome = trainer::train_unsupervised(&x, &cfg, &options)?;
            (outcome.model, Some((outcome.trace, outcome.stop)))
        }
    };
    let seconds = started.elapsed().as_secs_f64();
    format::save_model(&args.out, &model.config, &model.w)?;

    let cfg = &model.config;
    let mode = match args.mode {
        Mode::Sup => "sup",
        Mode::Unsup => "unsup",
    };
    writeln!(
        out,
        "trained {mode} model: d={} d_out={} k={} c={} seed={} samples={}",
        cfg.d,
        cfg.d_out,
        cfg.k,
        cfg.c,
        cfg.seed,
        x.cols()
    )?;
    if model.zero_columns > 0 {
        writeln!(out, "warning: {} training samples are all zero", model.zero_columns)?;
    }
    writeln!(out, "objective: {:.9e}", model.objective)?;
    writeln!(out, "iterations: {}", model.iterations)?;
    if let Some((trace, stop)) = unsup {
        let stop = match stop {
            StopReason::CodeFixedPoint => "code fixed point",
            StopReason::ObjectiveEpsilon => "objective change below epsilon",
            StopReason::MaxIterations => "iteration limit",
        };
        writeln!(out, "stop: {stop}")?;
        let trace: Vec<String> = trace.iter().map(|v| format!("{v:.9e}")).collect();
        writeln!(out, "trace: {}", trace.join(" "))?;
    }
    writeln!(out, "wall-clock: {seconds:.3} s")?;
    writeln!(out, "wrote {}", args.out.display())?;
    Ok(())
}

/// Source of input columns for hashing, read one batch at a time.
enum ColumnSource {
    Fvecs(FvecsReader<std::io::BufReader<File>>),
    Loaded { x: DenseMatrix, next: usize },
}

impl ColumnSource {
    fn next_batch(&mut self, d: usize, batch: usize, path: &Path) -> Result<Option<DenseMatrix>> {
        match self {
            ColumnSource::Fvecs(reader) => {
                let mut columns = Vec::new();
                while columns.len() < batch {
                    match reader.next_record()? {
                        Some(v) => {
                            if v.len() != d {
                                return Err(dimension_mismatch(path, v.len(), d));
                            }
                            columns.push(v);
                        }
                        None => break,
                    }
                }
                if columns.is_empty() {
                    Ok(None)
                } else {
                    Ok(Some(DenseMatrix::from_columns(d, &columns)?))
                }
            }
            ColumnSource::Loaded { x, next } => {
                if *next >= x.cols() {
                    return Ok(None);
                }
                let end = (*next + batch).min(x.cols());
                let idx: Vec<usize> = (*next..end).collect();
                *next = end;
                Ok(Some(x.select_columns(&idx)))
            }
        }
    }
}

fn dimension_mismatch(path: &Path, found: usize, d: usize) -> CliError {
    CliError::Data(format!(
        "{}: input dimension {found} does not match the model's d = {d}",
        path.display()
    ))
}

pub fn cmd_hash(args: &HashArgs, out: &mut dyn Write) -> Result<()> {
    let batch = positive(args.batch, "--batch")?;
    if let Some(w) = args.workers {
        positive(w, "--workers")?;
    }
    let delimiter = delimiter_byte(args.delimiter)?;
    let (cfg, w) = format::load_model(&args.model)?;
    let k = args.k.unwrap_or(cfg.k);
    if k == 0 || k >= cfg.d_out {
        return Err(CliError::Config(format!(
            "--k must satisfy 1 <= k < d_out = {}, got {k}",
            cfg.d_out
        )));
    }
    let mut source = match input_kind(&args.input)? {
        InputKind::Fvecs => ColumnSource::Fvecs(FvecsReader::open(&args.input).map_err(with_path(&args.input))?),
        InputKind::Csv => {
            let x = datagen::load_csv(&args.input, delimiter).map_err(with_path(&args.input))?;
            if x.cols() > 0 && x.rows() != cfg.d {
                return Err(dimension_mismatch(&args.input, x.rows(), cfg.d));
            }
            ColumnSource::Loaded { x, next: 0 }
        }
    };

    let file = File::create(&args.out).map_err(io_context(&args.out))?;
    let mut writer = CodeWriter::new(BufWriter::new(file), cfg.d_out, k).map_err(io_context(&args.out))?;
    while let Some(x) = source.next_batch(cfg.d, batch, &args.input)? {
        let codes = hash_columns(&w, &preprocess(x, args.normalize), k, args.workers)?;
        writer.push_all(&codes).map_err(io_context(&args.out))?;
    }
    let count = writer.count();
    writer.finish().map_err(io_context(&args.out))?;
    writeln!(
        out,
        "hashed {count} samples with k={k} (d={}, d_out={}) -> {}",
        cfg.d,
        cfg.d_out,
        args.out.display()
    )?;
    Ok(())
}

/// Builds a run configuration from `bench` flags.
pub fn config_from_flags(args: &BenchArgs) -> Result<RunConfig> {
    let dataset = match (&args.train, &args.test) {
        (Some(train), Some(test)) => {
            let train_codes = args.train_codes.clone();
            match input_kind(train)? {
                InputKind::Fvecs => DatasetSource::Fvecs {
                    train: train.clone(),
                    test: test.clone(),
                    train_codes,
                },
                InputKind::Csv => DatasetSource::Csv {
                    train: train.clone(),
                    test: test.clone(),
                    delimiter: ",".into(),
                    train_codes,
                },
            }
        }
        _ => DatasetSource::Artfc {
            n_train: args.n_train.unwrap_or(2000),
            n_test: args.n_test.unwrap_or(2000),
            d: args.d.unwrap_or(200),
        },
    };
    let k = match (&args.sweep_k, args.k) {
        (Some(list), _) => list.clone(),
        (None, Some(k)) => vec![k],
        (None, None) => vec![4],
    };
    let config = RunConfig {
        dataset,
        algorithms: args.algorithms.clone().unwrap_or_else(default_algorithms),
        k,
        d_out: args.d_out.unwrap_or(400),
        c: args.c,
        r: args.r.unwrap_or(eval::DEFAULT_TOP_R),
        seed: args.seed.unwrap_or(0),
        repeats: args.repeats.unwrap_or(eval::DEFAULT_REPEATS),
        workers: args.workers,
        max_iterations: args.max_iterations.unwrap_or(100),
        normalize: args.normalize,
        output: Output {
            csv: args.out.clone(),
            timing: !args.no_timing,
        },
    };
    config.validate()?;
    Ok(config)
}

fn load_split(
    x_path: &Path,
    codes: Option<&PathBuf>,
    delimiter: u8,
    normalize: bool,
    name: String,
) -> Result<Dataset> {
    let x = preprocess(load_dense(x_path, delimiter)?, normalize);
    let y = codes.map(|p| format::load_codes(p)).transpose()?;
    if let Some(y) = &y {
        if y.cols() != x.cols() {
            return Err(CliError::Data(format!(
                "{} holds {} codes but {} holds {} samples",
                codes.unwrap().display(),
                y.cols(),
                x_path.display(),
                x.cols()
            )));
        }
    }
    Ok(Dataset::new(x, y, name, x_path.display().to_string())?)
}

fn file_stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "data".into())
}

/// Runs a validated configuration and returns every per-run report.
pub fn run_config(config: &RunConfig) -> Result<Vec<EvalReport>> {
    let algorithms = config.parsed_algorithms()?;
    let bench = BenchConfig {
        d_out: config.d_out,
        c: config.c,
        top_r: config.r,
        repeats: config.repeats,
        seed: config.seed,
        train_options: TrainOptions {
            max_iterations: config.max_iterations,
            ..TrainOptions::default()
        },
        workers: config.workers,
        ..BenchConfig::new(config.d_out, config.seed)
    };
    let mut reports = Vec::new();
    match &config.dataset {
        DatasetSource::Artfc { n_train, n_test, d } => {
            // Codes of each hash length get their own dataset so that the
            // supervised trainer sees targets of matching weight.
            for &k in &config.k {
                let spec = ArtfcSpec {
                    n_train: *n_train,
                    n_test: *n_test,
                    d: *d,
                    d_out: config.d_out,
                    k,
                    seed: config.seed,
                };
                let (mut train, mut test) = generate_artfc(&spec)?;
                if config.normalize {
                    train.x = train.x.center_columns();
                    test.x = test.x.center_columns();
                }
                test.name = spec.name();
                reports.extend(eval::run_benchmark(&train, &test, &algorithms, &[k], &bench)?);
            }
        }
        DatasetSource::Fvecs {
            train, test, train_codes, ..
        }
        | DatasetSource::Csv {
            train, test, train_codes, ..
        } => {
            let delimiter = config.delimiter();
            let train_set = load_split(train, train_codes.as_ref(), delimiter, config.normalize, file_stem(train))?;
            let test_set = load_split(test, None, delimiter, config.normalize, file_stem(test))?;
            reports.extend(eval::run_benchmark(&train_set, &test_set, &algorithms, &config.k, &bench)?);
        }
    }
    Ok(reports)
}

fn test_pool_size(config: &RunConfig) -> Result<usize> {
    Ok(match &config.dataset {
        DatasetSource::Artfc { n_test, .. } => *n_test,
        DatasetSource::Fvecs { test, .. } | DatasetSource::Csv { test, .. } => {
            load_dense(test, config.delimiter())?.cols()
        }
    })
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let config = match &args.config {
        Some(path) => {
            let mut config = RunConfig::load(path)?;
            if args.workers.is_some() {
                config.workers = args.workers;
            }
            if args.out.is_some() {
                config.output.csv = args.out.clone();
            }
            if args.no_timing {
                config.output.timing = false;
            }
            config.validate()?;
            config
        }
        None => config_from_flags(args)?,
    };
    let reports = run_config(&config)?;

    if let Some(path) = &config.output.csv {
        let file = File::create(path).map_err(io_context(path))?;
        let mut w = BufWriter::new(file);
        eval::write_csv(&mut w, &reports, config.output.timing).map_err(io_context(path))?;
        w.flush().map_err(io_context(path))?;
    }

    let summaries = eval::summarize(&reports);
    write!(out, "{}", eval::format_table(&summaries))?;
    let n = test_pool_size(&config)?;
    let chance = config.r as f64 / (n - 1) as f64;
    write!(out, "chance level r/(n-1) = {chance:.6} (r = {}, n = {n})", config.r)?;
    let control: Vec<_> = summaries.iter().filter(|s| s.algorithm == Algorithm::Random).collect();
    if !control.is_empty() {
        let mean = control.iter().map(|s| s.mean).sum::<f64>() / control.len() as f64;
        write!(out, "; random-code control measured {mean:.6}")?;
    }
    writeln!(out)?;
    if let Some(path) = &config.output.csv {
        writeln!(out, "wrote {} rows to {}", reports.len(), path.display())?;
    }
    Ok(())
}

