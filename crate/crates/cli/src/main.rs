//! `rangemed`: command-line front end for the range selection structures.
//!
//! Exit status is 0 on success, 1 for usage errors and 2 for malformed
//! input or failed I/O.

mod args;
mod query;

use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use range_median::datagen::{self, format_static};
use range_median::harness::{self, BenchConfig};
use range_median::{filter, naive_filter, pgm, Parallelism};

use args::{
    BenchArgs, Cli, Command, FilterArgs, FilterStructure, GenArgs, GenKind, QueryArgs, Structure,
};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Input(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) | Failure::Io(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Io(m) => f.write_str(m),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn open_input(path: Option<&Path>) -> Result<Box<dyn io::BufRead>, Failure> {
    match path {
        Some(p) => Ok(Box::new(BufReader::new(
            File::open(p).map_err(|e| io_failure(p, e))?,
        ))),
        None => Ok(Box::new(io::stdin().lock())),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) => Ok(Box::new(BufWriter::new(
            File::create(p).map_err(|e| io_failure(p, e))?,
        ))),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn write_all(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    let mut out = open_output(path)?;
    out.write_all(bytes)
        .and_then(|_| out.flush())
        .map_err(|e| Failure::Io(format!("write failed: {e}")))
}

fn parallelism(sequential: bool) -> Parallelism {
    if sequential {
        Parallelism::Sequential
    } else {
        Parallelism::default()
    }
}

fn cmd_query(a: QueryArgs) -> Result<(), Failure> {
    let input = open_input(a.input.as_deref())?;
    let mut out = open_output(a.output.as_deref())?;
    if a.structure == Structure::Dynamic {
        query::run_dynamic(input, &mut out)
    } else {
        query::run_static(a.structure, a.mode, a.common.selection(), input, &mut out)
    }
}

fn cmd_bench(a: BenchArgs) -> Result<(), Failure> {
    if a.reps == 0 {
        return Err(Failure::Usage("--reps must be at least 1".into()));
    }
    let cfg = BenchConfig {
        structure: a.structure.into(),
        mode: a.mode.into(),
        strategy: a.common.selection(),
        seed: a.common.seed,
        grid: a.grid,
        reps: a.reps,
        parallelism: parallelism(a.sequential),
    };
    let rows = harness::run_grid(&cfg).map_err(|e| Failure::Input(e.to_string()))?;
    let plot = a.plot.clone().unwrap_or_else(|| match &a.output {
        Some(csv) => csv.with_extension("dat"),
        None => PathBuf::from("bench.dat"),
    });
    write_all(a.output.as_deref(), harness::to_csv(&rows).as_bytes())?;
    write_all(Some(&plot), harness::to_gnuplot(&rows).as_bytes())
}

fn cmd_filter(a: FilterArgs) -> Result<(), Failure> {
    let file = File::open(&a.input).map_err(|e| io_failure(&a.input, e))?;
    let img = pgm::read(BufReader::new(file)).map_err(|e| Failure::Input(e.to_string()))?;
    let result = match a.structure {
        FilterStructure::Dynamic => {
            filter(&img, a.radius, parallelism(a.sequential)).map(|(out, _)| out)
        }
        FilterStructure::Oracle => naive_filter(&img, a.radius),
    };
    let out = result.map_err(|e| Failure::Usage(e.to_string()))?;
    write_all(Some(&a.output), &pgm::encode(&out))
}

fn cmd_gen(a: GenArgs) -> Result<(), Failure> {
    let bytes = match a.kind {
        GenKind::Static => {
            if a.n == 0 {
                return Err(Failure::Usage("--n must be at least 1".into()));
            }
            if a.range < 1 {
                return Err(Failure::Usage("--range must be at least 1".into()));
            }
            let values = datagen::random_ints(a.n, a.range, a.seed);
            let queries = datagen::random_queries(a.n, a.k, a.random_ranks, a.seed);
            format_static(&values, &queries).into_bytes()
        }
        GenKind::Ops => {
            if a.range < 1 {
                return Err(Failure::Usage("--range must be at least 1".into()));
            }
            let mut text = String::new();
            for op in datagen::random_ops(a.ops, a.range, a.seed) {
                text.push_str(&op.to_string());
                text.push('\n');
            }
            text.into_bytes()
        }
        GenKind::Image => {
            if a.width == 0 || a.height == 0 || a.maxval == 0 {
                return Err(Failure::Usage(
                    "image dimensions and maxval must be positive".into(),
                ));
            }
            pgm::encode(&datagen::random_image(a.width, a.height, a.maxval, a.seed))
        }
    };
    write_all(a.output.as_deref(), &bytes)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match cli.command {
        Command::Query(a) => cmd_query(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Filter(a) => cmd_filter(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rangemed: {e}");
            ExitCode::from(e.code())
        }
    }
}
