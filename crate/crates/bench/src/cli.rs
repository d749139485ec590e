//! Command-line interface.
//!
//! Exit codes: 0 success, 1 verification or decode failure, 2 usage error,
//! 3 environment error (I/O, hardware backend unavailable).

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use leb128_bmi::bulk::Decoder;
use leb128_bmi::case_table::CASE_TABLE;
use leb128_bmi::dataset::{self, DatasetHeader};
use leb128_bmi::workload::{self, Workload};
use leb128_bmi::{BackendError, DatasetError, ElementWidth, EncodedStream, PextPreference};

use crate::bench::{run_bench, Algo, BenchConfig, BenchError};
use crate::report;
use crate::verify::{self, VerifyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ENVIRONMENT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "varint-bench", version, about = "LEB128 bulk decoding: datasets, verification, benchmarks")]
pub struct Cli {
    /// PEXT backend: auto-detect, force hardware (BMI2), or force the portable loop.
    #[arg(long, global = true, default_value = "auto", env = "VARINT_PEXT")]
    pub pext: PextPreference,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a dataset file.
    Gen {
        #[arg(long)]
        workload: Workload,
        #[arg(long, value_parser = parse_width)]
        width: ElementWidth,
        #[arg(long, default_value_t = 1_000_000)]
        count: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode a dataset through every route and compare against the scalar decoder.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Time full-dataset decodes and report median throughput.
    Bench {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated: scalar, bulk, bulk-hw, bulk-sw.
        #[arg(long, default_value = "scalar,bulk")]
        algos: String,
        #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..))]
        iterations: u64,
        #[arg(long, default_value_t = 3)]
        warmup: usize,
        /// Append CSV rows to this path, or `-` for standard output.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Workload label for the report; defaults to the file stem.
        #[arg(long)]
        label: Option<String>,
    },
    /// Print the 64 decoding plans.
    DumpTable,
}

fn parse_width(s: &str) -> Result<ElementWidth, String> {
    s.parse::<u32>()
        .ok()
        .and_then(ElementWidth::from_bits)
        .ok_or_else(|| format!("width must be 32 or 64, got {s:?}"))
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    run(cli, out, err)
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Gen {
            workload,
            width,
            count,
            seed,
            ref out,
        } => cmd_gen(workload, width, count, seed, out).map(|h| {
            (
                EXIT_OK,
                format!(
                    "wrote {} values ({} payload bytes, {width}-bit, {workload}, seed {seed})",
                    h.count, h.payload_len
                ),
            )
        }),
        Command::Verify { ref input } => cmd_verify(input, cli.pext).map(|r| {
            let code = if r.passed() { EXIT_OK } else { EXIT_FAILURE };
            (code, r.to_string())
        }),
        Command::Bench {
            ref input,
            ref algos,
            iterations,
            warmup,
            ref csv,
            ref label,
        } => cmd_bench(
            input,
            algos,
            iterations as usize,
            warmup,
            csv.as_deref(),
            label.as_deref(),
            cli.pext,
            out,
        ),
        Command::DumpTable => Ok((EXIT_OK, cmd_dump_table())),
    };
    match result {
        Ok((code, text)) => {
            if !text.is_empty() {
                let _ = writeln!(out, "{text}");
            }
            code
        }
        Err((code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

type CmdResult<T> = Result<T, (i32, String)>;

fn dataset_failure(e: DatasetError) -> (i32, String) {
    let code = match e {
        DatasetError::Io(_) => EXIT_ENVIRONMENT,
        _ => EXIT_FAILURE,
    };
    (code, e.to_string())
}

fn backend_failure(e: BackendError) -> (i32, String) {
    (EXIT_ENVIRONMENT, e.to_string())
}

pub fn cmd_gen(
    workload: Workload,
    width: ElementWidth,
    count: usize,
    seed: u64,
    path: &Path,
) -> CmdResult<DatasetHeader> {
    let values = workload::generate(workload, width, count, seed);
    dataset::write_dataset(path, width, seed, &values).map_err(dataset_failure)
}

pub fn cmd_verify(path: &Path, pext: PextPreference) -> CmdResult<VerifyReport> {
    let (header, stream) = dataset::read_dataset(path).map_err(dataset_failure)?;
    let routes = verify_routes(pext)?;
    Ok(verify::verify_dataset_with(header.count, &stream, header.seed, routes))
}

fn verify_routes(pext: PextPreference) -> CmdResult<Vec<(String, Decoder)>> {
    let routes = verify::available_routes();
    match pext {
        PextPreference::Auto => Ok(routes),
        PextPreference::Hardware => {
            pext.resolve().map_err(backend_failure)?;
            Ok(routes)
        }
        PextPreference::Portable => Ok(routes.into_iter().filter(|(n, _)| n != "bulk-hw").collect()),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_bench(
    path: &Path,
    algos: &str,
    iterations: usize,
    warmup: usize,
    csv: Option<&Path>,
    label: Option<&str>,
    pext: PextPreference,
    out: &mut dyn Write,
) -> CmdResult<(i32, String)> {
    if pext == PextPreference::Hardware {
        pext.resolve().map_err(backend_failure)?;
    }
    let algos = Algo::parse_list(algos, pext).map_err(|e| (EXIT_USAGE, e))?;
    let (_, stream) = dataset::read_dataset(path).map_err(dataset_failure)?;
    let label = label.map(str::to_owned).unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    });
    let config = BenchConfig {
        algos,
        iterations,
        warmup,
    };
    let reports = run_bench(&stream, &label, &config).map_err(|e| match e {
        BenchError::Backend(b) => backend_failure(b),
        BenchError::NoIterations => (EXIT_USAGE, e.to_string()),
        other => (EXIT_FAILURE, other.to_string()),
    })?;

    let table: Vec<String> = reports.iter().map(|r| r.to_string()).collect();
    match csv {
        Some(p) if p == Path::new("-") => {
            report::write_csv(&mut *out, &reports, true).map_err(|e| (EXIT_ENVIRONMENT, e.to_string()))?;
            // keep stdout machine-readable
            let mut stderr = io::stderr();
            for line in &table {
                let _ = writeln!(stderr, "{line}");
            }
            return Ok((EXIT_OK, String::new()));
        }
        Some(p) => report::append_csv(p, &reports).map_err(|e| (EXIT_ENVIRONMENT, e.to_string()))?,
        None => {}
    }
    Ok((EXIT_OK, table.join("\n")))
}

pub fn cmd_dump_table() -> String {
    CASE_TABLE
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

/// Reads and verifies a dataset in one call; handy for scripts and tests.
pub fn verify_file(path: &Path) -> Result<VerifyReport, DatasetError> {
    let (header, stream): (DatasetHeader, EncodedStream) = dataset::read_dataset(path)?;
    Ok(verify::verify_dataset(header.count, &stream, header.seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with_args(
            std::iter::once("varint-bench").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn dump_table_has_64_lines() {
        let (code, out, _) = run_args(&["dump-table"]);
        assert_eq!(code, EXIT_OK);
        let lines: Vec<_> = out.lines().collect();
        assert_eq!(lines.len(), 64);
        assert!(lines[62].contains("shift=35"));
        assert_eq!(lines[0].matches("0x").count(), 6);
    }

    #[test]
    fn usage_errors_exit_2() {
        let (code, _, err) = run_args(&["gen", "--workload", "w9", "--width", "32", "--out", "x"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("w9"));
        let (code, _, _) = run_args(&["gen", "--workload", "w1", "--width", "16", "--out", "x"]);
        assert_eq!(code, EXIT_USAGE);
        let (code, _, _) = run_args(&["bench", "--in", "x", "--iterations", "0"]);
        assert_eq!(code, EXIT_USAGE);
        let (code, _, _) = run_args(&["--pext", "fast", "dump-table"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn missing_file_is_environment_error() {
        let (code, _, err) = run_args(&["verify", "--in", "/nonexistent/file.sfvi"]);
        assert_eq!(code, EXIT_ENVIRONMENT);
        assert!(err.starts_with("error:"));
    }
}
