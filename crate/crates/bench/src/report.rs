use std::fmt;
use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::Path;

use leb128_bmi::ElementWidth;

use crate::bench::Algo;

/// Column order is part of the file format.
pub const CSV_HEADER: &str =
    "algo,workload,width,count,iterations,ns_per_iter,values_per_sec,bytes_per_sec,backend,checksum";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub algo: Algo,
    pub workload: String,
    pub width: ElementWidth,
    pub count: usize,
    pub iterations: usize,
    /// Median over the timed iterations.
    pub ns_per_iteration: f64,
    pub values_per_second: f64,
    pub bytes_per_second: f64,
    /// `hw`, `sw`, or `none` for the scalar decoder.
    pub backend: &'static str,
    /// Wrapping sum of every decoded value.
    pub checksum: u64,
}

impl BenchReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.0},{:.0},{:.0},{},{}",
            self.algo,
            self.workload,
            self.width,
            self.count,
            self.iterations,
            self.ns_per_iteration,
            self.values_per_second,
            self.bytes_per_second,
            self.backend,
            self.checksum
        )
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<8} {:<6} u{:<3} {:>9} {:>12.3} ms {:>10.1} Mval/s {:>9.1} MB/s  checksum {:#018x}",
            self.algo.to_string(),
            self.workload,
            self.width,
            self.count,
            self.ns_per_iteration / 1e6,
            self.values_per_second / 1e6,
            self.bytes_per_second / 1e6,
            self.checksum
        )
    }
}

/// Writes rows as CSV, with a header unless `w` already has content.
pub fn write_csv<W: Write>(mut w: W, reports: &[BenchReport], header: bool) -> io::Result<()> {
    if header {
        writeln!(w, "{CSV_HEADER}")?;
    }
    for r in reports {
        writeln!(w, "{}", r.csv_row())?;
    }
    w.flush()
}

/// Appends rows to a CSV file, adding the header when the file is new or empty.
pub fn append_csv(path: &Path, reports: &[BenchReport]) -> io::Result<()> {
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let empty = file.metadata()?.len() == 0;
    write_csv(io::BufWriter::new(file), reports, empty)
}
