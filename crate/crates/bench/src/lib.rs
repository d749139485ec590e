//! Dataset generation, differential verification and throughput measurement
//! for `leb128-bmi`, shared by the `varint-bench` binary and its tests.

pub mod bench;
pub mod cli;
pub mod report;
pub mod verify;

pub use bench::{run_bench, Algo, BenchConfig, BenchError};
pub use report::{BenchReport, CSV_HEADER};
pub use verify::{verify_stream, Divergence, VerifyReport};
