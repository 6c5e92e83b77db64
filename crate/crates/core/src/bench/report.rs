//! CSV output (`standard,quantity,gas` and `scheme,trial,latency_ms`) and
//! the plain-text summary table.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{AuthStats, BenchError, GasRow, TrialResult};

pub const GAS_HEADER: &str = "standard,quantity,gas";
pub const AUTH_HEADER: &str = "scheme,trial,latency_ms";

fn write_rows<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<(), BenchError> {
    if rows.is_empty() {
        return Err(BenchError::Invalid("no rows to emit".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<T: DeserializeOwned, R: Read>(input: R) -> Result<Vec<T>, BenchError> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(Into::into)
}

pub fn write_gas_csv<W: Write>(rows: &[GasRow], out: W) -> Result<(), BenchError> {
    write_rows(rows, out)
}

pub fn read_gas_csv<R: Read>(input: R) -> Result<Vec<GasRow>, BenchError> {
    read_rows(input)
}

pub fn write_auth_csv<W: Write>(rows: &[TrialResult], out: W) -> Result<(), BenchError> {
    write_rows(rows, out)
}

pub fn read_auth_csv<R: Read>(input: R) -> Result<Vec<TrialResult>, BenchError> {
    read_rows(input)
}

/// Write to `path`, creating or truncating it.
pub fn emit_to_path<F>(path: &Path, write: F) -> Result<(), BenchError>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<(), BenchError>,
{
    let mut out = BufWriter::new(File::create(path)?);
    write(&mut out)?;
    out.flush()?;
    Ok(())
}

pub fn auth_summary(stats: &[AuthStats]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<16} {:>8} {:>12} {:>12} {:>12} {:>12}",
        "scheme", "samples", "mean_ms", "stddev_ms", "min_ms", "max_ms"
    );
    for st in stats {
        let _ = writeln!(
            s,
            "{:<16} {:>8} {:>12.3} {:>12.3} {:>12.3} {:>12.3}",
            st.scheme.label(),
            st.samples,
            st.mean,
            st.stddev,
            st.min,
            st.max
        );
    }
    s
}

pub fn gas_summary(rows: &[GasRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<18} {:>10} {:>14}", "standard", "quantity", "gas");
    for r in rows {
        let _ = writeln!(s, "{:<18} {:>10} {:>14}", r.standard, r.quantity, r.gas);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{run_auth_benchmark, run_gas_benchmark, Execution, LatencyModel, SchemeKind};
    use proptest::prelude::*;

    #[test]
    fn gas_csv_round_trip_and_header() {
        let rows = run_gas_benchmark(&[1, 10], 1, Execution::Sequential).unwrap();
        let mut buf = Vec::new();
        write_gas_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next(), Some(GAS_HEADER));
        assert_eq!(text.lines().count(), rows.len() + 1);
        assert_eq!(read_gas_csv(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn auth_csv_round_trip_and_determinism() {
        let m = LatencyModel::default();
        let emit = || {
            let run = run_auth_benchmark(SchemeKind::BlockBroadcast, 25, 10, &m, Execution::default()).unwrap();
            let mut buf = Vec::new();
            write_auth_csv(&run.trials, &mut buf).unwrap();
            (run, buf)
        };
        let (run, a) = emit();
        let (_, b) = emit();
        assert_eq!(a, b, "seeded rerun must be byte-identical");
        assert_eq!(std::str::from_utf8(&a).unwrap().lines().next(), Some(AUTH_HEADER));
        assert_eq!(read_auth_csv(&a[..]).unwrap(), run.trials);
    }

    #[test]
    fn empty_rows_rejected() {
        assert!(write_gas_csv(&[], Vec::new()).is_err());
    }

    #[test]
    fn unwritable_path_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing").join("x.csv");
        let rows = run_gas_benchmark(&[1], 1, Execution::Sequential).unwrap();
        assert!(emit_to_path(&path, |w| write_gas_csv(&rows, w)).is_err());
    }

    proptest! {
        #[test]
        fn latency_values_round_trip(xs in proptest::collection::vec(1e-3f64..1e6, 1..50)) {
            let rows: Vec<TrialResult> = xs
                .iter()
                .enumerate()
                .map(|(trial, &latency_ms)| TrialResult { scheme: SchemeKind::SfwtQuery, trial, latency_ms })
                .collect();
            let mut buf = Vec::new();
            write_auth_csv(&rows, &mut buf).unwrap();
            prop_assert_eq!(read_auth_csv(&buf[..]).unwrap(), rows);
        }
    }
}
