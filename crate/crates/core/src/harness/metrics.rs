use std::fs::File;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ppo::IterationMetrics;

/// Append-only `metrics.csv` writer. The header is written on creation so
/// even a run with zero iterations leaves a well-formed file.
pub struct MetricsWriter {
    inner: csv::Writer<File>,
}

impl MetricsWriter {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        inner.write_record(IterationMetrics::CSV_HEADER)?;
        inner.flush().map_err(|e| Error::io(path, e))?;
        Ok(MetricsWriter { inner })
    }

    /// Write one row and flush it, so an aborted run keeps what it finished.
    pub fn append(&mut self, row: &IterationMetrics) -> Result<()> {
        self.inner.serialize(row)?;
        self.inner.flush().map_err(|e| Error::io("metrics.csv", e))
    }
}

pub fn read_metrics(path: impl AsRef<Path>) -> Result<Vec<IterationMetrics>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != IterationMetrics::CSV_HEADER {
        return Err(Error::Config(format!(
            "{}: unexpected metrics header {header:?}",
            path.display()
        )));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_round_trip_losslessly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("metrics.csv");
        let rows: Vec<IterationMetrics> = (1..=3)
            .map(|i| IterationMetrics {
                iteration: i,
                total_steps: 10_000 + i as usize,
                episodes: 40,
                mean_reward: -123.456789012345 * i as f64,
                goal_rate: 0.1 * i as f64,
                collision_rate: 1.0 / 3.0,
                timeout_rate: 1.0 - 0.1 * i as f64 - 1.0 / 3.0,
                mean_ep_len: 250.25,
                policy_loss: -1e-17,
                value_loss: 12345.678,
                entropy: 15f64.ln(),
                wall_clock_s: 0.0,
            })
            .collect();
        let mut w = MetricsWriter::create(&path).unwrap();
        for r in &rows {
            w.append(r).unwrap();
        }
        let back = read_metrics(&path).unwrap();
        assert_eq!(back, rows);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(
            "iteration,total_steps,episodes,mean_reward,goal_rate,collision_rate,timeout_rate,mean_ep_len,policy_loss,value_loss,entropy,wall_clock_s\n"
        ));
    }
}
