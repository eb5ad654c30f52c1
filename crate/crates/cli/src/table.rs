//! Result rows and their CSV form.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::CliError;

pub const HEADER: [&str; 11] = [
    "scenario",
    "model",
    "method",
    "sweep_param",
    "sweep_value",
    "trial",
    "objective",
    "feasible",
    "iterations",
    "runtime_ms",
    "seed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub model: String,
    pub method: String,
    pub sweep_param: String,
    pub sweep_value: String,
    pub trial: usize,
    /// Sum rate (bit/s/Hz) for secure, transmit power (W) for SWIPT, linear
    /// SNR for single-link. NaN when the solver failed.
    pub objective: f64,
    pub feasible: bool,
    pub iterations: usize,
    pub runtime_ms: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

/// 17 significant digits, which round-trips every `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

impl ResultTable {
    pub fn write<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(HEADER).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.scenario.clone(),
                r.model.clone(),
                r.method.clone(),
                r.sweep_param.clone(),
                r.sweep_value.clone(),
                r.trial.to_string(),
                format_float(r.objective),
                r.feasible.to_string(),
                r.iterations.to_string(),
                format_float(r.runtime_ms),
                r.seed.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn read<R: Read>(input: R) -> Result<ResultTable, CliError> {
        let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header = rd.headers().map_err(io)?.clone();
        if header.iter().ne(HEADER) {
            return Err(CliError::Io(format!("unexpected header {header:?}")));
        }
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(io)?;
            let bad = |f: &str| CliError::Io(format!("line {}: bad {f}", rec.position().map_or(0, |p| p.line())));
            let num = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(HEADER[i]));
            rows.push(ResultRow {
                scenario: rec[0].to_string(),
                model: rec[1].to_string(),
                method: rec[2].to_string(),
                sweep_param: rec[3].to_string(),
                sweep_value: rec[4].to_string(),
                trial: rec[5].parse().map_err(|_| bad("trial"))?,
                objective: num(6)?,
                feasible: rec[7].parse().map_err(|_| bad("feasible"))?,
                iterations: rec[8].parse().map_err(|_| bad("iterations"))?,
                runtime_ms: num(9)?,
                seed: rec[10].parse().map_err(|_| bad("seed"))?,
            });
        }
        Ok(ResultTable { rows })
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        Ok(buf)
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), CliError> {
        let f = std::fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.write(std::io::BufWriter::new(f))
    }

    pub fn read_csv(path: &Path) -> Result<ResultTable, CliError> {
        let f = std::fs::File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        ResultTable::read(std::io::BufReader::new(f))
    }
}
