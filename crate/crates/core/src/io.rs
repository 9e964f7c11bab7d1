//! CSV readers and writers for datasets, traces and posterior summaries.
//!
//! Trace layout (`trace.csv`), one row per kept iteration:
//!
//! ```text
//! iter,d_star,k,w_1,...,w_K,n_1,...,n_K,beta_1_1,...,beta_1_D,...,beta_K_D
//! ```
//!
//! `K` is the largest number of instantiated components over the trace and
//! `D` the calibration dimension (2 = quadratic, 4 = expbump). Rows with
//! fewer than `K` components (`k < K`) leave the surplus cells empty.
//! Weights and coefficients are written in shortest round-trip form, so
//! reading a trace back reproduces it bit for bit.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::calibration::{BetaVector, Calibration};
use crate::error::{Error, Result};
use crate::posterior::{ComponentSummary, PredictiveDraw, TauCurve};
use crate::pseudo::{Dataset, PseudoDataset};
use crate::sampler::{ChainTrace, IterationRecord};
use crate::stats::Summary;

/// Input data as found on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum InputData {
    /// Columns `y1, y2, x`.
    Raw(Dataset),
    /// Columns `u, v, x`.
    Pseudo(PseudoDataset),
}

impl InputData {
    pub fn len(&self) -> usize {
        match self {
            InputData::Raw(d) => d.len(),
            InputData::Pseudo(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self) -> &[f64] {
        match self {
            InputData::Raw(d) => &d.x,
            InputData::Pseudo(p) => &p.x,
        }
    }
}

struct Table {
    headers: Vec<String>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn read<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.iter().map(|h| h.to_ascii_lowercase()).collect();
        let rows = rdr.records().collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Table { headers, rows })
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn require(&self, name: &str) -> Result<usize> {
        self.index(name).ok_or_else(|| {
            Error::invalid(format!(
                "missing column `{name}` (found: {})",
                self.headers.join(", ")
            ))
        })
    }

    fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self.require(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(line, row)| parse_cell(row.get(idx).unwrap_or(""), name, line))
            .collect()
    }
}

fn parse_cell(cell: &str, name: &str, line: usize) -> Result<f64> {
    let v: f64 = cell
        .parse()
        .map_err(|_| Error::invalid(format!("row {}: column `{name}` has unparsable value `{cell}`", line + 1)))?;
    if !v.is_finite() {
        return Err(Error::invalid(format!("row {}: column `{name}` is not finite", line + 1)));
    }
    Ok(v)
}

/// Reads a dataset, choosing the pseudo-observation route when `u`/`v`
/// columns are present and the rank-transform route for `y1`/`y2`.
pub fn read_input<R: Read>(reader: R) -> Result<InputData> {
    let table = Table::read(reader)?;
    let x = table.column("x")?;
    if table.index("u").is_some() && table.index("v").is_some() {
        let u = table.column("u")?;
        let v = table.column("v")?;
        return Ok(InputData::Pseudo(PseudoDataset::from_unit_columns(u, v, x)?));
    }
    if table.index("y1").is_some() && table.index("y2").is_some() {
        let y1 = table.column("y1")?;
        let y2 = table.column("y2")?;
        return Ok(InputData::Raw(Dataset::new(y1, y2, x)?));
    }
    Err(Error::invalid(format!(
        "expected columns (y1, y2, x) or (u, v, x); found: {}",
        table.headers.join(", ")
    )))
}

pub fn read_input_path(path: &Path) -> Result<InputData> {
    read_input(File::open(path)?)
}

pub fn write_pseudo<W: Write>(writer: W, data: &PseudoDataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["u", "v", "x"])?;
    for i in 0..data.len() {
        w.write_record([data.u[i].to_string(), data.v[i].to_string(), data.x[i].to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_raw<W: Write>(writer: W, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["y1", "y2", "x"])?;
    for i in 0..data.len() {
        w.write_record([data.y1[i].to_string(), data.y2[i].to_string(), data.x[i].to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace<W: Write>(writer: W, trace: &ChainTrace) -> Result<()> {
    let dim = trace.calibration.dim();
    let kmax = trace.records.iter().map(|r| r.weights.len()).max().unwrap_or(0);
    let mut header = vec!["iter".to_string(), "d_star".to_string(), "k".to_string()];
    header.extend((1..=kmax).map(|j| format!("w_{j}")));
    header.extend((1..=kmax).map(|j| format!("n_{j}")));
    for j in 1..=kmax {
        header.extend((1..=dim).map(|c| format!("beta_{j}_{c}")));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(&header)?;
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for r in &trace.records {
        row.clear();
        row.push(r.iter.to_string());
        row.push(r.d_star.to_string());
        row.push(r.weights.len().to_string());
        let pad = kmax - r.weights.len();
        row.extend(r.weights.iter().map(f64::to_string));
        row.extend(std::iter::repeat_n(String::new(), pad));
        row.extend(r.occupancy.iter().map(usize::to_string));
        row.extend(std::iter::repeat_n(String::new(), pad));
        for atom in &r.atoms {
            row.extend(atom.as_slice().iter().map(f64::to_string));
        }
        row.extend(std::iter::repeat_n(String::new(), pad * dim));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trace written by [`write_trace`]. The calibration family is
/// recovered from the number of coefficient columns per component.
pub fn read_trace<R: Read>(reader: R) -> Result<ChainTrace> {
    let table = Table::read(reader)?;
    if table.rows.is_empty() {
        return Err(Error::invalid("trace has no rows"));
    }
    let i_iter = table.require("iter")?;
    let i_dstar = table.require("d_star")?;
    let i_k = table.require("k")?;
    let kmax = table.headers.iter().filter(|h| h.starts_with("w_")).count();
    let nbeta = table.headers.iter().filter(|h| h.starts_with("beta_")).count();
    if kmax == 0 || nbeta % kmax != 0 {
        return Err(Error::invalid("trace header has no consistent weight/coefficient columns"));
    }
    let dim = nbeta / kmax;
    let calibration = Calibration::from_dim(dim)
        .ok_or_else(|| Error::invalid(format!("trace has {dim} coefficients per component")))?;
    let w0 = table.require("w_1")?;
    let n0 = table.require("n_1")?;
    let b0 = table.require("beta_1_1")?;

    let int = |row: &csv::StringRecord, idx: usize, name: &str, line: usize| -> Result<usize> {
        row.get(idx)
            .unwrap_or("")
            .parse()
            .map_err(|_| Error::invalid(format!("row {}: bad integer in `{name}`", line + 1)))
    };

    let mut records = Vec::with_capacity(table.rows.len());
    for (line, row) in table.rows.iter().enumerate() {
        let k = int(row, i_k, "k", line)?;
        if k == 0 || k > kmax {
            return Err(Error::invalid(format!("row {}: k = {k} out of range", line + 1)));
        }
        let mut weights = Vec::with_capacity(k);
        let mut occupancy = Vec::with_capacity(k);
        let mut atoms = Vec::with_capacity(k);
        for j in 0..k {
            weights.push(parse_cell(row.get(w0 + j).unwrap_or(""), "w", line)?);
            occupancy.push(int(row, n0 + j, "n", line)?);
            let coefs = (0..dim)
                .map(|c| parse_cell(row.get(b0 + j * dim + c).unwrap_or(""), "beta", line))
                .collect::<Result<Vec<f64>>>()?;
            atoms.push(BetaVector::new(coefs)?);
        }
        let d_star = int(row, i_dstar, "d_star", line)?;
        if d_star != occupancy.iter().filter(|&&c| c > 0).count() {
            return Err(Error::invalid(format!("row {}: d_star disagrees with occupancy", line + 1)));
        }
        records.push(IterationRecord {
            iter: int(row, i_iter, "iter", line)?,
            d_star,
            weights,
            occupancy,
            atoms,
        });
    }
    Ok(ChainTrace {
        calibration,
        records,
        accepted: 0,
        proposed: 0,
        rw_step: 0.0,
    })
}

pub fn read_trace_path(path: &Path) -> Result<ChainTrace> {
    read_trace(File::open(path)?)
}

/// Reads the `d_star` column of a trace or components file.
pub fn read_d_star<R: Read>(reader: R) -> Result<Vec<f64>> {
    let table = Table::read(reader)?;
    if table.rows.is_empty() {
        return Err(Error::invalid("file has no rows"));
    }
    table.column("d_star")
}

pub fn write_tau_curve<W: Write>(writer: W, curve: &TauCurve) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "mean", "lower95", "upper95"])?;
    for i in 0..curve.x_grid.len() {
        w.write_record([
            curve.x_grid[i].to_string(),
            curve.mean[i].to_string(),
            curve.lower95[i].to_string(),
            curve.upper95[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_components<W: Write>(writer: W, summary: &ComponentSummary) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["iter", "d_star", "w1", "w2"])?;
    for i in 0..summary.d_star.len() {
        let (w1, w2) = summary.top_weights[i];
        w.write_record([
            summary.iters[i].to_string(),
            summary.d_star[i].to_string(),
            w1.to_string(),
            w2.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `x, u, v, y1, y2`; the data-scale columns are left empty without a reference.
pub fn write_predictive<W: Write>(writer: W, draws: &[PredictiveDraw], data_scale: Option<&[(f64, f64)]>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "u", "v", "y1", "y2"])?;
    for (i, d) in draws.iter().enumerate() {
        let (y1, y2) = match data_scale {
            Some(ys) => (ys[i].0.to_string(), ys[i].1.to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([d.x.to_string(), d.pair.u.to_string(), d.pair.v.to_string(), y1, y2])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(writer: W, s: &Summary) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["min", "q1", "median", "mean", "q3", "max"])?;
    w.write_record([s.min, s.q1, s.median, s.mean, s.q3, s.max].map(|v| v.to_string()))?;
    w.flush()?;
    Ok(())
}

pub fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{run_chain, McmcConfig, PriorConfig};
    use crate::synth::{simulate_dataset, CopulaFamily, SimulationPlan};

    #[test]
    fn input_detection() {
        let raw = "y1,y2,x\n1,2,0\n3,1,1\n2,5,2\n";
        assert!(matches!(read_input(raw.as_bytes()).unwrap(), InputData::Raw(_)));
        let pseudo = "u,v,x\n0.2,0.4,0\n0.6,0.5,1\n";
        assert!(matches!(read_input(pseudo.as_bytes()).unwrap(), InputData::Pseudo(_)));
        let err = read_input("y1,y2,z\n1,2,3\n4,5,6\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("`x`"), "{err}");
        assert!(read_input("y1,y2,x\n1,2,nan\n3,4,5\n".as_bytes()).is_err());
        assert!(read_input("y1,y2,x\n1,2,a\n3,4,5\n".as_bytes()).is_err());
        assert!(read_input("a,b,x\n1,2,3\n3,4,5\n".as_bytes()).is_err());
    }

    #[test]
    fn trace_round_trip() {
        let plan = SimulationPlan::new(CopulaFamily::Gaussian, Calibration::ExpBump, 40, 2);
        let data = simulate_dataset(&plan).unwrap();
        let cfg = McmcConfig {
            iterations: 60,
            burn_in: 30,
            ..McmcConfig::default()
        };
        let trace = run_chain(&data, PriorConfig::default(), Calibration::ExpBump, cfg).unwrap();
        let mut buf = Vec::new();
        write_trace(&mut buf, &trace).unwrap();
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(back.records, trace.records);
        assert_eq!(back.calibration, Calibration::ExpBump);
        let mut again = Vec::new();
        write_trace(&mut again, &back).unwrap();
        assert_eq!(buf, again);
        assert_eq!(read_d_star(buf.as_slice()).unwrap(), trace.d_star());
    }

    #[test]
    fn empty_trace_rejected() {
        assert!(read_trace("iter,d_star,k,w_1,n_1,beta_1_1,beta_1_2\n".as_bytes()).is_err());
        assert!(read_d_star("iter,d_star\n".as_bytes()).is_err());
    }

    #[test]
    fn pseudo_round_trip() {
        let p = PseudoDataset::new(vec![0.3, 0.7, 0.2, 0.5], vec![0.3, 0.8, 0.6, 0.45], vec![-1.0, 1.5, 0.0, 2.0]).unwrap();
        let mut buf = Vec::new();
        write_pseudo(&mut buf, &p).unwrap();
        assert_eq!(read_input(buf.as_slice()).unwrap(), InputData::Pseudo(p));
        // values outside [1/(2n), 1 - 1/(2n)] are pulled in
        let text = "u,v,x\n0,0.5,1\n1,0.5,2\n";
        match read_input(text.as_bytes()).unwrap() {
            InputData::Pseudo(q) => assert_eq!(q.u, vec![0.25, 0.75]),
            other => panic!("{other:?}"),
        }
    }
}
