//! Line-oriented text formats. Every float is written with 17 significant
//! digits so that a write/read round trip is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sflen_core::filterbank::{BankKind, FilterBank};
use sflen_core::learner::RunRecord;
use sflen_core::linalg::Mat;
use sflen_core::{LdsSystem, Sequence};

use crate::error::{io, Error, Result};

/// `{:.16e}`: one digit before the point and sixteen after.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn join(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 24);
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        write!(s, "{v:.16e}").unwrap();
    }
    s
}

struct Lines {
    path: PathBuf,
    lines: Vec<(usize, String)>,
    pos: usize,
}

impl Lines {
    /// Blank lines and `#` comments are skipped.
    fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io(path))?;
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim().to_string()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Ok(Lines { path: path.to_path_buf(), lines, pos: 0 })
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse { path: self.path.clone(), line, msg: msg.into() }
    }

    fn next(&mut self, what: &str) -> Result<(usize, String)> {
        let item = self.lines.get(self.pos).cloned();
        self.pos += 1;
        item.ok_or_else(|| self.err(self.lines.last().map_or(0, |l| l.0), format!("missing {what}")))
    }

    fn finish(&self) -> Result<()> {
        match self.lines.get(self.pos) {
            Some((n, _)) => Err(self.err(*n, "trailing content")),
            None => Ok(()),
        }
    }

    fn floats(&self, line: usize, text: &str) -> Result<Vec<f64>> {
        if text.is_empty() {
            return Ok(Vec::new());
        }
        text.split(',').map(|v| v.trim().parse::<f64>().map_err(|e| self.err(line, format!("bad number {v:?}: {e}")))).collect()
    }

    /// `key=value` pairs of a header such as `sf-bank v1 kind=h T=64 k=8`.
    fn header(&self, line: usize, text: &str, magic: &str) -> Result<Vec<(String, String)>> {
        let rest = text.strip_prefix(magic).ok_or_else(|| self.err(line, format!("expected header `{magic} ...`")))?;
        rest.split_whitespace()
            .map(|kv| {
                kv.split_once('=')
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .ok_or_else(|| self.err(line, format!("expected key=value, got {kv:?}")))
            })
            .collect()
    }

    fn field<T: std::str::FromStr>(&self, line: usize, pairs: &[(String, String)], key: &str) -> Result<T> {
        let v = pairs.iter().find(|(k, _)| k == key).ok_or_else(|| self.err(line, format!("missing {key}=")))?;
        v.1.parse().map_err(|_| self.err(line, format!("bad value for {key}: {:?}", v.1)))
    }

    fn keyed(&mut self, key: &str) -> Result<(usize, Vec<f64>)> {
        let (n, l) = self.next(key)?;
        let v = l.strip_prefix(key).and_then(|r| r.strip_prefix('=')).ok_or_else(|| self.err(n, format!("expected `{key}=...`")))?;
        Ok((n, self.floats(n, v)?))
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io(dir))?;
    }
    fs::write(path, text).map_err(io(path))
}

pub fn bank_to_string(bank: &FilterBank) -> String {
    let mut s = format!("sf-bank v1 kind={} T={} k={}\n", bank.kind().as_str(), bank.horizon(), bank.k());
    if bank.kind() == BankKind::Tensor {
        s.push_str("# filters are kron(phi_i, phi_j), row-major in (i, j), first factor fastest\n");
    }
    for (phi, sigma) in bank.filters().iter().zip(bank.eigenvalues()) {
        writeln!(s, "sigma={} phi={}", fmt_f64(*sigma), join(phi)).unwrap();
    }
    s
}

pub fn write_bank(path: &Path, bank: &FilterBank) -> Result<()> {
    write(path, &bank_to_string(bank))
}

pub fn read_bank(path: &Path) -> Result<FilterBank> {
    let mut lines = Lines::read(path)?;
    let (n, head) = lines.next("header")?;
    let pairs = lines.header(n, &head, "sf-bank v1")?;
    let kind_s: String = lines.field(n, &pairs, "kind")?;
    let kind = BankKind::parse(&kind_s).ok_or_else(|| lines.err(n, format!("unknown kind {kind_s:?}")))?;
    let horizon: usize = lines.field(n, &pairs, "T")?;
    let k: usize = lines.field(n, &pairs, "k")?;
    let count = if kind == BankKind::Tensor { k * k } else { k };
    let mut filters = Vec::with_capacity(count);
    let mut sigmas = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, l) = lines.next("filter line")?;
        let (sig, phi) = l
            .strip_prefix("sigma=")
            .and_then(|r| r.split_once(" phi="))
            .ok_or_else(|| lines.err(n, "expected `sigma=<val> phi=<values>`"))?;
        sigmas.push(sig.parse().map_err(|_| lines.err(n, format!("bad sigma {sig:?}")))?);
        filters.push(lines.floats(n, phi)?);
    }
    lines.finish()?;
    Ok(FilterBank::from_parts(kind, horizon, k, filters, sigmas)?)
}

/// `# key=value` provenance lines written above the system body.
pub fn lds_to_string(system: &LdsSystem, comments: &[(&str, String)]) -> String {
    let mut s = format!("sf-lds v1 d_hidden={} d_in={} d_out={}\n", system.d_hidden(), system.d_in(), system.d_out());
    for (k, v) in comments {
        writeln!(s, "# {k}={v}").unwrap();
    }
    writeln!(s, "eigenvalues={}", join(system.eigenvalues())).unwrap();
    writeln!(s, "B={}", join(system.b().as_slice())).unwrap();
    writeln!(s, "C={}", join(system.c().as_slice())).unwrap();
    writeln!(s, "D={}", join(system.d().as_slice())).unwrap();
    s
}

pub fn write_lds(path: &Path, system: &LdsSystem, comments: &[(&str, String)]) -> Result<()> {
    write(path, &lds_to_string(system, comments))
}

pub fn read_lds(path: &Path) -> Result<LdsSystem> {
    let mut lines = Lines::read(path)?;
    let (n, head) = lines.next("header")?;
    let pairs = lines.header(n, &head, "sf-lds v1")?;
    let h: usize = lines.field(n, &pairs, "d_hidden")?;
    let d_in: usize = lines.field(n, &pairs, "d_in")?;
    let d_out: usize = lines.field(n, &pairs, "d_out")?;
    let (_, eig) = lines.keyed("eigenvalues")?;
    let mut mats = Vec::new();
    for (key, rows, cols) in [("B", h, d_in), ("C", d_out, h), ("D", d_out, d_in)] {
        let (n, v) = lines.keyed(key)?;
        if v.len() != rows * cols {
            return Err(lines.err(n, format!("{key} has {} entries, expected {rows}x{cols}", v.len())));
        }
        mats.push(Mat::from_vec(rows, cols, v));
    }
    lines.finish()?;
    let d = mats.pop().unwrap();
    let c = mats.pop().unwrap();
    let b = mats.pop().unwrap();
    Ok(LdsSystem::new(eig, b, c, d)?)
}

/// Header `step,loss,cumulative_loss,prediction_norm`, one row per step.
pub fn loss_table(losses: &[f64], cumulative: &[f64], prediction_norms: &[f64]) -> String {
    let mut s = String::from("step,loss,cumulative_loss,prediction_norm\n");
    for t in 0..losses.len() {
        writeln!(s, "{},{},{},{}", t + 1, fmt_f64(losses[t]), fmt_f64(cumulative[t]), fmt_f64(prediction_norms[t])).unwrap();
    }
    s
}

pub fn run_csv(run: &RunRecord) -> String {
    loss_table(&run.losses, &run.cumulative, &run.prediction_norms)
}

pub fn write_run_csv(path: &Path, run: &RunRecord) -> Result<()> {
    write(path, &run_csv(run))
}

/// Loss column and the last cumulative loss of a run CSV.
pub fn read_run_csv(path: &Path) -> Result<(Vec<f64>, f64)> {
    let text = fs::read_to_string(path).map_err(io(path))?;
    let err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut it = text.lines().enumerate();
    match it.next() {
        Some((_, "step,loss,cumulative_loss,prediction_norm")) => {}
        _ => return Err(err(1, "expected header step,loss,cumulative_loss,prediction_norm".into())),
    }
    let mut losses = Vec::new();
    let mut total = 0.0;
    for (i, l) in it {
        let cols: Vec<&str> = l.split(',').collect();
        if cols.len() != 4 {
            return Err(err(i + 1, format!("expected 4 columns, got {}", cols.len())));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|e| err(i + 1, format!("bad number {s:?}: {e}")));
        losses.push(parse(cols[1])?);
        total = parse(cols[2])?;
    }
    Ok((losses, total))
}

/// Inputs and outputs in one table: row `step` holds `u_{step-1}` and `y_step`,
/// the pair seen by the learner at that step.
pub fn data_csv(inputs: &Sequence, outputs: &Sequence) -> String {
    let mut s = String::from("step");
    for j in 0..inputs.dim() {
        write!(s, ",u{j}").unwrap();
    }
    for j in 0..outputs.dim() {
        write!(s, ",y{j}").unwrap();
    }
    s.push('\n');
    for t in 0..inputs.len() {
        write!(s, "{}", t + 1).unwrap();
        for v in inputs.get(t).iter().chain(outputs.get(t)) {
            write!(s, ",{}", fmt_f64(*v)).unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn write_data_csv(path: &Path, inputs: &Sequence, outputs: &Sequence) -> Result<()> {
    if inputs.len() != outputs.len() {
        return Err(Error::Config(format!("{} inputs but {} outputs", inputs.len(), outputs.len())));
    }
    write(path, &data_csv(inputs, outputs))
}

pub fn read_data_csv(path: &Path) -> Result<(Sequence, Sequence)> {
    let text = fs::read_to_string(path).map_err(io(path))?;
    let err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut it = text.lines().enumerate();
    let head = it.next().ok_or_else(|| err(1, "empty file".into()))?.1;
    let names: Vec<&str> = head.split(',').collect();
    if names.first() != Some(&"step") {
        return Err(err(1, "expected a `step` column first".into()));
    }
    let d_in = names.iter().filter(|n| n.starts_with('u')).count();
    let d_out = names.iter().filter(|n| n.starts_with('y')).count();
    if d_in == 0 || d_out == 0 || 1 + d_in + d_out != names.len() {
        return Err(err(1, format!("unrecognized columns {head:?}")));
    }
    let (mut u, mut y) = (Vec::new(), Vec::new());
    for (i, l) in it {
        let vals: Vec<f64> = l
            .split(',')
            .skip(1)
            .map(|s| s.parse::<f64>().map_err(|e| err(i + 1, format!("bad number {s:?}: {e}"))))
            .collect::<Result<_>>()?;
        if vals.len() != d_in + d_out {
            return Err(err(i + 1, format!("expected {} values, got {}", d_in + d_out, vals.len())));
        }
        u.extend_from_slice(&vals[..d_in]);
        y.extend_from_slice(&vals[d_in..]);
    }
    Ok((Sequence::from_flat(d_in, u)?, Sequence::from_flat(d_out, y)?))
}

/// Header `step,mean_loss,smoothed_loss`.
pub fn aggregate_csv(mean: &[f64], smoothed: &[f64]) -> String {
    let mut s = String::from("step,mean_loss,smoothed_loss\n");
    for (t, (m, sm)) in mean.iter().zip(smoothed).enumerate() {
        writeln!(s, "{},{},{}", t + 1, fmt_f64(*m), fmt_f64(*sm)).unwrap();
    }
    s
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    write(path, text)
}
