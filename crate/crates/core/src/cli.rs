//! File formats and the `run` / `check` / `compare` workflows behind the
//! `probit-da` binary.
//!
//! Every output is a pure function of the inputs and seeds, and is written to
//! a temporary file that is renamed into place, so a failed run leaves no
//! partial sample files behind.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, compare_chains, ComparisonReport, DiagnosticsReport};
use crate::error::{Error, Result};
use crate::model::{PosteriorContext, PriorSpec, ProbitData};
use crate::samplers::{run_chains, SampleMatrix, SampleMeta, SamplerConfig};
use crate::theory::{theory_report, TheoryReport};

/// Prior as written in a run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PriorDescriptor {
    /// `q_path`: headerless CSV `p × p` matrix; `v_path`: headerless CSV
    /// vector (one column or one row).
    ProperNormal { q_path: PathBuf, v_path: PathBuf },
    GPrior { g: f64 },
    ImproperFlat,
}

fn default_chains() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data_path: PathBuf,
    #[serde(default)]
    pub add_intercept: bool,
    pub prior: PriorDescriptor,
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub init_beta: Option<Vec<f64>>,
    pub output_dir: PathBuf,
    #[serde(default = "default_chains")]
    pub chains: usize,
}

impl RunConfig {
    /// Reads a JSON config; relative paths inside it are resolved against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.data_path);
        fix(&mut self.output_dir);
        if let PriorDescriptor::ProperNormal { q_path, v_path } = &mut self.prior {
            fix(q_path);
            fix(v_path);
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sampler.validate()?;
        if self.chains == 0 {
            return Err(Error::InvalidConfig("chains must be >= 1".into()));
        }
        let mut files = vec![&self.data_path];
        if let PriorDescriptor::ProperNormal { q_path, v_path } = &self.prior {
            files.push(q_path);
            files.push(v_path);
        }
        for f in files {
            if !f.is_file() {
                return Err(Error::InvalidConfig(format!("file not found: {}", f.display())));
            }
        }
        Ok(())
    }

    pub fn load_data(&self) -> Result<ProbitData> {
        load_csv(&self.data_path, self.add_intercept)
    }

    pub fn prior_spec(&self) -> Result<PriorSpec> {
        Ok(match &self.prior {
            PriorDescriptor::ProperNormal { q_path, v_path } => PriorSpec::ProperNormal {
                q: load_matrix_csv(q_path)?,
                v: load_vector_csv(v_path)?,
            },
            PriorDescriptor::GPrior { g } => PriorSpec::GPrior { g: *g },
            PriorDescriptor::ImproperFlat => PriorSpec::ImproperFlat,
        })
    }
}

fn csv_reader(path: &Path, has_headers: bool) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(has_headers)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Parse {
            path: path.to_path_buf(),
            row,
            column: 0,
            message: format!("{other:?}"),
        },
    }
}

fn parse_cell(path: &Path, row: usize, column: usize, cell: &str) -> Result<f64> {
    let value: f64 = cell.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        row,
        column,
        message: format!("not a number: {cell:?}"),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            row,
            column,
            message: format!("not finite: {cell:?}"),
        });
    }
    Ok(value)
}

/// Reads a data file with header `y,x1,...,xp`.
///
/// Row numbers in errors are file line numbers (the header is line 1) and
/// columns are 1-based.
pub fn load_csv(path: &Path, add_intercept: bool) -> Result<ProbitData> {
    let mut reader = csv_reader(path, true)?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.get(0) != Some("y") || headers.len() < 2 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            row: 1,
            column: 1,
            message: format!("expected header \"y,x1,...,xp\", got {:?}", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let p = headers.len() - 1;
    let mut y = Vec::new();
    let mut values = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let row = k + 2;
        match record.get(0) {
            Some("0") => y.push(0.0),
            Some("1") => y.push(1.0),
            other => {
                // Accept "0.0"/"1.0" spellings, reject anything else.
                match other.and_then(|s| s.parse::<f64>().ok()) {
                    Some(v) if v == 0.0 || v == 1.0 => y.push(v),
                    _ => {
                        return Err(Error::InvalidResponse {
                            path: path.to_path_buf(),
                            row,
                            value: other.unwrap_or("").to_string(),
                        })
                    }
                }
            }
        }
        for j in 1..=p {
            values.push(parse_cell(path, row, j + 1, record.get(j).unwrap_or(""))?);
        }
    }
    if y.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    let data = ProbitData::new(DMatrix::from_row_slice(y.len(), p, &values), &y)?;
    Ok(if add_intercept { data.with_intercept() } else { data })
}

fn load_numeric_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv_reader(path, false)?;
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, cell)| parse_cell(path, k + 1, j + 1, cell))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    Ok(rows)
}

/// Headerless square matrix.
pub fn load_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let rows = load_numeric_rows(path)?;
    let p = rows.len();
    if rows.iter().any(|r| r.len() != p) {
        return Err(Error::DimensionMismatch(format!("{}: matrix is not square", path.display())));
    }
    Ok(DMatrix::from_row_iterator(p, p, rows.into_iter().flatten()))
}

/// Headerless vector, one column or one row.
pub fn load_vector_csv(path: &Path) -> Result<DVector<f64>> {
    let rows = load_numeric_rows(path)?;
    if rows.len() == 1 {
        Ok(DVector::from_vec(rows.into_iter().next().unwrap()))
    } else if rows.iter().all(|r| r.len() == 1) {
        Ok(DVector::from_iterator(rows.len(), rows.into_iter().flatten()))
    } else {
        Err(Error::DimensionMismatch(format!("{}: expected a single row or column", path.display())))
    }
}

/// Writes `bytes` to `path` via a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s.into_bytes()
}

/// Data file in the `y,x1,...,xp` layout.
pub fn data_to_csv(data: &ProbitData) -> String {
    let mut out = String::from("y");
    for j in 1..=data.p() {
        write!(out, ",x{j}").unwrap();
    }
    out.push('\n');
    for i in 0..data.n() {
        out.push(if data.y()[i] { '1' } else { '0' });
        for j in 0..data.p() {
            write!(out, ",{}", data.x()[(i, j)]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Draws with header `beta_1,...,beta_p`.
pub fn samples_to_csv(sample: &SampleMatrix) -> String {
    let p = sample.p();
    let mut out = (1..=p).map(|j| format!("beta_{j}")).collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in sample.draws.row_iter() {
        let mut first = true;
        for v in row.iter() {
            if !first {
                out.push(',');
            }
            first = false;
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn load_samples_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut reader = csv_reader(path, true)?;
    let p = reader.headers().map_err(|e| csv_error(path, e))?.len();
    let mut values = Vec::new();
    let mut m = 0;
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        for j in 0..p {
            values.push(parse_cell(path, k + 2, j + 1, record.get(j).unwrap_or(""))?);
        }
        m += 1;
    }
    if m == 0 {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    Ok(DMatrix::from_row_slice(m, p, &values))
}

/// Contents of `meta.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub data_path: PathBuf,
    pub add_intercept: bool,
    pub n: usize,
    pub p: usize,
    pub chains: Vec<SampleMeta>,
}

#[derive(Clone, Debug)]
pub struct RunOutputs {
    pub samples: Vec<SampleMatrix>,
    pub diagnostics: Vec<DiagnosticsReport>,
    pub files: Vec<PathBuf>,
}

pub fn samples_path(dir: &Path, chain: usize) -> PathBuf {
    dir.join(format!("samples_{chain}.csv"))
}

/// Builds the context, runs `config.chains` chains (chain `k` seeded with
/// `seed + k`), then writes samples, `meta.json`, and per-chain diagnostics.
pub fn run(config: &RunConfig) -> Result<RunOutputs> {
    config.validate()?;
    let data = config.load_data()?;
    let prior = config.prior_spec()?;
    let ctx = PosteriorContext::new(&data, &prior)?;
    let init = match &config.init_beta {
        Some(b) => DVector::from_vec(b.clone()),
        None => DVector::zeros(data.p()),
    };
    let samples = run_chains(&ctx, &config.sampler, &init, config.chains)?;
    let diagnostics = samples
        .iter()
        .map(|s| diagnostics::diagnose(s, diagnostics::DEFAULT_MAX_LAG))
        .collect::<Result<Vec<_>>>()?;

    let dir = &config.output_dir;
    let mut files = Vec::new();
    for (k, (s, d)) in samples.iter().zip(&diagnostics).enumerate() {
        let path = samples_path(dir, k);
        write_atomic(&path, samples_to_csv(s).as_bytes())?;
        files.push(path);
        let path = dir.join(format!("diagnostics_{k}.json"));
        write_atomic(&path, &to_json(d))?;
        files.push(path);
    }
    let meta = RunMeta {
        data_path: config.data_path.clone(),
        add_intercept: config.add_intercept,
        n: data.n(),
        p: data.p(),
        chains: samples.iter().map(|s| s.meta.clone()).collect(),
    };
    let path = dir.join("meta.json");
    write_atomic(&path, &to_json(&meta))?;
    files.push(path);
    Ok(RunOutputs {
        samples,
        diagnostics,
        files,
    })
}

/// Theory report for the configured data and prior, also written to
/// `theory.json` in the output directory.
pub fn check(config: &RunConfig) -> Result<TheoryReport> {
    let data = config.load_data()?;
    let prior = config.prior_spec()?;
    let report = theory_report(&data, &prior)?;
    write_atomic(&config.output_dir.join("theory.json"), &to_json(&report))?;
    Ok(report)
}

pub fn theory_json(report: &TheoryReport) -> String {
    String::from_utf8(to_json(report)).expect("utf-8")
}

/// Loads every chain of a completed run directory.
///
/// Labels are the directory name, suffixed with `#k` when the run has more
/// than one chain.
pub fn load_run(dir: &Path, label: Option<&str>) -> Result<Vec<(String, SampleMatrix)>> {
    let meta_path = dir.join("meta.json");
    let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: RunMeta = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: meta_path.clone(),
        source,
    })?;
    let base = label.map(str::to_string).unwrap_or_else(|| {
        dir.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| dir.display().to_string())
    });
    let chains = meta.chains.len();
    meta.chains
        .into_iter()
        .enumerate()
        .map(|(k, m)| {
            let draws = load_samples_csv(&samples_path(dir, k))?;
            let label = if chains == 1 { base.clone() } else { format!("{base}#{k}") };
            Ok((label, SampleMatrix { draws, meta: m }))
        })
        .collect()
}

/// Writes `compare.json` and the per-coordinate CSV tables into `out_dir`.
pub fn write_comparison(report: &ComparisonReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let path = out_dir.join("compare.json");
    write_atomic(&path, &to_json(report))?;
    files.push(path);
    let labels: Vec<&str> = report.runs.iter().map(|r| r.label.as_str()).collect();
    let header = |first: &str| format!("{first},{}\n", labels.join(","));
    let p = report.coordinates.len();
    for j in 0..p {
        let mut acf = header("lag");
        for lag in 0..=report.max_lag {
            write!(acf, "{lag}").unwrap();
            for r in &report.runs {
                write!(acf, ",{}", r.report.acf[j][lag]).unwrap();
            }
            acf.push('\n');
        }
        let path = out_dir.join(format!("acf_beta_{}.csv", j + 1));
        write_atomic(&path, acf.as_bytes())?;
        files.push(path);

        // Rows keyed by iteration; runs of different length leave blanks.
        let mut by_iter: BTreeMap<usize, Vec<Option<f64>>> = BTreeMap::new();
        for (k, r) in report.runs.iter().enumerate() {
            for (&it, &v) in r.report.checkpoints.iter().zip(&r.report.running_means[j]) {
                by_iter.entry(it).or_insert_with(|| vec![None; labels.len()])[k] = Some(v);
            }
        }
        let mut rm = header("iteration");
        for (it, vals) in by_iter {
            write!(rm, "{it}").unwrap();
            for v in vals {
                match v {
                    Some(v) => write!(rm, ",{v}").unwrap(),
                    None => rm.push(','),
                }
            }
            rm.push('\n');
        }
        let path = out_dir.join(format!("running_mean_beta_{}.csv", j + 1));
        write_atomic(&path, rm.as_bytes())?;
        files.push(path);
    }
    let mut summary = String::from("label,coordinate,mean,sd,sigma2_hat,ess,acf_lag1\n");
    for r in &report.runs {
        for j in 0..p {
            let d = &r.report;
            writeln!(
                summary,
                "{},{},{},{},{},{},{}",
                r.label,
                j + 1,
                d.mean[j],
                d.sd[j],
                d.sigma2_hat[j],
                d.ess[j],
                d.acf[j][1]
            )
            .unwrap();
        }
    }
    let path = out_dir.join("summary.csv");
    write_atomic(&path, summary.as_bytes())?;
    files.push(path);
    Ok(files)
}

/// Compares completed runs; needs at least two chains in total.
pub fn compare(run_dirs: &[PathBuf], labels: &[String], out_dir: &Path, max_lag: usize) -> Result<ComparisonReport> {
    if !labels.is_empty() && labels.len() != run_dirs.len() {
        return Err(Error::InvalidConfig(format!(
            "{} labels given for {} runs",
            labels.len(),
            run_dirs.len()
        )));
    }
    let mut runs = Vec::new();
    for (k, dir) in run_dirs.iter().enumerate() {
        runs.extend(load_run(dir, labels.get(k).map(String::as_str))?);
    }
    if runs.len() < 2 {
        return Err(Error::InvalidConfig("compare needs at least two chains".into()));
    }
    let report = compare_chains(&runs, max_lag)?;
    write_comparison(&report, out_dir)?;
    Ok(report)
}
