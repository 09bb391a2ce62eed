//! Run configuration documents, trace and table CSVs, and result files.
//!
//! Configurations are TOML. Relative file paths inside a configuration are
//! resolved against the directory of the configuration file. Result files
//! are a JSON document holding the effective configuration and the run
//! record, plus a per-frame CSV series.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use num_rational::Ratio;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::channel::{RssiSample, RssiTrace};
use crate::energy::{EfficiencyTable, SolarSample, SolarTrace};
use crate::error::{Error, KeyIssue, Result};
use crate::exact::ExactInstance;
use crate::model::{EnergyConstants, Kappa, RunMetrics};
use crate::scalar::Scalar;
use crate::sched::SchedulerKind;
use crate::sim::{ChannelConfig, Inputs, RunRecord, SimConfig, SolarConfig};

pub const RSSI_HEADER: [&str; 3] = ["node_id", "frame", "rssi_dbm"];
pub const SOLAR_HEADER: [&str; 3] = ["node_id", "frame", "power_mw"];
pub const EFFICIENCY_HEADER: [&str; 3] = ["kind", "key", "received_mw"];
pub const SERIES_HEADER: &str = "frame,gamma,live_nodes,fair_nodes,dead_nodes";
pub const SWEEP_HEADER: &str = "axis_value,total_received,fair_nodes,dead_nodes";
pub const COMPARE_HEADER: &str = "scheduler,kappa,total_received,fair_nodes,dead_nodes";

pub const RECORD_FILE: &str = "record.json";
pub const SERIES_FILE: &str = "series.csv";

/// Where an effective setting came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Default,
    File,
    Flag,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory receiving `record.json` and `series.csv`.
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

/// A parsed and validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig<T: Scalar> {
    pub sim: SimConfig<T>,
    pub scheduler: SchedulerKind,
    pub output: OutputConfig,
    /// Origin of every setting that a command-line flag can override.
    pub sources: BTreeMap<String, Source>,
}

impl<T: Scalar> RunConfig<T> {
    pub fn set_scheduler(&mut self, s: SchedulerKind) {
        self.scheduler = s;
        self.sources.insert("scheduler".into(), Source::Flag);
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.sim.scenario.rng_seed = seed;
        self.sources
            .insert("scenario.rng_seed".into(), Source::Flag);
    }

    pub fn set_kappa(&mut self, kappa: T) -> Result<()> {
        Kappa::new(kappa)?;
        self.sim.kappa = kappa;
        self.sources.insert("kappa".into(), Source::Flag);
        Ok(())
    }

    pub fn set_output_dir(&mut self, dir: PathBuf) {
        self.output.dir = Some(dir);
        self.sources.insert("output.dir".into(), Source::Flag);
    }
}

fn key_error(path: &str, message: &str) -> Error {
    let quoted = |prefix: &str| {
        message
            .strip_prefix(prefix)
            .and_then(|rest| rest.split('`').next())
            .map(str::to_owned)
    };
    let join = |field: String| {
        if path.is_empty() || path == "." {
            field
        } else {
            format!("{path}.{field}")
        }
    };
    let (kind, key) = if let Some(field) = quoted("unknown field `") {
        let key = if path.ends_with(&field) {
            path.to_owned()
        } else {
            join(field)
        };
        (KeyIssue::Unknown, key)
    } else if let Some(field) = quoted("missing field `") {
        (KeyIssue::Missing, join(field))
    } else if message.starts_with("invalid type") {
        (KeyIssue::WrongType, path.to_owned())
    } else {
        (KeyIssue::InvalidValue, path.to_owned())
    };
    Error::ConfigKey {
        kind,
        key: if key.is_empty() { "<root>".into() } else { key },
        detail: message.to_owned(),
    }
}

fn deserialize_keyed<T: DeserializeOwned>(value: toml::Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix, inner.as_str()) {
            ("", p) => p.to_owned(),
            (pre, "." | "") => pre.to_owned(),
            (pre, p) => format!("{pre}.{p}"),
        };
        key_error(&path, &e.inner().to_string())
    })
}

fn syntax_error(text: &str, e: &toml::de::Error) -> Error {
    let line = e
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() as u64 + 1)
        .unwrap_or(0);
    Error::Syntax {
        line,
        message: e.message().to_owned(),
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn require_file(p: &Path) -> Result<()> {
    fs::metadata(p).map_err(|e| Error::io(p, e))?;
    Ok(())
}

/// Parses a configuration document. `base_dir` anchors relative paths.
pub fn parse_config<T: Scalar>(text: &str, base_dir: &Path) -> Result<RunConfig<T>> {
    let mut table: toml::Table = text.parse().map_err(|e| syntax_error(text, &e))?;
    let mut sources = BTreeMap::new();
    let mut note = |key: &str, present: bool| {
        let src = if present {
            Source::File
        } else {
            Source::Default
        };
        sources.insert(key.to_owned(), src);
    };
    note("scheduler", table.contains_key("scheduler"));
    note("kappa", table.contains_key("kappa"));
    note(
        "scenario.rng_seed",
        table
            .get("scenario")
            .and_then(|s| s.as_table())
            .is_some_and(|s| s.contains_key("rng_seed")),
    );
    note(
        "output.dir",
        table
            .get("output")
            .and_then(|s| s.as_table())
            .is_some_and(|s| s.contains_key("dir")),
    );

    let scheduler = match table.remove("scheduler") {
        None => SchedulerKind::Ehfs,
        Some(v) => deserialize_keyed(v, "scheduler")?,
    };
    let mut output: OutputConfig = match table.remove("output") {
        None => OutputConfig::default(),
        Some(v) => deserialize_keyed(v, "output")?,
    };
    let mut sim: SimConfig<T> = deserialize_keyed(toml::Value::Table(table), "")?;

    Kappa::new(sim.kappa).map_err(|_| Error::ConfigKey {
        kind: KeyIssue::InvalidValue,
        key: "kappa".into(),
        detail: format!("must lie in (0, 1], got {}", sim.kappa),
    })?;
    sim.validate()?;

    if let Some(dir) = &mut output.dir {
        resolve(base_dir, dir);
    }
    if let ChannelConfig::Trace { path, .. } = &mut sim.channel {
        resolve(base_dir, path);
        require_file(path)?;
    }
    if let SolarConfig::Trace { path } = &mut sim.harvest.solar {
        resolve(base_dir, path);
        require_file(path)?;
    }
    if let Some(eff) = &mut sim.harvest.efficiency {
        resolve(base_dir, &mut eff.path);
        require_file(&eff.path)?;
    }

    Ok(RunConfig {
        sim: sim.resolved(),
        scheduler,
        output,
        sources,
    })
}

/// Reads and parses a configuration file.
pub fn load_config<T: Scalar>(path: &Path) -> Result<RunConfig<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base)
}

/// Loads every data file the configuration refers to.
pub fn load_inputs<T: Scalar>(sim: &SimConfig<T>) -> Result<Inputs<T>> {
    let mut inputs = Inputs::none();
    if let ChannelConfig::Trace { path, .. } = &sim.channel {
        inputs.rssi = Some(load_rssi_trace(path)?);
    }
    if let SolarConfig::Trace { path } = &sim.harvest.solar {
        let tau = sim.harvest.tau_solar.unwrap_or(sim.frame_seconds);
        inputs.solar = Some(load_solar_trace(path, tau)?);
    }
    if let Some(eff) = &sim.harvest.efficiency {
        inputs.efficiency = Some(load_efficiency_table(&eff.path)?);
    }
    Ok(inputs)
}

struct CsvRows {
    path: PathBuf,
    reader: csv::Reader<fs::File>,
}

impl CsvRows {
    fn open(path: &Path, header: &[&str]) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(file);
        let found = reader.headers().map_err(|e| Self::csv_error(path, 1, e))?;
        if found.is_empty() || (found.len() == 1 && found[0].is_empty()) {
            return Err(Error::Parse {
                path: path.to_owned(),
                line: 1,
                message: "file is empty".into(),
            });
        }
        if found.iter().ne(header.iter().copied()) {
            return Err(Error::Parse {
                path: path.to_owned(),
                line: 1,
                message: format!("expected header `{}`", header.join(",")),
            });
        }
        Ok(CsvRows {
            path: path.to_owned(),
            reader,
        })
    }

    fn csv_error(path: &Path, line: u64, e: csv::Error) -> Error {
        let line = e.position().map_or(line, |p| p.line());
        Error::Parse {
            path: path.to_owned(),
            line,
            message: e.to_string(),
        }
    }

    fn fail(&self, line: u64, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    /// Deserialised rows with their line numbers.
    fn rows<R: DeserializeOwned>(&mut self) -> Result<Vec<(u64, R)>> {
        let records = self
            .reader
            .records()
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Self::csv_error(&self.path, 0, e))?;
        let mut out = Vec::new();
        for rec in records {
            let line = rec.position().map_or(0, |p| p.line());
            let row: R = rec
                .deserialize(None)
                .map_err(|e| self.fail(line, e.to_string()))?;
            out.push((line, row));
        }
        if out.is_empty() {
            return Err(self.fail(1, "no data rows"));
        }
        Ok(out)
    }
}

/// `(line, (node_id, frame, value))`.
type NodeFrameRow<T> = (u64, (u32, u32, T));

fn node_frame_rows<T: Scalar>(
    path: &Path,
    header: &[&str],
) -> Result<(CsvRows, Vec<NodeFrameRow<T>>)> {
    let mut csv = CsvRows::open(path, header)?;
    let rows: Vec<NodeFrameRow<T>> = csv.rows()?;
    let mut last: BTreeMap<u32, u32> = BTreeMap::new();
    for (line, (node, frame, value)) in &rows {
        if !value.is_finite() {
            return Err(csv.fail(*line, "value is not finite"));
        }
        if let Some(prev) = last.insert(*node, *frame) {
            if *frame <= prev {
                return Err(csv.fail(
                    *line,
                    format!("node {node}: frame {frame} does not follow frame {prev}"),
                ));
            }
        }
    }
    Ok((csv, rows))
}

/// Reads a `node_id,frame,rssi_dbm` trace. Frames must strictly increase per
/// node.
pub fn load_rssi_trace<T: Scalar>(path: &Path) -> Result<RssiTrace<T>> {
    let (_, rows) = node_frame_rows::<T>(path, &RSSI_HEADER)?;
    Ok(RssiTrace {
        samples: rows
            .into_iter()
            .map(|(_, (node_id, frame, rssi_dbm))| RssiSample {
                node_id,
                frame,
                rssi_dbm,
            })
            .collect(),
    })
}

/// Reads a `node_id,frame,power_mw` trace. Frames must strictly increase per
/// node and power must be non-negative.
pub fn load_solar_trace<T: Scalar>(path: &Path, tau_solar: T) -> Result<SolarTrace<T>> {
    let (csv, rows) = node_frame_rows::<T>(path, &SOLAR_HEADER)?;
    if let Some((line, _)) = rows.iter().find(|(_, r)| r.2 < T::zero()) {
        return Err(csv.fail(*line, "power must be non-negative"));
    }
    Ok(SolarTrace {
        samples: rows
            .into_iter()
            .map(|(_, (node_id, frame, power_mw))| SolarSample {
                node_id,
                frame,
                power_mw,
            })
            .collect(),
        tau_solar,
    })
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum CurveKind {
    Distance,
    Orientation,
}

/// Reads a `kind,key,received_mw` table where `kind` is `distance` or
/// `orientation`. Keys must strictly increase within each kind.
pub fn load_efficiency_table<T: Scalar>(path: &Path) -> Result<EfficiencyTable<T>> {
    let mut csv = CsvRows::open(path, &EFFICIENCY_HEADER)?;
    let rows: Vec<(u64, (CurveKind, T, T))> = csv.rows()?;
    let mut table = EfficiencyTable {
        distance_curve: Vec::new(),
        orientation_curve: Vec::new(),
    };
    for (line, (kind, key, mw)) in rows {
        if !(key.is_finite() && mw.is_finite()) {
            return Err(csv.fail(line, "value is not finite"));
        }
        let curve = match kind {
            CurveKind::Distance => &mut table.distance_curve,
            CurveKind::Orientation => &mut table.orientation_curve,
        };
        if let Some(&(prev, _)) = curve.last() {
            if key <= prev {
                return Err(csv.fail(line, format!("key {key} does not follow {prev}")));
            }
        }
        curve.push((key, mw));
    }
    table
        .validate()
        .map_err(|e| Error::InvalidTable(format!("{}: {e}", path.display())))?;
    Ok(table)
}

/// The JSON result document: the run record plus the origin of each
/// overridable setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RunDocument<T> {
    pub sources: BTreeMap<String, Source>,
    pub record: RunRecord<T>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedFiles {
    pub json: PathBuf,
    pub series: PathBuf,
}

pub fn to_json<S: Serialize>(value: &S) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Serialize(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn series_csv<T: Scalar>(metrics: &RunMetrics<T>) -> String {
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for r in &metrics.per_frame {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.frame, r.gamma, r.live_nodes, r.fair_nodes, r.dead_nodes
        ));
    }
    out
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `record.json` and `series.csv` into `dir`.
pub fn emit_results<T: Scalar>(doc: &RunDocument<T>, dir: &Path) -> Result<EmittedFiles> {
    let files = EmittedFiles {
        json: dir.join(RECORD_FILE),
        series: dir.join(SERIES_FILE),
    };
    write(&files.json, &to_json(doc)?)?;
    write(&files.series, &series_csv(&doc.record.metrics))?;
    Ok(files)
}

pub fn read_run_document<T: Scalar>(path: &Path) -> Result<RunDocument<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_owned(),
        line: e.line() as u64,
        message: e.to_string(),
    })
}

pub fn sweep_summary_csv<T: Scalar>(values: &[T], records: &[RunRecord<T>]) -> Result<String> {
    if values.len() != records.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} sweep values but {} records",
            values.len(),
            records.len()
        )));
    }
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for (v, r) in values.iter().zip(records) {
        let m = &r.metrics;
        out.push_str(&format!(
            "{v},{},{},{}\n",
            m.total_received, m.fair_nodes, m.dead_nodes
        ));
    }
    Ok(out)
}

/// Writes the sweep summary to `path`.
pub fn emit_sweep_summary<T: Scalar>(
    path: &Path,
    values: &[T],
    records: &[RunRecord<T>],
) -> Result<()> {
    write(path, &sweep_summary_csv(values, records)?)
}

pub fn compare_summary_csv<T: Scalar>(records: &[RunRecord<T>]) -> String {
    let mut out = String::from(COMPARE_HEADER);
    out.push('\n');
    for r in records {
        let m = &r.metrics;
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.scheduler, r.config.kappa, m.total_received, m.fair_nodes, m.dead_nodes
        ));
    }
    out
}

pub fn emit_compare_summary<T: Scalar>(path: &Path, records: &[RunRecord<T>]) -> Result<()> {
    write(path, &compare_summary_csv(records))
}

/// Exact rational value of the shortest decimal that reads back as `x`.
pub fn decimal_ratio(x: f64) -> Result<Ratio<i128>> {
    let bad = || Error::param("value", format!("{x} has no exact decimal form that fits"));
    if !x.is_finite() {
        return Err(bad());
    }
    let s = format!("{x}");
    let (int, frac) = s.split_once('.').unwrap_or((&s, ""));
    let digits: i128 = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let scale = u32::try_from(frac.len())
        .ok()
        .filter(|&n| n <= 36)
        .ok_or_else(bad)?;
    Ok(Ratio::new(digits, 10i128.pow(scale)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    s: usize,
    f_max: usize,
    kappa: f64,
    #[serde(default)]
    constants: Option<EnergyConstants<f64>>,
    #[serde(default)]
    node: Vec<crate::exact::InstanceNode<f64>>,
}

/// Parses a TOML instance for the exact solver. Decimal numbers are taken at
/// their written value. Energy constants default to the CC2420 set.
pub fn parse_instance(text: &str) -> Result<ExactInstance<Ratio<i128>>> {
    let value: toml::Table = text.parse().map_err(|e| syntax_error(text, &e))?;
    let raw: InstanceFile = deserialize_keyed(toml::Value::Table(value), "")?;
    let q = decimal_ratio;
    let constants = match raw.constants {
        None => EnergyConstants::cc2420(),
        Some(c) => EnergyConstants {
            e_tx_hello: q(c.e_tx_hello)?,
            e_rx_hack: q(c.e_rx_hack)?,
            e_rx_sack: q(c.e_rx_sack)?,
            e_tx: q(c.e_tx)?,
            e_td: q(c.e_td)?,
            v_cc: q(c.v_cc)?,
            i_tx: q(c.i_tx)?,
            i_rx: q(c.i_rx)?,
            r_b: q(c.r_b)?,
        },
    };
    let nodes = raw
        .node
        .into_iter()
        .map(|n| {
            Ok(crate::exact::InstanceNode {
                payload: n.payload,
                energy: q(n.energy)?,
                prr: n.prr.into_iter().map(q).collect::<Result<_>>()?,
                harvest: n.harvest.into_iter().map(q).collect::<Result<_>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let inst = ExactInstance {
        s: raw.s,
        f_max: raw.f_max,
        kappa: q(raw.kappa)?,
        constants,
        nodes,
    };
    inst.validate()?;
    Ok(inst)
}

pub fn load_instance(path: &Path) -> Result<ExactInstance<Ratio<i128>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_instance(&text)
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Default => "default",
            Source::File => "file",
            Source::Flag => "flag",
        })
    }
}
