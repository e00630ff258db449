//! Artifact writers and readers. Every file written here starts with the
//! tool version and the config hash.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use itinerant_core::analysis::SweepRow;
use itinerant_core::integrator::Trajectory;
use itinerant_core::rnn::{Dataset, INPUT_DIM, STATE_DIM};

use crate::error::CliError;

pub const TOOL: &str = "itinerant";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// JSON document wrapper carrying provenance fields ahead of the payload.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: &'a str,
    pub command: &'a str,
    #[serde(flatten)]
    pub body: &'a T,
}

/// Where one command writes its artifacts.
#[derive(Debug, Clone)]
pub struct OutputDir {
    pub dir: PathBuf,
    pub hash: String,
}

impl OutputDir {
    pub fn create(dir: &Path, hash: &str) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hash: hash.to_owned(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn json<T: Serialize>(
        &self,
        name: &str,
        command: &str,
        body: &T,
    ) -> Result<String, CliError> {
        let doc = Envelope {
            tool: TOOL,
            version: VERSION,
            config_hash: &self.hash,
            command,
            body,
        };
        let mut text =
            serde_json::to_string_pretty(&doc).map_err(|e| CliError::Parse(e.to_string()))?;
        text.push('\n');
        self.write(name, &text)?;
        Ok(text)
    }

    pub fn write(&self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.path(name);
        fs::write(&path, text).map_err(|e| CliError::io(path, e))
    }

    fn csv_preamble(&self) -> String {
        format!("# {TOOL} {VERSION} config_hash={}\n", self.hash)
    }

    pub fn trajectory_csv(&self, name: &str, traj: &Trajectory) -> Result<(), CliError> {
        let mut text = self.csv_preamble();
        text.push_str(&trajectory_csv(traj));
        self.write(name, &text)
    }

    pub fn sweep_csv(&self, name: &str, rows: &[SweepRow]) -> Result<(), CliError> {
        let mut text = self.csv_preamble();
        text.push_str(&sweep_csv(rows));
        self.write(name, &text)
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
fn num(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.16e}");
}

/// Header `t,s,shat_1,x_1,y_1,theta_hat_1,hf_1,...` and one row per sample.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let labels: Vec<usize> = (0..traj.n_classes)
        .map(|i| traj.meta.labels.get(i).copied().unwrap_or(i + 1))
        .collect();
    let mut out = String::from("t,s");
    for l in &labels {
        let _ = write!(out, ",shat_{l},x_{l},y_{l},theta_hat_{l},hf_{l}");
    }
    out.push('\n');
    for k in 0..traj.len() {
        num(&mut out, traj.times[k]);
        out.push(',');
        num(&mut out, traj.s(k));
        for i in 0..traj.n_classes {
            let q = traj.q(k, i);
            for v in [q[0], q[1], q[2], traj.htheta(k, i), traj.hf(k, i)] {
                out.push(',');
                num(&mut out, v);
            }
        }
        out.push('\n');
    }
    out
}

/// `theta,entry_time,residence,winding_spent`; a run that never entered
/// leaves `entry_time` empty.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("theta,entry_time,residence,winding_spent\n");
    for r in rows {
        num(&mut out, r.theta);
        out.push(',');
        if let Some(t) = r.entry_time {
            num(&mut out, t);
        }
        out.push(',');
        num(&mut out, r.residence);
        out.push(',');
        num(&mut out, r.winding_spent);
        out.push('\n');
    }
    out
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn parse_row(path: &Path, rec: &csv::StringRecord, width: usize) -> Result<Vec<f64>, CliError> {
    if rec.len() != width {
        return Err(CliError::Parse(format!(
            "{}: expected {width} columns, found {}",
            path.display(),
            rec.len()
        )));
    }
    rec.iter()
        .map(|f| {
            f.parse::<f64>()
                .map_err(|e| CliError::Parse(format!("{}: {f:?}: {e}", path.display())))
        })
        .collect()
}

/// Noise table with a `t,eta` header; times must increase strictly.
pub fn read_noise_table(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let mut rows = Vec::new();
    for rec in csv_reader(path)?.records() {
        let rec = rec.map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        let v = parse_row(path, &rec, 2)?;
        rows.push((v[0], v[1]));
    }
    if rows.is_empty() {
        return Err(CliError::Parse(format!(
            "{}: no noise samples",
            path.display()
        )));
    }
    if rows
        .windows(2)
        .any(|w| w[1].0.partial_cmp(&w[0].0) != Some(Ordering::Greater))
    {
        return Err(CliError::Parse(format!(
            "{}: times must increase strictly",
            path.display()
        )));
    }
    Ok(rows)
}

/// Samples for class `class` from a `class,xi,s,shat,x,y,dshat,dx,dy` file.
pub fn read_dataset(path: &Path, class: usize) -> Result<Dataset, CliError> {
    let mut data = Dataset::default();
    for rec in csv_reader(path)?.records() {
        let rec = rec.map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        let v = parse_row(path, &rec, 1 + INPUT_DIM + STATE_DIM)?;
        if v[0] as usize != class {
            continue;
        }
        data.inputs.push(core::array::from_fn(|k| v[1 + k]));
        data.targets
            .push(core::array::from_fn(|k| v[1 + INPUT_DIM + k]));
    }
    Ok(data)
}
