//! File formats: CSV tables, JSON sidecars and flat binary field files with a
//! JSON shape descriptor.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CONVERGENCE_HEADER: [&str; 5] = ["eps", "sup_H", "sup_L1_rho", "sup_L1_n", "f_to_M_l1"];

/// One row of the convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub sup_h: f64,
    pub sup_l1_rho: f64,
    pub sup_l1_n: f64,
    pub f_to_m_l1: f64,
}

impl ConvergenceRow {
    fn values(&self) -> [f64; 5] {
        [self.eps, self.sup_h, self.sup_l1_rho, self.sup_l1_n, self.f_to_m_l1]
    }
}

/// Seventeen significant digits, always with a `.` decimal point.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_convergence_csv(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&CONVERGENCE_HEADER.join(","));
    out.push('\n');
    for r in rows {
        let line: Vec<String> = r.values().iter().map(|&x| format_f64(x)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

pub fn read_convergence_csv(path: &Path) -> Result<Vec<ConvergenceRow>> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header != CONVERGENCE_HEADER.join(",") {
        return Err(Error::Config(format!("unexpected CSV header {header:?}")));
    }
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|s| s.parse::<f64>().map_err(|e| Error::Config(format!("bad number {s:?}: {e}"))))
            .collect::<Result<_>>()?;
        if v.len() != 5 {
            return Err(Error::Config(format!("expected 5 columns, got {}", v.len())));
        }
        rows.push(ConvergenceRow {
            eps: v[0],
            sup_h: v[1],
            sup_l1_rho: v[2],
            sup_l1_n: v[3],
            f_to_m_l1: v[4],
        });
    }
    Ok(rows)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(fs::File::open(path)?))?)
}

/// Shape descriptor stored next to a binary field file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDescriptor {
    pub dtype: String,
    pub byte_order: String,
    /// Row-major shape; the first axis enumerates `fields`.
    pub shape: Vec<usize>,
    pub fields: Vec<String>,
    pub t: f64,
}

/// Named fields of equal length, stored as one flat array.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFile {
    pub fields: Vec<(String, Vec<f64>)>,
    /// Shape of each field.
    pub field_shape: Vec<usize>,
    pub t: f64,
}

impl StateFile {
    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.fields
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }
}

fn descriptor_path(bin: &Path) -> PathBuf {
    bin.with_extension("json")
}

/// Write `<stem>.bin` (little-endian f64) and `<stem>.json`.
pub fn write_state(bin: &Path, state: &StateFile) -> Result<()> {
    let len: usize = state.field_shape.iter().product();
    let mut bytes = Vec::with_capacity(8 * len * state.fields.len());
    for (name, v) in &state.fields {
        if v.len() != len {
            return Err(Error::Argument(format!(
                "field {name} has {} entries, shape needs {len}",
                v.len()
            )));
        }
        for x in v {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
    }
    let mut shape = vec![state.fields.len()];
    shape.extend(&state.field_shape);
    let desc = StateDescriptor {
        dtype: "f64".into(),
        byte_order: "little".into(),
        shape,
        fields: state.fields.iter().map(|(n, _)| n.clone()).collect(),
        t: state.t,
    };
    write_atomic(bin, &bytes)?;
    write_json(&descriptor_path(bin), &desc)
}

pub fn read_state(bin: &Path) -> Result<StateFile> {
    let desc: StateDescriptor = read_json(&descriptor_path(bin))?;
    if desc.dtype != "f64" || desc.byte_order != "little" {
        return Err(Error::Config(format!(
            "unsupported encoding {} / {}",
            desc.dtype, desc.byte_order
        )));
    }
    if desc.shape.first() != Some(&desc.fields.len()) {
        return Err(Error::Config("shape does not match field list".into()));
    }
    let field_shape = desc.shape[1..].to_vec();
    let len: usize = field_shape.iter().product();
    let bytes = fs::read(bin)?;
    if bytes.len() != 8 * len * desc.fields.len() {
        return Err(Error::Config(format!(
            "{} holds {} bytes, descriptor needs {}",
            bin.display(),
            bytes.len(),
            8 * len * desc.fields.len()
        )));
    }
    let mut values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    let fields = desc
        .fields
        .into_iter()
        .map(|name| (name, values.by_ref().take(len).collect()))
        .collect();
    Ok(StateFile {
        fields,
        field_shape,
        t: desc.t,
    })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
