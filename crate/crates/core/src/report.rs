//! Report emission and persisted runs.
//!
//! Every JSON document is `{"header": .., "body": ..}`. Only the header's
//! `timestamp` varies between identical runs. Files are written to a
//! temporary sibling and renamed into place.
//!
//! A persisted solve is `run.json` plus `slices.bin`:
//!
//! ```text
//! b"MNSSLICE"  u32 version  u32 d  u32 N  f64 L  u32 M  M x f64 times
//! then for each slice, each component: N^d x f64 samples
//! ```
//!
//! All numbers are little-endian.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::fit::DecayReport;
use crate::grid::GridSpec;
use crate::solver::{BilinearEstimate, PicardDiagnostics};
use crate::weighted::{SpaceTimeField, WeightParams};

const MAGIC: &[u8; 8] = b"MNSSLICE";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub config_hash: String,
    pub seed: u64,
    pub grid: GridSpec,
    pub timestamp: u64,
}

impl Header {
    pub fn now(config_hash: impl Into<String>, seed: u64, grid: GridSpec) -> Self {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self { config_hash: config_hash.into(), seed, grid, timestamp }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub header: Header,
    pub body: T,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.display().to_string(), source }
}

/// Writes `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn to_json<T: Serialize>(header: &Header, body: &T) -> Result<String> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        header: &'a Header,
        body: &'a T,
    }
    Ok(serde_json::to_string_pretty(&Doc { header, body })?)
}

pub fn write_json<T: Serialize>(path: &Path, header: &Header, body: &T) -> Result<()> {
    write_atomic(path, to_json(header, body)?.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Document<T>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(serde_json::from_str(&text)?)
}

/// The body of a JSON document with the header dropped, for comparing runs.
pub fn body_of(json: &str) -> Result<String> {
    let v: serde_json::Value = serde_json::from_str(json)?;
    let body = v.get("body").ok_or_else(|| Error::Format("document has no body".into()))?;
    Ok(serde_json::to_string(body)?)
}

/// `series,t_or_r,value` rows for one decay series.
pub fn csv_series(name: &str, samples: &[(f64, f64)]) -> String {
    let mut out = String::from("series,t_or_r,value\n");
    for (s, v) in samples {
        out.push_str(&format!("{name},{s:e},{v:e}\n"));
    }
    out
}

/// File-system safe stem of a report name.
pub fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect()
}

/// One CSV per report under `dir`; returns the paths written.
pub fn write_csvs<'a>(dir: &Path, reports: impl IntoIterator<Item = &'a DecayReport>) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for r in reports {
        let p = dir.join(format!("{}.csv", file_stem(&r.name)));
        write_atomic(&p, csv_series(&r.name, &r.samples).as_bytes())?;
        paths.push(p);
    }
    Ok(paths)
}

/// Everything about a solve except the field itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub params: WeightParams,
    pub times: Vec<f64>,
    pub delta: f64,
    /// Picard stopping tolerance.
    pub tol: f64,
    pub estimate: Option<BilinearEstimate>,
    pub diagnostics: PicardDiagnostics,
}

pub fn encode_slices(u: &SpaceTimeField) -> Vec<u8> {
    let g = u.grid();
    let mut out = Vec::with_capacity(32 + 8 * u.len() * (1 + g.dim() * g.len()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(g.points_per_axis() as u32).to_le_bytes());
    out.extend_from_slice(&g.half_width().to_le_bytes());
    out.extend_from_slice(&(u.len() as u32).to_le_bytes());
    for t in u.times() {
        out.extend_from_slice(&t.to_le_bytes());
    }
    for s in u.slices() {
        for c in s.components() {
            for v in c.samples() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Format("truncated slice file".into()))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn decode_slices(bytes: &[u8]) -> Result<SpaceTimeField> {
    let mut r = Reader { bytes, at: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let d = r.u32()? as usize;
    let n = r.u32()? as usize;
    let l = r.f64()?;
    let grid = GridSpec::new(d, l, n)?;
    let m = r.u32()? as usize;
    let times = (0..m).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let mut slices = Vec::with_capacity(m);
    for _ in 0..m {
        let mut comps = Vec::with_capacity(d);
        for _ in 0..d {
            let raw = r.take(8 * grid.len())?;
            let data = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
            comps.push(ScalarField::new(grid, data)?);
        }
        slices.push(VectorField::new(comps)?);
    }
    if r.at != bytes.len() {
        return Err(Error::Format("trailing bytes after the last slice".into()));
    }
    SpaceTimeField::new(times, slices)
}

pub const RUN_FILE: &str = "run.json";
pub const SLICE_FILE: &str = "slices.bin";

pub fn save_run(dir: &Path, header: &Header, record: &RunRecord, u: &SpaceTimeField) -> Result<()> {
    write_atomic(&dir.join(SLICE_FILE), &encode_slices(u))?;
    write_json(&dir.join(RUN_FILE), header, record)
}

pub fn load_run(dir: &Path) -> Result<(Document<RunRecord>, SpaceTimeField)> {
    let doc: Document<RunRecord> = read_json(&dir.join(RUN_FILE))?;
    let path = dir.join(SLICE_FILE);
    let bytes = fs::read(&path).map_err(io_err(&path))?;
    let u = decode_slices(&bytes)?;
    if *u.grid() != doc.header.grid || u.times() != doc.body.times.as_slice() {
        return Err(Error::Format("slice file does not match run.json".into()));
    }
    Ok((doc, u))
}
