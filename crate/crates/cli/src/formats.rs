//! File formats. Indices in files are 1-based; weights are unsquared.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use spectral_tetris::{FusionFrame, FusionProblem, NormSequence, SparseFrame, Spectrum, SubspaceSpec};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameProblemFile {
    pub norms_sq: Vec<f64>,
    pub spectrum: Vec<f64>,
}

impl FrameProblemFile {
    pub fn parse(text: &str) -> Result<(NormSequence, Spectrum), CliError> {
        let file: FrameProblemFile = from_json(text, "frame problem")?;
        Ok((
            NormSequence::new(file.norms_sq).map_err(CliError::from)?,
            Spectrum::new(file.spectrum).map_err(CliError::from)?,
        ))
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceEntry {
    pub weight: f64,
    pub dim: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionProblemFile {
    pub subspaces: Vec<SubspaceEntry>,
    pub spectrum: Vec<f64>,
    /// 1-based subspace label per slot.
    #[serde(default)]
    pub ordering: Option<Vec<usize>>,
}

impl FusionProblemFile {
    pub fn parse(text: &str) -> Result<FusionProblem, CliError> {
        let file: FusionProblemFile = from_json(text, "fusion problem")?;
        let ordering = file
            .ordering
            .map(|o| {
                o.into_iter()
                    .map(|l| {
                        l.checked_sub(1)
                            .ok_or_else(|| CliError::input("ordering labels are 1-based".to_string()))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?;
        let subspaces = file
            .subspaces
            .iter()
            .map(|s| SubspaceSpec {
                weight: s.weight,
                dim: s.dim,
            })
            .collect();
        let spectrum = Spectrum::new(file.spectrum).map_err(CliError::from)?;
        FusionProblem::new(subspaces, spectrum, ordering).map_err(CliError::from)
    }
}

/// What `verify` checks against. Frame and fusion problem files are
/// accepted as they are.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct ExpectationsFile {
    pub spectrum: Option<Vec<f64>>,
    pub norms_sq: Option<Vec<f64>>,
    pub subspaces: Option<Vec<SubspaceEntry>>,
    pub weights: Option<Vec<f64>>,
    pub dims: Option<Vec<usize>>,
    /// 1-based column sets.
    pub parts: Option<Vec<Vec<usize>>>,
}

impl ExpectationsFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        from_json(text, "expectations")
    }
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::input(format!("malformed {what} file: {e}")))
}

/// `%.17g`: 17 significant digits, trailing zeros dropped.
pub fn format_g17(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (16 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A matrix file: the frame plus `key: value` metadata.
#[derive(Debug, Clone)]
pub struct MatrixFile {
    pub frame: SparseFrame,
    pub meta: BTreeMap<String, Value>,
}

pub fn write_dense_csv(frame: &SparseFrame, meta: &BTreeMap<String, Value>) -> String {
    let mut out = String::new();
    for (k, v) in meta {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    for row in frame.to_dense() {
        let cells: Vec<String> = row.iter().map(|&v| format_g17(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn read_dense_csv(text: &str) -> Result<MatrixFile, CliError> {
    let mut meta = BTreeMap::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once(':') {
                if let Ok(value) = serde_json::from_str(v.trim()) {
                    meta.insert(k.trim().to_string(), value);
                }
            }
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|e| CliError::input(format!("line {}: bad number {cell:?}: {e}", i + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(CliError::input(format!(
                    "line {}: {} values, expected {}",
                    i + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::input("matrix file has no rows".into()));
    }
    let frame = SparseFrame::from_dense(&rows).map_err(CliError::from)?;
    Ok(MatrixFile { frame, meta })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SparseMatrixJson {
    pub rows: usize,
    pub cols: usize,
    /// `[row, column, value]`, 1-based, sorted by column then row.
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrixJson {
    pub fn from_frame(frame: &SparseFrame) -> Self {
        SparseMatrixJson {
            rows: frame.rows(),
            cols: frame.cols(),
            entries: frame.triplets().into_iter().map(|(r, c, v)| (r + 1, c + 1, v)).collect(),
        }
    }

    pub fn to_frame(&self) -> Result<SparseFrame, CliError> {
        let triplets = self
            .entries
            .iter()
            .map(|&(r, c, v)| match (r.checked_sub(1), c.checked_sub(1)) {
                (Some(r), Some(c)) => Ok((r, c, v)),
                _ => Err(CliError::input("matrix entries are 1-based".into())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        SparseFrame::from_triplets(self.rows, self.cols, &triplets).map_err(CliError::from)
    }
}

pub fn write_sparse_json(frame: &SparseFrame, meta: &BTreeMap<String, Value>) -> String {
    let mut obj = serde_json::to_value(SparseMatrixJson::from_frame(frame)).expect("serializable");
    let map = obj.as_object_mut().expect("object");
    for (k, v) in meta {
        map.insert(k.clone(), v.clone());
    }
    pretty(&obj)
}

/// A frame whose columns are grouped into weighted subspaces, plus
/// whatever else the producing command recorded.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub fusion: FusionFrame,
    pub meta: BTreeMap<String, Value>,
}

pub fn write_bundle(fusion: &FusionFrame, meta: &BTreeMap<String, Value>) -> String {
    let mut obj = serde_json::to_value(SparseMatrixJson::from_frame(fusion.frame())).expect("serializable");
    let map = obj.as_object_mut().expect("object");
    let parts: Vec<Vec<usize>> = fusion.parts().iter().map(|p| p.iter().map(|c| c + 1).collect()).collect();
    map.insert("parts".into(), serde_json::to_value(parts).expect("serializable"));
    map.insert("weights".into(), serde_json::to_value(fusion.weights()).expect("serializable"));
    for (k, v) in meta {
        map.insert(k.clone(), v.clone());
    }
    pretty(&obj)
}

pub fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn one_based_parts(parts: &[Vec<usize>]) -> Result<Vec<Vec<usize>>, CliError> {
    parts
        .iter()
        .map(|p| {
            p.iter()
                .map(|&c| c.checked_sub(1).ok_or_else(|| CliError::input("part columns are 1-based".into())))
                .collect()
        })
        .collect()
}

/// Either a plain matrix or a bundle.
#[derive(Debug, Clone)]
pub enum Loaded {
    Matrix(MatrixFile),
    Bundle(Bundle),
}

pub fn load_matrix_or_bundle(text: &str) -> Result<Loaded, CliError> {
    if !text.trim_start().starts_with('{') {
        return read_dense_csv(text).map(Loaded::Matrix);
    }
    let value: Value = from_json(text, "matrix")?;
    let Value::Object(mut map) = value else {
        return Err(CliError::input("matrix file must be a JSON object".into()));
    };
    let mut take = |key: &str| map.remove(key);
    let matrix = SparseMatrixJson {
        rows: field(take("rows"), "rows")?,
        cols: field(take("cols"), "cols")?,
        entries: field(take("entries"), "entries")?,
    };
    let parts = take("parts");
    let weights = take("weights");
    let frame = matrix.to_frame()?;
    let meta: BTreeMap<String, Value> = map.into_iter().collect();
    match (parts, weights) {
        (None, None) => Ok(Loaded::Matrix(MatrixFile { frame, meta })),
        (Some(parts), Some(weights)) => {
            let parts: Vec<Vec<usize>> = field(Some(parts), "parts")?;
            let weights: Vec<f64> = field(Some(weights), "weights")?;
            let fusion = FusionFrame::new(frame, one_based_parts(&parts)?, weights).map_err(CliError::from)?;
            Ok(Loaded::Bundle(Bundle { fusion, meta }))
        }
        _ => Err(CliError::input("a bundle needs both \"parts\" and \"weights\"".into())),
    }
}

fn field<T: for<'de> Deserialize<'de>>(value: Option<Value>, name: &str) -> Result<T, CliError> {
    let value = value.ok_or_else(|| CliError::input(format!("missing field \"{name}\"")))?;
    serde_json::from_value(value).map_err(|e| CliError::input(format!("field \"{name}\": {e}")))
}
