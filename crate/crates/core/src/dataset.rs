//! Sample matrices and their on-disk formats.
//!
//! CSV: one row per sample, optional header. A column headed `inlier` (0/1)
//! carries the ground-truth mask. JSON-lines: one sample per line, either a
//! bare array or an object `{"x": [...], "inlier": 0|1|true|false}`.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    m: usize,
    n: usize,
    /// Row-major, `m * n`.
    values: Vec<f64>,
    inlier_mask: Option<Vec<bool>>,
}

impl Dataset {
    pub fn new(m: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        if m == 0 || n == 0 {
            return param_err(format!("dataset must be non-empty, got {m}x{n}"));
        }
        if values.len() != m * n {
            return param_err(format!(
                "expected {} entries for {m}x{n}, got {}",
                m * n,
                values.len()
            ));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return param_err(format!(
                "non-finite entry at row {} column {}",
                pos / n,
                pos % n
            ));
        }
        Ok(Self {
            m,
            n,
            values,
            inlier_mask: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return param_err(format!(
                "row {bad} has {} entries, expected {n}",
                rows[bad].len()
            ));
        }
        Self::new(rows.len(), n, rows.concat())
    }

    pub fn with_inlier_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.m {
            return param_err(format!(
                "inlier mask has length {}, expected {}",
                mask.len(),
                self.m
            ));
        }
        self.inlier_mask = Some(mask);
        Ok(self)
    }

    /// Sample count.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Ambient dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n)
    }

    pub fn inlier_mask(&self) -> Option<&[bool]> {
        self.inlier_mask.as_deref()
    }

    pub fn inlier_indices(&self) -> Option<Vec<usize>> {
        self.inlier_mask.as_ref().map(|mask| {
            mask.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(i, _)| i)
                .collect()
        })
    }

    pub fn mean(&self) -> Vec<f64> {
        self.mean_of((0..self.m).collect::<Vec<_>>().as_slice())
    }

    /// Mean of the given rows. Panics on an empty index set.
    pub fn mean_of(&self, indices: &[usize]) -> Vec<f64> {
        assert!(!indices.is_empty(), "mean of an empty set of rows");
        let mut acc = vec![0.0; self.n];
        for &i in indices {
            for (a, x) in acc.iter_mut().zip(self.row(i)) {
                *a += x;
            }
        }
        let inv = 1.0 / indices.len() as f64;
        acc.iter_mut().for_each(|a| *a *= inv);
        acc
    }

    /// Rows restricted to a subset, keeping the mask aligned.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.n);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        let out = Self::new(indices.len(), self.n, values)?;
        match &self.inlier_mask {
            Some(mask) => out.with_inlier_mask(indices.iter().map(|&i| mask[i]).collect()),
            None => Ok(out),
        }
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader(reader: impl std::io::Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(false)
            .from_reader(reader);
        let mut records = rdr.records();
        let mut inlier_col = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut mask = Vec::new();

        let Some(first) = records.next() else {
            return param_err("empty CSV");
        };
        let first = first?;
        let is_header = first.iter().any(|f| f.parse::<f64>().is_err());
        if is_header {
            inlier_col = first.iter().position(|f| f.eq_ignore_ascii_case("inlier"));
        }
        let mut push = |rec: &csv::StringRecord, line: usize| -> Result<()> {
            let mut row = Vec::with_capacity(rec.len());
            for (col, field) in rec.iter().enumerate() {
                if Some(col) == inlier_col {
                    mask.push(parse_flag(field).ok_or_else(|| {
                        Error::Format(format!(
                            "line {line}: inlier flag must be 0/1, got {field:?}"
                        ))
                    })?);
                } else {
                    row.push(field.parse::<f64>().map_err(|_| {
                        Error::Format(format!("line {line}: bad number {field:?}"))
                    })?);
                }
            }
            rows.push(row);
            Ok(())
        };
        if !is_header {
            push(&first, 1)?;
        }
        for (line, rec) in records.enumerate() {
            push(&rec?, line + 2)?;
        }
        let data = Self::from_rows(&rows)?;
        if inlier_col.is_some() {
            data.with_inlier_mask(mask)
        } else {
            Ok(data)
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.to_csv_writer(file)
    }

    pub fn to_csv_writer(&self, writer: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..self.n).map(|j| format!("x{j}")).collect();
        if self.inlier_mask.is_some() {
            header.push("inlier".into());
        }
        wtr.write_record(&header)?;
        for i in 0..self.m {
            let mut rec: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            if let Some(mask) = &self.inlier_mask {
                rec.push(if mask[i] { "1" } else { "0" }.into());
            }
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::from_jsonl_reader(file)
    }

    pub fn from_jsonl_reader(reader: impl BufRead) -> Result<Self> {
        let mut rows = Vec::new();
        let mut mask = Vec::new();
        for (line_no, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<JsonRow>(&line)? {
                JsonRow::Bare(x) => rows.push(x),
                JsonRow::Tagged { x, inlier } => {
                    rows.push(x);
                    match inlier {
                        Some(flag) => mask.push(flag.as_bool()),
                        None => {
                            return Err(Error::Format(format!(
                                "line {}: object rows need an \"inlier\" field",
                                line_no + 1
                            )))
                        }
                    }
                }
            }
        }
        let data = Self::from_rows(&rows)?;
        match mask.len() {
            0 => Ok(data),
            len if len == rows.len() => data.with_inlier_mask(mask),
            _ => Err(Error::Format(
                "mixed bare and tagged JSON-lines rows".into(),
            )),
        }
    }

    pub fn to_jsonl_writer(&self, mut writer: impl Write) -> Result<()> {
        for i in 0..self.m {
            let line = match &self.inlier_mask {
                Some(mask) => serde_json::to_string(&JsonRow::Tagged {
                    x: self.row(i).to_vec(),
                    inlier: Some(Flag::Int(mask[i] as u8)),
                })?,
                None => serde_json::to_string(self.row(i))?,
            };
            writeln!(writer, "{line}")?;
        }
        Ok(())
    }

    /// Reads CSV or JSON-lines, chosen by extension (`.jsonl`/`.json` vs anything else).
    pub fn read_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") | Some("ndjson") => Self::read_jsonl(path),
            _ => Self::read_csv(path),
        }
    }
}

fn parse_flag(field: &str) -> Option<bool> {
    match field {
        "1" | "true" | "True" => Some(true),
        "0" | "false" | "False" => Some(false),
        _ => None,
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum JsonRow {
    Bare(Vec<f64>),
    Tagged {
        x: Vec<f64>,
        #[serde(default)]
        inlier: Option<Flag>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Flag {
    Bool(bool),
    Int(u8),
}

impl Flag {
    fn as_bool(&self) -> bool {
        match *self {
            Flag::Bool(b) => b,
            Flag::Int(i) => i != 0,
        }
    }
}
