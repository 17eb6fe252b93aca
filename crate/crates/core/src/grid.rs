//! Row-major rasters with a validity mask, plus their file formats.
//!
//! CSV: headerless, one line per grid row from north to south, values
//! formatted with the shortest representation that round-trips, masked
//! pixels written as `nan`.
//!
//! PGM: binary P5, maxval 255, masked pixels rendered 0.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Value stored at masked pixels. Never read by statistics.
pub const MASKED: f64 = f64::NAN;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridMap {
    pub cols: usize,
    pub rows: usize,
    pub pixel_size_m: f64,
    pub values: Vec<f64>,
    /// `true` marks a valid pixel.
    pub mask: Vec<bool>,
    pub unit: String,
}

impl GridMap {
    /// Builds a map by evaluating `f` at every valid pixel index.
    pub fn from_fn(
        cols: usize,
        rows: usize,
        pixel_size_m: f64,
        mask: Vec<bool>,
        unit: impl Into<String>,
        f: impl Fn(usize) -> f64,
    ) -> Self {
        assert_eq!(mask.len(), cols * rows);
        let values = mask
            .iter()
            .enumerate()
            .map(|(i, &valid)| if valid { f(i) } else { MASKED })
            .collect();
        Self {
            cols,
            rows,
            pixel_size_m,
            values,
            mask,
            unit: unit.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let i = self.index(row, col);
        self.mask[i].then(|| self.values[i])
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Values at valid pixels, in row-major order.
    pub fn valid_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .zip(&self.mask)
            .filter_map(|(&v, &m)| m.then_some(v))
    }

    /// Arithmetic mean over valid pixels, `None` if there are none.
    pub fn mean(&self) -> Option<f64> {
        let n = self.valid_count();
        (n > 0).then(|| self.valid_values().sum::<f64>() / n as f64)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(self.len() * 8);
        for row in 0..self.rows {
            for col in 0..self.cols {
                if col > 0 {
                    out.push(',');
                }
                let i = self.index(row, col);
                if self.mask[i] && !self.values[i].is_nan() {
                    write!(out, "{}", self.values[i]).unwrap();
                } else {
                    out.push_str("nan");
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    /// Renders to a binary PGM. With no `range`, [min, max] of the finite
    /// valid values is used. A degenerate range renders valid pixels at 128.
    pub fn to_pgm(&self, range: Option<(f64, f64)>) -> Vec<u8> {
        let (lo, hi) = range.unwrap_or_else(|| {
            self.valid_values()
                .filter(|v| v.is_finite())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                })
        });
        let mut out = format!("P5\n{} {}\n255\n", self.cols, self.rows).into_bytes();
        out.reserve(self.len());
        for (&v, &valid) in self.values.iter().zip(&self.mask) {
            let level = if !valid || v.is_nan() {
                0
            } else if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
                128
            } else {
                ((v - lo) / (hi - lo) * 255.0).round().clamp(0.0, 255.0) as u8
            };
            out.push(level);
        }
        out
    }

    pub fn write_pgm(&self, path: impl AsRef<Path>, range: Option<(f64, f64)>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_pgm(range)).map_err(|e| Error::io(path, e))
    }
}

/// Raw CSV cells: `None` for `nan` tokens.
pub struct CsvGrid {
    pub cols: usize,
    pub rows: usize,
    pub cells: Vec<Option<f64>>,
}

/// Parses a headerless numeric CSV grid. Every row must have the same width.
pub fn read_csv_grid(reader: impl Read) -> Result<CsvGrid> {
    let mut cells = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (row, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::io("<csv>", e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut width = 0;
        for (col, raw) in line.split(',').enumerate() {
            let token = raw.trim();
            let value: f64 = token.parse().map_err(|_| Error::NonNumericCell {
                row,
                col,
                value: token.to_string(),
            })?;
            cells.push((!value.is_nan()).then_some(value));
            width += 1;
        }
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return Err(Error::InvalidArgument(format!(
                    "ragged CSV: row {row} has {width} cells, expected {c}"
                )))
            }
            _ => {}
        }
        rows += 1;
    }
    Ok(CsvGrid {
        cols: cols.unwrap_or(0),
        rows,
        cells,
    })
}

/// Reads a CSV grid back into a map with the given pixel size. Pixels written
/// as `nan` become masked.
pub fn read_csv_map(reader: impl Read, pixel_size_m: f64, unit: &str) -> Result<GridMap> {
    let grid = read_csv_grid(reader)?;
    let mask: Vec<bool> = grid.cells.iter().map(Option::is_some).collect();
    let values = grid.cells.iter().map(|c| c.unwrap_or(MASKED)).collect();
    Ok(GridMap {
        cols: grid.cols,
        rows: grid.rows,
        pixel_size_m,
        values,
        mask,
        unit: unit.to_string(),
    })
}
