//! Reading angle datasets from CSV files and writing density grids back out.
//!
//! Measured directions arrive in many conventions — radians or degrees,
//! mathematical (counterclockwise from east) or compass (clockwise from
//! north). Loading normalizes everything to mathematical radians in
//! [0, 2π), which is what the rest of the crate speaks.

use std::f64::consts::PI;
use std::io;
use std::path::{Path, PathBuf};

use crate::circular::{circle_grid, wrap_angle};
use crate::error::Error;
use crate::estimator::{Correction, DensityEstimate};
use crate::Result;

/// Angular unit of a data column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleUnit {
    /// Radians.
    Radians,
    /// Degrees; converted on load.
    Degrees,
}

/// Orientation convention of a data column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Mathematical convention: measured counterclockwise from east.
    Counterclockwise,
    /// Compass convention: measured clockwise from north, as wind and
    /// animal-movement records usually are; x maps to π/2 − x.
    ClockwiseFromNorth,
}

/// Which CSV column holds the angles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSpec {
    /// Match a header name exactly.
    Name(String),
    /// 0-based column position.
    Index(usize),
}

/// A loaded sample of angles, normalized to mathematical radians in [0, 2π).
#[derive(Debug, Clone, PartialEq)]
pub struct AngleDataset {
    /// The angles, in file order.
    pub angles: Vec<f64>,
    /// File the sample came from.
    pub source: PathBuf,
    /// Unit the file used before normalization.
    pub unit: AngleUnit,
}

impl AngleDataset {
    /// Number of observations.
    pub fn n(&self) -> usize {
        self.angles.len()
    }
}

/// Loads one angle column from a headed CSV file (comma-separated, UTF-8).
///
/// Every value is converted to radians, reoriented to the mathematical
/// convention, and reduced into [0, 2π). Row numbers in errors are 1-based
/// and count the header as row 1, so the first data row is row 2.
///
/// # Errors
///
/// [`Error::Io`] when the file cannot be read, [`Error::MissingColumn`] when
/// the named or indexed column is not in the header, [`Error::BadRow`] for a
/// row that cannot be parsed as a finite number, and [`Error::EmptyFile`]
/// when there are no data rows.
pub fn load_csv(
    path: &Path,
    column: &ColumnSpec,
    unit: AngleUnit,
    direction: Direction,
) -> Result<AngleDataset> {
    let display = path.display().to_string();
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Io {
        path: display.clone(),
        source: flatten_csv(e),
    })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Io {
            path: display.clone(),
            source: flatten_csv(e),
        })?
        .clone();
    let col = match column {
        ColumnSpec::Name(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.clone()))?,
        ColumnSpec::Index(idx) => {
            if *idx >= headers.len() {
                return Err(Error::MissingColumn(format!("index {idx}")));
            }
            *idx
        }
    };

    let mut angles = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let bad_row = |reason: String| Error::BadRow {
            path: display.clone(),
            row,
            reason,
        };
        let record = record.map_err(|e| bad_row(e.to_string()))?;
        let field = record
            .get(col)
            .ok_or_else(|| bad_row(format!("no field in column {col}")))?;
        let value: f64 = field
            .trim()
            .parse()
            .map_err(|_| bad_row(format!("cannot parse '{field}' as a number")))?;
        if !value.is_finite() {
            return Err(bad_row(format!("angle '{field}' is not finite")));
        }
        let radians = match unit {
            AngleUnit::Radians => value,
            AngleUnit::Degrees => value.to_radians(),
        };
        let oriented = match direction {
            Direction::Counterclockwise => radians,
            Direction::ClockwiseFromNorth => PI / 2.0 - radians,
        };
        angles.push(wrap_angle(oriented).expect("finite angles wrap"));
    }
    if angles.is_empty() {
        return Err(Error::EmptyFile(display));
    }
    Ok(AngleDataset {
        angles,
        source: path.to_owned(),
        unit,
    })
}

/// Writes a fitted density on the uniform grid `θ_j = 2πj/G` as a two-column
/// CSV file with header `theta,density`, applying the given non-negativity
/// correction. Numbers are written in shortest round-trip form, so reading
/// the file back reproduces them exactly.
///
/// # Errors
///
/// Propagates correction failures (a grid below 8 points) and file-system
/// failures, which carry the offending path.
pub fn export_density_grid(
    estimate: &DensityEstimate,
    grid_size: usize,
    correction: Correction,
    path: &Path,
) -> Result<()> {
    let io_err = |source: io::Error| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let values = estimate.correct_nonneg(correction, grid_size)?;
    let thetas = circle_grid(grid_size);
    let mut writer = csv::Writer::from_path(path).map_err(|e| io_err(flatten_csv(e)))?;
    writer
        .write_record(["theta", "density"])
        .map_err(|e| io_err(flatten_csv(e)))?;
    for (theta, value) in thetas.iter().zip(&values) {
        writer
            .write_record([theta.to_string(), value.to_string()])
            .map_err(|e| io_err(flatten_csv(e)))?;
    }
    writer.flush().map_err(io_err)
}

/// Unwraps a CSV error into its underlying I/O error, or synthesizes one
/// from its message.
pub(crate) fn flatten_csv(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => io::Error::other(format!("{other:?}")),
    }
}
