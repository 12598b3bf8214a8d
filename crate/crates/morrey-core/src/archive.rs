//! Versioned textual field archives with bit-exact round trips.
//!
//! Layout (version 1): a fixed magic line, `key = value` header lines for
//! n, ell, k, p, iteration, and energy, a `values = <count>` line, then one
//! value per line printed with 17 significant decimal digits, which is
//! enough to reproduce every finite f64 exactly. Row-major node order.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::field::{make_grid, FieldError, GridError, ScalarField};

const MAGIC_V1: &str = "morrey field archive v1";

#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported archive version line {0:?}")]
    Version(String),
    #[error("malformed archive at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("header declares {expected} values but payload has {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("archived grid is invalid: {0}")]
    BadGrid(#[from] GridError),
    #[error("field cannot be archived: {0}")]
    BadField(#[from] FieldError),
}

/// Run metadata stored alongside the payload.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArchiveHeader {
    pub p: f64,
    pub iteration: u64,
    pub energy: f64,
}

/// A parsed archive: header plus the reconstructed field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldArchive {
    pub header: ArchiveHeader,
    pub field: ScalarField,
}

/// Serializes a field and its run metadata to `destination`.
pub fn save_field(
    field: &ScalarField,
    header: &ArchiveHeader,
    destination: &Path,
) -> Result<(), ArchiveError> {
    field.check_finite()?;
    let grid = field.grid();
    let mut out = String::new();
    out.push_str(MAGIC_V1);
    out.push('\n');
    let _ = writeln!(out, "n = {}", grid.dim());
    let _ = writeln!(out, "ell = {}", grid.ell());
    let _ = writeln!(out, "k = {}", grid.k());
    let _ = writeln!(out, "p = {:.16e}", header.p);
    let _ = writeln!(out, "iteration = {}", header.iteration);
    let _ = writeln!(out, "energy = {:.16e}", header.energy);
    let _ = writeln!(out, "values = {}", field.values().len());
    for v in field.values() {
        let _ = writeln!(out, "{v:.16e}");
    }
    fs::write(destination, out)?;
    Ok(())
}

/// Parses an archive written by [`save_field`]; the round trip reproduces
/// every value bit-exactly.
pub fn load_field(source: &Path) -> Result<FieldArchive, ArchiveError> {
    let text = fs::read_to_string(source)?;
    let mut lines = text.lines().enumerate();

    let (_, magic) = lines.next().ok_or_else(|| ArchiveError::Parse {
        line: 1,
        message: "empty archive".into(),
    })?;
    if magic != MAGIC_V1 {
        return Err(ArchiveError::Version(magic.into()));
    }

    let mut header_field = |key: &str| -> Result<(usize, String), ArchiveError> {
        let (idx, line) = lines.next().ok_or_else(|| ArchiveError::Parse {
            line: 0,
            message: format!("missing header line for {key}"),
        })?;
        let (got_key, value) = line.split_once(" = ").ok_or_else(|| ArchiveError::Parse {
            line: idx + 1,
            message: format!("expected `{key} = ...`"),
        })?;
        if got_key != key {
            return Err(ArchiveError::Parse {
                line: idx + 1,
                message: format!("expected key {key}, found {got_key}"),
            });
        }
        Ok((idx + 1, value.to_string()))
    };

    fn parse<T: std::str::FromStr>(line: usize, value: &str) -> Result<T, ArchiveError> {
        value.trim().parse().map_err(|_| ArchiveError::Parse {
            line,
            message: format!("unparseable value {value:?}"),
        })
    }

    let (l, v) = header_field("n")?;
    let n: usize = parse(l, &v)?;
    let (l, v) = header_field("ell")?;
    let ell: u32 = parse(l, &v)?;
    let (l, v) = header_field("k")?;
    let k: u32 = parse(l, &v)?;
    let (l, v) = header_field("p")?;
    let p: f64 = parse(l, &v)?;
    let (l, v) = header_field("iteration")?;
    let iteration: u64 = parse(l, &v)?;
    let (l, v) = header_field("energy")?;
    let energy: f64 = parse(l, &v)?;
    let (l, v) = header_field("values")?;
    let declared: usize = parse(l, &v)?;

    let grid = make_grid(n, ell, k)?;
    if declared != grid.value_count() {
        return Err(ArchiveError::ShapeMismatch {
            expected: grid.value_count(),
            got: declared,
        });
    }

    let mut values = Vec::with_capacity(declared);
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        values.push(parse::<f64>(idx + 1, line)?);
    }
    if values.len() != declared {
        return Err(ArchiveError::ShapeMismatch {
            expected: declared,
            got: values.len(),
        });
    }

    let field = ScalarField::from_values(grid, values).map_err(|_| ArchiveError::ShapeMismatch {
        expected: grid.value_count(),
        got: declared,
    })?;
    Ok(FieldArchive {
        header: ArchiveHeader {
            p,
            iteration,
            energy,
        },
        field,
    })
}
