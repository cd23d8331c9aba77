//! Delimited-text matrix files.
//!
//! Feature file: a header `id,<feature names...>` followed by one row per
//! stimulus. Similarity file: a header whose first cell is ignored and whose
//! remaining cells are item identifiers, followed by one row per item. Cells
//! in the lower triangle may be blank, in which case they are mirrored from
//! the upper triangle; the diagonal may be blank as a whole. Weight file: the
//! feature-file layout with a single row `weight`. Label file: header
//! `id,class_name`.
//!
//! Lines starting with `#` are comments. Values are written with 17
//! significant digits, which round-trips every finite `f64` exactly.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};

use super::{FeatureMatrix, SimilarityMatrix, WeightVector};
use crate::error::{Error, Result};

/// Comment marker for metadata lines at the top of written files.
pub const FILE_COMMENT: &str = "# ";

const WEIGHT_ROW: &str = "weight";

struct Table {
    path: PathBuf,
    header: Vec<String>,
    header_line: u64,
    rows: Vec<(u64, Vec<String>)>,
}

impl Table {
    fn read(path: &Path) -> Result<Table> {
        let bytes = fs::read(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(bytes.as_slice());
        let mut records = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                parse_error(path, line, 0, e.to_string())
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let cells: Vec<String> = record.iter().map(str::to_owned).collect();
            if cells.len() == 1 && cells[0].is_empty() {
                continue;
            }
            records.push((line, cells));
        }
        let mut records = records.into_iter();
        let (header_line, header) = records
            .next()
            .ok_or_else(|| parse_error(path, 1, 0, "file is empty"))?;
        Ok(Table {
            path: path.to_path_buf(),
            header,
            header_line,
            rows: records.collect(),
        })
    }

    fn err(&self, line: u64, column: usize, message: impl Into<String>) -> Error {
        parse_error(&self.path, line, column, message)
    }

    fn number(&self, line: u64, column: usize, cell: &str) -> Result<f64> {
        let v: f64 = cell
            .parse()
            .map_err(|_| self.err(line, column + 1, format!("non-numeric value `{cell}`")))?;
        if !v.is_finite() {
            return Err(self.err(line, column + 1, format!("non-finite value `{cell}`")));
        }
        Ok(v)
    }

    fn check_width(&self, line: u64, cells: &[String], width: usize) -> Result<()> {
        if cells.len() != width {
            return Err(self.err(
                line,
                0,
                format!("ragged row: {} cells, header has {width}", cells.len()),
            ));
        }
        Ok(())
    }

    /// Parses the `id,<names...>` layout shared by feature and weight files.
    fn id_matrix(&self) -> Result<(Vec<String>, Vec<String>, Array2<f64>)> {
        if self.header.first().map(String::as_str) != Some("id") {
            return Err(self.err(self.header_line, 1, "header must start with `id`"));
        }
        if self.header.len() < 2 {
            return Err(self.err(self.header_line, 0, "header has no feature columns"));
        }
        if let Some(k) = self.header.iter().position(String::is_empty) {
            return Err(self.err(self.header_line, k + 1, "empty column name"));
        }
        let width = self.header.len();
        let d = width - 1;
        let mut items = Vec::with_capacity(self.rows.len());
        let mut seen: HashMap<&str, u64> = HashMap::new();
        let mut values = Array2::zeros((self.rows.len(), d));
        for (r, (line, cells)) in self.rows.iter().enumerate() {
            self.check_width(*line, cells, width)?;
            let id = &cells[0];
            if id.is_empty() {
                return Err(self.err(*line, 1, "empty identifier"));
            }
            if let Some(first) = seen.insert(id.as_str(), *line) {
                return Err(self.err(
                    *line,
                    1,
                    format!("duplicate identifier `{id}` (first on line {first})"),
                ));
            }
            for (k, cell) in cells[1..].iter().enumerate() {
                values[[r, k]] = self.number(*line, k + 1, cell)?;
            }
            items.push(id.clone());
        }
        Ok((items, self.header[1..].to_vec(), values))
    }
}

fn parse_error(path: &Path, line: u64, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message: message.into(),
    }
}

/// Loads a feature matrix; the label is the file stem.
pub fn load_feature_matrix(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let table = Table::read(path)?;
    let (items, features, values) = table.id_matrix()?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    FeatureMatrix::with_feature_names(items, features, values, label).map_err(|e| match e {
        Error::InvalidArgument(msg) => table.err(table.header_line, 0, msg),
        other => other,
    })
}

/// Loads a similarity matrix, mirroring blank lower-triangle cells and
/// reordering columns to match the row order when needed.
pub fn load_similarity_matrix(path: impl AsRef<Path>) -> Result<SimilarityMatrix> {
    let path = path.as_ref();
    let table = Table::read(path)?;
    let columns: Vec<String> = table.header.iter().skip(1).cloned().collect();
    let n = columns.len();
    if n < 2 {
        return Err(table.err(table.header_line, 0, "need at least 2 item columns"));
    }
    if table.rows.len() != n {
        return Err(table.err(
            table.header_line,
            0,
            format!("{} rows for {n} columns; matrix must be square", table.rows.len()),
        ));
    }
    let rows: Vec<String> = table.rows.iter().map(|(_, c)| c[0].clone()).collect();
    let mut column_of: HashMap<&str, usize> = HashMap::with_capacity(n);
    for (k, id) in columns.iter().enumerate() {
        if column_of.insert(id.as_str(), k).is_some() {
            return Err(table.err(table.header_line, k + 2, format!("duplicate column `{id}`")));
        }
    }
    // order[c] = file column holding row-item c
    let mut order = Vec::with_capacity(n);
    for (line, cells) in &table.rows {
        match column_of.get(cells[0].as_str()) {
            Some(&k) => order.push(k),
            None => {
                return Err(Error::SetMismatch(format!(
                    "{}:{line}: row `{}` has no matching column",
                    path.display(),
                    cells[0]
                )))
            }
        }
    }
    if let Err(e) = super::check_unique(&rows) {
        return Err(table.err(0, 1, e.to_string()));
    }

    let mut cells: Vec<Vec<Option<f64>>> = vec![vec![None; n]; n];
    for (r, (line, row)) in table.rows.iter().enumerate() {
        table.check_width(*line, row, n + 1)?;
        for (c, slot) in cells[r].iter_mut().enumerate() {
            let k = order[c];
            let cell = &row[k + 1];
            if !cell.is_empty() {
                *slot = Some(table.number(*line, k + 1, cell)?);
            }
        }
    }

    let blank_diagonal = (0..n).filter(|&i| cells[i][i].is_none()).count();
    if blank_diagonal != 0 && blank_diagonal != n {
        return Err(table.err(0, 0, "diagonal must be either fully present or fully blank"));
    }
    let mut values = Array2::zeros((n, n));
    for i in 0..n {
        values[[i, i]] = cells[i][i].unwrap_or(0.0);
        for j in (i + 1)..n {
            let upper = cells[i][j];
            let lower = cells[j][i];
            let (a, b) = match (upper, lower) {
                (Some(u), Some(l)) => (u, l),
                (Some(u), None) => (u, u),
                (None, Some(l)) => (l, l),
                (None, None) => {
                    let (line, _) = &table.rows[i];
                    return Err(table.err(
                        *line,
                        order[j] + 2,
                        format!("missing value for pair ({}, {})", rows[i], rows[j]),
                    ));
                }
            };
            values[[i, j]] = a;
            values[[j, i]] = b;
        }
    }
    if blank_diagonal == n {
        SimilarityMatrix::without_diagonal(rows, values)
    } else {
        SimilarityMatrix::new(rows, values)
    }
}

/// Loads a single-row weight file. The intercept is not stored in weight
/// files and is returned as zero.
pub fn load_weights(path: impl AsRef<Path>) -> Result<(Vec<String>, WeightVector)> {
    let path = path.as_ref();
    let table = Table::read(path)?;
    let (items, features, values) = table.id_matrix()?;
    if items.len() != 1 {
        return Err(table.err(
            table.header_line,
            0,
            format!("weight file must have exactly one row, found {}", items.len()),
        ));
    }
    let weights: Array1<f64> = values.row(0).to_owned();
    Ok((features, WeightVector::new(weights, 0.0)?))
}

/// One line of a label file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelRow {
    pub id: String,
    pub class_name: String,
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<LabelRow>> {
    let path = path.as_ref();
    let table = Table::read(path)?;
    if table.header.len() != 2 || table.header[0] != "id" || table.header[1] != "class_name" {
        return Err(table.err(table.header_line, 0, "label header must be `id,class_name`"));
    }
    let mut seen: HashMap<&str, u64> = HashMap::new();
    let mut out = Vec::with_capacity(table.rows.len());
    for (line, cells) in &table.rows {
        table.check_width(*line, cells, 2)?;
        if cells[0].is_empty() || cells[1].is_empty() {
            return Err(table.err(*line, 0, "empty identifier or class name"));
        }
        if let Some(first) = seen.insert(cells[0].as_str(), *line) {
            return Err(table.err(
                *line,
                1,
                format!("duplicate identifier `{}` (first on line {first})", cells[0]),
            ));
        }
        out.push(LabelRow {
            id: cells[0].clone(),
            class_name: cells[1].clone(),
        });
    }
    Ok(out)
}

/// Float text used in every written table; 17 significant digits, so
/// values survive a round trip unchanged.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `#`-prefixed comment lines, a header and rows as CSV.
pub fn write_records(
    path: impl AsRef<Path>,
    comments: &[String],
    header: Vec<String>,
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    write_table(path.as_ref(), comments, header, rows)
}

fn write_table(
    path: &Path,
    comments: &[String],
    header: Vec<String>,
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut buf = Vec::new();
    for c in comments {
        for line in c.lines() {
            buf.extend_from_slice(FILE_COMMENT.as_bytes());
            buf.extend_from_slice(line.as_bytes());
            buf.push(b'\n');
        }
    }
    {
        let mut writer = csv::WriterBuilder::new().from_writer(&mut buf);
        let csv_err = |e: csv::Error| parse_error(path, 0, 0, e.to_string());
        writer.write_record(&header).map_err(csv_err)?;
        for row in rows {
            writer.write_record(&row).map_err(csv_err)?;
        }
        writer.flush().map_err(io_err)?;
    }
    fs::write(path, buf).map_err(io_err)
}

/// Writes a feature matrix. `comments` become `#`-prefixed lines at the top.
pub fn write_feature_matrix(
    path: impl AsRef<Path>,
    f: &FeatureMatrix,
    comments: &[String],
) -> Result<()> {
    let header = std::iter::once("id".to_owned())
        .chain(f.feature_names().iter().cloned())
        .collect();
    let values = f.values();
    let rows = f.items().iter().zip(values.rows()).map(|(id, row)| {
        std::iter::once(id.clone())
            .chain(row.iter().map(|v| format_value(*v)))
            .collect()
    });
    write_table(path.as_ref(), comments, header, rows)
}

/// Writes the full matrix; the diagonal is left blank when it carries no
/// information.
pub fn write_similarity_matrix(
    path: impl AsRef<Path>,
    s: &SimilarityMatrix,
    comments: &[String],
) -> Result<()> {
    let header = std::iter::once("id".to_owned())
        .chain(s.items().iter().cloned())
        .collect();
    let values = s.values();
    let rows = s.items().iter().enumerate().map(|(i, id)| {
        std::iter::once(id.clone())
            .chain((0..s.n_items()).map(|j| {
                if i == j && !s.has_diagonal() {
                    String::new()
                } else {
                    format_value(values[[i, j]])
                }
            }))
            .collect()
    });
    write_table(path.as_ref(), comments, header, rows)
}

pub fn write_weights(
    path: impl AsRef<Path>,
    feature_names: &[String],
    w: &WeightVector,
    comments: &[String],
) -> Result<()> {
    if feature_names.len() != w.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} feature names for {} weights",
            feature_names.len(),
            w.len()
        )));
    }
    let header = std::iter::once("id".to_owned())
        .chain(feature_names.iter().cloned())
        .collect();
    let row = std::iter::once(WEIGHT_ROW.to_owned())
        .chain(w.weights().iter().map(|v| format_value(*v)))
        .collect();
    write_table(path.as_ref(), comments, header, std::iter::once(row))
}
