//! Dataset file formats.
//!
//! Dense CSV: one instance per line, feature values followed by the 1-based
//! class index in the last column. With [`LabelMode::SignColumns`] the last
//! `K` columns are explicit `+1`/`-1` labels instead.
//!
//! Sparse index format: `label idx:val idx:val ...` with 1-based feature
//! indices; absent features are zero. The feature count is the largest index
//! seen; train and test are reconciled to a shared dimension.

use std::path::{Path, PathBuf};

use crate::data::DataSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    DenseCsv,
    SparseIndex,
}

impl DataFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dense-csv" => Ok(DataFormat::DenseCsv),
            "sparse-index" => Ok(DataFormat::SparseIndex),
            other => Err(Error::InvalidInput(format!(
                "unknown dataset format '{other}' (expected dense-csv or sparse-index)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelMode {
    /// 1-based class index in the last column.
    LastColumn,
    /// The last `K` columns are explicit `+1`/`-1` labels (dense only).
    SignColumns(usize),
}

#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub path: PathBuf,
    pub format: DataFormat,
    pub label_mode: LabelMode,
    pub test_path: Option<PathBuf>,
}

impl DatasetSpec {
    pub fn dense(path: impl Into<PathBuf>) -> Self {
        DatasetSpec {
            path: path.into(),
            format: DataFormat::DenseCsv,
            label_mode: LabelMode::LastColumn,
            test_path: None,
        }
    }
}

enum RawLabels {
    Indices(Vec<usize>),
    Signs { signs: Vec<i8>, k: usize },
}

struct RawFile {
    /// Sparse feature pairs per row; dense files use consecutive indices.
    rows: Vec<Vec<(usize, f64)>>,
    labels: RawLabels,
    /// Columns seen in a dense file, max feature index in a sparse one.
    d_seen: usize,
}

/// Loads the train file and the optional designated test file with a shared
/// feature dimension and class count.
pub fn load_dataset(spec: &DatasetSpec) -> Result<(DataSet, Option<DataSet>)> {
    let train_raw = parse_file(&spec.path, spec.format, spec.label_mode)?;
    let test_raw = spec
        .test_path
        .as_ref()
        .map(|p| parse_file(p, spec.format, spec.label_mode))
        .transpose()?;

    let mut d = train_raw.d_seen;
    let mut k = label_count(&train_raw)?;
    if let Some(test) = &test_raw {
        match spec.format {
            DataFormat::DenseCsv => {
                if test.d_seen != d {
                    return Err(Error::Dimension(format!(
                        "test file has {} feature columns, train has {}",
                        test.d_seen, d
                    )));
                }
            }
            DataFormat::SparseIndex => d = d.max(test.d_seen),
        }
        k = k.max(label_count(test)?);
    }

    let train = assemble(train_raw, d, k)?;
    let test = test_raw.map(|raw| assemble(raw, d, k)).transpose()?;
    Ok((train, test))
}

/// Loads one file against a trained model's dimensions. Dense files must
/// match `d` exactly; sparse files may omit trailing features. Labels above
/// `k` are inconsistent with the model.
pub fn load_for_model(
    path: &Path,
    format: DataFormat,
    label_mode: LabelMode,
    d: usize,
    k: usize,
) -> Result<DataSet> {
    let raw = parse_file(path, format, label_mode)?;
    match format {
        DataFormat::DenseCsv => {
            if raw.d_seen != d {
                return Err(Error::Dimension(format!(
                    "file has {} feature columns, model expects {}",
                    raw.d_seen, d
                )));
            }
        }
        DataFormat::SparseIndex => {
            if raw.d_seen > d {
                return Err(Error::Dimension(format!(
                    "file uses feature index {}, model expects at most {}",
                    raw.d_seen, d
                )));
            }
        }
    }
    let k_seen = label_count(&raw)?;
    if k_seen > k {
        return Err(Error::Dimension(format!(
            "file uses {} classes, model expects {}",
            k_seen, k
        )));
    }
    assemble(raw, d, k)
}

fn label_count(raw: &RawFile) -> Result<usize> {
    match &raw.labels {
        RawLabels::Indices(ls) => Ok(*ls.iter().max().expect("non-empty file")),
        RawLabels::Signs { k, .. } => Ok(*k),
    }
}

fn assemble(raw: RawFile, d: usize, k: usize) -> Result<DataSet> {
    let n = raw.rows.len();
    let mut x = vec![0.0; n * d];
    for (i, row) in raw.rows.iter().enumerate() {
        for &(j, v) in row {
            x[i * d + j] = v;
        }
    }
    let y = match raw.labels {
        RawLabels::Indices(ls) => crate::data::one_hot_encode(&ls, k)?,
        RawLabels::Signs { signs, .. } => signs,
    };
    DataSet::from_parts(x, y, n, d, k)
}

fn parse_file(path: &Path, format: DataFormat, label_mode: LabelMode) -> Result<RawFile> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::InvalidInput(format!("cannot read {}: {e}", path.display()))
    })?;
    let raw = match format {
        DataFormat::DenseCsv => parse_dense(&text, label_mode),
        DataFormat::SparseIndex => match label_mode {
            LabelMode::LastColumn => parse_sparse(&text),
            LabelMode::SignColumns(_) => Err(Error::InvalidInput(
                "sign-column labels apply to dense CSV only".into(),
            )),
        },
    }?;
    if raw.rows.is_empty() {
        return Err(Error::InvalidInput(format!("{} is empty", path.display())));
    }
    Ok(raw)
}

fn parse_dense(text: &str, label_mode: LabelMode) -> Result<RawFile> {
    let mut rows = Vec::new();
    let mut indices = Vec::new();
    let mut signs = Vec::new();
    let mut width: Option<usize> = None;
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected {} fields, found {}", w, fields.len()),
                })
            }
            _ => {}
        }
        let label_cols = match label_mode {
            LabelMode::LastColumn => 1,
            LabelMode::SignColumns(k) => k,
        };
        if fields.len() < label_cols + 1 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("need at least one feature and {} label field(s)", label_cols),
            });
        }
        let d = fields.len() - label_cols;
        let mut row = Vec::with_capacity(d);
        for (j, field) in fields[..d].iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("non-numeric feature value '{field}'"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("non-finite feature value '{field}'"),
                });
            }
            row.push((j, v));
        }
        rows.push(row);
        match label_mode {
            LabelMode::LastColumn => {
                let label: usize = fields[d].parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("bad class label '{}' (expected a 1-based integer)", fields[d]),
                })?;
                if label < 1 {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "class labels are 1-based".into(),
                    });
                }
                indices.push(label);
            }
            LabelMode::SignColumns(_) => {
                for field in &fields[d..] {
                    match *field {
                        "1" | "+1" => signs.push(1),
                        "-1" => signs.push(-1),
                        other => {
                            return Err(Error::Parse {
                                line: line_no,
                                msg: format!("bad sign label '{other}' (expected +1 or -1)"),
                            })
                        }
                    }
                }
            }
        }
    }
    let d_seen = match (width, label_mode) {
        (Some(w), LabelMode::LastColumn) => w - 1,
        (Some(w), LabelMode::SignColumns(k)) => w - k,
        (None, _) => 0,
    };
    let labels = match label_mode {
        LabelMode::LastColumn => RawLabels::Indices(indices),
        LabelMode::SignColumns(k) => RawLabels::Signs { signs, k },
    };
    Ok(RawFile { rows, labels, d_seen })
}

fn parse_sparse(text: &str) -> Result<RawFile> {
    let mut rows = Vec::new();
    let mut indices = Vec::new();
    let mut d_seen = 0usize;
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let mut tokens = line.split_whitespace();
        let Some(first) = tokens.next() else { continue };
        let label: usize = first.parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("bad class label '{first}' (expected a 1-based integer)"),
        })?;
        if label < 1 {
            return Err(Error::Parse { line: line_no, msg: "class labels are 1-based".into() });
        }
        let mut row: Vec<(usize, f64)> = Vec::new();
        for tok in tokens {
            let Some((idx_str, val_str)) = tok.split_once(':') else {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected idx:val, found '{tok}'"),
                });
            };
            let idx: usize = idx_str.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad feature index '{idx_str}'"),
            })?;
            if idx < 1 {
                return Err(Error::Parse { line: line_no, msg: "feature indices are 1-based".into() });
            }
            let val: f64 = val_str.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad feature value '{val_str}'"),
            })?;
            if !val.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("non-finite feature value '{val_str}'"),
                });
            }
            if row.iter().any(|&(j, _)| j == idx - 1) {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("feature {idx} defined twice"),
                });
            }
            d_seen = d_seen.max(idx);
            row.push((idx - 1, val));
        }
        rows.push(row);
        indices.push(label);
    }
    Ok(RawFile { rows, labels: RawLabels::Indices(indices), d_seen })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn dense_csv_round_trip() {
        let f = write_tmp("0,1\n1,2\n");
        let (ds, test) = load_dataset(&DatasetSpec::dense(f.path())).unwrap();
        assert!(test.is_none());
        assert_eq!((ds.n(), ds.d(), ds.k()), (2, 1, 2));
        assert_eq!(ds.feature(0, 0), 0.0);
        assert_eq!(ds.feature(1, 0), 1.0);
        assert_eq!(ds.label_index(0), Some(0));
        assert_eq!(ds.label_index(1), Some(1));
    }

    #[test]
    fn dense_ragged_row_names_line() {
        let f = write_tmp("0,1,1\n0,2\n");
        let err = load_dataset(&DatasetSpec::dense(f.path())).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn dense_bad_values() {
        let f = write_tmp("a,1\n");
        assert!(matches!(
            load_dataset(&DatasetSpec::dense(f.path())),
            Err(Error::Parse { line: 1, .. })
        ));
        let f = write_tmp("0,0\n");
        assert!(load_dataset(&DatasetSpec::dense(f.path())).is_err());
        let f = write_tmp("");
        assert!(load_dataset(&DatasetSpec::dense(f.path())).is_err());
    }

    #[test]
    fn sparse_line_fills_absent_features_with_zero() {
        let f = write_tmp("2 1:0.5 3:2.0\n1 2:1.0\n");
        let mut spec = DatasetSpec::dense(f.path());
        spec.format = DataFormat::SparseIndex;
        let (ds, _) = load_dataset(&spec).unwrap();
        assert_eq!((ds.n(), ds.d(), ds.k()), (2, 3, 2));
        assert_eq!(ds.row(0), &[0.5, 0.0, 2.0]);
        assert_eq!(ds.row(1), &[0.0, 1.0, 0.0]);
        assert_eq!(ds.label_index(0), Some(1));
    }

    #[test]
    fn sparse_duplicate_feature_rejected() {
        let f = write_tmp("1 1:0.5 1:0.7\n");
        let mut spec = DatasetSpec::dense(f.path());
        spec.format = DataFormat::SparseIndex;
        assert!(matches!(load_dataset(&spec), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn shared_dimensions_with_test_file() {
        let train = write_tmp("1 1:1.0\n2 2:1.0\n");
        let test = write_tmp("3 4:0.5\n");
        let mut spec = DatasetSpec::dense(train.path());
        spec.format = DataFormat::SparseIndex;
        spec.test_path = Some(test.path().to_path_buf());
        let (tr, te) = load_dataset(&spec).unwrap();
        let te = te.unwrap();
        // d from the test file's max index, K from its label
        assert_eq!((tr.d(), tr.k()), (4, 3));
        assert_eq!((te.d(), te.k()), (4, 3));
    }

    #[test]
    fn sign_columns_mode() {
        let f = write_tmp("0.5,1,-1\n1.5,-1,1\n2.5,1,1\n");
        let mut spec = DatasetSpec::dense(f.path());
        spec.label_mode = LabelMode::SignColumns(2);
        let (ds, _) = load_dataset(&spec).unwrap();
        assert_eq!((ds.n(), ds.d(), ds.k()), (3, 1, 2));
        assert!(!ds.is_single_label()); // row 3 has two positives
        assert_eq!(ds.label_sign(0, 0), 1);
        assert_eq!(ds.label_sign(1, 0), -1);
    }

    #[test]
    fn load_for_model_checks_dimensions() {
        let f = write_tmp("0,1\n1,2\n");
        assert!(load_for_model(f.path(), DataFormat::DenseCsv, LabelMode::LastColumn, 1, 2).is_ok());
        assert!(matches!(
            load_for_model(f.path(), DataFormat::DenseCsv, LabelMode::LastColumn, 3, 2),
            Err(Error::Dimension(_))
        ));
        let f = write_tmp("0,3\n");
        assert!(matches!(
            load_for_model(f.path(), DataFormat::DenseCsv, LabelMode::LastColumn, 1, 2),
            Err(Error::Dimension(_))
        ));
        // sparse files may omit trailing features
        let f = write_tmp("1 1:1.0\n");
        let ds = load_for_model(f.path(), DataFormat::SparseIndex, LabelMode::LastColumn, 5, 2).unwrap();
        assert_eq!(ds.d(), 5);
    }
}
