//! Versioned model file: human-readable structured text with reals at full
//! decimal precision (17 significant digits) and a trailing content hash, so
//! a save/load round trip is prediction-exact and corruption is detected.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::classifier::{BaseClassifier, FactorizedClassifier, ModelMeta, StrongClassifier, Stump};
use crate::error::{Error, Result};
use crate::tree::{HammingTree, TreeNode};
use crate::weights::WeightScheme;

const MAGIC: &str = "hamboost model v";
const VERSION: u32 = 1;

fn fmt_real(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.16e}")
    }
}

fn parse_real(s: &str) -> Result<f64> {
    if s == "-inf" {
        return Ok(f64::NEG_INFINITY);
    }
    s.parse()
        .map_err(|_| Error::ModelFormat(format!("bad real value '{s}'")))
}

fn fmt_votes(votes: &[i8]) -> String {
    votes
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Serializes the model. The write is atomic: a sibling temp file is
/// renamed over the target.
pub fn save_model(model: &StrongClassifier, path: &Path) -> Result<()> {
    let mut body = String::new();
    writeln!(body, "{MAGIC}{VERSION}").unwrap();
    writeln!(body, "k = {}", model.k).unwrap();
    writeln!(body, "d = {}", model.d).unwrap();
    writeln!(body, "scheme = {}", model.meta.scheme.as_str()).unwrap();
    writeln!(body, "seed = {}", model.meta.seed).unwrap();
    writeln!(body, "iterations = {}", model.meta.iterations).unwrap();
    writeln!(body, "tool = hamboost {}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(body, "stages = {}", model.stages.len()).unwrap();
    for stage in &model.stages {
        match stage {
            BaseClassifier::Stump(s) => {
                writeln!(
                    body,
                    "stage stump {} {} {} {}",
                    s.stump.feature,
                    fmt_real(s.stump.threshold),
                    fmt_real(s.alpha),
                    fmt_votes(&s.votes)
                )
                .unwrap();
            }
            BaseClassifier::Tree(t) => {
                writeln!(body, "stage tree {} {}", t.node_count(), fmt_real(t.alpha)).unwrap();
                for (j, node) in t.nodes.iter().enumerate() {
                    let child = |c: Option<u32>| match c {
                        None => "-".to_string(),
                        Some(i) => i.to_string(),
                    };
                    writeln!(
                        body,
                        "node {} {} {} {} {}",
                        node.stump.feature,
                        fmt_real(node.stump.threshold),
                        child(t.left[j]),
                        child(t.right[j]),
                        fmt_votes(&node.votes)
                    )
                    .unwrap();
                }
            }
        }
    }
    let digest = Sha256::digest(body.as_bytes());
    writeln!(body, "checksum sha256:{}", hex(&digest)).unwrap();

    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, &body)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

struct Lines<'a> {
    iter: std::str::Lines<'a>,
    line_no: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        self.line_no += 1;
        self.iter
            .next()
            .ok_or_else(|| Error::ModelFormat(format!("truncated file at line {}", self.line_no)))
    }
}

pub fn load_model(path: &Path) -> Result<StrongClassifier> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;

    // the checksum line covers every byte before it
    let trimmed = text.strip_suffix('\n').unwrap_or(&text);
    let (body, checksum_line) = match trimmed.rfind('\n') {
        Some(pos) => (&text[..pos + 1], &trimmed[pos + 1..]),
        None => return Err(Error::ModelFormat("truncated model file".into())),
    };
    let Some(stated) = checksum_line.strip_prefix("checksum sha256:") else {
        return Err(Error::ModelFormat("missing checksum line".into()));
    };
    if hex(&Sha256::digest(body.as_bytes())) != stated.trim() {
        return Err(Error::ModelChecksum);
    }

    let mut lines = Lines { iter: body.lines(), line_no: 0 };
    let header = lines.next()?;
    let Some(version) = header.strip_prefix(MAGIC) else {
        return Err(Error::ModelFormat("not a hamboost model file".into()));
    };
    let version: u32 = version
        .trim()
        .parse()
        .map_err(|_| Error::ModelVersion(format!("bad version '{header}'")))?;
    if version != VERSION {
        return Err(Error::ModelVersion(format!(
            "file is version {version}, this build reads version {VERSION}"
        )));
    }

    let mut k = None;
    let mut d = None;
    let mut meta = ModelMeta::default();
    let stage_count = loop {
        let line = lines.next()?;
        let Some((key, value)) = line.split_once(" = ") else {
            return Err(Error::ModelFormat(format!("expected 'key = value', found '{line}'")));
        };
        match key {
            "k" => k = Some(parse_count(value, "k")?),
            "d" => d = Some(parse_count(value, "d")?),
            "scheme" => meta.scheme = WeightScheme::parse(value)?,
            "seed" => {
                meta.seed = value
                    .parse()
                    .map_err(|_| Error::ModelFormat(format!("bad seed '{value}'")))?
            }
            "iterations" => meta.iterations = parse_count(value, "iterations")?,
            "tool" => {}
            "stages" => break parse_count(value, "stage count")?,
            unknown => {
                return Err(Error::ModelVersion(format!(
                    "unknown header field '{unknown}'; a newer tool wrote this file"
                )))
            }
        }
    };
    let k = k.ok_or_else(|| Error::ModelFormat("missing k".into()))?;
    let d = d.ok_or_else(|| Error::ModelFormat("missing d".into()))?;

    let mut model = StrongClassifier::new(k, d, meta);
    for _ in 0..stage_count {
        let line = lines.next()?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["stage", "stump", rest @ ..] => {
                if rest.len() != 3 + k {
                    return Err(Error::ModelFormat(format!(
                        "stump stage needs {} fields, found {}",
                        3 + k,
                        rest.len()
                    )));
                }
                let feature = parse_count(rest[0], "feature")?;
                let threshold = parse_real(rest[1])?;
                let alpha = parse_real(rest[2])?;
                let votes = parse_votes(&rest[3..])?;
                if feature >= d {
                    return Err(Error::ModelFormat(format!(
                        "stump reads feature {feature}, model has d = {d}"
                    )));
                }
                if !(alpha >= 0.0 && alpha.is_finite()) {
                    return Err(Error::ModelFormat(format!("bad coefficient {alpha}")));
                }
                model.push(BaseClassifier::Stump(FactorizedClassifier {
                    alpha,
                    votes,
                    stump: Stump::new(feature, threshold),
                }));
            }
            ["stage", "tree", n_str, alpha_str] => {
                let n: usize = n_str
                    .parse()
                    .map_err(|_| Error::ModelFormat(format!("bad node count '{n_str}'")))?;
                let alpha = parse_real(alpha_str)?;
                let mut nodes = Vec::with_capacity(n);
                let mut left = Vec::with_capacity(n);
                let mut right = Vec::with_capacity(n);
                for _ in 0..n {
                    let line = lines.next()?;
                    let fields: Vec<&str> = line.split_whitespace().collect();
                    if fields.len() != 5 + k || fields[0] != "node" {
                        return Err(Error::ModelFormat(format!(
                            "bad tree node line '{line}'"
                        )));
                    }
                    let feature = parse_count(fields[1], "feature")?;
                    let threshold = parse_real(fields[2])?;
                    left.push(parse_child(fields[3])?);
                    right.push(parse_child(fields[4])?);
                    nodes.push(TreeNode {
                        votes: parse_votes(&fields[5..])?,
                        stump: Stump::new(feature, threshold),
                    });
                }
                let tree = HammingTree { nodes, left, right, alpha };
                tree.validate(k, d)?;
                model.push(BaseClassifier::Tree(tree));
            }
            _ => return Err(Error::ModelFormat(format!("bad stage line '{line}'"))),
        }
    }
    Ok(model)
}

fn parse_count(s: &str, what: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::ModelFormat(format!("bad {what} '{s}'")))
}

fn parse_child(s: &str) -> Result<Option<u32>> {
    if s == "-" {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| Error::ModelFormat(format!("bad child index '{s}'")))
}

fn parse_votes(fields: &[&str]) -> Result<Vec<i8>> {
    fields
        .iter()
        .map(|f| match *f {
            "1" | "+1" => Ok(1),
            "-1" => Ok(-1),
            other => Err(Error::ModelFormat(format!("bad vote '{other}'"))),
        })
        .collect()
}
