//! Score-file reading and writing.
//!
//! The format is UTF-8 CSV with the header `enroll_demo,probe_demo,score,kind`
//! and an optional `split` column (`dev` / `test`) when one file carries both
//! partitions. Column names are matched exactly; any other column is ignored
//! with a warning. `kind` is case-insensitive.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::score::{
    ComparisonRecord, DemographicLabel, Polarity, ScoreKind, ScoreSet, SplitDataset,
};

pub const HEADER: [&str; 4] = ["enroll_demo", "probe_demo", "score", "kind"];
pub const SPLIT_COLUMN: &str = "split";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Dev,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("dev") {
            Ok(Split::Dev)
        } else if s.eq_ignore_ascii_case("test") {
            Ok(Split::Test)
        } else {
            Err(Error::InvalidRecord(format!(
                "split must be 'dev' or 'test', got '{s}'"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvConfig {
    pub delimiter: u8,
    /// Keep only rows whose `split` column equals this partition. Requires the
    /// column to be present.
    pub split: Option<Split>,
}

impl Default for CsvConfig {
    fn default() -> Self {
        Self {
            delimiter: b',',
            split: None,
        }
    }
}

/// A parsed score file together with the header columns that were skipped.
#[derive(Debug, Clone)]
pub struct LoadedScores {
    pub set: ScoreSet,
    pub ignored_columns: Vec<String>,
}

struct Columns {
    enroll: usize,
    probe: usize,
    score: usize,
    kind: usize,
    split: Option<usize>,
    ignored: Vec<String>,
}

fn locate_columns(header: &csv::StringRecord) -> Result<Columns> {
    let find = |name: &str| header.iter().position(|h| h == name);
    let mut missing = Vec::new();
    let mut required = [0usize; 4];
    for (slot, name) in required.iter_mut().zip(HEADER) {
        match find(name) {
            Some(i) => *slot = i,
            None => missing.push(name),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MalformedRow {
            line: 1,
            reason: format!("header is missing column(s): {}", missing.join(", ")),
        });
    }
    let split = find(SPLIT_COLUMN);
    let ignored = header
        .iter()
        .filter(|h| !HEADER.contains(h) && *h != SPLIT_COLUMN)
        .map(str::to_owned)
        .collect();
    Ok(Columns {
        enroll: required[0],
        probe: required[1],
        score: required[2],
        kind: required[3],
        split,
        ignored,
    })
}

fn parse_row(
    row: &csv::StringRecord,
    cols: &Columns,
    line: u64,
    polarity: Polarity,
) -> Result<(ComparisonRecord, Option<Split>)> {
    let malformed = |reason: String| Error::MalformedRow { line, reason };
    let field = |i: usize| row.get(i).unwrap_or_default();

    let enroll = DemographicLabel::new(field(cols.enroll))
        .map_err(|_| malformed("empty enroll_demo".into()))?;
    let probe = DemographicLabel::new(field(cols.probe))
        .map_err(|_| malformed("empty probe_demo".into()))?;
    let raw = field(cols.score).trim();
    let score: f64 = raw
        .parse()
        .map_err(|_| malformed(format!("score '{raw}' is not a number")))?;
    if !score.is_finite() {
        return Err(Error::NonFiniteScore { line });
    }
    let kind: ScoreKind = field(cols.kind)
        .parse()
        .map_err(|e: Error| malformed(e.to_string()))?;
    let split = match cols.split {
        Some(i) => Some(
            field(i)
                .parse::<Split>()
                .map_err(|e| malformed(e.to_string()))?,
        ),
        None => None,
    };
    let record = ComparisonRecord::new(enroll, probe, polarity.orient(score), kind)
        .map_err(|e| malformed(e.to_string()))?;
    Ok((record, split))
}

type Rows = Vec<(ComparisonRecord, Option<Split>)>;

fn read_rows<R: Read>(
    reader: R,
    config: CsvConfig,
    polarity: Polarity,
) -> Result<(Rows, Vec<String>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(config.delimiter)
        .has_headers(true)
        .from_reader(reader);
    let header = match rdr.headers() {
        Ok(h) if h.is_empty() || (h.len() == 1 && h[0].is_empty()) => {
            return Err(Error::EmptyFile)
        }
        Ok(h) => h.clone(),
        Err(e) => {
            return Err(Error::MalformedRow {
                line: 1,
                reason: e.to_string(),
            })
        }
    };
    let cols = locate_columns(&header)?;
    if config.split.is_some() && cols.split.is_none() {
        return Err(Error::MalformedRow {
            line: 1,
            reason: "a split was requested but the header has no 'split' column".into(),
        });
    }

    let mut rows = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = record.position().map_or(0, |p| p.line());
                rows.push(parse_row(&record, &cols, line, polarity)?);
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                return Err(Error::MalformedRow {
                    line,
                    reason: e.to_string(),
                });
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyFile);
    }
    Ok((rows, cols.ignored))
}

/// Parses score rows from any reader. Row order is preserved.
pub fn read_scores<R: Read>(
    reader: R,
    config: CsvConfig,
    polarity: Polarity,
) -> Result<LoadedScores> {
    let (rows, ignored_columns) = read_rows(reader, config, polarity)?;
    let records = rows
        .into_iter()
        .filter(|(_, split)| config.split.is_none() || *split == config.split)
        .map(|(r, _)| r)
        .collect();
    Ok(LoadedScores {
        set: ScoreSet::new(records),
        ignored_columns,
    })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn warn_ignored(path: &Path, ignored: &[String]) {
    for col in ignored {
        log::warn!("{}: ignoring unknown column '{col}'", path.display());
    }
}

pub fn load_scores(path: &Path, config: CsvConfig, polarity: Polarity) -> Result<ScoreSet> {
    let loaded = read_scores(open(path)?, config, polarity)?;
    warn_ignored(path, &loaded.ignored_columns);
    Ok(loaded.set)
}

pub fn load_split(
    dev_path: &Path,
    test_path: &Path,
    config: CsvConfig,
    polarity: Polarity,
) -> Result<SplitDataset> {
    let dev = load_scores(dev_path, config, polarity)?;
    let test = load_scores(test_path, config, polarity)?;
    SplitDataset::new(dev, test)
}

/// Loads a single file whose `split` column assigns each row to dev or test.
pub fn load_combined(path: &Path, config: CsvConfig, polarity: Polarity) -> Result<SplitDataset> {
    let (rows, ignored) = read_rows(open(path)?, config, polarity)?;
    warn_ignored(path, &ignored);
    let mut dev = Vec::new();
    let mut test = Vec::new();
    for (record, split) in rows {
        match split {
            Some(Split::Dev) => dev.push(record),
            Some(Split::Test) => test.push(record),
            None => {
                return Err(Error::MalformedRow {
                    line: 1,
                    reason: "combined file needs a 'split' column".into(),
                })
            }
        }
    }
    SplitDataset::new(ScoreSet::new(dev), ScoreSet::new(test))
}

/// Writes `set` in the ingest format. Scores use the shortest decimal
/// representation that parses back to the identical `f64`.
pub fn write_scores<W: Write>(writer: W, set: &ScoreSet) -> io::Result<()> {
    let mut w = io::BufWriter::new(writer);
    writeln!(w, "{}", HEADER.join(","))?;
    for r in set.records() {
        writeln!(
            w,
            "{},{},{},{}",
            r.enroll_demo(),
            r.probe_demo(),
            r.score(),
            r.kind().as_str()
        )?;
    }
    w.flush()
}

pub fn save_scores(path: &Path, set: &ScoreSet) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_scores(file, set).map_err(|e| Error::io(path, e))
}
