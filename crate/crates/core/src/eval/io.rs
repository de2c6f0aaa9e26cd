//! Tab-separated corpus and result files.
//!
//! Set lines are `id<TAB>dim dim …`; weighted lines are
//! `id<TAB>dim:weight dim:weight …`.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::pipeline::{PairLog, ResultPair};
use crate::vector::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Set,
    Weighted,
}

impl Format {
    /// Weighted if any line carries a `:` weight.
    pub fn detect(text: &str) -> Self {
        if text
            .lines()
            .any(|l| l.split('\t').nth(1).is_some_and(|r| r.contains(':')))
        {
            Format::Weighted
        } else {
            Format::Set
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Format::Set => "set",
            Format::Weighted => "weighted",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "set" | "set-tsv" => Ok(Format::Set),
            "weighted" | "weighted-tsv" => Ok(Format::Weighted),
            other => Err(invalid(format!("unknown corpus format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub vectors: Vec<SparseVector>,
    pub format: Format,
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

fn parse_line(lineno: usize, line: &str, format: Format) -> Result<SparseVector> {
    let (id, rest) = line
        .split_once('\t')
        .ok_or_else(|| parse_err(lineno, "expected `id<TAB>entries`"))?;
    let id: u64 = id
        .trim()
        .parse()
        .map_err(|_| parse_err(lineno, format!("bad id `{id}`")))?;
    let mut entries = Vec::new();
    for tok in rest.split_whitespace() {
        let (d, w) = match format {
            Format::Set => (tok, 1.0),
            Format::Weighted => {
                let (d, w) = tok.split_once(':').ok_or_else(|| {
                    parse_err(lineno, format!("expected dim:weight, got `{tok}`"))
                })?;
                let w: f64 = w
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad weight `{w}`")))?;
                (d, w)
            }
        };
        let d: u32 = d
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad dimension `{d}`")))?;
        entries.push((d, w));
    }
    entries.sort_by_key(|e| e.0);
    if let Some(p) = entries.windows(2).find(|p| p[0].0 == p[1].0) {
        return Err(parse_err(lineno, format!("duplicate dimension {}", p[0].0)));
    }
    SparseVector::new(id, entries).map_err(|e| parse_err(lineno, e.to_string()))
}

/// Parses a corpus; line numbers in errors are 1-based. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_corpus(text: &str, format: Format) -> Result<Corpus> {
    let mut vectors = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let v = parse_line(i + 1, line, format)?;
        if !seen.insert(v.id()) {
            return Err(parse_err(i + 1, format!("duplicate id {}", v.id())));
        }
        vectors.push(v);
    }
    Ok(Corpus { vectors, format })
}

pub fn ingest(path: &Path, format: Option<Format>) -> Result<Corpus> {
    let text = fs::read_to_string(path)?;
    let format = format.unwrap_or_else(|| Format::detect(&text));
    parse_corpus(&text, format)
}

/// Canonical form: one line per vector in corpus order, dimensions ascending.
pub fn write_corpus<W: Write>(mut out: W, corpus: &Corpus) -> Result<()> {
    for v in &corpus.vectors {
        write!(out, "{}\t", v.id())?;
        for (i, &(d, w)) in v.entries().iter().enumerate() {
            if i > 0 {
                out.write_all(b" ")?;
            }
            match corpus.format {
                Format::Set => write!(out, "{d}")?,
                Format::Weighted => write!(out, "{d}:{w}")?,
            }
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// `idA<TAB>idB<TAB>similarity`, in the given order.
pub fn write_results<W: Write>(mut out: W, results: &[ResultPair]) -> Result<()> {
    for r in results {
        writeln!(out, "{}\t{}\t{:.6}", r.id_a, r.id_b, r.similarity)?;
    }
    out.flush()?;
    Ok(())
}

/// One line per candidate pair with everything needed to recompute a report.
pub fn write_pair_log<W: Write>(mut out: W, log: &[PairLog]) -> Result<()> {
    writeln!(
        out,
        "#idA\tidB\toutcome\troute\tm\tn\ts_hat\tn_est\texact\temitted\thashes"
    )?;
    for p in log {
        let route = match p.verdict.route {
            crate::seqtest::Route::Sprt => "sprt".to_string(),
            crate::seqtest::Route::OneSidedCi { width } => format!("ci:{width:.2}"),
        };
        let (s_hat, n_est) = match p.estimate {
            Some(e) => (format!("{:.6}", e.s_hat), e.n_used.to_string()),
            None => ("-".into(), "-".into()),
        };
        let exact = p.exact.map_or("-".into(), |s| format!("{s:.6}"));
        writeln!(
            out,
            "{}\t{}\t{:?}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            p.id_a,
            p.id_b,
            p.verdict.outcome,
            route,
            p.verdict.m,
            p.verdict.n_used,
            s_hat,
            n_est,
            exact,
            p.emitted as u8,
            p.hash_comparisons
        )?;
    }
    out.flush()?;
    Ok(())
}
