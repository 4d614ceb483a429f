//! UCI bag-of-words corpora (`docword.*.txt`).
//!
//! Layout: three header lines `D`, `W`, `NNZ`, then `NNZ` lines
//! `docID wordID count` with 1-based ids.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{clamp_unit_norm, StreamError};

/// Normalization applied by [`load_bag_of_words`], recorded in run manifests.
pub const DATASET_NORMALIZATION: &str =
    "per-feature max scaling to [0,1], then per-point scaling by 1/max(1, ||x||)";

/// Sparse point with strictly increasing coordinate ids.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsePoint {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparsePoint {
    pub fn new(indices: Vec<u32>, values: Vec<f64>) -> Result<Self, StreamError> {
        if indices.len() != values.len() {
            return Err(StreamError::InvalidArgument("indices and values differ in length".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(StreamError::InvalidArgument("indices must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(StreamError::InvalidArgument("non-finite value".into()));
        }
        Ok(Self { indices, values })
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// In-memory corpus of sparse points of a common dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    dim: usize,
    points: Vec<SparsePoint>,
}

impl Dataset {
    pub fn new(dim: usize, points: Vec<SparsePoint>) -> Result<Self, StreamError> {
        if let Some(p) = points
            .iter()
            .find(|p| p.indices.last().is_some_and(|&i| i as usize >= dim))
        {
            return Err(StreamError::InvalidArgument(format!(
                "point index {} out of range for dimension {dim}",
                p.indices.last().unwrap()
            )));
        }
        Ok(Self { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[SparsePoint] {
        &self.points
    }
}

pub fn load_bag_of_words(path: impl AsRef<Path>) -> Result<Dataset, StreamError> {
    let path = path.as_ref();
    let io_err = |source| StreamError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = File::open(path).map_err(io_err)?;
    parse_bag_of_words(BufReader::new(file)).map_err(|e| match e {
        StreamError::Io { source, .. } => io_err(source),
        other => other,
    })
}

pub fn parse_bag_of_words(reader: impl BufRead) -> Result<Dataset, StreamError> {
    let parse_err = |line: usize, message: String| StreamError::Parse { line, message };
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next_line = || -> Result<Option<(usize, String)>, StreamError> {
        match lines.next() {
            None => Ok(None),
            Some((n, Ok(text))) => Ok(Some((n, text))),
            Some((_, Err(source))) => Err(StreamError::Io {
                path: "<reader>".into(),
                source,
            }),
        }
    };

    let mut header = [0usize; 3];
    let names = ["document count D", "vocabulary size W", "entry count NNZ"];
    for (idx, (slot, name)) in header.iter_mut().zip(names).enumerate() {
        let Some((n, text)) = next_line()? else {
            return Err(parse_err(idx + 1, format!("missing header line ({name})")));
        };
        *slot = text
            .trim()
            .parse()
            .map_err(|_| parse_err(n, format!("expected {name}, found {:?}", text.trim())))?;
    }
    let [docs, vocab, nnz] = header;
    if vocab > u32::MAX as usize {
        return Err(parse_err(2, format!("vocabulary size {vocab} too large")));
    }

    let mut entries: Vec<Vec<(u32, f64)>> = vec![Vec::new(); docs];
    let mut seen = 0usize;
    let mut last_line = 3;
    while let Some((n, text)) = next_line()? {
        last_line = n;
        let trimmed = text.trim();
        if trimmed.is_empty() {
            continue;
        }
        if seen == nnz {
            return Err(parse_err(n, format!("more than the {nnz} entries declared in the header")));
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(n, format!("expected 'docID wordID count', found {trimmed:?}")));
        }
        let doc: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(n, format!("bad docID {:?}", fields[0])))?;
        let word: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(n, format!("bad wordID {:?}", fields[1])))?;
        let count: f64 = fields[2]
            .parse()
            .map_err(|_| parse_err(n, format!("bad count {:?}", fields[2])))?;
        if doc == 0 || doc > docs {
            return Err(parse_err(n, format!("docID {doc} outside 1..={docs}")));
        }
        if word == 0 || word > vocab {
            return Err(parse_err(n, format!("wordID {word} outside 1..={vocab}")));
        }
        if !count.is_finite() || count < 0.0 {
            return Err(parse_err(n, format!("count {count} must be a nonnegative number")));
        }
        entries[doc - 1].push(((word - 1) as u32, count));
        seen += 1;
    }
    if seen < nnz {
        return Err(parse_err(
            last_line + 1,
            format!("expected {nnz} entries, found {seen}"),
        ));
    }

    // Merge repeated (doc, word) pairs, then find the per-feature maxima.
    let mut feature_max = vec![0.0f64; vocab];
    for doc in &mut entries {
        doc.sort_by_key(|&(w, _)| w);
        doc.dedup_by(|later, earlier| {
            if later.0 == earlier.0 {
                earlier.1 += later.1;
                true
            } else {
                false
            }
        });
        doc.retain(|&(_, c)| c > 0.0);
        for &(w, c) in doc.iter() {
            let m = &mut feature_max[w as usize];
            *m = m.max(c);
        }
    }

    let points = entries
        .into_iter()
        .map(|doc| {
            let (indices, mut values): (Vec<u32>, Vec<f64>) = doc
                .into_iter()
                .map(|(w, c)| (w, c / feature_max[w as usize]))
                .unzip();
            let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1.0 {
                values.iter_mut().for_each(|v| *v /= norm);
            }
            clamp_unit_norm(&mut values);
            SparsePoint { indices, values }
        })
        .collect();
    Dataset::new(vocab, points)
}
