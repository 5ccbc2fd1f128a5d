//! Matrix file formats: Matrix Market coordinate form and a JSON triplet
//! form. Both use 1-based indices.

use super::{LinalgError, SparseMatrix};
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    triplets: Vec<(usize, usize, f64)>,
}

pub fn matrix_to_matrix_market(m: &SparseMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    out.push_str(&format!("{} {} {}\n", m.rows(), m.cols(), m.nnz()));
    for (i, j, v) in m.triplets() {
        out.push_str(&format!("{} {} {}\n", i + 1, j + 1, v));
    }
    out
}

pub fn matrix_from_matrix_market(text: &str) -> Result<SparseMatrix, LinalgError> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('%'));
    let header = lines
        .next()
        .ok_or_else(|| LinalgError::Format("empty matrix market file".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad_token(t)))
        .collect::<Result<_, _>>()?;
    if dims.len() != 3 {
        return Err(LinalgError::Format(format!(
            "expected 'rows cols nnz' header, got '{header}'"
        )));
    }
    let mut triplets = Vec::with_capacity(dims[2]);
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(LinalgError::Format(format!("bad entry line '{line}'")));
        }
        let i: usize = toks[0].parse().map_err(|_| bad_token(toks[0]))?;
        let j: usize = toks[1].parse().map_err(|_| bad_token(toks[1]))?;
        let v: f64 = toks[2].parse().map_err(|_| bad_token(toks[2]))?;
        if i < 1 || j < 1 {
            return Err(LinalgError::Format(format!(
                "indices are 1-based, got ({i},{j})"
            )));
        }
        triplets.push((i - 1, j - 1, v));
    }
    if triplets.len() != dims[2] {
        return Err(LinalgError::Format(format!(
            "header promised {} entries, found {}",
            dims[2],
            triplets.len()
        )));
    }
    SparseMatrix::from_triplets(dims[0], dims[1], triplets)
}

pub fn matrix_to_json(m: &SparseMatrix) -> String {
    let json = MatrixJson {
        rows: m.rows(),
        cols: m.cols(),
        triplets: m.triplets().map(|(i, j, v)| (i + 1, j + 1, v)).collect(),
    };
    serde_json::to_string_pretty(&json).expect("matrix serialization cannot fail")
}

pub fn matrix_from_json(text: &str) -> Result<SparseMatrix, LinalgError> {
    let json: MatrixJson =
        serde_json::from_str(text).map_err(|e| LinalgError::Format(e.to_string()))?;
    let triplets: Vec<_> = json
        .triplets
        .iter()
        .map(|&(i, j, v)| {
            if i < 1 || j < 1 {
                Err(LinalgError::Format(format!(
                    "indices are 1-based, got ({i},{j})"
                )))
            } else {
                Ok((i - 1, j - 1, v))
            }
        })
        .collect::<Result<_, _>>()?;
    SparseMatrix::from_triplets(json.rows, json.cols, triplets)
}

fn bad_token(t: &str) -> LinalgError {
    LinalgError::Format(format!("cannot parse '{t}'"))
}
