use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{sq_dist, TokenizerError};
use crate::scalar::Scalar;

/// Codes closer than this (L2) count as duplicates.
pub const DUPLICATE_CODE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodebookKind {
    Outline,
    Room,
}

/// `K × D` code matrix, row-major, immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook<T> {
    kind: CodebookKind,
    dim: usize,
    codes: Vec<T>,
}

#[derive(Debug, thiserror::Error)]
pub enum CodebookFileError {
    #[error("cannot access codebook {path}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed codebook JSON")]
    Json(#[from] serde_json::Error),
    #[error("codebook header says K={k}, D={d} but holds {len} values")]
    Shape { k: usize, d: usize, len: usize },
    #[error(transparent)]
    Invalid(#[from] TokenizerError),
}

#[derive(Serialize, Deserialize)]
struct CodebookFile {
    kind: CodebookKind,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "D")]
    d: usize,
    codes: Vec<f64>,
}

fn nine_digits(v: f64) -> f64 {
    format!("{v:.8e}").parse().expect("formatted float parses")
}

impl<T: Scalar> Codebook<T> {
    /// Validates shape and rejects coincident rows.
    pub fn new(kind: CodebookKind, dim: usize, codes: Vec<T>) -> Result<Self, TokenizerError> {
        if dim == 0 || codes.is_empty() || !codes.len().is_multiple_of(dim) {
            return Err(TokenizerError::EmptyCodebook);
        }
        let book = Self { kind, dim, codes };
        let eps2 = T::lit(DUPLICATE_CODE_EPS * DUPLICATE_CODE_EPS);
        for i in 0..book.k() {
            for j in i + 1..book.k() {
                if sq_dist(book.row(i), book.row(j)) <= eps2 {
                    return Err(TokenizerError::DuplicateCode(i, j));
                }
            }
        }
        Ok(book)
    }

    pub fn kind(&self) -> CodebookKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.codes.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn codes(&self) -> &[T] {
        &self.codes
    }

    fn row(&self, k: usize) -> &[T] {
        &self.codes[k * self.dim..(k + 1) * self.dim]
    }

    pub fn code(&self, k: usize) -> Option<&[T]> {
        (k < self.k()).then(|| self.row(k))
    }

    /// Index of and squared distance to the nearest code; lowest index wins ties.
    pub fn nearest(&self, f: &[T]) -> (usize, T) {
        let mut best = (0, T::infinity());
        for (k, c) in self.codes.chunks_exact(self.dim).enumerate() {
            let d = sq_dist(f, c);
            if d < best.1 {
                best = (k, d);
            }
        }
        best
    }

    /// JSON text with every value rounded to nine significant digits.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&CodebookFile {
            kind: self.kind,
            k: self.k(),
            d: self.dim,
            codes: self.codes.iter().map(|v| nine_digits(v.as_f64())).collect(),
        })
        .expect("codebook serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CodebookFileError> {
        let file: CodebookFile = serde_json::from_str(text)?;
        if file.d == 0 || file.k * file.d != file.codes.len() {
            return Err(CodebookFileError::Shape { k: file.k, d: file.d, len: file.codes.len() });
        }
        let codes = file.codes.into_iter().map(T::lit).collect();
        Ok(Self::new(file.kind, file.d, codes)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), CodebookFileError> {
        std::fs::write(path, self.to_json()).map_err(|source| CodebookFileError::Io { path: path.into(), source })
    }

    pub fn load(path: &Path) -> Result<Self, CodebookFileError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| CodebookFileError::Io { path: path.into(), source })?;
        Self::from_json(&text)
    }
}
