//! Named test polynomials with declared properties.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::counting::Dim;
use crate::error::{Error, Result};
use crate::polyring::{parse_polynomial, Polynomial};

const DEFAULT: &str = include_str!("../data/corpus.toml");

/// Declared outcome of the tameness condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tameness {
    #[serde(rename = "holds")]
    Holds,
    #[serde(rename = "fails")]
    Fails,
    #[serde(rename = "n/a")]
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub name: String,
    pub polynomial: String,
    pub n: usize,
    pub homogeneous: bool,
    /// Dimension of the critical locus: an integer or "-inf".
    pub delta_f: String,
    pub tameness: Tameness,
}

impl CorpusEntry {
    pub fn poly(&self) -> Result<Polynomial> {
        parse_polynomial(&self.polynomial, self.n)
    }

    pub fn expected_delta_f(&self) -> Result<Dim> {
        match self.delta_f.trim() {
            "-inf" => Ok(Dim::NegInfinity),
            s => s
                .parse()
                .map(Dim::Finite)
                .map_err(|_| Error::invalid(format!("entry {}: bad delta_f '{s}'", self.name))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    #[serde(rename = "entry")]
    pub entries: Vec<CorpusEntry>,
}

impl Corpus {
    /// Parses and validates a corpus file: polynomials must parse and the
    /// declared homogeneity must match.
    pub fn parse(text: &str) -> Result<Self> {
        let corpus: Corpus =
            toml::from_str(text).map_err(|e| Error::invalid(format!("corpus: {e}")))?;
        for e in &corpus.entries {
            let f = e.poly()?;
            if f.is_homogeneous().0 != e.homogeneous {
                return Err(Error::invalid(format!(
                    "entry {}: declared homogeneity is wrong",
                    e.name
                )));
            }
            e.expected_delta_f()?;
        }
        Ok(corpus)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The shipped corpus.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT).expect("the shipped corpus is valid")
    }

    /// `default` for the shipped corpus, otherwise a file path.
    pub fn select(name: &str) -> Result<Self> {
        if name == "default" {
            Ok(Self::builtin())
        } else {
            Self::load(Path::new(name))
        }
    }
}
