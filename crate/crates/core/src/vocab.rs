use std::fmt;

use crate::error::{Error, Result};

/// Ordered, closed set of command labels. Order defines class indices and
/// breaks argmax ties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary(Vec<String>);

impl Vocabulary {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::config("vocabulary must not be empty"));
        }
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || l.contains(',') || l.chars().any(char::is_whitespace) {
                return Err(Error::config(format!("invalid label '{l}'")));
            }
            if labels[..i].contains(l) {
                return Err(Error::config(format!("label '{l}' listed twice")));
            }
        }
        Ok(Self(labels))
    }

    /// The four direction commands of the reference corpus.
    pub fn commands() -> Self {
        Self(["left", "right", "up", "down"].map(String::from).to_vec())
    }

    pub fn parse(list: &str) -> Result<Self> {
        Self::new(list.split(',').map(str::trim))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.0.iter().position(|l| l == label)
    }

    pub fn label(&self, index: usize) -> &str {
        &self.0[index]
    }

    pub fn labels(&self) -> &[String] {
        &self.0
    }
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::commands()
    }
}

impl fmt::Display for Vocabulary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(","))
    }
}

/// Index of the largest score; the earliest index wins ties.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}
