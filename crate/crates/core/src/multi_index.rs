//! Multi-indices n in N_0^d selecting wave-packet basis elements.

use std::fmt;

use crate::error::{Error, Result};

/// Quantum multi-index `n = (n_1, ..., n_d)` with non-negative entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    entries: Vec<usize>,
}

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("multi-index must have at least one entry"));
        }
        Ok(MultiIndex { entries })
    }

    /// One-dimensional index.
    pub fn scalar(n: usize) -> Self {
        MultiIndex { entries: vec![n] }
    }

    /// The zero index (ground state) in dimension `d`.
    pub fn zero(d: usize) -> Self {
        MultiIndex {
            entries: vec![0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn get(&self, j: usize) -> usize {
        self.entries[j]
    }

    /// Total order |n| = sum of entries.
    pub fn total(&self) -> usize {
        self.entries.iter().sum()
    }

    /// All entries equal (includes every index when d = 1).
    pub fn is_uniform(&self) -> bool {
        self.entries.iter().all(|&e| e == self.entries[0])
    }

    /// Index with entry `j` increased by one.
    pub fn raised(&self, j: usize) -> Self {
        let mut entries = self.entries.clone();
        entries[j] += 1;
        MultiIndex { entries }
    }

    /// Index with entry `j` decreased by one, or an error at zero.
    pub fn lowered(&self, j: usize) -> Result<Self> {
        if self.entries[j] == 0 {
            return Err(Error::invalid(format!(
                "cannot lower component {j} of {self}"
            )));
        }
        let mut entries = self.entries.clone();
        entries[j] -= 1;
        Ok(MultiIndex { entries })
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}
