//! Dense column-major node feature matrix with named, ordered columns.

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n: usize,
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    /// Empty matrix with `n` rows and no columns.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            names: Vec::new(),
            columns: Vec::new(),
        }
    }

    pub fn from_columns(
        n: usize,
        columns: impl IntoIterator<Item = (String, Vec<f64>)>,
    ) -> Result<Self> {
        let mut fm = Self::new(n);
        for (name, values) in columns {
            fm.push_column(name, values)?;
        }
        Ok(fm)
    }

    /// Appends a column. Rejects wrong lengths, duplicate names and
    /// non-finite values.
    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.n {
            return Err(Error::Shape {
                expected: self.n,
                got: values.len(),
            });
        }
        if self.names.contains(&name) {
            return Err(Error::InvalidArgument(format!("duplicate column {name:?}")));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "column {name:?} has non-finite value at row {i}"
            )));
        }
        self.names.push(name);
        self.columns.push(values);
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn column_by_name(&self, name: &str) -> Option<&[f64]> {
        self.position(name).map(|j| self.columns[j].as_slice())
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.names
            .iter()
            .zip(&self.columns)
            .map(|(n, c)| (n.as_str(), c.as_slice()))
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.columns[col][row]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// Matrix restricted to the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            n: rows.len(),
            names: self.names.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| rows.iter().map(|&r| c[r]).collect())
                .collect(),
        }
    }

    /// Stable identifier of the ordered column names. Two matrices with the
    /// same id can be fed to the same model.
    pub fn schema_id(&self) -> String {
        schema_id(&self.names)
    }
}

pub fn schema_id(names: &[String]) -> String {
    let mut h = Sha256::new();
    for name in names {
        h.update(name.as_bytes());
        h.update([0u8]);
    }
    let digest = h.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}
