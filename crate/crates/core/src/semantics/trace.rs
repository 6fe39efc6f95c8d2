use std::io::{Read, Write};

use thiserror::Error;

use crate::formula::{FeatureSchema, FormulaError};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("a trajectory needs at least one state")]
    Empty,
    #[error("state {index} has {found} entries, schema has {expected}")]
    DimensionMismatch {
        index: usize,
        found: usize,
        expected: usize,
    },
    #[error("state {index} has a non-finite entry in column `{feature}`")]
    NonFinite { index: usize, feature: String },
    #[error("time step must be positive and finite, got {0}")]
    InvalidDt(f64),
    #[error("bad header: {0}")]
    Header(#[from] FormulaError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}, column {column}: cannot read `{text}` as a number")]
    Number {
        row: usize,
        column: usize,
        text: String,
    },
}

/// A finite sequence of feature vectors sampled every `dt` seconds.
///
/// States are stored row-major; every entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    schema: FeatureSchema,
    data: Vec<f64>,
    dt: f64,
}

impl Trajectory {
    pub fn new(
        schema: FeatureSchema,
        states: impl IntoIterator<Item = Vec<f64>>,
        dt: f64,
    ) -> Result<Self, TraceError> {
        let mut builder = TrajectoryBuilder::new(schema, dt)?;
        for state in states {
            builder.push(&state)?;
        }
        builder.finish()
    }

    /// One-channel trajectory, handy for scalar signals.
    pub fn scalar(name: &str, values: &[f64]) -> Result<Self, TraceError> {
        let schema = FeatureSchema::new([name])?;
        Trajectory::new(schema, values.iter().map(|&v| vec![v]), 1.0)
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.schema.dimension()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn state(&self, i: usize) -> &[f64] {
        let d = self.schema.dimension();
        &self.data[i * d..(i + 1) * d]
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.schema.dimension())
    }

    pub fn value(&self, i: usize, column: usize) -> f64 {
        self.data[i * self.schema.dimension() + column]
    }

    /// Values of one channel over time.
    pub fn column(&self, column: usize) -> impl Iterator<Item = f64> + '_ {
        self.states().map(move |s| s[column])
    }

    /// Reads a CSV with a header row of feature names and one row per step.
    pub fn read_csv<R: Read>(reader: R, dt: f64) -> Result<Self, TraceError> {
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let schema = FeatureSchema::new(csv.headers()?.iter().map(str::to_string))?;
        let mut builder = TrajectoryBuilder::new(schema, dt)?;
        let mut row = Vec::new();
        for (r, record) in csv.records().enumerate() {
            let record = record?;
            row.clear();
            for (c, field) in record.iter().enumerate() {
                let value = field.parse::<f64>().map_err(|_| TraceError::Number {
                    row: r + 1,
                    column: c,
                    text: field.to_string(),
                })?;
                row.push(value);
            }
            builder.push(&row)?;
        }
        builder.finish()
    }

    /// Writes the header and one row per state; floats use the shortest
    /// representation that reads back exactly.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), TraceError> {
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record(self.schema.names())?;
        for state in self.states() {
            csv.write_record(state.iter().map(|v| v.to_string()))?;
        }
        csv.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Incremental construction of a [`Trajectory`], validating each state.
#[derive(Debug, Clone)]
pub struct TrajectoryBuilder {
    schema: FeatureSchema,
    data: Vec<f64>,
    dt: f64,
}

impl TrajectoryBuilder {
    pub fn new(schema: FeatureSchema, dt: f64) -> Result<Self, TraceError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(TraceError::InvalidDt(dt));
        }
        Ok(TrajectoryBuilder {
            schema,
            data: Vec::new(),
            dt,
        })
    }

    pub fn with_capacity(mut self, states: usize) -> Self {
        self.data.reserve(states * self.schema.dimension());
        self
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.schema.dimension()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn push(&mut self, state: &[f64]) -> Result<(), TraceError> {
        let index = self.len();
        let expected = self.schema.dimension();
        if state.len() != expected {
            return Err(TraceError::DimensionMismatch {
                index,
                found: state.len(),
                expected,
            });
        }
        if let Some(c) = state.iter().position(|v| !v.is_finite()) {
            return Err(TraceError::NonFinite {
                index,
                feature: self.schema.names()[c].clone(),
            });
        }
        self.data.extend_from_slice(state);
        Ok(())
    }

    pub fn finish(self) -> Result<Trajectory, TraceError> {
        if self.data.is_empty() {
            return Err(TraceError::Empty);
        }
        Ok(Trajectory {
            schema: self.schema,
            data: self.data,
            dt: self.dt,
        })
    }
}
