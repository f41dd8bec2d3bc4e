use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Regression data: input rows `x` and targets `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::Config("dataset has no rows".into()));
        }
        if x.len() != y.len() {
            return Err(Error::Config(format!(
                "dataset has {} input rows but {} targets",
                x.len(),
                y.len()
            )));
        }
        let width = x[0].len();
        if x.iter().any(|row| row.len() != width) {
            return Err(Error::Config("dataset rows differ in width".into()));
        }
        if x.iter().flatten().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::Config("dataset contains non-finite values".into()));
        }
        Ok(Dataset { x, y })
    }

    /// `y = sqrt(x0)` with `x0` on 20 evenly spaced points of `[0, 4]` and
    /// `x1` drawn uniformly from `[0, 4]` with a fixed seed.
    pub fn sqrt_benchmark() -> Self {
        const N: usize = 20;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x: Vec<Vec<f64>> = (0..N)
            .map(|i| {
                let x0 = 4.0 * i as f64 / (N - 1) as f64;
                vec![x0, rng.gen_range(0.0..=4.0)]
            })
            .collect();
        let y = x.iter().map(|row| row[0].sqrt()).collect();
        Dataset::new(x, y).expect("benchmark dataset is valid")
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn targets(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Reads a CSV with header `x0,x1,...,y`.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
        let n = headers.len();
        let expected: Vec<String> = (0..n.saturating_sub(1))
            .map(|i| format!("x{i}"))
            .chain(std::iter::once("y".to_string()))
            .collect();
        if n < 2 || headers.iter().ne(expected.iter().map(String::as_str)) {
            return Err(Error::Parse(format!(
                "{}: expected header {}",
                path.display(),
                expected.join(",")
            )));
        }
        let mut x = Vec::new();
        let mut y = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::csv(path, e))?;
            let values = record
                .iter()
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|_| {
                        Error::Parse(format!("{}: `{v}` is not a number", path.display()))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            y.push(values[n - 1]);
            x.push(values[..n - 1].to_vec());
        }
        Dataset::new(x, y)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut writer = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        let width = self.x[0].len();
        let header: Vec<String> = (0..width)
            .map(|i| format!("x{i}"))
            .chain(std::iter::once("y".into()))
            .collect();
        writer.write_record(&header).map_err(|e| Error::csv(path, e))?;
        for (row, y) in self.x.iter().zip(&self.y) {
            let fields: Vec<String> = row.iter().chain(std::iter::once(y)).map(f64::to_string).collect();
            writer.write_record(&fields).map_err(|e| Error::csv(path, e))?;
        }
        writer.flush().map_err(|e| Error::io(path, e))
    }
}
