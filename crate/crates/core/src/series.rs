use serde::Serialize;

use crate::error::{Error, Result};

/// Observable sampled on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries<T> {
    pub t: Vec<f64>,
    pub values: Vec<T>,
    pub observable: String,
    pub model_hash: Option<String>,
}

impl<T> TimeSeries<T> {
    pub fn new(observable: impl Into<String>, t: Vec<f64>, values: Vec<T>) -> Self {
        debug_assert_eq!(t.len(), values.len());
        Self {
            t,
            values,
            observable: observable.into(),
            model_hash: None,
        }
    }

    pub fn with_model_hash(mut self, hash: impl Into<String>) -> Self {
        self.model_hash = Some(hash.into());
        self
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &T)> {
        self.t.iter().copied().zip(self.values.iter())
    }
}

/// `n` uniformly spaced samples on `[start, end]`.
pub fn uniform_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let h = (end - start) / (n - 1) as f64;
            (0..n).map(|i| start + h * i as f64).collect()
        }
    }
}

/// Grid on `[-t_max, t_max]` with `2 * half + 1` points, exactly mirrored
/// about zero.
pub fn symmetric_grid(t_max: f64, half: usize) -> Vec<f64> {
    let h = t_max / half.max(1) as f64;
    let half = half as i64;
    (-half..=half).map(|i| h * i as f64).collect()
}

pub(crate) fn check_grid(t: &[f64], strict: bool) -> Result<()> {
    if t.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("time grid"));
    }
    let ok = t
        .windows(2)
        .all(|w| if strict { w[1] > w[0] } else { w[1] >= w[0] });
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInput("time grid must be increasing".into()))
    }
}
