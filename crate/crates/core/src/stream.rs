//! Masked column samples as they arrive from a data stream.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// One incoming column with its observation mask.
///
/// Invariant: `values[i] == 0.0` wherever `observed[i]` is false, so that
/// `values` already equals the mask applied to the raw column and inner
/// products against it never pick up unobserved entries.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSample {
    values: DVector<f64>,
    observed: Vec<bool>,
}

impl StreamSample {
    /// Builds a sample from a raw column, zeroing unobserved entries.
    /// Observed entries must be finite.
    pub fn new(raw: DVector<f64>, observed: Vec<bool>) -> Result<Self> {
        if raw.len() != observed.len() {
            return Err(Error::dim(
                "stream sample",
                format!("{} mask entries", raw.len()),
                format!("{}", observed.len()),
            ));
        }
        let mut values = raw;
        for (i, seen) in observed.iter().enumerate() {
            if *seen {
                if !values[i].is_finite() {
                    return Err(Error::NonFinite { i, j: 0 });
                }
            } else {
                values[i] = 0.0;
            }
        }
        Ok(Self { values, observed })
    }

    /// Fully observed sample.
    pub fn full(raw: DVector<f64>) -> Result<Self> {
        let observed = vec![true; raw.len()];
        Self::new(raw, observed)
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    /// Masked values; zero wherever unobserved.
    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn observed(&self) -> &[bool] {
        &self.observed
    }

    pub fn is_observed(&self, i: usize) -> bool {
        self.observed[i]
    }

    pub fn observed_count(&self) -> usize {
        self.observed.iter().filter(|&&b| b).count()
    }

    pub fn observed_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.observed
            .iter()
            .enumerate()
            .filter_map(|(i, &seen)| seen.then_some(i))
    }

    /// Applies the mask of this sample to another vector (out of place).
    pub fn mask(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.dimension() {
            return Err(Error::dim(
                "mask",
                format!("length {}", self.dimension()),
                format!("length {}", v.len()),
            ));
        }
        let mut out = v.clone();
        for (i, seen) in self.observed.iter().enumerate() {
            if !seen {
                out[i] = 0.0;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn zeroes_unobserved_entries() {
        let s = StreamSample::new(dvector![1.0, 2.0, 3.0], vec![true, false, true]).unwrap();
        assert_eq!(s.values(), &dvector![1.0, 0.0, 3.0]);
        assert_eq!(s.observed_count(), 2);
        assert_eq!(s.observed_indices().collect::<Vec<_>>(), vec![0, 2]);
    }

    #[test]
    fn allows_nan_in_unobserved_slot() {
        let s = StreamSample::new(dvector![1.0, f64::NAN], vec![true, false]).unwrap();
        assert_eq!(s.values()[1], 0.0);
    }

    #[test]
    fn rejects_nan_in_observed_slot() {
        assert!(StreamSample::new(dvector![f64::NAN], vec![true]).is_err());
    }

    #[test]
    fn rejects_length_mismatch() {
        assert!(StreamSample::new(dvector![1.0, 2.0], vec![true]).is_err());
    }

    #[test]
    fn mask_projects_other_vectors() {
        let s = StreamSample::new(dvector![1.0, 2.0, 3.0], vec![false, true, false]).unwrap();
        let masked = s.mask(&dvector![9.0, 8.0, 7.0]).unwrap();
        assert_eq!(masked, dvector![0.0, 8.0, 0.0]);
    }
}
