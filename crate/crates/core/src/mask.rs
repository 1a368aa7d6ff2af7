//! Binary observation masks.

use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{read_tensor, strides_of, write_tensor, DenseTensor};

/// Which entries of a tensor are observed; column-major like the data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationMask {
    shape: Vec<usize>,
    observed: Vec<bool>,
}

/// Observed entries of a mode unfolding, grouped by row.
#[derive(Clone, Debug)]
pub struct ModeEntries {
    /// `cols[i]`: observed column indices of row `i`, ascending.
    pub cols: Vec<Vec<usize>>,
    /// `linear[i]`: linear tensor indices matching `cols[i]`.
    pub linear: Vec<Vec<usize>>,
}

impl ObservationMask {
    pub fn new(shape: Vec<usize>, observed: Vec<bool>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::Dimension(format!("invalid mask shape {shape:?}")));
        }
        let n: usize = shape.iter().product();
        if observed.len() != n {
            return Err(Error::Dimension(format!(
                "mask of shape {shape:?} needs {n} entries, got {}",
                observed.len()
            )));
        }
        Ok(Self { shape, observed })
    }

    /// Everything observed.
    pub fn full(shape: Vec<usize>) -> Result<Self> {
        let n = shape.iter().product();
        Self::new(shape, vec![true; n])
    }

    /// Interprets a tensor with entries in `{0, 1}`.
    pub fn from_tensor<T: Scalar>(t: &DenseTensor<T>) -> Result<Self> {
        let observed = t
            .data()
            .iter()
            .map(|&v| {
                if v == T::one() {
                    Ok(true)
                } else if v == T::zero() {
                    Ok(false)
                } else {
                    Err(Error::Argument(format!("mask entry {v} is not 0 or 1")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(t.shape().to_vec(), observed)
    }

    pub fn to_tensor<T: Scalar>(&self) -> DenseTensor<T> {
        let data = self
            .observed
            .iter()
            .map(|&b| if b { T::one() } else { T::zero() })
            .collect();
        DenseTensor::new(self.shape.clone(), data).expect("mask shape is valid")
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_tensor(&read_tensor::<f64>(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_tensor(&self.to_tensor::<f64>(), path)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn observed(&self) -> &[bool] {
        &self.observed
    }

    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }

    pub fn count(&self) -> usize {
        self.observed.iter().filter(|&&b| b).count()
    }

    pub fn fraction(&self) -> f64 {
        self.count() as f64 / self.len() as f64
    }

    pub fn check_shape(&self, shape: &[usize]) -> Result<()> {
        if shape != self.shape.as_slice() {
            return Err(Error::Argument(format!(
                "mask shape {:?} does not match data shape {shape:?}",
                self.shape
            )));
        }
        Ok(())
    }

    /// Copy of `t` with unobserved entries set to zero.
    pub fn apply<T: Scalar>(&self, t: &DenseTensor<T>) -> Result<DenseTensor<T>> {
        self.check_shape(t.shape())?;
        let mut out = t.clone();
        for (v, &b) in out.data_mut().iter_mut().zip(&self.observed) {
            if !b {
                *v = T::zero();
            }
        }
        Ok(out)
    }

    /// Observed entries of the mode-`d` unfolding (remaining modes ascending).
    pub fn mode_entries(&self, d: usize) -> Result<ModeEntries> {
        if d >= self.shape.len() {
            return Err(Error::Argument(format!(
                "mode {d} out of range for an order-{} mask",
                self.shape.len()
            )));
        }
        let stride = strides_of(&self.shape)[d];
        let size = self.shape[d];
        let mut cols = vec![Vec::new(); size];
        let mut linear = vec![Vec::new(); size];
        for (p, _) in self.observed.iter().enumerate().filter(|(_, &b)| b) {
            let i = (p / stride) % size;
            let j = p % stride + (p / (stride * size)) * stride;
            cols[i].push(j);
            linear[i].push(p);
        }
        Ok(ModeEntries { cols, linear })
    }
}

/// `½ ‖P(x) − P(t)‖²` over the observed entries.
pub fn observed_objective<T: Scalar>(
    x: &DenseTensor<T>,
    t: &DenseTensor<T>,
    mask: &ObservationMask,
) -> Result<T> {
    mask.check_shape(x.shape())?;
    mask.check_shape(t.shape())?;
    let sum: T = x
        .data()
        .iter()
        .zip(t.data())
        .zip(mask.observed())
        .filter(|(_, &b)| b)
        .map(|((&a, &b), _)| (a - b) * (a - b))
        .sum();
    Ok(sum * T::of(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_examples() {
        let t = DenseTensor::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let full = ObservationMask::full(vec![2, 2]).unwrap();
        assert_eq!(observed_objective(&t, &t, &full).unwrap(), 0.0);
        let none = ObservationMask::new(vec![2, 2], vec![false; 4]).unwrap();
        let x = t.scale(7.0);
        assert_eq!(observed_objective(&x, &t, &none).unwrap(), 0.0);
        let one = ObservationMask::new(vec![2, 2], vec![false, true, false, false]).unwrap();
        let mut y = t.clone();
        y.set(&[1, 0], 4.0);
        assert_eq!(observed_objective(&y, &t, &one).unwrap(), 2.0);
    }

    #[test]
    fn mode_entries_match_unfolding() {
        let shape = vec![2, 3, 4];
        let observed: Vec<bool> = (0..24).map(|k| (k * 7) % 5 < 2).collect();
        let mask = ObservationMask::new(shape.clone(), observed).unwrap();
        let t = DenseTensor::from_fn(shape, |i| (i[0] + 10 * i[1] + 100 * i[2]) as f64).unwrap();
        let tm = mask.apply(&t).unwrap();
        for d in 0..3 {
            let unf = t.mode_unfold(d).unwrap();
            let munf = mask.to_tensor::<f64>().mode_unfold(d).unwrap();
            let e = mask.mode_entries(d).unwrap();
            for i in 0..unf.rows() {
                let want: Vec<usize> = (0..unf.cols()).filter(|&j| munf.get(i, j) == 1.0).collect();
                assert_eq!(e.cols[i], want);
                for (&j, &p) in e.cols[i].iter().zip(&e.linear[i]) {
                    assert_eq!(unf.get(i, j), tm.data()[p]);
                }
            }
        }
    }

    #[test]
    fn rejects_non_binary_tensor() {
        let t = DenseTensor::new(vec![2], vec![1.0, 0.5]).unwrap();
        assert!(matches!(ObservationMask::from_tensor(&t), Err(Error::Argument(_))));
    }
}
