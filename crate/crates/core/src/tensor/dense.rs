use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Matrix;

/// Dense real tensor stored in column-major order (first index fastest).
///
/// Mode indices in this API are zero-based.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

/// Column-major strides for `shape`.
pub fn strides_of(shape: &[usize]) -> Vec<usize> {
    let mut strides = Vec::with_capacity(shape.len());
    let mut acc = 1;
    for &s in shape {
        strides.push(acc);
        acc *= s;
    }
    strides
}

fn check_shape(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() {
        return Err(Error::Dimension("tensor order must be at least 1".into()));
    }
    if let Some(k) = shape.iter().position(|&s| s == 0) {
        return Err(Error::Dimension(format!("mode {k} has size 0")));
    }
    Ok(shape.iter().product())
}

fn check_permutation(order: &[usize], d: usize) -> Result<()> {
    if order.len() != d {
        return Err(Error::Argument(format!(
            "permutation of length {} for an order-{d} tensor",
            order.len()
        )));
    }
    let mut seen = vec![false; d];
    for &o in order {
        if o >= d || seen[o] {
            return Err(Error::Argument(format!("{order:?} is not a permutation of 0..{d}")));
        }
        seen[o] = true;
    }
    Ok(())
}

/// Writes `data` (column-major `shape`) with modes reordered by `order`
/// into `out`. `order` must be a valid permutation.
pub(crate) fn permute_into<T: Copy>(data: &[T], shape: &[usize], order: &[usize], out: &mut [T]) {
    debug_assert_eq!(data.len(), out.len());
    let in_strides = strides_of(shape);
    // (extent, input stride) in output order, merging modes that stay adjacent
    let mut dims: Vec<(usize, usize)> = Vec::with_capacity(order.len());
    for &o in order {
        let (n, st) = (shape[o], in_strides[o]);
        if n == 1 {
            continue;
        }
        match dims.last_mut() {
            Some(last) if last.0 * last.1 == st => last.0 *= n,
            _ => dims.push((n, st)),
        }
    }
    if dims.len() <= 1 {
        out.copy_from_slice(data);
        return;
    }
    let (n0, s0) = dims[0];
    let (n1, s1) = dims[1];
    let outer = &dims[2..];
    let mut idx = vec![0usize; outer.len()];
    let mut base = 0usize;
    let mut chunks = out.chunks_exact_mut(n0 * n1);
    loop {
        let block = chunks.next().expect("block count matches the shape");
        for (j, col) in block.chunks_exact_mut(n0).enumerate() {
            let b = base + j * s1;
            for (i, v) in col.iter_mut().enumerate() {
                *v = data[b + i * s0];
            }
        }
        let mut k = 0;
        loop {
            if k == outer.len() {
                return;
            }
            idx[k] += 1;
            base += outer[k].1;
            if idx[k] < outer[k].0 {
                break;
            }
            base -= outer[k].1 * outer[k].0;
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Inverse of a permutation given as `out[k] = in[order[k]]`.
pub fn inverse_permutation(order: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; order.len()];
    for (k, &o) in order.iter().enumerate() {
        inv[o] = k;
    }
    inv
}

impl<T: Scalar> DenseTensor<T> {
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        let n = check_shape(&shape)?;
        if data.len() != n {
            return Err(Error::Dimension(format!(
                "shape {shape:?} needs {n} elements, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn filled(shape: Vec<usize>, value: T) -> Result<Self> {
        let n = check_shape(&shape)?;
        Ok(Self {
            shape,
            data: vec![value; n],
        })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        Self::filled(shape, T::zero())
    }

    pub fn ones(shape: Vec<usize>) -> Result<Self> {
        Self::filled(shape, T::one())
    }

    /// Builds a tensor by evaluating `f` at every multi-index, in linear order.
    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        let n = check_shape(&shape)?;
        let mut idx = vec![0usize; shape.len()];
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            data.push(f(&idx));
            for (k, i) in idx.iter_mut().enumerate() {
                *i += 1;
                if *i < shape[k] {
                    break;
                }
                *i = 0;
            }
        }
        Ok(Self { shape, data })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        let mut lin = 0;
        let mut stride = 1;
        for (&i, &s) in idx.iter().zip(&self.shape) {
            debug_assert!(i < s);
            lin += i * stride;
            stride *= s;
        }
        lin
    }

    pub fn get(&self, idx: &[usize]) -> T {
        self.data[self.linear_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: T) {
        let lin = self.linear_index(idx);
        self.data[lin] = v;
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, alpha: T) -> Self {
        self.map(|v| v * alpha)
    }

    pub fn cast<U: Scalar>(&self) -> DenseTensor<U> {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| U::of(v.to_f64_lossless())).collect(),
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::Dimension(format!(
                "shape mismatch: {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Element-wise product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: T, other: &Self) -> Result<()> {
        self.check_same_shape(other)?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + alpha * b;
        }
        Ok(())
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    /// `‖self − other‖_F`.
    pub fn distance(&self, other: &Self) -> Result<T> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<T>()
            .sqrt())
    }

    /// Reorders modes so that `out.shape[k] == self.shape[order[k]]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        check_permutation(order, self.order())?;
        let out_shape: Vec<usize> = order.iter().map(|&o| self.shape[o]).collect();
        let mut data = vec![T::zero(); self.data.len()];
        permute_into(&self.data, &self.shape, order, &mut data);
        Ok(Self {
            shape: out_shape,
            data,
        })
    }

    /// Reinterprets the linear data under a new shape.
    pub fn reshape(&self, new_shape: &[usize]) -> Result<Self> {
        self.clone().into_reshape(new_shape)
    }

    pub fn into_reshape(mut self, new_shape: &[usize]) -> Result<Self> {
        let n = check_shape(new_shape)?;
        if n != self.data.len() {
            return Err(Error::Dimension(format!(
                "cannot reshape {:?} ({} elements) to {new_shape:?} ({n} elements)",
                self.shape,
                self.data.len()
            )));
        }
        self.shape = new_shape.to_vec();
        Ok(self)
    }

    /// Mode-`d` unfolding: `I_d × Π_{k≠d} I_k`, remaining modes in ascending order.
    pub fn mode_unfold(&self, d: usize) -> Result<Matrix<T>> {
        if d >= self.order() {
            return Err(Error::Argument(format!(
                "mode {d} out of range for an order-{} tensor",
                self.order()
            )));
        }
        if self.order() == 1 {
            return Matrix::new(self.shape[0], 1, self.data.clone());
        }
        self.general_unfold(&[d])
    }

    /// Inverse of [`DenseTensor::mode_unfold`].
    pub fn mode_fold(m: &Matrix<T>, shape: &[usize], d: usize) -> Result<Self> {
        if d >= shape.len() {
            return Err(Error::Argument(format!(
                "mode {d} out of range for shape {shape:?}"
            )));
        }
        if shape.len() == 1 {
            return Self::new(shape.to_vec(), m.data().to_vec());
        }
        Self::general_fold(m, shape, &[d])
    }

    fn unfold_order(d: usize, row_modes: &[usize]) -> Result<Vec<usize>> {
        if row_modes.is_empty() || row_modes.len() >= d {
            return Err(Error::Argument(format!(
                "row modes {row_modes:?} must be a nonempty proper subset of 0..{d}"
            )));
        }
        let mut seen = vec![false; d];
        for &r in row_modes {
            if r >= d || seen[r] {
                return Err(Error::Argument(format!(
                    "row modes {row_modes:?} are not distinct modes of 0..{d}"
                )));
            }
            seen[r] = true;
        }
        let mut order = row_modes.to_vec();
        order.extend((0..d).filter(|k| !seen[*k]));
        Ok(order)
    }

    /// Matricization with `row_modes` (in the given order) on rows and the
    /// complement, ascending, on columns.
    pub fn general_unfold(&self, row_modes: &[usize]) -> Result<Matrix<T>> {
        let order = Self::unfold_order(self.order(), row_modes)?;
        let rows: usize = row_modes.iter().map(|&r| self.shape[r]).product();
        let cols = self.data.len() / rows;
        let p = self.permute(&order)?;
        Matrix::new(rows, cols, p.data)
    }

    /// Inverse of [`DenseTensor::general_unfold`] for a tensor of `shape`.
    pub fn general_fold(m: &Matrix<T>, shape: &[usize], row_modes: &[usize]) -> Result<Self> {
        check_shape(shape)?;
        let order = Self::unfold_order(shape.len(), row_modes)?;
        let permuted_shape: Vec<usize> = order.iter().map(|&o| shape[o]).collect();
        let rows: usize = row_modes.iter().map(|&r| shape[r]).product();
        let n: usize = shape.iter().product();
        if m.rows() != rows || m.rows() * m.cols() != n {
            return Err(Error::Dimension(format!(
                "{}×{} matrix cannot fold into {shape:?} with row modes {row_modes:?}",
                m.rows(),
                m.cols()
            )));
        }
        let t = Self::new(permuted_shape, m.data().to_vec())?;
        t.permute(&inverse_permutation(&order))
    }

    /// Views the tensor as a matrix whose rows merge the first `split` modes.
    pub fn to_matrix(&self, split: usize) -> Result<Matrix<T>> {
        if split > self.order() {
            return Err(Error::Argument(format!("split {split} beyond order {}", self.order())));
        }
        let rows: usize = self.shape[..split].iter().product();
        Matrix::new(rows, self.data.len() / rows, self.data.clone())
    }
}

/// Contracts `a` and `b` over paired modes (`a_axes[k]` with `b_axes[k]`).
///
/// The result carries the free modes of `a` in order followed by the free
/// modes of `b` in order. If no free modes remain the result has shape `[1]`.
pub fn tensordot<T: Scalar>(
    a: &DenseTensor<T>,
    a_axes: &[usize],
    b: &DenseTensor<T>,
    b_axes: &[usize],
) -> Result<DenseTensor<T>> {
    if a_axes.len() != b_axes.len() {
        return Err(Error::Argument("contracted axis lists differ in length".into()));
    }
    for (&i, &j) in a_axes.iter().zip(b_axes) {
        if i >= a.order() || j >= b.order() {
            return Err(Error::Argument(format!("axis pair ({i}, {j}) out of range")));
        }
        if a.shape[i] != b.shape[j] {
            return Err(Error::Structure(format!(
                "contracted modes disagree: {} vs {}",
                a.shape[i], b.shape[j]
            )));
        }
    }
    let a_free: Vec<usize> = (0..a.order()).filter(|k| !a_axes.contains(k)).collect();
    let b_free: Vec<usize> = (0..b.order()).filter(|k| !b_axes.contains(k)).collect();

    let mut a_order = a_free.clone();
    a_order.extend_from_slice(a_axes);
    let mut b_order = b_axes.to_vec();
    b_order.extend_from_slice(&b_free);

    let k: usize = a_axes.iter().map(|&i| a.shape[i]).product();
    let fa: usize = a_free.iter().map(|&i| a.shape[i]).product();
    let fb: usize = b_free.iter().map(|&i| b.shape[i]).product();

    let ap = a.permute(&a_order)?;
    let bp = b.permute(&b_order)?;
    let am = Matrix::new(fa, k, ap.data)?;
    let bm = Matrix::new(k, fb, bp.data)?;
    let c = am.matmul(&bm)?;

    let mut shape: Vec<usize> = a_free.iter().map(|&i| a.shape[i]).collect();
    shape.extend(b_free.iter().map(|&i| b.shape[i]));
    if shape.is_empty() {
        shape.push(1);
    }
    DenseTensor::new(shape, c.into_data())
}
