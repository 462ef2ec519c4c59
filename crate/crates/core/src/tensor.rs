//! Minimal dense-tensor kernel.
//!
//! Tensors are row-major `Vec<E>` buffers with an explicit shape. Every
//! forward operation that the layers are built from lives here together with
//! its vector-Jacobian (backward) counterpart, plus the central-difference
//! gradient oracle used to verify those backwards.
//!
//! Two element types are supported: `f32` for training storage and `f64` for
//! gradient-check fidelity.

use crate::error::{Error, Result};

/// Element type of a tensor. Implemented for `f32` and `f64`.
pub trait Scalar:
    Copy
    + PartialOrd
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
    + std::ops::AddAssign
    + std::ops::SubAssign
    + std::ops::MulAssign
{
    const ZERO: Self;
    const ONE: Self;

    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn is_finite(self) -> bool;

    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn tanh(self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn max(self, other: Self) -> Self;
    fn min(self, other: Self) -> Self;

    fn sigmoid(self) -> Self {
        Self::ONE / (Self::ONE + (-self).exp())
    }
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const ZERO: Self = 0.0;
            const ONE: Self = 1.0;

            #[inline]
            fn from_f64(v: f64) -> Self {
                v as $t
            }
            #[inline]
            fn to_f64(self) -> f64 {
                self as f64
            }
            #[inline]
            fn is_finite(self) -> bool {
                <$t>::is_finite(self)
            }
            #[inline]
            fn exp(self) -> Self {
                <$t>::exp(self)
            }
            #[inline]
            fn ln(self) -> Self {
                <$t>::ln(self)
            }
            #[inline]
            fn tanh(self) -> Self {
                <$t>::tanh(self)
            }
            #[inline]
            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }
            #[inline]
            fn abs(self) -> Self {
                <$t>::abs(self)
            }
            #[inline]
            fn max(self, other: Self) -> Self {
                <$t>::max(self, other)
            }
            #[inline]
            fn min(self, other: Self) -> Self {
                <$t>::min(self, other)
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

/// Dense row-major tensor. The data length always equals the product of the
/// shape extents, and all extents are positive.
///
/// Construction through [`Tensor::new`] validates shape consistency and
/// element finiteness; the arithmetic in this module preserves finiteness on
/// finite inputs and is additionally guarded where accumulation could
/// overflow (softmax, cross-entropy clamping in the training module).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<E = f32> {
    shape: Vec<usize>,
    data: Vec<E>,
}

impl<E: Scalar> Tensor<E> {
    pub fn new(shape: Vec<usize>, data: Vec<E>) -> Result<Self> {
        let expected = checked_element_count(&shape)?;
        if expected != data.len() {
            return Err(Error::Domain(format!(
                "shape {:?} implies {} elements, got {}",
                shape,
                expected,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numeric {
                context: "tensor construction".into(),
                message: format!("non-finite element {bad}"),
            });
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let count = checked_element_count(&shape)?;
        Ok(Self {
            shape,
            data: vec![E::ZERO; count],
        })
    }

    pub fn filled(shape: Vec<usize>, value: E) -> Result<Self> {
        let count = checked_element_count(&shape)?;
        Ok(Self {
            shape,
            data: vec![value; count],
        })
    }

    /// Builds a tensor by calling `f` with the flat (row-major) index.
    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(usize) -> E) -> Result<Self> {
        let count = checked_element_count(&shape)?;
        Ok(Self {
            shape,
            data: (0..count).map(|i| f(i)).collect(),
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    /// Number of elements.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[E] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [E] {
        &mut self.data
    }

    /// Rows of a rank-2 tensor.
    pub fn rows(&self) -> usize {
        debug_assert_eq!(self.rank(), 2);
        self.shape[0]
    }

    /// Columns of a rank-2 tensor.
    pub fn cols(&self) -> usize {
        debug_assert_eq!(self.rank(), 2);
        self.shape[1]
    }

    /// Row `i` of a rank-2 tensor as a slice.
    pub fn row(&self, i: usize) -> &[E] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [E] {
        let c = self.cols();
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn get2(&self, i: usize, j: usize) -> E {
        debug_assert_eq!(self.rank(), 2);
        self.data[i * self.shape[1] + j]
    }

    pub fn set2(&mut self, i: usize, j: usize, v: E) {
        debug_assert_eq!(self.rank(), 2);
        self.data[i * self.shape[1] + j] = v;
    }

    pub fn get3(&self, i: usize, j: usize, k: usize) -> E {
        debug_assert_eq!(self.rank(), 3);
        self.data[(i * self.shape[1] + j) * self.shape[2] + k]
    }

    /// Elementwise conversion to another scalar width.
    pub fn cast<F: Scalar>(&self) -> Tensor<F> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| F::from_f64(v.to_f64())).collect(),
        }
    }

    pub fn fill(&mut self, value: E) {
        self.data.fill(value);
    }

    /// `self += other`, shapes must match.
    pub fn add_assign(&mut self, other: &Tensor<E>) -> Result<()> {
        self.check_same_shape("add_assign", other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
        Ok(())
    }

    /// `self += scale * other`, shapes must match.
    pub fn add_scaled(&mut self, other: &Tensor<E>, scale: E) -> Result<()> {
        self.check_same_shape("add_scaled", other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * *b;
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: E) {
        for v in &mut self.data {
            *v *= factor;
        }
    }

    /// Sum of squared elements, accumulated at 64-bit precision.
    pub fn squared_norm(&self) -> f64 {
        self.data.iter().map(|v| v.to_f64() * v.to_f64()).sum()
    }

    fn check_same_shape(&self, op: &'static str, other: &Tensor<E>) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                op,
                lhs: self.shape.clone(),
                rhs: other.shape.clone(),
            });
        }
        Ok(())
    }
}

fn checked_element_count(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() {
        return Err(Error::Domain("tensor shape must have at least one extent".into()));
    }
    let mut count = 1usize;
    for &extent in shape {
        if extent == 0 {
            return Err(Error::Domain(format!(
                "tensor shape {shape:?} has a zero extent; extents must be positive"
            )));
        }
        count = count.checked_mul(extent).ok_or_else(|| {
            Error::Domain(format!("tensor shape {shape:?} overflows the element count"))
        })?;
    }
    Ok(count)
}

/// Trainable tensor bundled with its gradient and the AdaDelta state
/// (decayed E[g²] and E[Δx²] accumulators). All four tensors share one shape
/// and the accumulators stay elementwise nonnegative.
#[derive(Debug, Clone)]
pub struct Parameter<E = f32> {
    pub value: Tensor<E>,
    pub grad: Tensor<E>,
    pub accum_sq_grad: Tensor<E>,
    pub accum_sq_delta: Tensor<E>,
}

impl<E: Scalar> Parameter<E> {
    pub fn new(value: Tensor<E>) -> Self {
        let shape = value.shape().to_vec();
        let zeros = Tensor::zeros(shape).expect("parameter shape already validated");
        Parameter {
            value,
            grad: zeros.clone(),
            accum_sq_grad: zeros.clone(),
            accum_sq_delta: zeros,
        }
    }

    pub fn shape(&self) -> &[usize] {
        self.value.shape()
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(E::ZERO);
    }

    pub fn cast<F: Scalar>(&self) -> Parameter<F> {
        Parameter {
            value: self.value.cast(),
            grad: self.grad.cast(),
            accum_sq_grad: self.accum_sq_grad.cast(),
            accum_sq_delta: self.accum_sq_delta.cast(),
        }
    }
}

/// Row-major matrix product of `a` (m×k) and `b` (k×n).
pub fn matmul<E: Scalar>(a: &Tensor<E>, b: &Tensor<E>) -> Result<Tensor<E>> {
    if a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0] {
        return Err(Error::ShapeMismatch {
            op: "matmul",
            lhs: a.shape().to_vec(),
            rhs: b.shape().to_vec(),
        });
    }
    let (m, k) = (a.shape()[0], a.shape()[1]);
    let n = b.shape()[1];
    let mut out = vec![E::ZERO; m * n];
    for i in 0..m {
        let a_row = a.row(i);
        let out_row = &mut out[i * n..(i + 1) * n];
        for (p, &a_ip) in a_row.iter().enumerate().take(k) {
            let b_row = b.row(p);
            for (o, &b_pj) in out_row.iter_mut().zip(b_row) {
                *o += a_ip * b_pj;
            }
        }
    }
    Tensor::new(vec![m, n], out)
}

/// Backward of `c = a·b`: given dL/dc, returns (dL/da, dL/db).
pub fn matmul_backward<E: Scalar>(
    a: &Tensor<E>,
    b: &Tensor<E>,
    d_out: &Tensor<E>,
) -> Result<(Tensor<E>, Tensor<E>)> {
    let (m, k) = (a.shape()[0], a.shape()[1]);
    let n = b.shape()[1];
    if d_out.shape() != [m, n] {
        return Err(Error::ShapeMismatch {
            op: "matmul_backward",
            lhs: d_out.shape().to_vec(),
            rhs: vec![m, n],
        });
    }
    // da = d_out · bᵀ ; db = aᵀ · d_out
    let mut da = vec![E::ZERO; m * k];
    let mut db = vec![E::ZERO; k * n];
    for i in 0..m {
        let d_row = d_out.row(i);
        let a_row = a.row(i);
        for p in 0..k {
            let b_row = b.row(p);
            let mut acc = E::ZERO;
            for (dv, bv) in d_row.iter().zip(b_row) {
                acc += *dv * *bv;
            }
            da[i * k + p] = acc;
            let a_ip = a_row[p];
            let db_row = &mut db[p * n..(p + 1) * n];
            for (dbv, dv) in db_row.iter_mut().zip(d_row) {
                *dbv += a_ip * *dv;
            }
        }
    }
    Ok((Tensor::new(vec![m, k], da)?, Tensor::new(vec![k, n], db)?))
}

/// Matrix (m×k) times vector (k), the workhorse of the recurrent layers.
pub fn matvec<E: Scalar>(w: &Tensor<E>, x: &[E]) -> Result<Vec<E>> {
    if w.rank() != 2 || w.shape()[1] != x.len() {
        return Err(Error::ShapeMismatch {
            op: "matvec",
            lhs: w.shape().to_vec(),
            rhs: vec![x.len()],
        });
    }
    let m = w.shape()[0];
    let mut out = vec![E::ZERO; m];
    for (i, o) in out.iter_mut().enumerate() {
        let row = w.row(i);
        let mut acc = E::ZERO;
        for (wv, xv) in row.iter().zip(x) {
            acc += *wv * *xv;
        }
        *o = acc;
    }
    Ok(out)
}

/// Numerically stable softmax over a slice: the maximum is subtracted before
/// exponentiation, so arbitrarily large equal scores stay finite. Entries that
/// are `-inf` map to exactly zero, which is how masked positions are dropped.
pub fn softmax_slice<E: Scalar>(scores: &[E]) -> Result<Vec<E>> {
    if scores.is_empty() {
        return Err(Error::Domain("softmax of an empty score list".into()));
    }
    let mut max = scores[0];
    for &s in &scores[1..] {
        max = max.max(s);
    }
    let mut out: Vec<E> = scores.iter().map(|&s| (s - max).exp()).collect();
    let mut sum = E::ZERO;
    for &v in &out {
        sum += v;
    }
    for v in &mut out {
        *v = *v / sum;
    }
    Ok(out)
}

/// Softmax of a rank-1 tensor.
pub fn softmax<E: Scalar>(scores: &Tensor<E>) -> Result<Tensor<E>> {
    if scores.rank() != 1 {
        return Err(Error::Domain(format!(
            "softmax expects a rank-1 tensor, got shape {:?}",
            scores.shape()
        )));
    }
    Tensor::new(scores.shape().to_vec(), softmax_slice(scores.data())?)
}

/// Backward of `y = softmax(z)`: given y and dL/dy, returns dL/dz.
pub fn softmax_backward<E: Scalar>(y: &[E], d_y: &[E]) -> Vec<E> {
    debug_assert_eq!(y.len(), d_y.len());
    let mut dot = E::ZERO;
    for (yv, dv) in y.iter().zip(d_y) {
        dot += *yv * *dv;
    }
    y.iter().zip(d_y).map(|(&yv, &dv)| yv * (dv - dot)).collect()
}

/// Valid (no padding) 1-D convolution.
///
/// `seq` is L×D, `filters` is F×w×D, `bias` is F; the output is (L−w+1)×F with
/// `out[t][f] = bias[f] + Σ_{j<w, d<D} seq[t+j][d] · filters[f][j][d]`.
pub fn conv1d_valid<E: Scalar>(
    seq: &Tensor<E>,
    filters: &Tensor<E>,
    bias: &Tensor<E>,
) -> Result<Tensor<E>> {
    let (l, d) = conv_check_shapes(seq, filters, bias)?;
    let (f_count, width) = (filters.shape()[0], filters.shape()[1]);
    if l < width {
        return Err(Error::SequenceTooShort { len: l, width });
    }
    let t_len = l - width + 1;
    let mut out = vec![E::ZERO; t_len * f_count];
    let window = width * d;
    for t in 0..t_len {
        let seq_window = &seq.data()[t * d..t * d + window];
        let out_row = &mut out[t * f_count..(t + 1) * f_count];
        for (f, o) in out_row.iter_mut().enumerate() {
            let filter = &filters.data()[f * window..(f + 1) * window];
            let mut acc = bias.data()[f];
            for (sv, fv) in seq_window.iter().zip(filter) {
                acc += *sv * *fv;
            }
            *o = acc;
        }
    }
    Tensor::new(vec![t_len, f_count], out)
}

/// Backward of [`conv1d_valid`]: given dL/dout, accumulates into the three
/// gradient buffers (which must already have the right shapes).
pub fn conv1d_valid_backward<E: Scalar>(
    seq: &Tensor<E>,
    filters: &Tensor<E>,
    d_out: &Tensor<E>,
    d_seq: &mut Tensor<E>,
    d_filters: &mut Tensor<E>,
    d_bias: &mut Tensor<E>,
) -> Result<()> {
    let (l, d) = (seq.shape()[0], seq.shape()[1]);
    let (f_count, width) = (filters.shape()[0], filters.shape()[1]);
    let t_len = l - width + 1;
    if d_out.shape() != [t_len, f_count] {
        return Err(Error::ShapeMismatch {
            op: "conv1d_valid_backward",
            lhs: d_out.shape().to_vec(),
            rhs: vec![t_len, f_count],
        });
    }
    let window = width * d;
    for t in 0..t_len {
        let d_row = d_out.row(t);
        for (f, &g) in d_row.iter().enumerate() {
            d_bias.data_mut()[f] += g;
            let filter = &filters.data()[f * window..(f + 1) * window];
            let seq_window = &seq.data()[t * d..t * d + window];
            let d_filter = &mut d_filters.data_mut()[f * window..(f + 1) * window];
            for ((df, sv), _) in d_filter.iter_mut().zip(seq_window).zip(filter) {
                *df += g * *sv;
            }
            let d_seq_window = &mut d_seq.data_mut()[t * d..t * d + window];
            for (ds, fv) in d_seq_window.iter_mut().zip(filter) {
                *ds += g * *fv;
            }
        }
    }
    Ok(())
}

/// Per-column maximum of a T×F feature map, with the winning row recorded per
/// column so the backward can route gradient exactly. Ties break toward the
/// smallest row index.
pub fn max_over_time<E: Scalar>(featmap: &Tensor<E>) -> Result<(Tensor<E>, Vec<usize>)> {
    if featmap.rank() != 2 {
        return Err(Error::Domain(format!(
            "max_over_time expects a rank-2 tensor, got shape {:?}",
            featmap.shape()
        )));
    }
    let (t_len, f_count) = (featmap.rows(), featmap.cols());
    if t_len == 0 {
        return Err(Error::Domain("max_over_time over zero time steps".into()));
    }
    let mut maxima = featmap.row(0).to_vec();
    let mut argmax = vec![0usize; f_count];
    for t in 1..t_len {
        for (f, &v) in featmap.row(t).iter().enumerate() {
            if v > maxima[f] {
                maxima[f] = v;
                argmax[f] = t;
            }
        }
    }
    Ok((Tensor::new(vec![f_count], maxima)?, argmax))
}

/// Backward of [`max_over_time`]: gradient flows only to the recorded argmax
/// cells; every other cell receives exactly zero.
pub fn max_over_time_backward<E: Scalar>(
    argmax: &[usize],
    d_out: &[E],
    t_len: usize,
) -> Result<Tensor<E>> {
    if argmax.len() != d_out.len() {
        return Err(Error::ShapeMismatch {
            op: "max_over_time_backward",
            lhs: vec![argmax.len()],
            rhs: vec![d_out.len()],
        });
    }
    let f_count = argmax.len();
    let mut d_featmap = Tensor::zeros(vec![t_len, f_count])?;
    for (f, (&t, &g)) in argmax.iter().zip(d_out).enumerate() {
        d_featmap.data_mut()[t * f_count + f] = g;
    }
    Ok(d_featmap)
}

/// Central-difference gradient of a scalar-valued function at `x`:
/// `(f(x + eps·eᵢ) − f(x − eps·eᵢ)) / (2·eps)` per coordinate, with the
/// difference quotient evaluated at 64-bit precision.
pub fn finite_diff_grad<E: Scalar>(
    mut f: impl FnMut(&Tensor<E>) -> Result<E>,
    x: &Tensor<E>,
    eps: f64,
) -> Result<Tensor<E>> {
    if eps <= 0.0 {
        return Err(Error::Domain(format!("finite-difference eps must be positive, got {eps}")));
    }
    let mut probe = x.clone();
    let mut grad = Tensor::zeros(x.shape().to_vec())?;
    for i in 0..x.len() {
        let original = probe.data()[i];
        probe.data_mut()[i] = original + E::from_f64(eps);
        let plus = f(&probe)?.to_f64();
        probe.data_mut()[i] = original - E::from_f64(eps);
        let minus = f(&probe)?.to_f64();
        probe.data_mut()[i] = original;
        let slope = (plus - minus) / (2.0 * eps);
        if !slope.is_finite() {
            return Err(Error::Numeric {
                context: "finite_diff_grad".into(),
                message: format!("non-finite difference quotient at flat index {i}"),
            });
        }
        grad.data_mut()[i] = E::from_f64(slope);
    }
    Ok(grad)
}

fn conv_check_shapes<E: Scalar>(
    seq: &Tensor<E>,
    filters: &Tensor<E>,
    bias: &Tensor<E>,
) -> Result<(usize, usize)> {
    if seq.rank() != 2 || filters.rank() != 3 || bias.rank() != 1 {
        return Err(Error::ShapeMismatch {
            op: "conv1d_valid",
            lhs: seq.shape().to_vec(),
            rhs: filters.shape().to_vec(),
        });
    }
    let (l, d) = (seq.shape()[0], seq.shape()[1]);
    if filters.shape()[2] != d || bias.shape()[0] != filters.shape()[0] {
        return Err(Error::ShapeMismatch {
            op: "conv1d_valid",
            lhs: seq.shape().to_vec(),
            rhs: filters.shape().to_vec(),
        });
    }
    Ok((l, d))
}
