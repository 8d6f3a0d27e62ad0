use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

/// A time-dependent vector field `Z(t, ·)` in chart components.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;

    /// Writes `Z(t, x)` into `out`.
    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]);

    fn value(&self, t: f64, x: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        self.eval(t, x, out.as_mut_slice());
        out
    }

    /// Spatial Jacobian, `J[(i, k)] = ∂Z^i / ∂x_k`.
    fn jacobian(&self, t: f64, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let mut jac = DMatrix::zeros(n, n);
        let mut xp = x.to_vec();
        for k in 0..n {
            let h = 1e-6 * x[k].abs().max(1.0);
            xp[k] = x[k] + h;
            let zp = self.value(t, &xp);
            xp[k] = x[k] - h;
            let zm = self.value(t, &xp);
            xp[k] = x[k];
            jac.set_column(k, &((zp - zm) / (2.0 * h)));
        }
        jac
    }

    /// `∂Z / ∂t`.
    fn time_derivative(&self, t: f64, x: &[f64]) -> DVector<f64> {
        let h = 1e-6 * t.abs().max(1.0);
        (self.value(t + h, x) - self.value(t - h, x)) / (2.0 * h)
    }

    /// Lets callers skip work for `Z ≡ 0`.
    fn is_zero(&self) -> bool {
        false
    }
}

impl<Z: VectorField + ?Sized> VectorField for &Z {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (**self).eval(t, x, out)
    }
    fn jacobian(&self, t: f64, x: &[f64]) -> DMatrix<f64> {
        (**self).jacobian(t, x)
    }
    fn time_derivative(&self, t: f64, x: &[f64]) -> DVector<f64> {
        (**self).time_derivative(t, x)
    }
    fn is_zero(&self) -> bool {
        (**self).is_zero()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroField(pub usize);

impl VectorField for ZeroField {
    fn dim(&self) -> usize {
        self.0
    }
    fn eval(&self, _t: f64, _x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
    }
    fn jacobian(&self, _t: f64, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::zeros(self.0, self.0)
    }
    fn time_derivative(&self, _t: f64, _x: &[f64]) -> DVector<f64> {
        DVector::zeros(self.0)
    }
    fn is_zero(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone)]
pub struct ConstantField(pub DVector<f64>);

impl VectorField for ConstantField {
    fn dim(&self) -> usize {
        self.0.len()
    }
    fn eval(&self, _t: f64, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(self.0.as_slice());
    }
    fn jacobian(&self, _t: f64, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::zeros(self.dim(), self.dim())
    }
    fn time_derivative(&self, _t: f64, _x: &[f64]) -> DVector<f64> {
        DVector::zeros(self.dim())
    }
}

/// Affine field `Z(x) = A x + b`.
#[derive(Debug, Clone)]
pub struct LinearField {
    pub matrix: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl LinearField {
    pub fn new(matrix: DMatrix<f64>, offset: DVector<f64>) -> Self {
        assert!(matrix.is_square() && matrix.nrows() == offset.len());
        Self { matrix, offset }
    }

    /// `Z(x) = x`.
    pub fn radial(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n), DVector::zeros(n))
    }
}

impl VectorField for LinearField {
    fn dim(&self) -> usize {
        self.offset.len()
    }
    fn eval(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut s = self.offset[i];
            for k in 0..n {
                s += self.matrix[(i, k)] * x[k];
            }
            out[i] = s;
        }
    }
    fn jacobian(&self, _t: f64, _x: &[f64]) -> DMatrix<f64> {
        self.matrix.clone()
    }
    fn time_derivative(&self, _t: f64, _x: &[f64]) -> DVector<f64> {
        DVector::zeros(self.dim())
    }
}

type FieldFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;

/// A field given by a closure; derivatives are finite differences.
#[derive(Clone)]
pub struct ClosureField {
    dim: usize,
    f: FieldFn,
}

impl ClosureField {
    pub fn new(dim: usize, f: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        Self { dim, f: Arc::new(f) }
    }
}

impl VectorField for ClosureField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.f)(t, x, out)
    }
}
