//! Nonlocal directional derivatives.
//!
//! For a scalar field `u`, a direction `v` and a kernel `rho_n`,
//!
//! ```text
//! D_{n,v} u(x) = ∫ Q(t) rho_n(t) dt,   Q(t) = (u(x + t v) - u(x)) / t
//! ```
//!
//! which is the expectation of the difference quotient `Q(T)` with
//! `T ~ rho_n`. It can therefore be evaluated either by fixed-order
//! quadrature over the kernel support or by Monte Carlo sampling of `T`.
//!
//! Fields are total on `R^dim`; extending a field by zero outside its natural
//! domain is the caller's job.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::kernels::{Family, Kernel};
use crate::math::{dot, sqrt};
use crate::quadrature::Quadrature;

/// A deterministic real-valued function on `R^dim`.
pub trait ScalarField {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
}

impl<T: ScalarField + ?Sized> ScalarField for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }
}

/// Adapts a closure into a [`ScalarField`].
#[derive(Clone, Copy)]
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnField { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64> ScalarField for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// `u(x) = ½ xᵀ A x + bᵀ x` with a dense symmetric `A` (row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct Quadratic {
    dim: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Quadratic {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let dim = b.len();
        if a.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: a.len(),
            });
        }
        Ok(Quadratic { dim, a, b })
    }

    pub fn diagonal(diag: &[f64], b: Vec<f64>) -> Result<Self> {
        let d = diag.len();
        let mut a = vec![0.0; d * d];
        for (i, &v) in diag.iter().enumerate() {
            a[i * d + i] = v;
        }
        Quadratic::new(a, b)
    }

    pub fn matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn linear_term(&self) -> &[f64] {
        &self.b
    }

    /// `A x + b`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.a
            .chunks_exact(self.dim)
            .zip(&self.b)
            .map(|(row, bi)| dot(row, x) + bi)
            .collect()
    }

    /// `vᵀ A v`.
    pub fn curvature(&self, v: &[f64]) -> f64 {
        self.a
            .chunks_exact(self.dim)
            .zip(v)
            .map(|(row, vi)| vi * dot(row, v))
            .sum()
    }

    /// The one-dimensional quadratic `t -> u(x + t v) - u(x)`. Its NDD at 0 in
    /// direction 1 equals `D_{n,v} u(x)` at `O(1)` cost per evaluation.
    pub fn restrict(&self, x: &[f64], v: &[f64]) -> Quadratic {
        let slope = dot(&self.gradient(x), v);
        Quadratic {
            dim: 1,
            a: vec![self.curvature(v)],
            b: vec![slope],
        }
    }
}

impl ScalarField for Quadratic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let quad: f64 = self
            .a
            .chunks_exact(self.dim)
            .zip(x)
            .map(|(row, xi)| xi * dot(row, x))
            .sum();
        0.5 * quad + dot(&self.b, x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Quadrature,
    MonteCarlo,
}

/// One evaluation of an expectation under `rho_n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NddEstimate {
    pub value: f64,
    pub method: Method,
    /// Number of Monte Carlo draws; 0 for quadrature.
    pub samples: usize,
    /// Sample standard deviation over `sqrt(samples)`; 0 for quadrature.
    pub std_error: f64,
}

impl NddEstimate {
    fn exact(value: f64) -> Self {
        NddEstimate {
            value,
            method: Method::Quadrature,
            samples: 0,
            std_error: 0.0,
        }
    }
}

/// How a nonlocal derivative is evaluated.
#[derive(Clone, Debug, PartialEq)]
pub enum Estimator {
    Quadrature(Quadrature),
    MonteCarlo { samples: usize },
}

impl Estimator {
    pub fn method(&self) -> Method {
        match self {
            Estimator::Quadrature(_) => Method::Quadrature,
            Estimator::MonteCarlo { .. } => Method::MonteCarlo,
        }
    }
}

/// Stacked direction vectors, one per row. Defaults to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSet {
    dim: usize,
    rows: Vec<f64>,
}

impl DirectionSet {
    pub fn identity(dim: usize) -> Self {
        let mut rows = vec![0.0; dim * dim];
        for i in 0..dim {
            rows[i * dim + i] = 1.0;
        }
        DirectionSet { dim, rows }
    }

    /// Row-major `dim x dim` matrix; every row must be nonzero.
    pub fn from_rows(dim: usize, rows: Vec<f64>) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: rows.len(),
            });
        }
        if rows.chunks_exact(dim).any(|r| r.iter().all(|&x| x == 0.0)) {
            return Err(Error::InvalidArgument("direction rows must be nonzero"));
        }
        Ok(DirectionSet { dim, rows })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }
}

/// Per-coordinate kernel indices `(n_1, .., n_N)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn uniform(n: u32, dim: usize) -> Self {
        MultiIndex(vec![n; dim])
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> Option<u32> {
        self.0.iter().copied().min()
    }

    /// One kernel per coordinate; fails if any entry is below the family minimum.
    pub fn kernels(&self, family: Family) -> Result<Vec<Kernel>> {
        self.0.iter().map(|&n| Kernel::new(family, n)).collect()
    }
}

fn check_dims(u: &impl ScalarField, x: &[f64], v: &[f64]) -> Result<()> {
    let d = u.dim();
    for got in [x.len(), v.len()] {
        if got != d {
            return Err(Error::DimensionMismatch { expected: d, got });
        }
    }
    Ok(())
}

/// Evaluates the difference quotient `Q(t)` reusing a scratch buffer.
struct Quotient<'a, U> {
    u: &'a U,
    x: &'a [f64],
    v: &'a [f64],
    base: f64,
    shifted: Vec<f64>,
}

impl<'a, U: ScalarField> Quotient<'a, U> {
    fn new(u: &'a U, x: &'a [f64], v: &'a [f64]) -> Result<Self> {
        let base = u.eval(x);
        if !base.is_finite() {
            return Err(Error::Evaluation { t: 0.0 });
        }
        Ok(Quotient {
            u,
            x,
            v,
            base,
            shifted: x.to_vec(),
        })
    }

    /// `u(x + t v)`.
    fn shifted_value(&mut self, t: f64) -> Result<f64> {
        for ((s, xi), vi) in self.shifted.iter_mut().zip(self.x).zip(self.v) {
            *s = xi + t * vi;
        }
        let val = self.u.eval(&self.shifted);
        if val.is_finite() {
            Ok(val)
        } else {
            Err(Error::Evaluation { t })
        }
    }

    fn at(&mut self, t: f64) -> Result<f64> {
        Ok((self.shifted_value(t)? - self.base) / t)
    }
}

/// `∫ f(t) rho(t) dt` by composite Gauss–Legendre over the kernel's quadrature
/// interval. Gaussian kernels are split at 0 so no node sits on `t = 0`.
pub fn kernel_expectation(
    kernel: &Kernel,
    quad: &Quadrature,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<f64> {
    let dom = kernel.quadrature_interval();
    if kernel.family().is_rectangle() {
        let height = kernel.pdf(0.5 * (dom.lo + dom.hi));
        Ok(height * quad.integrate(dom.lo, dom.hi, f)?)
    } else {
        let mut weighted = |t: f64| Ok(f(t)? * kernel.pdf(t));
        let left = quad.integrate(dom.lo, 0.0, &mut weighted)?;
        let right = quad.integrate(0.0, dom.hi, &mut weighted)?;
        Ok(left + right)
    }
}

/// `D_{n,v} u(x)` by quadrature.
pub fn ndd_quadrature(
    u: &impl ScalarField,
    x: &[f64],
    v: &[f64],
    kernel: &Kernel,
    quad: &Quadrature,
) -> Result<NddEstimate> {
    check_dims(u, x, v)?;
    let mut q = Quotient::new(u, x, v)?;
    let value = kernel_expectation(kernel, quad, |t| q.at(t))?;
    Ok(NddEstimate::exact(value))
}

/// Running mean and variance (Welford).
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Welford {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub(crate) fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub(crate) fn mean(&self) -> f64 {
        self.mean
    }

    pub(crate) fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub(crate) fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            sqrt(self.variance() / self.count as f64)
        }
    }

    fn estimate(&self) -> NddEstimate {
        NddEstimate {
            value: self.mean(),
            method: Method::MonteCarlo,
            samples: self.count,
            std_error: self.std_error(),
        }
    }
}

/// `D_{n,v} u(x)` as the sample mean of `Q(T_i)`, `T_i ~ rho_n`.
pub fn ndd_monte_carlo<R: Rng + ?Sized>(
    u: &impl ScalarField,
    x: &[f64],
    v: &[f64],
    kernel: &Kernel,
    samples: usize,
    rng: &mut R,
) -> Result<NddEstimate> {
    q_moment(u, x, v, kernel, 1, samples, rng)
}

/// Monte Carlo estimate of `E[Q(T)^k]`.
pub fn q_moment<R: Rng + ?Sized>(
    u: &impl ScalarField,
    x: &[f64],
    v: &[f64],
    kernel: &Kernel,
    k: u32,
    samples: usize,
    rng: &mut R,
) -> Result<NddEstimate> {
    if samples < 2 {
        return Err(Error::InvalidArgument("Monte Carlo needs at least two samples"));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("moment order must be at least 1"));
    }
    check_dims(u, x, v)?;
    let mut q = Quotient::new(u, x, v)?;
    let mut acc = Welford::default();
    for _ in 0..samples {
        let t = kernel.sample(rng);
        let qt = q.at(t)?;
        acc.push(crate::math::powi(qt, k as i32));
    }
    Ok(acc.estimate())
}

/// Evaluates one nonlocal directional derivative with the chosen estimator.
pub fn ndd<R: Rng + ?Sized>(
    u: &impl ScalarField,
    x: &[f64],
    v: &[f64],
    kernel: &Kernel,
    estimator: &Estimator,
    rng: &mut R,
) -> Result<NddEstimate> {
    match estimator {
        Estimator::Quadrature(quad) => ndd_quadrature(u, x, v, kernel, quad),
        Estimator::MonteCarlo { samples } => ndd_monte_carlo(u, x, v, kernel, *samples, rng),
    }
}

/// `∇_{n̄,V} u(x)`: component `i` is `D_{n_i, v_i} u(x)` with `v_i` the
/// `i`-th row of `directions`.
pub fn nonlocal_gradient<R: Rng + ?Sized>(
    u: &impl ScalarField,
    x: &[f64],
    idx: &MultiIndex,
    family: Family,
    directions: &DirectionSet,
    estimator: &Estimator,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let d = u.dim();
    for got in [x.len(), idx.len(), directions.dim()] {
        if got != d {
            return Err(Error::DimensionMismatch { expected: d, got });
        }
    }
    let kernels = idx.kernels(family)?;
    kernels
        .iter()
        .enumerate()
        .map(|(i, k)| Ok(ndd(u, x, directions.row(i), k, estimator, rng)?.value))
        .collect()
}

/// Nonlocal Taylor approximant `u(x0) + (x - x0)ᵀ ∇_{n̄} u(x0)`.
pub fn nonlocal_taylor<R: Rng + ?Sized>(
    u: &impl ScalarField,
    x0: &[f64],
    x: &[f64],
    idx: &MultiIndex,
    family: Family,
    estimator: &Estimator,
    rng: &mut R,
) -> Result<f64> {
    if x.len() != x0.len() {
        return Err(Error::DimensionMismatch {
            expected: x0.len(),
            got: x.len(),
        });
    }
    let grad = nonlocal_gradient(
        u,
        x0,
        idx,
        family,
        &DirectionSet::identity(u.dim()),
        estimator,
        rng,
    )?;
    let step: Vec<f64> = x.iter().zip(x0).map(|(a, b)| a - b).collect();
    Ok(u.eval(x0) + dot(&step, &grad))
}

/// The product-rule defect
///
/// ```text
/// b(u1, u2)(x) = ∫ [2 u1 u2 (x+tv) - u1(x) u2(x+tv) - u1(x+tv) u2(x)] rho(t) / t dt
/// ```
///
/// which satisfies `D(u1 u2) = ½ (u1 D u2 + u2 D u1 + b)`.
pub fn product_defect(
    u1: &impl ScalarField,
    u2: &impl ScalarField,
    x: &[f64],
    v: &[f64],
    kernel: &Kernel,
    quad: &Quadrature,
) -> Result<f64> {
    check_dims(u1, x, v)?;
    check_dims(u2, x, v)?;
    let mut q1 = Quotient::new(u1, x, v)?;
    let mut q2 = Quotient::new(u2, x, v)?;
    let (a0, b0) = (q1.base, q2.base);
    kernel_expectation(kernel, quad, |t| {
        let a = q1.shifted_value(t)?;
        let b = q2.shifted_value(t)?;
        Ok((2.0 * a * b - a0 * b - a * b0) / t)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Seed, Tag};

    fn square_1d() -> FnField<impl Fn(&[f64]) -> f64> {
        FnField::new(1, |x: &[f64]| x[0] * x[0])
    }

    #[test]
    fn restriction_matches_full_quadratic() {
        let u = Quadratic::new(vec![2.0, 0.5, 0.5, 1.0], vec![1.0, -1.0]).unwrap();
        let x = [0.3, -0.7];
        let v = [0.6, 0.8];
        let line = u.restrict(&x, &v);
        let k = Kernel::linear_rect(7).unwrap();
        let q = Quadrature::default();
        let full = ndd_quadrature(&u, &x, &v, &k, &q).unwrap().value;
        let short = ndd_quadrature(&line, &[0.0], &[1.0], &k, &q).unwrap().value;
        assert!((full - short).abs() < 1e-13);
    }

    #[test]
    fn constant_field_has_zero_derivative() {
        let u = FnField::new(2, |_: &[f64]| 7.0);
        let q = Quadrature::default();
        for k in [
            Kernel::gaussian(3).unwrap(),
            Kernel::linear_rect(4).unwrap(),
            Kernel::exponential_rect(5).unwrap(),
        ] {
            let est = ndd_quadrature(&u, &[0.3, -1.0], &[1.0, 2.0], &k, &q).unwrap();
            assert_eq!(est.value, 0.0);
        }
    }

    #[test]
    fn linear_field_is_exact() {
        let u = FnField::new(2, |x: &[f64]| x[0] - 2.0 * x[1]);
        let q = Quadrature::default();
        for k in [
            Kernel::gaussian(2).unwrap(),
            Kernel::linear_rect(7).unwrap(),
            Kernel::exponential_rect(3).unwrap(),
        ] {
            let est = ndd_quadrature(&u, &[0.5, 0.25], &[3.0, 1.0], &k, &q).unwrap();
            assert!((est.value - 1.0).abs() < 1e-12, "{k}: {}", est.value);
            let mut rng = Seed(1).stream(Tag::Sampling, 0);
            let mc = ndd_monte_carlo(&u, &[0.5, 0.25], &[3.0, 1.0], &k, 100, &mut rng).unwrap();
            assert!((mc.value - 1.0).abs() < 1e-12);
            assert!(mc.std_error < 1e-12);
        }
    }

    #[test]
    fn square_with_exponential_rectangle() {
        let k = Kernel::exponential_rect(3).unwrap();
        let est = ndd_quadrature(&square_1d(), &[1.0], &[1.0], &k, &Quadrature::default()).unwrap();
        assert!((est.value - 2.1875).abs() < 1e-13);
        assert_eq!(est.samples, 0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn abs_at_origin_is_one() {
        let u = FnField::new(1, |x: &[f64]| x[0].abs());
        for n in [1, 4, 20] {
            let k = Kernel::exponential_rect(n).unwrap();
            let mut rng = Seed(9).stream(Tag::Sampling, n as u64);
            let est = ndd_monte_carlo(&u, &[0.0], &[1.0], &k, 50, &mut rng).unwrap();
            assert_eq!(est.value, 1.0);
        }
    }

    #[test]
    fn non_finite_field_is_reported() {
        let u = FnField::new(1, |x: &[f64]| if x[0] > 1.1 { f64::NAN } else { x[0] });
        let k = Kernel::exponential_rect(1).unwrap();
        let err = ndd_quadrature(&u, &[1.0], &[1.0], &k, &Quadrature::default()).unwrap_err();
        assert!(matches!(err, Error::Evaluation { .. }));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let u = square_1d();
        let k = Kernel::exponential_rect(1).unwrap();
        let err = ndd_quadrature(&u, &[1.0, 2.0], &[1.0], &k, &Quadrature::default()).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 1, got: 2 });
        let mut rng = Seed(0).stream(Tag::Sampling, 0);
        assert!(ndd_monte_carlo(&u, &[1.0], &[1.0], &k, 1, &mut rng).is_err());
    }

    #[test]
    fn q_moment_of_linear_is_power_of_slope() {
        let u = FnField::new(2, |x: &[f64]| 2.0 * x[0] + x[1]);
        let k = Kernel::linear_rect(5).unwrap();
        let mut rng = Seed(3).stream(Tag::Sampling, 0);
        let est = q_moment(&u, &[0.0, 0.0], &[1.0, -0.5], &k, 2, 64, &mut rng).unwrap();
        assert!((est.value - 2.25).abs() < 1e-12);
        let c = FnField::new(2, |_: &[f64]| 1.0);
        let est = q_moment(&c, &[0.0, 0.0], &[1.0, -0.5], &k, 3, 64, &mut rng).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn gradient_of_linear_field_is_exact() {
        let u = FnField::new(3, |x: &[f64]| x[0] - 4.0 * x[1] + 0.5 * x[2]);
        let idx = MultiIndex::new(vec![2, 9, 40]);
        let mut rng = Seed(0).stream(Tag::Sampling, 0);
        let g = nonlocal_gradient(
            &u,
            &[1.0, 2.0, 3.0],
            &idx,
            Family::LinearRect,
            &DirectionSet::identity(3),
            &Estimator::Quadrature(Quadrature::default()),
            &mut rng,
        )
        .unwrap();
        for (gi, bi) in g.iter().zip([1.0, -4.0, 0.5]) {
            assert!((gi - bi).abs() < 1e-11);
        }
    }

    #[test]
    fn gradient_checks_index_length_and_family_minimum() {
        let u = FnField::new(2, |x: &[f64]| x[0]);
        let mut rng = Seed(0).stream(Tag::Sampling, 0);
        let est = Estimator::MonteCarlo { samples: 4 };
        let id = DirectionSet::identity(2);
        let err = nonlocal_gradient(&u, &[0.0, 0.0], &MultiIndex::new(vec![3]), Family::LinearRect, &id, &est, &mut rng);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
        let err = nonlocal_gradient(&u, &[0.0, 0.0], &MultiIndex::new(vec![3, 1]), Family::LinearRect, &id, &est, &mut rng);
        assert!(matches!(err, Err(Error::InvalidKernelIndex { .. })));
    }

    #[test]
    fn taylor_at_expansion_point_is_value() {
        let u = FnField::new(2, |x: &[f64]| x[0] * x[0] + x[1].sin());
        let mut rng = Seed(0).stream(Tag::Sampling, 0);
        let est = Estimator::Quadrature(Quadrature::default());
        let idx = MultiIndex::uniform(6, 2);
        let a = nonlocal_taylor(&u, &[0.4, 0.2], &[0.4, 0.2], &idx, Family::ExponentialRect, &est, &mut rng).unwrap();
        assert_eq!(a, u.eval(&[0.4, 0.2]));
    }

    #[test]
    fn taylor_example_with_square() {
        let mut rng = Seed(0).stream(Tag::Sampling, 0);
        let est = Estimator::Quadrature(Quadrature::default());
        let a = nonlocal_taylor(&square_1d(), &[1.0], &[1.5], &MultiIndex::new(vec![3]), Family::ExponentialRect, &est, &mut rng).unwrap();
        assert!((a - 2.09375).abs() < 1e-13);
    }

    #[test]
    fn product_defect_examples() {
        let k = Kernel::exponential_rect(3).unwrap();
        let q = Quadrature::default();
        let id = FnField::new(1, |x: &[f64]| x[0]);
        let b = product_defect(&id, &id, &[1.0], &[1.0], &k, &q).unwrap();
        assert!((b - 2.375).abs() < 1e-13);

        let c = FnField::new(1, |_: &[f64]| 3.0);
        let u2 = FnField::new(1, |x: &[f64]| x[0].exp());
        let b = product_defect(&c, &u2, &[0.2], &[1.0], &k, &q).unwrap();
        let d = ndd_quadrature(&u2, &[0.2], &[1.0], &k, &q).unwrap().value;
        assert!((b - 3.0 * d).abs() < 1e-12);
        let swapped = product_defect(&u2, &c, &[0.2], &[1.0], &k, &q).unwrap();
        assert!((b - swapped).abs() < 1e-12);
    }

    #[test]
    fn direction_rows_must_be_nonzero() {
        assert!(DirectionSet::from_rows(2, vec![1.0, 0.0, 0.0, 0.0]).is_err());
        assert!(DirectionSet::from_rows(2, vec![1.0, 0.0]).is_err());
        let v = DirectionSet::from_rows(2, vec![1.0, 1.0, 0.0, 2.0]).unwrap();
        assert_eq!(v.row(1), &[0.0, 2.0]);
    }

    #[test]
    fn quadratic_field_helpers() {
        let u = Quadratic::diagonal(&[2.0, 4.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(u.eval(&[1.0, 1.0]), 0.5 * (2.0 + 4.0) + 2.0);
        assert_eq!(u.gradient(&[1.0, 1.0]), vec![3.0, 5.0]);
        assert_eq!(u.curvature(&[1.0, 1.0]), 6.0);
        assert!(Quadratic::new(vec![1.0; 3], vec![0.0; 2]).is_err());
    }
}
