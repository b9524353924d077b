//! Brownian sample paths, their nonlocal derivatives, and Brownian-ReLU
//! activations.
//!
//! With the exponential rectangle kernel `rho_n = 2^n` on `[2^-n, 2^-(n-1)]`,
//! the nonlocal derivative `D_{n,v} W(x)` of a standard Brownian path is a
//! centred Gaussian with variance `2^{n+1} |v| (1 - ln 2)` independent of `x`.
//! Activations only ever need draws from these laws, so training never
//! simulates a path; [`simulate_path`] and [`path_ndd`] exist to verify the law.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::math::{exp2, sqrt};
use crate::quadrature::Quadrature;

const LN_2: f64 = core::f64::consts::LN_2;

/// Parameters `(n, v, α)` of a Brownian-ReLU unit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BrownianSpec {
    n: u32,
    v: f64,
    alpha: f64,
}

impl BrownianSpec {
    pub fn new(n: u32, v: f64, alpha: f64) -> Result<Self> {
        Kernel::exponential_rect(n)?;
        if !(v != 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument("direction v must be finite and nonzero"));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument("alpha must be finite and nonnegative"));
        }
        Ok(BrownianSpec { n, v, alpha })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        BrownianSpec::new(self.n, self.v, alpha)
    }

    /// `β = |v| (1 - ln 2)`.
    pub fn beta(&self) -> f64 {
        self.v.abs() * (1.0 - LN_2)
    }

    /// `Var[D_{n,v} W(x)] = 2^{n+1} β`.
    pub fn variance(&self) -> f64 {
        exp2(self.n as f64 + 1.0) * self.beta()
    }

    pub fn kernel(&self) -> Kernel {
        Kernel::exponential_rect(self.n).expect("index validated at construction")
    }
}

/// A Brownian path sampled on a strictly increasing grid starting at 0,
/// linearly interpolated in between.
#[derive(Clone, Debug, PartialEq)]
pub struct BrownianPath {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl BrownianPath {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::InvalidArgument(
                "path needs at least two grid points and one value per point",
            ));
        }
        if grid[0] != 0.0 || values[0] != 0.0 {
            return Err(Error::InvalidArgument("path must start at W(0) = 0"));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("grid must be strictly increasing"));
        }
        Ok(BrownianPath { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn x_max(&self) -> f64 {
        *self.grid.last().expect("nonempty grid")
    }

    pub fn max_spacing(&self) -> f64 {
        self.grid
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Index `i` of the grid cell `[grid[i], grid[i+1]]` holding `x`.
    fn cell(&self, x: f64) -> usize {
        let i = self.grid.partition_point(|&g| g <= x);
        i.saturating_sub(1).min(self.grid.len() - 2)
    }

    /// Linear interpolation; `x` must lie in `[0, x_max]`.
    pub fn at(&self, x: f64) -> f64 {
        let i = self.cell(x);
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let (w0, w1) = (self.values[i], self.values[i + 1]);
        w0 + (w1 - w0) * (x - x0) / (x1 - x0)
    }
}

/// Simulates `W` on `steps` equally spaced points of `[0, x_max]`.
pub fn simulate_path<R: Rng + ?Sized>(x_max: f64, steps: usize, rng: &mut R) -> Result<BrownianPath> {
    if steps < 2 {
        return Err(Error::InvalidArgument("steps must be at least 2"));
    }
    if !(x_max > 0.0 && x_max.is_finite()) {
        return Err(Error::InvalidArgument("x_max must be positive"));
    }
    let dx = x_max / (steps - 1) as f64;
    let sd = sqrt(dx);
    let mut grid = Vec::with_capacity(steps);
    let mut values = Vec::with_capacity(steps);
    let mut w = 0.0;
    for i in 0..steps {
        grid.push(if i + 1 == steps { x_max } else { i as f64 * dx });
        values.push(w);
        let z: f64 = rng.sample(StandardNormal);
        w += sd * z;
    }
    Ok(BrownianPath { grid, values })
}

/// `D_{n,v} W(x)` for one sample path.
///
/// The integrand `2^n (W(x + t v) - W(x)) / t` is integrated piece by piece
/// between the points where `x + t v` crosses the grid, using one panel of
/// `quad`'s rule per piece; the interpolant is linear on every piece.
///
/// Requires `x + t v` to stay on the grid for the whole kernel support and
/// a spacing of at most `|v| 2^-(n+3)`, i.e. eight cells across the support.
pub fn path_ndd(path: &BrownianPath, x: f64, spec: &BrownianSpec, quad: &Quadrature) -> Result<f64> {
    let kernel = spec.kernel();
    let (a, b) = kernel.rect_bounds().expect("exponential rectangle");
    let v = spec.v();
    let (lo, hi) = if v > 0.0 {
        (x + a * v, x + b * v)
    } else {
        (x + b * v, x + a * v)
    };
    let (grid_lo, grid_hi) = (path.grid[0], path.x_max());
    if !(grid_lo <= x && x <= grid_hi && grid_lo <= lo && hi <= grid_hi) {
        return Err(Error::OutsideGrid {
            lo,
            hi,
            grid_lo,
            grid_hi,
        });
    }
    let required = v.abs() * exp2(-(spec.n() as f64 + 3.0));
    let spacing = path.max_spacing();
    if spacing > required {
        return Err(Error::Resolution { spacing, required });
    }

    let w_x = path.at(x);
    let height = exp2(spec.n() as f64);
    // breakpoints in t where x + t v hits a grid node strictly inside (lo, hi)
    let first = path.grid.partition_point(|&g| g <= lo);
    let last = path.grid.partition_point(|&g| g < hi);
    let mut cuts: Vec<f64> = Vec::with_capacity(last.saturating_sub(first) + 2);
    cuts.push(a);
    let mut inner: Vec<f64> = path.grid[first..last].iter().map(|g| (g - x) / v).collect();
    if v < 0.0 {
        inner.reverse();
    }
    cuts.extend(inner.into_iter().filter(|&t| a < t && t < b));
    cuts.push(b);

    let rule = quad.rule();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += rule.integrate::<core::convert::Infallible>(w[0], w[1], |t| {
            Ok((path.at(x + t * v) - w_x) / t)
        })
        .unwrap_or_else(|never| match never {});
    }
    Ok(height * total)
}

/// Heaviside step used as the ReLU derivative: 1 for `z > 0`, else 0.
#[inline]
pub fn heaviside(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// `max(z, 0) + α W(z)` with `W(z) ~ N(0, |z|)` drawn afresh on each call.
/// With `α = 0` no randomness is consumed.
pub fn forward_activation<R: Rng + ?Sized>(z: f64, spec: &BrownianSpec, rng: &mut R) -> f64 {
    let relu = z.max(0.0);
    if spec.alpha == 0.0 {
        return relu;
    }
    let eps: f64 = rng.sample(StandardNormal);
    relu + spec.alpha * sqrt(z.abs()) * eps
}

/// `H(z) + α D_{n,v} W(z)` with `D_{n,v} W(z) ~ N(0, 2^{n+1} β)`.
/// With `α = 0` no randomness is consumed.
pub fn backward_activation<R: Rng + ?Sized>(z: f64, spec: &BrownianSpec, rng: &mut R) -> f64 {
    let h = heaviside(z);
    if spec.alpha == 0.0 {
        return h;
    }
    let eps: f64 = rng.sample(StandardNormal);
    h + spec.alpha * sqrt(spec.variance()) * eps
}
