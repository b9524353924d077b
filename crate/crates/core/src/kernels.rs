//! Interaction-kernel density sequences `rho_n`.
//!
//! Three families are provided:
//!
//! * `gaussian`: `rho_n(t) = n / sqrt(2 pi) * exp(-n^2 t^2 / 2)`, `n >= 1`;
//! * `linrect`: `rho_n = n (n - 1)` on `[1/n, 1/(n-1)]`, `n >= 2`;
//! * `exprect`: `rho_n = 2^n` on `[2^-n, 2^-(n-1)]`, `n >= 1`.
//!
//! The rectangle families are one-sided and bounded away from zero, so
//! difference quotients against them never touch `t = 0`.

use core::fmt;
use core::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::math::{erfc, exp, exp2, powi, sqrt};

const SQRT_2: f64 = core::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Gaussian effective support in units of the standard deviation `1/n`.
pub const GAUSSIAN_SUPPORT_SIGMAS: f64 = 6.0;
/// Gaussian quadrature domain in standard deviations; the mass beyond it is
/// below double precision resolution.
pub const GAUSSIAN_QUADRATURE_SIGMAS: f64 = 9.0;
/// Largest exponential-rectangle index whose density `2^n` is representable.
pub const EXPONENTIAL_RECT_MAX_INDEX: u32 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Gaussian,
    LinearRect,
    ExponentialRect,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Gaussian, Family::LinearRect, Family::ExponentialRect];

    pub fn min_index(self) -> u32 {
        match self {
            Family::LinearRect => 2,
            Family::Gaussian | Family::ExponentialRect => 1,
        }
    }

    pub fn max_index(self) -> u32 {
        match self {
            Family::ExponentialRect => EXPONENTIAL_RECT_MAX_INDEX,
            Family::Gaussian | Family::LinearRect => u32::MAX,
        }
    }

    /// Short name used in kernel spec strings.
    pub fn tag(self) -> &'static str {
        match self {
            Family::Gaussian => "gauss",
            Family::LinearRect => "linrect",
            Family::ExponentialRect => "exprect",
        }
    }

    pub fn is_rectangle(self) -> bool {
        !matches!(self, Family::Gaussian)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gauss" | "gaussian" => Ok(Family::Gaussian),
            "linrect" | "linear_rect" | "linear" => Ok(Family::LinearRect),
            "exprect" | "exponential_rect" | "exponential" => Ok(Family::ExponentialRect),
            _ => Err(Error::UnknownFamily(s.into())),
        }
    }
}

/// Closed real interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }
}

/// One member `rho_n` of a kernel family. Construction validates the index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Kernel {
    family: Family,
    n: u32,
}

impl Kernel {
    pub fn new(family: Family, n: u32) -> Result<Self> {
        if n < family.min_index() || n > family.max_index() {
            return Err(Error::InvalidKernelIndex {
                family,
                n,
                min: family.min_index(),
                max: family.max_index(),
            });
        }
        Ok(Kernel { family, n })
    }

    pub fn gaussian(n: u32) -> Result<Self> {
        Kernel::new(Family::Gaussian, n)
    }

    pub fn linear_rect(n: u32) -> Result<Self> {
        Kernel::new(Family::LinearRect, n)
    }

    pub fn exponential_rect(n: u32) -> Result<Self> {
        Kernel::new(Family::ExponentialRect, n)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `[a, b]` for the rectangle families.
    pub fn rect_bounds(&self) -> Option<(f64, f64)> {
        let n = self.n as f64;
        match self.family {
            Family::Gaussian => None,
            Family::LinearRect => Some((1.0 / n, 1.0 / (n - 1.0))),
            Family::ExponentialRect => Some((exp2(-n), exp2(-(n - 1.0)))),
        }
    }

    /// Height of the rectangle density, `1 / (b - a)`.
    fn rect_height(&self) -> f64 {
        let n = self.n as f64;
        match self.family {
            Family::LinearRect => n * (n - 1.0),
            Family::ExponentialRect => exp2(n),
            Family::Gaussian => unreachable!("gaussian kernels have no rectangle height"),
        }
    }

    pub fn pdf(&self, t: f64) -> f64 {
        match self.rect_bounds() {
            Some((a, b)) => {
                if a <= t && t <= b {
                    self.rect_height()
                } else {
                    0.0
                }
            }
            None => {
                let n = self.n as f64;
                n * INV_SQRT_2PI * exp(-0.5 * n * n * t * t)
            }
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        match self.rect_bounds() {
            Some((a, b)) => ((t - a) / (b - a)).clamp(0.0, 1.0),
            None => 0.5 * erfc(-(self.n as f64) * t / SQRT_2),
        }
    }

    /// Interval carrying all but a negligible fraction (< 1e-8) of the mass.
    /// Exact for the rectangle families; `±6/n` for the Gaussian.
    pub fn support(&self) -> Interval {
        self.support_with(GAUSSIAN_SUPPORT_SIGMAS)
    }

    /// Integration domain used by quadrature. Equals [`Kernel::support`] for
    /// rectangles and widens the Gaussian to `±9/n`.
    pub fn quadrature_interval(&self) -> Interval {
        self.support_with(GAUSSIAN_QUADRATURE_SIGMAS)
    }

    fn support_with(&self, sigmas: f64) -> Interval {
        match self.rect_bounds() {
            Some((lo, hi)) => Interval { lo, hi },
            None => {
                let h = sigmas / self.n as f64;
                Interval { lo: -h, hi: h }
            }
        }
    }

    /// Draws `T ~ rho_n`: inverse CDF for rectangles, scaled normal otherwise.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.rect_bounds() {
            Some((a, b)) => {
                let u: f64 = rng.random();
                a + (b - a) * u
            }
            None => {
                let z: f64 = rng.sample(StandardNormal);
                z / self.n as f64
            }
        }
    }

    /// `Tail_delta(rho_n)`: probability mass at `|t| > delta`.
    pub fn tail(&self, delta: f64) -> Result<f64> {
        if !(delta > 0.0) {
            return Err(Error::InvalidArgument("tail location must be positive"));
        }
        Ok(match self.rect_bounds() {
            Some((a, b)) => {
                if delta >= b {
                    0.0
                } else if delta <= a {
                    1.0
                } else {
                    (b - delta) / (b - a)
                }
            }
            None => erfc(self.n as f64 * delta / SQRT_2),
        })
    }

    /// `E[T^k]` under `rho_n`.
    ///
    /// Rectangles use `(b^{k+1} - a^{k+1}) / ((k+1)(b-a))` expanded as
    /// `sum_j a^{k-j} b^j / (k+1)`, which avoids cancellation when the
    /// rectangle is narrow. Gaussian moments are `0` for odd `k` and
    /// `(k-1)!! / n^k` for even `k`.
    pub fn moment(&self, k: u32) -> Result<f64> {
        if k == 0 {
            return Err(Error::InvalidArgument("moment order must be at least 1"));
        }
        Ok(match self.rect_bounds() {
            Some((a, b)) => {
                let sum: f64 = (0..=k)
                    .map(|j| powi(a, (k - j) as i32) * powi(b, j as i32))
                    .sum();
                sum / (k as f64 + 1.0)
            }
            None => {
                if k % 2 == 1 {
                    0.0
                } else {
                    let n = self.n as f64;
                    let mut double_fact = 1.0;
                    let mut j = k as i64 - 1;
                    while j > 1 {
                        double_fact *= j as f64;
                        j -= 2;
                    }
                    double_fact / powi(n, k as i32)
                }
            }
        })
    }

    /// Standard deviation of `T`.
    pub fn std_dev(&self) -> f64 {
        let m1 = self.moment(1).unwrap_or(0.0);
        let m2 = self.moment(2).unwrap_or(0.0);
        sqrt((m2 - m1 * m1).max(0.0))
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.family, self.n)
    }
}

/// Parses `"family:n"`, e.g. `"exprect:8"`.
impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (fam, n) = s
            .split_once(':')
            .ok_or_else(|| Error::MalformedKernelSpec(s.into()))?;
        let family: Family = fam.parse()?;
        let n: u32 = n
            .trim()
            .parse()
            .map_err(|_| Error::MalformedKernelSpec(s.into()))?;
        Kernel::new(family, n)
    }
}
