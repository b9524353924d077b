//! Descent with nonlocal (biased) gradients.
//!
//! The update is `x_{k+1} = x_k - γ_k g_k` with
//! `g_k = ∇_{n̄} u(x_k) + σ ξ_k`, `ξ_k ~ N(0, I)`, and step schedule
//! `γ_k = γ_0 / (1 + decay k)`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::kernels::{Family, Kernel};
use crate::math::{dot, sqrt};
use crate::ndd::{
    ndd_monte_carlo, nonlocal_gradient, DirectionSet, Estimator, Method, MultiIndex, NddEstimate,
    ScalarField, Welford,
};
use crate::quadrature::Quadrature;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestartPolicy {
    Never,
    /// Re-sample the iterate after `patience` consecutive steps that fail to
    /// lower the objective below its best value since the last (re)start.
    OnNonDescent { patience: usize },
}

impl RestartPolicy {
    pub const DEFAULT_PATIENCE: usize = 10;
}

#[derive(Clone, Debug, PartialEq)]
pub struct GdConfig {
    pub step0: f64,
    pub decay: f64,
    pub max_iters: usize,
    pub grad_method: Method,
    pub mc_samples: usize,
    pub noise_sigma: f64,
    pub restart: RestartPolicy,
}

impl Default for GdConfig {
    fn default() -> Self {
        GdConfig {
            step0: 0.1,
            decay: 0.0,
            max_iters: 500,
            grad_method: Method::Quadrature,
            mc_samples: 64,
            noise_sigma: 0.0,
            restart: RestartPolicy::Never,
        }
    }
}

impl GdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step0 > 0.0 && self.step0.is_finite()) {
            return Err(Error::InvalidArgument("step0 must be positive"));
        }
        if !(self.decay >= 0.0) {
            return Err(Error::InvalidArgument("decay must be nonnegative"));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidArgument("max_iters must be at least 1"));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::InvalidArgument("noise_sigma must be nonnegative"));
        }
        if self.grad_method == Method::MonteCarlo && self.mc_samples < 2 {
            return Err(Error::InvalidArgument("mc_samples must be at least 2"));
        }
        if let RestartPolicy::OnNonDescent { patience: 0 } = self.restart {
            return Err(Error::InvalidArgument("patience must be at least 1"));
        }
        Ok(())
    }

    /// `γ_k`.
    pub fn step(&self, k: usize) -> f64 {
        self.step0 / (1.0 + self.decay * k as f64)
    }

    pub fn estimator(&self) -> Estimator {
        match self.grad_method {
            Method::Quadrature => Estimator::Quadrature(Quadrature::default()),
            Method::MonteCarlo => Estimator::MonteCarlo {
                samples: self.mc_samples,
            },
        }
    }
}

/// Axis-aligned box `[lo_i, hi_i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl SearchBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b)) {
            return Err(Error::InvalidArgument("box bounds must satisfy lo <= hi"));
        }
        Ok(SearchBox { lo, hi })
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        SearchBox::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| {
                let u: f64 = rng.random();
                a + (b - a) * u
            })
            .collect()
    }

    pub fn project(&self, x: &mut [f64]) {
        for ((xi, a), b) in x.iter_mut().zip(&self.lo).zip(&self.hi) {
            *xi = xi.clamp(*a, *b);
        }
    }

    /// Length of the main diagonal.
    pub fn diameter(&self) -> f64 {
        sqrt(
            self.lo
                .iter()
                .zip(&self.hi)
                .map(|(a, b)| (b - a) * (b - a))
                .sum(),
        )
    }
}

/// Run-level options that are not part of [`GdConfig`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DescentControl {
    /// Box used by the restart policy (and for projection when `project` is set).
    pub search_box: Option<SearchBox>,
    /// Clamp every iterate into `search_box`.
    pub project: bool,
    /// Stop as soon as the objective is at or below this value.
    pub target_value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DescentReport {
    pub iterates_count: usize,
    pub final_point: Vec<f64>,
    pub final_value: f64,
    /// Objective at the start point and after every iteration.
    pub value_trace: Vec<f64>,
    pub restarts: usize,
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub reached_target: bool,
}

/// Biased nonlocal gradient descent.
///
/// The step counter in `γ_k` restarts from zero after every restart.
pub fn biased_gd<U: ScalarField, R: Rng + ?Sized>(
    u: &U,
    x0: &[f64],
    idx: &MultiIndex,
    family: Family,
    cfg: &GdConfig,
    control: &DescentControl,
    rng: &mut R,
) -> Result<DescentReport> {
    cfg.validate()?;
    let dim = u.dim();
    if x0.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x0.len(),
        });
    }
    if idx.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: idx.len(),
        });
    }
    idx.kernels(family)?;
    if let Some(b) = &control.search_box {
        if b.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: b.dim(),
            });
        }
    } else if matches!(cfg.restart, RestartPolicy::OnNonDescent { .. }) || control.project {
        return Err(Error::InvalidArgument(
            "restarts and projection need a search box",
        ));
    }

    let estimator = cfg.estimator();
    let directions = DirectionSet::identity(dim);
    let project = |x: &mut [f64]| {
        if control.project {
            if let Some(b) = &control.search_box {
                b.project(x);
            }
        }
    };
    let reached = |v: f64| control.target_value.is_some_and(|t| v <= t);

    let mut x = x0.to_vec();
    project(&mut x);
    let mut value = u.eval(&x);
    if !value.is_finite() {
        return Err(Error::NonFiniteObjective {
            iteration: 0,
            last_point: x,
        });
    }
    let mut trace = vec![value];
    let mut best_point = x.clone();
    let mut best_value = value;
    let mut restarts = 0;
    let mut local_k = 0;
    let mut stall = 0;
    let mut episode_best = value;
    let mut iterations = 0;
    let mut hit = reached(value);

    while !hit && iterations < cfg.max_iters {
        let mut g = nonlocal_gradient(u, &x, idx, family, &directions, &estimator, rng).map_err(
            |e| match e {
                Error::Evaluation { .. } => Error::NonFiniteObjective {
                    iteration: iterations,
                    last_point: x.clone(),
                },
                other => other,
            },
        )?;
        if cfg.noise_sigma > 0.0 {
            for gi in g.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *gi += cfg.noise_sigma * z;
            }
        }
        let gamma = cfg.step(local_k);
        let mut next: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - gamma * gi).collect();
        project(&mut next);
        let next_value = u.eval(&next);
        iterations += 1;
        if !next_value.is_finite() {
            return Err(Error::NonFiniteObjective {
                iteration: iterations,
                last_point: x,
            });
        }
        if next_value >= episode_best {
            stall += 1;
        } else {
            stall = 0;
            episode_best = next_value;
        }
        x = next;
        value = next_value;
        local_k += 1;

        if let (RestartPolicy::OnNonDescent { patience }, Some(b)) =
            (cfg.restart, &control.search_box)
        {
            if stall >= patience {
                x = b.sample(rng);
                value = u.eval(&x);
                if !value.is_finite() {
                    return Err(Error::NonFiniteObjective {
                        iteration: iterations,
                        last_point: x,
                    });
                }
                stall = 0;
                episode_best = value;
                local_k = 0;
                restarts += 1;
            }
        }

        trace.push(value);
        if value < best_value {
            best_value = value;
            best_point.clone_from(&x);
        }
        hit = reached(value);
    }

    Ok(DescentReport {
        iterates_count: iterations,
        final_point: x,
        final_value: value,
        value_trace: trace,
        restarts,
        best_point,
        best_value,
        reached_target: hit,
    })
}

/// `min_y [u(y) - u(x) - g·(y - x) + ε]` over the probe points. A nonnegative
/// result certifies `g ∈ ∂_ε u(x)` on the probe set.
pub fn epsilon_subgradient_margin(
    u: &impl ScalarField,
    x: &[f64],
    g: &[f64],
    probes: &[Vec<f64>],
    epsilon: f64,
) -> Result<f64> {
    if probes.is_empty() {
        return Err(Error::InvalidArgument("probe set must be nonempty"));
    }
    let d = u.dim();
    for got in [x.len(), g.len()] {
        if got != d {
            return Err(Error::DimensionMismatch { expected: d, got });
        }
    }
    let ux = u.eval(x);
    let mut worst = f64::INFINITY;
    let mut step = vec![0.0; d];
    for y in probes {
        if y.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: y.len(),
            });
        }
        for ((s, yi), xi) in step.iter_mut().zip(y).zip(x) {
            *s = yi - xi;
        }
        let m = u.eval(y) - ux - dot(g, &step) + epsilon;
        worst = worst.min(m);
    }
    Ok(worst)
}

/// A distribution over direction vectors.
pub trait DirectionSampler {
    fn dim(&self) -> usize;
    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]);
}

/// Always returns the same direction.
#[derive(Clone, Debug, PartialEq)]
pub struct PointMass(pub Vec<f64>);

impl DirectionSampler for PointMass {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn sample_into<R: Rng + ?Sized>(&self, _rng: &mut R, out: &mut [f64]) {
        out.copy_from_slice(&self.0);
    }
}

/// `v ~ N(mean, std_dev^2 I)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianDirections {
    pub mean: Vec<f64>,
    pub std_dev: f64,
}

impl DirectionSampler for GaussianDirections {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for (o, m) in out.iter_mut().zip(&self.mean) {
            let z: f64 = rng.sample(StandardNormal);
            *o = m + self.std_dev * z;
        }
    }
}

/// Nested Monte Carlo estimate of `E_v[D_{n,v} u(x)]`: `m_dirs` directions,
/// each with an `m_t`-sample inner estimate. The standard error is taken over
/// the per-direction means.
pub fn random_direction_expectation<U, S, R>(
    u: &U,
    x: &[f64],
    sampler: &S,
    kernel: &Kernel,
    m_dirs: usize,
    m_t: usize,
    rng: &mut R,
) -> Result<NddEstimate>
where
    U: ScalarField,
    S: DirectionSampler,
    R: Rng + ?Sized,
{
    if m_dirs < 2 || m_t < 1 {
        return Err(Error::InvalidArgument(
            "need at least two directions and one inner sample",
        ));
    }
    if sampler.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            got: sampler.dim(),
        });
    }
    let mut v = vec![0.0; u.dim()];
    let mut outer = Welford::default();
    for _ in 0..m_dirs {
        sampler.sample_into(rng, &mut v);
        let inner = if m_t == 1 {
            // ndd_monte_carlo requires two draws; one draw is still unbiased
            let t = kernel.sample(rng);
            let shifted: Vec<f64> = x.iter().zip(&v).map(|(xi, vi)| xi + t * vi).collect();
            let q = (u.eval(&shifted) - u.eval(x)) / t;
            if !q.is_finite() {
                return Err(Error::Evaluation { t });
            }
            q
        } else {
            ndd_monte_carlo(u, x, &v, kernel, m_t, rng)?.value
        };
        outer.push(inner);
    }
    Ok(NddEstimate {
        value: outer.mean(),
        method: Method::MonteCarlo,
        samples: m_dirs * m_t,
        std_error: outer.std_error(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndd::{FnField, Quadratic};
    use crate::rng::{Seed, Tag};

    #[test]
    fn config_validation() {
        assert!(GdConfig::default().validate().is_ok());
        let bad = GdConfig {
            max_iters: 0,
            ..GdConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = GdConfig {
            restart: RestartPolicy::OnNonDescent { patience: 0 },
            ..GdConfig::default()
        };
        assert!(bad.validate().is_err());
        let cfg = GdConfig {
            step0: 1.0,
            decay: 0.5,
            ..GdConfig::default()
        };
        assert_eq!(cfg.step(2), 0.5);
    }

    #[test]
    fn linear_objective_takes_exact_steps() {
        let b = [1.5, -0.5];
        let u = FnField::new(2, move |x: &[f64]| b[0] * x[0] + b[1] * x[1]);
        let cfg = GdConfig {
            step0: 0.2,
            decay: 1.0,
            max_iters: 5,
            ..GdConfig::default()
        };
        let mut rng = Seed(0).stream(Tag::Descent, 0);
        let report = biased_gd(
            &u,
            &[0.0, 0.0],
            &MultiIndex::uniform(5, 2),
            Family::LinearRect,
            &cfg,
            &DescentControl::default(),
            &mut rng,
        )
        .unwrap();
        let mut x = [0.0, 0.0];
        for k in 0..5 {
            let g = cfg.step(k);
            x[0] -= g * b[0];
            x[1] -= g * b[1];
        }
        for (a, e) in report.final_point.iter().zip(x) {
            assert!((a - e).abs() < 1e-12);
        }
        assert_eq!(report.value_trace.len(), report.iterates_count + 1);
    }

    #[test]
    fn restarts_need_a_box() {
        let u = FnField::new(1, |x: &[f64]| x[0] * x[0]);
        let cfg = GdConfig {
            restart: RestartPolicy::OnNonDescent { patience: 3 },
            ..GdConfig::default()
        };
        let mut rng = Seed(0).stream(Tag::Descent, 0);
        let err = biased_gd(&u, &[1.0], &MultiIndex::uniform(4, 1), Family::LinearRect, &cfg, &DescentControl::default(), &mut rng);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn plateau_triggers_restart() {
        // flat for x > 1, bowl inside
        let u = FnField::new(1, |x: &[f64]| if x[0].abs() > 1.0 { 1.0 } else { x[0] * x[0] });
        let cfg = GdConfig {
            step0: 0.1,
            max_iters: 200,
            restart: RestartPolicy::OnNonDescent { patience: 4 },
            ..GdConfig::default()
        };
        let control = DescentControl {
            search_box: Some(SearchBox::cube(1, -3.0, 3.0).unwrap()),
            project: false,
            target_value: Some(1e-3),
        };
        let mut rng = Seed(5).stream(Tag::Descent, 0);
        let report = biased_gd(&u, &[2.5], &MultiIndex::uniform(30, 1), Family::LinearRect, &cfg, &control, &mut rng).unwrap();
        assert!(report.restarts >= 1);
        assert!(report.reached_target);
        assert!(report.best_value <= 1e-3);
    }

    #[test]
    fn non_finite_objective_aborts_with_last_point() {
        let u = FnField::new(1, |x: &[f64]| if x[0] < 0.5 { f64::INFINITY } else { x[0] });
        let cfg = GdConfig {
            step0: 0.3,
            max_iters: 10,
            ..GdConfig::default()
        };
        let mut rng = Seed(0).stream(Tag::Descent, 0);
        let err = biased_gd(&u, &[0.7], &MultiIndex::uniform(8, 1), Family::ExponentialRect, &cfg, &DescentControl::default(), &mut rng).unwrap_err();
        match err {
            Error::NonFiniteObjective { iteration, last_point } => {
                assert_eq!(iteration, 1);
                assert_eq!(last_point, vec![0.7]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn margin_of_true_gradient_at_minimizer() {
        let u = FnField::new(2, |x: &[f64]| x[0] * x[0] + x[1] * x[1]);
        let probes = vec![vec![0.5, -1.0], vec![2.0, 0.1], vec![-0.3, 0.0]];
        let m = epsilon_subgradient_margin(&u, &[0.0, 0.0], &[0.0, 0.0], &probes, 0.0).unwrap();
        assert!((m - 0.09).abs() < 1e-15);
        assert!(epsilon_subgradient_margin(&u, &[0.0, 0.0], &[0.0, 0.0], &[], 0.0).is_err());
    }

    #[test]
    fn excess_gradient_violates_margin() {
        let u = Quadratic::diagonal(&[2.0, 2.0], vec![0.0, 0.0]).unwrap();
        let x = [1.0, 0.0];
        let g = [2.0 + 10.0, 10.0];
        // step against the excess direction
        let probes = vec![vec![1.0 + 0.5, 0.5], vec![1.0 - 0.5, -0.5]];
        let m = epsilon_subgradient_margin(&u, &x, &g, &probes, 0.0).unwrap();
        assert!(m < 0.0);
    }

    #[test]
    fn point_mass_reduces_to_single_direction() {
        let u = FnField::new(1, |x: &[f64]| x[0] * x[0]);
        let k = Kernel::linear_rect(10).unwrap();
        let mut r1 = Seed(4).stream(Tag::Sampling, 0);
        let est = random_direction_expectation(&u, &[1.0], &PointMass(vec![2.0]), &k, 50, 20, &mut r1).unwrap();
        // Q = 2xv + t v^2 with v = 2, x = 1
        let exact = 4.0 + 4.0 * k.moment(1).unwrap();
        assert!((est.value - exact).abs() < 4.0 * est.std_error + 1e-12);
    }
}
