//! The translating-disc image articulation manifold.
//!
//! `I_θ` is a disc of radius [`DISC_RADIUS`] whose centre moves along the
//! diagonal of the unit square from `(r, r)` at `θ = 0` to `(1-r, 1-r)` at
//! `θ = 1`. Pixels hold the fraction of an `s x s` lattice of sub-samples that
//! falls inside the disc. Coverage is kept as integer counts so that image
//! norms and differences are exact.
//!
//! The map `θ -> I_θ` is Hölder-½, so `E(θ) = ‖I_θ - g‖` has no classical
//! derivative at the solution; it is minimized with nonlocal gradients.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::math::{ceil, floor, ln, sqrt};
use crate::ndd::{Method, MultiIndex, ScalarField};
use crate::rng::{Seed, Tag};
use crate::stochopt::{biased_gd, DescentControl, GdConfig, RestartPolicy, SearchBox};

pub const DISC_RADIUS: f64 = 0.15;
pub const MIN_RESOLUTION: usize = 16;
/// Convergence threshold as a fraction of the disjoint-disc plateau of `E`.
pub const DEFAULT_TOLERANCE_FRACTION: f64 = 0.02;
pub const DEFAULT_ITERATION_CAP: usize = 20_000;

/// A rendered `P x P` image of the disc.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscImage {
    resolution: usize,
    supersample: usize,
    theta_bits: u64,
    clamped: bool,
    counts: Vec<u16>,
}

impl DiscImage {
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn supersample(&self) -> usize {
        self.supersample
    }

    pub fn theta(&self) -> f64 {
        f64::from_bits(self.theta_bits)
    }

    /// Set when the requested `θ` was outside `[0, 1]` and got clamped.
    pub fn clamped(&self) -> bool {
        self.clamped
    }

    /// Sub-sample hit counts, row-major, each in `0..=s^2`.
    pub fn counts(&self) -> &[u16] {
        &self.counts
    }

    pub fn pixel(&self, row: usize, col: usize) -> f64 {
        self.counts[row * self.resolution + col] as f64 / self.full() as f64
    }

    pub fn pixels(&self) -> Vec<f64> {
        let full = self.full() as f64;
        self.counts.iter().map(|&c| c as f64 / full).collect()
    }

    /// Sum of pixel values (disc area in pixels).
    pub fn mass(&self) -> f64 {
        self.counts.iter().map(|&c| c as f64).sum::<f64>() / self.full() as f64
    }

    /// Euclidean norm of the pixel vector.
    pub fn norm(&self) -> f64 {
        let sq: u64 = self.counts.iter().map(|&c| (c as u64) * (c as u64)).sum();
        sqrt(sq as f64) / self.full() as f64
    }

    fn full(&self) -> u32 {
        (self.supersample * self.supersample) as u32
    }
}

fn check_raster(resolution: usize, supersample: usize) -> Result<()> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::InvalidArgument("resolution must be at least 16"));
    }
    if supersample < 1 || supersample > 255 {
        return Err(Error::InvalidArgument("supersample must be in 1..=255"));
    }
    Ok(())
}

/// Disc centre coordinate (both axes) for a clamped `θ`.
pub fn disc_center(theta: f64) -> f64 {
    DISC_RADIUS + theta * (1.0 - 2.0 * DISC_RADIUS)
}

/// Visits every pixel of the disc's bounding box with its coverage count.
fn raster(theta: f64, p: usize, s: usize, mut visit: impl FnMut(usize, usize, u16)) {
    let c = disc_center(theta);
    let r = DISC_RADIUS;
    let r2 = r * r;
    let pf = p as f64;
    let lo = (floor((c - r) * pf).max(0.0)) as usize;
    let hi = (ceil((c + r) * pf) as usize).min(p);
    let half_diag = core::f64::consts::FRAC_1_SQRT_2 / pf;
    let full = (s * s) as u16;
    let sub = 1.0 / (s as f64 * pf);
    for row in lo..hi {
        let yc = (row as f64 + 0.5) / pf - c;
        for col in lo..hi {
            let xc = (col as f64 + 0.5) / pf - c;
            let d = sqrt(xc * xc + yc * yc);
            let count = if d + half_diag < r {
                full
            } else if d - half_diag > r {
                0
            } else {
                let mut k = 0u16;
                for a in 0..s {
                    let y = row as f64 / pf + (a as f64 + 0.5) * sub - c;
                    for b in 0..s {
                        let x = col as f64 / pf + (b as f64 + 0.5) * sub - c;
                        if x * x + y * y <= r2 {
                            k += 1;
                        }
                    }
                }
                k
            };
            visit(row, col, count);
        }
    }
}

/// Renders `I_θ` on a `resolution x resolution` grid with `supersample^2`
/// coverage samples per pixel. Out-of-range `θ` is clamped and flagged.
pub fn render_disc(theta: f64, resolution: usize, supersample: usize) -> Result<DiscImage> {
    check_raster(resolution, supersample)?;
    if theta.is_nan() {
        return Err(Error::InvalidArgument("theta must not be NaN"));
    }
    let clamped = !(0.0..=1.0).contains(&theta);
    let th = theta.clamp(0.0, 1.0);
    let mut counts = vec![0u16; resolution * resolution];
    raster(th, resolution, supersample, |row, col, k| {
        counts[row * resolution + col] = k;
    });
    Ok(DiscImage {
        resolution,
        supersample,
        theta_bits: th.to_bits(),
        clamped,
        counts,
    })
}

/// `E(θ) = ‖I_θ - g‖` for a fixed target `g`, evaluated without
/// materialising `I_θ`: only the disc's bounding box is rasterised and the
/// target energy outside it comes from a summed-area table.
#[derive(Clone, Debug)]
pub struct DiscObjective {
    target: DiscImage,
    /// `(P+1) x (P+1)` prefix sums of squared target counts.
    energy: Vec<u64>,
}

impl DiscObjective {
    pub fn new(target: DiscImage) -> Self {
        let p = target.resolution;
        let mut energy = vec![0u64; (p + 1) * (p + 1)];
        for row in 0..p {
            let mut run = 0u64;
            for col in 0..p {
                let c = target.counts[row * p + col] as u64;
                run += c * c;
                energy[(row + 1) * (p + 1) + col + 1] = energy[row * (p + 1) + col + 1] + run;
            }
        }
        DiscObjective { target, energy }
    }

    pub fn target(&self) -> &DiscImage {
        &self.target
    }

    fn block_energy(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> u64 {
        let w = self.target.resolution + 1;
        self.energy[r1 * w + c1] + self.energy[r0 * w + c0]
            - self.energy[r0 * w + c1]
            - self.energy[r1 * w + c0]
    }

    /// `E` for disjoint discs of equal mass, `sqrt(‖I‖² + ‖g‖²) = sqrt 2 ‖g‖`.
    pub fn plateau(&self) -> f64 {
        core::f64::consts::SQRT_2 * self.target.norm()
    }

    pub fn value(&self, theta: f64) -> f64 {
        let p = self.target.resolution;
        let s = self.target.supersample;
        let th = if theta.is_nan() { theta } else { theta.clamp(0.0, 1.0) };
        if th.is_nan() {
            return f64::NAN;
        }
        let mut inside: u64 = 0;
        let (mut r0, mut r1, mut c0, mut c1) = (usize::MAX, 0, usize::MAX, 0);
        raster(th, p, s, |row, col, k| {
            let g = self.target.counts[row * p + col] as i64;
            let d = k as i64 - g;
            inside += (d * d) as u64;
            r0 = r0.min(row);
            r1 = r1.max(row + 1);
            c0 = c0.min(col);
            c1 = c1.max(col + 1);
        });
        let total = self.energy[(p + 1) * (p + 1) - 1];
        let outside = if r0 == usize::MAX {
            total
        } else {
            total - self.block_energy(r0, r1, c0, c1)
        };
        sqrt((inside + outside) as f64) / (s * s) as f64
    }
}

impl ScalarField for DiscObjective {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.value(x[0])
    }
}

/// `E(θ)` against `target`.
pub fn objective(theta: f64, target: &DiscImage) -> f64 {
    DiscObjective::new(target.clone()).value(theta)
}

/// `‖I_a - I_b‖` for two rasters of the same size.
pub fn image_distance(a: &DiscImage, b: &DiscImage) -> Result<f64> {
    if a.resolution != b.resolution || a.supersample != b.supersample {
        return Err(Error::DimensionMismatch {
            expected: a.resolution * a.resolution * a.supersample,
            got: b.resolution * b.resolution * b.supersample,
        });
    }
    let sq: i64 = a
        .counts
        .iter()
        .zip(&b.counts)
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            d * d
        })
        .sum();
    Ok(sqrt(sq as f64) / a.full() as f64)
}

/// `‖I_θ - I_{θ+Δ}‖` averaged over base points `θ` for each `Δ`, and the
/// least-squares slope of log distance against log `Δ`.
pub fn holder_profile(
    resolution: usize,
    supersample: usize,
    deltas: &[f64],
    bases: &[f64],
) -> Result<(Vec<f64>, f64)> {
    if deltas.len() < 2 || bases.is_empty() {
        return Err(Error::InvalidArgument("need two offsets and one base point"));
    }
    if deltas.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::InvalidArgument("offsets must be positive"));
    }
    let mut dist = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let mut total = 0.0;
        for &b in bases {
            let obj = DiscObjective::new(render_disc(b, resolution, supersample)?);
            total += obj.value(b + d);
        }
        dist.push(total / bases.len() as f64);
    }
    let lx: Vec<f64> = deltas.iter().map(|&d| ln(d)).collect();
    let ly: Vec<f64> = dist.iter().map(|&d| ln(d)).collect();
    Ok((dist, crate::stats::slope(&lx, &ly)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IamReport {
    pub theta_hat: f64,
    pub theta_star: f64,
    pub iterations: usize,
    /// `|θ̂ - θ*|` on the unit interval.
    pub rel_error: f64,
    pub converged: bool,
    pub restarts: usize,
}

/// Settings shared by every IAM estimation run.
#[derive(Clone, Debug, PartialEq)]
pub struct IamSettings {
    pub resolution: usize,
    pub supersample: usize,
    pub gd: GdConfig,
    /// Convergence when `E(θ) <= tolerance_fraction * plateau`.
    pub tolerance_fraction: f64,
    /// Start every run at `θ*` instead of a uniform draw.
    pub start_at_truth: bool,
}

impl Default for IamSettings {
    fn default() -> Self {
        IamSettings {
            resolution: 128,
            supersample: 4,
            gd: GdConfig {
                step0: 2e-4,
                decay: 0.0,
                max_iters: DEFAULT_ITERATION_CAP,
                grad_method: Method::MonteCarlo,
                mc_samples: 4,
                noise_sigma: 0.0,
                restart: RestartPolicy::OnNonDescent {
                    patience: RestartPolicy::DEFAULT_PATIENCE,
                },
            },
            tolerance_fraction: DEFAULT_TOLERANCE_FRACTION,
            start_at_truth: false,
        }
    }
}

/// Recovers `θ*` from its image by nonlocal gradient descent on `E` with
/// Monte Carlo derivatives along `v = +1`, starting from `theta0`.
/// Iterates are kept in `[0, 1]`; stalled runs restart uniformly in `[0, 1]`.
pub fn estimate_theta<R: Rng + ?Sized>(
    objective: &DiscObjective,
    theta_star: f64,
    theta0: f64,
    kernel: &Kernel,
    cfg: &GdConfig,
    tolerance_fraction: f64,
    rng: &mut R,
) -> Result<IamReport> {
    if cfg.grad_method != Method::MonteCarlo {
        return Err(Error::InvalidArgument("IAM estimation uses Monte Carlo derivatives"));
    }
    let control = DescentControl {
        search_box: Some(SearchBox::cube(1, 0.0, 1.0)?),
        project: true,
        target_value: Some(tolerance_fraction * objective.plateau()),
    };
    let report = biased_gd(
        objective,
        &[theta0],
        &MultiIndex::new(vec![kernel.n()]),
        kernel.family(),
        cfg,
        &control,
        rng,
    )?;
    let theta_hat = report.best_point[0];
    Ok(IamReport {
        theta_hat,
        theta_star,
        iterations: report.iterates_count,
        rel_error: (theta_hat - theta_star).abs(),
        converged: report.reached_target,
        restarts: report.restarts,
    })
}

/// One randomized run: `θ*` and `θ_0` uniform on `[0, 1]`, all randomness
/// drawn from the substream `(seed, run)`.
pub fn trial(kernel: &Kernel, run: u64, settings: &IamSettings, seed: Seed) -> Result<IamReport> {
    let mut rng = seed.stream(Tag::IamRun, run);
    let theta_star: f64 = rng.random();
    let draw: f64 = rng.random();
    let theta0 = if settings.start_at_truth { theta_star } else { draw };
    let target = render_disc(theta_star, settings.resolution, settings.supersample)?;
    let objective = DiscObjective::new(target);
    estimate_theta(
        &objective,
        theta_star,
        theta0,
        kernel,
        &settings.gd,
        settings.tolerance_fraction,
        &mut rng,
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatchRow {
    pub n: u32,
    pub runs: usize,
    pub mean_iterations: f64,
    pub mean_rel_error: f64,
    pub converged_fraction: f64,
}

impl BatchRow {
    /// Aggregates reports in the given order.
    pub fn from_reports(n: u32, reports: &[IamReport]) -> BatchRow {
        let k = reports.len() as f64;
        BatchRow {
            n,
            runs: reports.len(),
            mean_iterations: reports.iter().map(|r| r.iterations as f64).sum::<f64>() / k,
            mean_rel_error: reports.iter().map(|r| r.rel_error).sum::<f64>() / k,
            converged_fraction: reports.iter().filter(|r| r.converged).count() as f64 / k,
        }
    }
}

/// Sequential batch over kernel indices; each `n` gets its own child seed so
/// rows are independent of the order of `n_values`. Rows are sorted by `n`.
pub fn batch_experiment(
    family: crate::kernels::Family,
    n_values: &[u32],
    runs: usize,
    settings: &IamSettings,
    seed: Seed,
) -> Result<Vec<BatchRow>> {
    if runs < 1 {
        return Err(Error::InvalidArgument("runs must be at least 1"));
    }
    let mut ns = n_values.to_vec();
    ns.sort_unstable();
    ns.dedup();
    ns.iter()
        .map(|&n| {
            let kernel = Kernel::new(family, n)?;
            let child = seed.child(Tag::IamRun, n as u64);
            let reports = (0..runs as u64)
                .map(|run| trial(&kernel, run, settings, child))
                .collect::<Result<Vec<_>>>()?;
            Ok(BatchRow::from_reports(n, &reports))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_raster_settings() {
        assert!(render_disc(0.5, 8, 4).is_err());
        assert!(render_disc(0.5, 64, 0).is_err());
        assert!(render_disc(f64::NAN, 64, 4).is_err());
    }

    #[test]
    fn clamps_out_of_range_theta() {
        let img = render_disc(1.3, 32, 2).unwrap();
        assert!(img.clamped());
        assert_eq!(img.theta(), 1.0);
        assert_eq!(img, DiscImage { clamped: true, ..render_disc(1.0, 32, 2).unwrap() });
        assert!(!render_disc(0.3, 32, 2).unwrap().clamped());
    }

    #[test]
    fn rendering_is_deterministic_and_bounded() {
        let a = render_disc(0.37, 64, 4).unwrap();
        let b = render_disc(0.37, 64, 4).unwrap();
        assert_eq!(a, b);
        assert!(a.pixels().iter().all(|&p| (0.0..=1.0).contains(&p)));
    }

    #[test]
    fn mass_close_to_disc_area() {
        let p = 128;
        let img = render_disc(0.5, p, 4).unwrap();
        let area = core::f64::consts::PI * (DISC_RADIUS * p as f64).powi(2);
        let ring = 2.0 * core::f64::consts::PI * DISC_RADIUS * p as f64;
        assert!((img.mass() - area).abs() < ring, "{} vs {}", img.mass(), area);
    }

    #[test]
    fn end_positions_have_equal_mass() {
        let a = render_disc(0.0, 96, 4).unwrap();
        let b = render_disc(1.0, 96, 4).unwrap();
        assert_eq!(a.mass(), b.mass());
    }

    #[test]
    fn objective_matches_dense_distance() {
        let target = render_disc(0.42, 64, 3).unwrap();
        let obj = DiscObjective::new(target.clone());
        for theta in [0.0, 0.3, 0.41, 0.42, 0.5, 0.9, 1.0] {
            let dense = image_distance(&render_disc(theta, 64, 3).unwrap(), &target).unwrap();
            assert_eq!(obj.value(theta), dense, "theta {theta}");
        }
        assert_eq!(obj.value(0.42), 0.0);
    }

    #[test]
    fn image_distance_checks_shapes() {
        let a = render_disc(0.5, 32, 2).unwrap();
        let b = render_disc(0.5, 64, 2).unwrap();
        assert!(image_distance(&a, &b).is_err());
    }

    #[test]
    fn estimation_needs_monte_carlo() {
        let obj = DiscObjective::new(render_disc(0.5, 32, 2).unwrap());
        let cfg = GdConfig::default();
        let k = Kernel::linear_rect(50).unwrap();
        let mut rng = Seed(0).stream(Tag::IamRun, 0);
        assert!(estimate_theta(&obj, 0.5, 0.4, &k, &cfg, 0.02, &mut rng).is_err());
    }

    fn fast_settings() -> IamSettings {
        IamSettings {
            resolution: 64,
            supersample: 2,
            ..IamSettings::default()
        }
    }

    #[test]
    fn start_at_truth_converges_immediately() {
        let k = Kernel::linear_rect(150).unwrap();
        let obj = DiscObjective::new(render_disc(0.3, 128, 4).unwrap());
        let cfg = IamSettings::default().gd;
        let mut rng = Seed(1).stream(Tag::IamRun, 0);
        let rep = estimate_theta(&obj, 0.3, 0.3, &k, &cfg, 0.02, &mut rng).unwrap();
        assert!(rep.converged);
        assert!(rep.iterations <= 1);
        assert_eq!(rep.rel_error, 0.0);
    }

    #[test]
    fn recovers_centre_from_nearby_start() {
        let k = Kernel::linear_rect(150).unwrap();
        let obj = DiscObjective::new(render_disc(0.5, 128, 4).unwrap());
        let cfg = IamSettings::default().gd;
        let mut rng = Seed(2).stream(Tag::IamRun, 0);
        let rep = estimate_theta(&obj, 0.5, 0.45, &k, &cfg, 0.02, &mut rng).unwrap();
        assert!(rep.converged);
        assert!(rep.rel_error < 0.05);
        assert!(rep.iterations <= cfg.max_iters);
    }

    #[test]
    fn batch_is_deterministic_and_sorted() {
        let s = fast_settings();
        let a = batch_experiment(crate::kernels::Family::LinearRect, &[100, 50], 3, &s, Seed(9)).unwrap();
        let b = batch_experiment(crate::kernels::Family::LinearRect, &[50, 100], 3, &s, Seed(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].n, 50);
        assert!(batch_experiment(crate::kernels::Family::LinearRect, &[50], 0, &s, Seed(9)).is_err());
    }

    #[test]
    fn warm_batch_has_zero_error() {
        let s = IamSettings {
            start_at_truth: true,
            ..fast_settings()
        };
        let rows = batch_experiment(crate::kernels::Family::LinearRect, &[50, 150], 1, &s, Seed(3)).unwrap();
        for row in rows {
            assert_eq!(row.mean_rel_error, 0.0);
            assert_eq!(row.converged_fraction, 1.0);
        }
    }

    #[test]
    fn holder_slope_near_one_half() {
        for p in [64usize, 128] {
            let lo = 4.0 / p as f64;
            let deltas: Vec<f64> = (0..10).map(|i| lo * (0.1 / lo).powf(i as f64 / 9.0)).collect();
            let (dist, slope) = holder_profile(p, 4, &deltas, &[0.2, 0.45]).unwrap();
            assert!(dist.windows(2).all(|w| w[0] < w[1]));
            assert!((slope - 0.5).abs() <= 0.1, "P={p} slope {slope}");
        }
    }

    #[test]
    fn objective_symmetric_about_centre() {
        let obj = DiscObjective::new(render_disc(0.5, 128, 4).unwrap());
        for d in [0.01, 0.05, 0.2] {
            assert_eq!(obj.value(0.5 - d), obj.value(0.5 + d));
        }
    }

    #[test]
    fn objective_grows_then_plateaus() {
        let obj = DiscObjective::new(render_disc(0.4, 96, 4).unwrap());
        let mut last = 0.0;
        for i in 1..=30 {
            let e = obj.value(0.4 + 0.01 * i as f64);
            assert!(e >= last);
            last = e;
        }
        let far = render_disc(0.95, 96, 4).unwrap();
        let plateau = (far.norm().powi(2) + obj.target().norm().powi(2)).sqrt();
        assert!((obj.value(0.95) - plateau).abs() < 1e-12);
        assert!((obj.plateau() - plateau).abs() < 1e-2 * plateau);
    }
}
