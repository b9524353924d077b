//! NDD of a random quadratic against its exact directional derivative.
//!
//! `u(x) = ½ xᵀ A x + bᵀ x` with a random symmetric `A`, a random unit
//! direction `v` and uniformly drawn points in `[-1, 1]^dim`. Each row of the
//! output averages over the points for one kernel index.

use brownne_core::kernels::{Family, Kernel};
use brownne_core::ndd::{ndd_monte_carlo, ndd_quadrature, Quadratic};
use brownne_core::quadrature::Quadrature;
use brownne_core::rng::{Seed, Tag};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{check_family_range, par_jobs, Artifact, RunError, FAMILY_TAGS};
use crate::config::{Config, ConfigError};
use crate::report::Table;

pub const DEFAULT_NS: [u32; 17] = [2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256, 384, 500];

#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub dim: usize,
    pub points: usize,
    pub family: Family,
    pub ns: Vec<u32>,
    pub quadrature: bool,
    pub sampling: bool,
    pub mc_samples: usize,
    pub quad_order: usize,
    pub quad_panels: usize,
}

impl Params {
    pub fn from_config(cfg: &Config) -> Result<(Params, Config), ConfigError> {
        let mut r = cfg.reader();
        let dim = r.num("dim", 50, 1, 1000);
        let points = r.num("points", 250, 1, 100_000);
        let family: Family = r.choice("family", "linrect", &FAMILY_TAGS).parse().unwrap_or(Family::LinearRect);
        let ns = r.list("ns", &DEFAULT_NS, 1, u32::MAX);
        check_family_range(&mut r, "ns", family, &ns);
        let method = r.choice("method", "both", &["both", "quadrature", "sampling"]);
        let mc_samples = r.num("mc_samples", 10_000, 2, 100_000_000);
        let quad_order = r.num("quad_order", 64, 1, 512);
        let quad_panels = r.num("quad_panels", 4, 1, 1024);
        let eff = r.finish()?;
        Ok((
            Params {
                dim,
                points,
                family,
                ns,
                quadrature: method != "sampling",
                sampling: method != "quadrature",
                mc_samples,
                quad_order,
                quad_panels,
            },
            eff,
        ))
    }
}

/// The random problem instance.
pub struct Problem {
    pub u: Quadratic,
    pub v: Vec<f64>,
    pub xs: Vec<Vec<f64>>,
}

/// `A = (M + Mᵀ) / (2 sqrt(dim))` with standard normal `M`, `b` standard
/// normal, `v` uniform on the sphere.
pub fn problem(dim: usize, points: usize, seed: Seed) -> Problem {
    let mut rng = seed.stream(Tag::Points, 0);
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let m: Vec<f64> = (0..dim * dim).map(|_| normal()).collect();
    let scale = 0.5 / (dim as f64).sqrt();
    let mut a = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            a[i * dim + j] = scale * (m[i * dim + j] + m[j * dim + i]);
        }
    }
    let b: Vec<f64> = (0..dim).map(|_| normal()).collect();
    let mut v: Vec<f64> = (0..dim).map(|_| normal()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut rng = seed.stream(Tag::Points, 1);
    let xs = (0..points)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect();
    Problem {
        u: Quadratic::new(a, b).expect("square matrix"),
        v,
        xs,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointResult {
    pub exact: f64,
    /// `½ |vᵀAv| E[T]`, the exact size of the bias.
    pub predicted_error: f64,
    pub quadrature: Option<f64>,
    pub sampling: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndexResult {
    pub n: u32,
    pub points: Vec<PointResult>,
}

/// Per-point results for every kernel index. Quadrature integrates the full
/// field; sampling uses the field restricted to the line `x + t v`, which is
/// the same function of `t` at a fraction of the cost.
pub fn evaluate(p: &Params, seed: u64) -> Result<Vec<IndexResult>, RunError> {
    let master = Seed(seed);
    let prob = problem(p.dim, p.points, master);
    let quad = Quadrature::new(p.quad_order, p.quad_panels);
    let curvature = prob.u.curvature(&prob.v);
    let exacts: Vec<f64> = prob
        .xs
        .iter()
        .map(|x| prob.u.gradient(x).iter().zip(&prob.v).map(|(g, v)| g * v).sum())
        .collect();
    let lines: Vec<Quadratic> = prob.xs.iter().map(|x| prob.u.restrict(x, &prob.v)).collect();
    let jobs = p.ns.len() * p.points;
    let flat = par_jobs(jobs, |job| {
        let (i, k) = (job / p.points, job % p.points);
        let n = p.ns[i];
        let kernel = Kernel::new(p.family, n)?;
        let quadrature = if p.quadrature {
            Some(ndd_quadrature(&prob.u, &prob.xs[k], &prob.v, &kernel, &quad)?.value)
        } else {
            None
        };
        let sampling = if p.sampling {
            let mut rng = master.child(Tag::Sampling, n as u64).stream(Tag::Sampling, k as u64);
            let e = ndd_monte_carlo(&lines[k], &[0.0], &[1.0], &kernel, p.mc_samples, &mut rng)?;
            Some((e.value, e.std_error))
        } else {
            None
        };
        Ok(PointResult {
            exact: exacts[k],
            predicted_error: 0.5 * curvature.abs() * kernel.moment(1)?,
            quadrature,
            sampling,
        })
    })?;
    Ok(p
        .ns
        .iter()
        .zip(flat.chunks(p.points.max(1)))
        .map(|(&n, c)| IndexResult {
            n,
            points: c.to_vec(),
        })
        .collect())
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, c) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if c == 0 {
        f64::NAN
    } else {
        s / c as f64
    }
}

pub fn run(p: &Params, seed: u64) -> Result<Vec<Artifact>, RunError> {
    let results = evaluate(p, seed)?;
    let mut t = Table::new([
        "n",
        "predicted_error",
        "quadrature_error",
        "sampling_error",
        "mean_discrepancy",
        "pooled_std_error",
        "within_4se",
    ])?;
    for r in &results {
        let pts = &r.points;
        let quad_err = mean(pts.iter().filter_map(|q| q.quadrature.map(|v| (v - q.exact).abs())));
        let mc_err = mean(pts.iter().filter_map(|q| q.sampling.map(|(v, _)| (v - q.exact).abs())));
        let pooled = mean(pts.iter().filter_map(|q| q.sampling.map(|(_, se)| se * se))).sqrt();
        let pairs: Vec<(f64, f64)> = pts
            .iter()
            .filter_map(|q| Some((q.quadrature?, q.sampling?)))
            .map(|(a, (b, se))| ((a - b).abs(), se))
            .collect();
        let discrepancy = mean(pairs.iter().map(|p| p.0));
        let within = if pairs.is_empty() {
            f64::NAN
        } else {
            pairs.iter().filter(|(d, se)| *d <= 4.0 * se).count() as f64 / pairs.len() as f64
        };
        t.push(vec![
            r.n.into(),
            mean(pts.iter().map(|q| q.predicted_error)).into(),
            quad_err.into(),
            mc_err.into(),
            discrepancy.into(),
            pooled.into(),
            within.into(),
        ])?;
    }
    let ys: Vec<&str> = [
        ("quadrature_error", p.quadrature),
        ("sampling_error", p.sampling),
        ("predicted_error", true),
    ]
    .iter()
    .filter(|(_, on)| *on)
    .map(|(c, _)| *c)
    .collect();
    Ok(vec![Artifact::new("ndd_convergence", t).with_chart("n", &ys, true)])
}
