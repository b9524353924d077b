//! Empirical law of the Brownian NDD and of the per-call activation samples.

use brownne_core::brownian::{
    backward_activation, forward_activation, heaviside, path_ndd, simulate_path, BrownianSpec,
};
use brownne_core::quadrature::Quadrature;
use brownne_core::rng::{Seed, Tag};
use brownne_core::stats::{jarque_bera, Summary};

use super::{par_jobs, Artifact, RunError};
use crate::config::{Config, ConfigError};
use crate::report::Table;

#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub paths: usize,
    pub grid_points: usize,
    pub x_max: f64,
    pub x: f64,
    pub ns: Vec<u32>,
    pub vs: Vec<f64>,
    pub quad_order: usize,
    pub activation_samples: usize,
    pub alpha: f64,
    pub zs: Vec<f64>,
}

impl Params {
    pub fn from_config(cfg: &Config) -> Result<(Params, Config), ConfigError> {
        let mut r = cfg.reader();
        let paths = r.num("paths", 10_000, 2, 10_000_000);
        let grid_points = r.num("grid_points", 1025, 2, 100_000_000);
        let x_max = r.real("x_max", 1.0, f64::MIN_POSITIVE, 1e6);
        let x = r.real("x", 0.5, 0.0, 1e6);
        let ns = r.list("ns", &[2, 3, 4], 1, 30);
        let vs = r.list("vs", &[1.0, -0.5], -1e3, 1e3);
        r.check(vs.iter().all(|&v| v != 0.0), "vs", "directions must be nonzero");
        let quad_order = r.num("quad_order", 16, 1, 512);
        let activation_samples = r.num("activation_samples", 100_000, 2, 100_000_000);
        let alpha = r.real("alpha", 0.5, 0.0, 1e3);
        let zs = r.list("zs", &[-1.5, -0.2, 0.3, 2.0], -1e6, 1e6);
        // the NDD looks up to 2^{1-n}|v| away from x
        let reach = ns
            .iter()
            .flat_map(|&n| vs.iter().map(move |v: &f64| v.abs() * 2f64.powi(1 - n as i32)))
            .fold(0.0, f64::max);
        r.check(x - reach >= 0.0 && x + reach <= x_max, "x", "x +- kernel reach must stay inside [0, x_max]");
        let spacing = x_max / (grid_points.max(2) - 1) as f64;
        let finest = ns
            .iter()
            .flat_map(|&n| vs.iter().map(move |v: &f64| v.abs() * 2f64.powi(-(n as i32) - 3)))
            .fold(f64::INFINITY, f64::min);
        r.check(spacing <= finest, "grid_points", "grid too coarse for the largest n and smallest |v|");
        let eff = r.finish()?;
        Ok((
            Params {
                paths,
                grid_points,
                x_max,
                x,
                ns,
                vs,
                quad_order,
                activation_samples,
                alpha,
                zs,
            },
            eff,
        ))
    }

    fn specs(&self, alpha: f64) -> Vec<BrownianSpec> {
        let mut out = Vec::new();
        for &n in &self.ns {
            for &v in &self.vs {
                out.push(BrownianSpec::new(n, v, alpha).expect("validated"));
            }
        }
        out
    }
}

/// `samples[path][spec]` of `D_{n,v} W(x)`, specs ordered `ns x vs`.
pub fn path_samples(p: &Params, seed: u64) -> Result<Vec<Vec<f64>>, RunError> {
    let specs = p.specs(0.0);
    let quad = Quadrature::new(p.quad_order, 1);
    let master = Seed(seed);
    par_jobs(p.paths, |i| {
        let mut rng = master.stream(Tag::Paths, i as u64);
        let path = simulate_path(p.x_max, p.grid_points, &mut rng)?;
        specs
            .iter()
            .map(|s| Ok(path_ndd(&path, p.x, s, &quad)?))
            .collect()
    })
}

pub fn run(p: &Params, seed: u64) -> Result<Vec<Artifact>, RunError> {
    let samples = path_samples(p, seed)?;
    let mut law = Table::new([
        "n",
        "v",
        "paths",
        "mean",
        "mean_std_error",
        "variance",
        "theory_variance",
        "relative_variance_error",
        "jarque_bera_p",
    ])?;
    for (j, spec) in p.specs(0.0).iter().enumerate() {
        let column: Vec<f64> = samples.iter().map(|row| row[j]).collect();
        let s = Summary::of(&column);
        let theory = spec.variance();
        law.push(vec![
            spec.n().into(),
            spec.v().into(),
            p.paths.into(),
            s.mean.into(),
            s.std_error().into(),
            s.variance.into(),
            theory.into(),
            ((s.variance - theory) / theory).into(),
            jarque_bera(&column).p_value.into(),
        ])?;
    }

    let mut act = Table::new([
        "n",
        "v",
        "z",
        "forward_mean",
        "forward_mean_theory",
        "forward_variance",
        "forward_variance_theory",
        "backward_mean",
        "backward_mean_theory",
        "backward_variance",
        "backward_variance_theory",
    ])?;
    let specs = p.specs(p.alpha);
    let master = Seed(seed);
    let cases: Vec<(usize, f64)> = (0..specs.len())
        .flat_map(|i| p.zs.iter().map(move |&z| (i, z)))
        .collect();
    let sums = par_jobs(cases.len(), |c| {
        let (i, z) = cases[c];
        let spec = &specs[i];
        let mut rng = master.stream(Tag::Activation, c as u64);
        let fwd: Vec<f64> = (0..p.activation_samples)
            .map(|_| forward_activation(z, spec, &mut rng))
            .collect();
        let bwd: Vec<f64> = (0..p.activation_samples)
            .map(|_| backward_activation(z, spec, &mut rng))
            .collect();
        Ok((Summary::of(&fwd), Summary::of(&bwd)))
    })?;
    for (&(i, z), (f, b)) in cases.iter().zip(&sums) {
        let spec = &specs[i];
        let a2 = spec.alpha() * spec.alpha();
        act.push(vec![
            spec.n().into(),
            spec.v().into(),
            z.into(),
            f.mean.into(),
            z.max(0.0).into(),
            f.variance.into(),
            (a2 * z.abs()).into(),
            b.mean.into(),
            heaviside(z).into(),
            b.variance.into(),
            (a2 * spec.variance()).into(),
        ])?;
    }
    Ok(vec![
        Artifact::new("brownian_law", law),
        Artifact::new("brownian_activation", act),
    ])
}
