//! Biased nonlocal gradient descent on a diagonal quadratic.
//!
//! `u(x) = ½ Σ λ_i x_i²` with eigenvalues evenly spaced in `[1, condition]`.
//! With coordinate kernels the nonlocal gradient is `λ_i (x_i + E[T]/2)`, so
//! the iteration settles at `x_i = -E[T]/2` where `u = E[T]² Σ λ_i / 8`; that
//! value is reported as `bias_floor`.

use brownne_core::kernels::{Family, Kernel};
use brownne_core::ndd::{Method, MultiIndex, Quadratic};
use brownne_core::rng::{Seed, Tag};
use brownne_core::stochopt::{biased_gd, DescentControl, GdConfig, RestartPolicy, SearchBox};

use super::{check_family_range, par_jobs, Artifact, RunError, FAMILY_TAGS};
use crate::config::{Config, ConfigError};
use crate::report::Table;

#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub dim: usize,
    pub condition: f64,
    pub family: Family,
    pub ns: Vec<u32>,
    pub runs: usize,
    pub gd: GdConfig,
    pub checkpoint_iter: usize,
}

impl Params {
    pub fn from_config(cfg: &Config) -> Result<(Params, Config), ConfigError> {
        let mut r = cfg.reader();
        let dim = r.num("dim", 10, 1, 10_000);
        let condition = r.real("condition", 10.0, 1.0, 1e12);
        let family: Family = r.choice("family", "linrect", &FAMILY_TAGS).parse().unwrap_or(Family::LinearRect);
        let ns = r.list("ns", &[4, 8, 16, 32], 1, u32::MAX);
        check_family_range(&mut r, "ns", family, &ns);
        let runs = r.num("runs", 10, 1, 100_000);
        let step0 = r.real("step0", 1.0 / condition, f64::MIN_POSITIVE, 1e3);
        let decay = r.real("decay", 0.0, 0.0, 1e6);
        let max_iters = r.num("max_iters", 500, 1, 100_000_000);
        let method = r.choice("method", "quadrature", &["quadrature", "sampling"]);
        let mc_samples = r.num("mc_samples", 64, 2, 100_000_000);
        let noise_sigma = r.real("noise_sigma", 0.0, 0.0, 1e6);
        let checkpoint_iter = r.num("report_iter", 50, 0, 100_000_000);
        r.check(checkpoint_iter <= max_iters, "report_iter", "must not exceed max_iters");
        let eff = r.finish()?;
        Ok((
            Params {
                dim,
                condition,
                family,
                ns,
                runs,
                gd: GdConfig {
                    step0,
                    decay,
                    max_iters,
                    grad_method: if method == "sampling" {
                        Method::MonteCarlo
                    } else {
                        Method::Quadrature
                    },
                    mc_samples,
                    noise_sigma,
                    restart: RestartPolicy::Never,
                },
                checkpoint_iter,
            },
            eff,
        ))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim == 1 {
            return vec![1.0];
        }
        (0..self.dim)
            .map(|i| 1.0 + (self.condition - 1.0) * i as f64 / (self.dim - 1) as f64)
            .collect()
    }
}

pub struct Trace {
    pub n: u32,
    pub run: usize,
    pub values: Vec<f64>,
}

pub fn traces(p: &Params, seed: u64) -> Result<Vec<Trace>, RunError> {
    let lambda = p.eigenvalues();
    let u = Quadratic::diagonal(&lambda, vec![0.0; p.dim])?;
    let start = SearchBox::cube(p.dim, -1.0, 1.0)?;
    let master = Seed(seed);
    par_jobs(p.ns.len() * p.runs, |job| {
        let (i, run) = (job / p.runs, job % p.runs);
        let n = p.ns[i];
        // the start point depends on the run only, so every n starts alike
        let x0 = start.sample(&mut master.stream(Tag::Points, run as u64));
        let mut rng = master.child(Tag::Descent, n as u64).stream(Tag::Descent, run as u64);
        let report = biased_gd(
            &u,
            &x0,
            &MultiIndex::uniform(n, p.dim),
            p.family,
            &p.gd,
            &DescentControl::default(),
            &mut rng,
        )?;
        Ok(Trace {
            n,
            run,
            values: report.value_trace,
        })
    })
}

pub fn run(p: &Params, seed: u64) -> Result<Vec<Artifact>, RunError> {
    let all = traces(p, seed)?;
    let lambda_sum: f64 = p.eigenvalues().iter().sum();
    let mut finals = Table::new(["n", "run", "initial", "at_report_iter", "final", "bias_floor"])?;
    for t in &all {
        let m1 = Kernel::new(p.family, t.n)?.moment(1)?;
        let last = *t.values.last().expect("trace has the start value");
        finals.push(vec![
            t.n.into(),
            t.run.into(),
            t.values[0].into(),
            t.values[p.checkpoint_iter.min(t.values.len() - 1)].into(),
            last.into(),
            (m1 * m1 * lambda_sum / 8.0).into(),
        ])?;
    }
    let cols: Vec<String> = p.ns.iter().map(|n| format!("mean_value_n{n}")).collect();
    let mut header = vec!["iteration".to_string()];
    header.extend(cols.iter().cloned());
    let mut trace = Table::new(header)?;
    for k in 0..=p.gd.max_iters {
        let mut row = vec![k.into()];
        for chunk in all.chunks(p.runs) {
            let vals: Vec<f64> = chunk.iter().filter_map(|t| t.values.get(k).copied()).collect();
            row.push((vals.iter().sum::<f64>() / vals.len().max(1) as f64).into());
        }
        trace.push(row)?;
    }
    let ys: Vec<&str> = cols.iter().map(String::as_str).collect();
    Ok(vec![
        Artifact::new("biased_gd", finals),
        Artifact::new("biased_gd_trace", trace).with_chart("iteration", &ys, true),
    ])
}
