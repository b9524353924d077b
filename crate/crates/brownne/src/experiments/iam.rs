//! Translating-disc parameter estimation and the Hölder profile of the disc
//! manifold.

use brownne_core::iam::{holder_profile, trial, BatchRow, IamReport, IamSettings};
use brownne_core::kernels::{Family, Kernel};
use brownne_core::ndd::Method;
use brownne_core::rng::{Seed, Tag};
use brownne_core::stochopt::{GdConfig, RestartPolicy};

use super::{check_family_range, par_jobs, Artifact, RunError, FAMILY_TAGS};
use crate::config::{Config, ConfigError};
use crate::report::Table;

#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub family: Family,
    pub ns: Vec<u32>,
    pub runs: usize,
    pub settings: IamSettings,
    pub holder_resolutions: Vec<usize>,
    pub holder_points: usize,
}

impl Params {
    pub fn from_config(cfg: &Config) -> Result<(Params, Config), ConfigError> {
        let defaults = IamSettings::default();
        let mut r = cfg.reader();
        let family: Family = r.choice("family", "linrect", &FAMILY_TAGS).parse().unwrap_or(Family::LinearRect);
        let ns = r.list("ns", &[150], 1, u32::MAX);
        check_family_range(&mut r, "ns", family, &ns);
        let runs = r.num("runs", 100, 1, 1_000_000);
        let resolution = r.num("resolution", defaults.resolution, 16, 4096);
        let supersample = r.num("supersample", defaults.supersample, 1, 255);
        let step0 = r.real("step0", defaults.gd.step0, f64::MIN_POSITIVE, 1e3);
        let decay = r.real("decay", defaults.gd.decay, 0.0, 1e6);
        let mc_samples = r.num("mc_samples", defaults.gd.mc_samples, 2, 1_000_000);
        let patience = r.num("patience", RestartPolicy::DEFAULT_PATIENCE, 1, 1_000_000);
        let max_iters = r.num("max_iters", defaults.gd.max_iters, 1, 100_000_000);
        let tolerance = r.real("tolerance_fraction", defaults.tolerance_fraction, f64::MIN_POSITIVE, 1.0);
        let start_at_truth = r.flag("start_at_truth", false);
        let holder_resolutions = r.list("holder_resolutions", &[64, 128], 16, 4096);
        let holder_points = r.num("holder_points", 12, 2, 1000);
        let eff = r.finish()?;
        let settings = IamSettings {
            resolution,
            supersample,
            gd: GdConfig {
                step0,
                decay,
                max_iters,
                grad_method: Method::MonteCarlo,
                mc_samples,
                noise_sigma: 0.0,
                restart: RestartPolicy::OnNonDescent { patience },
            },
            tolerance_fraction: tolerance,
            start_at_truth,
        };
        let mut ns = ns;
        ns.sort_unstable();
        ns.dedup();
        Ok((
            Params {
                family,
                ns,
                runs,
                settings,
                holder_resolutions,
                holder_points,
            },
            eff,
        ))
    }
}

/// Every run for every `n`, in `(n, run)` order. Matches
/// [`brownne_core::iam::batch_experiment`] run for run.
pub fn reports(p: &Params, seed: u64) -> Result<Vec<(u32, IamReport)>, RunError> {
    let master = Seed(seed);
    let kernels: Vec<Kernel> = p
        .ns
        .iter()
        .map(|&n| Kernel::new(p.family, n))
        .collect::<Result<_, _>>()?;
    par_jobs(p.ns.len() * p.runs, |job| {
        let (i, run) = (job / p.runs, job % p.runs);
        let n = p.ns[i];
        let child = master.child(Tag::IamRun, n as u64);
        Ok((n, trial(&kernels[i], run as u64, &p.settings, child)?))
    })
}

/// Offsets log-spaced over `[4/P, 0.1]`.
pub fn holder_offsets(resolution: usize, count: usize) -> Vec<f64> {
    let lo = 4.0 / resolution as f64;
    let hi = 0.1f64;
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

pub const HOLDER_BASES: [f64; 3] = [0.2, 0.45, 0.7];

pub fn run(p: &Params, seed: u64) -> Result<Vec<Artifact>, RunError> {
    let all = reports(p, seed)?;
    let mut runs = Table::new([
        "n",
        "run",
        "theta_star",
        "theta_hat",
        "rel_error",
        "iterations",
        "restarts",
        "converged",
    ])?;
    for (k, (n, rep)) in all.iter().enumerate() {
        runs.push(vec![
            (*n).into(),
            (k % p.runs).into(),
            rep.theta_star.into(),
            rep.theta_hat.into(),
            rep.rel_error.into(),
            rep.iterations.into(),
            rep.restarts.into(),
            rep.converged.into(),
        ])?;
    }
    let mut summary = Table::new(["n", "runs", "mean_iterations", "mean_rel_error", "converged_fraction"])?;
    for (i, &n) in p.ns.iter().enumerate() {
        let reps: Vec<IamReport> = all[i * p.runs..(i + 1) * p.runs].iter().map(|r| r.1).collect();
        let row = BatchRow::from_reports(n, &reps);
        summary.push(vec![
            n.into(),
            row.runs.into(),
            row.mean_iterations.into(),
            row.mean_rel_error.into(),
            row.converged_fraction.into(),
        ])?;
    }

    let mut holder = Table::new(["resolution", "delta", "distance"])?;
    let mut fit = Table::new(["resolution", "slope"])?;
    let profiles = par_jobs(p.holder_resolutions.len(), |i| {
        let res = p.holder_resolutions[i];
        let deltas = holder_offsets(res, p.holder_points);
        let (dist, slope) = holder_profile(res, p.settings.supersample, &deltas, &HOLDER_BASES)?;
        Ok((res, deltas, dist, slope))
    })?;
    for (res, deltas, dist, slope) in profiles {
        for (d, e) in deltas.iter().zip(&dist) {
            holder.push(vec![res.into(), (*d).into(), (*e).into()])?;
        }
        fit.push(vec![res.into(), slope.into()])?;
    }

    Ok(vec![
        Artifact::new("iam", summary).with_chart("n", &["mean_rel_error"], false),
        Artifact::new("iam_runs", runs),
        Artifact::new("iam_holder", holder),
        Artifact::new("iam_holder_fit", fit),
    ])
}
