//! Baseline versus Brownian-ReLU MLPs on a small classification set.
//!
//! Every Brownian variant (one hidden layer switched to Brownian ReLU with a
//! given `α`) is trained from the same initialization, data subset and
//! shuffle order as the baseline for each seed. The comparison table pits the
//! baseline against the variant with the best mean top-1 accuracy.

use std::path::PathBuf;

use brownne_core::brownian::BrownianSpec;
use brownne_core::mlp::{train, Activation, Dataset, EpochRecord, MlpSpec, Params as Weights, TrainConfig};
use brownne_core::rng::{Seed, Tag};

use super::{par_jobs, Artifact, RunError};
use crate::checkpoint;
use crate::config::{Config, ConfigError};
use crate::datasets;
use crate::idx;
use crate::report::Table;

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Digits,
    Blobs { rows: usize, width: usize, spread: f64 },
    Idx { images: PathBuf, labels: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Architecture {
    Standard,
    Adversarial,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub source: Source,
    pub test_fraction: f64,
    pub architecture: Architecture,
    pub seeds: usize,
    pub train: TrainConfig,
    pub n: u32,
    pub v: f64,
    pub alphas: Vec<f64>,
    pub layers: Vec<usize>,
    pub checkpoint: bool,
}

const HIDDEN_LAYERS: [(Architecture, usize); 2] = [(Architecture::Standard, 6), (Architecture::Adversarial, 12)];

impl Params {
    pub fn from_config(cfg: &Config) -> Result<(Params, Config), ConfigError> {
        let defaults = TrainConfig::default();
        let mut r = cfg.reader();
        let source = match r.choice("dataset", "digits", &["digits", "blobs", "idx"]).as_str() {
            "blobs" => Source::Blobs {
                rows: r.num("blob_rows", 400, 2, 10_000_000),
                width: r.num("blob_width", 8, 1, 100_000),
                spread: r.real("blob_spread", 0.1, 0.0, 10.0),
            },
            "idx" => {
                let images = r.text("images", "");
                let labels = r.text("labels", "");
                r.check(!images.is_empty(), "images", "required when dataset = idx");
                r.check(!labels.is_empty(), "labels", "required when dataset = idx");
                Source::Idx {
                    images: images.into(),
                    labels: labels.into(),
                }
            }
            _ => Source::Digits,
        };
        let test_fraction = r.real("test_fraction", 0.2, 0.0, 0.95);
        let architecture = match r.choice("architecture", "adversarial", &["standard", "adversarial"]).as_str() {
            "standard" => Architecture::Standard,
            _ => Architecture::Adversarial,
        };
        let seeds = r.num("seeds", 3, 1, 1000);
        let epochs = r.num("epochs", 30, 1, 100_000);
        let batch_size = r.num("batch_size", 16, 1, 1_000_000);
        let learning_rate = r.real("learning_rate", defaults.learning_rate, f64::MIN_POSITIVE, 1e3);
        let data_pct = r.real("data_pct", 0.1, f64::MIN_POSITIVE, 1.0);
        let noise_at_eval = r.flag("noise_at_eval", false);
        let n = r.num("n", 4, 1, 30);
        let v = r.real("v", 1.0, -1e3, 1e3);
        r.check(v != 0.0, "v", "direction must be nonzero");
        let alphas = r.list("alphas", &[0.01, 0.03, 0.1], 0.0, 1e3);
        let hidden = HIDDEN_LAYERS.iter().find(|h| h.0 == architecture).map_or(0, |h| h.1);
        let mut spread = vec![0, hidden / 4, hidden / 2, 3 * hidden / 4, hidden.saturating_sub(1)];
        spread.dedup();
        let layers = r.list("layers", &spread, 0, 1_000_000);
        if let Some(bad) = layers.iter().find(|&&l| l >= hidden) {
            r.check(false, "layers", &format!("hidden layer {bad} does not exist (have {hidden})"));
        }
        let checkpoint = r.flag("checkpoint", false);
        let eff = r.finish()?;
        Ok((
            Params {
                source,
                test_fraction,
                architecture,
                seeds,
                train: TrainConfig {
                    epochs,
                    batch_size,
                    learning_rate,
                    data_pct,
                    noise_at_eval,
                },
                n,
                v,
                alphas,
                layers,
                checkpoint,
            },
            eff,
        ))
    }

    /// Baseline first, then layers x alphas.
    pub fn variants(&self) -> Vec<Option<(usize, f64)>> {
        let mut out = vec![None];
        for &l in &self.layers {
            for &a in &self.alphas {
                out.push(Some((l, a)));
            }
        }
        out
    }

    pub fn spec(&self, inputs: usize, classes: usize, variant: Option<(usize, f64)>, seed: u64) -> MlpSpec {
        let base = match self.architecture {
            Architecture::Standard => MlpSpec::standard(inputs, classes, seed),
            Architecture::Adversarial => MlpSpec::adversarial(inputs, classes, seed),
        };
        match variant {
            None => base,
            Some((layer, alpha)) => {
                let b = BrownianSpec::new(self.n, self.v, alpha).expect("validated");
                base.with_activation(layer, Activation::Brownian(b)).expect("validated")
            }
        }
    }
}

pub fn load(source: &Source, seed: Seed) -> Result<Dataset, RunError> {
    Ok(match source {
        Source::Digits => datasets::digits(),
        Source::Blobs { rows, width, spread } => datasets::blobs(*rows, *width, *spread, seed),
        Source::Idx { images, labels } => idx::load_dataset(images, labels)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub variant: Option<(usize, f64)>,
    pub seed_index: usize,
    pub trace: Vec<EpochRecord>,
    pub params: Option<Weights>,
}

/// Trains every variant for every seed; results in `(variant, seed)` order.
pub fn results(p: &Params, seed: u64) -> Result<Vec<RunResult>, RunError> {
    let master = Seed(seed);
    let data = load(&p.source, master)?;
    let (test, pool) = data.split(p.test_fraction, master.child(Tag::Split, 0));
    let variants = p.variants();
    par_jobs(variants.len() * p.seeds, |job| {
        let (vi, s) = (job / p.seeds, job % p.seeds);
        let run_seed = master.child(Tag::Init, s as u64);
        let spec = p.spec(data.width(), data.class_count(), variants[vi], run_seed.0);
        let rep = train(&spec, &pool, &test, &p.train, run_seed)?;
        Ok(RunResult {
            variant: variants[vi],
            seed_index: s,
            trace: rep.trace,
            params: (p.checkpoint && s == 0).then_some(rep.params),
        })
    })
}

fn variant_cells(v: Option<(usize, f64)>) -> Vec<crate::report::Cell> {
    match v {
        None => vec!["baseline".into(), "".into(), 0.0.into()],
        Some((l, a)) => vec!["brownian".into(), l.into(), a.into()],
    }
}

pub fn run(p: &Params, seed: u64) -> Result<(Vec<Artifact>, Vec<(String, Vec<u8>)>), RunError> {
    let all = results(p, seed)?;
    let mut runs = Table::new(["model", "layer", "alpha", "seed", "train_loss", "top1", "top3"])?;
    for r in &all {
        let last = r.trace.last().expect("at least one epoch");
        let mut row = variant_cells(r.variant);
        row.extend([
            r.seed_index.into(),
            last.train_loss.into(),
            last.eval.top1.into(),
            last.eval.top3.into(),
        ]);
        runs.push(row)?;
    }

    let mut summary = Table::new(["model", "layer", "alpha", "mean_top1", "mean_top3"])?;
    let mut means = Vec::new();
    for group in all.chunks(p.seeds) {
        let k = group.len() as f64;
        let top1 = group.iter().map(|r| r.trace.last().unwrap().eval.top1).sum::<f64>() / k;
        let top3 = group.iter().map(|r| r.trace.last().unwrap().eval.top3).sum::<f64>() / k;
        let mut row = variant_cells(group[0].variant);
        row.extend([top1.into(), top3.into()]);
        summary.push(row)?;
        means.push((top1, top3));
    }

    // best Brownian variant; the first one wins ties
    let best = (1..means.len()).fold(None, |acc: Option<usize>, i| match acc {
        Some(b) if means[b].0 >= means[i].0 => Some(b),
        _ => Some(i),
    });
    let mut compare = Table::new(["model", "layer", "alpha", "data_pct", "mean_top1", "mean_top3"])?;
    let mut picks = vec![0];
    picks.extend(best);
    for &g in &picks {
        let mut row = variant_cells(all[g * p.seeds].variant);
        row.extend([p.train.data_pct.into(), means[g].0.into(), means[g].1.into()]);
        compare.push(row)?;
    }

    let mut trace = Table::new(["epoch", "baseline_loss", "baseline_top1", "brownian_loss", "brownian_top1"])?;
    let group_trace = |g: usize, e: usize| {
        let group = &all[g * p.seeds..(g + 1) * p.seeds];
        let k = group.len() as f64;
        (
            group.iter().map(|r| r.trace[e].train_loss).sum::<f64>() / k,
            group.iter().map(|r| r.trace[e].eval.top1).sum::<f64>() / k,
        )
    };
    for e in 0..p.train.epochs {
        let (bl, bt) = group_trace(0, e);
        let (nl, nt) = best.map_or((f64::NAN, f64::NAN), |g| group_trace(g, e));
        trace.push(vec![e.into(), bl.into(), bt.into(), nl.into(), nt.into()])?;
    }

    let mut files = Vec::new();
    if p.checkpoint {
        let data = load(&p.source, Seed(seed))?;
        for (name, g) in [("baseline", Some(0)), ("brownian", best)] {
            let Some(g) = g else { continue };
            let r = &all[g * p.seeds];
            let spec = p.spec(data.width(), data.class_count(), r.variant, Seed(seed).child(Tag::Init, 0).0);
            let weights = r.params.as_ref().expect("kept for seed 0");
            files.push((format!("{name}.brwn"), checkpoint::encode(&spec, weights)));
        }
    }

    Ok((
        vec![
            Artifact::new("mlp_compare", compare),
            Artifact::new("mlp_summary", summary),
            Artifact::new("mlp_runs", runs),
            Artifact::new("mlp_trace", trace).with_chart("epoch", &["baseline_top1", "brownian_top1"], false),
        ],
        files,
    ))
}
