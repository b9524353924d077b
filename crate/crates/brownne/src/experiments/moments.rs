//! Kernel moments, their quadrature oracle and tail mass.

use brownne_core::kernels::{Family, Kernel};
use brownne_core::ndd::kernel_expectation;
use brownne_core::quadrature::Quadrature;

use super::{Artifact, RunError, FAMILY_TAGS};
use crate::config::{Config, ConfigError};
use crate::report::Table;

#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub families: Vec<Family>,
    pub ns: Vec<u32>,
    pub ks: Vec<u32>,
    pub delta: f64,
    pub quad_order: usize,
    pub quad_panels: usize,
}

impl Params {
    pub fn from_config(cfg: &Config) -> Result<(Params, Config), ConfigError> {
        let mut r = cfg.reader();
        let tags = r.text("families", "gauss,linrect,exprect");
        let mut families = Vec::new();
        for tag in tags.split(',').map(str::trim) {
            match tag.parse::<Family>() {
                Ok(f) if FAMILY_TAGS.contains(&tag) => families.push(f),
                _ => r.check(false, "families", &format!("unknown family {tag:?}")),
            }
        }
        let ns = r.list("ns", &[2, 4, 8, 16, 32, 64], 2, 1000);
        let ks = r.list("ks", &[1, 2, 3], 1, 12);
        let delta = r.real("delta", 0.1, f64::MIN_POSITIVE, 10.0);
        let quad_order = r.num("quad_order", 64, 1, 512);
        let quad_panels = r.num("quad_panels", 8, 1, 1024);
        let eff = r.finish()?;
        Ok((
            Params {
                families,
                ns,
                ks,
                delta,
                quad_order,
                quad_panels,
            },
            eff,
        ))
    }
}

pub fn run(p: &Params) -> Result<Vec<Artifact>, RunError> {
    let quad = Quadrature::new(p.quad_order, p.quad_panels);
    let mut t = Table::new(["family", "n", "k", "moment", "quadrature", "abs_diff", "tail"])?;
    for &family in &p.families {
        for &n in &p.ns {
            let kernel = Kernel::new(family, n)?;
            let tail = kernel.tail(p.delta)?;
            for &k in &p.ks {
                let closed = kernel.moment(k)?;
                let oracle = kernel_expectation(&kernel, &quad, |t| Ok(t.powi(k as i32)))?;
                t.push(vec![
                    family.tag().into(),
                    n.into(),
                    k.into(),
                    closed.into(),
                    oracle.into(),
                    (closed - oracle).abs().into(),
                    tail.into(),
                ])?;
            }
        }
    }
    Ok(vec![Artifact::new("moments", t)])
}
