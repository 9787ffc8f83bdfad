//! Experiment configuration: a versioned JSON schema, strictly validated
//! (unknown keys rejected), with builders for the domain, loop and strip.

use crate::error::{Error, Result};
use crate::geom::{CircleDomain, Disk, SmoothLoop, TrigSeries, Vec2};
use crate::growth::{GrowthParams, Strategy};
use crate::lattice::TorusLattice;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// The shipped default configuration.
pub const DEFAULT_CONFIG_JSON: &str = include_str!("../configs/default.json");

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub domain: DomainSpec,
    #[serde(rename = "loop")]
    pub loop_spec: LoopSpec,
    pub strip: StripSpec,
    pub select: SelectSpec,
    pub growth: GrowthSpec,
    pub density: DensitySpec,
    pub lp: LpSpec,
    pub lattice: LatticeSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub outer: DiskSpec,
    #[serde(default)]
    pub inner: Vec<DiskSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskSpec {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LoopSpec {
    Circle {
        center: [f64; 2],
        radius: f64,
        #[serde(default)]
        base_t: f64,
    },
    Ellipse {
        center: [f64; 2],
        a: f64,
        b: f64,
        #[serde(default)]
        base_t: f64,
    },
    Series {
        ax: Vec<f64>,
        bx: Vec<f64>,
        ay: Vec<f64>,
        by: Vec<f64>,
        #[serde(default)]
        base_t: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StripSpec {
    pub delta: f64,
    pub n_tau: usize,
    pub n_u: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectSpec {
    pub n_u_grid: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthSpec {
    pub strategies: Vec<Strategy>,
    pub seeds: Vec<u64>,
    pub s_values: Vec<usize>,
    pub max_s: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    /// per-axis resolution of the evaluation grid
    pub grid: usize,
    /// punctures for the bracket evaluation
    #[serde(default)]
    pub punctures: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LpSpec {
    pub s_values: Vec<usize>,
    pub p_values: Vec<f64>,
    pub strategies: Vec<Strategy>,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub n: usize,
    pub k: usize,
    pub c: f64,
    pub c0: f64,
    pub s_values: Vec<usize>,
    pub h_budget: f64,
    /// one gram matrix per generator, or a single shared one
    pub gram: Vec<Vec<Vec<f64>>>,
    pub monodromy: Vec<Vec<Vec<i64>>>,
}

impl ExperimentConfig {
    /// Parses and validates a configuration, reporting the JSON field path
    /// on schema errors.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            Error::InvalidConfig(format!("{}: {}", e.path(), e.inner()))
        })?;
        if cfg.version != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported schema version {} (expected {})",
                cfg.version, SCHEMA_VERSION
            )));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn default_config() -> Self {
        Self::from_json(DEFAULT_CONFIG_JSON).expect("embedded default config is valid")
    }

    fn validate(&self) -> Result<()> {
        self.build_domain()?;
        if !(self.strip.delta > 0.0) {
            return Err(Error::InvalidConfig("strip.delta must be positive".into()));
        }
        if self.select.n_u_grid < 3 {
            return Err(Error::InvalidConfig("select.n_u_grid too small".into()));
        }
        if self.lattice.n == 0 || self.lattice.n > 2 {
            return Err(Error::InvalidConfig("lattice.n must be 1 or 2".into()));
        }
        if self.lattice.k == 0 || self.lattice.k > 3 {
            return Err(Error::InvalidConfig("lattice.k must be 1..=3".into()));
        }
        self.build_lattices()?;
        Ok(())
    }

    pub fn build_domain(&self) -> Result<CircleDomain> {
        let d = &self.domain;
        CircleDomain::new(
            Disk::new(Vec2::new(d.outer.center[0], d.outer.center[1]), d.outer.radius),
            d.inner
                .iter()
                .map(|i| Disk::new(Vec2::new(i.center[0], i.center[1]), i.radius))
                .collect(),
        )
    }

    pub fn build_loop(&self) -> Result<SmoothLoop> {
        build_loop_spec(&self.loop_spec)
    }

    pub fn growth_params(&self) -> GrowthParams {
        GrowthParams {
            delta: self.strip.delta,
            n_tau_base: self.strip.n_tau,
            n_u: self.strip.n_u,
            n_u_grid: self.select.n_u_grid,
            max_s: self.growth.max_s,
        }
    }

    pub fn build_lattices(&self) -> Result<Vec<TorusLattice>> {
        let rank = 2 * self.lattice.n;
        let pick = |mats: &[Vec<Vec<f64>>], j: usize| -> Vec<Vec<f64>> {
            if mats.len() == 1 {
                mats[0].clone()
            } else {
                mats[j].clone()
            }
        };
        let pick_i = |mats: &[Vec<Vec<i64>>], j: usize| -> Vec<Vec<i64>> {
            if mats.len() == 1 {
                mats[0].clone()
            } else {
                mats[j].clone()
            }
        };
        if self.lattice.gram.len() != 1 && self.lattice.gram.len() != self.lattice.k {
            return Err(Error::InvalidConfig(
                "lattice.gram needs one matrix or one per generator".into(),
            ));
        }
        if self.lattice.monodromy.len() != 1 && self.lattice.monodromy.len() != self.lattice.k {
            return Err(Error::InvalidConfig(
                "lattice.monodromy needs one matrix or one per generator".into(),
            ));
        }
        (0..self.lattice.k)
            .map(|j| {
                let gram = pick(&self.lattice.gram, j);
                let monodromy = pick_i(&self.lattice.monodromy, j);
                if gram.len() != rank {
                    return Err(Error::InvalidConfig(format!(
                        "lattice.gram[{j}] must be {rank}x{rank}"
                    )));
                }
                TorusLattice::new(gram, monodromy)
            })
            .collect()
    }
}

pub fn build_loop_spec(spec: &LoopSpec) -> Result<SmoothLoop> {
    match spec {
        LoopSpec::Circle {
            center,
            radius,
            base_t,
        } => SmoothLoop::new(
            TrigSeries::circle(Vec2::new(center[0], center[1]), *radius),
            *base_t,
        ),
        LoopSpec::Ellipse { center, a, b, base_t } => SmoothLoop::new(
            TrigSeries::ellipse(Vec2::new(center[0], center[1]), *a, *b),
            *base_t,
        ),
        LoopSpec::Series {
            ax,
            bx,
            ay,
            by,
            base_t,
        } => SmoothLoop::new(
            TrigSeries::new(ax.clone(), bx.clone(), ay.clone(), by.clone()),
            *base_t,
        ),
    }
}
