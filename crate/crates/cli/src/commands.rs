use std::fmt::Write as _;

use anyhow::{bail, Result};
use clap::{Subcommand, ValueEnum};
use masep_core::boundary::{
    build_boundary, decompose_boundary, enumerate_specs, transitions, BoundaryParts, BoundarySpec, Transition,
};
use masep_core::bulk::BulkParams;
use masep_core::linalg::{QMat, TensorSpace};
use masep_core::markov::{is_irreducible, stationary_distribution, LatticeModel, StationaryResult};
use masep_core::rational::Rat;
use masep_core::sim::{compare_empirical, simulate_replicas, SimReport};
use masep_core::verify::{
    check_boundary_algebra, check_cyclotomic, check_hecke, check_k_unitarity, check_lemma_relations,
    check_poly_relations, check_r_unitarity, check_reflection, check_transfer_commutation, check_ybe, CheckParams,
    CheckReport,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::options::{Flags, RunConfig};

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Verify an algebraic identity exactly
    Check {
        #[arg(value_enum)]
        kind: CheckKind,
        #[command(flatten)]
        flags: Flags,
    },
    /// List or inspect boundary specs
    Boundaries {
        #[command(subcommand)]
        action: BoundaryAction,
    },
    /// Exact stationary distribution of the open chain
    Stationary(Flags),
    /// Strong connectivity of the configuration graph
    Irreducible(Flags),
    /// Gillespie simulation
    Simulate(Flags),
    /// Simulate and compare against the exact stationary distribution
    Compare(Flags),
}

#[derive(Subcommand, Debug)]
pub enum BoundaryAction {
    /// All specs for --n
    Enumerate(Flags),
    /// Transitions, matrix and decomposition of --spec
    Show(Flags),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Ybe,
    Runitarity,
    Reflection,
    Kunitarity,
    Hecke,
    Algebra,
    Lemma,
    Poly,
    Cyclotomic,
    Transfer,
}

/// Top-level JSON output.
#[derive(Debug, Serialize, Deserialize)]
pub struct Envelope {
    pub tool_version: String,
    pub command: String,
    pub config: RunConfig,
    pub reports: Vec<Value>,
}

pub struct Outcome {
    pub envelope: Envelope,
    pub passed: bool,
    pub csv: Option<String>,
}

/// Report of `boundaries show`.
#[derive(Debug, Serialize, Deserialize)]
pub struct BoundaryDetail {
    pub spec: BoundarySpec,
    pub description: String,
    pub transitions: Vec<Transition>,
    pub matrix: QMat,
    pub b0: QMat,
    pub b0_plus: QMat,
    pub b0_minus: QMat,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Report of `irreducible`.
#[derive(Debug, Serialize, Deserialize)]
pub struct IrreducibilityReport {
    pub params: CheckParams,
    pub irreducible: bool,
}

impl Command {
    pub fn flags(&self) -> &Flags {
        match self {
            Command::Check { flags, .. } => flags,
            Command::Boundaries { action: BoundaryAction::Enumerate(f) | BoundaryAction::Show(f) } => f,
            Command::Stationary(f) | Command::Irreducible(f) | Command::Simulate(f) | Command::Compare(f) => f,
        }
    }

    fn name(&self) -> String {
        match self {
            Command::Check { kind, .. } => {
                format!("check {}", kind.to_possible_value().expect("no skipped variants").get_name())
            }
            Command::Boundaries { action: BoundaryAction::Enumerate(_) } => "boundaries enumerate".into(),
            Command::Boundaries { action: BoundaryAction::Show(_) } => "boundaries show".into(),
            Command::Stationary(_) => "stationary".into(),
            Command::Irreducible(_) => "irreducible".into(),
            Command::Simulate(_) => "simulate".into(),
            Command::Compare(_) => "compare".into(),
        }
    }

    pub fn run(&self, cfg: RunConfig) -> Result<Outcome> {
        let mut csv = None;
        let (reports, passed) = match self {
            Command::Check { kind, .. } => run_check(*kind, &cfg)?,
            Command::Boundaries { action: BoundaryAction::Enumerate(_) } => (enumerate(&cfg)?, true),
            Command::Boundaries { action: BoundaryAction::Show(_) } => (vec![show(&cfg)?], true),
            Command::Stationary(_) => {
                let model = cfg.model()?;
                let result = stationary_distribution(&model)?;
                csv = Some(distribution_csv(&model, &result));
                (vec![to_value(&result)?], true)
            }
            Command::Irreducible(_) => {
                let model = cfg.model()?;
                let irreducible = is_irreducible(&model)?;
                let report = IrreducibilityReport { params: CheckParams::model(&model), irreducible };
                (vec![to_value(&report)?], irreducible)
            }
            Command::Simulate(_) => {
                let model = cfg.model()?;
                let report = simulate_replicas(&model, &cfg.sim_config()?, cfg.replicas())?;
                csv = Some(density_csv(&report));
                (vec![to_value(&report)?], true)
            }
            Command::Compare(_) => compare(&cfg)?,
        };
        Ok(Outcome {
            envelope: Envelope {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                command: self.name(),
                config: cfg,
                reports,
            },
            passed,
            csv,
        })
    }
}

fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    Ok(serde_json::to_value(x)?)
}

fn finish(reports: Vec<CheckReport>) -> Result<(Vec<Value>, bool)> {
    let passed = reports.iter().all(|r| r.passed);
    Ok((reports.iter().map(to_value).collect::<Result<_>>()?, passed))
}

/// `--spec` if given, otherwise every enumerated spec with the flag rates.
fn target_specs(cfg: &RunConfig) -> Result<Vec<BoundarySpec>> {
    match cfg.spec()? {
        Some(spec) => Ok(vec![spec]),
        None => enumerate_specs(cfg.n_species()?)
            .iter()
            .map(|s| cfg.with_flag_rates(s))
            .collect(),
    }
}

fn run_check(kind: CheckKind, cfg: &RunConfig) -> Result<(Vec<Value>, bool)> {
    let q = cfg.q()?;
    let (samples, seed) = (cfg.samples(), cfg.seed());
    let reports = match kind {
        CheckKind::Ybe | CheckKind::Runitarity | CheckKind::Hecke => {
            let p = BulkParams::new(cfg.n_species()?, q)?;
            vec![match kind {
                CheckKind::Ybe => check_ybe(&p, samples, seed)?,
                CheckKind::Runitarity => check_r_unitarity(&p, samples, seed)?,
                _ => check_hecke(&p)?,
            }]
        }
        CheckKind::Transfer => vec![check_transfer_commutation(&cfg.model()?, samples, seed, cfg.cap())?],
        _ => {
            let k_max = cfg.k_max();
            // Independent per spec; collect keeps enumeration order.
            target_specs(cfg)?
                .par_iter()
                .map(|spec| match kind {
                    CheckKind::Reflection => check_reflection(spec, &q, samples, seed),
                    CheckKind::Kunitarity => check_k_unitarity(spec, &q, samples, seed),
                    CheckKind::Algebra => check_boundary_algebra(spec, &q),
                    CheckKind::Lemma => check_lemma_relations(spec, &q, k_max),
                    CheckKind::Poly => check_poly_relations(spec, &q),
                    _ => check_cyclotomic(spec, &q),
                })
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    finish(reports)
}

fn enumerate(cfg: &RunConfig) -> Result<Vec<Value>> {
    let n = cfg.n_species()?;
    let rated = cfg.a.is_some() || cfg.c.is_some();
    enumerate_specs(n)
        .iter()
        .map(|s| {
            let spec = if rated { cfg.with_flag_rates(s)? } else { s.with_side(cfg.side()?) };
            to_value(&spec)
        })
        .collect()
}

fn show(cfg: &RunConfig) -> Result<Value> {
    let Some(spec) = cfg.spec()? else {
        bail!("--spec is required");
    };
    let q = cfg.q()?;
    spec.check_q(&q)?;
    let BoundaryParts { b0, b0_plus, b0_minus } = decompose_boundary(&spec, &q)?;
    to_value(&BoundaryDetail {
        description: spec.describe(),
        transitions: transitions(&spec),
        matrix: build_boundary(&spec, &q)?,
        b0,
        b0_plus,
        b0_minus,
        warnings: spec.warnings(&q),
        spec,
    })
}

fn compare(cfg: &RunConfig) -> Result<(Vec<Value>, bool)> {
    let model = cfg.model()?;
    let sim_cfg = cfg.sim_config()?;
    let exact = stationary_distribution(&model)?;
    let sim = simulate_replicas(&model, &sim_cfg, cfg.replicas())?;
    let div = compare_empirical(&sim, &exact)?;
    let tolerance = cfg.tolerance()?;
    let passed = div.total_variation < tolerance;
    let report = CheckReport {
        check: "compare".into(),
        params: CheckParams::model(&model),
        seed: Some(sim_cfg.seed),
        samples: Vec::new(),
        passed,
        witness: None,
        notes: vec![
            format!("total_variation {} (tolerance {tolerance})", div.total_variation),
            format!("max_deviation {}", div.max_deviation),
            format!("chi_square {}", div.chi_square),
        ],
    };
    Ok((vec![to_value(&report)?, to_value(&exact)?, to_value(&sim)?], passed))
}

fn config_label(space: &TensorSpace, index: usize) -> String {
    space.decode(index).iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ")
}

fn distribution_csv(model: &LatticeModel, result: &StationaryResult) -> String {
    let space = model.space();
    let mut out = String::from("index,configuration,probability,probability_f64\n");
    for (i, p) in result.distribution.iter().enumerate() {
        let _ = writeln!(out, "{i},{},{p},{}", config_label(&space, i), Rat::to_f64(p));
    }
    out
}

fn density_csv(report: &SimReport) -> String {
    let mut out = String::from("site,species,density\n");
    for (site, row) in report.site_densities.iter().enumerate() {
        for (species, d) in row.iter().enumerate() {
            let _ = writeln!(out, "{},{},{d}", site + 1, species + 1);
        }
    }
    out
}
