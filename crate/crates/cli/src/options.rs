use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use masep_core::boundary::{BoundarySpec, Side, Variant};
use masep_core::markov::LatticeModel;
use masep_core::rational::Rat;
use masep_core::sim::SimConfig;
use masep_core::verify::TRANSFER_CAP;
use serde::{Deserialize, Serialize};

pub const DEFAULT_Q: &str = "1/2";
const DEFAULT_SAMPLES: usize = 5;
const DEFAULT_K_MAX: u32 = 4;
const DEFAULT_EVENTS: u64 = 1_000_000;
const DEFAULT_BURN_IN: u64 = 10_000;
const DEFAULT_STRIDE: u64 = 10_000;
const DEFAULT_TOLERANCE: &str = "1/100";

/// Flags shared by every subcommand. Each one can also be set in the
/// `--config` file under the same (kebab-case) key.
#[derive(Args, Debug, Clone, Default)]
pub struct Flags {
    /// TOML file with default values for any of the flags below
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of species N
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of sites L
    #[arg(long)]
    pub l: Option<usize>,
    /// Bulk asymmetry q as "p/q" [default: 1/2]
    #[arg(long)]
    pub q: Option<String>,
    /// Boundary spec "s1,s2,f2,f1[,variant][:a=p/q,c=p/q]"
    #[arg(long)]
    pub spec: Option<String>,
    /// Side of --spec: left or right [default: left]
    #[arg(long)]
    pub side: Option<String>,
    /// Left boundary spec, same syntax as --spec
    #[arg(long)]
    pub left: Option<String>,
    /// Right boundary spec, labels as seen from the right end
    #[arg(long)]
    pub right: Option<String>,
    /// Rate a (alpha on the left, beta on the right)
    #[arg(long)]
    pub a: Option<String>,
    /// Rate c (gamma on the left, delta on the right)
    #[arg(long)]
    pub c: Option<String>,
    /// Spectral samples per check [default: 5]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Random seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest power in the lemma relations [default: 4]
    #[arg(long)]
    pub k_max: Option<u32>,
    /// Dimension cap for transfer-matrix checks
    #[arg(long)]
    pub cap: Option<usize>,
    /// Simulation events after burn-in
    #[arg(long)]
    pub events: Option<u64>,
    /// Simulation events discarded before recording
    #[arg(long)]
    pub burn_in: Option<u64>,
    /// Events per batch for current error bars
    #[arg(long)]
    pub stride: Option<u64>,
    /// Independent simulation replicas [default: 1]
    #[arg(long)]
    pub replicas: Option<usize>,
    /// Count every configuration jump
    #[arg(long)]
    pub track_jumps: bool,
    /// Initial configuration, comma-separated species
    #[arg(long)]
    pub initial: Option<String>,
    /// Total-variation tolerance for `compare` as "p/q" [default: 1/100]
    #[arg(long)]
    pub tolerance: Option<String>,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a CSV table (distribution or site densities)
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// A boundary either in flag syntax or as a full record.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpecInput {
    Text(String),
    Record(BoundarySpec),
}

/// Merged configuration, as echoed in the report envelope.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<SpecInput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub left: Option<SpecInput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub right: Option<SpecInput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub events: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stride: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub track_jumps: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Config file values, overridden by any flag given on the command line.
    pub fn resolve(flags: &Flags) -> Result<Self> {
        let file = match &flags.config {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        let text = |s: &Option<String>| s.clone().map(SpecInput::Text);
        Ok(RunConfig {
            n: flags.n.or(file.n),
            l: flags.l.or(file.l),
            q: flags.q.clone().or(file.q),
            spec: text(&flags.spec).or(file.spec),
            side: flags.side.clone().or(file.side),
            left: text(&flags.left).or(file.left),
            right: text(&flags.right).or(file.right),
            a: flags.a.clone().or(file.a),
            c: flags.c.clone().or(file.c),
            samples: flags.samples.or(file.samples),
            seed: flags.seed.or(file.seed),
            k_max: flags.k_max.or(file.k_max),
            cap: flags.cap.or(file.cap),
            events: flags.events.or(file.events),
            burn_in: flags.burn_in.or(file.burn_in),
            stride: flags.stride.or(file.stride),
            replicas: flags.replicas.or(file.replicas),
            track_jumps: if flags.track_jumps { Some(true) } else { file.track_jumps },
            initial: flags.initial.clone().or(file.initial),
            tolerance: flags.tolerance.clone().or(file.tolerance),
            out: flags.out.clone().or(file.out),
            csv: flags.csv.clone().or(file.csv),
        })
    }

    pub fn n_species(&self) -> Result<usize> {
        self.n.ok_or_else(|| anyhow!("--n is required"))
    }

    pub fn sites(&self) -> Result<usize> {
        self.l.ok_or_else(|| anyhow!("--l is required"))
    }

    pub fn q(&self) -> Result<Rat> {
        parse_rat("q", self.q.as_deref().unwrap_or(DEFAULT_Q))
    }

    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(DEFAULT_SAMPLES)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn k_max(&self) -> u32 {
        self.k_max.unwrap_or(DEFAULT_K_MAX)
    }

    pub fn cap(&self) -> usize {
        self.cap.unwrap_or(TRANSFER_CAP)
    }

    pub fn replicas(&self) -> usize {
        self.replicas.unwrap_or(1)
    }

    pub fn tolerance(&self) -> Result<f64> {
        Ok(parse_rat("tolerance", self.tolerance.as_deref().unwrap_or(DEFAULT_TOLERANCE))?.to_f64())
    }

    pub fn side(&self) -> Result<Side> {
        match self.side.as_deref().unwrap_or("left") {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            other => bail!("--side must be left or right, got {other:?}"),
        }
    }

    /// Rates given by `--a`/`--c`, each optional.
    fn flag_rates(&self) -> Result<(Option<Rat>, Option<Rat>)> {
        let a = self.a.as_deref().map(|s| parse_rat("a", s)).transpose()?;
        let c = self.c.as_deref().map(|s| parse_rat("c", s)).transpose()?;
        Ok((a, c))
    }

    /// The `--spec` boundary, or `None` when absent.
    pub fn spec(&self) -> Result<Option<BoundarySpec>> {
        let n = self.n_species()?;
        let side = self.side()?;
        self.spec
            .as_ref()
            .map(|input| spec_from_input(input, "spec", side, n, self.flag_rates()?))
            .transpose()
    }

    /// Applies the `--a`/`--c` rates to an enumerated spec.
    pub fn with_flag_rates(&self, spec: &BoundarySpec) -> Result<BoundarySpec> {
        match self.flag_rates()? {
            (Some(a), Some(c)) => Ok(spec.with_side(self.side()?).with_rates(a, c)?),
            _ => bail!("--a and --c are required when --spec is omitted"),
        }
    }

    pub fn model(&self) -> Result<LatticeModel> {
        let n = self.n_species()?;
        let left = self.left.as_ref().ok_or_else(|| anyhow!("--left is required"))?;
        let right = self.right.as_ref().ok_or_else(|| anyhow!("--right is required"))?;
        let left = spec_from_input(left, "left", Side::Left, n, (None, None))?;
        let right = spec_from_input(right, "right", Side::Right, n, (None, None))?;
        Ok(LatticeModel::new(self.sites()?, self.q()?, left, right)?)
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let mut cfg = SimConfig::new(
            self.seed(),
            self.events.unwrap_or(DEFAULT_EVENTS),
            self.burn_in.unwrap_or(DEFAULT_BURN_IN),
            self.stride.unwrap_or(DEFAULT_STRIDE),
        )?;
        cfg.track_jumps = self.track_jumps.unwrap_or(false);
        cfg.initial = self
            .initial
            .as_deref()
            .map(|s| {
                s.split(',')
                    .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad species {t:?} in --initial")))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn parse_rat(name: &str, s: &str) -> Result<Rat> {
    Rat::from_str(s.trim()).map_err(|_| anyhow!("--{name}: {s:?} is not a rational of the form p or p/q"))
}

fn spec_from_input(
    input: &SpecInput,
    name: &str,
    side: Side,
    n: usize,
    overrides: (Option<Rat>, Option<Rat>),
) -> Result<BoundarySpec> {
    match input {
        SpecInput::Record(spec) => {
            if spec.side() != side {
                bail!("{name}: record has side {}, expected {side}", spec.side());
            }
            if spec.n_species() != n {
                bail!("{name}: record has N = {}, expected {n}", spec.n_species());
            }
            Ok(spec.clone())
        }
        SpecInput::Text(text) => parse_spec(text, side, n, overrides).with_context(|| format!("--{name} {text:?}")),
    }
}

/// Parses `s1,s2,f2,f1[,variant][:a=p/q,c=p/q]`. Rates in `overrides`
/// replace those in the suffix.
pub fn parse_spec(text: &str, side: Side, n: usize, overrides: (Option<Rat>, Option<Rat>)) -> Result<BoundarySpec> {
    let (head, rates) = match text.split_once(':') {
        Some((h, r)) => (h, Some(r)),
        None => (text, None),
    };
    let parts: Vec<&str> = head.split(',').map(str::trim).collect();
    if !(4..=5).contains(&parts.len()) {
        bail!("expected s1,s2,f2,f1[,variant]");
    }
    let mut labels = [0usize; 4];
    for (slot, part) in labels.iter_mut().zip(&parts) {
        *slot = part.parse().with_context(|| format!("label {part:?} is not a positive integer"))?;
    }
    let variant = match parts.get(4).copied() {
        None | Some("inert") => Variant::Inert,
        Some("decaying") => Variant::Decaying,
        Some(other) => bail!("variant must be inert or decaying, got {other:?}"),
    };
    let (mut a, mut c) = (None, None);
    for item in rates.into_iter().flat_map(|r| r.split(',')) {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| anyhow!("rate {item:?} must look like a=p/q"))?;
        match key.trim() {
            "a" => a = Some(parse_rat("a", value)?),
            "c" => c = Some(parse_rat("c", value)?),
            other => bail!("unknown rate {other:?}, expected a or c"),
        }
    }
    let a = overrides.0.or(a).ok_or_else(|| anyhow!("rate a is missing"))?;
    let c = overrides.1.or(c).ok_or_else(|| anyhow!("rate c is missing"))?;
    Ok(BoundarySpec::new(side, n, labels, variant, a, c)?)
}
