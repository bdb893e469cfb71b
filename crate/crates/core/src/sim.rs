//! Continuous-time Monte Carlo of the open chain (direct Gillespie method).
//!
//! Rates are converted to `f64` once at entry. The random source is
//! `ChaCha8Rng` seeded with `seed_from_u64(seed)`; replica `r` uses stream
//! `r` of the same key. Waiting times are `Exp(1) / total_rate`, and the
//! event is picked by a single uniform draw scanned over the slot table
//! (bonds left to right, then the left and right boundaries).

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov::{boundary_matrices, LatticeModel, StationaryResult};

/// Name of the random source recorded in every report.
pub const GENERATOR: &str = "ChaCha8Rng";

/// Largest configuration space for which the empirical distribution is kept.
pub const DISTRIBUTION_CAP: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub total_events: u64,
    pub burn_in_events: u64,
    /// Events per batch for the batch-means current errors.
    pub record_stride: u64,
    /// Count every observed `(from, to)` jump.
    #[serde(default)]
    pub track_jumps: bool,
    /// Start configuration (1-based species); all holes when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<usize>>,
}

impl SimConfig {
    pub fn new(seed: u64, total_events: u64, burn_in_events: u64, record_stride: u64) -> Result<Self> {
        let cfg = SimConfig {
            seed,
            total_events,
            burn_in_events,
            record_stride,
            track_jumps: false,
            initial: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_events <= self.burn_in_events {
            return Err(Error::InvalidParameter(format!(
                "total_events ({}) must exceed burn_in_events ({})",
                self.total_events, self.burn_in_events
            )));
        }
        if self.record_stride < 1 {
            return Err(Error::InvalidParameter("record_stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-species values at each boundary. `left[t]` is the net rate at which
/// species `t + 1` is created at the left end; `right[t]` the net rate at
/// which it is removed at the right end. In a steady state the two agree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentPair {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JumpCount {
    pub from: usize,
    pub to: usize,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub generator: String,
    pub seed: u64,
    pub replicas: usize,
    /// Events recorded after burn-in, summed over replicas.
    pub events: u64,
    pub burn_in_events: u64,
    /// Recorded model time, summed over replicas.
    pub model_time: f64,
    /// Time-weighted frequencies indexed by the configuration codec; empty
    /// above [`DISTRIBUTION_CAP`].
    pub empirical_distribution: Vec<f64>,
    /// `site_densities[i][t]`: fraction of time site `i + 1` holds species `t + 1`.
    pub site_densities: Vec<Vec<f64>>,
    pub boundary_currents: CurrentPair,
    /// Batch-means standard errors; absent with fewer than two batches.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current_errors: Option<CurrentPair>,
    /// Configuration index where a replica got stuck, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorbing_state: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub jumps: Vec<JumpCount>,
}

impl SimReport {
    /// Empirical rate of `from -> to`: jump count over time spent in `from`.
    /// Requires jump tracking and a stored distribution.
    pub fn estimated_rate(&self, from: usize, to: usize) -> Option<f64> {
        let occupancy = self.empirical_distribution.get(from)? * self.model_time;
        if occupancy <= 0.0 {
            return None;
        }
        let count = self
            .jumps
            .iter()
            .find(|j| j.from == from && j.to == to)
            .map_or(0, |j| j.count);
        Some(count as f64 / occupancy)
    }
}

/// Running mean and variance (Welford).
#[derive(Debug, Clone, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other.clone();
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64) * (other.n as f64) / n as f64;
        self.n = n;
    }

    fn std_error(&self) -> Option<f64> {
        (self.n >= 2).then(|| (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt())
    }
}

/// Raw tallies of one replica; merged by summation.
#[derive(Debug, Clone)]
struct Tally {
    events: u64,
    time: f64,
    occupancy: Vec<f64>,
    density: Vec<Vec<f64>>,
    left_net: Vec<i64>,
    right_net: Vec<i64>,
    left_batches: Vec<Moments>,
    right_batches: Vec<Moments>,
    absorbing: Option<usize>,
    jumps: BTreeMap<(usize, usize), u64>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.events += other.events;
        self.time += other.time;
        for (a, b) in self.occupancy.iter_mut().zip(&other.occupancy) {
            *a += b;
        }
        for (row, other_row) in self.density.iter_mut().zip(&other.density) {
            for (a, b) in row.iter_mut().zip(other_row) {
                *a += b;
            }
        }
        for (a, b) in self.left_net.iter_mut().zip(&other.left_net) {
            *a += b;
        }
        for (a, b) in self.right_net.iter_mut().zip(&other.right_net) {
            *a += b;
        }
        for (a, b) in self.left_batches.iter_mut().zip(&other.left_batches) {
            a.merge(b);
        }
        for (a, b) in self.right_batches.iter_mut().zip(&other.right_batches) {
            a.merge(b);
        }
        self.absorbing = self.absorbing.or(other.absorbing);
        for (k, v) in other.jumps {
            *self.jumps.entry(k).or_default() += v;
        }
        self
    }
}

/// Float copy of the model's rates.
struct RateModel {
    n: usize,
    sites: usize,
    q: f64,
    /// `left_exits[t]`: `(target, rate)` for species `t` at site 1.
    left_exits: Vec<Vec<(usize, f64)>>,
    right_exits: Vec<Vec<(usize, f64)>>,
    left_total: Vec<f64>,
    right_total: Vec<f64>,
}

impl RateModel {
    fn new(model: &LatticeModel) -> Self {
        let n = model.n_species();
        let (bl, br) = boundary_matrices(model);
        let exits = |b: &crate::linalg::QMat| -> Vec<Vec<(usize, f64)>> {
            (0..n)
                .map(|from| {
                    (0..n)
                        .filter(|&to| to != from && b[(to, from)].is_positive())
                        .map(|to| (to, b[(to, from)].to_f64()))
                        .collect()
                })
                .collect()
        };
        let left_exits = exits(&bl);
        let right_exits = exits(&br);
        let total = |e: &Vec<Vec<(usize, f64)>>| e.iter().map(|v| v.iter().map(|x| x.1).sum()).collect();
        RateModel {
            n,
            sites: model.sites(),
            q: model.q().to_f64(),
            left_total: total(&left_exits),
            right_total: total(&right_exits),
            left_exits,
            right_exits,
        }
    }

    fn bond_rate(&self, a: usize, b: usize) -> f64 {
        use std::cmp::Ordering::*;
        match a.cmp(&b) {
            Greater => 1.0,
            Less => self.q,
            Equal => 0.0,
        }
    }
}

fn run_replica(model: &LatticeModel, rates: &RateModel, cfg: &SimConfig, replica: u64) -> Result<Tally> {
    let (n, l) = (rates.n, rates.sites);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(replica);

    // Configuration as 0-based species.
    let mut config: Vec<usize> = match &cfg.initial {
        Some(init) => {
            if init.len() != l || init.iter().any(|&t| t == 0 || t > n) {
                return Err(Error::InvalidParameter(format!(
                    "initial configuration {init:?} does not fit N = {n}, L = {l}"
                )));
            }
            init.iter().map(|t| t - 1).collect()
        }
        None => vec![0; l],
    };
    let store_dist = model.configurations().is_some_and(|d| d <= DISTRIBUTION_CAP);
    let place: Vec<usize> = if store_dist {
        (0..l).map(|i| n.pow((l - 1 - i) as u32)).collect()
    } else {
        vec![0; l]
    };
    let mut index: usize = config.iter().zip(&place).map(|(t, p)| t * p).sum();

    // Slot table: bonds 0..l-1, then the left and right boundaries.
    let slots = l + 1;
    let left_slot = l - 1;
    let right_slot = l;
    let mut slot_rate = vec![0.0; slots];
    let refresh = |slot_rate: &mut [f64], config: &[usize], slot: usize| {
        slot_rate[slot] = if slot < left_slot {
            rates.bond_rate(config[slot], config[slot + 1])
        } else if slot == left_slot {
            rates.left_total[config[0]]
        } else {
            rates.right_total[config[l - 1]]
        };
    };
    for s in 0..slots {
        refresh(&mut slot_rate, &config, s);
    }

    let mut tally = Tally {
        events: 0,
        time: 0.0,
        occupancy: if store_dist {
            vec![0.0; model.configurations().unwrap_or(0)]
        } else {
            Vec::new()
        },
        density: vec![vec![0.0; n]; l],
        left_net: vec![0; n],
        right_net: vec![0; n],
        left_batches: vec![Moments::default(); n],
        right_batches: vec![Moments::default(); n],
        absorbing: None,
        jumps: BTreeMap::new(),
    };
    let mut last_change = vec![0.0; l];
    let mut batch_time = 0.0;
    let mut batch_events = 0u64;
    let mut batch_left = vec![0i64; n];
    let mut batch_right = vec![0i64; n];

    for event in 0..cfg.total_events {
        let recording = event >= cfg.burn_in_events;
        let total: f64 = slot_rate.iter().sum();
        if total <= 0.0 {
            tally.absorbing = Some(config.iter().fold(0, |acc, &t| acc * n + t));
            break;
        }
        let wait: f64 = rng.sample::<f64, _>(Exp1) / total;
        if recording {
            tally.time += wait;
            batch_time += wait;
            if store_dist {
                tally.occupancy[index] += wait;
            }
        }

        let mut u = rng.gen::<f64>() * total;
        let mut slot = slots - 1;
        for (s, &r) in slot_rate.iter().enumerate() {
            if u < r {
                slot = s;
                break;
            }
            u -= r;
        }
        // Guard against rounding pushing `u` past the last positive slot.
        while slot_rate[slot] <= 0.0 {
            slot -= 1;
        }

        let before = index;
        let mut touch = |site: usize, to: usize, config: &mut Vec<usize>, tally: &mut Tally| {
            let from = config[site];
            if recording {
                tally.density[site][from] += tally.time - last_change[site];
                last_change[site] = tally.time;
            }
            if store_dist {
                index = index + to * place[site] - from * place[site];
            }
            config[site] = to;
        };

        if slot < left_slot {
            let (a, b) = (config[slot], config[slot + 1]);
            touch(slot, b, &mut config, &mut tally);
            touch(slot + 1, a, &mut config, &mut tally);
            for s in slot.saturating_sub(1)..=(slot + 1) {
                refresh(&mut slot_rate, &config, s);
            }
            if slot == 0 {
                refresh(&mut slot_rate, &config, left_slot);
            }
            if slot + 1 == l - 1 {
                refresh(&mut slot_rate, &config, right_slot);
            }
        } else {
            let (site, exits) = if slot == left_slot {
                (0, &rates.left_exits[config[0]])
            } else {
                (l - 1, &rates.right_exits[config[l - 1]])
            };
            let from = config[site];
            let mut v = rng.gen::<f64>() * slot_rate[slot];
            let mut to = exits.last().expect("positive slot has exits").0;
            for &(t, r) in exits {
                if v < r {
                    to = t;
                    break;
                }
                v -= r;
            }
            touch(site, to, &mut config, &mut tally);
            if recording {
                if slot == left_slot {
                    batch_left[to] += 1;
                    batch_left[from] -= 1;
                } else {
                    batch_right[from] += 1;
                    batch_right[to] -= 1;
                }
            }
            refresh(&mut slot_rate, &config, slot);
            if site > 0 {
                refresh(&mut slot_rate, &config, site - 1);
            }
            if site < left_slot {
                refresh(&mut slot_rate, &config, site);
            }
            if l == 1 {
                refresh(&mut slot_rate, &config, left_slot);
                refresh(&mut slot_rate, &config, right_slot);
            }
        }

        if recording {
            tally.events += 1;
            if cfg.track_jumps && store_dist {
                *tally.jumps.entry((before, index)).or_default() += 1;
            }
            batch_events += 1;
            if batch_events == cfg.record_stride {
                for t in 0..n {
                    tally.left_net[t] += batch_left[t];
                    tally.right_net[t] += batch_right[t];
                    if batch_time > 0.0 {
                        tally.left_batches[t].push(batch_left[t] as f64 / batch_time);
                        tally.right_batches[t].push(batch_right[t] as f64 / batch_time);
                    }
                }
                batch_left.iter_mut().for_each(|x| *x = 0);
                batch_right.iter_mut().for_each(|x| *x = 0);
                batch_time = 0.0;
                batch_events = 0;
            }
        }
    }
    for t in 0..n {
        tally.left_net[t] += batch_left[t];
        tally.right_net[t] += batch_right[t];
    }
    for site in 0..l {
        tally.density[site][config[site]] += tally.time - last_change[site];
    }
    Ok(tally)
}

fn finish(tally: Tally, cfg: &SimConfig, replicas: usize) -> SimReport {
    let time = tally.time;
    let norm = |x: f64| if time > 0.0 { x / time } else { 0.0 };
    let errors = {
        let left: Option<Vec<f64>> = tally.left_batches.iter().map(Moments::std_error).collect();
        let right: Option<Vec<f64>> = tally.right_batches.iter().map(Moments::std_error).collect();
        left.zip(right).map(|(left, right)| CurrentPair { left, right })
    };
    SimReport {
        generator: GENERATOR.to_string(),
        seed: cfg.seed,
        replicas,
        events: tally.events,
        burn_in_events: cfg.burn_in_events,
        model_time: time,
        empirical_distribution: tally.occupancy.iter().map(|&x| norm(x)).collect(),
        site_densities: tally
            .density
            .iter()
            .map(|row| row.iter().map(|&x| norm(x)).collect())
            .collect(),
        boundary_currents: CurrentPair {
            left: tally.left_net.iter().map(|&c| norm(c as f64)).collect(),
            right: tally.right_net.iter().map(|&c| norm(c as f64)).collect(),
        },
        current_errors: errors,
        absorbing_state: tally.absorbing,
        jumps: tally
            .jumps
            .into_iter()
            .filter(|((from, to), _)| from != to)
            .map(|((from, to), count)| JumpCount { from, to, count })
            .collect(),
    }
}

/// One replica on stream 0.
pub fn simulate(model: &LatticeModel, cfg: &SimConfig) -> Result<SimReport> {
    simulate_replicas(model, cfg, 1)
}

/// Independent replicas on streams `0..replicas`, run in parallel and
/// merged in replica order.
pub fn simulate_replicas(model: &LatticeModel, cfg: &SimConfig, replicas: usize) -> Result<SimReport> {
    cfg.validate()?;
    if replicas == 0 {
        return Err(Error::InvalidParameter("need at least one replica".into()));
    }
    let rates = RateModel::new(model);
    let tallies: Vec<Tally> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| run_replica(model, &rates, cfg, r))
        .collect::<Result<_>>()?;
    let merged = tallies
        .into_iter()
        .reduce(Tally::merge)
        .expect("at least one replica");
    Ok(finish(merged, cfg, replicas))
}

/// Distance between an empirical and an exact distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub total_variation: f64,
    pub max_deviation: f64,
    /// `sum (p_emp - p)^2 / p` over configurations with `p > 0`.
    pub chi_square: f64,
}

pub fn compare_empirical(report: &SimReport, exact: &StationaryResult) -> Result<Divergence> {
    if exact.kernel_dimension != 1 {
        return Err(Error::InvalidComparison(format!(
            "exact kernel has dimension {}",
            exact.kernel_dimension
        )));
    }
    compare_distributions(&report.empirical_distribution, &exact.distribution.iter().map(|x| x.to_f64()).collect::<Vec<_>>())
}

pub fn compare_distributions(empirical: &[f64], exact: &[f64]) -> Result<Divergence> {
    if empirical.len() != exact.len() {
        return Err(Error::InvalidComparison(format!(
            "empirical distribution has {} entries, exact has {}",
            empirical.len(),
            exact.len()
        )));
    }
    let mut tv = 0.0;
    let mut max_dev: f64 = 0.0;
    let mut chi = 0.0;
    for (&e, &p) in empirical.iter().zip(exact) {
        let d = (e - p).abs();
        tv += d;
        max_dev = max_dev.max(d);
        if p > 0.0 {
            chi += d * d / p;
        }
    }
    Ok(Divergence {
        total_variation: tv / 2.0,
        max_deviation: max_dev,
        chi_square: chi,
    })
}
