//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use masep_core::boundary::{
    build_boundary, build_boundary_by_rules, enumerate_specs, tilde_rates, transitions, BoundarySpec,
    RateSymbol, Side, Transition, Variant,
};
use masep_core::bulk::BulkParams;
use masep_core::kmatrix::{k_matrix, k_matrix_baxterised};
use masep_core::linalg::QMat;
use masep_core::markov::{is_irreducible, stationary_distribution, LatticeModel};
use masep_core::rat;
use masep_core::rational::Rat;
use masep_core::sampling::Sampler;
use masep_core::sim::{compare_empirical, simulate, SimConfig};
use masep_core::verify::{
    check_boundary_algebra, check_boundary_algebra_with, check_k_unitarity, check_lemma_relations,
    check_poly_relations, check_r_unitarity, check_reflection, check_transfer_commutation, check_ybe,
    e0_from_boundary, CheckParams, CheckReport, TRANSFER_CAP,
};

type Outcome = Result<String, String>;

const SEED: u64 = 20_240_601;

/// Total-variation tolerance for the simulation cross-check.
const TV_TOLERANCE: f64 = 0.01;
/// Minimum fraction of single-entry perturbations the algebra check must catch.
const MUTATION_DETECTION: f64 = 0.95;
/// Events per simulation run in the cross-check.
const SIM_EVENTS: u64 = 10_000_000;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn report_ok(r: &CheckReport) -> Result<(), String> {
    ensure(r.passed, || {
        format!(
            "{} failed for {:?}: {:?}",
            r.check,
            r.params.spec.as_ref().map(BoundarySpec::describe),
            r.witness
        )
    })
}

/// Rates `(a, c)` and `q != 1` with nonnegative tilde rates.
fn admissible(s: &mut Sampler) -> (Rat, Rat, Rat) {
    loop {
        let (a, c, q) = (s.positive(), s.positive(), s.positive_not_one());
        if !(&(&(&a + &c) + &q) - &Rat::one()).is_negative() {
            return (a, c, q);
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn census() -> Outcome {
    for n in 2..=12 {
        let got = enumerate_specs(n).len();
        ensure(got == binomial(n + 1, 3), || {
            format!("N = {n}: {got} specs, expected {}", binomial(n + 1, 3))
        })?;
    }
    Ok("C(N+1,3) specs for N = 2..12".into())
}

fn n2_fixture() -> Outcome {
    let mut s = Sampler::new(SEED);
    for _ in 0..5 {
        let (a, c, q) = admissible(&mut s);
        let spec = BoundarySpec::new(Side::Left, 2, [1, 1, 2, 2], Variant::Inert, a.clone(), c.clone())
            .map_err(|e| e.to_string())?;
        let (_, ct) = tilde_rates(&a, &c, &q).map_err(|e| e.to_string())?;
        let expected = QMat::from_rows(vec![vec![-&a, ct.clone()], vec![a.clone(), -&ct]])
            .map_err(|e| e.to_string())?;
        let got = build_boundary(&spec, &q).map_err(|e| e.to_string())?;
        ensure(got == expected, || format!("a = {a}, c = {c}, q = {q}: {got:?}"))?;
    }
    Ok("5 random (a, c, q) draws".into())
}

fn table_one() -> Outcome {
    use RateSymbol::*;
    let t = |from, to, rate| Transition { from, to, rate };
    let fixtures: [([usize; 4], Variant, Vec<Transition>); 4] = [
        ([1, 1, 2, 2], Variant::Inert, vec![t(1, 2, A), t(2, 1, CTilde), t(3, 1, CTilde), t(3, 2, ATilde)]),
        ([2, 2, 3, 3], Variant::Inert, vec![t(1, 2, C), t(1, 3, A), t(2, 3, A), t(3, 2, CTilde)]),
        ([1, 1, 3, 3], Variant::Inert, vec![t(1, 3, A), t(3, 1, CTilde)]),
        ([1, 1, 3, 3], Variant::Decaying, vec![t(1, 3, A), t(2, 1, CTilde), t(2, 3, A), t(3, 1, CTilde)]),
    ];
    let specs = enumerate_specs(3);
    ensure(specs.len() == 4, || format!("{} specs for N = 3", specs.len()))?;
    let mut s = Sampler::new(SEED);
    for (labels, variant, expected) in fixtures {
        let spec = specs
            .iter()
            .find(|sp| sp.labels() == labels && sp.variant() == variant)
            .ok_or_else(|| format!("{labels:?} {variant} not enumerated"))?;
        let mut expected = expected;
        expected.sort();
        ensure(transitions(spec) == expected, || {
            format!("{}: rules give {:?}", spec.describe(), transitions(spec))
        })?;
        for _ in 0..3 {
            let (a, c, q) = admissible(&mut s);
            let spec = spec.with_rates(a, c).map_err(|e| e.to_string())?;
            let template = build_boundary(&spec, &q).map_err(|e| e.to_string())?;
            let rules = build_boundary_by_rules(&spec, &q).map_err(|e| e.to_string())?;
            ensure(template == rules, || format!("{}: template and rules differ", spec.describe()))?;
        }
    }
    Ok("4 specs, rate lists and template/rule agreement".into())
}

fn yang_baxter() -> Outcome {
    for n in 2..=4 {
        for q in [rat!(1, 2), rat!(3, 4), rat!(2)] {
            let p = BulkParams::new(n, q).map_err(|e| e.to_string())?;
            report_ok(&check_ybe(&p, 5, SEED).map_err(|e| e.to_string())?)?;
        }
    }
    Ok("N = 2..4, q in {1/2, 3/4, 2}, 5 triples each".into())
}

fn sweep_specs(max_n: usize, draws: usize, mut f: impl FnMut(&BoundarySpec, &Rat, u64) -> Result<(), String>) -> Result<usize, String> {
    let mut s = Sampler::new(SEED);
    let mut count = 0;
    for n in 2..=max_n {
        for spec in enumerate_specs(n) {
            for draw in 0..draws {
                let (a, c, q) = admissible(&mut s);
                let spec = spec.with_rates(a, c).map_err(|e| e.to_string())?;
                f(&spec, &q, SEED + draw as u64)?;
                count += 1;
            }
        }
    }
    Ok(count)
}

fn reflection() -> Outcome {
    let runs = sweep_specs(4, 3, |spec, q, seed| {
        report_ok(&check_reflection(spec, q, 5, seed).map_err(|e| e.to_string())?)
    })?;
    Ok(format!("{runs} (spec, rates, q) runs, 5 pairs each"))
}

fn unitarity() -> Outcome {
    for n in 2..=4 {
        for q in [rat!(1, 2), rat!(3, 4), rat!(2)] {
            let p = BulkParams::new(n, q).map_err(|e| e.to_string())?;
            report_ok(&check_r_unitarity(&p, 5, SEED).map_err(|e| e.to_string())?)?;
        }
    }
    let runs = sweep_specs(4, 3, |spec, q, seed| {
        report_ok(&check_k_unitarity(spec, q, 5, seed).map_err(|e| e.to_string())?)?;
        let right = spec.with_side(Side::Right);
        report_ok(&check_k_unitarity(&right, q, 5, seed).map_err(|e| e.to_string())?)
    })?;
    Ok(format!("R for N = 2..4; K and Kbar over {runs} runs"))
}

fn boundary_algebra() -> Outcome {
    let runs = sweep_specs(5, 1, |spec, q, _| {
        report_ok(&check_boundary_algebra(spec, q).map_err(|e| e.to_string())?)
    })?;

    // Perturb each entry of B by +1 in turn and keep e0 = (B + s + q - 1)/(1 - q).
    let (mut tried, mut caught) = (0usize, 0usize);
    let mut s = Sampler::new(SEED ^ 0x5eed);
    for n in 2..=4 {
        for spec in enumerate_specs(n) {
            let (a, c, q) = admissible(&mut s);
            let spec = spec.with_rates(a.clone(), c.clone()).map_err(|e| e.to_string())?;
            let b = build_boundary(&spec, &q).map_err(|e| e.to_string())?;
            let p = BulkParams::new(n, q.clone()).map_err(|e| e.to_string())?;
            let local = masep_core::bulk::local_markov(&p);
            for i in 0..n {
                for j in 0..n {
                    let mut mutated = b.clone();
                    mutated[(i, j)] += &Rat::one();
                    let e0 = e0_from_boundary(&mutated, &(&a + &c), &q).map_err(|e| e.to_string())?;
                    let r = check_boundary_algebra_with(&local, &e0, CheckParams::boundary(&spec, &q))
                        .map_err(|e| e.to_string())?;
                    tried += 1;
                    caught += usize::from(!r.passed);
                }
            }
        }
    }
    let rate = caught as f64 / tried as f64;
    ensure(rate >= MUTATION_DETECTION, || {
        format!("mutation detection {caught}/{tried} = {rate:.3} below {MUTATION_DETECTION}")
    })?;
    Ok(format!("{runs} specs N <= 5; mutations caught {caught}/{tried} ({:.1}%)", 100.0 * rate))
}

fn lemma_and_poly() -> Outcome {
    let runs = sweep_specs(5, 1, |spec, q, _| {
        report_ok(&check_lemma_relations(spec, q, 4).map_err(|e| e.to_string())?)?;
        report_ok(&check_poly_relations(spec, q).map_err(|e| e.to_string())?)
    })?;
    Ok(format!("{runs} specs N <= 5, k <= 4"))
}

fn k_forms() -> Outcome {
    let runs = sweep_specs(4, 1, |spec, q, seed| {
        let mut s = Sampler::new(seed);
        for _ in 0..5 {
            let (x, closed, bax) = s
                .draw(|s| {
                    let x = s.point();
                    let closed = k_matrix(spec, q, &x)?;
                    let bax = k_matrix_baxterised(spec, q, &x)?;
                    Ok((x, closed, bax))
                })
                .map_err(|e| e.to_string())?;
            ensure(closed == bax, || format!("{} at x = {x}", spec.describe()))?;
        }
        Ok(())
    })?;
    Ok(format!("{runs} specs N <= 4, 5 points each"))
}

fn right_of(n: usize, labels: [usize; 4], variant: Variant, b: Rat, d: Rat) -> Result<BoundarySpec, String> {
    BoundarySpec::new(Side::Right, n, labels, variant, b, d).map_err(|e| e.to_string())
}

fn transfer() -> Outcome {
    let q = rat!(3, 4);
    let mut models = Vec::new();
    for l in [2, 3] {
        let left = enumerate_specs(2)[0].with_rates(rat!(1), rat!(2)).map_err(|e| e.to_string())?;
        let right = right_of(2, [1, 1, 2, 2], Variant::Inert, rat!(3, 2), rat!(1, 3))?;
        models.push(LatticeModel::new(l, q.clone(), left, right).map_err(|e| e.to_string())?);
    }
    for left in enumerate_specs(3) {
        for right in enumerate_specs(3) {
            let left = left.with_rates(rat!(1), rat!(2)).map_err(|e| e.to_string())?;
            let right = right.with_side(Side::Right).with_rates(rat!(3, 2), rat!(1, 3)).map_err(|e| e.to_string())?;
            models.push(LatticeModel::new(2, q.clone(), left, right).map_err(|e| e.to_string())?);
        }
    }
    for model in &models {
        report_ok(&check_transfer_commutation(model, 3, SEED, TRANSFER_CAP).map_err(|e| e.to_string())?)?;
    }
    Ok(format!("{} models over (N, L) in {{(2,2), (2,3), (3,2)}}, 3 points each", models.len()))
}

fn pairing(n: usize, sites: usize) -> Result<LatticeModel, String> {
    let (left, right) = match n {
        3 => ([2, 2, 3, 3], [1, 1, 2, 2]),
        4 => ([2, 2, 4, 4], [1, 1, 3, 3]),
        5 => ([2, 3, 4, 5], [1, 2, 3, 4]),
        _ => return Err(format!("no pairing for N = {n}")),
    };
    let left = BoundarySpec::new(Side::Left, n, left, Variant::Decaying, rat!(1), rat!(2)).map_err(|e| e.to_string())?;
    let right = right_of(n, right, Variant::Decaying, rat!(3, 2), rat!(1, 2))?;
    LatticeModel::new(sites, rat!(1, 2), left, right).map_err(|e| e.to_string())
}

fn irreducibility() -> Outcome {
    for (n, l) in [(3, 2), (3, 3), (4, 2), (5, 2)] {
        let model = pairing(n, l)?;
        ensure(is_irreducible(&model).map_err(|e| e.to_string())?, || {
            format!("(N, L) = ({n}, {l}) not strongly connected")
        })?;
    }
    Ok("(N, L) in {(3,2), (3,3), (4,2), (5,2)}".into())
}

fn simulation() -> Outcome {
    let n2 = LatticeModel::new(
        3,
        rat!(1, 2),
        BoundarySpec::new(Side::Left, 2, [1, 1, 2, 2], Variant::Inert, rat!(1), rat!(1, 2)).map_err(|e| e.to_string())?,
        right_of(2, [1, 1, 2, 2], Variant::Inert, rat!(2, 3), rat!(1, 3))?,
    )
    .map_err(|e| e.to_string())?;
    let n3 = pairing(3, 2)?;
    let mut lines = Vec::new();
    for (name, model) in [("N=2 L=3", n2), ("N=3 L=2", n3)] {
        let exact = stationary_distribution(&model).map_err(|e| e.to_string())?;
        ensure(exact.irreducible && exact.kernel_dimension == 1, || format!("{name}: not irreducible"))?;
        let cfg = SimConfig::new(SEED, SIM_EVENTS, 10_000, 10_000).map_err(|e| e.to_string())?;
        let report = simulate(&model, &cfg).map_err(|e| e.to_string())?;
        let div = compare_empirical(&report, &exact).map_err(|e| e.to_string())?;
        ensure(div.total_variation < TV_TOLERANCE, || {
            format!("{name}: TV {} >= {TV_TOLERANCE}", div.total_variation)
        })?;
        lines.push(format!("{name} TV {:.5}", div.total_variation));
    }
    Ok(lines.join(", "))
}

fn determinism() -> Outcome {
    let run = || -> Result<String, String> {
        let model = pairing(3, 2)?;
        let p = BulkParams::new(3, rat!(3, 4)).map_err(|e| e.to_string())?;
        let ybe = check_ybe(&p, 2, SEED).map_err(|e| e.to_string())?;
        let refl = check_reflection(model.left(), model.q(), 2, SEED).map_err(|e| e.to_string())?;
        let st = stationary_distribution(&model).map_err(|e| e.to_string())?;
        let cfg = SimConfig::new(SEED, 200_000, 1_000, 1_000).map_err(|e| e.to_string())?;
        let sim = masep_core::sim::simulate_replicas(&model, &cfg, 3).map_err(|e| e.to_string())?;
        let json = serde_json::json!({ "ybe": ybe, "reflection": refl, "stationary": st, "sim": sim });
        serde_json::to_string(&json).map_err(|e| e.to_string())
    };
    let first = run()?;
    let second = run()?;
    ensure(first == second, || "reports differ between identical runs".into())?;
    Ok(format!("{} identical bytes", first.len()))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "boundary census", budget: Duration::from_secs(1), run: census },
        Criterion { id: 2, name: "two-species fixture", budget: Duration::from_secs(1), run: n2_fixture },
        Criterion { id: 3, name: "three-species rate table", budget: Duration::from_secs(1), run: table_one },
        Criterion { id: 4, name: "yang-baxter", budget: Duration::from_secs(30), run: yang_baxter },
        Criterion { id: 5, name: "reflection equation", budget: Duration::from_secs(300), run: reflection },
        Criterion { id: 6, name: "unitarity", budget: Duration::from_secs(300), run: unitarity },
        Criterion { id: 7, name: "boundary algebra", budget: Duration::from_secs(120), run: boundary_algebra },
        Criterion { id: 8, name: "lemma and polynomial relations", budget: Duration::from_secs(120), run: lemma_and_poly },
        Criterion { id: 9, name: "closed and factorized K agree", budget: Duration::from_secs(60), run: k_forms },
        Criterion { id: 10, name: "transfer matrix commutation", budget: Duration::from_secs(300), run: transfer },
        Criterion { id: 11, name: "irreducibility of pairings", budget: Duration::from_secs(60), run: irreducibility },
        Criterion { id: 12, name: "stationary vs simulation", budget: Duration::from_secs(600), run: simulation },
        Criterion { id: 13, name: "determinism", budget: Duration::from_secs(60), run: determinism },
    ];
    let mut failures = 0;
    for c in criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.budget => Err(format!("{detail}; over time budget {:?}", c.budget)),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {:>2} {} ({:.2?}): {detail}", c.id, c.name, elapsed),
            Err(why) => {
                failures += 1;
                println!("FAIL {:>2} {} ({:.2?}): {why}", c.id, c.name, elapsed);
            }
        }
    }
    println!("acceptance: {} of 13 criteria passed", 13 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
