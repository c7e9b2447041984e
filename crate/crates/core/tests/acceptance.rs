//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines are always printed. Exits
//! non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::time::{Duration, Instant};

use multicut::bench::{self, median, spearman, ExperimentSpec};
use multicut::embedding::{
    chimera_graph, embed_ising, find_embedding, unembed, validate_embedding, EmbedParams,
    Embedding, HardwareGraph, LogicalGraph,
};
use multicut::embedding::autoscale_factor;
use multicut::qubo::{check_feasibility, default_penalties, extract_cutset};
use multicut::solvers::{
    exact_bruteforce, exact_ground_state, exact_multicut_bnb, racing_solve, simulated_annealing,
    SolverConfig,
};
use multicut::{generate_tree_instance, EncodingOptions, Qubo, SaSchedule, ScheduleKind, TreeInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// Instance with the requested size; bumps the seed if rejection sampling
/// gives up.
fn instance(n: usize, k: usize, seed: u64) -> TreeInstance {
    (0..100)
        .find_map(|d| generate_tree_instance(n, k, seed + 1_000_003 * d).ok())
        .expect("some seed generates")
}

/// Minimum multicut by enumerating subsets of non-terminal vertices in order
/// of size and checking separation with a flood fill.
fn brute_force_multicut(inst: &TreeInstance) -> usize {
    let n = inst.num_vertices();
    let terminals = inst.terminal_set();
    let free: Vec<usize> = (0..n).filter(|v| !terminals.contains(v)).collect();
    let separates = |removed: &BTreeSet<usize>| {
        inst.terminal_pairs().iter().all(|&(s, t)| {
            let mut seen = vec![false; n];
            let mut queue = VecDeque::from([s]);
            seen[s] = true;
            while let Some(u) = queue.pop_front() {
                for &w in inst.neighbors(u) {
                    if !seen[w] && !removed.contains(&w) {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            !seen[t]
        })
    };
    let mut best = usize::MAX;
    for mask in 0u64..(1 << free.len()) {
        let size = mask.count_ones() as usize;
        if size >= best {
            continue;
        }
        let removed: BTreeSet<usize> =
            free.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect();
        if separates(&removed) {
            best = size;
        }
    }
    best
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let results: Vec<(usize, bool, usize, usize, usize)> = (0..200u64)
        .into_par_iter()
        .map(|i| {
            let n = 8 + (i as usize % 9);
            let k = 2 + (i as usize / 9) % 3;
            let inst = instance(n, k, i);
            let (m1, m2) = default_penalties::<f64>(&inst);
            let q = EncodingOptions::slack().build(&inst, m1, m2).unwrap();
            let (x, _) = exact_ground_state(&q).unwrap();
            let cut = extract_cutset(&q, &x);
            let feasible = check_feasibility(&inst, &cut).is_feasible();
            let bnb = exact_multicut_bnb(&inst).unwrap().len();
            (i as usize, feasible, cut.len(), bnb, brute_force_multicut(&inst))
        })
        .collect();
    let elapsed = start.elapsed();
    let agree = results
        .iter()
        .filter(|&&(_, f, c, b, o)| f && c == b && b == o)
        .count();
    verdict(
        agree == 200 && elapsed < Duration::from_secs(300),
        format!("{agree}/200 ground states feasible and optimal, {:.1}s", elapsed.as_secs_f64()),
    )
}

fn criterion_2() -> Verdict {
    let inst = TreeInstance::new(3, vec![(0, 1), (1, 2)], vec![(0, 2)], 0).unwrap();
    let q = EncodingOptions::literal().build(&inst, 10i64.into(), 10i64.into());
    let q: Qubo<multicut::Rational64> = q.unwrap();
    // Independent evaluation of Σx + M1 (x0 + x2)² + M2 (3 − x0 − x1 − x2)².
    let direct = |x: &[u8]| {
        let s: i64 = x.iter().map(|&b| b as i64).sum();
        let t = (x[0] + x[2]) as i64;
        s + 10 * t * t + 10 * (3 - s) * (3 - s)
    };
    let mut table = Vec::new();
    for mask in 0..8u8 {
        let x: Vec<u8> = (0..3).map(|i| mask >> (2 - i) & 1).collect();
        let e = q.energy(&x).unwrap();
        table.push((x, e, direct(&[mask >> 2 & 1, mask >> 1 & 1, mask & 1])));
    }
    let consistent = table.iter().all(|(_, e, d)| *e == (*d).into());
    let (x, e) = exact_bruteforce(&q).unwrap();
    let violates_c1 = x[0] == 1 || x[2] == 1;
    let best_feasible = table
        .iter()
        .filter(|(x, _, _)| x[0] == 0 && x[2] == 0 && x[1] == 1)
        .map(|(_, e, _)| *e)
        .min()
        .unwrap();
    let pass = consistent && e == 22.into() && violates_c1 && best_feasible == 41.into();
    verdict(
        pass,
        format!("minimum {e} at {x:?} (violates C1: {violates_c1}), best feasible {best_feasible}"),
    )
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=10);
        let mut linear = BTreeMap::new();
        let mut quadratic = BTreeMap::new();
        for i in 0..n {
            if rng.gen_bool(0.8) {
                linear.insert(i, rng.gen_range(-5.0..5.0));
            }
            for j in i + 1..n {
                if rng.gen_bool(0.5) {
                    quadratic.insert((i, j), rng.gen_range(-5.0..5.0));
                }
            }
        }
        let offset = rng.gen_range(-3.0..3.0);
        let q = Qubo::unlabeled(n, linear.clone(), quadratic.clone(), offset).unwrap();
        let ising = q.to_ising();
        for mask in 0u32..(1 << n) {
            let x: Vec<u8> = (0..n).map(|i| (mask >> i & 1) as u8).collect();
            let s: Vec<i8> = x.iter().map(|&b| 2 * b as i8 - 1).collect();
            let direct = offset
                + linear.iter().map(|(&i, &u)| u * x[i] as f64).sum::<f64>()
                + quadratic.iter().map(|(&(i, j), &w)| w * (x[i] * x[j]) as f64).sum::<f64>();
            let e = ising.energy(&s).unwrap();
            worst = worst.max((e - direct).abs()).max((q.energy(&x).unwrap() - direct).abs());
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= 1e-9 && elapsed < Duration::from_secs(60),
        format!("{checked} assignments, max |ΔE| = {worst:.2e}, {:.1}s", elapsed.as_secs_f64()),
    )
}

fn criterion_4() -> Verdict {
    let start = Instant::now();
    const SIZES: [(usize, usize); 5] = [(24, 3), (34, 4), (49, 5), (70, 7), (100, 10)];
    let cases: Vec<(TreeInstance, usize)> = (0..30u64)
        .into_par_iter()
        .map(|s| {
            let (n, k) = SIZES[s as usize % SIZES.len()];
            let inst = instance(n, k, 400 + s);
            let opt = exact_multicut_bnb(&inst).unwrap().len();
            (inst, opt)
        })
        .collect();

    let mut configs = Vec::new();
    for kind in [ScheduleKind::Geometric, ScheduleKind::Linear] {
        for beta_max in [10.0, 20.0] {
            for sweeps in [100, 200, 500] {
                for m2 in ["2", "5", "|V|+1"] {
                    configs.push((kind, beta_max, sweeps, m2));
                }
            }
        }
    }
    let medians: Vec<(String, f64)> = configs
        .par_iter()
        .map(|&(kind, beta_max, sweeps, m2)| {
            let schedule = SaSchedule::new(kind, 0.1, beta_max, sweeps).unwrap();
            let mut gaps: Vec<f64> = cases
                .iter()
                .enumerate()
                .map(|(s, (inst, opt))| {
                    let m2 = match m2 {
                        "2" => 2.0,
                        "5" => 5.0,
                        _ => (inst.num_vertices() + 1) as f64,
                    };
                    let q = EncodingOptions::slack().build(inst, 1.0, m2).unwrap();
                    let set = simulated_annealing(&q, &schedule, 100, s as u64).unwrap();
                    let cut = extract_cutset(&q, &set.bits(set.best().unwrap()));
                    if check_feasibility(inst, &cut).is_feasible() {
                        bench::optimality_gap(cut.len() as f64, *opt as f64).unwrap()
                    } else {
                        f64::INFINITY
                    }
                })
                .collect();
            let id = format!("{}, M2={m2}", schedule.tag());
            (id, median(&mut gaps).unwrap())
        })
        .collect();
    let (best_id, best) = medians
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .cloned()
        .unwrap();
    let default_best = medians
        .iter()
        .filter(|m| m.0.ends_with("|V|+1"))
        .map(|m| m.1)
        .fold(f64::INFINITY, f64::min);
    let elapsed = start.elapsed();
    verdict(
        best <= 25.0 && elapsed < Duration::from_secs(1200),
        format!(
            "best config [{best_id}] median gap {best:.1}% over 30 seeds (default penalties: {default_best:.1}%), {} configs, {:.1}s",
            configs.len(),
            elapsed.as_secs_f64()
        ),
    )
}

/// Disjoint, connected chains covering every logical edge with a coupler.
fn independent_check(lg: &LogicalGraph, hw: &HardwareGraph, emb: &Embedding) -> bool {
    let mut owner = BTreeMap::new();
    for v in 0..lg.num_vars {
        let Some(chain) = emb.chain(v) else { return false };
        if chain.is_empty() {
            return false;
        }
        for &q in chain {
            if q >= hw.num_qubits() || owner.insert(q, v).is_some() {
                return false;
            }
        }
        let members: BTreeSet<usize> = chain.iter().copied().collect();
        let mut seen = BTreeSet::from([chain[0]]);
        let mut stack = vec![chain[0]];
        while let Some(q) = stack.pop() {
            for &r in hw.neighbors(q) {
                if members.contains(&r) && seen.insert(r) {
                    stack.push(r);
                }
            }
        }
        if seen.len() != members.len() {
            return false;
        }
    }
    lg.edges.iter().all(|&(a, b)| {
        let cb = emb.chain(b).unwrap();
        emb.chain(a).unwrap().iter().any(|&p| cb.iter().any(|&r| hw.has_edge(p, r)))
    })
}

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let hw = chimera_graph(16, 16, 4).unwrap();
    let outcomes: Vec<(bool, bool)> = (0..100u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(500 + s);
            let n = rng.gen_range(12..=60);
            let k = rng.gen_range(2..=8);
            let inst = instance(n, k, 500 + s);
            let (m1, m2) = default_penalties::<f64>(&inst);
            let q = EncodingOptions::slack().build(&inst, m1, m2).unwrap();
            let vars = q.num_vars().min(60);
            let lg = LogicalGraph::new(
                vars,
                q.interactions().into_iter().filter(|&(a, b)| a < vars && b < vars),
            );
            match find_embedding(&lg, &hw, &EmbedParams { seed: s, ..Default::default() }) {
                Ok(emb) => {
                    let valid = validate_embedding(&lg, &hw, &emb).is_valid();
                    (true, valid && independent_check(&lg, &hw, &emb))
                }
                Err(_) => (false, true),
            }
        })
        .collect();
    let successes = outcomes.iter().filter(|o| o.0).count();
    let valid = outcomes.iter().filter(|o| o.0 && o.1).count();
    let k6_fails = find_embedding(
        &LogicalGraph::complete(6),
        &chimera_graph(1, 1, 4).unwrap(),
        &EmbedParams::default(),
    )
    .is_err();
    verdict(
        successes == valid && k6_fails,
        format!(
            "{valid}/{successes} reported embeddings valid ({successes}/100 embedded), K6 into C(1,1,4) fails: {k6_fails}, {:.1}s",
            start.elapsed().as_secs_f64()
        ),
    )
}

/// A slack model with exactly 30 variables.
fn thirty_variable_model() -> Qubo<f64> {
    for seed in 0.. {
        for (n, k) in [(24, 4), (26, 4), (22, 3)] {
            let Ok(inst) = generate_tree_instance(n, k, seed) else { continue };
            let q = EncodingOptions::slack().build(&inst, 1.0, 2.0).unwrap();
            if q.num_vars() == 30 {
                return q;
            }
        }
    }
    unreachable!()
}

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let ising = thirty_variable_model().to_ising();
    let model = ising.scaled(1.0 / autoscale_factor(&ising));
    let hw = chimera_graph(16, 16, 4).unwrap();
    let lg = LogicalGraph::new(model.num_vars(), model.interactions());
    let emb = find_embedding(&lg, &hw, &EmbedParams::default()).unwrap();
    let schedule = SaSchedule::new(ScheduleKind::Geometric, 0.1, 10.0, 100).unwrap();
    let strengths: Vec<f64> = (1..=8).map(|i| 0.25 * i as f64).collect();
    let points: Vec<(f64, f64)> = strengths
        .par_iter()
        .flat_map_iter(|&cs| {
            let embedded = embed_ising(&model, &emb, &hw, cs).unwrap();
            (0..20u64).map(move |seed| (cs, embedded.clone(), seed))
        })
        .map(|(cs, embedded, seed)| {
            let physical = simulated_annealing(&embedded.model, &schedule, 20, seed).unwrap();
            let (_, stats) = unembed(&physical, &embedded, &model).unwrap();
            (cs, stats.break_fraction)
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    let rho = spearman(&xs, &ys);
    let mean_at = |cs: f64| {
        let v: Vec<f64> = points.iter().filter(|p| p.0 == cs).map(|p| p.1).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let elapsed = start.elapsed();
    verdict(
        rho.is_some_and(|r| r <= -0.5) && elapsed < Duration::from_secs(600),
        format!(
            "Spearman ρ = {} over {} runs (mean break fraction {:.3} at 0.25, {:.3} at 2.0), {} physical qubits, {:.1}s",
            rho.map_or("undefined".into(), |r| format!("{r:.3}")),
            points.len(),
            mean_at(0.25),
            mean_at(2.0),
            emb.num_physical(),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_7() -> Verdict {
    let hw = chimera_graph(16, 16, 4).unwrap();
    const N: usize = 12;
    let overheads = |lg: &LogicalGraph| -> Option<Vec<f64>> {
        (0..20u64)
            .into_par_iter()
            .map(|seed| {
                let emb = find_embedding(lg, &hw, &EmbedParams { seed, ..Default::default() }).ok()?;
                Some(emb.chains().values().map(Vec::len).sum::<usize>() as f64 / N as f64)
            })
            .collect()
    };
    let (Some(mut cliques), Some(mut paths)) =
        (overheads(&LogicalGraph::complete(N)), overheads(&LogicalGraph::path(N)))
    else {
        return verdict(false, "an embedding failed");
    };
    let all_super_unit = cliques.iter().chain(&paths).all(|&r| r >= 1.0);
    let (mc, mp) = (median(&mut cliques).unwrap(), median(&mut paths).unwrap());
    verdict(
        all_super_unit && mc > mp,
        format!("median overhead K{N} {mc:.2} vs P{N} {mp:.2}, all ≥ 1: {all_super_unit}"),
    )
}

fn criterion_8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ok = 0;
    for m in 0..50u64 {
        let n = rng.gen_range(2..=14);
        let mut linear = BTreeMap::new();
        let mut quadratic = BTreeMap::new();
        for i in 0..n {
            linear.insert(i, rng.gen_range(-4i64..=4) as f64);
            for j in i + 1..n {
                if rng.gen_bool(0.4) {
                    quadratic.insert((i, j), rng.gen_range(-4i64..=4) as f64);
                }
            }
        }
        let q = Qubo::unlabeled(n, linear, quadratic, 0.0).unwrap();
        let configs = vec![
            SolverConfig::Anneal {
                schedule: SaSchedule::new(ScheduleKind::Geometric, 0.1, 10.0, 100).unwrap(),
                shots: 10,
                seed: None,
            },
            SolverConfig::Anneal {
                schedule: SaSchedule::new(ScheduleKind::Linear, 0.1, 2.0, 20).unwrap(),
                shots: 5,
                seed: None,
            },
            SolverConfig::Exact,
        ];
        let budget = Duration::from_secs(600);
        let a = racing_solve(&q, &configs, budget, m).unwrap();
        let b = racing_solve(&q, &configs, budget, m).unwrap();
        let member_bests = [
            simulated_annealing(&q, &SaSchedule::new(ScheduleKind::Geometric, 0.1, 10.0, 100).unwrap(), 10, m)
                .unwrap()
                .best_energy()
                .unwrap(),
            simulated_annealing(&q, &SaSchedule::new(ScheduleKind::Linear, 0.1, 2.0, 20).unwrap(), 5, m + 1)
                .unwrap()
                .best_energy()
                .unwrap(),
            exact_bruteforce(&q).unwrap().1,
        ];
        let min = member_bests.iter().copied().fold(f64::INFINITY, f64::min);
        if a.best_energy() == Some(min) && a.to_json(false) == b.to_json(false) {
            ok += 1;
        }
    }
    verdict(ok == 50, format!("{ok}/50 models: merged best = min of member bests, reruns byte-identical"))
}

fn criterion_9() -> Verdict {
    let spec = ExperimentSpec::default();
    let a = bench::records_to_csv(&bench::run_suite(&spec).unwrap(), false);
    let b = bench::records_to_csv(&bench::run_suite(&spec).unwrap(), false);
    let rows = a.lines().count() - 1;
    verdict(a == b && rows == 9, format!("{rows} rows, identical bytes: {}", a == b))
}

fn main() {
    type Criterion = (&'static str, fn() -> Verdict);
    let criteria: [Criterion; 9] = [
        ("encoding soundness", criterion_1),
        ("literal penalty infeasibility", criterion_2),
        ("QUBO/Ising faithfulness", criterion_3),
        ("SA quality", criterion_4),
        ("embedding validity and failure", criterion_5),
        ("chain strength vs breaks", criterion_6),
        ("embedding overhead", criterion_7),
        ("racing dominance and determinism", criterion_8),
        ("end-to-end determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{tag}] {name}: {}", i + 1, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
