//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

mod common;

use std::time::Instant;

use common::{exact_mean_infidelity, lookup, shared_rates, Dense};
use hqram::analytics::{
    bb_infidelity_bound, bb_resources, ft_infidelity_bound, ft_resources, uniform_resources, BoundInputs,
};
use hqram::branch_state::{Amplitude, BasisWord, BranchState, Control, QubitId};
use hqram::circuit::{build, Architecture, BuildOptions, Database, RouterKind};
use hqram::harness::{
    classical_query, compare_resources, estimate_infidelity, fit_scaling, run_point, run_sweep, AddressMode,
    DepthRange, ExperimentConfig, HeteroSource, Simulator,
};
use hqram::noise::{NoiseModel, ProfileKind, SurfaceParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

const P_PRIME: f64 = 0.1;
const EPSILON_PRIME: f64 = 0.03;
const HETERO_TRIALS: u64 = 20_000;
const UNIFORM_TRIALS: u64 = 50_000;
const UNIFORM_DISTANCE: u32 = 7;

fn variants() -> Vec<(Architecture, RouterKind)> {
    let mut v = Vec::new();
    for arch in Architecture::ALL {
        for rk in [RouterKind::Qubit, RouterKind::Qutrit] {
            if arch != Architecture::Walker || rk == RouterKind::Qutrit {
                v.push((arch, rk));
            }
        }
    }
    v
}

fn functional_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut queries = 0usize;
    for (arch, rk) in variants() {
        let opts = if arch.is_heterogeneous() { BuildOptions::hetero() } else { BuildOptions::uniform(3) };
        for n in 1..=6 {
            for _ in 0..20 {
                let db = Database::random(n, &mut rng);
                let s = build(arch, rk, n, &db, opts).map_err(|e| e.to_string())?;
                for a in 0..1usize << n {
                    if classical_query(&s, a) != Some((a, lookup(db.bits(), a))) {
                        return Err(format!("{arch} {rk} n={n} address {a}"));
                    }
                    queries += 1;
                }
            }
        }
    }
    Ok(format!("{queries} noiseless queries returned database[address]"))
}

fn dense_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let q = QubitId::new;
    let mut worst = 0.0f64;
    for program in 0..500 {
        let mut amps: Vec<Complex64> =
            (0..8).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        let entries: Vec<(BasisWord, Amplitude)> = amps
            .iter()
            .enumerate()
            .map(|(i, &a)| (BasisWord::from_bits((0..3).map(|b| (i >> b) & 1 == 1)), a))
            .collect();
        let mut sparse = BranchState::new_superposition(&entries).map_err(|e| e.to_string())?;
        let mut dense = Dense { width: 3, amps };
        for _ in 0..rng.gen_range(1..=20) {
            let mut wires = [0usize, 1, 2];
            for i in (1..3).rev() {
                wires.swap(i, rng.gen_range(0..=i));
            }
            let [a, b, c] = wires;
            let r = match rng.gen_range(0..5) {
                0 => {
                    dense.swap(a, b);
                    sparse.apply_swap(q(a), q(b))
                }
                1 => {
                    let polarity = rng.gen::<bool>();
                    dense.cswap(&[(c, polarity)], a, b);
                    sparse.apply_cswap(&[Control { qubit: q(c), polarity }], q(a), q(b))
                }
                2 => {
                    dense.x(a);
                    sparse.apply_x(q(a))
                }
                3 => {
                    dense.z(a);
                    sparse.apply_z(q(a))
                }
                _ => {
                    let bit = rng.gen::<bool>();
                    if bit {
                        dense.x(a);
                    }
                    sparse.apply_classical_cx(bit, q(a))
                }
            };
            r.map_err(|e| e.to_string())?;
        }
        let mut seen = [Complex64::new(0.0, 0.0); 8];
        for (w, a) in sparse.branches() {
            seen[(0..3).filter(|&b| w.get(b)).map(|b| 1 << b).sum::<usize>()] += a;
        }
        for (got, want) in seen.iter().zip(&dense.amps) {
            let diff = (got - want).norm();
            worst = worst.max(diff);
            if diff > 1e-9 {
                return Err(format!("program {program}: {got} vs {want}"));
            }
        }
    }
    Ok(format!("500 programs, worst amplitude error {worst:.1e}"))
}

fn monte_carlo_vs_exact() -> Outcome {
    let rate = 0.01;
    let db = Database::new(1, vec![false, true]).map_err(|e| e.to_string())?;
    let s = build(Architecture::UniformBb, RouterKind::Qubit, 1, &db, BuildOptions::uniform(1))
        .map_err(|e| e.to_string())?;
    let rates = shared_rates(&s, &|_| rate);
    let exact = exact_mean_infidelity(&s, &|q| rates[q.index()]);
    let sim =
        Simulator::new(&s, NoiseModel::constant(rate, 1), AddressMode::Superposition).map_err(|e| e.to_string())?;
    let est = estimate_infidelity(&sim, 100_000, 3);
    let z = (est.mean - exact) / est.std_error;
    let line = format!("MC {:.5} ± {:.5} vs exact {exact:.5} ({z:+.2}σ)", est.mean, est.std_error);
    if z.abs() <= 3.0 {
        Ok(line)
    } else {
        Err(line)
    }
}

struct Point {
    label: String,
    n: u32,
    mean: f64,
    std_error: f64,
    bound: f64,
}

fn sweep(arch: Architecture, rk: RouterKind, lo: u32, hi: u32) -> Result<Vec<Point>, String> {
    let (profile, trials) = if arch.is_heterogeneous() {
        (ProfileKind::Linear, HETERO_TRIALS)
    } else {
        (ProfileKind::Uniform(UNIFORM_DISTANCE), UNIFORM_TRIALS)
    };
    let config = ExperimentConfig {
        architectures: vec![arch],
        router_kind: rk,
        n: DepthRange::new(lo, hi).map_err(|e| e.to_string())?,
        params: SurfaceParams::new(EPSILON_PRIME, P_PRIME).map_err(|e| e.to_string())?,
        profile: Some(profile),
        trials,
        seed: 4,
        ..ExperimentConfig::default()
    };
    let mut points = Vec::new();
    for n in lo..=hi {
        let (row, est) = run_point(&config, arch, n).map_err(|e| e.to_string())?;
        points.push(Point {
            label: format!("{arch} {rk}"),
            n,
            mean: est.mean,
            std_error: est.std_error,
            bound: row.analytic_bound,
        });
    }
    Ok(points)
}

fn slope(points: &[Point]) -> Result<f64, String> {
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, p.mean)).collect();
    fit_scaling(&xy).map(|f| f.exponent).map_err(|e| e.to_string())
}

fn scaling(points: &mut Vec<Point>) -> Outcome {
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    let mut check = |name: String, value: f64, lo: f64, hi: f64| {
        let note = format!("{name} {value:.3}");
        if !(lo..=hi).contains(&value) {
            failures.push(format!("{note} outside [{lo}, {hi}]"));
        }
        notes.push(note);
    };
    for arch in [Architecture::FtHetero, Architecture::BbHetero] {
        let p = sweep(arch, RouterKind::Qutrit, 4, 9)?;
        let at = |n: u32| p.iter().find(|q| q.n == n).map(|q| q.mean).unwrap_or(f64::NAN);
        check(format!("{arch} qutrit ratio(9/5)"), at(9) / at(5), 0.0, 1.6);
        points.extend(p);
        let p = sweep(arch, RouterKind::Qubit, 4, 9)?;
        check(format!("{arch} qubit slope"), slope(&p)?, 0.6, 1.5);
        points.extend(p);
    }
    let p = sweep(Architecture::UniformBb, RouterKind::Qutrit, 4, 9)?;
    check("uniform-bb qutrit slope".into(), slope(&p)?, 1.6, 2.5);
    points.extend(p);
    let p = sweep(Architecture::UniformBb, RouterKind::Qubit, 4, 9)?;
    check("uniform-bb qubit slope".into(), slope(&p)?, 2.4, 3.6);
    points.extend(p);
    let p = sweep(Architecture::Walker, RouterKind::Qutrit, 3, 7)?;
    check("walker slope".into(), slope(&p)?, 1.6, 2.5);
    points.extend(p);
    if failures.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(failures.join("; "))
    }
}

fn bound_dominance(points: &[Point]) -> Outcome {
    if points.is_empty() {
        return Err("no simulated points".into());
    }
    let mut tightest = f64::INFINITY;
    for p in points {
        let slack = (p.bound + 3.0 * p.std_error - p.mean) / p.bound;
        if slack < 0.0 {
            return Err(format!("{} n={}: {:.4e} > {:.4e} + 3σ", p.label, p.n, p.mean, p.bound));
        }
        tightest = tightest.min(slack);
    }
    Ok(format!("{} points, smallest relative slack {tightest:.3}", points.len()))
}

fn inputs(n: u32, p: f64) -> Result<BoundInputs, String> {
    let params = SurfaceParams::new(EPSILON_PRIME, p).map_err(|e| e.to_string())?;
    BoundInputs::new(n, params, Default::default()).map_err(|e| e.to_string())
}

fn closed_forms() -> Outcome {
    let mut worst_ft = 0.0f64;
    for n in 20..=40 {
        for p in [1e-4, 1e-3, 0.01, 0.05, 0.1] {
            let b = ft_infidelity_bound(&inputs(n, p)?);
            worst_ft = worst_ft.max((b.closed_form / b.exact.value - 1.0).abs());
        }
    }
    let mut worst_bb = 0.0f64;
    for p in [1e-4, 1e-3, 0.01, 0.05, 0.1] {
        let b = bb_infidelity_bound(&inputs(30, p)?);
        worst_bb = worst_bb.max((b.asymptotic / b.exact.value - 1.0).abs());
    }
    let line = format!("K' worst {:.3}%, BB asymptote worst {:.3}%", 100.0 * worst_ft, 100.0 * worst_bb);
    if worst_ft < 0.01 && worst_bb < 0.02 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn brute_force(n: u32, per_node: impl Fn(u32) -> u128, distance: impl Fn(u32) -> u128) -> u128 {
    let mut total = 0;
    for level in 0..=n {
        for _ in 0..1u64 << level {
            total += 3 * per_node(level) * distance(level).pow(2);
        }
    }
    total
}

fn resources() -> Outcome {
    let start = Instant::now();
    for n in 1..=22 {
        for efficient in [false, true] {
            let dist = |l: u32| {
                let d = (n - l + 1) as u128;
                if efficient && d.is_multiple_of(2) {
                    d - 1
                } else {
                    d
                }
            };
            let ft = brute_force(n, |l| (n - l + 2) as u128, dist);
            let bb = brute_force(n, |_| 3, dist);
            let got_ft = ft_resources(n, efficient).map_err(|e| e.to_string())?.physical_total;
            let got_bb = bb_resources(n, efficient).map_err(|e| e.to_string())?.physical_total;
            if (got_ft, got_bb) != (ft, bb) {
                return Err(format!("n={n}: ({got_ft}, {got_bb}) vs ({ft}, {bb})"));
            }
        }
    }
    let per = |total: u128, n: u32| total as f64 / (1u128 << n) as f64;
    let ft30 = per(ft_resources(30, false).map_err(|e| e.to_string())?.physical_total, 30);
    let bb30 = per(bb_resources(30, false).map_err(|e| e.to_string())?.physical_total, 30);
    let ft40 = per(ft_resources(40, true).map_err(|e| e.to_string())?.physical_total, 40);
    let bb40 = per(bb_resources(40, true).map_err(|e| e.to_string())?.physical_total, 40);
    let elapsed = start.elapsed().as_secs_f64();
    let line =
        format!("per address FT {ft30:.1} BB {bb30:.1} (n=30), FT {ft40:.1} BB {bb40:.1} (n=40 odd), {elapsed:.2}s");
    let ok = (ft30 / 192.0 - 1.0).abs() <= 0.10
        && (bb30 / 108.0 - 1.0).abs() <= 0.10
        && (ft40 / 153.0 - 1.0).abs() <= 0.05
        && (bb40 / 82.0 - 1.0).abs() <= 0.05
        && elapsed < 1.0;
    if ok {
        Ok(line)
    } else {
        Err(line)
    }
}

fn comparison() -> Outcome {
    let defaults = ExperimentConfig::default();
    let base = BoundInputs::new(1, defaults.params, defaults.cost).map_err(|e| e.to_string())?;
    let row = compare_resources(30, Architecture::BbHetero, &base, false, HeteroSource::Analytic)
        .map_err(|e| e.to_string())?;
    let mut last = 0u128;
    for n in 1..=30 {
        let r = compare_resources(n, Architecture::BbHetero, &base, false, HeteroSource::Analytic)
            .map_err(|e| e.to_string())?;
        let per_address = uniform_resources(n, r.uniform_distance).map_err(|e| e.to_string())?.physical_total >> n;
        if per_address < last {
            return Err(format!("uniform overhead fell at n={n}"));
        }
        last = per_address;
    }
    let line = format!("uniform/BB-hetero at n=30: {:.2} (d={})", row.ratio, row.uniform_distance);
    if row.ratio >= 4.0 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn determinism() -> Outcome {
    let config = ExperimentConfig {
        architectures: vec![Architecture::BbHetero, Architecture::UniformBb],
        n: DepthRange::new(2, 5).map_err(|e| e.to_string())?,
        trials: 2000,
        seed: 9,
        ..ExperimentConfig::default()
    };
    let a = run_sweep(&config).map_err(|e| e.to_string())?.to_csv_string();
    let b = run_sweep(&config).map_err(|e| e.to_string())?.to_csv_string();
    if a == b {
        Ok(format!("{} identical bytes", a.len()))
    } else {
        Err("CSV output differs between runs".into())
    }
}

fn main() {
    let mut points = Vec::new();
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome + '_>)> = vec![
        ("functional correctness", Box::new(functional_correctness)),
        ("dense-oracle equivalence", Box::new(dense_oracle)),
        ("Monte Carlo vs exact enumeration", Box::new(monte_carlo_vs_exact)),
        ("scaling exponents", Box::new(|| scaling(&mut points))),
    ];
    let mut failed = 0;
    let mut report = |i: usize, name: &str, outcome: Outcome, secs: f64| match outcome {
        Ok(detail) => println!("PASS {i} {name}: {detail} [{secs:.1}s]"),
        Err(detail) => {
            failed += 1;
            println!("FAIL {i} {name}: {detail} [{secs:.1}s]");
        }
    };
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        report(i + 1, name, outcome, t.elapsed().as_secs_f64());
    }
    let rest: [(&str, &dyn Fn() -> Outcome); 5] = [
        ("bound dominance", &|| bound_dominance(&points)),
        ("closed-form cross-checks", &closed_forms),
        ("resource numbers", &resources),
        ("uniform vs heterogeneous overhead", &comparison),
        ("determinism", &determinism),
    ];
    for (i, (name, run)) in rest.into_iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        report(i + 5, name, outcome, t.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
