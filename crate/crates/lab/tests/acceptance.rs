//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use roughn_core::bump::{c0_compute, make_bump, BumpConfig, BumpSpec};
use roughn_core::cramer::{pi_k_counts, simulate_gaps, CramerConfig};
use roughn_core::moments::{
    partition_sum_g, record_witness, rho_r_maximize, sampled_record_witness,
    stirling_identity_check, ShiftedSupport, StirlingTable,
};
use roughn_core::primes::factorize_trial;
use roughn_core::sieve::{
    axiom_d_deviation, build_weight_table, divisibility_rows, prob_divides, sample, SieveParams,
    WeightTable,
};

const C0_REL_GAP: f64 = 1e-6;
const C0_FLOOR: f64 = 1.0 - 1e-9;
const C0_SECS: u64 = 30;
const AXIOM_A_SAMPLES: usize = 100_000;
const AXIOM_A_SECS: u64 = 60;
const AXIOM_D_X: u64 = 500_000;
const AXIOM_D_TOL: f64 = 1e-3;
const STIRLING_SECS: f64 = 1.0;
const G_REL_TOL: f64 = 1e-10;
const RHO_GRID: u32 = 1000;
const RHO_TOL: f64 = 2e-3;
const MC_SAMPLES: usize = 100_000;
const MC_Z: f64 = 3.0;
const MC_MIN_PASS: usize = 9;
const RECORD_K_MAX: u64 = 100;
const RECORD_SLACK: f64 = 1.05;
const RECORD_SECS: u64 = 600;
const GAP_N: u64 = 100_000;
const GAP_TRIALS: u32 = 100;
const GAP_RATIO: f64 = 1.5;
const GAP_MIN_TRIALS: usize = 90;
const SEED: u64 = 20_261_016;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn toy_table(spec: &BumpSpec) -> WeightTable {
    build_weight_table(&SieveParams::toy(), spec).expect("toy table")
}

fn c1_c0() -> Outcome {
    let t = Instant::now();
    let spec = make_bump(BumpConfig::default()).expect("bump");
    let r = c0_compute(&spec).expect("c0");
    let secs = t.elapsed();
    check(
        r.relative_gap() <= C0_REL_GAP
            && r.c0_time >= C0_FLOOR
            && secs <= Duration::from_secs(C0_SECS),
        format!(
            "c0_time={:.12} c0_freq={:.12} gap={:.2e} in {:.1?}",
            r.c0_time,
            r.c0_freq,
            r.relative_gap(),
            secs
        ),
    )
}

fn c2_axiom_a(spec: &BumpSpec) -> Outcome {
    let t = Instant::now();
    let table = toy_table(spec);
    let draws = sample(&table, SEED, AXIOM_A_SAMPLES).expect("sample");
    let w = table.w_modulus();
    let ok = draws.iter().filter(|&&n| n % w == 0).count();
    let secs = t.elapsed();
    check(
        ok == AXIOM_A_SAMPLES && secs <= Duration::from_secs(AXIOM_A_SECS),
        format!("{ok}/{AXIOM_A_SAMPLES} samples divisible by W={w} in {secs:.1?}"),
    )
}

fn c3_axiom_d(spec: &BumpSpec) -> Outcome {
    let params = SieveParams {
        x: AXIOM_D_X,
        ..SieveParams::toy()
    };
    let table = build_weight_table(&params, spec).expect("table");
    let big_t = params.big_t();
    let mut triples = Vec::new();
    'outer: for p in [7u64, 11, 13, 17, 19, 23] {
        for a in [2u32, 3] {
            if (p.pow(a) as f64) > big_t {
                continue;
            }
            for k in [1u64, 2, 3] {
                triples.push((p, a, k));
                if triples.len() == 20 {
                    break 'outer;
                }
            }
        }
    }
    let worst = triples
        .iter()
        .map(|&(p, a, k)| {
            axiom_d_deviation(&table, &[(p, a)], k)
                .expect("deviation")
                .abs()
        })
        .fold(0.0, f64::max);
    check(
        triples.len() == 20 && worst <= AXIOM_D_TOL,
        format!(
            "{} triples, window of {} integers, max |deviation| = {worst:.3e}",
            triples.len(),
            params.x + 1
        ),
    )
}

fn c4_rigidity(spec: &BumpSpec) -> Outcome {
    let table = toy_table(spec);
    let params = table.params();
    let mut bad = 0;
    let mut total = 0;
    for p in [2u64, 3, 5].into_iter().filter(|&p| p <= params.w) {
        for k in 1..=params.k_max {
            total += 1;
            let want = if k % p == 0 { 1.0 } else { 0.0 };
            if prob_divides(p, k, &table) != want {
                bad += 1;
            }
        }
    }
    check(bad == 0, format!("{total} (p, k) pairs, {bad} mismatches"))
}

fn c5_stirling() -> Outcome {
    let t = Instant::now();
    let table = StirlingTable::new(24).expect("table");
    let mut ok = table.get(4, 2).expect("{4,2}") == &7u32.into();
    for s in 1..=24 {
        ok &= table.get(s, 1).expect("{s,1}") == &1u32.into()
            && table.get(s, s).expect("{s,s}") == &1u32.into();
        for k in 2..s {
            let want = table.get(s - 1, k).unwrap() * k + table.get(s - 1, k - 1).unwrap();
            ok &= table.get(s, k).unwrap() == &want;
        }
    }
    let mut identities = 0;
    for s in 1..=6 {
        for m in 2 * s as u64..=24 {
            ok &= stirling_identity_check(s, m).expect("identity");
            identities += 1;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    check(
        ok && secs <= STIRLING_SECS,
        format!("recurrence to s=24, {identities} identities, {secs:.3}s"),
    )
}

fn c6_g() -> Outcome {
    let mut worst: f64 = 0.0;
    for r in [10.0, 100.0, 1000.0] {
        for s3 in 1..=8 {
            worst = worst.max(partition_sum_g(s3, r).expect("G").relative_gap);
        }
    }
    check(worst <= G_REL_TOL, format!("max relative gap {worst:.2e}"))
}

fn c7_rho() -> Outcome {
    let mut worst: f64 = 0.0;
    for r in 2..=4 {
        worst = worst.max(
            rho_r_maximize(r, RHO_GRID)
                .expect("rho")
                .distance_to_uniform,
        );
    }
    check(
        worst <= RHO_TOL,
        format!("max distance to uniform {worst:.2e}"),
    )
}

fn c8_monte_carlo(spec: &BumpSpec) -> Outcome {
    let table = toy_table(spec);
    let draws = sample(&table, SEED, MC_SAMPLES).expect("sample");
    let tuples = [
        (17, 1),
        (19, 1),
        (23, 2),
        (29, 3),
        (7, 5),
        (11, 7),
        (13, 9),
        (77, 11),
        (31, 20),
        (221, 4),
    ];
    let rows = divisibility_rows(&table, &draws, &tuples);
    let pass = rows.iter().filter(|r| r.within(MC_Z)).count();
    check(
        pass >= MC_MIN_PASS,
        format!("{pass}/10 tuples within {MC_Z} sigma"),
    )
}

fn c9_record(spec: &BumpSpec) -> Outcome {
    let t = Instant::now();
    let params = SieveParams {
        k_max: RECORD_K_MAX,
        ..SieveParams::toy()
    };
    let table = build_weight_table(&params, spec).expect("table");
    let support = ShiftedSupport::new(&table, RECORD_K_MAX).expect("support");
    let best = record_witness(&support, RECORD_K_MAX)
        .expect("scan")
        .expect("witness");
    let draws = sample(&table, SEED, MC_SAMPLES).expect("sample");
    let sampled = sampled_record_witness(&support, RECORD_K_MAX, &draws)
        .expect("sampled")
        .expect("witness");
    // re-score both by trial division
    let rescore = |n: u64| {
        (2..=RECORD_K_MAX)
            .map(|k| factorize_trial(n + k).unwrap().big_omega() as f64 / (k as f64).ln())
            .fold(0.0, f64::max)
    };
    let consistent = rescore(best.n) == best.score && rescore(sampled.n) == sampled.score;
    let secs = t.elapsed();
    check(
        consistent
            && sampled.score <= RECORD_SLACK * best.score
            && secs <= Duration::from_secs(RECORD_SECS),
        format!(
            "sampled n={} score {:.6}, exhaustive n={} score {:.6} in {secs:.1?}",
            sampled.n, sampled.score, best.n, best.score
        ),
    )
}

fn c10_gaps() -> Outcome {
    let cfg = CramerConfig {
        n_max: GAP_N,
        trials: GAP_TRIALS,
        seed: SEED,
        ..CramerConfig::default()
    };
    let rep = simulate_gaps(&cfg).expect("gaps");
    let within = rep.trials_within(GAP_RATIO);
    check(
        within >= GAP_MIN_TRIALS,
        format!("{within}/{GAP_TRIALS} trials with max ratio <= {GAP_RATIO}"),
    )
}

fn c11_pi_k() -> Outcome {
    let mut ok = true;
    for x in [1_000u64, 10_000, 100_000, 1_000_000] {
        ok &= pi_k_counts(x).expect("counts").iter().sum::<u64>() == x - 1;
    }
    let oracle = (2..=30u64)
        .filter(|&n| factorize_trial(n).unwrap().omega() == 2)
        .count() as u64;
    let got = pi_k_counts(30).expect("counts")[2];
    check(
        ok && got == 12 && oracle == 12,
        format!("identity holds: {ok}, pi_2(30) = {got}, oracle {oracle}"),
    )
}

fn run_lab(args: &[&str], out: &Path, params: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_roughn-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--params")
        .arg(params)
        .env_remove("ROUGHN_LAB_SEED")
        .stderr(Stdio::null())
        .status()
        .expect("spawn")
        .code()
        .unwrap_or(-1)
}

fn same_tree(a: &Path, b: &Path) -> bool {
    let mut names: Vec<_> = std::fs::read_dir(a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    let mut other: Vec<_> = std::fs::read_dir(b)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    other.sort();
    names == other
        && names
            .iter()
            .all(|n| std::fs::read(a.join(n)).unwrap() == std::fs::read(b.join(n)).unwrap())
}

fn c12_determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let params = dir.path().join("params.txt");
    std::fs::write(
        &params,
        "chunk = 2000\ntrials = 24\nN = 20000\ntrial_chunk = 3\n",
    )
    .unwrap();
    let mut notes = Vec::new();
    let mut ok = true;
    for sub in ["sieve-scan", "cramer-gaps", "record-search"] {
        let a = dir.path().join(format!("{sub}-a"));
        let b = dir.path().join(format!("{sub}-b"));
        let c = dir.path().join(format!("{sub}-c"));
        let seed = ["--seed", "77"];
        let twice = run_lab(&[&[sub][..], &seed].concat(), &a, &params) == 0
            && run_lab(&[&[sub, "--workers", "1"][..], &seed].concat(), &b, &params) == 0
            && same_tree(&a, &b);
        let first = run_lab(
            &[&[sub, "--max-units", "4"][..], &seed].concat(),
            &c,
            &params,
        );
        let ck = c.join("checkpoint.rlck");
        let ck_arg = ck.to_str().unwrap();
        let resumed = first == 3
            && run_lab(
                &[&[sub, "--resume", ck_arg][..], &seed].concat(),
                &c,
                &params,
            ) == 0;
        let resumed = resumed && same_tree(&a, &c);
        ok &= twice && resumed;
        notes.push(format!("{sub}: repeat {twice}, resume {resumed}"));
    }
    check(ok, notes.join("; "))
}

fn main() {
    let spec = make_bump(BumpConfig::default()).expect("bump");
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("c0 dual-route agreement", Box::new(c1_c0)),
        ("axiom (A) on samples", Box::new(|| c2_axiom_a(&spec))),
        ("axiom (D) at toy scale", Box::new(|| c3_axiom_d(&spec))),
        ("tiny-prime rigidity", Box::new(|| c4_rigidity(&spec))),
        ("Stirling suite", Box::new(c5_stirling)),
        ("exponential-formula G", Box::new(c6_g)),
        ("rho_r maximizer", Box::new(c7_rho)),
        (
            "Monte Carlo consistency",
            Box::new(|| c8_monte_carlo(&spec)),
        ),
        ("record search", Box::new(|| c9_record(&spec))),
        ("random-model gaps", Box::new(c10_gaps)),
        ("pi_k partition identity", Box::new(c11_pi_k)),
        ("determinism and resume", Box::new(c12_determinism)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        failed += usize::from(!o.pass);
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
