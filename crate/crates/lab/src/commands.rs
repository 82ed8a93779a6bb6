use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use roughn_core::bump::{
    c0_compute, decay_profile, make_bump, write_eta_hat_profile, write_eta_profile, BumpSpec,
};
use roughn_core::cramer::{
    erdos679_refuter, pi_k_counts, pi_k_row, simulate_trials, window_search, write_gap_rows,
    write_pik_csv, write_witness_csv, CramerConfig, GapAccumulator, RateFunction, SearchParams,
    Variant,
};
use roughn_core::moments::{
    c1_condition, chebyshev_tail, falling_factorial_check, fit_c3, partition_sum_g, record_score,
    rho_r_maximize, sampled_record_witness, stirling_bound_fit, stirling_identity_check,
    union_bound_with, write_moments_csv, write_union_bound_csv, PrimeRange, RecordWitness,
    ShiftedSupport,
};
use roughn_core::report::{csv_row, real};
use roughn_core::sieve::{
    axiom_check, build_weight_table, divisibility_rows, sample, write_probs_csv,
    write_weights_rows, Axiom, WeightTable, WEIGHTS_HEADER,
};
use serde::{Deserialize, Serialize};

use crate::params::ParamFile;
use crate::runner::{drive, write_json, Job};
use crate::{LabError, RunConfig};

pub fn dispatch(config: &RunConfig, params: &ParamFile) -> Result<(), LabError> {
    let resumable = matches!(
        config.subcommand.as_str(),
        "sieve-scan" | "record-search" | "cramer-gaps"
    );
    if !resumable && (config.resume.is_some() || config.max_units.is_some()) {
        return Err(LabError::Config(format!(
            "{} does not support checkpoints",
            config.subcommand
        )));
    }
    let out = config.out_dir.as_path();
    match config.subcommand.as_str() {
        "sieve-scan" => drive(&mut SieveScan::new(params)?, config, params),
        "record-search" => {
            let sieve = params.sieve()?;
            let table = build_weight_table(&sieve, &bump(params)?)?;
            drive(
                &mut RecordSearch::new(&table, params, config.seed)?,
                config,
                params,
            )
        }
        "cramer-gaps" => drive(&mut CramerGaps::new(params, config.seed)?, config, params),
        "sample" => run_sample(params, config.seed, out),
        "moments" => run_moments(params, out),
        "c0" => run_c0(params, out),
        "axioms" => run_axioms(params, out),
        "pik" => run_pik(params, out),
        "window-search" => run_window_search(params, out),
        "refute-679" => run_refute(params, out),
        other => Err(LabError::Config(format!("unknown subcommand {other:?}"))),
    }
}

fn bump(params: &ParamFile) -> Result<BumpSpec, LabError> {
    Ok(make_bump(params.bump()?)?)
}

fn table(params: &ParamFile) -> Result<WeightTable, LabError> {
    Ok(build_weight_table(&params.sieve()?, &bump(params)?)?)
}

fn create(out: &Path, name: &str) -> Result<BufWriter<File>, LabError> {
    Ok(BufWriter::new(File::create(out.join(name))?))
}

fn units_of(len: usize, chunk: u64) -> u64 {
    (len as u64).div_ceil(chunk)
}

fn unit_range(unit: u64, chunk: u64, len: usize) -> std::ops::Range<usize> {
    let lo = (unit * chunk) as usize;
    lo..(lo + chunk as usize).min(len)
}

fn chunk_param(params: &ParamFile, default: u64) -> Result<u64, LabError> {
    let c = params.u64_or("chunk", default)?;
    if c == 0 {
        return Err(LabError::Config("chunk must be positive".into()));
    }
    Ok(c)
}

// sieve-scan

struct SieveScan {
    table: WeightTable,
    chunk: u64,
    state: ScanState,
}

#[derive(Default, Serialize, Deserialize)]
struct ScanState {
    positive: u64,
    max_nu: f64,
}

impl SieveScan {
    fn new(params: &ParamFile) -> Result<Self, LabError> {
        Ok(SieveScan {
            table: table(params)?,
            chunk: chunk_param(params, 4096)?,
            state: ScanState::default(),
        })
    }
}

impl Job for SieveScan {
    fn files(&self) -> Vec<(&'static str, Vec<&'static str>)> {
        vec![("weights.csv", WEIGHTS_HEADER.to_vec())]
    }

    fn units(&self) -> u64 {
        units_of(self.table.len(), self.chunk)
    }

    fn run_unit(&mut self, unit: u64, outs: &mut [BufWriter<File>]) -> Result<(), LabError> {
        let range = unit_range(unit, self.chunk, self.table.len());
        for &v in &self.table.weights()[range.clone()] {
            self.state.positive += u64::from(v > 0.0);
            self.state.max_nu = self.state.max_nu.max(v);
        }
        write_weights_rows(&self.table, range, &mut outs[0])?;
        Ok(())
    }

    fn save_state(&self) -> Result<String, LabError> {
        Ok(serde_json::to_string(&self.state)?)
    }

    fn load_state(&mut self, state: &str) -> Result<(), LabError> {
        self.state = serde_json::from_str(state)?;
        Ok(())
    }

    fn finish(&mut self, out_dir: &Path) -> Result<(), LabError> {
        let p = self.table.params();
        let axiom_a = axiom_check(Axiom::A, &self.table, 1, 1)?;
        write_json(
            &out_dir.join("sieve_scan.json"),
            &serde_json::json!({
                "params": p,
                "levels": self.table.levels(),
                "theta": p.theta()?,
                "w_modulus": self.table.w_modulus(),
                "support_size": self.table.len(),
                "positive_weights": self.state.positive,
                "max_nu": self.state.max_nu,
                "total_mass": self.table.total(),
                "axiom_a_passed": axiom_a.passed,
            }),
        )
    }
}

// record-search

struct RecordSearch<'a> {
    table: &'a WeightTable,
    support: ShiftedSupport<'a>,
    k_max: u64,
    samples: usize,
    seed: u64,
    chunk: u64,
    best: Option<(usize, f64)>,
}

impl<'a> RecordSearch<'a> {
    fn new(table: &'a WeightTable, params: &ParamFile, seed: u64) -> Result<Self, LabError> {
        let k_max = table.params().k_max;
        if k_max < 2 {
            return Err(LabError::Config("record-search needs k_max >= 2".into()));
        }
        let support = ShiftedSupport::new(table, k_max)?;
        Ok(RecordSearch {
            table,
            support,
            k_max,
            samples: params.u64_or("samples", 100_000)? as usize,
            seed,
            chunk: chunk_param(params, 4096)?,
            best: None,
        })
    }

    fn witness(&self, i: usize, score: f64) -> RecordWitness {
        RecordWitness {
            n: self.table.n_at(i),
            score,
            profile: (2..=self.k_max)
                .map(|k| self.support.big_omega(i, k))
                .collect(),
        }
    }
}

impl Job for RecordSearch<'_> {
    fn files(&self) -> Vec<(&'static str, Vec<&'static str>)> {
        vec![("record_scores.csv", vec!["n", "score"])]
    }

    fn units(&self) -> u64 {
        units_of(self.table.len(), self.chunk)
    }

    fn run_unit(&mut self, unit: u64, outs: &mut [BufWriter<File>]) -> Result<(), LabError> {
        let range = unit_range(unit, self.chunk, self.table.len());
        let weights = self.table.weights();
        let scores: Vec<(usize, f64)> = {
            use rayon::prelude::*;
            range
                .into_par_iter()
                .filter(|&i| weights[i] > 0.0)
                .map(|i| (i, record_score(&self.support, i, self.k_max)))
                .collect()
        };
        for (i, s) in scores {
            csv_row(&mut outs[0], &[self.table.n_at(i).to_string(), real(s)])?;
            if self.best.is_none_or(|(_, b)| s < b) {
                self.best = Some((i, s));
            }
        }
        Ok(())
    }

    fn save_state(&self) -> Result<String, LabError> {
        Ok(serde_json::to_string(&self.best)?)
    }

    fn load_state(&mut self, state: &str) -> Result<(), LabError> {
        self.best = serde_json::from_str(state)?;
        Ok(())
    }

    fn finish(&mut self, out_dir: &Path) -> Result<(), LabError> {
        let exhaustive = self.best.map(|(i, s)| self.witness(i, s));
        let draws = sample(self.table, self.seed, self.samples.max(1))?;
        let sampled = sampled_record_witness(&self.support, self.k_max, &draws)?;
        let mut profile = BufWriter::new(File::create(out_dir.join("profile.csv"))?);
        csv_row(&mut profile, &["k", "omega_exhaustive", "omega_sampled"])?;
        for (j, k) in (2..=self.k_max).enumerate() {
            let cell = |w: &Option<RecordWitness>| {
                w.as_ref()
                    .map_or("none".to_string(), |w| w.profile[j].to_string())
            };
            csv_row(
                &mut profile,
                &[k.to_string(), cell(&exhaustive), cell(&sampled)],
            )?;
        }
        profile.flush()?;
        let ratio = match (&exhaustive, &sampled) {
            (Some(e), Some(s)) => Some(s.score / e.score),
            _ => None,
        };
        write_json(
            &out_dir.join("record.json"),
            &serde_json::json!({
                "params": self.table.params(),
                "k_max": self.k_max,
                "seed": self.seed,
                "samples": self.samples,
                "exhaustive": exhaustive,
                "sampled": sampled,
                "sampled_over_exhaustive": ratio,
            }),
        )
    }
}

// cramer-gaps

struct CramerGaps {
    config: CramerConfig,
    monotone: bool,
    chunk: u64,
    acc: GapAccumulator,
}

fn parse_rate(s: &str) -> Result<RateFunction, LabError> {
    let bad = || {
        LabError::Config(format!(
            "rate: expected log, iterlog:<j> or const:<v>, got {s:?}"
        ))
    };
    match s.split_once(':') {
        None if s == "log" => Ok(RateFunction::Log),
        Some(("iterlog", j)) => Ok(RateFunction::IteratedLog {
            j: j.trim().parse().map_err(|_| bad())?,
        }),
        Some(("const", v)) => Ok(RateFunction::Constant(v.trim().parse().map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

impl CramerGaps {
    fn new(params: &ParamFile, seed: u64) -> Result<Self, LabError> {
        let base = CramerConfig::default();
        let trials = u32::try_from(params.u64_or("trials", base.trials as u64)?)
            .map_err(|_| LabError::Config("trials is too large".into()))?;
        let config = CramerConfig {
            rate: parse_rate(params.str_or("rate", "log"))?,
            scale: params.f64_or("scale", base.scale)?,
            n_max: params.u64_or("N", base.n_max)?,
            trials,
            seed,
            warmup: params
                .get("warmup")
                .map(|_| params.u64_or("warmup", 0))
                .transpose()?,
        };
        let monotone = config.validate()?;
        let chunk = params.u64_or("trial_chunk", 4)?;
        if chunk == 0 {
            return Err(LabError::Config("trial_chunk must be positive".into()));
        }
        Ok(CramerGaps {
            config,
            monotone,
            chunk,
            acc: GapAccumulator::default(),
        })
    }
}

impl Job for CramerGaps {
    fn files(&self) -> Vec<(&'static str, Vec<&'static str>)> {
        vec![("gaps.csv", vec!["trial", "k", "S_k", "gap", "ratio"])]
    }

    fn units(&self) -> u64 {
        units_of(self.config.trials as usize, self.chunk)
    }

    fn run_unit(&mut self, unit: u64, outs: &mut [BufWriter<File>]) -> Result<(), LabError> {
        let r = unit_range(unit, self.chunk, self.config.trials as usize);
        for t in simulate_trials(&self.config, r.start as u32, r.end as u32) {
            write_gap_rows(&t.rows, &mut outs[0])?;
            self.acc.add(&t);
        }
        Ok(())
    }

    fn save_state(&self) -> Result<String, LabError> {
        Ok(serde_json::to_string(&self.acc)?)
    }

    fn load_state(&mut self, state: &str) -> Result<(), LabError> {
        self.acc = serde_json::from_str(state)?;
        Ok(())
    }

    fn finish(&mut self, out_dir: &Path) -> Result<(), LabError> {
        let report = self.acc.report(&self.config, self.monotone);
        write_json(
            &out_dir.join("gaps.json"),
            &serde_json::json!({
                "config": self.config,
                "trials_within_1_5": report.trials_within(1.5),
                "report": report,
            }),
        )
    }
}

// one-shot subcommands

fn run_sample(params: &ParamFile, seed: u64, out: &Path) -> Result<(), LabError> {
    let table = table(params)?;
    let count = params.u64_or("samples", 100_000)? as usize;
    let tuples = params.pairs_or(
        "tuples",
        &[
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
        ],
    )?;
    let draws = sample(&table, seed, count)?;
    let rows = divisibility_rows(&table, &draws, &tuples);
    write_probs_csv(&rows, create(out, "probs.csv")?)?;
    let w = table.w_modulus();
    write_json(
        &out.join("sample.json"),
        &serde_json::json!({
            "seed": seed,
            "samples": count,
            "divisible_by_w": draws.iter().filter(|&&n| n % w == 0).count(),
            "within_3_sigma": rows.iter().filter(|r| r.within(3.0)).count(),
            "rows": rows,
        }),
    )
}

#[derive(Serialize)]
struct ChebyshevRow {
    k: u64,
    range: PrimeRange,
    s: u32,
    r: f64,
    exact_tail: f64,
    chebyshev: f64,
}

fn run_moments(params: &ParamFile, out: &Path) -> Result<(), LabError> {
    let table = table(params)?;
    let shifts = params.u64_list_or("shifts", &[1, 2, 3, 5, 10])?;
    let s_max = params.u64_or("s_max", 6)? as u32;
    let ranges = params
        .str_list_or("ranges", &["tiny", "medium", "large", "power"])
        .iter()
        .map(|s| s.parse::<PrimeRange>())
        .collect::<Result<Vec<_>, _>>()?;
    let k_max = table.params().k_max;
    let max_shift = shifts.iter().copied().max().unwrap_or(1).max(k_max).max(2);
    let support = ShiftedSupport::new(&table, max_shift)?.with_c3(params.f64_or("c3", 3.0)?);
    let radii = params.f64_list_or("radii", &[1.0, 2.0, 3.0])?;

    let mut reports = Vec::new();
    let mut cheb = Vec::new();
    for &k in &shifts {
        for &range in &ranges {
            let centered = range == PrimeRange::Large;
            for s in 1..=s_max {
                let rep = support.moment(k, range, s, centered)?;
                for &r in &radii {
                    cheb.push(ChebyshevRow {
                        k,
                        range,
                        s,
                        r,
                        exact_tail: support.tail(k, range, centered, r)?,
                        chebyshev: chebyshev_tail(rep.exact_moment, r, s)?,
                    });
                }
                reports.push(rep);
            }
        }
    }
    write_moments_csv(&reports, create(out, "moments.csv")?)?;

    let c_values = params.f64_list_or("c_values", &[1.0, 2.0, 3.0, 4.0, 6.0, 8.0])?;
    let unions = c_values
        .iter()
        .map(|&c| union_bound_with(&support, c, k_max))
        .collect::<Result<Vec<_>, _>>()?;
    write_union_bound_csv(&unions, create(out, "union_bound.csv")?)?;

    let g_max = params.u64_or("g_max", 8)? as usize;
    let mut g = Vec::new();
    for r in [10.0, 100.0, 1000.0] {
        for s3 in 1..=g_max {
            g.push(partition_sum_g(s3, r)?);
        }
    }
    let grid = params.u64_or("rho_grid", 1000)? as u32;
    let rho = (2..=4)
        .map(|r| rho_r_maximize(r, grid))
        .collect::<Result<Vec<_>, _>>()?;
    let mut identity_ok = true;
    for s in 1..=12 {
        for m in 2 * s as u64..=24 {
            identity_ok &= stirling_identity_check(s, m)?;
        }
    }
    let medium: Vec<_> = reports
        .iter()
        .filter(|r| r.range == PrimeRange::Medium)
        .cloned()
        .collect();
    let ff = falling_factorial_check(60)?;
    write_json(
        &out.join("moments.json"),
        &serde_json::json!({
            "params": table.params(),
            "kappa": stirling_bound_fit(10, 60)?,
            "c3_fit": fit_c3(&medium),
            "stirling_identity_s12_m24": identity_ok,
            "falling_factorial_m60_all_hold": ff.iter().all(|r| r.holds),
            "c1_condition": c1_condition(params.f64_or("c1", 2e6)?, params.f64_or("c3_prime", 3.0)?, table.params().big_a)?,
            "g": g,
            "rho": rho,
            "chebyshev": cheb,
            "union_bound": unions.iter().map(|u| serde_json::json!({"C": u.c, "sum": u.sum})).collect::<Vec<_>>(),
            "record_witness": unions.first().and_then(|u| u.witness.clone()),
        }),
    )
}

fn run_c0(params: &ParamFile, out: &Path) -> Result<(), LabError> {
    let spec = bump(params)?;
    let c0 = c0_compute(&spec)?;
    let decay = decay_profile(&spec);
    write_eta_profile(&spec, create(out, "eta.csv")?)?;
    write_eta_hat_profile(&spec, create(out, "eta_hat.csv")?)?;
    write_json(
        &out.join("c0.json"),
        &serde_json::json!({
            "c0": c0,
            "relative_gap": c0.relative_gap(),
            "normalization": spec.normalization(),
            "decay_c_fit": decay.c_fit,
            "decay_sup_scaled": decay.sup_scaled,
        }),
    )
}

fn run_axioms(params: &ParamFile, out: &Path) -> Result<(), LabError> {
    let table = table(params)?;
    let which: Vec<Axiom> = match params.str_or("axiom", "all") {
        "all" => vec![Axiom::A, Axiom::B, Axiom::C, Axiom::D],
        other => vec![other.parse()?],
    };
    let s = params.u64_or("s", 3)? as usize;
    let budget = params.u64_or("budget", 1_000_000)?;
    let reports = which
        .iter()
        .map(|&a| axiom_check(a, &table, s, budget))
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = create(out, "axioms.csv")?;
    csv_row(&mut csv, &["axiom", "k", "j", "d", "value"])?;
    for rep in &reports {
        for r in &rep.rows {
            csv_row(
                &mut csv,
                &[
                    format!("{:?}", rep.axiom),
                    r.k.to_string(),
                    r.j.to_string(),
                    r.d.to_string(),
                    real(r.value),
                ],
            )?;
        }
    }
    csv.flush()?;
    write_json(&out.join("axioms.json"), &reports)
}

fn run_pik(params: &ParamFile, out: &Path) -> Result<(), LabError> {
    let grid = params.u64_list_or("x_grid", &[1_000, 10_000, 100_000, 1_000_000])?;
    let k_list = params.u64_list_or("k_list", &[])?;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &x in &grid {
        let counts = pi_k_counts(x)?;
        let ks: Vec<u64> = if k_list.is_empty() {
            (1..counts.len() as u64).collect()
        } else {
            k_list.clone()
        };
        for &k in &ks {
            let c = counts.get(k as usize).copied().unwrap_or(0);
            rows.push(pi_k_row(x, k as u32, c)?);
        }
        let k_star = (x as f64).ln().ln().ceil().max(1.0) as u32;
        let star = pi_k_row(x, k_star, counts.get(k_star as usize).copied().unwrap_or(0))?;
        summary.push(serde_json::json!({
            "x": x,
            "sum_over_k": counts.iter().sum::<u64>(),
            "partition_identity": counts.iter().sum::<u64>() == x.saturating_sub(1),
            "k_star": k_star,
            "ratio_at_k_star": star.ratio,
        }));
    }
    write_pik_csv(&rows, create(out, "pik.csv")?)?;
    write_json(&out.join("pik.json"), &summary)
}

fn run_window_search(params: &ParamFile, out: &Path) -> Result<(), LabError> {
    let variants = params
        .str_list_or("variant", &["A-omega", "B-Omega", "weak"])
        .iter()
        .map(|s| s.parse::<Variant>())
        .collect::<Result<Vec<_>, _>>()?;
    let grid = params.u64_list_or("x_grid", &[1_000_000, 10_000_000])?;
    let thresholds = params.f64_list_or("threshold", &[1.0, 2.0])?;
    let widths = params.f64_list_or("width", &[1.0, 1.5])?;
    let mut results = Vec::new();
    for &x in &grid {
        for &v in &variants {
            for &t in &thresholds {
                for &w in &widths {
                    results.push(window_search(
                        x,
                        v,
                        SearchParams {
                            threshold: t,
                            width: w,
                        },
                    )?);
                }
            }
        }
    }
    write_witness_csv(&results, create(out, "witness.csv")?)?;
    write_json(&out.join("window.json"), &results)
}

fn run_refute(params: &ParamFile, out: &Path) -> Result<(), LabError> {
    let n = params.u64_or("n", 100_000_000)?;
    let delta = params.f64_or("delta", 0.01)?;
    let budget = params.u64_or("budget", 1_000_000)?;
    let weak = Some((params.f64_or("c0", 3.0)?, params.f64_or("d", 1.5)?));
    let r = erdos679_refuter(n, delta, budget, weak)?;
    write_json(&out.join("refute.json"), &r)
}
