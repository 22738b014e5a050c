use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use gaplab::construction::{BiasReport, Record, StageSchedule};
use gaplab::gapstats::ks_two_sample;
use gaplab::io::{self, json_bytes};
use gaplab::structure::{descendants, first_gap_mismatch, moment_table, MomentReport};
use gaplab::{GridPoint, PointSet};

use crate::output::emit;
use crate::{Format, Global, SCHEMA_VERSION};

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Non-gating checks are reported but do not affect the exit code.
    pub gating: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
struct MomentComparison {
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "N")]
    n: usize,
    x: Result<Vec<MomentReport>, String>,
    z: Result<Vec<MomentReport>, String>,
    identical: bool,
}

#[derive(Debug, Serialize)]
struct RunReport {
    path: PathBuf,
    schedule: Vec<u64>,
    n: usize,
    passed: bool,
    first_failing_n: Option<usize>,
    checks: Vec<Check>,
    bias: Vec<BiasReport>,
    moments: Vec<MomentComparison>,
}

/// Recovers `(N_1, ..., N_K)` from the stage denominators `10^k N_k`.
fn infer_schedule(recs: &[Record]) -> anyhow::Result<StageSchedule> {
    let mut stages = Vec::new();
    let mut i = 0;
    while i < recs.len() {
        let den = recs[i].ytilde.den;
        let len = recs[i..].iter().take_while(|r| r.ytilde.den == den).count();
        let k = stages.len() as u32 + 1;
        let p = 10u64.checked_pow(k).context("too many stages")?;
        ensure!(den % p == 0, "row {}: denominator {den} is not a stage-{k} grid", i + 2);
        let nk = den / p;
        let prev = stages.last().copied().unwrap_or(0);
        ensure!(
            len as u64 == 2 * nk - 2 * prev,
            "stage {k} has {len} rows, expected {}",
            2 * nk - 2 * prev
        );
        stages.push(nk);
        i += len;
    }
    if stages.is_empty() {
        bail!("empty run file");
    }
    Ok(StageSchedule::new(stages)?)
}

fn check(name: &'static str, passed: bool, gating: bool, detail: String) -> Check {
    Check {
        name,
        passed,
        gating,
        detail,
    }
}

fn lifted(recs: &[Record], col: impl Fn(&Record) -> GridPoint, n: usize, den: u64) -> PointSet {
    let nums = recs[..n].iter().map(|r| {
        let p = col(r);
        p.num * (den / p.den)
    });
    PointSet::from_grid(den, nums.collect()).expect("points below their grid")
}

fn bias_from_file(recs: &[Record], s: &StageSchedule, k: usize) -> BiasReport {
    let n_k = s.n(k) as usize;
    let den = s.den(k);
    let x = lifted(recs, |r| r.x, 2 * n_k, den);
    let mut ord = x.nums()[..n_k].to_vec();
    ord.sort_unstable();
    let m = ord[n_k / 2 - 1];
    let second = &recs[n_k..2 * n_k];
    let left_count = x.nums().iter().filter(|&&v| v < m).count() as u64;
    BiasReport {
        stage: k,
        midpoint: GridPoint { num: m, den },
        left_count,
        left_fraction: left_count as f64 / (2 * n_k) as f64,
        swapped_count: second.iter().filter(|r| r.x != r.ytilde).count() as u64,
        first_half_left: x.nums()[..n_k].iter().filter(|&&v| v < m).count() as u64,
        second_half_ytilde_left: second.iter().filter(|r| r.ytilde.num < m).count() as u64,
        ties_below: ord[..n_k / 2 - 1].iter().filter(|&&p| p == m).count() as u64,
    }
}

fn ks_threshold(n: usize) -> f64 {
    (1.95 * (2.0 / n as f64).sqrt()).max(0.01)
}

fn verify_one(path: &Path, moments_m: &[usize], require_bias: bool) -> anyhow::Result<RunReport> {
    let recs = io::read_run(path).with_context(|| format!("reading {}", path.display()))?;
    let s = infer_schedule(&recs).with_context(|| format!("{}", path.display()))?;
    let total = recs.len();
    let top = s.den(s.len());
    let mut checks = Vec::new();

    let bad_index = recs.iter().enumerate().find(|(i, r)| r.n != *i as u64 + 1);
    checks.push(check(
        "indices",
        bad_index.is_none(),
        true,
        bad_index.map_or("n = 1..N".into(), |(i, r)| format!("row {} has n = {}", i + 2, r.n)),
    ));

    let bad_grid = recs.iter().find(|r| {
        let d = r.ytilde.den;
        let lhs = r.y as u128 * d as u128;
        let base = (r.ytilde.num as u128) << 53;
        r.x.den != d || r.z.den != d || lhs < base || lhs - base >= 1u128 << 53
    });
    checks.push(check(
        "grid_bounds",
        bad_grid.is_none(),
        true,
        bad_grid.map_or("0 <= y - y~ < 1/D_k and stage grids".into(), |r| format!("fails at n = {}", r.n)),
    ));

    let bad_first = (1..=s.len()).find_map(|k| {
        let lo = 2 * s.n(k - 1) as usize;
        let hi = s.n(k) as usize;
        recs[lo..hi].iter().find(|r| r.x != r.ytilde).map(|r| r.n)
    });
    checks.push(check(
        "x_first_half",
        bad_first.is_none(),
        true,
        bad_first.map_or("x = y~ on every first half".into(), |n| format!("x != y~ at n = {n}")),
    ));

    let x_all = lifted(&recs, |r| r.x, total, top);
    let z_all = lifted(&recs, |r| r.z, total, top);
    let first_failing_n = first_gap_mismatch(&x_all, &z_all)?;
    checks.push(check(
        "same_gap_multiset",
        first_failing_n.is_none(),
        true,
        first_failing_n.map_or(format!("identical at every N <= {total}"), |n| {
            format!("first failing N = {n}")
        }),
    ));

    let bias: Vec<BiasReport> = (1..=s.len()).map(|k| bias_from_file(&recs, &s, k)).collect();
    let bad_dec = bias.iter().find(|b| !b.decomposition_holds(s.n(b.stage)));
    checks.push(check(
        "decomposition",
        bad_dec.is_none(),
        true,
        bad_dec.map_or("exact at every stage".into(), |b| format!("fails at stage {}", b.stage)),
    ));

    let yt_all = lifted(&recs, |r| r.ytilde, total, top);
    let ks = ks_two_sample(&z_all, &yt_all)?;
    let thr = ks_threshold(total);
    checks.push(check(
        "ks_z_vs_ytilde",
        ks <= thr,
        true,
        format!("D = {}, threshold {}", io::fmt_real(ks), io::fmt_real(thr)),
    ));

    let last = bias.last().expect("at least one stage");
    checks.push(check(
        "bias_final_stage",
        last.left_fraction > 0.5,
        require_bias,
        format!("left_fraction = {}", io::fmt_real(last.left_fraction)),
    ));

    let no_swap = bias.iter().skip(1).find(|b| b.swapped_count == 0);
    checks.push(check(
        "swaps_from_stage_2",
        no_swap.is_none(),
        false,
        no_swap.map_or("swapped_count > 0 for k >= 2".into(), |b| format!("no swaps at stage {}", b.stage)),
    ));

    let checkpoints: Vec<usize> = (1..=s.len()).map(|k| 2 * s.n(k) as usize).collect();
    let pairs: Vec<(usize, usize)> = moments_m
        .iter()
        .flat_map(|&m| checkpoints.iter().map(move |&n| (m, n)))
        .filter(|&(m, n)| m >= 1 && m < n)
        .collect();
    let table = |ps: &PointSet, m: usize, n: usize| {
        descendants(ps, m, n)
            .and_then(|idx| moment_table(&idx, &[1, 2, 3, 4]))
            .map_err(|e| e.to_string())
    };
    let moments: Vec<MomentComparison> = pairs
        .par_iter()
        .map(|&(m, n)| {
            let x = table(&x_all, m, n);
            let z = table(&z_all, m, n);
            MomentComparison {
                m,
                n,
                identical: x == z,
                x,
                z,
            }
        })
        .collect();
    let differing: Vec<String> = moments
        .iter()
        .filter(|c| !c.identical)
        .map(|c| format!("(M = {}, N = {})", c.m, c.n))
        .collect();
    checks.push(check(
        "moments_x_equals_z",
        differing.is_empty(),
        false,
        if differing.is_empty() {
            format!("{} comparisons identical", moments.len())
        } else {
            format!("differ at {}", differing.join(", "))
        },
    ));

    let passed = checks.iter().all(|c| c.passed || !c.gating);
    Ok(RunReport {
        path: path.to_path_buf(),
        schedule: s.stages().to_vec(),
        n: total,
        passed,
        first_failing_n,
        checks,
        bias,
        moments,
    })
}

pub fn verify(g: &Global, runs: &[PathBuf], moments_m: &[usize], require_bias: bool) -> anyhow::Result<bool> {
    let reports = runs
        .par_iter()
        .map(|p| verify_one(p, moments_m, require_bias))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let passed = reports.iter().all(|r| r.passed);
    for r in &reports {
        for c in &r.checks {
            let tag = match (c.passed, c.gating) {
                (true, _) => "pass",
                (false, true) => "FAIL",
                (false, false) => "note",
            };
            eprintln!("{}: {tag} {} ({})", r.path.display(), c.name, c.detail);
        }
    }
    let bytes = match g.format {
        Format::Json => json_bytes(&json!({
            "schema_version": SCHEMA_VERSION,
            "passed": passed,
            "runs": reports,
        })),
        Format::Csv => {
            let mut s = String::from("run,check,passed,gating,detail\n");
            for r in &reports {
                for c in &r.checks {
                    s.push_str(&format!(
                        "{},{},{},{},\"{}\"\n",
                        r.path.display(),
                        c.name,
                        c.passed,
                        c.gating,
                        c.detail.replace('"', "\"\"")
                    ));
                }
            }
            s.into_bytes()
        }
    };
    emit(g.out.as_deref(), &bytes)?;
    Ok(passed)
}
