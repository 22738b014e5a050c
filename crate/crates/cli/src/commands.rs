use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use gaplab::construction::{
    construct, generate_rn, midpoint_and_bias, sorted_gap_array, stage_diagnostics,
    ConstructionRun, StageDiagnostics,
};
use gaplab::gapstats::{gap_cdf, pair_correlation, reference_cdf, s_grid, star_discrepancy, ReferenceKind};
use gaplab::io::{self, json_bytes};
use gaplab::structure::{descendants, moment_table};
use gaplab::{PointSet, SeededStream, DYADIC_DEN};

use crate::output::{emit, sidecar};
use crate::{Format, Global, Kind, SCHEMA_VERSION};

fn kind_name(k: Kind) -> &'static str {
    match k {
        Kind::Iid => "iid",
        Kind::Rn => "rn",
        Kind::ConstructX => "construct-x",
        Kind::ConstructZ => "construct-z",
        Kind::SortedGapArray => "sorted-gap-array",
    }
}

pub fn iid(seed: u64, n: usize) -> PointSet {
    let mut s = SeededStream::new(seed);
    PointSet::from_grid(DYADIC_DEN, (0..n).map(|_| s.next_dyadic()).collect())
        .expect("dyadic variates lie below 2^53")
}

#[derive(Serialize)]
struct PointRow {
    n: u64,
    num: u64,
    den: u64,
}

fn points_bytes(g: &Global, kind: Kind, ps: &PointSet) -> Vec<u8> {
    match g.format {
        Format::Csv => io::points_csv(ps),
        Format::Json => {
            let rows: Vec<PointRow> = ps
                .labels()
                .iter()
                .zip(ps.nums())
                .map(|(&n, &num)| PointRow { n, num, den: ps.den() })
                .collect();
            json_bytes(&json!({
                "schema_version": SCHEMA_VERSION,
                "kind": kind_name(kind),
                "seed": g.seed,
                "n": ps.len(),
                "points": rows,
            }))
        }
    }
}

pub fn generate(
    g: &Global,
    kind: Kind,
    n: Option<usize>,
    base: Option<PathBuf>,
    a: f64,
    b: f64,
) -> anyhow::Result<bool> {
    let total = g.schedule.total() as usize;
    let need_n = || n.context("--n is required for this kind");
    match kind {
        Kind::Iid => {
            let ps = iid(g.seed, need_n()?);
            emit(g.out.as_deref(), &points_bytes(g, kind, &ps))?;
        }
        Kind::SortedGapArray => {
            let base = match base {
                Some(p) => io::read_points(&p).with_context(|| format!("reading {}", p.display()))?,
                None => iid(g.seed, need_n()?),
            };
            let row = sorted_gap_array(&base, n.unwrap_or(base.len()))?;
            emit(g.out.as_deref(), &points_bytes(g, kind, &row))?;
        }
        Kind::Rn => {
            let sample = generate_rn(g.seed, &g.schedule, n.unwrap_or(total))?;
            emit(g.out.as_deref(), &points_bytes(g, kind, &sample.r))?;
            if let Some(out) = &g.out {
                emit(Some(&sidecar(out, "t.csv")), &io::points_csv(&sample.t))?;
            }
        }
        Kind::ConstructX | Kind::ConstructZ => {
            let out = g
                .out
                .as_deref()
                .context("construct kinds need --out for the sidecar files")?;
            let n = n.unwrap_or(total);
            if n == 0 || n > total {
                bail!("--n must lie in 1..={total}");
            }
            let run = construct(g.seed, &g.schedule)?;
            let ps = if kind == Kind::ConstructX {
                run.x_prefix(n)
            } else {
                run.z_prefix(n)
            };
            emit(Some(out), &points_bytes(g, kind, &ps))?;
            let records: Vec<_> = run.records().collect();
            emit(Some(&sidecar(out, "run.csv")), &io::run_csv(records.iter()))?;
            emit(
                Some(&sidecar(out, "swaps.csv")),
                &io::swaps_csv(run.stages().iter().map(|s| &s.map)),
            )?;
            let stages: Vec<usize> = (1..=run.schedule().len()).collect();
            let diag = diagnostics_json(&run, a, b, &stages)?;
            emit(Some(&sidecar(out, "diagnostics.json")), &json_bytes(&diag))?;
            let meta = json!({
                "schema_version": SCHEMA_VERSION,
                "tool": "gaplab",
                "version": env!("CARGO_PKG_VERSION"),
                "kind": kind_name(kind),
                "seed": g.seed,
                "schedule": g.schedule.stages(),
                "n": n,
            });
            emit(Some(&sidecar(out, "meta.json")), &json_bytes(&meta))?;
        }
    }
    Ok(true)
}

fn read(input: &Path) -> anyhow::Result<PointSet> {
    io::read_points(input).with_context(|| format!("reading {}", input.display()))
}

#[derive(Serialize)]
struct CdfRow {
    s: f64,
    empirical: f64,
    reference: f64,
    abs_diff: f64,
}

fn cdf_output(g: &Global, name: &str, reference: &str, n: usize, rows: &[(f64, f64, f64)]) -> anyhow::Result<()> {
    let max = rows.iter().map(|r| (r.1 - r.2).abs()).fold(0.0, f64::max);
    eprintln!("{name}: n = {n}, max_abs_diff = {}", io::fmt_real(max));
    let bytes = match g.format {
        Format::Csv => io::gap_cdf_csv(rows),
        Format::Json => {
            let rows: Vec<CdfRow> = rows
                .iter()
                .map(|&(s, e, r)| CdfRow {
                    s,
                    empirical: e,
                    reference: r,
                    abs_diff: (e - r).abs(),
                })
                .collect();
            json_bytes(&json!({
                "schema_version": SCHEMA_VERSION,
                "statistic": name,
                "reference": reference,
                "n": n,
                "max_abs_diff": max,
                "rows": rows,
            }))
        }
    };
    emit(g.out.as_deref(), &bytes)
}

pub fn gapcdf(g: &Global, input: &Path, kind: ReferenceKind, s_max: f64, steps: usize) -> anyhow::Result<bool> {
    let ps = read(input)?;
    let grid = s_grid(s_max, steps);
    let rows = gap_cdf(&ps, &grid)?
        .into_iter()
        .map(|(s, e)| Ok((s, e, reference_cdf(kind, s)?)))
        .collect::<gaplab::Result<Vec<_>>>()?;
    let name = serde_json::to_value(kind)?.as_str().unwrap_or_default().to_owned();
    cdf_output(g, "gapcdf", &name, ps.len(), &rows)?;
    Ok(true)
}

pub fn paircorr(g: &Global, input: &Path, s_max: f64, steps: usize) -> anyhow::Result<bool> {
    let ps = read(input)?;
    let rows = s_grid(s_max, steps)
        .into_par_iter()
        .map(|s| Ok((s, pair_correlation(&ps, s)?, 2.0 * s)))
        .collect::<gaplab::Result<Vec<_>>>()?;
    cdf_output(g, "paircorr", "2s", ps.len(), &rows)?;
    Ok(true)
}

pub fn discrepancy(g: &Global, input: &Path) -> anyhow::Result<bool> {
    let ps = read(input)?;
    let d = star_discrepancy(&ps)?;
    let bytes = match g.format {
        Format::Csv => format!("n,star_discrepancy\n{},{}\n", ps.len(), io::fmt_real(d)).into_bytes(),
        Format::Json => json_bytes(&json!({
            "schema_version": SCHEMA_VERSION,
            "n": ps.len(),
            "star_discrepancy": d,
        })),
    };
    emit(g.out.as_deref(), &bytes)?;
    Ok(true)
}

#[derive(Serialize)]
struct StageReport {
    stage: usize,
    bias: gaplab::construction::BiasReport,
    decomposition_holds: bool,
    key_fraction: Option<f64>,
    band_fraction: Option<f64>,
    diagnostics: StageDiagnostics,
}

fn stage_reports(run: &ConstructionRun, a: f64, b: f64, stages: &[usize]) -> anyhow::Result<Vec<StageReport>> {
    stages
        .par_iter()
        .map(|&k| {
            let bias = midpoint_and_bias(run, k)?;
            let d = stage_diagnostics(run, k, a, b)?;
            let band = (!d.rows.is_empty())
                .then(|| d.rows.iter().filter(|r| r.band_holds).count() as f64 / d.rows.len() as f64);
            Ok(StageReport {
                stage: k,
                decomposition_holds: bias.decomposition_holds(run.schedule().n(k)),
                bias,
                key_fraction: d.key_fraction(),
                band_fraction: band,
                diagnostics: d,
            })
        })
        .collect()
}

fn diagnostics_json(run: &ConstructionRun, a: f64, b: f64, stages: &[usize]) -> anyhow::Result<serde_json::Value> {
    let reports = stage_reports(run, a, b, stages)?;
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "seed": run.seed(),
        "schedule": run.schedule().stages(),
        "a": a,
        "b": b,
        "stages": reports,
    }))
}

pub fn diagnostics(g: &Global, a: f64, b: f64, stage: Option<usize>) -> anyhow::Result<bool> {
    let run = construct(g.seed, &g.schedule)?;
    let stages: Vec<usize> = match stage {
        Some(k) => vec![k],
        None => (1..=run.schedule().len()).collect(),
    };
    let reports = stage_reports(&run, a, b, &stages)?;
    for r in &reports {
        eprintln!(
            "stage {}: m_k = {}, left_fraction = {}, swapped = {}, decomposition {}",
            r.stage,
            r.bias.midpoint,
            io::fmt_real(r.bias.left_fraction),
            r.bias.swapped_count,
            if r.decomposition_holds { "holds" } else { "FAILS" }
        );
    }
    let ok = reports.iter().all(|r| r.decomposition_holds);
    let bytes = match g.format {
        Format::Json => json_bytes(&diagnostics_json(&run, a, b, &stages)?),
        Format::Csv => {
            let mut s = String::from(
                "k,ell,mbar,m_left,m_right,mu,nu,t_right,key_j,key_t_right,band_holds,alt_band_holds\n",
            );
            let opt = |v: Option<u64>| v.map(|v| v.to_string()).unwrap_or_default();
            for r in &reports {
                for c in &r.diagnostics.rows {
                    s.push_str(&format!(
                        "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                        r.stage,
                        c.ell,
                        c.mbar,
                        c.m_left,
                        c.m_right,
                        c.mu,
                        c.nu,
                        c.t_right,
                        opt(c.key_j),
                        opt(c.key_t_right),
                        c.band_holds,
                        c.alt_band_holds
                    ));
                }
            }
            s.into_bytes()
        }
    };
    emit(g.out.as_deref(), &bytes)?;
    Ok(ok)
}

pub fn moments(
    g: &Global,
    input: &Path,
    ms: &[usize],
    ns: &[usize],
    ks: &[u32],
    dump: Option<PathBuf>,
) -> anyhow::Result<bool> {
    let ps = read(input)?;
    let pairs: Vec<(usize, usize)> = ms
        .iter()
        .flat_map(|&m| ns.iter().map(move |&n| (m, n)))
        .filter(|&(m, n)| m < n)
        .collect();
    if pairs.is_empty() {
        bail!("no (M, N) pair with M < N");
    }
    let tables = pairs
        .par_iter()
        .map(|&(m, n)| {
            let idx = descendants(&ps, m, n).with_context(|| format!("M = {m}, N = {n}"))?;
            let t = moment_table(&idx, ks).with_context(|| format!("M = {m}, N = {n}"))?;
            Ok((idx, t))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    if let Some(p) = dump {
        emit(Some(&p), &io::descendants_csv(&tables[0].0))?;
    }
    let rows: Vec<_> = tables.into_iter().flat_map(|(_, t)| t).collect();
    let bytes = match g.format {
        Format::Csv => io::moments_csv(&rows),
        Format::Json => json_bytes(&json!({
            "schema_version": SCHEMA_VERSION,
            "n": ps.len(),
            "rows": rows,
        })),
    };
    emit(g.out.as_deref(), &bytes)?;
    Ok(true)
}
