//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line
//! straight to stderr so that it shows up even when output is captured.

use std::io::Write;
use std::process::Command;
use std::sync::OnceLock;

use gaplab::construction::{
    build_swap_map, construct, gap_classes, generate_rn, midpoint_and_bias, sorted_gap_array,
    StageSchedule, SwapMap,
};
use gaplab::gapstats::{
    empirical_cdf, gap_cdf, ks_two_sample, pair_correlation, reference_cdf, s_grid,
    star_discrepancy, ReferenceKind,
};
use gaplab::oracle;
use gaplab::structure::{descendants, first_gap_mismatch, moment_table, same_gap_multiset, MomentReport};
use gaplab::{gaps, GridPoint, PointSet, SeededStream, DYADIC_DEN};

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn report(criterion: u32, ok: bool, detail: &str) {
    let line = format!(
        "criterion {criterion}: {} - {detail}\n",
        if ok { "PASS" } else { "FAIL" }
    );
    let mut e = std::io::stderr().lock();
    let _ = e.write_all(line.as_bytes());
    let _ = e.flush();
}

fn desk() -> StageSchedule {
    StageSchedule::new(vec![100, 10_000, 1_000_000]).unwrap()
}

fn iid(seed: u64, n: usize) -> PointSet {
    let mut s = SeededStream::new(seed);
    PointSet::from_grid(DYADIC_DEN, (0..n).map(|_| s.next_dyadic()).collect()).unwrap()
}

fn sup_exp(ps: &PointSet, grid: &[f64]) -> f64 {
    gap_cdf(ps, grid)
        .unwrap()
        .iter()
        .map(|&(s, p)| (p - reference_cdf(ReferenceKind::Exponential, s).unwrap()).abs())
        .fold(0.0, f64::max)
}

type Moments = Result<Vec<MomentReport>, gaplab::Error>;

/// Everything the run-based criteria need from one desk-scale seed, so the
/// run itself can be dropped.
struct SeedSummary {
    seed: u64,
    checkpoints_equal: Vec<(usize, bool)>,
    first_mismatch: Option<usize>,
    sup_gap: f64,
    left_fraction: Vec<f64>,
    swapped: Vec<u64>,
    decomposition: Vec<bool>,
    discrepancy: f64,
    moments: Vec<(usize, usize, Moments, Moments)>,
}

const MOMENT_M: [usize; 8] = [2, 3, 5, 10, 20, 50, 100, 200];

fn summarize(seed: u64) -> SeedSummary {
    let s = desk();
    let run = construct(seed, &s).unwrap();
    let total = run.len();
    let mut pick = SeededStream::new(0xC0FFEE ^ seed);
    let mut ns: Vec<usize> = vec![200, 20_000, total];
    ns.extend((0..20).map(|_| 1 + (pick.next_u64() % total as u64) as usize));
    let checkpoints_equal = ns
        .iter()
        .map(|&n| (n, same_gap_multiset(&run.x_prefix(n), &run.z_prefix(n)).unwrap()))
        .collect();
    let x = run.x_prefix(total);
    let z = run.z_prefix(total);
    let first_mismatch = first_gap_mismatch(&x, &z).unwrap();
    let sup_gap = sup_exp(&x, &s_grid(5.0, 500));
    let mut left_fraction = Vec::new();
    let mut swapped = Vec::new();
    let mut decomposition = Vec::new();
    for k in 1..=s.len() {
        let b = midpoint_and_bias(&run, k).unwrap();
        left_fraction.push(b.left_fraction);
        swapped.push(b.swapped_count);
        decomposition.push(b.decomposition_holds(s.n(k)));
    }
    let discrepancy = star_discrepancy(&x).unwrap();
    let table = |ps: &PointSet, m: usize, n: usize| -> Moments {
        moment_table(&descendants(ps, m, n)?, &[1, 2, 3, 4])
    };
    let mut moments = Vec::new();
    for m in MOMENT_M {
        for n in [200, 20_000, total] {
            moments.push((m, n, table(&x, m, n), table(&z, m, n)));
        }
    }
    SeedSummary {
        seed,
        checkpoints_equal,
        first_mismatch,
        sup_gap,
        left_fraction,
        swapped,
        decomposition,
        discrepancy,
        moments,
    }
}

fn summaries() -> &'static [SeedSummary] {
    static CELL: OnceLock<Vec<SeedSummary>> = OnceLock::new();
    CELL.get_or_init(|| SEEDS.iter().map(|&s| summarize(s)).collect())
}

#[test]
fn criterion_01_same_gaps() {
    let mut ok = true;
    let mut details = Vec::new();
    for r in summaries() {
        let bad: Vec<usize> = r.checkpoints_equal.iter().filter(|c| !c.1).map(|c| c.0).collect();
        ok &= bad.is_empty() && r.first_mismatch.is_none();
        details.push(format!(
            "seed {}: {} checkpoints, first mismatch {:?}",
            r.seed,
            r.checkpoints_equal.len(),
            r.first_mismatch
        ));
    }
    report(1, ok, &details.join("; "));
    assert!(ok);
}

#[test]
fn criterion_02_exponential_gaps() {
    let worst = summaries().iter().map(|r| r.sup_gap).fold(0.0, f64::max);
    let ok = worst <= 0.02;
    let per: Vec<String> = summaries().iter().map(|r| format!("{:.5}", r.sup_gap)).collect();
    report(2, ok, &format!("sup |P_N - (1 - e^-s)| per seed [{}], tolerance 0.02", per.join(", ")));
    assert!(ok);
}

#[test]
fn criterion_03_bias() {
    let n = desk().total() as usize;
    let baseline = (0..5)
        .map(|i| star_discrepancy(&iid(1000 + i, n)).unwrap())
        .sum::<f64>()
        / 5.0;
    let mut ok = true;
    let mut details = Vec::new();
    for r in summaries() {
        let last = *r.left_fraction.last().unwrap();
        let swaps = r.swapped.iter().skip(1).all(|&c| c > 0);
        let dec = r.decomposition.iter().all(|&d| d);
        let disc = r.discrepancy >= 3.0 * baseline;
        ok &= last > 0.5 && swaps && dec && disc;
        details.push(format!(
            "seed {}: left {:.4}, swapped {:?}, decomposition {}, D* {:.5}",
            r.seed, last, r.swapped, dec, r.discrepancy
        ));
    }
    report(
        3,
        ok,
        &format!("{}; iid D* baseline {:.6}", details.join("; "), baseline),
    );
    assert!(ok);
}

#[test]
fn criterion_04_grid_model() {
    let s = desk();
    let mut ok = true;
    let mut details = Vec::new();
    for seed in SEEDS {
        let rn = generate_rn(seed, &s, 1_000_000).unwrap();
        let sup = sup_exp(&rn.r, &s_grid(5.0, 500));
        let cells = rn.offsets_within_cells();
        ok &= sup <= 0.015 && cells;
        details.push(format!("seed {seed}: sup {sup:.5}, offsets {cells}"));
    }
    report(4, ok, &details.join("; "));
    assert!(ok);
}

#[test]
fn criterion_05_z_distribution() {
    let s = StageSchedule::new(vec![100, 10_000]).unwrap();
    let n = 20_000;
    let mut z = Vec::new();
    let mut yt = Vec::new();
    for seed in 100..130 {
        let run = construct(seed, &s).unwrap();
        z.extend_from_slice(run.z_prefix(n).nums());
        yt.extend_from_slice(run.ytilde_prefix(n).nums());
    }
    let den = s.den(2);
    let d = ks_two_sample(
        &PointSet::from_grid(den, z).unwrap(),
        &PointSet::from_grid(den, yt).unwrap(),
    )
    .unwrap();
    let ok = d <= 0.01;
    report(5, ok, &format!("pooled KS(z, y~) over 30 seeds = {d:.6}, tolerance 0.01"));
    assert!(ok);
}

#[test]
fn criterion_06_triangular_array() {
    let f = |s: f64| reference_cdf(ReferenceKind::Gamma2, s).unwrap();
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for seed in SEEDS {
        let row = sorted_gap_array(&iid(seed, 100_000), 100_000).unwrap();
        for s in [0.5, 1.0, 2.0, 3.0] {
            let frac = empirical_cdf(&row, f(s)).unwrap();
            let d = (frac - reference_cdf(ReferenceKind::Exponential, s).unwrap()).abs();
            worst = worst.max(d);
            ok &= d <= 0.02;
        }
    }
    report(6, ok, &format!("max deviation over 5 seeds and s in {{0.5,1,2,3}} = {worst:.5}"));
    assert!(ok);
}

#[test]
fn criterion_07_moments() {
    let mut ok = true;
    let mut lines = Vec::new();
    for seed in SEEDS {
        let ps = iid(seed, 1_000_000);
        let t = moment_table(&descendants(&ps, 200, 1_000_000).unwrap(), &[1, 2, 3, 4]).unwrap();
        let within = t.iter().all(|r| (r.corrected - 1.0).abs() <= 0.05);
        ok &= within && t[0].corrected == 1.0 && t[1].literal == t[1].corrected;
        lines.push(format!(
            "seed {seed}: corrected [{}], literal k=3 {:.5}",
            t.iter().map(|r| format!("{:.4}", r.corrected)).collect::<Vec<_>>().join(", "),
            t[2].literal
        ));
    }
    // Pairs where a coarse gap vanishes give an error on one or both sides.
    let (mut compared, mut vacuous, mut differ) = (0, 0, Vec::new());
    for r in summaries() {
        for (m, n, x, z) in &r.moments {
            match (x, z) {
                (Ok(_), Ok(_)) => compared += 1,
                _ => vacuous += 1,
            }
            if x != z {
                let kind = if x.is_ok() && z.is_ok() { "values" } else { "errors" };
                differ.push(format!("seed {} (M={m}, N={n}, {kind})", r.seed));
            }
        }
    }
    let value_diffs = differ.iter().filter(|d| d.ends_with("values)")).count();
    let xz = differ.is_empty();
    report(
        7,
        ok && xz,
        &format!(
            "iid: {}; x vs z: {compared} pairs with moments on both sides, {vacuous} with a zero coarse gap, {} differing ({value_diffs} in value){}",
            lines.join("; "),
            differ.len(),
            if xz { String::new() } else { format!(" e.g. {}", differ[..differ.len().min(4)].join(", ")) }
        ),
    );
    assert!(ok, "iid moment bands");
    assert!(xz, "x- and z-prefix moment reports differ");
}

fn small_case(rng: &mut SeededStream) -> PointSet {
    let n = 1 + (rng.next_u64() % 12) as usize;
    let den = 1 + rng.next_u64() % 40;
    PointSet::from_grid(den, (0..n).map(|_| rng.next_u64() % den).collect()).unwrap()
}

#[test]
fn criterion_08_oracles() {
    let mut rng = SeededStream::new(8);
    let mut mismatches = Vec::new();
    let s_values = [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.75];
    for case in 0..1000 {
        let ps = small_case(&mut rng);
        for &s in &s_values {
            if gap_cdf(&ps, &[s]).unwrap()[0].1 != oracle::gap_cdf(&ps, s) {
                mismatches.push(format!("gap_cdf case {case}"));
            }
            if ps.len() >= 2 && pair_correlation(&ps, s).unwrap() != oracle::pair_correlation(&ps, s) {
                mismatches.push(format!("pair_correlation case {case}"));
            }
        }

        let n = 2 + (rng.next_u64() % 11) as usize;
        let distinct = iid(rng.next_u64(), n);
        for m in 1..n {
            if descendants(&distinct, m, n).unwrap().counts != oracle::descendants(&distinct, m, n) {
                mismatches.push(format!("descendants case {case}"));
            }
        }

        let nk = 2 * (1 + (rng.next_u64() % 6) as usize);
        let den = 10 * nk as u64;
        let mut draw = || rng.next_u64() % den;
        let prefix: Vec<u64> = (0..nk).map(|_| draw()).collect();
        let second: Vec<u64> = (0..nk).map(|_| draw()).collect();
        let t = gap_classes(
            1,
            den,
            &PointSet::from_grid(den, prefix.clone()).unwrap(),
            &PointSet::from_grid(den, second.clone()).unwrap(),
        )
        .unwrap();
        if oracle::class_view(&t) != oracle::gap_classes(&prefix, &second, den) {
            mismatches.push(format!("gap_classes case {case}"));
        }
        let pairs: Vec<(u64, u64, u64)> = build_swap_map(&t)
            .unwrap()
            .pairs()
            .iter()
            .map(|p| (p.ell, p.left, p.right))
            .collect();
        if pairs != oracle::swap_pairs(&prefix, &second, den) {
            mismatches.push(format!("build_swap_map case {case}"));
        }
    }
    let ok = mismatches.is_empty();
    report(
        8,
        ok,
        &format!("1000 cases x 5 operations, {} mismatches {:?}", mismatches.len(), &mismatches[..mismatches.len().min(5)]),
    );
    assert!(ok);
}

fn compose_in(maps: &[SwapMap], order: impl Iterator<Item = usize>, v: u64, factor: u64) -> u64 {
    let mut out = v;
    for i in order {
        out = maps[i].apply_scaled(out, factor);
    }
    out
}

#[test]
fn criterion_09_swap_algebra() {
    let s = desk();
    let run = construct(9, &s).unwrap();
    let top = s.den(s.len());
    let mut rng = SeededStream::new(99);
    let mut ok = true;
    let mut details = Vec::new();
    for k in 1..=s.len() {
        let f = &run.stage(k).map;
        let den = s.den(k);
        let mut inv = true;
        let mut order = true;
        let parts = f.class_maps();
        for _ in 0..10_000 {
            for (grid, factor) in [(den, 1), (top, top / den)] {
                let v = rng.next_u64() % grid;
                let p = GridPoint::new(v, grid).unwrap();
                let q = f.apply(p).unwrap();
                inv &= f.apply(q).unwrap() == p && q.den == grid;
                let fwd = compose_in(&parts, 0..parts.len(), v, factor);
                let bwd = compose_in(&parts, (0..parts.len()).rev(), v, factor);
                order &= fwd == q.num && bwd == q.num;
            }
        }
        let prefix = run.x_prefix(s.n(k) as usize);
        let mapped = PointSet::from_grid(
            den,
            prefix.nums().iter().map(|&v| f.apply_scaled(v, 1)).collect(),
        )
        .unwrap();
        let gaps_kept = gaps(&mapped).unwrap() == gaps(&prefix).unwrap();
        let mut left = std::collections::BTreeMap::new();
        let mut right = std::collections::BTreeMap::new();
        for p in f.pairs() {
            *left.entry(p.ell).or_insert(0u64) += p.width;
            *right.entry(p.ell).or_insert(0u64) += p.width;
            ok &= p.width == p.ell && p.left + p.width <= den && p.right + p.width <= den;
        }
        let measure = left == right;
        ok &= inv && order && gaps_kept && measure;
        details.push(format!(
            "stage {k}: {} pairs, involution {inv}, order-free {order}, gaps kept {gaps_kept}, measure {measure}",
            f.pairs().len()
        ));
    }
    report(9, ok, &details.join("; "));
    assert!(ok);
}

fn gaplab(dir: &std::path::Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_gaplab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn criterion_10_reproducible() {
    let steps: Vec<Vec<&str>> = vec![
        vec!["generate", "--kind", "iid", "--seed", "3", "--n", "5000", "--out", "iid.csv"],
        vec!["generate", "--kind", "rn", "--schedule", "10,100,1000", "--seed", "3", "--out", "rn.csv"],
        vec!["generate", "--kind", "construct-x", "--schedule", "10,100,1000", "--seed", "3", "--out", "x.csv"],
        vec!["generate", "--kind", "construct-z", "--schedule", "10,100,1000", "--seed", "3", "--format", "json", "--out", "z.json"],
        vec!["generate", "--kind", "sorted-gap-array", "--seed", "3", "--n", "2000", "--out", "row.csv"],
        vec!["gapcdf", "--input", "iid.csv", "--out", "cdf.csv"],
        vec!["gapcdf", "--input", "x.csv", "--format", "json", "--out", "cdf.json"],
        vec!["discrepancy", "--input", "x.csv", "--format", "json", "--out", "disc.json"],
        vec!["paircorr", "--input", "iid.csv", "--out", "pc.csv"],
        vec!["moments", "--input", "iid.csv", "--m", "10,50", "--n", "1000,5000", "--out", "mom.csv", "--descendants", "desc.csv"],
        vec!["diagnostics", "--schedule", "10,100,1000", "--seed", "3", "--format", "json", "--out", "diag.json"],
        vec!["verify", "--run", "x.run.csv", "--format", "json", "--out", "verify.json"],
    ];
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        for args in &steps {
            let out = gaplab(d.path(), args);
            assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        }
    }
    let list = |d: &std::path::Path| {
        let mut v: Vec<_> = std::fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        v.sort();
        v
    };
    let names = list(dirs[0].path());
    let mut ok = names == list(dirs[1].path());
    let mut differing = Vec::new();
    for name in &names {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        if a != b {
            differing.push(name.to_string_lossy().into_owned());
        }
    }
    ok &= differing.is_empty();
    report(
        10,
        ok,
        &format!("{} artifacts compared across two runs, differing: {differing:?}", names.len()),
    );
    assert!(ok);
}
