//! CSV formats and atomic file output.
//!
//! Exact points are written as `num,den` integer pairs; reals use
//! 17 significant digits so that every `f64` round-trips.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::construction::run::Record;
use crate::construction::swap::SwapMap;
use crate::error::{Error, Result};
use crate::points::{GridPoint, PointSet, DYADIC_DEN};
use crate::structure::{DescendantIndex, MomentReport};

pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes to a sibling temporary file, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let res = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = res {
        let _ = fs::remove_file(&tmp);
        return Err(Error::Io(format!("{}: {e}", path.display())));
    }
    Ok(())
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// `n,num,den`, one row per point, labels as `n`.
pub fn points_csv(ps: &PointSet) -> Vec<u8> {
    let den = ps.den().to_string();
    csv_bytes(
        &["n", "num", "den"],
        ps.labels()
            .iter()
            .zip(ps.nums())
            .map(|(n, v)| vec![n.to_string(), v.to_string(), den.clone()]),
    )
}

/// `n,value`, for point sets that only exist as reals.
pub fn real_points_csv(values: &[f64]) -> Vec<u8> {
    csv_bytes(
        &["n", "value"],
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| vec![(i + 1).to_string(), fmt_real(v)]),
    )
}

fn parse_err(line: u64, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64, name: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = rec.get(i).ok_or_else(|| parse_err(line, format!("missing {name}")))?;
    raw.trim()
        .parse()
        .map_err(|e| parse_err(line, format!("bad {name} {raw:?}: {e}")))
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

/// Parses either layout. Every row must match the header's layout.
pub fn parse_points(text: &str) -> Result<PointSet> {
    let mut rd = reader(text);
    let header = rd
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let cols: Vec<&str> = header.iter().collect();
    let exact = match cols.as_slice() {
        ["n", "num", "den"] => true,
        ["n", "value"] => false,
        _ => {
            return Err(parse_err(
                1,
                format!("expected header n,num,den or n,value, got {}", cols.join(",")),
            ))
        }
    };
    let want = if exact { 3 } else { 2 };
    let mut labels = Vec::new();
    let mut points = Vec::new();
    let mut reals = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| {
            parse_err(e.position().map_or(0, |p| p.line()), e.to_string())
        })?;
        let line = line_of(&rec);
        if rec.len() != want {
            return Err(parse_err(
                line,
                format!("expected {want} fields, got {}", rec.len()),
            ));
        }
        labels.push(field::<u64>(&rec, 0, line, "n")?);
        if exact {
            let num = field(&rec, 1, line, "num")?;
            let den = field(&rec, 2, line, "den")?;
            points.push(GridPoint::new(num, den).map_err(|e| parse_err(line, e.to_string()))?);
        } else {
            let v: f64 = field(&rec, 1, line, "value")?;
            if !(0.0..1.0).contains(&v) {
                return Err(parse_err(line, format!("value {v} outside [0, 1)")));
            }
            reals.push(v);
        }
    }
    if labels.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let ps = if exact {
        PointSet::from_points(&points)?
    } else {
        PointSet::from_reals(&reals)?
    };
    ps.relabel(labels)
}

pub fn read_points(path: &Path) -> Result<PointSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_points(&text)
}

pub const RUN_HEADER: [&str; 8] = [
    "n", "y", "ytilde_num", "ytilde_den", "x_num", "x_den", "z_num", "z_den",
];

pub fn run_csv<'a>(records: impl Iterator<Item = &'a Record>) -> Vec<u8> {
    csv_bytes(
        &RUN_HEADER,
        records.map(|r| {
            vec![
                r.n.to_string(),
                fmt_real(r.y_f64()),
                r.ytilde.num.to_string(),
                r.ytilde.den.to_string(),
                r.x.num.to_string(),
                r.x.den.to_string(),
                r.z.num.to_string(),
                r.z.den.to_string(),
            ]
        }),
    )
}

pub fn parse_run(text: &str) -> Result<Vec<Record>> {
    let mut rd = reader(text);
    let header = rd.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if header.iter().ne(RUN_HEADER.iter().copied()) {
        return Err(parse_err(1, format!("expected header {}", RUN_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = line_of(&rec);
        if rec.len() != RUN_HEADER.len() {
            return Err(parse_err(line, format!("expected 8 fields, got {}", rec.len())));
        }
        let y: f64 = field(&rec, 1, line, "y")?;
        let y_num = y * DYADIC_DEN as f64;
        if !(0.0..DYADIC_DEN as f64).contains(&y_num) || y_num.fract() != 0.0 {
            return Err(parse_err(line, format!("y = {y} is not a 53-bit dyadic in [0, 1)")));
        }
        let gp = |i: usize, name: &str| -> Result<GridPoint> {
            let num = field(&rec, i, line, name)?;
            let den = field(&rec, i + 1, line, name)?;
            GridPoint::new(num, den).map_err(|e| parse_err(line, e.to_string()))
        };
        out.push(Record {
            n: field(&rec, 0, line, "n")?,
            y: y_num as u64,
            ytilde: gp(2, "ytilde")?,
            x: gp(4, "x")?,
            z: gp(6, "z")?,
        });
    }
    Ok(out)
}

pub fn read_run(path: &Path) -> Result<Vec<Record>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_run(&text)
}

pub fn swaps_csv<'a>(maps: impl Iterator<Item = &'a SwapMap>) -> Vec<u8> {
    let mut rows = Vec::new();
    for m in maps {
        for p in m.pairs() {
            rows.push(vec![
                m.stage().to_string(),
                p.ell.to_string(),
                p.left.to_string(),
                p.right.to_string(),
                p.width.to_string(),
                m.den().to_string(),
            ]);
        }
    }
    csv_bytes(
        &["k", "ell", "left_num", "right_num", "width_num", "den"],
        rows.into_iter(),
    )
}

/// `s,empirical,reference,abs_diff`.
pub fn gap_cdf_csv(rows: &[(f64, f64, f64)]) -> Vec<u8> {
    csv_bytes(
        &["s", "empirical", "reference", "abs_diff"],
        rows.iter().map(|&(s, e, r)| {
            vec![fmt_real(s), fmt_real(e), fmt_real(r), fmt_real((e - r).abs())]
        }),
    )
}

pub fn moments_csv(rows: &[MomentReport]) -> Vec<u8> {
    csv_bytes(
        &["M", "N", "k", "literal", "corrected"],
        rows.iter().map(|r| {
            vec![
                r.m.to_string(),
                r.n.to_string(),
                r.k.to_string(),
                fmt_real(r.literal),
                fmt_real(r.corrected),
            ]
        }),
    )
}

pub fn descendants_csv(idx: &DescendantIndex) -> Vec<u8> {
    let den = idx.den.to_string();
    csv_bytes(
        &["i", "g_num", "g_den", "count"],
        idx.coarse_gaps
            .iter()
            .zip(&idx.counts)
            .enumerate()
            .map(|(i, (g, c))| vec![(i + 1).to_string(), g.to_string(), den.clone(), c.to_string()]),
    )
}

/// Pretty JSON with a trailing newline.
pub fn json_bytes<T: serde::Serialize>(v: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("serializable report");
    out.push(b'\n');
    out
}
