//! Report rendering: grouped min/max/mean timing tables in markdown and
//! CSV, plus speedup ratios of each algorithm's mean against the
//! optimized pipeline's mean.

use std::fmt::Write as _;

use crate::bench::BenchRecord;

const OPTIMIZED: &str = "optimized-uf";

/// Row-group key: one image at one size.
fn group_key(r: &BenchRecord) -> (String, u32, u32) {
    (r.image.clone(), r.width, r.height)
}

fn groups(records: &[BenchRecord]) -> Vec<((String, u32, u32), Vec<&BenchRecord>)> {
    let mut out: Vec<((String, u32, u32), Vec<&BenchRecord>)> = Vec::new();
    for r in records {
        let key = group_key(r);
        match out.iter_mut().find(|(k, _)| *k == key) {
            Some((_, rows)) => rows.push(r),
            None => out.push((key, vec![r])),
        }
    }
    out
}

fn algo_columns(records: &[BenchRecord]) -> Vec<String> {
    let mut cols = Vec::new();
    for r in records {
        if !cols.contains(&r.algo) {
            cols.push(r.algo.clone());
        }
    }
    cols
}

/// Markdown table grouped by image and size, with min/max/mean sub-rows
/// per group and one column per algorithm. The header states the timing
/// methodology.
pub fn markdown_report(records: &[BenchRecord]) -> String {
    let cols = algo_columns(records);
    let runs = records.first().map(|r| r.runs).unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Execution time in milliseconds over {runs} runs per combination. \
         Timing covers the labeling pipeline only (no file I/O, no verification); \
         one warm-up run, which doubles as the oracle check, is excluded."
    );
    out.push('\n');
    let _ = write!(out, "| Image | |");
    for c in &cols {
        let _ = write!(out, " {c} |");
    }
    out.push('\n');
    let _ = write!(out, "|---|---|");
    for _ in &cols {
        let _ = write!(out, "---:|");
    }
    out.push('\n');

    for ((image, width, height), rows) in groups(records) {
        let cell = |stat: &str, pick: fn(&BenchRecord) -> f64| -> String {
            let mut line = String::new();
            for c in &cols {
                match rows.iter().find(|r| &r.algo == c) {
                    Some(r) => {
                        let _ = write!(line, " {:.2} |", pick(r));
                    }
                    None => line.push_str(" - |"),
                }
            }
            format!("{stat} |{line}")
        };
        let _ = writeln!(
            out,
            "| {image} ({width}x{height}) | {}",
            cell("min", |r| r.min_ms)
        );
        let _ = writeln!(out, "| | {}", cell("max", |r| r.max_ms));
        let _ = writeln!(out, "| | {}", cell("mean", |r| r.mean_ms));
    }
    out
}

/// Speedup table: mean(algorithm) / mean(optimized-uf) per image and size.
/// Empty when no group contains the optimized pipeline.
pub fn speedup_report(records: &[BenchRecord]) -> String {
    let cols: Vec<String> = algo_columns(records)
        .into_iter()
        .filter(|c| c != OPTIMIZED)
        .collect();
    let mut out = String::new();
    let _ = writeln!(out, "Mean-time speedup of {OPTIMIZED} (higher is better):");
    out.push('\n');
    let _ = write!(out, "| Image |");
    for c in &cols {
        let _ = write!(out, " vs {c} |");
    }
    out.push('\n');
    let _ = write!(out, "|---|");
    for _ in &cols {
        let _ = write!(out, "---:|");
    }
    out.push('\n');
    for ((image, width, height), rows) in groups(records) {
        let Some(ours) = rows.iter().find(|r| r.algo == OPTIMIZED) else {
            continue;
        };
        let _ = write!(out, "| {image} ({width}x{height}) |");
        for c in &cols {
            match rows.iter().find(|r| &r.algo == c) {
                Some(r) => {
                    let _ = write!(out, " {:.2}x |", r.mean_ms / ours.mean_ms);
                }
                None => out.push_str(" - |"),
            }
        }
        out.push('\n');
    }
    out
}

/// CSV encoding: `algo,image,width,height,runs,min_ms,max_ms,mean_ms`.
pub fn csv_report(records: &[BenchRecord]) -> Result<String, csv::Error> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for r in records {
        writer.serialize(r)?;
    }
    let bytes = writer.into_inner().expect("vec writer cannot fail");
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Parse records back from [`csv_report`] output.
pub fn parse_csv(text: &str) -> Result<Vec<BenchRecord>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect()
}
