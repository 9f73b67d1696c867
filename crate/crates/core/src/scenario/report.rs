use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::optimizer::LinkStatus;

use super::run::{all_detector_links, ScenarioResult};
use super::ScenarioError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Text,
    Both,
}

impl ReportFormat {
    fn csv(self) -> bool {
        matches!(self, Self::Csv | Self::Both)
    }

    fn text(self) -> bool {
        matches!(self, Self::Text | Self::Both)
    }
}

fn full(v: f64) -> String {
    format!("{v:.16e}")
}

fn status_name(s: LinkStatus) -> &'static str {
    match s {
        LinkStatus::Feasible => "feasible",
        LinkStatus::BelowThreshold => "below_threshold",
        LinkStatus::Unallocated => "unallocated",
    }
}

/// Human-readable summary of a sweep.
pub fn render_text(result: &ScenarioResult) -> String {
    let spec = &result.spec;
    let cfg = spec.ga_config();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "scenario {}  seed {}  runs per K {}  F_min {}  tau {:e} s",
        spec.name, result.seed, cfg.independent_runs, spec.f_min, spec.tau
    );
    match result.f_inf() {
        Some(f) => {
            let _ = writeln!(s, "ideal fitness f_inf = {f:.6}");
        }
        None => {
            let _ = writeln!(
                s,
                "ideal fitness f_inf undefined: some link cannot reach F_min"
            );
        }
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:>6} {:>12} {:>10} {:>8} {:>14} {:>6}",
        "K", "fitness", "deviation", "reserve", "mu_tot", "gens"
    );
    for k in &result.per_k {
        let dev = k
            .deviation_pct
            .map_or_else(|| "n/a".to_string(), |d| format!("{d:.2}%"));
        let champ = k.champion();
        let _ = writeln!(
            s,
            "{:>6} {:>12.6} {:>10} {:>8} {:>14.6e} {:>6}",
            k.channels,
            k.fitness(),
            dev,
            k.reserve,
            champ.allocation.mu_tot,
            champ.generations()
        );
    }

    let _ = writeln!(s);
    let _ = writeln!(s, "channel counts");
    let _ = write!(s, "{:>6}", "K");
    for l in &spec.links {
        let _ = write!(s, " {:>6}", l.name);
    }
    let _ = writeln!(s, " {:>7}", "reserve");
    for k in &result.per_k {
        let _ = write!(s, "{:>6}", k.channels);
        for c in &k.counts {
            let _ = write!(s, " {c:>6}");
        }
        let _ = writeln!(s, " {:>7}", k.reserve);
    }

    for k in &result.per_k {
        let _ = writeln!(s);
        let _ = writeln!(s, "operating points at K = {}", k.channels);
        let _ = writeln!(
            s,
            "{:>6} {:>9} {:>12} {:>9} {:>9} {:>9}",
            "link", "channels", "x", "F", "R/R_max", "beta"
        );
        for (entry, p) in spec.links.iter().zip(&k.points) {
            let fid = p
                .fidelity
                .map_or_else(|| "-".to_string(), |f| format!("{f:.4}"));
            let _ = writeln!(
                s,
                "{:>6} {:>9} {:>12.6e} {:>9} {:>9.4} {:>9.4}",
                entry.name, p.channels, p.x, fid, p.ebr_normalized, p.beta
            );
        }
    }

    let _ = writeln!(s);
    let warnings: Vec<_> = result
        .per_k
        .iter()
        .flat_map(|k| k.warnings().map(move |w| (k.channels, w)))
        .collect();
    if warnings.is_empty() {
        let _ = writeln!(s, "validity: all click probabilities below threshold");
    } else {
        let _ = writeln!(s, "validity warnings");
        for (k, w) in warnings {
            let _ = writeln!(
                s,
                "  K={k} user {} click probability {:.4} >= {}",
                w.label, w.click_probability, w.threshold
            );
        }
    }
    if !all_detector_links(spec) {
        let _ = writeln!(
            s,
            "note: links given by noise parameters are checked with unit detector efficiency (upper bound)"
        );
    }
    s
}

fn base_name(result: &ScenarioResult) -> String {
    let ks: Vec<String> = result.spec.k_list.iter().map(|k| k.to_string()).collect();
    format!("{}_K{}_seed{}", result.spec.name, ks.join("-"), result.seed)
}

/// One row per channel count.
pub fn write_summary_csv<W: Write>(out: W, result: &ScenarioResult) -> Result<(), ScenarioError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scenario",
        "seed",
        "channels",
        "fitness",
        "f_inf",
        "deviation_pct",
        "mu_tot",
        "reserve",
        "generations",
        "champion_run",
        "warnings",
    ])?;
    let f_inf = result.f_inf().map(full).unwrap_or_default();
    for k in &result.per_k {
        let champ = k.champion();
        w.write_record([
            result.spec.name.clone(),
            result.seed.to_string(),
            k.channels.to_string(),
            full(k.fitness()),
            f_inf.clone(),
            k.deviation_pct.map(full).unwrap_or_default(),
            full(champ.allocation.mu_tot),
            k.reserve.to_string(),
            champ.generations().to_string(),
            k.champion.to_string(),
            k.warnings().count().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per (channel count, link), plus the click-probability checks.
pub fn write_links_csv<W: Write>(out: W, result: &ScenarioResult) -> Result<(), ScenarioError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scenario",
        "seed",
        "channels",
        "link",
        "count",
        "x",
        "fidelity",
        "ebr_normalized",
        "beta",
        "status",
        "click_prob_a",
        "click_prob_b",
    ])?;
    for k in &result.per_k {
        let report = &k.champion().report;
        let mut checks = k.validity.iter();
        for (l, (entry, p)) in result.spec.links.iter().zip(&k.points).enumerate() {
            let (pa, pb) = if p.channels > 0 {
                let a = checks
                    .next()
                    .map(|c| full(c.click_probability))
                    .unwrap_or_default();
                let b = checks
                    .next()
                    .map(|c| full(c.click_probability))
                    .unwrap_or_default();
                (a, b)
            } else {
                (String::new(), String::new())
            };
            w.write_record([
                result.spec.name.clone(),
                result.seed.to_string(),
                k.channels.to_string(),
                entry.name.clone(),
                p.channels.to_string(),
                full(p.x),
                p.fidelity.map(full).unwrap_or_default(),
                full(p.ebr_normalized),
                full(p.beta),
                status_name(report.status[l]).to_string(),
                pa,
                pb,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Per-generation best and mean fitness of every run.
pub fn write_trace_csv<W: Write>(out: W, result: &ScenarioResult) -> Result<(), ScenarioError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scenario",
        "seed",
        "channels",
        "run",
        "generation",
        "best",
        "mean",
    ])?;
    for k in &result.per_k {
        for run in &k.runs {
            for g in &run.trace {
                w.write_record([
                    result.spec.name.clone(),
                    result.seed.to_string(),
                    k.channels.to_string(),
                    run.stream.to_string(),
                    g.generation.to_string(),
                    full(g.best),
                    full(g.mean),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, ScenarioError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))
}

/// Writes the report files into `dir` and returns their paths.
pub fn emit_report(
    result: &ScenarioResult,
    dir: &Path,
    format: ReportFormat,
) -> Result<Vec<PathBuf>, ScenarioError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| ScenarioError::Io(format!("{}: {e}", dir.display())))?;
    let base = base_name(result);
    let mut written = Vec::new();
    if format.text() {
        let path = dir.join(format!("{base}_report.txt"));
        let mut f = create(&path)?;
        f.write_all(render_text(result).as_bytes())?;
        f.flush()?;
        written.push(path);
    }
    if format.csv() {
        type Writer = fn(BufWriter<File>, &ScenarioResult) -> Result<(), ScenarioError>;
        let parts: [(&str, Writer); 3] = [
            ("summary", write_summary_csv),
            ("links", write_links_csv),
            ("trace", write_trace_csv),
        ];
        for (suffix, write) in parts {
            let path = dir.join(format!("{base}_{suffix}.csv"));
            write(create(&path)?, result)?;
            written.push(path);
        }
    }
    Ok(written)
}
