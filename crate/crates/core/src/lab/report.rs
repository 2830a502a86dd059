use super::config::ExperimentConfig;
use super::run::{num, run_experiment, AssertionOutcome, ProfileArtifact, RunArtifacts, Table};
use crate::error::{Error, Result};
use crate::fields::io;
use crate::regularity::ZERO_FLOOR;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Format {
    Csv,
    Json,
    Svg,
    /// The solved field in the binary container.
    Field,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            "field" => Ok(Format::Field),
            other => Err(Error::ConfigInvalid(format!(
                "unknown format `{other}` (expected csv, json, svg or field)"
            ))),
        }
    }
}

/// Parse a comma-separated format list such as `csv,json,svg`.
pub fn parse_formats(list: &str) -> Result<BTreeSet<Format>> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

pub fn default_formats() -> BTreeSet<Format> {
    [Format::Csv, Format::Json, Format::Svg].into_iter().collect()
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub status: &'static str,
    pub exit_code: i32,
    pub passed: bool,
    pub assertions: Vec<AssertionOutcome>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    experiment: Option<&'a str>,
    seed: Option<u64>,
    config: Option<&'a ExperimentConfig>,
    timings_seconds: &'a BTreeMap<String, f64>,
    files: Vec<String>,
    summary: &'a Summary,
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::IoFailure(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn to_json(v: &impl Serialize) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::IoFailure(e.to_string()))
}

pub fn table_csv(t: &Table) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.columns).expect("in-memory write");
    for row in &t.rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

pub fn profile_csv(p: &ProfileArtifact) -> String {
    let mut out = String::from("k,radius,osc,sup_abs,campanato,c_k\n");
    for l in &p.profile.levels {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            l.k,
            num(l.radius),
            num(l.osc),
            num(l.sup_abs),
            num(l.campanato),
            num(l.best_constant)
        );
    }
    out
}

/// Log-log plot of one profile with the fitted line and its exponent.
pub fn profile_svg(p: &ProfileArtifact) -> String {
    const W: f64 = 520.0;
    const H: f64 = 380.0;
    const L: f64 = 70.0;
    const R: f64 = 20.0;
    const T: f64 = 30.0;
    const B: f64 = 50.0;
    let pts: Vec<(f64, f64)> = p
        .profile
        .levels
        .iter()
        .map(|l| (l.radius, p.quantity.of(l)))
        .filter(|&(r, v)| r > 0.0 && v >= ZERO_FLOOR)
        .map(|(r, v)| (r.log10(), v.log10()))
        .collect();
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    let label = format!("{:?}", p.quantity).to_lowercase();
    if pts.is_empty() {
        let _ = writeln!(svg, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">no nonzero levels</text>", W / 2.0, H / 2.0);
        svg.push_str("</svg>\n");
        return svg;
    }
    let fit_line = p.fit.as_ref().map(|f| {
        let lo = p.profile.spec.radius(f.window.1).log10();
        let hi = p.profile.spec.radius(f.window.0).log10();
        let y = |x: f64| (f.log_constant + f.exponent * x * std::f64::consts::LN_10) / std::f64::consts::LN_10;
        ((lo, y(lo)), (hi, y(hi)), f.exponent, f.r_squared)
    });
    let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let mut ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    if let Some((a, b, _, _)) = fit_line {
        xs.extend([a.0, b.0]);
        ys.extend([a.1, b.1]);
    }
    let span = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let pad = ((hi - lo) * 0.08).max(0.05);
        (lo - pad, hi + pad)
    };
    let (x0, x1) = span(&xs);
    let (y0, y1) = span(&ys);
    let px = |x: f64| L + (x - x0) / (x1 - x0) * (W - L - R);
    let py = |y: f64| H - B - (y - y0) / (y1 - y0) * (H - T - B);

    let _ = writeln!(
        svg,
        "<rect x=\"{L}\" y=\"{T}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        W - L - R,
        H - T - B
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{fx:.2}</text>",
            px(fx),
            H - B + 16.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{fy:.2}</text>",
            L - 6.0,
            py(fy) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">log10 radius</text>",
        L + (W - L - R) / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">log10 {label}</text>",
        T + (H - T - B) / 2.0,
        T + (H - T - B) / 2.0
    );
    let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
    let _ = writeln!(
        svg,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#888\" stroke-dasharray=\"3,3\"/>",
        path.join(" ")
    );
    for &(x, y) in &pts {
        let _ = writeln!(svg, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#1f5fa8\"/>", px(x), py(y));
    }
    if let Some((a, b, s, r2)) = fit_line {
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#c0392b\" stroke-width=\"2\"/>",
            px(a.0),
            py(a.1),
            px(b.0),
            py(b.1)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"#c0392b\">exponent = {s:.4} (R² = {r2:.4})</text>",
            L + 10.0,
            T + 18.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// The deterministic part of a run: metrics, result, fits, assertions.
pub fn result_json(art: &RunArtifacts) -> Value {
    let fits: BTreeMap<&str, _> = art.profiles.iter().map(|p| (p.name.as_str(), &p.fit)).collect();
    json!({
        "experiment": art.config.name,
        "metrics": art.metrics,
        "result": art.result,
        "fits": fits,
        "assertions": art.assertions,
        "passed": art.passed(),
    })
}

fn summary_of(art: &RunArtifacts) -> Summary {
    let passed = art.passed();
    Summary {
        status: if passed { "pass" } else { "assertion_failure" },
        exit_code: if passed { EXIT_PASS } else { EXIT_ASSERTION },
        passed,
        assertions: art.assertions.clone(),
        error: None,
    }
}

fn write_manifest(
    dir: &Path,
    config: Option<&ExperimentConfig>,
    timings: &BTreeMap<String, f64>,
    summary: &Summary,
    files: &[PathBuf],
) -> Result<PathBuf> {
    let path = dir.join("manifest.json");
    let names = files
        .iter()
        .chain(std::iter::once(&path))
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    let manifest = Manifest {
        tool: "holderlab",
        version: env!("CARGO_PKG_VERSION"),
        experiment: config.and_then(|c| c.name.as_deref()),
        seed: config.map(|c| c.seed),
        config,
        timings_seconds: timings,
        files: names,
        summary,
    };
    write_file(&path, to_json(&manifest)?.as_bytes())?;
    Ok(path)
}

/// Write the artifacts to `dir` and return every file written, manifest last.
/// Artifacts with no content produce the manifest alone.
pub fn emit_report(art: &RunArtifacts, formats: &BTreeSet<Format>, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut files = Vec::new();
    if !art.is_empty() {
        if formats.contains(&Format::Csv) {
            for t in &art.tables {
                let path = dir.join(format!("{}.csv", t.name));
                write_file(&path, table_csv(t).as_bytes())?;
                files.push(path);
            }
            for p in &art.profiles {
                let path = dir.join(format!("{}.csv", p.name));
                write_file(&path, profile_csv(p).as_bytes())?;
                files.push(path);
            }
        }
        if formats.contains(&Format::Svg) {
            for p in &art.profiles {
                let path = dir.join(format!("{}.svg", p.name));
                write_file(&path, profile_svg(p).as_bytes())?;
                files.push(path);
            }
        }
        if formats.contains(&Format::Json) {
            let path = dir.join("result.json");
            write_file(&path, to_json(&result_json(art))?.as_bytes())?;
            files.push(path);
        }
    }
    if formats.contains(&Format::Field) {
        if let Some(field) = &art.field {
            let path = dir.join("field.hldf");
            let file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
            io::write_binary(field, std::io::BufWriter::new(file))?;
            files.push(path);
        }
    }
    let manifest = write_manifest(dir, Some(&art.config), &art.timings, &summary_of(art), &files)?;
    files.push(manifest);
    Ok(files)
}

#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub summary: Summary,
    pub files: Vec<PathBuf>,
    pub artifacts: Option<RunArtifacts>,
}

/// Run, report, and classify the outcome. A manifest is written whenever the
/// output directory is usable, including when the run itself failed.
pub fn run_and_report(config: &ExperimentConfig, formats: &BTreeSet<Format>, dir: &Path) -> Result<RunOutcome> {
    match run_experiment(config) {
        Ok(art) => {
            let files = emit_report(&art, formats, dir)?;
            let summary = summary_of(&art);
            Ok(RunOutcome {
                exit_code: summary.exit_code,
                summary,
                files,
                artifacts: Some(art),
            })
        }
        Err(e) => write_failure_manifest(dir, Some(config), &e),
    }
}

/// Manifest for a run that never produced artifacts, e.g. an unreadable config.
pub fn write_failure_manifest(dir: &Path, config: Option<&ExperimentConfig>, err: &Error) -> Result<RunOutcome> {
    let exit_code = if err.is_config_error() { EXIT_CONFIG } else { EXIT_RUNTIME };
    let summary = Summary {
        status: if exit_code == EXIT_CONFIG { "config_error" } else { "runtime_error" },
        exit_code,
        passed: false,
        assertions: Vec::new(),
        error: Some(err.to_string()),
    };
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let manifest = write_manifest(dir, config, &BTreeMap::new(), &summary, &[])?;
    Ok(RunOutcome {
        exit_code,
        summary,
        files: vec![manifest],
        artifacts: None,
    })
}
