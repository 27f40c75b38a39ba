//! `stab`: membership checks, canonical forms, pole placement and region maps
//! for static feedback gains.

mod examples;
mod system_file;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde_json::json;
use stab_core::canonical::brunovsky;
use stab_core::poly::StabilityClass;
use stab_core::regions::{gen_instance, sample_region_with, InstanceId, SampleOptions};
use stab_core::stability::{membership, pole_place};
use stab_core::{Error, RealMatrix, Result, Spectrum};

use system_file::{load_gain, SystemFile};

#[derive(Parser)]
#[command(name = "stab", version, about = "Stabilizing static feedback gains of LTI systems")]
struct Cli {
    /// Evaluate region cells on all cores; output is identical.
    #[arg(long, global = true)]
    parallel: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a gain; exit 0 stable, 2 marginal, 3 unstable.
    Check {
        system: PathBuf,
        #[arg(long)]
        gain: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Brunovsky decomposition of (A, B).
    Brunovsky {
        system: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// State-feedback gain placing the closed-loop spectrum.
    Place {
        system: PathBuf,
        /// Comma-separated targets such as "-1,-2+1i,-2-1i".
        #[arg(long, allow_hyphen_values = true)]
        poles: String,
        #[arg(long)]
        json: bool,
    },
    /// Grid map of the stabilizing set over the file's gain subspace.
    Region {
        system: PathBuf,
        /// Per-parameter ranges, "lo:hi[,lo:hi...]".
        #[arg(long = "box", allow_hyphen_values = true)]
        bounds: String,
        /// Cells per axis, one value for all axes or one per axis.
        #[arg(long)]
        res: String,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run the reproduction checks of a named instance; exit 4 if any fails.
    PaperExample {
        id: String,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Write a named instance as a system file.
    Instance {
        id: String,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
        /// Append the extra odd-dimension state to block instances.
        #[arg(long)]
        odd: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Check { system, gain, json } => check(&system, &gain, json),
        Command::Brunovsky { system, json } => brunovsky_cmd(&system, json),
        Command::Place { system, poles, json } => place(&system, &poles, json),
        Command::Region { system, bounds, res, csv, json, svg } => {
            region(&system, &bounds, &res, cli.parallel, [csv, json, svg])
        }
        Command::PaperExample { id, a, k, json } => paper_example(&id, a, k, cli.parallel, json),
        Command::Instance { id, a, k, odd, out } => instance(&id, a, k, odd, out.as_deref()),
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?);
    Ok(())
}

fn format_matrix(m: &RealMatrix) -> String {
    (0..m.rows())
        .map(|i| {
            let row: Vec<String> = m.row(i).iter().map(|x| format!("{x:>12.6}")).collect();
            format!("  [{}]", row.join(" "))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn check(system: &Path, gain: &Path, json: bool) -> Result<u8> {
    let sys = SystemFile::load(system)?.system()?;
    let k = load_gain(gain)?;
    let m = membership(&sys, &k)?;
    if json {
        print_json(&json!({
            "set_kind": m.set_kind,
            "verdict": m.verdict.class,
            "margin": m.verdict.margin,
            "spectrum": m.spectrum,
        }))?;
    } else {
        println!("set: {}", m.set_kind);
        println!("verdict: {}", m.verdict.class);
        println!("margin: {:e}", m.verdict.margin);
        println!("spectrum: {}", m.spectrum);
    }
    Ok(match m.verdict.class {
        StabilityClass::Stable => 0,
        StabilityClass::Marginal => 2,
        StabilityClass::Unstable => 3,
    })
}

fn brunovsky_cmd(system: &Path, json: bool) -> Result<u8> {
    let sys = SystemFile::load(system)?.system()?;
    let bf = brunovsky(&sys)?;
    let (res_a, res_b) = bf.residuals(&sys);
    if json {
        print_json(&json!({
            "indices": bf.indices,
            "input_rank": bf.input_rank(),
            "T": bf.t,
            "V": bf.v,
            "F": bf.f,
            "residual_A": res_a,
            "residual_B": res_b,
            "warning": bf.warning,
        }))?;
    } else {
        println!("indices: {:?}", bf.indices);
        println!("input rank: {}", bf.input_rank());
        println!("T:\n{}", format_matrix(&bf.t));
        println!("V:\n{}", format_matrix(&bf.v));
        println!("F:\n{}", format_matrix(&bf.f));
        println!("residuals: A {res_a:.3e}, B {res_b:.3e}");
        if let Some(w) = &bf.warning {
            println!("warning: {w}");
        }
    }
    Ok(0)
}

fn parse_poles(text: &str) -> Result<Spectrum> {
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| Complex64::from_str(s).map_err(|e| Error::Parse(format!("pole '{s}': {e}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Spectrum::new(values))
}

fn place(system: &Path, poles: &str, json: bool) -> Result<u8> {
    let sys = SystemFile::load(system)?.system()?;
    let targets = parse_poles(poles)?;
    let k = pole_place(&sys, &targets)?;
    let achieved = stab_core::linalg::eigenvalues(&(&sys.a - &(&sys.b * &k)))?;
    let distance = achieved.matching_distance(&targets);
    if json {
        print_json(&json!({ "K": k, "spectrum": achieved, "max_error": distance }))?;
    } else {
        println!("K:\n{}", format_matrix(&k));
        println!("spectrum: {achieved}");
        println!("max error: {distance:.3e}");
    }
    Ok(0)
}

fn parse_box(text: &str) -> Result<Vec<(f64, f64)>> {
    text.split(',')
        .map(|side| {
            let (lo, hi) = side
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("box side '{side}' is not lo:hi")))?;
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("box bound '{s}': {e}")));
            Ok((parse(lo)?, parse(hi)?))
        })
        .collect()
}

fn parse_res(text: &str, d: usize) -> Result<Vec<usize>> {
    let values = text
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|e| Error::Parse(format!("resolution '{s}': {e}"))))
        .collect::<Result<Vec<_>>>()?;
    match values.len() {
        1 => Ok(vec![values[0]; d]),
        n if n == d => Ok(values),
        n => Err(Error::Parse(format!("{n} resolutions for {d} parameters"))),
    }
}

fn region(system: &Path, bounds: &str, res: &str, parallel: bool, outputs: [Option<PathBuf>; 3]) -> Result<u8> {
    let file = SystemFile::load(system)?;
    let sub = file
        .subspace
        .clone()
        .ok_or_else(|| Error::Precondition(format!("{} has no subspace", system.display())))?;
    let bounds = parse_box(bounds)?;
    let resolution = parse_res(res, bounds.len())?;
    let [csv, json, svg] = outputs;
    if svg.is_some() && sub.dim() > 2 {
        return Err(Error::Dimensionality(sub.dim()));
    }
    let report = sample_region_with(&file.system()?, &sub, &bounds, &resolution, SampleOptions { parallel, refine: true })?;
    if let Some(path) = csv {
        report.write_csv(&path)?;
    }
    if let Some(path) = json {
        report.write_json(&path)?;
    }
    if let Some(path) = svg {
        report.write_svg(&path, &file.ticks)?;
    }
    println!("components: {}", report.component_count);
    for (i, b) in report.component_boxes.iter().enumerate() {
        let sides: Vec<String> = b.iter().map(|(lo, hi)| format!("[{lo:.6}, {hi:.6}]")).collect();
        println!("  {i}: {}", sides.join(" x "));
    }
    println!(
        "cells: {} stable, {} marginal, {} unstable",
        report.count(StabilityClass::Stable),
        report.count(StabilityClass::Marginal),
        report.count(StabilityClass::Unstable)
    );
    Ok(0)
}

fn paper_example(id: &str, a: Option<f64>, k: Option<usize>, parallel: bool, json: bool) -> Result<u8> {
    let id = InstanceId::from_name(id, a, k)?;
    let report = examples::run(&id, parallel)?;
    if json {
        print_json(&report)?;
    } else {
        println!("{}", report.instance);
        for c in &report.checks {
            println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        for n in &report.notes {
            println!("note: {n}");
        }
        let passed = report.checks.iter().filter(|c| c.passed).count();
        println!("{passed}/{} checks passed", report.checks.len());
    }
    Ok(if report.all_passed() { 0 } else { 4 })
}

fn instance(id: &str, a: Option<f64>, k: Option<usize>, odd: bool, out: Option<&Path>) -> Result<u8> {
    let mut id = InstanceId::from_name(id, a, k)?;
    match &mut id {
        InstanceId::Hurwitz2kBlocks { odd: o, .. } | InstanceId::Schur2kBlocks { odd: o, .. } => *o = odd,
        _ => {}
    }
    let file = SystemFile::from_instance(&gen_instance(&id)?);
    let text = serde_json::to_string_pretty(&file).map_err(|e| Error::Parse(e.to_string()))?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(0)
}
