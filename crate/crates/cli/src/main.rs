//! `cmlab`: norms, symbol checks, paraproducts, Carleson checks and the
//! ratio harness from the command line. Fields are read and written as
//! `{"n", "N", "L", "values": [[re, im], …]}` documents.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use cmlab_core::carleson::{
    bmo_carleson, carleson_embedding_ratio, carleson_norm, weighted_band_carleson, TentFunction,
};
use cmlab_core::harness::acceptance::run_all;
use cmlab_core::harness::{
    FamilyKind, FamilyParams, Harness, HarnessConfig, Inequality, RatioReport, ReportFormat, TestFamily, DRIFT_LIMIT,
    SWEEP, SWEEP_TRIALS,
};
use cmlab_core::multipliers::{cm_constant, scaling_law_check, BilinearSymbol, LPFamily};
use cmlab_core::paraproducts::{pi, pi1, pi2, product_decompose, ParaproductConfig, ParaproductSpec};
use cmlab_core::spaces::{
    bmo_norm, h1_norm, jw_norm, lp_norm, refined_sobolev_norm, triebel_norm, xw_norm, TargetSpace, BMO_norm, H1_norm,
};
use cmlab_core::tgrid::TimeGrid;
use cmlab_core::weights::{RegularizedWeight, WeightSpec};
use cmlab_core::{Grid, SampledField};

#[derive(Parser)]
#[command(name = "cmlab", version, about = "Paraproducts, Coifman-Meyer multipliers and log-weighted norms on periodic grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Norm of a field, printed as {"norm": value}.
    Norm {
        /// lp:P | h1 | H1 | bmo | BMO | xw | jw:<lp:P|H1|BMO> | fpw:P | hphi:B
        #[arg(long)]
        space: String,
        /// Weight as JSON ({"kind":"log","b":1}), a JSON file, or const | log:B | loglog:B1,B2.
        #[arg(long, default_value = "log:1")]
        weight: String,
        #[arg(long = "in")]
        input: PathBuf,
        /// Scale-grid points per octave.
        #[arg(long, default_value_t = 8)]
        q: u32,
    },
    /// Per-level Coifman-Meyer constants of a builtin symbol.
    SymbolCheck {
        #[arg(long)]
        symbol: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Highest derivative order; defaults to 4n+1.
        #[arg(long)]
        order: Option<usize>,
        /// Also run the scaling-law test over an extended frequency range.
        #[arg(long)]
        scaling_law: bool,
    },
    /// Apply a paraproduct or a piece of the product decomposition.
    Paraproduct {
        /// JSON {"q": 8, "m": "one" | "alternating"}; defaults apply without it.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long, value_enum)]
        out: Operation,
        /// Write the field here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Carleson constants with the cube attaining them, as {constant, witness}.
    Carleson {
        #[arg(long, value_enum)]
        check: CarlesonCheck,
        #[arg(long = "in")]
        input: PathBuf,
        /// Second field for the embedding check (defaults to the input).
        #[arg(long)]
        with: Option<PathBuf>,
        #[arg(long, default_value = "log:1")]
        weight: String,
        /// Embedding exponent.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 8)]
        q: u32,
        /// Seed of the random probes of the weighted check.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sample a member of a test family.
    Sample {
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "N", default_value_t = 256)]
        points: usize,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Ratio sweeps of inequality ids, or the full acceptance suite.
    Verify {
        /// Inequality id such as T4.3i:p=4/3, KP:s=6 or P6.3.
        #[arg(long, required_unless_present = "all", conflicts_with = "all")]
        id: Option<String>,
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = SWEEP_TRIALS)]
        trials: usize,
        #[arg(long = "N", value_delimiter = ',', default_values_t = SWEEP)]
        resolutions: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Operation {
    Pi,
    Pi1,
    Pi2,
    ProductB1,
    ProductB2,
}

#[derive(Clone, Copy, ValueEnum)]
enum CarlesonCheck {
    Bmo,
    Weighted,
    Embedding,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn read_field(path: &Path) -> Result<SampledField> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    SampledField::from_json(&text).with_context(|| format!("parsing field {}", path.display()))
}

fn write_or_print(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn parse_number(text: &str) -> Result<f64> {
    let value = match text.split_once('/') {
        Some((a, b)) => a.trim().parse::<f64>()? / b.trim().parse::<f64>()?,
        None => text.trim().parse::<f64>()?,
    };
    if !value.is_finite() {
        bail!("not a finite number: {text}");
    }
    Ok(value)
}

fn parse_weight(text: &str) -> Result<RegularizedWeight> {
    let spec = if text.trim_start().starts_with('{') {
        WeightSpec::from_json(text)?
    } else if Path::new(text).is_file() {
        WeightSpec::from_json(&fs::read_to_string(text)?)?
    } else {
        match text.split_once(':') {
            None if text == "const" => WeightSpec::Const,
            Some(("log", b)) => WeightSpec::Log { b: parse_number(b)? },
            Some(("loglog", bs)) => {
                let (b1, b2) = bs.split_once(',').ok_or_else(|| anyhow!("loglog needs B1,B2"))?;
                WeightSpec::Loglog { b1: parse_number(b1)?, b2: parse_number(b2)? }
            }
            _ => bail!("unrecognized weight {text:?}"),
        }
    };
    Ok(RegularizedWeight::from_spec(spec)?)
}

fn exponent(text: &str) -> Result<f64> {
    let p = parse_number(text)?;
    if p < 1.0 {
        bail!("exponent must be at least 1, got {p}");
    }
    Ok(p)
}

fn target_space(text: &str, tg: TimeGrid) -> Result<TargetSpace> {
    Ok(match text.split_once(':') {
        Some(("lp", p)) => TargetSpace::Lp(exponent(p)?),
        None if text == "H1" => TargetSpace::Hardy(tg),
        None if text == "BMO" => TargetSpace::Bmo,
        _ => bail!("unrecognized target space {text:?} (lp:P, H1 or BMO)"),
    })
}

fn norm(space: &str, weight: &str, input: &Path, q: u32) -> Result<f64> {
    let f = read_field(input)?;
    let tg = TimeGrid::for_grid(f.grid(), q);
    let (name, arg) = match space.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (space, None),
    };
    let value = match (name, arg) {
        ("lp", Some(p)) => lp_norm(&f, exponent(p)?),
        ("h1", None) => h1_norm(&f, &tg),
        ("H1", None) => H1_norm(&f, &tg),
        ("bmo", None) => bmo_norm(&f),
        ("BMO", None) => BMO_norm(&f),
        ("xw", None) => xw_norm(&f, &parse_weight(weight)?, &LPFamily::new(), &tg),
        ("jw", Some(inner)) => jw_norm(&f, &parse_weight(weight)?, &target_space(inner, tg)?),
        ("fpw", Some(p)) => triebel_norm(&f, &parse_weight(weight)?, exponent(p)?),
        ("hphi", Some(b)) => refined_sobolev_norm(&f, parse_number(b)?),
        _ => bail!("unrecognized space {space:?}"),
    };
    Ok(value)
}

fn paraproduct(spec: Option<&Path>, f: &Path, g: &Path, op: Operation) -> Result<SampledField> {
    let config: ParaproductConfig = match spec {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => ParaproductConfig::default(),
    };
    let (f, g) = (read_field(f)?, read_field(g)?);
    if f.grid() != g.grid() {
        bail!("f and g live on different grids");
    }
    let spec = ParaproductSpec::for_grid(f.grid(), config);
    Ok(match op {
        Operation::Pi => pi(&spec, &f, &g),
        Operation::Pi1 => pi1(&spec, &f, &g),
        Operation::Pi2 => pi2(&spec, &f, &g),
        Operation::ProductB1 => product_decompose(&spec, &f, &g).0,
        Operation::ProductB2 => product_decompose(&spec, &f, &g).1,
    })
}

struct CarlesonArgs<'a> {
    check: CarlesonCheck,
    input: &'a Path,
    with: Option<&'a Path>,
    weight: &'a str,
    p: f64,
    q: u32,
    seed: u64,
}

fn carleson(a: CarlesonArgs<'_>) -> Result<serde_json::Value> {
    let f = read_field(a.input)?;
    let tg = TimeGrid::for_grid(f.grid(), a.q);
    let fam = LPFamily::new();
    Ok(match a.check {
        CarlesonCheck::Bmo => {
            let c = bmo_carleson(&f, &fam, &tg).map_err(|_| anyhow!("input is constant: its BMO norm vanishes"))?;
            json!({"check": "bmo", "constant": c.norm, "witness": c.witness})
        }
        CarlesonCheck::Weighted => {
            let r = weighted_band_carleson(&f, &parse_weight(a.weight)?, &fam, &tg, a.seed);
            json!({
                "check": "weighted",
                "constant": r.carleson_ratio,
                "witness": r.witness,
                "quadratic_const": r.quadratic_const,
                "annihilates_constants": r.annihilates_constants,
            })
        }
        CarlesonCheck::Embedding => {
            if !(1.0..=4.0).contains(&a.p) {
                bail!("embedding exponent must lie in [1, 4], got {}", a.p);
            }
            let g = match a.with {
                Some(path) => read_field(path)?,
                None => f.clone(),
            };
            if f.grid() != g.grid() {
                bail!("fields live on different grids");
            }
            // F = |P_t f|, G = |Q⁽¹⁾_t g|
            let big_f = TentFunction::from_band(&f, tg, |s| fam.phi(s));
            let big_g = TentFunction::from_band(&g, tg, |s| fam.psi1(s));
            let ratio = carleson_embedding_ratio(&big_f, &big_g, a.p).map_err(|_| anyhow!("degenerate inputs"))?;
            json!({"check": "embedding", "p": a.p, "constant": ratio, "witness": carleson_norm(&big_g).witness})
        }
    })
}

fn family(name: &str) -> Result<FamilyKind> {
    FamilyKind::from_name(name).ok_or_else(|| {
        let known: Vec<&str> = FamilyKind::ALL.iter().map(|k| k.name()).collect();
        anyhow!("unknown family {name:?}; known: {}", known.join(", "))
    })
}

fn load_config(path: Option<&Path>) -> Result<HarnessConfig> {
    match path {
        Some(p) => Ok(HarnessConfig::from_json(&fs::read_to_string(p)?)?),
        None => Ok(HarnessConfig::default()),
    }
}

fn summarize(report: &RatioReport) {
    for r in &report.per_resolution {
        eprintln!(
            "{} N={}: max {:.6} median {:.6} ({} trials, {} skipped)",
            report.id, r.n, r.max, r.median, r.trials, r.skipped
        );
    }
    let drifts: Vec<String> = report.drifts().iter().map(|d| format!("{d:+.4}")).collect();
    eprintln!(
        "{}: drifts [{}] {}",
        report.id,
        drifts.join(", "),
        if report.is_stable(DRIFT_LIMIT) { "stable" } else { "UNSTABLE" }
    );
}

/// One report as an object, several as an array; CSV shares one header.
fn render(reports: &[RatioReport], format: Format) -> String {
    match format {
        Format::Json if reports.len() == 1 => reports[0].to_json(),
        Format::Json => serde_json::to_string_pretty(reports).expect("reports serialize"),
        Format::Csv => {
            let mut out = String::new();
            for (i, r) in reports.iter().enumerate() {
                let text = String::from_utf8(r.emit(ReportFormat::Csv)).expect("ascii csv");
                let body = if i == 0 { text.as_str() } else { text.split_once('\n').map_or("", |x| x.1) };
                out.push_str(body);
            }
            out
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Norm { space, weight, input, q } => {
            println!("{}", json!({"norm": norm(&space, &weight, &input, q)?}));
        }
        Command::SymbolCheck { symbol, n, order, scaling_law } => {
            if n != 1 && n != 2 {
                bail!("--n must be 1 or 2");
            }
            let sigma = BilinearSymbol::builtin(&symbol)?;
            let order = order.unwrap_or(4 * n + 1);
            let mut doc = serde_json::to_value(cm_constant(&sigma, n, order)?)?;
            if scaling_law {
                let (is_cm, _, extended) = scaling_law_check(&sigma, n, order)?;
                doc["scaling_law"] = json!({"coifman_meyer": is_cm, "extended_levels": extended.levels});
            }
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Command::Paraproduct { spec, f, g, out, output } => {
            let field = paraproduct(spec.as_deref(), &f, &g, out)?;
            write_or_print(output.as_deref(), &field.to_json())?;
        }
        Command::Carleson { check, input, with, weight, p, q, seed } => {
            let doc = carleson(CarlesonArgs { check, input: &input, with: with.as_deref(), weight: &weight, p, q, seed })?;
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Command::Sample { family: name, seed, points, n, output } => {
            let grid = Grid::new(n, points, cmlab_core::grid::DEFAULT_SIDE)?;
            let field = TestFamily::new(family(&name)?, seed).generate(&grid, &FamilyParams::default());
            write_or_print(output.as_deref(), &field.to_json())?;
        }
        Command::Verify { id, all, trials, resolutions, seed, out, config, format } => {
            let harness = Harness::new(load_config(config.as_deref())?)?;
            if all {
                let outcomes = run_all(&harness, seed, |o| {
                    println!("{}", o.headline());
                    for line in &o.checks {
                        println!("    {line}");
                    }
                });
                if let Some(path) = out {
                    fs::write(&path, serde_json::to_string_pretty(&outcomes)?)?;
                }
                let failed = outcomes.iter().filter(|o| !o.passed).count();
                return Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE });
            }
            let id = id.expect("clap requires --id without --all");
            let mut reports = Vec::new();
            for ineq in Inequality::expand(&id)? {
                log::info!("sweeping {ineq} over N = {resolutions:?}");
                let report = harness.resolution_sweep(&ineq, &resolutions, trials, seed)?;
                summarize(&report);
                reports.push(report);
            }
            write_or_print(out.as_deref(), &render(&reports, format))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
