mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use chaoskit::detectors::{
    classify_point_with, default_refseq, detect_minimality, detect_multidim_tuple, detect_sensitivity, detect_transitivity,
    devaney_check, furstenberg_filter_check, pair_relation, set_hits, stable_set_probe, test_sets, PairRelationKind, PointKind,
    TransitivityKind,
};
use chaoskit::golden::run_golden;
use chaoskit::open_set::{parse_pattern, OpenSet};
use chaoskit::scrambled::{build_scrambled_family, proximal_cell_density, verify_family};
use chaoskit::sets::TimeWindow;
use chaoskit::{build_system, CatalogEntry, Certificate, DynamicalSystem, ElementKind, Point, Verdict};
use clap::{Parser, Subcommand};

use config::{Format, RunConfig};

#[derive(Parser)]
#[command(name = "chaoskit", version, about = "Windowed chaos detectors for semigroup actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one detector and write its certificate
    Analyze(RunConfig),
    /// Replay the golden suite of worked examples
    VerifyExamples {
        /// A group (e.g. example-1.1) or a single check id
        #[arg(long)]
        only: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for per-check certificates and the report
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a scrambled family on the binary shift and verify it
    Scrambled {
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value = "forward")]
        refseq: String,
        #[arg(long = "L", default_value_t = 512)]
        length: usize,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Certificate path
        #[arg(long)]
        out: Option<PathBuf>,
        /// Family JSON path
        #[arg(long)]
        family_out: Option<PathBuf>,
    },
    /// Print the hitting set N(U, V) inside a window
    Hitting {
        #[arg(long)]
        system: String,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        length: Option<usize>,
        /// Pattern like `[01?]` on the shift, `center,radius` elsewhere
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        window: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Density of Li-Yorke partners of a point over grid cells
    Density(RunConfig),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze(cfg) => analyze(cfg.resolve()?),
        Command::VerifyExamples { only, seed, out } => verify_examples(only.as_deref(), seed, out.as_deref()),
        Command::Scrambled { k, depth, refseq, length, horizon, seed, out, family_out } => {
            let system = build_system(CatalogEntry::FullShift { alphabet: 2, length })?;
            let cfg = RunConfig { refseq: Some(refseq), horizon, seed: Some(seed), ..Default::default() };
            let res = cfg.resolution(&system)?;
            let f = cfg.refseq(&system, &res)?;
            let fam = build_scrambled_family(k, depth, &f, length)?;
            if let Some(p) = family_out {
                write_atomic(&p, &serde_json::to_string_pretty(&fam)?)?;
            }
            let cert = verify_family(&system, &fam, &res)?;
            emit(cert, out.as_deref(), Format::Json)
        }
        Command::Hitting { system, alpha, length, u, v, window, out } => {
            let entry = config::parse_system(&system, alpha, length)?;
            let sys = build_system(entry)?;
            let w = match window {
                Some(w) if w.len() == 2 => TimeWindow::new(w[0], w[1])?,
                Some(_) => bail!("--window expects `lo,hi`"),
                None => chaoskit::detectors::Resolution::for_system(&sys).time_window,
            };
            let (su, sv) = (parse_set(&sys, &u)?, parse_set(&sys, &v)?);
            let hits = set_hits(&sys, &su, &sv, w)?;
            let verdict = if hits.is_empty() { Verdict::Refuted } else { Verdict::Verified };
            let cert = Certificate::new(sys.name(), "hitting_set", verdict)
                .param("u", su.to_string())
                .param("v", sv.to_string())
                .param("window", [w.lo, w.hi])
                .param("hits", &hits.members);
            emit(cert, out.as_deref(), Format::Json)
        }
        Command::Density(cfg) => {
            let cfg = cfg.resolve()?;
            let sys = cfg.system()?;
            let res = cfg.resolution(&sys)?;
            let x = point(&sys, cfg.x.as_deref(), "--x")?;
            let f = cfg.refseq(&sys, &res)?;
            let cert = proximal_cell_density(&sys, &x, &f, &res)?;
            emit(cert, cfg.out.as_deref(), cfg.format.unwrap_or_default())
        }
    }
}

fn point(sys: &DynamicalSystem, s: Option<&str>, flag: &str) -> Result<Point> {
    let s = s.with_context(|| format!("{flag} is required for this property"))?;
    Ok(sys.space().parse_point(s)?)
}

fn parse_set(sys: &DynamicalSystem, s: &str) -> Result<OpenSet> {
    if let CatalogEntry::FullShift { .. } = sys.entry() {
        return Ok(OpenSet::Pattern(parse_pattern(s)?));
    }
    let t = s.trim().trim_start_matches("B(").trim_end_matches(')');
    let (c, r) = t.rsplit_once(',').context("open sets are `center,radius`")?;
    let r: f64 = r.trim().parse().context("invalid radius")?;
    Ok(OpenSet::ball(sys.space().parse_point(c)?, r))
}

fn transitivity_kind(p: &str) -> Option<TransitivityKind> {
    Some(match p {
        "transitivity" | "topological-transitivity" => TransitivityKind::Topological,
        "point-transitivity" => TransitivityKind::Point,
        "syndetic" | "syndetic-transitivity" => TransitivityKind::Syndetic,
        "thick" | "thick-transitivity" => TransitivityKind::Thick,
        "ip" | "ip-transitivity" => TransitivityKind::Ip,
        "weak-mixing" => TransitivityKind::WeakMixing,
        "strong-mixing" => TransitivityKind::StrongMixing,
        _ => return None,
    })
}

fn pair_kind(p: &str) -> Option<PairRelationKind> {
    Some(match p {
        "proximal" => PairRelationKind::Proximal,
        "separated" => PairRelationKind::Separated,
        "li-yorke" | "li-yorke-pair" => PairRelationKind::LiYorke,
        "asymptotic" => PairRelationKind::Asymptotic,
        _ => return None,
    })
}

fn point_kind(p: &str) -> Option<PointKind> {
    Some(match p {
        "periodic" => PointKind::Periodic,
        "almost-periodic" => PointKind::AlmostPeriodic,
        "recurrent" => PointKind::Recurrent,
        "transitive-point" => PointKind::TransitivePoint,
        _ => return None,
    })
}

fn analyze(cfg: RunConfig) -> Result<u8> {
    let sys = cfg.system()?;
    let res = cfg.resolution(&sys)?;
    let prop = cfg.property.as_deref().context("--property is required")?;
    let cert = if prop == "sensitivity" {
        detect_sensitivity(&sys, &res)?
    } else if prop == "minimality" {
        detect_minimality(&sys, &res)?
    } else if prop == "devaney" {
        devaney_check(&sys, &res)?
    } else if let Some(k) = transitivity_kind(prop) {
        detect_transitivity(&sys, k, &res)?
    } else if let Some(k) = point_kind(prop) {
        let x = point(&sys, cfg.x.as_deref(), "--x")?;
        let f = match (k, sys.element_kind()) {
            (PointKind::Recurrent, kind) if kind != ElementKind::CircleExact => Some(match cfg.refseq {
                Some(_) => cfg.refseq(&sys, &res)?,
                None => default_refseq(&sys)?,
            }),
            _ => None,
        };
        classify_point_with(&sys, &x, k, f.as_ref(), &res)?
    } else if let Some(k) = pair_kind(prop) {
        let x = point(&sys, cfg.x.as_deref(), "--x")?;
        let y = point(&sys, cfg.y.as_deref(), "--y")?;
        pair_relation(&sys, &x, &y, k, &cfg.refseq(&sys, &res)?, &res)?
    } else if prop == "multidim" {
        let raw = cfg.points.as_deref().context("--points is required for multidim")?;
        let pts = raw.split(';').map(|p| Ok(sys.space().parse_point(p)?)).collect::<Result<Vec<_>>>()?;
        detect_multidim_tuple(&sys, &pts, &cfg.refseq(&sys, &res)?, &res)?
    } else if prop == "stable-set" {
        let x = point(&sys, cfg.x.as_deref(), "--x")?;
        let eps = cfg.eps.context("--eps is required for stable-set")?;
        let f = cfg.f.as_ref().context("--f is required for stable-set")?;
        stable_set_probe(&sys, &x, eps, TimeWindow::new(f[0], f[1])?, &res)?
    } else if prop == "filter" {
        // pairs over the first few test sets keep the quadratic sweep small
        let sets: Vec<OpenSet> = test_sets(&sys, &res)?.into_iter().take(8).collect();
        let pairs: Vec<(OpenSet, OpenSet)> =
            sets.iter().flat_map(|u| sets.iter().map(move |v| (u.clone(), v.clone()))).collect();
        furstenberg_filter_check(&sys, &pairs, res.time_window)?
    } else {
        bail!("unknown property `{prop}`");
    };
    emit(cert, cfg.out.as_deref(), cfg.format.unwrap_or_default())
}

fn stamp(mut cert: Certificate) -> Certificate {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    cert.meta.timestamp = Some(secs.to_string());
    cert
}

fn emit(cert: Certificate, out: Option<&Path>, format: Format) -> Result<u8> {
    let cert = stamp(cert);
    let body = match format {
        Format::Json => cert.to_json(),
        Format::Csv => cert.to_csv(),
    };
    match out {
        Some(p) => {
            write_atomic(p, &body)?;
            println!("{}: {} ({})", cert.property, cert.verdict, p.display());
        }
        None => println!("{body}"),
    }
    Ok(cert.verdict.exit_code() as u8)
}

/// Writes through a sibling temp file and renames it into place.
fn write_atomic(path: &Path, body: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().context("output path has no file name")?.to_string_lossy();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, body).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

fn verify_examples(only: Option<&str>, seed: u64, out: Option<&Path>) -> Result<u8> {
    let outcomes = run_golden(only, seed)?;
    println!("{:<40} {:<13} {:<13} {:<5} digest", "check", "expected", "actual", "pass");
    for o in &outcomes {
        println!(
            "{:<40} {:<13} {:<13} {:<5} {}",
            o.id,
            o.expected.to_string(),
            o.actual.to_string(),
            if o.passed { "yes" } else { "NO" },
            o.digest
        );
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!("{passed}/{} golden checks match", outcomes.len());
    if let Some(dir) = out {
        for o in &outcomes {
            if let Some(c) = &o.certificate {
                let file = dir.join(format!("{}.json", o.id.replace('/', "__")));
                write_atomic(&file, &stamp(c.clone()).to_json())?;
            }
        }
        write_atomic(&dir.join("report.json"), &serde_json::to_string_pretty(&outcomes)?)?;
    }
    Ok(if passed == outcomes.len() { 0 } else { 1 })
}
