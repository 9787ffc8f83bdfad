//! Command-line surface: experiment subcommands, deterministic CSV output,
//! optional SVG plots, and the invariant-suite runner.

use clap::{Args, Parser, Subcommand};
use kobound::config::ExperimentConfig;
use kobound::density::{density_bracket, reference_density, ReferenceModel};
use kobound::error::Error;
use kobound::geom::{build_fermi_strip, parallel_curve, Vec2};
use kobound::growth::{fit_exponent, reference_curves, Strategy};
use kobound::lattice::halving_experiment;
use kobound::report::{fmt_sig, growth_svg, strip_svg, Csv, StripPicture};
use kobound::select::select_u0;
use kobound::strip_analysis::{lemma_constants, lp_strip_integral, voronoi_assign};
use kobound::verify::{run_all, Effort};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "kobound",
    version,
    about = "Certified Kobayashi-length growth experiments on punctured circle domains"
)]
struct Cli {
    /// Configuration file (JSON); the embedded default is used when absent
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output CSV path (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Write a self-contained SVG plot to this path
    #[arg(long, global = true)]
    svg: Option<PathBuf>,

    /// Worker threads (defaults to the rayon heuristic)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Override the experiment seeds
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate density brackets on a grid
    Density(DensityArgs),
    /// L^p strip integrals against the certified bound
    #[command(name = "lp-integral")]
    LpIntegral,
    /// Select the puncture-avoiding parallel curve for one configuration
    #[command(name = "select-loop")]
    SelectLoop(SelectArgs),
    /// The growth experiment across the s sweep
    Growth(GrowthArgs),
    /// Displacement-bounded lattice counts under both schedules
    #[command(name = "lattice-count")]
    LatticeCount,
    /// Run the full invariant suite
    Verify(VerifyArgs),
}

#[derive(Args)]
struct DensityArgs {
    /// Per-axis grid resolution override
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args)]
struct SelectArgs {
    /// Puncture count
    #[arg(long, default_value_t = 20)]
    s: usize,
    /// Placement strategy
    #[arg(long, default_value = "on_strip_random")]
    strategy: String,
}

#[derive(Args)]
struct GrowthArgs {
    /// Restrict to one strategy
    #[arg(long)]
    strategy: Option<String>,
    /// s sweep override: `a..b` takes the powers of two in [a, b]
    #[arg(long)]
    s: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run the acceptance-scale suite instead of the quick one
    #[arg(long)]
    full: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    };
    ExitCode::from(code)
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_) => 2,
        Error::BudgetExceeded { .. } => 3,
        _ => 1,
    }
}

fn run(cli: Cli) -> kobound::Result<u8> {
    let config_text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)?,
        None => kobound::config::DEFAULT_CONFIG_JSON.to_string(),
    };
    let mut cfg = ExperimentConfig::from_json(&config_text)?;
    if let Some(seed) = cli.seed {
        cfg.growth.seeds = vec![seed];
        cfg.lp.seed = seed;
    }

    let pool = {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cli.threads {
            builder = builder.num_threads(n);
        }
        builder
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
    };

    pool.install(|| dispatch(&cli, &cfg))
}

fn dispatch(cli: &Cli, cfg: &ExperimentConfig) -> kobound::Result<u8> {
    match &cli.command {
        Command::Density(args) => density_cmd(cli, cfg, args),
        Command::LpIntegral => lp_cmd(cli, cfg),
        Command::SelectLoop(args) => select_cmd(cli, cfg, args),
        Command::Growth(args) => growth_cmd(cli, cfg, args),
        Command::LatticeCount => lattice_cmd(cli, cfg),
        Command::Verify(args) => verify_cmd(cli, cfg, args),
    }
}

fn provenance(csv: &mut Csv, cfg: &ExperimentConfig) {
    csv.comment(&format!(
        "kobound {} schema {}",
        env!("CARGO_PKG_VERSION"),
        kobound::config::SCHEMA_VERSION
    ));
    let compact = serde_json::to_string(cfg).expect("config serializes");
    csv.comment(&format!("config {compact}"));
}

fn emit(cli: &Cli, text: String) -> kobound::Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Matches the configured domain against the closed-form reference models.
fn detect_reference(cfg: &ExperimentConfig, punctures: &[Vec2]) -> Option<ReferenceModel> {
    let d = &cfg.domain;
    if d.outer.center != [0.0, 0.0] {
        return None;
    }
    match (d.inner.len(), punctures.len()) {
        (0, 0) => Some(ReferenceModel::Disk {
            radius: d.outer.radius,
        }),
        (0, 1) if punctures[0] == Vec2::ZERO => Some(ReferenceModel::PuncturedDisk {
            radius: d.outer.radius,
        }),
        (1, 0) if d.inner[0].center == [0.0, 0.0] && d.outer.radius == 1.0 => {
            Some(ReferenceModel::Annulus {
                inner: d.inner[0].radius,
            })
        }
        _ => None,
    }
}

fn density_cmd(cli: &Cli, cfg: &ExperimentConfig, args: &DensityArgs) -> kobound::Result<u8> {
    let domain = cfg.build_domain()?;
    let punctures: Vec<Vec2> = cfg
        .density
        .punctures
        .iter()
        .map(|p| Vec2::new(p[0], p[1]))
        .collect();
    let set = kobound::geom::PunctureSet::new(&domain, punctures.clone())?;
    let model = detect_reference(cfg, &punctures);
    let n = args.grid.unwrap_or(cfg.density.grid);
    let outer = domain.outer();
    let mut csv = Csv::new();
    provenance(&mut csv, cfg);
    csv.header(&["x", "y", "lower", "upper", "reference"]);
    for i in 0..n {
        for j in 0..n {
            let x =
                outer.center.x - outer.radius + 2.0 * outer.radius * (i as f64 + 0.5) / n as f64;
            let y =
                outer.center.y - outer.radius + 2.0 * outer.radius * (j as f64 + 0.5) / n as f64;
            let z = Vec2::new(x, y);
            if !domain.contains(z) || set.min_dist(z) < 1e-12 {
                continue;
            }
            let b = density_bracket(&domain, &set, z)?;
            let reference = model
                .and_then(|m| reference_density(m, z).ok())
                .map(fmt_sig)
                .unwrap_or_default();
            csv.row(&[
                fmt_sig(x),
                fmt_sig(y),
                fmt_sig(b.lower),
                fmt_sig(b.upper),
                reference,
            ]);
        }
    }
    emit(cli, csv.finish())?;
    Ok(0)
}

fn lp_cmd(cli: &Cli, cfg: &ExperimentConfig) -> kobound::Result<u8> {
    let domain = cfg.build_domain()?;
    let lp = cfg.build_loop()?;
    let strip = build_fermi_strip(&domain, &lp, cfg.strip.delta, cfg.strip.n_tau, cfg.strip.n_u)?;
    let consts = lemma_constants(&domain, &strip);
    let mut csv = Csv::new();
    provenance(&mut csv, cfg);
    csv.comment(&format!(
        "rows grouped by strategy in config order: {}",
        cfg.lp
            .strategies
            .iter()
            .map(|s| s.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    ));
    csv.header(&["s", "p", "integral", "A", "bound", "satisfied"]);
    let mut all_satisfied = true;
    for &strategy in &cfg.lp.strategies {
        for &s in &cfg.lp.s_values {
            let punctures = kobound::growth::place_punctures(
                &domain,
                &strip,
                strategy,
                s,
                cfg.lp.seed,
                cfg.growth.max_s,
            )?;
            for &p in &cfg.lp.p_values {
                let integral = lp_strip_integral(&domain, &strip, &punctures, p)?;
                let bound = consts.a * (s as f64 + 1.0) / (2.0 - p);
                let satisfied = integral <= bound;
                all_satisfied &= satisfied;
                csv.row(&[
                    s.to_string(),
                    fmt_sig(p),
                    fmt_sig(integral),
                    fmt_sig(consts.a),
                    fmt_sig(bound),
                    satisfied.to_string(),
                ]);
            }
        }
    }
    emit(cli, csv.finish())?;
    Ok(if all_satisfied { 0 } else { 1 })
}

fn select_cmd(cli: &Cli, cfg: &ExperimentConfig, args: &SelectArgs) -> kobound::Result<u8> {
    let strategy = Strategy::parse(&args.strategy)?;
    let domain = cfg.build_domain()?;
    let lp = cfg.build_loop()?;
    let strip = build_fermi_strip(&domain, &lp, cfg.strip.delta, cfg.strip.n_tau, cfg.strip.n_u)?;
    let seed = cfg.lp.seed;
    let punctures = kobound::growth::place_punctures(
        &domain,
        &strip,
        strategy,
        args.s,
        seed,
        cfg.growth.max_s,
    )?;
    let p = kobound::select::p_schedule(args.s);
    let sel = select_u0(&domain, &strip, &punctures, p, cfg.select.n_u_grid)?;
    let mut csv = Csv::new();
    provenance(&mut csv, cfg);
    csv.header(&[
        "s",
        "strategy",
        "seed",
        "p",
        "u0",
        "g_at_u0",
        "m_threshold",
        "holder_bound",
        "measured_upper_length",
        "clearance",
        "winding",
    ]);
    csv.row(&[
        args.s.to_string(),
        strategy.as_str().to_string(),
        seed.to_string(),
        fmt_sig(sel.p),
        fmt_sig(sel.u0),
        fmt_sig(sel.g_at_u0),
        fmt_sig(sel.m_threshold),
        fmt_sig(sel.holder_bound),
        fmt_sig(sel.measured_upper_length),
        fmt_sig(sel.clearance),
        sel.winding
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>()
            .join(";"),
    ]);
    if let Some(svg_path) = &cli.svg {
        let assignment = voronoi_assign(&strip, &punctures);
        let mut nodes = Vec::new();
        for i in 0..strip.n_tau() {
            for j in 0..strip.n_u() {
                nodes.push((
                    strip.node(i, j).pos,
                    assignment.cell_index[i * strip.n_u() + j],
                ));
            }
        }
        let edge = |u: f64| -> Vec<Vec2> {
            (0..=256)
                .map(|k| strip.offset_point(std::f64::consts::TAU * k as f64 / 256.0, u))
                .collect()
        };
        let selected = parallel_curve(&strip, sel.u0)?;
        let picture = StripPicture {
            outer: (domain.outer().center, domain.outer().radius),
            inner: domain
                .inner()
                .iter()
                .map(|d| (d.center, d.radius))
                .collect(),
            strip_edges: vec![edge(strip.delta()), edge(-strip.delta())],
            selected: (0..=256)
                .map(|k| selected.point(std::f64::consts::TAU * k as f64 / 256.0))
                .collect(),
            punctures: punctures.points().to_vec(),
            nodes,
        };
        std::fs::write(svg_path, strip_svg(&picture))?;
    }
    emit(cli, csv.finish())?;
    Ok(0)
}

fn parse_s_range(text: &str) -> kobound::Result<Vec<usize>> {
    let (lo, hi) = text
        .split_once("..")
        .ok_or_else(|| Error::InvalidConfig(format!("bad s range `{text}`; expected a..b")))?;
    let lo: usize = lo
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad s range `{text}`")))?;
    let hi: usize = hi
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad s range `{text}`")))?;
    let mut out = Vec::new();
    let mut v = 1usize;
    while v <= hi {
        if v >= lo {
            out.push(v);
        }
        v *= 2;
    }
    if out.is_empty() {
        return Err(Error::InvalidConfig(format!("empty s range `{text}`")));
    }
    Ok(out)
}

fn growth_cmd(cli: &Cli, cfg: &ExperimentConfig, args: &GrowthArgs) -> kobound::Result<u8> {
    let mut cfg = cfg.clone();
    if let Some(strategy) = &args.strategy {
        cfg.growth.strategies = vec![Strategy::parse(strategy)?];
    }
    if let Some(range) = &args.s {
        cfg.growth.s_values = parse_s_range(range)?;
    }
    let records = kobound::verify::growth_records(&cfg)?;
    let mut csv = Csv::new();
    provenance(&mut csv, &cfg);
    csv.header(&[
        "s",
        "strategy",
        "seed",
        "p_used",
        "u0",
        "upper_estimate",
        "holder_bound",
        "ref_upper",
        "ref_lower",
        "upper_over_sqrt_s",
    ]);
    for r in &records {
        let (upper_ref, lower_ref) = reference_curves(r.s);
        csv.row(&[
            r.s.to_string(),
            r.strategy.as_str().to_string(),
            r.seed.to_string(),
            fmt_sig(r.p_used),
            fmt_sig(r.u0),
            fmt_sig(r.upper_estimate),
            fmt_sig(r.holder_bound),
            fmt_sig(upper_ref),
            fmt_sig(lower_ref),
            fmt_sig(r.upper_estimate / (r.s as f64).max(1.0).sqrt()),
        ]);
    }
    for &strategy in &cfg.growth.strategies {
        let pts: Vec<(f64, f64)> = records
            .iter()
            .filter(|r| r.strategy == strategy)
            .map(|r| (r.s as f64, r.upper_estimate))
            .collect();
        if let Ok((slope, intercept, r2)) = fit_exponent(&pts) {
            csv.comment(&format!(
                "fit strategy={} slope={} intercept={} r2={}",
                strategy.as_str(),
                fmt_sig(slope),
                fmt_sig(intercept),
                fmt_sig(r2)
            ));
        }
    }
    if let Some(svg_path) = cli.svg.as_ref().filter(|_| !records.is_empty()) {
        let pts: Vec<(f64, f64)> = records
            .iter()
            .map(|r| (r.s as f64, r.upper_estimate))
            .collect();
        // anchor the reference curves at the median data ratio
        let mut ratios: Vec<f64> = records
            .iter()
            .map(|r| r.upper_estimate / reference_curves(r.s).0)
            .collect();
        ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let anchor = ratios[ratios.len() / 2];
        let upper: Vec<(f64, f64)> = records
            .iter()
            .map(|r| (r.s as f64, anchor * reference_curves(r.s).0))
            .collect();
        let lower: Vec<(f64, f64)> = records
            .iter()
            .map(|r| (r.s as f64, anchor * reference_curves(r.s).1))
            .collect();
        std::fs::write(svg_path, growth_svg(&pts, &upper, &lower))?;
    }
    emit(cli, csv.finish())?;
    Ok(0)
}

fn lattice_cmd(cli: &Cli, cfg: &ExperimentConfig) -> kobound::Result<u8> {
    let lattices = cfg.build_lattices()?;
    let rows = halving_experiment(
        &lattices,
        &cfg.lattice.s_values,
        cfg.lattice.c,
        cfg.lattice.c0,
        cfg.lattice.h_budget,
    )?;
    let mut csv = Csv::new();
    provenance(&mut csv, cfg);
    csv.header(&["s", "h_linear", "n_linear", "h_sublinear", "n_sublinear"]);
    for r in &rows {
        csv.row(&[
            r.s.to_string(),
            fmt_sig(r.h_linear),
            r.n_total_linear.to_string(),
            fmt_sig(r.h_sublinear),
            r.n_total_sublinear.to_string(),
        ]);
    }
    let lin: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.s as f64, r.n_total_linear as f64))
        .collect();
    let sub: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.s as f64, r.n_total_sublinear as f64))
        .collect();
    if let (Ok((ml, _, _)), Ok((ms, _, _))) = (fit_exponent(&lin), fit_exponent(&sub)) {
        csv.comment(&format!(
            "fit linear_slope={} sublinear_slope={}",
            fmt_sig(ml),
            fmt_sig(ms)
        ));
    }
    emit(cli, csv.finish())?;
    Ok(0)
}

fn verify_cmd(cli: &Cli, cfg: &ExperimentConfig, args: &VerifyArgs) -> kobound::Result<u8> {
    let effort = if args.full { Effort::Full } else { Effort::Quick };
    let checks = run_all(cfg, effort);
    let mut csv = Csv::new();
    provenance(&mut csv, cfg);
    csv.header(&["name", "passed", "detail"]);
    let mut failures = 0usize;
    for c in &checks {
        println!(
            "{} {} - {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
        if !c.passed {
            failures += 1;
        }
        csv.row(&[
            c.name.to_string(),
            c.passed.to_string(),
            format!("\"{}\"", c.detail.replace('"', "'")),
        ]);
    }
    if let Some(path) = &cli.out {
        std::fs::write(path, csv.finish())?;
    }
    println!("{} checks, {} failed", checks.len(), failures);
    Ok(if failures == 0 { 0 } else { 1 })
}
