mod checks;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hpexp::asymptotics::{compare, ErrorRow, Regime, Target};
use hpexp::curves::{ArcLabel, CurveTrace, Geometry, TraceParams};
use hpexp::exact::{residue_polynomials, solve_hp_system, HPTriple, Normalization};
use hpexp::potentials::{self, Measure};
use hpexp::surface::{self, Cut, Sheet};
use hpexp::zeros::{empirical_vs_limit, entire_zeros_in_box, polynomial_zeros, Rect, ZeroSet};
use hpexp::Complex64 as C;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use checks::{CheckName, CheckSettings};
use output::{emit, float, json_bytes, Format, Table};

#[derive(Parser)]
#[command(name = "hpexp", version, about = "Exports exact polynomials, curves, measures, potentials, zeros and asymptotic errors")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Working precision of multiprecision evaluations.
    #[arg(long, global = true, default_value_t = 192, value_parser = clap::value_parser!(u32).range(64..))]
    precision_bits: u32,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Bound on identity residuals in `check identities`.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Modulus at which unbounded arcs are truncated.
    #[arg(long, global = true, default_value_t = 50.0)]
    radius: f64,
    /// Seed for sampled check points.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Monic {
    P,
    Q,
    R,
}

#[derive(Subcommand)]
enum Command {
    /// Exact coefficients of the scaled diagonal triple, or of a triple with given indices.
    Polys {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        /// Indices n1,n2,n3; the variable is still scaled by 3n.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        indices: Option<Vec<usize>>,
        /// Polynomial made monic when --indices is given.
        #[arg(long, value_enum, default_value_t = Monic::Q)]
        monic: Monic,
    },
    /// Traced arcs with accumulated phase, plus the y* row when gammaPstar is requested.
    Curves {
        #[arg(long, value_delimiter = ',')]
        arcs: Option<Vec<String>>,
    },
    /// Line densities of the limit measures along their carriers, and total masses.
    Measures {
        /// Keep every k-th node.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        stride: u64,
    },
    /// g, φ and g_E on a grid.
    Potentials {
        #[arg(long = "box", default_value = "-2,2,-2,2", allow_hyphen_values = true)]
        rect: String,
        /// Grid points per side.
        #[arg(long, default_value_t = 41, value_parser = clap::value_parser!(u64).range(2..))]
        grid: u64,
    },
    /// Zeros of P_n, Q_n, R_n, or of E_n inside a box.
    Zeros {
        #[arg(long)]
        target: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        /// Search box x0,x1,y0,y1 (E only).
        #[arg(long = "box", allow_hyphen_values = true)]
        rect: Option<String>,
    },
    /// Relative errors of an asymptotic formula against the exact values.
    Asym {
        #[arg(long)]
        target: String,
        #[arg(long, default_value = "strong")]
        regime: String,
        #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u64).range(1..))]
        n: Vec<u64>,
        /// Evaluation point re,im; repeatable.
        #[arg(long = "z", required = true, allow_hyphen_values = true)]
        points: Vec<String>,
    },
    /// Runs one named check; exits 1 with a JSON failure report if it fails.
    Check {
        #[arg(value_enum)]
        which: CheckName,
        /// Sample points per region for `identities`.
        #[arg(long, default_value_t = 100)]
        per_region: usize,
    },
    /// Geometry summary and every check, as one JSON document.
    Report {
        #[arg(long, default_value_t = 100)]
        per_region: usize,
    },
}

struct Ctx {
    bits: usize,
    out: Option<PathBuf>,
    format: Option<Format>,
    params: TraceParams,
}

impl Ctx {
    fn geometry(&self) -> anyhow::Result<Geometry> {
        Geometry::build(&self.params).context("building the curve geometry")
    }

    fn meta(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("precision_bits".into(), json!(self.bits));
        m
    }

    fn write_table(&self, table: &Table, default: Format, meta: Map<String, Value>) -> anyhow::Result<()> {
        let mut all = self.meta();
        all.extend(meta);
        emit(self.out.as_deref(), &table.render(self.format.unwrap_or(default), all)?)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let params = TraceParams { truncation_radius: cli.run.radius, ..TraceParams::default() };
    let ctx = Ctx { bits: cli.run.precision_bits as usize, out: cli.run.out.clone(), format: cli.run.format, params };
    match run(&ctx, &cli.run, cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

/// `Ok(false)` means a check failed.
fn run(ctx: &Ctx, args: &RunArgs, command: Command) -> anyhow::Result<bool> {
    match command {
        Command::Polys { n, indices, monic } => polys(ctx, n as usize, indices, monic)?,
        Command::Curves { arcs } => curves(ctx, arcs)?,
        Command::Measures { stride } => measures(ctx, stride as usize)?,
        Command::Potentials { rect, grid } => potentials_grid(ctx, &rect, grid as usize)?,
        Command::Zeros { target, n, rect } => zeros(ctx, &target, n as usize, rect)?,
        Command::Asym { target, regime, n, points } => asym(ctx, &target, &regime, &n, &points)?,
        Command::Check { which, per_region } => return check(ctx, args, &[which], per_region),
        Command::Report { per_region } => return check(ctx, args, &CheckName::ALL, per_region),
    }
    Ok(true)
}

fn polys(ctx: &Ctx, n: usize, indices: Option<Vec<usize>>, monic: Monic) -> anyhow::Result<()> {
    let scale = 3 * n as u64;
    let triple: HPTriple = match indices {
        None => residue_polynomials(n)?,
        Some(idx) => {
            let [n1, n2, n3] = idx[..] else { bail!("--indices takes three values, got {}", idx.len()) };
            let norm = match monic {
                Monic::P => Normalization::PMonicScaled,
                Monic::Q => Normalization::QMonicScaled,
                Monic::R => Normalization::RMonicScaled,
            };
            solve_hp_system(n1, n2, n3, norm, scale)?
        }
    };
    match ctx.format.unwrap_or(Format::Json) {
        Format::Json => emit(ctx.out.as_deref(), &json_bytes(&triple.to_json())?),
        Format::Csv => {
            let mut table = Table::new(&["poly", "k", "coeff"]);
            for (name, p) in [("p", &triple.p), ("q", &triple.q), ("r", &triple.r)] {
                for (k, c) in p.to_strings().into_iter().enumerate() {
                    table.push([name.to_string(), k.to_string(), c]);
                }
            }
            emit(ctx.out.as_deref(), &table.to_csv()?)
        }
    }
}

const CURVE_HEADER: [&str; 6] = ["label", "t", "re_z", "im_z", "re_phi", "im_phi"];

fn curves(ctx: &Ctx, arcs: Option<Vec<String>>) -> anyhow::Result<()> {
    let labels: Vec<ArcLabel> = match arcs {
        None => ArcLabel::TRACED.into_iter().chain([ArcLabel::GammaQSegment]).collect(),
        Some(names) => names.iter().map(|s| ArcLabel::parse(s)).collect::<Result<_, _>>()?,
    };
    let geom = ctx.geometry()?;
    let mut table = Table::new(&CURVE_HEADER);
    for &label in &labels {
        for rec in geom.arc(label).csv_records() {
            table.push(rec);
        }
    }
    let mut meta = Map::new();
    if labels.contains(&ArcLabel::GammaPStar) {
        // y* is where Γ_P* meets the positive imaginary axis; φ_P is taken there.
        let z = C::new(0.0, geom.ystar);
        let phi = potentials::phi(&geom, z, Sheet::P)?.value;
        table.push(["ystar".to_string(), float(0.0), float(0.0), float(geom.ystar), float(phi.re), float(phi.im)]);
        meta.insert("ystar".into(), json!(float(geom.ystar)));
    }
    ctx.write_table(&table, Format::Csv, meta)
}

fn carriers(geom: &Geometry) -> Vec<(&'static str, &CurveTrace)> {
    let mut out = vec![("P", geom.arc(ArcLabel::GammaP))];
    out.extend(geom.gamma_q.pieces().into_iter().map(|p| ("Q", p)));
    out.push(("R", geom.arc(ArcLabel::GammaR)));
    for l in [ArcLabel::GammaE1, ArcLabel::GammaE2, ArcLabel::GammaE3, ArcLabel::GammaE4] {
        out.push(("E", geom.arc(l)));
    }
    out
}

fn measures(ctx: &Ctx, stride: usize) -> anyhow::Result<()> {
    let geom = ctx.geometry()?;
    let mut table = Table::new(&["measure", "label", "t", "re_s", "im_s", "line_density"]);
    for (measure, arc) in carriers(&geom) {
        let label = arc.label.context("carrier without a label")?;
        // A Γ_Q piece is a sub-arc; the density is evaluated on the full arc it came from.
        let rows: Vec<anyhow::Result<[String; 6]>> = arc
            .nodes
            .par_iter()
            .step_by(stride)
            .map(|node| {
                let s = potentials::mu_density(&geom, node.z, label)?;
                Ok([measure.to_string(), label.name().to_string(), float(node.t), float(node.z.re), float(node.z.im), float(s.line_density().re)])
            })
            .collect();
        for row in rows {
            table.push(row?);
        }
    }
    let mut masses = Map::new();
    for (name, m) in [("P", Measure::P), ("Q", Measure::Q), ("R", Measure::R)] {
        masses.insert(name.into(), json!(float(potentials::mu_total_mass(&geom, m)?.value)));
    }
    masses.insert("gammaPstar".into(), json!(float(potentials::star_mass(&geom, Cut::P)?.value)));
    masses.insert("gammaRstar".into(), json!(float(potentials::star_mass(&geom, Cut::R)?.value)));
    masses.insert("E_truncated".into(), json!(float(potentials::mu_e_truncated_mass(&geom)?.value)));
    let mut meta = Map::new();
    meta.insert("masses".into(), Value::Object(masses));
    ctx.write_table(&table, Format::Csv, meta)
}

fn potentials_grid(ctx: &Ctx, rect: &str, grid: usize) -> anyhow::Result<()> {
    let rect = Rect::parse(rect)?;
    let geom = ctx.geometry()?;
    let columns = [
        "re_z", "im_z", "region", "re_gP", "im_gP", "re_gQ", "im_gQ", "re_gR", "im_gR", "re_phiP", "im_phiP", "re_phiR", "im_phiR", "re_gE", "im_gE",
    ];
    let points: Vec<C> = (0..grid)
        .flat_map(|j| (0..grid).map(move |i| (i, j)))
        .map(|(i, j)| {
            let fx = i as f64 / (grid - 1) as f64;
            let fy = j as f64 / (grid - 1) as f64;
            C::new(rect.x0 + fx * (rect.x1 - rect.x0), rect.y0 + fy * (rect.y1 - rect.y0))
        })
        .collect();
    let rows: Vec<Vec<String>> = points
        .par_iter()
        .map(|&z| {
            let region = geom.classify(z).region().map_or("curve".to_string(), |r| format!("{r:?}"));
            let pair = |v: Option<C>| v.map_or([String::new(), String::new()], |v| [float(v.re), float(v.im)]);
            let mut row = vec![float(z.re), float(z.im), region];
            for s in [Sheet::P, Sheet::Q, Sheet::R] {
                row.extend(pair(potentials::g(&geom, z, s).ok().map(|p| p.value)));
            }
            for s in [Sheet::P, Sheet::R] {
                row.extend(pair(potentials::phi(&geom, z, s).ok().map(|p| p.value)));
            }
            row.extend(pair(potentials::g_e(&geom, z).ok()));
            row
        })
        .collect();
    let mut table = Table::new(&columns);
    for r in rows {
        table.push(r);
    }
    ctx.write_table(&table, Format::Csv, Map::new())
}

fn zeros(ctx: &Ctx, target: &str, n: usize, rect: Option<String>) -> anyhow::Result<()> {
    let target = Target::parse(target)?;
    let set: ZeroSet = match target {
        Target::E => {
            let rect = Rect::parse(rect.as_deref().unwrap_or("-2,2,-2,2"))?;
            entire_zeros_in_box(n, rect, ctx.bits)?
        }
        Target::P | Target::Q | Target::R => {
            if rect.is_some() {
                bail!("--box applies to the E target only");
            }
            polynomial_zeros(n, target, ctx.bits)?
        }
        Target::Xn => bail!("Xn has no zero set"),
    };
    let mut table = Table::new(&ZeroSet::CSV_HEADER);
    for rec in set.csv_records() {
        table.push(rec);
    }
    let mut meta = Map::new();
    meta.insert("target".into(), json!(target.name()));
    meta.insert("n".into(), json!(n));
    if ctx.format == Some(Format::Json) {
        let geom = ctx.geometry()?;
        let bounds = if target == Target::E { rect.as_deref().map(Rect::parse).transpose()?.or(Some(Rect::parse("-2,2,-2,2")?)) } else { None };
        meta.insert("limit_comparison".into(), serde_json::to_value(empirical_vs_limit(&set, &geom, bounds)?)?);
    }
    ctx.write_table(&table, Format::Csv, meta)
}

fn parse_point(s: &str) -> anyhow::Result<C> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [re, im] = parts[..] else { bail!("point {s:?} is not re,im") };
    Ok(C::new(re.parse().with_context(|| format!("bad real part in {s:?}"))?, im.parse().with_context(|| format!("bad imaginary part in {s:?}"))?))
}

fn asym(ctx: &Ctx, target: &str, regime: &str, ns: &[u64], points: &[String]) -> anyhow::Result<()> {
    let target = Target::parse(target)?;
    let regime = Regime::parse(regime)?;
    let points: Vec<C> = points.iter().map(|p| parse_point(p)).collect::<anyhow::Result<_>>()?;
    let geom = ctx.geometry()?;
    let jobs: Vec<(C, usize)> = points.iter().flat_map(|&z| ns.iter().map(move |&n| (z, n as usize))).collect();
    let rows: Vec<Result<ErrorRow, hpexp::Error>> = jobs.par_iter().map(|&(z, n)| compare(&geom, z, n, target, regime, ctx.bits)).collect();
    let mut table = Table::new(&ErrorRow::HEADER);
    for row in rows {
        table.push(row?.record());
    }
    ctx.write_table(&table, Format::Csv, Map::new())
}

fn check(ctx: &Ctx, args: &RunArgs, which: &[CheckName], per_region: usize) -> anyhow::Result<bool> {
    let geom = ctx.geometry()?;
    let settings = CheckSettings { precision_bits: ctx.bits, tolerance: args.tol, per_region, seed: args.seed };
    let reports: Vec<_> = which.iter().map(|&c| checks::run(c, &geom, &settings)).collect();
    let passed = reports.iter().all(|r| r.passed());
    let doc = if let [single] = &reports[..] {
        single.to_json()
    } else {
        let z = surface::branch_points().z;
        let gp = geom.arc(ArcLabel::GammaP);
        let e1 = geom.arc(ArcLabel::GammaE1);
        let far = if e1.first().norm() > e1.last().norm() { e1.first() } else { e1.last() };
        json!({
            "passed": passed,
            "precision_bits": ctx.bits,
            "geometry": {
                "ystar": geom.ystar,
                "gammaP_start_gap": (gp.first() - z[0]).norm(),
                "gammaP_end_gap": (gp.last() - z[1]).norm(),
                "gammaE1_far_point": [far.re, far.im],
            },
            "checks": reports.iter().map(|r| json!({ "check": r.name, "passed": r.passed(), "failures": r.failures })).collect::<Vec<_>>(),
        })
    };
    emit(ctx.out.as_deref(), &json_bytes(&doc)?)?;
    Ok(passed)
}
