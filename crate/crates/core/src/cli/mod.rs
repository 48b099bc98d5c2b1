//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 when an analysis fails or
//! a verification finds a mismatch.

mod plot;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::cech::{
    cohomology_dims, cohomology_dims_exact, general_leaf_h1, model_file::ModelFile, spread_bs, synthetic_model,
    CechComplex, CoverSet, DEFAULT_OFFSETS, EXACT_MAX_ORDER,
};
use crate::error::Error;
use crate::expr::Expr;
use crate::flatmodel::{residual_convergence, rigidity_nullity, taylor_flatness_test, LocalFlatSection};
use crate::geometry::{builtin, builtin_names, form_residual, load_system, prequant_check, SurfaceSystem, Tolerances};
use crate::quantize::{
    analyze, default_lobe_area, insert_pairs, poincare_hopf_check, quantize, rank_dim, surgery_insert_pair, Analysis,
    AnalysisOptions, BsEntry, PoincareHopf, SurgeryOp,
};
use crate::reeb::LeafGraph;
use crate::report::round_sig;
use crate::transport::loop_holonomy;

pub use plot::action_plot;

#[derive(Debug, Parser)]
#[command(name = "hyperquant", version, about = "Quantization of integrable systems on surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Singular points, Reeb graph and action profiles.
    Analyze(SystemArgs),
    /// Truncated dimensions from the formula, checked against Čech ranks.
    Quantize {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 6)]
        jet_order: usize,
        /// Insert this many elliptic/hyperbolic pairs first.
        #[arg(long, default_value_t = 0)]
        insert: usize,
        /// Use exact rational arithmetic for the ranks where supported.
        #[arg(long)]
        exact: bool,
    },
    /// Brute-force Čech cohomology of a singular-leaf model.
    CechVerify(CechArgs),
    /// Inserts elliptic/hyperbolic pairs into a regular cylinder.
    Surgery(SurgeryArgs),
    /// Diagnostics of the local flat model at a hyperbolic point.
    FlatCheck(FlatArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct InputArgs {
    /// Name of a built-in system.
    #[arg(long)]
    builtin: Option<String>,
    /// System description file (TOML).
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SystemArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Area multiple `k` of a built-in system.
    #[arg(long)]
    k: Option<f64>,
    /// Further built-in parameters.
    #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    #[arg(long, default_value = "hyperquant-out")]
    out: PathBuf,
    /// Also write `actions.svg`.
    #[arg(long)]
    plot: bool,
    #[arg(long)]
    tol_grad: Option<f64>,
    #[arg(long)]
    tol_degen: Option<f64>,
    #[arg(long)]
    tol_form: Option<f64>,
    #[arg(long)]
    tol_prequant: Option<f64>,
    #[arg(long)]
    tol_hol: Option<f64>,
    #[arg(long)]
    tol_bs: Option<f64>,
}

#[derive(Debug, Args)]
struct CechArgs {
    /// Leaf graph name: figure-eight, triple-eight, double-lung or chain-<n>.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    builtin: Option<String>,
    /// Model file (TOML).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Highest truncation order; defaults to 5, or the order of a model file.
    #[arg(long)]
    jet_order: Option<usize>,
    /// Regular Bohr-Sommerfeld leaves of a built-in model.
    #[arg(long, default_value_t = 0, conflicts_with = "input")]
    bs: usize,
}

#[derive(Debug, Args)]
struct SurgeryArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, conflicts_with = "insert")]
    edge: Option<usize>,
    /// Edge parameter of the new singular leaf; defaults to the middle.
    #[arg(long, requires = "edge")]
    position: Option<f64>,
    /// Area of the new lobe.
    #[arg(long, requires = "edge")]
    area: Option<f64>,
    /// Number of pairs, each placed on the edge with the most area.
    #[arg(long)]
    insert: Option<usize>,
    #[arg(long, default_value_t = 6)]
    jet_order: usize,
}

#[derive(Debug, Args)]
struct FlatArgs {
    /// Transversal profile `a(h)`.
    #[arg(long, default_value = "exp(-1/h^2)")]
    function: String,
    #[arg(long, default_value_t = 10)]
    k_max: u32,
    #[arg(long, default_value_t = 0.5)]
    h0: f64,
    #[arg(long, default_value_t = 12)]
    rigidity_degree: usize,
    /// Point `x,y` of the residual study.
    #[arg(long, default_value = "0.7,0.4", value_parser = parse_point)]
    point: [f64; 2],
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("`{s}` is not KEY=VALUE"))?;
    let v = v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("`{s}` is not X,Y"))?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok([p(x)?, p(y)?])
}

enum InputSource {
    Builtin(String, BTreeMap<String, f64>),
    File(PathBuf),
}

/// Everything a pipeline run needs from the command line.
struct RunConfig {
    input: InputSource,
    tolerances: Tolerances,
    out: PathBuf,
    plot: bool,
}

enum Failure {
    Usage(String),
    Analysis(Error),
    Mismatch(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Analysis(e)
    }
}

type Outcome = Result<(), Failure>;

impl RunConfig {
    fn from_args(a: &SystemArgs) -> Result<RunConfig, Failure> {
        let input = match (&a.input.builtin, &a.input.input) {
            (Some(name), None) => {
                if !builtin_names().contains(&name.as_str()) {
                    return Err(Failure::Usage(format!(
                        "unknown builtin `{name}` (expected one of {})",
                        builtin_names().join(", ")
                    )));
                }
                let mut params: BTreeMap<String, f64> = a.params.iter().cloned().collect();
                if let Some(k) = a.k {
                    params.insert("k".into(), k);
                }
                InputSource::Builtin(name.clone(), params)
            }
            (None, Some(path)) => {
                if a.k.is_some() || !a.params.is_empty() {
                    return Err(Failure::Usage("--k and --param apply to built-in systems only".into()));
                }
                InputSource::File(path.clone())
            }
            _ => return Err(Failure::Usage("give exactly one of --builtin and --input".into())),
        };
        let mut tolerances = Tolerances::default();
        for (name, v) in [
            ("grad", a.tol_grad),
            ("degen", a.tol_degen),
            ("form", a.tol_form),
            ("prequant", a.tol_prequant),
            ("hol", a.tol_hol),
            ("bs", a.tol_bs),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(Failure::Usage(format!("--tol-{name} must be positive")));
                }
                tolerances.set(name, v);
            }
        }
        Ok(RunConfig { input, tolerances, out: a.out.clone(), plot: a.plot })
    }

    fn system(&self) -> crate::Result<SurfaceSystem> {
        match &self.input {
            InputSource::Builtin(name, params) => builtin(name, params),
            InputSource::File(path) => load_system(path),
        }
    }

    fn analysis_options(&self) -> AnalysisOptions {
        let mut opts = AnalysisOptions::default();
        opts.detect.tol = self.tolerances;
        opts
    }

    fn write(&self, name: &str, contents: &str) -> crate::Result<()> {
        let path = self.out.join(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, contents)?;
        Ok(())
    }

    fn write_plot(&self, analysis: &Analysis) -> crate::Result<()> {
        if self.plot {
            self.write("actions.svg", &action_plot(analysis))?;
        }
        Ok(())
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Analyze(a) => RunConfig::from_args(a).and_then(|c| cmd_analyze(&c)),
        Command::Quantize { system, jet_order, insert, exact } => {
            RunConfig::from_args(system).and_then(|c| cmd_quantize(&c, *jet_order, *insert, *exact))
        }
        Command::CechVerify(a) => cmd_cech_verify(a),
        Command::Surgery(a) => RunConfig::from_args(&a.system).and_then(|c| cmd_surgery(&c, a)),
        Command::FlatCheck(a) => cmd_flat_check(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("Usage: hyperquant <COMMAND> [OPTIONS]; see --help");
            1
        }
        Err(Failure::Analysis(e)) => {
            eprintln!("error: {e}");
            2
        }
        Err(Failure::Mismatch(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

#[derive(Serialize)]
struct PointRecord {
    id: usize,
    kind: &'static str,
    chart: usize,
    location: [f64; 2],
    position: [f64; 3],
    critical_value: f64,
    hessian: [[f64; 2]; 2],
}

#[derive(Serialize)]
struct Singularities {
    elliptic: usize,
    hyperbolic: usize,
    point: Vec<PointRecord>,
}

#[derive(Serialize)]
struct PrequantRecord {
    area: f64,
    integer_multiple: i64,
    ok: bool,
}

#[derive(Serialize)]
struct EdgeRecord {
    id: usize,
    t_max: f64,
    fit_residual: f64,
    monotone: bool,
    end_actions: [f64; 2],
}

#[derive(Serialize)]
struct Summary {
    system: String,
    elliptic: usize,
    hyperbolic: usize,
    poincare_hopf: PoincareHopf,
    prequant_check: Option<PrequantRecord>,
    form_residual: f64,
    form_ok: bool,
    /// Largest `|hol - 1|` over the traced regular Bohr-Sommerfeld leaves.
    bs_holonomy_defect: f64,
    bs_holonomy_ok: bool,
    bs_leaves: Vec<BsEntry>,
    singular_bs_leaves: Vec<BsEntry>,
    edge: Vec<EdgeRecord>,
}

fn singularities_toml(analysis: &Analysis) -> String {
    let mut points: Vec<PointRecord> = analysis
        .reeb
        .vertices
        .iter()
        .flat_map(|v| v.singular_points.iter())
        .map(|p| PointRecord {
            id: 0,
            kind: p.kind.as_str(),
            chart: p.chart,
            location: p.location.map(round_sig),
            position: p.position.map(round_sig),
            critical_value: round_sig(p.critical_value),
            hessian: p.hessian.map(|r| r.map(round_sig)),
        })
        .collect();
    points.sort_by(|a, b| {
        a.critical_value
            .total_cmp(&b.critical_value)
            .then(a.kind.cmp(b.kind))
            .then(a.position.partial_cmp(&b.position).unwrap_or(std::cmp::Ordering::Equal))
    });
    for (i, p) in points.iter_mut().enumerate() {
        p.id = i;
    }
    let (elliptic, hyperbolic) = analysis.singular_counts();
    toml::to_string(&Singularities { elliptic, hyperbolic, point: points }).expect("singularities serialize")
}

fn holonomy_defect(system: &SurfaceSystem, analysis: &Analysis, opts: &AnalysisOptions) -> crate::Result<f64> {
    let mut worst = 0.0f64;
    for b in analysis.regular_bs() {
        let Some(fam) = analysis.reeb.edges[b.edge_id].family.as_ref() else { continue };
        let hol = loop_holonomy(system, fam, b.t, &opts.profile.trace)?;
        let offset = analysis.profiles[b.edge_id].homology_offset;
        let phase = hol.phase + offset;
        worst = worst.max((num_complex::Complex64::from_polar(1.0, phase) - 1.0).norm());
    }
    Ok(round_sig(worst))
}

fn cmd_analyze(cfg: &RunConfig) -> Outcome {
    let system = cfg.system()?;
    let opts = cfg.analysis_options();
    let analysis = analyze(&system, &opts)?;
    let tol = cfg.tolerances;

    let prequant = system.is_compact().then(|| {
        let p = prequant_check(&system, tol.prequant_tol);
        PrequantRecord { area: round_sig(p.area), integer_multiple: p.integer_multiple, ok: p.ok }
    });
    let form = round_sig(form_residual(&system, 24));
    let defect = holonomy_defect(&system, &analysis, &opts)?;
    let (elliptic, hyperbolic) = analysis.singular_counts();
    let summary = Summary {
        system: analysis.system_name.clone(),
        elliptic,
        hyperbolic,
        poincare_hopf: poincare_hopf_check(&analysis),
        prequant_check: prequant,
        form_residual: form,
        form_ok: form < tol.form_tol,
        bs_holonomy_defect: defect,
        bs_holonomy_ok: defect < tol.hol_tol,
        bs_leaves: analysis.regular_bs().iter().map(BsEntry::of).collect(),
        singular_bs_leaves: analysis.singular_bs().iter().map(BsEntry::of).collect(),
        edge: analysis
            .profiles
            .iter()
            .enumerate()
            .map(|(id, p)| EdgeRecord {
                id,
                t_max: round_sig(p.t_max),
                fit_residual: round_sig(p.fit_residual),
                monotone: p.is_monotone(),
                end_actions: analysis.end_actions[id].map(round_sig),
            })
            .collect(),
    };

    cfg.write("singularities.toml", &singularities_toml(&analysis))?;
    cfg.write("reeb.toml", &analysis.reeb.to_toml())?;
    for (e, p) in analysis.profiles.iter().enumerate() {
        cfg.write(&format!("actions/edge-{e}.csv"), &p.to_csv())?;
    }
    cfg.write("analysis.toml", &toml::to_string(&summary).expect("summary serializes"))?;
    cfg.write_plot(&analysis)?;

    println!("system      {}", summary.system);
    println!("singular    {elliptic} elliptic, {hyperbolic} hyperbolic");
    println!("reeb        {} vertices, {} edges", analysis.reeb.vertices.len(), analysis.reeb.edges.len());
    println!("bs leaves   {} regular, {} singular", summary.bs_leaves.len(), summary.singular_bs_leaves.len());
    if let Some(p) = &summary.prequant_check {
        println!(
            "area        {} = {} * 2pi ({})",
            p.area,
            p.integer_multiple,
            if p.ok { "ok" } else { "NOT integral" }
        );
    }
    println!("written to  {}", cfg.out.display());
    Ok(())
}

fn prequantized(system: &SurfaceSystem, tol: &Tolerances) -> Outcome {
    if system.is_compact() {
        let p = prequant_check(system, tol.prequant_tol);
        if !p.ok {
            return Err(Failure::Analysis(Error::InvalidInput(format!(
                "area {} is not an integer multiple of 2 pi; the system is not prequantizable",
                p.area
            ))));
        }
    }
    Ok(())
}

/// Formula against rank for `0..=n_max`; returns the table and whether all
/// rows agree.
fn rank_table(analysis: &Analysis, n_max: usize, exact: bool) -> crate::Result<(String, bool)> {
    let report = quantize(analysis, n_max);
    let mut out = format!("{:>3} {:>9} {:>9}  match\n", "N", "formula", "rank");
    let mut all = true;
    for n in 0..=n_max {
        let formula = report.dim_at(n).expect("order in range");
        let rank = rank_dim(analysis, n, exact)?;
        all &= formula == rank;
        let _ = writeln!(out, "{n:>3} {formula:>9} {rank:>9}  {}", if formula == rank { "yes" } else { "NO" });
    }
    Ok((out, all))
}

fn cmd_quantize(cfg: &RunConfig, n_max: usize, insert: usize, exact: bool) -> Outcome {
    let system = cfg.system()?;
    prequantized(&system, &cfg.tolerances)?;
    let opts = cfg.analysis_options();
    let mut analysis = analyze(&system, &opts)?;
    if insert > 0 {
        analysis = insert_pairs(&analysis, insert, &opts.profile)?;
    }
    let report = quantize(&analysis, n_max);
    cfg.write("quantization.toml", &report.to_toml())?;
    cfg.write_plot(&analysis)?;
    println!("system           {}", report.system);
    println!("cn_factor_count  {}", report.cn_factor_count);
    println!("bs_count         {}", report.bs_count);
    println!("dimension        {}", report.dimension);
    let (table, ok) = rank_table(&analysis, n_max, exact)?;
    print!("{table}");
    if ok {
        Ok(())
    } else {
        Err(Failure::Mismatch("formula and Čech rank disagree".into()))
    }
}

fn cech_row(name: &str, h1: usize, expected: usize) -> (String, bool) {
    let ok = h1 == expected;
    (format!("{name:<14} h1 {h1:>5}  {}\n", if ok { "ok" } else { "CHANGED" }), ok)
}

fn cmd_cech_verify(a: &CechArgs) -> Outcome {
    let (base, n_max): (CechComplex<f64>, usize) = match (&a.builtin, &a.input) {
        (Some(name), None) => {
            let g = LeafGraph::by_name(name).map_err(|e| Failure::Usage(e.to_string()))?;
            let counts = spread_bs(&g, a.bs);
            (synthetic_model(&g, 0, &counts, &DEFAULT_OFFSETS)?, a.jet_order.unwrap_or(5))
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(Error::from)?;
            let model = ModelFile::parse(&text)?;
            let order = a.jet_order.unwrap_or(model.order);
            (model.build()?, order)
        }
        _ => return Err(Failure::Usage("give exactly one of --builtin and --input".into())),
    };
    let g = &base.leaf_graph;
    let m = base.bs_count();
    println!(
        "leaf graph: {} arcs, {} loop families, {} Bohr-Sommerfeld leaves",
        g.arcs.len(),
        g.loop_families.len(),
        m
    );
    println!("{:>3} {:>9} {:>9} {:>9}  match", "N", "formula", "rank", "exact");
    let mut all = true;
    for n in 0..=n_max {
        let c = base.with_order(n);
        let formula = general_leaf_h1(g, n, m);
        let d = cohomology_dims(&c);
        let exact = if n <= EXACT_MAX_ORDER { Some(cohomology_dims_exact(&c)?) } else { None };
        let ok = d.h1 == formula && d.h0_smooth == 0 && d.h2 == 0 && exact.as_ref().is_none_or(|e| e.h1 == formula);
        all &= ok;
        let exact_col = exact.map_or("-".to_string(), |e| e.h1.to_string());
        println!("{n:>3} {formula:>9} {:>9} {exact_col:>9}  {}", d.h1, if ok { "yes" } else { "NO" });
        if let Some(w) = &d.warning {
            println!("    warning: {w}");
        }
    }

    let top = base.with_order(n_max);
    let expected = cohomology_dims(&top).h1;
    let refined = top.refine_cover(3)?;
    let mut rows = vec![
        ("refine x2", top.refine_cover(2)?),
        ("refine x3", refined.clone()),
        ("collapse", refined.chain_collapse(0)?),
        ("gauge", top.with_gauge(CoverSet::Rect { arc: 0, index: 0 }, 0.7)?),
        ("reparam", top.reparametrized(1.7)?),
        ("reversed", top.reversed()),
    ];
    println!("invariance at N = {n_max}");
    for (name, c) in rows.drain(..) {
        let (line, ok) = cech_row(name, cohomology_dims(&c).h1, expected);
        all &= ok;
        print!("{line}");
    }
    if all {
        Ok(())
    } else {
        Err(Failure::Mismatch("Čech verification failed".into()))
    }
}

#[derive(Serialize)]
struct SurgeryRecord {
    s_e: usize,
    s_h: usize,
    poincare_hopf: PoincareHopf,
    area_before: f64,
    area_after: f64,
    area_change: f64,
    cn_factor_count: usize,
}

fn cmd_surgery(cfg: &RunConfig, a: &SurgeryArgs) -> Outcome {
    let system = cfg.system()?;
    let opts = cfg.analysis_options();
    let before = analyze(&system, &opts)?;
    let after = match (a.edge, a.insert) {
        (Some(e), None) => {
            let profile = before.profiles.get(e).ok_or_else(|| Failure::Usage(format!("no edge {e}")))?;
            let position = a.position.unwrap_or(0.5 * profile.t_max);
            let lobe_area = match a.area {
                Some(v) => v,
                None => default_lobe_area(before.end_actions[e][1] - profile.value(position)?),
            };
            surgery_insert_pair(&before, &SurgeryOp { target_edge: e, position, lobe_area }, &opts.profile)?
        }
        (None, Some(r)) => insert_pairs(&before, r, &opts.profile)?,
        _ => return Err(Failure::Usage("give --edge (with optional --position, --area) or --insert".into())),
    };
    let report = quantize(&after, a.jet_order);
    let (s_e, s_h) = after.singular_counts();
    let record = SurgeryRecord {
        s_e,
        s_h,
        poincare_hopf: poincare_hopf_check(&after),
        area_before: round_sig(before.total_area()),
        area_after: round_sig(after.total_area()),
        area_change: round_sig(after.total_area() - before.total_area()),
        cn_factor_count: report.cn_factor_count,
    };
    cfg.write("surgery.toml", &toml::to_string(&record).expect("record serializes"))?;
    cfg.write("reeb.toml", &after.reeb.to_toml())?;
    cfg.write("quantization.toml", &report.to_toml())?;
    cfg.write_plot(&after)?;
    println!("singular         {s_e} elliptic, {s_h} hyperbolic");
    println!(
        "euler check      {} ({})",
        record.poincare_hopf.chi,
        if record.poincare_hopf.ok { "ok" } else { "FAILED" }
    );
    println!("area change      {:e}", record.area_change);
    println!("cn_factor_count  {}", report.cn_factor_count);
    if record.poincare_hopf.ok {
        Ok(())
    } else {
        Err(Failure::Mismatch("Euler characteristic check failed after surgery".into()))
    }
}

fn cmd_flat_check(a: &FlatArgs) -> Outcome {
    let expr = Expr::parse_univariate(&a.function, "h")?;
    let f = move |h: f64| expr.eval(h, 0.0);
    let report = taylor_flatness_test(&f, a.k_max, a.h0);
    println!("taylor flatness of a(h) = {}", a.function);
    println!("{:>3} {:>5} {:>6} {:>14}", "k", "pass", "from", "tail ratio");
    for o in &report.orders {
        println!("{:>3} {:>5} {:>6} {:>14.6e}", o.k, if o.pass { "yes" } else { "no" }, o.monotone_from, o.tail_ratio);
    }
    match report.first_failure() {
        Some(k) => println!("first failure at k = {k}"),
        None => println!("flat up to k = {}", a.k_max),
    }

    let section = LocalFlatSection::uniform(f, &a.function);
    let study = residual_convergence(&|x, y| section.eval(x, y), a.point[0], a.point[1], a.step);
    println!("flat section residual at ({}, {})", a.point[0], a.point[1]);
    println!("{:>12} {:>14}", "step", "residual");
    for (s, r) in study.steps.iter().zip(&study.residuals) {
        println!("{s:>12.4e} {r:>14.6e}");
    }
    println!("observed orders {:.4} {:.4}", study.orders[0], study.orders[1]);

    println!("rigidity nullity to degree {}: {}", a.rigidity_degree, rigidity_nullity(a.rigidity_degree));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors() {
        assert_eq!(run(["hyperquant", "analyze"]), 1);
        assert_eq!(run(["hyperquant", "analyze", "--builtin", "sphere-height", "--input", "x.toml"]), 1);
        assert_eq!(run(["hyperquant", "quantize", "--builtin", "sphere-height", "--jet-order", "-1"]), 1);
        assert_eq!(run(["hyperquant", "frobnicate"]), 1);
        assert_eq!(run(["hyperquant", "--help"]), 0);
    }

    #[test]
    fn params() {
        assert_eq!(parse_param("k=4").unwrap(), ("k".to_string(), 4.0));
        assert!(parse_param("k").is_err());
        assert_eq!(parse_point("1, -2").unwrap(), [1.0, -2.0]);
    }

    #[test]
    fn cech_verify_builtin() {
        assert_eq!(run(["hyperquant", "cech-verify", "--builtin", "figure-eight", "--jet-order", "2", "--bs", "1"]), 0);
        assert_eq!(run(["hyperquant", "cech-verify", "--builtin", "no-such-graph"]), 1);
        assert_eq!(run(["hyperquant", "analyze", "--builtin", "no-such-system"]), 1);
    }
}
