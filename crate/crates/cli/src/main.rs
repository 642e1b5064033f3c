//! `arbor`: grow, compile, analyze, verify and render analytic generator trees.
//!
//! Exit status: 0 when every configured check passes, 1 when a check fails,
//! 2 on any error (reported on stderr as `{"kind": ..., "message": ...}`).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arbor_core::analysis::{canopy_equivalence_report, endpoint_agreement, recover_parameters};
use arbor_core::compiler::{certify, compile, Certificate, CompileOptions, EdgePolicy};
use arbor_core::export::{tree_from_json, tree_to_json};
use arbor_core::frontend::{
    expand_discrete_with, DiscreteSpec, DiscreteTree, ExpandOptions, SimilarityMap, SpecBody,
    SpecDocument,
};
use arbor_core::generator::{IntegrationOptions, IntegratorChoice, Retention};
use arbor_core::render::{render_svg, RenderOptions};
use arbor_core::scaffold::{scaffold_of, tangent_scaffold};
use arbor_core::tree::{grow_tree, GeneratorTree, GrowOptions};
use arbor_core::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

const DEFAULT_DEPTH: usize = 6;

#[derive(Parser, Debug)]
#[command(name = "arbor", version, about = "Analytic generator trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Grow a generator spec; writes tree.json and tree.svg.
    Grow(GrowArgs),
    /// Compile an IFS or L-system spec; writes tree.json and certificate.json.
    Compile(CompileArgs),
    /// Recover per-generation parameters from a spec or tree; writes recovery.csv.
    Analyze(AnalyzeArgs),
    /// Compile and check gaps and canopy decay; writes canopy.csv and verify.json.
    Verify(VerifyArgs),
    /// Render a tree JSON file; writes tree.svg.
    Render(RenderArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Integrator {
    Auto,
    Closed,
    Rk4,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum PolicyName {
    Chord,
    Arc,
    Matched,
    Spiral,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ScaffoldKind {
    Tangent,
    Chord,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Input file.
    input: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Tree depth; defaults to the spec's `depth` field, then 6.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, value_enum, default_value_t = Integrator::Auto)]
    integrator: Integrator,
    /// Integration step (and closed-form sample spacing).
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Keep every n-th sample of each branch.
    #[arg(long, default_value_t = 10)]
    samples: usize,
}

#[derive(Args, Debug, Clone)]
struct CompileFlags {
    #[arg(long, value_enum, default_value_t = PolicyName::Spiral)]
    policy: PolicyName,
    /// Total turn of each branch under `--policy arc`, radians.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
    arc_turn: f64,
    /// Arc-length span of every compiled branch.
    #[arg(long, default_value_t = 1.0)]
    span: f64,
    /// L-system segment contraction per bracket depth (overrides the spec).
    #[arg(long)]
    scale_per_depth: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct RenderFlags {
    #[arg(long)]
    overlay_scaffold: bool,
    #[arg(long)]
    markers: bool,
    #[arg(long, default_value_t = 3.0)]
    stroke_width: f64,
    /// Draw every branch with the same stroke width.
    #[arg(long)]
    no_taper: bool,
}

#[derive(Args, Debug)]
struct GrowArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    render: RenderFlags,
}

#[derive(Args, Debug)]
struct CompileArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    compile: CompileFlags,
    /// Largest accepted node gap.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    compile: CompileFlags,
    #[arg(long, value_enum, default_value_t = ScaffoldKind::Tangent)]
    scaffold: ScaffoldKind,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    compile: CompileFlags,
    /// Largest accepted node gap and endpoint distance.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Depth of the reference attractor approximant; defaults to depth + 4.
    #[arg(long)]
    reference_depth: Option<usize>,
    /// Allowed relative error of the fitted canopy decay ratio.
    #[arg(long, default_value_t = 0.1)]
    ratio_tolerance: f64,
}

#[derive(Args, Debug)]
struct RenderArgs {
    /// Tree JSON file.
    input: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[command(flatten)]
    render: RenderFlags,
}

/// Failure modes of a run.
enum Failure {
    /// A configured check did not pass.
    Check(String),
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotIsomorphic { .. } => Failure::Check(e.to_string()),
            other => Failure::Error(other),
        }
    }
}

type Run = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Grow(a) => cmd_grow(a),
        Command::Compile(a) => cmd_compile(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Render(a) => cmd_render(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Error(e)) => {
            let doc = serde_json::json!({ "kind": e.kind(), "message": e.to_string() });
            eprintln!("{doc}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Error> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn integration(c: &Common) -> Result<IntegrationOptions<f64>, Error> {
    if c.step.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || !c.step.is_finite() {
        return Err(Error::InvalidArgument("--step must be positive".into()));
    }
    Ok(IntegrationOptions {
        method: match c.integrator {
            Integrator::Auto => IntegratorChoice::Auto,
            Integrator::Closed => IntegratorChoice::Closed,
            Integrator::Rk4 => IntegratorChoice::Rk4,
        },
        step: c.step,
        retention: Retention::Every(c.samples.max(1)),
    })
}

fn render_options(r: &RenderFlags) -> RenderOptions {
    RenderOptions {
        stroke_width: r.stroke_width,
        taper: !r.no_taper,
        overlay_scaffold: r.overlay_scaffold,
        markers: r.markers,
        ..RenderOptions::default()
    }
}

fn svg_for(tree: &GeneratorTree<f64>, r: &RenderFlags) -> String {
    let scaffold = (r.overlay_scaffold || r.markers).then(|| scaffold_of(tree));
    render_svg(tree, scaffold.as_ref(), &render_options(r))
}

fn spec_depth(body: &SpecBody<f64>) -> Option<usize> {
    match body {
        SpecBody::Ifs(d) => d.depth,
        SpecBody::Lsystem(d) => d.depth,
        SpecBody::Generator(d) => d.depth,
    }
}

fn grow_generator(doc: &SpecDocument<f64>, c: &Common) -> Result<GeneratorTree<f64>, Error> {
    let SpecBody::Generator(g) = &doc.body else {
        return Err(Error::InvalidArgument(format!(
            "expected a generator spec, got kind {:?}",
            doc.kind()
        )));
    };
    let depth = c.depth.or(g.depth).unwrap_or(DEFAULT_DEPTH);
    let opts = GrowOptions {
        integration: integration(c)?,
        ..GrowOptions::default()
    };
    grow_tree(
        &g.field(),
        g.init_state(),
        g.span,
        &g.schedule,
        depth,
        &opts,
    )
}

/// Expanded discrete tree plus the IFS maps, when the spec is an IFS.
struct Discrete {
    tree: DiscreteTree<f64>,
    maps: Option<Vec<SimilarityMap<f64>>>,
    depth: usize,
}

fn expand(doc: &SpecDocument<f64>, c: &Common, f: &CompileFlags) -> Result<Discrete, Error> {
    let depth = c.depth.or(spec_depth(&doc.body)).unwrap_or(DEFAULT_DEPTH);
    let mut opts = ExpandOptions::default();
    match &doc.body {
        SpecBody::Ifs(d) => {
            opts.root = d.root.unwrap_or(opts.root);
            opts.heading = d.heading.unwrap_or(opts.heading);
            let tree = expand_discrete_with(DiscreteSpec::Ifs(&d.maps), depth, &opts)?;
            Ok(Discrete {
                tree,
                maps: Some(d.maps.clone()),
                depth,
            })
        }
        SpecBody::Lsystem(d) => {
            opts.root = d.root.unwrap_or(opts.root);
            opts.heading = d.heading.unwrap_or(opts.heading);
            opts.scale_per_depth = f
                .scale_per_depth
                .or(d.scale_per_depth)
                .unwrap_or(opts.scale_per_depth);
            let spec = d.spec();
            let tree = expand_discrete_with(DiscreteSpec::LSystem(&spec), depth, &opts)?;
            Ok(Discrete {
                tree,
                maps: None,
                depth,
            })
        }
        SpecBody::Generator(_) => Err(Error::InvalidArgument(
            "generator specs are grown, not compiled; use `arbor grow`".into(),
        )),
    }
}

fn compile_options(c: &Common, f: &CompileFlags) -> Result<CompileOptions<f64>, Error> {
    let policy = match f.policy {
        PolicyName::Chord => EdgePolicy::StraightChord,
        PolicyName::Arc => EdgePolicy::ConstantCurvatureArc {
            total_turn: f.arc_turn,
        },
        PolicyName::Matched => EdgePolicy::MatchedHeadingArc,
        PolicyName::Spiral => EdgePolicy::MatchedHeadingSpiral,
    };
    Ok(CompileOptions {
        policy,
        span: f.span,
        integration: integration(c)?,
        ..CompileOptions::default()
    })
}

fn compile_certified(
    doc: &SpecDocument<f64>,
    c: &Common,
    f: &CompileFlags,
    tolerance: f64,
) -> Result<(Discrete, GeneratorTree<f64>, Certificate<f64>), Error> {
    let d = expand(doc, c, f)?;
    let opts = compile_options(c, f)?;
    let tree = compile(&d.tree, &opts)?;
    let mut cert = certify(&tree, &d.tree, tolerance)?;
    cert.policy = Some(opts.policy.name().to_string());
    Ok((d, tree, cert))
}

fn cmd_grow(a: GrowArgs) -> Run {
    let doc = SpecDocument::<f64>::parse(&read(&a.common.input)?)?;
    let tree = grow_generator(&doc, &a.common)?;
    write(&a.common.out, "tree.json", &tree_to_json(&tree, true))?;
    write(&a.common.out, "tree.svg", &svg_for(&tree, &a.render))?;
    println!("branches {} max_depth {}", tree.len(), tree.max_depth());
    Ok(())
}

fn cmd_compile(a: CompileArgs) -> Run {
    let doc = SpecDocument::<f64>::parse(&read(&a.common.input)?)?;
    let (_, tree, cert) = compile_certified(&doc, &a.common, &a.compile, a.tolerance)?;
    write(&a.common.out, "tree.json", &tree_to_json(&tree, true))?;
    write(&a.common.out, "certificate.json", &cert.to_json())?;
    println!("branches {} max_gap {:e}", tree.len(), cert.max_gap);
    if cert.pass {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "max gap {:e} at node {} (tolerance {:e})",
            cert.max_gap, cert.worst_node, a.tolerance
        )))
    }
}

fn load_tree(text: &str, c: &Common, f: &CompileFlags) -> Result<GeneratorTree<f64>, Error> {
    let kind = serde_json::from_str::<serde_json::Value>(text)
        .ok()
        .and_then(|v| v.get("kind").and_then(|k| k.as_str()).map(str::to_owned));
    if kind.as_deref() == Some("tree") {
        return tree_from_json(text);
    }
    let doc = SpecDocument::<f64>::parse(text)?;
    match doc.body {
        SpecBody::Generator(_) => grow_generator(&doc, c),
        _ => {
            let d = expand(&doc, c, f)?;
            compile(&d.tree, &compile_options(c, f)?)
        }
    }
}

fn cmd_analyze(a: AnalyzeArgs) -> Run {
    let tree = load_tree(&read(&a.common.input)?, &a.common, &a.compile)?;
    let scaffold = match a.scaffold {
        ScaffoldKind::Tangent => tangent_scaffold(&tree),
        ScaffoldKind::Chord => scaffold_of(&tree),
    };
    let table = recover_parameters(&scaffold)?;
    write(&a.common.out, "recovery.csv", &table.to_csv()?)?;
    for r in &table.rows {
        println!(
            "g {} lambda_hat {:.12} |theta_hat| {:.12} max_dev {:e}",
            r.generation, r.lambda_hat_mean, r.theta_hat_abs_mean, r.max_dev
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct CheckResult {
    name: String,
    value: f64,
    threshold: f64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    v: u32,
    kind: &'static str,
    depth: usize,
    checks: Vec<CheckResult>,
    pass: bool,
}

fn cmd_verify(a: VerifyArgs) -> Run {
    let doc = SpecDocument::<f64>::parse(&read(&a.common.input)?)?;
    let (d, tree, cert) = compile_certified(&doc, &a.common, &a.compile, a.tolerance)?;
    let mut checks = vec![CheckResult {
        name: "certificate_max_gap".into(),
        value: cert.max_gap,
        threshold: a.tolerance,
        pass: cert.pass,
    }];
    if let Some(maps) = &d.maps {
        for k in 1..=d.depth {
            let gap = endpoint_agreement(&tree, maps, k)?;
            checks.push(CheckResult {
                name: format!("endpoint_agreement_k{k}"),
                value: gap,
                threshold: a.tolerance,
                pass: gap < a.tolerance,
            });
        }
        if d.depth >= 3 {
            let reference = a.reference_depth.unwrap_or(d.depth + 4);
            let ks: Vec<usize> = (2..=d.depth).collect();
            let report = canopy_equivalence_report(&tree, maps, &ks, reference)?;
            write(&a.common.out, "canopy.csv", &report.to_csv()?)?;
            checks.push(CheckResult {
                name: "canopy_monotone".into(),
                value: if report.monotone { 1.0 } else { 0.0 },
                threshold: 1.0,
                pass: report.monotone,
            });
            let ratio = report.fitted_ratio.unwrap_or(f64::NAN);
            let rel = ((ratio - report.lambda_max) / report.lambda_max).abs();
            checks.push(CheckResult {
                name: "canopy_fitted_ratio_rel_error".into(),
                value: rel,
                threshold: a.ratio_tolerance,
                pass: rel <= a.ratio_tolerance,
            });
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    let report = VerifyReport {
        v: 1,
        kind: "verify",
        depth: d.depth,
        checks,
        pass,
    };
    let mut json = serde_json::to_string_pretty(&report).map_err(Error::from)?;
    json.push('\n');
    write(&a.common.out, "certificate.json", &cert.to_json())?;
    write(&a.common.out, "verify.json", &json)?;
    for c in &report.checks {
        println!(
            "{} {} {:e} (threshold {:e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
    if pass {
        Ok(())
    } else {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        Err(Failure::Check(failed.join(", ")))
    }
}

fn cmd_render(a: RenderArgs) -> Run {
    let tree = tree_from_json::<f64>(&read(&a.input)?)?;
    write(&a.out, "tree.svg", &svg_for(&tree, &a.render))?;
    Ok(())
}
