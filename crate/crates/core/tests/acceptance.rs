//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use arbor_core::analysis::{
    canopy_equivalence_report, endpoint_agreement, hausdorff, recover_parameters, PointSet,
};
use arbor_core::compiler::{certify, compile, CompileOptions};
use arbor_core::export::{tree_from_json, tree_to_json};
use arbor_core::frontend::{
    parse_ifs, parse_lsystem, serialize_ifs, serialize_lsystem, SimilarityMap,
};
use arbor_core::generator::{
    integrate_closed_form, integrate_rk4, GeneratorField, GeneratorState, IntegrationOptions,
    IntegratorChoice, PhaseMode, Retention,
};
use arbor_core::profile::AnalyticProfile;
use arbor_core::render::{render_svg, RenderOptions};
use arbor_core::scaffold::{scaffold_of, tangent_scaffold};
use arbor_core::tree::{
    check_branch_continuity, grow_tree, BranchEvent, GrowOptions, InheritanceRule, Schedule, Sign,
};
use arbor_core::Point2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn compile_opts() -> CompileOptions<f64> {
    CompileOptions {
        integration: IntegrationOptions::endpoints_only(IntegratorChoice::Auto),
        ..CompileOptions::default()
    }
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let t = common::decay_tree(8, Retention::Every(1));
    let elapsed = start.elapsed();
    ensure(t.len() == 511, || format!("{} branches", t.len()))?;
    ensure(elapsed < Duration::from_secs(5), || {
        format!("took {}", secs(elapsed))
    })?;
    let mut worst: f64 = 0.0;
    for b in t.branches.iter().skip(1) {
        let p = &t.branches[b.parent.unwrap()];
        let r = b.trajectory.chord().norm() / p.trajectory.chord().norm();
        worst = worst.max((r - 0.88).abs());
    }
    ensure(worst < 1e-9, || format!("ratio deviation {worst:e}"))?;
    Ok(format!(
        "511 branches in {}, max |ratio - 0.88| = {worst:.1e}",
        secs(elapsed)
    ))
}

fn ac2() -> Outcome {
    let t = common::decay_tree(8, Retention::EndpointsOnly);
    let table = recover_parameters(&tangent_scaffold(&t)).map_err(|e| e.to_string())?;
    ensure(
        !table.rows.is_empty() && table.rows[0].generation == 2,
        || "no rows from g = 2".into(),
    )?;
    let mut worst: f64 = 0.0;
    for r in &table.rows {
        worst = worst
            .max((r.lambda_hat_mean - 0.88).abs())
            .max((r.theta_hat_abs_mean - PI / 10.0).abs())
            .max(r.max_dev);
    }
    ensure(worst <= 1e-6, || format!("deviation {worst:e}"))?;
    Ok(format!(
        "g = 2..{}: lambda_hat = 0.88, |theta_hat| = pi/10, worst deviation {worst:.1e}",
        table.rows.last().unwrap().generation
    ))
}

fn ac3() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for k in 1..=8 {
        for (name, d) in [
            ("ifs", common::binary_ifs_discrete(k)),
            ("lsystem", common::ternary_discrete(k)),
        ] {
            let t = compile(&d, &compile_opts()).map_err(|e| format!("{name} depth {k}: {e}"))?;
            let c = certify(&t, &d, 1e-9).map_err(|e| format!("{name} depth {k}: {e}"))?;
            ensure(c.isomorphic && c.node_count == d.nodes.len(), || {
                format!("{name} depth {k}: no bijection")
            })?;
            ensure(c.pass, || {
                format!("{name} depth {k}: max gap {:e}", c.max_gap)
            })?;
            worst = worst.max(c.max_gap);
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || {
        format!("took {}", secs(elapsed))
    })?;
    Ok(format!(
        "depths 1..8, both systems, max gap {worst:.1e}, {}",
        secs(elapsed)
    ))
}

fn ac4() -> Outcome {
    let maps = common::binary_ifs_maps();
    let d = common::binary_ifs_discrete(8);
    let t = compile(&d, &compile_opts()).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for k in 1..=8 {
        let g = endpoint_agreement(&t, &maps, k).map_err(|e| e.to_string())?;
        ensure(g < 1e-9, || format!("k = {k}: {g:e}"))?;
        worst = worst.max(g);
    }
    Ok(format!("k = 1..8, max d_H(E_k, A_k) = {worst:.1e}"))
}

fn ac5() -> Outcome {
    let start = Instant::now();
    let maps = common::binary_ifs_maps();
    let d = common::binary_ifs_discrete(8);
    let t = compile(&d, &compile_opts()).map_err(|e| e.to_string())?;
    let ks: Vec<usize> = (2..=8).collect();
    let r = canopy_equivalence_report(&t, &maps, &ks, 12).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(r.monotone, || "distances not monotone".into())?;
    let ratio = r.fitted_ratio.ok_or("no fitted ratio")?;
    let rel = (ratio - 0.6).abs() / 0.6;
    ensure(rel <= 0.1, || format!("fitted ratio {ratio}"))?;
    ensure(elapsed < Duration::from_secs(30), || {
        format!("took {}", secs(elapsed))
    })?;
    Ok(format!(
        "monotone, fitted ratio {ratio:.4} ({:.1}% off), {}",
        rel * 100.0,
        secs(elapsed)
    ))
}

fn ac6() -> Outcome {
    let quarter = GeneratorField::new(
        AnalyticProfile::constant(1.0),
        AnalyticProfile::constant(PI / 2.0),
        PhaseMode::Local,
    );
    let spiral = GeneratorField::new(
        AnalyticProfile::exponential(0.88),
        AnalyticProfile::constant(PI / 10.0),
        PhaseMode::Local,
    );
    let mut worst: f64 = 0.0;
    for f in [&quarter, &spiral] {
        let init = GeneratorState::new(0.0, 0.0, 0.0, 0.0);
        let a = integrate_closed_form(f, init, (0.0, 1.0)).map_err(|e| e.to_string())?;
        let b = integrate_rk4(f, init, (0.0, 1.0), 1e-3).map_err(|e| e.to_string())?;
        ensure(a.samples.len() == b.samples.len(), || "grids differ".into())?;
        for (p, q) in a.samples.iter().zip(&b.samples) {
            worst = worst.max(p.state.position().distance(q.state.position()));
        }
    }
    ensure(worst <= 1e-8, || format!("disagreement {worst:e}"))?;
    Ok(format!("max closed-form vs RK4 disagreement {worst:.1e}"))
}

fn ac7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x000a_7b07);
    let mut branches = 0usize;
    for i in 0..1000 {
        let lambda: f64 = rng.gen_range(0.5..=0.95);
        let omega: f64 = rng.gen_range(0.0..=PI / 4.0);
        let depth = rng.gen_range(0..=6);
        let mode = if rng.gen_bool(0.5) {
            PhaseMode::Local
        } else {
            PhaseMode::Global
        };
        let rho = if rng.gen_bool(0.5) {
            AnalyticProfile::exponential(rng.gen_range(0.5..1.5))
        } else {
            AnalyticProfile::constant(rng.gen_range(0.2..2.0))
        };
        let field = GeneratorField::new(rho, AnalyticProfile::constant(omega), mode);
        let init = GeneratorState::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-PI..PI),
            0.0,
        );
        let children = rng.gen_range(1..=3);
        let rules = (0..children)
            .map(|c| {
                InheritanceRule::new(lambda, if c % 2 == 0 { Sign::Plus } else { Sign::Minus })
            })
            .collect();
        let opts = GrowOptions {
            integration: IntegrationOptions::endpoints_only(IntegratorChoice::Auto),
            ..GrowOptions::default()
        };
        let t = grow_tree(
            &field,
            init,
            1.0,
            &Schedule::uniform(BranchEvent::at_end(rules)),
            depth,
            &opts,
        )
        .map_err(|e| format!("config {i}: {e}"))?;
        let report = check_branch_continuity(&t);
        ensure(report.is_exact(), || {
            format!("config {i}: {} nonzero gaps", report.violations().len())
        })?;
        branches += t.len();
    }
    Ok(format!(
        "1000 configurations, {branches} branches, every gap exactly 0"
    ))
}

fn random_set(rng: &mut ChaCha8Rng) -> PointSet<f64> {
    let n = rng.gen_range(1..=20);
    let pts = (0..n)
        .map(|_| Point2::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)))
        .collect();
    PointSet::new(pts, "r")
}

fn ac8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..1000 {
        let (a, b, c) = (
            random_set(&mut rng),
            random_set(&mut rng),
            random_set(&mut rng),
        );
        let h = |x: &PointSet<f64>, y: &PointSet<f64>| hausdorff(x, y).unwrap();
        ensure(h(&a, &a) == 0.0, || format!("set {i}: d(A, A) != 0"))?;
        ensure(h(&a, &b) == h(&b, &a), || format!("set {i}: asymmetric"))?;
        ensure(h(&a, &b) <= h(&a, &c) + h(&c, &b) + 1e-12, || {
            format!("set {i}: triangle")
        })?;
        ensure(a.points == b.points || h(&a, &b) > 0.0, || {
            format!("set {i}: distinct sets at distance 0")
        })?;
    }

    let maps = common::binary_ifs_maps();
    let text = serialize_ifs(&maps);
    let back: Vec<SimilarityMap<f64>> = parse_ifs(&text).map_err(|e| e.to_string())?;
    ensure(back == maps && serialize_ifs(&back) == text, || {
        "ifs round trip".into()
    })?;
    let ls = common::ternary_lsystem();
    let text = serialize_lsystem(&ls);
    let back = parse_lsystem::<f64>(&text).map_err(|e| e.to_string())?;
    ensure(back == ls && serialize_lsystem(&back) == text, || {
        "lsystem round trip".into()
    })?;
    let tree = common::decay_tree(3, Retention::Every(100));
    let json = tree_to_json(&tree, true);
    ensure(
        tree_from_json::<f64>(&json).map_err(|e| e.to_string())? == tree,
        || "tree round trip".into(),
    )?;

    for k in 0..=8 {
        let n = common::ternary_discrete(k).edge_count();
        ensure(n == 3usize.pow(k as u32), || {
            format!("depth {k}: {n} edges")
        })?;
    }

    // same scenes as the svg test target
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let t = common::decay_tree(4, Retention::Every(100));
    let s = scaffold_of(&t);
    let opts = RenderOptions {
        overlay_scaffold: true,
        markers: true,
        ..RenderOptions::default()
    };
    let first = render_svg(&t, Some(&s), &opts);
    let second = render_svg(
        &common::decay_tree(4, Retention::Every(100)),
        Some(&s),
        &opts,
    );
    ensure(first == second, || "svg output not deterministic".into())?;
    let stored = std::fs::read_to_string(golden.join("decay_depth4_overlay.svg"))
        .map_err(|e| e.to_string())?;
    ensure(stored == first, || "svg differs from golden file".into())?;
    Ok("metric axioms on 1000 random triples, round trips, 3^k law, svg golden".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("AC1 decay growth: 511 branches, chord ratio 0.88", ac1),
        (
            "AC2 parameter recovery: lambda_hat 0.88, |theta_hat| pi/10",
            ac2,
        ),
        (
            "AC3 compile round trip: isomorphic, gap < 1e-9, depths 1..8",
            ac3,
        ),
        ("AC4 endpoint identity: d_H(E_k, A_k) < 1e-9", ac4),
        ("AC5 canopy decay: monotone, ratio within 10% of 0.6", ac5),
        ("AC6 integrator oracle: closed form vs RK4 <= 1e-8", ac6),
        ("AC7 exact state inheritance over 1000 random trees", ac7),
        ("AC8 property suites", ac8),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name} ({detail})"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({why})");
            }
        }
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
