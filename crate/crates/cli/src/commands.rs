use std::path::Path;

use lfembed::analysis::{certify_cases_with, default_thresholds, distortion_with, moduli_with};
use lfembed::io::{
    amalgam_certificate, distortion_json, envelope_json, report_json, write_check_csv, write_graph_json,
    write_matrix_csv, write_pair_csv, write_space_json, EmbeddingDoc, ReportParts, SCHEMA_VERSION,
};
use lfembed::{
    amalgamate as glue_parts, distortion, embed_space, envelope_check, generate as run_generator, geometry_profile,
    Arith, CaseLedger, DistortionReport, Embedding, Exact, MetricSpace, OperatorMode, PairTable, Scalar,
};
use serde_json::json;

use crate::input::{self, family, load, parse_list, read_file, read_text, to_float, write_text, Failure, Outcome};
use crate::{
    AmalgamateArgs, ArithChoice, ConstructionArgs, EmbedArgs, GenerateArgs, InputArgs, OperatorChoice, ProfileArgs,
    SourceArgs, VerifyArgs,
};

/// Spaces up to this size default to rational arithmetic.
const RATIONAL_AUTO_MAX: usize = 64;

fn operator_mode(c: &ConstructionArgs) -> Outcome<OperatorMode> {
    match (c.operators, c.seed) {
        (OperatorChoice::Random, Some(seed)) => Ok(OperatorMode::Random { seed }),
        (OperatorChoice::Random, None) => Err(Failure::Input("--operators random needs --seed".into())),
        (_, Some(_)) => Err(Failure::Input("--seed only applies to --operators random".into())),
        (OperatorChoice::Identity, None) => Ok(OperatorMode::Identity),
        (OperatorChoice::Half, None) => Ok(OperatorMode::Half),
    }
}

fn arith_for(choice: ArithChoice, points: usize) -> Arith {
    match choice {
        ArithChoice::Rational => Arith::Rational,
        ArithChoice::Float => Arith::Float,
        ArithChoice::Auto if points <= RATIONAL_AUTO_MAX => Arith::Rational,
        ArithChoice::Auto => Arith::Float,
    }
}

fn check_metric<S: Scalar>(space: &MetricSpace<S>) -> Outcome {
    let report = space.validate();
    if report.is_ok() {
        Ok(())
    } else {
        Err(Failure::Metric(format!("not a metric: {}", report.describe(space.names()))))
    }
}

fn pair_text<S: Scalar>(space: &MetricSpace<S>, (i, j): (usize, usize)) -> String {
    format!("({}, {})", space.name(i), space.name(j))
}

fn distortion_failure<S: Scalar>(space: &MetricSpace<S>, r: &DistortionReport<S>) -> Option<String> {
    if let Some(pair) = r.collision {
        return Some(format!("pair {} collides in the image", pair_text(space, pair)));
    }
    if !r.lip_ok() {
        return Some(format!("pair {} stretches by {}, above 9", pair_text(space, r.lip_witness), r.lip));
    }
    if !r.colip_ok() {
        let pair = r.colip_witness.expect("colip witness without collision");
        let colip = r.colip.as_ref().map(Scalar::to_text).unwrap_or_default();
        return Some(format!("pair {} contracts by {colip}, above 24", pair_text(space, pair)));
    }
    if !r.dist_ok() {
        return Some(format!("distortion {} above 216", r.dist.as_ref().map(Scalar::to_text).unwrap_or_default()));
    }
    None
}

fn summary<S: Scalar>(e: &Embedding<S>, mode: OperatorMode, r: &DistortionReport<S>) -> String {
    let opt = |x: &Option<S>| x.as_ref().map_or_else(|| "inf".to_string(), Scalar::to_text);
    format!(
        "{} points, {} arithmetic, operators {mode}: lip {} colip {} dist {}",
        e.len(),
        S::ARITH,
        r.lip.to_text(),
        opt(&r.colip),
        opt(&r.dist)
    )
}

pub fn embed(args: &EmbedArgs) -> Outcome {
    let mode = operator_mode(&args.construction)?;
    let space = load(&args.input)?;
    match arith_for(args.construction.arith, space.len()) {
        Arith::Rational => embed_with(&space, mode, args),
        Arith::Float => embed_with(&to_float(&space), mode, args),
    }
}

fn embed_with<S: Scalar>(space: &MetricSpace<S>, mode: OperatorMode, args: &EmbedArgs) -> Outcome {
    check_metric(space)?;
    let e = embed_space(space, mode)?;
    let dist = distortion(&e);
    let env = envelope_check(&e);
    write_text(&args.output, &EmbeddingDoc::of(&e, mode).to_json())?;
    if let Some(path) = &args.report {
        let report = json!({
            "schema_version": SCHEMA_VERSION,
            "arith": S::ARITH,
            "mode": mode.to_string(),
            "points": e.len(),
            "scale": e.scale().to_text(),
            "distortion": distortion_json(e.space(), &dist),
            "envelope": envelope_json(e.space(), &env),
        });
        let mut text = serde_json::to_string_pretty(&report).expect("serializable");
        text.push('\n');
        write_text(path, &text)?;
    }
    println!("{}", summary(&e, mode, &dist));
    if let Some(msg) = distortion_failure(e.space(), &dist) {
        return Err(Failure::Bound(msg));
    }
    if let Some(&t) = env.violations.first() {
        return Err(Failure::Bound(format!("point `{}` leaves the norm envelope", e.space().name(t))));
    }
    Ok(())
}

pub fn verify(args: &VerifyArgs) -> Outcome {
    if let Some(path) = &args.source.embedding {
        let doc = EmbeddingDoc::from_json(&read_text(path)?)?;
        let mode = doc.operator_mode()?;
        return match doc.arith {
            Arith::Rational => {
                let loaded = doc.load::<Exact>()?;
                verify_with(&loaded.embedding, mode, &loaded.header_mismatches, args)
            }
            Arith::Float => {
                let loaded = doc.load::<f64>()?;
                verify_with(&loaded.embedding, mode, &loaded.header_mismatches, args)
            }
        };
    }
    let input = InputArgs {
        source: SourceArgs { input: args.source.input.clone(), family: args.source.family },
        format: args.format,
        basepoint: args.basepoint.clone(),
        generator: args.generator.clone(),
    };
    let mode = operator_mode(&args.construction)?;
    let space = load(&input)?;
    match arith_for(args.construction.arith, space.len()) {
        Arith::Rational => {
            check_metric(&space)?;
            verify_with(&embed_space(&space, mode)?, mode, &[], args)
        }
        Arith::Float => {
            let space = to_float(&space);
            check_metric(&space)?;
            verify_with(&embed_space(&space, mode)?, mode, &[], args)
        }
    }
}

fn first_case_failure<S: Scalar>(space: &MetricSpace<S>, ledger: &CaseLedger<S>) -> Option<String> {
    let entry = ledger.failures().next()?;
    let checks: Vec<String> = entry.failed_checks().map(|c| c.to_string()).collect();
    Some(format!(
        "pair {} (cases {} / inverse {}) fails {} of {} pairs: {}",
        pair_text(space, (entry.t, entry.u)),
        entry.lip_case,
        entry.inv_case,
        ledger.failures().count(),
        ledger.entries.len(),
        checks.join("; ")
    ))
}

fn verify_with<S: Scalar>(e: &Embedding<S>, mode: OperatorMode, mismatches: &[String], args: &VerifyArgs) -> Outcome {
    let thresholds = if args.thresholds.is_empty() {
        default_thresholds(e.space(), args.threshold_count)
    } else {
        parse_list::<S>(&args.thresholds, "threshold")?
    };
    let table = PairTable::of(e);
    let dist = distortion_with(e, &table);
    let ledger = certify_cases_with(e, &table);
    let env = envelope_check(e);
    let moduli = moduli_with(e, &table, &thresholds);

    if let Some(path) = &args.report {
        let parts =
            ReportParts { embedding: e, mode, distortion: &dist, ledger: &ledger, envelope: &env, moduli: &moduli };
        write_text(path, &report_json(&parts))?;
    }
    if let Some(path) = &args.full_ledger {
        write_csv(path, |w| write_pair_csv(e.space(), &ledger, w))?;
    }
    if let Some(path) = &args.checks {
        write_csv(path, |w| write_check_csv(e.space(), &ledger, w))?;
    }

    println!("{}", summary(e, mode, &dist));
    println!(
        "{} pairs, {} checks, {} failing pairs; envelope {}; moduli {}",
        ledger.entries.len(),
        ledger.check_count(),
        ledger.failures().count(),
        if env.passed() { "ok" } else { "violated" },
        if moduli.passed() { "ok" } else { "violated" },
    );

    if !mismatches.is_empty() {
        return Err(Failure::Bound(format!("stored header disagrees with the rebuilt construction: {}", mismatches.join(", "))));
    }
    if let Some(msg) = first_case_failure(e.space(), &ledger) {
        return Err(Failure::Bound(msg));
    }
    if let Some(msg) = distortion_failure(e.space(), &dist) {
        return Err(Failure::Bound(msg));
    }
    if let Some(&t) = env.violations.first() {
        return Err(Failure::Bound(format!("point `{}` leaves the norm envelope", e.space().name(t))));
    }
    if let Some(&k) = moduli.envelope_violations.first() {
        return Err(Failure::Bound(format!("moduli leave their envelope at threshold {}", moduli.thresholds[k])));
    }
    if !moduli.monotone() {
        return Err(Failure::Bound("moduli are not monotone".into()));
    }
    Ok(())
}

fn write_csv(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> lfembed::Result<()>) -> Outcome {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| Failure::Output(e.to_string()))?;
    std::fs::write(path, buf).map_err(|e| Failure::Output(format!("{}: {e}", path.display())))
}

fn write_space(path: &Path, space: &MetricSpace<Exact>) -> Outcome {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        write_csv(path, |w| write_matrix_csv(space, w))
    } else {
        write_text(path, &write_space_json(space))
    }
}

pub fn generate(args: &GenerateArgs) -> Outcome {
    let g = run_generator::<Exact>(&family(args.family, &args.generator))?;
    write_space(&args.output, &g.space)?;
    if let Some(path) = &args.graph {
        if g.edges.is_empty() {
            return Err(Failure::Input(format!("{} has no edge list", g.family)));
        }
        write_text(path, &write_graph_json(g.space.names(), &g.edges, g.space.basepoint()))?;
    }
    println!("{}: {} points", g.family, g.space.len());
    if !g.repair_edges.is_empty() {
        println!("added {} edges to connect the graph", g.repair_edges.len());
    }
    Ok(())
}

pub fn amalgamate(args: &AmalgamateArgs) -> Outcome {
    let parts = args
        .parts
        .iter()
        .map(|p| {
            let space = read_file(p, args.format, None)?;
            check_metric(&space).map_err(|f| Failure::Metric(format!("{}: {}", p.display(), f.message())))?;
            Ok(space)
        })
        .collect::<Outcome<Vec<_>>>()?;
    let am = glue_parts(&parts)?;
    write_space(&args.output, am.space())?;
    let certificate = amalgam_certificate(&am);
    match &args.certificate {
        Some(path) => write_text(path, &certificate)?,
        None => print!("{certificate}"),
    }
    check_metric(am.space())?;
    if let Some(p) = (0..parts.len()).find(|&p| !am.inclusion_deviation(p).is_zero()) {
        return Err(Failure::Bound(format!("part {} is not isometric in the amalgam", p + 1)));
    }
    Ok(())
}

pub fn profile(args: &ProfileArgs) -> Outcome {
    let space = load(&args.input)?;
    check_metric(&space)?;
    let radii = if args.radii.is_empty() {
        let diameter =
            (0..space.len()).flat_map(|i| (0..space.len()).map(move |j| (i, j))).map(|(i, j)| space.d(i, j).clone()).max();
        let diameter = diameter.unwrap_or_else(Exact::zero);
        let mut r = Exact::one();
        let mut out = Vec::new();
        while r <= diameter {
            out.push(r.clone());
            r = r.clone() + &r;
        }
        if out.is_empty() {
            out.push(Exact::one());
        }
        out
    } else {
        parse_list::<Exact>(&args.radii, "radius")?
    };
    let prof = geometry_profile(&space, &radii)?;
    let mut text = String::from("radius,max_ball\n");
    for (r, c) in prof.radii.iter().zip(&prof.counts) {
        text.push_str(&format!("{},{c}\n", r.to_text()));
    }
    match &args.output {
        Some(path) => input::write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
