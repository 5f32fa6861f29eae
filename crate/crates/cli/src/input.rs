use std::fs;
use std::path::Path;

use lfembed::io::{read_graph_json, read_matrix_csv, read_space_json};
use lfembed::{from_graph, generate, Error, Exact, Family, MetricSpace, Scalar};
use serde_json::Value;

use crate::{FamilyChoice, Format, GeneratorArgs, InputArgs};

/// A failed run, carrying its exit code class.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Metric(String),
    Bound(String),
    Output(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Output(_) => 1,
            Failure::Input(_) => 2,
            Failure::Metric(_) => 3,
            Failure::Bound(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Metric(m) | Failure::Bound(m) | Failure::Output(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotAMetric(_) => Failure::Metric(e.to_string()),
            Error::OperatorCertification { .. } => Failure::Bound(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

pub type Outcome<T = ()> = Result<T, Failure>;

pub fn read_text(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Output(format!("{}: {e}", path.display())))
}

pub fn family(choice: FamilyChoice, g: &GeneratorArgs) -> Family {
    match choice {
        FamilyChoice::Grid => Family::Grid { dim: g.dim, radius: g.radius },
        FamilyChoice::RandomGraph => Family::RandomGraph { n: g.points, p: g.p, seed: g.gen_seed },
        FamilyChoice::RandomTree => Family::RandomTree { n: g.points, seed: g.gen_seed },
        FamilyChoice::UniformPoints => Family::UniformPoints { n: g.points, dim: g.dim, seed: g.gen_seed },
    }
}

fn detect(path: &Path, text: &str, format: Format) -> Outcome<Format> {
    if format != Format::Auto {
        return Ok(format);
    }
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        return Ok(Format::Csv);
    }
    let value: Value = serde_json::from_str(text)
        .map_err(|e| Failure::Input(format!("{}: neither CSV nor JSON ({e})", path.display())))?;
    match value {
        Value::Object(m) if m.contains_key("image") => Err(Failure::Input(format!(
            "{} is an embedding; pass it to `verify --embedding`",
            path.display()
        ))),
        Value::Object(m) if m.contains_key("nodes") => Ok(Format::Graph),
        Value::Object(m) if m.contains_key("dist") => Ok(Format::Space),
        _ => Err(Failure::Input(format!("{}: unrecognized document", path.display()))),
    }
}

pub fn read_file(path: &Path, format: Format, basepoint: Option<&str>) -> Outcome<MetricSpace<Exact>> {
    let text = read_text(path)?;
    let space = match detect(path, &text, format)? {
        Format::Csv => read_matrix_csv(text.as_bytes(), basepoint)?,
        Format::Graph => from_graph(&read_graph_json(&text, basepoint)?)?,
        Format::Space | Format::Auto => read_space_json(&text, basepoint)?,
    };
    Ok(space)
}

/// Reads or generates the space, always in exact arithmetic.
pub fn load(args: &InputArgs) -> Outcome<MetricSpace<Exact>> {
    match (&args.source.input, args.source.family) {
        (Some(path), _) => read_file(path, args.format, args.basepoint.as_deref()),
        (None, Some(choice)) => {
            let space = generate::<Exact>(&family(choice, &args.generator))?.space;
            match &args.basepoint {
                Some(b) => Ok(space.with_basepoint(space.index_of(b)?)?),
                None => Ok(space),
            }
        }
        (None, None) => Err(Failure::Input("no input given".into())),
    }
}

pub fn to_float(space: &MetricSpace<Exact>) -> MetricSpace<f64> {
    let rows = space.rows().iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect();
    MetricSpace::new(space.names().to_vec(), rows, space.basepoint()).expect("same shape")
}

pub fn parse_list<S: Scalar>(items: &[String], what: &str) -> Outcome<Vec<S>> {
    items
        .iter()
        .map(|s| S::parse_text(s.trim()).map_err(|e| Failure::Input(format!("{what} `{s}`: {e}"))))
        .collect()
}
