//! File formats: CSV distance matrices, graph and space JSON, serialized
//! embeddings, reports and per-pair ledgers.
//!
//! All numbers are written as strings in their lossless text form so that
//! rational values survive a round trip and output is byte-stable.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{CaseLedger, DistortionReport, EnvelopeReport, ModuliProfile};
use crate::block::{make_operators, BlockVector, OperatorMode};
use crate::error::{Error, Result};
use crate::frechet::CoordVector;
use crate::glue::Embedding;
use crate::metric::{AmalgamSpace, Graph, MetricSpace};
use crate::scalar::{Arith, ParseScalarError, Scalar};

pub const SCHEMA_VERSION: u32 = 1;

impl From<ParseScalarError> for Error {
    fn from(e: ParseScalarError) -> Self {
        Error::Parse(e.0)
    }
}

fn parse<S: Scalar>(s: &str) -> Result<S> {
    Ok(S::parse_text(s)?)
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn to_pretty(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn pick_basepoint(names: &[String], basepoint: Option<&str>) -> Result<usize> {
    match basepoint {
        None => Ok(0),
        Some(b) => names.iter().position(|n| n == b).ok_or_else(|| Error::UnknownPoint(b.to_string())),
    }
}

/// Reads a square distance matrix whose header row names the points.
///
/// Rows may carry a leading label column repeating the point name. Values
/// are integers, decimals or `p/q`.
pub fn read_matrix_csv<S: Scalar>(reader: impl Read, basepoint: Option<&str>) -> Result<MetricSpace<S>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).flexible(true).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let mut names: Vec<String> = header.iter().map(str::to_string).collect();
    let labelled = names.first().is_some_and(String::is_empty);
    if labelled {
        names.remove(0);
    }
    let mut rows = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let mut cells: Vec<&str> = record.iter().collect();
        if labelled && !cells.is_empty() {
            let label = cells.remove(0);
            if names.get(r).is_some_and(|n| n != label) {
                return Err(Error::Parse(format!("row {} is labelled `{label}`, expected `{}`", r + 1, names[r])));
            }
        }
        rows.push(cells.iter().map(|c| parse::<S>(c)).collect::<Result<Vec<S>>>()?);
    }
    let b = pick_basepoint(&names, basepoint)?;
    MetricSpace::new(names, rows, b)
}

pub fn write_matrix_csv<S: Scalar>(space: &MetricSpace<S>, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Parse(e.to_string());
    let mut header = vec![String::new()];
    header.extend(space.names().iter().cloned());
    w.write_record(&header).map_err(io)?;
    for i in 0..space.len() {
        let mut row = vec![space.name(i).to_string()];
        row.extend((0..space.len()).map(|j| space.d(i, j).to_text()));
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphDoc {
    nodes: Vec<String>,
    edges: Vec<(String, String, Value)>,
    #[serde(default)]
    basepoint: Option<String>,
}

/// `{"nodes": [...], "edges": [[u, v, w], ...], "basepoint": name}`.
/// Weights may be JSON numbers or strings.
pub fn read_graph_json<S: Scalar>(text: &str, basepoint: Option<&str>) -> Result<Graph<S>> {
    let doc: GraphDoc = parse_json(text)?;
    let mut edges = Vec::with_capacity(doc.edges.len());
    for (u, v, w) in doc.edges {
        let w = match &w {
            Value::String(s) => parse::<S>(s)?,
            Value::Number(n) => parse::<S>(&n.to_string())?,
            other => return Err(Error::Parse(format!("edge {u}-{v}: weight {other} is not a number"))),
        };
        edges.push((u, v, w));
    }
    let basepoint = match basepoint.map(str::to_string).or(doc.basepoint) {
        Some(b) => b,
        None => doc.nodes.first().cloned().ok_or(Error::EmptySpace)?,
    };
    Ok(Graph { nodes: doc.nodes, edges, basepoint })
}

pub fn write_graph_json<S: Scalar>(names: &[String], edges: &[(usize, usize, S)], basepoint: usize) -> String {
    let edges: Vec<_> = edges.iter().map(|(u, v, w)| json!([names[*u], names[*v], w.to_text()])).collect();
    to_pretty(&json!({ "nodes": names, "edges": edges, "basepoint": names[basepoint] }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceDoc {
    pub schema_version: u32,
    pub points: Vec<String>,
    pub basepoint: String,
    pub dist: Vec<Vec<String>>,
}

impl SpaceDoc {
    pub fn of<S: Scalar>(space: &MetricSpace<S>) -> Self {
        SpaceDoc {
            schema_version: SCHEMA_VERSION,
            points: space.names().to_vec(),
            basepoint: space.name(space.basepoint()).to_string(),
            dist: space.rows().iter().map(|r| r.iter().map(Scalar::to_text).collect()).collect(),
        }
    }

    pub fn to_space<S: Scalar>(&self, basepoint: Option<&str>) -> Result<MetricSpace<S>> {
        let rows = self
            .dist
            .iter()
            .map(|r| r.iter().map(|c| parse::<S>(c)).collect::<Result<Vec<S>>>())
            .collect::<Result<Vec<_>>>()?;
        let b = pick_basepoint(&self.points, Some(basepoint.unwrap_or(&self.basepoint)))?;
        MetricSpace::new(self.points.clone(), rows, b)
    }
}

pub fn read_space_json<S: Scalar>(text: &str, basepoint: Option<&str>) -> Result<MetricSpace<S>> {
    parse_json::<SpaceDoc>(text)?.to_space(basepoint)
}

pub fn write_space_json<S: Scalar>(space: &MetricSpace<S>) -> String {
    to_pretty(&SpaceDoc::of(space))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellDoc {
    pub n: usize,
    pub lambda: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorDoc {
    pub mode: String,
    pub dim: usize,
    pub norm_bound: String,
    pub conorm_bound: String,
}

/// `{"blocks": {shell: {point name: value}}}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BlockVectorDoc {
    pub blocks: BTreeMap<usize, BTreeMap<String, String>>,
}

impl BlockVectorDoc {
    pub fn of<S: Scalar>(space: &MetricSpace<S>, v: &BlockVector<S>) -> Self {
        let blocks = v
            .blocks()
            .map(|(k, c)| {
                let coords = c.points().iter().zip(c.values()).map(|(&s, x)| (space.name(s).to_string(), x.to_text()));
                (k, coords.collect())
            })
            .collect();
        BlockVectorDoc { blocks }
    }
}

/// A serialized embedding. `space` is the rescaled space; `scale` is the
/// factor applied to the input distances. Maps are keyed by point name or
/// shell index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingDoc {
    pub schema_version: u32,
    pub arith: Arith,
    pub mode: String,
    pub scale: String,
    pub basepoint: String,
    pub space: SpaceDoc,
    pub shells: BTreeMap<String, ShellDoc>,
    pub operators: BTreeMap<usize, OperatorDoc>,
    pub image: BTreeMap<String, BlockVectorDoc>,
}

impl EmbeddingDoc {
    pub fn of<S: Scalar>(e: &Embedding<S>, mode: OperatorMode) -> Self {
        let space = e.space();
        let shells = (0..space.len())
            .filter_map(|t| {
                let s = e.shells().get(t)?;
                Some((space.name(t).to_string(), ShellDoc { n: s.n, lambda: s.lambda.to_text() }))
            })
            .collect();
        let operators = e
            .operators()
            .iter()
            .map(|op| {
                let doc = OperatorDoc {
                    mode: op.mode.to_string(),
                    dim: op.dim,
                    norm_bound: op.norm_bound.to_text(),
                    conorm_bound: op.conorm_bound.to_text(),
                };
                (op.shell, doc)
            })
            .collect();
        let image =
            (0..space.len()).map(|t| (space.name(t).to_string(), BlockVectorDoc::of(space, e.evaluate(t)))).collect();
        EmbeddingDoc {
            schema_version: SCHEMA_VERSION,
            arith: S::ARITH,
            mode: mode.to_string(),
            scale: e.scale().to_text(),
            basepoint: space.name(space.basepoint()).to_string(),
            space: SpaceDoc::of(space),
            shells,
            operators,
            image,
        }
    }

    pub fn to_json(&self) -> String {
        to_pretty(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = parse_json(text)?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported schema_version {}", doc.schema_version)));
        }
        Ok(doc)
    }

    pub fn operator_mode(&self) -> Result<OperatorMode> {
        self.mode.parse()
    }

    /// Rebuilds the construction from the stored space and operator mode and
    /// attaches the stored image. Header fields that disagree with the
    /// rebuilt construction are listed in `header_mismatches`.
    pub fn load<S: Scalar>(&self) -> Result<LoadedEmbedding<S>> {
        if self.arith != S::ARITH {
            return Err(Error::InvalidParameter(format!("embedding uses {} arithmetic, loader uses {}", self.arith, S::ARITH)));
        }
        let space: MetricSpace<S> = self.space.to_space(Some(&self.basepoint))?;
        let scale: S = parse(&self.scale)?;
        let ops = make_operators(&space, self.operator_mode()?)?;
        let fresh = Embedding::build(space.clone(), scale.clone(), &ops)?;
        let mut mismatches = Vec::new();

        for t in 0..space.len() {
            match (fresh.shells().get(t), self.shells.get(space.name(t))) {
                (None, None) => {}
                (Some(s), Some(doc)) if s.n == doc.n && s.lambda == parse::<S>(&doc.lambda)? => {}
                _ => mismatches.push(format!("shell of `{}`", space.name(t))),
            }
        }
        if self.shells.len() != fresh.shells().len() - 1 {
            mismatches.push(format!("{} shells stored for {} points", self.shells.len(), space.len()));
        }
        if self.operators.len() != ops.len() {
            mismatches.push(format!("{} operators stored, {} rebuilt", self.operators.len(), ops.len()));
        }
        for op in &ops {
            let same = self.operators.get(&op.shell).is_some_and(|doc| {
                doc.mode == op.mode.to_string()
                    && doc.dim == op.dim
                    && parse::<S>(&doc.norm_bound).is_ok_and(|x| x == op.norm_bound)
                    && parse::<S>(&doc.conorm_bound).is_ok_and(|x| x == op.conorm_bound)
            });
            if !same {
                mismatches.push(format!("operator for shell {}", op.shell));
            }
        }

        if self.image.len() != space.len() {
            return Err(Error::Parse(format!("image has {} points, space has {}", self.image.len(), space.len())));
        }
        let mut image = Vec::with_capacity(space.len());
        for t in 0..space.len() {
            let doc = self.image.get(space.name(t)).ok_or_else(|| Error::UnknownPoint(space.name(t).to_string()))?;
            let mut v = BlockVector::zero();
            for (&k, coords) in &doc.blocks {
                if k >= ops.len() {
                    return Err(Error::MissingOperator(k));
                }
                let ball: &Arc<[usize]> = fresh.ball(k);
                if coords.len() != ball.len() {
                    return Err(Error::IndexingMismatch(k));
                }
                let values = ball
                    .iter()
                    .map(|&s| coords.get(space.name(s)).ok_or(Error::IndexingMismatch(k)).and_then(|x| parse::<S>(x)))
                    .collect::<Result<Vec<S>>>()?;
                v.insert(k, CoordVector::new(ball.clone(), values));
            }
            image.push(v);
        }
        let embedding = Embedding::with_image(space, scale, &ops, image)?;
        Ok(LoadedEmbedding { embedding, header_mismatches: mismatches })
    }
}

pub struct LoadedEmbedding<S> {
    pub embedding: Embedding<S>,
    pub header_mismatches: Vec<String>,
}

pub fn distortion_json<S: Scalar>(space: &MetricSpace<S>, r: &DistortionReport<S>) -> Value {
    let pair = |p: Option<(usize, usize)>| p.map(|(i, j)| json!([space.name(i), space.name(j)]));
    json!({
        "lip": r.lip.to_text(),
        "lip_witness": pair(Some(r.lip_witness)),
        "colip": r.colip.as_ref().map(Scalar::to_text),
        "colip_witness": pair(r.colip_witness),
        "dist": r.dist.as_ref().map(Scalar::to_text),
        "dist_f64": r.dist.as_ref().map(Scalar::to_f64),
        "collision": pair(r.collision),
        "pair_count": r.pair_count,
        "lip_ok": r.lip_ok(),
        "colip_ok": r.colip_ok(),
        "dist_ok": r.dist_ok(),
    })
}

/// Case counts plus the first `max_failures` failing pairs with their
/// failing checks.
pub fn ledger_json<S: Scalar>(space: &MetricSpace<S>, ledger: &CaseLedger<S>, max_failures: usize) -> Value {
    let mut lip_counts = BTreeMap::new();
    let mut inv_counts = BTreeMap::new();
    for e in &ledger.entries {
        *lip_counts.entry(e.lip_case.to_string()).or_insert(0usize) += 1;
        *inv_counts.entry(e.inv_case.to_string()).or_insert(0usize) += 1;
    }
    let failures: Vec<Value> = ledger
        .failures()
        .take(max_failures)
        .map(|e| {
            json!({
                "t": space.name(e.t),
                "t_prime": space.name(e.u),
                "lip_case": e.lip_case.to_string(),
                "inv_case": e.inv_case.to_string(),
                "failed": e.failed_checks().map(|c| c.to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "pairs": ledger.entries.len(),
        "checks": ledger.check_count(),
        "passed": ledger.passed(),
        "lip_cases": lip_counts,
        "inverse_cases": inv_counts,
        "failure_count": ledger.failures().count(),
        "failures": failures,
    })
}

pub fn envelope_json<S: Scalar>(space: &MetricSpace<S>, r: &EnvelopeReport<S>) -> Value {
    json!({
        "min_ratio": r.min_ratio.to_text(),
        "min_witness": space.name(r.min_witness),
        "max_ratio": r.max_ratio.to_text(),
        "max_witness": space.name(r.max_witness),
        "violations": r.violations.iter().map(|&t| space.name(t)).collect::<Vec<_>>(),
        "passed": r.passed(),
    })
}

pub fn moduli_json<S: Scalar>(m: &ModuliProfile<S>) -> Value {
    let rows: Vec<Value> = m
        .thresholds
        .iter()
        .zip(&m.rho)
        .zip(&m.omega)
        .map(|((t, r), w)| {
            json!({
                "t": t.to_text(),
                "rho": r.as_ref().map_or_else(|| "inf".to_string(), Scalar::to_text),
                "omega": w.to_text(),
            })
        })
        .collect();
    json!({
        "samples": rows,
        "monotone": m.monotone(),
        "envelope_violations": m.envelope_violations,
        "passed": m.passed(),
    })
}

pub struct ReportParts<'a, S> {
    pub embedding: &'a Embedding<S>,
    pub mode: OperatorMode,
    pub distortion: &'a DistortionReport<S>,
    pub ledger: &'a CaseLedger<S>,
    pub envelope: &'a EnvelopeReport<S>,
    pub moduli: &'a ModuliProfile<S>,
}

pub fn report_json<S: Scalar>(parts: &ReportParts<'_, S>) -> String {
    let space = parts.embedding.space();
    to_pretty(&json!({
        "schema_version": SCHEMA_VERSION,
        "arith": S::ARITH,
        "mode": parts.mode.to_string(),
        "points": space.len(),
        "scale": parts.embedding.scale().to_text(),
        "distortion": distortion_json(space, parts.distortion),
        "cases": ledger_json(space, parts.ledger, 20),
        "envelope": envelope_json(space, parts.envelope),
        "moduli": moduli_json(parts.moduli),
    }))
}

/// One row per pair: `t, t', d, ||Δf||, lip_case, inv_case, lip_pass, inv_pass`.
pub fn write_pair_csv<S: Scalar>(space: &MetricSpace<S>, ledger: &CaseLedger<S>, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(["t", "t_prime", "d", "image_dist", "lip_case", "inv_case", "lip_pass", "inv_pass"])
        .map_err(io)?;
    for e in &ledger.entries {
        w.write_record([
            space.name(e.t),
            space.name(e.u),
            &e.d.to_text(),
            &e.image_dist.to_text(),
            &e.lip_case.to_string(),
            &e.inv_case.to_string(),
            &e.lip_pass().to_string(),
            &e.inv_pass().to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}

/// One row per materialized inequality.
pub fn write_check_csv<S: Scalar>(space: &MetricSpace<S>, ledger: &CaseLedger<S>, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(["t", "t_prime", "case", "check", "lhs", "relation", "rhs", "pass"]).map_err(io)?;
    for e in &ledger.entries {
        let lip = e.lip_checks.iter().map(|c| (e.lip_case.to_string(), c));
        let inv = e.inv_checks.iter().map(|c| (format!("inverse {}", e.inv_case), c));
        for (case, c) in lip.chain(inv) {
            w.write_record([
                space.name(e.t),
                space.name(e.u),
                &case,
                c.label,
                &c.lhs.to_text(),
                &c.relation.to_string(),
                &c.rhs.to_text(),
                &c.pass.to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}

/// Records that each part sits isometrically inside the amalgam and that the
/// glued space is a metric.
pub fn amalgam_certificate<S: Scalar>(am: &AmalgamSpace<S>) -> String {
    let parts: Vec<Value> = am
        .parts()
        .iter()
        .enumerate()
        .map(|(p, part)| {
            let dev = am.inclusion_deviation(p);
            json!({
                "part": p + 1,
                "points": part.len(),
                "basepoint": part.name(part.basepoint()),
                "inclusion_deviation": dev.to_text(),
                "isometric": dev.is_zero(),
            })
        })
        .collect();
    let report = am.space().validate();
    to_pretty(&json!({
        "schema_version": SCHEMA_VERSION,
        "points": am.space().len(),
        "basepoint": am.space().name(am.space().basepoint()),
        "parts": parts,
        "metric_violations": report.total,
        "passed": report.is_ok() && (0..am.parts().len()).all(|p| am.inclusion_deviation(p).is_zero()),
    }))
}
