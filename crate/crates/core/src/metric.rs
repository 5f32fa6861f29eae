//! Finite pointed metric spaces: validation, graph ingestion, rescaling,
//! balls, amalgams, and bounded-geometry profiles.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A finite metric space with a distinguished basepoint `t0`.
///
/// The distance table is stored row-major. Construction only checks the
/// table's shape; whether it is a metric is answered by [`MetricSpace::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpace<S> {
    names: Vec<String>,
    dist: Vec<S>,
    basepoint: usize,
}

/// One failed metric axiom with its witnessing indices.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation<S> {
    /// `d(i, i) != 0`.
    Diagonal { i: usize, value: S },
    /// `d(i, j) <= 0` for `i != j`. Zero means two names for one point.
    NotPositive { i: usize, j: usize, value: S },
    /// `d(i, j) != d(j, i)`; defect is the absolute difference.
    Asymmetric { i: usize, j: usize, defect: S },
    /// `d(i, k) > d(i, j) + d(j, k)`; defect is the excess.
    Triangle { i: usize, j: usize, k: usize, defect: S },
}

impl<S: Scalar> fmt::Display for Violation<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Diagonal { i, value } => write!(f, "d({i},{i}) = {value}"),
            Violation::NotPositive { i, j, value } => write!(f, "d({i},{j}) = {value} is not positive"),
            Violation::Asymmetric { i, j, defect } => write!(f, "d({i},{j}) and d({j},{i}) differ by {defect}"),
            Violation::Triangle { i, j, k, defect } => {
                write!(f, "triangle ({i},{j},{k}) violated by {defect}")
            }
        }
    }
}

/// Result of [`MetricSpace::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport<S> {
    /// Recorded violations, at most [`ValidationReport::MAX_RECORDED`].
    pub violations: Vec<Violation<S>>,
    /// Total number found, including unrecorded ones.
    pub total: usize,
}

impl<S: Scalar> ValidationReport<S> {
    pub const MAX_RECORDED: usize = 1000;

    pub fn is_ok(&self) -> bool {
        self.total == 0
    }

    fn push(&mut self, v: Violation<S>) {
        if self.violations.len() < Self::MAX_RECORDED {
            self.violations.push(v);
        }
        self.total += 1;
    }

    /// Human-readable summary naming the first few violations.
    pub fn describe(&self, names: &[String]) -> String {
        let name = |i: &usize| names.get(*i).map(String::as_str).unwrap_or("?");
        let mut parts: Vec<String> = self
            .violations
            .iter()
            .take(5)
            .map(|v| match v {
                Violation::Triangle { i, j, k, defect } => format!(
                    "d({a},{c}) > d({a},{b}) + d({b},{c}) by {defect}",
                    a = name(i),
                    b = name(j),
                    c = name(k)
                ),
                Violation::NotPositive { i, j, value } => {
                    format!("d({},{}) = {value} (distinct points must be at positive distance)", name(i), name(j))
                }
                other => other.to_string(),
            })
            .collect();
        if self.total > parts.len() {
            parts.push(format!("... {} violations in total", self.total));
        }
        parts.join("; ")
    }
}

/// Checks the shape of a raw table, then the metric axioms.
pub fn validate_table<S: Scalar>(rows: &[Vec<S>]) -> Result<ValidationReport<S>> {
    let n = rows.len();
    if let Some((bad_row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::DimensionMismatch { points: n, rows: n, bad_row, bad_len: r.len() });
    }
    let dist: Vec<S> = rows.iter().flatten().cloned().collect();
    Ok(scan_axioms(n, &dist))
}

fn scan_axioms<S: Scalar>(n: usize, dist: &[S]) -> ValidationReport<S> {
    let at = |i: usize, j: usize| &dist[i * n + j];
    let mut report = ValidationReport { violations: Vec::new(), total: 0 };
    let zero = S::zero();
    let mut symmetric = true;
    for i in 0..n {
        if !at(i, i).is_zero() {
            report.push(Violation::Diagonal { i, value: at(i, i).clone() });
        }
        for j in 0..n {
            if i == j {
                continue;
            }
            if i < j && at(i, j).total_cmp(&zero) != Ordering::Greater {
                report.push(Violation::NotPositive { i, j, value: at(i, j).clone() });
            }
            if i < j && at(i, j) != at(j, i) {
                symmetric = false;
                report.push(Violation::Asymmetric { i, j, defect: (at(i, j).clone() - at(j, i)).abs() });
            }
        }
    }
    for i in 0..n {
        // With a symmetric table the pair (i, k) and (k, i) give the same check.
        let k_start = if symmetric { i + 1 } else { 0 };
        for k in k_start..n {
            if k == i {
                continue;
            }
            let direct = at(i, k);
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                let detour = at(i, j).clone() + at(j, k);
                if *direct > detour {
                    report.push(Violation::Triangle { i, j, k, defect: direct.clone() - &detour });
                }
            }
        }
    }
    report
}

impl<S: Scalar> MetricSpace<S> {
    /// Builds a space from a square table. Checks shape, name uniqueness and
    /// the basepoint index; does not check the metric axioms.
    pub fn new(names: Vec<String>, rows: Vec<Vec<S>>, basepoint: usize) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        if rows.len() != n {
            let bad_len = rows.first().map_or(0, Vec::len);
            return Err(Error::DimensionMismatch { points: n, rows: rows.len(), bad_row: 0, bad_len });
        }
        if let Some((bad_row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::DimensionMismatch { points: n, rows: n, bad_row, bad_len: r.len() });
        }
        if basepoint >= n {
            return Err(Error::BadBasepoint(basepoint));
        }
        let mut seen = HashMap::with_capacity(n);
        for name in &names {
            if seen.insert(name.as_str(), ()).is_some() {
                return Err(Error::DuplicatePoint(name.clone()));
            }
        }
        Ok(MetricSpace { names, dist: rows.into_iter().flatten().collect(), basepoint })
    }

    /// [`MetricSpace::new`] followed by [`MetricSpace::validate`].
    pub fn checked(names: Vec<String>, rows: Vec<Vec<S>>, basepoint: usize) -> Result<Self> {
        let space = Self::new(names, rows, basepoint)?;
        space.ensure_metric()?;
        Ok(space)
    }

    pub(crate) fn from_flat(names: Vec<String>, dist: Vec<S>, basepoint: usize) -> Self {
        debug_assert_eq!(dist.len(), names.len() * names.len());
        MetricSpace { names, dist, basepoint }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names.iter().position(|n| n == name).ok_or_else(|| Error::UnknownPoint(name.to_string()))
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> &S {
        &self.dist[i * self.len() + j]
    }

    /// `|t| = d(t, t0)`.
    #[inline]
    pub fn norm(&self, i: usize) -> &S {
        self.d(i, self.basepoint)
    }

    pub fn rows(&self) -> Vec<Vec<S>> {
        self.dist.chunks(self.len()).map(<[S]>::to_vec).collect()
    }

    pub fn with_basepoint(&self, basepoint: usize) -> Result<Self> {
        if basepoint >= self.len() {
            return Err(Error::BadBasepoint(basepoint));
        }
        Ok(MetricSpace { basepoint, ..self.clone() })
    }

    pub fn validate(&self) -> ValidationReport<S> {
        scan_axioms(self.len(), &self.dist)
    }

    pub fn ensure_metric(&self) -> Result<()> {
        let report = self.validate();
        if report.is_ok() {
            Ok(())
        } else {
            Err(Error::NotAMetric(report.describe(&self.names)))
        }
    }

    /// Multiplies every distance by `2 / min_{t != t0} |t|`, so the closest
    /// point to the basepoint sits at norm exactly 2 and `B(t0, 1) = {t0}`.
    pub fn rescale_to_unit_gap(&self) -> Result<(Self, S)> {
        if self.len() < 2 {
            return Err(Error::SinglePoint);
        }
        let min_norm = (0..self.len())
            .filter(|&i| i != self.basepoint)
            .map(|i| self.norm(i).clone())
            .reduce(S::min_of)
            .expect("at least two points");
        if min_norm.total_cmp(&S::zero()) != Ordering::Greater {
            return Err(Error::NotAMetric("a point coincides with the basepoint".into()));
        }
        let scale = S::from_i64(2) / min_norm;
        Ok((self.scaled(&scale), scale))
    }

    /// Dilation by a positive factor.
    pub fn scaled(&self, factor: &S) -> Self {
        MetricSpace {
            names: self.names.clone(),
            dist: self.dist.iter().map(|d| d.clone() * factor).collect(),
            basepoint: self.basepoint,
        }
    }

    /// All point indices ordered by ascending norm, input order breaking ties.
    pub fn norm_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.norm(a).total_cmp(self.norm(b)).then(a.cmp(&b)));
        order
    }

    /// `B_n = B(t0, 2^{n+1})`, closed, in [`MetricSpace::norm_order`] order.
    pub fn ball(&self, n: usize) -> Vec<usize> {
        let radius = S::pow2(n as i32 + 1);
        self.norm_order().into_iter().take_while(|&i| *self.norm(i) <= radius).collect()
    }

    /// Closed ball `B(center, r)` in input order.
    pub fn ball_around(&self, center: usize, r: &S) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.d(center, j) <= r).collect()
    }

    /// Induced subspace on `indices` (kept in the given order). The basepoint
    /// must be among them.
    pub fn restrict(&self, indices: &[usize]) -> Result<Self> {
        let basepoint = indices
            .iter()
            .position(|&i| i == self.basepoint)
            .ok_or_else(|| Error::InvalidParameter("restriction must keep the basepoint".into()))?;
        let names = indices.iter().map(|&i| self.names[i].clone()).collect();
        let dist = indices.iter().flat_map(|&i| indices.iter().map(move |&j| self.d(i, j).clone())).collect();
        Ok(MetricSpace { names, dist, basepoint })
    }

    pub fn max_norm(&self) -> S {
        (0..self.len()).map(|i| self.norm(i).clone()).reduce(S::max_of).unwrap_or_else(S::zero)
    }
}

/// Weighted undirected graph in named form.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph<S> {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String, S)>,
    pub basepoint: String,
}

/// Shortest-path metric of a connected graph with positive weights.
pub fn from_graph<S: Scalar>(graph: &Graph<S>) -> Result<MetricSpace<S>> {
    let n = graph.nodes.len();
    if n == 0 {
        return Err(Error::EmptySpace);
    }
    let mut index = HashMap::with_capacity(n);
    for (i, name) in graph.nodes.iter().enumerate() {
        if index.insert(name.as_str(), i).is_some() {
            return Err(Error::DuplicatePoint(name.clone()));
        }
    }
    let lookup = |name: &str| index.get(name).copied().ok_or_else(|| Error::UnknownPoint(name.to_string()));
    let basepoint = lookup(&graph.basepoint)?;

    let mut adj: Vec<Vec<(usize, S)>> = vec![Vec::new(); n];
    for (u, v, w) in &graph.edges {
        if w.total_cmp(&S::zero()) != Ordering::Greater {
            return Err(Error::NonPositiveWeight { u: u.clone(), v: v.clone(), weight: w.to_text() });
        }
        let (a, b) = (lookup(u)?, lookup(v)?);
        if a != b {
            adj[a].push((b, w.clone()));
            adj[b].push((a, w.clone()));
        }
    }

    let mut dist = Vec::with_capacity(n * n);
    for source in 0..n {
        let row = dijkstra(&adj, source);
        for (j, d) in row.into_iter().enumerate() {
            match d {
                Some(d) => dist.push(d),
                None => return Err(Error::Disconnected(graph.nodes[j].clone())),
            }
        }
    }
    Ok(MetricSpace::from_flat(graph.nodes.clone(), dist, basepoint))
}

// Dense O(n^2) Dijkstra; graphs here are small and often dense.
fn dijkstra<S: Scalar>(adj: &[Vec<(usize, S)>], source: usize) -> Vec<Option<S>> {
    let n = adj.len();
    let mut best: Vec<Option<S>> = vec![None; n];
    let mut done = vec![false; n];
    best[source] = Some(S::zero());
    loop {
        let next = (0..n)
            .filter(|&i| !done[i])
            .filter_map(|i| best[i].as_ref().map(|d| (i, d)))
            .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
            .map(|(i, _)| i);
        let Some(u) = next else { break };
        done[u] = true;
        let du = best[u].clone().expect("settled node has a distance");
        for (v, w) in &adj[u] {
            if done[*v] {
                continue;
            }
            let cand = du.clone() + w;
            if best[*v].as_ref().is_none_or(|old| cand < *old) {
                best[*v] = Some(cand);
            }
        }
    }
    best
}

/// Disjoint union of parts `p = 1, 2, ...` with the cross-part distance
/// `max{p, q, d_p(x0^p, x), d_q(x0^q, y)}`.
#[derive(Clone, Debug)]
pub struct AmalgamSpace<S> {
    parts: Vec<MetricSpace<S>>,
    offsets: Vec<usize>,
    space: MetricSpace<S>,
}

impl<S: Scalar> AmalgamSpace<S> {
    pub fn parts(&self) -> &[MetricSpace<S>] {
        &self.parts
    }

    /// The composite space; its basepoint is the basepoint of part 1.
    pub fn space(&self) -> &MetricSpace<S> {
        &self.space
    }

    /// Composite index of point `local` of part `p`. Parts are indexed from
    /// 0 here; the part numbered `p + 1` in names and distances.
    pub fn inclusion(&self, p: usize, local: usize) -> usize {
        self.offsets[p] + local
    }

    /// Inverse of [`AmalgamSpace::inclusion`].
    pub fn locate(&self, index: usize) -> (usize, usize) {
        let p = self.offsets.partition_point(|&o| o <= index) - 1;
        (p, index - self.offsets[p])
    }

    /// Largest deviation `|d(incl x, incl y) - d_p(x, y)|` over part `p`.
    pub fn inclusion_deviation(&self, p: usize) -> S {
        let part = &self.parts[p];
        let mut worst = S::zero();
        for x in 0..part.len() {
            for y in 0..part.len() {
                let dev = (self.space.d(self.inclusion(p, x), self.inclusion(p, y)).clone() - part.d(x, y)).abs();
                worst = worst.max_of(dev);
            }
        }
        worst
    }
}

pub fn amalgamate<S: Scalar>(parts: &[MetricSpace<S>]) -> Result<AmalgamSpace<S>> {
    if parts.is_empty() {
        return Err(Error::EmptyAmalgam);
    }
    let mut offsets = Vec::with_capacity(parts.len());
    let mut owner = Vec::new();
    let mut names = Vec::new();
    for (k, part) in parts.iter().enumerate() {
        offsets.push(names.len());
        for (local, name) in part.names().iter().enumerate() {
            names.push(format!("{}:{}", k + 1, name));
            owner.push((k, local));
        }
    }
    let n = names.len();
    let mut dist = Vec::with_capacity(n * n);
    for &(pa, x) in &owner {
        for &(pb, y) in &owner {
            let d = if pa == pb {
                parts[pa].d(x, y).clone()
            } else {
                S::from_i64(pa as i64 + 1)
                    .max_of(S::from_i64(pb as i64 + 1))
                    .max_of(parts[pa].norm(x).clone())
                    .max_of(parts[pb].norm(y).clone())
            };
            dist.push(d);
        }
    }
    let space = MetricSpace::from_flat(names, dist, parts[0].basepoint());
    Ok(AmalgamSpace { parts: parts.to_vec(), offsets, space })
}

/// Sampled bounded-geometry function `C(r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometryProfile<S> {
    pub radii: Vec<S>,
    pub counts: Vec<usize>,
}

fn check_radii<S: Scalar>(radii: &[S]) -> Result<()> {
    if radii.iter().any(|r| r.total_cmp(&S::zero()) != Ordering::Greater) {
        return Err(Error::InvalidParameter("radii must be positive".into()));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("radii must be increasing".into()));
    }
    Ok(())
}

/// `C(r) = max_x |B(x, r)|` over all centers of a finite space.
pub fn geometry_profile<S: Scalar>(space: &MetricSpace<S>, radii: &[S]) -> Result<GeometryProfile<S>> {
    check_radii(radii)?;
    let counts = radii
        .iter()
        .map(|r| (0..space.len()).map(|x| space.ball_around(x, r).len()).max().unwrap_or(0))
        .collect();
    Ok(GeometryProfile { radii: radii.to_vec(), counts })
}

/// A locally finite space accessed through balls around its basepoint.
///
/// Implementations must return nested balls whose tables restrict to one
/// another, each containing the basepoint.
pub trait GrowableSpace<S: Scalar> {
    fn ball(&self, r: &S) -> MetricSpace<S>;
}

impl<S: Scalar> GrowableSpace<S> for MetricSpace<S> {
    fn ball(&self, r: &S) -> MetricSpace<S> {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.norm(i) <= r).collect();
        self.restrict(&keep).expect("basepoint has norm 0")
    }
}

/// Bounded-geometry profile of a growable space, with centers restricted to
/// `B(t0, center_radius)`.
///
/// Balls around those centers are counted inside `B(t0, center_radius + r)`,
/// which contains them by the triangle inequality, so counts are exact.
pub fn geometry_profile_growable<S: Scalar, G: GrowableSpace<S> + ?Sized>(
    space: &G,
    radii: &[S],
    center_radius: &S,
) -> Result<GeometryProfile<S>> {
    check_radii(radii)?;
    let Some(max_r) = radii.last() else {
        return Ok(GeometryProfile { radii: Vec::new(), counts: Vec::new() });
    };
    let region = space.ball(&(center_radius.clone() + max_r));
    let centers: Vec<usize> = (0..region.len()).filter(|&i| region.norm(i) <= center_radius).collect();
    let counts = radii
        .iter()
        .map(|r| centers.iter().map(|&x| region.ball_around(x, r).len()).max().unwrap_or(0))
        .collect();
    Ok(GeometryProfile { radii: radii.to_vec(), counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;

    fn q(n: i64) -> Exact {
        Exact::from(n)
    }

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("p{i}")).collect()
    }

    #[test]
    fn two_point_space_is_ok() {
        let s = MetricSpace::new(names(2), vec![vec![q(0), q(3)], vec![q(3), q(0)]], 0).unwrap();
        assert!(s.validate().is_ok());
    }

    #[test]
    fn triangle_violation_reports_defect() {
        let rows = vec![vec![q(0), q(1), q(10)], vec![q(1), q(0), q(1)], vec![q(10), q(1), q(0)]];
        let report = validate_table(&rows).unwrap();
        assert_eq!(report.total, 1);
        assert_eq!(report.violations[0], Violation::Triangle { i: 0, j: 1, k: 2, defect: q(8) });
    }

    #[test]
    fn ragged_table_is_structural_error() {
        let rows = vec![vec![q(0), q(1)], vec![q(1)]];
        assert!(matches!(validate_table(&rows), Err(Error::DimensionMismatch { bad_row: 1, .. })));
        assert!(matches!(
            MetricSpace::new(names(3), vec![vec![q(0)]], 0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn duplicate_points_rejected() {
        let s = MetricSpace::new(names(2), vec![vec![q(0), q(0)], vec![q(0), q(0)]], 0).unwrap();
        let report = s.validate();
        assert!(matches!(report.violations[0], Violation::NotPositive { i: 0, j: 1, .. }));
        assert!(s.ensure_metric().is_err());
    }

    #[test]
    fn asymmetric_table_detected() {
        let rows = vec![vec![q(0), q(2)], vec![q(3), q(0)]];
        let report = validate_table(&rows).unwrap();
        assert!(report.violations.contains(&Violation::Asymmetric { i: 0, j: 1, defect: q(1) }));
    }

    fn graph(edges: &[(&str, &str, i64)], base: &str) -> Graph<Exact> {
        let mut nodes: Vec<String> = Vec::new();
        for (u, v, _) in edges {
            for x in [u, v] {
                if !nodes.iter().any(|n| n == x) {
                    nodes.push(x.to_string());
                }
            }
        }
        Graph {
            nodes,
            edges: edges.iter().map(|(u, v, w)| (u.to_string(), v.to_string(), q(*w))).collect(),
            basepoint: base.to_string(),
        }
    }

    #[test]
    fn path_graph_metric() {
        let s = from_graph(&graph(&[("a", "b", 1), ("b", "c", 1)], "a")).unwrap();
        assert_eq!(*s.d(0, 2), q(2));
        assert_eq!(s.basepoint(), 0);
        let single = from_graph(&graph(&[("a", "b", 7)], "b")).unwrap();
        assert_eq!(*single.d(0, 1), q(7));
        assert_eq!(single.basepoint(), 1);
    }

    #[test]
    fn graph_errors() {
        let mut g = graph(&[("a", "b", 1)], "a");
        g.nodes.push("z".into());
        assert!(matches!(from_graph(&g), Err(Error::Disconnected(n)) if n == "z"));
        let g = graph(&[("a", "b", 0)], "a");
        assert!(matches!(from_graph(&g), Err(Error::NonPositiveWeight { .. })));
        let g = graph(&[("a", "b", 1)], "q");
        assert!(matches!(from_graph(&g), Err(Error::UnknownPoint(_))));
    }

    #[test]
    fn rescale_rule() {
        let s = MetricSpace::new(names(2), vec![vec![q(0), Exact::new(1, 2)], vec![Exact::new(1, 2), q(0)]], 0)
            .unwrap();
        let (r, scale) = s.rescale_to_unit_gap().unwrap();
        assert_eq!(scale, q(4));
        assert_eq!(*r.norm(1), q(2));

        let s = MetricSpace::new(names(2), vec![vec![q(0), q(2)], vec![q(2), q(0)]], 0).unwrap();
        let (r, scale) = s.rescale_to_unit_gap().unwrap();
        assert_eq!(scale, q(1));
        assert_eq!(r, s);

        let rows = vec![vec![q(0), q(1), q(10)], vec![q(1), q(0), q(9)], vec![q(10), q(9), q(0)]];
        let (r, scale) = MetricSpace::new(names(3), rows, 0).unwrap().rescale_to_unit_gap().unwrap();
        assert_eq!(scale, q(2));
        assert_eq!((r.norm(1).clone(), r.norm(2).clone()), (q(2), q(20)));

        let one = MetricSpace::new(names(1), vec![vec![q(0)]], 0).unwrap();
        assert!(matches!(one.rescale_to_unit_gap(), Err(Error::SinglePoint)));
    }

    fn line(norms: &[i64]) -> MetricSpace<Exact> {
        let rows = norms.iter().map(|a| norms.iter().map(|b| q((a - b).abs())).collect()).collect();
        MetricSpace::new(names(norms.len()), rows, 0).unwrap()
    }

    #[test]
    fn balls_are_closed_nested_and_ordered() {
        let s = line(&[0, 5, 3, 2]);
        assert_eq!(s.ball(0), vec![0, 3]);
        assert_eq!(s.ball(1), vec![0, 3, 2]);
        assert_eq!(s.ball(2), vec![0, 3, 2, 1]);
        let t = line(&[0, 4, 2]);
        assert_eq!(t.ball(1), vec![0, 2, 1]);
    }

    #[test]
    fn amalgam_formula() {
        let p1 = line(&[0, 5]);
        let p2 = line(&[0, 1]);
        let a = amalgamate(&[p1, p2]).unwrap();
        let x = a.inclusion(0, 1);
        let y = a.inclusion(1, 1);
        assert_eq!(*a.space().d(x, y), q(5));
        assert_eq!(a.locate(y), (1, 1));
        assert_eq!(a.space().basepoint(), 0);
        assert!(a.space().validate().is_ok());
        assert!(amalgamate::<Exact>(&[]).is_err());
    }

    #[test]
    fn amalgam_basepoints_distance_is_max_index() {
        let parts: Vec<_> = (0..7).map(|_| line(&[0, 1])).collect();
        let a = amalgamate(&parts).unwrap();
        assert_eq!(*a.space().d(a.inclusion(2, 0), a.inclusion(6, 0)), q(7));
    }

    #[test]
    fn single_part_amalgam_equals_part() {
        let p = line(&[0, 2, 7]);
        let a = amalgamate(std::slice::from_ref(&p)).unwrap();
        assert_eq!(a.space().rows(), p.rows());
        assert!(a.inclusion_deviation(0).is_zero());
    }

    #[test]
    fn profile_counts() {
        let s = line(&[-3, -2, -1, 0, 1, 2, 3]).with_basepoint(3).unwrap();
        let prof = geometry_profile(&s, &[Exact::new(1, 2), Exact::new(3, 2), q(2)]).unwrap();
        assert_eq!(prof.counts, vec![1, 3, 5]);
        assert!(geometry_profile(&s, &[q(2), q(1)]).is_err());
    }

    #[test]
    fn growable_ball_restricts() {
        let s = line(&[0, 1, 2, 3, 4]);
        let b = GrowableSpace::ball(&s, &q(2));
        assert_eq!(b.len(), 3);
        assert!(b.validate().is_ok());
        let prof = geometry_profile_growable(&s, &[q(1)], &q(1)).unwrap();
        assert_eq!(prof.counts, vec![3]);
    }
}
