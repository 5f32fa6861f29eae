//! Seeded generators for test corpora: lattice balls, random graphs,
//! random trees and uniform point clouds.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::{from_graph, Graph, GrowableSpace, MetricSpace};
use crate::scalar::Scalar;

/// Resolution of [`Family::UniformPoints`] coordinates: multiples of 1/1024.
pub const UNIFORM_GRID: i64 = 1024;

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// Closed l1 ball of radius `radius` in `Z^dim`, basepoint at the origin.
    Grid { dim: usize, radius: usize },
    /// G(n, p) with integer weights in 1..=9.
    RandomGraph { n: usize, p: f64, seed: u64 },
    /// Random recursive tree with half-integer weights in 1/2..=4.
    RandomTree { n: usize, seed: u64 },
    /// `n` distinct points of the 1/1024 grid in `[0,1)^dim` under the l1 metric.
    UniformPoints { n: usize, dim: usize, seed: u64 },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Grid { dim, radius } => write!(f, "grid(dim={dim},radius={radius})"),
            Family::RandomGraph { n, p, seed } => write!(f, "random_graph(n={n},p={p},seed={seed})"),
            Family::RandomTree { n, seed } => write!(f, "random_tree(n={n},seed={seed})"),
            Family::UniformPoints { n, dim, seed } => write!(f, "uniform_points(n={n},dim={dim},seed={seed})"),
        }
    }
}

/// Family names as accepted on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    Grid,
    RandomGraph,
    RandomTree,
    UniformPoints,
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('_', "-").as_str() {
            "grid" => Ok(FamilyKind::Grid),
            "random-graph" | "graph" => Ok(FamilyKind::RandomGraph),
            "random-tree" | "tree" => Ok(FamilyKind::RandomTree),
            "uniform-points" | "uniform" => Ok(FamilyKind::UniformPoints),
            other => Err(Error::InvalidParameter(format!("unknown family `{other}`"))),
        }
    }
}

/// A generated space plus what the generator had to do to produce it.
#[derive(Clone, Debug)]
pub struct Generated<S> {
    pub family: Family,
    pub space: MetricSpace<S>,
    /// Edge list for graph families, as index pairs with weights.
    pub edges: Vec<(usize, usize, S)>,
    /// Edges added to join components of a disconnected random graph.
    pub repair_edges: Vec<(usize, usize)>,
}

pub fn generate<S: Scalar>(family: &Family) -> Result<Generated<S>> {
    match *family {
        Family::Grid { dim, radius } => {
            check_range("dim", dim, 1, 4)?;
            check_range("radius", radius, 1, 64)?;
            Ok(Generated { family: family.clone(), space: lattice_ball(dim, radius as i64), edges: Vec::new(), repair_edges: Vec::new() })
        }
        Family::RandomGraph { n, p, seed } => random_graph(n, p, seed),
        Family::RandomTree { n, seed } => random_tree(n, seed),
        Family::UniformPoints { n, dim, seed } => uniform_points(n, dim, seed),
    }
}

fn check_range(what: &str, v: usize, lo: usize, hi: usize) -> Result<()> {
    if (lo..=hi).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} = {v} outside {lo}..={hi}")))
    }
}

fn lattice_name(p: &[i64]) -> String {
    let coords: Vec<String> = p.iter().map(i64::to_string).collect();
    format!("({})", coords.join(","))
}

/// Lattice points with l1 norm at most `radius`, in lexicographic order.
fn lattice_points(dim: usize, radius: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; dim];
    fn rec(k: usize, budget: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for c in -budget..=budget {
            cur[k] = c;
            rec(k + 1, budget - c.abs(), cur, out);
        }
    }
    rec(0, radius, &mut cur, &mut out);
    out
}

fn lattice_ball<S: Scalar>(dim: usize, radius: i64) -> MetricSpace<S> {
    let pts = lattice_points(dim, radius);
    let names = pts.iter().map(|p| lattice_name(p)).collect();
    let dist = pts
        .iter()
        .flat_map(|a| pts.iter().map(move |b| S::from_i64(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum())))
        .collect();
    let origin = pts.iter().position(|p| p.iter().all(|&c| c == 0)).expect("origin in ball");
    MetricSpace::from_flat(names, dist, origin)
}

/// `Z^dim` with the l1 metric, materialized one ball at a time.
#[derive(Clone, Copy, Debug)]
pub struct Lattice {
    pub dim: usize,
}

impl<S: Scalar> GrowableSpace<S> for Lattice {
    fn ball(&self, r: &S) -> MetricSpace<S> {
        let radius = if r.total_cmp(&S::zero()).is_lt() { 0 } else { r.to_f64().floor() as i64 };
        // Integer distances: the float floor can only be off at exact integers.
        let radius = (radius - 1..=radius + 1).rev().find(|&k| k >= 0 && S::from_i64(k) <= *r).unwrap_or(0);
        lattice_ball(self.dim, radius)
    }
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn node_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}

fn build_graph<S: Scalar>(n: usize, edges: &[(usize, usize, S)]) -> Result<MetricSpace<S>> {
    let nodes = node_names(n);
    let graph = Graph {
        edges: edges.iter().map(|(u, v, w)| (nodes[*u].clone(), nodes[*v].clone(), w.clone())).collect(),
        basepoint: nodes[0].clone(),
        nodes,
    };
    from_graph(&graph)
}

fn random_graph<S: Scalar>(n: usize, p: f64, seed: u64) -> Result<Generated<S>> {
    check_range("n", n, 2, 2000)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
    }
    let mut rng = rng_for(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v, S::from_i64(rng.random_range(1..=9))));
            }
        }
    }
    // Join every other component to the basepoint's component.
    let mut comp = components(n, &edges);
    let mut repair_edges = Vec::new();
    loop {
        let main = comp[0];
        let Some(stray) = (0..n).find(|&v| comp[v] != main) else { break };
        let members: Vec<usize> = (0..n).filter(|&v| comp[v] == comp[stray]).collect();
        let inside: Vec<usize> = (0..n).filter(|&v| comp[v] == main).collect();
        let a = inside[rng.random_range(0..inside.len())];
        let b = members[rng.random_range(0..members.len())];
        let (u, v) = (a.min(b), a.max(b));
        edges.push((u, v, S::from_i64(rng.random_range(1..=9))));
        repair_edges.push((u, v));
        comp = components(n, &edges);
    }
    let space = build_graph(n, &edges)?;
    Ok(Generated { family: Family::RandomGraph { n, p, seed }, space, edges, repair_edges })
}

fn components<S>(n: usize, edges: &[(usize, usize, S)]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = x;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    for (u, v, _) in edges {
        let (a, b) = (find(&mut parent, *u), find(&mut parent, *v));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    (0..n).map(|v| find(&mut parent, v)).collect()
}

fn random_tree<S: Scalar>(n: usize, seed: u64) -> Result<Generated<S>> {
    check_range("n", n, 2, 2000)?;
    let mut rng = rng_for(seed);
    let edges: Vec<(usize, usize, S)> = (1..n)
        .map(|v| (rng.random_range(0..v), v, S::from_ratio(rng.random_range(1..=8), 2)))
        .collect();
    let space = build_graph(n, &edges)?;
    Ok(Generated { family: Family::RandomTree { n, seed }, space, edges, repair_edges: Vec::new() })
}

fn uniform_points<S: Scalar>(n: usize, dim: usize, seed: u64) -> Result<Generated<S>> {
    check_range("n", n, 2, 2000)?;
    check_range("dim", dim, 1, 8)?;
    let mut rng = rng_for(seed);
    let mut pts: Vec<Vec<i64>> = Vec::with_capacity(n);
    while pts.len() < n {
        let p: Vec<i64> = (0..dim).map(|_| rng.random_range(0..UNIFORM_GRID)).collect();
        // Duplicates would be distinct names at distance 0.
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    let dist = pts
        .iter()
        .flat_map(|a| {
            pts.iter().map(move |b| S::from_ratio(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(), UNIFORM_GRID))
        })
        .collect();
    let space = MetricSpace::from_flat(node_names(n), dist, 0);
    Ok(Generated { family: Family::UniformPoints { n, dim, seed }, space, edges: Vec::new(), repair_edges: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;

    #[test]
    fn grid_2_2_has_13_points() {
        let g = generate::<Exact>(&Family::Grid { dim: 2, radius: 2 }).unwrap();
        assert_eq!(g.space.len(), 13);
        assert_eq!(g.space.name(g.space.basepoint()), "(0,0)");
        assert!(g.space.validate().is_ok());
    }

    #[test]
    fn tree_has_n_minus_one_edges() {
        let g = generate::<Exact>(&Family::RandomTree { n: 40, seed: 3 }).unwrap();
        assert_eq!(g.edges.len(), 39);
        assert!(g.space.validate().is_ok());
    }

    #[test]
    fn same_seed_same_table() {
        for fam in [
            Family::RandomGraph { n: 25, p: 0.1, seed: 9 },
            Family::RandomTree { n: 25, seed: 9 },
            Family::UniformPoints { n: 25, dim: 3, seed: 9 },
        ] {
            let a = generate::<Exact>(&fam).unwrap();
            let b = generate::<Exact>(&fam).unwrap();
            assert_eq!(a.space, b.space, "{fam}");
        }
    }

    #[test]
    fn sparse_graph_gets_repaired() {
        let g = generate::<Exact>(&Family::RandomGraph { n: 30, p: 0.02, seed: 1 }).unwrap();
        assert!(!g.repair_edges.is_empty());
        assert!(g.space.validate().is_ok());
        let dense = generate::<Exact>(&Family::RandomGraph { n: 30, p: 0.9, seed: 1 }).unwrap();
        assert!(dense.repair_edges.is_empty());
    }

    #[test]
    fn bad_parameters() {
        assert!(generate::<f64>(&Family::Grid { dim: 0, radius: 2 }).is_err());
        assert!(generate::<f64>(&Family::RandomGraph { n: 10, p: 1.5, seed: 0 }).is_err());
        assert!(generate::<f64>(&Family::RandomTree { n: 1, seed: 0 }).is_err());
    }

    #[test]
    fn lattice_balls_nest() {
        let lat = Lattice { dim: 2 };
        let small: MetricSpace<Exact> = lat.ball(&Exact::new(3, 2));
        let big: MetricSpace<Exact> = lat.ball(&Exact::from(2));
        assert_eq!(small.len(), 5);
        assert_eq!(big.len(), 13);
        for (i, name) in small.names().iter().enumerate() {
            let bi = big.index_of(name).unwrap();
            for (j, other) in small.names().iter().enumerate() {
                assert_eq!(small.d(i, j), big.d(bi, big.index_of(other).unwrap()));
            }
        }
    }
}
