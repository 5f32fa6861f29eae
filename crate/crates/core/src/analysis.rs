//! Measurement and certification of an [`Embedding`].
//!
//! [`distortion`] measures `||f||_Lip`, `||f^{-1}||_Lip` and their product by
//! exhaustive pair scan. [`certify_cases`] re-derives, for every pair, each
//! intermediate inequality of the Lipschitz and inverse-Lipschitz case
//! analysis with both sides materialized, so a single failing step is
//! reported with its values.

use std::cmp::Ordering;
use std::fmt;

use crate::frechet::CoordVector;
use crate::glue::Embedding;
use crate::metric::MetricSpace;
use crate::scalar::Scalar;

/// Guaranteed Lipschitz constant of `f`.
pub const LIP_BOUND: i64 = 9;
/// Guaranteed Lipschitz constant of `f^{-1}`.
pub const COLIP_BOUND: i64 = 24;
/// `LIP_BOUND * COLIP_BOUND`.
pub const DISTORTION_BOUND: i64 = 216;
/// Lower envelope factor: `||f(t)|| >= |t| / 16`.
pub const ENVELOPE_LOWER_DENOM: i64 = 16;
/// Allowance for `||Π_n||` in a general decomposition.
pub const PROJECTION_ALLOWANCE: i64 = 4;

/// Upper-triangular table of `||f(t) - f(t')||`.
#[derive(Clone, Debug)]
pub struct PairTable<S> {
    n: usize,
    values: Vec<S>,
}

impl<S: Scalar> PairTable<S> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut values = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                values.push(f(i, j));
            }
        }
        PairTable { n, values }
    }

    pub fn of(embedding: &Embedding<S>) -> Self {
        Self::from_fn(embedding.len(), |i, j| embedding.pairwise_image_distance(i, j))
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        debug_assert!(i != j);
        // Row i starts after sum_{r<i} (n - 1 - r) entries.
        &self.values[i * (2 * self.n - i - 1) / 2 + (j - i - 1)]
    }

    pub fn pair_count(&self) -> usize {
        self.values.len()
    }
}

/// Exact bi-Lipschitz constants of a map on a finite space.
#[derive(Clone, Debug, PartialEq)]
pub struct DistortionReport<S> {
    /// `sup ||Δf|| / d`.
    pub lip: S,
    pub lip_witness: (usize, usize),
    /// `sup d / ||Δf||`; `None` when two points collide.
    pub colip: Option<S>,
    pub colip_witness: Option<(usize, usize)>,
    /// `lip * colip`.
    pub dist: Option<S>,
    /// A pair of distinct points with equal images.
    pub collision: Option<(usize, usize)>,
    pub pair_count: usize,
}

impl<S: Scalar> DistortionReport<S> {
    pub fn lip_ok(&self) -> bool {
        self.lip.le_tol(&S::from_i64(LIP_BOUND))
    }

    pub fn colip_ok(&self) -> bool {
        self.colip.as_ref().is_some_and(|c| c.le_tol(&S::from_i64(COLIP_BOUND)))
    }

    pub fn dist_ok(&self) -> bool {
        self.dist.as_ref().is_some_and(|d| d.le_tol(&S::from_i64(DISTORTION_BOUND)))
    }

    pub fn bounds_hold(&self) -> bool {
        self.lip_ok() && self.colip_ok() && self.dist_ok()
    }
}

/// Distortion of any map given by its pairwise image distances.
pub fn distortion_of<S: Scalar>(space: &MetricSpace<S>, image_dist: impl Fn(usize, usize) -> S) -> DistortionReport<S> {
    let n = space.len();
    assert!(n >= 2, "distortion needs two points");
    let mut lip: Option<(S, (usize, usize))> = None;
    let mut colip: Option<(S, (usize, usize))> = None;
    let mut collision = None;
    for i in 0..n {
        for j in i + 1..n {
            let img = image_dist(i, j);
            let d = space.d(i, j);
            let up = img.clone() / d;
            if lip.as_ref().is_none_or(|(best, _)| up > *best) {
                lip = Some((up, (i, j)));
            }
            if img.is_zero() {
                collision.get_or_insert((i, j));
                continue;
            }
            let down = d.clone() / &img;
            if colip.as_ref().is_none_or(|(best, _)| down > *best) {
                colip = Some((down, (i, j)));
            }
        }
    }
    let (lip, lip_witness) = lip.expect("at least one pair");
    let (colip, colip_witness) = match (collision, colip) {
        (None, Some((c, w))) => (Some(c), Some(w)),
        _ => (None, None),
    };
    let dist = colip.as_ref().map(|c| lip.clone() * c);
    DistortionReport { lip, lip_witness, colip, colip_witness, dist, collision, pair_count: n * (n - 1) / 2 }
}

pub fn distortion<S: Scalar>(embedding: &Embedding<S>) -> DistortionReport<S> {
    distortion_with(embedding, &PairTable::of(embedding))
}

pub fn distortion_with<S: Scalar>(embedding: &Embedding<S>, table: &PairTable<S>) -> DistortionReport<S> {
    distortion_of(embedding.space(), |i, j| table.get(i, j).clone())
}

/// Lipschitz case of a pair `|t| <= |t'|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LipCase {
    /// `|t| <= |t'| / 2`.
    I,
    /// Same shell.
    II1,
    /// Adjacent shells with `|t| > |t'| / 2`.
    II2,
}

impl fmt::Display for LipCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LipCase::I => "I",
            LipCase::II1 => "II.1",
            LipCase::II2 => "II.2",
        })
    }
}

/// Inverse-Lipschitz case of a pair `|t| <= |t'|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InverseCase {
    /// `t = t0`; certified through the norm envelope.
    Basepoint,
    /// Same shell.
    SameShell,
    /// Shells `n` and `n + 1`.
    Adjacent,
    /// Shells at least two apart.
    Distant,
}

impl fmt::Display for InverseCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InverseCase::Basepoint => "0",
            InverseCase::SameShell => "1",
            InverseCase::Adjacent => "2",
            InverseCase::Distant => "3",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "==",
        })
    }
}

/// One materialized inequality.
#[derive(Clone, Debug, PartialEq)]
pub struct Check<S> {
    pub label: &'static str,
    pub lhs: S,
    pub relation: Relation,
    pub rhs: S,
    pub pass: bool,
}

impl<S: Scalar> Check<S> {
    fn new(label: &'static str, lhs: S, relation: Relation, rhs: S) -> Self {
        let pass = match relation {
            Relation::Le => lhs.le_tol(&rhs),
            Relation::Ge => lhs.ge_tol(&rhs),
            Relation::Eq => lhs.eq_tol(&rhs),
        };
        Check { label, lhs, relation, rhs, pass }
    }
}

impl<S: Scalar> fmt::Display for Check<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} {} {}", self.label, self.lhs, self.relation, self.rhs)
    }
}

/// Everything certified for one pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PairEntry<S> {
    /// The point of smaller norm (ties broken by index).
    pub t: usize,
    pub u: usize,
    pub d: S,
    pub image_dist: S,
    pub lip_case: LipCase,
    pub inv_case: InverseCase,
    pub lip_checks: Vec<Check<S>>,
    pub inv_checks: Vec<Check<S>>,
}

impl<S: Scalar> PairEntry<S> {
    pub fn lip_pass(&self) -> bool {
        self.lip_checks.iter().all(|c| c.pass)
    }

    pub fn inv_pass(&self) -> bool {
        self.inv_checks.iter().all(|c| c.pass)
    }

    pub fn passed(&self) -> bool {
        self.lip_pass() && self.inv_pass()
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check<S>> {
        self.lip_checks.iter().chain(&self.inv_checks).filter(|c| !c.pass)
    }
}

/// Per-pair certification of the whole case analysis.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseLedger<S> {
    pub entries: Vec<PairEntry<S>>,
}

impl<S: Scalar> CaseLedger<S> {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(PairEntry::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PairEntry<S>> {
        self.entries.iter().filter(|e| !e.passed())
    }

    pub fn check_count(&self) -> usize {
        self.entries.iter().map(|e| e.lip_checks.len() + e.inv_checks.len()).sum()
    }

    pub fn lip_case_count(&self, case: LipCase) -> usize {
        self.entries.iter().filter(|e| e.lip_case == case).count()
    }

    pub fn inv_case_count(&self, case: InverseCase) -> usize {
        self.entries.iter().filter(|e| e.inv_case == case).count()
    }
}

/// Which cases a pair with norms `a <= b` and shells falls into.
///
/// `shells` is `None` for the basepoint.
pub fn classify<S: Scalar>(a: &S, b: &S, shell_t: Option<usize>, shell_u: Option<usize>) -> (LipCase, InverseCase) {
    let lip = if a.clone() * &S::from_i64(2) <= *b {
        LipCase::I
    } else if shell_t == shell_u {
        LipCase::II1
    } else {
        LipCase::II2
    };
    let inv = match (shell_t, shell_u) {
        (None, _) => InverseCase::Basepoint,
        (Some(n), Some(p)) if n == p => InverseCase::SameShell,
        (Some(n), Some(p)) if p == n + 1 => InverseCase::Adjacent,
        _ => InverseCase::Distant,
    };
    (lip, inv)
}

/// Per-point quantities shared by every pair the point belongs to.
struct PointCache<S> {
    image_norm: Vec<S>,
    /// `||f_n(t)||` and `||f_{n+1}(t)||`.
    component_norms: Vec<Option<[S; 2]>>,
    /// `(k, ||Π_k f(t) - w_k f_k(t)||)` over the blocks `t` can touch, where
    /// `w_k` is the construction's weight (zero outside the point's shells).
    defects: Vec<Vec<(usize, S)>>,
}

impl<S: Scalar> PointCache<S> {
    fn new(e: &Embedding<S>) -> Self {
        let n = e.len();
        let mut image_norm = Vec::with_capacity(n);
        let mut component_norms = Vec::with_capacity(n);
        let mut defects = Vec::with_capacity(n);
        for t in 0..n {
            let image = e.evaluate(t);
            image_norm.push(image.norm());
            let mut d: Vec<(usize, S)> = Vec::new();
            let shell = e.shells().get(t);
            if let Some(sh) = shell {
                let comps = [e.component(t, sh.n), e.component(t, sh.n + 1)];
                component_norms.push(match comps {
                    [Some(a), Some(b)] => Some([a.sup_norm(), b.sup_norm()]),
                    _ => None,
                });
                let weights = [sh.lambda.clone(), S::one() - &sh.lambda];
                for (j, k) in [sh.n, sh.n + 1].into_iter().enumerate() {
                    let defect = match (image.block(k), comps[j]) {
                        (Some(x), Some(c)) if x.same_indexing(c) => {
                            x.values().iter().zip(c.values()).fold(S::zero(), |acc, (x, c)| {
                                acc.max_of((x.clone() - &(c.clone() * &weights[j])).abs())
                            })
                        }
                        (None, Some(c)) => c.sup_norm() * &weights[j],
                        (Some(x), None) => x.sup_norm(),
                        (None, None) => S::zero(),
                        // Stored block over the wrong ball: never equal to the construction.
                        (Some(x), Some(_)) => x.sup_norm() + &S::one(),
                    };
                    d.push((k, defect));
                }
            } else {
                component_norms.push(None);
            }
            for (k, block) in image.blocks() {
                if !shell.is_some_and(|sh| k == sh.n || k == sh.n + 1) {
                    d.push((k, block.sup_norm()));
                }
            }
            defects.push(d);
        }
        PointCache { image_norm, component_norms, defects }
    }

    fn defect(&self, t: usize, k: usize) -> S {
        self.defects[t].iter().find(|(j, _)| *j == k).map_or_else(S::zero, |(_, d)| d.clone())
    }
}

struct PairView<'a, S: Scalar> {
    e: &'a Embedding<S>,
    cache: &'a PointCache<S>,
    t: usize,
    u: usize,
    a: S,
    b: S,
    d: S,
    delta: S,
}

impl<S: Scalar> PairView<'_, S> {
    fn lambda(&self, p: usize) -> S {
        self.e.shells().get(p).expect("non-basepoint").lambda.clone()
    }

    fn shell(&self, p: usize) -> usize {
        self.e.shells().get(p).expect("non-basepoint").n
    }

    fn comp(&self, p: usize, k: usize) -> &CoordVector<S> {
        self.e.component(p, k).expect("component within the point's shells")
    }

    fn comp_norms(&self, p: usize) -> &[S; 2] {
        self.cache.component_norms[p].as_ref().expect("non-basepoint")
    }

    /// `||Π_k (f(t) - f(t'))||` from the stored image.
    fn projected_norm(&self, k: usize) -> S {
        let (x, y) = (self.e.evaluate(self.t).block(k), self.e.evaluate(self.u).block(k));
        match (x, y) {
            (Some(x), Some(y)) if x.same_indexing(y) => x.sup_dist(y),
            (Some(x), Some(y)) => x.sup_norm() + &y.sup_norm() + &S::one(),
            (Some(x), None) | (None, Some(x)) => x.sup_norm(),
            (None, None) => S::zero(),
        }
    }

    /// `φ_k(p)` at coordinate `s`, straight from the distances.
    fn phi_at(&self, p: usize, s: usize) -> S {
        let space = self.e.space();
        space.d(s, p).clone() - space.norm(s)
    }

    /// Checks that `Π_k Δ` is what the construction says, that the operator
    /// certificate bounds it below at a coordinate, and the displayed lower bound.
    fn block_lower(
        &self,
        checks: &mut Vec<Check<S>>,
        k: usize,
        coordinate: S,
        closed_form: S,
        labels: [&'static str; 5],
    ) -> S {
        let norm = self.projected_norm(k);
        let conorm = self.e.operator(k).conorm_bound.clone();
        let defect = self.cache.defect(self.t, k) + &self.cache.defect(self.u, k);
        checks.push(Check::new(labels[0], defect, Relation::Eq, S::zero()));
        checks.push(Check::new(labels[1], coordinate.clone(), Relation::Eq, closed_form.clone()));
        checks.push(Check::new(labels[2], conorm.clone(), Relation::Ge, S::from_ratio(1, 2)));
        checks.push(Check::new(labels[3], norm.clone(), Relation::Ge, conorm * &coordinate.abs()));
        checks.push(Check::new(labels[4], S::from_i64(2) * &norm, Relation::Ge, closed_form));
        checks.push(Check::new(
            "projection_allowance",
            norm.clone(),
            Relation::Le,
            S::from_i64(PROJECTION_ALLOWANCE) * &self.delta,
        ));
        norm
    }
}

fn lip_checks<S: Scalar>(v: &PairView<'_, S>, case: LipCase) -> Vec<Check<S>> {
    let (a, b, d, delta) = (&v.a, &v.b, &v.d, &v.delta);
    let two = S::from_i64(2);
    let three = S::from_i64(3);
    let mut c = Vec::new();
    match case {
        LipCase::I => {
            let ft = v.cache.image_norm[v.t].clone();
            let fu = v.cache.image_norm[v.u].clone();
            c.push(Check::new("norm_f_t_le_norm_t", ft.clone(), Relation::Le, a.clone()));
            c.push(Check::new("norm_f_u_le_norm_u", fu.clone(), Relation::Le, b.clone()));
            c.push(Check::new("triangle", delta.clone(), Relation::Le, ft + &fu));
            c.push(Check::new("norms_le_sum", a.clone() + b, Relation::Le, S::from_ratio(3, 2) * b));
            c.push(Check::new("three_halves_le_gap", S::from_ratio(3, 2) * b, Relation::Le, three.clone() * &(b.clone() - a)));
            c.push(Check::new("gap_le_d", three.clone() * &(b.clone() - a), Relation::Le, three.clone() * d));
            c.push(Check::new("lip_I", delta.clone(), Relation::Le, three * d));
        }
        LipCase::II1 => {
            let n = v.shell(v.t);
            let (l, lp) = (v.lambda(v.t), v.lambda(v.u));
            let p2n = S::pow2(n as i32);
            let wgap = (l.clone() - &lp).abs();
            let lo = v.comp(v.t, n).sup_dist(v.comp(v.u, n));
            let hi = v.comp(v.t, n + 1).sup_dist(v.comp(v.u, n + 1));
            c.push(Check::new("weight_gap", wgap.clone(), Relation::Eq, (b.clone() - a) / &p2n));
            c.push(Check::new("weight_gap_le_d", (b.clone() - a) / &p2n, Relation::Le, d.clone() / &p2n));
            c.push(Check::new("component_n_lip", lo.clone(), Relation::Le, d.clone()));
            c.push(Check::new("component_n1_lip", hi.clone(), Relation::Le, d.clone()));
            let split = l.clone() * &lo + &((S::one() - &l) * &hi) + &(two.clone() * &wgap * b);
            c.push(Check::new("split", delta.clone(), Relation::Le, split.clone()));
            let bound = d.clone() + &(S::pow2(n as i32 + 2) * &wgap);
            c.push(Check::new("split_le", split, Relation::Le, bound.clone()));
            c.push(Check::new("lip_II1_chain", bound, Relation::Le, S::from_i64(5) * d));
            c.push(Check::new("lip_II1", delta.clone(), Relation::Le, S::from_i64(5) * d));
        }
        LipCase::II2 => {
            let n = v.shell(v.t);
            let (l, lp) = (v.lambda(v.t), v.lambda(v.u));
            let p2n = S::pow2(n as i32);
            let p2n1 = S::pow2(n as i32 + 1);
            let upper = S::one() - &lp;
            c.push(Check::new("lambda_le_gap", l.clone(), Relation::Le, (b.clone() - a) / &p2n));
            c.push(Check::new("gap_le_d", (b.clone() - a) / &p2n, Relation::Le, d.clone() / &p2n));
            c.push(Check::new("lambda_norm", l.clone() * a, Relation::Le, two.clone() * d));
            c.push(Check::new("upper_weight", upper.clone(), Relation::Eq, (b.clone() - &p2n1) / &p2n1));
            c.push(Check::new("upper_weight_le_d", (b.clone() - &p2n1) / &p2n1, Relation::Le, d.clone() / &p2n1));
            c.push(Check::new("upper_weight_norm", upper.clone() * b, Relation::Le, two.clone() * d));
            let shared = v.comp(v.t, n + 1).sup_dist(v.comp(v.u, n + 1));
            let norms_t = v.comp_norms(v.t)[0].clone() + &v.comp_norms(v.t)[1];
            let norms_u = v.comp_norms(v.u)[0].clone() + &v.comp_norms(v.u)[1];
            c.push(Check::new("component_shared_lip", shared.clone(), Relation::Le, d.clone()));
            c.push(Check::new("component_norms_t", norms_t.clone(), Relation::Le, two.clone() * a));
            c.push(Check::new("component_norms_u", norms_u.clone(), Relation::Le, two.clone() * b));
            let split = l.clone() * &norms_t + &(upper.clone() * &norms_u) + &shared;
            c.push(Check::new("split", delta.clone(), Relation::Le, split.clone()));
            let bound = d.clone() + &(two.clone() * &l * a) + &(two * &upper * b);
            c.push(Check::new("split_le", split, Relation::Le, bound.clone()));
            c.push(Check::new("lip_II2_chain", bound, Relation::Le, S::from_i64(9) * d));
            c.push(Check::new("lip_II2", delta.clone(), Relation::Le, S::from_i64(9) * d));
        }
    }
    c
}

fn inv_checks<S: Scalar>(v: &PairView<'_, S>, case: InverseCase) -> Vec<Check<S>> {
    let (a, b, d, delta) = (&v.a, &v.b, &v.d, &v.delta);
    let two = S::from_i64(2);
    let one = S::one();
    let mut c = Vec::new();
    let t0 = v.e.space().basepoint();
    match case {
        InverseCase::Basepoint | InverseCase::Distant => {
            let p = v.shell(v.u);
            let lp = v.lambda(v.u);
            let upper = one.clone() - &lp;
            // The coordinate s = t0 of φ_k(t') is |t'|.
            let lo = v.block_lower(
                &mut c,
                p,
                lp.clone() * &v.phi_at(v.u, t0),
                lp.clone() * b,
                ["block_p_identity", "block_p_coordinate", "conorm_p", "block_p_certificate", "block_p_lower"],
            );
            let hi = v.block_lower(
                &mut c,
                p + 1,
                upper.clone() * &v.phi_at(v.u, t0),
                upper.clone() * b,
                ["block_p1_identity", "block_p1_coordinate", "conorm_p1", "block_p1_certificate", "block_p1_lower"],
            );
            c.push(Check::new("combine", two.clone() * &lo + &(two.clone() * &hi), Relation::Ge, b.clone()));
            if case == InverseCase::Basepoint {
                c.push(Check::new("inverse_0", S::from_i64(16) * delta, Relation::Ge, d.clone()));
            } else {
                let three_halves = S::from_ratio(3, 2) * b;
                c.push(Check::new("inverse_3_chain", S::from_i64(24) * delta, Relation::Ge, three_halves.clone()));
                c.push(Check::new("three_halves", three_halves, Relation::Ge, a.clone() + b));
                c.push(Check::new("sum_ge_d", a.clone() + b, Relation::Ge, d.clone()));
                c.push(Check::new("inverse_3", S::from_i64(24) * delta, Relation::Ge, d.clone()));
            }
        }
        InverseCase::SameShell => {
            let n = v.shell(v.t);
            let (l, lp) = (v.lambda(v.t), v.lambda(v.u));
            let (ul, ulp) = (one.clone() - &l, one.clone() - &lp);
            // Coordinate s = t' of λφ_n(t) - λ'φ_n(t').
            let coord_lo = l.clone() * &v.phi_at(v.t, v.u) - &(lp.clone() * &v.phi_at(v.u, v.u));
            let lo = v.block_lower(
                &mut c,
                n,
                coord_lo,
                l.clone() * d + &((lp.clone() - &l) * b),
                ["block_n_identity", "block_n_coordinate", "conorm_n", "block_n_certificate", "block_n_lower"],
            );
            let coord_hi = ul.clone() * &v.phi_at(v.t, v.u) - &(ulp.clone() * &v.phi_at(v.u, v.u));
            let hi = v.block_lower(
                &mut c,
                n + 1,
                coord_hi,
                ul.clone() * d + &((l.clone() - &lp) * b),
                ["block_n1_identity", "block_n1_coordinate", "conorm_n1", "block_n1_certificate", "block_n1_lower"],
            );
            c.push(Check::new("combine", two.clone() * &lo + &(two * &hi), Relation::Ge, d.clone()));
            c.push(Check::new("inverse_1", S::from_i64(16) * delta, Relation::Ge, d.clone()));
        }
        InverseCase::Adjacent => {
            let n = v.shell(v.t);
            let (l, lp) = (v.lambda(v.t), v.lambda(v.u));
            let (ul, ulp) = (one.clone() - &l, one.clone() - &lp);
            let lo = v.block_lower(
                &mut c,
                n,
                l.clone() * &v.phi_at(v.t, t0),
                l.clone() * a,
                ["block_n_identity", "block_n_coordinate", "conorm_n", "block_n_certificate", "block_n_lower"],
            );
            let top = v.block_lower(
                &mut c,
                n + 2,
                ulp.clone() * &v.phi_at(v.u, t0),
                ulp.clone() * b,
                ["block_n2_identity", "block_n2_coordinate", "conorm_n2", "block_n2_certificate", "block_n2_lower"],
            );
            // Coordinate s = t of λ'φ_{n+1}(t') - (1-λ)φ_{n+1}(t).
            let coord_mid = lp.clone() * &v.phi_at(v.u, v.t) - &(ul.clone() * &v.phi_at(v.t, v.t));
            let mid = v.block_lower(
                &mut c,
                n + 1,
                coord_mid,
                lp.clone() * d - &(lp.clone() * a) + &(ul.clone() * a),
                ["block_n1_identity", "block_n1_coordinate", "conorm_n1", "block_n1_certificate", "block_n1_lower"],
            );
            let combined = lp.clone() * d + &(ulp.clone() * &(a.clone() + b));
            let sum = two.clone() * &lo + &(two.clone() * &mid) + &(two * &top);
            c.push(Check::new("combine", sum, Relation::Ge, combined.clone()));
            c.push(Check::new("combine_ge_d", combined.clone(), Relation::Ge, d.clone()));
            c.push(Check::new("inverse_2_chain", S::from_i64(24) * delta, Relation::Ge, combined));
            c.push(Check::new("inverse_2", S::from_i64(24) * delta, Relation::Ge, d.clone()));
        }
    }
    c
}

/// Orders a pair so the first point has the smaller norm (ties by index).
pub fn ordered_pair<S: Scalar>(space: &MetricSpace<S>, i: usize, j: usize) -> (usize, usize) {
    match space.norm(i).total_cmp(space.norm(j)).then(i.cmp(&j)) {
        Ordering::Greater => (j, i),
        _ => (i, j),
    }
}

pub fn certify_cases<S: Scalar>(embedding: &Embedding<S>) -> CaseLedger<S> {
    certify_cases_with(embedding, &PairTable::of(embedding))
}

pub fn certify_cases_with<S: Scalar>(embedding: &Embedding<S>, table: &PairTable<S>) -> CaseLedger<S> {
    let space = embedding.space();
    let n = space.len();
    let cache = PointCache::new(embedding);
    let mut entries = Vec::with_capacity(table.pair_count());
    for i in 0..n {
        for j in i + 1..n {
            let (t, u) = ordered_pair(space, i, j);
            let view = PairView {
                e: embedding,
                cache: &cache,
                t,
                u,
                a: space.norm(t).clone(),
                b: space.norm(u).clone(),
                d: space.d(t, u).clone(),
                delta: table.get(t, u).clone(),
            };
            let shell = |p: usize| embedding.shells().get(p).map(|s| s.n);
            let (lip_case, inv_case) = classify(&view.a, &view.b, shell(t), shell(u));
            let lip = lip_checks(&view, lip_case);
            let inv = inv_checks(&view, inv_case);
            entries.push(PairEntry {
                t,
                u,
                d: view.d,
                image_dist: view.delta,
                lip_case,
                inv_case,
                lip_checks: lip,
                inv_checks: inv,
            });
        }
    }
    CaseLedger { entries }
}

/// Worst ratios `||f(t)|| / |t|` against `[1/16, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeReport<S> {
    pub min_ratio: S,
    pub min_witness: usize,
    pub max_ratio: S,
    pub max_witness: usize,
    /// Points outside the envelope.
    pub violations: Vec<usize>,
}

impl<S: Scalar> EnvelopeReport<S> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn envelope_check<S: Scalar>(embedding: &Embedding<S>) -> EnvelopeReport<S> {
    let space = embedding.space();
    let lower = S::from_ratio(1, ENVELOPE_LOWER_DENOM);
    let mut min: Option<(S, usize)> = None;
    let mut max: Option<(S, usize)> = None;
    let mut violations = Vec::new();
    for t in (0..space.len()).filter(|&t| t != space.basepoint()) {
        let ratio = embedding.evaluate(t).norm() / space.norm(t);
        if !(ratio.ge_tol(&lower) && ratio.le_tol(&S::one())) {
            violations.push(t);
        }
        if min.as_ref().is_none_or(|(m, _)| ratio < *m) {
            min = Some((ratio.clone(), t));
        }
        if max.as_ref().is_none_or(|(m, _)| ratio > *m) {
            max = Some((ratio, t));
        }
    }
    let (min_ratio, min_witness) = min.expect("space has a non-basepoint point");
    let (max_ratio, max_witness) = max.expect("space has a non-basepoint point");
    EnvelopeReport { min_ratio, min_witness, max_ratio, max_witness, violations }
}

/// Sampled compression and expansion moduli.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuliProfile<S> {
    pub thresholds: Vec<S>,
    /// `ρ_f(t)`; `None` is `+∞` (no pair at distance `>= t`).
    pub rho: Vec<Option<S>>,
    /// `ω_f(t)`; `0` when no pair is at distance `<= t`.
    pub omega: Vec<S>,
    /// Indices of thresholds where `ω_f(t) > 9t` or `ρ_f(t) < t/24`.
    pub envelope_violations: Vec<usize>,
}

impl<S: Scalar> ModuliProfile<S> {
    pub fn monotone(&self) -> bool {
        let omega_ok = self.omega.windows(2).all(|w| w[0] <= w[1]);
        let rho_ok = self.rho.windows(2).all(|w| match (&w[0], &w[1]) {
            (Some(x), Some(y)) => x <= y,
            (Some(_), None) | (None, None) => true,
            (None, Some(_)) => false,
        });
        omega_ok && rho_ok
    }

    pub fn passed(&self) -> bool {
        self.monotone() && self.envelope_violations.is_empty()
    }
}

pub fn moduli<S: Scalar>(embedding: &Embedding<S>, thresholds: &[S]) -> ModuliProfile<S> {
    moduli_with(embedding, &PairTable::of(embedding), thresholds)
}

pub fn moduli_with<S: Scalar>(embedding: &Embedding<S>, table: &PairTable<S>, thresholds: &[S]) -> ModuliProfile<S> {
    let space = embedding.space();
    let n = space.len();
    let mut pairs: Vec<(S, S)> = Vec::with_capacity(table.pair_count());
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((space.d(i, j).clone(), table.get(i, j).clone()));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    // prefix_max[k] = max image distance over the first k pairs.
    let mut prefix_max = Vec::with_capacity(pairs.len() + 1);
    prefix_max.push(S::zero());
    for (_, img) in &pairs {
        let last = prefix_max.last().cloned().expect("nonempty");
        prefix_max.push(last.max_of(img.clone()));
    }
    let mut suffix_min: Vec<Option<S>> = vec![None; pairs.len() + 1];
    for k in (0..pairs.len()).rev() {
        let here = pairs[k].1.clone();
        suffix_min[k] = Some(match &suffix_min[k + 1] {
            Some(m) => m.clone().min_of(here),
            None => here,
        });
    }
    let lip = S::from_i64(LIP_BOUND);
    let colip = S::from_i64(COLIP_BOUND);
    let mut rho = Vec::with_capacity(thresholds.len());
    let mut omega = Vec::with_capacity(thresholds.len());
    let mut envelope_violations = Vec::new();
    for (k, t) in thresholds.iter().enumerate() {
        let within = pairs.partition_point(|(d, _)| d <= t);
        let from = pairs.partition_point(|(d, _)| d < t);
        let w = prefix_max[within].clone();
        let r = suffix_min[from].clone();
        let omega_ok = within == 0 || w.le_tol(&(lip.clone() * t));
        let rho_ok = r.as_ref().is_none_or(|r| r.ge_tol(&(t.clone() / &colip)));
        if !(omega_ok && rho_ok) {
            envelope_violations.push(k);
        }
        omega.push(w);
        rho.push(r);
    }
    ModuliProfile { thresholds: thresholds.to_vec(), rho, omega, envelope_violations }
}

/// `count` geometrically spaced thresholds from half the smallest to twice
/// the largest pairwise distance, rounded to multiples of `2^-20`.
pub fn default_thresholds<S: Scalar>(space: &MetricSpace<S>, count: usize) -> Vec<S> {
    let n = space.len();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = space.d(i, j).to_f64();
            lo = lo.min(d);
            hi = hi.max(d);
        }
    }
    if count == 0 || !lo.is_finite() {
        return Vec::new();
    }
    let (lo, hi) = (lo / 2.0, hi * 2.0);
    let denom = 1i64 << 20;
    let mut out: Vec<S> = Vec::with_capacity(count);
    for k in 0..count {
        let frac = if count == 1 { 0.0 } else { k as f64 / (count - 1) as f64 };
        let x = lo * (hi / lo).powf(frac);
        let v = S::from_ratio(((x * denom as f64).round() as i64).max(1), denom);
        if out.last().is_none_or(|last| v > *last) {
            out.push(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::{make_operators, OperatorMode};
    use crate::glue::embed;
    use crate::scalar::Exact;

    fn q(n: i64) -> Exact {
        Exact::from(n)
    }

    fn line(norms: &[i64]) -> MetricSpace<Exact> {
        let rows = norms.iter().map(|a| norms.iter().map(|b| q((a - b).abs())).collect()).collect();
        let names = (0..norms.len()).map(|i| format!("p{i}")).collect();
        MetricSpace::new(names, rows, 0).unwrap()
    }

    fn embedded(norms: &[i64], mode: OperatorMode) -> Embedding<Exact> {
        let s = line(norms);
        let ops = make_operators(&s, mode).unwrap();
        embed(&s, &ops).unwrap()
    }

    #[test]
    fn pair_table_indexing() {
        let t = PairTable::from_fn(5, |i, j| q((10 * i + j) as i64));
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert_eq!(*t.get(i, j), q((10 * i.min(j) + i.max(j)) as i64));
                }
            }
        }
        assert_eq!(t.pair_count(), 10);
    }

    #[test]
    fn two_point_distortion_is_one() {
        let e = embedded(&[0, 3], OperatorMode::Identity);
        let r = distortion(&e);
        assert_eq!(r.lip, Exact::new(1, 2));
        assert_eq!(r.colip, Some(q(2)));
        assert_eq!(r.dist, Some(q(1)));
        assert!(r.bounds_hold());
    }

    #[test]
    fn collision_reported() {
        let s = line(&[0, 2, 5]);
        let r = distortion_of(&s, |i, j| if (i, j) == (1, 2) { q(0) } else { q(1) });
        assert_eq!(r.collision, Some((1, 2)));
        assert_eq!(r.colip, None);
        assert!(!r.bounds_hold());
    }

    #[test]
    fn kuratowski_through_reporter() {
        let s = line(&[0, 2, 3, 7, 11]);
        let k = crate::frechet::kuratowski(&s);
        assert_eq!(distortion_of(&s, |i, j| k.distance(i, j)).dist, Some(q(1)));
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify(&q(2), &q(5), Some(1), Some(2)), (LipCase::I, InverseCase::Adjacent));
        assert_eq!(classify(&q(2), &q(3), Some(1), Some(1)), (LipCase::II1, InverseCase::SameShell));
        assert_eq!(classify(&q(3), &q(5), Some(1), Some(2)), (LipCase::II2, InverseCase::Adjacent));
        assert_eq!(classify(&q(2), &q(9), Some(1), Some(3)), (LipCase::I, InverseCase::Distant));
        assert_eq!(classify(&q(0), &q(9), None, Some(3)), (LipCase::I, InverseCase::Basepoint));
    }

    #[test]
    fn case_i_chain_values() {
        let e = embedded(&[0, 2, 9], OperatorMode::Identity);
        let ledger = certify_cases(&e);
        let entry = ledger.entries.iter().find(|x| (x.t, x.u) == (1, 2)).unwrap();
        assert_eq!(entry.lip_case, LipCase::I);
        assert_eq!(entry.inv_case, InverseCase::Distant);
        let labels: Vec<_> = entry.lip_checks.iter().map(|c| c.label).collect();
        assert_eq!(labels.last(), Some(&"lip_I"));
        assert!(entry.passed(), "{:?}", entry.failed_checks().collect::<Vec<_>>());
    }

    #[test]
    fn ledger_covers_every_pair_once() {
        let e = embedded(&[0, 2, 3, 5, 8, 13, 21, 34], OperatorMode::Random { seed: 4 });
        let ledger = certify_cases(&e);
        assert_eq!(ledger.entries.len(), 28);
        assert!(ledger.passed(), "{:?}", ledger.failures().next());
        let mut seen: Vec<_> = ledger.entries.iter().map(|x| (x.t.min(x.u), x.t.max(x.u))).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 28);
    }

    #[test]
    fn tampered_image_fails_certification() {
        let e = embedded(&[0, 2, 3, 6], OperatorMode::Identity);
        let mut image: Vec<_> = (0..e.len()).map(|t| e.evaluate(t).clone()).collect();
        image[2] = image[2].scale(&q(1000));
        let bad = Embedding::with_image(e.space().clone(), q(1), e.operators(), image).unwrap();
        let ledger = certify_cases(&bad);
        assert!(!ledger.passed());
        assert!(ledger.failures().all(|f| f.t == 2 || f.u == 2));
        assert!(!distortion(&bad).bounds_hold());
    }

    #[test]
    fn envelope_two_point() {
        let e = embedded(&[0, 3], OperatorMode::Identity);
        let r = envelope_check(&e);
        assert_eq!(r.min_ratio, Exact::new(1, 2));
        assert!(r.passed());
        let h = envelope_check(&embedded(&[0, 3, 6, 13], OperatorMode::Half));
        assert!(h.passed());
        assert!(h.min_ratio >= Exact::new(1, 16));
    }

    #[test]
    fn moduli_conventions_and_bounds() {
        let e = embedded(&[0, 2, 3, 7], OperatorMode::Identity);
        let ts = [Exact::new(1, 2), q(1), q(2), q(4), q(100)];
        let m = moduli(&e, &ts);
        assert_eq!(m.omega[0], q(0));
        assert_eq!(m.rho[4], None);
        assert!(m.monotone());
        assert!(m.passed());
    }

    #[test]
    fn thresholds_increase() {
        let s = line(&[0, 2, 3, 7, 100]);
        let ts: Vec<Exact> = default_thresholds(&s, 20);
        assert_eq!(ts.len(), 20);
        assert!(ts.windows(2).all(|w| w[0] < w[1]));
    }
}
