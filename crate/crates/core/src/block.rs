//! The target space `Z = (⊕_n F_n)_∞`: sparse block vectors, the block
//! operators `T_n`, and the block projections `P_n` / `Π_n`.
//!
//! Each `F_n` is the image of `l∞(B_n)` under an invertible `T_n` with
//! `½||u|| <= ||T_n u|| <= ||u||`. Norms on `Z` are the sup over blocks, so
//! every projection onto a set of blocks has norm 1.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::frechet::CoordVector;
use crate::metric::MetricSpace;
use crate::scalar::Scalar;

/// Element of `Z`. Absent blocks are zero.
#[derive(Clone, Debug, Default)]
pub struct BlockVector<S> {
    blocks: BTreeMap<usize, CoordVector<S>>,
}

impl<S: Scalar> PartialEq for BlockVector<S> {
    /// Equality of vectors: zero blocks and absent blocks compare equal.
    fn eq(&self, other: &Self) -> bool {
        let keys = self.blocks.keys().chain(other.blocks.keys());
        keys.into_iter().all(|k| match (self.blocks.get(k), other.blocks.get(k)) {
            (Some(a), Some(b)) => a.same_indexing(b) && a.values() == b.values(),
            (Some(a), None) | (None, Some(a)) => a.is_zero(),
            (None, None) => true,
        })
    }
}

impl<S: Scalar> BlockVector<S> {
    pub fn zero() -> Self {
        BlockVector { blocks: BTreeMap::new() }
    }

    pub fn from_blocks(blocks: impl IntoIterator<Item = (usize, CoordVector<S>)>) -> Self {
        BlockVector { blocks: blocks.into_iter().collect() }
    }

    pub fn block(&self, n: usize) -> Option<&CoordVector<S>> {
        self.blocks.get(&n)
    }

    pub fn blocks(&self) -> impl Iterator<Item = (usize, &CoordVector<S>)> {
        self.blocks.iter().map(|(k, v)| (*k, v))
    }

    pub fn insert(&mut self, n: usize, v: CoordVector<S>) {
        self.blocks.insert(n, v);
    }

    /// Indices of blocks with a nonzero coordinate.
    pub fn support(&self) -> Vec<usize> {
        self.blocks.iter().filter(|(_, v)| !v.is_zero()).map(|(k, _)| *k).collect()
    }

    /// Drops zero blocks.
    pub fn normalized(&self) -> Self {
        BlockVector { blocks: self.blocks.iter().filter(|(_, v)| !v.is_zero()).map(|(k, v)| (*k, v.clone())).collect() }
    }

    /// `max_n ||z_n||∞`.
    pub fn norm(&self) -> S {
        self.blocks.values().map(CoordVector::sup_norm).reduce(S::max_of).unwrap_or_else(S::zero)
    }

    /// `||self - other||` without building the difference.
    pub fn dist(&self, other: &Self) -> Result<S> {
        let mut worst = S::zero();
        for (k, a) in &self.blocks {
            let d = match other.blocks.get(k) {
                Some(b) if a.same_indexing(b) => a.sup_dist(b),
                Some(_) => return Err(Error::IndexingMismatch(*k)),
                None => a.sup_norm(),
            };
            worst = worst.max_of(d);
        }
        for (k, b) in &other.blocks {
            if !self.blocks.contains_key(k) {
                worst = worst.max_of(b.sup_norm());
            }
        }
        Ok(worst)
    }

    fn combine(&self, other: &Self, sign: &S) -> Result<Self> {
        let mut blocks = self.blocks.clone();
        for (k, b) in &other.blocks {
            match blocks.get_mut(k) {
                Some(a) => {
                    if !a.same_indexing(b) {
                        return Err(Error::IndexingMismatch(*k));
                    }
                    *a = a.zip_with(b, |x, y| x.clone() + &(y.clone() * sign));
                }
                None => {
                    blocks.insert(*k, b.scaled(sign));
                }
            }
        }
        Ok(BlockVector { blocks })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, &S::one())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, &-S::one())
    }

    pub fn scale(&self, alpha: &S) -> Self {
        BlockVector { blocks: self.blocks.iter().map(|(k, v)| (*k, v.scaled(alpha))).collect() }
    }

    /// `Π_n z`: block `n` alone.
    pub fn project(&self, n: usize) -> Self {
        BlockVector { blocks: self.blocks.get(&n).map(|v| (n, v.clone())).into_iter().collect() }
    }

    /// `P_n z`: blocks `0..=n`.
    pub fn partial_sum(&self, n: usize) -> Self {
        BlockVector { blocks: self.blocks.range(..=n).map(|(k, v)| (*k, v.clone())).collect() }
    }
}

/// How the block operators `T_n` are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorMode {
    /// `T_n = I`.
    Identity,
    /// `T_n = ½ I`, the smallest scaling the sandwich permits.
    Half,
    /// Normalized seeded perturbations of the identity.
    Random { seed: u64 },
}

impl fmt::Display for OperatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorMode::Identity => f.write_str("identity"),
            OperatorMode::Half => f.write_str("half"),
            OperatorMode::Random { seed } => write!(f, "random:{seed}"),
        }
    }
}

impl FromStr for OperatorMode {
    type Err = Error;

    /// `identity`, `half`, or `random:<seed>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "identity" => Ok(OperatorMode::Identity),
            None if s == "half" => Ok(OperatorMode::Half),
            Some(("random", seed)) => seed
                .parse()
                .map(|seed| OperatorMode::Random { seed })
                .map_err(|_| Error::InvalidParameter(format!("bad seed `{seed}`"))),
            _ => Err(Error::InvalidParameter(format!("unknown operator mode `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorMatrix<S> {
    /// `c I`.
    Scaled(S),
    /// Row-major `dim x dim` matrix `entries / divisor`. Random operators
    /// keep integer entries over one divisor so products stay small.
    Dense { entries: Vec<S>, divisor: S },
}

/// `T_n` acting on `l∞(B_n)` with certified bounds
/// `conorm_bound ||u|| <= ||T_n u|| <= norm_bound ||u||`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockOperator<S> {
    pub shell: usize,
    pub dim: usize,
    pub mode: OperatorMode,
    pub matrix: OperatorMatrix<S>,
    /// `||T_n||_{∞→∞}`, the max absolute row sum.
    pub norm_bound: S,
    /// A lower bound on `1 / ||T_n^{-1}||_{∞→∞}`; exact when the inverse was formed.
    pub conorm_bound: S,
}

/// Largest dimension for which random operators are certified through an
/// explicit inverse; above it the Neumann bound `1 / (1 - ||E||)` is used.
pub const EXACT_INVERSE_MAX_DIM: usize = 24;

/// Resamples allowed per shell in random mode.
pub const MAX_RESAMPLES: usize = 32;

impl<S: Scalar> BlockOperator<S> {
    fn scaled(shell: usize, dim: usize, mode: OperatorMode, c: S) -> Self {
        BlockOperator { shell, dim, mode, matrix: OperatorMatrix::Scaled(c.clone()), norm_bound: c.clone(), conorm_bound: c }
    }

    /// Builds an operator from an explicit matrix, certifying its bounds.
    pub fn from_dense(shell: usize, dim: usize, mode: OperatorMode, matrix: Vec<S>) -> Result<Self> {
        if matrix.len() != dim * dim {
            return Err(Error::OperatorDimension { shell, expected: dim * dim, got: matrix.len() });
        }
        let norm_bound = max_row_sum(&matrix, dim);
        let inverse = invert(&matrix, dim)
            .ok_or_else(|| Error::InvalidParameter(format!("operator for shell {shell} is singular")))?;
        let conorm_bound = S::one() / max_row_sum(&inverse, dim);
        Ok(BlockOperator { shell, dim, mode, matrix: OperatorMatrix::Dense { entries: matrix, divisor: S::one() }, norm_bound, conorm_bound })
    }

    pub fn apply(&self, u: &CoordVector<S>) -> CoordVector<S> {
        assert_eq!(u.len(), self.dim, "operator dimension");
        match &self.matrix {
            OperatorMatrix::Scaled(c) => u.scaled(c),
            OperatorMatrix::Dense { entries, divisor } => {
                let values = S::mat_vec(entries, u.values()).into_iter().map(|x| x / divisor).collect();
                CoordVector::new(u.points().clone(), values)
            }
        }
    }

    /// Dense row-major matrix, materializing scalar multiples of the identity.
    pub fn dense_matrix(&self) -> Vec<S> {
        matrix_entries(&self.matrix, self.dim)
    }

    /// `||T_n|| ||T_n^{-1}||` bound: an upper bound on the Banach–Mazur
    /// distance between `l∞(B_n)` and `F_n`.
    pub fn banach_mazur_bound(&self) -> S {
        self.norm_bound.clone() / &self.conorm_bound
    }

    /// `½ <= conorm_bound <= norm_bound <= 1`.
    pub fn satisfies_sandwich(&self) -> bool {
        let half = S::from_ratio(1, 2);
        self.conorm_bound >= half && self.conorm_bound <= self.norm_bound && self.norm_bound <= S::one()
    }
}

/// `||M||_{∞→∞}` for a row-major square matrix.
pub fn max_row_sum<S: Scalar>(m: &[S], dim: usize) -> S {
    m.chunks(dim.max(1))
        .map(|row| row.iter().fold(S::zero(), |acc, x| acc + &x.abs()))
        .reduce(S::max_of)
        .unwrap_or_else(S::zero)
}

/// Gauss–Jordan inverse with largest-magnitude pivoting; `None` if singular.
pub fn invert<S: Scalar>(m: &[S], dim: usize) -> Option<Vec<S>> {
    let mut a = m.to_vec();
    let mut inv: Vec<S> = (0..dim * dim).map(|k| if k % (dim + 1) == 0 { S::one() } else { S::zero() }).collect();
    for col in 0..dim {
        let pivot = (col..dim)
            .filter(|&r| !a[r * dim + col].is_zero())
            .max_by(|&x, &y| a[x * dim + col].abs().total_cmp(&a[y * dim + col].abs()).then(y.cmp(&x)))?;
        if pivot != col {
            for k in 0..dim {
                a.swap(pivot * dim + k, col * dim + k);
                inv.swap(pivot * dim + k, col * dim + k);
            }
        }
        let p = a[col * dim + col].clone();
        for k in 0..dim {
            a[col * dim + k] = a[col * dim + k].clone() / &p;
            inv[col * dim + k] = inv[col * dim + k].clone() / &p;
        }
        for r in 0..dim {
            if r == col || a[r * dim + col].is_zero() {
                continue;
            }
            let factor = a[r * dim + col].clone();
            for k in 0..dim {
                let da = factor.clone() * &a[col * dim + k];
                let di = factor.clone() * &inv[col * dim + k];
                a[r * dim + k] = a[r * dim + k].clone() - &da;
                inv[r * dim + k] = inv[r * dim + k].clone() - &di;
            }
        }
    }
    Some(inv)
}

fn matrix_entries<S: Scalar>(m: &OperatorMatrix<S>, dim: usize) -> Vec<S> {
    match m {
        OperatorMatrix::Dense { entries, divisor } => entries.iter().map(|x| x.clone() / divisor).collect(),
        OperatorMatrix::Scaled(c) => {
            (0..dim * dim).map(|k| if k % (dim + 1) == 0 { c.clone() } else { S::zero() }).collect()
        }
    }
}

fn shell_rng(seed: u64, shell: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (shell as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// `||M^{-1}||` for an integer matrix as `(num, den)`, via fraction-free
/// Gauss-Jordan elimination: the right half ends as `det * M^{-1}`.
fn integer_inverse_norm(m: &[i64], dim: usize) -> Option<(BigInt, BigInt)> {
    let width = 2 * dim;
    let mut a: Vec<BigInt> = Vec::with_capacity(dim * width);
    for r in 0..dim {
        a.extend(m[r * dim..(r + 1) * dim].iter().map(|&x| BigInt::from(x)));
        a.extend((0..dim).map(|c| BigInt::from(i64::from(r == c))));
    }
    let mut prev = BigInt::one();
    for k in 0..dim {
        let pivot = (k..dim).find(|&r| !a[r * width + k].is_zero())?;
        if pivot != k {
            for j in 0..width {
                a.swap(k * width + j, pivot * width + j);
            }
        }
        let pk = a[k * width + k].clone();
        for i in (0..dim).filter(|&i| i != k) {
            let factor = a[i * width + k].clone();
            for j in 0..width {
                if j == k {
                    continue;
                }
                let v = (&pk * &a[i * width + j] - &factor * &a[k * width + j]) / &prev;
                a[i * width + j] = v;
            }
            a[i * width + k] = BigInt::zero();
        }
        prev = pk;
    }
    let row_max = (0..dim)
        .map(|r| a[r * width + dim..(r + 1) * width].iter().map(|x| x.abs()).sum::<BigInt>())
        .max()
        .unwrap_or_default();
    Some((row_max, prev.abs()))
}

fn random_operator<S: Scalar>(shell: usize, dim: usize, seed: u64) -> Result<BlockOperator<S>> {
    let mut rng = shell_rng(seed, shell);
    let mut conditions = Vec::new();
    let half = S::from_ratio(1, 2);
    for _ in 0..MAX_RESAMPLES {
        // A = I + E with ||E|| <= eps/64, eps in [8, 30]. Work with the
        // integer matrix D A, D = 64 * 255 * dim.
        let eps = rng.random_range(8i64..=30);
        let denom = 64 * 255 * dim as i64;
        let perturbation: Vec<i64> = (0..dim * dim).map(|_| eps * rng.random_range(-255i64..=255)).collect();
        let scaled_a: Vec<S> = perturbation
            .iter()
            .enumerate()
            .map(|(k, &e)| S::from_i64(if k % (dim + 1) == 0 { denom + e } else { e }))
            .collect();
        let d = S::from_i64(denom);
        // ||A|| = ||D A|| / D.
        let scaled_norm = max_row_sum(&scaled_a, dim);
        let a_norm = scaled_norm.clone() / &d;
        let inv_norm_bound = if dim <= EXACT_INVERSE_MAX_DIM {
            let ints: Vec<i64> =
                perturbation.iter().enumerate().map(|(k, &e)| if k % (dim + 1) == 0 { denom + e } else { e }).collect();
            match integer_inverse_norm(&ints, dim) {
                Some((num, den)) => S::from_big_ratio(num, den) * &d,
                None => {
                    conditions.push(f64::INFINITY);
                    continue;
                }
            }
        } else {
            let e_norm = perturbation.chunks(dim).map(|row| row.iter().map(|x| x.abs()).sum::<i64>()).max().unwrap_or(0);
            if e_norm >= denom {
                conditions.push(f64::INFINITY);
                continue;
            }
            S::from_ratio(denom, denom - e_norm)
        };
        // T = A / ||A|| = (D A) / ||D A||.
        let norm_bound = max_row_sum(&scaled_a, dim) / &scaled_norm;
        let matrix = OperatorMatrix::Dense { entries: scaled_a, divisor: scaled_norm.clone() };
        // T^{-1} = ||A|| A^{-1}.
        let conorm_bound = S::one() / (a_norm.clone() * &inv_norm_bound);
        let op = BlockOperator {
            shell,
            dim,
            mode: OperatorMode::Random { seed },
            matrix,
            norm_bound,
            conorm_bound: conorm_bound.clone(),
        };
        if op.satisfies_sandwich() && conorm_bound >= half {
            return Ok(op);
        }
        conditions.push((a_norm * &inv_norm_bound).to_f64());
    }
    Err(Error::OperatorCertification { shell, attempts: MAX_RESAMPLES, conditions })
}

/// One operator per shell `0..=n_max + 1`, acting on `l∞(B_n)`.
pub fn make_operators<S: Scalar>(space: &MetricSpace<S>, mode: OperatorMode) -> Result<Vec<BlockOperator<S>>> {
    let top = crate::glue::max_shell(space)? + 1;
    (0..=top)
        .map(|n| {
            let dim = space.ball(n).len();
            match mode {
                OperatorMode::Identity => Ok(BlockOperator::scaled(n, dim, mode, S::one())),
                OperatorMode::Half => Ok(BlockOperator::scaled(n, dim, mode, S::from_ratio(1, 2))),
                OperatorMode::Random { seed } => random_operator(n, dim, seed),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::scalar::Exact;

    fn q(n: i64) -> Exact {
        Exact::from(n)
    }

    fn cv(points: &Arc<[usize]>, vals: &[i64]) -> CoordVector<Exact> {
        CoordVector::new(points.clone(), vals.iter().map(|&v| q(v)).collect())
    }

    #[test]
    fn project_and_partial_sum() {
        let p1: Arc<[usize]> = vec![0, 1].into();
        let p2: Arc<[usize]> = vec![0, 1, 2].into();
        let z = BlockVector::from_blocks([(1, cv(&p1, &[1, -4])), (2, cv(&p2, &[3, 0, 2]))]);
        assert_eq!(z.project(1), BlockVector::from_blocks([(1, cv(&p1, &[1, -4]))]));
        assert_eq!(z.project(7), BlockVector::zero());
        assert_eq!(z.partial_sum(100), z);
        assert_eq!(z.partial_sum(0), BlockVector::zero());
        assert_eq!(z.partial_sum(1), z.project(1));
        assert_eq!(z.norm(), q(4));
        let sum = z.project(1).add(&z.project(2)).unwrap();
        assert_eq!(sum, z);
    }

    #[test]
    fn algebra() {
        let p: Arc<[usize]> = vec![0, 1].into();
        let z = BlockVector::from_blocks([(3, cv(&p, &[2, -5]))]);
        assert_eq!(z.sub(&z).unwrap().norm(), q(0));
        assert_eq!(z.scale(&q(-3)).norm(), q(15));
        assert_eq!(z.dist(&BlockVector::zero()).unwrap(), q(5));
    }

    #[test]
    fn mismatched_indexing_is_structural_error() {
        let a: Arc<[usize]> = vec![0, 1].into();
        let b: Arc<[usize]> = vec![0, 2].into();
        let z = BlockVector::from_blocks([(1, cv(&a, &[1, 1]))]);
        let w = BlockVector::from_blocks([(1, cv(&b, &[1, 1]))]);
        assert!(matches!(z.add(&w), Err(Error::IndexingMismatch(1))));
        assert!(matches!(z.dist(&w), Err(Error::IndexingMismatch(1))));
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("identity".parse::<OperatorMode>().unwrap(), OperatorMode::Identity);
        assert_eq!("random:7".parse::<OperatorMode>().unwrap(), OperatorMode::Random { seed: 7 });
        assert!("random".parse::<OperatorMode>().is_err());
        assert_eq!(OperatorMode::Random { seed: 3 }.to_string(), "random:3");
    }

    #[test]
    fn row_sum_norm_and_inverse() {
        let m = vec![q(2), q(-1), q(1), q(3)];
        assert_eq!(max_row_sum(&m, 2), q(4));
        let inv = invert(&m, 2).unwrap();
        assert_eq!(inv, vec![Exact::new(3, 7), Exact::new(1, 7), Exact::new(-1, 7), Exact::new(2, 7)]);
        assert!(invert(&[q(1), q(2), q(2), q(4)], 2).is_none());
    }

    #[test]
    fn from_dense_certifies() {
        let op = BlockOperator::from_dense(0, 2, OperatorMode::Identity, vec![q(1), q(0), q(0), Exact::new(1, 2)]).unwrap();
        assert_eq!(op.norm_bound, q(1));
        assert_eq!(op.conorm_bound, Exact::new(1, 2));
        assert!(op.satisfies_sandwich());
        assert_eq!(op.banach_mazur_bound(), q(2));
    }

    #[test]
    fn fraction_free_inverse_norm_matches_rational() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for dim in 1..=9 {
            for _ in 0..4 {
                let m: Vec<i64> = (0..dim * dim)
                    .map(|k| rng.random_range(-20i64..=20) + if k % (dim + 1) == 0 && k % 2 == 0 { 90 } else { 0 })
                    .collect();
                let exact: Vec<Exact> = m.iter().map(|&x| q(x)).collect();
                match (integer_inverse_norm(&m, dim), invert(&exact, dim)) {
                    (Some((num, den)), Some(inv)) => {
                        assert_eq!(Exact::from_big_ratio(num, den), max_row_sum(&inv, dim), "dim {dim}")
                    }
                    (None, None) => {}
                    other => panic!("singularity disagrees at dim {dim}: {:?}", other.0.is_some()),
                }
            }
        }
        assert!(integer_inverse_norm(&[1, 2, 2, 4], 2).is_none());
    }
}
