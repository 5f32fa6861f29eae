//! The shell embedding.
//!
//! A point with `2^n <= |t| < 2^{n+1}` is sent to
//! `f(t) = λ T_n φ_n(t) + (1 - λ) T_{n+1} φ_{n+1}(t)` with
//! `λ = (2^{n+1} - |t|) / 2^n`, placing the two terms in blocks `n` and
//! `n + 1` of `Z`. The basepoint goes to 0.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::block::{make_operators, BlockOperator, BlockVector, OperatorMode};
use crate::error::{Error, Result};
use crate::frechet::{phi_on, CoordVector};
use crate::metric::MetricSpace;
use crate::scalar::Scalar;

/// Shell index and interpolation weight of a non-basepoint point.
#[derive(Clone, Debug, PartialEq)]
pub struct Shell<S> {
    pub n: usize,
    pub lambda: S,
}

/// `n(t)` and `λ(t)` for every point; `None` at the basepoint.
#[derive(Clone, Debug, PartialEq)]
pub struct ShellAssignment<S> {
    shells: Vec<Option<Shell<S>>>,
}

impl<S: Scalar> ShellAssignment<S> {
    pub fn get(&self, t: usize) -> Option<&Shell<S>> {
        self.shells[t].as_ref()
    }

    pub fn max_shell(&self) -> Option<usize> {
        self.shells.iter().flatten().map(|s| s.n).max()
    }

    pub fn len(&self) -> usize {
        self.shells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shells.is_empty()
    }
}

/// `λ` for a point of norm `norm` evaluated with shell index `n`.
pub fn shell_weight<S: Scalar>(norm: &S, n: usize) -> S {
    (S::pow2(n as i32 + 1) - norm) / S::pow2(n as i32)
}

pub fn assign_shells<S: Scalar>(space: &MetricSpace<S>) -> Result<ShellAssignment<S>> {
    let one = S::one();
    let shells = (0..space.len())
        .map(|t| {
            if t == space.basepoint() {
                return Ok(None);
            }
            let norm = space.norm(t);
            if *norm < one {
                return Err(Error::BelowUnitGap { point: space.name(t).to_string(), norm: norm.to_text() });
            }
            let n = norm.floor_log2() as usize;
            Ok(Some(Shell { n, lambda: shell_weight(norm, n) }))
        })
        .collect::<Result<_>>()?;
    Ok(ShellAssignment { shells })
}

/// Largest occupied shell.
pub fn max_shell<S: Scalar>(space: &MetricSpace<S>) -> Result<usize> {
    assign_shells(space)?.max_shell().ok_or(Error::SinglePoint)
}

/// The map `f` on a finite space, with every intermediate it is built from.
#[derive(Clone, Debug)]
pub struct Embedding<S> {
    space: MetricSpace<S>,
    scale: S,
    operators: Vec<BlockOperator<S>>,
    balls: Vec<Arc<[usize]>>,
    shells: ShellAssignment<S>,
    components: Vec<Option<[CoordVector<S>; 2]>>,
    image: Vec<BlockVector<S>>,
}

/// Operators in shell order, with the ball each acts on.
type IndexedOperators<S> = (Vec<BlockOperator<S>>, Vec<Arc<[usize]>>);

fn index_operators<S: Scalar>(
    space: &MetricSpace<S>,
    operators: &[BlockOperator<S>],
    top: usize,
) -> Result<IndexedOperators<S>> {
    let by_shell: BTreeMap<usize, &BlockOperator<S>> = operators.iter().map(|op| (op.shell, op)).collect();
    let mut ops = Vec::with_capacity(top + 1);
    let mut balls = Vec::with_capacity(top + 1);
    for n in 0..=top {
        let op = by_shell.get(&n).ok_or(Error::MissingOperator(n))?;
        let ball: Arc<[usize]> = space.ball(n).into();
        if op.dim != ball.len() {
            return Err(Error::OperatorDimension { shell: n, expected: ball.len(), got: op.dim });
        }
        ops.push((*op).clone());
        balls.push(ball);
    }
    Ok((ops, balls))
}

fn components_of<S: Scalar>(
    space: &MetricSpace<S>,
    shells: &ShellAssignment<S>,
    ops: &[BlockOperator<S>],
    balls: &[Arc<[usize]>],
) -> Vec<Option<[CoordVector<S>; 2]>> {
    (0..space.len())
        .map(|t| {
            shells.get(t).map(|sh| {
                // |t| < 2^{n+1}, so t lies in both B_n and B_{n+1}.
                let lo = ops[sh.n].apply(&phi_on(space, &balls[sh.n], t));
                let hi = ops[sh.n + 1].apply(&phi_on(space, &balls[sh.n + 1], t));
                [lo, hi]
            })
        })
        .collect()
}

fn glue_image<S: Scalar>(shell: &Shell<S>, comps: &[CoordVector<S>; 2]) -> BlockVector<S> {
    let mut z = BlockVector::zero();
    let upper = S::one() - &shell.lambda;
    if !shell.lambda.is_zero() {
        z.insert(shell.n, comps[0].scaled(&shell.lambda));
    }
    if !upper.is_zero() {
        z.insert(shell.n + 1, comps[1].scaled(&upper));
    }
    z
}

/// Builds `f` on a space with `B(t0, 1) = {t0}` (every other norm at least 1).
pub fn embed<S: Scalar>(space: &MetricSpace<S>, operators: &[BlockOperator<S>]) -> Result<Embedding<S>> {
    Embedding::build(space.clone(), S::one(), operators)
}

/// Validates, rescales, instantiates operators and embeds.
pub fn embed_space<S: Scalar>(space: &MetricSpace<S>, mode: OperatorMode) -> Result<Embedding<S>> {
    space.ensure_metric()?;
    let (scaled, scale) = space.rescale_to_unit_gap()?;
    let ops = make_operators(&scaled, mode)?;
    Embedding::build(scaled, scale, &ops)
}

impl<S: Scalar> Embedding<S> {
    /// `space` must already be rescaled; `scale` is recorded as given.
    pub fn build(space: MetricSpace<S>, scale: S, operators: &[BlockOperator<S>]) -> Result<Self> {
        let shells = assign_shells(&space)?;
        let top = shells.max_shell().ok_or(Error::SinglePoint)? + 1;
        let (operators, balls) = index_operators(&space, operators, top)?;
        let components = components_of(&space, &shells, &operators, &balls);
        let image = (0..space.len())
            .map(|t| match (shells.get(t), &components[t]) {
                (Some(sh), Some(c)) => glue_image(sh, c),
                _ => BlockVector::zero(),
            })
            .collect();
        Ok(Embedding { space, scale, operators, balls, shells, components, image })
    }

    /// Rebuilds an embedding around a stored image, recomputing the
    /// construction's components so the image can be checked against them.
    pub fn with_image(
        space: MetricSpace<S>,
        scale: S,
        operators: &[BlockOperator<S>],
        image: Vec<BlockVector<S>>,
    ) -> Result<Self> {
        let mut e = Self::build(space, scale, operators)?;
        if image.len() != e.space.len() {
            return Err(Error::InvalidParameter(format!(
                "image has {} points, space has {}",
                image.len(),
                e.space.len()
            )));
        }
        e.image = image;
        Ok(e)
    }

    pub fn space(&self) -> &MetricSpace<S> {
        &self.space
    }

    /// Factor the input distances were multiplied by.
    pub fn scale(&self) -> &S {
        &self.scale
    }

    pub fn operators(&self) -> &[BlockOperator<S>] {
        &self.operators
    }

    pub fn operator(&self, n: usize) -> &BlockOperator<S> {
        &self.operators[n]
    }

    pub fn ball(&self, n: usize) -> &Arc<[usize]> {
        &self.balls[n]
    }

    pub fn shells(&self) -> &ShellAssignment<S> {
        &self.shells
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    /// `f(t)`.
    pub fn evaluate(&self, t: usize) -> &BlockVector<S> {
        &self.image[t]
    }

    pub fn evaluate_named(&self, name: &str) -> Result<&BlockVector<S>> {
        Ok(&self.image[self.space.index_of(name)?])
    }

    /// `f_k(t) = T_k φ_k(t)` for `k` in `{n(t), n(t) + 1}`.
    pub fn component(&self, t: usize, k: usize) -> Option<&CoordVector<S>> {
        let sh = self.shells.get(t)?;
        let comps = self.components[t].as_ref()?;
        match k.checked_sub(sh.n)? {
            0 => Some(&comps[0]),
            1 => Some(&comps[1]),
            _ => None,
        }
    }

    /// `||f(t) - f(t')||`.
    pub fn pairwise_image_distance(&self, t: usize, u: usize) -> S {
        self.image[t].dist(&self.image[u]).expect("images share ball indexings")
    }

    pub fn pairwise_image_distance_named(&self, t: &str, u: &str) -> Result<S> {
        let (a, b) = (self.space.index_of(t)?, self.space.index_of(u)?);
        self.image[a].dist(&self.image[b])
    }

    /// Points whose stored image differs from the construction's formula.
    pub fn image_mismatches(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&t| {
                let expected = match (self.shells.get(t), &self.components[t]) {
                    (Some(sh), Some(c)) => glue_image(sh, c),
                    _ => BlockVector::zero(),
                };
                expected != self.image[t]
            })
            .collect()
    }
}

/// Outcome of [`boundary_consistency_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryVerdict {
    /// Points with `|t| = 2^m`, `m >= 1`, that were evaluated both ways.
    pub checked: Vec<usize>,
    /// Those where the two evaluations differ.
    pub mismatches: Vec<usize>,
}

impl BoundaryVerdict {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn formula_image<S: Scalar>(
    space: &MetricSpace<S>,
    ops: &[BlockOperator<S>],
    balls: &[Arc<[usize]>],
    t: usize,
    n: usize,
) -> BlockVector<S> {
    let shell = Shell { n, lambda: shell_weight(space.norm(t), n) };
    let comps = [ops[n].apply(&phi_on(space, &balls[n], t)), ops[n + 1].apply(&phi_on(space, &balls[n + 1], t))];
    glue_image(&shell, &comps)
}

/// For every point sitting exactly on a shell seam `|t| = 2^m`, evaluates
/// `f(t)` with the shell-`(m-1)` formula (`λ = 0`) and the shell-`m`
/// formula (`λ = 1`) and compares.
pub fn boundary_consistency_check<S: Scalar>(
    space: &MetricSpace<S>,
    operators: &[BlockOperator<S>],
) -> Result<BoundaryVerdict> {
    let shells = assign_shells(space)?;
    let top = shells.max_shell().ok_or(Error::SinglePoint)? + 1;
    let (ops, balls) = index_operators(space, operators, top)?;
    let mut verdict = BoundaryVerdict { checked: Vec::new(), mismatches: Vec::new() };
    for t in 0..space.len() {
        let Some(sh) = shells.get(t) else { continue };
        if sh.n == 0 || *space.norm(t) != S::pow2(sh.n as i32) {
            continue;
        }
        let below = formula_image(space, &ops, &balls, t, sh.n - 1);
        let at = formula_image(space, &ops, &balls, t, sh.n);
        verdict.checked.push(t);
        if below != at {
            verdict.mismatches.push(t);
        }
    }
    Ok(verdict)
}
