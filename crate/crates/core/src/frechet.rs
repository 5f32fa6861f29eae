//! Fréchet coordinate maps into `l∞(B)` for a finite ball `B`.
//!
//! `phi_n(t) = (d(s, t) - |s|)_{s in B_n}` is an isometry of `B_n` into
//! `l∞(B_n)` with `||phi_n(t)|| = |t|`. The Kuratowski map is the same
//! formula over the whole space.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::metric::MetricSpace;
use crate::scalar::Scalar;

/// Element of `l∞(B)`: one value per ball point, in the ball's order.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordVector<S> {
    points: Arc<[usize]>,
    values: Vec<S>,
}

impl<S: Scalar> CoordVector<S> {
    pub fn new(points: Arc<[usize]>, values: Vec<S>) -> Self {
        assert_eq!(points.len(), values.len(), "one value per ball point");
        CoordVector { points, values }
    }

    pub fn zeros(points: Arc<[usize]>) -> Self {
        let values = vec![S::zero(); points.len()];
        CoordVector { points, values }
    }

    pub fn points(&self) -> &Arc<[usize]> {
        &self.points
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at point index `s` of the underlying space, if `s` is in the ball.
    pub fn at_point(&self, s: usize) -> Option<&S> {
        self.points.iter().position(|&p| p == s).map(|k| &self.values[k])
    }

    pub fn same_indexing(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.points, &other.points) || self.points == other.points
    }

    /// `max_s |u_s|`.
    pub fn sup_norm(&self) -> S {
        self.values.iter().map(Scalar::abs).reduce(S::max_of).unwrap_or_else(S::zero)
    }

    /// `||self - other||∞` without materializing the difference.
    pub fn sup_dist(&self, other: &Self) -> S {
        debug_assert!(self.same_indexing(other));
        S::sup_dist_slices(&self.values, &other.values)
    }

    pub fn scaled(&self, alpha: &S) -> Self {
        CoordVector { points: self.points.clone(), values: self.values.iter().map(|v| v.clone() * alpha).collect() }
    }

    pub(crate) fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Self {
        debug_assert!(self.same_indexing(other));
        CoordVector {
            points: self.points.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Scalar::is_zero)
    }

    /// Number of nonzero coordinates.
    pub fn support_size(&self) -> usize {
        self.values.iter().filter(|v| !v.is_zero()).count()
    }
}

/// `phi` on an explicit ball indexing; `t` must belong to it.
pub(crate) fn phi_on<S: Scalar>(space: &MetricSpace<S>, ball: &Arc<[usize]>, t: usize) -> CoordVector<S> {
    let values = ball.iter().map(|&s| space.d(s, t).clone() - space.norm(s)).collect();
    CoordVector { points: ball.clone(), values }
}

/// `phi_n(t)` over `B_n = B(t0, 2^{n+1})`.
pub fn phi<S: Scalar>(space: &MetricSpace<S>, n: usize, t: usize) -> Result<CoordVector<S>> {
    let ball: Arc<[usize]> = space.ball(n).into();
    if !ball.contains(&t) {
        return Err(Error::NotInBall { point: space.name(t).to_string(), shell: n });
    }
    Ok(phi_on(space, &ball, t))
}

/// Fréchet map of the whole space, one coordinate per point.
#[derive(Clone, Debug)]
pub struct KuratowskiMap<S> {
    coords: Vec<CoordVector<S>>,
}

impl<S: Scalar> KuratowskiMap<S> {
    pub fn image(&self, t: usize) -> &CoordVector<S> {
        &self.coords[t]
    }

    pub fn distance(&self, a: usize, b: usize) -> S {
        self.coords[a].sup_dist(&self.coords[b])
    }

    /// Coordinates touched by `K(t)`.
    pub fn support_size(&self, t: usize) -> usize {
        self.coords[t].support_size()
    }
}

pub fn kuratowski<S: Scalar>(space: &MetricSpace<S>) -> KuratowskiMap<S> {
    let all: Arc<[usize]> = space.norm_order().into();
    KuratowskiMap { coords: (0..space.len()).map(|t| phi_on(space, &all, t)).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;

    fn q(n: i64) -> Exact {
        Exact::from(n)
    }

    // t0 - a - b with unit steps of 2.
    fn path() -> MetricSpace<Exact> {
        let rows = vec![vec![q(0), q(2), q(4)], vec![q(2), q(0), q(2)], vec![q(4), q(2), q(0)]];
        MetricSpace::new(vec!["t0".into(), "a".into(), "b".into()], rows, 0).unwrap()
    }

    #[test]
    fn phi_values_on_path() {
        let s = path();
        let a = phi(&s, 1, 1).unwrap();
        let b = phi(&s, 1, 2).unwrap();
        assert_eq!(a.values(), &[q(2), q(-2), q(-2)]);
        assert_eq!(b.values(), &[q(4), q(0), q(-4)]);
        assert_eq!(a.sup_dist(&b), q(2));
        assert!(phi(&s, 1, 0).unwrap().is_zero());
    }

    #[test]
    fn phi_outside_ball_is_domain_error() {
        let s = path();
        assert!(phi(&s, 0, 1).is_ok());
        assert!(matches!(phi(&s, 0, 2), Err(Error::NotInBall { shell: 0, .. })));
    }

    #[test]
    fn phi_norm_is_point_norm() {
        let s = path();
        for t in 0..3 {
            assert_eq!(phi(&s, 1, t).unwrap().sup_norm(), *s.norm(t));
        }
    }

    #[test]
    fn kuratowski_two_points() {
        let rows = vec![vec![q(0), q(5)], vec![q(5), q(0)]];
        let s = MetricSpace::new(vec!["x".into(), "y".into()], rows, 0).unwrap();
        let k = kuratowski(&s);
        assert_eq!(k.distance(0, 1), q(5));
        assert!(k.image(0).is_zero());
    }

    #[test]
    fn kuratowski_support_counts() {
        let s = path();
        let k = kuratowski(&s);
        assert_eq!(k.support_size(1), 3);
        assert_eq!(k.support_size(2), 2);
        assert_eq!(k.support_size(0), 0);
    }
}
