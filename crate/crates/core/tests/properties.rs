use std::sync::Arc;

use lfembed::analysis::{classify, distortion_of};
use lfembed::{
    amalgamate, assign_shells, embed_space, from_graph, generate, geometry_profile, make_operators, phi, BlockVector,
    CoordVector, Exact, Family, Graph, MetricSpace, OperatorMode, Scalar,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        (1usize..=2, 1usize..=3).prop_map(|(dim, radius)| Family::Grid { dim, radius }),
        (2usize..=20, 0.05f64..0.6, any::<u64>()).prop_map(|(n, p, seed)| Family::RandomGraph { n, p, seed }),
        (2usize..=20, any::<u64>()).prop_map(|(n, seed)| Family::RandomTree { n, seed }),
        (2usize..=16, 1usize..=3, any::<u64>()).prop_map(|(n, dim, seed)| Family::UniformPoints { n, dim, seed }),
    ]
}

fn mode() -> impl Strategy<Value = OperatorMode> {
    prop_oneof![
        Just(OperatorMode::Identity),
        Just(OperatorMode::Half),
        any::<u64>().prop_map(|seed| OperatorMode::Random { seed }),
    ]
}

fn space(f: &Family) -> MetricSpace<Exact> {
    generate::<Exact>(f).unwrap().space
}

/// Shortest paths by Floyd-Warshall over a complete graph of positive weights.
#[allow(clippy::needless_range_loop)]
fn closure(n: usize, weights: &[i64]) -> Vec<Vec<Exact>> {
    let mut d = vec![vec![0i64; n]; n];
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            d[i][j] = weights[k % weights.len()];
            d[j][i] = d[i][j];
            k += 1;
        }
    }
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[i][j] = d[i][j].min(d[i][m] + d[m][j]);
            }
        }
    }
    d.into_iter().map(|r| r.into_iter().map(Exact::from).collect()).collect()
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

/// Exhaustive triangle scan, written out independently of `validate`.
fn brute_force_metric(d: &[Vec<Exact>]) -> bool {
    let n = d.len();
    (0..n).all(|i| {
        d[i][i].is_zero()
            && (0..n).all(|j| {
                d[i][j] == d[j][i]
                    && (i == j || d[i][j] > Exact::from(0))
                    && (0..n).all(|k| d[i][k] <= d[i][j].clone() + &d[j][k])
            })
    })
}

fn exact_of(p: i64, q: i64) -> (Exact, BigRational) {
    (Exact::new(p, q), BigRational::new(BigInt::from(p), BigInt::from(q)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_spaces_are_metrics(f in family()) {
        let s = space(&f);
        prop_assert!(s.validate().is_ok(), "{}", s.validate().describe(s.names()));
        prop_assert!(brute_force_metric(&s.rows()));
    }

    #[test]
    fn generators_are_reproducible(f in family()) {
        prop_assert_eq!(space(&f).rows(), space(&f).rows());
    }

    #[test]
    fn validate_agrees_with_brute_force(n in 2usize..9, weights in prop::collection::vec(1i64..20, 1..40), bump in 0i64..30, at in 0usize..64) {
        let mut d = closure(n, &weights);
        prop_assert!(MetricSpace::new(names(n), d.clone(), 0).unwrap().validate().is_ok());
        let (i, j) = (at % n, (at / n + 1 + at % n) % n);
        if i != j {
            let v = d[i][j].clone() + &Exact::from(bump);
            d[i][j] = v.clone();
            d[j][i] = v;
        }
        let report = MetricSpace::new(names(n), d.clone(), 0).unwrap().validate();
        prop_assert_eq!(report.is_ok(), brute_force_metric(&d));
    }

    #[test]
    fn ball_maps_are_isometric(f in family()) {
        let (s, _) = space(&f).rescale_to_unit_gap().unwrap();
        let top = assign_shells(&s).unwrap().max_shell().unwrap() + 1;
        for k in 0..=top {
            let ball = s.ball(k);
            let images: Vec<_> = ball.iter().map(|&t| phi(&s, k, t).unwrap()).collect();
            for (x, &t) in images.iter().zip(ball.iter()) {
                prop_assert_eq!(x.sup_norm(), s.norm(t).clone());
                for (y, &u) in images.iter().zip(ball.iter()) {
                    prop_assert_eq!(x.sup_dist(y), s.d(t, u).clone());
                }
            }
        }
    }

    #[test]
    fn balls_nest_and_exhaust(f in family()) {
        let (s, _) = space(&f).rescale_to_unit_gap().unwrap();
        let order = s.norm_order();
        let mut k = 0;
        loop {
            let ball = s.ball(k);
            prop_assert_eq!(&ball[..], &order[..ball.len()]);
            prop_assert!(s.ball(k + 1).len() >= ball.len());
            if ball.len() == s.len() {
                break;
            }
            k += 1;
        }
        let max = s.max_norm().to_f64();
        prop_assert!(k as f64 <= (max.log2().ceil() - 1.0).max(0.0));
    }

    #[test]
    fn shells_partition_norms(f in family()) {
        let (s, _) = space(&f).rescale_to_unit_gap().unwrap();
        let shells = assign_shells(&s).unwrap();
        for t in 0..s.len() {
            match shells.get(t) {
                None => prop_assert_eq!(t, s.basepoint()),
                Some(sh) => {
                    let lo = Exact::pow2(sh.n as i32);
                    prop_assert!(lo <= *s.norm(t) && *s.norm(t) < Exact::pow2(sh.n as i32 + 1));
                    prop_assert!(sh.lambda > Exact::from(0) && sh.lambda <= Exact::from(1));
                    prop_assert_eq!(sh.lambda.clone(), (lo.clone() * &Exact::from(2) - s.norm(t)) / &lo);
                }
            }
        }
    }

    #[test]
    fn operators_satisfy_the_sandwich(f in family(), m in mode(), samples in prop::collection::vec(-50i64..50, 1..200)) {
        let (s, _) = space(&f).rescale_to_unit_gap().unwrap();
        let half = Exact::new(1, 2);
        for op in make_operators(&s, m).unwrap() {
            prop_assert!(op.satisfies_sandwich());
            prop_assert!(op.conorm_bound >= half && op.norm_bound <= Exact::from(1));
            let pts: Arc<[usize]> = s.ball(op.shell).into();
            let dim = pts.len();
            let mut vectors: Vec<Vec<Exact>> = (0..dim)
                .map(|i| (0..dim).map(|j| Exact::from((i == j) as i64)).collect())
                .collect();
            vectors.push((0..dim).map(|j| Exact::from(samples[j % samples.len()])).collect());
            for v in vectors {
                let u = CoordVector::new(pts.clone(), v);
                let image = op.apply(&u).sup_norm();
                prop_assert!(image <= u.sup_norm());
                prop_assert!(image >= op.conorm_bound.clone() * &u.sup_norm());
            }
        }
    }

    #[test]
    fn block_norm_is_a_norm(
        a in prop::collection::vec((0usize..4, prop::collection::vec(-20i64..20, 3)), 0..4),
        b in prop::collection::vec((0usize..4, prop::collection::vec(-20i64..20, 3)), 0..4),
        alpha in -7i64..7,
    ) {
        let pts: Arc<[usize]> = vec![0, 1, 2].into();
        let make = |v: &[(usize, Vec<i64>)]| {
            BlockVector::from_blocks(v.iter().map(|(k, c)| (*k, CoordVector::new(pts.clone(), c.iter().map(|&x| Exact::from(x)).collect()))))
        };
        let (z, w) = (make(&a), make(&b));
        let sum = z.add(&w).unwrap();
        prop_assert!(sum.norm() <= z.norm() + &w.norm());
        prop_assert_eq!(z.scale(&Exact::from(alpha)).norm(), Exact::from(alpha.abs()) * &z.norm());
        prop_assert_eq!(z.dist(&w).unwrap(), z.sub(&w).unwrap().norm());
        for n in 0..4 {
            prop_assert_eq!(z.project(n).project(n), z.project(n));
            prop_assert_eq!(z.partial_sum(n).partial_sum(n), z.partial_sum(n));
            prop_assert!(z.project(n).norm() <= z.norm());
            prop_assert!(z.partial_sum(n).norm() <= z.norm());
            for m in 0..4 {
                let both = z.partial_sum(m).project(n);
                prop_assert_eq!(both, if n <= m { z.project(n) } else { BlockVector::zero() });
            }
        }
    }

    #[test]
    fn images_are_local(f in family(), m in mode()) {
        let e = embed_space(&space(&f), m).unwrap();
        let s = e.space();
        for t in 0..s.len() {
            let image = e.evaluate(t);
            match e.shells().get(t) {
                None => prop_assert_eq!(image.norm(), Exact::from(0)),
                Some(sh) => {
                    for (k, v) in image.blocks() {
                        prop_assert!(k == sh.n || k == sh.n + 1);
                        for &p in v.points().iter() {
                            prop_assert!(*s.norm(p) <= Exact::from(4) * s.norm(t));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cases_partition_pairs(a in 1i64..200, b in 1i64..200) {
        let (a, b) = (Exact::from(a.min(b)), Exact::from(a.max(b)));
        let shell = |x: &Exact| Some(x.floor_log2() as usize);
        let (lip, inv) = classify(&a, &b, shell(&a), shell(&b));
        let gap = shell(&b).unwrap() - shell(&a).unwrap();
        prop_assert_eq!(lip == lfembed::LipCase::I, a.clone() * &Exact::from(2) <= b);
        if lip == lfembed::LipCase::II2 {
            prop_assert_eq!(gap, 1);
        }
        let expected = match gap {
            0 => lfembed::InverseCase::SameShell,
            1 => lfembed::InverseCase::Adjacent,
            _ => lfembed::InverseCase::Distant,
        };
        prop_assert_eq!(inv, expected);
    }

    #[test]
    fn amalgams_are_metrics(fs in prop::collection::vec(family(), 1..5)) {
        let parts: Vec<_> = fs.iter().map(space).collect();
        let am = amalgamate(&parts).unwrap();
        prop_assert!(brute_force_metric(&am.space().rows()));
        for p in 0..parts.len() {
            prop_assert!(am.inclusion_deviation(p).is_zero());
        }
        if parts.len() == 1 {
            prop_assert_eq!(am.space().rows(), parts[0].rows());
        }
    }

    #[test]
    fn exact_arithmetic_matches_big_rationals(p in any::<i64>(), q in 1i64..i64::MAX, r in any::<i64>(), s in 1i64..i64::MAX) {
        let (x, bx) = exact_of(p, q);
        let (y, by) = exact_of(r, s);
        prop_assert_eq!((x.clone() + &y).to_big(), &bx + &by);
        prop_assert_eq!((x.clone() - &y).to_big(), &bx - &by);
        prop_assert_eq!((x.clone() * &y).to_big(), &bx * &by);
        if !y.is_zero() {
            prop_assert_eq!((x.clone() / &y).to_big(), &bx / &by);
        }
        prop_assert_eq!(x.cmp(&y), bx.cmp(&by));
        prop_assert_eq!(Exact::parse_text(&x.to_text()).unwrap(), x);
    }

    #[test]
    fn float_mode_tracks_rational_mode(f in family(), m in mode()) {
        let exact = embed_space(&space(&f), m).unwrap();
        let float = embed_space(&generate::<f64>(&f).unwrap().space, m).unwrap();
        let de = distortion_of(exact.space(), |i, j| exact.pairwise_image_distance(i, j));
        let df = distortion_of(float.space(), |i, j| float.pairwise_image_distance(i, j));
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
        prop_assert!(rel(de.lip.to_f64(), df.lip));
        prop_assert!(rel(de.dist.unwrap().to_f64(), df.dist.unwrap()));
    }
}

#[test]
fn lattice_graph_distances_are_l1() {
    for dim in 1..=3 {
        let g = generate::<Exact>(&Family::Grid { dim, radius: 3 }).unwrap().space;
        let coords: Vec<Vec<i64>> = g
            .names()
            .iter()
            .map(|n| n.trim_matches(|c| c == '(' || c == ')').split(',').map(|x| x.parse().unwrap()).collect())
            .collect();
        let mut edges = Vec::new();
        for i in 0..coords.len() {
            for j in i + 1..coords.len() {
                let l1: i64 = coords[i].iter().zip(&coords[j]).map(|(a, b)| (a - b).abs()).sum();
                if l1 == 1 {
                    edges.push((g.name(i).to_string(), g.name(j).to_string(), Exact::from(1)));
                }
            }
        }
        let graph = Graph { nodes: g.names().to_vec(), edges, basepoint: g.name(g.basepoint()).to_string() };
        let via_paths = from_graph(&graph).unwrap();
        for i in 0..coords.len() {
            for j in 0..coords.len() {
                let l1: i64 = coords[i].iter().zip(&coords[j]).map(|(a, b)| (a - b).abs()).sum();
                assert_eq!(*via_paths.d(i, j), Exact::from(l1));
                assert_eq!(*g.d(i, j), Exact::from(l1));
            }
        }
    }
}

#[test]
fn segment_profile_counts() {
    let radius = 12;
    let s = generate::<Exact>(&Family::Grid { dim: 1, radius }).unwrap().space;
    let radii: Vec<Exact> = (1..2 * radius as i64).map(|k| Exact::new(k, 2)).collect();
    let profile = geometry_profile(&s, &radii).unwrap();
    for (r, c) in radii.iter().zip(&profile.counts) {
        if *r < Exact::from(radius as i64) {
            let floor = r.to_f64().floor() as usize;
            assert_eq!(*c, 2 * floor + 1, "r = {r}");
        }
    }
    assert!(profile.counts.windows(2).all(|w| w[0] <= w[1]));
}
