use nalgebra::{DMatrix, DVector};
use normrig::classify::{self, ClassifyConfig};
use normrig::isometry::{self, LieConfig};
use normrig::sampling::{gaussian_placement, trial_rng};
use normrig::{
    io, rigidity, Framework32, Framework64, Graph, NormedSpace32, NormedSpace64, Placement32,
};
use proptest::prelude::*;

fn space(kind: u8, d: usize) -> NormedSpace64 {
    match kind % 4 {
        0 => NormedSpace64::standard_euclidean(d).unwrap(),
        1 => NormedSpace64::lp(d, 3.0).unwrap(),
        2 => NormedSpace64::l_inf(d).unwrap(),
        _ => NormedSpace64::diamond(d).unwrap(),
    }
}

fn graph_from_mask(n: usize, mask: u32) -> Graph {
    let mut edges = Vec::new();
    let mut bit = 0;
    for v in 0..n {
        for w in v + 1..n {
            if mask >> bit & 1 == 1 {
                edges.push((v, w));
            }
            bit += 1;
        }
    }
    Graph::from_indices(n, &edges).unwrap()
}

fn framework(kind: u8, d: usize, n: usize, mask: u32, seed: u64) -> Option<Framework64> {
    let mut rng = trial_rng(seed, 9);
    let fw = Framework64::new(
        graph_from_mask(n, mask),
        gaussian_placement(n, d, &mut rng),
        space(kind, d),
    )
    .ok()?;
    fw.is_well_positioned(1e-9).ok()?.then_some(fw)
}

/// Signed permutations are isometries of every space used here.
fn signed_permutation(d: usize, seed: u64) -> DMatrix<f64> {
    let mut perm: Vec<usize> = (0..d).collect();
    let mut s = seed;
    for i in (1..d).rev() {
        perm.swap(i, (s % (i as u64 + 1)) as usize);
        s /= i as u64 + 1;
    }
    DMatrix::from_fn(d, d, |r, c| {
        if perm[r] == c {
            if seed >> r & 1 == 1 {
                -1.0
            } else {
                1.0
            }
        } else {
            0.0
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn rank_nullity(kind in 0u8..4, d in 2usize..4, n in 2usize..6, mask in any::<u32>(), seed in any::<u64>()) {
        if let Some(fw) = framework(kind, d, n, mask, seed) {
            let r = rigidity::rigidity_matrix(&fw).unwrap();
            let f = rigidity::flex_space(&fw, 1e-9).unwrap();
            prop_assert_eq!(r.rank(1e-9) + f.dim(), d * n);
        }
    }

    #[test]
    fn dims_invariant_under_isometry(kind in 0u8..4, d in 2usize..4, n in 2usize..6, mask in any::<u32>(), seed in any::<u64>()) {
        if let Some(fw) = framework(kind, d, n, mask, seed) {
            let cfg = ClassifyConfig::default();
            let a = signed_permutation(d, seed);
            let t = DVector::from_fn(d, |i, _| i as f64 - 0.5);
            let moved = fw.with_placement(fw.placement().transformed(&a, &t)).unwrap();
            let r0 = classify::classify(&fw, &cfg).unwrap();
            let r1 = classify::classify(&moved, &cfg).unwrap();
            prop_assert_eq!((r0.rank, r0.flex_dim, r0.trivial_dim), (r1.rank, r1.flex_dim, r1.trivial_dim));
        }
    }

    #[test]
    fn deleting_an_edge_never_lowers_flex_dim(kind in 0u8..4, d in 2usize..4, n in 3usize..6, mask in any::<u32>(), seed in any::<u64>()) {
        if let Some(fw) = framework(kind, d, n, mask, seed) {
            if fw.graph().edge_count() > 0 {
                let e = (seed % fw.graph().edge_count() as u64) as usize;
                let smaller = fw.with_graph(fw.graph().without_edge(e)).unwrap();
                let f0 = rigidity::flex_space(&fw, 1e-9).unwrap().dim();
                let f1 = rigidity::flex_space(&smaller, 1e-9).unwrap().dim();
                prop_assert!(f1 == f0 || f1 == f0 + 1);
            }
        }
    }

    #[test]
    fn framework_json_round_trip(kind in 0u8..4, d in 2usize..4, n in 1usize..6, mask in any::<u32>(), seed in any::<u64>()) {
        if let Some(fw) = framework(kind, d, n, mask, seed) {
            let text = io::to_pretty(&io::framework_to_value(&fw));
            let back = io::parse_framework(&text, true).unwrap();
            prop_assert_eq!(back.graph().edges(), fw.graph().edges());
            prop_assert_eq!(back.placement(), fw.placement());
            prop_assert_eq!(back.space(), fw.space());
        }
    }
}

#[test]
fn relabeling_preserves_classification() {
    let fw = framework(1, 2, 5, 0b1011011111, 4).unwrap();
    let perm = [3, 0, 4, 1, 2];
    let points = (0..5)
        .map(|k| fw.placement().point(perm[k]).clone())
        .collect();
    let mut inverse = [0; 5];
    for (k, &p) in perm.iter().enumerate() {
        inverse[p] = k;
    }
    let relabeled = Framework64::new(
        fw.graph().permuted(&inverse),
        normrig::Placement64::new(2, points).unwrap(),
        fw.space().clone(),
    )
    .unwrap();
    let cfg = ClassifyConfig::default();
    let (a, b) = (
        classify::classify(&fw, &cfg).unwrap(),
        classify::classify(&relabeled, &cfg).unwrap(),
    );
    assert_eq!(
        (a.rank, a.flex_dim, a.trivial_dim),
        (b.rank, b.flex_dim, b.trivial_dim)
    );
}

#[test]
fn single_precision_agrees_on_small_examples() {
    let rows: &[&[f64]] = &[&[0.1, -0.3], &[1.2, 0.2], &[0.4, 0.9], &[-0.7, 0.5]];
    for (space, expected) in [
        (NormedSpace32::standard_euclidean(2).unwrap(), (5, 3, 3)),
        (NormedSpace32::lp(2, 3.0).unwrap(), (6, 2, 2)),
    ] {
        let fw = Framework32::new(
            Graph::complete(4),
            Placement32::from_rows(rows).unwrap(),
            space,
        )
        .unwrap();
        let r = classify::classify(&fw, &ClassifyConfig::default()).unwrap();
        assert_eq!((r.rank, r.flex_dim, r.trivial_dim), expected);
    }
}

#[test]
fn lie_algebra_is_seed_independent() {
    for s in [
        NormedSpace64::standard_euclidean(3).unwrap(),
        NormedSpace64::lp(3, 1.5).unwrap(),
    ] {
        let a = isometry::linear_isometry_lie_algebra(&s, &LieConfig::with_seed(1)).unwrap();
        let b = isometry::linear_isometry_lie_algebra(&s, &LieConfig::with_seed(99)).unwrap();
        assert_eq!(a.dim(), b.dim());
    }
}
