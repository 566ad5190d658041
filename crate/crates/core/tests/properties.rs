//! Property tests over randomized inputs: norm axioms, extension laws and
//! bracket structure.

use hilbvol::banach::PolytopeNorm;
use hilbvol::metric::{
    mcshane_extend, multi_dijkstra, AdjGraph, DenseMetric, FiniteMetricSpace, PartialFunction,
};
use proptest::prelude::*;

fn arb_norm() -> impl Strategy<Value = PolytopeNorm> {
    (2usize..=3, 0u64..1_000_000).prop_map(|(dim, seed)| {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        hilbvol::fixtures::random_symmetric_polytope(dim, dim + 3, &mut rng)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_axioms(norm in arb_norm(),
                   x in prop::collection::vec(-10.0f64..10.0, 3),
                   y in prop::collection::vec(-10.0f64..10.0, 3),
                   t in -5.0f64..5.0) {
        let n = norm.dim();
        let x = &x[..n];
        let y = &y[..n];
        let nx = norm.eval(x).unwrap();
        let ny = norm.eval(y).unwrap();
        let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
        prop_assert!((norm.eval(&tx).unwrap() - t.abs() * nx).abs() <= 1e-9 * (1.0 + nx));
        let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        prop_assert!(norm.eval(&xy).unwrap() <= nx + ny + 1e-9 * (1.0 + nx + ny));
        if x.iter().any(|&v| v != 0.0) {
            prop_assert!(nx > 0.0);
        }
    }

    #[test]
    fn dual_norm_bounds_pairings(norm in arb_norm(),
                                 l in prop::collection::vec(-3.0f64..3.0, 3),
                                 x in prop::collection::vec(-3.0f64..3.0, 3)) {
        let n = norm.dim();
        let l = &l[..n];
        let x = &x[..n];
        prop_assume!(l.iter().any(|&v| v != 0.0));
        let f = hilbvol::banach::Functional::new(l.to_vec()).unwrap();
        let dual = norm.dual_norm(&f).unwrap().value;
        let nx = norm.eval(x).unwrap();
        // the defining inequality <l, x> <= ||l||* ||x||
        let pairing: f64 = l.iter().zip(x).map(|(a, b)| a * b).sum();
        prop_assert!(pairing.abs() <= dual * nx + 1e-9 * (1.0 + dual * nx));
    }

    #[test]
    fn mcshane_laws(seed in 0u64..1_000_000, lambda in 0.3f64..3.0) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(5..40);
        let mut edges = Vec::new();
        for i in 1..n {
            edges.push((i, rng.gen_range(0..i), rng.gen_range(0.1..2.0)));
        }
        let g = AdjGraph::new(n, &edges).unwrap();
        let base = multi_dijkstra(&g, &[0]).unwrap();
        let dom: Vec<usize> = (0..n).step_by(2).collect();
        let vals: Vec<f64> = dom.iter().map(|&i| 0.9 * lambda * base[i]).collect();
        let f0 = PartialFunction::new(dom.clone(), vals.clone()).unwrap();
        let ext = mcshane_extend(&g, &f0, lambda).unwrap();

        // no Lipschitz increase
        prop_assert!(ext.lipschitz <= lambda * (1.0 + 1e-12));
        // agreement on the domain
        for (&i, &v) in dom.iter().zip(&vals) {
            prop_assert!((ext.values[i] - v).abs() <= 1e-10);
        }
        // minimality: any lambda-Lipschitz function matching the data
        // dominates the extension; the cone from a single data point is one
        let pick = dom[dom.len() / 2];
        let cone_base = multi_dijkstra(&g, &[pick]).unwrap();
        for (u, &e) in ext.values.iter().enumerate() {
            let cone = vals[dom.len() / 2] - lambda * cone_base[u];
            prop_assert!(e >= cone - 1e-10);
        }
    }

    #[test]
    fn stable_norm_bracket_structure(seed in 0u64..100_000, kmax in 2usize..8) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let cell = hilbvol::fixtures::random_conformal_cell(2, 8, 2, &mut rng);
        let pm = hilbvol::periodic::PeriodicMetric::new(cell).unwrap();
        let est = hilbvol::periodic::stable_norm(
            &pm,
            &[1, 0],
            kmax,
            &hilbvol::periodic::StableNormParams::default(),
        )
        .unwrap();
        prop_assert!(est.lo <= est.estimate && est.estimate <= est.hi);
        prop_assert!(est.hi - est.lo <= 2.0 * est.d_cell / est.k_used as f64 + 1e-12);
        // subadditive sequence lies above the lower bound
        for a in &est.per_k {
            prop_assert!(*a >= est.lo - 1e-12);
        }
    }
}

#[test]
fn dense_and_graph_representations_agree() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let n = 30;
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push((i, rng.gen_range(0..i), rng.gen_range(0.2..1.5)));
    }
    let g = AdjGraph::new(n, &edges).unwrap();
    // distance array of the same space
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let row = multi_dijkstra(&g, &[i]).unwrap();
        d[i * n..(i + 1) * n].copy_from_slice(&row);
    }
    let dense = FiniteMetricSpace::Dense(DenseMetric::new(n, d).unwrap());
    let graph = FiniteMetricSpace::Graph(g);

    let dom: Vec<usize> = (0..n).step_by(4).collect();
    let vals: Vec<f64> = dom.iter().map(|&i| (i as f64 * 0.3).sin()).collect();
    let lambda = 4.0;
    let f0 = PartialFunction::new(dom, vals).unwrap();
    let a = mcshane_extend(&dense, &f0, lambda).unwrap();
    let b = mcshane_extend(&graph, &f0, lambda).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() <= 1e-9, "{x} vs {y}");
    }

    let net_a = hilbvol::metric::separated_net(&dense, 1.7).unwrap();
    let net_b = hilbvol::metric::separated_net(&graph, 1.7).unwrap();
    assert_eq!(net_a, net_b);

    let com_a = hilbvol::metric::center_of_mass(&dense, &[(2, 1.0), (17, 2.0)]).unwrap();
    let com_b = hilbvol::metric::center_of_mass(&graph, &[(2, 1.0), (17, 2.0)]).unwrap();
    assert_eq!(com_a, com_b);

    // triangle validation rejects a corrupted array
    let mut bad = vec![0.0; 9];
    bad[1] = 10.0;
    bad[3] = 10.0;
    bad[2] = 1.0;
    bad[6] = 1.0;
    bad[5] = 1.0;
    bad[7] = 1.0;
    assert!(DenseMetric::new(3, bad).is_err());
}
