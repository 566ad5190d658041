//! Seeded property suite touching every module; one line per suite.

use hilbvol::banach::{Atom, Functional, PartitionOfUnity, PolytopeNorm, QuadForm};
use hilbvol::besicovitch::{self, Verdict};
use hilbvol::dilation::{self, SourceGeometry};
use hilbvol::fixtures;
use hilbvol::john::{self, JohnParams, VolumeParams};
use hilbvol::linalg::{gaussian, random_invertible, Matrix};
use hilbvol::metric::{self, PartialFunction};
use hilbvol::periodic::{self, PeriodicMetric, StableNormParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Suite {
    failures: usize,
}

impl Suite {
    fn check(&mut self, name: &str, run: impl FnOnce() -> Result<(), String>) {
        match run() {
            Ok(()) => println!("selftest: {name} ok"),
            Err(msg) => {
                println!("selftest: {name} FAILED: {msg}");
                self.failures += 1;
            }
        }
    }
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

pub fn run(seed: u64) -> i32 {
    let mut suite = Suite { failures: 0 };

    suite.check("norm axioms", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x01);
        for _ in 0..20 {
            let dim = rng.gen_range(2..=4);
            let norm = fixtures::random_symmetric_polytope(dim, rng.gen_range(dim..20), &mut rng);
            for _ in 0..50 {
                let x: Vec<f64> = (0..dim).map(|_| gaussian(&mut rng)).collect();
                let y: Vec<f64> = (0..dim).map(|_| gaussian(&mut rng)).collect();
                let t: f64 = 3.0 * gaussian(&mut rng);
                let nx = norm.eval(&x).map_err(|e| e.to_string())?;
                let ny = norm.eval(&y).map_err(|e| e.to_string())?;
                let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
                let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
                ensure(
                    (norm.eval(&tx).unwrap() - t.abs() * nx).abs() <= 1e-12 * (1.0 + nx),
                    "homogeneity",
                )?;
                ensure(
                    norm.eval(&xy).unwrap() <= nx + ny + 1e-12 * (1.0 + nx + ny),
                    "triangle inequality",
                )?;
                ensure(nx > 0.0 || x.iter().all(|&v| v == 0.0), "definiteness")?;
            }
        }
        Ok(())
    });

    suite.check("facet dual norms", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x02);
        for _ in 0..10 {
            let dim = rng.gen_range(2..=4);
            let norm = fixtures::random_symmetric_polytope(dim, rng.gen_range(dim..12), &mut rng);
            // every facet functional sits in the dual ball; the extreme
            // ones touch its boundary, redundant ones fall short
            let mut touch = 0.0f64;
            for f in norm.facets() {
                let d = norm.dual_norm(f).map_err(|e| e.to_string())?;
                ensure(d.value <= 1.0 + 1e-9, format!("dual {}", d.value))?;
                touch = touch.max(d.value);
            }
            ensure(touch >= 1.0 - 1e-9, "at least one facet is exposed")?;
        }
        Ok(())
    });

    suite.check("partition residuals", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x03);
        for _ in 0..10 {
            let n = rng.gen_range(2..=5);
            let mu = fixtures::random_exact_partition(n, &mut rng);
            ensure(mu.residual() <= 1e-10, format!("residual {}", mu.residual()))?;
        }
        Ok(())
    });

    suite.check("hadamard and inverse-lipschitz", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x04);
        for _ in 0..500 {
            let n = rng.gen_range(2..=6);
            let d = random_invertible(n, &mut rng);
            let h = dilation::hadamard_check(&d).map_err(|e| e.to_string())?;
            ensure(h.holds, format!("hadamard {:?} vs {:?}", h.lhs, h.rhs))?;
            let w = dilation::weighted_hadamard_check(&d).map_err(|e| e.to_string())?;
            ensure(w.holds, "weighted hadamard")?;
            let inv = dilation::inverse_lip_identity(&d).map_err(|e| e.to_string())?;
            ensure(inv.relative_gap <= 1e-9, format!("gap {}", inv.relative_gap))?;
        }
        Ok(())
    });

    suite.check("l2-dilation partition independence", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x05);
        let n = 4;
        let d = Matrix::from_fn(n, n, |_, _| gaussian(&mut rng));
        let hs = dilation::hs_norm(&d);
        for _ in 0..20 {
            let mu = fixtures::random_exact_partition(n, &mut rng);
            let v = dilation::lq_dilation(&d, &mu, 2.0, SourceGeometry::Euclidean)
                .map_err(|e| e.to_string())?;
            ensure((v - hs).abs() <= 1e-9 * hs.max(1.0), format!("{v} vs {hs}"))?;
        }
        Ok(())
    });

    suite.check("john exact cases", || {
        let params = JohnParams::default();
        let linf = PolytopeNorm::linf(2);
        let r = john::john_form(&linf, &params).map_err(|e| e.to_string())?;
        ensure(
            r.form.matrix().sub(&Matrix::identity(2)).frobenius() <= 1e-8,
            "square John form",
        )?;
        ensure((r.partition.total_mass() - 2.0).abs() <= 1e-6, "square mass")?;
        let vol = john::john_volume_of_unit_ball(&linf, &r.form, &VolumeParams::default())
            .map_err(|e| e.to_string())?;
        ensure((vol.value - 4.0).abs() <= 1e-8, "square volume 4")?;

        let l1 = PolytopeNorm::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        let r = john::john_form(&l1, &params).map_err(|e| e.to_string())?;
        let vol = john::john_volume_of_unit_ball(&l1, &r.form, &VolumeParams::default())
            .map_err(|e| e.to_string())?;
        ensure((vol.value - 4.0).abs() <= 1e-7, "cross volume 4")?;

        let m = 128;
        let circle: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / m as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
        let ball = PolytopeNorm::from_rows(&circle).unwrap();
        let r = john::john_form(&ball, &params).map_err(|e| e.to_string())?;
        let vol = john::john_volume_of_unit_ball(&ball, &r.form, &VolumeParams::default())
            .map_err(|e| e.to_string())?;
        ensure(
            (vol.value - std::f64::consts::PI).abs() <= 1e-3,
            format!("disc volume {}", vol.value),
        )?;
        Ok(())
    });

    suite.check("john random domination", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x06);
        for _ in 0..10 {
            let dim = rng.gen_range(2..=5);
            let norm = fixtures::random_symmetric_polytope(dim, rng.gen_range(dim + 1..30), &mut rng);
            let r = john::john_form(&norm, &JohnParams::default()).map_err(|e| e.to_string())?;
            ensure(r.converged, "converged")?;
            ensure(
                r.residuals.max_domination_violation <= 1e-9,
                format!("domination {}", r.residuals.max_domination_violation),
            )?;
            ensure(r.residuals.decomposition <= 1e-6, "decomposition")?;
            ensure(r.residuals.mass_gap <= 1e-6, "mass")?;
        }
        Ok(())
    });

    suite.check("mcshane fast equals oracle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x07);
        for _ in 0..30 {
            let n = rng.gen_range(6..60);
            let mut edges = Vec::new();
            for i in 1..n {
                edges.push((i, rng.gen_range(0..i), rng.gen_range(0.1..2.0)));
            }
            let g = metric::AdjGraph::new(n, &edges).unwrap();
            let dom: Vec<usize> = (0..n).step_by(3).collect();
            let field = metric::multi_dijkstra(&g, &[0]).unwrap();
            let lambda = rng.gen_range(0.5..2.0);
            let vals: Vec<f64> = dom.iter().map(|&i| 0.8 * lambda * field[i]).collect();
            let pf = PartialFunction::new(dom, vals).unwrap();
            let fast = metric::mcshane_extend(&g, &pf, lambda).map_err(|e| e.to_string())?;
            let naive =
                metric::mcshane_extend_naive(&g, &pf, lambda).map_err(|e| e.to_string())?;
            for (a, b) in fast.values.iter().zip(&naive.values) {
                ensure((a - b).abs() <= 1e-12, format!("{a} vs {b}"))?;
            }
            ensure(fast.lipschitz <= lambda * (1.0 + 1e-12), "no Lipschitz increase")?;
        }
        Ok(())
    });

    suite.check("separated nets", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x08);
        for _ in 0..10 {
            let n = rng.gen_range(10..50);
            let mut edges = Vec::new();
            for i in 1..n {
                edges.push((i, rng.gen_range(0..i), rng.gen_range(0.2..1.5)));
            }
            let g = metric::AdjGraph::new(n, &edges).unwrap();
            let sep = rng.gen_range(0.5..2.5);
            let net = metric::separated_net(&g, sep).unwrap();
            let mut cover = vec![f64::INFINITY; n];
            for (ai, &a) in net.iter().enumerate() {
                let field = metric::multi_dijkstra(&g, &[a]).unwrap();
                for (bi, &b) in net.iter().enumerate() {
                    if ai < bi {
                        ensure(field[b] >= sep - 1e-12, "separation")?;
                    }
                }
                for (c, f) in cover.iter_mut().zip(&field) {
                    *c = c.min(*f);
                }
            }
            ensure(cover.iter().all(|&c| c < sep), "covering")?;
        }
        Ok(())
    });

    suite.check("stencil calibration", || {
        let cal = metric::stencil_calibration(2, 3, 128, 64).map_err(|e| e.to_string())?;
        ensure(cal.eps <= 0.02, format!("eps {}", cal.eps))
    });

    suite.check("stable norm brackets", || {
        let pm = PeriodicMetric::new(fixtures::stripe_cell(12, 3, 2.0)).unwrap();
        let p = StableNormParams::default();
        let e = periodic::stable_norm(&pm, &[0, 1], 8, &p).map_err(|e| e.to_string())?;
        let oracle = periodic::stable_norm(&pm, &[0, 1], 16, &p).map_err(|e| e.to_string())?;
        ensure(
            oracle.estimate >= e.lo - 1e-12 && oracle.estimate <= e.hi + 1e-12,
            "oracle inside bracket",
        )?;
        let flat = PeriodicMetric::new(fixtures::flat_cell(2, 12, 3)).unwrap();
        let f = periodic::stable_norm(&flat, &[1, 0], 4, &p).map_err(|e| e.to_string())?;
        ensure((f.estimate - 1.0).abs() <= 1e-12, "flat axis exact")
    });

    suite.check("cube checks", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x09);
        let flat = besicovitch::CubicalSpace::new(fixtures::flat_cube(2, 48, 3)).unwrap();
        let r = besicovitch::cube_inequality_check(&flat).map_err(|e| e.to_string())?;
        ensure(r.verdict == Verdict::Pass, "flat cube")?;
        ensure(r.margin.abs() <= r.tol_grid, "flat cube near equality")?;
        for _ in 0..3 {
            let gm = fixtures::random_conformal_cube(2, 48, 3, &mut rng);
            let cs = besicovitch::CubicalSpace::new(gm).unwrap();
            let r = besicovitch::cube_inequality_check(&cs).map_err(|e| e.to_string())?;
            ensure(r.verdict != Verdict::Fail, format!("margin {}", r.margin))?;
            ensure(r.cross_check_ok, "certificate route")?;
        }
        Ok(())
    });

    suite.check("simplex checks", || {
        for n in 1..=2usize {
            let ss = besicovitch::SimplexSpace::flat(n, 32, 3);
            let r = besicovitch::simplex_inequality_check(&ss).map_err(|e| e.to_string())?;
            ensure(r.verdict != Verdict::Fail, format!("flat simplex n={n}"))?;
            ensure(r.partition_residual <= 1e-12, "axis decomposition exact")?;
        }
        Ok(())
    });

    suite.check("acute factorization", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0a);
        let cube = hilbvol::acute::unit_cube(3);
        ensure(
            matches!(
                hilbvol::acute::simplex_product_factorization(&cube).map_err(|e| e.to_string())?,
                hilbvol::acute::Factorization::Product(_)
            ),
            "cube factors",
        )?;
        for _ in 0..5 {
            let p = fixtures::random_obtuse_polytope(2, &mut rng);
            ensure(
                matches!(
                    hilbvol::acute::simplex_product_factorization(&p)
                        .map_err(|e| e.to_string())?,
                    hilbvol::acute::Factorization::NotAProduct { .. }
                ),
                "obtuse non-product",
            )?;
        }
        Ok(())
    });

    suite.check("simplex axis partition", || {
        for n in 2..=3usize {
            let lambda2 = n as f64 / (n as f64 + 1.0);
            let atoms: Vec<Atom> = besicovitch::regular_simplex_outward_normals(n)
                .into_iter()
                .map(|u| Atom { weight: lambda2, functional: Functional::new(u).unwrap() })
                .collect();
            let p = PartitionOfUnity::with_tolerance(atoms, QuadForm::identity(n), 1e-12)
                .map_err(|e| e.to_string())?;
            ensure(p.residual() <= 1e-12, "residual")?;
        }
        Ok(())
    });

    if suite.failures == 0 {
        println!("selftest: all suites passed (seed {seed})");
        0
    } else {
        println!("selftest: {} suite(s) failed (seed {seed})", suite.failures);
        1
    }
}
