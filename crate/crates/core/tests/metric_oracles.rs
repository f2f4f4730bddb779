mod common;

use fluidc::diversity::{chi_square_homogeneity, ThetaSeries};
use fluidc::gamma::chi_square_sf;
use fluidc::seed::rng_from_seed;
use fluidc::{modularity, nmi_geometric, Partition};
use rand::Rng;

#[test]
fn modularity_matches_pairwise_sum() {
    let mut rng = rng_from_seed(11);
    let mut checked = 0;
    while checked < 100 {
        let n = rng.random_range(2..=50);
        let p = rng.random_range(0.05..0.5);
        let g = common::random_graph(&mut rng, n, p);
        if g.edge_count() == 0 {
            continue;
        }
        let blocks = rng.random_range(1..=n.min(8));
        let labels = common::random_labels(&mut rng, n, blocks);
        let q = modularity(&g, &Partition::from_labels(labels.iter().copied())).unwrap();
        let oracle = common::modularity_pairwise(&g, &labels);
        assert!((q - oracle).abs() < 1e-12, "{q} vs {oracle}");
        checked += 1;
    }
}

#[test]
fn nmi_matches_definition() {
    let mut rng = rng_from_seed(12);
    for _ in 0..100 {
        let n = rng.random_range(1..=200);
        let (ka, kb) = (rng.random_range(1..=10), rng.random_range(1..=10));
        let a = common::random_labels(&mut rng, n, ka);
        let b = common::random_labels(&mut rng, n, kb);
        let got = nmi_geometric(
            &Partition::from_labels(a.iter().copied()),
            &Partition::from_labels(b.iter().copied()),
        )
        .unwrap();
        let oracle = common::nmi_direct(&a, &b);
        assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
    }
}

#[test]
fn metrics_ignore_label_names() {
    let mut rng = rng_from_seed(13);
    for _ in 0..50 {
        let n = rng.random_range(3..=40);
        let g = common::random_connected_graph(&mut rng, n, 0.2);
        let labels = common::random_labels(&mut rng, n, 4);
        let truth = common::random_labels(&mut rng, n, 3);
        let renamed: Vec<usize> = labels.iter().map(|&l| 100 - 7 * l).collect();
        let (p, r, t) = (
            Partition::from_labels(labels),
            Partition::from_labels(renamed),
            Partition::from_labels(truth),
        );
        assert!((modularity(&g, &p).unwrap() - modularity(&g, &r).unwrap()).abs() < 1e-12);
        assert!((nmi_geometric(&p, &t).unwrap() - nmi_geometric(&r, &t).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn chi_square_statistic_matches_expected_counts() {
    let mut rng = rng_from_seed(14);
    for _ in 0..200 {
        let mut a = [0usize; 3];
        let mut b = [0usize; 3];
        for j in 0..3 {
            // leave some columns empty in both rows
            if rng.random_bool(0.8) {
                a[j] = rng.random_range(0..60);
                b[j] = rng.random_range(0..60);
            }
        }
        if a.iter().sum::<usize>() == 0 || b.iter().sum::<usize>() == 0 {
            continue;
        }
        let got = chi_square_homogeneity(
            &ThetaSeries::from_counts(a[2], a[1], a[0]),
            &ThetaSeries::from_counts(b[2], b[1], b[0]),
        )
        .unwrap();
        let (stat, df) = common::chi_square_direct(&a, &b);
        assert_eq!(got.df, df);
        assert!(
            (got.statistic - stat).abs() < 1e-10,
            "{} vs {stat}",
            got.statistic
        );
        if df == 0 {
            assert_eq!(got.p_value, 1.0);
        }
    }
}

#[test]
fn survival_function_matches_integration() {
    for df in 1..=4 {
        for x in [0.05, 0.5, 1.0, 2.5, 3.841, 5.991, 8.0, 15.0] {
            let got = chi_square_sf(x, df);
            let oracle = common::chi_square_sf_simpson(x, df);
            assert!(
                (got - oracle).abs() < 1e-7,
                "df {df} x {x}: {got} vs {oracle}"
            );
        }
    }
}

#[test]
fn chi_square_quantiles() {
    assert!((common::chi_square_sf_simpson(3.841, 1) - 0.05).abs() < 1e-3);
    assert!((common::chi_square_sf_simpson(5.991, 2) - 0.05).abs() < 1e-3);
    assert!((chi_square_sf(3.841, 1) - 0.05).abs() < 1e-3);
    assert!((chi_square_sf(5.991, 2) - 0.05).abs() < 1e-3);
}
