use gsig::graph::{knn_graph, laplacian, random_geometric_graph, ring_graph, GradientOperator, Graph, Sigma2};
use gsig::rng::normal_columns;
use gsig::spectral::{eigendecompose, filter_exact_vec, localize, FilterEngine, Kernel};
use gsig::{Graph32, Laplacian32};
use ndarray::{Array1, Array2};
use proptest::prelude::*;

fn rel(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let d = (a - b).iter().map(|v| v * v).sum::<f64>().sqrt();
    d / b.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE)
}

fn graph_strategy() -> impl Strategy<Value = Graph<f64>> {
    (8usize..60, 1usize..8, any::<u64>()).prop_map(|(n, k, seed)| random_geometric_graph(n, k, seed).unwrap())
}

fn kernel_strategy() -> impl Strategy<Value = Kernel<f64>> {
    prop_oneof![
        (0.05f64..2.0).prop_map(Kernel::heat),
        (0.0f64..6.0, 0.1f64..4.0).prop_map(|(mu, s2)| Kernel::gaussian(mu, s2)),
        (0.1f64..3.0).prop_map(|d| Kernel::from_fn(move |l: f64| 1.0 / (1.0 + d * l))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn weights_symmetric_and_laplacian_psd(g in graph_strategy()) {
        let w = g.weight_matrix();
        prop_assert!((&w - &w.t()).iter().all(|v| v.abs() == 0.0));
        let basis = eigendecompose(&laplacian(&g)).unwrap();
        prop_assert!(basis.lambdas()[0] >= -1e-10);
    }

    #[test]
    fn gradient_energy_is_the_quadratic_form(g in graph_strategy(), seed in any::<u64>()) {
        let lap = laplacian(&g);
        let grad = GradientOperator::new(&g);
        let x = normal_columns::<f64>(seed, 2, g.n_vertices(), 1).column(0).to_owned();
        let gx = grad.apply(x.view());
        let q = lap.quadratic_form(x.view());
        prop_assert!((gx.dot(&gx) - q).abs() <= 1e-10 * q.abs().max(1e-300));
    }

    #[test]
    fn lambda_max_bound_is_never_an_underestimate(g in graph_strategy()) {
        let lap = laplacian(&g);
        let exact = eigendecompose(&lap).unwrap().lambda_max();
        prop_assert!(lap.lambda_max() >= exact * (1.0 - 1e-12));
    }

    #[test]
    fn knn_union_is_symmetric_with_min_degree_one(
        pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 4..40),
        k in 1usize..5,
    ) {
        let feats = Array2::from_shape_fn((pts.len(), 2), |(i, j)| if j == 0 { pts[i].0 } else { pts[i].1 });
        // Coincident points give zero distances; the graph must still build.
        if let Ok(g) = knn_graph(feats.view(), k, Sigma2::Auto) {
            let w = g.weight_matrix();
            prop_assert!((&w - &w.t()).iter().all(|v| v.abs() == 0.0));
            prop_assert!(g.degrees().iter().all(|&d| d > 0.0));
            prop_assert!(g.edges().iter().all(|e| e.w > 0.0 && e.w <= 1.0));
        }
    }

    #[test]
    fn filters_commute_and_multiply(g in graph_strategy(), a in kernel_strategy(), b in kernel_strategy(), seed in any::<u64>()) {
        let basis = eigendecompose(&laplacian(&g)).unwrap();
        let x = normal_columns::<f64>(seed, 2, g.n_vertices(), 1).column(0).to_owned();
        let ab = filter_exact_vec(&basis, &a, filter_exact_vec(&basis, &b, x.view()).unwrap().view()).unwrap();
        let ba = filter_exact_vec(&basis, &b, filter_exact_vec(&basis, &a, x.view()).unwrap().view()).unwrap();
        let prod = filter_exact_vec(&basis, &a.product(&b), x.view()).unwrap();
        let scale = prod.dot(&prod).sqrt().max(1.0);
        prop_assert!((&ab - &prod).iter().all(|v| v.abs() <= 1e-10 * scale));
        prop_assert!((&ba - &prod).iter().all(|v| v.abs() <= 1e-10 * scale));
    }

    #[test]
    fn localization_is_symmetric(g in graph_strategy(), k in kernel_strategy()) {
        let engine = FilterEngine::exact(eigendecompose(&laplacian(&g)).unwrap());
        let n = g.n_vertices();
        let cols: Vec<Array1<f64>> = (0..n).map(|i| localize(&engine, &k, i).unwrap()).collect();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((cols[i][j] - cols[j][i]).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn filtering_is_pointwise_in_the_spectrum(g in graph_strategy(), k in kernel_strategy(), seed in any::<u64>()) {
        let basis = eigendecompose(&laplacian(&g)).unwrap();
        let x = normal_columns::<f64>(seed, 2, g.n_vertices(), 1).column(0).to_owned();
        let y = filter_exact_vec(&basis, &k, x.view()).unwrap();
        let expected = basis.gft(x.view()).unwrap() * basis.kernel_values(&k);
        let got = basis.gft(y.view()).unwrap();
        prop_assert!((&got - &expected).iter().all(|v| v.abs() <= 1e-10));
    }
}

#[test]
fn zero_eigenvalue_multiplicity_counts_components() {
    // A triangle, a 4-path and an isolated vertex: three components.
    let edges = [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 0.5), (3, 4, 1.0), (4, 5, 1.0), (5, 6, 3.0)];
    let g = Graph::<f64>::from_edge_list(8, &edges).unwrap();
    assert_eq!(g.connected_components(), 3);
    let basis = eigendecompose(&laplacian(&g)).unwrap();
    let zeros = basis.lambdas().iter().filter(|l: &&f64| l.abs() < 1e-10).count();
    assert_eq!(zeros, 3);
}

#[test]
fn chebyshev_order_30_tracks_smooth_kernels() {
    let g = random_geometric_graph::<f64>(300, 8, 11).unwrap();
    let lap = laplacian(&g);
    let exact = FilterEngine::exact(eigendecompose(&lap).unwrap());
    let cheb = FilterEngine::chebyshev(lap.clone(), 30);
    let lmax = lap.lambda_max();
    let x = normal_columns::<f64>(3, 2, 300, 4);
    for i in 0..20 {
        let t = i as f64 / 19.0;
        let kernel = match i % 3 {
            0 => Kernel::heat((1.0 + 4.0 * t) / lmax),
            1 => Kernel::from_fn(move |l: f64| 1.0 / (1.0 + (0.5 + t) * l / lmax)),
            _ => Kernel::gaussian(t * lmax, (0.4 * lmax).powi(2)),
        };
        let err = rel(&cheb.apply(&kernel, x.view()).unwrap(), &exact.apply(&kernel, x.view()).unwrap());
        assert!(err < 1e-5, "kernel {i}: relative error {err:.2e}");
    }
}

#[test]
fn ring_localization_is_a_translation() {
    let g = ring_graph::<f64>(24).unwrap();
    let engine = FilterEngine::exact(eigendecompose(&laplacian(&g)).unwrap());
    let k = Kernel::heat(0.7);
    let base = localize(&engine, &k, 0).unwrap();
    let shifted = localize(&engine, &k, 5).unwrap();
    for v in 0..24 {
        assert!((shifted[v] - base[(v + 24 - 5) % 24]).abs() < 1e-12);
    }
}

#[test]
fn single_precision_pipeline() {
    let g: Graph32 = random_geometric_graph(60, 6, 4).unwrap();
    let lap: Laplacian32 = laplacian(&g);
    let exact = FilterEngine::exact(eigendecompose(&lap).unwrap());
    let cheb = FilterEngine::chebyshev(lap.clone(), 30);
    let k = Kernel::heat(2.0 / lap.lambda_max());
    let x = normal_columns::<f32>(1, 2, 60, 2);
    let a = exact.apply(&k, x.view()).unwrap();
    let b = cheb.apply(&k, x.view()).unwrap();
    let err = (&a - &b).iter().map(|v| v * v).sum::<f32>().sqrt() / a.iter().map(|v| v * v).sum::<f32>().sqrt();
    assert!(err < 1e-4, "f32 relative error {err}");
}
