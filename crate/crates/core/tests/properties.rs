//! Property tests for the library invariants.

mod common;

use std::collections::BTreeSet;
use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vqr_core::circuits::{
    entanglement_pairs, AnsatzKind, AnsatzSpec, EntanglementStrategy, FeatureMapKind, FeatureMapSpec,
};
use vqr_core::data::{fit_pca, normalize_target, Dataset, FeatureScaler};
use vqr_core::engine::{Metrics, VqrModel};
use vqr_core::optim::{minimize, OptimizerKind, OptimizerSpec};
use vqr_core::sim::{Observable, ParamRole, Statevector};
use vqr_core::sweep::{enumerate_grid, top_k, GridSpec, Metric, ResultRow};

fn strategy() -> impl Strategy<Value = EntanglementStrategy> {
    prop::sample::select(EntanglementStrategy::ALL.to_vec())
}

fn optimizer() -> impl Strategy<Value = OptimizerKind> {
    prop::sample::select(OptimizerKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simulator_matches_oracle(seed in any::<u64>(), n in 1usize..=4, depth in 0usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = common::random_circuit(&mut rng, n, depth);
        let mut state = Statevector::zero(n).unwrap();
        for gate in common::to_gates(&spec) {
            state.apply(&gate).unwrap();
        }
        let expected = common::oracle_state(n, &spec);
        prop_assert!(common::max_abs_diff(state.amplitudes(), &expected) < 1e-9);
        prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
        let parity = state.expectation(&Observable::all_z(n)).unwrap();
        prop_assert!((-1.0..=1.0).contains(&parity));
        prop_assert!((parity - common::oracle_parity(&expected)).abs() < 1e-9);
    }

    #[test]
    fn sampling_totals_shots(seed in any::<u64>(), n in 1usize..=4, shots in 1usize..500) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = common::random_circuit(&mut rng, n, 10);
        let mut state = Statevector::zero(n).unwrap();
        for gate in common::to_gates(&spec) {
            state.apply(&gate).unwrap();
        }
        let counts = state.sample_counts(shots, seed).unwrap();
        prop_assert_eq!(counts.values().sum::<usize>(), shots);
        prop_assert!(counts.keys().all(|k| k.len() == n));
        prop_assert_eq!(&counts, &state.sample_counts(shots, seed).unwrap());
    }

    #[test]
    fn pair_counts_and_overlap(n in 2usize..=8, s in strategy(), rep in 0usize..6) {
        let pairs = entanglement_pairs(n, s, rep).unwrap();
        prop_assert!(pairs.iter().all(|&(a, b)| a < n && b < n && a != b));
        match s {
            EntanglementStrategy::Full => prop_assert_eq!(pairs.len(), n * (n - 1) / 2),
            EntanglementStrategy::Linear => prop_assert_eq!(pairs.len(), n - 1),
            EntanglementStrategy::Circular | EntanglementStrategy::Sca => prop_assert_eq!(pairs.len(), n),
            EntanglementStrategy::Pairwise => {
                let touched: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
                let unique: BTreeSet<usize> = touched.iter().copied().collect();
                prop_assert_eq!(unique.len(), touched.len());
            }
        }
    }

    #[test]
    fn parameter_counts(n in 2usize..=8, reps in 1usize..=4, s in strategy()) {
        for kind in AnsatzKind::ALL {
            let ent = kind.takes_entanglement().then_some(s);
            let spec = AnsatzSpec::new(kind, n, ent).with_reps(reps);
            let circuit = spec.build().unwrap();
            let expected = match kind {
                AnsatzKind::EfficientSU2 => 2 * n * (reps + 1),
                _ => n * (reps + 1),
            };
            prop_assert_eq!(circuit.num_parameters(), expected);
            prop_assert_eq!(circuit.count_role(ParamRole::Encoding), 0);
        }
        for fm in [FeatureMapSpec::z(n).with_reps(reps), FeatureMapSpec::zz(n, s).with_reps(reps)] {
            let circuit = fm.build().unwrap();
            prop_assert_eq!(circuit.count_role(ParamRole::Trainable), 0);
            prop_assert_eq!(circuit.count_role(ParamRole::Encoding), n);
        }
    }

    #[test]
    fn pauli_two_design_is_seed_stable(n in 2usize..=6, reps in 1usize..=3, seed in any::<u64>()) {
        let spec = AnsatzSpec::new(AnsatzKind::PauliTwoDesign, n, None).with_reps(reps).with_seed(seed);
        prop_assert_eq!(spec.build().unwrap(), spec.build().unwrap());
    }

    #[test]
    fn zero_input_z_map_is_hadamard_layers(n in 1usize..=5, reps in 1usize..=3) {
        let state = FeatureMapSpec::z(n).with_reps(reps).build().unwrap().run_values(&vec![0.0; n]).unwrap();
        // H twice is the identity, so odd reps give |+…+⟩ and even reps |0…0⟩
        let dim = 1usize << n;
        for (i, a) in state.amplitudes().iter().enumerate() {
            let expected = if reps % 2 == 1 { 1.0 / (dim as f64).sqrt() } else if i == 0 { 1.0 } else { 0.0 };
            prop_assert!((a.re - expected).abs() < 1e-12 && a.im.abs() < 1e-12);
        }
    }

    #[test]
    fn optimizer_trace_invariants(
        kind in optimizer(),
        seed in any::<u64>(),
        x0 in prop::collection::vec(-2.0f64..2.0, 1..5),
        iters in 0usize..40,
    ) {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * (v - 0.3).powi(2)).sum::<f64>();
        let spec = OptimizerSpec::new(kind).with_max_iterations(iters).with_seed(seed);
        let t = minimize(f, &x0, &spec).unwrap();
        let d = x0.len();
        prop_assert!(t.best_f <= f(&x0));
        prop_assert!((f(&t.best_x) - t.best_f).abs() == 0.0);
        prop_assert!(t.evaluations >= t.iterations);
        prop_assert!(t.iterations <= iters);
        prop_assert!(t.history.windows(2).all(|w| w[1] <= w[0]));
        if let Some(&last) = t.history.last() {
            prop_assert_eq!(last, t.best_f);
        }
        match kind {
            OptimizerKind::Spsa => {
                let calibration = if iters == 0 { 0 } else { 2 * spec.spsa.calibration_pairs };
                let final_eval = usize::from(iters > 0);
                prop_assert!(t.evaluations <= 1 + calibration + 2 * t.iterations + final_eval);
            }
            OptimizerKind::NelderMead => {
                let start = if iters == 0 { 1 } else { d + 1 };
                prop_assert!(t.evaluations <= start + t.iterations * (d + 2));
            }
            OptimizerKind::Cobyla => {}
        }
        prop_assert_eq!(&t, &minimize(f, &x0, &spec).unwrap());
    }

    #[test]
    fn pca_components_orthonormal(seed in any::<u64>(), m in 3usize..40, d in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let matrix: Vec<Vec<f64>> = (0..m).map(|_| (0..d).map(|_| rand::Rng::gen_range(&mut rng, -10.0..10.0)).collect()).collect();
        let k = d;
        let basis = fit_pca(&matrix, k).unwrap();
        for a in 0..k {
            for b in 0..k {
                let dot: f64 = (0..d).map(|i| basis.components[i][a] * basis.components[i][b]).sum();
                let expected = if a == b { 1.0 } else { 0.0 };
                prop_assert!((dot - expected).abs() < 1e-8);
            }
        }
        prop_assert!(basis.explained_variance.windows(2).all(|w| w[0] >= w[1]));
        let back = basis.inverse_transform(&basis.transform(&matrix).unwrap());
        for (r, s) in matrix.iter().zip(&back) {
            for (x, y) in r.iter().zip(s) {
                prop_assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn scaling_ranges(values in prop::collection::vec(-1e3f64..1e3, 2..50)) {
        prop_assume!(values.iter().any(|v| *v != values[0]));
        let (y, _) = normalize_target(&values).unwrap();
        prop_assert!(y.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert_eq!(y.iter().copied().fold(f64::INFINITY, f64::min), 0.0);
        prop_assert_eq!(y.iter().copied().fold(f64::NEG_INFINITY, f64::max), 1.0);
        let rows: Vec<Vec<f64>> = values.iter().map(|v| vec![*v, 2.0 * v]).collect();
        let scaled = FeatureScaler::fit(&rows).unwrap().apply(&rows).unwrap();
        prop_assert!(scaled.iter().flatten().all(|v| (0.0..=PI).contains(v)));
    }

    #[test]
    fn split_partitions(m in 2usize..80, seed in any::<u64>(), frac in 0.0f64..1.0) {
        let d = Dataset::new((0..m).map(|i| vec![i as f64]).collect(), vec![0.0; m]).unwrap();
        let n_train = ((m as f64) * frac) as usize;
        let (a, b) = d.split(n_train, m - n_train, seed).unwrap();
        let mut all: Vec<usize> = a.features.iter().chain(&b.features).map(|r| r[0] as usize).collect();
        all.sort();
        prop_assert_eq!(all, (0..m).collect::<Vec<_>>());
    }

    #[test]
    fn model_prediction_and_cost(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut uniform = |lo: f64, hi: f64| rand::Rng::gen_range(&mut rng, lo..hi);
        let fm = if n >= 2 { FeatureMapSpec::zz(n, EntanglementStrategy::Linear) } else { FeatureMapSpec::z(n) };
        let ansatz = AnsatzSpec::new(AnsatzKind::EfficientSU2, n, Some(EntanglementStrategy::Full)).with_reps(1);
        let theta: Vec<f64> = (0..ansatz.num_parameters()).map(|_| uniform(-10.0, 10.0)).collect();
        let model = VqrModel::new(fm, ansatz, theta.clone(), 0).unwrap();
        let xs: Vec<Vec<f64>> = (0..8).map(|_| (0..n).map(|_| uniform(-5.0, 5.0)).collect()).collect();
        let ys: Vec<f64> = (0..8).map(|_| uniform(0.0, 1.0)).collect();
        let preds = model.predict_batch(&xs).unwrap();
        prop_assert!(preds.iter().all(|p| (0.0..=1.0).contains(p)));

        let data = Dataset::new(xs.clone(), ys.clone()).unwrap();
        let mut order: Vec<usize> = (0..8).collect();
        order.reverse();
        order.swap(1, 5);
        let cost = model.cost(&theta, &data).unwrap();
        let permuted = model.cost(&theta, &data.subset(&order)).unwrap();
        prop_assert!((cost - permuted).abs() < 1e-14);

        let m = Metrics::from_predictions(&preds, &ys).unwrap();
        let max_err = preds.iter().zip(&ys).map(|(p, y)| (p - y).abs()).fold(0.0, f64::max);
        prop_assert!(m.mae * m.mae <= m.mse + 1e-15);
        prop_assert!(m.mse <= max_err * m.mae + 1e-15);
        prop_assert!((m.mse - cost).abs() < 1e-14);
    }

    #[test]
    fn grid_count_matches_nested_loops(
        fms in prop::sample::subsequence(vec![FeatureMapKind::ZFeatureMap, FeatureMapKind::ZZFeatureMap], 1..=2),
        fm_ents in prop::sample::subsequence(EntanglementStrategy::ALL.to_vec(), 1..=5),
        fm_reps in prop::collection::btree_set(1usize..4, 1..3),
        ansatzes in prop::sample::subsequence(AnsatzKind::ALL.to_vec(), 1..=4),
        a_ents in prop::sample::subsequence(EntanglementStrategy::ALL.to_vec(), 1..=5),
        a_reps in prop::collection::btree_set(1usize..4, 1..3),
        opts in prop::sample::subsequence(OptimizerKind::ALL.to_vec(), 1..=3),
        repeats in 1usize..3,
        base_seed in 0u64..1000,
    ) {
        let grid = GridSpec {
            feature_maps: fms.clone(),
            feature_map_entanglements: fm_ents.clone(),
            feature_map_reps: fm_reps.iter().copied().collect(),
            ansatzes: ansatzes.clone(),
            ansatz_entanglements: a_ents.clone(),
            ansatz_reps: a_reps.iter().copied().collect(),
            optimizers: opts.clone(),
            repeats,
            qubits: 3,
            max_iterations: 5,
            n_train: 4,
            n_test: 2,
            split_seed: 0,
            base_seed,
        };
        let mut brute = 0;
        for fm in &fms {
            let e1 = if *fm == FeatureMapKind::ZZFeatureMap { fm_ents.len() } else { 1 };
            for _ in 0..e1 {
                for _ in &fm_reps {
                    for a in &ansatzes {
                        let e2 = if *a == AnsatzKind::PauliTwoDesign { 1 } else { a_ents.len() };
                        for _ in 0..e2 {
                            for _ in &a_reps {
                                for _ in &opts {
                                    for _ in 0..repeats {
                                        brute += 1;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        let trials = enumerate_grid(&grid).unwrap();
        prop_assert_eq!(trials.len(), brute);
        prop_assert!(trials.iter().enumerate().all(|(i, t)| t.config.seed == base_seed + i as u64));
        prop_assert_eq!(trials, enumerate_grid(&grid).unwrap());
    }

    #[test]
    fn top_k_is_sorted_prefix(
        rows in prop::collection::vec((0u8..5, 0u8..5, 0u8..5), 1..30),
        k in 0usize..40,
    ) {
        let rows: Vec<ResultRow> = rows
            .iter()
            .enumerate()
            .map(|(i, &(mse, mae, t))| ResultRow {
                trial_id: i.to_string(),
                ansatz: "RealAmplitudes".into(),
                ansatz_entanglement: None,
                feature_map: "ZFeatureMap".into(),
                fm_entanglement: None,
                optimizer: "SPSA".into(),
                qubits: 2,
                fm_reps: 1,
                ansatz_reps: 1,
                seed: i as u64,
                mse: Some(mse as f64 / 10.0),
                mae: Some(mae as f64 / 10.0),
                time_s: t as f64,
                status: "ok".into(),
            })
            .collect();
        let top = top_k(&rows, Metric::Mse, k).unwrap();
        prop_assert_eq!(top.len(), k.min(rows.len()));
        let ids: BTreeSet<&str> = top.iter().map(|r| r.trial_id.as_str()).collect();
        prop_assert_eq!(ids.len(), top.len());
        let key = |r: &ResultRow| (r.mse.unwrap(), r.mae.unwrap(), r.time_s, r.trial_id.parse::<usize>().unwrap());
        prop_assert!(top.windows(2).all(|w| key(&w[0]) <= key(&w[1])));
        if let Some(last) = top.last() {
            let cut = key(last);
            let excluded = rows.iter().filter(|r| !ids.contains(r.trial_id.as_str()));
            for r in excluded {
                prop_assert!(key(r) >= cut);
            }
        }
    }
}
