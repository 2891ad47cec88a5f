use nalgebra::DMatrix;
use proptest::prelude::*;

use swarm_ident::harness::{emit_table, parse_table_csv, EstimateRecord, TableFormat};
use swarm_ident::numerics::{
    frobenius_norm, induced_inf_norm, induced_one_norm, max_abs_entry, max_row_sumsq, spectral_norm, DenseMatrix,
};
use swarm_ident::robot::{
    alpha_from_params, inverse_dynamics, params_from_alpha, regressor, GravityConstant, JointState, RobotParams,
    TrajectoryBounds,
};
use swarm_ident::sampling::{collect_samples, corrupt, NoiseScenario, SampleSet};
use swarm_ident::swarm::{run_swarm, Bounds, PsoConfig};

fn matrix() -> impl Strategy<Value = DenseMatrix> {
    (1usize..=60, 1usize..=5).prop_flat_map(|(r, c)| {
        prop::collection::vec(-100.0f64..100.0, r * c).prop_map(move |v| DenseMatrix::new(r, c, v).unwrap())
    })
}

fn params() -> impl Strategy<Value = RobotParams> {
    (0.1f64..20.0, 0.1f64..20.0, -1.0f64..1.0, 0.1f64..20.0)
        .prop_map(|(a, b, c, d)| RobotParams::from_array([a, b, c, d]))
}

fn state() -> impl Strategy<Value = JointState> {
    let b = TrajectoryBounds::default();
    let ranges: Vec<_> = b.limits.iter().map(|iv| iv.min..=iv.max).collect();
    ranges.prop_map(|v| JointState::from_array(v.try_into().unwrap()))
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn norms_match_definitions(m in matrix()) {
        let na = DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)]);
        let sv = na.clone().svd(false, false).singular_values;
        prop_assert!(rel(spectral_norm(&m), sv.max()) < 1e-10);
        prop_assert!(rel(frobenius_norm(&m), na.norm()) < 1e-12);
        let cols = (0..m.cols()).map(|j| na.column(j).lp_norm(1)).fold(0.0, f64::max);
        let rows = (0..m.rows()).map(|i| na.row(i).lp_norm(1)).fold(0.0, f64::max);
        prop_assert!(rel(induced_one_norm(&m), cols) < 1e-12);
        prop_assert!(rel(induced_inf_norm(&m), rows) < 1e-12);
        let sumsq = (0..m.rows()).map(|i| na.row(i).norm_squared()).fold(0.0, f64::max);
        prop_assert!(rel(max_row_sumsq(&m), sumsq) < 1e-12);
        prop_assert_eq!(max_abs_entry(&m), na.amax());
        // Norm relations that hold for every matrix.
        let s = spectral_norm(&m);
        prop_assert!(s <= frobenius_norm(&m) * (1.0 + 1e-12));
        prop_assert!(s * s <= induced_one_norm(&m) * induced_inf_norm(&m) * (1.0 + 1e-12));
    }

    #[test]
    fn dynamics_factor_through_the_regressor(p in params(), s in state(), g in 1.0f64..20.0) {
        let g = GravityConstant::new(g).unwrap();
        let tau = inverse_dynamics(&p, &s, g);
        let y = regressor(&s, g).mul_vec(&alpha_from_params(&p).0).unwrap();
        for (a, b) in tau.iter().zip(y.iter()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn base_parameters_round_trip(p in params()) {
        prop_assume!(p.m3 * p.s3z.abs() > 1e-3);
        let back = params_from_alpha(&alpha_from_params(&p)).unwrap();
        for (a, b) in back.to_array().iter().zip(p.to_array()) {
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn sample_sets_round_trip(n in 2usize..30, seed in any::<u64>(), k in 0usize..4) {
        let scenario = [NoiseScenario::s1(), NoiseScenario::s2(), NoiseScenario::s3(), NoiseScenario::s4()][k].clone();
        let clean = collect_samples(&RobotParams::REFERENCE, GravityConstant::STANDARD, n).unwrap();
        let noisy = corrupt(&clean, &scenario, seed).unwrap();
        let mut buf = Vec::new();
        noisy.write_csv(&mut buf).unwrap();
        let back = SampleSet::parse(&buf[..], &noisy.sidecar()).unwrap();
        prop_assert_eq!(back, noisy);
    }

    #[test]
    fn noise_stays_inside_its_bounds(seed in any::<u64>(), bound in 0.0f64..0.9) {
        let clean = collect_samples(&RobotParams::REFERENCE, GravityConstant::STANDARD, 10).unwrap();
        let noisy = corrupt(&clean, &NoiseScenario::AllNoise { bound }, seed).unwrap();
        for (a, b) in clean.samples().iter().zip(noisy.samples()) {
            prop_assert_eq!(a.time, b.time);
            for (x, y) in a.components().iter().zip(b.components()) {
                prop_assert!((y - x).abs() <= bound * x.abs() * (1.0 + 1e-15));
            }
        }
    }

    #[test]
    fn scenario_names_round_trip(b in 0.0f64..0.99, c in 0usize..40, o in 0.5f64..0.99, base in 0.0f64..0.5) {
        for s in [
            NoiseScenario::StateNoise { bound: b },
            NoiseScenario::TorqueNoise { bound: b },
            NoiseScenario::AllNoise { bound: b },
            NoiseScenario::Outliers { count: c, outlier_bound: o, base_bound: base },
        ] {
            prop_assert_eq!(s.to_string().parse::<NoiseScenario>().unwrap(), s);
        }
    }

    #[test]
    fn table_csv_round_trips(
        rows in prop::collection::vec((params(), prop::option::of(0.0f64..100.0), any::<bool>()), 1..25)
    ) {
        let recs: Vec<EstimateRecord> = rows
            .iter()
            .enumerate()
            .map(|(i, (p, t, flagged))| {
                let mut r = EstimateRecord::from_params(format!("m{i}"), p, *t);
                if *flagged {
                    r.flags = vec!["ill-conditioned".into(), "discarded-seeds:1,2".into()];
                }
                r
            })
            .collect();
        prop_assert_eq!(parse_table_csv(&emit_table(&recs, TableFormat::Csv)).unwrap(), recs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn swarm_stays_in_box_and_never_regresses(seed in any::<u64>(), per_dim in any::<bool>()) {
        let bounds = Bounds::new(vec![-2.0, 0.0, 5.0], vec![1.0, 4.0, 9.0]).unwrap();
        let cfg = PsoConfig { iterations: 120, per_dimension_random: per_dim, ..Default::default() };
        let mut outside = 0usize;
        let mut f = |x: &[f64]| {
            if !bounds.contains(x) {
                outside += 1;
            }
            (x[0] - 0.3).powi(2) + (x[1] - 10.0).powi(2) + (x[2] * x[0]).abs()
        };
        let (swarm, trace) = run_swarm(&cfg, &bounds, &mut f, seed);
        prop_assert_eq!(outside, 0);
        prop_assert!(trace.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(*trace.last().unwrap(), swarm.best_cost);
        prop_assert!(swarm.particles.iter().all(|p| bounds.contains(&p.position)));
    }
}
