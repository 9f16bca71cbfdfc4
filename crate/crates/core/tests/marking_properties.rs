use goafem::estimators::EstimatorField;
use goafem::harness::{fit_points, ncum_at_tolerance};
use goafem::marking::{
    combined_indicators, doerfler_min_set, select_a, select_b, select_c, AdaptiveHistory, Chosen, LevelRecord,
    MarkingConfig, Strategy as Marking, GUARD,
};
use proptest::prelude::*;

fn indicators(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0, (0u8..4).prop_map(f64::from)], 1..max)
}

fn brute_min(ind: &[f64], theta: f64) -> usize {
    let total: f64 = ind.iter().sum();
    (0u32..1 << ind.len())
        .filter(|mask| {
            let s: f64 = (0..ind.len()).filter(|i| mask >> i & 1 == 1).map(|i| ind[i]).sum();
            s * (1.0 + GUARD) >= theta * total
        })
        .map(|m| m.count_ones() as usize)
        .min()
        .unwrap()
}

proptest! {
    #[test]
    fn doerfler_sets_are_valid_and_minimal(ind in indicators(11), theta in 0.05f64..1.0) {
        let set = doerfler_min_set(&ind, theta).unwrap();
        let total: f64 = ind.iter().sum();
        let marked: f64 = set.iter().map(|i| ind[i]).sum();
        prop_assert!(theta * total <= marked * (1.0 + GUARD));
        if total > 0.0 {
            prop_assert_eq!(set.len(), brute_min(&ind, theta));
        } else {
            prop_assert!(set.is_empty());
        }
    }

    #[test]
    fn strategies_respect_their_sets(u in indicators(40), z_seed in indicators(40), theta in 0.1f64..0.95) {
        let n = u.len().min(z_seed.len());
        let (u, z) = (&u[..n], &z_seed[..n]);
        prop_assume!(u.iter().sum::<f64>() > 0.0 && z.iter().sum::<f64>() > 0.0);
        let (eu, ez) = (EstimatorField::new(u.to_vec()).unwrap(), EstimatorField::new(z.to_vec()).unwrap());
        let mu = doerfler_min_set(u, theta).unwrap();
        let mz = doerfler_min_set(z, theta).unwrap();
        let (a, chosen) = select_a(&mu, &mz);
        prop_assert_eq!(a.len(), mu.len().min(mz.len()));
        prop_assert!(matches!(chosen, Chosen::Primal | Chosen::Dual));
        let b = select_b(&mu, &mz, u, z);
        let small = mu.len().min(mz.len());
        prop_assert!(b.len() >= small && b.len() <= 2 * small);
        prop_assert!(b.iter().all(|i| mu.contains(i) || mz.contains(i)));
        let rho = combined_indicators(&eu, &ez).unwrap();
        let sum: f64 = rho.iter().sum();
        let expect = 2.0 * eu.total() * ez.total();
        prop_assert!((sum - expect).abs() <= 1e-12 * expect);
        let c = select_c(&eu, &ez, theta).unwrap();
        let captured: f64 = c.iter().map(|i| rho[i]).sum();
        prop_assert!(theta * sum <= captured * (1.0 + GUARD));
        for s in Marking::ALL {
            let (m, _) = MarkingConfig::new(s, theta).unwrap().mark(&eu, &ez).unwrap();
            prop_assert!(m.iter().all(|i| i < n));
        }
    }

    #[test]
    fn power_law_slopes_are_recovered(rate in -4.0f64..1.0, c in 0.01f64..100.0, growth in 1.1f64..2.5) {
        let pts: Vec<(usize, f64)> = (0..30)
            .map(|k| (8.0 * growth.powi(k)).round() as usize)
            .map(|n| (n, c * (n as f64).powf(rate)))
            .collect();
        let fit = fit_points("q", &pts, 10.0).unwrap();
        // rounding N to integers perturbs the points slightly
        prop_assert!((fit.slope - rate).abs() < 1e-3, "{} vs {}", fit.slope, rate);
        prop_assert!(fit.points >= 4);
    }

    #[test]
    fn ncum_is_a_monotone_prefix_sum(steps in prop::collection::vec((1usize..500, 0.3f64..0.99), 1..30)) {
        let mut h = AdaptiveHistory::default();
        let (mut n, mut ncum, mut product) = (4usize, 0usize, 1.0);
        for (ell, (grow, factor)) in steps.into_iter().enumerate() {
            n += grow;
            ncum += n;
            product *= factor;
            h.records.push(LevelRecord {
                ell, n, eta_u: product.sqrt(), eta_z: product.sqrt(), product,
                goal: None, goal_err: None, marked: 0, chosen: Chosen::None, ncum, closure_ratio: None,
            });
        }
        prop_assert!(h.check().is_ok());
        let mut prev = 0;
        for k in 0..h.records.len() {
            let tol = h.records[k].product;
            let c = ncum_at_tolerance(&h, tol).unwrap();
            prop_assert_eq!(c, h.records[..=k].iter().map(|r| r.n).sum::<usize>());
            prop_assert!(c >= prev);
            prev = c;
        }
    }
}
