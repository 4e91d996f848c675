use detpp::density::{l_ensemble_oracle, mixture_weight, ProjectionDensity};
use detpp::estimator::test_statistic;
use detpp::hellinger::{bernoulli_weight_hellinger, hellinger};
use detpp::sampling::sample_dpp;
use detpp::{
    normalization_check, ActiveSet, Config, Density, DensityTable, DppDensity, Field,
    OrthonormalFamily, SeededRng, Spectrum,
};
use proptest::prelude::*;

fn field(complex: bool) -> Field {
    if complex {
        Field::Complex
    } else {
        Field::Real
    }
}

fn instance(seed: u64, p: usize, r: usize, complex: bool, lambda: &[f64]) -> DppDensity {
    let mut rng = SeededRng::new(seed);
    let phi = OrthonormalFamily::haar(p, r, field(complex), &mut rng).unwrap();
    DppDensity::new(phi, Spectrum::new(lambda[..r].to_vec()).unwrap()).unwrap()
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=7).prop_flat_map(|p| (Just(p), 1..=p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dpp_tables_are_normalized(seed: u64, (p, r) in dims(), complex: bool, lambda in prop::collection::vec(0.0f64..=1.0, 7)) {
        let table = instance(seed, p, r, complex, &lambda).table().unwrap();
        prop_assert!((normalization_check(&table) - 1.0).abs() < 1e-10);
        prop_assert!(table.probs().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn dpp_is_mixture_of_projections(seed: u64, (p, r) in dims(), lambda in prop::collection::vec(0.0f64..=1.0, 7)) {
        let density = instance(seed, p, r, true, &lambda);
        let mut weights = Vec::new();
        let mut tables = Vec::new();
        for active in ActiveSet::all_subsets(r) {
            weights.push(mixture_weight(density.spectrum(), active).unwrap());
            tables.push(ProjectionDensity::new(density.family().clone(), active).unwrap().table().unwrap());
        }
        let mixed = DensityTable::mixture(&weights, &tables).unwrap();
        let direct = density.table().unwrap();
        for (a, b) in mixed.probs().iter().zip(direct.probs()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn relabeling_leaves_the_law_unchanged(seed: u64, (p, r) in dims(), lambda in prop::collection::vec(0.0f64..=1.0, 7), shift in 0usize..7) {
        let density = instance(seed, p, r, true, &lambda);
        let order: Vec<usize> = (0..r).map(|j| (j + shift) % r).rev().collect();
        let a = density.table().unwrap();
        let b = density.relabel(&order).unwrap().table().unwrap();
        prop_assert!(hellinger(&a, &b).unwrap().h2 < 1e-12);
    }

    #[test]
    fn l_ensemble_agrees_below_one(seed: u64, (p, r) in dims(), complex: bool, lambda in prop::collection::vec(0.0f64..0.95, 7)) {
        let density = instance(seed, p, r, complex, &lambda);
        for alpha in density.ground().configs() {
            prop_assert!((density.eval(alpha) - l_ensemble_oracle(&density, alpha).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn test_statistic_is_antisymmetric(seed: u64, (p, r) in dims(), lambda in prop::collection::vec(0.0f64..=1.0, 7), n in 1usize..200) {
        let u = instance(seed, p, r, true, &lambda);
        let v = instance(seed ^ 0x5555, p, r, false, &lambda);
        let samples = sample_dpp(&u, n, &mut SeededRng::new(seed)).unwrap();
        let (tu, tv) = (u.table().unwrap(), v.table().unwrap());
        let forward = test_statistic(&tu, &tv, &samples).unwrap();
        let backward = test_statistic(&tv, &tu, &samples).unwrap();
        prop_assert_eq!(forward, -backward);
        prop_assert_eq!(test_statistic(&tu, &tu, &samples).unwrap(), 0.0);
    }

    #[test]
    fn hellinger_is_a_bounded_symmetric_divergence(seed: u64, (p, r) in dims(), lambda in prop::collection::vec(0.0f64..=1.0, 7)) {
        let a = instance(seed, p, r, true, &lambda).table().unwrap();
        let b = instance(seed.wrapping_add(1), p, r, true, &lambda).table().unwrap();
        let ab = hellinger(&a, &b).unwrap();
        let ba = hellinger(&b, &a).unwrap();
        prop_assert!((ab.h2 - ba.h2).abs() < 1e-15);
        prop_assert!((-1e-15..=1.0 + 1e-15).contains(&ab.h2));
        prop_assert!((ab.h2 + ab.affinity - 1.0).abs() < 1e-12);
        prop_assert_eq!(hellinger(&a, &a).unwrap().h2.abs() < 1e-15, true);
    }

    #[test]
    fn samples_stay_in_the_support(seed: u64, (p, r) in dims(), lambda in prop::collection::vec(0.0f64..=1.0, 7)) {
        let density = instance(seed, p, r, true, &lambda);
        let table = density.table().unwrap();
        let samples = sample_dpp(&density, 50, &mut SeededRng::new(seed)).unwrap();
        for (alpha, _) in samples.counts() {
            prop_assert!(table.get(alpha) > 0.0, "drew {:?} of density {}", alpha, table.get(alpha));
        }
    }
}

#[test]
fn canonical_family_gives_independent_points() {
    let lambda = [0.9, 0.5, 0.2, 0.7];
    let density = DppDensity::new(
        OrthonormalFamily::canonical(4, 4).unwrap(),
        Spectrum::new(lambda.to_vec()).unwrap(),
    )
    .unwrap();
    for alpha in density.ground().configs() {
        let expected: f64 = (0..4)
            .map(|i| {
                let q = lambda[i] * lambda[i];
                if alpha.contains(i) {
                    q
                } else {
                    1.0 - q
                }
            })
            .product();
        assert!((density.eval(alpha) - expected).abs() < 1e-15);
    }
}

#[test]
fn disjoint_projections_are_orthogonal() {
    let phi = OrthonormalFamily::canonical(3, 2).unwrap();
    let a = ProjectionDensity::new(phi.clone(), ActiveSet::from_indices([0]))
        .unwrap()
        .table()
        .unwrap();
    let b = ProjectionDensity::new(phi, ActiveSet::from_indices([1]))
        .unwrap()
        .table()
        .unwrap();
    assert_eq!(a.get(Config::from_indices([0])), 1.0);
    assert_eq!(hellinger(&a, &b).unwrap().h2, 1.0);
}

#[test]
fn bernoulli_weights_match_enumeration() {
    let lambda = Spectrum::new(vec![0.3, 0.8, 1.0]).unwrap();
    let gamma = Spectrum::new(vec![0.6, 0.8, 0.4]).unwrap();
    let direct: f64 = ActiveSet::all_subsets(3)
        .map(|j| (mixture_weight(&lambda, j).unwrap() * mixture_weight(&gamma, j).unwrap()).sqrt())
        .sum();
    assert!((bernoulli_weight_hellinger(&lambda, &gamma) - (1.0 - direct)).abs() < 1e-14);
}
