use kpzlab::geometry::green;
use kpzlab::gff::{sample_spectral_gff, LatticeSampler};
use kpzlab::kpz::{beta_of_x, count_quadrangulations, kpz_formula, kpz_inverse, quantum_ball};
use kpzlab::liouville::{weak_star_distance, GridMeasure, TestFunction};
use kpzlab::{DomainSpec, Point, StreamSeed};
use num_bigint::BigUint;
use proptest::prelude::*;

fn interior() -> impl Strategy<Value = Point> {
    (0.01f64..0.99, 0.01f64..0.99).prop_map(|(x, y)| Point::new(x, y))
}

/// A rough gamma = 1 measure on a 32 x 32 grid.
fn rough_measure(seed: u64) -> GridMeasure {
    let s = LatticeSampler::cell_centres(64, 32, &[1.0 / 32.0]).unwrap();
    let h = s.grid(&s.sample(StreamSeed::new(seed, 0)), 0, 32).unwrap();
    GridMeasure::from_circle_averages(&h, 1.0, 1.0 / 32.0).unwrap()
}

fn open_ball_mass(m: &GridMeasure, z: Point, r: f64) -> f64 {
    m.masses
        .indexed_iter()
        .filter(|((i, l), _)| m.cell_centre(*i, *l).dist(z) < r)
        .map(|(_, v)| v)
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kpz_round_trip(gamma in 0.0f64..1.999, x in 0.0f64..3.0) {
        let d = kpz_inverse(gamma, x).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!((kpz_formula(gamma, d).unwrap() - x).abs() <= 1e-12 * (1.0 + x));
        if gamma > 1e-3 {
            prop_assert!((beta_of_x(gamma, x).unwrap() / gamma - d).abs() <= 1e-12 * (1.0 + d));
        }
    }

    #[test]
    fn kpz_fixed_points_and_monotone(gamma in 0.0f64..1.999, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        prop_assert_eq!(kpz_formula(gamma, 0.0).unwrap(), 0.0);
        prop_assert_eq!(kpz_formula(gamma, 1.0).unwrap(), 1.0);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(kpz_formula(gamma, lo).unwrap() <= kpz_formula(gamma, hi).unwrap());
    }

    #[test]
    fn small_gamma_is_identity(d in 0.0f64..1.0) {
        prop_assert!((kpz_formula(1e-6, d).unwrap() - d).abs() < 1e-6);
    }

    #[test]
    fn green_is_symmetric_and_positive(x in interior(), y in interior()) {
        prop_assume!(x.dist(y) > 1e-6);
        let sq = DomainSpec::unit_square();
        let (a, b) = (green(&sq, x, y).unwrap(), green(&sq, y, x).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        prop_assert!(a > 0.0);
    }

    #[test]
    fn quantum_ball_brackets_delta(seed in 0u64..4, z in (0.05f64..0.95, 0.05f64..0.95), ld in -8.0f64..-1.0) {
        let m = rough_measure(seed);
        let z = Point::new(z.0, z.1);
        let delta = m.total * ld.exp2();
        let b = quantum_ball(&m, z, delta).unwrap();
        let diag = std::f64::consts::SQRT_2 / m.resolution as f64;
        prop_assert!(open_ball_mass(&m, z, b.radius) <= delta);
        prop_assert!((open_ball_mass(&m, z, b.radius) - b.mass_inside).abs() <= 1e-12 * m.total);
        prop_assert!(open_ball_mass(&m, z, b.radius + diag) > delta);
        let bigger = quantum_ball(&m, z, delta * 1.5).unwrap();
        prop_assert!(bigger.radius >= b.radius);
    }

    #[test]
    fn weak_star_is_a_metric(s1 in 0u64..50, s2 in 0u64..50, s3 in 0u64..50) {
        let (a, b, c) = (rough_measure(s1), rough_measure(s2), rough_measure(s3));
        let d = |p: &GridMeasure, q: &GridMeasure| weak_star_distance(p, q, 10).unwrap().distance;
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-15);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-15);
        if s1 != s2 {
            prop_assert!(d(&a, &b) > 0.0);
        }
    }

    #[test]
    fn same_seed_same_field(seed in any::<u64>(), stream in any::<u64>()) {
        let a = sample_spectral_gff(8, StreamSeed::new(seed, stream)).unwrap();
        let b = sample_spectral_gff(8, StreamSeed::new(seed, stream)).unwrap();
        prop_assert_eq!(a.coefficients(), b.coefficients());
        let c = sample_spectral_gff(8, StreamSeed::new(seed, stream.wrapping_add(1))).unwrap();
        prop_assert_ne!(a.coefficients(), c.coefficients());
    }

    #[test]
    fn cell_averages_integrate_exactly(k in 1u32..7, lo in 0.0f64..0.4, w in 0.1f64..0.6) {
        let n = 1usize << k;
        let phi = TestFunction::Bump { lo, hi: lo + w };
        let sum: f64 = phi.cell_averages(n).sum() / (n * n) as f64;
        prop_assert!((sum - phi.integral()).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn quadrangulation_recurrence(n in 1u32..150) {
        // (n + 3) q(n + 1) = 6 (2n + 1) q(n)
        let a = count_quadrangulations(n).unwrap();
        let b = count_quadrangulations(n + 1).unwrap();
        prop_assert_eq!(b * BigUint::from(n + 3), a * BigUint::from(6 * (2 * n + 1)));
    }
}
