mod common;

use common::{beta_ratio_slack, feasible_tuple, omega1_monte_carlo};
use dirichlet_core::accounting::first_term_candidates;
use dirichlet_core::empirical::random_adjacent_pair;
use dirichlet_core::simplex::with_remainder;
use dirichlet_core::{
    calibrate_gamma, delta_identity, epsilon_identity, epsilon_identity_approx, omega1_probability, privacy_loss,
    AdjacencyParams, DomainSpec, MechanismConfig, PartitionParam, SimplexVector,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use statrs::distribution::{Beta, ContinuousCDF};

fn cfg(k: f64) -> MechanismConfig {
    MechanismConfig::new(k).unwrap()
}

/// Feasible domain with `n = |W| + 1` whose shift constraint holds for `b`.
fn domain_strategy(max_w: usize) -> impl Strategy<Value = (DomainSpec, f64)> {
    (1..=max_w, 0.02..0.2f64, 0.02..0.3f64, 0.01..0.2f64).prop_filter_map("infeasible", |(w, eta, eta_bar, b)| {
        if w as f64 * eta > 1.0 - eta_bar - 0.05 || 2.0 * eta + eta_bar + b / 2.0 > 0.98 {
            return None;
        }
        DomainSpec::new(w + 1, (0..w).collect(), eta, eta_bar).ok().map(|d| (d, b))
    })
}

/// A point with every W coordinate at least `gamma`, mixing interior points
/// with points pushed to the edges of `Ω₁`.
fn omega1_point<R: Rng>(rng: &mut R, d: &DomainSpec, gamma: f64) -> SimplexVector {
    let n = d.n();
    let mut u: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    if rng.random_bool(0.3) {
        let hot = rng.random_range(0..n);
        for (i, v) in u.iter_mut().enumerate() {
            if i != hot {
                *v *= 1e-6;
            }
        }
    }
    let total: f64 = u.iter().sum();
    let free = 1.0 - d.w_size() as f64 * gamma;
    let mut x: Vec<f64> = u.iter().map(|v| free * v / total).collect();
    for &i in d.w() {
        x[i] += gamma;
    }
    let s: f64 = x.iter().sum();
    SimplexVector::new(x.iter().map(|v| v / s).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn delta_nondecreasing_epsilon_decreasing_in_gamma(
        (d, b) in domain_strategy(3),
        k in 2.0..30.0f64,
        f1 in 0.01..0.99f64,
        f2 in 0.01..0.99f64,
    ) {
        prop_assume!((f1 - f2).abs() > 1e-3);
        let cap = 1.0 / d.w_size() as f64;
        let (lo, hi) = (f1.min(f2) * cap, f1.max(f2) * cap);
        let c = cfg(k);
        let a = AdjacencyParams::new(b).unwrap();
        let g_lo = PartitionParam::new(lo, d.w_size()).unwrap();
        let g_hi = PartitionParam::new(hi, d.w_size()).unwrap();
        let d_lo = delta_identity(&c, &d, g_lo).unwrap().delta;
        let d_hi = delta_identity(&c, &d, g_hi).unwrap().delta;
        prop_assert!(d_lo <= d_hi + 1e-9, "delta {d_lo} at {lo} > {d_hi} at {hi}");
        let e_lo = epsilon_identity(&c, &d, &a, g_lo).unwrap();
        let e_hi = epsilon_identity(&c, &d, &a, g_hi).unwrap();
        prop_assert!(e_lo > e_hi);
    }

    #[test]
    fn omega1_strictly_decreasing_in_gamma(
        w in 1usize..=3,
        raw in proptest::collection::vec(0.05..1.0f64, 4),
        k in 2.0..30.0f64,
        f in 0.05..0.9f64,
    ) {
        let total: f64 = raw[..=w].iter().sum();
        let p: Vec<f64> = raw[..=w].iter().map(|v| v / total).collect();
        let g = f / w as f64;
        let c = cfg(k);
        let a = omega1_probability(&c, &p, 0.5 * g).unwrap().probability;
        let b = omega1_probability(&c, &p, g).unwrap().probability;
        prop_assert!(a > b || (a < 1e-12 && b < 1e-12), "P({}) = {a}, P({g}) = {b}", 0.5 * g);
    }

    #[test]
    fn approx_bounds_exact_from_above(
        (d, b) in domain_strategy(3),
        k in 6.0..60.0f64,
        f in 0.001..0.99f64,
    ) {
        let c = cfg(k);
        let a = AdjacencyParams::new(b).unwrap();
        let g = PartitionParam::new(f / d.w_size() as f64, d.w_size()).unwrap();
        if let Ok(approx) = epsilon_identity_approx(&c, &d, &a, g) {
            let exact = epsilon_identity(&c, &d, &a, g).unwrap();
            prop_assert!(approx >= exact - 1e-12, "approx {approx} < exact {exact}");
        }
    }

    #[test]
    fn logconcave_along_segments(
        (d, _b) in domain_strategy(3),
        k in 2.0..30.0f64,
        f in 0.01..0.5f64,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gamma = f * d.eta();
        let c = cfg(k);
        let prob = |y: &[f64]| omega1_probability(&c, &with_remainder(y), gamma).unwrap().probability;
        let u = d.sample_projected(&mut rng);
        let v = d.sample_projected(&mut rng);
        let (pu, pv) = (prob(&u), prob(&v));
        for theta in [0.25, 0.5, 0.75] {
            let mid: Vec<f64> = u.iter().zip(&v).map(|(a, b)| theta * a + (1.0 - theta) * b).collect();
            let bound = pu.powf(theta) * pv.powf(1.0 - theta);
            prop_assert!(prob(&mid) >= bound - 1e-7);
        }
    }

    #[test]
    fn beta_ratio_bound_when_first_entry_shrinks(
        k in 0.5..60.0f64,
        eta in 0.01..0.2f64,
        eta_bar in 0.01..0.3f64,
        b in 0.01..1.0f64,
        seed in any::<u64>(),
    ) {
        prop_assume!(2.0 * eta + eta_bar < 0.95);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (pi, pj, qi, qj) = feasible_tuple(&mut rng, eta, eta_bar, b, true);
        let slack = beta_ratio_slack(k, eta_bar, pi, pj, qi, qj);
        prop_assert!(slack >= -1e-9, "slack {slack} at {:?}", (pi, pj, qi, qj));
    }
}

#[test]
fn beta_ratio_bound_fails_when_first_entry_grows() {
    let slack = beta_ratio_slack(24.0, 0.05, 0.05, 0.45, 0.45, 0.05);
    assert!(slack < -10.0, "slack {slack}");
}

#[test]
fn vertex_minimum_below_interior_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let cases = [
        (24.0, DomainSpec::new(3, vec![0, 1], 0.05, 0.05).unwrap(), 0.0023),
        (6.7, DomainSpec::new(4, vec![0, 1, 2], 0.15, 0.15).unwrap(), 0.004),
        (4.1, DomainSpec::new(5, vec![1, 2, 3], 0.25, 0.1).unwrap(), 0.01),
    ];
    for (k, d, gamma) in cases {
        let c = cfg(k);
        let g = PartitionParam::new(gamma, d.w_size()).unwrap();
        let min = 1.0 - delta_identity(&c, &d, g).unwrap().delta;
        for _ in 0..100 {
            let y = d.sample_projected(&mut rng);
            let p = omega1_probability(&c, &with_remainder(&y), gamma).unwrap().probability;
            assert!(p >= min - 1e-9, "interior {p} below vertex minimum {min} at {y:?}");
        }
    }
}

#[test]
fn privacy_loss_never_exceeds_epsilon() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let settings = [
        (24.0, DomainSpec::new(3, vec![0, 1], 0.05, 0.05).unwrap(), 0.5, 0.0023),
        (6.7, DomainSpec::new(4, vec![0, 1, 2], 0.15, 0.15).unwrap(), 0.1, 0.004),
        (12.0, DomainSpec::new(5, vec![0, 2, 3], 0.08, 0.2).unwrap(), 0.3, 0.02),
    ];
    for (k, d, b, gamma) in settings {
        let c = cfg(k);
        let a = AdjacencyParams::new(b).unwrap();
        let eps = epsilon_identity(&c, &d, &a, PartitionParam::new(gamma, d.w_size()).unwrap()).unwrap();
        for _ in 0..334 {
            let (p, q) = random_adjacent_pair(&d, b, &mut rng).unwrap();
            for _ in 0..1000 {
                let x = omega1_point(&mut rng, &d, gamma);
                let loss = privacy_loss(&c, &p, &q, &x).unwrap();
                assert!(loss <= eps + 1e-9, "loss {loss} > {eps} at p={p:?} q={q:?} x={x:?}");
            }
        }
    }
}

#[test]
fn epsilon_attained_at_extremal_inputs() {
    for (k, eta, eta_bar, b, gamma) in [(24.0, 0.05, 0.05, 0.5, 0.0023), (6.7, 0.15, 0.2, 0.1, 0.01)] {
        let c = cfg(k);
        let d = DomainSpec::new(3, vec![0, 1], eta, eta_bar).unwrap();
        let a = AdjacencyParams::new(b).unwrap();
        let eps = epsilon_identity(&c, &d, &a, PartitionParam::new(gamma, 2).unwrap()).unwrap();
        let h = b / 2.0;
        let far = 1.0 - eta_bar - eta;
        let p = SimplexVector::new(vec![eta + h, far - h, eta_bar]).unwrap();
        let q = SimplexVector::new(vec![eta, far, eta_bar]).unwrap();
        let t = 1e-13;
        let x = SimplexVector::new(vec![1.0 - gamma - t, gamma, t]).unwrap();
        let loss = privacy_loss(&c, &p, &q, &x).unwrap();
        assert!((loss - eps).abs() < 1e-9 * eps.max(1.0), "loss {loss} vs epsilon {eps}");

        let cand = first_term_candidates(&c, &d, h).unwrap();
        let max = cand.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!((max - cand[0]).abs() < 1e-12);
        assert!((cand[0] - cand[1]).abs() < 1e-10);
        assert!((cand[2] - cand[3]).abs() < 1e-10);
        assert!(cand[0] > 0.0 && cand[2] < 0.0);
    }
}

#[test]
fn single_coordinate_calibration_matches_beta_quantile() {
    for (k, eta, eta_bar, delta_hat) in [
        (24.0, 0.05, 0.05, 0.05),
        (6.7, 0.15, 0.3, 0.01),
        (40.0, 0.3, 0.1, 0.2),
        (3.0, 0.4, 0.2, 0.1),
    ] {
        let c = cfg(k);
        let d = DomainSpec::new(2, vec![0], eta, eta_bar).unwrap();
        let cal = calibrate_gamma(&c, &d, delta_hat).unwrap();
        let oracle = Beta::new(k * eta, k * (1.0 - eta)).unwrap().inverse_cdf(delta_hat);
        assert!(
            (cal.gamma.gamma() - oracle).abs() < 1e-8,
            "k={k} eta={eta}: {} vs {oracle}",
            cal.gamma.gamma()
        );
    }
}

#[test]
fn omega1_matches_monte_carlo_at_average_query_vertex() {
    let p = [0.05, 0.05, 0.9];
    let est = omega1_probability(&cfg(24.0), &p, 0.0023).unwrap();
    let (mc, se) = omega1_monte_carlo(24.0, &p, 0.0023, 1_000_000, 31);
    assert!((est.probability - mc).abs() <= 3.0 * se, "{} vs {mc} ± {se}", est.probability);
}
