//! Helpers shared by the integration tests.
#![allow(dead_code)]

use dirichlet_core::special::ln_beta;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

/// Monte-Carlo estimate and standard error of `P[x_i >= gamma, i < m]` for
/// `x ~ Dirichlet(k p_tilde)`, with `m = p_tilde.len() - 1`. Draws come from
/// `rand_distr::Gamma`, independently of the crate's sampler.
pub fn omega1_monte_carlo(k: f64, p_tilde: &[f64], gamma: f64, draws: usize, seed: u64) -> (f64, f64) {
    const CHUNK: usize = 50_000;
    let m = p_tilde.len() - 1;
    let gammas: Vec<Gamma<f64>> = p_tilde.iter().map(|&p| Gamma::new(k * p, 1.0).unwrap()).collect();
    let hits: u64 = (0..draws.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (c as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let len = CHUNK.min(draws - c * CHUNK);
            let mut g = vec![0.0; gammas.len()];
            let mut hits = 0u64;
            for _ in 0..len {
                for (v, d) in g.iter_mut().zip(&gammas) {
                    *v = d.sample(&mut rng);
                }
                let total: f64 = g.iter().sum();
                if g[..m].iter().all(|&v| v >= gamma * total) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let p = hits as f64 / draws as f64;
    (p, (p * (1.0 - p) / draws as f64).sqrt())
}

/// `ln rhs − ln lhs` of the beta-ratio inequality
/// `beta(kq_i, kq_j) / beta(kp_i, kp_j) <= beta(kq_i, k(1−η̄−q_i)) / beta(kp_i, k(1−η̄−p_i))`.
pub fn beta_ratio_slack(k: f64, eta_bar: f64, pi: f64, pj: f64, qi: f64, qj: f64) -> f64 {
    let top = 1.0 - eta_bar;
    let lhs = ln_beta(k * qi, k * qj).unwrap() - ln_beta(k * pi, k * pj).unwrap();
    let rhs = ln_beta(k * qi, k * (top - qi)).unwrap() - ln_beta(k * pi, k * (top - pi)).unwrap();
    rhs - lhs
}

/// A random tuple `(p_i, p_j, q_i, q_j)` with `p_i + p_j = q_i + q_j <= 1 − η̄`,
/// every entry in `[η, 1 − η̄ − η]` and `|p_i − q_i| <= b/2`. When `oriented`,
/// `q_i <= p_i`.
pub fn feasible_tuple<R: Rng>(rng: &mut R, eta: f64, eta_bar: f64, b: f64, oriented: bool) -> (f64, f64, f64, f64) {
    let top = 1.0 - eta_bar;
    loop {
        let sum = rng.random_range(2.0 * eta..=top);
        let pi = rng.random_range(eta..=sum - eta);
        let shift = rng.random_range(0.0..=b / 2.0);
        let qi = if oriented || rng.random_bool(0.5) { pi - shift } else { pi + shift };
        let (pj, qj) = (sum - pi, sum - qi);
        if [qi, qj].iter().all(|&v| v >= eta && v <= top - eta) && pi != qi {
            return (pi, pj, qi, qj);
        }
    }
}
