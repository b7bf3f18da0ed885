//! Helpers shared between integration-test binaries.

use ambit::levy::{modular_phi0, JumpDistribution, LevyMeasure, Triplet};
use ambit::rng::CounterRng;

/// Draw a random supported triplet from a deterministic stream, covering
/// every measure family: deterministic/Gaussian, compound Poisson (three
/// jump laws), general stable, Cauchy-type, and normal inverse Gaussian.
pub fn random_triplet(rng: &mut CounterRng) -> Triplet {
    let gamma = 4.0 * (rng.uniform() - 0.5);
    match (rng.next_u64() % 5) as u8 {
        0 => Triplet::new(gamma, 0.2 + 2.0 * rng.uniform(), LevyMeasure::None),
        1 => {
            let jumps = match (rng.next_u64() % 3) as u8 {
                0 => JumpDistribution::Gaussian {
                    mean: rng.uniform() - 0.5,
                    std: 0.2 + rng.uniform(),
                },
                1 => JumpDistribution::Uniform { lo: -1.5, hi: 0.5 + rng.uniform() },
                _ => JumpDistribution::Point { value: 0.3 + 2.0 * rng.uniform() },
            };
            Triplet::new(gamma, 0.0, LevyMeasure::Cp { rate: 0.5 + 4.0 * rng.uniform(), jumps })
        }
        2 => {
            // Stable, avoiding the asymmetric β = 1 boundary.
            let mut beta = 0.3 + 1.65 * rng.uniform();
            if (beta - 1.0).abs() < 0.05 {
                beta = 1.1;
            }
            Triplet::new(
                gamma,
                0.0,
                LevyMeasure::Stable {
                    k_plus: 0.2 + rng.uniform(),
                    k_minus: 0.2 + rng.uniform(),
                    beta,
                },
            )
        }
        3 => Triplet::new(
            gamma,
            0.0,
            LevyMeasure::Stable { k_plus: 1.0, k_minus: 1.0, beta: 1.0 },
        ),
        _ => {
            let alpha = 1.0 + 2.0 * rng.uniform();
            Triplet::new(
                gamma,
                0.5 * rng.uniform(),
                LevyMeasure::Gh {
                    lambda: -0.5,
                    alpha,
                    theta: (2.0 * rng.uniform() - 1.0) * 0.8 * alpha,
                    delta: 0.2 + rng.uniform(),
                },
            )
        }
    }
}

/// Check the modular properties of `Φ⁰` on `count` random
/// `(triplet, x, y, K)` tuples: evenness, `Φ⁰(0) = 0`,
/// `Φ⁰(x+y) ≤ 3[Φ⁰(x) + Φ⁰(y)]`, and `Φ⁰(Kx) ≤ (K² ∨ 2)·Φ⁰(x)`.  Returns
/// the first violation, if any; the slack covers quadrature error on the
/// density-type measures.
pub fn modular_suite_violation(count: usize, seed: u64) -> Option<String> {
    let mut rng = CounterRng::new(seed, &[0x504849]);
    for i in 0..count {
        let triplet = random_triplet(&mut rng);
        let scale = 10.0f64.powf(2.0 * rng.uniform() - 1.0);
        let x = scale * (2.0 * rng.uniform() - 1.0);
        let y = scale * (2.0 * rng.uniform() - 1.0);
        let k = 4.0 * (2.0 * rng.uniform() - 1.0);
        let phi = |v: f64| modular_phi0(&triplet, v).unwrap();
        if phi(0.0) != 0.0 {
            return Some(format!("tuple {i}: Φ⁰(0) = {} ≠ 0", phi(0.0)));
        }
        let (px, py) = (phi(x), phi(y));
        if !(px >= 0.0 && py >= 0.0) {
            return Some(format!("tuple {i}: negative or NaN value ({px}, {py})"));
        }
        let even_gap = (phi(-x) - px).abs();
        if even_gap > 1e-9 * (1.0 + px) {
            return Some(format!("tuple {i}: evenness gap {even_gap}"));
        }
        let sum = phi(x + y);
        if sum > 3.0 * (px + py) + 1e-9 * (1.0 + px + py) {
            return Some(format!(
                "tuple {i}: Φ⁰({x}+{y}) = {sum} exceeds 3·({px}+{py})"
            ));
        }
        let scaled = phi(k * x);
        let bound = (k * k).max(2.0) * px;
        if scaled > bound + 1e-9 * (1.0 + bound) {
            return Some(format!("tuple {i}: Φ⁰({k}·{x}) = {scaled} exceeds {bound}"));
        }
    }
    None
}
