//! Product-integration weights for the fractional Adams predictor-corrector.
//!
//! The weights depend only on the lag `k = n - j` between the target node
//! `n + 1` and the source node `j`, which is what makes the history sums
//! convolutions. The closed forms are differences of large powers; for large
//! lags they are evaluated through binomial series in `u = 1/(k + 1)` so the
//! cancellation does not eat the significant digits.

use super::FractionalOrder;

/// Lags at or above this switch from the closed form to the series form.
const SERIES_THRESHOLD: usize = 8;

/// Weights for advancing to node `n + 1`.
///
/// `predictor[j]` is `∫_{t_j}^{t_{j+1}} (t_{n+1} - s)^{β-1} ds`, i.e. already
/// scaled by `h^β / β`; divide by `Γ(β)` at use. `corrector` holds the bare
/// coefficients `a_{j,n+1}`; scale by `h^β / Γ(β + 2)` at use.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductWeights {
    pub predictor: Vec<f64>,
    pub corrector: Vec<f64>,
}

pub fn pi_weights(order: FractionalOrder, h: f64, n: usize) -> ProductWeights {
    let beta = order.value();
    let scale = h.powf(beta) / beta;
    let predictor = (0..=n)
        .map(|j| scale * predictor_coefficient(beta, n - j))
        .collect();
    let mut corrector = Vec::with_capacity(n + 2);
    corrector.push(initial_corrector_coefficient(beta, n));
    corrector.extend((1..=n).map(|j| corrector_coefficient(beta, n - j)));
    corrector.push(1.0);
    ProductWeights {
        predictor,
        corrector,
    }
}

/// `(k + 1)^β - k^β`.
pub fn predictor_coefficient(beta: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let kp1 = (k + 1) as f64;
    let u = 1.0 / kp1;
    // (k+1)^β [1 - (1 - u)^β]
    -kp1.powf(beta) * (beta * (-u).ln_1p()).exp_m1()
}

/// `(k + 2)^{β+1} + k^{β+1} - 2 (k + 1)^{β+1}`, the interior corrector
/// coefficient at lag `k`.
pub fn corrector_coefficient(beta: f64, k: usize) -> f64 {
    let p = beta + 1.0;
    if k < SERIES_THRESHOLD {
        let k = k as f64;
        return (k + 2.0).powf(p) + k.powf(p) - 2.0 * (k + 1.0).powf(p);
    }
    let kp1 = (k + 1) as f64;
    let u = 1.0 / kp1;
    // (1+u)^p + (1-u)^p - 2 = 2 Σ_{j even, j ≥ 2} C(p, j) u^j
    let u2 = u * u;
    let mut binom = p * (p - 1.0) / 2.0;
    let mut power = u2;
    let mut sum = binom * power;
    let mut j = 2.0;
    loop {
        binom *= (p - j) * (p - j - 1.0) / ((j + 1.0) * (j + 2.0));
        power *= u2;
        j += 2.0;
        let term = binom * power;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() || j > 60.0 {
            break;
        }
    }
    2.0 * kp1.powf(p) * sum
}

/// `n^{β+1} - (n - β)(n + 1)^β`, the corrector coefficient of the initial
/// node when advancing to node `n + 1`.
pub fn initial_corrector_coefficient(beta: f64, n: usize) -> f64 {
    if n < SERIES_THRESHOLD {
        let n = n as f64;
        return n.powf(beta + 1.0) - (n - beta) * (n + 1.0).powf(beta);
    }
    let np1 = (n + 1) as f64;
    let u = 1.0 / np1;
    // With d_j = (-1)^{j+1} C(β, j):  (n+1)^β Σ_{j≥1} (d_j - d_{j+1}) u^j
    let mut binom = beta; // C(β, 1)
    let mut d = binom; // d_1
    let mut power = 1.0;
    let mut sum = 0.0;
    let mut j = 1.0;
    loop {
        binom *= (beta - j) / (j + 1.0);
        let d_next = if (j as i64) % 2 == 0 { binom } else { -binom };
        power *= u;
        let term = (d - d_next) * power;
        sum += term;
        d = d_next;
        j += 1.0;
        if term.abs() <= 1e-18 * sum.abs() || j > 120.0 {
            break;
        }
    }
    np1.powf(beta) * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn order(beta: f64) -> FractionalOrder {
        FractionalOrder::new(beta).unwrap()
    }

    #[test]
    fn classical_order_gives_rectangle_and_trapezoid() {
        let w = pi_weights(order(1.0), 0.5, 6);
        assert_eq!(w.predictor.len(), 7);
        assert_eq!(w.corrector.len(), 8);
        for &b in &w.predictor {
            assert_relative_eq!(b, 0.5, epsilon = 1e-15);
        }
        let w = pi_weights(order(1.0), 1.0, 0);
        // h / Γ(3) = 1/2
        assert_relative_eq!(w.corrector[0] * 0.5, 0.5, epsilon = 1e-15);
        assert_relative_eq!(w.corrector[1] * 0.5, 0.5, epsilon = 1e-15);
        let w = pi_weights(order(1.0), 1.0, 5);
        assert_relative_eq!(w.corrector[0], 1.0, epsilon = 1e-15);
        for &a in &w.corrector[1..=5] {
            assert_relative_eq!(a, 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn series_forms_match_closed_forms_where_both_are_accurate() {
        for &beta in &[0.1, 0.5, 0.8, 0.99, 1.0] {
            for k in SERIES_THRESHOLD..200 {
                let kf = k as f64;
                let p = beta + 1.0;
                let closed = (kf + 2.0).powf(p) + kf.powf(p) - 2.0 * (kf + 1.0).powf(p);
                assert_relative_eq!(corrector_coefficient(beta, k), closed, max_relative = 1e-9);
                let closed0 = kf.powf(p) - (kf - beta) * (kf + 1.0).powf(beta);
                assert_relative_eq!(
                    initial_corrector_coefficient(beta, k),
                    closed0,
                    max_relative = 1e-9
                );
                let closedp = (kf + 1.0).powf(beta) - kf.powf(beta);
                assert_relative_eq!(
                    predictor_coefficient(beta, k),
                    closedp,
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn large_lag_coefficients_match_high_precision_values() {
        // Reference values computed with 50-digit arithmetic.
        assert_relative_eq!(
            corrector_coefficient(0.8, 1_000_000),
            0.090_857_839_433_589_03,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            initial_corrector_coefficient(0.8, 1_000_000),
            0.045_428_922_745_386_13,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            predictor_coefficient(0.8, 1_000_000),
            0.050_476_582_510_758_72,
            max_relative = 1e-12
        );
    }
}
