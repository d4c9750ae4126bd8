//! Gaussian tail function in linear and log form.

use std::f64::consts::{PI, SQRT_2};

/// `Q(x) = P(N > x)` for a standard normal `N`.
pub fn q_func(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// `ln Q(x)`, accurate far into the tail where `Q` underflows.
pub fn ln_q(x: f64) -> f64 {
    if x < 30.0 {
        q_func(x).ln()
    } else {
        // Asymptotic series of the Mills ratio; truncation error below
        // 1e-12 relative at x = 30.
        let z = 1.0 / (x * x);
        let series = 1.0 - z * (1.0 - 3.0 * z * (1.0 - 5.0 * z * (1.0 - 7.0 * z)));
        -0.5 * x * x - (x * (2.0 * PI).sqrt()).ln() + series.ln()
    }
}

/// `P(a < N < b)` for a standard normal, without cancellation in either
/// tail.
pub fn normal_interval(a: f64, b: f64) -> f64 {
    if b <= a {
        0.0
    } else if a >= 0.0 {
        q_func(a) - q_func(b)
    } else if b <= 0.0 {
        q_func(-b) - q_func(-a)
    } else {
        1.0 - q_func(-a) - q_func(b)
    }
}

/// `ln(1 - exp(x))` for `x <= 0`.
fn ln_1m_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// `ln P(a < N < b)`, finite wherever the interval has positive mass, even
/// when the probability itself underflows.
pub fn ln_normal_interval(a: f64, b: f64) -> f64 {
    if b <= a {
        f64::NEG_INFINITY
    } else if a >= 0.0 {
        let la = ln_q(a);
        la + ln_1m_exp(ln_q(b) - la)
    } else if b <= 0.0 {
        ln_normal_interval(-b, -a)
    } else {
        normal_interval(a, b).ln()
    }
}

/// `ln(exp(a) + exp(b))` without overflow.
pub(crate) fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ln_interval_matches_linear_and_tail() {
        for (a, b) in [(-1.0, 2.0), (0.5, 1.5), (-3.0, -0.2), (2.0, 2.0001)] {
            assert_relative_eq!(ln_normal_interval(a, b), normal_interval(a, b).ln(), max_relative = 1e-9);
        }
        // Narrow interval deep in the tail: mass is density times width.
        let (a, w) = (45.0, 1e-3);
        let ln_phi_mid = -0.5 * (a + w / 2.0) * (a + w / 2.0) - 0.5 * (2.0 * PI).ln();
        assert_relative_eq!(ln_normal_interval(a, a + w), ln_phi_mid + w.ln(), max_relative = 1e-6);
        assert_relative_eq!(ln_normal_interval(-a - w, -a), ln_normal_interval(a, a + w), max_relative = 1e-15);
        assert_eq!(ln_normal_interval(1.0, 1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn reference_values() {
        assert_eq!(q_func(0.0), 0.5);
        assert_relative_eq!(q_func(1.0), 0.158655253931457, epsilon = 1e-12);
        assert_relative_eq!(q_func(2.0), 0.0227501319481792, epsilon = 1e-12);
        assert_relative_eq!(q_func(-3.8), 0.999927652, epsilon = 1e-9);
        for x in [0.5, 1.0, 2.0] {
            assert_relative_eq!(q_func(-x), 1.0 - q_func(x), epsilon = 1e-15);
        }
    }

    #[test]
    fn log_tail_is_continuous_and_accurate() {
        for x in [5.0, 10.0, 20.0, 29.0] {
            assert_relative_eq!(ln_q(x), q_func(x).ln(), max_relative = 1e-13);
        }
        // Exact value at 30 from erfc (still representable).
        assert_relative_eq!(ln_q(30.0), q_func(30.0).ln(), max_relative = 1e-12);
        assert_relative_eq!(ln_q(30.0 - 1e-9), ln_q(30.0), max_relative = 1e-9);
        assert!(ln_q(100.0).is_finite() && ln_q(100.0) < ln_q(90.0));
        assert_eq!(q_func(100.0), 0.0);
    }

    #[test]
    fn interval_probability() {
        assert_relative_eq!(normal_interval(-1.0, 1.0), 1.0 - 2.0 * q_func(1.0), epsilon = 1e-15);
        assert_relative_eq!(normal_interval(1.0, 2.0), q_func(1.0) - q_func(2.0), epsilon = 1e-15);
        // Deep left tail keeps relative precision.
        let far = normal_interval(-12.0, -11.0);
        assert_relative_eq!(far, q_func(11.0) - q_func(12.0), max_relative = 1e-12);
        assert!(far > 0.0);
        assert_eq!(normal_interval(2.0, 1.0), 0.0);
    }

    #[test]
    fn log_sum() {
        assert_relative_eq!(ln_add(2f64.ln(), 3f64.ln()), 5f64.ln(), epsilon = 1e-15);
        assert_eq!(ln_add(f64::NEG_INFINITY, 1.0), 1.0);
        assert_relative_eq!(ln_add(-1000.0, -1000.0), -1000.0 + 2f64.ln(), epsilon = 1e-12);
    }
}
