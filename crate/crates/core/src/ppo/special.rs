//! Scalar special functions needed by the Beta policy head: log-gamma,
//! digamma, trigamma, and a numerically safe softplus/sigmoid pair. All at
//! double precision; accuracy is pinned by tests against high-precision
//! reference values.

/// Lanczos approximation (g = 7, 9 terms), accurate to ~1e-13 relative for
/// positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma defined here for positive arguments");
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection; unused by the Beta head (parameters exceed 1) but
        // keeps the function total on (0, inf).
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Digamma via upward recurrence into the asymptotic series.
pub fn digamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut x = x;
    let mut acc = 0.0;
    while x < 12.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + x.ln() - 0.5 * inv
        - inv2
            * (1.0 / 12.0
                - inv2
                    * (1.0 / 120.0
                        - inv2
                            * (1.0 / 252.0
                                - inv2
                                    * (1.0 / 240.0
                                        - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0))))))
}

/// Trigamma via upward recurrence into the asymptotic series.
pub fn trigamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut x = x;
    let mut acc = 0.0;
    while x < 12.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + inv
        * (1.0
            + inv
                * (0.5
                    + inv
                        * (1.0 / 6.0
                            - inv2
                                * (1.0 / 30.0
                                    - inv2
                                        * (1.0 / 42.0
                                            - inv2 * (1.0 / 30.0 - inv2 * (5.0 / 66.0)))))))
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Logistic function; the derivative of softplus.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Log-density of Beta(alpha, beta) at `x` in (0, 1).
pub fn beta_log_pdf(x: f64, alpha: f64, beta: f64) -> f64 {
    let ln_b = ln_gamma(alpha) + ln_gamma(beta) - ln_gamma(alpha + beta);
    (alpha - 1.0) * x.ln() + (beta - 1.0) * (1.0 - x).ln() - ln_b
}

/// Differential entropy of Beta(alpha, beta).
pub fn beta_entropy(alpha: f64, beta: f64) -> f64 {
    let ln_b = ln_gamma(alpha) + ln_gamma(beta) - ln_gamma(alpha + beta);
    ln_b - (alpha - 1.0) * digamma(alpha) - (beta - 1.0) * digamma(beta)
        + (alpha + beta - 2.0) * digamma(alpha + beta)
}

/// Gradient of [`beta_log_pdf`] with respect to `(alpha, beta)`.
pub fn beta_log_pdf_grad(x: f64, alpha: f64, beta: f64) -> (f64, f64) {
    let psi_ab = digamma(alpha + beta);
    (x.ln() - digamma(alpha) + psi_ab, (1.0 - x).ln() - digamma(beta) + psi_ab)
}

/// Gradient of [`beta_entropy`] with respect to `(alpha, beta)`.
pub fn beta_entropy_grad(alpha: f64, beta: f64) -> (f64, f64) {
    let common = (alpha + beta - 2.0) * trigamma(alpha + beta);
    (common - (alpha - 1.0) * trigamma(alpha), common - (beta - 1.0) * trigamma(beta))
}
