use statrs::function::beta::inv_beta_reg;
use statrs::function::factorial::ln_binomial;

/// Relative slack when collecting outcomes "as or less likely" than the
/// observed count, so ties survive rounding.
const TIE_SLACK: f64 = 1e-7;

/// Binomial probability mass `P(X = k)` for `X ~ Bin(n, p)`.
pub fn binomial_pmf(k: u64, n: u64, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    (ln_binomial(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()).exp()
}

/// Two-sided exact binomial test of `H0: p = p0` given `k` successes in `n`
/// trials. Sums the probability of every outcome no more likely than `k`.
pub fn binomial_test_two_sided(k: u64, n: u64, p0: f64) -> f64 {
    assert!(k <= n, "successes exceed trials");
    let observed = binomial_pmf(k, n, p0);
    let limit = observed * (1.0 + TIE_SLACK);
    let (mut total, mut excluded) = (0.0, false);
    for q in (0..=n).map(|j| binomial_pmf(j, n, p0)) {
        if q <= limit {
            total += q;
        } else {
            excluded = true;
        }
    }
    // Every outcome counts: the p-value is exactly 1, not a rounded sum.
    if excluded {
        total.clamp(0.0, 1.0)
    } else {
        1.0
    }
}

/// Clopper-Pearson interval for a binomial proportion at confidence `1 - alpha`.
pub fn clopper_pearson(k: u64, n: u64, alpha: f64) -> (f64, f64) {
    assert!(n > 0 && k <= n, "need 0 <= k <= n and n > 0");
    let (k, n) = (k as f64, n as f64);
    let lower = if k == 0.0 { 0.0 } else { inv_beta_reg(k, n - k + 1.0, alpha / 2.0) };
    let upper = if k == n { 1.0 } else { inv_beta_reg(k + 1.0, n - k, 1.0 - alpha / 2.0) };
    (lower, upper)
}
