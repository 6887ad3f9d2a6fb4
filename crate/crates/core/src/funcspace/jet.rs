//! Truncated Taylor series arithmetic.
//!
//! A jet of length `n + 1` holds the normalized coefficients `f^(k)(x) / k!`
//! for `k = 0..=n`. All operations keep the truncation order of their inputs.

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Converts normalized coefficients into plain derivatives.
pub(crate) fn to_derivatives(mut jet: Vec<f64>) -> Vec<f64> {
    let mut fact = 1.0;
    for (k, c) in jet.iter_mut().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        *c *= fact;
    }
    jet
}

pub(crate) fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub(crate) fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    (0..n)
        .map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum())
        .collect()
}

/// Reciprocal of a series with nonzero constant term.
pub(crate) fn recip(a: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; a.len()];
    r[0] = 1.0 / a[0];
    for k in 1..a.len() {
        let s: f64 = (1..=k).map(|i| a[i] * r[k - i]).sum();
        r[k] = -s / a[0];
    }
    r
}

/// `exp` of a series. Returns all zeros once the constant term underflows.
pub(crate) fn exp(a: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; a.len()];
    e[0] = a[0].exp();
    if e[0] == 0.0 {
        return e;
    }
    for k in 1..a.len() {
        let s: f64 = (1..=k).map(|j| j as f64 * a[j] * e[k - j]).sum();
        e[k] = s / k as f64;
    }
    e
}

/// Rescales the expansion variable: coefficients of `h -> f(x + s*h)`.
pub(crate) fn rescale(mut a: Vec<f64>, s: f64) -> Vec<f64> {
    let mut p = 1.0;
    for c in a.iter_mut() {
        *c *= p;
        p *= s;
    }
    a
}

/// Taylor coefficients at `x` of the polynomial with monomial coefficients `coeffs`.
pub(crate) fn poly(coeffs: &[f64], x: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for (k, slot) in out.iter_mut().enumerate() {
        if k >= coeffs.len() {
            break;
        }
        // Horner on the k-th derivative divided by k!
        let mut acc = 0.0;
        for i in (k..coeffs.len()).rev() {
            acc = acc * x + coeffs[i] * binomial(i, k);
        }
        *slot = acc;
    }
    out
}

/// Taylor coefficients of `exp(-1 / (1 - (t/r)^2))` at `t`, zero outside `(-r, r)`.
pub(crate) fn bump(r: f64, t: f64, n: usize) -> Vec<f64> {
    let u = t / r;
    if u.abs() >= 1.0 {
        return vec![0.0; n + 1];
    }
    // s(h) = 1 - (u + h/r)^2
    let mut s = vec![0.0; n + 1];
    s[0] = 1.0 - u * u;
    if n >= 1 {
        s[1] = -2.0 * u / r;
    }
    if n >= 2 {
        s[2] = -1.0 / (r * r);
    }
    if -1.0 / s[0] < -745.0 {
        return vec![0.0; n + 1];
    }
    let g: Vec<f64> = recip(&s).into_iter().map(|c| -c).collect();
    exp(&g)
}
