//! Modified Bessel function of the second kind for real order.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 100_000;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `K_ν(x)` for `ν ≥ 0` and `x > 0`.
///
/// Uses Temme's series for `x < 2` and Steed's continued fraction otherwise,
/// at order `μ = ν − round(ν) ∈ [−½, ½]`, followed by forward recurrence in
/// the order.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::Argument(format!("Bessel order must be finite and >= 0, got {nu}")));
    }
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Argument(format!("Bessel argument must be finite and > 0, got {x}")));
    }
    let nl = (nu + 0.5).floor() as usize;
    let mu = nu - nl as f64;
    let (mut k_mu, mut k_mu1) = if x < 2.0 { temme(mu, x)? } else { steed(mu, x)? };
    let two_over_x = 2.0 / x;
    for i in 1..=nl {
        let next = (mu + i as f64) * two_over_x * k_mu1 + k_mu;
        k_mu = k_mu1;
        k_mu1 = next;
    }
    Ok(k_mu)
}

/// `(1/Γ(1−μ) − 1/Γ(1+μ)) / 2μ`, `(1/Γ(1−μ) + 1/Γ(1+μ)) / 2`, `1/Γ(1+μ)`, `1/Γ(1−μ)`.
fn gamma_terms(mu: f64) -> (f64, f64, f64, f64) {
    let plus = 1.0 / gamma(1.0 + mu);
    let minus = 1.0 / gamma(1.0 - mu);
    let g1 = if mu.abs() < 1e-3 {
        let m2 = mu * mu;
        -(EULER_GAMMA - 0.042_002_635_034_095_2 * m2 - 0.009_621_971_527_877_0 * m2 * m2)
    } else {
        (minus - plus) / (2.0 * mu)
    };
    (g1, 0.5 * (minus + plus), plus, minus)
}

fn temme(mu: f64, x: f64) -> Result<(f64, f64)> {
    let x2 = 0.5 * x;
    let pimu = PI * mu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
    let (g1, g2, gampl, gammi) = gamma_terms(mu);
    let mut ff = fact * (g1 * e.cosh() + g2 * fact2 * d);
    let mut sum = ff;
    let ee = e.exp();
    let mut p = 0.5 * ee / gampl;
    let mut q = 0.5 / (ee * gammi);
    let mut c = 1.0;
    let dd = x2 * x2;
    let mut sum1 = p;
    let mu2 = mu * mu;
    for i in 1..=MAX_ITER {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu2);
        c *= dd / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        sum1 += c * (p - fi * ff);
        if del.abs() < sum.abs() * EPS {
            return Ok((sum, sum1 * 2.0 / x));
        }
    }
    Err(Error::Numerical(format!("Bessel series did not converge at x={x}")))
}

fn steed(mu: f64, x: f64) -> Result<(f64, f64)> {
    let mu2 = mu * mu;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu2;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..=MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            h *= a1;
            let k_mu = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
            let k_mu1 = k_mu * (mu + x + 0.5 - h) / x;
            return Ok((k_mu, k_mu1));
        }
    }
    Err(Error::Numerical(format!("Bessel continued fraction did not converge at x={x}")))
}
