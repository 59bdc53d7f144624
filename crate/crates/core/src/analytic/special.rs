//! Closed-form special functions.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `kappa(alpha) = (2 pi^2 / alpha) / sin(2 pi / alpha)`, the interference
/// constant of a Poisson field with Rayleigh fading.
pub fn kappa<T: Real>(alpha: T) -> Result<T> {
    if !(alpha > T::of(2.0)) {
        return Err(Error::param("alpha", format!("path loss exponent must be > 2, got {alpha}")));
    }
    let two_pi_over = T::TAU() / alpha;
    Ok(T::PI() * two_pi_over / two_pi_over.sin())
}

/// `Gamma(n, z) / (n - 1)!` for integer `n >= 1`, i.e. `P(Poisson(z) < n)`.
pub fn regularized_upper_gamma<T: Real>(n: u32, z: T) -> Result<T> {
    check_args(n, z)?;
    if z == T::zero() {
        return Ok(T::one());
    }
    if z.is_infinite() {
        return Ok(T::zero());
    }
    let nf = T::from_u32(n).expect("u32 fits");
    if z < nf {
        // Q is near 1 here; going through the lower tail keeps it accurate
        // and monotone.
        return Ok((T::one() - lower_tail(n, z)).max(T::zero()));
    }
    // Below this point exp(-z) is a normal float and the forward product
    // recursion is the most accurate route.
    let cutoff = -T::min_positive_value().ln() * T::of(0.9);
    if z < cutoff {
        let mut term = (-z).exp();
        let mut sum = term;
        for k in 1..n {
            term = term * z / T::from_u32(k).expect("u32 fits");
            sum = sum + term;
        }
        Ok(sum.min(T::one()))
    } else {
        Ok(ln_regularized_upper_gamma(n, z)?.exp())
    }
}

/// Natural log of [`regularized_upper_gamma`]; finite for every finite `z`.
pub fn ln_regularized_upper_gamma<T: Real>(n: u32, z: T) -> Result<T> {
    check_args(n, z)?;
    if z == T::zero() {
        return Ok(T::zero());
    }
    if z.is_infinite() {
        return Ok(T::neg_infinity());
    }
    let ln_z = z.ln();
    let mut logs = Vec::with_capacity(n as usize);
    let mut acc = T::zero();
    logs.push(acc);
    for k in 1..n {
        acc = acc + ln_z - T::from_u32(k).expect("u32 fits").ln();
        logs.push(acc);
    }
    let peak = logs.iter().copied().fold(T::neg_infinity(), T::max);
    let sum: T = logs.iter().map(|&l| (l - peak).exp()).sum();
    Ok((-z + peak + sum.ln()).min(T::zero()))
}

/// `P(Poisson(z) >= n)` by its series, for `z < n`.
fn lower_tail<T: Real>(n: u32, z: T) -> T {
    let mut ln_lead = -z;
    for k in 1..=n {
        ln_lead = ln_lead + z.ln() - T::from_u32(k).expect("u32 fits").ln();
    }
    let mut term = T::one();
    let mut sum = T::one();
    let mut j = n;
    loop {
        j += 1;
        term = term * z / T::from_u32(j).expect("u32 fits");
        sum = sum + term;
        if term <= T::epsilon() * sum {
            break;
        }
    }
    (ln_lead + sum.ln()).exp()
}

fn check_args<T: Real>(n: u32, z: T) -> Result<()> {
    if n == 0 {
        return Err(Error::param("n", "order must be >= 1"));
    }
    if !(z >= T::zero()) {
        return Err(Error::param("z", format!("must be >= 0, got {z}")));
    }
    Ok(())
}
