//! Parameter records, the rational constants b_n and d_n, and log-normalisations.

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::algebra::{checked_div, frac, int, serde_rational, Rational};
use crate::error::{Error, Result};

pub fn check_beta(beta: u32) -> Result<()> {
    if matches!(beta, 1 | 2 | 4) {
        Ok(())
    } else {
        Err(Error::UnsupportedBeta(beta))
    }
}

/// eta = 4 for beta = 4, otherwise 1.
pub fn eta(beta: u32) -> i64 {
    if beta == 4 {
        4
    } else {
        1
    }
}

/// Lattice step: 1 for beta = 4, 2 for beta = 1, none for beta = 2.
pub fn lattice_step(beta: u32) -> Option<i64> {
    match beta {
        1 => Some(2),
        4 => Some(1),
        _ => None,
    }
}

/// Transmission-eigenvalue ensemble: weight T^alpha (1-T)^(delta/2) |Delta|^beta on [0,1]^n.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportParams {
    pub beta: u32,
    #[serde(with = "serde_rational")]
    pub alpha: Rational,
    #[serde(with = "serde_rational")]
    pub delta: Rational,
    pub n: u64,
}

impl TransportParams {
    pub fn new(beta: u32, alpha: Rational, delta: Rational, n: u64) -> Result<Self> {
        check_beta(beta)?;
        if n == 0 {
            return Err(Error::InvalidParams("n must be positive".into()));
        }
        if alpha <= int(-1) {
            return Err(Error::InvalidParams("alpha must exceed -1".into()));
        }
        if delta <= int(-2) {
            return Err(Error::InvalidParams("delta/2 must exceed -1".into()));
        }
        Ok(TransportParams { beta, alpha, delta, n })
    }

    /// Shorthand for integer-ratio parameters, panicking on invalid input.
    pub fn simple(beta: u32, alpha: (i64, i64), delta: (i64, i64), n: u64) -> Self {
        Self::new(beta, frac(alpha.0, alpha.1), frac(delta.0, delta.1), n).expect("valid parameters")
    }

    pub fn with_n(&self, n: u64) -> Self {
        TransportParams { n, ..self.clone() }
    }

    /// alpha + delta/2 + n beta + 2 - beta.
    pub fn shot_coefficient(&self) -> Rational {
        &self.alpha + &self.delta / int(2) + int(self.n as i64 * self.beta as i64 + 2 - self.beta as i64)
    }

    /// The beta = 1 recurrences come from an even-n Pfaffian; odd n is evaluated by continuation.
    pub fn extended_validity(&self) -> bool {
        self.beta == 1 && self.n % 2 == 1
    }
}

/// Delay-time ensemble: weight tau^(-b) exp(-beta n / (2 tau)) |Delta|^beta.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelayParams {
    pub beta: u32,
    pub n: u64,
    #[serde(with = "serde_rational")]
    pub b: Rational,
    #[serde(with = "serde_rational")]
    pub omega: Rational,
    pub q: i64,
}

pub fn default_b(beta: u32, n: u64) -> Rational {
    frac(3 * beta as i64 * n as i64, 2) + int(2 - beta as i64)
}

pub fn omega_of(beta: u32, n: i64, b: &Rational) -> Rational {
    b - int(2) - int(beta as i64 * (n - 1))
}

pub fn floor_of(x: &Rational) -> i64 {
    x.numer().div_floor(x.denom()).to_i64().expect("floor fits in i64")
}

impl DelayParams {
    pub fn new(beta: u32, n: u64, b: Option<Rational>) -> Result<Self> {
        check_beta(beta)?;
        if n == 0 {
            return Err(Error::InvalidParams("n must be positive".into()));
        }
        let b = b.unwrap_or_else(|| default_b(beta, n));
        let omega = omega_of(beta, n as i64, &b);
        let q = floor_of(&omega);
        Ok(DelayParams { beta, n, b, omega, q })
    }

    pub fn default_for(beta: u32, n: u64) -> Self {
        Self::new(beta, n, None).expect("valid parameters")
    }
}

/// b_n^(1) as a rational function, without the vanishing-prefactor convention.
pub fn b1_formula(alpha: &Rational, delta: &Rational, n: &Rational) -> Result<Rational> {
    let a = alpha;
    let d = delta;
    let h = d / int(2);
    let one = Rational::one();
    let two = int(2);
    let s = &h + a + n;
    let t = d + &two * a + &two * n;
    let num = n
        * (n - &one)
        * (&two * a + n)
        * (&two * a + n + &one)
        * (d + n)
        * (d + n + &one)
        * (d + &two * a + n + &one)
        * (d + &two * a + n + &two);
    let den = int(16)
        * &s
        * (&s + &one)
        * (&s + &one)
        * (&s + &two)
        * (&t - &one)
        * (&t + &one)
        * (&t + &one)
        * (&t + int(3));
    checked_div(&num, &den, "b_n (beta = 1) denominator")
}

/// b_n^(4) as a rational function.
pub fn b4_formula(alpha: &Rational, delta: &Rational, n: &Rational) -> Result<Rational> {
    let a = alpha;
    let h = delta / int(2);
    let one = Rational::one();
    let two = int(2);
    let n2 = &two * n;
    let n4 = int(4) * n;
    let s = &h + a;
    let num = &two
        * n
        * (&n2 + &one)
        * (a + &n2)
        * (a + &n2 - &one)
        * (&h + &n2)
        * (&h + &n2 - &one)
        * (&s + &n2 - &one)
        * (&s + &n2 - &two);
    let u = &s + &n4;
    let den = &u
        * (&u - &two)
        * (&u - &two)
        * (&u - int(4))
        * (&u + &one)
        * (&u - &one)
        * (&u - &one)
        * (&u - int(3));
    checked_div(&num, &den, "b_n (beta = 4) denominator")
}

/// b_n at an arbitrary lattice dimension. The prefactor n(n-1) (beta = 1) or n
/// (beta = 4) makes the constant vanish at the bottom of the lattice, where the
/// shifted dimension n - i(beta) would be negative or zero.
pub fn b_constant_at(beta: u32, alpha: &Rational, delta: &Rational, n: i64) -> Result<Rational> {
    match beta {
        2 => Ok(Rational::zero()),
        1 if n == 0 || n == 1 => Ok(Rational::zero()),
        1 => b1_formula(alpha, delta, &int(n)),
        4 if n == 0 => Ok(Rational::zero()),
        4 => b4_formula(alpha, delta, &int(n)),
        _ => Err(Error::UnsupportedBeta(beta)),
    }
}

pub fn b_constant(p: &TransportParams) -> Result<Rational> {
    b_constant_at(p.beta, &p.alpha, &p.delta, p.n as i64)
}

pub fn d1_formula(b: &Rational, n: &Rational) -> Result<Rational> {
    let one = Rational::one();
    let two = int(2);
    let num = n * (n - &one) * (&two * b - &two - n) * (&two * b - &one - n);
    let u = b - n;
    let v = &two * b - &two * n;
    let den = &u
        * (&v + &one)
        * (&u - &two)
        * (&v - int(3))
        * (&u - &one)
        * (&u - &one)
        * (&v - &one)
        * (&v - &one);
    checked_div(&num, &den, "d_n (beta = 1) denominator")
}

pub fn d4_formula(b: &Rational, n: &Rational) -> Result<Rational> {
    let one = Rational::one();
    let two = int(2);
    let n2 = &two * n;
    let u = b - int(4) * n;
    let num = &two * n * (&n2 + &one) * (b + &two - &n2) * (b + &one - &n2);
    let den = (&u + int(3))
        * (&u + &one)
        * (&u + &one)
        * (&u + &two)
        * (&u + &two)
        * (&u - &one)
        * &u
        * (&u + int(4));
    checked_div(&num, &den, "d_n (beta = 4) denominator")
}

pub fn d_constant_at(beta: u32, b: &Rational, n: i64) -> Result<Rational> {
    match beta {
        2 => Ok(Rational::zero()),
        1 if n == 0 || n == 1 => Ok(Rational::zero()),
        1 => d1_formula(b, &int(n)),
        4 if n == 0 => Ok(Rational::zero()),
        4 => d4_formula(b, &int(n)),
        _ => Err(Error::UnsupportedBeta(beta)),
    }
}

pub fn d_constant(p: &DelayParams) -> Result<Rational> {
    d_constant_at(p.beta, &p.b, p.n as i64)
}

fn lgamma_checked(x: f64) -> Result<f64> {
    if x <= 0.0 || !x.is_finite() {
        Err(Error::InvalidGammaArgument(x))
    } else {
        Ok(ln_gamma(x))
    }
}

/// Natural log of the Selberg integral c_n for the transmission weight.
pub fn log_selberg_raw(beta: u32, alpha: f64, delta: f64, n: u64) -> Result<f64> {
    let hb = beta as f64 / 2.0;
    let mut acc = 0.0;
    for j in 0..n {
        let j = j as f64;
        acc += lgamma_checked(alpha + 1.0 + j * hb)?;
        acc += lgamma_checked(delta / 2.0 + 1.0 + j * hb)?;
        acc += lgamma_checked(1.0 + (j + 1.0) * hb)?;
        acc -= lgamma_checked(alpha + delta / 2.0 + 2.0 + (n as f64 + j - 1.0) * hb)?;
        acc -= lgamma_checked(1.0 + hb)?;
    }
    Ok(acc)
}

pub fn log_selberg(p: &TransportParams) -> Result<f64> {
    log_selberg_raw(p.beta, crate::algebra::to_f64(&p.alpha), crate::algebra::to_f64(&p.delta), p.n)
}

/// Natural log of m_n, the delay-time normalisation, at dimension `n` and exponent `b`.
pub fn log_delay_norm_raw(beta: u32, n: u64, b: f64) -> Result<f64> {
    let hb = beta as f64 / 2.0;
    let mut acc = 0.0;
    for j in 0..n {
        let j = j as f64;
        acc += lgamma_checked(1.0 + (j + 1.0) * hb)?;
        acc += lgamma_checked(b - 1.0 + (j - 2.0 * n as f64 + 2.0) * hb)?;
        acc -= lgamma_checked(1.0 + hb)?;
    }
    Ok(acc)
}

pub fn log_delay_norm(p: &DelayParams) -> Result<f64> {
    log_delay_norm_raw(p.beta, p.n, crate::algebra::to_f64(&p.b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_two_constants_vanish() {
        let p = TransportParams::simple(2, (1, 3), (1, 1), 7);
        assert!(b_constant(&p).unwrap().is_zero());
        assert!(d_constant(&DelayParams::default_for(2, 5)).unwrap().is_zero());
    }

    #[test]
    fn derived_quantities() {
        assert_eq!(eta(4), 4);
        assert_eq!(eta(1), 1);
        assert_eq!(lattice_step(1), Some(2));
        assert_eq!(lattice_step(4), Some(1));
        assert_eq!(lattice_step(2), None);
        let d = DelayParams::default_for(1, 7);
        assert_eq!(d.omega, frac(7, 2));
        assert_eq!(d.q, 3);
    }

    #[test]
    fn selberg_examples() {
        let p = TransportParams::simple(2, (0, 1), (0, 1), 1);
        assert!(log_selberg(&p).unwrap().abs() < 1e-14);
        let p = TransportParams::simple(2, (0, 1), (0, 1), 2);
        assert!((log_selberg(&p).unwrap() - (1.0f64 / 6.0).ln()).abs() < 1e-12);
        let p = TransportParams::simple(1, (-1, 2), (0, 1), 1);
        assert!((log_selberg(&p).unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn delay_norm_example() {
        assert!(log_delay_norm_raw(2, 1, 3.0).unwrap().abs() < 1e-14);
        assert!(log_delay_norm_raw(2, 2, 1.0).is_err());
    }

    #[test]
    fn invalid_parameters() {
        assert!(TransportParams::new(3, int(0), int(0), 2).is_err());
        assert!(TransportParams::new(1, int(-1), int(0), 2).is_err());
        assert!(TransportParams::new(1, int(0), int(-2), 2).is_err());
        assert!(TransportParams::new(1, int(0), int(0), 0).is_err());
    }
}
