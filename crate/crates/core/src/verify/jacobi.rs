//! Exact Jacobi-polynomial identities behind the joint limit solution.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{binomial_q, factorial_q, format_rational, frac, int, pow, Rational};

/// C(x, k) for rational x and integer k (zero for k < 0).
pub fn generalized_binomial(x: &Rational, k: i64) -> Rational {
    if k < 0 {
        return Rational::zero();
    }
    let mut acc = Rational::one();
    for i in 0..k {
        acc = acc * (x - int(i)) / int(i + 1);
    }
    acc
}

/// P_n^{(a,b)}(x) by the finite binomial sum; P_{-1} = 0.
pub fn jacobi_p(n: i64, a: &Rational, b: &Rational, x: &Rational) -> Rational {
    if n < 0 {
        return Rational::zero();
    }
    let lo = (x - int(1)) / int(2);
    let hi = (x + int(1)) / int(2);
    let nq = int(n);
    (0..=n)
        .map(|j| {
            generalized_binomial(&(&nq + a), j)
                * generalized_binomial(&(&nq + b), n - j)
                * pow(&lo, (n - j) as i32)
                * pow(&hi, j as i32)
        })
        .fold(Rational::zero(), |acc, t| acc + t)
}

/// sum_j C(2j+2l, j+l) C(k, j) (-2)^{-j}.
pub fn jacobi_sum(l: i64, k: i64) -> Rational {
    (0..=k)
        .map(|j| binomial_q(2 * j + 2 * l, j + l) * binomial_q(k, j) * pow(&int(-2), -(j as i32)))
        .fold(Rational::zero(), |acc, t| acc + t)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JacobiFailure {
    pub l: usize,
    pub k: usize,
    pub which: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JacobiReport {
    pub checked: usize,
    pub pass: bool,
    pub first_failure: Option<JacobiFailure>,
}

pub fn jacobi_identity_check(lmax: usize, kmax: usize) -> JacobiReport {
    let x = int(-3);
    let h = frac(1, 2);
    let mut checked = 0;
    for l in 0..=lmax {
        for k in 0..=kmax {
            let (li, ki) = (l as i64, k as i64);
            let lhs = jacobi_sum(li, ki);
            let pre = factorial_q(2 * l as u64) * factorial_q(k as u64) / (factorial_q(l as u64) * factorial_q((k + l) as u64));
            let rhs = pre * jacobi_p(ki, &int(li), &(int(-ki) - &h), &x);
            checked += 1;
            if lhs != rhs {
                return JacobiReport {
                    checked,
                    pass: false,
                    first_failure: Some(JacobiFailure {
                        l,
                        k,
                        which: "sum".into(),
                        lhs: format_rational(&lhs),
                        rhs: format_rational(&rhs),
                    }),
                };
            }
            let four = int(4 * li + 3 * ki + 2) * int(ki + 1) * jacobi_p(ki + 1, &int(li), &(int(-ki) - int(3) * &h), &x)
                + int(2 * li + 1) * int(ki + li + 1) * jacobi_p(ki - 1, &int(li + 1), &(int(-ki) + &h), &x)
                + int(2 * li + ki) * int(2 * li + 1) * jacobi_p(ki, &int(li + 1), &(int(-ki) - &h), &x)
                - int(3 * (ki + li) * (ki + li + 1)) * jacobi_p(ki - 1, &int(li), &(int(-ki) + &h), &x);
            checked += 1;
            if !four.is_zero() {
                return JacobiReport {
                    checked,
                    pass: false,
                    first_failure: Some(JacobiFailure {
                        l,
                        k,
                        which: "four-term".into(),
                        lhs: format_rational(&four),
                        rhs: "0".into(),
                    }),
                };
            }
        }
    }
    JacobiReport { checked, pass: true, first_failure: None }
}
