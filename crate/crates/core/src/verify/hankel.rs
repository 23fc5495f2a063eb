//! Exact joint cumulants at beta = 2 from the Andreief (Heine) determinant.
//!
//! E[prod f(T_j)] is a ratio of n x n Hankel determinants of one-dimensional
//! moments. With f = exp(xT + yT(1-T)) every entry is a bivariate series whose
//! coefficients are ratios of Beta functions, hence rational. This path shares
//! nothing with the recurrences.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::algebra::{factorial_q, int, Rational};
use crate::ensembles::TransportParams;
use crate::error::{Error, Result};

#[derive(Clone)]
struct Bi {
    lz: usize,
    kw: usize,
    c: Vec<Rational>,
}

impl Bi {
    fn zero(lz: usize, kw: usize) -> Self {
        Bi { lz, kw, c: vec![Rational::zero(); (lz + 1) * (kw + 1)] }
    }
    fn at(&self, a: usize, c: usize) -> &Rational {
        &self.c[a * (self.kw + 1) + c]
    }
    fn at_mut(&mut self, a: usize, c: usize) -> &mut Rational {
        &mut self.c[a * (self.kw + 1) + c]
    }
    fn mul(&self, o: &Bi) -> Bi {
        let mut out = Bi::zero(self.lz, self.kw);
        for a1 in 0..=self.lz {
            for c1 in 0..=self.kw {
                let x = self.at(a1, c1);
                if x.is_zero() {
                    continue;
                }
                for a2 in 0..=self.lz - a1 {
                    for c2 in 0..=self.kw - c1 {
                        let y = o.at(a2, c2);
                        if !y.is_zero() {
                            *out.at_mut(a1 + a2, c1 + c2) += x * y;
                        }
                    }
                }
            }
        }
        out
    }
    fn inverse(&self) -> Bi {
        let c0 = self.at(0, 0).clone();
        let mut out = Bi::zero(self.lz, self.kw);
        for a in 0..=self.lz {
            for c in 0..=self.kw {
                let mut acc = if a == 0 && c == 0 { Rational::one() } else { Rational::zero() };
                for i in 0..=a {
                    for j in 0..=c {
                        if i == 0 && j == 0 {
                            continue;
                        }
                        let x = self.at(i, j);
                        if !x.is_zero() {
                            acc -= x * out.at(a - i, c - j);
                        }
                    }
                }
                *out.at_mut(a, c) = acc / &c0;
            }
        }
        out
    }
    /// log(self / self(0,0)).
    fn log_normalised(&self) -> Bi {
        let c0 = self.at(0, 0).clone();
        let g: Vec<Rational> = self.c.iter().map(|x| x / &c0).collect();
        let g = Bi { lz: self.lz, kw: self.kw, c: g };
        let mut l = Bi::zero(self.lz, self.kw);
        for a in 0..=self.lz {
            for c in 0..=self.kw {
                if a == 0 && c == 0 {
                    continue;
                }
                // a > 0: differentiate in x; a = 0: differentiate in y.
                let (w, mut acc) = if a > 0 {
                    (a as i64, int(a as i64) * g.at(a, c))
                } else {
                    (c as i64, int(c as i64) * g.at(0, c))
                };
                for i in 0..=a {
                    for j in 0..=c {
                        if (i == a && j == c) || (i == 0 && j == 0) {
                            continue;
                        }
                        let wt = if a > 0 { i as i64 } else { j as i64 };
                        if wt == 0 {
                            continue;
                        }
                        let li = l.at(i, j);
                        if !li.is_zero() {
                            acc -= int(wt) * li * g.at(a - i, c - j);
                        }
                    }
                }
                *l.at_mut(a, c) = acc / int(w);
            }
        }
        l
    }
}

fn rising(x: &Rational, m: usize) -> Rational {
    (0..m).fold(Rational::one(), |acc, i| acc * (x + int(i as i64)))
}

/// Exact kappa_{l,k} for l <= lz, k <= kw at beta = 2 (keys with l + k >= 1).
pub fn hankel_joint_cumulants(p: &TransportParams, lz: usize, kw: usize) -> Result<BTreeMap<(usize, usize), Rational>> {
    if p.beta != 2 {
        return Err(Error::UnsupportedBeta(p.beta));
    }
    let n = p.n as usize;
    let x0 = &p.alpha + int(1);
    let y0 = &p.delta / int(2) + int(1);
    let s0 = &x0 + &y0;
    let mut fact_a = Vec::new();
    for a in 0..=lz {
        fact_a.push(factorial_q(a as u64));
    }
    let mut fact_c = Vec::new();
    for c in 0..=kw {
        fact_c.push(factorial_q(c as u64));
    }
    let entry = |m: usize| -> Bi {
        let mut e = Bi::zero(lz, kw);
        for a in 0..=lz {
            for c in 0..=kw {
                let v = rising(&x0, m + a + c) * rising(&y0, c) / rising(&s0, m + a + 2 * c);
                *e.at_mut(a, c) = v / (&fact_a[a] * &fact_c[c]);
            }
        }
        e
    };
    let cache: Vec<Bi> = (0..2 * n.max(1) - 1).map(entry).collect();
    let mut mat: Vec<Vec<Bi>> = (0..n).map(|i| (0..n).map(|j| cache[i + j].clone()).collect()).collect();
    let mut total = Bi::zero(lz, kw);
    for piv in 0..n {
        let pv = mat[piv][piv].clone();
        if pv.at(0, 0).is_zero() {
            return Err(Error::Pole("singular moment matrix".into()));
        }
        let inv = pv.inverse();
        for r in piv + 1..n {
            let f = mat[r][piv].mul(&inv);
            for c in piv + 1..n {
                let sub = f.mul(&mat[piv][c]);
                for (x, y) in mat[r][c].c.iter_mut().zip(sub.c.iter()) {
                    *x -= y;
                }
            }
        }
        let lg = pv.log_normalised();
        for (x, y) in total.c.iter_mut().zip(lg.c.iter()) {
            *x += y;
        }
    }
    let mut out = BTreeMap::new();
    for a in 0..=lz {
        for c in 0..=kw {
            if a + c > 0 {
                out.insert((a, c), total.at(a, c) * &fact_a[a] * &fact_c[c]);
            }
        }
    }
    Ok(out)
}
