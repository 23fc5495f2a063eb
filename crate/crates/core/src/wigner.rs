//! Cumulants of the Wigner delay time tau_W = (1/n) sum tau_j.
//!
//! Only K_1..K_q exist, q = floor(b - 2 - beta(n-1)). For beta in {1, 4} the
//! recurrence consults neighbouring dimensions n +- i(beta) at the same b.

use std::collections::HashMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{binomial_q, checked_div, format_rational, frac, int, pow, serde_rational_vec, Rational, TruncatedSeries};
use crate::ensembles::{d_constant_at, eta, floor_of, lattice_step, omega_of, DelayParams};
use crate::error::{Error, Result};
use crate::lattice::moments_from_reduced;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticePoint {
    pub dimension: i64,
    pub b: String,
    pub q: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelayCumulants {
    pub params: DelayParams,
    /// K_1..K_L; `values[0]` is K_1.
    #[serde(with = "serde_rational_vec")]
    pub values: Vec<Rational>,
    pub lattice_note: Vec<LatticePoint>,
}

impl DelayCumulants {
    pub fn k(&self, l: usize) -> &Rational {
        &self.values[l - 1]
    }
}

/// K_1..K_3 for dimension `n` and exponent parameter `omega` (general b).
fn initial_at(beta: u32, n: i64, omega: &Rational, upto: usize) -> Result<Vec<Rational>> {
    let hb = frac(beta as i64, 2);
    let bq = int(beta as i64);
    let nq = int(n);
    let w = omega;
    let mut out = Vec::new();
    if upto >= 1 {
        out.push(checked_div(&(&hb * &nq), w, "K_1 denominator")?);
    }
    if upto >= 2 {
        let num = &hb * &hb * &nq * (int(2) * w + &bq * &nq);
        let den = w * w * (int(2) * w + &bq) * (w - int(1));
        out.push(checked_div(&num, &den, "K_2 denominator")?);
    }
    if upto >= 3 {
        let num = pow(&hb, 3) * int(4) * &nq * (int(2) * w + &nq * &bq) * (w + &nq * &bq);
        let den = w * w * w * (int(2) * w + &bq) * (w + &bq) * (w - int(1)) * (w - int(2));
        out.push(checked_div(&num, &den, "K_3 denominator")?);
    }
    Ok(out)
}

pub fn wigner_initial(p: &DelayParams) -> Result<Vec<Rational>> {
    if p.q < 1 {
        return Err(Error::NonexistentCumulant { index: 1, q: p.q });
    }
    initial_at(p.beta, p.n as i64, &p.omega, (p.q as usize).min(3))
}

struct WignerLattice {
    beta: u32,
    b: Rational,
    step: Option<i64>,
    dims: HashMap<i64, Vec<Rational>>,
    visited: Vec<LatticePoint>,
}

impl WignerLattice {
    fn new(beta: u32, b: Rational) -> Self {
        WignerLattice { beta, step: lattice_step(beta), b, dims: HashMap::new(), visited: Vec::new() }
    }

    /// K_1..K_order at dimension `dim` with the stored b.
    fn cumulants(&mut self, dim: i64, order: usize) -> Result<Vec<Rational>> {
        if dim <= 0 {
            return Ok(vec![Rational::zero(); order]);
        }
        if let Some(v) = self.dims.get(&dim) {
            if v.len() >= order {
                return Ok(v[..order].to_vec());
            }
        }
        let omega = omega_of(self.beta, dim, &self.b);
        let q = floor_of(&omega);
        if (order as i64) > q {
            return Err(Error::LatticeOrderShortfall { dim, available: q, needed: order });
        }
        if !self.dims.contains_key(&dim) {
            self.visited.push(LatticePoint { dimension: dim, b: format_rational(&self.b), q });
        }
        let mut k = initial_at(self.beta, dim, &omega, order.min(3))?;
        let beta = self.beta as i64;
        let et = eta(self.beta);
        // d_n only enters from K_4 on; small dimensions can sit on its poles.
        let d = if order > 3 { d_constant_at(self.beta, &self.b, dim)? } else { Rational::zero() };
        for l in 3..order {
            let li = l as i64;
            let a_coef = int(et * li * (li - 1) * (li - 2) + beta * li * (2 * li - 1))
                - &omega * (&omega - int(4 - 2 * beta)) * int(li)
                - &omega * (&omega + int(2 - beta));
            let mut sum = Rational::zero();
            for i in 0..l {
                let ii = i as i64;
                let b_il = (li - ii) * (6 * et * (li - ii - 1) * ii + beta + 4 * beta * ii);
                sum += binomial_q(li, ii) * int(b_il) * &k[l - i - 1] * &k[i];
            }
            let mut rhs = Rational::zero();
            if !d.is_zero() {
                let m = l - 3;
                let s = self.step.expect("lattice step");
                let lo = self.cumulants(dim - s, m)?;
                let hi = self.cumulants(dim + s, m)?;
                let mut rho = vec![Rational::zero()];
                for j in 0..m {
                    rho.push(&lo[j] + &hi[j] - int(2) * &k[j]);
                }
                let phi = moments_from_reduced(&rho, m);
                rhs = int(12) * &d / int(beta) * int(li * (li - 1) * (li - 2)) * pow(&frac(beta, 2), 4) * &phi[m];
            }
            let val = rhs - sum - int(beta * li * (2 * li - 1)) * &k[l - 1];
            k.push(checked_div(&val, &a_coef, &format!("A({l}) vanishes at dimension {dim}"))?);
        }
        self.dims.insert(dim, k.clone());
        Ok(k)
    }
}

fn check_order(p: &DelayParams, order: usize) -> Result<()> {
    if order == 0 {
        return Err(Error::InvalidOrder("order must be positive".into()));
    }
    if order as i64 > p.q {
        return Err(Error::NonexistentCumulant { index: order, q: p.q });
    }
    Ok(())
}

/// K_1..K_order via the general recurrence (any order 1..=q).
pub fn wigner_prefix(p: &DelayParams, order: usize) -> Result<DelayCumulants> {
    check_order(p, order)?;
    let mut lat = WignerLattice::new(p.beta, p.b.clone());
    let values = lat.cumulants(p.n as i64, order)?;
    Ok(DelayCumulants { params: p.clone(), values, lattice_note: lat.visited })
}

/// K_1..K_order with the same b held at every consulted dimension.
///
/// At beta = 2 with the default b the simplified recurrence
/// (l+1)(n^2-l^2) K_{l+1} = 2l(2l-1) K_l + 2 sum (3i+1) C(l,i)(l-i)^2 K_{i+1} K_{l-i}
/// is used.
pub fn wigner_cumulants(p: &DelayParams, order: usize) -> Result<DelayCumulants> {
    if order < 3 {
        return Err(Error::InvalidOrder(format!("need at least 3 cumulants, got {order}")));
    }
    check_order(p, order)?;
    if p.beta == 2 && p.b == crate::ensembles::default_b(2, p.n) {
        let values = beta_two_cumulants(p.n, order)?;
        let note = vec![LatticePoint { dimension: p.n as i64, b: format_rational(&p.b), q: p.q }];
        return Ok(DelayCumulants { params: p.clone(), values, lattice_note: note });
    }
    wigner_prefix(p, order)
}

/// beta = 2, default b: the simplified recurrence.
pub fn beta_two_cumulants(n: u64, order: usize) -> Result<Vec<Rational>> {
    let p = DelayParams::default_for(2, n);
    check_order(&p, order)?;
    let ni = n as i64;
    let mut k = initial_at(2, ni, &p.omega, order.min(3))?;
    for l in 3..order {
        let li = l as i64;
        let mut acc = int(2 * li * (2 * li - 1)) * &k[l - 1];
        for i in 0..l {
            let ii = i as i64;
            acc += int(2 * (3 * ii + 1) * (li - ii) * (li - ii)) * binomial_q(li, ii) * &k[i] * &k[l - i - 1];
        }
        let den = int((li + 1) * (ni * ni - li * li));
        k.push(checked_div(&acc, &den, &format!("n^2 - {l}^2 vanishes"))?);
    }
    Ok(k)
}

/// Reduced cumulants rho_1..rho_order at the target dimension (beta in {1, 4}).
pub fn delay_reduced(p: &DelayParams, order: usize) -> Result<Vec<Rational>> {
    let s = lattice_step(p.beta).ok_or(Error::UnsupportedBeta(p.beta))?;
    let mut lat = WignerLattice::new(p.beta, p.b.clone());
    let n = p.n as i64;
    let lo = lat.cumulants(n - s, order)?;
    let mid = lat.cumulants(n, order)?;
    let hi = lat.cumulants(n + s, order)?;
    Ok((0..order).map(|j| &lo[j] + &hi[j] - int(2) * &mid[j]).collect())
}

pub fn wigner_fourth_closed(beta: u32, n: u64) -> Result<Rational> {
    let p = DelayParams::new(beta, n, None)?;
    check_order(&p, 4)?;
    let n = n as i64;
    let (num, den) = match beta {
        1 => (96 * (53 * n * n - 68 * n - 156), (n - 4) * (n + 1) * (n + 1) * (n - 2) * (n - 2) * (n + 3) * (n + 2) * (n - 6)),
        2 => (12 * (53 * n * n - 77), (n * n - 1) * (n * n - 1) * (n * n - 4) * (n * n - 9)),
        4 => (
            12 * (53 * n * n + 34 * n - 39),
            (n + 2) * (n + 1) * (n + 1) * (n - 1) * (2 * n - 3) * (2 * n - 1) * (2 * n - 1) * (n + 3),
        ),
        b => return Err(Error::UnsupportedBeta(b)),
    };
    checked_div(&int(num), &int(den), "fourth delay cumulant denominator")
}

/// xi(z) = sum_{l} K_l/l! (2z/beta)^l as a series of order K.len().
pub fn delay_series(beta: u32, k: &[Rational]) -> TruncatedSeries {
    let scale = frac(2, beta as i64);
    let mut c = vec![Rational::zero()];
    let mut f = Rational::one();
    for (i, kl) in k.iter().enumerate() {
        let l = i as i64 + 1;
        f /= int(l);
        c.push(kl * &f * pow(&scale, l as i32));
    }
    TruncatedSeries::new(c)
}

/// Residual of the Chazy-class first integral for beta = 2 built from explicit K values.
pub fn chazy_residual_from(n: u64, b: &Rational, k: &[Rational], order: usize) -> Result<TruncatedSeries> {
    if k.len() < order + 1 {
        return Err(Error::InsufficientOrder(format!("need K_1..K_{} for order {order}", order + 1)));
    }
    let xi = delay_series(2, &k[..order + 1]);
    // g(z) = z xi'(z); H(-z) = g(z) so h_m = (-1)^m g_m.
    let g = xi.differentiate()?.shift(1);
    let h = TruncatedSeries::new(
        g.coeffs().iter().enumerate().map(|(m, c)| if m % 2 == 0 { c.clone() } else { -c }).collect(),
    );
    let h1 = h.differentiate()?;
    let h2 = h1.differentiate()?;
    let nq = int(n as i64);
    let c = b - int(2) * &nq;
    let uh2 = h2.shift(1);
    let t1 = &uh2 * &uh2;
    let t2 = (&h * &(&(&h1 * &h1) - &h1)).scale(&int(-4));
    let inner = &(&(&h1 * &h1).shift(1).scale(&int(4)) - &h1.shift(1).scale(&int(4))) - &h1.scale(&(&c * &c));
    let lin = &inner - &TruncatedSeries::constant(int(2) * &nq * &c, inner.order());
    let t3 = &lin * &h1;
    let total = &(&(&t1 + &t2) + &t3) - &TruncatedSeries::constant(&nq * &nq, order);
    Ok(total.truncate(order))
}

pub fn chazy_residual(n: u64, series_order: usize) -> Result<TruncatedSeries> {
    let p = DelayParams::default_for(2, n);
    if series_order as i64 > p.q - 1 {
        return Err(Error::InsufficientOrder(format!("order {series_order} exceeds q - 1 = {}", p.q - 1)));
    }
    let k = wigner_prefix(&p, series_order + 1)?;
    chazy_residual_from(n, &p.b, &k.values, series_order)
}
