//! Exact residuals of the master differential equations, built from cumulant data.
//!
//! Each check comes in two halves: a `*_data` function that gathers cumulants from
//! the recurrences and a `*_check` function that takes the data explicitly, so a
//! caller can perturb an entry and confirm the residual notices.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{factorial_q, format_rational, frac, int, Rational, TruncatedSeries};
use crate::conductance::{CumulantProvider, RecurrenceProvider};
use crate::ensembles::{b_constant, d_constant, eta, lattice_step, DelayParams, TransportParams};
use crate::error::{Error, Result};
use crate::jointcsn::JointEngine;
use crate::wigner::{delay_reduced, delay_series, wigner_prefix};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub equation: String,
    pub params: String,
    pub order_checked: usize,
    pub max_abs_coefficient: String,
    pub first_nonzero_index: Option<usize>,
    /// (z, w) position of the first nonzero coefficient for the bivariate check.
    pub first_nonzero_pair: Option<(usize, usize)>,
    pub pass: bool,
}

impl ResidualReport {
    fn from_series(equation: &str, params: String, s: &TruncatedSeries) -> Self {
        let first = s.first_nonzero();
        ResidualReport {
            equation: equation.into(),
            params,
            order_checked: s.order(),
            max_abs_coefficient: format_rational(&s.max_abs()),
            first_nonzero_index: first,
            first_nonzero_pair: None,
            pass: first.is_none(),
        }
    }
}

fn describe(p: &TransportParams) -> String {
    format!("beta={} alpha={} delta={} n={}", p.beta, format_rational(&p.alpha), format_rational(&p.delta), p.n)
}

/// sum_l sign^l c_l z^l / l! for l >= 1, as a series of order c.len().
fn cumulant_series(c: &[Rational], alternating: bool) -> TruncatedSeries {
    let mut out = vec![Rational::zero()];
    for (i, v) in c.iter().enumerate() {
        let l = i + 1;
        let mut t = v / factorial_q(l as u64);
        if alternating && l % 2 == 1 {
            t = -t;
        }
        out.push(t);
    }
    TruncatedSeries::new(out)
}

/// sum_j poly[j] z^j * s; terms with a zero coefficient are skipped, so a
/// polynomial without constant term raises the known order.
fn poly_times(poly: &[Rational], s: &TruncatedSeries) -> TruncatedSeries {
    let mut acc: Option<TruncatedSeries> = None;
    for (j, c) in poly.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let t = s.shift(j).scale(c);
        acc = Some(match acc {
            None => t,
            Some(a) => &a + &t,
        });
    }
    acc.unwrap_or_else(|| TruncatedSeries::zero(s.order() + poly.len()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConductanceOdeData {
    /// kappa_1..kappa_N at n.
    pub kappa: Vec<Rational>,
    /// r_1..r_M (empty when b_n = 0).
    pub reduced: Vec<Rational>,
    pub b: Rational,
}

pub fn conductance_ode_data(p: &TransportParams, order: usize) -> Result<ConductanceOdeData> {
    let mut prov = RecurrenceProvider::new(p, order + 1);
    let n = p.n as i64;
    let kappa = prov.cumulants(n, order + 1)?;
    let b = b_constant(p)?;
    let m = order.saturating_sub(3);
    let mut reduced = Vec::new();
    if let Some(s) = lattice_step(p.beta) {
        if m > 0 {
            let lo = if n - s > 0 { prov.cumulants(n - s, m)? } else { vec![Rational::zero(); m] };
            let hi = prov.cumulants(n + s, m)?;
            reduced = (0..m).map(|j| &lo[j] + &hi[j] - int(2) * &kappa[j]).collect();
        }
    }
    Ok(ConductanceOdeData { kappa, reduced, b })
}

/// Residual of the conductance ODE for sigma(z) = sum (-1)^l kappa_l z^l / l!.
pub fn conductance_ode_check(p: &TransportParams, d: &ConductanceOdeData, order: usize) -> Result<ResidualReport> {
    if d.kappa.len() < order + 1 || (!d.b.is_zero() && order >= 3 && d.reduced.len() < order - 3) {
        return Err(Error::InsufficientOrder(format!("data too short for order {order}")));
    }
    let s = cumulant_series(&d.kappa[..order + 1], true);
    let beta = int(p.beta as i64);
    let et = int(eta(p.beta));
    let nq = int(p.n as i64);
    let a = &p.alpha;
    let h = &p.delta / int(2);
    let c_plus = &beta * &nq + a + &h;
    let c_mid = &beta * &nq + a - &h;
    let two_b = int(2) - &beta;
    let s1 = s.differentiate()?;
    let s2 = s1.differentiate()?;
    let s3 = s2.differentiate()?;
    let s4 = s3.differentiate()?;
    let p0 = [
        -(&nq / int(2)) * (&beta * &nq + int(2) * a + &two_b) * &c_plus,
        (&nq / int(2)) * (&beta * &nq + int(2) * a + &two_b),
    ];
    let p1 = [-(&c_plus * (&c_plus + &two_b)), c_mid.clone()];
    let p2 = [
        Rational::zero(),
        -((&c_plus + int(6) - int(3) * &beta) * (&c_plus + &two_b)) + &beta,
        int(2) * &c_mid,
        -Rational::one(),
    ];
    let mut lhs = s4.shift(3).scale(&et);
    lhs = &lhs + &(&s2 * &s2).shift(3).scale(&(int(6) * &et));
    lhs = &lhs + &s3.shift(2).scale(&(int(2) * &beta));
    lhs = &lhs + &(&s1 * &s1).shift(1).scale(&beta);
    lhs = &lhs + &(&s1 * &s2).shift(2).scale(&(int(4) * &beta));
    lhs = &lhs + &poly_times(&p2, &s2);
    lhs = &lhs + &poly_times(&p1, &s1);
    let big = lhs.order() + 4;
    lhs = &lhs + &poly_times(&p0, &TruncatedSeries::constant(Rational::one(), big));
    let mut res = lhs;
    if !d.b.is_zero() {
        let m = order.saturating_sub(3);
        let r = cumulant_series(&d.reduced[..m], true);
        let rhs = r.exponential()?.shift(3).scale(&(int(12) * &d.b / &beta));
        res = &res - &rhs;
    }
    let res = res.truncate(order);
    Ok(ResidualReport::from_series("conductance-ode", describe(p), &res))
}

pub fn ode_residual_conductance(p: &TransportParams, order: usize) -> Result<ResidualReport> {
    let d = conductance_ode_data(p, order)?;
    conductance_ode_check(p, &d, order)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointPdeData {
    /// kappa_{l,k} for l <= order_z + 4, k <= order_w + 1.
    pub kappa: BTreeMap<(usize, usize), Rational>,
    /// r_{l,k} for l <= order_z, k < order_w.
    pub reduced: BTreeMap<(usize, usize), Rational>,
    pub b: Rational,
}

pub fn joint_pde_data(p: &TransportParams, oz: usize, ow: usize) -> Result<JointPdeData> {
    let mut eng = JointEngine::new(p, oz + 4 + 2 * (ow + 1) + 2);
    let mut kappa = BTreeMap::new();
    'fill: for k in 0..=ow + 1 {
        for l in 0..=oz + 4 {
            if l + k > 0 {
                match eng.get(l, k) {
                    Ok(v) => {
                        kappa.insert((l, k), v);
                    }
                    // beta = 2 has no lattice term, so the determinant expansion can stand in.
                    Err(Error::Pole(_)) if p.beta == 2 => {
                        kappa = crate::verify::hankel_joint_cumulants(p, oz + 4, ow + 1)?;
                        kappa.remove(&(0, 0));
                        break 'fill;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    let b = b_constant(p)?;
    let mut reduced = BTreeMap::new();
    if !b.is_zero() {
        for k in 0..ow {
            for l in 0..=oz {
                if l + k > 0 {
                    reduced.insert((l, k), eng.reduced(l, k)?);
                }
            }
        }
    }
    Ok(JointPdeData { kappa, reduced, b })
}

/// Residual of the joint PDE, coefficient by coefficient in z^a w^c for a <= oz, c <= ow.
pub fn joint_pde_check(p: &TransportParams, d: &JointPdeData, oz: usize, ow: usize) -> Result<ResidualReport> {
    let fa: Vec<Rational> = (0..=oz + 6).map(|i| factorial_q(i as u64)).collect();
    let fc: Vec<Rational> = (0..=ow + 2).map(|i| factorial_q(i as u64)).collect();
    let coef = |t: &BTreeMap<(usize, usize), Rational>, l: usize, k: usize| -> Result<Rational> {
        if l + k == 0 {
            return Ok(Rational::zero());
        }
        let v = t.get(&(l, k)).ok_or_else(|| Error::InsufficientOrder(format!("missing entry ({l}, {k})")))?;
        let v = v / (&fa[l] * &fc[k]);
        Ok(if (l + k) % 2 == 1 { -v } else { v })
    };
    let s = |l: usize, k: usize| coef(&d.kappa, l, k);
    let szz = |a: usize, c: usize| -> Result<Rational> { Ok(int(((a + 1) * (a + 2)) as i64) * s(a + 2, c)?) };
    let beta = int(p.beta as i64);
    let et = int(eta(p.beta));
    let a_shot = p.shot_coefficient();
    // exp of the reduced series, bivariate, orders (oz, ow - 1).
    let mut e: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
    if !d.b.is_zero() && ow >= 1 {
        let r = |l: usize, k: usize| coef(&d.reduced, l, k);
        e.insert((0, 0), Rational::one());
        for c in 0..ow {
            if c > 0 {
                let mut acc = Rational::zero();
                for j in 0..c {
                    acc += int(j as i64 + 1) * r(0, j + 1)? * &e[&(0, c - 1 - j)];
                }
                e.insert((0, c), acc / int(c as i64));
            }
            for a in 1..=oz {
                let mut acc = Rational::zero();
                for i in 0..a {
                    for j in 0..=c {
                        acc += int(i as i64 + 1) * r(i + 1, j)? * &e[&(a - 1 - i, c - j)];
                    }
                }
                e.insert((a, c), acc / int(a as i64));
            }
        }
    }
    let mut first = None;
    let mut max = Rational::zero();
    for c in 0..=ow {
        for a in 0..=oz {
            let mut v = Rational::zero();
            if c >= 1 {
                let cc = c - 1;
                v += &et * int(((a + 1) * (a + 2) * (a + 3) * (a + 4)) as i64) * s(a + 4, cc)?;
                let mut sq = Rational::zero();
                for i in 0..=a {
                    for j in 0..=cc {
                        sq += szz(i, j)? * szz(a - i, cc - j)?;
                    }
                }
                v += int(6) * &et * sq;
                v -= szz(a, cc)?;
                if !d.b.is_zero() {
                    v -= int(12) * &d.b / &beta * &e[&(a, cc)];
                }
            }
            let up = s(a, c + 1)?;
            v += int((2 * a * (c + 1) + 3 * c * (c + 1) + 2 * (c + 1)) as i64) * up;
            v += int(2) * &a_shot * szz(a, c)?;
            if !v.is_zero() {
                if first.is_none() {
                    first = Some((a, c));
                }
                if v.abs() > max {
                    max = v.abs();
                }
            }
        }
    }
    Ok(ResidualReport {
        equation: "joint-pde".into(),
        params: describe(p),
        order_checked: oz + ow,
        max_abs_coefficient: format_rational(&max),
        first_nonzero_index: first.map(|(a, c)| a + c),
        first_nonzero_pair: first,
        pass: first.is_none(),
    })
}

pub fn pde_residual_joint(p: &TransportParams, oz: usize, ow: usize) -> Result<ResidualReport> {
    let d = joint_pde_data(p, oz, ow)?;
    joint_pde_check(p, &d, oz, ow)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WignerOdeData {
    /// K_1..K_N at n.
    pub k: Vec<Rational>,
    /// rho_1..rho_M at n (empty when d_n = 0).
    pub reduced: Vec<Rational>,
    pub d: Rational,
}

pub fn wigner_ode_data(p: &DelayParams, order: usize) -> Result<WignerOdeData> {
    let k = wigner_prefix(p, order + 1)?.values;
    let d = d_constant(p)?;
    let m = order.saturating_sub(3);
    let reduced = if !d.is_zero() && m > 0 { delay_reduced(p, m)? } else { Vec::new() };
    Ok(WignerOdeData { k, reduced, d })
}

pub fn wigner_ode_check(p: &DelayParams, d: &WignerOdeData, order: usize) -> Result<ResidualReport> {
    if d.k.len() < order + 1 || (!d.d.is_zero() && order >= 3 && d.reduced.len() < order - 3) {
        return Err(Error::InsufficientOrder(format!("data too short for order {order}")));
    }
    let xi = delay_series(p.beta, &d.k[..order + 1]);
    let beta = int(p.beta as i64);
    let et = int(eta(p.beta));
    let nq = int(p.n as i64);
    let u = &p.b - &beta * &nq;
    let x1 = xi.differentiate()?;
    let x2 = x1.differentiate()?;
    let x3 = x2.differentiate()?;
    let x4 = x3.differentiate()?;
    let p1 = [-((&u - int(2) + &beta) * &u), int(2)];
    let p2 = [Rational::zero(), &beta - (&u - int(6) + int(3) * &beta) * (&u - int(2) + &beta), int(4)];
    let mut lhs = x4.shift(3).scale(&et);
    lhs = &lhs + &x3.shift(2).scale(&(int(2) * &beta));
    lhs = &lhs + &(&x1 * &x1).shift(1).scale(&beta);
    lhs = &lhs + &(&x2 * &x1).shift(2).scale(&(int(4) * &beta));
    lhs = &lhs + &(&x2 * &x2).shift(3).scale(&(int(6) * &et));
    lhs = &lhs + &poly_times(&p2, &x2);
    lhs = &lhs + &poly_times(&p1, &x1);
    let big = lhs.order();
    lhs = &lhs + &TruncatedSeries::constant(&nq * &u, big);
    let mut res = lhs;
    if !d.d.is_zero() {
        let m = order.saturating_sub(3);
        let r = delay_series(p.beta, &d.reduced[..m]);
        let rhs = r.exponential()?.shift(3).scale(&(int(12) * &d.d / &beta));
        res = &res - &rhs;
    }
    let res = res.truncate(order);
    let params = format!("beta={} n={} b={}", p.beta, p.n, format_rational(&p.b));
    Ok(ResidualReport::from_series("wigner-ode", params, &res))
}

pub fn ode_residual_wigner(p: &DelayParams, order: usize) -> Result<ResidualReport> {
    let d = wigner_ode_data(p, order)?;
    wigner_ode_check(p, &d, order)
}

/// Report for the Chazy-class first integral.
pub fn chazy_report(n: u64, order: usize) -> Result<ResidualReport> {
    let s = crate::wigner::chazy_residual(n, order)?;
    Ok(ResidualReport::from_series("chazy", format!("beta=2 n={n}"), &s))
}

/// Small rational used by fault-injection tests.
pub fn perturbation() -> Rational {
    frac(1, 1000)
}
