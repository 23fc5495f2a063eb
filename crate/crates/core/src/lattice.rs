//! Shared engine for the conductance and joint conductance/shot-noise recurrences.
//!
//! Cumulants are stored per dimension as columns: `cols[k][l]` holds kappa_{l,k},
//! with `cols[0][0] = 0`. Entries are produced lazily in increasing order, so a
//! dimension that is asked for lower-order data by its neighbours while it is
//! still being extended always already has it.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::algebra::{binomial_q, checked_div, frac, int, Rational};
use crate::ensembles::{b_constant_at, eta, lattice_step};
use crate::error::{Error, Result};

struct Dim {
    /// b_n, filled in the first time a recurrence step needs it.
    b: Option<Rational>,
    cols: Vec<Vec<Rational>>,
    mu: HashMap<(usize, usize), Rational>,
}

pub(crate) struct TransportLattice {
    pub beta: u32,
    pub alpha: Rational,
    pub delta: Rational,
    pub center: i64,
    step: Option<i64>,
    radius_bound: i64,
    max_shift: i64,
    dims: HashMap<i64, Dim>,
}

/// Radius bound for a request whose column-0 row must reach `order`.
pub(crate) fn radius_for(order: usize) -> i64 {
    let l = order as i64;
    if l <= 3 {
        1
    } else {
        (l - 3 + 2) / 3 + 1
    }
}

/// mu_l from reduced cumulants r_1..r_L (index 0 unused), mu_0 = 1.
pub fn moments_from_reduced(r: &[Rational], order: usize) -> Vec<Rational> {
    let mut mu = vec![Rational::one()];
    for l in 1..=order {
        let mut acc = Rational::zero();
        for j in 0..l {
            acc += binomial_q(l as i64 - 1, j as i64) * &r[l - j] * &mu[j];
        }
        mu.push(acc);
    }
    mu
}

/// kappa_1..kappa_3 in closed form. At n = 1 the factors that would give 0/0 at
/// special (alpha, delta) are identical and cancel.
pub(crate) fn initial_cumulants(beta: u32, alpha: &Rational, delta: &Rational, n: i64) -> Result<[Rational; 3]> {
    let b = int(beta as i64);
    let nq = int(n);
    let h = delta / int(2);
    let s = alpha + &h;
    let two = int(2);
    let m1 = &b * int(n - 1);
    let k1 = checked_div(
        &(&nq * (alpha + int(1) + &m1 / &two)),
        &(&s + &two + &m1),
        "kappa_1 denominator",
    )?;
    let ratio2 = if n == 1 {
        Rational::one()
    } else {
        checked_div(
            &(delta + &two * alpha + int(4) + &b * int(n - 2)),
            &(&two * alpha + delta + int(4) + &b * int(2 * n - 3)),
            "kappa_2 denominator",
        )?
    };
    let d2 = &s + &two + &m1;
    let k2 = checked_div(
        &(&nq * (&two * alpha + &two + &m1) * (delta + &two + &m1)),
        &(int(4) * &d2 * &d2 * (&s + int(3) + &m1)),
        "kappa_2 denominator",
    )? * ratio2;
    // delta/2 - alpha + 2 beta kappa_1 - beta n = (delta/2 - alpha)(s + 2 - beta)/(s + 2 + beta(n-1)).
    let ratio3 = if n == 1 {
        Rational::one()
    } else {
        checked_div(&(&s + &two - &b), &(&s + &two + &b * int(n - 2)), "kappa_3 denominator")?
    };
    let k3 = checked_div(
        &(&two * &k2 * (&h - alpha) * ratio3),
        &((&s + &two + &m1) * (&s + int(4) + &m1)),
        "kappa_3 denominator",
    )?;
    Ok([k1, k2, k3])
}

impl TransportLattice {
    pub fn new(beta: u32, alpha: Rational, delta: Rational, center: u64, radius_bound: i64) -> Self {
        TransportLattice {
            beta,
            alpha,
            delta,
            center: center as i64,
            step: lattice_step(beta),
            radius_bound,
            max_shift: 0,
            dims: HashMap::new(),
        }
    }

    pub fn max_shift(&self) -> i64 {
        self.max_shift
    }

    fn touch(&mut self, dim: i64) -> Result<()> {
        if self.dims.contains_key(&dim) {
            return Ok(());
        }
        if let Some(s) = self.step {
            let m = (dim - self.center).abs() / s;
            if m > self.radius_bound {
                return Err(Error::LatticeRadius { shift: m, bound: self.radius_bound });
            }
            self.max_shift = self.max_shift.max(m);
        }
        self.dims.insert(dim, Dim { b: None, cols: vec![vec![Rational::zero()]], mu: HashMap::new() });
        Ok(())
    }

    fn b_at(&mut self, dim: i64) -> Result<Rational> {
        if let Some(b) = &self.dims[&dim].b {
            return Ok(b.clone());
        }
        let b = b_constant_at(self.beta, &self.alpha, &self.delta, dim)?;
        self.dims.get_mut(&dim).expect("dimension touched").b = Some(b.clone());
        Ok(b)
    }

    /// kappa_{l,k} at dimension `dim`; dimension zero is identically zero.
    pub fn get(&mut self, dim: i64, l: usize, k: usize) -> Result<Rational> {
        if dim <= 0 {
            return Ok(Rational::zero());
        }
        self.ensure(dim, k, l)?;
        Ok(self.dims[&dim].cols[k][l].clone())
    }

    fn val(&self, dim: i64, l: usize, k: usize) -> Rational {
        if dim <= 0 {
            return Rational::zero();
        }
        self.dims[&dim].cols[k][l].clone()
    }

    fn ensure(&mut self, dim: i64, col: usize, l: usize) -> Result<()> {
        if dim <= 0 {
            return Ok(());
        }
        self.touch(dim)?;
        loop {
            let d = self.dims.get_mut(&dim).expect("dimension present");
            while d.cols.len() <= col {
                d.cols.push(Vec::new());
            }
            let next = d.cols[col].len();
            if next > l {
                return Ok(());
            }
            let v = if col == 0 { self.next_row(dim, next)? } else { self.next_joint(dim, next, col)? };
            self.dims.get_mut(&dim).expect("dimension present").cols[col].push(v);
        }
    }

    fn a_shot(&self, dim: i64) -> Rational {
        &self.alpha + &self.delta / int(2) + int(dim * self.beta as i64 + 2 - self.beta as i64)
    }

    fn ensure_neighbours(&mut self, dim: i64, col: usize, l: usize) -> Result<()> {
        if let Some(s) = self.step {
            for c in 0..=col {
                self.ensure(dim - s, c, l)?;
                self.ensure(dim + s, c, l)?;
            }
        }
        Ok(())
    }

    /// kappa_{j,0} for j >= 1.
    fn next_row(&mut self, dim: i64, j: usize) -> Result<Rational> {
        if j <= 3 {
            let init = initial_cumulants(self.beta, &self.alpha, &self.delta, dim)?;
            return Ok(init[j - 1].clone());
        }
        let l = j - 1;
        let li = l as i64;
        let beta = self.beta as i64;
        let et = eta(self.beta);
        let chi = if self.beta == 2 { 2 } else { 1 };
        let s = &self.alpha + &self.delta / int(2) + int(beta * dim);
        let a_coef = int(et * li * (li - 1) * (li - 2) + beta * li * (2 * li - 1))
            - int((6 - 3 * beta) * li) * (&s + int(2 - beta))
            - &s * (&s + int(2 - beta)) * int(li + 1);
        let mut sum = Rational::zero();
        {
            let col = &self.dims[&dim].cols[0];
            for i in 0..l {
                let ii = i as i64;
                let b_il = (2 - chi) * (li - ii) * ((li - ii) * (6 * ii - 2) + 3)
                    + (chi - 1) * (li - ii) * (li - ii) * (6 * ii + 2);
                if b_il != 0 {
                    sum += binomial_q(li, ii) * &col[i + 1] * &col[l - i] * int(b_il);
                }
            }
        }
        let bn = self.b_at(dim)?;
        let mut rhs = Rational::zero();
        if !bn.is_zero() {
            let m = l - 3;
            self.ensure_neighbours(dim, 0, m)?;
            let mu = self.mu(dim, m, 0);
            rhs = int(12) * &bn / int(beta) * int(li * (li - 1) * (li - 2)) * mu;
        }
        let col = &self.dims[&dim].cols[0];
        let mid = &self.alpha - &self.delta / int(2) + int(beta * dim);
        let val = rhs - int(et) * sum
            + int(li * (2 * li - 1)) * mid * &col[l]
            + int(li * (li - 1) * (li - 2)) * &col[l - 1];
        checked_div(&val, &a_coef, &format!("A({l}) vanishes at dimension {dim}"))
    }

    /// kappa_{j,col} for col >= 1, solved from the recurrence at (l, k) = (j, col - 1).
    fn next_joint(&mut self, dim: i64, j: usize, col: usize) -> Result<Rational> {
        let k = col - 1;
        let a = self.a_shot(dim);
        if k == 0 {
            self.ensure(dim, 0, j + 2)?;
            let v = self.val(dim, j + 2, 0);
            return Ok(a * v * frac(1, j as i64 + 1));
        }
        self.ensure(dim, k, j + 2)?;
        self.ensure(dim, k - 1, j + 4)?;
        let et = int(eta(self.beta));
        let kq = int(k as i64);
        let term1 = &kq * (&et * self.val(dim, j + 4, k - 1) - self.val(dim, j + 2, k - 1));
        let term2 = int(-2) * &a * self.val(dim, j + 2, k);
        let mut sum = Rational::zero();
        for i in 0..k {
            let ci = binomial_q(k as i64 - 1, i as i64);
            let mut inner = Rational::zero();
            for jj in 0..=j {
                inner += binomial_q(j as i64, jj as i64) * self.val(dim, jj + 2, i) * self.val(dim, j - jj + 2, k - i - 1);
            }
            sum += ci * inner;
        }
        sum *= int(6) * &et * &kq;
        let bn = self.b_at(dim)?;
        let mut rhs = Rational::zero();
        if !bn.is_zero() {
            self.ensure_neighbours(dim, k - 1, j)?;
            let mu = self.mu(dim, j, k - 1);
            rhs = int(12) * bn / int(self.beta as i64) * &kq * mu;
        }
        Ok((rhs - term1 - term2 - sum) / int(2 * j as i64 + 3 * k as i64 + 2))
    }

    fn reduced(&self, dim: i64, l: usize, k: usize) -> Rational {
        let s = self.step.expect("reduced cumulants need a lattice");
        self.val(dim - s, l, k) + self.val(dim + s, l, k) - int(2) * self.val(dim, l, k)
    }

    /// Joint reduced moment mu_{l,k}; neighbours must already hold the needed entries.
    fn mu(&mut self, dim: i64, l: usize, k: usize) -> Rational {
        if let Some(v) = self.dims[&dim].mu.get(&(l, k)) {
            return v.clone();
        }
        let v = if k == 0 {
            if l == 0 {
                Rational::one()
            } else {
                let mut acc = Rational::zero();
                for j in 0..l {
                    let r = self.reduced(dim, l - j, 0);
                    if !r.is_zero() {
                        acc += binomial_q(l as i64 - 1, j as i64) * r * self.mu(dim, j, 0);
                    }
                }
                acc
            }
        } else {
            let mut acc = Rational::zero();
            for i in 0..k {
                let ci = binomial_q(k as i64 - 1, i as i64);
                for j in 0..=l {
                    let r = self.reduced(dim, l - j, k - i);
                    if !r.is_zero() {
                        acc += &ci * binomial_q(l as i64, j as i64) * r * self.mu(dim, j, i);
                    }
                }
            }
            acc
        };
        self.dims.get_mut(&dim).expect("dimension present").mu.insert((l, k), v.clone());
        v
    }

    /// r_{l,k} at the centre, computing whatever is needed.
    pub fn reduced_at_center(&mut self, l: usize, k: usize) -> Result<Rational> {
        let c = self.center;
        self.ensure(c, k, l)?;
        self.ensure_neighbours(c, k, l)?;
        Ok(self.reduced(c, l, k))
    }

    pub fn mu_at_center(&mut self, l: usize, k: usize) -> Result<Rational> {
        let c = self.center;
        self.ensure(c, k, l)?;
        self.ensure_neighbours(c, k, l)?;
        Ok(self.mu(c, l, k))
    }
}
