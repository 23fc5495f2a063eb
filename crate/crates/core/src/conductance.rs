//! Finite-n cumulants of the conductance G = sum T_j.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::algebra::{checked_div, frac, int, serde_rational_vec, Rational};
use crate::ensembles::{b_constant, lattice_step, TransportParams};
use crate::error::{Error, Result};
use crate::lattice::{initial_cumulants, moments_from_reduced, radius_for, TransportLattice};

/// kappa_1..kappa_L; `values[0]` is kappa_1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CumulantSequence {
    pub params: TransportParams,
    #[serde(with = "serde_rational_vec")]
    pub values: Vec<Rational>,
    pub lattice_radius: i64,
    pub extended_validity: bool,
}

impl CumulantSequence {
    /// kappa_l with 1-based indexing.
    pub fn kappa(&self, l: usize) -> &Rational {
        &self.values[l - 1]
    }
}

/// Reduced cumulants r_1..r_L (index 0 unused) and reduced moments mu_0..mu_L.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedSequence {
    pub r_values: Vec<Rational>,
    pub mu_values: Vec<Rational>,
}

/// Anything that can hand out conductance cumulants kappa_1..kappa_order at a dimension.
pub trait CumulantProvider {
    fn cumulants(&mut self, n: i64, order: usize) -> Result<Vec<Rational>>;
}

/// Provider backed by the exact recurrence.
pub struct RecurrenceProvider {
    lattice: TransportLattice,
}

impl RecurrenceProvider {
    pub fn new(p: &TransportParams, order: usize) -> Self {
        RecurrenceProvider {
            lattice: TransportLattice::new(p.beta, p.alpha.clone(), p.delta.clone(), p.n, radius_for(order + 4) + 1),
        }
    }
}

impl CumulantProvider for RecurrenceProvider {
    fn cumulants(&mut self, n: i64, order: usize) -> Result<Vec<Rational>> {
        (1..=order).map(|l| self.lattice.get(n, l, 0)).collect()
    }
}

pub fn conductance_initial(p: &TransportParams) -> Result<(Rational, Rational, Rational)> {
    let [k1, k2, k3] = initial_cumulants(p.beta, &p.alpha, &p.delta, p.n as i64)?;
    Ok((k1, k2, k3))
}

pub fn conductance_cumulants(p: &TransportParams, order: usize) -> Result<CumulantSequence> {
    if order < 3 {
        return Err(Error::InvalidOrder(format!("need at least 3 cumulants, got {order}")));
    }
    conductance_prefix(p, order)
}

/// Same as `conductance_cumulants` but accepting any order >= 1.
pub fn conductance_prefix(p: &TransportParams, order: usize) -> Result<CumulantSequence> {
    let mut lat = TransportLattice::new(p.beta, p.alpha.clone(), p.delta.clone(), p.n, radius_for(order));
    let values = (1..=order).map(|l| lat.get(p.n as i64, l, 0)).collect::<Result<Vec<_>>>()?;
    Ok(CumulantSequence {
        params: p.clone(),
        values,
        lattice_radius: lat.max_shift(),
        extended_validity: p.extended_validity(),
    })
}

pub fn reduced_moments(p: &TransportParams, order: usize, base: &mut dyn CumulantProvider) -> Result<ReducedSequence> {
    let step = lattice_step(p.beta).ok_or(Error::UnsupportedBeta(p.beta))?;
    let n = p.n as i64;
    let lo = if n - step > 0 { base.cumulants(n - step, order)? } else { vec![Rational::zero(); order] };
    let mid = base.cumulants(n, order)?;
    let hi = base.cumulants(n + step, order)?;
    let mut r = vec![Rational::zero()];
    for l in 0..order {
        r.push(&lo[l] + &hi[l] - int(2) * &mid[l]);
    }
    let mu = moments_from_reduced(&r, order);
    Ok(ReducedSequence { r_values: r, mu_values: mu })
}

pub fn fourth_cumulant_closed(p: &TransportParams) -> Result<Rational> {
    let (k1, k2, k3) = conductance_initial(p)?;
    let h = &p.delta / int(2);
    let a = &p.alpha;
    let n = int(p.n as i64);
    match p.beta {
        1 => {
            let bn = b_constant(p)?;
            let num = int(-2) * &k2 + int(10) * &k1 * &k3 + int(22) * &k2 * &k2 + int(5) * &k3 * (&h - a - &n)
                - int(24) * bn;
            let den = (a + &h + &n + int(4)) * (int(4) * a + int(2) * &p.delta + int(4) * &n - int(3));
            Ok(int(3) * checked_div(&num, &den, "fourth cumulant (beta = 1) denominator")?)
        }
        2 => {
            let num = int(-2) * &k2 + int(20) * &k1 * &k3 + int(32) * &k2 * &k2 + int(5) * &k3 * (&h - a - int(2) * &n);
            let s = a + &h + int(2) * &n;
            let den = &s * &s - int(9);
            Ok(frac(3, 4) * checked_div(&num, &den, "fourth cumulant (beta = 2) denominator")?)
        }
        b => Err(Error::UnsupportedBeta(b)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_case() {
        let p = TransportParams::simple(2, (0, 1), (0, 1), 1);
        let (k1, k2, k3) = conductance_initial(&p).unwrap();
        assert_eq!(k1, frac(1, 2));
        assert_eq!(k2, frac(1, 12));
        assert!(k3.is_zero());
    }

    #[test]
    fn beta_two_mean_is_half_n() {
        for n in 1..12 {
            let p = TransportParams::simple(2, (0, 1), (0, 1), n);
            assert_eq!(conductance_initial(&p).unwrap().0, frac(n as i64, 2));
        }
    }

    #[test]
    fn order_below_three_is_rejected() {
        let p = TransportParams::simple(2, (0, 1), (0, 1), 3);
        assert_eq!(conductance_cumulants(&p, 2).unwrap_err().token(), "invalid-order");
    }

    #[test]
    fn fourth_cumulant_examples() {
        let p = TransportParams::simple(2, (0, 1), (0, 1), 5);
        assert_eq!(conductance_cumulants(&p, 4).unwrap().values[3], fourth_cumulant_closed(&p).unwrap());
        let p = TransportParams::simple(1, (-1, 2), (0, 1), 10);
        assert_eq!(conductance_cumulants(&p, 4).unwrap().values[3], fourth_cumulant_closed(&p).unwrap());
        let p = TransportParams::simple(4, (0, 1), (0, 1), 5);
        assert_eq!(fourth_cumulant_closed(&p).unwrap_err().token(), "unsupported-beta");
    }

    #[test]
    fn vanishing_leading_coefficient_is_a_pole() {
        // For beta = 2, A(l) = (l+1)(l^2 - (alpha + delta/2 + 2n)^2) vanishes at l = 4 when n = 2.
        let p = TransportParams::simple(2, (0, 1), (0, 1), 2);
        assert_eq!(conductance_cumulants(&p, 5).unwrap_err().token(), "pole");
    }
}
