//! Joint cumulants kappa_{l,k} of conductance G and shot noise P = sum T_j (1 - T_j).

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::algebra::{checked_div, frac, format_rational, int, pow, Rational};
use crate::conductance::{conductance_prefix, CumulantSequence};
use crate::ensembles::{b_constant, TransportParams};
use crate::error::{Error, Result};
use crate::lattice::{radius_for, TransportLattice};

/// Lazily evaluated joint cumulants at one parameter point.
pub struct JointEngine {
    params: TransportParams,
    lattice: TransportLattice,
}

impl JointEngine {
    /// `max_total` bounds l + 2k over the entries that will be requested.
    pub fn new(p: &TransportParams, max_total: usize) -> Self {
        JointEngine {
            params: p.clone(),
            lattice: TransportLattice::new(p.beta, p.alpha.clone(), p.delta.clone(), p.n, radius_for(max_total) + 1),
        }
    }

    pub fn params(&self) -> &TransportParams {
        &self.params
    }

    /// kappa_{l,k}; kappa_{0,0} = 0.
    pub fn get(&mut self, l: usize, k: usize) -> Result<Rational> {
        let n = self.params.n as i64;
        self.lattice.get(n, l, k).map_err(|e| match (k, e) {
            (0, e) => e,
            (_, Error::Pole(msg)) => Error::Pole(msg),
            (_, e) => Error::BoundaryUnavailable(e.to_string()),
        })
    }

    pub fn reduced(&mut self, l: usize, k: usize) -> Result<Rational> {
        self.lattice.reduced_at_center(l, k)
    }

    pub fn reduced_moment(&mut self, l: usize, k: usize) -> Result<Rational> {
        self.lattice.mu_at_center(l, k)
    }

    pub fn lattice_radius(&self) -> i64 {
        self.lattice.max_shift()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointEntry {
    pub l: usize,
    pub k: usize,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointCumulantTable {
    pub params: TransportParams,
    pub max_l: usize,
    pub max_k: usize,
    pub values: BTreeMap<(usize, usize), Rational>,
    pub boundary: CumulantSequence,
    pub lattice_radius: i64,
}

impl JointCumulantTable {
    pub fn get(&self, l: usize, k: usize) -> &Rational {
        &self.values[&(l, k)]
    }

    pub fn entries(&self) -> Vec<JointEntry> {
        self.values
            .iter()
            .map(|(&(l, k), v)| JointEntry { l, k, value: format_rational(v) })
            .collect()
    }
}

/// Reduced joint cumulants and moments, keyed by (l, k).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointReducedTable {
    pub r: BTreeMap<(usize, usize), Rational>,
    pub mu: BTreeMap<(usize, usize), Rational>,
}

pub fn joint_cumulants(p: &TransportParams, max_l: usize, max_k: usize) -> Result<JointCumulantTable> {
    let mut eng = JointEngine::new(p, max_l + 2 * max_k);
    let mut values = BTreeMap::new();
    for k in 0..=max_k {
        for l in 0..=max_l {
            if l + k == 0 {
                continue;
            }
            values.insert((l, k), eng.get(l, k)?);
        }
    }
    let boundary = conductance_prefix(p, max_l.max(1))?;
    Ok(JointCumulantTable { params: p.clone(), max_l, max_k, values, boundary, lattice_radius: eng.lattice_radius() })
}

pub fn joint_reduced(p: &TransportParams, max_l: usize, max_k: usize) -> Result<JointReducedTable> {
    let mut eng = JointEngine::new(p, max_l + 2 * max_k + 4);
    let mut r = BTreeMap::new();
    let mut mu = BTreeMap::new();
    for k in 0..=max_k {
        for l in 0..=max_l {
            if l + k > 0 {
                r.insert((l, k), eng.reduced(l, k)?);
            }
            mu.insert((l, k), eng.reduced_moment(l, k)?);
        }
    }
    Ok(JointReducedTable { r, mu })
}

/// Exact mean of the shot noise.
pub fn shot_noise_mean_closed(p: &TransportParams) -> Result<Rational> {
    let b = int(p.beta as i64);
    let n = p.n as i64;
    let a = &p.alpha;
    let d = &p.delta;
    let m1 = &b * int(n - 1);
    let num = int(n) * (int(2) * a + int(2) + &m1) * (d + int(2) + &m1) * (int(2) * a + d + int(4) + &b * int(n - 2));
    let h = d / int(2);
    let den = int(4)
        * (a + &h + int(2) + &m1)
        * (a + &h + int(3) + &m1)
        * (int(2) * a + d + int(4) + &b * int(2 * n - 3));
    checked_div(&num, &den, "shot-noise mean denominator")
}

pub fn shot_noise_variance_closed(p: &TransportParams) -> Result<Rational> {
    if p.beta == 2 {
        return Err(Error::UnsupportedBeta(2));
    }
    let seq = conductance_prefix(p, 4)?;
    let k2 = seq.kappa(2).clone();
    let k4 = seq.kappa(4).clone();
    let bn = b_constant(p)?;
    let h = &p.delta / int(2);
    let n = int(p.n as i64);
    let v = match p.beta {
        4 => {
            let s = &p.alpha + &h + int(4) * &n - int(2);
            frac(2, 3) * &s * &s * &k4 - int(4) * &k4 - int(24) * &k2 * &k2 + &k2 + int(3) * bn
        }
        _ => {
            let s = &p.alpha + &h + &n + int(1);
            frac(2, 3) * &s * &s * &k4 - &k4 - int(6) * &k2 * &k2 + &k2 + int(12) * bn
        }
    };
    Ok(v / int(5))
}

/// Outcome of the shot-noise / superconducting-conductance identity at one order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AltlandRow {
    pub k: usize,
    pub shot_noise: String,
    pub conductance_sum: String,
    /// "recurrence" or "determinant" for the shot-noise side.
    pub method: String,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AltlandReport {
    pub n: u64,
    pub n1: u64,
    pub n2: u64,
    pub rows: Vec<AltlandRow>,
    pub pass: bool,
    pub first_failure: Option<usize>,
}

/// Checks kappa_k(P; n) = 4^-k [kappa_k(G; N1, delta = -1) + kappa_k(G; N2, delta = 1)] at beta = 2, alpha = 0.
///
/// The shot-noise side comes from the joint recurrence. Where that recurrence meets a
/// vanishing leading coefficient (beta = 2, alpha = delta = 0 has A(2n) = 0), the
/// Hankel-determinant expansion is used instead and the row is labelled accordingly.
pub fn altland_identity_check(n: u64, kmax: usize) -> Result<AltlandReport> {
    let n1 = (n + 1) / 2;
    let n2 = n / 2;
    let left_p = TransportParams::simple(2, (0, 1), (0, 1), n);
    let g1 = conductance_prefix(&TransportParams::simple(2, (0, 1), (-1, 1), n1), kmax.max(1))?;
    let g2 = if n2 > 0 { Some(conductance_prefix(&TransportParams::simple(2, (0, 1), (1, 1), n2), kmax.max(1))?) } else { None };
    let mut eng = JointEngine::new(&left_p, 2 * kmax + 2);
    let mut det: Option<BTreeMap<(usize, usize), Rational>> = None;
    let mut rows = Vec::new();
    let mut first_failure = None;
    for k in 1..=kmax {
        let (lhs, method) = match eng.get(0, k) {
            Ok(v) => (v, "recurrence"),
            Err(Error::Pole(_)) | Err(Error::BoundaryUnavailable(_)) => {
                if det.is_none() {
                    det = Some(crate::verify::hankel_joint_cumulants(&left_p, 0, kmax)?);
                }
                (det.as_ref().expect("determinant table")[&(0, k)].clone(), "determinant")
            }
            Err(e) => return Err(e),
        };
        let mut rhs = g1.kappa(k).clone();
        if let Some(g2) = &g2 {
            rhs += g2.kappa(k);
        }
        rhs *= pow(&int(4), -(k as i32));
        let equal = lhs == rhs;
        if !equal && first_failure.is_none() {
            first_failure = Some(k);
        }
        rows.push(AltlandRow {
            k,
            shot_noise: format_rational(&lhs),
            conductance_sum: format_rational(&rhs),
            method: method.to_string(),
            equal,
        });
    }
    Ok(AltlandReport { n, n1, n2, pass: first_failure.is_none(), first_failure, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussFactorReport {
    pub n: u64,
    pub w: f64,
    pub shot_noise_side: f64,
    pub conductance_side: f64,
    pub relative_difference: f64,
    pub error_estimate: f64,
    pub pass: bool,
}

/// Numerically checks E[exp(4wP)] (n, alpha = delta = 0) = E[exp(wG)](N1, delta = -1) E[exp(wG)](N2, delta = 1), beta = 2.
pub fn gaussian_factorization_check(n: u64, w: f64) -> Result<GaussFactorReport> {
    use crate::verify::quadrature::{expectation, Observable};
    if n == 0 || n > 3 {
        return Err(Error::InvalidParams("gaussian factorisation check needs 1 <= n <= 3".into()));
    }
    if w.is_nan() || w < 0.0 {
        return Err(Error::InvalidParams("w must be non-negative".into()));
    }
    let tol = 1e-6;
    let n1 = (n + 1) / 2;
    let n2 = n / 2;
    let budget = tol / 3.0;
    let left = expectation(&TransportParams::simple(2, (0, 1), (0, 1), n), Observable::ExpP(4.0 * w), budget)?;
    let r1 = expectation(&TransportParams::simple(2, (0, 1), (-1, 1), n1), Observable::ExpG(w), budget)?;
    let r2 = if n2 > 0 {
        expectation(&TransportParams::simple(2, (0, 1), (1, 1), n2), Observable::ExpG(w), budget)?
    } else {
        (1.0, 0.0)
    };
    let right = r1.0 * r2.0;
    let rel = ((left.0 - right) / left.0).abs();
    let err = left.1 + r1.1 + r2.1;
    Ok(GaussFactorReport {
        n,
        w,
        shot_noise_side: left.0,
        conductance_side: right,
        relative_difference: rel,
        error_estimate: err,
        pass: rel < tol,
    })
}

pub fn is_zero_table(t: &JointCumulantTable) -> bool {
    t.values.values().all(|v| v.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_shot_noise_mean() {
        let p = TransportParams::simple(2, (0, 1), (0, 1), 1);
        assert_eq!(shot_noise_mean_closed(&p).unwrap(), frac(1, 6));
        for n in 1..8i64 {
            let p = TransportParams::simple(2, (0, 1), (0, 1), n as u64);
            let expect = frac(n * n * n, 2 * (4 * n * n - 1));
            assert_eq!(shot_noise_mean_closed(&p).unwrap(), expect);
            let mut eng = JointEngine::new(&p, 4);
            assert_eq!(eng.get(0, 1).unwrap(), expect);
        }
    }

    #[test]
    fn table1_entries() {
        let p = TransportParams::simple(1, (-1, 2), (0, 1), 8);
        let t = joint_reduced(&p, 2, 1).unwrap();
        let r = |l, k| t.r[&(l, k)].clone();
        assert_eq!(t.mu[&(1, 1)], r(0, 1) * r(1, 0) + r(1, 1));
        assert_eq!(
            t.mu[&(2, 1)],
            r(2, 1) + int(2) * r(1, 0) * r(1, 1) + r(0, 1) * r(2, 0) + r(0, 1) * r(1, 0) * r(1, 0)
        );
        assert_eq!(t.mu[&(2, 0)], r(2, 0) + r(1, 0) * r(1, 0));
    }
}
