//! Brute-force moments of (G, P) by nested tanh-sinh quadrature over the
//! ordered simplex 0 < T_1 < ... < T_n < 1 (n <= 3).
//!
//! Each node carries both T and 1 - T so that endpoint singularities of the
//! weight T^alpha (1-T)^(delta/2) are evaluated without cancellation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{to_f64, Rational};
use crate::ensembles::{log_selberg, TransportParams};
use crate::error::{Error, Result};

const U_MAX: f64 = 4.2;

/// Nodes on (0, 1): (left fraction, right fraction, weight).
fn nodes(h: f64) -> Vec<(f64, f64, f64)> {
    let m = (U_MAX / h).ceil() as i64;
    let half_pi = std::f64::consts::FRAC_PI_2;
    (-m..=m)
        .filter_map(|k| {
            let u = k as f64 * h;
            let s = half_pi * u.sinh();
            let left = 1.0 / (1.0 + (-2.0 * s).exp());
            let right = 1.0 / (1.0 + (2.0 * s).exp());
            let e = (-2.0 * s.abs()).exp();
            let sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
            let w = h * half_pi * u.cosh() * sech2 / 2.0;
            (left > 0.0 && right > 0.0 && w > 0.0).then_some((left, right, w))
        })
        .collect()
}

struct Weight {
    n: usize,
    beta: i32,
    alpha: f64,
    half_delta: f64,
}

/// Integrates `f(t, 1 - t, density)` over the ordered simplex, returning
/// the accumulated vector (already multiplied by n!).
fn simplex_integral<F>(w: &Weight, h: f64, dim: usize, f: &F) -> Vec<f64>
where
    F: Fn(&[f64], &[f64], f64, &mut [f64]),
{
    let nd = nodes(h);
    let mut acc = vec![0.0; dim];
    let mut t = vec![0.0; w.n];
    let mut om = vec![0.0; w.n];
    recurse(w, &nd, 0, 0.0, 1.0, 1.0, &mut t, &mut om, f, &mut acc);
    let nfact: f64 = (1..=w.n).map(|x| x as f64).product();
    acc.iter_mut().for_each(|x| *x *= nfact);
    acc
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    w: &Weight,
    nd: &[(f64, f64, f64)],
    level: usize,
    lo: f64,
    width: f64,
    factor: f64,
    t: &mut [f64],
    om: &mut [f64],
    f: &F,
    acc: &mut [f64],
) where
    F: Fn(&[f64], &[f64], f64, &mut [f64]),
{
    for &(fl, fr, wt) in nd {
        let x = lo + width * fl;
        let omx = width * fr;
        let mut g = x.powf(w.alpha) * omx.powf(w.half_delta);
        for i in 0..level {
            let d = if t[i] > 0.5 { om[i] - omx } else { x - t[i] };
            g *= d.powi(w.beta);
        }
        let fac = factor * width * wt * g;
        if fac == 0.0 || !fac.is_finite() {
            continue;
        }
        t[level] = x;
        om[level] = omx;
        if level + 1 == w.n {
            f(t, om, fac, acc);
        } else {
            recurse(w, nd, level + 1, x, omx, fac, t, om, f, acc);
        }
    }
}

/// Which moments to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Statistic {
    G,
    P,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureMoments {
    /// Raw moments E[G^l P^k].
    pub moments: BTreeMap<(usize, usize), f64>,
    pub cumulants: BTreeMap<(usize, usize), f64>,
    /// |difference| between two step sizes, per cumulant.
    pub cumulant_errors: BTreeMap<(usize, usize), f64>,
    /// Quadrature mass divided by the Selberg normalisation; should be 1.
    pub normalisation_ratio: f64,
}

fn index_set(stat: Statistic, m: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for l in 0..=m {
        for k in 0..=m - l {
            let keep = match stat {
                Statistic::G => k == 0,
                Statistic::P => l == 0,
                Statistic::Mixed => true,
            };
            if keep {
                out.push((l, k));
            }
        }
    }
    out
}

fn weight_of(p: &TransportParams) -> Result<Weight> {
    if p.n == 0 || p.n > 3 {
        return Err(Error::InvalidParams("quadrature oracle supports 1 <= n <= 3".into()));
    }
    Ok(Weight { n: p.n as usize, beta: p.beta as i32, alpha: to_f64(&p.alpha), half_delta: to_f64(&p.delta) / 2.0 })
}

/// Centred moments E[(G-g0)^l (P-p0)^k] at step h, normalised by the Selberg constant.
fn centred(p: &TransportParams, idx: &[(usize, usize)], h: f64, g0: f64, p0: f64) -> Result<(Vec<f64>, f64)> {
    let w = weight_of(p)?;
    let lmax = idx.iter().map(|x| x.0).max().unwrap_or(0);
    let kmax = idx.iter().map(|x| x.1).max().unwrap_or(0);
    let dim = idx.len() + 1;
    let f = |t: &[f64], om: &[f64], fac: f64, acc: &mut [f64]| {
        let g: f64 = t.iter().sum::<f64>() - g0;
        let pp: f64 = t.iter().zip(om).map(|(a, b)| a * b).sum::<f64>() - p0;
        let mut gp = vec![1.0; lmax + 1];
        for i in 1..=lmax {
            gp[i] = gp[i - 1] * g;
        }
        let mut pw = vec![1.0; kmax + 1];
        for i in 1..=kmax {
            pw[i] = pw[i - 1] * pp;
        }
        for (slot, &(l, k)) in idx.iter().enumerate() {
            acc[slot] += fac * gp[l] * pw[k];
        }
        acc[dim - 1] += fac;
    };
    let raw = simplex_integral(&w, h, dim, &f);
    let z = log_selberg(p)?.exp();
    let vals = raw[..dim - 1].iter().map(|x| x / z).collect();
    Ok((vals, raw[dim - 1] / z))
}

/// Joint cumulants from a moment table m[(l,k)] with m[(0,0)] = 1.
pub fn cumulants_from_moments(m: &BTreeMap<(usize, usize), f64>, lmax: usize, kmax: usize) -> BTreeMap<(usize, usize), f64> {
    let binom = |n: usize, k: usize| -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    };
    let get = |t: &BTreeMap<(usize, usize), f64>, l: usize, k: usize| t.get(&(l, k)).copied().unwrap_or(0.0);
    let mut kap: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for tot in 1..=(lmax + kmax) {
        for l in 0..=tot.min(lmax) {
            let k = tot - l;
            if k > kmax || !m.contains_key(&(l, k)) {
                continue;
            }
            let mut v = get(m, l, k);
            if l > 0 {
                for i in 0..l {
                    for j in 0..=k {
                        if i == 0 && j == 0 {
                            continue;
                        }
                        v -= binom(l - 1, i) * binom(k, j) * get(&kap, l - i, k - j) * get(m, i, j);
                    }
                }
            } else {
                for j in 1..k {
                    v -= binom(k - 1, j) * get(&kap, 0, k - j) * get(m, 0, j);
                }
            }
            kap.insert((l, k), v);
        }
    }
    kap
}

/// Raw moments and cumulants of (G, P) up to total order `max_total`, relative target 1e-8.
pub fn quadrature_moments(p: &TransportParams, stat: Statistic, max_total: usize) -> Result<QuadratureMoments> {
    let idx = index_set(stat, max_total);
    let n = p.n as f64;
    let (g0, p0) = (n / 2.0, n / 8.0);
    let lmax = idx.iter().map(|x| x.0).max().unwrap_or(0);
    let kmax = idx.iter().map(|x| x.1).max().unwrap_or(0);
    let mut prev: Option<BTreeMap<(usize, usize), f64>> = None;
    let mut best = None;
    for (step, h) in [0.125, 0.0625, 0.03125].into_iter().enumerate() {
        let (vals, mass) = centred(p, &idx, h, g0, p0)?;
        let cm: BTreeMap<(usize, usize), f64> = idx.iter().copied().zip(vals).collect();
        let mut kap = cumulants_from_moments(&cm, lmax, kmax);
        if let Some(v) = kap.get_mut(&(1, 0)) {
            *v += g0;
        }
        if let Some(v) = kap.get_mut(&(0, 1)) {
            *v += p0;
        }
        if let Some(pk) = &prev {
            let errs: BTreeMap<(usize, usize), f64> =
                kap.iter().map(|(key, v)| (*key, (v - pk[key]).abs())).collect();
            let ok = kap.iter().all(|(key, v)| errs[key] <= 1e-9 * v.abs().max(1e-6));
            best = Some((cm, kap.clone(), errs, mass));
            if ok || step == 2 {
                break;
            }
        }
        prev = Some(kap);
    }
    let (cm, cumulants, cumulant_errors, mass) = best.expect("at least two levels");
    // Raw moments by binomial expansion of the centred ones.
    let binom = |n: usize, k: usize| -> f64 { (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64) };
    let mut moments = BTreeMap::new();
    for &(l, k) in &idx {
        let mut v = 0.0;
        for i in 0..=l {
            for j in 0..=k {
                let c = if i == 0 && j == 0 { 1.0 } else { cm.get(&(i, j)).copied().unwrap_or(0.0) };
                v += binom(l, i) * binom(k, j) * c * g0.powi((l - i) as i32) * p0.powi((k - j) as i32);
            }
        }
        moments.insert((l, k), v);
    }
    Ok(QuadratureMoments { moments, cumulants, cumulant_errors, normalisation_ratio: mass })
}

/// Generating-function values E[exp(w G)] or E[exp(w P)].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observable {
    ExpG(f64),
    ExpP(f64),
}

/// E[observable] with an error estimate from two step sizes; fails above `tol` (absolute).
pub fn expectation(p: &TransportParams, obs: Observable, tol: f64) -> Result<(f64, f64)> {
    let w = weight_of(p)?;
    let z = log_selberg(p)?.exp();
    let f = |t: &[f64], om: &[f64], fac: f64, acc: &mut [f64]| {
        let v = match obs {
            Observable::ExpG(x) => (x * t.iter().sum::<f64>()).exp(),
            Observable::ExpP(x) => (x * t.iter().zip(om).map(|(a, b)| a * b).sum::<f64>()).exp(),
        };
        acc[0] += fac * v;
    };
    let mut prev = None;
    let mut last = (0.0, f64::INFINITY);
    for h in [0.125, 0.0625, 0.03125] {
        let v = simplex_integral(&w, h, 1, &f)[0] / z;
        if let Some(pv) = prev {
            let err: f64 = (v - pv as f64).abs();
            last = (v, err);
            if err <= tol {
                return Ok(last);
            }
        }
        prev = Some(v);
    }
    Err(Error::QuadratureFailure { estimate: last.1, tolerance: tol })
}

/// One-dimensional tanh-sinh on (0, 1) with integrand f(t, 1 - t).
pub fn integrate_unit(f: impl Fn(f64, f64) -> f64, h: f64) -> f64 {
    nodes(h).into_iter().map(|(l, r, w)| w * f(l, r)).filter(|x| x.is_finite()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub l: usize,
    pub k: usize,
    pub exact: String,
    pub quadrature: f64,
    pub error_estimate: f64,
    /// |quadrature - exact| / max(|exact|, sigma_G^l sigma_P^k).
    pub scaled_difference: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub params: TransportParams,
    pub tolerance: f64,
    pub normalisation_ratio: f64,
    pub rows: Vec<OracleRow>,
    pub pass: bool,
}

/// Quadrature cumulants against the exact recurrences. Differences are
/// measured relative to |exact|, or to the natural scale sigma_G^l sigma_P^k
/// when the exact value is smaller (vanishing odd cumulants).
pub fn oracle_comparison(p: &TransportParams, stat: Statistic, max_total: usize, tol: f64) -> Result<OracleReport> {
    let q = quadrature_moments(p, stat, max_total.max(2))?;
    // Conductance-only comparisons need just the closed-form prefix.
    let mut eng = (stat != Statistic::G).then(|| crate::jointcsn::JointEngine::new(p, 2 * max_total.max(2) + 2));
    let g = crate::conductance::conductance_prefix(p, max_total.max(2))?;
    let mut exact_at = |l: usize, k: usize| -> Result<Rational> {
        match (&mut eng, k) {
            (_, 0) => Ok(g.values[l - 1].clone()),
            (Some(e), _) => e.get(l, k),
            (None, _) => unreachable!("shot-noise index requested for a conductance-only comparison"),
        }
    };
    let sg = if stat == Statistic::P { 1.0 } else { to_f64(&exact_at(2, 0)?).abs().sqrt() };
    let sp = if stat == Statistic::G { 1.0 } else { to_f64(&exact_at(0, 2)?).abs().sqrt() };
    let mut rows = Vec::new();
    for (&(l, k), &v) in &q.cumulants {
        if l + k > max_total {
            continue;
        }
        let exact = exact_at(l, k)?;
        let ef = to_f64(&exact);
        let scale = ef.abs().max(sg.powi(l as i32) * sp.powi(k as i32));
        let d = (v - ef).abs() / scale;
        rows.push(OracleRow {
            l,
            k,
            exact: crate::algebra::format_rational(&exact),
            quadrature: v,
            error_estimate: q.cumulant_errors[&(l, k)],
            scaled_difference: d,
            pass: d <= tol,
        });
    }
    let pass = rows.iter().all(|r| r.pass) && (q.normalisation_ratio - 1.0).abs() <= tol;
    Ok(OracleReport { params: p.clone(), tolerance: tol, normalisation_ratio: q.normalisation_ratio, rows, pass })
}
