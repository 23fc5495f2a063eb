//! Monte Carlo draws of G, P and tau_W, k-statistics with jackknife errors,
//! and the five-cumulant Edgeworth density.
//!
//! Random numbers come from ChaCha8. A batch is cut into chunks of
//! `CHUNK` draws; chunk c uses the generator seeded with `seed` on stream c,
//! so a batch is a pure function of (seed, params, count) and chunks can be
//! produced independently.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, ChiSquared, Distribution};
use serde::{Deserialize, Serialize};

use crate::algebra::to_f64;
use crate::ensembles::{DelayParams, TransportParams};
use crate::error::{Error, Result};

pub const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Statistic {
    G,
    P,
    TauW,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SampleParams {
    Transport(TransportParams),
    Delay(DelayParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub statistic: Statistic,
    pub params: SampleParams,
    pub seed: u64,
    pub values: Vec<f64>,
    pub count: usize,
}

/// Conductance and shot noise from the same eigenvalue draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumBatch {
    pub g: SampleBatch,
    pub p: SampleBatch,
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn run_chunks<T>(count: usize, seed: u64, mut draw: impl FnMut(&mut ChaCha8Rng, usize) -> Result<Vec<T>>) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(count);
    let mut c = 0;
    while out.len() < count {
        let want = CHUNK.min(count - out.len());
        let mut rng = chunk_rng(seed, c);
        out.extend(draw(&mut rng, want)?);
        c += 1;
    }
    Ok(out)
}

fn chi(rng: &mut ChaCha8Rng, dof: f64) -> Result<f64> {
    let d = ChiSquared::new(dof).map_err(|e| Error::InvalidParams(format!("chi dof {dof}: {e}")))?;
    Ok(d.sample(rng).sqrt())
}

fn beta_dist(a: f64, b: f64) -> Result<Beta<f64>> {
    Beta::new(a, b).map_err(|e| Error::InvalidParams(format!("beta({a}, {b}): {e}")))
}

/// max over [0,1]^n of prod_{j<k} |x_k - x_j|.
fn vandermonde_max(n: u64) -> f64 {
    match n {
        1 | 2 => 1.0,
        3 => 0.25,
        4 => 1.0 / (25.0 * 5f64.sqrt()),
        _ => unreachable!("rejection sampler is used for n <= 4 only"),
    }
}

const REJECTION_MAX_N: u64 = 4;
const MIN_ACCEPTANCE: f64 = 1e-6;

/// Exact draws for small n: proposals T_j ~ Beta(alpha+1, delta/2+1) iid,
/// accepted with probability (|Delta| / max|Delta|)^beta.
fn rejection_traces(p: &TransportParams, rng: &mut ChaCha8Rng, want: usize) -> Result<Vec<(f64, f64)>> {
    let n = p.n as usize;
    let beta = p.beta as f64;
    let env = beta_dist(to_f64(&p.alpha) + 1.0, to_f64(&p.delta) / 2.0 + 1.0)?;
    let vmax = vandermonde_max(p.n);
    let mut out = Vec::with_capacity(want);
    let mut tries: u64 = 0;
    let mut t = vec![0.0; n];
    while out.len() < want {
        tries += 1;
        for x in t.iter_mut() {
            *x = env.sample(rng);
        }
        let mut v = 1.0;
        for j in 0..n {
            for k in j + 1..n {
                v *= (t[k] - t[j]).abs();
            }
        }
        if rng.gen::<f64>() < (v / vmax).powf(beta) {
            let g: f64 = t.iter().sum();
            let q: f64 = t.iter().map(|x| x * x).sum();
            out.push((g, g - q));
        }
        if tries >= 1_000_000 && (out.len() as f64) / (tries as f64) < MIN_ACCEPTANCE {
            return Err(Error::EnvelopeFailure(out.len() as f64 / tries as f64));
        }
    }
    Ok(out)
}

/// Tridiagonal beta-Jacobi model on [-2, 2] built from independent Beta
/// variables; T = (2 + x)/4. Only tr J and tr J^2 are needed.
fn tridiagonal_traces(p: &TransportParams, rng: &mut ChaCha8Rng, want: usize) -> Result<Vec<(f64, f64)>> {
    let n = p.n as usize;
    let beta = p.beta as f64;
    // (2 - x)^a (2 + x)^b with T = (2 + x)/4
    let a = to_f64(&p.delta) / 2.0;
    let b = to_f64(&p.alpha);
    let mut dists = Vec::with_capacity(2 * n - 1);
    for k in 0..(2 * n - 1) {
        let m = (2 * n - k) as f64;
        // Symmetric Beta on [-1, 1] with density (1 - x)^{s-1} (1 + x)^{t-1}.
        let (s, t) = if k % 2 == 0 {
            ((m - 2.0) * beta / 4.0 + a + 1.0, (m - 2.0) * beta / 4.0 + b + 1.0)
        } else {
            ((m - 3.0) * beta / 4.0 + a + b + 2.0, (m - 1.0) * beta / 4.0)
        };
        dists.push(beta_dist(t, s)?);
    }
    let mut out = Vec::with_capacity(want);
    // al[k + 2] holds alpha_k for k >= -2.
    let mut al = vec![0.0; 2 * n + 2];
    for _ in 0..want {
        al[0] = -1.0;
        al[1] = -1.0;
        for (k, d) in dists.iter().enumerate() {
            al[k + 2] = 2.0 * d.sample(rng) - 1.0;
        }
        al[2 * n + 1] = -1.0;
        let mut tr = 0.0;
        let mut tr2 = 0.0;
        for k in 0..n {
            let a_odd_prev = al[2 * k + 1];
            let a_even = al[2 * k + 2];
            let a_even_prev = al[2 * k];
            let diag = (1.0 - a_odd_prev) * a_even - (1.0 + a_odd_prev) * a_even_prev;
            tr += diag;
            tr2 += diag * diag;
            if k + 1 < n {
                let a_odd_next = al[2 * k + 3];
                let off2 = (1.0 - a_odd_prev) * (1.0 - a_even * a_even) * (1.0 + a_odd_next);
                tr2 += 2.0 * off2;
            }
        }
        let nf = n as f64;
        let g = (2.0 * nf + tr) / 4.0;
        let sq = (4.0 * nf + 4.0 * tr + tr2) / 16.0;
        out.push((g, g - sq));
    }
    Ok(out)
}

pub fn sample_jacobi_spectrum(p: &TransportParams, count: usize, seed: u64) -> Result<SpectrumBatch> {
    if count == 0 {
        return Err(Error::InvalidCount(count));
    }
    let pairs = run_chunks(count, seed, |rng, want| {
        if p.n <= REJECTION_MAX_N {
            rejection_traces(p, rng, want)
        } else {
            tridiagonal_traces(p, rng, want)
        }
    })?;
    let params = SampleParams::Transport(p.clone());
    let g = SampleBatch { statistic: Statistic::G, params: params.clone(), seed, values: pairs.iter().map(|x| x.0).collect(), count };
    let pb = SampleBatch { statistic: Statistic::P, params, seed, values: pairs.iter().map(|x| x.1).collect(), count };
    Ok(SpectrumBatch { g, p: pb })
}

/// Tridiagonal sampler forced for any n (used to cross-check the rejection sampler).
pub fn sample_jacobi_tridiagonal(p: &TransportParams, count: usize, seed: u64) -> Result<SpectrumBatch> {
    if count == 0 {
        return Err(Error::InvalidCount(count));
    }
    let pairs = run_chunks(count, seed, |rng, want| tridiagonal_traces(p, rng, want))?;
    let params = SampleParams::Transport(p.clone());
    let g = SampleBatch { statistic: Statistic::G, params: params.clone(), seed, values: pairs.iter().map(|x| x.0).collect(), count };
    let pb = SampleBatch { statistic: Statistic::P, params, seed, values: pairs.iter().map(|x| x.1).collect(), count };
    Ok(SpectrumBatch { g, p: pb })
}

/// tau_W = (1/n) sum 1/x_j where x = 1/tau follows the Laguerre weight
/// x^omega e^{-beta n x / 2}. With L = B B^T, B lower bidiagonal with
/// diagonal chi_{2a - beta j} and subdiagonal chi_{beta (n-1-j)},
/// a = omega + 1 + beta (n-1)/2, the eigenvalues of L are beta n x, so
/// tau_W = beta * ||B^{-1}||_F^2.
pub fn sample_delay_times(p: &DelayParams, count: usize, seed: u64) -> Result<SampleBatch> {
    if count == 0 {
        return Err(Error::InvalidCount(count));
    }
    let n = p.n as usize;
    let beta = p.beta as f64;
    let omega = to_f64(&p.omega);
    if omega <= -1.0 {
        return Err(Error::InvalidParams(format!("omega = {omega} must exceed -1")));
    }
    let a = omega + 1.0 + beta * (n as f64 - 1.0) / 2.0;
    let values = run_chunks(count, seed, |rng, want| {
        let mut out = Vec::with_capacity(want);
        let mut d = vec![0.0; n];
        let mut s = vec![0.0; n];
        for _ in 0..want {
            for j in 0..n {
                d[j] = chi(rng, 2.0 * a - beta * j as f64)?;
                if j + 1 < n {
                    s[j] = chi(rng, beta * (n - 1 - j) as f64)?;
                }
            }
            out.push(beta * inverse_bidiagonal_frobenius2(&d, &s));
        }
        Ok(out)
    })?;
    Ok(SampleBatch { statistic: Statistic::TauW, params: SampleParams::Delay(p.clone()), seed, values, count })
}

/// ||B^{-1}||_F^2 for B lower bidiagonal with diagonal d and subdiagonal s
/// (s[j] at position (j+1, j)).
fn inverse_bidiagonal_frobenius2(d: &[f64], s: &[f64]) -> f64 {
    let n = d.len();
    let mut total = 0.0;
    // Column j of B^{-1}: forward substitution.
    for j in 0..n {
        let mut x = 1.0 / d[j];
        total += x * x;
        for i in j + 1..n {
            x = -s[i - 1] * x / d[i];
            total += x * x;
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulantEstimate {
    pub order: usize,
    pub value: f64,
    pub std_error: f64,
}

/// All set partitions of {0..m-1} as lists of blocks.
fn set_partitions(m: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out: Vec<Vec<Vec<usize>>> = vec![vec![]];
    for e in 0..m {
        let mut next = Vec::new();
        for part in &out {
            for b in 0..part.len() {
                let mut q = part.clone();
                q[b].push(e);
                next.push(q);
            }
            let mut q = part.clone();
            q.push(vec![e]);
            next.push(q);
        }
        out = next;
    }
    out
}

fn factorial_f(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Linear form over power sums: coefficient and list of power-sum exponents.
type Poly = Vec<(f64, Vec<usize>)>;

/// sum over distinct indices of prod_j x_{i_j}^{e_j}, written in power sums.
fn distinct_sum(e: &[usize]) -> Poly {
    set_partitions(e.len())
        .into_iter()
        .map(|sig| {
            let mut c = 1.0;
            let mut pw = Vec::new();
            for blk in &sig {
                let sz = blk.len();
                c *= if sz % 2 == 1 { 1.0 } else { -1.0 } * factorial_f(sz - 1);
                pw.push(blk.iter().map(|&j| e[j]).sum());
            }
            (c, pw)
        })
        .collect()
}

/// k-statistic k_r as a function of N and power sums S_1..S_r.
struct KStat {
    terms: Vec<(f64, usize, Vec<usize>)>,
}

impl KStat {
    fn new(r: usize) -> Self {
        let mut terms = Vec::new();
        for pi in set_partitions(r) {
            let nb = pi.len();
            let c = if nb % 2 == 1 { 1.0 } else { -1.0 } * factorial_f(nb - 1);
            let sizes: Vec<usize> = pi.iter().map(|b| b.len()).collect();
            for (dc, pw) in distinct_sum(&sizes) {
                terms.push((c * dc, nb, pw));
            }
        }
        KStat { terms }
    }

    fn eval(&self, n: f64, s: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, nb, pw)| {
                let falling: f64 = (0..*nb).map(|i| n - i as f64).product();
                c * pw.iter().map(|&e| s[e]).product::<f64>() / falling
            })
            .sum()
    }
}

/// Unbiased k-statistics k_1..k_max with leave-one-out jackknife standard errors.
pub fn estimate_cumulants(batch: &SampleBatch, max_order: usize) -> Result<Vec<CumulantEstimate>> {
    estimate_cumulants_of(&batch.values, max_order)
}

pub fn estimate_cumulants_of(values: &[f64], max_order: usize) -> Result<Vec<CumulantEstimate>> {
    if max_order == 0 || max_order > 5 {
        return Err(Error::InvalidOrder(format!("max order must be in 1..=5, got {max_order}")));
    }
    let count = values.len();
    if count <= max_order + 1 {
        return Err(Error::InsufficientSamples { count, order: max_order });
    }
    let n = count as f64;
    let shift = values.iter().sum::<f64>() / n;
    let mut s = vec![0.0; max_order + 1];
    for &x in values {
        let y = x - shift;
        let mut pw = 1.0;
        for e in s.iter_mut().skip(1) {
            pw *= y;
            *e += pw;
        }
    }
    s[0] = n;
    let mut out = Vec::with_capacity(max_order);
    for r in 1..=max_order {
        let ks = KStat::new(r);
        let full = ks.eval(n, &s);
        let mut loo = Vec::with_capacity(count);
        let mut sl = s.clone();
        for &x in values {
            let y = x - shift;
            let mut pw = 1.0;
            for e in 1..=r {
                pw *= y;
                sl[e] = s[e] - pw;
            }
            loo.push(ks.eval(n - 1.0, &sl));
        }
        let mean = loo.iter().sum::<f64>() / n;
        let var = loo.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() * (n - 1.0) / n;
        let value = if r == 1 { full + shift } else { full };
        out.push(CumulantEstimate { order: r, value, std_error: var.sqrt() });
    }
    Ok(out)
}

fn hermite(m: usize, z: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, z);
    if m == 0 {
        return h0;
    }
    for k in 1..m {
        let h2 = z * h1 - k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Edgeworth density from five cumulants, in the units of x:
/// phi(z)/sigma [1 + g3 He3/6 + g4 He4/24 + g3^2 He6/72
///   + g5 He5/120 + g3 g4 He7/144 + g3^3 He9/1296], g_r = K_r / sigma^r.
pub fn edgeworth_density(k: &[f64; 5], grid: &[f64]) -> Result<Vec<f64>> {
    if !(k[1] > 0.0) || !k[1].is_finite() {
        return Err(Error::InvalidVariance(k[1]));
    }
    let sigma = k[1].sqrt();
    let g3 = k[2] / sigma.powi(3);
    let g4 = k[3] / sigma.powi(4);
    let g5 = k[4] / sigma.powi(5);
    Ok(grid
        .iter()
        .map(|&x| {
            let z = (x - k[0]) / sigma;
            let corr = 1.0
                + g3 * hermite(3, z) / 6.0
                + g4 * hermite(4, z) / 24.0
                + g3 * g3 * hermite(6, z) / 72.0
                + g5 * hermite(5, z) / 120.0
                + g3 * g4 * hermite(7, z) / 144.0
                + g3 * g3 * g3 * hermite(9, z) / 1296.0;
            normal_pdf(z) * corr / sigma
        })
        .collect())
}

pub fn gaussian_density(mean: f64, var: f64, grid: &[f64]) -> Result<Vec<f64>> {
    if !(var > 0.0) || !var.is_finite() {
        return Err(Error::InvalidVariance(var));
    }
    let sigma = var.sqrt();
    Ok(grid.iter().map(|&x| normal_pdf((x - mean) / sigma) / sigma).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramComparison {
    pub edges: Vec<f64>,
    pub centers: Vec<f64>,
    pub histogram: Vec<f64>,
    pub edgeworth: Vec<f64>,
    pub gaussian: Vec<f64>,
    pub sup_edgeworth: f64,
    pub sup_gaussian: f64,
}

/// Histogram density of `values` on `bins` equal bins over [lo, hi], each
/// bin compared with the bin averages of the Edgeworth and Gaussian curves.
pub fn histogram_comparison(values: &[f64], k: &[f64; 5], lo: f64, hi: f64, bins: usize) -> Result<HistogramComparison> {
    if bins == 0 || !(hi > lo) {
        return Err(Error::InvalidParams("need bins > 0 and hi > lo".into()));
    }
    if values.is_empty() {
        return Err(Error::InvalidCount(0));
    }
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in values {
        if x >= lo && x < hi {
            counts[(((x - lo) / w) as usize).min(bins - 1)] += 1;
        }
    }
    let total = values.len() as f64;
    let histogram: Vec<f64> = counts.iter().map(|&c| c as f64 / (total * w)).collect();
    let edges: Vec<f64> = (0..=bins).map(|i| lo + w * i as f64).collect();
    let centers: Vec<f64> = (0..bins).map(|i| lo + w * (i as f64 + 0.5)).collect();
    // Bin averages by 16-point midpoint rule.
    const SUB: usize = 16;
    let fine: Vec<f64> = (0..bins * SUB).map(|i| lo + w * (i as f64 + 0.5) / SUB as f64).collect();
    let ef = edgeworth_density(k, &fine)?;
    let gf = gaussian_density(k[0], k[1], &fine)?;
    let avg = |f: &[f64]| -> Vec<f64> { f.chunks(SUB).map(|c| c.iter().sum::<f64>() / SUB as f64).collect() };
    let edgeworth = avg(&ef);
    let gaussian = avg(&gf);
    let sup = |c: &[f64]| histogram.iter().zip(c).map(|(h, v)| (h - v).abs()).fold(0.0, f64::max);
    Ok(HistogramComparison {
        sup_edgeworth: sup(&edgeworth),
        sup_gaussian: sup(&gaussian),
        edges,
        centers,
        histogram,
        edgeworth,
        gaussian,
    })
}
