//! Pair-distance statistics of a superposed state.
//!
//! For populations `p_r = |d_r|²` the weight at distance `j` is
//! `w_j = Σ p_k p_r` over unordered pairs `k < r` whose bases differ in `j`
//! spins. Two backends compute it: direct enumeration of pairs with a popcount
//! per pair, and a Walsh–Hadamard autocorrelation of the dense population
//! vector for states that cover a large fraction of the Hilbert space.

use rayon::prelude::*;

use super::StateClass;
use crate::states::{binomial_f64, ProductState, SuperposedState, MAX_FULL_QUBITS};
use crate::{Error, Result};

/// Pairwise population weights bucketed by Hamming distance.
#[derive(Clone, Debug, PartialEq)]
pub struct PairHistogram {
    n: usize,
    diag: f64,
    // index j holds w_j; index 0 is always zero
    weights: Vec<f64>,
}

impl PairHistogram {
    pub(crate) fn from_parts(n: usize, diag: f64, mut weights: Vec<f64>) -> Self {
        debug_assert_eq!(weights.len(), n + 1);
        weights[0] = 0.0;
        PairHistogram { n, diag, weights }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `Σ_r |d_r|⁴`, the large-time floor of `F²`.
    pub fn diag(&self) -> f64 {
        self.diag
    }

    /// Weight at distance `j`; zero outside `1..=n`.
    pub fn weight(&self, j: usize) -> f64 {
        self.weights.get(j).copied().unwrap_or(0.0)
    }

    /// Non-zero `(j, w_j)` entries in increasing `j`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &w)| w > 0.0)
            .map(|(j, &w)| (j, w))
    }

    /// `diag + 2 Σ w_j`, equal to one for a normalized state.
    pub fn total(&self) -> f64 {
        self.diag + 2.0 * self.weights.iter().sum::<f64>()
    }

    /// `Σ_j j·w_j`, the population-weighted mean pair distance.
    pub fn first_moment(&self) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(j, w)| j as f64 * w)
            .sum()
    }
}

/// Hamming distance between two bases of the same qubit count.
pub fn hamming(a: &ProductState, b: &ProductState) -> Result<u32> {
    if a.n() != b.n() {
        return Err(Error::invalid(format!(
            "qubit counts differ: {} vs {}",
            a.n(),
            b.n()
        )));
    }
    Ok(a.distance_unchecked(b))
}

/// Which algorithm [`pair_histogram_with`] uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HistogramBackend {
    /// Pick the cheaper of the two for this state.
    Auto,
    /// O(m²) enumeration of unordered pairs.
    Pairs,
    /// O(2ⁿ·n) autocorrelation; requires `n ≤ 24`.
    Walsh,
}

pub fn pair_histogram(x: &SuperposedState) -> PairHistogram {
    pair_histogram_with(x, HistogramBackend::Auto).expect("auto backend is infallible")
}

pub fn pair_histogram_with(x: &SuperposedState, backend: HistogramBackend) -> Result<PairHistogram> {
    let backend = match backend {
        HistogramBackend::Auto => {
            let m = x.len() as f64;
            let n = x.n();
            if n <= MAX_FULL_QUBITS && m * m > 4.0 * (n as f64 + 1.0) * (1u64 << n) as f64 {
                HistogramBackend::Walsh
            } else {
                HistogramBackend::Pairs
            }
        }
        b => b,
    };
    match backend {
        HistogramBackend::Walsh => walsh_histogram(x),
        _ => Ok(enumerate_pairs(x)),
    }
}

const ROW_BLOCK: usize = 64;

fn enumerate_pairs(x: &SuperposedState) -> PairHistogram {
    let n = x.n();
    let pops = x.populations();
    let bits: Vec<u64> = x.bases().map(|b| b.bits()).collect();
    let m = pops.len();
    let diag = pops.iter().map(|p| p * p).sum();

    // fixed row blocks summed in order keep the result independent of
    // the thread count
    let partials: Vec<Vec<f64>> = (0..m.div_ceil(ROW_BLOCK))
        .into_par_iter()
        .map(|blk| {
            let mut w = vec![0.0; n + 1];
            let mut row = vec![0.0; n + 1];
            for a in blk * ROW_BLOCK..((blk + 1) * ROW_BLOCK).min(m) {
                let ba = bits[a];
                row.fill(0.0);
                for b in a + 1..m {
                    row[(ba ^ bits[b]).count_ones() as usize] += pops[b];
                }
                for (acc, r) in w.iter_mut().zip(&row) {
                    *acc += pops[a] * r;
                }
            }
            w
        })
        .collect();
    let mut weights = vec![0.0; n + 1];
    for part in &partials {
        for (acc, v) in weights.iter_mut().zip(part) {
            *acc += v;
        }
    }
    PairHistogram::from_parts(n, diag, weights)
}

fn walsh_hadamard(a: &mut [f64]) {
    let mut h = 1;
    while h < a.len() {
        for chunk in a.chunks_mut(2 * h) {
            let (lo, hi) = chunk.split_at_mut(h);
            for (u, v) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = (*u + *v, *u - *v);
                *u = s;
                *v = d;
            }
        }
        h *= 2;
    }
}

fn walsh_histogram(x: &SuperposedState) -> Result<PairHistogram> {
    let n = x.n();
    if n > MAX_FULL_QUBITS {
        return Err(Error::Capacity {
            what: "dense histogram qubits",
            requested: n as u64,
            limit: MAX_FULL_QUBITS as u64,
        });
    }
    let size = 1usize << n;
    let mut a = vec![0.0; size];
    for (d, b) in x.terms() {
        a[b.bits() as usize] = d.norm_sqr();
    }
    walsh_hadamard(&mut a);
    for v in a.iter_mut() {
        *v *= *v;
    }
    walsh_hadamard(&mut a);
    // a[d] / size = Σ_x p_x p_{x⊕d}, the ordered autocorrelation
    let scale = 1.0 / size as f64;
    let mut weights = vec![0.0; n + 1];
    for (delta, v) in a.iter().enumerate().skip(1) {
        weights[delta.count_ones() as usize] += v * scale;
    }
    for w in weights.iter_mut() {
        *w = (*w * 0.5).max(0.0);
    }
    let diag = x.populations().iter().map(|p| p * p).sum();
    Ok(PairHistogram::from_parts(n, diag, weights))
}

/// Histogram of a structured state from binomial counts, without enumeration.
///
/// Supported: [`StateClass::GeneralizedW`] and [`StateClass::Full`].
pub fn pair_histogram_closed_form(class: &StateClass) -> Result<PairHistogram> {
    class.validate()?;
    match *class {
        StateClass::GeneralizedW { n, k } => {
            let c = binomial_f64(n as u64, k as u64);
            let mut weights = vec![0.0; n + 1];
            // a fixed basis has C(n−k, j)·C(k, j) partners at distance 2j
            for j in 1..=k.min(n - k) {
                let partners = binomial_f64((n - k) as u64, j as u64) * binomial_f64(k as u64, j as u64);
                weights[2 * j] = 0.5 * c * partners / (c * c);
            }
            Ok(PairHistogram::from_parts(n, 1.0 / c, weights))
        }
        StateClass::Full { n } => {
            // unordered pairs at distance j: 2^{n−1}·C(n, j), each weighted 4^{−n}
            let inv = 0.5f64.powi(n as i32 + 1);
            let weights = (0..=n)
                .map(|j| binomial_f64(n as u64, j as u64) * inv)
                .collect();
            Ok(PairHistogram::from_parts(n, 0.5f64.powi(n as i32), weights))
        }
        _ => Err(Error::invalid(format!(
            "no closed-form histogram for case {}",
            class.label()
        ))),
    }
}

/// `𝓑 = 2 Σ_{k<r} |d_k|²|d_r|² B_kr` with `B_kr = 4·j_kr`.
pub fn script_b(hist: &PairHistogram) -> f64 {
    8.0 * hist.first_moment()
}

/// `Σ_{k<r} p_k p_r j_kr` computed from single-qubit marginals.
///
/// Summing the pair distance qubit by qubit gives `Σ_q P_q (1 − P_q)` where
/// `P_q` is the total population with qubit `q` down; this is O(m·n).
pub fn mean_pair_distance(x: &SuperposedState) -> f64 {
    let n = x.n();
    let mut down = vec![0.0; n];
    for (d, b) in x.terms() {
        let p = d.norm_sqr();
        let mut bits = b.bits();
        while bits != 0 {
            down[bits.trailing_zeros() as usize] += p;
            bits &= bits - 1;
        }
    }
    // the total population may differ from one by rounding
    let total: f64 = x.populations().iter().sum();
    down.iter().map(|&pq| pq * (total - pq)).sum()
}

/// [`script_b`] evaluated through [`mean_pair_distance`].
pub fn script_b_of_state(x: &SuperposedState) -> f64 {
    8.0 * mean_pair_distance(x)
}
