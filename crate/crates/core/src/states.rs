//! Spin product states, their superpositions, and the canonical state classes.
//!
//! Bit convention: bit `j` of a [`ProductState`] describes quantum dot `j + 1`;
//! a cleared bit is spin up (`1`), a set bit is spin down (`1̄`). Strings are
//! written most significant qubit first (`l_n … l_1`) with `1` for up and `-`
//! for down, so `"11-"` is the state with only the first dot flipped.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::{Error, Result};

/// Largest qubit count that fits one machine word.
pub const MAX_QUBITS: usize = 63;

/// Largest number of basis terms an enumerating constructor will build.
pub const MAX_TERMS: u64 = 1 << 24;

/// Largest `n` accepted by [`SuperposedState::full_superposition`].
pub const MAX_FULL_QUBITS: usize = 24;

const NORM_TOL: f64 = 1e-12;

/// Tolerance on `Σ|d_r|²` accepted by the text parser.
pub const PARSE_NORM_TOL: f64 = 1e-9;

/// Binomial coefficient, `None` on `u64` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Binomial coefficient as a float; exact for every value below 2^53.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    match binomial(n, k) {
        Some(c) => c as f64,
        None => {
            let k = k.min(n - k);
            (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        }
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("qubit count must be at least 1"));
    }
    if n > MAX_QUBITS {
        return Err(Error::Capacity {
            what: "qubit count",
            requested: n as u64,
            limit: MAX_QUBITS as u64,
        });
    }
    Ok(())
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A spin configuration of `n` qubits packed into one word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductState {
    n: u8,
    bits: u64,
}

impl ProductState {
    pub fn new(n: usize, bits: u64) -> Result<Self> {
        check_qubits(n)?;
        if bits & !mask(n) != 0 {
            return Err(Error::invalid(format!(
                "bit pattern {bits:#x} has bits set above qubit {n}"
            )));
        }
        Ok(ProductState { n: n as u8, bits })
    }

    pub fn all_up(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    pub fn all_down(n: usize) -> Result<Self> {
        Self::new(n, mask(n))
    }

    /// Build from spin values `l_1, …, l_n` (each `+1` or `-1`).
    pub fn from_spins(spins: &[i8]) -> Result<Self> {
        let mut bits = 0u64;
        for (j, &l) in spins.iter().enumerate() {
            match l {
                1 => {}
                -1 => bits |= 1 << j,
                _ => return Err(Error::invalid(format!("spin value {l} is not ±1"))),
            }
        }
        Self::new(spins.len(), bits)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Zeeman manifold index: the number of down spins.
    #[inline]
    pub fn down_count(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn manifold(&self) -> ManifoldIndex {
        ManifoldIndex {
            n: self.n(),
            k: self.down_count(),
        }
    }

    /// Spin value `l_j` of qubit `j` (zero based), `+1` or `-1`.
    #[inline]
    pub fn spin(&self, j: usize) -> i8 {
        if self.bits >> j & 1 == 1 {
            -1
        } else {
            1
        }
    }

    /// Number of positions where the spins differ. Caller guarantees equal `n`.
    #[inline]
    pub(crate) fn distance_unchecked(&self, other: &ProductState) -> u32 {
        (self.bits ^ other.bits).count_ones()
    }

    /// Apply a permutation of qubit positions: qubit `j` moves to `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n() {
            return Err(Error::invalid("permutation length differs from qubit count"));
        }
        let mut seen = vec![false; self.n()];
        let mut bits = 0u64;
        for (j, &p) in perm.iter().enumerate() {
            if p >= self.n() || seen[p] {
                return Err(Error::invalid("not a permutation"));
            }
            seen[p] = true;
            bits |= (self.bits >> j & 1) << p;
        }
        Self::new(self.n(), bits)
    }
}

impl fmt::Display for ProductState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in (0..self.n()).rev() {
            let c = if self.bits >> j & 1 == 1 { '-' } else { '1' };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for ProductState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n = s.chars().count();
        let mut bits = 0u64;
        for (pos, c) in s.chars().enumerate() {
            let j = n - 1 - pos;
            match c {
                '1' => {}
                '-' => bits |= 1 << j,
                _ => {
                    return Err(Error::invalid(format!(
                        "unexpected character {c:?} in bitstring {s:?}"
                    )))
                }
            }
        }
        Self::new(n, bits)
    }
}

/// A Zeeman manifold: all product states of `n` qubits with `k` spins down.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ManifoldIndex {
    n: usize,
    k: usize,
}

impl ManifoldIndex {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        check_qubits(n)?;
        if k > n {
            return Err(Error::invalid(format!("manifold index k={k} exceeds n={n}")));
        }
        Ok(ManifoldIndex { n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `C(n, k)`, saturating at `u64::MAX`.
    pub fn size(&self) -> u64 {
        binomial(self.n as u64, self.k as u64).unwrap_or(u64::MAX)
    }

    /// Every basis state in the manifold, in increasing bit order.
    pub fn states(&self) -> ManifoldIter {
        let first = if self.k == 0 { 0 } else { mask(self.k) };
        ManifoldIter {
            n: self.n as u8,
            next: Some(first),
            limit: mask(self.n),
        }
    }
}

/// Iterates fixed-popcount words with Gosper's hack.
#[derive(Clone, Debug)]
pub struct ManifoldIter {
    n: u8,
    next: Option<u64>,
    limit: u64,
}

impl Iterator for ManifoldIter {
    type Item = ProductState;

    fn next(&mut self) -> Option<ProductState> {
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur.wrapping_add(c);
            // overflow of the top bit means we just emitted the last word
            if r == 0 {
                None
            } else {
                let nxt = (((r ^ cur) >> 2) / c) | r;
                (nxt <= self.limit).then_some(nxt)
            }
        };
        Some(ProductState {
            n: self.n,
            bits: cur,
        })
    }
}

/// A normalized superposition `Σ d_r |x_r⟩` over distinct product states.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperposedState {
    n: usize,
    terms: Vec<(C64, ProductState)>,
}

impl SuperposedState {
    /// Validate and wrap a term list. `Σ|d_r|²` must equal one within 1e-12.
    pub fn new(terms: Vec<(C64, ProductState)>) -> Result<Self> {
        Self::with_tolerance(terms, NORM_TOL)
    }

    /// Rescale arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(mut terms: Vec<(C64, ProductState)>) -> Result<Self> {
        let norm: f64 = terms.iter().map(|(d, _)| d.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("amplitudes have zero or non-finite norm"));
        }
        for (d, _) in terms.iter_mut() {
            *d /= norm;
        }
        Self::with_tolerance(terms, NORM_TOL)
    }

    fn with_tolerance(terms: Vec<(C64, ProductState)>, tol: f64) -> Result<Self> {
        let n = match terms.first() {
            Some((_, x)) => x.n(),
            None => return Err(Error::invalid("a state needs at least one term")),
        };
        let mut seen = HashSet::with_capacity(terms.len());
        for (d, x) in &terms {
            if x.n() != n {
                return Err(Error::invalid(format!(
                    "basis {x} has {} qubits, expected {n}",
                    x.n()
                )));
            }
            if !(d.re.is_finite() && d.im.is_finite()) {
                return Err(Error::invalid("non-finite amplitude"));
            }
            if !seen.insert(x.bits()) {
                return Err(Error::invalid(format!("duplicate basis state {x}")));
            }
        }
        let norm: f64 = terms.iter().map(|(d, _)| d.norm_sqr()).sum();
        if (norm - 1.0).abs() > tol {
            return Err(Error::invalid(format!(
                "amplitudes are not normalized: Σ|d|² = {norm}"
            )));
        }
        Ok(SuperposedState { n, terms })
    }

    pub fn product(x: ProductState) -> Self {
        SuperposedState {
            n: x.n(),
            terms: vec![(C64::new(1.0, 0.0), x)],
        }
    }

    /// `(|1⟩^⊗n + |1̄⟩^⊗n)/√2`.
    pub fn ghz(n: usize) -> Result<Self> {
        let a = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::new(vec![
            (a, ProductState::all_up(n)?),
            (a, ProductState::all_down(n)?),
        ])
    }

    /// Equal-weight superposition of every basis state in manifold `k`.
    pub fn w_generalized(n: usize, k: usize) -> Result<Self> {
        let manifold = ManifoldIndex::new(n, k)?;
        let size = manifold.size();
        if size > MAX_TERMS {
            return Err(Error::Capacity {
                what: "manifold size",
                requested: size,
                limit: MAX_TERMS,
            });
        }
        let a = C64::new(1.0 / (size as f64).sqrt(), 0.0);
        Self::new(manifold.states().map(|x| (a, x)).collect())
    }

    /// The standard W state, manifold `k = 1`.
    pub fn w(n: usize) -> Result<Self> {
        Self::w_generalized(n, 1)
    }

    /// One basis state per manifold `r = 1..=n`: term `r` has its lowest `r`
    /// qubits down, so terms `r` and `r + j` differ in exactly `j` spins.
    pub fn ladder(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let a = C64::new(1.0 / (n as f64).sqrt(), 0.0);
        let terms = (1..=n)
            .map(|r| ProductState::new(n, mask(r)).map(|x| (a, x)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(terms)
    }

    /// `[(|1⟩ + |1̄⟩)/√2]^⊗n`, all `2^n` basis states with equal weight.
    pub fn full_superposition(n: usize) -> Result<Self> {
        check_qubits(n)?;
        if n > MAX_FULL_QUBITS {
            return Err(Error::Capacity {
                what: "full superposition qubits",
                requested: n as u64,
                limit: MAX_FULL_QUBITS as u64,
            });
        }
        let a = C64::new((0.5f64).powf(n as f64 / 2.0), 0.0);
        let terms = (0..1u64 << n)
            .map(|bits| (a, ProductState { n: n as u8, bits }))
            .collect();
        Self::new(terms)
    }

    /// `d1|1…1⟩ + d2|k⟩` where `|k⟩` has its lowest `k` qubits down.
    pub fn two_state(n: usize, k: usize, d1: C64, d2: C64) -> Result<Self> {
        check_qubits(n)?;
        if k == 0 || k > n {
            return Err(Error::invalid(format!("need 1 ≤ k ≤ n, got k={k}, n={n}")));
        }
        Self::new(vec![
            (d1, ProductState::all_up(n)?),
            (d2, ProductState::new(n, mask(k))?),
        ])
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of terms `m`.
    #[inline]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(C64, ProductState)] {
        &self.terms
    }

    pub fn bases(&self) -> impl Iterator<Item = ProductState> + '_ {
        self.terms.iter().map(|(_, x)| *x)
    }

    /// Populations `|d_r|²` in term order.
    pub fn populations(&self) -> Vec<f64> {
        self.terms.iter().map(|(d, _)| d.norm_sqr()).collect()
    }

    /// Number of terms with non-zero amplitude.
    pub fn support(&self) -> usize {
        self.terms.iter().filter(|(d, _)| d.norm_sqr() > 0.0).count()
    }

    /// Multiply each amplitude by `e^{iφ_r}`.
    pub fn with_phases(&self, phases: &[f64]) -> Result<Self> {
        if phases.len() != self.len() {
            return Err(Error::invalid("one phase per term required"));
        }
        let terms = self
            .terms
            .iter()
            .zip(phases)
            .map(|((d, x), &phi)| (d * C64::from_polar(1.0, phi), *x))
            .collect();
        Ok(SuperposedState { n: self.n, terms })
    }

    /// Apply the same qubit permutation to every basis state.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|(d, x)| x.permuted(perm).map(|y| (*d, y)))
            .collect::<Result<Vec<_>>>()?;
        Ok(SuperposedState { n: self.n, terms })
    }

    /// Terms lying in manifold `k`, renormalized; `None` when there are none.
    pub fn project_manifold(&self, k: usize) -> Option<Self> {
        let terms: Vec<_> = self
            .terms
            .iter()
            .filter(|(_, x)| x.down_count() == k)
            .cloned()
            .collect();
        if terms.is_empty() {
            None
        } else {
            Self::normalized(terms).ok()
        }
    }

    /// Serialize as one `re im bitstring` line per term.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (d, x) in &self.terms {
            out.push_str(&format!("{} {} {}\n", d.re, d.im, x));
        }
        out
    }

    /// Parse the line format written by [`SuperposedState::to_text`]. Blank
    /// lines and `#` comments are skipped. The amplitudes must be normalized
    /// within [`PARSE_NORM_TOL`] and are then rescaled to unit norm.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { line: line_no, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(parse_err(format!(
                    "expected `re im bitstring`, got {} fields",
                    fields.len()
                )));
            }
            let re: f64 = fields[0]
                .parse()
                .map_err(|e| parse_err(format!("real part: {e}")))?;
            let im: f64 = fields[1]
                .parse()
                .map_err(|e| parse_err(format!("imaginary part: {e}")))?;
            let x: ProductState = fields[2].parse().map_err(|e: Error| parse_err(e.to_string()))?;
            if !seen.insert((x.n(), x.bits())) {
                return Err(parse_err(format!("duplicate bitstring {}", fields[2])));
            }
            terms.push((C64::new(re, im), x));
        }
        if terms.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "no terms".into(),
            });
        }
        let norm: f64 = terms.iter().map(|(d, _)| d.norm_sqr()).sum();
        if (norm - 1.0).abs() > PARSE_NORM_TOL {
            return Err(Error::Parse {
                line: 0,
                msg: format!("amplitudes are not normalized: Σ|d|² = {norm}"),
            });
        }
        Self::normalized(terms)
    }
}
