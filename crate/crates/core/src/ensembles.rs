//! Seeded random-state families and their deviation from closed-form ratios.
//!
//! Every sample is drawn from its own ChaCha8 stream: the key is the ensemble
//! seed and the stream number is the sample index. Sample `i` therefore does
//! not depend on how many samples exist or on which thread draws it.

use num_complex::Complex64 as C64;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dephasing::{closed_form_ratio, ratio_analytic, DecayKernel, Ratio, StateClass};
use crate::states::{ManifoldIndex, ProductState, SuperposedState, MAX_FULL_QUBITS, MAX_TERMS};
use crate::{Error, Result};

/// Default number of samples per ensemble.
pub const DEFAULT_COUNT: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum EnsembleFamily {
    /// Every basis of manifold `k`, random amplitudes.
    RandomInManifold { n: usize, k: usize },
    /// One uniformly chosen basis from each manifold `1..=n`, random amplitudes.
    RandomCrossManifold { n: usize },
    /// The ladder bases, random amplitudes.
    LadderRandomWeights { n: usize },
    /// All `2ⁿ` bases, random amplitudes.
    FullBasisRandomWeights { n: usize },
}

impl EnsembleFamily {
    pub fn n(&self) -> usize {
        match *self {
            EnsembleFamily::RandomInManifold { n, .. }
            | EnsembleFamily::RandomCrossManifold { n }
            | EnsembleFamily::LadderRandomWeights { n }
            | EnsembleFamily::FullBasisRandomWeights { n } => n,
        }
    }

    pub fn k(&self) -> Option<usize> {
        match *self {
            EnsembleFamily::RandomInManifold { k, .. } => Some(k),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnsembleFamily::RandomInManifold { .. } => "random_in_manifold",
            EnsembleFamily::RandomCrossManifold { .. } => "random_cross_manifold",
            EnsembleFamily::LadderRandomWeights { .. } => "ladder_random_weights",
            EnsembleFamily::FullBasisRandomWeights { .. } => "full_basis_random_weights",
        }
    }

    /// The equal-weight class whose closed form is the reference.
    pub fn reference_class(&self) -> StateClass {
        match *self {
            EnsembleFamily::RandomInManifold { n, k } => StateClass::GeneralizedW { n, k },
            EnsembleFamily::RandomCrossManifold { n } | EnsembleFamily::LadderRandomWeights { n } => {
                StateClass::Ladder { n }
            }
            EnsembleFamily::FullBasisRandomWeights { n } => StateClass::Full { n },
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.n();
        match *self {
            EnsembleFamily::RandomInManifold { k, .. } => {
                let m = ManifoldIndex::new(n, k)?;
                if k == 0 || k == n {
                    return Err(Error::invalid(format!(
                        "manifold k={k} of n={n} holds a single basis and does not decohere"
                    )));
                }
                if m.size() > MAX_TERMS {
                    return Err(Error::Capacity {
                        what: "manifold size",
                        requested: m.size(),
                        limit: MAX_TERMS,
                    });
                }
            }
            EnsembleFamily::RandomCrossManifold { .. } | EnsembleFamily::LadderRandomWeights { .. } => {
                ManifoldIndex::new(n, 0)?;
                if n < 2 {
                    return Err(Error::invalid("cross-manifold families need n ≥ 2"));
                }
            }
            EnsembleFamily::FullBasisRandomWeights { .. } => {
                ManifoldIndex::new(n, 0)?;
                if n > MAX_FULL_QUBITS {
                    return Err(Error::Capacity {
                        what: "full basis qubits",
                        requested: n as u64,
                        limit: MAX_FULL_QUBITS as u64,
                    });
                }
            }
        }
        Ok(())
    }
}

/// How sample amplitudes are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeLaw {
    /// Independent standard complex normals, normalized: uniform on the
    /// complex unit sphere.
    #[default]
    ComplexGaussian,
    /// Equal real amplitudes; reproduces the reference state exactly.
    Equal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub family: EnsembleFamily,
    pub count: usize,
    pub seed: u64,
    #[serde(default)]
    pub amplitudes: AmplitudeLaw,
}

impl EnsembleSpec {
    pub fn new(family: EnsembleFamily, count: usize, seed: u64) -> Self {
        EnsembleSpec {
            family,
            count,
            seed,
            amplitudes: AmplitudeLaw::ComplexGaussian,
        }
    }

    pub fn with_amplitudes(mut self, law: AmplitudeLaw) -> Self {
        self.amplitudes = law;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::invalid("ensemble count must be at least 1"));
        }
        self.family.validate()
    }
}

/// RNG for sample `index` of an ensemble keyed by `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn amplitudes(law: AmplitudeLaw, m: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    match law {
        AmplitudeLaw::Equal => vec![C64::new(1.0, 0.0); m],
        AmplitudeLaw::ComplexGaussian => (0..m)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                C64::new(re, im)
            })
            .collect(),
    }
}

fn random_basis(n: usize, k: usize, rng: &mut ChaCha8Rng) -> ProductState {
    let bits = index::sample(rng, n, k)
        .into_iter()
        .fold(0u64, |acc, q| acc | 1 << q);
    ProductState::new(n, bits).expect("positions below n")
}

/// Draw sample `index` of the ensemble. Deterministic in `(spec, index)`.
pub fn sample_state(spec: &EnsembleSpec, index: usize) -> Result<SuperposedState> {
    spec.validate()?;
    if index >= spec.count {
        return Err(Error::invalid(format!(
            "sample index {index} out of range for count {}",
            spec.count
        )));
    }
    let mut rng = sample_rng(spec.seed, index as u64);
    let bases: Vec<ProductState> = match spec.family {
        EnsembleFamily::RandomInManifold { n, k } => ManifoldIndex::new(n, k)?.states().collect(),
        EnsembleFamily::RandomCrossManifold { n } => {
            (1..=n).map(|k| random_basis(n, k, &mut rng)).collect()
        }
        EnsembleFamily::LadderRandomWeights { n } => SuperposedState::ladder(n)?.bases().collect(),
        EnsembleFamily::FullBasisRandomWeights { n } => (0..1u64 << n)
            .map(|b| ProductState::new(n, b))
            .collect::<Result<_>>()?,
    };
    let amps = amplitudes(spec.amplitudes, bases.len(), &mut rng);
    SuperposedState::normalized(amps.into_iter().zip(bases).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRatio {
    pub index: usize,
    pub ratio: f64,
}

/// Spread of random-state ratios around the closed-form reference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationStats {
    pub family: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub case: String,
    pub nu: f64,
    pub reference: f64,
    pub max_abs_dev: f64,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<SampleRatio>>,
}

impl DeviationStats {
    pub const CSV_HEADER: &'static str = "n,k,case,reference,max_abs_dev,mean,std,count,seed";

    /// One row matching [`DeviationStats::CSV_HEADER`]; `k` is empty when absent.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n,
            self.k.map(|k| k.to_string()).unwrap_or_default(),
            self.case,
            self.reference,
            self.max_abs_dev,
            self.mean,
            self.std,
            self.count,
            self.seed
        )
    }

    pub fn without_samples(mut self) -> Self {
        self.samples = None;
        self
    }
}

/// Ratios of every sample compared with the reference class at exponent `ν`.
///
/// Samples are evaluated in parallel and reduced in index order, so the
/// statistics are bit-identical for any thread count.
pub fn deviation_stats(spec: &EnsembleSpec, nu: f64) -> Result<DeviationStats> {
    spec.validate()?;
    let kernel = DecayKernel::new(nu, 1.0)?;
    let class = spec.family.reference_class();
    let reference = match closed_form_ratio(&class, nu)?.exact().map(|r| r.ratio) {
        Some(Ratio::Finite(r)) => r,
        _ => return Err(Error::invalid("reference class has no finite ratio")),
    };

    let ratios: Vec<f64> = (0..spec.count)
        .into_par_iter()
        .map(|i| {
            let x = sample_state(spec, i)?;
            match ratio_analytic(&x, &kernel).ratio {
                Ratio::Finite(r) => Ok(r),
                Ratio::NoDecoherence => Err(Error::invalid(format!("sample {i} does not decohere"))),
            }
        })
        .collect::<Result<_>>()?;

    let count = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / count;
    let var = if ratios.len() > 1 {
        ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (count - 1.0)
    } else {
        0.0
    };
    let max_abs_dev = ratios
        .iter()
        .map(|r| (r - reference).abs())
        .fold(0.0, f64::max);

    Ok(DeviationStats {
        family: spec.family.name().into(),
        n: spec.family.n(),
        k: spec.family.k(),
        case: class.label().into(),
        nu,
        reference,
        max_abs_dev,
        mean,
        std: var.sqrt(),
        count: spec.count,
        seed: spec.seed,
        samples: Some(
            ratios
                .into_iter()
                .enumerate()
                .map(|(index, ratio)| SampleRatio { index, ratio })
                .collect(),
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_family_keeps_bases() {
        let spec = EnsembleSpec::new(EnsembleFamily::LadderRandomWeights { n: 3 }, 5, 99);
        let ladder: Vec<_> = SuperposedState::ladder(3).unwrap().bases().collect();
        for i in 0..5 {
            let x = sample_state(&spec, i).unwrap();
            assert_eq!(x.bases().collect::<Vec<_>>(), ladder);
        }
    }

    #[test]
    fn in_manifold_samples() {
        let spec = EnsembleSpec::new(EnsembleFamily::RandomInManifold { n: 7, k: 2 }, 100, 1);
        let mut firsts = std::collections::HashSet::new();
        for i in 0..100 {
            let x = sample_state(&spec, i).unwrap();
            assert_eq!(x.len(), 21);
            assert!(x.bases().all(|b| b.down_count() == 2));
            let norm: f64 = x.populations().iter().sum();
            assert!((norm - 1.0).abs() < 1e-12);
            firsts.insert(x.populations()[0].to_bits());
        }
        assert_eq!(firsts.len(), 100);
    }

    #[test]
    fn cross_manifold_one_basis_per_manifold() {
        let spec = EnsembleSpec::new(EnsembleFamily::RandomCrossManifold { n: 9 }, 20, 5);
        for i in 0..20 {
            let x = sample_state(&spec, i).unwrap();
            let ks: Vec<_> = x.bases().map(|b| b.down_count()).collect();
            assert_eq!(ks, (1..=9).collect::<Vec<_>>());
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = EnsembleSpec::new(EnsembleFamily::FullBasisRandomWeights { n: 5 }, 10, 7);
        assert_eq!(sample_state(&spec, 3).unwrap(), sample_state(&spec, 3).unwrap());
        assert_ne!(sample_state(&spec, 3).unwrap(), sample_state(&spec, 4).unwrap());
        let other = EnsembleSpec { seed: 8, ..spec };
        assert_ne!(sample_state(&spec, 3).unwrap(), sample_state(&other, 3).unwrap());
        // a larger ensemble shares its prefix
        let bigger = EnsembleSpec { count: 50, ..spec };
        assert_eq!(sample_state(&spec, 9).unwrap(), sample_state(&bigger, 9).unwrap());
    }

    #[test]
    fn sample_errors() {
        let spec = EnsembleSpec::new(EnsembleFamily::LadderRandomWeights { n: 3 }, 5, 0);
        assert!(sample_state(&spec, 5).is_err());
        let spec = EnsembleSpec::new(EnsembleFamily::LadderRandomWeights { n: 3 }, 0, 0);
        assert!(sample_state(&spec, 0).is_err());
        let spec = EnsembleSpec::new(EnsembleFamily::RandomInManifold { n: 6, k: 0 }, 1, 0);
        assert!(sample_state(&spec, 0).is_err());
        let spec = EnsembleSpec::new(EnsembleFamily::FullBasisRandomWeights { n: 25 }, 1, 0);
        assert!(sample_state(&spec, 0).unwrap_err().is_capacity());
        let spec = EnsembleSpec::new(EnsembleFamily::RandomInManifold { n: 60, k: 20 }, 1, 0);
        assert!(sample_state(&spec, 0).unwrap_err().is_capacity());
    }

    #[test]
    fn equal_weights_recover_reference() {
        for family in [
            EnsembleFamily::LadderRandomWeights { n: 6 },
            EnsembleFamily::RandomInManifold { n: 8, k: 3 },
            EnsembleFamily::FullBasisRandomWeights { n: 7 },
        ] {
            let spec = EnsembleSpec::new(family, 3, 11).with_amplitudes(AmplitudeLaw::Equal);
            let stats = deviation_stats(&spec, 2.0).unwrap();
            assert!(stats.max_abs_dev < 1e-12, "{family:?}: {}", stats.max_abs_dev);
            assert!(stats.std < 1e-12);
        }
    }

    #[test]
    fn stats_are_reproducible() {
        let spec = EnsembleSpec::new(EnsembleFamily::RandomInManifold { n: 9, k: 3 }, 40, 2024);
        let a = deviation_stats(&spec, 2.0).unwrap();
        let b = deviation_stats(&spec, 2.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.count, 40);
        assert_eq!(a.samples.as_ref().unwrap().len(), 40);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = single.install(|| deviation_stats(&spec, 2.0).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn csv_row_layout() {
        let spec = EnsembleSpec::new(EnsembleFamily::RandomInManifold { n: 7, k: 2 }, 2, 3);
        let s = deviation_stats(&spec, 2.0).unwrap();
        let row = s.csv_row();
        assert!(row.starts_with("7,2,D,"));
        assert!(row.ends_with(",2,3"));
        let spec = EnsembleSpec::new(EnsembleFamily::LadderRandomWeights { n: 4 }, 2, 3);
        assert!(deviation_stats(&spec, 2.0).unwrap().csv_row().starts_with("4,,E,"));
    }
}
