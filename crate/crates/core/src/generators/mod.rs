//! Seeded, platform-independent generation of structured random matrices.
//!
//! # Random stream
//!
//! All randomness comes from SplitMix64. With state `x`, each draw is
//!
//! ```text
//! x = x + 0x9E3779B97F4A7C15            (mod 2^64)
//! z = x
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! out = z ^ (z >> 31)
//! ```
//!
//! A stream seeded with `s` starts at `x = s`. The stream for trial `i`
//! of a campaign seeded with `s` starts at `x = mix(s ^ mix(i + 1))`, where
//! `mix` is the output function above applied to its argument. Uniforms on
//! `[0, 1)` are `(out >> 11) · 2⁻⁵³`. A complex Gaussian with `E|z|² = 1`
//! consumes two uniforms `u₁, u₂` and returns
//! `√(−ln(1 − u₁)) · (cos 2πu₂ + i sin 2πu₂)` (Box-Muller, no rejection).
//! Matrices are filled row-major.

mod shrink;

pub use shrink::shrink;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{assemble, phase_normalized_q, ComplexMatrix, HermitianMatrix};

/// Upper end of the stretch `dᵢ` in expansive draws `U(I + D)W*`.
pub const EXPANSIVE_STRETCH: f64 = 1.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("invalid generation spec: {0}")]
    Invalid(String),
}

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub struct Stream(SplitMix64);

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream(SplitMix64::seed_from_u64(seed))
    }

    /// Independent stream for trial `trial` of a campaign seeded with `seed`.
    pub fn for_trial(seed: u64, trial: u64) -> Self {
        Self::new(trial_seed(seed, trial))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int_in(&mut self, lo: usize, hi: usize) -> usize {
        let span = hi - lo + 1;
        lo + ((self.uniform() * span as f64) as usize).min(span - 1)
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.int_in(0, items.len() - 1)]
    }

    /// Complex Gaussian with `E|z|² = 1`.
    pub fn complex_gaussian(&mut self) -> Complex64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let radius = (-(1.0 - u1).ln()).sqrt();
        Complex64::from_polar(radius, 2.0 * PI * u2)
    }
}

pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    mix64(seed ^ mix64(trial.wrapping_add(1)))
}

pub fn gaussian_matrix(rng: &mut Stream, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| rng.complex_gaussian())
}

/// `G G*/n` with complex Gaussian `G`.
pub fn random_psd(rng: &mut Stream, n: usize) -> HermitianMatrix {
    let g = gaussian_matrix(rng, n, n);
    HermitianMatrix::from_matrix(&(&g * &g.adjoint()).scale(1.0 / n as f64))
}

/// `G G*/n` with the trailing `n − rank` columns of `G` zeroed.
pub fn random_psd_rank_deficient(rng: &mut Stream, n: usize, rank: usize) -> HermitianMatrix {
    let mut g = gaussian_matrix(rng, n, n);
    for i in 0..n {
        for j in rank.min(n)..n {
            g[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    HermitianMatrix::from_matrix(&(&g * &g.adjoint()).scale(1.0 / n as f64))
}

/// `U Λ U*` with Haar `U` and the requested eigenvalues.
pub fn random_with_spectrum(rng: &mut Stream, eigenvalues: &[f64]) -> HermitianMatrix {
    let u = random_unitary(rng, eigenvalues.len());
    assemble(&u, eigenvalues)
}

/// `(G + G*)/(2√n)`.
pub fn random_hermitian(rng: &mut Stream, n: usize) -> HermitianMatrix {
    let g = gaussian_matrix(rng, n, n);
    HermitianMatrix::from_matrix(&(&g + &g.adjoint()).scale(0.5 / (n as f64).sqrt()))
}

/// Haar unitary: phase-normalized Householder QR of a Gaussian matrix.
pub fn random_unitary(rng: &mut Stream, n: usize) -> ComplexMatrix {
    phase_normalized_q(&gaussian_matrix(rng, n, n))
}

/// `rows x cols` matrix with orthonormal columns.
pub fn random_isometry(rng: &mut Stream, rows: usize, cols: usize) -> ComplexMatrix {
    phase_normalized_q(&gaussian_matrix(rng, rows, cols))
}

fn svd_assemble(u: &ComplexMatrix, d: &[f64], w: &ComplexMatrix) -> ComplexMatrix {
    let n = d.len();
    let ud = ComplexMatrix::from_fn(n, n, |i, j| u[(i, j)] * d[j]);
    &ud * &w.adjoint()
}

/// `U (I + D) W*` with `dᵢ` uniform on `[0, stretch)`; singular values `1 + dᵢ`.
pub fn random_expansive(rng: &mut Stream, n: usize, stretch: f64) -> ComplexMatrix {
    let u = random_unitary(rng, n);
    let d: Vec<f64> = (0..n).map(|_| 1.0 + stretch * rng.uniform()).collect();
    let w = random_unitary(rng, n);
    svd_assemble(&u, &d, &w)
}

/// `I + εP` with random PSD `P`.
pub fn random_expansive_near_identity(rng: &mut Stream, n: usize, eps: f64) -> ComplexMatrix {
    let p = random_psd(rng, n);
    &ComplexMatrix::identity(n) + &p.scale(eps)
}

/// `U D W*` with `dᵢ` uniform on `[0, 1)`.
pub fn random_contraction(rng: &mut Stream, n: usize) -> ComplexMatrix {
    let u = random_unitary(rng, n);
    let d: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
    let w = random_unitary(rng, n);
    svd_assemble(&u, &d, &w)
}

/// `m` blocks `Zᵢ` with `Σ Zᵢ*Zᵢ = ρ² I`: the row blocks of a random
/// `(mn) x n` isometry scaled by `ρ`.
pub fn contractive_family_with_rho(rng: &mut Stream, n: usize, m: usize, rho: f64) -> Vec<ComplexMatrix> {
    let q = random_isometry(rng, m * n, n).scale(rho);
    (0..m).map(|i| q.row_block(i * n, n)).collect()
}

/// As [`contractive_family_with_rho`] with `ρ = 1 − u ∈ (0, 1]` drawn first.
pub fn random_contractive_family(rng: &mut Stream, n: usize, m: usize) -> Vec<ComplexMatrix> {
    let rho = 1.0 - rng.uniform();
    contractive_family_with_rho(rng, n, m, rho)
}

/// Matrix ensemble for one slot of a [`GenSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Ensemble {
    Psd,
    PsdRankDeficient { rank: usize },
    PsdDegenerateSpectrum { eigenvalues: Vec<f64> },
    HermitianIndefinite,
    Expansive,
    ExpansiveNearIdentity { eps: f64 },
    Contraction,
    Unitary,
    ContractiveFamily,
    Identity,
}

/// Everything needed to regenerate the matrices of one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    /// Ensemble for each `Aᵢ`.
    pub a: Vec<Ensemble>,
    /// Ensemble for each `Zᵢ`.
    pub z: Vec<Ensemble>,
}

impl GenSpec {
    /// Draws all `Aᵢ` in order, then all `Zᵢ` (or the joint contractive family).
    pub fn generate(&self) -> Result<Vec<(HermitianMatrix, ComplexMatrix)>, GenError> {
        let (n, m) = (self.n, self.m);
        if n == 0 || n > crate::linalg::MAX_DIM || m == 0 {
            return Err(GenError::Invalid(format!("n = {n}, m = {m}")));
        }
        if self.a.len() != m || self.z.len() != m {
            return Err(GenError::Invalid("one ensemble per slot required".into()));
        }
        let family = self.z.iter().filter(|e| **e == Ensemble::ContractiveFamily).count();
        if family != 0 && family != m {
            return Err(GenError::Invalid("contractive-family must cover every Z slot".into()));
        }
        let mut rng = Stream::new(self.seed);
        let mut a_mats = Vec::with_capacity(m);
        for e in &self.a {
            a_mats.push(match e {
                Ensemble::Psd => random_psd(&mut rng, n),
                Ensemble::PsdRankDeficient { rank } => random_psd_rank_deficient(&mut rng, n, *rank),
                Ensemble::PsdDegenerateSpectrum { eigenvalues } => {
                    if eigenvalues.len() != n {
                        return Err(GenError::Invalid("spectrum length must equal n".into()));
                    }
                    random_with_spectrum(&mut rng, eigenvalues)
                }
                Ensemble::HermitianIndefinite => random_hermitian(&mut rng, n),
                Ensemble::Identity => HermitianMatrix::identity(n),
                other => return Err(GenError::Invalid(format!("{other:?} is not a Hermitian ensemble"))),
            });
        }
        let z_mats: Vec<ComplexMatrix> = if family == m {
            random_contractive_family(&mut rng, n, m)
        } else {
            let mut v = Vec::with_capacity(m);
            for e in &self.z {
                v.push(match e {
                    Ensemble::Expansive => random_expansive(&mut rng, n, EXPANSIVE_STRETCH),
                    Ensemble::ExpansiveNearIdentity { eps } => random_expansive_near_identity(&mut rng, n, *eps),
                    Ensemble::Contraction => random_contraction(&mut rng, n),
                    Ensemble::Unitary => random_unitary(&mut rng, n),
                    Ensemble::Identity => ComplexMatrix::identity(n),
                    other => return Err(GenError::Invalid(format!("{other:?} is not a Z ensemble"))),
                });
            }
            v
        };
        Ok(a_mats.into_iter().zip(z_mats).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig_hermitian, singular_values};

    #[test]
    fn splitmix_reference_vector() {
        // http://xoshiro.di.unimi.it/splitmix64.c
        let mut s = Stream::new(1477776061723855037);
        assert_eq!(s.next_u64(), 1985237415132408290);
        assert_eq!(s.next_u64(), 2979275885539914483);
    }

    #[test]
    fn mix_matches_stream_output() {
        let mut s = Stream::new(42);
        assert_eq!(s.next_u64(), mix64(42u64.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    }

    #[test]
    fn uniform_and_int_ranges() {
        let mut s = Stream::new(7);
        for _ in 0..1000 {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
            let k = s.int_in(2, 5);
            assert!((2..=5).contains(&k));
        }
    }

    #[test]
    fn psd_is_psd() {
        let mut s = Stream::new(3);
        for n in 1..=6 {
            let a = random_psd(&mut s, n);
            assert!(eig_hermitian(&a).unwrap().min() >= -1e-12);
        }
    }

    #[test]
    fn rank_one_has_two_zero_eigenvalues() {
        let mut s = Stream::new(11);
        let a = random_psd_rank_deficient(&mut s, 3, 1);
        let v = eig_hermitian(&a).unwrap().values;
        assert!(v[0] > 1e-3);
        assert!(v[1].abs() < 1e-10 && v[2].abs() < 1e-10);
    }

    #[test]
    fn degenerate_spectrum_is_reproduced() {
        let mut s = Stream::new(5);
        let a = random_with_spectrum(&mut s, &[2.0, 2.0, 1.0]);
        let v = eig_hermitian(&a).unwrap().values;
        for (x, y) in v.iter().zip([2.0, 2.0, 1.0]) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn expansive_contraction_unitary_bounds() {
        let mut s = Stream::new(9);
        let z = random_expansive(&mut s, 4, EXPANSIVE_STRETCH);
        assert!(*singular_values(&z).unwrap().last().unwrap() >= 1.0 - 1e-10);
        let z0 = random_expansive(&mut s, 4, 0.0);
        for sv in singular_values(&z0).unwrap() {
            assert!((sv - 1.0).abs() < 1e-12);
        }
        let c = random_contraction(&mut s, 4);
        assert!(singular_values(&c).unwrap()[0] <= 1.0 + 1e-10);
        let u = random_unitary(&mut s, 4);
        assert!((&u.adjoint() * &u).distance(&ComplexMatrix::identity(4)) <= 1e-10);
    }

    #[test]
    fn near_identity_with_zero_eps_is_identity() {
        let mut s = Stream::new(1);
        assert_eq!(random_expansive_near_identity(&mut s, 3, 0.0), ComplexMatrix::identity(3));
    }

    #[test]
    fn contractive_family_examples() {
        let mut s = Stream::new(13);
        let fam = contractive_family_with_rho(&mut s, 3, 1, 1.0);
        assert!((&fam[0].adjoint() * &fam[0]).distance(&ComplexMatrix::identity(3)) < 1e-12);
        let fam = random_contractive_family(&mut s, 1, 2);
        assert!(fam[0][(0, 0)].norm_sqr() + fam[1][(0, 0)].norm_sqr() <= 1.0 + 1e-12);
        let fam = random_contractive_family(&mut s, 4, 3);
        let sum = fam.iter().fold(ComplexMatrix::zeros(4), |acc, z| &acc + &(&z.adjoint() * z));
        let top = eig_hermitian(&HermitianMatrix::from_matrix(&sum)).unwrap().max();
        assert!(top <= 1.0 + 1e-10);
    }

    #[test]
    fn genspec_is_deterministic_and_validated() {
        let spec = GenSpec {
            seed: 99,
            n: 3,
            m: 2,
            a: vec![Ensemble::Psd, Ensemble::PsdRankDeficient { rank: 1 }],
            z: vec![Ensemble::Expansive, Ensemble::ExpansiveNearIdentity { eps: 0.1 }],
        };
        let x = spec.generate().unwrap();
        let y = spec.generate().unwrap();
        assert_eq!(x, y);
        let bad = GenSpec { z: vec![Ensemble::ContractiveFamily, Ensemble::Unitary], ..spec.clone() };
        assert!(bad.generate().is_err());
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains(r#"{"kind":"psd-rank-deficient","rank":1}"#));
        assert_eq!(serde_json::from_str::<GenSpec>(&json).unwrap(), spec);
    }

    #[test]
    fn trial_streams_do_not_depend_on_neighbours() {
        let a: Vec<u64> = (0..5).map(|i| Stream::for_trial(42, i).next_u64()).collect();
        let b = Stream::for_trial(42, 3).next_u64();
        assert_eq!(a[3], b);
        assert_eq!(a.iter().collect::<std::collections::HashSet<_>>().len(), 5);
    }
}
