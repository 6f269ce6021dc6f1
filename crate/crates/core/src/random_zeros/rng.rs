use crate::hash::Fnv1a64;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

/// Named substream of a master seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub label: String,
}

impl RngStream {
    pub fn new(seed: u64, label: impl Into<String>) -> Self {
        RngStream {
            seed,
            label: label.into(),
        }
    }

    /// Stream of Monte Carlo sample `i` at tensor power `p`.
    pub fn sample(seed: u64, p: u32, i: usize) -> Self {
        Self::new(seed, format!("p={p}/i={i}"))
    }

    /// FNV-1a-64 of the little-endian seed bytes followed by the label.
    pub fn substream_seed(&self) -> u64 {
        let mut h = Fnv1a64::new();
        h.update(&self.seed.to_le_bytes());
        h.update(self.label.as_bytes());
        h.finish()
    }

    pub fn rng(&self) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(self.substream_seed())
    }
}

/// Uniform point of the unit sphere `S^{2d-1}` in `C^d`: normalized
/// standard complex Gaussians.
pub fn sample_sphere(d: usize, stream: &RngStream) -> Vec<Complex64> {
    assert!(d >= 1, "sphere dimension must be positive");
    let mut rng = stream.rng();
    loop {
        let mut a: Vec<Complex64> = (0..d)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        let norm = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            a.iter_mut().for_each(|z| *z /= norm);
            return a;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_depend_on_label() {
        let a = RngStream::new(7, "p=8/i=0");
        let b = RngStream::new(7, "p=8/i=1");
        assert_ne!(a.substream_seed(), b.substream_seed());
        assert_eq!(sample_sphere(5, &a), sample_sphere(5, &a.clone()));
    }

    #[test]
    fn one_dimensional_sample_has_unit_modulus() {
        let a = sample_sphere(1, &RngStream::new(1, "x"));
        assert!((a[0].norm() - 1.0).abs() < 1e-15);
    }
}
